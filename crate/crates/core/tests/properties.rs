use num_complex::Complex64;
use proptest::prelude::*;
use vacpair_core::field::{make_alternating_assist, make_pulse_train, make_single_pulse, MASS};
use vacpair_core::qve::qve_distribution;
use vacpair_core::riccati::{born_reflection, linear_grid, number_density, solve_mode, solve_mode_observed, spectrum};
use vacpair_core::scan::{distribution, sweep_delay, Observable, SweepOutcome, SweepSpec, Template, Variable};
use vacpair_core::semiclassical::slit_factor;
use vacpair_core::{FieldConfig, Gauge, Method, MomentumPoint, PulseSpec, QuadratureSettings, SignMode, SolverSettings, Tolerances};

fn settings(cfg: &FieldConfig) -> SolverSettings {
    SolverSettings::for_config(cfg, Tolerances::default()).unwrap()
}

fn pulses() -> impl Strategy<Value = FieldConfig> {
    let pulse = (0.01..0.5f64, 0.02..1.0f64, -50.0..50.0f64, prop_oneof![Just(1i8), Just(-1i8)])
        .prop_map(|(e, w, c, s)| PulseSpec::new(e, w, c, s));
    (proptest::collection::vec(pulse, 1..4), -3.0..3.0f64)
        .prop_map(|(p, g)| FieldConfig::new("random", Gauge::Constant(g), p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_is_minus_derivative_of_potential(cfg in pulses(), t in -80.0..80.0f64) {
        let h = 1e-4;
        let da = (cfg.a_potential_real(t + h) - cfg.a_potential_real(t - h)) / (2.0 * h);
        let e = cfg.e_field_real(t);
        let scale = cfg.pulses.iter().map(|p| p.amplitude * p.inverse_width.powi(2)).sum::<f64>();
        prop_assert!((e + da).abs() <= 1e-6 * scale.max(1e-3), "E = {e}, dA/dt = {da}");
    }

    #[test]
    fn complex_field_is_conjugation_symmetric(cfg in pulses(), re in -60.0..60.0f64, im in 0.01..10.0f64) {
        let t = Complex64::new(re, im);
        if let (Ok(e), Ok(ec)) = (cfg.e_field(t), cfg.e_field(t.conj())) {
            prop_assert!((e.conj() - ec).norm() <= 1e-12 * e.norm().max(1.0));
        }
        if let (Ok(a), Ok(ac)) = (cfg.a_potential(t), cfg.a_potential(t.conj())) {
            prop_assert!((a.conj() - ac).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn real_frequency_is_at_least_transverse_mass(cfg in pulses(), t in -100.0..100.0f64, kp in -3.0..3.0f64, kt in 0.0..2.0f64) {
        let k = MomentumPoint::new(kp, kt).unwrap();
        prop_assert!(cfg.omega_real(k, t) >= (MASS * MASS + kt * kt).sqrt() * (1.0 - 1e-15));
    }

    #[test]
    fn two_slit_identity(theta in -20.0..20.0f64) {
        let cos2 = theta.cos().powi(2);
        prop_assert!((slit_factor(2, theta) - 4.0 * cos2).abs() <= 1e-14 * 4.0);
    }
}

#[test]
fn zero_field_creates_nothing() {
    let cfg = FieldConfig::zero_field();
    let s = settings(&cfg);
    for kp in [-1.0, 0.0, 0.7] {
        let k = MomentumPoint::new(kp, 0.3).unwrap();
        for m in [Method::Riccati, Method::Born, Method::Qve, Method::Fermion] {
            assert_eq!(distribution(&cfg, k, m, &s).unwrap(), 0.0, "{m}");
        }
    }
}

#[test]
fn gauge_shift_translates_the_spectrum() {
    let base = make_single_pulse(0.1, 0.05).unwrap().with_gauge(Gauge::Constant(0.0));
    let c = 0.25;
    let shifted = base.clone().with_gauge(Gauge::Constant(c));
    let grid = linear_grid(-0.5, 0.5, 40, 0.0).unwrap();
    let moved: Vec<MomentumPoint> = grid.iter().map(|k| MomentumPoint::longitudinal(k.k_parallel + c)).collect();
    let a = spectrum(&base, &grid, &settings(&base)).unwrap().values();
    let b = spectrum(&shifted, &moved, &settings(&shifted)).unwrap().values();
    let peak = a.iter().copied().fold(0.0, f64::max);
    let dev = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-8 * peak, "max deviation {dev:e} against peak {peak:e}");
}

#[test]
fn reflection_stays_inside_unit_disk_and_maps_to_f() {
    let configs = [
        make_single_pulse(0.1, 0.05).unwrap(),
        make_pulse_train(3, SignMode::Alternating, 0.3, 0.2, 30.0).unwrap(),
        make_alternating_assist(0.25, 0.02, 0.025, 1.0, 10.0).unwrap(),
    ];
    for cfg in &configs {
        let s = settings(cfg);
        for kp in [-2.0, -0.3, 0.0, 0.4] {
            let mut largest: f64 = 0.0;
            let r = solve_mode_observed(cfg, MomentumPoint::longitudinal(kp), &s, |m| largest = largest.max(m.r.norm())).unwrap();
            assert!(largest < 1.0 && r.max_abs_r < 1.0);
            assert_eq!(largest, r.max_abs_r);
            let r2 = r.r_final.norm_sqr();
            assert!((r.f - r2 / (1.0 - r2)).abs() <= 1e-15 * r.f.max(1e-300));
            assert!(r.f >= 0.0);
        }
    }
}

#[test]
fn born_amplitude_is_within_five_percent_at_subcritical_strength() {
    let single = make_single_pulse(0.1, 0.05).unwrap().with_gauge(Gauge::Constant(0.0));
    let two = make_pulse_train(2, SignMode::Alternating, 0.1, 0.05, 180.32)
        .unwrap()
        .with_gauge(Gauge::Named(vacpair_core::GaugeKeyword::Paper2pulse));
    let (s1, s2) = (settings(&single), settings(&two));
    for kp in [-0.4, -0.05, 0.0, 0.05, 0.3] {
        let k = MomentumPoint::longitudinal(kp);
        let exact = solve_mode(&single, k, &s1).unwrap().r_final;
        let born = born_reflection(&single, k, &s1).unwrap();
        assert!((born - exact).norm() < 0.05 * exact.norm(), "single, k = {kp}: {born} vs {exact}");

        // fringe nodes cancel R almost completely, so measure against the envelope amplitude
        let exact2 = solve_mode(&two, k, &s2).unwrap().r_final;
        let born2 = born_reflection(&two, k, &s2).unwrap();
        assert!((born2 - exact2).norm() < 0.05 * 2.0 * exact.norm(), "two-pulse, k = {kp}: {born2} vs {exact2}");
    }
}

#[test]
fn qve_agrees_with_riccati_across_a_fast_train() {
    let cfg = make_pulse_train(3, SignMode::Alternating, 0.3, 0.3, 12.0).unwrap();
    let s = settings(&cfg);
    for kp in [-1.0, -0.2, 0.0, 0.5] {
        let k = MomentumPoint::new(kp, 0.2).unwrap();
        let r = solve_mode(&cfg, k, &s).unwrap().f;
        let q = qve_distribution(&cfg, k, &s).unwrap();
        assert!((q - r).abs() < 1e-3 * r, "k = {kp}: {q:e} vs {r:e}");
    }
}

#[test]
fn density_converges_under_grid_refinement() {
    let cfg = make_single_pulse(0.3, 0.5).unwrap().with_gauge(Gauge::Constant(0.0));
    let s = settings(&cfg);
    let coarse = number_density(&cfg, &QuadratureSettings::new(-4.0, 4.0, 40, 3.0, 20), &s).unwrap();
    let fine = number_density(&cfg, &QuadratureSettings::new(-4.0, 4.0, 80, 3.0, 40), &s).unwrap();
    let change = (fine.n - coarse.n).abs();
    assert!(change <= coarse.error_estimate, "coarse {:e} fine {:e} estimate {:e}", coarse.n, fine.n, coarse.error_estimate);
    assert!(change < 5e-3 * fine.n);
    assert!(fine.error_estimate < coarse.error_estimate);
    assert!(fine.boundary_f <= 1e-4 * fine.peak_f);
}

#[test]
fn tighter_tolerance_changes_f_by_less_than_measured_bound() {
    let cfg = make_single_pulse(0.1, 0.05).unwrap();
    let s = settings(&cfg);
    for kp in [-2.0, -1.5] {
        let k = MomentumPoint::longitudinal(kp);
        let a = solve_mode(&cfg, k, &s).unwrap().f;
        let b = solve_mode(&cfg, k, &s.tightened(10.0)).unwrap().f;
        assert!((a - b).abs() < 1e-5 * b, "{a:e} vs {b:e}");
    }
}

#[test]
fn spectrum_csv_is_deterministic_and_round_trips() {
    let cfg = make_pulse_train(2, SignMode::Alternating, 0.2, 0.3, 15.0).unwrap();
    let grid = linear_grid(-1.0, 1.0, 30, 0.1).unwrap();
    let s = settings(&cfg);
    let a = spectrum(&cfg, &grid, &s).unwrap();
    let b = spectrum(&cfg, &grid, &s).unwrap();
    let text = a.to_csv_string();
    assert_eq!(text, b.to_csv_string());
    let back = vacpair_core::SpectrumTable::read_csv(text.as_bytes()).unwrap();
    assert_eq!(back, a);
}

fn fast_sweep(values: Vec<f64>) -> SweepSpec {
    SweepSpec {
        template: Template::PulseTrain {
            n: 2,
            sign_mode: SignMode::Alternating,
            amplitude: 0.2,
            inverse_width: 0.4,
            delay: 0.0,
        },
        variable: Variable::T,
        values,
        observable: Observable::FAtK0 { k_perp: 0.0 },
        method: Method::Riccati,
        gauge: Some(Gauge::Constant(0.0)),
    }
}

#[test]
fn reversed_sweep_reverses_rows() {
    let by_settings = |c: &FieldConfig| SolverSettings::for_config(c, Tolerances::default());
    let forward = sweep_delay(&fast_sweep(vec![8.0, 9.0, 10.5, 12.0]), &by_settings).unwrap();
    let backward = sweep_delay(&fast_sweep(vec![12.0, 10.5, 9.0, 8.0]), &by_settings).unwrap();
    let mut rows = backward.rows.clone();
    rows.reverse();
    assert_eq!(forward.rows, rows);
}

#[test]
fn single_value_sweep_equals_direct_call() {
    let by_settings = |c: &FieldConfig| SolverSettings::for_config(c, Tolerances::default());
    let spec = fast_sweep(vec![9.0]);
    let table = sweep_delay(&spec, &by_settings).unwrap();
    let cfg = spec.config_at(9.0).unwrap();
    let direct = solve_mode(&cfg, MomentumPoint::longitudinal(0.0), &settings(&cfg)).unwrap().f;
    assert_eq!(table.rows.len(), 1);
    assert_eq!(table.rows[0].outcome, Ok(SweepOutcome::Scalar { f: direct }));
}

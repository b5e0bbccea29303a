//! Quantum Vlasov cross-check for the bosonic distribution.
//!
//! The local kinetic form for scalars,
//!
//! ```text
//! df/dt = (W/2) v
//! dv/dt = W (1 + 2f) - 2Ω u
//! du/dt = 2Ω v,            W = qE (k∥ - qA) / Ω²,
//! ```
//!
//! is evolved from `f = v = u = 0`. The flow conserves
//! `(1 + 2f)² - u² - v² = 1`, and the final `f` is read from that invariant.
//! Deep in an interference node the integrated `f` is the small remainder of a
//! much larger transient and loses digits to truncation error, while `u, v`
//! stay well conditioned. Once the field is off, `u² + v²` is constant, so no
//! averaging is needed.

use crate::error::{Error, Result};
use crate::field::{FieldConfig, MomentumPoint, CHARGE};
use crate::ode;
use crate::riccati::{tabulate, SolverSettings};
use crate::table::{Method, SpectrumTable};

/// Free evolution after the window, in units of the slowest pulse width.
pub const FREE_WIDTHS: f64 = 5.0;

/// Asymptotic `f(k)` from the kinetic equation.
///
/// `f` is tiny next to the correlators `u, v`, so the absolute tolerance is
/// squared to leave relative control in charge.
pub fn qve_distribution(config: &FieldConfig, k: MomentumPoint, s: &SolverSettings) -> Result<f64> {
    config.validate()?;
    s.validate(config)?;
    let k = MomentumPoint::new(k.k_parallel, k.k_perp)?;
    let t_end = s.t_end + config.slowest_inverse_width().map_or(0.0, |w| FREE_WIDTHS / w);
    let k_eff = k.k_parallel - CHARGE * config.gauge_value();
    let m2 = k.transverse_mass_squared();
    let rhs = |t: f64, y: &[f64; 3]| {
        let (e, shape) = config.field_and_shape_real(t);
        let p = k_eff - CHARGE * shape;
        let w2 = m2 + p * p;
        let omega = w2.sqrt();
        let w = CHARGE * e * p / w2;
        [0.5 * w * y[1], w * (1.0 + 2.0 * y[0]) - 2.0 * omega * y[2], 2.0 * omega * y[1]]
    };
    let window = SolverSettings { t_end, ..*s };
    let out = ode::integrate(rhs, s.t_start, [0.0; 3], t_end, &window.ode_options(s.abs_tol * s.abs_tol), |_, _| Ok(()))?;
    let f = from_invariant(out.y[1], out.y[2]);
    if !f.is_finite() {
        return Err(Error::StepUnderflow { t: out.t, step: 0.0 });
    }
    Ok(f)
}

/// `f` solving `(1 + 2f)² = 1 + u² + v²`, written without cancellation.
pub fn from_invariant(u: f64, v: f64) -> f64 {
    let s2 = u * u + v * v;
    s2 / (2.0 * ((1.0 + s2).sqrt() + 1.0))
}

pub fn qve_spectrum(config: &FieldConfig, k_grid: &[MomentumPoint], s: &SolverSettings) -> Result<SpectrumTable> {
    config.validate()?;
    s.validate(config)?;
    tabulate(k_grid, Method::Qve, |k| qve_distribution(config, k, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_single_pulse, Gauge};
    use crate::riccati::{solve_mode, Tolerances};

    #[test]
    fn zero_field_is_empty() {
        let cfg = FieldConfig::zero_field();
        let s = SolverSettings::for_config(&cfg, Tolerances::default()).unwrap();
        assert_eq!(qve_distribution(&cfg, MomentumPoint::longitudinal(0.2), &s).unwrap(), 0.0);
    }

    #[test]
    fn invariant_readout_inverts_the_constraint() {
        for (u, v) in [(0.0, 0.0), (1e-9, -3e-9), (0.3, 0.7), (40.0, 2.0)] {
            let f = from_invariant(u, v);
            let lhs = (1.0 + 2.0 * f).powi(2);
            assert!((lhs - (1.0 + u * u + v * v)).abs() <= 1e-14 * lhs);
        }
        assert_eq!(from_invariant(1e-9, 0.0), 0.25e-18);
    }

    #[test]
    fn agrees_with_riccati_on_single_pulse() {
        let cfg = make_single_pulse(0.1, 0.05).unwrap().with_gauge(Gauge::Constant(0.0));
        let s = SolverSettings::for_config(&cfg, Tolerances::default()).unwrap();
        for k in [0.0, 0.4] {
            let k = MomentumPoint::longitudinal(k);
            let q = qve_distribution(&cfg, k, &s).unwrap();
            let r = solve_mode(&cfg, k, &s).unwrap().f;
            assert!(q >= 0.0);
            assert!((q - r).abs() < 1e-3 * r, "{q} {r}");
        }
    }
}

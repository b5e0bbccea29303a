//! Signed sums of Sauter pulses.
//!
//! A configuration defines
//!
//! ```text
//! E(t) = Σ sᵢ Eᵢ sech²[ωᵢ (t - cᵢ)]
//! A(t) = g - Σ sᵢ (Eᵢ/ωᵢ) tanh[ωᵢ (t - cᵢ)]
//! ```
//!
//! so that `E = -dA/dt` holds identically. Both are analytic in a strip around
//! the real axis and are evaluated at complex times by the turning-point code.
//! Poles sit at `cᵢ + iπ(2p+1)/(2ωᵢ)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Particle charge in natural units.
pub const CHARGE: f64 = 1.0;
/// Particle mass in natural units.
pub const MASS: f64 = 1.0;

/// Complex evaluation closer than this to a pole of the field is refused.
pub const POLE_EXCLUSION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub amplitude: f64,
    pub inverse_width: f64,
    pub center: f64,
    pub sign: i8,
}

impl PulseSpec {
    pub fn new(amplitude: f64, inverse_width: f64, center: f64, sign: i8) -> Self {
        Self {
            amplitude,
            inverse_width,
            center,
            sign,
        }
    }

    fn signed_amplitude(&self) -> f64 {
        f64::from(self.sign) * self.amplitude
    }

    fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "pulse amplitude must be positive, got {}",
                self.amplitude
            )));
        }
        if !(self.inverse_width.is_finite() && self.inverse_width > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "pulse inverse_width must be positive, got {}",
                self.inverse_width
            )));
        }
        if !self.center.is_finite() {
            return Err(Error::InvalidConfig("pulse center must be finite".into()));
        }
        if self.sign != 1 && self.sign != -1 {
            return Err(Error::InvalidConfig(format!(
                "pulse sign must be +1 or -1, got {}",
                self.sign
            )));
        }
        Ok(())
    }
}

/// Named gauge choices accepted in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeKeyword {
    /// `g = E₀/ω₀` of the first pulse. For the alternating two-pulse field this
    /// gives `A(t) = E₀/ω₀ {1 + tanh[ω₀(t-T/2)] - tanh[ω₀(t+T/2)]}`.
    #[serde(rename = "paper_2pulse")]
    Paper2pulse,
    /// `g` such that `A(-∞) = 0`.
    VanishAtMinusInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Gauge {
    Constant(f64),
    Named(GaugeKeyword),
}

impl Default for Gauge {
    fn default() -> Self {
        Gauge::Named(GaugeKeyword::VanishAtMinusInfinity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMode {
    Equal,
    Alternating,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    pub label: String,
    #[serde(default)]
    pub gauge_constant: Gauge,
    pub pulses: Vec<PulseSpec>,
}

impl FieldConfig {
    pub fn new(label: impl Into<String>, gauge_constant: Gauge, pulses: Vec<PulseSpec>) -> Result<Self> {
        let config = Self {
            label: label.into(),
            gauge_constant,
            pulses,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn zero_field() -> Self {
        Self {
            label: "zero".into(),
            gauge_constant: Gauge::Constant(0.0),
            pulses: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        for pulse in &self.pulses {
            pulse.validate()?;
        }
        match self.gauge_constant {
            Gauge::Constant(g) if !g.is_finite() => {
                Err(Error::InvalidConfig("gauge_constant must be finite".into()))
            }
            Gauge::Named(GaugeKeyword::Paper2pulse) if self.pulses.is_empty() => Err(
                Error::InvalidConfig("paper_2pulse gauge needs at least one pulse".into()),
            ),
            _ => Ok(()),
        }
    }

    pub fn with_gauge(mut self, gauge: Gauge) -> Self {
        self.gauge_constant = gauge;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// The numeric constant `g` added to the potential.
    pub fn gauge_value(&self) -> f64 {
        match self.gauge_constant {
            Gauge::Constant(g) => g,
            Gauge::Named(GaugeKeyword::Paper2pulse) => {
                let p = &self.pulses[0];
                p.amplitude / p.inverse_width
            }
            // A(-∞) = g + Σ sᵢ Eᵢ/ωᵢ
            Gauge::Named(GaugeKeyword::VanishAtMinusInfinity) => -self
                .pulses
                .iter()
                .map(|p| p.signed_amplitude() / p.inverse_width)
                .sum::<f64>(),
        }
    }

    pub fn max_amplitude(&self) -> f64 {
        self.pulses.iter().map(|p| p.amplitude).fold(0.0, f64::max)
    }

    /// Smallest inverse width, i.e. the longest pulse.
    pub fn slowest_inverse_width(&self) -> Option<f64> {
        self.pulses.iter().map(|p| p.inverse_width).reduce(f64::min)
    }

    pub fn fastest_inverse_width(&self) -> Option<f64> {
        self.pulses.iter().map(|p| p.inverse_width).reduce(f64::max)
    }

    /// Earliest and latest pulse centers.
    pub fn center_span(&self) -> Option<(f64, f64)> {
        let first = self.pulses.iter().map(|p| p.center).reduce(f64::min)?;
        let last = self.pulses.iter().map(|p| p.center).reduce(f64::max)?;
        Some((first, last))
    }

    /// Field strength on the real axis.
    pub fn e_field_real(&self, t: f64) -> f64 {
        self.pulses
            .iter()
            .map(|p| p.signed_amplitude() * sech2_real(p.inverse_width * (t - p.center)))
            .sum()
    }

    /// Vector potential on the real axis.
    pub fn a_potential_real(&self, t: f64) -> f64 {
        self.gauge_value() + self.shape_real(t)
    }

    /// `(E(t), A(t) - g)` on the real axis with one exponential per pulse.
    ///
    /// Uses `e^{-2|x|}` directly so the sech² tails keep full relative
    /// precision instead of being formed as `1 - tanh²`.
    #[inline]
    pub(crate) fn field_and_shape_real(&self, t: f64) -> (f64, f64) {
        let mut e = 0.0;
        let mut shape = 0.0;
        for p in &self.pulses {
            let x = p.inverse_width * (t - p.center);
            let q = (-2.0 * x.abs()).exp();
            let d = 1.0 / (1.0 + q);
            let th = (1.0 - q) * d * x.signum();
            let s2 = 4.0 * q * d * d;
            let a = p.signed_amplitude();
            e += a * s2;
            shape -= a / p.inverse_width * th;
        }
        (e, shape)
    }

    /// `A(t) - g` on the real axis.
    pub(crate) fn shape_real(&self, t: f64) -> f64 {
        self.pulses
            .iter()
            .map(|p| -p.signed_amplitude() / p.inverse_width * (p.inverse_width * (t - p.center)).tanh())
            .sum()
    }

    pub fn e_field(&self, t: Complex64) -> Result<Complex64> {
        self.check_poles(t)?;
        Ok(self
            .pulses
            .iter()
            .map(|p| p.signed_amplitude() * sech2(p.inverse_width * (t - p.center)))
            .sum())
    }

    pub fn a_potential(&self, t: Complex64) -> Result<Complex64> {
        self.check_poles(t)?;
        let shape: Complex64 = self
            .pulses
            .iter()
            .map(|p| -p.signed_amplitude() / p.inverse_width * tanh(p.inverse_width * (t - p.center)))
            .sum();
        Ok(shape + self.gauge_value())
    }

    /// `Ω² = m² + k⊥² + (k∥ - qA(t))²`, analytic away from the field poles.
    pub fn omega_squared(&self, k: MomentumPoint, t: Complex64) -> Result<Complex64> {
        let p = k.k_parallel - CHARGE * self.a_potential(t)?;
        Ok(k.transverse_mass_squared() + p * p)
    }

    /// `Ω²` and its time derivative `2 (k∥ - qA) qE`.
    pub fn omega_squared_with_derivative(&self, k: MomentumPoint, t: Complex64) -> Result<(Complex64, Complex64)> {
        let p = k.k_parallel - CHARGE * self.a_potential(t)?;
        let e = self.e_field(t)?;
        Ok((k.transverse_mass_squared() + p * p, 2.0 * p * CHARGE * e))
    }

    /// Positive root of `Ω²` on the real axis.
    pub fn omega_real(&self, k: MomentumPoint, t: f64) -> f64 {
        let p = k.k_parallel - CHARGE * self.a_potential_real(t);
        (k.transverse_mass_squared() + p * p).sqrt()
    }

    fn check_poles(&self, t: Complex64) -> Result<()> {
        if t.im == 0.0 {
            return Ok(());
        }
        for p in &self.pulses {
            let z = p.inverse_width * (t - p.center);
            let index = ((z.im - FRAC_PI_2) / PI).round();
            let pole_z = Complex64::new(0.0, FRAC_PI_2 + index * PI);
            if (z - pole_z).norm() / p.inverse_width < POLE_EXCLUSION {
                return Err(Error::FieldPole {
                    t,
                    pole: p.center + pole_z / p.inverse_width,
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for FieldConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} pulses, g = {})", self.label, self.pulses.len(), self.gauge_value())
    }
}

/// Single Sauter pulse `E sech²(ωt)` centred at zero.
pub fn make_single_pulse(amplitude: f64, inverse_width: f64) -> Result<FieldConfig> {
    FieldConfig::new(
        format!("single(E={amplitude},w={inverse_width})"),
        Gauge::default(),
        vec![PulseSpec::new(amplitude, inverse_width, 0.0, 1)],
    )
}

/// Strong slow pulse at `-T/2` plus weak fast pulse at `+T/2`, both positive.
pub fn make_equal_sign_assist(e1: f64, w1: f64, e2: f64, w2: f64, delay: f64) -> Result<FieldConfig> {
    FieldConfig::new(
        format!("E_A1(T={delay})"),
        Gauge::default(),
        vec![
            PulseSpec::new(e1, w1, -delay / 2.0, 1),
            PulseSpec::new(e2, w2, delay / 2.0, 1),
        ],
    )
}

/// Strong slow pulse at `-T/2` minus weak fast pulse at `+T/2`.
pub fn make_alternating_assist(e1: f64, w1: f64, e2: f64, w2: f64, delay: f64) -> Result<FieldConfig> {
    FieldConfig::new(
        format!("E_A2(T={delay})"),
        Gauge::default(),
        vec![
            PulseSpec::new(e1, w1, -delay / 2.0, 1),
            PulseSpec::new(e2, w2, delay / 2.0, -1),
        ],
    )
}

/// `N` identical pulses with centres `-(i - (N+1)/2) T` and signs `(±1)^i`, `i = 1..=N`.
pub fn make_pulse_train(n: usize, mode: SignMode, amplitude: f64, inverse_width: f64, delay: f64) -> Result<FieldConfig> {
    if n == 0 {
        return Err(Error::InvalidConfig("pulse train needs N >= 1".into()));
    }
    let half = (n as f64 + 1.0) / 2.0;
    let pulses = (1..=n)
        .map(|i| {
            let sign = match mode {
                SignMode::Equal => 1,
                SignMode::Alternating if i % 2 == 1 => -1,
                SignMode::Alternating => 1,
            };
            PulseSpec::new(amplitude, inverse_width, -(i as f64 - half) * delay, sign)
        })
        .collect();
    let tag = match mode {
        SignMode::Equal => "+",
        SignMode::Alternating => "-",
    };
    FieldConfig::new(format!("E_B{tag}(N={n},T={delay})"), Gauge::default(), pulses)
}

/// Canonical momentum relative to the field axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumPoint {
    pub k_parallel: f64,
    pub k_perp: f64,
}

impl MomentumPoint {
    pub fn new(k_parallel: f64, k_perp: f64) -> Result<Self> {
        if !k_parallel.is_finite() || !k_perp.is_finite() || k_perp < 0.0 {
            return Err(Error::InvalidInput(format!(
                "momentum point needs finite k_parallel and k_perp >= 0, got ({k_parallel}, {k_perp})"
            )));
        }
        Ok(Self { k_parallel, k_perp })
    }

    /// Longitudinal momentum with `k⊥ = 0`.
    pub fn longitudinal(k_parallel: f64) -> Self {
        Self {
            k_parallel,
            k_perp: 0.0,
        }
    }

    /// `m² + k⊥²`.
    pub fn transverse_mass_squared(&self) -> f64 {
        MASS * MASS + self.k_perp * self.k_perp
    }
}

pub(crate) fn sech2_real(x: f64) -> f64 {
    if x.abs() > 350.0 {
        return 0.0;
    }
    let c = x.cosh();
    1.0 / (c * c)
}

fn sech2(z: Complex64) -> Complex64 {
    // sech z ≈ 2e^{∓z} once e^{-2|Re z|} underflows relative to 1
    if z.re > 20.0 {
        return 4.0 * (-2.0 * z).exp();
    }
    if z.re < -20.0 {
        return 4.0 * (2.0 * z).exp();
    }
    let c = z.cosh();
    (c * c).inv()
}

fn tanh(z: Complex64) -> Complex64 {
    if z.re.abs() > 20.0 {
        let s = z.re.signum();
        // tanh z = s (1 - 2e^{-2sz} + ...)
        return s * (1.0 - 2.0 * (-2.0 * s * z).exp());
    }
    let (x2, y2) = (2.0 * z.re, 2.0 * z.im);
    let d = x2.cosh() + y2.cos();
    Complex64::new(x2.sinh() / d, y2.sin() / d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_pulse_paper() -> FieldConfig {
        make_pulse_train(2, SignMode::Alternating, 0.1, 0.05, 180.32)
            .unwrap()
            .with_gauge(Gauge::Named(GaugeKeyword::Paper2pulse))
    }

    #[test]
    fn empty_config_has_no_field() {
        let z = FieldConfig::zero_field();
        assert_eq!(z.e_field(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        for t in [-100.0, 0.0, 3.5] {
            assert_eq!(z.a_potential(c(t, 0.0)).unwrap(), c(0.0, 0.0));
        }
        let k = MomentumPoint::longitudinal(0.0);
        assert_eq!(z.omega_squared(k, c(1.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(z.omega_real(k, 12.0), 1.0);
    }

    #[test]
    fn alternating_two_pulse_vanishes_at_midpoint() {
        let cfg = two_pulse_paper();
        assert!(cfg.e_field_real(0.0).abs() < 1e-18);
    }

    #[test]
    fn equal_sign_assist_peak() {
        let cfg = make_equal_sign_assist(0.25, 0.02, 0.025, 1.0, 0.0).unwrap();
        assert!((cfg.e_field_real(0.0) - 0.275).abs() < 1e-15);
    }

    #[test]
    fn paper_gauge_limits_of_two_pulse_potential() {
        let cfg = two_pulse_paper();
        assert!((cfg.a_potential_real(-1e4) - 2.0).abs() < 1e-12);
        assert!((cfg.a_potential_real(1e4) - 2.0).abs() < 1e-12);
        let k = MomentumPoint::longitudinal(0.0);
        assert!((cfg.omega_real(k, -1e4) - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn paper_gauge_matches_closed_form_potential() {
        let cfg = two_pulse_paper();
        let (e0, w0, t) = (0.1, 0.05, 180.32);
        for i in 0..100 {
            let time = -400.0 + 8.0 * i as f64 + 0.37;
            let expected = e0 / w0 * (1.0 + (w0 * (time - t / 2.0)).tanh() - (w0 * (time + t / 2.0)).tanh());
            assert!((cfg.a_potential_real(time) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn vanish_gauge_zero_at_minus_infinity() {
        let cfg = make_pulse_train(6, SignMode::Equal, 0.1, 0.05, 180.32).unwrap();
        assert!(cfg.a_potential_real(-1e5).abs() < 1e-12);
        assert!((cfg.a_potential_real(1e5) + 24.0).abs() < 1e-12);
    }

    #[test]
    fn pulse_train_layout() {
        let cfg = make_pulse_train(2, SignMode::Alternating, 0.1, 0.05, 180.32).unwrap();
        // i = 1 sits at +T/2 with sign -1, i = 2 at -T/2 with sign +1
        assert_eq!(cfg.pulses[0].center, 90.16);
        assert_eq!(cfg.pulses[0].sign, -1);
        assert_eq!(cfg.pulses[1].center, -90.16);
        assert_eq!(cfg.pulses[1].sign, 1);
        assert!(make_pulse_train(0, SignMode::Equal, 0.1, 0.05, 1.0).is_err());
    }

    #[test]
    fn complex_potential_matches_real_on_axis() {
        let cfg = make_alternating_assist(0.25, 0.02, 0.025, 1.0, 30.0).unwrap();
        for t in [-500.0, -15.0, 0.0, 15.2, 700.0] {
            let a = cfg.a_potential(c(t, 0.0)).unwrap();
            assert!((a.re - cfg.a_potential_real(t)).abs() < 1e-13);
            assert_eq!(a.im, 0.0);
            let e = cfg.e_field(c(t, 0.0)).unwrap();
            assert!((e.re - cfg.e_field_real(t)).abs() < 1e-15);
        }
    }

    #[test]
    fn pole_is_reported() {
        let cfg = make_single_pulse(0.1, 0.05).unwrap();
        let pole = c(0.0, FRAC_PI_2 / 0.05);
        match cfg.e_field(pole + c(1e-5, 0.0)) {
            Err(Error::FieldPole { pole: p, .. }) => assert!((p - pole).norm() < 1e-9),
            other => panic!("expected pole error, got {other:?}"),
        }
        assert!(cfg.a_potential(pole + c(0.0, 1e-4)).is_err());
        assert!(cfg.e_field(pole + c(0.0, 0.1)).is_ok());
        // third pole up the imaginary axis
        assert!(cfg.e_field(c(0.0, 5.0 * FRAC_PI_2 / 0.05)).is_err());
    }

    #[test]
    fn tanh_and_sech_branches_agree_far_out() {
        for x in [19.9, 20.1, -19.9, -20.1] {
            let z = c(x, 0.3);
            let direct = z.tanh();
            assert!((tanh(z) - direct).norm() < 1e-15);
            let s = z.cosh().inv();
            assert!((sech2(z) - s * s).norm() < 1e-15);
        }
    }

    #[test]
    fn config_json_schema() {
        let text = r#"{"label": "x", "gauge_constant": "paper_2pulse",
            "pulses": [{"amplitude": 0.1, "inverse_width": 0.05, "center": -90.16, "sign": 1},
                       {"amplitude": 0.1, "inverse_width": 0.05, "center": 90.16, "sign": -1}]}"#;
        let cfg = FieldConfig::from_json(text).unwrap();
        assert_eq!(cfg.gauge_value(), 2.0);
        let back = FieldConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);

        let numeric = r#"{"label": "n", "gauge_constant": 1.5, "pulses": []}"#;
        assert_eq!(FieldConfig::from_json(numeric).unwrap().gauge_value(), 1.5);
        let vanish = r#"{"label": "v", "gauge_constant": "vanish_at_minus_infinity",
            "pulses": [{"amplitude": 0.1, "inverse_width": 0.05, "center": 0, "sign": -1}]}"#;
        assert_eq!(FieldConfig::from_json(vanish).unwrap().gauge_value(), 2.0);
    }

    #[test]
    fn invalid_configs_rejected() {
        let bad_sign = r#"{"label": "x", "gauge_constant": 0,
            "pulses": [{"amplitude": 0.1, "inverse_width": 0.05, "center": 0, "sign": 2}]}"#;
        assert!(matches!(FieldConfig::from_json(bad_sign), Err(Error::InvalidConfig(_))));
        let bad_amp = r#"{"label": "x", "gauge_constant": 0,
            "pulses": [{"amplitude": -0.1, "inverse_width": 0.05, "center": 0, "sign": 1}]}"#;
        assert!(FieldConfig::from_json(bad_amp).is_err());
        let bad_gauge = r#"{"label": "x", "gauge_constant": "sideways", "pulses": []}"#;
        assert!(FieldConfig::from_json(bad_gauge).is_err());
        assert!(MomentumPoint::new(0.0, -1.0).is_err());
    }
}

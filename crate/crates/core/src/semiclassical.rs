//! Complex turning points and the interference approximation built on them.
//!
//! A turning point is a zero of `Ω²(k, t)` in the upper half plane. Each one
//! contributes a weight `e^{-2ϑ}` with the singulant
//!
//! ```text
//! ϑ = |∫_{t*}^{t} Ω dt| = 2 |∫_0^{Im t} Re Ω(Re t + iy) dy|,
//! ```
//!
//! and each pair interferes through the real-axis phase
//! `θ = ∫_{Re t_a}^{Re t_b} Ω dt`:
//!
//! ```text
//! f ≈ Σ e^{-2ϑ_P} + Σ_{P<P'} 2 cos(2θ_{PP'}) e^{-ϑ_P-ϑ_P'}.
//! ```

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldConfig, MomentumPoint, CHARGE};
use crate::riccati::{SolverSettings, Tolerances};

/// Largest admissible `|Ω²|` at a returned turning point.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Newton roots closer than this are the same point.
pub const DEDUP_RADIUS: f64 = 1e-6;
/// Points whose weight `e^{-2ϑ}` is below this fraction of the largest are dropped.
pub const DOMINANCE_RATIO: f64 = 1e-3;

const SEEDS_RE: usize = 40;
const SEEDS_IM: usize = 20;
const NEWTON_ITERATIONS: usize = 60;
const BRANCH_SAMPLES: usize = 400;
const QUAD_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPoint {
    pub t: Complex64,
    pub residual: f64,
    pub sheet_index: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairIntegrals {
    pub vartheta: f64,
    pub re_t: f64,
}

/// Search rectangle `[re_min, re_max] × (0, im_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_max: f64,
}

impl Region {
    /// Solver window along the real axis, up to the first pole row of the
    /// slowest pulse. Higher sheets only repeat the same zeros shifted by
    /// `iπ/ω`, and their mirror images sit just below that pole row.
    pub fn default_for(config: &FieldConfig) -> Result<Self> {
        let slow = config.slowest_inverse_width().ok_or(Error::NoTurningPoints)?;
        let s = SolverSettings::for_config(config, Tolerances::default())?;
        Ok(Self {
            re_min: s.t_start,
            re_max: s.t_end,
            im_max: PI / (2.0 * slow),
        })
    }

    fn contains(&self, t: Complex64) -> bool {
        t.im > 0.0 && t.im <= self.im_max && t.re >= self.re_min && t.re <= self.re_max
    }
}

/// Approximate distribution value with the negative-undershoot flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Approximation {
    pub f: f64,
    /// The raw sum was negative and has been replaced by zero.
    pub clamped: bool,
}

/// Result of the N-slit formula with its model diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlitApproximation {
    pub f: f64,
    /// Mean of the adjacent-pair phases.
    pub theta: f64,
    /// Mean singulant.
    pub vartheta: f64,
    /// Largest deviation of an adjacent phase from `theta`.
    pub theta_spread: f64,
    /// Largest deviation of a singulant from `vartheta`.
    pub vartheta_spread: f64,
}

fn certify(config: &FieldConfig, k: MomentumPoint, t: Complex64, sheet_width: f64) -> Result<TurningPoint> {
    let residual = config.omega_squared(k, t)?.norm();
    Ok(TurningPoint {
        t,
        residual,
        sheet_index: (t.im / sheet_width).floor().max(0.0) as u32,
    })
}

/// Parameters of an alternating two-pulse field, recovered from a config.
#[derive(Debug, Clone, Copy, PartialEq)]
struct TwoPulse {
    amplitude: f64,
    inverse_width: f64,
    delay: f64,
    midpoint: f64,
    /// Added to `k∥` to move into the gauge with `A(±∞) = E₀/ω₀`.
    k_shift: f64,
}

impl TwoPulse {
    fn from_config(config: &FieldConfig) -> Result<Self> {
        let not_two = || Error::InvalidInput("expected an alternating two-pulse field with equal pulses".into());
        let [a, b] = config.pulses.as_slice() else {
            return Err(not_two());
        };
        let (lead, trail) = if a.center <= b.center { (a, b) } else { (b, a) };
        if lead.sign != 1 || trail.sign != -1 || lead.amplitude != trail.amplitude || lead.inverse_width != trail.inverse_width {
            return Err(not_two());
        }
        let paper_gauge = lead.amplitude / lead.inverse_width;
        Ok(Self {
            amplitude: lead.amplitude,
            inverse_width: lead.inverse_width,
            delay: trail.center - lead.center,
            midpoint: 0.5 * (lead.center + trail.center),
            k_shift: -CHARGE * (config.gauge_value() - paper_gauge),
        })
    }
}

/// Closed-form upper-half-plane turning points `(t₊, t₋)` of the alternating
/// two-pulse field in the gauge `A(±∞) = E₀/ω₀`, on the lowest sheet.
///
/// With `τ = tanh(ω₀T/2)` and `κ = ω₀(k∥ ± iε⊥)`,
///
/// ```text
/// x² = (κ - E₀ + 2E₀τ) / ((κ - E₀)τ² + 2E₀τ),   t± = ± arctanh(x)/ω₀,
/// ```
///
/// with principal square root and arctanh. Since `A` is even,
/// `t₊ = -conj(t₋)`.
pub fn exact_turning_points_2pulse(
    amplitude: f64,
    inverse_width: f64,
    delay: f64,
    k: MomentumPoint,
) -> Result<(TurningPoint, TurningPoint)> {
    let config = crate::field::make_pulse_train(2, crate::field::SignMode::Alternating, amplitude, inverse_width, delay)?
        .with_gauge(crate::field::Gauge::Named(crate::field::GaugeKeyword::Paper2pulse));
    let k = MomentumPoint::new(k.k_parallel, k.k_perp)?;
    let (e, w) = (amplitude, inverse_width);
    let tau = (w * delay / 2.0).tanh();
    let eps = k.transverse_mass_squared().sqrt();
    let mut out = [None, None];
    for (slot, sign) in out.iter_mut().zip([1.0, -1.0]) {
        let kappa = w * Complex64::new(k.k_parallel, sign * eps);
        let x2 = (kappa - e + 2.0 * e * tau) / ((kappa - e) * tau * tau + 2.0 * e * tau);
        if x2.im == 0.0 && x2.re <= 0.0 {
            return Err(Error::BranchCut { arg: x2 });
        }
        let x = x2.sqrt();
        if x.im == 0.0 && x.re.abs() >= 1.0 {
            return Err(Error::BranchCut { arg: x });
        }
        let t = sign * x.atanh() / w;
        if !(t.im > 0.0) {
            return Err(Error::BranchCut { arg: x });
        }
        *slot = Some(certify(&config, k, t, PI / w)?);
    }
    Ok((out[0].unwrap(), out[1].unwrap()))
}

/// Closed-form turning points for any alternating two-pulse config, in its own gauge and time origin.
pub fn exact_turning_points_for(config: &FieldConfig, k: MomentumPoint) -> Result<(TurningPoint, TurningPoint)> {
    let p = TwoPulse::from_config(config)?;
    let shifted = MomentumPoint::new(k.k_parallel + p.k_shift, k.k_perp)?;
    let (a, b) = exact_turning_points_2pulse(p.amplitude, p.inverse_width, p.delay, shifted)?;
    let sheet = PI / p.inverse_width;
    Ok((
        certify(config, k, a.t + p.midpoint, sheet)?,
        certify(config, k, b.t + p.midpoint, sheet)?,
    ))
}

fn newton(config: &FieldConfig, k: MomentumPoint, seed: Complex64, limit: f64) -> Option<Complex64> {
    let mut t = seed;
    for _ in 0..NEWTON_ITERATIONS {
        let (w2, dw2) = config.omega_squared_with_derivative(k, t).ok()?;
        if dw2 == Complex64::new(0.0, 0.0) {
            return None;
        }
        let mut step = w2 / dw2;
        if step.norm() > limit {
            step *= limit / step.norm();
        }
        t -= step;
        if !t.is_finite() {
            return None;
        }
        if step.norm() <= 1e-14 * t.norm().max(1.0) {
            return Some(t);
        }
    }
    // slow convergence near a double root still counts if the residual is small
    Some(t)
}

/// All certified zeros of `Ω²` in `region` (the default search region when
/// `None`), sorted by real part.
///
/// Newton iterations start from a 40×20 grid plus a column above every pulse
/// centre. Seeds that fail to converge are dropped.
pub fn find_turning_points(config: &FieldConfig, k: MomentumPoint, region: Option<Region>) -> Result<Vec<TurningPoint>> {
    config.validate()?;
    let k = MomentumPoint::new(k.k_parallel, k.k_perp)?;
    let region = match region {
        Some(r) => r,
        None => Region::default_for(config)?,
    };
    if !(region.re_max > region.re_min && region.im_max > 0.0) {
        return Err(Error::InvalidInput("turning-point region must be non-empty".into()));
    }
    let slow = config.slowest_inverse_width().ok_or(Error::NoTurningPoints)?;
    let limit = 0.25 * region.im_max.max((region.re_max - region.re_min) / SEEDS_RE as f64);

    let im_at = |j: usize| region.im_max * (j as f64 + 0.5) / SEEDS_IM as f64;
    let mut seeds = Vec::with_capacity((SEEDS_RE + config.pulses.len()) * SEEDS_IM);
    for i in 0..SEEDS_RE {
        let re = region.re_min + (region.re_max - region.re_min) * (i as f64 + 0.5) / SEEDS_RE as f64;
        seeds.extend((0..SEEDS_IM).map(|j| Complex64::new(re, im_at(j))));
    }
    for p in &config.pulses {
        seeds.extend((0..SEEDS_IM).map(|j| Complex64::new(p.center, im_at(j))));
    }

    let mut roots: Vec<TurningPoint> = Vec::new();
    for seed in seeds {
        let Some(t) = newton(config, k, seed, limit) else { continue };
        if !region.contains(t) {
            continue;
        }
        let Ok(tp) = certify(config, k, t, PI / slow) else { continue };
        if tp.residual >= RESIDUAL_TOL {
            continue;
        }
        match roots.iter_mut().find(|r| (r.t - t).norm() < DEDUP_RADIUS) {
            Some(r) if tp.residual < r.residual => *r = tp,
            Some(_) => {}
            None => roots.push(tp),
        }
    }
    if roots.is_empty() {
        return Err(Error::NoTurningPoints);
    }
    roots.sort_by(|a, b| a.t.re.total_cmp(&b.t.re));
    Ok(roots)
}

/// Turning points whose weight `e^{-2ϑ}` is within [`DOMINANCE_RATIO`] of the
/// largest, with their singulants.
pub fn dominant_turning_points(
    config: &FieldConfig,
    k: MomentumPoint,
    region: Option<Region>,
) -> Result<Vec<(TurningPoint, PairIntegrals)>> {
    let all = find_turning_points(config, k, region)?
        .into_iter()
        .map(|tp| pair_integrals(config, k, &tp).map(|p| (tp, p)))
        .collect::<Result<Vec<_>>>()?;
    let least = all.iter().map(|(_, p)| p.vartheta).fold(f64::INFINITY, f64::min);
    let cut = least - 0.5 * DOMINANCE_RATIO.ln();
    Ok(all.into_iter().filter(|(_, p)| p.vartheta <= cut).collect())
}

fn check_turning_point(config: &FieldConfig, k: MomentumPoint, tp: &TurningPoint) -> Result<()> {
    let residual = config.omega_squared(k, tp.t)?.norm();
    if !(tp.t.im > 0.0) || residual >= RESIDUAL_TOL {
        return Err(Error::InvalidInput(format!(
            "{} is not an upper-half-plane turning point (|Ω²| = {residual:e})",
            tp.t
        )));
    }
    Ok(())
}

/// Integrates with the double-exponential rule on `pieces` equal sub-intervals.
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, pieces: usize, tol: f64) -> Result<f64> {
    let pieces = pieces.max(1);
    let h = (b - a) / pieces as f64;
    let mut total = 0.0;
    let mut error = 0.0;
    for i in 0..pieces {
        let lo = a + h * i as f64;
        let hi = if i + 1 == pieces { b } else { lo + h };
        let out = quadrature::double_exponential::integrate(&f, lo, hi, tol / pieces as f64);
        total += out.integral;
        error += out.error_estimate;
    }
    if !total.is_finite() || error > 1e3 * tol.max(1e-12 * total.abs()) {
        return Err(Error::Quadrature { estimate: total, error });
    }
    Ok(total)
}

/// Sign changes of the tracked root of `Ω²` relative to the principal root
/// along `y ↦ x + iy`, `y ∈ [0, Y)`.
///
/// The tracked root starts positive on the real axis. It differs from the
/// principal root only after `Ω²` has crossed the negative real axis, so the
/// crossings are located by bisection on a uniform sample.
fn branch_flips(config: &FieldConfig, k: MomentumPoint, x: f64, top: f64) -> Result<Vec<f64>> {
    let omega2 = |y: f64| config.omega_squared(k, Complex64::new(x, y));
    let mut flips = Vec::new();
    let mut prev_w2 = omega2(0.0)?;
    let mut prev_root = prev_w2.sqrt();
    let mut sign = 1.0;
    let h = top / BRANCH_SAMPLES as f64;
    for j in 1..BRANCH_SAMPLES {
        let y = h * j as f64;
        let w2 = omega2(y)?;
        let root = w2.sqrt();
        let keep = (sign * root - sign * prev_root).norm();
        let flip = (-sign * root - sign * prev_root).norm();
        let scale = prev_root.norm().max(root.norm());
        if keep.min(flip) > 0.5 * scale && j + 1 < BRANCH_SAMPLES {
            return Err(Error::BranchTracking { t: Complex64::new(x, y) });
        }
        if flip < keep {
            // Ω² crossed the cut between the two samples.
            let (mut lo, mut hi) = (y - h, y);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let m = omega2(mid)?;
                if (m.im > 0.0) == (prev_w2.im > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            flips.push(0.5 * (lo + hi));
            sign = -sign;
        }
        prev_w2 = w2;
        prev_root = root;
    }
    Ok(flips)
}

/// `ϑ = |∫_{t*}^{t} Ω dt|` along the vertical segment through `Re t`.
pub fn singulant(config: &FieldConfig, k: MomentumPoint, tp: &TurningPoint) -> Result<f64> {
    check_turning_point(config, k, tp)?;
    let (x, top) = (tp.t.re, tp.t.im);
    let flips = branch_flips(config, k, x, top)?;
    let failure = RefCell::new(None);
    let integrand = |y: f64| {
        let sign = if flips.iter().filter(|&&c| c < y).count() % 2 == 0 { 1.0 } else { -1.0 };
        match config.omega_squared(k, Complex64::new(x, y)) {
            Ok(w2) => sign * w2.sqrt().re,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    // split at the cut crossings so every piece is smooth inside
    let mut edges = vec![0.0];
    edges.extend(flips.iter().copied());
    edges.push(top);
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += integrate(&integrand, w[0], w[1], 1, QUAD_TOL)?;
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(2.0 * total.abs())
}

pub fn pair_integrals(config: &FieldConfig, k: MomentumPoint, tp: &TurningPoint) -> Result<PairIntegrals> {
    Ok(PairIntegrals {
        vartheta: singulant(config, k, tp)?,
        re_t: tp.t.re,
    })
}

/// `∫ Ω dt` on the real axis from `Re a` to `Re b`.
pub fn phase_between(config: &FieldConfig, k: MomentumPoint, a: &TurningPoint, b: &TurningPoint) -> Result<f64> {
    phase_between_times(config, k, a.t.re, b.t.re)
}

fn phase_between_times(config: &FieldConfig, k: MomentumPoint, from: f64, to: f64) -> Result<f64> {
    if from == to {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if from < to { (from, to, 1.0) } else { (to, from, -1.0) };
    // one piece per pulse width keeps each sub-integral smooth on its own scale
    let fast = config.fastest_inverse_width().unwrap_or(1.0);
    let pieces = ((hi - lo) * fast).ceil().clamp(1.0, 1e5) as usize;
    Ok(sign * integrate(|t| config.omega_real(k, t), lo, hi, pieces, QUAD_TOL * (hi - lo).max(1.0))?)
}

fn interference_sum(weights: &[(f64, f64)], phase: impl Fn(usize, usize) -> Result<f64>) -> Result<Approximation> {
    if weights.is_empty() {
        return Err(Error::NoTurningPoints);
    }
    let mut total: f64 = weights.iter().map(|(v, _)| (-2.0 * v).exp()).sum();
    for a in 0..weights.len() {
        for b in a + 1..weights.len() {
            let theta = phase(a, b)?;
            total += 2.0 * (2.0 * theta).cos() * (-weights[a].0 - weights[b].0).exp();
        }
    }
    Ok(if total < 0.0 {
        Approximation { f: 0.0, clamped: true }
    } else {
        Approximation { f: total, clamped: false }
    })
}

/// Interference sum over the given turning points.
pub fn approx_spectrum_general(config: &FieldConfig, k: MomentumPoint, tps: &[TurningPoint]) -> Result<Approximation> {
    let weights = tps
        .iter()
        .map(|tp| singulant(config, k, tp).map(|v| (v, tp.t.re)))
        .collect::<Result<Vec<_>>>()?;
    interference_sum(&weights, |a, b| phase_between_times(config, k, weights[a].1, weights[b].1))
}

/// Interference sum over the dominant turning points found numerically.
pub fn approx_spectrum(config: &FieldConfig, k: MomentumPoint) -> Result<Approximation> {
    let dominant = dominant_turning_points(config, k, None)?;
    let weights: Vec<(f64, f64)> = dominant.iter().map(|(_, p)| (p.vartheta, p.re_t)).collect();
    interference_sum(&weights, |a, b| phase_between_times(config, k, weights[a].1, weights[b].1))
}

/// Two-slit form `4 cos²θ e^{-2ϑ}` from the closed-form turning points.
///
/// `2ϑ` is taken as `ϑ₊ + ϑ₋`, which makes the result agree with
/// [`approx_spectrum_general`] on the same two points up to `(e^{-ϑ₊} - e^{-ϑ₋})²`.
pub fn approx_spectrum_2pulse(config: &FieldConfig, k: MomentumPoint) -> Result<f64> {
    let (plus, minus) = exact_turning_points_for(config, k)?;
    let theta = phase_between(config, k, &minus, &plus)?;
    let v = singulant(config, k, &plus)? + singulant(config, k, &minus)?;
    Ok(4.0 * theta.cos().powi(2) * (-v).exp())
}

/// `U_{N-1}(cos θ)² = sin²(Nθ)/sin²θ`, finite at `sin θ = 0`.
pub fn slit_factor(n: usize, theta: f64) -> f64 {
    let x = theta.cos();
    let (mut prev, mut cur) = (0.0, 1.0);
    for _ in 1..n {
        (prev, cur) = (cur, 2.0 * x * cur - prev);
    }
    if n == 0 {
        0.0
    } else {
        cur * cur
    }
}

/// N-slit form `sin²(Nθ)/sin²θ · e^{-2ϑ}` from the `N` dominant turning points.
///
/// The formula assumes every adjacent pair has the same phase and every
/// point the same singulant. `θ` and `ϑ` are their means; the spreads measure
/// how far the field departs from that assumption.
pub fn approx_spectrum_npulse(config: &FieldConfig, k: MomentumPoint, n: usize) -> Result<SlitApproximation> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be at least 1".into()));
    }
    let dominant = dominant_turning_points(config, k, None)?;
    if dominant.len() != n {
        return Err(Error::TurningPointCount {
            expected: n,
            found: dominant.len(),
        });
    }
    let varthetas: Vec<f64> = dominant.iter().map(|(_, p)| p.vartheta).collect();
    let phases = dominant
        .windows(2)
        .map(|w| phase_between(config, k, &w[0].0, &w[1].0))
        .collect::<Result<Vec<_>>>()?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let spread = |v: &[f64], m: f64| v.iter().map(|x| (x - m).abs()).fold(0.0, f64::max);
    let vartheta = mean(&varthetas);
    let theta = if phases.is_empty() { 0.0 } else { mean(&phases) };
    Ok(SlitApproximation {
        f: slit_factor(n, theta) * (-2.0 * vartheta).exp(),
        theta,
        vartheta,
        theta_spread: spread(&phases, theta),
        vartheta_spread: spread(&varthetas, vartheta),
    })
}

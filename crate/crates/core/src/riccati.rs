//! Exact mode numerics for the reflection amplitude.
//!
//! Each momentum mode is integrated as the real system `(Re R, Im R, Θ)` with
//!
//! ```text
//! dR/dt = (Ω̇/2Ω) [e^{-2iΘ} - R² e^{2iΘ}],   dΘ/dt = Ω,
//! ```
//!
//! starting from the vacuum `R = 0, Θ = 0` before the field switches on. The
//! distribution of created pairs is `f = |R|²/(1 - |R|²)` at the end of the
//! window. Θ is carried as a state variable so the fast phase is never
//! interpolated.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldConfig, MomentumPoint, CHARGE};
use crate::ode;
use crate::table::{Method, SpectrumRow, SpectrumTable};

/// Window edges must see `|E| <= FIELD_CUTOFF * max amplitude`.
pub const FIELD_CUTOFF: f64 = 1e-10;
/// Initial half-width of the window in units of the slowest pulse width.
pub const WINDOW_WIDTHS: f64 = 12.0;
const MAX_STEPS: usize = 20_000_000;

/// Integrator tolerances, independent of the time window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step; `None` picks half the narrowest pulse width.
    pub max_step: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-15,
            max_step: None,
        }
    }
}

impl Tolerances {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            max_step: None,
        }
    }

    /// Both tolerances divided by `factor`.
    pub fn tightened(self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol / factor,
            abs_tol: self.abs_tol / factor,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub t_start: f64,
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
}

impl SolverSettings {
    /// Window around the pulses, widened until the field has switched off.
    ///
    /// Starts at `(first centre - 12/ω_slow, last centre + 12/ω_slow)` and grows
    /// in steps of `1/ω_slow` until both edges meet the vacuum cutoff.
    pub fn for_config(config: &FieldConfig, tol: Tolerances) -> Result<Self> {
        config.validate()?;
        let (t_start, t_end, max_step) = match (config.center_span(), config.slowest_inverse_width()) {
            (Some((first, last)), Some(slow)) => {
                let fast = config.fastest_inverse_width().unwrap_or(slow);
                let cutoff = FIELD_CUTOFF * config.max_amplitude();
                let mut half = WINDOW_WIDTHS / slow;
                while config.e_field_real(first - half).abs() > cutoff || config.e_field_real(last + half).abs() > cutoff {
                    half += 1.0 / slow;
                }
                (first - half, last + half, 0.5 / fast)
            }
            _ => (-1.0, 1.0, 0.5),
        };
        let settings = Self {
            t_start,
            t_end,
            rel_tol: tol.rel_tol,
            abs_tol: tol.abs_tol,
            max_step: tol.max_step.unwrap_or(max_step),
        };
        settings.validate(config)?;
        Ok(settings)
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: Some(self.max_step),
        }
    }

    /// Same window with tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol / factor,
            abs_tol: self.abs_tol / factor,
            ..*self
        }
    }

    pub fn validate(&self, config: &FieldConfig) -> Result<()> {
        if !(self.t_start < self.t_end) || !self.t_start.is_finite() || !self.t_end.is_finite() {
            return Err(Error::InvalidSettings(format!(
                "need finite t_start < t_end, got [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidSettings("tolerances must be positive".into()));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidSettings("max_step must be positive".into()));
        }
        let cutoff = FIELD_CUTOFF * config.max_amplitude();
        for t in [self.t_start, self.t_end] {
            let field = config.e_field_real(t).abs();
            if field > cutoff {
                return Err(Error::AsymptoticVacuum { t, field, cutoff });
            }
        }
        Ok(())
    }

    pub(crate) fn ode_options<const N: usize>(&self, abs_tol: f64) -> ode::Options<N> {
        ode::Options {
            rel_tol: self.rel_tol,
            abs_tol: [abs_tol; N],
            max_step: self.max_step,
            max_steps: MAX_STEPS,
        }
    }
}

/// Snapshot of one mode during integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub r: Complex64,
    pub theta: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionResult {
    pub r_final: Complex64,
    pub f: f64,
    pub n_steps: usize,
    pub max_abs_r: f64,
    pub settings_echo: SolverSettings,
}

/// How the amplitude couples to the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Coupling {
    /// `Ω̇/2Ω [e^{-2iΘ} - R² e^{2iΘ}]`
    Boson,
    /// `qE ε⊥/(2Ω²) [e^{-2iΘ} + R² e^{2iΘ}]`
    Fermion,
    /// `Ω̇/2Ω e^{-2iΘ}`, first order in the field coupling.
    Born,
}

pub(crate) struct Evolved {
    pub r: Complex64,
    pub n_steps: usize,
    pub max_abs_r: f64,
}

/// Integrates one mode from `t_start` to `t_end`, reporting each accepted step.
pub(crate) fn evolve(
    config: &FieldConfig,
    k: MomentumPoint,
    s: &SolverSettings,
    coupling: Coupling,
    mut observe: impl FnMut(&ModeState),
) -> Result<Evolved> {
    let k_eff = k.k_parallel - CHARGE * config.gauge_value();
    let m2 = k.transverse_mass_squared();
    let eps_perp = m2.sqrt();
    let rhs = |t: f64, y: &[f64; 3]| {
        let (e, shape) = config.field_and_shape_real(t);
        let p = k_eff - CHARGE * shape;
        let w2 = m2 + p * p;
        let (s2, c2) = (2.0 * y[2]).sin_cos();
        let (dr, di) = match coupling {
            Coupling::Born => {
                let q = CHARGE * e * p / (2.0 * w2);
                (q * c2, -q * s2)
            }
            Coupling::Boson | Coupling::Fermion => {
                // R² e^{2iΘ}
                let (r2r, r2i) = (y[0] * y[0] - y[1] * y[1], 2.0 * y[0] * y[1]);
                let (ar, ai) = (r2r * c2 - r2i * s2, r2r * s2 + r2i * c2);
                if coupling == Coupling::Boson {
                    let q = CHARGE * e * p / (2.0 * w2);
                    (q * (c2 - ar), q * (-s2 - ai))
                } else {
                    let q = CHARGE * e * eps_perp / (2.0 * w2);
                    (q * (c2 + ar), q * (-s2 + ai))
                }
            }
        };
        [dr, di, w2.sqrt()]
    };

    let mut max_abs_r: f64 = 0.0;
    let out = ode::integrate(
        rhs,
        s.t_start,
        [0.0; 3],
        s.t_end,
        &s.ode_options(s.abs_tol),
        |t, y| {
            let r = Complex64::new(y[0], y[1]);
            let abs_r = r.norm();
            max_abs_r = max_abs_r.max(abs_r);
            if coupling == Coupling::Boson && abs_r >= 1.0 {
                return Err(Error::Supercritical { t, abs_r });
            }
            observe(&ModeState { r, theta: y[2], t });
            Ok(())
        },
    )?;
    Ok(Evolved {
        r: Complex64::new(out.y[0], out.y[1]),
        n_steps: out.accepted,
        max_abs_r,
    })
}

/// Exact reflection amplitude and distribution value of one bosonic mode.
pub fn solve_mode(config: &FieldConfig, k: MomentumPoint, s: &SolverSettings) -> Result<ReflectionResult> {
    solve_mode_observed(config, k, s, |_| {})
}

/// [`solve_mode`] with a callback after every accepted step.
pub fn solve_mode_observed(
    config: &FieldConfig,
    k: MomentumPoint,
    s: &SolverSettings,
    observe: impl FnMut(&ModeState),
) -> Result<ReflectionResult> {
    config.validate()?;
    s.validate(config)?;
    let out = evolve(config, k, s, Coupling::Boson, observe)?;
    let r2 = out.r.norm_sqr();
    if r2 >= 1.0 {
        return Err(Error::Supercritical {
            t: s.t_end,
            abs_r: r2.sqrt(),
        });
    }
    Ok(ReflectionResult {
        r_final: out.r,
        f: r2 / (1.0 - r2),
        n_steps: out.n_steps,
        max_abs_r: out.max_abs_r,
        settings_echo: *s,
    })
}

/// First-order amplitude `∫ (Ω̇/2Ω) e^{-2iΘ} dt` over the window.
pub fn born_reflection(config: &FieldConfig, k: MomentumPoint, s: &SolverSettings) -> Result<Complex64> {
    config.validate()?;
    s.validate(config)?;
    Ok(evolve(config, k, s, Coupling::Born, |_| {})?.r)
}

/// Checks that a grid is non-empty and strictly increasing in `k∥`.
pub(crate) fn check_grid(grid: &[MomentumPoint]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("momentum grid is empty".into()));
    }
    for k in grid {
        MomentumPoint::new(k.k_parallel, k.k_perp)?;
    }
    if grid.windows(2).any(|w| !(w[1].k_parallel > w[0].k_parallel)) {
        return Err(Error::InvalidInput("momentum grid must be strictly increasing in k_parallel".into()));
    }
    Ok(())
}

/// Evaluates `value` on every grid point in parallel, keeping grid order.
pub(crate) fn tabulate<F>(grid: &[MomentumPoint], method: Method, value: F) -> Result<SpectrumTable>
where
    F: Fn(MomentumPoint) -> Result<f64> + Sync,
{
    check_grid(grid)?;
    let rows = grid
        .par_iter()
        .map(|&k| {
            value(k).map_err(|e| e.at(k)).map(|f| SpectrumRow {
                k_parallel: k.k_parallel,
                k_perp: k.k_perp,
                f,
                method,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumTable::new(rows))
}

/// Bosonic spectrum on a momentum grid.
pub fn spectrum(config: &FieldConfig, k_grid: &[MomentumPoint], s: &SolverSettings) -> Result<SpectrumTable> {
    config.validate()?;
    s.validate(config)?;
    tabulate(k_grid, Method::Riccati, |k| solve_mode(config, k, s).map(|r| r.f))
}

/// Born spectrum, `|B|²/(1 - |B|²)` with `B` from [`born_reflection`].
pub fn born_spectrum(config: &FieldConfig, k_grid: &[MomentumPoint], s: &SolverSettings) -> Result<SpectrumTable> {
    config.validate()?;
    s.validate(config)?;
    tabulate(k_grid, Method::Born, |k| {
        let b2 = born_reflection(config, k, s)?.norm_sqr();
        Ok(b2 / (1.0 - b2))
    })
}

/// Uniform grid of `steps + 1` points in `[min, max]` at fixed `k⊥`.
pub fn linear_grid(min: f64, max: f64, steps: usize, k_perp: f64) -> Result<Vec<MomentumPoint>> {
    if steps == 0 || !(max > min) {
        return Err(Error::InvalidInput(format!("bad grid [{min}, {max}] with {steps} steps")));
    }
    (0..=steps)
        .map(|i| MomentumPoint::new(min + (max - min) * i as f64 / steps as f64, k_perp))
        .collect()
}

/// Two-dimensional momentum grid for the pair density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    pub kpar_min: f64,
    pub kpar_max: f64,
    /// Number of intervals along `k∥`; must be even.
    pub kpar_steps: usize,
    pub kperp_max: f64,
    /// Number of intervals along `k⊥`; must be even.
    pub kperp_steps: usize,
    /// Largest admissible `f` on the outer boundary, relative to the peak.
    #[serde(default = "default_eps_tail")]
    pub eps_tail: f64,
}

fn default_eps_tail() -> f64 {
    1e-4
}

impl QuadratureSettings {
    pub fn new(kpar_min: f64, kpar_max: f64, kpar_steps: usize, kperp_max: f64, kperp_steps: usize) -> Self {
        Self {
            kpar_min,
            kpar_max,
            kpar_steps,
            kperp_max,
            kperp_steps,
            eps_tail: default_eps_tail(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.kpar_max > self.kpar_min) || !(self.kperp_max > 0.0) {
            return Err(Error::InvalidInput("quadrature ranges must be non-empty".into()));
        }
        if self.kpar_steps < 2 || self.kperp_steps < 2 || self.kpar_steps % 2 != 0 || self.kperp_steps % 2 != 0 {
            return Err(Error::InvalidInput("quadrature step counts must be even and >= 2".into()));
        }
        if !(self.eps_tail > 0.0) {
            return Err(Error::InvalidInput("eps_tail must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub n: f64,
    /// Difference to a trapezoid sum on every other node, an upper bound in practice.
    pub error_estimate: f64,
    pub grid: QuadratureSettings,
    pub peak_f: f64,
    pub boundary_f: f64,
}

/// Pair number density `∫ d³k/(2π)³ f(k)`.
///
/// Uses cylindrical symmetry in `k⊥`: `(1/4π²) ∫dk∥ ∫ k⊥ f dk⊥`.
pub fn number_density(config: &FieldConfig, quad: &QuadratureSettings, s: &SolverSettings) -> Result<DensityReport> {
    number_density_with(config, quad, |k| solve_mode(config, k, s).map(|r| r.f), s)
}

pub(crate) fn number_density_with<F>(
    config: &FieldConfig,
    quad: &QuadratureSettings,
    value: F,
    s: &SolverSettings,
) -> Result<DensityReport>
where
    F: Fn(MomentumPoint) -> Result<f64> + Sync,
{
    config.validate()?;
    s.validate(config)?;
    quad.validate()?;
    let (nx, ny) = (quad.kpar_steps + 1, quad.kperp_steps + 1);
    let hx = (quad.kpar_max - quad.kpar_min) / quad.kpar_steps as f64;
    let hy = quad.kperp_max / quad.kperp_steps as f64;
    let nodes: Vec<MomentumPoint> = (0..nx)
        .flat_map(|i| {
            (0..ny).map(move |j| MomentumPoint {
                k_parallel: quad.kpar_min + hx * i as f64,
                k_perp: hy * j as f64,
            })
        })
        .collect();
    let f: Vec<f64> = nodes
        .par_iter()
        .map(|&k| value(k).map_err(|e| e.at(k)))
        .collect::<Result<_>>()?;
    let at = |i: usize, j: usize| f[i * ny + j];

    let peak = f.iter().copied().fold(0.0, f64::max);
    let mut boundary: f64 = 0.0;
    for j in 0..ny {
        boundary = boundary.max(at(0, j)).max(at(nx - 1, j));
    }
    for i in 0..nx {
        boundary = boundary.max(at(i, ny - 1));
    }
    if peak > 0.0 && boundary > quad.eps_tail * peak {
        return Err(Error::DomainTooSmall {
            boundary,
            peak,
            eps_tail: quad.eps_tail,
        });
    }

    // Trapezoid along k∥, where f has decayed at both ends. Simpson along k⊥,
    // where the integrand k⊥ f is not flat at the origin.
    let total = |wy: &dyn Fn(usize) -> f64, stride: usize| {
        let mut sum = 0.0;
        for i in (0..nx).step_by(stride) {
            let wx = if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
            for j in (0..ny).step_by(stride) {
                sum += wx * wy(j) * (hy * j as f64) * at(i, j);
            }
        }
        sum * (hx * stride as f64) * (hy * stride as f64) / (4.0 * PI * PI)
    };
    let simpson = |j: usize| match j {
        0 => 1.0 / 3.0,
        j if j == ny - 1 => 1.0 / 3.0,
        j if j % 2 == 1 => 4.0 / 3.0,
        _ => 2.0 / 3.0,
    };
    let trapezoid = |j: usize| if j == 0 || j == ny - 1 { 0.5 } else { 1.0 };
    let n = total(&simpson, 1);
    let coarse = total(&trapezoid, 2);
    Ok(DensityReport {
        n,
        error_estimate: (n - coarse).abs(),
        grid: *quad,
        peak_f: peak,
        boundary_f: boundary,
    })
}

//! Parameter sweeps and spectrum analysis.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermion::solve_fermion_mode;
use crate::field::{self, FieldConfig, Gauge, MomentumPoint, SignMode};
use crate::qve::qve_distribution;
use crate::riccati::{born_reflection, number_density, solve_mode, tabulate, DensityReport, QuadratureSettings, SolverSettings};
use crate::semiclassical::{approx_spectrum, approx_spectrum_npulse};
use crate::table::{format_float, Method, SpectrumTable};

/// Relative noise floor for peak detection.
pub const NOISE_FLOOR: f64 = 1e-3;

/// `f(k)` from any of the available methods.
///
/// `Semiclassical` uses the interference sum over the dominant turning points.
pub fn distribution(config: &FieldConfig, k: MomentumPoint, method: Method, s: &SolverSettings) -> Result<f64> {
    match method {
        Method::Riccati => solve_mode(config, k, s).map(|r| r.f),
        Method::Born => born_reflection(config, k, s).map(|b| b.norm_sqr() / (1.0 - b.norm_sqr())),
        Method::Semiclassical => approx_spectrum(config, k).map(|a| a.f),
        Method::Qve => qve_distribution(config, k, s),
        Method::Fermion => solve_fermion_mode(config, k, s).map(|r| r.f),
    }
}

/// Spectrum on a grid with the given method.
pub fn method_spectrum(config: &FieldConfig, grid: &[MomentumPoint], method: Method, s: &SolverSettings) -> Result<SpectrumTable> {
    config.validate()?;
    s.validate(config)?;
    tabulate(grid, method, |k| distribution(config, k, method, s))
}

/// Field family with fixed parameters; the swept variable is filled in later.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "constructor", rename_all = "snake_case")]
pub enum Template {
    SinglePulse {
        amplitude: f64,
        inverse_width: f64,
    },
    EqualSignAssist {
        e1: f64,
        w1: f64,
        e2: f64,
        w2: f64,
        #[serde(default)]
        delay: f64,
    },
    AlternatingAssist {
        e1: f64,
        w1: f64,
        e2: f64,
        w2: f64,
        #[serde(default)]
        delay: f64,
    },
    PulseTrain {
        n: usize,
        sign_mode: SignMode,
        amplitude: f64,
        inverse_width: f64,
        #[serde(default)]
        delay: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variable {
    T,
    N,
}

impl Template {
    /// Builds the config with the template's own parameters.
    pub fn build(&self, gauge: Option<Gauge>) -> Result<FieldConfig> {
        let cfg = match *self {
            Template::SinglePulse { amplitude, inverse_width } => field::make_single_pulse(amplitude, inverse_width)?,
            Template::EqualSignAssist { e1, w1, e2, w2, delay } => field::make_equal_sign_assist(e1, w1, e2, w2, delay)?,
            Template::AlternatingAssist { e1, w1, e2, w2, delay } => field::make_alternating_assist(e1, w1, e2, w2, delay)?,
            Template::PulseTrain {
                n,
                sign_mode,
                amplitude,
                inverse_width,
                delay,
            } => field::make_pulse_train(n, sign_mode, amplitude, inverse_width, delay)?,
        };
        Ok(match gauge {
            Some(g) => cfg.with_gauge(g),
            None => cfg,
        })
    }

    /// Copy with the swept variable set to `value`.
    pub fn with(&self, variable: Variable, value: f64) -> Result<Template> {
        let mut t = *self;
        match (&mut t, variable) {
            (
                Template::EqualSignAssist { delay, .. } | Template::AlternatingAssist { delay, .. } | Template::PulseTrain { delay, .. },
                Variable::T,
            ) => *delay = value,
            (Template::PulseTrain { n, .. }, Variable::N) => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::InvalidInput(format!("N must be a positive integer, got {value}")));
                }
                *n = value as usize;
            }
            _ => {
                return Err(Error::InvalidInput(format!("template {self:?} has no variable {variable:?}")));
            }
        }
        Ok(t)
    }

    /// Each distinct pulse of the template on its own, with its multiplicity.
    fn constituents(&self) -> Vec<(Template, usize)> {
        match *self {
            Template::SinglePulse { .. } => vec![(*self, 1)],
            Template::EqualSignAssist { e1, w1, e2, w2, .. } | Template::AlternatingAssist { e1, w1, e2, w2, .. } => vec![
                (Template::SinglePulse { amplitude: e1, inverse_width: w1 }, 1),
                (Template::SinglePulse { amplitude: e2, inverse_width: w2 }, 1),
            ],
            Template::PulseTrain {
                n,
                amplitude,
                inverse_width,
                ..
            } => vec![(Template::SinglePulse { amplitude, inverse_width }, n)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable {
    Spectrum {
        kpar_min: f64,
        kpar_max: f64,
        kpar_steps: usize,
        #[serde(default)]
        k_perp: f64,
    },
    Density {
        quadrature: QuadratureSettings,
    },
    FAtK0 {
        #[serde(default)]
        k_perp: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub template: Template,
    pub variable: Variable,
    pub values: Vec<f64>,
    pub observable: Observable,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default)]
    pub gauge: Option<Gauge>,
}

fn default_method() -> Method {
    Method::Riccati
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidInput("sweep needs at least one value".into()));
        }
        let up = self.values.windows(2).all(|w| w[1] > w[0]);
        let down = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::InvalidInput("sweep values must be strictly ordered".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("sweep values must be finite".into()));
        }
        for &v in &self.values {
            self.template.with(self.variable, v)?;
        }
        if matches!(self.observable, Observable::Density { .. }) && self.method != Method::Riccati {
            return Err(Error::InvalidInput("density sweeps use the riccati method".into()));
        }
        Ok(())
    }

    /// Config for one sweep value.
    pub fn config_at(&self, value: f64) -> Result<FieldConfig> {
        self.template.with(self.variable, value)?.build(self.gauge)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepOutcome {
    Scalar {
        f: f64,
    },
    Density {
        report: DensityReport,
    },
    Spectrum {
        table: SpectrumTable,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    /// `Err` carries the message of a failed row; the sweep itself continues.
    pub outcome: std::result::Result<SweepOutcome, String>,
}

/// Densities of the template's pulses taken one at a time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReference {
    pub n_first: f64,
    pub n_second: Option<f64>,
    /// Sum over all pulses, counting repeated pulses with multiplicity.
    pub n_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub variable: Variable,
    pub rows: Vec<SweepRow>,
    pub reference: Option<DensityReference>,
}

/// Settings derived from a template config, shared by every row.
pub type SettingsFor<'a> = &'a (dyn Fn(&FieldConfig) -> Result<SolverSettings> + Sync);

/// Evaluates the observable at every sweep value, in input order.
///
/// `settings` maps each row's config to its solver settings, since the time
/// window depends on the delay.
pub fn sweep_delay(spec: &SweepSpec, settings: SettingsFor<'_>) -> Result<SweepTable> {
    spec.validate()?;
    let rows = spec
        .values
        .par_iter()
        .map(|&value| SweepRow {
            value,
            outcome: evaluate(spec, value, settings).map_err(|e| e.to_string()),
        })
        .collect();
    let reference = match &spec.observable {
        Observable::Density { quadrature } => Some(density_reference(spec, quadrature, settings)?),
        _ => None,
    };
    Ok(SweepTable {
        variable: spec.variable,
        rows,
        reference,
    })
}

fn evaluate(spec: &SweepSpec, value: f64, settings: SettingsFor<'_>) -> Result<SweepOutcome> {
    let cfg = spec.config_at(value)?;
    let s = settings(&cfg)?;
    match &spec.observable {
        Observable::FAtK0 { k_perp } => {
            let k = MomentumPoint::new(0.0, *k_perp)?;
            let f = match (spec.method, spec.template.with(spec.variable, value)?) {
                (
                    Method::Semiclassical,
                    Template::PulseTrain {
                        n,
                        sign_mode: SignMode::Alternating,
                        ..
                    },
                ) => approx_spectrum_npulse(&cfg, k, n)?.f,
                (method, _) => distribution(&cfg, k, method, &s)?,
            };
            Ok(SweepOutcome::Scalar { f })
        }
        Observable::Spectrum {
            kpar_min,
            kpar_max,
            kpar_steps,
            k_perp,
        } => {
            let grid = crate::riccati::linear_grid(*kpar_min, *kpar_max, *kpar_steps, *k_perp)?;
            Ok(SweepOutcome::Spectrum {
                table: method_spectrum(&cfg, &grid, spec.method, &s)?,
            })
        }
        Observable::Density { quadrature } => Ok(SweepOutcome::Density {
            report: number_density(&cfg, quadrature, &s)?,
        }),
    }
}

fn density_reference(spec: &SweepSpec, quad: &QuadratureSettings, settings: SettingsFor<'_>) -> Result<DensityReference> {
    let parts = spec
        .template
        .constituents()
        .into_iter()
        .map(|(t, multiplicity)| {
            let cfg = t.build(spec.gauge)?;
            let s = settings(&cfg)?;
            Ok((number_density(&cfg, quad, &s)?.n, multiplicity))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityReference {
        n_first: parts[0].0,
        n_second: parts.get(1).map(|p| p.0),
        n_sum: parts.iter().map(|(n, m)| n * *m as f64).sum(),
    })
}

impl SweepTable {
    /// Scalar observable per row; `NaN` for failed rows.
    pub fn scalars(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| match &r.outcome {
                Ok(SweepOutcome::Scalar { f }) => *f,
                Ok(SweepOutcome::Density { report }) => report.n,
                _ => f64::NAN,
            })
            .collect()
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }

    /// CSV with one line per row, or per momentum point for spectrum sweeps.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let var = match self.variable {
            Variable::T => "T",
            Variable::N => "N",
        };
        let kind = self.rows.iter().find_map(|r| r.outcome.as_ref().ok());
        let opt = |x: Option<f64>| x.map(format_float).unwrap_or_default();
        match kind {
            Some(SweepOutcome::Spectrum { .. }) => {
                w.write_record([var, "k_parallel", "k_perp", "f", "method", "status"])?;
                for r in &self.rows {
                    match &r.outcome {
                        Ok(SweepOutcome::Spectrum { table }) => {
                            for row in &table.rows {
                                w.write_record([
                                    format_float(r.value),
                                    format_float(row.k_parallel),
                                    format_float(row.k_perp),
                                    format_float(row.f),
                                    row.method.to_string(),
                                    "ok".into(),
                                ])?;
                            }
                        }
                        Ok(_) => unreachable!("sweep rows share one observable"),
                        Err(e) => w.write_record([format_float(r.value), String::new(), String::new(), String::new(), String::new(), e.clone()])?,
                    }
                }
            }
            Some(SweepOutcome::Density { .. }) => {
                w.write_record([var, "n", "error_estimate", "n_first", "n_second", "n_sum", "status"])?;
                let reference = self.reference.as_ref();
                let refs = [
                    opt(reference.map(|r| r.n_first)),
                    opt(reference.and_then(|r| r.n_second)),
                    opt(reference.map(|r| r.n_sum)),
                ];
                for r in &self.rows {
                    let (n, err, status) = match &r.outcome {
                        Ok(SweepOutcome::Density { report }) => (format_float(report.n), format_float(report.error_estimate), "ok".to_string()),
                        Ok(_) => unreachable!("sweep rows share one observable"),
                        Err(e) => (String::new(), String::new(), e.clone()),
                    };
                    w.write_record([format_float(r.value), n, err, refs[0].clone(), refs[1].clone(), refs[2].clone(), status])?;
                }
            }
            _ => {
                w.write_record([var, "f", "status"])?;
                for r in &self.rows {
                    match &r.outcome {
                        Ok(SweepOutcome::Scalar { f }) => w.write_record([format_float(r.value), format_float(*f), "ok".into()])?,
                        Ok(_) => unreachable!("sweep rows share one observable"),
                        Err(e) => w.write_record([format_float(r.value), String::new(), e.clone()])?,
                    }
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Indices of strict local maxima with `k∥` in `window` and `f` above the noise
/// floor of the largest value in the window.
pub fn local_maxima(table: &SpectrumTable, window: (f64, f64)) -> Vec<usize> {
    let f = table.values();
    let inside = |i: usize| table.rows[i].k_parallel >= window.0 && table.rows[i].k_parallel <= window.1;
    let peak = (0..f.len()).filter(|&i| inside(i)).map(|i| f[i]).fold(0.0, f64::max);
    let floor = NOISE_FLOOR * peak;
    (1..f.len().saturating_sub(1))
        .filter(|&i| inside(i) && f[i] > f[i - 1] && f[i] > f[i + 1] && f[i] > floor)
        .collect()
}

/// Strict local minima with `k∥` in `window`.
pub fn local_minima(table: &SpectrumTable, window: (f64, f64)) -> Vec<usize> {
    let f = table.values();
    let inside = |i: usize| table.rows[i].k_parallel >= window.0 && table.rows[i].k_parallel <= window.1;
    (1..f.len().saturating_sub(1))
        .filter(|&i| inside(i) && f[i] < f[i - 1] && f[i] < f[i + 1])
        .collect()
}

pub fn count_local_maxima(table: &SpectrumTable, window: (f64, f64)) -> usize {
    local_maxima(table, window).len()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub k_window: (f64, f64),
    pub envelope_max: f64,
    pub reference_max: f64,
    pub ratio: f64,
}

/// Ratio of the upper hulls of local maxima of two spectra on one grid.
///
/// A smooth reference without interior maxima falls back to its largest
/// value in the window.
pub fn envelope_ratio(multi: &SpectrumTable, single: &SpectrumTable, window: (f64, f64)) -> Result<EnvelopeReport> {
    if multi.is_empty() || multi.len() != single.len() || multi.k_parallel() != single.k_parallel() {
        return Err(Error::InvalidInput("envelope_ratio needs two tables on the same grid".into()));
    }
    if !(window.1 > window.0) {
        return Err(Error::InvalidInput("empty k window".into()));
    }
    let maxima = local_maxima(multi, window);
    if maxima.len() < 3 {
        return Err(Error::InsufficientOscillation { found: maxima.len() });
    }
    let envelope_max = maxima.iter().map(|&i| multi.rows[i].f).fold(0.0, f64::max);
    let reference_max = {
        let peaks = local_maxima(single, window);
        if peaks.is_empty() {
            single
                .rows
                .iter()
                .filter(|r| r.k_parallel >= window.0 && r.k_parallel <= window.1)
                .map(|r| r.f)
                .fold(0.0, f64::max)
        } else {
            peaks.iter().map(|&i| single.rows[i].f).fold(0.0, f64::max)
        }
    };
    if !(reference_max > 0.0) {
        return Err(Error::InvalidInput("reference spectrum vanishes in the window".into()));
    }
    Ok(EnvelopeReport {
        k_window: window,
        envelope_max,
        reference_max,
        ratio: envelope_max / reference_max,
    })
}

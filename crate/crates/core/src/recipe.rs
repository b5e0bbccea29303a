//! Declarative experiment files: a field family, what to compute, and how to plot it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldConfig, Gauge};
use crate::plot::{render_plot, PlotStyle};
use crate::riccati::{linear_grid, SolverSettings, Tolerances};
use crate::scan::{method_spectrum, sweep_delay, SweepOutcome, SweepSpec, SweepTable, Template, Variable};
use crate::table::{Method, SpectrumRow, SpectrumTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub plot: PlotStyle,
    #[serde(flatten)]
    pub task: Task,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum Task {
    /// One spectrum per method on a shared longitudinal grid.
    Spectrum {
        field: Template,
        #[serde(default)]
        gauge: Option<Gauge>,
        grid: Grid,
        methods: Vec<Method>,
    },
    Sweep {
        sweep: SweepSpec,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub kpar_min: f64,
    pub kpar_max: f64,
    pub kpar_steps: usize,
    #[serde(default)]
    pub k_perp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecipeOutput {
    pub csv: String,
    /// Absent for sweeps whose rows are whole spectra.
    pub svg: Option<String>,
}

impl Recipe {
    pub fn from_json(text: &str) -> Result<Self> {
        let recipe: Recipe = serde_json::from_str(text)?;
        recipe.validate()?;
        Ok(recipe)
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let safe = !self.name.is_empty() && self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        if !safe {
            return Err(Error::InvalidInput(format!("recipe name '{}' must be [A-Za-z0-9_-]+", self.name)));
        }
        match &self.task {
            Task::Spectrum { methods, .. } if methods.is_empty() => Err(Error::InvalidInput("recipe lists no methods".into())),
            Task::Spectrum { field, gauge, grid, .. } => {
                field.build(*gauge)?;
                linear_grid(grid.kpar_min, grid.kpar_max, grid.kpar_steps, grid.k_perp).map(|_| ())
            }
            Task::Sweep { sweep } => sweep.validate(),
        }
    }

    /// The field of a spectrum recipe, or of the first sweep value.
    pub fn field(&self) -> Result<FieldConfig> {
        match &self.task {
            Task::Spectrum { field, gauge, .. } => field.build(*gauge),
            Task::Sweep { sweep } => sweep.config_at(sweep.values[0]),
        }
    }

    pub fn run(&self) -> Result<RecipeOutput> {
        self.validate()?;
        let tol = self.tolerances;
        match &self.task {
            Task::Spectrum { grid, methods, .. } => {
                let cfg = self.field()?;
                let s = SolverSettings::for_config(&cfg, tol)?;
                let points = linear_grid(grid.kpar_min, grid.kpar_max, grid.kpar_steps, grid.k_perp)?;
                let tables = methods
                    .iter()
                    .map(|&m| method_spectrum(&cfg, &points, m, &s))
                    .collect::<Result<Vec<_>>>()?;
                let all = SpectrumTable::new(tables.iter().flat_map(|t| t.rows.iter().copied()).collect());
                Ok(RecipeOutput {
                    csv: all.to_csv_string(),
                    svg: Some(render_plot(&tables, &self.plot)?),
                })
            }
            Task::Sweep { sweep } => {
                let table = sweep_delay(sweep, &|cfg| SolverSettings::for_config(cfg, tol))?;
                let mut csv = Vec::new();
                table.write_csv(&mut csv)?;
                let svg = match sweep_as_spectrum(&table, sweep.method) {
                    Some(t) if !t.is_empty() => {
                        let x_label = match sweep.variable {
                            Variable::T => "T",
                            Variable::N => "N",
                        };
                        let style = PlotStyle {
                            x_label: x_label.into(),
                            ..self.plot.clone()
                        };
                        Some(render_plot(&[t], &style)?)
                    }
                    _ => None,
                };
                Ok(RecipeOutput {
                    csv: String::from_utf8(csv).expect("csv is utf-8"),
                    svg,
                })
            }
        }
    }
}

/// Scalar sweep results laid out as a table over the swept variable, skipping failed rows.
fn sweep_as_spectrum(table: &SweepTable, method: Method) -> Option<SpectrumTable> {
    let mut rows = Vec::new();
    for r in &table.rows {
        let f = match &r.outcome {
            Ok(SweepOutcome::Scalar { f }) => *f,
            Ok(SweepOutcome::Density { report }) => report.n,
            Ok(SweepOutcome::Spectrum { .. }) => return None,
            Err(_) => continue,
        };
        rows.push(SpectrumRow {
            k_parallel: r.value,
            k_perp: 0.0,
            f,
            method,
        });
    }
    rows.sort_by(|a, b| a.k_parallel.total_cmp(&b.k_parallel));
    Some(SpectrumTable::new(rows))
}

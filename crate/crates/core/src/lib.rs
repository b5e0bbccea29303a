//! Vacuum pair production of charged scalars in time-dependent electric fields.
//!
//! Exact mode numerics, a turning-point approximation and two independent
//! reference solvers, all in natural units `q = m = 1`.

pub mod error;
pub mod fermion;
pub mod field;
pub mod ode;
pub mod plot;
pub mod qve;
pub mod recipe;
pub mod riccati;
pub mod scan;
pub mod semiclassical;
pub mod table;

pub use error::{Error, Result};
pub use field::{FieldConfig, Gauge, GaugeKeyword, MomentumPoint, PulseSpec, SignMode};
pub use riccati::{DensityReport, QuadratureSettings, ReflectionResult, SolverSettings, Tolerances};
pub use table::{Method, SpectrumRow, SpectrumTable};

//! Spin-½ reference spectra.
//!
//! The fermionic amplitude obeys
//!
//! ```text
//! dR/dt = (qE ε⊥ / 2Ω²) [e^{-2iΘ} + R² e^{2iΘ}],   ε⊥ = √(m² + k⊥²),
//! ```
//!
//! and `|α|² + |β|² = 1` gives `f = |R|²/(1 + |R|²) ≤ 1`. The relative plus
//! sign is the one for which the maxima of the bosonic and fermionic
//! two-pulse spectra interchange.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{FieldConfig, MomentumPoint};
use crate::riccati::{evolve, tabulate, Coupling, SolverSettings};
use crate::table::{Method, SpectrumTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FermionReflectionResult {
    pub r_final: Complex64,
    pub f: f64,
}

pub fn solve_fermion_mode(config: &FieldConfig, k: MomentumPoint, s: &SolverSettings) -> Result<FermionReflectionResult> {
    config.validate()?;
    s.validate(config)?;
    let r = evolve(config, k, s, Coupling::Fermion, |_| {})?.r;
    let r2 = r.norm_sqr();
    Ok(FermionReflectionResult {
        r_final: r,
        f: r2 / (1.0 + r2),
    })
}

pub fn fermion_spectrum(config: &FieldConfig, k_grid: &[MomentumPoint], s: &SolverSettings) -> Result<SpectrumTable> {
    config.validate()?;
    s.validate(config)?;
    tabulate(k_grid, Method::Fermion, |k| solve_fermion_mode(config, k, s).map(|r| r.f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_single_pulse;
    use crate::riccati::{linear_grid, solve_mode, Tolerances};

    #[test]
    fn zero_field_is_empty() {
        let cfg = FieldConfig::zero_field();
        let s = SolverSettings::for_config(&cfg, Tolerances::default()).unwrap();
        let t = fermion_spectrum(&cfg, &linear_grid(-1.0, 1.0, 4, 0.3).unwrap(), &s).unwrap();
        assert!(t.values().iter().all(|&f| f == 0.0));
        assert_eq!(t.methods(), vec![Method::Fermion]);
    }

    #[test]
    fn pauli_bound_and_relation() {
        let cfg = make_single_pulse(0.5, 0.2).unwrap();
        let s = SolverSettings::for_config(&cfg, Tolerances::default()).unwrap();
        for k in [-2.0, -1.0, 0.0] {
            let r = solve_fermion_mode(&cfg, MomentumPoint::longitudinal(k), &s).unwrap();
            assert!(r.f >= 0.0 && r.f <= 1.0);
            let r2 = r.r_final.norm_sqr();
            assert!((r.f * (1.0 + r2) - r2).abs() <= 1e-15 * r2.max(1e-300));
        }
    }

    #[test]
    fn same_order_as_boson_for_one_pulse() {
        // a single pulse has no interference, so the two statistics differ only
        // by an O(1) prefactor
        let cfg = make_single_pulse(0.1, 0.05).unwrap();
        let s = SolverSettings::for_config(&cfg, Tolerances::default()).unwrap();
        let k = MomentumPoint::longitudinal(-2.0);
        let b = solve_mode(&cfg, k, &s).unwrap().f;
        let f = solve_fermion_mode(&cfg, k, &s).unwrap().f;
        assert!(f / b > 0.1 && f / b < 10.0, "{f} {b}");
    }
}

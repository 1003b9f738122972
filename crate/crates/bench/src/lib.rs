//! Shared fixtures for the benchmarks.

use dressed_core::linalg::{Basis, DensityMatrix, Superoperator};
use dressed_core::liouville::build_dressed_generator;
use dressed_core::params::{dressed_rates, validity_window, SystemParams, Thermal};
use dressed_core::nalgebra::{Matrix4, Vector4};
use dressed_core::{RateSet, C64};

pub const OMEGA: f64 = 1e5;

/// Rates at the validity-window midpoint.
pub fn reference_rates(n1: f64, n2: f64) -> RateSet {
    let chi = validity_window(OMEGA).chi_mid();
    let params = SystemParams::new(OMEGA, chi, Thermal::Occupations { n1, n2 }).expect("valid parameters");
    dressed_rates(&params).expect("rates in regime")
}

pub fn reference_generator(n1: f64, n2: f64) -> Superoperator {
    build_dressed_generator(&reference_rates(n1, n2), n1, n2).expect("valid generator")
}

/// Full-rank dressed-basis state with every coherence populated.
pub fn mixed_state() -> DensityMatrix {
    let ket = Vector4::new(
        C64::new(0.4, 0.0),
        C64::new(0.5, 0.2),
        C64::new(-0.3, 0.4),
        C64::new(0.1, -0.5),
    );
    let pure = DensityMatrix::pure(&(ket / C64::new(ket.norm(), 0.0)), Basis::Dressed).expect("normalized");
    let m = pure.entries() * C64::new(0.9, 0.0) + Matrix4::identity() * C64::new(0.025, 0.0);
    DensityMatrix::new(m, Basis::Dressed).expect("valid state")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        assert!(reference_rates(0.0, 0.0).gamma1_minus < reference_rates(0.0, 0.0).gamma2_plus);
        assert_eq!(reference_generator(0.1, 0.2).dim(), 16);
        let rho = mixed_state();
        assert!(rho.min_eigenvalue() > 0.02);
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
    }
}

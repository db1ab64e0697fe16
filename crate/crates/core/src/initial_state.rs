//! Initial system states after the preparation pulse.
//!
//! The joint equilibrium state `e^{−β(H_S0 + H_B + V)}` is expanded to second
//! order in `V = F ⊗ B` and traced over the bath. The first-order term drops
//! out because `⟨B⟩ = 0`; the second-order term carries the imaginary-time
//! correlation `⟨B(λ)B(λ′)⟩` over the triangle `0 ≤ λ′ ≤ λ ≤ β`.

use std::f64::consts::FRAC_PI_2;

use crate::bath::Correlations;
use crate::error::{Error, Result};
use crate::linalg::{herm_propagator, HermitianEigen, OperatorMatrix, SpinSystem, C64};
use crate::quadrature::triangle_rule;

/// Nodes per axis of the triangle rule for the double `λ` integral.
pub const DEFAULT_TRIANGLE_NODES: usize = 32;

const UNITARY_TOL: f64 = 1e-10;

/// Tolerated negativity of the perturbative state.
pub const NEGATIVITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PreparationKind {
    RotationYHalfPi,
    CustomUnitary,
}

/// Preparation unitary `Ω` and the Hamiltonian the system equilibrated under.
#[derive(Clone, Debug)]
pub struct PreparationSpec {
    pub kind: PreparationKind,
    omega: OperatorMatrix,
    pub eps0: f64,
    pub delta0: f64,
}

impl PreparationSpec {
    /// `Ω = e^{iπJy/2}`, which rotates `Jz` into `−Jx`.
    pub fn rotation_y_half_pi(sys: &SpinSystem, eps0: f64, delta0: f64) -> Self {
        PreparationSpec {
            kind: PreparationKind::RotationYHalfPi,
            omega: omega_rotation(sys),
            eps0,
            delta0,
        }
    }

    pub fn custom(omega: OperatorMatrix, eps0: f64, delta0: f64) -> Result<Self> {
        let deviation =
            (&omega * &omega.dagger()).max_abs_diff(&OperatorMatrix::identity(omega.dim()));
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(PreparationSpec {
            kind: PreparationKind::CustomUnitary,
            omega,
            eps0,
            delta0,
        })
    }

    pub fn omega(&self) -> &OperatorMatrix {
        &self.omega
    }

    pub fn h_s0(&self, sys: &SpinSystem) -> OperatorMatrix {
        sys.combine(
            C64::new(self.delta0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(self.eps0, 0.0),
        )
    }

    fn check_dim(&self, sys: &SpinSystem) -> Result<()> {
        if self.omega.dim() != sys.dim() {
            return Err(Error::DimensionMismatch {
                left: self.omega.dim(),
                right: sys.dim(),
            });
        }
        Ok(())
    }
}

/// `e^{iπJy/2}`.
pub fn omega_rotation(sys: &SpinSystem) -> OperatorMatrix {
    herm_propagator(sys.jy(), C64::new(0.0, FRAC_PI_2)).expect("Jy is hermitian")
}

/// `Ω e^{−βH_S0} Ω† / Z_S0`.
pub fn prepare_uncorrelated(sys: &SpinSystem, prep: &PreparationSpec, beta: f64) -> Result<OperatorMatrix> {
    prep.check_dim(sys)?;
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::invalid(format!("beta must be > 0, got {beta}")));
    }
    let eig = HermitianEigen::new(&prep.h_s0(sys))?;
    let e_min = eig.min_value();
    let boltz = eig.apply(|e| C64::new((-beta * (e - e_min)).exp(), 0.0));
    let rho = boltz.conjugate_by(prep.omega());
    let z = rho.trace().re;
    Ok(rho.scale_real(1.0 / z).hermitian_part())
}

#[derive(Clone, Debug)]
pub struct CorrelatedState {
    pub rho0: OperatorMatrix,
    /// Normalization `Z′`; tends to 1 as the coupling vanishes.
    pub zprime: f64,
    /// Frobenius norm of the second-order term in the normalized state.
    pub correction_norm: f64,
    /// Second-order term divided by `Z_S0` only, so it is linear in the bath weight.
    pub raw_correction: OperatorMatrix,
    /// Largest anti-hermitian deviation removed when symmetrizing.
    pub hermitization: f64,
    pub min_eigenvalue: f64,
}

impl CorrelatedState {
    /// Whether the smallest eigenvalue is within the tolerated negativity.
    pub fn is_acceptably_positive(&self) -> bool {
        self.min_eigenvalue >= -NEGATIVITY_TOL
    }
}

pub fn prepare_correlated(
    sys: &SpinSystem,
    prep: &PreparationSpec,
    bath: &Correlations,
    f: &OperatorMatrix,
) -> Result<CorrelatedState> {
    prepare_correlated_with_nodes(sys, prep, bath, f, DEFAULT_TRIANGLE_NODES)
}

/// Second-order correlated state with an explicit triangle rule size.
///
/// Everything is evaluated in the eigenbasis of `H_S0`, where the integrand
/// `e^{−βH} F(λ) F(λ′)` becomes
/// `e^{−(β−λ)E} F e^{−(λ−λ′)E} F e^{−λ′E}` with only decaying exponentials
/// once the energies are shifted by their minimum.
pub fn prepare_correlated_with_nodes(
    sys: &SpinSystem,
    prep: &PreparationSpec,
    bath: &Correlations,
    f: &OperatorMatrix,
    nodes: usize,
) -> Result<CorrelatedState> {
    prep.check_dim(sys)?;
    if f.dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            left: f.dim(),
            right: sys.dim(),
        });
    }
    let beta = bath.beta();
    let eig = HermitianEigen::new(&prep.h_s0(sys))?;
    let e_min = eig.min_value();
    let energies: Vec<f64> = eig.values().iter().map(|e| e - e_min).collect();
    let fe = eig.to_eigenbasis(f);
    let dim = sys.dim();

    let mut y = OperatorMatrix::zeros(dim);
    for (lambda, lambda_p, w) in triangle_rule(nodes, beta)? {
        let corr = bath.imag_corr(lambda, lambda_p)?.re;
        let weight = w * corr;
        if weight == 0.0 {
            continue;
        }
        let term = OperatorMatrix::from_fn(dim, |a, b| {
            let mut acc = C64::new(0.0, 0.0);
            for (c, e) in energies.iter().enumerate() {
                acc += fe.get(a, c) * fe.get(c, b) * (-(lambda - lambda_p) * e).exp();
            }
            acc * (-(beta - lambda) * energies[a] - lambda_p * energies[b]).exp()
        });
        y += &term.scale_real(weight);
    }

    let boltz: Vec<f64> = energies.iter().map(|e| (-beta * e).exp()).collect();
    let z_s0: f64 = boltz.iter().sum();
    let zprime = 1.0 + y.trace().re / z_s0;
    if !(zprime > 0.0) {
        return Err(Error::NonPerturbative(format!(
            "normalization Z' = {zprime:.4e} is not positive; reduce the coupling G"
        )));
    }

    let to_lab = |m: &OperatorMatrix| eig.from_eigenbasis(m).conjugate_by(prep.omega());
    let raw_correction = to_lab(&y).scale_real(1.0 / z_s0);
    let zeroth = to_lab(&OperatorMatrix::from_real_diagonal(&boltz)).scale_real(1.0 / z_s0);
    let unnormalized = (&zeroth + &raw_correction).scale_real(1.0 / zprime);

    let hermitization = unnormalized.hermiticity_error();
    let rho = unnormalized.hermitian_part();
    let rho = rho.scale_real(1.0 / rho.trace().re);
    let min_eigenvalue = HermitianEigen::new(&rho)?.min_value();
    Ok(CorrelatedState {
        correction_norm: raw_correction.frobenius_norm() / zprime,
        rho0: rho,
        zprime,
        raw_correction,
        hermitization,
        min_eigenvalue,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{BathKind, BathSpec};

    #[test]
    fn rotation_maps_jz_to_minus_jx() {
        let sys = SpinSystem::new(1).unwrap();
        let om = omega_rotation(&sys);
        assert!(sys.jz().conjugate_by(&om).max_abs_diff(&(-sys.jx().clone())) < 1e-12);
        assert!(sys.jy().conjugate_by(&om).max_abs_diff(sys.jy()) < 1e-12);
        assert!((&om * &om.dagger()).max_abs_diff(&OperatorMatrix::identity(2)) < 1e-12);
        // closed form (I + 2i Jy)/√2 for spin 1/2
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = OperatorMatrix::from_row_major(
            2,
            &[C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0)],
        )
        .unwrap();
        assert!(om.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn infinite_temperature_is_maximally_mixed() {
        let sys = SpinSystem::new(3).unwrap();
        let prep = PreparationSpec::rotation_y_half_pi(&sys, 4.0, 0.5);
        let rho = prepare_uncorrelated(&sys, &prep, 1e-8).unwrap();
        let mixed = OperatorMatrix::identity(4).scale_real(0.25);
        assert!(rho.max_abs_diff(&mixed) < 1e-6);
    }

    #[test]
    fn spin_half_thermal_state_along_x() {
        let sys = SpinSystem::new(1).unwrap();
        let prep = PreparationSpec::rotation_y_half_pi(&sys, 4.0, 0.0);
        let rho = prepare_uncorrelated(&sys, &prep, 1.0).unwrap();
        let z = (-2f64).exp() + 2f64.exp();
        // ground state of 4 Jz is m = −1/2, which Ω sends to +x
        let p_plus = 2f64.exp() / z;
        let p_minus = (-2f64).exp() / z;
        let expect = OperatorMatrix::from_fn(2, |a, b| {
            let diag = 0.5 * (p_plus + p_minus);
            let off = 0.5 * (p_plus - p_minus);
            C64::new(if a == b { diag } else { off }, 0.0)
        });
        assert!(rho.max_abs_diff(&expect) < 1e-14);
        let h_tilde = prep.h_s0(&sys).conjugate_by(prep.omega());
        assert!((&rho * &h_tilde).max_abs_diff(&(&h_tilde * &rho)) < 1e-13);
    }

    #[test]
    fn rejects_non_unitary_preparation() {
        let m = OperatorMatrix::identity(2).scale_real(1.1);
        assert_eq!(PreparationSpec::custom(m, 1.0, 0.0).unwrap_err().kind(), "not-unitary");
    }

    #[test]
    fn zero_coupling_reduces_to_product_state() {
        let sys = SpinSystem::new(2).unwrap();
        let prep = PreparationSpec::rotation_y_half_pi(&sys, 4.0, 0.5);
        let bath = BathSpec::new(BathKind::Bosonic, 0.0, 1.0, 5.0, 1.0)
            .correlations()
            .unwrap();
        let st = prepare_correlated(&sys, &prep, &bath, sys.jz()).unwrap();
        let un = prepare_uncorrelated(&sys, &prep, 1.0).unwrap();
        assert!(st.rho0.max_abs_diff(&un) < 1e-15);
        assert_eq!(st.zprime, 1.0);
        assert_eq!(st.correction_norm, 0.0);
    }
}

//! System Hamiltonians before and after the preparation pulse.

use crate::error::{Error, Result};
use crate::linalg::{OperatorMatrix, SpinSystem, C64};

/// `H_S0 = ε0 Jz + Δ0 Jx` (equilibration) and `H_S = ε Jz + Δ Jx` (dynamics).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    pub eps0: f64,
    pub delta0: f64,
    pub eps: f64,
    pub delta: f64,
}

impl SystemParams {
    pub fn new(eps0: f64, delta0: f64, eps: f64, delta: f64) -> Result<Self> {
        let p = SystemParams {
            eps0,
            delta0,
            eps,
            delta,
        };
        if [eps0, delta0, eps, delta].iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("hamiltonian parameters must be finite"));
        }
        Ok(p)
    }

    pub fn h_s0(&self, sys: &SpinSystem) -> OperatorMatrix {
        sys.combine(C64::new(self.delta0, 0.0), C64::new(0.0, 0.0), C64::new(self.eps0, 0.0))
    }

    pub fn h_s(&self, sys: &SpinSystem) -> OperatorMatrix {
        sys.combine(C64::new(self.delta, 0.0), C64::new(0.0, 0.0), C64::new(self.eps, 0.0))
    }

    /// `Δ′ = sqrt(ε0² + Δ0²)`.
    pub fn delta_prime(&self) -> f64 {
        self.eps0.hypot(self.delta0)
    }

    /// `Δ̃ = sqrt(ε² + Δ²)`.
    pub fn delta_tilde(&self) -> f64 {
        self.eps.hypot(self.delta)
    }

    pub fn is_pure_dephasing(&self) -> bool {
        self.delta == 0.0 && self.delta0 == 0.0
    }
}

/// System operator `F` in `V = F ⊗ B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coupling {
    Jx,
    Jz,
}

impl Coupling {
    pub fn operator(&self, sys: &SpinSystem) -> OperatorMatrix {
        match self {
            Coupling::Jx => sys.jx().clone(),
            Coupling::Jz => sys.jz().clone(),
        }
    }
}

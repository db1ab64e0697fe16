//! Exact finite-bath correlation functions by matrix algebra.
//!
//! Each mode is built as an explicit matrix (truncated Fock space or a 2×2
//! spin), diagonalized, and its thermal two-point function summed over
//! eigenstates. Modes are independent in the thermal state, so the bath
//! correlation is the sum over modes; the integration tests check this
//! against the full tensor-product space.

use super::{BathKind, Mode, ModeList};
use crate::error::{Error, Result};
use crate::linalg::{HermitianEigen, OperatorMatrix, C64, I};

/// Largest Fock space chosen automatically.
pub const MAX_FOCK_CUTOFF: usize = 600;

/// Thermal weight allowed in the top retained Fock level of a user cutoff.
pub const FOCK_TAIL_TOL: f64 = 1e-8;

/// Argument of a two-point function `⟨B(z) B⟩`, `B(z) = e^{zH_B} B e^{−zH_B}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CorrArg {
    /// `⟨B(λ) B(λ′)⟩`, i.e. `z = λ − λ′`.
    Imag { lambda: f64, lambda_prime: f64 },
    /// `⟨B(t) B(s)⟩` in real time, `z = i(t − s)`.
    Real { t: f64, s: f64 },
    /// `B_corr(λ, t)`, `z = λ − it`.
    Mixed { lambda: f64, t: f64 },
}

impl CorrArg {
    pub fn z(&self) -> C64 {
        match *self {
            CorrArg::Imag {
                lambda,
                lambda_prime,
            } => C64::new(lambda - lambda_prime, 0.0),
            CorrArg::Real { t, s } => I * (t - s),
            CorrArg::Mixed { lambda, t } => C64::new(lambda, -t),
        }
    }
}

/// Hamiltonian and coupling operator of one bath mode.
pub fn mode_operators(mode: &Mode, kind: BathKind, cutoff: usize) -> (OperatorMatrix, OperatorMatrix) {
    match kind {
        BathKind::Bosonic => {
            let h = OperatorMatrix::from_fn(cutoff, |r, c| {
                if r == c {
                    C64::new(mode.omega * r as f64, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let b = OperatorMatrix::from_fn(cutoff, |r, c| {
                if r + 1 == c {
                    C64::new(mode.g * (c as f64).sqrt(), 0.0)
                } else if c + 1 == r {
                    C64::new(mode.g * (r as f64).sqrt(), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            (h, b)
        }
        BathKind::Spin => {
            let half = 0.5 * mode.omega;
            let h = OperatorMatrix::from_fn(2, |r, c| {
                if r != c {
                    C64::new(half, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let b = OperatorMatrix::from_real_diagonal(&[mode.g, -mode.g]);
            (h, b)
        }
    }
}

/// Thermal weight of the top level of a truncated oscillator.
fn top_level_weight(beta_omega: f64, cutoff: usize) -> f64 {
    (-beta_omega * (cutoff - 1) as f64).exp() * (-(-beta_omega).exp_m1())
}

/// Smallest Fock cutoff (at least 4) whose truncation error is below 1e-12.
pub fn fock_cutoff_for(omega: f64, beta: f64) -> Result<usize> {
    let x = beta * omega;
    for c in 4..=MAX_FOCK_CUTOFF {
        if top_level_weight(x, c) * c as f64 * x.exp().max(1.0) < 1e-12 {
            return Ok(c);
        }
    }
    Err(Error::Truncation(format!(
        "mode omega = {omega} at beta = {beta} needs more than {MAX_FOCK_CUTOFF} Fock levels"
    )))
}

struct ModeTable {
    /// Eigenenergies shifted so the ground state is zero.
    energies: Vec<f64>,
    log_weights: Vec<f64>,
    /// `|⟨n|B|m⟩|²` in the energy eigenbasis, row-major.
    b_sq: Vec<f64>,
    b_diag: Vec<f64>,
}

impl ModeTable {
    fn new(h: &OperatorMatrix, b: &OperatorMatrix, beta: f64) -> Result<Self> {
        let eig = HermitianEigen::new(h)?;
        let e0 = eig.min_value();
        let energies: Vec<f64> = eig.values().iter().map(|e| e - e0).collect();
        let log_z = {
            let s: f64 = energies.iter().map(|e| (-beta * e).exp()).sum();
            s.ln()
        };
        let log_weights = energies.iter().map(|e| -beta * e - log_z).collect();
        let bp = eig.to_eigenbasis(b);
        let d = energies.len();
        let mut b_sq = Vec::with_capacity(d * d);
        for n in 0..d {
            for m in 0..d {
                b_sq.push(bp.get(n, m).norm_sqr());
            }
        }
        let b_diag = (0..d).map(|n| bp.get(n, n).re).collect();
        Ok(ModeTable {
            energies,
            log_weights,
            b_sq,
            b_diag,
        })
    }

    fn two_point(&self, z: C64) -> C64 {
        let d = self.energies.len();
        let mut acc = C64::new(0.0, 0.0);
        for n in 0..d {
            for m in 0..d {
                let w = self.b_sq[n * d + m];
                if w == 0.0 {
                    continue;
                }
                let arg = z * (self.energies[n] - self.energies[m]) + self.log_weights[n];
                acc += w * arg.exp();
            }
        }
        acc
    }

    fn mean(&self) -> f64 {
        self.b_diag
            .iter()
            .zip(&self.log_weights)
            .map(|(b, lw)| b * lw.exp())
            .sum()
    }
}

/// Exact thermal correlations of a finite bath.
pub struct BruteForceBath {
    kind: BathKind,
    beta: f64,
    tables: Vec<ModeTable>,
    cutoffs: Vec<usize>,
}

impl BruteForceBath {
    pub fn new(modes: &ModeList, kind: BathKind, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::invalid(format!("beta must be > 0, got {beta}")));
        }
        let mut tables = Vec::with_capacity(modes.modes.len());
        let mut cutoffs = Vec::with_capacity(modes.modes.len());
        for mode in &modes.modes {
            let cutoff = match kind {
                BathKind::Spin => 2,
                BathKind::Bosonic => match modes.fock_cutoff {
                    Some(c) => {
                        let tail = top_level_weight(beta * mode.omega, c);
                        if tail > FOCK_TAIL_TOL {
                            return Err(Error::Truncation(format!(
                                "cutoff {c} leaves thermal weight {tail:.2e} in the top level of mode omega = {} (limit {FOCK_TAIL_TOL:.0e})",
                                mode.omega
                            )));
                        }
                        c
                    }
                    None => fock_cutoff_for(mode.omega, beta)?,
                },
            };
            let (h, b) = mode_operators(mode, kind, cutoff);
            tables.push(ModeTable::new(&h, &b, beta)?);
            cutoffs.push(cutoff);
        }
        Ok(BruteForceBath {
            kind,
            beta,
            tables,
            cutoffs,
        })
    }

    pub fn kind(&self) -> BathKind {
        self.kind
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Hilbert-space size used for each mode.
    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn corr(&self, arg: CorrArg) -> C64 {
        self.corr_at(arg.z())
    }

    /// `⟨B(z) B⟩` for complex `z`.
    pub fn corr_at(&self, z: C64) -> C64 {
        self.tables.iter().map(|t| t.two_point(z)).sum()
    }

    /// `⟨B⟩`, zero for both bath kinds.
    pub fn mean(&self) -> f64 {
        self.tables.iter().map(ModeTable::mean).sum()
    }
}

pub fn brute_force_corr(modes: &ModeList, kind: BathKind, beta: f64, arg: CorrArg) -> Result<C64> {
    Ok(BruteForceBath::new(modes, kind, beta)?.corr(arg))
}

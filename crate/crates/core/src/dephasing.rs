//! Exact pure-dephasing dynamics (`Δ = Δ0 = 0`, `F = Jz`, bosonic bath).
//!
//! With `H_S = εJz` the total evolution factorizes into displacements of each
//! mode conditioned on `m`, so every density-matrix element evolves
//! independently. [`DephasingFunctions`] carries the four bath functions in the
//! conventional normalization where `γ`, `Φ` and `𝒞` are weighted by `4|g|²`
//! and `Δ(t)` by `|g|²`. The physical exponents carry `|g|²` throughout, so
//! the evolution divides those three by [`CONVENTIONAL_WEIGHT`]; a full
//! system plus bath simulation in the integration tests pins this down.

use crate::bath::{BathKind, BathSpec, SpectralMeasure};
use crate::error::{Error, Result};
use crate::initial_state::{prepare_uncorrelated, PreparationSpec};
use crate::linalg::{OperatorMatrix, SpinSystem, C64, I};

/// Factor by which `γ`, `Φ` and `𝒞` overweight `|g_k|²`.
pub const CONVENTIONAL_WEIGHT: f64 = 4.0;

/// A denominator smaller than this fraction of its largest term is treated as zero.
const CANCELLATION_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DephasingFunctions {
    pub t: f64,
    /// `γ(t)`; zero at `t = 0`.
    pub gamma: f64,
    /// `Δ(t)`; zero at `t = 0`.
    pub delta: f64,
    pub phi: f64,
    pub c_const: f64,
}

impl DephasingFunctions {
    /// Magnitude decay exponent for `|m − n| = 1`, i.e. `γ(t) t` with `|g|²` weights.
    pub fn decay_exponent(&self) -> f64 {
        self.gamma * self.t / CONVENTIONAL_WEIGHT
    }
}

/// `1 − cos x` without cancellation.
fn one_minus_cos(x: f64) -> f64 {
    let h = (0.5 * x).sin();
    2.0 * h * h
}

/// `sin x − x` without cancellation.
fn sin_minus_x(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        -x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    } else {
        x.sin() - x
    }
}

/// Bath functions at time `t` for a measure with weights `|g_k|²`.
pub fn dephasing_functions(measure: &SpectralMeasure, beta: f64, t: f64) -> Result<DephasingFunctions> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::invalid(format!("beta must be > 0, got {beta}")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("time must be >= 0, got {t}")));
    }
    let w4 = CONVENTIONAL_WEIGHT;
    let c_const = measure.sum(|w| w4 / w);
    let phi = measure.sum(|w| w4 * (w * t).sin() / (w * w));
    let (gamma, delta) = if t == 0.0 {
        (0.0, 0.0)
    } else {
        let gamma = measure.sum(|w| {
            w4 * one_minus_cos(w * t) / (w * w) / (0.5 * beta * w).tanh()
        }) / t;
        let delta = measure.sum(|w| sin_minus_x(w * t) / (w * w)) / t;
        (gamma, delta)
    };
    Ok(DephasingFunctions {
        t,
        gamma,
        delta,
        phi,
        c_const,
    })
}

/// Continuum bath with its quadrature measure built once.
#[derive(Clone, Debug)]
pub struct DephasingBath {
    pub beta: f64,
    measure: SpectralMeasure,
}

impl DephasingBath {
    pub fn new(spec: &BathSpec) -> Result<Self> {
        if spec.kind != BathKind::Bosonic {
            return Err(Error::invalid("exact dephasing requires a bosonic bath"));
        }
        Ok(DephasingBath {
            beta: spec.beta,
            measure: spec.measure()?,
        })
    }

    /// Finite set of modes; weights are `|g_k|²`.
    pub fn from_measure(measure: SpectralMeasure, beta: f64) -> Self {
        DephasingBath { beta, measure }
    }

    pub fn measure(&self) -> &SpectralMeasure {
        &self.measure
    }

    pub fn functions(&self, t: f64) -> Result<DephasingFunctions> {
        dephasing_functions(&self.measure, self.beta, t)
    }
}

fn check_square(rho0: &OperatorMatrix, sys: &SpinSystem) -> Result<()> {
    if rho0.dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            left: rho0.dim(),
            right: sys.dim(),
        });
    }
    Ok(())
}

/// Factors shared by both initial conditions.
fn product_factor(m: f64, n: f64, eps: f64, f: &DephasingFunctions) -> C64 {
    let t = f.t;
    let dm = m - n;
    let phase = -eps * dm * t - f.delta * (m * m - n * n) * t;
    let decay = -f.gamma * t / CONVENTIONAL_WEIGHT * dm * dm;
    (I * phase).exp() * decay.exp()
}

/// Elementwise evolution of a product initial state.
pub fn exact_uncorrelated(
    rho0: &OperatorMatrix,
    sys: &SpinSystem,
    eps: f64,
    f: &DephasingFunctions,
) -> Result<OperatorMatrix> {
    check_square(rho0, sys)?;
    Ok(OperatorMatrix::from_fn(sys.dim(), |a, b| {
        rho0.get(a, b) * product_factor(sys.m_of(a), sys.m_of(b), eps, f)
    }))
}

fn check_pure_dephasing(prep: &PreparationSpec, sys: &SpinSystem) -> Result<()> {
    if prep.delta0 != 0.0 {
        return Err(Error::invalid("exact dephasing requires delta0 = 0"));
    }
    if prep.omega().dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            left: prep.omega().dim(),
            right: sys.dim(),
        });
    }
    Ok(())
}

/// `log w_l` for the displaced-mode equilibrium weights, shifted so the largest is 0.
fn log_weights(sys: &SpinSystem, prep: &PreparationSpec, beta: f64, c_const: f64) -> Vec<f64> {
    let c = c_const / CONVENTIONAL_WEIGHT;
    let raw: Vec<f64> = (0..sys.dim())
        .map(|k| {
            let l = sys.m_of(k);
            -beta * prep.eps0 * l + beta * l * l * c
        })
        .collect();
    let top = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    raw.into_iter().map(|x| x - top).collect()
}

/// Elementwise evolution of the correlated preparation.
///
/// `rho0` is the reduced initial state the elements are scaled from; the
/// ratio of `l`-sums carries the correlation phase `2l(n − m)Φ(t)`.
pub fn exact_correlated(
    rho0: &OperatorMatrix,
    sys: &SpinSystem,
    prep: &PreparationSpec,
    eps: f64,
    beta: f64,
    f: &DephasingFunctions,
) -> Result<OperatorMatrix> {
    check_square(rho0, sys)?;
    check_pure_dephasing(prep, sys)?;
    let dim = sys.dim();
    let om = prep.omega();
    let weights: Vec<f64> = log_weights(sys, prep, beta, f.c_const)
        .into_iter()
        .map(f64::exp)
        .collect();
    let phi = f.phi / CONVENTIONAL_WEIGHT;
    let mut out = OperatorMatrix::zeros(dim);
    for a in 0..dim {
        for b in 0..dim {
            let (m, n) = (sys.m_of(a), sys.m_of(b));
            let mut num = C64::new(0.0, 0.0);
            let mut den = C64::new(0.0, 0.0);
            let mut scale: f64 = 0.0;
            for (k, &w) in weights.iter().enumerate() {
                let l = sys.m_of(k);
                let term = om.get(a, k) * om.get(b, k).conj() * w;
                scale = scale.max(term.norm());
                den += term;
                num += term * (-I * 2.0 * l * (n - m) * phi).exp();
            }
            if den.norm() <= CANCELLATION_TOL * scale {
                if rho0.get(a, b).norm() == 0.0 {
                    continue;
                }
                return Err(Error::UndefinedElement { row: a, col: b });
            }
            out.set(a, b, rho0.get(a, b) * product_factor(m, n, eps, f) * (num / den));
        }
    }
    Ok(out)
}

/// Reduced state of `Ω e^{−βH_tot} Ω†` to all orders in the coupling.
pub fn exact_correlated_state(
    sys: &SpinSystem,
    prep: &PreparationSpec,
    beta: f64,
    c_const: f64,
) -> Result<OperatorMatrix> {
    check_pure_dephasing(prep, sys)?;
    let weights: Vec<f64> = log_weights(sys, prep, beta, c_const)
        .into_iter()
        .map(f64::exp)
        .collect();
    let rho = OperatorMatrix::from_real_diagonal(&weights).conjugate_by(prep.omega());
    let z = rho.trace().re;
    Ok(rho.scale_real(1.0 / z).hermitian_part())
}

/// Pure-dephasing setup with both initial states fixed.
#[derive(Clone, Debug)]
pub struct ExactDephasing {
    pub sys: SpinSystem,
    pub prep: PreparationSpec,
    pub eps: f64,
    pub bath: DephasingBath,
    pub rho0_uncorr: OperatorMatrix,
    pub rho0_corr: OperatorMatrix,
}

impl ExactDephasing {
    /// `rho0_corr` is the state both this solution and the master equation start from.
    pub fn new(
        sys: SpinSystem,
        prep: PreparationSpec,
        eps: f64,
        bath: DephasingBath,
        rho0_corr: OperatorMatrix,
    ) -> Result<Self> {
        check_pure_dephasing(&prep, &sys)?;
        check_square(&rho0_corr, &sys)?;
        let rho0_uncorr = prepare_uncorrelated(&sys, &prep, bath.beta)?;
        Ok(ExactDephasing {
            sys,
            prep,
            eps,
            bath,
            rho0_uncorr,
            rho0_corr,
        })
    }

    pub fn state(&self, t: f64, correlated: bool) -> Result<OperatorMatrix> {
        let f = self.bath.functions(t)?;
        let rho = if correlated {
            exact_correlated(&self.rho0_corr, &self.sys, &self.prep, self.eps, self.bath.beta, &f)?
        } else {
            exact_uncorrelated(&self.rho0_uncorr, &self.sys, self.eps, &f)?
        };
        Ok(rho.hermitian_part())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::BathSpec;

    fn fig1_bath() -> BathSpec {
        BathSpec::new(BathKind::Bosonic, 0.05, 1.0, 5.0, 1.0)
    }

    #[test]
    fn ohmic_constant_is_four_g_omega_c() {
        let b = DephasingBath::new(&fig1_bath()).unwrap();
        let f = b.functions(1.0).unwrap();
        assert!((f.c_const - 1.0).abs() < 1e-10, "{}", f.c_const);
    }

    #[test]
    fn limits_at_zero_time() {
        let b = DephasingBath::new(&fig1_bath()).unwrap();
        let f = b.functions(0.0).unwrap();
        assert_eq!((f.gamma, f.delta, f.phi), (0.0, 0.0, 0.0));
        let f = b.functions(1e-6).unwrap();
        assert!(f.gamma * f.t < 1e-10 && f.delta.abs() * f.t < 1e-10);
        assert!(f.gamma >= 0.0);
    }

    #[test]
    fn series_branch_is_continuous() {
        for x in [0.0999f64, 0.1, 0.1001, 1e-3] {
            let exact = x.sin() - x;
            assert!((sin_minus_x(x) - exact).abs() <= 1e-12 * exact.abs().max(1e-300) + 1e-18);
        }
    }

    #[test]
    fn rejects_non_positive_ohmicity() {
        let mut sp = fig1_bath();
        sp.s = 0.0;
        assert!(DephasingBath::new(&sp).is_err());
    }

    #[test]
    fn diagonals_are_frozen() {
        let sys = SpinSystem::new(4).unwrap();
        let prep = PreparationSpec::rotation_y_half_pi(&sys, 4.0, 0.0);
        let b = DephasingBath::new(&fig1_bath()).unwrap();
        let rho0 = prepare_uncorrelated(&sys, &prep, 1.0).unwrap();
        let f = b.functions(1.7).unwrap();
        let rho = exact_uncorrelated(&rho0, &sys, 4.0, &f).unwrap();
        let rc = exact_correlated(&rho0, &sys, &prep, 4.0, 1.0, &f).unwrap();
        for k in 0..5 {
            assert!((rho.get(k, k) - rho0.get(k, k)).norm() < 1e-15);
            assert!((rc.get(k, k) - rho0.get(k, k)).norm() < 1e-14);
        }
        assert!(rho.hermiticity_error() < 1e-12);
        assert!(rc.hermiticity_error() < 1e-12);
    }

    #[test]
    fn zero_coupling_is_free_rotation() {
        let sys = SpinSystem::new(3).unwrap();
        let prep = PreparationSpec::rotation_y_half_pi(&sys, 4.0, 0.0);
        let mut sp = fig1_bath();
        sp.g = 0.0;
        let b = DephasingBath::new(&sp).unwrap();
        let rho0 = prepare_uncorrelated(&sys, &prep, 1.0).unwrap();
        let t = 0.9;
        let f = b.functions(t).unwrap();
        let free = OperatorMatrix::from_fn(4, |a, c| {
            rho0.get(a, c) * (-I * 4.0 * (sys.m_of(a) - sys.m_of(c)) * t).exp()
        });
        let un = exact_uncorrelated(&rho0, &sys, 4.0, &f).unwrap();
        let co = exact_correlated(&rho0, &sys, &prep, 4.0, 1.0, &f).unwrap();
        assert!(un.max_abs_diff(&free) < 1e-12);
        assert!(co.max_abs_diff(&free) < 1e-12);
    }

    #[test]
    fn correlated_state_reduces_to_thermal_without_coupling() {
        let sys = SpinSystem::new(2).unwrap();
        let prep = PreparationSpec::rotation_y_half_pi(&sys, 4.0, 0.0);
        let a = exact_correlated_state(&sys, &prep, 1.0, 0.0).unwrap();
        let b = prepare_uncorrelated(&sys, &prep, 1.0).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn large_exponents_stay_finite() {
        let sys = SpinSystem::new(20).unwrap();
        let prep = PreparationSpec::rotation_y_half_pi(&sys, 4.0, 0.0);
        let rho = exact_correlated_state(&sys, &prep, 50.0, 40.0).unwrap();
        assert!(rho.row_major().iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
    }
}

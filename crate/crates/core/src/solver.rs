//! Time-local second-order master equation
//!
//! `dρ/dt = i[ρ, H_S] − (i/2)([ρ J_corr(t), F] − h.c.) + ([Λ(t) ρ, F] + h.c.)`
//!
//! with `Λ(t) = ∫_0^t F̄(τ) C(τ) dτ` and `F̄(τ) = e^{−iH_S τ} F e^{iH_S τ}`,
//! integrated by fixed-step RK4. All time-dependent operators are tabulated
//! on the half-step grid `h = dt/2` so RK4 stages never interpolate.

use rayon::prelude::*;

use crate::bath::Correlations;
use crate::correlation::{correlation_rhs_term, interpolate, JcorrTable};
use crate::error::{Error, Result};
use crate::linalg::{HermitianEigen, OperatorMatrix, SpinSystem, C64};

/// Default cap on the kernel cache size.
pub const DEFAULT_MEMORY_LIMIT: usize = 1 << 30;

/// Trace drift that aborts an integration.
pub const TRACE_ABORT_TOL: f64 = 1e-6;

/// Uniform time grid `t_k = k dt`, `k = 0..=steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    /// Smallest number of steps of size at most `dt_max` reaching `t_max`;
    /// the step is then shrunk to land on `t_max` exactly.
    pub fn covering(t_max: f64, dt_max: f64) -> Result<Self> {
        if !(dt_max > 0.0) || !dt_max.is_finite() {
            return Err(Error::invalid(format!("dt must be > 0, got {dt_max}")));
        }
        if !(t_max >= dt_max) || !t_max.is_finite() {
            return Err(Error::invalid(format!(
                "t_max must be >= dt, got t_max = {t_max}, dt = {dt_max}"
            )));
        }
        let steps = (t_max / dt_max - 1e-9).ceil().max(1.0) as usize;
        Ok(TimeGrid {
            dt: t_max / steps as f64,
            steps,
        })
    }

    pub fn t_max(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn half_step(&self) -> f64 {
        0.5 * self.dt
    }

    /// Nodes on the half-step grid.
    pub fn half_nodes(&self) -> usize {
        2 * self.steps + 1
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| k as f64 * self.dt).collect()
    }
}

/// `F̄(τ_i)`, `C(τ_i)` and the running integral `Λ(τ_i)` on the half-step grid.
#[derive(Clone, Debug)]
pub struct KernelCache {
    h: f64,
    fbar: Vec<OperatorMatrix>,
    corr: Vec<C64>,
    lambda: Vec<OperatorMatrix>,
}

impl KernelCache {
    pub fn half_step(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.fbar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fbar.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        self.h * (self.len() - 1) as f64
    }

    pub fn fbar(&self, i: usize) -> &OperatorMatrix {
        &self.fbar[i]
    }

    pub fn corr(&self, i: usize) -> C64 {
        self.corr[i]
    }

    pub fn lambda_node(&self, i: usize) -> &OperatorMatrix {
        &self.lambda[i]
    }

    /// `Λ(t)`; grid points exact, linear interpolation in between.
    pub fn lambda_operator(&self, t: f64) -> Result<OperatorMatrix> {
        interpolate(&self.lambda, self.h, t)
    }
}

pub fn build_kernel(
    h_s: &OperatorMatrix,
    f: &OperatorMatrix,
    bath: &Correlations,
    grid: TimeGrid,
) -> Result<KernelCache> {
    build_kernel_with_limit(h_s, f, bath, grid, DEFAULT_MEMORY_LIMIT)
}

pub fn build_kernel_with_limit(
    h_s: &OperatorMatrix,
    f: &OperatorMatrix,
    bath: &Correlations,
    grid: TimeGrid,
    limit_bytes: usize,
) -> Result<KernelCache> {
    if h_s.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            left: h_s.dim(),
            right: f.dim(),
        });
    }
    let count = grid.half_nodes();
    let dim = f.dim();
    let required_bytes = count
        .saturating_mul(dim * dim)
        .saturating_mul(2 * std::mem::size_of::<C64>());
    if required_bytes > limit_bytes {
        return Err(Error::MemoryBound {
            required_bytes,
            limit_bytes,
        });
    }
    let h = grid.half_step();
    let eig = HermitianEigen::new(h_s)?;
    let fbar: Vec<OperatorMatrix> = (0..count)
        .into_par_iter()
        .map(|i| {
            if i == 0 {
                return f.clone();
            }
            let u = eig.propagator(C64::new(0.0, -(i as f64) * h));
            f.conjugate_by(&u)
        })
        .collect();
    let corr: Vec<C64> = (0..count).map(|i| bath.real_corr(i as f64 * h)).collect();
    let integrand: Vec<OperatorMatrix> = fbar.iter().zip(&corr).map(|(fb, &c)| fb.scale(c)).collect();
    let lambda = cumulative_integral(&integrand, h);
    Ok(KernelCache {
        h,
        fbar,
        corr,
        lambda,
    })
}

/// Running integral of uniformly sampled values, fourth order per interval.
fn cumulative_integral(g: &[OperatorMatrix], h: f64) -> Vec<OperatorMatrix> {
    let k = g.len();
    let dim = g.first().map_or(0, OperatorMatrix::dim);
    let mut out = Vec::with_capacity(k);
    out.push(OperatorMatrix::zeros(dim));
    let combo = |w: [f64; 4], idx: [usize; 4]| {
        let mut acc = OperatorMatrix::zeros(dim);
        for (wi, i) in w.iter().zip(idx) {
            acc += &g[i].scale_real(wi * h / 24.0);
        }
        acc
    };
    for i in 0..k.saturating_sub(1) {
        let piece = if k < 4 {
            (&g[i] + &g[i + 1]).scale_real(0.5 * h)
        } else if i == 0 {
            combo([9.0, 19.0, -5.0, 1.0], [0, 1, 2, 3])
        } else if i + 2 >= k {
            combo([1.0, -5.0, 19.0, 9.0], [k - 4, k - 3, k - 2, k - 1])
        } else {
            combo([-1.0, 13.0, 13.0, -1.0], [i - 1, i, i + 1, i + 2])
        };
        let next = &out[i] + &piece;
        out.push(next);
    }
    out
}

/// Operators entering the right-hand side, borrowed for one integration.
pub struct Generator<'a> {
    pub h_s: &'a OperatorMatrix,
    pub f: &'a OperatorMatrix,
    pub kernel: &'a KernelCache,
    /// `None` switches the initial-correlation term off.
    pub jcorr: Option<&'a JcorrTable>,
}

impl Generator<'_> {
    /// `dρ/dt` at time `t`.
    pub fn rhs(&self, rho: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
        let lambda = self.kernel.lambda_operator(t)?;
        let jc = match self.jcorr {
            Some(table) => Some(table.at(t)?),
            None => None,
        };
        self.rhs_with(rho, &lambda, jc.as_ref())
    }

    fn rhs_at_node(&self, rho: &OperatorMatrix, node: usize) -> Result<OperatorMatrix> {
        let lambda = self.kernel.lambda_node(node);
        let jc = self.jcorr.map(|t| t.node(node));
        self.rhs_with(rho, lambda, jc)
    }

    fn rhs_with(
        &self,
        rho: &OperatorMatrix,
        lambda: &OperatorMatrix,
        jc: Option<&OperatorMatrix>,
    ) -> Result<OperatorMatrix> {
        let f = self.f;
        let free = (&(rho * self.h_s) - &(self.h_s * rho)).scale(C64::new(0.0, 1.0));
        let lr = lambda * rho;
        let x = &(&lr * f) - &(f * &lr);
        let mut out = &free + &(&x + &x.dagger());
        if let Some(jc) = jc {
            out += &correlation_rhs_term(rho, jc, f)?;
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<OperatorMatrix>,
    /// `2⟨Jx⟩/N`.
    pub jx: Vec<f64>,
    /// `4⟨Jx²⟩/N²`.
    pub jx2: Vec<f64>,
    pub with_corr_term: bool,
    pub corr_state: bool,
    /// Largest `|Tr ρ − 1|` over the run.
    pub max_trace_drift: f64,
    /// Largest anti-hermitian part removed by the per-step symmetrization.
    pub max_hermitization: f64,
}

/// Classical RK4 with per-step hermitization.
pub fn evolve(
    rho0: &OperatorMatrix,
    sys: &SpinSystem,
    generator: &Generator<'_>,
    grid: TimeGrid,
    corr_state: bool,
) -> Result<Trajectory> {
    if rho0.dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            left: rho0.dim(),
            right: sys.dim(),
        });
    }
    let needed = grid.half_nodes();
    if generator.kernel.len() < needed {
        return Err(Error::OutOfRange {
            time: grid.t_max(),
            max: generator.kernel.t_max(),
        });
    }
    if let Some(table) = generator.jcorr {
        if table.len() < needed {
            return Err(Error::OutOfRange {
                time: grid.t_max(),
                max: table.t_max(),
            });
        }
    }
    let n = sys.n_spins() as f64;
    let jx2_op = sys.jx() * sys.jx();
    let dt = grid.dt;
    let mut rho = rho0.hermitian_part();
    let mut traj = Trajectory {
        times: grid.times(),
        states: Vec::with_capacity(grid.steps + 1),
        jx: Vec::with_capacity(grid.steps + 1),
        jx2: Vec::with_capacity(grid.steps + 1),
        with_corr_term: generator.jcorr.is_some(),
        corr_state,
        max_trace_drift: 0.0,
        max_hermitization: 0.0,
    };
    let record = |rho: &OperatorMatrix, traj: &mut Trajectory| {
        traj.jx.push(2.0 * (rho * sys.jx()).trace().re / n);
        traj.jx2.push(4.0 * (rho * &jx2_op).trace().re / (n * n));
        traj.states.push(rho.clone());
    };
    record(&rho, &mut traj);
    for k in 0..grid.steps {
        let node = 2 * k;
        let k1 = generator.rhs_at_node(&rho, node)?;
        let k2 = generator.rhs_at_node(&(&rho + &k1.scale_real(0.5 * dt)), node + 1)?;
        let k3 = generator.rhs_at_node(&(&rho + &k2.scale_real(0.5 * dt)), node + 1)?;
        let k4 = generator.rhs_at_node(&(&rho + &k3.scale_real(dt)), node + 2)?;
        let incr = &(&k1 + &k2.scale_real(2.0)) + &(&k3.scale_real(2.0) + &k4);
        let next = &rho + &incr.scale_real(dt / 6.0);
        traj.max_hermitization = traj.max_hermitization.max(next.hermiticity_error());
        rho = next.hermitian_part();
        let drift = (rho.trace().re - 1.0).abs();
        traj.max_trace_drift = traj.max_trace_drift.max(drift);
        if drift > TRACE_ABORT_TOL || !drift.is_finite() {
            return Err(Error::TraceDrift {
                drift,
                time: (k + 1) as f64 * dt,
                dt,
            });
        }
        record(&rho, &mut traj);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{BathKind, BathSpec};

    #[test]
    fn grid_covers_t_max() {
        let g = TimeGrid::covering(2.0, 0.005).unwrap();
        assert_eq!(g.steps, 400);
        assert!((g.t_max() - 2.0).abs() < 1e-15);
        let g = TimeGrid::covering(1.0, 0.3).unwrap();
        assert_eq!(g.steps, 4);
        assert!(g.dt <= 0.3);
        assert!(TimeGrid::covering(0.1, 0.2).is_err());
    }

    #[test]
    fn cumulative_rule_is_exact_for_cubics() {
        let h = 0.1;
        let g: Vec<OperatorMatrix> = (0..12)
            .map(|i| {
                let t = i as f64 * h;
                OperatorMatrix::identity(1).scale_real(t * t * t - 2.0 * t)
            })
            .collect();
        let out = cumulative_integral(&g, h);
        for (i, v) in out.iter().enumerate() {
            let t = i as f64 * h;
            let exact = t.powi(4) / 4.0 - t * t;
            assert!((v.get(0, 0).re - exact).abs() < 1e-13, "i={i}");
        }
    }

    #[test]
    fn kernel_starts_at_f_and_commuting_case_is_static() {
        let sys = SpinSystem::new(3).unwrap();
        let bath = BathSpec::new(BathKind::Bosonic, 0.05, 1.0, 5.0, 1.0).correlations().unwrap();
        let h_s = sys.jz().scale_real(2.5);
        let grid = TimeGrid::covering(0.5, 0.01).unwrap();
        let k = build_kernel(&h_s, sys.jz(), &bath, grid).unwrap();
        assert_eq!(k.fbar(0), sys.jz());
        for i in 0..k.len() {
            assert!(k.fbar(i).max_abs_diff(sys.jz()) < 1e-13);
        }
        assert_eq!(k.lambda_operator(0.0).unwrap().max_abs(), 0.0);
        assert!(k.lambda_operator(0.6).is_err());
    }

    #[test]
    fn memory_bound_is_enforced() {
        let sys = SpinSystem::new(10).unwrap();
        let bath = BathSpec::new(BathKind::Bosonic, 0.05, 1.0, 5.0, 1.0).correlations().unwrap();
        let grid = TimeGrid::covering(10.0, 0.001).unwrap();
        let err = build_kernel_with_limit(sys.jz(), sys.jz(), &bath, grid, 1 << 20).unwrap_err();
        assert_eq!(err.kind(), "memory");
    }
}

//! The initial-correlation operator `J_corr(β, t) = ∫_0^β F^R(λ, t) B_corr(λ, t) dλ`
//! with `F^R(λ, t) = U(t) Ω e^{λH_S0} F e^{−λH_S0} Ω† U†(t)`, `U(t) = e^{−iH_S t}`.
//!
//! Two evaluation paths exist. The closed form expands `F^R` for `F = Jz` and
//! `Ω = e^{iπJy/2}` into `α1 Jx + α2 Jy + α3 Jz`. The generic path works for
//! any unitary `Ω` and any collective `F`: the imaginary-time similarity
//! transform is done in the three-dimensional adjoint representation (no
//! exponentially large matrix elements), the rest by unitary conjugation.

use rayon::prelude::*;

use crate::bath::Correlations;
use crate::error::{Error, Result};
use crate::initial_state::PreparationSpec;
use crate::linalg::{herm_propagator, HermitianEigen, OperatorMatrix, SpinSystem, C64, I};
use crate::model::SystemParams;
use crate::quadrature::{gauss_legendre, Rule};

/// Gauss-Legendre nodes for the `λ` integral.
pub const DEFAULT_LAMBDA_NODES: usize = 48;

/// Relative change under node doubling above which the `λ` quadrature is flagged.
pub const LAMBDA_DOUBLING_TOL: f64 = 1e-5;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Closed-form factors at one `(λ, t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaCoeffs {
    /// `Ω e^{λH_S0} Jz e^{−λH_S0} Ω†` before the rotation, along `(Jx, Jy, Jz)`.
    pub a: [C64; 3],
    /// `U Jx U†`.
    pub b: [f64; 3],
    /// `U Jy U†`.
    pub c: [f64; 3],
    /// `U Jz U†`.
    pub d: [f64; 3],
}

impl AlphaCoeffs {
    pub fn new(lambda: f64, t: f64, p: &SystemParams) -> Result<Self> {
        let dp = p.delta_prime();
        let dt = p.delta_tilde();
        if dp == 0.0 {
            return Err(Error::invalid(
                "closed-form coefficients need eps0^2 + delta0^2 > 0; use the generic path",
            ));
        }
        if dt == 0.0 {
            return Err(Error::invalid(
                "closed-form coefficients need eps^2 + delta^2 > 0; use the generic path",
            ));
        }
        let (e0, d0, e, d) = (p.eps0, p.delta0, p.eps, p.delta);
        let ch = (lambda * dp).cosh();
        let sh = (lambda * dp).sinh();
        let a = [
            C64::new(e0 * d0 / (dp * dp) * (1.0 - ch), 0.0),
            C64::new(0.0, -d0 / dp * sh),
            C64::new((e0 * e0 + d0 * d0 * ch) / (dp * dp), 0.0),
        ];
        let (s, c) = (dt * t).sin_cos();
        let b = [(d * d + e * e * c) / (dt * dt), e / dt * s, e * d / (dt * dt) * (1.0 - c)];
        let cc = [-e / dt * s, c, d / dt * s];
        let dd = [e * d / (dt * dt) * (1.0 - c), -d / dt * s, 1.0 + d * d / (dt * dt) * (c - 1.0)];
        Ok(AlphaCoeffs { a, b, c: cc, d: dd })
    }

    /// `(α1, α2, α3)` with `α_i = a_x d_i + a_y c_i − a_z b_i`.
    pub fn alpha(&self) -> [C64; 3] {
        let [ax, ay, az] = self.a;
        [0, 1, 2].map(|i| ax * self.d[i] + ay * self.c[i] - az * self.b[i])
    }
}

pub fn alpha_eval(lambda: f64, t: f64, p: &SystemParams) -> Result<[C64; 3]> {
    Ok(AlphaCoeffs::new(lambda, t, p)?.alpha())
}

/// Columns are the images of `Jx, Jy, Jz` under `X ↦ e^{zH} X e^{−zH}` for
/// `H = h·J`, expressed along `(Jx, Jy, Jz)`.
///
/// With `n = h/|h|` and `K v = n × v` this is
/// `1 + sin(iz|h|) K + (1 − cos(iz|h|)) K²`.
pub fn su2_adjoint(h: [f64; 3], z: C64) -> [[C64; 3]; 3] {
    let norm = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
    let mut out = [[ZERO; 3]; 3];
    for (k, row) in out.iter_mut().enumerate() {
        row[k] = C64::new(1.0, 0.0);
    }
    if norm == 0.0 {
        return out;
    }
    let n = h.map(|x| x / norm);
    let cross = |v: [f64; 3]| {
        [
            n[1] * v[2] - n[2] * v[1],
            n[2] * v[0] - n[0] * v[2],
            n[0] * v[1] - n[1] * v[0],
        ]
    };
    let theta = I * z * norm;
    let s = theta.sin();
    let c1 = C64::new(1.0, 0.0) - theta.cos();
    for k in 0..3 {
        let mut e = [0.0; 3];
        e[k] = 1.0;
        let kv = cross(e);
        let kkv = cross(kv);
        for l in 0..3 {
            out[l][k] += s * kv[l] + c1 * kkv[l];
        }
    }
    out
}

fn apply3(m: &[[C64; 3]; 3], v: [C64; 3]) -> [C64; 3] {
    [0, 1, 2].map(|l| m[l][0] * v[0] + m[l][1] * v[1] + m[l][2] * v[2])
}

/// `F^R(λ, t)` by direct matrix exponentials.
///
/// Entries of `e^{λH_S0}` grow like `e^{λ‖H_S0‖}`, so rounding noise grows
/// with `N λ`; this is an oracle for small systems, not the production path.
pub fn generic_fr(
    lambda: f64,
    t: f64,
    sys: &SpinSystem,
    prep: &PreparationSpec,
    h_s: &OperatorMatrix,
    f: &OperatorMatrix,
) -> Result<OperatorMatrix> {
    let h0 = prep.h_s0(sys);
    let up = herm_propagator(&h0, C64::new(lambda, 0.0))?;
    let down = herm_propagator(&h0, C64::new(-lambda, 0.0))?;
    let f_lambda = &(&up * f) * &down;
    let u = herm_propagator(h_s, C64::new(0.0, -t))?;
    let rot = &u * prep.omega();
    Ok(f_lambda.conjugate_by(&rot))
}

/// `J_corr(β, t) = P Jx + Q Jy + R Jz`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CorrOperator {
    pub p: C64,
    pub q: C64,
    pub r: C64,
}

impl CorrOperator {
    pub fn zero() -> Self {
        CorrOperator::default()
    }

    pub fn operator(&self, sys: &SpinSystem) -> OperatorMatrix {
        sys.combine(self.p, self.q, self.r)
    }

    pub fn norm(&self) -> f64 {
        (self.p.norm_sqr() + self.q.norm_sqr() + self.r.norm_sqr()).sqrt()
    }
}

/// `−(i/2)([ρJ, F] − h.c.)`.
pub fn correlation_rhs_term(
    rho: &OperatorMatrix,
    jc: &OperatorMatrix,
    f: &OperatorMatrix,
) -> Result<OperatorMatrix> {
    if rho.dim() != jc.dim() || rho.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: if rho.dim() != jc.dim() { jc.dim() } else { f.dim() },
        });
    }
    let rj = rho * jc;
    let x = &(&rj * f) - &(f * &rj);
    let anti = &x - &x.dagger();
    Ok(anti.scale(C64::new(0.0, -0.5)))
}

/// How `F^R(λ, t)` is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FrPath {
    /// Closed-form `α` coefficients, which assume `F = Jz` and `Ω = e^{iπJy/2}`.
    ClosedForm,
    /// Adjoint-representation transform of the actual `F` and `Ω`.
    #[default]
    Generic,
}

/// Everything needed to evaluate `J_corr(β, t)` at arbitrary `t`.
#[derive(Clone, Debug)]
pub struct CorrelationTerm {
    sys: SpinSystem,
    params: SystemParams,
    path: FrPath,
    bath: Correlations,
    rule: Rule,
    /// `Ω e^{λ_j H_S0} F e^{−λ_j H_S0} Ω†` at the `λ` nodes (generic path).
    rotated: Vec<OperatorMatrix>,
    h_s: HermitianEigen,
}

impl CorrelationTerm {
    pub fn new(
        sys: &SpinSystem,
        params: &SystemParams,
        prep: &PreparationSpec,
        f: &OperatorMatrix,
        bath: &Correlations,
        path: FrPath,
    ) -> Result<Self> {
        Self::with_nodes(sys, params, prep, f, bath, path, DEFAULT_LAMBDA_NODES)
    }

    pub fn with_nodes(
        sys: &SpinSystem,
        params: &SystemParams,
        prep: &PreparationSpec,
        f: &OperatorMatrix,
        bath: &Correlations,
        path: FrPath,
        nodes: usize,
    ) -> Result<Self> {
        if f.dim() != sys.dim() || prep.omega().dim() != sys.dim() {
            return Err(Error::DimensionMismatch {
                left: sys.dim(),
                right: if f.dim() != sys.dim() { f.dim() } else { prep.omega().dim() },
            });
        }
        if path == FrPath::ClosedForm {
            // surface degenerate parameters at construction
            AlphaCoeffs::new(0.0, 0.0, params)?;
        }
        let beta = bath.beta();
        let rule = gauss_legendre(nodes, 0.0, beta)?;
        let fc = sys.decompose(f);
        let residual = f.max_abs_diff(&sys.combine(fc[0], fc[1], fc[2]));
        if residual > 1e-12 * f.max_abs().max(1.0) {
            return Err(Error::invalid(
                "coupling operator must be a combination of Jx, Jy, Jz",
            ));
        }
        let h0 = [prep.delta0, 0.0, prep.eps0];
        let rotated = rule
            .nodes
            .iter()
            .map(|&lambda| {
                let m = su2_adjoint(h0, C64::new(lambda, 0.0));
                let v = apply3(&m, fc);
                sys.combine(v[0], v[1], v[2]).conjugate_by(prep.omega())
            })
            .collect();
        let h_s = HermitianEigen::new(&params.h_s(sys))?;
        Ok(CorrelationTerm {
            sys: sys.clone(),
            params: *params,
            path,
            bath: bath.clone(),
            rule,
            rotated,
            h_s,
        })
    }

    pub fn path(&self) -> FrPath {
        self.path
    }

    /// `J_corr(β, t)` as a matrix.
    pub fn matrix(&self, t: f64) -> Result<OperatorMatrix> {
        match self.path {
            FrPath::ClosedForm => Ok(self.coefficients(t)?.operator(&self.sys)),
            FrPath::Generic => {
                let mut m = OperatorMatrix::zeros(self.sys.dim());
                for ((lambda, w), x) in self.rule.iter().zip(&self.rotated) {
                    let b = self.bath.bcorr(lambda, t)?;
                    m += &x.scale(b * w);
                }
                let u = self.h_s.propagator(C64::new(0.0, -t));
                Ok(m.conjugate_by(&u))
            }
        }
    }

    /// `(P, Q, R)`; for the generic path obtained by projecting the matrix.
    pub fn coefficients(&self, t: f64) -> Result<CorrOperator> {
        match self.path {
            FrPath::ClosedForm => {
                let mut acc = [ZERO; 3];
                for (lambda, w) in self.rule.iter() {
                    let alpha = alpha_eval(lambda, t, &self.params)?;
                    let b = self.bath.bcorr(lambda, t)? * w;
                    for i in 0..3 {
                        acc[i] += alpha[i] * b;
                    }
                }
                Ok(CorrOperator {
                    p: acc[0],
                    q: acc[1],
                    r: acc[2],
                })
            }
            FrPath::Generic => {
                let c = self.sys.decompose(&self.matrix(t)?);
                Ok(CorrOperator {
                    p: c[0],
                    q: c[1],
                    r: c[2],
                })
            }
        }
    }

    /// Values on `t_i = i h`, `i < count`, computed in parallel.
    pub fn table(&self, h: f64, count: usize) -> Result<JcorrTable> {
        let values = (0..count)
            .into_par_iter()
            .map(|i| self.matrix(i as f64 * h))
            .collect::<Result<Vec<_>>>()?;
        Ok(JcorrTable { h, values })
    }
}

/// Largest relative change of `J_corr` at the given times when the `λ` rule
/// is doubled.
#[allow(clippy::too_many_arguments)]
pub fn lambda_doubling_change(
    sys: &SpinSystem,
    params: &SystemParams,
    prep: &PreparationSpec,
    f: &OperatorMatrix,
    bath: &Correlations,
    path: FrPath,
    nodes: usize,
    times: &[f64],
) -> Result<f64> {
    let a = CorrelationTerm::with_nodes(sys, params, prep, f, bath, path, nodes)?;
    let b = CorrelationTerm::with_nodes(sys, params, prep, f, bath, path, 2 * nodes)?;
    let mut worst: f64 = 0.0;
    for &t in times {
        let ma = a.matrix(t)?;
        let mb = b.matrix(t)?;
        let scale = mb.max_abs();
        if scale > 0.0 {
            worst = worst.max(ma.max_abs_diff(&mb) / scale);
        }
    }
    Ok(worst)
}

/// `J_corr` tabulated on a uniform grid, linearly interpolated in between.
#[derive(Clone, Debug)]
pub struct JcorrTable {
    h: f64,
    values: Vec<OperatorMatrix>,
}

impl JcorrTable {
    pub fn zeros(dim: usize, h: f64, count: usize) -> Self {
        JcorrTable {
            h,
            values: vec![OperatorMatrix::zeros(dim); count],
        }
    }

    pub fn t_max(&self) -> f64 {
        self.h * (self.values.len().saturating_sub(1)) as f64
    }

    pub fn at(&self, t: f64) -> Result<OperatorMatrix> {
        interpolate(&self.values, self.h, t)
    }

    pub fn node(&self, i: usize) -> &OperatorMatrix {
        &self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Linear interpolation on a uniform grid starting at 0; grid points are
/// returned exactly.
pub(crate) fn interpolate(values: &[OperatorMatrix], h: f64, t: f64) -> Result<OperatorMatrix> {
    let max = h * (values.len().saturating_sub(1)) as f64;
    let slack = 1e-9 * h;
    if values.is_empty() || !(t >= -slack && t <= max + slack) {
        return Err(Error::OutOfRange { time: t, max });
    }
    let x = (t / h).max(0.0);
    let i = x.round();
    if (x - i).abs() < 1e-9 {
        return Ok(values[(i as usize).min(values.len() - 1)].clone());
    }
    let lo = (x.floor() as usize).min(values.len() - 2);
    let frac = x - lo as f64;
    Ok(&values[lo].scale_real(1.0 - frac) + &values[lo + 1].scale_real(frac))
}

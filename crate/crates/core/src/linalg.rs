//! Dense complex operators on the symmetric (maximal-j) spin subspace.
//!
//! Basis convention: index `i` holds the `J_z` eigenstate with `m = j - i`,
//! so row 0 is `m = +j` and row `N` is `m = -j`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Default entrywise tolerance used to accept a matrix as hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Dense square complex matrix (row-major semantics, column-major storage).
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix(DMatrix<C64>);

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { C64::new(0.0, 0.0) })
    }

    /// Builds from row-major entries; rejects non-square input.
    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::invalid(format!(
                "expected {} entries for dimension {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self(DMatrix::from_row_slice(dim, dim, entries)))
    }

    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::invalid(format!(
                "operator must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.0[(row, col)] = value;
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn row_major(&self) -> Vec<C64> {
        let n = self.dim();
        (0..n * n).map(|k| self.0[(k / n, k % n)]).collect()
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, z: C64) -> Self {
        Self(&self.0 * z)
    }

    pub fn scale_real(&self, x: f64) -> Self {
        Self(self.0.map(|v| v * x))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |M - M†|` entrywise.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    /// `U M U†`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        Self(&u.0 * &self.0 * u.0.adjoint())
    }

    /// Hilbert-Schmidt inner product `Tr(A† B)`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 + &rhs.0)
    }
}

impl Add for OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(self.0 + rhs.0)
    }
}

impl AddAssign<&OperatorMatrix> for OperatorMatrix {
    fn add_assign(&mut self, rhs: &OperatorMatrix) {
        self.0 += &rhs.0;
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 - &rhs.0)
    }
}

impl Sub for OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(self.0 - rhs.0)
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 * &rhs.0)
    }
}

impl Mul for OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(self.0 * rhs.0)
    }
}

impl Mul<C64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: C64) -> OperatorMatrix {
        OperatorMatrix(&self.0 * rhs)
    }
}

impl Mul<C64> for OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: C64) -> OperatorMatrix {
        OperatorMatrix(self.0 * rhs)
    }
}

impl Neg for OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        OperatorMatrix(-self.0)
    }
}

/// `[A, B] = AB - BA`.
pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    a.check_same_dim(b)?;
    Ok(OperatorMatrix(&a.0 * &b.0 - &b.0 * &a.0))
}

pub fn dagger(a: &OperatorMatrix) -> OperatorMatrix {
    a.dagger()
}

pub fn trace(a: &OperatorMatrix) -> C64 {
    a.trace()
}

/// `Tr(ρ A)`.
pub fn expectation(rho: &OperatorMatrix, a: &OperatorMatrix) -> Result<C64> {
    rho.check_same_dim(a)?;
    let n = rho.dim();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += rho.0[(i, k)] * a.0[(k, i)];
        }
    }
    Ok(acc)
}

/// Spectral decomposition `H = V diag(E) V†` of a hermitian operator.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    values: Vec<f64>,
    vectors: DMatrix<C64>,
}

impl HermitianEigen {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        let scale = h.max_abs().max(1.0);
        let deviation = h.hermiticity_error();
        if deviation > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { deviation });
        }
        let eig = h.hermitian_part().0.symmetric_eigen();
        Ok(Self {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Function of the operator, `V diag(f(E)) V†`.
    pub fn apply(&self, f: impl Fn(f64) -> C64) -> OperatorMatrix {
        let d = DMatrix::from_fn(self.values.len(), self.values.len(), |i, j| {
            if i == j {
                f(self.values[i])
            } else {
                C64::new(0.0, 0.0)
            }
        });
        OperatorMatrix(&self.vectors * d * self.vectors.adjoint())
    }

    /// `e^{zH}`.
    pub fn propagator(&self, z: C64) -> OperatorMatrix {
        self.apply(|e| (z * e).exp())
    }

    /// `V† A V`: the matrix of `A` in the eigenbasis.
    pub fn to_eigenbasis(&self, a: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(self.vectors.adjoint() * &a.0 * &self.vectors)
    }

    /// `V A V†`: back from the eigenbasis.
    pub fn from_eigenbasis(&self, a: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.vectors * &a.0 * self.vectors.adjoint())
    }
}

/// `e^{zH}` for hermitian `H` via its eigendecomposition.
pub fn herm_propagator(h: &OperatorMatrix, z: C64) -> Result<OperatorMatrix> {
    Ok(HermitianEigen::new(h)?.propagator(z))
}

/// Collective spin operators of `N` spin-1/2 particles in the symmetric subspace.
#[derive(Clone, Debug)]
pub struct SpinSystem {
    n_spins: usize,
    jx: OperatorMatrix,
    jy: OperatorMatrix,
    jz: OperatorMatrix,
}

impl SpinSystem {
    pub fn new(n_spins: usize) -> Result<Self> {
        build_spin_system(n_spins)
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.n_spins + 1
    }

    /// Total spin quantum number `j = N/2`.
    pub fn j(&self) -> f64 {
        self.n_spins as f64 / 2.0
    }

    /// `m` value of basis index `i`.
    pub fn m_of(&self, index: usize) -> f64 {
        self.j() - index as f64
    }

    pub fn jx(&self) -> &OperatorMatrix {
        &self.jx
    }

    pub fn jy(&self) -> &OperatorMatrix {
        &self.jy
    }

    pub fn jz(&self) -> &OperatorMatrix {
        &self.jz
    }

    /// `x Jx + y Jy + z Jz`.
    pub fn combine(&self, x: C64, y: C64, z: C64) -> OperatorMatrix {
        let mut out = self.jx.scale(x);
        out += &self.jy.scale(y);
        out += &self.jz.scale(z);
        out
    }

    /// Coefficients of `op` along `(Jx, Jy, Jz)` by Hilbert-Schmidt projection.
    pub fn decompose(&self, op: &OperatorMatrix) -> [C64; 3] {
        let norm = self.jz.inner(&self.jz).re;
        [
            self.jx.inner(op) / norm,
            self.jy.inner(op) / norm,
            self.jz.inner(op) / norm,
        ]
    }

    /// Coherent state with every spin along `+x`: the top eigenvector of `Jx`.
    pub fn x_polarized_state(&self) -> OperatorMatrix {
        // |+x> = e^{-i pi/2 Jy} |j, j>
        let rot = herm_propagator(&self.jy, C64::new(0.0, -std::f64::consts::FRAC_PI_2))
            .expect("Jy is hermitian");
        let n = self.dim();
        OperatorMatrix::from_fn(n, |a, b| rot.get(a, 0) * rot.get(b, 0).conj())
    }
}

pub fn build_spin_system(n_spins: usize) -> Result<SpinSystem> {
    if n_spins == 0 {
        return Err(Error::invalid("number of spins must be at least 1"));
    }
    let dim = n_spins
        .checked_add(1)
        .filter(|d| d.checked_mul(*d).is_some())
        .ok_or_else(|| Error::invalid(format!("spin count {n_spins} overflows dimension")))?;
    let j = n_spins as f64 / 2.0;
    let m = |i: usize| j - i as f64;

    // J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>; m+1 sits one row above.
    let jplus = OperatorMatrix::from_fn(dim, |r, c| {
        if r + 1 == c {
            let mc = m(c);
            C64::new((j * (j + 1.0) - mc * (mc + 1.0)).max(0.0).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let jminus = jplus.dagger();
    let jx = (&jplus + &jminus).scale_real(0.5);
    let jy = (&jplus - &jminus).scale(C64::new(0.0, -0.5));
    let jz = OperatorMatrix::from_real_diagonal(&(0..dim).map(m).collect::<Vec<_>>());
    Ok(SpinSystem {
        n_spins,
        jx,
        jy,
        jz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn spin_half_jz() {
        let s = build_spin_system(1).unwrap();
        assert_eq!(s.jz().get(0, 0), c(0.5));
        assert_eq!(s.jz().get(1, 1), c(-0.5));
        let lhs = commutator(s.jx(), s.jy()).unwrap();
        assert!(lhs.max_abs_diff(&s.jz().scale(I)) < 1e-12);
    }

    #[test]
    fn jz_ladder_for_four_spins() {
        let s = build_spin_system(4).unwrap();
        let diag: Vec<f64> = (0..5).map(|i| s.jz().get(i, i).re).collect();
        assert_eq!(diag, vec![2.0, 1.0, 0.0, -1.0, -2.0]);
    }

    #[test]
    fn rejects_zero_spins() {
        assert!(build_spin_system(0).is_err());
        assert!(build_spin_system(usize::MAX).is_err());
    }

    #[test]
    fn su2_algebra_up_to_twenty() {
        for n in 1..=20 {
            let s = build_spin_system(n).unwrap();
            let j = s.j();
            let checks = [
                (commutator(s.jx(), s.jy()).unwrap(), s.jz().scale(I)),
                (commutator(s.jy(), s.jz()).unwrap(), s.jx().scale(I)),
                (commutator(s.jz(), s.jx()).unwrap(), s.jy().scale(I)),
            ];
            for (lhs, rhs) in &checks {
                assert!(lhs.max_abs_diff(rhs) < 1e-10, "N={n}");
            }
            let casimir = &(&(s.jx() * s.jx()) + &(s.jy() * s.jy())) + &(s.jz() * s.jz());
            let expected = OperatorMatrix::identity(s.dim()).scale_real(j * (j + 1.0));
            assert!(casimir.max_abs_diff(&expected) < 1e-10, "N={n}");
        }
    }

    #[test]
    fn propagator_zero_is_identity() {
        let s = build_spin_system(3).unwrap();
        let u = herm_propagator(s.jx(), c(0.0)).unwrap();
        assert!(u.max_abs_diff(&OperatorMatrix::identity(4)) < 1e-14);
    }

    #[test]
    fn propagator_diagonal_case() {
        let s = build_spin_system(1).unwrap();
        let u = herm_propagator(s.jz(), c(-1.0)).unwrap();
        assert!((u.get(0, 0).re - (-0.5f64).exp()).abs() < 1e-14);
        assert!((u.get(1, 1).re - 0.5f64.exp()).abs() < 1e-14);
        assert!(u.get(0, 1).norm() < 1e-15);
    }

    #[test]
    fn rotation_by_pi_about_y_flips_jz() {
        // closed form for spin-1/2: e^{i theta Jy} = cos(theta/2) I + i sin(theta/2) sigma_y
        let s = build_spin_system(1).unwrap();
        let u = herm_propagator(s.jy(), C64::new(0.0, PI)).unwrap();
        let closed = OperatorMatrix::from_row_major(2, &[c(0.0), c(1.0), c(-1.0), c(0.0)]).unwrap();
        assert!(u.max_abs_diff(&closed) < 1e-14);
        let flipped = s.jz().conjugate_by(&u);
        assert!(flipped.max_abs_diff(&s.jz().scale_real(-1.0)) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian_generator() {
        let m = OperatorMatrix::from_row_major(2, &[c(0.0), c(1.0), c(0.0), c(0.0)]).unwrap();
        assert!(matches!(herm_propagator(&m, c(1.0)), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn small_identities() {
        let s = build_spin_system(3).unwrap();
        let a = &(s.jx() * s.jy()) + s.jz();
        assert!(commutator(&a, &a).unwrap().max_abs() < 1e-15);
        let mixed = OperatorMatrix::identity(4).scale_real(0.25);
        assert!(expectation(&mixed, s.jz()).unwrap().norm() < 1e-15);
        assert_eq!(dagger(&dagger(&a)), a);
        assert!(trace(&commutator(&a, s.jx()).unwrap()).norm() < 1e-12);
        assert!(commutator(&a, &OperatorMatrix::identity(2)).is_err());
        assert!(expectation(&a, &OperatorMatrix::identity(2)).is_err());
    }

    #[test]
    fn x_polarized_state_has_unit_jx() {
        for n in [1, 4, 10] {
            let s = build_spin_system(n).unwrap();
            let rho = s.x_polarized_state();
            let jx = expectation(&rho, s.jx()).unwrap().re;
            assert!((jx - s.j()).abs() < 1e-12);
            assert!((rho.trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn decompose_roundtrip() {
        let s = build_spin_system(5).unwrap();
        let op = s.combine(C64::new(0.3, -1.0), C64::new(2.0, 0.5), C64::new(-0.7, 0.0));
        let [x, y, z] = s.decompose(&op);
        assert!((x - C64::new(0.3, -1.0)).norm() < 1e-13);
        assert!((y - C64::new(2.0, 0.5)).norm() < 1e-13);
        assert!((z - C64::new(-0.7, 0.0)).norm() < 1e-13);
    }
}

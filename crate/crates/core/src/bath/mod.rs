//! Spectral densities and bath correlation functions.
//!
//! Every correlation function is a weighted sum over a [`SpectralMeasure`]:
//! the continuum case uses quadrature nodes with weights `J(ω) dω`, a finite
//! bath uses its mode frequencies with weights `|g_k|²`. Both go through the
//! same code so the finite-mode oracle in [`oracle`] checks the formulas
//! themselves.

pub mod oracle;

use gauss_quad::laguerre::GaussLaguerre;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::quadrature::frequency_rule;

pub use oracle::{brute_force_corr, BruteForceBath, CorrArg};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BathKind {
    /// Harmonic oscillators, `H_B = Σ ω b†b`, `B = Σ (g b + g* b†)`.
    Bosonic,
    /// Two-level systems, `H_B = Σ ω σx / 2`, `B = Σ g σz`.
    Spin,
}

/// Which imaginary-time kernel to use for the spin bath.
///
/// `Exact` is `cosh x − tanh(βω/2) sinh x` with `x = ω(λ − it)`, which is what
/// a two-level mode actually produces. `Tanh` keeps the alternative form
/// `tanh(βω/2) e^{−x} + 2n sinh x`; at `λ = t = 0` it gives `tanh(βω/2)` instead
/// of `⟨σz²⟩ = 1`, so it only exists for side-by-side comparison.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SpinKernel {
    #[default]
    Exact,
    Tanh,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadControls {
    pub nodes: usize,
    /// Upper frequency limit in units of `omega_c`.
    pub omega_max_factor: f64,
}

impl Default for QuadControls {
    fn default() -> Self {
        QuadControls {
            nodes: 400,
            omega_max_factor: 50.0,
        }
    }
}

/// Continuum bath with spectral density `J(ω) = G ω^s ωc^{1−s} e^{−ω/ωc}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BathSpec {
    pub kind: BathKind,
    pub g: f64,
    pub s: f64,
    pub omega_c: f64,
    pub beta: f64,
    pub quad: QuadControls,
    pub spin_kernel: SpinKernel,
}

impl BathSpec {
    pub fn new(kind: BathKind, g: f64, s: f64, omega_c: f64, beta: f64) -> Self {
        BathSpec {
            kind,
            g,
            s,
            omega_c,
            beta,
            quad: QuadControls::default(),
            spin_kernel: SpinKernel::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.g, self.s, self.omega_c, self.beta]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid("bath parameters must be finite"));
        }
        if self.g < 0.0 {
            return Err(Error::invalid(format!("coupling G must be >= 0, got {}", self.g)));
        }
        if self.s <= 0.0 {
            return Err(Error::invalid(format!("ohmicity s must be > 0, got {}", self.s)));
        }
        if self.omega_c <= 0.0 {
            return Err(Error::invalid(format!(
                "cutoff omega_c must be > 0, got {}",
                self.omega_c
            )));
        }
        if self.beta <= 0.0 {
            return Err(Error::invalid(format!("beta must be > 0, got {}", self.beta)));
        }
        if self.quad.omega_max_factor < 20.0 {
            return Err(Error::invalid(format!(
                "omega_max must be at least 20 omega_c, got {} omega_c",
                self.quad.omega_max_factor
            )));
        }
        Ok(())
    }

    /// `J(ω)` without input validation.
    pub fn density(&self, omega: f64) -> f64 {
        if omega <= 0.0 {
            return 0.0;
        }
        self.g * omega.powf(self.s) * self.omega_c.powf(1.0 - self.s) * (-omega / self.omega_c).exp()
    }

    pub fn omega_max(&self) -> f64 {
        self.quad.omega_max_factor * self.omega_c
    }

    /// Quadrature nodes with weights `J(ω_i) w_i`.
    pub fn measure(&self) -> Result<SpectralMeasure> {
        self.validate()?;
        let rule = frequency_rule(self.quad.nodes, self.s, self.omega_c, self.omega_max())?;
        let weights = rule
            .iter()
            .map(|(w, q)| q * self.density(w))
            .collect();
        Ok(SpectralMeasure {
            freqs: rule.nodes,
            weights,
        })
    }

    pub fn correlations(&self) -> Result<Correlations> {
        Correlations::new(self.kind, self.beta, self.measure()?, self.spin_kernel)
    }
}

/// Discrete frequencies with nonnegative weights standing in for `Σ_k |g_k|²`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpectralMeasure {
    pub freqs: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SpectralMeasure {
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.freqs.iter().copied().zip(self.weights.iter().copied())
    }

    /// `Σ w_k f(ω_k)`.
    pub fn sum(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.iter().map(|(w, q)| q * f(w)).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SpectralMeasure {
            freqs: self.freqs.clone(),
            weights: self.weights.iter().map(|w| w * factor).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    /// Real coupling constant `g_k`.
    pub g: f64,
    pub omega: f64,
}

/// Finite bath used as an independent oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeList {
    pub modes: Vec<Mode>,
    /// Fock space size per bosonic mode; chosen from the thermal tail when `None`.
    pub fock_cutoff: Option<usize>,
}

impl ModeList {
    pub fn new(modes: Vec<Mode>) -> Result<Self> {
        for m in &modes {
            if !(m.omega > 0.0) || !m.omega.is_finite() || !m.g.is_finite() {
                return Err(Error::invalid(format!(
                    "mode frequency must be positive and finite, got omega = {}, g = {}",
                    m.omega, m.g
                )));
            }
        }
        Ok(ModeList {
            modes,
            fock_cutoff: None,
        })
    }

    pub fn with_fock_cutoff(mut self, cutoff: usize) -> Result<Self> {
        if cutoff < 4 {
            return Err(Error::invalid(format!("fock cutoff must be >= 4, got {cutoff}")));
        }
        self.fock_cutoff = Some(cutoff);
        Ok(self)
    }

    /// `n` modes from generalized Gauss-Laguerre quadrature of `J(ω)`:
    /// `ω_k = ωc x_k`, `g_k² = G ωc² w_k` with the weight `x^s e^{−x}`.
    pub fn gauss_discretization(spec: &BathSpec, n: usize) -> Result<Self> {
        spec.validate()?;
        if n < 2 {
            return Err(Error::invalid("need at least two modes"));
        }
        let rule = GaussLaguerre::new(n, spec.s).map_err(|e| Error::Quadrature(e.to_string()))?;
        let modes = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| Mode {
                g: (spec.g * spec.omega_c * spec.omega_c * w).sqrt(),
                omega: spec.omega_c * x,
            })
            .collect();
        ModeList::new(modes)
    }

    pub fn measure(&self) -> SpectralMeasure {
        SpectralMeasure {
            freqs: self.modes.iter().map(|m| m.omega).collect(),
            weights: self.modes.iter().map(|m| m.g * m.g).collect(),
        }
    }
}

/// `J(ω)` with input validation.
pub fn spectral_density(omega: f64, spec: &BathSpec) -> Result<f64> {
    spec.validate()?;
    if !(omega >= 0.0) {
        return Err(Error::invalid(format!("frequency must be >= 0, got {omega}")));
    }
    Ok(spec.density(omega))
}

/// `1/(e^{βω} − 1)`, evaluated with `expm1` so large `βω` does not cancel.
pub fn bose_occupation(omega: f64, beta: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::invalid(format!("occupation needs omega > 0, got {omega}")));
    }
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("occupation needs beta > 0, got {beta}")));
    }
    Ok(occupation(beta * omega))
}

fn occupation(x: f64) -> f64 {
    1.0 / x.exp_m1()
}

/// Correlation functions of one bath, precomputed on its spectral measure.
///
/// The imaginary-time kernel is stored as
/// `Σ_k [p_k e^{−ω_k λ} e^{iω_k t} + q_k e^{−ω_k(β−λ)} e^{−iω_k t}]`, which never
/// exponentiates a positive argument for `0 ≤ λ ≤ β`.
#[derive(Clone, Debug)]
pub struct Correlations {
    kind: BathKind,
    spin_kernel: SpinKernel,
    beta: f64,
    measure: SpectralMeasure,
    decaying: Vec<f64>,
    growing: Vec<f64>,
    cos_part: Vec<f64>,
    sin_part: Vec<f64>,
}

impl Correlations {
    pub fn new(
        kind: BathKind,
        beta: f64,
        measure: SpectralMeasure,
        spin_kernel: SpinKernel,
    ) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::invalid(format!("beta must be > 0, got {beta}")));
        }
        let mut decaying = Vec::with_capacity(measure.len());
        let mut growing = Vec::with_capacity(measure.len());
        let mut cos_part = Vec::with_capacity(measure.len());
        let mut sin_part = Vec::with_capacity(measure.len());
        for (omega, w) in measure.iter() {
            if !(omega > 0.0) {
                return Err(Error::invalid(format!("frequency must be > 0, got {omega}")));
            }
            let x = beta * omega;
            let n = occupation(x);
            let tanh = (0.5 * x).tanh();
            let (p, q) = match (kind, spin_kernel) {
                (BathKind::Bosonic, _) => (1.0 + n, 1.0 + n),
                (BathKind::Spin, SpinKernel::Exact) => {
                    let f = 1.0 / (1.0 + (-x).exp());
                    (f, f)
                }
                (BathKind::Spin, SpinKernel::Tanh) => (tanh - n, 1.0 + n),
            };
            let (c, s) = match kind {
                BathKind::Bosonic => (1.0 + 2.0 * n, 1.0),
                BathKind::Spin => (1.0, tanh),
            };
            decaying.push(w * p);
            growing.push(w * q);
            cos_part.push(w * c);
            sin_part.push(w * s);
        }
        Ok(Correlations {
            kind,
            spin_kernel,
            beta,
            measure,
            decaying,
            growing,
            cos_part,
            sin_part,
        })
    }

    pub fn from_modes(kind: BathKind, beta: f64, modes: &ModeList) -> Result<Self> {
        Correlations::new(kind, beta, modes.measure(), SpinKernel::Exact)
    }

    pub fn kind(&self) -> BathKind {
        self.kind
    }

    pub fn spin_kernel(&self) -> SpinKernel {
        self.spin_kernel
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn measure(&self) -> &SpectralMeasure {
        &self.measure
    }

    /// `B_corr(λ, t) = ⟨B(λ − it) B⟩` with `B(z) = e^{zH_B} B e^{−zH_B}`.
    pub fn bcorr(&self, lambda: f64, t: f64) -> Result<C64> {
        let lambda = self.check_lambda(lambda)?;
        Ok(self.bcorr_unchecked(lambda, t))
    }

    pub(crate) fn bcorr_unchecked(&self, lambda: f64, t: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (k, &omega) in self.measure.freqs.iter().enumerate() {
            let phase = C64::from_polar(1.0, omega * t);
            let low = self.decaying[k] * (-omega * lambda).exp();
            let high = self.growing[k] * (-omega * (self.beta - lambda)).exp();
            acc += phase * low + phase.conj() * high;
        }
        acc
    }

    /// `⟨B(λ) B(λ′)⟩` for `0 ≤ λ′ ≤ λ ≤ β`; real up to rounding.
    pub fn imag_corr(&self, lambda: f64, lambda_prime: f64) -> Result<C64> {
        let lambda = self.check_lambda(lambda)?;
        let lambda_prime = self.check_lambda(lambda_prime)?;
        if lambda_prime > lambda {
            return Err(Error::invalid(format!(
                "imaginary-time ordering needs lambda' <= lambda, got {lambda_prime} > {lambda}"
            )));
        }
        Ok(C64::new(self.bcorr_unchecked(lambda - lambda_prime, 0.0).re, 0.0))
    }

    /// `C(τ) = ⟨B(τ) B(0)⟩` in real time.
    pub fn real_corr(&self, tau: f64) -> C64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, &omega) in self.measure.freqs.iter().enumerate() {
            let (s, c) = (omega * tau).sin_cos();
            re += self.cos_part[k] * c;
            im -= self.sin_part[k] * s;
        }
        C64::new(re, im)
    }

    /// `B_corr(0, 0) = ⟨B²⟩`.
    pub fn variance(&self) -> f64 {
        self.bcorr_unchecked(0.0, 0.0).re
    }

    fn check_lambda(&self, lambda: f64) -> Result<f64> {
        let slack = 1e-12 * self.beta.max(1.0);
        if !(lambda >= -slack && lambda <= self.beta + slack) {
            return Err(Error::invalid(format!(
                "lambda = {lambda} outside [0, beta = {}]",
                self.beta
            )));
        }
        Ok(lambda.clamp(0.0, self.beta))
    }
}

fn with_kind(spec: &BathSpec, kind: BathKind) -> BathSpec {
    BathSpec {
        kind,
        ..spec.clone()
    }
}

/// Bosonic `B_corr(λ, t)` by quadrature over `J(ω)`.
pub fn bcorr_bosonic(lambda: f64, t: f64, spec: &BathSpec) -> Result<C64> {
    with_kind(spec, BathKind::Bosonic).correlations()?.bcorr(lambda, t)
}

/// Spin-bath `B_corr(λ, t)` using `spec.spin_kernel`.
pub fn bcorr_spin(lambda: f64, t: f64, spec: &BathSpec) -> Result<C64> {
    with_kind(spec, BathKind::Spin).correlations()?.bcorr(lambda, t)
}

pub fn imag_corr(lambda: f64, lambda_prime: f64, spec: &BathSpec) -> Result<C64> {
    spec.correlations()?.imag_corr(lambda, lambda_prime)
}

pub fn real_corr(tau: f64, spec: &BathSpec) -> Result<C64> {
    Ok(spec.correlations()?.real_corr(tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig_spec(kind: BathKind) -> BathSpec {
        BathSpec::new(kind, 0.05, 1.0, 5.0, 1.0)
    }

    #[test]
    fn density_values() {
        let spec = fig_spec(BathKind::Bosonic);
        assert_eq!(spectral_density(0.0, &spec).unwrap(), 0.0);
        let v = spectral_density(5.0, &spec).unwrap();
        assert!((v - 0.25 * (-1f64).exp()).abs() < 1e-15);
        assert!((v - 0.091_969_860_292_860_6).abs() < 1e-12);
        assert!(spectral_density(-1.0, &spec).is_err());
    }

    #[test]
    fn density_peaks_at_s_omega_c() {
        for s in [0.5, 1.0, 2.0] {
            let spec = BathSpec::new(BathKind::Bosonic, 0.05, s, 5.0, 1.0);
            let peak = s * 5.0;
            let h = 1e-3;
            assert!(spec.density(peak) > spec.density(peak - h));
            assert!(spec.density(peak) > spec.density(peak + h));
        }
    }

    #[test]
    fn occupation_values() {
        let n = bose_occupation(2f64.ln(), 1.0).unwrap();
        assert!((n - 1.0).abs() < 1e-12);
        assert!(bose_occupation(50.0, 1.0).unwrap() < 2e-22);
        let coth_form = 0.5 * (1.0 / (0.5f64).tanh() - 1.0);
        assert!((bose_occupation(1.0, 1.0).unwrap() - coth_form).abs() < 1e-12);
        assert!(bose_occupation(0.0, 1.0).is_err());
    }

    #[test]
    fn zero_coupling_vanishes() {
        let mut spec = fig_spec(BathKind::Bosonic);
        spec.g = 0.0;
        assert_eq!(bcorr_bosonic(0.3, 1.2, &spec).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(bcorr_spin(0.3, 1.2, &spec).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn rejects_lambda_outside_range() {
        let spec = fig_spec(BathKind::Bosonic);
        assert!(bcorr_bosonic(1.5, 0.0, &spec).is_err());
        assert!(bcorr_bosonic(-0.1, 0.0, &spec).is_err());
        assert!(imag_corr(0.2, 0.5, &spec).is_err());
    }

    #[test]
    fn validation_messages_name_the_parameter() {
        let mut spec = fig_spec(BathKind::Bosonic);
        spec.s = 0.0;
        assert!(spec.validate().unwrap_err().to_string().contains("ohmicity"));
        let mut spec = fig_spec(BathKind::Bosonic);
        spec.quad.omega_max_factor = 10.0;
        assert!(spec.validate().unwrap_err().to_string().contains("omega_max"));
    }

    #[test]
    fn tanh_spin_kernel_gives_tanh_at_origin() {
        let mut spec = fig_spec(BathKind::Spin);
        spec.spin_kernel = SpinKernel::Tanh;
        let got = bcorr_spin(0.0, 0.0, &spec).unwrap();
        let m = spec.measure().unwrap();
        let expect = m.sum(|w| (0.5 * w).tanh());
        assert!((got.re - expect).abs() < 1e-12 && got.im.abs() < 1e-14);
    }

    #[test]
    fn exact_spin_kernel_gives_total_weight_at_origin() {
        let spec = fig_spec(BathKind::Spin);
        let got = bcorr_spin(0.0, 0.0, &spec).unwrap();
        // ∫ G ω e^{−ω/ωc} = G ωc²
        assert!((got.re - 0.05 * 25.0).abs() < 1e-10, "{got}");
    }
}

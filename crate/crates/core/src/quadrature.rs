//! Gauss rules mapped onto finite intervals.
//!
//! Node and weight generation is delegated to `gauss-quad`; this module only
//! handles interval mapping and the composite frequency grid.

use gauss_quad::{jacobi::GaussJacobi, legendre::GaussLegendre};

use crate::error::{Error, Result};

/// Nodes per panel of the composite frequency rule.
pub const PANEL_ORDER: usize = 16;

/// A quadrature rule: `∫ f ≈ Σ w_i f(x_i)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }

    fn extend(&mut self, other: Rule) {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
    }
}

/// Gauss-Legendre rule with `n` nodes on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<Rule> {
    if n == 0 {
        return Err(Error::invalid("quadrature needs at least one node"));
    }
    if n == 1 {
        return Ok(Rule {
            nodes: vec![0.5 * (a + b)],
            weights: vec![b - a],
        });
    }
    let gl = GaussLegendre::new(n).map_err(|e| Error::Quadrature(e.to_string()))?;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut rule = Rule::default();
    for &(x, w) in gl.as_node_weight_pairs() {
        rule.nodes.push(mid + half * x);
        rule.weights.push(half * w);
    }
    Ok(rule)
}

/// Rule on `[0, a]` exact for `ω^{p} × polynomial`, `p > -1`, returned with
/// the weight folded back in so that it applies to the plain integrand.
///
/// Integrands behaving like `ω^{p} g(ω)` with smooth `g` converge spectrally.
pub fn gauss_jacobi_endpoint(n: usize, a: f64, p: f64) -> Result<Rule> {
    if p.abs() < 1e-15 {
        return gauss_legendre(n, 0.0, a);
    }
    let gj = GaussJacobi::new(n, 0.0, p).map_err(|e| Error::Quadrature(e.to_string()))?;
    let half = 0.5 * a;
    let mut rule = Rule::default();
    for &(x, w) in gj.as_node_weight_pairs() {
        let omega = half * (1.0 + x);
        // ∫_0^a ω^p g dω = (a/2)^{p+1} ∫ (1+x)^p g dx
        rule.nodes.push(omega);
        rule.weights.push(half.powf(p + 1.0) * w * omega.powf(-p));
    }
    Ok(rule)
}

/// Composite rule on `[0, omega_max]` for spectral integrals.
///
/// The first panel `[0, omega_c/2]` carries a Jacobi weight `ω^{s-1}` so the
/// `J(ω) coth(βω/2) ~ ω^{s-1}` endpoint behaviour is integrated exactly.
/// Uniform Gauss-Legendre panels cover `[omega_c/2, 20 omega_c]`, where the
/// cutoff has not yet suppressed the integrand; a few wide panels cover the
/// remaining tail.
pub fn frequency_rule(total_nodes: usize, s: f64, omega_c: f64, omega_max: f64) -> Result<Rule> {
    if total_nodes < 4 * PANEL_ORDER {
        return Err(Error::invalid(format!(
            "frequency quadrature needs at least {} nodes, got {total_nodes}",
            4 * PANEL_ORDER
        )));
    }
    if !(s > 0.0) {
        return Err(Error::invalid(format!("ohmicity s must be positive, got {s}")));
    }
    let panels = total_nodes / PANEL_ORDER;
    let first_edge = 0.5 * omega_c;
    let body_edge = (20.0 * omega_c).min(omega_max);
    let tail_panels = if omega_max > body_edge { (panels / 8).max(1) } else { 0 };
    let body_panels = panels - 1 - tail_panels;

    let mut rule = gauss_jacobi_endpoint(PANEL_ORDER, first_edge, s - 1.0)?;
    let width = (body_edge - first_edge) / body_panels as f64;
    for k in 0..body_panels {
        let a = first_edge + k as f64 * width;
        rule.extend(gauss_legendre(PANEL_ORDER, a, a + width)?);
    }
    if tail_panels > 0 {
        let width = (omega_max - body_edge) / tail_panels as f64;
        for k in 0..tail_panels {
            let a = body_edge + k as f64 * width;
            rule.extend(gauss_legendre(PANEL_ORDER, a, a + width)?);
        }
    }
    Ok(rule)
}

/// Nested Gauss-Legendre rule on the triangle `0 <= y <= x <= b`.
///
/// Returns `(x, y, weight)` triples; the inner interval `[0, x]` is mapped per
/// outer node.
pub fn triangle_rule(n: usize, b: f64) -> Result<Vec<(f64, f64, f64)>> {
    let outer = gauss_legendre(n, 0.0, b)?;
    let unit = gauss_legendre(n, 0.0, 1.0)?;
    let mut out = Vec::with_capacity(n * n);
    for (x, wx) in outer.iter() {
        for (u, wu) in unit.iter() {
            out.push((x, x * u, wx * wu * x));
        }
    }
    Ok(out)
}

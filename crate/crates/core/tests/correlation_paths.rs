use initcorr::bath::{BathKind, BathSpec};
use initcorr::correlation::{
    alpha_eval, generic_fr, lambda_doubling_change, CorrelationTerm, FrPath, LAMBDA_DOUBLING_TOL,
};
use initcorr::initial_state::PreparationSpec;
use initcorr::linalg::{OperatorMatrix, SpinSystem};
use initcorr::model::SystemParams;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fig4_params() -> SystemParams {
    SystemParams::new(4.0, 0.5, 2.5, 0.5).unwrap()
}

fn closed_vs_generic(sys: &SpinSystem, p: &SystemParams, lambda: f64, t: f64) -> f64 {
    let prep = PreparationSpec::rotation_y_half_pi(sys, p.eps0, p.delta0);
    let m = generic_fr(lambda, t, sys, &prep, &p.h_s(sys), sys.jz()).unwrap();
    let c = sys.decompose(&m);
    let a = alpha_eval(lambda, t, p).unwrap();
    (0..3).map(|i| (a[i] - c[i]).norm()).fold(0.0, f64::max)
}

#[test]
fn closed_form_matches_matrix_exponentials_on_random_points() {
    let sys = SpinSystem::new(1).unwrap();
    let p = fig4_params();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let worst = (0..100)
        .map(|_| closed_vs_generic(&sys, &p, rng.gen_range(0.0..1.0), rng.gen_range(0.0..3.0)))
        .fold(0.0, f64::max);
    assert!(worst <= 1e-9, "{worst:e}");
}

#[test]
fn closed_form_is_independent_of_spin_number() {
    // The coefficients come from su(2) alone, so any N gives the same α.
    let p = fig4_params();
    for n in [2, 5] {
        let sys = SpinSystem::new(n).unwrap();
        let d = closed_vs_generic(&sys, &p, 0.7, 1.9);
        assert!(d < 1e-9, "N={n}: {d:e}");
    }
}

proptest! {
    #[test]
    fn closed_form_agrees_for_random_parameters(
        eps0 in 0.5f64..6.0,
        delta0 in -2.0f64..2.0,
        eps in 0.5f64..6.0,
        delta in -2.0f64..2.0,
        lf in 0.0f64..1.0,
        t in 0.0f64..4.0,
    ) {
        let sys = SpinSystem::new(1).unwrap();
        let p = SystemParams::new(eps0, delta0, eps, delta).unwrap();
        let d = closed_vs_generic(&sys, &p, lf, t);
        let scale = (lf * p.delta_prime()).cosh();
        prop_assert!(d < 1e-9 * scale, "{d:e}");
    }
}

fn term(n: usize, kind: BathKind, f_is_jx: bool, path: FrPath) -> (SpinSystem, CorrelationTerm) {
    let sys = SpinSystem::new(n).unwrap();
    let p = fig4_params();
    let prep = PreparationSpec::rotation_y_half_pi(&sys, p.eps0, p.delta0);
    let bath = BathSpec::new(kind, 0.05, 1.0, 5.0, 1.0).correlations().unwrap();
    let f = if f_is_jx { sys.jx().clone() } else { sys.jz().clone() };
    let t = CorrelationTerm::new(&sys, &p, &prep, &f, &bath, path).unwrap();
    (sys, t)
}

#[test]
fn both_paths_give_the_same_operator() {
    let (_, closed) = term(4, BathKind::Bosonic, false, FrPath::ClosedForm);
    let (_, generic) = term(4, BathKind::Bosonic, false, FrPath::Generic);
    for t in [0.0, 0.37, 1.5, 4.0] {
        let a = closed.matrix(t).unwrap();
        let b = generic.matrix(t).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-9 * b.max_abs(), "t={t}");
    }
}

/// `∫_0^β B_corr(λ, t) F^R(λ, t) dλ` by composite Simpson on matrix exponentials.
fn simpson_oracle(sys: &SpinSystem, f: &OperatorMatrix, kind: BathKind, t: f64) -> OperatorMatrix {
    let p = fig4_params();
    let prep = PreparationSpec::rotation_y_half_pi(sys, p.eps0, p.delta0);
    let spec = BathSpec::new(kind, 0.05, 1.0, 5.0, 1.0);
    let bath = spec.correlations().unwrap();
    let h_s = p.h_s(sys);
    let m = 2000;
    let h = spec.beta / m as f64;
    let mut acc = OperatorMatrix::zeros(sys.dim());
    for i in 0..=m {
        let lambda = i as f64 * h;
        let w = if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let fr = generic_fr(lambda, t, sys, &prep, &h_s, f).unwrap();
        let b = bath.bcorr(lambda, t).unwrap();
        acc += &fr.scale(b * (w * h / 3.0));
    }
    acc
}

#[test]
fn correlation_operator_matches_simpson_oracle() {
    for (kind, jx) in [(BathKind::Bosonic, false), (BathKind::Spin, true)] {
        let (sys, t_op) = term(2, kind, jx, FrPath::Generic);
        let f = if jx { sys.jx().clone() } else { sys.jz().clone() };
        for t in [0.0, 0.8, 2.3] {
            let oracle = simpson_oracle(&sys, &f, kind, t);
            let got = t_op.matrix(t).unwrap();
            let rel = got.max_abs_diff(&oracle) / oracle.max_abs();
            assert!(rel < 1e-8, "{kind:?} t={t}: {rel:e}");
        }
    }
}

#[test]
fn literal_coefficients_differ_for_jx_coupling() {
    let (_, generic) = term(2, BathKind::Spin, true, FrPath::Generic);
    let (_, literal) = term(2, BathKind::Spin, true, FrPath::ClosedForm);
    let a = generic.matrix(0.5).unwrap();
    let b = literal.matrix(0.5).unwrap();
    assert!(a.max_abs_diff(&b) > 1e-3 * a.max_abs());
}

#[test]
fn lambda_rule_is_converged() {
    let sys = SpinSystem::new(10).unwrap();
    let p = fig4_params();
    let prep = PreparationSpec::rotation_y_half_pi(&sys, p.eps0, p.delta0);
    for beta in [0.5, 1.5] {
        let bath = BathSpec::new(BathKind::Bosonic, 0.05, 1.0, 5.0, beta)
            .correlations()
            .unwrap();
        let change = lambda_doubling_change(
            &sys,
            &p,
            &prep,
            sys.jz(),
            &bath,
            FrPath::Generic,
            initcorr::correlation::DEFAULT_LAMBDA_NODES,
            &[0.0, 1.0, 3.0],
        )
        .unwrap();
        assert!(change < LAMBDA_DOUBLING_TOL, "beta={beta}: {change:e}");
    }
}

#[test]
fn correlation_operator_is_traceless_combination_of_spin_operators() {
    let (sys, t_op) = term(3, BathKind::Bosonic, false, FrPath::Generic);
    let m = t_op.matrix(1.1).unwrap();
    let c = sys.decompose(&m);
    let rebuilt = sys.combine(c[0], c[1], c[2]);
    assert!(m.max_abs_diff(&rebuilt) < 1e-12 * m.max_abs());
    assert!(m.trace().norm() < 1e-12 * m.max_abs());
}

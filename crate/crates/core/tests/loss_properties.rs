use progx::{LossFunction, LossKind};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const KINDS: [LossKind; 6] = [
    LossKind::Hard01,
    LossKind::Msac,
    LossKind::Huber,
    LossKind::RedescendingHuber,
    LossKind::TukeyBisquare,
    LossKind::MagsacPP,
];

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Loss obtained by marginalising the truncated chi density over a uniform
/// noise scale and integrating `x * w(x)`, evaluated by nested quadrature.
fn magsac_quadrature(r: f64, eps: f64, dof: u32) -> f64 {
    let n = dof as f64;
    let k = ChiSquared::new(n).unwrap().inverse_cdf(0.99).sqrt();
    let sigma_max = eps / k;
    let w = |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        let inner = |s: f64| if s <= 0.0 { 0.0 } else { s.powf(-n) * x.powf(n - 1.0) * (-x * x / (2.0 * s * s)).exp() };
        simpson(&inner, x / k, sigma_max, 1e-11)
    };
    let rho = |t: f64| simpson(&|x: f64| x * w(x), 0.0, t, 1e-9);
    rho(r) / rho(eps)
}

#[test]
fn magsac_loss_matches_quadrature() {
    for dof in [2, 4] {
        let eps = 3.0;
        let l = LossFunction::new(LossKind::MagsacPP, eps, dof).unwrap();
        for i in 1..=10 {
            let r = 0.1 * i as f64 * eps;
            let want = magsac_quadrature(r.min(eps), eps, dof);
            let got = l.loss(r.min(eps * (1.0 - 1e-12)));
            assert!((got - want).abs() < 1e-6, "dof {dof} r {r}: {got} vs {want}");
        }
    }
}

#[test]
fn weights_match_finite_difference() {
    for kind in KINDS.into_iter().filter(|k| *k != LossKind::Hard01) {
        for dof in [1, 2, 4] {
            let eps = 2.0;
            let l = LossFunction::new(kind, eps, dof).unwrap();
            let w0 = l.weight(0.05 * eps);
            for i in 1..19 {
                let r = 0.05 * i as f64 * eps + 0.013;
                let h = 1e-6;
                let fd = (l.loss(r + h) - l.loss(r - h)) / (2.0 * h) / r;
                let w = l.weight(r);
                assert!((fd - w).abs() <= 1e-4 * w0.max(1.0), "{kind} dof {dof} r {r}: fd {fd} w {w}");
            }
        }
    }
}

#[test]
fn hard_loss_is_indicator() {
    let l = LossFunction::hard(2.0).unwrap();
    assert_eq!(l.loss(1.999), 0.0);
    assert_eq!(l.loss(2.0), 1.0);
    assert_eq!(l.weight(1.0), 1.0);
    assert_eq!(l.weight(3.0), 0.0);
}

fn kind_strategy() -> impl Strategy<Value = LossKind> {
    prop::sample::select(KINDS.to_vec())
}

proptest! {
    #[test]
    fn loss_monotone_and_bounded(kind in kind_strategy(), dof in 1u32..5, eps in 0.1f64..20.0,
                                 a in 0.0f64..2.0, b in 0.0f64..2.0) {
        let l = LossFunction::new(kind, eps, dof).unwrap();
        let (r1, r2) = if a <= b { (a * eps, b * eps) } else { (b * eps, a * eps) };
        let (l1, l2) = (l.loss(r1), l.loss(r2));
        prop_assert!((0.0..=1.0).contains(&l1) && (0.0..=1.0).contains(&l2));
        prop_assert!(l1 <= l2 + 1e-12);
        prop_assert!(l.weight(r1) + 1e-9 * l.weight(r1).max(1.0) >= l.weight(r2));
        prop_assert!(l.weight(r1) >= 0.0);
    }

    #[test]
    fn zero_weight_iff_saturated(kind in kind_strategy(), dof in 1u32..5, eps in 0.1f64..20.0, a in 0.0f64..2.0) {
        let l = LossFunction::new(kind, eps, dof).unwrap();
        let r = a * eps;
        prop_assert_eq!(l.weight(r) == 0.0, l.loss(r) == 1.0);
    }

    #[test]
    fn saturates_beyond_cutoff(kind in kind_strategy(), eps in 0.1f64..20.0, a in 1.0f64..100.0) {
        let l = LossFunction::new(kind, eps, 2).unwrap();
        prop_assert_eq!(l.loss(a * eps), 1.0);
    }
}

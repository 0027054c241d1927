use std::collections::HashSet;

use cbe_mom::jack::{jack_eval, schur_eval};
use cbe_mom::stats::Moments;
use cbe_mom::{
    bijection_s, bijection_s_inv, enumerate_extensions, enumerate_i, enumerate_j, interlaces, psi,
    psi_gamma_form, ArraySpec, RationalParam, Signature,
};
use num_complex::Complex64;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn signature(max_len: usize, max_part: u32) -> impl Strategy<Value = Signature> {
    prop::collection::vec(0..=max_part, 1..=max_len).prop_map(|mut v| {
        v.sort_unstable_by(|a, b| b.cmp(a));
        Signature::new(v).unwrap()
    })
}

/// `(mu, lambda)` with `mu` interlacing `lambda`.
fn interlacing_pair(
    max_len: usize,
    max_part: u32,
) -> impl Strategy<Value = (Signature, Signature)> {
    signature(max_len + 1, max_part)
        .prop_filter("needs two parts", |l| l.len() >= 2)
        .prop_flat_map(|lambda| {
            let p = lambda.parts().to_vec();
            let slots: Vec<_> = (0..p.len() - 1).map(|i| p[i + 1]..=p[i]).collect();
            (Just(lambda), slots).prop_map(|(lambda, mu)| (Signature::new(mu).unwrap(), lambda))
        })
}

fn delta() -> impl Strategy<Value = RationalParam> {
    prop::sample::select(vec![(1, 3), (1, 2), (1, 1), (2, 1), (3, 1), (5, 7)])
        .prop_map(|(a, b)| RationalParam::from_ratio(a, b).unwrap())
}

fn point() -> impl Strategy<Value = Complex64> {
    (-1.5f64..1.5, -1.5f64..1.5).prop_map(|(re, im)| Complex64::new(re, im))
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn weight_forms_agree((mu, lambda) in interlacing_pair(5, 8), d in delta()) {
        let w = psi(&mu, &lambda, &d).unwrap();
        prop_assert!(w > num_rational::BigRational::zero());
        prop_assert_eq!(&w, &psi_gamma_form(&mu, &lambda, &d).unwrap());
        if d.is_schur() {
            prop_assert!(w.is_one());
        }
    }

    #[test]
    fn extensions_are_exactly_the_interlacing_rows(mu in signature(3, 4), extra in 0u32..3) {
        let n = mu.max_part() + extra;
        let all: Vec<Signature> = enumerate_extensions(&mu, n, None).collect();
        for l in &all {
            prop_assert!(interlaces(&mu, l).unwrap());
            prop_assert!(l.max_part() <= n);
        }
        let target = mu.size() + u64::from(n / 2);
        let targeted: Vec<Signature> = enumerate_extensions(&mu, n, Some(target)).collect();
        let filtered: Vec<Signature> = all.iter().filter(|l| l.size() == target).cloned().collect();
        prop_assert_eq!(targeted, filtered);
    }

    #[test]
    fn jack_is_symmetric_and_homogeneous(
        lambda in signature(3, 4),
        pts in prop::collection::vec(point(), 3),
        c in point(),
        d in delta(),
    ) {
        let m = lambda.len();
        let pts = &pts[..m];
        let v = jack_eval(&lambda, pts, &d).unwrap();
        let mut rev = pts.to_vec();
        rev.reverse();
        prop_assert!(close(v, jack_eval(&lambda, &rev, &d).unwrap(), 1e-10));
        let scaled: Vec<Complex64> = pts.iter().map(|z| z * c).collect();
        let expect = v * c.powu(lambda.size() as u32);
        prop_assert!(close(jack_eval(&lambda, &scaled, &d).unwrap(), expect, 1e-9));
        if d.is_schur() {
            prop_assert!(close(v, schur_eval(&lambda, pts).unwrap(), 1e-10));
        }
    }

    #[test]
    fn moments_merge_like_one_pass(xs in prop::collection::vec(-1e3f64..1e3, 2..200), split in 0usize..200) {
        let split = split.min(xs.len());
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..split].iter().for_each(|&x| a.push(x));
        xs[split..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        let (a, w) = (a.estimate(), whole.estimate());
        prop_assert_eq!(a.samples, w.samples);
        prop_assert!((a.mean - w.mean).abs() <= 1e-9 * w.mean.abs().max(1.0));
        match (a.std_error, w.std_error) {
            (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-9 * y.max(1e-300)),
            (x, y) => prop_assert_eq!(x.is_some(), y.is_some()),
        }
    }
}

#[test]
fn bijection_is_onto_the_constrained_set() {
    for n in 0..=3 {
        for (k, q) in [(1, 1), (2, 1), (1, 2)] {
            let spec = ArraySpec::new(n, k, q).unwrap();
            let images: HashSet<_> = enumerate_j(&spec, 64)
                .unwrap()
                .map(|j| {
                    let i = bijection_s(&j, &spec).unwrap();
                    i.validate(&spec).unwrap();
                    assert_eq!(bijection_s_inv(&i, &spec).unwrap(), j);
                    i
                })
                .collect();
            let all: HashSet<_> = enumerate_i(&spec, 64).unwrap().collect();
            assert_eq!(images, all, "N={n} k={k} q={q}");
        }
    }
}

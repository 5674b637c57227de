use jrgauss_core::algebra::{pullback_top, vars, ExtElem, LinMap, Poly, Scalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn scalar() -> impl Strategy<Value = Scalar> {
    prop::collection::vec((-20i64..20, 1i64..9, 0u32..2, -2i32..3), 0..4).prop_map(|parts| {
        parts.into_iter().fold(Scalar::zero(), |acc, (n, d, e, k)| &acc + &Scalar::monomial(BigRational::new(BigInt::from(n), BigInt::from(d)), e, k))
    })
}

fn poly() -> impl Strategy<Value = Poly> {
    let v = vars(&["x", "y", "z"]);
    prop::collection::vec((prop::collection::vec(0u32..3, 3), -5i64..6), 0..5).prop_map(move |terms| Poly::from_terms(&v, terms.into_iter().map(|(e, c)| (e, Scalar::int(c)))).unwrap())
}

fn ext() -> impl Strategy<Value = ExtElem<Scalar>> {
    let g = vars(&["e1", "e2", "e3", "e4", "e5"]);
    prop::collection::vec((prop::collection::btree_set(0usize..5, 0..4), -4i64..5), 0..4).prop_map(move |terms| {
        let mut out = ExtElem::zero(&g).unwrap();
        for (idx, c) in terms {
            let idx: Vec<usize> = idx.into_iter().collect();
            out = out.add(&ExtElem::monomial(&g, &idx, Scalar::int(c)).unwrap()).unwrap();
        }
        out
    })
}

fn homogeneous(deg: usize) -> impl Strategy<Value = ExtElem<Scalar>> {
    let g = vars(&["e1", "e2", "e3", "e4", "e5"]);
    prop::collection::vec((prop::sample::subsequence(vec![0usize, 1, 2, 3, 4], deg), -4i64..5), 0..3).prop_map(move |terms| {
        let mut out = ExtElem::zero(&g).unwrap();
        for (idx, c) in terms {
            out = out.add(&ExtElem::monomial(&g, &idx, Scalar::int(c)).unwrap()).unwrap();
        }
        out
    })
}

fn matrix3() -> impl Strategy<Value = Vec<Vec<Scalar>>> {
    prop::collection::vec(prop::collection::vec((-6i64..7, 1i64..4), 3), 3).prop_map(|m| m.into_iter().map(|r| r.into_iter().map(|(n, d)| Scalar::ratio(n, d)).collect()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn scalar_ring_axioms(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a - &a, Scalar::zero());
        prop_assert_eq!(&a * &Scalar::one(), a.clone());
    }

    #[test]
    fn scalar_to_f64_is_a_homomorphism(a in scalar(), b in scalar()) {
        let (x, y) = (a.to_f64(), b.to_f64());
        prop_assert!(((&a * &b).to_f64() - x * y).abs() <= 1e-9 * (1.0 + (x * y).abs()));
        prop_assert!(((&a + &b).to_f64() - (x + y)).abs() <= 1e-9 * (1.0 + x.abs() + y.abs()));
    }

    #[test]
    fn leibniz_rule(p in poly(), q in poly(), i in 0usize..3) {
        let lhs = (&p * &q).diff(i);
        let rhs = &(&p.diff(i) * &q) + &(&p * &q.diff(i));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn poly_eval_is_a_homomorphism(p in poly(), q in poly(), x in prop::collection::vec(-2.0f64..2.0, 3)) {
        let (a, b) = (p.eval(&x), q.eval(&x));
        prop_assert!(((&p * &q).eval(&x) - a * b).abs() < 1e-9 * (1.0 + (a * b).abs()));
        prop_assert!(((&p + &q).eval(&x) - (a + b)).abs() < 1e-9 * (1.0 + a.abs() + b.abs()));
    }

    #[test]
    fn wedge_is_associative(a in ext(), b in ext(), c in ext()) {
        let l = a.wedge(&b).unwrap().wedge(&c).unwrap();
        let r = a.wedge(&b.wedge(&c).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn wedge_is_graded_commutative((da, db, a, b) in (0usize..4, 0usize..4).prop_flat_map(|(da, db)| (Just(da), Just(db), homogeneous(da), homogeneous(db)))) {
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        if (da * db) % 2 == 0 {
            prop_assert_eq!(ab, ba);
        } else {
            prop_assert_eq!(ab.add(&ba).unwrap(), ExtElem::zero(a.gens()).unwrap());
        }
    }

    #[test]
    fn det_is_multiplicative(m1 in matrix3(), m2 in matrix3()) {
        let v = vars(&["u1", "u2", "u3"]);
        let l1 = LinMap::new(v.clone(), v.clone(), m1).unwrap();
        let l2 = LinMap::new(v.clone(), v.clone(), m2).unwrap();
        let prod = l1.compose(&l2).unwrap();
        prop_assert_eq!(prod.det().unwrap(), &l1.det().unwrap() * &l2.det().unwrap());
    }

    #[test]
    fn top_pullback_is_determinant(m in matrix3(), c in scalar()) {
        // the zero form carries no coefficient to return
        prop_assume!(!c.is_zero());
        let v = vars(&["u1", "u2", "u3"]);
        let l = LinMap::new(v.clone(), v.clone(), m).unwrap();
        let form = ExtElem::monomial(&v, &[0, 1, 2], c.clone()).unwrap();
        prop_assert_eq!(pullback_top(&form, &l).unwrap(), &c * &l.det().unwrap());
    }
}

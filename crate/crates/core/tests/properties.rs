use num_bigint::{BigInt, BigUint};
use num_traits::One;
use proptest::prelude::*;
use welschinger_core::invariants::{
    keys_of_class, nef_big_classes, permute_plane_class, welschinger,
};
use welschinger_core::*;

fn tangency() -> impl Strategy<Value = TangencyVector> {
    prop::collection::vec((1u32..6, 0u32..4), 0..4).prop_map(TangencyVector::from_counts)
}

fn fact(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |a, k| a * k)
}

fn binom(n: u64, k: u64) -> BigUint {
    fact(n) / (fact(k) * fact(n - k))
}

fn plane_class() -> impl Strategy<Value = DivisorClass> {
    (0i32..8, prop::collection::vec(-2i32..4, 6)).prop_map(|(d, ms)| {
        let mut c = vec![d];
        c.extend(ms.iter().map(|m| -m));
        DivisorClass::new(&c)
    })
}

fn cubic_class() -> impl Strategy<Value = DivisorClass> {
    prop::collection::vec(-3i32..5, 3).prop_map(|c| DivisorClass::new(&c))
}

proptest! {
    #[test]
    fn norm_and_weight_are_additive(a in tangency(), b in tangency()) {
        let s = &a + &b;
        prop_assert_eq!(s.norm(), a.norm() + b.norm());
        prop_assert_eq!(s.iweight(), a.iweight() + b.iweight());
        prop_assert_eq!(s.checked_sub(&b), Some(a.clone()));
        prop_assert!(a.le(&s));
    }

    #[test]
    fn multinomial_matches_factorials(a in tangency(), b in tangency(), c in tangency()) {
        let v = &(&a + &b) + &c;
        let m = multinomial(&v, &[a.clone(), b.clone()]).unwrap();
        // direct formula, index by index
        let mut want = BigUint::one();
        for (k, n) in v.entries() {
            want *= fact(n as u64) / (fact(a.get(k) as u64) * fact(b.get(k) as u64) * fact(c.get(k) as u64));
        }
        prop_assert_eq!(&m, &want);
        prop_assert_eq!(multinomial(&v, &[b.clone(), a.clone()]).unwrap(), want);
    }

    #[test]
    fn enumerate_le_is_the_full_box(v in tangency()) {
        let all: Vec<TangencyVector> = v.enumerate_le().collect();
        let want: u64 = v.entries().map(|(_, c)| c as u64 + 1).product();
        prop_assert_eq!(all.len() as u64, want);
        let distinct: std::collections::HashSet<String> = all.iter().map(|w| w.to_string()).collect();
        prop_assert_eq!(distinct.len(), all.len());
        prop_assert!(all.iter().all(|w| w.le(&v)));
    }

    #[test]
    fn distribute_counts_compositions(v in tangency(), m in 1usize..4) {
        let all: Vec<Vec<TangencyVector>> = v.distribute(m).collect();
        let mut want = BigUint::one();
        for (_, c) in v.entries() {
            want *= binom(c as u64 + m as u64 - 1, m as u64 - 1);
        }
        prop_assert_eq!(BigUint::from(all.len()), want);
        for parts in &all {
            prop_assert_eq!(parts.len(), m);
            prop_assert_eq!(parts.iter().cloned().sum::<TangencyVector>(), v.clone());
        }
    }

    #[test]
    fn tangency_text_round_trip(v in tangency()) {
        prop_assert_eq!(v.to_string().parse::<TangencyVector>().unwrap(), v);
    }

    #[test]
    fn plane_form_is_symmetric_and_bilinear(a in plane_class(), b in plane_class(), c in plane_class()) {
        let lat = Lattice::plane();
        prop_assert_eq!(lat.dot(&a, &b), lat.dot(&b, &a));
        prop_assert_eq!(lat.dot(&(&a + &b), &c), lat.dot(&a, &c) + lat.dot(&b, &c));
        // d^2 - Σ m^2 by hand
        let x = a.coords();
        let y = b.coords();
        let hand: i64 = x[0] as i64 * y[0] as i64 - (1..7).map(|i| x[i] as i64 * y[i] as i64).sum::<i64>();
        prop_assert_eq!(lat.dot(&a, &b), hand);
        prop_assert_eq!(lat.parse_class(&lat.format_class(&a)).unwrap(), a);
    }

    #[test]
    fn conjugation_preserves_the_form(a in plane_class(), b in plane_class()) {
        let spec = SurfaceSpec::new(Model::Plane { real: 2, pairs: 2 }, Twist::Trivial, &[], None).unwrap();
        let (ca, cb) = (spec.conj_class(&a), spec.conj_class(&b));
        prop_assert_eq!(spec.dot(&ca, &cb), spec.dot(&a, &b));
        prop_assert_eq!(spec.conj_class(&ca), a.clone());
        prop_assert!(spec.conjugation().is_invariant(&(&a + &ca)));
    }

    #[test]
    fn cubic_form_matches_gram(a in cubic_class(), b in cubic_class()) {
        let lat = Lattice::cubic_real();
        let (x, y) = (a.coords(), b.coords());
        let mut hand = 0i64;
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                let g = if i == j { -1 } else { 1 };
                hand += g * *xi as i64 * *yj as i64;
            }
        }
        prop_assert_eq!(lat.dot(&a, &b), hand);
        prop_assert_eq!(lat.dot(&a, &b), lat.dot(&b, &a));
    }

    #[test]
    fn plane_invariant_is_symmetric(idx in 0usize..40, perm in Just([0usize, 1, 2, 3, 4, 5]).prop_shuffle()) {
        let spec = SurfaceSpec::new(Model::Plane { real: 6, pairs: 0 }, Twist::Trivial, &[], None).unwrap();
        let classes = nef_big_classes(&spec, 4);
        let d = &classes[idx % classes.len()];
        let e = Engine::new(spec);
        prop_assert_eq!(welschinger(&e, d).unwrap(), welschinger(&e, &permute_plane_class(d, &perm)).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn expansion_adds_up(idx in 0usize..100, key in 0usize..100) {
        let spec = SurfaceSpec::new(Model::CubicTwoComponent, Twist::PhiF, &[], None).unwrap();
        let classes = nef_big_classes(&spec, 6);
        let d = classes[idx % classes.len()].clone();
        let keys = keys_of_class(&spec, &d);
        let (a, b) = keys[key % keys.len()].clone();
        let e = Engine::new(spec);
        let terms = e.expand(&d, &a, &b).unwrap();
        let total: BigInt = terms.iter().map(|t| &t.contribution).sum();
        let value = e.eval(&d, &a, &b).unwrap();
        let n = e.spec().dot(&d, e.spec().q()) + b.norm() as i64 - 1;
        if n > 0 {
            prop_assert_eq!(total, value.clone());
        } else {
            prop_assert!(terms.is_empty());
        }
        prop_assert_eq!(e.eval_reduced(&d, &a, &b).unwrap(), value);
    }
}

//! Property tests for the cross-module invariants.

use blocktri_core::commutator::{commutator, commutator_decompose};
use blocktri_core::couplingio::{
    nice_network, reconstruction_error, to_coupling_network, DiagStrategy,
};
use blocktri_core::factor::{
    five_layer_factor, six_layer_factor_gl, six_layer_factor_sl, LayerKind,
};
use blocktri_core::io::{
    factorization_to_json, matrix_to_json, parse_factorization, parse_matrix, to_pretty,
};
use blocktri_core::obstruction::{
    block_diagonal, build_blockdiag_witness, spectra_obstruction, trace_obstruction,
};
use blocktri_core::sl4gf2::{group_elements, ReachSet};
use blocktri_core::{BlockLayer, Elem, Field, Matrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXACT: [Field; 6] = [
    Field::Prime(2),
    Field::Prime(3),
    Field::Gf4,
    Field::Prime(5),
    Field::Prime(7),
    Field::Rational,
];

fn exact_field() -> impl Strategy<Value = Field> {
    prop::sample::select(EXACT.to_vec())
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Upper-right block invertible.
fn random_special_with_m2<R: Rng>(field: Field, n: usize, rng: &mut R) -> Matrix {
    loop {
        let m = Matrix::random_special(field, 2 * n, rng);
        if m.block_split(n, n).unwrap().m2.is_invertible() {
            return m;
        }
    }
}

fn det(m: &Matrix) -> Elem {
    m.det().unwrap().into_elem()
}

fn check_alternating(layers: &[BlockLayer]) {
    for (i, layer) in layers.iter().enumerate() {
        let want_lower = i % 2 == 0;
        match layer.kind() {
            LayerKind::Lower => assert!(want_lower, "layer {i}"),
            _ => assert!(!want_lower, "layer {i}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn commutator_round_trip(seed in any::<u64>(), case in 0usize..4) {
        let (field, k) = [(Field::Prime(2), 3), (Field::Prime(5), 3), (Field::Rational, 2), (Field::Rational, 4)][case];
        let m = Matrix::random_special(field, k, &mut rng(seed));
        let pair = commutator_decompose(&m).unwrap();
        prop_assert!(pair.x.is_invertible() && pair.y.is_invertible());
        prop_assert_eq!(commutator(&pair.x, &pair.y).unwrap(), m);
    }

    #[test]
    fn six_layer_sl_exact_alternating_unimodular(field in exact_field(), n in 1usize..=4, seed in any::<u64>()) {
        let m = Matrix::random_special(field, 2 * n, &mut rng(seed));
        let f = six_layer_factor_sl(&m).unwrap();
        prop_assert_eq!(f.layers.len(), 6);
        check_alternating(&f.layers);
        for layer in &f.layers {
            prop_assert!(field.is_one(&layer.det(field)));
        }
        prop_assert_eq!(f.evaluate().unwrap(), m);
    }

    #[test]
    fn invertible_m2_needs_no_shift(field in exact_field(), n in 1usize..=3, seed in any::<u64>()) {
        prop_assume!(!(field == Field::Prime(2) && n == 2));
        let m = random_special_with_m2(field, n, &mut rng(seed));
        let f = six_layer_factor_sl(&m).unwrap();
        prop_assert_eq!(f.layers.last().unwrap(), &BlockLayer::Upper(Matrix::zeros(field, n, n)));
    }

    #[test]
    fn five_layer_k_has_det_m(field in exact_field(), n in 1usize..=3, seed in any::<u64>()) {
        prop_assume!(!(field == Field::Prime(2) && n == 2));
        let m = random_special_with_m2(field, n, &mut rng(seed));
        let b = m.block_split(n, n).unwrap();
        let k = &b.m2 * &(&(&(&b.m4 * &b.m2.inverse().unwrap()) * &b.m1) - &b.m3);
        prop_assert_eq!(det(&k), det(&m));
        let f = five_layer_factor(&m).unwrap();
        prop_assert_eq!(f.layers.len(), 5);
        check_alternating(&f.layers);
        prop_assert_eq!(f.evaluate().unwrap(), m);
    }

    #[test]
    fn six_layer_gl_determinant_audit(field in exact_field(), n in 1usize..=3, seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = Matrix::random_invertible(field, 2 * n, &mut r);
        let mut d: Vec<Elem> = (0..n).map(|_| field.random_unit(&mut r)).collect();
        let rest = d[..n - 1].iter().fold(field.one(), |acc, e| field.mul(&acc, e));
        d[n - 1] = field.div(&det(&m), &rest).unwrap();
        let f = six_layer_factor_gl(&m, &d).unwrap();
        prop_assert_eq!(f.evaluate().unwrap(), m.clone());
        for layer in &f.layers[..5] {
            prop_assert!(field.is_one(&layer.det(field)));
        }
        prop_assert_eq!(f.layers[5].det(field), det(&m));
    }

    #[test]
    fn documents_round_trip(field in exact_field(), n in 1usize..=3, seed in any::<u64>()) {
        let m = Matrix::random_special(field, 2 * n, &mut rng(seed));
        prop_assert_eq!(parse_matrix(&to_pretty(&matrix_to_json(&m))).unwrap(), m.clone());
        let f = six_layer_factor_sl(&m).unwrap();
        let back = parse_factorization(&to_pretty(&factorization_to_json(&f))).unwrap();
        prop_assert!(back.reproduces(&m).unwrap());
        prop_assert_eq!(back, f);
    }

    #[test]
    fn reach_depth_is_inversion_invariant(idx in 0usize..20160) {
        thread_local! {
            static REACH: ReachSet = ReachSet::build();
        }
        let g = group_elements()[idx];
        let inv = g.inverse().unwrap();
        REACH.with(|r| assert_eq!(r.depth(g), r.depth(inv)));
    }

    #[test]
    fn blockdiag_witness_shape(
        field in prop::sample::select(vec![Field::Rational, Field::Prime(2), Field::Prime(3), Field::Prime(5)]),
        m in 2usize..=6,
        n in 2usize..=6,
    ) {
        let (x, y) = build_blockdiag_witness(m, n, field).unwrap();
        let sign = field.from_int(if (m + 1) % 2 == 0 { 1 } else { -1 });
        prop_assert_eq!(det(&x), sign.clone());
        prop_assert_eq!(det(&y), sign);
        prop_assert!((0..m).all(|i| field.is_zero(x.get(i, i))));
        let same = field.from_int(m as i64) == field.from_int(n as i64);
        prop_assert_eq!(field.is_one(y.get(0, 0)), same);
        prop_assert_eq!(y.get(n - 1, 0), &field.from_int(if (m + n) % 2 == 0 { 1 } else { -1 }));
        prop_assert!((0..n - 1).all(|i| field.is_one(y.get(i, i + 1))));
        let xi = x.inverse().unwrap();
        prop_assert!(trace_obstruction(&xi, &y).unwrap().obstructed);
        prop_assert!(field.is_one(&det(&block_diagonal(&xi, &y).unwrap())));
    }

    #[test]
    fn spectra_never_flags_similar_blocks(field in exact_field(), k in 1usize..=3, seed in any::<u64>()) {
        // With M₁ = A⁻¹ both sides are built from χ(I − A).
        let a = Matrix::random_invertible(field, k, &mut rng(seed));
        prop_assert!(!spectra_obstruction(&a.inverse().unwrap(), &a).unwrap().obstructed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coupling_networks_are_well_formed(n in 1usize..=3, seed in any::<u64>(), balanced in any::<bool>()) {
        let mut r = rng(seed);
        let mut m = Matrix::from_fn(Field::F64, 2 * n, 2 * n, |_, _| Elem::Float(r.gen_range(-1.0..1.0)));
        let d = Field::F64.to_f64(&det(&m)).unwrap();
        let Ok(inv) = m.inverse() else { return Err(TestCaseError::reject("singular")) };
        prop_assume!(m.norm_inf().unwrap() * inv.norm_inf().unwrap() < 1e3);
        if d < 0.0 {
            for j in 0..2 * n {
                let e = Field::F64.neg(m.get(0, j));
                m.set(0, j, e);
            }
        }
        let strategy = if balanced { DiagStrategy::Balanced } else { DiagStrategy::Corner };
        let (net, f) = to_coupling_network(&m, strategy).unwrap();
        prop_assert_eq!(net.layers.len(), 6);
        prop_assert!(net.layers.iter().filter(|l| l.s.iter().any(|&s| s != 0.0)).count() <= 1);
        prop_assert!(net.layers.iter().all(|l| l.s.iter().all(|s| s.exp() > 0.0)));
        prop_assert_eq!(f.layers.len(), 6);
        prop_assert!(reconstruction_error(&net, &m).unwrap() <= 1e-8);
    }

    #[test]
    fn nice_networks_preserve_volume(n in 1usize..=3, seed in any::<u64>()) {
        let m = Matrix::random_special(Field::Rational, 2 * n, &mut rng(seed));
        let (net, f) = nice_network(&m).unwrap();
        prop_assert!(Field::Rational.is_one(&f.det()));
        prop_assert!(net.layers.iter().all(|l| l.s.iter().all(|&s| s == 0.0)));
        prop_assert!(f.reproduces(&m).unwrap());
    }
}

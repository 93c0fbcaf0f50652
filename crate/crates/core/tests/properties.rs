use nalgebra::DMatrix;
use proptest::prelude::*;

use invmod::io::{self, AlgebraJson};
use invmod::lie::LieAlgebra;
use invmod::linalg::{q_frac, Rational};
use invmod::moduli::{
    curvature_mu, intertwiner_space, type11_defect, validate_chi_on_split,
    InvariantConnectionPoint, LieHomChi, MuMap,
};
use invmod::presets;
use invmod::quotient::{canonicalize, conjugate, group_element, Fingerprinter};

fn algebras() -> Vec<LieAlgebra> {
    vec![
        presets::sl2r(),
        presets::su2(),
        presets::aff1(),
        presets::su3(),
        presets::sl2c_real(),
        presets::sl2r_squared(),
        presets::sl2r().direct_sum(&presets::su2(), "sl2r+su2"),
    ]
}

fn rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| q_frac(n, d))
}

fn rational_vec(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(rational(), n)
}

/// An algebra index with three coordinate vectors of matching length.
fn algebra_and_triple(
) -> impl Strategy<Value = (usize, Vec<Rational>, Vec<Rational>, Vec<Rational>)> {
    (0..algebras().len()).prop_flat_map(|i| {
        let n = algebras()[i].dim();
        (Just(i), rational_vec(n), rational_vec(n), rational_vec(n))
    })
}

fn add(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn small_f64() -> impl Strategy<Value = f64> {
    -2.0f64..2.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobi_holds_exactly((i, x, y, z) in algebra_and_triple()) {
        let a = &algebras()[i];
        let t1 = a.bracket(&x, &a.bracket(&y, &z).unwrap()).unwrap();
        let t2 = a.bracket(&y, &a.bracket(&z, &x).unwrap()).unwrap();
        let t3 = a.bracket(&z, &a.bracket(&x, &y).unwrap()).unwrap();
        let sum = add(&add(&t1, &t2), &t3);
        prop_assert!(sum.iter().all(|c| *c == q_frac(0, 1)));
    }

    #[test]
    fn bracket_is_antisymmetric((i, x, y, _z) in algebra_and_triple()) {
        let a = &algebras()[i];
        let xy = a.bracket(&x, &y).unwrap();
        let yx = a.bracket(&y, &x).unwrap();
        prop_assert_eq!(add(&xy, &yx), vec![q_frac(0, 1); a.dim()]);
    }

    #[test]
    fn killing_form_is_ad_invariant((i, x, y, z) in algebra_and_triple()) {
        let a = &algebras()[i];
        let k = a.killing_form();
        let lhs = k.eval(&a.bracket(&z, &x).unwrap(), &y) + k.eval(&x, &a.bracket(&z, &y).unwrap());
        prop_assert_eq!(lhs, q_frac(0, 1));
    }

    #[test]
    fn ad_is_a_homomorphism((i, x, y, _z) in algebra_and_triple()) {
        let a = &algebras()[i];
        let adx = a.adjoint_rep(&x).unwrap();
        let ady = a.adjoint_rep(&y).unwrap();
        let ad_xy = a.adjoint_rep(&a.bracket(&x, &y).unwrap()).unwrap();
        prop_assert_eq!(ad_xy, adx.mul(&ady).sub(&ady.mul(&adx)));
    }

    #[test]
    fn halfplane_curvature_is_equivariant(
        dir in prop::array::uniform3(small_f64()).prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 0.01),
        coords in prop::array::uniform2(small_f64()),
    ) {
        let split = presets::halfplane_split();
        let k = presets::su2();
        let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        let chi0: Vec<f64> = dir.iter().map(|x| 2.0 * x / n).collect();
        let chi = validate_chi_on_split(&split, &k, DMatrix::from_column_slice(3, 1, &chi0)).unwrap();
        let space = intertwiner_space(&split, &k, &chi).unwrap();
        prop_assert_eq!(space.dim(), 2);
        let f = curvature_mu(&split, &k, &space.point(&coords)).unwrap();
        let ad = split.ad_on_s()[0].to_f64();
        let xi = nalgebra::DVector::from_vec(vec![1.0, 0.0]);
        let zeta = nalgebra::DVector::from_vec(vec![0.0, 1.0]);
        let lhs = f.eval(&(&ad * &xi), &zeta) + f.eval(&xi, &(&ad * &zeta));
        let rhs = k.bracket_f64(&chi0, f.get(0, 1).as_slice()).unwrap();
        for (l, r) in lhs.iter().zip(&rhs) {
            prop_assert!((l - r).abs() < 1e-9);
        }
    }

    #[test]
    fn type11_defect_is_conjugation_equivariant(
        mu in prop::collection::vec(small_f64(), 32),
        x in prop::collection::vec(small_f64(), 8),
    ) {
        // F_J is built from brackets in k and linear maps, so Ad_g commutes with it
        let cs = presets::product_complex_structure();
        let k = presets::su3();
        let mu = MuMap::new(DMatrix::from_column_slice(8, 4, &mu));
        let g = group_element(&k, &x).unwrap();
        let moved = MuMap::new(&g * &mu.matrix);
        let before = type11_defect(&cs, &k, &mu).unwrap();
        let after = type11_defect(&cs, &k, &moved).unwrap();
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 3), (2, 3)] {
            let expect = &g * before.tensor.get(p, q);
            let got = after.tensor.get(p, q);
            prop_assert!((expect - got).amax() < 1e-9);
        }
    }

    #[test]
    fn fingerprint_is_conjugation_invariant(
        chi in prop::collection::vec(small_f64(), 16),
        mu in prop::collection::vec(small_f64(), 32),
        x in prop::collection::vec(small_f64(), 8),
    ) {
        let k = presets::su3();
        let p = InvariantConnectionPoint::new_unchecked(
            LieHomChi::from_matrix_unchecked(DMatrix::from_column_slice(8, 2, &chi)),
            MuMap::new(DMatrix::from_column_slice(8, 4, &mu)),
        );
        let gp = conjugate(&k, &x, &p).unwrap();
        let fp = Fingerprinter::new(&k).unwrap();
        let d = fp.fingerprint(&p).distance(&fp.fingerprint(&gp));
        let scale = fp.fingerprint(&p).values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(d <= 1e-9 * scale, "fingerprint moved by {d:e} (scale {scale:e})");
    }

    #[test]
    fn su2_canonical_form_is_idempotent(
        chi in prop::array::uniform3(small_f64()),
        mu in prop::collection::vec(small_f64(), 6),
    ) {
        let k = presets::su2();
        let p = InvariantConnectionPoint::new_unchecked(
            LieHomChi::from_matrix_unchecked(DMatrix::from_column_slice(3, 1, &chi)),
            MuMap::new(DMatrix::from_column_slice(3, 2, &mu)),
        );
        let once = canonicalize(&k, &p).unwrap();
        let twice = canonicalize(&k, &once.point).unwrap();
        prop_assert!((once.point.stacked() - twice.point.stacked()).amax() < 1e-9);
    }

    #[test]
    fn floats_round_trip_through_canonical_json(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let text = io::to_canonical_json(&io::float_vec_value(&[x]));
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back[0], if x == 0.0 { 0.0 } else { x });
    }

    #[test]
    fn rationals_round_trip_as_strings(r in rational()) {
        let text = io::rational_value(&r);
        prop_assert_eq!(io::parse_rational(text.as_str().unwrap()).unwrap(), r);
    }
}

#[test]
fn preset_algebras_round_trip_through_json() {
    for a in algebras()
        .iter()
        .chain([presets::u1(), presets::abelian(3)].iter())
    {
        let text = serde_json::to_string(&AlgebraJson::from_algebra(a)).unwrap();
        let back = io::parse_algebra(&text).unwrap();
        assert!(back.same_table(a), "{}", a.name());
        assert_eq!(back.name(), a.name());
        assert_eq!(
            serde_json::to_string(&AlgebraJson::from_algebra(&back)).unwrap(),
            text
        );
    }
}

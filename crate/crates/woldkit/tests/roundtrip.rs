use proptest::prelude::*;

use woldkit::spec::{parse_spec, LatticeSpec, OpSpec, PhiSpec, Scalar, WeightSpec};

fn scalar() -> impl Strategy<Value = Scalar> {
    prop_oneof![
        (0.5f64..2.0).prop_map(Scalar::Real),
        (0.5f64..2.0, -1.0f64..1.0).prop_map(|(re, im)| Scalar::Complex([re, im])),
    ]
}

fn weight() -> impl Strategy<Value = WeightSpec> {
    prop_oneof![
        scalar().prop_map(|value| WeightSpec::Constant { value }),
        Just(WeightSpec::Bergman),
        Just(WeightSpec::Dirichlet),
        (prop::collection::vec(scalar(), 1..6), scalar()).prop_map(|(values, default)| WeightSpec::Table { values, default }),
    ]
}

fn phi() -> impl Strategy<Value = PhiSpec> {
    prop_oneof![(-1.0f64..1.0).prop_map(|alpha| PhiSpec::Exp { alpha }), (0.5f64..3.0).prop_map(|beta| PhiSpec::Power { beta })]
}

/// Operators on the natural lattice, so that every combinator applies.
fn natural_op() -> impl Strategy<Value = OpSpec> {
    let leaf = prop_oneof![
        Just(OpSpec::UnilateralShift),
        Just(OpSpec::BergmanShift),
        Just(OpSpec::DirichletShift),
        Just(OpSpec::Identity { lattice: LatticeSpec::N }),
        (weight(), 1usize..4).prop_map(|(weights, step)| OpSpec::WeightedShift { weights, step, lattice: LatticeSpec::N }),
        (phi(), 1u32..4, prop::sample::select(vec![0.25, 0.5, 1.0])).prop_map(|(phi, k, h)| OpSpec::WeightedTranslation {
            phi,
            t: k as f64 * h,
            h
        }),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (scalar(), inner.clone()).prop_map(|(factor, of)| OpSpec::Scale { factor, of: Box::new(of) }),
            inner.clone().prop_map(|of| OpSpec::Adjoint { of: Box::new(of) }),
            (inner.clone(), inner).prop_map(|(l, r)| OpSpec::Compose { left: Box::new(l), right: Box::new(r) }),
        ]
    })
}

fn any_op() -> impl Strategy<Value = OpSpec> {
    prop_oneof![
        natural_op(),
        (natural_op(), natural_op()).prop_map(|(l, r)| OpSpec::DirectSum { left: Box::new(l), right: Box::new(r) }),
        (natural_op(), natural_op()).prop_map(|(a, b)| OpSpec::Pair { first: Box::new(a), second: Box::new(b) }),
        (weight(), weight()).prop_map(|(w1, w2)| OpSpec::TensorPair {
            w1,
            w2,
            lattice1: LatticeSpec::N,
            lattice2: LatticeSpec::N
        }),
        (1.0f64..3.0, 1.0f64..3.0, -0.4f64..0.4).prop_map(|(a, d, b)| OpSpec::QuasinormalBlock {
            l: vec![vec![Scalar::Real(a), Scalar::Complex([0.0, b])], vec![Scalar::Complex([0.0, -b]), Scalar::Real(d)]]
        }),
    ]
}

proptest! {
    #[test]
    fn serialized_specs_parse_back(spec in any_op()) {
        let text = serde_json::to_string(&spec).unwrap();
        prop_assert_eq!(parse_spec(&text).unwrap(), spec.clone());
        let pretty = serde_json::to_string_pretty(&spec).unwrap();
        prop_assert_eq!(parse_spec(&pretty).unwrap(), spec);
    }
}

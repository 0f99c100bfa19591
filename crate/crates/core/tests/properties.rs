mod common;

use std::sync::Arc;

use num_bigint::BigInt;
use proptest::prelude::*;
use tensor1::autodiff::{eval_dual, eval_seeded, parse_scalar};
use tensor1::om::{parse_compact, parse_xml, serialize_xml, to_compact, OMNode};
use tensor1::semantics::{evaluate, Environment, Value};
use tensor1::symbols::{ARITH1, LINALG1, NUMS1, TENSOR1, TENSOR1_SYMBOLS};
use tensor1::tensor::{
    builtin_chart, cartesian_chart, make_frame, norm_sq, transform, FrameTag, TensorValue, Variance,
};

fn variable_name() -> impl Strategy<Value = String> {
    "[a-zA-Z][a-zA-Z0-9_]{0,6}".prop_filter("not a tensor1 name", |s| {
        !TENSOR1_SYMBOLS.iter().any(|t| t.name == s) && s != "unspecified" && s != "sum"
    })
}

fn head_symbol() -> impl Strategy<Value = OMNode> {
    let mut heads: Vec<(&str, &str)> = TENSOR1_SYMBOLS.iter().map(|s| (TENSOR1, s.name)).collect();
    heads.extend([
        (ARITH1, "plus"),
        (ARITH1, "times"),
        (ARITH1, "minus"),
        (ARITH1, "divide"),
        (ARITH1, "power"),
        (ARITH1, "unary_minus"),
        (ARITH1, "abs"),
        (LINALG1, "vector_selector"),
        ("transc1", "sin"),
    ]);
    prop::sample::select(heads).prop_map(|(cd, name)| OMNode::symbol(cd, name))
}

fn leaf() -> impl Strategy<Value = OMNode> {
    prop_oneof![
        any::<i64>().prop_map(OMNode::integer),
        "[1-9][0-9]{18,30}".prop_map(|s| OMNode::integer(s.parse::<BigInt>().unwrap())),
        (-1e12f64..1e12).prop_map(OMNode::float),
        prop::num::f64::NORMAL.prop_map(OMNode::float),
        variable_name().prop_map(|v| OMNode::variable(&v)),
        head_symbol(),
        Just(OMNode::symbol(TENSOR1, "unspecified")),
        Just(OMNode::symbol(NUMS1, "pi")),
    ]
}

fn ast() -> impl Strategy<Value = OMNode> {
    leaf().prop_recursive(4, 40, 4, |inner| {
        prop_oneof![
            (head_symbol(), prop::collection::vec(inner.clone(), 1..4))
                .prop_map(|(h, args)| OMNode::apply(h, args)),
            (variable_name(), inner.clone(), inner.clone(), inner)
                .prop_map(|(v, lo, hi, body)| OMNode::sum(&v, lo, hi, body)),
        ]
    })
}

proptest! {
    #[test]
    fn xml_round_trip(node in ast()) {
        let text = serialize_xml(&node);
        let back = parse_xml(&text).unwrap();
        prop_assert_eq!(&back, &node);
        prop_assert_eq!(serialize_xml(&back), text);
    }

    #[test]
    fn compact_round_trip(node in ast()) {
        let text = to_compact(&node);
        let back = parse_compact(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(&back, &node);
    }

    #[test]
    fn spans_nest(node in ast()) {
        fn walk(n: &OMNode) -> Result<(), TestCaseError> {
            for c in n.children() {
                prop_assert!(n.span.contains(&c.span), "{:?} outside {:?}", c.span, n.span);
                walk(c)?;
            }
            Ok(())
        }
        walk(&parse_xml(&serialize_xml(&node)).unwrap())?;
    }

    #[test]
    fn transform_round_trip(
        r in 0.2f64..5.0,
        theta in -3.0f64..3.0,
        comps in prop::collection::vec(-10.0f64..10.0, 4),
        up in any::<(bool, bool)>(),
    ) {
        let polar = Arc::new(make_frame(&Arc::new(builtin_chart("polar").unwrap()), &[r, theta]).unwrap());
        let cart = Arc::new(
            make_frame(&Arc::new(cartesian_chart(2).unwrap()), &[r * theta.cos(), r * theta.sin()]).unwrap(),
        );
        let var = |b: bool| if b { Variance::Contra } else { Variance::Covar };
        let t = TensorValue::new(2, vec![var(up.0), var(up.1)], comps, FrameTag::Frame(cart.clone())).unwrap();
        let back = transform(&transform(&t, &polar).unwrap(), &cart).unwrap();
        prop_assert!(common::max_abs_diff(back.components(), t.components()) < 1e-9);
    }

    #[test]
    fn norm_is_frame_independent(
        q in (0.2f64..5.0, 0.2f64..2.9, -3.0f64..3.0),
        v in prop::collection::vec(-10.0f64..10.0, 3),
    ) {
        let chart = Arc::new(builtin_chart("spherical").unwrap());
        let s = Arc::new(make_frame(&chart, &[q.0, q.1, q.2]).unwrap());
        let x = chart.cartesian_point(&[q.0, q.1, q.2]).unwrap();
        let c = Arc::new(make_frame(&Arc::new(cartesian_chart(3).unwrap()), &x).unwrap());
        let t = TensorValue::vector(Variance::Contra, v.clone(), FrameTag::Frame(s.clone())).unwrap();
        let in_c = transform(&t, &c).unwrap();
        let expected: f64 = in_c.components().iter().map(|x| x * x).sum();
        prop_assert!((norm_sq(&t, &s).unwrap() - expected).abs() <= 1e-9 * expected.max(1.0));
    }

    #[test]
    fn seeded_matches_full_gradient(seed in any::<u64>(), x in prop::collection::vec(-2.0f64..2.0, 3)) {
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let e = common::random_expr(&mut rng, 3, 4);
        let full = eval_dual(&e, &x).unwrap();
        for i in 0..3 {
            let one = eval_seeded(&e, &x, i).unwrap();
            prop_assert_eq!(one.value.to_bits(), full.value.to_bits());
            prop_assert!((one.partials[0] - full.partials[i]).abs() <= 1e-12 * full.partials[i].abs().max(1.0));
        }
    }
}

#[test]
fn evaluation_is_deterministic() {
    let env = Environment::load(
        &common::workspace_root().join("corpus/env.json"),
        Default::default(),
    )
    .unwrap();
    let dir = common::workspace_root().join("corpus/valid");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "om") {
            let node = parse_xml(&std::fs::read_to_string(&path).unwrap()).unwrap();
            let a = evaluate(&node, &env).unwrap();
            let b = evaluate(&node, &env).unwrap();
            assert_eq!(a.to_json(), b.to_json(), "{}", path.display());
        }
    }
}

#[test]
fn shipped_chart_files_match_builtins() {
    use rand::SeedableRng;
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for name in common::BUILTIN_CHARTS {
        let path = common::workspace_root().join(format!("data/charts/{name}.json"));
        let file = Arc::new(tensor1::tensor::Chart::load(&path).unwrap());
        let builtin = Arc::new(builtin_chart(name).unwrap());
        assert_eq!(file.dim(), builtin.dim());
        for _ in 0..20 {
            let p = common::random_chart_point(&mut rng, name);
            let a = make_frame(&file, &p).unwrap();
            let b = make_frame(&builtin, &p).unwrap();
            assert!((a.basis() - b.basis()).amax() < 1e-12, "{name} at {p:?}");
            let x = file.cartesian_point(&p).unwrap();
            let back = file.chart_point(&x).unwrap().unwrap();
            // angles may come back shifted by a turn
            let jac = common::fd_jacobian(file.to_cartesian(), &back);
            assert!((jac - a.basis()).amax() < 1e-6, "{name} at {p:?}");
        }
    }
}

#[test]
fn chart_jacobian_matches_finite_differences() {
    use rand::SeedableRng;
    let mut rng = rand::rngs::StdRng::seed_from_u64(12);
    for name in common::BUILTIN_CHARTS {
        let chart = Arc::new(builtin_chart(name).unwrap());
        for _ in 0..20 {
            let p = common::random_chart_point(&mut rng, name);
            let f = make_frame(&chart, &p).unwrap();
            let fd = common::fd_jacobian(chart.to_cartesian(), &p);
            assert!((fd - f.basis()).amax() < 1e-7, "{name} at {p:?}");
        }
    }
}

#[test]
fn polar_metric_values() {
    // r = 2: g = diag(1, r^2)
    let chart = Arc::new(builtin_chart("polar").unwrap());
    let f = make_frame(&chart, &[2.0, 0.7]).unwrap();
    let g = f.metric();
    assert!((g[(0, 0)] - 1.0).abs() < 1e-12);
    assert!((g[(1, 1)] - 4.0).abs() < 1e-12);
    assert!(g[(0, 1)].abs() < 1e-12);
}

#[test]
fn infix_chart_expressions_differentiate() {
    let names = vec!["r".to_owned(), "theta".to_owned()];
    let e = parse_scalar("r^2 * sin(theta)", &names).unwrap();
    let p = [1.5, 0.3];
    let d = eval_dual(&e, &p).unwrap();
    let fd = common::fd_gradient(&e, &p);
    for (ad, fd) in d.partials.iter().zip(fd) {
        assert!((ad - fd).abs() < 1e-8);
    }
}

#[test]
fn selector_reads_through_frames() {
    let env = Environment::load(
        &common::workspace_root().join("data/envs/frames.json"),
        Default::default(),
    )
    .unwrap();
    // w = (1, 0) in C2 read in P (polar at r = 2, theta = 0) is (1, 0)
    let node = parse_compact("tensor_selector(w, tuple(contra_index(1)), P)").unwrap();
    match evaluate(&node, &env).unwrap() {
        Value::Scalar(x) => assert!((x - 1.0).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
}

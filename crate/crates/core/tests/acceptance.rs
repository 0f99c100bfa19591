//! Acceptance suite. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

mod common;

use std::fs;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, Matrix3};
use quick_xml::events::Event;
use quick_xml::Reader;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::*;
use tensor1::autodiff::{eval_dual, eval_scalar, ScalarExpr};
use tensor1::cd::write_tensor1_cd;
use tensor1::om::{parse_compact, parse_xml, serialize_xml};
use tensor1::semantics::{check_curl_cartesian, evaluate, validate, Environment, Value};
use tensor1::tensor::{
    builtin_chart, cartesian_chart, contract, cross_product, kronecker, levi_civita, make_frame,
    norm_sq, tensor_product, transform, FrameTag, Limits, TensorValue, Variance,
};

const SEED: u64 = 0x7e45_0a01;

const DUALITY_TOL: f64 = 1e-9;
const DUALITY_BUDGET: Duration = Duration::from_secs(5);
const INVARIANCE_TOL: f64 = 1e-8;
const KRONECKER_TOL: f64 = 1e-9;
const MATVEC_TOL: f64 = 1e-12;
const CROSS_TOL: f64 = 1e-12;
const AD_REL_TOL: f64 = 1e-5;
const AD_ABS_TOL: f64 = 1e-8;

type Outcome = Result<String, String>;
type Criterion = Box<dyn FnOnce(&mut StdRng) -> Outcome>;

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn identity_residual(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    (m - DMatrix::<f64>::identity(n, n)).amax()
}

fn duality_and_metric(rng: &mut StdRng) -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for name in BUILTIN_CHARTS {
        let chart = Arc::new(builtin_chart(name).unwrap());
        for _ in 0..100 {
            let p = random_chart_point(rng, name);
            let f = make_frame(&chart, &p).map_err(|e| format!("{name} at {p:?}: {e}"))?;
            let r1 = identity_residual(&(f.dual_basis() * f.basis()));
            let r2 = identity_residual(&(f.metric() * f.inverse_metric()));
            worst = worst.max(r1).max(r2);
            check(r1 <= DUALITY_TOL && r2 <= DUALITY_TOL, || {
                format!("{name} at {p:?}: residuals {r1:e}, {r2:e}")
            })?;
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < DUALITY_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "400 frames, max residual {worst:.1e} <= {DUALITY_TOL:e}, {} ms",
        elapsed.as_millis()
    ))
}

fn scalar_invariance(rng: &mut StdRng) -> Outcome {
    let mut worst: f64 = 0.0;
    for (name, n) in [("polar", 2), ("spherical", 3)] {
        let chart = Arc::new(builtin_chart(name).unwrap());
        let cart = Arc::new(cartesian_chart(n).unwrap());
        for _ in 0..100 {
            let q = random_chart_point(rng, name);
            let curvilinear = Arc::new(make_frame(&chart, &q).unwrap());
            let x = chart.cartesian_point(&q).unwrap();
            let c = Arc::new(make_frame(&cart, &x).unwrap());
            let comps: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let v =
                TensorValue::vector(Variance::Contra, comps, FrameTag::Frame(c.clone())).unwrap();
            let direct = norm_sq(&v, &c).unwrap();
            let moved = transform(&v, &curvilinear).map_err(|e| e.to_string())?;
            let after = norm_sq(&moved, &curvilinear).unwrap();
            let d = (direct - after).abs();
            worst = worst.max(d);
            check(d <= INVARIANCE_TOL, || {
                format!("{name} at {q:?}: {direct} vs {after}")
            })?;
        }
    }
    Ok(format!(
        "200 pairs, max |Δ|v|²| {worst:.1e} <= {INVARIANCE_TOL:e}"
    ))
}

fn kronecker_invariance(rng: &mut StdRng) -> Outcome {
    let mut frames = 0;
    let mut worst: f64 = 0.0;
    for name in BUILTIN_CHARTS {
        let chart = Arc::new(builtin_chart(name).unwrap());
        let n = chart.dim();
        let cart = Arc::new(cartesian_chart(n).unwrap());
        for _ in 0..10 {
            let q = random_chart_point(rng, name);
            let f = Arc::new(make_frame(&chart, &q).unwrap());
            let c = Arc::new(make_frame(&cart, &chart.cartesian_point(&q).unwrap()).unwrap());
            let delta = kronecker(n).unwrap();
            let there = transform(&delta.in_frame(FrameTag::Frame(c.clone())).unwrap(), &f)
                .map_err(|e| e.to_string())?;
            let back = transform(&delta.in_frame(FrameTag::Frame(f.clone())).unwrap(), &c)
                .map_err(|e| e.to_string())?;
            for t in [&there, &back] {
                let d = max_abs_diff(t.components(), delta.components());
                worst = worst.max(d);
                check(d <= KRONECKER_TOL, || {
                    format!("{name} at {q:?}: deviation {d:e}")
                })?;
            }
            frames += 1;
        }
    }
    Ok(format!(
        "{frames} frames over n = 2, 3, max deviation {worst:.1e} <= {KRONECKER_TOL:e}"
    ))
}

fn selector_oracle() -> Outcome {
    let mut reads = 0;
    for dim in 2usize..=3 {
        for order in 1usize..=3 {
            let count = dim.pow(order as u32);
            // components encode their own serial position
            let comps: Vec<f64> = (0..count).map(|k| 1000.0 + k as f64).collect();
            let mut env = Environment::new();
            let sig = vec![Variance::Covar; order];
            env.add_tensor(
                "T",
                TensorValue::new(dim, sig, comps, FrameTag::Unspecified).unwrap(),
            )
            .unwrap();
            for (serial, idx) in odometer(dim, order).into_iter().enumerate() {
                let items: Vec<String> = idx.iter().map(|i| format!("covar_index({i})")).collect();
                let src = format!(
                    "tensor_selector(T, tuple({}), unspecified)",
                    items.join(", ")
                );
                let node = parse_compact(&src).unwrap();
                check(validate(&node, &env).is_empty(), || {
                    format!("{src} does not validate")
                })?;
                let got = evaluate(&node, &env).map_err(|e| e.to_string())?;
                let want = Value::Scalar(1000.0 + serial as f64);
                check(got == want, || format!("{src}: {got:?}, oracle {want:?}"))?;
                reads += 1;
            }
        }
    }
    Ok(format!("{reads} index tuples, exact agreement"))
}

fn matrix_vector(rng: &mut StdRng) -> Outcome {
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(2..=4);
        let m: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let mt = TensorValue::new(
            n,
            vec![Variance::Contra, Variance::Covar],
            m.clone(),
            FrameTag::Unspecified,
        )
        .unwrap();
        let vt = TensorValue::vector(Variance::Contra, v.clone(), FrameTag::Unspecified).unwrap();
        let u = contract(&tensor_product(&mt, &vt).unwrap(), 1, 2).unwrap();
        let d = max_abs_diff(u.components(), &dense_matvec(&m, &v));
        worst = worst.max(d);
        check(d <= MATVEC_TOL, || format!("n = {n}: deviation {d:e}"))?;
    }
    Ok(format!(
        "50 pairs, max deviation {worst:.1e} <= {MATVEC_TOL:e}"
    ))
}

fn levi_civita_and_curl(rng: &mut StdRng) -> Outcome {
    let mut entries = 0;
    for n in 1..=4 {
        let eps = levi_civita(n).unwrap();
        for idx in odometer(n, n) {
            let value = eps.component(&idx).unwrap();
            check(value == epsilon_oracle(&idx), || {
                format!("ε{idx:?} = {value}")
            })?;
            for a in 0..n {
                for b in a + 1..n {
                    let mut swapped = idx.clone();
                    swapped.swap(a, b);
                    let s = eps.component(&swapped).unwrap();
                    check(s == -value, || {
                        format!("ε{idx:?} = {value} but ε{swapped:?} = {s}")
                    })?;
                }
            }
            entries += 1;
        }
    }

    let c3 =
        Arc::new(make_frame(&Arc::new(cartesian_chart(3).unwrap()), &[0.5, -1.0, 2.0]).unwrap());
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let u: Vec<f64> = (0..3).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let mut want = [0.0; 3];
        for (i, w) in want.iter_mut().enumerate() {
            for (j, uj) in u.iter().enumerate() {
                for (k, vk) in v.iter().enumerate() {
                    *w += epsilon_oracle(&[i + 1, j + 1, k + 1]) * uj * vk;
                }
            }
        }
        let tag = || FrameTag::Frame(c3.clone());
        let got = cross_product(
            &TensorValue::vector(Variance::Contra, u.clone(), tag()).unwrap(),
            &TensorValue::vector(Variance::Contra, v.clone(), tag()).unwrap(),
            &c3,
        )
        .unwrap();
        let d = max_abs_diff(got.components(), &want);
        worst = worst.max(d);
        check(d <= CROSS_TOL, || format!("{u:?} x {v:?}: deviation {d:e}"))?;
    }

    // v = (-y, x, 0); partials from forward-mode differentiation of the field
    let field = [
        -ScalarExpr::var(1),
        ScalarExpr::var(0),
        ScalarExpr::constant(0.0),
    ];
    let at = [0.5, -1.0, 2.0];
    let mut partials = Matrix3::zeros();
    for (i, e) in field.iter().enumerate() {
        let d = eval_dual(e, &at).unwrap();
        for j in 0..3 {
            partials[(i, j)] = d.partials[j];
        }
    }
    let curl = check_curl_cartesian(&partials, &c3).unwrap();
    check(curl.components() == [0.0, 0.0, 2.0], || {
        format!("curl of (-y, x, 0) = {:?}", curl.components())
    })?;
    Ok(format!(
        "{entries} ε entries antisymmetric for n <= 4; 50 cross products, max deviation {worst:.1e} <= {CROSS_TOL:e}; curl (0, 0, 2) exact"
    ))
}

fn autodiff_vs_fd(rng: &mut StdRng) -> Outcome {
    let mut worst_rel: f64 = 0.0;
    let mut samples = 0;
    while samples < 200 {
        let vars = rng.gen_range(1..=3);
        let expr = common::random_expr(rng, vars, 4);
        let point: Vec<f64> = (0..vars).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let dual = eval_dual(&expr, &point).map_err(|e| format!("{expr}: {e}"))?;
        let value = eval_scalar(&expr, &point).unwrap();
        check(dual.value == value, || {
            format!("{expr}: value {} vs {value}", dual.value)
        })?;
        for (i, (ad, fd)) in dual
            .partials
            .iter()
            .zip(fd_gradient(&expr, &point))
            .enumerate()
        {
            let err = (ad - fd).abs();
            check(err <= AD_ABS_TOL + AD_REL_TOL * fd.abs(), || {
                format!("∂{i} of {expr} at {point:?}: autodiff {ad}, finite difference {fd}")
            })?;
            if fd.abs() > AD_ABS_TOL {
                worst_rel = worst_rel.max(err / fd.abs());
            }
        }
        samples += 1;
    }
    Ok(format!(
        "{samples} samples, max relative deviation {worst_rel:.1e} (tolerance {AD_REL_TOL:e} rel / {AD_ABS_TOL:e} abs)"
    ))
}

fn expected_code(text: &str) -> Option<&str> {
    let start = text.find("<!-- expect:")? + "<!-- expect:".len();
    let rest = &text[start..];
    Some(rest[..rest.find("-->")?].trim())
}

fn corpus_round_trip() -> Outcome {
    let root = workspace_root().join("corpus");
    let mut golden = 0;
    let mut paths: Vec<_> = fs::read_dir(root.join("valid"))
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    for path in paths
        .iter()
        .filter(|p| p.extension().is_some_and(|e| e == "om"))
    {
        let text = fs::read_to_string(path).unwrap();
        let first = parse_xml(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let again =
            parse_xml(&serialize_xml(&first)).map_err(|e| format!("{}: {e}", path.display()))?;
        check(first == again, || {
            format!("{} changes on round trip", path.display())
        })?;
        golden += 1;
    }
    check(golden > 0, || "no golden files".into())?;

    let env =
        Environment::load(&root.join("env.json"), Limits::default()).map_err(|e| e.to_string())?;
    let mut negative = 0;
    let mut einstein = false;
    let mut count = false;
    let mut paths: Vec<_> = fs::read_dir(root.join("invalid"))
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    for path in &paths {
        let text = fs::read_to_string(path).unwrap();
        let want =
            expected_code(&text).ok_or_else(|| format!("{} has no expectation", path.display()))?;
        let codes: Vec<&str> = match parse_xml(&text) {
            Err(e) => vec![e.kind.code()],
            Ok(node) => validate(&node, &env)
                .into_iter()
                .filter(|d| d.is_error())
                .map(|d| d.code)
                .collect(),
        };
        check(codes.contains(&want), || {
            format!("{}: expected {want}, got {codes:?}", path.display())
        })?;
        einstein |= want == "ImplicitEinstein";
        count |= want == "IndexCountMismatch";
        negative += 1;
    }
    check(negative >= 10 && einstein && count, || {
        format!("negative corpus too thin: {negative} files")
    })?;
    Ok(format!(
        "{golden}/{golden} golden files round-trip; {negative}/{negative} negative files give their code"
    ))
}

const PUBLISHED: [&str; 11] = [
    "tuple",
    "tuple_selector",
    "Cartesian",
    "unit_Cartesian",
    "Kronecker_tensor",
    "basis_selector",
    "tensor_selector",
    "contra_index",
    "covar_index",
    "metric_tensor",
    "Levi-Civita",
];

fn cd_emission() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = dir.path().join("a.ocd");
    let b = dir.path().join("b.ocd");
    write_tensor1_cd(&a).map_err(|e| e.to_string())?;
    write_tensor1_cd(&b).map_err(|e| e.to_string())?;
    let bytes = fs::read(&a).unwrap();
    check(bytes == fs::read(&b).unwrap(), || "runs differ".into())?;

    let text = String::from_utf8(bytes).map_err(|e| e.to_string())?;
    let mut reader = Reader::from_str(&text);
    let mut stack: Vec<String> = Vec::new();
    let mut names = Vec::new();
    let mut cd_name = String::new();
    loop {
        match reader
            .read_event()
            .map_err(|e| format!("not well formed: {e}"))?
        {
            Event::Start(e) => stack.push(e.name().as_ref().to_owned()),
            Event::End(e) => {
                let open = stack.pop();
                check(open.as_deref() == Some(e.name().as_ref()), || {
                    "mismatched tags".into()
                })?;
            }
            Event::Text(t) => {
                let s = t.xml10_content().into_owned();
                match stack.iter().map(String::as_str).collect::<Vec<_>>()[..] {
                    ["CD", "CDDefinition", "Name"] => names.push(s),
                    ["CD", "CDName"] => cd_name = s,
                    _ => {}
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    check(stack.is_empty(), || "unclosed elements".into())?;
    check(cd_name == "tensor1", || format!("CDName {cd_name}"))?;
    let mut sorted = names.clone();
    sorted.sort();
    let mut want: Vec<String> = PUBLISHED.iter().map(|s| s.to_string()).collect();
    want.sort();
    check(sorted == want, || format!("definitions {names:?}"))?;
    Ok(format!(
        "{} definitions, CDName tensor1, byte-identical across runs",
        names.len()
    ))
}

fn main() {
    let mut rng = StdRng::seed_from_u64(SEED);
    let criteria: Vec<(&str, Criterion)> = vec![
        ("duality and metric", Box::new(duality_and_metric)),
        ("scalar invariance", Box::new(scalar_invariance)),
        ("Kronecker invariance", Box::new(kronecker_invariance)),
        (
            "tensor_selector vs odometer",
            Box::new(|_: &mut StdRng| selector_oracle()),
        ),
        ("matrix-vector contraction", Box::new(matrix_vector)),
        (
            "Levi-Civita, cross product, curl",
            Box::new(levi_civita_and_curl),
        ),
        ("autodiff vs finite differences", Box::new(autodiff_vs_fd)),
        (
            "parser round trip and negative corpus",
            Box::new(|_: &mut StdRng| corpus_round_trip()),
        ),
        ("CD emission", Box::new(|_: &mut StdRng| cd_emission())),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.into_iter().enumerate() {
        match run(&mut rng) {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion(s) failed");
        std::process::exit(1);
    }
    println!("acceptance: all 9 criteria passed");
}

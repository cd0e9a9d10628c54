use std::collections::HashMap;

use ambientforge::expr::{parse_with, q, qi, ParseContext};
use ambientforge::frame::{build_semidirect, realize_nilpotent, SemidirectAlgebra};
use ambientforge::oracle::{
    compare, eval_tensor, function_atoms, halving_ratio, numeric_ricci, sample_points, seed_from_env,
    unit_ranges, MetricFn, OracleError, SamplePoint, SymbolicMetric, DEFAULT_H, DEFAULT_TOLERANCE,
};
use ambientforge::ratfunc::parse_ratfunc;
use ambientforge::tensor::{Geometry, Metric};
use ambientforge::{RatFunc, Scalar};
use nalgebra::DMatrix;

fn metric_in(ctx: &ParseContext, vars: &[&str], rows: &[&[&str]]) -> Metric<RatFunc> {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|s| parse_ratfunc(s, ctx).unwrap()).collect())
        .collect();
    Metric::new(vars.iter().map(|s| s.to_string()).collect(), rows).unwrap()
}

fn metric(vars: &[&str], rows: &[&[&str]]) -> Metric<RatFunc> {
    metric_in(&ParseContext::new().with_variables(vars.iter().copied()), vars, rows)
}

fn sig22() -> Metric<RatFunc> {
    metric(
        &["x1", "x2", "y1", "y2"],
        &[
            &["0", "0", "1", "0"],
            &["0", "0", "0", "1"],
            &["1", "0", "2*x1^2", "-4*x1*x2"],
            &["0", "1", "-4*x1*x2", "2*x2^2"],
        ],
    )
}

fn hyperbolic3() -> Metric<RatFunc> {
    metric(
        &["x", "y", "z"],
        &[&["1/z^2", "0", "0"], &["0", "1/z^2", "0"], &["0", "0", "1/z^2"]],
    )
}

fn ppwave4() -> Metric<RatFunc> {
    metric(
        &["v", "y1", "y2", "u"],
        &[
            &["0", "0", "0", "1"],
            &["0", "1", "0", "0"],
            &["0", "0", "1", "0"],
            &["1", "0", "0", "y1^3*u + y1*y2^2 - u^2"],
        ],
    )
}

fn warped3() -> Metric<RatFunc> {
    metric(
        &["x", "y", "z"],
        &[&["1", "0", "0"], &["0", "1 + x^2", "x*y/3"], &["0", "x*y/3", "2 + y^2"]],
    )
}

fn heisenberg() -> Metric<RatFunc> {
    let mut metric = vec![vec![qi(0); 5]; 5];
    metric[0][4] = qi(1);
    metric[4][0] = qi(1);
    for i in 1..4 {
        metric[i][i] = qi(1);
    }
    let alg = SemidirectAlgebra {
        p: 1,
        q: 4,
        kernel: vec![(0, 1, 2, qi(1))],
        acting: vec![],
        on_centre: vec![],
        on_complement: vec![(2, 1, 4, qi(1)), (3, 2, 4, qi(1))],
        metric,
    };
    let f = build_semidirect(&alg).unwrap();
    realize_nilpotent(&f, &["x1", "x2", "x3", "x4", "x5"]).unwrap().metric
}

fn check_metric(g: &Metric<RatFunc>, ranges: &[(f64, f64)]) {
    let gm = SymbolicMetric::new(g);
    let ric = Geometry::new(g.clone()).ricci().clone();
    let pts = sample_points(&gm, ranges, 10, seed_from_env(), DEFAULT_H).unwrap();
    let rep = compare(&ric, g.coords(), |p| numeric_ricci(&gm, p), &pts, DEFAULT_TOLERANCE).unwrap();
    assert_eq!(rep.per_point.len(), 10);
    assert!(rep.passed, "{:?}", rep);
}

#[test]
fn flat_ricci_vanishes_numerically() {
    let g = metric(&["x", "y", "z"], &[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]]);
    let gm = SymbolicMetric::new(&g);
    let r = numeric_ricci(&gm, &SamplePoint::new(vec![0.1, -0.4, 0.9])).unwrap();
    assert!(r.amax() < 1e-9);
}

#[test]
fn sig22_at_the_reference_point() {
    let g = sig22();
    let gm = SymbolicMetric::new(&g);
    let pt = SamplePoint::new(vec![0.3, -0.7, 0.1, 0.2]);
    let ric = Geometry::new(g.clone()).ricci().clone();
    let rep = compare(&ric, g.coords(), |p| numeric_ricci(&gm, p), &[pt], DEFAULT_TOLERANCE).unwrap();
    assert!(rep.passed, "{:?}", rep);
}

#[test]
fn hyperbolic_ricci_is_minus_two_g() {
    let g = hyperbolic3();
    let gm = SymbolicMetric::new(&g);
    let minus2g = g.tensor().scale(&qi(-2));
    let pts = sample_points(&gm, &[(-1.0, 1.0), (-1.0, 1.0), (0.5, 1.5)], 10, seed_from_env(), DEFAULT_H).unwrap();
    let rep = compare(&minus2g, g.coords(), |p| numeric_ricci(&gm, p), &pts, DEFAULT_TOLERANCE).unwrap();
    assert!(rep.passed, "{:?}", rep);
}

#[test]
fn seeded_points_on_every_test_metric() {
    check_metric(&sig22(), &unit_ranges(4));
    check_metric(&hyperbolic3(), &[(-1.0, 1.0), (-1.0, 1.0), (0.5, 1.5)]);
    check_metric(&ppwave4(), &unit_ranges(4));
    check_metric(&warped3(), &unit_ranges(3));
    check_metric(&heisenberg(), &unit_ranges(5));
}

#[test]
fn halving_the_step_quarters_the_error() {
    for (g, ranges) in [
        (sig22(), unit_ranges(4)),
        (hyperbolic3(), vec![(-1.0, 1.0), (-1.0, 1.0), (0.5, 1.5)]),
        (warped3(), unit_ranges(3)),
        (heisenberg(), unit_ranges(5)),
    ] {
        let gm = SymbolicMetric::new(&g);
        let ric = Geometry::new(g.clone()).ricci().clone();
        let pts = sample_points(&gm, &ranges, 10, seed_from_env(), 1e-2).unwrap();
        let r = halving_ratio(&gm, &ric, g.coords(), &pts, 1e-2).unwrap();
        assert!((3.0..=5.0).contains(&r), "ratio {} for {:?}", r, g.coords());
    }
}

#[test]
fn identical_inputs_give_zero_discrepancy() {
    let g = sig22();
    let ric = Geometry::new(g.clone()).ricci().clone();
    let pts = sample_points(&SymbolicMetric::new(&g), &unit_ranges(4), 5, 7, DEFAULT_H).unwrap();
    let rep = compare(&ric, g.coords(), |p| eval_tensor(&ric, g.coords(), p), &pts, 0.0).unwrap();
    assert_eq!(rep.max_discrepancy, 0.0);
    assert!(rep.passed);
}

#[test]
fn perturbed_symbolic_tensor_is_reported() {
    let g = warped3();
    let gm = SymbolicMetric::new(&g);
    let mut ric = Geometry::new(g.clone()).ricci().clone();
    let bumped = ric.get(&[1, 1]).add(&RatFunc::from_q(q(1, 1000)));
    ric.set(&[1, 1], bumped);
    let pts = sample_points(&gm, &unit_ranges(3), 10, seed_from_env(), DEFAULT_H).unwrap();
    let rep = compare(&ric, g.coords(), |p| numeric_ricci(&gm, p), &pts, DEFAULT_TOLERANCE).unwrap();
    assert!(!rep.passed);
    assert!(rep.max_discrepancy > 1e-4);
}

#[test]
fn function_atoms_are_bound_through_a_concrete_choice() {
    let vars = ["v", "y1", "y2", "u"];
    let ctx = ParseContext::new()
        .with_variables(vars.iter().copied())
        .with_function("f", &["y1", "y2", "u"]);
    let g = metric_in(
        &ctx,
        &vars,
        &[&["0", "0", "0", "1"], &["0", "1", "0", "0"], &["0", "0", "1", "0"], &["1", "0", "0", "f(y1, y2, u)"]],
    );
    let ric = Geometry::new(g.clone()).ricci().clone();
    let atoms = function_atoms(&ric);
    assert!(!atoms.is_empty());
    let vctx = ParseContext::new().with_variables(vars.iter().copied());
    let concrete = parse_with("y1^3*y2 + u*y2^2", &vctx).unwrap();
    let bound = g.tensor().map(|c| c.replace_functions(&|_| Some(concrete.clone())));
    let rows = (0..4).map(|i| (0..4).map(|j| bound.get(&[i, j]).clone()).collect()).collect();
    let gb = Metric::new(g.coords().to_vec(), rows).unwrap();
    let gm = SymbolicMetric::new(&gb);
    let mut choice = HashMap::new();
    choice.insert("f".to_string(), concrete);
    let mut pts = sample_points(&gm, &unit_ranges(4), 10, seed_from_env(), DEFAULT_H).unwrap();
    for p in &mut pts {
        p.bind_functions(&atoms, &choice, g.coords()).unwrap();
    }
    let rep = compare(&ric, g.coords(), |p| numeric_ricci(&gm, p), &pts, DEFAULT_TOLERANCE).unwrap();
    assert!(rep.passed, "{:?}", rep);
    // An unbound atom is an evaluation error.
    let bare = SamplePoint::new(vec![0.1, 0.2, 0.3, 0.4]);
    assert!(matches!(eval_tensor(&ric, g.coords(), &bare), Err(OracleError::Eval(_))));
}

#[test]
fn degenerate_points_are_rejected() {
    let g = hyperbolic3();
    let gm = SymbolicMetric::new(&g);
    // 1/z^2 blows up at z = 0 and the evaluation is not finite.
    assert!(numeric_ricci(&gm, &SamplePoint::new(vec![0.0, 0.0, 0.0])).is_err());
    let deg = (2usize, |_: &[f64]| DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]));
    assert_eq!(deg.dim(), 2);
    assert!(matches!(
        numeric_ricci(&deg, &SamplePoint::new(vec![0.0, 0.0])),
        Err(OracleError::Singular { .. })
    ));
    assert!(matches!(
        numeric_ricci(&gm, &SamplePoint::new(vec![0.0, 0.0])),
        Err(OracleError::Dimension { .. })
    ));
    assert!(matches!(sample_points(&deg, &unit_ranges(2), 3, 1, DEFAULT_H), Err(OracleError::Sampling { .. })));
}

#[test]
fn sampling_is_reproducible() {
    let g = sig22();
    let gm = SymbolicMetric::new(&g);
    let a = sample_points(&gm, &unit_ranges(4), 4, 99, DEFAULT_H).unwrap();
    let b = sample_points(&gm, &unit_ranges(4), 4, 99, DEFAULT_H).unwrap();
    assert_eq!(
        a.iter().map(|p| p.coords.clone()).collect::<Vec<_>>(),
        b.iter().map(|p| p.coords.clone()).collect::<Vec<_>>()
    );
}

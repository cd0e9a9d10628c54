//! The commands behind the command-line tool. Each command turns a metric
//! file and flags into a [`Report`]; nothing here prints or exits.

use std::collections::BTreeMap;

use ambientforge::ambient::{
    ambient_ricci_direct, coefficient, einstein_ambient, expand_generic, left_invariant_ambient,
    nrw_box_c, obstruction, obstruction_norm, ppwave_ambient, ppwave_log_c, ppwave_q,
    tensor_trunc, theorem_theo2_audit, AmbientError, AmbientMetric, ExpandOptions,
    LeftInvariantOptions, ObstructionTensor, PpWaveOptions, Series,
};
use ambientforge::expr::{qi, Q, RHO};
use ambientforge::frame::{
    curvature_null_contraction, frame_curvature, frame_from_walker_coordinates, frame_ricci,
    nrw_conditions, walker_check_coordinates, walker_frame_check, FrameData,
};
use ambientforge::ratfunc::parse_ratfunc;
use ambientforge::series::EXACT;
use ambientforge::tensor::{curvature_invariants, Geometry, Metric, Slot, TensorField};
use ambientforge::{RatFunc, Scalar};

use crate::fixtures;
use crate::metricfile::{Body, MetricFile};
use crate::report::{scalar_block, tensor_block, ErrorKind, Inputs, Listing, Report, ValueBlock};

/// Scale in which the obstruction tensor is reported.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Normalization {
    /// The normalization of the worked signature (2,2) example.
    #[default]
    Paper,
    /// `(ρ^{1−n/2} Ric(g̃)|_{TM⊗TM})|_{ρ=0}`.
    Canonical,
}

impl Normalization {
    /// Parse the value of `--normalization`, either `obstruction=<name>` or
    /// a bare name.
    pub fn parse(s: &str) -> Result<Self, String> {
        let v = s.strip_prefix("obstruction=").unwrap_or(s);
        match v {
            "paper" => Ok(Normalization::Paper),
            "canonical" => Ok(Normalization::Canonical),
            _ => Err(format!(
                "unknown normalization `{}`: expected obstruction=paper or obstruction=canonical",
                s
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Normalization::Paper => "paper",
            Normalization::Canonical => "canonical",
        }
    }

    pub fn factor(self) -> Q {
        match self {
            Normalization::Paper => obstruction_norm(),
            Normalization::Canonical => qi(1),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub order: Option<usize>,
    pub rank: Option<usize>,
    pub normalization: Normalization,
    /// Path and contents of a trace-free choice file for `expand`.
    pub even_choice: Option<(String, String)>,
}

impl Options {
    fn flags(&self) -> BTreeMap<String, String> {
        let mut f = BTreeMap::new();
        if let Some(m) = self.order {
            f.insert("order".into(), m.to_string());
        }
        if let Some(p) = self.rank {
            f.insert("rank".into(), p.to_string());
        }
        f.insert("normalization".into(), format!("obstruction={}", self.normalization.name()));
        if let Some((path, _)) = &self.even_choice {
            f.insert("even-choice".into(), path.clone());
        }
        f
    }
}

/// A parsed input with everything the commands share.
struct Loaded {
    file: MetricFile,
    g: Metric<RatFunc>,
}

impl Loaded {
    fn labels(&self) -> &[String] {
        self.g.coords()
    }
}

fn start(command: &str, path: Option<&str>, text: &str, opts: &Options) -> (Report, Option<Loaded>) {
    let mut bytes = text.as_bytes().to_vec();
    if let Some((_, c)) = &opts.even_choice {
        bytes.push(0);
        bytes.extend_from_slice(c.as_bytes());
    }
    let mut rep = Report::new(command, Inputs::new(path.map(str::to_string), &bytes, opts.flags()));
    let file = match MetricFile::parse(text) {
        Ok(f) => f,
        Err(e) => {
            rep.fail(ErrorKind::Input, e.to_string(), vec![]);
            return (rep, None);
        }
    };
    let g = match file.metric() {
        Ok(g) => g,
        Err(e) => {
            rep.fail(ErrorKind::Input, e, vec![]);
            return (rep, None);
        }
    };
    (rep, Some(Loaded { file, g }))
}

fn obstruction_block(ob: &TensorField<RatFunc>, labels: &[String], norm: Normalization) -> ValueBlock {
    tensor_block(
        &format!("obstruction ({})", norm.name()),
        &ob.scale(&norm.factor()),
        labels,
        Listing::Symmetric,
    )
}

/// Record an error from the ambient module, attaching the obstruction tensor
/// when an even-dimensional expansion stops.
fn ambient_failure(rep: &mut Report, e: AmbientError, g: &Metric<RatFunc>, norm: Normalization) {
    let kind = match &e {
        AmbientError::Invalid(_) | AmbientError::Truncation { .. } => ErrorKind::Input,
        AmbientError::Precondition(_) | AmbientError::Frame(_) => ErrorKind::Precondition,
        AmbientError::Obstructed { .. } => ErrorKind::Obstructed,
        AmbientError::OrderBarrier { .. } => ErrorKind::Barrier,
        AmbientError::Tensor(_) => ErrorKind::Internal,
    };
    let mut values = Vec::new();
    let mut kind = kind;
    if matches!(e, AmbientError::Obstructed { .. } | AmbientError::OrderBarrier { .. }) {
        if let Ok(ob) = obstruction(g) {
            if !ob.is_zero() {
                kind = ErrorKind::Obstructed;
            }
            values.push(obstruction_block(&ob.canonical, g.coords(), norm));
        }
    }
    rep.fail(kind, e.to_string(), values);
}

fn add_obstruction(rep: &mut Report, ob: &ObstructionTensor, labels: &[String], norm: Normalization) {
    rep.value(obstruction_block(&ob.canonical, labels, norm));
    rep.add_checks("obstruction", &ob.checks);
}

/// `curvature`: Christoffel symbols, curvature tensors and the identity
/// checks that relate them.
pub fn curvature(path: Option<&str>, text: &str, opts: &Options) -> Report {
    let (mut rep, loaded) = start("curvature", path, text, opts);
    let Some(l) = loaded else { return rep };
    let labels = l.labels().to_vec();
    let geo = Geometry::new(l.g.clone());
    let n = geo.dim();
    rep.value(tensor_block("Christoffel", geo.christoffel(), &labels, Listing::LowerSymmetric));
    rep.value(tensor_block("Riemann", geo.riemann(), &labels, Listing::Riemann));
    rep.value(tensor_block("Ricci", geo.ricci(), &labels, Listing::Symmetric));
    rep.value(scalar_block("scalar curvature", geo.scalar().to_string()));
    if n >= 3 {
        let results = (geo.schouten(), geo.cotton(), geo.weyl(), geo.bach());
        match results {
            (Ok(p), Ok(c), Ok(w), Ok(b)) => {
                rep.value(tensor_block("Schouten", &p, &labels, Listing::Symmetric));
                rep.value(tensor_block("Cotton", &c, &labels, Listing::LastAntisymmetric));
                rep.value(tensor_block("Weyl", &w, &labels, Listing::Riemann));
                rep.value(tensor_block("Bach", &b, &labels, Listing::Symmetric));
            }
            _ => {
                rep.fail(ErrorKind::Internal, "curvature derived tensors failed", vec![]);
                return rep;
            }
        }
    }
    rep.add_checks("", &curvature_invariants(&geo));
    if let Some(f) = l.file.frame() {
        match frame_ricci(f) {
            Ok(r) => {
                let fl: Vec<String> = (0..f.dim()).map(|i| f.label(i)).collect();
                rep.value(tensor_block("frame Ricci", &r, &fl, Listing::Symmetric));
            }
            Err(e) => rep.fail(ErrorKind::Precondition, e.to_string(), vec![]),
        }
    }
    rep
}

fn walker_checks(rep: &mut Report, l: &Loaded, rank: Option<usize>) {
    match &l.file.body {
        Body::Frame(f) => {
            if let Some(p) = rank {
                if p != f.rank() {
                    rep.fail(
                        ErrorKind::Input,
                        format!("--rank {} disagrees with the frame rank p = {}", p, f.rank()),
                        vec![],
                    );
                    return;
                }
            }
            frame_walker_checks(rep, f);
        }
        Body::Coordinates(g) => {
            let Some(p) = rank else {
                rep.fail(
                    ErrorKind::Input,
                    "walker-check needs the null rank: pass --rank or set `rank = p` in [coordinates]",
                    vec![],
                );
                return;
            };
            let c = match walker_check_coordinates(g, p) {
                Ok(c) => c,
                Err(e) => {
                    rep.fail(ErrorKind::Input, e.to_string(), vec![]);
                    return;
                }
            };
            rep.add_checks("walker", &c);
            if !c.all_pass() {
                return;
            }
            match frame_from_walker_coordinates(g, p) {
                Ok(f) => frame_walker_checks(rep, &f),
                Err(e) => rep.property("adapted frame", false, Some(e.to_string())),
            }
        }
    }
}

fn frame_walker_checks(rep: &mut Report, f: &FrameData) {
    if matches!(rep.error, Some(_)) {
        return;
    }
    rep.add_checks("walker frame", &walker_frame_check(f));
    match nrw_conditions(f) {
        Ok(c) => rep.add_checks("nrw", &c),
        Err(e) => rep.property("nrw conditions", false, Some(e.to_string())),
    }
    match curvature_null_contraction(f) {
        Ok(c) => rep.add_checks("null contraction", &c),
        Err(e) => rep.property("null contraction", false, Some(e.to_string())),
    }
}

/// `walker-check`: Walker structure, null Ricci Walker conditions and the
/// null contraction condition on the curvature.
pub fn walker_check(path: Option<&str>, text: &str, opts: &Options) -> Report {
    let (mut rep, loaded) = start("walker-check", path, text, opts);
    let Some(l) = loaded else { return rep };
    let rank = opts.rank.or(l.file.rank);
    walker_checks(&mut rep, &l, rank);
    rep
}

/// `expand`: the order-by-order solution, its residuals and, on null Ricci
/// Walker bases in Walker coordinates, the structural audit.
pub fn expand(path: Option<&str>, text: &str, opts: &Options) -> Report {
    let (mut rep, loaded) = start("expand", path, text, opts);
    let Some(l) = loaded else { return rep };
    let labels = l.labels().to_vec();
    let n = l.g.dim();
    let choice = match &opts.even_choice {
        None => None,
        Some((p, t)) => match l.file.parse_choice(t) {
            Ok(c) => Some(c),
            Err(e) => {
                rep.fail(ErrorKind::Input, format!("{}: {}", p, e), vec![]);
                return rep;
            }
        },
    };
    let eopts = ExpandOptions {
        order: opts.order,
        trace_free_choice: choice,
    };
    let e = match expand_generic(&l.g, &eopts) {
        Ok(e) => e,
        Err(err) => {
            ambient_failure(&mut rep, err, &l.g, opts.normalization);
            return rep;
        }
    };
    let m = e.order();
    for k in 1..=m {
        rep.value(tensor_block(&format!("g^({})", k), e.coefficient(k), &labels, Listing::Symmetric));
    }
    let ob = match &e.obstruction {
        Some(ob) => Some(ob.clone()),
        None if n % 2 == 0 && n >= 4 => match obstruction(&l.g) {
            Ok(ob) => Some(ob),
            Err(err) => {
                ambient_failure(&mut rep, err, &l.g, opts.normalization);
                return rep;
            }
        },
        None => None,
    };
    if let Some(ob) = &ob {
        add_obstruction(&mut rep, ob, &labels, opts.normalization);
    }
    if m >= 1 {
        match AmbientMetric::new(l.g.clone(), e.h()).and_then(|a| a.residuals(m)) {
            Ok(r) => rep.add_checks("residuals", &r.checks()),
            Err(err) => {
                ambient_failure(&mut rep, err, &l.g, opts.normalization);
                return rep;
            }
        }
    }
    let rank = match &l.file.body {
        Body::Coordinates(_) => opts.rank.or(l.file.rank),
        Body::Frame(_) => opts.rank,
    };
    if let Some(p) = rank {
        let ob_t = ob.as_ref().map(|o| &o.canonical);
        match theorem_theo2_audit(&l.g, p, &e.coefficients, ob_t) {
            Ok(c) => rep.add_checks("audit", &c),
            Err(AmbientError::Precondition(msg)) => {
                rep.value(scalar_block("audit skipped", msg));
            }
            Err(err) => {
                ambient_failure(&mut rep, err, &l.g, opts.normalization);
                return rep;
            }
        }
    }
    rep
}

/// Default verification order: the highest order at which a truncated `h`
/// is fully known, and `n` for an exact `h`.
fn default_verify_order(a: &AmbientMetric) -> usize {
    let t = a.trunc();
    if t == EXACT {
        a.dim()
    } else {
        (t / 2 - 1).max(0) as usize
    }
}

/// Compare the direct ambient Ricci tensor with the residuals: `Ric̃_ij =
/// E1_ij`, `2Ric̃_iρ = E2_i`, `−2Ric̃_ρρ = E3` and `Ric̃_t· = 0`. Returns the
/// first disagreement.
fn dual_path_witness(a: &AmbientMetric, m: usize) -> Result<Option<String>, AmbientError> {
    let n = a.dim();
    let c = a.base().coords();
    let res = a.residuals(m)?;
    let direct = ambient_ricci_direct(a, m)?;
    let agree = |d: &Series, e: &Series| {
        let cut = d.trunc().min(e.trunc());
        d.sub(e).truncate(cut).is_zero()
    };
    for i in 0..n {
        for j in 0..n {
            let d = direct.get(&[i + 1, j + 1]);
            let e = res.e1.get(&[i, j]);
            if !agree(d, e) {
                return Ok(Some(format!("Ric[{},{}] = {} but E1 = {}", c[i], c[j], d, e)));
            }
        }
        let d = direct.get(&[i + 1, n + 1]).scale(&qi(2));
        let e = res.e2.get(&[i]);
        if !agree(&d, e) {
            return Ok(Some(format!("2 Ric[{},rho] = {} but E2 = {}", c[i], d, e)));
        }
    }
    let d = direct.get(&[n + 1, n + 1]).scale(&qi(-2));
    if !agree(&d, &res.e3) {
        return Ok(Some(format!("-2 Ric[rho,rho] = {} but E3 = {}", d, res.e3)));
    }
    for i in 0..n + 2 {
        if !direct.get(&[0, i]).is_zero() {
            return Ok(Some(format!("Ric[t,{}] = {}", i, direct.get(&[0, i]))));
        }
    }
    Ok(None)
}

fn has_only_integer_powers(h: &TensorField<Series>) -> bool {
    tensor_trunc(h) == EXACT
        && h.components()
            .iter()
            .all(|s| s.terms().all(|((e2, k), _)| *k == 0 && e2 % 2 == 0))
}

/// Residual checks and the dual-path check of an ambient metric through
/// order `m`.
fn verify_ambient(rep: &mut Report, a: &AmbientMetric, m: usize, prefix: &str, norm: Normalization) -> bool {
    let labels = a.base().coords().to_vec();
    let res = match a.residuals(m) {
        Ok(r) => r,
        Err(e) => {
            ambient_failure(rep, e, a.base(), norm);
            return false;
        }
    };
    let name = |s: &str| if prefix.is_empty() { s.to_string() } else { format!("{} {}", prefix, s) };
    rep.value(tensor_block(&name("E1"), &res.e1, &labels, Listing::Symmetric));
    rep.value(tensor_block(&name("E2"), &res.e2, &labels, Listing::All));
    rep.value(scalar_block(&name("E3"), res.e3.to_string()));
    rep.add_checks(&name("residuals"), &res.checks());
    match dual_path_witness(a, m) {
        Ok(w) => rep.assert(name("direct ambient Ricci agrees with the residuals"), w.is_none(), w),
        Err(e) => {
            ambient_failure(rep, e, a.base(), norm);
            return false;
        }
    }
    res.vanish()
}

/// `verify`: the residuals of the `[ambient]` perturbation through order
/// `m`, computed twice.
pub fn verify(path: Option<&str>, text: &str, opts: &Options) -> Report {
    let (mut rep, loaded) = start("verify", path, text, opts);
    let Some(l) = loaded else { return rep };
    let Some(h) = l.file.ambient_h() else {
        rep.fail(ErrorKind::Input, "verify needs an [ambient] section", vec![]);
        return rep;
    };
    let a = match AmbientMetric::new(l.g.clone(), h) {
        Ok(a) => a,
        Err(e) => {
            ambient_failure(&mut rep, e, &l.g, opts.normalization);
            return rep;
        }
    };
    let m = opts.order.unwrap_or_else(|| default_verify_order(&a));
    if m == 0 {
        rep.fail(ErrorKind::Input, "the verification order must be at least 1", vec![]);
        return rep;
    }
    verify_ambient(&mut rep, &a, m, "", opts.normalization);
    if rep.error.is_none() && has_only_integer_powers(a.h()) && a.dim() <= 5 {
        if let Ok(full) = a.exact_ambient_metric() {
            let mut names = vec!["t".to_string()];
            names.extend(a.base().coords().iter().cloned());
            names.push(RHO.to_string());
            let ric = Geometry::new(full).ricci().clone();
            rep.value(tensor_block("exact ambient Ricci", &ric, &names, Listing::Symmetric));
        }
    }
    rep
}

/// `example`: run a built-in fixture through the full pipeline and assert
/// the published values.
pub fn example(name: &str, opts: &Options) -> Report {
    let Some(text) = fixtures::example_text(name) else {
        let mut rep = Report::new("example", Inputs::new(Some(name.to_string()), b"", opts.flags()));
        rep.fail(
            ErrorKind::Input,
            format!("unknown example `{}`; available: {}", name, fixtures::EXAMPLES.join(", ")),
            vec![],
        );
        return rep;
    };
    let (mut rep, loaded) = start("example", Some(name), text, opts);
    let Some(l) = loaded else { return rep };
    let geo = Geometry::new(l.g.clone());
    rep.add_checks("curvature", &curvature_invariants(&geo));
    match name {
        "sig22" => example_sig22(&mut rep, &l, opts),
        "ppwave-odd" => example_ppwave_odd(&mut rep, &l, opts),
        "ppwave-even" => example_ppwave_even(&mut rep, &l, opts),
        "heisenberg-semidirect" => example_heisenberg(&mut rep, &l, opts),
        "einstein-h3" => example_einstein(&mut rep, &l, opts),
        _ => unreachable!("names come from the fixture table"),
    }
    rep
}

fn rf(l: &Loaded, s: &str) -> RatFunc {
    parse_ratfunc(s, &l.file.context).expect("built-in expression parses")
}

fn sym_tensor(l: &Loaded, entries: &[(usize, usize, &str)]) -> TensorField<RatFunc> {
    let n = l.g.dim();
    let mut t = TensorField::zeros(n, &[Slot::Down, Slot::Down]);
    for &(i, j, v) in entries {
        let v = rf(l, v);
        t.set(&[i, j], v.clone());
        t.set(&[j, i], v);
    }
    t
}

fn tensor_equals(rep: &mut Report, name: &str, got: &TensorField<RatFunc>, want: &TensorField<RatFunc>, labels: &[String]) {
    let w = match got.sub(want) {
        Ok(d) => d.first_nonzero().map(|(i, v)| {
            let idx: Vec<&str> = i.iter().map(|&k| labels[k].as_str()).collect();
            format!("difference at [{}] = {}", idx.join(","), v)
        }),
        Err(e) => Some(e.to_string()),
    };
    rep.assert(name, w.is_none(), w);
}

fn series_tensor_equals(rep: &mut Report, name: &str, got: &TensorField<Series>, want: &TensorField<Series>, labels: &[String]) {
    let mut w = None;
    for (idx, s) in got.iter() {
        let d = s.sub(want.get(&idx));
        if !d.is_zero() {
            let names: Vec<&str> = idx.iter().map(|&k| labels[k].as_str()).collect();
            w = Some(format!("difference at [{}] = {}", names.join(","), d));
            break;
        }
    }
    rep.assert(name, w.is_none(), w);
}

fn q_equals(rep: &mut Report, name: &str, got: Result<Q, AmbientError>, want: Q) {
    match got {
        Ok(v) => rep.assert(name, v == want, Some(format!("got {}, expected {}", v, want))),
        Err(e) => rep.assert(name, false, Some(e.to_string())),
    }
}

fn example_sig22(rep: &mut Report, l: &Loaded, opts: &Options) {
    let labels = l.labels().to_vec();
    let geo = Geometry::new(l.g.clone());
    let bracket = |s: i64| {
        sym_tensor(l, &[(2, 2, "x1^2"), (2, 3, "-2*x1*x2"), (3, 3, "x2^2")]).scale(&qi(s))
    };
    rep.value(tensor_block("Ricci", geo.ricci(), &labels, Listing::Symmetric));
    tensor_equals(rep, "Ric = -12((x1 dy1)^2 - 4 x1 x2 dy1 dy2 + (x2 dy2)^2)", geo.ricci(), &bracket(-12), &labels);
    match frame_from_walker_coordinates(&l.g, 2).map_err(|e| e.to_string()).and_then(|f| frame_curvature(&f).map_err(|e| e.to_string())) {
        Ok(r) => {
            let two = RatFunc::from_q(qi(2));
            let vals = [
                ("R(1,1b,1b,1) = 2", r.get(&[0, 2, 2, 0]).clone()),
                ("-R(1,1b,2b,2) = 2", r.get(&[0, 2, 3, 1]).neg()),
                ("R(2,2b,2b,2) = 2", r.get(&[1, 3, 3, 1]).clone()),
            ];
            for (name, v) in vals {
                let ok = v.sub(&two).is_zero();
                rep.assert(format!("frame curvature {}", name), ok, Some(format!("got {}", v)));
            }
        }
        Err(e) => rep.assert("adapted Walker frame", false, Some(e)),
    }
    let ob = match obstruction(&l.g) {
        Ok(ob) => ob,
        Err(e) => return ambient_failure(rep, e, &l.g, opts.normalization),
    };
    add_obstruction(rep, &ob, &labels, opts.normalization);
    let paper = ob.paper_normalized();
    tensor_equals(rep, "obstruction = -144((x1 dy1)^2 - 4 x1 x2 dy1 dy2 + (x2 dy2)^2)", &paper, &bracket(-144), &labels);
    let Some(h) = l.file.ambient_h() else {
        return rep.fail(ErrorKind::Input, "the sig22 fixture has no [ambient] section", vec![]);
    };
    let a = match AmbientMetric::new(l.g.clone(), h) {
        Ok(a) => a,
        Err(e) => return ambient_failure(rep, e, &l.g, opts.normalization),
    };
    verify_ambient(rep, &a, 1, "m=1", opts.normalization);
    // At m = 2 the residual survives: E1 = -rho O + O(rho^2).
    match a.residuals(2) {
        Ok(r) => {
            let c1 = coefficient(&r.e1, 2, 0);
            rep.assert("m=2 residuals fail", !r.e1_vanishes(), None);
            tensor_equals(rep, "m=2 E1 = -rho O (paper normalization)", &c1, &paper.neg(), &labels);
        }
        Err(e) => return ambient_failure(rep, e, &l.g, opts.normalization),
    }
    match a.exact_ambient_metric() {
        Ok(full) => {
            let ric = Geometry::new(full).ricci().clone();
            let rho = RatFunc::from_expr(ambientforge::Expr::var(RHO));
            let factor = rho.mul(&rho.scale(&qi(3)).sub(&RatFunc::one()));
            let ij = TensorField::from_fn(4, &[Slot::Down, Slot::Down], |x| ric.get(&[x[0] + 1, x[1] + 1]).clone());
            let want = paper.mul_scalar(&factor);
            tensor_equals(rep, "ambient Ricci ij block = rho(3 rho - 1) O", &ij, &want, &labels);
        }
        Err(e) => ambient_failure(rep, e, &l.g, opts.normalization),
    }
}

fn example_ppwave_odd(rep: &mut Report, l: &Loaded, opts: &Options) {
    let labels = l.labels().to_vec();
    let order = opts.order.unwrap_or(6);
    walker_checks(rep, l, Some(1));
    let a = match ppwave_ambient(&l.g, &PpWaveOptions::new(1, order)) {
        Ok(a) => a,
        Err(e) => return ambient_failure(rep, e, &l.g, opts.normalization),
    };
    rep.value(tensor_block("h (closed form)", a.h(), &labels, Listing::Symmetric));
    if let Some(h) = l.file.ambient_h() {
        series_tensor_equals(rep, "closed form equals the [ambient] section", a.h(), &h, &labels);
    }
    rep.assert("closed form is exact", a.trunc() == EXACT, Some(format!("truncated below rho^{}", a.trunc())));
    verify_ambient(rep, &a, order, "closed form", opts.normalization);
    let e = match expand_generic(&l.g, &ExpandOptions { order: Some(order), trace_free_choice: None }) {
        Ok(e) => e,
        Err(err) => return ambient_failure(rep, err, &l.g, opts.normalization),
    };
    for k in 1..=order {
        tensor_equals(
            rep,
            &format!("expansion g^({}) equals the closed form", k),
            e.coefficient(k),
            &a.coefficient(k as i32),
            &labels,
        );
    }
    match theorem_theo2_audit(&l.g, 1, &e.coefficients, None) {
        Ok(c) => rep.add_checks("audit", &c),
        Err(err) => ambient_failure(rep, err, &l.g, opts.normalization),
    }
}

fn example_ppwave_even(rep: &mut Report, l: &Loaded, opts: &Options) {
    let labels = l.labels().to_vec();
    let n = l.g.dim();
    walker_checks(rep, l, Some(1));
    let ob = match obstruction(&l.g) {
        Ok(ob) => ob,
        Err(e) => return ambient_failure(rep, e, &l.g, opts.normalization),
    };
    add_obstruction(rep, &ob, &labels, opts.normalization);
    // With H = y1^2 y2^2, the Laplacian squared of H is 8 and the canonical
    // obstruction is a quarter of it in the u,u slot.
    let want = sym_tensor(l, &[(n - 1, n - 1, "2")]);
    tensor_equals(rep, "canonical obstruction = (1/4) Lap^2 H du^2", &ob.canonical, &want, &labels);
    let geo = Geometry::new(l.g.clone());
    let mut boxed = geo.ricci().clone();
    for _ in 0..n / 2 - 1 {
        boxed = geo.box_op(&boxed);
    }
    match nrw_box_c(n) {
        Ok(c) => tensor_equals(rep, "obstruction = c Box^(n/2-1) Ric", &ob.canonical, &boxed.scale(&c), &labels),
        Err(e) => return ambient_failure(rep, e, &l.g, opts.normalization),
    }
    match ppwave_ambient(&l.g, &PpWaveOptions::new(1, n / 2 + 1)) {
        Err(AmbientError::Obstructed { .. }) => rep.assert("power series branch is obstructed", true, None),
        Err(e) => rep.assert("power series branch is obstructed", false, Some(e.to_string())),
        Ok(_) => rep.assert("power series branch is obstructed", false, Some("an ambient metric was returned".into())),
    }
    q_equals(rep, "log constant c_4 = -1/8", ppwave_log_c(n), Q::new((-1).into(), 8.into()));
    q_equals(rep, "q_1 - q_0 = 4/3", Ok(ppwave_q(n, 1)), Q::new(4.into(), 3.into()));
    let order = opts.order.unwrap_or(n / 2 + 2);
    let mut popts = PpWaveOptions::new(1, order);
    popts.log_branch = true;
    popts.q0 = rf(l, "u + 3");
    let a = match ppwave_ambient(&l.g, &popts) {
        Ok(a) => a,
        Err(e) => return ambient_failure(rep, e, &l.g, opts.normalization),
    };
    rep.value(tensor_block("h (log branch, q0 = u + 3)", a.h(), &labels, Listing::Symmetric));
    let has_log = a.h().components().iter().any(|s| s.terms().any(|((_, k), _)| *k == 1));
    rep.assert("log branch carries rho^(n/2) log rho", has_log, None);
    verify_ambient(rep, &a, order - 1, "log branch", opts.normalization);
}

fn example_heisenberg(rep: &mut Report, l: &Loaded, opts: &Options) {
    let Some(f) = l.file.frame() else {
        return rep.fail(ErrorKind::Input, "the Heisenberg fixture must be a frame file", vec![]);
    };
    let n = f.dim();
    let order = opts.order.unwrap_or(6);
    walker_checks(rep, l, None);
    let fl: Vec<String> = (0..n).map(|i| f.label(i)).collect();
    for (tag, fdata) in [("F = 0", None), ("F = x5^3 + x2 x5", Some("x5^3 + x2*x5"))] {
        let mut map = BTreeMap::new();
        if let Some(s) = fdata {
            map.insert((n - 1, n - 1), rf(l, s));
        }
        let lopts = LeftInvariantOptions {
            coords: l.file.coords.clone(),
            f: map,
            order,
        };
        let li = match left_invariant_ambient(f, &lopts) {
            Ok(li) => li,
            Err(e) => return ambient_failure(rep, e, &l.g, opts.normalization),
        };
        rep.value(tensor_block(&format!("frame Ricci ({})", tag), &li.frame_ricci, &fl, Listing::Symmetric));
        let fh = li.frame_h.iter().map(|((a, b), s)| crate::report::Entry {
            index: format!("{},{}", fl[*a], fl[*b]),
            value: s.to_string(),
        });
        rep.value(ValueBlock {
            name: format!("frame h ({})", tag),
            entries: fh.collect(),
        });
        verify_ambient(rep, &li.ambient, order, tag, opts.normalization);
        if fdata.is_none() {
            let want = Series::term(2, 0, RatFunc::from_q(Q::new((-1).into(), 3.into())));
            let got = li.frame_h.get(&(n - 1, n - 1)).cloned().unwrap_or_else(Series::exact);
            rep.assert("h = -rho/3 on theta5 theta5", got == want, Some(format!("got {}", got)));
            match li.ambient.exact_ambient_metric() {
                Ok(full) => {
                    let ric = Geometry::new(full).ricci().clone();
                    let w = ric.first_nonzero().map(|(i, v)| format!("Ric{:?} = {}", i, v));
                    rep.assert("exact ambient metric is Ricci flat", w.is_none(), w);
                }
                Err(e) => return ambient_failure(rep, e, &l.g, opts.normalization),
            }
        }
    }
}

fn example_einstein(rep: &mut Report, l: &Loaded, opts: &Options) {
    let labels = l.labels().to_vec();
    let a = match einstein_ambient(&l.g, &qi(-2)) {
        Ok(a) => a,
        Err(e) => return ambient_failure(rep, e, &l.g, opts.normalization),
    };
    rep.value(tensor_block("h (closed form)", a.h(), &labels, Listing::Symmetric));
    if let Some(h) = l.file.ambient_h() {
        series_tensor_equals(rep, "closed form equals the [ambient] section", a.h(), &h, &labels);
    }
    match a.exact_ambient_metric() {
        Ok(full) => {
            let ric = Geometry::new(full).ricci().clone();
            let w = ric.first_nonzero().map(|(i, v)| format!("Ric{:?} = {}", i, v));
            rep.assert("exact ambient metric is Ricci flat", w.is_none(), w);
        }
        Err(e) => return ambient_failure(rep, e, &l.g, opts.normalization),
    }
    let order = opts.order.unwrap_or(4);
    verify_ambient(rep, &a, order, "", opts.normalization);
    match expand_generic(&l.g, &ExpandOptions { order: Some(order), trace_free_choice: None }) {
        Ok(e) => {
            for k in 1..=order {
                tensor_equals(
                    rep,
                    &format!("expansion g^({}) equals the closed form", k),
                    e.coefficient(k),
                    &a.coefficient(k as i32),
                    &labels,
                );
            }
        }
        Err(err) => ambient_failure(rep, err, &l.g, opts.normalization),
    }
}

/// Dispatch by command name.
pub fn run(command: &str, path: Option<&str>, text: &str, opts: &Options) -> Report {
    match command {
        "curvature" => curvature(path, text, opts),
        "walker-check" => walker_check(path, text, opts),
        "expand" => expand(path, text, opts),
        "verify" => verify(path, text, opts),
        _ => {
            let mut rep = Report::new(command, Inputs::new(path.map(str::to_string), text.as_bytes(), opts.flags()));
            rep.fail(ErrorKind::Input, format!("unknown command `{}`", command), vec![]);
            rep
        }
    }
}

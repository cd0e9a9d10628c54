//! Walker structure: block-form checks in coordinates, bracket conditions in
//! a frame, null-Ricci-Walker conditions and curvature contractions.

use crate::expr::q;
use crate::ratfunc::RatFunc;
use crate::report::{Check, CheckList};
use crate::scalar::Scalar;
use crate::tensor::{Geometry, Metric};

use super::{frame_curvature, frame_ricci, Block, FrameData, FrameError, VectorFields};

fn check_rank(n: usize, p: usize) -> Result<(), FrameError> {
    if p == 0 || 2 * p > n {
        return Err(FrameError::Invalid(format!(
            "null rank p = {} must satisfy 1 <= p <= n/2 for n = {}",
            p, n
        )));
    }
    Ok(())
}

/// First failing entry among `items`, formatted as a witness.
fn first_nonzero<I>(items: I) -> Option<String>
where
    I: IntoIterator<Item = (String, RatFunc)>,
{
    items
        .into_iter()
        .find(|(_, v)| !v.is_zero())
        .map(|(name, v)| format!("{} = {}", name, v))
}

fn zero_check(name: &str, items: Vec<(String, RatFunc)>) -> Check {
    let w = first_nonzero(items);
    Check::assertion(name, w.is_none(), w)
}

/// Structural test of the Walker coordinate form
/// `2 dx^ā(δ_āb dx^b + F_āB dx^B + H_āb̄ dx^b̄) + G_AB dx^A dx^B` with
/// `∂_a F = ∂_a G = 0`, plus parallelism of `span(∂_a)` computed from the
/// Christoffel symbols. The coordinates are ordered as null block, middle
/// block, dual block.
pub fn walker_check_coordinates(g: &Metric<RatFunc>, p: usize) -> Result<CheckList, FrameError> {
    let n = g.dim();
    check_rank(n, p)?;
    let c = g.coords();
    let dual = |a: usize| n - p + a;
    let mid = p..n - p;
    let mut out = CheckList::new();
    let mut items = Vec::new();
    for a in 0..p {
        for b in 0..p {
            items.push((format!("g[{},{}]", c[a], c[b]), g.g(a, b).clone()));
        }
    }
    out.push(zero_check("null block g_ab = 0", items));
    let mut items = Vec::new();
    for a in 0..p {
        for b in 0..p {
            let expect = if a == b { RatFunc::one() } else { RatFunc::zero() };
            items.push((
                format!("g[{},{}] - {}", c[a], c[dual(b)], if a == b { 1 } else { 0 }),
                g.g(a, dual(b)).sub(&expect),
            ));
        }
    }
    out.push(zero_check("pairing g_(a,abar) = delta", items));
    let mut items = Vec::new();
    for a in 0..p {
        for bb in mid.clone() {
            items.push((format!("g[{},{}]", c[a], c[bb]), g.g(a, bb).clone()));
        }
    }
    out.push(zero_check("mixed block g_aB = 0", items));
    let mut items = Vec::new();
    for a in 0..p {
        for i in mid.clone() {
            for j in mid.clone() {
                items.push((
                    format!("d/d{} g[{},{}]", c[a], c[i], c[j]),
                    g.partial(g.g(i, j), a),
                ));
            }
        }
    }
    out.push(zero_check("G independent of null coordinates", items));
    let mut items = Vec::new();
    for a in 0..p {
        for ab in n - p..n {
            for bb in mid.clone() {
                items.push((
                    format!("d/d{} g[{},{}]", c[a], c[ab], c[bb]),
                    g.partial(g.g(ab, bb), a),
                ));
            }
        }
    }
    out.push(zero_check("F independent of null coordinates", items));
    let geo = Geometry::new(g.clone());
    let gam = geo.christoffel();
    let mut items = Vec::new();
    for a in 0..p {
        for i in 0..n {
            for k in p..n {
                items.push((
                    format!("Gamma^{}_({},{})", c[k], c[i], c[a]),
                    gam.get(&[k, i, a]).clone(),
                ));
            }
        }
    }
    out.push(zero_check("span of null coordinate fields is parallel", items));
    Ok(out)
}

/// The adapted frame of Walker coordinates:
/// `e_a = ∂_a`, `e_A = ∂_A − g_āA ∂_a(ā)`, `e_c̄ = ∂_c̄ − ½ g_āc̄ ∂_a(ā)`.
/// The middle block of the metric must be constant in these coordinates.
pub fn frame_from_walker_coordinates(
    g: &Metric<RatFunc>,
    p: usize,
) -> Result<FrameData, FrameError> {
    let n = g.dim();
    check_rank(n, p)?;
    let structure = walker_check_coordinates(g, p)?;
    for name in [
        "null block g_ab = 0",
        "pairing g_(a,abar) = delta",
        "mixed block g_aB = 0",
    ] {
        if structure.passed(name) != Some(true) {
            return Err(FrameError::Precondition(format!(
                "metric is not in Walker coordinate form: {} fails",
                name
            )));
        }
    }
    let half = q(1, 2);
    let mut comps = vec![vec![RatFunc::zero(); n]; n];
    for (i, row) in comps.iter_mut().enumerate() {
        row[i] = RatFunc::one();
        if i >= p {
            let w = if i >= n - p { half.clone() } else { q(1, 1) };
            for ab in n - p..n {
                let a = ab - (n - p);
                row[a] = row[a].sub(&g.g(ab, i).scale(&w));
            }
        }
    }
    let mut gframe = vec![vec![q(0, 1); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = RatFunc::zero();
            for mu in 0..n {
                for nu in 0..n {
                    if comps[i][mu].is_zero() || comps[j][nu].is_zero() {
                        continue;
                    }
                    s.add_assign(&comps[i][mu].mul(&comps[j][nu]).mul(g.g(mu, nu)));
                }
            }
            gframe[i][j] = s
                .as_expr()
                .and_then(|e| e.as_constant())
                .ok_or_else(|| {
                    FrameError::Precondition(format!(
                        "frame metric component ({},{}) = {} is not constant",
                        i + 1,
                        j + 1,
                        s
                    ))
                })?;
        }
    }
    FrameData::from_vector_fields(
        p,
        gframe,
        VectorFields {
            coords: g.coords().to_vec(),
            comps,
        },
    )
}

fn r_items(f: &FrameData, pred: impl Fn(Block, Block, Block) -> bool) -> Vec<(String, RatFunc)> {
    let n = f.dim();
    let mut items = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                if pred(f.block(k), f.block(i), f.block(j)) {
                    items.push((
                        format!("r^{}_({},{})", f.label(k), f.label(i), f.label(j)),
                        f.r(k, i, j).clone(),
                    ));
                }
            }
        }
    }
    items
}

use Block::{Dual, Middle, Null};

fn in_k(b: Block) -> bool {
    b != Dual
}

fn unordered(i: Block, j: Block, x: Block, y: Block) -> bool {
    (i == x && j == y) || (i == y && j == x)
}

/// The bracket conditions characterizing a Walker frame.
pub fn walker_frame_check(f: &FrameData) -> CheckList {
    let mut out = CheckList::new();
    out.push(zero_check(
        "K = span(e_1..e_(n-p)) involutive",
        r_items(f, |k, i, j| k == Dual && in_k(i) && in_k(j)),
    ));
    out.push(zero_check(
        "[e_a,e_b] = 0",
        r_items(f, |_, i, j| i == Null && j == Null),
    ));
    out.push(zero_check(
        "[e_a,e_B] = 0",
        r_items(f, |_, i, j| unordered(i, j, Null, Middle)),
    ));
    out.push(zero_check(
        "[e_a,e_cbar] in N",
        r_items(f, |k, i, j| k != Null && unordered(i, j, Null, Dual)),
    ));
    out.push(zero_check(
        "[e_B,e_cbar] in K",
        r_items(f, |k, i, j| k == Dual && unordered(i, j, Middle, Dual)),
    ));
    out.push(zero_check(
        "[e_abar,e_cbar] in N",
        r_items(f, |k, i, j| k != Null && i == Dual && j == Dual),
    ));
    out
}

fn derivative_items(
    f: &FrameData,
    dirs: &[usize],
    funcs: &[(usize, usize, usize)],
) -> Result<Vec<(String, RatFunc)>, FrameError> {
    let mut items = Vec::new();
    for &a in dirs {
        for &(k, i, j) in funcs {
            items.push((
                format!(
                    "e_{}(r^{}_({},{}))",
                    f.label(a),
                    f.label(k),
                    f.label(i),
                    f.label(j)
                ),
                f.derivative(a, f.r(k, i, j))?,
            ));
        }
    }
    Ok(items)
}

/// The sufficient conditions for a Walker frame to be null Ricci Walker,
/// the curvature identities they imply, the closed formula for the only
/// Ricci components that can survive, and the null-Ricci-Walker conclusion
/// itself from the full frame Ricci tensor.
pub fn nrw_conditions(f: &FrameData) -> Result<CheckList, FrameError> {
    let walker = walker_frame_check(f);
    if let Some(c) = walker.first_failure() {
        return Err(FrameError::Precondition(format!(
            "frame is not a Walker frame: {} fails with {}",
            c.name,
            c.witness.clone().unwrap_or_default()
        )));
    }
    let n = f.dim();
    let nulls: Vec<usize> = f.null_range().collect();
    let mids: Vec<usize> = f.middle_range().collect();
    let duals: Vec<usize> = f.dual_range().collect();
    let mut out = CheckList::new();
    let w5 = r_items(f, |k, i, j| k == Middle && i == Middle && j == Middle);
    let w5 = first_nonzero(w5);
    out.push(Check::property("r^C_AB = 0", w5.is_none(), w5));
    let mut funcs = Vec::new();
    for &d in &nulls {
        for &b in &nulls {
            for &c in &duals {
                funcs.push((d, b, c));
            }
        }
    }
    let w = first_nonzero(derivative_items(f, &mids, &funcs)?);
    out.push(Check::property("e_A(r^d_(b,cbar)) = 0", w.is_none(), w));
    let mut funcs = Vec::new();
    for &d in &nulls {
        for &b in &mids {
            for &c in &mids {
                funcs.push((d, b, c));
            }
        }
    }
    for &dd in &mids {
        for &b in &mids {
            for &c in &duals {
                funcs.push((dd, b, c));
            }
        }
    }
    let w = first_nonzero(derivative_items(f, &mids, &funcs)?);
    out.push(Check::property(
        "e_A(r^d_(B,C)) = e_A(r^D_(B,cbar)) = 0",
        w.is_none(),
        w,
    ));
    let sufficient = out.all_pass();

    let riem = frame_curvature(f)?;
    let ric = frame_ricci(f)?;
    let mut items = Vec::new();
    for &a in &mids {
        for &b in &mids {
            for &c in &mids {
                for i in 0..n {
                    items.push((
                        format!("R_({},{},{},{})", f.label(a), f.label(b), f.label(c), f.label(i)),
                        riem.get(&[a, b, c, i]).clone(),
                    ));
                }
            }
        }
    }
    let w = first_nonzero(items);
    out.push(Check::property("R_ABCi = 0", w.is_none(), w));
    let mut items = Vec::new();
    for &ab in &duals {
        for &b in &nulls {
            for &dd in &mids {
                for &c in &duals {
                    items.push((
                        format!("R_({},{},{},{})", f.label(ab), f.label(b), f.label(dd), f.label(c)),
                        riem.get(&[ab, b, dd, c]).clone(),
                    ));
                }
            }
        }
    }
    let w = first_nonzero(items);
    out.push(Check::property("R_(abar,b,D,cbar) = 0", w.is_none(), w));
    let mut items = Vec::new();
    for &a in &mids {
        for i in 0..n {
            items.push((
                format!("Ric_({},{})", f.label(a), f.label(i)),
                ric.get(&[a, i]).clone(),
            ));
        }
    }
    let w = first_nonzero(items);
    out.push(Check::property("Ric_Ai = 0", w.is_none(), w));

    // Closed formula for the remaining mixed components.
    let half = q(1, 2);
    let mut formula_items = Vec::new();
    let mut mismatch = Vec::new();
    for &b in &nulls {
        for &c in &duals {
            let mut s = RatFunc::zero();
            for &ff in &nulls {
                let gfc = f.metric(ff, c);
                if num_traits::Zero::is_zero(gfc) {
                    continue;
                }
                for &ab in &duals {
                    for &d in &nulls {
                        let gi = f.metric_inverse(ab, d);
                        if num_traits::Zero::is_zero(gi) {
                            continue;
                        }
                        let dr = f.derivative(b, f.r(ff, ab, d))?;
                        s.add_assign(&dr.scale(&(gfc.clone() * gi.clone())));
                    }
                }
            }
            for &d in &nulls {
                s.add_assign(&f.derivative(b, f.r(d, c, d))?);
            }
            let s = s.scale(&half);
            let name = format!("Ric_({},{})", f.label(b), f.label(c));
            mismatch.push((name.clone(), s.sub(ric.get(&[b, c]))));
            formula_items.push((name, s));
        }
    }
    let w = first_nonzero(formula_items);
    out.push(Check::property("closed formula for Ric_(b,cbar) vanishes", w.is_none(), w));
    if sufficient {
        let w = first_nonzero(mismatch);
        out.push(Check::assertion(
            "closed formula for Ric_(b,cbar) agrees with the frame Ricci tensor",
            w.is_none(),
            w,
        ));
    }
    let mut items = Vec::new();
    for i in 0..n {
        if f.block(i) == Dual {
            continue;
        }
        for j in 0..n {
            items.push((
                format!("Ric_({},{})", f.label(i), f.label(j)),
                ric.get(&[i, j]).clone(),
            ));
        }
    }
    out.push(zero_check("null Ricci Walker (image of Ric in N)", items));
    Ok(out)
}

/// Whether `X ⌟ R = 0` for all `X` in the null block. For a rank-one null
/// block of a null Ricci Walker metric, additionally verifies that the
/// components `R_(abar,b,d,cbar)` vanish.
pub fn curvature_null_contraction(f: &FrameData) -> Result<CheckList, FrameError> {
    let n = f.dim();
    let riem = frame_curvature(f)?;
    let mut items = Vec::new();
    for a in f.null_range() {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    items.push((
                        format!("R_({},{},{},{})", f.label(a), f.label(j), f.label(k), f.label(l)),
                        riem.get(&[a, j, k, l]).clone(),
                    ));
                }
            }
        }
    }
    let w = first_nonzero(items);
    let mut out = CheckList::new();
    out.push(Check::property("N contracted into R vanishes", w.is_none(), w));
    if f.rank() == 1 {
        let nrw = nrw_conditions(f)?;
        if nrw.passed("null Ricci Walker (image of Ric in N)") == Some(true) {
            let mut items = Vec::new();
            for ab in f.dual_range() {
                for b in f.null_range() {
                    for d in f.null_range() {
                        for c in f.dual_range() {
                            items.push((
                                format!(
                                    "R_({},{},{},{})",
                                    f.label(ab),
                                    f.label(b),
                                    f.label(d),
                                    f.label(c)
                                ),
                                riem.get(&[ab, b, d, c]).clone(),
                            ));
                        }
                    }
                }
            }
            out.push(zero_check("rank one null Ricci Walker gives R_(abar,b,d,cbar) = 0", items));
        }
    }
    Ok(out)
}

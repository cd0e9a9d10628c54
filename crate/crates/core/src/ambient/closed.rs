//! Closed-form ambient metrics: Einstein metrics, gpp-waves and
//! left-invariant metrics on semidirect products, together with the series
//! solutions of the homogeneous equation they are built from.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::expr::{qi, Q};
use crate::frame::{frame_ricci, nrw_conditions, realize_nilpotent, FrameData, Realization};
use crate::ratfunc::RatFunc;
use crate::report::CheckList;
use crate::scalar::Scalar;
use crate::series::EXACT;
use crate::tensor::{Geometry, Metric, Slot, TensorField};

use super::{AmbientError, AmbientMetric, Series};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn apply(self, n: usize) -> i64 {
        match self {
            Sign::Plus => n as i64,
            Sign::Minus => -(n as i64),
        }
    }
}

/// Laplacian `g^{kl}∇_k∇_l f` of a function.
pub fn laplacian(geo: &Geometry<RatFunc>, f: &RatFunc) -> RatFunc {
    geo.box_op(&TensorField::scalar(geo.dim(), f.clone())).value().clone()
}

/// `𝒟_±(f) = 2ρ∂²_ρ f + (2 ± n)∂_ρ f − 𝒟f`, with `𝒟` applied to every
/// coefficient.
pub fn d_operator<D>(f: &Series, d: D, n: usize, sign: Sign) -> Series
where
    D: Fn(&RatFunc) -> RatFunc,
{
    let fd = f.d_rho();
    let fdd = fd.d_rho();
    let rho = Series::term(2, 0, RatFunc::one());
    let mut df = Series::zero_to(f.trunc());
    for ((e2, k), c) in f.terms() {
        df.insert(*e2, *k, d(c));
    }
    rho.mul(&fdd)
        .scale(&qi(2))
        .add(&fd.scale(&qi(2 + sign.apply(n))))
        .sub(&df)
}

/// `Δ₋(f) = 2ρf̈ + (2 − n)ḟ − Δf` for the Laplacian of `transverse`.
pub fn delta_minus(transverse: &Geometry<RatFunc>, f: &Series, n: usize) -> Series {
    d_operator(f, |c| laplacian(transverse, c), n, Sign::Minus)
}

/// Terms `k = 1..=kmax` of `Σ 𝒟^k F ρ^k / (k! ∏_{i=1}^k (2i ± n))`, skipping
/// vanishing iterates. Returns the exact partial sum and whether the
/// iterates died out (so that the infinite sum equals the partial one).
fn partial_solution<D>(f: &RatFunc, d: &D, n: usize, sign: Sign, kmax: usize) -> Result<(Series, bool), AmbientError>
where
    D: Fn(&RatFunc) -> RatFunc,
{
    let mut out = Series::exact();
    let mut dk = f.clone();
    let mut den = Q::one();
    let mut dead = f.is_zero();
    for k in 1..=kmax {
        if dead {
            break;
        }
        dk = d(&dk);
        let factor = qi(k as i64) * qi(2 * k as i64 + sign.apply(n));
        if dk.is_zero() {
            dead = true;
            break;
        }
        if factor.is_zero() {
            return Err(AmbientError::Precondition(format!(
                "F_- needs odd n or D^{}(F) = 0, but D^{}(F) = {}",
                k, k, dk
            )));
        }
        den *= factor;
        out.insert(2 * k as i32, 0, dk.scale(&(Q::one() / den.clone())));
    }
    if !dead {
        // The next iterate decides whether the sum is finite.
        dead = d(&dk).is_zero();
    }
    Ok((out, dead))
}

/// `F_± = Σ_{k≥1} 𝒟^k F ρ^k / (k! ∏_{i=1}^k (2i ± n))` through `ρ^order`;
/// exact when the iterates of `𝒟` vanish.
pub fn series_solution<D>(f: &RatFunc, d: D, n: usize, sign: Sign, order: usize) -> Result<Series, AmbientError>
where
    D: Fn(&RatFunc) -> RatFunc,
{
    if sign == Sign::Minus && n % 2 == 0 {
        let mut dk = f.clone();
        for _ in 0..n / 2 {
            dk = d(&dk);
        }
        if !dk.is_zero() {
            return Err(AmbientError::Precondition(format!(
                "F_- needs odd n or D^{}(F) = 0, but D^{}(F) = {}",
                n / 2,
                n / 2,
                dk
            )));
        }
    }
    let (s, finite) = partial_solution(f, &d, n, sign, order)?;
    Ok(if finite { s } else { s.with_trunc(2 * (order as i32 + 1)) })
}

/// The log-branch constant `−1/((s−1)! ∏_{i=0}^{s−1}(2i − n))` for `n = 2s`.
pub fn ppwave_log_c(n: usize) -> Result<Q, AmbientError> {
    if n % 2 != 0 || n < 4 {
        return Err(AmbientError::Invalid(format!("ppwave_log_c needs even n >= 4, got {}", n)));
    }
    let s = n / 2;
    let mut den = Q::one();
    for i in 1..s {
        den *= qi(i as i64);
    }
    for i in 0..s {
        den *= qi(2 * i as i64 - n as i64);
    }
    Ok(-Q::one() / den)
}

/// `q_k − q_0 = Σ_{i=1}^k (n + 4i)/(i(n + 2i))`.
pub fn ppwave_q(n: usize, k: usize) -> Q {
    let n = n as i64;
    (1..=k as i64).map(|i| Q::new((n + 4 * i).into(), (i * (n + 2 * i)).into())).sum()
}

#[derive(Clone, Debug)]
pub struct PpWaveOptions {
    /// Rank `p` of the null block.
    pub rank: usize,
    /// Homogeneous data `α_{āb̄}`, keyed by coordinate indices `(i, j)` with
    /// `i ≤ j` in the dual block.
    pub alpha: BTreeMap<(usize, usize), RatFunc>,
    /// `q_0`, a function of the dual coordinates (even `n` only).
    pub q0: RatFunc,
    /// Series truncation: terms through `ρ^order`.
    pub order: usize,
    /// Accept the logarithmic branch when `Δ^{n/2}H ≠ 0` for even `n`.
    pub log_branch: bool,
}

impl PpWaveOptions {
    pub fn new(rank: usize, order: usize) -> Self {
        PpWaveOptions {
            rank,
            alpha: BTreeMap::new(),
            q0: RatFunc::zero(),
            order,
            log_branch: false,
        }
    }
}

/// Ambient metric of a gpp-wave
/// `2dx^ā(δ_āb dx^b + H_āb̄ dx^b̄) + G_AB dx^A dx^B` in coordinates ordered as
/// null block, middle block, dual block, where `g_āb̄ = H_āb̄`. Each
/// component `h_āb̄` solves `2ρḧ + (2−n)ḣ − Δ_G h − Δ_G H = 0`.
pub fn ppwave_ambient(g: &Metric<RatFunc>, opts: &PpWaveOptions) -> Result<AmbientMetric, AmbientError> {
    let n = g.dim();
    let p = opts.rank;
    let walker = crate::frame::walker_check_coordinates(g, p)?;
    if let Some(c) = walker.first_failure() {
        return Err(AmbientError::Precondition(format!("not a Walker metric: {} fails", c.name)));
    }
    let c = g.coords();
    let mid: Vec<usize> = (p..n - p).collect();
    let dual: Vec<usize> = (n - p..n).collect();
    for &a in &mid {
        for &b in &dual {
            if !g.g(a, b).is_zero() {
                return Err(AmbientError::Precondition(format!(
                    "not a gpp-wave: g[{},{}] = {}",
                    c[a], c[b], g.g(a, b)
                )));
            }
        }
    }
    for &a in &mid {
        for &b in &mid {
            for v in (0..p).chain(dual.iter().copied()) {
                if g.g(a, b).depends_on(&c[v]) {
                    return Err(AmbientError::Precondition(format!(
                        "transverse metric entry g[{},{}] depends on {}",
                        c[a], c[b], c[v]
                    )));
                }
            }
        }
    }
    for &a in &dual {
        for &b in &dual {
            for v in 0..p {
                if g.g(a, b).depends_on(&c[v]) {
                    return Err(AmbientError::Precondition(format!(
                        "H entry g[{},{}] depends on the null coordinate {}",
                        c[a], c[b], c[v]
                    )));
                }
            }
        }
    }
    let transverse = if mid.is_empty() {
        None
    } else {
        let rows = mid.iter().map(|&a| mid.iter().map(|&b| g.g(a, b).clone()).collect()).collect();
        let tm = Metric::new(mid.iter().map(|&a| c[a].clone()).collect(), rows)?;
        let geo = Geometry::new(tm);
        if let Some((idx, v)) = geo.ricci().first_nonzero() {
            return Err(AmbientError::Precondition(format!(
                "transverse metric is not Ricci flat: Ric[{},{}] = {}",
                idx[0], idx[1], v
            )));
        }
        Some(geo)
    };
    let lap = |f: &RatFunc| match &transverse {
        Some(geo) => laplacian(geo, f),
        None => RatFunc::zero(),
    };
    for ((i, j), _) in &opts.alpha {
        if *i < n - p || *j < n - p || i > j {
            return Err(AmbientError::Invalid(format!(
                "alpha entries must be keyed by dual-block pairs (i <= j), got ({}, {})",
                i, j
            )));
        }
    }
    for v in 0..n - p {
        if opts.q0.depends_on(&c[v]) {
            return Err(AmbientError::Invalid(format!(
                "q0 must depend only on the dual coordinates, but depends on {}",
                c[v]
            )));
        }
    }
    let k_max = opts.order;
    let trunc = 2 * (k_max as i32 + 1);
    let mut finite = true;
    let mut comps: BTreeMap<(usize, usize), Series> = BTreeMap::new();
    let even = n % 2 == 0;
    let s = n / 2;
    for (ai, &a) in dual.iter().enumerate() {
        for &b in &dual[ai..] {
            let hab = g.g(a, b).clone();
            let mut series;
            if !even {
                let (part, fin) = partial_solution(&hab, &lap, n, Sign::Minus, k_max)?;
                series = part;
                finite &= fin;
            } else {
                let (part, _) = partial_solution(&hab, &lap, n, Sign::Minus, s - 1)?;
                series = part;
                let mut ds = hab.clone();
                for _ in 0..s {
                    ds = lap(&ds);
                }
                if !ds.is_zero() {
                    let cn = ppwave_log_c(n)?;
                    if !opts.log_branch {
                        let ob = ds.scale(&(cn * Q::new((-(n as i64)).into(), 2.into())));
                        return Err(AmbientError::Obstructed {
                            order: s - 1,
                            witness: format!("O[{},{}] = {}", c[a], c[b], ob),
                        });
                    }
                    // c_n ρ^s Σ_k (log ρ − q_k) Δ^{s+k}H ρ^k / (k! ∏_{i=1}^k (2i+n))
                    let mut dk = ds;
                    let mut den = Q::one();
                    let mut k = 0usize;
                    loop {
                        let e2 = 2 * (s + k) as i32;
                        if e2 >= trunc {
                            finite = false;
                            break;
                        }
                        let coef = dk.scale(&(cn.clone() / den.clone()));
                        series.insert(e2, 1, coef.clone());
                        let qk = opts.q0.add(&RatFunc::from_q(ppwave_q(n, k)));
                        series.insert(e2, 0, coef.mul(&qk).neg());
                        k += 1;
                        dk = lap(&dk);
                        if dk.is_zero() {
                            break;
                        }
                        den *= qi(k as i64) * qi(2 * k as i64 + n as i64);
                    }
                }
            }
            if let Some(alpha) = opts.alpha.get(&(a, b)) {
                let (plus, fin) = partial_solution(alpha, &lap, n, Sign::Plus, k_max)?;
                finite &= fin;
                let branch = Series::constant(alpha.clone()).add(&plus).shift(n as i32);
                series = series.add(&branch);
            }
            comps.insert((a, b), series);
        }
    }
    let final_trunc = if finite { EXACT } else { trunc };
    let h = TensorField::from_fn(n, &[Slot::Down, Slot::Down], |x| {
        let key = (x[0].min(x[1]), x[0].max(x[1]));
        comps
            .get(&key)
            .cloned()
            .unwrap_or_else(Series::exact)
            .with_trunc(final_trunc)
    });
    AmbientMetric::new(g.clone(), h)
}

#[derive(Clone, Debug)]
pub struct LeftInvariantOptions {
    /// Names of the exponential coordinates of the realization.
    pub coords: Vec<String>,
    /// Data `F_āc̄` in the realized coordinates, keyed by frame indices
    /// `(ā, c̄)` with `ā ≤ c̄` in the dual block.
    pub f: BTreeMap<(usize, usize), RatFunc>,
    /// Series truncation for the `F₊` terms: through `ρ^order`.
    pub order: usize,
}

/// A left-invariant ambient metric with the data it was built from.
#[derive(Clone, Debug)]
pub struct LeftInvariantAmbient {
    pub realization: Realization,
    pub ambient: AmbientMetric,
    /// Frame components of the base Ricci tensor.
    pub frame_ricci: TensorField<RatFunc>,
    pub nrw: CheckList,
    /// Frame components `h_āc̄` of the perturbation.
    pub frame_h: BTreeMap<(usize, usize), Series>,
}

/// `h = (2ρ/(n−2)) Ric + ρ^{n/2}(F + F₊)` on the `Θ^ā Θ^c̄` block of a
/// null-Ricci-Walker left-invariant metric, with `F₊` built from the
/// Laplacian of the base metric.
pub fn left_invariant_ambient(f: &FrameData, opts: &LeftInvariantOptions) -> Result<LeftInvariantAmbient, AmbientError> {
    let n = f.dim();
    if n < 3 {
        return Err(AmbientError::Invalid(format!("n must be at least 3, got {}", n)));
    }
    let nrw = nrw_conditions(f)?;
    let key = "null Ricci Walker (image of Ric in N)";
    if nrw.passed(key) != Some(true) {
        return Err(AmbientError::Precondition(format!(
            "frame is not null Ricci Walker: {}",
            nrw.get(key).and_then(|c| c.witness.clone()).unwrap_or_default()
        )));
    }
    let coords: Vec<&str> = opts.coords.iter().map(|s| s.as_str()).collect();
    let real = realize_nilpotent(f, &coords)?;
    let ric = frame_ricci(&real.frame)?;
    let geo = Geometry::new(real.metric.clone());
    let lap = |c: &RatFunc| laplacian(&geo, c);
    let duals: Vec<usize> = real.frame.dual_range().collect();
    for ((a, b), fab) in &opts.f {
        if !duals.contains(a) || !duals.contains(b) || a > b {
            return Err(AmbientError::Invalid(format!(
                "F entries must be keyed by dual-block frame pairs (a <= b), got ({}, {})",
                a, b
            )));
        }
        for i in real.frame.null_range() {
            let d = real.frame.derivative(i, fab)?;
            if !d.is_zero() {
                return Err(AmbientError::Precondition(format!(
                    "dF_({},{})(e_{}) = {} is not zero",
                    a, b, i, d
                )));
            }
        }
    }
    let lin = Q::new(2.into(), (n as i64 - 2).into());
    let trunc = 2 * (opts.order as i32 + 1);
    let mut frame_h = BTreeMap::new();
    for (ai, &a) in duals.iter().enumerate() {
        for &b in &duals[ai..] {
            let mut s = Series::term(2, 0, ric.get(&[a, b]).scale(&lin));
            if let Some(fab) = opts.f.get(&(a, b)) {
                let (plus, fin) = partial_solution(fab, &lap, n, Sign::Plus, opts.order)?;
                let mut branch = Series::constant(fab.clone()).add(&plus).shift(n as i32);
                if !fin {
                    branch = branch.with_trunc(trunc);
                }
                s = s.add(&branch);
            }
            frame_h.insert((a, b), s);
        }
    }
    let theta = &real.coframe;
    let h = TensorField::from_fn(n, &[Slot::Down, Slot::Down], |x| {
        let (mu, nu) = (x[0], x[1]);
        let mut v = Series::exact();
        for (&(a, b), s) in &frame_h {
            let mut w = theta[a][mu].mul(&theta[b][nu]);
            if a != b {
                w = w.add(&theta[b][mu].mul(&theta[a][nu]));
            }
            if !w.is_zero() {
                v = v.add(&s.mul_coeff(&w));
            }
        }
        v
    });
    let ambient = AmbientMetric::new(real.metric.clone(), h)?;
    Ok(LeftInvariantAmbient {
        realization: real,
        ambient,
        frame_ricci: ric,
        nrw,
        frame_h,
    })
}

/// `g̃ = 2dt d(ρt) + t²(1 + Λρ/(2(n−1)))² g` for an Einstein metric with
/// `Ric = Λg`.
pub fn einstein_ambient(g: &Metric<RatFunc>, lambda: &Q) -> Result<AmbientMetric, AmbientError> {
    let n = g.dim();
    if n < 2 {
        return Err(AmbientError::Invalid(format!("n must be at least 2, got {}", n)));
    }
    let geo = Geometry::new(g.clone());
    let defect = geo.ricci().sub(&g.tensor().mul_scalar(&RatFunc::from_q(lambda.clone())))?;
    if let Some((idx, v)) = defect.first_nonzero() {
        return Err(AmbientError::Precondition(format!(
            "metric is not Einstein with constant {}: (Ric - lambda g)[{},{}] = {}",
            lambda,
            g.coords()[idx[0]],
            g.coords()[idx[1]],
            v
        )));
    }
    let a = lambda.clone() / qi(n as i64 - 1);
    let b = a.clone() * a.clone() / qi(4);
    let h = TensorField::from_fn(n, &[Slot::Down, Slot::Down], |x| {
        let gij = g.g(x[0], x[1]);
        let mut s = Series::exact();
        s.insert(2, 0, gij.scale(&a));
        s.insert(4, 0, gij.scale(&b));
        s
    });
    AmbientMetric::new(g.clone(), h)
}

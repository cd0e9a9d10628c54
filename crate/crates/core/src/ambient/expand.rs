//! Order-by-order solution of the ambient equations and the obstruction
//! tensor.
//!
//! With `g^{(k)} = G` unknown and all lower coefficients fixed, the `ρ^{k−1}`
//! coefficient of `E1` reads `k(k − n/2) G − (k/2) tr(G) g0 + R = 0`, where
//! `R` is that coefficient computed with `G = 0`. Tracing with `g0` gives
//! `k(k − n) tr(G) = −tr(R)`; at `k = n` this is degenerate and the trace is
//! taken from the `ρ^{k−2}` coefficient of `E3` instead, which contains
//! `k(k − 1) tr(G)`. For even `n` the scalar factor vanishes at `k = n/2`;
//! there the trace-free part of `R` is the obstruction.

use num_traits::One;

use crate::expr::{q, qi, Q};
use crate::frame::walker_check_coordinates;
use crate::ratfunc::RatFunc;
use crate::report::{Check, CheckList};
use crate::scalar::Scalar;
use crate::tensor::{Geometry, Metric, Slot, TensorField};

use super::residuals::e1_of;
use super::{lift, AmbientError, AmbientMetric, Series};

/// Ratio between the obstruction tensor in the normalization of the worked
/// signature (2,2) example and the canonical one
/// `(ρ^{1−n/2} Ric(g̃)|_{TM⊗TM})|_{ρ=0}`.
pub fn obstruction_norm() -> Q {
    qi(-1)
}

/// For null-Ricci-Walker bases whose curvature satisfies the null
/// contraction condition, the canonical obstruction is
/// `nrw_box_c(n) □^{n/2−1} Ric`. From the linear recursion
/// `h_1 = 2Ric/(n−2)`, `h_k = □h_{k−1} / (2k(k − n/2))` and
/// `𝒪 = −½ □h_{n/2−1}`.
pub fn nrw_box_c(n: usize) -> Result<Q, AmbientError> {
    if n % 2 != 0 || n < 4 {
        return Err(AmbientError::Invalid(format!("nrw_box_c needs even n >= 4, got {}", n)));
    }
    let s = (n / 2) as i64;
    let mut den = qi(n as i64 - 2);
    for k in 2..s {
        den *= qi(2 * k * (k - s));
    }
    Ok(-Q::one() / den)
}

/// Default expansion order: `2n` for odd `n`, `n/2 − 1` for even `n`.
pub fn default_order(n: usize) -> usize {
    if n % 2 == 1 {
        2 * n
    } else {
        n / 2 - 1
    }
}

#[derive(Clone, Debug, Default)]
pub struct ExpandOptions {
    /// Highest coefficient to compute; defaults to [`default_order`].
    pub order: Option<usize>,
    /// Trace-free part of `g^{(n/2)}` for even `n`, the free datum that
    /// allows continuing past the barrier when the obstruction vanishes.
    pub trace_free_choice: Option<TensorField<RatFunc>>,
}

/// Obstruction tensor in the canonical normalization together with the
/// trace- and divergence-freeness checks run on it.
#[derive(Clone, Debug)]
pub struct ObstructionTensor {
    pub canonical: TensorField<RatFunc>,
    pub checks: CheckList,
}

impl ObstructionTensor {
    pub fn normalized(&self, c: &Q) -> TensorField<RatFunc> {
        self.canonical.scale(c)
    }

    /// The normalization of the worked signature (2,2) example.
    pub fn paper_normalized(&self) -> TensorField<RatFunc> {
        self.normalized(&obstruction_norm())
    }

    pub fn is_zero(&self) -> bool {
        self.canonical.is_zero()
    }
}

/// Coefficients `g^{(1)}, …, g^{(m)}` of `g(ρ) = g0 + Σ g^{(k)} ρ^k`.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub base: Metric<RatFunc>,
    pub coefficients: Vec<TensorField<RatFunc>>,
    /// Present for even `n` when the expansion reached order `n/2`.
    pub obstruction: Option<ObstructionTensor>,
}

impl Expansion {
    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    /// `g^{(k)}` for `1 ≤ k ≤ order`.
    pub fn coefficient(&self, k: usize) -> &TensorField<RatFunc> {
        &self.coefficients[k - 1]
    }

    /// `h = Σ_{k ≤ m} g^{(k)} ρ^k`, known below `ρ^{m+1}`.
    pub fn h(&self) -> TensorField<Series> {
        partial_sum(&self.base, &self.coefficients, 2 * (self.order() as i32 + 1))
    }

    pub fn ambient(&self) -> Result<AmbientMetric, AmbientError> {
        AmbientMetric::new(self.base.clone(), self.h())
    }
}

fn partial_sum(g0: &Metric<RatFunc>, coeffs: &[TensorField<RatFunc>], trunc: i32) -> TensorField<Series> {
    let n = g0.dim();
    TensorField::from_fn(n, &[Slot::Down, Slot::Down], |x| {
        let mut s = Series::zero_to(trunc);
        for (k, c) in coeffs.iter().enumerate() {
            s.insert(2 * (k as i32 + 1), 0, c.get(x).clone());
        }
        s
    })
}

fn g_series(g0: &Metric<RatFunc>, coeffs: &[TensorField<RatFunc>], trunc: i32) -> Result<Metric<Series>, AmbientError> {
    let n = g0.dim();
    let h = partial_sum(g0, coeffs, trunc);
    let rows = (0..n)
        .map(|i| (0..n).map(|j| lift(g0.g(i, j)).add(h.get(&[i, j]))).collect())
        .collect();
    Ok(Metric::new(g0.coords().to_vec(), rows)?)
}

/// `ρ^{k−1}` coefficient of `E1` with `g^{(k)} = 0`, and, on request, the
/// `ρ^{k−2}` coefficient of `E3`.
fn step_data(
    g0: &Metric<RatFunc>,
    coeffs: &[TensorField<RatFunc>],
    k: usize,
    want_e3: bool,
) -> Result<(TensorField<RatFunc>, Option<RatFunc>), AmbientError> {
    let k = k as i32;
    let g = g_series(g0, coeffs, 2 * (k + 1))?;
    let (e1, gd, _, _) = e1_of(&g);
    let r = super::coefficient(&e1, 2 * (k - 1), 0);
    let s = if want_e3 {
        let gdd = gd.map(|s| s.d_rho());
        let mut e3 = g.trace(&gdd)?;
        let gdu = g.raise(&gd, 0)?;
        let n = g.dim();
        let mut sq = Series::exact();
        for a in 0..n {
            for b in 0..n {
                sq.mul_add(gdu.get(&[a, b]), gdu.get(&[b, a]));
            }
        }
        e3 = e3.sub(&sq.scale(&q(1, 2)));
        Some(e3.coeff(2 * (k - 2), 0))
    } else {
        None
    };
    Ok((r, s))
}

fn trace_free_part(g0: &Metric<RatFunc>, t: &TensorField<RatFunc>) -> Result<TensorField<RatFunc>, AmbientError> {
    let n = g0.dim();
    let tr = g0.trace(t)?.scale(&q(1, n as i64));
    Ok(t.sub(&g0.tensor().mul_scalar(&tr))?)
}

fn witness(g0: &Metric<RatFunc>, t: &TensorField<RatFunc>) -> String {
    match t.first_nonzero() {
        Some((idx, v)) => {
            let c = g0.coords();
            format!("[{},{}] = {}", c[idx[0]], c[idx[1]], v)
        }
        None => "0".into(),
    }
}

fn obstruction_from(g0: &Metric<RatFunc>, canonical: TensorField<RatFunc>) -> Result<ObstructionTensor, AmbientError> {
    let mut checks = CheckList::new();
    let tr = g0.trace(&canonical)?;
    checks.push(Check::assertion(
        "obstruction is trace free",
        tr.is_zero(),
        (!tr.is_zero()).then(|| format!("trace = {}", tr)),
    ));
    let geo = Geometry::new(g0.clone());
    let div = geo.divergence(&canonical)?;
    let w = div.first_nonzero().map(|(i, v)| format!("div[{}] = {}", g0.coords()[i[0]], v));
    checks.push(Check::assertion("obstruction is divergence free", w.is_none(), w));
    Ok(ObstructionTensor { canonical, checks })
}

/// Solve for `g^{(1)}, …, g^{(m)}`.
pub fn expand_generic(g0: &Metric<RatFunc>, opts: &ExpandOptions) -> Result<Expansion, AmbientError> {
    let n = g0.dim();
    if n < 3 {
        return Err(AmbientError::Invalid(format!("expansion needs n >= 3, got {}", n)));
    }
    AmbientMetric::trivial(g0.clone())?;
    let m = opts.order.unwrap_or_else(|| default_order(n));
    let even = n % 2 == 0;
    let s = n / 2;
    if let Some(c) = &opts.trace_free_choice {
        if !even {
            return Err(AmbientError::Invalid("a trace-free choice only applies to even n".into()));
        }
        if c.dim() != n || c.slots() != [Slot::Down, Slot::Down] || !c.is_symmetric_in(0, 1) {
            return Err(AmbientError::Invalid("the trace-free choice must be a symmetric (0,2) tensor".into()));
        }
        let tr = g0.trace(c)?;
        if !tr.is_zero() {
            return Err(AmbientError::Invalid(format!("the choice is not trace free: trace = {}", tr)));
        }
    }
    let mut coeffs: Vec<TensorField<RatFunc>> = Vec::with_capacity(m);
    let mut obstruction = None;
    for k in 1..=m {
        let kq = qi(k as i64);
        let degenerate_trace = k == n;
        let (r, s3) = step_data(g0, &coeffs, k, degenerate_trace)?;
        let tr_r = g0.trace(&r)?;
        if even && k == s {
            let ob = obstruction_from(g0, trace_free_part(g0, &r)?)?;
            let choice = match &opts.trace_free_choice {
                Some(c) if ob.is_zero() => c.clone(),
                Some(_) => {
                    return Err(AmbientError::Obstructed {
                        order: s - 1,
                        witness: witness(g0, &ob.canonical),
                    })
                }
                None => {
                    return Err(AmbientError::OrderBarrier {
                        barrier: s - 1,
                        barrier_next: s,
                        obstruction: witness(g0, &ob.canonical),
                    })
                }
            };
            let t = tr_r.scale(&q(4, (n * n) as i64));
            let g = g0.tensor().mul_scalar(&t.scale(&q(1, n as i64))).add(&choice)?;
            obstruction = Some(ob);
            coeffs.push(g);
            continue;
        }
        let t = if degenerate_trace {
            s3.expect("requested").neg().scale(&(Q::one() / (kq.clone() * qi(k as i64 - 1))))
        } else {
            tr_r.neg().scale(&(Q::one() / (kq.clone() * qi(k as i64 - n as i64))))
        };
        let lead = kq.clone() * q(2 * k as i64 - n as i64, 2);
        let g = g0
            .tensor()
            .mul_scalar(&t.scale(&(kq / qi(2))))
            .sub(&r)?
            .scale(&(Q::one() / lead));
        coeffs.push(g);
    }
    Ok(Expansion {
        base: g0.clone(),
        coefficients: coeffs,
        obstruction,
    })
}

/// Canonical obstruction tensor of an even-dimensional metric.
pub fn obstruction(g0: &Metric<RatFunc>) -> Result<ObstructionTensor, AmbientError> {
    let n = g0.dim();
    if n % 2 != 0 || n < 4 {
        return Err(AmbientError::Invalid(format!(
            "the obstruction tensor is defined for even n >= 4, got {}",
            n
        )));
    }
    let s = n / 2;
    let lower = expand_generic(
        g0,
        &ExpandOptions {
            order: Some(s - 1),
            trace_free_choice: None,
        },
    )?;
    let (r, _) = step_data(g0, &lower.coefficients, s, false)?;
    obstruction_from(g0, trace_free_part(g0, &r)?)
}

/// Whether `T^♯` maps into the span of the first `p` coordinate fields;
/// returns a violating component otherwise.
pub(crate) fn image_witness(g0: &Metric<RatFunc>, t: &TensorField<RatFunc>, p: usize) -> Option<String> {
    let n = g0.dim();
    let c = g0.coords();
    for i in p..n {
        for j in 0..n {
            let mut v = RatFunc::zero();
            for k in 0..n {
                v.mul_add(g0.inv(i, k), t.get(&[k, j]));
            }
            if !v.is_zero() {
                return Some(format!("(T^sharp)^{}_{} = {}", c[i], c[j], v));
            }
        }
    }
    None
}

/// Audit of the structure of the expansion on a null-Ricci-Walker base in
/// Walker coordinates of rank `p`: every coefficient is divergence free with
/// image in the null distribution, and so is the obstruction for even `n`.
pub fn theorem_theo2_audit(
    g0: &Metric<RatFunc>,
    p: usize,
    coefficients: &[TensorField<RatFunc>],
    obstruction: Option<&TensorField<RatFunc>>,
) -> Result<CheckList, AmbientError> {
    let walker = walker_check_coordinates(g0, p)?;
    if let Some(c) = walker.first_failure() {
        return Err(AmbientError::Precondition(format!(
            "base is not Walker of rank {}: {} fails",
            p, c.name
        )));
    }
    let geo = Geometry::new(g0.clone());
    if let Some(w) = image_witness(g0, geo.ricci(), p) {
        return Err(AmbientError::Precondition(format!(
            "base is not null Ricci Walker: {}",
            w
        )));
    }
    let mut out = CheckList::new();
    for (i, c) in coefficients.iter().enumerate() {
        let k = i + 1;
        let w = image_witness(g0, c, p);
        out.push(Check::assertion(format!("image of g^({}) in N", k), w.is_none(), w));
        let div = geo.divergence(c)?;
        let w = div.first_nonzero().map(|(i, v)| format!("div[{}] = {}", g0.coords()[i[0]], v));
        out.push(Check::assertion(format!("g^({}) divergence free", k), w.is_none(), w));
    }
    if let Some(o) = obstruction {
        let w = image_witness(g0, o, p);
        out.push(Check::assertion("image of obstruction in N", w.is_none(), w));
    }
    Ok(out)
}

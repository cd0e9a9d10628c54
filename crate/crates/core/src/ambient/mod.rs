//! Ambient metrics `2 dt d(ρt) + t² g(x, ρ)` with `g(ρ) = g0 + h(ρ)`:
//! Fefferman–Graham residuals, the order-by-order solver, the obstruction
//! tensor, the nilpotent fast path and closed-form families.
//!
//! Series coefficients follow the convention `g(ρ) = Σ_k g^{(k)} ρ^k`, so
//! `g^{(1)} = 2𝖯`.

mod closed;
mod expand;
mod nilpotent;
mod residuals;

pub use closed::{
    d_operator, delta_minus, einstein_ambient, laplacian, left_invariant_ambient, ppwave_ambient,
    ppwave_log_c, ppwave_q, series_solution, LeftInvariantAmbient, LeftInvariantOptions,
    PpWaveOptions, Sign,
};
pub use expand::{
    expand_generic, nrw_box_c, obstruction, obstruction_norm, theorem_theo2_audit, ExpandOptions,
    Expansion, ObstructionTensor,
};
pub use nilpotent::{linear_operator_a, nilpotent_ricci, quad_residual, NilpotentRicci, QuadResidual};
pub use residuals::{ambient_ricci_direct, fg_residuals, FGResiduals};

use thiserror::Error;

use crate::expr::RHO;
use crate::frame::FrameError;
use crate::ratfunc::RatFunc;
use crate::scalar::Scalar;
use crate::series::{RhoSeries, EXACT};
use crate::tensor::{Metric, Slot, TensorError, TensorField};

/// ρ-series with rational-function coefficients.
pub type Series = RhoSeries<RatFunc>;

/// Name of the homogeneous coordinate of the ambient space.
pub const T: &str = "t";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AmbientError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("insufficient truncation: need h known below rho^{needed}/2 (doubled), have {available}")]
    Truncation { needed: i32, available: i32 },
    #[error("even-dimensional expansion stops at order {barrier}: pass a trace-free choice for the rho^{barrier_next} coefficient to continue (canonical obstruction: {obstruction})")]
    OrderBarrier {
        barrier: usize,
        barrier_next: usize,
        obstruction: String,
    },
    #[error("obstructed: the canonical obstruction tensor is nonzero ({witness}); no analytic continuation past order {order}")]
    Obstructed { order: usize, witness: String },
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Constant series.
pub fn lift(c: &RatFunc) -> Series {
    Series::constant(c.clone())
}

/// Componentwise constant series.
pub fn lift_tensor(t: &TensorField<RatFunc>) -> TensorField<Series> {
    TensorField::from_fn(t.dim(), t.slots(), |i| lift(t.get(i)))
}

/// The base metric over the series ring, reusing its exact inverse.
pub fn lift_metric(g0: &Metric<RatFunc>) -> Result<Metric<Series>, TensorError> {
    let n = g0.dim();
    let rows = (0..n).map(|i| (0..n).map(|j| lift(g0.g(i, j))).collect()).collect();
    let inv = (0..n).map(|i| (0..n).map(|j| lift(g0.inv(i, j))).collect()).collect();
    Metric::with_inverse(g0.coords().to_vec(), rows, inv, lift(g0.det()))
}

/// Coefficient of `ρ^(e2/2) log(ρ)^k` in every component.
pub fn coefficient(t: &TensorField<Series>, e2: i32, k: u32) -> TensorField<RatFunc> {
    TensorField::from_fn(t.dim(), t.slots(), |i| t.get(i).coeff(e2, k))
}

/// Smallest truncation over all components.
pub fn tensor_trunc(t: &TensorField<Series>) -> i32 {
    t.components().iter().map(|s| s.trunc()).min().unwrap_or(EXACT)
}

pub fn truncate_tensor(t: &TensorField<Series>, trunc: i32) -> TensorField<Series> {
    t.map(|s| s.truncate(trunc))
}

/// Apply a linear map of rational-function tensors to every coefficient of a
/// series-valued tensor. The result keeps the input truncation.
pub fn map_coefficients<F>(t: &TensorField<Series>, out_slots: &[Slot], f: F) -> TensorField<Series>
where
    F: Fn(&TensorField<RatFunc>) -> TensorField<RatFunc>,
{
    let n = t.dim();
    let mut keys: Vec<(i32, u32)> = t
        .components()
        .iter()
        .flat_map(|s| s.terms().map(|(k, _)| *k).collect::<Vec<_>>())
        .collect();
    keys.sort_unstable();
    keys.dedup();
    let trunc = tensor_trunc(t);
    let mut out = TensorField::from_fn(n, out_slots, |_| Series::zero_to(trunc));
    for (e2, k) in keys {
        let image = f(&coefficient(t, e2, k));
        for (idx, c) in image.iter() {
            if !c.is_zero() {
                out.add_at(&idx, &Series::term(e2, k, c.clone()));
            }
        }
    }
    out
}

/// First nonzero component of a series tensor below the doubled exponent
/// `below`, formatted as a witness.
pub fn first_nonzero_below(
    t: &TensorField<Series>,
    below: i32,
    coords: &[String],
) -> Option<String> {
    for (idx, s) in t.iter() {
        let low = s.truncate(below);
        if !low.is_zero() {
            let names: Vec<&str> = idx.iter().map(|&i| coords[i].as_str()).collect();
            return Some(format!("[{}] = {}", names.join(","), low));
        }
    }
    None
}

/// An ambient metric in normal form. Coordinates of the ambient space are
/// ordered `(t, x^1, …, x^n, ρ)`.
#[derive(Clone, Debug)]
pub struct AmbientMetric {
    base: Metric<RatFunc>,
    h: TensorField<Series>,
}

impl AmbientMetric {
    /// Validate `h`: symmetric `(0,2)`, coefficients independent of `t` and
    /// `ρ`, and vanishing at `ρ = 0` (only positive powers occur).
    pub fn new(base: Metric<RatFunc>, h: TensorField<Series>) -> Result<Self, AmbientError> {
        let n = base.dim();
        if base.coords().iter().any(|c| c == T || c == RHO) {
            return Err(AmbientError::Invalid(format!(
                "base coordinates may not be named {} or {}",
                T, RHO
            )));
        }
        if h.dim() != n || h.slots() != [Slot::Down, Slot::Down] {
            return Err(AmbientError::Invalid("h must be a (0,2) tensor on the base".into()));
        }
        for i in 0..n {
            for j in i + 1..n {
                if h.get(&[i, j]).sub(h.get(&[j, i])).truncate(tensor_trunc(&h)).is_zero() {
                    continue;
                }
                return Err(AmbientError::Invalid(format!("h is not symmetric at [{},{}]", i, j)));
            }
        }
        for (idx, s) in h.iter() {
            for ((e2, _), c) in s.terms() {
                if *e2 <= 0 {
                    return Err(AmbientError::Invalid(format!(
                        "h[{},{}] does not vanish at rho = 0",
                        idx[0], idx[1]
                    )));
                }
                if c.depends_on(T) || c.depends_on(RHO) {
                    return Err(AmbientError::Invalid(format!(
                        "coefficients of h[{},{}] depend on t or rho",
                        idx[0], idx[1]
                    )));
                }
            }
        }
        Ok(AmbientMetric { base, h })
    }

    /// The ambient metric with `h = 0`.
    pub fn trivial(base: Metric<RatFunc>) -> Result<Self, AmbientError> {
        let n = base.dim();
        let h = TensorField::from_fn(n, &[Slot::Down, Slot::Down], |_| Series::exact());
        Self::new(base, h)
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn base(&self) -> &Metric<RatFunc> {
        &self.base
    }

    pub fn h(&self) -> &TensorField<Series> {
        &self.h
    }

    /// Doubled exponent below which `h` is known.
    pub fn trunc(&self) -> i32 {
        tensor_trunc(&self.h)
    }

    /// Coefficient `g^{(k)}` of the integer power `ρ^k`.
    pub fn coefficient(&self, k: i32) -> TensorField<RatFunc> {
        coefficient(&self.h, 2 * k, 0)
    }

    /// `g(ρ) = g0 + h(ρ)` as a series metric truncated at `trunc`.
    pub fn g_rho(&self, trunc: i32) -> Result<Metric<Series>, AmbientError> {
        let n = self.dim();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| lift(self.base.g(i, j)).add(self.h.get(&[i, j])).truncate(trunc))
                    .collect()
            })
            .collect();
        Ok(Metric::new(self.base.coords().to_vec(), rows)?)
    }

    fn ambient_coords(&self) -> Vec<String> {
        let mut c = vec![T.to_string()];
        c.extend(self.base.coords().iter().cloned());
        c.push(RHO.to_string());
        c
    }

    /// The `(n+2)`-dimensional metric over the series ring with the `ij`
    /// block truncated at `trunc`.
    pub fn ambient_metric(&self, trunc: i32) -> Result<Metric<Series>, AmbientError> {
        let n = self.dim();
        let t = RatFunc::from_expr(crate::expr::Expr::var(T));
        let t2 = t.mul(&t);
        let mut rows = vec![vec![Series::exact(); n + 2]; n + 2];
        rows[0][0] = Series::term(2, 0, RatFunc::from_q(crate::expr::qi(2)));
        rows[0][n + 1] = lift(&t);
        rows[n + 1][0] = lift(&t);
        for i in 0..n {
            for j in 0..n {
                rows[i + 1][j + 1] = lift(self.base.g(i, j))
                    .add(self.h.get(&[i, j]))
                    .mul_coeff(&t2)
                    .truncate(trunc);
            }
        }
        Ok(Metric::new(self.ambient_coords(), rows)?)
    }

    /// The ambient metric over rational functions in `(t, x, ρ)`; requires
    /// an exact `h` with integer powers of `ρ` and no logarithms.
    pub fn exact_ambient_metric(&self) -> Result<Metric<RatFunc>, AmbientError> {
        let n = self.dim();
        let rho = RatFunc::from_expr(crate::expr::Expr::var(RHO));
        let t = RatFunc::from_expr(crate::expr::Expr::var(T));
        let t2 = t.mul(&t);
        let mut rows = vec![vec![RatFunc::zero(); n + 2]; n + 2];
        rows[0][0] = rho.scale(&crate::expr::qi(2));
        rows[0][n + 1] = t.clone();
        rows[n + 1][0] = t;
        for i in 0..n {
            for j in 0..n {
                let s = self.h.get(&[i, j]);
                if !s.is_exact() {
                    return Err(AmbientError::Precondition(
                        "exact ambient metric needs an exact h".into(),
                    ));
                }
                let mut v = self.base.g(i, j).clone();
                for ((e2, k), c) in s.terms() {
                    if *k != 0 || e2 % 2 != 0 {
                        return Err(AmbientError::Precondition(
                            "exact ambient metric needs integer powers of rho without logs".into(),
                        ));
                    }
                    v = v.add(&c.mul(&rho.pow((*e2 / 2) as u32)));
                }
                rows[i + 1][j + 1] = v.mul(&t2);
            }
        }
        Ok(Metric::new(self.ambient_coords(), rows)?)
    }
}

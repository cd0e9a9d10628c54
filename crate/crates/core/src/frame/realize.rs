//! Left-invariant frames of nilpotent Lie groups in exponential
//! coordinates of the second kind, `g(x) = exp(x^1 X_1) ⋯ exp(x^n X_n)`.
//!
//! The Maurer–Cartan form is
//! `g⁻¹dg = Σ_m e^{−x^n ad X_n} ⋯ e^{−x^{m+1} ad X_{m+1}} X_m dx^m`, whose
//! components are polynomial when every `ad X_i` is nilpotent.

use crate::expr::{q, Expr, Q};
use crate::ratfunc::RatFunc;
use crate::scalar::Scalar;
use crate::tensor::{invert_matrix, Metric};

use super::{FrameData, FrameError, VectorFields};

use num_traits::Zero;

#[derive(Clone, Debug)]
pub struct Realization {
    /// The same frame with coordinate vector fields attached and structure
    /// functions recomputed from their brackets.
    pub frame: FrameData,
    pub metric: Metric<RatFunc>,
    /// Coframe components `theta[i][μ] = Θ^i_μ`.
    pub coframe: Vec<Vec<RatFunc>>,
}

/// `exp(−x ad X) v` for nilpotent `ad X`.
fn exp_ad(ad: &[Vec<Q>], x: &str, v: &[RatFunc]) -> Result<Vec<RatFunc>, FrameError> {
    let n = v.len();
    let mut out = v.to_vec();
    let mut term = v.to_vec();
    let xe = RatFunc::from_expr(Expr::var(x));
    for k in 1..=n + 1 {
        let mut next = vec![RatFunc::zero(); n];
        for (i, slot) in next.iter_mut().enumerate() {
            for (j, t) in term.iter().enumerate() {
                if !ad[i][j].is_zero() && !t.is_zero() {
                    slot.add_assign(&t.scale(&ad[i][j]));
                }
            }
        }
        if next.iter().all(|c| c.is_zero()) {
            return Ok(out);
        }
        if k == n + 1 {
            break;
        }
        // multiply by −x/k
        term = next.iter().map(|c| c.mul(&xe).scale(&q(-1, k as i64))).collect();
        for (o, t) in out.iter_mut().zip(&term) {
            o.add_assign(t);
        }
    }
    Err(FrameError::Precondition(format!(
        "ad of the basis vector paired with coordinate {} is not nilpotent",
        x
    )))
}

/// Realize a frame with constant structure constants as left-invariant
/// vector fields on the corresponding nilpotent group.
pub fn realize_nilpotent(f: &FrameData, coords: &[&str]) -> Result<Realization, FrameError> {
    let n = f.dim();
    if coords.len() != n {
        return Err(FrameError::Invalid(format!(
            "need {} coordinate names, got {}",
            n,
            coords.len()
        )));
    }
    if !f.has_constant_structure() {
        return Err(FrameError::Precondition(
            "structure functions must be constant".into(),
        ));
    }
    let constant = |k: usize, i: usize, j: usize| -> Q {
        f.r(k, i, j)
            .as_expr()
            .and_then(|e| e.as_constant())
            .unwrap_or_else(Q::zero)
    };
    // ad[m][k][j] = r^k_mj
    let ad: Vec<Vec<Vec<Q>>> = (0..n)
        .map(|m| {
            (0..n)
                .map(|k| (0..n).map(|j| constant(k, m, j)).collect())
                .collect()
        })
        .collect();
    // theta[i][m] = Θ^i_m
    let mut theta = vec![vec![RatFunc::zero(); n]; n];
    for m in 0..n {
        let mut v = vec![RatFunc::zero(); n];
        v[m] = RatFunc::one();
        for s in m + 1..n {
            v = exp_ad(&ad[s], coords[s], &v)?;
        }
        for (i, c) in v.into_iter().enumerate() {
            theta[i][m] = c;
        }
    }
    // e_i = Σ_m (Θ⁻¹)^m_i ∂_m
    let (_, tinv) = invert_matrix(&theta)?;
    let comps: Vec<Vec<RatFunc>> = (0..n)
        .map(|i| (0..n).map(|m| tinv[m][i].clone()).collect())
        .collect();
    let frame = FrameData::from_vector_fields(
        f.rank(),
        f.metric_matrix().to_vec(),
        VectorFields {
            coords: coords.iter().map(|s| s.to_string()).collect(),
            comps,
        },
    )?;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if frame.r(k, i, j) != f.r(k, i, j) {
                    return Err(FrameError::Precondition(format!(
                        "realized brackets disagree at r^{}_({},{})",
                        k + 1,
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
    }
    let metric = frame.coordinate_metric()?;
    Ok(Realization {
        frame,
        metric,
        coframe: theta,
    })
}

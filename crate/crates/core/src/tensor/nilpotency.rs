//! Algebraic diagnostics for symmetric 2-tensors whose associated
//! endomorphism squares to zero.

use crate::scalar::Scalar;

use super::{Geometry, Metric, Slot, TensorError, TensorField};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NilpotencyReport {
    pub symmetric: bool,
    pub trace_free: bool,
    /// `h^i_k h^k_j = 0`.
    pub square_zero: bool,
    /// `g(h♯X, h♯Y) = 0` for all `X, Y`, i.e. `h_ik g^{kl} h_lj = 0`.
    pub image_totally_null: bool,
}

impl NilpotencyReport {
    pub fn nilpotent(&self) -> bool {
        self.symmetric && self.square_zero
    }
}

fn endomorphism_square<S: Scalar>(g0: &Metric<S>, h: &TensorField<S>) -> TensorField<S> {
    let n = g0.dim();
    let hs = g0.raise(h, 0).expect("slot 0 is covariant");
    TensorField::from_fn(n, &[Slot::Up, Slot::Down], |x| {
        let mut v = S::zero();
        for k in 0..n {
            v.mul_add(hs.get(&[x[0], k]), hs.get(&[k, x[1]]));
        }
        v
    })
}

fn image_form<S: Scalar>(g0: &Metric<S>, h: &TensorField<S>) -> TensorField<S> {
    let n = g0.dim();
    TensorField::from_fn(n, &[Slot::Down, Slot::Down], |x| {
        let mut v = S::zero();
        for k in 0..n {
            for l in 0..n {
                let gi = g0.inv(k, l);
                if gi.is_zero() {
                    continue;
                }
                v.mul_add(&h.get(&[x[0], k]).mul(gi), h.get(&[l, x[1]]));
            }
        }
        v
    })
}

/// Report on a symmetric `(0,2)` tensor relative to `g0`.
pub fn nilpotency_report<S: Scalar>(
    g0: &Metric<S>,
    h: &TensorField<S>,
) -> Result<NilpotencyReport, TensorError> {
    if h.slots() != [Slot::Down, Slot::Down] || h.dim() != g0.dim() {
        return Err(TensorError::RankMismatch(
            "nilpotency report needs a (0,2) tensor".into(),
        ));
    }
    Ok(NilpotencyReport {
        symmetric: h.is_symmetric_in(0, 1),
        trace_free: g0.trace(h)?.is_zero(),
        square_zero: endomorphism_square(g0, h).is_zero(),
        image_totally_null: image_form(g0, h).is_zero(),
    })
}

/// The four equivalent nilpotency conditions on Ricci and Schouten tensors,
/// together with scalar flatness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RicciNilpotency {
    pub ricci_square_zero: bool,
    pub schouten_square_zero: bool,
    pub schouten_image_null: bool,
    pub ricci_image_null: bool,
    pub scalar_flat: bool,
}

impl RicciNilpotency {
    pub fn all_equivalent(&self) -> bool {
        let v = self.ricci_square_zero;
        self.schouten_square_zero == v && self.schouten_image_null == v && self.ricci_image_null == v
    }
}

pub fn ricci_nilpotency<S: Scalar>(geo: &Geometry<S>) -> Result<RicciNilpotency, TensorError> {
    let g = geo.metric();
    let ric = nilpotency_report(g, geo.ricci())?;
    let p = nilpotency_report(g, &geo.schouten()?)?;
    Ok(RicciNilpotency {
        ricci_square_zero: ric.square_zero,
        schouten_square_zero: p.square_zero,
        schouten_image_null: p.image_totally_null,
        ricci_image_null: ric.image_totally_null,
        scalar_flat: geo.scalar().is_zero(),
    })
}

//! Formulas relating the connections and Ricci tensors of two metrics.

use crate::expr::q;
use crate::scalar::Scalar;

use super::{Geometry, Metric, Slot, Symmetry, TensorError, TensorField};

/// `C^k_ij = ½ g^{kl}(∇⁰_l g_ij − ∇⁰_i g_lj − ∇⁰_j g_il)`, so that
/// `∇_i X_j − ∇⁰_i X_j = C^k_ij X_k`. Equivalently `C = Γ(g0) − Γ(g)`.
pub fn connection_difference<S: Scalar>(
    g: &Metric<S>,
    g0: &Geometry<S>,
) -> Result<TensorField<S>, TensorError> {
    let n = g.dim();
    if g0.dim() != n || g0.metric().coords() != g.coords() {
        return Err(TensorError::DimensionMismatch(
            "metrics live on different coordinates".into(),
        ));
    }
    // dg[i,j,l] = ∇⁰_l g_ij
    let dg = g0.covariant_derivative(g.tensor());
    let half = q(1, 2);
    let mut c = TensorField::zeros(n, &[Slot::Up, Slot::Down, Slot::Down]);
    for i in 0..n {
        for j in i..n {
            let low: Vec<S> = (0..n)
                .map(|l| {
                    dg.get(&[i, j, l])
                        .sub(dg.get(&[l, j, i]))
                        .sub(dg.get(&[i, l, j]))
                        .scale(&half)
                })
                .collect();
            for k in 0..n {
                let mut v = S::zero();
                for (l, lv) in low.iter().enumerate() {
                    v.mul_add(g.inv(k, l), lv);
                }
                c.set(&[k, j, i], v.clone());
                c.set(&[k, i, j], v);
            }
        }
    }
    Ok(c.with_symmetry(Symmetry::Symmetric(1, 2)))
}

/// `R_ij = R⁰_ij + ∇⁰_i C^k_kj − ∇⁰_k C^k_ij + C^p_ij C^k_kp − C^p_jk C^k_ip`.
pub fn relative_ricci<S: Scalar>(
    g0: &Geometry<S>,
    c: &TensorField<S>,
) -> Result<TensorField<S>, TensorError> {
    let n = g0.dim();
    if c.dim() != n || c.slots() != [Slot::Up, Slot::Down, Slot::Down] {
        return Err(TensorError::RankMismatch(
            "connection difference must be a (1,2) tensor".into(),
        ));
    }
    if !c.is_symmetric_in(1, 2) {
        return Err(TensorError::NotSymmetric(1, 2));
    }
    // dc[k,i,j,l] = ∇⁰_l C^k_ij
    let dc = g0.covariant_derivative(c);
    let r0 = g0.ricci();
    let tr: Vec<S> = (0..n)
        .map(|p| {
            let mut s = S::zero();
            for k in 0..n {
                s.add_assign(c.get(&[k, k, p]));
            }
            s
        })
        .collect();
    let mut out = TensorField::zeros(n, &[Slot::Down, Slot::Down]);
    for i in 0..n {
        for j in 0..n {
            let mut v = r0.get(&[i, j]).clone();
            for k in 0..n {
                v.add_assign(dc.get(&[k, k, j, i]));
                v = v.sub(dc.get(&[k, i, j, k]));
            }
            for p in 0..n {
                v.mul_add(c.get(&[p, i, j]), &tr[p]);
                for k in 0..n {
                    let t = c.get(&[p, j, k]).mul(c.get(&[k, i, p]));
                    if !t.is_zero() {
                        v = v.sub(&t);
                    }
                }
            }
            out.set(&[i, j], v);
        }
    }
    Ok(out)
}

//! Metrics in coordinates with exact determinant and inverse.

use std::collections::HashMap;

use crate::scalar::Scalar;

use super::{Slot, TensorError, TensorField};

/// Determinants of the submatrices formed by `rows` (in order) and every
/// column subset of size `rows.len()`, keyed by column bitmask.
fn subset_minors<S: Scalar>(m: &[Vec<S>], rows: &[usize]) -> HashMap<u32, S> {
    let n = m.len();
    let mut layer: HashMap<u32, S> = HashMap::new();
    layer.insert(0, S::one());
    for (k, &r) in rows.iter().enumerate() {
        let mut next: HashMap<u32, S> = HashMap::new();
        for (mask, d) in &layer {
            if d.is_zero() {
                continue;
            }
            for j in 0..n {
                if mask & (1 << j) != 0 || m[r][j].is_zero() {
                    continue;
                }
                let new_mask = mask | (1 << j);
                // position of j among the columns of new_mask
                let p = (new_mask & ((1u32 << j) - 1)).count_ones() as usize;
                let term = m[r][j].mul(d);
                let term = if (k + p) % 2 == 1 { term.neg() } else { term };
                next.entry(new_mask).or_insert_with(S::zero).add_assign(&term);
            }
        }
        layer = next;
    }
    layer
}

/// Determinant by expansion over column subsets.
pub fn determinant<S: Scalar>(m: &[Vec<S>]) -> S {
    let n = m.len();
    if n == 0 {
        return S::one();
    }
    let rows: Vec<usize> = (0..n).collect();
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    subset_minors(m, &rows).remove(&full).unwrap_or_else(S::zero)
}

/// Adjugate matrix: `adj[j][i] = (-1)^(i+j) M_ij`.
pub fn adjugate<S: Scalar>(m: &[Vec<S>]) -> Vec<Vec<S>> {
    let n = m.len();
    let full = (1u32 << n) - 1;
    let mut adj = vec![vec![S::zero(); n]; n];
    if n == 1 {
        adj[0][0] = S::one();
        return adj;
    }
    for i in 0..n {
        let rows: Vec<usize> = (0..n).filter(|&r| r != i).collect();
        let minors = subset_minors(m, &rows);
        for j in 0..n {
            if let Some(mij) = minors.get(&(full & !(1 << j))) {
                let c = if (i + j) % 2 == 1 { mij.neg() } else { mij.clone() };
                adj[j][i] = c;
            }
        }
    }
    adj
}

/// Exact inverse via adjugate and determinant.
pub fn invert_matrix<S: Scalar>(m: &[Vec<S>]) -> Result<(S, Vec<Vec<S>>), TensorError> {
    let det = determinant(m);
    if det.is_zero() {
        return Err(TensorError::Singular);
    }
    let dinv = det.inv().ok_or(TensorError::NotInvertible)?;
    let adj = adjugate(m);
    let inv = adj
        .into_iter()
        .map(|row| row.into_iter().map(|x| x.mul(&dinv)).collect())
        .collect();
    Ok((det, inv))
}

/// A metric `g_ij` on named coordinates with cached inverse.
#[derive(Clone)]
pub struct Metric<S> {
    coords: Vec<String>,
    g: TensorField<S>,
    ginv: TensorField<S>,
    det: S,
}

impl<S: Scalar> Metric<S> {
    /// Validate symmetry and invert exactly.
    pub fn new(coords: Vec<String>, rows: Vec<Vec<S>>) -> Result<Self, TensorError> {
        let n = coords.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(TensorError::DimensionMismatch(format!(
                "metric matrix is not {}x{}",
                n, n
            )));
        }
        for i in 0..n {
            for j in i + 1..n {
                if rows[i][j] != rows[j][i] {
                    return Err(TensorError::NotSymmetric(i, j));
                }
            }
        }
        let (det, inv) = invert_matrix(&rows)?;
        Ok(Metric {
            coords,
            g: TensorField::from_matrix(&rows, [Slot::Down, Slot::Down]),
            ginv: TensorField::from_matrix(&inv, [Slot::Up, Slot::Up]),
            det,
        })
    }

    /// Use a known inverse, verified by multiplication.
    pub fn with_inverse(
        coords: Vec<String>,
        rows: Vec<Vec<S>>,
        inverse: Vec<Vec<S>>,
        det: S,
    ) -> Result<Self, TensorError> {
        let n = coords.len();
        for i in 0..n {
            for j in 0..n {
                let mut s = S::zero();
                for k in 0..n {
                    s.mul_add(&rows[i][k], &inverse[k][j]);
                }
                let expect = if i == j { S::one() } else { S::zero() };
                if s != expect {
                    return Err(TensorError::NotInvertible);
                }
            }
        }
        Ok(Metric {
            coords,
            g: TensorField::from_matrix(&rows, [Slot::Down, Slot::Down]),
            ginv: TensorField::from_matrix(&inverse, [Slot::Up, Slot::Up]),
            det,
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn g(&self, i: usize, j: usize) -> &S {
        self.g.get(&[i, j])
    }

    pub fn inv(&self, i: usize, j: usize) -> &S {
        self.ginv.get(&[i, j])
    }

    pub fn tensor(&self) -> &TensorField<S> {
        &self.g
    }

    pub fn inverse(&self) -> &TensorField<S> {
        &self.ginv
    }

    pub fn det(&self) -> &S {
        &self.det
    }

    pub fn rows(&self) -> Vec<Vec<S>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.g(i, j).clone()).collect())
            .collect()
    }

    /// Partial derivative of a scalar along coordinate `i`.
    pub fn partial(&self, s: &S, i: usize) -> S {
        s.diff(&self.coords[i])
    }

    /// Lower slot `a` (which must be upper) with `g`.
    pub fn lower(&self, t: &TensorField<S>, a: usize) -> Result<TensorField<S>, TensorError> {
        self.move_slot(t, a, Slot::Up, Slot::Down)
    }

    /// Raise slot `a` (which must be lower) with the inverse metric.
    pub fn raise(&self, t: &TensorField<S>, a: usize) -> Result<TensorField<S>, TensorError> {
        self.move_slot(t, a, Slot::Down, Slot::Up)
    }

    fn move_slot(
        &self,
        t: &TensorField<S>,
        a: usize,
        from: Slot,
        to: Slot,
    ) -> Result<TensorField<S>, TensorError> {
        if t.slots().get(a) != Some(&from) {
            return Err(TensorError::RankMismatch(format!(
                "slot {} of {:?} is not {:?}",
                a,
                t.slots(),
                from
            )));
        }
        let n = self.dim();
        let m = if to == Slot::Down { &self.g } else { &self.ginv };
        let mut slots = t.slots().to_vec();
        slots[a] = to;
        let mut out = TensorField::zeros(n, &slots);
        for (idx, c) in t.iter() {
            if c.is_zero() {
                continue;
            }
            let mut j = idx.clone();
            for k in 0..n {
                let mk = m.get(&[k, idx[a]]);
                if mk.is_zero() {
                    continue;
                }
                j[a] = k;
                out.add_at(&j, &mk.mul(c));
            }
        }
        Ok(out)
    }

    /// `g^{ij} T_ij` for a covariant 2-tensor.
    pub fn trace(&self, t: &TensorField<S>) -> Result<S, TensorError> {
        if t.slots() != [Slot::Down, Slot::Down] {
            return Err(TensorError::RankMismatch("trace needs a (0,2) tensor".into()));
        }
        let n = self.dim();
        let mut s = S::zero();
        for i in 0..n {
            for j in 0..n {
                s.mul_add(self.inv(i, j), t.get(&[i, j]));
            }
        }
        Ok(s)
    }

    /// Map every component to another scalar ring.
    pub fn map_scalars<T: Scalar, F: Fn(&S) -> T>(&self, f: F) -> Result<Metric<T>, TensorError> {
        let n = self.dim();
        let rows: Vec<Vec<T>> = (0..n)
            .map(|i| (0..n).map(|j| f(self.g(i, j))).collect())
            .collect();
        Metric::new(self.coords.clone(), rows)
    }
}

impl<S: Scalar> std::fmt::Debug for Metric<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Metric")
            .field("coords", &self.coords)
            .field("g", &self.g)
            .finish()
    }
}

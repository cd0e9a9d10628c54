//! Dense component storage for tensor fields over an `n`-dimensional
//! coordinate or frame basis.

use std::fmt;

use crate::expr::Q;
use crate::scalar::Scalar;

use super::TensorError;

/// Position of a tensor index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Up,
    Down,
}

/// A declared index symmetry between two slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    Symmetric(usize, usize),
    Antisymmetric(usize, usize),
}

/// All index tuples of the given rank in lexicographic order.
pub fn indices(n: usize, rank: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.pow(rank as u32);
    (0..total).map(move |mut k| {
        let mut idx = vec![0; rank];
        for s in (0..rank).rev() {
            idx[s] = k % n;
            k /= n;
        }
        idx
    })
}

#[derive(Clone, PartialEq)]
pub struct TensorField<S> {
    n: usize,
    slots: Vec<Slot>,
    comps: Vec<S>,
    symmetries: Vec<Symmetry>,
}

impl<S: Scalar> TensorField<S> {
    pub fn zeros(n: usize, slots: &[Slot]) -> Self {
        TensorField {
            n,
            slots: slots.to_vec(),
            comps: vec![S::zero(); n.pow(slots.len() as u32)],
            symmetries: Vec::new(),
        }
    }

    pub fn from_fn<F: FnMut(&[usize]) -> S>(n: usize, slots: &[Slot], mut f: F) -> Self {
        let comps = indices(n, slots.len()).map(|i| f(&i)).collect();
        TensorField {
            n,
            slots: slots.to_vec(),
            comps,
            symmetries: Vec::new(),
        }
    }

    /// A scalar field viewed as a rank-zero tensor.
    pub fn scalar(n: usize, s: S) -> Self {
        TensorField {
            n,
            slots: Vec::new(),
            comps: vec![s],
            symmetries: Vec::new(),
        }
    }

    /// Build a covariant 2-tensor from a row-major matrix.
    pub fn from_matrix(rows: &[Vec<S>], slots: [Slot; 2]) -> Self {
        let n = rows.len();
        Self::from_fn(n, &slots, |i| rows[i[0]][i[1]].clone())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn symmetries(&self) -> &[Symmetry] {
        &self.symmetries
    }

    pub fn components(&self) -> &[S] {
        &self.comps
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.slots.len());
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn get(&self, idx: &[usize]) -> &S {
        &self.comps[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: S) {
        let o = self.offset(idx);
        self.comps[o] = v;
    }

    pub fn add_at(&mut self, idx: &[usize], v: &S) {
        let o = self.offset(idx);
        self.comps[o].add_assign(v);
    }

    /// Value of a rank-zero tensor.
    pub fn value(&self) -> &S {
        &self.comps[0]
    }

    /// Declare a symmetry; [`TensorField::check_symmetries`] verifies it.
    pub fn with_symmetry(mut self, s: Symmetry) -> Self {
        self.symmetries.push(s);
        self
    }

    pub fn map<F: Fn(&S) -> S>(&self, f: F) -> Self {
        TensorField {
            n: self.n,
            slots: self.slots.clone(),
            comps: self.comps.iter().map(f).collect(),
            symmetries: self.symmetries.clone(),
        }
    }

    fn check_shape(&self, o: &Self) -> Result<(), TensorError> {
        if self.n != o.n || self.slots != o.slots {
            return Err(TensorError::RankMismatch(format!(
                "{:?} (dim {}) vs {:?} (dim {})",
                self.slots, self.n, o.slots, o.n
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self, TensorError> {
        self.check_shape(o)?;
        Ok(TensorField {
            n: self.n,
            slots: self.slots.clone(),
            comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.add(b)).collect(),
            symmetries: common_symmetries(&self.symmetries, &o.symmetries),
        })
    }

    pub fn sub(&self, o: &Self) -> Result<Self, TensorError> {
        self.check_shape(o)?;
        Ok(TensorField {
            n: self.n,
            slots: self.slots.clone(),
            comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.sub(b)).collect(),
            symmetries: common_symmetries(&self.symmetries, &o.symmetries),
        })
    }

    pub fn scale(&self, c: &Q) -> Self {
        self.map(|x| x.scale(c))
    }

    pub fn mul_scalar(&self, s: &S) -> Self {
        self.map(|x| x.mul(s))
    }

    pub fn neg(&self) -> Self {
        self.map(|x| x.neg())
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// First index tuple with a nonzero component.
    pub fn first_nonzero(&self) -> Option<(Vec<usize>, &S)> {
        indices(self.n, self.rank())
            .zip(&self.comps)
            .find(|(_, c)| !c.is_zero())
    }

    /// Swap two slots.
    pub fn transpose(&self, a: usize, b: usize) -> Self {
        let mut slots = self.slots.clone();
        slots.swap(a, b);
        let mut out = Self::zeros(self.n, &slots);
        for (idx, c) in indices(self.n, self.rank()).zip(&self.comps) {
            let mut j = idx.clone();
            j.swap(a, b);
            out.set(&j, c.clone());
        }
        out
    }

    pub fn is_symmetric_in(&self, a: usize, b: usize) -> bool {
        self.pair_relation(a, b, false)
    }

    pub fn is_antisymmetric_in(&self, a: usize, b: usize) -> bool {
        self.pair_relation(a, b, true)
    }

    fn pair_relation(&self, a: usize, b: usize, anti: bool) -> bool {
        indices(self.n, self.rank()).all(|idx| {
            if idx[a] > idx[b] {
                return true;
            }
            let mut j = idx.clone();
            j.swap(a, b);
            let x = self.get(&idx);
            let y = self.get(&j);
            if anti {
                x.add(y).is_zero()
            } else {
                x.sub(y).is_zero()
            }
        })
    }

    /// Verify every declared symmetry; returns the first violated one.
    pub fn check_symmetries(&self) -> Result<(), Symmetry> {
        for s in &self.symmetries {
            let ok = match *s {
                Symmetry::Symmetric(a, b) => self.is_symmetric_in(a, b),
                Symmetry::Antisymmetric(a, b) => self.is_antisymmetric_in(a, b),
            };
            if !ok {
                return Err(*s);
            }
        }
        Ok(())
    }

    /// Contract an upper and a lower slot.
    pub fn contract(&self, a: usize, b: usize) -> Result<Self, TensorError> {
        if a == b || self.slots[a] == self.slots[b] {
            return Err(TensorError::RankMismatch(format!(
                "cannot contract slots {} and {} of {:?}",
                a, b, self.slots
            )));
        }
        let slots: Vec<Slot> = self
            .slots
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != a && *i != b)
            .map(|(_, s)| *s)
            .collect();
        let mut out = Self::zeros(self.n, &slots);
        for (idx, c) in indices(self.n, self.rank()).zip(&self.comps) {
            if idx[a] != idx[b] || c.is_zero() {
                continue;
            }
            let rest: Vec<usize> = idx
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != a && *i != b)
                .map(|(_, v)| *v)
                .collect();
            out.add_at(&rest, c);
        }
        Ok(out)
    }

    /// Tensor product `self ⊗ o`.
    pub fn outer(&self, o: &Self) -> Self {
        let mut slots = self.slots.clone();
        slots.extend_from_slice(&o.slots);
        let mut out = Self::zeros(self.n, &slots);
        let mut k = 0;
        for a in &self.comps {
            for b in &o.comps {
                if !a.is_zero() && !b.is_zero() {
                    out.comps[k] = a.mul(b);
                }
                k += 1;
            }
        }
        out
    }

    /// Symmetrized copy of a rank-two tensor, `(T_ij + T_ji)/2`.
    pub fn symmetrize2(&self) -> Self {
        let t = self.transpose(0, 1);
        let half = Q::new(1.into(), 2.into());
        self.add(&t).expect("same shape").scale(&half)
    }

    /// Apply a function to every component, in place.
    pub fn for_each_mut<F: FnMut(&[usize], &mut S)>(&mut self, mut f: F) {
        let n = self.n;
        let r = self.rank();
        for (idx, c) in indices(n, r).zip(self.comps.iter_mut()) {
            f(&idx, c);
        }
    }

    /// Iterate over `(index, component)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &S)> {
        indices(self.n, self.rank()).zip(self.comps.iter())
    }
}

fn common_symmetries(a: &[Symmetry], b: &[Symmetry]) -> Vec<Symmetry> {
    a.iter().filter(|s| b.contains(s)).copied().collect()
}

impl<S: Scalar> fmt::Debug for TensorField<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "TensorField{:?} dim {} {{", self.slots, self.n)?;
        for (idx, c) in self.iter() {
            if !c.is_zero() {
                writeln!(f, "  {:?}: {}", idx, c)?;
            }
        }
        write!(f, "}}")
    }
}

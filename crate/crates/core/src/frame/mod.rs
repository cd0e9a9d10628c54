//! Geometry in an anholonomic frame with a constant frame metric.
//!
//! A frame `e_1..e_n` is described by its structure functions
//! `[e_i, e_j] = r^k_ij e_k` and, optionally, by coordinate expressions
//! `e_i = e_i^μ ∂_μ` that are needed to differentiate non-constant
//! structure functions. Indices are split into three blocks: the null block
//! `a ∈ [0, p)`, the middle block `A ∈ [p, n−p)` and the dual block
//! `ā ∈ [n−p, n)`.

mod realize;
mod semidirect;
mod walker;

pub use realize::{realize_nilpotent, Realization};
pub use semidirect::{build_semidirect, SemidirectAlgebra};
pub use walker::{
    curvature_null_contraction, frame_from_walker_coordinates, nrw_conditions,
    walker_check_coordinates, walker_frame_check,
};

use thiserror::Error;

use crate::expr::{Expr, Q};
use crate::ratfunc::RatFunc;
use crate::scalar::Scalar;
use crate::tensor::{invert_matrix, Metric, Slot, TensorError, TensorField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("invalid frame data: {0}")]
    Invalid(String),
    #[error("frame metric is degenerate")]
    DegenerateMetric,
    #[error("frame metric violates the block form: {0}")]
    BlockForm(String),
    #[error("structure functions are not constant; coordinate vector fields are required to differentiate {0}")]
    NeedsVectorFields(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("{identity} fails: {witness}")]
    Identity { identity: String, witness: String },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Index block of a frame index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    Null,
    Middle,
    Dual,
}

/// Coordinate components `e_i^μ` of a frame.
#[derive(Clone, Debug)]
pub struct VectorFields {
    pub coords: Vec<String>,
    /// `comps[i][μ] = e_i^μ`.
    pub comps: Vec<Vec<RatFunc>>,
}

#[derive(Clone, Debug)]
pub struct FrameData {
    n: usize,
    p: usize,
    gframe: Vec<Vec<Q>>,
    ginv: Vec<Vec<Q>>,
    r: TensorField<RatFunc>,
    fields: Option<VectorFields>,
}

/// 1-based label of a frame index; dual-block indices are numbered
/// separately and marked, e.g. `1bar`.
pub fn label(n: usize, p: usize, i: usize) -> String {
    if i < n - p {
        format!("{}", i + 1)
    } else {
        format!("{}bar", i - (n - p) + 1)
    }
}

fn q_matrix_inverse(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let e: Vec<Vec<Expr>> = m
        .iter()
        .map(|r| r.iter().map(|c| Expr::constant(c.clone())).collect())
        .collect();
    let (_, inv) = invert_matrix(&e).ok()?;
    inv.into_iter()
        .map(|r| r.into_iter().map(|c| c.as_constant()).collect())
        .collect()
}

impl FrameData {
    /// Validate and package frame data. `r` has slots (up, down, down) with
    /// `r[k,i,j] = r^k_ij`.
    pub fn new(
        p: usize,
        gframe: Vec<Vec<Q>>,
        r: TensorField<RatFunc>,
        fields: Option<VectorFields>,
    ) -> Result<Self, FrameError> {
        let n = gframe.len();
        if gframe.iter().any(|row| row.len() != n) {
            return Err(FrameError::Invalid("frame metric is not square".into()));
        }
        if 2 * p > n {
            return Err(FrameError::Invalid(format!(
                "null rank p = {} exceeds n/2 for n = {}",
                p, n
            )));
        }
        if r.dim() != n || r.slots() != [Slot::Up, Slot::Down, Slot::Down] {
            return Err(FrameError::Invalid(
                "structure functions must be an n-dimensional (1,2) tensor".into(),
            ));
        }
        for i in 0..n {
            for j in 0..n {
                if gframe[i][j] != gframe[j][i] {
                    return Err(FrameError::BlockForm(format!(
                        "g[{},{}] != g[{},{}]",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        let block = |i: usize| block_of(n, p, i);
        for i in 0..n {
            for j in 0..n {
                let allowed = matches!(
                    (block(i), block(j)),
                    (Block::Null, Block::Dual) | (Block::Dual, Block::Null) | (Block::Middle, Block::Middle)
                );
                if !allowed && !num_traits::Zero::is_zero(&gframe[i][j]) {
                    return Err(FrameError::BlockForm(format!(
                        "g[{},{}] = {} must vanish",
                        label(n, p, i),
                        label(n, p, j),
                        gframe[i][j]
                    )));
                }
            }
        }
        let ginv = q_matrix_inverse(&gframe).ok_or(FrameError::DegenerateMetric)?;
        if !r.is_antisymmetric_in(1, 2) {
            return Err(FrameError::Invalid(
                "structure functions are not antisymmetric in the lower indices".into(),
            ));
        }
        if let Some(f) = &fields {
            if f.comps.len() != n || f.comps.iter().any(|c| c.len() != f.coords.len()) {
                return Err(FrameError::Invalid(
                    "vector field components have the wrong shape".into(),
                ));
            }
        }
        Ok(FrameData {
            n,
            p,
            gframe,
            ginv,
            r,
            fields,
        })
    }

    /// Constant structure constants given as a list `(k, i, j, value)` with
    /// `r^k_ij = value` (and `r^k_ji = −value` implied).
    pub fn from_constants(
        p: usize,
        gframe: Vec<Vec<Q>>,
        brackets: &[(usize, usize, usize, Q)],
    ) -> Result<Self, FrameError> {
        let n = gframe.len();
        let mut r = TensorField::zeros(n, &[Slot::Up, Slot::Down, Slot::Down]);
        for (k, i, j, v) in brackets {
            if *k >= n || *i >= n || *j >= n {
                return Err(FrameError::Invalid(format!(
                    "bracket index out of range in r^{}_{},{}",
                    k + 1,
                    i + 1,
                    j + 1
                )));
            }
            let c = RatFunc::from_q(v.clone());
            r.add_at(&[*k, *i, *j], &c);
            r.add_at(&[*k, *j, *i], &c.neg());
        }
        Self::new(p, gframe, r, None)
    }

    /// Frame given by coordinate vector fields; the structure functions are
    /// computed from their Lie brackets.
    pub fn from_vector_fields(
        p: usize,
        gframe: Vec<Vec<Q>>,
        fields: VectorFields,
    ) -> Result<Self, FrameError> {
        let n = fields.comps.len();
        if fields.coords.len() != n {
            return Err(FrameError::Invalid(
                "number of vector fields differs from the number of coordinates".into(),
            ));
        }
        let (_, einv) = invert_matrix(&fields.comps)
            .map_err(|_| FrameError::Invalid("vector fields are linearly dependent".into()))?;
        let e = &fields.comps;
        let d = |f: &RatFunc, i: usize| -> RatFunc {
            let mut s = RatFunc::zero();
            for (mu, c) in fields.coords.iter().enumerate() {
                if !e[i][mu].is_zero() {
                    s.mul_add(&e[i][mu], &f.diff(c));
                }
            }
            s
        };
        let mut r = TensorField::zeros(n, &[Slot::Up, Slot::Down, Slot::Down]);
        for i in 0..n {
            for j in i + 1..n {
                let bracket: Vec<RatFunc> =
                    (0..n).map(|mu| d(&e[j][mu], i).sub(&d(&e[i][mu], j))).collect();
                for k in 0..n {
                    let mut v = RatFunc::zero();
                    for (mu, b) in bracket.iter().enumerate() {
                        v.mul_add(&einv[mu][k], b);
                    }
                    if !v.is_zero() {
                        r.set(&[k, j, i], v.neg());
                        r.set(&[k, i, j], v);
                    }
                }
            }
        }
        Self::new(p, gframe, r, Some(fields))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.p
    }

    pub fn block(&self, i: usize) -> Block {
        block_of(self.n, self.p, i)
    }

    pub fn null_range(&self) -> std::ops::Range<usize> {
        0..self.p
    }

    pub fn middle_range(&self) -> std::ops::Range<usize> {
        self.p..self.n - self.p
    }

    pub fn dual_range(&self) -> std::ops::Range<usize> {
        self.n - self.p..self.n
    }

    pub fn label(&self, i: usize) -> String {
        label(self.n, self.p, i)
    }

    pub fn metric(&self, i: usize, j: usize) -> &Q {
        &self.gframe[i][j]
    }

    pub fn metric_inverse(&self, i: usize, j: usize) -> &Q {
        &self.ginv[i][j]
    }

    pub fn metric_matrix(&self) -> &[Vec<Q>] {
        &self.gframe
    }

    pub fn structure(&self) -> &TensorField<RatFunc> {
        &self.r
    }

    /// `r^k_ij`.
    pub fn r(&self, k: usize, i: usize, j: usize) -> &RatFunc {
        self.r.get(&[k, i, j])
    }

    pub fn fields(&self) -> Option<&VectorFields> {
        self.fields.as_ref()
    }

    pub fn has_constant_structure(&self) -> bool {
        self.r.components().iter().all(|c| c.as_expr().is_some_and(|e| e.is_constant()))
    }

    /// `e_i(f)`.
    pub fn derivative(&self, i: usize, f: &RatFunc) -> Result<RatFunc, FrameError> {
        if let Some(fields) = &self.fields {
            let mut s = RatFunc::zero();
            for (mu, c) in fields.coords.iter().enumerate() {
                let ei = &fields.comps[i][mu];
                if !ei.is_zero() {
                    s.mul_add(ei, &f.diff(c));
                }
            }
            return Ok(s);
        }
        match f.as_expr() {
            Some(e) if e.is_constant() => Ok(RatFunc::zero()),
            _ => Err(FrameError::NeedsVectorFields(f.to_string())),
        }
    }

    /// The metric in coordinates, `g_μν = g_ij Θ^i_μ Θ^j_ν`.
    pub fn coordinate_metric(&self) -> Result<Metric<RatFunc>, FrameError> {
        let f = self.fields.as_ref().ok_or_else(|| {
            FrameError::NeedsVectorFields("the coordinate metric".into())
        })?;
        let (_, einv) = invert_matrix(&f.comps)?;
        let n = self.n;
        // theta[k][μ] = einv[μ][k]
        let rows: Vec<Vec<RatFunc>> = (0..n)
            .map(|mu| {
                (0..n)
                    .map(|nu| {
                        let mut s = RatFunc::zero();
                        for i in 0..n {
                            for j in 0..n {
                                if num_traits::Zero::is_zero(&self.gframe[i][j]) {
                                    continue;
                                }
                                let t = einv[mu][i].mul(&einv[nu][j]);
                                s.add_assign(&t.scale(&self.gframe[i][j]));
                            }
                        }
                        s
                    })
                    .collect()
            })
            .collect();
        Ok(Metric::new(f.coords.clone(), rows)?)
    }
}

fn block_of(n: usize, p: usize, i: usize) -> Block {
    if i < p {
        Block::Null
    } else if i < n - p {
        Block::Middle
    } else {
        Block::Dual
    }
}

/// Levi-Civita connection in the frame, `∇_{e_i} e_j = Γ^k_ij e_k`, from
/// `2 g(∇_i e_j, e_l) = r^m_ij g_ml − r^m_jl g_mi − r^m_il g_mj`.
pub fn frame_connection(f: &FrameData) -> TensorField<RatFunc> {
    let n = f.n;
    let gq = |i: usize, j: usize| &f.gframe[i][j];
    let mut lower = vec![vec![vec![RatFunc::zero(); n]; n]; n];
    let half = crate::expr::q(1, 2);
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = RatFunc::zero();
                for m in 0..n {
                    let gml = gq(m, l);
                    if !num_traits::Zero::is_zero(gml) {
                        v.add_assign(&f.r(m, i, j).scale(gml));
                    }
                    let gmi = gq(m, i);
                    if !num_traits::Zero::is_zero(gmi) {
                        v = v.sub(&f.r(m, j, l).scale(gmi));
                    }
                    let gmj = gq(m, j);
                    if !num_traits::Zero::is_zero(gmj) {
                        v = v.sub(&f.r(m, i, l).scale(gmj));
                    }
                }
                lower[l][i][j] = v.scale(&half);
            }
        }
    }
    TensorField::from_fn(n, &[Slot::Up, Slot::Down, Slot::Down], |x| {
        let (k, i, j) = (x[0], x[1], x[2]);
        let mut v = RatFunc::zero();
        for (l, low) in lower.iter().enumerate() {
            let gi = &f.ginv[k][l];
            if !num_traits::Zero::is_zero(gi) {
                v.add_assign(&low[i][j].scale(gi));
            }
        }
        v
    })
}

/// `R^a_bcd` in the frame, with
/// `R(e_c, e_d) e_b = ∇_c∇_d e_b − ∇_d∇_c e_b − ∇_[e_c,e_d] e_b = R^a_bcd e_a`.
pub fn frame_curvature_up(f: &FrameData) -> Result<TensorField<RatFunc>, FrameError> {
    let n = f.n;
    let gam = frame_connection(f);
    let mut r = TensorField::zeros(n, &[Slot::Up, Slot::Down, Slot::Down, Slot::Down]);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in c + 1..n {
                    let mut v = f
                        .derivative(c, gam.get(&[a, d, b]))?
                        .sub(&f.derivative(d, gam.get(&[a, c, b]))?);
                    for m in 0..n {
                        v.mul_add(gam.get(&[m, d, b]), gam.get(&[a, c, m]));
                        let t = gam.get(&[m, c, b]).mul(gam.get(&[a, d, m]));
                        if !t.is_zero() {
                            v = v.sub(&t);
                        }
                        let t = f.r(m, c, d).mul(gam.get(&[a, m, b]));
                        if !t.is_zero() {
                            v = v.sub(&t);
                        }
                    }
                    if !v.is_zero() {
                        r.set(&[a, b, d, c], v.neg());
                        r.set(&[a, b, c, d], v);
                    }
                }
            }
        }
    }
    Ok(r)
}

/// Fully covariant frame curvature `R_abcd = g_ae R^e_bcd`.
pub fn frame_curvature(f: &FrameData) -> Result<TensorField<RatFunc>, FrameError> {
    let up = frame_curvature_up(f)?;
    let n = f.n;
    Ok(TensorField::from_fn(n, &[Slot::Down; 4], |x| {
        let mut v = RatFunc::zero();
        for e in 0..n {
            let g = &f.gframe[x[0]][e];
            if !num_traits::Zero::is_zero(g) {
                v.add_assign(&up.get(&[e, x[1], x[2], x[3]]).scale(g));
            }
        }
        v
    }))
}

/// Frame Ricci tensor `Ric_bd = R^a_bad`.
pub fn frame_ricci(f: &FrameData) -> Result<TensorField<RatFunc>, FrameError> {
    let up = frame_curvature_up(f)?;
    Ok(up.contract(0, 2)?)
}

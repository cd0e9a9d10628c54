//! Semidirect sums `g = h ⋉_φ k` of a two-step nilpotent algebra `k` with
//! centre block `z` and an algebra `h` acting by derivations.
//!
//! Basis layout (0-based): `z = [0, p)`, the complement `m = [p, q)` of `z`
//! in `k`, and `h = [q, q + p)`. Brackets:
//! `[e_A, e_B] = r^c_AB e_c`, `[e_b, e_ā] = r^d_bā e_d`,
//! `[e_B, e_ā] = r^d_Bā e_d + r^E_Bā e_E`, `[e_ā, e_b̄] = r^c̄_āb̄ e_c̄`.
//! With `[e_b, e_ā] = φ(e_ā) e_b`, the Jacobi identity requires
//! `r^e_AB r^d_ec̄ = r^E_Ac̄ r^d_EB − r^E_Bc̄ r^d_EA` (each `φ(e_c̄)` is a
//! derivation) and `r^c̄_āb̄ r^e_kc̄ = r^l_kā r^e_lb̄ − r^l_kb̄ r^e_lā` for
//! `k, l, e` in `k` (φ is a homomorphism).

use crate::expr::Q;
use crate::tensor::indices;

use super::{FrameData, FrameError};

use num_traits::Zero;

#[derive(Clone, Debug, Default)]
pub struct SemidirectAlgebra {
    /// Dimension of the centre block `z` and of `h`.
    pub p: usize,
    /// Dimension of `k`.
    pub q: usize,
    /// `(c, A, B, r^c_AB)` with `c` in `z`, `A, B` in `m`.
    pub kernel: Vec<(usize, usize, usize, Q)>,
    /// `(c̄, ā, b̄, r^c̄_āb̄)` inside `h`.
    pub acting: Vec<(usize, usize, usize, Q)>,
    /// `(d, b, ā, r^d_bā)` with `b, d` in `z`, `ā` in `h`.
    pub on_centre: Vec<(usize, usize, usize, Q)>,
    /// `(k, B, ā, r^k_Bā)` with `B` in `m`, `k` in `k`, `ā` in `h`.
    pub on_complement: Vec<(usize, usize, usize, Q)>,
    /// Constant frame metric with nonzero blocks `g_(a c̄)` and `g_AB` only.
    pub metric: Vec<Vec<Q>>,
}

impl SemidirectAlgebra {
    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    fn in_z(&self, i: usize) -> bool {
        i < self.p
    }

    fn in_m(&self, i: usize) -> bool {
        i >= self.p && i < self.q
    }

    fn in_k(&self, i: usize) -> bool {
        i < self.q
    }

    fn in_h(&self, i: usize) -> bool {
        i >= self.q && i < self.q + self.p
    }

    /// All structure constants as `(k, i, j, r^k_ij)`, after checking that
    /// each entry sits in its block.
    pub fn brackets(&self) -> Result<Vec<(usize, usize, usize, Q)>, FrameError> {
        let mut out = Vec::new();
        let bad = |what: &str, e: &(usize, usize, usize, Q)| {
            FrameError::Invalid(format!(
                "{} entry r^{}_({},{}) has an index outside its block",
                what,
                e.0 + 1,
                e.1 + 1,
                e.2 + 1
            ))
        };
        for e in &self.kernel {
            if !(self.in_z(e.0) && self.in_m(e.1) && self.in_m(e.2)) {
                return Err(bad("kernel", e));
            }
            out.push(e.clone());
        }
        for e in &self.acting {
            if !(self.in_h(e.0) && self.in_h(e.1) && self.in_h(e.2)) {
                return Err(bad("acting algebra", e));
            }
            out.push(e.clone());
        }
        for e in &self.on_centre {
            if !(self.in_z(e.0) && self.in_z(e.1) && self.in_h(e.2)) {
                return Err(bad("action on the centre", e));
            }
            out.push(e.clone());
        }
        for e in &self.on_complement {
            if !(self.in_k(e.0) && self.in_m(e.1) && self.in_h(e.2)) {
                return Err(bad("action on the complement", e));
            }
            out.push(e.clone());
        }
        Ok(out)
    }
}

/// Dense structure constants `c[k][i][j]`.
fn dense(n: usize, br: &[(usize, usize, usize, Q)]) -> Vec<Vec<Vec<Q>>> {
    let mut c = vec![vec![vec![Q::zero(); n]; n]; n];
    for (k, i, j, v) in br {
        c[*k][*i][*j] += v.clone();
        c[*k][*j][*i] -= v.clone();
    }
    c
}

fn identity_error(identity: &str, witness: String) -> FrameError {
    FrameError::Identity {
        identity: identity.to_string(),
        witness,
    }
}

pub const DERIVATION_IDENTITY: &str = "r_{AB}^e r_{e c̄}^d identity (φ(e_c̄) is a derivation of k)";
pub const HOMOMORPHISM_IDENTITY: &str = "r_{āb̄}^c̄ r_{k c̄}^e identity (φ is a homomorphism)";
pub const H_JACOBI: &str = "Jacobi identity of h";
pub const JACOBI: &str = "Jacobi identity of g";

/// Validate the algebra and return its left-invariant frame data.
pub fn build_semidirect(s: &SemidirectAlgebra) -> Result<FrameData, FrameError> {
    let n = s.dim();
    if s.p == 0 || s.p > s.q {
        return Err(FrameError::Invalid(format!(
            "need 1 <= p <= q, got p = {}, q = {}",
            s.p, s.q
        )));
    }
    if s.metric.len() != n {
        return Err(FrameError::Invalid(format!(
            "frame metric must be {}x{}",
            n, n
        )));
    }
    let br = s.brackets()?;
    let c = dense(n, &br);
    let hs: Vec<usize> = (s.q..n).collect();
    let ms: Vec<usize> = (s.p..s.q).collect();
    let ks: Vec<usize> = (0..s.q).collect();

    // Jacobi identity inside h.
    for x in indices(s.p, 3) {
        let (a, b, cc) = (hs[x[0]], hs[x[1]], hs[x[2]]);
        for e in hs.iter().copied() {
            let mut v = Q::zero();
            for m in hs.iter().copied() {
                v += &c[m][a][b] * &c[e][m][cc];
                v += &c[m][b][cc] * &c[e][m][a];
                v += &c[m][cc][a] * &c[e][m][b];
            }
            if !v.is_zero() {
                return Err(identity_error(
                    H_JACOBI,
                    format!("e_{}, e_{}, e_{} gives {} in e_{}", a + 1, b + 1, cc + 1, v, e + 1),
                ));
            }
        }
    }
    // φ(e_c̄) is a derivation: r^e_AB r^d_ec̄ = r^E_Ac̄ r^d_EB − r^E_Bc̄ r^d_EA.
    for &a in &ms {
        for &b in &ms {
            for &cb in &hs {
                for d in 0..s.q {
                    let mut lhs = Q::zero();
                    let mut rhs = Q::zero();
                    for e in 0..s.q {
                        lhs += &c[e][a][b] * &c[d][e][cb];
                        rhs += &c[e][a][cb] * &c[d][e][b];
                        rhs -= &c[e][b][cb] * &c[d][e][a];
                    }
                    if lhs != rhs {
                        return Err(identity_error(
                            DERIVATION_IDENTITY,
                            format!(
                                "A = {}, B = {}, c̄ = {}, d = {}: {} != {}",
                                a + 1,
                                b + 1,
                                cb + 1,
                                d + 1,
                                lhs,
                                rhs
                            ),
                        ));
                    }
                }
            }
        }
    }
    // φ is a homomorphism.
    for &a in &hs {
        for &b in &hs {
            for &k in &ks {
                for &e in &ks {
                    let mut lhs = Q::zero();
                    for &cb in &hs {
                        lhs += &c[cb][a][b] * &c[e][k][cb];
                    }
                    let mut rhs = Q::zero();
                    for &l in &ks {
                        rhs += &c[l][k][a] * &c[e][l][b];
                        rhs -= &c[l][k][b] * &c[e][l][a];
                    }
                    if lhs != rhs {
                        return Err(identity_error(
                            HOMOMORPHISM_IDENTITY,
                            format!(
                                "ā = {}, b̄ = {}, k = {}, e = {}: {} != {}",
                                a + 1,
                                b + 1,
                                k + 1,
                                e + 1,
                                lhs,
                                rhs
                            ),
                        ));
                    }
                }
            }
        }
    }
    // Full Jacobi identity as a final safeguard.
    for x in indices(n, 3) {
        let (i, j, k) = (x[0], x[1], x[2]);
        if !(i < j && j < k) {
            continue;
        }
        for e in 0..n {
            let mut v = Q::zero();
            for m in 0..n {
                v += &c[m][i][j] * &c[e][m][k];
                v += &c[m][j][k] * &c[e][m][i];
                v += &c[m][k][i] * &c[e][m][j];
            }
            if !v.is_zero() {
                return Err(identity_error(
                    JACOBI,
                    format!("e_{}, e_{}, e_{} gives {} in e_{}", i + 1, j + 1, k + 1, v, e + 1),
                ));
            }
        }
    }
    FrameData::from_constants(s.p, s.metric.clone(), &br)
}

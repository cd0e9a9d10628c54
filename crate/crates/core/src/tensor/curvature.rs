//! Levi-Civita connection, curvature and the conformal tensors built from it.
//!
//! Conventions: `Gamma[k,i,j] = Γ^k_ij`,
//! `R^a_bcd = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb`,
//! `R_abcd = g_ae R^e_bcd` and `Ric_bd = R^a_bad`. With these, the identity
//! `∇_i∇_j v_k − ∇_j∇_i v_k = R_ijk^l v_l` holds for `R_ijk^l = R^l_kji`, and
//! a round sphere has positive Ricci curvature. Covariant derivatives append
//! the derivative index as the last slot.

use std::sync::OnceLock;

use crate::expr::q;
use crate::scalar::Scalar;

use super::{indices, Metric, Slot, Symmetry, TensorError, TensorField};

/// Connection and curvature data of a coordinate metric, computed lazily.
pub struct Geometry<S> {
    metric: Metric<S>,
    christoffel: OnceLock<TensorField<S>>,
    riemann_up: OnceLock<TensorField<S>>,
    riemann: OnceLock<TensorField<S>>,
    ricci: OnceLock<TensorField<S>>,
    scalar: OnceLock<S>,
}

impl<S: Scalar> Geometry<S> {
    pub fn new(metric: Metric<S>) -> Self {
        Geometry {
            metric,
            christoffel: OnceLock::new(),
            riemann_up: OnceLock::new(),
            riemann: OnceLock::new(),
            ricci: OnceLock::new(),
            scalar: OnceLock::new(),
        }
    }

    pub fn metric(&self) -> &Metric<S> {
        &self.metric
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// `Γ^k_ij = ½ g^{kl}(∂_i g_lj + ∂_j g_li − ∂_l g_ij)`.
    pub fn christoffel(&self) -> &TensorField<S> {
        self.christoffel.get_or_init(|| christoffel_of(&self.metric))
    }

    /// `R^a_bcd` with slots (up, down, down, down).
    pub fn riemann_up(&self) -> &TensorField<S> {
        self.riemann_up.get_or_init(|| {
            let n = self.dim();
            let gam = self.christoffel();
            let mut r = TensorField::zeros(n, &[Slot::Up, Slot::Down, Slot::Down, Slot::Down]);
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in c + 1..n {
                            let mut v = self
                                .metric
                                .partial(gam.get(&[a, d, b]), c)
                                .sub(&self.metric.partial(gam.get(&[a, c, b]), d));
                            for e in 0..n {
                                v.mul_add(gam.get(&[a, c, e]), gam.get(&[e, d, b]));
                                let t = gam.get(&[a, d, e]).mul(gam.get(&[e, c, b]));
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
            r.with_symmetry(Symmetry::Antisymmetric(2, 3))
        })
    }

    /// Fully covariant `R_abcd = g_ae R^e_bcd`.
    pub fn riemann(&self) -> &TensorField<S> {
        self.riemann.get_or_init(|| {
            self.metric
                .lower(self.riemann_up(), 0)
                .expect("slot 0 is contravariant")
                .with_symmetry(Symmetry::Antisymmetric(0, 1))
                .with_symmetry(Symmetry::Antisymmetric(2, 3))
        })
    }

    /// `Ric_bd = ∂_a Γ^a_db − ∂_d Γ^a_ab + Γ^a_ae Γ^e_db − Γ^a_de Γ^e_ab`,
    /// which avoids building the full curvature tensor.
    pub fn ricci(&self) -> &TensorField<S> {
        self.ricci.get_or_init(|| {
            let n = self.dim();
            let gam = self.christoffel();
            let trace: Vec<S> = (0..n)
                .map(|e| {
                    let mut s = S::zero();
                    for a in 0..n {
                        s.add_assign(gam.get(&[a, a, e]));
                    }
                    s
                })
                .collect();
            let mut ric = TensorField::zeros(n, &[Slot::Down, Slot::Down]);
            for b in 0..n {
                for d in b..n {
                    let mut v = self.metric.partial(&trace[b], d).neg();
                    for a in 0..n {
                        v.add_assign(&self.metric.partial(gam.get(&[a, d, b]), a));
                    }
                    for e in 0..n {
                        v.mul_add(&trace[e], gam.get(&[e, d, b]));
                        for a in 0..n {
                            let t = gam.get(&[a, d, e]).mul(gam.get(&[e, a, b]));
                            if !t.is_zero() {
                                v = v.sub(&t);
                            }
                        }
                    }
                    ric.set(&[d, b], v.clone());
                    ric.set(&[b, d], v);
                }
            }
            ric.with_symmetry(Symmetry::Symmetric(0, 1))
        })
    }

    pub fn scalar(&self) -> &S {
        self.scalar.get_or_init(|| {
            self.metric
                .trace(self.ricci())
                .expect("Ricci is a (0,2) tensor")
        })
    }

    /// `P = (Ric − Scal/(2(n−1)) g)/(n−2)`.
    pub fn schouten(&self) -> Result<TensorField<S>, TensorError> {
        let n = self.dim();
        if n <= 2 {
            return Err(TensorError::DimensionTooLow {
                op: "schouten",
                n,
                min: 3,
            });
        }
        let s = self.scalar().scale(&q(1, 2 * (n as i64 - 1)));
        let gs = self.metric.tensor().mul_scalar(&s);
        Ok(self
            .ricci()
            .sub(&gs)?
            .scale(&q(1, n as i64 - 2))
            .with_symmetry(Symmetry::Symmetric(0, 1)))
    }

    /// Cotton tensor `A_ijk = ∇_j P_ki − ∇_k P_ji`.
    pub fn cotton(&self) -> Result<TensorField<S>, TensorError> {
        let p = self.schouten()?;
        Ok(cotton_from(&self.covariant_derivative(&p)))
    }

    /// Weyl tensor `W = R − P ⊘ g` with the Kulkarni–Nomizu product
    /// `(P ⊘ g)_abcd = g_ac P_bd − g_ad P_bc + g_bd P_ac − g_bc P_ad`.
    pub fn weyl(&self) -> Result<TensorField<S>, TensorError> {
        let n = self.dim();
        if n <= 2 {
            return Err(TensorError::DimensionTooLow { op: "weyl", n, min: 3 });
        }
        let p = self.schouten()?;
        Ok(weyl_from(&self.metric, self.riemann(), &p))
    }

    /// Bach tensor `B_ij = ∇^k A_ijk + P^{kl} W_kijl`. In dimension three the
    /// Weyl term vanishes identically and only the Cotton divergence remains.
    pub fn bach(&self) -> Result<TensorField<S>, TensorError> {
        let n = self.dim();
        if n <= 2 {
            return Err(TensorError::DimensionTooLow { op: "bach", n, min: 3 });
        }
        let p = self.schouten()?;
        let a = cotton_from(&self.covariant_derivative(&p));
        let w = weyl_from(&self.metric, self.riemann(), &p);
        let da = self.covariant_derivative(&a);
        let pu = self.metric.raise(&self.metric.raise(&p, 0)?, 1)?;
        let g = &self.metric;
        let mut b = TensorField::zeros(n, &[Slot::Down, Slot::Down]);
        // Every component is computed, so the declared symmetry is a real
        // check on the sign conventions rather than an assumption.
        for i in 0..n {
            for j in 0..n {
                let mut v = S::zero();
                for k in 0..n {
                    for l in 0..n {
                        v.mul_add(g.inv(k, l), da.get(&[i, j, k, l]));
                        v.mul_add(pu.get(&[k, l]), w.get(&[k, i, j, l]));
                    }
                }
                b.set(&[i, j], v);
            }
        }
        Ok(b.with_symmetry(Symmetry::Symmetric(0, 1)))
    }

    /// `∇T` with the derivative index appended as the last (lower) slot.
    pub fn covariant_derivative(&self, t: &TensorField<S>) -> TensorField<S> {
        covariant_derivative_with(&self.metric, self.christoffel(), t)
    }

    /// Rough Laplacian `g^{kl} ∇_l ∇_k T`.
    pub fn box_op(&self, t: &TensorField<S>) -> TensorField<S> {
        let n = self.dim();
        let dd = self.covariant_derivative(&self.covariant_derivative(t));
        let r = t.rank();
        let mut out = TensorField::zeros(n, t.slots());
        for (idx, _) in t.iter() {
            let mut v = S::zero();
            let mut full = idx.clone();
            full.push(0);
            full.push(0);
            for k in 0..n {
                for l in 0..n {
                    let gi = self.metric.inv(k, l);
                    if gi.is_zero() {
                        continue;
                    }
                    full[r] = k;
                    full[r + 1] = l;
                    v.mul_add(gi, dd.get(&full));
                }
            }
            out.set(&idx, v);
        }
        out
    }

    /// Divergence on the last slot: `∇_k T_{...}^k` or `g^{kl}∇_l T_{...k}`.
    pub fn divergence(&self, t: &TensorField<S>) -> Result<TensorField<S>, TensorError> {
        let r = t.rank();
        if r == 0 {
            return Err(TensorError::RankMismatch(
                "divergence of a scalar".into(),
            ));
        }
        let dt = self.covariant_derivative(t);
        match t.slots()[r - 1] {
            Slot::Up => dt.contract(r - 1, r),
            Slot::Down => {
                let raised = self.metric.raise(&dt, r)?;
                raised.contract(r - 1, r)
            }
        }
    }

    /// Lie derivative of `t` along the vector field `x` (one upper slot).
    pub fn lie_derivative(
        &self,
        x: &TensorField<S>,
        t: &TensorField<S>,
    ) -> Result<TensorField<S>, TensorError> {
        lie_derivative(&self.metric, x, t)
    }
}

/// Christoffel symbols of a metric.
pub fn christoffel_of<S: Scalar>(m: &Metric<S>) -> TensorField<S> {
    let n = m.dim();
    // dg[l][i][j] = ∂_l g_ij
    let dg: Vec<Vec<Vec<S>>> = (0..n)
        .map(|l| {
            (0..n)
                .map(|i| (0..n).map(|j| m.partial(m.g(i, j), l)).collect())
                .collect()
        })
        .collect();
    let half = q(1, 2);
    let mut lower = vec![vec![vec![S::zero(); n]; n]; n];
    for l in 0..n {
        for i in 0..n {
            for j in i..n {
                let v = dg[i][l][j].add(&dg[j][l][i]).sub(&dg[l][i][j]).scale(&half);
                lower[l][i][j] = v.clone();
                lower[l][j][i] = v;
            }
        }
    }
    let mut gam = TensorField::zeros(n, &[Slot::Up, Slot::Down, Slot::Down]);
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut v = S::zero();
                for l in 0..n {
                    v.mul_add(m.inv(k, l), &lower[l][i][j]);
                }
                gam.set(&[k, j, i], v.clone());
                gam.set(&[k, i, j], v);
            }
        }
    }
    gam.with_symmetry(Symmetry::Symmetric(1, 2))
}

/// Covariant derivative for an arbitrary symmetric connection `gam`.
pub fn covariant_derivative_with<S: Scalar>(
    m: &Metric<S>,
    gam: &TensorField<S>,
    t: &TensorField<S>,
) -> TensorField<S> {
    let n = m.dim();
    let r = t.rank();
    let mut slots = t.slots().to_vec();
    slots.push(Slot::Down);
    let mut out = TensorField::zeros(n, &slots);
    for (idx, c) in t.iter() {
        let mut full = idx.clone();
        full.push(0);
        for k in 0..n {
            full[r] = k;
            let d = m.partial(c, k);
            if !d.is_zero() {
                out.add_at(&full, &d);
            }
        }
    }
    // Connection terms: for each source component, distribute it into the
    // slots it feeds.
    for (idx, c) in t.iter() {
        if c.is_zero() {
            continue;
        }
        for (s, slot) in t.slots().iter().enumerate() {
            let m_index = idx[s];
            for i in 0..n {
                let mut target = idx.clone();
                target[s] = i;
                target.push(0);
                for k in 0..n {
                    target[r] = k;
                    match slot {
                        // + Γ^i_{k m} T^{..m..}
                        Slot::Up => {
                            let gk = gam.get(&[i, k, m_index]);
                            if !gk.is_zero() {
                                out.add_at(&target, &gk.mul(c));
                            }
                        }
                        // − Γ^m_{k i} T_{..m..}
                        Slot::Down => {
                            let gk = gam.get(&[m_index, k, i]);
                            if !gk.is_zero() {
                                out.add_at(&target, &gk.mul(c).neg());
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

pub(crate) fn cotton_from<S: Scalar>(dp: &TensorField<S>) -> TensorField<S> {
    let n = dp.dim();
    let mut a = TensorField::from_fn(n, &[Slot::Down, Slot::Down, Slot::Down], |x| {
        let (i, j, k) = (x[0], x[1], x[2]);
        dp.get(&[k, i, j]).sub(dp.get(&[j, i, k]))
    });
    a = a.with_symmetry(Symmetry::Antisymmetric(1, 2));
    a
}

pub(crate) fn weyl_from<S: Scalar>(
    m: &Metric<S>,
    riem: &TensorField<S>,
    p: &TensorField<S>,
) -> TensorField<S> {
    let n = m.dim();
    TensorField::from_fn(n, &[Slot::Down; 4], |x| {
        let (a, b, c, d) = (x[0], x[1], x[2], x[3]);
        let mut kn = S::zero();
        kn.mul_add(m.g(a, c), p.get(&[b, d]));
        kn.mul_add(m.g(b, d), p.get(&[a, c]));
        let mut minus = S::zero();
        minus.mul_add(m.g(a, d), p.get(&[b, c]));
        minus.mul_add(m.g(b, c), p.get(&[a, d]));
        riem.get(x).sub(&kn.sub(&minus))
    })
    .with_symmetry(Symmetry::Antisymmetric(0, 1))
    .with_symmetry(Symmetry::Antisymmetric(2, 3))
}

/// `(L_X T) = X^m ∂_m T + Σ_down T_{..m..} ∂_i X^m − Σ_up T^{..m..} ∂_m X^i`.
pub fn lie_derivative<S: Scalar>(
    m: &Metric<S>,
    x: &TensorField<S>,
    t: &TensorField<S>,
) -> Result<TensorField<S>, TensorError> {
    if x.slots() != [Slot::Up] {
        return Err(TensorError::RankMismatch(
            "Lie derivative needs a vector field".into(),
        ));
    }
    let n = m.dim();
    if x.dim() != n || t.dim() != n {
        return Err(TensorError::DimensionMismatch(
            "vector field and tensor dimensions differ".into(),
        ));
    }
    // dx[i][k] = ∂_k X^i
    let dx: Vec<Vec<S>> = (0..n)
        .map(|i| (0..n).map(|k| m.partial(x.get(&[i]), k)).collect())
        .collect();
    let mut out = TensorField::zeros(n, t.slots());
    for (idx, c) in t.iter() {
        let mut v = S::zero();
        for k in 0..n {
            v.mul_add(x.get(&[k]), &m.partial(c, k));
        }
        if !v.is_zero() {
            out.add_at(&idx, &v);
        }
        if c.is_zero() {
            continue;
        }
        for (s, slot) in t.slots().iter().enumerate() {
            let mi = idx[s];
            for i in 0..n {
                let mut target = idx.clone();
                target[s] = i;
                match slot {
                    Slot::Down => {
                        if !dx[mi][i].is_zero() {
                            out.add_at(&target, &c.mul(&dx[mi][i]));
                        }
                    }
                    Slot::Up => {
                        if !dx[i][mi].is_zero() {
                            out.add_at(&target, &c.mul(&dx[i][mi]).neg());
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Check `∇g = 0` for the Levi-Civita connection.
pub fn metricity_holds<S: Scalar>(geo: &Geometry<S>) -> bool {
    geo.covariant_derivative(geo.metric().tensor()).is_zero()
}

/// Total trace `g^{ik} W_ijkl`, used to audit trace-freeness.
pub fn weyl_trace<S: Scalar>(m: &Metric<S>, w: &TensorField<S>) -> TensorField<S> {
    let n = m.dim();
    TensorField::from_fn(n, &[Slot::Down, Slot::Down], |x| {
        let mut v = S::zero();
        for i in 0..n {
            for k in 0..n {
                v.mul_add(m.inv(i, k), w.get(&[i, x[0], k, x[1]]));
            }
        }
        v
    })
}

/// First Bianchi sum `R_ijkl + R_jkil + R_kijl`.
pub fn first_bianchi_zero<S: Scalar>(riem: &TensorField<S>) -> bool {
    let n = riem.dim();
    indices(n, 4).all(|x| {
        let (i, j, k, l) = (x[0], x[1], x[2], x[3]);
        riem.get(&[i, j, k, l])
            .add(riem.get(&[j, k, i, l]))
            .add(riem.get(&[k, i, j, l]))
            .is_zero()
    })
}

/// `∇^j R_ij − ½ ∂_i Scal`, which vanishes by the contracted Bianchi identity.
pub fn contracted_bianchi_defect<S: Scalar>(geo: &Geometry<S>) -> TensorField<S> {
    let n = geo.dim();
    let div = geo.divergence(geo.ricci()).expect("Ricci has rank two");
    let half = q(1, 2);
    TensorField::from_fn(n, &[Slot::Down], |x| {
        div.get(x)
            .sub(&geo.metric().partial(geo.scalar(), x[0]).scale(&half))
    })
}

fn first_nonzero_witness<S: Scalar>(name: &str, t: &TensorField<S>) -> Option<String> {
    t.first_nonzero().map(|(i, v)| format!("{}{:?} = {}", name, i, v))
}

/// Exact audit of the algebraic and differential curvature identities:
/// Riemann symmetries, first and contracted second Bianchi, symmetry of
/// Ricci, the Schouten trace `tr P = Scal/(2(n−1))` and, for `n ≥ 3`,
/// trace-freeness of the Weyl tensor.
pub fn curvature_invariants<S: Scalar>(geo: &Geometry<S>) -> crate::report::CheckList {
    use crate::report::Check;
    let n = geo.dim();
    let mut out = crate::report::CheckList::new();
    let r = geo.riemann();
    let find = |f: &dyn Fn(usize, usize, usize, usize) -> S| {
        indices(n, 4).find_map(|x| {
            let v = f(x[0], x[1], x[2], x[3]);
            (!v.is_zero()).then(|| format!("at {:?}: {}", x, v))
        })
    };
    let w = find(&|a, b, c, d| r.get(&[a, b, c, d]).add(r.get(&[b, a, c, d])));
    out.push(Check::assertion("R_abcd = -R_bacd", w.is_none(), w));
    let w = find(&|a, b, c, d| r.get(&[a, b, c, d]).add(r.get(&[a, b, d, c])));
    out.push(Check::assertion("R_abcd = -R_abdc", w.is_none(), w));
    let w = find(&|a, b, c, d| r.get(&[a, b, c, d]).sub(r.get(&[c, d, a, b])));
    out.push(Check::assertion("R_abcd = R_cdab", w.is_none(), w));
    let w = find(&|a, b, c, d| {
        r.get(&[a, b, c, d]).add(r.get(&[b, c, a, d])).add(r.get(&[c, a, b, d]))
    });
    out.push(Check::assertion("first Bianchi identity", w.is_none(), w));
    let w = first_nonzero_witness("defect", &contracted_bianchi_defect(geo));
    out.push(Check::assertion("contracted second Bianchi identity", w.is_none(), w));
    let ric = geo.ricci();
    let w = indices(n, 2).find_map(|x| {
        let v = ric.get(&[x[0], x[1]]).sub(ric.get(&[x[1], x[0]]));
        (!v.is_zero()).then(|| format!("at {:?}: {}", x, v))
    });
    out.push(Check::assertion("Ricci symmetric", w.is_none(), w));
    if n >= 3 {
        let p = geo.schouten().expect("n >= 3");
        let tr = geo.metric().trace(&p).expect("(0,2) tensor");
        let expect = geo.scalar().scale(&q(1, 2 * (n as i64 - 1)));
        let d = tr.sub(&expect);
        let w = (!d.is_zero()).then(|| format!("tr P - Scal/(2(n-1)) = {}", d));
        out.push(Check::assertion("Schouten trace identity", w.is_none(), w));
        let wt = geo.weyl().expect("n >= 3");
        let w = first_nonzero_witness("trace", &weyl_trace(geo.metric(), &wt));
        out.push(Check::assertion("Weyl tensor trace free", w.is_none(), w));
    }
    out
}

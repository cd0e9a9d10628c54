//! Ricci tensor of `g0 + h` for a two-step nilpotent perturbation `h`, the
//! linear operator of the Walker fast path and the quadratic residual.

use crate::expr::q;
use crate::frame::walker_check_coordinates;
use crate::ratfunc::RatFunc;
use crate::report::{Check, CheckList};
use crate::scalar::Scalar;
use crate::tensor::{nilpotency_report, Geometry, Metric, Slot, TensorField};

use super::expand::image_witness;
use super::{
    coefficient, fg_residuals, first_nonzero_below, lift_metric, tensor_trunc, truncate_tensor,
    AmbientError, Series,
};

/// Pieces of `Ric(g0 + h)`:
/// `Ric = Ric(g0) + ∇^k∇_(i h_j)k − ½□h + Q2 + Q3 + Q4`, with the
/// quadratic, cubic and quartic terms in their general closed form. The
/// same orders are also obtained independently by splitting the connection
/// difference `C = C1 + C2` into its parts linear and quadratic in `h`.
#[derive(Clone, Debug)]
pub struct NilpotentRicci {
    pub linear: TensorField<RatFunc>,
    pub q2: TensorField<RatFunc>,
    pub q3: TensorField<RatFunc>,
    pub q4: TensorField<RatFunc>,
    /// `Ric(g0) + linear + Q2 + Q3 + Q4`.
    pub total: TensorField<RatFunc>,
    /// Orders one to four from the connection splitting.
    pub split: [TensorField<RatFunc>; 4],
    pub checks: CheckList,
}

fn sym2(n: usize, f: impl Fn(usize, usize) -> RatFunc) -> TensorField<RatFunc> {
    TensorField::from_fn(n, &[Slot::Down, Slot::Down], |x| f(x[0], x[1]))
}

/// `A^p_ij B^k_kp − A^p_jk B^k_ip`.
fn bilinear(n: usize, a: &TensorField<RatFunc>, b: &TensorField<RatFunc>) -> TensorField<RatFunc> {
    let trb: Vec<RatFunc> = (0..n)
        .map(|p| {
            let mut v = RatFunc::zero();
            for k in 0..n {
                v.add_assign(b.get(&[k, k, p]));
            }
            v
        })
        .collect();
    sym2(n, |i, j| {
        let mut v = RatFunc::zero();
        for p in 0..n {
            v.mul_add(a.get(&[p, i, j]), &trb[p]);
            for k in 0..n {
                let x = a.get(&[p, j, k]);
                if x.is_zero() {
                    continue;
                }
                v = v.sub(&x.mul(b.get(&[k, i, p])));
            }
        }
        v
    })
}

/// `∇_i C^k_kj − ∇_k C^k_ij`.
fn divergence_part(geo: &Geometry<RatFunc>, c: &TensorField<RatFunc>) -> TensorField<RatFunc> {
    let n = geo.dim();
    let dc = geo.covariant_derivative(c);
    sym2(n, |i, j| {
        let mut v = RatFunc::zero();
        for k in 0..n {
            v.add_assign(dc.get(&[k, k, j, i]));
            v = v.sub(dc.get(&[k, i, j, k]));
        }
        v
    })
}

fn zero_check(name: &str, t: &TensorField<RatFunc>, coords: &[String], property: bool) -> Check {
    let w = t
        .first_nonzero()
        .map(|(i, v)| format!("[{},{}] = {}", coords[i[0]], coords[i[1]], v));
    if property {
        Check::property(name, w.is_none(), w)
    } else {
        Check::assertion(name, w.is_none(), w)
    }
}

/// Structured Ricci tensor of `g0 + h`. With `rank = Some(p)` the base is
/// taken in Walker coordinates with null distribution `span(∂_0..∂_{p−1})`
/// and the hypotheses under which the higher-order terms vanish are
/// reported as well.
pub fn nilpotent_ricci(
    g0: &Metric<RatFunc>,
    h: &TensorField<RatFunc>,
    rank: Option<usize>,
) -> Result<NilpotentRicci, AmbientError> {
    let n = g0.dim();
    let rep = nilpotency_report(g0, h)?;
    if !(rep.symmetric && rep.square_zero && rep.image_totally_null) {
        return Err(AmbientError::Precondition(format!(
            "h is not two-step nilpotent with totally null image: {:?}",
            rep
        )));
    }
    let coords = g0.coords().to_vec();
    let geo = Geometry::new(g0.clone());
    let d = geo.covariant_derivative(h);
    let dd = geo.covariant_derivative(&d);
    let gi = |a: usize, b: usize| g0.inv(a, b);
    let hu = {
        let t = g0.raise(h, 0)?;
        g0.raise(&t, 1)?
    };
    // dup[a][b][k] = ∇_k h^{ab}
    let dup = {
        let t = g0.raise(&d, 0)?;
        g0.raise(&t, 1)?
    };
    // u[i][l][k] = ∇^k h_i^l
    let u = {
        let t = g0.raise(&d, 1)?;
        g0.raise(&t, 2)?
    };
    let div: Vec<RatFunc> = (0..n)
        .map(|l| {
            let mut v = RatFunc::zero();
            for k in 0..n {
                v.add_assign(dup.get(&[k, l, k]));
            }
            v
        })
        .collect();
    let half = q(1, 2);
    let quarter = q(1, 4);

    let linear = sym2(n, |i, j| {
        let mut v = RatFunc::zero();
        for k in 0..n {
            for l in 0..n {
                let g = gi(k, l);
                if g.is_zero() {
                    continue;
                }
                let s = dd
                    .get(&[j, k, i, l])
                    .add(dd.get(&[i, k, j, l]))
                    .sub(dd.get(&[i, j, k, l]))
                    .scale(&half);
                v.mul_add(g, &s);
            }
        }
        v
    });

    let q2 = sym2(n, |i, j| {
        let mut v = RatFunc::zero();
        for l in 0..n {
            if !div[l].is_zero() {
                let s = d.get(&[i, j, l]).sub(d.get(&[j, l, i])).sub(d.get(&[i, l, j])).scale(&half);
                v.mul_add(&div[l], &s);
            }
        }
        for k in 0..n {
            for l in 0..n {
                let hk = hu.get(&[k, l]);
                if hk.is_zero() {
                    continue;
                }
                let s = dd
                    .get(&[i, j, l, k])
                    .sub(dd.get(&[j, l, i, k]))
                    .sub(dd.get(&[i, l, j, k]))
                    .scale(&half);
                v.mul_add(hk, &s);
            }
        }
        for k in 0..n {
            for l in 0..n {
                v = v.sub(&dup.get(&[k, l, i]).mul(d.get(&[k, l, j])).scale(&quarter));
                let a = u.get(&[i, l, k]).sub(u.get(&[i, k, l]));
                if a.is_zero() {
                    continue;
                }
                let b = d.get(&[j, k, l]).sub(d.get(&[j, l, k]));
                v = v.sub(&a.mul(&b).scale(&quarter));
            }
        }
        v
    });

    let q3 = sym2(n, |i, j| {
        let mut v = RatFunc::zero();
        for k in 0..n {
            for l in 0..n {
                let hk = hu.get(&[k, l]);
                if hk.is_zero() {
                    continue;
                }
                let mut inner = RatFunc::zero();
                for p in 0..n {
                    for qq in 0..n {
                        let g = gi(p, qq);
                        if g.is_zero() {
                            continue;
                        }
                        let a = d.get(&[k, p, i]).mul(d.get(&[l, qq, j]));
                        let b = d
                            .get(&[i, k, p])
                            .sub(d.get(&[i, p, k]))
                            .mul(&d.get(&[j, l, qq]).sub(d.get(&[j, qq, l])));
                        inner.mul_add(g, &a.sub(&b));
                    }
                }
                v.mul_add(hk, &inner);
            }
        }
        v.scale(&-half.clone())
    });

    // w[j][k][q] = ∇_q h_jk − ∇_j h_kq − ∇_k h_jq
    let w = TensorField::from_fn(n, &[Slot::Down, Slot::Down, Slot::Down], |x| {
        let (j, k, qq) = (x[0], x[1], x[2]);
        d.get(&[j, k, qq]).sub(d.get(&[k, qq, j])).sub(d.get(&[j, qq, k]))
    });
    let q4 = sym2(n, |i, j| {
        let mut v = RatFunc::zero();
        for p in 0..n {
            for qq in 0..n {
                let hpq = hu.get(&[p, qq]);
                if hpq.is_zero() {
                    continue;
                }
                for k in 0..n {
                    for l in 0..n {
                        let hkl = hu.get(&[k, l]);
                        if hkl.is_zero() {
                            continue;
                        }
                        let t = w.get(&[j, k, qq]).mul(w.get(&[i, p, l]));
                        v.mul_add(&hpq.mul(hkl), &t);
                    }
                }
            }
        }
        v.scale(&-quarter.clone())
    });

    // Connection splitting.
    let low = TensorField::from_fn(n, &[Slot::Down, Slot::Down, Slot::Down], |x| {
        let (l, i, j) = (x[0], x[1], x[2]);
        d.get(&[i, j, l]).sub(d.get(&[j, l, i])).sub(d.get(&[i, l, j])).scale(&half)
    });
    let raise_with = |m: &dyn Fn(usize, usize) -> RatFunc, sign: bool| {
        TensorField::from_fn(n, &[Slot::Up, Slot::Down, Slot::Down], |x| {
            let (k, i, j) = (x[0], x[1], x[2]);
            let mut v = RatFunc::zero();
            for l in 0..n {
                v.mul_add(&m(k, l), low.get(&[l, i, j]));
            }
            if sign {
                v.neg()
            } else {
                v
            }
        })
    };
    let c1 = raise_with(&|k, l| gi(k, l).clone(), false);
    let c2 = raise_with(&|k, l| hu.get(&[k, l]).clone(), true);
    let s1 = divergence_part(&geo, &c1);
    let s2 = divergence_part(&geo, &c2).add(&bilinear(n, &c1, &c1))?;
    let s3 = bilinear(n, &c1, &c2).add(&bilinear(n, &c2, &c1))?;
    let s4 = bilinear(n, &c2, &c2);

    let total = geo
        .ricci()
        .add(&linear)?
        .add(&q2)?
        .add(&q3)?
        .add(&q4)?;
    let mut checks = CheckList::new();
    checks.push(zero_check("linear part equals first-order split", &linear.sub(&s1)?, &coords, false));
    checks.push(zero_check("Q2 equals second-order split", &q2.sub(&s2)?, &coords, false));
    checks.push(zero_check("Q3 equals third-order split", &q3.sub(&s3)?, &coords, false));
    checks.push(zero_check("Q4 equals fourth-order split", &q4.sub(&s4)?, &coords, false));
    let direct = {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| g0.g(i, j).add(h.get(&[i, j]))).collect())
            .collect();
        Geometry::new(Metric::new(coords.clone(), rows)?).ricci().clone()
    };
    checks.push(zero_check("assembled Ricci equals direct Ricci", &total.sub(&direct)?, &coords, false));
    checks.push(zero_check("Q2 = 0", &q2, &coords, true));
    checks.push(zero_check("Q3 = 0", &q3, &coords, true));
    checks.push(zero_check("Q4 = 0", &q4, &coords, true));

    if let Some(p) = rank {
        let walker = walker_check_coordinates(g0, p)?;
        checks.push(Check::property(
            "base in Walker coordinates of rank p",
            walker.all_pass(),
            walker.first_failure().map(|c| c.name.clone()),
        ));
        let w = image_witness(g0, h, p);
        checks.push(Check::property("image of h in N", w.is_none(), w));
        let gam = geo.christoffel();
        let mut w = None;
        'ab: for a in 0..p {
            for b in 0..p {
                for k in p..n {
                    let v = gam.get(&[k, a, b]);
                    if !v.is_zero() {
                        w = Some(format!("Gamma^{}_({},{}) = {}", coords[k], coords[a], coords[b], v));
                        break 'ab;
                    }
                }
            }
        }
        checks.push(Check::property("nabla_N N in N", w.is_none(), w));
        let mut w = None;
        'xb: for i in 0..n {
            for b in 0..p {
                for c in 0..p {
                    let mut v = RatFunc::zero();
                    for k in 0..n {
                        v.mul_add(g0.g(c, k), gam.get(&[k, i, b]));
                    }
                    if !v.is_zero() {
                        w = Some(format!("g(nabla_{} d_{}, d_{}) = {}", coords[i], coords[b], coords[c], v));
                        break 'xb;
                    }
                }
            }
        }
        checks.push(Check::property("nabla_X N in K", w.is_none(), w));
        let mut w = None;
        'lie: for a in 0..p {
            for (idx, v) in h.iter() {
                let dv = v.diff(&coords[a]);
                if !dv.is_zero() {
                    w = Some(format!("d/d{} h[{},{}] = {}", coords[a], coords[idx[0]], coords[idx[1]], dv));
                    break 'lie;
                }
            }
        }
        checks.push(Check::property("L_N h = 0", w.is_none(), w));
        let dv = geo.divergence(h)?;
        let w = dv.first_nonzero().map(|(i, v)| format!("div[{}] = {}", coords[i[0]], v));
        checks.push(Check::property("h divergence free", w.is_none(), w));
    }

    Ok(NilpotentRicci {
        linear,
        q2,
        q3,
        q4,
        total,
        split: [s1, s2, s3, s4],
        checks,
    })
}

/// `𝒜(h) = 2ρḧ + (2 − n)ḣ + 2R^{k}{}_{ij}{}^{l} h_kl − □h`, coefficientwise.
pub fn linear_operator_a(g0: &Metric<RatFunc>, h: &TensorField<Series>) -> Result<TensorField<Series>, AmbientError> {
    let n = g0.dim();
    if n < 3 {
        return Err(AmbientError::Invalid(format!("n must be at least 3, got {}", n)));
    }
    let gs = lift_metric(g0)?;
    let geo = Geometry::new(gs.clone());
    let riem = Geometry::new(g0.clone()).riemann().clone();
    let hu = gs.raise(&gs.raise(h, 0)?, 1)?;
    let hd = h.map(|s| s.d_rho());
    let hdd = hd.map(|s| s.d_rho());
    let bx = geo.box_op(h);
    let rho = Series::term(2, 0, RatFunc::one());
    let c = crate::expr::qi(2 - n as i64);
    let two = crate::expr::qi(2);
    Ok(TensorField::from_fn(n, &[Slot::Down, Slot::Down], |x| {
        let (i, j) = (x[0], x[1]);
        let mut curv = Series::exact();
        for a in 0..n {
            for b in 0..n {
                let r = riem.get(&[a, i, j, b]);
                if r.is_zero() {
                    continue;
                }
                curv = curv.add(&hu.get(&[a, b]).mul_coeff(r));
            }
        }
        rho.mul(hdd.get(&[i, j]))
            .scale(&two)
            .add(&hd.get(&[i, j]).scale(&c))
            .add(&curv.scale(&two))
            .sub(bx.get(&[i, j]))
    }))
}

/// The quadratic residual and the `E1` residual it is compared with.
#[derive(Clone, Debug)]
pub struct QuadResidual {
    /// `h^{kl}∇_k∇_l h_ij − ∇_k h_li ∇^l h^k_j + 𝒜(h)_ij + 2R_ij`. The
    /// second term enters with a minus sign: that is the form equal to `2E1`
    /// for every divergence-free `h` with image in the null distribution.
    pub value: TensorField<Series>,
    /// `2 E1` from the Fefferman–Graham residuals.
    pub twice_e1: TensorField<Series>,
    pub checks: CheckList,
}

/// Quadratic residual on a null-Ricci-Walker base in Walker coordinates of
/// rank `p`, for a divergence-free `h` with image in the null distribution,
/// through `ρ^{m−1}`.
pub fn quad_residual(
    g0: &Metric<RatFunc>,
    p: usize,
    h: &TensorField<Series>,
    m: usize,
) -> Result<QuadResidual, AmbientError> {
    let n = g0.dim();
    let walker = walker_check_coordinates(g0, p)?;
    if let Some(c) = walker.first_failure() {
        return Err(AmbientError::Precondition(format!("base is not Walker: {} fails", c.name)));
    }
    let geo0 = Geometry::new(g0.clone());
    if let Some(w) = image_witness(g0, geo0.ricci(), p) {
        return Err(AmbientError::Precondition(format!("base is not null Ricci Walker: {}", w)));
    }
    let mut keys: Vec<(i32, u32)> = h
        .components()
        .iter()
        .flat_map(|s| s.terms().map(|(k, _)| *k).collect::<Vec<_>>())
        .collect();
    keys.sort_unstable();
    keys.dedup();
    for (e2, k) in keys {
        let c = coefficient(h, e2, k);
        if let Some(w) = image_witness(g0, &c, p) {
            return Err(AmbientError::Precondition(format!("image of h is not in N: {}", w)));
        }
        if let Some((i, v)) = geo0.divergence(&c)?.first_nonzero() {
            return Err(AmbientError::Precondition(format!(
                "h is not divergence free: div[{}] = {}",
                g0.coords()[i[0]],
                v
            )));
        }
    }
    let gs = lift_metric(g0)?;
    let geo = Geometry::new(gs.clone());
    let d = geo.covariant_derivative(h);
    let dd = geo.covariant_derivative(&d);
    let hu = gs.raise(&gs.raise(h, 0)?, 1)?;
    // v[b][j][a] = ∇^a h^b_j
    let v = gs.raise(&gs.raise(&d, 0)?, 2)?;
    let a_op = linear_operator_a(g0, h)?;
    let ric = geo0.ricci();
    let two = crate::expr::qi(2);
    let value = TensorField::from_fn(n, &[Slot::Down, Slot::Down], |x| {
        let (i, j) = (x[0], x[1]);
        let mut s = a_op.get(&[i, j]).add(&super::lift(ric.get(&[i, j])).scale(&two));
        for k in 0..n {
            for l in 0..n {
                s.mul_add(hu.get(&[k, l]), dd.get(&[i, j, l, k]));
                s = s.sub(&d.get(&[l, i, k]).mul(v.get(&[k, j, l])));
            }
        }
        s
    });
    let res = fg_residuals(g0, h, m)?;
    let twice_e1 = res.e1.map(|s| s.scale(&two));
    let cut = tensor_trunc(&twice_e1).min(2 * m as i32);
    let value = truncate_tensor(&value, cut);
    let diff = value
        .sub(&truncate_tensor(&twice_e1, cut))
        .map_err(AmbientError::from)?;
    let mut checks = CheckList::new();
    let w = first_nonzero_below(&diff, cut, g0.coords());
    checks.push(Check::assertion("quadratic residual equals 2 E1", w.is_none(), w));
    let w = first_nonzero_below(&value, cut, g0.coords());
    checks.push(Check::property("quadratic residual vanishes", w.is_none(), w));
    Ok(QuadResidual {
        value,
        twice_e1,
        checks,
    })
}

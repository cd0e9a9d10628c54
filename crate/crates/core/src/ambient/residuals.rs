//! The three Fefferman–Graham residual families and the direct ambient
//! Ricci tensor used to cross-check them.

use crate::expr::q;
use crate::ratfunc::RatFunc;
use crate::report::{Check, CheckList};
use crate::scalar::Scalar;
use crate::tensor::{Geometry, Metric, Slot, TensorField};

use super::{first_nonzero_below, tensor_trunc, truncate_tensor, AmbientError, AmbientMetric, Series};

/// Residuals of the ambient equations for `g(ρ) = g0 + h`:
///
/// * `E1_ij = ρg̈_ij − ρg^{kl}ġ_ikġ_jl + ½ρ g^{kl}ġ_kl ġ_ij − (n/2 − 1)ġ_ij − ½g^{kl}ġ_kl g_ij + Ric_ij(g)`
/// * `E2_i = g^{kl}(∇_kġ_il − ∇_iġ_kl)`
/// * `E3 = g^{kl}g̈_kl − ½g^{kl}g^{pq}ġ_kpġ_lq`
///
/// With ambient coordinates `(t, x, ρ)` these are `Ric̃_ij`, `2Ric̃_iρ` and
/// `−2Ric̃_ρρ`. Each series is truncated where it stops being determined by
/// the known part of `h`.
#[derive(Clone, Debug)]
pub struct FGResiduals {
    pub e1: TensorField<Series>,
    pub e2: TensorField<Series>,
    pub e3: Series,
    /// Requested order `m`: residuals are wanted through `ρ^{m−1}`.
    pub order: usize,
    coords: Vec<String>,
}

impl FGResiduals {
    /// Doubled exponents below which `(E1, E2, E3)` are known.
    pub fn known(&self) -> (i32, i32, i32) {
        (tensor_trunc(&self.e1), tensor_trunc(&self.e2), self.e3.trunc())
    }

    pub fn e1_vanishes(&self) -> bool {
        self.e1.components().iter().all(|s| s.is_zero())
    }

    pub fn e2_vanishes(&self) -> bool {
        self.e2.components().iter().all(|s| s.is_zero())
    }

    pub fn e3_vanishes(&self) -> bool {
        self.e3.is_zero()
    }

    pub fn vanish(&self) -> bool {
        self.e1_vanishes() && self.e2_vanishes() && self.e3_vanishes()
    }

    /// One assertion per residual family, with the first nonzero component
    /// as witness.
    pub fn checks(&self) -> CheckList {
        let (k1, k2, k3) = self.known();
        let mut out = CheckList::new();
        let w = first_nonzero_below(&self.e1, k1, &self.coords).map(|w| format!("E1{}", w));
        out.push(Check::assertion(
            format!("E1 vanishes below rho^{}", fmt_half(k1)),
            w.is_none(),
            w,
        ));
        let w = first_nonzero_below(&self.e2, k2, &self.coords).map(|w| format!("E2{}", w));
        out.push(Check::assertion(
            format!("E2 vanishes below rho^{}", fmt_half(k2)),
            w.is_none(),
            w,
        ));
        let w = (!self.e3.is_zero()).then(|| format!("E3 = {}", self.e3));
        out.push(Check::assertion(
            format!("E3 vanishes below rho^{}", fmt_half(k3)),
            w.is_none(),
            w,
        ));
        out
    }
}

/// Render a doubled exponent as an integer or half-integer.
pub(crate) fn fmt_half(e2: i32) -> String {
    if e2 == crate::series::EXACT {
        "inf".into()
    } else if e2 % 2 == 0 {
        format!("{}", e2 / 2)
    } else {
        format!("{}/2", e2)
    }
}

/// `E1` for a series metric `g(ρ)`; also returns `ġ` and `g^{kl}ġ_kl`.
pub(crate) fn e1_of(g: &Metric<Series>) -> (TensorField<Series>, TensorField<Series>, Series, Geometry<Series>) {
    let n = g.dim();
    let gd = g.tensor().map(|s| s.d_rho());
    let gdd = gd.map(|s| s.d_rho());
    let geo = Geometry::new(g.clone());
    let ric = geo.ricci().clone();
    let tr = g.trace(&gd).expect("(0,2) tensor");
    // gdu[k][j] = g^{kl} ġ_lj
    let gdu = g.raise(&gd, 0).expect("slot 0 is covariant");
    let rho = Series::term(2, 0, RatFunc::one());
    let half = q(1, 2);
    let c_lin = q(n as i64 - 2, 2);
    let e1 = TensorField::from_fn(n, &[Slot::Down, Slot::Down], |x| {
        let (i, j) = (x[0], x[1]);
        let mut quad = Series::exact();
        for k in 0..n {
            quad.mul_add(gd.get(&[i, k]), gdu.get(&[k, j]));
        }
        let inner = gdd
            .get(&[i, j])
            .sub(&quad)
            .add(&tr.mul(gd.get(&[i, j])).scale(&half));
        rho.mul(&inner)
            .sub(&gd.get(&[i, j]).scale(&c_lin))
            .sub(&tr.mul(g.g(i, j)).scale(&half))
            .add(ric.get(&[i, j]))
    });
    (e1, gd, tr, geo)
}

/// Fefferman–Graham residuals of `g0 + h` through `ρ^{m−1}`. `h` must be
/// known through `ρ^m`; when it is known one order further, `E3` is also
/// returned through `ρ^{m−1}`, otherwise through `ρ^{m−2}`.
pub fn fg_residuals(
    g0: &Metric<RatFunc>,
    h: &TensorField<Series>,
    m: usize,
) -> Result<FGResiduals, AmbientError> {
    let a = AmbientMetric::new(g0.clone(), h.clone())?;
    a.residuals(m)
}

impl AmbientMetric {
    /// See [`fg_residuals`].
    pub fn residuals(&self, m: usize) -> Result<FGResiduals, AmbientError> {
        let m = m as i32;
        let needed = 2 * (m + 1);
        let available = self.trunc();
        if available < needed {
            return Err(AmbientError::Truncation { needed, available });
        }
        let t = available.min(2 * (m + 2));
        let g = self.g_rho(t)?;
        let n = g.dim();
        let (e1, gd, _, geo) = e1_of(&g);
        let dgd = geo.covariant_derivative(&gd);
        let e2 = TensorField::from_fn(n, &[Slot::Down], |x| {
            let i = x[0];
            let mut v = Series::exact();
            for k in 0..n {
                for l in 0..n {
                    let gi = g.inv(k, l);
                    if gi.is_zero() {
                        continue;
                    }
                    v.mul_add(gi, &dgd.get(&[i, l, k]).sub(dgd.get(&[k, l, i])));
                }
            }
            v
        });
        let gdd = gd.map(|s| s.d_rho());
        let mut e3 = g.trace(&gdd)?;
        let gdu = g.raise(&gd, 0)?;
        let mut sq = Series::exact();
        for a in 0..n {
            for b in 0..n {
                sq.mul_add(gdu.get(&[a, b]), gdu.get(&[b, a]));
            }
        }
        e3 = e3.sub(&sq.scale(&q(1, 2)));
        let cut = 2 * m;
        Ok(FGResiduals {
            e1: truncate_tensor(&e1, cut),
            e2: truncate_tensor(&e2, cut),
            e3: e3.truncate(cut),
            order: m as usize,
            coords: self.base().coords().to_vec(),
        })
    }
}

/// Ricci tensor of the full `(n+2)`-dimensional ambient metric over the
/// series ring, coordinates `(t, x, ρ)`, through `ρ^{m−1}` where known.
pub fn ambient_ricci_direct(a: &AmbientMetric, m: usize) -> Result<TensorField<Series>, AmbientError> {
    let m = m as i32;
    let needed = 2 * (m + 1);
    let available = a.trunc();
    if available < needed {
        return Err(AmbientError::Truncation { needed, available });
    }
    let t = available.min(2 * (m + 2));
    let g = a.ambient_metric(t)?;
    let geo = Geometry::new(g);
    Ok(truncate_tensor(geo.ricci(), 2 * m))
}

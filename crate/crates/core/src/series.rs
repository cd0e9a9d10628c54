//! Truncated polyhomogeneous series in rho.
//!
//! Terms are `c * rho^(e/2) * log(rho)^k`, keyed by the doubled exponent
//! `e` so that half-integer powers stay exact. A series knows its
//! truncation: every exponent at or above it is unknown.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;

use crate::expr::{q, qi, Atom, Expr, ExprError, Monomial, Q, RHO};
use crate::scalar::Scalar;

/// Doubled exponent used for exact (never truncated) series.
pub const EXACT: i32 = i32::MAX;

#[derive(Clone, PartialEq)]
pub struct RhoSeries<C = Expr> {
    terms: BTreeMap<(i32, u32), C>,
    trunc: i32,
}

fn sat_add(a: i32, b: i32) -> i32 {
    if a == EXACT || b == EXACT {
        EXACT
    } else {
        a.saturating_add(b)
    }
}

impl<C: Scalar> RhoSeries<C> {
    /// Empty series known to vanish below the doubled exponent `trunc`.
    pub fn zero_to(trunc: i32) -> Self {
        RhoSeries {
            terms: BTreeMap::new(),
            trunc,
        }
    }

    /// Series whose terms are all known (a finite sum).
    pub fn exact() -> Self {
        Self::zero_to(EXACT)
    }

    pub fn constant(c: C) -> Self {
        let mut s = Self::exact();
        s.insert(0, 0, c);
        s
    }

    /// A single term `c rho^(e2/2) log^k`, exact.
    pub fn term(e2: i32, k: u32, c: C) -> Self {
        let mut s = Self::exact();
        s.insert(e2, k, c);
        s
    }

    /// Doubled truncation exponent.
    pub fn trunc(&self) -> i32 {
        self.trunc
    }

    pub fn is_exact(&self) -> bool {
        self.trunc == EXACT
    }

    pub fn with_trunc(mut self, trunc: i32) -> Self {
        self.trunc = self.trunc.min(trunc);
        let t = self.trunc;
        self.terms.retain(|(e, _), _| *e < t);
        self
    }

    pub fn insert(&mut self, e2: i32, k: u32, c: C) {
        if e2 >= self.trunc || c.is_zero() {
            return;
        }
        match self.terms.get_mut(&(e2, k)) {
            Some(x) => {
                *x = x.add(&c);
                if x.is_zero() {
                    self.terms.remove(&(e2, k));
                }
            }
            None => {
                self.terms.insert((e2, k), c);
            }
        }
    }

    pub fn coeff(&self, e2: i32, k: u32) -> C {
        self.terms.get(&(e2, k)).cloned().unwrap_or_else(C::zero)
    }

    /// Coefficient of `rho^j` for an integer `j` without log factor.
    pub fn coeff_int(&self, j: i32) -> C {
        self.coeff(2 * j, 0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(i32, u32), &C)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.is_zero())
    }

    /// Smallest doubled exponent with a nonzero coefficient.
    pub fn valuation(&self) -> i32 {
        self.terms
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((e, _), _)| *e)
            .min()
            .unwrap_or(self.trunc)
    }

    pub fn max_log_power(&self) -> u32 {
        self.terms.keys().map(|(_, k)| *k).max().unwrap_or(0)
    }

    pub fn map<F: Fn(&C) -> C>(&self, f: F) -> Self {
        let mut out = Self::zero_to(self.trunc);
        for ((e, k), c) in &self.terms {
            out.insert(*e, *k, f(c));
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = Self::zero_to(self.trunc.min(o.trunc));
        for ((e, k), c) in self.terms.iter().chain(o.terms.iter()) {
            out.insert(*e, *k, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &Q) -> Self {
        self.map(|c| c.scale(s))
    }

    pub fn mul_coeff(&self, s: &C) -> Self {
        if s.is_zero() {
            return Self::zero_to(self.trunc);
        }
        self.map(|c| c.mul(s))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let trunc = sat_add(self.trunc, o.valuation()).min(sat_add(o.trunc, self.valuation()));
        let mut out = Self::zero_to(trunc);
        for ((e1, k1), c1) in &self.terms {
            for ((e2, k2), c2) in &o.terms {
                let e = e1 + e2;
                if e >= trunc {
                    continue;
                }
                out.insert(e, k1 + k2, c1.mul(c2));
            }
        }
        out
    }

    /// Multiply by `rho^(e2/2)`.
    pub fn shift(&self, e2: i32) -> Self {
        let mut out = Self::zero_to(sat_add(self.trunc, e2));
        for ((e, k), c) in &self.terms {
            out.insert(e + e2, *k, c.clone());
        }
        out
    }

    /// Multiply by `log(rho)`.
    pub fn mul_log(&self) -> Self {
        let mut out = Self::zero_to(self.trunc);
        for ((e, k), c) in &self.terms {
            out.insert(*e, k + 1, c.clone());
        }
        out
    }

    /// d/drho, termwise: `d(rho^a log^k) = a rho^(a-1) log^k + k rho^(a-1) log^(k-1)`.
    pub fn d_rho(&self) -> Self {
        let mut out = Self::zero_to(if self.trunc == EXACT { EXACT } else { self.trunc - 2 });
        for ((e, k), c) in &self.terms {
            if *e != 0 {
                out.insert(e - 2, *k, c.scale(&q(*e as i64, 2)));
            }
            if *k > 0 {
                out.insert(e - 2, k - 1, c.scale(&qi(*k as i64)));
            }
        }
        out
    }

    /// Coefficientwise partial derivative in a coordinate other than rho.
    pub fn diff_coeffs(&self, v: &str) -> Self {
        self.map(|c| c.diff(v))
    }

    /// Multiplicative inverse; requires an invertible leading coefficient
    /// without log factor.
    pub fn inv(&self) -> Option<Self> {
        let val = self.valuation();
        if val >= self.trunc {
            return None;
        }
        if self.terms.keys().any(|(e, k)| *e == val && *k > 0) {
            return None;
        }
        let c0 = self.coeff(val, 0);
        let c0inv = c0.inv()?;
        // self = c0 rho^val (1 + u) with u of positive valuation
        let normalized = self.shift(-val).mul_coeff(&c0inv);
        let mut u = normalized.clone();
        u.terms.remove(&(0, 0));
        let rel_trunc = normalized.trunc;
        let mut result = Self::constant(C::one()).with_trunc(rel_trunc);
        if !u.is_zero() {
            if rel_trunc == EXACT {
                // The inverse would be an infinite sum.
                return None;
            }
            let uval = u.valuation();
            let mut power = Self::constant(C::one());
            let mut sign = Q::one();
            let mut k = 1;
            loop {
                power = power.mul(&u).with_trunc(rel_trunc);
                if power.is_zero() {
                    break;
                }
                sign = -sign;
                result = result.add(&power.scale(&sign));
                k += 1;
                if uval.saturating_mul(k) >= rel_trunc {
                    break;
                }
            }
        }
        Some(result.shift(-val).mul_coeff(&c0inv))
    }

    /// Drop all terms with doubled exponent `>= trunc`.
    pub fn truncate(&self, trunc: i32) -> Self {
        self.clone().with_trunc(trunc)
    }
}

impl RhoSeries<Expr> {
    /// Recombine into an expression (integer exponents only).
    pub fn to_expr(&self) -> Result<Expr, ExprError> {
        let mut out = Expr::zero();
        for ((e, k), c) in &self.terms {
            if e % 2 != 0 || *e < 0 {
                return Err(ExprError::RhoDependence(format!(
                    "exponent {}/2 is not a nonnegative integer",
                    e
                )));
            }
            let mut m = Monomial::one();
            if *e > 0 {
                m = m.mul(&Monomial::single(Atom::var(RHO), (*e / 2) as u32));
            }
            if *k > 0 {
                m = m.mul(&Monomial::single(Atom::LogRho, *k));
            }
            out = out.add(&c.mul_monomial(&m, &Q::one()));
        }
        Ok(out)
    }
}

/// Extract the rho-series of a polynomial in rho and log(rho) whose other
/// atoms are rho-free, keeping exponents below `max_order`.
pub fn rho_coefficients(e: &Expr, max_order: Q) -> Result<RhoSeries<Expr>, ExprError> {
    for a in e.atoms() {
        if let Atom::Func(f) = &a {
            if f.depends_on(RHO) && f.args.is_some() {
                return Err(ExprError::RhoDependence(format!(
                    "function `{}` has rho among its arguments",
                    f.name
                )));
            }
        }
    }
    // Exponents up to and including max_order are kept.
    let t2 = max_order * qi(2);
    let trunc = num_traits::ToPrimitive::to_i32(&t2.floor().to_integer())
        .map(|t| t + 1)
        .unwrap_or(EXACT);
    let rho = Atom::var(RHO);
    let mut out = RhoSeries::zero_to(trunc);
    for (m, c) in e.terms() {
        let (er, rest) = m.split_off(&rho);
        let (el, rest) = rest.split_off(&Atom::LogRho);
        if el > 1 {
            return Err(ExprError::RhoDependence("log(rho) power above one".into()));
        }
        out.insert(2 * er as i32, el, Expr::monomial(rest, c.clone()));
    }
    Ok(out)
}

impl<C: Scalar> Scalar for RhoSeries<C> {
    fn zero() -> Self {
        Self::exact()
    }
    fn one() -> Self {
        Self::constant(C::one())
    }
    fn from_q(c: Q) -> Self {
        Self::constant(C::from_q(c))
    }
    fn from_expr(e: &Expr) -> Self {
        Self::constant(C::from_expr(e))
    }
    fn add(&self, o: &Self) -> Self {
        RhoSeries::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        RhoSeries::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        RhoSeries::mul(self, o)
    }
    fn neg(&self) -> Self {
        RhoSeries::neg(self)
    }
    fn scale(&self, c: &Q) -> Self {
        RhoSeries::scale(self, c)
    }
    fn is_zero(&self) -> bool {
        RhoSeries::is_zero(self)
    }
    fn diff(&self, v: &str) -> Self {
        if v == RHO {
            self.d_rho()
        } else {
            self.diff_coeffs(v)
        }
    }
    fn inv(&self) -> Option<Self> {
        RhoSeries::inv(self)
    }
}

impl<C: Scalar> fmt::Display for RhoSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for ((e, k), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", c)?;
            if *e != 0 {
                if e % 2 == 0 {
                    write!(f, "*rho^{}", e / 2)?;
                } else {
                    write!(f, "*rho^({}/2)", e)?;
                }
            }
            if *k == 1 {
                write!(f, "*log(rho)")?;
            } else if *k > 1 {
                write!(f, "*log(rho)^{}", k)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        if self.trunc != EXACT {
            if self.trunc % 2 == 0 {
                write!(f, " + O(rho^{})", self.trunc / 2)?;
            } else {
                write!(f, " + O(rho^({}/2))", self.trunc)?;
            }
        }
        Ok(())
    }
}

impl<C: Scalar> fmt::Debug for RhoSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RhoSeries[{}]", self)
    }
}

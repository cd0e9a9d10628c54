//! The coefficient ring abstraction shared by all tensor algorithms.
//!
//! Curvature code is written once against [`Scalar`] and runs on rational
//! functions of the coordinates as well as on truncated rho-series whose
//! coefficients are rational functions.

use std::fmt;

use crate::expr::{Expr, Q};

pub trait Scalar: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_q(c: Q) -> Self;
    fn from_expr(e: &Expr) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, c: &Q) -> Self;
    fn is_zero(&self) -> bool;
    /// Partial derivative with respect to a variable.
    fn diff(&self, v: &str) -> Self;
    /// Multiplicative inverse, when it exists in the ring.
    fn inv(&self) -> Option<Self>;

    fn add_assign(&mut self, o: &Self) {
        *self = Scalar::add(self, o);
    }

    fn mul_add(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        *self = Scalar::add(self, &Scalar::mul(a, b));
    }
}

impl Scalar for Expr {
    fn zero() -> Self {
        Expr::zero()
    }
    fn one() -> Self {
        Expr::one()
    }
    fn from_q(c: Q) -> Self {
        Expr::constant(c)
    }
    fn from_expr(e: &Expr) -> Self {
        e.clone()
    }
    fn add(&self, o: &Self) -> Self {
        Expr::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Expr::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Expr::mul(self, o)
    }
    fn neg(&self) -> Self {
        Expr::neg(self)
    }
    fn scale(&self, c: &Q) -> Self {
        Expr::scale(self, c)
    }
    fn is_zero(&self) -> bool {
        Expr::is_zero(self)
    }
    fn diff(&self, v: &str) -> Self {
        // Series coefficients never contain log(rho), so this cannot fail.
        Expr::diff(self, v).expect("log(rho) does not occur in coefficient expressions")
    }
    fn inv(&self) -> Option<Self> {
        let c = self.as_constant()?;
        if num_traits::Zero::is_zero(&c) {
            None
        } else {
            Some(Expr::constant(num_traits::One::one()).div_q(&c))
        }
    }
}

/// Sum of a sequence of scalars.
pub fn sum<S: Scalar, I: IntoIterator<Item = S>>(it: I) -> S {
    let mut acc = S::zero();
    for x in it {
        acc.add_assign(&x);
    }
    acc
}

//! Exact symbolic expressions.
//!
//! An [`Expr`] is a polynomial with rational coefficients in a set of atoms:
//! plain variables, abstract function symbols carrying a derivative
//! multi-index, and `log(rho)`. The representation is a sorted map from
//! monomials to nonzero coefficients, so structural equality is
//! mathematical equality.

mod eval;
mod parse;
pub mod poly;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use eval::{eval_num, FuncValues};
pub use parse::{parse, parse_ast, parse_with, Ast, ParseContext};
pub(crate) use parse::{eval_exponent, eval_leaf};

/// Arbitrary precision rational number.
pub type Q = BigRational;

/// Name of the distinguished radial variable.
pub const RHO: &str = "rho";

/// Build a rational from a numerator and denominator.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Build an integer rational.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("function `{name}` takes {expected} arguments but {found} were given (position {pos})")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        pos: usize,
    },
    #[error("argument list of `{name}` does not match its declaration (position {pos})")]
    ArgumentMismatch { name: String, pos: usize },
    #[error("non-integer exponent at position {pos}")]
    NonIntegerExponent { pos: usize },
    #[error("negative exponent of a non-constant base at position {pos}")]
    NegativeExponent { pos: usize },
    #[error("division by a non-constant expression at position {pos}")]
    NonConstantDivision { pos: usize },
    #[error("division by zero at position {pos}")]
    DivisionByZero { pos: usize },
    #[error("undeclared variable `{name}` at position {pos}")]
    Undeclared { name: String, pos: usize },
    #[error("unbound atom `{0}` in numeric evaluation")]
    Unbound(String),
    #[error("derivative of log(rho) leaves the polynomial ring")]
    LogDerivative,
    #[error("variable `{0}` is a function argument and cannot be substituted")]
    FunctionArgument(String),
    #[error("non-representable rho dependence: {0}")]
    RhoDependence(String),
}

/// Abstract function symbol with an applied derivative multi-index.
///
/// `args == None` means the argument list was not declared, in which case
/// the function is treated as depending on every variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FuncAtom {
    pub name: Arc<str>,
    pub args: Option<Arc<[Arc<str>]>>,
    /// Sorted map variable -> derivative count (counts are positive).
    pub derivs: Vec<(Arc<str>, u32)>,
}

impl FuncAtom {
    pub fn new(name: &str, args: Option<&[&str]>) -> Self {
        FuncAtom {
            name: Arc::from(name),
            args: args.map(|a| a.iter().map(|s| Arc::from(*s)).collect::<Vec<_>>().into()),
            derivs: Vec::new(),
        }
    }

    pub fn depends_on(&self, v: &str) -> bool {
        match &self.args {
            None => v != RHO,
            Some(a) => a.iter().any(|x| &**x == v),
        }
    }

    /// The atom obtained by one more derivative in `v`, or `None` when the
    /// derivative vanishes identically.
    pub fn derive(&self, v: &str) -> Option<FuncAtom> {
        if !self.depends_on(v) {
            return None;
        }
        let mut out = self.clone();
        match out.derivs.binary_search_by(|(n, _)| (**n).cmp(v)) {
            Ok(i) => out.derivs[i].1 += 1,
            Err(i) => out.derivs.insert(i, (Arc::from(v), 1)),
        }
        Some(out)
    }

    pub fn derivative_order(&self) -> u32 {
        self.derivs.iter().map(|(_, c)| c).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(Arc<str>),
    Func(FuncAtom),
    LogRho,
}

impl Atom {
    pub fn var(name: &str) -> Atom {
        Atom::Var(Arc::from(name))
    }
}

/// Sorted product of atoms with positive integer exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub Vec<(Atom, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn single(a: Atom, e: u32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(a, e)])
        }
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent_of(&self, a: &Atom) -> u32 {
        match self.0.binary_search_by(|(x, _)| x.cmp(a)) {
            Ok(i) => self.0[i].1,
            Err(_) => 0,
        }
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &o.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0.clone(), a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `self / o` when `o` divides `self`.
    pub fn div(&self, o: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (a, e) in &self.0 {
            if j < o.0.len() && o.0[j].0 == *a {
                let f = o.0[j].1;
                if f > *e {
                    return None;
                }
                if f < *e {
                    out.push((a.clone(), e - f));
                }
                j += 1;
            } else if j < o.0.len() && o.0[j].0 < *a {
                return None;
            } else {
                out.push((a.clone(), *e));
            }
        }
        if j < o.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Remove `a` entirely, returning its exponent and the remainder.
    pub fn split_off(&self, a: &Atom) -> (u32, Monomial) {
        let mut rest = Vec::with_capacity(self.0.len());
        let mut e = 0;
        for (x, k) in &self.0 {
            if x == a {
                e = *k;
            } else {
                rest.push((x.clone(), *k));
            }
        }
        (e, Monomial(rest))
    }

    /// Componentwise minimum of exponents (monomial gcd).
    pub fn gcd(&self, o: &Monomial) -> Monomial {
        let mut out = Vec::new();
        for (a, e) in &self.0 {
            let f = o.exponent_of(a);
            if f > 0 {
                out.push((a.clone(), (*e).min(f)));
            }
        }
        Monomial(out)
    }
}

/// Polynomial in atoms with exact rational coefficients, in normal form.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr {
    terms: BTreeMap<Monomial, Q>,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self)
    }
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn one() -> Self {
        Expr::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Expr { terms }
    }

    pub fn int(i: i64) -> Self {
        Expr::constant(qi(i))
    }

    pub fn rational(n: i64, d: i64) -> Self {
        Expr::constant(q(n, d))
    }

    pub fn var(name: &str) -> Self {
        Expr::atom(Atom::var(name))
    }

    pub fn atom(a: Atom) -> Self {
        Expr::monomial(Monomial::single(a, 1), Q::one())
    }

    pub fn func(f: FuncAtom) -> Self {
        Expr::atom(Atom::Func(f))
    }

    pub fn log_rho() -> Self {
        Expr::atom(Atom::LogRho)
    }

    pub fn monomial(m: Monomial, c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Expr { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Q)>>(it: I) -> Self {
        let mut e = Expr::zero();
        for (m, c) in it {
            e.add_term(m, c);
        }
        e
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    /// The value if the expression is a constant (including zero).
    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                if m.is_one() {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn add(&self, o: &Expr) -> Expr {
        let (big, small) = if self.terms.len() >= o.terms.len() {
            (self, o)
        } else {
            (o, self)
        };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Expr) -> Expr {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Expr {
        Expr {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn scale(&self, s: &Q) -> Expr {
        if s.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, o: &Expr) -> Expr {
        if self.is_zero() || o.is_zero() {
            return Expr::zero();
        }
        if let Some(c) = self.as_constant() {
            return o.scale(&c);
        }
        if let Some(c) = o.as_constant() {
            return self.scale(&c);
        }
        let mut acc: BTreeMap<Monomial, Q> = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let m = m1.mul(m2);
                let c = c1 * c2;
                match acc.entry(m) {
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert(c);
                    }
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        *e.get_mut() += c;
                    }
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Expr { terms: acc }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Q) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Expr {
        let mut out = Expr::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// All atoms that occur in the expression.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut s = BTreeSet::new();
        for m in self.terms.keys() {
            for (a, _) in &m.0 {
                s.insert(a.clone());
            }
        }
        s
    }

    /// Names of plain variables occurring in the expression.
    pub fn variables(&self) -> BTreeSet<String> {
        self.atoms()
            .into_iter()
            .filter_map(|a| match a {
                Atom::Var(v) => Some(v.to_string()),
                _ => None,
            })
            .collect()
    }

    /// True when the expression may depend on `v` (through a variable, a
    /// function argument, or `log(rho)` when `v` is rho).
    pub fn depends_on(&self, v: &str) -> bool {
        self.atoms().iter().any(|a| atom_depends_on(a, v))
    }

    /// Total degree in the given atom.
    pub fn degree_in(&self, a: &Atom) -> u32 {
        self.terms.keys().map(|m| m.exponent_of(a)).max().unwrap_or(0)
    }

    /// Exact partial derivative with respect to the variable `v`.
    pub fn diff(&self, v: &str) -> Result<Expr, ExprError> {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            for (idx, (a, e)) in m.0.iter().enumerate() {
                let d = match a {
                    Atom::Var(name) => {
                        if &**name == v {
                            Expr::one()
                        } else {
                            continue;
                        }
                    }
                    Atom::Func(f) => match f.derive(v) {
                        Some(g) => Expr::func(g),
                        None => continue,
                    },
                    Atom::LogRho => {
                        if v != RHO {
                            continue;
                        }
                        // d/drho of rho^k log^e = e rho^(k-1) log^(e-1) * rho^k/rho
                        let k = m.exponent_of(&Atom::var(RHO));
                        if k == 0 {
                            return Err(ExprError::LogDerivative);
                        }
                        let mut rest = m.0.clone();
                        rest.remove(idx);
                        if *e > 1 {
                            rest.insert(idx, (Atom::LogRho, e - 1));
                        }
                        let rest = Monomial(rest);
                        let rho = Atom::var(RHO);
                        let rest = rest.div(&Monomial::single(rho, 1)).expect("rho present");
                        out.add_term(rest, c * qi(*e as i64));
                        continue;
                    }
                };
                let mut rest = m.0.clone();
                if *e > 1 {
                    rest[idx].1 -= 1;
                } else {
                    rest.remove(idx);
                }
                let coeff = c * qi(*e as i64);
                for (dm, dc) in &d.terms {
                    out.add_term(Monomial(rest.clone()).mul(dm), &coeff * dc);
                }
            }
        }
        Ok(out)
    }

    /// Formal derivative with respect to an atom treated as an independent
    /// indeterminate (used by the polynomial algorithms).
    pub fn diff_atom(&self, a: &Atom) -> Expr {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(a);
            if e == 0 {
                continue;
            }
            let mono = rest.mul(&Monomial::single(a.clone(), e - 1));
            out.add_term(mono, c * qi(e as i64));
        }
        out
    }

    /// Simultaneous substitution of variables by expressions.
    pub fn substitute(&self, bindings: &BTreeMap<String, Expr>) -> Result<Expr, ExprError> {
        if bindings.is_empty() {
            return Ok(self.clone());
        }
        for a in self.atoms() {
            match &a {
                Atom::Func(f) => {
                    for v in bindings.keys() {
                        if f.depends_on(v) && bindings[v] != Expr::var(v) {
                            return Err(ExprError::FunctionArgument(v.clone()));
                        }
                    }
                }
                Atom::LogRho => {
                    if bindings.contains_key(RHO) && bindings[RHO] != Expr::var(RHO) {
                        return Err(ExprError::FunctionArgument(RHO.to_string()));
                    }
                }
                Atom::Var(_) => {}
            }
        }
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let mut t = Expr::constant(c.clone());
            let mut keep = Vec::new();
            for (a, e) in &m.0 {
                match a {
                    Atom::Var(v) if bindings.contains_key(&**v) => {
                        t = t.mul(&bindings[&**v].pow(*e));
                    }
                    _ => keep.push((a.clone(), *e)),
                }
            }
            out = out.add(&t.mul_monomial(&Monomial(keep), &Q::one()));
        }
        Ok(out)
    }

    /// Replace function atoms using a resolver; atoms for which the
    /// resolver returns `None` are kept.
    pub fn replace_functions<F>(&self, resolve: &F) -> Expr
    where
        F: Fn(&FuncAtom) -> Option<Expr>,
    {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let mut t = Expr::constant(c.clone());
            let mut keep = Vec::new();
            for (a, e) in &m.0 {
                if let Atom::Func(f) = a {
                    if let Some(r) = resolve(f) {
                        t = t.mul(&r.pow(*e));
                        continue;
                    }
                }
                keep.push((a.clone(), *e));
            }
            out = out.add(&t.mul_monomial(&Monomial(keep), &Q::one()));
        }
        out
    }

    /// Coefficient of `a^k` when viewed as a polynomial in the atom `a`.
    pub fn coeff_of(&self, a: &Atom, k: u32) -> Expr {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(a);
            if e == k {
                out.add_term(rest, c.clone());
            }
        }
        out
    }

    /// Decompose as a polynomial in `a`: entry `k` is the coefficient of `a^k`.
    pub fn coefficients_in(&self, a: &Atom) -> Vec<Expr> {
        let d = self.degree_in(a) as usize;
        let mut out = vec![Expr::zero(); if self.is_zero() { 0 } else { d + 1 }];
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(a);
            out[e as usize].add_term(rest, c.clone());
        }
        out
    }

    /// Coefficient of `rho^k log(rho)^j`.
    pub fn rho_log_coeff(&self, k: u32, j: u32) -> Expr {
        let rho = Atom::var(RHO);
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(&rho);
            let (l, rest) = rest.split_off(&Atom::LogRho);
            if e == k && l == j {
                out.add_term(rest, c.clone());
            }
        }
        out
    }

    /// Rational content: the positive gcd of numerators over the lcm of
    /// denominators, signed so that the leading coefficient of the quotient
    /// is positive.
    pub fn content(&self) -> Q {
        use num_integer::Integer;
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            return Q::one();
        }
        let mut out = Q::new(num, den);
        if let Some((_, c)) = poly::leading_term(self) {
            if c.is_negative() {
                out = -out;
            }
        }
        out
    }

    /// Largest monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Monomial::one();
        };
        let mut g = first.clone();
        for m in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    /// Divide every coefficient by a nonzero rational.
    pub fn div_q(&self, s: &Q) -> Expr {
        self.scale(&(Q::one() / s))
    }
}

fn atom_depends_on(a: &Atom, v: &str) -> bool {
    match a {
        Atom::Var(n) => &**n == v,
        Atom::Func(f) => f.depends_on(v),
        Atom::LogRho => v == RHO,
    }
}

impl From<i64> for Expr {
    fn from(i: i64) -> Self {
        Expr::int(i)
    }
}

impl From<Q> for Expr {
    fn from(c: Q) -> Self {
        Expr::constant(c)
    }
}

macro_rules! expr_binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                Expr::$f(self, o)
            }
        }
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                Expr::$f(&self, &o)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                Expr::$f(&self, o)
            }
        }
    };
}
expr_binop!(Add, add, add);
expr_binop!(Sub, sub, sub);
expr_binop!(Mul, mul, mul);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::to_string(self))
    }
}

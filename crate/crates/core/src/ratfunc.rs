//! Rational functions with factored denominators.
//!
//! A [`RatFunc`] is `num / prod f_i^k_i` where the `f_i` are monic
//! squarefree polynomials. New denominators are split into squarefree
//! factors when they first appear; afterwards cancellation only needs
//! exact division by the known factors.

use std::collections::HashMap;
use std::fmt;

use num_traits::Zero;

use crate::expr::poly::{div_exact, squarefree};
use crate::expr::{
    eval_exponent, eval_leaf, parse_ast, Ast, Atom, Expr, ExprError, FuncAtom, ParseContext, Q, RHO,
};
use crate::scalar::Scalar;
use crate::series::RhoSeries;

#[derive(Clone)]
pub struct RatFunc {
    num: Expr,
    den: Vec<(Expr, u32)>,
}

impl RatFunc {
    pub fn from_expr(e: Expr) -> Self {
        RatFunc {
            num: e,
            den: Vec::new(),
        }
    }

    pub fn numerator(&self) -> &Expr {
        &self.num
    }

    pub fn denominator_factors(&self) -> &[(Expr, u32)] {
        &self.den
    }

    /// Expanded denominator.
    pub fn denominator(&self) -> Expr {
        let mut d = Expr::one();
        for (f, k) in &self.den {
            d = d.mul(&f.pow(*k));
        }
        d
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }

    /// The polynomial value, if the denominator is trivial.
    pub fn as_expr(&self) -> Option<&Expr> {
        if self.den.is_empty() {
            Some(&self.num)
        } else {
            None
        }
    }

    /// `num / den` for polynomials; `None` if `den` is zero.
    pub fn from_parts(num: Expr, den: &Expr) -> Option<Self> {
        let inv = RatFunc::from_expr(den.clone()).inv()?;
        Some(inv.mul(&RatFunc::from_expr(num)))
    }

    fn normalize(mut self) -> Self {
        if self.num.is_zero() {
            self.den.clear();
            return self;
        }
        let mut out = Vec::with_capacity(self.den.len());
        for (f, mut k) in std::mem::take(&mut self.den) {
            while k > 0 {
                match div_exact(&self.num, &f) {
                    Some(q) => {
                        self.num = q;
                        k -= 1;
                    }
                    None => break,
                }
            }
            if k > 0 {
                out.push((f, k));
            }
        }
        self.den = out;
        self
    }

    fn merge_dens(a: &[(Expr, u32)], b: &[(Expr, u32)], add: bool) -> Vec<(Expr, u32)> {
        let mut out: Vec<(Expr, u32)> = a.to_vec();
        for (f, k) in b {
            match out.iter_mut().find(|(g, _)| g == f) {
                Some(entry) => {
                    entry.1 = if add { entry.1 + k } else { entry.1.max(*k) };
                }
                None => out.push((f.clone(), *k)),
            }
        }
        out.sort();
        out
    }

    /// Multiply the numerator by the factors needed to reach `target`.
    fn lift(&self, target: &[(Expr, u32)]) -> Expr {
        let mut n = self.num.clone();
        for (f, k) in target {
            let have = self
                .den
                .iter()
                .find(|(g, _)| g == f)
                .map(|(_, e)| *e)
                .unwrap_or(0);
            if *k > have {
                n = n.mul(&f.pow(k - have));
            }
        }
        n
    }

    pub fn add(&self, o: &Self) -> Self {
        if o.num.is_zero() {
            return self.clone();
        }
        if self.num.is_zero() {
            return o.clone();
        }
        if self.den == o.den {
            return RatFunc {
                num: self.num.add(&o.num),
                den: self.den.clone(),
            }
            .normalize();
        }
        let l = Self::merge_dens(&self.den, &o.den, false);
        RatFunc {
            num: self.lift(&l).add(&o.lift(&l)),
            den: l,
        }
        .normalize()
    }

    pub fn neg(&self) -> Self {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.num.is_zero() || o.num.is_zero() {
            return RatFunc::from_expr(Expr::zero());
        }
        if self.den.is_empty() && o.den.is_empty() {
            return RatFunc::from_expr(self.num.mul(&o.num));
        }
        RatFunc {
            num: self.num.mul(&o.num),
            den: Self::merge_dens(&self.den, &o.den, true),
        }
        .normalize()
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return RatFunc::from_expr(Expr::zero());
        }
        RatFunc {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn inv(&self) -> Option<Self> {
        if self.num.is_zero() {
            return None;
        }
        let (c, m, fs) = squarefree(&self.num);
        let mut den: Vec<(Expr, u32)> = m.0.iter().map(|(a, k)| (Expr::atom(a.clone()), *k)).collect();
        den.extend(fs);
        den.sort();
        let num = self.denominator().div_q(&c);
        Some(RatFunc { num, den }.normalize())
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = RatFunc::from_expr(Expr::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Partial derivative of a polynomial, allowing log(rho).
    fn diff_poly(p: &Expr, v: &str) -> RatFunc {
        if v == RHO && p.degree_in(&Atom::LogRho) > 0 {
            // d/drho = formal rho-derivative + (d/dlog) / rho
            let formal = p.diff_atom(&Atom::var(RHO));
            let dl = p.diff_atom(&Atom::LogRho);
            let rho = Expr::var(RHO);
            RatFunc {
                num: formal.mul(&rho).add(&dl),
                den: vec![(rho, 1)],
            }
            .normalize()
        } else {
            RatFunc::from_expr(p.diff(v).expect("log handled above"))
        }
    }

    pub fn diff(&self, v: &str) -> Self {
        let dn = Self::diff_poly(&self.num, v);
        if self.den.is_empty() {
            return dn;
        }
        // d(N/D) = N'/D - N * sum_f k f'/f / D
        let mut total = dn.mul(&RatFunc {
            num: Expr::one(),
            den: self.den.clone(),
        });
        for (f, k) in &self.den {
            let df = Self::diff_poly(f, v);
            if df.is_zero() {
                continue;
            }
            let mut den = self.den.clone();
            for entry in den.iter_mut() {
                if entry.0 == *f {
                    entry.1 += 1;
                }
            }
            let term = RatFunc {
                num: self.num.scale(&Q::from_integer((*k).into())),
                den,
            };
            total = total.sub(&term.mul(&df));
        }
        total
    }

    /// Evaluate numerically.
    pub fn eval_with<V, F>(&self, var: &V, func: &F) -> Result<f64, ExprError>
    where
        V: Fn(&str) -> Option<f64>,
        F: Fn(&FuncAtom) -> Option<f64>,
    {
        let mut v = self.num.eval_with(var, func)?;
        for (f, k) in &self.den {
            v /= f.eval_with(var, func)?.powi(*k as i32);
        }
        Ok(v)
    }

    pub fn eval_num(&self, point: &HashMap<String, f64>, funcs: &HashMap<FuncAtom, f64>) -> Result<f64, ExprError> {
        self.eval_with(&|v| point.get(v).copied(), &|f| funcs.get(f).copied())
    }

    pub fn depends_on(&self, v: &str) -> bool {
        self.num.depends_on(v) || self.den.iter().any(|(f, _)| f.depends_on(v))
    }

    /// Replace function atoms in numerator and denominator.
    pub fn replace_functions<F>(&self, resolve: &F) -> RatFunc
    where
        F: Fn(&FuncAtom) -> Option<Expr>,
    {
        let n = RatFunc::from_expr(self.num.replace_functions(resolve));
        let d = RatFunc::from_expr(self.denominator().replace_functions(resolve));
        n.mul(&d.inv().expect("denominator stays nonzero"))
    }

    /// Taylor expansion in rho (with log(rho) terms from the numerator)
    /// keeping doubled exponents below `trunc`.
    pub fn to_rho_series(&self, trunc: i32) -> Option<RhoSeries<RatFunc>> {
        let num = poly_rho_series(&self.num, trunc);
        let mut out = num;
        for (f, k) in &self.den {
            let fs = poly_rho_series(f, trunc);
            let inv = fs.inv()?;
            for _ in 0..*k {
                out = out.mul(&inv);
            }
        }
        Some(out.with_trunc(trunc))
    }
}

fn poly_rho_series(p: &Expr, trunc: i32) -> RhoSeries<RatFunc> {
    let rho = Atom::var(RHO);
    let mut s = RhoSeries::zero_to(trunc);
    for (m, c) in p.terms() {
        let (e, rest) = m.split_off(&rho);
        let (l, rest) = rest.split_off(&Atom::LogRho);
        s.insert(2 * e as i32, l, RatFunc::from_expr(Expr::monomial(rest, c.clone())));
    }
    s
}

impl PartialEq for RatFunc {
    fn eq(&self, o: &Self) -> bool {
        if self.den == o.den {
            return self.num == o.num;
        }
        let l = Self::merge_dens(&self.den, &o.den, false);
        self.lift(&l) == o.lift(&l)
    }
}

impl From<Expr> for RatFunc {
    fn from(e: Expr) -> Self {
        RatFunc::from_expr(e)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        if self.num.len() > 1 {
            write!(f, "({})", self.num)?;
        } else {
            write!(f, "{}", self.num)?;
        }
        write!(f, "/(")?;
        for (i, (g, k)) in self.den.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            let single = g.len() == 1;
            match (single, *k) {
                (true, 1) => write!(f, "{}", g)?,
                (true, _) => write!(f, "{}^{}", g, k)?,
                (false, 1) => write!(f, "({})", g)?,
                (false, _) => write!(f, "({})^{}", g, k)?,
            }
        }
        write!(f, ")")
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFunc({})", self)
    }
}

impl Scalar for RatFunc {
    fn zero() -> Self {
        RatFunc::from_expr(Expr::zero())
    }
    fn one() -> Self {
        RatFunc::from_expr(Expr::one())
    }
    fn from_q(c: Q) -> Self {
        RatFunc::from_expr(Expr::constant(c))
    }
    fn from_expr(e: &Expr) -> Self {
        RatFunc::from_expr(e.clone())
    }
    fn add(&self, o: &Self) -> Self {
        RatFunc::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        RatFunc::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        RatFunc::mul(self, o)
    }
    fn neg(&self) -> Self {
        RatFunc::neg(self)
    }
    fn scale(&self, c: &Q) -> Self {
        RatFunc::scale(self, c)
    }
    fn is_zero(&self) -> bool {
        RatFunc::is_zero(self)
    }
    fn diff(&self, v: &str) -> Self {
        RatFunc::diff(self, v)
    }
    fn inv(&self) -> Option<Self> {
        RatFunc::inv(self)
    }
}

/// Parse an expression that may divide by polynomials.
pub fn parse_ratfunc(text: &str, ctx: &ParseContext) -> Result<RatFunc, ExprError> {
    let ast = parse_ast(text)?;
    eval_rat(&ast, ctx)
}

fn eval_rat(ast: &Ast, ctx: &ParseContext) -> Result<RatFunc, ExprError> {
    Ok(match ast {
        Ast::Num(_) | Ast::Ident(..) | Ast::Call(..) | Ast::Deriv(..) | Ast::LogRho => {
            RatFunc::from_expr(eval_leaf(ast, ctx)?)
        }
        Ast::Neg(a) => eval_rat(a, ctx)?.neg(),
        Ast::Add(a, b) => eval_rat(a, ctx)?.add(&eval_rat(b, ctx)?),
        Ast::Sub(a, b) => eval_rat(a, ctx)?.sub(&eval_rat(b, ctx)?),
        Ast::Mul(a, b) => eval_rat(a, ctx)?.mul(&eval_rat(b, ctx)?),
        Ast::Div(a, b, pos) => {
            let d = eval_rat(b, ctx)?;
            let inv = d.inv().ok_or(ExprError::DivisionByZero { pos: *pos })?;
            eval_rat(a, ctx)?.mul(&inv)
        }
        Ast::Pow(a, b, pos) => {
            let k = eval_exponent(b, *pos, ctx)?;
            let base = eval_rat(a, ctx)?;
            if k >= 0 {
                base.pow(k as u32)
            } else {
                base.inv()
                    .ok_or(ExprError::DivisionByZero { pos: *pos })?
                    .pow(k.unsigned_abs() as u32)
            }
        }
    })
}

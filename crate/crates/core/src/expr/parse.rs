//! Tokenizer and recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := integer | ident | ident '(' args ')' | 'D' '[' ident (',' ident)* ']'
//!          | 'log' '(' 'rho' ')' | '(' expr ')'
//! ```

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use super::{Expr, ExprError, FuncAtom, Q, RHO};

/// Declarations visible to the parser.
#[derive(Clone, Debug, Default)]
pub struct ParseContext {
    /// Declared functions and their ordered argument lists.
    pub functions: BTreeMap<String, Vec<String>>,
    /// When set, identifiers outside this set are rejected.
    pub variables: Option<BTreeSet<String>>,
}

impl ParseContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_variables<I: IntoIterator<Item = S>, S: Into<String>>(mut self, vars: I) -> Self {
        self.variables = Some(vars.into_iter().map(Into::into).collect());
        self
    }

    pub fn with_function(mut self, name: &str, args: &[&str]) -> Self {
        self.functions
            .insert(name.to_string(), args.iter().map(|s| s.to_string()).collect());
        self
    }

    fn func_atom(&self, name: &str) -> FuncAtom {
        match self.functions.get(name) {
            Some(args) => {
                let a: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
                FuncAtom::new(name, Some(&a))
            }
            None => FuncAtom::new(name, None),
        }
    }

    fn check_var(&self, name: &str, pos: usize) -> Result<(), ExprError> {
        match &self.variables {
            Some(vs) if !vs.contains(name) => Err(ExprError::Undeclared {
                name: name.to_string(),
                pos,
            }),
            _ => Ok(()),
        }
    }
}

/// Unevaluated parse tree. Positions are byte offsets into the source.
#[derive(Clone, Debug, PartialEq)]
pub enum Ast {
    Num(BigInt),
    Ident(String, usize),
    Call(String, Vec<String>, usize),
    Deriv(String, Vec<String>, usize),
    LogRho,
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>, usize),
    Pow(Box<Ast>, Box<Ast>, usize),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Sym(char),
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                return Err(ExprError::Syntax {
                    pos: i,
                    msg: "decimal literals are not allowed; write p/q".into(),
                });
            }
            let n: BigInt = text[start..i].parse().expect("digits");
            out.push((Tok::Num(n), start));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i] as char).is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else if "+-*/^()[],".contains(c) {
            out.push((Tok::Sym(c), i));
            i += 1;
        } else {
            return Err(ExprError::Syntax {
                pos: i,
                msg: format!("unexpected character `{}`", c),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    i: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.0)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|t| t.1).unwrap_or(self.end)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(ExprError::Syntax {
                pos: self.pos(),
                msg: format!("expected `{}`", c),
            })
        }
    }

    fn ident(&mut self) -> Result<(String, usize), ExprError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.i += 1;
                Ok((s, pos))
            }
            _ => Err(ExprError::Syntax {
                pos,
                msg: "expected identifier".into(),
            }),
        }
    }

    fn expr(&mut self) -> Result<Ast, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                let rhs = self.term()?;
                lhs = Ast::Add(Box::new(lhs), Box::new(rhs));
            } else if self.eat('-') {
                let rhs = self.term()?;
                lhs = Ast::Sub(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Ast, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                let rhs = self.unary()?;
                lhs = Ast::Mul(Box::new(lhs), Box::new(rhs));
            } else if self.peek() == Some(&Tok::Sym('/')) {
                let pos = self.pos();
                self.i += 1;
                let rhs = self.unary()?;
                lhs = Ast::Div(Box::new(lhs), Box::new(rhs), pos);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Ast, ExprError> {
        if self.eat('-') {
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast, ExprError> {
        let base = self.primary()?;
        if self.peek() == Some(&Tok::Sym('^')) {
            let pos = self.pos();
            self.i += 1;
            let exp = self.unary()?;
            return Ok(Ast::Pow(Box::new(base), Box::new(exp), pos));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Ast, ExprError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.i += 1;
                Ok(Ast::Num(n))
            }
            Some(Tok::Sym('(')) => {
                self.i += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.i += 1;
                if name == "D" && self.peek() == Some(&Tok::Sym('[')) {
                    self.i += 1;
                    let (f, _) = self.ident()?;
                    let mut vars = Vec::new();
                    while self.eat(',') {
                        vars.push(self.ident()?.0);
                    }
                    self.expect(']')?;
                    return Ok(Ast::Deriv(f, vars, pos));
                }
                if self.eat('(') {
                    let mut args = Vec::new();
                    if !self.eat(')') {
                        args.push(self.ident()?.0);
                        while self.eat(',') {
                            args.push(self.ident()?.0);
                        }
                        self.expect(')')?;
                    }
                    if name == "log" {
                        if args.len() == 1 && args[0] == RHO {
                            return Ok(Ast::LogRho);
                        }
                        return Err(ExprError::Syntax {
                            pos,
                            msg: "log is only defined for log(rho)".into(),
                        });
                    }
                    return Ok(Ast::Call(name, args, pos));
                }
                Ok(Ast::Ident(name, pos))
            }
            _ => Err(ExprError::Syntax {
                pos,
                msg: "expected a number, identifier or `(`".into(),
            }),
        }
    }
}

/// Parse into an unevaluated tree.
pub fn parse_ast(text: &str) -> Result<Ast, ExprError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        i: 0,
        end: text.len(),
    };
    if p.toks.is_empty() {
        return Err(ExprError::Syntax {
            pos: 0,
            msg: "empty expression".into(),
        });
    }
    let e = p.expr()?;
    if p.i != p.toks.len() {
        return Err(ExprError::Syntax {
            pos: p.pos(),
            msg: "unexpected trailing input".into(),
        });
    }
    Ok(e)
}

/// Parse with no declarations: every identifier is a variable and any
/// function appearing in `D[...]` depends on all variables.
pub fn parse(text: &str) -> Result<Expr, ExprError> {
    parse_with(text, &ParseContext::default())
}

/// Parse in the given declaration context.
pub fn parse_with(text: &str, ctx: &ParseContext) -> Result<Expr, ExprError> {
    let ast = parse_ast(text)?;
    eval_poly(&ast, ctx)
}

/// Evaluate an identifier, call or derivative marker to an atom expression.
pub(crate) fn eval_leaf(ast: &Ast, ctx: &ParseContext) -> Result<Expr, ExprError> {
    match ast {
        Ast::Ident(name, pos) => {
            if ctx.functions.contains_key(name) {
                return Ok(Expr::func(ctx.func_atom(name)));
            }
            ctx.check_var(name, *pos)?;
            Ok(Expr::var(name))
        }
        Ast::Call(name, args, pos) => {
            let Some(decl) = ctx.functions.get(name) else {
                return Err(ExprError::Syntax {
                    pos: *pos,
                    msg: format!("call of undeclared function `{}`", name),
                });
            };
            if decl.len() != args.len() {
                return Err(ExprError::Arity {
                    name: name.clone(),
                    expected: decl.len(),
                    found: args.len(),
                    pos: *pos,
                });
            }
            if decl != args {
                return Err(ExprError::ArgumentMismatch {
                    name: name.clone(),
                    pos: *pos,
                });
            }
            Ok(Expr::func(ctx.func_atom(name)))
        }
        Ast::Deriv(name, vars, pos) => {
            for v in vars {
                ctx.check_var(v, *pos)?;
            }
            let mut f = ctx.func_atom(name);
            for v in vars {
                match f.derive(v) {
                    Some(g) => f = g,
                    None => return Ok(Expr::zero()),
                }
            }
            Ok(Expr::func(f))
        }
        Ast::LogRho => Ok(Expr::log_rho()),
        Ast::Num(n) => Ok(Expr::constant(Q::from_integer(n.clone()))),
        _ => unreachable!("not a leaf"),
    }
}

/// Evaluate an exponent subtree to an integer.
pub(crate) fn eval_exponent(ast: &Ast, pos: usize, ctx: &ParseContext) -> Result<i64, ExprError> {
    let e = eval_poly(ast, ctx)?;
    let c = e.as_constant().ok_or(ExprError::NonIntegerExponent { pos })?;
    if !c.is_integer() {
        return Err(ExprError::NonIntegerExponent { pos });
    }
    c.to_integer()
        .to_i64()
        .filter(|k| k.abs() <= 1_000)
        .ok_or(ExprError::NonIntegerExponent { pos })
}

fn eval_poly(ast: &Ast, ctx: &ParseContext) -> Result<Expr, ExprError> {
    Ok(match ast {
        Ast::Num(_) | Ast::Ident(..) | Ast::Call(..) | Ast::Deriv(..) | Ast::LogRho => {
            eval_leaf(ast, ctx)?
        }
        Ast::Neg(a) => eval_poly(a, ctx)?.neg(),
        Ast::Add(a, b) => eval_poly(a, ctx)?.add(&eval_poly(b, ctx)?),
        Ast::Sub(a, b) => eval_poly(a, ctx)?.sub(&eval_poly(b, ctx)?),
        Ast::Mul(a, b) => eval_poly(a, ctx)?.mul(&eval_poly(b, ctx)?),
        Ast::Div(a, b, pos) => {
            let d = eval_poly(b, ctx)?;
            let c = d
                .as_constant()
                .ok_or(ExprError::NonConstantDivision { pos: *pos })?;
            if c.is_zero() {
                return Err(ExprError::DivisionByZero { pos: *pos });
            }
            eval_poly(a, ctx)?.div_q(&c)
        }
        Ast::Pow(a, b, pos) => {
            let k = eval_exponent(b, *pos, ctx)?;
            let base = eval_poly(a, ctx)?;
            if k >= 0 {
                base.pow(k as u32)
            } else {
                let c = base
                    .as_constant()
                    .ok_or(ExprError::NegativeExponent { pos: *pos })?;
                if c.is_zero() {
                    return Err(ExprError::DivisionByZero { pos: *pos });
                }
                let inv = Q::one() / c;
                Expr::constant(pow_q(&inv, k.unsigned_abs() as u32))
            }
        }
    })
}

fn pow_q(c: &Q, k: u32) -> Q {
    let mut out = Q::one();
    for _ in 0..k {
        out *= c;
    }
    out
}

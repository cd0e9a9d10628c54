//! Printer emitting the parser's grammar.

use num_traits::{One, Signed};

use super::{Atom, Expr, Monomial, Q};

fn fmt_q(c: &Q) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub(crate) fn fmt_atom(a: &Atom) -> String {
    match a {
        Atom::Var(v) => v.to_string(),
        Atom::LogRho => "log(rho)".to_string(),
        Atom::Func(f) => {
            if f.derivs.is_empty() {
                if f.args.is_some() {
                    f.name.to_string()
                } else {
                    format!("D[{}]", f.name)
                }
            } else {
                let mut s = format!("D[{}", f.name);
                for (v, k) in &f.derivs {
                    for _ in 0..*k {
                        s.push_str(", ");
                        s.push_str(v);
                    }
                }
                s.push(']');
                s
            }
        }
    }
}

fn fmt_monomial(m: &Monomial) -> String {
    m.0.iter()
        .map(|(a, e)| {
            if *e == 1 {
                fmt_atom(a)
            } else {
                format!("{}^{}", fmt_atom(a), e)
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

pub(crate) fn to_string(e: &Expr) -> String {
    if e.is_zero() {
        return "0".to_string();
    }
    let mut terms: Vec<(&Monomial, &Q)> = e.terms().collect();
    terms.sort_by(|a, b| b.0.degree().cmp(&a.0.degree()).then(a.0.cmp(b.0)));
    let mut out = String::new();
    for (i, (m, c)) in terms.into_iter().enumerate() {
        let neg = c.is_negative();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let a = c.abs();
        if m.is_one() {
            out.push_str(&fmt_q(&a));
        } else if a.is_one() {
            out.push_str(&fmt_monomial(m));
        } else {
            out.push_str(&fmt_q(&a));
            out.push('*');
            out.push_str(&fmt_monomial(m));
        }
    }
    out
}

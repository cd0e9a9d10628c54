//! Multivariate polynomial algorithms over Q on [`Expr`] values: exact
//! division, gcd via primitive remainder sequences, squarefree
//! decomposition.

use std::cmp::Ordering;

use num_traits::{One, Zero};

use super::{Atom, Expr, Monomial, Q};

/// Pure lexicographic order with smaller atoms more significant.
pub fn lex_cmp(a: &Monomial, b: &Monomial) -> Ordering {
    let (x, y) = (&a.0, &b.0);
    let (mut i, mut j) = (0, 0);
    loop {
        match (x.get(i), y.get(j)) {
            (None, None) => return Ordering::Equal,
            (Some(_), None) => return Ordering::Greater,
            (None, Some(_)) => return Ordering::Less,
            (Some((ax, ex)), Some((ay, ey))) => match ax.cmp(ay) {
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => {
                    if ex != ey {
                        return ex.cmp(ey);
                    }
                    i += 1;
                    j += 1;
                }
            },
        }
    }
}

/// Leading term with respect to [`lex_cmp`].
pub fn leading_term(e: &Expr) -> Option<(&Monomial, &Q)> {
    e.terms().max_by(|(a, _), (b, _)| lex_cmp(a, b))
}

/// Make the leading coefficient equal to one.
pub fn monic(e: &Expr) -> Expr {
    match leading_term(e) {
        Some((_, c)) => e.div_q(c),
        None => Expr::zero(),
    }
}

fn main_atom(e: &Expr) -> Option<Atom> {
    e.atoms().into_iter().next()
}

/// Exact quotient `a / b` when `b` divides `a`, otherwise `None`.
pub fn div_exact(a: &Expr, b: &Expr) -> Option<Expr> {
    if b.is_zero() {
        return None;
    }
    if a.is_zero() {
        return Some(Expr::zero());
    }
    if let Some(c) = b.as_constant() {
        return Some(a.div_q(&c));
    }
    let (lb, _) = leading_term(b)?;
    let (la, _) = leading_term(a)?;
    la.div(lb)?;
    if b.len() == 1 {
        let (mb, cb) = b.terms().next().unwrap();
        let mut out = Expr::zero();
        for (m, c) in a.terms() {
            out.add_term(m.div(mb)?, c / cb);
        }
        return Some(out);
    }
    let x = main_atom(b)?;
    let bc = b.coefficients_in(&x);
    let db = (bc.len() - 1) as u32;
    let lc = &bc[db as usize];
    let mut r = a.clone();
    let mut quo = Expr::zero();
    while !r.is_zero() {
        let dr = r.degree_in(&x);
        if dr < db {
            return None;
        }
        let lr = r.coeff_of(&x, dr);
        let t = div_exact(&lr, lc)?;
        let t = t.mul(&Expr::monomial(Monomial::single(x.clone(), dr - db), Q::one()));
        r = r.sub(&t.mul(b));
        quo = quo.add(&t);
    }
    Some(quo)
}

/// Content with respect to the atom `x`: gcd of the coefficients.
pub fn content_in(e: &Expr, x: &Atom) -> Expr {
    let mut g = Expr::zero();
    for c in e.coefficients_in(x) {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, &c);
        if g.is_one() {
            break;
        }
    }
    g
}

fn prem(a: &Expr, b: &Expr, x: &Atom) -> Expr {
    let db = b.degree_in(x);
    let lb = b.coeff_of(x, db);
    let mut r = a.clone();
    while !r.is_zero() {
        let dr = r.degree_in(x);
        if dr < db {
            break;
        }
        let lr = r.coeff_of(x, dr);
        let shift = Expr::monomial(Monomial::single(x.clone(), dr - db), Q::one());
        r = r.mul(&lb).sub(&lr.mul(&shift).mul(b));
    }
    r
}

/// Normalized gcd (monic, so the gcd of two constants is 1).
pub fn gcd(a: &Expr, b: &Expr) -> Expr {
    if a.is_zero() {
        return monic(b);
    }
    if b.is_zero() {
        return monic(a);
    }
    if a.is_constant() || b.is_constant() {
        return Expr::one();
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let mg = ma.gcd(&mb);
    let a = a.mul_monomial_inv(&ma);
    let b = b.mul_monomial_inv(&mb);
    let mono = Expr::monomial(mg, Q::one());
    if a.is_constant() || b.is_constant() {
        return mono;
    }
    let atoms_a = a.atoms();
    let atoms_b = b.atoms();
    let common: Vec<&Atom> = atoms_a.intersection(&atoms_b).collect();
    let Some(x) = common.first().map(|x| (*x).clone()) else {
        return mono;
    };
    let ca = content_in(&a, &x);
    let cb = content_in(&b, &x);
    let c = gcd(&ca, &cb);
    let mut p = div_exact(&a, &ca).expect("content divides");
    let mut r = div_exact(&b, &cb).expect("content divides");
    if p.degree_in(&x) < r.degree_in(&x) {
        std::mem::swap(&mut p, &mut r);
    }
    let g = loop {
        if r.degree_in(&x) == 0 {
            break Expr::one();
        }
        let rem = prem(&p, &r, &x);
        if rem.is_zero() {
            break r;
        }
        if rem.degree_in(&x) == 0 {
            break Expr::one();
        }
        let cr = content_in(&rem, &x);
        let next = div_exact(&rem, &cr).expect("content divides");
        let next = next.div_q(&next.content());
        p = r;
        r = next;
    };
    let g = if g.is_constant() {
        g
    } else {
        let cg = content_in(&g, &x);
        div_exact(&g, &cg).expect("content divides")
    };
    monic(&mono.mul(&c).mul(&g))
}

impl Expr {
    /// Divide by a monomial known to divide every term.
    pub fn mul_monomial_inv(&self, m: &Monomial) -> Expr {
        if m.is_one() {
            return self.clone();
        }
        let mut out = Expr::zero();
        for (k, c) in self.terms() {
            out.add_term(k.div(m).expect("monomial divides"), c.clone());
        }
        out
    }
}

/// Squarefree decomposition of a polynomial: `e = c * m * prod f_i^k_i`
/// with `c` rational, `m` a monomial and the `f_i` monic, squarefree,
/// pairwise coprime and free of monomial content.
pub fn squarefree(e: &Expr) -> (Q, Monomial, Vec<(Expr, u32)>) {
    if e.is_zero() {
        return (Q::zero(), Monomial::one(), Vec::new());
    }
    let m = e.monomial_content();
    let rest = e.mul_monomial_inv(&m);
    let (_, lc) = leading_term(&rest).unwrap();
    let lc = lc.clone();
    let rest = rest.div_q(&lc);
    let mut factors = Vec::new();
    squarefree_rec(&rest, &mut factors);
    merge_factors(&mut factors);
    (lc, m, factors)
}

fn merge_factors(f: &mut Vec<(Expr, u32)>) {
    f.sort();
    let mut out: Vec<(Expr, u32)> = Vec::new();
    for (p, k) in f.drain(..) {
        if let Some(last) = out.last_mut() {
            if last.0 == p {
                last.1 += k;
                continue;
            }
        }
        out.push((p, k));
    }
    *f = out;
}

fn squarefree_rec(e: &Expr, out: &mut Vec<(Expr, u32)>) {
    if e.is_constant() {
        return;
    }
    let x = main_atom(e).unwrap();
    let cont = content_in(e, &x);
    if !cont.is_constant() {
        squarefree_rec(&cont, out);
    }
    let pp = monic(&div_exact(e, &cont).expect("content divides"));
    if pp.degree_in(&x) == 0 {
        return;
    }
    // Yun's algorithm in the variable x.
    let d = pp.diff_atom(&x);
    let a0 = gcd(&pp, &d);
    let mut b = div_exact(&pp, &a0).expect("gcd divides");
    let c = div_exact(&d, &a0).expect("gcd divides");
    let mut dd = c.sub(&b.diff_atom(&x));
    let mut i = 1;
    while !b.is_constant() {
        let a = gcd(&b, &dd);
        if !a.is_constant() {
            out.push((monic(&a), i));
        }
        let nb = div_exact(&b, &a).expect("gcd divides");
        let nc = div_exact(&dd, &a).expect("gcd divides");
        dd = nc.sub(&nb.diff_atom(&x));
        b = nb;
        i += 1;
    }
}

/// Check `a * b == c` (convenience for tests and assertions).
pub fn is_product(a: &Expr, b: &Expr, c: &Expr) -> bool {
    a.mul(b) == *c
}

/// Greatest common divisor of a list (monic).
pub fn gcd_all<'a, I: IntoIterator<Item = &'a Expr>>(it: I) -> Expr {
    let mut g = Expr::zero();
    for e in it {
        g = gcd(&g, e);
        if g.is_one() {
            break;
        }
    }
    g
}

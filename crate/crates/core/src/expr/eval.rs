//! Floating point evaluation, the only place floats touch expressions.

use std::collections::HashMap;

use num_traits::ToPrimitive;

use super::{print::fmt_atom, Atom, Expr, ExprError, FuncAtom, RHO};

/// Values for function atoms (including their derivatives) at a point.
pub type FuncValues = HashMap<FuncAtom, f64>;

/// Evaluate with variable values from `point` and function atom values
/// from `funcs`.
pub fn eval_num(e: &Expr, point: &HashMap<String, f64>, funcs: &FuncValues) -> Result<f64, ExprError> {
    e.eval_with(&|v| point.get(v).copied(), &|f| funcs.get(f).copied())
}

impl Expr {
    /// Evaluate using resolver closures for variables and function atoms.
    pub fn eval_with<V, F>(&self, var: &V, func: &F) -> Result<f64, ExprError>
    where
        V: Fn(&str) -> Option<f64>,
        F: Fn(&FuncAtom) -> Option<f64>,
    {
        let mut total = 0.0;
        for (m, c) in self.terms() {
            let mut t = c.to_f64().unwrap_or(f64::NAN);
            for (a, e) in &m.0 {
                let x = match a {
                    Atom::Var(v) => var(v),
                    Atom::Func(f) => func(f),
                    Atom::LogRho => var(RHO).map(f64::ln),
                }
                .ok_or_else(|| ExprError::Unbound(fmt_atom(a)))?;
                t *= x.powi(*e as i32);
            }
            total += t;
        }
        Ok(total)
    }
}

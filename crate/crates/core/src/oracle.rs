//! Finite-difference curvature at sample points, used to cross-check the
//! symbolic pipeline with floating point arithmetic only.

use std::collections::{BTreeSet, HashMap};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::{Atom, Expr, ExprError, FuncAtom};
use crate::ratfunc::RatFunc;
use crate::tensor::{Metric, TensorField};

/// Environment variable holding the sampling seed.
pub const SEED_VAR: &str = "AMBIENTFORGE_SEED";
/// Seed used when the environment variable is unset or unparsable.
pub const DEFAULT_SEED: u64 = 20_240_601;
/// Default finite-difference step.
pub const DEFAULT_H: f64 = 1e-4;
/// Default pass threshold for the relative discrepancy.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
/// Smallest admissible `|det g|` at a sample point.
pub const DET_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("metric is near-singular at the sample point (|det| = {det:e})")]
    Singular { det: f64 },
    #[error("evaluation failed: {0}")]
    Eval(#[from] ExprError),
    #[error("point has {found} coordinates, metric has {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("no admissible sample point found after {attempts} attempts")]
    Sampling { attempts: usize },
}

/// A point at which to compare symbolic and numeric tensors.
#[derive(Clone, Debug)]
pub struct SamplePoint {
    pub coords: Vec<f64>,
    /// Values of function atoms and their derivatives, used when evaluating
    /// symbolic tensors that still contain them.
    pub funcs: HashMap<FuncAtom, f64>,
    pub h_fd: f64,
}

impl SamplePoint {
    pub fn new(coords: Vec<f64>) -> Self {
        SamplePoint {
            coords,
            funcs: HashMap::new(),
            h_fd: DEFAULT_H,
        }
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.h_fd = h;
        self
    }

    /// Bind every function atom in `atoms` (with its derivatives) to the
    /// value of the matching derivative of `concrete[name]` at this point.
    /// Atoms whose name has no concrete expression are left unbound.
    pub fn bind_functions<'a, I>(
        &mut self,
        atoms: I,
        concrete: &HashMap<String, Expr>,
        names: &[String],
    ) -> Result<(), OracleError>
    where
        I: IntoIterator<Item = &'a FuncAtom>,
    {
        let point = self.bindings(names);
        let none = HashMap::new();
        for atom in atoms {
            let Some(base) = concrete.get(&*atom.name) else { continue };
            let mut e = base.clone();
            for (v, k) in &atom.derivs {
                for _ in 0..*k {
                    e = e.diff(v)?;
                }
            }
            let value = crate::expr::eval_num(&e, &point, &none)?;
            self.funcs.insert(atom.clone(), value);
        }
        Ok(())
    }

    fn bindings(&self, names: &[String]) -> HashMap<String, f64> {
        names.iter().cloned().zip(self.coords.iter().copied()).collect()
    }
}

/// Seed from `AMBIENTFORGE_SEED`, falling back to [`DEFAULT_SEED`].
pub fn seed_from_env() -> u64 {
    std::env::var(SEED_VAR)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

/// A metric as a function of the coordinates.
pub trait MetricFn {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Result<DMatrix<f64>, OracleError>;
}

impl<F> MetricFn for (usize, F)
where
    F: Fn(&[f64]) -> DMatrix<f64>,
{
    fn dim(&self) -> usize {
        self.0
    }

    fn eval(&self, x: &[f64]) -> Result<DMatrix<f64>, OracleError> {
        Ok((self.1)(x))
    }
}

/// Numeric evaluation of a symbolic metric. Function atoms must already be
/// replaced by explicit expressions, since the metric is evaluated away from
/// the sample point.
pub struct SymbolicMetric<'a> {
    metric: &'a Metric<RatFunc>,
}

impl<'a> SymbolicMetric<'a> {
    pub fn new(metric: &'a Metric<RatFunc>) -> Self {
        SymbolicMetric { metric }
    }
}

impl MetricFn for SymbolicMetric<'_> {
    fn dim(&self) -> usize {
        self.metric.dim()
    }

    fn eval(&self, x: &[f64]) -> Result<DMatrix<f64>, OracleError> {
        let n = self.metric.dim();
        let names = self.metric.coords();
        let point: HashMap<String, f64> = names.iter().cloned().zip(x.iter().copied()).collect();
        let none = HashMap::new();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.metric.g(i, j).eval_num(&point, &none)?;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(m)
    }
}

fn check_point<G: MetricFn>(g: &G, x: &[f64]) -> Result<DMatrix<f64>, OracleError> {
    if x.len() != g.dim() {
        return Err(OracleError::Dimension {
            expected: g.dim(),
            found: x.len(),
        });
    }
    let m = g.eval(x)?;
    let det = m.determinant();
    if !det.is_finite() || det.abs() <= DET_THRESHOLD {
        return Err(OracleError::Singular { det });
    }
    Ok(m)
}

fn shifted(x: &[f64], k: usize, d: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[k] += d;
    y
}

/// `Γ^a_bc` at `x` from central differences of the metric; indexed
/// `[a][b][c]`.
pub fn numeric_christoffel<G: MetricFn>(g: &G, x: &[f64], h: f64) -> Result<Vec<Vec<Vec<f64>>>, OracleError> {
    let n = g.dim();
    let m = check_point(g, x)?;
    let inv = m.try_inverse().ok_or(OracleError::Singular { det: 0.0 })?;
    // dg[c] = ∂_c g
    let mut dg = Vec::with_capacity(n);
    for c in 0..n {
        let plus = g.eval(&shifted(x, c, h))?;
        let minus = g.eval(&shifted(x, c, -h))?;
        dg.push((plus - minus) / (2.0 * h));
    }
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut v = 0.0;
                for d in 0..n {
                    v += inv[(a, d)] * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]);
                }
                gamma[a][b][c] = 0.5 * v;
            }
        }
    }
    Ok(gamma)
}

/// Ricci tensor at the point from central differences: Christoffel symbols
/// are differenced once more, so the error is `O(h_fd²)`.
pub fn numeric_ricci<G: MetricFn>(g: &G, pt: &SamplePoint) -> Result<DMatrix<f64>, OracleError> {
    let n = g.dim();
    let x = &pt.coords;
    let h = pt.h_fd;
    let gam = numeric_christoffel(g, x, h)?;
    // dgam[k][a][b][c] = ∂_k Γ^a_bc
    let mut dgam = Vec::with_capacity(n);
    for k in 0..n {
        let p = numeric_christoffel(g, &shifted(x, k, h), h)?;
        let m = numeric_christoffel(g, &shifted(x, k, -h), h)?;
        let mut d = vec![vec![vec![0.0; n]; n]; n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    d[a][b][c] = (p[a][b][c] - m[a][b][c]) / (2.0 * h);
                }
            }
        }
        dgam.push(d);
    }
    // Ric_bd = ∂_a Γ^a_db − ∂_d Γ^a_ab + Γ^a_ae Γ^e_db − Γ^a_de Γ^e_ab
    let mut ric = DMatrix::zeros(n, n);
    for b in 0..n {
        for d in 0..n {
            let mut v = 0.0;
            for a in 0..n {
                v += dgam[a][a][d][b] - dgam[d][a][a][b];
                for e in 0..n {
                    v += gam[a][a][e] * gam[e][d][b] - gam[a][d][e] * gam[e][a][b];
                }
            }
            ric[(b, d)] = v;
        }
    }
    Ok(ric)
}

/// Values of a symbolic rank-two tensor at a point.
pub fn eval_tensor(t: &TensorField<RatFunc>, names: &[String], pt: &SamplePoint) -> Result<DMatrix<f64>, OracleError> {
    let n = t.dim();
    let point = pt.bindings(names);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = t.get(&[i, j]).eval_num(&point, &pt.funcs)?;
        }
    }
    Ok(m)
}

/// Function atoms (with derivatives) occurring in a tensor.
pub fn function_atoms(t: &TensorField<RatFunc>) -> BTreeSet<FuncAtom> {
    let mut out = BTreeSet::new();
    for c in t.components() {
        let dens = c.denominator_factors().iter().map(|(f, _)| f);
        for e in std::iter::once(c.numerator()).chain(dens) {
            for a in e.atoms() {
                if let Atom::Func(f) = a {
                    out.insert(f);
                }
            }
        }
    }
    out
}

/// Relative discrepancy `max|S − N| / max(max|S|, 1)`.
pub fn relative_discrepancy(symbolic: &DMatrix<f64>, numeric: &DMatrix<f64>) -> f64 {
    let diff = (symbolic - numeric).amax();
    diff / symbolic.amax().max(1.0)
}

#[derive(Clone, Debug)]
pub struct OracleReport {
    /// Discrepancy at each point, in order.
    pub per_point: Vec<f64>,
    pub max_discrepancy: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compare a symbolic rank-two tensor with a numeric procedure at each
/// point; the report passes when every discrepancy is within `tolerance`.
pub fn compare<F>(
    symbolic: &TensorField<RatFunc>,
    names: &[String],
    numeric: F,
    points: &[SamplePoint],
    tolerance: f64,
) -> Result<OracleReport, OracleError>
where
    F: Fn(&SamplePoint) -> Result<DMatrix<f64>, OracleError>,
{
    let mut per_point = Vec::with_capacity(points.len());
    for pt in points {
        let s = eval_tensor(symbolic, names, pt)?;
        let v = numeric(pt)?;
        per_point.push(relative_discrepancy(&s, &v));
    }
    let max_discrepancy = per_point.iter().copied().fold(0.0, f64::max);
    Ok(OracleReport {
        per_point,
        max_discrepancy,
        tolerance,
        passed: max_discrepancy <= tolerance,
    })
}

/// `count` seeded points with coordinate `i` drawn uniformly from
/// `ranges[i]`, rejecting points where `|det g| ≤ 1e−8` or where the metric
/// cannot be evaluated.
pub fn sample_points<G: MetricFn>(
    g: &G,
    ranges: &[(f64, f64)],
    count: usize,
    seed: u64,
    h_fd: f64,
) -> Result<Vec<SamplePoint>, OracleError> {
    let n = g.dim();
    if ranges.len() != n {
        return Err(OracleError::Dimension {
            expected: n,
            found: ranges.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let max_attempts = 100 * count.max(1);
    let mut attempts = 0;
    while out.len() < count {
        if attempts == max_attempts {
            return Err(OracleError::Sampling { attempts });
        }
        attempts += 1;
        let x: Vec<f64> = ranges.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
        if check_point(g, &x).is_ok() {
            out.push(SamplePoint::new(x).with_step(h_fd));
        }
    }
    Ok(out)
}

/// The unit cube `[−1, 1]^n`.
pub fn unit_ranges(n: usize) -> Vec<(f64, f64)> {
    vec![(-1.0, 1.0); n]
}

/// Ratio of the largest discrepancies at steps `h` and `h/2` over the same
/// points. Second-order differences give a ratio near 4.
pub fn halving_ratio<G: MetricFn>(
    g: &G,
    symbolic: &TensorField<RatFunc>,
    names: &[String],
    points: &[SamplePoint],
    h: f64,
) -> Result<f64, OracleError> {
    let at = |step: f64| -> Result<f64, OracleError> {
        let pts: Vec<SamplePoint> = points.iter().cloned().map(|p| p.with_step(step)).collect();
        Ok(compare(symbolic, names, |p| numeric_ricci(g, p), &pts, f64::INFINITY)?.max_discrepancy)
    };
    Ok(at(h)? / at(h / 2.0)?)
}

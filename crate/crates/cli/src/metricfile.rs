//! Sectioned metric description files.
//!
//! ```text
//! # comment
//! [coordinates]
//! x1 x2 y1 y2
//! signature = 2,2
//! rank = 2
//!
//! [functions]
//! f(y1, u)
//!
//! [metric]
//! g[x1,y1] = 1
//! g[y1,y1] = 2*x1^2
//!
//! [frame]
//! p = 1
//! gframe[1,5] = 1
//! r[3;1,2] = 1
//!
//! [ambient]
//! h[y1,y1;1] = -12*x1^2
//! h[u,u;2;log] = y1
//! truncate = 4
//! ```
//!
//! Metric entries are indexed by coordinate names and mirrored; frame
//! entries use 1-based frame indices. Exactly one of `[metric]` and
//! `[frame]` must be present. A frame file names its realization
//! coordinates in `[coordinates]`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use ambientforge::ambient::Series;
use ambientforge::expr::{Atom, ParseContext, Q};
use ambientforge::frame::{realize_nilpotent, FrameData};
use ambientforge::ratfunc::parse_ratfunc;
use ambientforge::series::EXACT;
use ambientforge::tensor::{Metric, Slot, TensorField};
use ambientforge::{ExprError, RatFunc, Scalar};
use thiserror::Error;

/// An input error with the 1-based line (and column when known).
#[derive(Clone, Debug, Error, PartialEq)]
pub struct FileError {
    pub line: usize,
    pub column: Option<usize>,
    pub msg: String,
}

impl fmt::Display for FileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.column {
            Some(c) => write!(f, "line {}, column {}: {}", self.line, c, self.msg),
            None => write!(f, "line {}: {}", self.line, self.msg),
        }
    }
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, FileError> {
    Err(FileError {
        line,
        column: None,
        msg: msg.into(),
    })
}

/// Coordinate metric or frame data.
#[derive(Clone, Debug)]
pub enum Body {
    Coordinates(Metric<RatFunc>),
    Frame(FrameData),
}

/// One `h[i,j;order(;log)]` entry.
#[derive(Clone, Debug)]
pub struct AmbientEntry {
    pub i: usize,
    pub j: usize,
    /// Doubled exponent of ρ.
    pub e2: i32,
    pub log: u32,
    pub value: RatFunc,
}

#[derive(Clone, Debug)]
pub struct AmbientSpec {
    pub entries: Vec<AmbientEntry>,
    /// Doubled truncation order, [`EXACT`] when absent.
    pub trunc: i32,
}

#[derive(Clone, Debug)]
pub struct MetricFile {
    pub coords: Vec<String>,
    pub signature: Option<(usize, usize)>,
    pub rank: Option<usize>,
    pub functions: Vec<(String, Vec<String>)>,
    pub body: Body,
    pub ambient: Option<AmbientSpec>,
    pub context: ParseContext,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Coordinates,
    Functions,
    Metric,
    Frame,
    Ambient,
}

impl Section {
    fn parse(name: &str) -> Option<Section> {
        Some(match name {
            "coordinates" => Section::Coordinates,
            "functions" => Section::Functions,
            "metric" => Section::Metric,
            "frame" => Section::Frame,
            "ambient" => Section::Ambient,
            _ => return None,
        })
    }
}

struct Line<'a> {
    no: usize,
    text: &'a str,
    /// Byte offset of `text` within the raw line.
    offset: usize,
}

/// Split `name[inner] = value` into its parts.
fn indexed<'a>(l: &Line<'a>, name: &str) -> Result<Option<(&'a str, &'a str, usize)>, FileError> {
    let t = l.text;
    if !t.starts_with(name) || !t[name.len()..].trim_start().starts_with('[') {
        return Ok(None);
    }
    let open = t.find('[').expect("checked");
    let close = match t.find(']') {
        Some(c) if c > open => c,
        _ => return err(l.no, format!("missing ']' in {} entry", name)),
    };
    let rest = t[close + 1..].trim_start();
    let Some(value) = rest.strip_prefix('=') else {
        return err(l.no, format!("expected '=' after {}[...]", name));
    };
    let value_start = t.len() - value.len();
    let lead = value.len() - value.trim_start().len();
    Ok(Some((&t[open + 1..close], value.trim(), l.offset + value_start + lead)))
}

fn key_value<'a>(t: &'a str) -> Option<(&'a str, &'a str)> {
    let (k, v) = t.split_once('=')?;
    let k = k.trim();
    if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return None;
    }
    Some((k, v.trim()))
}

fn parse_usize(l: &Line, s: &str, what: &str) -> Result<usize, FileError> {
    s.trim()
        .parse::<usize>()
        .or_else(|_| err(l.no, format!("{} must be a non-negative integer, got `{}`", what, s.trim())))
}

/// Parse a half-integer order like `2`, `5/2` or `1.5` into a doubled
/// exponent.
fn parse_order(l: &Line, s: &str) -> Result<i32, FileError> {
    let s = s.trim();
    let bad = || err(l.no, format!("order must be an integer or half-integer, got `{}`", s));
    if let Some((a, b)) = s.split_once('/') {
        let (Ok(a), Ok(2)) = (a.trim().parse::<i32>(), b.trim().parse::<i32>()) else {
            return bad();
        };
        return Ok(a);
    }
    if let Some((a, b)) = s.split_once('.') {
        let Ok(a) = a.trim().parse::<i32>() else { return bad() };
        return match b.trim() {
            "0" => Ok(2 * a),
            "5" => Ok(2 * a + 1),
            _ => bad(),
        };
    }
    match s.parse::<i32>() {
        Ok(a) => Ok(2 * a),
        Err(_) => bad(),
    }
}

fn expr_error(l: &Line, value_offset: usize, e: ExprError) -> FileError {
    let pos = match &e {
        ExprError::Syntax { pos, .. }
        | ExprError::Arity { pos, .. }
        | ExprError::ArgumentMismatch { pos, .. }
        | ExprError::NonIntegerExponent { pos }
        | ExprError::NegativeExponent { pos }
        | ExprError::NonConstantDivision { pos }
        | ExprError::DivisionByZero { pos }
        | ExprError::Undeclared { pos, .. } => Some(*pos),
        _ => None,
    };
    FileError {
        line: l.no,
        column: pos.map(|p| value_offset + p + 1),
        msg: e.to_string(),
    }
}

impl MetricFile {
    pub fn parse(text: &str) -> Result<MetricFile, FileError> {
        let mut section: Option<Section> = None;
        let mut seen = BTreeSet::new();
        let mut lines: BTreeMap<Section, Vec<Line>> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let no = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let lead = content.len() - content.trim_start().len();
            let t = content.trim();
            if t.is_empty() {
                continue;
            }
            if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                let Some(s) = Section::parse(name.trim()) else {
                    return err(no, format!("unknown section [{}]", name.trim()));
                };
                if !seen.insert(s) {
                    return err(no, format!("section [{}] appears twice", name.trim()));
                }
                section = Some(s);
                continue;
            }
            let Some(s) = section else {
                return err(no, "content before the first section header");
            };
            lines.entry(s).or_default().push(Line { no, text: t, offset: lead });
        }
        let last_line = text.lines().count().max(1);

        // [coordinates]
        let mut coords: Vec<String> = Vec::new();
        let mut signature = None;
        let mut rank = None;
        let mut coord_line = 0;
        for l in lines.get(&Section::Coordinates).map(Vec::as_slice).unwrap_or(&[]) {
            coord_line = l.no;
            if let Some((k, v)) = key_value(l.text) {
                match k {
                    "signature" => {
                        let parts: Vec<&str> = v.split(',').collect();
                        if parts.len() != 2 {
                            return err(l.no, "signature must be `p,q`");
                        }
                        signature = Some((parse_usize(l, parts[0], "signature")?, parse_usize(l, parts[1], "signature")?));
                    }
                    "rank" => rank = Some(parse_usize(l, v, "rank")?),
                    _ => return err(l.no, format!("unknown key `{}` in [coordinates]", k)),
                }
                continue;
            }
            for name in l.text.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
                let ok = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                    && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
                if !ok {
                    return err(l.no, format!("invalid coordinate name `{}`", name));
                }
                if name == "rho" || name == "t" || name == "log" || name == "D" {
                    return err(l.no, format!("`{}` is reserved and cannot be a coordinate", name));
                }
                if coords.iter().any(|c| c == name) {
                    return err(l.no, format!("coordinate `{}` declared twice", name));
                }
                coords.push(name.to_string());
            }
        }
        if coords.is_empty() {
            return err(last_line, "missing [coordinates] section or no coordinates declared");
        }
        let n = coords.len();
        if let Some((p, q)) = signature {
            if p + q != n {
                return err(coord_line, format!("signature ({},{}) does not match {} coordinates", p, q, n));
            }
        }

        // [functions]
        let mut functions = Vec::new();
        let mut ctx = ParseContext::new().with_variables(coords.iter().cloned());
        for l in lines.get(&Section::Functions).map(Vec::as_slice).unwrap_or(&[]) {
            let t = l.text;
            let (name, args) = match t.find('(') {
                Some(o) => {
                    let Some(inner) = t[o + 1..].strip_suffix(')') else {
                        return err(l.no, "expected `name(arg, ...)`");
                    };
                    let args: Vec<String> = inner
                        .split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect();
                    (t[..o].trim(), args)
                }
                None => (t.trim(), coords.clone()),
            };
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return err(l.no, format!("invalid function name `{}`", name));
            }
            if coords.iter().any(|c| c == name) {
                return err(l.no, format!("function `{}` shadows a coordinate", name));
            }
            for a in &args {
                if !coords.contains(a) {
                    return err(l.no, format!("argument `{}` of `{}` is not a coordinate", a, name));
                }
            }
            let refs: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
            ctx = ctx.with_function(name, &refs);
            functions.push((name.to_string(), args));
        }
        let declared: BTreeSet<String> = functions.iter().map(|(n, _)| n.clone()).collect();
        let parse_value = |l: &Line, text: &str, off: usize| -> Result<RatFunc, FileError> {
            let v = parse_ratfunc(text, &ctx).map_err(|e| expr_error(l, off, e))?;
            for e in std::iter::once(v.numerator()).chain(v.denominator_factors().iter().map(|(f, _)| f)) {
                for a in e.atoms() {
                    if let Atom::Func(f) = a {
                        if !declared.contains(&*f.name) {
                            return err(l.no, format!("undeclared function `{}`", f.name));
                        }
                    }
                }
            }
            Ok(v)
        };
        let index_of = |l: &Line, s: &str| -> Result<usize, FileError> {
            let s = s.trim();
            coords
                .iter()
                .position(|c| c == s)
                .map_or_else(|| err(l.no, format!("unknown coordinate `{}` in index", s)), Ok)
        };

        // [metric] / [frame]
        let has_metric = lines.contains_key(&Section::Metric) || seen.contains(&Section::Metric);
        let has_frame = lines.contains_key(&Section::Frame) || seen.contains(&Section::Frame);
        let body = match (has_metric, has_frame) {
            (true, true) => return err(last_line, "give exactly one of [metric] and [frame], not both"),
            (false, false) => return err(last_line, "missing [metric] or [frame] section"),
            (true, false) => {
                let mut entries: Vec<Vec<Option<(RatFunc, usize)>>> = vec![vec![None; n]; n];
                let mut given = BTreeSet::new();
                for l in lines.get(&Section::Metric).map(Vec::as_slice).unwrap_or(&[]) {
                    let Some((inner, value, off)) = indexed(l, "g")? else {
                        return err(l.no, "expected `g[a,b] = <expr>` in [metric]");
                    };
                    let idx: Vec<&str> = inner.split(',').collect();
                    if idx.len() != 2 {
                        return err(l.no, "metric entries take two indices");
                    }
                    let (i, j) = (index_of(l, idx[0])?, index_of(l, idx[1])?);
                    let v = parse_value(l, value, off)?;
                    if !given.insert((i, j)) {
                        return err(l.no, format!("entry g[{},{}] given twice", coords[i], coords[j]));
                    }
                    if let Some((old, old_line)) = &entries[i][j] {
                        if !old.sub(&v).is_zero() {
                            return err(
                                l.no,
                                format!(
                                    "entry g[{},{}] conflicts with line {}: the metric must be symmetric",
                                    coords[i], coords[j], old_line
                                ),
                            );
                        }
                    }
                    entries[i][j] = Some((v.clone(), l.no));
                    entries[j][i] = Some((v, l.no));
                }
                let rows: Vec<Vec<RatFunc>> = entries
                    .into_iter()
                    .map(|r| r.into_iter().map(|e| e.map(|(v, _)| v).unwrap_or_else(RatFunc::zero)).collect())
                    .collect();
                let first = lines.get(&Section::Metric).and_then(|v| v.first()).map_or(last_line, |l| l.no);
                let m = Metric::new(coords.clone(), rows).or_else(|e| err(first, format!("invalid metric: {}", e)))?;
                Body::Coordinates(m)
            }
            (false, true) => {
                let mut p = None;
                let mut gframe = vec![vec![Q::from_integer(0.into()); n]; n];
                let mut r = TensorField::zeros(n, &[Slot::Up, Slot::Down, Slot::Down]);
                let frame_index = |l: &Line, s: &str| -> Result<usize, FileError> {
                    let k = parse_usize(l, s, "frame index")?;
                    if k == 0 || k > n {
                        return err(l.no, format!("frame index {} out of range 1..={}", k, n));
                    }
                    Ok(k - 1)
                };
                let first = lines.get(&Section::Frame).and_then(|v| v.first()).map_or(last_line, |l| l.no);
                for l in lines.get(&Section::Frame).map(Vec::as_slice).unwrap_or(&[]) {
                    if let Some((inner, value, off)) = indexed(l, "gframe")? {
                        let idx: Vec<&str> = inner.split(',').collect();
                        if idx.len() != 2 {
                            return err(l.no, "gframe entries take two indices");
                        }
                        let (i, j) = (frame_index(l, idx[0])?, frame_index(l, idx[1])?);
                        let v = parse_value(l, value, off)?;
                        let Some(c) = v.as_expr().and_then(|e| e.as_constant()) else {
                            return err(l.no, "gframe entries must be rational constants");
                        };
                        gframe[i][j] = c.clone();
                        gframe[j][i] = c;
                    } else if let Some((inner, value, off)) = indexed(l, "r")? {
                        let Some((k, ij)) = inner.split_once(';') else {
                            return err(l.no, "expected `r[k;i,j] = <expr>`");
                        };
                        let idx: Vec<&str> = ij.split(',').collect();
                        if idx.len() != 2 {
                            return err(l.no, "structure functions take indices `k;i,j`");
                        }
                        let (k, i, j) = (frame_index(l, k)?, frame_index(l, idx[0])?, frame_index(l, idx[1])?);
                        if i == j {
                            return err(l.no, "r[k;i,i] must vanish");
                        }
                        let v = parse_value(l, value, off)?;
                        r.set(&[k, i, j], v.clone());
                        r.set(&[k, j, i], v.neg());
                    } else if let Some(("p", v)) = key_value(l.text) {
                        p = Some(parse_usize(l, v, "p")?);
                    } else {
                        return err(l.no, "expected `p = <rank>`, `gframe[i,j] = <rational>` or `r[k;i,j] = <expr>`");
                    }
                }
                let Some(p) = p.or(rank) else {
                    return err(first, "frame data needs the null rank `p = ...`");
                };
                let f = FrameData::new(p, gframe, r, None).or_else(|e| err(first, format!("invalid frame: {}", e)))?;
                Body::Frame(f)
            }
        };

        // [ambient]
        let ambient = match lines.get(&Section::Ambient) {
            None if seen.contains(&Section::Ambient) => Some(AmbientSpec { entries: Vec::new(), trunc: EXACT }),
            None => None,
            Some(ls) => {
                let mut entries = Vec::new();
                let mut trunc = EXACT;
                let mut keys = BTreeMap::new();
                for l in ls {
                    if let Some((inner, value, off)) = indexed(l, "h")? {
                        let parts: Vec<&str> = inner.split(';').collect();
                        if parts.len() < 2 || parts.len() > 3 {
                            return err(l.no, "expected `h[a,b;order] = <expr>` or `h[a,b;order;log] = <expr>`");
                        }
                        let idx: Vec<&str> = parts[0].split(',').collect();
                        if idx.len() != 2 {
                            return err(l.no, "h entries take two coordinate indices");
                        }
                        let (i, j) = (index_of(l, idx[0])?, index_of(l, idx[1])?);
                        let e2 = parse_order(l, parts[1])?;
                        if e2 <= 0 {
                            return err(l.no, "h terms must have positive order in rho");
                        }
                        let log = match parts.get(2).map(|s| s.trim()) {
                            None => 0,
                            Some("log") => 1,
                            Some(s) => match s.strip_prefix("log^").map(str::parse::<u32>) {
                                Some(Ok(k)) if k > 0 => k,
                                _ => return err(l.no, format!("expected `log` or `log^k`, got `{}`", s)),
                            },
                        };
                        let key = (i.min(j), i.max(j), e2, log);
                        if let Some(prev) = keys.insert(key, l.no) {
                            return err(l.no, format!("h entry duplicates line {}", prev));
                        }
                        let value = parse_value(l, value, off)?;
                        entries.push(AmbientEntry { i, j, e2, log, value });
                    } else if let Some(("truncate", v)) = key_value(l.text) {
                        trunc = parse_order(l, v)?;
                    } else {
                        return err(l.no, "expected `h[a,b;order] = <expr>` or `truncate = <order>`");
                    }
                }
                for e in &entries {
                    if e.e2 >= trunc {
                        let line = keys[&(e.i.min(e.j), e.i.max(e.j), e.e2, e.log)];
                        return err(line, "h term lies at or beyond the truncation order");
                    }
                }
                Some(AmbientSpec { entries, trunc })
            }
        };

        Ok(MetricFile {
            coords,
            signature,
            rank,
            functions,
            body,
            ambient,
            context: ctx,
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Coordinate metric: given directly, or realized from constant frame
    /// data on the nilpotent group.
    pub fn metric(&self) -> Result<Metric<RatFunc>, String> {
        match &self.body {
            Body::Coordinates(m) => Ok(m.clone()),
            Body::Frame(f) => {
                let c: Vec<&str> = self.coords.iter().map(|s| s.as_str()).collect();
                realize_nilpotent(f, &c).map(|r| r.metric).map_err(|e| e.to_string())
            }
        }
    }

    pub fn frame(&self) -> Option<&FrameData> {
        match &self.body {
            Body::Frame(f) => Some(f),
            Body::Coordinates(_) => None,
        }
    }

    /// The perturbation `h` of the `[ambient]` section, if present.
    pub fn ambient_h(&self) -> Option<TensorField<Series>> {
        let spec = self.ambient.as_ref()?;
        let n = self.dim();
        let mut t = TensorField::from_fn(n, &[Slot::Down, Slot::Down], |_| Series::zero_to(spec.trunc));
        for e in &spec.entries {
            let pairs = if e.i == e.j { vec![(e.i, e.j)] } else { vec![(e.i, e.j), (e.j, e.i)] };
            for (a, b) in pairs {
                let mut s = t.get(&[a, b]).clone();
                let old = s.coeff(e.e2, e.log);
                s.insert(e.e2, e.log, old.add(&e.value));
                t.set(&[a, b], s);
            }
        }
        Some(t)
    }
}

/// Check that every function atom of `v` is declared in `functions`.
fn check_declared(l: &Line, v: &RatFunc, functions: &[(String, Vec<String>)]) -> Result<(), FileError> {
    for e in std::iter::once(v.numerator()).chain(v.denominator_factors().iter().map(|(f, _)| f)) {
        for a in e.atoms() {
            if let Atom::Func(f) = a {
                if !functions.iter().any(|(n, _)| **n == *f.name) {
                    return err(l.no, format!("undeclared function `{}`", f.name));
                }
            }
        }
    }
    Ok(())
}

impl MetricFile {
    /// Parse a choice file of entries `c[a,b] = <expr>` indexed by the
    /// coordinates of this file. Entries are mirrored; unspecified entries
    /// are zero.
    pub fn parse_choice(&self, text: &str) -> Result<TensorField<RatFunc>, FileError> {
        let n = self.dim();
        let mut t = TensorField::zeros(n, &[Slot::Down, Slot::Down]);
        let mut given = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("");
            let lead = content.len() - content.trim_start().len();
            let l = Line {
                no: i + 1,
                text: content.trim(),
                offset: lead,
            };
            if l.text.is_empty() {
                continue;
            }
            let Some((inner, value, off)) = indexed(&l, "c")? else {
                return err(l.no, "expected `c[a,b] = <expr>`");
            };
            let idx: Vec<&str> = inner.split(',').map(str::trim).collect();
            if idx.len() != 2 {
                return err(l.no, "choice entries take two indices");
            }
            let mut pos = [0usize; 2];
            for (k, s) in idx.iter().enumerate() {
                pos[k] = match self.coords.iter().position(|c| c == s) {
                    Some(p) => p,
                    None => return err(l.no, format!("unknown coordinate `{}` in index", s)),
                };
            }
            let (a, b) = (pos[0].min(pos[1]), pos[0].max(pos[1]));
            if !given.insert((a, b)) {
                return err(l.no, format!("entry c[{},{}] given twice", self.coords[a], self.coords[b]));
            }
            let v = parse_ratfunc(value, &self.context).map_err(|e| expr_error(&l, off, e))?;
            check_declared(&l, &v, &self.functions)?;
            t.set(&[a, b], v.clone());
            t.set(&[b, a], v);
        }
        Ok(t)
    }
}

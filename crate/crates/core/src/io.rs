//! Plain-text problem files and the CSV writers.
//!
//! * matrix: `n`, then `n` lines of `n` reals
//! * vector: `n`, then `n` reals one per line
//! * constraints: a tag word (`box`, `orthant`, `simplex`, `halfspaces`)
//!   followed by its payload; see [`parse_constraints`].

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::feasible::ConstraintSet;
use crate::kkt::KktReport;
use crate::model::SymmetricMatrix;
use crate::solver::IterationRecord;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Model(#[from] crate::error::Error),
}

pub type IoResult<T> = std::result::Result<T, IoError>;

fn read(path: &Path) -> IoResult<String> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> IoResult<()> {
    fs::write(path, contents).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

struct Tokens<'a> {
    inner: std::str::SplitWhitespace<'a>,
}

impl<'a> Tokens<'a> {
    fn new(s: &'a str) -> Self {
        Self {
            inner: s.split_whitespace(),
        }
    }
    fn word(&mut self, what: &str) -> IoResult<&'a str> {
        self.inner
            .next()
            .ok_or_else(|| IoError::Parse(format!("unexpected end of input, expected {what}")))
    }
    fn count(&mut self, what: &str) -> IoResult<usize> {
        let w = self.word(what)?;
        w.parse()
            .map_err(|_| IoError::Parse(format!("expected {what}, found '{w}'")))
    }
    fn real(&mut self, what: &str) -> IoResult<f64> {
        let w = self.word(what)?;
        w.parse()
            .map_err(|_| IoError::Parse(format!("expected {what}, found '{w}'")))
    }
    fn reals(&mut self, k: usize, what: &str) -> IoResult<Vec<f64>> {
        (0..k).map(|_| self.real(what)).collect()
    }
    fn finish(mut self) -> IoResult<()> {
        match self.inner.next() {
            None => Ok(()),
            Some(w) => Err(IoError::Parse(format!("trailing token '{w}'"))),
        }
    }
}

pub fn parse_matrix(s: &str) -> IoResult<SymmetricMatrix> {
    let mut t = Tokens::new(s);
    let n = t.count("dimension")?;
    let data = t.reals(n * n, "matrix entry")?;
    t.finish()?;
    Ok(SymmetricMatrix::new(n, data)?)
}

pub fn parse_vector(s: &str) -> IoResult<Vec<f64>> {
    let mut t = Tokens::new(s);
    let n = t.count("dimension")?;
    let v = t.reals(n, "vector entry")?;
    t.finish()?;
    Ok(v)
}

/// Constraint payloads:
///
/// * `box`: `n`, then `n` lower bounds, then `n` upper bounds (`inf`/`-inf` allowed)
/// * `orthant`: `n`
/// * `simplex`: `n r`
/// * `halfspaces`: `p` (optionally `p n`), then `A` row-major, then `b`
pub fn parse_constraints(s: &str) -> IoResult<ConstraintSet> {
    let mut t = Tokens::new(s);
    let tag = t.word("constraint tag")?.to_ascii_lowercase();
    let set = match tag.as_str() {
        "box" => {
            let n = t.count("dimension")?;
            let lower = t.reals(n, "lower bound")?;
            let upper = t.reals(n, "upper bound")?;
            t.finish()?;
            ConstraintSet::boxed(lower, upper)?
        }
        "orthant" => {
            let n = t.count("dimension")?;
            t.finish()?;
            if n == 0 {
                return Err(IoError::Parse("orthant dimension must be ≥ 1".into()));
            }
            ConstraintSet::orthant(n)
        }
        "simplex" => {
            let n = t.count("dimension")?;
            let r = t.real("radius")?;
            t.finish()?;
            ConstraintSet::simplex(n, r)?
        }
        "halfspaces" => parse_halfspaces(s)?,
        other => return Err(IoError::Parse(format!("unknown constraint tag '{other}'"))),
    };
    Ok(set)
}

/// Header is the first line that carries numbers: `p` or `p n`.
fn parse_halfspaces(s: &str) -> IoResult<ConstraintSet> {
    let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
    let tag_line = lines.next().unwrap_or_default();
    let after_tag: Vec<&str> = tag_line.split_whitespace().skip(1).collect();
    let header: Vec<&str> = if after_tag.is_empty() {
        lines.next().unwrap_or_default().split_whitespace().collect()
    } else {
        after_tag
    };
    let body: String = lines.collect::<Vec<_>>().join(" ");
    let parse_count = |w: &str| {
        w.parse::<usize>()
            .map_err(|_| IoError::Parse(format!("expected count, found '{w}'")))
    };
    let mut t = Tokens::new(&body);
    let (p, n) = match header.as_slice() {
        [p] => {
            let p = parse_count(p)?;
            if p == 0 {
                return Err(IoError::Parse("halfspaces needs p ≥ 1".into()));
            }
            let total = body.split_whitespace().count();
            if total % p != 0 || total / p < 2 {
                return Err(IoError::Parse(format!(
                    "cannot split {total} numbers into {p} rows plus b"
                )));
            }
            (p, total / p - 1)
        }
        [p, n] => (parse_count(p)?, parse_count(n)?),
        _ => return Err(IoError::Parse("halfspaces header must be 'p' or 'p n'".into())),
    };
    let a = t.reals(p * n, "constraint coefficient")?;
    let b = t.reals(p, "right-hand side")?;
    t.finish()?;
    let rows: Vec<Vec<f64>> = a.chunks(n.max(1)).map(<[f64]>::to_vec).collect();
    Ok(ConstraintSet::halfspaces(&rows, b)?)
}

pub fn read_matrix(path: &Path) -> IoResult<SymmetricMatrix> {
    parse_matrix(&read(path)?)
}

pub fn read_vector(path: &Path) -> IoResult<Vec<f64>> {
    parse_vector(&read(path)?)
}

pub fn read_constraints(path: &Path) -> IoResult<ConstraintSet> {
    parse_constraints(&read(path)?)
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn format_matrix(m: &SymmetricMatrix) -> String {
    let n = m.dim();
    let mut s = format!("{n}\n");
    for i in 0..n {
        let row: Vec<String> = m.row(i).iter().map(|v| real(*v)).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn format_vector(v: &[f64]) -> String {
    let mut s = format!("{}\n", v.len());
    for x in v {
        s.push_str(&real(*x));
        s.push('\n');
    }
    s
}

pub fn format_constraints(c: &ConstraintSet) -> String {
    let join = |v: &[f64]| v.iter().map(|x| real(*x)).collect::<Vec<_>>().join(" ");
    match c {
        ConstraintSet::Box { lower, upper } => {
            format!("box\n{}\n{}\n{}\n", lower.len(), join(lower), join(upper))
        }
        ConstraintSet::NonnegOrthant { n } => format!("orthant\n{n}\n"),
        ConstraintSet::Simplex { n, radius } => format!("simplex\n{n} {}\n", real(*radius)),
        ConstraintSet::Halfspaces { n, a, b } => {
            let mut s = format!("halfspaces\n{} {n}\n", b.len());
            for row in a.chunks_exact(*n) {
                s.push_str(&join(row));
                s.push('\n');
            }
            s.push_str(&join(b));
            s.push('\n');
            s
        }
    }
}

pub const TRACE_HEADER: &str =
    "k,phi_x,phi_y,d_norm,lambda_k,trial_lambda,backtracks,direction_feasible,elapsed_s";

pub fn trace_csv(records: &[IterationRecord]) -> String {
    let mut s = String::with_capacity(64 * (records.len() + 1));
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.k,
            real(r.phi_x),
            real(r.phi_y),
            real(r.d_norm),
            real(r.lambda_k),
            real(r.trial_lambda),
            r.backtracks,
            r.direction_feasible,
            real(r.elapsed)
        );
    }
    s
}

pub const KKT_HEADER: &str = "stationarity,complementarity,feasibility,multipliers";

pub fn kkt_row(k: &KktReport) -> String {
    format!(
        "{},{},{},{}",
        real(k.stationarity_residual),
        real(k.complementarity_residual),
        real(k.feasibility_violation),
        k.multipliers_joined()
    )
}

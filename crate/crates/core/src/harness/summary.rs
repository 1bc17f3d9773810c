//! Endpoint statistics over replicate metrics files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::statistics::Statistics;

use super::experiment::HarnessError;
use super::metrics::COLUMNS;

/// Last row of one metrics file, by column; empty cells are left out.
#[derive(Clone, Debug, PartialEq)]
pub struct Endpoint {
    pub values: BTreeMap<String, f64>,
}

impl Endpoint {
    pub fn read(path: &Path) -> Result<Self, HarnessError> {
        let mut rdr = csv::Reader::from_path(path)?;
        let header = rdr.headers()?.clone();
        let mut last = None;
        for rec in rdr.records() {
            last = Some(rec?);
        }
        let last = last.ok_or_else(|| HarnessError::Input(format!("{}: no data rows", path.display())))?;
        let mut values = BTreeMap::new();
        for (name, cell) in header.iter().zip(last.iter()) {
            if cell.is_empty() {
                continue;
            }
            let v = cell
                .parse()
                .map_err(|_| HarnessError::Input(format!("{}: column {name}: not a number: {cell:?}", path.display())))?;
            values.insert(name.to_string(), v);
        }
        Ok(Endpoint { values })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Describe {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; NaN below two values.
    pub sd: f64,
}

pub fn describe(xs: &[f64]) -> Describe {
    Describe { n: xs.len(), mean: xs.mean(), sd: if xs.len() < 2 { f64::NAN } else { xs.std_dev() } }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Welch {
    pub t: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub df: f64,
    /// Two-sided.
    pub p: f64,
}

/// Unequal-variance t-test of `a` against `b`. Needs two values per
/// group. With both variances zero, equal means give `t = 0, p = 1` and
/// different means `t = ±inf, p = 0`.
pub fn welch(a: &[f64], b: &[f64]) -> Option<Welch> {
    if a.len() < 2 || b.len() < 2 {
        return None;
    }
    let (da, db) = (describe(a), describe(b));
    let (va, vb) = (da.sd * da.sd / da.n as f64, db.sd * db.sd / db.n as f64);
    let diff = da.mean - db.mean;
    let se2 = va + vb;
    if se2 == 0.0 {
        let df = (da.n + db.n - 2) as f64;
        return Some(if diff == 0.0 {
            Welch { t: 0.0, df, p: 1.0 }
        } else {
            Welch { t: diff.signum() * f64::INFINITY, df, p: 0.0 }
        });
    }
    let t = diff / se2.sqrt();
    let df = se2 * se2 / (va * va / (da.n - 1) as f64 + vb * vb / (db.n - 1) as f64);
    let dist = StudentsT::new(0.0, 1.0, df).ok()?;
    Some(Welch { t, df, p: (2.0 * dist.sf(t.abs())).min(1.0) })
}

/// One metrics column across replicates.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnSummary {
    pub column: String,
    pub a: Describe,
    pub b: Option<Describe>,
    pub welch: Option<Welch>,
}

/// Summaries for every column present in some endpoint, in file column
/// order. `b` is an optional second group compared by Welch's test.
pub fn summarize(a: &[Endpoint], b: Option<&[Endpoint]>) -> Vec<ColumnSummary> {
    let gather = |group: &[Endpoint], col: &str| -> Vec<f64> { group.iter().filter_map(|e| e.values.get(col).copied()).collect() };
    let mut out = Vec::new();
    for col in COLUMNS.iter().skip(1) {
        let xa = gather(a, col);
        let xb = b.map(|g| gather(g, col));
        if xa.is_empty() && xb.as_ref().is_none_or(Vec::is_empty) {
            continue;
        }
        out.push(ColumnSummary {
            column: col.to_string(),
            a: describe(&xa),
            b: xb.as_deref().map(describe),
            welch: xb.as_deref().and_then(|xb| welch(&xa, xb)),
        });
    }
    out
}

/// Tab-separated table with a header line.
pub struct SummaryTable<'a>(pub &'a [ColumnSummary]);

fn num(v: f64) -> String {
    if v.is_nan() {
        "-".into()
    } else {
        format!("{v:.4}")
    }
}

impl fmt::Display for SummaryTable<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let paired = self.0.iter().any(|c| c.b.is_some());
        if paired {
            writeln!(f, "column\tn_a\tmean_a\tsd_a\tn_b\tmean_b\tsd_b\tt\tdf\tp")?;
        } else {
            writeln!(f, "column\tn\tmean\tsd")?;
        }
        for c in self.0 {
            write!(f, "{}\t{}\t{}\t{}", c.column, c.a.n, num(c.a.mean), num(c.a.sd))?;
            if paired {
                let b = c.b.unwrap_or(Describe { n: 0, mean: f64::NAN, sd: f64::NAN });
                write!(f, "\t{}\t{}\t{}", b.n, num(b.mean), num(b.sd))?;
                match c.welch {
                    Some(w) => write!(f, "\t{}\t{}\t{}", num(w.t), num(w.df), num(w.p))?,
                    None => write!(f, "\t-\t-\t-")?,
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

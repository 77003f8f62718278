use std::io::{Read, Write};

use super::metrics::Psnr;
use crate::error::{Error, Result};

/// Metrics of one solver run. Missing values are empty in CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub config_hash: String,
    pub seed: u64,
    pub method: String,
    pub gamma: Option<f64>,
    /// Atom or term count for methods parameterized by it.
    pub param: Option<usize>,
    pub psnr: Option<Psnr>,
    /// `gamma ||diff x||_0 + ||A x - b||_p^p` for jump-sparse experiments,
    /// `gamma ||x||_0 + ||A x - b||_p^p` for sparse ones.
    pub energy: Option<f64>,
    /// `||diff x||_0` or `||x||_0`.
    pub count: Option<usize>,
    pub truth_count: Option<usize>,
    /// Jump set (jump-sparse) or support (sparse) equals the ground truth's.
    pub exact_structure: Option<bool>,
    /// `||A x - b||_2^2`.
    pub approx_error: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub failure: Option<String>,
}

pub const RECORD_COLUMNS: [&str; 15] = [
    "config_hash",
    "seed",
    "method",
    "gamma",
    "param",
    "psnr",
    "energy",
    "count",
    "truth_count",
    "exact_structure",
    "approx_error",
    "iterations",
    "converged",
    "failure",
    "psnr_perfect",
];

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

impl ResultRecord {
    fn fields(&self) -> Vec<String> {
        vec![
            self.config_hash.clone(),
            self.seed.to_string(),
            self.method.clone(),
            opt(&self.gamma),
            opt(&self.param),
            match self.psnr {
                Some(Psnr::Db(v)) => v.to_string(),
                _ => String::new(),
            },
            opt(&self.energy),
            opt(&self.count),
            opt(&self.truth_count),
            opt(&self.exact_structure),
            opt(&self.approx_error),
            opt(&self.iterations),
            opt(&self.converged),
            self.failure.clone().unwrap_or_default(),
            opt(&self.psnr.map(|p| p == Psnr::Perfect)),
        ]
    }

    fn parse(row: &csv::StringRecord) -> Result<Self> {
        let get = |i: usize| row.get(i).unwrap_or("");
        fn num<T: std::str::FromStr>(s: &str, col: &str) -> Result<Option<T>> {
            if s.is_empty() {
                return Ok(None);
            }
            s.parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("bad value {s:?} in column {col}")))
        }
        let perfect: Option<bool> = num(get(14), "psnr_perfect")?;
        let db: Option<f64> = num(get(5), "psnr")?;
        Ok(Self {
            config_hash: get(0).into(),
            seed: num(get(1), "seed")?.ok_or_else(|| Error::Config("missing seed".into()))?,
            method: get(2).into(),
            gamma: num(get(3), "gamma")?,
            param: num(get(4), "param")?,
            psnr: match (perfect, db) {
                (Some(true), _) => Some(Psnr::Perfect),
                (_, Some(v)) => Some(Psnr::Db(v)),
                _ => None,
            },
            energy: num(get(6), "energy")?,
            count: num(get(7), "count")?,
            truth_count: num(get(8), "truth_count")?,
            exact_structure: num(get(9), "exact_structure")?,
            approx_error: num(get(10), "approx_error")?,
            iterations: num(get(11), "iterations")?,
            converged: num(get(12), "converged")?,
            failure: Some(get(13).to_string()).filter(|s| !s.is_empty()),
        })
    }
}

pub fn write_records<W: Write>(records: &[ResultRecord], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(RECORD_COLUMNS)?;
    for r in records {
        out.write_record(r.fields())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(reader: R) -> Result<Vec<ResultRecord>> {
    let mut input = csv::Reader::from_reader(reader);
    let header = input.headers()?.clone();
    if header.iter().ne(RECORD_COLUMNS) {
        return Err(Error::Config("unexpected result CSV header".into()));
    }
    input.records().map(|row| ResultRecord::parse(&row?)).collect()
}

/// Wall-clock time of one run, kept apart from the deterministic records.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRecord {
    pub seed: u64,
    pub method: String,
    pub gamma: Option<f64>,
    pub param: Option<usize>,
    pub seconds: f64,
}

pub fn write_timings<W: Write>(timings: &[TimingRecord], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["seed", "method", "gamma", "param", "seconds"])?;
    for t in timings {
        out.write_record([
            t.seed.to_string(),
            t.method.clone(),
            opt(&t.gamma),
            opt(&t.param),
            t.seconds.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

//! File formats and named constructors.
//!
//! Sequences and matrices use their serde JSON form, which round-trips log
//! values bit for bit. CSV output writes every float with the shortest
//! representation that parses back to the same bits, so CSV round-trips too.

use crate::bmt::WeightMatrix;
use crate::error::{Error, Result};
use crate::func::{associated, conjugate, ClosedForm, GridSpec, WeightFunction};
use crate::seq::{WeightSequence, DEFAULT_P_MAX};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

/// Named sequence families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SequenceFamily {
    /// `M_p = p!^s`.
    Gevrey { s: f64 },
    /// `M_p = exp(p^a)`.
    ExpPower { a: f64 },
    /// `M_p = q^{p²}`.
    Qgevrey { q: f64 },
}

impl SequenceFamily {
    pub fn build(&self, p_max: usize) -> Result<WeightSequence> {
        match *self {
            SequenceFamily::Gevrey { s } => WeightSequence::gevrey(s, p_max),
            SequenceFamily::ExpPower { a } => WeightSequence::exp_power(a, p_max),
            SequenceFamily::Qgevrey { q } => WeightSequence::qgevrey(q, p_max),
        }
    }
}

fn default_p_max() -> usize {
    DEFAULT_P_MAX
}

/// How to build a weight function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum FunctionSpec {
    Closed(ClosedForm),
    Associated {
        sequence: SequenceFamily,
        #[serde(default = "default_p_max")]
        p_max: usize,
    },
    Sampled {
        ts: Vec<f64>,
        values: Vec<f64>,
    },
    Conjugate {
        of: Box<FunctionSpec>,
    },
}

/// `{"kind": …, "params": {…}, "grid": {"t_min", "t_max", "n"}}`; the grid
/// is used by every transform in the construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionDescriptor {
    #[serde(flatten)]
    pub spec: FunctionSpec,
    #[serde(default)]
    pub grid: GridSpec,
}

impl FunctionSpec {
    pub fn build(&self, grid: &GridSpec) -> Result<WeightFunction> {
        match self {
            FunctionSpec::Closed(form) => WeightFunction::closed(*form),
            FunctionSpec::Associated { sequence, p_max } => associated(&sequence.build(*p_max)?),
            FunctionSpec::Sampled { ts, values } => WeightFunction::sampled(ts.clone(), values.clone()),
            FunctionSpec::Conjugate { of } => conjugate(&of.build(grid)?, grid),
        }
    }
}

impl FunctionDescriptor {
    pub fn build(&self) -> Result<WeightFunction> {
        self.grid.validate()?;
        self.spec.build(&self.grid)
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

fn sequence_rows(w: &mut csv::Writer<Vec<u8>>, seq: &WeightSequence, prefix: Option<f64>) -> Result<()> {
    let lmu = seq.log_quotients();
    let lm = seq.log_small();
    for (p, v) in seq.log_values().iter().enumerate() {
        let mut row: Vec<String> = prefix.iter().map(|e| e.to_string()).collect();
        row.extend([p.to_string(), v.to_string(), lmu[p].to_string(), lm[p].to_string()]);
        w.write_record(&row)?;
    }
    Ok(())
}

/// Columns `p, logM, logmu, logm`.
pub fn sequence_to_csv(seq: &WeightSequence) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(["p", "logM", "logmu", "logm"])?;
    sequence_rows(&mut w, seq, None)?;
    finish(w)
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Format(format!("CSV has no column {name:?}")))
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("cannot parse {what} value {s:?}")))
}

/// Reads the `logM` column; the `p` column must run `0, 1, 2, …`.
pub fn sequence_from_csv(text: &str) -> Result<WeightSequence> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    let (ip, im) = (column(&headers, "p")?, column(&headers, "logM")?);
    let mut values = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let p: usize = rec[ip]
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("bad index {:?} in row {}", &rec[ip], k + 1)))?;
        if p != k {
            return Err(Error::Format(format!("expected p = {k} in row {}, got {p}", k + 1)));
        }
        values.push(parse_f64(&rec[im], "logM")?);
    }
    WeightSequence::from_log_values(values)
}

/// Columns `t, value`.
pub fn samples_to_csv(ts: &[f64], values: &[f64]) -> Result<String> {
    if ts.len() != values.len() {
        return Err(Error::Format(format!("{} abscissae for {} values", ts.len(), values.len())));
    }
    let mut w = csv_writer();
    w.write_record(["t", "value"])?;
    for (t, v) in ts.iter().zip(values) {
        w.write_record([t.to_string(), v.to_string()])?;
    }
    finish(w)
}

pub fn samples_from_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    let (it, iv) = (column(&headers, "t")?, column(&headers, "value")?);
    let mut ts = Vec::new();
    let mut vs = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        ts.push(parse_f64(&rec[it], "t")?);
        vs.push(parse_f64(&rec[iv], "value")?);
    }
    Ok((ts, vs))
}

/// One block of sequence rows per parameter, prefixed by an `ell` column.
pub fn matrix_to_csv(mat: &WeightMatrix) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(["ell", "p", "logM", "logmu", "logm"])?;
    for (ell, seq) in mat.ells().iter().zip(mat.sequences()) {
        sequence_rows(&mut w, seq, Some(*ell))?;
    }
    finish(w)
}

/// Loads a sequence from `.json` (sequence schema) or `.csv`.
pub fn read_sequence(path: &Path) -> Result<WeightSequence> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if is_csv(path) {
        sequence_from_csv(&text)
    } else {
        Ok(serde_json::from_str(&text)?)
    }
}

/// Loads a function from a sampled CSV or a JSON descriptor.
pub fn read_function(path: &Path) -> Result<WeightFunction> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if is_csv(path) {
        let (ts, vs) = samples_from_csv(&text)?;
        WeightFunction::sampled(ts, vs)
    } else {
        serde_json::from_str::<FunctionDescriptor>(&text)?.build()
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Writes through a sibling temporary file and a rename, so readers never see
/// a partial artifact.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, contents).map_err(|e| Error::Io(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::Io(format!("{}: {e}", path.display()))
    })
}

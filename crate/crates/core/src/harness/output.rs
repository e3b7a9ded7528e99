use std::path::Path;

use crate::baselines::ComplexityReport;
use crate::error::{Error, Result};

pub const RATES_HEADER: [&str; 8] = [
    "scheme",
    "sweep_var",
    "sweep_value",
    "mean_metric_rate",
    "mean_realized_rate",
    "std_error",
    "trials",
    "seed",
];

pub const THEORY_HEADER: [&str; 6] = [
    "t",
    "k_r_db",
    "simulated_power",
    "bound_power",
    "simulated_rate",
    "bound_rate",
];

pub const COMPLEXITY_HEADER: [&str; 9] = [
    "m",
    "n",
    "t",
    "a_bits",
    "n_iter",
    "ao_estimation",
    "ao_optimization",
    "proposed_estimation",
    "proposed_optimization",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scheme: String,
    pub sweep_var: String,
    pub sweep_value: f64,
    pub mean_metric_rate: f64,
    pub mean_realized_rate: f64,
    pub std_error: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryRow {
    pub t: usize,
    pub k_r_db: f64,
    pub simulated_power: f64,
    pub bound_power: f64,
    pub simulated_rate: f64,
    pub bound_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityRow {
    pub m: u64,
    pub n: u64,
    pub t: u64,
    pub a_bits: u32,
    pub n_iter: u64,
    pub report: ComplexityReport,
}

/// Formats `x` with at most 10 significant digits: plain decimal for
/// magnitudes in `[1e-5, 1e10)`, scientific otherwise.
pub fn format_sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // round first so the exponent reflects the printed mantissa
    let sci = format!("{x:.9e}");
    let (_, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..10).contains(&exp) {
        let decimals = (9 - exp) as usize;
        let fixed = format!("{x:.decimals$}");
        if fixed.contains('.') {
            fixed
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            fixed
        }
    } else {
        let (mant, _) = sci.split_once('e').expect("scientific format");
        let mant = if mant.contains('.') {
            mant.trim_end_matches('0').trim_end_matches('.')
        } else {
            mant
        };
        format!("{mant}e{exp}")
    }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

fn write_records<const K: usize>(
    path: &Path,
    header: [&str; K],
    records: impl Iterator<Item = [String; K]>,
) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in records {
        w.write_record(&r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_records<const K: usize>(path: &Path, header: [&str; K]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let got = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!("unexpected header {:?}", got.iter().collect::<Vec<_>>()),
        });
    }
    r.records()
        .map(|rec| rec.map_err(|e| csv_err(path, e)))
        .collect()
}

fn field<T: std::str::FromStr>(path: &Path, rec: &csv::StringRecord, i: usize) -> Result<T> {
    let raw = rec.get(i).unwrap_or_default();
    raw.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        message: format!("bad value '{raw}' in column {}", i + 1),
    })
}

/// Rates CSV: one row per (scheme, sweep value), in the order given.
pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    write_records(
        path,
        RATES_HEADER,
        rows.iter().map(|r| {
            [
                r.scheme.clone(),
                r.sweep_var.clone(),
                format_sig10(r.sweep_value),
                format_sig10(r.mean_metric_rate),
                format_sig10(r.mean_realized_rate),
                format_sig10(r.std_error),
                r.trials.to_string(),
                r.seed.to_string(),
            ]
        }),
    )
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    read_records(path, RATES_HEADER)?
        .iter()
        .map(|rec| {
            Ok(ResultRow {
                scheme: field(path, rec, 0)?,
                sweep_var: field(path, rec, 1)?,
                sweep_value: field(path, rec, 2)?,
                mean_metric_rate: field(path, rec, 3)?,
                mean_realized_rate: field(path, rec, 4)?,
                std_error: field(path, rec, 5)?,
                trials: field(path, rec, 6)?,
                seed: field(path, rec, 7)?,
            })
        })
        .collect()
}

pub fn write_theory_csv(rows: &[TheoryRow], path: &Path) -> Result<()> {
    write_records(
        path,
        THEORY_HEADER,
        rows.iter().map(|r| {
            [
                r.t.to_string(),
                format_sig10(r.k_r_db),
                format_sig10(r.simulated_power),
                format_sig10(r.bound_power),
                format_sig10(r.simulated_rate),
                format_sig10(r.bound_rate),
            ]
        }),
    )
}

pub fn read_theory_csv(path: &Path) -> Result<Vec<TheoryRow>> {
    read_records(path, THEORY_HEADER)?
        .iter()
        .map(|rec| {
            Ok(TheoryRow {
                t: field(path, rec, 0)?,
                k_r_db: field(path, rec, 1)?,
                simulated_power: field(path, rec, 2)?,
                bound_power: field(path, rec, 3)?,
                simulated_rate: field(path, rec, 4)?,
                bound_rate: field(path, rec, 5)?,
            })
        })
        .collect()
}

pub fn write_complexity_csv(rows: &[ComplexityRow], path: &Path) -> Result<()> {
    write_records(
        path,
        COMPLEXITY_HEADER,
        rows.iter().map(|r| {
            [
                r.m.to_string(),
                r.n.to_string(),
                r.t.to_string(),
                r.a_bits.to_string(),
                r.n_iter.to_string(),
                r.report.ao_estimation.to_string(),
                r.report.ao_optimization.to_string(),
                r.report.proposed_estimation.to_string(),
                r.report.proposed_optimization.to_string(),
            ]
        }),
    )
}

pub fn read_complexity_csv(path: &Path) -> Result<Vec<ComplexityRow>> {
    read_records(path, COMPLEXITY_HEADER)?
        .iter()
        .map(|rec| {
            Ok(ComplexityRow {
                m: field(path, rec, 0)?,
                n: field(path, rec, 1)?,
                t: field(path, rec, 2)?,
                a_bits: field(path, rec, 3)?,
                n_iter: field(path, rec, 4)?,
                report: ComplexityReport {
                    ao_estimation: field(path, rec, 5)?,
                    ao_optimization: field(path, rec, 6)?,
                    proposed_estimation: field(path, rec, 7)?,
                    proposed_optimization: field(path, rec, 8)?,
                },
            })
        })
        .collect()
}

//! Device characterization time series: CSV I/O, month slicing, per-epoch
//! model fitting and a synthetic data generator.
//!
//! File format: UTF-8, LF line endings, header `date,metric_id,value`, one
//! observation per row, ISO-8601 dates, `metric_id` in `x0..x15`, values with a
//! `.` decimal separator. T2 values are in microseconds.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use chrono::{Datelike, Days, NaiveDate};

use crate::copula::{pearson_matrix, CopulaModel};
use crate::error::{Error, Result};
use crate::marginals::fit_moments;
use crate::metrics::{FamilyAssignment, MetricId, METRIC_COUNT};

pub const CSV_HEADER: [&str; 3] = ["date", "metric_id", "value"];

/// Minimum aligned days for fitting an epoch.
pub const MIN_EPOCH_DAYS: usize = 8;

/// Observations per metric, in strictly increasing date order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CharacterizationSeries {
    series: Vec<Vec<(NaiveDate, f64)>>,
}

impl CharacterizationSeries {
    pub fn metric(&self, id: MetricId) -> &[(NaiveDate, f64)] {
        &self.series[id.index()]
    }

    pub fn counts(&self) -> Vec<usize> {
        self.series.iter().map(Vec::len).collect()
    }
}

/// Aligned daily values of every metric over a set of common dates.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochData {
    pub label: String,
    pub dates: Vec<NaiveDate>,
    /// `columns[metric][day]`
    pub columns: Vec<Vec<f64>>,
}

impl EpochData {
    pub fn days(&self) -> usize {
        self.dates.len()
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<CharacterizationSeries> {
    parse_csv(File::open(path)?)
}

pub fn parse_csv<R: Read>(reader: R) -> Result<CharacterizationSeries> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().map(str::trim).ne(CSV_HEADER) {
        return Err(Error::Parse {
            row: 1,
            message: format!("expected header {:?}, found {:?}", CSV_HEADER.join(","), header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut series: Vec<Vec<(NaiveDate, f64)>> = vec![Vec::new(); METRIC_COUNT];
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 3 {
            return Err(Error::Parse { row, message: format!("expected 3 fields, found {}", record.len()) });
        }
        let date = NaiveDate::parse_from_str(record[0].trim(), "%Y-%m-%d")
            .map_err(|e| Error::Parse { row, message: format!("bad date {:?}: {e}", &record[0]) })?;
        let id: MetricId = record[1]
            .trim()
            .parse()
            .map_err(|_| Error::Parse { row, message: format!("unknown metric id {:?}", &record[1]) })?;
        let value: f64 = record[2]
            .trim()
            .parse()
            .map_err(|_| Error::Parse { row, message: format!("bad value {:?}", &record[2]) })?;
        if !id.class().in_domain(value) {
            return Err(Error::OutOfDomain { row, metric: id.to_string(), value });
        }
        let obs = &mut series[id.index()];
        if obs.last().is_some_and(|&(last, _)| date <= last) {
            return Err(Error::DateOrder { row, metric: id.to_string(), date: date.to_string() });
        }
        obs.push((date, value));
    }
    let missing: Vec<String> = MetricId::all()
        .filter(|id| series[id.index()].is_empty())
        .map(|id| id.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingMetrics(missing));
    }
    Ok(CharacterizationSeries { series })
}

fn parse_month(label: &str) -> Result<(i32, u32)> {
    let bad = || Error::InvalidParameter(format!("month label {label:?} is not YYYY-MM"));
    let (y, m) = label.split_once('-').ok_or_else(bad)?;
    let year: i32 = y.parse().map_err(|_| bad())?;
    let month: u32 = m.parse().map_err(|_| bad())?;
    if y.len() != 4 || m.len() != 2 || !(1..=12).contains(&month) {
        return Err(bad());
    }
    Ok((year, month))
}

fn align(series: &CharacterizationSeries, label: &str, keep: impl Fn(NaiveDate) -> bool) -> Result<EpochData> {
    let mut common: Option<BTreeSet<NaiveDate>> = None;
    for id in MetricId::all() {
        let dates: BTreeSet<NaiveDate> = series.metric(id).iter().map(|&(d, _)| d).filter(|&d| keep(d)).collect();
        if dates.len() < MIN_EPOCH_DAYS {
            return Err(Error::InsufficientData {
                label: label.to_string(),
                message: format!("{id} has {} observations, need {MIN_EPOCH_DAYS}", dates.len()),
            });
        }
        common = Some(match common {
            None => dates,
            Some(c) => c.intersection(&dates).copied().collect(),
        });
    }
    let dates: Vec<NaiveDate> = common.unwrap_or_default().into_iter().collect();
    if dates.len() < MIN_EPOCH_DAYS {
        return Err(Error::InsufficientData {
            label: label.to_string(),
            message: format!("only {} dates common to all metrics, need {MIN_EPOCH_DAYS}", dates.len()),
        });
    }
    let columns = MetricId::all()
        .map(|id| {
            let obs = series.metric(id);
            dates
                .iter()
                .map(|d| obs[obs.binary_search_by_key(d, |&(od, _)| od).expect("date in common set")].1)
                .collect()
        })
        .collect();
    Ok(EpochData { label: label.to_string(), dates, columns })
}

/// Aligned daily values for one calendar month (`YYYY-MM`), keeping only dates
/// on which every metric was observed.
pub fn epoch_slice(series: &CharacterizationSeries, month: &str) -> Result<EpochData> {
    let (year, mon) = parse_month(month)?;
    align(series, month, |d| d.year() == year && d.month() == mon)
}

/// Aligned daily values over the whole series.
pub fn align_all(series: &CharacterizationSeries, label: &str) -> Result<EpochData> {
    align(series, label, |_| true)
}

/// Method-of-moments marginals (family chosen by metric class) and the Pearson
/// correlation of the daily values, repaired to positive semidefiniteness.
pub fn fit_epoch_model(data: &EpochData, families: &FamilyAssignment) -> Result<CopulaModel<f64>> {
    if data.columns.len() != METRIC_COUNT {
        return Err(Error::DimensionMismatch { expected: METRIC_COUNT, actual: data.columns.len() });
    }
    let marginals = MetricId::all()
        .map(|id| {
            fit_moments(&data.columns[id.index()], families.family_for(id.class())).map_err(|e| match e {
                Error::Degenerate(msg) => Error::Degenerate(format!("{id}: {msg}")),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sigma = pearson_matrix(&data.columns)?;
    CopulaModel::new(marginals, sigma, data.label.clone())
}

/// Writes rows for consecutive days starting at `start`.
pub fn write_csv<W: Write>(out: W, start: NaiveDate, days: &[Vec<f64>]) -> Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "{}", CSV_HEADER.join(","))?;
    for (k, values) in days.iter().enumerate() {
        let date = start
            .checked_add_days(Days::new(k as u64))
            .ok_or_else(|| Error::InvalidParameter("date overflow".into()))?;
        for (id, v) in MetricId::all().zip(values) {
            writeln!(out, "{date},{id},{v}")?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Daily draws from `truth` written as a characterization CSV.
pub fn synth_generate(
    truth: &CopulaModel<f64>,
    days: usize,
    seed: u64,
    start: NaiveDate,
    path: impl AsRef<Path>,
) -> Result<()> {
    if truth.dim() != METRIC_COUNT {
        return Err(Error::DimensionMismatch { expected: METRIC_COUNT, actual: truth.dim() });
    }
    if days < MIN_EPOCH_DAYS {
        return Err(Error::InvalidParameter(format!("need at least {MIN_EPOCH_DAYS} days, got {days}")));
    }
    let rows: Vec<Vec<f64>> = truth.sample(days, seed).into_iter().map(|s| s.values).collect();
    write_csv(File::create(path)?, start, &rows)
}

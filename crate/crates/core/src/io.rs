//! CSV readers and writers for the data files exchanged with the command-line
//! tool. Writers format floats with `Display`, which round-trips exactly and
//! is deterministic; readers report the 1-based line of the first bad row.

use std::path::Path;

use crate::inference::{DetectionRecord, StateLabel};
use crate::motion::FockDistribution;
use crate::specfit::{RabiSample, RabiTrace, StarkDataPoint, TraceMeta};
use crate::stark::SpectrumRow;
use crate::{Error, Result};

pub const RABI_TRACE_HEADER: [&str; 3] = ["t_s", "p_excite", "n_shots"];
pub const DISTRIBUTION_HEADER: [&str; 2] = ["n", "probability"];
pub const STARK_POINTS_HEADER: [&str; 4] = ["frequency_hz", "intensity_w_m2", "stark_over_intensity", "sigma"];
pub const SPECTRUM_HEADER: [&str; 3] = ["frequency_hz", "bright_shift_hz", "other_shift_hz"];
pub const TIMETRACE_HEADER: [&str; 6] = ["attempt", "k", "n_used", "p_hat", "classification", "true_state"];
pub const HISTOGRAM_HEADER: [&str; 4] = ["bin_low", "bin_high", "bright", "dark"];

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Header plus one comma-joined line per row.
pub fn format_table<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.into_iter().collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

/// A parsed data row with its source line for error reporting.
pub struct Row<'a> {
    origin: &'a str,
    pub line: usize,
    fields: Vec<String>,
}

impl Row<'_> {
    pub fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.origin.to_string(),
            line: self.line,
            message: message.into(),
        }
    }

    pub fn str(&self, i: usize) -> &str {
        &self.fields[i]
    }

    pub fn f64(&self, i: usize, name: &str) -> Result<f64> {
        let v: f64 = self.fields[i]
            .parse()
            .map_err(|_| self.error(format!("field `{name}` is not a number: {:?}", self.fields[i])))?;
        if v.is_nan() {
            return Err(self.error(format!("field `{name}` is NaN")));
        }
        Ok(v)
    }

    /// Empty field reads as `None`.
    pub fn opt_f64(&self, i: usize, name: &str) -> Result<Option<f64>> {
        if self.fields[i].is_empty() {
            Ok(None)
        } else {
            self.f64(i, name).map(Some)
        }
    }

    pub fn uint<T: std::str::FromStr>(&self, i: usize, name: &str) -> Result<T> {
        self.fields[i]
            .parse()
            .map_err(|_| self.error(format!("field `{name}` is not a non-negative integer: {:?}", self.fields[i])))
    }
}

/// Reads a CSV body with the exact `header`; `#` lines are comments.
pub fn parse_table<'a>(text: &str, origin: &'a str, header: &[&str]) -> Result<Vec<Row<'a>>> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let got = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect::<Vec<_>>();
    if got != header {
        return Err(parse_err(1, format!("expected header `{}`, found `{}`", header.join(","), got.join(","))));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(parse_err(line, format!("expected {} fields, found {}", header.len(), record.len())));
        }
        rows.push(Row {
            origin,
            line,
            fields: record.iter().map(str::to_string).collect(),
        });
    }
    Ok(rows)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn rabi_trace_to_csv(trace: &RabiTrace) -> String {
    format_table(
        &RABI_TRACE_HEADER,
        trace
            .samples
            .iter()
            .map(|s| [s.t.to_string(), s.p_excite.to_string(), s.n_shots.to_string()]),
    )
}

pub fn parse_rabi_trace(text: &str, origin: &str, meta: TraceMeta) -> Result<RabiTrace> {
    let rows = parse_table(text, origin, &RABI_TRACE_HEADER)?;
    let mut samples = Vec::with_capacity(rows.len());
    for row in &rows {
        let s = RabiSample {
            t: row.f64(0, "t_s")?,
            p_excite: row.f64(1, "p_excite")?,
            n_shots: row.uint(2, "n_shots")?,
        };
        if !(0.0..=1.0).contains(&s.p_excite) {
            return Err(row.error(format!("p_excite {} outside [0, 1]", s.p_excite)));
        }
        if s.n_shots == 0 {
            return Err(row.error("n_shots must be at least 1"));
        }
        if let Some(prev) = samples.last().map(|p: &RabiSample| p.t) {
            if !(s.t > prev) {
                return Err(row.error(format!("t_s {} does not increase", s.t)));
            }
        }
        samples.push(s);
    }
    RabiTrace::new(samples, meta)
}

pub fn distribution_to_csv(dist: &FockDistribution) -> String {
    format_table(
        &DISTRIBUTION_HEADER,
        dist.probabilities()
            .iter()
            .enumerate()
            .map(|(n, p)| [n.to_string(), p.to_string()]),
    )
}

/// Probabilities indexed by n; rows must run 0, 1, 2, … in order.
pub fn parse_distribution(text: &str, origin: &str) -> Result<Vec<f64>> {
    let rows = parse_table(text, origin, &DISTRIBUTION_HEADER)?;
    let mut out = Vec::with_capacity(rows.len());
    for row in &rows {
        let n: usize = row.uint(0, "n")?;
        if n != out.len() {
            return Err(row.error(format!("expected n = {}, found {n}", out.len())));
        }
        out.push(row.f64(1, "probability")?);
    }
    Ok(out)
}

pub fn stark_points_to_csv(points: &[StarkDataPoint]) -> String {
    format_table(
        &STARK_POINTS_HEADER,
        points.iter().map(|p| {
            [
                p.frequency.to_string(),
                p.intensity.to_string(),
                p.stark_over_intensity.to_string(),
                p.sigma.to_string(),
            ]
        }),
    )
}

/// Detunings are taken relative to `reference_frequency`, or 0 without one.
pub fn parse_stark_points(text: &str, origin: &str, reference_frequency: Option<f64>) -> Result<Vec<StarkDataPoint>> {
    parse_table(text, origin, &STARK_POINTS_HEADER)?
        .iter()
        .map(|row| {
            let f = row.f64(0, "frequency_hz")?;
            let detuning = reference_frequency.map_or(0.0, |r| f - r);
            StarkDataPoint::new(
                f,
                detuning,
                row.f64(1, "intensity_w_m2")?,
                row.f64(2, "stark_over_intensity")?,
                row.f64(3, "sigma")?,
            )
            .map_err(|e| row.error(e.to_string()))
        })
        .collect()
}

pub fn spectrum_to_csv(rows: &[SpectrumRow]) -> String {
    format_table(
        &SPECTRUM_HEADER,
        rows.iter()
            .map(|r| [r.frequency.to_string(), opt(r.bright_shift), opt(r.other_shift)]),
    )
}

pub fn parse_spectrum(text: &str, origin: &str) -> Result<Vec<SpectrumRow>> {
    parse_table(text, origin, &SPECTRUM_HEADER)?
        .iter()
        .map(|row| {
            Ok(SpectrumRow {
                frequency: row.f64(0, "frequency_hz")?,
                bright_shift: row.opt_f64(1, "bright_shift_hz")?,
                other_shift: row.opt_f64(2, "other_shift_hz")?,
            })
        })
        .collect()
}

pub fn timetrace_to_csv(records: &[DetectionRecord]) -> String {
    format_table(
        &TIMETRACE_HEADER,
        records.iter().map(|r| {
            [
                r.attempt_index.to_string(),
                r.k_successes.to_string(),
                r.n_used.to_string(),
                if r.n_used == 0 { String::new() } else { r.p_hat.to_string() },
                r.classification.map(|c| c.as_str().to_string()).unwrap_or_default(),
                r.true_state.as_str().to_string(),
            ]
        }),
    )
}

pub fn parse_timetrace(text: &str, origin: &str) -> Result<Vec<DetectionRecord>> {
    parse_table(text, origin, &TIMETRACE_HEADER)?
        .iter()
        .map(|row| {
            let label = |i: usize| -> Result<Option<StateLabel>> {
                match row.str(i) {
                    "" => Ok(None),
                    s => s.parse().map(Some).map_err(|e: Error| row.error(e.to_string())),
                }
            };
            Ok(DetectionRecord {
                attempt_index: row.uint(0, "attempt")?,
                k_successes: row.uint(1, "k")?,
                n_used: row.uint(2, "n_used")?,
                p_hat: row.opt_f64(3, "p_hat")?.unwrap_or(f64::NAN),
                classification: label(4)?,
                true_state: label(5)?.ok_or_else(|| row.error("true_state is empty"))?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistogramBin {
    pub low_index: usize,
    pub bright: usize,
    pub dark: usize,
}

/// Counts of p̂ in `n_bins` equal bins over [0, 1], split by classification.
/// p̂ = 1 falls in the last bin; indeterminate attempts are skipped.
pub fn p_hat_histogram(records: &[DetectionRecord], n_bins: usize) -> Result<Vec<HistogramBin>> {
    if n_bins == 0 {
        return Err(Error::domain("histogram needs at least one bin"));
    }
    let mut bins: Vec<HistogramBin> = (0..n_bins)
        .map(|i| HistogramBin {
            low_index: i,
            bright: 0,
            dark: 0,
        })
        .collect();
    for r in records {
        let Some(c) = r.classification else { continue };
        let i = ((r.p_hat * n_bins as f64) as usize).min(n_bins - 1);
        match c {
            StateLabel::Bright => bins[i].bright += 1,
            StateLabel::Dark => bins[i].dark += 1,
        }
    }
    Ok(bins)
}

pub fn histogram_to_csv(bins: &[HistogramBin]) -> String {
    let n = bins.len() as f64;
    format_table(
        &HISTOGRAM_HEADER,
        bins.iter().map(|b| {
            [
                (b.low_index as f64 / n).to_string(),
                ((b.low_index + 1) as f64 / n).to_string(),
                b.bright.to_string(),
                b.dark.to_string(),
            ]
        }),
    )
}

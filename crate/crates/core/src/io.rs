//! Text formats: grid specs, kind lists, and the CSV/JSON tables written by
//! the CLI.
//!
//! CSV output always has a header row, uses `.` as the decimal separator and
//! writes every float at 15 significant digits. Each writer has a matching
//! reader that recovers the record type.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calibrate::{Calibration, LengthRatioRow};
use crate::intervals::{Diagnostic, Interval, IntervalKind, IntervalRecord};
use crate::montecarlo::{KindStats, KindSummary, StudyRow, STUDY_KINDS};
use crate::{Error, Result};

/// Significant digits used for floats in CSV.
pub const CSV_DIGITS: usize = 15;

/// Rounds to [`CSV_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", CSV_DIGITS - 1, x)
        .parse()
        .ok()
        .filter(|r: &f64| r.is_finite())
        .unwrap_or(x)
}

/// Shortest decimal text of `round_sig(x)`; never uses an exponent.
pub fn fmt_sig(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        "0".to_string()
    } else {
        r.to_string()
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

fn parse_f64(field: &str, what: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{what}: not a number: {field:?}")))
}

fn parse_opt(field: &str, what: &str) -> Result<Option<f64>> {
    if field.trim().is_empty() {
        Ok(None)
    } else {
        parse_f64(field, what).map(Some)
    }
}

fn parse_count<T: FromStr>(field: &str, what: &str) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{what}: not a count: {field:?}")))
}

fn parse_bool(field: &str, what: &str) -> Result<bool> {
    match field.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::Parse(format!(
            "{what}: expected true or false, got {other:?}"
        ))),
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

fn io_err(e: std::io::Error) -> Error {
    Error::Parse(format!("write failed: {e}"))
}

/// A closed grid `start:stop:count`, or a single value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn single(value: f64) -> Self {
        GridSpec {
            start: value,
            stop: value,
            count: 1,
        }
    }

    /// Equally spaced values; the last one is exactly `stop`.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + i as f64 * step
                }
            })
            .collect()
    }
}

/// Largest accepted grid.
pub const MAX_GRID: usize = 1_000_000;

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let number = |p: &str| -> Result<f64> {
            let v = parse_f64(p, "grid")?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse(format!("grid: non-finite value {p:?}")))
            }
        };
        match parts.as_slice() {
            [v] => Ok(GridSpec::single(number(v)?)),
            [a, b, n] => {
                let (start, stop) = (number(a)?, number(b)?);
                let count: usize = parse_count(n, "grid")?;
                if count == 0 || count > MAX_GRID {
                    return Err(Error::Parse(format!(
                        "grid: count must be in 1..={MAX_GRID}, got {count}"
                    )));
                }
                if count == 1 && start != stop {
                    return Err(Error::Parse(
                        "grid: a single point needs start = stop".into(),
                    ));
                }
                Ok(GridSpec { start, stop, count })
            }
            _ => Err(Error::Parse(format!(
                "grid: expected start:stop:count or a number, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.count == 1 {
            write!(f, "{}", fmt_sig(self.start))
        } else {
            write!(
                f,
                "{}:{}:{}",
                fmt_sig(self.start),
                fmt_sig(self.stop),
                self.count
            )
        }
    }
}

/// Comma-separated interval kinds, case-insensitive, duplicates dropped,
/// order kept.
pub fn parse_kind_list(s: &str) -> Result<Vec<IntervalKind>> {
    let mut kinds = Vec::new();
    for part in s.split(',') {
        if part.trim().is_empty() {
            return Err(Error::Parse(format!("empty entry in kind list {s:?}")));
        }
        let k: IntervalKind = part.parse()?;
        if !kinds.contains(&k) {
            kinds.push(k);
        }
    }
    Ok(kinds)
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(io_err)
}

/// Rows of a headed CSV table, with the header checked against `expected`.
fn records<R: Read>(input: R, expected: &[String]) -> Result<Vec<csv::StringRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header
        .iter()
        .map(str::trim)
        .ne(expected.iter().map(String::as_str))
    {
        return Err(Error::Parse(format!(
            "unexpected header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    rdr.records().map(|r| r.map_err(csv_err)).collect()
}

fn owned(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Whether a coverage row is a grid point or the refined worst case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CpRowKind {
    Grid,
    WorstCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpRow {
    pub row: CpRowKind,
    pub t: f64,
    pub cp: f64,
}

const CP_HEADER: [&str; 3] = ["row", "t", "cp"];

pub fn write_cp_csv<W: Write>(out: W, rows: &[CpRow]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(CP_HEADER).map_err(csv_err)?;
    for r in rows {
        let tag = match r.row {
            CpRowKind::Grid => "grid",
            CpRowKind::WorstCase => "worst_case",
        };
        w.write_record([tag.to_string(), fmt_sig(r.t), fmt_sig(r.cp)])
            .map_err(csv_err)?;
    }
    finish(w)
}

pub fn read_cp_csv<R: Read>(input: R) -> Result<Vec<CpRow>> {
    records(input, &owned(&CP_HEADER))?
        .iter()
        .map(|r| {
            let row = match r[0].trim() {
                "grid" => CpRowKind::Grid,
                "worst_case" => CpRowKind::WorstCase,
                other => return Err(Error::Parse(format!("unknown row tag {other:?}"))),
            };
            Ok(CpRow {
                row,
                t: parse_f64(&r[1], "t")?,
                cp: parse_f64(&r[2], "cp")?,
            })
        })
        .collect()
}

const LENGTH_HEADER: [&str; 4] = ["s2_over_s1", "rho", "ratio_ci5", "ratio_ci6"];

pub fn write_lengths_csv<W: Write>(out: W, rows: &[LengthRatioRow]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(LENGTH_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            fmt_sig(r.s2_over_s1),
            fmt_opt(r.rho),
            fmt_sig(r.ratio_ci5),
            fmt_opt(r.ratio_ci6),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn read_lengths_csv<R: Read>(input: R) -> Result<Vec<LengthRatioRow>> {
    records(input, &owned(&LENGTH_HEADER))?
        .iter()
        .map(|r| {
            Ok(LengthRatioRow {
                s2_over_s1: parse_f64(&r[0], "s2_over_s1")?,
                rho: parse_opt(&r[1], "rho")?,
                ratio_ci5: parse_f64(&r[2], "ratio_ci5")?,
                ratio_ci6: parse_opt(&r[3], "ratio_ci6")?,
            })
        })
        .collect()
}

const INTERVAL_HEADER: [&str; 7] = [
    "kind",
    "level",
    "center",
    "lower",
    "upper",
    "half_width",
    "diagnostics",
];

fn diagnostic_name(d: Diagnostic) -> String {
    match serde_json::to_value(d) {
        Ok(serde_json::Value::String(s)) => s,
        _ => unreachable!("diagnostics serialize as strings"),
    }
}

fn parse_diagnostics(field: &str) -> Result<Vec<Diagnostic>> {
    field
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            serde_json::from_value(serde_json::Value::String(s.to_string()))
                .map_err(|_| Error::Parse(format!("unknown diagnostic {s:?}")))
        })
        .collect()
}

/// Intervals without their calibration metadata; use JSON to keep it.
pub fn write_intervals_csv<W: Write>(out: W, intervals: &[Interval]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(INTERVAL_HEADER).map_err(csv_err)?;
    for iv in intervals {
        let diags: Vec<String> = iv.diagnostics.iter().map(|&d| diagnostic_name(d)).collect();
        w.write_record([
            iv.kind.to_string(),
            fmt_sig(iv.level),
            fmt_sig(iv.center),
            fmt_sig(iv.lower()),
            fmt_sig(iv.upper()),
            fmt_sig(iv.half_width),
            diags.join(";"),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn read_intervals_csv<R: Read>(input: R) -> Result<Vec<Interval>> {
    records(input, &owned(&INTERVAL_HEADER))?
        .iter()
        .map(|r| {
            Interval::try_from(IntervalRecord {
                kind: r[0].parse()?,
                level: parse_f64(&r[1], "level")?,
                center: parse_f64(&r[2], "center")?,
                lower: parse_f64(&r[3], "lower")?,
                upper: parse_f64(&r[4], "upper")?,
                half_width: parse_f64(&r[5], "half_width")?,
                diagnostics: parse_diagnostics(&r[6])?,
                calibration: None,
            })
        })
        .collect()
}

pub fn intervals_json(intervals: &[Interval]) -> Result<String> {
    serde_json::to_string_pretty(intervals).map_err(|e| Error::Parse(format!("interval json: {e}")))
}

/// Accepts a single interval object or an array of them.
pub fn parse_intervals_json(text: &str) -> Result<Vec<Interval>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(Interval),
        Many(Vec<Interval>),
    }
    match serde_json::from_str(text) {
        Ok(OneOrMany::One(iv)) => Ok(vec![iv]),
        Ok(OneOrMany::Many(v)) => Ok(v),
        Err(e) => Err(Error::Parse(format!("interval json: {e}"))),
    }
}

const CALIBRATION_HEADER: [&str; 9] = [
    "z_tilde",
    "z_standard",
    "length_ratio",
    "level",
    "s2_over_s1",
    "rho",
    "w",
    "bias_bound_over_s1",
    "degenerate",
];

pub fn write_calibration_csv<W: Write>(out: W, cals: &[Calibration]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(CALIBRATION_HEADER).map_err(csv_err)?;
    for c in cals {
        w.write_record([
            fmt_sig(c.z_tilde),
            fmt_sig(c.z_standard),
            fmt_sig(c.length_ratio()),
            fmt_sig(c.level),
            fmt_sig(c.s2_over_s1),
            fmt_opt(c.rho),
            fmt_sig(c.w),
            fmt_sig(c.bias_bound_over_s1),
            c.degenerate.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn read_calibration_csv<R: Read>(input: R) -> Result<Vec<Calibration>> {
    records(input, &owned(&CALIBRATION_HEADER))?
        .iter()
        .map(|r| {
            Ok(Calibration {
                z_tilde: parse_f64(&r[0], "z_tilde")?,
                z_standard: parse_f64(&r[1], "z_standard")?,
                level: parse_f64(&r[3], "level")?,
                s2_over_s1: parse_f64(&r[4], "s2_over_s1")?,
                rho: parse_opt(&r[5], "rho")?,
                w: parse_f64(&r[6], "w")?,
                bias_bound_over_s1: parse_f64(&r[7], "bias_bound_over_s1")?,
                degenerate: parse_bool(&r[8], "degenerate")?,
            })
        })
        .collect()
}

const SIMULATION_HEADER: [&str; 5] = ["kind", "coverage", "mc_stderr", "median_length", "covered"];

pub fn write_simulation_csv<W: Write>(out: W, summaries: &[KindSummary]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(SIMULATION_HEADER).map_err(csv_err)?;
    for s in summaries {
        w.write_record([
            s.kind.to_string(),
            fmt_sig(s.coverage),
            fmt_sig(s.mc_stderr),
            fmt_sig(s.median_length),
            s.covered.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn read_simulation_csv<R: Read>(input: R) -> Result<Vec<KindSummary>> {
    records(input, &owned(&SIMULATION_HEADER))?
        .iter()
        .map(|r| {
            Ok(KindSummary {
                kind: r[0].parse()?,
                coverage: parse_f64(&r[1], "coverage")?,
                mc_stderr: parse_f64(&r[2], "mc_stderr")?,
                median_length: parse_f64(&r[3], "median_length")?,
                covered: parse_count(&r[4], "covered")?,
            })
        })
        .collect()
}

const STUDY_METRICS: [&str; 3] = ["cp", "median_length", "mc_stderr"];

/// `n, level, tau_or_tag`, then `<kind>_<metric>` for each study kind,
/// then `clip_rate, sim_reps`.
pub fn study_header() -> Vec<String> {
    let mut h = owned(&["n", "level", "tau_or_tag"]);
    for k in STUDY_KINDS {
        for m in STUDY_METRICS {
            h.push(format!("{k}_{m}"));
        }
    }
    h.push("clip_rate".into());
    h.push("sim_reps".into());
    h
}

pub fn write_study_csv<W: Write>(out: W, rows: &[StudyRow]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(study_header()).map_err(csv_err)?;
    for r in rows {
        if r.stats.len() != STUDY_KINDS.len() {
            return Err(Error::domain(format!(
                "study row has {} kinds, expected {}",
                r.stats.len(),
                STUDY_KINDS.len()
            )));
        }
        let mut rec = vec![r.n.to_string(), fmt_sig(r.level), r.tag.clone()];
        for s in &r.stats {
            rec.extend([
                fmt_sig(s.coverage),
                fmt_sig(s.median_length),
                fmt_sig(s.mc_stderr),
            ]);
        }
        rec.push(fmt_sig(r.clip_rate));
        rec.push(r.sim_reps.to_string());
        w.write_record(rec).map_err(csv_err)?;
    }
    finish(w)
}

pub fn read_study_csv<R: Read>(input: R) -> Result<Vec<StudyRow>> {
    records(input, &study_header())?
        .iter()
        .map(|r| {
            let stats = (0..STUDY_KINDS.len())
                .map(|k| {
                    let base = 3 + 3 * k;
                    Ok(KindStats {
                        coverage: parse_f64(&r[base], "cp")?,
                        median_length: parse_f64(&r[base + 1], "median_length")?,
                        mc_stderr: parse_f64(&r[base + 2], "mc_stderr")?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let tail = 3 + 3 * STUDY_KINDS.len();
            Ok(StudyRow {
                n: parse_count(&r[0], "n")?,
                level: parse_f64(&r[1], "level")?,
                tag: r[2].to_string(),
                stats,
                clip_rate: parse_f64(&r[tail], "clip_rate")?,
                sim_reps: parse_count(&r[tail + 1], "sim_reps")?,
            })
        })
        .collect()
}

/// JSON mirror of the study table.
pub fn study_json(rows: &[StudyRow]) -> Result<String> {
    serde_json::to_string_pretty(rows).map_err(|e| Error::Parse(format!("study json: {e}")))
}

pub fn parse_study_json(text: &str) -> Result<Vec<StudyRow>> {
    let rows: Vec<StudyRow> =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("study json: {e}")))?;
    if let Some(bad) = rows.iter().find(|r| r.stats.len() != STUDY_KINDS.len()) {
        return Err(Error::Parse(format!(
            "study row with {} kinds",
            bad.stats.len()
        )));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibrate::{calibrated_z, length_ratio_table, optimal_w};
    use crate::intervals::{ci1, ci4, ci5, ci6, MsePolicy};
    use proptest::prelude::*;

    fn csv_string<F: FnOnce(&mut Vec<u8>) -> Result<()>>(f: F) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_sig(0.1), "0.1");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(-0.0), "0");
        assert_eq!(fmt_sig(1.959963984540054), "1.95996398454005");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333333");
        assert!(!fmt_sig(1e-20).contains('e'));
        assert!(!fmt_sig(1e-20).contains(','));
        assert_eq!(fmt_sig(f64::MAX).parse::<f64>().unwrap(), f64::MAX);
    }

    #[test]
    fn grid_specs() {
        let g: GridSpec = "0:1:5".parse().unwrap();
        assert_eq!(g.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g: GridSpec = " 0.1:1:10 ".parse().unwrap();
        assert_eq!(g.values().len(), 10);
        assert_eq!(*g.values().last().unwrap(), 1.0);
        assert_eq!("0.5".parse::<GridSpec>().unwrap().values(), vec![0.5]);
        assert_eq!("2:2:1".parse::<GridSpec>().unwrap().values(), vec![2.0]);
        for bad in [
            "", "1:2", "1:2:0", "1:2:1", "a:1:2", "1:2:x", "0:1:2:3", "nan", "0:inf:3", "0:1:-2",
        ] {
            assert!(bad.parse::<GridSpec>().is_err(), "{bad}");
        }
        let g: GridSpec = "0.1:0.9:9".parse().unwrap();
        assert_eq!(g.to_string().parse::<GridSpec>().unwrap(), g);
    }

    #[test]
    fn kind_lists() {
        use IntervalKind::*;
        assert_eq!(parse_kind_list("CI1,ci2").unwrap(), vec![CI1, CI2]);
        assert_eq!(parse_kind_list("CI6s, CI6,CI6S").unwrap(), vec![CI6S, CI6]);
        assert!(parse_kind_list("").is_err());
        assert!(parse_kind_list("CI1,,CI2").is_err());
        assert!(parse_kind_list("CI7").is_err());
    }

    #[test]
    fn cp_table_round_trip() {
        let rows = vec![
            CpRow {
                row: CpRowKind::Grid,
                t: 0.0,
                cp: 0.6826894921370859,
            },
            CpRow {
                row: CpRowKind::Grid,
                t: std::f64::consts::FRAC_PI_2,
                cp: 1.0,
            },
            CpRow {
                row: CpRowKind::WorstCase,
                t: 0.3586,
                cp: 0.8999527,
            },
        ];
        let text = csv_string(|b| write_cp_csv(b, &rows));
        assert!(text.starts_with("row,t,cp\n"));
        assert!(text.ends_with('\n'));
        let back = read_cp_csv(text.as_bytes()).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(a.row, b.row);
            assert_eq!(round_sig(a.t), b.t);
            assert_eq!(round_sig(a.cp), b.cp);
        }
    }

    #[test]
    fn lengths_round_trip() {
        let rows = length_ratio_table(0.95, &[0.1, 0.5, 1.0], Some(&[0.1, 0.5])).unwrap();
        let text = csv_string(|b| write_lengths_csv(b, &rows));
        let back = read_lengths_csv(text.as_bytes()).unwrap();
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(round_sig(a.ratio_ci5), b.ratio_ci5);
            assert_eq!(a.ratio_ci6.map(round_sig), b.ratio_ci6);
            assert_eq!(a.rho, b.rho);
        }
        let rows = length_ratio_table(0.95, &[0.3], None).unwrap();
        let text = csv_string(|b| write_lengths_csv(b, &rows));
        assert_eq!(
            read_lengths_csv(text.as_bytes()).unwrap()[0].ratio_ci6,
            None
        );
    }

    #[test]
    fn intervals_round_trip() {
        let ivs = vec![
            ci1(0.3, 1.0, 0.95).unwrap(),
            ci4(1.0, 0.0, 0.9).unwrap(),
            ci5(0.0, 1.0, 1.3, 0.95, MsePolicy::Clip).unwrap(),
            ci6(0.1, 0.2, 1.0, 0.6, 0.4, 0.95, true, MsePolicy::Strict).unwrap(),
        ];
        let text = csv_string(|b| write_intervals_csv(b, &ivs));
        let back = read_intervals_csv(text.as_bytes()).unwrap();
        for (a, b) in ivs.iter().zip(&back) {
            assert_eq!(a.kind, b.kind);
            assert_eq!(a.diagnostics, b.diagnostics);
            assert_eq!(round_sig(a.center), b.center);
            assert_eq!(round_sig(a.half_width), b.half_width);
        }
        let json = intervals_json(&ivs).unwrap();
        assert_eq!(parse_intervals_json(&json).unwrap(), ivs);
        let one = serde_json::to_string(&ivs[0]).unwrap();
        assert_eq!(parse_intervals_json(&one).unwrap(), vec![ivs[0].clone()]);
        assert!(parse_intervals_json("{\"kind\":\"CI1\"}").is_err());
        let huge = r#"{"kind":"CI1","level":0.9,"center":1e308,"lower":0,"upper":1e308,"half_width":1e308}"#;
        assert!(parse_intervals_json(huge).is_err());
    }

    #[test]
    fn calibration_round_trip() {
        let cals = vec![
            calibrated_z(1.0, 0.5, 0.95).unwrap(),
            calibrated_z(1.0, 0.0, 0.95).unwrap(),
            optimal_w(1.0, 1.0, 0.1, 0.95).unwrap().calibration,
        ];
        let text = csv_string(|b| write_calibration_csv(b, &cals));
        let back = read_calibration_csv(text.as_bytes()).unwrap();
        for (a, b) in cals.iter().zip(&back) {
            assert_eq!(round_sig(a.z_tilde), b.z_tilde);
            assert_eq!(a.rho.map(round_sig), b.rho);
            assert_eq!(a.degenerate, b.degenerate);
        }
    }

    fn study_rows() -> Vec<StudyRow> {
        let stats = |c: f64| KindStats {
            coverage: c,
            mc_stderr: (c * (1.0 - c) / 500.0).sqrt(),
            median_length: 1.0 / 3.0 + c,
        };
        vec![
            StudyRow {
                n: 100,
                level: 0.95,
                tag: "demo".into(),
                sim_reps: 500,
                stats: vec![
                    stats(0.95),
                    stats(0.99),
                    stats(0.958),
                    stats(0.944),
                    stats(0.93),
                ],
                clip_rate: 0.002,
            },
            StudyRow {
                n: 200,
                level: 0.9,
                tag: "demo".into(),
                sim_reps: 500,
                stats: vec![
                    stats(0.9),
                    stats(0.97),
                    stats(0.91),
                    stats(0.9),
                    stats(0.88),
                ],
                clip_rate: 0.0,
            },
        ]
    }

    #[test]
    fn study_table_round_trip() {
        let rows = study_rows();
        let text = csv_string(|b| write_study_csv(b, &rows));
        let header = text.lines().next().unwrap();
        assert!(
            header.starts_with("n,level,tau_or_tag,CI1_cp,CI1_median_length,CI1_mc_stderr,CI2_cp")
        );
        assert!(header.contains("CI6s_cp"));
        let back = read_study_csv(text.as_bytes()).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!((a.n, &a.tag, a.sim_reps), (b.n, &b.tag, b.sim_reps));
            for (x, y) in a.stats.iter().zip(&b.stats) {
                assert_eq!(round_sig(x.coverage), y.coverage);
                assert_eq!(round_sig(x.median_length), y.median_length);
                assert_eq!(round_sig(x.mc_stderr), y.mc_stderr);
            }
        }
        assert_eq!(parse_study_json(&study_json(&rows).unwrap()).unwrap(), rows);
        assert!(read_study_csv("n,level\n1,0.9\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn sig_round_trip_is_lossless(x in prop::num::f64::NORMAL) {
            let text = fmt_sig(x);
            let back: f64 = text.parse().unwrap();
            prop_assert_eq!(back, round_sig(x));
            prop_assert!(((back - x) / x).abs() <= 5e-15);
        }

        #[test]
        fn simulation_csv_round_trip(cov in 0.0f64..=1.0, len in 0.0f64..1e6, hits in 0u64..1_000_000) {
            let s = vec![KindSummary { kind: IntervalKind::CI5, coverage: cov, mc_stderr: cov * (1.0 - cov), median_length: len, covered: hits }];
            let text = csv_string(|b| write_simulation_csv(b, &s));
            let back = read_simulation_csv(text.as_bytes()).unwrap();
            prop_assert_eq!(back[0].covered, hits);
            prop_assert_eq!(back[0].coverage, round_sig(cov));
            prop_assert_eq!(back[0].median_length, round_sig(len));
        }
    }
}

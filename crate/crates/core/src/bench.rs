//! Benchmark summaries and convergence-trace files.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{Status, TraceRecord};

pub const SGM_SHIFT: f64 = 10.0;

pub const TRACE_HEADER: [&str; 9] = ["k", "r", "t", "sigma", "rel_gap", "rel_primal", "rel_dual", "merit", "seconds"];

/// Shifted geometric mean `(prod (t_i + shift))^(1/n) - shift`, evaluated
/// in log space.
pub fn sgm10(times: &[f64], shift: f64) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::Empty("sgm10 needs at least one time"));
    }
    if let Some(bad) = times.iter().find(|&&t| !(t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidConfig(format!("times must be finite and nonnegative, got {bad}")));
    }
    if !(shift > 0.0 && shift.is_finite()) {
        return Err(Error::InvalidConfig(format!("shift must be positive, got {shift}")));
    }
    let mean_log = times.iter().map(|t| (t + shift).ln()).sum::<f64>() / times.len() as f64;
    Ok(mean_log.exp() - shift)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance: String,
    pub mode: String,
    pub status: Status,
    pub iterations: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: String,
    pub sgm10: f64,
    pub solved: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    /// Sorted by mode, then instance name.
    pub rows: Vec<BenchRow>,
    pub summaries: Vec<ModeSummary>,
    pub time_limit: f64,
}

impl BenchReport {
    /// Unsolved instances are charged `time_limit` seconds in the SGM10.
    pub fn from_rows(mut rows: Vec<BenchRow>, time_limit: f64) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("benchmark produced no rows"));
        }
        rows.sort_by(|a, b| (&a.mode, &a.instance).cmp(&(&b.mode, &b.instance)));
        let mut summaries = Vec::new();
        for chunk in rows.chunk_by(|a, b| a.mode == b.mode) {
            let charged: Vec<f64> = chunk
                .iter()
                .map(|r| if r.status == Status::Optimal { r.seconds.min(time_limit) } else { time_limit })
                .collect();
            summaries.push(ModeSummary {
                mode: chunk[0].mode.clone(),
                sgm10: sgm10(&charged, SGM_SHIFT)?,
                solved: chunk.iter().filter(|r| r.status == Status::Optimal).count(),
                total: chunk.len(),
            });
        }
        Ok(Self {
            rows,
            summaries,
            time_limit,
        })
    }

    pub fn write_rows_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["instance", "mode", "status", "iterations", "seconds"])?;
        for r in &self.rows {
            w.write_record([
                r.instance.clone(),
                r.mode.clone(),
                r.status.as_str().to_string(),
                r.iterations.to_string(),
                format!("{:.6}", r.seconds),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Plain-text table: one line per mode.
    pub fn summary_table(&self) -> String {
        let mut s = format!("{:<12} {:>10} {:>8}\n", "mode", "SGM10(s)", "solved");
        for m in &self.summaries {
            s.push_str(&format!("{:<12} {:>10.3} {:>4}/{:<3}\n", m.mode, m.sgm10, m.solved, m.total));
        }
        s
    }
}

fn real(v: f64) -> String {
    format!("{v:e}")
}

pub fn write_trace_csv<W: Write>(records: &[TraceRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in records {
        w.write_record([
            r.k.to_string(),
            r.r.to_string(),
            r.t.to_string(),
            real(r.sigma),
            real(r.rel_gap),
            real(r.rel_primal),
            real(r.rel_dual),
            real(r.merit),
            real(r.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<TraceRecord>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(Error::MalformedTrace(format!(
            "expected header `{}`, found `{}`",
            TRACE_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let int = |idx: usize| -> Result<usize> {
            rec[idx]
                .trim()
                .parse()
                .map_err(|_| Error::MalformedTrace(format!("line {line}: bad {} `{}`", TRACE_HEADER[idx], &rec[idx])))
        };
        let float = |idx: usize| -> Result<f64> {
            rec[idx]
                .trim()
                .parse()
                .map_err(|_| Error::MalformedTrace(format!("line {line}: bad {} `{}`", TRACE_HEADER[idx], &rec[idx])))
        };
        out.push(TraceRecord {
            k: int(0)?,
            r: int(1)?,
            t: int(2)?,
            sigma: float(3)?,
            rel_gap: float(4)?,
            rel_primal: float(5)?,
            rel_dual: float(6)?,
            merit: float(7)?,
            seconds: float(8)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotPoint {
    pub k: usize,
    pub series: String,
    pub value: f64,
}

const PLOTTED: [(&str, fn(&TraceRecord) -> f64); 5] = [
    ("rel_gap", |r| r.rel_gap),
    ("rel_primal", |r| r.rel_primal),
    ("rel_dual", |r| r.rel_dual),
    ("merit", |r| r.merit),
    ("sigma", |r| r.sigma),
];

/// Long-format series for plotting. Each trace is `(label, records)`; with a
/// label the series are named `label/quantity`.
pub fn plot_data(traces: &[(Option<String>, Vec<TraceRecord>)]) -> Result<Vec<PlotPoint>> {
    let mut out = Vec::new();
    for (label, records) in traces {
        if records.is_empty() {
            return Err(Error::MalformedTrace(format!(
                "trace{} has no records",
                label.as_ref().map(|l| format!(" `{l}`")).unwrap_or_default()
            )));
        }
        for (name, get) in PLOTTED {
            let series = match label {
                Some(l) => format!("{l}/{name}"),
                None => name.to_string(),
            };
            out.extend(records.iter().map(|r| PlotPoint {
                k: r.k,
                series: series.clone(),
                value: get(r),
            }));
        }
    }
    Ok(out)
}

pub fn write_plot_csv<W: Write>(points: &[PlotPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "series", "value"])?;
    for p in points {
        w.write_record([p.k.to_string(), p.series.clone(), real(p.value)])?;
    }
    w.flush()?;
    Ok(())
}

//! Trace files: one JSON object per generation, a CSV mirror for plotting and
//! a `segments.json` companion in the same directory.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::drift::{classify_phases, DriftCurves, PhaseConfig};
use crate::error::{Error, Result};
use crate::taxonomy::PatternSegment;
use crate::types::{MetricTrace, PhaseLabel, TraceRow};

/// One line of a JSON-lines trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub n: usize,
    pub fid_local: Option<f64>,
    pub fid_cumulative: f64,
    pub sigma_intra: Option<f64>,
    pub m_lb: f64,
    pub pr_g: f64,
    pub phase: Option<PhaseLabel>,
}

impl TraceRecord {
    fn row(&self) -> TraceRow {
        TraceRow {
            n: self.n,
            fid_local: self.fid_local,
            fid_cumulative: self.fid_cumulative,
            sigma_intra: self.sigma_intra,
            m_lb: self.m_lb,
            pr_g: self.pr_g,
        }
    }
}

/// Drift curves read straight off a trace.
pub fn drift_curves_of(trace: &MetricTrace) -> DriftCurves {
    DriftCurves {
        local: trace
            .rows()
            .iter()
            .filter_map(|r| r.fid_local.map(|f| (r.n, f)))
            .collect(),
        cumulative: trace.rows().iter().map(|r| (r.n, r.fid_cumulative)).collect(),
    }
}

/// Phase labels for a trace, or none when it is shorter than the window.
pub fn trace_phases(trace: &MetricTrace, config: &PhaseConfig) -> Result<Vec<(usize, PhaseLabel)>> {
    match classify_phases(&drift_curves_of(trace), config) {
        Err(Error::WindowTooLarge { .. }) => Ok(Vec::new()),
        other => other,
    }
}

/// `segments.json` next to the trace file.
pub fn segments_path(trace_path: &Path) -> PathBuf {
    trace_path.with_file_name("segments.json")
}

fn records<'a>(trace: &'a MetricTrace, phases: &'a [(usize, PhaseLabel)]) -> impl Iterator<Item = TraceRecord> + 'a {
    trace.rows().iter().map(move |r| TraceRecord {
        n: r.n,
        fid_local: r.fid_local,
        fid_cumulative: r.fid_cumulative,
        sigma_intra: r.sigma_intra,
        m_lb: r.m_lb,
        pr_g: r.pr_g,
        phase: phases.iter().find(|(n, _)| *n == r.n).map(|p| p.1),
    })
}

/// Writes `path` as JSON lines, `path` with a `.csv` extension as the mirror,
/// and `segments.json` beside them.
pub fn write_trace(
    trace: &MetricTrace,
    phases: &[(usize, PhaseLabel)],
    segments: &[PatternSegment],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
    }
    let mut out = BufWriter::new(File::create(path).map_err(Error::io(path))?);
    for rec in records(trace, phases) {
        serde_json::to_writer(&mut out, &rec).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e.into(),
        })?;
        out.write_all(b"\n").map_err(Error::io(path))?;
    }
    out.flush().map_err(Error::io(path))?;

    let csv_path = path.with_extension("csv");
    let csv_err = |e: csv::Error| Error::Io {
        path: csv_path.clone(),
        source: e.into(),
    };
    let mut w = csv::Writer::from_path(&csv_path).map_err(csv_err)?;
    for rec in records(trace, phases) {
        w.serialize(rec).map_err(csv_err)?;
    }
    w.flush().map_err(Error::io(&csv_path))?;

    let seg_path = segments_path(path);
    let text = serde_json::to_string_pretty(segments).map_err(|e| Error::Io {
        path: seg_path.clone(),
        source: e.into(),
    })?;
    std::fs::write(&seg_path, text + "\n").map_err(Error::io(&seg_path))
}

/// Reads a JSON-lines trace back, with the phase column.
pub fn read_trace(path: impl AsRef<Path>) -> Result<(MetricTrace, Vec<(usize, PhaseLabel)>)> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path).map_err(Error::io(path))?);
    let mut trace = MetricTrace::new();
    let mut phases = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(Error::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let location = || format!("{}:{}", path.display(), i + 1);
        let rec: TraceRecord = serde_json::from_str(&line).map_err(|e| Error::Format {
            location: location(),
            message: e.to_string(),
        })?;
        trace.push(rec.row()).map_err(|e| Error::Format {
            location: location(),
            message: e.to_string(),
        })?;
        if let Some(p) = rec.phase {
            phases.push((rec.n, p));
        }
    }
    if trace.is_empty() {
        return Err(Error::Format {
            location: path.display().to_string(),
            message: "trace file has no records".into(),
        });
    }
    Ok((trace, phases))
}

//! Report files. Every aggregate is computed from the per-iteration table so
//! that re-summarizing a stored table reproduces the original files exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evaluation::{boxplot_stats, confidence_interval, EvalReport};

pub const ITERATIONS_HEADER: &str = "method,iteration,metric,value";
pub const SUMMARY_HEADER: &str = "method,metric,n,mean,ci_level,ci_lo,ci_hi";
pub const BOXPLOT_HEADER: &str = "method,metric,min,q1,median,q3,max,outliers";
const MISSING: &str = "NA";

/// 17 significant digits; enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        // fold -0 into 0 so sign noise never changes the bytes
        return format!("{:.16e}", 0.0);
    }
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Ate,
    Tte,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Ate, Metric::Tte];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Ate => "ate",
            Metric::Tte => "tte",
        }
    }

    fn parse(s: &str) -> Option<Metric> {
        match s {
            "ate" => Some(Metric::Ate),
            "tte" => Some(Metric::Tte),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRow {
    pub method: String,
    pub iteration: usize,
    pub metric: Metric,
    /// `None` for a failed cell.
    pub value: Option<f64>,
}

pub fn iteration_rows(report: &EvalReport) -> Vec<IterationRow> {
    let mut rows = Vec::new();
    for m in &report.methods {
        for metric in Metric::ALL {
            for (i, cell) in m.iterations.iter().enumerate() {
                let value = cell.map(|c| match metric {
                    Metric::Ate => c.ate,
                    Metric::Tte => c.tte,
                });
                rows.push(IterationRow { method: m.method_id.clone(), iteration: i, metric, value });
            }
        }
    }
    rows
}

pub fn iterations_csv(rows: &[IterationRow]) -> String {
    let mut out = format!("{ITERATIONS_HEADER}\n");
    for r in rows {
        let v = r.value.map_or_else(|| MISSING.to_string(), fmt_f64);
        writeln!(out, "{},{},{},{}", r.method, r.iteration, r.metric.name(), v).unwrap();
    }
    out
}

pub fn parse_iterations(path: &Path, text: &str) -> Result<Vec<IterationRow>> {
    let bad = |line: usize, reason: String| Error::Csv { path: path.to_path_buf(), reason: format!("line {line}: {reason}") };
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == ITERATIONS_HEADER => {}
        Some(h) => return Err(bad(1, format!("expected header `{ITERATIONS_HEADER}`, got `{h}`"))),
        None => return Err(bad(1, "empty file".into())),
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let line_no = k + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != 4 {
            return Err(bad(line_no, format!("expected 4 fields, got {}", fields.len())));
        }
        if fields[0].is_empty() {
            return Err(bad(line_no, "empty method".into()));
        }
        let iteration = fields[1].parse().map_err(|_| bad(line_no, format!("bad iteration `{}`", fields[1])))?;
        let metric = Metric::parse(fields[2]).ok_or_else(|| bad(line_no, format!("unknown metric `{}`", fields[2])))?;
        let value = if fields[3] == MISSING {
            None
        } else {
            let v: f64 = fields[3].parse().map_err(|_| bad(line_no, format!("bad value `{}`", fields[3])))?;
            if !v.is_finite() {
                return Err(bad(line_no, format!("non-finite value `{}`", fields[3])));
            }
            Some(v)
        };
        rows.push(IterationRow { method: fields[0].to_string(), iteration, metric, value });
    }
    if rows.is_empty() {
        return Err(bad(2, "no iteration rows".into()));
    }
    Ok(rows)
}

pub fn read_iterations(path: &Path) -> Result<Vec<IterationRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_iterations(path, &text)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSummary {
    pub method: String,
    pub metric: Metric,
    pub values: Vec<f64>,
    pub mean: Option<f64>,
    /// `None` with fewer than two values.
    pub ci: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub ci_level: f64,
    /// Methods in first-appearance order, each with `ate` then `tte`.
    pub rows: Vec<MetricSummary>,
}

impl Summary {
    pub fn get(&self, method: &str, metric: Metric) -> Option<&MetricSummary> {
        self.rows.iter().find(|r| r.method == method && r.metric == metric)
    }
}

pub fn summarize(rows: &[IterationRow], ci_level: f64) -> Result<Summary> {
    if !(ci_level > 0.0 && ci_level < 1.0) {
        return Err(Error::config("ci_level", format!("must lie in (0, 1), got {ci_level}")));
    }
    let mut methods: Vec<&str> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    let mut out = Vec::new();
    for m in methods {
        for metric in Metric::ALL {
            let mut cells: Vec<(usize, f64)> = rows
                .iter()
                .filter(|r| r.method == m && r.metric == metric)
                .filter_map(|r| r.value.map(|v| (r.iteration, v)))
                .collect();
            cells.sort_by_key(|c| c.0);
            let values: Vec<f64> = cells.into_iter().map(|c| c.1).collect();
            let mean = (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
            let ci = if values.len() >= 2 { Some(confidence_interval(&values, ci_level)?) } else { None };
            out.push(MetricSummary { method: m.to_string(), metric, values, mean, ci });
        }
    }
    Ok(Summary { ci_level, rows: out })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| MISSING.to_string(), fmt_f64)
}

pub fn summary_csv(s: &Summary) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for r in &s.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.method,
            r.metric.name(),
            r.values.len(),
            opt(r.mean),
            fmt_f64(s.ci_level),
            opt(r.ci.map(|c| c.0)),
            opt(r.ci.map(|c| c.1)),
        )
        .unwrap();
    }
    out
}

pub fn boxplot_csv(s: &Summary) -> Result<String> {
    let mut out = format!("{BOXPLOT_HEADER}\n");
    for r in &s.rows {
        if r.values.is_empty() {
            writeln!(out, "{},{},NA,NA,NA,NA,NA,", r.method, r.metric.name()).unwrap();
            continue;
        }
        let b = boxplot_stats(&r.values)?;
        let outliers: Vec<String> = b.outliers.iter().map(|&v| fmt_f64(v)).collect();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.method,
            r.metric.name(),
            fmt_f64(b.min),
            fmt_f64(b.q1),
            fmt_f64(b.median),
            fmt_f64(b.q3),
            fmt_f64(b.max),
            outliers.join(";"),
        )
        .unwrap();
    }
    Ok(out)
}

/// Method x {TTE mean, TTE CI, ATE mean, ATE CI}, aligned for reading.
pub fn summary_table(s: &Summary) -> String {
    let short = |v: Option<f64>| v.map_or_else(|| MISSING.to_string(), |x| format!("{x:.4}"));
    let ci = |c: Option<(f64, f64)>| c.map_or_else(|| MISSING.to_string(), |(lo, hi)| format!("[{lo:.4}, {hi:.4}]"));
    let level = format!("{}% CI", s.ci_level * 100.0);
    let mut lines = vec![["method".to_string(), "TTE mean".into(), format!("TTE {level}"), "ATE mean".into(), format!("ATE {level}")]];
    let mut methods: Vec<&str> = Vec::new();
    for r in &s.rows {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    for m in methods {
        let (a, t) = (s.get(m, Metric::Ate).unwrap(), s.get(m, Metric::Tte).unwrap());
        lines.push([m.to_string(), short(t.mean), ci(t.ci), short(a.mean), ci(a.ci)]);
    }
    let widths: Vec<usize> = (0..5).map(|c| lines.iter().map(|l| l[c].len()).max().unwrap()).collect();
    let mut out = String::new();
    for (k, l) in lines.iter().enumerate() {
        let cells: Vec<String> = l.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        writeln!(out, "{}", cells.join(" | ").trim_end()).unwrap();
        if k == 0 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            writeln!(out, "{}", rule.join("-|-")).unwrap();
        }
    }
    out
}

pub fn holdout_csv(report: &EvalReport) -> String {
    let mut out = String::from("iteration,n_rows,ate\n");
    for h in &report.holdout {
        writeln!(out, "{},{},{}", h.iteration, h.n_rows, opt(h.ate)).unwrap();
    }
    out
}

pub fn failures_csv(report: &EvalReport) -> String {
    let mut out = String::from("method,iteration,message\n");
    for f in &report.failures {
        writeln!(out, "{},{},\"{}\"", f.method_id, f.iteration, f.message.replace('"', "\"\"")).unwrap();
    }
    out
}

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::eval::{is_results_file, read_results, EvalRow};
use super::{io_error, HarnessError};
use crate::encoding::EncodingMode;

/// Aggregate over all rows of one condition.
///
/// Rescue times are in minutes; failed missions count at the time limit and
/// are tallied as censored. Spreads are sample standard deviations (zero for
/// a single row).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionSummary {
    pub condition: String,
    pub encoding: EncodingMode,
    #[serde(rename = "C_S")]
    pub c_s: f64,
    pub runs: usize,
    pub success_rate: f64,
    pub rescue_time_min_mean: f64,
    pub rescue_time_min_std: f64,
    pub survival_rate_mean: f64,
    pub survival_rate_std: f64,
    pub censored: usize,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Summarize rows from one source, one entry per (encoding, C_S) pair in
/// order of first appearance.
pub fn summarize(condition: &str, rows: &[EvalRow]) -> Vec<ConditionSummary> {
    let mut keys: Vec<(EncodingMode, f64)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|&(e, c)| e == r.encoding && c == r.c_s) {
            keys.push((r.encoding, r.c_s));
        }
    }
    keys.into_iter()
        .map(|(encoding, c_s)| {
            let group: Vec<&EvalRow> = rows.iter().filter(|r| r.encoding == encoding && r.c_s == c_s).collect();
            let rescue: Vec<f64> = group.iter().map(|r| r.rescue_time_s / 60.0).collect();
            let survival: Vec<f64> = group.iter().map(|r| r.survival_rate).collect();
            let successes = group.iter().filter(|r| r.success).count();
            let (rescue_mean, rescue_std) = mean_std(&rescue);
            let (survival_mean, survival_std) = mean_std(&survival);
            ConditionSummary {
                condition: condition.to_string(),
                encoding,
                c_s,
                runs: group.len(),
                success_rate: successes as f64 / group.len() as f64,
                rescue_time_min_mean: rescue_mean,
                rescue_time_min_std: rescue_std,
                survival_rate_mean: survival_mean,
                survival_rate_std: survival_std,
                censored: group.len() - successes,
            }
        })
        .collect()
}

fn collect_results(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), HarnessError> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_error(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_results(&p, out)?;
        } else if is_results_file(&p) {
            out.push(p);
        }
    }
    Ok(())
}

/// Summaries of every results CSV below `dir`. Each file is a condition,
/// named by its path relative to `dir` without the extension.
pub fn report(dir: &Path) -> Result<Vec<ConditionSummary>, HarnessError> {
    let mut files = Vec::new();
    collect_results(dir, &mut files)?;
    if files.is_empty() {
        return Err(HarnessError::Invalid(format!("no results CSV files under {}", dir.display())));
    }
    let mut out = Vec::new();
    for f in files {
        let rows = read_results(&f)?;
        if rows.is_empty() {
            continue;
        }
        let rel = f.strip_prefix(dir).unwrap_or(&f).with_extension("");
        let name = rel.to_string_lossy().replace('\\', "/");
        out.extend(summarize(&name, &rows));
    }
    if out.is_empty() {
        return Err(HarnessError::Invalid(format!("results CSV files under {} have no rows", dir.display())));
    }
    Ok(out)
}

pub fn summary_csv(summaries: &[ConditionSummary]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in summaries {
        w.serialize(s).expect("summary rows serialize");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

/// Fixed-width text table with one line per condition.
pub fn summary_table(summaries: &[ConditionSummary]) -> String {
    let header = [
        "condition", "encoding", "C_S", "runs", "success", "rescue_min", "rescue_std", "survival", "survival_std", "censored",
    ];
    let rows: Vec<[String; 10]> = summaries
        .iter()
        .map(|s| {
            [
                s.condition.clone(),
                s.encoding.to_string(),
                format!("{}", s.c_s),
                s.runs.to_string(),
                format!("{:.3}", s.success_rate),
                format!("{:.2}", s.rescue_time_min_mean),
                format!("{:.2}", s.rescue_time_min_std),
                format!("{:.3}", s.survival_rate_mean),
                format!("{:.3}", s.survival_rate_std),
                s.censored.to_string(),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in &rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for r in &rows {
        out += &line(r.iter().map(String::as_str).collect());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_success() {
        let row = EvalRow {
            scenario_id: "s".into(),
            seed: 1,
            success: true,
            rescue_time_s: 1200.0,
            survival_rate: 1.0,
            reward: 0.5,
            encoding: EncodingMode::Both,
            c_s: 0.0,
        };
        let s = &summarize("x", &[row])[0];
        assert_eq!((s.rescue_time_min_mean, s.success_rate, s.censored), (20.0, 1.0, 0));
        assert_eq!(s.rescue_time_min_std, 0.0);
    }

    #[test]
    fn table_is_aligned() {
        let row = |enc| EvalRow {
            scenario_id: "s".into(),
            seed: 1,
            success: false,
            rescue_time_s: 2400.0,
            survival_rate: 0.5,
            reward: -0.5,
            encoding: enc,
            c_s: 1.0,
        };
        let sums = summarize("long-condition-name", &[row(EncodingMode::Both), row(EncodingMode::None)]);
        let table = summary_table(&sums);
        let lens: Vec<usize> = table.lines().map(str::len).collect();
        assert_eq!(lens.len(), 3);
        assert!(lens.iter().all(|&l| l == lens[0]));
        assert_eq!(sums[1].censored, 1);
        assert_eq!(sums[1].rescue_time_min_mean, 40.0);
    }
}

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::config::Task;
use crate::error::CliError;
use crate::output::OutputDir;
use crate::summary::{aggregate, Stat, Summary};

pub const COMPARE_FILE: &str = "compare.csv";

/// One group (family or r value) of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub name: String,
    pub group: String,
    pub runs: usize,
    pub psnr: Stat,
    pub ssim: Option<Stat>,
    pub mse: Stat,
    /// Metrics on which this row is best: highest PSNR and SSIM, lowest MSE.
    pub best: Vec<&'static str>,
}

/// Rows ranked by mean PSNR, highest first; ties keep config name, then
/// group, in ascending order.
pub fn compare(summaries: &[Summary]) -> Result<Vec<CompareRow>, CliError> {
    if summaries.len() < 2 {
        return Err(CliError::Usage("compare needs at least two summaries".into()));
    }
    let task = summaries[0].task;
    if let Some(other) = summaries.iter().find(|s| s.task != task) {
        return Err(CliError::Usage(format!(
            "cannot compare {} with {} summaries",
            task.name(),
            other.task.name()
        )));
    }
    if task == Task::Spectrum {
        return Err(CliError::Usage("spectrum summaries carry no quality metrics".into()));
    }
    let mut rows: Vec<CompareRow> = summaries
        .iter()
        .flat_map(|s| {
            aggregate(&s.runs).into_iter().map(|a| CompareRow {
                name: s.name.clone(),
                group: a.group,
                runs: a.runs,
                psnr: a.psnr,
                ssim: a.ssim,
                mse: a.mse,
                best: Vec::new(),
            })
        })
        .collect();
    rows.sort_by(|a, b| {
        b.psnr
            .mean
            .total_cmp(&a.psnr.mean)
            .then_with(|| a.name.cmp(&b.name))
            .then_with(|| a.group.cmp(&b.group))
    });
    let top = |key: &dyn Fn(&CompareRow) -> Option<f64>| {
        rows.iter().filter_map(key).max_by(f64::total_cmp)
    };
    let best_psnr = top(&|r| Some(r.psnr.mean));
    let best_ssim = top(&|r| r.ssim.map(|s| s.mean));
    let best_mse = top(&|r| Some(-r.mse.mean));
    for r in &mut rows {
        if Some(r.psnr.mean) == best_psnr {
            r.best.push("psnr");
        }
        if r.ssim.is_some_and(|s| Some(s.mean) == best_ssim) {
            r.best.push("ssim");
        }
        if Some(-r.mse.mean) == best_mse {
            r.best.push("mse");
        }
    }
    Ok(rows)
}

fn stat_cells(s: Option<Stat>) -> String {
    s.map(|s| format!("{},{}", s.mean, s.std)).unwrap_or_else(|| ",".into())
}

/// Columns `rank,name,group,runs,psnr_mean,psnr_std,ssim_mean,ssim_std,
/// mse_mean,mse_std,best`; `best` joins metric names with `;`.
pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut out =
        String::from("rank,name,group,runs,psnr_mean,psnr_std,ssim_mean,ssim_std,mse_mean,mse_std,best\n");
    for (i, r) in rows.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            i + 1,
            r.name,
            r.group,
            r.runs,
            stat_cells(Some(r.psnr)),
            stat_cells(r.ssim),
            stat_cells(Some(r.mse)),
            r.best.join(";")
        );
    }
    out
}

/// Ranking for the terminal, mean±std per metric.
pub fn compare_table(rows: &[CompareRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>4}  {:<24} {:<10} {:>4}  {:>16}  {:>16}  {:>22}  best",
        "rank", "name", "group", "runs", "psnr", "ssim", "mse"
    );
    for (i, r) in rows.iter().enumerate() {
        let ssim = r
            .ssim
            .map(|s| format!("{:.4}±{:.4}", s.mean, s.std))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:>4}  {:<24} {:<10} {:>4}  {:>16}  {:>16}  {:>22}  {}",
            i + 1,
            r.name,
            r.group,
            r.runs,
            format!("{:.3}±{:.3}", r.psnr.mean, r.psnr.std),
            ssim,
            format!("{:.4e}±{:.2e}", r.mse.mean, r.mse.std),
            r.best.join(",")
        );
    }
    out
}

/// Loads summaries, writes `compare.csv` into `out_dir` and returns the
/// rows.
pub fn compare_files(paths: &[impl AsRef<Path>], out_dir: &Path) -> Result<Vec<CompareRow>, CliError> {
    let summaries = paths
        .iter()
        .map(|p| Summary::load(p.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = compare(&summaries)?;
    let mut out = OutputDir::acquire(out_dir)?;
    out.write(COMPARE_FILE, compare_csv(&rows).as_bytes())?;
    Ok(rows)
}

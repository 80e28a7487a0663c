use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use rppg_core::evaluation::{bland_altman_csv, cohort_report, scatter_csv, CohortKey, EvalRecord};
use rppg_core::ingest::{load_ground_truth, GroundTruth};
use serde::Deserialize;

use crate::estimate::HrReport;
use crate::output::write_atomic;

pub const COHORT_CSV: &str = "cohort.csv";

#[derive(Debug, clap::Args)]
pub struct Args {
    /// CSV with columns report, ground_truth, skin_tone, condition,
    /// viewpoint. Relative paths resolve against the manifest's directory.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory for the cohort table and scatter data.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Deserialize)]
struct ManifestRow {
    report: PathBuf,
    ground_truth: PathBuf,
    skin_tone: String,
    condition: String,
    viewpoint: String,
}

/// Pairs each window estimate with the mean reference heart rate over the
/// same span, falling back to the whole-recording mean.
fn pair_windows(report: &HrReport, gt: &GroundTruth) -> Result<(Vec<f64>, Vec<f64>)> {
    let window_s = report.config.pipeline.window_s;
    let overall = gt.mean_bpm().ok_or_else(|| anyhow!("ground truth has no heart-rate samples"))?;
    Ok(report
        .windows
        .iter()
        .map(|w| (w.bpm, gt.mean_bpm_between(w.start_s, w.start_s + window_s).unwrap_or(overall)))
        .unzip())
}

fn load_row(row: &ManifestRow, base: &Path) -> Result<EvalRecord> {
    let key = CohortKey {
        skin_tone: row.skin_tone.parse()?,
        condition: row.condition.parse()?,
        viewpoint: row.viewpoint.parse()?,
    };
    let report_path = base.join(&row.report);
    let text = std::fs::read_to_string(&report_path).with_context(|| format!("reading {}", report_path.display()))?;
    let report: HrReport = serde_json::from_str(&text).with_context(|| format!("parsing {}", report_path.display()))?;
    let gt = load_ground_truth(&base.join(&row.ground_truth), None)?;
    let (est, gt) = pair_windows(&report, &gt)?;
    if est.is_empty() {
        return Err(anyhow!("report {} has no windows", report_path.display()));
    }
    Ok(EvalRecord {
        key,
        method: report.method.label().to_string(),
        est,
        gt,
    })
}

pub fn run(args: Args) -> Result<()> {
    if !args.manifest.is_file() {
        return Err(rppg_core::Error::MissingInput(args.manifest).into());
    }
    let base = args.manifest.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut reader = csv::Reader::from_path(&args.manifest)
        .with_context(|| format!("reading manifest {}", args.manifest.display()))?;
    let mut records = Vec::new();
    let mut skipped = 0;
    for (i, row) in reader.deserialize::<ManifestRow>().enumerate() {
        let line = i + 2;
        let loaded = row
            .map_err(anyhow::Error::from)
            .and_then(|row| load_row(&row, &base));
        match loaded {
            Ok(record) => records.push(record),
            Err(e) => {
                skipped += 1;
                log::warn!("manifest row {line} skipped: {e:#}");
            }
        }
    }
    if records.is_empty() {
        return Err(anyhow::Error::from(rppg_core::Error::EmptyInput)
            .context(format!("all {skipped} manifest rows were invalid")));
    }

    let report = cohort_report(&records)?;
    write_atomic(&args.output.join(COHORT_CSV), report.to_csv().as_bytes())?;

    let mut by_method: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in &records {
        let entry = by_method.entry(r.method.as_str()).or_default();
        entry.0.extend_from_slice(&r.est);
        entry.1.extend_from_slice(&r.gt);
    }
    for (method, (est, gt)) in by_method {
        write_atomic(&args.output.join(format!("scatter_{method}.csv")), scatter_csv(&est, &gt).as_bytes())?;
        write_atomic(
            &args.output.join(format!("bland_altman_{method}.csv")),
            bland_altman_csv(&est, &gt).as_bytes(),
        )?;
    }
    log::info!("{} records evaluated, {skipped} skipped", records.len());
    Ok(())
}

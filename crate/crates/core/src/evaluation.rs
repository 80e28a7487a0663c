//! Agreement statistics and cohort tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::numeric::{mean, std_dev, sum};
use crate::{Error, Result};

/// Agreement between estimated and reference heart rates, in bpm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementStats {
    pub n: usize,
    pub mae: f64,
    /// Population standard deviation of `est − gt`.
    pub se: f64,
    /// Pearson correlation; `None` when either side has zero variance.
    pub r: Option<f64>,
    pub bias: f64,
    pub loa_low: f64,
    pub loa_high: f64,
}

pub const LOA_FACTOR: f64 = 1.96;

pub fn agreement(est: &[f64], gt: &[f64]) -> Result<AgreementStats> {
    if est.len() != gt.len() {
        return Err(Error::LengthMismatch {
            est: est.len(),
            gt: gt.len(),
        });
    }
    if est.is_empty() {
        return Err(Error::EmptyInput);
    }
    let diffs: Vec<f64> = est.iter().zip(gt).map(|(e, g)| e - g).collect();
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let bias = mean(&diffs);
    let se = std_dev(&diffs);
    Ok(AgreementStats {
        n: est.len(),
        mae: mean(&abs),
        se,
        r: pearson(est, gt),
        bias,
        loa_low: bias - LOA_FACTOR * se,
        loa_high: bias + LOA_FACTOR * se,
    })
}

/// Pearson correlation, `None` if undefined.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(x), mean(y));
    let sxy = sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let sxx = sum(x.iter().map(|a| (a - mx) * (a - mx)));
    let syy = sum(y.iter().map(|b| (b - my) * (b - my)));
    let scale = (sxx * syy).sqrt();
    // variance indistinguishable from rounding noise counts as zero
    let tiny = |s: f64, m: f64| s <= 1e-24 * (m * m).max(1.0) * x.len() as f64;
    if tiny(sxx, mx) || tiny(syy, my) || !(scale > 0.0) {
        return None;
    }
    Some((sxy / scale).clamp(-1.0, 1.0))
}

/// `(mean, difference)` pairs for a Bland-Altman plot.
pub fn bland_altman_points(est: &[f64], gt: &[f64]) -> Vec<(f64, f64)> {
    est.iter().zip(gt).map(|(e, g)| ((e + g) / 2.0, e - g)).collect()
}

pub fn scatter_csv(est: &[f64], gt: &[f64]) -> String {
    let mut out = String::from("gt,est\n");
    for (e, g) in est.iter().zip(gt) {
        let _ = writeln!(out, "{g},{e}");
    }
    out
}

pub fn bland_altman_csv(est: &[f64], gt: &[f64]) -> String {
    let mut out = String::from("mean,diff\n");
    for (m, d) in bland_altman_points(est, gt) {
        let _ = writeln!(out, "{m},{d}");
    }
    out
}

macro_rules! label_enum {
    ($name:ident { $($variant:ident => $label:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $label)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn label(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                $(if s.eq_ignore_ascii_case($label) {
                    return Ok($name::$variant);
                })+
                Err(Error::malformed(stringify!($name), format!("unknown value {s:?}")))
            }
        }
    };
}

label_enum!(SkinTone { Light => "light", Medium => "medium", Dark => "dark" });
label_enum!(Condition { K3200 => "3200K", K5600 => "5600K", Room => "room", Talking => "talking" });
label_enum!(Viewpoint { Front => "front", Lower => "lower" });

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CohortKey {
    pub skin_tone: SkinTone,
    pub condition: Condition,
    pub viewpoint: Viewpoint,
}

/// Paired estimates from one video under one method.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub key: CohortKey,
    pub method: String,
    pub est: Vec<f64>,
    pub gt: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Column {
    Skin(SkinTone),
    Condition(Condition),
    Viewpoint(Viewpoint),
    Overall,
}

impl Column {
    pub fn all() -> Vec<Column> {
        let mut cols: Vec<Column> = SkinTone::ALL.iter().map(|&s| Column::Skin(s)).collect();
        cols.extend(Condition::ALL.iter().map(|&c| Column::Condition(c)));
        cols.extend(Viewpoint::ALL.iter().map(|&v| Column::Viewpoint(v)));
        cols.push(Column::Overall);
        cols
    }

    pub fn label(self) -> &'static str {
        match self {
            Column::Skin(s) => s.label(),
            Column::Condition(c) => c.label(),
            Column::Viewpoint(v) => v.label(),
            Column::Overall => "overall",
        }
    }

    fn includes(self, key: &CohortKey) -> bool {
        match self {
            Column::Skin(s) => key.skin_tone == s,
            Column::Condition(c) => key.condition == c,
            Column::Viewpoint(v) => key.viewpoint == v,
            Column::Overall => true,
        }
    }
}

/// Method whose MAE the delta row is measured against.
pub const REFERENCE_METHOD: &str = "aggregate";

/// Per-method, per-column statistics; `None` marks a cell with no records.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortReport {
    methods: Vec<String>,
    cells: BTreeMap<(String, Column), AgreementStats>,
}

fn method_rank(name: &str) -> (usize, &str) {
    let rank = ["aggregate", "snr", "proposed"].iter().position(|m| *m == name).unwrap_or(3);
    (rank, name)
}

pub fn cohort_report(records: &[EvalRecord]) -> Result<CohortReport> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut methods: Vec<String> = records.iter().map(|r| r.method.clone()).collect();
    methods.sort_by(|a, b| method_rank(a).cmp(&method_rank(b)));
    methods.dedup();
    let mut cells = BTreeMap::new();
    for method in &methods {
        for column in Column::all() {
            let (mut est, mut gt) = (Vec::new(), Vec::new());
            for r in records.iter().filter(|r| &r.method == method && column.includes(&r.key)) {
                if r.est.len() != r.gt.len() {
                    return Err(Error::LengthMismatch {
                        est: r.est.len(),
                        gt: r.gt.len(),
                    });
                }
                est.extend_from_slice(&r.est);
                gt.extend_from_slice(&r.gt);
            }
            if !est.is_empty() {
                cells.insert((method.clone(), column), agreement(&est, &gt)?);
            }
        }
    }
    Ok(CohortReport { methods, cells })
}

impl CohortReport {
    pub fn methods(&self) -> &[String] {
        &self.methods
    }

    pub fn get(&self, method: &str, column: Column) -> Option<&AgreementStats> {
        self.cells.get(&(method.to_string(), column))
    }

    /// `MAE(method) − MAE(reference)`; negative values are improvements.
    pub fn mae_delta(&self, method: &str, column: Column) -> Option<f64> {
        let reference = self.get(REFERENCE_METHOD, column)?;
        Some(self.get(method, column)?.mae - reference.mae)
    }

    pub fn to_csv(&self) -> String {
        let columns = Column::all();
        let mut out = String::from("method,metric");
        for c in &columns {
            out.push(',');
            out.push_str(c.label());
        }
        out.push('\n');
        let fmt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |x| format!("{x:.6}"));
        for method in &self.methods {
            for metric in ["mae", "se", "r"] {
                let _ = write!(out, "{method},{metric}");
                for &c in &columns {
                    let cell = match self.get(method, c) {
                        None => "absent".to_string(),
                        Some(s) => match metric {
                            "mae" => fmt(Some(s.mae)),
                            "se" => fmt(Some(s.se)),
                            _ => fmt(s.r),
                        },
                    };
                    let _ = write!(out, ",{cell}");
                }
                out.push('\n');
            }
        }
        if self.methods.iter().any(|m| m == REFERENCE_METHOD) {
            for method in self.methods.iter().filter(|m| *m != REFERENCE_METHOD) {
                let _ = write!(out, "{method},mae_delta_vs_{REFERENCE_METHOD}");
                for &c in &columns {
                    let cell = self.mae_delta(method, c).map_or_else(|| "absent".to_string(), |d| format!("{d:.6}"));
                    let _ = write!(out, ",{cell}");
                }
                out.push('\n');
            }
        }
        out
    }
}

//! Field-wise comparison of two run directories.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;

#[derive(Serialize)]
pub struct FileDiff {
    pub rows: usize,
    pub max_abs: f64,
    pub rms: f64,
}

#[derive(Serialize)]
pub struct DiffReport {
    pub task: String,
    pub files: BTreeMap<String, FileDiff>,
    pub overall_max_abs: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

fn read_summary(dir: &Path) -> anyhow::Result<Value> {
    let text = fs::read_to_string(dir.join("summary.json"))
        .with_context(|| format!("no summary.json in {}", dir.display()))?;
    Ok(serde_json::from_str(&text)?)
}

fn parse_csv(path: &Path) -> anyhow::Result<Vec<Vec<String>>> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect())
}

/// Interpolating comparison is out of scope: artifacts from the same task
/// and grid settings line up row by row, and mismatched shapes are an error.
pub fn compare(dir_a: &Path, dir_b: &Path, tolerance: f64) -> anyhow::Result<DiffReport> {
    let sa = read_summary(dir_a)?;
    let sb = read_summary(dir_b)?;
    let (ta, tb) = (sa["task"].as_str().unwrap_or(""), sb["task"].as_str().unwrap_or(""));
    if ta != tb {
        anyhow::bail!("incompatible task types: `{ta}` vs `{tb}`");
    }

    let names: Vec<String> = sa["artifacts"]
        .as_array()
        .map(|a| a.iter().filter_map(|v| v.as_str().map(str::to_string)).collect())
        .unwrap_or_default();

    let mut files = BTreeMap::new();
    let mut overall = 0.0f64;
    for name in names {
        if !name.ends_with(".csv") || !dir_b.join(&name).exists() {
            continue;
        }
        let a = parse_csv(&dir_a.join(&name))?;
        let b = parse_csv(&dir_b.join(&name))?;
        if a.len() != b.len() {
            anyhow::bail!("{name}: row count differs ({} vs {})", a.len(), b.len());
        }
        let mut max_abs = 0.0f64;
        let mut sq = 0.0f64;
        let mut count = 0usize;
        for (ra, rb) in a.iter().zip(&b).skip(1) {
            if ra.len() != rb.len() {
                anyhow::bail!("{name}: column count differs");
            }
            for (fa, fb) in ra.iter().zip(rb) {
                match (fa.parse::<f64>(), fb.parse::<f64>()) {
                    (Ok(x), Ok(y)) => {
                        let d = (x - y).abs();
                        max_abs = max_abs.max(d);
                        sq += d * d;
                        count += 1;
                    }
                    _ => {
                        if fa != fb {
                            anyhow::bail!("{name}: non-numeric field mismatch `{fa}` vs `{fb}`");
                        }
                    }
                }
            }
        }
        overall = overall.max(max_abs);
        files.insert(
            name,
            FileDiff {
                rows: a.len() - 1,
                max_abs,
                rms: if count > 0 { (sq / count as f64).sqrt() } else { 0.0 },
            },
        );
    }

    Ok(DiffReport {
        task: ta.to_string(),
        files,
        overall_max_abs: overall,
        tolerance,
        within_tolerance: overall <= tolerance,
    })
}

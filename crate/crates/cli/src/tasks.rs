//! Task dispatch: each task turns a scenario into CSV artifacts plus
//! entries for the run summary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use horizonlab::geodesics::{fate_census, integrate_radial, Family, Fate, RadialOpts};
use horizonlab::horizons::{
    picard_bounded_solution, separatrix_shoot, HorizonCurve, HorizonKind, PicardOpts,
};
use horizonlab::characteristics::{classify_surface, radial_char_roots};
use horizonlab::metric::acoustic_to_polar2d;
use horizonlab::stationary2d::{
    find_closed_orbits, locate_ergosphere, trapping_census, OrbitFamily, OrbitSearchOpts,
};
use horizonlab::waves::{dn_characteristic, dn_direct, DirectOpts, DnTrace, ProbePulse};
use horizonlab::RadialMetric;
use serde_json::{json, Value};

use crate::scenario::{build_radial_metric, Scenario};

pub struct RunOutput {
    pub artifacts: Vec<String>,
    pub metrics: BTreeMap<String, Value>,
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// RFC-4180 field quoting; our fields are numbers and bare words, but the
/// writer stays general.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Write a CSV atomically: temp file in the same directory, then rename.
pub fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
    let mut text = header.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(",");
    text.push_str("\r\n");
    for row in rows {
        text.push_str(&row.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(","));
        text.push_str("\r\n");
    }
    write_atomic(dir, name, text.as_bytes())
}

pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> anyhow::Result<()> {
    let tmp: PathBuf = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, dir.join(name)).with_context(|| format!("installing {name}"))?;
    Ok(())
}

fn fate_label(f: &Fate) -> (&'static str, String) {
    match f {
        Fate::HitOrigin(t) => ("hit_origin", fmt(*t)),
        Fate::Alive => ("alive", String::new()),
        Fate::Escaped(t) => ("escaped", fmt(*t)),
    }
}

pub fn run_task(sc: &Scenario, out: &Path, threads: usize) -> anyhow::Result<RunOutput> {
    match sc.task.as_str() {
        "trajectories" => trajectories(sc, out, threads),
        "horizon" => horizon(sc, out),
        "classify" => classify(sc, out),
        "stationary2d" => stationary2d(sc, out),
        "wave-dn" => wave_dn(sc, out),
        "figures" => figures(sc, out, threads),
        other => anyhow::bail!("unhandled task {other}"),
    }
}

fn parse_family(params: &Value) -> Family {
    match params.get("family").and_then(Value::as_str) {
        Some("minus") => Family::Minus,
        _ => Family::Plus,
    }
}

/// Integrate a fan of rays, optionally across threads; results keep the
/// input order, so the artifact bytes do not depend on the thread count.
fn ray_fan(
    metric: &RadialMetric,
    family: Family,
    x0_start: f64,
    x0_end: f64,
    radii: &[f64],
    threads: usize,
) -> anyhow::Result<Vec<horizonlab::geodesics::Trajectory>> {
    let opts = RadialOpts::for_metric(metric);
    let n = radii.len();
    let mut slots: Vec<Option<horizonlab::Result<_>>> = (0..n).map(|_| None).collect();
    if threads <= 1 {
        for (i, &r0) in radii.iter().enumerate() {
            slots[i] = Some(integrate_radial(metric, family, x0_start, r0, x0_end, &opts));
        }
    } else {
        let chunk = n.div_ceil(threads);
        std::thread::scope(|s| {
            for (idx, slice) in slots.chunks_mut(chunk).enumerate() {
                let opts = &opts;
                let radii = &radii[idx * chunk..];
                s.spawn(move || {
                    for (j, slot) in slice.iter_mut().enumerate() {
                        *slot = Some(integrate_radial(
                            metric, family, x0_start, radii[j], x0_end, opts,
                        ));
                    }
                });
            }
        });
    }
    slots
        .into_iter()
        .map(|s| s.unwrap().map_err(anyhow::Error::from))
        .collect()
}

fn trajectories(sc: &Scenario, out: &Path, threads: usize) -> anyhow::Result<RunOutput> {
    let metric = build_radial_metric(&sc.metric)?;
    let family = parse_family(&sc.params);
    let x0_start = sc.params.get("x0_start").and_then(Value::as_f64).unwrap_or(0.0);
    let x0_end = sc.params.get("x0_end").and_then(Value::as_f64).unwrap_or(20.0);
    let radii: Vec<f64> = sc
        .params
        .get("radii")
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(Value::as_f64).collect())
        .unwrap_or_else(|| vec![0.2, 0.5, 0.9, 1.1, 2.0, 5.0]);

    let fans = ray_fan(&metric, family, x0_start, x0_end, &radii, threads)?;
    let mut rows = Vec::new();
    let mut fate_rows = Vec::new();
    for (i, tr) in fans.iter().enumerate() {
        for (&t, &r) in tr.x0.iter().zip(&tr.r) {
            rows.push(vec![i.to_string(), fmt(t), fmt(r)]);
        }
        let (label, at) = fate_label(&tr.fate);
        fate_rows.push(vec![i.to_string(), fmt(radii[i]), label.to_string(), at]);
    }
    write_csv(out, "trajectories.csv", &["ray", "x0", "r"], &rows)?;
    write_csv(out, "fates.csv", &["ray", "r0", "fate", "x0_event"], &fate_rows)?;

    let mut metrics = BTreeMap::new();
    metrics.insert("rays".into(), json!(radii.len()));
    Ok(RunOutput {
        artifacts: vec!["trajectories.csv".into(), "fates.csv".into()],
        metrics,
    })
}

fn parse_horizon_kind(params: &Value) -> HorizonKind {
    match params.get("kind").and_then(Value::as_str) {
        Some("inner-black") => HorizonKind::InnerBlack,
        Some("outer-white") => HorizonKind::OuterWhite,
        Some("inner-white") => HorizonKind::InnerWhite,
        _ => HorizonKind::OuterBlack,
    }
}

fn horizon_rows(curve: &HorizonCurve) -> Vec<Vec<String>> {
    curve
        .x0
        .iter()
        .zip(&curve.r)
        .map(|(&t, &r)| vec![fmt(t), fmt(r)])
        .collect()
}

fn horizon(sc: &Scenario, out: &Path) -> anyhow::Result<RunOutput> {
    let metric = build_radial_metric(&sc.metric)?;
    let window = sc
        .params
        .get("window")
        .and_then(Value::as_array)
        .map(|a| (a[0].as_f64().unwrap(), a[1].as_f64().unwrap()))
        .unwrap_or((-30.0, 30.0));
    let anchor = sc.params.get("anchor").and_then(Value::as_f64).unwrap_or(0.0);
    let method = sc
        .params
        .get("method")
        .and_then(Value::as_str)
        .unwrap_or("shooting");

    let curve = match method {
        "picard" => {
            let profile = metric
                .acoustic_profile()
                .ok_or_else(|| anyhow::anyhow!("picard requires an acoustic metric"))?;
            let opts = PicardOpts {
                window,
                samples: 201,
                ..Default::default()
            };
            picard_bounded_solution(profile, &opts)?.1
        }
        _ => {
            let kind = parse_horizon_kind(&sc.params);
            separatrix_shoot(&metric, kind, anchor, window, sc.tolerance)?
        }
    };
    write_csv(out, "horizon.csv", &["x0", "r"], &horizon_rows(&curve))?;

    let limits = json!({
        "limit_neg_inf": curve.limit_neg_inf,
        "limit_pos_inf": curve.limit_pos_inf,
    });
    write_atomic(out, "limits.json", serde_json::to_string_pretty(&limits)?.as_bytes())?;

    let mut metrics = BTreeMap::new();
    metrics.insert("method".into(), json!(method));
    metrics.insert("sup_r".into(), json!(curve.sup_r()));
    if let Some(l) = curve.limit_neg_inf {
        metrics.insert("limit_neg_inf".into(), json!(l));
    }
    if let Some(l) = curve.limit_pos_inf {
        metrics.insert("limit_pos_inf".into(), json!(l));
    }
    Ok(RunOutput {
        artifacts: vec!["horizon.csv".into(), "limits.json".into()],
        metrics,
    })
}

fn classify(sc: &Scenario, out: &Path) -> anyhow::Result<RunOutput> {
    let metric = build_radial_metric(&sc.metric)?;
    let x0 = sc.params.get("x0").and_then(Value::as_f64).unwrap_or(0.0);
    let radii: Vec<f64> = sc
        .params
        .get("radii")
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(Value::as_f64).collect())
        .unwrap_or_else(|| (1..=40).map(|i| 0.1 * i as f64).collect());

    let mut rows = Vec::new();
    for &r in &radii {
        let roots = radial_char_roots(&metric, x0, r)?;
        let class = classify_surface(&metric, x0, r, 1e-9)?;
        rows.push(vec![
            fmt(r),
            fmt(roots.s_minus),
            fmt(roots.s_plus),
            format!("{class:?}"),
        ]);
    }
    write_csv(out, "classify.csv", &["r", "s_minus", "s_plus", "class"], &rows)?;
    let mut metrics = BTreeMap::new();
    metrics.insert("surfaces".into(), json!(radii.len()));
    Ok(RunOutput {
        artifacts: vec!["classify.csv".into()],
        metrics,
    })
}

fn stationary2d(sc: &Scenario, out: &Path) -> anyhow::Result<RunOutput> {
    let obj = sc.metric.as_object().unwrap();
    let metric = acoustic_to_polar2d(
        obj["a"].as_f64().unwrap(),
        obj["b"].as_f64().unwrap(),
    )?;

    let n_theta = sc
        .params
        .get("n_theta")
        .and_then(Value::as_u64)
        .unwrap_or(64) as usize;
    let ergo = locate_ergosphere(&metric, n_theta)?;
    let ergo_rows: Vec<Vec<String>> = ergo
        .theta
        .iter()
        .zip(&ergo.r_e)
        .map(|(&t, &r)| vec![fmt(t), fmt(r)])
        .collect();
    write_csv(out, "ergosphere.csv", &["theta", "r_e"], &ergo_rows)?;

    let mut orbit_rows = Vec::new();
    let mut n_orbits = 0;
    for fam in [OrbitFamily::Minus, OrbitFamily::Plus] {
        for orbit in find_closed_orbits(&metric, fam, &OrbitSearchOpts::default())? {
            n_orbits += 1;
            orbit_rows.push(vec![
                format!("{fam:?}"),
                fmt(orbit.radius),
                format!("{:?}", orbit.kind),
                fmt(orbit.period_x0),
                fmt(orbit.closure_defect),
            ]);
        }
    }
    write_csv(
        out,
        "orbits.csv",
        &["family", "radius", "kind", "period_x0", "closure_defect"],
        &orbit_rows,
    )?;

    let census_radius = sc
        .params
        .get("census_radius")
        .and_then(Value::as_f64)
        .unwrap_or(0.05);
    let census_seeds = sc
        .params
        .get("census_seeds")
        .and_then(Value::as_u64)
        .unwrap_or(50) as usize;
    let census = trapping_census(&metric, census_radius, census_seeds, sc.seed)?;

    let mut metrics = BTreeMap::new();
    metrics.insert("ergosphere_min_r".into(), json!(ergo.min_r()));
    metrics.insert("ergosphere_max_r".into(), json!(ergo.max_r()));
    metrics.insert("closed_orbits".into(), json!(n_orbits));
    metrics.insert("census_total".into(), json!(census.total));
    metrics.insert("census_hits".into(), json!(census.hits));
    metrics.insert("census_direction".into(), json!(format!("{:?}", census.direction)));
    Ok(RunOutput {
        artifacts: vec!["ergosphere.csv".into(), "orbits.csv".into()],
        metrics,
    })
}

fn trace_rows(tr: &DnTrace) -> Vec<Vec<String>> {
    tr.x0
        .iter()
        .enumerate()
        .map(|(i, &t)| vec![fmt(t), fmt(tr.f[i]), fmt(tr.lambda[i])])
        .collect()
}

fn wave_dn(sc: &Scenario, out: &Path) -> anyhow::Result<RunOutput> {
    let metric = build_radial_metric(&sc.metric)?;
    let p = &sc.params;
    let a = p.get("cylinder").and_then(Value::as_f64).unwrap_or(5.0);
    let pulse = ProbePulse::new(
        p.get("pulse_center").and_then(Value::as_f64).unwrap_or(0.0),
        p.get("pulse_sigma").and_then(Value::as_f64).unwrap_or(a / 10.0),
    )?;
    let x0_end = p.get("x0_end").and_then(Value::as_f64).unwrap_or(pulse.support().1 + 2.0);
    let method = p.get("method").and_then(Value::as_str).unwrap_or("both");

    let mut artifacts = Vec::new();
    let mut metrics = BTreeMap::new();

    if method == "direct" || method == "both" {
        let opts = DirectOpts {
            cells: p.get("cells").and_then(Value::as_u64).unwrap_or(200) as usize,
            area_power: p.get("area_power").and_then(Value::as_f64).unwrap_or(0.0),
            ..Default::default()
        };
        let rep = dn_direct(&metric, &pulse, a, x0_end, &opts)?;
        write_csv(out, "dn_direct.csv", &["x0", "f", "lambda"], &trace_rows(&rep.trace))?;
        artifacts.push("dn_direct.csv".into());
        metrics.insert("direct_r_abs".into(), json!(rep.r_abs));
        metrics.insert("direct_cells".into(), json!(opts.cells));
    }
    if method == "characteristic" || method == "both" {
        let times: Vec<f64> = {
            let t0 = pulse.support().0;
            let n = 200;
            (0..=n).map(|i| t0 + (x0_end - t0) * i as f64 / n as f64).collect()
        };
        let h = p.get("stencil_h").and_then(Value::as_f64).unwrap_or(1e-3);
        let tr = dn_characteristic(&metric, &pulse, a, &times, h)?;
        write_csv(out, "dn_characteristic.csv", &["x0", "f", "lambda"], &trace_rows(&tr))?;
        artifacts.push("dn_characteristic.csv".into());
    }
    Ok(RunOutput { artifacts, metrics })
}

/// Fan data behind the phase-portrait figures: both characteristic families
/// from a spread of radii around the horizon.
fn figures(sc: &Scenario, out: &Path, threads: usize) -> anyhow::Result<RunOutput> {
    let metric = build_radial_metric(&sc.metric)?;
    let radii: Vec<f64> = sc
        .params
        .get("radii")
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(Value::as_f64).collect())
        .unwrap_or_else(|| vec![0.1, 0.25, 0.5, 0.75, 0.9, 1.0, 1.1, 1.5, 2.0, 3.0, 5.0]);
    let x0_end = sc.params.get("x0_end").and_then(Value::as_f64).unwrap_or(12.0);

    let mut artifacts = Vec::new();
    let mut metrics = BTreeMap::new();
    for (family, name) in [(Family::Plus, "fan_plus.csv"), (Family::Minus, "fan_minus.csv")] {
        // white-hole structure lives backward in x0: run the fan both ways
        // and stitch at x0 = 0 so each figure shows full bicharacteristics
        let fwd = ray_fan(&metric, family, 0.0, x0_end, &radii, threads)?;
        let bwd = ray_fan(&metric, family, 0.0, -x0_end, &radii, threads)?;
        let mut rows = Vec::new();
        let mut hits = 0usize;
        let mut escapes = 0usize;
        for (i, (f, b)) in fwd.iter().zip(&bwd).enumerate() {
            for (&t, &r) in b.x0.iter().rev().zip(b.r.iter().rev()) {
                rows.push(vec![i.to_string(), fmt(t), fmt(r)]);
            }
            for (&t, &r) in f.x0.iter().zip(&f.r).skip(1) {
                rows.push(vec![i.to_string(), fmt(t), fmt(r)]);
            }
            match f.fate {
                Fate::HitOrigin(_) => hits += 1,
                Fate::Escaped(_) => escapes += 1,
                Fate::Alive => {}
            }
        }
        write_csv(out, name, &["ray", "x0", "r"], &rows)?;
        artifacts.push(name.to_string());
        let tag = if family == Family::Plus { "plus" } else { "minus" };
        metrics.insert(format!("{tag}_hits"), json!(hits));
        metrics.insert(format!("{tag}_escapes"), json!(escapes));
    }

    // fate table used by the figure captions
    let opts = RadialOpts::for_metric(&metric);
    let fates = fate_census(&metric, Family::Plus, 0.0, &radii, x0_end, &opts)?;
    let fate_rows: Vec<Vec<String>> = fates
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let (label, at) = fate_label(f);
            vec![fmt(radii[i]), label.to_string(), at]
        })
        .collect();
    write_csv(out, "fates_plus.csv", &["r0", "fate", "x0_event"], &fate_rows)?;
    artifacts.push("fates_plus.csv".into());

    Ok(RunOutput { artifacts, metrics })
}

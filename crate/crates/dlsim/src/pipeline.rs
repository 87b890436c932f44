//! File-staged pipeline behind the `dlsim` binary: curves CSV, LUT, system
//! results, CDF summaries, and run manifests.
//!
//! Every command is a pure function of its flags, config, and seeds; outputs
//! are written with LF endings and shortest-round-trip floats so repeated
//! runs are byte-identical. The manifest timestamp honors
//! `SOURCE_DATE_EPOCH` when set.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::abstraction::{
    build_mi_table, build_snr_cqi_map, default_mi_grid, lut_load, lut_save, Lut, MiesmParams,
};
use crate::digest::fnv1a_hex;
use crate::error::{Error, Result};
use crate::linksim::{run_bler_all, BlerCurve, BlerPoint, LinkSimConfig};
use crate::numerology::cqi_table;
use crate::stats::{jain_index, EmpiricalCdf};
use crate::sysim::{run_drop, DropResult, LinkReferences, SchedulerKind, SysimConfig};

/// Tool version stamped into manifests.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable naming a directory searched for config files given
/// as bare relative paths.
pub const CONFIG_PATH_ENV: &str = "DLSIM_CONFIG_PATH";

/// Record of one command invocation, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub config_digest: String,
    pub seeds: Vec<u64>,
    /// Unix seconds; `SOURCE_DATE_EPOCH` overrides the clock.
    pub generated_at: u64,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        })
}

/// Writes the manifest as `manifest.json` in `dir` (one per directory; a
/// later command overwrites).
pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    std::fs::write(&path, text + "\n")?;
    Ok(path)
}

fn manifest_for(
    command: &str,
    config_digest: String,
    seeds: Vec<u64>,
    inputs: &[&Path],
    outputs: &[&Path],
) -> RunManifest {
    RunManifest {
        tool_version: TOOL_VERSION.to_string(),
        command: command.to_string(),
        config_digest,
        seeds,
        generated_at: timestamp(),
        inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    }
}

/// Resolves a config path, falling back to the `DLSIM_CONFIG_PATH` directory
/// for bare relative names.
pub fn resolve_config_path(given: &Path) -> PathBuf {
    if given.exists() || given.is_absolute() {
        return given.to_path_buf();
    }
    if let Ok(dir) = std::env::var(CONFIG_PATH_ENV) {
        let candidate = Path::new(&dir).join(given);
        if candidate.exists() {
            return candidate;
        }
    }
    given.to_path_buf()
}

// ---------------------------------------------------------------------------
// Curves CSV
// ---------------------------------------------------------------------------

/// Writes curves as `cqi,snr_db,bler,n_blocks,n_errors`.
pub fn write_curves_csv(curves: &[BlerCurve], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut out = String::from("cqi,snr_db,bler,n_blocks,n_errors\n");
    for curve in curves {
        for p in &curve.points {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                curve.cqi_index, p.snr_db, p.bler, p.n_blocks, p.n_errors
            ));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads curves back, grouped by CQI, points in file order.
pub fn read_curves_csv(path: &Path) -> Result<Vec<BlerCurve>> {
    let file = std::fs::File::open(path).map_err(|e| Error::MalformedFile {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let mut curves: Vec<BlerCurve> = Vec::new();
    let mut lines = BufReader::new(file).lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header != "cqi,snr_db,bler,n_blocks,n_errors" {
        return Err(Error::MalformedFile {
            path: path.display().to_string(),
            reason: format!("unexpected header {header:?}"),
        });
    }
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(Error::MalformedFile {
                path: path.display().to_string(),
                reason: format!("bad row {line:?}"),
            });
        }
        let parse_err = |what: &str| Error::MalformedFile {
            path: path.display().to_string(),
            reason: format!("bad {what} in {line:?}"),
        };
        let cqi: u8 = cols[0].parse().map_err(|_| parse_err("cqi"))?;
        let point = BlerPoint {
            snr_db: cols[1].parse().map_err(|_| parse_err("snr_db"))?,
            bler: cols[2].parse().map_err(|_| parse_err("bler"))?,
            n_blocks: cols[3].parse().map_err(|_| parse_err("n_blocks"))?,
            n_errors: cols[4].parse().map_err(|_| parse_err("n_errors"))?,
        };
        match curves.iter_mut().find(|c| c.cqi_index == cqi) {
            Some(c) => c.points.push(point),
            None => curves.push(BlerCurve {
                cqi_index: cqi,
                points: vec![point],
            }),
        }
    }
    Ok(curves)
}

// ---------------------------------------------------------------------------
// bler
// ---------------------------------------------------------------------------

/// CQI selection for the curve command.
#[derive(Debug, Clone, PartialEq)]
pub enum CqiSelection {
    All,
    Some(Vec<u8>),
}

impl CqiSelection {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(CqiSelection::All);
        }
        let mut out = Vec::new();
        for part in s.split(',') {
            let idx: u8 = part
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad CQI {part:?}")))?;
            if !(1..=15).contains(&idx) {
                return Err(Error::invalid(format!("CQI {idx} outside 1..=15")));
            }
            out.push(idx);
        }
        if out.is_empty() {
            return Err(Error::invalid("empty CQI selection"));
        }
        out.sort_unstable();
        out.dedup();
        Ok(CqiSelection::Some(out))
    }

    fn indices(&self) -> Vec<u8> {
        match self {
            CqiSelection::All => (1..=15).collect(),
            CqiSelection::Some(v) => v.clone(),
        }
    }
}

/// Generates curves for the selection and writes CSV plus manifest.
pub fn cmd_bler(selection: &CqiSelection, cfg: &LinkSimConfig, out: &Path) -> Result<Vec<BlerCurve>> {
    cfg.validate()?;
    let table = cqi_table();
    let chosen: Vec<_> = selection
        .indices()
        .into_iter()
        .map(|i| table[i as usize - 1])
        .collect();
    let curves = run_bler_all(&chosen, cfg)?;
    write_curves_csv(&curves, out)?;
    let cfg_json = serde_json::to_string(cfg).expect("config serializes");
    let manifest = manifest_for(
        "bler",
        fnv1a_hex(cfg_json.as_bytes()),
        vec![cfg.rng_seed],
        &[],
        &[out],
    );
    write_manifest(out.parent().unwrap_or(Path::new(".")), &manifest)?;
    Ok(curves)
}

// ---------------------------------------------------------------------------
// map-cqi
// ---------------------------------------------------------------------------

/// Builds the LUT (thresholds, MI tables, identity alphas) from curves.
pub fn cmd_map_cqi(curves_path: &Path, target_bler: f64, out: &Path) -> Result<Lut> {
    let curves = read_curves_csv(curves_path)?;
    for want in 1..=15u8 {
        if !curves.iter().any(|c| c.cqi_index == want) {
            return Err(Error::MissingCqi(want));
        }
    }
    let map = build_snr_cqi_map(&curves, target_bler)?;
    let mi_tables = vec![
        build_mi_table(2, default_mi_grid())?,
        build_mi_table(4, default_mi_grid())?,
        build_mi_table(6, default_mi_grid())?,
    ];
    let lut = Lut {
        map,
        mi_tables,
        alphas: (1..=15).map(|c| (c, MiesmParams::default())).collect(),
        seed: 0,
    };
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    lut_save(&lut, out)?;
    let manifest = manifest_for(
        "map-cqi",
        fnv1a_hex(format!("target_bler={target_bler}").as_bytes()),
        vec![],
        &[curves_path],
        &[out],
    );
    write_manifest(out.parent().unwrap_or(Path::new(".")), &manifest)?;
    Ok(lut)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

/// On-disk simulate configuration: the system config plus the seed list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateFileConfig {
    #[serde(default)]
    pub sim: SysimConfig,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
}

fn default_seeds() -> Vec<u64> {
    (1..=10).collect()
}

impl Default for SimulateFileConfig {
    fn default() -> Self {
        SimulateFileConfig {
            sim: SysimConfig::default(),
            seeds: default_seeds(),
        }
    }
}

/// Loads the TOML config, or defaults when `path` is `None`.
pub fn load_simulate_config(path: Option<&Path>) -> Result<SimulateFileConfig> {
    let Some(path) = path else {
        return Ok(SimulateFileConfig::default());
    };
    let resolved = resolve_config_path(path);
    let text = std::fs::read_to_string(&resolved).map_err(|e| Error::MalformedFile {
        path: resolved.display().to_string(),
        reason: e.to_string(),
    })?;
    toml::from_str(&text).map_err(|e| Error::MalformedFile {
        path: resolved.display().to_string(),
        reason: e.to_string(),
    })
}

/// Per-UE throughput rows: scheduler, drop seed, ue, bits per second.
pub fn write_ue_throughput_csv(results: &[DropResult], path: &Path) -> Result<()> {
    let mut out = String::from("scheduler,drop,ue,throughput_bps\n");
    for r in results {
        for (ue, &t) in r.per_ue_throughput_bps.iter().enumerate() {
            out.push_str(&format!("{},{},{},{}\n", r.scheduler.id(), r.seed, ue, t));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads per-UE throughput rows grouped by scheduler id.
pub fn read_ue_throughput_csv(path: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::MalformedFile {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let mut lines = BufReader::new(file).lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header != "scheduler,drop,ue,throughput_bps" {
        return Err(Error::MalformedFile {
            path: path.display().to_string(),
            reason: format!("unexpected header {header:?}"),
        });
    }
    let mut grouped: Vec<(String, Vec<f64>)> = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(Error::MalformedFile {
                path: path.display().to_string(),
                reason: format!("bad row {line:?}"),
            });
        }
        let t: f64 = cols[3].parse().map_err(|_| Error::MalformedFile {
            path: path.display().to_string(),
            reason: format!("bad throughput in {line:?}"),
        })?;
        match grouped.iter_mut().find(|(s, _)| s == cols[0]) {
            Some((_, v)) => v.push(t),
            None => grouped.push((cols[0].to_string(), vec![t])),
        }
    }
    Ok(grouped)
}

/// Runs all configured drops for one scheduler and writes the results
/// directory: per-UE CSV, CDF CSV, percentile summary, manifest.
pub fn cmd_simulate(
    file_cfg: &SimulateFileConfig,
    scheduler: SchedulerKind,
    lut_path: &Path,
    curves_path: &Path,
    out_dir: &Path,
) -> Result<Vec<DropResult>> {
    let loaded = lut_load(lut_path)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    let curves = read_curves_csv(curves_path)?;
    let refs = LinkReferences {
        lut: &loaded.lut,
        curves: &curves,
    };
    file_cfg.sim.validate()?;
    if file_cfg.seeds.is_empty() {
        return Err(Error::invalid("no seeds configured"));
    }
    let results: Vec<DropResult> = file_cfg
        .seeds
        .iter()
        .map(|&seed| run_drop(&file_cfg.sim, &refs, scheduler, seed))
        .collect::<Result<_>>()?;

    std::fs::create_dir_all(out_dir)?;
    let ue_csv = out_dir.join("ue_throughput.csv");
    write_ue_throughput_csv(&results, &ue_csv)?;
    let cdf_csv = out_dir.join("cdf.csv");
    let summary_csv = out_dir.join("percentiles.csv");
    let pooled: Vec<(String, Vec<f64>)> = vec![(
        scheduler.id().to_string(),
        results
            .iter()
            .flat_map(|r| r.per_ue_throughput_bps.iter().copied())
            .collect(),
    )];
    write_cdf_outputs(&pooled, &cdf_csv, &summary_csv)?;

    let manifest = manifest_for(
        "simulate",
        file_cfg.sim.digest(),
        file_cfg.seeds.clone(),
        &[lut_path, curves_path],
        &[&ue_csv, &cdf_csv, &summary_csv],
    );
    write_manifest(out_dir, &manifest)?;
    Ok(results)
}

// ---------------------------------------------------------------------------
// cdf
// ---------------------------------------------------------------------------

/// Writes the pooled CDF staircase and the three-point percentile summary
/// (50, 95, 100) per scheduler, plus the Jain index for context.
pub fn write_cdf_outputs(
    grouped: &[(String, Vec<f64>)],
    cdf_path: &Path,
    summary_path: &Path,
) -> Result<()> {
    let mut cdf_out = String::from("scheduler,throughput_bps,cdf\n");
    let mut summary_out = String::from("scheduler,percentile,throughput_bps\n");
    for (scheduler, values) in grouped {
        let cdf = EmpiricalCdf::new(values)?;
        for (x, p) in cdf.points() {
            cdf_out.push_str(&format!("{scheduler},{x},{p}\n"));
        }
        for pct in [50.0, 95.0, 100.0] {
            let v = cdf.percentile(pct)?;
            summary_out.push_str(&format!("{scheduler},{pct},{v}\n"));
        }
    }
    std::fs::write(cdf_path, cdf_out)?;
    std::fs::write(summary_path, summary_out)?;
    Ok(())
}

/// Pools one or more per-UE result files and writes CDF plus summary.
pub fn cmd_cdf(result_paths: &[PathBuf], out_dir: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    if result_paths.is_empty() {
        return Err(Error::invalid("no result files given"));
    }
    let mut grouped: Vec<(String, Vec<f64>)> = Vec::new();
    for path in result_paths {
        for (scheduler, mut values) in read_ue_throughput_csv(path)? {
            match grouped.iter_mut().find(|(s, _)| *s == scheduler) {
                Some((_, v)) => v.append(&mut values),
                None => grouped.push((scheduler, values)),
            }
        }
    }
    std::fs::create_dir_all(out_dir)?;
    let cdf_csv = out_dir.join("cdf.csv");
    let summary_csv = out_dir.join("percentiles.csv");
    write_cdf_outputs(&grouped, &cdf_csv, &summary_csv)?;

    // Human-readable digest on stdout: three CDF points and fairness.
    let mut stdout = std::io::stdout();
    for (scheduler, values) in &grouped {
        let cdf = EmpiricalCdf::new(values)?;
        writeln!(
            stdout,
            "{scheduler}: p50 {:.3} Mbps, p95 {:.3} Mbps, max {:.3} Mbps, jain {:.3}",
            cdf.percentile(50.0)? / 1e6,
            cdf.percentile(95.0)? / 1e6,
            cdf.max() / 1e6,
            jain_index(values)?
        )?;
    }

    let inputs: Vec<&Path> = result_paths.iter().map(PathBuf::as_path).collect();
    let manifest = manifest_for(
        "cdf",
        fnv1a_hex(b"cdf"),
        vec![],
        &inputs,
        &[&cdf_csv, &summary_csv],
    );
    write_manifest(out_dir, &manifest)?;
    Ok(grouped)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cqi_selection_parsing() {
        assert_eq!(CqiSelection::parse("all").unwrap(), CqiSelection::All);
        assert_eq!(
            CqiSelection::parse("3,1,3").unwrap(),
            CqiSelection::Some(vec![1, 3])
        );
        assert!(CqiSelection::parse("16").is_err());
        assert!(CqiSelection::parse("0").is_err());
        assert!(CqiSelection::parse("x").is_err());
    }

    #[test]
    fn curves_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curves.csv");
        let curves = vec![BlerCurve {
            cqi_index: 2,
            points: vec![
                BlerPoint {
                    snr_db: -1.5,
                    bler: 0.25,
                    n_blocks: 400,
                    n_errors: 100,
                },
                BlerPoint {
                    snr_db: -1.0,
                    bler: 0.0625,
                    n_blocks: 800,
                    n_errors: 50,
                },
            ],
        }];
        write_curves_csv(&curves, &path).unwrap();
        assert_eq!(read_curves_csv(&path).unwrap(), curves);
    }

    #[test]
    fn curves_csv_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "wrong,header\n").unwrap();
        assert!(read_curves_csv(&path).is_err());
        std::fs::write(&path, "cqi,snr_db,bler,n_blocks,n_errors\n1,x,0,1,0\n").unwrap();
        assert!(read_curves_csv(&path).is_err());
    }

    #[test]
    fn simulate_config_defaults_and_partial_toml() {
        let cfg = load_simulate_config(None).unwrap();
        assert_eq!(cfg.seeds, (1..=10).collect::<Vec<_>>());
        assert_eq!(cfg.sim.n_subframes, 2000);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sim.cfg");
        std::fs::write(
            &path,
            "seeds = [5, 6]\n\n[sim]\nn_subframes = 100\nfeedback_delay_subframes = 1\n",
        )
        .unwrap();
        let cfg = load_simulate_config(Some(&path)).unwrap();
        assert_eq!(cfg.seeds, vec![5, 6]);
        assert_eq!(cfg.sim.n_subframes, 100);
        assert_eq!(cfg.sim.feedback_delay_subframes, 1);
        // Unspecified fields keep their defaults.
        assert_eq!(cfg.sim.layout.n_ues, 20);
    }

    #[test]
    fn config_search_path_env_resolves_bare_names() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("findme.cfg"), "seeds = [9]\n").unwrap();
        std::env::set_var(CONFIG_PATH_ENV, dir.path());
        let resolved = resolve_config_path(Path::new("findme.cfg"));
        std::env::remove_var(CONFIG_PATH_ENV);
        assert_eq!(resolved, dir.path().join("findme.cfg"));
    }

    #[test]
    fn ue_throughput_round_trip_and_grouping() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ue.csv");
        let results = vec![
            DropResult {
                scheduler: SchedulerKind::RoundRobin,
                seed: 1,
                config_digest: "x".into(),
                per_ue_throughput_bps: vec![1e6, 2e6],
                cell_served_bits: 3000,
            },
            DropResult {
                scheduler: SchedulerKind::RoundRobin,
                seed: 2,
                config_digest: "x".into(),
                per_ue_throughput_bps: vec![3e6],
                cell_served_bits: 3000,
            },
        ];
        write_ue_throughput_csv(&results, &path).unwrap();
        let grouped = read_ue_throughput_csv(&path).unwrap();
        assert_eq!(grouped.len(), 1);
        assert_eq!(grouped[0].0, "rr");
        assert_eq!(grouped[0].1, vec![1e6, 2e6, 3e6]);
    }

    #[test]
    fn manifest_timestamp_honors_source_date_epoch() {
        std::env::set_var("SOURCE_DATE_EPOCH", "1234567");
        let m = manifest_for("bler", "d".into(), vec![1], &[], &[]);
        std::env::remove_var("SOURCE_DATE_EPOCH");
        assert_eq!(m.generated_at, 1234567);
        assert_eq!(m.tool_version, TOOL_VERSION);
    }
}

//! Plain-text persistence of the link-to-system lookup tables.
//!
//! One file carries the SNR-to-CQI thresholds, the per-modulation MI tables,
//! and the per-CQI alpha pairs, behind a versioned header with a content
//! digest. Floats are written in shortest round-trip form so a save/load
//! cycle reproduces the values exactly.

use std::fmt::Write as _;
use std::path::Path;

use super::{MiTable, MiesmParams, SnrCqiMap, SnrGrid};
use crate::error::{Error, Result};

const FORMAT_VERSION: &str = "dlsim-lut v1";

/// Everything the system level needs from the link level.
#[derive(Debug, Clone, PartialEq)]
pub struct Lut {
    pub map: SnrCqiMap,
    pub mi_tables: Vec<MiTable>,
    pub alphas: Vec<(u8, MiesmParams)>,
    /// Seed of the generating link-level run.
    pub seed: u64,
}

/// A loaded LUT plus any non-fatal findings (digest mismatch).
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedLut {
    pub lut: Lut,
    pub warnings: Vec<String>,
}

impl Lut {
    /// MI table for a modulation order.
    pub fn mi_table(&self, modulation_bits: u8) -> Result<&MiTable> {
        self.mi_tables
            .iter()
            .find(|t| t.modulation_bits == modulation_bits)
            .ok_or_else(|| {
                Error::invalid(format!("no MI table for modulation order {modulation_bits}"))
            })
    }

    /// Alpha pair for a CQI, identity when unlisted.
    pub fn alpha(&self, cqi_index: u8) -> MiesmParams {
        self.alphas
            .iter()
            .find(|&&(c, _)| c == cqi_index)
            .map(|&(_, p)| p)
            .unwrap_or_default()
    }
}

fn fnv1a(content: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in content.as_bytes() {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn render_body(lut: &Lut) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "seed={}", lut.seed);
    let _ = writeln!(s, "[thresholds]");
    let _ = writeln!(s, "target_bler={}", lut.map.target_bler);
    let _ = writeln!(s, "cqi,snr_db");
    for &(cqi, thr) in &lut.map.thresholds {
        let _ = writeln!(s, "{cqi},{thr}");
    }
    for t in &lut.mi_tables {
        let _ = writeln!(s, "[mi_table]");
        let _ = writeln!(s, "modulation_bits={}", t.modulation_bits);
        let _ = writeln!(
            s,
            "grid={},{},{}",
            t.grid.start_db, t.grid.step_db, t.grid.n_points
        );
        let values: Vec<String> = t.mi.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "mi={}", values.join(","));
    }
    let _ = writeln!(s, "[alphas]");
    let _ = writeln!(s, "cqi,alpha1,alpha2");
    for &(cqi, p) in &lut.alphas {
        let _ = writeln!(s, "{cqi},{},{}", p.alpha1, p.alpha2);
    }
    s
}

/// Writes the LUT to `path`.
pub fn lut_save(lut: &Lut, path: impl AsRef<Path>) -> Result<()> {
    let body = render_body(lut);
    let digest = fnv1a(&body);
    let text = format!("{FORMAT_VERSION}\ndigest={digest:016x}\n{body}");
    std::fs::write(path, text)?;
    Ok(())
}

struct Parser<'a> {
    lines: std::iter::Peekable<std::str::Lines<'a>>,
    path: String,
}

impl<'a> Parser<'a> {
    fn fail(&self, reason: impl Into<String>) -> Error {
        Error::MalformedFile {
            path: self.path.clone(),
            reason: reason.into(),
        }
    }

    fn expect_kv(&mut self, key: &str) -> Result<String> {
        let line = self
            .lines
            .next()
            .ok_or_else(|| self.fail(format!("missing {key}")))?;
        line.strip_prefix(&format!("{key}="))
            .map(str::to_string)
            .ok_or_else(|| self.fail(format!("expected {key}=..., found {line:?}")))
    }
}

/// Reads a LUT back. A digest mismatch is recorded as a warning, not an
/// error; an unknown format version or malformed body is fatal.
pub fn lut_load(path: impl AsRef<Path>) -> Result<LoadedLut> {
    let path_str = path.as_ref().display().to_string();
    let text = std::fs::read_to_string(&path)?;
    let mut warnings = Vec::new();

    let (header, rest) = text.split_once('\n').ok_or_else(|| Error::MalformedFile {
        path: path_str.clone(),
        reason: "empty file".into(),
    })?;
    if header != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            path: path_str,
            found: header.to_string(),
            expected: FORMAT_VERSION.to_string(),
        });
    }
    let (digest_line, body) = rest.split_once('\n').ok_or_else(|| Error::MalformedFile {
        path: path_str.clone(),
        reason: "missing digest line".into(),
    })?;
    let declared = digest_line
        .strip_prefix("digest=")
        .ok_or_else(|| Error::MalformedFile {
            path: path_str.clone(),
            reason: "missing digest line".into(),
        })?;
    let actual = format!("{:016x}", fnv1a(body));
    if declared != actual {
        warnings.push(format!(
            "digest mismatch: file declares {declared}, content hashes to {actual}"
        ));
    }

    let mut p = Parser {
        lines: body.lines().peekable(),
        path: path_str,
    };

    let seed: u64 = p
        .expect_kv("seed")?
        .parse()
        .map_err(|e| p.fail(format!("bad seed: {e}")))?;

    if p.lines.next() != Some("[thresholds]") {
        return Err(p.fail("expected [thresholds] section"));
    }
    let target_bler: f64 = p
        .expect_kv("target_bler")?
        .parse()
        .map_err(|e| p.fail(format!("bad target_bler: {e}")))?;
    if p.lines.next() != Some("cqi,snr_db") {
        return Err(p.fail("expected thresholds header row"));
    }
    let mut thresholds = Vec::new();
    while let Some(&line) = p.lines.peek() {
        if line.starts_with('[') {
            break;
        }
        p.lines.next();
        let (c, t) = line
            .split_once(',')
            .ok_or_else(|| p.fail(format!("bad threshold row {line:?}")))?;
        let cqi: u8 = c.parse().map_err(|e| p.fail(format!("bad cqi: {e}")))?;
        let thr: f64 = t.parse().map_err(|e| p.fail(format!("bad threshold: {e}")))?;
        thresholds.push((cqi, thr));
    }

    let mut mi_tables = Vec::new();
    while p.lines.peek() == Some(&"[mi_table]") {
        p.lines.next();
        let modulation_bits: u8 = p
            .expect_kv("modulation_bits")?
            .parse()
            .map_err(|e| p.fail(format!("bad modulation_bits: {e}")))?;
        let grid_raw = p.expect_kv("grid")?;
        let parts: Vec<&str> = grid_raw.split(',').collect();
        if parts.len() != 3 {
            return Err(p.fail(format!("bad grid descriptor {grid_raw:?}")));
        }
        let grid = SnrGrid {
            start_db: parts[0]
                .parse()
                .map_err(|e| p.fail(format!("bad grid start: {e}")))?,
            step_db: parts[1]
                .parse()
                .map_err(|e| p.fail(format!("bad grid step: {e}")))?,
            n_points: parts[2]
                .parse()
                .map_err(|e| p.fail(format!("bad grid count: {e}")))?,
        };
        let mi_raw = p.expect_kv("mi")?;
        let mi: Vec<f64> = mi_raw
            .split(',')
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| p.fail(format!("bad mi values: {e}")))?;
        if mi.len() != grid.n_points {
            return Err(p.fail(format!(
                "mi table length {} does not match grid count {}",
                mi.len(),
                grid.n_points
            )));
        }
        mi_tables.push(MiTable {
            modulation_bits,
            grid,
            mi,
        });
    }

    if p.lines.next() != Some("[alphas]") {
        return Err(p.fail("expected [alphas] section"));
    }
    if p.lines.next() != Some("cqi,alpha1,alpha2") {
        return Err(p.fail("expected alphas header row"));
    }
    let mut alphas = Vec::new();
    while let Some(line) = p.lines.next() {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(p.fail(format!("bad alpha row {line:?}")));
        }
        let cqi: u8 = cols[0].parse().map_err(|e| p.fail(format!("bad cqi: {e}")))?;
        let alpha1: f64 = cols[1]
            .parse()
            .map_err(|e| p.fail(format!("bad alpha1: {e}")))?;
        let alpha2: f64 = cols[2]
            .parse()
            .map_err(|e| p.fail(format!("bad alpha2: {e}")))?;
        alphas.push((cqi, MiesmParams { alpha1, alpha2 }));
    }

    Ok(LoadedLut {
        lut: Lut {
            map: SnrCqiMap {
                thresholds,
                target_bler,
            },
            mi_tables,
            alphas,
            seed,
        },
        warnings,
    })
}

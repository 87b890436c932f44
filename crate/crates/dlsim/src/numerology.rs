//! Downlink resource-grid constants and the CQI/MCS table.
//!
//! Everything else in the crate consults this module for the grid arithmetic
//! (how many data symbols fit in a resource-block pair) and for the 15-entry
//! table mapping CQI indices to modulation order, code rate, and spectral
//! efficiency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// OFDMA downlink resource-grid parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    /// Total system bandwidth in Hz.
    pub bandwidth_hz: f64,
    /// Subcarriers per resource block.
    pub subcarriers_per_rb: u32,
    /// Number of resource blocks across the band.
    pub n_rb: u32,
    /// Subcarrier spacing in Hz.
    pub subcarrier_spacing_hz: f64,
    /// OFDM symbols per slot (normal cyclic prefix).
    pub symbols_per_slot: u32,
    /// Slots per subframe.
    pub slots_per_subframe: u32,
    /// Subframes per frame.
    pub subframes_per_frame: u32,
    /// Subframe duration in seconds.
    pub subframe_duration_s: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            bandwidth_hz: 20e6,
            subcarriers_per_rb: 12,
            n_rb: 100,
            subcarrier_spacing_hz: 15e3,
            symbols_per_slot: 7,
            slots_per_subframe: 2,
            subframes_per_frame: 10,
            subframe_duration_s: 1e-3,
        }
    }
}

impl GridConfig {
    /// Checks the structural invariants (occupied spectrum fits the band,
    /// all counts positive).
    pub fn validate(&self) -> Result<()> {
        let occupied =
            self.n_rb as f64 * self.subcarriers_per_rb as f64 * self.subcarrier_spacing_hz;
        if occupied > self.bandwidth_hz {
            return Err(Error::invalid(format!(
                "occupied spectrum {occupied} Hz exceeds bandwidth {} Hz",
                self.bandwidth_hz
            )));
        }
        if self.subcarriers_per_rb == 0
            || self.n_rb == 0
            || self.symbols_per_slot == 0
            || self.slots_per_subframe == 0
            || self.subframes_per_frame == 0
        {
            return Err(Error::invalid("grid counts must be strictly positive"));
        }
        if self.subframe_duration_s <= 0.0 || self.subcarrier_spacing_hz <= 0.0 {
            return Err(Error::invalid("grid durations must be strictly positive"));
        }
        Ok(())
    }

    /// Occupied bandwidth of one resource block in Hz.
    pub fn rb_bandwidth_hz(&self) -> f64 {
        self.subcarriers_per_rb as f64 * self.subcarrier_spacing_hz
    }
}

/// One row of the CQI/MCS table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CqiEntry {
    /// CQI index, 1..=15.
    pub cqi_index: u8,
    /// Bits per modulation symbol: 2 (QPSK), 4 (16QAM), 6 (64QAM).
    pub modulation_bits: u8,
    /// Effective channel code rate in (0, 1].
    pub code_rate: f64,
    /// Spectral efficiency in information bits per modulation symbol.
    pub efficiency: f64,
}

impl CqiEntry {
    fn new(cqi_index: u8, modulation_bits: u8, num: u32, den: u32) -> Self {
        let code_rate = num as f64 / den as f64;
        CqiEntry {
            cqi_index,
            modulation_bits,
            code_rate,
            efficiency: modulation_bits as f64 * code_rate,
        }
    }
}

/// Code rates as (numerator, denominator) per CQI, QPSK entries first.
///
/// Six QPSK, three 16QAM, six 64QAM entries with rates running from 1/13 up
/// to 14/15. The nine (modulation, rate) anchor formats — QPSK 1/3, 1/2,
/// 2/3, 4/5; 16QAM 1/2, 2/3, 4/5; 64QAM 2/3, 4/5 — all appear; the
/// remaining rates fill the staircase so efficiency rises strictly.
const CQI_RATES: [(u8, u32, u32); 15] = [
    (2, 1, 13),
    (2, 1, 6),
    (2, 1, 3),
    (2, 1, 2),
    (2, 2, 3),
    (2, 4, 5),
    (4, 1, 2),
    (4, 2, 3),
    (4, 4, 5),
    (6, 5, 8),
    (6, 2, 3),
    (6, 3, 4),
    (6, 4, 5),
    (6, 7, 8),
    (6, 14, 15),
];

/// The 15-entry CQI/MCS table.
///
/// Pure: every call returns the same contents. Efficiency is strictly
/// increasing with the index.
pub fn cqi_table() -> Vec<CqiEntry> {
    CQI_RATES
        .iter()
        .enumerate()
        .map(|(i, &(m, num, den))| CqiEntry::new(i as u8 + 1, m, num, den))
        .collect()
}

/// Looks up one table entry by CQI index (1..=15).
pub fn cqi_entry(cqi_index: u8) -> Result<CqiEntry> {
    if !(1..=15).contains(&cqi_index) {
        return Err(Error::invalid(format!(
            "CQI index {cqi_index} outside 1..=15"
        )));
    }
    Ok(cqi_table()[cqi_index as usize - 1])
}

/// Data-bearing modulation symbols in one resource-block pair (one RB over a
/// full subframe), after removing a flat overhead fraction for control and
/// reference signals.
pub fn data_symbols_per_rb_pair(grid: &GridConfig, overhead_fraction: f64) -> Result<u32> {
    if !(0.0..1.0).contains(&overhead_fraction) {
        return Err(Error::invalid(format!(
            "overhead fraction {overhead_fraction} outside [0, 1)"
        )));
    }
    let raw = grid.subcarriers_per_rb as f64
        * grid.symbols_per_slot as f64
        * grid.slots_per_subframe as f64;
    Ok((raw * (1.0 - overhead_fraction)).floor() as u32)
}

/// Transport-block size in bits for `n_rb_allocated` resource blocks over one
/// subframe at the given MCS.
pub fn tb_bits(
    cqi: &CqiEntry,
    n_rb_allocated: u32,
    grid: &GridConfig,
    overhead_fraction: f64,
) -> Result<u64> {
    if n_rb_allocated == 0 {
        return Err(Error::invalid("allocation of zero resource blocks"));
    }
    if n_rb_allocated > grid.n_rb {
        return Err(Error::invalid(format!(
            "allocation of {n_rb_allocated} RBs exceeds grid size {}",
            grid.n_rb
        )));
    }
    let symbols = data_symbols_per_rb_pair(grid, overhead_fraction)? as f64;
    Ok((n_rb_allocated as f64 * symbols * cqi.efficiency).floor() as u64)
}

/// Default overhead fraction budgeted for control and reference symbols.
pub const DEFAULT_OVERHEAD_FRACTION: f64 = 0.25;

/// Writes the CQI table as CSV (`cqi,modulation_bits,code_rate,efficiency`).
pub fn write_cqi_table_csv(mut w: impl std::io::Write) -> Result<()> {
    writeln!(w, "cqi,modulation_bits,code_rate,efficiency")?;
    for e in cqi_table() {
        writeln!(
            w,
            "{},{},{:.6},{:.6}",
            e.cqi_index, e.modulation_bits, e.code_rate, e.efficiency
        )?;
    }
    Ok(())
}

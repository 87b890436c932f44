//! Per-modulation mutual-information tables.
//!
//! BICM mutual information of the Gray-mapped constellations over AWGN,
//! computed by tensor Gauss-Hermite quadrature (deterministic and smooth,
//! which keeps the table invertible). A Monte Carlo route with the same
//! definition lives in the tests as the independent oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linksim::modulation::constellation;

/// 20-point Gauss-Hermite rule (physicists' convention), positive half.
/// Full rule is symmetric: nodes +-x with equal weights.
const GH_NODES: [f64; 10] = [
    0.245_340_708_300_901_1,
    0.737_473_728_545_394_3,
    1.234_076_215_395_323_4,
    1.738_537_712_116_586_2,
    2.254_974_002_089_276_3,
    2.788_806_058_428_130_5,
    3.347_854_567_383_216_3,
    3.944_764_040_115_625_3,
    4.603_682_449_550_744_5,
    5.387_480_890_011_232_9,
];
const GH_WEIGHTS: [f64; 10] = [
    4.622_436_696_006_1e-1,
    2.866_755_053_628_34e-1,
    1.090_172_060_200_233e-1,
    2.481_052_088_746_361e-2,
    3.243_773_342_237_861e-3,
    2.283_386_360_163_528e-4,
    7.802_556_478_532_063e-6,
    1.086_069_370_769_28e-7,
    4.399_340_992_273_176e-10,
    2.229_393_645_534_151e-13,
];

fn gh_rule() -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(20);
    let mut weights = Vec::with_capacity(20);
    for i in (0..10).rev() {
        nodes.push(-GH_NODES[i]);
        weights.push(GH_WEIGHTS[i]);
    }
    for i in 0..10 {
        nodes.push(GH_NODES[i]);
        weights.push(GH_WEIGHTS[i]);
    }
    (nodes, weights)
}

/// Uniform SNR grid descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrGrid {
    pub start_db: f64,
    pub step_db: f64,
    pub n_points: usize,
}

impl SnrGrid {
    pub fn snr_at(&self, i: usize) -> f64 {
        self.start_db + self.step_db * i as f64
    }

    pub fn end_db(&self) -> f64 {
        self.snr_at(self.n_points - 1)
    }
}

/// Default MI grid: -25 to +35 dB in 0.25 dB steps.
pub fn default_mi_grid() -> SnrGrid {
    SnrGrid {
        start_db: -25.0,
        step_db: 0.25,
        n_points: 241,
    }
}

/// Mutual-information samples for one modulation order on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiTable {
    pub modulation_bits: u8,
    pub grid: SnrGrid,
    /// MI in bits per symbol at each grid point; non-decreasing, within
    /// [0, modulation_bits], endpoints clamped to the limits.
    pub mi: Vec<f64>,
}

/// BICM mutual information at one SNR by Gauss-Hermite quadrature.
pub fn bicm_mi(modulation_bits: usize, snr_db: f64) -> Result<f64> {
    let points = constellation(modulation_bits)?;
    let m = modulation_bits;
    let n_sym = points.len();
    let sigma2 = 10f64.powf(-snr_db / 10.0);
    let sigma = sigma2.sqrt();
    let (nodes, weights) = gh_rule();

    let mut loss_total = 0.0;
    let mut d2 = vec![0.0f64; n_sym];
    for (s_idx, &s) in points.iter().enumerate() {
        for (&xr, &wr) in nodes.iter().zip(weights.iter()) {
            for (&xi, &wi) in nodes.iter().zip(weights.iter()) {
                let y_re = s.re + sigma * xr;
                let y_im = s.im + sigma * xi;
                let mut dmin = f64::INFINITY;
                for (c_idx, c) in points.iter().enumerate() {
                    let dr = y_re - c.re;
                    let di = y_im - c.im;
                    let d = (dr * dr + di * di) / sigma2;
                    d2[c_idx] = d;
                    dmin = dmin.min(d);
                }
                let exps: Vec<f64> = d2.iter().map(|&d| (-(d - dmin)).exp()).collect();
                let denom_all: f64 = exps.iter().sum();
                let w = wr * wi / std::f64::consts::PI;
                for k in 0..m {
                    let bit = (s_idx >> (m - 1 - k)) & 1;
                    let num: f64 = exps
                        .iter()
                        .enumerate()
                        .filter(|(c_idx, _)| (c_idx >> (m - 1 - k)) & 1 == bit)
                        .map(|(_, &e)| e)
                        .sum();
                    loss_total += w * (denom_all / num).log2();
                }
            }
        }
    }
    let loss = loss_total / n_sym as f64;
    Ok((m as f64 - loss).clamp(0.0, m as f64))
}

/// Builds the MI table for one modulation order over `grid`.
///
/// The grid must span at least [-20, +30] dB so the table reaches both
/// saturation limits. Samples are forced non-decreasing and the endpoints
/// are clamped to 0 and the modulation order.
pub fn build_mi_table(modulation_bits: usize, grid: SnrGrid) -> Result<MiTable> {
    if grid.n_points < 2 || grid.step_db <= 0.0 {
        return Err(Error::invalid("MI grid needs at least two increasing points"));
    }
    if grid.start_db > -20.0 || grid.end_db() < 30.0 {
        return Err(Error::invalid(format!(
            "MI grid [{}, {}] must span at least [-20, +30] dB",
            grid.start_db,
            grid.end_db()
        )));
    }
    let mut mi = Vec::with_capacity(grid.n_points);
    for i in 0..grid.n_points {
        mi.push(bicm_mi(modulation_bits, grid.snr_at(i))?);
    }
    // Quadrature noise can leave microscopic dips; force monotone.
    for i in 1..mi.len() {
        if mi[i] < mi[i - 1] {
            mi[i] = mi[i - 1];
        }
    }
    mi[0] = 0.0;
    let last = mi.len() - 1;
    mi[last] = modulation_bits as f64;
    Ok(MiTable {
        modulation_bits: modulation_bits as u8,
        grid,
        mi,
    })
}

impl MiTable {
    /// MI at an arbitrary SNR by linear interpolation, clamped at the ends.
    pub fn mi_at(&self, snr_db: f64) -> f64 {
        let g = &self.grid;
        if snr_db <= g.start_db {
            return self.mi[0];
        }
        if snr_db >= g.end_db() {
            return self.mi[self.mi.len() - 1];
        }
        let pos = (snr_db - g.start_db) / g.step_db;
        let i = pos.floor() as usize;
        let t = pos - i as f64;
        self.mi[i] + t * (self.mi[i + 1] - self.mi[i])
    }

    /// Inverse of [`MiTable::mi_at`]: the SNR where the table reaches `mi`.
    ///
    /// `mi` must lie strictly inside (0, modulation_bits); the saturation
    /// limits have no finite preimage.
    pub fn mi_inverse(&self, mi: f64) -> Result<f64> {
        let max = self.modulation_bits as f64;
        if !(mi > 0.0 && mi < max) {
            return Err(Error::invalid(format!(
                "MI {mi} at or outside the open interval (0, {max})"
            )));
        }
        // First index with mi[i] >= target; table is non-decreasing.
        let idx = self.mi.partition_point(|&v| v < mi);
        if idx == 0 {
            return Ok(self.grid.start_db);
        }
        let (lo, hi) = (self.mi[idx - 1], self.mi[idx]);
        let t = if hi > lo { (mi - lo) / (hi - lo) } else { 0.0 };
        Ok(self.grid.snr_at(idx - 1) + t * self.grid.step_db)
    }
}

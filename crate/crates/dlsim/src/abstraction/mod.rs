//! Link-to-system interface: effective-SINR mappings, the SNR-to-CQI map,
//! and LUT persistence.
//!
//! The mutual-information mapping compresses a vector of per-RB SINRs into
//! one AWGN-equivalent SINR by averaging per-RB MI and inverting the MI
//! function; the exponential mapping does the same with an exponential
//! kernel. Per-CQI (alpha1, alpha2) pairs carry code-specific correction and
//! default to (1, 1), which is exact on AWGN.

pub mod lut;
mod mi;

pub use lut::{lut_load, lut_save, Lut};
pub use mi::{bicm_mi, build_mi_table, default_mi_grid, MiTable, SnrGrid};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linksim::BlerCurve;

fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Per-CQI correction pair for the MI mapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiesmParams {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl Default for MiesmParams {
    fn default() -> Self {
        MiesmParams {
            alpha1: 1.0,
            alpha2: 1.0,
        }
    }
}

impl MiesmParams {
    pub fn validate(&self) -> Result<()> {
        if self.alpha1 <= 0.0 || self.alpha2 <= 0.0 {
            return Err(Error::invalid("alpha parameters must be strictly positive"));
        }
        Ok(())
    }
}

/// Mutual-information effective SINR over per-RB SINRs (dB in, dB out).
///
/// effective = alpha1 * I^-1( mean_p I(SINR_p / alpha2) ), with the alpha
/// scalings applied in linear power.
pub fn miesm(per_rb_sinr_db: &[f64], params: &MiesmParams, table: &MiTable) -> Result<f64> {
    if per_rb_sinr_db.is_empty() {
        return Err(Error::invalid("effective SINR of an empty set"));
    }
    params.validate()?;
    let alpha2_db = lin_to_db(params.alpha2);
    let mean_mi = per_rb_sinr_db
        .iter()
        .map(|&s| table.mi_at(s - alpha2_db))
        .sum::<f64>()
        / per_rb_sinr_db.len() as f64;
    // Stay inside the invertible open interval; the clamp only engages when
    // every input sits beyond the table's saturation.
    let max = table.modulation_bits as f64;
    let eps = 1e-9;
    let clamped = mean_mi.clamp(eps, max - eps);
    let inv_db = table.mi_inverse(clamped)?;
    Ok(inv_db + lin_to_db(params.alpha1))
}

/// Exponential effective SINR over per-RB SINRs (dB in, dB out).
pub fn eesm(per_rb_sinr_db: &[f64], beta: f64) -> Result<f64> {
    if per_rb_sinr_db.is_empty() {
        return Err(Error::invalid("effective SINR of an empty set"));
    }
    if beta <= 0.0 {
        return Err(Error::invalid(format!("beta {beta} must be positive")));
    }
    let mean = per_rb_sinr_db
        .iter()
        .map(|&s| (-db_to_lin(s) / beta).exp())
        .sum::<f64>()
        / per_rb_sinr_db.len() as f64;
    Ok(lin_to_db(-beta * mean.ln()))
}

/// Per-CQI SNR thresholds at the target BLER.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrCqiMap {
    /// (cqi_index, threshold dB), ascending in both.
    pub thresholds: Vec<(u8, f64)>,
    pub target_bler: f64,
}

/// Extracts the target-BLER crossing of one curve by interpolating
/// log10(BLER) linearly between the bracketing samples.
pub fn curve_crossing(curve: &BlerCurve, target_bler: f64) -> Result<f64> {
    if !(0.0 < target_bler && target_bler < 1.0) {
        return Err(Error::invalid(format!(
            "target BLER {target_bler} outside (0, 1)"
        )));
    }
    let pts = &curve.points;
    let log_t = target_bler.log10();
    // Floor zero-BLER samples at half an error over their block count so the
    // log interpolation stays finite.
    let floored = |p: &crate::linksim::BlerPoint| p.bler.max(0.5 / p.n_blocks.max(1) as f64);
    for w in pts.windows(2) {
        if w[0].bler >= target_bler && w[1].bler < target_bler {
            let la = floored(&w[0]).log10();
            let lb = floored(&w[1]).log10();
            let t = if la > lb { (la - log_t) / (la - lb) } else { 0.0 };
            return Ok(w[0].snr_db + t * (w[1].snr_db - w[0].snr_db));
        }
    }
    Err(Error::invalid(format!(
        "curve for CQI {} never crosses BLER {target_bler}",
        curve.cqi_index
    )))
}

/// Builds the SNR-to-CQI map from the 15 reference curves.
pub fn build_snr_cqi_map(curves: &[BlerCurve], target_bler: f64) -> Result<SnrCqiMap> {
    let mut thresholds = Vec::with_capacity(curves.len());
    for curve in curves {
        thresholds.push((curve.cqi_index, curve_crossing(curve, target_bler)?));
    }
    thresholds.sort_by_key(|&(c, _)| c);
    for w in thresholds.windows(2) {
        if w[1].1 <= w[0].1 {
            return Err(Error::invalid(format!(
                "thresholds not strictly increasing: CQI {} at {:.2} dB vs CQI {} at {:.2} dB",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
    }
    Ok(SnrCqiMap {
        thresholds,
        target_bler,
    })
}

impl SnrCqiMap {
    /// Largest CQI whose threshold is at or below the effective SINR;
    /// 0 when even the lowest CQI is unsupported (outage).
    pub fn sinr_to_cqi(&self, effective_sinr_db: f64) -> u8 {
        let mut best = 0;
        for &(cqi, thr) in &self.thresholds {
            if effective_sinr_db >= thr {
                best = cqi;
            } else {
                break;
            }
        }
        best
    }

    /// Threshold for one CQI index.
    pub fn threshold(&self, cqi_index: u8) -> Result<f64> {
        self.thresholds
            .iter()
            .find(|&&(c, _)| c == cqi_index)
            .map(|&(_, t)| t)
            .ok_or(Error::MissingCqi(cqi_index))
    }
}

/// One fading observation for calibration: the per-RB SINRs the mapping will
/// compress, and the block error rate measured on that realization.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingSample {
    pub per_rb_sinr_db: Vec<f64>,
    pub measured_bler: f64,
}

/// Fits per-CQI (alpha1, alpha2) by grid search, minimizing the squared
/// error between the BLER predicted from the AWGN reference curve at the
/// mapped effective SINR and the measured BLER of each fading sample.
///
/// With flat (AWGN-like) samples the identity pair (1, 1) is exact, and ties
/// resolve toward it.
pub fn calibrate_alphas(
    curve: &BlerCurve,
    table: &MiTable,
    samples: &[FadingSample],
) -> Result<MiesmParams> {
    if samples.is_empty() {
        return Err(Error::invalid("no calibration samples"));
    }
    let grid: Vec<f64> = (-10..=10).map(|i| db_to_lin(0.2 * i as f64)).collect();
    let mut best = MiesmParams::default();
    let mut best_err = f64::INFINITY;
    for &a1 in &grid {
        for &a2 in &grid {
            let params = MiesmParams {
                alpha1: a1,
                alpha2: a2,
            };
            let mut err = 0.0;
            for s in samples {
                let eff = miesm(&s.per_rb_sinr_db, &params, table)?;
                let predicted = curve.bler_at(eff);
                let d = predicted - s.measured_bler;
                err += d * d;
            }
            let dist = (a1.ln().powi(2) + a2.ln().powi(2)).sqrt();
            let best_dist = (best.alpha1.ln().powi(2) + best.alpha2.ln().powi(2)).sqrt();
            if err + 1e-12 < best_err || (err <= best_err + 1e-12 && dist < best_dist) {
                best_err = err;
                best = params;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linksim::BlerPoint;

    fn qpsk_table() -> MiTable {
        build_mi_table(2, default_mi_grid()).unwrap()
    }

    #[test]
    fn miesm_single_input_identity() {
        let t = qpsk_table();
        let p = MiesmParams::default();
        for s in [-5.0, 0.0, 3.7, 8.0] {
            let eff = miesm(&[s], &p, &t).unwrap();
            assert!((eff - s).abs() < 0.05, "{s} -> {eff}");
        }
    }

    #[test]
    fn miesm_flat_input_identity() {
        let t = qpsk_table();
        let p = MiesmParams::default();
        let eff = miesm(&[4.0; 12], &p, &t).unwrap();
        assert!((eff - 4.0).abs() < 0.05);
    }

    #[test]
    fn miesm_two_tone_golden() {
        // Independent quadrature oracle: inputs {0, 10} dB map to 3.272 dB.
        let t = qpsk_table();
        let p = MiesmParams::default();
        let eff = miesm(&[0.0, 10.0], &p, &t).unwrap();
        assert!((eff - 3.272).abs() < 0.1, "eff {eff}");
        assert!(eff > 0.0 && eff < 10.0);
        assert!(eff < 6.5); // below the linear-power average
    }

    #[test]
    fn miesm_rejects_empty_and_bad_alpha() {
        let t = qpsk_table();
        assert!(miesm(&[], &MiesmParams::default(), &t).is_err());
        let bad = MiesmParams {
            alpha1: 0.0,
            alpha2: 1.0,
        };
        assert!(miesm(&[1.0], &bad, &t).is_err());
    }

    #[test]
    fn eesm_identities_and_golden() {
        assert!((eesm(&[7.3], 2.0).unwrap() - 7.3).abs() < 1e-9);
        assert!((eesm(&[5.0; 8], 3.0).unwrap() - 5.0).abs() < 1e-9);
        // Closed form for {0, 10} dB at beta = 1: 2.2866 dB.
        let eff = eesm(&[0.0, 10.0], 1.0).unwrap();
        assert!((eff - 2.2866).abs() < 1e-3, "eff {eff}");
        assert!(eesm(&[], 1.0).is_err());
        assert!(eesm(&[1.0], 0.0).is_err());
    }

    fn synthetic_curve(cqi: u8, mid_db: f64) -> BlerCurve {
        // Clean log-linear ramp from BLER 1 down to 1e-3 around mid_db.
        let points = (-4..=4)
            .map(|i| {
                let snr = mid_db + 0.5 * i as f64;
                let bler = 10f64.powf((-1.0 - 0.5 * i as f64).min(0.0)).min(1.0);
                BlerPoint {
                    snr_db: snr,
                    bler,
                    n_blocks: 10_000,
                    n_errors: (bler * 10_000.0) as u64,
                }
            })
            .collect();
        BlerCurve {
            cqi_index: cqi,
            points,
        }
    }

    #[test]
    fn crossing_golden_hand_computed() {
        let curve = BlerCurve {
            cqi_index: 3,
            points: vec![
                BlerPoint {
                    snr_db: 0.0,
                    bler: 0.2,
                    n_blocks: 1000,
                    n_errors: 200,
                },
                BlerPoint {
                    snr_db: 1.0,
                    bler: 0.05,
                    n_blocks: 1000,
                    n_errors: 50,
                },
            ],
        };
        let x = curve_crossing(&curve, 0.1).unwrap();
        assert!((x - 0.5).abs() < 1e-9, "crossing {x}");
    }

    #[test]
    fn crossing_requires_bracketing() {
        let all_high = BlerCurve {
            cqi_index: 1,
            points: vec![
                BlerPoint {
                    snr_db: 0.0,
                    bler: 0.9,
                    n_blocks: 100,
                    n_errors: 90,
                },
                BlerPoint {
                    snr_db: 1.0,
                    bler: 0.5,
                    n_blocks: 100,
                    n_errors: 50,
                },
            ],
        };
        assert!(curve_crossing(&all_high, 0.1).is_err());
    }

    #[test]
    fn map_monotone_staircase() {
        let curves: Vec<BlerCurve> = (1..=15)
            .map(|c| synthetic_curve(c, -8.0 + 2.0 * c as f64))
            .collect();
        let map = build_snr_cqi_map(&curves, 0.1).unwrap();
        assert_eq!(map.thresholds.len(), 15);
        assert_eq!(map.sinr_to_cqi(-100.0), 0);
        assert_eq!(map.sinr_to_cqi(100.0), 15);
        let thr7 = map.threshold(7).unwrap();
        assert_eq!(map.sinr_to_cqi(thr7), 7);
        assert_eq!(map.sinr_to_cqi(thr7 - 1e-9), 6);
        let mut prev = 0;
        let mut seen = std::collections::BTreeSet::new();
        let mut s = -20.0;
        while s <= 30.0 {
            let c = map.sinr_to_cqi(s);
            assert!(c >= prev);
            seen.insert(c);
            prev = c;
            s += 0.05;
        }
        assert_eq!(seen.len(), 16, "every index 0..=15 hit");
    }

    #[test]
    fn map_rejects_non_increasing() {
        let curves = vec![synthetic_curve(1, 0.0), synthetic_curve(2, -2.0)];
        assert!(build_snr_cqi_map(&curves, 0.1).is_err());
    }

    #[test]
    fn calibration_identity_on_flat_samples() {
        let t = qpsk_table();
        let curve = synthetic_curve(4, 0.0);
        let samples: Vec<FadingSample> = (-3..=3)
            .map(|i| {
                let s = i as f64;
                FadingSample {
                    per_rb_sinr_db: vec![s; 6],
                    measured_bler: curve.bler_at(s),
                }
            })
            .collect();
        let fitted = calibrate_alphas(&curve, &t, &samples).unwrap();
        assert!((fitted.alpha1 - 1.0).abs() < 1e-9);
        assert!((fitted.alpha2 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn calibration_recovers_known_alpha() {
        // Build samples whose measured BLER comes from a known alpha pair;
        // the exhaustive grid search is its own oracle here.
        let t = qpsk_table();
        let curve = synthetic_curve(4, 0.0);
        let truth = MiesmParams {
            alpha1: db_to_lin(0.6),
            alpha2: db_to_lin(-0.4),
        };
        let samples: Vec<FadingSample> = (0..24)
            .map(|i| {
                let base = -2.0 + 0.25 * i as f64;
                let rbs = vec![base - 3.0, base, base + 3.0, base + 1.0];
                let eff = miesm(&rbs, &truth, &t).unwrap();
                FadingSample {
                    per_rb_sinr_db: rbs,
                    measured_bler: curve.bler_at(eff),
                }
            })
            .collect();
        let fitted = calibrate_alphas(&curve, &t, &samples).unwrap();
        let step = 0.2;
        assert!(
            (lin_to_db(fitted.alpha1) - 0.6).abs() < step + 1e-9,
            "alpha1 {} dB",
            lin_to_db(fitted.alpha1)
        );
        assert!(
            (lin_to_db(fitted.alpha2) - -0.4).abs() < step + 1e-9,
            "alpha2 {} dB",
            lin_to_db(fitted.alpha2)
        );
        // Fitted error no worse than the identity pair on held-out samples.
        let held_out: Vec<FadingSample> = (0..10)
            .map(|i| {
                let base = -1.9 + 0.4 * i as f64;
                let rbs = vec![base - 2.0, base + 2.0];
                let eff = miesm(&rbs, &truth, &t).unwrap();
                FadingSample {
                    per_rb_sinr_db: rbs,
                    measured_bler: curve.bler_at(eff),
                }
            })
            .collect();
        let sse = |p: &MiesmParams| -> f64 {
            held_out
                .iter()
                .map(|s| {
                    let eff = miesm(&s.per_rb_sinr_db, p, &t).unwrap();
                    let d = curve.bler_at(eff) - s.measured_bler;
                    d * d
                })
                .sum()
        };
        assert!(sse(&fitted) <= sse(&MiesmParams::default()) + 1e-12);
    }
}

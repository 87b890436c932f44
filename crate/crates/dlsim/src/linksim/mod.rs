//! Link-level Monte Carlo engine.
//!
//! Chain per block: checksum append -> turbo encode -> rate match ->
//! modulate -> AWGN -> soft demap -> iterative decode -> block error count.
//! One curve per CQI, fully reproducible from the run seed with
//! schedule-independent parallelism over SNR points.

pub mod modulation;

pub use modulation::{modulate, soft_demap};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerology::CqiEntry;
use crate::rng::task_rng;
use crate::turbo::{self, TurboConfig};

/// Adds circular complex Gaussian noise at the given SNR (unit signal power).
///
/// `snr_db = f64::INFINITY` is the no-noise mode and returns the input.
pub fn awgn(symbols: &[Complex64], snr_db: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    if snr_db.is_infinite() && snr_db > 0.0 {
        return symbols.to_vec();
    }
    let noise_var = 10f64.powf(-snr_db / 10.0);
    let axis_sigma = (noise_var / 2.0).sqrt();
    symbols
        .iter()
        .map(|&s| {
            // Box-Muller pair per symbol.
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen();
            let r = (-2.0 * u1.ln()).sqrt();
            let theta = 2.0 * std::f64::consts::PI * u2;
            s + Complex64::new(
                axis_sigma * r * theta.cos(),
                axis_sigma * r * theta.sin(),
            )
        })
        .collect()
}

/// Monte Carlo controls for one curve run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSimConfig {
    /// SNR points in dB, strictly increasing.
    pub snr_grid_db: Vec<f64>,
    /// Minimum blocks per point.
    pub min_blocks: u64,
    /// Early-stop target: stop once this many block errors are observed
    /// (and `min_blocks` is met).
    pub min_block_errors: u64,
    /// Hard cap on blocks per point.
    pub max_blocks: u64,
    /// Run seed; every (CQI, SNR point) derives its own stream.
    pub rng_seed: u64,
    /// Codec parameters (block length, iterations, polynomials).
    pub turbo: TurboConfig,
    /// Stop the sweep after this many consecutive zero-error points; points
    /// above them stay at BLER 0 and are not simulated. 0 disables.
    pub zero_error_points_to_stop: u32,
}

impl Default for LinkSimConfig {
    fn default() -> Self {
        LinkSimConfig {
            snr_grid_db: default_snr_grid(),
            min_blocks: 200,
            min_block_errors: 50,
            max_blocks: 20_000,
            rng_seed: 1,
            turbo: TurboConfig::default(),
            zero_error_points_to_stop: 2,
        }
    }
}

/// -10 to +22 dB in 0.5 dB steps: brackets all fifteen waterfalls.
pub fn default_snr_grid() -> Vec<f64> {
    (0..=64).map(|i| -10.0 + 0.5 * i as f64).collect()
}

impl LinkSimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("SNR grid must be strictly increasing"));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::invalid("SNR grid is empty"));
        }
        if self.min_blocks < 100 {
            return Err(Error::invalid("min_blocks must be at least 100"));
        }
        if self.min_block_errors < 20 {
            return Err(Error::invalid("min_block_errors must be at least 20"));
        }
        if self.max_blocks < self.min_blocks {
            return Err(Error::invalid("max_blocks below min_blocks"));
        }
        self.turbo.validate()
    }
}

/// One measured point of a BLER curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlerPoint {
    pub snr_db: f64,
    pub bler: f64,
    pub n_blocks: u64,
    pub n_errors: u64,
}

/// BLER-versus-SNR curve for one CQI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlerCurve {
    pub cqi_index: u8,
    pub points: Vec<BlerPoint>,
}

impl BlerCurve {
    /// Reads the curve at an arbitrary SNR by interpolating log10(BLER)
    /// linearly in dB, extending flat beyond the measured range. Zero-BLER
    /// samples are floored at half an error over their block count for the
    /// interpolation.
    pub fn bler_at(&self, snr_db: f64) -> f64 {
        let pts = &self.points;
        assert!(!pts.is_empty(), "empty curve");
        if snr_db <= pts[0].snr_db {
            return pts[0].bler;
        }
        if snr_db >= pts[pts.len() - 1].snr_db {
            return pts[pts.len() - 1].bler;
        }
        let idx = pts.partition_point(|p| p.snr_db <= snr_db);
        let (a, b) = (&pts[idx - 1], &pts[idx]);
        let t = (snr_db - a.snr_db) / (b.snr_db - a.snr_db);
        // The curve passes exactly through its samples.
        if t <= 0.0 {
            return a.bler;
        }
        if t >= 1.0 {
            return b.bler;
        }
        if a.bler == 0.0 && b.bler == 0.0 {
            return 0.0;
        }
        let floor =
            |p: &BlerPoint| p.bler.max(0.5 / p.n_blocks.max(1) as f64);
        let (la, lb) = (floor(a).log10(), floor(b).log10());
        let log_bler = la + t * (lb - la);
        10f64.powf(log_bler).min(1.0)
    }
}

/// Simulates one (CQI, SNR) point; owns an rng derived from the coordinates.
fn simulate_point(cqi: &CqiEntry, cfg: &LinkSimConfig, snr_idx: usize) -> BlerPoint {
    let snr_db = cfg.snr_grid_db[snr_idx];
    let k = cfg.turbo.block_length_k;
    let m = cqi.modulation_bits as usize;
    let rm_len = turbo::rate_matched_len(k, cqi.code_rate);
    // Pad the rate-matched block up to a whole number of symbols by reading
    // further into the circular buffer; the decoder combines the extras.
    let tx_len = rm_len.div_ceil(m) * m;
    let noise_var = 10f64.powf(-snr_db / 10.0);

    let mut rng = task_rng(
        cfg.rng_seed,
        &[0xb1e5, cqi.cqi_index as u64, snr_idx as u64],
    );

    let payload_len = k - turbo::crc::CRC_BITS;
    let mut n_blocks = 0u64;
    let mut n_errors = 0u64;
    loop {
        let payload: Vec<u8> = (0..payload_len).map(|_| rng.gen_range(0..2u8)).collect();
        let info = turbo::crc::append(&payload);
        let block = turbo::encode(&info, &cfg.turbo).expect("configured codec");
        let tx_bits = turbo::rate_match_to(&block, tx_len);
        let symbols = modulate(&tx_bits, m).expect("aligned bits");
        let received = awgn(&symbols, snr_db, &mut rng);
        let llrs = soft_demap(&received, m, noise_var).expect("positive noise");
        let out = turbo::decode_any_len(&llrs, &cfg.turbo).expect("configured codec");

        n_blocks += 1;
        // Known-data mode: a block is in error when the decoded info bits
        // differ from the transmitted ones.
        if out.bits != info {
            n_errors += 1;
        }

        let done_accuracy = n_errors >= cfg.min_block_errors || n_blocks >= cfg.max_blocks;
        let clean_after_min = n_errors == 0 && n_blocks >= cfg.min_blocks;
        if (n_blocks >= cfg.min_blocks && done_accuracy) || clean_after_min {
            break;
        }
    }
    BlerPoint {
        snr_db,
        bler: n_errors as f64 / n_blocks as f64,
        n_blocks,
        n_errors,
    }
}

/// Runs the Monte Carlo sweep for one CQI.
///
/// Points are simulated in parallel chunks in ascending SNR; after a chunk,
/// the sweep stops early once `zero_error_points_to_stop` consecutive
/// zero-error points have been seen (the waterfall is over). The chunk size
/// is fixed, so the output is a pure function of (cfg, cqi).
pub fn run_bler(cqi: &CqiEntry, cfg: &LinkSimConfig) -> Result<BlerCurve> {
    cfg.validate()?;
    const CHUNK: usize = 4;
    let mut points: Vec<BlerPoint> = Vec::with_capacity(cfg.snr_grid_db.len());
    let mut consecutive_clean = 0u32;
    for chunk_start in (0..cfg.snr_grid_db.len()).step_by(CHUNK) {
        let chunk_end = (chunk_start + CHUNK).min(cfg.snr_grid_db.len());
        let chunk: Vec<BlerPoint> = (chunk_start..chunk_end)
            .into_par_iter()
            .map(|i| simulate_point(cqi, cfg, i))
            .collect();
        for p in chunk {
            if cfg.zero_error_points_to_stop > 0
                && consecutive_clean >= cfg.zero_error_points_to_stop
            {
                break;
            }
            consecutive_clean = if p.n_errors == 0 {
                consecutive_clean + 1
            } else {
                0
            };
            points.push(p);
        }
        if cfg.zero_error_points_to_stop > 0 && consecutive_clean >= cfg.zero_error_points_to_stop
        {
            break;
        }
    }
    Ok(BlerCurve {
        cqi_index: cqi.cqi_index,
        points,
    })
}

/// Runs all requested CQIs in parallel.
pub fn run_bler_all(cqis: &[CqiEntry], cfg: &LinkSimConfig) -> Result<Vec<BlerCurve>> {
    cfg.validate()?;
    cqis.par_iter().map(|c| run_bler(c, cfg)).collect()
}

/// Usable capacity in bits per second: symbol rate times spectral efficiency
/// times the delivered fraction.
pub fn max_ue_capacity(
    bandwidth_symbol_rate: f64,
    cqi: &CqiEntry,
    bler: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&bler) {
        return Err(Error::invalid(format!("BLER {bler} outside [0, 1]")));
    }
    Ok(bandwidth_symbol_rate * cqi.efficiency * (1.0 - bler))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerology::{cqi_table, data_symbols_per_rb_pair, GridConfig};

    #[test]
    fn awgn_infinite_snr_is_identity() {
        let syms = vec![Complex64::new(0.3, -0.7); 16];
        let mut rng = task_rng(1, &[]);
        assert_eq!(awgn(&syms, f64::INFINITY, &mut rng), syms);
    }

    #[test]
    fn awgn_noise_variance_matches_snr() {
        let n = 100_000;
        let syms = vec![Complex64::new(0.0, 0.0); n];
        let mut rng = task_rng(2, &[]);
        let noisy = awgn(&syms, 0.0, &mut rng);
        let var: f64 = noisy.iter().map(|s| s.norm_sqr()).sum::<f64>() / n as f64;
        assert!((var - 1.0).abs() < 0.03, "variance {var}");
    }

    #[test]
    fn awgn_deterministic_per_seed() {
        let syms = vec![Complex64::new(1.0, 1.0); 64];
        let a = awgn(&syms, 5.0, &mut task_rng(3, &[7]));
        let b = awgn(&syms, 5.0, &mut task_rng(3, &[7]));
        assert_eq!(a, b);
    }

    #[test]
    fn demapped_hard_decisions_clean_at_high_snr() {
        let mut rng = task_rng(4, &[]);
        let bits: Vec<u8> = (0..10_000 * 2).map(|_| rng.gen_range(0..2u8)).collect();
        let syms = modulate(&bits, 2).unwrap();
        let noise_var = 10f64.powf(-3.0); // 30 dB
        let received = awgn(&syms, 30.0, &mut rng);
        let llrs = soft_demap(&received, 2, noise_var).unwrap();
        let errors = llrs
            .iter()
            .zip(&bits)
            .filter(|(&l, &b)| u8::from(l < 0.0) != b)
            .count();
        assert_eq!(errors, 0);
    }

    fn tiny_cfg(points: Vec<f64>) -> LinkSimConfig {
        LinkSimConfig {
            snr_grid_db: points,
            min_blocks: 100,
            min_block_errors: 20,
            max_blocks: 400,
            rng_seed: 99,
            turbo: TurboConfig {
                block_length_k: 48,
                n_iterations: 6,
                ..TurboConfig::default()
            },
            zero_error_points_to_stop: 0,
        }
    }

    #[test]
    fn run_bler_noiseless_regime() {
        let cqi = cqi_table()[0];
        let curve = run_bler(&cqi, &tiny_cfg(vec![40.0])).unwrap();
        assert_eq!(curve.points.len(), 1);
        assert_eq!(curve.points[0].n_errors, 0);
        assert_eq!(curve.points[0].bler, 0.0);
        assert_eq!(curve.points[0].n_blocks, 100);
    }

    #[test]
    fn run_bler_hopeless_regime() {
        let cqi = cqi_table()[0];
        let curve = run_bler(&cqi, &tiny_cfg(vec![-20.0])).unwrap();
        assert_eq!(curve.points[0].bler, 1.0);
    }

    #[test]
    fn run_bler_reproducible() {
        let cqi = cqi_table()[3];
        let cfg = tiny_cfg(vec![-2.0, 0.0, 2.0]);
        let a = run_bler(&cqi, &cfg).unwrap();
        let b = run_bler(&cqi, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_validation_rejects_bad_grid() {
        let mut cfg = tiny_cfg(vec![0.0, 0.0]);
        assert!(cfg.validate().is_err());
        cfg.snr_grid_db = vec![0.0, 1.0];
        cfg.min_blocks = 10;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn capacity_formula() {
        let grid = GridConfig::default();
        let top = cqi_table()[14];
        let symbols = data_symbols_per_rb_pair(&grid, 0.25).unwrap() as f64;
        let symbol_rate = 100.0 * symbols / grid.subframe_duration_s;
        assert_eq!(max_ue_capacity(symbol_rate, &top, 1.0).unwrap(), 0.0);
        let full = max_ue_capacity(symbol_rate, &top, 0.0).unwrap();
        assert!((full - symbol_rate * top.efficiency).abs() < 1e-9);
        // Cross-check against the grid arithmetic golden peak, at BLER 0.1.
        let at_ten_percent = max_ue_capacity(symbol_rate, &top, 0.1).unwrap();
        assert!((at_ten_percent - 70_560_000.0 * 0.9).abs() < 1.0);
        assert!(max_ue_capacity(symbol_rate, &top, 1.5).is_err());
    }

    #[test]
    fn bler_at_interpolates_in_log_domain() {
        let curve = BlerCurve {
            cqi_index: 1,
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
        // Hand-computed log-linear crossing of 0.1 sits at 0.5 dB.
        let b = curve.bler_at(0.5);
        assert!((b - 0.1).abs() < 1e-9, "bler {b}");
        assert_eq!(curve.bler_at(-5.0), 0.2);
        assert_eq!(curve.bler_at(9.0), 0.05);
    }
}

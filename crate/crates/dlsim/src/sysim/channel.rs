//! Link measurement model: pathloss, per-drop shadowing, per-RB block
//! fading, and the resulting per-RB SINR.
//!
//! Fading is addressed purely by (site, ue, rb, coherence block) under the
//! drop seed, so gains are reproducible and independent of evaluation order.

use serde::{Deserialize, Serialize};

use super::layout::{distance, NetworkLayout, Position};
use crate::error::{Error, Result};
use crate::rng::{indexed_normal, indexed_uniform};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelConfig {
    /// Pathloss at 1 km, dB.
    pub pathloss_ref_db: f64,
    /// Pathloss slope, dB per decade of distance.
    pub pathloss_db_per_decade: f64,
    /// Log-normal shadowing deviation, dB; drawn once per (site, ue) per
    /// drop. Zero disables.
    pub shadowing_sigma_db: f64,
    /// Per-RB Rayleigh block fading toggle.
    pub fading_enabled: bool,
    /// Fading is redrawn every this many subframes (the coherence block).
    pub fading_coherence_subframes: u32,
    /// Receiver noise figure, dB.
    pub noise_figure_db: f64,
    /// Thermal noise density, dBm/Hz.
    pub thermal_noise_dbm_per_hz: f64,
    /// Nominal UE speed, km/h. Config label only; coherence is set above.
    pub ue_speed_kmh: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            pathloss_ref_db: 128.1,
            pathloss_db_per_decade: 37.6,
            shadowing_sigma_db: 8.0,
            fading_enabled: true,
            fading_coherence_subframes: 45,
            noise_figure_db: 9.0,
            thermal_noise_dbm_per_hz: -174.0,
            ue_speed_kmh: 5.0,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fading_coherence_subframes == 0 {
            return Err(Error::invalid("fading coherence must be at least 1 subframe"));
        }
        if self.shadowing_sigma_db < 0.0 {
            return Err(Error::invalid("shadowing deviation must be non-negative"));
        }
        Ok(())
    }

    /// Thermal-plus-receiver noise over one RB bandwidth, linear mW.
    pub fn noise_per_rb_mw(&self, rb_bandwidth_hz: f64) -> f64 {
        let dbm =
            self.thermal_noise_dbm_per_hz + 10.0 * rb_bandwidth_hz.log10() + self.noise_figure_db;
        10f64.powf(dbm / 10.0)
    }
}

/// Gain and SINR evaluation for one drop (fixed UE placement + shadowing).
#[derive(Debug, Clone)]
pub struct ChannelModel {
    cfg: ChannelConfig,
    sites: Vec<Position>,
    ues: Vec<Position>,
    /// Per (site, ue): pathloss x shadowing, linear.
    slow_gain: Vec<f64>,
    seed: u64,
    n_rb: usize,
    /// Per-RB transmit power, linear mW.
    tx_per_rb_mw: f64,
    noise_per_rb_mw: f64,
}

const SHADOW_TAG: u64 = 0x5ad0;
const FADE_TAG: u64 = 0xfade;

impl ChannelModel {
    pub fn new(
        cfg: ChannelConfig,
        layout: &NetworkLayout,
        ues: Vec<Position>,
        n_rb: usize,
        rb_bandwidth_hz: f64,
        seed: u64,
    ) -> Result<Self> {
        cfg.validate()?;
        let sites = layout.site_positions();
        let mut slow_gain = Vec::with_capacity(sites.len() * ues.len());
        for (s_idx, &site) in sites.iter().enumerate() {
            for (u_idx, &ue) in ues.iter().enumerate() {
                let d = distance(site, ue).max(layout.min_ue_distance_m);
                let pl_db = cfg.pathloss_ref_db + cfg.pathloss_db_per_decade * (d / 1000.0).log10();
                let shadow_db = if cfg.shadowing_sigma_db > 0.0 {
                    cfg.shadowing_sigma_db
                        * indexed_normal(seed, &[SHADOW_TAG, s_idx as u64, u_idx as u64])
                } else {
                    0.0
                };
                slow_gain.push(10f64.powf(-(pl_db + shadow_db) / 10.0));
            }
        }
        let tx_per_rb_mw = 10f64.powf(layout.tx_power_dbm / 10.0) / n_rb as f64;
        let noise_per_rb_mw = cfg.noise_per_rb_mw(rb_bandwidth_hz);
        Ok(ChannelModel {
            cfg,
            sites,
            ues,
            slow_gain,
            seed,
            n_rb,
            tx_per_rb_mw,
            noise_per_rb_mw,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn n_ues(&self) -> usize {
        self.ues.len()
    }

    pub fn ue_positions(&self) -> &[Position] {
        &self.ues
    }

    fn fading_block(&self, subframe: u64) -> u64 {
        subframe / self.cfg.fading_coherence_subframes as u64
    }

    /// Linear power gain from `site` to `ue` on `rb` during `subframe`.
    pub fn gain(&self, site: usize, ue: usize, rb: usize, subframe: u64) -> f64 {
        let slow = self.slow_gain[site * self.ues.len() + ue];
        if !self.cfg.fading_enabled {
            return slow;
        }
        let block = self.fading_block(subframe);
        let u = indexed_uniform(
            self.seed,
            &[FADE_TAG, site as u64, ue as u64, rb as u64, block],
        );
        // Rayleigh power gain: exponential with unit mean.
        let fading = -(1.0 - u).ln();
        slow * fading
    }

    /// Linear SINR for `ue` on `rb`: serving site 0 over the interferer tier
    /// (all transmitting full power on every RB) plus thermal noise.
    pub fn per_rb_sinr(&self, ue: usize, rb: usize, subframe: u64) -> f64 {
        let signal = self.tx_per_rb_mw * self.gain(0, ue, rb, subframe);
        let interference: f64 = (1..self.sites.len())
            .map(|s| self.tx_per_rb_mw * self.gain(s, ue, rb, subframe))
            .sum();
        signal / (interference + self.noise_per_rb_mw)
    }

    /// SINRs in dB for every (ue, rb) of one subframe, row per UE.
    pub fn sinr_matrix_db(&self, subframe: u64) -> Vec<Vec<f64>> {
        (0..self.ues.len())
            .map(|ue| {
                (0..self.n_rb)
                    .map(|rb| 10.0 * self.per_rb_sinr(ue, rb, subframe).log10())
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_cfg() -> ChannelConfig {
        ChannelConfig {
            shadowing_sigma_db: 0.0,
            fading_enabled: false,
            ..ChannelConfig::default()
        }
    }

    fn model(cfg: ChannelConfig, ues: Vec<Position>) -> ChannelModel {
        let layout = NetworkLayout::default();
        ChannelModel::new(cfg, &layout, ues, 100, 180e3, 9).unwrap()
    }

    #[test]
    fn pathloss_power_law() {
        let m = model(flat_cfg(), vec![(100.0, 0.0), (200.0, 0.0)]);
        let g1 = m.gain(0, 0, 0, 0);
        let g2 = m.gain(0, 1, 0, 0);
        // Doubling distance costs exactly 37.6 * log10(2) dB.
        let ratio_db = 10.0 * (g1 / g2).log10();
        assert!((ratio_db - 37.6 * 2f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn deterministic_geometry_when_randomness_disabled() {
        let m = model(flat_cfg(), vec![(150.0, 30.0)]);
        let g = m.gain(0, 0, 5, 17);
        assert_eq!(g, m.gain(0, 0, 9, 99));
        let d = distance((0.0, 0.0), (150.0, 30.0));
        let expected_db = -(128.1 + 37.6 * (d / 1000.0).log10());
        assert!((10.0 * g.log10() - expected_db).abs() < 1e-9);
    }

    #[test]
    fn rayleigh_unit_mean() {
        let cfg = ChannelConfig {
            shadowing_sigma_db: 0.0,
            ..ChannelConfig::default()
        };
        let m = model(cfg, vec![(100.0, 0.0)]);
        let slow = model(flat_cfg(), vec![(100.0, 0.0)]).gain(0, 0, 0, 0);
        let n = 100_000u64;
        let mean: f64 = (0..n)
            .map(|i| m.gain(0, 0, (i % 100) as usize, i * 8))
            .sum::<f64>()
            / n as f64
            / slow;
        assert!((mean - 1.0).abs() < 0.02, "normalized mean {mean}");
    }

    #[test]
    fn fading_constant_within_coherence_block() {
        let cfg = ChannelConfig {
            shadowing_sigma_db: 0.0,
            fading_coherence_subframes: 8,
            ..ChannelConfig::default()
        };
        let m = model(cfg, vec![(100.0, 0.0)]);
        assert_eq!(m.gain(0, 0, 3, 0), m.gain(0, 0, 3, 7));
        assert_ne!(m.gain(0, 0, 3, 7), m.gain(0, 0, 3, 8));
    }

    #[test]
    fn sinr_definition_and_interference_monotonicity() {
        // Signal == noise and no interference puts SINR at 0 dB.
        let layout = NetworkLayout {
            n_interferer_sites: 0,
            ..NetworkLayout::default()
        };
        let cfg = flat_cfg();
        let noise = cfg.noise_per_rb_mw(180e3);
        // Solve the pathloss for the distance where rx power equals noise.
        let tx_per_rb_dbm = 46.0 - 10.0 * 100f64.log10();
        let target_pl_db = tx_per_rb_dbm - 10.0 * noise.log10();
        let d_km = 10f64.powf((target_pl_db - 128.1) / 37.6);
        let m = ChannelModel::new(
            cfg.clone(),
            &layout,
            vec![(d_km * 1000.0, 0.0)],
            100,
            180e3,
            1,
        )
        .unwrap();
        let sinr_db = 10.0 * m.per_rb_sinr(0, 0, 0).log10();
        assert!(sinr_db.abs() < 1e-6, "sinr {sinr_db} dB");

        // Adding an interferer strictly lowers it.
        let with_tier = model(cfg, vec![(d_km * 1000.0, 0.0)]);
        assert!(with_tier.per_rb_sinr(0, 0, 0) < m.per_rb_sinr(0, 0, 0));
    }

    #[test]
    fn cell_edge_between_two_sites_is_at_most_zero_db() {
        // Equidistant from serving and the first interferer, no randomness:
        // equal gains mean interference alone caps SINR at 0 dB.
        let m = model(flat_cfg(), vec![(250.0, 0.0)]);
        let sinr_db = 10.0 * m.per_rb_sinr(0, 0, 0).log10();
        assert!(sinr_db <= 0.0, "sinr {sinr_db}");
    }

    #[test]
    fn validation_rejects_zero_coherence() {
        let cfg = ChannelConfig {
            fading_coherence_subframes: 0,
            ..ChannelConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}

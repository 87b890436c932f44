//! One-tier cellular geometry and UE deployment.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::task_rng;

/// Planar position in meters.
pub type Position = (f64, f64);

/// Center cell plus one surrounding tier of interference-only sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkLayout {
    /// UEs deploy within this radius of the center site.
    pub cell_radius_m: f64,
    /// Ring distance of the interferer sites.
    pub inter_site_distance_m: f64,
    /// Sites on the surrounding tier (omni).
    pub n_interferer_sites: u32,
    /// Transmit power per site over the whole band, dBm.
    pub tx_power_dbm: f64,
    /// UEs in the center cell.
    pub n_ues: u32,
    /// Exclusion radius around the serving site.
    pub min_ue_distance_m: f64,
}

impl Default for NetworkLayout {
    fn default() -> Self {
        NetworkLayout {
            cell_radius_m: 500.0 / 3f64.sqrt(),
            inter_site_distance_m: 500.0,
            n_interferer_sites: 6,
            tx_power_dbm: 46.0,
            n_ues: 20,
            min_ue_distance_m: 35.0,
        }
    }
}

impl NetworkLayout {
    pub fn validate(&self) -> Result<()> {
        if self.n_ues == 0 {
            return Err(Error::invalid("layout needs at least one UE"));
        }
        if self.min_ue_distance_m >= self.cell_radius_m {
            return Err(Error::invalid(
                "minimum UE distance must lie inside the cell radius",
            ));
        }
        if self.cell_radius_m <= 0.0 || self.inter_site_distance_m <= 0.0 {
            return Err(Error::invalid("layout distances must be positive"));
        }
        Ok(())
    }

    /// Serving site plus the interferer ring; index 0 is the serving site.
    pub fn site_positions(&self) -> Vec<Position> {
        let mut sites = vec![(0.0, 0.0)];
        for i in 0..self.n_interferer_sites {
            let angle = 2.0 * std::f64::consts::PI * i as f64 / self.n_interferer_sites as f64;
            sites.push((
                self.inter_site_distance_m * angle.cos(),
                self.inter_site_distance_m * angle.sin(),
            ));
        }
        sites
    }
}

/// Draws UE positions uniformly over the annulus between the exclusion
/// radius and the cell edge. Deterministic per seed.
pub fn deploy(layout: &NetworkLayout, seed: u64) -> Result<Vec<Position>> {
    layout.validate()?;
    let mut rng = task_rng(seed, &[0xdea1]);
    let a2 = layout.min_ue_distance_m.powi(2);
    let b2 = layout.cell_radius_m.powi(2);
    Ok((0..layout.n_ues)
        .map(|_| {
            let r = (a2 + rng.gen::<f64>() * (b2 - a2)).sqrt();
            let theta = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
            (r * theta.cos(), r * theta.sin())
        })
        .collect())
}

pub fn distance(a: Position, b: Position) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_interferers_on_the_ring() {
        let layout = NetworkLayout::default();
        let sites = layout.site_positions();
        assert_eq!(sites.len(), 7);
        assert_eq!(sites[0], (0.0, 0.0));
        for s in &sites[1..] {
            assert!((distance(*s, (0.0, 0.0)) - 500.0).abs() < 1e-9);
        }
    }

    #[test]
    fn deployment_stays_in_annulus() {
        let layout = NetworkLayout {
            n_ues: 500,
            ..NetworkLayout::default()
        };
        let positions = deploy(&layout, 3).unwrap();
        for p in positions {
            let d = distance(p, (0.0, 0.0));
            assert!(d >= layout.min_ue_distance_m - 1e-9);
            assert!(d <= layout.cell_radius_m + 1e-9);
        }
    }

    #[test]
    fn deployment_deterministic() {
        let layout = NetworkLayout::default();
        assert_eq!(deploy(&layout, 5).unwrap(), deploy(&layout, 5).unwrap());
        assert_ne!(deploy(&layout, 5).unwrap(), deploy(&layout, 6).unwrap());
    }

    #[test]
    fn mean_distance_matches_annulus_expectation() {
        // Closed form for uniform density on an annulus [a, b]:
        // E[r] = (2/3) (b^3 - a^3) / (b^2 - a^2).
        let layout = NetworkLayout {
            n_ues: 10_000,
            ..NetworkLayout::default()
        };
        let (a, b) = (layout.min_ue_distance_m, layout.cell_radius_m);
        let expected = 2.0 / 3.0 * (b.powi(3) - a.powi(3)) / (b.powi(2) - a.powi(2));
        let positions = deploy(&layout, 11).unwrap();
        let mean: f64 = positions
            .iter()
            .map(|&p| distance(p, (0.0, 0.0)))
            .sum::<f64>()
            / positions.len() as f64;
        assert!(
            (mean - expected).abs() / expected < 0.02,
            "mean {mean}, expected {expected}"
        );
    }

    #[test]
    fn validation_rejects_degenerate_layouts() {
        let mut layout = NetworkLayout::default();
        layout.n_ues = 0;
        assert!(layout.validate().is_err());
        let mut layout = NetworkLayout::default();
        layout.min_ue_distance_m = 1000.0;
        assert!(layout.validate().is_err());
    }
}

//! System-level simulator: one-tier layout, link measurement model, delayed
//! CQI feedback, link adaptation, scheduling, and the link performance model
//! that turns effective SINR into transport-block success draws.

pub mod channel;
pub mod feedback;
pub mod layout;
pub mod schedulers;

pub use channel::{ChannelConfig, ChannelModel};
pub use feedback::{expand_to_rbs, measure_report, subband_cqi, CqiReport, FeedbackQueue};
pub use layout::{deploy, NetworkLayout, Position};
pub use schedulers::{
    schedule_best_cqi, schedule_pf, schedule_rr, update_pf_averages, RrState, ScheduleDecision,
    SchedulerKind,
};

use serde::{Deserialize, Serialize};

use crate::abstraction::{miesm, Lut};
use crate::digest::fnv1a_hex;
use crate::error::{Error, Result};
use crate::linksim::BlerCurve;
use crate::numerology::{cqi_entry, tb_bits, GridConfig};
use crate::rng::indexed_uniform;

/// Full system-level configuration for one drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SysimConfig {
    pub grid: GridConfig,
    pub layout: NetworkLayout,
    pub channel: ChannelConfig,
    /// CQI reports age this many subframes before the scheduler sees them.
    pub feedback_delay_subframes: u32,
    /// Subband width for CQI reporting, in RBs.
    pub subband_rbs: u32,
    /// Simulated subframes per drop.
    pub n_subframes: u32,
    /// Smoothing horizon of the proportional-fair average, in subframes.
    pub pf_time_constant: f64,
    /// Control/reference overhead removed from every allocation.
    pub overhead_fraction: f64,
    /// Places UEs explicitly instead of drawing random positions.
    pub fixed_ue_positions: Option<Vec<Position>>,
}

impl Default for SysimConfig {
    fn default() -> Self {
        SysimConfig {
            grid: GridConfig::default(),
            layout: NetworkLayout::default(),
            channel: ChannelConfig::default(),
            feedback_delay_subframes: 3,
            subband_rbs: 6,
            n_subframes: 2000,
            pf_time_constant: 1000.0,
            overhead_fraction: crate::numerology::DEFAULT_OVERHEAD_FRACTION,
            fixed_ue_positions: None,
        }
    }
}

impl SysimConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.layout.validate()?;
        self.channel.validate()?;
        if self.n_subframes == 0 {
            return Err(Error::invalid("drop length of zero subframes"));
        }
        if self.subband_rbs == 0 || self.subband_rbs > self.grid.n_rb {
            return Err(Error::invalid("subband width outside [1, n_rb]"));
        }
        if self.pf_time_constant < 1.0 {
            return Err(Error::invalid("PF time constant below one subframe"));
        }
        if let Some(pos) = &self.fixed_ue_positions {
            if pos.len() != self.layout.n_ues as usize {
                return Err(Error::invalid(format!(
                    "{} fixed positions for {} UEs",
                    pos.len(),
                    self.layout.n_ues
                )));
            }
        }
        Ok(())
    }

    /// Digest of the full configuration, for manifests and result tagging.
    pub fn digest(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        fnv1a_hex(text.as_bytes())
    }
}

/// Per-UE accounting over one drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropResult {
    pub scheduler: SchedulerKind,
    pub seed: u64,
    pub config_digest: String,
    /// Average throughput per UE in bits per second over the drop.
    pub per_ue_throughput_bps: Vec<f64>,
    /// Sum of all served bits, for conservation checks.
    pub cell_served_bits: u64,
}

/// Reference data the drop needs from the link level.
pub struct LinkReferences<'a> {
    pub lut: &'a Lut,
    pub curves: &'a [BlerCurve],
}

impl LinkReferences<'_> {
    fn curve(&self, cqi: u8) -> Result<&BlerCurve> {
        self.curves
            .iter()
            .find(|c| c.cqi_index == cqi)
            .ok_or(Error::MissingCqi(cqi))
    }
}

/// Chooses the transport format for a UE from the delayed reports on its
/// assigned RBs: each RB is represented by the threshold SINR of its
/// reported CQI, the set is compressed through the MI mapping of the weakest
/// reported format, and the map picks the final CQI. Homogeneous reports
/// select exactly the reported value.
pub fn select_mcs(assigned_rb_cqi: &[u8], lut: &Lut) -> Result<u8> {
    let min_cqi = assigned_rb_cqi.iter().copied().min().unwrap_or(0);
    if min_cqi == 0 || assigned_rb_cqi.is_empty() {
        return Ok(0);
    }
    let reps: Vec<f64> = assigned_rb_cqi
        .iter()
        .map(|&c| lut.map.threshold(c))
        .collect::<Result<_>>()?;
    let entry = cqi_entry(min_cqi)?;
    let eff = miesm(
        &reps,
        &lut.alpha(min_cqi),
        lut.mi_table(entry.modulation_bits)?,
    )?;
    Ok(lut.map.sinr_to_cqi(eff))
}

/// Outcome of one scheduled transport block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TbResult {
    pub ue: usize,
    pub mcs: u8,
    pub effective_sinr_db: f64,
    pub bler: f64,
    pub success: bool,
    pub bits: u64,
}

/// Link performance model: effective SINR over the assigned RBs, BLER from
/// the AWGN reference curve of the chosen format, then a success draw.
#[allow(clippy::too_many_arguments)]
pub fn transmit(
    decision: &ScheduleDecision,
    mcs_per_ue: &[u8],
    true_sinr_db: &[Vec<f64>],
    refs: &LinkReferences,
    cfg: &SysimConfig,
    seed: u64,
    subframe: u64,
) -> Result<Vec<TbResult>> {
    const TX_TAG: u64 = 0x7b5e;
    let n_ues = true_sinr_db.len();
    let per_ue_rbs = decision.per_ue_rbs(n_ues);
    let mut results = Vec::new();
    for (ue, rbs) in per_ue_rbs.iter().enumerate() {
        if rbs.is_empty() {
            continue;
        }
        let mcs = mcs_per_ue[ue];
        if mcs == 0 {
            continue;
        }
        let entry = cqi_entry(mcs)?;
        let sinrs: Vec<f64> = rbs.iter().map(|&rb| true_sinr_db[ue][rb]).collect();
        let eff = miesm(
            &sinrs,
            &refs.lut.alpha(mcs),
            refs.lut.mi_table(entry.modulation_bits)?,
        )?;
        let bler = refs.curve(mcs)?.bler_at(eff);
        let draw = indexed_uniform(seed, &[TX_TAG, subframe, ue as u64]);
        let success = draw >= bler;
        let bits = if success {
            tb_bits(&entry, rbs.len() as u32, &cfg.grid, cfg.overhead_fraction)?
        } else {
            0
        };
        results.push(TbResult {
            ue,
            mcs,
            effective_sinr_db: eff,
            bler,
            success,
            bits,
        });
    }
    Ok(results)
}

/// Runs one drop: deploy, then per subframe measure -> feed back -> schedule
/// -> adapt -> transmit -> account.
pub fn run_drop(
    cfg: &SysimConfig,
    refs: &LinkReferences,
    scheduler: SchedulerKind,
    seed: u64,
) -> Result<DropResult> {
    cfg.validate()?;
    let positions = match &cfg.fixed_ue_positions {
        Some(p) => p.clone(),
        None => deploy(&cfg.layout, seed)?,
    };
    let model = ChannelModel::new(
        cfg.channel.clone(),
        &cfg.layout,
        positions,
        cfg.grid.n_rb as usize,
        cfg.grid.rb_bandwidth_hz(),
        seed,
    )?;
    let n_ues = model.n_ues();
    let n_rb = cfg.grid.n_rb as usize;
    let subband = cfg.subband_rbs as usize;

    // Initial PF average: the rate of a single RB at the lowest format.
    let one_rb_floor = tb_bits(&cqi_entry(1)?, 1, &cfg.grid, cfg.overhead_fraction)? as f64
        / cfg.grid.subframe_duration_s;
    let mut avg_throughput = vec![one_rb_floor; n_ues];
    let mut served_bits = vec![0u64; n_ues];
    let mut cell_served_bits = 0u64;
    let mut rr_state = RrState::default();
    let mut queue = FeedbackQueue::new(cfg.feedback_delay_subframes as usize);

    // SINR and reports only move when the fading block does; cache them.
    let mut cached_block = u64::MAX;
    let mut sinr_db: Vec<Vec<f64>> = Vec::new();
    let mut current_report: CqiReport = Vec::new();

    for t in 0..cfg.n_subframes as u64 {
        let block = t / cfg.channel.fading_coherence_subframes as u64;
        if block != cached_block {
            cached_block = block;
            sinr_db = model.sinr_matrix_db(t);
            current_report = measure_report(&sinr_db, subband, refs.lut)?;
        }
        let delayed = queue.advance(current_report.clone());
        let rb_cqi = expand_to_rbs(&delayed, subband, n_rb);

        let decision = match scheduler {
            SchedulerKind::RoundRobin => schedule_rr(&rb_cqi, &mut rr_state),
            SchedulerKind::BestCqi => schedule_best_cqi(&rb_cqi),
            SchedulerKind::ProportionalFair => schedule_pf(&rb_cqi, &avg_throughput),
        };

        let per_ue_rbs = decision.per_ue_rbs(n_ues);
        let mut mcs_per_ue = vec![0u8; n_ues];
        for (ue, rbs) in per_ue_rbs.iter().enumerate() {
            if rbs.is_empty() {
                continue;
            }
            let reported: Vec<u8> = rbs.iter().map(|&rb| rb_cqi[ue][rb]).collect();
            mcs_per_ue[ue] = select_mcs(&reported, refs.lut)?;
        }

        let outcomes = transmit(&decision, &mcs_per_ue, &sinr_db, refs, cfg, seed, t)?;
        let mut served_rate = vec![0.0f64; n_ues];
        for tb in &outcomes {
            served_bits[tb.ue] += tb.bits;
            cell_served_bits += tb.bits;
            served_rate[tb.ue] = tb.bits as f64 / cfg.grid.subframe_duration_s;
        }
        update_pf_averages(&mut avg_throughput, &served_rate, cfg.pf_time_constant);
    }

    let sim_time = cfg.n_subframes as f64 * cfg.grid.subframe_duration_s;
    Ok(DropResult {
        scheduler,
        seed,
        config_digest: cfg.digest(),
        per_ue_throughput_bps: served_bits.iter().map(|&b| b as f64 / sim_time).collect(),
        cell_served_bits,
    })
}

//! Resource-block schedulers: round-robin, best-CQI, proportional-fair.
//!
//! All three consume the delayed per-RB CQI reports; RBs where a UE reports
//! CQI 0 are never assigned to it. Ties break toward the lowest UE id.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerology::cqi_table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchedulerKind {
    RoundRobin,
    BestCqi,
    ProportionalFair,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 3] = [
        SchedulerKind::RoundRobin,
        SchedulerKind::BestCqi,
        SchedulerKind::ProportionalFair,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            SchedulerKind::RoundRobin => "rr",
            SchedulerKind::BestCqi => "bestcqi",
            SchedulerKind::ProportionalFair => "pf",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "rr" => Ok(SchedulerKind::RoundRobin),
            "bestcqi" => Ok(SchedulerKind::BestCqi),
            "pf" => Ok(SchedulerKind::ProportionalFair),
            other => Err(Error::invalid(format!(
                "unknown scheduler {other:?}; expected one of pf, rr, bestcqi"
            ))),
        }
    }
}

/// Per-RB assignment for one subframe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleDecision {
    /// One slot per RB: the UE it went to, if any.
    pub rb_to_ue: Vec<Option<usize>>,
}

impl ScheduleDecision {
    /// RB indices assigned to each UE.
    pub fn per_ue_rbs(&self, n_ues: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); n_ues];
        for (rb, &ue) in self.rb_to_ue.iter().enumerate() {
            if let Some(u) = ue {
                out[u].push(rb);
            }
        }
        out
    }
}

/// Round-robin state: the cycle position survives across subframes.
#[derive(Debug, Clone, Default)]
pub struct RrState {
    pointer: usize,
}

/// Cyclic assignment over the UE list; UEs reporting CQI 0 on an RB are
/// skipped for that RB (and do not consume their turn).
pub fn schedule_rr(rb_cqi: &[Vec<u8>], state: &mut RrState) -> ScheduleDecision {
    let n_ues = rb_cqi.len();
    let n_rb = rb_cqi.first().map_or(0, Vec::len);
    let mut rb_to_ue = vec![None; n_rb];
    for (rb, slot) in rb_to_ue.iter_mut().enumerate() {
        for probe in 0..n_ues {
            let ue = (state.pointer + probe) % n_ues;
            if rb_cqi[ue][rb] >= 1 {
                *slot = Some(ue);
                state.pointer = (ue + 1) % n_ues;
                break;
            }
        }
    }
    ScheduleDecision { rb_to_ue }
}

/// Each RB to the UE with the highest reported CQI; lowest id wins ties.
pub fn schedule_best_cqi(rb_cqi: &[Vec<u8>]) -> ScheduleDecision {
    let n_ues = rb_cqi.len();
    let n_rb = rb_cqi.first().map_or(0, Vec::len);
    let mut rb_to_ue = vec![None; n_rb];
    for (rb, slot) in rb_to_ue.iter_mut().enumerate() {
        let mut best: Option<(u8, usize)> = None;
        for ue in 0..n_ues {
            let c = rb_cqi[ue][rb];
            if c >= 1 && best.map_or(true, |(bc, _)| c > bc) {
                best = Some((c, ue));
            }
        }
        *slot = best.map(|(_, ue)| ue);
    }
    ScheduleDecision { rb_to_ue }
}

/// Instantaneous rate proxy for a reported CQI: spectral efficiency in bits
/// per symbol. Any common scale factor cancels inside the PF ratio.
pub fn cqi_rate_proxy(cqi: u8) -> f64 {
    if cqi == 0 {
        0.0
    } else {
        cqi_table()[cqi as usize - 1].efficiency
    }
}

/// Each RB to the UE maximizing reported-rate over smoothed average
/// throughput; averages stay fixed within the subframe.
pub fn schedule_pf(rb_cqi: &[Vec<u8>], avg_throughput: &[f64]) -> ScheduleDecision {
    let n_ues = rb_cqi.len();
    let n_rb = rb_cqi.first().map_or(0, Vec::len);
    let mut rb_to_ue = vec![None; n_rb];
    for (rb, slot) in rb_to_ue.iter_mut().enumerate() {
        let mut best: Option<(f64, usize)> = None;
        for ue in 0..n_ues {
            let c = rb_cqi[ue][rb];
            if c == 0 {
                continue;
            }
            let metric = cqi_rate_proxy(c) / avg_throughput[ue].max(f64::MIN_POSITIVE);
            if best.map_or(true, |(bm, _)| metric > bm) {
                best = Some((metric, ue));
            }
        }
        *slot = best.map(|(_, ue)| ue);
    }
    ScheduleDecision { rb_to_ue }
}

/// Exponentially smoothed throughput update applied after every subframe to
/// every UE: avg <- (1 - 1/tc) avg + (1/tc) served_rate.
pub fn update_pf_averages(avg_throughput: &mut [f64], served_rate_bps: &[f64], time_constant: f64) {
    let w = 1.0 / time_constant;
    for (avg, &served) in avg_throughput.iter_mut().zip(served_rate_bps) {
        *avg = (1.0 - w) * *avg + w * served;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rr_cycles_and_persists_pointer() {
        let rb_cqi = vec![vec![5u8; 4], vec![5u8; 4]];
        let mut state = RrState::default();
        let d1 = schedule_rr(&rb_cqi, &mut state);
        assert_eq!(
            d1.rb_to_ue,
            vec![Some(0), Some(1), Some(0), Some(1)]
        );
        // Next subframe continues the cycle where it stopped.
        let d2 = schedule_rr(&rb_cqi, &mut state);
        assert_eq!(
            d2.rb_to_ue,
            vec![Some(0), Some(1), Some(0), Some(1)]
        );
        let rb_cqi3 = vec![vec![5u8; 3], vec![5u8; 3]];
        let mut state = RrState::default();
        let d3 = schedule_rr(&rb_cqi3, &mut state);
        assert_eq!(d3.rb_to_ue, vec![Some(0), Some(1), Some(0)]);
        let d4 = schedule_rr(&rb_cqi3, &mut state);
        assert_eq!(d4.rb_to_ue, vec![Some(1), Some(0), Some(1)]);
    }

    #[test]
    fn rr_equal_shares_over_whole_rounds() {
        let n_ues = 5;
        let rb_cqi = vec![vec![5u8; 20]; n_ues];
        let mut state = RrState::default();
        let mut counts = vec![0usize; n_ues];
        for _ in 0..25 {
            let d = schedule_rr(&rb_cqi, &mut state);
            for ue in d.rb_to_ue.into_iter().flatten() {
                counts[ue] += 1;
            }
        }
        // 25 subframes x 20 RBs over 5 UEs.
        assert!(counts.iter().all(|&c| c == 100), "{counts:?}");
    }

    #[test]
    fn rr_skips_cqi_zero() {
        let rb_cqi = vec![vec![0u8, 4], vec![4u8, 4]];
        let mut state = RrState::default();
        let d = schedule_rr(&rb_cqi, &mut state);
        assert_eq!(d.rb_to_ue, vec![Some(1), Some(0)]);
        // Whole RB unassignable when everyone is in outage there.
        let rb_cqi = vec![vec![0u8], vec![0u8]];
        let d = schedule_rr(&rb_cqi, &mut RrState::default());
        assert_eq!(d.rb_to_ue, vec![None]);
    }

    #[test]
    fn best_cqi_argmax_and_ties() {
        let rb_cqi = vec![vec![9u8, 3], vec![9u8, 7]];
        let d = schedule_best_cqi(&rb_cqi);
        assert_eq!(d.rb_to_ue, vec![Some(0), Some(1)]);
        // A dominant UE takes everything.
        let rb_cqi = vec![vec![15u8; 6], vec![3u8; 6]];
        let d = schedule_best_cqi(&rb_cqi);
        assert!(d.rb_to_ue.iter().all(|&u| u == Some(0)));
    }

    #[test]
    fn best_cqi_invariant_under_common_offset() {
        let base = vec![vec![3u8, 8, 5], vec![6u8, 2, 5]];
        let shifted: Vec<Vec<u8>> = base
            .iter()
            .map(|row| row.iter().map(|&c| c + 4).collect())
            .collect();
        assert_eq!(
            schedule_best_cqi(&base).rb_to_ue,
            schedule_best_cqi(&shifted).rb_to_ue
        );
    }

    #[test]
    fn pf_reduces_to_best_cqi_on_equal_averages() {
        let rb_cqi = vec![vec![3u8, 8, 5], vec![6u8, 2, 5]];
        let avg = vec![1000.0, 1000.0];
        assert_eq!(
            schedule_pf(&rb_cqi, &avg).rb_to_ue,
            schedule_best_cqi(&rb_cqi).rb_to_ue
        );
    }

    #[test]
    fn pf_prefers_starved_ue_at_equal_rates() {
        let rb_cqi = vec![vec![7u8], vec![7u8]];
        let avg = vec![5000.0, 100.0];
        let d = schedule_pf(&rb_cqi, &avg);
        assert_eq!(d.rb_to_ue, vec![Some(1)]);
    }

    #[test]
    fn pf_matches_brute_force_metric_oracle() {
        // Two UEs, two RBs, ten subframes of hand-set reports; replay the
        // argmax independently and compare the allocation sequence.
        let reports: Vec<Vec<Vec<u8>>> = (0..10)
            .map(|t| {
                vec![
                    vec![1 + (t % 5) as u8, 5 - (t % 5) as u8],
                    vec![3u8, 3u8],
                ]
            })
            .collect();
        let tc = 4.0;
        let mut avg = vec![1.0, 1.0];
        let mut chosen = Vec::new();
        let mut oracle_chosen = Vec::new();
        let mut oracle_avg = vec![1.0, 1.0];
        for report in &reports {
            let d = schedule_pf(report, &avg);
            chosen.push(d.rb_to_ue.clone());

            // Independent brute-force evaluation of the same metric.
            let mut oracle_rbs = Vec::new();
            for rb in 0..2 {
                let mut best: Option<(f64, usize)> = None;
                for ue in 0..2 {
                    let c = report[ue][rb];
                    if c == 0 {
                        continue;
                    }
                    let m = cqi_rate_proxy(c) / oracle_avg[ue];
                    match best {
                        Some((bm, _)) if m <= bm => {}
                        _ => best = Some((m, ue)),
                    }
                }
                oracle_rbs.push(best.map(|(_, u)| u));
            }
            oracle_chosen.push(oracle_rbs.clone());

            // Served rate proxy: sum of rate proxies of won RBs.
            let mut served = vec![0.0; 2];
            for (rb, ue) in d.rb_to_ue.iter().enumerate() {
                if let Some(u) = ue {
                    served[*u] += cqi_rate_proxy(report[*u][rb]);
                }
            }
            update_pf_averages(&mut avg, &served, tc);
            let mut oracle_served = vec![0.0; 2];
            for (rb, ue) in oracle_rbs.iter().enumerate() {
                if let Some(u) = ue {
                    oracle_served[*u] += cqi_rate_proxy(report[*u][rb]);
                }
            }
            for (a, &s) in oracle_avg.iter_mut().zip(&oracle_served) {
                *a = (1.0 - 1.0 / tc) * *a + (1.0 / tc) * s;
            }
        }
        assert_eq!(chosen, oracle_chosen);
    }

    #[test]
    fn scheduler_ids_round_trip() {
        for kind in SchedulerKind::ALL {
            assert_eq!(SchedulerKind::parse(kind.id()).unwrap(), kind);
        }
        assert!(SchedulerKind::parse("fifo").is_err());
    }

    #[test]
    fn no_rb_double_booking_structurally() {
        let rb_cqi = vec![vec![5u8; 10]; 4];
        let d = schedule_best_cqi(&rb_cqi);
        let per_ue = d.per_ue_rbs(4);
        let total: usize = per_ue.iter().map(Vec::len).sum();
        let assigned = d.rb_to_ue.iter().flatten().count();
        assert_eq!(total, assigned);
    }
}

//! CQI measurement and the delayed feedback channel.
//!
//! The UE compresses each subband's per-RB SINRs through the MI mapping and
//! reports the highest CQI whose mapped effective SINR clears that CQI's
//! threshold; 0 means no supportable format (outage). Reports reach the
//! scheduler after a configurable delay in subframes.

use std::collections::VecDeque;

use crate::abstraction::{miesm, Lut};
use crate::error::Result;
use crate::numerology::cqi_table;

/// Per-UE, per-subband CQI for one subframe.
pub type CqiReport = Vec<Vec<u8>>;

/// Highest CQI supportable on one subband, judged by mapping the subband
/// SINRs through that CQI's own MI table and alpha pair.
pub fn subband_cqi(subband_sinr_db: &[f64], lut: &Lut) -> Result<u8> {
    let table = cqi_table();
    for entry in table.iter().rev() {
        let mi_table = lut.mi_table(entry.modulation_bits)?;
        let params = lut.alpha(entry.cqi_index);
        let eff = miesm(subband_sinr_db, &params, mi_table)?;
        if eff >= lut.map.threshold(entry.cqi_index)? {
            return Ok(entry.cqi_index);
        }
    }
    Ok(0)
}

/// Full report for one subframe: per UE, per subband.
pub fn measure_report(
    sinr_db: &[Vec<f64>],
    subband_rbs: usize,
    lut: &Lut,
) -> Result<CqiReport> {
    sinr_db
        .iter()
        .map(|ue_row| {
            ue_row
                .chunks(subband_rbs)
                .map(|chunk| subband_cqi(chunk, lut))
                .collect()
        })
        .collect()
}

/// Expands a subband report to one CQI per RB.
pub fn expand_to_rbs(report: &CqiReport, subband_rbs: usize, n_rb: usize) -> Vec<Vec<u8>> {
    report
        .iter()
        .map(|subbands| (0..n_rb).map(|rb| subbands[rb / subband_rbs]).collect())
        .collect()
}

/// Fixed-latency feedback queue. Push the current report each subframe and
/// read the one that has aged `delay` subframes; before enough reports have
/// accumulated, the oldest available one is returned.
#[derive(Debug, Clone)]
pub struct FeedbackQueue {
    delay: usize,
    queue: VecDeque<CqiReport>,
}

impl FeedbackQueue {
    pub fn new(delay: usize) -> Self {
        FeedbackQueue {
            delay,
            queue: VecDeque::with_capacity(delay + 1),
        }
    }

    /// Inserts the report measured this subframe and returns the delayed one.
    pub fn advance(&mut self, current: CqiReport) -> CqiReport {
        self.queue.push_back(current);
        if self.queue.len() > self.delay + 1 {
            self.queue.pop_front();
        }
        self.queue.front().cloned().expect("just pushed")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn queue_zero_delay_is_identity() {
        let mut q = FeedbackQueue::new(0);
        for t in 0..5u8 {
            let report = vec![vec![t]];
            assert_eq!(q.advance(report.clone()), report);
        }
    }

    #[test]
    fn queue_delivers_three_subframes_late() {
        let mut q = FeedbackQueue::new(3);
        let mut seen = Vec::new();
        for t in 0..8u8 {
            seen.push(q.advance(vec![vec![t]])[0][0]);
        }
        // Warm-up repeats the oldest report, then a fixed lag of 3.
        assert_eq!(seen, vec![0, 0, 0, 0, 1, 2, 3, 4]);
    }

    #[test]
    fn queue_static_input_is_invariant() {
        let mut q = FeedbackQueue::new(4);
        let report = vec![vec![7, 7]];
        for _ in 0..10 {
            assert_eq!(q.advance(report.clone()), report);
        }
    }

    #[test]
    fn expand_replicates_subband_values() {
        let report = vec![vec![3, 9, 1]];
        let per_rb = expand_to_rbs(&report, 2, 5);
        assert_eq!(per_rb, vec![vec![3, 3, 9, 9, 1]]);
    }
}

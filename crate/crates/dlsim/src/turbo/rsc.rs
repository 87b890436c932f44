//! Recursive systematic convolutional constituent: encoder and max-log-MAP
//! (BCJR) soft decoder.
//!
//! LLR convention throughout: positive values favor bit 0.

use crate::error::{Error, Result};

const NEG_INF: f64 = -1e100;

/// Trellis for one RSC constituent built from (feedback, feedforward)
/// generator polynomials in octal-style integer form.
#[derive(Debug, Clone)]
pub struct Trellis {
    pub memory_len: usize,
    pub num_states: usize,
    /// next_state[state][input_bit]
    next_state: Vec<[usize; 2]>,
    /// parity_out[state][input_bit]
    parity_out: Vec<[u8; 2]>,
    /// Register input that drives the feedback to zero from `state`.
    tail_input: Vec<u8>,
}

fn parity_of(x: usize) -> u8 {
    (x.count_ones() & 1) as u8
}

impl Trellis {
    pub fn new(feedback_poly: usize, feedforward_poly: usize) -> Result<Self> {
        if feedback_poly == 0 || feedback_poly & (feedback_poly - 1) == 0 {
            return Err(Error::invalid(
                "feedback polynomial must not be 0 or a power of two",
            ));
        }
        let constraint_len = usize::BITS as usize - feedback_poly.leading_zeros() as usize;
        let span = 1usize << constraint_len;
        if feedforward_poly == 0 || feedforward_poly >= span || feedforward_poly == feedback_poly {
            return Err(Error::invalid(format!(
                "feedforward polynomial must lie in [1, {span}) and differ from the feedback"
            )));
        }
        let memory_len = constraint_len - 1;
        let num_states = 1usize << memory_len;
        let mut next_state = vec![[0usize; 2]; num_states];
        let mut parity_out = vec![[0u8; 2]; num_states];
        let mut tail_input = vec![0u8; num_states];
        for state in 0..num_states {
            // Register input s_k = input XOR the feedback taps of the state.
            let fb_taps = parity_of(state & feedback_poly & (num_states - 1));
            for input in 0..2 {
                let reg_in = (input as u8) ^ fb_taps;
                let augmented = ((reg_in as usize) << memory_len) | state;
                parity_out[state][input] = parity_of(augmented & feedforward_poly);
                next_state[state][input] = augmented >> 1;
            }
            tail_input[state] = fb_taps; // drives reg_in to 0
        }
        Ok(Trellis {
            memory_len,
            num_states,
            next_state,
            parity_out,
            tail_input,
        })
    }

    /// Encodes `info` bits; returns (parity bits, tail info bits, tail parity
    /// bits). The systematic stream is the input itself.
    pub fn encode(&self, info: &[u8]) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
        let mut parity = Vec::with_capacity(info.len());
        let mut state = 0usize;
        for &b in info {
            let input = (b & 1) as usize;
            parity.push(self.parity_out[state][input]);
            state = self.next_state[state][input];
        }
        let mut tail_info = Vec::with_capacity(self.memory_len);
        let mut tail_parity = Vec::with_capacity(self.memory_len);
        for _ in 0..self.memory_len {
            let input = self.tail_input[state] as usize;
            tail_info.push(input as u8);
            tail_parity.push(self.parity_out[state][input]);
            state = self.next_state[state][input];
        }
        debug_assert_eq!(state, 0);
        (parity, tail_info, tail_parity)
    }
}

/// One max-log-MAP pass over a terminated RSC trellis.
///
/// `sys_llr`, `par_llr`, `prior` have length K; `tail_sys`/`tail_par` carry
/// the termination observations. Writes extrinsic information and posterior
/// LLRs for the K information bits into the provided buffers.
pub fn maxlog_map(
    trellis: &Trellis,
    sys_llr: &[f64],
    par_llr: &[f64],
    tail_sys: &[f64],
    tail_par: &[f64],
    prior: &[f64],
    extrinsic: &mut Vec<f64>,
    posterior: &mut Vec<f64>,
) {
    let k = sys_llr.len();
    let m = trellis.memory_len;
    let ns = trellis.num_states;
    debug_assert_eq!(par_llr.len(), k);
    debug_assert_eq!(prior.len(), k);
    debug_assert_eq!(tail_sys.len(), m);
    debug_assert_eq!(tail_par.len(), m);

    let steps = k + m;
    let bit_metric = |bit: u8, llr: f64| if bit == 0 { llr / 2.0 } else { -llr / 2.0 };

    // gamma for (step, state, input): prior + systematic + parity components.
    let gamma = |step: usize, state: usize, input: usize| -> (f64, f64) {
        let (s_llr, p_llr, pr) = if step < k {
            (sys_llr[step], par_llr[step], prior[step])
        } else {
            (tail_sys[step - k], tail_par[step - k], 0.0)
        };
        let par_bit = trellis.parity_out[state][input];
        let non_parity = bit_metric(input as u8, pr) + bit_metric(input as u8, s_llr);
        let parity = bit_metric(par_bit, p_llr);
        (non_parity + parity, parity)
    };

    // Backward pass: beta[step][state], termination pins the final state to 0.
    let mut beta = vec![NEG_INF; (steps + 1) * ns];
    beta[steps * ns] = 0.0;
    for step in (0..steps).rev() {
        let (lo, hi) = (step * ns, (step + 1) * ns);
        for state in 0..ns {
            let mut best = NEG_INF;
            for input in 0..2 {
                let (g, _) = gamma(step, state, input);
                let nxt = trellis.next_state[state][input];
                let cand = g + beta[hi + nxt];
                if cand > best {
                    best = cand;
                }
            }
            beta[lo + state] = best;
        }
        // Recenter on state 0 (always on a surviving path) to avoid drift.
        let b0 = beta[lo];
        for state in 0..ns {
            beta[lo + state] -= b0;
        }
    }

    // Forward pass with metric extraction for the K info bits.
    extrinsic.clear();
    posterior.clear();
    let mut alpha = vec![NEG_INF; ns];
    let mut alpha_next = vec![NEG_INF; ns];
    alpha[0] = 0.0;
    for step in 0..k {
        let hi = (step + 1) * ns;
        let mut metric0 = NEG_INF;
        let mut metric1 = NEG_INF;
        alpha_next.iter_mut().for_each(|x| *x = NEG_INF);
        for state in 0..ns {
            if alpha[state] <= NEG_INF {
                continue;
            }
            for input in 0..2 {
                let (g, g_par) = gamma(step, state, input);
                let nxt = trellis.next_state[state][input];
                let cand_alpha = alpha[state] + g;
                if cand_alpha > alpha_next[nxt] {
                    alpha_next[nxt] = cand_alpha;
                }
                let cand_metric = alpha[state] + g_par + beta[hi + nxt];
                if input == 0 {
                    if cand_metric > metric0 {
                        metric0 = cand_metric;
                    }
                } else if cand_metric > metric1 {
                    metric1 = cand_metric;
                }
            }
        }
        let ext = metric0 - metric1;
        extrinsic.push(ext);
        posterior.push(sys_llr[step] + prior[step] + ext);
        std::mem::swap(&mut alpha, &mut alpha_next);
        let a0 = alpha[0];
        alpha.iter_mut().for_each(|x| *x -= a0);
    }
}

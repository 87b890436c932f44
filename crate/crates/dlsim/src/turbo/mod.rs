//! Rate-1/3 turbo codec with circular-buffer rate matching.
//!
//! The encoder parallel-concatenates two 8-state recursive systematic
//! constituents around an internal interleaver. Rate matching punctures or
//! repeats the mother code to any rate in [1/13, 1]; the decoder runs
//! iterative max-log-MAP with early exit on checksum pass.

pub mod crc;
mod interleaver;
mod rsc;

pub use interleaver::Interleaver;
pub use rsc::Trellis;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lowest supported effective code rate (heaviest repetition).
pub const MIN_RATE: f64 = 1.0 / 13.0;

/// Codec parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurboConfig {
    /// Information bits per block (including any appended checksum).
    pub block_length_k: usize,
    /// Turbo iterations for the decoder.
    pub n_iterations: u32,
    /// Seed for the fallback interleaver when K has no embedded QPP pair.
    pub interleaver_seed: u64,
    /// (feedback, feedforward) generator polynomials.
    pub constituent_polynomials: (usize, usize),
}

impl Default for TurboConfig {
    fn default() -> Self {
        TurboConfig {
            block_length_k: 1024,
            n_iterations: 8,
            interleaver_seed: 0,
            constituent_polynomials: (0o13, 0o15),
        }
    }
}

impl TurboConfig {
    pub fn validate(&self) -> Result<()> {
        if self.block_length_k < 40 {
            return Err(Error::invalid(format!(
                "block length {} below minimum 40",
                self.block_length_k
            )));
        }
        if self.n_iterations == 0 {
            return Err(Error::invalid("decoder needs at least one iteration"));
        }
        Ok(())
    }

    fn trellis(&self) -> Result<Trellis> {
        Trellis::new(
            self.constituent_polynomials.0,
            self.constituent_polynomials.1,
        )
    }
}

/// Output of the mother-code encoder, prior to rate matching.
#[derive(Debug, Clone, PartialEq)]
pub struct CodedBlock {
    /// The K information bits (systematic stream).
    pub systematic: Vec<u8>,
    /// Parity stream of the first constituent.
    pub parity1: Vec<u8>,
    /// Parity stream of the second (interleaved) constituent.
    pub parity2: Vec<u8>,
    /// Termination section: per constituent, interlaced (input, parity)
    /// pairs over the tail steps. 12 bits for 8-state constituents.
    pub tail: Vec<u8>,
}

impl CodedBlock {
    fn info_len(&self) -> usize {
        self.systematic.len()
    }

    /// Circular-buffer length: 3K plus the termination section.
    fn buffer_len(&self) -> usize {
        3 * self.info_len() + self.tail.len()
    }

    /// Materializes the circular buffer. Order: systematic, tail, then the
    /// two parity streams interlaced in sub-block-interleaved order. The
    /// systematic head means rate-1 transmission is exactly the information
    /// bits; the tail sits ahead of the parity so termination survives all
    /// but the highest rates; the spreading permutation makes any parity
    /// prefix a near-uniform sampling of the whole trellis, so puncturing
    /// degrades gracefully at high rates.
    fn circular_buffer(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.buffer_len());
        buf.extend_from_slice(&self.systematic);
        buf.extend_from_slice(&self.tail);
        for &p in &spread_permutation(self.info_len()) {
            buf.push(self.parity1[p]);
            buf.push(self.parity2[p]);
        }
        buf
    }
}

/// Sub-block spreading order: a 32-column block interleaver read out in
/// bit-reversed column order. Prefixes of the output sample the stream at
/// near-uniform stride.
fn spread_permutation(len: usize) -> Vec<usize> {
    const COLS: usize = 32;
    let rows = len.div_ceil(COLS);
    let mut order = Vec::with_capacity(len);
    for c in 0..COLS as u32 {
        let col = (c.reverse_bits() >> (32 - 5)) as usize;
        for r in 0..rows {
            let idx = r * COLS + col;
            if idx < len {
                order.push(idx);
            }
        }
    }
    order
}

/// Rate-matched output length for K information bits at `target_rate`.
pub fn rate_matched_len(k: usize, target_rate: f64) -> usize {
    (k as f64 / target_rate).ceil() as usize
}

/// Encodes one block with the parallel concatenation.
pub fn encode(info: &[u8], cfg: &TurboConfig) -> Result<CodedBlock> {
    cfg.validate()?;
    if info.len() != cfg.block_length_k {
        return Err(Error::invalid(format!(
            "info length {} does not match configured block length {}",
            info.len(),
            cfg.block_length_k
        )));
    }
    let trellis = cfg.trellis()?;
    let il = Interleaver::new(info.len(), cfg.interleaver_seed);

    let (parity1, tail_info1, tail_parity1) = trellis.encode(info);
    let mut interleaved = Vec::new();
    il.interleave(info, &mut interleaved);
    let (parity2, tail_info2, tail_parity2) = trellis.encode(&interleaved);

    let mut tail = Vec::with_capacity(4 * trellis.memory_len);
    for i in 0..trellis.memory_len {
        tail.push(tail_info1[i]);
        tail.push(tail_parity1[i]);
    }
    for i in 0..trellis.memory_len {
        tail.push(tail_info2[i]);
        tail.push(tail_parity2[i]);
    }

    Ok(CodedBlock {
        systematic: info.to_vec(),
        parity1,
        parity2,
        tail,
    })
}

fn check_rate(target_rate: f64) -> Result<()> {
    if !(MIN_RATE..=1.0).contains(&target_rate) {
        return Err(Error::invalid(format!(
            "target rate {target_rate} outside [1/13, 1]"
        )));
    }
    Ok(())
}

/// Selects the transmitted bits for `target_rate` from the circular buffer.
pub fn rate_match(block: &CodedBlock, target_rate: f64) -> Result<Vec<u8>> {
    check_rate(target_rate)?;
    Ok(rate_match_to(block, rate_matched_len(block.info_len(), target_rate)))
}

/// Reads `n_out` bits from the circular buffer, wrapping for repetition.
pub fn rate_match_to(block: &CodedBlock, n_out: usize) -> Vec<u8> {
    let buf = block.circular_buffer();
    (0..n_out).map(|i| buf[i % buf.len()]).collect()
}

/// Soft de-rate-matching: accumulates received LLRs back onto the mother
/// code positions (repetition combines, punctured positions stay 0).
/// Returns (systematic, parity1, parity2, tail) LLR vectors.
struct MotherLlrs {
    systematic: Vec<f64>,
    parity1: Vec<f64>,
    parity2: Vec<f64>,
    tail: Vec<f64>,
}

fn de_rate_match(llrs: &[f64], k: usize, tail_len: usize) -> MotherLlrs {
    let len = 3 * k + tail_len;
    let mut buf = vec![0.0f64; len];
    for (i, &l) in llrs.iter().enumerate() {
        buf[i % len] += l;
    }
    let systematic = buf[..k].to_vec();
    let tail = buf[k..k + tail_len].to_vec();
    let mut parity1 = vec![0.0f64; k];
    let mut parity2 = vec![0.0f64; k];
    for (j, &p) in spread_permutation(k).iter().enumerate() {
        parity1[p] = buf[k + tail_len + 2 * j];
        parity2[p] = buf[k + tail_len + 2 * j + 1];
    }
    MotherLlrs {
        systematic,
        parity1,
        parity2,
        tail,
    }
}

/// Result of one decode call.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    pub bits: Vec<u8>,
    /// True when the trailing checksum over the decoded block verified.
    pub crc_ok: bool,
    /// Turbo iterations actually run (early exit on checksum pass).
    pub iterations_run: u32,
}

/// Iterative turbo decode of rate-matched LLRs (positive favors bit 0).
pub fn decode(llrs: &[f64], cfg: &TurboConfig, target_rate: f64) -> Result<DecodeOutcome> {
    cfg.validate()?;
    check_rate(target_rate)?;
    let expected = rate_matched_len(cfg.block_length_k, target_rate);
    if llrs.len() != expected {
        return Err(Error::invalid(format!(
            "expected {expected} LLRs for K={} at rate {target_rate}, found {}",
            cfg.block_length_k,
            llrs.len()
        )));
    }
    decode_mother(llrs, cfg)
}

/// Decodes LLRs of any rate-matched length (possibly padded beyond the
/// nominal rate-matched size, combining wrapped repetitions).
pub fn decode_any_len(llrs: &[f64], cfg: &TurboConfig) -> Result<DecodeOutcome> {
    cfg.validate()?;
    decode_mother(llrs, cfg)
}

fn decode_mother(llrs: &[f64], cfg: &TurboConfig) -> Result<DecodeOutcome> {
    let k = cfg.block_length_k;
    let trellis = cfg.trellis()?;
    let m = trellis.memory_len;
    let tail_len = 4 * m;
    let mother = de_rate_match(llrs, k, tail_len);

    // Split the termination section back into per-constituent observations.
    let mut tail_sys1 = Vec::with_capacity(m);
    let mut tail_par1 = Vec::with_capacity(m);
    let mut tail_sys2 = Vec::with_capacity(m);
    let mut tail_par2 = Vec::with_capacity(m);
    for i in 0..m {
        tail_sys1.push(mother.tail[2 * i]);
        tail_par1.push(mother.tail[2 * i + 1]);
        tail_sys2.push(mother.tail[2 * m + 2 * i]);
        tail_par2.push(mother.tail[2 * m + 2 * i + 1]);
    }

    let il = Interleaver::new(k, cfg.interleaver_seed);
    let mut sys_interleaved = Vec::new();
    il.interleave(&mother.systematic, &mut sys_interleaved);

    let mut prior1 = vec![0.0f64; k];
    let mut prior2 = vec![0.0f64; k];
    let (mut ext, mut post) = (Vec::new(), Vec::new());
    let mut bits = vec![0u8; k];
    let mut crc_ok = false;
    let mut iterations_run = 0;

    for iter in 0..cfg.n_iterations {
        iterations_run = iter + 1;
        rsc::maxlog_map(
            &trellis,
            &mother.systematic,
            &mother.parity1,
            &tail_sys1,
            &tail_par1,
            &prior1,
            &mut ext,
            &mut post,
        );
        il.interleave(&ext, &mut prior2);
        rsc::maxlog_map(
            &trellis,
            &sys_interleaved,
            &mother.parity2,
            &tail_sys2,
            &tail_par2,
            &prior2,
            &mut ext,
            &mut post,
        );
        il.deinterleave(&ext, &mut prior1);

        // Posterior in natural order: systematic + prior into dec2 + its
        // extrinsic, all deinterleaved.
        let mut post_natural = vec![0.0f64; k];
        il.deinterleave(&post, &mut post_natural);
        for (b, &l) in bits.iter_mut().zip(post_natural.iter()) {
            *b = u8::from(l < 0.0);
        }
        if crc::check(&bits) {
            crc_ok = true;
            break;
        }
    }
    Ok(DecodeOutcome {
        bits,
        crc_ok,
        iterations_run,
    })
}

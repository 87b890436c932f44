//! Encode/rate-match/decode round trip at a chosen code rate, noiseless and
//! at a configurable SNR, with timing.
//!
//!     cargo run --release -p dlsim --example turbo_roundtrip [snr_db] [rate]

use dlsim::linksim::{awgn, modulate, soft_demap};
use dlsim::rng::task_rng;
use dlsim::turbo::{self, crc, TurboConfig};
use rand::Rng;

fn main() {
    let snr_db: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1.0);
    let rate: f64 = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1.0 / 3.0);
    let cfg = TurboConfig::default();
    let k = cfg.block_length_k;
    let mut rng = task_rng(7, &[]);

    // Noiseless round trip.
    let payload: Vec<u8> = (0..k - crc::CRC_BITS).map(|_| rng.gen_range(0..2u8)).collect();
    let info = crc::append(&payload);
    let block = turbo::encode(&info, &cfg).expect("encode");
    let tx = turbo::rate_match(&block, rate).expect("rate");
    let clean: Vec<f64> = tx.iter().map(|&b| if b == 0 { 20.0 } else { -20.0 }).collect();
    let out = turbo::decode(&clean, &cfg, rate).expect("decode");
    assert_eq!(out.bits, info);
    println!("noiseless: recovered {} info bits exactly, crc_ok={}", k, out.crc_ok);

    // Noisy blocks with timing.
    let n_blocks = 200;
    let noise_var = 10f64.powf(-snr_db / 10.0);
    let m = 2usize;
    let tx_len = turbo::rate_matched_len(k, rate).div_ceil(m) * m;
    let mut errors = 0u32;
    let start = std::time::Instant::now();
    for _ in 0..n_blocks {
        let payload: Vec<u8> = (0..k - crc::CRC_BITS).map(|_| rng.gen_range(0..2u8)).collect();
        let info = crc::append(&payload);
        let block = turbo::encode(&info, &cfg).expect("encode");
        let tx = turbo::rate_match_to(&block, tx_len);
        let symbols = modulate(&tx, m).expect("modulate");
        let received = awgn(&symbols, snr_db, &mut rng);
        let llrs = soft_demap(&received, m, noise_var).expect("demap");
        let out = turbo::decode_any_len(&llrs, &cfg).expect("decode");
        if out.bits != info {
            errors += 1;
        }
    }
    let elapsed = start.elapsed();
    println!(
        "QPSK rate {:.3} at {snr_db} dB: {errors}/{n_blocks} block errors ({:.1} blocks/s)",
        rate,
        n_blocks as f64 / elapsed.as_secs_f64()
    );
}

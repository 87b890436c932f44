//! Generates BLER-versus-SNR curves for selected CQIs and prints the 10%
//! crossings. Desk-scale settings; tweak the constants below for accuracy.
//!
//!     cargo run --release -p dlsim --example bler_curves [seed]

use dlsim::linksim::{run_bler_all, LinkSimConfig};
use dlsim::numerology::cqi_table;

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let cfg = LinkSimConfig {
        rng_seed: seed,
        ..LinkSimConfig::default()
    };
    let table = cqi_table();
    let start = std::time::Instant::now();
    let curves = run_bler_all(&table, &cfg).expect("valid config");
    eprintln!("simulated {} curves in {:.1?}", curves.len(), start.elapsed());

    println!("cqi,snr_db,bler,n_blocks,n_errors");
    for curve in &curves {
        for p in &curve.points {
            println!(
                "{},{},{},{},{}",
                curve.cqi_index, p.snr_db, p.bler, p.n_blocks, p.n_errors
            );
        }
    }

    eprintln!("\n10% crossings (log-linear):");
    let mut prev: Option<f64> = None;
    for curve in &curves {
        let crossing = crossing_10pct(curve);
        let spacing = prev.map(|p| format!("  (+{:.2} dB)", crossing - p)).unwrap_or_default();
        eprintln!("CQI {:2}: {:+.2} dB{}", curve.cqi_index, crossing, spacing);
        prev = Some(crossing);
    }
}

fn crossing_10pct(curve: &dlsim::linksim::BlerCurve) -> f64 {
    let pts = &curve.points;
    for w in pts.windows(2) {
        if w[0].bler >= 0.1 && w[1].bler < 0.1 {
            let floor = |b: f64, n: u64| b.max(0.5 / n as f64);
            let la = floor(w[0].bler, w[0].n_blocks).log10();
            let lb = floor(w[1].bler, w[1].n_blocks).log10();
            let t = (la - (-1.0)) / (la - lb);
            return w[0].snr_db + t * (w[1].snr_db - w[0].snr_db);
        }
    }
    f64::NAN
}

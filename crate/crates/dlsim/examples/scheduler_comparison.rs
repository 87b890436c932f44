//! Runs multi-seed drops under all three schedulers and prints the per-seed
//! ordering checks: median, maximum, Jain fairness, and cell sum.
//!
//!     cargo run --release -p dlsim --example scheduler_comparison [n_seeds] [n_subframes] [lut] [curves]
//!
//! Without the optional LUT/curves paths a synthetic reference set is used
//! (log-linear ramps spaced 2 dB apart), which keeps the example fast.

use std::collections::BTreeMap;

use dlsim::abstraction::{
    build_mi_table, curve_crossing, default_mi_grid, lut_load, Lut, MiesmParams, SnrCqiMap,
};
use dlsim::linksim::{BlerCurve, BlerPoint};
use dlsim::pipeline::read_curves_csv;
use dlsim::stats::{jain_index, EmpiricalCdf};
use dlsim::sysim::{run_drop, LinkReferences, SchedulerKind, SysimConfig};

fn synthetic_refs() -> (Lut, Vec<BlerCurve>) {
    let curves: Vec<BlerCurve> = (1..=15u8)
        .map(|c| {
            let mid = -8.0 + 2.0 * c as f64;
            let points = (-6..=6)
                .map(|i| {
                    let snr = mid + 0.5 * i as f64;
                    let bler = 10f64.powf((-1.0 - 0.5 * i as f64).min(0.0)).min(1.0);
                    BlerPoint {
                        snr_db: snr,
                        bler,
                        n_blocks: 100_000,
                        n_errors: (bler * 100_000.0) as u64,
                    }
                })
                .collect();
            BlerCurve {
                cqi_index: c,
                points,
            }
        })
        .collect();
    let thresholds = curves
        .iter()
        .map(|c| (c.cqi_index, curve_crossing(c, 0.1).unwrap()))
        .collect();
    let lut = Lut {
        map: SnrCqiMap {
            thresholds,
            target_bler: 0.1,
        },
        mi_tables: vec![
            build_mi_table(2, default_mi_grid()).unwrap(),
            build_mi_table(4, default_mi_grid()).unwrap(),
            build_mi_table(6, default_mi_grid()).unwrap(),
        ],
        alphas: (1..=15).map(|c| (c, MiesmParams::default())).collect(),
        seed: 0,
    };
    (lut, curves)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n_seeds: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let n_subframes: u32 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(2000);

    let (lut, curves) = match (args.get(3), args.get(4)) {
        (Some(lut_path), Some(curves_path)) => {
            let loaded = lut_load(lut_path).expect("load LUT");
            let curves = read_curves_csv(curves_path.as_ref()).expect("load curves");
            (loaded.lut, curves)
        }
        _ => synthetic_refs(),
    };
    let refs = LinkReferences {
        lut: &lut,
        curves: &curves,
    };
    let cfg = SysimConfig {
        n_subframes,
        ..SysimConfig::default()
    };

    let mut wins: BTreeMap<&str, u32> = BTreeMap::new();
    let mut pooled: BTreeMap<&'static str, Vec<f64>> = BTreeMap::new();
    println!(
        "{:>4} {:>28} {:>28} {:>24} {:>28}",
        "seed", "median (pf/rr/bq) Mbps", "max (pf/rr/bq) Mbps", "jain (pf/rr/bq)", "sum (pf/rr/bq) Mbps"
    );
    for seed in 1..=n_seeds {
        let start = std::time::Instant::now();
        let mut median = BTreeMap::new();
        let mut max = BTreeMap::new();
        let mut jain = BTreeMap::new();
        let mut sum = BTreeMap::new();
        for kind in SchedulerKind::ALL {
            let r = run_drop(&cfg, &refs, kind, seed).expect("drop");
            let cdf = EmpiricalCdf::new(&r.per_ue_throughput_bps).expect("nonempty");
            median.insert(kind.id(), cdf.percentile(50.0).unwrap());
            max.insert(kind.id(), cdf.max());
            jain.insert(kind.id(), jain_index(&r.per_ue_throughput_bps).unwrap());
            sum.insert(kind.id(), r.per_ue_throughput_bps.iter().sum::<f64>());
            pooled
                .entry(kind.id())
                .or_default()
                .extend(r.per_ue_throughput_bps);
        }
        let m = |t: &BTreeMap<&str, f64>, k: &str| t[k];
        println!(
            "{seed:>4} {:>8.3}/{:>8.3}/{:>8.3} {:>9.3}/{:>8.3}/{:>8.3} {:>7.3}/{:>7.3}/{:>7.3} {:>9.2}/{:>8.2}/{:>8.2}  ({:.1?})",
            m(&median, "pf") / 1e6,
            m(&median, "rr") / 1e6,
            m(&median, "bestcqi") / 1e6,
            m(&max, "pf") / 1e6,
            m(&max, "rr") / 1e6,
            m(&max, "bestcqi") / 1e6,
            m(&jain, "pf"),
            m(&jain, "rr"),
            m(&jain, "bestcqi"),
            m(&sum, "pf") / 1e6,
            m(&sum, "rr") / 1e6,
            m(&sum, "bestcqi") / 1e6,
            start.elapsed()
        );
        let mut tally = |name: &'static str, ok: bool| {
            *wins.entry(name).or_default() += u32::from(ok);
        };
        tally("median pf>rr", m(&median, "pf") > m(&median, "rr"));
        tally("median rr>bq", m(&median, "rr") > m(&median, "bestcqi"));
        tally("max bq>=pf", m(&max, "bestcqi") >= m(&max, "pf"));
        tally("max bq>=rr", m(&max, "bestcqi") >= m(&max, "rr"));
        tally("jain rr>=pf", m(&jain, "rr") >= m(&jain, "pf"));
        tally("jain pf>=bq", m(&jain, "pf") >= m(&jain, "bestcqi"));
        tally("sum bq>=pf", m(&sum, "bestcqi") >= m(&sum, "pf"));
        tally("sum pf>=rr", m(&sum, "pf") >= m(&sum, "rr"));
    }
    println!("\nordering wins over {n_seeds} seeds:");
    for (name, count) in &wins {
        println!("  {name}: {count}/{n_seeds}");
    }
    println!("\npooled percentiles (50/95/100) per scheduler:");
    for (id, values) in &pooled {
        let cdf = EmpiricalCdf::new(values).unwrap();
        println!(
            "  {id}: {:.3} / {:.3} / {:.3} Mbps, jain {:.3}",
            cdf.percentile(50.0).unwrap() / 1e6,
            cdf.percentile(95.0).unwrap() / 1e6,
            cdf.max() / 1e6,
            jain_index(values).unwrap()
        );
    }
}

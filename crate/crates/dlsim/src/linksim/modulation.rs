//! Gray-mapped square constellations and max-log soft demapping.
//!
//! Bit order follows the usual downlink convention: even-indexed bits of a
//! symbol select the in-phase level, odd-indexed bits the quadrature level,
//! most significant first per axis. All constellations are scaled to unit
//! average symbol energy. LLR convention: positive favors bit 0.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Per-axis Gray amplitude for `bits_per_axis` bits, index read MSB-first.
fn gray_amplitude(idx: usize, bits_per_axis: usize) -> f64 {
    let b = |k: usize| -> f64 {
        let bit = (idx >> (bits_per_axis - 1 - k)) & 1;
        1.0 - 2.0 * bit as f64
    };
    match bits_per_axis {
        1 => b(0),
        2 => b(0) * (2.0 - b(1)),
        3 => b(0) * (4.0 - b(1) * (2.0 - b(2))),
        _ => unreachable!("unsupported axis width"),
    }
}

/// Normalization factor so the constellation has unit average energy.
fn axis_scale(bits_per_axis: usize) -> f64 {
    // Mean of level^2 over one axis is (4^n - 1)/3 for n bits per axis;
    // two axes double it.
    let n_levels = 1usize << bits_per_axis;
    let mean_sq: f64 = (0..n_levels)
        .map(|i| {
            let a = gray_amplitude(i, bits_per_axis);
            a * a
        })
        .sum::<f64>()
        / n_levels as f64;
    (2.0 * mean_sq).sqrt().recip()
}

fn check_order(modulation_bits: usize) -> Result<usize> {
    match modulation_bits {
        2 | 4 | 6 => Ok(modulation_bits / 2),
        _ => Err(Error::invalid(format!(
            "unsupported modulation order {modulation_bits} (expected 2, 4, or 6)"
        ))),
    }
}

/// All constellation points with their bit labels, index = label MSB-first.
pub fn constellation(modulation_bits: usize) -> Result<Vec<Complex64>> {
    let half = check_order(modulation_bits)?;
    let scale = axis_scale(half);
    let n = 1usize << modulation_bits;
    Ok((0..n)
        .map(|label| {
            let mut i_idx = 0usize;
            let mut q_idx = 0usize;
            for k in 0..modulation_bits {
                let bit = (label >> (modulation_bits - 1 - k)) & 1;
                if k % 2 == 0 {
                    i_idx = (i_idx << 1) | bit;
                } else {
                    q_idx = (q_idx << 1) | bit;
                }
            }
            Complex64::new(
                gray_amplitude(i_idx, half) * scale,
                gray_amplitude(q_idx, half) * scale,
            )
        })
        .collect())
}

/// Maps a bit sequence to complex symbols.
pub fn modulate(bits: &[u8], modulation_bits: usize) -> Result<Vec<Complex64>> {
    let half = check_order(modulation_bits)?;
    if bits.len() % modulation_bits != 0 {
        return Err(Error::invalid(format!(
            "bit count {} not divisible by modulation order {modulation_bits}",
            bits.len()
        )));
    }
    let scale = axis_scale(half);
    Ok(bits
        .chunks_exact(modulation_bits)
        .map(|chunk| {
            let mut i_idx = 0usize;
            let mut q_idx = 0usize;
            for (k, &b) in chunk.iter().enumerate() {
                if k % 2 == 0 {
                    i_idx = (i_idx << 1) | (b & 1) as usize;
                } else {
                    q_idx = (q_idx << 1) | (b & 1) as usize;
                }
            }
            Complex64::new(
                gray_amplitude(i_idx, half) * scale,
                gray_amplitude(q_idx, half) * scale,
            )
        })
        .collect())
}

/// Max-log LLRs per coded bit for the received symbols.
///
/// `noise_var` is the total complex noise variance per symbol.
pub fn soft_demap(
    received: &[Complex64],
    modulation_bits: usize,
    noise_var: f64,
) -> Result<Vec<f64>> {
    let half = check_order(modulation_bits)?;
    if noise_var <= 0.0 {
        return Err(Error::invalid(format!(
            "noise variance {noise_var} must be positive"
        )));
    }
    let scale = axis_scale(half);
    let n_levels = 1usize << half;
    let levels: Vec<f64> = (0..n_levels)
        .map(|i| gray_amplitude(i, half) * scale)
        .collect();

    // The square Gray constellation factors into two independent PAM
    // problems, one per axis; per-axis noise variance is noise_var / 2, so
    // the per-axis max-log LLR is (d1^2 - d0^2) / noise_var.
    let axis_llr = |y: f64, bit_pos: usize| -> f64 {
        let mut best0 = f64::INFINITY;
        let mut best1 = f64::INFINITY;
        for (idx, &lvl) in levels.iter().enumerate() {
            let d = y - lvl;
            let d2 = d * d;
            if (idx >> (half - 1 - bit_pos)) & 1 == 0 {
                best0 = best0.min(d2);
            } else {
                best1 = best1.min(d2);
            }
        }
        (best1 - best0) / noise_var
    };

    let mut llrs = Vec::with_capacity(received.len() * modulation_bits);
    for &y in received {
        for k in 0..half {
            llrs.push(axis_llr(y.re, k));
            llrs.push(axis_llr(y.im, k));
        }
    }
    Ok(llrs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn qpsk_corner() {
        let syms = modulate(&[0, 0], 2).unwrap();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!((syms[0].re - inv_sqrt2).abs() < 1e-12);
        assert!((syms[0].im - inv_sqrt2).abs() < 1e-12);
    }

    #[test]
    fn rejects_unaligned_and_bad_order() {
        assert!(modulate(&[0, 1, 0], 2).is_err());
        assert!(modulate(&[0, 1], 3).is_err());
        assert!(soft_demap(&[], 2, 0.0).is_err());
        assert!(soft_demap(&[], 2, -1.0).is_err());
    }

    #[test]
    fn unit_average_energy_all_orders() {
        let mut rng = crate::rng::task_rng(11, &[]);
        for m in [2usize, 4, 6] {
            let n_sym = 10_000;
            let bits: Vec<u8> = (0..n_sym * m).map(|_| rng.gen_range(0..2)).collect();
            let syms = modulate(&bits, m).unwrap();
            let power: f64 = syms.iter().map(|s| s.norm_sqr()).sum::<f64>() / n_sym as f64;
            assert!((power - 1.0).abs() < 0.05, "order {m}: power {power}");
        }
    }

    #[test]
    fn constellation_levels_are_gray_per_axis() {
        // Adjacent PAM levels must differ in exactly one bit.
        for half in [1usize, 2, 3] {
            let n = 1usize << half;
            let mut level_to_idx: Vec<(f64, usize)> = (0..n)
                .map(|i| (gray_amplitude(i, half), i))
                .collect();
            level_to_idx.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            for w in level_to_idx.windows(2) {
                let diff = (w[0].1 ^ w[1].1).count_ones();
                assert_eq!(diff, 1, "axis width {half}");
            }
        }
    }

    #[test]
    fn hard_decisions_round_trip_all_orders() {
        let mut rng = crate::rng::task_rng(12, &[]);
        for m in [2usize, 4, 6] {
            let bits: Vec<u8> = (0..600 * m).map(|_| rng.gen_range(0..2)).collect();
            let syms = modulate(&bits, m).unwrap();
            let llrs = soft_demap(&syms, m, 1e-6).unwrap();
            let decided: Vec<u8> = llrs.iter().map(|&l| u8::from(l < 0.0)).collect();
            assert_eq!(decided, bits, "order {m}");
        }
    }

    #[test]
    fn qpsk_first_quadrant_llr_signs() {
        let y = [num_complex::Complex64::new(3.0, 3.0)];
        let llrs = soft_demap(&y, 2, 0.5).unwrap();
        assert!(llrs[0] > 5.0);
        assert!(llrs[1] > 5.0);
    }

    #[test]
    fn boundary_symbol_gives_zero_llr() {
        // Midpoint between the two I levels of QPSK is the imaginary axis.
        let y = [num_complex::Complex64::new(0.0, 0.9)];
        let llrs = soft_demap(&y, 2, 1.0).unwrap();
        assert!(llrs[0].abs() < 1e-12);
        assert!(llrs[1] > 0.0);
    }
}

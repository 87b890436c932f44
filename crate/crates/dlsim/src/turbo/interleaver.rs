//! Internal interleaver for the parallel concatenation.
//!
//! Quadratic permutation polynomial coefficients are used for block sizes
//! where the standard pair is embedded below; any other size falls back to a
//! seeded Fisher-Yates permutation so arbitrary K stays reproducible.

use rand::seq::SliceRandom;

use crate::rng::task_rng;

/// (K, f1, f2) with pi(i) = (f1*i + f2*i^2) mod K.
const QPP_COEFFICIENTS: [(usize, usize, usize); 4] = [
    (40, 3, 10),
    (48, 7, 12),
    (1024, 31, 64),
    (6144, 263, 480),
];

#[derive(Debug, Clone)]
pub struct Interleaver {
    forward: Vec<usize>,
    inverse: Vec<usize>,
    qpp: bool,
}

impl Interleaver {
    /// Builds the interleaver for `k` information bits. `seed` only matters
    /// when `k` has no embedded QPP pair.
    pub fn new(k: usize, seed: u64) -> Self {
        let (forward, qpp) = match QPP_COEFFICIENTS.iter().find(|&&(kk, _, _)| kk == k) {
            Some(&(_, f1, f2)) => {
                let perm = (0..k)
                    .map(|i| (f1.wrapping_mul(i) + f2.wrapping_mul(i).wrapping_mul(i)) % k)
                    .collect::<Vec<_>>();
                (perm, true)
            }
            None => {
                let mut perm: Vec<usize> = (0..k).collect();
                let mut rng = task_rng(seed, &[0x1eaf, k as u64]);
                perm.shuffle(&mut rng);
                (perm, false)
            }
        };
        let mut inverse = vec![0usize; k];
        for (i, &p) in forward.iter().enumerate() {
            inverse[p] = i;
        }
        Interleaver {
            forward,
            inverse,
            qpp,
        }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// True when the permutation came from an embedded QPP pair.
    pub fn is_qpp(&self) -> bool {
        self.qpp
    }

    /// out[i] = input[pi(i)]: the sequence as read by the second constituent.
    pub fn interleave<T: Copy>(&self, input: &[T], out: &mut Vec<T>) {
        debug_assert_eq!(input.len(), self.forward.len());
        out.clear();
        out.extend(self.forward.iter().map(|&p| input[p]));
    }

    /// Inverse of [`Interleaver::interleave`].
    pub fn deinterleave<T: Copy>(&self, input: &[T], out: &mut Vec<T>) {
        debug_assert_eq!(input.len(), self.inverse.len());
        out.clear();
        out.extend(self.inverse.iter().map(|&p| input[p]));
    }
}

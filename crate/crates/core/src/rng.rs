//! Stateless counter-based hashing. Every random quantity in the crate is a
//! pure function of a key tuple, so queries can happen lazily, in any order
//! and from any thread.

pub const TAG_WEIGHT: u64 = 0x7765_6967_6874_0001;
pub const TAG_RESAMPLE: u64 = 0x7265_7361_6d70_0002;
pub const TAG_KDEP: u64 = 0x6b64_6570_0000_0003;
pub const TAG_REPLICA: u64 = 0x7265_706c_6963_0004;
pub const TAG_AUX: u64 = 0x6175_7800_0000_0005;

#[inline]
pub fn fmix64(mut h: u64) -> u64 {
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^= h >> 33;
    h = h.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    h ^= h >> 33;
    h
}

#[inline]
pub fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Chains words through splitmix then finalizes with fmix64.
pub fn hash_words(words: &[u64]) -> u64 {
    let mut h = 0x243f_6a88_85a3_08d3u64;
    for w in words {
        h = splitmix(h ^ splitmix(*w));
    }
    fmix64(h ^ words.len() as u64)
}

pub fn hash_key(tag: u64, seed: u64, coords: &[i64], extra: u64) -> u64 {
    let mut h = splitmix(tag ^ 0x5851_f42d_4c95_7f2d);
    h = splitmix(h ^ seed);
    for c in coords {
        h = splitmix(h ^ (*c as u64));
    }
    h = splitmix(h ^ extra);
    fmix64(h ^ (coords.len() as u64).rotate_left(32))
}

/// Uniform in the open interval (0,1).
#[inline]
pub fn to_unit(h: u64) -> f64 {
    ((h >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Seed for replica `idx` under `master`.
pub fn replica_seed(master: u64, idx: u64) -> u64 {
    hash_words(&[TAG_REPLICA, master, idx])
}

/// Small sequential generator for auxiliary sampling (probe paths, subsamples).
#[derive(Clone, Debug)]
pub struct SplitMix {
    state: u64,
}

impl SplitMix {
    pub fn new(seed: u64) -> Self {
        SplitMix { state: hash_words(&[TAG_AUX, seed]) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn unit(&mut self) -> f64 {
        to_unit(self.next_u64())
    }

    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as u64) as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn avalanche() {
        // Flipping one input bit should flip about half the output bits.
        let mut total = 0u64;
        let mut n = 0u64;
        for s in 0..200u64 {
            let base = hash_key(TAG_WEIGHT, s, &[3, -7], 1);
            for bit in 0..64 {
                let h = hash_key(TAG_WEIGHT, s ^ (1 << bit), &[3, -7], 1);
                total += (base ^ h).count_ones() as u64;
                n += 1;
            }
        }
        let mean = total as f64 / n as f64;
        assert!((mean - 32.0).abs() < 0.5, "mean flipped bits {mean}");
    }

    #[test]
    fn unit_interval_open() {
        assert!(to_unit(0) > 0.0);
        assert!(to_unit(u64::MAX) < 1.0);
    }

    #[test]
    fn tags_separate_streams() {
        assert_ne!(hash_key(TAG_WEIGHT, 1, &[0, 0], 1), hash_key(TAG_RESAMPLE, 1, &[0, 0], 1));
    }

    #[test]
    fn uniform_mean() {
        let n = 100_000;
        let m: f64 = (0..n).map(|i| to_unit(hash_words(&[9, i]))).sum::<f64>() / n as f64;
        assert!((m - 0.5).abs() < 3.0 * (1.0f64 / 12.0 / n as f64).sqrt());
    }
}

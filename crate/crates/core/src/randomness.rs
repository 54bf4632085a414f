//! Keyed randomness for the graphical construction.
//!
//! Every clock increment `E_{x,n}` and coin `B_{x,n}` is a pure function of
//! `(seed, stream, x + shift, n, channel)`. Nothing is stateful, so a site's
//! ring sequence can be replayed, skipped ahead or shifted in space without
//! disturbing any other site.

use serde::{Deserialize, Serialize};

const CHANNEL_EXP: u64 = 0x243F_6A88_85A3_08D3;
const CHANNEL_COIN: u64 = 0x1319_8A2E_0370_7344;
/// Channel used when sampling random initial conditions.
pub(crate) const CHANNEL_INIT: u64 = 0xA409_3822_299F_31D0;

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

#[inline(always)]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash prefix for one `(seed, stream, site)` triple.
#[inline]
pub(crate) fn site_key(seed: u64, stream: u64, site: i64) -> u64 {
    let h = mix64(seed ^ 0x9E37_79B9_7F4A_7C15);
    let h = mix64(h ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    mix64(h ^ (site as u64).wrapping_mul(0xAEF1_7502_108E_F2D9))
}

#[inline(always)]
pub(crate) fn leaf(key: u64, index: u64, channel: u64) -> u64 {
    mix64(mix64(key.wrapping_add(index.wrapping_mul(0xDB4F_0B91_75AE_2165))) ^ channel)
}

/// Uniform on the open interval (0, 1) from the top 53 bits.
#[inline(always)]
pub(crate) fn open_unit(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * TWO_POW_M53
}

#[inline(always)]
fn exp_from_key(key: u64, index: u64) -> f64 {
    -open_unit(leaf(key, index, CHANNEL_EXP)).ln()
}

#[inline(always)]
fn coin_from_key(key: u64, index: u64, p: f64) -> u8 {
    u8::from(open_unit(leaf(key, index, CHANNEL_COIN)) < p)
}

/// The collection `(B_{x,n}, E_{x,n})` of coins and clock increments.
///
/// `stream` distinguishes independent copies of the collection; `shift`
/// implements the space shift, so that `shifted(y)` reads site `x + y` of
/// the unshifted collection when asked for site `x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClockCollection {
    pub seed: u64,
    pub stream: u64,
    pub shift: i64,
    pub p: f64,
}

impl ClockCollection {
    pub fn new(seed: u64, stream: u64, p: f64) -> Self {
        Self {
            seed,
            stream,
            shift: 0,
            p,
        }
    }

    /// Collection for copy `copy` of trajectory `run`.
    pub fn for_run(seed: u64, run: u64, copy: u64, p: f64) -> Self {
        Self::new(seed, (run << 16) | (copy & 0xFFFF), p)
    }

    pub fn shifted(&self, y: i64) -> Self {
        Self {
            shift: self.shift.wrapping_add(y),
            ..*self
        }
    }

    #[inline]
    pub(crate) fn key(&self, site: i64) -> u64 {
        site_key(self.seed, self.stream, site.wrapping_add(self.shift))
    }

    /// The increment `E_{site,n}`.
    pub fn increment(&self, site: i64, n: u64) -> f64 {
        exp_from_key(self.key(site), n)
    }

    /// Time of the `n`-th ring at `site`, i.e. `E_{site,1} + ... + E_{site,n}`.
    ///
    /// Summation runs in index order so the value is bit-identical to the
    /// running sum kept by [`SiteClock`]. `n = 0` gives the empty sum.
    pub fn ring_time(&self, site: i64, n: u64) -> f64 {
        let key = self.key(site);
        let mut t = 0.0;
        for k in 1..=n {
            t += exp_from_key(key, k);
        }
        t
    }

    /// The coin `B_{site,n}`: 1 with probability `p`.
    pub fn coin(&self, site: i64, n: u64) -> u8 {
        coin_from_key(self.key(site), n, self.p)
    }

    pub fn site_clock(&self, site: i64) -> SiteClock {
        SiteClock::new(self.key(site))
    }
}

/// Running cursor over the rings of one site.
#[derive(Clone, Copy, Debug)]
pub struct SiteClock {
    key: u64,
    /// Index of the current ring; 0 before the first one.
    pub index: u64,
    /// Time of ring `index`.
    pub time: f64,
}

impl SiteClock {
    fn new(key: u64) -> Self {
        Self {
            key,
            index: 0,
            time: 0.0,
        }
    }

    #[inline(always)]
    pub fn advance(&mut self) {
        self.index += 1;
        self.time += exp_from_key(self.key, self.index);
    }

    #[inline(always)]
    pub fn coin(&self, p: f64) -> u8 {
        coin_from_key(self.key, self.index, p)
    }
}

/// A uniform draw on (0,1) for initial-condition sampling, keyed by site.
pub(crate) fn init_uniform(seed: u64, site: i64) -> f64 {
    open_unit(leaf(site_key(seed, u64::MAX, site), 0, CHANNEL_INIT))
}

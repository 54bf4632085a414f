//! Windowed spin configurations on Z and the observables read off them.
//!
//! Spins are 0 (empty) or 1 (occupied). A configuration stores a finite
//! window `[lo, hi]`; every site outside reads as `exterior`. The front of a
//! configuration that is all ones on a left half-line is its leftmost zero.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randomness::init_uniform;

/// What the infinite configuration looks like beyond one edge of the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FarField {
    /// All ones, so the frozen exterior is exact until the edge is touched.
    Ones,
    /// A random field the window cannot represent; the truncation error
    /// leaks in from the edge from time zero.
    Random,
}

/// Default width of the sentinel strips at each window edge.
pub const DEFAULT_TOUCHED_MARGIN: i64 = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinConfig {
    lo: i64,
    hi: i64,
    spins: Vec<u8>,
    exterior: u8,
    zeros: usize,
    pub far_left: FarField,
    pub far_right: FarField,
    /// Width of the sentinel strips; a flip inside one means the window was
    /// too small (when the far field on that side is all ones).
    pub touched_margin: i64,
}

impl SpinConfig {
    /// All-ones window with an all-ones exterior.
    pub fn all_ones(lo: i64, hi: i64) -> Result<Self> {
        Self::filled(lo, hi, 1, 1)
    }

    fn filled(lo: i64, hi: i64, value: u8, exterior: u8) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidParameter(format!("empty window [{lo}, {hi}]")));
        }
        let len = (hi - lo + 1) as usize;
        Ok(Self {
            lo,
            hi,
            spins: vec![value; len],
            exterior,
            zeros: if value == 0 { len } else { 0 },
            far_left: FarField::Ones,
            far_right: FarField::Ones,
            touched_margin: DEFAULT_TOUCHED_MARGIN,
        })
    }

    /// Configuration on a finite box `[lo, hi]` with empty (zero) boundary.
    /// `bits[k]` is the spin at `lo + k`.
    pub fn zero_boundary(lo: i64, bits: &[u8]) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidParameter("empty box".into()));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidPattern("spins must be 0 or 1".into()));
        }
        let hi = lo + bits.len() as i64 - 1;
        let mut c = Self::filled(lo, hi, 1, 0)?;
        for (k, &b) in bits.iter().enumerate() {
            c.set(lo + k as i64, b);
        }
        Ok(c)
    }

    /// Box configuration from a little-endian state index (bit k = site lo+k).
    pub fn from_state_index(lo: i64, size: usize, index: usize) -> Result<Self> {
        let bits: Vec<u8> = (0..size).map(|k| ((index >> k) & 1) as u8).collect();
        Self::zero_boundary(lo, &bits)
    }

    /// Little-endian state index of the window contents.
    pub fn state_index(&self) -> usize {
        self.spins
            .iter()
            .enumerate()
            .fold(0usize, |acc, (k, &b)| acc | ((b as usize) << k))
    }

    #[inline]
    pub fn lo(&self) -> i64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> i64 {
        self.hi
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    #[inline]
    pub fn exterior(&self) -> u8 {
        self.exterior
    }

    #[inline]
    pub fn contains(&self, x: i64) -> bool {
        x >= self.lo && x <= self.hi
    }

    #[inline(always)]
    pub fn get(&self, x: i64) -> u8 {
        if x >= self.lo && x <= self.hi {
            self.spins[(x - self.lo) as usize]
        } else {
            self.exterior
        }
    }

    /// Sets a window site and returns the old value.
    #[inline(always)]
    pub fn set(&mut self, x: i64, v: u8) -> u8 {
        debug_assert!(v <= 1);
        let slot = &mut self.spins[(x - self.lo) as usize];
        let old = *slot;
        if old != v {
            *slot = v;
            if v == 0 {
                self.zeros += 1;
            } else {
                self.zeros -= 1;
            }
        }
        old
    }

    /// Number of zeros inside the window.
    #[inline]
    pub fn zero_count(&self) -> usize {
        self.zeros
    }

    pub fn spins(&self) -> &[u8] {
        &self.spins
    }

    /// Leftmost zero at or right of `x`, inside the window.
    pub fn first_zero_from(&self, x: i64) -> Option<i64> {
        let start = x.max(self.lo);
        if start > self.hi {
            return None;
        }
        self.spins[(start - self.lo) as usize..]
            .iter()
            .position(|&b| b == 0)
            .map(|k| start + k as i64)
    }

    /// Position of the leftmost zero.
    pub fn front(&self) -> Result<i64> {
        if self.exterior == 0 {
            return Err(Error::InvalidParameter(
                "front is undefined with an empty exterior".into(),
            ));
        }
        self.first_zero_from(self.lo).ok_or(Error::NoFront)
    }

    /// `θ_y σ`, i.e. the configuration with `(θ_y σ)(x) = σ(x + y)`.
    pub fn shifted(&self, y: i64) -> Self {
        Self {
            lo: self.lo - y,
            hi: self.hi - y,
            ..self.clone()
        }
    }

    /// Grows the window to cover `[lo, hi]`, filling with the exterior value.
    /// Growing into a random far field is refused.
    pub fn extend_to(&mut self, lo: i64, hi: i64) -> Result<()> {
        if (lo < self.lo && self.far_left == FarField::Random)
            || (hi > self.hi && self.far_right == FarField::Random)
        {
            return Err(Error::WindowDoesNotCover { lo, hi });
        }
        let new_lo = lo.min(self.lo);
        let new_hi = hi.max(self.hi);
        if new_lo == self.lo && new_hi == self.hi {
            return Ok(());
        }
        let mut spins = vec![self.exterior; (new_hi - new_lo + 1) as usize];
        let off = (self.lo - new_lo) as usize;
        spins[off..off + self.spins.len()].copy_from_slice(&self.spins);
        let added = spins.len() - self.spins.len();
        if self.exterior == 0 {
            self.zeros += added;
        }
        self.spins = spins;
        self.lo = new_lo;
        self.hi = new_hi;
        Ok(())
    }

    /// `true` when the configuration is all ones left of its leftmost zero
    /// and that zero sits at `x`.
    pub fn is_lo_form_at(&self, x: i64) -> bool {
        self.exterior == 1 && self.first_zero_from(self.lo) == Some(x)
    }

    /// Bits on `[a, b]` as a 0/1 string.
    pub fn bit_string(&self, a: i64, b: i64) -> String {
        (a..=b).map(|x| if self.get(x) == 0 { '0' } else { '1' }).collect()
    }
}

/// Initial conditions in LO-form with the front at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum InitialCondition {
    /// `δ^0`: a single zero at the origin.
    Delta0,
    /// Ones on the negative half-line, a zero at 0 and i.i.d. spins on the
    /// positive half-line that are 1 with probability `p`.
    BernoulliRight { p: f64, seed: u64 },
    /// `bits[k]` is the spin at `offset + k`; everything else is 1.
    Explicit { offset: i64, bits: Vec<u8> },
}

impl InitialCondition {
    /// Parses a 0/1 string anchored at the origin.
    pub fn from_pattern(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidPattern(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Self::Explicit { offset: 0, bits })
    }
}

/// Builds an initial configuration on the window `[lo, hi]`.
pub fn make_initial(kind: &InitialCondition, lo: i64, hi: i64) -> Result<SpinConfig> {
    if lo > 0 || hi < 0 {
        return Err(Error::InvalidParameter(format!(
            "window [{lo}, {hi}] does not contain the origin"
        )));
    }
    let mut c = SpinConfig::all_ones(lo, hi)?;
    match kind {
        InitialCondition::Delta0 => {
            c.set(0, 0);
        }
        InitialCondition::BernoulliRight { p, seed } => {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::InvalidParameter(format!("p = {p} outside [0,1]")));
            }
            c.set(0, 0);
            for x in 1..=hi {
                let v = u8::from(init_uniform(*seed, x) < *p);
                c.set(x, v);
            }
            c.far_right = FarField::Random;
        }
        InitialCondition::Explicit { offset, bits } => {
            if bits.iter().any(|&b| b > 1) {
                return Err(Error::InvalidPattern("spins must be 0 or 1".into()));
            }
            for (k, &b) in bits.iter().enumerate() {
                let x = offset + k as i64;
                if b == 0 && x < 0 {
                    return Err(Error::InvalidPattern(format!("zero at {x}, left of the origin")));
                }
                if !c.contains(x) {
                    return Err(Error::InvalidPattern(format!("site {x} outside the window")));
                }
                c.set(x, b);
            }
            if c.get(0) != 0 {
                return Err(Error::InvalidPattern("no zero at the origin".into()));
            }
        }
    }
    Ok(c)
}

/// Membership in `H(a, b, l)`: every length-`l` sub-box of `[a, b]` holds a zero.
pub fn gap_event(config: &SpinConfig, a: i64, b: i64, l: i64) -> bool {
    debug_assert!(a <= b && l >= 1);
    let last_start = b - l + 1;
    if last_start < a {
        return true;
    }
    // A run of l consecutive ones fully inside [a, b] is the only way to fail.
    let mut run = 0i64;
    for x in a..=b {
        if config.get(x) == 1 {
            run += 1;
            if run >= l {
                return false;
            }
        } else {
            run = 0;
        }
    }
    true
}

/// Spins on `[X, X + width]` read from the front `X`; bit `k` is `σ(X + k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pattern {
    pub bits: u64,
    pub width: u32,
}

pub const MAX_PATTERN_WIDTH: u32 = 63;

impl Pattern {
    #[inline]
    pub fn bit(&self, k: u32) -> u8 {
        ((self.bits >> k) & 1) as u8
    }

    pub fn parse(s: &str) -> Result<Self> {
        if s.is_empty() || s.len() > MAX_PATTERN_WIDTH as usize + 1 {
            return Err(Error::InvalidPattern(format!("bad pattern length {}", s.len())));
        }
        let mut bits = 0u64;
        for (k, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << k,
                other => return Err(Error::InvalidPattern(format!("unexpected {other:?}"))),
            }
        }
        Ok(Self {
            bits,
            width: s.len() as u32 - 1,
        })
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..=self.width {
            f.write_str(if self.bit(k) == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

pub fn seen_from_front_at(config: &SpinConfig, front: i64, width: u32) -> Result<Pattern> {
    if width > MAX_PATTERN_WIDTH {
        return Err(Error::InvalidParameter(format!("pattern width {width} too large")));
    }
    let end = front + width as i64;
    if !config.contains(front) || !config.contains(end) {
        return Err(Error::WindowDoesNotCover { lo: front, hi: end });
    }
    let mut bits = 0u64;
    for k in 0..=width {
        bits |= (config.get(front + k as i64) as u64) << k;
    }
    Ok(Pattern { bits, width })
}

/// The configuration seen from the front, restricted to `[0, width]`.
pub fn seen_from_front(config: &SpinConfig, width: u32) -> Result<Pattern> {
    let x = config.front()?;
    seen_from_front_at(config, x, width)
}

/// `ξ^x`: distance from `x` to the nearest empty site of the box
/// `[boundary.0, boundary.1]`, the two boundary sites counting as empty.
pub fn distance_to_zero(config: &SpinConfig, x: i64, boundary: (i64, i64)) -> Result<i64> {
    let (a, b) = boundary;
    if x < a || x > b {
        return Err(Error::InvalidParameter(format!("{x} outside [{a}, {b}]")));
    }
    let cap = (x - a + 1).min(b + 1 - x);
    for d in 0..cap {
        if config.get(x - d) == 0 || config.get(x + d) == 0 {
            return Ok(d);
        }
    }
    Ok(cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_zeros(lo: i64, hi: i64, zeros: &[i64]) -> SpinConfig {
        let mut c = SpinConfig::all_ones(lo, hi).unwrap();
        for &z in zeros {
            c.set(z, 0);
        }
        c
    }

    #[test]
    fn delta0_initial() {
        let c = make_initial(&InitialCondition::Delta0, -10, 10).unwrap();
        for x in -10..=10 {
            assert_eq!(c.get(x), u8::from(x != 0));
        }
        assert_eq!(c.front().unwrap(), 0);
        assert_eq!(seen_from_front(&c, 3).unwrap().to_string(), "0111");
    }

    #[test]
    fn bernoulli_right_initial() {
        let c = make_initial(&InitialCondition::BernoulliRight { p: 0.9, seed: 3 }, -50, 100_000)
            .unwrap();
        assert_eq!(c.get(0), 0);
        assert!((-50..0).all(|x| c.get(x) == 1));
        let zeros = (1..=100_000).filter(|&x| c.get(x) == 0).count() as f64 / 100_000.0;
        assert!((zeros - 0.1).abs() < 0.005, "zero fraction {zeros}");
        assert_eq!(c.far_right, FarField::Random);
    }

    #[test]
    fn explicit_pattern_validation() {
        let bad = InitialCondition::Explicit {
            offset: -1,
            bits: vec![0, 0, 1],
        };
        assert!(make_initial(&bad, -10, 10).is_err());
        let no_origin = InitialCondition::from_pattern("1010").unwrap();
        assert!(make_initial(&no_origin, -10, 10).is_err());
        let ok = InitialCondition::from_pattern("0110").unwrap();
        let c = make_initial(&ok, -10, 10).unwrap();
        assert_eq!(c.bit_string(-1, 4), "101101");
    }

    #[test]
    fn front_cases() {
        assert_eq!(with_zeros(-10, 10, &[-3, 5]).front().unwrap(), -3);
        assert!(matches!(
            SpinConfig::all_ones(-5, 5).unwrap().front(),
            Err(Error::NoFront)
        ));
    }

    #[test]
    fn gap_event_examples() {
        let full = SpinConfig::zero_boundary(0, &[0; 11]).unwrap();
        assert!(gap_event(&full, 0, 10, 1));
        let ones = SpinConfig::all_ones(-5, 20).unwrap();
        assert!(!gap_event(&ones, 0, 10, 4));
        let c = with_zeros(-5, 20, &[0, 4, 8]);
        assert!(gap_event(&c, 0, 10, 4));
        assert!(!gap_event(&c, 0, 10, 3));
    }

    #[test]
    fn seen_from_front_examples() {
        let c = with_zeros(-5, 20, &[2, 4]);
        let pat = seen_from_front(&c, 3).unwrap();
        assert_eq!(pat.to_string(), "0101");
        assert_eq!(pat.bit(0), 0);
        assert!(seen_from_front(&c, 30).is_err());
        assert_eq!(Pattern::parse("0101").unwrap(), pat);
    }

    #[test]
    fn distance_to_zero_examples() {
        let c = with_zeros(-5, 20, &[3]);
        assert_eq!(distance_to_zero(&c, 3, (1, 5)).unwrap(), 0);
        let c = with_zeros(-5, 20, &[4]);
        assert_eq!(distance_to_zero(&c, 3, (1, 5)).unwrap(), 1);
        let c = SpinConfig::all_ones(-5, 20).unwrap();
        assert_eq!(distance_to_zero(&c, 3, (1, 5)).unwrap(), 3);
        assert_eq!(distance_to_zero(&c, 0, (-20, 20)).unwrap(), 21);
    }

    #[test]
    fn extend_and_shift() {
        let mut c = with_zeros(-2, 2, &[0]);
        c.extend_to(-5, 5).unwrap();
        assert_eq!((c.lo(), c.hi()), (-5, 5));
        assert_eq!(c.zero_count(), 1);
        let s = c.shifted(3);
        assert_eq!(s.front().unwrap(), -3);
        assert_eq!(s.get(-3), c.get(0));
    }

    #[test]
    fn state_index_roundtrip() {
        let c = SpinConfig::from_state_index(1, 5, 0b10110).unwrap();
        assert_eq!(c.bit_string(1, 5), "01101");
        assert_eq!(c.state_index(), 0b10110);
        assert_eq!(c.get(0), 0);
        assert_eq!(c.get(6), 0);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn brute_gap(c: &SpinConfig, a: i64, b: i64, l: i64) -> bool {
            let mut y = a;
            while y <= b - l + 1 {
                if !(y..=y + l - 1).any(|z| c.get(z) == 0) {
                    return false;
                }
                y += 1;
            }
            true
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]
            #[test]
            fn gap_event_matches_definition(bits in proptest::collection::vec(0u8..2, 30),
                                            a in 0i64..15, span in 0i64..15, l in 1i64..20) {
                let c = SpinConfig::zero_boundary(0, &bits).unwrap();
                let b = a + span;
                prop_assert_eq!(gap_event(&c, a, b, l), brute_gap(&c, a, b, l));
            }
        }
    }
}

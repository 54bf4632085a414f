//! Four-ary min-heap of pending rings.
//!
//! Ring times are nonnegative, so their IEEE bit patterns order the same way
//! as the values and the key is a plain `(u64, i64)` pair. Ties on time are
//! broken by site, lowest first.

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct RingKey {
    pub time_bits: u64,
    pub site: i64,
}

impl RingKey {
    #[inline(always)]
    pub fn new(time: f64, site: i64) -> Self {
        debug_assert!(time >= 0.0);
        Self {
            time_bits: time.to_bits(),
            site,
        }
    }

    #[inline(always)]
    pub fn time(&self) -> f64 {
        f64::from_bits(self.time_bits)
    }
}

const ARITY: usize = 4;

#[derive(Clone, Debug, Default)]
pub(crate) struct RingQueue {
    heap: Vec<RingKey>,
}

impl RingQueue {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            heap: Vec::with_capacity(n),
        }
    }

    #[inline(always)]
    pub fn peek(&self) -> Option<RingKey> {
        self.heap.first().copied()
    }

    pub fn push(&mut self, key: RingKey) {
        self.heap.push(key);
        self.sift_up(self.heap.len() - 1);
    }

    /// Replaces the minimum by `key`.
    #[inline]
    pub fn replace_top(&mut self, key: RingKey) {
        self.heap[0] = key;
        self.sift_down(0);
    }

    pub fn pop(&mut self) -> Option<RingKey> {
        let last = self.heap.pop()?;
        if self.heap.is_empty() {
            return Some(last);
        }
        let top = std::mem::replace(&mut self.heap[0], last);
        self.sift_down(0);
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize) {
        let key = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / ARITY;
            if self.heap[parent] <= key {
                break;
            }
            self.heap[i] = self.heap[parent];
            i = parent;
        }
        self.heap[i] = key;
    }

    #[inline]
    fn sift_down(&mut self, mut i: usize) {
        let n = self.heap.len();
        let key = self.heap[i];
        loop {
            let first = i * ARITY + 1;
            if first >= n {
                break;
            }
            let end = (first + ARITY).min(n);
            let mut best = first;
            let mut best_key = self.heap[first];
            for c in first + 1..end {
                let k = self.heap[c];
                if k < best_key {
                    best = c;
                    best_key = k;
                }
            }
            if key <= best_key {
                break;
            }
            self.heap[i] = best_key;
            i = best;
        }
        self.heap[i] = key;
    }
}

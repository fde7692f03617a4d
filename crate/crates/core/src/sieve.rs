//! Segmented, odd-only sieve of Eratosthenes.
//!
//! Bit `i` of the table represents the odd number `2i + 1`; the prime 2 is
//! handled out of band. Segments are sieved independently (in parallel when a
//! rayon pool has more than one thread) and every segment only ever clears
//! bits inside its own word range, so the result does not depend on the
//! segment size or on scheduling.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{range, Error, Result};

/// Largest bound accepted by [`PrimeTable::build`].
pub const MAX_BOUND: u64 = 1 << 36;

/// Magic bytes of the on-disk sieve cache.
pub const CACHE_MAGIC: &[u8; 4] = b"PDCS";
/// Format version of the on-disk sieve cache.
pub const CACHE_VERSION: u8 = 0x01;

/// Tunables for table construction.
#[derive(Debug, Clone, Copy)]
pub struct SieveOptions {
    /// Odd slots per segment; rounded up to a multiple of 64.
    pub segment_bits: usize,
    /// Upper limit on the bytes the membership bits may occupy.
    pub memory_budget: usize,
}

impl Default for SieveOptions {
    fn default() -> Self {
        Self {
            // 32 KiB of bits per segment, sized for L1/L2.
            segment_bits: 1 << 18,
            memory_budget: 1 << 30,
        }
    }
}

/// Exact prime membership on `[2, bound]`.
#[derive(Clone, PartialEq, Eq)]
pub struct PrimeTable {
    bound: u64,
    words: Vec<u64>,
    count: u64,
}

impl std::fmt::Debug for PrimeTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PrimeTable")
            .field("bound", &self.bound)
            .field("count", &self.count)
            .finish()
    }
}

fn odd_slots(bound: u64) -> u64 {
    bound.div_ceil(2)
}

fn small_odd_primes(limit: u64) -> Vec<u64> {
    if limit < 3 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    let mut i = 3;
    while i <= n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += 2 * i;
            }
        }
        i += 2;
    }
    out
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn sieve_segment(words: &mut [u64], first_word: usize, base: &[u64]) {
    words.iter_mut().for_each(|w| *w = !0);
    let lo = first_word as u64 * 64;
    let hi = lo + words.len() as u64 * 64;
    for &p in base {
        let square_idx = (p * p - 1) / 2;
        if square_idx >= hi {
            break;
        }
        // Odd multiples of p sit at indices congruent to (p - 1) / 2 mod p.
        let residue = (p - 1) / 2;
        let offset = (residue + p - lo % p) % p;
        let mut j = (lo + offset).max(square_idx);
        while j < hi {
            let local = (j - lo) as usize;
            words[local / 64] &= !(1u64 << (local % 64));
            j += p;
        }
    }
}

impl PrimeTable {
    /// Sieve `[2, bound]` with default options.
    pub fn build(bound: u64) -> Result<Self> {
        Self::build_with(bound, SieveOptions::default())
    }

    pub fn build_with(bound: u64, opts: SieveOptions) -> Result<Self> {
        if bound < 2 {
            return Err(range(format!("sieve bound {bound} is below 2")));
        }
        if bound > MAX_BOUND {
            return Err(range(format!(
                "sieve bound {bound} exceeds ceiling {MAX_BOUND}"
            )));
        }
        let slots = odd_slots(bound);
        let n_words = slots.div_ceil(64) as usize;
        let bytes = n_words * 8;
        if bytes > opts.memory_budget {
            return Err(Error::Resource {
                what: format!("sieve of bound {bound} ({bytes} bytes)"),
                budget: format!("{} bytes", opts.memory_budget),
            });
        }
        let base = small_odd_primes(isqrt(bound));
        let seg_words = opts.segment_bits.div_ceil(64).max(1);
        let mut words = vec![0u64; n_words];
        words
            .par_chunks_mut(seg_words)
            .enumerate()
            .for_each(|(seg, chunk)| sieve_segment(chunk, seg * seg_words, &base));

        // The number 1 is not prime; slots past the bound do not exist.
        words[0] &= !1;
        let tail = slots % 64;
        if tail != 0 {
            words[n_words - 1] &= (1u64 << tail) - 1;
        }
        let count = 1 + words.iter().map(|w| w.count_ones() as u64).sum::<u64>();
        Ok(Self {
            bound,
            words,
            count,
        })
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// π(bound).
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn is_prime(&self, n: u64) -> bool {
        if n == 2 {
            return true;
        }
        if n < 2 || n.is_multiple_of(2) || n > self.bound {
            return false;
        }
        let i = (n / 2) as usize;
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub(crate) fn check_within(&self, x: u64) -> Result<()> {
        if x > self.bound {
            Err(range(format!("x = {x} exceeds table bound {}", self.bound)))
        } else {
            Ok(())
        }
    }

    /// Odd-only membership words; bit `i` is the number `2i + 1`.
    pub fn odd_words(&self) -> &[u64] {
        &self.words
    }

    /// π(x) for `x <= bound`.
    pub fn pi(&self, x: u64) -> Result<u64> {
        self.check_within(x)?;
        if x < 2 {
            return Ok(0);
        }
        let slots = odd_slots(x) as usize;
        let full = slots / 64;
        let mut c: u64 = self.words[..full]
            .iter()
            .map(|w| w.count_ones() as u64)
            .sum();
        let rem = slots % 64;
        if rem != 0 {
            c += (self.words[full] & ((1u64 << rem) - 1)).count_ones() as u64;
        }
        Ok(c + 1)
    }

    /// Primes in ascending order up to `min(x, bound)`.
    pub fn primes_up_to(&self, x: u64) -> Primes<'_> {
        Primes {
            words: &self.words,
            limit: x.min(self.bound),
            word_idx: 0,
            current: self.words.first().copied().unwrap_or(0),
            emitted_two: false,
        }
    }

    /// All primes in the table.
    pub fn primes(&self) -> Primes<'_> {
        self.primes_up_to(self.bound)
    }

    /// π(x; q, a): primes `p <= x` with `p ≡ a (mod q)`. `a` is reduced mod `q`.
    pub fn prime_count_in_class(&self, x: u64, q: u64, a: i64) -> Result<u64> {
        self.check_within(x)?;
        if q == 0 {
            return Err(range("modulus q must be at least 1"));
        }
        let a = a.rem_euclid(q as i64) as u64;
        Ok(self.primes_up_to(x).filter(|p| p % q == a).count() as u64)
    }

    /// π(x; q, a) for every class `0 <= a < q` in one pass.
    pub fn class_counts(&self, x: u64, q: u64) -> Result<Vec<u64>> {
        self.check_within(x)?;
        if q == 0 {
            return Err(range("modulus q must be at least 1"));
        }
        let q_len = usize::try_from(q).map_err(|_| range("modulus too large"))?;
        let mut counts = vec![0u64; q_len];
        for p in self.primes_up_to(x) {
            counts[(p % q) as usize] += 1;
        }
        Ok(counts)
    }

    /// Serialize in the `PDCS` cache format.
    pub fn write_cache<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&[CACHE_VERSION])?;
        w.write_all(&self.bound.to_le_bytes())?;
        let n_bytes = odd_slots(self.bound).div_ceil(8) as usize;
        let mut buf = Vec::with_capacity(self.words.len() * 8);
        for word in &self.words {
            buf.extend_from_slice(&word.to_le_bytes());
        }
        buf.truncate(n_bytes);
        w.write_all(&buf)?;
        Ok(())
    }

    /// Load a `PDCS` cache, verifying header, padding and a sieved prefix.
    pub fn read_cache<R: Read>(mut r: R, memory_budget: usize) -> Result<Self> {
        let mut header = [0u8; 13];
        r.read_exact(&mut header)
            .map_err(|e| Error::Format(format!("truncated header: {e}")))?;
        if &header[..4] != CACHE_MAGIC {
            return Err(Error::Format("bad magic bytes".into()));
        }
        if header[4] != CACHE_VERSION {
            return Err(Error::Format(format!(
                "unsupported version {:#04x}",
                header[4]
            )));
        }
        let bound = u64::from_le_bytes(header[5..13].try_into().expect("8 bytes"));
        if !(2..=MAX_BOUND).contains(&bound) {
            return Err(Error::Format(format!("bound {bound} out of range")));
        }
        let slots = odd_slots(bound);
        let n_bytes = slots.div_ceil(8) as usize;
        let n_words = slots.div_ceil(64) as usize;
        if n_words * 8 > memory_budget {
            return Err(Error::Resource {
                what: format!("cached sieve of bound {bound}"),
                budget: format!("{memory_budget} bytes"),
            });
        }
        let mut bytes = vec![0u8; n_words * 8];
        r.read_exact(&mut bytes[..n_bytes])
            .map_err(|e| Error::Format(format!("truncated payload: {e}")))?;
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(Error::Format("trailing bytes after payload".into()));
        }
        let words: Vec<u64> = bytes
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let tail = slots % 64;
        if words[0] & 1 != 0 {
            return Err(Error::Format("the number 1 is marked prime".into()));
        }
        if tail != 0 && words[n_words - 1] >> tail != 0 {
            return Err(Error::Format("padding bits are set".into()));
        }
        let count = 1 + words.iter().map(|w| w.count_ones() as u64).sum::<u64>();
        let table = Self {
            bound,
            words,
            count,
        };

        let probe = bound.min(1 << 16);
        let fresh = Self::build(probe)?;
        let probe_words = odd_slots(probe) as usize / 64;
        if table.words[..probe_words] != fresh.words[..probe_words]
            || table.pi(probe)? != fresh.count
        {
            return Err(Error::Format(
                "membership bits disagree with a fresh sieve".into(),
            ));
        }
        Ok(table)
    }
}

/// Ascending iterator over the primes of a [`PrimeTable`].
pub struct Primes<'a> {
    words: &'a [u64],
    limit: u64,
    word_idx: usize,
    current: u64,
    emitted_two: bool,
}

impl Iterator for Primes<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if !self.emitted_two {
            self.emitted_two = true;
            if self.limit >= 2 {
                return Some(2);
            }
            return None;
        }
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as u64;
                self.current &= self.current - 1;
                let n = 2 * (self.word_idx as u64 * 64 + bit) + 1;
                if n > self.limit {
                    self.current = 0;
                    self.word_idx = self.words.len();
                    return None;
                }
                return Some(n);
            }
            self.word_idx += 1;
            if self.word_idx >= self.words.len() {
                return None;
            }
            self.current = self.words[self.word_idx];
        }
    }
}

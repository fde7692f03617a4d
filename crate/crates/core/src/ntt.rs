//! Number-theoretic transform over Z/998244353 for exact integer correlation.

const MODULUS: u64 = 998_244_353;
const GENERATOR: u64 = 3;

/// Largest transform length supported by the modulus (2^23).
pub(crate) const MAX_LEN: usize = 1 << 23;

fn pow_mod(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1u64;
    base %= MODULUS;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % MODULUS;
        }
        base = base * base % MODULUS;
        exp >>= 1;
    }
    acc
}

fn transform(a: &mut [u64], invert: bool) {
    let n = a.len();
    debug_assert!(n.is_power_of_two() && n <= MAX_LEN);
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let mut w_len = pow_mod(GENERATOR, (MODULUS - 1) / len as u64);
        if invert {
            w_len = pow_mod(w_len, MODULUS - 2);
        }
        let half = len / 2;
        let mut twiddles = Vec::with_capacity(half);
        let mut w = 1u64;
        for _ in 0..half {
            twiddles.push(w);
            w = w * w_len % MODULUS;
        }
        for chunk in a.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((u, v), &tw) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                let t = *v * tw % MODULUS;
                let s = *u;
                *u = if s + t >= MODULUS {
                    s + t - MODULUS
                } else {
                    s + t
                };
                *v = if s >= t { s - t } else { s + MODULUS - t };
            }
        }
        len <<= 1;
    }
    if invert {
        let n_inv = pow_mod(n as u64, MODULUS - 2);
        for x in a.iter_mut() {
            *x = *x * n_inv % MODULUS;
        }
    }
}

/// `out[j] = Σ_i bits[i]·bits[i + j]` for `0 <= j < bits.len()`.
///
/// Exact as long as every output is below the modulus, which holds whenever
/// `bits.len() < 998_244_353`.
pub(crate) fn autocorrelate(bits: &[bool]) -> Vec<u64> {
    let n = bits.len();
    if n == 0 {
        return Vec::new();
    }
    let size = (2 * n - 1).next_power_of_two().max(2);
    assert!(size <= MAX_LEN, "transform length {size} exceeds {MAX_LEN}");
    let mut fa = vec![0u64; size];
    let mut fb = vec![0u64; size];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            fa[i] = 1;
            fb[n - 1 - i] = 1;
        }
    }
    transform(&mut fa, false);
    transform(&mut fb, false);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = *x * y % MODULUS;
    }
    transform(&mut fa, true);
    // conv[n - 1 - j] = Σ_i bits[i]·bits[i + j]
    (0..n).map(|j| fa[n - 1 - j]).collect()
}

use serde::Serialize;

use crate::error::{Error, Result};

/// Deterministic Miller–Rabin for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Primes up to and including `limit` (sieve of Eratosthenes).
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
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

const SEGMENT: u64 = 1 << 16;

/// Primes in `(lo, hi]`, ascending, produced by a segmented sieve.
#[derive(Debug, Clone)]
pub struct WindowPrimes {
    base: Vec<u64>,
    next_lo: u64,
    hi: u64,
    buffer: Vec<u64>,
    pos: usize,
}

impl WindowPrimes {
    pub fn new(lo: u64, hi: u64) -> Self {
        WindowPrimes {
            base: primes_up_to(isqrt(hi)),
            next_lo: lo.saturating_add(1).max(2),
            hi,
            buffer: Vec::new(),
            pos: 0,
        }
    }

    fn fill(&mut self) -> bool {
        while self.next_lo <= self.hi {
            let start = self.next_lo;
            let end = (start + SEGMENT - 1).min(self.hi);
            let mut composite = vec![false; (end - start + 1) as usize];
            for &p in &self.base {
                if p * p > end {
                    break;
                }
                let first = (start.div_ceil(p) * p).max(p * p);
                let mut m = first;
                while m <= end {
                    composite[(m - start) as usize] = true;
                    m += p;
                }
            }
            self.buffer = composite
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(i, _)| start + i as u64)
                .collect();
            self.pos = 0;
            self.next_lo = end + 1;
            if !self.buffer.is_empty() {
                return true;
            }
        }
        false
    }
}

impl Iterator for WindowPrimes {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.pos >= self.buffer.len() && !self.fill() {
            return None;
        }
        let p = self.buffer[self.pos];
        self.pos += 1;
        Some(p)
    }
}

/// The primes `p` with `C0 n < p <= C0 n^2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimeWindow {
    pub n: u64,
    pub c0: u64,
    /// Exclusive lower bound `C0 n`.
    pub lo: u64,
    /// Inclusive upper bound `C0 n^2`.
    pub hi: u64,
}

impl PrimeWindow {
    /// Ascending primes in the window, sieved lazily.
    pub fn iter(&self) -> WindowPrimes {
        WindowPrimes::new(self.lo, self.hi)
    }

    pub fn primes(&self) -> Vec<u64> {
        self.iter().collect()
    }
}

pub fn prime_window(n: u64, c0: u64) -> Result<PrimeWindow> {
    if n == 0 || c0 == 0 {
        return Err(Error::InvalidGenerators(
            "prime window needs n >= 1 and C0 >= 1".into(),
        ));
    }
    let overflow = || Error::Resource(format!("window bounds for n = {n}, C0 = {c0} overflow"));
    let lo = c0.checked_mul(n).ok_or_else(overflow)?;
    let hi = lo.checked_mul(n).ok_or_else(overflow)?;
    if WindowPrimes::new(lo, hi).next().is_none() {
        return Err(Error::EmptyWindow { lo, hi });
    }
    Ok(PrimeWindow { n, c0, lo, hi })
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowProduct {
    pub n: u64,
    pub c0: u64,
    pub primes: u64,
    /// `Σ log p` over the window.
    pub log_sum: f64,
    /// `c n^2`.
    pub threshold: f64,
    pub pass: bool,
}

/// Compares `Σ_{p in window} log p` against `c n^2`.
pub fn window_product_check(n: u64, c0: u64, c: f64) -> Result<WindowProduct> {
    let w = prime_window(n, c0)?;
    let (count, log_sum) = w
        .iter()
        .fold((0u64, 0.0f64), |(k, s), p| (k + 1, s + (p as f64).ln()));
    let threshold = c * (n as f64) * (n as f64);
    Ok(WindowProduct {
        n,
        c0,
        primes: count,
        log_sum,
        threshold,
        pass: log_sum >= threshold,
    })
}

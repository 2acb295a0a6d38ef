//! Integers of the form `m² + mn + n²`.
//!
//! `k > 0` is representable iff every prime `p ≡ 2 (mod 3)` divides `k` to an
//! even power. Neumann eigenvalues are `4π²/(27r²)` times such integers, so
//! long runs of non-representable integers give long spectral gaps.

use num_traits::{CheckedAdd, CheckedMul, PrimInt};
use serde::Serialize;

use crate::error::LoeschianError;

/// Sieve size guard.
pub const MAX_SIEVE_LIMIT: u64 = 1_000_000_000;

/// Integer square root.
pub fn isqrt(k: u64) -> u64 {
    let mut r = (k as f64).sqrt() as u64;
    while r * r > k {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= k {
        r += 1;
    }
    r
}

/// All `(m, n)` with `0 <= m <= n` and `m² + mn + n² = k`.
pub fn representations(k: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut m = 0u64;
    while 3 * m * m <= k {
        // n = (−m + √(4k − 3m²)) / 2
        let disc = 4 * k - 3 * m * m;
        let s = isqrt(disc);
        if s * s == disc && s >= m && (s - m).is_multiple_of(2) {
            let n = (s - m) / 2;
            if n >= m {
                out.push((m, n));
            }
        }
        m += 1;
    }
    out
}

/// Prime-factorization criterion.
pub fn representable_by_factorization(k: u64) -> bool {
    if k == 0 {
        return true;
    }
    let mut rest = k;
    let mut p = 2u64;
    while p * p <= rest {
        if rest.is_multiple_of(p) {
            let mut e = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            if p % 3 == 2 && e % 2 == 1 {
                return false;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    !(rest > 1 && rest % 3 == 2)
}

/// Representability of one integer by both criteria.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoeschianCheck {
    pub k: u64,
    pub representable: bool,
    pub witnesses: Vec<(u64, u64)>,
}

/// Whether `k = m² + mn + n²` for some `m, n >= 0`, with all witnesses `m <= n`.
pub fn is_loeschian(k: u64) -> LoeschianCheck {
    let witnesses = representations(k);
    let representable = !witnesses.is_empty();
    assert_eq!(
        representable,
        representable_by_factorization(k),
        "criteria disagree for {k}"
    );
    LoeschianCheck {
        k,
        representable,
        witnesses,
    }
}

/// Bitset of representable integers in `0..=limit`.
#[derive(Debug, Clone)]
pub struct LoeschianSieve {
    limit: u64,
    words: Vec<u64>,
}

impl LoeschianSieve {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn is_representable(&self, k: u64) -> bool {
        k <= self.limit && self.words[(k / 64) as usize] >> (k % 64) & 1 == 1
    }

    /// Number of representable integers in `0..=limit`.
    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Representable integers in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..=self.limit).filter(|&k| self.is_representable(k))
    }

    /// `count / (limit / √ln limit)`.
    pub fn density_ratio(&self) -> f64 {
        let x = self.limit as f64;
        self.count() as f64 / (x / x.ln().sqrt())
    }
}

/// Marks `m² + mn + n²` for all `m <= n` with value `<= limit`.
pub fn build_sieve(limit: u64) -> Result<LoeschianSieve, LoeschianError> {
    if limit > MAX_SIEVE_LIMIT {
        return Err(LoeschianError::LimitTooLarge {
            limit,
            max: MAX_SIEVE_LIMIT,
        });
    }
    let mut words = vec![0u64; (limit / 64 + 1) as usize];
    let mut m = 0u64;
    while 3 * m * m <= limit {
        let mut n = m;
        let mut q = 3 * m * m;
        while q <= limit {
            words[(q / 64) as usize] |= 1 << (q % 64);
            // q(m, n+1) − q(m, n) = m + 2n + 1
            q += m + 2 * n + 1;
            n += 1;
        }
        m += 1;
    }
    Ok(LoeschianSieve { limit, words })
}

/// Largest distance between consecutive representable integers up to the limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LoeschianGap {
    pub lower: u64,
    pub upper: u64,
    /// `upper − lower`.
    pub gap: u64,
    /// Length of the run of non-representable integers, `gap − 1`.
    pub run_length: u64,
    /// First integer of that run, `lower + 1`.
    pub run_start: u64,
}

/// Largest gap between consecutive representable integers, both `<= limit`.
///
/// A trailing run past the last representable integer is not counted since
/// its end lies beyond the sieve.
pub fn max_gap(sieve: &LoeschianSieve) -> LoeschianGap {
    let mut best = LoeschianGap {
        lower: 0,
        upper: 0,
        gap: 0,
        run_length: 0,
        run_start: 1,
    };
    let mut prev: Option<u64> = None;
    for k in sieve.iter() {
        if let Some(p) = prev {
            if k - p > best.gap {
                best = LoeschianGap {
                    lower: p,
                    upper: k,
                    gap: k - p,
                    run_length: k - p - 1,
                    run_start: p + 1,
                };
            }
        }
        prev = Some(k);
    }
    best
}

/// The first `k` primes `≡ 2 (mod 3)`.
pub fn primes_2_mod_3(k: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(k);
    let mut p = 2u64;
    while out.len() < k {
        if p % 3 == 2
            && (2..)
                .take_while(|d| d * d <= p)
                .all(|d| !p.is_multiple_of(d))
        {
            out.push(p);
        }
        p += 1;
    }
    out
}

/// Integer width used for the CRT modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Arithmetic {
    /// `u64`; enough for `K <= 8`.
    Native,
    /// `u128`; enough for `K <= 13`.
    Wide,
}

/// A window of `K` consecutive non-representable integers `n0 + 1 ..= n0 + K`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapCertificate {
    #[serde(rename = "K")]
    pub k: usize,
    pub n0: u128,
    pub primes: Vec<u64>,
    pub window: Vec<u128>,
}

impl GapCertificate {
    /// `n0 + j` is divisible by `p_j` exactly once, for each `j`.
    pub fn check_congruences(&self) -> bool {
        self.primes.iter().zip(&self.window).all(|(&p, &w)| {
            let p = p as u128;
            w % p == 0 && w % (p * p) != 0
        })
    }

    /// Direct verification of every window entry, when `n0` is small enough
    /// for trial division.
    pub fn verify_brute_force(&self) -> Option<bool> {
        let last = *self.window.last()?;
        if last > 1u128 << 50 {
            return None;
        }
        Some(
            self.window
                .iter()
                .all(|&w| !is_loeschian(w as u64).representable),
        )
    }
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(m as i128) as u64)
}

/// Smallest non-negative `x` with `x ≡ aᵢ (mod mᵢ)`, `None` on overflow of `T`.
fn crt<T: PrimInt + CheckedMul + CheckedAdd>(system: &[(u64, u64)]) -> Option<T> {
    let mut x = T::zero();
    let mut modulus = T::one();
    for &(a, m) in system {
        let mt = T::from(m)?;
        let x_mod = (x % mt).to_u64()?;
        let mod_mod = (modulus % mt).to_u64()?;
        let inv = mod_inverse(mod_mod, m)? as u128;
        let t = ((a + m - x_mod) % m) as u128 * inv % m as u128;
        x = x.checked_add(&modulus.checked_mul(&T::from(t)?)?)?;
        modulus = modulus.checked_mul(&mt)?;
    }
    Some(x)
}

/// CRT construction: `n0 ≡ p_j − j (mod p_j²)` for the first `K` primes `≡ 2 (mod 3)`.
pub fn crt_gap_certificate(
    k: usize,
    arithmetic: Arithmetic,
) -> Result<GapCertificate, LoeschianError> {
    if k == 0 {
        return Err(LoeschianError::EmptyWindow);
    }
    let primes = primes_2_mod_3(k);
    let system: Vec<(u64, u64)> = primes
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let sq = p * p;
            let j = (i + 1) as u64;
            ((p + sq - j % sq) % sq, sq)
        })
        .collect();
    let n0: u128 = match arithmetic {
        Arithmetic::Native => crt::<u64>(&system)
            .map(u128::from)
            .ok_or(LoeschianError::ArithmeticOverflow { k, width: 64 })?,
        Arithmetic::Wide => {
            crt::<u128>(&system).ok_or(LoeschianError::ArithmeticOverflow { k, width: 128 })?
        }
    };
    let window = (1..=k as u128).map(|j| n0 + j).collect();
    Ok(GapCertificate {
        k,
        n0,
        primes,
        window,
    })
}

//! Prime sieving and primality.

use std::sync::{OnceLock, RwLock};

/// Sieve of Eratosthenes over `0..=limit`; `sieve[k]` is true iff `k` is prime.
pub fn sieve(limit: u64) -> Vec<bool> {
    let n = limit as usize;
    let mut is_prime = vec![true; n + 1];
    is_prime[0] = false;
    if n >= 1 {
        is_prime[1] = false;
    }
    let mut p = 2usize;
    while p * p <= n {
        if is_prime[p] {
            let mut m = p * p;
            while m <= n {
                is_prime[m] = false;
                m += p;
            }
        }
        p += 1;
    }
    is_prime
}

/// π(n) for each requested bound (must be nondecreasing), from a single sieve.
pub fn prime_pi_at(bounds: &[u64]) -> Vec<u64> {
    let Some(&max) = bounds.last() else {
        return Vec::new();
    };
    let flags = sieve(max);
    let mut out = Vec::with_capacity(bounds.len());
    let mut count = 0u64;
    let mut k = 0u64;
    for &b in bounds {
        while k < b {
            k += 1;
            count += flags[k as usize] as u64;
        }
        out.push(count);
    }
    out
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
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

/// Deterministic Miller-Rabin, exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
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
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn table() -> &'static RwLock<Vec<u64>> {
    static TABLE: OnceLock<RwLock<Vec<u64>>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(Vec::new()))
}

/// Upper bound for the k-th prime (Rosser), valid for k >= 6.
fn nth_prime_bound(k: u64) -> u64 {
    if k < 6 {
        return 15;
    }
    let x = k as f64;
    (x * (x.ln() + x.ln().ln())).ceil() as u64 + 3
}

/// The k-th prime, 1-based (`nth_prime(1) == 2`). Backed by a shared table
/// that grows geometrically.
pub fn nth_prime(k: u64) -> u64 {
    assert!(k >= 1, "primes are indexed from 1");
    {
        let t = table().read().expect("prime table poisoned");
        if let Some(&p) = t.get(k as usize - 1) {
            return p;
        }
    }
    let mut t = table().write().expect("prime table poisoned");
    if t.len() < k as usize {
        let want = k.max(2 * t.len() as u64).max(1024);
        let flags = sieve(nth_prime_bound(want));
        *t = flags
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(|(i, _)| i as u64)
            .collect();
    }
    t[k as usize - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes() {
        let ps: Vec<u64> = (1..=10).map(nth_prime).collect();
        assert_eq!(ps, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(prime_pi_at(&[10, 100, 1000]), vec![4, 25, 168]);
    }

    #[test]
    fn miller_rabin_agrees_with_sieve() {
        let flags = sieve(20_000);
        for n in 0..=20_000u64 {
            assert_eq!(is_prime(n), flags[n as usize], "n = {n}");
        }
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
    }

    #[test]
    fn nth_prime_large() {
        assert_eq!(nth_prime(9592), 99_991);
        assert_eq!(nth_prime(78_498), 999_983);
    }
}

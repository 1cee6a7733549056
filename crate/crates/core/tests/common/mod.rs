//! Reference computations that avoid the library's series code.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

/// Exact `τ(1..=n)` from `q ∏ (1 - q^m)^24`, multiplying one factor at a
/// time.
pub fn tau_exact(n: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::zero(); n];
    c[0] = BigInt::from(1);
    for m in 1..n {
        for _ in 0..24 {
            for i in (m..n).rev() {
                let t = c[i - m].clone();
                c[i] -= t;
            }
        }
    }
    // c[i] is the coefficient of q^(i+1) in Δ
    let mut out = vec![BigInt::zero()];
    out.extend(c);
    out
}

/// `Δ mod p` to `n` coefficients by the same naive product, reduced as it
/// goes.
pub fn delta_naive(p: u64, n: usize) -> Vec<u8> {
    let mut c = vec![0u64; n];
    if n > 1 {
        c[1] = 1;
    }
    for m in 1..n {
        for _ in 0..24 {
            for i in (m + 1..n).rev() {
                c[i] = (c[i] + p - c[i - m]) % p;
            }
        }
    }
    c.into_iter().map(|x| x as u8).collect()
}

/// `σ_k(n) mod p` for `n < len`.
pub fn sigma_mod(k: u32, p: u64, len: usize) -> Vec<u64> {
    let mut s = vec![0u64; len];
    for d in 1..len {
        let dk = (0..k).fold(1u64, |a, _| a * (d as u64 % p) % p);
        for n in (d..len).step_by(d) {
            s[n] = (s[n] + dk) % p;
        }
    }
    s
}

/// `τ(n) mod p` for p in {3, 5, 7} from the Ramanujan congruences
/// `τ(n) = n² σ_1(n) (3)`, `n σ_1(n) (5)`, `n σ_3(n) (7)`.
pub fn tau_congruence(p: u64, len: usize) -> Vec<u8> {
    let (a, k) = match p {
        3 => (2, 1),
        5 => (1, 1),
        7 => (1, 3),
        _ => panic!("no congruence for {p}"),
    };
    let s = sigma_mod(k, p, len);
    (0..len)
        .map(|n| {
            let np = (0..a).fold(1u64, |x, _| x * (n as u64 % p) % p);
            (np * s[n] % p) as u8
        })
        .collect()
}

/// Product of two series mod p, schoolbook.
pub fn convolve(a: &[u8], b: &[u8], p: u64, len: usize) -> Vec<u8> {
    let mut out = vec![0u64; len];
    for (i, &x) in a.iter().enumerate().take(len) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(len - i) {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p;
        }
    }
    out.into_iter().map(|x| x as u8).collect()
}

/// Euler's pentagonal series `∏ (1 - x^m)` to `len` terms, as sparse
/// signed exponents.
pub fn pentagonal(len: usize) -> Vec<(usize, i64)> {
    let mut out = vec![(0usize, 1i64)];
    for k in 1i64.. {
        let a = (k * (3 * k - 1) / 2) as usize;
        if a >= len {
            break;
        }
        let s = if k % 2 == 1 { -1 } else { 1 };
        out.push((a, s));
        let b = (k * (3 * k + 1) / 2) as usize;
        if b < len {
            out.push((b, s));
        }
    }
    out
}

/// `∏ (1 - x^m)^e mod p` to `len` terms by repeated sparse products.
pub fn eta_power(e: u32, p: u64, len: usize) -> Vec<u8> {
    let pent = pentagonal(len);
    let mut cur = vec![0i64; len];
    cur[0] = 1;
    for _ in 0..e {
        let mut next = vec![0i64; len];
        for &(a, s) in &pent {
            for i in 0..len - a {
                next[i + a] += s * cur[i];
            }
        }
        cur = next.into_iter().map(|x| x.rem_euclid(p as i64)).collect();
    }
    cur.into_iter().map(|x| x as u8).collect()
}

pub fn big_mod(x: &BigInt, p: u64) -> u8 {
    let r = x % BigInt::from(p);
    ((r.to_i64().unwrap() + p as i64) % p as i64) as u8
}

pub fn is_squarefree(mut n: u64) -> bool {
    let mut d = 2;
    while d * d <= n {
        if n % (d * d) == 0 {
            return false;
        }
        if n % d == 0 {
            n /= d;
        }
        d += 1;
    }
    n > 0
}

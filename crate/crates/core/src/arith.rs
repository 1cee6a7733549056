//! Elementary number theory on machine integers: sieves, factorization,
//! totients, modular powers.

/// All primes `<= n`, ascending.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
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

/// Smallest-prime-factor table for `0..=n` (entries 0 and 1 are 0 and 1).
pub fn spf_sieve(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    if n >= 1 {
        spf[1] = 1;
    }
    for i in 2..=n {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

/// Factorization using a table from [`spf_sieve`]; `n` must be inside it.
pub fn factor_with_spf(mut n: u64, spf: &[u32]) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    while n > 1 {
        let q = spf[n as usize] as u64;
        let mut e = 0;
        while n % q == 0 {
            n /= q;
            e += 1;
        }
        out.push((q, e));
    }
    out
}

/// Trial-division factorization, ascending primes.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let f = factor(n);
    f.len() == 1 && f[0].1 == 1
}

pub fn euler_phi(n: u64) -> u64 {
    factor(n)
        .iter()
        .fold(n, |acc, &(q, _)| acc / q * (q - 1))
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m128 = m as u128;
    let mut b = (base % m) as u128;
    let mut acc = 1u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

/// Multiplicative order of `g` modulo `m` (g must be a unit).
pub fn multiplicative_order(g: u64, m: u64) -> u64 {
    let phi = euler_phi(m);
    let mut order = phi;
    for (q, _) in factor(phi) {
        while order % q == 0 && pow_mod(g, order / q, m) == 1 {
            order /= q;
        }
    }
    order
}

pub fn is_primitive_root(g: u64, p: u64) -> bool {
    gcd(g, p) == 1 && multiplicative_order(g, p) == euler_phi(p)
}

/// `Some((q, f))` when `n = q^f` with `q` prime.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    match factor(n).as_slice() {
        [(q, f)] => Some((*q, *f)),
        _ => None,
    }
}

/// Units modulo `c`, ascending.
pub fn units_mod(c: u64) -> Vec<u64> {
    if c <= 1 {
        return vec![0];
    }
    (1..c).filter(|&u| gcd(u, c) == 1).collect()
}

pub fn is_squarefree(n: u64) -> bool {
    n != 0 && factor(n).iter().all(|&(_, e)| e == 1)
}

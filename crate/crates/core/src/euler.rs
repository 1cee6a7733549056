//! The Selberg–Delange constant
//! `C(U, r) = Γ(β)^(-1) ∏_ℓ w_ℓ`, with `w_ℓ = (1 + 1/ℓ)(1 - 1/ℓ)^β` for
//! `ℓ ∈ U`, `ℓ ∤ r`, and `w_ℓ = (1 - 1/ℓ)^β` otherwise.

use std::collections::BTreeSet;

use crate::arith;
use crate::density::Rational;
use crate::error::{Error, Result};
use crate::par::{self, Execution};

pub const DEFAULT_PRIME_BOUND: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerConstant {
    pub value: f64,
    /// Estimated absolute error from truncating the product.
    pub tail: f64,
    pub prime_bound: u64,
}

/// Primes in `U` are those whose residue mod `c` lies in `u_classes`.
pub fn euler_constant(u_classes: &[u64], c: u64, beta: &Rational, r: u64, prime_bound: u64) -> Result<EulerConstant> {
    euler_constant_with(u_classes, c, beta, r, prime_bound, Execution::default())
}

pub fn euler_constant_with(
    u_classes: &[u64],
    c: u64,
    beta: &Rational,
    r: u64,
    prime_bound: u64,
    exec: Execution,
) -> Result<EulerConstant> {
    let b = beta.to_f64();
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::InvalidArgument(format!("β = {beta} must lie in (0, 1)")));
    }
    if prime_bound < 1000 {
        return Err(Error::InvalidArgument("prime bound must be at least 1000".into()));
    }
    if c == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    let u: BTreeSet<u64> = u_classes.iter().map(|x| x % c).collect();
    let primes = arith::primes_up_to(prime_bound);
    let split = prime_bound / 10;
    // partial log-products below and above X/10, reduced in block order
    let parts = par::map_blocks(exec, primes.len(), 1 << 12, |range| {
        let (mut low, mut high) = (0.0f64, 0.0f64);
        for &l in &primes[range] {
            let x = 1.0 / l as f64;
            let mut t = b * (-x).ln_1p();
            if u.contains(&(l % c)) && r % l != 0 {
                t += x.ln_1p();
            }
            if l <= split {
                low += t;
            } else {
                high += t;
            }
        }
        (low, high)
    });
    let (low, high) = parts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let log_value = low + high - statrs::function::gamma::ln_gamma(b);
    let x = prime_bound as f64;
    let rel = high.abs() + 2.0 / (x * x.ln());
    let value = log_value.exp();
    Ok(EulerConstant { value, tail: value * rel.exp_m1(), prime_bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_arguments() {
        assert!(euler_constant(&[1], 3, &Rational::one(), 1, 10_000).is_err());
        assert!(euler_constant(&[1], 3, &Rational::new(1, 2), 1, 100).is_err());
    }

    #[test]
    fn r_outside_u_changes_nothing() {
        let half = Rational::new(1, 2);
        let a = euler_constant(&[1], 3, &half, 1, 100_000).unwrap();
        let b = euler_constant(&[1], 3, &half, 2, 100_000).unwrap();
        assert_eq!(a.value, b.value);
        let c = euler_constant(&[1], 3, &half, 7, 100_000).unwrap();
        assert!((c.value - a.value * 7.0 / 8.0).abs() < 1e-12);
    }
}

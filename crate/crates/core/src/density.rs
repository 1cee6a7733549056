//! Exact densities: frobenian classes, multi-frobenian sets and α.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith;
use crate::error::{Error, Result};
use crate::hecke_module::{ClassStatus, HeckeModule};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Rational {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Rational {
        Rational(BigRational::new(num, den))
    }

    pub fn zero() -> Rational {
        Rational(BigRational::zero())
    }

    pub fn one() -> Rational {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl std::ops::Add for &Rational {
    type Output = Rational;
    fn add(self, o: &Rational) -> Rational {
        Rational(&self.0 + &o.0)
    }
}

impl std::ops::Sub for &Rational {
    type Output = Rational;
    fn sub(self, o: &Rational) -> Rational {
        Rational(&self.0 - &o.0)
    }
}

impl std::ops::Mul for &Rational {
    type Output = Rational;
    fn mul(self, o: &Rational) -> Rational {
        Rational(&self.0 * &o.0)
    }
}

/// Projective image of a residual representation, up to the cases where α
/// has a closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupDescriptor {
    /// Reducible, with `|G'| = n`.
    Reducible(u64),
    Dihedral(u64),
    A4,
    S4,
    A5,
    PGL2(u64),
    PSL2(u64),
}

impl std::str::FromStr for GroupDescriptor {
    type Err = Error;

    /// `reducible:3`, `dihedral:2`, `A4`, `S4`, `A5`, `PGL2:3`, `PSL2:5`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown group '{s}'"));
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim().parse::<u64>().map_err(|_| bad())?)),
            None => (s.trim(), None),
        };
        let need = || arg.ok_or_else(bad);
        match name.to_ascii_lowercase().as_str() {
            "reducible" => Ok(GroupDescriptor::Reducible(need()?)),
            "dihedral" | "d" => Ok(GroupDescriptor::Dihedral(need()?)),
            "a4" if arg.is_none() => Ok(GroupDescriptor::A4),
            "s4" if arg.is_none() => Ok(GroupDescriptor::S4),
            "a5" if arg.is_none() => Ok(GroupDescriptor::A5),
            "pgl2" => Ok(GroupDescriptor::PGL2(need()?)),
            "psl2" => Ok(GroupDescriptor::PSL2(need()?)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupDescriptor::Reducible(n) => write!(f, "reducible:{n}"),
            GroupDescriptor::Dihedral(n) => write!(f, "dihedral:{n}"),
            GroupDescriptor::A4 => write!(f, "A4"),
            GroupDescriptor::S4 => write!(f, "S4"),
            GroupDescriptor::A5 => write!(f, "A5"),
            GroupDescriptor::PGL2(q) => write!(f, "PGL2:{q}"),
            GroupDescriptor::PSL2(q) => write!(f, "PSL2:{q}"),
        }
    }
}

fn odd_prime_power(q: u64) -> Result<()> {
    match arith::prime_power(q) {
        Some((r, _)) if r != 2 => Ok(()),
        _ => Err(Error::InvalidArgument(format!("q = {q} must be an odd prime power"))),
    }
}

/// Proportion of trace-zero elements in the image.
pub fn alpha_of_group(d: GroupDescriptor) -> Result<Rational> {
    let q = |n: u64| n as i64;
    match d {
        GroupDescriptor::Reducible(n) | GroupDescriptor::Dihedral(n) if n == 0 => {
            Err(Error::InvalidArgument("group order must be positive".into()))
        }
        GroupDescriptor::Reducible(n) => Ok(Rational::new(1, q(n))),
        GroupDescriptor::Dihedral(n) if n % 2 == 1 => Ok(Rational::new(1, 2)),
        GroupDescriptor::Dihedral(n) => Ok(&Rational::new(1, 2) + &Rational::new(1, 2 * q(n))),
        GroupDescriptor::A4 => Ok(Rational::new(1, 4)),
        GroupDescriptor::S4 => Ok(Rational::new(3, 8)),
        GroupDescriptor::A5 => Ok(Rational::new(1, 4)),
        GroupDescriptor::PGL2(n) => {
            odd_prime_power(n)?;
            Ok(Rational::new(q(n), (q(n) - 1) * (q(n) + 1)))
        }
        GroupDescriptor::PSL2(n) => {
            odd_prime_power(n)?;
            // -1 is a square in F_q iff q = 1 mod 4
            if n % 4 == 1 {
                Ok(Rational::new(1, q(n) - 1))
            } else {
                Ok(Rational::new(1, q(n) + 1))
            }
        }
    }
}

pub fn class_density(classes: &[u64], c: u64) -> Result<Rational> {
    for &u in classes {
        if arith::gcd(u % c.max(1), c) != 1 && c > 1 {
            return Err(Error::InvalidArgument(format!("{u} is not a unit mod {c}")));
        }
    }
    let mut distinct: Vec<u64> = classes.iter().map(|u| u % c.max(1)).collect();
    distinct.sort_unstable();
    distinct.dedup();
    Ok(Rational::new(distinct.len() as i64, arith::euler_phi(c) as i64))
}

fn factorial(h: usize) -> BigInt {
    (1..=h as u64).fold(BigInt::one(), |a, b| a * b)
}

/// `#D / (h! φ(c)^h)` for a count `#D` of ordered h-tuples of classes.
pub fn tuple_density(count: u128, h: usize, phi: u64) -> Rational {
    let den = factorial(h) * BigInt::from(phi).pow(h as u32);
    Rational::from_big(BigInt::from(count), den)
}

/// For each nonzero `v`, the number of ordered h-tuples of nilpotent
/// classes whose product maps `from` to `v`.
pub fn height_counts(module: &HeckeModule, from: &[u8], h: usize) -> Result<BTreeMap<Vec<u8>, u128>> {
    let cd = module.require_nilpotent_conductor()?;
    let nil: Vec<usize> = cd
        .classes
        .values()
        .filter_map(|&op| op)
        .filter(|&i| module.operators()[i].status == ClassStatus::Nilpotent)
        .collect();
    let mut level: BTreeMap<Vec<u8>, u128> = BTreeMap::new();
    if from.iter().any(|&x| x != 0) {
        level.insert(from.to_vec(), 1);
    }
    for _ in 0..h {
        let mut next: BTreeMap<Vec<u8>, u128> = BTreeMap::new();
        for (v, &n) in &level {
            for &i in &nil {
                let w = module.operators()[i].matrix.mul_vec(v);
                if w.iter().any(|&x| x != 0) {
                    let slot = next.entry(w).or_insert(0);
                    *slot = slot
                        .checked_add(n)
                        .ok_or(Error::CapExceeded { what: "tuple count", value: u64::MAX, cap: u64::MAX })?;
                }
            }
        }
        level = next;
    }
    Ok(level)
}

/// `δ(M_{to,from})` for the set of products of h distinct nilpotent primes
/// taking `from` to `to`.
pub fn multi_frobenian_density(module: &HeckeModule, from: &[u8], to: &[u8], h: usize) -> Result<Rational> {
    let phi = module.require_nilpotent_conductor()?.phi();
    let count = height_counts(module, from, h)?.get(to).copied().unwrap_or(0);
    Ok(tuple_density(count, h, phi))
}

/// α of a pure module: the density of its nilpotent classes.
pub fn alpha_of_pure_module(module: &HeckeModule) -> Result<Rational> {
    if !module.is_pure() {
        return Err(Error::NotPure);
    }
    let cd = module.require_status_conductor()?;
    let nil: Vec<u64> = cd.nilpotent.iter().copied().collect();
    let a = class_density(&nil, cd.modulus)?;
    check_alpha(&a)?;
    Ok(a)
}

pub fn check_alpha(a: &Rational) -> Result<()> {
    if a.is_zero() || a > &Rational::new(3, 4) {
        return Err(Error::Inconsistent(format!("α = {a} lies outside (0, 3/4]")));
    }
    Ok(())
}

/// α(f): the minimum over the pure components of f.
pub fn alpha_of_form(module: &HeckeModule) -> Result<Rational> {
    if module.is_pure() {
        return alpha_of_pure_module(module);
    }
    let mut best: Option<Rational> = None;
    for c in module.pure_decomposition()? {
        let a = alpha_of_pure_module(&module.component_module(&c)?)?;
        if best.as_ref().is_none_or(|b| &a < b) {
            best = Some(a);
        }
    }
    best.ok_or(Error::ZeroForm)
}

//! Hecke-type operators on q-expansions at level one.
//!
//! With `S_ℓ = ℓ^(k-2)` the scalar `ℓ S_ℓ` is `ℓ^(k-1) mod p`, read from the
//! weight lift; the exponent only matters modulo `p - 1`.

use std::fmt;
use std::str::FromStr;

use crate::arith;
use crate::basis::GradedForm;
use crate::error::{Error, Result};
use crate::field::Prime;
use crate::series::QSeries;

/// Largest precision `V_m` will produce.
pub const V_PREC_CAP: usize = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeckeOpSpec {
    T(u64),
    U(u64),
    V(u64),
    S(u64),
    W,
}

impl fmt::Display for HeckeOpSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeckeOpSpec::T(n) => write!(f, "T{n}"),
            HeckeOpSpec::U(n) => write!(f, "U{n}"),
            HeckeOpSpec::V(n) => write!(f, "V{n}"),
            HeckeOpSpec::S(n) => write!(f, "S{n}"),
            HeckeOpSpec::W => write!(f, "W"),
        }
    }
}

impl FromStr for HeckeOpSpec {
    type Err = Error;

    /// Accepts `T5`, `T:5`, `U9`, `V3`, `S2`, `W`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidOperator(format!("cannot parse operator '{s}'"));
        if s.eq_ignore_ascii_case("w") {
            return Ok(HeckeOpSpec::W);
        }
        let mut chars = s.chars();
        let kind = chars.next().ok_or_else(bad)?;
        let rest = chars.as_str().trim_start_matches(':');
        let n: u64 = rest.parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        match kind.to_ascii_uppercase() {
            'T' => Ok(HeckeOpSpec::T(n)),
            'U' => Ok(HeckeOpSpec::U(n)),
            'V' => Ok(HeckeOpSpec::V(n)),
            'S' => Ok(HeckeOpSpec::S(n)),
            _ => Err(bad()),
        }
    }
}

/// `ℓ S_ℓ = ℓ^(k-1) mod p`.
pub fn l_s_scalar(p: Prime, weight: u32, ell: u64) -> u8 {
    p.pow_weight(ell, weight as i64 - 1)
}

fn is_power_of(m: u64, p: u64) -> bool {
    let mut m = m;
    while m > 1 && m % p == 0 {
        m /= p;
    }
    m == 1
}

/// `a_n(T_ℓ f) = a_{ℓn}(f) + ℓ^(k-1) a_{n/ℓ}(f)`, to precision `⌊prec/ℓ⌋`.
pub fn apply_t_ell(f: &GradedForm, ell: u64) -> Result<GradedForm> {
    let p = f.p();
    if ell == p.as_u64() {
        return Err(Error::InvalidOperator(format!("T_{ell} with ℓ = p; use U_{ell}")));
    }
    if !arith::is_prime(ell) {
        return Err(Error::InvalidOperator(format!("T_ℓ needs a prime, got {ell}")));
    }
    let prec = f.prec() / ell as usize;
    if prec == 0 {
        return Err(Error::PrecisionTooSmall { need: ell as usize, got: f.prec() });
    }
    let s = l_s_scalar(p, f.weight(), ell);
    let a = f.series().coeffs();
    let l = ell as usize;
    let out: Vec<u8> = (0..prec)
        .map(|n| {
            let main = a[l * n];
            if n % l == 0 && s != 0 {
                p.add(main, p.mul(s, a[n / l]))
            } else {
                main
            }
        })
        .collect();
    GradedForm::new(QSeries::new(p, out), f.weight())
}

/// `T_{ℓ^e}` by the recurrence `T_{ℓ^(n+1)} = T_ℓ T_{ℓ^n} - ℓS_ℓ T_{ℓ^(n-1)}`.
pub fn apply_t_prime_power(f: &GradedForm, ell: u64, e: u32) -> Result<GradedForm> {
    if e == 0 {
        return Ok(f.clone());
    }
    let p = f.p();
    let s = l_s_scalar(p, f.weight(), ell);
    let mut prev = f.clone();
    let mut cur = apply_t_ell(f, ell)?;
    for _ in 1..e {
        let next = apply_t_ell(&cur, ell)?;
        let prec = next.prec();
        let correction = prev.series().truncate(prec).scale(s);
        let series = next.series().sub(&correction)?;
        prev = cur;
        cur = GradedForm::new(series, f.weight())?;
    }
    Ok(cur)
}

/// `T_m` for `m` coprime to p, multiplicatively over prime powers.
pub fn apply_t_m(f: &GradedForm, m: u64) -> Result<GradedForm> {
    if m == 0 {
        return Err(Error::InvalidOperator("T_0 is undefined".into()));
    }
    if m % f.p().as_u64() == 0 {
        return Err(Error::InvalidOperator(format!("T_{m} needs m coprime to p")));
    }
    let mut out = f.clone();
    for (ell, e) in arith::factor(m) {
        out = apply_t_prime_power(&out, ell, e)?;
    }
    Ok(out)
}

/// `a_n(U_m f) = a_{mn}(f)` for `m` a power of p.
pub fn apply_u_m(f: &QSeries, m: u64) -> Result<QSeries> {
    let p = f.p().as_u64();
    if m == 0 || !is_power_of(m, p) {
        return Err(Error::InvalidOperator(format!("U_{m}: index must be a power of {p} at level one")));
    }
    let m = m as usize;
    let prec = f.prec().div_ceil(m);
    let a = f.coeffs();
    Ok(QSeries::new(f.p(), (0..prec).map(|n| a[n * m]).collect()))
}

/// `V_m`: `a_{mn}(out) = a_n(f)`, precision `m * prec` capped at
/// [`V_PREC_CAP`].
pub fn apply_v_m(f: &QSeries, m: u64) -> Result<QSeries> {
    let p = f.p().as_u64();
    if m == 0 || !is_power_of(m, p) {
        return Err(Error::InvalidOperator(format!("V_{m}: index must be a power of {p} at level one")));
    }
    let prec = (f.prec() as u64).saturating_mul(m).min(V_PREC_CAP as u64) as usize;
    Ok(f.spread(m as usize, prec))
}

/// Projection onto coefficients with index prime to p.
pub fn apply_w(f: &QSeries) -> QSeries {
    let p = f.p().get() as usize;
    let mut c = f.coeffs().to_vec();
    for x in c.iter_mut().step_by(p) {
        *x = 0;
    }
    QSeries::new(f.p(), c)
}

/// The scalar operator `S_ℓ = ℓ^(k-2)`.
pub fn apply_s(f: &GradedForm, ell: u64) -> Result<GradedForm> {
    if ell % f.p().as_u64() == 0 {
        return Err(Error::InvalidOperator(format!("S_{ell} needs ℓ prime to p")));
    }
    let c = f.p().pow_weight(ell, f.weight() as i64 - 2);
    GradedForm::new(f.series().scale(c), f.weight())
}

pub fn apply(f: &GradedForm, op: HeckeOpSpec) -> Result<GradedForm> {
    match op {
        HeckeOpSpec::T(m) => apply_t_m(f, m),
        HeckeOpSpec::S(l) => apply_s(f, l),
        HeckeOpSpec::U(m) => GradedForm::new(apply_u_m(f.series(), m)?, f.weight()),
        HeckeOpSpec::V(m) => GradedForm::new(apply_v_m(f.series(), m)?, f.weight() * m as u32),
        HeckeOpSpec::W => {
            let w = apply_w(f.series());
            // W f = f - V_p U_p f lives in weight pk unless U_p f vanishes
            let weight = if w == *f.series() { f.weight() } else { f.weight() * f.p().get() as u32 };
            GradedForm::new(w, weight)
        }
    }
}

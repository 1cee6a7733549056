//! Truncated q-series over F_p and the generators for Δ-powers and Eisenstein
//! series.
//!
//! A [`QSeries`] of precision `P` knows the coefficients of `q^0 .. q^(P-1)`.
//! Binary operations truncate to the smaller precision.
//!
//! Cost model: a product costs `P * min(nnz(a), nnz(b))` byte multiply-adds,
//! so products with a sparse factor are cheap. Powers use the Frobenius
//! identity `f^p = V_p(f)` in characteristic p: writing `e` in base p,
//! `f^e = prod_i V_{p^i}(f)^{d_i}`, and each `V_{p^i}(f)` is sparse. For the
//! η³ series (about `sqrt(2P)` terms) this makes `Δ^k` cost
//! `O(P^1.5 * sum of digits of 8k)`.

use crate::error::{Error, Result};
use crate::field::{FpElement, Prime};
use crate::par::{self, Execution};

/// Default upper bound on generated precision for user-facing entry points.
pub const DEFAULT_PREC_CAP: usize = 1_000_000;

const BLOCK: usize = 1 << 13;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QSeries {
    p: Prime,
    coeffs: Vec<u8>,
}

/// A series stored as its nonzero terms, exponents strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseSeries {
    p: Prime,
    prec: usize,
    terms: Vec<(usize, u8)>,
}

impl QSeries {
    /// Coefficients are reduced mod p.
    pub fn new(p: Prime, mut coeffs: Vec<u8>) -> Self {
        let q = p.get();
        for c in coeffs.iter_mut() {
            if *c >= q {
                *c %= q;
            }
        }
        QSeries { p, coeffs }
    }

    pub fn from_i64(p: Prime, coeffs: &[i64]) -> Self {
        QSeries {
            p,
            coeffs: coeffs.iter().map(|&c| p.reduce_i64(c)).collect(),
        }
    }

    pub fn zero(p: Prime, prec: usize) -> Self {
        QSeries { p, coeffs: vec![0; prec] }
    }

    pub fn constant(p: Prime, c: u8, prec: usize) -> Self {
        let mut s = Self::zero(p, prec);
        if prec > 0 {
            s.coeffs[0] = c % p.get();
        }
        s
    }

    pub fn one(p: Prime, prec: usize) -> Self {
        Self::constant(p, 1, prec)
    }

    /// `c * q^n` to precision `prec`.
    pub fn monomial(p: Prime, n: usize, c: u8, prec: usize) -> Self {
        let mut s = Self::zero(p, prec);
        if n < prec {
            s.coeffs[n] = c % p.get();
        }
        s
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn prec(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[u8] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<u8> {
        self.coeffs
    }

    /// Coefficient of `q^n`; panics beyond the precision.
    pub fn coeff(&self, n: usize) -> u8 {
        self.coeffs[n]
    }

    pub fn coeff_element(&self, n: usize) -> FpElement {
        FpElement::new(self.coeffs[n] as i64, self.p)
    }

    pub fn truncate(&self, prec: usize) -> QSeries {
        QSeries {
            p: self.p,
            coeffs: self.coeffs[..prec.min(self.prec())].to_vec(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|&c| c != 0)
    }

    pub fn nnz(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0).count()
    }

    fn check(&self, other: &QSeries) -> Result<()> {
        if self.p != other.p {
            Err(Error::ModulusMismatch(self.p.get(), other.p.get()))
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &QSeries) -> Result<QSeries> {
        self.check(other)?;
        let p = self.p;
        Ok(QSeries {
            p,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| p.add(a, b)).collect(),
        })
    }

    pub fn sub(&self, other: &QSeries) -> Result<QSeries> {
        self.check(other)?;
        let p = self.p;
        Ok(QSeries {
            p,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| p.sub(a, b)).collect(),
        })
    }

    pub fn neg(&self) -> QSeries {
        let p = self.p;
        QSeries { p, coeffs: self.coeffs.iter().map(|&a| p.neg(a)).collect() }
    }

    pub fn scale(&self, c: u8) -> QSeries {
        let p = self.p;
        let c = c % p.get();
        QSeries { p, coeffs: self.coeffs.iter().map(|&a| p.mul(a, c)).collect() }
    }

    /// Multiplication by `q^k`, keeping the precision.
    pub fn shift(&self, k: usize) -> QSeries {
        let mut out = vec![0u8; self.prec()];
        if k < out.len() {
            let n = out.len() - k;
            out[k..].copy_from_slice(&self.coeffs[..n]);
        }
        QSeries { p: self.p, coeffs: out }
    }

    /// `V_m`: the coefficient of `q^n` moves to `q^(mn)`. Output precision is
    /// `prec`, which must not exceed `m * self.prec()`.
    pub fn spread(&self, m: usize, prec: usize) -> QSeries {
        assert!(m >= 1);
        assert!(prec <= m.saturating_mul(self.prec()), "spread beyond known coefficients");
        let mut out = vec![0u8; prec];
        for (n, &c) in self.coeffs.iter().enumerate() {
            let idx = n * m;
            if idx >= prec {
                break;
            }
            out[idx] = c;
        }
        QSeries { p: self.p, coeffs: out }
    }

    pub fn to_sparse(&self) -> SparseSeries {
        SparseSeries {
            p: self.p,
            prec: self.prec(),
            terms: nonzero_terms(&self.coeffs),
        }
    }
}

impl SparseSeries {
    pub fn new(p: Prime, prec: usize, terms: Vec<(usize, u8)>) -> Result<Self> {
        let mut out = Vec::with_capacity(terms.len());
        let mut last: Option<usize> = None;
        for (e, c) in terms {
            if e >= prec {
                return Err(Error::InvalidArgument(format!("exponent {e} beyond precision {prec}")));
            }
            if last.is_some_and(|l| l >= e) {
                return Err(Error::InvalidArgument("exponents must increase".into()));
            }
            last = Some(e);
            let c = c % p.get();
            if c != 0 {
                out.push((e, c));
            }
        }
        Ok(SparseSeries { p, prec, terms: out })
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn terms(&self) -> &[(usize, u8)] {
        &self.terms
    }

    pub fn to_dense(&self) -> QSeries {
        let mut s = QSeries::zero(self.p, self.prec);
        for &(e, c) in &self.terms {
            s.coeffs[e] = c;
        }
        s
    }
}

fn nonzero_terms(coeffs: &[u8]) -> Vec<(usize, u8)> {
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| (i, c))
        .collect()
}

/// `dense * sparse` truncated to `len`, computed in independent output
/// blocks with u32 accumulators that are reduced before they can overflow.
fn product_kernel(
    dense: &[u8],
    sparse: &[(usize, u8)],
    len: usize,
    p: Prime,
    exec: Execution,
) -> Vec<u8> {
    let pp = p.get() as u32;
    let max_term = (pp - 1) * (pp - 1);
    let flush_every = ((u32::MAX - 256) / max_term) as usize;
    let mut out = vec![0u8; len];
    par::for_each_chunk_mut(exec, &mut out, BLOCK, |lo, chunk| {
        let hi = lo + chunk.len();
        let mut acc = vec![0u32; chunk.len()];
        let mut pending = 0usize;
        for &(e, c) in sparse {
            if e >= hi {
                break;
            }
            let start = lo.max(e);
            let c = c as u32;
            let src = &dense[start - e..hi - e];
            for (a, &d) in acc[start - lo..].iter_mut().zip(src) {
                *a += c * d as u32;
            }
            pending += 1;
            if pending == flush_every {
                acc.iter_mut().for_each(|a| *a %= pp);
                pending = 0;
            }
        }
        for (o, a) in chunk.iter_mut().zip(&acc) {
            *o = (a % pp) as u8;
        }
    });
    out
}


/// Truncated product at the smaller of the two precisions. The operand with
/// fewer nonzero coefficients drives the inner loop.
pub fn mul(a: &QSeries, b: &QSeries) -> Result<QSeries> {
    mul_with(a, b, Execution::default())
}

pub fn mul_with(a: &QSeries, b: &QSeries, exec: Execution) -> Result<QSeries> {
    a.check(b)?;
    let len = a.prec().min(b.prec());
    let (x, y) = (&a.coeffs[..len], &b.coeffs[..len]);
    let nx = x.iter().filter(|&&c| c != 0).count();
    let ny = y.iter().filter(|&&c| c != 0).count();
    let (dense, sparse) = if nx <= ny { (y, x) } else { (x, y) };
    let terms = nonzero_terms(sparse);
    Ok(QSeries {
        p: a.p,
        coeffs: product_kernel(dense, &terms, len, a.p, exec),
    })
}

/// `a^e` at the precision of `a`.
pub fn pow(a: &QSeries, e: u64) -> QSeries {
    pow_with(a, e, Execution::default())
}

pub fn pow_with(a: &QSeries, mut e: u64, exec: Execution) -> QSeries {
    let prec = a.prec();
    let p = a.p;
    let q = p.as_u64();
    let mut acc: Option<QSeries> = None;
    let mut scale = 1usize;
    let times = |acc: Option<QSeries>, f: &QSeries| -> QSeries {
        match acc {
            None => f.clone(),
            Some(s) => mul_with(&s, f, exec).expect("same modulus"),
        }
    };
    while e > 0 {
        let d = e % q;
        e /= q;
        if d > 0 {
            let base_prec = prec.div_ceil(scale).max(1).min(prec);
            let base = a.truncate(base_prec);
            let nnz = base.nnz().max(1) as f64;
            let bits = 64 - d.leading_zeros() as u64;
            // Repeated sparse products versus powering the base at reduced
            // precision and spreading once.
            let cost_repeat = d as f64 * nnz;
            let cost_square = base_prec as f64 * (2.0 * bits as f64 / scale as f64 + 1.0);
            if cost_repeat <= cost_square {
                let factor = base.spread(scale, prec);
                for _ in 0..d {
                    acc = Some(times(acc, &factor));
                }
            } else {
                let g = square_and_multiply(&base, d, exec);
                acc = Some(times(acc, &g.spread(scale, prec)));
            }
        }
        scale = scale.saturating_mul(q as usize);
    }
    acc.unwrap_or_else(|| QSeries::one(p, prec))
}

fn square_and_multiply(a: &QSeries, mut e: u64, exec: Execution) -> QSeries {
    let mut result = QSeries::one(a.p, a.prec());
    let mut base = a.clone();
    while e > 0 {
        if e & 1 == 1 {
            result = mul_with(&result, &base, exec).expect("same modulus");
        }
        e >>= 1;
        if e > 0 {
            base = mul_with(&base, &base, exec).expect("same modulus");
        }
    }
    result
}

/// `sum c_i * s_i` at the smallest precision among the inputs.
pub fn linear_combine(pairs: &[(FpElement, &QSeries)]) -> Result<QSeries> {
    let first = pairs
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty linear combination".into()))?;
    let p = first.1.p;
    let len = pairs.iter().map(|(_, s)| s.prec()).min().unwrap_or(0);
    let mut acc = vec![0u32; len];
    for (c, s) in pairs {
        if s.p != p {
            return Err(Error::ModulusMismatch(p.get(), s.p.get()));
        }
        if c.modulus() != p {
            return Err(Error::ModulusMismatch(p.get(), c.modulus().get()));
        }
        let c = c.value() as u32;
        for (a, &x) in acc.iter_mut().zip(&s.coeffs) {
            *a = (*a + c * x as u32) % p.get() as u32;
        }
    }
    Ok(QSeries {
        p,
        coeffs: acc.into_iter().map(|a| a as u8).collect(),
    })
}

/// `sum_{m >= 0} (-1)^m (2m+1) q^(m(m+1)/2)`, the q-expansion of η³ without
/// its `q^(1/8)` factor.
pub fn eta_cubed(p: Prime, prec: usize) -> SparseSeries {
    let mut terms = Vec::new();
    let mut m = 0i64;
    loop {
        let e = (m * (m + 1) / 2) as usize;
        if e >= prec {
            break;
        }
        let sign = if m % 2 == 0 { 1 } else { -1 };
        let c = p.reduce_i64(sign * (2 * m + 1));
        if c != 0 {
            terms.push((e, c));
        }
        m += 1;
    }
    SparseSeries { p, prec, terms }
}

/// `Δ^k mod p` to `prec` coefficients, as `q^k (η³)^(8k)`.
pub fn delta_power(p: Prime, k: u64, prec: usize) -> QSeries {
    delta_power_with(p, k, prec, Execution::default())
}

pub fn delta_power_with(p: Prime, k: u64, prec: usize, exec: Execution) -> QSeries {
    if k == 0 {
        return QSeries::one(p, prec);
    }
    if k as usize >= prec {
        return QSeries::zero(p, prec);
    }
    let inner = prec - k as usize;
    let eta = eta_cubed(p, inner).to_dense();
    let body = pow_with(&eta, 8 * k, exec);
    let mut coeffs = vec![0u8; prec];
    coeffs[k as usize..].copy_from_slice(body.coeffs());
    QSeries { p, coeffs }
}

/// The normalized Eisenstein series `E_4 = 1 + 240 sum σ_3(n) q^n` or
/// `E_6 = 1 - 504 sum σ_5(n) q^n`, reduced mod p.
pub fn eisenstein(p: Prime, k: u32, prec: usize) -> Result<QSeries> {
    let scale: i64 = match k {
        4 => 240,
        6 => -504,
        _ => return Err(Error::InvalidArgument(format!("only E4 and E6 are supported, got E{k}"))),
    };
    let c = p.reduce_i64(scale);
    let mut out = QSeries::one(p, prec);
    if c == 0 || prec <= 1 {
        return Ok(out);
    }
    let q = p.get() as u32;
    // divisor-power sums; at most a few hundred divisors, so u32 is ample
    let mut sigma = vec![0u32; prec];
    for d in 1..prec {
        let dk = p.pow(p.reduce(d as u64), (k - 1) as u64) as u32;
        if dk == 0 {
            continue;
        }
        let mut m = d;
        while m < prec {
            sigma[m] += dk;
            m += d;
        }
    }
    for n in 1..prec {
        out.coeffs[n] = ((sigma[n] % q) * c as u32 % q) as u8;
    }
    Ok(out)
}

//! Weight-graded spaces `M_k(1, F_p)` in the echelonized Miller basis.
//!
//! The basis is built from the monomials `Δ^j E4^a E6^b` of weight k. Their
//! heads (first `dim` coefficients) are unitriangular over Z, so the
//! echelonizing transform is computed exactly over the integers, then reduced
//! mod p and applied to the monomials computed mod p. Basis element i is
//! `q^i + O(q^dim)`, which makes coordinates a read-off of the first `dim`
//! coefficients.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::field::Prime;
use crate::series::{self, QSeries};

/// A mod-p form together with an integral weight lift.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedForm {
    series: QSeries,
    weight: u32,
}

impl GradedForm {
    pub fn new(series: QSeries, weight: u32) -> Result<Self> {
        if weight % 2 == 1 {
            return Err(Error::OddWeight(weight));
        }
        Ok(GradedForm { series, weight })
    }

    pub fn series(&self) -> &QSeries {
        &self.series
    }

    pub fn into_series(self) -> QSeries {
        self.series
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn p(&self) -> Prime {
        self.series.p()
    }

    pub fn prec(&self) -> usize {
        self.series.prec()
    }

    /// Multiplies by `E_{p-1}^j`, which is 1 mod p: same series, weight
    /// raised by `j(p-1)`.
    pub fn lift(&self, weight: u32) -> Result<GradedForm> {
        let step = self.p().get() as u32 - 1;
        // multiplication by E_(p-1) (E4 or E6 when p = 3), which is 1 mod p;
        // level one has nothing in weight 2
        if weight < self.weight || (weight - self.weight) % step != 0 || weight - self.weight == 2 {
            return Err(Error::MixedWeight(self.weight, weight));
        }
        Ok(GradedForm { series: self.series.clone(), weight })
    }
}

/// Dimension of `M_k(1)` for even k.
pub fn dimension(k: u32) -> usize {
    if k % 2 == 1 {
        return 0;
    }
    let base = (k / 12) as usize;
    if k % 12 == 2 {
        base
    } else {
        base + 1
    }
}

#[derive(Debug)]
pub struct WeightBasis {
    p: Prime,
    weight: u32,
    basis: Vec<QSeries>,
}

impl WeightBasis {
    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn prec(&self) -> usize {
        self.basis[0].prec()
    }

    pub fn elements(&self) -> &[QSeries] {
        &self.basis
    }

    /// `[a_n(b_0), ..., a_n(b_{dim-1})]`.
    pub fn functional(&self, n: usize) -> Vec<u8> {
        self.basis.iter().map(|b| b.coeff(n)).collect()
    }

    /// Coordinates of a series of this weight, verified on every
    /// coefficient both sides know.
    pub fn coordinates(&self, f: &QSeries) -> Result<Vec<u8>> {
        let d = self.dim();
        if f.p() != self.p {
            return Err(Error::ModulusMismatch(self.p.get(), f.p().get()));
        }
        if f.prec() < d {
            return Err(Error::PrecisionTooSmall { need: d, got: f.prec() });
        }
        let coords = f.coeffs()[..d].to_vec();
        let check = f.prec().min(self.prec());
        let rebuilt = self.combine(&coords, check);
        if let Some(index) = (d..check).find(|&n| rebuilt.coeff(n) != f.coeff(n)) {
            return Err(Error::NotInSpan { weight: self.weight, index });
        }
        Ok(coords)
    }

    /// `sum coords_i b_i` to `prec <= self.prec()` coefficients.
    pub fn combine(&self, coords: &[u8], prec: usize) -> QSeries {
        assert_eq!(coords.len(), self.dim());
        assert!(prec <= self.prec());
        let p = self.p;
        let q = p.get() as u32;
        let mut acc = vec![0u32; prec];
        for (&c, b) in coords.iter().zip(&self.basis) {
            if c == 0 {
                continue;
            }
            for (a, &x) in acc.iter_mut().zip(b.coeffs()) {
                *a = (*a + c as u32 * x as u32) % q;
            }
        }
        QSeries::new(p, acc.into_iter().map(|a| a as u8).collect())
    }
}

type Cache = Mutex<HashMap<(u8, u32), Arc<WeightBasis>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The echelonized basis of weight k to at least `prec` coefficients.
/// Results are cached per (p, k); a cached basis of higher precision is
/// returned as is.
pub fn miller_basis(p: Prime, k: u32, prec: usize) -> Result<Arc<WeightBasis>> {
    if k % 2 == 1 {
        return Err(Error::OddWeight(k));
    }
    let d = dimension(k);
    if d == 0 {
        return Err(Error::EmptyWeight(k));
    }
    if prec < d {
        return Err(Error::PrecisionTooSmall { need: d, got: prec });
    }
    let key = (p.get(), k);
    if let Some(b) = cache().lock().unwrap().get(&key) {
        if b.prec() >= prec {
            return Ok(b.clone());
        }
    }
    let built = Arc::new(build_basis(p, k, prec)?);
    let mut guard = cache().lock().unwrap();
    let entry = guard.entry(key).or_insert_with(|| built.clone());
    if entry.prec() < built.prec() {
        *entry = built.clone();
    }
    Ok(entry.clone())
}

/// Coordinates of a graded form in its weight's basis.
pub fn to_coordinates(f: &GradedForm) -> Result<Vec<u8>> {
    let basis = miller_basis(f.p(), f.weight(), f.prec().max(dimension(f.weight())))?;
    basis.coordinates(f.series())
}

pub fn from_coordinates(p: Prime, k: u32, coords: &[u8], prec: usize) -> Result<QSeries> {
    let basis = miller_basis(p, k, prec.max(dimension(k)))?;
    if coords.len() != basis.dim() {
        return Err(Error::InvalidArgument(format!(
            "expected {} coordinates, got {}",
            basis.dim(),
            coords.len()
        )));
    }
    Ok(basis.combine(coords, prec))
}

/// Exponents `(a, b)` with `4a + 6b = w`, taking `b` in `{0, 1}`.
fn eisenstein_exponents(w: u32) -> (u32, u32) {
    if w % 4 == 0 {
        (w / 4, 0)
    } else {
        ((w - 6) / 4, 1)
    }
}

fn int_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len().min(b.len());
    (0..n)
        .map(|k| (0..=k).map(|i| &a[i] * &b[k - i]).sum())
        .collect()
}

fn int_pow(a: &[BigInt], e: u32) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len()];
    if !out.is_empty() {
        out[0] = BigInt::one();
    }
    for _ in 0..e {
        out = int_mul(&out, a);
    }
    out
}

/// Integer q-expansions of Δ, E4, E6 to `n` terms.
fn integer_generators(n: usize) -> [Vec<BigInt>; 3] {
    let mut euler = vec![BigInt::zero(); n];
    euler[0] = BigInt::one();
    for m in 1..n {
        // multiply by (1 - q^m)
        for i in (m..n).rev() {
            let t = euler[i - m].clone();
            euler[i] -= t;
        }
    }
    let eta24 = int_pow(&euler, 24);
    let mut delta = vec![BigInt::zero(); n];
    for i in 1..n {
        delta[i] = eta24[i - 1].clone();
    }
    let sigma = |k: u32, m: usize| -> BigInt {
        (1..=m).filter(|d| m % d == 0).map(|d| BigInt::from(d).pow(k)).sum()
    };
    let mut e4 = vec![BigInt::zero(); n];
    let mut e6 = vec![BigInt::zero(); n];
    for m in 0..n {
        if m == 0 {
            e4[0] = BigInt::one();
            e6[0] = BigInt::one();
        } else {
            e4[m] = sigma(3, m) * 240;
            e6[m] = sigma(5, m) * -504;
        }
    }
    [delta, e4, e6]
}

/// Upper unitriangular transform `t` with `b_i = sum_j t[i][j] m_j`, over Z.
fn echelon_transform(d: usize, k: u32) -> Result<Vec<Vec<BigInt>>> {
    let [delta, e4, e6] = integer_generators(d);
    let mut rows: Vec<Vec<BigInt>> = (0..d)
        .map(|j| {
            let (a, b) = eisenstein_exponents(k - 12 * j as u32);
            let m = int_mul(&int_pow(&delta, j as u32), &int_pow(&e4, a));
            int_mul(&m, &int_pow(&e6, b))
        })
        .collect();
    for (j, r) in rows.iter().enumerate() {
        let unit = r[j].is_one() && r[..j].iter().all(Zero::is_zero);
        if !unit {
            return Err(Error::Inconsistent(format!("monomial {j} of weight {k} has no unit pivot")));
        }
    }
    let mut t: Vec<Vec<BigInt>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    for i in (0..d).rev() {
        for j in i + 1..d {
            let c = rows[i][j].clone();
            if c.is_zero() {
                continue;
            }
            for col in 0..d {
                let r = &rows[j][col] * &c;
                rows[i][col] -= r;
                let s = &t[j][col] * &c;
                t[i][col] -= s;
            }
        }
    }
    Ok(t)
}

fn build_basis(p: Prime, k: u32, prec: usize) -> Result<WeightBasis> {
    let d = dimension(k);
    let t = echelon_transform(d, k)?;
    let q = BigInt::from(p.get());
    let t_mod: Vec<Vec<u8>> = t
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| {
                    let r = ((x % &q) + &q) % &q;
                    u8::try_from(r).expect("reduced below p")
                })
                .collect()
        })
        .collect();

    let (a_last, b) = eisenstein_exponents(k - 12 * (d as u32 - 1));
    let e4 = series::eisenstein(p, 4, prec)?;
    let e6 = series::eisenstein(p, 6, prec)?;
    let e4_cubed = series::pow(&e4, 3);
    let mut e_part = series::pow(&e4, a_last as u64);
    if b == 1 {
        e_part = series::mul(&e_part, &e6)?;
    }
    let mut monomials = vec![QSeries::zero(p, 0); d];
    for j in (0..d).rev() {
        if j + 1 < d {
            e_part = series::mul(&e_part, &e4_cubed)?;
        }
        let dj = series::delta_power(p, j as u64, prec);
        monomials[j] = series::mul(&dj, &e_part)?;
    }

    let qq = p.get() as u32;
    let basis: Vec<QSeries> = (0..d)
        .map(|i| {
            let mut acc = vec![0u32; prec];
            for (j, m) in monomials.iter().enumerate().skip(i) {
                let c = t_mod[i][j] as u32;
                if c == 0 {
                    continue;
                }
                for (a, &x) in acc.iter_mut().zip(m.coeffs()) {
                    *a = (*a + c * x as u32) % qq;
                }
            }
            QSeries::new(p, acc.into_iter().map(|a| a as u8).collect())
        })
        .collect();
    for (i, b) in basis.iter().enumerate() {
        let ok = (0..d).all(|j| b.coeff(j) == (i == j) as u8);
        if !ok {
            return Err(Error::Inconsistent(format!("basis element {i} of weight {k} is not echelon mod {p}")));
        }
    }
    Ok(WeightBasis { p, weight: k, basis })
}

//! Coefficient tables, the counts `π(f, x)`, `π(f, a, x)`, `π_sf(f, x)`,
//! their comparison with predicted asymptotics, and an exact oracle that
//! rebuilds every coefficient from the decomposition `n = m m' m''`.

use std::collections::{BTreeMap, HashMap};

use crate::arith;
use crate::basis::{self, GradedForm};
use crate::constants::{self, AsymptoticProfile};
use crate::error::{Error, Result};
use crate::expr;
use crate::field::Prime;
use crate::hecke;
use crate::hecke_module::{self, ClassStatus, HeckeModule, ModuleConfig};
use crate::linalg::Matrix;
use crate::par::{self, Execution};
use crate::series::QSeries;

pub const DEFAULT_TABLE_CAP: usize = 1_000_000;
pub const DEFAULT_CHECKPOINTS: [u64; 4] = [1_000, 10_000, 100_000, 1_000_000];
const BLOCK: usize = 1 << 16;

/// `a_n` for `n < x_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffTable {
    p: Prime,
    coeffs: Vec<u8>,
}

impl CoeffTable {
    pub fn from_series(f: QSeries) -> CoeffTable {
        CoeffTable { p: f.p(), coeffs: f.into_coeffs() }
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn x_max(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[u8] {
        &self.coeffs
    }
}

pub fn coefficient_table(text: &str, p: Prime, x_max: usize, cap: usize) -> Result<CoeffTable> {
    if x_max > cap {
        return Err(Error::CapExceeded { what: "table size", value: x_max as u64, cap: cap as u64 });
    }
    let e = expr::parse_form_expression(text)?;
    Ok(CoeffTable::from_series(expr::evaluate(&e, p, x_max)?.into_series()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountRow {
    pub x: u64,
    pub pi: u64,
    pub pi_sf: u64,
    /// `π(f, a, x)` for a = 1..p-1.
    pub per_value: BTreeMap<u8, u64>,
    pub per_value_sf: BTreeMap<u8, u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountReport {
    pub rows: Vec<CountRow>,
}

/// Square-free indicator for `n < len`.
pub fn squarefree_mask(len: usize) -> Vec<bool> {
    let mut mask = vec![true; len];
    if len > 0 {
        mask[0] = false;
    }
    let root = (len as f64).sqrt() as u64 + 1;
    for l in arith::primes_up_to(root) {
        let q = (l * l) as usize;
        for n in (q..len).step_by(q) {
            mask[n] = false;
        }
    }
    mask
}

/// Counts over `n < x` for each checkpoint x, by value and square-free.
pub fn count(table: &CoeffTable, checkpoints: &[u64], exec: Execution) -> Result<CountReport> {
    let mut xs = checkpoints.to_vec();
    xs.sort_unstable();
    xs.dedup();
    if let Some(&x) = xs.last() {
        if x as usize > table.x_max() {
            return Err(Error::InvalidArgument(format!("checkpoint {x} exceeds the table size {}", table.x_max())));
        }
    }
    let top = xs.last().copied().unwrap_or(0) as usize;
    let mask = squarefree_mask(top);
    let p = table.p.get() as usize;
    let a = &table.coeffs;
    let mut rows = Vec::with_capacity(xs.len());
    let mut all = vec![0u64; p];
    let mut sf = vec![0u64; p];
    let mut start = 0usize;
    for &x in &xs {
        let end = x as usize;
        let parts = par::map_blocks(exec, end - start, BLOCK, |r| {
            let mut t = vec![0u64; 2 * p];
            for n in start + r.start..start + r.end {
                let v = a[n] as usize;
                t[v] += 1;
                t[p + v] += mask[n] as u64;
            }
            t
        });
        for t in parts {
            for v in 0..p {
                all[v] += t[v];
                sf[v] += t[p + v];
            }
        }
        start = end;
        let per_value: BTreeMap<u8, u64> = (1..p).map(|v| (v as u8, all[v])).collect();
        let per_value_sf: BTreeMap<u8, u64> = (1..p).map(|v| (v as u8, sf[v])).collect();
        rows.push(CountRow {
            x,
            pi: per_value.values().sum(),
            pi_sf: per_value_sf.values().sum(),
            per_value,
            per_value_sf,
        });
    }
    Ok(CountReport { rows })
}

pub fn count_pi(table: &CoeffTable, checkpoints: &[u64], by_value: bool) -> Result<CountReport> {
    let mut r = count(table, checkpoints, Execution::default())?;
    if !by_value {
        for row in &mut r.rows {
            row.per_value.clear();
            row.per_value_sf.clear();
        }
    }
    Ok(r)
}

pub fn count_pi_sf(table: &CoeffTable, checkpoints: &[u64]) -> Result<CountReport> {
    count_pi(table, checkpoints, false)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub x: u64,
    pub pi: u64,
    pub pi_sf: u64,
    pub predicted: f64,
    pub ratio: f64,
    /// (a, empirical count, predicted count, ratio)
    pub per_value: Vec<(u8, u64, f64, f64)>,
}

/// Empirical counts against `c x / (log x)^α (log log x)^h`, using the
/// square-free counts when `squarefree` is set.
pub fn compare_report(report: &CountReport, profile: Option<&AsymptoticProfile>, squarefree: bool) -> Vec<ComparisonRow> {
    let Some(profile) = profile else {
        return Vec::new();
    };
    let alpha = profile.alpha.to_f64();
    report
        .rows
        .iter()
        .filter(|r| r.x >= 3)
        .map(|r| {
            let x = r.x as f64;
            let predicted = profile.c * constants::predict_shape(alpha, profile.h, x);
            let emp = if squarefree { r.pi_sf } else { r.pi };
            let counts = if squarefree { &r.per_value_sf } else { &r.per_value };
            let per_value = counts
                .iter()
                .map(|(&a, &n)| {
                    let pred = profile
                        .per_value
                        .get(&a)
                        .map_or(0.0, |v| v.c * constants::predict_shape(alpha, v.h, x));
                    (a, n, pred, n as f64 / pred)
                })
                .collect();
            ComparisonRow { x: r.x, pi: r.pi, pi_sf: r.pi_sf, predicted, ratio: emp as f64 / predicted, per_value }
        })
        .collect()
}

/// One pure summand of `W U_{p^j} f` with the data the oracle needs.
struct OracleComponent {
    module: HeckeModule,
    /// Per operator index, `T_{ℓ^e}` for e = 0..=e_max.
    powers: HashMap<usize, Vec<Matrix>>,
}

/// The split of one index for one component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triple {
    pub m: u64,
    pub m1: u64,
    pub m2: u64,
    /// `f'' = T_{m''} f` and `f' = T_{m'} f''` in the module basis.
    pub f2: Vec<u8>,
    pub f1: Vec<u8>,
    pub h: usize,
    pub value: u8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleEntry {
    pub n: u64,
    pub shift: u32,
    pub predicted: u8,
    pub components: Vec<Triple>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleReport {
    pub checked: u64,
    pub matched: u64,
    /// (n, predicted, actual) for the first mismatches.
    pub mismatches: Vec<(u64, u8, u8)>,
}

impl OracleReport {
    pub fn summary(&self) -> String {
        format!("match: {}/{}", self.matched, self.checked)
    }
}

pub struct DecompositionOracle {
    p: Prime,
    spf: Vec<u32>,
    /// Components of `W U_{p^j} f`, indexed by j.
    shifts: Vec<Vec<OracleComponent>>,
}

impl DecompositionOracle {
    /// Prepares the oracle for indices `n <= x_max`.
    pub fn new(f: &GradedForm, x_max: u64, cfg: &ModuleConfig) -> Result<DecompositionOracle> {
        let p = f.p();
        let k = f.weight();
        let coords = basis::to_coordinates(f)?;
        let up = hecke_module::up_matrix(p, k)?;
        let e_max = 64 - x_max.max(1).leading_zeros();
        let mut cache: HashMap<Vec<u8>, usize> = HashMap::new();
        let mut built: Vec<Vec<OracleComponent>> = Vec::new();
        let mut shifts_idx = Vec::new();
        let mut g = coords;
        let mut pj = 1u64;
        while pj <= x_max {
            let next = up.mul_vec(&g);
            let key = g.clone();
            let idx = match cache.get(&key) {
                Some(&i) => i,
                None => {
                    let comps = Self::components(p, k, &g, next.iter().all(|&x| x == 0), cfg, e_max)?;
                    built.push(comps);
                    cache.insert(key, built.len() - 1);
                    built.len() - 1
                }
            };
            shifts_idx.push(idx);
            g = next;
            pj *= p.as_u64();
        }
        // materialize per shift; repeated shifts share module data by cloning
        let shifts = shifts_idx
            .iter()
            .map(|&i| {
                built[i]
                    .iter()
                    .map(|c| OracleComponent { module: c.module.clone(), powers: c.powers.clone() })
                    .collect()
            })
            .collect();
        Ok(DecompositionOracle { p, spf: arith::spf_sieve(x_max as usize), shifts })
    }

    fn components(
        p: Prime,
        k: u32,
        g: &[u8],
        up_g_zero: bool,
        cfg: &ModuleConfig,
        e_max: u32,
    ) -> Result<Vec<OracleComponent>> {
        if g.iter().all(|&x| x == 0) {
            return Ok(Vec::new());
        }
        let (weight, coords) = if up_g_zero {
            (k, g.to_vec())
        } else {
            let kp = k * p.get() as u32;
            let prec = basis::dimension(kp) + cfg.slack;
            let w = hecke::apply_w(&basis::from_coordinates(p, k, g, prec)?);
            if w.is_zero() {
                return Ok(Vec::new());
            }
            (kp, basis::to_coordinates(&GradedForm::new(w, kp)?)?)
        };
        let m = HeckeModule::from_coordinates(p, weight, coords, cfg)?;
        let modules = if m.is_pure() {
            vec![m]
        } else {
            m.pure_decomposition()?.iter().map(|c| m.component_module(c)).collect::<Result<Vec<_>>>()?
        };
        modules
            .into_iter()
            .map(|module| {
                module.require_conductor()?;
                let powers = (0..module.operators().len()).map(|i| (i, module.prime_power_matrices(i, e_max))).collect();
                Ok(OracleComponent { module, powers })
            })
            .collect()
    }

    pub fn classify(&self, n: u64) -> Result<OracleEntry> {
        if n == 0 || n as usize >= self.spf.len() {
            return Err(Error::InvalidArgument(format!("index {n} is outside the oracle range")));
        }
        let q = self.p.as_u64();
        let (mut shift, mut rest) = (0u32, n);
        while rest % q == 0 {
            rest /= q;
            shift += 1;
        }
        let factors = arith::factor_with_spf(rest, &self.spf);
        let mut predicted = 0u8;
        let mut triples = Vec::new();
        for comp in &self.shifts[shift as usize] {
            let m = &comp.module;
            let cd = m.require_conductor()?;
            let (mut mu, mut mn, mut ms) = (Vec::new(), Vec::new(), Vec::new());
            for &(l, e) in &factors {
                let op = cd
                    .operator_of(l)
                    .ok_or_else(|| Error::ConductorNotFound(format!("class of {l} mod {} is unknown", cd.modulus)))?;
                if e >= 2 {
                    ms.push((l, e, op));
                } else if m.operators()[op].status == ClassStatus::Nilpotent {
                    mn.push((l, op));
                } else {
                    mu.push((l, op));
                }
            }
            let mut v = m.seed_vector();
            for &(_, e, op) in &ms {
                v = comp.powers[&op][e as usize].mul_vec(&v);
            }
            let f2 = v.clone();
            for &(_, op) in &mn {
                v = m.operators()[op].matrix.mul_vec(&v);
            }
            let f1 = v.clone();
            for &(_, op) in &mu {
                v = m.operators()[op].matrix.mul_vec(&v);
            }
            let value = m.a1(&v);
            predicted = self.p.add(predicted, value);
            triples.push(Triple {
                m: mu.iter().map(|t| t.0).product(),
                m1: mn.iter().map(|t| t.0).product(),
                m2: ms.iter().map(|&(l, e, _)| l.pow(e)).product(),
                f2,
                f1,
                h: mn.len(),
                value,
            });
        }
        Ok(OracleEntry { n, shift, predicted, components: triples })
    }

    /// Checks `a_n` for `1 <= n <= min(x_max, table)`; with `coprime_only`
    /// the indices divisible by p are skipped.
    pub fn verify(&self, table: &[u8], coprime_only: bool, exec: Execution) -> Result<OracleReport> {
        let top = (self.spf.len() - 1).min(table.len().saturating_sub(1));
        let q = self.p.as_u64();
        let parts = par::map_blocks(exec, top, 4096, |r| -> Result<(u64, u64, Vec<(u64, u8, u8)>)> {
            let (mut checked, mut matched, mut bad) = (0, 0, Vec::new());
            for i in r {
                let n = i as u64 + 1;
                if coprime_only && n % q == 0 {
                    continue;
                }
                let e = self.classify(n)?;
                checked += 1;
                if e.predicted == table[n as usize] {
                    matched += 1;
                } else if bad.len() < 20 {
                    bad.push((n, e.predicted, table[n as usize]));
                }
            }
            Ok((checked, matched, bad))
        });
        let mut report = OracleReport { checked: 0, matched: 0, mismatches: Vec::new() };
        for part in parts {
            let (c, m, b) = part?;
            report.checked += c;
            report.matched += m;
            for x in b {
                if report.mismatches.len() < 20 {
                    report.mismatches.push(x);
                }
            }
        }
        Ok(report)
    }
}

/// Rebuilds `a_n(f)` for `1 <= n <= x_max` and compares with the
/// q-expansion.
pub fn decomposition_oracle(f: &GradedForm, x_max: u64, cfg: &ModuleConfig) -> Result<OracleReport> {
    if f.prec() <= x_max as usize {
        return Err(Error::PrecisionTooSmall { need: x_max as usize + 1, got: f.prec() });
    }
    let oracle = DecompositionOracle::new(f, x_max, cfg)?;
    oracle.verify(f.series().coeffs(), false, Execution::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn delta_counts_mod_3() {
        let t = coefficient_table("delta", p(3), 14, DEFAULT_TABLE_CAP).unwrap();
        let nz: Vec<usize> = (0..14).filter(|&n| t.coeffs()[n] != 0).collect();
        assert_eq!(nz, vec![1, 4, 7, 13]);
        let r = count(&t, &[14, 2], Execution::Sequential).unwrap();
        assert_eq!(r.rows[0].x, 2);
        assert_eq!(r.rows[0].pi_sf, 1);
        assert_eq!(r.rows[1].pi, 4);
        assert_eq!(r.rows[1].pi_sf, 3);
        assert!(count(&t, &[15], Execution::Sequential).is_err());
    }

    #[test]
    fn squarefree_mask_small() {
        let m = squarefree_mask(20);
        let sf: Vec<usize> = (0..20).filter(|&n| m[n]).collect();
        assert_eq!(sf, vec![1, 2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 17, 19]);
    }

    #[test]
    fn table_cap() {
        assert!(matches!(coefficient_table("delta", p(3), 11, 10), Err(Error::CapExceeded { .. })));
        let z = coefficient_table("0", p(5), 9, 100).unwrap();
        assert!(z.coeffs().iter().all(|&x| x == 0));
    }
}

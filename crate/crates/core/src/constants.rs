//! Leading constants of `π(f, x)`, `π(f, a, x)` and `π_sf(f, x)`.
//!
//! A general form is reduced to forms with coefficients supported prime to
//! p via `f_m = V_m W U_m f`; the `U_p`-orbit of f is finite, so the sum
//! over `m = p^j` is a finite sum plus geometric tails over the eventual
//! cycle. Each `W U_m f` is split into pure components and each pure
//! component is profiled from its Hecke module.

use std::collections::{BTreeMap, HashMap};

use crate::arith;
use crate::basis::{self, GradedForm};
use crate::density::{self, Rational};
use crate::error::{Error, Result};
use crate::euler::{self, EulerConstant};
use crate::field::Prime;
use crate::hecke;
use crate::hecke_module::{self, ClassStatus, HeckeModule, ModuleConfig};
use crate::linalg::Matrix;
use crate::par::{self, Execution};

pub const DEFAULT_SFULL_BOUND: u64 = 10_000_000_000;
const MAX_ORBIT: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantsConfig {
    pub module: ModuleConfig,
    pub prime_bound: u64,
    pub sfull_bound: u64,
    pub exec: Execution,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        ConstantsConfig {
            module: ModuleConfig::default(),
            prime_bound: euler::DEFAULT_PRIME_BOUND,
            sfull_bound: DEFAULT_SFULL_BOUND,
            exec: Execution::default(),
        }
    }
}

/// `Σ g(s)/s` over square-full `s ≤ bound` prime to p, grouped by the
/// vector `T_s f`, where `g(s) = ∏_{ℓ | s, ℓ ∈ U} (1 + 1/ℓ)^(-1)` so that
/// `C(U, s) = C(U) g(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SquarefullOrbit {
    pub sums: BTreeMap<Vec<u8>, f64>,
    pub terms: usize,
    pub bound: u64,
    /// Bound on the omitted `Σ_{s > bound} 1/s`.
    pub tail: f64,
}

struct SfContext {
    primes: Vec<u64>,
    ops: Vec<usize>,
    in_u: Vec<bool>,
    powers: HashMap<usize, Vec<Matrix>>,
    bound: u64,
}

impl SfContext {
    fn dfs(&self, start: usize, s: u64, v: &[u8], g: f64, out: &mut Vec<(u64, Vec<u8>, f64)>) {
        out.push((s, v.to_vec(), g / s as f64));
        let lim = self.bound / s;
        for i in start..self.primes.len() {
            let l = self.primes[i];
            if l * l > lim {
                return;
            }
            self.descend(i, s, v, g, out);
        }
    }

    /// Terms whose smallest prime factor is `primes[i]`, times `s`.
    fn descend(&self, i: usize, s: u64, v: &[u8], g: f64, out: &mut Vec<(u64, Vec<u8>, f64)>) {
        let l = self.primes[i];
        let g2 = if self.in_u[i] { g * l as f64 / (l as f64 + 1.0) } else { g };
        let pw = &self.powers[&self.ops[i]];
        let lim = self.bound / s;
        let mut q = l * l;
        let mut e = 2;
        while q <= lim {
            let w = pw[e].mul_vec(v);
            if w.iter().any(|&x| x != 0) {
                self.dfs(i + 1, s * q, &w, g2, out);
            }
            match q.checked_mul(l) {
                Some(n) => q = n,
                None => break,
            }
            e += 1;
        }
    }
}

pub fn squarefull_orbit(module: &HeckeModule, from: &[u8], bound: u64, exec: Execution) -> Result<SquarefullOrbit> {
    let cd = module.require_conductor()?;
    let p = module.p().as_u64();
    let root = (bound as f64).sqrt() as u64 + 1;
    let primes: Vec<u64> = arith::primes_up_to(root).into_iter().filter(|&l| l != p && l * l <= bound).collect();
    let mut ops = Vec::with_capacity(primes.len());
    let mut in_u = Vec::with_capacity(primes.len());
    for &l in &primes {
        let i = cd
            .operator_of(l)
            .ok_or_else(|| Error::ConductorNotFound(format!("class of {l} mod {} is unknown", cd.modulus)))?;
        ops.push(i);
        in_u.push(module.operators()[i].status == ClassStatus::Invertible);
    }
    let e_max = 64 - bound.leading_zeros();
    let mut powers = HashMap::new();
    for &i in &ops {
        powers.entry(i).or_insert_with(|| module.prime_power_matrices(i, e_max));
    }
    let ctx = SfContext { primes, ops, in_u, powers, bound };
    let idx: Vec<usize> = (0..ctx.primes.len()).collect();
    let branches = par::map_items(exec, &idx, |&i| {
        let mut out = Vec::new();
        ctx.descend(i, 1, from, 1.0, &mut out);
        out
    });
    let mut terms: Vec<(u64, Vec<u8>, f64)> = vec![(1, from.to_vec(), 1.0)];
    terms.extend(branches.into_iter().flatten());
    terms.sort_by_key(|t| t.0);
    let mut sums: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
    for (_, v, w) in &terms {
        *sums.entry(v.clone()).or_insert(0.0) += w;
    }
    Ok(SquarefullOrbit { sums, terms: terms.len(), bound, tail: 2.2 / (bound as f64).sqrt() })
}

/// `Σ_{s ∈ S_{f,target}} C(U, s)/s` and its truncation error.
pub fn squarefull_sum(
    module: &HeckeModule,
    from: &[u8],
    target: &[u8],
    bound: u64,
    c_u: &EulerConstant,
) -> Result<(f64, f64)> {
    let orbit = squarefull_orbit(module, from, bound, Execution::default())?;
    let s = orbit.sums.get(target).copied().unwrap_or(0.0);
    Ok((c_u.value * s, c_u.tail * s + c_u.value * orbit.tail))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValueConstant {
    pub h: usize,
    pub c: f64,
    pub err: f64,
}

/// Profile of one pure summand `W U_{p^j} f`-component, with the weight
/// it carries in the sum over `m = p^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentProfile {
    pub shift: u32,
    pub b_weight: f64,
    pub weight: u32,
    pub coords: Vec<u8>,
    pub dim: usize,
    pub alpha: Rational,
    pub h: usize,
    pub c: f64,
    pub c_err: f64,
    pub c_u: EulerConstant,
    pub conductor: Option<u64>,
    pub per_value: BTreeMap<u8, ValueConstant>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticProfile {
    pub alpha: Rational,
    pub h: usize,
    pub c: f64,
    pub c_err: f64,
    pub per_value: BTreeMap<u8, ValueConstant>,
    pub components: Vec<ComponentProfile>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SquarefreeOutcome {
    Profile(AsymptoticProfile),
    /// Every nonzero coefficient sits at an index divisible by `ℓ²` for
    /// some `ℓ | p`.
    Degenerate,
}

struct PureProfile {
    alpha: Rational,
    h: usize,
    c: f64,
    c_err: f64,
    c_u: EulerConstant,
    conductor: Option<u64>,
    per_value: BTreeMap<u8, ValueConstant>,
}

fn pure_profile(m: &HeckeModule, squarefree: bool, cfg: &ConstantsConfig) -> Result<PureProfile> {
    let alpha = density::alpha_of_pure_module(m)?;
    let beta = &Rational::one() - &alpha;
    let sc = m.require_status_conductor()?;
    let u_classes: Vec<u64> = sc.classes.keys().filter(|u| !sc.nilpotent.contains(u)).copied().collect();
    let c_u = euler::euler_constant_with(&u_classes, sc.modulus, &beta, 1, cfg.prime_bound, cfg.exec)?;
    let h = m.strict_nilpotence_order()?;
    let gamma = m.gamma_group()?;
    let phi = m.require_nilpotent_conductor()?.phi();
    let f = m.seed_vector();

    let (starts, sf_tail) = if squarefree {
        (BTreeMap::from([(f.clone(), 1.0)]), 0.0)
    } else {
        let o = squarefull_orbit(m, &f, cfg.sfull_bound, cfg.exec)?;
        (o.sums, o.tail)
    };

    // acc[h'][a] = Σ S(f'') δ(M_{f',f''}) |Δ_{f',a}| / |Γ|
    let mut acc: Vec<BTreeMap<u8, f64>> = vec![BTreeMap::new(); h + 1];
    let inv_gamma = 1.0 / gamma.order() as f64;
    for (fpp, &s) in &starts {
        for (level, slot) in acc.iter_mut().enumerate() {
            for (fp, cnt) in density::height_counts(m, fpp, level)? {
                let d = density::tuple_density(cnt, level, phi).to_f64();
                for g in &gamma.elements {
                    let a = m.a1(&g.mul_vec(&fp));
                    if a != 0 {
                        *slot.entry(a).or_insert(0.0) += s * d * inv_gamma;
                    }
                }
            }
        }
    }
    let rel = c_u.tail / c_u.value;
    let mut per_value = BTreeMap::new();
    for a in 1..m.p().get() {
        if let Some(level) = (0..=h).rev().find(|&l| acc[l].get(&a).is_some_and(|&x| x > 0.0)) {
            let c = c_u.value * acc[level][&a];
            per_value.insert(a, ValueConstant { h: level, c, err: c * rel + c_u.value * sf_tail });
        }
    }
    let top: Vec<&ValueConstant> = per_value.values().filter(|v| v.h == h).collect();
    if top.is_empty() {
        return Err(Error::Inconsistent(format!("no coefficient value attains h = {h}")));
    }
    let c: f64 = top.iter().map(|v| v.c).sum();
    let c_err = c * rel + c_u.value * sf_tail;
    Ok(PureProfile { alpha, h, c, c_err, c_u, conductor: m.conductor().map(|cd| cd.modulus), per_value })
}

fn profile_components(
    m: &HeckeModule,
    shift: u32,
    b_weight: f64,
    squarefree: bool,
    cfg: &ConstantsConfig,
) -> Result<Vec<ComponentProfile>> {
    let mut parts = Vec::new();
    if m.is_pure() {
        parts.push((m.basis_vectors()[0].clone(), m.clone()));
    } else {
        for c in m.pure_decomposition()? {
            let sub = m.component_module(&c)?;
            parts.push((c.coords, sub));
        }
    }
    parts
        .into_iter()
        .map(|(coords, sub)| {
            let pp = pure_profile(&sub, squarefree, cfg)?;
            Ok(ComponentProfile {
                shift,
                b_weight,
                weight: sub.weight(),
                coords,
                dim: sub.dim(),
                alpha: pp.alpha,
                h: pp.h,
                c: pp.c,
                c_err: pp.c_err,
                c_u: pp.c_u,
                conductor: pp.conductor,
                per_value: pp.per_value,
            })
        })
        .collect()
}

/// `W g` for `g ∈ M_k` as (weight, coordinates), or `None` when it
/// vanishes. `W g` has weight k when `U_p g = 0` and weight pk otherwise.
fn w_coords(p: Prime, k: u32, g: &[u8], up_g_zero: bool, slack: usize) -> Result<Option<(u32, Vec<u8>)>> {
    if g.iter().all(|&x| x == 0) {
        return Ok(None);
    }
    if up_g_zero {
        return Ok(Some((k, g.to_vec())));
    }
    let kp = k * p.get() as u32;
    let prec = basis::dimension(kp) + slack;
    let w = hecke::apply_w(&basis::from_coordinates(p, k, g, prec)?);
    if w.is_zero() {
        return Ok(None);
    }
    Ok(Some((kp, basis::to_coordinates(&GradedForm::new(w, kp)?)?)))
}

fn w_module(p: Prime, k: u32, g: &[u8], up_g_zero: bool, cfg: &ModuleConfig) -> Result<Option<HeckeModule>> {
    match w_coords(p, k, g, up_g_zero, cfg.slack)? {
        Some((w, c)) => HeckeModule::from_coordinates(p, w, c, cfg).map(Some),
        None => Ok(None),
    }
}

/// Whether every `W U_{p^j} f` vanishes, i.e. f is a constant.
fn is_constant(p: Prime, k: u32, coords: &[u8], slack: usize) -> Result<bool> {
    let (orbit, j0) = up_orbit(p, k, coords)?;
    for (j, g) in orbit.iter().enumerate() {
        let next = orbit.get(j + 1).unwrap_or(&orbit[j0]);
        if w_coords(p, k, g, next.iter().all(|&x| x == 0), slack)?.is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `U_p^j f` for j until the sequence repeats: returns the distinct terms
/// and the index where the cycle starts.
fn up_orbit(p: Prime, k: u32, coords: &[u8]) -> Result<(Vec<Vec<u8>>, usize)> {
    let up = hecke_module::up_matrix(p, k)?;
    let mut seen: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut orbit = Vec::new();
    let mut g = coords.to_vec();
    loop {
        if let Some(&j0) = seen.get(&g) {
            return Ok((orbit, j0));
        }
        if orbit.len() >= MAX_ORBIT {
            return Err(Error::CapExceeded { what: "U_p orbit", value: orbit.len() as u64, cap: MAX_ORBIT as u64 });
        }
        seen.insert(g.clone(), orbit.len());
        orbit.push(g.clone());
        g = up.mul_vec(&g);
    }
}

fn combine(components: Vec<ComponentProfile>) -> Result<AsymptoticProfile> {
    let alpha = components.iter().map(|c| c.alpha.clone()).min().ok_or(Error::ConstantForm)?;
    let lead: Vec<&ComponentProfile> = components.iter().filter(|c| c.alpha == alpha).collect();
    let h = lead.iter().map(|c| c.h).max().unwrap_or(0);
    let (mut c, mut c_err) = (0.0, 0.0);
    for comp in lead.iter().filter(|c| c.h == h) {
        c += comp.b_weight * comp.c;
        c_err += comp.b_weight * comp.c_err;
    }
    let mut per_value: BTreeMap<u8, ValueConstant> = BTreeMap::new();
    for comp in &lead {
        for (&a, v) in &comp.per_value {
            let e = per_value.entry(a).or_insert(ValueConstant { h: v.h, c: 0.0, err: 0.0 });
            if v.h > e.h {
                *e = ValueConstant { h: v.h, c: 0.0, err: 0.0 };
            }
            if v.h == e.h {
                e.c += comp.b_weight * v.c;
                e.err += comp.b_weight * v.err;
            }
        }
    }
    Ok(AsymptoticProfile { alpha, h, c, c_err, per_value, components })
}

/// α(f), h(f), c(f) and the per-value constants c(f, a).
pub fn leading_constants(f: &GradedForm, cfg: &ConstantsConfig) -> Result<AsymptoticProfile> {
    let p = f.p();
    let k = f.weight();
    let coords = basis::to_coordinates(f)?;
    let (orbit, j0) = up_orbit(p, k, &coords)?;
    let period = orbit.len() - j0;
    let pf = p.get() as f64;
    let mut cache: HashMap<(Vec<u8>, bool), Vec<ComponentProfile>> = HashMap::new();
    let mut components = Vec::new();
    for (j, g) in orbit.iter().enumerate() {
        let next_zero = orbit.get(j + 1).unwrap_or(&orbit[j0]).iter().all(|&x| x == 0);
        let mut b = pf.powi(-(j as i32));
        if j >= j0 {
            b /= 1.0 - pf.powi(-(period as i32));
        }
        let key = (g.clone(), next_zero);
        if !cache.contains_key(&key) {
            let parts = match w_module(p, k, g, next_zero, &cfg.module)? {
                Some(m) => profile_components(&m, 0, 1.0, false, cfg)?,
                None => Vec::new(),
            };
            cache.insert(key.clone(), parts);
        }
        for c in &cache[&key] {
            components.push(ComponentProfile { shift: j as u32, b_weight: b, ..c.clone() });
        }
    }
    if components.is_empty() {
        return Err(Error::ConstantForm);
    }
    combine(components)
}

/// The square-free variant: `S = {1}` and only `m ∈ {1, p}` contribute.
pub fn leading_constants_sf(f: &GradedForm, cfg: &ConstantsConfig) -> Result<SquarefreeOutcome> {
    let p = f.p();
    let k = f.weight();
    let coords = basis::to_coordinates(f)?;
    let up = hecke_module::up_matrix(p, k)?;
    let g1 = up.mul_vec(&coords);
    let g2 = up.mul_vec(&g1);
    let mut components = Vec::new();
    for (j, g, next) in [(0u32, &coords, &g1), (1, &g1, &g2)] {
        let zero = next.iter().all(|&x| x == 0);
        if let Some(m) = w_module(p, k, g, zero, &cfg.module)? {
            components.extend(profile_components(&m, j, 1.0 / (p.get() as f64).powi(j as i32), true, cfg)?);
        }
    }
    if components.is_empty() {
        if is_constant(p, k, &coords, cfg.module.slack)? {
            return Err(Error::ConstantForm);
        }
        return Ok(SquarefreeOutcome::Degenerate);
    }
    combine(components).map(SquarefreeOutcome::Profile)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub x: f64,
    pub value: f64,
    pub err: f64,
}

/// `c x / (log x)^α (log log x)^h`.
pub fn predict(profile: &AsymptoticProfile, xs: &[f64]) -> Result<Vec<Prediction>> {
    xs.iter()
        .map(|&x| {
            if x < 3.0 {
                return Err(Error::InvalidArgument(format!("prediction needs x >= 3, got {x}")));
            }
            let shape = predict_shape(profile.alpha.to_f64(), profile.h, x);
            Ok(Prediction { x, value: profile.c * shape, err: profile.c_err * shape })
        })
        .collect()
}

pub fn predict_shape(alpha: f64, h: usize, x: f64) -> f64 {
    let l = x.ln();
    x / l.powf(alpha) * l.ln().powi(h as i32)
}

//! The finite Hecke module `Af` spanned by a form under the `T_ℓ`, the
//! action of sampled primes on it, and the invariants read off from that
//! action: conductor, nilpotent/invertible classes, purity, the strict order
//! of nilpotence `h(f)`, the group `Γ_f` and the canonical pure
//! decomposition.
//!
//! The module always records the distinct operators realized by the sampled
//! primes. On top of that it looks for a modulus `c` in `{p, p², p³, p⁴}`
//! such that the action of `T_ℓ` depends only on `ℓ mod c` (the
//! *conductor*), and separately for the smallest `c` that determines which
//! primes act nilpotently and how (the *nilpotent conductor*). Densities only
//! need the latter; square-full sums and the decomposition oracle need the
//! former. Either may be absent when the Galois image is not cut out by
//! p-power congruences; the failure is recorded rather than hidden.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith;
use crate::basis::{self, GradedForm, WeightBasis};
use crate::error::{Error, Result};
use crate::field::Prime;
use crate::hecke::l_s_scalar;
use crate::linalg::{self, Matrix, Span};
use crate::par::{self, Execution};
use crate::series::QSeries;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleConfig {
    /// Primes used to close the span of f.
    pub generator_bound: u64,
    /// Primes sampled to determine the action and the conductor.
    pub sample_bound: u64,
    pub dim_cap: usize,
    /// Extra coefficients beyond what the matrices strictly need.
    pub slack: usize,
    /// Largest `e` tried for a conductor `p^e`.
    pub max_conductor_exponent: u32,
    /// Seed for the random element used to split eigenspaces.
    pub seed: u64,
    pub group_cap: usize,
}

impl Default for ModuleConfig {
    fn default() -> Self {
        ModuleConfig {
            generator_bound: 50,
            sample_bound: 2000,
            dim_cap: 64,
            slack: 8,
            max_conductor_exponent: 4,
            seed: 0,
            group_cap: 100_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassStatus {
    Nilpotent,
    Invertible,
    Mixed,
}

impl ClassStatus {
    pub fn of(m: &Matrix) -> ClassStatus {
        if m.is_nilpotent() {
            ClassStatus::Nilpotent
        } else if m.is_invertible() {
            ClassStatus::Invertible
        } else {
            ClassStatus::Mixed
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassStatus::Nilpotent => "nilpotent",
            ClassStatus::Invertible => "invertible",
            ClassStatus::Mixed => "mixed",
        }
    }
}

/// One distinct action `(T_ℓ | Af, ℓS_ℓ)` among the sampled primes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Operator {
    pub matrix: Matrix,
    pub scalar: u8,
    pub status: ClassStatus,
    /// Sampled primes with this action, ascending.
    pub primes: Vec<u64>,
}

/// Residue classes mod `modulus` and the operator each one determines.
/// `None` marks a class whose operator is not determined by the class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conductor {
    pub modulus: u64,
    pub classes: BTreeMap<u64, Option<usize>>,
    /// Classes whose primes act nilpotently.
    pub nilpotent: BTreeSet<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Resolution {
    /// Every class determines its operator.
    Full,
    /// Nilpotent classes determine their operator.
    Nilpotent,
    /// Classes determine only whether the action is nilpotent.
    Status,
}

impl Conductor {
    pub fn phi(&self) -> u64 {
        self.classes.len() as u64
    }

    pub fn class_of(&self, ell: u64) -> u64 {
        ell % self.modulus
    }

    pub fn operator_of(&self, ell: u64) -> Option<usize> {
        self.classes.get(&self.class_of(ell)).copied().flatten()
    }
}

#[derive(Clone, Debug)]
pub struct HeckeModule {
    p: Prime,
    weight: u32,
    ambient_dim: usize,
    basis_vectors: Vec<Vec<u8>>,
    a1: Vec<u8>,
    operators: Vec<Operator>,
    prime_ops: Vec<(u64, usize)>,
    conductor: Option<Conductor>,
    nilpotent_conductor: Option<Conductor>,
    status_conductor: Option<Conductor>,
    conductor_failure: Option<String>,
    config: ModuleConfig,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassEntry {
    pub class: u64,
    pub matrix: Option<Matrix>,
    pub scalar: u8,
    pub status: ClassStatus,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassReport {
    pub modulus: Option<u64>,
    pub entries: Vec<ClassEntry>,
    pub unit_classes: Vec<u64>,
    pub nilpotent_classes: Vec<u64>,
    pub pure: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaGroup {
    pub elements: Vec<Matrix>,
    pub contains_scalars: bool,
    /// The λ with `λI` in the group.
    pub scalars: Vec<u8>,
}

impl GammaGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PureComponent {
    /// Coordinates in the ambient weight basis.
    pub coords: Vec<u8>,
    /// Coordinates in the module basis.
    pub af_vector: Vec<u8>,
    /// Indices of the operators acting nilpotently on the component.
    pub nilpotent_ops: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquidistributionVerdict {
    Equidistributed,
    NotEquidistributed,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquidistributionReport {
    pub criterion_holds: bool,
    pub eigenform_converse_applies: bool,
    pub primitive_root_shortcut: bool,
    pub gamma_order: usize,
    pub scalar_values: Vec<u8>,
    pub verdict: EquidistributionVerdict,
}

/// Ambient matrix of `T_ℓ` on `M_k`: column i holds the first `dim`
/// coefficients of `T_ℓ b_i`.
fn ambient_matrix(basis: &WeightBasis, ell: u64, s: u8) -> Matrix {
    let p = basis.p();
    let d = basis.dim();
    let l = ell as usize;
    let cols: Vec<Vec<u8>> = basis
        .elements()
        .iter()
        .map(|b| {
            (0..d)
                .map(|n| {
                    let main = b.coeff(l * n);
                    if n % l == 0 {
                        p.add(main, p.mul(s, b.coeff(n / l)))
                    } else {
                        main
                    }
                })
                .collect()
        })
        .collect();
    Matrix::from_columns(p, &cols)
}

/// Matrix of `U_p` on `M_k` in the weight basis.
pub fn up_matrix(p: Prime, weight: u32) -> Result<Matrix> {
    let d = basis::dimension(weight);
    let wb = basis::miller_basis(p, weight, p.get() as usize * d.saturating_sub(1) + 1)?;
    Ok(ambient_matrix(&wb, p.as_u64(), 0))
}

/// Strict form: fails unless a full conductor is found.
pub fn build_module(f: &GradedForm, generator_bound: u64, sample_bound: u64) -> Result<HeckeModule> {
    let config = ModuleConfig { generator_bound, sample_bound, ..ModuleConfig::default() };
    let m = HeckeModule::build(f, &config)?;
    if m.conductor.is_none() {
        return Err(Error::ConductorNotFound(m.conductor_failure.clone().unwrap_or_default()));
    }
    Ok(m)
}

impl HeckeModule {
    /// Builds `Af` and samples the action. Never fails for want of a
    /// conductor; see [`HeckeModule::conductor`].
    pub fn build(f: &GradedForm, config: &ModuleConfig) -> Result<HeckeModule> {
        let coords = basis::to_coordinates(f)?;
        Self::from_coordinates(f.p(), f.weight(), coords, config)
    }

    pub fn from_coordinates(p: Prime, weight: u32, coords: Vec<u8>, config: &ModuleConfig) -> Result<HeckeModule> {
        Self::from_coordinates_with(p, weight, coords, config, Execution::default())
    }

    pub fn from_coordinates_with(
        p: Prime,
        weight: u32,
        coords: Vec<u8>,
        config: &ModuleConfig,
        exec: Execution,
    ) -> Result<HeckeModule> {
        if coords.iter().all(|&c| c == 0) {
            return Err(Error::ZeroForm);
        }
        if config.generator_bound < 2 || config.sample_bound < config.generator_bound {
            return Err(Error::InvalidArgument(
                "need 2 <= generator_bound <= sample_bound".into(),
            ));
        }
        let d = basis::dimension(weight);
        let prec = config.sample_bound as usize * d.saturating_sub(1) + 1 + config.slack;
        let wb = basis::miller_basis(p, weight, prec)?;
        if coords.len() != wb.dim() {
            return Err(Error::InvalidArgument("coordinate vector has the wrong length".into()));
        }

        let primes: Vec<u64> = arith::primes_up_to(config.sample_bound)
            .into_iter()
            .filter(|&l| l != p.as_u64())
            .collect();
        let ambient: Vec<(u64, u8, Matrix)> = par::map_items(exec, &primes, |&l| {
            let s = l_s_scalar(p, weight, l);
            (l, s, ambient_matrix(&wb, l, s))
        });

        // span closure: generator primes first, then everything sampled
        let mut span = Span::new(p, d);
        span.insert(&coords);
        let order: Vec<usize> = (0..ambient.len())
            .filter(|&i| ambient[i].0 <= config.generator_bound)
            .chain((0..ambient.len()).filter(|&i| ambient[i].0 > config.generator_bound))
            .collect();
        let mut frontier = vec![coords.clone()];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for v in &frontier {
                for &i in &order {
                    let w = ambient[i].2.mul_vec(v);
                    if span.insert(&w) {
                        if span.dim() > config.dim_cap {
                            return Err(Error::SpanNotClosed { cap: config.dim_cap });
                        }
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        let basis_vectors = span.basis().to_vec();
        let r = basis_vectors.len();

        let restrict = |m: &Matrix| -> Matrix {
            let cols: Vec<Vec<u8>> = basis_vectors
                .iter()
                .map(|v| span.coordinates(&m.mul_vec(v)).expect("span is closed"))
                .collect();
            Matrix::from_columns(p, &cols)
        };
        let restricted: Vec<Matrix> = par::map_items(exec, &ambient, |(_, _, m)| restrict(m));

        let mut operators: Vec<Operator> = Vec::new();
        let mut index: HashMap<(Matrix, u8), usize> = HashMap::new();
        let mut prime_ops = Vec::with_capacity(primes.len());
        for ((l, s, _), m) in ambient.iter().zip(restricted) {
            let key = (m, *s);
            let i = *index.entry(key.clone()).or_insert_with(|| {
                operators.push(Operator {
                    status: ClassStatus::of(&key.0),
                    matrix: key.0.clone(),
                    scalar: key.1,
                    primes: Vec::new(),
                });
                operators.len() - 1
            });
            operators[i].primes.push(*l);
            prime_ops.push((*l, i));
        }

        let a1_ambient = wb.functional(1.min(wb.prec() - 1));
        let a1 = basis_vectors
            .iter()
            .map(|v| dot(p, v, &a1_ambient))
            .collect();

        let mut module = HeckeModule {
            p,
            weight,
            ambient_dim: d,
            basis_vectors,
            a1,
            operators,
            prime_ops,
            conductor: None,
            nilpotent_conductor: None,
            status_conductor: None,
            conductor_failure: None,
            config: config.clone(),
        };
        debug_assert_eq!(module.dim(), r);
        module.detect_conductors();
        Ok(module)
    }

    fn detect_conductors(&mut self) {
        let p = self.p.as_u64();
        let mut failure = None;
        for e in 1..=self.config.max_conductor_exponent {
            let c = p.pow(e);
            if self.conductor.is_none() {
                match self.classes_mod(c, Resolution::Full) {
                    Ok(cd) => self.conductor = Some(cd),
                    Err(msg) => failure = Some(msg),
                }
            }
            if self.nilpotent_conductor.is_none() {
                self.nilpotent_conductor = self.classes_mod(c, Resolution::Nilpotent).ok();
            }
            if self.status_conductor.is_none() {
                self.status_conductor = self.classes_mod(c, Resolution::Status).ok();
            }
        }
        if self.conductor.is_none() {
            let tried: Vec<String> = (1..=self.config.max_conductor_exponent).map(|e| p.pow(e).to_string()).collect();
            self.conductor_failure = Some(format!(
                "no modulus in {{{}}} makes the sampled action class-constant ({})",
                tried.join(", "),
                failure.unwrap_or_default()
            ));
        }
    }

    /// Groups sampled primes by class mod `c`, failing if two primes in one
    /// class differ in what `res` asks to be determined.
    fn classes_mod(&self, c: u64, res: Resolution) -> std::result::Result<Conductor, String> {
        let mut seen: BTreeMap<u64, (u64, usize)> = BTreeMap::new();
        let mut classes: BTreeMap<u64, Option<usize>> = BTreeMap::new();
        let is_nil = |i: usize| self.operators[i].status == ClassStatus::Nilpotent;
        for &(l, i) in &self.prime_ops {
            let u = l % c;
            let Some(&(l0, i0)) = seen.get(&u) else {
                seen.insert(u, (l, i));
                classes.insert(u, Some(i));
                continue;
            };
            if i0 == i {
                continue;
            }
            let tolerated = match res {
                Resolution::Full => false,
                Resolution::Nilpotent => !is_nil(i) && !is_nil(i0),
                Resolution::Status => is_nil(i) == is_nil(i0),
            };
            if !tolerated {
                return Err(format!("ℓ = {l0} and ℓ = {l} are both {u} mod {c} but act differently"));
            }
            classes.insert(u, None);
        }
        let units = arith::units_mod(c);
        if let Some(u) = units.iter().find(|u| !classes.contains_key(u)) {
            return Err(format!("class {u} mod {c} has no sampled prime"));
        }
        let nilpotent = seen.iter().filter(|(_, &(_, i))| is_nil(i)).map(|(&u, _)| u).collect();
        match res {
            Resolution::Full => {}
            Resolution::Nilpotent => {
                for v in classes.values_mut() {
                    if v.is_some_and(|i| !is_nil(i)) {
                        *v = None;
                    }
                }
            }
            Resolution::Status => classes.values_mut().for_each(|v| *v = None),
        }
        Ok(Conductor { modulus: c, classes, nilpotent })
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis_vectors.len()
    }

    /// Module basis in ambient coordinates; the first vector is f.
    pub fn basis_vectors(&self) -> &[Vec<u8>] {
        &self.basis_vectors
    }

    /// Coordinates of f in the module basis.
    pub fn seed_vector(&self) -> Vec<u8> {
        let mut v = vec![0u8; self.dim()];
        v[0] = 1;
        v
    }

    pub fn config(&self) -> &ModuleConfig {
        &self.config
    }

    pub fn operators(&self) -> &[Operator] {
        &self.operators
    }

    pub fn sampled_primes(&self) -> impl Iterator<Item = (u64, usize)> + '_ {
        self.prime_ops.iter().copied()
    }

    pub fn operator_for_sampled_prime(&self, ell: u64) -> Option<usize> {
        self.prime_ops.iter().find(|&&(l, _)| l == ell).map(|&(_, i)| i)
    }

    pub fn conductor(&self) -> Option<&Conductor> {
        self.conductor.as_ref()
    }

    pub fn nilpotent_conductor(&self) -> Option<&Conductor> {
        self.nilpotent_conductor.as_ref()
    }

    /// Smallest `p^e` such that whether `T_ℓ` acts nilpotently depends
    /// only on `ℓ mod p^e`.
    pub fn status_conductor(&self) -> Option<&Conductor> {
        self.status_conductor.as_ref()
    }

    pub fn require_status_conductor(&self) -> Result<&Conductor> {
        self.status_conductor.as_ref().ok_or_else(|| {
            Error::ConductorNotFound("nilpotent primes are not cut out by a p-power congruence".into())
        })
    }

    pub fn conductor_failure(&self) -> Option<&str> {
        self.conductor_failure.as_deref()
    }

    pub fn require_conductor(&self) -> Result<&Conductor> {
        self.conductor
            .as_ref()
            .ok_or_else(|| Error::ConductorNotFound(self.conductor_failure.clone().unwrap_or_default()))
    }

    pub fn require_nilpotent_conductor(&self) -> Result<&Conductor> {
        self.nilpotent_conductor.as_ref().ok_or_else(|| {
            Error::ConductorNotFound("nilpotent action is not determined by a p-power congruence".into())
        })
    }

    /// `a_1` of a module vector.
    pub fn a1(&self, v: &[u8]) -> u8 {
        dot(self.p, v, &self.a1)
    }

    /// Ambient coordinates of a module vector.
    pub fn to_ambient(&self, v: &[u8]) -> Vec<u8> {
        let p = self.p;
        let mut out = vec![0u8; self.ambient_dim];
        for (&c, b) in v.iter().zip(&self.basis_vectors) {
            for (o, &x) in out.iter_mut().zip(b) {
                *o = p.add(*o, p.mul(c, x));
            }
        }
        out
    }

    /// q-expansion of a module vector to `prec` coefficients.
    pub fn series_of(&self, v: &[u8], prec: usize) -> Result<QSeries> {
        basis::from_coordinates(self.p, self.weight, &self.to_ambient(v), prec)
    }

    /// The action of `T_ℓ` on `Af` for any prime ℓ ≠ p, computed from
    /// q-expansions rather than from the stored classes.
    pub fn operator_for_prime(&self, ell: u64) -> Result<Matrix> {
        if ell == self.p.as_u64() || !arith::is_prime(ell) {
            return Err(Error::InvalidOperator(format!("T_{ell} on Af needs a prime ℓ ≠ p")));
        }
        let prec = ell as usize * self.ambient_dim.saturating_sub(1) + 1 + self.config.slack;
        let wb = basis::miller_basis(self.p, self.weight, prec)?;
        let s = l_s_scalar(self.p, self.weight, ell);
        let m = ambient_matrix(&wb, ell, s);
        let mut span = Span::new(self.p, self.ambient_dim);
        for v in &self.basis_vectors {
            span.insert(v);
        }
        let cols = self
            .basis_vectors
            .iter()
            .map(|v| {
                span.coordinates(&m.mul_vec(v))
                    .ok_or_else(|| Error::Inconsistent(format!("T_{ell} leaves the module")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_columns(self.p, &cols))
    }

    /// `T_{ℓ^e}` for an operator, by the recurrence; index 0 is the identity.
    pub fn prime_power_matrices(&self, op: usize, e_max: u32) -> Vec<Matrix> {
        let o = &self.operators[op];
        let r = self.dim();
        let mut out = vec![Matrix::identity(self.p, r)];
        if e_max >= 1 {
            out.push(o.matrix.clone());
        }
        for e in 2..=e_max as usize {
            let next = o.matrix.mul(&out[e - 1]).sub(&out[e - 2].scale(o.scalar));
            out.push(next);
        }
        out
    }

    pub fn is_pure(&self) -> bool {
        self.operators.iter().all(|o| o.status != ClassStatus::Mixed)
    }

    pub fn classify_classes(&self) -> ClassReport {
        let pure = self.is_pure();
        let cd = self.conductor.as_ref().or(self.nilpotent_conductor.as_ref()).or(self.status_conductor.as_ref());
        let Some(cd) = cd else {
            return ClassReport { modulus: None, entries: Vec::new(), unit_classes: Vec::new(), nilpotent_classes: Vec::new(), pure };
        };
        let mut entries = Vec::new();
        for (&u, &op) in &cd.classes {
            let entry = match op {
                Some(i) => {
                    let o = &self.operators[i];
                    ClassEntry { class: u, matrix: Some(o.matrix.clone()), scalar: o.scalar, status: o.status }
                }
                None => {
                    // not congruence-determined; summarize over its primes
                    let ops: BTreeSet<usize> = self
                        .prime_ops
                        .iter()
                        .filter(|&&(l, _)| l % cd.modulus == u)
                        .map(|&(_, i)| i)
                        .collect();
                    let all_inv = ops.iter().all(|&i| self.operators[i].status == ClassStatus::Invertible);
                    let first = *ops.iter().next().expect("class has a sampled prime");
                    ClassEntry {
                        class: u,
                        matrix: None,
                        scalar: self.operators[first].scalar,
                        status: if cd.nilpotent.contains(&u) {
                            ClassStatus::Nilpotent
                        } else if all_inv {
                            ClassStatus::Invertible
                        } else {
                            ClassStatus::Mixed
                        },
                    }
                }
            };
            entries.push(entry);
        }
        let nilpotent_classes = entries.iter().filter(|e| e.status == ClassStatus::Nilpotent).map(|e| e.class).collect();
        let unit_classes = entries.iter().filter(|e| e.status == ClassStatus::Invertible).map(|e| e.class).collect();
        ClassReport { modulus: Some(cd.modulus), entries, unit_classes, nilpotent_classes, pure }
    }

    pub fn nilpotent_operators(&self) -> Vec<usize> {
        (0..self.operators.len()).filter(|&i| self.operators[i].status == ClassStatus::Nilpotent).collect()
    }

    pub fn invertible_operators(&self) -> Vec<usize> {
        (0..self.operators.len()).filter(|&i| self.operators[i].status == ClassStatus::Invertible).collect()
    }

    /// `h(f)`: the longest nonzero product of nilpotent operators applied
    /// to f, found by breadth-first search over subspaces.
    pub fn strict_nilpotence_order(&self) -> Result<usize> {
        if !self.is_pure() {
            return Err(Error::NotPure);
        }
        let nil = self.nilpotent_operators();
        let mut level = vec![self.seed_vector()];
        let mut h = 0;
        loop {
            let mut span = Span::new(self.p, self.dim());
            for v in &level {
                for &i in &nil {
                    span.insert(&self.operators[i].matrix.mul_vec(v));
                }
            }
            if span.dim() == 0 {
                return Ok(h);
            }
            h += 1;
            if h > self.dim() {
                return Err(Error::Inconsistent("nilpotent chain longer than the module".into()));
            }
            level = span.basis().to_vec();
        }
    }

    /// `h(f)` distinct sampled primes with `T_{ℓ_1} ... T_{ℓ_h} f ≠ 0`.
    pub fn distinct_prime_witness(&self) -> Result<Vec<u64>> {
        let h = self.strict_nilpotence_order()?;
        let nil = self.nilpotent_operators();
        let mut chain = Vec::new();
        let mut dead: BTreeSet<(Vec<u8>, usize)> = BTreeSet::new();
        if !self.chain_search(&self.seed_vector(), h, &nil, &mut chain, &mut dead) {
            return Err(Error::Inconsistent("no nilpotent chain of length h".into()));
        }
        let mut used = BTreeSet::new();
        let mut primes = Vec::new();
        for &i in &chain {
            let l = self.operators[i]
                .primes
                .iter()
                .copied()
                .find(|l| !used.contains(l))
                .ok_or_else(|| Error::Inconsistent("not enough sampled primes in a class".into()))?;
            used.insert(l);
            primes.push(l);
        }
        Ok(primes)
    }

    fn chain_search(
        &self,
        v: &[u8],
        depth: usize,
        nil: &[usize],
        chain: &mut Vec<usize>,
        dead: &mut BTreeSet<(Vec<u8>, usize)>,
    ) -> bool {
        if v.iter().all(|&x| x == 0) {
            return false;
        }
        if depth == 0 {
            return true;
        }
        if dead.contains(&(v.to_vec(), depth)) {
            return false;
        }
        for &i in nil {
            let w = self.operators[i].matrix.mul_vec(v);
            chain.push(i);
            if self.chain_search(&w, depth - 1, nil, chain, dead) {
                return true;
            }
            chain.pop();
        }
        dead.insert((v.to_vec(), depth));
        false
    }

    /// Multiplicative closure of the invertible operators.
    pub fn gamma_group(&self) -> Result<GammaGroup> {
        let r = self.dim();
        let gens: Vec<&Matrix> = self.invertible_operators().into_iter().map(|i| &self.operators[i].matrix).collect();
        let id = Matrix::identity(self.p, r);
        let mut set: BTreeSet<Matrix> = BTreeSet::from([id.clone()]);
        let mut frontier = vec![id];
        while let Some(m) = frontier.pop() {
            for g in &gens {
                let x = m.mul(g);
                if set.insert(x.clone()) {
                    if set.len() > self.config.group_cap {
                        return Err(Error::GroupTooLarge { cap: self.config.group_cap });
                    }
                    frontier.push(x);
                }
            }
        }
        let scalars: Vec<u8> = (1..self.p.get()).filter(|&c| set.contains(&Matrix::scalar(self.p, r, c))).collect();
        Ok(GammaGroup {
            contains_scalars: scalars.len() == self.p.get() as usize - 1,
            elements: set.into_iter().collect(),
            scalars,
        })
    }

    pub fn equidistribution_report(&self) -> Result<EquidistributionReport> {
        let g = self.gamma_group()?;
        let primitive_root_shortcut = arith::is_primitive_root(2, self.p.as_u64());
        let criterion_holds = g.contains_scalars;
        let eigenform_converse_applies = self.dim() == 1 && !g.contains_scalars;
        let verdict = if criterion_holds || primitive_root_shortcut {
            EquidistributionVerdict::Equidistributed
        } else if eigenform_converse_applies {
            EquidistributionVerdict::NotEquidistributed
        } else {
            EquidistributionVerdict::Undetermined
        };
        Ok(EquidistributionReport {
            criterion_holds,
            eigenform_converse_applies,
            primitive_root_shortcut,
            gamma_order: g.order(),
            scalar_values: g.scalars,
            verdict,
        })
    }

    /// Splits f into joint generalized eigencomponents of the operators and
    /// groups those with the same nilpotent operators into pure summands.
    pub fn pure_decomposition(&self) -> Result<Vec<PureComponent>> {
        let r = self.dim();
        let mats: Vec<&Matrix> = self.operators.iter().map(|o| &o.matrix).collect();
        let whole: Vec<Vec<u8>> = (0..r).map(|i| unit(r, i)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let mut spaces = None;
        for _ in 0..8 {
            let mut mix = Matrix::zeros(self.p, r, r);
            for m in &mats {
                mix = mix.add(&m.scale(rng.random_range(0..self.p.get())));
            }
            let parts = split_space(self.p, &whole, &mix)?;
            if parts.iter().all(|s| mats.iter().all(|m| single_eigenvalue(self.p, s, m).is_some())) {
                spaces = Some(parts);
                break;
            }
        }
        let spaces = match spaces {
            Some(s) => s,
            None => {
                // refine one operator at a time
                let mut parts = vec![whole.clone()];
                for m in &mats {
                    let mut next = Vec::new();
                    for s in &parts {
                        next.extend(split_space(self.p, s, m)?);
                    }
                    parts = next;
                }
                parts
            }
        };

        // write f = e_0 as a sum over the spaces
        let mut all = Span::new(self.p, r);
        let mut owner = Vec::new();
        for (k, s) in spaces.iter().enumerate() {
            for v in s {
                all.insert(v);
                owner.push(k);
            }
        }
        let c = all.coordinates(&self.seed_vector()).expect("spaces span the module");
        let mut groups: BTreeMap<Vec<usize>, Vec<u8>> = BTreeMap::new();
        for (k, s) in spaces.iter().enumerate() {
            let mut part = vec![0u8; r];
            for (j, v) in s.iter().enumerate() {
                let idx = owner.iter().enumerate().filter(|(_, &o)| o == k).nth(j).unwrap().0;
                for (x, &y) in part.iter_mut().zip(v) {
                    *x = self.p.add(*x, self.p.mul(c[idx], y));
                }
            }
            if part.iter().all(|&x| x == 0) {
                continue;
            }
            let nilpotent_ops: Vec<usize> = mats
                .iter()
                .enumerate()
                .filter(|(_, m)| single_eigenvalue(self.p, s, m) == Some(0))
                .map(|(i, _)| i)
                .collect();
            let entry = groups.entry(nilpotent_ops).or_insert_with(|| vec![0u8; r]);
            for (x, &y) in entry.iter_mut().zip(&part) {
                *x = self.p.add(*x, y);
            }
        }
        Ok(groups
            .into_iter()
            .map(|(nilpotent_ops, af_vector)| PureComponent {
                coords: self.to_ambient(&af_vector),
                af_vector,
                nilpotent_ops,
            })
            .collect())
    }

    /// Module of a component, with the same configuration.
    pub fn component_module(&self, c: &PureComponent) -> Result<HeckeModule> {
        HeckeModule::from_coordinates(self.p, self.weight, c.coords.clone(), &self.config)
    }
}

fn unit(n: usize, i: usize) -> Vec<u8> {
    let mut v = vec![0u8; n];
    v[i] = 1;
    v
}

fn dot(p: Prime, a: &[u8], b: &[u8]) -> u8 {
    let q = p.get() as u32;
    (a.iter().zip(b).map(|(&x, &y)| x as u32 * y as u32 % q).sum::<u32>() % q) as u8
}

/// Matrix of `m` restricted to the invariant subspace spanned by `space`.
fn restrict(p: Prime, space: &[Vec<u8>], m: &Matrix) -> Matrix {
    let mut span = Span::new(p, m.rows());
    for v in space {
        span.insert(v);
    }
    let cols: Vec<Vec<u8>> = space
        .iter()
        .map(|v| span.coordinates(&m.mul_vec(v)).expect("subspace is invariant"))
        .collect();
    Matrix::from_columns(p, &cols)
}

/// The eigenvalue of `m` on `space` when it has only one.
fn single_eigenvalue(p: Prime, space: &[Vec<u8>], m: &Matrix) -> Option<u8> {
    let chi = restrict(p, space, m).char_poly();
    let (roots, rest) = linalg::poly_roots(p, &chi);
    (rest == 0 && roots.len() == 1).then(|| roots[0].0)
}

/// Generalized eigenspaces of `m` inside the invariant subspace `space`,
/// returned in ambient coordinates.
fn split_space(p: Prime, space: &[Vec<u8>], m: &Matrix) -> Result<Vec<Vec<Vec<u8>>>> {
    let local = restrict(p, space, m);
    let (roots, rest) = linalg::poly_roots(p, &local.char_poly());
    if rest > 0 {
        return Err(Error::SplittingFieldNeeded { degree: rest });
    }
    let n = local.rows();
    let mut out = Vec::new();
    for (lambda, mult) in roots {
        let shifted = local.sub(&Matrix::scalar(p, n, lambda)).pow(mult as u64);
        let ker = shifted.kernel();
        debug_assert_eq!(ker.len(), mult);
        let ambient: Vec<Vec<u8>> = ker
            .iter()
            .map(|k| {
                let mut v = vec![0u8; m.rows()];
                for (&c, b) in k.iter().zip(space) {
                    for (x, &y) in v.iter_mut().zip(b) {
                        *x = p.add(*x, p.mul(c, y));
                    }
                }
                v
            })
            .collect();
        out.push(ambient);
    }
    Ok(out)
}

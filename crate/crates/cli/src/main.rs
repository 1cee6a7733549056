use std::collections::BTreeMap;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lacunary::constants::{self, AsymptoticProfile, ConstantsConfig, SquarefreeOutcome};
use lacunary::counting::{self, CountReport, DecompositionOracle};
use lacunary::density::{self, GroupDescriptor, Rational};
use lacunary::euler;
use lacunary::expr::FormExpr;
use lacunary::hecke::{self, HeckeOpSpec};
use lacunary::hecke_module::HeckeModule;
use lacunary::{Error, Execution, GradedForm, ModuleConfig, Prime};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "lacunary", version, about = "Lacunarity invariants of modular forms mod p")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Opts {
    /// Odd prime below 256.
    #[arg(long, global = true, default_value_t = 3)]
    p: u64,
    /// Form expression over delta, E4, E6 and integers.
    #[arg(long, global = true, default_value = "delta")]
    form: String,
    #[arg(long, global = true, default_value_t = 300)]
    prec: usize,
    #[arg(long, global = true, default_value_t = 10_000)]
    xmax: u64,
    /// Comma-separated x values.
    #[arg(long, global = true, value_delimiter = ',', default_values_t = counting::DEFAULT_CHECKPOINTS)]
    checkpoints: Vec<u64>,
    #[arg(long, global = true, default_value_t = 50)]
    gen_bound: u64,
    #[arg(long, global = true, default_value_t = 2000)]
    sample_bound: u64,
    #[arg(long, global = true, default_value_t = euler::DEFAULT_PRIME_BOUND)]
    prime_bound: u64,
    #[arg(long, global = true, default_value_t = constants::DEFAULT_SFULL_BOUND)]
    sfull_bound: u64,
    /// Use the square-free variant.
    #[arg(long, global = true)]
    squarefree: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    out: Format,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker thread cap.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// q-expansion of the form.
    Expand,
    /// Apply T<m>, U<m>, V<m>, S<l> or W.
    Hecke {
        #[arg(long)]
        op: String,
    },
    /// Hecke module, conductor and class table.
    Module,
    /// Pure decomposition.
    Decompose,
    /// α, h, c and predicted counts at the checkpoints.
    Predict,
    /// Empirical counts at the checkpoints.
    Count,
    /// Empirical counts against the prediction.
    Compare,
    /// Check the decomposition oracle against the coefficients up to --xmax.
    Oracle,
    /// α of a projective image such as PSL2:5, A4 or dihedral:3.
    AlphaGroup {
        #[arg(long)]
        group: String,
    },
    /// Euler constants: per component of --form, or C(U) for explicit classes.
    Constants {
        /// Residues mod --modulus making up U.
        #[arg(long, value_delimiter = ',')]
        classes: Option<Vec<u64>>,
        #[arg(long)]
        modulus: Option<u64>,
        /// β = 1 - α as a fraction.
        #[arg(long, default_value = "1/2")]
        beta: String,
        #[arg(long, default_value_t = 1)]
        r: u64,
    },
}

enum Failure {
    Input(String),
    Math(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_mathematical() { Failure::Math(e.to_string()) } else { Failure::Input(e.to_string()) }
    }
}

type Out = std::result::Result<String, Failure>;

/// Rounds to 12 significant digits so that output is stable across
/// platforms.
fn r12(x: f64) -> f64 {
    if x.is_finite() { format!("{x:.11e}").parse().unwrap_or(x) } else { x }
}

fn json<T: Serialize>(v: &T) -> Out {
    serde_json::to_string_pretty(v).map_err(|e| Failure::Input(e.to_string()))
}

struct Ctx {
    opts: Opts,
    p: Prime,
}

impl Ctx {
    fn expr(&self) -> std::result::Result<FormExpr, Failure> {
        Ok(self.opts.form.parse::<FormExpr>()?)
    }

    fn form(&self, prec: usize) -> std::result::Result<GradedForm, Failure> {
        Ok(lacunary::expr::evaluate(&self.expr()?, self.p, prec)?)
    }

    fn module_config(&self) -> ModuleConfig {
        ModuleConfig {
            generator_bound: self.opts.gen_bound,
            sample_bound: self.opts.sample_bound,
            seed: self.opts.seed,
            ..ModuleConfig::default()
        }
    }

    fn constants_config(&self) -> ConstantsConfig {
        ConstantsConfig {
            module: self.module_config(),
            prime_bound: self.opts.prime_bound,
            sfull_bound: self.opts.sfull_bound,
            exec: Execution::default(),
        }
    }

    fn module(&self) -> std::result::Result<HeckeModule, Failure> {
        Ok(HeckeModule::build(&self.form(self.opts.prec)?, &self.module_config())?)
    }

    fn profile(&self) -> std::result::Result<Option<AsymptoticProfile>, Failure> {
        let f = self.form(self.opts.prec)?;
        let cfg = self.constants_config();
        if self.opts.squarefree {
            match constants::leading_constants_sf(&f, &cfg) {
                Ok(SquarefreeOutcome::Profile(p)) => Ok(Some(p)),
                Ok(SquarefreeOutcome::Degenerate) | Err(Error::ZeroForm) => Ok(None),
                Err(e) => Err(e.into()),
            }
        } else {
            match constants::leading_constants(&f, &cfg) {
                Ok(p) => Ok(Some(p)),
                Err(Error::ZeroForm) => Ok(None),
                Err(e) => Err(e.into()),
            }
        }
    }

    fn counts(&self) -> std::result::Result<CountReport, Failure> {
        let mut cps = self.opts.checkpoints.clone();
        cps.sort_unstable();
        cps.dedup();
        let x = *cps.last().ok_or_else(|| Failure::Input("no checkpoints".into()))? as usize;
        let table = counting::coefficient_table(&self.opts.form, self.p, x, counting::DEFAULT_TABLE_CAP)?;
        Ok(counting::count(&table, &cps, Execution::default())?)
    }
}

#[derive(Serialize)]
struct Expansion {
    p: u8,
    form: String,
    weight: u32,
    prec: usize,
    coeffs: Vec<u8>,
}

fn expansion_out(ctx: &Ctx, form: String, f: &GradedForm) -> Out {
    let coeffs = f.series().coeffs().to_vec();
    if ctx.opts.out == Format::Csv {
        let mut s = String::from("n,a_n\n");
        for (n, a) in coeffs.iter().enumerate() {
            s.push_str(&format!("{n},{a}\n"));
        }
        return Ok(s);
    }
    json(&Expansion { p: ctx.p.get(), form, weight: f.weight(), prec: f.prec(), coeffs })
}

#[derive(Serialize)]
struct ClassRow {
    class: u64,
    status: &'static str,
    scalar: u8,
    matrix: Option<Vec<Vec<u8>>>,
}

#[derive(Serialize)]
struct ModuleOut {
    p: u8,
    form: String,
    weight: u32,
    ambient_dim: usize,
    dim: usize,
    operators: usize,
    conductor: Option<u64>,
    nilpotent_conductor: Option<u64>,
    status_conductor: Option<u64>,
    conductor_note: Option<String>,
    pure: bool,
    h: Option<usize>,
    alpha: Option<String>,
    nilpotent_classes: Vec<u64>,
    unit_classes: Vec<u64>,
    classes: Vec<ClassRow>,
}

fn module_cmd(ctx: &Ctx) -> Out {
    let m = ctx.module()?;
    let report = m.classify_classes();
    let pure = m.is_pure();
    let h = if pure { Some(m.strict_nilpotence_order()?) } else { None };
    let alpha = match density::alpha_of_form(&m) {
        Ok(a) => Some(a.to_string()),
        Err(e) if e.is_mathematical() => None,
        Err(e) => return Err(e.into()),
    };
    json(&ModuleOut {
        p: ctx.p.get(),
        form: ctx.expr()?.to_string(),
        weight: m.weight(),
        ambient_dim: m.ambient_dim(),
        dim: m.dim(),
        operators: m.operators().len(),
        conductor: m.conductor().map(|c| c.modulus),
        nilpotent_conductor: m.nilpotent_conductor().map(|c| c.modulus),
        status_conductor: m.status_conductor().map(|c| c.modulus),
        conductor_note: m.conductor_failure().map(str::to_string),
        pure,
        h,
        alpha,
        nilpotent_classes: report.nilpotent_classes,
        unit_classes: report.unit_classes,
        classes: report
            .entries
            .into_iter()
            .map(|e| ClassRow { class: e.class, status: e.status.name(), scalar: e.scalar, matrix: e.matrix.map(|m| m.to_rows()) })
            .collect(),
    })
}

#[derive(Serialize)]
struct ComponentOut {
    coords: Vec<u8>,
    expansion: Vec<u8>,
    dim: usize,
    alpha: String,
    h: usize,
    nilpotent_classes: Vec<u64>,
}

#[derive(Serialize)]
struct DecomposeOut {
    p: u8,
    form: String,
    pure: bool,
    alpha: String,
    components: Vec<ComponentOut>,
}

fn decompose_cmd(ctx: &Ctx) -> Out {
    let m = ctx.module()?;
    let mut components = Vec::new();
    for c in m.pure_decomposition()? {
        let sub = m.component_module(&c)?;
        let nil = sub.require_status_conductor()?.nilpotent.iter().copied().collect();
        components.push(ComponentOut {
            expansion: m.series_of(&c.af_vector, 20.min(ctx.opts.prec))?.coeffs().to_vec(),
            coords: c.coords,
            dim: sub.dim(),
            alpha: density::alpha_of_pure_module(&sub)?.to_string(),
            h: sub.strict_nilpotence_order()?,
            nilpotent_classes: nil,
        });
    }
    json(&DecomposeOut {
        p: ctx.p.get(),
        form: ctx.expr()?.to_string(),
        pure: m.is_pure(),
        alpha: density::alpha_of_form(&m)?.to_string(),
        components,
    })
}

#[derive(Serialize)]
struct ValueOut {
    a: u8,
    h: usize,
    c: f64,
    err: f64,
}

#[derive(Serialize)]
struct PredictionOut {
    x: u64,
    value: f64,
    err: f64,
}

#[derive(Serialize)]
struct ProfileComponent {
    shift: u32,
    b_weight: f64,
    weight: u32,
    dim: usize,
    alpha: String,
    h: usize,
    c: f64,
    c_err: f64,
    c_u: f64,
    c_u_tail: f64,
    conductor: Option<u64>,
}

#[derive(Serialize)]
struct PredictOut {
    p: u8,
    form: String,
    squarefree: bool,
    verdict: &'static str,
    alpha: Option<String>,
    h: Option<usize>,
    c: Option<f64>,
    c_err: Option<f64>,
    per_value: Vec<ValueOut>,
    components: Vec<ProfileComponent>,
    predictions: Vec<PredictionOut>,
}

fn predict_out(ctx: &Ctx, profile: Option<&AsymptoticProfile>, with_components: bool) -> Out {
    let verdict = match (profile, ctx.opts.squarefree) {
        (Some(_), _) => "profile",
        (None, true) => "degenerate",
        (None, false) => "zero",
    };
    let mut out = PredictOut {
        p: ctx.p.get(),
        form: ctx.expr()?.to_string(),
        squarefree: ctx.opts.squarefree,
        verdict,
        alpha: None,
        h: None,
        c: None,
        c_err: None,
        per_value: Vec::new(),
        components: Vec::new(),
        predictions: Vec::new(),
    };
    if let Some(pr) = profile {
        let xs: Vec<f64> = ctx.opts.checkpoints.iter().map(|&x| x as f64).collect();
        out.alpha = Some(pr.alpha.to_string());
        out.h = Some(pr.h);
        out.c = Some(r12(pr.c));
        out.c_err = Some(r12(pr.c_err));
        out.per_value = pr.per_value.iter().map(|(&a, v)| ValueOut { a, h: v.h, c: r12(v.c), err: r12(v.err) }).collect();
        out.predictions = constants::predict(pr, &xs)?
            .into_iter()
            .map(|q| PredictionOut { x: q.x as u64, value: r12(q.value), err: r12(q.err) })
            .collect();
        if with_components {
            out.components = pr
                .components
                .iter()
                .map(|c| ProfileComponent {
                    shift: c.shift,
                    b_weight: r12(c.b_weight),
                    weight: c.weight,
                    dim: c.dim,
                    alpha: c.alpha.to_string(),
                    h: c.h,
                    c: r12(c.c),
                    c_err: r12(c.c_err),
                    c_u: r12(c.c_u.value),
                    c_u_tail: r12(c.c_u.tail),
                    conductor: c.conductor,
                })
                .collect();
        }
    }
    json(&out)
}

#[derive(Serialize)]
struct CountRowOut {
    x: u64,
    pi: u64,
    pi_sf: u64,
    per_value: BTreeMap<u8, u64>,
    per_value_sf: BTreeMap<u8, u64>,
}

fn count_cmd(ctx: &Ctx) -> Out {
    let r = ctx.counts()?;
    let values: Vec<u8> = (1..ctx.p.get()).collect();
    if ctx.opts.out == Format::Csv {
        let mut s = String::from("x,pi,pi_sf");
        for a in &values {
            s.push_str(&format!(",a={a}"));
        }
        s.push('\n');
        for row in &r.rows {
            s.push_str(&format!("{},{},{}", row.x, row.pi, row.pi_sf));
            for a in &values {
                s.push_str(&format!(",{}", row.per_value.get(a).unwrap_or(&0)));
            }
            s.push('\n');
        }
        return Ok(s);
    }
    let rows: Vec<CountRowOut> = r
        .rows
        .into_iter()
        .map(|row| CountRowOut { x: row.x, pi: row.pi, pi_sf: row.pi_sf, per_value: row.per_value, per_value_sf: row.per_value_sf })
        .collect();
    json(&rows)
}

#[derive(Serialize)]
struct CompareValue {
    a: u8,
    count: u64,
    predicted: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct CompareRowOut {
    x: u64,
    pi: u64,
    pi_sf: u64,
    predicted: f64,
    ratio: f64,
    per_value: Vec<CompareValue>,
}

fn compare_cmd(ctx: &Ctx) -> Out {
    let report = ctx.counts()?;
    let profile = ctx.profile()?;
    let rows = counting::compare_report(&report, profile.as_ref(), ctx.opts.squarefree);
    if ctx.opts.out == Format::Csv {
        let values: Vec<u8> = (1..ctx.p.get()).collect();
        let mut s = String::from("x,pi,pi_sf,predicted,ratio");
        for a in &values {
            s.push_str(&format!(",a={a}"));
        }
        s.push('\n');
        for row in &rows {
            s.push_str(&format!("{},{},{},{},{}", row.x, row.pi, row.pi_sf, r12(row.predicted), r12(row.ratio)));
            for a in &values {
                let count = row.per_value.iter().find(|v| v.0 == *a).map_or(0, |v| v.1);
                s.push_str(&format!(",{count}"));
            }
            s.push('\n');
        }
        return Ok(s);
    }
    let out: Vec<CompareRowOut> = rows
        .into_iter()
        .map(|row| CompareRowOut {
            x: row.x,
            pi: row.pi,
            pi_sf: row.pi_sf,
            predicted: r12(row.predicted),
            ratio: r12(row.ratio),
            per_value: row
                .per_value
                .into_iter()
                .map(|(a, count, predicted, ratio)| CompareValue { a, count, predicted: r12(predicted), ratio: r12(ratio) })
                .collect(),
        })
        .collect();
    json(&out)
}

#[derive(Serialize)]
struct OracleOut {
    p: u8,
    form: String,
    xmax: u64,
    checked: u64,
    matched: u64,
    mismatches: Vec<(u64, u8, u8)>,
    summary: String,
}

fn oracle_cmd(ctx: &Ctx) -> Out {
    let x = ctx.opts.xmax;
    if x > 100_000 {
        return Err(Failure::Input(format!("--xmax {x} exceeds the oracle cap 100000")));
    }
    let f = ctx.form(ctx.opts.prec.max(300))?;
    let o = DecompositionOracle::new(&f, x, &ctx.module_config())?;
    let table = counting::coefficient_table(&ctx.opts.form, ctx.p, x as usize + 1, counting::DEFAULT_TABLE_CAP)?;
    let r = o.verify(table.coeffs(), false, Execution::default())?;
    if ctx.opts.out == Format::Csv {
        let mut s = String::from("n,predicted,actual\n");
        for (n, a, b) in &r.mismatches {
            s.push_str(&format!("{n},{a},{b}\n"));
        }
        return Ok(s);
    }
    json(&OracleOut {
        p: ctx.p.get(),
        form: ctx.expr()?.to_string(),
        xmax: x,
        checked: r.checked,
        matched: r.matched,
        summary: r.summary(),
        mismatches: r.mismatches,
    })
}

#[derive(Serialize)]
struct AlphaGroupOut {
    group: String,
    alpha: String,
    alpha_float: f64,
}

#[derive(Serialize)]
struct EulerOut {
    classes: Vec<u64>,
    modulus: u64,
    beta: String,
    r: u64,
    prime_bound: u64,
    value: f64,
    tail: f64,
}

fn parse_fraction(s: &str) -> std::result::Result<Rational, Failure> {
    let bad = || Failure::Input(format!("'{s}' is not a fraction n/d"));
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: i64 = n.trim().parse().map_err(|_| bad())?;
    let d: i64 = d.trim().parse().map_err(|_| bad())?;
    if d == 0 {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

fn run(cli: Cli) -> Out {
    let p = Prime::new(cli.opts.p)?;
    let ctx = Ctx { opts: cli.opts, p };
    match cli.cmd {
        Cmd::Expand => {
            let f = ctx.form(ctx.opts.prec)?;
            expansion_out(&ctx, ctx.expr()?.to_string(), &f)
        }
        Cmd::Hecke { op } => {
            let spec: HeckeOpSpec = op.parse()?;
            let f = ctx.form(ctx.opts.prec)?;
            let g = hecke::apply(&f, spec)?;
            expansion_out(&ctx, format!("{spec}({})", ctx.expr()?), &g)
        }
        Cmd::Module => module_cmd(&ctx),
        Cmd::Decompose => decompose_cmd(&ctx),
        Cmd::Predict => predict_out(&ctx, ctx.profile()?.as_ref(), false),
        Cmd::Count => count_cmd(&ctx),
        Cmd::Compare => compare_cmd(&ctx),
        Cmd::Oracle => oracle_cmd(&ctx),
        Cmd::AlphaGroup { group } => {
            let g: GroupDescriptor = group.parse()?;
            let a = density::alpha_of_group(g)?;
            json(&AlphaGroupOut { group: g.to_string(), alpha_float: r12(a.to_f64()), alpha: a.to_string() })
        }
        Cmd::Constants { classes, modulus, beta, r } => match (classes, modulus) {
            (Some(classes), Some(modulus)) => {
                let b = parse_fraction(&beta)?;
                let c = euler::euler_constant(&classes, modulus, &b, r, ctx.opts.prime_bound)?;
                json(&EulerOut {
                    classes,
                    modulus,
                    beta: b.to_string(),
                    r,
                    prime_bound: c.prime_bound,
                    value: r12(c.value),
                    tail: r12(c.tail),
                })
            }
            (None, None) => predict_out(&ctx, ctx.profile()?.as_ref(), true),
            _ => Err(Failure::Input("--classes and --modulus go together".into())),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.opts.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(mut s) => {
            if !s.ends_with('\n') {
                s.push('\n');
            }
            // a closed pipe downstream is not an error of ours
            let _ = std::io::stdout().lock().write_all(s.as_bytes());
            ExitCode::SUCCESS
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Math(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}

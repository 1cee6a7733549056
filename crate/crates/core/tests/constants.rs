use lacunary::constants::{self, ConstantsConfig, SquarefreeOutcome};
use lacunary::density::Rational;
use lacunary::euler;
use lacunary::hecke::HeckeOpSpec;
use lacunary::series;
use lacunary::{Execution, GradedForm, HeckeModule, ModuleConfig, Prime};

fn prime(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

fn delta(p: u64, k: u64) -> GradedForm {
    GradedForm::new(series::delta_power(prime(p), k, 300), 12 * k as u32).unwrap()
}

/// Plain sieve, kept separate from the library's.
fn primes(n: usize) -> Vec<u64> {
    let mut comp = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !comp[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                comp[j] = true;
                j += i;
            }
        }
    }
    out
}

/// `C(U)` for U = {ℓ = 1 mod 3} via `3^{1/4}/(π√2) ∏ (1 - ℓ^{-2})^{1/2}`.
fn c_u_closed_form(bound: usize) -> f64 {
    let prod: f64 = primes(bound).iter().filter(|&&l| l % 3 == 1).map(|&l| (1.0 - 1.0 / (l * l) as f64).sqrt()).product();
    3f64.powf(0.25) / (std::f64::consts::PI * 2f64.sqrt()) * prod
}

/// `∏_{ℓ=1 (3)} (1 - ℓ^{-3})^{-1} ∏_{ℓ=2 (3)} (1 - ℓ^{-2})^{-1}`.
fn square_full_factor(bound: usize) -> f64 {
    primes(bound)
        .iter()
        .filter(|&&l| l != 3)
        .map(|&l| {
            let e = if l % 3 == 1 { 3 } else { 2 };
            1.0 / (1.0 - (l as f64).powi(-e))
        })
        .product()
}

fn sf_profile(f: &GradedForm) -> constants::AsymptoticProfile {
    match constants::leading_constants_sf(f, &ConstantsConfig::default()).unwrap() {
        SquarefreeOutcome::Profile(p) => p,
        SquarefreeOutcome::Degenerate => panic!("degenerate"),
    }
}

#[test]
fn euler_constant_mod_3() {
    let c = euler::euler_constant(&[1], 3, &Rational::new(1, 2), 1, 1_000_000).unwrap();
    assert!((c.value - 0.2913).abs() < 5e-4, "{}", c.value);
    assert!(c.tail < 5e-4);
    let closed = c_u_closed_form(2_000_000);
    // the truncated product converges slowly; the gap must sit inside the
    // reported tail
    assert!((c.value - closed).abs() <= c.tail, "{} vs {closed}, tail {}", c.value, c.tail);
    // doubling the bound stays inside the reported tail
    let d = euler::euler_constant(&[1], 3, &Rational::new(1, 2), 1, 2_000_000).unwrap();
    assert!((d.value - c.value).abs() <= c.tail);
    let seq = euler::euler_constant_with(&[1], 3, &Rational::new(1, 2), 1, 1_000_000, Execution::Sequential).unwrap();
    assert!((seq.value - c.value).abs() < 1e-12);
}

#[test]
fn squarefree_constants_mod_3() {
    let cu = c_u_closed_form(2_000_000);
    for (k, h) in [(1u64, 0usize), (2, 1), (4, 2), (5, 3), (7, 4), (10, 4)] {
        let pr = sf_profile(&delta(3, k));
        assert_eq!(pr.alpha, Rational::new(1, 2), "k = {k}");
        assert_eq!(pr.h, h, "k = {k}");
        let fact: f64 = (1..=h).map(|i| i as f64).product();
        let want = cu / (fact * 3f64.powi(h as i32));
        assert!((pr.c - want).abs() < 1e-4 * want.max(1e-3), "k = {k}: {} vs {want}", pr.c);
        assert!(pr.c_err < 5e-4);
    }
}

#[test]
fn squarefree_constant_mod_7() {
    let pr = sf_profile(&delta(7, 2));
    assert_eq!(pr.alpha, Rational::new(1, 6));
    assert_eq!(pr.h, 0);
    assert!((pr.c - 0.5976).abs() < 5e-4, "{}", pr.c);
    assert!(pr.c_err < 5e-4);
    // only the α = 1/6 part survives in the leading term
    let u = euler::euler_constant(&[1, 2, 3, 4, 5], 7, &Rational::new(5, 6), 1, 1_000_000).unwrap();
    assert!((pr.c - u.value).abs() < 1e-9);
}

#[test]
fn square_full_orbit_mod_3() {
    let m = HeckeModule::build(&delta(3, 2), &ModuleConfig::default()).unwrap();
    let f = m.seed_vector();
    let two_f: Vec<u8> = f.iter().map(|&x| 2 * x % 3).collect();
    let orbit = constants::squarefull_orbit(&m, &f, 10_000_000_000, Execution::Sequential).unwrap();
    let par = constants::squarefull_orbit(&m, &f, 10_000_000_000, Execution::default()).unwrap();
    assert_eq!(orbit.terms, par.terms);
    for (k, v) in &orbit.sums {
        assert!((v - par.sums[k]).abs() < 1e-12);
    }
    let c_u = euler::euler_constant(&[1], 3, &Rational::new(1, 2), 1, 1_000_000).unwrap();
    let (a, ea) = constants::squarefull_sum(&m, &f, &f, 10_000_000_000, &c_u).unwrap();
    let (b, eb) = constants::squarefull_sum(&m, &f, &two_f, 10_000_000_000, &c_u).unwrap();
    let want = c_u_closed_form(2_000_000) * square_full_factor(2_000_000);
    assert!(((a + b) - want).abs() < 1e-3 * want, "{} vs {want}", a + b);
    assert!(ea + eb < 1e-3 * want);
    // a coarser bound sees fewer terms and never a larger total
    let small = constants::squarefull_orbit(&m, &f, 1_000_000, Execution::Sequential).unwrap();
    let total = |o: &constants::SquarefullOrbit| o.sums.values().sum::<f64>();
    assert!(small.terms < orbit.terms);
    assert!(total(&small) <= total(&orbit));
    assert!(total(&orbit) - total(&small) <= small.tail);
}

#[test]
fn full_constant_delta_squared_mod_3() {
    let pr = constants::leading_constants(&delta(3, 2), &ConstantsConfig::default()).unwrap();
    assert_eq!(pr.alpha, Rational::new(1, 2));
    assert_eq!(pr.h, 1);
    let want = c_u_closed_form(2_000_000) / 3.0 * square_full_factor(2_000_000);
    assert!((pr.c - want).abs() < 1e-3 * want, "{} vs {want}", pr.c);
}

#[test]
fn full_constant_delta_mod_7_by_value() {
    let pr = constants::leading_constants(&delta(7, 1), &ConstantsConfig::default()).unwrap();
    assert_eq!(pr.alpha, Rational::new(1, 2));
    assert_eq!(pr.h, 0);
    let big: Vec<f64> = [1u8, 2, 4].iter().map(|a| pr.per_value[a].c).collect();
    let small: Vec<f64> = [3u8, 5, 6].iter().map(|a| pr.per_value[a].c).collect();
    for v in &big {
        assert!((v - 0.16776).abs() < 1e-4, "{v}");
    }
    for v in &small {
        assert!((v - 0.03768).abs() < 1e-4, "{v}");
    }
    let sum: f64 = pr.per_value.values().map(|v| v.c).sum();
    assert!((sum - pr.c).abs() < 1e-9);
}

#[test]
fn inflated_form_is_not_degenerate() {
    // V_3 Δ has nonzero a_n only at n = 3m, square-free when m is
    let d = delta(3, 1);
    let f = lacunary::hecke::apply(&d, HeckeOpSpec::V(3)).unwrap();
    assert_eq!(f.weight(), 36);
    let pv = sf_profile(&f);
    let pd = sf_profile(&d);
    assert_eq!(pv.alpha, pd.alpha);
    assert_eq!(pv.h, pd.h);
    assert!((pv.c - pd.c / 3.0).abs() < 1e-9, "{} vs {}", pv.c, pd.c / 3.0);
}

#[test]
fn degenerate_and_constant_forms() {
    // q^9-supported forms: V_9 Δ has a_n = 0 off multiples of 9
    let d = delta(3, 1);
    let f = lacunary::hecke::apply(&d, HeckeOpSpec::V(9)).unwrap();
    assert_eq!(constants::leading_constants_sf(&f, &ConstantsConfig::default()).unwrap(), SquarefreeOutcome::Degenerate);
    let one = GradedForm::new(series::QSeries::one(prime(3), 300), 0).unwrap();
    assert!(constants::leading_constants(&one, &ConstantsConfig::default()).is_err());
}

#[test]
fn predictions() {
    let pr = sf_profile(&delta(3, 1));
    let x = 1e6f64;
    let p = constants::predict(&pr, &[x]).unwrap()[0];
    assert!((p.value - pr.c * x / x.ln().sqrt()).abs() < 1e-6 * p.value);
    let e4 = 4f64.exp();
    assert!((constants::predict_shape(0.5, 0, e4) - e4 / 2.0).abs() < 1e-9);
    let ratio = constants::predict_shape(0.5, 1, x) / constants::predict_shape(0.5, 0, x);
    assert!((ratio - 2.626).abs() < 1e-3);
    assert!(constants::predict(&pr, &[2.0]).is_err());
}

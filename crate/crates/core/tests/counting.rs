mod common;

use common::*;
use lacunary::counting::{self, CoeffTable, DecompositionOracle};
use lacunary::series;
use lacunary::{Execution, GradedForm, ModuleConfig, Prime};

fn prime(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

fn table(text: &str, p: u64, x: usize) -> CoeffTable {
    counting::coefficient_table(text, prime(p), x, counting::DEFAULT_TABLE_CAP).unwrap()
}

#[test]
fn small_tables() {
    let t = table("delta", 3, 14);
    let r = counting::count_pi(&t, &[14], false).unwrap();
    assert_eq!(r.rows[0].pi, 4);
    let r = counting::count_pi_sf(&t, &[2, 14]).unwrap();
    assert_eq!(r.rows[0].pi_sf, 1);
    assert_eq!(r.rows[1].pi_sf, 3);
    let z = table("0", 5, 100);
    let r = counting::count(&z, &[10, 100], Execution::default()).unwrap();
    assert!(r.rows.iter().all(|row| row.pi == 0 && row.pi_sf == 0));
    assert!(counting::compare_report(&r, None, false).is_empty());
    let t = table("delta^2", 3, 5);
    assert_eq!(&t.coeffs()[2..5], &[1, 0, 0]);
    assert!(counting::coefficient_table("delta", prime(3), 2_000_000, counting::DEFAULT_TABLE_CAP).is_err());
}

#[test]
fn squarefree_mask_matches_trial_division() {
    let m = counting::squarefree_mask(5000);
    for n in 0..5000u64 {
        assert_eq!(m[n as usize], n > 0 && is_squarefree(n), "{n}");
    }
}

#[test]
fn delta_mod_3_counts() {
    let t = table("delta", 3, 1_000_000);
    let want = tau_congruence(3, 1_000_000);
    assert_eq!(t.coeffs(), &want[..]);
    let r = counting::count(&t, &[10_000, 1_000_000], Execution::default()).unwrap();
    let (a, b) = (&r.rows[0], &r.rows[1]);
    assert_eq!((a.per_value[&1], a.per_value[&2], a.pi), (441, 965, 1406));
    assert_eq!((b.per_value[&1], b.per_value[&2], b.pi), (45028, 68247, 113275));
    assert_eq!(b.pi_sf, 77279);
    for row in &r.rows {
        assert_eq!(row.per_value.values().sum::<u64>(), row.pi);
        assert_eq!(row.per_value_sf.values().sum::<u64>(), row.pi_sf);
        assert!(row.pi_sf <= row.pi);
    }
}

#[test]
fn delta_squared_mod_3_squarefree_count() {
    // Δ² = q² ∏ (1 - q^{3m})^{16} mod 3, computed without the library
    let n = 1_000_000;
    let e = eta_power(16, 3, n / 3 + 1);
    let mut want = vec![0u8; n];
    for (i, &x) in e.iter().enumerate() {
        if 3 * i + 2 < n {
            want[3 * i + 2] = x;
        }
    }
    let t = table("delta^2", 3, n);
    assert_eq!(t.coeffs(), &want[..]);
    let r = counting::count(&t, &[1_000_000], Execution::default()).unwrap();
    assert_eq!((r.rows[0].pi, r.rows[0].pi_sf), (196894, 138267));
}

#[test]
fn delta_mod_7_value_counts() {
    let t = table("delta", 7, 1_000_000);
    assert_eq!(t.coeffs(), &tau_congruence(7, 1_000_000)[..]);
    let r = counting::count(&t, &[1_000_000], Execution::default()).unwrap();
    let v = &r.rows[0].per_value;
    let got: Vec<u64> = (1..7).map(|a| v[&a]).collect();
    assert_eq!(got, vec![45927, 46007, 11131, 45976, 11181, 11075]);
    assert!(v[&1] + v[&2] + v[&4] > v[&3] + v[&5] + v[&6]);
}

#[test]
fn sequential_and_parallel_counts_agree() {
    let t = table("delta^2 - delta", 7, 300_000);
    let cps = [1000, 10_000, 100_000, 300_000];
    assert_eq!(
        counting::count(&t, &cps, Execution::Sequential).unwrap(),
        counting::count(&t, &cps, Execution::default()).unwrap()
    );
}

fn form(text: &str, p: u64, prec: usize) -> GradedForm {
    lacunary::expr::evaluate(&text.parse().unwrap(), prime(p), prec).unwrap()
}

#[test]
fn oracle_matches_tables() {
    let cases = [("delta", 3), ("delta^2", 3), ("delta^5", 3), ("delta", 7), ("delta^2 - delta", 7), ("delta^2", 7)];
    for (text, p) in cases {
        let f = form(text, p, 300);
        let o = DecompositionOracle::new(&f, 10_000, &ModuleConfig::default()).unwrap();
        let t = table(text, p, 10_001);
        let r = o.verify(t.coeffs(), true, Execution::default()).unwrap();
        assert!(r.mismatches.is_empty(), "{text} mod {p}: {:?}", r.mismatches);
        assert_eq!(r.checked, r.matched);
        assert!(r.checked > 6000);
    }
}

#[test]
fn oracle_covers_multiples_of_p() {
    for (text, p) in [("delta^5", 3), ("delta", 3), ("delta^2", 7)] {
        let f = form(text, p, 10_001);
        let r = counting::decomposition_oracle(&f, 10_000, &ModuleConfig::default()).unwrap();
        assert_eq!(r.summary(), "match: 10000/10000", "{text} mod {p}");
    }
}

#[test]
fn oracle_triples() {
    let f = form("delta^2", 3, 300);
    let o = DecompositionOracle::new(&f, 100, &ModuleConfig::default()).unwrap();
    let e = o.classify(2).unwrap();
    assert_eq!(e.predicted, 1);
    let c = &e.components[0];
    assert_eq!((c.m, c.m1, c.m2, c.h), (1, 2, 1, 1));
    let e = o.classify(4).unwrap();
    assert_eq!(e.predicted, 0);
    assert_eq!((e.components[0].m2, e.components[0].f2.clone()), (4, e.components[0].f1.clone()));
    let e = o.classify(1).unwrap();
    assert_eq!((e.components[0].m2, e.components[0].h), (1, 0));
    assert_eq!(e.predicted, 0);
}

#[test]
fn comparison_report_shape() {
    let t = CoeffTable::from_series(series::delta_power(prime(3), 1, 100_001));
    let r = counting::count(&t, &[1000, 100_000], Execution::default()).unwrap();
    let cfg = lacunary::constants::ConstantsConfig::default();
    let f = GradedForm::new(series::delta_power(prime(3), 1, 300), 12).unwrap();
    let lacunary::constants::SquarefreeOutcome::Profile(pr) = lacunary::constants::leading_constants_sf(&f, &cfg).unwrap() else {
        panic!()
    };
    let rows = counting::compare_report(&r, Some(&pr), true);
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert!((row.ratio - row.pi_sf as f64 / row.predicted).abs() < 1e-12);
        assert!(row.ratio > 0.7 && row.ratio < 1.3, "{}", row.ratio);
    }
}

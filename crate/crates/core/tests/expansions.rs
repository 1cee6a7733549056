mod common;

use common::*;
use lacunary::expr::{self, FormExpr};
use lacunary::series::{self, QSeries};
use lacunary::{Execution, GradedForm, Prime};

fn prime(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

#[test]
fn delta_matches_naive_product() {
    for p in [3u64, 5, 7, 11, 13, 23, 251] {
        let want = delta_naive(p, 1200);
        let got = series::delta_power(prime(p), 1, 1200);
        assert_eq!(got.coeffs(), &want[..], "p = {p}");
    }
}

#[test]
fn tau_small_values() {
    let tau = tau_exact(30);
    assert_eq!(tau[1], 1.into());
    assert_eq!(tau[2], (-24).into());
    assert_eq!(tau[3], 252.into());
    assert_eq!(tau[11], 534612.into());
    for p in [3u64, 7, 131, 251] {
        let got = series::delta_power(prime(p), 1, 30);
        for n in 0..30 {
            assert_eq!(got.coeff(n), big_mod(&tau[n], p), "tau({n}) mod {p}");
        }
    }
}

#[test]
fn delta_mod_3_leading_terms() {
    let d = series::delta_power(prime(3), 1, 14);
    let support: Vec<usize> = (0..14).filter(|&n| d.coeff(n) != 0).collect();
    assert_eq!(support, vec![1, 4, 7, 13]);
    // τ(4) = -1472, τ(7) = -16744, τ(13) = -577738
    let tau = tau_exact(14);
    let values: Vec<u8> = support.iter().map(|&n| big_mod(&tau[n], 3)).collect();
    assert_eq!(values, vec![1, 1, 2, 2]);
    assert_eq!(support.iter().map(|&n| d.coeff(n)).collect::<Vec<_>>(), values);
}

#[test]
fn delta_powers_match_repeated_convolution() {
    for p in [3u64, 5, 7, 13] {
        let d = delta_naive(p, 500);
        let mut want = d.clone();
        for k in 1..=6u64 {
            let got = series::delta_power(prime(p), k, 500);
            assert_eq!(got.coeffs(), &want[..], "p = {p}, k = {k}");
            want = convolve(&want, &d, p, 500);
        }
    }
}

#[test]
fn large_powers_match_eta_products() {
    // Δ^k = q^k ∏ (1 - q^m)^{24k}
    for (p, k) in [(3u64, 7u64), (3, 19), (5, 11), (7, 13), (251, 3)] {
        let len = 2000;
        let e = eta_power(24 * k as u32, p, len);
        let mut want = vec![0u8; len];
        for (i, &x) in e.iter().enumerate() {
            if i + (k as usize) < len {
                want[i + k as usize] = x;
            }
        }
        assert_eq!(series::delta_power(prime(p), k, len).coeffs(), &want[..], "p = {p}, k = {k}");
    }
}

#[test]
fn delta_squared_mod_3_from_exact_tau() {
    let tau = tau_exact(12);
    let t: Vec<u8> = tau.iter().map(|x| big_mod(x, 3)).collect();
    let sq = convolve(&t, &t, 3, 12);
    assert_eq!((sq[2], sq[3], sq[4]), (1, 0, 0));
    assert_eq!(series::delta_power(prime(3), 2, 12).coeffs(), &sq[..]);
}

#[test]
fn eisenstein_series_match_divisor_sums() {
    for p in [5u64, 7, 11, 13, 251] {
        let len = 400;
        let s3 = sigma_mod(3, p, len);
        let s5 = sigma_mod(5, p, len);
        let e4 = series::eisenstein(prime(p), 4, len).unwrap();
        let e6 = series::eisenstein(prime(p), 6, len).unwrap();
        for n in 1..len {
            assert_eq!(e4.coeff(n) as u64, 240 % p * s3[n] % p, "E4 mod {p} at {n}");
            assert_eq!(e6.coeff(n) as u64, (p - 504 % p) % p * s5[n] % p, "E6 mod {p} at {n}");
        }
        assert_eq!(e4.coeff(0), 1);
    }
}

#[test]
fn e4_mod_7_short_expansion() {
    let e4 = expr::evaluate(&"E4".parse().unwrap(), prime(7), 3).unwrap();
    assert_eq!(e4.series().coeffs(), &[1, 2, 4]);
    assert_eq!(e4.weight(), 4);
}

#[test]
fn sequential_and_parallel_products_agree() {
    let p = prime(13);
    let a = series::delta_power(p, 3, 5000);
    let b = series::eisenstein(p, 6, 5000).unwrap();
    let s = series::mul_with(&a, &b, Execution::Sequential).unwrap();
    let q = series::mul_with(&a, &b, Execution::default()).unwrap();
    assert_eq!(s, q);
    assert_eq!(
        series::pow_with(&b, 29, Execution::Sequential),
        series::pow_with(&b, 29, Execution::default())
    );
}

#[test]
fn expression_evaluation() {
    let p = prime(7);
    let f = expr::evaluate(&"delta^2 - delta*E4^3".parse().unwrap(), p, 200).unwrap();
    let d = series::delta_power(p, 1, 200);
    let e4 = series::eisenstein(p, 4, 200).unwrap();
    let want = series::delta_power(p, 2, 200)
        .sub(&series::mul(&d, &series::pow(&e4, 3)).unwrap())
        .unwrap();
    assert_eq!(f.series(), &want);
    assert_eq!(f.weight(), 24);
    // weights 12 and 24 agree mod p - 1 = 6 after lifting
    let g = expr::evaluate(&"delta + delta^2".parse().unwrap(), p, 50).unwrap();
    assert_eq!(g.weight(), 24);
    let bad = expr::evaluate(&"delta + E4".parse().unwrap(), p, 50);
    assert!(bad.is_err());
}

#[test]
fn expression_display_round_trip() {
    for text in ["delta", "2*(E4 + E6)*delta", "a", "(delta^2)^3", "delta - (E4 - E6)", "E4^3 - E6^2"] {
        match text.parse::<FormExpr>() {
            Ok(e) => {
                let shown = e.to_string();
                assert_eq!(shown.parse::<FormExpr>().unwrap(), e, "{text}");
            }
            Err(err) => assert_eq!(text, "a", "{err}"),
        }
    }
    assert_eq!("(delta^2)^3".parse::<FormExpr>().unwrap().to_string(), "(delta^2)^3");
}

#[test]
fn graded_form_lift_rules() {
    let p = prime(3);
    let f = GradedForm::new(series::delta_power(p, 1, 40), 12).unwrap();
    let g = f.lift(16).unwrap();
    assert_eq!(g.series(), f.series());
    assert!(f.lift(14).is_err());
    assert!(f.lift(13).is_err());
    let z = GradedForm::new(QSeries::zero(p, 10), 4).unwrap();
    assert!(z.series().is_zero());
}

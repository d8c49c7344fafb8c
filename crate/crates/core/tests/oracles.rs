//! Agreement between the three independent routes to the same numbers:
//! direct amplitude propagation, generating-function quadrature and the
//! eigenfunction integrals.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use qwalk::eigen;
use qwalk::genfun;
use qwalk::simulate::{self, BoundaryConfig};
use qwalk::{Coin, StartSpinor};

fn hadamard_long_run_matches_escape(m: u32) {
    for s in [StartSpinor::left(), StartSpinor::right()] {
        let rec = simulate::run_one_wall(Coin::hadamard(), s, m as i64, 100_000).unwrap();
        let lambda = eigen::escape_prob_one_wall(0.5, s, m).unwrap().lambda;
        let err = (rec.total_right() - (1.0 - lambda)).abs();
        assert!(err < 5e-3, "M = {m}: {err}");
    }
}

#[test]
fn long_run_wall_at_2() {
    hadamard_long_run_matches_escape(2);
}

#[test]
fn long_run_wall_at_3() {
    hadamard_long_run_matches_escape(3);
}

#[test]
fn long_run_wall_at_4() {
    hadamard_long_run_matches_escape(4);
}

#[test]
fn long_run_wall_at_5() {
    hadamard_long_run_matches_escape(5);
}

#[test]
fn exit_probabilities_fall_with_distance() {
    let mut last = (f64::INFINITY, f64::INFINITY);
    for m in 1..=30 {
        let e = genfun::exit_prob_one_wall(&Coin::hadamard(), StartSpinor::left(), m).unwrap();
        assert!(e.p <= last.0 + 1e-14 && e.q <= last.1 + 1e-14, "M = {m}");
        last = (e.p, e.q);
    }
}

#[test]
fn first_passage_amplitudes_are_f_times_g_powers() {
    let coin = Coin::new(0.62, 0.3, -0.8, 1.9).unwrap();
    let f = genfun::series_f(&coin, 40).unwrap();
    let g = genfun::series_g(&coin, 40).unwrap();
    for m in 1..=3u32 {
        let walker_l = simulate::Walker::new(coin, StartSpinor::left(), BoundaryConfig::OneWall { m: m as i64 }).unwrap();
        let walker_r = simulate::Walker::new(coin, StartSpinor::right(), BoundaryConfig::OneWall { m: m as i64 }).unwrap();
        let from_l = &f * &g.pow(m - 1);
        let from_r = g.pow(m);
        let (rec_l, rec_r) = (simulate::run(walker_l, 40), simulate::run(walker_r, 40));
        for t in 1..=40 {
            assert!((rec_l.per_step_right[t - 1] - from_l.coeff(t).norm_sqr()).abs() < 1e-10);
            assert!((rec_r.per_step_right[t - 1] - from_r.coeff(t).norm_sqr()).abs() < 1e-10);
        }
    }
}

#[test]
fn escape_matches_exit_for_random_starts() {
    let starts = [
        (0.3, 1.2, -0.4),
        (0.9, -2.0, 0.1),
        (0.5, 0.0, 3.0),
        (0.05, 0.7, 0.7),
        (0.7, -1.1, 2.2),
    ];
    for rho in [0.25, 0.5, 0.75] {
        let coin = Coin::rho_family(rho).unwrap();
        for (l, pa, pb) in starts {
            let s = StartSpinor::new(C64::from_polar(l, pa), C64::from_polar((1.0f64 - l * l).sqrt(), pb)).unwrap();
            for m in 1..=10 {
                let r = genfun::exit_prob_one_wall(&coin, s, m).unwrap().r;
                let lambda = eigen::escape_prob_one_wall(rho, s, m).unwrap().lambda;
                assert!((r + lambda - 1.0).abs() < 1e-9, "rho = {rho}, M = {m}");
            }
        }
    }
}

#[test]
fn oscillating_terms_die_out_at_large_distance() {
    for rho in [0.25, 0.5, 0.75] {
        let s = StartSpinor::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8)).unwrap();
        let far = eigen::escape_prob_one_wall(rho, s, 1000).unwrap().lambda;
        let limit = eigen::escape_limit(rho, s).unwrap().lambda;
        assert!((far - limit).abs() < 1e-4, "rho = {rho}");
    }
}

#[test]
fn large_m_exit_for_general_rho() {
    for rho in [0.1f64, 0.3, 0.5, 0.7, 0.9] {
        let q = genfun::exit_prob_one_wall(&Coin::rho_family(rho).unwrap(), StartSpinor::right(), 200).unwrap().q;
        assert!((q - ((2.0 * rho - 1.0).asin() / PI + 0.5)).abs() < 5e-3);
    }
}

#[test]
fn one_wall_tail_follows_inverse_square() {
    let m = 20;
    let rec = simulate::run_one_wall(Coin::hadamard(), StartSpinor::right(), m, 20_000).unwrap();
    let lambda = eigen::escape_prob_one_wall(0.5, StartSpinor::right(), m as u32).unwrap().lambda;
    let cfg = BoundaryConfig::OneWall { m };
    for t in (50 * m as usize..=20_000).step_by(500) {
        let model = eigen::survival_asymptote(cfg, t as f64, lambda).unwrap() - lambda;
        let seen = rec.remaining[t - 1] - lambda;
        assert!(((seen - model) / model).abs() < 0.1, "t = {t}: {seen} vs {model}");
    }
}

// Between two walls the square-root law is an intermediate regime only: the
// survival eventually decays exponentially (see the acceptance run).
#[test]
fn two_wall_survival_follows_square_root_law_at_first() {
    let m = 20;
    let rec = simulate::run_two_wall(Coin::hadamard(), StartSpinor::right(), m, m, 2000).unwrap();
    let cfg = BoundaryConfig::TwoWall { m_left: m, m_right: m };
    for t in (50 * m as usize..=2000).step_by(100) {
        let model = eigen::survival_asymptote(cfg, t as f64, 0.0).unwrap();
        let seen = rec.remaining[t - 1];
        assert!(((seen - model) / model).abs() < 0.1, "t = {t}: {seen} vs {model}");
    }
}

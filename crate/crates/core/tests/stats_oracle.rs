//! Student-t tail probabilities against direct numerical integration.
//!
//! With x = sqrt(df) * tan(theta) the t density becomes proportional to
//! cos^(df-1)(theta) on (-pi/2, pi/2), so the two-tailed p-value is
//! 1 - F(atan(|t|/sqrt(df))) / F(pi/2) where F(u) = integral_0^u cos^(df-1).

#![allow(clippy::approx_constant)]

use chunkbench_core::evaluation::{paired_t_test, t_tail_probability};

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn oracle_p(t: f64, df: usize) -> f64 {
    let f = |th: f64| th.cos().powi(df as i32 - 1);
    let half = std::f64::consts::FRAC_PI_2;
    let upper = (t.abs() / (df as f64).sqrt()).atan();
    1.0 - simpson(f, 0.0, upper, 4000) / simpson(f, 0.0, half, 4000)
}

#[test]
fn grid_matches_integration() {
    let mut worst: f64 = 0.0;
    for df in 1..=30 {
        for step in 0..=20 {
            let t = step as f64 * 0.5;
            let got = t_tail_probability(t, df).unwrap();
            let want = oracle_p(t, df);
            worst = worst.max((got - want).abs());
            assert!((got - want).abs() < 1e-4, "df={df} t={t}: {got} vs {want}");
        }
    }
    assert!(worst < 1e-6, "worst deviation {worst}");
}

#[test]
fn p_strictly_decreasing_in_abs_t() {
    for df in [1, 2, 5, 17, 30] {
        let mut prev = t_tail_probability(0.0, df).unwrap();
        for step in 1..=40 {
            let p = t_tail_probability(step as f64 * 0.25, df).unwrap();
            assert!(p < prev, "df={df} step={step}");
            prev = p;
        }
    }
}

#[test]
fn reference_values() {
    let r = paired_t_test(&[2.0, 0.0, 1.0, 3.0, -1.0], &[0.0; 5]).unwrap();
    assert!((r.t - 1.4142).abs() < 1e-3);
    assert!((r.p - 0.2302).abs() < 1e-3);
    assert!((r.p - oracle_p(r.t, 4)).abs() < 1e-6);
    let crit = t_tail_probability(2.776, 4).unwrap();
    assert!((crit - 0.050).abs() < 5e-4, "{crit}");
}

//! Gamma and Riemann zeta functions on the real line.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Lanczos approximation (g = 7, nine terms) with reflection below 1/2.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

const ETA_TERMS: usize = 40;

/// Dirichlet eta `η(s) = Σ (−1)^{k} (k+1)^{−s}` by Borwein's accelerated
/// alternating-series sum; accurate for `s > 0`.
pub fn dirichlet_eta(s: f64) -> f64 {
    let n = ETA_TERMS;
    // d_k = n Σ_{i≤k} (n+i−1)! 4^i / ((n−i)! (2i)!)
    let mut d = Vec::with_capacity(n + 1);
    let mut term = 1.0 / n as f64; // i = 0 term divided by n
    let mut acc = term;
    d.push(n as f64 * acc);
    for i in 1..=n {
        let (nf, i_f) = (n as f64, i as f64);
        term *= (nf + i_f - 1.0) * 4.0 * (nf - i_f + 1.0) / ((2.0 * i_f - 1.0) * (2.0 * i_f));
        acc += term;
        d.push(nf * acc);
    }
    let dn = d[n];
    let mut sum = 0.0;
    for k in 0..n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (d[k] - dn) / ((k + 1) as f64).powf(s);
    }
    -sum / dn
}

/// Riemann zeta for real `s > 0`, `s ≠ 1`, via `ζ = η / (1 − 2^{1−s})`.
pub fn zeta(s: f64) -> f64 {
    if s == 1.0 {
        return f64::INFINITY;
    }
    let denom = -((1.0 - s) * std::f64::consts::LN_2).exp_m1();
    dirichlet_eta(s) / denom
}

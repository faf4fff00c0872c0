//! Log-gamma and log-domain counting helpers.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of |Γ(x)| via the Lanczos approximation (g = 7, 9 terms).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let s = (PI * x).sin().abs();
        return PI.ln() - s.ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// ln C(n, k) for real n >= k >= 0.
pub fn ln_binom(n: f64, k: f64) -> f64 {
    if k == 0.0 || k == n {
        return 0.0;
    }
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// ln of the total-photon-number law of `m` iid thermal modes with mean `nb`
/// each, evaluated at `n` (negative binomial).
pub fn ln_thermal_pmf(n: usize, m: f64, nb: f64) -> f64 {
    if nb == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let nf = n as f64;
    ln_gamma(nf + m) - ln_gamma(nf + 1.0) - ln_gamma(m) + nf * nb.ln() - (nf + m) * (nb + 1.0).ln()
}

/// Smallest n with cumulative thermal (negative binomial) mass >= 1 - tail.
pub fn thermal_quantile(m: f64, nb: f64, tail: f64) -> usize {
    if nb == 0.0 {
        return 0;
    }
    let r = nb / (nb + 1.0);
    // p_n via the ratio recurrence p_{n+1} = p_n r (n+m)/(n+1)
    let mut ln_p = -m * (nb + 1.0).ln();
    let mut cum = 0.0f64;
    let mut n = 0usize;
    loop {
        cum += ln_p.exp();
        if 1.0 - cum <= tail {
            return n;
        }
        ln_p += r.ln() + ((n as f64 + m) / (n as f64 + 1.0)).ln();
        n += 1;
        // past the mode the remaining mass is bounded by a geometric tail
        if n as f64 > m * nb && ln_p < (tail * (1.0 - r) * 1e-3).ln() {
            return n;
        }
    }
}

/// Stable log(sum(exp(v))).
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let mx = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !mx.is_finite() {
        return mx;
    }
    mx + v.iter().map(|x| (x - mx).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials() {
        let mut f = 1.0f64;
        for n in 1..30 {
            f *= n as f64;
            let got = ln_gamma(n as f64 + 1.0);
            assert!((got - f.ln()).abs() < 1e-12 * f.ln().max(1.0), "n={n}");
        }
    }

    #[test]
    fn half_integer() {
        assert!((ln_gamma(0.5) - PI.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(1.5) - (PI.sqrt() / 2.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn stirling_large() {
        let x: f64 = 1e6;
        let st = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3));
        assert!(((ln_gamma(x) - st) / st).abs() < 1e-13);
    }

    #[test]
    fn thermal_pmf_normalised() {
        let s: f64 = (0..400).map(|n| ln_thermal_pmf(n, 7.0, 1.3).exp()).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantile_geometric() {
        // mean 1: tail beyond d is (1/2)^{d+1}
        let d = thermal_quantile(1.0, 1.0, 1e-9);
        assert_eq!(d, 29);
    }
}

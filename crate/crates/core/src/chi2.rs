//! Noncentral chi-squared CDF with two degrees of freedom and the
//! first-order Marcum Q-function.
//!
//! With `a = λ/2` and `b = x/2`, the CDF is the Poisson mixture
//! `F(x; 2, λ) = Σⱼ Pois(j; a)·P(j+1, b)`, and `P(j+1, b)` is itself the
//! Poisson upper tail `Pr[Pois(b) > j]`. Both sequences are generated in
//! log space so large arguments neither underflow nor overflow.

/// `F(x; 2, λ)` for `x ≥ 0`, `λ ≥ 0`. Returns 0 for `x ≤ 0`.
pub fn noncentral_chi2_cdf_2dof(x: f64, noncentrality: f64) -> f64 {
    assert!(noncentrality >= 0.0, "noncentrality must be nonnegative");
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let a = 0.5 * noncentrality;
    let b = 0.5 * x;
    let ln_a = a.ln();
    let ln_b = b.ln();

    // j stops once the mixing weights are exhausted past their mode.
    let limit = (a + 40.0 * a.sqrt() + 100.0).ceil() as u64;
    let mut ln_fact = 0.0;
    let mut mix_mass = 0.0;
    let mut lower_b = 0.0; // Pr[Pois(b) ≤ j]
    let mut total = 0.0;
    for j in 0..=limit {
        if j > 0 {
            ln_fact += (j as f64).ln();
        }
        let jf = j as f64;
        let w = if a == 0.0 {
            if j == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            (-a + jf * ln_a - ln_fact).exp()
        };
        lower_b += (-b + jf * ln_b - ln_fact).exp();
        let upper_b = (1.0 - lower_b).max(0.0);
        total += w * upper_b;
        mix_mass += w;
        if jf > a && (1.0 - mix_mass < 1e-17 || upper_b < 1e-300) {
            break;
        }
    }
    total.clamp(0.0, 1.0)
}

/// First-order Marcum Q-function `Q₁(a, b) = 1 − F(b²; 2, a²)`.
pub fn marcum_q1(a: f64, b: f64) -> f64 {
    1.0 - noncentral_chi2_cdf_2dof(b * b, a * a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_case_is_exponential() {
        for x in [0.1, 1.0, 4.0, 30.0] {
            let want = 1.0 - (-x / 2.0f64).exp();
            assert!((noncentral_chi2_cdf_2dof(x, 0.0) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn limits() {
        assert_eq!(noncentral_chi2_cdf_2dof(0.0, 3.0), 0.0);
        assert_eq!(noncentral_chi2_cdf_2dof(f64::INFINITY, 3.0), 1.0);
        assert!((noncentral_chi2_cdf_2dof(1e4, 50.0) - 1.0).abs() < 1e-12);
        assert!(noncentral_chi2_cdf_2dof(1e-3, 400.0) < 1e-12);
    }

    #[test]
    fn marcum_q_at_zero_arguments() {
        assert!((marcum_q1(0.0, 2.0) - (-2.0f64).exp()).abs() < 1e-14);
        assert!((marcum_q1(1.5, 0.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn matches_numerical_integration_of_the_density() {
        // f(x) = ½ e^{-(x+λ)/2} I₀(√(λx)); I₀ by its own power series.
        fn i0(z: f64) -> f64 {
            let mut term = 1.0;
            let mut sum = 1.0;
            for k in 1..200 {
                term *= (z * z / 4.0) / (k * k) as f64;
                sum += term;
            }
            sum
        }
        let lambda = 3.0;
        let upper = 5.0;
        let n = 20_000;
        let h = upper / n as f64;
        let f = |x: f64| 0.5 * (-(x + lambda) / 2.0).exp() * i0((lambda * x).sqrt());
        // Simpson's rule.
        let mut s = f(0.0) + f(upper);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        let want = s * h / 3.0;
        assert!((noncentral_chi2_cdf_2dof(upper, lambda) - want).abs() < 1e-10);
    }

    #[test]
    fn monotone_in_x() {
        let mut prev = 0.0;
        for i in 1..200 {
            let v = noncentral_chi2_cdf_2dof(i as f64 * 0.5, 12.0);
            assert!(v >= prev);
            prev = v;
        }
    }
}

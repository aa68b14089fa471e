//! Student t tail probabilities through the regularized incomplete beta
//! function.

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 10_000;

fn ln_beta(a: f64, b: f64) -> f64 {
    libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)
}

/// Continued fraction for the incomplete beta, evaluated with the modified
/// Lentz method.
fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)` for `a, b > 0`, `x` in `[0, 1]`.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x.is_nan() || !(a > 0.0) || !(b > 0.0) {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = a * libm::log(x) + b * libm::log1p(-x) - ln_beta(a, b);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(x, a, b) / a
    } else {
        1.0 - front * beta_cf(1.0 - x, b, a) / b
    }
}

/// Two-sided p-value `P(|T| >= |t|)` for a t distribution with `dof`
/// degrees of freedom.
pub fn two_sided_p_value(t: f64, dof: f64) -> f64 {
    if t.is_nan() || !(dof > 0.0) {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let x = dof / (dof + t * t);
    regularized_incomplete_beta(x, 0.5 * dof, 0.5).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    // scipy.special.betainc(a, b, x)
    const BETAINC: &[(f64, f64, f64, f64)] = &[
        (0.5, 0.5, 0.1, 0.20483276469913345),
        (2.0, 0.5, 0.5, 0.11611652351681556),
        (2.0, 0.5, 0.9, 0.5414697392755851),
        (5.0, 0.5, 0.3, 0.0006913033857629756),
        (12.0, 0.5, 0.98, 0.4907470283676449),
        (1.0, 1.0, 0.37, 0.37),
        (3.0, 7.0, 0.25, 0.399322509765625),
        (30.0, 0.5, 0.8, 0.00026831214763073076),
        (0.5, 30.0, 0.01, 0.560665631094749),
        (100.0, 100.0, 0.5, 0.4999999999999994),
    ];

    // scipy.stats.t.sf(|t|, dof) * 2
    const TWO_SIDED: &[(f64, f64, f64)] = &[
        (0.0, 4.0, 1.0),
        (1.0, 1.0, 0.49999999999999956),
        (2.0, 4.0, 0.1161165235168155),
        (12.59, 4.0, 0.00022908660668728123),
        (-0.868, 4.0, 0.4343680795174184),
        (2.5, 10.0, 0.031446844236608776),
        (1.96, 1000.0, 0.05027318495574871),
        (6.0, 3.0, 0.00927271489228466),
        (40.0, 2.0, 0.0006244146721847406),
        (0.25, 24.0, 0.8047148942611702),
    ];

    #[test]
    fn incomplete_beta_matches_reference() {
        for &(a, b, x, want) in BETAINC {
            let got = regularized_incomplete_beta(x, a, b);
            assert!((got - want).abs() < 1e-8, "I_{x}({a},{b}) = {got}, want {want}");
        }
    }

    #[test]
    fn t_p_values_match_reference() {
        for &(t, dof, want) in TWO_SIDED {
            let got = two_sided_p_value(t, dof);
            assert!((got - want).abs() < 1e-8, "t={t} dof={dof}: {got} vs {want}");
        }
    }

    #[test]
    fn reported_regression_table_p_values() {
        // t statistics and p-values of a 4-dof fit as printed (t rounded to
        // three decimals, so compare loosely)
        let rows = [
            (10.905, 0.000402),
            (-0.868, 0.434299),
            (0.890, 0.423737),
            (0.068, 0.948688),
            (0.582, 0.591916),
            (0.987, 0.379491),
            (2.034, 0.111721),
            (2.288, 0.084007),
            (3.286, 0.030316),
            (3.678, 0.021242),
            (7.103, 0.002075),
            (12.590, 0.000229),
        ];
        for (t, p) in rows {
            let got = two_sided_p_value(t, 4.0);
            assert!((got - p).abs() < 2e-3 * p, "t={t}: {got} vs {p}");
        }
    }

    #[test]
    fn edge_cases() {
        assert_eq!(regularized_incomplete_beta(0.0, 2.0, 3.0), 0.0);
        assert_eq!(regularized_incomplete_beta(1.0, 2.0, 3.0), 1.0);
        assert!(regularized_incomplete_beta(0.5, 0.0, 3.0).is_nan());
        assert_eq!(two_sided_p_value(f64::INFINITY, 5.0), 0.0);
        assert!(two_sided_p_value(1.0, 0.0).is_nan());
    }
}

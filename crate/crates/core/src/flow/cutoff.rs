/// Certified bound on `|η'| + |η''|` for [`cutoff_eta`].
///
/// The quintic smoothstep reaches about 6.69 at `s ≈ 1.245`.
pub const CUTOFF_C1: f64 = 7.0;

/// C² cutoff: 1 on `s ≤ 1`, 0 on `s ≥ 2`, quintic smoothstep in between.
pub fn cutoff_eta(s: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let x = s - 1.0;
        1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
    }
}

/// `(η'(s), η''(s))` in closed form.
pub fn cutoff_eta_derivatives(s: f64) -> (f64, f64) {
    if s <= 1.0 || s >= 2.0 {
        return (0.0, 0.0);
    }
    let x = s - 1.0;
    (
        -30.0 * x * x * (1.0 - x) * (1.0 - x),
        -60.0 * x * (1.0 - x) * (1.0 - 2.0 * x),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support() {
        assert_eq!(cutoff_eta(0.5), 1.0);
        assert_eq!(cutoff_eta(1.0), 1.0);
        assert_eq!(cutoff_eta(2.0), 0.0);
        assert_eq!(cutoff_eta(3.0), 0.0);
        assert!((cutoff_eta(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn values_stay_in_unit_interval_and_decrease() {
        let mut last = 1.0;
        for k in 0..=1000 {
            let v = cutoff_eta(1.0 + k as f64 / 1000.0);
            assert!((0.0..=1.0).contains(&v));
            assert!(v <= last);
            last = v;
        }
    }

    // Oracle: finite differences of η itself on a dense sample, independent of
    // the closed-form derivatives.
    #[test]
    fn derivative_bound_is_certified() {
        let h = 1e-4;
        let mut sup = 0.0f64;
        let mut k = 0;
        while k <= 20_000 {
            let s = 0.9 + 1.2 * k as f64 / 20_000.0;
            let d1 = (cutoff_eta(s + h) - cutoff_eta(s - h)) / (2.0 * h);
            let d2 = (cutoff_eta(s + h) - 2.0 * cutoff_eta(s) + cutoff_eta(s - h)) / (h * h);
            sup = sup.max(d1.abs() + d2.abs());
            k += 1;
        }
        assert!(sup <= CUTOFF_C1, "{sup}");
        assert!(sup > 6.6, "bound should be nearly attained: {sup}");
    }

    #[test]
    fn closed_form_derivatives_match_differences() {
        for s in [1.1, 1.37, 1.5, 1.9] {
            let h = 1e-5;
            let (d1, d2) = cutoff_eta_derivatives(s);
            assert!((d1 - (cutoff_eta(s + h) - cutoff_eta(s - h)) / (2.0 * h)).abs() < 1e-6);
            let fd2 = (cutoff_eta(s + h) - 2.0 * cutoff_eta(s) + cutoff_eta(s - h)) / (h * h);
            assert!((d2 - fd2).abs() < 1e-3);
        }
    }
}

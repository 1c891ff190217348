use crate::quadrature::integrate;

const QUAD_TOL: f64 = 1e-13;

/// Solution of the spatially homogeneous potential flow on an Einstein background
/// with `Ric(θ₀) = -θ₀` and `γ₀ = c·θ₀`:
///
/// `u̇ = n log(1 - (1 - c)e^{-t}) - u`, `u(0) = 0`,
///
/// evaluated as `e^{-t} ∫₀ᵗ e^σ n log(1 - (1-c)e^{-σ}) dσ`.
pub fn homogeneous_potential(t: f64, c: f64, dim: usize) -> f64 {
    if t <= 0.0 || c == 1.0 {
        return 0.0;
    }
    let n = dim as f64;
    let integrand = |sigma: f64| {
        // 1 + (c-1)e^{-σ} = c e^{-σ} + (1 - e^{-σ}), both terms nonnegative
        let inner = c * (-sigma).exp() - (-sigma).exp_m1();
        sigma.exp() * n * inner.ln()
    };
    (-t).exp() * integrate(integrand, 0.0, t, QUAD_TOL * (1.0 + t.exp()))
}

/// Time derivative of [`homogeneous_potential`], read off from the equation.
pub fn homogeneous_velocity(t: f64, c: f64, dim: usize) -> f64 {
    let inner = c * (-t).exp() - (-t).exp_m1();
    (dim as f64) * inner.ln() - homogeneous_potential(t, c, dim)
}

/// Tail value of the potential where the regularized data equals `(1 + ε)θ₀`.
pub fn boundary_value(t: f64, eps: f64) -> f64 {
    homogeneous_potential(t, 1.0 + eps, 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent oracle: classical RK4 on the scalar ODE with a fine step.
    fn rk4(t_end: f64, c: f64, n: f64) -> f64 {
        let f = |t: f64, u: f64| n * (1.0 - (1.0 - c) * (-t).exp()).ln() - u;
        let steps = 20_000;
        let h = t_end / steps as f64;
        let mut u = 0.0;
        let mut t = 0.0;
        for _ in 0..steps {
            let k1 = f(t, u);
            let k2 = f(t + 0.5 * h, u + 0.5 * h * k1);
            let k3 = f(t + 0.5 * h, u + 0.5 * h * k2);
            let k4 = f(t + h, u + h * k3);
            u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
        }
        u
    }

    #[test]
    fn zero_eps_is_identically_zero() {
        for t in [0.0, 0.3, 10.0] {
            assert_eq!(boundary_value(t, 0.0), 0.0);
        }
    }

    #[test]
    fn matches_rk4_oracle() {
        assert!((boundary_value(1.0, 0.1) - rk4(1.0, 1.1, 1.0)).abs() < 1e-10);
        for t in [0.25, 1.0, 5.0] {
            let q = homogeneous_potential(t, 0.5, 1);
            assert!((q - rk4(t, 0.5, 1.0)).abs() < 1e-10, "t={t}");
        }
        let q = homogeneous_potential(2.0, 0.5, 2);
        assert!((q - rk4(2.0, 0.5, 2.0)).abs() < 1e-10);
    }

    #[test]
    fn decays_at_late_times() {
        let early = boundary_value(1.0, 0.3).abs();
        let late = boundary_value(30.0, 0.3).abs();
        assert!(late < 1e-10 && late < early);
    }

    #[test]
    fn degenerate_limit_is_integrable() {
        // c = 0: the integrand is log(1 - e^{-σ}) ~ log σ near 0
        let v = homogeneous_potential(1e-3, 0.0, 1);
        // u ≈ t (log t - 1) for small t
        let approx = 1e-3 * ((1e-3f64).ln() - 1.0);
        assert!((v - approx).abs() < 1e-5, "{v} {approx}");
    }
}

//! Central-difference gradients, used as the independent oracle when checking
//! the reverse pass.

/// `(f(x + h·e_i) - f(x - h·e_i)) / 2h` per coordinate.
pub fn finite_diff_grad<F>(mut f: F, x: &[f64], h: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    assert!(h > 0.0, "step size must be positive");
    let mut probe = x.to_vec();
    let mut grad = vec![0.0; x.len()];
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let plus = f(&probe);
        probe[i] = x[i] - h;
        let minus = f(&probe);
        probe[i] = x[i];
        grad[i] = (plus - minus) / (2.0 * h);
    }
    grad
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_slope_at_three_is_six() {
        let g = finite_diff_grad(|x| x[0] * x[0], &[3.0], 1e-5);
        assert!((g[0] - 6.0).abs() < 1e-6);
    }

    #[test]
    fn constant_function_has_zero_gradient() {
        let g = finite_diff_grad(|_| 4.25, &[1.0, -2.0, 0.5], 1e-5);
        assert_eq!(g, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn sum_of_tanh_at_origin_has_unit_gradient() {
        let g = finite_diff_grad(|x| x.iter().map(|v| v.tanh()).sum(), &[0.0, 0.0], 1e-5);
        for v in g {
            assert!((v - 1.0).abs() < 1e-8);
        }
    }
}

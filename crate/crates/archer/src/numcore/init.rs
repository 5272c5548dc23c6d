//! Weight initialization: fan-in scaled uniform for hidden layers, a small
//! symmetric uniform range for output layers.

use rand::Rng;

use crate::numcore::Matrix;

const FINAL_LAYER_BOUND: f64 = 3e-3;

/// Uniform samples in `[-1/sqrt(f), 1/sqrt(f)]` where `f` is the layer's
/// fan-in (its input dimension, i.e. `cols`).
pub fn fanin_init<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    assert!(rows >= 1 && cols >= 1);
    let bound = 1.0 / (cols as f64).sqrt();
    uniform_matrix(rows, cols, bound, rng)
}

/// Uniform samples in `[-3e-3, 3e-3]` for the output layer, keeping initial
/// actions and value estimates near zero.
pub fn final_layer_init<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    assert!(rows >= 1 && cols >= 1);
    uniform_matrix(rows, cols, FINAL_LAYER_BOUND, rng)
}

/// Uniform vector in `[-bound, bound]`, used for bias initialization with the
/// same bound as the owning layer's weights.
pub fn uniform_vec<R: Rng + ?Sized>(len: usize, bound: f64, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-bound..bound)).collect()
}

fn uniform_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, bound: f64, rng: &mut R) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-bound..bound))
        .collect();
    Matrix::from_vec(rows, cols, data).expect("sized by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fanin_400_stays_within_one_twentieth() {
        // 1/sqrt(400) = 0.05
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = fanin_init(8, 400, &mut rng);
        assert!(m.data().iter().all(|v| v.abs() <= 0.05));
    }

    #[test]
    fn final_layer_stays_within_three_thousandths() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = final_layer_init(16, 16, &mut rng);
        assert!(m.data().iter().all(|v| v.abs() <= 3e-3));
    }

    #[test]
    fn fixed_seed_reproduces_the_matrix() {
        let a = fanin_init(5, 7, &mut ChaCha8Rng::seed_from_u64(42));
        let b = fanin_init(5, 7, &mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
    }
}

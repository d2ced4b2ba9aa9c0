//! Dense complex kernels shared by the optimizer: Hermitian eigen-solves,
//! ridge-guarded inverses and the power iteration used for the MM step size.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const J: C64 = C64::new(0.0, 1.0);

/// Condition number above which inverses are ridge-regularized.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Returns `(m + m^H) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (DVector<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Outcome of a guarded Hermitian inverse.
#[derive(Debug, Clone)]
pub struct GuardedInverse {
    pub inverse: CMatrix,
    /// Ridge added to the diagonal, zero when none was needed.
    pub ridge: f64,
    pub condition: f64,
}

/// Inverts a Hermitian PSD matrix. When its condition number exceeds
/// [`CONDITION_LIMIT`], `relative_ridge * trace / dim` is added to the
/// diagonal first.
pub fn guarded_hermitian_inverse(m: &CMatrix, relative_ridge: f64) -> GuardedInverse {
    let n = m.nrows();
    let (values, vectors) = hermitian_eigen(m);
    let max = values.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
    let min = values.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    let mut ridge = 0.0;
    if condition > CONDITION_LIMIT || !condition.is_finite() {
        let trace: f64 = (0..n).map(|i| m[(i, i)].re).sum();
        ridge = relative_ridge * trace.abs() / n as f64;
        if ridge == 0.0 {
            ridge = relative_ridge.max(f64::MIN_POSITIVE);
        }
    }
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        let denom = (v + ridge).max(f64::MIN_POSITIVE);
        let mut col = scaled.column_mut(j);
        col.unscale_mut(denom);
    }
    let inverse = hermitian_part(&(scaled * vectors.adjoint()));
    GuardedInverse {
        inverse,
        ridge,
        condition,
    }
}

/// Smallest and largest eigenvalue of a Hermitian matrix.
pub fn hermitian_extremes(m: &CMatrix) -> (f64, f64) {
    let (values, _) = hermitian_eigen(m);
    (values[0], values[values.len() - 1])
}

/// Result of [`power_iteration`].
#[derive(Debug, Clone)]
pub struct EigenEstimate {
    pub value: f64,
    pub vector: CVector,
    pub iterations: usize,
    pub converged: bool,
    /// `‖S v − λ v‖` for the returned pair.
    pub residual: f64,
}

/// Power iteration for the dominant eigenpair of a Hermitian PSD matrix.
///
/// The start vector is drawn from a fixed-seed generator so results are
/// reproducible. Convergence is declared when successive Rayleigh quotients
/// agree to `tol` relative.
pub fn power_iteration(m: &CMatrix, tol: f64, max_iter: usize) -> EigenEstimate {
    let n = m.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_e16e);
    let mut v = CVector::from_fn(n, |_, _| {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let norm = v.norm();
    v.unscale_mut(norm);
    let mut value = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=max_iter {
        iterations = it;
        let w = m * &v;
        let rayleigh = v.dotc(&w).re;
        let wn = w.norm();
        if wn == 0.0 {
            value = 0.0;
            converged = true;
            break;
        }
        v = w.unscale(wn);
        if it > 1 && (rayleigh - value).abs() <= tol * rayleigh.abs().max(f64::MIN_POSITIVE) {
            value = rayleigh;
            converged = true;
            break;
        }
        value = rayleigh;
    }
    let mv = m * &v;
    let rayleigh = v.dotc(&mv).re;
    let residual = (&mv - v.scale(rayleigh)).norm();
    EigenEstimate {
        value: rayleigh.max(value),
        vector: v,
        iterations,
        converged,
        residual,
    }
}

/// `log2 |I + X|` for Hermitian PSD `X`, via eigenvalues.
pub fn log2_det_identity_plus(x: &CMatrix) -> f64 {
    let (values, _) = hermitian_eigen(x);
    values.iter().map(|&v| (1.0 + v.max(0.0)).log2()).sum()
}

/// `log2 |X|` for Hermitian PD `X`.
pub fn log2_det_hermitian(x: &CMatrix) -> f64 {
    let (values, _) = hermitian_eigen(x);
    values.iter().map(|&v| v.log2()).sum()
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest entry-wise deviation from Hermitian symmetry.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().fold(0.0, |a, z| a.max(z.norm()))
}

/// Random Hermitian PSD matrix `X X^H` with `X` of size `n x rank`.
pub fn random_hermitian_psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> CMatrix {
    let x = CMatrix::from_fn(n, rank, |_, _| {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    hermitian_part(&(&x * x.adjoint()))
}

//! Restarted Lanczos with full reorthogonalization for the lowest eigenpair.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::EigenError;

/// Tuning for [`lowest_eigenpair`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct LanczosParams {
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Converged when `‖Ax − θx‖ ≤ tol·max(1, |θ|)`.
    pub tol: f64,
    pub seed: u64,
}

pub(crate) struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for q in basis {
        let c = dot(q, v);
        axpy(-c, q, v);
    }
}

/// Lowest eigenpair of the symmetric operator `apply` on the complement of `deflate`
/// (whose vectors must be orthonormal).
pub(crate) fn lowest_eigenpair(
    dim: usize,
    apply: impl Fn(&[f64], &mut [f64]),
    deflate: &[Vec<f64>],
    params: &LanczosParams,
) -> Result<Eigenpair, EigenError> {
    let free = dim - deflate.len();
    if free == 0 {
        return Err(EigenError::Lanczos("no states left after deflation".into()));
    }
    let m_max = params.krylov_dim.clamp(2, free);
    let mut rng = ChaCha20Rng::seed_from_u64(params.seed);
    let mut start: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    project_out(&mut start, deflate);
    let n0 = norm(&start);
    start.iter_mut().for_each(|x| *x /= n0);

    let mut w = vec![0.0; dim];
    let mut best_residual = f64::INFINITY;
    for _ in 0..=params.max_restarts {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::with_capacity(m_max);
        let mut beta: Vec<f64> = Vec::with_capacity(m_max);
        loop {
            let j = basis.len() - 1;
            apply(&basis[j], &mut w);
            project_out(&mut w, deflate);
            let a = dot(&basis[j], &w);
            alpha.push(a);
            // Two passes of classical Gram–Schmidt keep the basis orthogonal to roundoff.
            project_out(&mut w, &basis);
            project_out(&mut w, &basis);
            project_out(&mut w, deflate);
            let b = norm(&w);
            if basis.len() == m_max || b <= 1e-14 * a.abs().max(1.0) {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }

        let m = alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (k, _) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty tridiagonal");
        let mut x = vec![0.0; dim];
        for (i, q) in basis.iter().enumerate() {
            axpy(eig.eigenvectors[(i, k)], q, &mut x);
        }
        project_out(&mut x, deflate);
        let nx = norm(&x);
        x.iter_mut().for_each(|v| *v /= nx);

        apply(&x, &mut w);
        project_out(&mut w, deflate);
        let value = dot(&x, &w);
        axpy(-value, &x, &mut w);
        let residual = norm(&w);
        if !residual.is_finite() {
            return Err(EigenError::NonFinite);
        }
        best_residual = best_residual.min(residual);
        if residual <= params.tol * value.abs().max(1.0) {
            return Ok(Eigenpair { value, vector: x, residual });
        }
        start = x;
    }
    Err(EigenError::NotConverged { residual: best_residual, restarts: params.max_restarts })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> LanczosParams {
        LanczosParams { krylov_dim: 40, max_restarts: 50, tol: 1e-10, seed: 3 }
    }

    #[test]
    fn diagonal_operator() {
        let d: Vec<f64> = (0..200).map(|i| (i as f64 * 0.37).sin() + i as f64 * 0.01).collect();
        let apply = |x: &[f64], y: &mut [f64]| {
            y.iter_mut().zip(x).zip(&d).for_each(|((yi, xi), di)| *yi = di * xi);
        };
        let lowest = d.iter().copied().fold(f64::INFINITY, f64::min);
        let p = lowest_eigenpair(200, apply, &[], &params()).unwrap();
        assert!((p.value - lowest).abs() < 1e-12);
        let second = lowest_eigenpair(200, apply, std::slice::from_ref(&p.vector), &params()).unwrap();
        let mut sorted = d.clone();
        sorted.sort_by(f64::total_cmp);
        assert!((second.value - sorted[1]).abs() < 1e-12);
    }

    #[test]
    fn path_graph_laplacian() {
        let n = 60;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let mut v = 2.0 * x[i];
                if i > 0 {
                    v -= x[i - 1];
                }
                if i + 1 < n {
                    v -= x[i + 1];
                }
                y[i] = v;
            }
        };
        let p = lowest_eigenpair(n, apply, &[], &params()).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!((p.value - exact).abs() < 1e-12, "{} vs {exact}", p.value);
        assert!(p.residual <= 1e-10);
    }
}

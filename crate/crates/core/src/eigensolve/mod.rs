//! Ground states and spectra of `H(λ) = H_loc + λ·H_int`.
//!
//! Operators are real symmetric, so eigenvectors are real and the gauge is a
//! sign: the largest-magnitude component is made nonnegative.
//!
//! The dense path diagonalizes each invariant sector of `H_int` separately
//! (for XX chains these are the two parity sectors) and only computes
//! eigenvectors for the sector holding the ground state.

mod lanczos;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use crate::model::OperatorPair;
use lanczos::{lowest_eigenpair, LanczosParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("dimension {dim} exceeds the dense cap {cap}")]
    DimensionExceedsCap { dim: usize, cap: usize },
    #[error("Lanczos did not converge after {restarts} restarts (best residual {residual:e})")]
    NotConverged { residual: f64, restarts: usize },
    #[error("Lanczos failure: {0}")]
    Lanczos(String),
    #[error("non-finite value in Hamiltonian or eigensolution")]
    NonFinite,
}

/// Which algorithm [`ground_state_with`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverMethod {
    /// Ground-state solves go dense up to `ground_dense_cap` and use Lanczos beyond.
    #[default]
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Largest dimension diagonalized densely for full spectra.
    pub dense_cap: usize,
    /// Largest dimension for which [`SolverMethod::Auto`] finds ground states densely.
    pub ground_dense_cap: usize,
    /// Ground state counts as degenerate when `gap < degeneracy_tol·max(1, |E₀|)`.
    pub degeneracy_tol: f64,
    /// Lanczos residual target, relative to `max(1, |E|)`.
    pub lanczos_tol: f64,
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Seed of the Lanczos start vector.
    pub seed: u64,
    pub method: SolverMethod,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            dense_cap: 4096,
            ground_dense_cap: 512,
            degeneracy_tol: 1e-8,
            lanczos_tol: 1e-10,
            krylov_dim: 80,
            max_restarts: 200,
            seed: 0x5eed,
            method: SolverMethod::Auto,
        }
    }
}

impl EigenOptions {
    fn uses_dense(&self, dim: usize) -> bool {
        match self.method {
            SolverMethod::Auto => dim <= self.ground_dense_cap.min(self.dense_cap),
            SolverMethod::Dense => true,
            SolverMethod::Lanczos => false,
        }
    }

    fn lanczos(&self, seed_offset: u64) -> LanczosParams {
        LanczosParams {
            krylov_dim: self.krylov_dim,
            max_restarts: self.max_restarts,
            tol: self.lanczos_tol,
            seed: self.seed.wrapping_add(seed_offset),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundSolution {
    pub lambda: f64,
    pub energy: f64,
    /// Unit-norm, gauge-fixed ground vector in the stored basis.
    pub vector: Vec<f64>,
    /// `E₁ − E₀`; infinite for a one-dimensional space.
    pub gap: f64,
    pub degenerate: bool,
    /// `‖H(λ)v − E₀v‖`.
    pub residual: f64,
}

/// Eigenpairs of `H(λ)` on a set of stored-basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub lambda: f64,
    /// Ascending.
    pub energies: Vec<f64>,
    /// Column `n` is the eigenvector of `energies[n]`, rows indexed by `support`.
    pub states: DMatrix<f64>,
    /// Stored-basis index of each row of `states`.
    pub support: Vec<usize>,
    /// Whether `support` covers the whole space.
    pub complete: bool,
}

impl SpectralData {
    /// Eigenvector `n` embedded in the full stored basis.
    pub fn state(&self, n: usize, dim: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        for (r, &i) in self.support.iter().enumerate() {
            v[i] = self.states[(r, n)];
        }
        v
    }

    /// `max |SᵀS − I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.states.transpose() * &self.states;
        let mut worst = 0.0f64;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }
}

/// Flips the sign of `v` so its largest-magnitude component (first on ties) is positive.
pub fn gauge_fix(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn check_lambda(lambda: f64) -> Result<(), EigenError> {
    if lambda.is_finite() {
        Ok(())
    } else {
        Err(EigenError::NonFinite)
    }
}

fn residual_norm(ops: &OperatorPair, lambda: f64, energy: f64, v: &[f64]) -> f64 {
    let mut hv = vec![0.0; v.len()];
    ops.apply_hamiltonian(lambda, v, &mut hv);
    hv.iter().zip(v).map(|(h, x)| (h - energy * x).powi(2)).sum::<f64>().sqrt()
}

fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn block_eigenvalues(ops: &OperatorPair, lambda: f64, block: &[usize]) -> Vec<f64> {
    if block.len() == 1 {
        return vec![ops.h_loc()[block[0]]];
    }
    let mut v: Vec<f64> = ops.dense_block(lambda, block).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Lowest two eigenvalues per sector and the index of the ground sector.
fn sector_minima(ops: &OperatorPair, lambda: f64) -> Result<(usize, f64, f64), EigenError> {
    let mut ground = (usize::MAX, f64::INFINITY);
    let mut lows = Vec::new();
    for (b, block) in ops.blocks().iter().enumerate() {
        let ev = block_eigenvalues(ops, lambda, block);
        if ev.iter().any(|e| !e.is_finite()) {
            return Err(EigenError::NonFinite);
        }
        if ev[0] < ground.1 {
            ground = (b, ev[0]);
        }
        lows.extend(ev.into_iter().take(2));
    }
    lows.sort_by(f64::total_cmp);
    let second = lows.get(1).copied().unwrap_or(f64::INFINITY);
    Ok((ground.0, ground.1, second))
}

fn dense_ground_sector(
    ops: &OperatorPair,
    lambda: f64,
    opts: &EigenOptions,
) -> Result<(GroundSolution, SpectralData), EigenError> {
    let (b, _, second) = sector_minima(ops, lambda)?;
    let support = ops.blocks()[b].clone();
    let (energies, mut states) = if support.len() == 1 {
        (vec![ops.h_loc()[support[0]]], DMatrix::from_element(1, 1, 1.0))
    } else {
        sorted_eigen(ops.dense_block(lambda, &support))
    };
    for n in 0..states.ncols() {
        let mut col: Vec<f64> = states.column(n).iter().copied().collect();
        gauge_fix(&mut col);
        states.set_column(n, &nalgebra::DVector::from_vec(col));
    }
    let spectral = SpectralData { lambda, energies, states, support, complete: ops.blocks().len() == 1 };
    let energy = spectral.energies[0];
    let vector = spectral.state(0, ops.dim());
    let gap = second - energy;
    let solution = GroundSolution {
        lambda,
        energy,
        residual: residual_norm(ops, lambda, energy, &vector),
        vector,
        gap,
        degenerate: gap < opts.degeneracy_tol * energy.abs().max(1.0),
    };
    Ok((solution, spectral))
}

/// Eigenvector of the symmetric matrix `m` for its lowest eigenvalue `e0`, by
/// shifted inverse iteration.
type ShiftedSolve = Box<dyn Fn(&DVector<f64>) -> Option<DVector<f64>>>;

fn inverse_iteration(m: DMatrix<f64>, e0: f64) -> Vec<f64> {
    let n = m.nrows();
    let shift = e0 - 1e-9 * e0.abs().max(1.0);
    let shifted = m - DMatrix::identity(n, n) * shift;
    let solve: ShiftedSolve = match shifted.clone().cholesky() {
        Some(ch) => Box::new(move |v| Some(ch.solve(v))),
        None => {
            let lu = shifted.lu();
            Box::new(move |v| lu.solve(v))
        }
    };
    // Deterministic start with no special symmetry.
    let mut v = DVector::from_fn(n, |i, _| 1.0 + ((i as f64 + 1.0) * 0.618_033_988_749_895).fract());
    v /= v.norm();
    for _ in 0..6 {
        let Some(mut w) = solve(&v) else { break };
        let norm = w.norm();
        if !norm.is_finite() || norm == 0.0 {
            break;
        }
        w /= norm;
        if w.dot(&v) < 0.0 {
            w = -w;
        }
        let change = (&w - &v).norm();
        v = w;
        if change < 1e-15 * n as f64 {
            break;
        }
    }
    v.iter().copied().collect()
}

/// Ground state from sector eigenvalues plus inverse iteration in the ground sector.
fn dense_ground_only(ops: &OperatorPair, lambda: f64, opts: &EigenOptions) -> Result<GroundSolution, EigenError> {
    let (b, energy, second) = sector_minima(ops, lambda)?;
    let support = &ops.blocks()[b];
    let mut vector = vec![0.0; ops.dim()];
    if lambda == 0.0 {
        vector[ops.local_ground_index()] = 1.0;
    } else {
        let local =
            if support.len() == 1 { vec![1.0] } else { inverse_iteration(ops.dense_block(lambda, support), energy) };
        for (&i, x) in support.iter().zip(local) {
            vector[i] = x;
        }
    }
    gauge_fix(&mut vector);
    let gap = second - energy;
    Ok(GroundSolution {
        lambda,
        energy,
        residual: residual_norm(ops, lambda, energy, &vector),
        vector,
        gap,
        degenerate: gap < opts.degeneracy_tol * energy.abs().max(1.0),
    })
}

fn lanczos_ground(ops: &OperatorPair, lambda: f64, opts: &EigenOptions) -> Result<GroundSolution, EigenError> {
    let dim = ops.dim();
    let apply = |x: &[f64], y: &mut [f64]| ops.apply_hamiltonian(lambda, x, y);
    let mut first = lowest_eigenpair(dim, apply, &[], &opts.lanczos(0))?;
    gauge_fix(&mut first.vector);
    let gap = if dim > 1 {
        let second = lowest_eigenpair(dim, apply, std::slice::from_ref(&first.vector), &opts.lanczos(1))?;
        second.value - first.value
    } else {
        f64::INFINITY
    };
    Ok(GroundSolution {
        lambda,
        energy: first.value,
        degenerate: gap < opts.degeneracy_tol * first.value.abs().max(1.0),
        vector: first.vector,
        gap,
        residual: first.residual,
    })
}

/// Ground state with default options.
pub fn ground_state(ops: &OperatorPair, lambda: f64) -> Result<GroundSolution, EigenError> {
    ground_state_with(ops, lambda, &EigenOptions::default())
}

pub fn ground_state_with(ops: &OperatorPair, lambda: f64, opts: &EigenOptions) -> Result<GroundSolution, EigenError> {
    check_lambda(lambda)?;
    if opts.uses_dense(ops.dim()) {
        dense_ground_only(ops, lambda, opts)
    } else {
        lanczos_ground(ops, lambda, opts)
    }
}

/// `E₀(λ)` only. The dense path skips eigenvectors; the Lanczos path skips the gap.
pub fn ground_energy(ops: &OperatorPair, lambda: f64, opts: &EigenOptions) -> Result<f64, EigenError> {
    check_lambda(lambda)?;
    if lambda == 0.0 {
        return Ok(ops.local_ground_energy());
    }
    if opts.uses_dense(ops.dim()) {
        Ok(sector_minima(ops, lambda)?.1)
    } else {
        let apply = |x: &[f64], y: &mut [f64]| ops.apply_hamiltonian(lambda, x, y);
        Ok(lowest_eigenpair(ops.dim(), apply, &[], &opts.lanczos(0))?.value)
    }
}

/// Ground state together with every eigenpair of its `H_int` sector.
///
/// The sector contains every state `H_int` connects to the ground state, so the
/// spectral sums over `⟨n|H_int|0⟩` computed from it are exact.
pub fn solve_ground_sector(
    ops: &OperatorPair,
    lambda: f64,
    opts: &EigenOptions,
) -> Result<(GroundSolution, SpectralData), EigenError> {
    check_lambda(lambda)?;
    if ops.dim() > opts.dense_cap {
        return Err(EigenError::DimensionExceedsCap { dim: ops.dim(), cap: opts.dense_cap });
    }
    dense_ground_sector(ops, lambda, opts)
}

/// All eigenpairs of `H(λ)` in the full stored basis.
pub fn full_spectrum(ops: &OperatorPair, lambda: f64) -> Result<SpectralData, EigenError> {
    full_spectrum_with(ops, lambda, &EigenOptions::default())
}

pub fn full_spectrum_with(ops: &OperatorPair, lambda: f64, opts: &EigenOptions) -> Result<SpectralData, EigenError> {
    check_lambda(lambda)?;
    let dim = ops.dim();
    if dim > opts.dense_cap {
        return Err(EigenError::DimensionExceedsCap { dim, cap: opts.dense_cap });
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(dim);
    for block in ops.blocks() {
        let (values, vectors) = sorted_eigen(ops.dense_block(lambda, block));
        for (n, e) in values.into_iter().enumerate() {
            let mut v = vec![0.0; dim];
            for (r, &i) in block.iter().enumerate() {
                v[i] = vectors[(r, n)];
            }
            gauge_fix(&mut v);
            pairs.push((e, v));
        }
    }
    if pairs.iter().any(|(e, _)| !e.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let states = DMatrix::from_fn(dim, dim, |r, c| pairs[c].1[r]);
    Ok(SpectralData {
        lambda,
        energies: pairs.into_iter().map(|p| p.0).collect(),
        states,
        support: (0..dim).collect(),
        complete: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_spin_operators, SpinChainSpec};

    #[test]
    fn single_qubit_ground() {
        let ops = build_spin_operators(&SpinChainSpec::single_qubit_x(1.0)).unwrap();
        let g = ground_state(&ops, 1.0).unwrap();
        assert!((g.energy + 0.5f64.sqrt()).abs() < 1e-14);
        assert!((g.gap - 2f64.sqrt()).abs() < 1e-14);
        assert!(!g.degenerate);
        assert!(g.residual < 1e-14);
    }

    #[test]
    fn zero_coupling_is_local_ground() {
        let ops = build_spin_operators(&SpinChainSpec::two_qubits(1.0)).unwrap();
        let g = ground_state(&ops, 0.0).unwrap();
        assert_eq!(g.energy, -1.0);
        assert_eq!(g.vector, vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn ground_only_matches_sector_solve() {
        let ops = build_spin_operators(&SpinChainSpec::random(8, 1.0, 11).unwrap()).unwrap();
        let opts = EigenOptions::default();
        for l in [0.3, 1.3, 4.0] {
            let quick = ground_state_with(&ops, l, &opts).unwrap();
            let (full, _) = solve_ground_sector(&ops, l, &opts).unwrap();
            assert_eq!(quick.energy, full.energy);
            let dev = quick.vector.iter().zip(&full.vector).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(dev < 1e-12, "λ={l}: {dev:e}");
            assert!(quick.residual < 1e-12);
        }
    }

    #[test]
    fn two_qubit_spectrum() {
        let ops = build_spin_operators(&SpinChainSpec::two_qubits(1.0)).unwrap();
        let l = 0.8f64;
        let s = full_spectrum(&ops, l).unwrap();
        let r = (1.0 + l * l).sqrt();
        for (e, x) in s.energies.iter().zip([-r, -l, l, r]) {
            assert!((e - x).abs() < 1e-14);
        }
        assert!(s.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn gauge_fix_is_idempotent() {
        let mut v = vec![0.1, -0.9, 0.3];
        gauge_fix(&mut v);
        assert_eq!(v, vec![-0.1, 0.9, -0.3]);
        let once = v.clone();
        gauge_fix(&mut v);
        assert_eq!(v, once);
    }

    #[test]
    fn lanczos_matches_dense_on_ring() {
        let ops = build_spin_operators(&SpinChainSpec::ring(8, 1.0, 1.0).unwrap()).unwrap();
        let dense = ground_state(&ops, 0.7).unwrap();
        let opts = EigenOptions { method: SolverMethod::Lanczos, ..Default::default() };
        let lz = ground_state_with(&ops, 0.7, &opts).unwrap();
        assert!((dense.energy - lz.energy).abs() < 1e-10);
        assert!((dense.gap - lz.gap).abs() < 1e-8);
        let overlap: f64 = dense.vector.iter().zip(&lz.vector).map(|(a, b)| a * b).sum();
        assert!((overlap - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sector_spectrum_covers_ground_block() {
        let ops = build_spin_operators(&SpinChainSpec::two_qubits(1.0)).unwrap();
        let (g, s) = solve_ground_sector(&ops, 1.0, &EigenOptions::default()).unwrap();
        assert_eq!(s.support, vec![0, 3]);
        assert!(!s.complete);
        assert_eq!(g.vector, s.state(0, 4));
        assert!((g.gap - (2f64.sqrt() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn rejects_nan_coupling() {
        let ops = build_spin_operators(&SpinChainSpec::two_qubits(1.0)).unwrap();
        assert_eq!(ground_state(&ops, f64::NAN), Err(EigenError::NonFinite));
    }
}

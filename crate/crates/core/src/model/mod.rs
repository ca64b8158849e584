//! Declarative engine models and their materialized operator pairs.
//!
//! Spin models use the computational (σ^z product) basis. Qubit 1 is the most
//! significant bit of the basis index, and bit value 0 is the σ^z = +1 state,
//! so for two qubits `H_loc = (ω/2)(σ^z_1 + σ^z_2)` has diagonal `(ω, 0, 0, −ω)`.

mod config;
mod fixtures;
mod operators;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

pub use config::{parse_model_config, ModelConfig, RandomCouplings};
pub use fixtures::{fixture_10q, FIXTURE_10Q_COUPLINGS};
pub use operators::{
    validate_interaction, FlipTerm, Interaction, OperatorPair, SparseSymmetric, HERMITIAN_TOL,
};

/// Largest qubit count accepted by [`build_spin_operators`].
pub const DEFAULT_MAX_QUBITS: usize = 20;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{n_qubits} qubits exceeds the cap of {cap}")]
    TooManyQubits { n_qubits: usize, cap: usize },
    #[error("model needs at least {min} qubits, got {got}")]
    TooFewQubits { min: usize, got: usize },
    #[error("qubit gap must be positive and finite, got {0}")]
    BadGap(f64),
    #[error("coupling ({j}, {k}) invalid for {n} qubits: need 1 <= j < k <= n")]
    BadCouplingIndex { j: usize, k: usize, n: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("operator dimensions differ: H_loc {loc}, H_int {int}")]
    DimensionMismatch { loc: usize, int: usize },
    #[error("operator has no entries")]
    EmptyOperator,
    #[error("non-finite operator entry")]
    NonFinite,
    #[error("H_int not Hermitian at ({row}, {col}): defect {defect:e}")]
    NotHermitian { row: usize, col: usize, defect: f64 },
    #[error("model config: {0}")]
    Config(String),
}

/// Which Hamiltonian family a [`SpinChainSpec`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinModelKind {
    /// `(ω/2)Σσ^z_j + (λ/2)Σ_{j<k} g_jk σ^x_j σ^x_k`.
    SpinChain,
    /// One qubit in a transverse field: `(ω/2)σ^z + (λ/2)σ^x`.
    SingleQubitX,
}

/// Pairwise couplings `g_jk` for `1 ≤ j < k ≤ n`, stored as a packed upper triangle.
///
/// Qubit labels start at 1, matching config files.
#[derive(Debug, Clone, PartialEq)]
pub struct Couplings {
    n: usize,
    values: Vec<f64>,
}

impl Couplings {
    pub fn zeros(n: usize) -> Self {
        Self { n, values: vec![0.0; n * n.saturating_sub(1) / 2] }
    }

    pub fn from_triples(
        n: usize,
        triples: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, ModelError> {
        let mut c = Self::zeros(n);
        for (j, k, g) in triples {
            c.set(j, k, g)?;
        }
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    fn slot(&self, j: usize, k: usize) -> Result<usize, ModelError> {
        if j == 0 || j >= k || k > self.n {
            return Err(ModelError::BadCouplingIndex { j, k, n: self.n });
        }
        // Rows 1..j-1 hold (n-1) + (n-2) + ... entries.
        let (j0, k0) = (j - 1, k - 1);
        Ok(j0 * (2 * self.n - j0 - 1) / 2 + (k0 - j0 - 1))
    }

    /// `g_jk`; zero for pairs outside the upper triangle.
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.slot(j, k).map(|s| self.values[s]).unwrap_or(0.0)
    }

    pub fn set(&mut self, j: usize, k: usize, g: f64) -> Result<(), ModelError> {
        if !g.is_finite() {
            return Err(ModelError::NonFinite);
        }
        let s = self.slot(j, k)?;
        self.values[s] = g;
        Ok(())
    }

    /// All `(j, k, g_jk)` in row-major order, zeros included.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        (1..=n)
            .flat_map(move |j| (j + 1..=n).map(move |k| (j, k)))
            .zip(self.values.iter().copied())
            .map(|((j, k), g)| (j, k, g))
    }

    /// `√(Σ_{j<k} g_jk²)`.
    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&g| g == 0.0)
    }
}

/// Declarative spin-engine model.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinChainSpec {
    pub kind: SpinModelKind,
    pub n_qubits: usize,
    /// Qubit gap ω (energy units, ħ = 1).
    pub omega: f64,
    pub couplings: Couplings,
    /// Seed used to generate the couplings, kept for provenance.
    pub seed: Option<u64>,
}

impl SpinChainSpec {
    pub fn spin_chain(omega: f64, couplings: Couplings) -> Self {
        Self {
            kind: SpinModelKind::SpinChain,
            n_qubits: couplings.n_qubits(),
            omega,
            couplings,
            seed: None,
        }
    }

    pub fn single_qubit_x(omega: f64) -> Self {
        Self {
            kind: SpinModelKind::SingleQubitX,
            n_qubits: 1,
            omega,
            couplings: Couplings::zeros(1),
            seed: None,
        }
    }

    /// `(ω/2)(σ^z_1 + σ^z_2) + λσ^x_1σ^x_2`, i.e. `g_12 = 2`.
    pub fn two_qubits(omega: f64) -> Self {
        let couplings = Couplings::from_triples(2, [(1, 2, 2.0)]).expect("valid pair");
        Self::spin_chain(omega, couplings)
    }

    /// Uniform ring with nearest-neighbour coupling `g` (including the `(1, n)` bond).
    pub fn ring(n_qubits: usize, omega: f64, g: f64) -> Result<Self, ModelError> {
        if n_qubits < 3 {
            return Err(ModelError::TooFewQubits { min: 3, got: n_qubits });
        }
        let mut c = Couplings::zeros(n_qubits);
        for j in 1..n_qubits {
            c.set(j, j + 1, g)?;
        }
        c.set(1, n_qubits, g)?;
        Ok(Self::spin_chain(omega, c))
    }

    /// All-to-all chain with [`random_couplings`].
    pub fn random(n_qubits: usize, omega: f64, seed: u64) -> Result<Self, ModelError> {
        let mut spec = Self::spin_chain(omega, random_couplings(n_qubits, seed)?);
        spec.seed = Some(seed);
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }
}

/// Materializes `H_loc = (ω/2)Σ_j σ^z_j` and `H_int = (1/2)Σ_{j<k} g_jk σ^x_j σ^x_k`
/// (or `σ^x/2` for [`SpinModelKind::SingleQubitX`]).
pub fn build_spin_operators(spec: &SpinChainSpec) -> Result<OperatorPair, ModelError> {
    build_spin_operators_capped(spec, DEFAULT_MAX_QUBITS)
}

pub fn build_spin_operators_capped(
    spec: &SpinChainSpec,
    max_qubits: usize,
) -> Result<OperatorPair, ModelError> {
    let n = spec.n_qubits;
    if n == 0 {
        return Err(ModelError::TooFewQubits { min: 1, got: 0 });
    }
    if n > max_qubits {
        return Err(ModelError::TooManyQubits { n_qubits: n, cap: max_qubits });
    }
    if !(spec.omega.is_finite() && spec.omega > 0.0) {
        return Err(ModelError::BadGap(spec.omega));
    }
    if spec.couplings.n_qubits() != n && spec.kind == SpinModelKind::SpinChain {
        return Err(ModelError::Config(format!(
            "coupling matrix is for {} qubits, spec has {n}",
            spec.couplings.n_qubits()
        )));
    }
    let dim = 1usize << n;
    let h_loc: Vec<f64> = (0..dim)
        .map(|i| 0.5 * spec.omega * (n as f64 - 2.0 * i.count_ones() as f64))
        .collect();
    let bit = |j: usize| 1usize << (n - j);
    let terms = match spec.kind {
        SpinModelKind::SingleQubitX => {
            if n != 1 {
                return Err(ModelError::Config(format!(
                    "single_qubit_x needs exactly one qubit, got {n}"
                )));
            }
            vec![FlipTerm { mask: 1, coeff: 0.5 }]
        }
        SpinModelKind::SpinChain => {
            if spec.couplings.is_zero() {
                log::warn!("all couplings are zero; the engine is trivial");
            }
            spec.couplings
                .iter()
                .filter(|&(_, _, g)| g != 0.0)
                .map(|(j, k, g)| FlipTerm { mask: bit(j) | bit(k), coeff: 0.5 * g })
                .collect()
        }
    };
    OperatorPair::new(h_loc, Interaction::Flips(terms))
}

/// Couplings drawn i.i.d. uniform on `[−1, 1]`, then rescaled to unit l2 norm.
///
/// The generator is ChaCha20 seeded through `seed_from_u64`; draws are taken in
/// row-major `(j, k)` order, so output is a pure function of `(n_qubits, seed)`.
pub fn random_couplings(n_qubits: usize, seed: u64) -> Result<Couplings, ModelError> {
    if n_qubits < 2 {
        return Err(ModelError::TooFewQubits { min: 2, got: n_qubits });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut c = Couplings::zeros(n_qubits);
    loop {
        for v in c.values.iter_mut() {
            *v = rng.random_range(-1.0..=1.0);
        }
        let norm = c.l2_norm();
        if norm > 0.0 {
            c.values.iter_mut().for_each(|v| *v /= norm);
            return Ok(c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_qubit_operators_by_hand() {
        let ops = build_spin_operators(&SpinChainSpec::two_qubits(1.0)).unwrap();
        assert_eq!(ops.h_loc(), &[1.0, 0.0, 0.0, -1.0]);
        let m = ops.dense_int();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i + j == 3 { 1.0 } else { 0.0 };
                assert_eq!(m[(i, j)], expect, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn single_qubit_x_is_half_pauli_x() {
        let ops = build_spin_operators(&SpinChainSpec::single_qubit_x(1.0)).unwrap();
        assert_eq!(ops.h_loc(), &[0.5, -0.5]);
        let m = ops.dense_int();
        assert_eq!((m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]), (0.0, 0.5, 0.5, 0.0));
    }

    #[test]
    fn qubit_one_is_most_significant_bit() {
        let c = Couplings::from_triples(3, [(1, 2, 1.0)]).unwrap();
        let ops = build_spin_operators(&SpinChainSpec::spin_chain(1.0, c)).unwrap();
        match ops.h_int() {
            Interaction::Flips(t) => assert_eq!(t[0].mask, 0b110),
            _ => unreachable!(),
        }
    }

    #[test]
    fn cap_is_enforced() {
        let spec = SpinChainSpec::spin_chain(1.0, Couplings::zeros(5));
        let err = build_spin_operators_capped(&spec, 4).unwrap_err();
        assert!(matches!(err, ModelError::TooManyQubits { n_qubits: 5, cap: 4 }));
    }

    #[test]
    fn zero_couplings_build_trivial_engine() {
        let spec = SpinChainSpec::spin_chain(1.0, Couplings::zeros(3));
        let ops = build_spin_operators(&spec).unwrap();
        assert_eq!(ops.int_norm_bound(), 0.0);
    }

    #[test]
    fn coupling_slots_are_unique() {
        let n = 6;
        let mut seen = std::collections::HashSet::new();
        let c = Couplings::zeros(n);
        for j in 1..=n {
            for k in j + 1..=n {
                assert!(seen.insert(c.slot(j, k).unwrap()));
            }
        }
        assert_eq!(seen.len(), n * (n - 1) / 2);
        assert!(c.slot(2, 2).is_err());
        assert!(c.slot(0, 3).is_err());
        assert!(c.slot(2, 7).is_err());
    }

    #[test]
    fn two_qubit_random_coupling_is_unit() {
        for seed in 0..20 {
            let c = random_couplings(2, seed).unwrap();
            assert!((c.get(1, 2).abs() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn random_couplings_deterministic_and_normalized() {
        let a = random_couplings(10, 42).unwrap();
        let b = random_couplings(10, 42).unwrap();
        assert_eq!(a, b);
        assert!((a.l2_norm() - 1.0).abs() < 1e-12);
        assert_ne!(a, random_couplings(10, 43).unwrap());
        assert!(random_couplings(1, 0).is_err());
    }
}

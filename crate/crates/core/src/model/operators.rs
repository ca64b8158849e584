//! Operator storage for `H(λ) = H_loc + λ·H_int` in the local product basis.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use nalgebra::DMatrix;

use super::ModelError;

/// Elementwise tolerance for the Hermiticity and zero-diagonal invariants.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// `coeff · X_mask`, where `X_mask` flips every bit set in `mask`.
///
/// `σ^x_j σ^x_k` is the flip of two bits, `σ^x_j` alone a flip of one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipTerm {
    pub mask: usize,
    pub coeff: f64,
}

/// Real symmetric sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymmetric {
    /// Builds the matrix from `(row, col, value)` triplets. Duplicates are summed;
    /// both triangles must be supplied.
    pub fn from_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, ModelError> {
        let mut map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (i, j, v) in triplets {
            if i >= dim || j >= dim {
                return Err(ModelError::IndexOutOfRange { index: i.max(j), dim });
            }
            if !v.is_finite() {
                return Err(ModelError::NonFinite);
            }
            *map.entry((i, j)).or_insert(0.0) += v;
        }
        for (&(i, j), &v) in &map {
            let mirror = map.get(&(j, i)).copied().unwrap_or(0.0);
            if (v - mirror).abs() > HERMITIAN_TOL {
                return Err(ModelError::NotHermitian { row: i, col: j, defect: (v - mirror).abs() });
            }
        }
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(map.len());
        let mut vals = Vec::with_capacity(map.len());
        for (&(i, j), &v) in &map {
            row_ptr[i + 1] += 1;
            cols.push(j);
            vals.push(v);
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self { dim, row_ptr, cols, vals })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }
}

/// The interaction operator `H_int`.
#[derive(Debug, Clone, PartialEq)]
pub enum Interaction {
    /// Sum of bit-flip terms; one coordinate list per term, generated on the fly.
    Flips(Vec<FlipTerm>),
    /// Explicit sparse matrix.
    Sparse(SparseSymmetric),
}

/// The pair `(H_loc, H_int)` with `H_loc` diagonal in the stored basis.
#[derive(Debug)]
pub struct OperatorPair {
    dim: usize,
    h_loc: Vec<f64>,
    h_int: Interaction,
    local_energies: Vec<f64>,
    local_order: Vec<usize>,
    blocks: OnceLock<Vec<Vec<usize>>>,
}

impl Clone for OperatorPair {
    fn clone(&self) -> Self {
        Self {
            dim: self.dim,
            h_loc: self.h_loc.clone(),
            h_int: self.h_int.clone(),
            local_energies: self.local_energies.clone(),
            local_order: self.local_order.clone(),
            blocks: OnceLock::new(),
        }
    }
}

impl OperatorPair {
    pub fn new(h_loc: Vec<f64>, h_int: Interaction) -> Result<Self, ModelError> {
        let dim = h_loc.len();
        if dim == 0 {
            return Err(ModelError::EmptyOperator);
        }
        if h_loc.iter().any(|e| !e.is_finite()) {
            return Err(ModelError::NonFinite);
        }
        match &h_int {
            Interaction::Flips(terms) => {
                for t in terms {
                    if !t.coeff.is_finite() {
                        return Err(ModelError::NonFinite);
                    }
                    if t.mask >= dim || !dim.is_power_of_two() {
                        return Err(ModelError::IndexOutOfRange { index: t.mask, dim });
                    }
                }
            }
            Interaction::Sparse(m) => {
                if m.dim() != dim {
                    return Err(ModelError::DimensionMismatch { loc: dim, int: m.dim() });
                }
            }
        }
        let mut local_order: Vec<usize> = (0..dim).collect();
        local_order.sort_by(|&a, &b| h_loc[a].total_cmp(&h_loc[b]).then(a.cmp(&b)));
        let local_energies = local_order.iter().map(|&i| h_loc[i]).collect();
        Ok(Self { dim, h_loc, h_int, local_energies, local_order, blocks: OnceLock::new() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Diagonal of `H_loc`, i.e. the local energies `E_n(0)` in stored order.
    pub fn h_loc(&self) -> &[f64] {
        &self.h_loc
    }

    pub fn h_int(&self) -> &Interaction {
        &self.h_int
    }

    /// `E_n(0)` sorted ascending.
    pub fn local_energies(&self) -> &[f64] {
        &self.local_energies
    }

    /// Permutation with `local_energies[k] == h_loc()[local_order()[k]]`.
    pub fn local_order(&self) -> &[usize] {
        &self.local_order
    }

    /// `E_0(0)`.
    pub fn local_ground_energy(&self) -> f64 {
        self.local_energies[0]
    }

    /// Stored-basis index of the lowest local state.
    pub fn local_ground_index(&self) -> usize {
        self.local_order[0]
    }

    /// Visits every stored nonzero `(j, value)` of row `i` of `H_int`.
    pub fn for_each_int_entry(&self, i: usize, mut f: impl FnMut(usize, f64)) {
        match &self.h_int {
            Interaction::Flips(terms) => {
                for t in terms {
                    f(i ^ t.mask, t.coeff);
                }
            }
            Interaction::Sparse(m) => {
                for (j, v) in m.row(i) {
                    f(j, v);
                }
            }
        }
    }

    /// `⟨i|H_int|i⟩`.
    pub fn int_diagonal(&self, i: usize) -> f64 {
        let mut d = 0.0;
        self.for_each_int_entry(i, |j, v| {
            if j == i {
                d += v;
            }
        });
        d
    }

    /// `y = H_int · x`.
    pub fn apply_int(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        y.iter_mut().for_each(|v| *v = 0.0);
        match &self.h_int {
            Interaction::Flips(terms) => {
                for t in terms {
                    for (i, yi) in y.iter_mut().enumerate() {
                        *yi += t.coeff * x[i ^ t.mask];
                    }
                }
            }
            Interaction::Sparse(m) => {
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi = m.row(i).map(|(j, v)| v * x[j]).sum();
                }
            }
        }
    }

    /// `y = (H_loc + λ·H_int) · x`.
    pub fn apply_hamiltonian(&self, lambda: f64, x: &[f64], y: &mut [f64]) {
        self.apply_int(x, y);
        for ((yi, &xi), &e) in y.iter_mut().zip(x).zip(&self.h_loc) {
            *yi = e * xi + lambda * *yi;
        }
    }

    /// Dense `H(λ)` restricted to the given stored-basis indices (sorted).
    pub fn dense_block(&self, lambda: f64, indices: &[usize]) -> DMatrix<f64> {
        let n = indices.len();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for (a, &i) in indices.iter().enumerate() {
            m[(a, a)] += self.h_loc[i];
            self.for_each_int_entry(i, |j, v| {
                if let Ok(b) = indices.binary_search(&j) {
                    m[(a, b)] += lambda * v;
                }
            });
        }
        m
    }

    /// Dense `H_int`.
    pub fn dense_int(&self) -> DMatrix<f64> {
        let mut m = DMatrix::<f64>::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            self.for_each_int_entry(i, |j, v| m[(i, j)] += v);
        }
        m
    }

    /// Upper bound on the operator norm of `H_int` (largest absolute row sum).
    pub fn int_norm_bound(&self) -> f64 {
        match &self.h_int {
            Interaction::Flips(terms) => terms.iter().map(|t| t.coeff.abs()).sum(),
            Interaction::Sparse(m) => (0..self.dim)
                .map(|i| m.row(i).map(|(_, v)| v.abs()).sum::<f64>())
                .fold(0.0, f64::max),
        }
    }

    /// `max |H_int − H_int†|` over stored entries.
    pub fn hermitian_defect(&self) -> f64 {
        match &self.h_int {
            Interaction::Flips(_) => 0.0,
            Interaction::Sparse(m) => {
                let mut worst = 0.0f64;
                for i in 0..self.dim {
                    for (j, v) in m.row(i) {
                        let mirror: f64 = m.row(j).filter(|&(c, _)| c == i).map(|(_, w)| w).sum();
                        worst = worst.max((v - mirror).abs());
                    }
                }
                worst
            }
        }
    }

    /// Sectors left invariant by `H_int`: connected components of its coupling graph.
    /// Each sector is sorted; sectors are ordered by their smallest index.
    pub fn blocks(&self) -> &[Vec<usize>] {
        self.blocks.get_or_init(|| {
            let mut parent: Vec<usize> = (0..self.dim).collect();
            fn find(parent: &mut [usize], mut x: usize) -> usize {
                while parent[x] != x {
                    parent[x] = parent[parent[x]];
                    x = parent[x];
                }
                x
            }
            for i in 0..self.dim {
                let mut links = Vec::new();
                self.for_each_int_entry(i, |j, v| {
                    if j != i && v != 0.0 {
                        links.push(j);
                    }
                });
                for j in links {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                }
            }
            let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for i in 0..self.dim {
                let r = find(&mut parent, i);
                by_root.entry(r).or_default().push(i);
            }
            by_root.into_values().collect()
        })
    }
}

/// Stored-basis indices `n` with `|⟨n(0)|H_int|n(0)⟩| > tol`.
///
/// An empty result means the interaction can be switched on and off at no
/// energetic cost from every local eigenstate.
pub fn validate_interaction(ops: &OperatorPair, tol: f64) -> Vec<usize> {
    (0..ops.dim()).filter(|&n| ops.int_diagonal(n).abs() > tol).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x_pair() -> OperatorPair {
        OperatorPair::new(
            vec![0.5, -0.5],
            Interaction::Flips(vec![FlipTerm { mask: 1, coeff: 0.5 }]),
        )
        .unwrap()
    }

    #[test]
    fn local_energies_sorted_with_permutation() {
        let ops = pauli_x_pair();
        assert_eq!(ops.local_energies(), &[-0.5, 0.5]);
        assert_eq!(ops.local_order(), &[1, 0]);
        assert_eq!(ops.local_ground_index(), 1);
    }

    #[test]
    fn hamiltonian_matvec_matches_dense() {
        let ops = pauli_x_pair();
        let x = [0.3, -1.2];
        let mut y = [0.0; 2];
        ops.apply_hamiltonian(0.7, &x, &mut y);
        let m = ops.dense_block(0.7, &[0, 1]);
        for i in 0..2 {
            let expect: f64 = (0..2).map(|j| m[(i, j)] * x[j]).sum();
            assert!((y[i] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn sparse_rejects_asymmetric_input() {
        let err = SparseSymmetric::from_triplets(2, [(0, 1, 1.0), (1, 0, 0.5)]).unwrap_err();
        assert!(matches!(err, ModelError::NotHermitian { .. }));
    }

    #[test]
    fn diagonal_entry_is_reported() {
        let m = SparseSymmetric::from_triplets(3, [(0, 1, 1.0), (1, 0, 1.0), (2, 2, 0.5)]).unwrap();
        let ops = OperatorPair::new(vec![0.0, 1.0, 2.0], Interaction::Sparse(m)).unwrap();
        assert_eq!(validate_interaction(&ops, 1e-9), vec![2]);
        assert_eq!(ops.hermitian_defect(), 0.0);
        assert!((ops.int_norm_bound() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nan_entries_rejected() {
        let err = OperatorPair::new(vec![f64::NAN, 1.0], Interaction::Flips(vec![])).unwrap_err();
        assert!(matches!(err, ModelError::NonFinite));
    }

    #[test]
    fn blocks_follow_coupling_graph() {
        // σ^xσ^x on two qubits: parity sectors {00, 11} and {01, 10}.
        let ops = OperatorPair::new(
            vec![1.0, 0.0, 0.0, -1.0],
            Interaction::Flips(vec![FlipTerm { mask: 0b11, coeff: 1.0 }]),
        )
        .unwrap();
        assert_eq!(ops.blocks(), &[vec![0, 3], vec![1, 2]]);
    }
}

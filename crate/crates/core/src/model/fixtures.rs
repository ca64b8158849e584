use super::{Couplings, SpinChainSpec};

/// Published couplings `(j, k, g_jk)` of the ten-qubit random-coupling engine.
pub const FIXTURE_10Q_COUPLINGS: [(usize, usize, f64); 45] = [
    (1, 2, -0.06217543),
    (1, 3, 0.22336509),
    (1, 4, 0.11497161),
    (1, 5, 0.04889319),
    (1, 6, -0.17047036),
    (1, 7, -0.17048231),
    (1, 8, -0.21900502),
    (1, 9, 0.18146965),
    (1, 10, 0.05011060),
    (2, 3, 0.10311665),
    (2, 4, -0.23758884),
    (2, 5, 0.23287803),
    (2, 6, 0.16475200),
    (2, 7, -0.14255905),
    (2, 8, -0.15768125),
    (2, 9, -0.15689846),
    (2, 10, -0.09701367),
    (3, 4, 0.01226880),
    (3, 5, -0.03372670),
    (3, 6, -0.10346271),
    (3, 7, 0.05543208),
    (3, 8, -0.17865971),
    (3, 9, -0.10300900),
    (3, 10, -0.06622843),
    (4, 5, -0.02177085),
    (4, 6, 0.14132756),
    (4, 7, -0.14883573),
    (4, 8, 0.00705431),
    (4, 9, 0.04579883),
    (4, 10, -0.22477020),
    (5, 6, 0.05329710),
    (5, 7, -0.16328173),
    (5, 8, -0.21555183),
    (5, 9, 0.22245879),
    (5, 10, 0.23075802),
    (6, 7, 0.15283562),
    (6, 8, -0.09682955),
    (6, 9, -0.19938574),
    (6, 10, 0.09130224),
    (7, 8, -0.02965924),
    (7, 9, -0.18731037),
    (7, 10, -0.00239023),
    (8, 9, -0.23074784),
    (8, 10, 0.20285109),
    (9, 10, -0.11954387),
];

/// Ten-qubit engine with ω = 1 and the published coupling table.
pub fn fixture_10q() -> SpinChainSpec {
    let couplings = Couplings::from_triples(10, FIXTURE_10Q_COUPLINGS).expect("fixture table is valid");
    SpinChainSpec::spin_chain(1.0, couplings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_spin_operators, validate_interaction};

    #[test]
    fn table_entries_verbatim() {
        let spec = fixture_10q();
        assert_eq!(spec.couplings.get(1, 2), -0.06217543);
        assert_eq!(spec.couplings.get(8, 10), 0.20285109);
        assert_eq!(spec.couplings.get(9, 10), -0.11954387);
        assert_eq!(spec.n_qubits, 10);
        assert_eq!(spec.omega, 1.0);
    }

    #[test]
    fn table_is_unit_normalized() {
        // Sum of the 45 published squares.
        let sum_sq: f64 = FIXTURE_10Q_COUPLINGS.iter().map(|&(_, _, g)| g * g).sum();
        assert!((sum_sq.sqrt() - 1.0).abs() < 1e-6, "norm {}", sum_sq.sqrt());
    }

    #[test]
    fn materialized_fixture_has_zero_int_diagonal() {
        let ops = build_spin_operators(&fixture_10q()).unwrap();
        assert_eq!(ops.dim(), 1024);
        assert!(validate_interaction(&ops, 1e-12).is_empty());
        assert!((0..ops.dim()).all(|n| ops.int_diagonal(n) == 0.0));
    }
}

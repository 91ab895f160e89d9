use super::AngleTable;
use crate::error::{Error, Result};
use crate::qsim::{ry_matrix, DenseOperator};

/// Block-diagonal `U^{0,p}`: block `j` (the value of qubits `1..q`, qubit 1
/// as bit 0) is `Ry(phi[j][p])` acting on qubit 0.
pub fn block_unitary(table: &AngleTable, term: usize) -> Result<DenseOperator> {
    let t = table.size();
    if term >= t {
        return Err(Error::invalid(format!("term {term} out of range for {t} terms")));
    }
    let dim = 2 * t;
    let mut op = DenseOperator::zeros(dim, 1)?;
    for block in 0..t {
        let g = ry_matrix(table.get(block, term));
        for a in 0..2 {
            for b in 0..2 {
                op.set(2 * block + a, 2 * block + b, g[a][b]);
            }
        }
    }
    Ok(op)
}

/// `Xshift(p) U^{0,p}`, with Pauli-X on qubit `k` for every set bit `k - 1`
/// of `p`. The shift moves block `c` to block `c xor p`.
pub fn shifted_block_unitary(table: &AngleTable, term: usize) -> Result<DenseOperator> {
    let mut op = block_unitary(table, term)?;
    for k in 1..table.num_qubits() {
        if (term >> (k - 1)) & 1 == 1 {
            op = op.left_pauli_x(k)?;
        }
    }
    Ok(op)
}

/// The tiled sum operator `A = sum_p Xshift(p) U^{0,p}`, built with the
/// doubling recursion
/// `U^{k,[lo, lo+2^k)} = U^{k-1,[lo, lo+2^(k-1))} + X_k U^{k-1,[lo+2^(k-1), lo+2^k)}`.
/// The declared term count is `2^(q-1)`. With `transposed`, the matrix
/// transpose is returned instead.
pub fn tiled_operator(table: &AngleTable, transposed: bool) -> Result<DenseOperator> {
    let levels = table.num_qubits() - 1;
    let op = tile_range(table, 0, levels)?;
    debug_assert_eq!(op.terms(), table.size());
    Ok(if transposed { op.transpose() } else { op })
}

fn tile_range(table: &AngleTable, lo: usize, level: usize) -> Result<DenseOperator> {
    if level == 0 {
        return block_unitary(table, lo);
    }
    let half = 1 << (level - 1);
    let lower = tile_range(table, lo, level - 1)?;
    let upper = tile_range(table, lo + half, level - 1)?.left_pauli_x(level)?;
    lower.add(&upper)
}

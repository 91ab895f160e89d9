use super::AngleTable;
use crate::error::{Error, Result};
use crate::qsim::{x_matrix, StateVector};

/// Applies the tiled sum operator through an explicit ancilla circuit.
///
/// `q - 1` ancillae are appended above the `q` working qubits and put in
/// uniform superposition. For every ancilla pattern `p` the shifted block
/// unitary `Xshift(p) U^{0,p}` is applied controlled on that pattern, the
/// ancilla preparation is undone and the all-zero ancilla outcome is
/// post-selected. The returned working-register state is renormalized; the
/// second value is the post-selection probability `||A psi||^2 / T^2`.
///
/// With `transposed`, each term is replaced by its transpose
/// `Ry(-phi) ... Xshift(p)`, which realizes `A^T`.
pub fn lcu_apply_gate_level(
    state: &StateVector,
    table: &AngleTable,
    transposed: bool,
) -> Result<(StateVector, f64)> {
    let q = table.num_qubits();
    if state.num_qubits() != q {
        return Err(Error::invalid(format!(
            "angle table drives {q} qubits, state has {}",
            state.num_qubits()
        )));
    }
    let ancillae: Vec<usize> = (q..2 * q - 1).collect();
    let working_controls: Vec<usize> = (1..q).collect();
    let rotation_controls: Vec<usize> = working_controls.iter().chain(&ancillae).copied().collect();

    let mut amps = state.amplitudes().to_vec();
    amps.resize(1 << (2 * q - 1), Default::default());
    let mut reg = StateVector::from_amplitudes(amps)?;

    for &a in &ancillae {
        reg.apply_h(a)?;
    }
    for p in 0..table.size() {
        if transposed {
            apply_shift(&mut reg, &ancillae, p, q)?;
        }
        for block in 0..table.size() {
            let angle = table.get(block, p);
            let angle = if transposed { -angle } else { angle };
            let pattern = block | (p << (q - 1));
            reg.apply_multi_controlled_ry(&rotation_controls, pattern, 0, angle)?;
        }
        if !transposed {
            apply_shift(&mut reg, &ancillae, p, q)?;
        }
    }
    for &a in &ancillae {
        reg.apply_h(a)?;
    }

    let mut kept = reg.into_amplitudes();
    kept.truncate(1 << q);
    let mut out = StateVector::from_amplitudes(kept)?;
    let success = out.norm_sqr();
    out.normalize()?;
    Ok((out, success))
}

fn apply_shift(reg: &mut StateVector, ancillae: &[usize], p: usize, q: usize) -> Result<()> {
    for k in 1..q {
        if (p >> (k - 1)) & 1 == 1 {
            reg.apply_controlled_gate(ancillae, p, k, &x_matrix())?;
        }
    }
    Ok(())
}

//! Data re-uploading QNN baseline on four qubits.
//!
//! Each layer is an Ry column, a CNOT ladder `0→1, 1→2, 2→3`, the input
//! column `Rx(acos(2 x_k - 1))`, a second Ry column and the same ladder.

use std::f64::consts::TAU;

use rand::Rng;

use crate::error::{Error, Result};
use crate::evqkan::LayerVector;
use crate::qsim::{Observable, StateVector};

pub const QNN_QUBITS: usize = 4;
pub const PARAMS_PER_LAYER: usize = 2 * QNN_QUBITS;

#[derive(Debug, Clone, PartialEq)]
pub struct QnnParams {
    thetas: Vec<f64>,
}

impl QnnParams {
    pub fn new(thetas: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() || thetas.len() % PARAMS_PER_LAYER != 0 {
            return Err(Error::invalid(format!(
                "{} angles is not a positive multiple of {PARAMS_PER_LAYER}",
                thetas.len()
            )));
        }
        Ok(Self { thetas })
    }

    /// Angles drawn uniformly from `[0, 2π)`.
    pub fn random(layers: usize, rng: &mut impl Rng) -> Result<Self> {
        Self::new((0..layers * PARAMS_PER_LAYER).map(|_| rng.gen_range(0.0..TAU)).collect())
    }

    pub fn num_layers(&self) -> usize {
        self.thetas.len() / PARAMS_PER_LAYER
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.thetas
    }
}

fn cnot_ladder(state: &mut StateVector) -> Result<()> {
    for k in 0..QNN_QUBITS - 1 {
        state.apply_cnot(k, k + 1)?;
    }
    Ok(())
}

/// Final state of the circuit. Inputs shorter than four components are read
/// cyclically.
pub fn qnn_state(params: &QnnParams, x: &LayerVector) -> Result<StateVector> {
    let mut state = StateVector::zero_state(QNN_QUBITS)?;
    for layer in params.thetas.chunks_exact(PARAMS_PER_LAYER) {
        for k in 0..QNN_QUBITS {
            state.apply_ry(k, layer[k])?;
        }
        cnot_ladder(&mut state)?;
        for k in 0..QNN_QUBITS {
            state.apply_rx(k, (2.0 * x.cyclic(k) - 1.0).acos())?;
            state.apply_ry(k, layer[QNN_QUBITS + k])?;
        }
        cnot_ladder(&mut state)?;
    }
    Ok(state)
}

pub fn qnn_forward(params: &QnnParams, x: &LayerVector, hamiltonian: &Observable) -> Result<f64> {
    if hamiltonian.num_qubits() != QNN_QUBITS {
        return Err(Error::invalid(format!(
            "QNN Hamiltonian must act on {QNN_QUBITS} qubits, got {}",
            hamiltonian.num_qubits()
        )));
    }
    qnn_state(params, x)?.expectation(hamiltonian)
}

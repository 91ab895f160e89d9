use serde::{Deserialize, Serialize};

use super::{angle_table, tiled_operator, EvqkanParams, LayerVector};
use crate::error::{Error, Result};
use crate::qsim::{Observable, Pauli, PauliString, StateVector};
use crate::spline::SplineGrid;

/// How classical inputs are loaded into the register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingMode {
    /// Qubit `j` gets `Ry(acos(2 x[j mod d] - 1))`.
    Simple,
    /// Qubit `j` gets `Ry(acos(2 x[2j mod d] - 1))` then `Rx(acos(2 x[2j+1 mod d] - 1))`.
    Fit,
}

/// What flows from one layer into the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerChaining {
    /// The renormalized post-layer state feeds the next layer; the readout
    /// vector only drives the next angle table.
    #[default]
    StatePassing,
    /// The state is discarded and the readout vector is encoded afresh.
    ReEncode,
}

fn encoding_angle(x: f64) -> f64 {
    (2.0 * x - 1.0).acos()
}

pub fn encode_initial_state(x: &LayerVector, mode: EncodingMode, num_qubits: usize) -> Result<StateVector> {
    let mut state = StateVector::zero_state(num_qubits)?;
    for j in 0..num_qubits {
        match mode {
            EncodingMode::Simple => state.apply_ry(j, encoding_angle(x.cyclic(j)))?,
            EncodingMode::Fit => {
                state.apply_ry(j, encoding_angle(x.cyclic(2 * j)))?;
                state.apply_rx(j, encoding_angle(x.cyclic(2 * j + 1)))?;
            }
        }
    }
    Ok(state)
}

/// Even components read `Z` and odd components read `Y`, on qubit
/// `index mod num_qubits`, each rescaled from `[-1, 1]` to `[0, 1]`.
pub fn layer_readout(state: &StateVector, dim: usize) -> Result<LayerVector> {
    if dim == 0 {
        return Err(Error::invalid("readout dimension must be at least 1"));
    }
    let n = state.num_qubits();
    let mut components = Vec::with_capacity(dim);
    for i in 0..dim {
        let label = if i % 2 == 0 { Pauli::Z } else { Pauli::Y };
        let pauli = PauliString::from_sparse(n, &[(i % n, label)])?;
        let value = state.pauli_expectation(&pauli)?.re;
        components.push((0.5 * (value + 1.0)).clamp(0.0, 1.0));
    }
    LayerVector::new(components)
}

/// Result of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput {
    pub prediction: f64,
    /// The readout vector after each layer.
    pub trace: Vec<LayerVector>,
    /// Post-selection probability of each layer's sum operator.
    pub success_probabilities: Vec<f64>,
}

/// A fully specified network: everything except the trainable coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Evqkan {
    pub num_qubits: usize,
    pub num_layers: usize,
    pub grid: SplineGrid,
    pub encoding: EncodingMode,
    pub readout_dim: usize,
    pub chaining: LayerChaining,
    pub transposed: bool,
    pub hamiltonian: Observable,
}

impl Evqkan {
    pub fn zero_params(&self) -> Result<EvqkanParams> {
        EvqkanParams::zeros(self.num_layers, self.num_qubits, self.grid.num_basis())
    }

    pub fn num_params(&self) -> Result<usize> {
        EvqkanParams::expected_len(self.num_layers, self.num_qubits, self.grid.num_basis())
    }

    fn check(&self, params: &EvqkanParams) -> Result<()> {
        if params.num_layers() != self.num_layers
            || params.num_qubits() != self.num_qubits
            || params.num_basis() != self.grid.num_basis()
        {
            return Err(Error::invalid(format!(
                "parameters shaped ({}, {}, {}) for a ({}, {}, {}) network",
                params.num_layers(),
                params.num_qubits(),
                params.num_basis(),
                self.num_layers,
                self.num_qubits,
                self.grid.num_basis()
            )));
        }
        if self.hamiltonian.num_qubits() != self.num_qubits {
            return Err(Error::invalid("Hamiltonian acts on a different register"));
        }
        Ok(())
    }

    pub fn forward(&self, params: &EvqkanParams, input: &LayerVector) -> Result<ForwardOutput> {
        self.check(params)?;
        let mut state = encode_initial_state(input, self.encoding, self.num_qubits)?;
        let mut x = input.clone();
        let mut trace = Vec::with_capacity(self.num_layers);
        let mut success_probabilities = Vec::with_capacity(self.num_layers);
        for layer in 0..self.num_layers {
            if layer > 0 && self.chaining == LayerChaining::ReEncode {
                state = encode_initial_state(&x, self.encoding, self.num_qubits)?;
            }
            let table = angle_table(params, &self.grid, layer, &x)?;
            let op = tiled_operator(&table, self.transposed)?;
            let (next, success) = state.apply_dense(&op, true)?;
            state = next;
            x = layer_readout(&state, self.readout_dim)?;
            trace.push(x.clone());
            success_probabilities.push(success);
        }
        Ok(ForwardOutput {
            prediction: state.expectation(&self.hamiltonian)?,
            trace,
            success_probabilities,
        })
    }

    pub fn predict(&self, params: &EvqkanParams, input: &LayerVector) -> Result<f64> {
        self.forward(params, input).map(|o| o.prediction)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evqkan::lcu_apply_gate_level;
    use crate::qsim::{rx_matrix, ry_matrix};
    use num_complex::Complex64;
    use std::f64::consts::FRAC_PI_2;

    fn network(layers: usize, encoding: EncodingMode, dim: usize) -> Evqkan {
        Evqkan {
            num_qubits: 3,
            num_layers: layers,
            grid: SplineGrid::default(),
            encoding,
            readout_dim: dim,
            chaining: LayerChaining::StatePassing,
            transposed: false,
            hamiltonian: Observable::zz(3, 0, 1).unwrap(),
        }
    }

    /// Tensor product of single-qubit states, qubit 0 least significant.
    fn product_state(qubits: &[[Complex64; 2]]) -> Vec<Complex64> {
        let n = qubits.len();
        (0..1usize << n)
            .map(|i| (0..n).map(|q| qubits[q][(i >> q) & 1]).product())
            .collect()
    }

    fn apply2(g: &[[Complex64; 2]; 2], v: [Complex64; 2]) -> [Complex64; 2] {
        [g[0][0] * v[0] + g[0][1] * v[1], g[1][0] * v[0] + g[1][1] * v[1]]
    }

    #[test]
    fn readout_of_ground_state() {
        let s = StateVector::zero_state(3).unwrap();
        assert_eq!(layer_readout(&s, 4).unwrap().components(), &[1.0, 0.5, 1.0, 0.5]);
        assert_eq!(layer_readout(&s, 2).unwrap().components(), &[1.0, 0.5]);
        assert!(layer_readout(&s, 0).is_err());
    }

    #[test]
    fn readout_after_quarter_turns() {
        let mut s = StateVector::zero_state(3).unwrap();
        for q in 0..3 {
            s.apply_ry(q, FRAC_PI_2).unwrap();
        }
        for c in layer_readout(&s, 4).unwrap().components() {
            assert!((c - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn simple_encoding_examples() {
        let x = LayerVector::new(vec![0.5; 3]).unwrap();
        let s = encode_initial_state(&x, EncodingMode::Simple, 3).unwrap();
        let r = layer_readout(&s, 3).unwrap();
        assert!((r.components()[0] - 0.5).abs() < 1e-12);
        assert!((r.components()[2] - 0.5).abs() < 1e-12);

        let x = LayerVector::new(vec![1.0, 0.3, 1.0]).unwrap();
        let s = encode_initial_state(&x, EncodingMode::Simple, 3).unwrap();
        let r = layer_readout(&s, 3).unwrap();
        assert!((r.components()[0] - 1.0).abs() < 1e-12);
        assert!((r.components()[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_encoding_matches_gate_product_oracle() {
        let x = LayerVector::new(vec![0.5; 4]).unwrap();
        let s = encode_initial_state(&x, EncodingMode::Fit, 3).unwrap();
        let zero = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let q = apply2(&rx_matrix(FRAC_PI_2), apply2(&ry_matrix(FRAC_PI_2), zero));
        let oracle = product_state(&[q, q, q]);
        for (a, b) in s.amplitudes().iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-12);
        }

        let x = LayerVector::new(vec![0.1, 0.7, 0.4, 0.9]).unwrap();
        let s = encode_initial_state(&x, EncodingMode::Fit, 3).unwrap();
        let ang = |v: f64| (2.0 * v - 1.0).acos();
        let qubit = |a: f64, b: f64| apply2(&rx_matrix(ang(b)), apply2(&ry_matrix(ang(a)), zero));
        let oracle = product_state(&[qubit(0.1, 0.7), qubit(0.4, 0.9), qubit(0.1, 0.7)]);
        for (a, b) in s.amplitudes().iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_param_forward_is_deterministic_and_bounded() {
        let net = network(1, EncodingMode::Simple, 4);
        let params = net.zero_params().unwrap();
        let x = LayerVector::new(vec![0.5; 4]).unwrap();
        let a = net.forward(&params, &x).unwrap();
        let b = net.forward(&params, &x).unwrap();
        assert_eq!(a.prediction.to_bits(), b.prediction.to_bits());
        assert!(a.prediction.abs() <= 1.0);
    }

    #[test]
    fn three_layer_trace_matches_manual_chain() {
        let net = network(3, EncodingMode::Fit, 4);
        let mut params = net.zero_params().unwrap();
        for (i, c) in params.coefficients.iter_mut().enumerate() {
            *c = ((i * 37 % 11) as f64 - 5.0) * 0.05;
        }
        let x = LayerVector::new(vec![0.2, 0.9, 0.4, 0.6]).unwrap();
        let out = net.forward(&params, &x).unwrap();
        assert_eq!(out.trace.len(), 3);
        assert_eq!(out.success_probabilities.len(), 3);

        // Replay with the gate-level construction.
        let mut state = encode_initial_state(&x, EncodingMode::Fit, 3).unwrap();
        let mut input = x.clone();
        for layer in 0..3 {
            let table = angle_table(&params, &net.grid, layer, &input).unwrap();
            let (next, p) = lcu_apply_gate_level(&state, &table, false).unwrap();
            state = next;
            input = layer_readout(&state, 4).unwrap();
            for (a, b) in input.components().iter().zip(out.trace[layer].components()) {
                assert!((a - b).abs() < 1e-10);
                assert!((0.0..=1.0).contains(b));
            }
            assert!((p - out.success_probabilities[layer]).abs() < 1e-10);
        }
        let h = state.expectation(&net.hamiltonian).unwrap();
        assert!((h - out.prediction).abs() < 1e-10);
    }

    #[test]
    fn re_encode_differs_from_state_passing() {
        let mut net = network(2, EncodingMode::Fit, 4);
        let params = net.zero_params().unwrap();
        let x = LayerVector::new(vec![0.2, 0.9, 0.4, 0.6]).unwrap();
        let passing = net.forward(&params, &x).unwrap();
        net.chaining = LayerChaining::ReEncode;
        let fresh = net.forward(&params, &x).unwrap();
        assert_eq!(passing.trace[0], fresh.trace[0]);
        assert_ne!(passing.prediction, fresh.prediction);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let net = network(2, EncodingMode::Simple, 2);
        let wrong = EvqkanParams::zeros(3, 3, 8).unwrap();
        let x = LayerVector::new(vec![0.5; 2]).unwrap();
        assert!(net.forward(&wrong, &x).is_err());
    }
}

//! The tiled variational quantum KAN ansatz.
//!
//! Each layer turns its input vector into a `2^(q-1) x 2^(q-1)` table of
//! rotation angles (one trainable spline per entry), assembles the tiled sum
//! operator from multi-controlled Ry blocks, applies it with exact
//! post-selection and reads the next input vector back out of the state.

mod lcu;
mod network;
mod tiling;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spline::SplineGrid;

pub use lcu::lcu_apply_gate_level;
pub use network::{
    encode_initial_state, layer_readout, EncodingMode, Evqkan, ForwardOutput, LayerChaining,
};
pub use tiling::{block_unitary, shifted_block_unitary, tiled_operator};

/// `x / (exp(-x) + 1)`.
pub fn fermi_dirac(x: f64) -> f64 {
    x / ((-x).exp() + 1.0)
}

/// Trainable spline coefficients `c[layer][row][term][basis]`, flattened
/// row-major in that order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvqkanParams {
    num_layers: usize,
    num_qubits: usize,
    num_basis: usize,
    coefficients: Vec<f64>,
}

impl EvqkanParams {
    pub fn zeros(num_layers: usize, num_qubits: usize, num_basis: usize) -> Result<Self> {
        let len = Self::expected_len(num_layers, num_qubits, num_basis)?;
        Ok(Self {
            num_layers,
            num_qubits,
            num_basis,
            coefficients: vec![0.0; len],
        })
    }

    pub fn from_flat(
        num_layers: usize,
        num_qubits: usize,
        num_basis: usize,
        coefficients: Vec<f64>,
    ) -> Result<Self> {
        let len = Self::expected_len(num_layers, num_qubits, num_basis)?;
        if coefficients.len() != len {
            return Err(Error::invalid(format!(
                "expected {len} coefficients, got {}",
                coefficients.len()
            )));
        }
        if let Some(bad) = coefficients.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("non-finite coefficient {bad}")));
        }
        Ok(Self {
            num_layers,
            num_qubits,
            num_basis,
            coefficients,
        })
    }

    /// Number of coefficients for the given shape.
    pub fn expected_len(num_layers: usize, num_qubits: usize, num_basis: usize) -> Result<usize> {
        if num_layers == 0 || num_qubits < 2 || num_qubits > 12 || num_basis == 0 {
            return Err(Error::invalid(format!(
                "unsupported shape: {num_layers} layers, {num_qubits} qubits, {num_basis} basis functions"
            )));
        }
        let rows = 1usize << (num_qubits - 1);
        Ok(num_layers * rows * rows * num_basis)
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_basis(&self) -> usize {
        self.num_basis
    }

    /// Side length of each layer's angle table, `2^(num_qubits - 1)`.
    pub fn table_size(&self) -> usize {
        1 << (self.num_qubits - 1)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coefficients
    }

    /// The `num_basis` coefficients of one angle function.
    pub fn spline_coefficients(&self, layer: usize, row: usize, term: usize) -> &[f64] {
        let t = self.table_size();
        let start = ((layer * t + row) * t + term) * self.num_basis;
        &self.coefficients[start..start + self.num_basis]
    }

    pub fn spline_coefficients_mut(&mut self, layer: usize, row: usize, term: usize) -> &mut [f64] {
        let t = self.table_size();
        let start = ((layer * t + row) * t + term) * self.num_basis;
        &mut self.coefficients[start..start + self.num_basis]
    }
}

/// A per-layer input vector with every component in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerVector {
    components: Vec<f64>,
}

impl LayerVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("a layer vector needs at least one component"));
        }
        if let Some(bad) = components.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(Error::invalid(format!("layer vector component {bad} outside [0, 1]")));
        }
        Ok(Self { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    /// Component `index mod dim`.
    pub fn cyclic(&self, index: usize) -> f64 {
        self.components[index % self.components.len()]
    }
}

/// Rotation angles `phi[row][term]` of one layer, in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleTable {
    size: usize,
    angles: Vec<f64>,
}

impl AngleTable {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 || !size.is_power_of_two() {
            return Err(Error::invalid(format!("table side {size} is not a power of two")));
        }
        if rows.iter().any(|r| r.len() != size) {
            return Err(Error::invalid("angle table must be square"));
        }
        Ok(Self {
            size,
            angles: rows.into_iter().flatten().collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of working qubits the table drives, `log2(size) + 1`.
    pub fn num_qubits(&self) -> usize {
        self.size.trailing_zeros() as usize + 1
    }

    pub fn get(&self, row: usize, term: usize) -> f64 {
        self.angles[row * self.size + term]
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }
}

/// `2 acos(clamp(E_f(x) + spline(x), -1, 1))` where `x` is the single input
/// element assigned to `row`, namely `x[row mod dim]`.
pub fn phi_angle(
    params: &EvqkanParams,
    grid: &SplineGrid,
    layer: usize,
    row: usize,
    term: usize,
    x: &LayerVector,
) -> Result<f64> {
    check_indices(params, grid, layer)?;
    let t = params.table_size();
    if row >= t || term >= t {
        return Err(Error::invalid(format!("table index ({row}, {term}) out of range for side {t}")));
    }
    let x_sel = x.cyclic(row);
    let spline = grid.spline_sum(params.spline_coefficients(layer, row, term), x_sel)?;
    Ok(angle_from_argument(fermi_dirac(x_sel) + spline))
}

fn angle_from_argument(arg: f64) -> f64 {
    // NaN falls through to acos(NaN) and is caught downstream by the optimizer.
    2.0 * arg.clamp(-1.0, 1.0).acos()
}

fn check_indices(params: &EvqkanParams, grid: &SplineGrid, layer: usize) -> Result<()> {
    if layer >= params.num_layers() {
        return Err(Error::invalid(format!(
            "layer {layer} out of range for {} layers",
            params.num_layers()
        )));
    }
    if grid.num_basis() != params.num_basis() {
        return Err(Error::invalid(format!(
            "grid has {} basis functions, parameters expect {}",
            grid.num_basis(),
            params.num_basis()
        )));
    }
    Ok(())
}

/// The full angle table of `layer` for input `x`.
pub fn angle_table(
    params: &EvqkanParams,
    grid: &SplineGrid,
    layer: usize,
    x: &LayerVector,
) -> Result<AngleTable> {
    check_indices(params, grid, layer)?;
    let t = params.table_size();
    let mut basis = vec![0.0; grid.num_basis()];
    let mut angles = Vec::with_capacity(t * t);
    for row in 0..t {
        let x_sel = x.cyclic(row);
        grid.basis_values_into(x_sel, &mut basis)?;
        let base = fermi_dirac(x_sel);
        for term in 0..t {
            let spline: f64 = params
                .spline_coefficients(layer, row, term)
                .iter()
                .zip(&basis)
                .map(|(c, b)| c * b)
                .sum();
            angles.push(angle_from_argument(base + spline));
        }
    }
    Ok(AngleTable { size: t, angles })
}

//! Dense statevector simulation.
//!
//! Basis index convention: qubit 0 is the least-significant bit of the
//! basis-state index, so `|q2 q1 q0>` lives at index `4*q2 + 2*q1 + q0`.
//! All rotation gates use the half-angle form, e.g.
//! `Ry(t) = [[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]]`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::NORM_TOLERANCE;

/// A 2x2 complex gate matrix in row-major order.
pub type Gate2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn ry_matrix(theta: f64) -> Gate2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

pub fn rx_matrix(theta: f64) -> Gate2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
        [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
    ]
}

pub fn x_matrix() -> Gate2 {
    [[ZERO, ONE], [ONE, ZERO]]
}

pub fn hadamard_matrix() -> Gate2 {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

/// Complex amplitudes of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `num_qubits` qubits.
    pub fn zero_state(num_qubits: usize) -> Result<Self> {
        if num_qubits < 1 {
            return Err(Error::invalid("a register needs at least one qubit"));
        }
        if num_qubits > 30 {
            return Err(Error::invalid(format!(
                "{num_qubits} qubits exceed the dense simulator limit"
            )));
        }
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[0] = ONE;
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes. The vector is not renormalized.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::invalid(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() < NORM_TOLERANCE
    }

    /// Scales the vector to unit norm, returning the norm it had before.
    pub fn normalize(&mut self) -> Result<f64> {
        let norm = self.norm();
        if !(norm > f64::EPSILON) {
            return Err(Error::DegenerateState { norm });
        }
        let inv = 1.0 / norm;
        self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        Ok(norm)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_same_dim(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`; insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    fn check_same_dim(&self, other: &StateVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::invalid(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::invalid(format!(
                "qubit {qubit} out of range for {} qubits",
                self.num_qubits
            )));
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, qubit: usize, gate: &Gate2) -> Result<()> {
        self.apply_controlled_gate(&[], 0, qubit, gate)
    }

    /// Applies `gate` to `target` on exactly those basis states whose control
    /// bits match `pattern`, where bit `i` of `pattern` is the required value
    /// of `controls[i]`.
    pub fn apply_controlled_gate(
        &mut self,
        controls: &[usize],
        pattern: usize,
        target: usize,
        gate: &Gate2,
    ) -> Result<()> {
        self.check_qubit(target)?;
        for (i, &c) in controls.iter().enumerate() {
            self.check_qubit(c)?;
            if c == target {
                return Err(Error::invalid(format!("qubit {c} is both control and target")));
            }
            if controls[..i].contains(&c) {
                return Err(Error::invalid(format!("control qubit {c} listed twice")));
            }
        }
        if controls.len() >= usize::BITS as usize || pattern >> controls.len() != 0 {
            return Err(Error::invalid(format!(
                "pattern {pattern} out of range for {} controls",
                controls.len()
            )));
        }

        let mut control_mask = 0usize;
        let mut control_value = 0usize;
        for (i, &c) in controls.iter().enumerate() {
            control_mask |= 1 << c;
            if (pattern >> i) & 1 == 1 {
                control_value |= 1 << c;
            }
        }

        let bit = 1usize << target;
        for i0 in 0..self.amplitudes.len() {
            if i0 & bit != 0 || i0 & control_mask != control_value {
                continue;
            }
            let i1 = i0 | bit;
            let a0 = self.amplitudes[i0];
            let a1 = self.amplitudes[i1];
            self.amplitudes[i0] = gate[0][0] * a0 + gate[0][1] * a1;
            self.amplitudes[i1] = gate[1][0] * a0 + gate[1][1] * a1;
        }
        Ok(())
    }

    pub fn apply_ry(&mut self, qubit: usize, theta: f64) -> Result<()> {
        self.apply_gate(qubit, &ry_matrix(theta))
    }

    pub fn apply_rx(&mut self, qubit: usize, theta: f64) -> Result<()> {
        self.apply_gate(qubit, &rx_matrix(theta))
    }

    pub fn apply_x(&mut self, qubit: usize) -> Result<()> {
        self.apply_gate(qubit, &x_matrix())
    }

    pub fn apply_h(&mut self, qubit: usize) -> Result<()> {
        self.apply_gate(qubit, &hadamard_matrix())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.apply_controlled_gate(&[control], 1, target, &x_matrix())
    }

    pub fn apply_multi_controlled_ry(
        &mut self,
        controls: &[usize],
        pattern: usize,
        target: usize,
        theta: f64,
    ) -> Result<()> {
        self.apply_controlled_gate(controls, pattern, target, &ry_matrix(theta))
    }

    /// `<psi|P|psi>` for a single Pauli string.
    pub fn pauli_expectation(&self, pauli: &PauliString) -> Result<Complex64> {
        if pauli.num_qubits() != self.num_qubits {
            return Err(Error::invalid(format!(
                "Pauli string on {} qubits applied to {} qubits",
                pauli.num_qubits(),
                self.num_qubits
            )));
        }
        let (flip, z_mask, y_count) = pauli.masks();
        // P|i> = i^{y_count} (-1)^{popcount(i & z_mask)} |i ^ flip>, where the
        // Y factors carry the extra (-1)^bit through z_mask.
        let global = match y_count % 4 {
            0 => ONE,
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        let mut acc = ZERO;
        for (i, a) in self.amplitudes.iter().enumerate() {
            let sign = if (i & z_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            acc += self.amplitudes[i ^ flip].conj() * a * sign;
        }
        Ok(acc * global)
    }

    /// `sum_j c_j <psi|P_j|psi>`. The imaginary residue must vanish.
    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        if obs.num_qubits() != self.num_qubits {
            return Err(Error::invalid(format!(
                "observable on {} qubits applied to {} qubits",
                obs.num_qubits(),
                self.num_qubits
            )));
        }
        let mut total = ZERO;
        for (coeff, pauli) in obs.terms() {
            total += self.pauli_expectation(pauli)? * *coeff;
        }
        let scale = obs.terms().iter().map(|(c, _)| c.abs()).sum::<f64>().max(1.0);
        if total.im.abs() > crate::ORACLE_TOLERANCE * scale * self.norm_sqr().max(1.0) {
            return Err(Error::invalid(format!(
                "expectation has imaginary part {:e}; observable is not Hermitian on this state",
                total.im
            )));
        }
        Ok(total.re)
    }

    /// Applies a dense operator. With `renormalize`, the result is scaled to
    /// unit norm; the returned success probability is `||A psi||^2 / T^2`
    /// where `T` is the number of unitary terms the operator sums.
    pub fn apply_dense(&self, op: &DenseOperator, renormalize: bool) -> Result<(StateVector, f64)> {
        if op.dim() != self.dim() {
            return Err(Error::invalid(format!(
                "operator of dimension {} applied to state of dimension {}",
                op.dim(),
                self.dim()
            )));
        }
        let dim = op.dim();
        let mut out = vec![ZERO; dim];
        for (r, slot) in out.iter_mut().enumerate() {
            let row = &op.entries[r * dim..(r + 1) * dim];
            *slot = row.iter().zip(&self.amplitudes).map(|(m, a)| m * a).sum();
        }
        let mut next = StateVector {
            num_qubits: self.num_qubits,
            amplitudes: out,
        };
        let norm_sqr = next.norm_sqr();
        let terms = op.terms() as f64;
        let success = norm_sqr / (terms * terms);
        if renormalize {
            next.normalize()?;
        }
        Ok((next, success))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// One Pauli label per qubit; `factors[k]` acts on qubit `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    factors: Vec<Pauli>,
}

impl PauliString {
    pub fn new(factors: Vec<Pauli>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("a Pauli string needs at least one qubit"));
        }
        Ok(Self { factors })
    }

    pub fn identity(num_qubits: usize) -> Result<Self> {
        Self::new(vec![Pauli::I; num_qubits])
    }

    /// Identity everywhere except the listed `(qubit, label)` pairs.
    pub fn from_sparse(num_qubits: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut factors = vec![Pauli::I; num_qubits];
        for &(q, p) in ops {
            let slot = factors.get_mut(q).ok_or_else(|| {
                Error::invalid(format!("qubit {q} out of range for {num_qubits} qubits"))
            })?;
            *slot = p;
        }
        Self::new(factors)
    }

    pub fn num_qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Pauli] {
        &self.factors
    }

    /// (bit-flip mask, phase mask, number of Y factors).
    fn masks(&self) -> (usize, usize, usize) {
        let mut flip = 0;
        let mut z = 0;
        let mut ys = 0;
        for (k, p) in self.factors.iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::X => flip |= 1 << k,
                Pauli::Y => {
                    flip |= 1 << k;
                    z |= 1 << k;
                    ys += 1;
                }
                Pauli::Z => z |= 1 << k,
            }
        }
        (flip, z, ys)
    }
}

/// Parses labels with qubit 0 first, e.g. `"ZZI"` is `Z0 Z1`.
impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let factors = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::invalid(format!("unknown Pauli label {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.factors {
            let c = match p {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A real linear combination of Pauli strings.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    num_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl Observable {
    pub fn new(terms: Vec<(f64, PauliString)>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::invalid("an observable needs at least one term"))?;
        let num_qubits = first.1.num_qubits();
        for (c, p) in &terms {
            if !c.is_finite() {
                return Err(Error::invalid(format!("non-finite coefficient {c}")));
            }
            if p.num_qubits() != num_qubits {
                return Err(Error::invalid("terms act on different qubit counts"));
            }
        }
        Ok(Self { num_qubits, terms })
    }

    pub fn single(pauli: PauliString) -> Self {
        Self {
            num_qubits: pauli.num_qubits(),
            terms: vec![(1.0, pauli)],
        }
    }

    /// `Z_a Z_b` on `num_qubits` qubits.
    pub fn zz(num_qubits: usize, a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::invalid("Z_a Z_b needs two distinct qubits"));
        }
        PauliString::from_sparse(num_qubits, &[(a, Pauli::Z), (b, Pauli::Z)]).map(Self::single)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    /// Sum of absolute coefficients, an upper bound on `|<H>|`.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }
}

/// A dense (generally non-unitary) operator, row-major, together with the
/// number of unitaries it is a sum of.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    entries: Vec<Complex64>,
    terms: usize,
}

impl DenseOperator {
    pub fn from_entries(dim: usize, entries: Vec<Complex64>, terms: usize) -> Result<Self> {
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::invalid(format!("dimension {dim} is not a power of two >= 2")));
        }
        if entries.len() != dim * dim {
            return Err(Error::invalid(format!(
                "{} entries for a {dim}x{dim} operator",
                entries.len()
            )));
        }
        if terms == 0 {
            return Err(Error::invalid("term count must be positive"));
        }
        Ok(Self { dim, entries, terms })
    }

    pub fn zeros(dim: usize, terms: usize) -> Result<Self> {
        Self::from_entries(dim, vec![ZERO; dim * dim], terms)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut op = Self::zeros(dim, 1)?;
        for i in 0..dim {
            op.entries[i * dim + i] = ONE;
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn with_terms(mut self, terms: usize) -> Result<Self> {
        if terms == 0 {
            return Err(Error::invalid("term count must be positive"));
        }
        self.terms = terms;
        Ok(self)
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn scale(mut self, factor: f64) -> Self {
        self.entries.iter_mut().for_each(|e| *e *= factor);
        self
    }

    pub fn transpose(&self) -> Self {
        let mut out = self.clone();
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.entries[c * self.dim + r] = self.entries[r * self.dim + c];
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = self.transpose();
        out.entries.iter_mut().for_each(|e| *e = e.conj());
        out
    }

    /// Entrywise sum; term counts add.
    pub fn add(&self, other: &DenseOperator) -> Result<Self> {
        self.check_same_dim(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            dim: self.dim,
            entries,
            terms: self.terms + other.terms,
        })
    }

    /// Matrix product `self * other`; term counts multiply.
    pub fn matmul(&self, other: &DenseOperator) -> Result<Self> {
        self.check_same_dim(other)?;
        let n = self.dim;
        let mut entries = vec![ZERO; n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.entries[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    entries[r * n + c] += a * other.entries[k * n + c];
                }
            }
        }
        Ok(Self {
            dim: n,
            entries,
            terms: self.terms * other.terms,
        })
    }

    /// Left-multiplies by Pauli-X on `qubit`, i.e. swaps the rows whose
    /// indices differ in that bit.
    pub fn left_pauli_x(&self, qubit: usize) -> Result<Self> {
        let bit = 1usize << qubit;
        if bit >= self.dim {
            return Err(Error::invalid(format!("qubit {qubit} out of range for dimension {}", self.dim)));
        }
        let n = self.dim;
        let mut entries = vec![ZERO; n * n];
        for r in 0..n {
            let src = r ^ bit;
            entries[r * n..(r + 1) * n].copy_from_slice(&self.entries[src * n..(src + 1) * n]);
        }
        Ok(Self {
            dim: n,
            entries,
            terms: self.terms,
        })
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DenseOperator) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    fn check_same_dim(&self, other: &DenseOperator) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::invalid(format!(
                "operator dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }
}

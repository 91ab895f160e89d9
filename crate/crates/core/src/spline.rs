//! Clamped uniform B-spline bases on `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_NUM_BASIS: usize = 8;
pub const DEFAULT_ORDER: usize = 3;

/// Knot layout of a clamped B-spline basis. `order` is the polynomial degree
/// (3 = cubic); the first and last knots are repeated `order + 1` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineGrid {
    num_basis: usize,
    order: usize,
    knots: Vec<f64>,
}

impl Default for SplineGrid {
    fn default() -> Self {
        Self::new(DEFAULT_NUM_BASIS, DEFAULT_ORDER).expect("default grid is valid")
    }
}

impl SplineGrid {
    pub fn new(num_basis: usize, order: usize) -> Result<Self> {
        if num_basis < order + 1 {
            return Err(Error::invalid(format!(
                "{num_basis} basis functions cannot carry degree {order}"
            )));
        }
        let interior = num_basis - order - 1;
        let mut knots = Vec::with_capacity(num_basis + order + 1);
        knots.extend(std::iter::repeat(0.0).take(order + 1));
        knots.extend((1..=interior).map(|i| i as f64 / (interior + 1) as f64));
        knots.extend(std::iter::repeat(1.0).take(order + 1));
        Ok(Self {
            num_basis,
            order,
            knots,
        })
    }

    pub fn num_basis(&self) -> usize {
        self.num_basis
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Index `k` of the knot interval `[t_k, t_{k+1})` holding `x`, restricted
    /// to the non-degenerate spans. `x = 1` maps to the last span.
    fn span(&self, x: f64) -> usize {
        let last = self.num_basis - 1;
        if x >= self.knots[last + 1] {
            return last;
        }
        // knots[order..=last+1] is strictly increasing
        let mut lo = self.order;
        let mut hi = last + 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if x < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// All basis values at `x`, via the triangular Cox-de Boor scheme on the
    /// `order + 1` functions that are nonzero on the span of `x`.
    pub fn basis_values(&self, x: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.num_basis];
        self.basis_values_into(x, &mut out)?;
        Ok(out)
    }

    pub fn basis_values_into(&self, x: f64, out: &mut [f64]) -> Result<()> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::invalid(format!("spline input {x} outside [0, 1]")));
        }
        if out.len() != self.num_basis {
            return Err(Error::invalid(format!(
                "output buffer of length {} for {} basis functions",
                out.len(),
                self.num_basis
            )));
        }
        let p = self.order;
        let k = self.span(x);
        let t = &self.knots;

        let mut local = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        local[0] = 1.0;
        for d in 1..=p {
            left[d] = x - t[k + 1 - d];
            right[d] = t[k + d] - x;
            let mut saved = 0.0;
            for r in 0..d {
                let denom = right[r + 1] + left[d - r];
                let temp = local[r] / denom;
                local[r] = saved + right[r + 1] * temp;
                saved = left[d - r] * temp;
            }
            local[d] = saved;
        }

        out.iter_mut().for_each(|v| *v = 0.0);
        out[k - p..=k].copy_from_slice(&local);
        Ok(())
    }

    /// `sum_s coefficients[s] * B_s(x)`.
    pub fn spline_sum(&self, coefficients: &[f64], x: f64) -> Result<f64> {
        if coefficients.len() != self.num_basis {
            return Err(Error::invalid(format!(
                "{} coefficients for {} basis functions",
                coefficients.len(),
                self.num_basis
            )));
        }
        let basis = self.basis_values(x)?;
        Ok(basis.iter().zip(coefficients).map(|(b, c)| b * c).sum())
    }
}

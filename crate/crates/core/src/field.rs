//! Scalar fields sampled on rectangular grids of any two-coordinate chart.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A named coordinate axis with its sample positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub samples: Vec<f64>,
}

impl Axis {
    pub fn new(name: impl Into<String>, samples: Vec<f64>) -> Self {
        Self { name: name.into(), samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Field samples over `axis1 × axis2`.
///
/// Storage is row-major with one row per `axis2` sample, so `axis1` varies
/// fastest: node `(i, j)` lives at `j * axis1.len() + i`. Masked nodes carry no
/// meaningful value.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2D {
    pub axis1: Axis,
    pub axis2: Axis,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl ScalarField2D {
    pub fn new(axis1: Axis, axis2: Axis, values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        let n = axis1.len() * axis2.len();
        if axis1.is_empty() || axis2.is_empty() {
            return Err(Error::InvalidArgument("field axes must be non-empty"));
        }
        if values.len() != n || mask.len() != n {
            return Err(Error::InvalidArgument("field dimensions do not match its axes"));
        }
        Ok(Self { axis1, axis2, values, mask })
    }

    /// Unmasked field from a node function `f(i, j, x1, x2)`, evaluated with
    /// `axis1` fastest.
    pub fn from_fn<F>(axis1: Axis, axis2: Axis, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, f64, f64) -> Result<f64>,
    {
        let mut values = Vec::with_capacity(axis1.len() * axis2.len());
        for (j, &x2) in axis2.samples.iter().enumerate() {
            for (i, &x1) in axis1.samples.iter().enumerate() {
                values.push(f(i, j, x1, x2)?);
            }
        }
        let mask = alloc::vec![false; values.len()];
        Self::new(axis1, axis2, values, mask)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.axis1.len(), self.axis2.len())
    }

    fn index(&self, i: usize, j: usize) -> usize {
        j * self.axis1.len() + i
    }

    /// Value at node `(i, j)`, `None` when masked.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let k = self.index(i, j);
        (!self.mask[k]).then_some(self.values[k])
    }

    pub fn is_masked(&self, i: usize, j: usize) -> bool {
        self.mask[self.index(i, j)]
    }

    pub fn set_mask(&mut self, i: usize, j: usize, masked: bool) {
        let k = self.index(i, j);
        self.mask[k] = masked;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Iterate `(i, j, value)` over unmasked nodes in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n1 = self.axis1.len();
        self.values
            .iter()
            .zip(&self.mask)
            .enumerate()
            .filter(|(_, (_, m))| !**m)
            .map(move |(k, (v, _))| (k % n1, k / n1, *v))
    }

    /// Largest `|value|` over unmasked nodes (0 for an all-masked field).
    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0_f64, |acc, (_, _, v)| acc.max(libm::fabs(v)))
    }
}

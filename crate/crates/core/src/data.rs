//! Observations and datasets `(d, y, z, x)`.

use crate::error::{Error, Result};

/// A single draw: binary choice `d`, post-choice outcome `y` (length p),
/// utility covariates `z` (length k) and conditioning variables `x` (length q).
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub d: u8,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub x: Vec<f64>,
}

impl Observation {
    pub fn new(d: u8, y: Vec<f64>, z: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        if d > 1 {
            return Err(Error::invalid("d", format!("choice must be 0 or 1, got {d}")));
        }
        if !y.iter().chain(&z).chain(&x).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("observation"));
        }
        Ok(Self { d, y, z, x })
    }
}

/// Declared dimensions `(k, p, q)`: lengths of `z`, `y` and `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub k: usize,
    pub p: usize,
    pub q: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    observations: Vec<Observation>,
    dims: Dims,
}

impl Dataset {
    pub fn new(observations: Vec<Observation>, dims: Dims) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        if dims.k == 0 || dims.p == 0 || dims.q == 0 {
            return Err(Error::invalid("dims", "k, p and q must all be positive"));
        }
        for obs in &observations {
            check_len("z", dims.k, obs.z.len())?;
            check_len("y", dims.p, obs.y.len())?;
            check_len("x", dims.q, obs.x.len())?;
        }
        Ok(Self { observations, dims })
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Number of observations with `d == choice`.
    pub fn count_choice(&self, choice: u8) -> usize {
        self.observations.iter().filter(|o| o.d == choice).count()
    }

    /// A new dataset holding the observations at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let observations = indices
            .iter()
            .map(|&i| {
                self.observations
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::invalid("indices", format!("index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(observations, self.dims)
    }
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { what, expected, got });
    }
    Ok(())
}

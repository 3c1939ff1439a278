use crate::error::{Error, Result};

/// One coordinate of the search grid: `count` equally spaced points on `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn new(lower: f64, upper: f64, count: usize) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) {
            return Err(Error::NonFinite("grid bounds"));
        }
        if lower > upper {
            return Err(Error::invalid("grid", format!("lower {lower} > upper {upper}")));
        }
        if count == 0 {
            return Err(Error::EmptyGrid);
        }
        Ok(Self { lower, upper, count })
    }

    fn step(&self) -> f64 {
        if self.count == 1 {
            0.0
        } else {
            (self.upper - self.lower) / (self.count - 1) as f64
        }
    }

    /// `lower + j * (upper - lower) / (count - 1)`. Nondecreasing in `j`.
    #[inline]
    pub fn value(&self, j: usize) -> f64 {
        self.lower + j as f64 * self.step()
    }

    pub fn values(&self) -> Vec<f64> {
        let step = self.step();
        (0..self.count).map(|j| self.lower + j as f64 * step).collect()
    }
}

/// Cartesian grid over the free coefficients `btilde`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axes: Vec<GridAxis>,
}

impl GridSpec {
    pub fn new(axes: Vec<GridAxis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::EmptyGrid);
        }
        Ok(Self { axes })
    }

    /// `[-5, 5]` with step 0.002 for a single free coefficient.
    pub fn default_scalar() -> Self {
        Self {
            axes: vec![GridAxis {
                lower: -5.0,
                upper: 5.0,
                count: 5001,
            }],
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn size(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    /// Grid point at lexicographic position `flat` (first axis most significant).
    pub fn point(&self, mut flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (slot, axis) in out.iter_mut().zip(&self.axes).rev() {
            *slot = axis.value(flat % axis.count);
            flat /= axis.count;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_values() {
        let a = GridAxis::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(a.values(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(GridAxis::new(2.0, 2.0, 1).unwrap().values(), vec![2.0]);
        assert!(GridAxis::new(1.0, 0.0, 3).is_err());
        assert_eq!(GridAxis::new(0.0, 1.0, 0), Err(Error::EmptyGrid));
    }

    #[test]
    fn lexicographic_points() {
        let g = GridSpec::new(vec![
            GridAxis::new(0.0, 1.0, 2).unwrap(),
            GridAxis::new(10.0, 12.0, 3).unwrap(),
        ])
        .unwrap();
        assert_eq!(g.size(), 6);
        assert_eq!(g.point(0), vec![0.0, 10.0]);
        assert_eq!(g.point(2), vec![0.0, 12.0]);
        assert_eq!(g.point(3), vec![1.0, 10.0]);
    }

    #[test]
    fn default_grid_step() {
        let g = GridSpec::default_scalar();
        let a = g.axes[0];
        assert!((a.value(1) - a.value(0) - 0.002).abs() < 1e-12);
        assert!((a.value(5000) - 5.0).abs() < 1e-12);
        assert_eq!(a.value(2500), 0.0);
    }
}

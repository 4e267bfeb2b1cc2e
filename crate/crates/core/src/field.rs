use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::sum::{pairwise_dot, pairwise_sum};

/// Real values at the cell centers of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    /// Skips the finiteness scan; callers guarantee the invariant.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::from_raw(grid.clone(), vec![0.0; grid.len()])
    }

    pub fn constant(grid: &Grid, c: f64) -> Result<Self> {
        Self::new(grid.clone(), vec![c; grid.len()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Midpoint-rule integral.
    pub fn integral(&self) -> f64 {
        pairwise_sum(&self.values) * self.grid.cell_volume()
    }

    /// Volume-weighted mean over the box.
    pub fn mean(&self) -> f64 {
        pairwise_sum(&self.values) / self.values.len() as f64
    }

    /// Cell-volume weighted inner product.
    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(pairwise_dot(&self.values, &other.values) * self.grid.cell_volume())
    }

    pub fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &ScalarField) -> Result<Self> {
        self.zip_with(other, |a, b| a + c * b)
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Self::new(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// Keeps values where the mask is set, zero elsewhere.
    pub fn restrict(&self, mask: &RegionMask) -> Result<Self> {
        if mask.grid() != &self.grid {
            return Err(Error::GridMismatch("mask lives on a different grid".into()));
        }
        Ok(Self::from_raw(
            self.grid.clone(),
            self.values
                .iter()
                .zip(mask.flags())
                .map(|(&v, &m)| if m { v } else { 0.0 })
                .collect(),
        ))
    }

    /// Support as a mask (`f != 0`).
    pub fn support(&self) -> RegionMask {
        RegionMask::from_raw(
            self.grid.clone(),
            self.values.iter().map(|&v| v != 0.0).collect(),
        )
    }
}

/// Evaluates `f` at every cell center.
pub fn sample_function(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Result<ScalarField> {
    let values = (0..grid.len()).map(|i| f(&grid.position(i))).collect();
    ScalarField::new(grid.clone(), values)
}

/// Subtracts the cell-volume weighted mean.
pub fn mean_zero(f: &ScalarField) -> ScalarField {
    let m = f.mean();
    ScalarField::from_raw(f.grid.clone(), f.values.iter().map(|&v| v - m).collect())
}

/// `d` scalar components on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::InvalidParameter("vector field needs components".into()));
        };
        let grid = first.grid().clone();
        if components.len() != grid.dim() {
            return Err(Error::Dimension {
                expected: grid.dim().to_string(),
                found: components.len(),
            });
        }
        if components.iter().any(|c| c.grid() != &grid) {
            return Err(Error::GridMismatch("vector components on different grids".into()));
        }
        Ok(Self { grid, components })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            components: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    /// One nonzero component.
    pub fn single(component: ScalarField, axis: usize) -> Result<Self> {
        let grid = component.grid().clone();
        grid.check_axis(axis)?;
        let mut comps: Vec<ScalarField> = (0..grid.dim()).map(|_| ScalarField::zeros(&grid)).collect();
        comps[axis] = component;
        Ok(Self { grid, components: comps })
    }

    pub(crate) fn from_raw(grid: Grid, raw: Vec<Vec<f64>>) -> Self {
        let components = raw
            .into_iter()
            .map(|v| ScalarField::from_raw(grid.clone(), v))
            .collect();
        Self { grid, components }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, axis: usize) -> &ScalarField {
        &self.components[axis]
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let n = self.grid.len();
        let mut out = vec![0.0; n];
        for c in &self.components {
            for (o, v) in out.iter_mut().zip(c.values()) {
                *o += v * v;
            }
        }
        for o in &mut out {
            *o = o.sqrt();
        }
        ScalarField::from_raw(self.grid.clone(), out)
    }

    /// `max_x |u(x)|_2`, the L∞ norm used throughout.
    pub fn linf(&self) -> f64 {
        self.magnitude().max_abs()
    }

    /// `max_x |u_i(x)|` for each component.
    pub fn linf_components(&self) -> Vec<f64> {
        self.components.iter().map(ScalarField::max_abs).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(ScalarField::is_zero)
    }

    pub fn add(&self, other: &VectorField) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("vector fields on different grids".into()));
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid: self.grid.clone(), components })
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|a| a.scale(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid: self.grid.clone(), components })
    }

    /// Cell-volume weighted inner product summed over components.
    pub fn inner(&self, other: &VectorField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("vector fields on different grids".into()));
        }
        let parts: Vec<f64> = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.inner(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(pairwise_sum(&parts))
    }
}

/// Boolean field marking a set of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    grid: Grid,
    flags: Vec<bool>,
}

impl RegionMask {
    pub fn new(grid: Grid, flags: Vec<bool>) -> Result<Self> {
        if flags.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} flags for a grid of {} cells",
                flags.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, flags })
    }

    pub(crate) fn from_raw(grid: Grid, flags: Vec<bool>) -> Self {
        debug_assert_eq!(flags.len(), grid.len());
        Self { grid, flags }
    }

    pub fn empty(grid: &Grid) -> Self {
        Self::from_raw(grid.clone(), vec![false; grid.len()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    /// Physical measure of the marked cells.
    pub fn measure(&self) -> f64 {
        self.count() as f64 * self.grid.cell_volume()
    }

    pub fn intersects(&self, other: &RegionMask) -> bool {
        self.flags.iter().zip(&other.flags).any(|(&a, &b)| a && b)
    }

    pub fn union(&self, other: &RegionMask) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("masks on different grids".into()));
        }
        Ok(Self::from_raw(
            self.grid.clone(),
            self.flags.iter().zip(&other.flags).map(|(&a, &b)| a || b).collect(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2() -> Grid {
        Grid::new(&[2, 2], &[0.0, 0.0], &[1.0, 1.0], &[false, false]).unwrap()
    }

    #[test]
    fn rejects_non_finite_and_wrong_length() {
        assert!(matches!(
            ScalarField::new(grid2(), vec![0.0, f64::NAN, 0.0, 0.0]),
            Err(Error::NonFinite { index: 1 })
        ));
        assert!(ScalarField::new(grid2(), vec![0.0; 3]).is_err());
    }

    #[test]
    fn sample_constant_and_coordinate() {
        let ones = sample_function(&grid2(), |_| 1.0).unwrap();
        assert!(ones.values().iter().all(|&v| v == 1.0));
        let g = Grid::new(&[2], &[0.0], &[1.0], &[false]).unwrap();
        let x = sample_function(&g, |p| p[0]).unwrap();
        assert_eq!(x.values(), &[0.25, 0.75]);
    }

    #[test]
    fn mean_zero_cases() {
        let c = ScalarField::constant(&grid2(), 3.5).unwrap();
        assert!(mean_zero(&c).values().iter().all(|&v| v == 0.0));
        let f = ScalarField::new(grid2(), vec![1.0, -1.0, 2.0, -2.0]).unwrap();
        assert_eq!(mean_zero(&f), f);
    }

    #[test]
    fn vector_field_rejects_mismatched_grids() {
        let a = ScalarField::zeros(&grid2());
        let other = Grid::new(&[2, 2], &[0.0, 0.0], &[2.0, 1.0], &[false, false]).unwrap();
        let b = ScalarField::zeros(&other);
        assert!(matches!(VectorField::new(vec![a.clone(), b]), Err(Error::GridMismatch(_))));
        assert!(VectorField::new(vec![a]).is_err());
    }

    #[test]
    fn magnitude_norms() {
        let g = grid2();
        let u = VectorField::new(vec![
            ScalarField::new(g.clone(), vec![3.0, 0.0, -1.0, 0.0]).unwrap(),
            ScalarField::new(g, vec![4.0, 0.0, 0.0, 2.0]).unwrap(),
        ])
        .unwrap();
        assert_eq!(u.linf(), 5.0);
        assert_eq!(u.linf_components(), vec![3.0, 4.0]);
    }
}

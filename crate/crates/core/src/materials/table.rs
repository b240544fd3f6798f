use serde::{Deserialize, Serialize};

use super::{MaterialError, StaticResponse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// `ln(eps - 1)` linear in `ln xi` between nodes; falls back to `eps`
    /// linear in `ln xi` when a node has `eps == 1`.
    #[default]
    LogLog,
}

/// Rule below the first node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LowExtrapolation {
    Disabled,
    /// `eps - 1 ∝ xi^-2`, the plasma-like behaviour of a conductor.
    #[default]
    InverseSquare,
    /// Hold the first node's value (insulator).
    Constant,
}

/// Rule above the last node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HighExtrapolation {
    Disabled,
    /// `eps - 1 ∝ xi^-2`, tending to one.
    #[default]
    InverseSquare,
    /// `eps = 1` beyond the grid.
    Vacuum,
}

/// `eps(i xi)` sampled on a strictly increasing grid of imaginary
/// frequencies (rad/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedDielectric {
    grid: Vec<f64>,
    values: Vec<f64>,
    pub interpolation: Interpolation,
    pub low: LowExtrapolation,
    pub high: HighExtrapolation,
}

impl TabulatedDielectric {
    /// Validate and build a table with the default interpolation and
    /// extrapolation rules.
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self, MaterialError> {
        if grid.len() != values.len() {
            return Err(MaterialError::LengthMismatch { grid: grid.len(), values: values.len() });
        }
        if grid.len() < 2 {
            return Err(MaterialError::TooFewNodes(grid.len()));
        }
        for (i, (&x, &v)) in grid.iter().zip(&values).enumerate() {
            if !x.is_finite() || !v.is_finite() {
                return Err(MaterialError::NonFinite(i));
            }
            if x <= 0.0 || (i > 0 && x <= grid[i - 1]) {
                return Err(MaterialError::NonIncreasingGrid(i));
            }
            if v < 1.0 {
                return Err(MaterialError::PermittivityBelowOne { index: i, value: v });
            }
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            log::warn!("tabulated eps(i xi) is not monotonically decreasing; check the source data");
        }
        Ok(TabulatedDielectric {
            grid,
            values,
            interpolation: Interpolation::LogLog,
            low: LowExtrapolation::default(),
            high: HighExtrapolation::default(),
        })
    }

    pub fn with_extrapolation(mut self, low: LowExtrapolation, high: HighExtrapolation) -> Self {
        self.low = low;
        self.high = high;
        self
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn epsilon(&self, xi: f64) -> Result<f64, MaterialError> {
        let n = self.grid.len();
        let (first, last) = (self.grid[0], self.grid[n - 1]);
        if xi < first {
            let v0 = self.values[0];
            return match self.low {
                LowExtrapolation::Disabled => Err(self.outside(xi)),
                LowExtrapolation::InverseSquare => Ok(1.0 + (v0 - 1.0) * (first / xi).powi(2)),
                LowExtrapolation::Constant => Ok(v0),
            };
        }
        if xi > last {
            let vn = self.values[n - 1];
            return match self.high {
                HighExtrapolation::Disabled => Err(self.outside(xi)),
                HighExtrapolation::InverseSquare => Ok(1.0 + (vn - 1.0) * (last / xi).powi(2)),
                HighExtrapolation::Vacuum => Ok(1.0),
            };
        }
        // First node >= xi; xi lies in [grid[i-1], grid[i]].
        let i = self.grid.partition_point(|&g| g < xi).max(1);
        let (x0, x1) = (self.grid[i - 1], self.grid[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        let t = (xi / x0).ln() / (x1 / x0).ln();
        let (e0, e1) = (v0 - 1.0, v1 - 1.0);
        if e0 > 0.0 && e1 > 0.0 {
            Ok(1.0 + (e0.ln() + t * (e1 / e0).ln()).exp())
        } else {
            Ok(v0 + t * (v1 - v0))
        }
    }

    pub(super) fn static_response(&self) -> Result<StaticResponse, MaterialError> {
        let (x0, v0) = (self.grid[0], self.values[0]);
        match self.low {
            LowExtrapolation::Disabled => Err(self.outside(0.0)),
            LowExtrapolation::InverseSquare if v0 > 1.0 => {
                Ok(StaticResponse::Conductor { omega_sq: (v0 - 1.0) * x0 * x0 })
            }
            LowExtrapolation::InverseSquare => Ok(StaticResponse::Dielectric { eps0: 1.0 }),
            LowExtrapolation::Constant => Ok(StaticResponse::Dielectric { eps0: v0 }),
        }
    }

    fn outside(&self, xi: f64) -> MaterialError {
        MaterialError::OutsideGrid { xi, min: self.grid[0], max: self.grid[self.grid.len() - 1] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn plasma_like() -> TabulatedDielectric {
        let grid: Vec<f64> = (0..20).map(|i| 1e13 * 1.6f64.powi(i)).collect();
        let values = grid.iter().map(|x| 1.0 + (1e15 / x).powi(2)).collect();
        TabulatedDielectric::new(grid, values).unwrap()
    }

    #[test]
    fn reproduces_power_law_exactly() {
        let t = plasma_like();
        for xi in [1e11f64, 2.3e13, 7.7e14, 3e16, 1e18] {
            let exact = 1.0 + (1e15 / xi).powi(2);
            assert!((t.epsilon(xi).unwrap() / exact - 1.0).abs() < 1e-12, "xi = {xi}");
        }
    }

    #[test]
    fn nodes_are_exact() {
        let t = plasma_like();
        for (x, v) in t.grid().iter().zip(t.values()) {
            assert!((t.epsilon(*x).unwrap() / v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn disabled_extrapolation_errors() {
        let t = plasma_like().with_extrapolation(LowExtrapolation::Disabled, HighExtrapolation::Disabled);
        assert!(matches!(t.epsilon(1e12), Err(MaterialError::OutsideGrid { .. })));
        assert!(matches!(t.epsilon(1e18), Err(MaterialError::OutsideGrid { .. })));
        assert!(t.static_response().is_err());
    }

    #[test]
    fn vacuum_table() {
        let t = TabulatedDielectric::new(vec![1.0, 2.0, 3.0], vec![1.0; 3]).unwrap();
        assert_eq!(t.epsilon(1.5).unwrap(), 1.0);
        assert_eq!(t.epsilon(0.1).unwrap(), 1.0);
    }

    #[test]
    fn validation() {
        assert_eq!(
            TabulatedDielectric::new(vec![1.0, 1.0], vec![2.0, 2.0]).unwrap_err(),
            MaterialError::NonIncreasingGrid(1)
        );
        assert!(matches!(
            TabulatedDielectric::new(vec![1.0, 2.0], vec![2.0, 0.5]).unwrap_err(),
            MaterialError::PermittivityBelowOne { index: 1, .. }
        ));
        assert_eq!(TabulatedDielectric::new(vec![1.0], vec![2.0]).unwrap_err(), MaterialError::TooFewNodes(1));
    }

    proptest! {
        #[test]
        fn interpolant_monotone_and_bounded(
            mut vals in proptest::collection::vec(1.0f64..1e4, 3..12),
            a in 0.0f64..1.0, b in 0.0f64..1.0,
        ) {
            vals.sort_by(|x, y| y.total_cmp(x));
            let grid: Vec<f64> = (0..vals.len()).map(|i| 1e14 * 3f64.powi(i as i32)).collect();
            let t = TabulatedDielectric::new(grid.clone(), vals).unwrap();
            let span = (grid[grid.len() - 1] / grid[0]).ln();
            let xa = grid[0] * (a * span).exp();
            let xb = grid[0] * (b * span).exp();
            let (lo, hi) = if xa < xb { (xa, xb) } else { (xb, xa) };
            let (ea, eb) = (t.epsilon(lo).unwrap(), t.epsilon(hi).unwrap());
            prop_assert!(eb <= ea * (1.0 + 1e-14));
            prop_assert!(eb >= 1.0);
        }
    }
}

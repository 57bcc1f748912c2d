//! Asset universes and reference frontiers.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

/// Tolerance used when checking that a correlation matrix is symmetric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("instance has no assets")]
    Empty,
    #[error("expected {expected} values for {what}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("standard deviation of asset {asset} is negative or not finite: {value}")]
    InvalidSigma { asset: usize, value: f64 },
    #[error("expected return of asset {asset} is not finite")]
    InvalidMu { asset: usize },
    #[error("correlation ({i}, {j}) = {value} outside [-1, 1]")]
    CorrelationRange { i: usize, j: usize, value: f64 },
    #[error("correlation matrix not symmetric at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },
    #[error("correlation diagonal ({i}, {i}) = {value}, expected 1")]
    Diagonal { i: usize, value: f64 },
    #[error("asset index {index} out of range for {n_assets} assets")]
    OutOfBounds { index: usize, n_assets: usize },
    #[error("reference front is empty")]
    EmptyFront,
    #[error("reference front point {index} is not finite")]
    NonFiniteFront { index: usize },
}

/// An asset universe: expected returns, standard deviations and the
/// correlation matrix, with the dense covariance matrix materialized once.
///
/// Indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    name: String,
    mu: Vec<f64>,
    sigma: Vec<f64>,
    rho: Vec<f64>,
    cov: Vec<f64>,
}

impl Instance {
    /// Builds an instance from a row-major `n x n` correlation matrix.
    ///
    /// Diagonal entries within `1e-9` of one are snapped to exactly one.
    pub fn new(
        name: impl Into<String>,
        mu: Vec<f64>,
        sigma: Vec<f64>,
        mut rho: Vec<f64>,
    ) -> Result<Self, InstanceError> {
        let n = mu.len();
        if n == 0 {
            return Err(InstanceError::Empty);
        }
        if sigma.len() != n {
            return Err(InstanceError::Dimension {
                what: "standard deviations",
                expected: n,
                found: sigma.len(),
            });
        }
        if rho.len() != n * n {
            return Err(InstanceError::Dimension {
                what: "correlation entries",
                expected: n * n,
                found: rho.len(),
            });
        }
        for (asset, &m) in mu.iter().enumerate() {
            if !m.is_finite() {
                return Err(InstanceError::InvalidMu { asset });
            }
        }
        for (asset, &s) in sigma.iter().enumerate() {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(InstanceError::InvalidSigma { asset, value: s });
            }
        }
        for i in 0..n {
            let d = rho[i * n + i];
            if !((d - 1.0).abs() <= 1e-9) {
                return Err(InstanceError::Diagonal { i, value: d });
            }
            rho[i * n + i] = 1.0;
            for j in 0..n {
                let v = rho[i * n + j];
                if !(v.abs() <= 1.0 + 1e-9) {
                    return Err(InstanceError::CorrelationRange { i, j, value: v });
                }
                if j > i && !((v - rho[j * n + i]).abs() <= SYMMETRY_TOLERANCE) {
                    return Err(InstanceError::Asymmetric { i, j });
                }
            }
        }

        // Canonical multiplication order (smaller index first) makes the
        // covariance matrix exactly symmetric.
        let mut cov = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = rho[i * n + j] * sigma[i] * sigma[j];
                cov[i * n + j] = v;
                cov[j * n + i] = v;
            }
        }

        Ok(Self {
            name: name.into(),
            mu,
            sigma,
            rho,
            cov,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_assets(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Correlation between assets `i` and `j`. Panics when out of range.
    #[inline]
    pub fn rho(&self, i: usize, j: usize) -> f64 {
        self.rho[i * self.n_assets() + j]
    }

    /// Covariance `rho_ij * sigma_i * sigma_j`, bounds checked.
    pub fn covariance(&self, i: usize, j: usize) -> Result<f64, InstanceError> {
        let n = self.n_assets();
        for index in [i, j] {
            if index >= n {
                return Err(InstanceError::OutOfBounds { index, n_assets: n });
            }
        }
        Ok(self.cov[i * n + j])
    }

    /// Unchecked covariance lookup for hot loops. Panics when out of range.
    #[inline]
    pub fn cov(&self, i: usize, j: usize) -> f64 {
        self.cov[i * self.n_assets() + j]
    }
}

/// One point of a reference frontier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontPoint {
    pub ret: f64,
    pub risk: f64,
}

impl FrontPoint {
    pub fn new(ret: f64, risk: f64) -> Self {
        Self { ret, risk }
    }

    /// Minimization form `[risk, -return]`.
    pub fn minimization(&self) -> crate::Point {
        [self.risk, -self.ret]
    }

    /// Lower-or-equal risk and higher-or-equal return, strictly better in one.
    pub fn dominates(&self, other: &FrontPoint) -> bool {
        self.risk <= other.risk
            && self.ret >= other.ret
            && (self.risk < other.risk || self.ret > other.ret)
    }
}

/// A mutually non-dominated set of (return, risk) points sorted by strictly
/// increasing risk.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceFront {
    points: Vec<FrontPoint>,
}

impl ReferenceFront {
    /// Sorts the points and drops every dominated point and duplicate.
    /// Returns the cleaned front and the number of points removed.
    pub fn from_points(mut points: Vec<FrontPoint>) -> Result<(Self, usize), InstanceError> {
        if points.is_empty() {
            return Err(InstanceError::EmptyFront);
        }
        if let Some(index) = points
            .iter()
            .position(|p| !(p.ret.is_finite() && p.risk.is_finite()))
        {
            return Err(InstanceError::NonFiniteFront { index });
        }
        let original = points.len();
        // Ascending risk, then descending return: the first point of every
        // equal-risk run is the only candidate from that run.
        points.sort_by(|a, b| a.risk.total_cmp(&b.risk).then(b.ret.total_cmp(&a.ret)));
        let mut kept: Vec<FrontPoint> = Vec::with_capacity(points.len());
        for p in points {
            match kept.last() {
                Some(last) if p.ret <= last.ret => {}
                _ => kept.push(p),
            }
        }
        let removed = original - kept.len();
        Ok((Self { points: kept }, removed))
    }

    pub fn points(&self) -> &[FrontPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn minimization_points(&self) -> Vec<crate::Point> {
        self.points.iter().map(FrontPoint::minimization).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_asset(rho12: f64) -> Instance {
        Instance::new("two", vec![0.01, 0.02], vec![0.1, 0.2], vec![1.0, rho12, rho12, 1.0])
            .unwrap()
    }

    #[test]
    fn diagonal_covariance_is_variance() {
        let inst = two_asset(0.3);
        assert_eq!(inst.covariance(1, 1).unwrap(), 0.2 * 0.2);
    }

    #[test]
    fn zero_correlation_gives_zero_covariance() {
        let inst = two_asset(0.0);
        assert_eq!(inst.covariance(0, 1).unwrap(), 0.0);
    }

    #[test]
    fn covariance_is_exactly_symmetric() {
        let inst = Instance::new(
            "three",
            vec![0.0; 3],
            vec![0.013, 0.071, 0.0337],
            vec![1.0, 0.17, -0.31, 0.17, 1.0, 0.77, -0.31, 0.77, 1.0],
        )
        .unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(
                    inst.covariance(i, j).unwrap().to_bits(),
                    inst.covariance(j, i).unwrap().to_bits()
                );
            }
        }
    }

    #[test]
    fn covariance_out_of_range() {
        let inst = two_asset(0.0);
        assert_eq!(
            inst.covariance(0, 2),
            Err(InstanceError::OutOfBounds { index: 2, n_assets: 2 })
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            Instance::new("x", vec![0.0], vec![-1.0], vec![1.0]),
            Err(InstanceError::InvalidSigma { .. })
        ));
        assert!(matches!(
            Instance::new("x", vec![0.0; 2], vec![1.0; 2], vec![1.0, 0.5, 0.4, 1.0]),
            Err(InstanceError::Asymmetric { .. })
        ));
        assert!(matches!(
            Instance::new("x", vec![0.0; 2], vec![1.0; 2], vec![1.0, 1.5, 1.5, 1.0]),
            Err(InstanceError::CorrelationRange { .. })
        ));
        assert!(matches!(
            Instance::new("x", vec![], vec![], vec![]),
            Err(InstanceError::Empty)
        ));
    }

    #[test]
    fn front_sorted_and_cleaned() {
        let (front, removed) = ReferenceFront::from_points(vec![
            FrontPoint::new(0.005, 0.0002),
            FrontPoint::new(0.004, 0.0001),
        ])
        .unwrap();
        assert_eq!(removed, 0);
        assert_eq!(front.points()[0].risk, 0.0001);
        assert_eq!(front.points()[1].risk, 0.0002);

        let (front, removed) = ReferenceFront::from_points(vec![
            FrontPoint::new(0.004, 0.0001),
            FrontPoint::new(0.003, 0.00015),
            FrontPoint::new(0.005, 0.0002),
        ])
        .unwrap();
        assert_eq!(removed, 1);
        assert_eq!(front.len(), 2);
    }

    #[test]
    fn front_duplicates_and_equal_risk() {
        let (front, removed) = ReferenceFront::from_points(vec![
            FrontPoint::new(0.004, 0.0001),
            FrontPoint::new(0.004, 0.0001),
            FrontPoint::new(0.003, 0.0001),
        ])
        .unwrap();
        assert_eq!(removed, 2);
        assert_eq!(front.points(), &[FrontPoint::new(0.004, 0.0001)]);
        assert!(ReferenceFront::from_points(vec![]).is_err());
    }
}

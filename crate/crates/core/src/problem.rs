//! Objectives and constraint families of the cardinality-constrained
//! mean-variance model.
//!
//! Weights are held as integer lot counts; `w_i = y_i / T` where `T` is the
//! number of lots in one unit of capital. Every feasibility check is done in
//! integer arithmetic.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::instance::Instance;

/// Slack used when converting real bounds to lot counts, so that e.g.
/// `0.016 * 125 = 2.0000000000000004` still counts as two lots.
const LOT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstraintError {
    #[error("constraint set has no assets")]
    Empty,
    #[error("expected {expected} values for {what}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("cardinality {cardinality} must be in 1..={n_assets}")]
    Cardinality { cardinality: usize, n_assets: usize },
    #[error("{preassigned} pre-assigned assets exceed cardinality {cardinality}")]
    TooManyPreassigned {
        preassigned: usize,
        cardinality: usize,
    },
    #[error("pre-assigned asset {index} (1-based) does not exist in a {n_assets}-asset instance")]
    PreassignedOutOfRange { index: usize, n_assets: usize },
    #[error("bounds of asset {asset} invalid: floor {floor}, ceiling {ceiling}")]
    Bounds { asset: usize, floor: f64, ceiling: f64 },
    #[error("lot size {0} does not divide one exactly")]
    LotSize(f64),
    #[error(
        "no feasible allocation for every selection: floors may need {floor_lots} lots, \
         ceilings may allow only {ceiling_lots}, total is {total}"
    )]
    Infeasible {
        floor_lots: u64,
        ceiling_lots: u64,
        total: u32,
    },
}

/// Cardinality, floor/ceiling, pre-assignment and round-lot constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    cardinality: usize,
    floors: Vec<f64>,
    ceilings: Vec<f64>,
    preassigned: Vec<bool>,
    lots_per_unit: u32,
    floor_lots: Vec<u32>,
    ceiling_lots: Vec<u32>,
}

/// Number of lots in one unit of capital for lot size `tau`, if `1/tau` is
/// an integer.
pub fn lots_per_unit(tau: f64) -> Result<u32, ConstraintError> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(ConstraintError::LotSize(tau));
    }
    let t = libm::round(1.0 / tau);
    if (t * tau - 1.0).abs() > 1e-9 || t > u32::MAX as f64 {
        return Err(ConstraintError::LotSize(tau));
    }
    Ok(t as u32)
}

fn lots_at_least(weight: f64, total: u32) -> u32 {
    let lots = libm::ceil(weight * total as f64 - LOT_SLACK).max(0.0);
    (lots as u32).min(total)
}

fn lots_at_most(weight: f64, total: u32) -> u32 {
    let lots = libm::floor(weight * total as f64 + LOT_SLACK).max(0.0);
    (lots as u32).min(total)
}

impl ConstraintSet {
    pub fn new(
        cardinality: usize,
        floors: Vec<f64>,
        ceilings: Vec<f64>,
        preassigned: Vec<bool>,
        lots_per_unit: u32,
    ) -> Result<Self, ConstraintError> {
        let n = floors.len();
        if n == 0 {
            return Err(ConstraintError::Empty);
        }
        for (what, len) in [("ceilings", ceilings.len()), ("pre-assignment flags", preassigned.len())] {
            if len != n {
                return Err(ConstraintError::Dimension {
                    what,
                    expected: n,
                    found: len,
                });
            }
        }
        if cardinality == 0 || cardinality > n {
            return Err(ConstraintError::Cardinality {
                cardinality,
                n_assets: n,
            });
        }
        let l = preassigned.iter().filter(|&&z| z).count();
        if l > cardinality {
            return Err(ConstraintError::TooManyPreassigned {
                preassigned: l,
                cardinality,
            });
        }
        if lots_per_unit == 0 {
            return Err(ConstraintError::LotSize(f64::INFINITY));
        }

        let mut floor_lots = Vec::with_capacity(n);
        let mut ceiling_lots = Vec::with_capacity(n);
        for asset in 0..n {
            let (floor, ceiling) = (floors[asset], ceilings[asset]);
            let valid = (0.0..=1.0).contains(&floor) && (0.0..=1.0).contains(&ceiling) && floor <= ceiling;
            let lo = lots_at_least(floor, lots_per_unit);
            let hi = lots_at_most(ceiling, lots_per_unit);
            if !valid || lo > hi {
                return Err(ConstraintError::Bounds { asset, floor, ceiling });
            }
            floor_lots.push(lo);
            ceiling_lots.push(hi);
        }

        // Every K-subset must admit an allocation of exactly T lots; the
        // extreme subsets are the K largest floors and the K smallest ceilings.
        let mut sorted = floor_lots.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let worst_floor: u64 = sorted.iter().take(cardinality).map(|&x| x as u64).sum();
        let mut sorted = ceiling_lots.clone();
        sorted.sort_unstable();
        let worst_ceiling: u64 = sorted.iter().take(cardinality).map(|&x| x as u64).sum();
        if worst_floor > lots_per_unit as u64 || worst_ceiling < lots_per_unit as u64 {
            return Err(ConstraintError::Infeasible {
                floor_lots: worst_floor,
                ceiling_lots: worst_ceiling,
                total: lots_per_unit,
            });
        }

        Ok(Self {
            cardinality,
            floors,
            ceilings,
            preassigned,
            lots_per_unit,
            floor_lots,
            ceiling_lots,
        })
    }

    /// Same floor and ceiling for every asset. `preassigned` holds 0-based
    /// asset indices.
    pub fn uniform(
        n_assets: usize,
        cardinality: usize,
        floor: f64,
        ceiling: f64,
        preassigned: &[usize],
        lot_size: f64,
    ) -> Result<Self, ConstraintError> {
        let mut flags = vec![false; n_assets];
        for &index in preassigned {
            if index >= n_assets {
                return Err(ConstraintError::PreassignedOutOfRange {
                    index: index + 1,
                    n_assets,
                });
            }
            flags[index] = true;
        }
        Self::new(
            cardinality,
            vec![floor; n_assets],
            vec![ceiling; n_assets],
            flags,
            lots_per_unit(lot_size)?,
        )
    }

    pub fn n_assets(&self) -> usize {
        self.floors.len()
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn floors(&self) -> &[f64] {
        &self.floors
    }

    pub fn ceilings(&self) -> &[f64] {
        &self.ceilings
    }

    pub fn preassigned(&self) -> &[bool] {
        &self.preassigned
    }

    pub fn is_preassigned(&self, asset: usize) -> bool {
        self.preassigned[asset]
    }

    /// Number of pre-assigned assets (L).
    pub fn n_preassigned(&self) -> usize {
        self.preassigned.iter().filter(|&&z| z).count()
    }

    /// Lots in one unit of capital (`1/tau`).
    pub fn lots_per_unit(&self) -> u32 {
        self.lots_per_unit
    }

    pub fn lot_size(&self) -> f64 {
        1.0 / self.lots_per_unit as f64
    }

    /// Smallest lot count satisfying the floor of `asset`.
    pub fn floor_lots(&self, asset: usize) -> u32 {
        self.floor_lots[asset]
    }

    /// Largest lot count satisfying the ceiling of `asset`.
    pub fn ceiling_lots(&self, asset: usize) -> u32 {
        self.ceiling_lots[asset]
    }
}

/// The two standard constraint configurations used with the OR-Library
/// benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintPreset {
    /// K = 10, floor 0.01, ceiling 1.0, asset 30 pre-assigned, lot 0.008.
    First,
    /// K = 15, floor 0.01, ceiling 1.0, asset 5 pre-assigned, lot 0.008.
    Second,
}

impl ConstraintPreset {
    pub fn cardinality(self) -> usize {
        match self {
            Self::First => 10,
            Self::Second => 15,
        }
    }

    /// 1-based index of the pre-assigned asset.
    pub fn preassigned_asset(self) -> usize {
        match self {
            Self::First => 30,
            Self::Second => 5,
        }
    }

    pub fn build(self, n_assets: usize) -> Result<ConstraintSet, ConstraintError> {
        let index = self.preassigned_asset();
        if index > n_assets {
            return Err(ConstraintError::PreassignedOutOfRange { index, n_assets });
        }
        ConstraintSet::uniform(n_assets, self.cardinality(), 0.01, 1.0, &[index - 1], 0.008)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("portfolio has {found} assets, instance has {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("asset {asset} holds {lots} lots but is not selected")]
    UnselectedHolding { asset: usize, lots: u32 },
    #[error("selected asset index {0} out of range")]
    SelectionIndex(usize),
}

/// Decoded allocation before repair: selected assets plus real weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPortfolio {
    /// Selected asset indices, ascending.
    pub selected: Vec<usize>,
    /// One weight per asset; zero for assets outside the selection.
    pub weights: Vec<f64>,
}

impl RawPortfolio {
    pub fn n_assets(&self) -> usize {
        self.weights.len()
    }
}

/// A phenotype: selection plus integer lot counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Portfolio {
    selected: Vec<usize>,
    lots: Vec<u32>,
    lots_per_unit: u32,
}

impl Portfolio {
    /// `selected` is sorted and deduplicated here; every asset outside it
    /// must hold zero lots.
    pub fn new(mut selected: Vec<usize>, lots: Vec<u32>, lots_per_unit: u32) -> Result<Self, ProblemError> {
        selected.sort_unstable();
        selected.dedup();
        if let Some(&bad) = selected.iter().find(|&&i| i >= lots.len()) {
            return Err(ProblemError::SelectionIndex(bad));
        }
        let mut mask = vec![false; lots.len()];
        for &i in &selected {
            mask[i] = true;
        }
        if let Some((asset, &l)) = lots.iter().enumerate().find(|&(i, &l)| l > 0 && !mask[i]) {
            return Err(ProblemError::UnselectedHolding { asset, lots: l });
        }
        Ok(Self {
            selected,
            lots,
            lots_per_unit,
        })
    }

    pub fn n_assets(&self) -> usize {
        self.lots.len()
    }

    /// Selected asset indices, ascending.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn is_selected(&self, asset: usize) -> bool {
        self.selected.binary_search(&asset).is_ok()
    }

    pub fn lots(&self) -> &[u32] {
        &self.lots
    }

    pub fn lots_per_unit(&self) -> u32 {
        self.lots_per_unit
    }

    pub fn weight(&self, asset: usize) -> f64 {
        self.lots[asset] as f64 / self.lots_per_unit as f64
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.n_assets()).map(|i| self.weight(i)).collect()
    }
}

/// Risk (variance) and expected return of a portfolio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveVector {
    pub risk: f64,
    pub ret: f64,
}

impl ObjectiveVector {
    /// `[risk, -return]`, the form every selection routine minimizes.
    pub fn minimization(&self) -> crate::Point {
        [self.risk, -self.ret]
    }

    pub fn from_minimization(p: crate::Point) -> Self {
        Self { risk: p[0], ret: -p[1] }
    }
}

/// Risk and return of `p`. Only selected assets are visited, so the cost is
/// O(K^2).
pub fn evaluate(p: &Portfolio, inst: &Instance) -> Result<ObjectiveVector, ProblemError> {
    if p.n_assets() != inst.n_assets() {
        return Err(ProblemError::Dimension {
            expected: inst.n_assets(),
            found: p.n_assets(),
        });
    }
    let mu = inst.mu();
    let mut risk = 0.0;
    let mut ret = 0.0;
    for &i in &p.selected {
        let wi = p.weight(i);
        ret += wi * mu[i];
        let mut row = 0.0;
        for &j in &p.selected {
            row += p.weight(j) * inst.cov(i, j);
        }
        risk += wi * row;
    }
    Ok(ObjectiveVector { risk, ret })
}

/// One flag per constraint family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub sum_to_one: bool,
    pub cardinality: bool,
    pub floor_ceiling: bool,
    pub preassignment: bool,
    pub round_lot: bool,
    pub binary: bool,
}

impl FeasibilityReport {
    pub fn overall(&self) -> bool {
        self.sum_to_one
            && self.cardinality
            && self.floor_ceiling
            && self.preassignment
            && self.round_lot
            && self.binary
    }

    fn families(&self) -> [(&'static str, bool); 6] {
        [
            ("sum_to_one", self.sum_to_one),
            ("cardinality", self.cardinality),
            ("floor_ceiling", self.floor_ceiling),
            ("preassignment", self.preassignment),
            ("round_lot", self.round_lot),
            ("binary", self.binary),
        ]
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, ok) in self.families() {
            writeln!(f, "{name}: {}", if ok { "ok" } else { "violated" })?;
        }
        write!(f, "overall: {}", if self.overall() { "ok" } else { "violated" })
    }
}

/// Checks every constraint family exactly. Never fails; a dimension
/// mismatch reports every family as violated.
pub fn check_feasibility(p: &Portfolio, c: &ConstraintSet) -> FeasibilityReport {
    if p.n_assets() != c.n_assets() {
        return FeasibilityReport {
            sum_to_one: false,
            cardinality: false,
            floor_ceiling: false,
            preassignment: false,
            round_lot: false,
            binary: false,
        };
    }
    let total: u64 = p.lots.iter().map(|&l| l as u64).sum();
    let floor_ceiling = (0..p.n_assets()).all(|i| {
        if p.is_selected(i) {
            (c.floor_lots(i)..=c.ceiling_lots(i)).contains(&p.lots[i])
        } else {
            p.lots[i] == 0
        }
    });
    FeasibilityReport {
        sum_to_one: p.lots_per_unit == c.lots_per_unit() && total == c.lots_per_unit() as u64,
        cardinality: p.selected.len() == c.cardinality(),
        floor_ceiling,
        preassignment: (0..p.n_assets()).all(|i| !c.is_preassigned(i) || p.is_selected(i)),
        // Lots are integers, so weights are multiples of tau whenever both
        // sides agree on the lot size.
        round_lot: p.lots_per_unit == c.lots_per_unit(),
        binary: true,
    }
}

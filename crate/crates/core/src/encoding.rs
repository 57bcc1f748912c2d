//! Genotype to phenotype mapping.
//!
//! Two schemes share one selection rule: every pre-assigned asset is held,
//! and the remaining `K - L` slots go to the non-pre-assigned assets with
//! the highest genes (lower index wins ties).
//!
//! * CCS: one vector of `N` genes drives both the selection and the weights.
//! * DCS: `2N` genes; the first half selects, the second half weights.
//!
//! Decoded weights are then repaired into integer lot counts that satisfy
//! every constraint family.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::problem::{ConstraintSet, Portfolio, RawPortfolio};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Compressed coding: `N` genes.
    Ccs,
    /// Direct coding with two real-valued halves: `2N` genes.
    Dcs,
}

impl Scheme {
    pub fn genome_len(self, n_assets: usize) -> usize {
        match self {
            Scheme::Ccs => n_assets,
            Scheme::Dcs => 2 * n_assets,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Ccs => "CCS",
            Scheme::Dcs => "DCS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EncodingError {
    #[error("{scheme:?} genotype for {n_assets} assets needs {expected} genes, found {found}")]
    Length {
        scheme: Scheme,
        n_assets: usize,
        expected: usize,
        found: usize,
    },
    #[error("gene {index} = {value} outside [0, 1]")]
    GeneRange { index: usize, value: f64 },
    #[error("genotype has {found} assets, constraint set has {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("{preassigned} pre-assigned assets exceed cardinality {cardinality}")]
    Preassignment {
        preassigned: usize,
        cardinality: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RepairError {
    #[error("portfolio has {found} assets, constraint set has {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("{found} assets selected, cardinality is {expected}")]
    SelectionSize { expected: usize, found: usize },
    #[error("pre-assigned asset {0} is not selected")]
    MissingPreassigned(usize),
    #[error("selection cannot hold {total} lots: floors need {floor_lots}, ceilings allow {ceiling_lots}")]
    Infeasible {
        floor_lots: u64,
        ceiling_lots: u64,
        total: u32,
    },
}

/// A search point: every gene lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Genotype {
    genes: Vec<f64>,
    scheme: Scheme,
}

impl Genotype {
    pub fn new(scheme: Scheme, n_assets: usize, genes: Vec<f64>) -> Result<Self, EncodingError> {
        let expected = scheme.genome_len(n_assets);
        if genes.len() != expected {
            return Err(EncodingError::Length {
                scheme,
                n_assets,
                expected,
                found: genes.len(),
            });
        }
        if let Some((index, &value)) = genes
            .iter()
            .enumerate()
            .find(|(_, g)| !(0.0..=1.0).contains(*g))
        {
            return Err(EncodingError::GeneRange { index, value });
        }
        Ok(Self { genes, scheme })
    }

    /// Builds a genotype, clamping every gene into `[0, 1]` (NaN becomes 0).
    pub(crate) fn clamped(scheme: Scheme, mut genes: Vec<f64>) -> Self {
        for g in &mut genes {
            *g = if g.is_nan() { 0.0 } else { g.clamp(0.0, 1.0) };
        }
        Self { genes, scheme }
    }

    pub fn genes(&self) -> &[f64] {
        &self.genes
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn n_assets(&self) -> usize {
        match self.scheme {
            Scheme::Ccs => self.genes.len(),
            Scheme::Dcs => self.genes.len() / 2,
        }
    }

    /// Genes that rank assets for selection.
    pub fn selection_genes(&self) -> &[f64] {
        &self.genes[..self.n_assets()]
    }

    /// Genes that become weights after normalization.
    pub fn weight_genes(&self) -> &[f64] {
        match self.scheme {
            Scheme::Ccs => &self.genes,
            Scheme::Dcs => &self.genes[self.n_assets()..],
        }
    }

    pub fn into_genes(self) -> Vec<f64> {
        self.genes
    }
}

/// Samples i.i.d. uniform genes.
pub fn random_genotype<R: Rng + ?Sized>(scheme: Scheme, n_assets: usize, rng: &mut R) -> Genotype {
    let genes = (0..scheme.genome_len(n_assets)).map(|_| rng.gen::<f64>()).collect();
    Genotype { genes, scheme }
}

/// Pre-assigned assets plus the `K - L` highest-ranked others, ascending.
pub fn select_assets(rank: &[f64], c: &ConstraintSet) -> Result<Vec<usize>, EncodingError> {
    if rank.len() != c.n_assets() {
        return Err(EncodingError::Dimension {
            expected: c.n_assets(),
            found: rank.len(),
        });
    }
    let l = c.n_preassigned();
    let k = c.cardinality();
    if l > k {
        return Err(EncodingError::Preassignment {
            preassigned: l,
            cardinality: k,
        });
    }
    let mut free: Vec<usize> = (0..rank.len()).filter(|&i| !c.is_preassigned(i)).collect();
    free.sort_by(|&a, &b| rank[b].total_cmp(&rank[a]).then(a.cmp(&b)));
    let mut selected: Vec<usize> = (0..rank.len()).filter(|&i| c.is_preassigned(i)).collect();
    selected.extend_from_slice(&free[..k - l]);
    selected.sort_unstable();
    Ok(selected)
}

/// Normalizes `values` over the selection; an all-zero selection gets
/// equal weights.
fn normalized_weights(values: &[f64], selected: &[usize]) -> Vec<f64> {
    let mut weights = vec![0.0; values.len()];
    let total: f64 = selected.iter().map(|&i| values[i]).sum();
    if total > 0.0 {
        for &i in selected {
            weights[i] = values[i] / total;
        }
    } else {
        let share = 1.0 / selected.len() as f64;
        for &i in selected {
            weights[i] = share;
        }
    }
    weights
}

fn decode_halves(
    rank: &[f64],
    weight_genes: &[f64],
    c: &ConstraintSet,
) -> Result<RawPortfolio, EncodingError> {
    let selected = select_assets(rank, c)?;
    let weights = normalized_weights(weight_genes, &selected);
    Ok(RawPortfolio { selected, weights })
}

/// CCS decode: rank and weight with the same genes.
pub fn ccs_decode(g: &Genotype, c: &ConstraintSet) -> Result<RawPortfolio, EncodingError> {
    debug_assert_eq!(g.scheme(), Scheme::Ccs);
    decode_halves(g.genes(), g.genes(), c)
}

/// Real-valued DCS decode: rank with the first half, weight with the second.
pub fn dcs_decode(g: &Genotype, c: &ConstraintSet) -> Result<RawPortfolio, EncodingError> {
    debug_assert_eq!(g.scheme(), Scheme::Dcs);
    let n = g.n_assets();
    decode_halves(&g.genes()[..n], &g.genes()[n..], c)
}

pub fn decode(g: &Genotype, c: &ConstraintSet) -> Result<RawPortfolio, EncodingError> {
    match g.scheme() {
        Scheme::Ccs => ccs_decode(g, c),
        Scheme::Dcs => dcs_decode(g, c),
    }
}

/// Turns decoded weights into a feasible lot allocation.
///
/// All arithmetic is in lots (`T = 1/tau` lots per unit):
/// 1. raise each selected asset to its floor lot count (and cap it at its
///    ceiling lot count);
/// 2. truncate the remaining fraction of a lot;
/// 3. while the total exceeds `T`, take one lot from the largest holding
///    still above its floor; while it falls short, give one lot to the
///    smallest holding still below its ceiling (lowest index on ties).
pub fn repair(raw: &RawPortfolio, c: &ConstraintSet) -> Result<Portfolio, RepairError> {
    let n = c.n_assets();
    if raw.n_assets() != n {
        return Err(RepairError::Dimension {
            expected: n,
            found: raw.n_assets(),
        });
    }
    if raw.selected.len() != c.cardinality() {
        return Err(RepairError::SelectionSize {
            expected: c.cardinality(),
            found: raw.selected.len(),
        });
    }
    let mut mask = vec![false; n];
    for &i in &raw.selected {
        mask[i] = true;
    }
    if let Some(i) = (0..n).find(|&i| c.is_preassigned(i) && !mask[i]) {
        return Err(RepairError::MissingPreassigned(i));
    }

    let total = c.lots_per_unit();
    let floor_sum: u64 = raw.selected.iter().map(|&i| c.floor_lots(i) as u64).sum();
    let ceiling_sum: u64 = raw.selected.iter().map(|&i| c.ceiling_lots(i) as u64).sum();
    if floor_sum > total as u64 || ceiling_sum < total as u64 {
        return Err(RepairError::Infeasible {
            floor_lots: floor_sum,
            ceiling_lots: ceiling_sum,
            total,
        });
    }

    let mut lots = vec![0u32; n];
    let mut sum: u64 = 0;
    for &i in &raw.selected {
        let w = raw.weights[i];
        let exact = if w.is_finite() { w.max(0.0) * total as f64 } else { 0.0 };
        // Slack keeps exact multiples such as 0.232 * 125 from truncating to 28.
        let whole = libm::floor(exact + 1e-9).min(total as f64) as u32;
        let y = whole.max(c.floor_lots(i)).min(c.ceiling_lots(i));
        lots[i] = y;
        sum += y as u64;
    }

    while sum > total as u64 {
        let mut pick: Option<usize> = None;
        for &i in &raw.selected {
            if lots[i] > c.floor_lots(i) && pick.is_none_or(|p| lots[i] > lots[p]) {
                pick = Some(i);
            }
        }
        let i = pick.expect("floor sum below total guarantees a reducible asset");
        lots[i] -= 1;
        sum -= 1;
    }
    while sum < total as u64 {
        let mut pick: Option<usize> = None;
        for &i in &raw.selected {
            if lots[i] < c.ceiling_lots(i) && pick.is_none_or(|p| lots[i] < lots[p]) {
                pick = Some(i);
            }
        }
        let i = pick.expect("ceiling sum above total guarantees an increasable asset");
        lots[i] += 1;
        sum += 1;
    }

    Ok(Portfolio::new(raw.selected.clone(), lots, total).expect("lots only on selected assets"))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Repair(#[from] RepairError),
}

/// Decode followed by repair. The genotype itself is left untouched.
pub fn decode_and_repair(g: &Genotype, c: &ConstraintSet) -> Result<Portfolio, DecodeError> {
    Ok(repair(&decode(g, c)?, c)?)
}

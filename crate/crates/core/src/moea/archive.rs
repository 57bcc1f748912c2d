//! Bounded external archive of non-dominated individuals.

use alloc::vec::Vec;

use super::sorting::{crowding_distance, dominates};
use super::Individual;
use crate::Point;

/// Keeps the non-dominated subset of everything offered to it. When the
/// archive outgrows its capacity, the member with the smallest crowding
/// distance is dropped (lowest index on ties), one at a time.
#[derive(Debug, Clone)]
pub struct Archive {
    capacity: usize,
    members: Vec<Individual>,
}

impl Archive {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            members: Vec::new(),
        }
    }

    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub fn into_members(self) -> Vec<Individual> {
        self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Returns whether `candidate` is in the archive afterwards. Candidates equal in
    /// objectives to a member are rejected.
    pub fn offer(&mut self, candidate: &Individual) -> bool {
        let f = candidate.objectives;
        if self
            .members
            .iter()
            .any(|m| m.objectives == f || dominates(&m.objectives, &f))
        {
            return false;
        }
        self.members.retain(|m| !dominates(&f, &m.objectives));
        self.members.push(candidate.clone());
        while self.members.len() > self.capacity {
            let pts: Vec<Point> = self.members.iter().map(|m| m.objectives).collect();
            let cd = crowding_distance(&pts);
            let mut worst = 0;
            for (i, d) in cd.iter().enumerate() {
                if *d < cd[worst] {
                    worst = i;
                }
            }
            self.members.remove(worst);
        }
        self.members.iter().any(|m| m.objectives == f)
    }
}

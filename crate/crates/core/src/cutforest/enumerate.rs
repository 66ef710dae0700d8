use super::{CutForest, ForestError};
use crate::subdivision::WeightedSubdivision;

pub const ENUMERATION_LIMIT: usize = 14;

const UNSET: usize = usize::MAX;

/// Depth-first enumeration of parent assignments, rejecting any choice that closes a cycle.
pub struct ForestIter {
    corner_count: usize,
    candidates: Vec<Vec<usize>>,
    parent: Vec<usize>,
    choice: Vec<usize>,
    level: usize,
    done: bool,
}

impl ForestIter {
    fn closes_cycle(&self, level: usize, mut p: usize) -> bool {
        let v = self.corner_count + level;
        while p >= self.corner_count {
            if p == v {
                return true;
            }
            let next = self.parent[p - self.corner_count];
            if next == UNSET {
                return false;
            }
            p = next;
        }
        false
    }

    /// Moves to the next choice at the level above, or finishes.
    fn backtrack(&mut self) {
        if self.level == 0 {
            self.done = true;
            return;
        }
        self.level -= 1;
        self.parent[self.level] = UNSET;
        self.choice[self.level] += 1;
    }
}

impl Iterator for ForestIter {
    type Item = CutForest;

    fn next(&mut self) -> Option<CutForest> {
        let k = self.candidates.len();
        while !self.done {
            if self.level == k {
                let f = CutForest::new(self.corner_count, self.parent.clone());
                self.backtrack();
                return Some(f);
            }
            let l = self.level;
            while self.choice[l] < self.candidates[l].len() && self.closes_cycle(l, self.candidates[l][self.choice[l]]) {
                self.choice[l] += 1;
            }
            if self.choice[l] < self.candidates[l].len() {
                self.parent[l] = self.candidates[l][self.choice[l]];
                self.level += 1;
                if self.level < k {
                    self.choice[self.level] = 0;
                }
            } else {
                self.choice[l] = 0;
                self.backtrack();
            }
        }
        None
    }
}

/// Every cut forest of `G`, without duplicates. Refuses graphs with more than
/// [`ENUMERATION_LIMIT`] interior vertices.
pub fn enumerate_forests(s: &WeightedSubdivision) -> Result<ForestIter, ForestError> {
    let nb = s.corner_count();
    let k = s.node_count() - nb;
    if k > ENUMERATION_LIMIT {
        return Err(ForestError::TooLarge { interior: k, limit: ENUMERATION_LIMIT });
    }
    let candidates = s.interior_nodes().map(|v| s.neighbors(v).to_vec()).collect();
    Ok(ForestIter { corner_count: nb, candidates, parent: vec![UNSET; k], choice: vec![0; k], level: 0, done: false })
}

pub fn count_forests(s: &WeightedSubdivision) -> Result<usize, ForestError> {
    Ok(enumerate_forests(s)?.count())
}

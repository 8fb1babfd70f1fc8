use serde::{Deserialize, Serialize};

use super::EncodingError;

/// Outcome of searching a candidate building.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BeliefEvent {
    SearchedEmpty(usize),
    ConfirmedTrue(usize),
}

/// Probability that each candidate building holds the victims.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetBelief {
    probabilities: Vec<f64>,
    searched_empty: Vec<bool>,
    confirmed_true: Option<usize>,
}

impl TargetBelief {
    /// Equal prior `1 / n` over `n` candidates.
    pub fn uniform(n: usize) -> Self {
        let p = if n > 0 { 1.0 / n as f64 } else { 0.0 };
        Self {
            probabilities: vec![p; n],
            searched_empty: vec![false; n],
            confirmed_true: None,
        }
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, l: usize) -> f64 {
        self.probabilities[l]
    }

    pub fn is_searched_empty(&self, l: usize) -> bool {
        self.searched_empty[l]
    }

    pub fn confirmed(&self) -> Option<usize> {
        self.confirmed_true
    }

    /// Index of the most probable candidate; ties resolve to the lowest index.
    pub fn most_probable(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &p) in self.probabilities.iter().enumerate() {
            if best.map_or(true, |b| p > self.probabilities[b]) {
                best = Some(i);
            }
        }
        best
    }

    /// Apply a search outcome. Returns `true` when the belief changed.
    ///
    /// Events on an already-confirmed belief are ignored.
    pub fn apply(&mut self, event: BeliefEvent) -> Result<bool, EncodingError> {
        let l = match event {
            BeliefEvent::SearchedEmpty(l) | BeliefEvent::ConfirmedTrue(l) => l,
        };
        if l >= self.len() {
            return Err(EncodingError::GoalIndex { index: l, goals: self.len() });
        }
        if self.confirmed_true.is_some() {
            return Ok(false);
        }
        match event {
            BeliefEvent::ConfirmedTrue(l) => {
                self.confirmed_true = Some(l);
                for (i, p) in self.probabilities.iter_mut().enumerate() {
                    *p = if i == l { 1.0 } else { 0.0 };
                }
            }
            BeliefEvent::SearchedEmpty(l) => {
                if self.searched_empty[l] {
                    return Ok(false);
                }
                self.searched_empty[l] = true;
                let remaining = self.searched_empty.iter().filter(|&&s| !s).count();
                let share = if remaining > 0 { 1.0 / remaining as f64 } else { 0.0 };
                for (p, &s) in self.probabilities.iter_mut().zip(&self.searched_empty) {
                    *p = if s { 0.0 } else { share };
                }
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_prior() {
        assert_eq!(TargetBelief::uniform(3).probabilities(), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn searched_empty_renormalizes() {
        let mut b = TargetBelief::uniform(3);
        assert!(b.apply(BeliefEvent::SearchedEmpty(1)).unwrap());
        assert_eq!(b.probabilities(), &[0.5, 0.0, 0.5]);
        assert!(!b.apply(BeliefEvent::SearchedEmpty(1)).unwrap());
        b.apply(BeliefEvent::SearchedEmpty(0)).unwrap();
        assert_eq!(b.probabilities(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn confirmation_is_final() {
        let mut b = TargetBelief::uniform(3);
        b.apply(BeliefEvent::ConfirmedTrue(0)).unwrap();
        assert_eq!(b.probabilities(), &[1.0, 0.0, 0.0]);
        assert!(!b.apply(BeliefEvent::SearchedEmpty(0)).unwrap());
        assert!(!b.apply(BeliefEvent::ConfirmedTrue(2)).unwrap());
        assert_eq!(b.probabilities(), &[1.0, 0.0, 0.0]);
        assert_eq!(b.most_probable(), Some(0));
    }

    #[test]
    fn bad_index_is_rejected() {
        let mut b = TargetBelief::uniform(2);
        assert!(b.apply(BeliefEvent::ConfirmedTrue(2)).is_err());
    }
}

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{Game, Outcome};
use crate::error::{Error, Result};
use crate::numeric::Rat;

/// Deterministic mean-payoff game given by two `m × n` matrices over
/// `ℤ ∪ {−∞}` (`None` is `−∞`).
///
/// Min sits on the `n` column nodes and moves to a row node `j` receiving
/// `A[j][i]`; Max then moves from `j` to a column node `k` receiving
/// `B[j][k]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetGame {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<Option<i64>>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<Option<i64>>>,
}

impl DetGame {
    pub fn new(a: Vec<Vec<Option<i64>>>, b: Vec<Vec<Option<i64>>>) -> Result<Self> {
        let m = a.len();
        let n = a.first().map_or(0, Vec::len);
        let dg = DetGame { m, n, a, b };
        dg.validate()?;
        Ok(dg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvariantViolation(msg));
        if self.m == 0 || self.n == 0 {
            return bad("deterministic game needs m, n >= 1".into());
        }
        if self.a.len() != self.m || self.b.len() != self.m {
            return bad(format!("A and B must have {} rows", self.m));
        }
        if self.a.iter().chain(&self.b).any(|row| row.len() != self.n) {
            return bad(format!("A and B rows must have {} entries", self.n));
        }
        if let Some(j) = self
            .b
            .iter()
            .position(|row| row.iter().all(Option::is_none))
        {
            return bad(format!("row {j} of B is identically -inf"));
        }
        if let Some(i) = (0..self.n).find(|&i| self.a.iter().all(|row| row[i].is_none())) {
            return bad(format!("column {i} of A is identically -inf"));
        }
        Ok(())
    }

    /// `max(2, max |finite entry|)`.
    pub fn magnitude_bound(&self) -> BigUint {
        let top = self
            .a
            .iter()
            .chain(&self.b)
            .flatten()
            .flatten()
            .map(|x| x.unsigned_abs())
            .max()
            .unwrap_or(0);
        BigUint::from(top.max(2))
    }

    /// Replaces every `−∞` entry of `B` by `−M`.
    pub fn big_m_complete(&self, big_m: i64) -> DetGame {
        let b = self
            .b
            .iter()
            .map(|row| row.iter().map(|x| Some(x.unwrap_or(-big_m))).collect())
            .collect();
        DetGame {
            m: self.m,
            n: self.n,
            a: self.a.clone(),
            b,
        }
    }

    /// Stochastic-game encoding with Dirac transitions:
    /// Min's actions at `i` are the rows `j` with `A[j][i]` finite, Max's
    /// replies are the `k` with `B[j][k]` finite, the payment is
    /// `−A[j][i] + B[j][k]` and the next state is `k`.
    pub fn encode(&self) -> Result<Game> {
        self.validate()?;
        let actions = (0..self.n)
            .map(|i| {
                (0..self.m)
                    .filter_map(|j| self.a[j][i].map(|aji| (j, aji)))
                    .map(|(j, aji)| {
                        (0..self.n)
                            .filter_map(|k| self.b[j][k].map(|bjk| (k, bjk)))
                            .map(|(k, bjk)| Outcome::dirac(Rat::from_int(bjk - aji), self.n, k))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Game::new(actions)
    }

    /// Row index `j` behind Min's `a`-th action in state `i` of [`Self::encode`].
    pub fn min_action_row(&self, i: usize, a: usize) -> usize {
        (0..self.m)
            .filter(|&j| self.a[j][i].is_some())
            .nth(a)
            .expect("action index in range")
    }

    /// Direct evaluation of the deterministic Shapley operator, independent
    /// of the encoding.
    pub fn eval(&self, x: &[Rat]) -> Vec<Rat> {
        (0..self.n)
            .map(|i| {
                (0..self.m)
                    .filter_map(|j| {
                        let aji = self.a[j][i]?;
                        let best = (0..self.n)
                            .filter_map(|k| self.b[j][k].map(|bjk| Rat::from_int(bjk) + &x[k]))
                            .max()
                            .expect("B has no -inf row");
                        Some(best - Rat::from_int(aji))
                    })
                    .min()
                    .expect("A has no -inf column")
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::shapley::eval_t;

    #[test]
    fn single_arc_encodes_to_self_loop() {
        let dg = DetGame::new(vec![vec![Some(0)]], vec![vec![Some(5)]]).unwrap();
        let g = dg.encode().unwrap();
        assert_eq!(g.n(), 1);
        assert_eq!(g.outcome(0, 0, 0).payment, Rat::from_int(5));
        assert_eq!(g.outcome(0, 0, 0).transition, vec![Rat::one()]);
    }

    #[test]
    fn two_cycle_encoding() {
        let g = fixtures::fix_d_game();
        assert_eq!(g.n(), 2);
        assert_eq!(g.min_action_count(0), 1);
        assert_eq!(g.outcome(0, 0, 0).payment, Rat::from_int(2));
        assert_eq!(g.outcome(0, 0, 0).transition, vec![Rat::zero(), Rat::one()]);
        assert_eq!(g.outcome(1, 0, 0).payment, Rat::from_int(-1));
        assert_eq!(g.outcome(1, 0, 0).transition, vec![Rat::one(), Rat::zero()]);
    }

    #[test]
    fn all_infinite_b_row_rejected() {
        let err = DetGame::new(
            vec![vec![None], vec![Some(0)]],
            vec![vec![Some(0)], vec![None]],
        );
        assert!(matches!(err, Err(Error::InvariantViolation(_))));
        let err = DetGame::new(vec![vec![None]], vec![vec![Some(0)]]);
        assert!(matches!(err, Err(Error::InvariantViolation(_))));
    }

    #[test]
    fn big_m_completion() {
        let dg = fixtures::fix_d();
        let full = dg.big_m_complete(17);
        assert_eq!(
            full.b,
            vec![vec![Some(-17), Some(2)], vec![Some(-1), Some(-17)]]
        );
        assert_eq!(full.a, dg.a);
        assert_eq!(full.big_m_complete(17), full);
    }

    #[test]
    fn encoding_matches_direct_evaluation() {
        let dg = fixtures::fix_d();
        let g = dg.encode().unwrap();
        let x = vec![Rat::new(3, 2), Rat::from_int(-4)];
        assert_eq!(eval_t(&g, &x), dg.eval(&x));
    }

    #[test]
    fn magnitude_bound_floors_at_two() {
        assert_eq!(fixtures::fix_d().magnitude_bound(), BigUint::from(2u32));
        let dg = DetGame::new(vec![vec![Some(-7)]], vec![vec![Some(3)]]).unwrap();
        assert_eq!(dg.magnitude_bound(), BigUint::from(7u32));
    }
}

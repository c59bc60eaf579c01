use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::Game;

/// Deterministic stationary policy of Min: one action index per state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MinPolicy(Vec<usize>);

impl MinPolicy {
    pub fn new(choice: Vec<usize>) -> Self {
        MinPolicy(choice)
    }

    /// Least action index everywhere.
    pub fn first(game: &Game) -> Self {
        MinPolicy(vec![0; game.n()])
    }

    pub fn action(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_valid_for(&self, game: &Game) -> bool {
        self.0.len() == game.n()
            && self
                .0
                .iter()
                .enumerate()
                .all(|(i, &a)| a < game.min_action_count(i))
    }

    /// Decodes a mixed-radix index (state 0 varies fastest).
    pub fn from_index(game: &Game, mut idx: u128) -> Self {
        let choice = (0..game.n())
            .map(|i| {
                let k = game.min_action_count(i) as u128;
                let a = idx % k;
                idx /= k;
                a as usize
            })
            .collect();
        MinPolicy(choice)
    }

    /// Restriction to the first `n` states.
    pub fn truncated(&self, n: usize) -> Self {
        MinPolicy(self.0[..n].to_vec())
    }

    /// All Min policies of `game`, in index order.
    pub fn enumerate(game: &Game) -> Vec<MinPolicy> {
        Self::enumerate_iter(game).collect()
    }

    pub fn enumerate_iter(game: &Game) -> impl Iterator<Item = MinPolicy> + '_ {
        let count = game
            .min_policy_count()
            .to_u128()
            .expect("policy count fits in u128");
        (0..count).map(move |k| MinPolicy::from_index(game, k))
    }
}

/// Deterministic stationary policy of Max: one reply per `(state, Min action)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MaxPolicy(Vec<Vec<usize>>);

impl MaxPolicy {
    pub fn new(choice: Vec<Vec<usize>>) -> Self {
        MaxPolicy(choice)
    }

    pub fn zeros(game: &Game) -> Self {
        MaxPolicy(
            (0..game.n())
                .map(|i| vec![0; game.min_action_count(i)])
                .collect(),
        )
    }

    pub fn action(&self, i: usize, a: usize) -> usize {
        self.0[i][a]
    }

    pub fn set(&mut self, i: usize, a: usize, b: usize) {
        self.0[i][a] = b;
    }

    pub fn as_slice(&self) -> &[Vec<usize>] {
        &self.0
    }

    pub fn is_valid_for(&self, game: &Game) -> bool {
        self.0.len() == game.n()
            && self.0.iter().enumerate().all(|(i, row)| {
                row.len() == game.min_action_count(i)
                    && row
                        .iter()
                        .enumerate()
                        .all(|(a, &b)| b < game.max_action_count(i, a))
            })
    }

    /// Decodes a mixed-radix index over the replies to `sigma` (state 0
    /// fastest). Replies to actions Min does not play are 0.
    pub fn reply_from_index(game: &Game, sigma: &super::MinPolicy, mut idx: u128) -> Self {
        let mut tau = MaxPolicy::zeros(game);
        for i in 0..game.n() {
            let a = sigma.action(i);
            let k = game.max_action_count(i, a) as u128;
            tau.0[i][a] = (idx % k) as usize;
            idx /= k;
        }
        tau
    }

    /// Restriction to the first `n` states.
    pub fn truncated(&self, n: usize) -> Self {
        MaxPolicy(self.0[..n].to_vec())
    }
}

/// Converts a policy count to `u128`, saturating.
pub fn saturating_count(c: &BigUint) -> u128 {
    c.to_u128().unwrap_or(u128::MAX)
}

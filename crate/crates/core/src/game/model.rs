use num_bigint::BigUint;
use num_traits::One;

use super::{MaxPolicy, MinPolicy};
use crate::error::{Error, Result};
use crate::markov::Chain;
use crate::numeric::{dot, Rat, RatMatrix};

/// Payment and successor law for one `(state, Min action, Max action)` triple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub payment: Rat,
    pub transition: Vec<Rat>,
}

impl Outcome {
    pub fn new(payment: Rat, transition: Vec<Rat>) -> Self {
        Outcome {
            payment,
            transition,
        }
    }

    pub fn dirac(payment: Rat, n: usize, target: usize) -> Self {
        let mut transition = vec![Rat::zero(); n];
        transition[target] = Rat::one();
        Outcome {
            payment,
            transition,
        }
    }

    /// `r + P x`.
    pub fn term(&self, x: &[Rat]) -> Rat {
        &self.payment + dot(&self.transition, x)
    }
}

/// Finite zero-sum stochastic game with perfect information.
///
/// `actions[i][a][b]` is the outcome when Min plays `a` in state `i` and Max
/// answers `b`. Every action list is nonempty and every transition row is a
/// probability vector over the `n` states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Game {
    n: usize,
    actions: Vec<Vec<Vec<Outcome>>>,
}

impl Game {
    pub fn new(actions: Vec<Vec<Vec<Outcome>>>) -> Result<Self> {
        let n = actions.len();
        if n == 0 {
            return Err(Error::InvariantViolation("game has no states".into()));
        }
        for (i, state) in actions.iter().enumerate() {
            if state.is_empty() {
                return Err(Error::InvariantViolation(format!(
                    "state {i}: Min has no action"
                )));
            }
            for (a, replies) in state.iter().enumerate() {
                if replies.is_empty() {
                    return Err(Error::InvariantViolation(format!(
                        "state {i}, Min action {a}: Max has no action"
                    )));
                }
                for (b, o) in replies.iter().enumerate() {
                    check_row(&o.transition, n).map_err(|why| {
                        Error::InvariantViolation(format!("state {i}, actions ({a}, {b}): {why}"))
                    })?;
                }
            }
        }
        Ok(Game { n, actions })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn actions(&self) -> &[Vec<Vec<Outcome>>] {
        &self.actions
    }

    pub fn min_action_count(&self, i: usize) -> usize {
        self.actions[i].len()
    }

    pub fn max_action_count(&self, i: usize, a: usize) -> usize {
        self.actions[i][a].len()
    }

    pub fn replies(&self, i: usize, a: usize) -> &[Outcome] {
        &self.actions[i][a]
    }

    pub fn outcome(&self, i: usize, a: usize, b: usize) -> &Outcome {
        &self.actions[i][a][b]
    }

    pub fn outcomes(&self) -> impl Iterator<Item = &Outcome> {
        self.actions.iter().flatten().flatten()
    }

    /// Same game with every payment in state `i` shifted by `shift[i]`.
    pub fn shifted(&self, shift: &[Rat]) -> Game {
        assert_eq!(shift.len(), self.n, "shift length must equal state count");
        let actions = self
            .actions
            .iter()
            .zip(shift)
            .map(|(state, s)| {
                state
                    .iter()
                    .map(|replies| {
                        replies
                            .iter()
                            .map(|o| Outcome::new(&o.payment + s, o.transition.clone()))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Game { n: self.n, actions }
    }

    /// Markov reward chain `(P^{στ}, r^{στ})`.
    pub fn chain(&self, sigma: &MinPolicy, tau: &MaxPolicy) -> Chain {
        let mut rows = Vec::with_capacity(self.n);
        let mut r = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let a = sigma.action(i);
            let o = self.outcome(i, a, tau.action(i, a));
            rows.push(o.transition.clone());
            r.push(o.payment.clone());
        }
        Chain::new(RatMatrix::from_rows(rows).expect("rows have length n"), r)
            .expect("game rows are stochastic")
    }

    /// Number of Min policies, `Π |A_i|`.
    pub fn min_policy_count(&self) -> BigUint {
        self.actions
            .iter()
            .fold(BigUint::one(), |acc, s| acc * BigUint::from(s.len()))
    }

    /// Number of Max policies that matter once Min plays `sigma`,
    /// `Π |B_{i,σ(i)}|`.
    pub fn reply_count(&self, sigma: &MinPolicy) -> BigUint {
        (0..self.n).fold(BigUint::one(), |acc, i| {
            acc * BigUint::from(self.max_action_count(i, sigma.action(i)))
        })
    }

    /// Largest numerator magnitude or denominator among all payments and
    /// transition entries, floored at 2.
    pub fn magnitude_bound(&self) -> BigUint {
        let mut d = BigUint::from(2u32);
        for o in self.outcomes() {
            for x in std::iter::once(&o.payment).chain(&o.transition) {
                let (p, q) = x.magnitudes();
                d = d.max(p).max(q);
            }
        }
        d
    }
}

fn check_row(row: &[Rat], n: usize) -> std::result::Result<(), String> {
    if row.len() != n {
        return Err(format!(
            "transition row has length {}, expected {n}",
            row.len()
        ));
    }
    if let Some(x) = row.iter().find(|x| x.is_negative()) {
        return Err(format!("negative transition probability {x}"));
    }
    let total: Rat = row.iter().sum();
    if total != Rat::one() {
        return Err(format!("transition row sums to {total}, not 1"));
    }
    Ok(())
}

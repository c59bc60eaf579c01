//! Evaluation of the Shapley operator
//! `T_i(x) = min_a max_b (r_i^{ab} + P_i^{ab} x)` and the operators derived
//! from it.
//!
//! Ties in every min/max resolve to the least action index.

use serde::{Deserialize, Serialize};

use crate::game::{Game, Outcome};
pub use crate::game::{MaxPolicy, MinPolicy};
use crate::numeric::{dot, Rat};

/// Solution `(λ, u)` of `T(u) = λe + u`, normalized so that the last entry
/// of `u` is zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Eigenpair {
    pub lambda: Rat,
    pub u: Vec<Rat>,
}

impl Eigenpair {
    pub fn normalized(lambda: Rat, mut u: Vec<Rat>) -> Self {
        if let Some(last) = u.last().cloned() {
            for x in &mut u {
                *x -= &last;
            }
        }
        Eigenpair { lambda, u }
    }
}

/// Invariant half-line: `F(u + αν) = u + (α + 1)ν` for every `α ≥ alpha0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfLine {
    pub u: Vec<Rat>,
    pub nu: Vec<Rat>,
    pub alpha0: Rat,
}

impl HalfLine {
    pub fn point(&self, alpha: &Rat) -> Vec<Rat> {
        self.u
            .iter()
            .zip(&self.nu)
            .map(|(u, v)| u + alpha * v)
            .collect()
    }
}

fn max_term<'a>(replies: impl IntoIterator<Item = &'a Outcome>, x: &[Rat]) -> Rat {
    replies
        .into_iter()
        .map(|o| o.term(x))
        .max()
        .expect("action sets are nonempty")
}

/// `T(x)`.
pub fn eval_t(game: &Game, x: &[Rat]) -> Vec<Rat> {
    assert_eq!(x.len(), game.n());
    (0..game.n())
        .map(|i| {
            game.actions()[i]
                .iter()
                .map(|replies| max_term(replies, x))
                .min()
                .expect("action sets are nonempty")
        })
        .collect()
}

/// `T^σ(x)`: Min frozen at `sigma`.
pub fn eval_t_sigma(game: &Game, sigma: &MinPolicy, x: &[Rat]) -> Vec<Rat> {
    (0..game.n())
        .map(|i| max_term(game.replies(i, sigma.action(i)), x))
        .collect()
}

/// `ᵗT(x)`: Max frozen at `tau`.
pub fn eval_t_tau(game: &Game, tau: &MaxPolicy, x: &[Rat]) -> Vec<Rat> {
    (0..game.n())
        .map(|i| {
            (0..game.min_action_count(i))
                .map(|a| game.outcome(i, a, tau.action(i, a)).term(x))
                .min()
                .expect("action sets are nonempty")
        })
        .collect()
}

/// `r^{στ} + P^{στ} x`.
pub fn eval_chain_op(game: &Game, sigma: &MinPolicy, tau: &MaxPolicy, x: &[Rat]) -> Vec<Rat> {
    (0..game.n())
        .map(|i| {
            let a = sigma.action(i);
            game.outcome(i, a, tau.action(i, a)).term(x)
        })
        .collect()
}

/// Conservative improvement of Min's policy at `x`: keeps `prev(i)` wherever
/// it still attains `T_i(x)`, otherwise takes the least minimizing action.
pub fn argmin_policy(game: &Game, x: &[Rat], prev: &MinPolicy) -> MinPolicy {
    let choice = (0..game.n())
        .map(|i| {
            let values: Vec<Rat> = game.actions()[i]
                .iter()
                .map(|replies| max_term(replies, x))
                .collect();
            let best = values.iter().min().expect("action sets are nonempty");
            if &values[prev.action(i)] == best {
                prev.action(i)
            } else {
                values
                    .iter()
                    .position(|v| v == best)
                    .expect("minimum is attained")
            }
        })
        .collect();
    MinPolicy::new(choice)
}

/// Max's best replies to `sigma` at `x`, keeping `prev` where it is still optimal.
pub fn argmax_reply(game: &Game, sigma: &MinPolicy, x: &[Rat], prev: &MaxPolicy) -> MaxPolicy {
    let mut tau = prev.clone();
    for i in 0..game.n() {
        let a = sigma.action(i);
        let values: Vec<Rat> = game.replies(i, a).iter().map(|o| o.term(x)).collect();
        let best = values.iter().max().expect("action sets are nonempty");
        if &values[prev.action(i, a)] != best {
            let b = values
                .iter()
                .position(|v| v == best)
                .expect("maximum is attained");
            tau.set(i, a, b);
        }
    }
    tau
}

/// Recession operator: the Shapley operator with every payment zeroed.
pub fn recession(game: &Game, x: &[Rat]) -> Vec<Rat> {
    (0..game.n())
        .map(|i| {
            game.actions()[i]
                .iter()
                .map(|replies| {
                    replies
                        .iter()
                        .map(|o| dot(&o.transition, x))
                        .max()
                        .expect("action sets are nonempty")
                })
                .min()
                .expect("action sets are nonempty")
        })
        .collect()
}

/// `max_i x_i − min_i x_i`.
pub fn hilbert_seminorm(x: &[Rat]) -> Rat {
    match (x.iter().max(), x.iter().min()) {
        (Some(hi), Some(lo)) => hi - lo,
        _ => Rat::zero(),
    }
}

/// `R_M(x)_i = max(x_i, max_j x_j − M)`: projection onto `{‖x‖_H ≤ M}`.
pub fn apply_rm(x: &[Rat], big_m: &Rat) -> Vec<Rat> {
    let Some(top) = x.iter().max() else {
        return Vec::new();
    };
    let floor = top - big_m;
    x.iter()
        .map(|xi| xi.clone().max_of(floor.clone()))
        .collect()
}

/// `T(R_M(x))`, evaluated by composition.
pub fn eval_t_rm(game: &Game, x: &[Rat], big_m: &Rat) -> Vec<Rat> {
    eval_t(game, &apply_rm(x, big_m))
}

/// `T^k(0) / k`. Diagnostic only: converges at rate `O(1/k)`.
pub fn value_iteration_estimate(game: &Game, k: usize) -> Vec<Rat> {
    assert!(k >= 1, "need at least one step");
    let mut v = vec![Rat::zero(); game.n()];
    for _ in 0..k {
        v = eval_t(game, &v);
    }
    let scale = Rat::from_int(k as i64);
    v.iter().map(|x| x / &scale).collect()
}

//! One-player problems: Min's policy is frozen and Max optimizes the mean
//! payoff of the reduced operator `T^σ`.
//!
//! [`solve_one_player`] is multichain policy iteration in two phases: first
//! improve the gain (`max_b P_b χ`), then, among gain-preserving replies,
//! improve `r + P h`. A reply is only replaced when it is strictly beaten,
//! and the least index wins among replacements.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{saturating_count, Game, MaxPolicy, MinPolicy};
use crate::markov::{communication_classes, gain_bias_with, invariant_measure, Pin};
use crate::numeric::{dot, Rat};
use crate::par::{map_range, Exec};
use crate::shapley::{eval_t_sigma, Eigenpair, HalfLine};

/// Default cap on enumerated policy pairs.
pub const DEFAULT_ENUM_CAP: u128 = 1_000_000;

#[derive(Clone, Debug, Default)]
pub struct OnePlayerOptions {
    pub pin: Pin,
    /// Starting replies; least indices when absent.
    pub tau0: Option<MaxPolicy>,
}

/// Optimal gain `χ`, a bias `v` solving the multichain optimality equations,
/// the reply policy attaining them and the half-line they span.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OnePlayerSolution {
    pub gain: Vec<Rat>,
    pub bias: Vec<Rat>,
    pub tau: MaxPolicy,
    pub half_line: HalfLine,
    /// `(χ, h)` of every evaluated reply policy, in order.
    pub trace: Vec<(Vec<Rat>, Vec<Rat>)>,
}

impl OnePlayerSolution {
    pub fn upper_gain(&self) -> Rat {
        self.gain.iter().max().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn gain_is_constant(&self) -> bool {
        self.gain.windows(2).all(|w| w[0] == w[1])
    }
}

pub fn solve_one_player(game: &Game, sigma: &MinPolicy) -> Result<OnePlayerSolution> {
    solve_one_player_with(game, sigma, &OnePlayerOptions::default())
}

pub fn solve_one_player_with(
    game: &Game,
    sigma: &MinPolicy,
    opts: &OnePlayerOptions,
) -> Result<OnePlayerSolution> {
    if !sigma.is_valid_for(game) {
        return Err(Error::InvariantViolation("invalid Min policy".into()));
    }
    let n = game.n();
    let mut tau = opts.tau0.clone().unwrap_or_else(|| MaxPolicy::zeros(game));
    if !tau.is_valid_for(game) {
        return Err(Error::InvariantViolation("invalid Max policy".into()));
    }
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut trace = Vec::new();

    loop {
        let played: Vec<usize> = (0..n).map(|i| tau.action(i, sigma.action(i))).collect();
        if !seen.insert(played) {
            return Err(Error::Internal(
                "multichain policy iteration revisited a policy".into(),
            ));
        }
        let analysis = gain_bias_with(&game.chain(sigma, &tau), opts.pin)?;
        let chi = analysis.gain;
        let h = analysis.bias;
        trace.push((chi.clone(), h.clone()));

        // Phase 1: gain.
        let mut changed = false;
        for i in 0..n {
            let a = sigma.action(i);
            let scores: Vec<Rat> = game
                .replies(i, a)
                .iter()
                .map(|o| dot(&o.transition, &chi))
                .collect();
            let best = scores.iter().max().expect("nonempty");
            if &scores[tau.action(i, a)] != best {
                tau.set(
                    i,
                    a,
                    scores.iter().position(|s| s == best).expect("attained"),
                );
                changed = true;
            }
        }
        if changed {
            continue;
        }

        // Phase 2: bias, among replies that keep the gain.
        for i in 0..n {
            let a = sigma.action(i);
            let replies = game.replies(i, a);
            let scores: Vec<Option<Rat>> = replies
                .iter()
                .map(|o| (dot(&o.transition, &chi) == chi[i]).then(|| o.term(&h)))
                .collect();
            let best = scores
                .iter()
                .flatten()
                .max()
                .expect("current reply qualifies");
            if scores[tau.action(i, a)].as_ref() != Some(best) {
                let b = scores
                    .iter()
                    .position(|s| s.as_ref() == Some(best))
                    .expect("attained");
                tau.set(i, a, b);
                changed = true;
            }
        }
        if changed {
            continue;
        }

        let half_line = half_line(game, sigma, &chi, &h)?;
        return Ok(OnePlayerSolution {
            gain: chi,
            bias: h,
            tau,
            half_line,
            trace,
        });
    }
}

/// Smallest `α₀ ≥ 0` beyond which the replies that lose gain along `χ`
/// stay dominated, checked exactly at `α₀` and `α₀ + 1`.
fn half_line(game: &Game, sigma: &MinPolicy, chi: &[Rat], v: &[Rat]) -> Result<HalfLine> {
    let mut alpha0 = Rat::zero();
    for i in 0..game.n() {
        for o in game.replies(i, sigma.action(i)) {
            let slack = &chi[i] - dot(&o.transition, chi);
            if slack.is_positive() {
                let need = (o.term(v) - &chi[i] - &v[i]) / &slack;
                alpha0 = alpha0.max_of(need);
            }
        }
    }
    let hl = HalfLine {
        u: v.to_vec(),
        nu: chi.to_vec(),
        alpha0,
    };
    for alpha in [hl.alpha0.clone(), &hl.alpha0 + Rat::one()] {
        let lhs = eval_t_sigma(game, sigma, &hl.point(&alpha));
        if lhs != hl.point(&(alpha + Rat::one())) {
            return Err(Error::Internal("half-line check failed".into()));
        }
    }
    Ok(hl)
}

/// Eigenpair of `T^σ`, or `NonConstantGain` when the reduced operator has
/// no eigenvalue.
pub fn eigenpair_one_player(game: &Game, sigma: &MinPolicy) -> Result<Eigenpair> {
    eigenpair_one_player_with(game, sigma, &OnePlayerOptions::default())
}

pub fn eigenpair_one_player_with(
    game: &Game,
    sigma: &MinPolicy,
    opts: &OnePlayerOptions,
) -> Result<Eigenpair> {
    eigenpair_and_reply(game, sigma, opts).map(|(pair, _)| pair)
}

/// Eigenpair of `T^σ` together with the reply policy attaining it.
pub fn eigenpair_and_reply(
    game: &Game,
    sigma: &MinPolicy,
    opts: &OnePlayerOptions,
) -> Result<(Eigenpair, MaxPolicy)> {
    let sol = solve_one_player_with(game, sigma, opts)?;
    if !sol.gain_is_constant() {
        return Err(Error::NonConstantGain(sol.gain));
    }
    let pair = Eigenpair::normalized(sol.gain[0].clone(), sol.bias);
    let image = eval_t_sigma(game, sigma, &pair.u);
    if image
        .iter()
        .zip(&pair.u)
        .any(|(t, u)| t != &(&pair.lambda + u))
    {
        return Err(Error::Internal("one-player eigenpair check failed".into()));
    }
    Ok((pair, sol.tau))
}

/// A reply policy, one of its final classes and the invariant measure on it,
/// with the value `⟨m, shift + r^{στ}⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureWitness {
    pub tau: MaxPolicy,
    pub final_class: Vec<usize>,
    pub measure: Vec<Rat>,
    pub value: Rat,
}

struct Partial {
    best: Option<Rat>,
    witnesses: Vec<MeasureWitness>,
}

impl Partial {
    fn empty() -> Self {
        Partial {
            best: None,
            witnesses: Vec::new(),
        }
    }

    fn offer(&mut self, w: MeasureWitness) {
        match &self.best {
            Some(b) if &w.value < b => {}
            Some(b) if &w.value == b => {
                if !self.witnesses.iter().any(|x| x.measure == w.measure) {
                    self.witnesses.push(w);
                }
            }
            _ => {
                self.best = Some(w.value.clone());
                self.witnesses = vec![w];
            }
        }
    }
}

const CHUNK: usize = 64;

/// `λ^σ(shift) = max ⟨m, shift + r^{στ}⟩` over every reply policy `τ` and
/// every extreme invariant measure `m` of `P^{στ}`, with the distinct
/// measures attaining it.
pub fn lambda_sigma(
    game: &Game,
    sigma: &MinPolicy,
    shift: &[Rat],
    cap: u128,
    exec: Exec,
) -> Result<(Rat, Vec<MeasureWitness>)> {
    assert_eq!(shift.len(), game.n());
    let count = saturating_count(&game.reply_count(sigma));
    if count > cap {
        return Err(Error::EnumerationTooLarge { count, cap });
    }
    let count = count as usize;
    let shifted = game.shifted(shift);
    let chunks = count.div_ceil(CHUNK);
    let parts = map_range(exec, chunks, |c| -> Result<Partial> {
        let mut part = Partial::empty();
        for idx in (c * CHUNK)..((c + 1) * CHUNK).min(count) {
            let tau = MaxPolicy::reply_from_index(&shifted, sigma, idx as u128);
            let ch = shifted.chain(sigma, &tau);
            let classes = communication_classes(&ch.p);
            for class in classes.final_classes() {
                let measure = invariant_measure(&ch.p, class)?;
                let value = dot(&measure, &ch.r);
                part.offer(MeasureWitness {
                    tau: tau.clone(),
                    final_class: class.clone(),
                    measure,
                    value,
                });
            }
        }
        Ok(part)
    });
    let mut merged = Partial::empty();
    for part in parts {
        for w in part?.witnesses {
            merged.offer(w);
        }
    }
    let best = merged.best.expect("at least one reply policy exists");

    let sol = solve_one_player(&shifted, sigma)?;
    if sol.upper_gain() != best {
        return Err(Error::Internal(format!(
            "enumerated λ^σ = {best} disagrees with policy iteration gain {}",
            sol.upper_gain()
        )));
    }
    Ok((best, merged.witnesses))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certificate {
    /// Exactly one measure attains `λ^σ(shift)`: `shift + T^σ` has at most
    /// one eigenvector up to an additive constant.
    Unique,
    /// Several measures attain the maximum; nothing is proved either way.
    Inconclusive,
}

pub fn unique_bias_certificate(
    game: &Game,
    sigma: &MinPolicy,
    shift: &[Rat],
    cap: u128,
    exec: Exec,
) -> Result<Certificate> {
    let (_, witnesses) = lambda_sigma(game, sigma, shift, cap, exec)?;
    Ok(if witnesses.len() == 1 {
        Certificate::Unique
    } else {
        Certificate::Inconclusive
    })
}

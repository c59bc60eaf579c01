//! Brute-force ground truth for small games.
//!
//! Enumerates every Min policy `σ`, every reply policy `τ` (only the replies
//! to `σ` matter) and every final class of `P^{στ}`:
//!
//! `χ̄(T) = min_σ max { ⟨m, r^{στ}⟩ : τ, m extreme invariant measure of P^{στ} }`.
//!
//! Nothing here calls into the policy-iteration code; the Shapley operator
//! used by [`verify_eigenpair`] is evaluated by a private routine.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{saturating_count, Game, MaxPolicy, MinPolicy};
use crate::markov::gain;
use crate::numeric::Rat;
use crate::one_player::MeasureWitness;
use crate::par::{map_slice, Exec};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub chibar: Rat,
    /// Per-state mean payoff.
    pub chi: Vec<Rat>,
    /// First Min policy (in index order) attaining `chibar`.
    pub attaining_sigma: MinPolicy,
    pub witness: MeasureWitness,
    /// Distinct measures attaining `chibar` against `attaining_sigma`.
    pub witnesses: Vec<MeasureWitness>,
}

/// Per-σ results: max over `(τ, m)` and the componentwise max of gains.
struct SigmaResult {
    lambda: Rat,
    gain: Vec<Rat>,
    witnesses: Vec<MeasureWitness>,
}

/// Number of `(σ, τ)` pairs the oracle enumerates.
pub fn pair_count(game: &Game) -> BigUint {
    MinPolicy::enumerate_iter(game)
        .map(|s| game.reply_count(&s))
        .sum()
}

fn check_cap(game: &Game, cap: u128) -> Result<()> {
    let sigmas = saturating_count(&game.min_policy_count());
    if sigmas > cap {
        return Err(Error::EnumerationTooLarge { count: sigmas, cap });
    }
    let count = saturating_count(&pair_count(game));
    if count > cap {
        return Err(Error::EnumerationTooLarge { count, cap });
    }
    Ok(())
}

fn analyze_sigma(game: &Game, sigma: &MinPolicy) -> Result<SigmaResult> {
    let n = game.n();
    let count = saturating_count(&game.reply_count(sigma));
    let mut lambda: Option<Rat> = None;
    let mut best_gain: Option<Vec<Rat>> = None;
    let mut witnesses: Vec<MeasureWitness> = Vec::new();
    for idx in 0..count {
        let tau = MaxPolicy::reply_from_index(game, sigma, idx);
        let ga = gain(&game.chain(sigma, &tau))?;
        for ((class, measure), value) in ga.final_classes.iter().zip(&ga.measures).zip(&ga.values) {
            let better = lambda.as_ref().is_none_or(|l| value > l);
            if better {
                lambda = Some(value.clone());
                witnesses.clear();
            }
            if lambda.as_ref() == Some(value) && !witnesses.iter().any(|w| &w.measure == measure) {
                witnesses.push(MeasureWitness {
                    tau: tau.clone(),
                    final_class: class.clone(),
                    measure: measure.clone(),
                    value: value.clone(),
                });
            }
        }
        best_gain = Some(match best_gain {
            None => ga.gain,
            Some(b) => (0..n)
                .map(|i| b[i].clone().max_of(ga.gain[i].clone()))
                .collect(),
        });
    }
    Ok(SigmaResult {
        lambda: lambda.expect("every chain has a final class"),
        gain: best_gain.expect("at least one reply policy"),
        witnesses,
    })
}

/// Upper mean payoff and per-state mean payoff by full enumeration.
pub fn brute_chibar(game: &Game, cap: u128, exec: Exec) -> Result<OracleReport> {
    check_cap(game, cap)?;
    let sigmas: Vec<MinPolicy> = MinPolicy::enumerate_iter(game).collect();
    let results = map_slice(exec, &sigmas, |s| analyze_sigma(game, s))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let n = game.n();
    let (best_idx, best) = results
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.lambda.cmp(&b.lambda).then(i.cmp(j)))
        .expect("at least one Min policy");
    let chi: Vec<Rat> = (0..n)
        .map(|i| {
            results
                .iter()
                .map(|r| &r.gain[i])
                .min()
                .expect("nonempty")
                .clone()
        })
        .collect();

    if !results.iter().any(|r| r.gain == chi) {
        return Err(Error::Internal(
            "no single Min policy attains the componentwise minimum gain".into(),
        ));
    }
    if chi.iter().max() != Some(&best.lambda) {
        return Err(Error::Internal(format!(
            "max entry of the mean payoff vector differs from the upper mean payoff {}",
            best.lambda
        )));
    }
    Ok(OracleReport {
        chibar: best.lambda.clone(),
        chi,
        attaining_sigma: sigmas[best_idx].clone(),
        witness: best.witnesses[0].clone(),
        witnesses: best.witnesses.clone(),
    })
}

/// Per-state mean payoff `χ(T) = min_σ max_τ gain(P^{στ}, r^{στ})`.
pub fn brute_mean_payoff(game: &Game, cap: u128, exec: Exec) -> Result<Vec<Rat>> {
    brute_chibar(game, cap, exec).map(|r| r.chi)
}

fn direct_t(game: &Game, x: &[Rat]) -> Vec<Rat> {
    game.actions()
        .iter()
        .map(|state| {
            state
                .iter()
                .map(|replies| {
                    replies
                        .iter()
                        .map(|o| {
                            let mut acc = o.payment.clone();
                            for (p, xj) in o.transition.iter().zip(x) {
                                if !p.is_zero() {
                                    acc += p * xj;
                                }
                            }
                            acc
                        })
                        .max()
                        .expect("nonempty")
                })
                .min()
                .expect("nonempty")
        })
        .collect()
}

/// First state `i` with `T_i(u) ≠ λ + u_i`.
pub fn first_violation(game: &Game, lambda: &Rat, u: &[Rat]) -> Option<usize> {
    assert_eq!(u.len(), game.n(), "vector length must equal state count");
    direct_t(game, u)
        .iter()
        .zip(u)
        .position(|(t, ui)| t != &(lambda + ui))
}

/// Whether `T(u) = λe + u` holds exactly.
pub fn verify_eigenpair(game: &Game, lambda: &Rat, u: &[Rat]) -> bool {
    first_violation(game, lambda, u).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::game::Outcome;
    use crate::one_player::DEFAULT_ENUM_CAP;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn v(xs: &[&str]) -> Vec<Rat> {
        xs.iter().map(|s| r(s)).collect()
    }

    fn oracle(g: &Game) -> OracleReport {
        brute_chibar(g, DEFAULT_ENUM_CAP, Exec::default()).unwrap()
    }

    #[test]
    fn example_game() {
        let rep = oracle(&fixtures::fix_a());
        assert_eq!(rep.chibar, r("0"));
        assert_eq!(rep.chi, v(&["0", "0"]));
        let measures: Vec<_> = rep.witnesses.iter().map(|w| w.measure.clone()).collect();
        assert_eq!(measures, vec![v(&["1", "0"]), v(&["1/2", "1/2"])]);
    }

    #[test]
    fn loop_and_cycle() {
        assert_eq!(oracle(&fixtures::fix_c()).chibar, r("3/2"));
        let rep = oracle(&fixtures::fix_d_game());
        assert_eq!(rep.chibar, r("1/2"));
        assert_eq!(rep.witness.measure, v(&["1/2", "1/2"]));
    }

    #[test]
    fn three_state_fixture_has_constant_mean_payoff() {
        let g = fixtures::fix_b();
        let rep = oracle(&g);
        assert_eq!(rep.chibar, r("6/5"));
        assert_eq!(rep.chi, v(&["6/5", "6/5", "6/5"]));
        assert_eq!(
            brute_mean_payoff(&g, DEFAULT_ENUM_CAP, Exec::Sequential).unwrap(),
            rep.chi
        );
    }

    #[test]
    fn decoupled_loops() {
        let g = Game::new(vec![
            vec![vec![Outcome::dirac(Rat::zero(), 2, 0)]],
            vec![vec![Outcome::dirac(Rat::one(), 2, 1)]],
        ])
        .unwrap();
        assert_eq!(
            brute_mean_payoff(&g, DEFAULT_ENUM_CAP, Exec::Sequential).unwrap(),
            v(&["0", "1"])
        );
    }

    #[test]
    fn eigenpair_verification() {
        assert!(verify_eigenpair(&fixtures::fix_c(), &r("3/2"), &v(&["0"])));
        let a = fixtures::fix_a();
        assert!(verify_eigenpair(&a, &r("0"), &v(&["0", "0"])));
        assert!(!verify_eigenpair(&a, &r("0"), &v(&["1", "0"])));
        let b = fixtures::fix_b();
        assert!(verify_eigenpair(
            &b,
            &r("6/5"),
            &v(&["-18/5", "-16/5", "0"])
        ));
        assert_eq!(
            first_violation(&b, &r("1"), &v(&["-2", "-2", "0"])),
            Some(2)
        );
    }

    #[test]
    fn cap_is_enforced() {
        let g = fixtures::fix_b();
        assert_eq!(pair_count(&g), BigUint::from(12u32));
        assert!(matches!(
            brute_chibar(&g, 11, Exec::Sequential),
            Err(Error::EnumerationTooLarge { count: 12, cap: 11 })
        ));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let g = fixtures::fix_b();
        assert_eq!(
            brute_chibar(&g, DEFAULT_ENUM_CAP, Exec::Sequential).unwrap(),
            brute_chibar(&g, DEFAULT_ENUM_CAP, Exec::Parallel).unwrap()
        );
    }
}

//! Two-player policy iteration.
//!
//! [`hoffman_karp`] alternates an exact one-player solve for Min's current
//! policy with a conservative improvement of that policy. On degenerate
//! games it may cycle; [`solve_perturbed`] and [`solve_deterministic`] run
//! it on the big-M transformed, slightly perturbed game instead, where it
//! always terminates, and read the answer back on the original game.

use std::collections::HashMap;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, PiError, Result};
use crate::game::{
    big_m_double, perturbation_params, perturbation_params_det, saturating_count, DetGame, Game,
    MaxPolicy, MinPolicy, PerturbSpec,
};
use crate::markov::Pin;
use crate::numeric::{solve_linear, Rat, RatMatrix};
use crate::one_player::{
    eigenpair_and_reply, lambda_sigma, solve_one_player, OnePlayerOptions, DEFAULT_ENUM_CAP,
};
use crate::par::Exec;
use crate::shapley::{apply_rm, argmax_reply, argmin_policy, eval_t, eval_t_rm, Eigenpair};

#[derive(Clone, Debug)]
pub struct PiOptions {
    /// Initial Min policy; least indices when absent.
    pub sigma0: Option<MinPolicy>,
    /// Outer iteration cap; `2·|S_p|` when absent.
    pub iteration_cap: Option<usize>,
    /// Normalization of the inner biases.
    pub pin: Pin,
    /// Cap for the enumerated cross-check of the reported value. Larger
    /// instances skip the cross-check.
    pub crosscheck_cap: u128,
}

impl Default for PiOptions {
    fn default() -> Self {
        PiOptions {
            sigma0: None,
            iteration_cap: None,
            pin: Pin::Least,
            crosscheck_cap: DEFAULT_ENUM_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub k: usize,
    pub lambda: Rat,
    pub sigma: MinPolicy,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiOutcome {
    pub eigenpair: Eigenpair,
    pub sigma: MinPolicy,
    pub tau: MaxPolicy,
    pub trace: Vec<TraceStep>,
    /// Inner bias of each iterate, as used for the improvement step.
    pub biases: Vec<Vec<Rat>>,
}

/// Default outer cap: twice the number of Min policies, saturating.
pub fn default_iteration_cap(game: &Game) -> usize {
    saturating_count(&game.min_policy_count())
        .saturating_mul(2)
        .min(usize::MAX as u128) as usize
}

pub fn hoffman_karp(game: &Game, opts: &PiOptions) -> Result<PiOutcome> {
    let mut sigma = opts
        .sigma0
        .clone()
        .unwrap_or_else(|| MinPolicy::first(game));
    if !sigma.is_valid_for(game) {
        return Err(Error::InvariantViolation(
            "invalid initial Min policy".into(),
        ));
    }
    let cap = opts
        .iteration_cap
        .unwrap_or_else(|| default_iteration_cap(game));
    let inner = OnePlayerOptions {
        pin: opts.pin,
        tau0: None,
    };
    let mut visited: Vec<MinPolicy> = Vec::new();
    let mut first_visit: HashMap<MinPolicy, usize> = HashMap::new();
    let mut trace = Vec::new();
    let mut biases = Vec::new();

    for k in 0.. {
        if let Some(&start) = first_visit.get(&sigma) {
            return Err(PiError::CycleDetected {
                repeated: sigma,
                cycle: visited[start..].to_vec(),
            }
            .into());
        }
        if k >= cap {
            return Err(PiError::IterationCap(cap).into());
        }
        first_visit.insert(sigma.clone(), k);
        visited.push(sigma.clone());

        let (pair, tau) = match eigenpair_and_reply(game, &sigma, &inner) {
            Ok(x) => x,
            Err(Error::NonConstantGain(chi)) => return Err(PiError::NonConstantGain(chi).into()),
            Err(e) => return Err(e),
        };
        trace.push(TraceStep {
            k,
            lambda: pair.lambda.clone(),
            sigma: sigma.clone(),
        });
        biases.push(pair.u.clone());

        let next = argmin_policy(game, &pair.u, &sigma);
        if next == sigma {
            let image = eval_t(game, &pair.u);
            if image
                .iter()
                .zip(&pair.u)
                .any(|(t, u)| t != &(&pair.lambda + u))
            {
                return Err(Error::Internal(
                    "terminal eigenpair fails T(u) = λe + u".into(),
                ));
            }
            return Ok(PiOutcome {
                eigenpair: pair,
                sigma,
                tau,
                trace,
                biases,
            });
        }
        sigma = next;
    }
    unreachable!("the loop returns")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Pi,
    Perturbed,
    Deterministic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Upper mean payoff of the input game.
    pub chibar: Rat,
    pub sigma_star: MinPolicy,
    /// Optimal reply of Max to `sigma_star` on the input game.
    pub tau_star: MaxPolicy,
    /// Eigenpair of the operator policy iteration actually ran on.
    pub perturbed_eigenpair: Eigenpair,
    /// Constants used; absent for plain policy iteration.
    pub spec: Option<PerturbSpec>,
    pub trace: Vec<TraceStep>,
    pub method: SolveMethod,
    /// `λ^{σ*}(0)` by enumeration, when within the cross-check cap.
    pub chibar_crosscheck: Option<Rat>,
}

/// Upper mean payoff of `game` once Min is committed to `sigma`, the reply
/// attaining it and, when small enough, the enumerated cross-check.
fn read_back(game: &Game, sigma: &MinPolicy, cap: u128) -> Result<(Rat, MaxPolicy, Option<Rat>)> {
    let sol = solve_one_player(game, sigma)?;
    let chibar = sol.upper_gain();
    let zero = vec![Rat::zero(); game.n()];
    let cross = match lambda_sigma(game, sigma, &zero, cap, Exec::Sequential) {
        Ok((value, _)) => Some(value),
        Err(Error::EnumerationTooLarge { .. }) => None,
        Err(e) => return Err(e),
    };
    if cross.as_ref().is_some_and(|c| c != &chibar) {
        return Err(Error::Internal(
            "enumerated value disagrees with one-player gain".into(),
        ));
    }
    Ok((chibar, sol.tau, cross))
}

/// Plain policy iteration on `game`. Fails with `CycleDetected` or
/// `NonConstantGain` on degenerate or non-ergodic instances.
pub fn solve_pi(game: &Game, opts: &PiOptions) -> Result<SolveReport> {
    let out = hoffman_karp(game, opts)?;
    let (chibar, tau_star, cross) = read_back(game, &out.sigma, opts.crosscheck_cap)?;
    if chibar != out.eigenpair.lambda {
        return Err(Error::Internal(
            "eigenvalue differs from upper mean payoff".into(),
        ));
    }
    Ok(SolveReport {
        chibar,
        sigma_star: out.sigma,
        tau_star,
        perturbed_eigenpair: out.eigenpair,
        spec: None,
        trace: out.trace,
        method: SolveMethod::Pi,
        chibar_crosscheck: cross,
    })
}

/// Errors that cannot happen on a transformed game are defects.
fn as_defect(e: Error) -> Error {
    match e {
        Error::PolicyIteration(PiError::IterationCap(c)) => PiError::IterationCap(c).into(),
        Error::PolicyIteration(pe) => Error::Internal(format!("perturbed policy iteration: {pe}")),
        other => other,
    }
}

fn extend_sigma(sigma: &MinPolicy, total: usize) -> MinPolicy {
    let mut choice = sigma.as_slice().to_vec();
    choice.resize(total, 0);
    MinPolicy::new(choice)
}

/// Policy iteration on the doubled game `(g_ε, 0) + T_M`, then the upper
/// mean payoff of the input game under the terminal Min policy.
pub fn solve_perturbed(game: &Game, opts: &PiOptions) -> Result<SolveReport> {
    let n = game.n();
    let spec = perturbation_params(game);
    let doubled = big_m_double(game, &spec);
    let inner = PiOptions {
        sigma0: opts.sigma0.as_ref().map(|s| extend_sigma(s, 2 * n)),
        ..opts.clone()
    };
    let out = hoffman_karp(&doubled, &inner).map_err(as_defect)?;
    let sigma_star = out.sigma.truncated(n);
    let (chibar, tau_star, cross) = read_back(game, &sigma_star, opts.crosscheck_cap)?;
    let trace = out
        .trace
        .into_iter()
        .map(|s| TraceStep {
            k: s.k,
            lambda: s.lambda,
            sigma: s.sigma.truncated(n),
        })
        .collect();
    Ok(SolveReport {
        chibar,
        sigma_star,
        tau_star,
        perturbed_eigenpair: out.eigenpair,
        spec: Some(spec),
        trace,
        method: SolveMethod::Perturbed,
        chibar_crosscheck: cross,
    })
}

/// Deterministic specialization: policy iteration on `g_ε + T ∘ R_M`
/// realized by replacing the `−∞` entries of `B` with `−M`.
pub fn solve_deterministic(dg: &DetGame, opts: &PiOptions) -> Result<SolveReport> {
    let spec = perturbation_params_det(dg);
    let big_m = spec
        .big_m
        .numer()
        .to_i64()
        .ok_or_else(|| Error::InvariantViolation("M does not fit in 64 bits".into()))?;
    let original = dg.encode()?;
    let transformed = dg.big_m_complete(big_m).encode()?.shifted(&spec.g);
    let out = hoffman_karp(&transformed, opts).map_err(as_defect)?;
    let (chibar, tau_star, cross) = read_back(&original, &out.sigma, opts.crosscheck_cap)?;
    Ok(SolveReport {
        chibar,
        sigma_star: out.sigma,
        tau_star,
        perturbed_eigenpair: out.eigenpair,
        spec: Some(spec),
        trace: out.trace,
        method: SolveMethod::Deterministic,
        chibar_crosscheck: cross,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaCheck {
    /// Eigenvalue of `T ∘ R_M`, evaluated by composition at `v`.
    pub lambda_composed: Rat,
    /// Eigenvalue of the doubled operator `T_M`.
    pub lambda_doubled: Rat,
    /// Whether `λ_doubled = λ_composed / 2` and `(v, R_M(v) − λ/2·e)` solves
    /// the doubled ergodic equation.
    pub bias_map_ok: bool,
    /// Eigenvector of `T ∘ R_M`, last entry 0.
    pub v: Vec<Rat>,
    /// `(v, R_M(v) − λ_composed/2·e)`.
    pub mapped: Vec<Rat>,
}

/// Compares the eigenproblems of `T ∘ R_M` and of the doubled operator
/// `T_M(x, y) = (T(y), R_M(x))`.
///
/// The doubled game is solved by policy iteration without perturbation; if
/// that cycles, it is restarted from the policy found on the perturbed
/// doubled game.
pub fn lemma_transform_check(game: &Game, big_m: &Rat) -> Result<LemmaCheck> {
    let n = game.n();
    let spec = PerturbSpec::new(big_m.clone(), Rat::zero(), n, game.magnitude_bound());
    let doubled = big_m_double(game, &spec);
    let out = match hoffman_karp(&doubled, &PiOptions::default()) {
        Ok(out) => out,
        Err(Error::PolicyIteration(PiError::CycleDetected { .. })) => {
            let start = solve_perturbed(game, &PiOptions::default())?.sigma_star;
            let opts = PiOptions {
                sigma0: Some(extend_sigma(&start, 2 * n)),
                ..PiOptions::default()
            };
            hoffman_karp(&doubled, &opts)?
        }
        Err(e) => return Err(e),
    };
    let lambda_doubled = out.eigenpair.lambda;

    let x = &out.eigenpair.u[..n];
    let v = Eigenpair::normalized(Rat::zero(), x.to_vec()).u;
    let image = eval_t_rm(game, &v, big_m);
    let diffs: Vec<Rat> = image.iter().zip(&v).map(|(t, vi)| t - vi).collect();
    if diffs.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::Internal(
            "first block of the doubled eigenvector is not an eigenvector of T ∘ R_M".into(),
        ));
    }
    let lambda_composed = diffs[0].clone();

    let half = &lambda_composed / Rat::from_int(2);
    let mut mapped = v.clone();
    mapped.extend(apply_rm(&v, big_m).into_iter().map(|y| y - &half));
    let t = eval_t(&doubled, &mapped);
    let solves = t.iter().zip(&mapped).all(|(t, w)| t == &(&half + w));
    Ok(LemmaCheck {
        bias_map_ok: solves && lambda_doubled == half,
        lambda_composed,
        lambda_doubled,
        v,
        mapped,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Discounted {
    /// Fixed point of `x ↦ T(αx)`.
    pub value: Vec<Rat>,
    pub sigma: MinPolicy,
    pub tau: MaxPolicy,
}

/// Value of the pair `(σ, τ)`: `(I − αP) v = r`.
fn discounted_pair_value(
    game: &Game,
    sigma: &MinPolicy,
    tau: &MaxPolicy,
    alpha: &Rat,
) -> Result<Vec<Rat>> {
    let ch = game.chain(sigma, tau);
    let n = game.n();
    let mut a = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { Rat::one() } else { Rat::zero() };
            a[(i, j)] = delta - alpha * &ch.p[(i, j)];
        }
    }
    solve_linear(&a, &ch.r)
}

/// Exact fixed point of `x ↦ T(αx)` by nested policy iteration: Max's
/// discounted problem is solved for each Min policy, then Min improves
/// conservatively.
pub fn discounted_baseline(game: &Game, alpha: &Rat) -> Result<Discounted> {
    if !alpha.is_positive() || alpha >= &Rat::one() {
        return Err(Error::InvariantViolation(
            "discount factor must lie in (0, 1)".into(),
        ));
    }
    let scaled = |v: &[Rat]| -> Vec<Rat> { v.iter().map(|x| alpha * x).collect() };
    let mut sigma = MinPolicy::first(game);
    let mut tau = MaxPolicy::zeros(game);
    loop {
        let value = loop {
            let value = discounted_pair_value(game, &sigma, &tau, alpha)?;
            let next = argmax_reply(game, &sigma, &scaled(&value), &tau);
            if next == tau {
                break value;
            }
            tau = next;
        };
        let next = argmin_policy(game, &scaled(&value), &sigma);
        if next == sigma {
            if eval_t(game, &scaled(&value)) != value {
                return Err(Error::Internal(
                    "discounted value is not a fixed point".into(),
                ));
            }
            return Ok(Discounted { value, sigma, tau });
        }
        sigma = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::game::Outcome;
    use crate::oracle::{brute_chibar, verify_eigenpair};

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn v(xs: &[&str]) -> Vec<Rat> {
        xs.iter().map(|s| r(s)).collect()
    }

    #[test]
    fn single_loop() {
        let out = hoffman_karp(&fixtures::fix_c(), &PiOptions::default()).unwrap();
        assert_eq!(
            out.eigenpair,
            Eigenpair {
                lambda: r("3/2"),
                u: v(&["0"])
            }
        );
        assert_eq!(out.trace.len(), 1);
    }

    #[test]
    fn example_game() {
        let out = hoffman_karp(&fixtures::fix_a(), &PiOptions::default()).unwrap();
        assert_eq!(
            out.eigenpair,
            Eigenpair {
                lambda: r("0"),
                u: v(&["0", "0"])
            }
        );
        assert_eq!(out.trace.len(), 1);
    }

    #[test]
    fn three_state_fixture() {
        let g = fixtures::fix_b();
        let out = hoffman_karp(&g, &PiOptions::default()).unwrap();
        assert_eq!(out.eigenpair.lambda, r("6/5"));
        assert!(verify_eigenpair(
            &g,
            &out.eigenpair.lambda,
            &out.eigenpair.u
        ));
        assert_eq!(out.eigenpair.u, v(&["-18/5", "-16/5", "0"]));
    }

    #[test]
    fn perturbed_fixtures() {
        let rep = solve_perturbed(&fixtures::fix_a(), &PiOptions::default()).unwrap();
        assert_eq!(rep.chibar, r("0"));
        let spec = rep.spec.unwrap();
        assert_eq!(spec.big_m, r("1945"));
        assert_eq!(spec.eps, r("1/2125765"));
        assert_eq!(rep.chibar_crosscheck, Some(r("0")));

        let rep = solve_perturbed(&fixtures::fix_c(), &PiOptions::default()).unwrap();
        assert_eq!(rep.chibar, r("3/2"));
        let rep = solve_perturbed(&fixtures::fix_b(), &PiOptions::default()).unwrap();
        assert_eq!(rep.chibar, r("6/5"));
        for w in rep.trace.windows(2) {
            assert!(w[1].lambda <= w[0].lambda);
        }
    }

    #[test]
    fn deterministic_fixtures() {
        let rep = solve_deterministic(&fixtures::fix_d(), &PiOptions::default()).unwrap();
        assert_eq!(rep.chibar, r("1/2"));
        let spec = rep.spec.unwrap();
        assert_eq!(spec.big_m, r("17"));
        assert_eq!(spec.eps, r("1/9"));

        let dg = DetGame::new(vec![vec![Some(0)]], vec![vec![Some(5)]]).unwrap();
        assert_eq!(
            solve_deterministic(&dg, &PiOptions::default())
                .unwrap()
                .chibar,
            r("5")
        );
    }

    #[test]
    fn decoupled_loops_fail_plain_pi_but_not_perturbed() {
        let g = Game::new(vec![
            vec![vec![Outcome::dirac(Rat::zero(), 2, 0)]],
            vec![vec![Outcome::dirac(Rat::one(), 2, 1)]],
        ])
        .unwrap();
        assert!(matches!(
            hoffman_karp(&g, &PiOptions::default()),
            Err(Error::PolicyIteration(PiError::NonConstantGain(_)))
        ));
        let rep = solve_perturbed(&g, &PiOptions::default()).unwrap();
        assert_eq!(rep.chibar, r("1"));
        assert_eq!(
            rep.chibar,
            brute_chibar(&g, DEFAULT_ENUM_CAP, Exec::Sequential)
                .unwrap()
                .chibar
        );
    }

    #[test]
    fn cycling_instance() {
        let g = fixtures::cycling();
        let opts = PiOptions {
            sigma0: Some(MinPolicy::new(fixtures::CYCLING_SIGMA0.to_vec())),
            ..PiOptions::default()
        };
        match hoffman_karp(&g, &opts) {
            Err(Error::PolicyIteration(PiError::CycleDetected { repeated, cycle })) => {
                assert_eq!(repeated.as_slice(), &[1, 0, 0]);
                assert_eq!(
                    cycle,
                    vec![MinPolicy::new(vec![1, 0, 0]), MinPolicy::new(vec![1, 0, 1])]
                );
            }
            other => panic!("expected a cycle, got {other:?}"),
        }
        let expected = brute_chibar(&g, DEFAULT_ENUM_CAP, Exec::Sequential)
            .unwrap()
            .chibar;
        let rep = solve_perturbed(&g, &opts).unwrap();
        assert_eq!(rep.chibar, expected);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let opts = PiOptions {
            sigma0: Some(MinPolicy::new(vec![1, 0, 0])),
            iteration_cap: Some(1),
            ..PiOptions::default()
        };
        // From this start Min must improve at least once.
        match hoffman_karp(&fixtures::fix_b(), &opts) {
            Err(Error::PolicyIteration(PiError::IterationCap(1))) | Ok(_) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lemma_transform_on_single_loop() {
        let c = lemma_transform_check(&fixtures::fix_c(), &r("10")).unwrap();
        assert_eq!(c.lambda_composed, r("3/2"));
        assert_eq!(c.lambda_doubled, r("3/4"));
        assert!(c.bias_map_ok);
        assert_eq!(c.v, v(&["0"]));
        assert_eq!(c.mapped, v(&["0", "-3/4"]));
    }

    #[test]
    fn lemma_transform_on_constant_payments() {
        let g = Game::new(vec![
            vec![vec![Outcome::new(r("2"), v(&["1/2", "1/2"]))]],
            vec![vec![
                Outcome::new(r("2"), v(&["0", "1"])),
                Outcome::new(r("2"), v(&["1", "0"])),
            ]],
        ])
        .unwrap();
        let c = lemma_transform_check(&g, &r("100")).unwrap();
        assert_eq!(c.lambda_composed, r("2"));
        assert_eq!(c.lambda_doubled, r("1"));
        assert!(c.bias_map_ok);
    }

    #[test]
    fn discounted_examples() {
        let d = discounted_baseline(&fixtures::fix_c(), &r("1/2")).unwrap();
        assert_eq!(d.value, v(&["3"]));
        let d = discounted_baseline(&fixtures::fix_d_game(), &r("1/2")).unwrap();
        assert_eq!(d.value, v(&["2", "0"]));
        assert!(discounted_baseline(&fixtures::fix_c(), &r("1")).is_err());
    }
}

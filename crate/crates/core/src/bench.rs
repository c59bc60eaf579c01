//! Randomized comparison of plain policy iteration, the perturbed solver and
//! the oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, PiError, Result};
use crate::game::Game;
use crate::numeric::Rat;
use crate::oracle::{brute_chibar, verify_eigenpair};
use crate::par::{map_slice, Exec};
use crate::random::{random_game, seeded, GameParams};
use crate::two_player::{solve_perturbed, solve_pi, PiOptions, SolveReport};

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub seed: u64,
    pub games: usize,
    pub params: GameParams,
    pub cap: u128,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PiStatus {
    /// Terminated with a verified eigenpair matching the oracle.
    Verified,
    CycleDetected,
    NonConstantGain,
    IterationCap,
    /// Terminated but disagrees with the oracle. Never expected.
    Mismatch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchRow {
    pub index: usize,
    pub n: usize,
    pub pi: PiStatus,
    pub pi_iterations: Option<usize>,
    pub perturbed_chibar: Rat,
    pub perturbed_iterations: usize,
    pub oracle_chibar: Rat,
    pub agree: bool,
    /// Largest numerator or denominator bit length in the perturbed eigenpair.
    pub max_bits: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub games: usize,
    pub perturbed_agree: usize,
    pub pi_verified: usize,
    pub pi_cycle_detected: usize,
    pub pi_non_constant_gain: usize,
    pub pi_iteration_cap: usize,
    pub pi_mismatch: usize,
    pub max_perturbed_iterations: usize,
    pub max_bits: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchReport {
    pub seed: u64,
    pub rows: Vec<BenchRow>,
    pub summary: BenchSummary,
}

pub fn generate(cfg: &BenchConfig) -> Vec<Game> {
    let mut rng = seeded(cfg.seed);
    (0..cfg.games)
        .map(|_| random_game(&mut rng, &cfg.params))
        .collect()
}

fn max_bits(rep: &SolveReport) -> u64 {
    std::iter::once(&rep.perturbed_eigenpair.lambda)
        .chain(&rep.perturbed_eigenpair.u)
        .map(Rat::bit_len)
        .max()
        .unwrap_or(0)
}

pub fn bench_one(index: usize, game: &Game, cap: u128) -> Result<BenchRow> {
    let oracle = brute_chibar(game, cap, Exec::Sequential)?;
    let opts = PiOptions::default();
    let (pi, pi_iterations) = match solve_pi(game, &opts) {
        Ok(rep) => {
            let pair = &rep.perturbed_eigenpair;
            let ok = rep.chibar == oracle.chibar && verify_eigenpair(game, &pair.lambda, &pair.u);
            let status = if ok {
                PiStatus::Verified
            } else {
                PiStatus::Mismatch
            };
            (status, Some(rep.trace.len()))
        }
        Err(Error::PolicyIteration(PiError::CycleDetected { .. })) => {
            (PiStatus::CycleDetected, None)
        }
        Err(Error::PolicyIteration(PiError::NonConstantGain(_))) => {
            (PiStatus::NonConstantGain, None)
        }
        Err(Error::PolicyIteration(PiError::IterationCap(_))) => (PiStatus::IterationCap, None),
        Err(e) => return Err(e),
    };
    let rep = solve_perturbed(game, &opts)?;
    Ok(BenchRow {
        index,
        n: game.n(),
        pi,
        pi_iterations,
        agree: rep.chibar == oracle.chibar,
        perturbed_iterations: rep.trace.len(),
        max_bits: max_bits(&rep),
        perturbed_chibar: rep.chibar,
        oracle_chibar: oracle.chibar,
    })
}

pub fn summarize(rows: &[BenchRow]) -> BenchSummary {
    let count = |s: PiStatus| rows.iter().filter(|r| r.pi == s).count();
    BenchSummary {
        games: rows.len(),
        perturbed_agree: rows.iter().filter(|r| r.agree).count(),
        pi_verified: count(PiStatus::Verified),
        pi_cycle_detected: count(PiStatus::CycleDetected),
        pi_non_constant_gain: count(PiStatus::NonConstantGain),
        pi_iteration_cap: count(PiStatus::IterationCap),
        pi_mismatch: count(PiStatus::Mismatch),
        max_perturbed_iterations: rows
            .iter()
            .map(|r| r.perturbed_iterations)
            .max()
            .unwrap_or(0),
        max_bits: rows.iter().map(|r| r.max_bits).max().unwrap_or(0),
    }
}

/// Runs every instance (possibly in parallel) and merges in index order.
pub fn run_bench(cfg: &BenchConfig, exec: Exec) -> Result<BenchReport> {
    let games = generate(cfg);
    let indexed: Vec<(usize, &Game)> = games.iter().enumerate().collect();
    let rows = map_slice(exec, &indexed, |(i, g)| bench_one(*i, g, cfg.cap))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchReport {
        seed: cfg.seed,
        summary: summarize(&rows),
        rows,
    })
}

impl BenchReport {
    pub fn to_text(&self) -> String {
        let s = &self.summary;
        let mut out = format!("seed {}\n", self.seed);
        out.push_str(
            "index  n  pi               pi_iters  pert_iters  bits  chibar  oracle  agree\n",
        );
        for r in &self.rows {
            let pi = serde_json::to_value(r.pi).expect("enum serializes");
            out.push_str(&format!(
                "{:>5}  {}  {:<15}  {:>8}  {:>10}  {:>4}  {}  {}  {}\n",
                r.index,
                r.n,
                pi.as_str().unwrap_or_default(),
                r.pi_iterations.map_or("-".into(), |k| k.to_string()),
                r.perturbed_iterations,
                r.max_bits,
                r.perturbed_chibar,
                r.oracle_chibar,
                if r.agree { "yes" } else { "NO" },
            ));
        }
        out.push_str(&format!(
            "perturbed agrees with oracle: {}/{}\n\
             pi: verified {}, cycle detected {}, non-constant gain {}, iteration cap {}, mismatch {}\n\
             max perturbed iterations {}, max bit length {}\n",
            s.perturbed_agree,
            s.games,
            s.pi_verified,
            s.pi_cycle_detected,
            s.pi_non_constant_gain,
            s.pi_iteration_cap,
            s.pi_mismatch,
            s.max_perturbed_iterations,
            s.max_bits,
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::one_player::DEFAULT_ENUM_CAP;

    #[test]
    fn single_state_games_agree() {
        let cfg = BenchConfig {
            seed: 1,
            games: 10,
            params: GameParams {
                max_states: 1,
                ..GameParams::default()
            },
            cap: DEFAULT_ENUM_CAP,
        };
        let rep = run_bench(&cfg, Exec::Sequential).unwrap();
        assert_eq!(rep.summary.perturbed_agree, 10);
        assert_eq!(rep.summary.pi_verified, 10);
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = BenchConfig {
            seed: 9,
            games: 4,
            params: GameParams {
                max_states: 2,
                ..GameParams::default()
            },
            cap: DEFAULT_ENUM_CAP,
        };
        let a = run_bench(&cfg, Exec::Sequential).unwrap();
        let b = run_bench(&cfg, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_text(), b.to_text());
    }
}

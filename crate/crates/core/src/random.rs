//! Seeded generators for random games and stochastic matrices.
//!
//! All generators draw from a caller-supplied RNG, so a fixed seed
//! reproduces the same instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game::{DetGame, Game, Outcome};
use crate::numeric::{Rat, RatMatrix};
use crate::oracle::pair_count;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Ways to make an instance degenerate for plain policy iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Degeneracy {
    /// Copy a Min action or a Max reply verbatim, creating exact ties.
    pub duplicate_actions: bool,
    /// Payments of the form `c + Pφ − φ_i`, so every policy pair has gain `c`.
    pub tied_cycle_means: bool,
    /// Turn some states into absorbing self-loops, giving several final classes.
    pub reducible: bool,
}

impl Degeneracy {
    pub const ALL: Degeneracy = Degeneracy {
        duplicate_actions: true,
        tied_cycle_means: true,
        reducible: true,
    };
}

#[derive(Clone, Debug)]
pub struct GameParams {
    pub max_states: usize,
    pub max_min_actions: usize,
    pub max_max_actions: usize,
    /// Bound on payment and probability denominators.
    pub max_den: u32,
    /// Bound on payment numerators in absolute value.
    pub max_num: i64,
    pub degeneracy: Degeneracy,
}

impl Default for GameParams {
    fn default() -> Self {
        GameParams {
            max_states: 4,
            max_min_actions: 3,
            max_max_actions: 3,
            max_den: 4,
            max_num: 6,
            degeneracy: Degeneracy::default(),
        }
    }
}

/// Probability vector of length `n` with a common denominator `≤ max_den`
/// and a random support.
pub fn random_distribution<R: Rng>(rng: &mut R, n: usize, max_den: u32) -> Vec<Rat> {
    let q = rng.gen_range(1..=max_den.max(1));
    let support_size = rng.gen_range(1..=n.min(q as usize));
    let mut states: Vec<usize> = (0..n).collect();
    states.shuffle(rng);
    let support = &states[..support_size];
    // Every support state gets one unit, the rest is spread at random.
    let mut units = vec![0u32; n];
    for &s in support {
        units[s] = 1;
    }
    for _ in support_size as u32..q {
        units[*support.choose(rng).expect("nonempty")] += 1;
    }
    units
        .into_iter()
        .map(|u| Rat::new(u as i64, q as i64))
        .collect()
}

pub fn random_payment<R: Rng>(rng: &mut R, max_num: i64, max_den: u32) -> Rat {
    let den = rng.gen_range(1..=max_den.max(1)) as i64;
    Rat::new(rng.gen_range(-max_num..=max_num), den)
}

pub fn random_stochastic_matrix<R: Rng>(rng: &mut R, n: usize, max_den: u32) -> RatMatrix {
    let rows = (0..n)
        .map(|_| random_distribution(rng, n, max_den))
        .collect();
    RatMatrix::from_rows(rows).expect("square")
}

pub fn random_game<R: Rng>(rng: &mut R, params: &GameParams) -> Game {
    let n = rng.gen_range(1..=params.max_states);
    let deg = params.degeneracy;
    let absorbing: Vec<bool> = (0..n).map(|_| deg.reducible && rng.gen_bool(0.3)).collect();
    let potential: Vec<Rat> = (0..n)
        .map(|_| Rat::from_int(rng.gen_range(-3..=3)))
        .collect();
    let constant = Rat::from_int(rng.gen_range(-2..=2));

    let mut actions: Vec<Vec<Vec<Outcome>>> = (0..n)
        .map(|i| {
            let a_count = rng.gen_range(1..=params.max_min_actions);
            (0..a_count)
                .map(|_| {
                    let b_count = rng.gen_range(1..=params.max_max_actions);
                    (0..b_count)
                        .map(|_| {
                            let p = if absorbing[i] {
                                let mut row = vec![Rat::zero(); n];
                                row[i] = Rat::one();
                                row
                            } else {
                                random_distribution(rng, n, params.max_den)
                            };
                            let r = if deg.tied_cycle_means {
                                let drift: Rat =
                                    p.iter().zip(&potential).map(|(pj, f)| pj * f).sum();
                                &constant + drift - &potential[i]
                            } else {
                                random_payment(rng, params.max_num, params.max_den)
                            };
                            Outcome::new(r, p)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    if deg.duplicate_actions {
        let i = rng.gen_range(0..n);
        if rng.gen_bool(0.5) {
            let a = rng.gen_range(0..actions[i].len());
            let copy = actions[i][a].clone();
            actions[i].push(copy);
        } else {
            let a = rng.gen_range(0..actions[i].len());
            let b = rng.gen_range(0..actions[i][a].len());
            let copy = actions[i][a][b].clone();
            actions[i][a].push(copy);
        }
    }
    Game::new(actions).expect("generated games are valid")
}

#[derive(Clone, Debug)]
pub struct DetParams {
    pub max_states: usize,
    pub max_rows: usize,
    pub max_abs: i64,
    /// Probability that an entry is finite.
    pub density: f64,
    /// Resample until the oracle enumerates at most this many pairs.
    pub max_pairs: u128,
    /// All cycle means zero with redundant Max moves.
    pub tied: bool,
}

impl Default for DetParams {
    fn default() -> Self {
        DetParams {
            max_states: 5,
            max_rows: 5,
            max_abs: 10,
            density: 0.4,
            max_pairs: 5_000,
            tied: false,
        }
    }
}

fn sparse_matrix<R: Rng>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    density: f64,
    mut entry: impl FnMut(&mut R, usize, usize) -> i64,
) -> Vec<Vec<Option<i64>>> {
    (0..rows)
        .map(|j| {
            (0..cols)
                .map(|k| rng.gen_bool(density).then(|| entry(rng, j, k)))
                .collect()
        })
        .collect()
}

pub fn random_det_game<R: Rng>(rng: &mut R, params: &DetParams) -> DetGame {
    loop {
        let n = rng.gen_range(1..=params.max_states);
        let m = rng.gen_range(1..=params.max_rows);
        let bound = params.max_abs;
        let phi: Vec<i64> = (0..n)
            .map(|_| rng.gen_range(-bound / 2..=bound / 2))
            .collect();
        let psi: Vec<i64> = (0..m)
            .map(|_| rng.gen_range(-bound / 2..=bound / 2))
            .collect();
        let tied = params.tied;
        let a_entry = |rng: &mut R, j: usize, i: usize| {
            if tied {
                phi[i] - psi[j]
            } else {
                rng.gen_range(-bound..=bound)
            }
        };
        let b_entry = |rng: &mut R, j: usize, k: usize| {
            if tied {
                phi[k] - psi[j]
            } else {
                rng.gen_range(-bound..=bound)
            }
        };
        let mut a = sparse_matrix(rng, m, n, params.density, a_entry);
        let mut b = sparse_matrix(rng, m, n, params.density, b_entry);
        for i in 0..n {
            if a.iter().all(|row| row[i].is_none()) {
                let j = rng.gen_range(0..m);
                a[j][i] = Some(a_entry(rng, j, i));
            }
        }
        for (j, row) in b.iter_mut().enumerate() {
            if row.iter().all(Option::is_none) {
                let k = rng.gen_range(0..n);
                row[k] = Some(b_entry(rng, j, k));
            }
        }
        let dg = DetGame::new(a, b).expect("generated det games are valid");
        let game = dg.encode().expect("valid");
        if pair_count(&game) <= params.max_pairs.into() {
            return dg;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::DetGame;

    #[test]
    fn distributions_are_stochastic_with_small_denominators() {
        let mut rng = seeded(7);
        for _ in 0..200 {
            let d = random_distribution(&mut rng, 4, 4);
            assert_eq!(d.iter().sum::<Rat>(), Rat::one());
            assert!(d.iter().all(|x| !x.is_negative() && x.denom() <= &4.into()));
        }
    }

    #[test]
    fn same_seed_same_games() {
        let params = GameParams {
            degeneracy: Degeneracy::ALL,
            ..GameParams::default()
        };
        let a: Vec<Game> = (0..5)
            .map(|_| ())
            .scan(seeded(3), |r, _| Some(random_game(r, &params)))
            .collect();
        let b: Vec<Game> = (0..5)
            .map(|_| ())
            .scan(seeded(3), |r, _| Some(random_game(r, &params)))
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn tied_payments_give_constant_gain() {
        let params = GameParams {
            degeneracy: Degeneracy {
                tied_cycle_means: true,
                ..Degeneracy::default()
            },
            ..GameParams::default()
        };
        let mut rng = seeded(11);
        for _ in 0..20 {
            let g = random_game(&mut rng, &params);
            let gains: Vec<Rat> = crate::game::MinPolicy::enumerate(&g)
                .iter()
                .map(|s| {
                    let tau = crate::game::MaxPolicy::zeros(&g);
                    crate::markov::gain(&g.chain(s, &tau)).unwrap().gain[0].clone()
                })
                .collect();
            assert!(gains.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn det_games_respect_pair_budget() {
        let mut rng = seeded(5);
        let params = DetParams::default();
        for _ in 0..20 {
            let dg: DetGame = random_det_game(&mut rng, &params);
            assert!(dg.n <= 5 && dg.m <= 5);
            assert!(pair_count(&dg.encode().unwrap()) <= params.max_pairs.into());
        }
    }
}

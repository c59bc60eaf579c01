use num_bigint::BigUint;
use num_traits::{One, Pow};
use serde::{Deserialize, Serialize};

use super::{DetGame, Game, Outcome};
use crate::numeric::{ceil_isqrt_pow, Rat};

/// Teleport penalty `M`, perturbation parameter `eps`, the shift vector
/// `g_i = eps^(i+1)` and the magnitude bound `D` the pair was derived from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbSpec {
    #[serde(rename = "M")]
    pub big_m: Rat,
    pub eps: Rat,
    pub g: Vec<Rat>,
    #[serde(rename = "D", with = "biguint_string")]
    pub d: BigUint,
}

impl PerturbSpec {
    pub fn new(big_m: Rat, eps: Rat, n: usize, d: BigUint) -> Self {
        let g = perturbation_vector(&eps, n);
        PerturbSpec { big_m, eps, g, d }
    }
}

/// `(eps, eps², …, epsⁿ)`.
pub fn perturbation_vector(eps: &Rat, n: usize) -> Vec<Rat> {
    let mut g = Vec::with_capacity(n);
    let mut p = eps.clone();
    for _ in 0..n {
        g.push(p.clone());
        p = &p * eps;
    }
    g
}

/// Smallest clean constants strictly inside the stochastic-game bounds
/// `M > 4 n^{n/2} D^{n²+1}` and `0 < eps < 1 / (nⁿ D^{2n(n+1)})`.
pub fn perturbation_params(game: &Game) -> PerturbSpec {
    let n = game.n() as u32;
    let d = game.magnitude_bound();
    let big_m = BigUint::from(4u32) * ceil_isqrt_pow(n) * Pow::pow(&d, n * n + 1) + BigUint::one();
    let eps_den = Pow::pow(BigUint::from(n), n) * Pow::pow(&d, 2 * n * (n + 1)) + BigUint::one();
    let eps = Rat::from(eps_den).recip().expect("positive");
    PerturbSpec::new(Rat::from(big_m), eps, game.n(), d)
}

/// Deterministic-game constants `M = 4nD + 1`, `eps = 1/(n³ + 1)`.
pub fn perturbation_params_det(dg: &DetGame) -> PerturbSpec {
    let n = BigUint::from(dg.n);
    let d = dg.magnitude_bound();
    let big_m = BigUint::from(4u32) * &n * &d + BigUint::one();
    let eps = Rat::from(Pow::pow(&n, 3u32) + BigUint::one())
        .recip()
        .expect("positive");
    PerturbSpec::new(Rat::from(big_m), eps, dg.n, d)
}

/// Doubled game realizing `(g, 0) + T_M`, `T_M(x, y) = (T(y), R_M(x))`.
///
/// States `0..n` copy the input with successors relabelled into `n..2n` and
/// payments shifted by `spec.g`. In state `n + i` Min has a single action and
/// Max picks the next state `j < n`, paying `−M` unless `j = i`.
pub fn big_m_double(game: &Game, spec: &PerturbSpec) -> Game {
    let n = game.n();
    assert_eq!(spec.g.len(), n, "perturbation vector length must equal n");
    let mut actions: Vec<Vec<Vec<Outcome>>> = Vec::with_capacity(2 * n);
    for (i, state) in game.actions().iter().enumerate() {
        actions.push(
            state
                .iter()
                .map(|replies| {
                    replies
                        .iter()
                        .map(|o| {
                            let mut row = vec![Rat::zero(); 2 * n];
                            for (j, p) in o.transition.iter().enumerate() {
                                row[n + j] = p.clone();
                            }
                            Outcome::new(&o.payment + &spec.g[i], row)
                        })
                        .collect()
                })
                .collect(),
        );
    }
    let penalty = -&spec.big_m;
    for i in 0..n {
        let replies = (0..n)
            .map(|j| {
                let pay = if j == i { Rat::zero() } else { penalty.clone() };
                Outcome::dirac(pay, 2 * n, j)
            })
            .collect();
        actions.push(vec![replies]);
    }
    Game::new(actions).expect("doubling preserves game invariants")
}

mod biguint_string {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(d)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::game::MinPolicy;

    #[test]
    fn stochastic_params_for_example_game() {
        let spec = perturbation_params(&fixtures::fix_a());
        assert_eq!(spec.big_m, Rat::from_int(1945));
        assert_eq!(spec.eps, Rat::new(1, 2125765));
        assert_eq!(spec.d, BigUint::from(3u32));
    }

    #[test]
    fn stochastic_params_single_state() {
        let g = Game::new(vec![vec![vec![Outcome::dirac(Rat::from_int(2), 1, 0)]]]).unwrap();
        let spec = perturbation_params(&g);
        assert_eq!(spec.big_m, Rat::from_int(17));
        assert_eq!(spec.eps, Rat::new(1, 17));
    }

    #[test]
    fn perturbation_vector_is_powers() {
        let g = perturbation_vector(&Rat::new(1, 28), 3);
        assert_eq!(
            g,
            vec![Rat::new(1, 28), Rat::new(1, 784), Rat::new(1, 21952)]
        );
    }

    #[test]
    fn det_params() {
        let spec = perturbation_params_det(&fixtures::fix_d());
        assert_eq!(spec.big_m, Rat::from_int(17));
        assert_eq!(spec.eps, Rat::new(1, 9));
        let dg = DetGame::new(vec![vec![Some(0)]], vec![vec![Some(2)]]).unwrap();
        let spec = perturbation_params_det(&dg);
        assert_eq!(spec.big_m, Rat::from_int(9));
        assert_eq!(spec.eps, Rat::new(1, 2));
        let dg = DetGame::new(
            vec![vec![Some(0), Some(1), Some(-2)]],
            vec![vec![Some(1), None, Some(0)]],
        )
        .unwrap();
        let spec = perturbation_params_det(&dg);
        assert_eq!(spec.big_m, Rat::from_int(25));
        assert_eq!(spec.eps, Rat::new(1, 28));
    }

    #[test]
    fn doubling_single_state() {
        let spec = PerturbSpec::new(Rat::from_int(10), Rat::zero(), 1, BigUint::from(3u32));
        let d = big_m_double(&fixtures::fix_c(), &spec);
        assert_eq!(d.n(), 2);
        let x = vec![Rat::from_int(4), Rat::from_int(-1)];
        assert_eq!(
            crate::shapley::eval_t(&d, &x),
            vec![Rat::new(1, 2), Rat::from_int(4)]
        );
    }

    #[test]
    fn doubling_example_game() {
        let g = fixtures::fix_a();
        let spec = perturbation_params(&g);
        let d = big_m_double(&g, &spec);
        assert_eq!(d.n(), 4);
        assert_eq!(d.outcome(0, 0, 0).payment, Rat::new(1, 2125765));
        assert_eq!(d.outcome(1, 0, 0).payment, Rat::from_int(-3) + &spec.g[1]);
        assert_eq!(d.outcome(0, 0, 1).transition[2], Rat::new(1, 2));
        for i in 2..4 {
            assert_eq!(d.min_action_count(i), 1);
            for o in d.replies(i, 0) {
                assert!(o.payment.is_zero() || o.payment == -&spec.big_m);
            }
        }
        assert_eq!(d.min_policy_count(), g.min_policy_count());
        let s = MinPolicy::first(&d);
        assert_eq!(s.truncated(2), MinPolicy::first(&g));
    }
}

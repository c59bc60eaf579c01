//! Exact solver for the mean payoff of finite perfect-information zero-sum
//! stochastic games.
//!
//! Every quantity is an exact rational ([`Rat`]). The main entry points are
//! [`two_player::solve_perturbed`], [`two_player::solve_deterministic`] and
//! the brute-force [`oracle`].

pub mod bench;
pub mod error;
pub mod fixtures;
pub mod game;
pub mod map;
pub mod markov;
pub mod numeric;
pub mod one_player;
pub mod oracle;
pub mod par;
pub mod random;
pub mod shapley;
pub mod two_player;

pub use error::{Error, PiError, Result};
pub use numeric::Rat;

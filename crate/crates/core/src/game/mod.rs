//! Game data: stochastic games, deterministic games, policies, the big-M
//! doubled game and the perturbation constants.

mod det;
mod io;
mod model;
mod perturb;
mod policy;

pub use det::DetGame;
pub use io::{
    parse_any, parse_det_game, parse_game, serialize_det_game, serialize_game, GameInput,
};
pub use model::{Game, Outcome};
pub use perturb::{
    big_m_double, perturbation_params, perturbation_params_det, perturbation_vector, PerturbSpec,
};
pub use policy::{saturating_count, MaxPolicy, MinPolicy};

//! Small reference games used throughout the tests and the CLI examples.
//!
//! * `fix_a`: two states, Max only, `T(0) = 0` with two maximizing measures.
//! * `fix_b`: three states, both players move.
//! * `fix_c`: one state, a single `3/2` self-loop.
//! * `fix_d`: deterministic two-cycle paying `2` then `−1`.
//! * `cycling`: three states on which plain policy iteration started from
//!   [`CYCLING_SIGMA0`] alternates between two Min policies forever.

use crate::game::{parse_det_game, parse_game, DetGame, Game};

pub const FIX_A_JSON: &str = include_str!("../../../fixtures/fixA.json");
pub const FIX_B_JSON: &str = include_str!("../../../fixtures/fixB.json");
pub const FIX_C_JSON: &str = include_str!("../../../fixtures/fixC.json");
pub const FIX_D_JSON: &str = include_str!("../../../fixtures/fixD.det.json");
pub const CYCLING_JSON: &str = include_str!("../../../fixtures/cycling.json");

pub const CYCLING_SIGMA0: [usize; 3] = [1, 0, 0];

pub fn fix_a() -> Game {
    parse_game(FIX_A_JSON).expect("fixture A is valid")
}

pub fn fix_b() -> Game {
    parse_game(FIX_B_JSON).expect("fixture B is valid")
}

pub fn fix_c() -> Game {
    parse_game(FIX_C_JSON).expect("fixture C is valid")
}

pub fn fix_d() -> DetGame {
    parse_det_game(FIX_D_JSON).expect("fixture D is valid")
}

pub fn fix_d_game() -> Game {
    fix_d().encode().expect("fixture D encodes")
}

pub fn cycling() -> Game {
    parse_game(CYCLING_JSON).expect("cycling fixture is valid")
}

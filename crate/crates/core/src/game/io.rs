//! JSON game files.
//!
//! ```json
//! {"n": 1, "states": [{"min_actions": [{"max_actions": [{"r": "3/2", "p": ["1"]}]}]}]}
//! ```
//!
//! Deterministic games use `{"m": .., "n": .., "A": [[int|null]], "B": [[int|null]]}`
//! with `null` standing for `−∞`.

use serde::{Deserialize, Serialize};

use super::{DetGame, Game, Outcome};
use crate::error::{Error, Result};
use crate::numeric::Rat;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFile {
    n: usize,
    states: Vec<StateFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    min_actions: Vec<MinActionFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MinActionFile {
    max_actions: Vec<OutcomeFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutcomeFile {
    r: Rat,
    p: Vec<Rat>,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        reason: e.to_string(),
    }
}

pub fn parse_game(text: &str) -> Result<Game> {
    let file: GameFile = serde_json::from_str(text).map_err(parse_error)?;
    if file.states.len() != file.n {
        return Err(Error::InvariantViolation(format!(
            "declared n = {} but {} states given",
            file.n,
            file.states.len()
        )));
    }
    let actions = file
        .states
        .into_iter()
        .map(|s| {
            s.min_actions
                .into_iter()
                .map(|a| {
                    a.max_actions
                        .into_iter()
                        .map(|o| Outcome::new(o.r, o.p))
                        .collect()
                })
                .collect()
        })
        .collect();
    Game::new(actions)
}

pub fn serialize_game(game: &Game) -> String {
    let file = GameFile {
        n: game.n(),
        states: game
            .actions()
            .iter()
            .map(|s| StateFile {
                min_actions: s
                    .iter()
                    .map(|replies| MinActionFile {
                        max_actions: replies
                            .iter()
                            .map(|o| OutcomeFile {
                                r: o.payment.clone(),
                                p: o.transition.clone(),
                            })
                            .collect(),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string(&file).expect("game serialization cannot fail")
}

pub fn parse_det_game(text: &str) -> Result<DetGame> {
    let dg: DetGame = serde_json::from_str(text).map_err(parse_error)?;
    dg.validate()?;
    Ok(dg)
}

pub fn serialize_det_game(dg: &DetGame) -> String {
    serde_json::to_string(dg).expect("det game serialization cannot fail")
}

/// Either input schema, told apart by the presence of the `"m"` key.
#[derive(Clone, Debug)]
pub enum GameInput {
    Stochastic(Game),
    Deterministic(DetGame),
}

pub fn parse_any(text: &str) -> Result<GameInput> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(parse_error)?;
    let is_det = value.as_object().is_some_and(|o| o.contains_key("m"));
    if is_det {
        parse_det_game(text).map(GameInput::Deterministic)
    } else {
        parse_game(text).map(GameInput::Stochastic)
    }
}

//! Sampling the perturbation space on a 2D grid.
//!
//! For each grid point `γ` (two chosen coordinates vary, the others stay at
//! their base values; equal axes give a line) every Min policy `σ` gets the
//! bias-uniqueness certificate of `γ + T^σ`, and the game `γ + T` gets its
//! eigenvalue when the ergodic equation is solvable.
//!
//! CSV columns: `g0..g{n-1}`, one `sigma_<a0.a1...>` column per Min policy
//! holding `U` (unique) or `I` (inconclusive), `lambda` (or `none`) and
//! `verdict`:
//! - `certified`: solvable, and every Min policy attaining `λ` has a single
//!   maximizing measure;
//! - `inconclusive`: solvable, some attaining policy has several;
//! - `none`: `γ + T` has no eigenvalue (non-constant mean payoff).

use crate::error::{Error, Result};
use crate::game::{Game, MinPolicy};
use crate::numeric::Rat;
use crate::one_player::{lambda_sigma, Certificate};
use crate::oracle::brute_chibar;
use crate::par::{map_range, Exec};

#[derive(Clone, Debug)]
pub struct MapSpec {
    pub axes: (usize, usize),
    pub base: Vec<Rat>,
    pub lo: Rat,
    pub hi: Rat,
    pub step: Rat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    Inconclusive,
    None,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Certified => "certified",
            Verdict::Inconclusive => "inconclusive",
            Verdict::None => "none",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapRow {
    pub gamma: Vec<Rat>,
    pub certificates: Vec<Certificate>,
    pub lambda: Option<Rat>,
    pub verdict: Verdict,
}

#[derive(Debug)]
pub struct MapOutput {
    pub sigmas: Vec<MinPolicy>,
    pub rows: Vec<MapRow>,
    /// First failure, if any; `rows` then holds the points before it.
    pub error: Option<Error>,
}

/// `lo, lo + step, …` up to and including `hi`. Empty when `lo > hi`.
pub fn axis_values(lo: &Rat, hi: &Rat, step: &Rat) -> Result<Vec<Rat>> {
    if !step.is_positive() {
        return Err(Error::InvariantViolation(
            "grid step must be positive".into(),
        ));
    }
    let mut out = Vec::new();
    let mut x = lo.clone();
    while &x <= hi {
        out.push(x.clone());
        x = &x + step;
    }
    Ok(out)
}

pub fn grid_points(spec: &MapSpec, n: usize) -> Result<Vec<Vec<Rat>>> {
    let (i, j) = spec.axes;
    if i >= n || j >= n {
        return Err(Error::InvariantViolation(format!(
            "axes must be states below {n}"
        )));
    }
    if spec.base.len() != n {
        return Err(Error::InvariantViolation(format!(
            "base point needs {n} entries"
        )));
    }
    let values = axis_values(&spec.lo, &spec.hi, &spec.step)?;
    if i == j {
        return Ok(values
            .into_iter()
            .map(|x| {
                let mut p = spec.base.clone();
                p[i] = x;
                p
            })
            .collect());
    }
    let mut points = Vec::with_capacity(values.len() * values.len());
    for y in &values {
        for x in &values {
            let mut p = spec.base.clone();
            p[i] = x.clone();
            p[j] = y.clone();
            points.push(p);
        }
    }
    Ok(points)
}

fn map_point(game: &Game, sigmas: &[MinPolicy], gamma: &[Rat], cap: u128) -> Result<MapRow> {
    let mut lambdas = Vec::with_capacity(sigmas.len());
    let mut certificates = Vec::with_capacity(sigmas.len());
    for s in sigmas {
        let (value, witnesses) = lambda_sigma(game, s, gamma, cap, Exec::Sequential)?;
        lambdas.push(value);
        certificates.push(if witnesses.len() == 1 {
            Certificate::Unique
        } else {
            Certificate::Inconclusive
        });
    }
    let report = brute_chibar(&game.shifted(gamma), cap, Exec::Sequential)?;
    let solvable = report.chi.windows(2).all(|w| w[0] == w[1]);
    let (lambda, verdict) = if solvable {
        let all_unique = lambdas
            .iter()
            .zip(&certificates)
            .filter(|(l, _)| **l == report.chibar)
            .all(|(_, c)| *c == Certificate::Unique);
        let verdict = if all_unique {
            Verdict::Certified
        } else {
            Verdict::Inconclusive
        };
        (Some(report.chibar), verdict)
    } else {
        (None, Verdict::None)
    };
    Ok(MapRow {
        gamma: gamma.to_vec(),
        certificates,
        lambda,
        verdict,
    })
}

pub fn map_grid(game: &Game, spec: &MapSpec, cap: u128, exec: Exec) -> Result<MapOutput> {
    let points = grid_points(spec, game.n())?;
    let sigmas = MinPolicy::enumerate(game);
    let results = map_range(exec, points.len(), |k| {
        map_point(game, &sigmas, &points[k], cap)
    });
    let mut rows = Vec::with_capacity(results.len());
    let mut error = None;
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                error = Some(e);
                break;
            }
        }
    }
    Ok(MapOutput {
        sigmas,
        rows,
        error,
    })
}

impl MapOutput {
    pub fn header(&self, n: usize) -> String {
        let mut cols: Vec<String> = (0..n).map(|i| format!("g{i}")).collect();
        for s in &self.sigmas {
            let label: Vec<String> = s.as_slice().iter().map(usize::to_string).collect();
            cols.push(format!("sigma_{}", label.join(".")));
        }
        cols.push("lambda".into());
        cols.push("verdict".into());
        cols.join(",")
    }

    pub fn to_csv(&self, n: usize) -> String {
        let mut out = self.header(n);
        out.push('\n');
        for row in &self.rows {
            let mut cols: Vec<String> = row.gamma.iter().map(Rat::to_string).collect();
            cols.extend(row.certificates.iter().map(|c| match c {
                Certificate::Unique => "U".to_string(),
                Certificate::Inconclusive => "I".to_string(),
            }));
            cols.push(row.lambda.as_ref().map_or("none".into(), Rat::to_string));
            cols.push(row.verdict.as_str().into());
            out.push_str(&cols.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::one_player::DEFAULT_ENUM_CAP;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn empty_grid_gives_header_only() {
        let g = fixtures::fix_b();
        let spec = MapSpec {
            axes: (0, 1),
            base: vec![Rat::zero(); 3],
            lo: r("1"),
            hi: r("0"),
            step: r("1/2"),
        };
        let out = map_grid(&g, &spec, DEFAULT_ENUM_CAP, Exec::Sequential).unwrap();
        assert!(out.rows.is_empty());
        assert_eq!(
            out.to_csv(3),
            "g0,g1,g2,sigma_0.0.0,sigma_1.0.0,sigma_0.1.0,sigma_1.1.0,lambda,verdict\n"
        );
    }

    #[test]
    fn example_game_slice() {
        let g = fixtures::fix_a();
        let spec = MapSpec {
            axes: (0, 1),
            base: vec![Rat::zero(); 2],
            lo: r("0"),
            hi: r("1"),
            step: r("1"),
        };
        let out = map_grid(&g, &spec, DEFAULT_ENUM_CAP, Exec::Sequential).unwrap();
        assert_eq!(out.rows.len(), 4);
        let origin = &out.rows[0];
        assert_eq!(origin.lambda, Some(r("0")));
        assert_eq!(origin.verdict, Verdict::Inconclusive);
        let shifted = &out.rows[1];
        assert_eq!(shifted.gamma, vec![r("1"), r("0")]);
        assert_eq!(shifted.lambda, Some(r("1")));
        assert_eq!(shifted.verdict, Verdict::Certified);
    }

    #[test]
    fn cap_failure_keeps_earlier_rows() {
        let g = fixtures::fix_b();
        let spec = MapSpec {
            axes: (0, 1),
            base: vec![Rat::zero(); 3],
            lo: r("0"),
            hi: r("1"),
            step: r("1"),
        };
        let out = map_grid(&g, &spec, 3, Exec::Sequential).unwrap();
        assert!(out.rows.is_empty());
        assert!(matches!(out.error, Some(Error::EnumerationTooLarge { .. })));
    }

    #[test]
    fn single_state_line_is_certified() {
        let spec = MapSpec {
            axes: (0, 0),
            base: vec![Rat::zero()],
            lo: r("-2"),
            hi: r("2"),
            step: r("1/2"),
        };
        let out = map_grid(&fixtures::fix_c(), &spec, 10, Exec::Sequential).unwrap();
        assert_eq!(out.rows.len(), 9);
        assert!(out.rows.iter().all(|row| row.verdict == Verdict::Certified));
        assert_eq!(out.rows[0].lambda, Some(r("-1/2")));
    }

    #[test]
    fn bad_axes_rejected() {
        let spec = MapSpec {
            axes: (0, 2),
            base: vec![Rat::zero(); 2],
            lo: r("0"),
            hi: r("1"),
            step: r("1"),
        };
        assert!(map_grid(&fixtures::fix_a(), &spec, 10, Exec::Sequential).is_err());
    }
}

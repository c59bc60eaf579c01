//! Output documents. JSON reports carry `"schema": 1` and `"command"`.

use serde::Serialize;

use mpg_core::game::{MaxPolicy, MinPolicy};
use mpg_core::oracle::OracleReport;
use mpg_core::two_player::SolveReport;
use mpg_core::Rat;

pub const SCHEMA: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: u32,
    command: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

pub fn json<T: Serialize>(command: &str, body: &T) -> String {
    let env = Envelope {
        schema: SCHEMA,
        command,
        body,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
#[serde(untagged)]
pub enum SolveOutput {
    Solved {
        #[serde(flatten)]
        report: Box<SolveReport>,
        /// Why `auto` left plain policy iteration, if it did.
        fallback: Option<String>,
    },
    Oracle(Box<OracleReport>),
}

impl SolveOutput {
    pub fn solved(report: SolveReport, fallback: Option<String>) -> Self {
        SolveOutput::Solved {
            report: Box::new(report),
            fallback,
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            SolveOutput::Oracle(rep) => format!("method: oracle\n{}", oracle_text(rep)),
            SolveOutput::Solved { report, fallback } => {
                let method = serde_json::to_value(report.method).expect("enum serializes");
                let mut out = format!("method: {}\n", method.as_str().unwrap_or_default());
                if let Some(reason) = fallback {
                    out.push_str(&format!("fallback: {reason}\n"));
                }
                out.push_str(&format!("chibar: {}\n", report.chibar));
                out.push_str(&format!("sigma*: {}\n", min_policy(&report.sigma_star)));
                out.push_str(&format!("tau*: {}\n", max_policy(&report.tau_star)));
                if let Some(spec) = &report.spec {
                    out.push_str(&format!("M: {}\neps: {}\n", spec.big_m, spec.eps));
                }
                let pair = &report.perturbed_eigenpair;
                out.push_str(&format!(
                    "eigenpair: lambda {} u {}\n",
                    pair.lambda,
                    rats(&pair.u)
                ));
                for step in &report.trace {
                    out.push_str(&format!(
                        "iteration {}: lambda {} sigma {}\n",
                        step.k,
                        step.lambda,
                        min_policy(&step.sigma)
                    ));
                }
                out
            }
        }
    }
}

pub fn oracle_text(rep: &OracleReport) -> String {
    let mut out = format!(
        "chibar: {}\nchi: {}\nattaining sigma: {}\n",
        rep.chibar,
        rats(&rep.chi),
        min_policy(&rep.attaining_sigma)
    );
    out.push_str(&format!("witnesses: {}\n", rep.witnesses.len()));
    for w in &rep.witnesses {
        out.push_str(&format!(
            "  tau {} class {:?} measure {} value {}\n",
            max_policy(&w.tau),
            w.final_class,
            rats(&w.measure),
            w.value
        ));
    }
    out
}

#[derive(Serialize)]
pub struct CheckOutcome {
    pub ok: bool,
    /// First (0-based) state with `T_i(u) ≠ λ + u_i`.
    pub coordinate: Option<usize>,
    pub t_u: Option<Rat>,
    pub lambda_plus_u: Option<Rat>,
}

impl CheckOutcome {
    pub fn ok() -> Self {
        CheckOutcome {
            ok: true,
            coordinate: None,
            t_u: None,
            lambda_plus_u: None,
        }
    }

    pub fn violated(i: usize, t_u: Rat, lambda_plus_u: Rat) -> Self {
        CheckOutcome {
            ok: false,
            coordinate: Some(i),
            t_u: Some(t_u),
            lambda_plus_u: Some(lambda_plus_u),
        }
    }

    pub fn to_text(&self) -> String {
        match (self.coordinate, &self.t_u, &self.lambda_plus_u) {
            (Some(i), Some(t), Some(rhs)) => {
                format!("violated at coordinate {i}: T_i(u) = {t}, lambda + u_i = {rhs}\n")
            }
            _ => "ok\n".into(),
        }
    }
}

fn rats(v: &[Rat]) -> String {
    let parts: Vec<String> = v.iter().map(Rat::to_string).collect();
    format!("({})", parts.join(", "))
}

fn min_policy(s: &MinPolicy) -> String {
    let parts: Vec<String> = s.as_slice().iter().map(usize::to_string).collect();
    format!("[{}]", parts.join(","))
}

fn max_policy(t: &MaxPolicy) -> String {
    let states: Vec<String> = t
        .as_slice()
        .iter()
        .map(|row| {
            let parts: Vec<String> = row.iter().map(usize::to_string).collect();
            format!("[{}]", parts.join(","))
        })
        .collect();
    format!("[{}]", states.join(","))
}

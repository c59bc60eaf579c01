//! Exact analysis of a fixed-policy Markov reward chain: communication
//! classes, final classes, invariant measures, gain and bias.

use crate::error::{Error, Result};
use crate::numeric::{dot, solve_linear, Rat, RatMatrix};

/// Stochastic matrix `P` with reward vector `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    pub p: RatMatrix,
    pub r: Vec<Rat>,
}

impl Chain {
    pub fn new(p: RatMatrix, r: Vec<Rat>) -> Result<Self> {
        let n = p.rows();
        if p.cols() != n || r.len() != n {
            return Err(Error::InvariantViolation(
                "chain needs a square matrix and a reward per state".into(),
            ));
        }
        for i in 0..n {
            let row = p.row(i);
            if row.iter().any(Rat::is_negative) || row.iter().sum::<Rat>() != Rat::one() {
                return Err(Error::InvariantViolation(format!(
                    "row {i} of the chain is not a probability vector"
                )));
            }
        }
        Ok(Chain { p, r })
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }
}

/// Partition of the states into communication classes.
///
/// Classes are numbered by their least state and each class lists its
/// states in increasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classes {
    pub classes: Vec<Vec<usize>>,
    pub final_flags: Vec<bool>,
    pub class_of: Vec<usize>,
}

impl Classes {
    pub fn final_classes(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.classes
            .iter()
            .zip(&self.final_flags)
            .filter(|(_, f)| **f)
            .map(|(c, _)| c)
    }
}

/// Strongly connected components of the positive-entry digraph of `p`,
/// with a class marked final when no arc leaves it.
pub fn communication_classes(p: &RatMatrix) -> Classes {
    let n = p.rows();
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| p[(i, j)].is_positive()).collect())
        .collect();

    let mut tarjan = Tarjan {
        succ: &succ,
        index: vec![usize::MAX; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if tarjan.index[v] == usize::MAX {
            tarjan.visit(v);
        }
    }
    let mut classes = tarjan.out;
    for c in &mut classes {
        c.sort_unstable();
    }
    classes.sort_unstable_by_key(|c| c[0]);

    let mut class_of = vec![0; n];
    for (k, c) in classes.iter().enumerate() {
        for &v in c {
            class_of[v] = k;
        }
    }
    let final_flags = classes
        .iter()
        .enumerate()
        .map(|(k, c)| c.iter().all(|&v| succ[v].iter().all(|&w| class_of[w] == k)))
        .collect();
    Classes {
        classes,
        final_flags,
        class_of,
    }
}

struct Tarjan<'a> {
    succ: &'a [Vec<usize>],
    index: Vec<usize>,
    low: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    next: usize,
    out: Vec<Vec<usize>>,
}

impl Tarjan<'_> {
    fn visit(&mut self, v: usize) {
        self.index[v] = self.next;
        self.low[v] = self.next;
        self.next += 1;
        self.stack.push(v);
        self.on_stack[v] = true;
        for k in 0..self.succ[v].len() {
            let w = self.succ[v][k];
            if self.index[w] == usize::MAX {
                self.visit(w);
                self.low[v] = self.low[v].min(self.low[w]);
            } else if self.on_stack[w] {
                self.low[v] = self.low[v].min(self.index[w]);
            }
        }
        if self.low[v] == self.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = self.stack.pop().expect("stack holds the component");
                self.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            self.out.push(comp);
        }
    }
}

/// The invariant probability measure supported on the final class `class`.
///
/// Solves `(I − Pᵀ) m = 0, eᵀ m = 1` restricted to the class, with the last
/// balance equation replaced by the normalization.
pub fn invariant_measure(p: &RatMatrix, class: &[usize]) -> Result<Vec<Rat>> {
    let k = class.len();
    if k == 0 {
        return Err(Error::InvariantViolation("empty class".into()));
    }
    let mut a = RatMatrix::zeros(k, k);
    let mut b = vec![Rat::zero(); k];
    for (row, &j) in class.iter().enumerate().take(k - 1) {
        for (col, &i) in class.iter().enumerate() {
            let delta = if i == j { Rat::one() } else { Rat::zero() };
            a[(row, col)] = delta - &p[(i, j)];
        }
    }
    for col in 0..k {
        a[(k - 1, col)] = Rat::one();
    }
    b[k - 1] = Rat::one();
    let local = solve_linear(&a, &b)?;
    let mut m = vec![Rat::zero(); p.rows()];
    for (&i, v) in class.iter().zip(local) {
        m[i] = v;
    }
    Ok(m)
}

/// Which state of each final class gets bias 0.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Pin {
    #[default]
    Least,
    Greatest,
}

/// Classes, invariant measures, gain and bias of a chain.
///
/// `final_classes[k]`, `measures[k]` and `pin_states[k]` describe the `k`-th
/// final class (in class-number order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainAnalysis {
    pub classes: Vec<Vec<usize>>,
    pub final_flags: Vec<bool>,
    pub final_classes: Vec<Vec<usize>>,
    pub measures: Vec<Vec<Rat>>,
    pub gain: Vec<Rat>,
    pub bias: Vec<Rat>,
    pub pin_states: Vec<usize>,
}

/// Final classes with their measures and `⟨m, r⟩` values, plus the gain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GainAnalysis {
    pub classes: Classes,
    pub final_classes: Vec<Vec<usize>>,
    pub measures: Vec<Vec<Rat>>,
    pub values: Vec<Rat>,
    pub gain: Vec<Rat>,
}

/// Gain of the chain: `⟨m_c, r⟩` on each final class `c`, and on transient
/// states the solution of `χ_T = P_TT χ_T + P_TF χ_F`.
pub fn gain(ch: &Chain) -> Result<GainAnalysis> {
    let n = ch.n();
    let classes = communication_classes(&ch.p);
    let final_classes: Vec<Vec<usize>> = classes.final_classes().cloned().collect();
    let measures = final_classes
        .iter()
        .map(|c| invariant_measure(&ch.p, c))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<Rat> = measures.iter().map(|m| dot(m, &ch.r)).collect();

    let mut gain = vec![Rat::zero(); n];
    let mut recurrent = vec![false; n];
    for (c, v) in final_classes.iter().zip(&values) {
        for &i in c {
            gain[i] = v.clone();
            recurrent[i] = true;
        }
    }
    let transient: Vec<usize> = (0..n).filter(|&i| !recurrent[i]).collect();
    if !transient.is_empty() {
        let rhs: Vec<Rat> = transient
            .iter()
            .map(|&i| {
                (0..n)
                    .filter(|&j| recurrent[j])
                    .map(|j| &ch.p[(i, j)] * &gain[j])
                    .sum()
            })
            .collect();
        let sol = solve_linear(&transient_block(&ch.p, &transient), &rhs)?;
        for (&i, v) in transient.iter().zip(sol) {
            gain[i] = v;
        }
    }
    Ok(GainAnalysis {
        classes,
        final_classes,
        measures,
        values,
        gain,
    })
}

/// `I − P_TT` on the given transient states.
fn transient_block(p: &RatMatrix, transient: &[usize]) -> RatMatrix {
    let t = transient.len();
    let mut a = RatMatrix::zeros(t, t);
    for (r, &i) in transient.iter().enumerate() {
        for (c, &j) in transient.iter().enumerate() {
            let delta = if i == j { Rat::one() } else { Rat::zero() };
            a[(r, c)] = delta - &p[(i, j)];
        }
    }
    a
}

pub fn gain_bias(ch: &Chain) -> Result<ChainAnalysis> {
    gain_bias_with(ch, Pin::Least)
}

/// Gain and bias with `bias = 0` at the pinned state of every final class,
/// verified against `χ = Pχ` and `χ + h = r + Ph`.
pub fn gain_bias_with(ch: &Chain, pin: Pin) -> Result<ChainAnalysis> {
    let n = ch.n();
    let ga = gain(ch)?;
    let excess: Vec<Rat> = (0..n).map(|i| &ch.r[i] - &ga.gain[i]).collect();
    let mut bias = vec![Rat::zero(); n];
    let mut recurrent = vec![false; n];
    let mut pin_states = Vec::with_capacity(ga.final_classes.len());

    for c in &ga.final_classes {
        let pin_state = match pin {
            Pin::Least => c[0],
            Pin::Greatest => *c.last().expect("classes are nonempty"),
        };
        pin_states.push(pin_state);
        let k = c.len();
        let mut a = RatMatrix::zeros(k, k);
        let mut b = vec![Rat::zero(); k];
        for (row, &i) in c.iter().enumerate() {
            if i == pin_state {
                a[(row, row)] = Rat::one();
                continue;
            }
            for (col, &j) in c.iter().enumerate() {
                let delta = if i == j { Rat::one() } else { Rat::zero() };
                a[(row, col)] = delta - &ch.p[(i, j)];
            }
            b[row] = excess[i].clone();
        }
        let sol = solve_linear(&a, &b)?;
        for (&i, v) in c.iter().zip(sol) {
            bias[i] = v;
            recurrent[i] = true;
        }
    }

    let transient: Vec<usize> = (0..n).filter(|&i| !recurrent[i]).collect();
    if !transient.is_empty() {
        let rhs: Vec<Rat> = transient
            .iter()
            .map(|&i| {
                let inflow: Rat = (0..n)
                    .filter(|&j| recurrent[j])
                    .map(|j| &ch.p[(i, j)] * &bias[j])
                    .sum();
                &excess[i] + inflow
            })
            .collect();
        let sol = solve_linear(&transient_block(&ch.p, &transient), &rhs)?;
        for (&i, v) in transient.iter().zip(sol) {
            bias[i] = v;
        }
    }

    let analysis = ChainAnalysis {
        classes: ga.classes.classes,
        final_flags: ga.classes.final_flags,
        final_classes: ga.final_classes,
        measures: ga.measures,
        gain: ga.gain,
        bias,
        pin_states,
    };
    verify(ch, &analysis)?;
    Ok(analysis)
}

fn verify(ch: &Chain, a: &ChainAnalysis) -> Result<()> {
    if ch.p.mul_vec(&a.gain) != a.gain {
        return Err(Error::Internal("gain is not harmonic".into()));
    }
    let ph = ch.p.mul_vec(&a.bias);
    for (i, pb) in ph.iter().enumerate() {
        if &a.gain[i] + &a.bias[i] != &ch.r[i] + pb {
            return Err(Error::Internal(format!(
                "Poisson equation fails at state {i}"
            )));
        }
    }
    for (c, m) in a.final_classes.iter().zip(&a.measures) {
        if ch.p.vec_mul(m) != *m || m.iter().sum::<Rat>() != Rat::one() {
            return Err(Error::Internal("invariant measure check failed".into()));
        }
        let support: Vec<usize> = (0..ch.n()).filter(|&i| m[i].is_positive()).collect();
        if &support != c || m.iter().any(Rat::is_negative) {
            return Err(Error::Internal("invariant measure support mismatch".into()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn mat(rows: &[&[&str]]) -> RatMatrix {
        RatMatrix::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|s| r(s)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn chain(rows: &[&[&str]], rew: &[&str]) -> Chain {
        Chain::new(mat(rows), rew.iter().map(|s| r(s)).collect()).unwrap()
    }

    #[test]
    fn absorbing_state_classes() {
        let c = communication_classes(&mat(&[&["1", "0"], &["1/2", "1/2"]]));
        assert_eq!(c.classes, vec![vec![0], vec![1]]);
        assert_eq!(c.final_flags, vec![true, false]);
    }

    #[test]
    fn irreducible_classes() {
        for rows in [[["1/2", "1/2"], ["1/2", "1/2"]], [["0", "1"], ["1", "0"]]] {
            let rows: Vec<&[&str]> = rows.iter().map(|r| &r[..]).collect();
            let c = communication_classes(&mat(&rows));
            assert_eq!(c.classes, vec![vec![0, 1]]);
            assert_eq!(c.final_flags, vec![true]);
        }
    }

    #[test]
    fn measures_of_small_chains() {
        let p = mat(&[&["1", "0"], &["1/2", "1/2"]]);
        assert_eq!(invariant_measure(&p, &[0]).unwrap(), vec![r("1"), r("0")]);
        let p = mat(&[&["1/2", "1/2"], &["1/2", "1/2"]]);
        assert_eq!(
            invariant_measure(&p, &[0, 1]).unwrap(),
            vec![r("1/2"), r("1/2")]
        );
        let p = mat(&[&["0", "1"], &["1", "0"]]);
        assert_eq!(
            invariant_measure(&p, &[0, 1]).unwrap(),
            vec![r("1/2"), r("1/2")]
        );
    }

    #[test]
    fn decoupled_loops() {
        let a = gain_bias(&chain(&[&["1", "0"], &["0", "1"]], &["1", "2"])).unwrap();
        assert_eq!(a.gain, vec![r("1"), r("2")]);
        assert_eq!(a.bias, vec![r("0"), r("0")]);
    }

    #[test]
    fn two_cycle_gain_and_bias() {
        let a = gain_bias(&chain(&[&["0", "1"], &["1", "0"]], &["2", "-1"])).unwrap();
        assert_eq!(a.gain, vec![r("1/2"), r("1/2")]);
        assert_eq!(a.bias, vec![r("0"), r("-3/2")]);
        assert_eq!(a.pin_states, vec![0]);
    }

    #[test]
    fn transient_state_bias() {
        let a = gain_bias(&chain(&[&["0", "1"], &["0", "1"]], &["1", "0"])).unwrap();
        assert_eq!(a.gain, vec![r("0"), r("0")]);
        assert_eq!(a.bias, vec![r("1"), r("0")]);
        assert_eq!(a.pin_states, vec![1]);
    }

    #[test]
    fn pin_choice_shifts_bias_only() {
        let ch = chain(&[&["0", "1"], &["1", "0"]], &["2", "-1"]);
        let lo = gain_bias_with(&ch, Pin::Least).unwrap();
        let hi = gain_bias_with(&ch, Pin::Greatest).unwrap();
        assert_eq!(lo.gain, hi.gain);
        assert_eq!(hi.bias, vec![r("3/2"), r("0")]);
    }

    #[test]
    fn non_stochastic_chain_rejected() {
        assert!(Chain::new(mat(&[&["1/2"]]), vec![r("0")]).is_err());
    }
}

use serde::Serialize;

use super::Event;
use crate::cbn::{query_ve, Assignment, Backend, CausalBayesianNetwork};
use crate::error::{Error, Result};
use crate::intervention::interventional_query;

/// Closed interval `[lo, hi]` within `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, value: f64, tolerance: f64) -> bool {
        self.lo - tolerance <= value && value <= self.hi + tolerance
    }
}

// Rounding slack below which an inverted interval is treated as a point.
const INVERSION_SLACK: f64 = 1e-12;

/// Bounds on the probability of necessity of `cause` for `outcome`:
///
/// ```text
/// lo = max(0, (P(y) − P(y | do(x'))) / P(x, y))
/// hi = min(1, (P(y' | do(x')) − P(x', y')) / P(x, y))
/// ```
///
/// `x'` is every other state of the cause. When the cause has more than two
/// states, `do(x')` is the mixture of `do(x_i)` over those states weighted by
/// `P(x_i | X ≠ x)`, or uniformly if `P(X ≠ x) = 0`. `y'` is every other
/// state of the outcome.
pub fn pn_bounds(model: &CausalBayesianNetwork, cause: &Event, outcome: &Event) -> Result<Interval> {
    if cause.variable == outcome.variable {
        return Err(Error::OverlappingQuery(cause.variable.clone()));
    }
    let xv = model.index_of(&cause.variable)?;
    let x = model.state_index(xv, &cause.state)?;
    let yv = model.index_of(&outcome.variable)?;
    let y = model.state_index(yv, &outcome.state)?;

    let joint = query_ve(model, &[&cause.variable, &outcome.variable], &Assignment::new())?;
    let (cx, cy) = (model.variable(xv).cardinality(), model.variable(yv).cardinality());
    let p = |i: usize, j: usize| joint.probabilities()[i * cy + j];

    let p_xy = p(x, y);
    if p_xy == 0.0 {
        return Err(Error::ZeroJointProbability);
    }
    let p_y: f64 = (0..cx).map(|i| p(i, y)).sum();
    let others: Vec<usize> = (0..cx).filter(|&i| i != x).collect();
    let p_not_x_not_y: f64 = others
        .iter()
        .flat_map(|&i| (0..cy).filter(move |&j| j != y).map(move |j| (i, j)))
        .map(|(i, j)| p(i, j))
        .sum();

    let marginal: Vec<f64> = others.iter().map(|&i| (0..cy).map(|j| p(i, j)).sum()).collect();
    let mass: f64 = marginal.iter().sum();
    let mut p_y_do_other = 0.0;
    for (k, &i) in others.iter().enumerate() {
        let weight = if mass > 0.0 {
            marginal[k] / mass
        } else {
            1.0 / others.len() as f64
        };
        let do_set = Assignment::new().with(cause.variable.clone(), model.variable(xv).states[i].clone());
        let d = interventional_query(model, &[&outcome.variable], &do_set, &Assignment::new(), Backend::default())?;
        p_y_do_other += weight * d.probabilities()[y];
    }

    let lo = ((p_y - p_y_do_other) / p_xy).clamp(0.0, 1.0);
    let hi = ((1.0 - p_y_do_other - p_not_x_not_y) / p_xy).clamp(0.0, 1.0);
    if lo > hi {
        if lo - hi <= INVERSION_SLACK {
            return Ok(Interval { lo: hi, hi });
        }
        return Err(Error::InconsistentBounds { lo, hi });
    }
    Ok(Interval { lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbn::Variable;

    fn ev(v: &str, s: &str) -> Event {
        Event {
            variable: v.into(),
            state: s.into(),
        }
    }

    #[test]
    fn independent_cause_admits_zero() {
        let m = CausalBayesianNetwork::from_parts(vec![
            (Variable::binary("X"), vec![vec![0.5, 0.5]]),
            (Variable::binary("Y"), vec![vec![0.3, 0.7]]),
        ])
        .unwrap();
        let b = pn_bounds(&m, &ev("X", "true"), &ev("Y", "true")).unwrap();
        assert!(b.contains(0.0, 0.0));
    }

    #[test]
    fn identity_mechanism_is_fully_necessary() {
        let m = CausalBayesianNetwork::from_parts(vec![
            (Variable::binary("X"), vec![vec![0.4, 0.6]]),
            (
                Variable::binary("Y").with_parents(["X"]),
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            ),
        ])
        .unwrap();
        let b = pn_bounds(&m, &ev("X", "true"), &ev("Y", "true")).unwrap();
        assert_eq!(b, Interval { lo: 1.0, hi: 1.0 });
    }

    #[test]
    fn zero_joint() {
        let m = CausalBayesianNetwork::from_parts(vec![
            (Variable::binary("X"), vec![vec![1.0, 0.0]]),
            (Variable::binary("Y"), vec![vec![0.3, 0.7]]),
        ])
        .unwrap();
        assert_eq!(
            pn_bounds(&m, &ev("X", "true"), &ev("Y", "true")),
            Err(Error::ZeroJointProbability)
        );
    }
}

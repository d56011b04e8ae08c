//! Maximum goal-place yield by bisection over at-least reachability.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::firing_set::max_fs;
use crate::lp::{self, LinearProgram, LpOutcome, Relation, Sense};
use crate::net::{Cpn, Marking, Parikh, TransitionSet};
use crate::rational::{ExtendedRational, Rational};
use crate::reach::{at_least_reachable, ReachOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Finite,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YieldStatus {
    /// A certified maximum (up to the search precision for bisection).
    Optimal,
    /// The goal mass can be made arbitrarily large.
    Unbounded,
    /// The MILP exclusion budget ran out before a fireable support was found.
    BudgetExhausted,
    /// Every candidate support has been excluded.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YieldResult {
    /// Largest certified goal mass.
    pub value: Rational,
    pub parikh: Option<Parikh>,
    pub support: TransitionSet,
    /// Calls to at-least reachability (bisection) or MILP solves.
    pub queries: usize,
    /// Exclusion cuts added (MILP only).
    pub cuts: usize,
    /// Supports excluded because they failed the firing-set check.
    pub excluded: Vec<TransitionSet>,
    pub bound_status: BoundStatus,
    pub status: YieldStatus,
    /// Upper bound used to bracket the search.
    pub upper_bound: ExtendedRational,
}

/// Default search precision, `1/1000`.
pub fn default_epsilon() -> Rational {
    Rational::new(1, 1000)
}

/// LP relaxation bound on the goal mass: maximise `m0(g) + (C v)(g)` over
/// `v >= 0` with `m0 + C v >= 0`, ignoring causality.
pub fn yield_upper_bound(net: &Cpn, m0: &Marking, goal: usize) -> Result<ExtendedRational> {
    let all: TransitionSet = (0..net.num_transitions()).collect();
    upper_bound_over(net, m0, goal, &all)
}

/// [`yield_upper_bound`] with only the transitions of `allowed` available.
pub fn upper_bound_over(net: &Cpn, m0: &Marking, goal: usize, allowed: &TransitionSet) -> Result<ExtendedRational> {
    net.places()
        .get(goal)
        .ok_or_else(|| crate::CpnError::UnknownPlace(format!("#{goal}")))?;
    let cols: Vec<usize> = allowed.iter().copied().collect();
    let mut lp = LinearProgram::new(cols.len(), Sense::Maximize);
    let mut rows = vec![vec![Rational::zero(); cols.len()]; net.num_places()];
    for (k, &t) in cols.iter().enumerate() {
        for (p, c) in net.incidence_column(t) {
            rows[p][k] = Rational::from_integer(c);
        }
    }
    let objective = rows[goal].clone();
    for (p, row) in rows.into_iter().enumerate() {
        if row.iter().any(|x| !x.is_zero()) {
            lp.add_constraint(row, Relation::Ge, -m0.get(p));
        }
    }
    lp.set_objective(objective);
    Ok(match lp::solve(&lp)? {
        LpOutcome::Optimal { value, .. } => ExtendedRational::Finite(m0.get(goal) + &value),
        LpOutcome::Unbounded { .. } => ExtendedRational::Infinity,
        LpOutcome::Infeasible => unreachable!("v = 0 is always feasible"),
    })
}

/// Bound on the causally sound yield: the LP bound over the maximal firing
/// set only, since every reachable marking is produced by transitions of it.
pub fn causal_upper_bound(net: &Cpn, m0: &Marking, goal: usize) -> Result<ExtendedRational> {
    let fs = max_fs(net, m0)?;
    upper_bound_over(net, m0, goal, &fs)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BisectOptions {
    pub epsilon: Rational,
    pub reach: ReachOptions,
}

impl Default for BisectOptions {
    fn default() -> Self {
        BisectOptions {
            epsilon: default_epsilon(),
            reach: ReachOptions::default(),
        }
    }
}

/// Maximises the mass on `goal` by bisection on `[m0(goal), bound]`.
///
/// Returns the largest probed value that at-least reachability confirmed,
/// with its Parikh certificate. When the bound itself is confirmed it is
/// returned exactly.
pub fn max_yield_binsearch(net: &Cpn, m0: &Marking, goal: usize, opts: &BisectOptions) -> Result<YieldResult> {
    if !opts.epsilon.is_positive() {
        return Err(crate::CpnError::Input(format!(
            "epsilon must be positive, got {}",
            opts.epsilon
        )));
    }
    let mut lo = m0.get(goal).clone();
    let bound = causal_upper_bound(net, m0, goal)?;
    let mut result = YieldResult {
        value: lo.clone(),
        parikh: Some(Parikh::zeros(net.num_transitions())),
        support: TransitionSet::new(),
        queries: 0,
        cuts: 0,
        excluded: Vec::new(),
        bound_status: BoundStatus::Finite,
        status: YieldStatus::Optimal,
        upper_bound: bound.clone(),
    };
    let mut hi = match bound {
        ExtendedRational::Infinity => {
            result.bound_status = BoundStatus::Unbounded;
            result.status = YieldStatus::Unbounded;
            result.parikh = None;
            return Ok(result);
        }
        ExtendedRational::Finite(b) => b,
    };
    if hi <= lo {
        return Ok(result);
    }

    let probe = |x: &Rational, result: &mut YieldResult| -> Result<bool> {
        let mut goal_mass = vec![Rational::zero(); net.num_places()];
        goal_mass[goal] = x.clone();
        result.queries += 1;
        let res = at_least_reachable(net, m0, &Marking::new(goal_mass)?, opts.reach)?;
        if res.reachable {
            result.value = x.clone();
            result.support = res.support;
            result.parikh = res.parikh;
        }
        Ok(res.reachable)
    };

    if probe(&hi, &mut result)? {
        return Ok(result);
    }
    let two = Rational::from_integer(2);
    while &hi - &lo > opts.epsilon {
        let mid = (&lo + &hi) / &two;
        if probe(&mid, &mut result)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    debug_assert_eq!(result.value, lo);
    Ok(result)
}

/// Worst-case number of bisection queries for a bracket of width `range`:
/// `ceil(log2(range / epsilon)) + 2`.
pub fn query_budget(range: &Rational, epsilon: &Rational) -> usize {
    if !range.is_positive() {
        return 2;
    }
    let mut steps = 0usize;
    let mut width = range.clone();
    let two = Rational::from_integer(2);
    while width > *epsilon {
        width = &width / &two;
        steps += 1;
    }
    steps + 2
}

//! Yield maximisation by mixed-integer programming with firing-set
//! exclusion cuts.
//!
//! Every transition `t` gets a continuous flow `v_t >= 0` and a boolean
//! `b_t` marking it as used. The MILP maximises the mass produced on the
//! goal place subject to a nonnegative final marking; its solution support
//! is then checked for causal soundness with the firing-set test. Supports
//! that fail the test are cut off with
//!
//! ```text
//! sum_{t in S} b_t - sum_{t not in S} b_t <= |S| - 1
//! ```
//!
//! which removes exactly the boolean assignment `b = 1_S`, and the MILP is
//! solved again.

use std::collections::BTreeSet;

use log::{debug, warn};

use crate::error::{CpnError, Result};
use crate::firing_set::{fireable, saturate};
use crate::lp::{self, LinearProgram, LpOutcome, Relation, Sense, Simplex};
use crate::net::{support_of, Cpn, Marking, Parikh, TransitionSet};
use crate::rational::{ExtendedRational, Rational};
use crate::yield_search::{causal_upper_bound, BoundStatus, YieldResult, YieldStatus};

/// A linear program whose `integral` variables are restricted to `{0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MilpProblem {
    pub lp: LinearProgram,
    pub integral: BTreeSet<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BranchStats {
    pub nodes: usize,
    pub lp_solves: usize,
}

/// Exact branch-and-bound over boolean variables.
pub fn solve_milp(problem: &MilpProblem) -> Result<LpOutcome> {
    Ok(solve_milp_with_stats(problem)?.0)
}

pub fn solve_milp_with_stats(problem: &MilpProblem) -> Result<(LpOutcome, BranchStats)> {
    let lp = &problem.lp;
    lp.validate()?;
    if let Some(&bad) = problem.integral.iter().find(|&&j| j >= lp.num_vars) {
        return Err(CpnError::Dimension {
            expected: lp.num_vars,
            actual: bad + 1,
        });
    }
    let minimize = lp.sense == Sense::Minimize;
    let mut base = lp.clone();
    if minimize {
        base.objective = lp.objective.iter().map(|c| -c).collect();
    }
    base.sense = if lp.sense == Sense::Feasibility {
        Sense::Feasibility
    } else {
        Sense::Maximize
    };
    for &j in &problem.integral {
        let lo = base.lower[j]
            .clone()
            .map_or(Rational::zero(), |l| l.max(Rational::zero()))
            .ceil();
        let hi = base.upper[j]
            .clone()
            .map_or(Rational::one(), |u| u.min(Rational::one()))
            .floor();
        if lo > hi {
            return Ok((LpOutcome::Infeasible, BranchStats::default()));
        }
        base.lower[j] = Some(lo);
        base.upper[j] = Some(hi);
    }
    // With an integer objective over booleans only, bounds can be rounded down.
    let integral_objective = base
        .objective
        .iter()
        .enumerate()
        .all(|(j, c)| c.is_zero() || (problem.integral.contains(&j) && c.is_integer()));

    let mut stats = BranchStats::default();
    let mut incumbent: Option<(Vec<Rational>, Rational)> = None;
    let mut stack: Vec<Vec<(usize, Rational)>> = vec![Vec::new()];

    while let Some(fixings) = stack.pop() {
        stats.nodes += 1;
        let mut node = base.clone();
        for (j, v) in &fixings {
            node.lower[*j] = Some(v.clone());
            node.upper[*j] = Some(v.clone());
        }
        stats.lp_solves += 1;
        let (point, value) = match lp::solve(&node)? {
            LpOutcome::Infeasible => continue,
            LpOutcome::Unbounded { point, ray } => {
                return Ok((LpOutcome::Unbounded { point, ray }, stats));
            }
            LpOutcome::Optimal { point, value } => (point, value),
        };
        let bound = if integral_objective {
            value.floor()
        } else {
            value.clone()
        };
        if incumbent.as_ref().is_some_and(|(_, best)| bound <= *best) {
            continue;
        }
        let half = Rational::new(1, 2);
        let fractional = problem
            .integral
            .iter()
            .filter(|&&j| !point[j].is_integer())
            .min_by_key(|&&j| (&point[j] - &half).abs())
            .copied();
        let Some(j) = fractional else {
            if lp.sense == Sense::Feasibility {
                return Ok((LpOutcome::Optimal { point, value }, stats));
            }
            incumbent = Some((point, value));
            continue;
        };

        // Rounding every fractional boolean up often gives a feasible
        // assignment right away.
        if fixings.is_empty() || stats.nodes % 16 == 0 {
            let mut rounded = base.clone();
            for &i in &problem.integral {
                let v = point[i].ceil();
                rounded.lower[i] = Some(v.clone());
                rounded.upper[i] = Some(v);
            }
            stats.lp_solves += 1;
            if let LpOutcome::Optimal { point: p, value: v } = lp::solve(&rounded)? {
                if incumbent.as_ref().is_none_or(|(_, best)| v > *best) {
                    incumbent = Some((p, v));
                }
            }
            if incumbent.as_ref().is_some_and(|(_, best)| bound <= *best) {
                continue;
            }
        }

        let (near, far) = if point[j] >= half {
            (Rational::one(), Rational::zero())
        } else {
            (Rational::zero(), Rational::one())
        };
        let mut far_fix = fixings.clone();
        far_fix.push((j, far));
        stack.push(far_fix);
        let mut near_fix = fixings;
        near_fix.push((j, near));
        stack.push(near_fix);
    }

    Ok(match incumbent {
        None => (LpOutcome::Infeasible, stats),
        Some((point, value)) => {
            let value = if minimize { -value } else { value };
            (LpOutcome::Optimal { point, value }, stats)
        }
    })
}

/// Removes the boolean assignment whose support is exactly
/// `excluded_support`; strict subsets and supersets stay feasible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExclusionCut {
    pub excluded_support: TransitionSet,
}

impl ExclusionCut {
    pub fn new(excluded_support: TransitionSet) -> Self {
        ExclusionCut { excluded_support }
    }

    /// Adds the cut over booleans `offset..offset + n` of `lp`.
    pub fn add_to(&self, lp: &mut LinearProgram, offset: usize, n: usize) {
        let mut row = vec![Rational::zero(); lp.num_vars];
        for t in 0..n {
            row[offset + t] = if self.excluded_support.contains(&t) {
                Rational::one()
            } else {
                -Rational::one()
            };
        }
        lp.add_constraint(
            row,
            Relation::Le,
            Rational::from(self.excluded_support.len()) - Rational::one(),
        );
    }

    /// Whether the 0/1 assignment `b` satisfies the cut.
    pub fn admits(&self, b: &[bool]) -> bool {
        let support: TransitionSet = (0..b.len()).filter(|&t| b[t]).collect();
        support != self.excluded_support
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MilpStrategy {
    /// Maximise the yield, then minimise the number of used transitions
    /// among yield-optimal solutions.
    Lexicographic,
    /// Single objective `c * yield - sum b`; `None` picks
    /// `c = |T| * (bound + 1)`.
    BigM(Option<Rational>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MilpMaxOptions {
    /// Maximum number of exclusion cuts before giving up.
    pub cap: usize,
    pub strategy: MilpStrategy,
    /// Smallest flow a used transition must carry (`v_t >= min_flow * b_t`).
    pub min_flow: Rational,
    /// Flow bound for transitions whose LP flow is unbounded.
    pub flow_ceiling: Rational,
    /// Additionally require the support to be a firing set of the reverse
    /// net from the reached marking.
    pub strict_finite: bool,
}

impl Default for MilpMaxOptions {
    fn default() -> Self {
        MilpMaxOptions {
            cap: 400,
            strategy: MilpStrategy::Lexicographic,
            min_flow: Rational::new(1, 1_000_000),
            flow_ceiling: Rational::from_integer(1_000_000),
            strict_finite: false,
        }
    }
}

/// Result of [`enumerate_solutions`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    /// Solutions in non-increasing order of yield.
    pub solutions: Vec<YieldResult>,
    pub cuts: usize,
    pub budget_exhausted: bool,
}

/// Maximises the causally sound mass on `goal`.
pub fn milp_max(net: &Cpn, m0: &Marking, goal: usize, opts: &MilpMaxOptions) -> Result<YieldResult> {
    let mut search = ExclusionSearch::new(net, m0, goal, opts)?;
    search.next_solution()
}

/// The first `n` solutions with pairwise different supports.
pub fn enumerate_solutions(
    net: &Cpn,
    m0: &Marking,
    goal: usize,
    n: usize,
    opts: &MilpMaxOptions,
) -> Result<Enumeration> {
    if n == 0 {
        return Err(CpnError::Input("n must be at least 1".into()));
    }
    let mut search = ExclusionSearch::new(net, m0, goal, opts)?;
    let mut solutions = Vec::new();
    let mut budget_exhausted = false;
    while solutions.len() < n {
        let res = search.next_solution()?;
        match res.status {
            YieldStatus::Optimal => {
                search.exclude(res.support.clone());
                solutions.push(res);
            }
            YieldStatus::Unbounded => {
                solutions.push(res);
                break;
            }
            YieldStatus::BudgetExhausted => {
                budget_exhausted = true;
                break;
            }
            YieldStatus::Infeasible => break,
        }
    }
    solutions.sort_by(|a, b| b.value.cmp(&a.value));
    Ok(Enumeration {
        solutions,
        cuts: search.cuts,
        budget_exhausted,
    })
}

struct ExclusionSearch<'a> {
    net: &'a Cpn,
    m0: &'a Marking,
    goal: usize,
    opts: &'a MilpMaxOptions,
    bound: ExtendedRational,
    /// Transitions that carry the MILP columns, after presolve.
    active: Vec<usize>,
    flow_bounds: Vec<Rational>,
    excluded: Vec<TransitionSet>,
    /// Excluded for failing the firing-set check.
    rejected: Vec<TransitionSet>,
    cuts: usize,
    queries: usize,
}

impl<'a> ExclusionSearch<'a> {
    fn new(net: &'a Cpn, m0: &'a Marking, goal: usize, opts: &'a MilpMaxOptions) -> Result<Self> {
        if goal >= net.num_places() {
            return Err(CpnError::UnknownPlace(format!("#{goal}")));
        }
        if opts.cap == 0 {
            return Err(CpnError::Input("exclusion cap must be at least 1".into()));
        }
        if !opts.min_flow.is_positive() {
            return Err(CpnError::Input("min_flow must be positive".into()));
        }
        let bound = causal_upper_bound(net, m0, goal)?;
        let (active, flow_bounds) = if bound.is_infinite() {
            (Vec::new(), Vec::new())
        } else {
            let mut active = lp_live(net, m0);
            if !opts.strict_finite {
                active = goal_cone(net, goal, &active);
            }
            let active: Vec<usize> = active.into_iter().collect();
            let bounds = flow_bounds_over(net, m0, &active, &opts.flow_ceiling)?;
            (active, bounds)
        };
        Ok(ExclusionSearch {
            net,
            m0,
            goal,
            opts,
            bound,
            active,
            flow_bounds,
            excluded: Vec::new(),
            rejected: Vec::new(),
            cuts: 0,
            queries: 0,
        })
    }

    fn exclude(&mut self, support: TransitionSet) {
        self.excluded.push(support);
    }

    fn result(&self, status: YieldStatus) -> YieldResult {
        YieldResult {
            value: self.m0.get(self.goal).clone(),
            parikh: None,
            support: TransitionSet::new(),
            queries: self.queries,
            cuts: self.cuts,
            excluded: self.rejected.clone(),
            bound_status: if self.bound.is_infinite() {
                BoundStatus::Unbounded
            } else {
                BoundStatus::Finite
            },
            status,
            upper_bound: self.bound.clone(),
        }
    }

    fn next_solution(&mut self) -> Result<YieldResult> {
        if self.bound.is_infinite() {
            return Ok(self.result(YieldStatus::Unbounded));
        }
        loop {
            let Some(v) = self.solve_once()? else {
                return Ok(self.result(YieldStatus::Infeasible));
            };
            let support = support_of(&v);
            let parikh = Parikh::new(v)?;
            if self.is_sound(&support, &parikh)? {
                let reached = self.net.apply_parikh(self.m0, &parikh)?;
                let mut res = self.result(YieldStatus::Optimal);
                res.value = reached.get(self.goal).clone();
                res.parikh = Some(parikh);
                res.support = support;
                return Ok(res);
            }
            debug!(
                "excluding non-fireable support {:?}",
                self.net.transition_names(&support)
            );
            self.excluded.push(support.clone());
            self.rejected.push(support);
            self.cuts += 1;
            if self.cuts >= self.opts.cap {
                return Ok(self.result(YieldStatus::BudgetExhausted));
            }
        }
    }

    fn is_sound(&self, support: &TransitionSet, parikh: &Parikh) -> Result<bool> {
        if !fireable(self.net, self.m0, support)?.is_member {
            return Ok(false);
        }
        if self.opts.strict_finite {
            let reached = self.net.apply_parikh(self.m0, parikh)?;
            return Ok(saturate(self.net, reached.as_slice(), support, true).is_member);
        }
        Ok(true)
    }

    /// Builds and solves the MILP under the current exclusions; returns the
    /// flow vector, or `None` when no boolean assignment is left.
    fn solve_once(&mut self) -> Result<Option<Vec<Rational>>> {
        let net = self.net;
        let cols = &self.active;
        let n = cols.len();
        let mut lp = LinearProgram::new(2 * n, Sense::Maximize);
        let mut goal_row = vec![Rational::zero(); 2 * n];
        let mut place_rows = vec![vec![Rational::zero(); 2 * n]; net.num_places()];
        for (k, &t) in cols.iter().enumerate() {
            for (p, c) in net.incidence_column(t) {
                place_rows[p][k] = Rational::from_integer(c);
            }
        }
        goal_row[..n].clone_from_slice(&place_rows[self.goal][..n]);
        for (p, row) in place_rows.into_iter().enumerate() {
            if row.iter().any(|x| !x.is_zero()) {
                lp.add_constraint(row, Relation::Ge, -self.m0.get(p));
            }
        }
        for k in 0..n {
            let mut upper = vec![Rational::zero(); 2 * n];
            upper[k] = Rational::one();
            upper[n + k] = -&self.flow_bounds[k];
            lp.add_constraint(upper, Relation::Le, Rational::zero());
            let mut lower = vec![Rational::zero(); 2 * n];
            lower[k] = Rational::one();
            lower[n + k] = -&self.opts.min_flow;
            lp.add_constraint(lower, Relation::Ge, Rational::zero());
        }
        for s in &self.excluded {
            // Supports outside the active columns can never be produced.
            if s.iter().all(|t| cols.binary_search(t).is_ok()) {
                let local = s
                    .iter()
                    .map(|t| cols.binary_search(t).expect("checked above"))
                    .collect();
                ExclusionCut::new(local).add_to(&mut lp, n, n);
            }
        }
        let integral: BTreeSet<usize> = (n..2 * n).collect();
        let used: Vec<Rational> = (0..2 * n)
            .map(|j| if j >= n { Rational::one() } else { Rational::zero() })
            .collect();

        let point = match &self.opts.strategy {
            MilpStrategy::Lexicographic => {
                lp.set_objective(goal_row.clone());
                self.queries += 1;
                let LpOutcome::Optimal { value: best, .. } = solve_milp(&MilpProblem {
                    lp: lp.clone(),
                    integral: integral.clone(),
                })?
                else {
                    return Ok(None);
                };
                lp.add_constraint(goal_row, Relation::Ge, best);
                lp.sense = Sense::Minimize;
                lp.set_objective(used);
                self.queries += 1;
                match solve_milp(&MilpProblem { lp, integral })? {
                    LpOutcome::Optimal { point, .. } => point,
                    other => unreachable!("second stage must be feasible, got {other:?}"),
                }
            }
            MilpStrategy::BigM(weight) => {
                let c = match weight {
                    Some(c) => c.clone(),
                    None => {
                        let b = self.bound.finite().cloned().unwrap_or_else(Rational::zero);
                        Rational::from(n) * (b + Rational::one())
                    }
                };
                let objective: Vec<Rational> = goal_row.iter().zip(&used).map(|(g, u)| &c * g - u).collect();
                lp.set_objective(objective);
                self.queries += 1;
                match solve_milp(&MilpProblem { lp, integral })? {
                    LpOutcome::Optimal { point, .. } => point,
                    LpOutcome::Infeasible => return Ok(None),
                    other => unreachable!("boolean-linked flows are bounded, got {other:?}"),
                }
            }
        };
        let mut v = vec![Rational::zero(); net.num_transitions()];
        for (k, &t) in cols.iter().enumerate() {
            v[t] = point[k].clone();
        }
        Ok(Some(v))
    }
}

/// Per-transition flow bounds `max v_t` subject to `m0 + C v >= 0`;
/// unbounded flows get `ceiling`.
pub fn flow_bounds(net: &Cpn, m0: &Marking, ceiling: &Rational) -> Result<Vec<Rational>> {
    let all: Vec<usize> = (0..net.num_transitions()).collect();
    flow_bounds_over(net, m0, &all, ceiling)
}

/// [`flow_bounds`] with only the transitions `cols` available, indexed
/// like `cols`.
pub fn flow_bounds_over(net: &Cpn, m0: &Marking, cols: &[usize], ceiling: &Rational) -> Result<Vec<Rational>> {
    let n = cols.len();
    let mut lp = LinearProgram::new(n, Sense::Maximize);
    let mut rows = vec![vec![Rational::zero(); n]; net.num_places()];
    for (k, &t) in cols.iter().enumerate() {
        for (p, c) in net.incidence_column(t) {
            rows[p][k] = Rational::from_integer(c);
        }
    }
    for (p, row) in rows.into_iter().enumerate() {
        if row.iter().any(|x| !x.is_zero()) {
            lp.add_constraint(row, Relation::Ge, -m0.get(p));
        }
    }
    let simplex = Simplex::feasible(&lp)?.expect("v = 0 is feasible");
    let mut bounds = Vec::with_capacity(n);
    for (k, &t) in cols.iter().enumerate() {
        let mut objective = vec![Rational::zero(); n];
        objective[k] = Rational::one();
        bounds.push(match simplex.maximize(&objective) {
            LpOutcome::Optimal { value, .. } => value,
            _ => {
                warn!(
                    "flow through `{}` is unbounded; using ceiling {ceiling}",
                    net.transitions()[t]
                );
                ceiling.clone()
            }
        });
    }
    Ok(bounds)
}

/// Transitions that can carry flow in some solution of `m0 + C v >= 0`.
///
/// Greatest fixpoint: a transition is dead when one of its input places is
/// unmarked and only dead transitions produce on it, since then nothing
/// can ever be consumed from that place.
pub fn lp_live(net: &Cpn, m0: &Marking) -> TransitionSet {
    let mut live: TransitionSet = (0..net.num_transitions()).collect();
    loop {
        let mut supplied = vec![false; net.num_places()];
        for (p, s) in supplied.iter_mut().enumerate() {
            *s = m0.get(p).is_positive();
        }
        for &t in &live {
            for &(p, _) in net.post(t) {
                supplied[p] = true;
            }
        }
        let before = live.len();
        live.retain(|&t| net.pre(t).iter().all(|&(p, _)| supplied[p]));
        if live.len() == before {
            return live;
        }
    }
}

/// Transitions of `within` that can contribute mass to `goal`: those
/// producing on it, and recursively those producing on an input place of a
/// contributing transition.
///
/// Dropping the others from any solution keeps it feasible and keeps the
/// support fireable, because they never feed a contributing transition.
pub fn goal_cone(net: &Cpn, goal: usize, within: &TransitionSet) -> TransitionSet {
    let mut needed = vec![false; net.num_places()];
    needed[goal] = true;
    let mut cone = TransitionSet::new();
    loop {
        let grown: Vec<usize> = within
            .iter()
            .copied()
            .filter(|t| !cone.contains(t) && net.post(*t).iter().any(|&(p, _)| needed[p]))
            .collect();
        if grown.is_empty() {
            return cone;
        }
        for t in grown {
            for &(p, _) in net.pre(t) {
                needed[p] = true;
            }
            cone.insert(t);
        }
    }
}

//! Exact and at-least reachability decisions, in finite and limit modes.
//!
//! Both procedures shrink a candidate transition set `T'`. Each round solves
//! one LP per transition of `T'` asking for a solution of the state equation
//! that fires that transition, averages all solutions found, and keeps only
//! the support of the average that is also a firing set from the initial
//! marking (and, in finite mode, of the reverse net from the reached
//! marking). The round succeeds when nothing is removed.

use serde::{Deserialize, Serialize};

use crate::error::{CpnError, Result};
use crate::firing_set::saturate;
use crate::lp::{solve_positive_components, Relation};
use crate::net::{support_of, Cpn, Marking, Parikh, TransitionSet};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReachMode {
    /// Reachable by a finite firing sequence.
    #[default]
    Finite,
    /// Reachable as the limit of an infinite firing sequence; skips the
    /// reverse-net firing-set check.
    Limit,
}

/// Marking the reverse-net firing-set check starts from in finite mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReverseAnchor {
    /// The target marking (exact reachability) or the reached marking
    /// `m0 + C·sol` (at-least reachability).
    #[default]
    Reached,
    /// The initial marking, restricted to the places adjacent to `T'`.
    Initial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReachOptions {
    pub mode: ReachMode,
    pub reverse_anchor: ReverseAnchor,
}

impl From<ReachMode> for ReachOptions {
    fn from(mode: ReachMode) -> Self {
        ReachOptions {
            mode,
            reverse_anchor: ReverseAnchor::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachResult {
    pub reachable: bool,
    /// Aggregate solution on success.
    pub parikh: Option<Parikh>,
    /// `parikh⁺` on success; the last candidate set otherwise.
    pub support: TransitionSet,
    /// Rounds of the main loop.
    pub iterations: usize,
    pub lp_solves: usize,
}

impl ReachResult {
    fn trivial(net: &Cpn) -> Self {
        ReachResult {
            reachable: true,
            parikh: Some(Parikh::zeros(net.num_transitions())),
            support: TransitionSet::new(),
            iterations: 0,
            lp_solves: 0,
        }
    }
}

/// Decides whether `target` is reachable (finite mode) or limit-reachable.
pub fn reachable(net: &Cpn, m0: &Marking, target: &Marking, opts: impl Into<ReachOptions>) -> Result<ReachResult> {
    check_dims(net, m0)?;
    check_dims(net, target)?;
    if target == m0 {
        return Ok(ReachResult::trivial(net));
    }
    let rhs: Vec<Rational> = target
        .as_slice()
        .iter()
        .zip(m0.as_slice())
        .map(|(a, b)| a - b)
        .collect();
    shrink(net, m0, &rhs, Relation::Eq, opts.into(), Some(target))
}

/// Decides whether some marking `m' >= goal` is (limit-)reachable.
pub fn at_least_reachable(
    net: &Cpn,
    m0: &Marking,
    goal: &Marking,
    opts: impl Into<ReachOptions>,
) -> Result<ReachResult> {
    check_dims(net, m0)?;
    check_dims(net, goal)?;
    if m0.dominates(goal) {
        return Ok(ReachResult::trivial(net));
    }
    let rhs: Vec<Rational> = goal.as_slice().iter().zip(m0.as_slice()).map(|(a, b)| a - b).collect();
    shrink(net, m0, &rhs, Relation::Ge, opts.into(), None)
}

fn check_dims(net: &Cpn, m: &Marking) -> Result<()> {
    if m.len() == net.num_places() {
        Ok(())
    } else {
        Err(CpnError::Dimension {
            expected: net.num_places(),
            actual: m.len(),
        })
    }
}

fn shrink(
    net: &Cpn,
    m0: &Marking,
    rhs: &[Rational],
    relation: Relation,
    opts: ReachOptions,
    exact_target: Option<&Marking>,
) -> Result<ReachResult> {
    let mut current: TransitionSet = (0..net.num_transitions()).collect();
    let mut iterations = 0;
    let mut lp_solves = 0;
    let columns: Vec<Vec<(usize, i64)>> = (0..net.num_transitions()).map(|t| net.incidence_column(t)).collect();

    while !current.is_empty() {
        iterations += 1;
        let cols: Vec<usize> = current.iter().copied().collect();
        let mut matrix = vec![vec![Rational::zero(); cols.len()]; net.num_places()];
        for (k, &t) in cols.iter().enumerate() {
            for &(p, c) in &columns[t] {
                matrix[p][k] = Rational::from_integer(c);
            }
        }
        let targets: Vec<usize> = (0..cols.len()).collect();
        let solutions = solve_positive_components(&matrix, rhs, &targets, relation)?;
        lp_solves += cols.len();

        let mut sum = vec![Rational::zero(); net.num_transitions()];
        let mut found = 0i64;
        for v in solutions.into_iter().flatten() {
            found += 1;
            for (k, x) in v.into_iter().enumerate() {
                if !x.is_zero() {
                    sum[cols[k]] += x;
                }
            }
        }
        if found == 0 {
            return Ok(ReachResult {
                reachable: false,
                parikh: None,
                support: current,
                iterations,
                lp_solves,
            });
        }
        let scale = Rational::new(1, found);
        let sol: Vec<Rational> = sum.iter().map(|x| x * &scale).collect();
        assert_state_equation(net, &sol, rhs, relation);

        let sol_support = support_of(&sol);
        let mut next = saturate(net, m0.as_slice(), &sol_support, false).max_subset;
        if opts.mode == ReachMode::Finite {
            let anchor: Vec<Rational> = match (opts.reverse_anchor, exact_target) {
                (ReverseAnchor::Initial, _) => m0.as_slice().to_vec(),
                (ReverseAnchor::Reached, Some(target)) => target.as_slice().to_vec(),
                (ReverseAnchor::Reached, None) => {
                    let delta = net.incidence_product(&sol);
                    m0.as_slice().iter().zip(delta).map(|(a, d)| a + d).collect()
                }
            };
            next = saturate(net, &anchor, &next, true).max_subset;
        }
        if next == sol_support {
            return Ok(ReachResult {
                reachable: true,
                parikh: Some(Parikh::new(sol)?),
                support: sol_support,
                iterations,
                lp_solves,
            });
        }
        current = next;
    }
    Ok(ReachResult {
        reachable: false,
        parikh: None,
        support: current,
        iterations,
        lp_solves,
    })
}

/// The averaged solution must still satisfy the LP (convexity).
fn assert_state_equation(net: &Cpn, sol: &[Rational], rhs: &[Rational], relation: Relation) {
    let cv = net.incidence_product(sol);
    let ok = cv.iter().zip(rhs).all(|(a, b)| match relation {
        Relation::Eq => a == b,
        Relation::Ge => a >= b,
        Relation::Le => a <= b,
    });
    assert!(ok, "aggregated solution violates the state equation");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fig1, fig2};
    use crate::rational::q;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn same_marking_is_trivially_reachable() {
        let (net, m0) = fig1();
        let res = reachable(&net, &m0, &m0, ReachMode::Finite).unwrap();
        assert!(res.reachable);
        assert_eq!(res.parikh, Some(Parikh::zeros(3)));
        assert_eq!(res.iterations, 0);
    }

    #[test]
    fn zero_marking_is_only_limit_reachable() {
        let (net, m0) = fig1();
        let zero = Marking::zeros(3);
        assert!(!reachable(&net, &m0, &zero, ReachMode::Finite).unwrap().reachable);
        let lim = reachable(&net, &m0, &zero, ReachMode::Limit).unwrap();
        assert!(lim.reachable);
        assert_eq!(lim.support, net.transition_set(&["t1", "t2"]).unwrap());
        assert_eq!(net.apply_parikh(&m0, lim.parikh.as_ref().unwrap()).unwrap(), zero);
    }

    #[test]
    fn firing_t3_fully_is_reachable() {
        let (net, m0) = fig1();
        let target = net.marking(&[("p3", r(10))]).unwrap();
        let res = reachable(&net, &m0, &target, ReachMode::Finite).unwrap();
        assert!(res.reachable);
        assert_eq!(res.parikh.unwrap(), net.parikh(&[("t3", r(1))]).unwrap());
    }

    #[test]
    fn fig2_goal_is_not_causally_reachable() {
        let (net, m0) = fig2();
        let goal = net.marking(&[("pg", r(1))]).unwrap();
        for mode in [ReachMode::Finite, ReachMode::Limit] {
            let res = at_least_reachable(&net, &m0, &goal, mode).unwrap();
            assert!(!res.reachable);
        }
    }

    #[test]
    fn at_least_examples_on_fig1() {
        let (net, m0) = fig1();
        let goal = net.marking(&[("p3", r(10))]).unwrap();
        let res = at_least_reachable(&net, &m0, &goal, ReachMode::Finite).unwrap();
        assert!(res.reachable);
        let reached = net.apply_parikh(&m0, res.parikh.as_ref().unwrap()).unwrap();
        assert!(reached.dominates(&goal));

        let over = net.marking(&[("p3", q(21, 2))]).unwrap();
        assert!(
            !at_least_reachable(&net, &m0, &over, ReachMode::Finite)
                .unwrap()
                .reachable
        );
        assert!(
            !at_least_reachable(&net, &m0, &over, ReachMode::Limit)
                .unwrap()
                .reachable
        );

        let below = net.marking(&[("p1", q(1, 2))]).unwrap();
        let trivial = at_least_reachable(&net, &m0, &below, ReachMode::Finite).unwrap();
        assert!(trivial.reachable);
        assert_eq!(trivial.iterations, 0);
    }

    #[test]
    fn initial_anchor_is_available() {
        let (net, m0) = fig1();
        let opts = ReachOptions {
            mode: ReachMode::Finite,
            reverse_anchor: ReverseAnchor::Initial,
        };
        let target = net.marking(&[("p3", r(10))]).unwrap();
        // From m0 = (p1: 1) nothing enables t3 in the reverse net (it needs p3).
        assert!(!reachable(&net, &m0, &target, opts).unwrap().reachable);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let (net, m0) = fig1();
        assert!(reachable(&net, &m0, &Marking::zeros(2), ReachMode::Finite).is_err());
    }

    mod properties {
        use super::*;
        use crate::generators::gen_random;
        use proptest::prelude::*;

        fn instance(seed: u64) -> (Cpn, Marking, usize) {
            let net = gen_random(2 + (seed % 5) as usize, 1 + (seed % 6) as usize, 3, q(2, 5), seed);
            let mass = (0..net.num_places())
                .map(|p| {
                    if (seed >> (p + 16)) & 1 == 1 {
                        r(1 + ((seed >> p) % 2) as i64)
                    } else {
                        r(0)
                    }
                })
                .collect();
            let goal = (seed >> 40) as usize % net.num_places();
            (net, Marking::new(mass).unwrap(), goal)
        }

        fn goal_marking(net: &Cpn, g: usize, x: Rational) -> Marking {
            let mut v = vec![r(0); net.num_places()];
            v[g] = x;
            Marking::new(v).unwrap()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(128))]

            #[test]
            fn smaller_goals_stay_reachable(seed in any::<u64>(), num in 1i64..12) {
                let (net, m0, g) = instance(seed);
                for mode in [ReachMode::Finite, ReachMode::Limit] {
                    let big = at_least_reachable(&net, &m0, &goal_marking(&net, g, q(num, 4)), mode).unwrap();
                    let small = at_least_reachable(&net, &m0, &goal_marking(&net, g, q(num, 8)), mode).unwrap();
                    prop_assert!(big.iterations <= net.num_transitions());
                    prop_assert!(small.iterations <= net.num_transitions());
                    if big.reachable {
                        prop_assert!(small.reachable);
                    }
                }
            }

            #[test]
            fn finite_implies_limit(seed in any::<u64>(), num in 1i64..12) {
                let (net, m0, g) = instance(seed);
                let goal = goal_marking(&net, g, q(num, 4));
                let fin = at_least_reachable(&net, &m0, &goal, ReachMode::Finite).unwrap();
                let lim = at_least_reachable(&net, &m0, &goal, ReachMode::Limit).unwrap();
                if fin.reachable {
                    prop_assert!(lim.reachable);
                }
                if let Some(v) = &fin.parikh {
                    let target = net.apply_parikh(&m0, v).unwrap();
                    let exact = reachable(&net, &m0, &target, ReachMode::Finite).unwrap();
                    prop_assert!(exact.reachable);
                    prop_assert!(exact.iterations <= net.num_transitions());
                }
            }
        }
    }
}

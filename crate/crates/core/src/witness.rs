//! Certificate checking and best-effort replay of Parikh vectors as
//! explicit firing schedules.

use crate::error::{CpnError, Result};
use crate::firing_set::{fireable, saturate};
use crate::net::{Cpn, Marking, Parikh};
use crate::rational::Rational;
use crate::reach::ReachMode;

/// Which certificate conditions hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertificateReport {
    /// `m0 + C v` equals the target (or dominates the goal).
    pub state_equation: bool,
    /// `v⁺` is a firing set of the net from `m0`.
    pub forward: bool,
    /// `v⁺` is a firing set of the reverse net from the reached marking;
    /// always `true` in limit mode.
    pub backward: bool,
}

impl CertificateReport {
    pub fn holds(&self) -> bool {
        self.state_equation && self.forward && self.backward
    }
}

/// Checks that `v` certifies `target ∈ RS(net, m0)` (finite mode) or
/// `target ∈ lim-RS(net, m0)` (limit mode).
pub fn check_certificate(net: &Cpn, m0: &Marking, target: &Marking, v: &Parikh, mode: ReachMode) -> bool {
    certificate_report(net, m0, target, v, mode, false).is_ok_and(|r| r.holds())
}

/// Like [`check_certificate`], but only requires the reached marking to
/// dominate `goal`.
pub fn check_at_least_certificate(net: &Cpn, m0: &Marking, goal: &Marking, v: &Parikh, mode: ReachMode) -> bool {
    certificate_report(net, m0, goal, v, mode, true).is_ok_and(|r| r.holds())
}

pub fn certificate_report(
    net: &Cpn,
    m0: &Marking,
    target: &Marking,
    v: &Parikh,
    mode: ReachMode,
    at_least: bool,
) -> Result<CertificateReport> {
    if target.len() != net.num_places() {
        return Err(CpnError::Dimension {
            expected: net.num_places(),
            actual: target.len(),
        });
    }
    let support = v.support();
    let forward = fireable(net, m0, &support)?.is_member;
    let reached = match net.apply_parikh(m0, v) {
        Ok(m) => m,
        Err(CpnError::InfeasibleVector { .. }) => {
            return Ok(CertificateReport {
                state_equation: false,
                forward,
                backward: false,
            })
        }
        Err(e) => return Err(e),
    };
    let state_equation = if at_least {
        reached.dominates(target)
    } else {
        reached == *target
    };
    let backward = match mode {
        ReachMode::Limit => true,
        ReachMode::Finite => saturate(net, reached.as_slice(), &support, true).is_member,
    };
    Ok(CertificateReport {
        state_equation,
        forward,
        backward,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replay {
    pub final_marking: Marking,
    pub schedule: Vec<(usize, Rational)>,
    /// Every quota of `v` was fired in full.
    pub completed: bool,
    pub rounds: usize,
}

/// Turns `v` into a firing schedule.
///
/// Each round visits the support in saturation order and fires the full
/// remaining quota of a transition when it is enabled for it, otherwise
/// `min(enab, quota / 2)`. Stops after `max_rounds` rounds.
pub fn replay(net: &Cpn, m0: &Marking, v: &Parikh, max_rounds: usize) -> Result<Replay> {
    let support = v.support();
    let fs = fireable(net, m0, &support)?;
    if !fs.is_member {
        return Err(CpnError::Input(format!(
            "support {{{}}} is not a firing set of the initial marking",
            net.transition_names(&support).join(", ")
        )));
    }
    net.apply_parikh(m0, v)?;

    let two = Rational::from_integer(2);
    let mut remaining = v.as_slice().to_vec();
    let mut m = m0.clone();
    let mut schedule = Vec::new();
    let mut rounds = 0;
    while rounds < max_rounds && remaining.iter().any(Rational::is_positive) {
        rounds += 1;
        for &t in &fs.order {
            if remaining[t].is_zero() {
                continue;
            }
            let enab = net.enab(&m, t)?;
            let amount = match enab.finite() {
                Some(e) if *e < remaining[t] => e.clone().min(&remaining[t] / &two),
                _ => remaining[t].clone(),
            };
            if amount.is_zero() {
                continue;
            }
            m = net.fire(&m, t, &amount)?;
            remaining[t] -= &amount;
            schedule.push((t, amount));
        }
    }
    Ok(Replay {
        final_marking: m,
        completed: remaining.iter().all(Rational::is_zero),
        schedule,
        rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fig1, fig2};
    use crate::generators::gen_random;
    use crate::rational::q;
    use crate::reach::{at_least_reachable, reachable};
    use proptest::prelude::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn fig2_lp_solution_is_not_a_certificate() {
        let (net, m0) = fig2();
        let v = net.parikh(&[("t1", r(1)), ("t2", r(1))]).unwrap();
        let target = net.marking(&[("pg", r(1))]).unwrap();
        let report = certificate_report(&net, &m0, &target, &v, ReachMode::Finite, false).unwrap();
        assert!(report.state_equation);
        assert!(!report.forward);
        assert!(!check_certificate(&net, &m0, &target, &v, ReachMode::Finite));
        assert!(!check_certificate(&net, &m0, &target, &v, ReachMode::Limit));
    }

    #[test]
    fn fig1_single_firing_certificate() {
        let (net, m0) = fig1();
        let v = net.parikh(&[("t3", r(1))]).unwrap();
        let target = net.marking(&[("p3", r(10))]).unwrap();
        assert!(check_certificate(&net, &m0, &target, &v, ReachMode::Finite));
        let goal = net.marking(&[("p3", r(9))]).unwrap();
        assert!(check_at_least_certificate(&net, &m0, &goal, &v, ReachMode::Finite));
        assert!(!check_certificate(&net, &m0, &goal, &v, ReachMode::Finite));
    }

    #[test]
    fn empty_certificate() {
        let (net, m0) = fig1();
        assert!(check_certificate(&net, &m0, &m0, &Parikh::zeros(3), ReachMode::Finite));
        let rep = replay(&net, &m0, &Parikh::zeros(3), 10).unwrap();
        assert!(rep.completed);
        assert!(rep.schedule.is_empty());
        assert_eq!(rep.final_marking, m0);
    }

    #[test]
    fn zero_marking_is_limit_only() {
        let (net, m0) = fig1();
        let res = reachable(&net, &m0, &Marking::zeros(3), ReachMode::Limit).unwrap();
        let v = res.parikh.unwrap();
        assert!(check_certificate(&net, &m0, &Marking::zeros(3), &v, ReachMode::Limit));
        assert!(!check_certificate(&net, &m0, &Marking::zeros(3), &v, ReachMode::Finite));
        let rep = replay(&net, &m0, &v, 20).unwrap();
        assert!(!rep.completed);
        assert_eq!(rep.rounds, 20);
    }

    #[test]
    fn replay_single_firing() {
        let (net, m0) = fig1();
        let v = net.parikh(&[("t3", r(1))]).unwrap();
        let rep = replay(&net, &m0, &v, 10).unwrap();
        assert_eq!(rep.schedule, vec![(2, r(1))]);
        assert!(rep.completed);
        assert_eq!(rep.final_marking, net.marking(&[("p3", r(10))]).unwrap());
    }

    #[test]
    fn replay_loop_quota() {
        let (net, m0) = fig1();
        let v = net.parikh(&[("t1", q(1, 2)), ("t2", q(1, 2))]).unwrap();
        let rep = replay(&net, &m0, &v, 10).unwrap();
        assert!(rep.completed);
        assert_eq!(rep.final_marking, net.apply_parikh(&m0, &v).unwrap());
        assert_eq!(rep.final_marking, net.marking(&[("p1", q(1, 2))]).unwrap());
    }

    #[test]
    fn replay_rejects_non_fireable_support() {
        let (net, m0) = fig2();
        let v = net.parikh(&[("t1", r(1)), ("t2", r(1))]).unwrap();
        assert!(matches!(replay(&net, &m0, &v, 10), Err(CpnError::Input(_))));
    }

    fn random_instance(seed: u64) -> (Cpn, Marking) {
        let net = gen_random(2 + (seed % 5) as usize, 1 + (seed % 6) as usize, 3, q(2, 5), seed);
        let mass = (0..net.num_places())
            .map(|p| {
                if (seed >> p) & 1 == 1 {
                    r(((seed >> 8) % 3 + 1) as i64)
                } else {
                    r(0)
                }
            })
            .collect();
        (net, Marking::new(mass).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Positive decisions carry valid certificates, and the schedule
        /// replays to `m0 + C·(fired amounts)`.
        #[test]
        fn decisions_are_certified(seed in any::<u64>(), goal_mass in 1i64..4) {
            let (net, m0) = random_instance(seed);
            let g = (seed as usize / 7) % net.num_places();
            let mut goal = vec![r(0); net.num_places()];
            goal[g] = q(goal_mass, 2);
            let goal = Marking::new(goal).unwrap();
            for mode in [ReachMode::Finite, ReachMode::Limit] {
                let res = at_least_reachable(&net, &m0, &goal, mode).unwrap();
                prop_assert!(res.iterations <= net.num_transitions());
                if let Some(v) = res.parikh {
                    prop_assert!(check_at_least_certificate(&net, &m0, &goal, &v, mode));
                    let rep = replay(&net, &m0, &v, 30).unwrap();
                    let mut fired = vec![r(0); net.num_transitions()];
                    for (t, a) in &rep.schedule {
                        fired[*t] += a;
                    }
                    for (f, x) in fired.iter().zip(v.as_slice()) {
                        prop_assert!(f <= x);
                    }
                    prop_assert_eq!(rep.completed, fired.as_slice() == v.as_slice());
                    let expect = net.apply_parikh(&m0, &Parikh::new(fired).unwrap()).unwrap();
                    prop_assert_eq!(rep.final_marking, expect);
                }
            }
        }
    }
}

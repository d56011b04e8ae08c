//! Membership in the firing set `FS(N, m0)` and maximal firing sets.
//!
//! Saturation starts from the marked places and repeatedly admits every
//! transition of the candidate set whose input places are all already
//! reachable, adding its output places. Transitions are scanned in index
//! order, so the admission order is deterministic.

use crate::error::{CpnError, Result};
use crate::net::{Cpn, Marking, TransitionSet};
use crate::rational::Rational;

type Arcs = fn(&Cpn, usize) -> &[(usize, u32)];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fireability {
    pub is_member: bool,
    /// The unique maximal firing set included in the candidate set.
    pub max_subset: TransitionSet,
    /// Transitions of `max_subset` in the order saturation admitted them.
    pub order: Vec<usize>,
    /// Saturation passes performed (at most `|candidate| + 1`).
    pub passes: usize,
}

/// Decides whether `sub ∈ FS(net, m0)`.
pub fn fireable(net: &Cpn, m0: &Marking, sub: &TransitionSet) -> Result<Fireability> {
    if m0.len() != net.num_places() {
        return Err(CpnError::Dimension {
            expected: net.num_places(),
            actual: m0.len(),
        });
    }
    if let Some(&bad) = sub.iter().find(|&&t| t >= net.num_transitions()) {
        return Err(CpnError::UnknownTransition(format!("#{bad}")));
    }
    Ok(saturate(net, m0.as_slice(), sub, false))
}

/// The maximal firing set of `(net, m0)`.
pub fn max_fs(net: &Cpn, m0: &Marking) -> Result<TransitionSet> {
    let all: TransitionSet = (0..net.num_transitions()).collect();
    Ok(fireable(net, m0, &all)?.max_subset)
}

/// Saturation over `sub`. With `reversed`, arcs are read from the reverse
/// net, which avoids materialising it.
///
/// Only places adjacent to `sub` are ever consulted, so the result equals
/// the one on the restricted net `N_sub` with marking `m[•sub•]`.
pub(crate) fn saturate(net: &Cpn, m: &[Rational], sub: &TransitionSet, reversed: bool) -> Fireability {
    let mut marked: Vec<bool> = m.iter().map(Rational::is_positive).collect();
    let candidates: Vec<usize> = sub.iter().copied().collect();
    let mut admitted = vec![false; candidates.len()];
    let mut order = Vec::with_capacity(candidates.len());
    let mut passes = 0;
    let (inputs, outputs): (Arcs, Arcs) = if reversed {
        (Cpn::post, Cpn::pre)
    } else {
        (Cpn::pre, Cpn::post)
    };
    while order.len() < candidates.len() {
        passes += 1;
        let mut progress = false;
        for (k, &t) in candidates.iter().enumerate() {
            if admitted[k] || !inputs(net, t).iter().all(|&(p, _)| marked[p]) {
                continue;
            }
            admitted[k] = true;
            order.push(t);
            for &(p, _) in outputs(net, t) {
                marked[p] = true;
            }
            progress = true;
        }
        if !progress {
            break;
        }
    }
    let is_member = order.len() == candidates.len();
    Fireability {
        is_member,
        max_subset: order.iter().copied().collect(),
        order,
        passes,
    }
}

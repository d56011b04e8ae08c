//! Continuous Petri net structure, markings and firing semantics.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::error::{CpnError, Result};
use crate::rational::{ExtendedRational, Rational};

/// A set of transitions, by dense index into [`Cpn::transitions`].
pub type TransitionSet = BTreeSet<usize>;

/// An immutable continuous Petri net `(P, T, In, Out)`.
///
/// Arc weights are naturals. Matrices are stored place-major and
/// additionally as per-transition sparse pre/post lists for the inner loops.
#[derive(Clone, PartialEq, Eq)]
pub struct Cpn {
    name: String,
    places: Vec<String>,
    transitions: Vec<String>,
    place_index: HashMap<String, usize>,
    transition_index: HashMap<String, usize>,
    input: Vec<u32>,
    output: Vec<u32>,
    pre: Vec<Vec<(usize, u32)>>,
    post: Vec<Vec<(usize, u32)>>,
}

impl Cpn {
    /// Builds a net from dense `|P| x |T|` backward (`input`) and forward
    /// (`output`) incidence matrices.
    pub fn new(
        name: impl Into<String>,
        places: Vec<String>,
        transitions: Vec<String>,
        input: Vec<Vec<u32>>,
        output: Vec<Vec<u32>>,
    ) -> Result<Self> {
        let (np, nt) = (places.len(), transitions.len());
        for (label, m) in [("in", &input), ("out", &output)] {
            if m.len() != np {
                return Err(CpnError::InvalidNet(format!(
                    "{label} matrix has {} rows for {np} places",
                    m.len()
                )));
            }
            if let Some(row) = m.iter().find(|r| r.len() != nt) {
                return Err(CpnError::InvalidNet(format!(
                    "{label} matrix row has {} columns for {nt} transitions",
                    row.len()
                )));
            }
        }
        let mut place_index = HashMap::with_capacity(np);
        for (i, p) in places.iter().enumerate() {
            if p.is_empty() {
                return Err(CpnError::InvalidNet("empty place identifier".into()));
            }
            if place_index.insert(p.clone(), i).is_some() {
                return Err(CpnError::InvalidNet(format!("duplicate place `{p}`")));
            }
        }
        let mut transition_index = HashMap::with_capacity(nt);
        for (i, t) in transitions.iter().enumerate() {
            if t.is_empty() {
                return Err(CpnError::InvalidNet("empty transition identifier".into()));
            }
            if place_index.contains_key(t) {
                return Err(CpnError::InvalidNet(format!("`{t}` is both a place and a transition")));
            }
            if transition_index.insert(t.clone(), i).is_some() {
                return Err(CpnError::InvalidNet(format!("duplicate transition `{t}`")));
            }
        }
        let flat = |m: Vec<Vec<u32>>| m.into_iter().flatten().collect::<Vec<_>>();
        let (input, output) = (flat(input), flat(output));
        let arcs = |m: &[u32], t: usize| {
            (0..np)
                .filter_map(|p| {
                    let w = m[p * nt + t];
                    (w > 0).then_some((p, w))
                })
                .collect::<Vec<_>>()
        };
        let pre = (0..nt).map(|t| arcs(&input, t)).collect();
        let post = (0..nt).map(|t| arcs(&output, t)).collect();
        Ok(Cpn {
            name: name.into(),
            places,
            transitions,
            place_index,
            transition_index,
            input,
            output,
            pre,
            post,
        })
    }

    pub fn builder(name: impl Into<String>) -> CpnBuilder {
        CpnBuilder {
            name: name.into(),
            places: Vec::new(),
            transitions: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[String] {
        &self.transitions
    }

    pub fn num_places(&self) -> usize {
        self.places.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn place_index(&self, id: &str) -> Result<usize> {
        self.place_index
            .get(id)
            .copied()
            .ok_or_else(|| CpnError::UnknownPlace(id.to_string()))
    }

    pub fn transition_index(&self, id: &str) -> Result<usize> {
        self.transition_index
            .get(id)
            .copied()
            .ok_or_else(|| CpnError::UnknownTransition(id.to_string()))
    }

    /// Resolves a list of transition ids to a set of indices.
    pub fn transition_set<S: AsRef<str>>(&self, ids: &[S]) -> Result<TransitionSet> {
        ids.iter().map(|s| self.transition_index(s.as_ref())).collect()
    }

    /// Transition ids of a set, in index order.
    pub fn transition_names(&self, set: &TransitionSet) -> Vec<String> {
        set.iter().map(|&t| self.transitions[t].clone()).collect()
    }

    /// `In(p, t)`.
    pub fn input(&self, p: usize, t: usize) -> u32 {
        self.input[p * self.num_transitions() + t]
    }

    /// `Out(p, t)`.
    pub fn output(&self, p: usize, t: usize) -> u32 {
        self.output[p * self.num_transitions() + t]
    }

    /// `C(p, t) = Out(p, t) - In(p, t)`.
    pub fn incidence(&self, p: usize, t: usize) -> i64 {
        self.output(p, t) as i64 - self.input(p, t) as i64
    }

    /// Input places of `t` with their weights (`•t`).
    pub fn pre(&self, t: usize) -> &[(usize, u32)] {
        &self.pre[t]
    }

    /// Output places of `t` with their weights (`t•`).
    pub fn post(&self, t: usize) -> &[(usize, u32)] {
        &self.post[t]
    }

    /// Transitions with a positive arc into `p` (`•p`).
    pub fn producers(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_transitions()).filter(move |&t| self.output(p, t) > 0)
    }

    /// Transitions with a positive arc out of `p` (`p•`).
    pub fn consumers(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_transitions()).filter(move |&t| self.input(p, t) > 0)
    }

    /// Column `t` of the incidence matrix as sparse `(place, C(p, t))` pairs.
    pub fn incidence_column(&self, t: usize) -> Vec<(usize, i64)> {
        let mut col: Vec<(usize, i64)> = Vec::with_capacity(self.pre[t].len() + self.post[t].len());
        for &(p, _) in self.pre[t].iter().chain(self.post[t].iter()) {
            if col.iter().any(|&(q, _)| q == p) {
                continue;
            }
            let c = self.incidence(p, t);
            if c != 0 {
                col.push((p, c));
            }
        }
        col.sort_unstable();
        col
    }

    fn check_transition(&self, t: usize) -> Result<()> {
        if t < self.num_transitions() {
            Ok(())
        } else {
            Err(CpnError::UnknownTransition(format!("#{t}")))
        }
    }

    fn check_marking(&self, m: &Marking) -> Result<()> {
        if m.len() == self.num_places() {
            Ok(())
        } else {
            Err(CpnError::Dimension {
                expected: self.num_places(),
                actual: m.len(),
            })
        }
    }

    fn check_parikh(&self, v: &Parikh) -> Result<()> {
        if v.len() == self.num_transitions() {
            Ok(())
        } else {
            Err(CpnError::Dimension {
                expected: self.num_transitions(),
                actual: v.len(),
            })
        }
    }

    /// Enabling degree of `t` in `m`: `min_{p in •t} m(p) / In(p, t)`, or
    /// infinity when `t` has no input places.
    pub fn enab(&self, m: &Marking, t: usize) -> Result<ExtendedRational> {
        self.check_transition(t)?;
        self.check_marking(m)?;
        Ok(self.enab_unchecked(m.as_slice(), t))
    }

    pub(crate) fn enab_unchecked(&self, m: &[Rational], t: usize) -> ExtendedRational {
        self.pre[t]
            .iter()
            .map(|&(p, w)| ExtendedRational::Finite(&m[p] / &Rational::from(w)))
            .min()
            .unwrap_or(ExtendedRational::Infinity)
    }

    /// Fires `t` by `alpha`, which must lie in `[0, enab(m, t)]`.
    pub fn fire(&self, m: &Marking, t: usize, alpha: &Rational) -> Result<Marking> {
        self.check_transition(t)?;
        self.check_marking(m)?;
        if alpha.is_negative() {
            return Err(CpnError::NegativeAmount(alpha.clone()));
        }
        if alpha.is_zero() {
            return Ok(m.clone());
        }
        let mut next = m.0.clone();
        for &(p, w) in &self.pre[t] {
            let need = alpha * &Rational::from(w);
            if need > next[p] {
                return Err(CpnError::FiringAmount {
                    transition: self.transitions[t].clone(),
                    place: self.places[p].clone(),
                    amount: alpha.clone(),
                    enabled: &m.0[p] / &Rational::from(w),
                });
            }
        }
        for (p, c) in self.incidence_column(t) {
            next[p] += alpha * &Rational::from_integer(c);
        }
        Ok(Marking(next))
    }

    /// `C · v` as a place-indexed vector (entries may be negative).
    pub fn incidence_product(&self, v: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.num_places()];
        for (t, amount) in v.iter().enumerate() {
            if amount.is_zero() {
                continue;
            }
            for (p, c) in self.incidence_column(t) {
                out[p] += amount * &Rational::from_integer(c);
            }
        }
        out
    }

    /// `m + C · v`, rejecting results with negative entries.
    pub fn apply_parikh(&self, m: &Marking, v: &Parikh) -> Result<Marking> {
        self.check_marking(m)?;
        self.check_parikh(v)?;
        let delta = self.incidence_product(v.as_slice());
        let result: Vec<Rational> = m.0.iter().zip(delta).map(|(a, d)| a + d).collect();
        let negative: Vec<String> = result
            .iter()
            .enumerate()
            .filter(|(_, x)| x.is_negative())
            .map(|(p, _)| self.places[p].clone())
            .collect();
        if negative.is_empty() {
            Ok(Marking(result))
        } else {
            Err(CpnError::InfeasibleVector { places: negative })
        }
    }

    /// Places with an arc to or from some transition of `sub` (`•sub•`),
    /// in place order.
    pub fn adjacent_places(&self, sub: &TransitionSet) -> Vec<usize> {
        let mut seen = vec![false; self.num_places()];
        for &t in sub {
            for &(p, _) in self.pre[t].iter().chain(self.post[t].iter()) {
                seen[p] = true;
            }
        }
        (0..self.num_places()).filter(|&p| seen[p]).collect()
    }

    /// The net restricted to the transitions in `sub`, with place set `•sub•`.
    pub fn restrict(&self, sub: &TransitionSet) -> Result<Cpn> {
        if let Some(&bad) = sub.iter().find(|&&t| t >= self.num_transitions()) {
            return Err(CpnError::UnknownTransition(format!("#{bad}")));
        }
        let places = self.adjacent_places(sub);
        let pick = |f: &dyn Fn(usize, usize) -> u32| {
            places
                .iter()
                .map(|&p| sub.iter().map(|&t| f(p, t)).collect())
                .collect::<Vec<Vec<u32>>>()
        };
        Cpn::new(
            self.name.clone(),
            places.iter().map(|&p| self.places[p].clone()).collect(),
            sub.iter().map(|&t| self.transitions[t].clone()).collect(),
            pick(&|p, t| self.input(p, t)),
            pick(&|p, t| self.output(p, t)),
        )
    }

    /// The reverse net `(P, T, Out, In)`.
    pub fn reverse(&self) -> Cpn {
        Cpn {
            name: self.name.clone(),
            places: self.places.clone(),
            transitions: self.transitions.clone(),
            place_index: self.place_index.clone(),
            transition_index: self.transition_index.clone(),
            input: self.output.clone(),
            output: self.input.clone(),
            pre: self.post.clone(),
            post: self.pre.clone(),
        }
    }

    /// Builds a marking from `(place id, mass)` pairs; unlisted places are 0.
    pub fn marking<S: AsRef<str>>(&self, entries: &[(S, Rational)]) -> Result<Marking> {
        let mut m = vec![Rational::zero(); self.num_places()];
        for (id, mass) in entries {
            m[self.place_index(id.as_ref())?] = mass.clone();
        }
        Marking::new(m)
    }

    /// Builds a Parikh vector from `(transition id, amount)` pairs.
    pub fn parikh<S: AsRef<str>>(&self, entries: &[(S, Rational)]) -> Result<Parikh> {
        let mut v = vec![Rational::zero(); self.num_transitions()];
        for (id, amount) in entries {
            v[self.transition_index(id.as_ref())?] = amount.clone();
        }
        Parikh::new(v)
    }
}

impl fmt::Debug for Cpn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("Cpn");
        s.field("name", &self.name).field("places", &self.places);
        let arcs: Vec<String> = (0..self.num_transitions())
            .map(|t| {
                let side = |arcs: &[(usize, u32)]| {
                    arcs.iter()
                        .map(|&(p, w)| format!("{w}*{}", self.places[p]))
                        .collect::<Vec<_>>()
                        .join("+")
                };
                format!(
                    "{}: {} -> {}",
                    self.transitions[t],
                    side(&self.pre[t]),
                    side(&self.post[t])
                )
            })
            .collect();
        s.field("transitions", &arcs).finish()
    }
}

type NamedArcs = Vec<(String, u32)>;

/// Incremental construction of a [`Cpn`] by named arcs.
pub struct CpnBuilder {
    name: String,
    places: Vec<String>,
    transitions: Vec<(String, NamedArcs, NamedArcs)>,
}

impl CpnBuilder {
    pub fn place(mut self, id: impl Into<String>) -> Self {
        self.places.push(id.into());
        self
    }

    pub fn places<S: Into<String>>(mut self, ids: impl IntoIterator<Item = S>) -> Self {
        self.places.extend(ids.into_iter().map(Into::into));
        self
    }

    pub fn transition(mut self, id: impl Into<String>, input: &[(&str, u32)], output: &[(&str, u32)]) -> Self {
        let own = |arcs: &[(&str, u32)]| arcs.iter().map(|&(p, w)| (p.to_string(), w)).collect();
        self.transitions.push((id.into(), own(input), own(output)));
        self
    }

    pub fn build(self) -> Result<Cpn> {
        let np = self.places.len();
        let nt = self.transitions.len();
        let index: HashMap<&str, usize> = self.places.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
        let mut input = vec![vec![0u32; nt]; np];
        let mut output = vec![vec![0u32; nt]; np];
        for (t, (_, ins, outs)) in self.transitions.iter().enumerate() {
            for (arcs, m) in [(ins, &mut input), (outs, &mut output)] {
                let mut seen = HashSet::new();
                for (p, w) in arcs {
                    let &pi = index.get(p.as_str()).ok_or_else(|| CpnError::UnknownPlace(p.clone()))?;
                    if !seen.insert(pi) {
                        return Err(CpnError::InvalidNet(format!("duplicate arc on place `{p}`")));
                    }
                    m[pi][t] = *w;
                }
            }
        }
        let names = self.transitions.into_iter().map(|(id, _, _)| id).collect();
        Cpn::new(self.name, self.places, names, input, output)
    }
}

/// Place-indexed nonnegative token mass.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Marking(Vec<Rational>);

impl Marking {
    pub fn new(mass: Vec<Rational>) -> Result<Self> {
        if let Some((index, value)) = mass.iter().enumerate().find(|(_, x)| x.is_negative()) {
            return Err(CpnError::NegativeEntry {
                index,
                value: value.clone(),
            });
        }
        Ok(Marking(mass))
    }

    pub fn zeros(places: usize) -> Self {
        Marking(vec![Rational::zero(); places])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, p: usize) -> &Rational {
        &self.0[p]
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Rational> {
        self.0
    }

    /// Places with strictly positive mass.
    pub fn support(&self) -> BTreeSet<usize> {
        support_of(&self.0)
    }

    /// Entrywise `self >= other`.
    pub fn dominates(&self, other: &Marking) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }
}

/// Transition-indexed nonnegative firing amounts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Parikh(Vec<Rational>);

impl Parikh {
    pub fn new(amount: Vec<Rational>) -> Result<Self> {
        if let Some((index, value)) = amount.iter().enumerate().find(|(_, x)| x.is_negative()) {
            return Err(CpnError::NegativeEntry {
                index,
                value: value.clone(),
            });
        }
        Ok(Parikh(amount))
    }

    pub fn zeros(transitions: usize) -> Self {
        Parikh(vec![Rational::zero(); transitions])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, t: usize) -> &Rational {
        &self.0[t]
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Rational> {
        self.0
    }

    /// `v⁺`: transitions with a strictly positive amount.
    pub fn support(&self) -> TransitionSet {
        support_of(&self.0)
    }
}

pub(crate) fn support_of(v: &[Rational]) -> BTreeSet<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| x.is_positive())
        .map(|(i, _)| i)
        .collect()
}

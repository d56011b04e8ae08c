//! Exact two-phase simplex over rationals.
//!
//! The solver works on a dense tableau. Pricing uses the largest reduced
//! cost and falls back to Bland's smallest-index rule after a run of
//! degenerate pivots, which rules out cycling. Phase one minimises the sum
//! of artificial variables, so no big-M constants are involved.

use crate::error::{CpnError, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Maximize,
    Minimize,
    Feasibility,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        let lhs: Rational = self
            .coeffs
            .iter()
            .zip(x)
            .filter(|(a, _)| !a.is_zero())
            .map(|(a, v)| a * v)
            .sum();
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

/// A linear program over `num_vars` variables. Variables default to the
/// bounds `[0, +inf)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<Option<Rational>>,
    pub upper: Vec<Option<Rational>>,
    pub objective: Vec<Rational>,
    pub sense: Sense,
}

impl LinearProgram {
    pub fn new(num_vars: usize, sense: Sense) -> Self {
        LinearProgram {
            num_vars,
            constraints: Vec::new(),
            lower: vec![Some(Rational::zero()); num_vars],
            upper: vec![None; num_vars],
            objective: vec![Rational::zero(); num_vars],
            sense,
        }
    }

    pub fn add_constraint(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> &mut Self {
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self
    }

    pub fn set_objective(&mut self, objective: Vec<Rational>) -> &mut Self {
        self.objective = objective;
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<Rational>, upper: Option<Rational>) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars;
        let check = |len: usize| {
            if len == n {
                Ok(())
            } else {
                Err(CpnError::Dimension {
                    expected: n,
                    actual: len,
                })
            }
        };
        check(self.objective.len())?;
        check(self.lower.len())?;
        check(self.upper.len())?;
        for c in &self.constraints {
            check(c.coeffs.len())?;
        }
        for (j, (l, u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if let (Some(l), Some(u)) = (l, u) {
                if l > u {
                    return Err(CpnError::Input(format!(
                        "variable {j} has lower bound {l} above upper bound {u}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether `x` satisfies every constraint and bound exactly.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && self.constraints.iter().all(|c| c.is_satisfied_by(x))
            && x.iter()
                .zip(&self.lower)
                .all(|(v, l)| l.as_ref().is_none_or(|l| v >= l))
            && x.iter()
                .zip(&self.upper)
                .all(|(v, u)| u.as_ref().is_none_or(|u| v <= u))
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        dot(&self.objective, x)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    Optimal {
        point: Vec<Rational>,
        value: Rational,
    },
    /// `point` is feasible and `point + s * ray` stays feasible for every
    /// `s >= 0` while strictly improving the objective.
    Unbounded {
        point: Vec<Rational>,
        ray: Vec<Rational>,
    },
}

impl LpOutcome {
    pub fn is_infeasible(&self) -> bool {
        matches!(self, LpOutcome::Infeasible)
    }

    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn point(&self) -> Option<&[Rational]> {
        match self {
            LpOutcome::Optimal { point, .. } | LpOutcome::Unbounded { point, .. } => Some(point),
            LpOutcome::Infeasible => None,
        }
    }
}

/// Solves `lp` exactly.
pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.validate()?;
    let Some(simplex) = Simplex::feasible(lp)? else {
        return Ok(LpOutcome::Infeasible);
    };
    Ok(match lp.sense {
        Sense::Maximize => simplex.maximize(&lp.objective),
        Sense::Minimize => simplex.minimize(&lp.objective),
        Sense::Feasibility => {
            let point = simplex.point();
            LpOutcome::Optimal {
                point,
                value: Rational::zero(),
            }
        }
    })
}

pub(crate) fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .map(|(x, y)| x * y)
        .sum()
}

/// How an original variable is expressed in tableau columns.
#[derive(Debug, Clone)]
enum VarMap {
    Fixed(Rational),
    /// `x = offset + y` (or `offset - y` when `negated`).
    Shift {
        col: usize,
        offset: Rational,
        negated: bool,
    },
    Free {
        pos: usize,
        neg: usize,
    },
}

const DEGENERATE_RUN_BEFORE_BLAND: usize = 16;

/// A simplex tableau holding a feasible basis, reusable across objectives.
#[derive(Debug, Clone)]
pub struct Simplex {
    vars: Vec<VarMap>,
    /// Total columns before the right-hand side.
    cols: usize,
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    pivots: usize,
}

enum Step {
    Optimal,
    Unbounded(usize),
}

impl Simplex {
    /// Runs phase one. Returns `None` when the program is infeasible.
    pub fn feasible(lp: &LinearProgram) -> Result<Option<Simplex>> {
        lp.validate()?;
        let mut vars = Vec::with_capacity(lp.num_vars);
        let mut structural = 0usize;
        let mut extra_rows: Vec<(usize, Rational)> = Vec::new();
        for j in 0..lp.num_vars {
            let map = match (&lp.lower[j], &lp.upper[j]) {
                (Some(l), Some(u)) if l == u => VarMap::Fixed(l.clone()),
                (Some(l), up) => {
                    let col = structural;
                    structural += 1;
                    if let Some(u) = up {
                        extra_rows.push((col, u - l));
                    }
                    VarMap::Shift {
                        col,
                        offset: l.clone(),
                        negated: false,
                    }
                }
                (None, Some(u)) => {
                    let col = structural;
                    structural += 1;
                    VarMap::Shift {
                        col,
                        offset: u.clone(),
                        negated: true,
                    }
                }
                (None, None) => {
                    structural += 2;
                    VarMap::Free {
                        pos: structural - 2,
                        neg: structural - 1,
                    }
                }
            };
            vars.push(map);
        }

        // Rows over structural columns with nonnegative right-hand sides.
        let mut raw: Vec<(Vec<Rational>, Relation, Rational)> =
            Vec::with_capacity(lp.constraints.len() + extra_rows.len());
        for c in &lp.constraints {
            let mut row = vec![Rational::zero(); structural];
            let mut rhs = c.rhs.clone();
            for (j, a) in c.coeffs.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                match &vars[j] {
                    VarMap::Fixed(v) => rhs -= a * v,
                    VarMap::Shift { col, offset, negated } => {
                        if !offset.is_zero() {
                            rhs -= a * offset;
                        }
                        row[*col] = if *negated { -a } else { a.clone() };
                    }
                    VarMap::Free { pos, neg } => {
                        row[*pos] = a.clone();
                        row[*neg] = -a;
                    }
                }
            }
            if row.iter().all(Rational::is_zero) {
                let ok = match c.relation {
                    Relation::Le => !rhs.is_negative(),
                    Relation::Eq => rhs.is_zero(),
                    Relation::Ge => !rhs.is_positive(),
                };
                if !ok {
                    return Ok(None);
                }
                continue;
            }
            raw.push((row, c.relation, rhs));
        }
        for (col, width) in extra_rows {
            let mut row = vec![Rational::zero(); structural];
            row[col] = Rational::one();
            raw.push((row, Relation::Le, width));
        }
        for (row, rel, rhs) in raw.iter_mut() {
            if rhs.is_negative() {
                for a in row.iter_mut() {
                    if !a.is_zero() {
                        *a = -&*a;
                    }
                }
                *rhs = -&*rhs;
                *rel = match *rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }

        let slacks = raw.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
        let artificials = raw.iter().filter(|(_, r, _)| *r != Relation::Le).count();
        let cols = structural + slacks + artificials;
        let mut rows = Vec::with_capacity(raw.len());
        let mut basis = Vec::with_capacity(raw.len());
        let (mut next_slack, mut next_art) = (structural, structural + slacks);
        for (mut row, rel, rhs) in raw {
            row.resize(cols + 1, Rational::zero());
            row[cols] = rhs;
            match rel {
                Relation::Le => {
                    row[next_slack] = Rational::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -Rational::one();
                    next_slack += 1;
                    row[next_art] = Rational::one();
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = Rational::one();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(row);
        }

        let mut simplex = Simplex {
            vars,
            cols,
            rows,
            basis,
            pivots: 0,
        };
        if artificials == 0 {
            return Ok(Some(simplex));
        }

        let first_art = structural + slacks;
        // Phase one: maximise -(sum of artificials).
        let mut obj = vec![Rational::zero(); cols + 1];
        for a in obj.iter_mut().take(cols).skip(first_art) {
            *a = Rational::one();
        }
        for (i, &b) in simplex.basis.iter().enumerate() {
            if b >= first_art {
                for (o, x) in obj.iter_mut().zip(&simplex.rows[i]) {
                    if !x.is_zero() {
                        *o -= x;
                    }
                }
            }
        }
        match simplex.optimize(&mut obj, cols) {
            Step::Optimal => {}
            Step::Unbounded(_) => unreachable!("phase one objective is bounded"),
        }
        if obj[cols].is_negative() {
            return Ok(None);
        }

        // Drive remaining (zero-valued) artificials out of the basis.
        let mut i = 0;
        while i < simplex.rows.len() {
            if simplex.basis[i] >= first_art {
                let entering = (0..first_art).find(|&j| !simplex.rows[i][j].is_zero());
                match entering {
                    Some(j) => {
                        simplex.pivot(i, j, None);
                        i += 1;
                    }
                    None => {
                        // Redundant equality.
                        simplex.rows.swap_remove(i);
                        simplex.basis.swap_remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        for row in simplex.rows.iter_mut() {
            row.drain(first_art..cols);
        }
        simplex.cols = first_art;
        Ok(Some(simplex))
    }

    /// Number of pivots performed so far (phase one included).
    pub fn pivots(&self) -> usize {
        self.pivots
    }

    /// The current basic feasible solution, in original variables.
    pub fn point(&self) -> Vec<Rational> {
        let y = self.basic_values();
        self.vars.iter().map(|m| Self::map_value(m, &y)).collect()
    }

    fn basic_values(&self) -> Vec<Rational> {
        let mut y = vec![Rational::zero(); self.cols];
        for (i, &b) in self.basis.iter().enumerate() {
            y[b] = self.rows[i][self.cols].clone();
        }
        y
    }

    fn map_value(m: &VarMap, y: &[Rational]) -> Rational {
        match m {
            VarMap::Fixed(v) => v.clone(),
            VarMap::Shift { col, offset, negated } => {
                if *negated {
                    offset - &y[*col]
                } else {
                    offset + &y[*col]
                }
            }
            VarMap::Free { pos, neg } => &y[*pos] - &y[*neg],
        }
    }

    fn map_direction(m: &VarMap, d: &[Rational]) -> Rational {
        match m {
            VarMap::Fixed(_) => Rational::zero(),
            VarMap::Shift { col, negated, .. } => {
                if *negated {
                    -&d[*col]
                } else {
                    d[*col].clone()
                }
            }
            VarMap::Free { pos, neg } => &d[*pos] - &d[*neg],
        }
    }

    pub fn minimize(&self, objective: &[Rational]) -> LpOutcome {
        let negated: Vec<Rational> = objective.iter().map(|c| -c).collect();
        match self.maximize(&negated) {
            LpOutcome::Optimal { point, value } => LpOutcome::Optimal { point, value: -value },
            other => other,
        }
    }

    /// Maximises `objective` (over original variables) from this basis.
    pub fn maximize(&self, objective: &[Rational]) -> LpOutcome {
        let mut work = self.clone();
        work.maximize_in_place(objective)
    }

    /// Like [`Simplex::maximize`] but keeps the optimal basis in `self`.
    pub fn maximize_in_place(&mut self, objective: &[Rational]) -> LpOutcome {
        let mut c = vec![Rational::zero(); self.cols];
        for (j, m) in self.vars.iter().enumerate() {
            let cj = &objective[j];
            if cj.is_zero() {
                continue;
            }
            match m {
                VarMap::Fixed(_) => {}
                VarMap::Shift { col, negated, .. } => c[*col] = if *negated { -cj } else { cj.clone() },
                VarMap::Free { pos, neg } => {
                    c[*pos] = cj.clone();
                    c[*neg] = -cj;
                }
            }
        }
        let mut obj: Vec<Rational> = c.iter().map(|x| -x).collect();
        obj.push(Rational::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            if !obj[b].is_zero() {
                let f = obj[b].clone();
                for (o, x) in obj.iter_mut().zip(&self.rows[i]) {
                    if !x.is_zero() {
                        *o -= &f * x;
                    }
                }
            }
        }
        let cols = self.cols;
        match self.optimize(&mut obj, cols) {
            Step::Optimal => {
                let point = self.point();
                let value = dot(objective, &point);
                LpOutcome::Optimal { point, value }
            }
            Step::Unbounded(e) => {
                let mut d = vec![Rational::zero(); self.cols];
                d[e] = Rational::one();
                for (i, &b) in self.basis.iter().enumerate() {
                    let a = &self.rows[i][e];
                    if !a.is_zero() {
                        d[b] = -a;
                    }
                }
                let ray = self.vars.iter().map(|m| Self::map_direction(m, &d)).collect();
                LpOutcome::Unbounded {
                    point: self.point(),
                    ray,
                }
            }
        }
    }

    /// Primal simplex iterations on the objective row `obj` (reduced costs,
    /// last entry = objective value). Only columns `< allowed` may enter.
    fn optimize(&mut self, obj: &mut [Rational], allowed: usize) -> Step {
        let rhs = self.cols;
        let mut degenerate_run = 0usize;
        loop {
            let bland = degenerate_run >= DEGENERATE_RUN_BEFORE_BLAND;
            let entering = if bland {
                (0..allowed).find(|&j| obj[j].is_negative())
            } else {
                let mut best: Option<usize> = None;
                for j in 0..allowed {
                    if obj[j].is_negative() && best.is_none_or(|b| obj[j] < obj[b]) {
                        best = Some(j);
                    }
                }
                best
            };
            let Some(e) = entering else {
                return Step::Optimal;
            };

            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = &row[e];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = leave else {
                return Step::Unbounded(e);
            };
            if ratio.is_zero() {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, e, Some(obj));
        }
    }

    fn pivot(&mut self, r: usize, e: usize, obj: Option<&mut [Rational]>) {
        self.pivots += 1;
        let width = self.cols + 1;
        let inv = self.rows[r][e].recip();
        if inv != Rational::one() {
            for x in self.rows[r].iter_mut() {
                if !x.is_zero() {
                    *x *= &inv;
                }
            }
        }
        let nz: Vec<(usize, Rational)> = self.rows[r]
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(j, x)| (j, x.clone()))
            .collect();
        let eliminate = |row: &mut [Rational]| {
            debug_assert_eq!(row.len(), width);
            let f = row[e].clone();
            if f.is_zero() {
                return;
            }
            for (j, x) in &nz {
                row[*j] -= &f * x;
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        if let Some(obj) = obj {
            eliminate(obj);
        }
        self.basis[r] = e;
    }
}

/// Finds `v >= 0` with `v[target] > 0` and `matrix · v (relation) rhs`, or
/// `None` when every solution of the system has `v[target] = 0`.
///
/// Strict positivity is decided by maximising `v[target]`: a positive
/// optimum yields the optimal vertex, an unbounded direction yields a
/// feasible point moved one step along the improving ray.
pub fn solve_positive_component(
    matrix: &[Vec<Rational>],
    rhs: &[Rational],
    target: usize,
    relation: Relation,
) -> Result<Option<Vec<Rational>>> {
    let mut found = solve_positive_components(matrix, rhs, &[target], relation)?;
    Ok(found.pop().flatten())
}

/// [`solve_positive_component`] for several targets over one system, sharing
/// the phase-one basis between them.
pub fn solve_positive_components(
    matrix: &[Vec<Rational>],
    rhs: &[Rational],
    targets: &[usize],
    relation: Relation,
) -> Result<Vec<Option<Vec<Rational>>>> {
    if matrix.len() != rhs.len() {
        return Err(CpnError::Dimension {
            expected: matrix.len(),
            actual: rhs.len(),
        });
    }
    let num_vars = matrix.first().map_or(0, Vec::len);
    if let Some(&bad) = targets.iter().find(|&&t| t >= num_vars) {
        return Err(CpnError::Dimension {
            expected: num_vars,
            actual: bad + 1,
        });
    }
    let mut lp = LinearProgram::new(num_vars, Sense::Maximize);
    for (row, b) in matrix.iter().zip(rhs) {
        if row.len() != num_vars {
            return Err(CpnError::Dimension {
                expected: num_vars,
                actual: row.len(),
            });
        }
        lp.add_constraint(row.clone(), relation, b.clone());
    }
    let Some(simplex) = Simplex::feasible(&lp)? else {
        return Ok(vec![None; targets.len()]);
    };
    Ok(targets
        .iter()
        .map(|&t| {
            let mut objective = vec![Rational::zero(); num_vars];
            objective[t] = Rational::one();
            match simplex.maximize(&objective) {
                LpOutcome::Optimal { point, value } if value.is_positive() => Some(point),
                LpOutcome::Unbounded { point, ray } => Some(point.iter().zip(&ray).map(|(p, r)| p + r).collect()),
                _ => None,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn one_variable_upper_bound() {
        let mut lp = LinearProgram::new(1, Sense::Maximize);
        lp.add_constraint(vec![r(1)], Relation::Le, r(3))
            .set_objective(vec![r(1)]);
        assert_eq!(solve(&lp).unwrap().value(), Some(&r(3)));
    }

    #[test]
    fn unbounded_with_ray() {
        let mut lp = LinearProgram::new(1, Sense::Maximize);
        lp.set_objective(vec![r(1)]);
        match solve(&lp).unwrap() {
            LpOutcome::Unbounded { ray, .. } => assert_eq!(ray, vec![r(1)]),
            other => panic!("expected unbounded, got {other:?}"),
        }
    }

    #[test]
    fn contradictory_system_is_infeasible() {
        let mut lp = LinearProgram::new(2, Sense::Feasibility);
        lp.add_constraint(vec![r(1), r(1)], Relation::Eq, r(1))
            .add_constraint(vec![r(1), r(0)], Relation::Ge, r(2));
        assert!(solve(&lp).unwrap().is_infeasible());
    }

    #[test]
    fn bounds_free_and_fixed_variables() {
        // min x + y, x free with x >= -5 via constraint, y in [2, 2], z <= 4 only.
        let mut lp = LinearProgram::new(3, Sense::Minimize);
        lp.set_bounds(0, None, None)
            .set_bounds(1, Some(r(2)), Some(r(2)))
            .set_bounds(2, None, Some(r(4)))
            .add_constraint(vec![r(1), r(0), r(0)], Relation::Ge, r(-5))
            .add_constraint(vec![r(0), r(0), r(1)], Relation::Ge, q(7, 2))
            .set_objective(vec![r(1), r(1), r(-1)]);
        match solve(&lp).unwrap() {
            LpOutcome::Optimal { point, value } => {
                assert_eq!(point, vec![r(-5), r(2), r(4)]);
                assert_eq!(value, r(-7));
                assert!(lp.is_feasible(&point));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = LinearProgram::new(2, Sense::Maximize);
        lp.add_constraint(vec![r(1), r(1)], Relation::Eq, r(2))
            .add_constraint(vec![r(2), r(2)], Relation::Eq, r(4))
            .set_objective(vec![r(1), r(0)]);
        assert_eq!(solve(&lp).unwrap().value(), Some(&r(2)));
    }

    #[test]
    fn malformed_rows_are_rejected() {
        let mut lp = LinearProgram::new(2, Sense::Maximize);
        lp.add_constraint(vec![r(1)], Relation::Le, r(1));
        assert!(matches!(solve(&lp), Err(CpnError::Dimension { .. })));
        let mut lp = LinearProgram::new(1, Sense::Maximize);
        lp.set_bounds(0, Some(r(2)), Some(r(1)));
        assert!(solve(&lp).is_err());
    }

    #[test]
    fn positive_component_via_ray() {
        // x - y >= 0 admits arbitrarily large x.
        let m = vec![vec![r(1), r(-1)]];
        let v = solve_positive_component(&m, &[r(0)], 1, Relation::Ge).unwrap().unwrap();
        assert!(v[1].is_positive());
        assert!(v[0] >= v[1]);
        // x + y = 0 forces both to zero.
        let m = vec![vec![r(1), r(1)]];
        assert_eq!(solve_positive_component(&m, &[r(0)], 0, Relation::Eq).unwrap(), None);
        assert!(solve_positive_component(&m, &[r(0), r(1)], 0, Relation::Eq).is_err());
    }

    // --- independent oracle: dense vertex enumeration -----------------------

    /// Solves a square system exactly; `None` when singular.
    fn gauss(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
        let n = b.len();
        for col in 0..n {
            let piv = (col..n).find(|&i| !a[i][col].is_zero())?;
            a.swap(col, piv);
            b.swap(col, piv);
            for i in 0..n {
                if i != col && !a[i][col].is_zero() {
                    let f = &a[i][col] / &a[col][col];
                    for k in col..n {
                        let d = &f * &a[col][k];
                        a[i][k] -= d;
                    }
                    let d = &f * &b[col];
                    b[i] -= d;
                }
            }
        }
        Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
    }

    fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        if n < k {
            return vec![];
        }
        let mut out = combinations(n - 1, k);
        for mut c in combinations(n - 1, k - 1) {
            c.push(n - 1);
            out.push(c);
        }
        out
    }

    /// max c·x s.t. A x <= b, x >= 0 by enumerating all vertices.
    fn brute_max(a: &[Vec<Rational>], b: &[Rational], c: &[Rational]) -> Option<Rational> {
        let n = c.len();
        // Inequalities: rows of A, then -x_j <= 0.
        let mut rows: Vec<(Vec<Rational>, Rational)> = a.iter().cloned().zip(b.iter().cloned()).collect();
        for j in 0..n {
            let mut e = vec![r(0); n];
            e[j] = r(-1);
            rows.push((e, r(0)));
        }
        let mut best: Option<Rational> = None;
        for active in combinations(rows.len(), n) {
            let m = active.iter().map(|&i| rows[i].0.clone()).collect();
            let rhs = active.iter().map(|&i| rows[i].1.clone()).collect();
            let Some(x) = gauss(m, rhs) else { continue };
            if rows.iter().all(|(row, bi)| dot(row, &x) <= *bi) {
                let v = dot(c, &x);
                if best.as_ref().is_none_or(|bv| v > *bv) {
                    best = Some(v);
                }
            }
        }
        best
    }

    fn small_lp() -> impl Strategy<Value = (Vec<Vec<Rational>>, Vec<Rational>, Vec<Rational>)> {
        (1usize..=4, 1usize..=4).prop_flat_map(|(m, n)| {
            (
                proptest::collection::vec(proptest::collection::vec(-3i64..=4, n), m),
                proptest::collection::vec(-2i64..=6, m),
                proptest::collection::vec(-3i64..=3, n),
            )
                .prop_map(move |(a, b, c)| {
                    let mut a: Vec<Vec<Rational>> = a.into_iter().map(|row| row.into_iter().map(r).collect()).collect();
                    let mut b: Vec<Rational> = b.into_iter().map(r).collect();
                    // Box the region so every feasible instance is bounded.
                    for j in 0..n {
                        let mut e = vec![r(0); n];
                        e[j] = r(1);
                        a.push(e);
                        b.push(r(5));
                    }
                    (a, b, c.into_iter().map(r).collect())
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn primal_and_dual_optima_match_vertex_enumeration((a, b, c) in small_lp()) {
            let n = c.len();
            let mut lp = LinearProgram::new(n, Sense::Maximize);
            for (row, bi) in a.iter().zip(&b) {
                lp.add_constraint(row.clone(), Relation::Le, bi.clone());
            }
            lp.set_objective(c.clone());
            let outcome = solve(&lp).unwrap();
            let brute = brute_max(&a, &b, &c);
            match (&outcome, &brute) {
                (LpOutcome::Optimal { point, value }, Some(bv)) => {
                    prop_assert!(lp.is_feasible(point));
                    prop_assert_eq!(value, bv);
                    // Dual: min b·y s.t. A^T y >= c, y >= 0, written as max -b·y, -A^T y <= -c.
                    let m = b.len();
                    let at: Vec<Vec<Rational>> = (0..n).map(|j| (0..m).map(|i| -&a[i][j]).collect()).collect();
                    let neg_c: Vec<Rational> = c.iter().map(|x| -x).collect();
                    let neg_b: Vec<Rational> = b.iter().map(|x| -x).collect();
                    let dual = brute_max(&at, &neg_c, &neg_b).map(|v| -v);
                    prop_assert_eq!(Some(bv.clone()), dual);
                }
                (LpOutcome::Infeasible, None) => {}
                other => prop_assert!(false, "solver/oracle disagree: {:?}", other),
            }
        }

        #[test]
        fn positive_component_iff_positive_max((a, b, _c) in small_lp(), t in 0usize..4) {
            let n = a[0].len();
            let t = t % n;
            let found = solve_positive_component(&a, &b, t, Relation::Le).unwrap();
            let mut e = vec![r(0); n];
            e[t] = r(1);
            let brute = brute_max(&a, &b, &e);
            match found {
                Some(v) => {
                    prop_assert!(v[t].is_positive());
                    prop_assert!(v.iter().all(|x| !x.is_negative()));
                    for (row, bi) in a.iter().zip(&b) {
                        prop_assert!(dot(row, &v) <= *bi);
                    }
                    prop_assert!(brute.is_some_and(|m| m.is_positive()));
                }
                None => prop_assert!(brute.is_none_or(|m| m.is_zero())),
            }
        }
    }
}

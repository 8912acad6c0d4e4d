//! Exact integer tuple sets and relations.
//!
//! An [`IntRelation`] is a finite union of [`Conjunct`]s over `in ⊕ out`
//! dimensions. A relation whose output arity is zero doubles as a set.
//! Operations are pure; every decision either returns a definite answer
//! or [`RelError::Unsupported`] when the work budget runs out.

mod linear;
mod system;
mod text;

use std::cell::Cell;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use linear::LinExpr;
pub use system::{Conjunct, Constraint};
pub use text::parse_relation;

use linear::{ceil_div, floor_div, modulo};

/// Default work limit for one top-level decision.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelError {
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// Work counter shared by the decision procedures of one computation.
#[derive(Debug)]
pub struct Budget {
    limit: u64,
    used: Cell<u64>,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget {
            limit,
            used: Cell::new(0),
        }
    }

    pub fn used(&self) -> u64 {
        self.used.get()
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub(crate) fn tick(&self, n: u64) -> Result<(), RelError> {
        let u = self.used.get().saturating_add(n);
        self.used.set(u);
        if u > self.limit {
            Err(RelError::Unsupported(format!(
                "integer decision exceeded work budget of {}",
                self.limit
            )))
        } else {
            Ok(())
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(DEFAULT_BUDGET)
    }
}

/// An integer tuple space: a number of dimensions and optional names used
/// only for rendering.
#[derive(Clone, Debug, Default)]
pub struct IntTupleSpace {
    pub arity: usize,
    pub names: Option<Vec<String>>,
}

impl IntTupleSpace {
    pub fn new(arity: usize) -> Self {
        IntTupleSpace { arity, names: None }
    }

    pub fn named(names: Vec<String>) -> Self {
        IntTupleSpace {
            arity: names.len(),
            names: Some(names),
        }
    }
}

impl PartialEq for IntTupleSpace {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity
    }
}

impl Eq for IntTupleSpace {}

#[derive(Clone, Debug)]
pub struct IntRelation {
    in_space: IntTupleSpace,
    out_space: IntTupleSpace,
    conjuncts: Vec<Conjunct>,
}

impl IntRelation {
    /// Build from conjuncts over `n_in + n_out` visible variables.
    pub fn from_conjuncts(
        in_space: IntTupleSpace,
        out_space: IntTupleSpace,
        conjuncts: Vec<Conjunct>,
    ) -> Self {
        let nv = in_space.arity + out_space.arity;
        for c in &conjuncts {
            assert_eq!(c.n_visible(), nv, "conjunct has wrong visible arity");
        }
        IntRelation {
            in_space,
            out_space,
            conjuncts,
        }
    }

    pub fn empty(n_in: usize, n_out: usize) -> Self {
        Self::from_conjuncts(IntTupleSpace::new(n_in), IntTupleSpace::new(n_out), vec![])
    }

    pub fn universe(n_in: usize, n_out: usize) -> Self {
        Self::from_conjuncts(
            IntTupleSpace::new(n_in),
            IntTupleSpace::new(n_out),
            vec![Conjunct::universe(n_in + n_out, 0)],
        )
    }

    pub fn empty_set(arity: usize) -> Self {
        Self::empty(arity, 0)
    }

    pub fn universe_set(arity: usize) -> Self {
        Self::universe(arity, 0)
    }

    /// `{[x] : lo_i <= x_i <= hi_i}`
    pub fn box_set(bounds: &[(i64, i64)]) -> Self {
        let n = bounds.len();
        let mut c = Conjunct::universe(n, 0);
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            c.add(Constraint::Ge(LinExpr::var(n, i).add_constant(&BigInt::from(-lo))));
            c.add(Constraint::Ge(LinExpr::var(n, i).neg().add_constant(&BigInt::from(hi))));
        }
        Self::from_conjuncts(IntTupleSpace::new(n), IntTupleSpace::new(0), vec![c])
    }

    /// The single-point set `{[p]}`.
    pub fn point_set(p: &[BigInt]) -> Self {
        let n = p.len();
        let mut c = Conjunct::universe(n, 0);
        for (i, v) in p.iter().enumerate() {
            c.add(Constraint::Eq(LinExpr::var(n, i).add_constant(&-v)));
        }
        Self::from_conjuncts(IntTupleSpace::new(n), IntTupleSpace::new(0), vec![c])
    }

    pub fn in_space(&self) -> &IntTupleSpace {
        &self.in_space
    }

    pub fn out_space(&self) -> &IntTupleSpace {
        &self.out_space
    }

    pub fn n_in(&self) -> usize {
        self.in_space.arity
    }

    pub fn n_out(&self) -> usize {
        self.out_space.arity
    }

    pub fn is_set(&self) -> bool {
        self.out_space.arity == 0
    }

    pub fn conjuncts(&self) -> &[Conjunct] {
        &self.conjuncts
    }

    pub fn with_names(mut self, in_names: Option<Vec<String>>, out_names: Option<Vec<String>>) -> Self {
        if let Some(n) = in_names {
            if n.len() == self.in_space.arity {
                self.in_space.names = Some(n);
            }
        }
        if let Some(n) = out_names {
            if n.len() == self.out_space.arity {
                self.out_space.names = Some(n);
            }
        }
        self
    }

    fn n_vis(&self) -> usize {
        self.n_in() + self.n_out()
    }

    fn same_space(&self, other: &IntRelation, what: &str) -> Result<(), RelError> {
        if self.n_in() != other.n_in() || self.n_out() != other.n_out() {
            return Err(RelError::SpaceMismatch(format!(
                "{what}: [{}] -> [{}] vs [{}] -> [{}]",
                self.n_in(),
                self.n_out(),
                other.n_in(),
                other.n_out()
            )));
        }
        Ok(())
    }

    /// Eliminate all existentials, normalize, and drop conjuncts that
    /// normalization refutes. Does not run full emptiness tests.
    pub fn simplify(&self, budget: &Budget) -> Result<IntRelation, RelError> {
        let mut out = Vec::new();
        for c in &self.conjuncts {
            for mut p in c.project(budget)? {
                if p.reduce_by_equalities() && !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        Ok(IntRelation {
            in_space: self.in_space.clone(),
            out_space: self.out_space.clone(),
            conjuncts: out,
        })
    }

    /// Like [`simplify`](Self::simplify) but also removes infeasible conjuncts.
    pub fn prune(&self, budget: &Budget) -> Result<IntRelation, RelError> {
        let s = self.simplify(budget)?;
        let mut conjuncts = Vec::with_capacity(s.conjuncts.len());
        for c in s.conjuncts {
            if c.is_feasible(budget)? {
                conjuncts.push(c);
            }
        }
        Ok(IntRelation { conjuncts, ..s })
    }

    pub fn union(&self, other: &IntRelation) -> Result<IntRelation, RelError> {
        self.same_space(other, "union")?;
        let mut conjuncts = self.conjuncts.clone();
        for c in &other.conjuncts {
            if !conjuncts.contains(c) {
                conjuncts.push(c.clone());
            }
        }
        Ok(IntRelation {
            in_space: self.in_space.clone(),
            out_space: self.out_space.clone(),
            conjuncts,
        })
    }

    pub fn intersect(&self, other: &IntRelation) -> Result<IntRelation, RelError> {
        self.intersect_with(other, &Budget::default())
    }

    pub fn intersect_with(&self, other: &IntRelation, budget: &Budget) -> Result<IntRelation, RelError> {
        self.same_space(other, "intersect")?;
        let mut conjuncts = Vec::new();
        for a in &self.conjuncts {
            for b in &other.conjuncts {
                let mut c = a.conjoin(b);
                if c.n_exist == 0 {
                    if c.reduce_by_equalities() && !conjuncts.contains(&c) {
                        conjuncts.push(c);
                    }
                } else {
                    for mut p in c.project(budget)? {
                        if p.reduce_by_equalities() && !conjuncts.contains(&p) {
                            conjuncts.push(p);
                        }
                    }
                }
            }
        }
        Ok(IntRelation {
            in_space: self.in_space.clone(),
            out_space: self.out_space.clone(),
            conjuncts,
        })
    }

    pub fn is_empty(&self) -> Result<bool, RelError> {
        self.is_empty_with(&Budget::default())
    }

    pub fn is_empty_with(&self, budget: &Budget) -> Result<bool, RelError> {
        for c in &self.conjuncts {
            if c.is_feasible(budget)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn difference(&self, other: &IntRelation) -> Result<IntRelation, RelError> {
        self.difference_with(other, &Budget::default())
    }

    /// `self ∖ other`. The subtrahend is made quantifier-free first; each of its
    /// conjuncts is negated constraint by constraint into a disjoint union.
    pub fn difference_with(&self, other: &IntRelation, budget: &Budget) -> Result<IntRelation, RelError> {
        self.same_space(other, "difference")?;
        let minuend = self.prune(budget)?;
        let subtrahend = other.prune(budget)?;
        let mut pieces: Vec<Conjunct> = minuend.conjuncts;
        for b in &subtrahend.conjuncts {
            let negs = b.negated_constraints();
            let positives = b.constraints();
            let mut next = Vec::new();
            for a in pieces {
                if !disjoint_hint(&a, b) {
                    // a ∖ b = ⋃_k (a ∧ c_1 ∧ … ∧ c_{k-1} ∧ ¬c_k)
                    let mut prefix = a.clone();
                    let mut neg_iter = 0usize;
                    for pos in &positives {
                        let n_negs = match pos {
                            Constraint::Eq(_) => 2,
                            Constraint::Ge(_) => 1,
                            Constraint::Cong(_, m) => {
                                let m: usize = m.try_into().unwrap_or(usize::MAX);
                                m - 1
                            }
                        };
                        for neg in &negs[neg_iter..neg_iter + n_negs] {
                            let mut piece = prefix.clone();
                            piece.add(neg.clone());
                            budget.tick(1)?;
                            if piece.normalize() && piece.is_feasible(budget)? {
                                next.push(piece);
                            }
                        }
                        neg_iter += n_negs;
                        prefix.add(pos.clone());
                        if !prefix.normalize() {
                            break;
                        }
                    }
                } else {
                    next.push(a);
                }
            }
            pieces = next;
            if pieces.is_empty() {
                break;
            }
        }
        let mut conjuncts = Vec::with_capacity(pieces.len());
        for mut p in pieces {
            if p.reduce_by_equalities() && !conjuncts.contains(&p) {
                conjuncts.push(p);
            }
        }
        Ok(IntRelation {
            in_space: self.in_space.clone(),
            out_space: self.out_space.clone(),
            conjuncts,
        })
    }

    pub fn is_subset(&self, other: &IntRelation) -> Result<bool, RelError> {
        self.is_subset_with(other, &Budget::default())
    }

    pub fn is_subset_with(&self, other: &IntRelation, budget: &Budget) -> Result<bool, RelError> {
        self.same_space(other, "subset")?;
        for c in &self.conjuncts {
            let single = IntRelation {
                in_space: self.in_space.clone(),
                out_space: self.out_space.clone(),
                conjuncts: vec![c.clone()],
            };
            if !single.difference_with(other, budget)?.is_empty_with(budget)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_equal(&self, other: &IntRelation) -> Result<bool, RelError> {
        self.is_equal_with(other, &Budget::default())
    }

    pub fn is_equal_with(&self, other: &IntRelation, budget: &Budget) -> Result<bool, RelError> {
        self.same_space(other, "is_equal")?;
        Ok(self.is_subset_with(other, budget)? && other.is_subset_with(self, budget)?)
    }

    pub fn inverse(&self) -> IntRelation {
        let (ni, no) = (self.n_in(), self.n_out());
        let map_vis: Vec<usize> = (0..ni).map(|i| no + i).chain(0..no).collect();
        let conjuncts = self
            .conjuncts
            .iter()
            .map(|c| {
                let map: Vec<usize> = map_vis
                    .iter()
                    .copied()
                    .chain(ni + no..c.n_vars)
                    .collect();
                c.embed(c.n_vars, c.n_exist, &map)
            })
            .collect();
        IntRelation {
            in_space: self.out_space.clone(),
            out_space: self.in_space.clone(),
            conjuncts,
        }
    }

    pub fn compose(&self, second: &IntRelation) -> Result<IntRelation, RelError> {
        self.compose_with(second, &Budget::default())
    }

    /// `{a → c | ∃b: (a → b) ∈ self ∧ (b → c) ∈ second}`.
    pub fn compose_with(&self, second: &IntRelation, budget: &Budget) -> Result<IntRelation, RelError> {
        if self.n_out() != second.n_in() {
            return Err(RelError::SpaceMismatch(format!(
                "compose: first has output arity {}, second has input arity {}",
                self.n_out(),
                second.n_in()
            )));
        }
        let (na, nb, nc) = (self.n_in(), self.n_out(), second.n_out());
        let mut conjuncts = Vec::new();
        for f in &self.conjuncts {
            for s in &second.conjuncts {
                // layout: [a | c | b | f-exist | s-exist]
                let n_exist = nb + f.n_exist + s.n_exist;
                let n_vars = na + nc + n_exist;
                let map_f: Vec<usize> = (0..na)
                    .chain((0..nb).map(|j| na + nc + j))
                    .chain((0..f.n_exist).map(|j| na + nc + nb + j))
                    .collect();
                let map_s: Vec<usize> = (0..nb)
                    .map(|j| na + nc + j)
                    .chain((0..nc).map(|j| na + j))
                    .chain((0..s.n_exist).map(|j| na + nc + nb + f.n_exist + j))
                    .collect();
                let mut c = f.embed(n_vars, n_exist, &map_f);
                let cs = s.embed(n_vars, n_exist, &map_s);
                c.eqs.extend(cs.eqs);
                c.ineqs.extend(cs.ineqs);
                c.congs.extend(cs.congs);
                for mut p in c.project(budget)? {
                    if p.reduce_by_equalities() && !conjuncts.contains(&p) {
                        conjuncts.push(p);
                    }
                }
            }
        }
        Ok(IntRelation {
            in_space: self.in_space.clone(),
            out_space: second.out_space.clone(),
            conjuncts,
        })
    }

    fn project_onto(&self, keep_in: bool, budget: &Budget) -> Result<IntRelation, RelError> {
        let (ni, no) = (self.n_in(), self.n_out());
        let (kept, dropped) = if keep_in { (ni, no) } else { (no, ni) };
        let mut conjuncts = Vec::new();
        for c in &self.conjuncts {
            let n_exist = dropped + c.n_exist;
            let map: Vec<usize> = if keep_in {
                (0..c.n_vars).collect()
            } else {
                (0..ni)
                    .map(|j| no + j)
                    .chain(0..no)
                    .chain(ni + no..c.n_vars)
                    .collect()
            };
            let e = c.embed(c.n_vars, n_exist, &map);
            for mut p in e.project(budget)? {
                if p.reduce_by_equalities() && !conjuncts.contains(&p) {
                    conjuncts.push(p);
                }
            }
        }
        let space = if keep_in {
            self.in_space.clone()
        } else {
            self.out_space.clone()
        };
        debug_assert!(conjuncts.iter().all(|c: &Conjunct| c.n_vars == kept));
        Ok(IntRelation {
            in_space: space,
            out_space: IntTupleSpace::new(0),
            conjuncts,
        })
    }

    pub fn domain(&self) -> Result<IntRelation, RelError> {
        self.domain_with(&Budget::default())
    }

    pub fn domain_with(&self, budget: &Budget) -> Result<IntRelation, RelError> {
        self.project_onto(true, budget)
    }

    pub fn range(&self) -> Result<IntRelation, RelError> {
        self.range_with(&Budget::default())
    }

    pub fn range_with(&self, budget: &Budget) -> Result<IntRelation, RelError> {
        self.project_onto(false, budget)
    }

    /// `{x → x | x ∈ set}`.
    pub fn identity(set: &IntRelation) -> IntRelation {
        let n = set.n_in();
        debug_assert!(set.is_set());
        let conjuncts = set
            .conjuncts
            .iter()
            .map(|c| {
                let n_vars = 2 * n + c.n_exist;
                let map: Vec<usize> = (0..n).chain((0..c.n_exist).map(|j| 2 * n + j)).collect();
                let mut e = c.embed(n_vars, c.n_exist, &map);
                for i in 0..n {
                    let mut eq = LinExpr::zero(n_vars);
                    eq.coeffs[i] = BigInt::one();
                    eq.coeffs[n + i] = -BigInt::one();
                    e.eqs.push(eq);
                }
                e
            })
            .collect();
        IntRelation {
            in_space: set.in_space.clone(),
            out_space: set.in_space.clone(),
            conjuncts,
        }
    }

    /// Lift a set over the input dimensions to a relation with unconstrained outputs.
    fn lift_set(&self, set: &IntRelation, onto_in: bool) -> Result<IntRelation, RelError> {
        let (ni, no) = (self.n_in(), self.n_out());
        let want = if onto_in { ni } else { no };
        if !set.is_set() || set.n_in() != want {
            return Err(RelError::SpaceMismatch(format!(
                "restrict: set of arity {} against dimension count {}",
                set.n_in(),
                want
            )));
        }
        let conjuncts = set
            .conjuncts
            .iter()
            .map(|c| {
                let n_vars = ni + no + c.n_exist;
                let base = if onto_in { 0 } else { ni };
                let map: Vec<usize> = (0..want)
                    .map(|j| base + j)
                    .chain((0..c.n_exist).map(|j| ni + no + j))
                    .collect();
                c.embed(n_vars, c.n_exist, &map)
            })
            .collect();
        Ok(IntRelation {
            in_space: self.in_space.clone(),
            out_space: self.out_space.clone(),
            conjuncts,
        })
    }

    pub fn restrict_domain(&self, set: &IntRelation) -> Result<IntRelation, RelError> {
        self.restrict_domain_with(set, &Budget::default())
    }

    pub fn restrict_domain_with(&self, set: &IntRelation, budget: &Budget) -> Result<IntRelation, RelError> {
        let lifted = self.lift_set(set, true)?;
        self.intersect_with(&lifted, budget)
    }

    pub fn restrict_range(&self, set: &IntRelation) -> Result<IntRelation, RelError> {
        self.restrict_range_with(set, &Budget::default())
    }

    pub fn restrict_range_with(&self, set: &IntRelation, budget: &Budget) -> Result<IntRelation, RelError> {
        let lifted = self.lift_set(set, false)?;
        self.intersect_with(&lifted, budget)
    }

    pub fn apply_to_set(&self, set: &IntRelation) -> Result<IntRelation, RelError> {
        self.apply_to_set_with(set, &Budget::default())
    }

    pub fn apply_to_set_with(&self, set: &IntRelation, budget: &Budget) -> Result<IntRelation, RelError> {
        self.restrict_domain_with(set, budget)?.range_with(budget)
    }

    /// Cartesian product of two sets as a relation `{a → b | a ∈ self, b ∈ other}`.
    pub fn product(&self, other: &IntRelation) -> Result<IntRelation, RelError> {
        if !self.is_set() || !other.is_set() {
            return Err(RelError::SpaceMismatch("product expects two sets".into()));
        }
        let (na, nb) = (self.n_in(), other.n_in());
        let mut conjuncts = Vec::new();
        for a in &self.conjuncts {
            for b in &other.conjuncts {
                let n_exist = a.n_exist + b.n_exist;
                let n_vars = na + nb + n_exist;
                let map_a: Vec<usize> = (0..na)
                    .chain((0..a.n_exist).map(|j| na + nb + j))
                    .collect();
                let map_b: Vec<usize> = (0..nb)
                    .map(|j| na + j)
                    .chain((0..b.n_exist).map(|j| na + nb + a.n_exist + j))
                    .collect();
                let mut c = a.embed(n_vars, n_exist, &map_a);
                let cb = b.embed(n_vars, n_exist, &map_b);
                c.eqs.extend(cb.eqs);
                c.ineqs.extend(cb.ineqs);
                c.congs.extend(cb.congs);
                conjuncts.push(c);
            }
        }
        Ok(IntRelation {
            in_space: self.in_space.clone(),
            out_space: other.in_space.clone(),
            conjuncts,
        })
    }

    /// View a relation as a set over `in ⊕ out`.
    pub fn wrap(&self) -> IntRelation {
        let mut names = None;
        if let (Some(a), Some(b)) = (&self.in_space.names, &self.out_space.names) {
            names = Some(a.iter().chain(b).cloned().collect());
        }
        IntRelation {
            in_space: IntTupleSpace {
                arity: self.n_vis(),
                names,
            },
            out_space: IntTupleSpace::new(0),
            conjuncts: self.conjuncts.clone(),
        }
    }

    /// Split a set over `n_in + n_out` dimensions back into a relation.
    pub fn unwrap_as(&self, n_in: usize) -> Result<IntRelation, RelError> {
        if !self.is_set() || n_in > self.n_in() {
            return Err(RelError::SpaceMismatch("unwrap_as expects a set".into()));
        }
        Ok(IntRelation {
            in_space: IntTupleSpace::new(n_in),
            out_space: IntTupleSpace::new(self.n_in() - n_in),
            conjuncts: self.conjuncts.clone(),
        })
    }

    /// Membership of a point over `in ⊕ out`.
    pub fn contains(&self, point: &[BigInt]) -> Result<bool, RelError> {
        if point.len() != self.n_vis() {
            return Err(RelError::SpaceMismatch("point arity".into()));
        }
        let budget = Budget::default();
        for c in &self.conjuncts {
            if c.n_exist == 0 {
                if c.contains_point(point) {
                    return Ok(true);
                }
                continue;
            }
            let mut fixed = c.clone();
            for (i, v) in point.iter().enumerate() {
                fixed = fixed.fix_variable(i, v);
            }
            if fixed.is_feasible(&budget)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn sample_point(&self) -> Result<Option<Vec<BigInt>>, RelError> {
        self.sample_point_with(&Budget::default())
    }

    /// Some point of the relation (over `in ⊕ out`), or `None` when empty.
    /// Coordinates are fixed one at a time, each chosen from the exact
    /// projection of what remains, preferring values of small magnitude.
    pub fn sample_point_with(&self, budget: &Budget) -> Result<Option<Vec<BigInt>>, RelError> {
        let n = self.n_vis();
        for c in &self.conjuncts {
            if !c.is_feasible(budget)? {
                continue;
            }
            let mut cur = c.clone();
            let mut point = Vec::with_capacity(n);
            for d in 0..n {
                // project onto coordinate d: make d the only visible variable
                let n_vars = cur.n_vars;
                let mut map: Vec<usize> = Vec::with_capacity(n_vars);
                for i in 0..n_vars {
                    map.push(if i == d {
                        0
                    } else if i < d {
                        // already fixed: zero coefficients, park after d
                        1 + i
                    } else {
                        i
                    });
                }
                let one_dim = cur.embed(n_vars, n_vars - 1, &map);
                let parts = one_dim.project(budget)?;
                let mut chosen = None;
                for p in &parts {
                    if let Some(v) = pick_value(p) {
                        chosen = match chosen {
                            None => Some(v),
                            Some(best) => Some(smaller_magnitude(best, v)),
                        };
                    }
                }
                let Some(v) = chosen else {
                    return Err(RelError::Unsupported(
                        "sample point search lost feasibility".into(),
                    ));
                };
                cur = cur.fix_variable(d, &v);
                point.push(v);
            }
            return Ok(Some(point));
        }
        Ok(None)
    }

    /// Canonical text used as a memo key. Equal keys imply equal relations;
    /// the converse does not hold.
    pub fn canonical_key(&self) -> String {
        let mut parts: Vec<String> = self
            .conjuncts
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.normalize();
                c.ineqs.sort();
                format!("{:?}", (c.n_exist, &c.eqs, &c.ineqs, &c.congs))
            })
            .collect();
        parts.sort();
        parts.dedup();
        format!("{}->{}:{}", self.n_in(), self.n_out(), parts.join("|"))
    }
}

fn smaller_magnitude(a: BigInt, b: BigInt) -> BigInt {
    if b.abs() < a.abs() || (b.abs() == a.abs() && b < a) {
        b
    } else {
        a
    }
}

/// Choose a value of small magnitude satisfying a one-variable, quantifier-free conjunct.
fn pick_value(c: &Conjunct) -> Option<BigInt> {
    let mut c = c.clone();
    if !c.normalize() {
        return None;
    }
    let mut lo: Option<BigInt> = None;
    let mut hi: Option<BigInt> = None;
    for e in &c.eqs {
        let a = &e.coeffs[0];
        if a.is_zero() {
            continue;
        }
        if !(&e.constant % a).is_zero() {
            return None;
        }
        let v = -(&e.constant / a);
        lo = Some(lo.map_or(v.clone(), |l| l.max(v.clone())));
        hi = Some(hi.map_or(v.clone(), |h| h.min(v)));
    }
    for e in &c.ineqs {
        let a = &e.coeffs[0];
        if a.is_positive() {
            let v = ceil_div(&-&e.constant, a);
            lo = Some(lo.map_or(v.clone(), |l| l.max(v)));
        } else if a.is_negative() {
            let v = floor_div(&e.constant, &-a);
            hi = Some(hi.map_or(v.clone(), |h| h.min(v)));
        }
    }
    let period = c
        .congs
        .iter()
        .fold(BigInt::one(), |acc, (_, m)| num_integer::lcm(acc, m.clone()));
    let ok = |v: &BigInt| {
        let p = [v.clone()];
        c.congs.iter().all(|(e, m)| modulo(&e.eval(&p), m).is_zero())
            && c.eqs.iter().all(|e| e.eval(&p).is_zero())
    };
    let candidates: Vec<BigInt> = match (&lo, &hi) {
        (Some(l), Some(h)) => {
            if l > h {
                return None;
            }
            // start from the point closest to zero
            let start = if l.is_positive() {
                l.clone()
            } else if h.is_negative() {
                h.clone()
            } else {
                BigInt::zero()
            };
            let mut v = Vec::new();
            let mut k = BigInt::zero();
            while k < period {
                for cand in [&start + &k, &start - &k] {
                    if &cand >= l && &cand <= h {
                        v.push(cand);
                    }
                }
                k += 1;
            }
            v
        }
        (Some(l), None) => {
            let start = if l.is_positive() { l.clone() } else { BigInt::zero() };
            let mut v = Vec::new();
            let mut k = BigInt::zero();
            while k < period {
                v.push(&start + &k);
                let down = &start - &k;
                if &down >= l {
                    v.push(down);
                }
                k += 1;
            }
            v
        }
        (None, Some(h)) => {
            let start = if h.is_negative() { h.clone() } else { BigInt::zero() };
            let mut v = Vec::new();
            let mut k = BigInt::zero();
            while k < period {
                v.push(&start - &k);
                let up = &start + &k;
                if &up <= h {
                    v.push(up);
                }
                k += 1;
            }
            v
        }
        (None, None) => {
            let mut v = Vec::new();
            let mut k = BigInt::zero();
            while k < period {
                v.push(k.clone());
                v.push(-k.clone());
                k += 1;
            }
            v
        }
    };
    candidates.into_iter().find(|v| ok(v))
}

/// Cheap syntactic disjointness test: a single-variable bound pair that cannot
/// meet. Used only to skip work, never to decide.
fn disjoint_hint(a: &Conjunct, b: &Conjunct) -> bool {
    for x in &a.ineqs {
        for y in &b.ineqs {
            let neg = x.coeffs.iter().zip(&y.coeffs).all(|(p, q)| p == &-q);
            if neg && (&x.constant + &y.constant).is_negative() {
                return true;
            }
        }
    }
    false
}

impl PartialEq for IntRelation {
    /// Structural equality of the representation, not set equality.
    fn eq(&self, other: &Self) -> bool {
        self.in_space == other.in_space
            && self.out_space == other.out_space
            && self.conjuncts == other.conjuncts
    }
}

impl fmt::Display for IntRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::render(self))
    }
}

impl std::str::FromStr for IntRelation {
    type Err = RelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_relation(s)
    }
}

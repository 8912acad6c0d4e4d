//! Conjunctions of affine equalities, inequalities and congruences, and the
//! integer decision procedures that operate on them.
//!
//! Variables are laid out as `[visible | existential]`. Emptiness is decided
//! with the Omega test (exact Fourier–Motzkin when a unit coefficient allows it,
//! otherwise real shadow / dark shadow / splinters). Existential projection uses
//! the same machinery and is exact: the result is a union of quantifier-free
//! conjuncts whose divisibility facts are kept as congruences.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::linear::{floor_div, modulo, LinExpr};
use super::{Budget, RelError};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Conjunct {
    pub(crate) n_vars: usize,
    pub(crate) n_exist: usize,
    /// `expr = 0`
    pub(crate) eqs: Vec<LinExpr>,
    /// `expr >= 0`
    pub(crate) ineqs: Vec<LinExpr>,
    /// `expr ≡ 0 (mod m)`, m ≥ 2 after normalization
    pub(crate) congs: Vec<(LinExpr, BigInt)>,
}

/// A single constraint, used when building conjuncts from outside the engine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constraint {
    Eq(LinExpr),
    Ge(LinExpr),
    Cong(LinExpr, BigInt),
}

impl Constraint {
    fn n_vars(&self) -> usize {
        match self {
            Constraint::Eq(e) | Constraint::Ge(e) | Constraint::Cong(e, _) => e.n_vars(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Elim {
    OneSided,
    Exact,
    Inexact,
}

impl Conjunct {
    pub fn universe(n_vars: usize, n_exist: usize) -> Self {
        debug_assert!(n_exist <= n_vars);
        Conjunct {
            n_vars,
            n_exist,
            eqs: Vec::new(),
            ineqs: Vec::new(),
            congs: Vec::new(),
        }
    }

    pub fn new(n_vars: usize, n_exist: usize, constraints: Vec<Constraint>) -> Self {
        let mut c = Self::universe(n_vars, n_exist);
        for k in constraints {
            assert_eq!(k.n_vars(), n_vars, "constraint over wrong number of variables");
            c.add(k);
        }
        c
    }

    /// The canonical contradiction `-1 >= 0`.
    pub fn empty(n_vars: usize) -> Self {
        let mut c = Self::universe(n_vars, 0);
        c.ineqs.push(LinExpr::constant(n_vars, -1));
        c
    }

    pub fn add(&mut self, k: Constraint) {
        match k {
            Constraint::Eq(e) => self.eqs.push(e),
            Constraint::Ge(e) => self.ineqs.push(e),
            Constraint::Cong(e, m) => {
                let m = m.abs();
                if m.is_zero() {
                    self.eqs.push(e);
                } else if !m.is_one() {
                    self.congs.push((e, m));
                }
            }
        }
    }

    pub fn n_visible(&self) -> usize {
        self.n_vars - self.n_exist
    }

    pub fn n_exist(&self) -> usize {
        self.n_exist
    }

    pub fn equalities(&self) -> &[LinExpr] {
        &self.eqs
    }

    pub fn inequalities(&self) -> &[LinExpr] {
        &self.ineqs
    }

    pub fn congruences(&self) -> &[(LinExpr, BigInt)] {
        &self.congs
    }

    pub fn constraint_count(&self) -> usize {
        self.eqs.len() + self.ineqs.len() + self.congs.len()
    }

    fn all_exprs_mut(&mut self) -> impl Iterator<Item = &mut LinExpr> {
        self.eqs
            .iter_mut()
            .chain(self.ineqs.iter_mut())
            .chain(self.congs.iter_mut().map(|(e, _)| e))
    }

    /// Append `extra` fresh existential columns.
    pub(crate) fn add_existentials(&mut self, extra: usize) {
        for e in self.all_exprs_mut() {
            e.extend(extra);
        }
        self.n_vars += extra;
        self.n_exist += extra;
    }

    /// Move into a space of `n_vars` variables (of which the last `n_exist` are
    /// existential), sending column `i` to `map[i]`.
    pub(crate) fn embed(&self, n_vars: usize, n_exist: usize, map: &[usize]) -> Conjunct {
        debug_assert_eq!(map.len(), self.n_vars);
        Conjunct {
            n_vars,
            n_exist,
            eqs: self.eqs.iter().map(|e| e.remap(n_vars, map)).collect(),
            ineqs: self.ineqs.iter().map(|e| e.remap(n_vars, map)).collect(),
            congs: self
                .congs
                .iter()
                .map(|(e, m)| (e.remap(n_vars, map), m.clone()))
                .collect(),
        }
    }

    /// Conjunction of two conjuncts over the same visible space. Existentials
    /// of both are kept, side by side.
    pub(crate) fn conjoin(&self, other: &Conjunct) -> Conjunct {
        let nv = self.n_visible();
        debug_assert_eq!(nv, other.n_visible());
        let n_exist = self.n_exist + other.n_exist;
        let n_vars = nv + n_exist;
        let map_a: Vec<usize> = (0..self.n_vars).collect();
        let map_b: Vec<usize> = (0..nv)
            .chain((0..other.n_exist).map(|j| nv + self.n_exist + j))
            .collect();
        let mut out = self.embed(n_vars, n_exist, &map_a);
        let b = other.embed(n_vars, n_exist, &map_b);
        out.eqs.extend(b.eqs);
        out.ineqs.extend(b.ineqs);
        out.congs.extend(b.congs);
        out
    }

    /// Membership test for a conjunct without existentials.
    pub(crate) fn contains_point(&self, point: &[BigInt]) -> bool {
        debug_assert_eq!(self.n_exist, 0);
        self.eqs.iter().all(|e| e.eval(point).is_zero())
            && self.ineqs.iter().all(|e| !e.eval(point).is_negative())
            && self
                .congs
                .iter()
                .all(|(e, m)| modulo(&e.eval(point), m).is_zero())
    }

    /// Constraint-local normalization. Returns `false` when a contradiction is
    /// detected; `true` means "not refuted", not "feasible".
    pub(crate) fn normalize(&mut self) -> bool {
        loop {
            // equalities
            let mut eqs: Vec<LinExpr> = Vec::with_capacity(self.eqs.len());
            for mut e in std::mem::take(&mut self.eqs) {
                let g = e.content();
                if g.is_zero() {
                    if !e.constant.is_zero() {
                        return false;
                    }
                    continue;
                }
                if !(&e.constant % &g).is_zero() {
                    return false;
                }
                if !g.is_one() {
                    for c in e.coeffs.iter_mut() {
                        *c /= &g;
                    }
                    e.constant /= &g;
                }
                if e.first_nonzero_sign() < 0 {
                    e = e.neg();
                }
                if !eqs.contains(&e) {
                    eqs.push(e);
                }
            }
            self.eqs = eqs;

            // congruences
            let mut congs: Vec<(LinExpr, BigInt)> = Vec::with_capacity(self.congs.len());
            for (mut e, mut m) in std::mem::take(&mut self.congs) {
                for c in e.coeffs.iter_mut() {
                    *c = modulo(c, &m);
                }
                e.constant = modulo(&e.constant, &m);
                let g = e.content().gcd(&e.constant).gcd(&m);
                if !g.is_one() {
                    for c in e.coeffs.iter_mut() {
                        *c /= &g;
                    }
                    e.constant /= &g;
                    m /= &g;
                }
                if m.is_one() {
                    continue;
                }
                // Σ a_i x_i ≡ -c (mod m) is solvable iff gcd(a, m) | c; here
                // gcd(a, c, m) = 1, so any common factor of a and m refutes it.
                if !e.content().gcd(&m).is_one() {
                    return false;
                }
                let vars: Vec<usize> = e.vars().collect();
                if vars.len() == 1 {
                    // a·x + c ≡ 0  =>  x ≡ -c·a⁻¹
                    let v = vars[0];
                    let inv = mod_inverse(&e.coeffs[v], &m);
                    let r = modulo(&(-&e.constant * inv), &m);
                    e.coeffs[v] = BigInt::one();
                    e.constant = modulo(&(-r), &m);
                }
                // same linear form: f ≡ -c1 (m1) and f ≡ -c2 (m2) need c1 ≡ c2 mod gcd(m1, m2)
                for (x, y) in &congs {
                    if x.coeffs == e.coeffs && !(&x.constant - &e.constant).is_multiple_of(&y.gcd(&m)) {
                        return false;
                    }
                }
                if !congs.iter().any(|(x, y)| x == &e && y == &m) {
                    congs.push((e, m));
                }
            }
            self.congs = congs;

            // inequalities
            let mut bounds: BTreeMap<Vec<BigInt>, BigInt> = BTreeMap::new();
            for mut e in std::mem::take(&mut self.ineqs) {
                let g = e.content();
                if g.is_zero() {
                    if e.constant.is_negative() {
                        return false;
                    }
                    continue;
                }
                if !g.is_one() {
                    for c in e.coeffs.iter_mut() {
                        *c /= &g;
                    }
                    e.constant = floor_div(&e.constant, &g);
                }
                bounds
                    .entry(e.coeffs)
                    .and_modify(|c| {
                        if e.constant < *c {
                            *c = e.constant.clone();
                        }
                    })
                    .or_insert(e.constant);
            }
            self.tighten_with_congruences(&mut bounds);

            let mut new_eq = false;
            let mut taken: Vec<Vec<BigInt>> = Vec::new();
            for (coeffs, c) in &bounds {
                let neg: Vec<BigInt> = coeffs.iter().map(|x| -x).collect();
                if let Some(c2) = bounds.get(&neg) {
                    let s = c + c2;
                    if s.is_negative() {
                        return false;
                    }
                    if s.is_zero() && first_sign(coeffs) > 0 {
                        self.eqs.push(LinExpr::from_parts(coeffs.clone(), c.clone()));
                        taken.push(coeffs.clone());
                        taken.push(neg);
                        new_eq = true;
                    }
                }
            }
            for k in taken {
                bounds.remove(&k);
            }
            self.ineqs = bounds
                .into_iter()
                .map(|(coeffs, c)| LinExpr::from_parts(coeffs, c))
                .collect();
            if !new_eq {
                break;
            }
        }
        self.eqs.sort();
        self.congs.sort();
        true
    }

    /// Round single-variable bounds onto the residue class demanded by a
    /// single-variable congruence (`x ≥ 1, x ≡ 0 mod 2` becomes `x ≥ 2`).
    fn tighten_with_congruences(&self, bounds: &mut BTreeMap<Vec<BigInt>, BigInt>) {
        for (e, m) in &self.congs {
            let vars: Vec<usize> = e.vars().collect();
            if vars.len() != 1 || !e.coeffs[vars[0]].is_one() {
                continue;
            }
            let v = vars[0];
            let r = modulo(&(-&e.constant), m);
            let mut unit = vec![BigInt::zero(); self.n_vars];
            unit[v] = BigInt::one();
            if let Some(c) = bounds.get_mut(&unit) {
                // x >= -c
                let lo = -c.clone();
                let lo2 = &lo + modulo(&(&r - &lo), m);
                *c = -lo2;
            }
            unit[v] = -BigInt::one();
            if let Some(c) = bounds.get_mut(&unit) {
                // x <= c
                let hi = c.clone();
                *c = &hi - modulo(&(&hi - &r), m);
            }
        }
    }

    fn apply_substitution(&mut self, v: usize, repl: &LinExpr, den: &BigInt) {
        for e in self.eqs.iter_mut().chain(self.ineqs.iter_mut()) {
            if !e.coeffs[v].is_zero() {
                *e = e.substitute_scaled(v, repl, den);
            }
        }
        for (e, m) in self.congs.iter_mut() {
            if !e.coeffs[v].is_zero() {
                *e = e.substitute_scaled(v, repl, den);
                *m *= den;
            }
        }
    }

    /// Eliminate one existential (column ≥ `first_elim`) using the equality
    /// `eq`, which has already been removed from `self.eqs`. Returns `false`
    /// on contradiction.
    fn eliminate_with_equality(&mut self, mut eq: LinExpr, first_elim: usize) -> bool {
        loop {
            let g = eq.content();
            if g.is_zero() {
                return eq.constant.is_zero();
            }
            if !(&eq.constant % &g).is_zero() {
                return false;
            }
            if !g.is_one() {
                for c in eq.coeffs.iter_mut() {
                    *c /= &g;
                }
                eq.constant /= &g;
            }
            let elim: Vec<usize> = eq.vars().filter(|&i| i >= first_elim).collect();
            if elim.is_empty() {
                self.eqs.push(eq);
                return true;
            }
            if let Some(&v) = elim.iter().find(|&&i| eq.coeffs[i].abs().is_one()) {
                // c·v + rest = 0 with c = ±1  =>  v = -c·rest
                let c = eq.coeffs[v].clone();
                let mut rest = eq.clone();
                rest.coeffs[v] = BigInt::zero();
                let repl = rest.scale(&-c);
                self.apply_substitution(v, &repl, &BigInt::one());
                return true;
            }
            if elim.len() == 1 {
                // c·v = -rest with |c| > 1 and rest free of existentials: rest must
                // be divisible by c, and every other constraint is scaled by c.
                let v = elim[0];
                if eq.coeffs[v].is_negative() {
                    eq = eq.neg();
                }
                let c = eq.coeffs[v].clone();
                let mut rest = eq.clone();
                rest.coeffs[v] = BigInt::zero();
                let repl = rest.neg();
                self.apply_substitution(v, &repl, &c);
                self.congs.push((rest, c));
                return true;
            }
            // Unimodular column change shrinking coefficients (Euclid step):
            // x_k := t - Σ q_i x_i - q_0 over the other existentials.
            let k = *elim
                .iter()
                .min_by(|&&a, &&b| eq.coeffs[a].abs().cmp(&eq.coeffs[b].abs()))
                .unwrap();
            if eq.coeffs[k].is_negative() {
                eq = eq.neg();
            }
            let ak = eq.coeffs[k].clone();
            let q: Vec<(usize, BigInt)> = elim
                .iter()
                .filter(|&&i| i != k)
                .map(|&i| (i, floor_div(&eq.coeffs[i], &ak)))
                .collect();
            let q0 = floor_div(&eq.constant, &ak);
            let shift = |e: &mut LinExpr| {
                let ck = e.coeffs[k].clone();
                if ck.is_zero() {
                    return;
                }
                for (i, qi) in &q {
                    e.coeffs[*i] -= &ck * qi;
                }
                e.constant -= &ck * &q0;
            };
            shift(&mut eq);
            for e in self.all_exprs_mut() {
                shift(e);
            }
        }
    }

    /// Turn every congruence that mentions an existential into an equality
    /// with a fresh existential multiplier.
    fn congruences_to_equalities(&mut self, first_elim: usize) {
        let (with, without): (Vec<_>, Vec<_>) = std::mem::take(&mut self.congs)
            .into_iter()
            .partition(|(e, _)| e.vars().any(|i| i >= first_elim));
        self.congs = without;
        if with.is_empty() {
            return;
        }
        let base = self.n_vars;
        self.add_existentials(with.len());
        for (j, (mut e, m)) in with.into_iter().enumerate() {
            e.extend(self.n_vars - e.n_vars());
            e.coeffs[base + j] = -m;
            self.eqs.push(e);
        }
    }

    fn choose_variable(&self, first_elim: usize) -> Option<(usize, Elim)> {
        let mut best: Option<(usize, Elim, usize)> = None;
        for v in first_elim..self.n_vars {
            let mut lowers = 0usize;
            let mut uppers = 0usize;
            let mut unit_lower = true;
            let mut unit_upper = true;
            for e in &self.ineqs {
                let c = &e.coeffs[v];
                if c.is_positive() {
                    lowers += 1;
                    unit_lower &= c.is_one();
                } else if c.is_negative() {
                    uppers += 1;
                    unit_upper &= (-c).is_one();
                }
            }
            if lowers + uppers == 0 {
                continue;
            }
            let kind = if lowers == 0 || uppers == 0 {
                Elim::OneSided
            } else if unit_lower || unit_upper {
                Elim::Exact
            } else {
                Elim::Inexact
            };
            let rank = match kind {
                Elim::OneSided => 0,
                Elim::Exact => 1,
                Elim::Inexact => 2,
            };
            let cost = lowers * uppers;
            let better = match best {
                None => true,
                Some((_, bk, bc)) => {
                    let br = match bk {
                        Elim::OneSided => 0,
                        Elim::Exact => 1,
                        Elim::Inexact => 2,
                    };
                    (rank, cost) < (br, bc)
                }
            };
            if better {
                best = Some((v, kind, cost));
            }
        }
        best.map(|(v, k, _)| (v, k))
    }

    /// Fourier–Motzkin on `v` (which must occur only in inequalities). With
    /// `dark` set, produces the Omega dark shadow instead of the real shadow.
    fn eliminate_inequalities(&self, v: usize, dark: bool) -> Conjunct {
        let mut out = Conjunct {
            n_vars: self.n_vars,
            n_exist: self.n_exist,
            eqs: self.eqs.clone(),
            ineqs: Vec::new(),
            congs: self.congs.clone(),
        };
        let mut lowers = Vec::new();
        let mut uppers = Vec::new();
        for e in &self.ineqs {
            let c = &e.coeffs[v];
            if c.is_positive() {
                lowers.push(e);
            } else if c.is_negative() {
                uppers.push(e);
            } else {
                out.ineqs.push(e.clone());
            }
        }
        for l in &lowers {
            let b = l.coeffs[v].clone();
            for u in &uppers {
                let a = -u.coeffs[v].clone();
                // a·l + b·u eliminates v
                let mut e = l.combine(&a, u, &b);
                e.coeffs[v] = BigInt::zero();
                if dark {
                    e.constant -= (&a - 1) * (&b - 1);
                }
                out.ineqs.push(e);
            }
        }
        out
    }

    /// Omega splinters for `v`: one conjunct per lower bound `b·v ≥ L` and
    /// offset `j`, adding `b·v = L + j`.
    fn splinters(&self, v: usize) -> Vec<Conjunct> {
        let amax = self
            .ineqs
            .iter()
            .filter(|e| e.coeffs[v].is_negative())
            .map(|e| -e.coeffs[v].clone())
            .max()
            .unwrap_or_else(BigInt::one);
        let mut out = Vec::new();
        for l in self.ineqs.iter().filter(|e| e.coeffs[v].is_positive()) {
            let b = &l.coeffs[v];
            let top = floor_div(&(&amax * b - &amax - b), &amax);
            let mut j = BigInt::zero();
            while j <= top {
                let mut s = self.clone();
                s.eqs.push(l.add_constant(&-&j));
                out.push(s);
                j += 1;
            }
        }
        out
    }

    /// Integer feasibility, treating every variable as existentially bound.
    pub(crate) fn is_feasible(&self, budget: &Budget) -> Result<bool, RelError> {
        let mut c = self.clone();
        c.n_exist = c.n_vars;
        c.congruences_to_equalities(0);
        feasible_rec(c, budget)
    }

    /// Exact elimination of all existentials. The union of the returned
    /// conjuncts (none of which has existentials) equals `self`.
    pub(crate) fn project(&self, budget: &Budget) -> Result<Vec<Conjunct>, RelError> {
        let mut out = Vec::new();
        let mut stack = vec![self.clone()];
        while let Some(mut c) = stack.pop() {
            budget.tick(1 + c.ineqs.len() as u64)?;
            if !c.normalize() {
                continue;
            }
            let first = c.n_visible();
            if c.congs.iter().any(|(e, _)| e.vars().any(|i| i >= first)) {
                c.congruences_to_equalities(first);
                stack.push(c);
                continue;
            }
            if let Some(i) = c.eqs.iter().position(|e| e.vars().any(|i| i >= first)) {
                let eq = c.eqs.swap_remove(i);
                if c.eliminate_with_equality(eq, first) {
                    stack.push(c);
                }
                continue;
            }
            c.drop_unused_existentials();
            if c.n_exist == 0 {
                out.push(c);
                continue;
            }
            let (v, kind) = c
                .choose_variable(c.n_visible())
                .expect("existential present but unused");
            match kind {
                Elim::OneSided | Elim::Exact => stack.push(c.eliminate_inequalities(v, false)),
                Elim::Inexact => {
                    stack.push(c.eliminate_inequalities(v, true));
                    stack.extend(c.splinters(v));
                }
            }
        }
        Ok(out)
    }

    fn drop_unused_existentials(&mut self) {
        let first = self.n_visible();
        let used: Vec<bool> = (0..self.n_vars)
            .map(|i| {
                i < first
                    || self.eqs.iter().any(|e| !e.coeffs[i].is_zero())
                    || self.ineqs.iter().any(|e| !e.coeffs[i].is_zero())
                    || self.congs.iter().any(|(e, _)| !e.coeffs[i].is_zero())
            })
            .collect();
        if used.iter().all(|&u| u) {
            return;
        }
        let mut map = vec![0usize; self.n_vars];
        let mut next = 0;
        for (i, &u) in used.iter().enumerate() {
            if u {
                map[i] = next;
                next += 1;
            }
        }
        let removed = self.n_vars - next;
        // remap drops unused columns because their coefficients are zero
        let map: Vec<usize> = map.into_iter().map(|m| m.min(next.saturating_sub(1))).collect();
        let n_exist = self.n_exist - removed;
        *self = self.embed(next, n_exist, &map);
    }

    /// Gauss–Jordan style clean-up of a quantifier-free conjunct: every
    /// equality with a unit-coefficient pivot eliminates that pivot from all
    /// other constraints. The pivot is the highest-index unit variable.
    pub(crate) fn reduce_by_equalities(&mut self) -> bool {
        for _ in 0..8 {
            if !self.normalize() {
                return false;
            }
            let before = self.eqs.clone();
            for i in 0..self.eqs.len() {
                let eq = self.eqs[i].clone();
                let Some(v) = (0..self.n_vars).rev().find(|&v| eq.coeffs[v].abs().is_one()) else {
                    continue;
                };
                let c = eq.coeffs[v].clone();
                let mut rest = eq;
                rest.coeffs[v] = BigInt::zero();
                let repl = rest.scale(&-c);
                let one = BigInt::one();
                for (j, e) in self.eqs.iter_mut().enumerate() {
                    if j != i && !e.coeffs[v].is_zero() {
                        *e = e.substitute_scaled(v, &repl, &one);
                    }
                }
                for e in self.ineqs.iter_mut() {
                    if !e.coeffs[v].is_zero() {
                        *e = e.substitute_scaled(v, &repl, &one);
                    }
                }
                for (e, _) in self.congs.iter_mut() {
                    if !e.coeffs[v].is_zero() {
                        *e = e.substitute_scaled(v, &repl, &one);
                    }
                }
            }
            if !self.normalize() {
                return false;
            }
            if self.eqs == before {
                break;
            }
        }
        true
    }

    /// Fix variable `v` to `value` (the column stays, with zero coefficients).
    pub(crate) fn fix_variable(&self, v: usize, value: &BigInt) -> Conjunct {
        let mut c = self.clone();
        for e in c.all_exprs_mut() {
            *e = e.fix(v, value);
        }
        c
    }

    /// Negation of a quantifier-free conjunct as a list of conjuncts, one per
    /// violated constraint (and per complementary residue for congruences).
    pub(crate) fn negated_constraints(&self) -> Vec<Constraint> {
        debug_assert_eq!(self.n_exist, 0);
        let one = BigInt::one();
        let mut out = Vec::new();
        for e in &self.eqs {
            out.push(Constraint::Ge(e.add_constant(&-&one)));
            out.push(Constraint::Ge(e.neg().add_constant(&-&one)));
        }
        for e in &self.ineqs {
            out.push(Constraint::Ge(e.neg().add_constant(&-&one)));
        }
        for (e, m) in &self.congs {
            let mut r = BigInt::one();
            while &r < m {
                out.push(Constraint::Cong(e.add_constant(&-&r), m.clone()));
                r += 1;
            }
        }
        out
    }

    /// The positive constraints as a list, in a fixed order.
    pub(crate) fn constraints(&self) -> Vec<Constraint> {
        self.eqs
            .iter()
            .cloned()
            .map(Constraint::Eq)
            .chain(self.ineqs.iter().cloned().map(Constraint::Ge))
            .chain(
                self.congs
                    .iter()
                    .cloned()
                    .map(|(e, m)| Constraint::Cong(e, m)),
            )
            .collect()
    }
}

fn feasible_rec(mut c: Conjunct, budget: &Budget) -> Result<bool, RelError> {
    loop {
        budget.tick(1 + c.ineqs.len() as u64)?;
        if !c.normalize() {
            return Ok(false);
        }
        if let Some(eq) = c.eqs.pop() {
            if !c.eliminate_with_equality(eq, 0) {
                return Ok(false);
            }
            continue;
        }
        if c.ineqs.is_empty() {
            // remaining congruences are variable-free and were checked by normalize
            return Ok(true);
        }
        let Some((v, kind)) = c.choose_variable(0) else {
            return Ok(true);
        };
        match kind {
            Elim::OneSided => {
                c.ineqs.retain(|e| e.coeffs[v].is_zero());
            }
            Elim::Exact => {
                c = c.eliminate_inequalities(v, false);
            }
            Elim::Inexact => {
                if !feasible_rec(c.eliminate_inequalities(v, false), budget)? {
                    return Ok(false);
                }
                if feasible_rec(c.eliminate_inequalities(v, true), budget)? {
                    return Ok(true);
                }
                for s in c.splinters(v) {
                    if feasible_rec(s, budget)? {
                        return Ok(true);
                    }
                }
                return Ok(false);
            }
        }
    }
}

fn first_sign(coeffs: &[BigInt]) -> i32 {
    for c in coeffs {
        if c.is_positive() {
            return 1;
        }
        if c.is_negative() {
            return -1;
        }
    }
    0
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    modulo(&e.x, m)
}

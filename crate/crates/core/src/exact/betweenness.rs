//! The betweenness formulation of a window subproblem.
//!
//! Variable `x(i, k, j)` (with `i < j`) is one when facility `k` lies between
//! `i` and `j`. Each unordered triple contributes three variables, exactly one
//! of which is set. The two window dummies (length zero) get indices `ws`
//! (before) and `ws + 1` (after).

use std::fmt;

use crate::error::SolveError;
use crate::instance::HalfUnits;
use crate::window::WindowSubproblem;

/// A dense 0/1 betweenness cube over `m` facilities, symmetric in the two outer indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetweennessAssignment {
    m: usize,
    cube: Vec<bool>,
}

impl BetweennessAssignment {
    pub fn empty(m: usize) -> Self {
        BetweennessAssignment { m, cube: vec![false; m * m * m] }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Whether `k` lies between `i` and `j`.
    pub fn get(&self, i: usize, k: usize, j: usize) -> bool {
        self.cube[(i * self.m + k) * self.m + j]
    }

    pub fn set(&mut self, i: usize, k: usize, j: usize, v: bool) {
        let m = self.m;
        self.cube[(i * m + k) * m + j] = v;
        self.cube[(j * m + k) * m + i] = v;
    }

    /// Number of facilities between `i` and `j`.
    pub fn between(&self, i: usize, j: usize) -> usize {
        (0..self.m).filter(|&k| k != i && k != j && self.get(i, k, j)).count()
    }
}

/// Betweenness cube of a sequence of the indices `0..m`.
pub fn encode_order(order: &[usize], m: usize) -> BetweennessAssignment {
    let mut x = BetweennessAssignment::empty(m);
    for a in 0..order.len() {
        for b in a + 2..order.len() {
            for &k in &order[a + 1..b] {
                x.set(order[a], k, order[b], true);
            }
        }
    }
    x
}

/// Recovers the position of every facility from a betweenness cube over
/// `0..ws`. Entry `a` of the result is the rank of facility `a`; the order is
/// determined up to reversal.
pub fn create_order(x: &BetweennessAssignment, ws: usize) -> Result<Vec<usize>, SolveError> {
    if ws <= 1 {
        return Ok(vec![0; ws]);
    }
    let mut start = 0;
    let mut most = None;
    for i in 0..ws - 1 {
        for j in i + 1..ws {
            let b = x.between(i, j);
            if most.map_or(true, |m| b > m) {
                most = Some(b);
                start = i;
            }
        }
    }
    let mut rank = vec![0; ws];
    for (j, r) in rank.iter_mut().enumerate() {
        if j != start {
            *r = x.between(start, j) + 1;
        }
    }
    let mut seen = vec![false; ws];
    for &r in &rank {
        if r >= ws || seen[r] {
            return Err(SolveError::Integrity);
        }
        seen[r] = true;
    }
    Ok(rank)
}

/// One binary variable `x(i, k, j)`, `i < j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var {
    pub i: usize,
    pub k: usize,
    pub j: usize,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x_{}_{}_{}", self.i + 1, self.k + 1, self.j + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Sense::Le => lhs <= rhs,
            Sense::Ge => lhs >= rhs,
            Sense::Eq => lhs == rhs,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowFamily {
    /// One of every three facilities lies between the other two.
    ExactlyOne,
    /// No facility is between all three pairs of a triple.
    AtMostTwo,
    /// Three families excluding a facility between just one pair of a triple.
    Triangle(u8),
    /// All window facilities lie between the two dummies.
    Dummy,
    /// The model value must beat the incumbent.
    Improvement,
}

/// One linear constraint over variable indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Row {
    pub name: String,
    pub family: RowFamily,
    pub terms: Vec<(usize, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

impl Row {
    pub fn lhs(&self, x: &[bool]) -> i64 {
        self.terms.iter().filter(|(v, _)| x[*v]).map(|(_, c)| c).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetweennessModel {
    /// Facilities in the model, dummies included.
    pub m: usize,
    /// Number of dummies (0 or 2); they are the last indices.
    pub dummies: usize,
    pub vars: Vec<Var>,
    /// Coefficient `w_ij * len_k` of each variable, in whole units.
    pub objective: Vec<i64>,
    /// Order-independent half-length part of the objective.
    pub objective_constant: HalfUnits,
    pub rows: Vec<Row>,
    /// Boundary offset removed from the subproblem.
    pub min_wd: HalfUnits,
    /// Cost outside the window.
    pub fixed: HalfUnits,
    index: Vec<usize>,
}

impl BetweennessModel {
    /// Index of `x(a, k, b)` in either orientation of the outer pair.
    pub fn var(&self, a: usize, k: usize, b: usize) -> usize {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        self.index[(i * self.m + k) * self.m + j]
    }

    /// Variable vector of a betweenness cube.
    pub fn vector(&self, x: &BetweennessAssignment) -> Vec<bool> {
        self.vars.iter().map(|v| x.get(v.i, v.k, v.j)).collect()
    }

    pub fn is_feasible(&self, x: &[bool]) -> bool {
        self.rows.iter().all(|r| r.sense.holds(r.lhs(x), r.rhs))
    }

    /// Objective including the separated constant, excluding `min_wd`.
    pub fn value(&self, x: &[bool]) -> HalfUnits {
        let part: i64 = self.objective.iter().zip(x).filter(|(_, &b)| b).map(|(c, _)| c).sum();
        self.objective_constant + HalfUnits::from_units(part)
    }

    pub fn count(&self, family: RowFamily) -> usize {
        self.rows.iter().filter(|r| r.family == family).count()
    }

    fn new(lengths: Vec<i64>, weights: Vec<Vec<i64>>, dummies: usize) -> Self {
        let m = lengths.len();
        let mut vars = Vec::new();
        let mut index = vec![usize::MAX; m * m * m];
        for i in 0..m {
            for j in i + 1..m {
                for k in (0..m).filter(|&k| k != i && k != j) {
                    index[(i * m + k) * m + j] = vars.len();
                    vars.push(Var { i, k, j });
                }
            }
        }
        let objective = vars.iter().map(|v| weights[v.i][v.j] * lengths[v.k]).collect();
        let mut constant = 0;
        for i in 0..m {
            for j in i + 1..m {
                constant += weights[i][j] * (lengths[i] + lengths[j]);
            }
        }
        let mut model = BetweennessModel {
            m,
            dummies,
            vars,
            objective,
            objective_constant: HalfUnits(constant),
            rows: Vec::new(),
            min_wd: HalfUnits::ZERO,
            fixed: HalfUnits::ZERO,
            index,
        };
        model.add_ordering_rows();
        model
    }

    fn add_ordering_rows(&mut self) {
        let m = self.m;
        let one = |n: String, family, terms: Vec<(usize, i64)>, sense, rhs| Row { name: n, family, terms, sense, rhs };
        let mut rows = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                for k in j + 1..m {
                    let t = format!("{}_{}_{}", i + 1, j + 1, k + 1);
                    rows.push(one(
                        format!("c1_{t}"),
                        RowFamily::ExactlyOne,
                        vec![(self.var(i, k, j), 1), (self.var(i, j, k), 1), (self.var(j, i, k), 1)],
                        Sense::Eq,
                        1,
                    ));
                }
            }
        }
        for i in 0..m {
            for j in i + 1..m {
                for k in j + 1..m {
                    for h in k + 1..m {
                        rows.push(one(
                            format!("c2_{}_{}_{}_{}", i + 1, j + 1, k + 1, h + 1),
                            RowFamily::AtMostTwo,
                            vec![(self.var(i, h, j), 1), (self.var(i, h, k), 1), (self.var(j, h, k), 1)],
                            Sense::Le,
                            2,
                        ));
                    }
                }
            }
        }
        for (fam, signs) in [(3u8, [1, 1, -1]), (4, [1, -1, 1]), (5, [-1, 1, 1])] {
            for i in 0..m {
                for j in i + 1..m {
                    for k in j + 1..m {
                        for h in (0..m).filter(|&h| h != i && h != j && h != k) {
                            let vs = [self.var(i, h, j), self.var(i, h, k), self.var(j, h, k)];
                            rows.push(one(
                                format!("c{fam}_{}_{}_{}_{}", i + 1, j + 1, k + 1, h + 1),
                                RowFamily::Triangle(fam),
                                vs.into_iter().zip(signs).collect(),
                                Sense::Ge,
                                0,
                            ));
                        }
                    }
                }
            }
        }
        self.rows = rows;
    }
}

/// Builds the model of a window subproblem over its `ws` facilities plus the two dummies.
pub fn build_betweenness_model(sub: &WindowSubproblem, with_improvement_row: bool) -> BetweennessModel {
    let ws = sub.size();
    let mut lengths = sub.lengths.clone();
    lengths.extend([0, 0]);
    let mut model = BetweennessModel::new(lengths, sub.ww(), 2);
    model.min_wd = sub.min_wd;
    model.fixed = sub.fixed;
    let (b, a) = (ws, ws + 1);
    model.rows.push(Row {
        name: "dummy".into(),
        family: RowFamily::Dummy,
        terms: (0..ws).map(|k| (model.var(b, k, a), 1)).collect(),
        sense: Sense::Eq,
        rhs: ws as i64,
    });
    if with_improvement_row {
        // fixed + min_wd + constant + 2 * sum < incumbent, all in half-units
        let slack = sub.incumbent.0 - 1 - sub.fixed.0 - sub.min_wd.0 - model.objective_constant.0;
        let terms = model
            .objective
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(v, &c)| (v, c))
            .collect();
        model.rows.push(Row {
            name: "improve".into(),
            family: RowFamily::Improvement,
            terms,
            sense: Sense::Le,
            rhs: slack.div_euclid(2),
        });
    }
    model
}

/// The model of `m` free facilities without dummies or improvement row.
pub fn build_free_model(lengths: &[i64], weights: &[Vec<i64>]) -> BetweennessModel {
    BetweennessModel::new(lengths.to_vec(), weights.to_vec(), 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{objective, Layout, WindowBounds};
    use crate::exact::solve_window_dp_unbounded;
    use crate::instance::{generate_random_instance, Instance};
    use crate::window::extract_window_subproblem;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// All feasible vectors, by depth-first assignment of one middle per triple.
    fn feasible_vectors(model: &BetweennessModel) -> Vec<Vec<bool>> {
        let m = model.m;
        let mut triples = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                for k in j + 1..m {
                    triples.push([model.var(i, k, j), model.var(i, j, k), model.var(j, i, k)]);
                }
            }
        }
        let mut triple_of = vec![0; model.vars.len()];
        for (t, vs) in triples.iter().enumerate() {
            for &v in vs {
                triple_of[v] = t;
            }
        }
        let mut checks: Vec<Vec<&Row>> = vec![Vec::new(); triples.len()];
        for r in &model.rows {
            let last = r.terms.iter().map(|(v, _)| triple_of[*v]).max().unwrap_or(0);
            checks[last].push(r);
        }
        let mut out = Vec::new();
        let mut x = vec![false; model.vars.len()];
        fn go(t: usize, triples: &[[usize; 3]], checks: &[Vec<&Row>], x: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
            if t == triples.len() {
                out.push(x.clone());
                return;
            }
            for &v in &triples[t] {
                x[v] = true;
                if checks[t].iter().all(|r| r.sense.holds(r.lhs(x), r.rhs)) {
                    go(t + 1, triples, checks, x, out);
                }
                x[v] = false;
            }
        }
        go(0, &triples, &checks, &mut x, &mut out);
        out
    }

    fn factorial(m: usize) -> usize {
        (1..=m).product()
    }

    fn small_sub(ws: usize, seed: u64) -> (Instance, WindowSubproblem) {
        let n = ws + 4;
        let inst = generate_random_instance(n, (1, 9), (0, 9), seed).unwrap();
        let lay = Layout::random(&inst, &mut ChaCha8Rng::seed_from_u64(seed));
        let sub = extract_window_subproblem(&inst, &lay, WindowBounds::new(2, 1 + ws, n).unwrap()).unwrap();
        (inst, sub)
    }

    #[test]
    fn encode_and_create_order_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for ws in 1..9 {
            let mut order: Vec<usize> = (0..ws).collect();
            for _ in 0..10 {
                for i in (1..ws).rev() {
                    order.swap(i, rng.gen_range(0..=i));
                }
                let ranks = create_order(&encode_order(&order, ws), ws).unwrap();
                let mut seq = vec![0; ws];
                for (a, &r) in ranks.iter().enumerate() {
                    seq[r] = a;
                }
                let rev: Vec<usize> = order.iter().rev().copied().collect();
                assert!(seq == order || seq == rev);
            }
        }
    }

    #[test]
    fn create_order_rejects_inconsistent_cubes() {
        // nothing between anything: two facilities claim the second rank
        assert_eq!(create_order(&BetweennessAssignment::empty(3), 3), Err(SolveError::Integrity));
        let mut x = BetweennessAssignment::empty(4);
        x.set(0, 1, 3, true);
        x.set(0, 2, 3, true);
        x.set(0, 1, 2, true);
        x.set(0, 2, 1, true);
        assert_eq!(create_order(&x, 4), Err(SolveError::Integrity));
    }

    #[test]
    fn feasible_census_free_facilities() {
        for m in 3..=6 {
            let lengths = vec![1; m];
            let weights = vec![vec![0; m]; m];
            let model = build_free_model(&lengths, &weights);
            assert_eq!(feasible_vectors(&model).len(), factorial(m) / 2, "m = {m}");
        }
    }

    #[test]
    fn row_counts() {
        let (_, sub) = small_sub(3, 1);
        let model = build_betweenness_model(&sub, false);
        let m = 5;
        let c3 = m * (m - 1) * (m - 2) / 6;
        let c4 = c3 * (m - 3) / 4;
        assert_eq!(model.count(RowFamily::ExactlyOne), c3);
        assert_eq!(model.count(RowFamily::AtMostTwo), c4);
        for f in 3..=5 {
            assert_eq!(model.count(RowFamily::Triangle(f)), c3 * (m - 3));
        }
        assert_eq!(model.count(RowFamily::Dummy), 1);
        assert_eq!(model.count(RowFamily::Improvement), 0);
        assert_eq!(model.vars.len(), m * (m - 1) / 2 * (m - 2));
        assert_eq!(build_betweenness_model(&sub, true).count(RowFamily::Improvement), 1);
    }

    #[test]
    fn model_value_matches_objective_on_free_facilities() {
        let inst = generate_random_instance(5, (1, 9), (0, 9), 12).unwrap();
        let weights: Vec<Vec<i64>> = (0..5).map(|i| inst.row(i).to_vec()).collect();
        let model = build_free_model(inst.lengths(), &weights);
        for x in feasible_vectors(&model) {
            let mut cube = BetweennessAssignment::empty(5);
            for (v, &b) in model.vars.iter().zip(&x) {
                cube.set(v.i, v.k, v.j, b);
            }
            let ranks = create_order(&cube, 5).unwrap();
            let mut perm = vec![0; 5];
            for (a, &r) in ranks.iter().enumerate() {
                perm[r] = a;
            }
            assert_eq!(model.value(&x), objective(&inst, &perm));
        }
    }

    #[test]
    fn window_model_is_sound() {
        for ws in 2..=5 {
            for seed in 0..3 {
                let (_, sub) = small_sub(ws, seed * 10 + ws as u64);
                let model = build_betweenness_model(&sub, false);
                let feasible = feasible_vectors(&model);
                // dummies pinned to the two ends
                assert_eq!(feasible.len(), factorial(ws));
                let best = feasible.iter().map(|x| model.value(x)).min().unwrap() + model.min_wd;
                assert_eq!(best, solve_window_dp_unbounded(&sub).unwrap().value);
                // the current window order is feasible and costs what the subproblem says
                let mut seq = vec![ws];
                seq.extend(0..ws);
                seq.push(ws + 1);
                let x = model.vector(&encode_order(&seq, ws + 2));
                assert!(model.is_feasible(&x));
                assert_eq!(model.value(&x) + model.min_wd, sub.cost_local(&(0..ws).collect::<Vec<_>>()));
            }
        }
    }

    #[test]
    fn improvement_row_cuts_incumbent() {
        let (_, sub) = small_sub(4, 5);
        let model = build_betweenness_model(&sub, true);
        let cur: Vec<usize> = [4].into_iter().chain(0..4).chain([5]).collect();
        let x = model.vector(&encode_order(&cur, 6));
        // the incumbent order itself never satisfies a strict improvement
        assert!(!model.is_feasible(&x));
        let opt = solve_window_dp_unbounded(&sub).unwrap();
        let local = sub.to_local(&opt.order).unwrap();
        let seq: Vec<usize> = [4].into_iter().chain(local).chain([5]).collect();
        let y = model.vector(&encode_order(&seq, 6));
        assert_eq!(model.is_feasible(&y), sub.fixed + opt.value < sub.incumbent);
    }
}

//! Exact solvers for window subproblems.
//!
//! The primary backend is a subset dynamic program: facilities are placed left
//! to right and the state is the set already placed. Appending facility `f`
//! after the set `S` costs `len(f)` times the weight crossing the cut between
//! `S` plus the before-dummy and the still unplaced facilities plus the
//! after-dummy, excluding `f` itself. The half-length terms of every pair do
//! not depend on the order and are added once as a constant.

pub mod betweenness;
pub mod export;

use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::instance::HalfUnits;
use crate::window::WindowSubproblem;

/// Largest window the brute-force backend accepts.
pub const BRUTEFORCE_LIMIT: usize = 10;
/// Default largest window of the dynamic program (2^24 states).
pub const DP_DEFAULT_LIMIT: usize = 24;

/// An optimal internal order of a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowSolution {
    /// Facility ids left to right.
    pub order: Vec<usize>,
    /// Window-dependent cost of `order`, including the `min_wd` offset.
    pub value: HalfUnits,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Dp { max_window: usize },
    BruteForce,
}

impl Default for Backend {
    fn default() -> Self {
        Backend::Dp { max_window: DP_DEFAULT_LIMIT }
    }
}

impl Backend {
    /// Solves `sub`, returning `None` unless the optimum strictly beats the incumbent.
    pub fn solve(&self, sub: &WindowSubproblem) -> Result<Option<WindowSolution>, SolveError> {
        let sol = match *self {
            Backend::Dp { max_window } => dp_optimum(sub, max_window)?,
            Backend::BruteForce => solve_window_bruteforce(sub)?,
        };
        Ok(improves(sub, sol))
    }

    /// Rough count of elementary steps for one window of `ws` facilities.
    pub fn work_estimate(&self, ws: usize) -> u64 {
        match self {
            Backend::Dp { .. } => (1u64 << ws.min(40)) * ws as u64,
            Backend::BruteForce => (1..=ws as u64).product::<u64>() * (ws * ws) as u64,
        }
    }
}

fn improves(sub: &WindowSubproblem, sol: WindowSolution) -> Option<WindowSolution> {
    (sub.fixed + sol.value < sub.incumbent).then_some(sol)
}

/// Exact optimum by subset dynamic programming, or `None` when it does not
/// strictly improve on the incumbent.
pub fn solve_window_dp(sub: &WindowSubproblem) -> Result<Option<WindowSolution>, SolveError> {
    Ok(improves(sub, dp_optimum(sub, DP_DEFAULT_LIMIT)?))
}

/// Exact optimum by subset dynamic programming, ignoring the incumbent.
pub fn solve_window_dp_unbounded(sub: &WindowSubproblem) -> Result<WindowSolution, SolveError> {
    dp_optimum(sub, DP_DEFAULT_LIMIT)
}

/// Per-facility weight to an arbitrary subset, split into two half-width lookup tables.
struct SubsetWeights {
    half: usize,
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl SubsetWeights {
    fn new(weights: impl Fn(usize) -> i64, ws: usize) -> Self {
        let half = ws / 2;
        let table = |offset: usize, bits: usize| {
            let mut t = vec![0i64; 1 << bits];
            for mask in 1usize..(1 << bits) {
                let low = mask.trailing_zeros() as usize;
                t[mask] = t[mask & (mask - 1)] + weights(offset + low);
            }
            t
        };
        SubsetWeights { half, lo: table(0, half), hi: table(half, ws - half) }
    }

    #[inline]
    fn get(&self, mask: usize) -> i64 {
        self.lo[mask & ((1 << self.half) - 1)] + self.hi[mask >> self.half]
    }
}

fn dp_optimum(sub: &WindowSubproblem, max_window: usize) -> Result<WindowSolution, SolveError> {
    let ws = sub.size();
    if ws > max_window || ws > 30 {
        return Err(SolveError::Capacity { size: ws, limit: max_window, backend: "dp" });
    }
    if ws == 0 {
        return Ok(WindowSolution { order: Vec::new(), value: sub.min_wd });
    }
    let full = (1usize << ws) - 1;
    let l = &sub.lengths;
    let to_set: Vec<SubsetWeights> = (0..ws).map(|f| SubsetWeights::new(|g| sub.w(f, g), ws)).collect();
    let before_set = SubsetWeights::new(|g| sub.to_before[g], ws);

    // order-independent half-length terms
    let mut constant = 0i64;
    for a in 0..ws {
        constant += (sub.to_before[a] + sub.to_after[a]) * l[a];
        for b in a + 1..ws {
            constant += sub.w(a, b) * (l[a] + l[b]);
        }
    }

    // cut[S]: weight between S + before-dummy and the rest + after-dummy
    let mut cut = vec![0i64; 1 << ws];
    cut[0] = before_set.get(full);
    for s in 1..=full {
        let f = s.trailing_zeros() as usize;
        let prev = s & (s - 1);
        cut[s] = cut[prev] - to_set[f].get(prev) - sub.to_before[f] + to_set[f].get(full & !s) + sub.to_after[f];
    }

    let mut best = vec![i64::MAX; 1 << ws];
    let mut last = vec![0u8; 1 << ws];
    best[0] = 0;
    for s in 1..=full {
        let rest = full & !s;
        let mut value = i64::MAX;
        let mut arg = 0u8;
        let mut bits = s;
        while bits != 0 {
            let f = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            // weight strictly crossing f when f is the last of s
            let crossing = cut[s] - to_set[f].get(rest) - sub.to_after[f];
            let v = best[s & !(1 << f)] + 2 * l[f] * crossing;
            if v < value {
                value = v;
                arg = f as u8;
            }
        }
        best[s] = value;
        last[s] = arg;
    }

    let mut order = Vec::with_capacity(ws);
    let mut s = full;
    while s != 0 {
        let f = last[s] as usize;
        order.push(sub.wf[f]);
        s &= !(1 << f);
    }
    order.reverse();
    let value = HalfUnits(best[full] + constant) + sub.min_wd;
    Ok(WindowSolution { order, value })
}

/// Exhaustive optimum over all `ws!` orders; ties go to the lexicographically
/// smallest order of local indices.
pub fn solve_window_bruteforce(sub: &WindowSubproblem) -> Result<WindowSolution, SolveError> {
    let ws = sub.size();
    if ws > BRUTEFORCE_LIMIT {
        return Err(SolveError::Capacity { size: ws, limit: BRUTEFORCE_LIMIT, backend: "bruteforce" });
    }
    let mut perm: Vec<usize> = (0..ws).collect();
    let mut best = (sub.cost_local(&perm), perm.clone());
    while next_permutation(&mut perm) {
        let c = sub.cost_local(&perm);
        if c < best.0 {
            best = (c, perm.clone());
        }
    }
    Ok(WindowSolution { order: best.1.iter().map(|&a| sub.wf[a]).collect(), value: best.0 })
}

/// Advances to the next lexicographic permutation; false after the last one.
fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("pivot has a successor");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{objective, Layout, WindowBounds};
    use crate::instance::tests::fig1;
    use crate::instance::{generate_random_instance, Instance};
    use crate::window::{extract_window_subproblem, extract_window_subproblem_with};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sub(rng: &mut ChaCha8Rng, max_ws: usize) -> WindowSubproblem {
        let ws = rng.gen_range(1..=max_ws);
        let n = ws + rng.gen_range(0..6);
        let inst = generate_random_instance(n.max(2), (0, 15), (0, 10), rng.gen()).unwrap();
        let lay = Layout::random(&inst, rng);
        if ws < 2 {
            // single-facility window: build it by hand from a 2-window
            let b = WindowBounds::new(0, 1, inst.n()).unwrap();
            let mut sub = extract_window_subproblem_with(&inst, &lay, b, false).unwrap();
            sub.wf.truncate(1);
            sub.lengths.truncate(1);
            sub.weights.truncate(1);
            sub.to_before.truncate(1);
            sub.to_after.truncate(1);
            return sub;
        }
        let sw = rng.gen_range(0..=inst.n() - ws);
        let b = WindowBounds::new(sw, sw + ws - 1, inst.n()).unwrap();
        extract_window_subproblem(&inst, &lay, b).unwrap()
    }

    #[test]
    fn dp_matches_bruteforce() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..80 {
            let sub = random_sub(&mut rng, 8);
            let dp = solve_window_dp_unbounded(&sub).unwrap();
            let bf = solve_window_bruteforce(&sub).unwrap();
            assert_eq!(dp.value, bf.value);
            assert_eq!(sub.cost(&dp.order).unwrap(), dp.value);
            let mut sorted = dp.order.clone();
            sorted.sort();
            let mut wf = sub.wf.clone();
            wf.sort();
            assert_eq!(sorted, wf);
            // mirrored boundaries give the same optimum
            assert_eq!(solve_window_dp_unbounded(&sub.mirrored()).unwrap().value, dp.value);
        }
    }

    #[test]
    fn two_facilities_without_boundary() {
        let inst = Instance::new(vec![3, 5], vec![vec![0, 4], vec![4, 0]]).unwrap();
        let lay = Layout::identity(&inst);
        let sub = extract_window_subproblem(&inst, &lay, WindowBounds::new(0, 1, 2).unwrap()).unwrap();
        let sol = solve_window_dp_unbounded(&sub).unwrap();
        assert_eq!(sol.value, HalfUnits(4 * (3 + 5)));
        assert_eq!(solve_window_dp(&sub).unwrap(), None);
    }

    #[test]
    fn single_facility_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sub = random_sub(&mut rng, 1);
        let bf = solve_window_bruteforce(&sub).unwrap();
        let l = sub.lengths[0];
        assert_eq!(bf.value, HalfUnits((sub.to_before[0] + sub.to_after[0]) * l));
        assert_eq!(solve_window_dp_unbounded(&sub).unwrap().value, bf.value);
    }

    #[test]
    fn whole_line_is_global_optimum() {
        let inst = fig1();
        let lay = Layout::identity(&inst);
        let sub = extract_window_subproblem(&inst, &lay, WindowBounds::new(0, 5, 6).unwrap()).unwrap();
        let bf = solve_window_bruteforce(&sub).unwrap();
        let mut perm: Vec<usize> = (0..6).collect();
        let mut best = objective(&inst, &perm);
        while next_permutation(&mut perm) {
            best = best.min(objective(&inst, &perm));
        }
        assert_eq!(bf.value, best);
        assert_eq!(best, HalfUnits(221));
        assert_eq!(objective(&inst, &bf.order), best);
        assert_eq!(solve_window_dp_unbounded(&sub).unwrap().value, best);
    }

    #[test]
    fn capacity_limits() {
        let inst = generate_random_instance(12, (1, 5), (0, 5), 0).unwrap();
        let lay = Layout::identity(&inst);
        let sub = extract_window_subproblem(&inst, &lay, WindowBounds::new(0, 10, 12).unwrap()).unwrap();
        assert!(matches!(solve_window_bruteforce(&sub), Err(SolveError::Capacity { .. })));
        assert!(matches!(Backend::Dp { max_window: 8 }.solve(&sub), Err(SolveError::Capacity { .. })));
        assert!(Backend::Dp { max_window: 11 }.solve(&sub).is_ok());
    }

    #[test]
    fn permutation_enumeration() {
        let mut v = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut v) {
            count += 1;
        }
        assert_eq!(count, 24);
        assert_eq!(v, vec![3, 2, 1, 0]);
    }
}

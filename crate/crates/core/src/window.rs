//! Window subproblems and the moving-window sweep.
//!
//! A window is a block of consecutive positions whose internal order is
//! re-optimized exactly while everything outside stays put. The facilities
//! before and after the window are aggregated into two zero-length dummies
//! that connect to each window facility with the summed weights. The smaller
//! of the two aggregated weights of every facility is moved into a constant
//! offset (`min_wd`): whatever the order, that much weight always travels the
//! whole window length.

use std::fmt;
use std::sync::Arc;

use crate::error::SolveError;
use crate::eval::{fixed_outside_cost, WindowBounds};
use crate::exact::betweenness::{create_order, encode_order};
use crate::exact::{Backend, WindowSolution};
use crate::instance::{HalfUnits, Instance};
use crate::local_search::SearchState;
use crate::eval::Layout;

/// One window reduced to its facilities plus two boundary dummies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowSubproblem {
    /// Facility ids in their current window order.
    pub wf: Vec<usize>,
    pub lengths: Vec<i64>,
    /// Internal weights, `ws * ws` row-major over local indices.
    pub weights: Vec<i64>,
    /// Weight of each window facility to everything before the window (after reduction).
    pub to_before: Vec<i64>,
    /// Weight of each window facility to everything after the window (after reduction).
    pub to_after: Vec<i64>,
    /// Permutation-independent cost outside the window.
    pub fixed: HalfUnits,
    /// Offset removed from the boundary weights, `total window length * sum of minima`.
    pub min_wd: HalfUnits,
    /// Objective of the full layout the window was taken from.
    pub incumbent: HalfUnits,
    pub bounds: Option<WindowBounds>,
}

impl WindowSubproblem {
    pub fn size(&self) -> usize {
        self.wf.len()
    }

    #[inline]
    pub fn w(&self, a: usize, b: usize) -> i64 {
        self.weights[a * self.size() + b]
    }

    /// The `(ws + 2)`-square weight matrix with the before dummy at index `ws`
    /// and the after dummy at `ws + 1`.
    pub fn ww(&self) -> Vec<Vec<i64>> {
        let ws = self.size();
        let mut m = vec![vec![0; ws + 2]; ws + 2];
        for a in 0..ws {
            for b in 0..ws {
                m[a][b] = self.w(a, b);
            }
            m[a][ws] = self.to_before[a];
            m[ws][a] = self.to_before[a];
            m[a][ws + 1] = self.to_after[a];
            m[ws + 1][a] = self.to_after[a];
        }
        m
    }

    /// Local index of facility `f`.
    pub fn local(&self, f: usize) -> Option<usize> {
        self.wf.iter().position(|&g| g == f)
    }

    /// Window-dependent cost (reduced terms plus `min_wd`) of an order given in local indices.
    pub fn cost_local(&self, order: &[usize]) -> HalfUnits {
        let mut total = 0i64;
        let mut before = 0i64;
        let window_len: i64 = self.lengths.iter().sum();
        for (t, &a) in order.iter().enumerate() {
            let la = self.lengths[a];
            let after = window_len - before - la;
            total += self.to_before[a] * (la + 2 * before) + self.to_after[a] * (la + 2 * after);
            let mut betw = 0i64;
            for &b in &order[t + 1..] {
                total += self.w(a, b) * (la + self.lengths[b] + 2 * betw);
                betw += self.lengths[b];
            }
            before += la;
        }
        HalfUnits(total) + self.min_wd
    }

    /// Window-dependent cost of an order of facility ids.
    pub fn cost(&self, order: &[usize]) -> Result<HalfUnits, SolveError> {
        let local = self.to_local(order)?;
        Ok(self.cost_local(&local))
    }

    pub(crate) fn to_local(&self, order: &[usize]) -> Result<Vec<usize>, SolveError> {
        let local: Option<Vec<usize>> = order.iter().map(|&f| self.local(f)).collect();
        match local {
            Some(l) if l.len() == self.size() => Ok(l),
            _ => Err(SolveError::Integrity),
        }
    }

    /// The same subproblem with the boundary weights swapped (the mirrored window).
    pub fn mirrored(&self) -> WindowSubproblem {
        let mut m = self.clone();
        std::mem::swap(&mut m.to_before, &mut m.to_after);
        m
    }
}

/// Builds the subproblem for `bounds` with the minimum-weight reduction applied.
pub fn extract_window_subproblem(inst: &Instance, layout: &Layout, bounds: WindowBounds) -> Result<WindowSubproblem, SolveError> {
    extract_window_subproblem_with(inst, layout, bounds, true)
}

/// As [`extract_window_subproblem`], optionally skipping the reduction.
pub fn extract_window_subproblem_with(
    inst: &Instance,
    layout: &Layout,
    bounds: WindowBounds,
    reduce: bool,
) -> Result<WindowSubproblem, SolveError> {
    let pi = layout.perm();
    let fixed = fixed_outside_cost(inst, pi, bounds)?;
    let (sw, ew) = (bounds.sw(), bounds.ew());
    let wf = pi[sw..=ew].to_vec();
    let ws = wf.len();
    let lengths: Vec<i64> = wf.iter().map(|&f| inst.len_of(f)).collect();
    let mut weights = vec![0; ws * ws];
    for (a, &fa) in wf.iter().enumerate() {
        for (b, &fb) in wf.iter().enumerate() {
            weights[a * ws + b] = inst.w(fa, fb);
        }
    }
    let mut to_before: Vec<i64> = wf.iter().map(|&f| pi[..sw].iter().map(|&o| inst.w(f, o)).sum()).collect();
    let mut to_after: Vec<i64> = wf.iter().map(|&f| pi[ew + 1..].iter().map(|&o| inst.w(f, o)).sum()).collect();
    let mut min_wd = HalfUnits::ZERO;
    if reduce {
        let window_len: i64 = lengths.iter().sum();
        let mut min_sum = 0;
        for a in 0..ws {
            let m = to_before[a].min(to_after[a]);
            min_sum += m;
            to_before[a] -= m;
            to_after[a] -= m;
        }
        min_wd = HalfUnits(2 * window_len * min_sum);
    }
    Ok(WindowSubproblem {
        wf,
        lengths,
        weights,
        to_before,
        to_after,
        fixed,
        min_wd,
        incumbent: layout.f(),
        bounds: Some(bounds),
    })
}

/// Returns `order` or its reverse, whichever is cheaper against the fixed
/// boundaries; a tie keeps `order`.
pub fn orient_window(order: &[usize], sub: &WindowSubproblem) -> Result<Vec<usize>, SolveError> {
    let rev: Vec<usize> = order.iter().rev().copied().collect();
    if sub.cost(&rev)? < sub.cost(order)? {
        Ok(rev)
    } else {
        Ok(order.to_vec())
    }
}

/// Windows visited for one window size: consecutive disjoint blocks from the
/// left, plus one block flush with the right end when `ws` does not divide `n`.
pub fn sweep_windows(n: usize, ws: usize) -> Vec<WindowBounds> {
    let ws = ws.min(n);
    if ws < 2 {
        return Vec::new();
    }
    let mut out: Vec<WindowBounds> = (0..n / ws)
        .map(|i| WindowBounds::new(i * ws, i * ws + ws - 1, n).expect("in range"))
        .collect();
    if n % ws != 0 {
        out.push(WindowBounds::new(n - ws, n - 1, n).expect("in range"));
    }
    out
}

/// Receives every subproblem handed to the exact backend.
pub type WindowObserver = Arc<dyn Fn(&WindowSubproblem) + Send + Sync>;

/// Settings for the window sweep.
#[derive(Clone)]
pub struct WindowConfig {
    /// Window sizes tried in order; sizes above `n` are clamped to `n`.
    pub sizes: Vec<usize>,
    /// Return as soon as one window improves.
    pub go_back: bool,
    pub backend: Backend,
    pub observer: Option<WindowObserver>,
}

impl fmt::Debug for WindowConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WindowConfig")
            .field("sizes", &self.sizes)
            .field("go_back", &self.go_back)
            .field("backend", &self.backend)
            .finish_non_exhaustive()
    }
}

impl WindowConfig {
    pub fn new(sizes: Vec<usize>, go_back: bool) -> Self {
        WindowConfig { sizes, go_back, backend: Backend::default(), observer: None }
    }

    /// No windows at all: local search only.
    pub fn disabled() -> Self {
        WindowConfig::new(Vec::new(), false)
    }
}

/// Turns an exact window solution into the order written back into the layout:
/// through the betweenness encoding and back, then oriented.
fn reconstruct(sub: &WindowSubproblem, sol: &WindowSolution) -> Result<Vec<usize>, SolveError> {
    let local = sub.to_local(&sol.order)?;
    let x = encode_order(&local, sub.size());
    let ranks = create_order(&x, sub.size())?;
    let mut seq = vec![0; sub.size()];
    for (a, &rank) in ranks.iter().enumerate() {
        seq[rank] = sub.wf[a];
    }
    orient_window(&seq, sub)
}

/// Sweeps windows over the layout, accepting every strictly improving exact
/// re-optimization. Returns whether the objective decreased.
pub fn wind_met(state: &mut SearchState<'_>, cfg: &WindowConfig) -> Result<bool, SolveError> {
    let n = state.layout.n();
    let start = state.f();
    for &size in &cfg.sizes {
        let ws = size.min(n);
        for bounds in sweep_windows(n, ws) {
            let in_window = |e: SolveError| SolveError::InWindow { sw: bounds.sw() + 1, ew: bounds.ew() + 1, source: Box::new(e) };
            let sub = extract_window_subproblem(state.inst, &state.layout, bounds).map_err(in_window)?;
            if let Some(obs) = &cfg.observer {
                obs(&sub);
            }
            state.stats.windows_solved += 1;
            state.stats.work += cfg.backend.work_estimate(ws);
            let Some(sol) = cfg.backend.solve(&sub).map_err(in_window)? else { continue };
            let order = reconstruct(&sub, &sol).map_err(in_window)?;
            let new_f = sub.fixed + sub.cost(&order).map_err(in_window)?;
            if new_f < state.f() {
                state.layout.replace_block(bounds.sw(), &order, new_f);
                debug_assert!(state.layout.is_consistent(state.inst));
                state.rebuild();
                state.stats.windows_improved += 1;
                if cfg.go_back {
                    return Ok(true);
                }
            }
        }
        if state.f() < start {
            return Ok(true);
        }
    }
    Ok(false)
}

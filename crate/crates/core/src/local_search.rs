//! Best-improvement local searches and the loop that interleaves them with
//! window re-optimization.

use crate::error::SolveError;
use crate::eval::Layout;
use crate::instance::{HalfUnits, Instance};
use crate::moves::{GainCache, Move};
use crate::window::{wind_met, WindowConfig};

/// Counters accumulated while a search state is worked on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub moves_applied: u64,
    pub windows_solved: u64,
    pub windows_improved: u64,
    /// Abstract work units spent (gain evaluations, DP transitions).
    pub work: u64,
}

/// A layout together with its gain cache.
#[derive(Clone, Debug)]
pub struct SearchState<'a> {
    pub inst: &'a Instance,
    pub layout: Layout,
    pub cache: GainCache,
    pub stats: SearchStats,
}

impl<'a> SearchState<'a> {
    pub fn new(inst: &'a Instance, layout: Layout) -> Self {
        let cache = GainCache::build(inst, &layout);
        SearchState { inst, layout, cache, stats: SearchStats::default() }
    }

    pub fn f(&self) -> HalfUnits {
        self.layout.f()
    }

    pub fn apply(&mut self, m: Move, delta: HalfUnits) {
        self.cache.apply(self.inst, &mut self.layout, m, delta);
        self.stats.moves_applied += 1;
    }

    /// Rebuilds the gain cache from scratch (after a window acceptance).
    pub fn rebuild(&mut self) {
        self.cache = GainCache::build(self.inst, &self.layout);
    }

    /// Replaces the whole layout.
    pub fn reset(&mut self, layout: Layout) {
        self.layout = layout;
        self.rebuild();
    }
}

/// First index of the minimum; `None` when the slice is empty.
fn argmin(gains: &[HalfUnits], mut keep: impl FnMut(usize) -> bool) -> Option<(usize, HalfUnits)> {
    let mut best: Option<(usize, HalfUnits)> = None;
    for (i, &g) in gains.iter().enumerate() {
        if keep(i) && best.map_or(true, |(_, b)| g < b) {
            best = Some((i, g));
        }
    }
    best
}

/// Applies the best insertion while it improves. Returns the number of moves applied.
pub fn ls_insert(state: &mut SearchState<'_>) -> usize {
    let n = state.layout.n();
    let mut applied = 0;
    loop {
        let gains = state.cache.all_insertion_gains(state.inst, &state.layout);
        state.stats.work += (n * n) as u64;
        let Some((idx, g)) = argmin(&gains, |_| true) else { break };
        if g >= HalfUnits::ZERO {
            break;
        }
        let (k, l) = (idx / n, idx % n);
        let r = state.layout.at(k);
        state.apply(Move::Insert { r, to: l }, g);
        applied += 1;
    }
    applied
}

/// Applies the single best swap if it improves; reports whether it did.
/// Ties go to the lowest facility pair `(r, s)` with `r < s`.
pub fn ls_swap(state: &mut SearchState<'_>) -> bool {
    let n = state.layout.n();
    let gains = state.cache.all_swap_gains(state.inst, &state.layout);
    state.stats.work += (n * n) as u64;
    match argmin(&gains, |i| i / n < i % n) {
        Some((idx, g)) if g < HalfUnits::ZERO => {
            state.apply(Move::Swap { r: idx / n, s: idx % n }, g);
            true
        }
        _ => false,
    }
}

/// Alternates insertion and swap search until neither improves, then runs the
/// window sweep; repeats while the sweep finds an improvement.
pub fn ls_wind(state: &mut SearchState<'_>, windows: &WindowConfig) -> Result<(), SolveError> {
    loop {
        loop {
            ls_insert(state);
            if !ls_swap(state) {
                break;
            }
        }
        if windows.sizes.is_empty() || !wind_met(state, windows)? {
            return Ok(());
        }
    }
}

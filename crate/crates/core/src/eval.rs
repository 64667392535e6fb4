//! Objective evaluation and the window decomposition of the objective.
//!
//! Positions are 0-based here: `pi[p]` is the facility at position `p`.
//! For a window `[sw, ew]` the objective splits into a part that only depends on
//! the order outside the window ([`fixed_outside_cost`]) and the three terms that
//! change when the window is reordered ([`window_dependent_cost`]).

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::SolveError;
use crate::instance::{HalfUnits, Instance};

/// A permutation of facilities with its inverse and cached objective.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pi: Vec<usize>,
    inv: Vec<usize>,
    f: HalfUnits,
}

impl Layout {
    /// Layout for a permutation; fails if `perm` is not a permutation of `0..n`.
    pub fn new(inst: &Instance, perm: Vec<usize>) -> Option<Layout> {
        let n = inst.n();
        if perm.len() != n {
            return None;
        }
        let mut inv = vec![usize::MAX; n];
        for (p, &f) in perm.iter().enumerate() {
            if f >= n || inv[f] != usize::MAX {
                return None;
            }
            inv[f] = p;
        }
        let f = objective(inst, &perm);
        Some(Layout { pi: perm, inv, f })
    }

    pub fn identity(inst: &Instance) -> Layout {
        Layout::new(inst, (0..inst.n()).collect()).expect("identity is a permutation")
    }

    pub fn random<R: Rng + ?Sized>(inst: &Instance, rng: &mut R) -> Layout {
        let mut perm: Vec<usize> = (0..inst.n()).collect();
        perm.shuffle(rng);
        Layout::new(inst, perm).expect("shuffle keeps a permutation")
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    /// Facilities in position order.
    pub fn perm(&self) -> &[usize] {
        &self.pi
    }

    /// Facility at position `p`.
    #[inline]
    pub fn at(&self, p: usize) -> usize {
        self.pi[p]
    }

    /// Position of facility `f`.
    #[inline]
    pub fn pos(&self, f: usize) -> usize {
        self.inv[f]
    }

    pub fn f(&self) -> HalfUnits {
        self.f
    }

    /// Exchanges the facilities at positions `p` and `q`; the caller adds the gain.
    pub(crate) fn swap_positions(&mut self, p: usize, q: usize, delta: HalfUnits) {
        self.pi.swap(p, q);
        self.inv[self.pi[p]] = p;
        self.inv[self.pi[q]] = q;
        self.f += delta;
    }

    /// Moves the facility at position `from` so that it ends at position `to`.
    pub(crate) fn insert(&mut self, from: usize, to: usize, delta: HalfUnits) {
        if from < to {
            self.pi[from..=to].rotate_left(1);
        } else if to < from {
            self.pi[to..=from].rotate_right(1);
        }
        let (lo, hi) = (from.min(to), from.max(to));
        for p in lo..=hi {
            self.inv[self.pi[p]] = p;
        }
        self.f += delta;
    }

    /// Overwrites positions `start..start + order.len()` with `order`.
    pub(crate) fn replace_block(&mut self, start: usize, order: &[usize], new_f: HalfUnits) {
        for (k, &fac) in order.iter().enumerate() {
            self.pi[start + k] = fac;
            self.inv[fac] = start + k;
        }
        self.f = new_f;
    }

    /// Recomputes the objective and compares it with the cached value.
    pub fn is_consistent(&self, inst: &Instance) -> bool {
        self.inv.iter().enumerate().all(|(f, &p)| self.pi[p] == f) && objective(inst, &self.pi) == self.f
    }
}

/// A window of positions `[sw, ew]` (0-based, inclusive) with `sw < ew`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WindowBounds {
    sw: usize,
    ew: usize,
}

impl WindowBounds {
    pub fn new(sw: usize, ew: usize, n: usize) -> Result<Self, SolveError> {
        if sw < ew && ew < n {
            Ok(WindowBounds { sw, ew })
        } else {
            Err(SolveError::BadWindow { sw, ew, n })
        }
    }

    pub fn sw(&self) -> usize {
        self.sw
    }

    pub fn ew(&self) -> usize {
        self.ew
    }

    pub fn size(&self) -> usize {
        self.ew - self.sw + 1
    }

    fn check(&self, n: usize) -> Result<(), SolveError> {
        if self.ew < n {
            Ok(())
        } else {
            Err(SolveError::BadWindow { sw: self.sw, ew: self.ew, n })
        }
    }
}

/// Total weighted center-to-center distance of `pi`, in half units. O(n²).
pub fn objective(inst: &Instance, pi: &[usize]) -> HalfUnits {
    let n = pi.len();
    let mut total = 0i64;
    for i in 0..n {
        let a = pi[i];
        let row = inst.row(a);
        let la = inst.len_of(a);
        // doubled distance from center of a to center of the facility at j
        let mut between = 0i64;
        for &b in &pi[i + 1..n] {
            let lb = inst.len_of(b);
            total += row[b] * (la + lb + 2 * between);
            between += lb;
        }
    }
    HalfUnits(total)
}

/// Center-to-center distance between the facilities at positions `i < j`.
pub fn pair_distance(inst: &Instance, pi: &[usize], i: usize, j: usize) -> Result<HalfUnits, SolveError> {
    if i >= j || j >= pi.len() {
        return Err(SolveError::BadPair { i, j });
    }
    let middle: i64 = pi[i + 1..j].iter().map(|&f| inst.len_of(f)).sum();
    Ok(HalfUnits(inst.len_of(pi[i]) + inst.len_of(pi[j]) + 2 * middle))
}

/// The permutation-independent part of the objective for window `wb`.
///
/// Covers pairs entirely before or after the window, pairs spanning the window
/// (which pay the full window length), and the stretches from an outside facility
/// up to the nearest window edge. Computed with running length accumulators.
pub fn fixed_outside_cost(inst: &Instance, pi: &[usize], wb: WindowBounds) -> Result<HalfUnits, SolveError> {
    let n = pi.len();
    wb.check(n)?;
    let (sw, ew) = (wb.sw, wb.ew);
    let len = |p: usize| inst.len_of(pi[p]);
    let window_len: i64 = (sw..=ew).map(len).sum();
    let after_len: i64 = (ew + 1..n).map(len).sum();

    let mut wd = 0i64;
    // facility before the window: `to_edge` = lengths strictly between it and sw
    let mut to_edge = vec![0i64; sw];
    for i in (0..sw).rev() {
        to_edge[i] = if i + 1 < sw { to_edge[i + 1] + len(i + 1) } else { 0 };
    }
    for i in 0..sw {
        let a = pi[i];
        let row = inst.row(a);
        let la = len(i);
        let mut betw = 0i64;
        for j in i + 1..sw {
            wd += row[pi[j]] * (la + len(j) + 2 * betw);
            betw += len(j);
        }
        let to_window: i64 = (sw..=ew).map(|j| row[pi[j]]).sum();
        wd += to_window * (la + 2 * to_edge[i]);
        let mut aft = 0i64;
        for j in ew + 1..n {
            wd += row[pi[j]] * (la + len(j) + 2 * (to_edge[i] + window_len + aft));
            aft += len(j);
        }
    }
    let mut seen_after = 0i64;
    for i in ew + 1..n {
        let a = pi[i];
        let row = inst.row(a);
        let la = len(i);
        let mut betw = 0i64;
        for j in i + 1..n {
            wd += row[pi[j]] * (la + len(j) + 2 * betw);
            betw += len(j);
        }
        let to_window: i64 = (sw..=ew).map(|j| row[pi[j]]).sum();
        // lengths strictly between ew and i
        let from_edge = seen_after;
        wd += to_window * (la + 2 * from_edge);
        seen_after += la;
    }
    debug_assert_eq!(seen_after, after_len);
    Ok(HalfUnits(wd))
}

/// The three window-dependent terms of the objective for window `wb`.
pub fn window_dependent_cost(inst: &Instance, pi: &[usize], wb: WindowBounds) -> Result<HalfUnits, SolveError> {
    let n = pi.len();
    wb.check(n)?;
    let (sw, ew) = (wb.sw, wb.ew);
    let mut total = 0i64;
    let mut before_in_window = 0i64;
    for j in sw..=ew {
        let f = pi[j];
        let row = inst.row(f);
        let lf = inst.len_of(f);
        let wb_j: i64 = pi[..sw].iter().map(|&o| row[o]).sum();
        let wa_j: i64 = pi[ew + 1..].iter().map(|&o| row[o]).sum();
        let after_in_window: i64 = pi[j + 1..=ew].iter().map(|&o| inst.len_of(o)).sum();
        total += wb_j * (lf + 2 * before_in_window);
        total += wa_j * (lf + 2 * after_in_window);
        before_in_window += lf;
        let mut betw = 0i64;
        for &g in &pi[j + 1..=ew] {
            total += row[g] * (lf + inst.len_of(g) + 2 * betw);
            betw += inst.len_of(g);
        }
    }
    Ok(HalfUnits(total))
}

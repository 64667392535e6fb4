//! Exact gains of swap and insertion moves.
//!
//! All arithmetic is on doubled coordinates: the doubled center of position `p`
//! is `L[p] + L[p + 1]` where `L` is the length prefix. Besides the prefix the
//! cache keeps, per facility, the weight to everything on its left (`lsum`) and
//! on its right (`rsum`), and a positional prefix of `lsum - rsum`. With these a
//! single gain costs O(distance between the two positions), a full table of
//! insertion or swap gains costs O(n²), and applying a move costs O(n).

use crate::error::SolveError;
use crate::eval::Layout;
use crate::instance::{HalfUnits, Instance};

/// A candidate neighbourhood move.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    /// Exchange the positions of facilities `r` and `s`.
    Swap { r: usize, s: usize },
    /// Take facility `r` out and reinsert it so that it occupies position `to`.
    Insert { r: usize, to: usize },
}

impl Move {
    /// The move that undoes `self` when applied right after it.
    pub fn inverse(self, layout_before: &Layout) -> Move {
        match self {
            Move::Swap { r, s } => Move::Swap { r, s },
            Move::Insert { r, .. } => Move::Insert { r, to: layout_before.pos(r) },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GainCache {
    /// `length_prefix[k]` = total length of positions `0..k`.
    pub length_prefix: Vec<i64>,
    lsum: Vec<i64>,
    rsum: Vec<i64>,
    /// `dprefix[k]` = sum over positions `0..k` of `lsum - rsum` of the facility there.
    dprefix: Vec<i64>,
}

#[inline]
fn center2(lp: &[i64], p: usize) -> i64 {
    lp[p] + lp[p + 1]
}

impl GainCache {
    /// Builds the cache for `layout` in O(n²).
    pub fn build(inst: &Instance, layout: &Layout) -> GainCache {
        let n = layout.n();
        let mut length_prefix = vec![0; n + 1];
        for p in 0..n {
            length_prefix[p + 1] = length_prefix[p] + inst.len_of(layout.at(p));
        }
        let mut lsum = vec![0; n];
        let mut rsum = vec![0; n];
        for f in 0..n {
            let row = inst.row(f);
            let pf = layout.pos(f);
            let left: i64 = layout.perm()[..pf].iter().map(|&g| row[g]).sum();
            let total: i64 = row.iter().sum();
            lsum[f] = left;
            rsum[f] = total - left;
        }
        let mut cache = GainCache { length_prefix, lsum, rsum, dprefix: vec![0; n + 1] };
        cache.refresh_dprefix(layout, 0);
        cache
    }

    fn refresh_dprefix(&mut self, layout: &Layout, from: usize) {
        for p in from..layout.n() {
            let f = layout.at(p);
            self.dprefix[p + 1] = self.dprefix[p] + self.lsum[f] - self.rsum[f];
        }
    }

    fn refresh_lengths(&mut self, inst: &Instance, layout: &Layout, from: usize, to: usize) {
        for p in from..=to {
            self.length_prefix[p + 1] = self.length_prefix[p] + inst.len_of(layout.at(p));
        }
    }

    /// Gain of swapping facilities `r` and `s`.
    pub fn swap_gain(&self, inst: &Instance, layout: &Layout, r: usize, s: usize) -> Result<HalfUnits, SolveError> {
        if r == s {
            return Err(SolveError::SameFacility(r));
        }
        Ok(self.swap_gain_unchecked(inst, layout, r, s))
    }

    pub(crate) fn swap_gain_unchecked(&self, inst: &Instance, layout: &Layout, r: usize, s: usize) -> HalfUnits {
        let (mut p, mut q) = (layout.pos(r), layout.pos(s));
        if p > q {
            std::mem::swap(&mut p, &mut q);
        }
        let (r, s) = (layout.at(p), layout.at(q));
        let (row_r, row_s) = (inst.row(r), inst.row(s));
        let lp = &self.length_prefix;
        let (mut wm_r, mut xm_r, mut wm_s, mut xm_s) = (0, 0, 0, 0);
        for t in p + 1..q {
            let c = layout.at(t);
            let cc = center2(lp, t);
            wm_r += row_r[c];
            xm_r += row_r[c] * cc;
            wm_s += row_s[c];
            xm_s += row_s[c] * cc;
        }
        HalfUnits(self.swap_gain_parts(inst, p, q, r, s, [wm_r, xm_r, wm_s, xm_s]))
    }

    /// Doubled swap gain given the weight (`wm`) and weight-times-center (`xm`)
    /// sums of `r` and `s` over the block strictly between them.
    #[inline]
    fn swap_gain_parts(&self, inst: &Instance, p: usize, q: usize, r: usize, s: usize, mid: [i64; 4]) -> i64 {
        let [wm_r, xm_r, wm_s, xm_s] = mid;
        let lp = &self.length_prefix;
        let (lr, ls) = (inst.len_of(r), inst.len_of(s));
        let wrs = inst.w(r, s);
        let (cr, cs) = (center2(lp, p), center2(lp, q));
        let cs_new = cr - lr + ls;
        let cr_new = cs + ls - lr;
        let shift = 2 * (ls - lr);

        let left_r = self.lsum[r];
        let left_s = self.lsum[s] - wrs - wm_s;
        let right_r = self.rsum[r] - wrs - wm_r;
        let right_s = self.rsum[s];

        let mut g = (left_r - right_r) * (cr_new - cr) + (left_s - right_s) * (cs_new - cs);
        // block facilities against everything outside [p, q]
        let block_balance = self.dprefix[q] - self.dprefix[p + 1] - (wm_r - wm_s);
        g += shift * block_balance;
        // block facilities against r and s themselves
        g += wm_r * (cr_new - shift + cr) - 2 * xm_r;
        g += 2 * xm_s + wm_s * (shift - cs_new - cs);
        g
    }

    /// Gain of moving facility `r` so that it ends up at position `to`.
    pub fn insertion_gain(&self, inst: &Instance, layout: &Layout, r: usize, to: usize) -> Result<HalfUnits, SolveError> {
        if to >= layout.n() {
            return Err(SolveError::BadPair { i: layout.pos(r), j: to });
        }
        Ok(self.insertion_gain_unchecked(inst, layout, r, to))
    }

    pub(crate) fn insertion_gain_unchecked(&self, inst: &Instance, layout: &Layout, r: usize, to: usize) -> HalfUnits {
        let mut g = 0;
        self.sweep_insertion(inst, layout, r, to, |_, acc| g = acc);
        HalfUnits(g)
    }

    /// Walks `r` step by step from its position towards `to` as a chain of
    /// adjacent swaps, reporting the cumulative doubled gain at every
    /// intermediate target position.
    #[inline]
    fn sweep_insertion(&self, inst: &Instance, layout: &Layout, r: usize, to: usize, mut visit: impl FnMut(usize, i64)) {
        let p = layout.pos(r);
        let row_r = inst.row(r);
        let lr = inst.len_of(r);
        let tot_r = self.lsum[r] + self.rsum[r];
        let mut gain = 0i64;
        let mut passed = 0i64;
        if to > p {
            for t in p + 1..=to {
                let g = layout.at(t);
                let wrg = row_r[g];
                let left_r = self.lsum[r] + passed;
                let right_r = tot_r - left_r - wrg;
                let left_g = self.lsum[g] - wrg;
                let right_g = self.rsum[g];
                gain += 2 * inst.len_of(g) * (left_r - right_r) + 2 * lr * (right_g - left_g);
                passed += wrg;
                visit(t, gain);
            }
        } else if to < p {
            for t in (to..p).rev() {
                let g = layout.at(t);
                let wrg = row_r[g];
                let right_r = self.rsum[r] + passed;
                let left_r = tot_r - right_r - wrg;
                let left_g = self.lsum[g];
                let right_g = self.rsum[g] - wrg;
                gain += 2 * lr * (left_g - right_g) + 2 * inst.len_of(g) * (right_r - left_r);
                passed += wrg;
                visit(t, gain);
            }
        } else {
            visit(p, 0);
        }
    }

    /// Gains of every insertion, indexed `[k * n + l]` for the facility at
    /// position `k` moved to position `l`. O(n²).
    pub fn all_insertion_gains(&self, inst: &Instance, layout: &Layout) -> Vec<HalfUnits> {
        let n = layout.n();
        let mut out = vec![HalfUnits::ZERO; n * n];
        for k in 0..n {
            let r = layout.at(k);
            let row = &mut out[k * n..(k + 1) * n];
            self.sweep_insertion(inst, layout, r, n - 1, |l, g| row[l] = HalfUnits(g));
            self.sweep_insertion(inst, layout, r, 0, |l, g| row[l] = HalfUnits(g));
            row[k] = HalfUnits::ZERO;
        }
        out
    }

    /// Gains of every swap, indexed `[r * n + s]` by facility ids (symmetric,
    /// zero diagonal). O(n²).
    pub fn all_swap_gains(&self, inst: &Instance, layout: &Layout) -> Vec<HalfUnits> {
        let n = layout.n();
        let lp = &self.length_prefix;
        // weight-times-center of each facility against everything on its left
        let mut left_x = vec![0i64; n];
        for q in 0..n {
            let s = layout.at(q);
            let row = inst.row(s);
            left_x[s] = (0..q).map(|t| row[layout.at(t)] * center2(lp, t)).sum();
        }
        // per facility: weight and weight*center to positions 0..=p
        let mut upto_w = vec![0i64; n];
        let mut upto_x = vec![0i64; n];
        let mut out = vec![HalfUnits::ZERO; n * n];
        for p in 0..n {
            let r = layout.at(p);
            let cp = center2(lp, p);
            for (f, &w) in inst.row(r).iter().enumerate() {
                upto_w[f] += w;
                upto_x[f] += w * cp;
            }
            let row_r = inst.row(r);
            let (mut wm_r, mut xm_r) = (0i64, 0i64);
            for q in p + 1..n {
                let s = layout.at(q);
                let wm_s = self.lsum[s] - upto_w[s];
                let xm_s = left_x[s] - upto_x[s];
                let g = self.swap_gain_parts(inst, p, q, r, s, [wm_r, xm_r, wm_s, xm_s]);
                out[r * n + s] = HalfUnits(g);
                out[s * n + r] = HalfUnits(g);
                wm_r += row_r[s];
                xm_r += row_r[s] * center2(lp, q);
            }
        }
        out
    }

    /// Applies `m`, whose gain is `delta`, updating layout and cache in O(n).
    pub fn apply(&mut self, inst: &Instance, layout: &mut Layout, m: Move, delta: HalfUnits) {
        debug_assert_eq!(
            delta,
            match m {
                Move::Swap { r, s } => self.swap_gain_unchecked(inst, layout, r, s),
                Move::Insert { r, to } => self.insertion_gain_unchecked(inst, layout, r, to),
            },
            "stale gain for {m:?}"
        );
        match m {
            Move::Swap { r, s } => {
                let (mut p, mut q) = (layout.pos(r), layout.pos(s));
                if p > q {
                    std::mem::swap(&mut p, &mut q);
                }
                let (r, s) = (layout.at(p), layout.at(q));
                let (wrs, mut wm_r, mut wm_s) = (inst.w(r, s), 0, 0);
                for t in p + 1..q {
                    let c = layout.at(t);
                    let (wcr, wcs) = (inst.w(c, r), inst.w(c, s));
                    wm_r += wcr;
                    wm_s += wcs;
                    self.lsum[c] += wcs - wcr;
                    self.rsum[c] += wcr - wcs;
                }
                self.lsum[r] += wm_r + wrs;
                self.rsum[r] -= wm_r + wrs;
                self.lsum[s] -= wm_s + wrs;
                self.rsum[s] += wm_s + wrs;
                layout.swap_positions(p, q, delta);
                self.refresh_lengths(inst, layout, p, q);
                self.refresh_dprefix(layout, p);
            }
            Move::Insert { r, to } => {
                let p = layout.pos(r);
                if p == to {
                    return;
                }
                let (lo, hi) = if p < to { (p + 1, to) } else { (to, p - 1) };
                let mut wm = 0;
                for t in lo..=hi {
                    let c = layout.at(t);
                    let w = inst.w(c, r);
                    wm += w;
                    if p < to {
                        self.lsum[c] -= w;
                        self.rsum[c] += w;
                    } else {
                        self.lsum[c] += w;
                        self.rsum[c] -= w;
                    }
                }
                if p < to {
                    self.lsum[r] += wm;
                    self.rsum[r] -= wm;
                } else {
                    self.lsum[r] -= wm;
                    self.rsum[r] += wm;
                }
                layout.insert(p, to, delta);
                let start = p.min(to);
                self.refresh_lengths(inst, layout, start, p.max(to));
                self.refresh_dprefix(layout, start);
            }
        }
        #[cfg(feature = "strict-invariants")]
        {
            assert!(layout.is_consistent(inst), "cached objective drifted after {m:?}");
            assert_eq!(*self, GainCache::build(inst, layout), "gain cache drifted after {m:?}");
        }
    }
}

/// Applies `m` with its precomputed gain; the free-function form of [`GainCache::apply`].
pub fn apply_move(inst: &Instance, layout: &mut Layout, cache: &mut GainCache, m: Move, delta: HalfUnits) {
    cache.apply(inst, layout, m, delta);
}

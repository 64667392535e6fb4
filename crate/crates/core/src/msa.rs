//! Multi-start simulated annealing with window-based intensification.
//!
//! Every restart draws a random permutation, anneals it with random swap and
//! insertion moves, and hands the best layout of the run to [`ls_wind`] when it
//! is close enough to the global best. After the budget is spent, the global
//! best goes through one more [`ls_wind`] with the larger refinement windows.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{ConfigError, SolveError};
use crate::eval::Layout;
use crate::exact::Backend;
use crate::instance::{HalfUnits, Instance};
use crate::local_search::{ls_wind, SearchState, SearchStats};
use crate::moves::Move;
use crate::window::{WindowConfig, WindowObserver};

#[derive(Clone, Debug, PartialEq)]
pub struct SaParams {
    /// Cooling factor per outer iteration.
    pub alpha: f64,
    /// Inner iterations per temperature, as a multiple of `n`.
    pub z_hat: usize,
    /// Probability of drawing a swap instead of an insertion.
    pub p_swap: f64,
    pub t_min: f64,
    /// Regime crossover fraction; kept for configuration compatibility, it does not alter the search.
    pub gamma: f64,
    /// A restart enters the window search when its F is below `threshold_factor` times the best F.
    pub threshold_factor: f64,
    pub wsv_msa: Vec<usize>,
    pub wsv_refine: Vec<usize>,
    /// Stop a window sweep at the first improvement during restarts.
    pub go_back_msa: bool,
    /// Same, for the refinement pass.
    pub go_back_refine: bool,
    pub backend: Backend,
}

impl Default for SaParams {
    fn default() -> Self {
        SaParams {
            alpha: 0.98,
            z_hat: 100,
            p_swap: 0.35,
            t_min: 0.0001,
            gamma: 0.35,
            threshold_factor: 1.00001,
            wsv_msa: vec![13],
            wsv_refine: vec![17, 19],
            go_back_msa: false,
            go_back_refine: true,
            backend: Backend::default(),
        }
    }
}

fn invalid(name: &'static str, value: impl ToString, reason: &'static str) -> ConfigError {
    ConfigError::Invalid { name, value: value.to_string(), reason }
}

impl SaParams {
    /// Parameters with all window phases switched off.
    pub fn without_windows(mut self) -> Self {
        self.wsv_msa.clear();
        self.wsv_refine.clear();
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid("alpha", self.alpha, "must lie strictly between 0 and 1"));
        }
        if self.z_hat == 0 {
            return Err(invalid("zhat", self.z_hat, "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.p_swap) {
            return Err(invalid("p-swap", self.p_swap, "must lie in [0, 1]"));
        }
        if !(self.t_min > 0.0 && self.t_min.is_finite()) {
            return Err(invalid("tmin", self.t_min, "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(invalid("gamma", self.gamma, "must lie in [0, 1]"));
        }
        if !(self.threshold_factor >= 1.0 && self.threshold_factor.is_finite()) {
            return Err(invalid("threshold", self.threshold_factor, "must be at least 1"));
        }
        for &ws in self.wsv_msa.iter().chain(&self.wsv_refine) {
            if ws < 2 {
                return Err(invalid("window size", ws, "must be at least 2"));
            }
            if let Backend::Dp { max_window } = self.backend {
                if ws > max_window {
                    return Err(invalid("window size", ws, "exceeds the dp backend limit"));
                }
            }
        }
        Ok(())
    }
}

/// Default wall-clock limit for `n` facilities: `ceil(n^1.7)` seconds.
pub fn default_time_limit(n: usize) -> Duration {
    Duration::from_secs((n as f64).powf(1.7).ceil() as u64)
}

/// Work units credited per second when a time limit is expressed as a budget.
pub const WORK_UNITS_PER_SECOND: u64 = 300_000_000;

/// Work charged per annealing move on top of `n`.
const MOVE_OVERHEAD: u64 = 20;

/// When a search stops.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Deadline {
    /// Wall-clock instant.
    At(Instant),
    /// Logical budget in work units; runs are then reproducible.
    Work(u64),
}

impl Deadline {
    pub fn after(d: Duration) -> Self {
        Deadline::At(Instant::now() + d)
    }

    /// The logical budget corresponding to `seconds` of search.
    pub fn work_for_seconds(seconds: f64) -> Self {
        Deadline::Work((seconds * WORK_UNITS_PER_SECOND as f64) as u64)
    }
}

/// Spent work measured against a deadline.
#[derive(Clone, Debug)]
pub struct Budget {
    deadline: Deadline,
    spent: u64,
    ticks: u32,
    expired: bool,
}

impl Budget {
    pub fn new(deadline: Deadline) -> Self {
        Budget { deadline, spent: 0, ticks: 0, expired: false }
    }

    pub fn spent(&self) -> u64 {
        self.spent
    }

    pub fn charge(&mut self, units: u64) {
        self.spent = self.spent.saturating_add(units);
    }

    /// Charges `units` and reports whether the deadline has passed.
    #[inline]
    pub fn tick(&mut self, units: u64) -> bool {
        self.charge(units);
        self.ticks = self.ticks.wrapping_add(1);
        if self.ticks % 256 == 0 || matches!(self.deadline, Deadline::Work(_)) {
            self.check();
        }
        self.expired
    }

    pub fn expired(&mut self) -> bool {
        self.check();
        self.expired
    }

    fn check(&mut self) {
        if !self.expired {
            self.expired = match self.deadline {
                Deadline::At(t) => Instant::now() >= t,
                Deadline::Work(w) => self.spent >= w,
            };
        }
    }
}

/// Largest absolute swap gain of the current layout, in whole units.
pub fn compute_t_max(state: &SearchState<'_>) -> f64 {
    let gains = state.cache.all_swap_gains(state.inst, &state.layout);
    gains.iter().map(|g| g.0.abs()).max().map_or(0.0, |g| HalfUnits(g).as_units())
}

/// Number of cooling steps from `t_max` down to `t_min`, at least one.
pub fn compute_beta_prime(t_max: f64, t_min: f64, alpha: f64) -> u64 {
    if !(t_max > t_min) {
        return 1;
    }
    let steps = (t_min.ln() - t_max.ln()) / alpha.ln();
    ((steps - 1e-9).ceil() as u64).max(1)
}

/// Metropolis acceptance of a move with gain `delta` at temperature `t`.
#[inline]
pub fn accept_move<R: Rng + ?Sized>(delta: HalfUnits, t: f64, rng: &mut R) -> bool {
    delta < HalfUnits::ZERO || rng.gen::<f64>() < (-delta.as_units() / t).exp()
}

fn draw_move<R: Rng + ?Sized>(state: &SearchState<'_>, p_swap: f64, rng: &mut R) -> (Move, HalfUnits) {
    let n = state.layout.n();
    if rng.gen::<f64>() < p_swap {
        let r = rng.gen_range(0..n);
        let mut s = rng.gen_range(0..n - 1);
        if s >= r {
            s += 1;
        }
        (Move::Swap { r, s }, state.cache.swap_gain_unchecked(state.inst, &state.layout, r, s))
    } else {
        let r = rng.gen_range(0..n);
        let to = rng.gen_range(0..n);
        (Move::Insert { r, to }, state.cache.insertion_gain_unchecked(state.inst, &state.layout, r, to))
    }
}

/// Anneals `state` from `t_max` and returns the best layout seen. Stops early
/// when the budget runs out.
pub fn sa_run<R: Rng + ?Sized>(
    state: &mut SearchState<'_>,
    params: &SaParams,
    t_max: f64,
    rng: &mut R,
    budget: &mut Budget,
) -> Layout {
    let n = state.layout.n();
    let mut best = state.layout.clone();
    if n < 2 {
        return best;
    }
    let outer = compute_beta_prime(t_max, params.t_min, params.alpha);
    let inner = params.z_hat * n;
    let mut t = t_max;
    for _ in 0..outer {
        for _ in 0..inner {
            if budget.tick(n as u64 + MOVE_OVERHEAD) {
                return best;
            }
            let (m, delta) = draw_move(state, params.p_swap, rng);
            if accept_move(delta, t, rng) {
                state.apply(m, delta);
                if state.f() < best.f() {
                    best = state.layout.clone();
                }
            }
        }
        t *= params.alpha;
    }
    best
}

/// Result of one multi-start search.
#[derive(Clone, Debug)]
pub struct MsaOutcome {
    pub best: Layout,
    /// Restarts that ran to completion.
    pub restarts: u64,
    /// Restarts whose result passed the gate into the window search.
    pub ls_entries: u64,
    pub stats: SearchStats,
    /// Global best after each completed restart.
    pub history: Vec<HalfUnits>,
    pub work: u64,
}

fn windows(sizes: &[usize], go_back: bool, params: &SaParams, observer: &Option<WindowObserver>) -> WindowConfig {
    WindowConfig { sizes: sizes.to_vec(), go_back, backend: params.backend, observer: observer.clone() }
}

fn add_stats(total: &mut SearchStats, s: &SearchStats) {
    total.moves_applied += s.moves_applied;
    total.windows_solved += s.windows_solved;
    total.windows_improved += s.windows_improved;
    total.work += s.work;
}

/// The generator of restart `k` of a run seeded with `seed`.
pub fn restart_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Restarts annealing from random permutations until `deadline`.
pub fn msa(
    inst: &Instance,
    params: &SaParams,
    seed: u64,
    deadline: Deadline,
    observer: Option<WindowObserver>,
) -> Result<MsaOutcome, SolveError> {
    let cfg = windows(&params.wsv_msa, params.go_back_msa, params, &observer);
    let mut budget = Budget::new(deadline);
    let mut global: Option<Layout> = None;
    let mut out = MsaOutcome {
        best: Layout::identity(inst),
        restarts: 0,
        ls_entries: 0,
        stats: SearchStats::default(),
        history: Vec::new(),
        work: 0,
    };
    for k in 0.. {
        let mut rng = restart_rng(seed, k);
        let mut state = SearchState::new(inst, Layout::random(inst, &mut rng));
        let best = global.get_or_insert_with(|| state.layout.clone());
        // the first start also counts as a candidate even when the budget is gone
        if budget.expired() {
            break;
        }
        budget.charge((inst.n() * inst.n()) as u64);
        let t_max = compute_t_max(&state);
        if t_max > 0.0 {
            let tracked = sa_run(&mut state, params, t_max, &mut rng, &mut budget);
            state.reset(tracked);
        }
        let partial = budget.expired();
        if !partial && (state.f().0 as f64) < best.f().0 as f64 * params.threshold_factor {
            out.ls_entries += 1;
            ls_wind(&mut state, &cfg)?;
        }
        if state.f() < best.f() {
            *best = state.layout.clone();
        }
        budget.charge(state.stats.work);
        add_stats(&mut out.stats, &state.stats);
        if partial {
            break;
        }
        out.restarts += 1;
        out.history.push(best.f());
    }
    out.best = global.expect("at least one start");
    out.work = budget.spent();
    Ok(out)
}

/// Final intensification of a layout with the refinement windows.
pub fn refine(
    inst: &Instance,
    layout: Layout,
    params: &SaParams,
    observer: Option<WindowObserver>,
) -> Result<(Layout, SearchStats), SolveError> {
    let cfg = windows(&params.wsv_refine, params.go_back_refine, params, &observer);
    let mut state = SearchState::new(inst, layout);
    ls_wind(&mut state, &cfg)?;
    Ok((state.layout, state.stats))
}

/// Multi-start search followed by refinement.
pub fn solve(
    inst: &Instance,
    params: &SaParams,
    seed: u64,
    deadline: Deadline,
    observer: Option<WindowObserver>,
) -> Result<MsaOutcome, SolveError> {
    let mut out = msa(inst, params, seed, deadline, observer.clone())?;
    let (best, stats) = refine(inst, out.best.clone(), params, observer)?;
    debug_assert!(best.f() <= out.best.f());
    out.best = best;
    add_stats(&mut out.stats, &stats);
    Ok(out)
}

//! Browser bindings: evaluate a layout, re-optimize one window exactly, run a
//! short reproducible search, and generate random instances.
//!
//! Every entry point takes and returns plain strings (instance text, JSON) so
//! the page needs no extra glue. Facility ids and positions are 1-based.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use srflp::exact::solve_window_dp_unbounded;
use srflp::msa::{solve as msa_solve, Deadline, SaParams};
use srflp::window::{extract_window_subproblem, orient_window};
use srflp::{generate_random_instance, objective, parse_instance, Instance, Layout, WindowBounds};

/// Largest search budget accepted from the page, in seconds of equivalent work.
const MAX_BUDGET_SECONDS: f64 = 5.0;

#[derive(Debug, Serialize)]
struct Facility {
    id: usize,
    length: i64,
    /// Left edge on the line.
    start: i64,
}

#[derive(Debug, Serialize)]
struct LayoutView {
    objective: String,
    layout: Vec<usize>,
    facilities: Vec<Facility>,
    total_length: i64,
}

#[derive(Debug, Serialize)]
struct WindowView {
    before: String,
    improved: bool,
    #[serde(flatten)]
    after: LayoutView,
}

#[derive(Debug, Serialize)]
struct SolveView {
    restarts: u64,
    windows_solved: u64,
    windows_improved: u64,
    #[serde(flatten)]
    best: LayoutView,
}

fn read_instance(text: &str) -> Result<Instance, String> {
    parse_instance(text).map_err(|e| e.to_string())
}

/// Accepts ids separated by commas or whitespace; an empty string means the identity.
fn read_layout(inst: &Instance, text: &str) -> Result<Layout, String> {
    let ids: Vec<usize> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| format!("not a facility id: {t:?}")))
        .collect::<Result<_, _>>()?;
    if ids.is_empty() {
        return Ok(Layout::identity(inst));
    }
    let perm: Vec<usize> = ids.iter().map(|&id| id.wrapping_sub(1)).collect();
    Layout::new(inst, perm).ok_or_else(|| format!("layout must list each of the ids 1..={} once", inst.n()))
}

fn view(inst: &Instance, layout: &Layout) -> LayoutView {
    let mut start = 0;
    let facilities = layout
        .perm()
        .iter()
        .map(|&f| {
            let fac = Facility { id: f + 1, length: inst.len_of(f), start };
            start += inst.len_of(f);
            fac
        })
        .collect();
    LayoutView {
        objective: layout.f().to_string(),
        layout: layout.perm().iter().map(|f| f + 1).collect(),
        facilities,
        total_length: start,
    }
}

fn json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

pub fn evaluate_layout_json(instance: &str, layout: &str) -> Result<String, String> {
    let inst = read_instance(instance)?;
    let lay = read_layout(&inst, layout)?;
    debug_assert_eq!(lay.f(), objective(&inst, lay.perm()));
    json(&view(&inst, &lay))
}

/// Replaces positions `sw..=ew` (1-based) by their exact optimum.
pub fn optimize_window_json(instance: &str, layout: &str, sw: usize, ew: usize) -> Result<String, String> {
    let inst = read_instance(instance)?;
    let lay = read_layout(&inst, layout)?;
    if sw == 0 || ew > inst.n() || ew.saturating_sub(sw) + 1 > 16 {
        return Err(format!("window must satisfy 1 <= start < end <= {} and hold at most 16 facilities", inst.n()));
    }
    let bounds = WindowBounds::new(sw - 1, ew - 1, inst.n()).map_err(|e| e.to_string())?;
    let sub = extract_window_subproblem(&inst, &lay, bounds).map_err(|e| e.to_string())?;
    let sol = solve_window_dp_unbounded(&sub).map_err(|e| e.to_string())?;
    let order = orient_window(&sol.order, &sub).map_err(|e| e.to_string())?;
    let improved = sub.fixed + sol.value < lay.f();
    let mut perm = lay.perm().to_vec();
    if improved {
        perm[sw - 1..ew].copy_from_slice(&order);
    }
    let after = Layout::new(&inst, perm).expect("block reorder keeps a permutation");
    json(&WindowView { before: lay.f().to_string(), improved, after: view(&inst, &after) })
}

/// Multi-start search with a logical budget, so equal inputs give equal results.
pub fn solve_json(instance: &str, seed: u64, budget_seconds: f64) -> Result<String, String> {
    let inst = read_instance(instance)?;
    if !(budget_seconds > 0.0 && budget_seconds <= MAX_BUDGET_SECONDS) {
        return Err(format!("budget must lie in (0, {MAX_BUDGET_SECONDS}] seconds"));
    }
    let params = SaParams { z_hat: 20, ..SaParams::default() };
    let out = msa_solve(&inst, &params, seed, Deadline::work_for_seconds(budget_seconds), None).map_err(|e| e.to_string())?;
    json(&SolveView {
        restarts: out.restarts,
        windows_solved: out.stats.windows_solved,
        windows_improved: out.stats.windows_improved,
        best: view(&inst, &out.best),
    })
}

pub fn random_instance_text(n: usize, seed: u64) -> Result<String, String> {
    if !(2..=60).contains(&n) {
        return Err("n must lie in 2..=60".into());
    }
    generate_random_instance(n, (1, 10), (0, 10), seed).map(|i| i.render()).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = evaluateLayout)]
pub fn evaluate_layout(instance: &str, layout: &str) -> Result<String, JsError> {
    evaluate_layout_json(instance, layout).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = optimizeWindow)]
pub fn optimize_window(instance: &str, layout: &str, sw: usize, ew: usize) -> Result<String, JsError> {
    optimize_window_json(instance, layout, sw, ew).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn solve(instance: &str, seed: u32, budget_seconds: f64) -> Result<String, JsError> {
    solve_json(instance, seed as u64, budget_seconds).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = randomInstance)]
pub fn random_instance(n: usize, seed: u32) -> Result<String, JsError> {
    random_instance_text(n, seed as u64).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    const FIG1: &str = "6\n3 2 1 4 2 1\n0 1 4 3 2 1\n1 0 3 1 3 2\n4 3 0 1 0 1\n3 1 1 0 2 2\n2 3 0 2 0 3\n1 2 1 2 3 4\n";

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn evaluates_worked_example() {
        let v = parse(&evaluate_layout_json(FIG1, "").unwrap());
        assert_eq!(v["objective"], "143.5");
        assert_eq!(v["total_length"], 13);
        assert_eq!(v["facilities"][3]["start"], 6);
        let same = parse(&evaluate_layout_json(FIG1, "1, 2 3,4 5 6").unwrap());
        assert_eq!(same["objective"], "143.5");
        let rev = parse(&evaluate_layout_json(FIG1, "6 5 4 3 2 1").unwrap());
        assert_eq!(rev["objective"], "143.5");
    }

    #[test]
    fn rejects_bad_layouts() {
        assert!(evaluate_layout_json(FIG1, "1 2 3").is_err());
        assert!(evaluate_layout_json(FIG1, "1 1 2 3 4 5").is_err());
        assert!(evaluate_layout_json(FIG1, "0 1 2 3 4 5").is_err());
        assert!(evaluate_layout_json(FIG1, "a").is_err());
        assert!(evaluate_layout_json("3\n1 2", "").is_err());
    }

    #[test]
    fn window_never_worsens() {
        let whole = parse(&optimize_window_json(FIG1, "", 1, 6).unwrap());
        assert_eq!(whole["before"], "143.5");
        let after: f64 = whole["objective"].as_str().unwrap().parse().unwrap();
        assert!(after <= 143.5);
        // running it again on the result changes nothing
        let layout: Vec<String> = whole["layout"].as_array().unwrap().iter().map(|x| x.to_string()).collect();
        let again = parse(&optimize_window_json(FIG1, &layout.join(" "), 2, 5).unwrap());
        assert_eq!(again["improved"], false);
        assert_eq!(again["objective"], whole["objective"]);
        assert!(optimize_window_json(FIG1, "", 3, 3).is_err());
        assert!(optimize_window_json(FIG1, "", 0, 3).is_err());
        assert!(optimize_window_json(FIG1, "", 2, 7).is_err());
    }

    #[test]
    fn solve_is_reproducible() {
        let inst = random_instance_text(14, 3).unwrap();
        let a = solve_json(&inst, 5, 0.05).unwrap();
        assert_eq!(a, solve_json(&inst, 5, 0.05).unwrap());
        let window = parse(&optimize_window_json(&inst, &parse(&a)["layout"].as_array().unwrap().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "), 1, 14).unwrap());
        assert_eq!(window["improved"], false);
        assert!(solve_json(&inst, 5, 0.0).is_err());
        assert!(solve_json(&inst, 5, 60.0).is_err());
    }

    #[test]
    fn random_instances_parse() {
        let text = random_instance_text(8, 1).unwrap();
        assert_eq!(parse_instance(&text).unwrap().n(), 8);
        assert!(random_instance_text(1, 1).is_err());
    }
}

use std::collections::BTreeSet;

use srflp::exact::betweenness::{build_betweenness_model, BetweennessModel, Sense};
use srflp::exact::export::{export_model, ModelFormat};
use srflp::window::extract_window_subproblem;
use srflp::{generate_random_instance, Layout, WindowBounds};

type RowKey = (String, Vec<(String, i64)>, &'static str, i64);

fn model(ws: usize) -> BetweennessModel {
    let n = ws + 3;
    let inst = generate_random_instance(n, (1, 9), (0, 9), ws as u64).unwrap();
    let sub = extract_window_subproblem(&inst, &Layout::identity(&inst), WindowBounds::new(1, ws, n).unwrap()).unwrap();
    build_betweenness_model(&sub, true)
}

fn rows_of(m: &BetweennessModel) -> BTreeSet<RowKey> {
    m.rows
        .iter()
        .map(|r| {
            let op = match r.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            let mut terms: Vec<(String, i64)> = r.terms.iter().map(|&(v, c)| (m.vars[v].to_string(), c)).collect();
            terms.sort();
            (r.name.clone(), terms, op, r.rhs)
        })
        .collect()
}

/// Rows of an LP file, read back from its token stream.
fn parse_lp(text: &str) -> BTreeSet<RowKey> {
    let body = text.split("Subject To\n").nth(1).unwrap().split("Binary\n").next().unwrap();
    let mut statements = Vec::new();
    for line in body.lines() {
        if line.starts_with("   ") {
            let last: &mut String = statements.last_mut().unwrap();
            last.push_str(line);
        } else {
            statements.push(line.to_string());
        }
    }
    statements
        .into_iter()
        .map(|st| {
            let (name, rest) = st.trim().split_once(": ").unwrap();
            let tokens: Vec<&str> = rest.split_whitespace().collect();
            let (op, rhs) = (tokens[tokens.len() - 2], tokens[tokens.len() - 1].parse().unwrap());
            let op = match op {
                "<=" => "<=",
                ">=" => ">=",
                "=" => "=",
                other => panic!("operator {other}"),
            };
            let mut terms = Vec::new();
            let mut sign = 1;
            let mut coef = 1;
            for t in &tokens[..tokens.len() - 2] {
                match *t {
                    "+" => sign = 1,
                    "-" => sign = -1,
                    t if t.starts_with("x_") => {
                        terms.push((t.to_string(), sign * coef));
                        sign = 1;
                        coef = 1;
                    }
                    t => coef = t.parse().unwrap(),
                }
            }
            terms.sort();
            (name.to_string(), terms, op, rhs)
        })
        .collect()
}

#[test]
fn lp_round_trip() {
    for ws in 2..=4 {
        let m = model(ws);
        let text = export_model(&m, ModelFormat::Lp);
        assert_eq!(parse_lp(&text), rows_of(&m), "ws = {ws}");
        assert_eq!(text, export_model(&m, ModelFormat::Lp));
    }
}

#[test]
fn two_facility_window_has_only_dummy_triples() {
    let m = model(2);
    // every triple involves a dummy
    assert!(m.vars.iter().all(|v| [v.i, v.k, v.j].iter().any(|&f| f >= 2)));
    let text = export_model(&m, ModelFormat::Lp);
    assert!(text.contains(" dummy: x_3_1_4 + x_3_2_4 = 2\n"));
    assert!(text.lines().next().unwrap().starts_with('\\'));
    let binaries = text.split("Binary\n").nth(1).unwrap().split_whitespace().filter(|t| *t != "End").count();
    assert_eq!(binaries, m.vars.len());
}

#[test]
fn mps_sections_and_counts() {
    let m = model(3);
    let text = export_model(&m, ModelFormat::Mps);
    let sections: Vec<&str> = text.lines().filter(|l| !l.starts_with(' ') && !l.starts_with('*')).collect();
    assert_eq!(sections, ["NAME betweenness", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"]);
    let rows = text.split("ROWS\n").nth(1).unwrap().split("COLUMNS").next().unwrap().lines().count();
    assert_eq!(rows, m.rows.len() + 1);
    assert_eq!(text.matches(" BV BND ").count(), m.vars.len());
}

#[test]
fn improvement_row_only_on_request() {
    let n = 7;
    let inst = generate_random_instance(n, (1, 9), (0, 9), 1).unwrap();
    let sub = extract_window_subproblem(&inst, &Layout::identity(&inst), WindowBounds::new(2, 5, n).unwrap()).unwrap();
    let with = export_model(&build_betweenness_model(&sub, true), ModelFormat::Lp);
    let without = export_model(&build_betweenness_model(&sub, false), ModelFormat::Lp);
    assert!(with.contains(" improve: "));
    assert!(!without.contains(" improve: "));
}

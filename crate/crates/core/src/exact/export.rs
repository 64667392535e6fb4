//! Text serialization of betweenness models for external MIP solvers.

use std::fmt::Write;
use std::str::FromStr;

use super::betweenness::{BetweennessModel, Sense};
use crate::error::SolveError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelFormat {
    Lp,
    Mps,
}

impl ModelFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ModelFormat::Lp => "lp",
            ModelFormat::Mps => "mps",
        }
    }
}

impl FromStr for ModelFormat {
    type Err = SolveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lp" | "lp-text" => Ok(ModelFormat::Lp),
            "mps" | "mps-text" => Ok(ModelFormat::Mps),
            other => Err(SolveError::Format(other.to_string())),
        }
    }
}

const TERMS_PER_LINE: usize = 6;

pub fn export_model(model: &BetweennessModel, format: ModelFormat) -> String {
    match format {
        ModelFormat::Lp => to_lp(model),
        ModelFormat::Mps => to_mps(model),
    }
}

fn header(model: &BetweennessModel, mark: &str) -> String {
    let free = model.m - model.dummies;
    let mut s = String::new();
    let _ = writeln!(s, "{mark} betweenness model: {free} facilities, {} dummies", model.dummies);
    let _ = writeln!(s, "{mark} objective constant: {}", model.objective_constant);
    let _ = writeln!(s, "{mark} window offset (min_wd): {}", model.min_wd);
    let _ = writeln!(s, "{mark} fixed outside cost: {}", model.fixed);
    let _ = writeln!(s, "{mark} layout objective = optimum + constant + offset + fixed");
    s
}

fn write_terms(out: &mut String, terms: impl Iterator<Item = (i64, String)>) {
    let mut first = true;
    for (n, (c, name)) in terms.enumerate() {
        if n > 0 && n % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < 0 { "-" } else if first { "" } else { "+" };
        let mag = c.abs();
        if !first || c < 0 {
            out.push(' ');
        }
        out.push_str(sign);
        if !sign.is_empty() {
            out.push(' ');
        }
        if mag != 1 {
            let _ = write!(out, "{mag} ");
        }
        out.push_str(&name);
        first = false;
    }
}

fn to_lp(model: &BetweennessModel) -> String {
    let mut out = header(model, "\\");
    out.push_str("Minimize\n obj: ");
    let terms: Vec<(i64, String)> = model
        .objective
        .iter()
        .zip(&model.vars)
        .filter(|(&c, _)| c != 0)
        .map(|(&c, v)| (c, v.to_string()))
        .collect();
    if terms.is_empty() {
        let _ = write!(out, "0 {}", model.vars[0]);
    } else {
        write_terms(&mut out, terms.into_iter());
    }
    out.push_str("\nSubject To\n");
    for r in &model.rows {
        let _ = write!(out, " {}: ", r.name);
        write_terms(&mut out, r.terms.iter().map(|&(v, c)| (c, model.vars[v].to_string())));
        let op = match r.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", r.rhs);
    }
    out.push_str("Binary\n");
    for chunk in model.vars.chunks(TERMS_PER_LINE) {
        let names: Vec<String> = chunk.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, " {}", names.join(" "));
    }
    out.push_str("End\n");
    out
}

fn to_mps(model: &BetweennessModel) -> String {
    let mut out = header(model, "*");
    out.push_str("NAME betweenness\nROWS\n N obj\n");
    for r in &model.rows {
        let t = match r.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        let _ = writeln!(out, " {t} {}", r.name);
    }
    let mut columns: Vec<Vec<(&str, i64)>> = vec![Vec::new(); model.vars.len()];
    for (v, &c) in model.objective.iter().enumerate() {
        if c != 0 {
            columns[v].push(("obj", c));
        }
    }
    for r in &model.rows {
        for &(v, c) in &r.terms {
            columns[v].push((&r.name, c));
        }
    }
    out.push_str("COLUMNS\n MARKER MARKER INTORG\n");
    for (v, entries) in model.vars.iter().zip(&columns) {
        for (row, c) in entries {
            let _ = writeln!(out, " {v} {row} {c}");
        }
    }
    out.push_str(" MARKER MARKER INTEND\nRHS\n");
    for r in model.rows.iter().filter(|r| r.rhs != 0) {
        let _ = writeln!(out, " RHS {} {}", r.name, r.rhs);
    }
    out.push_str("BOUNDS\n");
    for v in &model.vars {
        let _ = writeln!(out, " BV BND {v}");
    }
    out.push_str("ENDATA\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::betweenness::build_free_model;

    #[test]
    fn format_tags() {
        assert_eq!("lp".parse::<ModelFormat>().unwrap(), ModelFormat::Lp);
        assert_eq!("MPS".parse::<ModelFormat>().unwrap(), ModelFormat::Mps);
        assert!(matches!("gms".parse::<ModelFormat>(), Err(SolveError::Format(_))));
    }

    #[test]
    fn lp_layout() {
        let m = build_free_model(&[1, 2, 3], &[vec![0, 1, 0], vec![1, 0, 2], vec![0, 2, 0]]);
        let text = export_model(&m, ModelFormat::Lp);
        assert!(text.contains("Minimize\n obj: "));
        assert!(text.contains(" c1_1_2_3: x_1_3_2 + x_1_2_3 + x_2_1_3 = 1\n"));
        assert!(text.ends_with("End\n"));
        assert_eq!(text, export_model(&m, ModelFormat::Lp));
        let mps = export_model(&m, ModelFormat::Mps);
        assert!(mps.contains(" E c1_1_2_3\n"));
        assert!(mps.contains(" RHS c1_1_2_3 1\n"));
        assert!(mps.ends_with("ENDATA\n"));
    }

    #[test]
    fn negative_leading_coefficient() {
        let mut s = String::new();
        write_terms(&mut s, vec![(-1, "a".to_string()), (3, "b".to_string()), (-2, "c".to_string())].into_iter());
        assert_eq!(s, " - a + 3 b - 2 c");
    }
}

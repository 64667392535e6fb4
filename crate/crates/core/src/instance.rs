//! Problem instances and exact half-unit arithmetic.
//!
//! An instance is a list of facility lengths plus a symmetric matrix of pairwise
//! weights. Objective values are half-integral (centers sit at half lengths), so
//! every cost in this crate is carried as [`HalfUnits`], an integer holding twice
//! the real value.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{InstanceError, ParseError};

/// Twice a cost or distance, stored exactly as an integer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfUnits(pub i64);

impl HalfUnits {
    pub const ZERO: HalfUnits = HalfUnits(0);

    /// Builds a value from a whole number of units.
    pub fn from_units(units: i64) -> Self {
        HalfUnits(2 * units)
    }

    /// The raw doubled integer.
    pub fn raw(self) -> i64 {
        self.0
    }

    /// Real value in whole units. Exact for |value| < 2^53.
    pub fn as_units(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Parses the one-decimal rendering produced by `Display` (also accepts integers).
    pub fn parse_units(s: &str) -> Option<Self> {
        let s = s.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, "0"),
        };
        let whole: i64 = int.parse().ok()?;
        let half = match frac.trim_end_matches('0') {
            "" => 0,
            "5" => 1,
            _ => return None,
        };
        let v = 2 * whole + half;
        Some(HalfUnits(if neg { -v } else { v }))
    }
}

impl fmt::Display for HalfUnits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let a = self.0.unsigned_abs();
        write!(f, "{}{}.{}", sign, a / 2, if a % 2 == 1 { 5 } else { 0 })
    }
}

impl Add for HalfUnits {
    type Output = HalfUnits;
    fn add(self, rhs: Self) -> Self {
        HalfUnits(self.0 + rhs.0)
    }
}

impl Sub for HalfUnits {
    type Output = HalfUnits;
    fn sub(self, rhs: Self) -> Self {
        HalfUnits(self.0 - rhs.0)
    }
}

impl Neg for HalfUnits {
    type Output = HalfUnits;
    fn neg(self) -> Self {
        HalfUnits(-self.0)
    }
}

impl AddAssign for HalfUnits {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl SubAssign for HalfUnits {
    fn sub_assign(&mut self, rhs: Self) {
        self.0 -= rhs.0;
    }
}

impl Sum for HalfUnits {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        HalfUnits(iter.map(|h| h.0).sum())
    }
}

/// A single-row facility layout instance.
///
/// Facilities are indexed `0..n` internally; files and reports number them from 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    lengths: Vec<i64>,
    // row-major n*n
    weights: Vec<i64>,
}

/// A broken instance invariant, as reported by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    TooFewFacilities(usize),
    LengthCount { expected: usize, found: usize },
    WeightShape { expected: usize, found: usize },
    NegativeLength { facility: usize, value: i64 },
    NegativeWeight { i: usize, j: usize, value: i64 },
    Asymmetric { i: usize, j: usize, wij: i64, wji: i64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewFacilities(n) => write!(f, "need at least 2 facilities, got {n}"),
            Violation::LengthCount { expected, found } => {
                write!(f, "expected {expected} lengths, found {found}")
            }
            Violation::WeightShape { expected, found } => {
                write!(f, "expected {expected} weight entries, found {found}")
            }
            Violation::NegativeLength { facility, value } => {
                write!(f, "length of facility {} is negative ({value})", facility + 1)
            }
            Violation::NegativeWeight { i, j, value } => {
                write!(f, "weight ({}, {}) is negative ({value})", i + 1, j + 1)
            }
            Violation::Asymmetric { i, j, wij, wji } => {
                write!(f, "w[{}][{}] = {wij} but w[{}][{}] = {wji}", i + 1, j + 1, j + 1, i + 1)
            }
        }
    }
}

/// Checks the instance invariants on raw data. Diagonal entries are not inspected.
pub fn validate(lengths: &[i64], weights: &[Vec<i64>]) -> Vec<Violation> {
    let n = lengths.len();
    let mut out = Vec::new();
    if n < 2 {
        out.push(Violation::TooFewFacilities(n));
    }
    if weights.len() != n {
        out.push(Violation::LengthCount { expected: weights.len(), found: n });
    }
    for (facility, &value) in lengths.iter().enumerate() {
        if value < 0 {
            out.push(Violation::NegativeLength { facility, value });
        }
    }
    for (i, row) in weights.iter().enumerate() {
        if row.len() != weights.len() {
            out.push(Violation::WeightShape { expected: weights.len(), found: row.len() });
            continue;
        }
        for (j, &value) in row.iter().enumerate() {
            if i == j {
                continue;
            }
            if value < 0 {
                out.push(Violation::NegativeWeight { i, j, value });
            }
            if j > i {
                if let Some(&wji) = weights.get(j).and_then(|r| r.get(i)) {
                    if wji != value {
                        out.push(Violation::Asymmetric { i, j, wij: value, wji });
                    }
                }
            }
        }
    }
    out
}

impl Instance {
    /// Builds an instance from lengths and a full square matrix. The diagonal is zeroed.
    pub fn new(lengths: Vec<i64>, weights: Vec<Vec<i64>>) -> Result<Self, InstanceError> {
        let violations = validate(&lengths, &weights);
        if !violations.is_empty() {
            return Err(InstanceError::Invalid(violations));
        }
        let n = lengths.len();
        let mut flat = vec![0; n * n];
        for (i, row) in weights.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                if i != j {
                    flat[i * n + j] = w;
                }
            }
        }
        Ok(Instance { lengths, weights: flat })
    }

    /// Builds an instance from lengths and the strict upper triangle, row by row.
    pub fn from_upper(lengths: Vec<i64>, upper: &[Vec<i64>]) -> Result<Self, InstanceError> {
        let n = lengths.len();
        let mut full = vec![vec![0; n]; n];
        for (i, row) in upper.iter().enumerate() {
            for (off, &w) in row.iter().enumerate() {
                let j = i + 1 + off;
                if j < n {
                    full[i][j] = w;
                    full[j][i] = w;
                }
            }
        }
        Instance::new(lengths, full)
    }

    /// Re-checks the invariants against the stored data.
    pub fn validate(&self) -> Vec<Violation> {
        let rows: Vec<Vec<i64>> = (0..self.n()).map(|i| self.row(i).to_vec()).collect();
        validate(&self.lengths, &rows)
    }

    pub fn n(&self) -> usize {
        self.lengths.len()
    }

    pub fn len_of(&self, f: usize) -> i64 {
        self.lengths[f]
    }

    pub fn lengths(&self) -> &[i64] {
        &self.lengths
    }

    #[inline]
    pub fn w(&self, i: usize, j: usize) -> i64 {
        self.weights[i * self.n() + j]
    }

    /// Row `i` of the weight matrix (diagonal entry is 0).
    #[inline]
    pub fn row(&self, i: usize) -> &[i64] {
        let n = self.n();
        &self.weights[i * n..(i + 1) * n]
    }

    pub fn total_length(&self) -> i64 {
        self.lengths.iter().sum()
    }

    pub fn max_weight(&self) -> i64 {
        self.weights.iter().copied().max().unwrap_or(0)
    }

    /// Renders the canonical text format: n, lengths, then the full matrix.
    pub fn render(&self) -> String {
        let n = self.n();
        let mut s = format!("{n}\n");
        s.push_str(&join(self.lengths.iter()));
        s.push('\n');
        for i in 0..n {
            s.push_str(&join(self.row(i).iter()));
            s.push('\n');
        }
        s
    }

    /// Same instance with every weight multiplied by `k`.
    pub fn scale_weights(&self, k: i64) -> Instance {
        Instance {
            lengths: self.lengths.clone(),
            weights: self.weights.iter().map(|w| w * k).collect(),
        }
    }

    /// Relabels facilities: facility `f` of `self` becomes `relabel[f]` of the result.
    pub fn relabel(&self, relabel: &[usize]) -> Instance {
        let n = self.n();
        let mut lengths = vec![0; n];
        let mut weights = vec![0; n * n];
        for i in 0..n {
            lengths[relabel[i]] = self.lengths[i];
            for j in 0..n {
                weights[relabel[i] * n + relabel[j]] = self.w(i, j);
            }
        }
        Instance { lengths, weights }
    }
}

fn join<'a>(it: impl Iterator<Item = &'a i64>) -> String {
    it.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

/// Parses the canonical instance format.
///
/// Line 1 holds `n`, line 2 the `n` lengths, and the next `n` lines the weight
/// rows. Rows may be full (`n` entries, lower triangle must mirror the upper) or
/// upper-triangular (row `i` lists `w[i][i+1..n]`). Any whitespace separates
/// tokens; blank lines are skipped.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());

    let (line_no, first) = lines.next().ok_or(ParseError::UnexpectedEof { what: "facility count" })?;
    let header = tokens(line_no, first)?;
    if header.len() != 1 {
        return Err(ParseError::RowLength { line: line_no, row: 0, expected: 1, found: header.len() });
    }
    let n = header[0];
    if n < 2 {
        return Err(ParseError::Invalid { line: line_no, column: 1, message: format!("facility count {n} < 2") });
    }
    let n = n as usize;

    let (line_no, l) = lines.next().ok_or(ParseError::UnexpectedEof { what: "lengths" })?;
    let lengths = tokens(line_no, l)?;
    if lengths.len() != n {
        return Err(ParseError::RowLength { line: line_no, row: 0, expected: n, found: lengths.len() });
    }
    if let Some(col) = lengths.iter().position(|&v| v < 0) {
        return Err(ParseError::Invalid { line: line_no, column: col + 1, message: "negative length".into() });
    }

    let mut full = vec![vec![0i64; n]; n];
    let mut row_lines = Vec::with_capacity(n);
    let mut upper_form = None;
    for i in 0..n {
        if upper_form == Some(true) && i == n - 1 {
            // the last upper-triangular row is empty
            break;
        }
        let (line_no, l) = lines.next().ok_or(ParseError::UnexpectedEof { what: "weight row" })?;
        let row = tokens(line_no, l)?;
        let is_upper = match upper_form {
            None => {
                let up = row.len() == n - 1 && n > 1 && row.len() != n;
                upper_form = Some(up);
                up
            }
            Some(up) => up,
        };
        let expected = if is_upper { n - 1 - i } else { n };
        if row.len() != expected {
            return Err(ParseError::RowLength { line: line_no, row: i + 1, expected, found: row.len() });
        }
        if let Some(col) = row.iter().position(|&v| v < 0) {
            return Err(ParseError::Invalid { line: line_no, column: col + 1, message: "negative weight".into() });
        }
        if is_upper {
            for (off, &w) in row.iter().enumerate() {
                full[i][i + 1 + off] = w;
            }
        } else {
            full[i].copy_from_slice(&row);
        }
        row_lines.push(line_no);
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(ParseError::Invalid { line: line_no, column: 1, message: "trailing data".into() });
    }

    if upper_form == Some(false) {
        for i in 0..n {
            for j in 0..i {
                if full[i][j] != full[j][i] {
                    return Err(ParseError::Invalid {
                        line: row_lines[i],
                        column: j + 1,
                        message: format!("asymmetric: w[{}][{}] = {} but w[{}][{}] = {}", i + 1, j + 1, full[i][j], j + 1, i + 1, full[j][i]),
                    });
                }
            }
        }
    }
    for i in 0..n {
        full[i][i] = 0;
        for j in 0..i {
            full[i][j] = full[j][i];
        }
    }
    Instance::new(lengths, full).map_err(|e| ParseError::Invalid { line: 1, column: 1, message: e.to_string() })
}

fn tokens(line: usize, l: &str) -> Result<Vec<i64>, ParseError> {
    let mut col = 0;
    let mut out = Vec::new();
    for tok in l.split_whitespace() {
        col += 1;
        let v: i64 = tok.parse().map_err(|_| ParseError::Malformed { line, column: col, token: tok.to_string() })?;
        out.push(v);
    }
    Ok(out)
}

/// Draws a random instance with lengths and weights uniform in the given inclusive ranges.
pub fn generate_random_instance(
    n: usize,
    length_range: (i64, i64),
    weight_range: (i64, i64),
    seed: u64,
) -> Result<Instance, InstanceError> {
    if n < 2 {
        return Err(InstanceError::Invalid(vec![Violation::TooFewFacilities(n)]));
    }
    for (lo, hi) in [length_range, weight_range] {
        if lo < 0 || lo > hi {
            return Err(InstanceError::BadRange { lo, hi });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lengths: Vec<i64> = (0..n).map(|_| rng.gen_range(length_range.0..=length_range.1)).collect();
    let mut weights = vec![vec![0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = rng.gen_range(weight_range.0..=weight_range.1);
            weights[i][j] = w;
            weights[j][i] = w;
        }
    }
    Instance::new(lengths, weights)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const FIG1: &str = "6
3 2 1 4 2 1
0 1 4 3 2 1
1 0 3 1 3 2
4 3 0 1 0 1
3 1 1 0 2 2
2 3 0 2 0 3
1 2 1 2 3 4
";

    pub(crate) fn fig1() -> Instance {
        parse_instance(FIG1).unwrap()
    }

    #[test]
    fn parses_worked_example() {
        let inst = fig1();
        assert_eq!(inst.n(), 6);
        assert_eq!(inst.lengths(), &[3, 2, 1, 4, 2, 1]);
        assert_eq!(inst.w(0, 2), 4);
        assert_eq!(inst.w(4, 5), 3);
        // row-6 diagonal entry of 4 is dropped
        assert_eq!(inst.w(5, 5), 0);
    }

    #[test]
    fn minimal_instance() {
        let inst = parse_instance("2\n1 1\n0 0\n0 0\n").unwrap();
        assert_eq!(inst.n(), 2);
        assert_eq!(inst.w(0, 1), 0);
    }

    #[test]
    fn short_row_is_reported() {
        let text = FIG1.replace("4 3 0 1 0 1", "4 3 0 1 0");
        match parse_instance(&text) {
            Err(ParseError::RowLength { row, line, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(line, 5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_and_negative_tokens() {
        assert!(matches!(parse_instance("2\n1 x\n0 1\n1 0\n"), Err(ParseError::Malformed { line: 2, column: 2, .. })));
        assert!(matches!(parse_instance("2\n1 -1\n0 1\n1 0\n"), Err(ParseError::Invalid { line: 2, .. })));
        assert!(matches!(parse_instance("2\n1 1\n0 3\n4 0\n"), Err(ParseError::Invalid { line: 4, column: 1, .. })));
    }

    #[test]
    fn upper_triangle_and_crlf() {
        let inst = parse_instance("3\r\n1 2 3\r\n5 6\r\n7\r\n\r\n").unwrap();
        assert_eq!(inst.w(0, 1), 5);
        assert_eq!(inst.w(2, 0), 6);
        assert_eq!(inst.w(2, 1), 7);
    }

    #[test]
    fn validate_reports_each_violation() {
        let inst = fig1();
        let rows: Vec<Vec<i64>> = (0..6).map(|i| inst.row(i).to_vec()).collect();
        assert!(validate(inst.lengths(), &rows).is_empty());

        let asym = validate(&[1, 1], &[vec![0, 3], vec![4, 0]]);
        assert_eq!(asym, vec![Violation::Asymmetric { i: 0, j: 1, wij: 3, wji: 4 }]);

        let neg = validate(&[1, -1], &[vec![0, 0], vec![0, 0]]);
        assert_eq!(neg, vec![Violation::NegativeLength { facility: 1, value: -1 }]);
    }

    #[test]
    fn generator_is_deterministic_and_bounded() {
        let a = generate_random_instance(6, (1, 10), (0, 10), 7).unwrap();
        let b = generate_random_instance(6, (1, 10), (0, 10), 7).unwrap();
        assert_eq!(a, b);

        let d = generate_random_instance(2, (1, 1), (5, 5), 0).unwrap();
        assert_eq!(d.lengths(), &[1, 1]);
        assert_eq!(d.w(0, 1), 5);

        let big = generate_random_instance(20, (0, 20), (0, 10), 42).unwrap();
        assert!(big.lengths().iter().all(|&l| (0..=20).contains(&l)));
        assert!((0..20).all(|i| big.row(i).iter().all(|&w| (0..=10).contains(&w))));
        for i in 0..20 {
            assert_eq!(big.w(i, i), 0);
            for j in 0..20 {
                assert_eq!(big.w(i, j), big.w(j, i));
            }
        }

        assert!(generate_random_instance(5, (3, 2), (0, 1), 0).is_err());
        assert!(generate_random_instance(1, (1, 2), (0, 1), 0).is_err());
    }

    #[test]
    fn half_units_render() {
        assert_eq!(HalfUnits(287).to_string(), "143.5");
        assert_eq!(HalfUnits(30).to_string(), "15.0");
        assert_eq!(HalfUnits(-3).to_string(), "-1.5");
        assert_eq!(HalfUnits::parse_units("143.5"), Some(HalfUnits(287)));
        assert_eq!(HalfUnits::parse_units("15.0"), Some(HalfUnits(30)));
        assert_eq!(HalfUnits::parse_units("-1.5"), Some(HalfUnits(-3)));
        assert_eq!(HalfUnits::parse_units("1.25"), None);
    }

    proptest::proptest! {
        #[test]
        fn render_parse_round_trip(n in 2usize..12, seed in 0u64..1000) {
            let inst = generate_random_instance(n, (0, 30), (0, 16), seed).unwrap();
            proptest::prop_assert_eq!(parse_instance(&inst.render()).unwrap(), inst);
        }
    }
}

//! Novikov diagrams and tableaux, their associated nonassociative words, and
//! enumeration of the tableau basis in a fixed multidegree.
//!
//! A tableau is stored row by row with generator indices (1-based). The
//! first row carries the nose as its last entry, so a diagram with Young
//! rows `(r_1, ..., r_k)` has row lengths `(r_1 + 1, r_2, ..., r_k)`. The
//! degree-one tableau is a lone nose box, Young rows `(0)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Young row lengths of a Novikov diagram (the nose is implicit).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NovikovDiagram {
    rows: Vec<usize>,
}

impl NovikovDiagram {
    pub fn new(rows: Vec<usize>) -> Result<Self> {
        if rows == [0] {
            return Ok(NovikovDiagram { rows });
        }
        if rows.is_empty() || rows.contains(&0) {
            return Err(Error::Shape(format!(
                "row lengths {rows:?} must be positive"
            )));
        }
        if rows.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Shape(format!(
                "row lengths {rows:?} must be non-increasing"
            )));
        }
        Ok(NovikovDiagram { rows })
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// Number of boxes including the nose.
    pub fn degree(&self) -> usize {
        self.rows.iter().sum::<usize>() + 1
    }

    /// Column heights `s_1, s_2, ...` of the Young part.
    pub fn column_sizes(&self) -> Vec<usize> {
        let width = self.rows[0];
        (1..=width)
            .map(|j| self.rows.iter().filter(|&&r| r >= j).count())
            .collect()
    }

    /// All diagrams of the given degree, Young rows in decreasing
    /// lexicographic order.
    pub fn all_of_degree(degree: usize) -> Vec<NovikovDiagram> {
        if degree == 0 {
            return Vec::new();
        }
        if degree == 1 {
            return vec![NovikovDiagram { rows: vec![0] }];
        }
        let mut out = Vec::new();
        let mut cur = Vec::new();
        partitions(degree - 1, degree - 1, &mut cur, &mut out);
        out.into_iter()
            .map(|rows| NovikovDiagram { rows })
            .collect()
    }
}

fn partitions(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if rest == 0 {
        out.push(cur.clone());
        return;
    }
    for part in (1..=max.min(rest)).rev() {
        cur.push(part);
        partitions(rest - part, part, cur, out);
        cur.pop();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FillingRule {
    F1,
    F2,
}

impl FillingRule {
    pub fn name(self) -> &'static str {
        match self {
            FillingRule::F1 => "F1",
            FillingRule::F2 => "F2",
        }
    }
}

/// First violated filling rule, with the two offending boxes as 1-based
/// `(row, column)` positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: FillingRule,
    pub positions: Vec<(usize, usize)>,
}

impl From<Violation> for Error {
    fn from(v: Violation) -> Error {
        Error::FillingRule {
            rule: v.rule.name(),
            positions: v.positions,
        }
    }
}

/// A filled Novikov diagram. Rule (F1)/(F2) compliance is checked by
/// [`validate`], not by construction, so invalid fillings can be inspected.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NovikovTableau {
    rows: Vec<Vec<u32>>,
}

impl NovikovTableau {
    /// Builds a tableau from rows of generator indices, the first row
    /// including the nose. Checks only the shape.
    pub fn new(rows: Vec<Vec<u32>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::Shape("a tableau needs at least one box".into()));
        }
        if rows.iter().flatten().any(|&a| a == 0) {
            return Err(Error::Shape("generator indices start at 1".into()));
        }
        if rows[0].len() == 1 && rows.len() > 1 {
            return Err(Error::Shape(
                "a lone nose box cannot be followed by further rows".into(),
            ));
        }
        if rows.iter().skip(1).any(Vec::is_empty) {
            return Err(Error::Shape("rows must be nonempty".into()));
        }
        let t = NovikovTableau { rows };
        NovikovDiagram::new(t.young_rows())?;
        Ok(t)
    }

    pub fn single(label: u32) -> Result<Self> {
        Self::new(vec![vec![label]])
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    fn young_rows(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.rows.iter().map(Vec::len).collect();
        r[0] -= 1;
        r
    }

    pub fn diagram(&self) -> NovikovDiagram {
        NovikovDiagram {
            rows: self.young_rows(),
        }
    }

    pub fn degree(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Labels `a_{1,1}, ..., a_{k,1}`.
    pub fn first_column(&self) -> Vec<u32> {
        self.rows.iter().map(|r| r[0]).collect()
    }

    pub fn labels(&self) -> impl Iterator<Item = u32> + '_ {
        self.rows.iter().flatten().copied()
    }

    /// Occurrence counts of `x_1, ..., x_m`, `m` the largest label.
    pub fn multidegree(&self) -> Vec<u32> {
        let n = self.labels().max().unwrap_or(0) as usize;
        let mut md = vec![0; n];
        for a in self.labels() {
            md[a as usize - 1] += 1;
        }
        md
    }

    pub fn has_repeated_labels(&self) -> bool {
        self.multidegree().iter().any(|&d| d > 1)
    }

    /// The associated word `W_k(W_{k-1}(... (W_2 W_1) ...))`.
    pub fn word(&self) -> Result<BracketedWord> {
        if let Some(v) = validate(self) {
            return Err(v.into());
        }
        Ok(self.word_unchecked())
    }

    pub(crate) fn word_unchecked(&self) -> BracketedWord {
        let row_word = |row: &[u32]| {
            row[1..]
                .iter()
                .fold(BracketedWord::Leaf(row[0]), |acc, &a| {
                    BracketedWord::product(acc, BracketedWord::Leaf(a))
                })
        };
        self.rows[1..]
            .iter()
            .fold(row_word(&self.rows[0]), |acc, row| {
                BracketedWord::product(row_word(row), acc)
            })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&TableauJson::from(self)).expect("tableau serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: TableauJson = serde_json::from_str(text)
            .map_err(|e| Error::Malformed(format!("tableau JSON: {e}")))?;
        j.try_into()
    }
}

impl fmt::Display for NovikovTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                f.write_str(" / ")?;
            }
            let labels: Vec<String> = row.iter().map(|a| format!("x{a}")).collect();
            f.write_str(&labels.join(" "))?;
        }
        Ok(())
    }
}

/// Wire form of a tableau: `{"rows": [[2,3],[1]], "nose_included": true}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableauJson {
    pub rows: Vec<Vec<u32>>,
    #[serde(default = "nose_default")]
    pub nose_included: bool,
}

fn nose_default() -> bool {
    true
}

impl From<&NovikovTableau> for TableauJson {
    fn from(t: &NovikovTableau) -> Self {
        TableauJson {
            rows: t.rows.clone(),
            nose_included: true,
        }
    }
}

impl TryFrom<TableauJson> for NovikovTableau {
    type Error = Error;
    fn try_from(j: TableauJson) -> Result<Self> {
        if !j.nose_included {
            return Err(Error::Malformed(
                "rows must list the nose as the last entry of row 1 (nose_included: true)".into(),
            ));
        }
        NovikovTableau::new(j.rows)
    }
}

/// Checks (F1) and (F2); returns the first violation, or `None` for a valid
/// tableau.
pub fn validate(t: &NovikovTableau) -> Option<Violation> {
    let young = t.young_rows();
    for i in 0..t.rows.len().saturating_sub(1) {
        if young[i] == young[i + 1] && t.rows[i][0] < t.rows[i + 1][0] {
            return Some(Violation {
                rule: FillingRule::F1,
                positions: vec![(i + 1, 1), (i + 2, 1)],
            });
        }
    }
    let mut prev: Option<(u32, (usize, usize))> = None;
    for (i, row) in t.rows.iter().enumerate().rev() {
        for (j, &a) in row.iter().enumerate().skip(1) {
            let pos = (i + 1, j + 1);
            if let Some((b, bpos)) = prev {
                if a < b {
                    return Some(Violation {
                        rule: FillingRule::F2,
                        positions: vec![bpos, pos],
                    });
                }
            }
            prev = Some((a, pos));
        }
    }
    None
}

/// Validates raw rows: shape errors are errors, rule violations are reported.
pub fn validate_rows(rows: Vec<Vec<u32>>) -> Result<Option<Violation>> {
    Ok(validate(&NovikovTableau::new(rows)?))
}

/// A fully parenthesized nonassociative word in the generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BracketedWord {
    Leaf(u32),
    Product(Box<BracketedWord>, Box<BracketedWord>),
}

impl BracketedWord {
    pub fn product(left: BracketedWord, right: BracketedWord) -> Self {
        BracketedWord::Product(Box::new(left), Box::new(right))
    }

    pub fn degree(&self) -> usize {
        match self {
            BracketedWord::Leaf(_) => 1,
            BracketedWord::Product(a, b) => a.degree() + b.degree(),
        }
    }

    pub fn max_generator(&self) -> u32 {
        match self {
            BracketedWord::Leaf(a) => *a,
            BracketedWord::Product(a, b) => a.max_generator().max(b.max_generator()),
        }
    }

    pub fn multidegree(&self) -> Vec<u32> {
        let mut md = vec![0; self.max_generator() as usize];
        self.count_into(&mut md);
        md
    }

    fn count_into(&self, md: &mut [u32]) {
        match self {
            BracketedWord::Leaf(a) => md[*a as usize - 1] += 1,
            BracketedWord::Product(a, b) => {
                a.count_into(md);
                b.count_into(md);
            }
        }
    }
}

impl fmt::Display for BracketedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BracketedWord::Leaf(a) => write!(f, "x{a}"),
            BracketedWord::Product(a, b) => write!(f, "({a}*{b})"),
        }
    }
}

/// Associated word of a valid tableau.
pub fn word(t: &NovikovTableau) -> Result<BracketedWord> {
    t.word()
}

/// All Novikov tableaux with exactly `multidegree[i]` occurrences of
/// `x_{i+1}`: diagrams in decreasing lexicographic order, fillings in
/// lexicographic order of their row-by-row labels.
pub fn enumerate(multidegree: &[u32]) -> Result<Vec<NovikovTableau>> {
    let degree: usize = multidegree.iter().map(|&d| d as usize).sum();
    if degree == 0 {
        return Err(Error::Empty(
            "multidegree must have positive total degree".into(),
        ));
    }
    if degree == 1 {
        let g = multidegree.iter().position(|&d| d == 1).unwrap() as u32 + 1;
        return Ok(vec![NovikovTableau {
            rows: vec![vec![g]],
        }]);
    }
    let mut out = Vec::new();
    for diagram in NovikovDiagram::all_of_degree(degree) {
        let mut fillings = fillings_of(&diagram, multidegree);
        fillings.sort_by(|a, b| a.labels().cmp(b.labels()));
        out.extend(fillings);
    }
    Ok(out)
}

/// The basis `T_n` of multilinear tableaux on `x_1, ..., x_n`.
pub fn multilinear_basis(n: usize) -> Result<Vec<NovikovTableau>> {
    if n < 1 {
        return Err(Error::Empty("n must be at least 1".into()));
    }
    enumerate(&vec![1; n])
}

fn fillings_of(diagram: &NovikovDiagram, multidegree: &[u32]) -> Vec<NovikovTableau> {
    let rows = diagram.rows();
    // Maximal runs of equal row length; (F1) orders first-column labels inside each run.
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    for (i, &r) in rows.iter().enumerate() {
        match blocks.last_mut() {
            Some((start, len)) if rows[*start] == r => *len += 1,
            _ => blocks.push((i, 1)),
        }
    }
    let mut out = Vec::new();
    let mut chosen: Vec<Vec<u32>> = Vec::new();
    choose_first_column(
        &blocks,
        0,
        &mut multidegree.to_vec(),
        &mut chosen,
        &mut |first, rest| {
            out.push(assemble(rows, first, rest));
        },
    );
    out
}

type Emit<'a> = dyn FnMut(&[Vec<u32>], &[u32]) + 'a;

fn choose_first_column(
    blocks: &[(usize, usize)],
    b: usize,
    remaining: &mut Vec<u32>,
    chosen: &mut Vec<Vec<u32>>,
    emit: &mut Emit<'_>,
) {
    if b == blocks.len() {
        emit(chosen, remaining);
        return;
    }
    let size = blocks[b].1;
    let mut picks = Vec::new();
    sub_multisets(remaining, 0, size, &mut Vec::new(), &mut picks);
    for pick in picks {
        for &g in &pick {
            remaining[g as usize - 1] -= 1;
        }
        let mut desc = pick.clone();
        desc.sort_unstable_by(|a, b| b.cmp(a));
        chosen.push(desc);
        choose_first_column(blocks, b + 1, remaining, chosen, emit);
        chosen.pop();
        for &g in &pick {
            remaining[g as usize - 1] += 1;
        }
    }
}

fn sub_multisets(
    counts: &[u32],
    from: usize,
    size: usize,
    cur: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if size == 0 {
        out.push(cur.clone());
        return;
    }
    for g in from..counts.len() {
        let already = cur.iter().filter(|&&a| a as usize == g + 1).count() as u32;
        if counts[g] > already {
            cur.push(g as u32 + 1);
            sub_multisets(counts, g, size - 1, cur, out);
            cur.pop();
        }
    }
}

fn assemble(young: &[usize], first: &[Vec<u32>], rest_counts: &[u32]) -> NovikovTableau {
    let first: Vec<u32> = first.iter().flatten().copied().collect();
    let mut rest = rest_counts
        .iter()
        .enumerate()
        .flat_map(|(g, &c)| std::iter::repeat_n(g as u32 + 1, c as usize));
    let mut rows: Vec<Vec<u32>> = first.iter().map(|&a| vec![a]).collect();
    // (F2) order: row k columns 2.., up to row 1 columns 2.. and the nose.
    for i in (0..young.len()).rev() {
        let extra = if i == 0 { young[0] } else { young[i] - 1 };
        for _ in 0..extra {
            rows[i].push(rest.next().expect("label count matches diagram"));
        }
    }
    NovikovTableau { rows }
}

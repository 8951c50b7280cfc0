//! The free Novikov algebra, realized on differential monomials of weight −1.
//!
//! A generator `x_i` is the monomial `x_i^(0)`; the product is
//! `u ∘ v = D(u) v` where `D` raises the derivative order of one factor
//! (Leibniz rule) and monomials multiply commutatively. Every monomial built
//! this way has `Σ (order − 1) = −1`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::{format_rational, parse_rational, Rational};
use crate::tableau::{enumerate, BracketedWord, NovikovTableau};

/// A commutative product of derivatives `x_i^(k)`, stored as sorted
/// `(generator, order)` pairs with repetition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DiffMonomial {
    factors: Vec<(u32, u32)>,
}

impl DiffMonomial {
    pub fn new(mut factors: Vec<(u32, u32)>) -> Self {
        factors.sort_unstable();
        DiffMonomial { factors }
    }

    pub fn generator(i: u32) -> Self {
        DiffMonomial {
            factors: vec![(i, 0)],
        }
    }

    pub fn factors(&self) -> &[(u32, u32)] {
        &self.factors
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    /// `Σ (order − 1)` over the factors.
    pub fn weight(&self) -> i64 {
        self.factors.iter().map(|&(_, k)| k as i64 - 1).sum()
    }

    pub fn max_generator(&self) -> u32 {
        self.factors.iter().map(|&(g, _)| g).max().unwrap_or(0)
    }

    pub fn multidegree(&self) -> Vec<u32> {
        let mut md = vec![0; self.max_generator() as usize];
        for &(g, _) in &self.factors {
            md[g as usize - 1] += 1;
        }
        md
    }

    pub fn count_of(&self, g: u32) -> usize {
        self.factors.iter().filter(|&&(h, _)| h == g).count()
    }

    fn mul(&self, other: &DiffMonomial) -> DiffMonomial {
        let mut factors = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() && j < other.factors.len() {
            if self.factors[i] <= other.factors[j] {
                factors.push(self.factors[i]);
                i += 1;
            } else {
                factors.push(other.factors[j]);
                j += 1;
            }
        }
        factors.extend_from_slice(&self.factors[i..]);
        factors.extend_from_slice(&other.factors[j..]);
        DiffMonomial { factors }
    }

    fn raise(&self, at: usize) -> DiffMonomial {
        let mut factors = self.factors.clone();
        factors[at].1 += 1;
        factors.sort_unstable();
        DiffMonomial { factors }
    }
}

impl fmt::Display for DiffMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (g, k)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if *k == 0 {
                write!(f, "x{g}")?;
            } else {
                write!(f, "x{g}^({k})")?;
            }
        }
        Ok(())
    }
}

/// An element of the free Novikov algebra.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct NovikovElement {
    terms: BTreeMap<DiffMonomial, Rational>,
}

impl NovikovElement {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The free generator `x_i`, `i ≥ 1`.
    pub fn generator(i: u32) -> Result<Self> {
        if i == 0 {
            return Err(Error::IndexOutOfRange {
                index: 0,
                max: u32::MAX,
            });
        }
        Ok(Self::from_monomial(
            DiffMonomial::generator(i),
            Rational::one(),
        ))
    }

    pub fn from_monomial(m: DiffMonomial, c: Rational) -> Self {
        let mut e = Self::zero();
        e.add_term(m, c);
        e
    }

    pub fn from_terms<I: IntoIterator<Item = (DiffMonomial, Rational)>>(iter: I) -> Self {
        let mut e = Self::zero();
        for (m, c) in iter {
            e.add_term(m, c);
        }
        e
    }

    fn add_term(&mut self, m: DiffMonomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DiffMonomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &DiffMonomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn max_generator(&self) -> u32 {
        self.terms
            .keys()
            .map(DiffMonomial::max_generator)
            .max()
            .unwrap_or(0)
    }

    pub fn involves(&self, g: u32) -> bool {
        self.terms.keys().any(|m| m.count_of(g) > 0)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, a)| (m.clone(), a * c)))
    }

    /// The derivation `D`, raising one factor's order by the Leibniz rule.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            for i in 0..m.factors.len() {
                out.add_term(m.raise(i), c.clone());
            }
        }
        out
    }

    /// `self ∘ other = D(self) · other`.
    pub fn product(&self, other: &Self) -> Self {
        let d = self.derivative();
        let mut out = Self::zero();
        for (a, ca) in &d.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.mul(b), ca * cb);
            }
        }
        out
    }

    /// `[a, b] = a ∘ b − b ∘ a`.
    pub fn commutator(&self, other: &Self) -> Self {
        &self.product(other) - &other.product(self)
    }

    /// Splits into multihomogeneous components keyed by trimmed multidegree.
    pub fn components(&self) -> BTreeMap<Vec<u32>, NovikovElement> {
        let mut out: BTreeMap<Vec<u32>, NovikovElement> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.multidegree())
                .or_default()
                .add_term(m.clone(), c.clone());
        }
        out
    }

    /// The common multidegree, if the element is multihomogeneous and nonzero.
    pub fn multidegree(&self) -> Option<Vec<u32>> {
        let mut it = self.terms.keys().map(DiffMonomial::multidegree);
        let first = it.next()?;
        it.all(|md| md == first).then_some(first)
    }

    /// Drops every monomial containing `x_g`, i.e. substitutes `x_g = 0`.
    pub fn without_generator(&self, g: u32) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(m, _)| m.count_of(g) == 0)
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    /// Part of highest degree in `x_g`.
    pub fn highest_part_in(&self, g: u32) -> Self {
        let top = self.terms.keys().map(|m| m.count_of(g)).max().unwrap_or(0);
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(m, _)| m.count_of(g) == top)
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    pub fn to_json(&self) -> ElementJson {
        ElementJson {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| TermJson {
                    monomial: m.factors.iter().map(|&(g, k)| [g, k]).collect(),
                    coefficient: format_rational(c),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &ElementJson) -> Result<Self> {
        let mut e = Self::zero();
        for t in &j.terms {
            let m = DiffMonomial::new(t.monomial.iter().map(|&[g, k]| (g, k)).collect());
            if m.factors.iter().any(|&(g, _)| g == 0) {
                return Err(Error::Malformed("generator indices start at 1".into()));
            }
            if m.weight() != -1 {
                return Err(Error::Malformed(format!(
                    "monomial {m} does not have weight -1"
                )));
            }
            e.add_term(m, parse_rational(&t.coefficient)?);
        }
        Ok(e)
    }
}

/// Wire form: monomials as `[generator, order]` pairs, coefficients as strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementJson {
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub monomial: Vec<[u32; 2]>,
    pub coefficient: String,
}

impl fmt::Display for NovikovElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if c.is_negative() {
                f.write_str(if i == 0 { "-" } else { " - " })?;
            } else if i > 0 {
                f.write_str(" + ")?;
            }
            let a = c.abs();
            if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", format_rational(&a))?;
            }
        }
        Ok(())
    }
}

impl Add for &NovikovElement {
    type Output = NovikovElement;
    fn add(self, rhs: &NovikovElement) -> NovikovElement {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &NovikovElement {
    type Output = NovikovElement;
    fn sub(self, rhs: &NovikovElement) -> NovikovElement {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &NovikovElement {
    type Output = NovikovElement;
    fn neg(self) -> NovikovElement {
        self.scale(&-Rational::one())
    }
}

/// `x_i` as an element of the free algebra on `x_1, ..., x_n`.
pub fn inject(i: u32, n: u32) -> Result<NovikovElement> {
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, max: n });
    }
    NovikovElement::generator(i)
}

pub fn product(u: &NovikovElement, v: &NovikovElement) -> NovikovElement {
    u.product(v)
}

/// Expands a bracketed word into differential monomials.
pub fn expand_word(w: &BracketedWord) -> NovikovElement {
    match w {
        BracketedWord::Leaf(a) => {
            NovikovElement::from_monomial(DiffMonomial::generator(*a), Rational::one())
        }
        BracketedWord::Product(a, b) => expand_word(a).product(&expand_word(b)),
    }
}

/// All weight −1 differential monomials of the given multidegree.
pub fn monomials_of_multidegree(multidegree: &[u32]) -> Vec<DiffMonomial> {
    let degree: u32 = multidegree.iter().sum();
    if degree == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    orders_for(multidegree, 0, degree - 1, &mut Vec::new(), &mut out);
    out.sort();
    out
}

fn orders_for(
    md: &[u32],
    g: usize,
    budget: u32,
    cur: &mut Vec<(u32, u32)>,
    out: &mut Vec<DiffMonomial>,
) {
    if g == md.len() {
        if budget == 0 {
            out.push(DiffMonomial::new(cur.clone()));
        }
        return;
    }
    // Non-increasing order sequences for the md[g] copies of x_{g+1}.
    fn seqs(count: u32, max: u32, budget: u32, acc: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if count == 0 {
            out.push(acc.clone());
            return;
        }
        for k in (0..=max.min(budget)).rev() {
            acc.push(k);
            seqs(count - 1, k, budget - k, acc, out);
            acc.pop();
        }
    }
    let mut options = Vec::new();
    seqs(md[g], budget, budget, &mut Vec::new(), &mut options);
    for seq in options {
        let used: u32 = seq.iter().sum();
        let len = cur.len();
        cur.extend(seq.iter().map(|&k| (g as u32 + 1, k)));
        orders_for(md, g + 1, budget - used, cur, out);
        cur.truncate(len);
    }
}

fn trimmed(md: &[u32]) -> &[u32] {
    let end = md.iter().rposition(|&d| d > 0).map_or(0, |i| i + 1);
    &md[..end]
}

/// The tableau basis of one multidegree together with its expansion in
/// differential monomials, for repeated coordinate solves.
#[derive(Debug, Clone)]
pub struct TableauBasis {
    multidegree: Vec<u32>,
    tableaux: Vec<NovikovTableau>,
    monomials: Vec<DiffMonomial>,
    /// Rows indexed by monomial, columns by tableau.
    matrix: Vec<Vec<Rational>>,
}

impl TableauBasis {
    pub fn new(multidegree: &[u32]) -> Result<Self> {
        let md = trimmed(multidegree).to_vec();
        let tableaux = enumerate(&md)?;
        let monomials = monomials_of_multidegree(&md);
        let index: BTreeMap<&DiffMonomial, usize> =
            monomials.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut matrix = vec![vec![Rational::zero(); tableaux.len()]; monomials.len()];
        for (j, t) in tableaux.iter().enumerate() {
            let e = expand_word(&t.word_unchecked());
            for (m, c) in e.terms() {
                let i = index[m];
                matrix[i][j] = c.clone();
            }
        }
        Ok(TableauBasis {
            multidegree: md,
            tableaux,
            monomials,
            matrix,
        })
    }

    pub fn tableaux(&self) -> &[NovikovTableau] {
        &self.tableaux
    }

    pub fn monomials(&self) -> &[DiffMonomial] {
        &self.monomials
    }

    /// Expansion matrix: rows are differential monomials, columns tableau words.
    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    pub fn is_square_invertible(&self) -> bool {
        linalg::is_invertible(&self.matrix)
    }

    /// Coordinates of a homogeneous element in the tableau basis.
    pub fn coordinates(&self, e: &NovikovElement) -> Result<Vec<Rational>> {
        let index: BTreeMap<&DiffMonomial, usize> = self
            .monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m, i))
            .collect();
        let mut rhs = vec![Rational::zero(); self.monomials.len()];
        for (m, c) in e.terms() {
            match index.get(m) {
                Some(&i) => rhs[i] = c.clone(),
                None => {
                    return Err(Error::WrongMultidegree {
                        expected: self.multidegree.clone(),
                    })
                }
            }
        }
        if e.is_zero() {
            return Ok(vec![Rational::zero(); self.tableaux.len()]);
        }
        linalg::solve_unique(&self.matrix, &rhs).map_err(|err| match err {
            Error::Inconsistent(msg) => Error::Inconsistent(format!(
                "tableau words do not span multidegree {:?}: {msg}",
                self.multidegree
            )),
            other => other,
        })
    }
}

/// Coefficients of `e` over `enumerate(multidegree)`.
pub fn to_tableau_basis(e: &NovikovElement, multidegree: &[u32]) -> Result<Vec<Rational>> {
    TableauBasis::new(multidegree)?.coordinates(e)
}

/// Full polarization of one multihomogeneous element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polarization {
    pub element: NovikovElement,
    /// Original generator ↦ the fresh generators replacing it. Generators of
    /// multiplicity one keep their index and are not listed.
    pub renaming: BTreeMap<u32, Vec<u32>>,
}

/// Multilinear elements whose simultaneous vanishing as identities is
/// equivalent to `e` vanishing. Generators of multiplicity `m ≥ 2` are
/// replaced by `m` fresh generators numbered consecutively after the largest
/// index of `e`.
pub fn multilinearize(e: &NovikovElement) -> Result<Vec<Polarization>> {
    if e.is_zero() {
        return Ok(Vec::new());
    }
    let md = e.multidegree().ok_or(Error::NotHomogeneous)?;
    let mut next = md.len() as u32 + 1;
    let mut renaming = BTreeMap::new();
    for (i, &d) in md.iter().enumerate() {
        if d >= 2 {
            renaming.insert(i as u32 + 1, (next..next + d).collect::<Vec<u32>>());
            next += d;
        }
    }
    if renaming.is_empty() {
        return Ok(vec![Polarization {
            element: e.clone(),
            renaming,
        }]);
    }
    let mut out = NovikovElement::zero();
    for (m, c) in e.terms() {
        let mut partial: Vec<Vec<(u32, u32)>> = vec![Vec::new()];
        let mut by_gen: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for &(g, k) in m.factors() {
            by_gen.entry(g).or_default().push(k);
        }
        for (g, orders) in by_gen {
            match renaming.get(&g) {
                None => {
                    for p in &mut partial {
                        p.extend(orders.iter().map(|&k| (g, k)));
                    }
                }
                Some(fresh) => {
                    let perms = permutations(fresh);
                    let mut grown = Vec::with_capacity(partial.len() * perms.len());
                    for p in &partial {
                        for perm in &perms {
                            let mut q = p.clone();
                            q.extend(perm.iter().zip(&orders).map(|(&f, &k)| (f, k)));
                            grown.push(q);
                        }
                    }
                    partial = grown;
                }
            }
        }
        for p in partial {
            out.add_term(DiffMonomial::new(p), c.clone());
        }
    }
    Ok(vec![Polarization {
        element: out,
        renaming,
    }])
}

fn permutations(items: &[u32]) -> Vec<Vec<u32>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// Parses an expression such as `(x1*x2) - 3/2 (x2*x1)`.
///
/// ```text
/// expr   := ['+'|'-'] term (('+'|'-') term)*
/// term   := [rational ['*']] factor
/// factor := 'x'digits | '(' expr '*' expr ')' | '(' expr ')'
/// ```
pub fn parse(text: &str) -> Result<NovikovElement> {
    let mut p = ExprParser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

impl std::str::FromStr for NovikovElement {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl ExprParser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn digits(&mut self) -> Result<&str> {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected digits"));
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits"))
    }

    fn expr(&mut self) -> Result<NovikovElement> {
        let mut sign = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -1
            }
            Some(b'+') => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        let mut acc = NovikovElement::zero();
        loop {
            let t = self.term()?;
            acc = if sign < 0 { &acc - &t } else { &acc + &t };
            match self.peek() {
                Some(b'+') => sign = 1,
                Some(b'-') => sign = -1,
                _ => return Ok(acc),
            }
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<NovikovElement> {
        let coeff = if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            let n = self
                .digits()?
                .parse::<BigInt>()
                .map_err(|_| self.error("bad integer"))?;
            let mut c = Rational::from_integer(n);
            if self.peek() == Some(b'/') {
                self.pos += 1;
                self.skip_ws();
                let d = self
                    .digits()?
                    .parse::<BigInt>()
                    .map_err(|_| self.error("bad integer"))?;
                if d.is_zero() {
                    return Err(self.error("zero denominator"));
                }
                c /= Rational::from_integer(d);
            }
            if self.peek() == Some(b'*') {
                self.pos += 1;
            }
            Some(c)
        } else {
            None
        };
        let f = self.factor()?;
        Ok(match coeff {
            Some(c) => f.scale(&c),
            None => f,
        })
    }

    fn factor(&mut self) -> Result<NovikovElement> {
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                let at = self.pos;
                let i: u32 = self.digits()?.parse().map_err(|_| Error::Parse {
                    pos: at,
                    message: "generator index too large".into(),
                })?;
                if i == 0 {
                    return Err(Error::Parse {
                        pos: at,
                        message: "generator indices start at 1".into(),
                    });
                }
                NovikovElement::generator(i)
            }
            Some(b'(') => {
                self.pos += 1;
                let left = self.expr()?;
                match self.peek() {
                    Some(b'*') => {
                        self.pos += 1;
                        let right = self.expr()?;
                        self.expect(b')')?;
                        Ok(left.product(&right))
                    }
                    Some(b')') => {
                        self.pos += 1;
                        Ok(left)
                    }
                    _ => Err(self.error("expected '*' or ')'")),
                }
            }
            Some(_) => Err(self.error("expected 'x<index>' or '('")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

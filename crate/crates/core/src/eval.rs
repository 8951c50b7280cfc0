//! Images of the free Novikov algebra in `A = (k[x], f∘g = f'g)`.
//!
//! `s̄` sends `x_i` to `x^{s_i}`; `λ̄` sends `x_i` to `x^{λ_i}` with symbolic
//! exponents and lands in `A(λ)`, whose elements are sums of
//! `f(λ) x^{g(λ)}` with `g` affine. Tableau words have single-term images
//! `f_T(λ) x^{g_T(λ)}` with closed forms, from which the tableau can be
//! recovered.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::novikov::NovikovElement;
use crate::poly::{divides_exact, rat, Monomial, Polynomial, PrefixForm, Rational, Var};
use crate::tableau::{multilinear_basis, validate, BracketedWord, NovikovTableau};

/// Largest `n` accepted by enumeration-heavy checks unless overridden.
pub const DEFAULT_MAX_DEGREE: usize = 8;

/// `s (s-1) ... (s-k+1)`.
fn falling(s: u64, k: u32) -> Rational {
    (0..k as u64).fold(Rational::one(), |acc, j| {
        if j > s {
            Rational::zero()
        } else {
            acc * Rational::from_integer(BigInt::from(s - j))
        }
    })
}

/// A polynomial in `x`, sparse by exponent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct AElement {
    terms: BTreeMap<u64, Rational>,
}

impl AElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, Rational::one())
    }

    /// `c x^k`.
    pub fn monomial(k: u64, c: Rational) -> Self {
        let mut a = Self::zero();
        a.add_term(k, c);
        a
    }

    pub fn from_terms<I: IntoIterator<Item = (u64, Rational)>>(iter: I) -> Self {
        let mut a = Self::zero();
        for (k, c) in iter {
            a.add_term(k, c);
        }
        a
    }

    fn add_term(&mut self, k: u64, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(k) {
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

    /// `(exponent, coefficient)` pairs in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (u64, &Rational)> {
        self.terms.iter().map(|(&k, c)| (k, c))
    }

    pub fn coefficient(&self, k: u64) -> Rational {
        self.terms.get(&k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> Option<u64> {
        self.terms.keys().next_back().copied()
    }

    /// Smallest exponent present; `None` for zero.
    pub fn order(&self) -> Option<u64> {
        self.terms.keys().next().copied()
    }

    /// True when `x^k` divides the element.
    pub fn divisible_by_x_power(&self, k: u64) -> bool {
        self.order().is_none_or(|o| o >= k)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_terms(self.terms.iter().map(|(&k, a)| (k, a * c)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, c) in &other.terms {
            out.add_term(k, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, c) in &other.terms {
            out.add_term(k, -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&a, ca) in &self.terms {
            for (&b, cb) in &other.terms {
                out.add_term(a + b, ca * cb);
            }
        }
        out
    }

    /// `k`-th derivative.
    pub fn derivative_n(&self, k: u32) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(&e, _)| e >= k as u64)
                .map(|(&e, c)| (e - k as u64, c * falling(e, k))),
        )
    }

    pub fn derivative(&self) -> Self {
        self.derivative_n(1)
    }

    pub fn eval(&self, at: &Rational) -> Rational {
        self.terms
            .iter()
            .map(|(&k, c)| c * num_traits::pow(at.clone(), k as usize))
            .sum()
    }

    pub fn to_polynomial(&self) -> Polynomial {
        Polynomial::from_terms(
            self.terms
                .iter()
                .map(|(&k, c)| (Monomial::power(Var::X, k as u32), c.clone())),
        )
    }

    /// Reads a polynomial in `x` alone.
    pub fn from_polynomial(p: &Polynomial) -> Result<Self> {
        if p.variables().iter().any(|&v| v != Var::X) {
            return Err(Error::Malformed(format!("{p} is not a polynomial in x")));
        }
        Ok(Self::from_terms(
            p.terms()
                .map(|(m, c)| (m.exponent(Var::X) as u64, c.clone())),
        ))
    }
}

impl fmt::Display for AElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_polynomial())
    }
}

impl std::str::FromStr for AElement {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::from_polynomial(&s.parse()?)
    }
}

/// `a ∘ b = a' b` in `A`.
pub fn circ(a: &AElement, b: &AElement) -> AElement {
    a.derivative().mul(b)
}

/// Image of `e` under the homomorphism sending `x_i` to `images[i-1]`.
pub fn eval_with(e: &NovikovElement, images: &[AElement]) -> Result<AElement> {
    let n = e.max_generator() as usize;
    if images.len() < n {
        return Err(Error::Shape(format!(
            "need an image for each of x1..x{n}, got {}",
            images.len()
        )));
    }
    let mut jets: BTreeMap<(u32, u32), AElement> = BTreeMap::new();
    let mut out = AElement::zero();
    for (m, c) in e.terms() {
        let mut acc = AElement::monomial(0, c.clone());
        for &(g, k) in m.factors() {
            let d = jets
                .entry((g, k))
                .or_insert_with(|| images[g as usize - 1].derivative_n(k));
            acc = acc.mul(d);
            if acc.is_zero() {
                break;
            }
        }
        out = out.add(&acc);
    }
    Ok(out)
}

/// Image of `e` under `s̄`.
pub fn eval_s(e: &NovikovElement, s: &[u64]) -> Result<AElement> {
    let images: Vec<AElement> = s.iter().map(|&k| AElement::monomial(k, rat(1))).collect();
    eval_with(e, &images)
}

/// Image of a word under `s̄`, computed by recursion with `circ`.
pub fn eval_s_word(w: &BracketedWord, s: &[u64]) -> Result<AElement> {
    match w {
        BracketedWord::Leaf(a) => {
            let k = s
                .get(*a as usize - 1)
                .ok_or(Error::Shape(format!("no exponent given for x{a}")))?;
            Ok(AElement::monomial(*k, rat(1)))
        }
        BracketedWord::Product(a, b) => Ok(circ(&eval_s_word(a, s)?, &eval_s_word(b, s)?)),
    }
}

/// `c_0 + c_1 λ_1 + ... + c_n λ_n` with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AffineForm {
    pub constant: i64,
    coeffs: Vec<i64>,
}

impl AffineForm {
    pub fn new(constant: i64, mut coeffs: Vec<i64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        AffineForm { constant, coeffs }
    }

    pub fn constant(c: i64) -> Self {
        Self::new(c, Vec::new())
    }

    /// `λ_i`.
    pub fn lambda(i: u32) -> Self {
        let mut coeffs = vec![0; i as usize];
        coeffs[i as usize - 1] = 1;
        Self::new(0, coeffs)
    }

    /// Coefficients of `λ_1, λ_2, ...` without trailing zeros.
    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: u32) -> i64 {
        self.coeffs.get(i as usize - 1).copied().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&0) + other.coeffs.get(i).unwrap_or(&0))
            .collect();
        Self::new(self.constant + other.constant, coeffs)
    }

    pub fn shift(&self, by: i64) -> Self {
        Self::new(self.constant + by, self.coeffs.clone())
    }

    /// Value at `λ = s`; missing entries of `s` count as 0.
    pub fn evaluate(&self, s: &[u64]) -> i64 {
        self.constant
            + self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| c * s.get(i).copied().unwrap_or(0) as i64)
                .sum::<i64>()
    }

    pub fn to_polynomial(&self) -> Polynomial {
        let mut p = Polynomial::constant(rat(self.constant));
        for (i, &c) in self.coeffs.iter().enumerate() {
            p.add_term(Monomial::var(Var::Lambda(i as u32 + 1)), rat(c));
        }
        p
    }

    /// Reads an affine polynomial in `λ` with integer coefficients.
    pub fn from_polynomial(p: &Polynomial) -> Result<Self> {
        let mut constant = 0i64;
        let mut coeffs: Vec<i64> = Vec::new();
        for (m, c) in p.terms() {
            if !c.is_integer() {
                return Err(Error::Malformed(format!(
                    "{p} has a non-integer coefficient"
                )));
            }
            let c = c
                .to_integer()
                .to_i64()
                .ok_or_else(|| Error::TooLarge(c.to_string()))?;
            match m.exponents() {
                [] => constant = c,
                [(Var::Lambda(i), 1)] => {
                    let i = *i as usize;
                    if coeffs.len() < i {
                        coeffs.resize(i, 0);
                    }
                    coeffs[i - 1] = c;
                }
                _ => {
                    return Err(Error::Malformed(format!(
                        "{p} is not affine in l1, l2, ..."
                    )))
                }
            }
        }
        Ok(Self::new(constant, coeffs))
    }

    pub fn to_json(&self) -> AffineJson {
        AffineJson {
            constant: self.constant,
            lambda: self.coeffs.clone(),
        }
    }
}

impl From<AffineJson> for AffineForm {
    fn from(j: AffineJson) -> Self {
        AffineForm::new(j.constant, j.lambda)
    }
}

impl fmt::Display for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_polynomial())
    }
}

impl std::str::FromStr for AffineForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::from_polynomial(&s.parse()?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineJson {
    pub constant: i64,
    pub lambda: Vec<i64>,
}

/// An element of `A(λ)`: a sum of `f(λ) x^{g(λ)}` with distinct exponents.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ALambdaElement {
    terms: BTreeMap<AffineForm, Polynomial>,
}

impl ALambdaElement {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `x^{λ_i}`.
    pub fn generator(i: u32) -> Self {
        Self::term(Polynomial::one(), AffineForm::lambda(i))
    }

    pub fn term(f: Polynomial, g: AffineForm) -> Self {
        let mut a = Self::zero();
        a.add_term(f, g);
        a
    }

    fn add_term(&mut self, f: Polynomial, g: AffineForm) {
        if f.is_zero() {
            return;
        }
        match self.terms.entry(g) {
            Entry::Vacant(v) => {
                v.insert(f);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += &f;
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

    /// `(coefficient, exponent)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (&Polynomial, &AffineForm)> {
        self.terms.iter().map(|(g, f)| (f, g))
    }

    /// `D(f x^g) = f g x^{g-1}`.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zero();
        for (g, f) in &self.terms {
            out.add_term(f * &g.to_polynomial(), g.shift(-1));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ga, fa) in &self.terms {
            for (gb, fb) in &other.terms {
                out.add_term(fa * fb, ga.add(gb));
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (g, f) in &other.terms {
            out.add_term(f.clone(), g.clone());
        }
        out
    }

    /// Substitutes `λ = s`. Terms whose exponent turns negative must have a
    /// vanishing coefficient there.
    pub fn specialize(&self, s: &[u64]) -> Result<AElement> {
        let point: BTreeMap<Var, Rational> = s
            .iter()
            .enumerate()
            .map(|(i, &v)| (Var::Lambda(i as u32 + 1), Rational::from_integer(v.into())))
            .collect();
        let mut out = AElement::zero();
        for (g, f) in &self.terms {
            let c = f.evaluate(&point)?;
            if c.is_zero() {
                continue;
            }
            let e = g.evaluate(s);
            if e < 0 {
                return Err(Error::Inconsistent(format!(
                    "nonzero coefficient on x^{e} after specializing"
                )));
            }
            out = out.add(&AElement::monomial(e as u64, c));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Vec<ALambdaTermJson> {
        self.terms
            .iter()
            .map(|(g, f)| ALambdaTermJson {
                coefficient: f.to_string(),
                exponent: g.to_json(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ALambdaTermJson {
    pub coefficient: String,
    pub exponent: AffineJson,
}

/// Image of a word under `λ̄`.
pub fn eval_lambda(w: &BracketedWord) -> ALambdaElement {
    match w {
        BracketedWord::Leaf(a) => ALambdaElement::generator(*a),
        BracketedWord::Product(a, b) => eval_lambda(a).derivative().mul(&eval_lambda(b)),
    }
}

/// `λ (λ-1) ... (λ-k+1)` in the variable `λ_g`.
fn falling_lambda(g: u32, k: u32) -> Polynomial {
    (0..k).fold(Polynomial::one(), |acc, j| {
        let mut f = Polynomial::lambda(g);
        f.add_term(Monomial::one(), rat(-(j as i64)));
        &acc * &f
    })
}

/// Image of an element under `λ̄`, read off its differential monomials.
pub fn lambda_image(e: &NovikovElement) -> ALambdaElement {
    let mut out = ALambdaElement::zero();
    for (m, c) in e.terms() {
        let mut f = Polynomial::constant(c.clone());
        let mut g = AffineForm::constant(0);
        for &(gen, k) in m.factors() {
            f = &f * &falling_lambda(gen, k);
            g = g.add(&AffineForm::lambda(gen)).shift(-(k as i64));
        }
        out.add_term(f, g);
    }
    out
}

/// Closed forms `f_T` and `g_T` with `λ̄(W_T) = f_T x^{g_T}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedForm {
    pub f: Polynomial,
    pub g: AffineForm,
}

/// The row factors `λ_{i,1} + ... + λ_{i,j} - j + 1` of a tableau, with the
/// nose excluded, as row-prefix forms over `n` variables.
fn row_factors(t: &NovikovTableau, n: usize) -> Vec<PrefixForm> {
    let mut out = Vec::new();
    for (i, row) in t.rows().iter().enumerate() {
        let r = if i == 0 { row.len() - 1 } else { row.len() };
        let mut acc = vec![0u32; n];
        for &a in &row[..r] {
            acc[a as usize - 1] += 1;
            out.push(PrefixForm::new(acc.clone()));
        }
    }
    out
}

/// `g` for a multidegree: `d_1 λ_1 + ... + d_n λ_n - d + 1`.
pub fn g_of_multidegree(md: &[u32]) -> AffineForm {
    let d: i64 = md.iter().map(|&v| v as i64).sum();
    AffineForm::new(1 - d, md.iter().map(|&v| v as i64).collect())
}

pub fn closed_form(t: &NovikovTableau) -> Result<ClosedForm> {
    if let Some(v) = validate(t) {
        return Err(v.into());
    }
    let md = t.multidegree();
    let f = row_factors(t, md.len())
        .iter()
        .fold(Polynomial::one(), |acc, l| &acc * &l.to_polynomial());
    Ok(ClosedForm {
        f,
        g: g_of_multidegree(&md),
    })
}

/// Recovers the tableau from its pair `(f_T, g_T)`.
pub fn reconstruct(f: &Polynomial, g: &AffineForm) -> Result<NovikovTableau> {
    let bad = |why: &str| Error::NotATableau(why.to_string());
    if g.coeffs().iter().any(|&c| c < 0) || g.coeffs().is_empty() {
        return Err(bad(
            "g must have nonnegative coefficients and involve some λ",
        ));
    }
    let md: Vec<u32> = g.coeffs().iter().map(|&c| c as u32).collect();
    let d: u32 = md.iter().sum();
    if g.constant != 1 - d as i64 {
        return Err(bad("constant of g does not match its multidegree"));
    }
    if !f.is_lambda_only() {
        return Err(bad("f must be a polynomial in λ"));
    }
    if d == 1 {
        if f != &Polynomial::one() {
            return Err(bad("a degree-one tableau has f = 1"));
        }
        let label = md.iter().position(|&v| v == 1).expect("d = 1") as u32 + 1;
        return NovikovTableau::single(label);
    }

    let divisors = linear_divisors(f, md.len())?;
    if divisors.len() != d as usize - 1 {
        return Err(bad(&format!(
            "f has {} linear factors, a degree-{d} tableau needs {}",
            divisors.len(),
            d - 1
        )));
    }

    // Column sizes, then Young rows as the conjugate partition.
    let width = divisors.iter().map(PrefixForm::alpha).max().unwrap_or(0) as usize;
    let cols: Vec<usize> = (1..=width)
        .map(|j| divisors.iter().filter(|l| l.alpha() as usize == j).count())
        .collect();
    if cols.contains(&0) || cols.windows(2).any(|w| w[0] < w[1]) {
        return Err(bad("divisor α-counts are not a partition"));
    }
    let young: Vec<usize> = (1..=cols[0])
        .map(|i| cols.iter().filter(|&&s| s >= i).count())
        .collect();
    let k = young.len();

    // First-column multiset from the α = 1 divisors λ_i.
    let mut first_col = vec![0u32; md.len()];
    for l in divisors.iter().filter(|l| l.alpha() == 1) {
        for (i, &ti) in l.t.iter().enumerate() {
            first_col[i] += ti;
        }
    }
    let mut leftover = Vec::new();
    for (i, (&total, &fc)) in md.iter().zip(&first_col).enumerate() {
        if fc > total {
            return Err(bad("first-column labels exceed the multidegree"));
        }
        leftover.extend(std::iter::repeat_n(i as u32 + 1, (total - fc) as usize));
    }

    // (F2) fixes the other boxes: row k columns 2.., ..., row 1 columns 2..
    // and the nose read as a non-decreasing sequence.
    let mut rows: Vec<Vec<u32>> = young
        .iter()
        .enumerate()
        .map(|(i, &r)| vec![0; if i == 0 { r + 1 } else { r }])
        .collect();
    let mut it = leftover.into_iter();
    for row in rows.iter_mut().rev() {
        for slot in row.iter_mut().skip(1) {
            *slot = it.next().ok_or_else(|| bad("too few labels"))?;
        }
    }

    // Peel row groups of equal Young length, longest first. The α = r
    // divisors come from every row of length ≥ r; subtracting the known
    // boxes leaves the group's first-column labels, ordered by (F1).
    let mut start = 0;
    while start < k {
        let r = young[start];
        let end = (start..k).find(|&i| young[i] != r).unwrap_or(k);
        let mut sum = vec![0i64; md.len()];
        for l in divisors.iter().filter(|l| l.alpha() as usize == r) {
            for (i, &ti) in l.t.iter().enumerate() {
                sum[i] += ti as i64;
            }
        }
        for (i, row) in rows.iter().enumerate().take(end) {
            let from = if i < start { 0 } else { 1 };
            for &a in &row[from..r] {
                sum[a as usize - 1] -= 1;
            }
        }
        if sum.iter().any(|&v| v < 0) || sum.iter().sum::<i64>() != (end - start) as i64 {
            return Err(bad("divisors are inconsistent with the filling rules"));
        }
        let mut labels: Vec<u32> = Vec::new();
        for (i, &c) in sum.iter().enumerate().rev() {
            labels.extend(std::iter::repeat_n(i as u32 + 1, c as usize));
        }
        for (row, a) in rows[start..end].iter_mut().zip(labels) {
            row[0] = a;
        }
        start = end;
    }

    let t = NovikovTableau::new(rows).map_err(|e| bad(&e.to_string()))?;
    if validate(&t).is_some() {
        return Err(bad("recovered filling violates (F1) or (F2)"));
    }
    let pair = closed_form(&t)?;
    if &pair.f != f || &pair.g != g {
        return Err(bad("recovered tableau does not reproduce (f, g)"));
    }
    Ok(t)
}

/// The multiset of row-prefix divisors of `f`, each `t_i ≤ deg f` and
/// `α ≤ deg f + 1`. Fails unless `f` is exactly their product.
fn linear_divisors(f: &Polynomial, n: usize) -> Result<Vec<PrefixForm>> {
    let bad = |why: &str| Error::NotATableau(why.to_string());
    if f.is_zero() {
        return Err(bad("f is zero"));
    }
    let n = n.max(
        f.variables()
            .iter()
            .filter_map(|v| match v {
                Var::Lambda(i) => Some(*i as usize),
                _ => None,
            })
            .max()
            .unwrap_or(0),
    );
    let deg = f.total_degree();
    let mut rest = f.clone();
    let mut found = Vec::new();
    let mut cands = Vec::new();
    candidates(n, deg, deg + 1, &mut vec![0; n], 0, &mut cands);
    cands.sort_by_key(|l: &PrefixForm| (l.alpha(), l.t.clone()));
    for l in cands {
        if rest.total_degree() == 0 {
            break;
        }
        let lp = l.to_polynomial();
        while let Some(q) = divides_exact(&rest, &lp)? {
            found.push(l.clone());
            rest = q;
        }
    }
    if rest != Polynomial::one() {
        return Err(bad("f is not a product of row-prefix linear forms"));
    }
    Ok(found)
}

fn candidates(
    n: usize,
    max_t: u32,
    max_alpha: u32,
    t: &mut Vec<u32>,
    i: usize,
    out: &mut Vec<PrefixForm>,
) {
    if i == n {
        if t.iter().any(|&v| v > 0) {
            out.push(PrefixForm::new(t.clone()));
        }
        return;
    }
    let used: u32 = t[..i].iter().sum();
    for v in 0..=max_t.min(max_alpha - used) {
        t[i] = v;
        candidates(n, max_t, max_alpha, t, i + 1, out);
    }
    t[i] = 0;
}

/// `λ_{i_1}^{r_1} ... λ_{i_k}^{r_k}` for a tableau with first column
/// `(i_1, ..., i_k)`.
pub fn leading_f(t: &NovikovTableau) -> Result<Monomial> {
    if t.has_repeated_labels() {
        return Err(Error::Precondition(format!("{t} repeats a label")));
    }
    Ok(Monomial::from_pairs(t.rows().iter().enumerate().map(
        |(i, row)| {
            let r = if i == 0 { row.len() - 1 } else { row.len() };
            (Var::Lambda(row[0]), r as u32)
        },
    )))
}

/// Rank of `{f_T : T ∈ T_n}` over the monomials in `λ`, and `|T_n|`.
pub fn independence_rank(n: usize) -> Result<(usize, usize)> {
    independence_rank_capped(n, DEFAULT_MAX_DEGREE)
}

pub fn independence_rank_capped(n: usize, cap: usize) -> Result<(usize, usize)> {
    if n > cap {
        return Err(Error::DegreeCap { degree: n, cap });
    }
    let basis = multilinear_basis(n)?;
    let fs: Vec<Polynomial> = basis
        .iter()
        .map(|t| closed_form(t).map(|p| p.f))
        .collect::<Result<_>>()?;
    let mut index: BTreeMap<Monomial, usize> = BTreeMap::new();
    for f in &fs {
        for (m, _) in f.terms() {
            let next = index.len();
            index.entry(m.clone()).or_insert(next);
        }
    }
    let rows: Vec<Vec<Rational>> = fs
        .iter()
        .map(|f| {
            let mut row = vec![Rational::zero(); index.len()];
            for (m, c) in f.terms() {
                row[index[m]] = c.clone();
            }
            row
        })
        .collect();
    Ok((linalg::rank(rows), basis.len()))
}

/// Bounds for the specialization search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    /// Grid boxes `[m, m+B]^n` are tried for `B = 0, 1, ...` up to at least
    /// this value.
    pub max_grid: u64,
    /// Random exponent vectors tried after the grid.
    pub random_trials: usize,
    /// Random polynomial substitutions tried last.
    pub polynomial_trials: usize,
    /// Degree span of the random polynomial images.
    pub polynomial_degree: u64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_grid: 8,
            random_trials: 256,
            polynomial_trials: 256,
            polynomial_degree: 3,
            seed: 0,
        }
    }
}

/// A homomorphism into `A` that does not kill the element searched for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Specialization {
    /// Exponents `s` when the map is a monomial specialization `s̄`.
    pub exponents: Option<Vec<u64>>,
    /// Images of `x_1, ..., x_n`.
    pub images: Vec<AElement>,
    /// Image of the element.
    pub image: AElement,
}

/// Finds a map into `A` under which `e` is nonzero, with every generator
/// sent to a polynomial of order at least `min_exponent`.
///
/// Monomial maps `s̄` are tried first on growing grids `[m, m+B]^n` (points
/// new to each box in lexicographic order), then at random exponents, then
/// random polynomial images.
pub fn find_nonvanishing_specialization(
    e: &NovikovElement,
    min_exponent: u64,
    config: &SearchConfig,
) -> Result<Specialization> {
    if e.is_zero() {
        return Err(Error::Precondition(
            "the zero element vanishes everywhere".into(),
        ));
    }
    let n = e.max_generator() as usize;
    let image_of = lambda_image(e);
    let used: Vec<bool> = (1..=n as u32).map(|g| e.involves(g)).collect();
    let free: Vec<usize> = (0..n).filter(|&i| used[i]).collect();

    // For homogeneous e the image is F(s) x^{g(s)}; F has degree < deg e, so
    // a box of that width always contains a nonvanishing point.
    let degree_bound = image_of
        .terms()
        .map(|(f, _)| f.total_degree() as u64)
        .max()
        .unwrap_or(0);
    let max_b = config.max_grid.max(degree_bound);

    let try_point = |s: &[u64]| -> Result<Option<AElement>> {
        let img = if image_of.len() == 1 {
            image_of.specialize(s)?
        } else {
            eval_s(e, s)?
        };
        debug_assert_eq!(img, eval_s(e, s)?);
        Ok((!img.is_zero()).then_some(img))
    };
    let hit = |s: Vec<u64>, image: AElement| Specialization {
        images: s.iter().map(|&k| AElement::monomial(k, rat(1))).collect(),
        exponents: Some(s),
        image,
    };

    let mut s = vec![min_exponent; n];
    for b in 0..=max_b {
        let mut offsets = vec![0u64; free.len()];
        loop {
            if offsets.contains(&b) || b == 0 {
                for (j, &i) in free.iter().enumerate() {
                    s[i] = min_exponent + offsets[j];
                }
                if let Some(img) = try_point(&s)? {
                    return Ok(hit(s, img));
                }
            }
            if !advance(&mut offsets, b) {
                break;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for trial in 0..config.random_trials {
        let span = (max_b + 1) << (1 + trial * 8 / config.random_trials.max(1));
        for &i in &free {
            s[i] = min_exponent + rng.gen_range(0..=span);
        }
        if let Some(img) = try_point(&s)? {
            return Ok(hit(s, img));
        }
    }

    for _ in 0..config.polynomial_trials {
        let images: Vec<AElement> = (0..n)
            .map(|_| {
                AElement::from_terms(
                    (0..=config.polynomial_degree)
                        .map(|k| (min_exponent + k, rat(rng.gen_range(-3i64..=3)))),
                )
            })
            .collect();
        let img = eval_with(e, &images)?;
        if !img.is_zero() {
            return Ok(Specialization {
                exponents: None,
                images,
                image: img,
            });
        }
    }

    Err(Error::SearchExhausted(format!(
        "no nonvanishing map found: grid up to width {max_b}, {} random exponent vectors, {} polynomial maps (seed {})",
        config.random_trials, config.polynomial_trials, config.seed
    )))
}

/// Next vector in `[0, b]^len` in lexicographic order, last entry fastest.
fn advance(v: &mut [u64], b: u64) -> bool {
    for i in (0..v.len()).rev() {
        if v[i] < b {
            v[i] += 1;
            for x in &mut v[i + 1..] {
                *x = 0;
            }
            return true;
        }
    }
    false
}

/// Checks whether `e` vanishes under every map found by the search, i.e.
/// whether it is an identity of `A`. Returns a counterexample otherwise.
pub fn identity_counterexample(
    e: &NovikovElement,
    min_exponent: u64,
    config: &SearchConfig,
) -> Result<Option<Specialization>> {
    if e.is_zero() {
        return Ok(None);
    }
    find_nonvanishing_specialization(e, min_exponent, config).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::novikov::{parse, TableauBasis};
    use crate::poly::ratio;
    use crate::tableau::enumerate;
    use proptest::prelude::*;

    fn a(s: &str) -> AElement {
        s.parse().unwrap()
    }

    fn p(s: &str) -> Polynomial {
        s.parse().unwrap()
    }

    fn tab(rows: &[&[u32]]) -> NovikovTableau {
        NovikovTableau::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn circ_examples() {
        assert_eq!(circ(&a("x^2"), &a("x^3")), a("2*x^4"));
        assert!(circ(&a("1"), &a("x")).is_zero());
        assert_eq!(circ(&a("x"), &a("x")), a("x"));
    }

    #[test]
    fn eval_s_examples() {
        assert_eq!(eval_s(&parse("(x1*x2)").unwrap(), &[1, 1]).unwrap(), a("x"));
        let e = parse("(x1*x2) - (x2*x1)").unwrap();
        assert_eq!(eval_s(&e, &[2, 3]).unwrap(), a("-x^4"));
        assert!(eval_s(&e, &[2, 2]).unwrap().is_zero());
        assert!(eval_s(&e, &[2]).is_err());
    }

    #[test]
    fn eval_lambda_examples() {
        let w = parse_word("(x1*x2)");
        assert_eq!(
            eval_lambda(&w),
            ALambdaElement::term(p("l1"), "l1+l2-1".parse().unwrap())
        );
        let w = parse_word("((x1*x2)*x3)");
        assert_eq!(
            eval_lambda(&w),
            ALambdaElement::term(p("l1*(l1+l2-1)"), "l1+l2+l3-2".parse().unwrap())
        );
        assert_eq!(
            eval_lambda(&BracketedWord::Leaf(1)),
            ALambdaElement::term(p("1"), AffineForm::lambda(1))
        );
    }

    fn parse_word(s: &str) -> BracketedWord {
        fn go(b: &[u8], i: &mut usize) -> BracketedWord {
            if b[*i] == b'(' {
                *i += 1;
                let l = go(b, i);
                *i += 1;
                let r = go(b, i);
                *i += 1;
                BracketedWord::product(l, r)
            } else {
                *i += 1;
                let start = *i;
                while *i < b.len() && b[*i].is_ascii_digit() {
                    *i += 1;
                }
                BracketedWord::Leaf(std::str::from_utf8(&b[start..*i]).unwrap().parse().unwrap())
            }
        }
        go(s.as_bytes(), &mut 0)
    }

    #[test]
    fn closed_form_examples() {
        let pair = closed_form(&tab(&[&[1, 2, 3]])).unwrap();
        assert_eq!(pair.f, p("l1*(l1+l2-1)"));
        assert_eq!(pair.g.to_string(), "l1+l2+l3-2");
        assert_eq!(pair.f.to_string(), "l1^2+l1*l2-l1");

        let pair = closed_form(&tab(&[&[1]])).unwrap();
        assert_eq!(pair.f, p("1"));
        assert_eq!(pair.g, AffineForm::lambda(1));

        let t = tab(&[&[2, 3], &[1]]);
        let pair = closed_form(&t).unwrap();
        assert_eq!(pair.f, p("l2*l1"));
        assert_eq!(pair.g, "l1+l2+l3-2".parse().unwrap());
        assert_eq!(
            eval_lambda(&t.word().unwrap()),
            ALambdaElement::term(pair.f, pair.g)
        );

        assert!(closed_form(&tab(&[&[3, 2, 1]])).is_err());
    }

    #[test]
    fn reconstruct_examples() {
        let t = reconstruct(&p("l1*(l1+l2-1)"), &"l1+l2+l3-2".parse().unwrap()).unwrap();
        assert_eq!(t, tab(&[&[1, 2, 3]]));
        let t = reconstruct(&p("1"), &AffineForm::lambda(2)).unwrap();
        assert_eq!(t, tab(&[&[2]]));
        assert!(matches!(
            reconstruct(&p("l1+l2"), &"l1+l2-1".parse().unwrap()),
            Err(Error::NotATableau(_))
        ));
    }

    #[test]
    fn reconstruct_round_trip_small() {
        for md in [
            vec![2, 1],
            vec![1, 1, 1, 1],
            vec![3, 1],
            vec![2, 2],
            vec![1, 2, 1],
        ] {
            for t in enumerate(&md).unwrap() {
                let pair = closed_form(&t).unwrap();
                assert_eq!(reconstruct(&pair.f, &pair.g).unwrap(), t, "{t}");
            }
        }
    }

    #[test]
    fn leading_f_examples() {
        assert_eq!(
            leading_f(&tab(&[&[1, 2, 3]])).unwrap(),
            Monomial::lambda(&[2])
        );
        let t = tab(&[&[2, 3], &[1]]);
        assert_eq!(leading_f(&t).unwrap(), Monomial::lambda(&[1, 1]));
        let (m, c) = crate::poly::leading_term(&closed_form(&t).unwrap().f).unwrap();
        assert_eq!((m, c), (Monomial::lambda(&[1, 1]), rat(1)));
        assert!(leading_f(&tab(&[&[1]])).unwrap().is_one());
        assert!(leading_f(&tab(&[&[1, 1]])).is_err());
    }

    #[test]
    fn independence_examples() {
        assert_eq!(independence_rank(1).unwrap(), (1, 1));
        assert_eq!(independence_rank(2).unwrap(), (2, 2));
        assert_eq!(independence_rank(3).unwrap(), (6, 6));
        assert!(independence_rank(9).is_err());
    }

    #[test]
    fn specialization_examples() {
        let e = parse("(x1*x2) - (x2*x1)").unwrap();
        let s = find_nonvanishing_specialization(&e, 2, &SearchConfig::default()).unwrap();
        assert_eq!(s.exponents, Some(vec![2, 3]));
        assert_eq!(s.image, a("-x^4"));

        let t = tab(&[&[2, 3], &[1]]);
        let w = crate::novikov::expand_word(&t.word().unwrap());
        let s = find_nonvanishing_specialization(&w, 2, &SearchConfig::default()).unwrap();
        assert_eq!(s.exponents, Some(vec![2, 2, 2]));
        assert!(s.image.divisible_by_x_power(2));

        assert!(matches!(
            find_nonvanishing_specialization(&NovikovElement::zero(), 0, &SearchConfig::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn identity_is_never_detected() {
        let e = &parse("(x1*(x2*x3))").unwrap() - &parse("(x2*(x1*x3))").unwrap();
        assert!(identity_counterexample(&e, 0, &SearchConfig::default())
            .unwrap()
            .is_none());
    }

    #[test]
    fn lambda_image_matches_tableau_combination() {
        // λ̄(e) computed from monomials equals Σ α_T f_T x^{g}.
        let e = parse("(x3*(x1*x2)) - 2 ((x1*x2)*x3) + 1/3 (x2*(x3*x1))").unwrap();
        let basis = TableauBasis::new(&[1, 1, 1]).unwrap();
        let coords = basis.coordinates(&e).unwrap();
        let mut f = Polynomial::zero();
        for (t, c) in basis.tableaux().iter().zip(&coords) {
            f += &closed_form(t).unwrap().f.scale(c);
        }
        assert_eq!(
            lambda_image(&e),
            ALambdaElement::term(f, g_of_multidegree(&[1, 1, 1]))
        );
    }

    #[test]
    fn affine_parsing() {
        let g: AffineForm = "l1+2*l3-4".parse().unwrap();
        assert_eq!(g.coeffs(), &[1, 0, 2]);
        assert_eq!(g.constant, -4);
        assert!("l1*l2".parse::<AffineForm>().is_err());
        assert!("l1/2".parse::<AffineForm>().is_err());
        assert_eq!(g.evaluate(&[1, 5, 2]), 1);
        assert_eq!(falling(3, 4), rat(0));
        assert_eq!(falling(5, 2), rat(20));
        assert_eq!(a("x^3").derivative_n(2), a("6*x"));
        assert_eq!(a("1/2*x^2").eval(&ratio(2, 1)), rat(2));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn eval_s_is_a_homomorphism(
            u in crate::novikov::tests::element_strategy(),
            v in crate::novikov::tests::element_strategy(),
            s in prop::collection::vec(0u64..5, 3),
        ) {
            let lhs = eval_s(&u.product(&v), &s).unwrap();
            let rhs = circ(&eval_s(&u, &s).unwrap(), &eval_s(&v, &s).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn lambda_image_specializes_to_eval_s(
            u in crate::novikov::tests::element_strategy(),
            s in prop::collection::vec(0u64..5, 3),
        ) {
            prop_assert_eq!(lambda_image(&u).specialize(&s).unwrap(), eval_s(&u, &s).unwrap());
        }
    }
}

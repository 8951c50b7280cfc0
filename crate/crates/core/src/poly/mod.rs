//! Exact rational arithmetic and sparse multivariate polynomials.
//!
//! Polynomials live over three families of variables: the exponent
//! parameters `l1..ln`, the single variable `x` of the polynomial algebra,
//! and the jet variables `t0, t1, ...` standing for derivatives of an unknown
//! series. Terms are kept in a canonical map ordered by the monomial order
//! of [`order_cmp`], so iteration and printing are reproducible.

mod gcd;
mod roots;
mod text;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub use gcd::{gcd, squarefree_part};
pub use roots::{rational_roots, Univariate};
pub use text::{format_rational, parse_rational};

/// Exact rational number with arbitrary-precision numerator and denominator.
pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// A polynomial variable.
///
/// The derived order (all `l_i` by index, then `x`, then `t_k` by order) is
/// the significance order used by the lexicographic tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Lambda(u32),
    X,
    Jet(u32),
}

impl Var {
    pub fn is_lambda(self) -> bool {
        matches!(self, Var::Lambda(_))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Lambda(i) => write!(f, "l{i}"),
            Var::X => f.write_str("x"),
            Var::Jet(k) => write!(f, "t{k}"),
        }
    }
}

/// A power product of variables. Zero exponents are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    exps: Vec<(Var, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { exps: Vec::new() }
    }

    pub fn var(v: Var) -> Self {
        Self::power(v, 1)
    }

    pub fn power(v: Var, e: u32) -> Self {
        if e == 0 {
            Self::one()
        } else {
            Monomial { exps: vec![(v, e)] }
        }
    }

    /// Builds a monomial from arbitrary `(variable, exponent)` pairs,
    /// merging repeated variables and dropping zero exponents.
    pub fn from_pairs<I: IntoIterator<Item = (Var, u32)>>(pairs: I) -> Self {
        let mut map: BTreeMap<Var, u32> = BTreeMap::new();
        for (v, e) in pairs {
            *map.entry(v).or_insert(0) += e;
        }
        Monomial {
            exps: map.into_iter().filter(|&(_, e)| e > 0).collect(),
        }
    }

    /// `λ_1^{e_1} ... λ_n^{e_n}` from a dense exponent vector.
    pub fn lambda(exponents: &[u32]) -> Self {
        Self::from_pairs(
            exponents
                .iter()
                .enumerate()
                .map(|(i, &e)| (Var::Lambda(i as u32 + 1), e)),
        )
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self) -> &[(Var, u32)] {
        &self.exps
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.exps
            .binary_search_by(|(w, _)| w.cmp(&v))
            .map(|i| self.exps[i].1)
            .unwrap_or(0)
    }

    /// `|u|`, the total degree.
    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|&(_, e)| e).sum()
    }

    pub fn variables(&self) -> impl Iterator<Item = Var> + '_ {
        self.exps.iter().map(|&(v, _)| v)
    }

    pub fn is_lambda_only(&self) -> bool {
        self.exps.iter().all(|(v, _)| v.is_lambda())
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.exps.len() + other.exps.len());
        let (mut i, mut j) = (0, 0);
        while i < self.exps.len() && j < other.exps.len() {
            let (a, b) = (self.exps[i], other.exps[j]);
            match a.0.cmp(&b.0) {
                Ordering::Less => {
                    out.push(a);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.exps[i..]);
        out.extend_from_slice(&other.exps[j..]);
        Monomial { exps: out }
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.exps.len());
        let mut j = 0;
        for &(v, e) in &self.exps {
            let mut d = 0;
            if j < other.exps.len() && other.exps[j].0 == v {
                d = other.exps[j].1;
                j += 1;
            } else if j < other.exps.len() && other.exps[j].0 < v {
                return None;
            }
            match e.cmp(&d) {
                Ordering::Less => return None,
                Ordering::Equal => {}
                Ordering::Greater => out.push((v, e - d)),
            }
        }
        if j < other.exps.len() {
            return None;
        }
        Some(Monomial { exps: out })
    }

    /// Removes one factor of `v` and returns the old exponent, for differentiation.
    fn lower(&self, v: Var) -> Option<(u32, Monomial)> {
        let e = self.exponent(v);
        if e == 0 {
            return None;
        }
        let exps = self
            .exps
            .iter()
            .filter_map(|&(w, f)| {
                if w != v {
                    Some((w, f))
                } else if f > 1 {
                    Some((w, f - 1))
                } else {
                    None
                }
            })
            .collect();
        Some((e, Monomial { exps }))
    }

    fn sorted_exponents(&self) -> Vec<u32> {
        let mut s: Vec<u32> = self.exps.iter().map(|&(_, e)| e).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }

    fn lex_cmp(&self, other: &Monomial) -> Ordering {
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.exps.get(i), other.exps.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&(a, ea)), Some(&(b, eb))) => match a.cmp(&b) {
                    // `self` has a more significant variable that `other` lacks.
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        if ea != eb {
                            return ea.cmp(&eb);
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }

    /// Graded lexicographic comparison, a multiplicative monomial order used
    /// internally for division.
    fn grlex_cmp(&self, other: &Monomial) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.lex_cmp(other))
    }
}

impl Ord for Monomial {
    /// Degree first, then the sorted exponent profile `γ`, then plain
    /// lexicographic order with `l1` most significant.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| {
                let (a, b) = (self.sorted_exponents(), other.sorted_exponents());
                let len = a.len().max(b.len());
                (0..len)
                    .map(|i| {
                        a.get(i)
                            .copied()
                            .unwrap_or(0)
                            .cmp(&b.get(i).copied().unwrap_or(0))
                    })
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
            })
            .then_with(|| self.lex_cmp(other))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return f.write_str("1");
        }
        for (i, (v, e)) in self.exps.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Compares two monomials over the `λ` variables under the order `⪯`.
pub fn order_cmp(u: &Monomial, v: &Monomial) -> Result<Ordering> {
    for m in [u, v] {
        if !m.is_lambda_only() {
            return Err(Error::Malformed(format!(
                "monomial {m} has variables outside the lambda block"
            )));
        }
    }
    Ok(u.cmp(v))
}

/// Exponents of `u` sorted non-increasingly and padded with zeros to length `n`.
pub fn gamma(u: &Monomial, n: usize) -> Vec<u32> {
    let mut s = u.sorted_exponents();
    if s.len() < n {
        s.resize(n, 0);
    }
    s
}

/// Sparse polynomial with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(Monomial::one(), c)
    }

    pub fn var(v: Var) -> Self {
        Self::term(Monomial::var(v), Rational::one())
    }

    pub fn lambda(i: u32) -> Self {
        Self::var(Var::Lambda(i))
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(iter: I) -> Self {
        let mut p = Polynomial::zero();
        for (m, c) in iter {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
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

    /// Terms in increasing `⪯` order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn constant_value(&self) -> Option<Rational> {
        if self.is_constant() {
            Some(self.coefficient(&Monomial::one()))
        } else {
            None
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.variables()).collect()
    }

    pub fn is_lambda_only(&self) -> bool {
        self.terms.keys().all(Monomial::is_lambda_only)
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Polynomial {
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(u, a)| (u.mul(m), a.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut out = Polynomial::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    pub fn derivative(&self, v: Var) -> Polynomial {
        Polynomial::from_terms(self.terms.iter().filter_map(|(m, c)| {
            m.lower(v)
                .map(|(e, rest)| (rest, c * Rational::from_integer(BigInt::from(e))))
        }))
    }

    /// Exact value at a point; every variable of `self` must be bound.
    pub fn evaluate(&self, point: &BTreeMap<Var, Rational>) -> Result<Rational> {
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in m.exponents() {
                let val = point
                    .get(&v)
                    .ok_or_else(|| Error::MissingBinding(v.to_string()))?;
                t *= num_traits::pow(val.clone(), e as usize);
            }
            total += t;
        }
        Ok(total)
    }

    /// Substitutes values for the bound variables and keeps the rest symbolic.
    pub fn substitute(&self, point: &BTreeMap<Var, Rational>) -> Polynomial {
        Polynomial::from_terms(self.terms.iter().map(|(m, c)| {
            let mut coeff = c.clone();
            let mut rest = Vec::new();
            for &(v, e) in m.exponents() {
                match point.get(&v) {
                    Some(val) => coeff *= num_traits::pow(val.clone(), e as usize),
                    None => rest.push((v, e)),
                }
            }
            (Monomial { exps: rest }, coeff)
        }))
    }

    /// Replaces each variable by a polynomial; unmapped variables stay as they are.
    pub fn compose(&self, images: &BTreeMap<Var, Polynomial>) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(c.clone());
            for &(v, e) in m.exponents() {
                match images.get(&v) {
                    Some(p) => t = &t * &p.pow(e),
                    None => t = t.mul_monomial(&Monomial::power(v, e)),
                }
            }
            out += &t;
        }
        out
    }

    /// Coefficients of `self` viewed as a univariate polynomial in `v`.
    pub fn coefficients_in(&self, v: Var) -> BTreeMap<u32, Polynomial> {
        let mut out: BTreeMap<u32, Polynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            let rest = Monomial {
                exps: m.exps.iter().copied().filter(|&(w, _)| w != v).collect(),
            };
            out.entry(e).or_default().add_term(rest, c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// The `⪯`-highest term. Also defined for non-`λ` polynomials through the
    /// same order.
    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    fn grlex_leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().max_by(|a, b| a.0.grlex_cmp(b.0))
    }

    /// Divides by the `⪯`-leading coefficient, giving a monic representative.
    pub fn monic(&self) -> Polynomial {
        match self.leading() {
            None => Polynomial::zero(),
            Some((_, c)) => {
                let inv = c.recip();
                self.scale(&inv)
            }
        }
    }

    /// True when every coefficient is an integer.
    pub fn has_integer_coefficients(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    pub fn max_abs_coefficient(&self) -> Rational {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// The `⪯`-highest term `f̃` of a nonzero polynomial over the `λ` variables.
pub fn leading_term(f: &Polynomial) -> Result<(Monomial, Rational)> {
    if !f.is_lambda_only() {
        return Err(Error::Malformed(
            "leading term requires a polynomial in the lambda variables".into(),
        ));
    }
    f.leading()
        .map(|(m, c)| (m.clone(), c.clone()))
        .ok_or_else(|| Error::Empty("zero polynomial has no leading term".into()))
}

/// Value of `f` at `point`.
pub fn evaluate(f: &Polynomial, point: &BTreeMap<Var, Rational>) -> Result<Rational> {
    f.evaluate(point)
}

/// `f / g` when `g` divides `f` exactly over the rationals.
pub fn divides_exact(f: &Polynomial, g: &Polynomial) -> Result<Option<Polynomial>> {
    let (lm, lc) = match g.grlex_leading() {
        Some((m, c)) => (m.clone(), c.clone()),
        None => return Err(Error::DivisionByZero),
    };
    let mut rem = f.clone();
    let mut quot = Polynomial::zero();
    while let Some((m, c)) = rem.grlex_leading() {
        // With a single divisor, an indivisible leading term means a nonzero remainder.
        let Some(q) = m.div(&lm) else {
            return Ok(None);
        };
        let qc = c / &lc;
        rem -= &g.mul_monomial(&q).scale(&qc);
        quot.add_term(q, qc);
    }
    Ok(Some(quot))
}

pub(crate) fn exact_div(f: &Polynomial, g: &Polynomial) -> Polynomial {
    divides_exact(f, g)
        .expect("nonzero divisor")
        .expect("exact division")
}

/// A linear form `t_1 λ_1 + ... + t_n λ_n - (t_1 + ... + t_n) + 1` with
/// nonnegative integer `t_i`, the shape of every linear factor of `f_T`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrefixForm {
    pub t: Vec<u32>,
}

impl PrefixForm {
    pub fn new(t: Vec<u32>) -> Self {
        PrefixForm { t }
    }

    /// `α(l) = t_1 + ... + t_n`.
    pub fn alpha(&self) -> u32 {
        self.t.iter().sum()
    }

    /// `l̂ = t_1 λ_1 + ... + t_n λ_n`.
    pub fn hat(&self) -> Polynomial {
        Polynomial::from_terms(self.t.iter().enumerate().map(|(i, &ti)| {
            (
                Monomial::var(Var::Lambda(i as u32 + 1)),
                Rational::from_integer(BigInt::from(ti)),
            )
        }))
    }

    pub fn to_polynomial(&self) -> Polynomial {
        let mut p = self.hat();
        p.add_term(Monomial::one(), rat(1 - self.alpha() as i64));
        p
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            if neg {
                f.write_str("-")?;
            } else if i > 0 {
                f.write_str("+")?;
            }
            let a = c.abs();
            if m.is_one() {
                f.write_str(&format_rational(&a))?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", format_rational(&a))?;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for Polynomial {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        text::parse_polynomial(s)
    }
}

impl AddAssign<&Polynomial> for Polynomial {
    fn add_assign(&mut self, rhs: &Polynomial) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&Polynomial> for Polynomial {
    fn sub_assign(&mut self, rhs: &Polynomial) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a.mul(b), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

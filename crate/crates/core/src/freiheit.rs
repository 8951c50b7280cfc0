//! One-relator witnesses: for a relator `f` involving `x_n` and a nonzero
//! `g` free of `x_n`, a homomorphism `θ` into truncated power series with
//! `θ(f) = 0` and `θ(g) ≠ 0`.
//!
//! The first `n − 1` generators go to polynomials `Z_i` found by the
//! specialization search. Substituting them into `f` leaves a differential
//! equation `h(x, Z, Z', ...) = 0` for the image of `x_n`, solved as a power
//! series about a rational regular point of `h`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{eval_with, find_nonvanishing_specialization, AElement, SearchConfig};
use crate::novikov::NovikovElement;
use crate::poly::{
    divides_exact, format_rational, rational_roots, squarefree_part, Polynomial, Rational, Var,
};

fn factorial(k: u64) -> Rational {
    Rational::from_integer((1..=k).fold(BigInt::one(), |acc, j| acc * BigInt::from(j)))
}

/// `Σ a_k (x − c)^k + O((x − c)^{N+1})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSeries {
    center: Rational,
    coeffs: Vec<Rational>,
}

impl PowerSeries {
    pub fn zero(center: Rational, order: usize) -> Self {
        PowerSeries {
            center,
            coeffs: vec![Rational::zero(); order + 1],
        }
    }

    /// Coefficients `a_0, ..., a_N`.
    pub fn new(center: Rational, coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Empty("a series needs at least a_0".into()));
        }
        Ok(PowerSeries { center, coeffs })
    }

    pub fn constant(center: Rational, c: Rational, order: usize) -> Self {
        let mut s = Self::zero(center, order);
        s.coeffs[0] = c;
        s
    }

    /// Taylor expansion of a polynomial in `x` about `center`.
    pub fn from_polynomial(a: &AElement, center: Rational, order: usize) -> Self {
        let mut s = Self::zero(center.clone(), order);
        let mut d = a.clone();
        for k in 0..=order {
            if d.is_zero() {
                break;
            }
            s.coeffs[k] = d.eval(&center) / factorial(k as u64);
            d = d.derivative();
        }
        s
    }

    pub fn center(&self) -> &Rational {
        &self.center
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &Rational {
        &self.coeffs[k]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn truncate(&self, order: usize) -> Self {
        PowerSeries {
            center: self.center.clone(),
            coeffs: self.coeffs[..=order.min(self.order())].to_vec(),
        }
    }

    fn check_center(&self, other: &Self) {
        assert_eq!(self.center, other.center, "series about different centers");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_center(other);
        let n = self.order().min(other.order());
        PowerSeries {
            center: self.center.clone(),
            coeffs: (0..=n)
                .map(|k| &self.coeffs[k] + &other.coeffs[k])
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        PowerSeries {
            center: self.center.clone(),
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_center(other);
        let n = self.order().min(other.order());
        let mut coeffs = vec![Rational::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                coeffs[i + j] += a * b;
            }
        }
        PowerSeries {
            center: self.center.clone(),
            coeffs,
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(
            Self::constant(self.center.clone(), Rational::one(), self.order()),
            |acc, _| acc.mul(self),
        )
    }

    /// Derivative; the order drops by one and an order-0 series maps to 0.
    pub fn derivative(&self) -> Self {
        let coeffs: Vec<Rational> = (1..self.coeffs.len())
            .map(|k| &self.coeffs[k] * Rational::from_integer(BigInt::from(k)))
            .collect();
        PowerSeries {
            center: self.center.clone(),
            coeffs: if coeffs.is_empty() {
                vec![Rational::zero()]
            } else {
                coeffs
            },
        }
    }

    pub fn derivative_n(&self, k: u32) -> Self {
        (0..k).fold(self.clone(), |s, _| s.derivative())
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            center: format_rational(&self.center),
            order: self.order(),
            coefficients: self.coeffs.iter().map(format_rational).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeriesJson {
    pub center: String,
    pub order: usize,
    pub coefficients: Vec<String>,
}

/// A polynomial in `x` and jet variables `t_α` standing for `∂^α Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferentialPolynomial {
    poly: Polynomial,
    jets: Vec<u32>,
}

impl DifferentialPolynomial {
    pub fn new(poly: Polynomial) -> Result<Self> {
        let mut jets = Vec::new();
        for v in poly.variables() {
            match v {
                Var::X => {}
                Var::Jet(k) => jets.push(k),
                Var::Lambda(_) => {
                    return Err(Error::Malformed(format!(
                        "{poly} mixes λ variables into a differential polynomial"
                    )))
                }
            }
        }
        jets.sort_unstable();
        Ok(DifferentialPolynomial { poly, jets })
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    /// Jet orders present, increasing.
    pub fn jets(&self) -> &[u32] {
        &self.jets
    }

    pub fn top_jet(&self) -> Option<u32> {
        self.jets.last().copied()
    }

    /// `∂h/∂t_α`.
    pub fn partial(&self, alpha: u32) -> Polynomial {
        self.poly.derivative(Var::Jet(alpha))
    }

    /// `h(x, ∂^{α_1} T, ...)` as a series, truncated at `order`.
    pub fn evaluate_series(&self, t: &PowerSeries, order: usize) -> PowerSeries {
        let center = t.center().clone();
        let mut x = PowerSeries::zero(center.clone(), order);
        x.coeffs[0] = center.clone();
        if order > 0 {
            x.coeffs[1] = Rational::one();
        }
        let jets: BTreeMap<u32, PowerSeries> = self
            .jets
            .iter()
            .map(|&a| (a, t.derivative_n(a).truncate(order)))
            .collect();
        let mut out = PowerSeries::zero(center.clone(), order);
        for (m, c) in self.poly.terms() {
            let mut acc = PowerSeries::constant(center.clone(), c.clone(), order);
            for &(v, e) in m.exponents() {
                let base = match v {
                    Var::X => &x,
                    Var::Jet(a) => &jets[&a],
                    Var::Lambda(_) => unreachable!("rejected on construction"),
                };
                acc = acc.mul(&base.pow(e));
            }
            out = out.add(&acc);
        }
        out
    }
}

impl fmt::Display for DifferentialPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.poly)
    }
}

impl std::str::FromStr for DifferentialPolynomial {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::new(s.parse()?)
    }
}

/// Substitutes `Z_i` for `x_i` (`i < n`) and a symbolic unknown with jets
/// `t_α` for `x_n`.
pub fn extract_diffpoly(
    f: &NovikovElement,
    n: u32,
    images: &[AElement],
) -> Result<DifferentialPolynomial> {
    if n == 0 || images.len() != n as usize - 1 {
        return Err(Error::Shape(format!(
            "need {} images for x1..x{}, got {}",
            n.saturating_sub(1),
            n.saturating_sub(1),
            images.len()
        )));
    }
    if f.max_generator() > n {
        return Err(Error::Precondition(format!(
            "f involves generators beyond x{n}"
        )));
    }
    if !f.involves(n) {
        return Err(Error::Hypothesis(format!("f does not involve x{n}")));
    }
    let mut h = Polynomial::zero();
    for (m, c) in f.terms() {
        let mut term = Polynomial::constant(c.clone());
        for &(g, k) in m.factors() {
            let factor = if g == n {
                Polynomial::var(Var::Jet(k))
            } else {
                images[g as usize - 1].derivative_n(k).to_polynomial()
            };
            term = &term * &factor;
        }
        h += &term;
    }
    let h = DifferentialPolynomial::new(h)?;
    if h.jets.is_empty() {
        return Err(Error::Hypothesis(
            "no jet variable survives the substitution".into(),
        ));
    }
    Ok(h)
}

/// `L = (c, c_{α_1}, ..., c_{α_r})` with `h(L) = 0` and `∂h/∂t_{α_r}(L) ≠ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularPoint {
    pub center: Rational,
    /// `α ↦ c_α` for every jet of `h`.
    pub jets: BTreeMap<u32, Rational>,
    pub jacobian: Rational,
}

impl RegularPoint {
    fn bindings(&self) -> BTreeMap<Var, Rational> {
        let mut b: BTreeMap<Var, Rational> = self
            .jets
            .iter()
            .map(|(&a, c)| (Var::Jet(a), c.clone()))
            .collect();
        b.insert(Var::X, self.center.clone());
        b
    }
}

/// A regular point together with the square-free polynomial it regularizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularPointResult {
    pub point: RegularPoint,
    /// `h` itself when it has no repeated factors, otherwise its square-free
    /// part in the top jet.
    pub reduced: DifferentialPolynomial,
}

/// `0, 1, −1, 2, −2, ...`
fn signed(i: u64) -> Rational {
    let v = i.div_ceil(2) as i64;
    Rational::from_integer(BigInt::from(if i % 2 == 1 { v } else { -v }))
}

/// `1, −1, 2, −2, ...`
fn nonzero(i: u64) -> Rational {
    signed(i + 1)
}

/// Searches for a rational regular point.
///
/// `x` and the lower jets range over `0, ±1, ±2, ...` up to `max_grid` in
/// shells of growing index, lexicographic within a shell. A first pass keeps
/// every jet value nonzero; a second pass allows zeros. At each point the
/// top jet comes from the rational roots of the square-free part of `h`.
pub fn find_regular_point(h: &DifferentialPolynomial, max_grid: u64) -> Result<RegularPointResult> {
    let top = h
        .top_jet()
        .ok_or_else(|| Error::Precondition(format!("{h} has no jet variable")))?;
    let sf = squarefree_part(&h.poly, Var::Jet(top));
    let reduced = match divides_exact(&h.poly, &sf)? {
        Some(q) if q.is_constant() => h.clone(),
        _ => DifferentialPolynomial::new(sf)?,
    };
    let dtop = reduced.partial(top);
    let lower: Vec<u32> = reduced.jets.iter().copied().filter(|&a| a != top).collect();
    let max_index = 2 * max_grid;

    for nonzero_pass in [true, false] {
        for shell in 0..=max_index {
            let dims = lower.len() + 1;
            let mut idx = vec![0u64; dims];
            loop {
                if idx.iter().copied().max().unwrap_or(0) == shell
                    && (!nonzero_pass || idx[1..].iter().all(|&i| i < max_index))
                {
                    let mut point = BTreeMap::new();
                    point.insert(Var::X, signed(idx[0]));
                    for (&a, &i) in lower.iter().zip(&idx[1..]) {
                        let v = if nonzero_pass { nonzero(i) } else { signed(i) };
                        point.insert(Var::Jet(a), v);
                    }
                    if let Some(found) = try_point(&reduced, &dtop, top, &point, nonzero_pass)? {
                        return Ok(RegularPointResult {
                            point: found,
                            reduced,
                        });
                    }
                }
                if !advance(&mut idx, shell) {
                    break;
                }
            }
        }
    }
    Err(Error::FieldObstruction(format!(
        "no rational point with h = 0 and nonzero ∂h/∂t{top} for values up to ±{max_grid}"
    )))
}

fn try_point(
    h: &DifferentialPolynomial,
    dtop: &Polynomial,
    top: u32,
    point: &BTreeMap<Var, Rational>,
    nonzero_root: bool,
) -> Result<Option<RegularPoint>> {
    let uni = h.poly.substitute(point);
    if uni.is_zero() {
        return Ok(None);
    }
    let roots = match rational_roots(&uni) {
        Ok(r) => r,
        Err(Error::TooLarge(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let mut seen: Option<Rational> = None;
    for r in roots {
        if seen.as_ref() == Some(&r) || (nonzero_root && r.is_zero()) {
            continue;
        }
        seen = Some(r.clone());
        let mut full = point.clone();
        full.insert(Var::Jet(top), r.clone());
        let jac = dtop.evaluate(&full)?;
        if !jac.is_zero() {
            let jets = full
                .iter()
                .filter_map(|(v, c)| match v {
                    Var::Jet(a) => Some((*a, c.clone())),
                    _ => None,
                })
                .collect();
            return Ok(Some(RegularPoint {
                center: full[&Var::X].clone(),
                jets,
                jacobian: jac,
            }));
        }
    }
    Ok(None)
}

/// Next index vector in `[0, b]^len`, lexicographic, last entry fastest.
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

/// Solves `h(x, ∂^{α_1} T, ..., ∂^{α_m} T) = 0` in series about `L.center`
/// to order `N`.
///
/// `α! a_α = c_α` for each jet of `h`; other coefficients below `α_m` come
/// from `low` or default to 0. Each `a_{α_m+k}` is then the unique solution
/// of the order-`k` coefficient equation.
pub fn solve_ode(
    h: &DifferentialPolynomial,
    point: &RegularPoint,
    order: usize,
    low: &BTreeMap<u32, Rational>,
) -> Result<PowerSeries> {
    let top = h
        .top_jet()
        .ok_or_else(|| Error::Precondition(format!("{h} has no jet variable")))?;
    if (order as u64) < top as u64 {
        return Err(Error::Precondition(format!(
            "order {order} is below the top jet order {top}"
        )));
    }
    for a in h.jets() {
        if !point.jets.contains_key(a) {
            return Err(Error::Precondition(format!(
                "point gives no value for t{a}"
            )));
        }
    }
    let at = point.bindings();
    if !h.poly.evaluate(&at)?.is_zero() {
        return Err(Error::Precondition("h does not vanish at the point".into()));
    }
    let jac = h.partial(top).evaluate(&at)?;
    if jac.is_zero() {
        return Err(Error::Precondition(format!(
            "∂h/∂t{top} vanishes at the point"
        )));
    }
    for &k in low.keys() {
        if k >= top || h.jets().contains(&k) {
            return Err(Error::Precondition(format!(
                "coefficient a_{k} is not a free low-order coefficient"
            )));
        }
    }

    let mut t = PowerSeries::zero(point.center.clone(), order);
    for (&k, v) in low {
        t.coeffs[k as usize] = v.clone();
    }
    for &a in h.jets() {
        t.coeffs[a as usize] = &point.jets[&a] / factorial(a as u64);
    }
    let top = top as usize;
    for k in 1..=order - top {
        let idx = top + k;
        t.coeffs[idx] = Rational::zero();
        let r = h.evaluate_series(&t, k).coeffs[k].clone();
        let slope = &jac * factorial(idx as u64) / factorial(k as u64);
        if cfg!(debug_assertions) {
            let probe = |v: i64| {
                let mut s = t.clone();
                s.coeffs[idx] = Rational::from_integer(BigInt::from(v));
                h.evaluate_series(&s, k).coeffs[k].clone()
            };
            let (r1, r2) = (probe(1), probe(2));
            debug_assert_eq!(
                &r1 - &r,
                slope,
                "step {k} is not linear with the expected slope"
            );
            debug_assert_eq!(&r2 - &r1, slope, "step {k} is not affine in the unknown");
        }
        t.coeffs[idx] = -r / slope;
    }
    Ok(t)
}

/// `h` evaluated on the jets of `t`, through order `N − α_m`.
pub fn residual(h: &DifferentialPolynomial, t: &PowerSeries) -> PowerSeries {
    let top = h.top_jet().unwrap_or(0) as usize;
    h.evaluate_series(t, t.order().saturating_sub(top))
}

/// Which case of the construction produced the witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `f(x_1, ..., x_{n−1}, 0) = 0`: `x_n ↦ 0` already kills `f`.
    Shortcut,
    /// A series solution of the extracted equation.
    Series,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessConfig {
    pub order: usize,
    pub min_exponent: u64,
    pub search: SearchConfig,
    /// Bound on `|value|` in the regular-point search.
    pub point_grid: u64,
    pub low: BTreeMap<u32, Rational>,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        WitnessConfig {
            order: 16,
            min_exponent: 2,
            search: SearchConfig::default(),
            point_grid: 8,
            low: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessReport {
    pub branch: Branch,
    pub n: u32,
    /// `θ(x_i) = Z_i` for `i < n`.
    pub images: Vec<AElement>,
    /// `θ(x_n)`.
    pub series: PowerSeries,
    pub h: Option<DifferentialPolynomial>,
    /// Polynomial actually solved, when it differs from `h`.
    pub reduced: Option<DifferentialPolynomial>,
    pub point: Option<RegularPoint>,
    /// `θ(f)` vanishes through this order.
    pub verified_order: usize,
    pub theta_f: PowerSeries,
    pub theta_g: AElement,
    pub log: Vec<String>,
}

/// Builds `θ` with `θ(f) = 0` through the truncation order and `θ(g) ≠ 0`.
/// `n` defaults to the largest generator of `f`.
pub fn freiheitssatz_witness(
    f: &NovikovElement,
    g: &NovikovElement,
    n: Option<u32>,
    config: &WitnessConfig,
) -> Result<WitnessReport> {
    let n = n.unwrap_or_else(|| f.max_generator());
    let stage = |s| move |e: Error| e.at_stage(s);
    (|| {
        if n < 2 {
            return Err(Error::Precondition("need at least two generators".into()));
        }
        if f.max_generator() > n || !f.involves(n) {
            return Err(Error::Hypothesis(format!(
                "f must involve x{n} and nothing beyond"
            )));
        }
        if g.is_zero() {
            return Err(Error::Precondition("g is zero".into()));
        }
        if g.max_generator() >= n {
            return Err(Error::Precondition(format!("g must be free of x{n}")));
        }
        Ok(())
    })()
    .map_err(stage("validate"))?;

    let mut log = vec![format!("n = {n}, order = {}", config.order)];
    let m = config.min_exponent;
    let restricted = f.without_generator(n);

    if restricted.is_zero() {
        log.push(format!("f vanishes at x{n} = 0: shortcut branch"));
        let phi =
            find_nonvanishing_specialization(g, m, &config.search).map_err(stage("phi-search"))?;
        let images = pad(&phi.images, n as usize - 1, m);
        log.push(format!("φ(g) = {}", phi.image));
        let h = extract_diffpoly(f, n, &images).ok();
        let series = PowerSeries::zero(Rational::zero(), config.order);
        let point = h.as_ref().map(|h| {
            let jets: BTreeMap<u32, Rational> =
                h.jets().iter().map(|&a| (a, Rational::zero())).collect();
            let mut p = RegularPoint {
                center: Rational::zero(),
                jets,
                jacobian: Rational::zero(),
            };
            if let Some(top) = h.top_jet() {
                p.jacobian = h
                    .partial(top)
                    .evaluate(&p.bindings())
                    .unwrap_or_else(|_| Rational::zero());
            }
            p
        });
        return finish(
            f,
            g,
            n,
            images,
            series,
            h,
            None,
            point,
            Branch::Shortcut,
            log,
        );
    }

    let fhat = f.highest_part_in(n);
    let probe = g.product(f).product(&fhat);
    log.push(format!("searching φ with φ((g∘f)∘f̂) ≠ 0, f̂ = {fhat}"));
    let phi =
        find_nonvanishing_specialization(&probe, m, &config.search).map_err(stage("phi-search"))?;
    let images = pad(
        &phi.images[..(n as usize - 1).min(phi.images.len())],
        n as usize - 1,
        m,
    );
    log.push(format!(
        "φ: {}",
        images
            .iter()
            .enumerate()
            .map(|(i, z)| format!("x{} ↦ {z}", i + 1))
            .collect::<Vec<_>>()
            .join(", ")
    ));

    let h = extract_diffpoly(f, n, &images).map_err(stage("extract"))?;
    log.push(format!("h = {h}"));
    let found = find_regular_point(&h, config.point_grid).map_err(stage("regular-point"))?;
    let reduced = (found.reduced != h).then(|| found.reduced.clone());
    if let Some(r) = &reduced {
        log.push(format!("square-free part {r}"));
    }
    log.push(format!(
        "regular point c = {}, jacobian {}",
        found.point.center, found.point.jacobian
    ));
    let series = solve_ode(&found.reduced, &found.point, config.order, &config.low)
        .map_err(stage("solve"))?;
    finish(
        f,
        g,
        n,
        images,
        series,
        Some(h),
        reduced,
        Some(found.point),
        Branch::Series,
        log,
    )
}

/// Extends exponent images to `len` entries with `x^m` for unused generators.
fn pad(images: &[AElement], len: usize, m: u64) -> Vec<AElement> {
    let mut out = images[..images.len().min(len)].to_vec();
    while out.len() < len {
        out.push(AElement::monomial(m, Rational::one()));
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn finish(
    f: &NovikovElement,
    g: &NovikovElement,
    n: u32,
    images: Vec<AElement>,
    series: PowerSeries,
    h: Option<DifferentialPolynomial>,
    reduced: Option<DifferentialPolynomial>,
    point: Option<RegularPoint>,
    branch: Branch,
    mut log: Vec<String>,
) -> Result<WitnessReport> {
    let verify = || -> Result<(PowerSeries, AElement)> {
        let theta_g = eval_with(g, &images)?;
        if theta_g.is_zero() {
            return Err(Error::Inconsistent("θ(g) vanishes".into()));
        }
        let theta_f = theta_series(f, n, &images, &series);
        if !theta_f.is_zero() {
            return Err(Error::Inconsistent(format!(
                "θ(f) has nonzero coefficients through order {}",
                theta_f.order()
            )));
        }
        Ok((theta_f, theta_g))
    };
    let (theta_f, theta_g) = verify().map_err(|e| e.at_stage("verify"))?;
    log.push(format!(
        "verified θ(f) = 0 through order {}, θ(g) = {theta_g}",
        theta_f.order()
    ));
    Ok(WitnessReport {
        branch,
        n,
        images,
        verified_order: theta_f.order(),
        series,
        h,
        reduced,
        point,
        theta_f,
        theta_g,
        log,
    })
}

/// `θ(e)` computed directly from the differential monomials of `e`.
pub fn theta_series(
    e: &NovikovElement,
    n: u32,
    images: &[AElement],
    series: &PowerSeries,
) -> PowerSeries {
    let center = series.center().clone();
    let top = e
        .terms()
        .flat_map(|(m, _)| m.factors().iter().filter(|(g, _)| *g == n).map(|&(_, k)| k))
        .max()
        .unwrap_or(0) as usize;
    let order = series.order().saturating_sub(top);
    let mut out = PowerSeries::zero(center.clone(), order);
    for (m, c) in e.terms() {
        let mut acc = PowerSeries::constant(center.clone(), c.clone(), order);
        for &(g, k) in m.factors() {
            let factor = if g == n {
                series.derivative_n(k).truncate(order)
            } else {
                PowerSeries::from_polynomial(
                    &images[g as usize - 1].derivative_n(k),
                    center.clone(),
                    order,
                )
            };
            acc = acc.mul(&factor);
        }
        out = out.add(&acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::novikov::parse;
    use crate::poly::{rat, ratio};

    fn dp(s: &str) -> DifferentialPolynomial {
        s.parse().unwrap()
    }

    fn a(s: &str) -> AElement {
        s.parse().unwrap()
    }

    fn point(c: Rational, jets: &[(u32, Rational)]) -> RegularPoint {
        RegularPoint {
            center: c,
            jets: jets.iter().cloned().collect(),
            jacobian: Rational::zero(),
        }
    }

    #[test]
    fn extract_examples() {
        let f = parse("(x2*x2) - x1").unwrap();
        assert_eq!(
            extract_diffpoly(&f, 2, &[a("x^2")]).unwrap(),
            dp("t1*t0-x^2")
        );
        let f = parse("(x2*x1)").unwrap();
        assert_eq!(extract_diffpoly(&f, 2, &[a("x")]).unwrap(), dp("t1*x"));
        let f = parse("(x1*x1)").unwrap();
        assert!(matches!(
            extract_diffpoly(&f, 2, &[a("x^2")]),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn regular_point_examples() {
        let r = find_regular_point(&dp("t1-t0"), 8).unwrap();
        assert_eq!(r.point.center, rat(0));
        assert_eq!(r.point.jets[&0], rat(1));
        assert_eq!(r.point.jets[&1], rat(1));
        assert_eq!(r.point.jacobian, rat(1));

        let r = find_regular_point(&dp("t1*t0-x^2"), 8).unwrap();
        assert_eq!(r.point.center, rat(1));
        assert_eq!(r.point.jets[&0], rat(1));
        assert_eq!(r.point.jets[&1], rat(1));
        assert_eq!(r.point.jacobian, rat(1));
        assert_eq!(r.reduced, dp("t1*t0-x^2"));

        assert!(matches!(
            find_regular_point(&dp("t1^2+1"), 4),
            Err(Error::FieldObstruction(_))
        ));
    }

    #[test]
    fn repeated_factors_are_removed() {
        let r = find_regular_point(&dp("(t1-t0)^2"), 4).unwrap();
        assert_eq!(r.reduced.poly().total_degree(), 1);
        assert!(!r.point.jacobian.is_zero());
    }

    #[test]
    fn exponential_series() {
        let h = dp("t1-t0");
        let t = solve_ode(
            &h,
            &point(rat(0), &[(0, rat(1)), (1, rat(1))]),
            16,
            &BTreeMap::new(),
        )
        .unwrap();
        for k in 0..=16u64 {
            assert_eq!(t.coeff(k as usize), &(Rational::one() / factorial(k)));
        }
        let r = residual(&h, &t);
        assert_eq!(r.order(), 15);
        assert!(r.is_zero());
    }

    #[test]
    fn square_root_series() {
        let h = dp("2*t1*t0-1");
        let t = solve_ode(
            &h,
            &point(rat(0), &[(0, rat(1)), (1, ratio(1, 2))]),
            8,
            &BTreeMap::new(),
        )
        .unwrap();
        assert_eq!(
            &t.coeffs()[..4],
            &[rat(1), ratio(1, 2), ratio(-1, 8), ratio(1, 16)]
        );
        let sq = t.mul(&t);
        assert_eq!(sq.coeff(0), &rat(1));
        assert_eq!(sq.coeff(1), &rat(1));
        assert!(sq.coeffs()[2..].iter().all(Zero::is_zero));
    }

    #[test]
    fn zero_seed_gives_zero_series() {
        let h = dp("t1-t0");
        let t = solve_ode(
            &h,
            &point(rat(0), &[(0, rat(0)), (1, rat(0))]),
            10,
            &BTreeMap::new(),
        )
        .unwrap();
        assert!(t.is_zero());
    }

    #[test]
    fn solver_rejects_bad_points() {
        let h = dp("t1-t0");
        assert!(solve_ode(
            &h,
            &point(rat(0), &[(0, rat(1)), (1, rat(2))]),
            5,
            &BTreeMap::new()
        )
        .is_err());
        let h = dp("t1^2-t0");
        assert!(solve_ode(
            &h,
            &point(rat(0), &[(0, rat(0)), (1, rat(0))]),
            5,
            &BTreeMap::new()
        )
        .is_err());
    }

    #[test]
    fn low_coefficients_can_be_set() {
        // t2 = t0 about 0 with a_1 free.
        let h = dp("t2-t0");
        let mut low = BTreeMap::new();
        low.insert(1, rat(1));
        let t = solve_ode(&h, &point(rat(0), &[(0, rat(1)), (2, rat(1))]), 8, &low).unwrap();
        // cosh + sinh = exp
        for k in 0..=8u64 {
            assert_eq!(t.coeff(k as usize), &(Rational::one() / factorial(k)));
        }
        assert!(residual(&h, &t).is_zero());
    }

    #[test]
    fn residual_of_a_wrong_series() {
        let h = dp("t1-t0");
        let t = PowerSeries::new(rat(0), vec![rat(1), rat(1), rat(0), rat(0)]).unwrap();
        let r = residual(&h, &t);
        assert_eq!(r.coeffs(), &[rat(0), rat(-1), rat(0)]);
    }

    #[test]
    fn witness_series_branch() {
        let f = parse("(x2*x2) - x1").unwrap();
        let g = parse("x1").unwrap();
        let cfg = WitnessConfig {
            order: 12,
            ..WitnessConfig::default()
        };
        let w = freiheitssatz_witness(&f, &g, None, &cfg).unwrap();
        assert_eq!(w.branch, Branch::Series);
        assert_eq!(w.images, vec![a("x^2")]);
        assert_eq!(w.h, Some(dp("t1*t0-x^2")));
        let p = w.point.as_ref().unwrap();
        assert_eq!(
            (p.center.clone(), p.jets[&0].clone(), p.jets[&1].clone()),
            (rat(1), rat(1), rat(1))
        );
        assert_eq!(w.series.coeff(0), &rat(1));
        assert_eq!(w.verified_order, 11);
        assert_eq!(w.theta_g, a("x^2"));
        // Z^2 = (2x^3 + 1)/3 about x = 1.
        let sq = w.series.mul(&w.series);
        let want = PowerSeries::from_polynomial(&a("2/3*x^3+1/3"), rat(1), 12);
        assert_eq!(sq, want);
    }

    #[test]
    fn witness_shortcut_branch() {
        let g = parse("x1").unwrap();
        for f in ["(x2*x1)", "x2"] {
            let f = parse(f).unwrap();
            let w = freiheitssatz_witness(&f, &g, None, &WitnessConfig::default()).unwrap();
            assert_eq!(w.branch, Branch::Shortcut);
            assert!(w.series.is_zero());
            assert!(w.theta_f.is_zero());
            assert!(!w.theta_g.is_zero());
        }
        let w = freiheitssatz_witness(&parse("x2").unwrap(), &g, None, &WitnessConfig::default())
            .unwrap();
        assert_eq!(w.h, Some(dp("t0")));
        assert_eq!(w.point.unwrap().jacobian, rat(1));
    }

    #[test]
    fn witness_preconditions() {
        let cfg = WitnessConfig::default();
        let f = parse("(x2*x2) - x1").unwrap();
        let err = freiheitssatz_witness(&f, &parse("x2").unwrap(), None, &cfg).unwrap_err();
        assert_eq!(err.stage(), Some("validate"));
        let err = freiheitssatz_witness(&f, &NovikovElement::zero(), None, &cfg).unwrap_err();
        assert_eq!(err.stage(), Some("validate"));
    }

    #[test]
    fn obstruction_kind() {
        let err = find_regular_point(&dp("t1^2+x^2+1"), 3).unwrap_err();
        assert_eq!(err.kind(), "field-obstruction");
    }
}

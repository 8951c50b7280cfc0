use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Monomial, Polynomial, Rational, Var};
use crate::error::{Error, Result};

/// Dense univariate polynomial, coefficient of `v^k` at index `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Univariate {
    pub coeffs: Vec<Rational>,
}

impl Univariate {
    /// Views `p` as univariate. Fails if `p` has more than one variable.
    pub fn from_polynomial(p: &Polynomial) -> Result<(Option<Var>, Univariate)> {
        let vars = p.variables();
        if vars.len() > 1 {
            return Err(Error::Malformed(format!(
                "expected a univariate polynomial, got variables {:?}",
                vars.iter().map(|v| v.to_string()).collect::<Vec<_>>()
            )));
        }
        let var = vars.into_iter().next();
        let deg = var.map_or(0, |v| p.degree_in(v)) as usize;
        let mut coeffs = vec![Rational::zero(); deg + 1];
        for (m, c) in p.terms() {
            let e = var.map_or(0, |v| m.exponent(v)) as usize;
            coeffs[e] = c.clone();
        }
        let mut u = Univariate { coeffs };
        u.trim();
        Ok((var, u))
    }

    pub fn to_polynomial(&self, v: Var) -> Polynomial {
        Polynomial::from_terms(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| (Monomial::power(v, k as u32), c.clone())),
        )
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * t + c)
    }

    /// Synthetic division by `(v - r)`, assuming `r` is a root.
    fn deflate(&self, r: &Rational) -> Univariate {
        let n = self.coeffs.len();
        let mut out = vec![Rational::zero(); n - 1];
        let mut carry = Rational::zero();
        for k in (1..n).rev() {
            carry = &carry * r + &self.coeffs[k];
            out[k - 1] = carry.clone();
        }
        Univariate { coeffs: out }
    }
}

/// All rational roots of a nonzero univariate polynomial, with multiplicity,
/// in increasing order.
pub fn rational_roots(p: &Polynomial) -> Result<Vec<Rational>> {
    if p.is_zero() {
        return Err(Error::Empty("the zero polynomial has every root".into()));
    }
    let (_, mut u) = Univariate::from_polynomial(p)?;
    let mut roots = Vec::new();
    while u.coeffs.first().is_some_and(|c| c.is_zero()) {
        u.coeffs.remove(0);
        roots.push(Rational::zero());
    }
    if u.coeffs.len() > 1 {
        // Primitive integer form: clear denominators.
        let lcm = u
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = u
            .coeffs
            .iter()
            .map(|c| (c * Rational::from_integer(lcm.clone())).to_integer())
            .collect();
        let lead = ints.last().cloned().unwrap_or_default();
        let constant = ints[0].clone();
        let ps = divisors(&constant)?;
        let qs = divisors(&lead)?;
        let mut candidates: Vec<Rational> = Vec::new();
        for p in &ps {
            for q in &qs {
                for sign in [1, -1] {
                    candidates.push(Rational::new(p * sign, q.clone()));
                }
            }
        }
        candidates.sort();
        candidates.dedup();
        for r in candidates {
            while u.coeffs.len() > 1 && u.eval(&r).is_zero() {
                u = u.deflate(&r);
                roots.push(r.clone());
            }
        }
    }
    roots.sort();
    Ok(roots)
}

const TRIAL_LIMIT: u64 = 1_000_000;

/// Positive divisors of a nonzero integer.
fn divisors(n: &BigInt) -> Result<Vec<BigInt>> {
    let mut m = n.abs();
    let mut factors: BTreeMap<BigInt, u32> = BTreeMap::new();
    let mut d = 2u64;
    while d <= TRIAL_LIMIT {
        let bd = BigInt::from(d);
        if &bd * &bd > m {
            break;
        }
        while (&m % &bd).is_zero() {
            *factors.entry(bd.clone()).or_insert(0) += 1;
            m /= &bd;
        }
        d += 1;
    }
    if m > BigInt::one() {
        // Anything left below TRIAL_LIMIT^2 has no factor under TRIAL_LIMIT, so it is prime.
        let bound = BigInt::from(TRIAL_LIMIT) * BigInt::from(TRIAL_LIMIT);
        if m.to_u128().is_none() || m >= bound {
            return Err(Error::TooLarge(n.to_string()));
        }
        *factors.entry(m).or_insert(0) += 1;
    }
    let mut divs = vec![BigInt::one()];
    for (p, e) in factors {
        let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
        for d in &divs {
            let mut pk = BigInt::one();
            for _ in 0..=e {
                next.push(d * &pk);
                pk *= &p;
            }
        }
        divs = next;
    }
    divs.sort();
    Ok(divs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, ratio};

    fn p(s: &str) -> Polynomial {
        s.parse().unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(
            rational_roots(&p("2*t0^2-t0-1")).unwrap(),
            vec![ratio(-1, 2), rat(1)]
        );
        assert!(rational_roots(&p("t0^2+1")).unwrap().is_empty());
        assert_eq!(rational_roots(&p("t0^3")).unwrap(), vec![rat(0); 3]);
        assert!(rational_roots(&Polynomial::zero()).is_err());
        assert!(rational_roots(&p("l1*l2")).is_err());
    }

    #[test]
    fn multiplicities_and_fractions() {
        // (3x - 2)^2 (x + 5) / 7
        let f = &(&p("3*x-2").pow(2) * &p("x+5")) * &p("1/7");
        assert_eq!(
            rational_roots(&f).unwrap(),
            vec![rat(-5), ratio(2, 3), ratio(2, 3)]
        );
        assert!(rational_roots(&p("5")).unwrap().is_empty());
    }

    #[test]
    fn divisor_lists() {
        let d = divisors(&BigInt::from(-12)).unwrap();
        let want: Vec<BigInt> = [1, 2, 3, 4, 6, 12]
            .iter()
            .map(|&k| BigInt::from(k))
            .collect();
        assert_eq!(d, want);
    }
}

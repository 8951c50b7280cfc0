//! Multivariate gcd over the rationals by recursive primitive remainder
//! sequences.

use std::collections::BTreeSet;

use super::{exact_div, Monomial, Polynomial, Var};

/// Greatest common divisor, normalized to leading coefficient 1.
/// `gcd(0, 0) = 0`.
pub fn gcd(a: &Polynomial, b: &Polynomial) -> Polynomial {
    gcd_inner(a, b).monic()
}

/// `h / gcd(h, ∂h/∂v)`: strips repeated factors and every factor free of `v`.
pub fn squarefree_part(h: &Polynomial, v: Var) -> Polynomial {
    let dh = h.derivative(v);
    if dh.is_zero() {
        return h.monic();
    }
    let g = gcd(h, &dh);
    exact_div(h, &g).monic()
}

fn gcd_inner(a: &Polynomial, b: &Polynomial) -> Polynomial {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    let vars: BTreeSet<Var> = a.variables().union(&b.variables()).copied().collect();
    let Some(&v) = vars.iter().next_back() else {
        return Polynomial::one();
    };
    let (da, db) = (a.degree_in(v), b.degree_in(v));
    if da == 0 {
        return gcd_inner(a, &content(b, v));
    }
    if db == 0 {
        return gcd_inner(&content(a, v), b);
    }
    let (ca, cb) = (content(a, v), content(b, v));
    let c = gcd_inner(&ca, &cb);
    let mut p = exact_div(a, &ca);
    let mut q = exact_div(b, &cb);
    if p.degree_in(v) < q.degree_in(v) {
        std::mem::swap(&mut p, &mut q);
    }
    let g = loop {
        let r = pseudo_rem(&p, &q, v);
        if r.is_zero() {
            break q;
        }
        if r.degree_in(v) == 0 {
            break Polynomial::one();
        }
        p = q;
        q = primitive_part(&r, v);
    };
    (&c * &g).monic()
}

fn content(a: &Polynomial, v: Var) -> Polynomial {
    a.coefficients_in(v)
        .values()
        .fold(Polynomial::zero(), |acc, c| gcd_inner(&acc, c))
}

fn primitive_part(a: &Polynomial, v: Var) -> Polynomial {
    exact_div(a, &content(a, v)).monic()
}

fn pseudo_rem(p: &Polynomial, q: &Polynomial, v: Var) -> Polynomial {
    let dq = q.degree_in(v);
    let lcq = q.coefficients_in(v).remove(&dq).unwrap_or_default();
    let mut r = p.clone();
    while !r.is_zero() && r.degree_in(v) >= dq {
        let dr = r.degree_in(v);
        let lcr = r.coefficients_in(v).remove(&dr).unwrap_or_default();
        let shift = lcr.mul_monomial(&Monomial::power(v, dr - dq));
        r = &(&r * &lcq) - &(&shift * q);
        r = r.monic();
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::divides_exact;
    use proptest::prelude::*;

    fn p(s: &str) -> Polynomial {
        s.parse().unwrap()
    }

    #[test]
    fn simple_gcds() {
        assert_eq!(gcd(&p("x^2-1"), &p("x^2+2*x+1")), p("x+1"));
        assert_eq!(gcd(&p("(x+1)*(t0-2)^2"), &p("(t0-2)*(x-t0)")), p("t0-2"));
        assert_eq!(gcd(&p("6*x"), &p("4")), p("1"));
        assert_eq!(gcd(&Polynomial::zero(), &p("2*t1")), p("t1"));
    }

    #[test]
    fn squarefree_examples() {
        assert_eq!(
            squarefree_part(&p("(t1*t0-x^2)^2"), Var::Jet(1)),
            p("t1*t0-x^2").monic()
        );
        assert_eq!(squarefree_part(&p("x^2*(t1-1)"), Var::Jet(1)), p("t1-1"));
        assert_eq!(
            squarefree_part(&p("(x-t0)^2*(t1+x)"), Var::Jet(1)),
            p("t1+x")
        );
    }

    fn small_poly() -> impl Strategy<Value = Polynomial> {
        let term = (-3i64..4, 0u32..3, 0u32..2, 0u32..2).prop_map(|(c, a, b, d)| {
            (
                Monomial::from_pairs([(Var::X, a), (Var::Jet(0), b), (Var::Jet(1), d)]),
                crate::poly::rat(c),
            )
        });
        prop::collection::vec(term, 1..4).prop_map(Polynomial::from_terms)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn common_factor_divides_gcd(a in small_poly(), b in small_poly(), c in small_poly()) {
            prop_assume!(!a.is_zero() && !b.is_zero() && !c.is_zero());
            let g = gcd(&(&a * &c), &(&b * &c));
            prop_assert!(divides_exact(&g, &c).unwrap().is_some());
            prop_assert!(divides_exact(&(&a * &c), &g).unwrap().is_some());
            prop_assert!(divides_exact(&(&b * &c), &g).unwrap().is_some());
        }
    }
}

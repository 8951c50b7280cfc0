//! Text form of rationals and polynomials.
//!
//! Grammar (whitespace is ignored):
//!
//! ```text
//! poly   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*      division only by constants
//! factor := atom ['^' digits]
//! atom   := digits | 'l'digits | 'x' | 't'digits | '(' poly ')'
//! ```

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Polynomial, Rational, Var};
use crate::error::{Error, Result};

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse {
        pos: 0,
        message: format!("not a rational number: {s:?}"),
    };
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(Rational::new(n, d))
}

pub(super) fn parse_polynomial(src: &str) -> Result<Polynomial> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    let out = p.poly()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn digits(&mut self) -> Option<&str> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            std::str::from_utf8(&self.src[start..self.pos]).ok()
        }
    }

    fn index(&mut self) -> Result<u32> {
        self.digits()
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| self.error("expected an index"))
    }

    fn poly(&mut self) -> Result<Polynomial> {
        let mut acc = Polynomial::zero();
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
        loop {
            let t = self.term()?;
            if sign < 0 {
                acc -= &t;
            } else {
                acc += &t;
            }
            match self.peek() {
                Some(b'+') => sign = 1,
                Some(b'-') => sign = -1,
                _ => return Ok(acc),
            }
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let f = self.factor()?;
                    acc = &acc * &f;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let f = self.factor()?;
                    let c = f.constant_value().ok_or(Error::Parse {
                        pos: at,
                        message: "division by a non-constant".into(),
                    })?;
                    if c.is_zero() {
                        return Err(Error::DivisionByZero);
                    }
                    acc = acc.scale(&c.recip());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.index()?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let d = self.digits().unwrap_or("0");
                let n: BigInt = d.parse().map_err(|_| self.error("bad integer"))?;
                Ok(Polynomial::constant(Rational::from_integer(n)))
            }
            Some(b'l') => {
                self.pos += 1;
                let i = self.index()?;
                if i == 0 {
                    return Err(self.error("lambda indices start at 1"));
                }
                Ok(Polynomial::var(Var::Lambda(i)))
            }
            Some(b'x') => {
                self.pos += 1;
                Ok(Polynomial::var(Var::X))
            }
            Some(b't') => {
                self.pos += 1;
                let k = self.index()?;
                Ok(Polynomial::var(Var::Jet(k)))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.poly()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, Monomial};
    use proptest::prelude::*;

    #[test]
    fn parses_examples() {
        let p = parse_polynomial("l1^2 + l1*l2 - 3/2*l1").unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.to_string(), "l1^2+l1*l2-3/2*l1");
        assert_eq!(
            parse_polynomial("t1*t0 - x^2").unwrap().to_string(),
            "-x^2+t0*t1"
        );
        assert_eq!(parse_polynomial("2*(l1+1)").unwrap().to_string(), "2*l1+2");
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse_polynomial("l1 + * 2") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        assert!(parse_polynomial("l0").is_err());
        assert!(parse_polynomial("l1/l2").is_err());
        assert!(parse_polynomial("(l1").is_err());
        assert_eq!(parse_polynomial("1/0"), Err(Error::DivisionByZero));
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("-6/4").unwrap(), crate::poly::ratio(-3, 2));
        assert_eq!(format_rational(&crate::poly::ratio(-3, 2)), "-3/2");
        assert_eq!(format_rational(&rat(7)), "7");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a").is_err());
    }

    fn arb_poly() -> impl Strategy<Value = Polynomial> {
        let term = (
            -20i64..20,
            1i64..6,
            prop::collection::vec(0u32..3, 0..3),
            0u32..3,
            0u32..2,
        )
            .prop_map(|(n, d, ls, xe, te)| {
                let mut pairs: Vec<(Var, u32)> = ls
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| (Var::Lambda(i as u32 + 1), e))
                    .collect();
                pairs.push((Var::X, xe));
                pairs.push((Var::Jet(2), te));
                (Monomial::from_pairs(pairs), crate::poly::ratio(n, d))
            });
        prop::collection::vec(term, 0..6).prop_map(Polynomial::from_terms)
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(p in arb_poly()) {
            let text = p.to_string();
            prop_assert_eq!(parse_polynomial(&text).unwrap(), p);
        }
    }
}

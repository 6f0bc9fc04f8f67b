//! Parsing and printing of rational-function expressions.
//!
//! Grammar (whitespace ignored):
//!   sum     := product (('+' | '-') product)*
//!   product := unary (('*' | '/') unary)*
//!   unary   := '-' unary | power
//!   power   := atom ('^' uint)?
//!   atom    := uint | 't' | 'y' | 'X' | '(' sum ')'
//!
//! Integer literals are F_p constants and must be below p; `t` is the residue
//! generating F_{q^r} over F_q; `y` the residue generating F_q over F_p
//! (k > 1 only); `X` the function variable. Everything evaluates exactly in
//! F_{q^r}(X). The printer emits a canonical form that reparses to the same
//! function.

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement, FqEl};
use crate::poly::{Polynomial, RationalFunction};

struct Parser<'a> {
    ctx: &'a FieldCtx,
    bytes: &'a [u8],
    pos: usize,
}

/// Parse an expression into a normalized rational function.
pub fn parse_rational(ctx: &FieldCtx, text: &str) -> Result<RationalFunction> {
    let mut p = Parser {
        ctx,
        bytes: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    let f = p.sum()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(f)
}

/// Parse an expression that must evaluate to a constant field element.
pub fn parse_element(ctx: &FieldCtx, text: &str) -> Result<FieldElement> {
    let f = parse_rational(ctx, text)?;
    if !f.is_constant() && !f.is_zero() {
        return Err(Error::Parse {
            pos: 0,
            msg: "expected a constant element, found a function of X".into(),
        });
    }
    Ok(f.num().coeff(ctx, 0))
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<RationalFunction> {
        let mut acc = self.product()?;
        loop {
            self.skip_ws();
            if self.eat(b'+') {
                self.skip_ws();
                let rhs = self.product()?;
                acc = acc.add(self.ctx, &rhs)?;
            } else if self.eat(b'-') {
                self.skip_ws();
                let rhs = self.product()?;
                acc = acc.sub(self.ctx, &rhs)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<RationalFunction> {
        let mut acc = self.unary()?;
        loop {
            self.skip_ws();
            if self.eat(b'*') {
                self.skip_ws();
                let rhs = self.unary()?;
                acc = acc.mul(self.ctx, &rhs)?;
            } else if self.eat(b'/') {
                self.skip_ws();
                let at = self.pos;
                let rhs = self.unary()?;
                if rhs.is_zero() {
                    return Err(Error::Parse {
                        pos: at,
                        msg: "division by the zero function".into(),
                    });
                }
                acc = acc.div(self.ctx, &rhs)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<RationalFunction> {
        self.skip_ws();
        if self.eat(b'-') {
            let inner = self.unary()?;
            return Ok(inner.neg(self.ctx));
        }
        self.power()
    }

    fn power(&mut self) -> Result<RationalFunction> {
        let base = self.atom()?;
        self.skip_ws();
        if self.eat(b'^') {
            self.skip_ws();
            let e = self.uint()?;
            if e > 1 << 20 {
                return Err(self.err("exponent too large"));
            }
            return base.pow_i(self.ctx, e as i32);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RationalFunction> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.err("expected expression, found end of input")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.sum()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(inner)
            }
            Some(b'X') => {
                self.pos += 1;
                Ok(RationalFunction::x(self.ctx))
            }
            Some(b't') => {
                self.pos += 1;
                Ok(RationalFunction::constant(self.ctx, self.ctx.t_gen()))
            }
            Some(b'y') => {
                let at = self.pos;
                self.pos += 1;
                let y = self.ctx.y_gen().map_err(|_| Error::Parse {
                    pos: at,
                    msg: "y is only defined when k > 1".into(),
                })?;
                Ok(RationalFunction::constant(self.ctx, y))
            }
            Some(c) if c.is_ascii_digit() => {
                let at = self.pos;
                let v = self.uint()?;
                if v >= self.ctx.p() as u64 {
                    return Err(Error::Parse {
                        pos: at,
                        msg: format!("element literal {v} out of range (p = {})", self.ctx.p()),
                    });
                }
                Ok(RationalFunction::constant(
                    self.ctx,
                    self.ctx.from_u64(v),
                ))
            }
            Some(c) => Err(self.err(&format!("unexpected byte '{}'", c as char))),
        }
    }

    fn uint(&mut self) -> Result<u64> {
        let start = self.pos;
        while self
            .peek()
            .map(|b| b.is_ascii_digit())
            .unwrap_or(false)
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("digits are utf8")
            .parse::<u64>()
            .map_err(|_| self.err("number too large"))
    }
}

// ---- canonical printing ----

/// Canonical literal for a subfield coefficient (polynomial in y over F_p).
fn format_fq(c: &FqEl) -> String {
    let terms: Vec<String> = c
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &a)| a != 0)
        .map(|(i, &a)| match (i, a) {
            (0, a) => format!("{a}"),
            (1, 1) => "y".into(),
            (1, a) => format!("{a}*y"),
            (i, 1) => format!("y^{i}"),
            (i, a) => format!("{a}*y^{i}"),
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

/// Canonical literal for a field element (polynomial in t with F_q
/// coefficients); reparses to the same element.
pub fn format_element(ctx: &FieldCtx, e: &FieldElement) -> String {
    let k = ctx.k();
    let mut terms: Vec<String> = Vec::new();
    for i in (0..ctx.r()).rev() {
        let chunk: FqEl = e.limbs()[i * k..(i + 1) * k].to_vec();
        if chunk.iter().all(|&x| x == 0) {
            continue;
        }
        let c = format_fq(&chunk);
        let c_wrapped = if c.contains('+') || c.contains('-') {
            format!("({c})")
        } else {
            c.clone()
        };
        let term = match i {
            0 => c,
            1 if c == "1" => "t".into(),
            1 => format!("{c_wrapped}*t"),
            _ if c == "1" => format!("t^{i}"),
            _ => format!("{c_wrapped}*t^{i}"),
        };
        terms.push(term);
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

/// Canonical form of a polynomial in X.
pub fn format_poly(ctx: &FieldCtx, p: &Polynomial) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut terms: Vec<String> = Vec::new();
    for (i, c) in p.coeffs().iter().enumerate().rev() {
        if ctx.is_zero(c) {
            continue;
        }
        let cs = format_element(ctx, c);
        let wrapped = if cs.contains('+') || cs.contains('-') || cs.contains('*') {
            format!("({cs})")
        } else {
            cs.clone()
        };
        let term = match i {
            0 => cs,
            1 if cs == "1" => "X".into(),
            1 => format!("{wrapped}*X"),
            _ if cs == "1" => format!("X^{i}"),
            _ => format!("{wrapped}*X^{i}"),
        };
        terms.push(term);
    }
    terms.join(" + ")
}

/// Canonical form of a rational function; reparses to an equal function.
pub fn format_rational(ctx: &FieldCtx, f: &RationalFunction) -> String {
    if f.den().is_one(ctx) {
        format_poly(ctx, f.num())
    } else {
        format!(
            "({})/({})",
            format_poly(ctx, f.num()),
            format_poly(ctx, f.den())
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f9() -> FieldCtx {
        FieldCtx::build(3, 1, 2).unwrap()
    }

    #[test]
    fn parse_basics() {
        let f = f9();
        let x = parse_rational(&f, "X").unwrap();
        assert_eq!(x, RationalFunction::x(&f));
        let r = parse_rational(&f, "(X^2 + t*X + 2)/(X + 1)").unwrap();
        assert_eq!(r.degree(), 2);
        assert_eq!(r.num().coeff(&f, 1), f.t_gen());
        // 1/X
        let inv = parse_rational(&f, "1/X").unwrap();
        assert_eq!(inv.den(), &Polynomial::x(&f));
        // kloosterman shape
        let kl = parse_rational(&f, "2*X + 1/X").unwrap();
        assert_eq!(kl.degree(), 2);
    }

    #[test]
    fn parse_errors_with_positions() {
        let f = f9();
        match parse_rational(&f, "X/") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_rational(&f, "5 + X") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 0),
            other => panic!("expected out-of-range literal, got {other:?}"),
        }
        assert!(parse_rational(&f, "X + ").is_err());
        assert!(parse_rational(&f, "(X").is_err());
        assert!(parse_rational(&f, "X)").is_err());
        assert!(parse_rational(&f, "1/(X - X)").is_err());
        // y invalid when k = 1
        assert!(parse_rational(&f, "y").is_err());
    }

    #[test]
    fn parse_element_literals() {
        let f = f9();
        assert_eq!(parse_element(&f, "2*t+1").unwrap(), {
            let t = f.t_gen();
            f.add(&f.mul_fq(&t, &vec![2]), &f.one())
        });
        assert!(parse_element(&f, "X").is_err());
        let f4 = FieldCtx::build(2, 2, 1).unwrap();
        let y = parse_element(&f4, "y").unwrap();
        assert_eq!(y, f4.y_gen().unwrap());
    }

    #[test]
    fn print_round_trips() {
        let f = f9();
        for text in ["X", "1/X", "(X^2 + t*X + 2)/(X + 1)", "2*t + 1", "0"] {
            let parsed = parse_rational(&f, text).unwrap();
            let printed = format_rational(&f, &parsed);
            let reparsed = parse_rational(&f, &printed).unwrap();
            assert_eq!(parsed, reparsed, "round trip of {text} via {printed}");
        }
    }

    #[test]
    fn seeded_random_round_trips() {
        let f = FieldCtx::build(3, 2, 2).unwrap(); // k = 2 exercises y
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let num = Polynomial::from_coeffs(
                &f,
                (0..rng.gen_range(1..5usize))
                    .map(|_| f.from_code(rng.gen_range(0..f.order())))
                    .collect(),
            );
            let den = Polynomial::from_coeffs(
                &f,
                (0..rng.gen_range(1..4usize))
                    .map(|_| f.from_code(rng.gen_range(0..f.order())))
                    .collect(),
            );
            if den.is_zero() {
                continue;
            }
            let r = RationalFunction::new(&f, num, den).unwrap();
            let printed = format_rational(&f, &r);
            let reparsed = parse_rational(&f, &printed).unwrap();
            assert_eq!(r, reparsed, "via {printed}");
        }
    }
}

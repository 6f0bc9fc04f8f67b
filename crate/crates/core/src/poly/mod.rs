//! Polynomials and rational functions over F_{q^r}.

mod factor;
mod rational;

pub use factor::{factor_poly, is_irreducible, FactoredRational};
pub use rational::{
    build_l, build_p, EvalResult, RationalAnalysis, RationalFunction,
};

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::ring;

/// Dense polynomial, ascending coefficients, trailing zeros trimmed;
/// the zero polynomial is the empty vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial(pub(crate) Vec<FieldElement>);

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial(Vec::new())
    }

    pub fn from_coeffs(ctx: &FieldCtx, coeffs: Vec<FieldElement>) -> Self {
        Polynomial(ring::ptrim(ctx, coeffs))
    }

    pub fn constant(ctx: &FieldCtx, c: FieldElement) -> Self {
        Self::from_coeffs(ctx, vec![c])
    }

    pub fn one(ctx: &FieldCtx) -> Self {
        Polynomial(vec![ctx.one()])
    }

    /// The monomial X.
    pub fn x(ctx: &FieldCtx) -> Self {
        Polynomial(vec![ctx.zero(), ctx.one()])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        ring::pdeg(&self.0)
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.0
    }

    pub fn coeff(&self, ctx: &FieldCtx, i: usize) -> FieldElement {
        self.0.get(i).cloned().unwrap_or_else(|| ctx.zero())
    }

    pub fn leading(&self) -> Option<&FieldElement> {
        self.0.last()
    }

    pub fn is_one(&self, ctx: &FieldCtx) -> bool {
        self.0.len() == 1 && ctx.is_one(&self.0[0])
    }

    pub fn is_monic(&self, ctx: &FieldCtx) -> bool {
        self.leading().map_or(false, |l| ctx.is_one(l))
    }

    pub fn add(&self, ctx: &FieldCtx, other: &Self) -> Self {
        Polynomial(ring::padd(ctx, &self.0, &other.0))
    }

    pub fn sub(&self, ctx: &FieldCtx, other: &Self) -> Self {
        Polynomial(ring::psub(ctx, &self.0, &other.0))
    }

    pub fn neg(&self, ctx: &FieldCtx) -> Self {
        Polynomial(self.0.iter().map(|c| ctx.neg(c)).collect())
    }

    pub fn mul(&self, ctx: &FieldCtx, other: &Self) -> Self {
        Polynomial(ring::pmul(ctx, &self.0, &other.0))
    }

    pub fn mul_scalar(&self, ctx: &FieldCtx, c: &FieldElement) -> Self {
        Polynomial(ring::pscale(ctx, &self.0, c))
    }

    /// Quotient and remainder; errors when `other` is zero.
    pub fn divmod(&self, ctx: &FieldCtx, other: &Self) -> Result<(Self, Self)> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (q, r) = ring::pdivmod(ctx, &self.0, &other.0);
        Ok((Polynomial(q), Polynomial(r)))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, ctx: &FieldCtx, other: &Self) -> Self {
        Polynomial(ring::pgcd(ctx, &self.0, &other.0))
    }

    pub fn monic(&self, ctx: &FieldCtx) -> Self {
        Polynomial(ring::pmonic(ctx, &self.0))
    }

    pub fn pow(&self, ctx: &FieldCtx, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(ctx, &base);
            }
            base = base.mul(ctx, &base);
            e >>= 1;
        }
        acc
    }

    pub fn eval(&self, ctx: &FieldCtx, x: &FieldElement) -> FieldElement {
        ring::peval(ctx, &self.0, x)
    }

    pub fn derivative(&self, ctx: &FieldCtx) -> Self {
        if self.0.len() <= 1 {
            return Self::zero();
        }
        let coeffs = self.0[1..]
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let scale = ctx.from_u64((i as u64 + 1) % ctx.p());
                ctx.mul(c, &scale)
            })
            .collect();
        Self::from_coeffs(ctx, coeffs)
    }

    /// Composition with X -> X + v, by iterated Horner steps.
    pub fn shift(&self, ctx: &FieldCtx, v: &FieldElement) -> Self {
        let xv = Polynomial(vec![v.clone(), ctx.one()]);
        let mut acc = Self::zero();
        for c in self.0.iter().rev() {
            acc = acc.mul(ctx, &xv);
            acc = acc.add(ctx, &Self::constant(ctx, c.clone()));
        }
        acc
    }

    /// Deterministic order key: (degree, coefficient codes from the top).
    pub(crate) fn order_key(&self, ctx: &FieldCtx) -> (usize, Vec<u128>) {
        (
            self.0.len(),
            self.0.iter().rev().map(|c| ctx.code(c)).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f9() -> FieldCtx {
        FieldCtx::build(3, 1, 2).unwrap()
    }

    fn poly(ctx: &FieldCtx, cs: &[u64]) -> Polynomial {
        Polynomial::from_coeffs(ctx, cs.iter().map(|&c| ctx.from_u64(c)).collect())
    }

    #[test]
    fn arith_examples() {
        let f = f9();
        // gcd(X^2 - 1, X - 1) = X - 1 = X + 2
        let a = poly(&f, &[2, 0, 1]);
        let b = poly(&f, &[2, 1]);
        assert_eq!(a.gcd(&f, &b), b);
        // divmod(X^3, X) = (X^2, 0)
        let x3 = poly(&f, &[0, 0, 0, 1]);
        let x = Polynomial::x(&f);
        let (q, r) = x3.divmod(&f, &x).unwrap();
        assert_eq!(q, poly(&f, &[0, 0, 1]));
        assert!(r.is_zero());
        // (X+1)(X+2) = X^2 + 2 over F_3
        let f3 = FieldCtx::build(3, 1, 1).unwrap();
        let prod = poly(&f3, &[1, 1]).mul(&f3, &poly(&f3, &[2, 1]));
        assert_eq!(prod, poly(&f3, &[2, 0, 1]));
        // division by zero
        assert!(x3.divmod(&f, &Polynomial::zero()).is_err());
    }

    #[test]
    fn shift_round_trip_and_eval_commute() {
        let f = f9();
        let t = f.t_gen();
        let p = Polynomial::from_coeffs(
            &f,
            vec![f.from_u64(2), t.clone(), f.one(), f.from_u64(2)],
        );
        let v = f.from_code(5);
        let shifted = p.shift(&f, &v);
        assert_eq!(shifted.shift(&f, &f.neg(&v)), p);
        assert_eq!(p.shift(&f, &f.zero()), p);
        for code in 0..9 {
            let x = f.from_code(code);
            assert_eq!(shifted.eval(&f, &x), p.eval(&f, &f.add(&x, &v)));
        }
        // binomial example: shift(X^2, v) = X^2 + 2vX + v^2
        let x2 = poly(&f, &[0, 0, 1]);
        let s = x2.shift(&f, &v);
        let expect = Polynomial::from_coeffs(
            &f,
            vec![
                f.mul(&v, &v),
                f.mul(&f.from_u64(2), &v),
                f.one(),
            ],
        );
        assert_eq!(s, expect);
    }

    #[test]
    fn derivative_char_p() {
        let f3 = FieldCtx::build(3, 1, 1).unwrap();
        // d/dX (X^3 + X) = 1 in characteristic 3
        let p = poly(&f3, &[0, 1, 0, 1]);
        assert_eq!(p.derivative(&f3), poly(&f3, &[1]));
    }
}

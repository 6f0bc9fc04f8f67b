//! Rational functions in normalized form, their zero/pole orders, argument
//! shifts, and the product/linear-combination constructions over shift
//! vectors used by the sum engine.

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::poly::{factor_poly, Polynomial};

/// Normalized quotient num/den: den monic, gcd(num, den) = 1, zero is 0/1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

/// Result of evaluating a rational function at a point. A pole is a value of
/// the domain convention, not an error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalResult {
    Value(FieldElement),
    Pole,
}

impl EvalResult {
    pub fn value(&self) -> Option<&FieldElement> {
        match self {
            EvalResult::Value(v) => Some(v),
            EvalResult::Pole => None,
        }
    }
    pub fn is_pole(&self) -> bool {
        matches!(self, EvalResult::Pole)
    }
}

/// Zero/pole structure: orders per monic irreducible plus the order at
/// infinity (positive order = zero, negative = pole).
#[derive(Clone, Debug, PartialEq)]
pub struct RationalAnalysis {
    pub degree: usize,
    pub finite_orders: Vec<(Polynomial, i64)>,
    pub ord_infinity: i64,
}

impl RationalFunction {
    /// Normalize num/den; errors when den is the zero polynomial.
    pub fn new(ctx: &FieldCtx, num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RationalFunction {
                num: Polynomial::zero(),
                den: Polynomial::one(ctx),
            });
        }
        let g = num.gcd(ctx, &den);
        let num = num.divmod(ctx, &g)?.0;
        let den = den.divmod(ctx, &g)?.0;
        let lead_inv = ctx.inv(den.leading().unwrap())?;
        let num = num.mul_scalar(ctx, &lead_inv);
        let den = den.mul_scalar(ctx, &lead_inv);
        Ok(RationalFunction { num, den })
    }

    pub fn from_poly(ctx: &FieldCtx, p: Polynomial) -> Self {
        RationalFunction {
            num: p,
            den: Polynomial::one(ctx),
        }
    }

    pub fn zero(ctx: &FieldCtx) -> Self {
        Self::from_poly(ctx, Polynomial::zero())
    }

    pub fn one(ctx: &FieldCtx) -> Self {
        Self::from_poly(ctx, Polynomial::one(ctx))
    }

    pub fn constant(ctx: &FieldCtx, c: FieldElement) -> Self {
        Self::from_poly(ctx, Polynomial::constant(ctx, c))
    }

    /// The identity function X.
    pub fn x(ctx: &FieldCtx) -> Self {
        Self::from_poly(ctx, Polynomial::x(ctx))
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self, ctx: &FieldCtx) -> bool {
        self.den.is_one(ctx)
    }

    pub fn is_constant(&self) -> bool {
        self.num.degree().unwrap_or(0) == 0 && self.den.degree() == Some(0)
    }

    /// max(deg num, deg den); 0 for the zero function.
    pub fn degree(&self) -> usize {
        self.num
            .degree()
            .unwrap_or(0)
            .max(self.den.degree().unwrap_or(0))
    }

    pub fn add(&self, ctx: &FieldCtx, other: &Self) -> Result<Self> {
        let n = self
            .num
            .mul(ctx, &other.den)
            .add(ctx, &other.num.mul(ctx, &self.den));
        let d = self.den.mul(ctx, &other.den);
        Self::new(ctx, n, d)
    }

    pub fn sub(&self, ctx: &FieldCtx, other: &Self) -> Result<Self> {
        self.add(ctx, &other.neg(ctx))
    }

    pub fn neg(&self, ctx: &FieldCtx) -> Self {
        RationalFunction {
            num: self.num.neg(ctx),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, ctx: &FieldCtx, other: &Self) -> Result<Self> {
        Self::new(
            ctx,
            self.num.mul(ctx, &other.num),
            self.den.mul(ctx, &other.den),
        )
    }

    pub fn div(&self, ctx: &FieldCtx, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Self::new(
            ctx,
            self.num.mul(ctx, &other.den),
            self.den.mul(ctx, &other.num),
        )
    }

    /// Integer powers; negative exponents invert (error on the zero function).
    pub fn pow_i(&self, ctx: &FieldCtx, e: i32) -> Result<Self> {
        if e < 0 && self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let p = Self::new(
            ctx,
            self.num.pow(ctx, e.unsigned_abs()),
            self.den.pow(ctx, e.unsigned_abs()),
        )?;
        if e >= 0 {
            Ok(p)
        } else {
            Self::one(ctx).div(ctx, &p)
        }
    }

    /// Exact evaluation; den(x) = 0 yields the distinguished pole marker
    /// (num(x) != 0 there by coprimality).
    pub fn eval(&self, ctx: &FieldCtx, x: &FieldElement) -> Result<EvalResult> {
        ctx.check(x)?;
        // normalized den is monic, so a constant den is exactly 1
        if self.den.degree() == Some(0) {
            return Ok(EvalResult::Value(self.num.eval(ctx, x)));
        }
        let d = self.den.eval(ctx, x);
        if ctx.is_zero(&d) {
            debug_assert!(!ctx.is_zero(&self.num.eval(ctx, x)));
            return Ok(EvalResult::Pole);
        }
        let n = self.num.eval(ctx, x);
        Ok(EvalResult::Value(ctx.mul(&n, &ctx.inv(&d)?)))
    }

    /// Composition with X -> X + v; degree is preserved.
    pub fn shift(&self, ctx: &FieldCtx, v: &FieldElement) -> Self {
        RationalFunction {
            num: self.num.shift(ctx, v),
            den: self.den.shift(ctx, v),
        }
        // shifting num and den preserves coprimality and monicity
    }

    /// Degree, per-irreducible orders and the order at infinity.
    pub fn analyze(&self, ctx: &FieldCtx) -> Result<RationalAnalysis> {
        let fac = self.factor(ctx)?;
        let ord_infinity =
            self.den.degree().unwrap_or(0) as i64 - self.num.degree().unwrap_or(0) as i64;
        Ok(RationalAnalysis {
            degree: self.degree(),
            finite_orders: fac.factors,
            ord_infinity,
        })
    }

    /// Factor numerator and denominator; pole factors get negative exponents.
    pub fn factor(&self, ctx: &FieldCtx) -> Result<super::FactoredRational> {
        if self.is_zero() {
            return Err(Error::ZeroFunction);
        }
        let nf = factor_poly(ctx, &self.num)?;
        let df = factor_poly(ctx, &self.den)?;
        let mut factors = nf.factors;
        for (p, e) in df.factors {
            factors.push((p, -e));
        }
        factors.sort_by(|a, b| a.0.order_key(ctx).cmp(&b.0.order_key(ctx)));
        let unit = ctx.div(&nf.unit, &df.unit)?;
        Ok(super::FactoredRational { unit, factors })
    }
}

/// P_{v,f}(X) = prod_{i=1}^{s} f(X + v_i) / f(X + v_{s+i}) for a shift vector
/// of even length 2s.
pub fn build_p(ctx: &FieldCtx, f: &RationalFunction, v: &[FieldElement]) -> Result<RationalFunction> {
    if f.is_zero() {
        return Err(Error::ZeroFunction);
    }
    if v.is_empty() || v.len() % 2 != 0 {
        return Err(Error::InvalidArgument(
            "shift vector must have positive even length".into(),
        ));
    }
    let s = v.len() / 2;
    let mut acc = RationalFunction::one(ctx);
    for i in 0..s {
        let top = f.shift(ctx, &v[i]);
        let bot = f.shift(ctx, &v[s + i]);
        acc = acc.mul(ctx, &top.div(ctx, &bot)?)?;
    }
    Ok(acc)
}

/// L_{v,f}(X) = sum_{i=1}^{s} (f(X + v_i) - f(X + v_{s+i})).
pub fn build_l(ctx: &FieldCtx, f: &RationalFunction, v: &[FieldElement]) -> Result<RationalFunction> {
    if f.is_zero() {
        return Err(Error::ZeroFunction);
    }
    if v.is_empty() || v.len() % 2 != 0 {
        return Err(Error::InvalidArgument(
            "shift vector must have positive even length".into(),
        ));
    }
    let s = v.len() / 2;
    let mut acc = RationalFunction::zero(ctx);
    for i in 0..s {
        let top = f.shift(ctx, &v[i]);
        let bot = f.shift(ctx, &v[s + i]);
        acc = acc.add(ctx, &top.sub(ctx, &bot)?)?;
    }
    Ok(acc)
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
    fn normalization_examples() {
        let f = f9();
        // (X^2 - 1)/(X - 1) = X + 1
        let r = RationalFunction::new(&f, poly(&f, &[2, 0, 1]), poly(&f, &[2, 1])).unwrap();
        assert_eq!(r.num(), &poly(&f, &[1, 1]));
        assert!(r.den().is_one(&f));
        // (2X)/2 = X
        let r = RationalFunction::new(&f, poly(&f, &[0, 2]), poly(&f, &[2])).unwrap();
        assert_eq!(r, RationalFunction::x(&f));
        // 0/X = 0/1
        let r = RationalFunction::new(&f, Polynomial::zero(), Polynomial::x(&f)).unwrap();
        assert!(r.is_zero());
        assert!(r.den().is_one(&f));
        // den = 0 rejected
        assert!(RationalFunction::new(&f, poly(&f, &[1]), Polynomial::zero()).is_err());
    }

    #[test]
    fn eval_with_poles() {
        let f = f9();
        let inv_x = RationalFunction::new(&f, poly(&f, &[1]), Polynomial::x(&f)).unwrap();
        assert!(inv_x.eval(&f, &f.zero()).unwrap().is_pole());
        let x = RationalFunction::x(&f);
        let a = f.from_code(7);
        assert_eq!(x.eval(&f, &a).unwrap(), EvalResult::Value(a.clone()));
        // (X^2+1)/(X+1) at t equals num(t)/den(t)
        let r = RationalFunction::new(&f, poly(&f, &[1, 0, 1]), poly(&f, &[1, 1])).unwrap();
        let t = f.t_gen();
        let expect = f
            .mul(&poly(&f, &[1, 0, 1]).eval(&f, &t), &f.inv(&poly(&f, &[1, 1]).eval(&f, &t)).unwrap());
        assert_eq!(r.eval(&f, &t).unwrap(), EvalResult::Value(expect));
    }

    #[test]
    fn analyze_orders() {
        let f = f9();
        // 1/X^2: order -2 at X, +2 at infinity
        let r = RationalFunction::new(&f, poly(&f, &[1]), poly(&f, &[0, 0, 1])).unwrap();
        let a = r.analyze(&f).unwrap();
        assert_eq!(a.finite_orders, vec![(Polynomial::x(&f), -2)]);
        assert_eq!(a.ord_infinity, 2);
        // X^3 + 1 has ord_infinity = -3
        let r = RationalFunction::from_poly(&f, poly(&f, &[1, 0, 0, 1]));
        assert_eq!(r.analyze(&f).unwrap().ord_infinity, -3);
        // (X-t)^2 (X+t): orders 2 and 1
        let t = f.t_gen();
        let lin1 = Polynomial::from_coeffs(&f, vec![f.neg(&t), f.one()]);
        let lin2 = Polynomial::from_coeffs(&f, vec![t.clone(), f.one()]);
        let p = lin1.pow(&f, 2).mul(&f, &lin2);
        let a = RationalFunction::from_poly(&f, p).analyze(&f).unwrap();
        let mut orders: Vec<i64> = a.finite_orders.iter().map(|(_, e)| *e).collect();
        orders.sort();
        assert_eq!(orders, vec![1, 2]);
    }

    #[test]
    fn orders_sum_to_zero() {
        let f = f9();
        // weighted by factor degree, zeros minus poles plus infinity vanishes
        for (ncs, dcs) in [
            (vec![1u64, 0, 1], vec![1u64, 1]),
            (vec![2, 1, 0, 1], vec![0, 1]),
            (vec![1], vec![1, 2, 1]),
        ] {
            let r = RationalFunction::new(&f, poly(&f, &ncs), poly(&f, &dcs)).unwrap();
            let a = r.analyze(&f).unwrap();
            let finite: i64 = a
                .finite_orders
                .iter()
                .map(|(p, e)| p.degree().unwrap() as i64 * e)
                .sum();
            assert_eq!(finite + a.ord_infinity, 0);
        }
    }

    #[test]
    fn build_p_examples() {
        let f = f9();
        let x = RationalFunction::x(&f);
        let a = f.from_code(5);
        // v = (a, a): full cancellation
        let p = build_p(&f, &x, &[a.clone(), a.clone()]).unwrap();
        assert_eq!(p, RationalFunction::one(&f));
        // f = X, v = (0, 1): X/(X+1)
        let p = build_p(&f, &x, &[f.zero(), f.one()]).unwrap();
        assert_eq!(p.num(), &Polynomial::x(&f));
        assert_eq!(p.den(), &poly(&f, &[1, 1]));
        // s = 2, v = (0,1,0,1): cancellation again
        let p = build_p(&f, &x, &[f.zero(), f.one(), f.zero(), f.one()]).unwrap();
        assert_eq!(p, RationalFunction::one(&f));
        assert!(build_p(&f, &x, &[f.zero()]).is_err());
        assert!(build_p(&f, &RationalFunction::zero(&f), &[f.zero(), f.one()]).is_err());
    }

    #[test]
    fn build_l_examples() {
        let f = f9();
        let a = f.from_code(3);
        let inv_x = RationalFunction::new(&f, poly(&f, &[1]), Polynomial::x(&f)).unwrap();
        // v = (a, a): zero
        assert!(build_l(&f, &inv_x, &[a.clone(), a]).unwrap().is_zero());
        // f = 1/X, v = (0, 1): 1/X - 1/(X+1) = 1/(X^2 + X)
        let l = build_l(&f, &inv_x, &[f.zero(), f.one()]).unwrap();
        assert_eq!(l.num(), &poly(&f, &[1]));
        assert_eq!(l.den(), &poly(&f, &[0, 1, 1]));
        // f = X^2, v = (v1, v2): 2(v1 - v2) X + (v1^2 - v2^2), leading terms cancel
        let x2 = RationalFunction::from_poly(&f, poly(&f, &[0, 0, 1]));
        let v1 = f.from_code(4);
        let v2 = f.from_code(7);
        let l = build_l(&f, &x2, &[v1.clone(), v2.clone()]).unwrap();
        let d = f.sub(&v1, &v2);
        let expect = Polynomial::from_coeffs(
            &f,
            vec![
                f.sub(&f.mul(&v1, &v1), &f.mul(&v2, &v2)),
                f.mul(&f.from_u64(2), &d),
            ],
        );
        assert_eq!(l.num(), &expect);
        assert_eq!(l.degree(), 1);
    }

    #[test]
    fn degree_bound_for_shift_constructions() {
        let f = f9();
        let r = RationalFunction::new(&f, poly(&f, &[1, 2, 1]), poly(&f, &[0, 1])).unwrap();
        let d = r.degree();
        let v: Vec<_> = [0u128, 1, 3, 5].iter().map(|&c| f.from_code(c)).collect();
        let s = 2;
        let p = build_p(&f, &r, &v).unwrap();
        let l = build_l(&f, &r, &v).unwrap();
        assert!(p.degree() <= 2 * s * d);
        assert!(l.degree() <= 2 * s * d);
    }
}

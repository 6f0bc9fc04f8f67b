//! Additive and multiplicative characters of F_{q^r}, and the exact
//! root-of-unity accumulator for character sums.
//!
//! Character values are exponents of a fixed root of unity, never complex
//! numbers, until final read-out. A sum is a vector of integer counts per
//! exponent class mod M = lcm(p, ord chi); floating point only enters when
//! a magnitude is requested.

use serde::{Deserialize, Serialize};

use crate::arith::{gcd_u128, lcm_u128};
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::poly::EvalResult;

/// Additive character psi(x) = e_p(Tr(beta * x)); principal iff beta = 0.
#[derive(Clone, Debug)]
pub struct AddChar {
    fp: u64,
    beta: FieldElement,
    principal: bool,
}

impl AddChar {
    pub fn new(ctx: &FieldCtx, beta: FieldElement) -> Result<Self> {
        ctx.check(&beta)?;
        let principal = ctx.is_zero(&beta);
        Ok(AddChar {
            fp: ctx.fingerprint(),
            beta,
            principal,
        })
    }

    pub fn beta(&self) -> &FieldElement {
        &self.beta
    }

    pub fn is_principal(&self) -> bool {
        self.principal
    }

    /// Exponent of e_p: Tr(beta * x) in [0, p).
    pub fn exponent(&self, ctx: &FieldCtx, x: &FieldElement) -> u64 {
        if self.principal {
            return 0;
        }
        ctx.trace_fp_scalar(&ctx.mul(&self.beta, x))
    }

    pub fn conjugate(&self, ctx: &FieldCtx) -> AddChar {
        AddChar {
            fp: self.fp,
            beta: ctx.neg(&self.beta),
            principal: self.principal,
        }
    }
}

/// Multiplicative character chi(g^e) = zeta^{m e} for the context generator g;
/// order n = (q^r - 1)/gcd(m, q^r - 1); principal iff m = 0. chi(0) is the
/// absorbing zero value by convention.
#[derive(Clone, Debug)]
pub struct MultChar {
    m: u128,
    order: u128,
    /// m / gcd(m, q^r - 1): the exponent as a multiple of zeta_order.
    m_reduced: u128,
}

impl MultChar {
    pub fn new(ctx: &FieldCtx, m: u128) -> Self {
        let n = ctx.mult_order();
        let m = m % n.max(1);
        let g = gcd_u128(m, n);
        let order = if m == 0 { 1 } else { n / g };
        MultChar {
            m,
            order,
            m_reduced: if m == 0 { 0 } else { m / g },
        }
    }

    pub fn exponent_m(&self) -> u128 {
        self.m
    }

    /// Order n of the character.
    pub fn order(&self) -> u128 {
        self.order
    }

    pub fn is_principal(&self) -> bool {
        self.m == 0
    }

    /// Exponent of zeta_n at a nonzero argument.
    pub fn exponent(&self, ctx: &FieldCtx, x: &FieldElement) -> Result<u64> {
        if self.is_principal() {
            return Ok(0);
        }
        let e = ctx.dlog(x)? as u128;
        Ok(((self.m_reduced % self.order) * (e % self.order) % self.order) as u64)
    }

    pub fn conjugate(&self, ctx: &FieldCtx) -> MultChar {
        let n = ctx.mult_order();
        MultChar::new(ctx, (n - self.m) % n)
    }
}

/// One term of a character sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CharTerm {
    /// Argument was a pole: the term is excluded from summation.
    Excluded,
    /// chi(0) with nonprincipal chi: the term contributes the zero value.
    Zero,
    /// A root of unity zeta_M^j.
    Root(u64),
}

/// Combined root-of-unity order for a character pair: M = lcm(p, ord chi).
pub fn pair_order(ctx: &FieldCtx, chi: &MultChar, _psi: &AddChar) -> u128 {
    lcm_u128(ctx.p() as u128, chi.order)
}

/// Evaluate chi(u) psi(w) where u, w are the evaluated f_1, f_2 arguments.
///
/// Poles exclude the term. u = 0 with nonprincipal chi gives the zero value;
/// a principal chi contributes exponent 0 even at u = 0.
pub fn eval_char_pair(
    ctx: &FieldCtx,
    chi: &MultChar,
    psi: &AddChar,
    u: &EvalResult,
    w: &EvalResult,
) -> Result<CharTerm> {
    CharPairEval::new(ctx, chi, psi)?.eval(ctx, u, w)
}

/// Precomputed evaluator for one (chi, psi) pair; avoids per-term order
/// arithmetic in the sum engine's hot loop. Constructible only when the
/// combined order fits an accumulator, which keeps the exponent arithmetic
/// inside u64.
pub struct CharPairEval<'a> {
    chi: &'a MultChar,
    m: u64,
    m_over_n: u64,
    m_over_p: u64,
    mult_mod: u64,
    order: u64,
    p: u64,
    /// Per-limb coefficients of the F_p-linear functional x -> Tr(beta x);
    /// empty for a principal psi.
    add_functional: Vec<u64>,
}

impl<'a> CharPairEval<'a> {
    pub fn new(ctx: &FieldCtx, chi: &'a MultChar, psi: &'a AddChar) -> Result<Self> {
        let m = pair_order(ctx, chi, psi);
        if m > (1 << 24) {
            return Err(Error::AccumulatorTooLarge(m));
        }
        let m = m as u64;
        let order = chi.order as u64;
        let add_functional = if psi.is_principal() {
            Vec::new()
        } else {
            let rk = ctx.r() * ctx.k();
            let mut out = Vec::with_capacity(rk);
            for slot in 0..rk {
                // unit vector in the flat basis, scaled by beta and traced
                let mut mu = ctx.zero();
                mu.c[slot] = 1;
                out.push(ctx.trace_fp_scalar(&ctx.mul(&psi.beta, &mu)));
            }
            out
        };
        Ok(CharPairEval {
            chi,
            m,
            m_over_n: m / order,
            m_over_p: m / ctx.p(),
            mult_mod: (chi.m_reduced % chi.order) as u64,
            order,
            p: ctx.p(),
            add_functional,
        })
    }

    pub fn order(&self) -> u64 {
        self.m
    }

    pub fn eval(&self, ctx: &FieldCtx, u: &EvalResult, w: &EvalResult) -> Result<CharTerm> {
        self.eval_refs(ctx, u.value(), w.value())
    }

    /// None marks a pole in the corresponding argument.
    pub fn eval_refs(
        &self,
        ctx: &FieldCtx,
        u: Option<&FieldElement>,
        w: Option<&FieldElement>,
    ) -> Result<CharTerm> {
        let (Some(u), Some(w)) = (u, w) else {
            return Ok(CharTerm::Excluded);
        };
        let mult_part = if self.chi.is_principal() {
            0u64
        } else if ctx.is_zero(u) {
            return Ok(CharTerm::Zero);
        } else {
            let e = ctx.dlog(u)?;
            self.mult_mod * (e % self.order) % self.order
        };
        let add_part = if self.add_functional.is_empty() {
            0u64
        } else {
            let mut acc: u128 = 0;
            for (x, t) in w.limbs().iter().zip(&self.add_functional) {
                acc += (*x as u128) * (*t as u128);
            }
            (acc % self.p as u128) as u64
        };
        let j = (self.m_over_n * mult_part + self.m_over_p * add_part) % self.m;
        Ok(CharTerm::Root(j))
    }
}

/// Exact character-sum accumulator: integer counts per M-th root of unity,
/// plus a count of zero-valued terms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclotomicSum {
    m: u64,
    counts: Vec<i64>,
    zero_terms: u64,
}

impl CyclotomicSum {
    pub fn new(m: u128) -> Result<Self> {
        if m == 0 || m > (1 << 24) {
            return Err(Error::AccumulatorTooLarge(m));
        }
        Ok(CyclotomicSum {
            m: m as u64,
            counts: vec![0; m as usize],
            zero_terms: 0,
        })
    }

    pub fn order(&self) -> u64 {
        self.m
    }

    pub fn counts(&self) -> &[i64] {
        &self.counts
    }

    pub fn zero_terms(&self) -> u64 {
        self.zero_terms
    }

    /// Number of accumulated root-of-unity terms.
    pub fn term_count(&self) -> i64 {
        self.counts.iter().sum()
    }

    pub fn accumulate(&mut self, term: CharTerm) {
        match term {
            CharTerm::Excluded => {}
            CharTerm::Zero => self.zero_terms += 1,
            CharTerm::Root(j) => self.counts[(j % self.m) as usize] += 1,
        }
    }

    /// Component-wise merge; associative and commutative.
    pub fn merge(&mut self, other: &CyclotomicSum) -> Result<()> {
        if self.m != other.m {
            return Err(Error::OrderMismatch(self.m, other.m));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.zero_terms += other.zero_terms;
        Ok(())
    }

    /// The represented complex value sum_j counts[j] zeta_M^j.
    pub fn complex_value(&self) -> (f64, f64) {
        let m = self.m as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, &c) in self.counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let theta = 2.0 * std::f64::consts::PI * j as f64 / m;
            re += c as f64 * theta.cos();
            im += c as f64 * theta.sin();
        }
        (re, im)
    }

    /// |value| in double precision; error is below M * max|counts| * 2^-50.
    pub fn magnitude(&self) -> f64 {
        let (re, im) = self.complex_value();
        re.hypot(im)
    }

    /// Index-reversed accumulator, representing the complex conjugate.
    pub fn conjugate(&self) -> CyclotomicSum {
        let m = self.m as usize;
        let mut counts = vec![0i64; m];
        for (j, &c) in self.counts.iter().enumerate() {
            counts[(m - j) % m] += c;
        }
        CyclotomicSum {
            m: self.m,
            counts,
            zero_terms: self.zero_terms,
        }
    }

    /// Product of represented values via count convolution. Zero-term
    /// bookkeeping does not participate in products.
    pub fn convolve(&self, other: &CyclotomicSum) -> Result<CyclotomicSum> {
        if self.m != other.m {
            return Err(Error::OrderMismatch(self.m, other.m));
        }
        let m = self.m as usize;
        let mut counts = vec![0i64; m];
        for (i, &a) in self.counts.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.counts.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                counts[(i + j) % m] += a * b;
            }
        }
        Ok(CyclotomicSum {
            m: self.m,
            counts,
            zero_terms: 0,
        })
    }

    /// |z|^2 = z * conj(z) as an exact cyclotomic integer.
    pub fn norm_squared(&self) -> CyclotomicSum {
        self.convolve(&self.conjugate()).expect("orders match")
    }

    /// Counts reduced modulo the M-th cyclotomic polynomial: the canonical
    /// representation of the value in Z[zeta_M]. Two accumulators represent
    /// the same complex number iff their residues agree.
    pub fn residue(&self) -> Vec<i64> {
        let phi = cyclotomic_poly(self.m);
        let deg = phi.len() - 1;
        let mut rem: Vec<i64> = self.counts.iter().map(|&c| c).collect();
        // long division by the monic integer polynomial phi
        while rem.len() > deg {
            let lead = *rem.last().unwrap();
            let shift = rem.len() - 1 - deg;
            if lead != 0 {
                for (i, &c) in phi.iter().enumerate() {
                    rem[shift + i] -= lead * c;
                }
            }
            rem.pop();
        }
        rem.truncate(deg);
        rem.resize(deg, 0);
        rem
    }

    /// Exact test: does the accumulator represent the complex number 0?
    pub fn value_is_zero(&self) -> bool {
        self.residue().iter().all(|&c| c == 0)
    }

    /// Exact equality of represented values.
    pub fn value_eq(&self, other: &CyclotomicSum) -> Result<bool> {
        if self.m != other.m {
            return Err(Error::OrderMismatch(self.m, other.m));
        }
        Ok(self.residue() == other.residue())
    }
}

/// The M-th cyclotomic polynomial with integer coefficients, ascending.
pub fn cyclotomic_poly(m: u64) -> Vec<i64> {
    // (X^m - 1) divided by prod of Phi_d over proper divisors d of m
    fn divide(num: &mut Vec<i64>, den: &[i64]) {
        let mut quo = vec![0i64; num.len() - den.len() + 1];
        for i in (0..quo.len()).rev() {
            let lead = num[i + den.len() - 1];
            if lead == 0 {
                continue;
            }
            debug_assert_eq!(lead % den.last().unwrap(), 0);
            let c = lead / den.last().unwrap();
            quo[i] = c;
            for (j, &d) in den.iter().enumerate() {
                num[i + j] -= c * d;
            }
        }
        debug_assert!(num.iter().all(|&c| c == 0));
        *num = quo;
    }
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in 1..m {
        if m % d == 0 {
            let phi_d = cyclotomic_poly(d);
            divide(&mut num, &phi_d);
        }
    }
    num
}

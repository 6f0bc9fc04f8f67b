//! Factorization into irreducibles over F_{q^r}: squarefree decomposition
//! (with p-th root extraction in characteristic p), distinct-degree splitting,
//! then equal-degree splitting with a deterministically seeded candidate
//! sequence so results are reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::poly::{Polynomial, RationalFunction};
use crate::ring;

const EDF_SEED: u64 = 0x5eed_cafe_f0f0_0001;

/// A rational function as unit * product of monic irreducibles with nonzero
/// integer exponents (negative exponents are pole factors).
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredRational {
    pub unit: FieldElement,
    pub factors: Vec<(Polynomial, i64)>,
}

impl FactoredRational {
    /// Multiply the factorization back out.
    pub fn expand(&self, ctx: &FieldCtx) -> Result<RationalFunction> {
        let mut num = Polynomial::constant(ctx, self.unit.clone());
        let mut den = Polynomial::one(ctx);
        for (f, e) in &self.factors {
            let pow = f.pow(ctx, e.unsigned_abs() as u32);
            if *e > 0 {
                num = num.mul(ctx, &pow);
            } else {
                den = den.mul(ctx, &pow);
            }
        }
        RationalFunction::new(ctx, num, den)
    }
}

/// Certified irreducibility over F_{q^r} (Rabin's gcd criterion).
pub fn is_irreducible(ctx: &FieldCtx, f: &Polynomial) -> bool {
    ring::pis_irreducible(ctx, &f.0)
}

/// Factor a nonzero polynomial into unit * monic irreducibles, exponents > 0,
/// sorted deterministically. Every emitted factor is re-certified irreducible.
pub fn factor_poly(ctx: &FieldCtx, f: &Polynomial) -> Result<FactoredRational> {
    if f.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let unit = f.leading().cloned().unwrap();
    let monic = f.monic(ctx);
    let mut factors: Vec<(Polynomial, i64)> = Vec::new();
    for (g, mult) in squarefree_decomposition(ctx, &monic) {
        for (prod, d) in distinct_degree_split(ctx, &g) {
            for irr in equal_degree_split(ctx, &prod, d) {
                debug_assert!(irr.is_monic(ctx));
                assert!(
                    is_irreducible(ctx, &irr),
                    "factorization produced a reducible factor"
                );
                factors.push((irr, mult as i64));
            }
        }
    }
    factors.sort_by(|a, b| a.0.order_key(ctx).cmp(&b.0.order_key(ctx)));
    Ok(FactoredRational { unit, factors })
}

/// f = prod g_i^i with the g_i squarefree, monic and pairwise coprime.
fn squarefree_decomposition(ctx: &FieldCtx, f: &Polynomial) -> Vec<(Polynomial, u32)> {
    let mut out: Vec<(Polynomial, u32)> = Vec::new();
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    let p = ctx.p() as u32;
    let deriv = f.derivative(ctx);
    if deriv.is_zero() {
        let root = pth_root_poly(ctx, f);
        for (g, m) in squarefree_decomposition(ctx, &root) {
            out.push((g, m * p));
        }
        return out;
    }
    let mut c = f.gcd(ctx, &deriv);
    let mut w = f.divmod(ctx, &c).expect("gcd divides").0;
    let mut i = 1u32;
    while !w.is_one(ctx) {
        let y = w.gcd(ctx, &c);
        let z = w.divmod(ctx, &y).expect("gcd divides").0;
        if z.degree().unwrap_or(0) > 0 {
            out.push((z, i));
        }
        c = c.divmod(ctx, &y).expect("gcd divides").0;
        w = y;
        i += 1;
    }
    if c.degree().unwrap_or(0) > 0 {
        let root = pth_root_poly(ctx, &c);
        for (g, m) in squarefree_decomposition(ctx, &root) {
            out.push((g, m * p));
        }
    }
    out
}

/// For f(X) = g(X^p) with g's coefficients p-th powers, recover g.
fn pth_root_poly(ctx: &FieldCtx, f: &Polynomial) -> Polynomial {
    let p = ctx.p() as usize;
    let root_exp = ctx.order() / ctx.p() as u128; // inverse Frobenius exponent
    let deg = f.degree().unwrap();
    debug_assert_eq!(deg % p, 0);
    let mut coeffs = Vec::with_capacity(deg / p + 1);
    for j in 0..=deg / p {
        let c = f.coeff(ctx, j * p);
        coeffs.push(ctx.pow(&c, root_exp));
    }
    debug_assert!((0..=deg).all(|i| i % p == 0 || ctx.is_zero(&f.coeff(ctx, i))));
    Polynomial::from_coeffs(ctx, coeffs)
}

/// Split a monic squarefree polynomial into (product of irreducibles of
/// degree d, d) pairs.
fn distinct_degree_split(ctx: &FieldCtx, f: &Polynomial) -> Vec<(Polynomial, usize)> {
    let mut out = Vec::new();
    let mut rem = f.clone();
    let x = Polynomial::x(ctx);
    let mut h = x.clone();
    let mut d = 0usize;
    while rem.degree().unwrap_or(0) > 0 {
        d += 1;
        if rem.degree().unwrap() < 2 * d {
            out.push((rem.clone(), rem.degree().unwrap()));
            break;
        }
        h = Polynomial(ring::ppowmod(ctx, &h.0, ctx.order(), &rem.0));
        let g = h.sub(ctx, &x).gcd(ctx, &rem);
        if g.degree().unwrap_or(0) > 0 {
            out.push((g.clone(), d));
            rem = rem.divmod(ctx, &g).expect("gcd divides").0;
            h = Polynomial(ring::pdivmod(ctx, &h.0, &rem.0).1);
        }
    }
    out
}

/// Cantor-Zassenhaus equal-degree splitting: every irreducible factor of f
/// has degree d.
fn equal_degree_split(ctx: &FieldCtx, f: &Polynomial, d: usize) -> Vec<Polynomial> {
    let mut rng = ChaCha8Rng::seed_from_u64(EDF_SEED);
    let mut out = Vec::new();
    let mut stack = vec![f.monic(ctx)];
    let mut attempts = 0usize;
    while let Some(g) = stack.pop() {
        let deg = g.degree().unwrap();
        if deg == d {
            out.push(g);
            continue;
        }
        loop {
            attempts += 1;
            assert!(attempts < 10_000, "equal-degree splitting failed to converge");
            let a = random_poly(ctx, &mut rng, deg);
            let b = if ctx.p() == 2 {
                trace_map(ctx, &a, &g, d)
            } else {
                half_order_power(ctx, &a, &g, d)
            };
            let one = Polynomial::one(ctx);
            let split = b.sub(ctx, &one).gcd(ctx, &g);
            let dg = split.degree().unwrap_or(0);
            if dg > 0 && dg < deg {
                let co = g.divmod(ctx, &split).expect("gcd divides").0;
                stack.push(split);
                stack.push(co);
                break;
            }
        }
    }
    out.sort_by(|a, b| a.order_key(ctx).cmp(&b.order_key(ctx)));
    out
}

fn random_poly(ctx: &FieldCtx, rng: &mut ChaCha8Rng, deg_lt: usize) -> Polynomial {
    let order = ctx.order();
    let coeffs = (0..deg_lt)
        .map(|_| ctx.from_code(rng.gen_range(0..order)))
        .collect();
    Polynomial::from_coeffs(ctx, coeffs)
}

/// a^((Q^d - 1)/2) mod g in odd characteristic, via the factorization
/// (Q^d - 1)/2 = (1 + Q + ... + Q^{d-1}) * (Q - 1)/2, so that no exponent
/// ever exceeds Q.
fn half_order_power(ctx: &FieldCtx, a: &Polynomial, g: &Polynomial, d: usize) -> Polynomial {
    let q = ctx.order();
    let mut norm = Polynomial(ring::pdivmod(ctx, &a.0, &g.0).1);
    for _ in 1..d {
        let pw = ring::ppowmod(ctx, &norm.0, q, &g.0);
        norm = Polynomial(ring::pmulmod(ctx, &pw, &a.0, &g.0));
    }
    Polynomial(ring::ppowmod(ctx, &norm.0, (q - 1) / 2, &g.0))
}

/// Characteristic-2 splitting: the absolute trace a + a^2 + a^4 + ... over
/// F_{Q^d} viewed over F_2.
fn trace_map(ctx: &FieldCtx, a: &Polynomial, g: &Polynomial, d: usize) -> Polynomial {
    let bits = (ctx.k() * ctx.r() * d) as u32;
    let mut acc = Polynomial(ring::pdivmod(ctx, &a.0, &g.0).1);
    let mut x = acc.clone();
    for _ in 1..bits {
        x = Polynomial(ring::pmulmod(ctx, &x.0, &x.0, &g.0));
        acc = acc.add(ctx, &x);
    }
    Polynomial(ring::pdivmod(ctx, &acc.0, &g.0).1)
}

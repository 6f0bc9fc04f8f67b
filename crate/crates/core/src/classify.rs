//! Membership in the function classes driving the bounds: Q_{d,n} (not an
//! n-th power over the closure), R_d (a finite pole of order not divisible
//! by p), the exceptional Artin-Schreier shapes E, and P_d (every additive
//! shift-difference avoids E).
//!
//! Pole/zero orders are read off the factorization into irreducibles over
//! F_{q^r}: Frobenius-conjugate closure roots share multiplicity, so all the
//! divisibility tests are decidable without splitting fields. E-membership
//! is certified one-sidedly by a pole witness, plus a bounded complete
//! linear solver for polynomial candidates over a configurable extension.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::poly::{Polynomial, RationalFunction};
use crate::ring;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Member,
    NonMember,
    /// Sound "don't know": the bounded search found nothing either way.
    Uncertified,
}

/// A checkable witness accompanying a verdict.
#[derive(Clone, Debug)]
pub enum Witness {
    /// An irreducible factor together with its order in the factorization.
    FactorOrder { factor: Polynomial, order: i64 },
    /// f = alpha (h^p - h) + beta X over the extension L = F_{q^{r m}}.
    ArtinSchreier(ArtinSchreierWitness),
    /// The shift making f_omega exceptional (certify_p counterexample).
    ShiftInE {
        omega: FieldElement,
        inner: Box<ArtinSchreierWitness>,
    },
}

/// Elements of L are polynomials in the extension generator over F_{q^r},
/// ascending, trimmed.
pub type ExtEl = Vec<FieldElement>;

#[derive(Clone, Debug)]
pub struct ArtinSchreierWitness {
    pub ext_degree: usize,
    /// Monic irreducible modulus of L over F_{q^r} (ascending coefficients).
    pub ext_modulus: Vec<FieldElement>,
    pub alpha: ExtEl,
    pub beta: ExtEl,
    /// Coefficients of h in L[X], ascending.
    pub h: Vec<ExtEl>,
}

#[derive(Clone, Debug)]
pub struct ClassVerdict {
    pub verdict: VerdictKind,
    pub witness: Option<Witness>,
}

impl ClassVerdict {
    fn member(witness: Option<Witness>) -> Self {
        ClassVerdict {
            verdict: VerdictKind::Member,
            witness,
        }
    }
    fn non_member(witness: Option<Witness>) -> Self {
        ClassVerdict {
            verdict: VerdictKind::NonMember,
            witness,
        }
    }
    fn uncertified() -> Self {
        ClassVerdict {
            verdict: VerdictKind::Uncertified,
            witness: None,
        }
    }
    pub fn is_member(&self) -> bool {
        self.verdict == VerdictKind::Member
    }
}

/// True iff f is an n-th power of a rational function over the algebraic
/// closure: every factor exponent is divisible by n (constants are always
/// n-th powers over the closure, so the unit is ignored).
pub fn is_nth_power_closure(ctx: &FieldCtx, f: &RationalFunction, n: u32) -> Result<bool> {
    if n < 2 {
        return Err(Error::InvalidArgument("n must be at least 2".into()));
    }
    if f.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let fac = f.factor(ctx)?;
    Ok(fac.factors.iter().all(|(_, e)| e.rem_euclid(n as i64) == 0))
}

/// Membership in Q_{d,n}: degree at most d, nonzero, not an n-th power over
/// the closure. The witness is a factor with exponent not divisible by n.
pub fn in_q(ctx: &FieldCtx, f: &RationalFunction, d: usize, n: u32) -> Result<ClassVerdict> {
    if n < 2 {
        return Err(Error::InvalidArgument("n must be at least 2".into()));
    }
    if f.is_zero() || f.degree() > d {
        return Ok(ClassVerdict::non_member(None));
    }
    let fac = f.factor(ctx)?;
    match fac
        .factors
        .iter()
        .find(|(_, e)| e.rem_euclid(n as i64) != 0)
    {
        Some((p, e)) => Ok(ClassVerdict::member(Some(Witness::FactorOrder {
            factor: p.clone(),
            order: *e,
        }))),
        None => Ok(ClassVerdict::non_member(None)),
    }
}

/// Membership in R_d: degree at most d and at least one FINITE pole of order
/// not divisible by p. The pole at infinity is deliberately not counted: with
/// it, a degree-d polynomial with p not dividing d would be in R_d, yet the
/// shifted linear combinations cancel their leading terms and the descent
/// argument fails.
pub fn in_r(ctx: &FieldCtx, f: &RationalFunction, d: usize) -> Result<ClassVerdict> {
    if f.is_zero() || f.degree() > d {
        return Ok(ClassVerdict::non_member(None));
    }
    let p = ctx.p() as i64;
    let fac = f.factor(ctx)?;
    match fac
        .factors
        .iter()
        .find(|(_, e)| *e < 0 && e.rem_euclid(p) != 0)
    {
        Some((g, e)) => Ok(ClassVerdict::member(Some(Witness::FactorOrder {
            factor: g.clone(),
            order: *e,
        }))),
        None => Ok(ClassVerdict::non_member(None)),
    }
}

/// One-sided certificate that f is NOT exceptional: every member of E has
/// only p-divisible finite pole orders, so a finite pole of order not
/// divisible by p excludes membership. Returns `non_member` (of E) with the
/// pole witness, or `uncertified`.
pub fn not_in_e_witness(ctx: &FieldCtx, f: &RationalFunction) -> Result<ClassVerdict> {
    if f.is_zero() {
        return Ok(ClassVerdict::uncertified());
    }
    let p = ctx.p() as i64;
    let fac = f.factor(ctx)?;
    match fac
        .factors
        .iter()
        .find(|(_, e)| *e < 0 && e.rem_euclid(p) != 0)
    {
        Some((g, e)) => Ok(ClassVerdict::non_member(Some(Witness::FactorOrder {
            factor: g.clone(),
            order: *e,
        }))),
        None => Ok(ClassVerdict::uncertified()),
    }
}

/// Extension L = F_{q^r}[z]/(mu) of degree m over the big field, with the
/// canonical smallest-encoding modulus. Elements are trimmed coefficient
/// vectors over F_{q^r}.
pub(crate) struct ExtField<'a> {
    pub ctx: &'a FieldCtx,
    pub degree: usize,
    pub modulus: Vec<FieldElement>,
}

impl<'a> ExtField<'a> {
    pub fn new(ctx: &'a FieldCtx, degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidArgument("extension degree must be >= 1".into()));
        }
        let modulus = canonical_ext_modulus(ctx, degree);
        Ok(ExtField {
            ctx,
            degree,
            modulus,
        })
    }

    pub fn zero(&self) -> ExtEl {
        Vec::new()
    }

    pub fn is_zero(&self, a: &ExtEl) -> bool {
        a.is_empty()
    }

    pub fn from_k(&self, c: FieldElement) -> ExtEl {
        if self.ctx.is_zero(&c) {
            Vec::new()
        } else {
            vec![c]
        }
    }

    pub fn add(&self, a: &ExtEl, b: &ExtEl) -> ExtEl {
        ring::padd(self.ctx, a, b)
    }

    pub fn sub(&self, a: &ExtEl, b: &ExtEl) -> ExtEl {
        ring::psub(self.ctx, a, b)
    }

    pub fn mul(&self, a: &ExtEl, b: &ExtEl) -> ExtEl {
        ring::pmulmod(self.ctx, a, b, &self.modulus)
    }

    pub fn inv(&self, a: &ExtEl) -> Result<ExtEl> {
        if self.is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        // a^(|L| - 2) with |L| = (q^r)^m
        let order = self
            .ctx
            .order()
            .checked_pow(self.degree as u32)
            .ok_or_else(|| Error::FieldTooLarge("extension too large".into()))?;
        Ok(self.pow(a, order - 2))
    }

    pub fn pow(&self, a: &ExtEl, mut e: u128) -> ExtEl {
        let mut base = a.clone();
        let mut acc = vec![self.ctx.one()];
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// F_p-dimension of L.
    pub fn dim_fp(&self) -> usize {
        self.degree * self.ctx.r() * self.ctx.k()
    }

    /// Flatten to F_p coordinates (length dim_fp).
    pub fn flatten(&self, a: &ExtEl) -> Vec<u64> {
        let per = self.ctx.r() * self.ctx.k();
        let mut out = vec![0u64; self.dim_fp()];
        for (i, c) in a.iter().enumerate() {
            out[i * per..(i + 1) * per].copy_from_slice(c.limbs());
        }
        out
    }

    pub fn unflatten(&self, v: &[u64]) -> ExtEl {
        let per = self.ctx.r() * self.ctx.k();
        let out = (0..self.degree)
            .map(|i| element_from_limbs(self.ctx, &v[i * per..(i + 1) * per]))
            .collect();
        ring::ptrim(self.ctx, out)
    }
}

fn element_from_limbs(ctx: &FieldCtx, limbs: &[u64]) -> FieldElement {
    let mut code: u128 = 0;
    let k = ctx.k();
    for i in (0..ctx.r()).rev() {
        let mut chunk_code: u128 = 0;
        for j in (0..k).rev() {
            chunk_code = chunk_code * ctx.p() as u128 + limbs[i * k + j] as u128;
        }
        code = code * ctx.q() + chunk_code;
    }
    ctx.from_code(code)
}

fn canonical_ext_modulus(ctx: &FieldCtx, m: usize) -> Vec<FieldElement> {
    let mut enc: u128 = 0;
    loop {
        let mut coeffs: Vec<FieldElement> = Vec::with_capacity(m + 1);
        let mut e = enc;
        for _ in 0..m {
            coeffs.push(ctx.from_code(e % ctx.order()));
            e /= ctx.order();
        }
        coeffs.push(ctx.one());
        let trimmed = ring::ptrim(ctx, coeffs.clone());
        if ring::pis_irreducible(ctx, &trimmed) {
            return coeffs;
        }
        enc += 1;
    }
}

/// Options for the Artin-Schreier search.
#[derive(Clone, Copy, Debug)]
pub struct ArtinSchreierOpts {
    /// Largest degree tried for the polynomial h.
    pub deg_h_max: usize,
    /// Degree m of the search extension F_{q^{r m}} over F_{q^r}.
    pub ext_degree: usize,
}

impl Default for ArtinSchreierOpts {
    fn default() -> Self {
        ArtinSchreierOpts {
            deg_h_max: 3,
            ext_degree: 2,
        }
    }
}

/// Decide whether the POLYNOMIAL f equals alpha (h^p - h) + beta X for some
/// alpha, beta in L = F_{q^{r m}} and polynomial h in L[X] with
/// deg h <= deg_h_max. Membership comes with a re-checked witness;
/// `uncertified` is not a proof of non-membership over the closure.
pub fn solve_artin_schreier(
    ctx: &FieldCtx,
    f: &RationalFunction,
    opts: ArtinSchreierOpts,
) -> Result<ClassVerdict> {
    if !f.is_polynomial(ctx) {
        return Err(Error::InvalidArgument(
            "artin-schreier search requires a polynomial (rational h is out of scope)".into(),
        ));
    }
    let ext = ExtField::new(ctx, opts.ext_degree)?;
    let fpoly = f.num().clone();

    // alpha = 0 route: f must be exactly beta X
    let only_slot1 = fpoly
        .coeffs()
        .iter()
        .enumerate()
        .all(|(i, c)| i == 1 || ctx.is_zero(c));
    if only_slot1 {
        let beta = ext.from_k(fpoly.coeff(ctx, 1));
        let w = ArtinSchreierWitness {
            ext_degree: ext.degree,
            ext_modulus: ext.modulus.clone(),
            alpha: ext.zero(),
            beta,
            h: Vec::new(),
        };
        return Ok(ClassVerdict::member(Some(Witness::ArtinSchreier(w))));
    }

    // Joint linear system over F_p: S(h) - c f = 0 on every coefficient slot
    // except slot 1, where S(h) = h^p - h. A solution with c != 0 gives
    // alpha = c^{-1} and beta as the slot-1 residual of f - alpha S(h).
    let p = ctx.p() as usize;
    let dim = ext.dim_fp();
    let h_unknowns = (opts.deg_h_max + 1) * dim;
    let unknowns = h_unknowns + dim;
    let max_deg = (p * opts.deg_h_max).max(fpoly.degree().unwrap_or(0));
    let slots: Vec<usize> = (0..=max_deg).filter(|&s| s != 1).collect();
    let rows = slots.len() * dim;

    // columns of the matrix, one per F_p unknown
    let mut cols: Vec<Vec<u64>> = Vec::with_capacity(unknowns);
    for j in 0..h_unknowns {
        let coeff_idx = j / dim;
        let mut flat = vec![0u64; dim];
        flat[j % dim] = 1;
        let hc = ext.unflatten(&flat);
        // S contribution of a single coefficient: (hc^p) X^{p i} - hc X^i
        let hp = ext.pow(&hc, p as u128);
        let mut col = vec![0u64; rows];
        scatter(&ext, &mut col, &slots, coeff_idx * p, &hp, false);
        scatter(&ext, &mut col, &slots, coeff_idx, &hc, true);
        cols.push(col);
    }
    for j in 0..dim {
        let mut flat = vec![0u64; dim];
        flat[j] = 1;
        let c = ext.unflatten(&flat);
        let mut col = vec![0u64; rows];
        for (i, fc) in fpoly.coeffs().iter().enumerate() {
            let prod = ext.mul(&c, &ext.from_k(fc.clone()));
            scatter_one(&ext, &mut col, &slots, i, &prod, true);
        }
        cols.push(col);
    }

    let kernel = gauss_kernel(ctx.p(), &cols, rows);
    let Some(sol) = kernel.iter().find(|v| v[h_unknowns..].iter().any(|&x| x != 0)) else {
        return Ok(ClassVerdict::uncertified());
    };

    // reconstruct the witness
    let c = ext.unflatten(&sol[h_unknowns..]);
    let alpha = ext.inv(&c)?;
    let mut h: Vec<ExtEl> = Vec::with_capacity(opts.deg_h_max + 1);
    for i in 0..=opts.deg_h_max {
        h.push(ext.unflatten(&sol[i * dim..(i + 1) * dim]));
    }
    while h.last().map_or(false, |c| ext.is_zero(c)) {
        h.pop();
    }
    // beta = slot-1 coefficient of f - alpha (h^p - h)
    let s_of_h = apply_s(&ext, &h, p);
    let slot1_s = s_of_h.get(1).cloned().unwrap_or_else(|| ext.zero());
    let slot1_f = ext.from_k(fpoly.coeff(ctx, 1));
    let beta = ext.sub(&slot1_f, &ext.mul(&alpha, &slot1_s));
    let witness = ArtinSchreierWitness {
        ext_degree: ext.degree,
        ext_modulus: ext.modulus.clone(),
        alpha,
        beta,
        h,
    };
    debug_assert!(verify_artin_schreier(ctx, &fpoly, &witness));
    Ok(ClassVerdict::member(Some(Witness::ArtinSchreier(witness))))
}

/// Recompute alpha (h^p - h) + beta X over L and compare with f.
pub fn verify_artin_schreier(
    ctx: &FieldCtx,
    f: &Polynomial,
    w: &ArtinSchreierWitness,
) -> bool {
    let ext = ExtField {
        ctx,
        degree: w.ext_degree,
        modulus: w.ext_modulus.clone(),
    };
    let p = ctx.p() as usize;
    let mut val = apply_s(&ext, &w.h, p)
        .into_iter()
        .map(|c| ext.mul(&w.alpha, &c))
        .collect::<Vec<_>>();
    if val.len() < 2 {
        val.resize(2, ext.zero());
    }
    val[1] = ext.add(&val[1], &w.beta);
    while val.last().map_or(false, |c| ext.is_zero(c)) {
        val.pop();
    }
    let fe: Vec<ExtEl> = f.coeffs().iter().map(|c| ext.from_k(c.clone())).collect();
    let mut fe = fe;
    while fe.last().map_or(false, |c| ext.is_zero(c)) {
        fe.pop();
    }
    val == fe
}

/// S(h) = h^p - h coefficientwise: (sum c_i X^i)^p = sum c_i^p X^{p i}.
fn apply_s(ext: &ExtField, h: &[ExtEl], p: usize) -> Vec<ExtEl> {
    let deg = h.len().saturating_sub(1);
    let mut out = vec![ext.zero(); deg * p + 1 + 1];
    for (i, c) in h.iter().enumerate() {
        let cp = ext.pow(c, p as u128);
        out[i * p] = ext.add(&out[i * p], &cp);
        out[i] = ext.sub(&out[i], c);
    }
    while out.last().map_or(false, |c| ext.is_zero(c)) {
        out.pop();
    }
    out
}

fn scatter(ext: &ExtField, col: &mut [u64], slots: &[usize], slot: usize, v: &ExtEl, negate: bool) {
    scatter_one(ext, col, slots, slot, v, negate);
}

fn scatter_one(
    ext: &ExtField,
    col: &mut [u64],
    slots: &[usize],
    slot: usize,
    v: &ExtEl,
    negate: bool,
) {
    let Some(pos) = slots.iter().position(|&s| s == slot) else {
        return; // slot 1 is unconstrained
    };
    let p = ext.ctx.p();
    let dim = ext.dim_fp();
    let flat = ext.flatten(v);
    for (i, &x) in flat.iter().enumerate() {
        let val = if negate { (p - x % p) % p } else { x % p };
        col[pos * dim + i] = (col[pos * dim + i] + val) % p;
    }
}

/// Kernel basis of the column matrix over F_p (columns indexed by unknowns).
fn gauss_kernel(p: u64, cols: &[Vec<u64>], rows: usize) -> Vec<Vec<u64>> {
    let n = cols.len();
    // row-major working copy
    let mut m: Vec<Vec<u64>> = (0..rows)
        .map(|r| cols.iter().map(|c| c[r]).collect())
        .collect();
    let mut pivot_col_of_row: Vec<usize> = Vec::new();
    let mut row = 0usize;
    for col in 0..n {
        let Some(pr) = (row..rows).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(row, pr);
        let inv = crate::arith::pow_mod(m[row][col], p - 2, p);
        for x in m[row].iter_mut() {
            *x = *x * inv % p;
        }
        for r in 0..rows {
            if r != row && m[r][col] != 0 {
                let f = m[r][col];
                let pivot_row = m[row].clone();
                for (x, &pv) in m[r].iter_mut().zip(&pivot_row) {
                    *x = (*x + (p - f) * pv) % p;
                }
            }
        }
        pivot_col_of_row.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }
    let pivot_set: std::collections::HashSet<usize> = pivot_col_of_row.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..n {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![0u64; n];
        v[free] = 1;
        for (r, &pc) in pivot_col_of_row.iter().enumerate() {
            // pivot value = -coefficient of the free column in that row
            v[pc] = (p - m[r][free] % p) % p;
        }
        basis.push(v);
    }
    basis
}

/// Per-shift outcome inside a P_d certification run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftStatus {
    /// f_omega has a pole witness excluding it from E.
    CertifiedNotE,
    /// f_omega was proven exceptional: f is not in P_d.
    InE,
    /// Neither route certified anything.
    Uncertified,
}

#[derive(Clone, Debug)]
pub struct ShiftRow {
    pub omega: FieldElement,
    pub status: ShiftStatus,
}

#[derive(Clone, Debug)]
pub struct CertifyPReport {
    pub verdict: VerdictKind,
    pub rows: Vec<ShiftRow>,
    pub uncertified: Vec<FieldElement>,
    pub witness: Option<Witness>,
    /// True when only a sample of shifts was inspected; a sampled run never
    /// certifies membership.
    pub sampled: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct CertifyPOpts {
    pub artin_schreier: ArtinSchreierOpts,
    /// When set, inspect only this many seeded-random shifts (non-certifying).
    pub sample: Option<(usize, u64)>,
}

impl Default for CertifyPOpts {
    fn default() -> Self {
        CertifyPOpts {
            artin_schreier: ArtinSchreierOpts::default(),
            sample: None,
        }
    }
}

/// Certify membership in P_d: for EVERY omega in F_{q^r}^*, the difference
/// f(X + omega) - f(X) must avoid E. Member requires every shift certified
/// by a pole witness; a single exceptional shift refutes membership.
pub fn certify_p(
    ctx: &FieldCtx,
    f: &RationalFunction,
    d: usize,
    opts: CertifyPOpts,
) -> Result<CertifyPReport> {
    if f.degree() > d {
        return Err(Error::InvalidArgument(format!(
            "degree {} exceeds class degree {d}",
            f.degree()
        )));
    }
    if f.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let omegas: Vec<FieldElement> = match opts.sample {
        None => (1..ctx.order()).map(|c| ctx.from_code(c)).collect(),
        Some((count, seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| ctx.from_code(rng.gen_range(1..ctx.order())))
                .collect()
        }
    };
    let rows: Result<Vec<ShiftRow>> = omegas
        .par_iter()
        .map(|omega| {
            let shifted = f.shift(ctx, omega);
            let diff = shifted.sub(ctx, f)?;
            if diff.is_zero() {
                // zero difference is exceptional (alpha = beta = 0)
                return Ok(ShiftRow {
                    omega: omega.clone(),
                    status: ShiftStatus::InE,
                });
            }
            let by_pole = not_in_e_witness(ctx, &diff)?;
            if by_pole.verdict == VerdictKind::NonMember {
                return Ok(ShiftRow {
                    omega: omega.clone(),
                    status: ShiftStatus::CertifiedNotE,
                });
            }
            if diff.is_polynomial(ctx) {
                let as_verdict = solve_artin_schreier(ctx, &diff, opts.artin_schreier)?;
                if as_verdict.is_member() {
                    return Ok(ShiftRow {
                        omega: omega.clone(),
                        status: ShiftStatus::InE,
                    });
                }
            }
            Ok(ShiftRow {
                omega: omega.clone(),
                status: ShiftStatus::Uncertified,
            })
        })
        .collect();
    let rows = rows?;
    let uncertified: Vec<FieldElement> = rows
        .iter()
        .filter(|r| r.status == ShiftStatus::Uncertified)
        .map(|r| r.omega.clone())
        .collect();
    let bad = rows.iter().find(|r| r.status == ShiftStatus::InE);
    let verdict = if let Some(row) = bad {
        let _ = row;
        VerdictKind::NonMember
    } else if uncertified.is_empty() && opts.sample.is_none() {
        VerdictKind::Member
    } else {
        VerdictKind::Uncertified
    };
    let witness = bad.map(|row| {
        let shifted = f.shift(ctx, &row.omega);
        let diff = shifted.sub(ctx, f).expect("already computed");
        let inner = if diff.is_zero() || !diff.is_polynomial(ctx) {
            ArtinSchreierWitness {
                ext_degree: 1,
                ext_modulus: vec![ctx.zero(), ctx.one()],
                alpha: Vec::new(),
                beta: Vec::new(),
                h: Vec::new(),
            }
        } else {
            match solve_artin_schreier(ctx, &diff, opts.artin_schreier) {
                Ok(v) => match v.witness {
                    Some(Witness::ArtinSchreier(w)) => w,
                    _ => unreachable!("member verdict carries a witness"),
                },
                Err(_) => unreachable!("already solved once"),
            }
        };
        Witness::ShiftInE {
            omega: row.omega.clone(),
            inner: Box::new(inner),
        }
    });
    Ok(CertifyPReport {
        verdict,
        rows,
        uncertified,
        witness,
        sampled: opts.sample.is_some(),
    })
}

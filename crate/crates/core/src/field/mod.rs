//! Exact arithmetic in the tower F_p < F_q = F_{p^k} < F_{q^r}.
//!
//! A [`FieldCtx`] fixes the two moduli, a basis of F_{q^r} over F_q, a
//! multiplicative generator and (for small fields) a full discrete-log
//! table. Elements are plain coefficient vectors tagged with the context
//! fingerprint; all operations live on the context and are pure.

mod fq;

pub(crate) use fq::FqCtx;
pub use fq::FqEl;

use std::sync::OnceLock;

use crate::arith::{factorize, is_prime, Fnv};
use crate::error::{Error, Result};
use crate::ring::{self, CoeffField};

/// Default cap on the discrete-log table: fields up to 2^24 elements get a
/// full table, larger ones fall back to baby-step giant-step.
pub const DEFAULT_TABLE_CAP: u128 = 1 << 24;

const DLOG_NONE: u32 = u32::MAX;

/// An element of F_{q^r}: r coefficients in F_q over the power basis of the
/// residue t, stored flat (k limbs per coefficient, ascending).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    pub(crate) fp: u64,
    pub(crate) c: Vec<u64>,
}

impl FieldElement {
    /// Flat F_p limbs, k per F_q coefficient, ascending powers of t.
    pub fn limbs(&self) -> &[u64] {
        &self.c
    }
}

/// Immutable description of the tower; shareable across threads.
#[derive(Debug)]
pub struct FieldCtx {
    p: u64,
    k: usize,
    r: usize,
    q: u128,
    qr: u128,
    fq: FqCtx,
    /// Monic irreducible of degree r over F_q, ascending, length r+1.
    modulus_qr: Vec<FqEl>,
    /// k = 1 only: the outer modulus lower coefficients as plain residues,
    /// for the allocation-free multiplication fast path.
    mod_flat: Vec<u64>,
    fingerprint: u64,
    basis: Vec<FieldElement>,
    /// Inverse of the basis coordinate matrix over F_q; None for the power basis.
    basis_inv: Option<Vec<Vec<FqEl>>>,
    generator: FieldElement,
    mult_order: u128,
    mult_order_factors: Vec<(u64, u32)>,
    table_cap: u128,
    dlog_table: Option<Vec<u32>>,
    bsgs: OnceLock<BsgsTable>,
    /// F_p-linear functional computing Tr_{F_{q^r}/F_p} on flat limbs.
    tr_fp: Vec<u64>,
    /// Tr_{F_{q^r}/F_q}(t^i) for i < r.
    tr_fq: Vec<FqEl>,
}

#[derive(Debug)]
struct BsgsTable {
    m: u64,
    baby: std::collections::HashMap<u128, u64>,
    giant_step: FieldElement,
}

/// Options for [`FieldCtx::build`]; all fields optional.
pub struct FieldBuilder {
    p: u64,
    k: usize,
    r: usize,
    modulus_q: Option<Vec<u64>>,
    /// Coefficients of the outer modulus as F_q codes, ascending, length r+1.
    modulus_qr: Option<Vec<u128>>,
    table_cap: u128,
}

impl FieldBuilder {
    pub fn modulus_q(mut self, coeffs: Vec<u64>) -> Self {
        self.modulus_q = Some(coeffs);
        self
    }
    pub fn modulus_qr_codes(mut self, codes: Vec<u128>) -> Self {
        self.modulus_qr = Some(codes);
        self
    }
    pub fn table_cap(mut self, cap: u128) -> Self {
        self.table_cap = cap;
        self
    }

    pub fn build(self) -> Result<FieldCtx> {
        FieldCtx::build_inner(self)
    }
}

impl FieldCtx {
    /// Build the canonical tower for (p, k, r): smallest-encoding moduli,
    /// power basis, first generator by element code.
    pub fn build(p: u64, k: usize, r: usize) -> Result<FieldCtx> {
        Self::builder(p, k, r).build()
    }

    pub fn builder(p: u64, k: usize, r: usize) -> FieldBuilder {
        FieldBuilder {
            p,
            k,
            r,
            modulus_q: None,
            modulus_qr: None,
            table_cap: DEFAULT_TABLE_CAP,
        }
    }

    fn build_inner(b: FieldBuilder) -> Result<FieldCtx> {
        let FieldBuilder {
            p,
            k,
            r,
            modulus_q,
            modulus_qr,
            table_cap,
        } = b;
        if !is_prime(p) {
            return Err(Error::CompositeCharacteristic(p));
        }
        if p >= 1 << 31 {
            return Err(Error::FieldTooLarge("p must be below 2^31".into()));
        }
        if k == 0 || r == 0 {
            return Err(Error::InvalidArgument("k and r must be positive".into()));
        }
        let modulus_q = match modulus_q {
            Some(m) => m,
            None => FqCtx::canonical_modulus(p, k),
        };
        let fq = FqCtx::new(p, k, modulus_q)?;
        let q = fq.q;
        let qr = q
            .checked_pow(r as u32)
            .filter(|&n| n < 1 << 63)
            .ok_or_else(|| Error::FieldTooLarge("q^r must be below 2^63".into()))?;

        let modulus_qr: Vec<FqEl> = match modulus_qr {
            Some(codes) => {
                if codes.len() != r + 1 {
                    return Err(Error::BadModulus(format!(
                        "outer modulus must have degree {r}"
                    )));
                }
                if codes.iter().any(|&c| c >= q) {
                    return Err(Error::BadModulus("outer modulus coefficient out of range".into()));
                }
                if codes[r] != 1 {
                    return Err(Error::BadModulus("outer modulus must be monic".into()));
                }
                let m: Vec<FqEl> = codes.iter().map(|&c| fq.from_code(c)).collect();
                if !ring::pis_irreducible(&fq, &m) {
                    return Err(Error::BadModulus("outer modulus is reducible over F_q".into()));
                }
                m
            }
            None => canonical_modulus_qr(&fq, r),
        };

        let mut fnv = Fnv::new();
        fnv.write(p);
        fnv.write(k as u64);
        fnv.write(r as u64);
        for &c in &fq.modulus {
            fnv.write(c);
        }
        for c in &modulus_qr {
            fnv.write(fq.code(c) as u64);
        }
        let fingerprint = fnv.finish();

        let mod_flat = if k == 1 {
            modulus_qr[..r].iter().map(|c| c[0]).collect()
        } else {
            Vec::new()
        };
        let mut ctx = FieldCtx {
            p,
            k,
            r,
            q,
            qr,
            fq,
            modulus_qr,
            mod_flat,
            fingerprint,
            basis: Vec::new(),
            basis_inv: None,
            generator: FieldElement {
                fp: fingerprint,
                c: vec![0; r * k],
            },
            mult_order: qr - 1,
            mult_order_factors: factorize((qr - 1) as u64),
            table_cap,
            dlog_table: None,
            bsgs: OnceLock::new(),
            tr_fp: Vec::new(),
            tr_fq: Vec::new(),
        };

        // power basis 1, t, ..., t^{r-1}
        ctx.basis = (0..r).map(|i| ctx.monomial(i)).collect();

        ctx.tr_fp = ctx.compute_tr_fp();
        ctx.tr_fq = ctx.compute_tr_fq();
        ctx.generator = ctx.find_generator();
        if qr <= table_cap && qr <= DLOG_NONE as u128 {
            ctx.dlog_table = Some(ctx.build_dlog_table());
        }
        Ok(ctx)
    }

    /// Same field, different basis for the coordinate expansion. The basis
    /// must be F_q-linearly independent; elements remain interchangeable.
    pub fn with_basis(&self, basis: Vec<FieldElement>) -> Result<FieldCtx> {
        if basis.len() != self.r {
            return Err(Error::LengthMismatch {
                expected: self.r,
                got: basis.len(),
            });
        }
        for b in &basis {
            self.check(b)?;
        }
        let inv = self.invert_basis_matrix(&basis)?;
        let mut ctx = self.clone_shallow();
        let is_power = basis
            .iter()
            .enumerate()
            .all(|(i, b)| *b == self.monomial(i));
        ctx.basis = basis;
        ctx.basis_inv = if is_power { None } else { Some(inv) };
        Ok(ctx)
    }

    fn clone_shallow(&self) -> FieldCtx {
        FieldCtx {
            p: self.p,
            k: self.k,
            r: self.r,
            q: self.q,
            qr: self.qr,
            fq: FqCtx {
                p: self.fq.p,
                k: self.fq.k,
                q: self.fq.q,
                modulus: self.fq.modulus.clone(),
            },
            modulus_qr: self.modulus_qr.clone(),
            mod_flat: self.mod_flat.clone(),
            fingerprint: self.fingerprint,
            basis: self.basis.clone(),
            basis_inv: self.basis_inv.clone(),
            generator: self.generator.clone(),
            mult_order: self.mult_order,
            mult_order_factors: self.mult_order_factors.clone(),
            table_cap: self.table_cap,
            dlog_table: self.dlog_table.clone(),
            bsgs: OnceLock::new(),
            tr_fp: self.tr_fp.clone(),
            tr_fq: self.tr_fq.clone(),
        }
    }

    // ---- parameters ----

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn r(&self) -> usize {
        self.r
    }
    pub fn q(&self) -> u128 {
        self.q
    }
    /// Number of elements q^r.
    pub fn order(&self) -> u128 {
        self.qr
    }
    /// q^r - 1.
    pub fn mult_order(&self) -> u128 {
        self.mult_order
    }
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }
    pub fn modulus_q_coeffs(&self) -> &[u64] {
        &self.fq.modulus
    }
    pub fn modulus_qr_codes(&self) -> Vec<u128> {
        self.modulus_qr.iter().map(|c| self.fq.code(c)).collect()
    }
    pub fn basis(&self) -> &[FieldElement] {
        &self.basis
    }
    pub fn generator(&self) -> &FieldElement {
        &self.generator
    }
    pub fn has_dlog_table(&self) -> bool {
        self.dlog_table.is_some()
    }
    pub(crate) fn fq_ctx(&self) -> &FqCtx {
        &self.fq
    }

    pub fn check(&self, a: &FieldElement) -> Result<()> {
        if a.fp == self.fingerprint {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    fn check2(&self, a: &FieldElement, b: &FieldElement) -> Result<()> {
        self.check(a)?;
        self.check(b)
    }

    // ---- element constructors ----

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            fp: self.fingerprint,
            c: vec![0; self.r * self.k],
        }
    }

    pub fn one(&self) -> FieldElement {
        self.from_u64(1)
    }

    /// Constant from F_p.
    pub fn from_u64(&self, v: u64) -> FieldElement {
        let mut e = self.zero();
        e.c[0] = v % self.p;
        e
    }

    /// t^i for i < r.
    fn monomial(&self, i: usize) -> FieldElement {
        let mut e = self.zero();
        e.c[i * self.k] = 1;
        e
    }

    /// The residue t generating F_{q^r} over F_q. For r = 1 with the
    /// canonical modulus X this is 0.
    pub fn t_gen(&self) -> FieldElement {
        if self.r >= 2 {
            self.monomial(1)
        } else {
            let neg_c0 = self.fq.neg_el(&self.modulus_qr[0]);
            self.embed_fq(&neg_c0)
        }
    }

    /// The residue y generating F_q over F_p, embedded; errors when k = 1.
    pub fn y_gen(&self) -> Result<FieldElement> {
        if self.k < 2 {
            return Err(Error::InvalidArgument(
                "y is only defined when k > 1".into(),
            ));
        }
        let mut e = self.zero();
        e.c[1] = 1;
        Ok(e)
    }

    /// Embed an F_q element as a constant.
    pub fn embed_fq(&self, a: &FqEl) -> FieldElement {
        let mut e = self.zero();
        e.c[..self.k].copy_from_slice(a);
        e
    }

    pub fn is_zero(&self, a: &FieldElement) -> bool {
        a.c.iter().all(|&x| x == 0)
    }

    /// True when a lies in the embedded subfield F_q (fixed by x -> x^q).
    pub fn in_subfield_fq(&self, a: &FieldElement) -> bool {
        a.c[self.k..].iter().all(|&x| x == 0)
    }

    /// Integer code in [0, q^r): base-q digits of the power-basis coefficients.
    pub fn code(&self, a: &FieldElement) -> u128 {
        let mut c: u128 = 0;
        for i in (0..self.r).rev() {
            let mut chunk: u128 = 0;
            for j in (0..self.k).rev() {
                chunk = chunk * self.p as u128 + a.c[i * self.k + j] as u128;
            }
            c = c * self.q + chunk;
        }
        c
    }

    pub fn from_code(&self, mut code: u128) -> FieldElement {
        let mut e = self.zero();
        for i in 0..self.r {
            let digit = code % self.q;
            code /= self.q;
            let chunk = self.fq.from_code(digit);
            e.c[i * self.k..(i + 1) * self.k].copy_from_slice(&chunk);
        }
        e
    }

    /// All q elements of the embedded subfield F_q, in code order.
    pub fn subfield_fq_elements(&self) -> Vec<FieldElement> {
        self.fq
            .all_elements()
            .iter()
            .map(|a| self.embed_fq(a))
            .collect()
    }

    // ---- ring operations ----

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        debug_assert_eq!(a.fp, b.fp);
        FieldElement {
            fp: self.fingerprint,
            c: a.c.iter().zip(&b.c).map(|(x, y)| (x + y) % self.p).collect(),
        }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        debug_assert_eq!(a.fp, b.fp);
        FieldElement {
            fp: self.fingerprint,
            c: a.c
                .iter()
                .zip(&b.c)
                .map(|(x, y)| (x + self.p - y) % self.p)
                .collect(),
        }
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        FieldElement {
            fp: self.fingerprint,
            c: a.c.iter().map(|x| (self.p - x) % self.p).collect(),
        }
    }

    /// Add b into a in place; the incremental step of Gray-code enumeration.
    pub(crate) fn add_assign(&self, a: &mut FieldElement, b: &FieldElement) {
        for (x, y) in a.c.iter_mut().zip(&b.c) {
            *x = (*x + y) % self.p;
        }
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        debug_assert_eq!(a.fp, b.fp);
        if self.k == 1 && self.r <= 32 {
            return self.mul_flat(a, b);
        }
        let r = self.r;
        let k = self.k;
        // schoolbook product of the F_q coefficient vectors
        let mut prod: Vec<FqEl> = vec![self.fq.zero(); 2 * r - 1];
        for i in 0..r {
            let ai = &a.c[i * k..(i + 1) * k];
            if ai.iter().all(|&x| x == 0) {
                continue;
            }
            let ai = ai.to_vec();
            for j in 0..r {
                let bj = b.c[j * k..(j + 1) * k].to_vec();
                let t = self.fq.mul_el(&ai, &bj);
                prod[i + j] = self.fq.add_el(&prod[i + j], &t);
            }
        }
        // reduce by the monic outer modulus
        for i in (r..2 * r - 1).rev() {
            if self.fq.is_zero_el(&prod[i]) {
                continue;
            }
            let c = std::mem::replace(&mut prod[i], self.fq.zero());
            for j in 0..r {
                let t = self.fq.mul_el(&c, &self.modulus_qr[j]);
                prod[i - r + j] = self.fq.sub_el(&prod[i - r + j], &t);
            }
        }
        let mut e = self.zero();
        for i in 0..r {
            e.c[i * k..(i + 1) * k].copy_from_slice(&prod[i]);
        }
        e
    }

    /// Prime-subfield fast path: schoolbook product on stack buffers, one
    /// allocation for the result.
    fn mul_flat(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let r = self.r;
        let p = self.p;
        let mut prod = [0u64; 63];
        for i in 0..r {
            let ai = a.c[i];
            if ai == 0 {
                continue;
            }
            for j in 0..r {
                prod[i + j] = (prod[i + j] + ai * b.c[j]) % p;
            }
        }
        for i in (r..2 * r - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for (j, &m) in self.mod_flat.iter().enumerate() {
                let t = c * m % p;
                prod[i - r + j] = (prod[i - r + j] + p - t) % p;
            }
        }
        FieldElement {
            fp: self.fingerprint,
            c: prod[..r].to_vec(),
        }
    }

    /// Scale by an F_q constant.
    pub fn mul_fq(&self, a: &FieldElement, s: &FqEl) -> FieldElement {
        let k = self.k;
        let mut e = self.zero();
        for i in 0..self.r {
            let chunk = a.c[i * k..(i + 1) * k].to_vec();
            let t = self.fq.mul_el(&chunk, s);
            e.c[i * k..(i + 1) * k].copy_from_slice(&t);
        }
        e
    }

    /// Inverse via extended Euclid on representative polynomials over F_q.
    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        if self.is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        let rep = self.to_fq_poly(a);
        // maintain u*rep = x (mod modulus): on termination x is a nonzero constant
        let mut x = rep;
        let mut y = self.modulus_qr.clone();
        let mut u: Vec<FqEl> = vec![self.fq.one()];
        let mut v: Vec<FqEl> = Vec::new();
        while !y.is_empty() && ring::pdeg(&y) != Some(0) {
            let (quo, rem) = ring::pdivmod(&self.fq, &x, &y);
            let t = ring::psub(&self.fq, &u, &ring::pmul(&self.fq, &quo, &v));
            x = y;
            y = rem;
            u = v;
            v = t;
        }
        let (rep_inv, lead) = if y.is_empty() {
            // x is the gcd, must be a constant since the modulus is irreducible
            (u, x[0].clone())
        } else {
            (v, y[0].clone())
        };
        let scale = self.fq.inv_el(&lead)?;
        let scaled = ring::pscale(&self.fq, &rep_inv, &scale);
        let reduced = ring::pdivmod(&self.fq, &scaled, &self.modulus_qr).1;
        Ok(self.from_fq_poly(&reduced))
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.check2(a, b)?;
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &FieldElement, mut e: u128) -> FieldElement {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Integer powers; negative exponents require a nonzero base.
    pub fn pow_i(&self, a: &FieldElement, e: i128) -> Result<FieldElement> {
        if e >= 0 {
            Ok(self.pow(a, e as u128))
        } else {
            let inv = self.inv(a)?;
            Ok(self.pow(&inv, e.unsigned_abs()))
        }
    }

    /// a^(p^i) by repeated p-th powering.
    pub fn frobenius(&self, a: &FieldElement, i: usize) -> FieldElement {
        let mut x = a.clone();
        for _ in 0..i {
            x = self.pow(&x, self.p as u128);
        }
        x
    }

    // ---- trace and norm ----

    /// Tr_{F_{q^r}/F_p}(a) as a scalar in [0, p).
    pub fn trace_fp_scalar(&self, a: &FieldElement) -> u64 {
        let mut acc: u128 = 0;
        for (x, t) in a.c.iter().zip(&self.tr_fp) {
            acc += (*x as u128) * (*t as u128);
        }
        (acc % self.p as u128) as u64
    }

    /// Trace down to F_p, returned embedded.
    pub fn trace_to_fp(&self, a: &FieldElement) -> FieldElement {
        self.from_u64(self.trace_fp_scalar(a))
    }

    /// Tr_{F_{q^r}/F_q}(a) as an F_q element.
    pub fn trace_fq_scalar(&self, a: &FieldElement) -> FqEl {
        let k = self.k;
        let mut acc = self.fq.zero();
        for i in 0..self.r {
            let chunk = a.c[i * k..(i + 1) * k].to_vec();
            let t = self.fq.mul_el(&chunk, &self.tr_fq[i]);
            acc = self.fq.add_el(&acc, &t);
        }
        acc
    }

    /// Trace down to F_q, returned embedded.
    pub fn trace_to_fq(&self, a: &FieldElement) -> FieldElement {
        self.embed_fq(&self.trace_fq_scalar(a))
    }

    /// Norm to F_q: product of the r conjugates a^{q^i}, returned embedded.
    pub fn norm(&self, a: &FieldElement) -> FieldElement {
        let mut x = a.clone();
        let mut acc = a.clone();
        for _ in 1..self.r {
            x = self.frobenius(&x, self.k);
            acc = self.mul(&acc, &x);
        }
        debug_assert!(self.in_subfield_fq(&acc));
        acc
    }

    // ---- coordinates ----

    /// Coordinates of a with respect to the context basis.
    pub fn coords(&self, a: &FieldElement) -> Vec<FqEl> {
        let k = self.k;
        let chunks: Vec<FqEl> = (0..self.r)
            .map(|i| a.c[i * k..(i + 1) * k].to_vec())
            .collect();
        match &self.basis_inv {
            None => chunks,
            Some(inv) => (0..self.r)
                .map(|i| {
                    let mut acc = self.fq.zero();
                    for (j, ch) in chunks.iter().enumerate() {
                        let t = self.fq.mul_el(&inv[i][j], ch);
                        acc = self.fq.add_el(&acc, &t);
                    }
                    acc
                })
                .collect(),
        }
    }

    /// Inverse of [`FieldCtx::coords`]: sum of v_i * basis_i.
    pub fn from_coords(&self, v: &[FqEl]) -> Result<FieldElement> {
        if v.len() != self.r {
            return Err(Error::LengthMismatch {
                expected: self.r,
                got: v.len(),
            });
        }
        let mut acc = self.zero();
        for (vi, bi) in v.iter().zip(&self.basis) {
            let t = self.mul_fq(bi, vi);
            acc = self.add(&acc, &t);
        }
        Ok(acc)
    }

    fn invert_basis_matrix(&self, basis: &[FieldElement]) -> Result<Vec<Vec<FqEl>>> {
        let r = self.r;
        let k = self.k;
        // rows indexed by power-basis slot, columns by basis vectors
        let mut m: Vec<Vec<FqEl>> = (0..r)
            .map(|row| {
                (0..r)
                    .map(|col| basis[col].c[row * k..(row + 1) * k].to_vec())
                    .collect()
            })
            .collect();
        let mut inv: Vec<Vec<FqEl>> = (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| if i == j { self.fq.one() } else { self.fq.zero() })
                    .collect()
            })
            .collect();
        for col in 0..r {
            let pivot = (col..r)
                .find(|&row| !self.fq.is_zero_el(&m[row][col]))
                .ok_or(Error::DependentBasis)?;
            m.swap(col, pivot);
            inv.swap(col, pivot);
            let scale = self.fq.inv_el(&m[col][col])?;
            for j in 0..r {
                m[col][j] = self.fq.mul_el(&m[col][j], &scale);
                inv[col][j] = self.fq.mul_el(&inv[col][j], &scale);
            }
            for row in 0..r {
                if row == col || self.fq.is_zero_el(&m[row][col]) {
                    continue;
                }
                let f = m[row][col].clone();
                for j in 0..r {
                    let t = self.fq.mul_el(&f, &m[col][j]);
                    m[row][j] = self.fq.sub_el(&m[row][j], &t);
                    let t = self.fq.mul_el(&f, &inv[col][j]);
                    inv[row][j] = self.fq.sub_el(&inv[row][j], &t);
                }
            }
        }
        Ok(inv)
    }

    // ---- generator and discrete logarithm ----

    fn find_generator(&self) -> FieldElement {
        let n = self.mult_order;
        for code in 1..self.qr {
            let x = self.from_code(code);
            let ok = self
                .mult_order_factors
                .iter()
                .all(|&(l, _)| !self.is_one(&self.pow(&x, n / l as u128)));
            if ok {
                return x;
            }
        }
        unreachable!("every finite field has a generator");
    }

    pub fn is_one(&self, a: &FieldElement) -> bool {
        a.c[0] == 1 && a.c[1..].iter().all(|&x| x == 0)
    }

    fn build_dlog_table(&self) -> Vec<u32> {
        let n = self.qr as usize;
        let mut table = vec![DLOG_NONE; n];
        let mut x = self.one();
        for e in 0..self.mult_order as u32 {
            table[self.code(&x) as usize] = e;
            x = self.mul(&x, &self.generator);
        }
        table
    }

    /// Exponent e in [0, q^r-1) with g^e = x.
    pub fn dlog(&self, x: &FieldElement) -> Result<u64> {
        self.check(x)?;
        if self.is_zero(x) {
            return Err(Error::DlogOfZero);
        }
        if let Some(table) = &self.dlog_table {
            let e = table[self.code(x) as usize];
            debug_assert_ne!(e, DLOG_NONE);
            return Ok(e as u64);
        }
        let t = self.bsgs.get_or_init(|| self.build_bsgs());
        let mut y = x.clone();
        for i in 0..=t.m {
            if let Some(&j) = t.baby.get(&self.code(&y)) {
                return Ok(i * t.m + j);
            }
            y = self.mul(&y, &t.giant_step);
        }
        unreachable!("bsgs must find every nonzero element");
    }

    fn build_bsgs(&self) -> BsgsTable {
        let n = self.mult_order as u64;
        let m = (n as f64).sqrt().ceil() as u64;
        let mut baby = std::collections::HashMap::with_capacity(m as usize);
        let mut x = self.one();
        for j in 0..m {
            baby.entry(self.code(&x)).or_insert(j);
            x = self.mul(&x, &self.generator);
        }
        // g^{-m}
        let giant_step = self.pow(&self.generator, self.mult_order - m as u128);
        BsgsTable { m, baby, giant_step }
    }

    // ---- conversions between flat elements and F_q polynomials ----

    pub(crate) fn to_fq_poly(&self, a: &FieldElement) -> Vec<FqEl> {
        let k = self.k;
        let v: Vec<FqEl> = (0..self.r)
            .map(|i| a.c[i * k..(i + 1) * k].to_vec())
            .collect();
        ring::ptrim(&self.fq, v)
    }

    pub(crate) fn from_fq_poly(&self, v: &[FqEl]) -> FieldElement {
        debug_assert!(v.len() <= self.r);
        let mut e = self.zero();
        for (i, c) in v.iter().enumerate() {
            e.c[i * self.k..(i + 1) * self.k].copy_from_slice(c);
        }
        e
    }

    // ---- trace precomputation ----

    fn compute_tr_fp(&self) -> Vec<u64> {
        let kr = self.k * self.r;
        let mut out = Vec::with_capacity(kr);
        for slot in 0..kr {
            let mut mu = self.zero();
            mu.c[slot] = 1;
            let mut acc = self.zero();
            let mut x = mu;
            for _ in 0..kr {
                acc = self.add(&acc, &x);
                x = self.pow(&x, self.p as u128);
            }
            debug_assert!(acc.c[1..].iter().all(|&v| v == 0), "trace must land in F_p");
            out.push(acc.c[0]);
        }
        out
    }

    fn compute_tr_fq(&self) -> Vec<FqEl> {
        let mut out = Vec::with_capacity(self.r);
        for i in 0..self.r {
            let mu = self.monomial(i);
            let mut acc = self.zero();
            let mut x = mu;
            for _ in 0..self.r {
                acc = self.add(&acc, &x);
                x = self.frobenius(&x, self.k);
            }
            debug_assert!(self.in_subfield_fq(&acc), "trace must land in F_q");
            out.push(acc.c[..self.k].to_vec());
        }
        out
    }
}

fn canonical_modulus_qr(fq: &FqCtx, r: usize) -> Vec<FqEl> {
    let total = fq.q.pow(r as u32);
    let mut enc: u128 = 0;
    loop {
        debug_assert!(enc < total);
        let mut m: Vec<FqEl> = Vec::with_capacity(r + 1);
        let mut e = enc;
        for _ in 0..r {
            m.push(fq.from_code(e % fq.q));
            e /= fq.q;
        }
        m.push(fq.one());
        if ring::pis_irreducible(fq, &m) {
            return m;
        }
        enc += 1;
    }
}

impl CoeffField for FieldCtx {
    type El = FieldElement;
    fn zero(&self) -> FieldElement {
        FieldCtx::zero(self)
    }
    fn one(&self) -> FieldElement {
        FieldCtx::one(self)
    }
    fn is_zero(&self, a: &FieldElement) -> bool {
        FieldCtx::is_zero(self, a)
    }
    fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldCtx::add(self, a, b)
    }
    fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldCtx::sub(self, a, b)
    }
    fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldCtx::mul(self, a, b)
    }
    fn inv(&self, a: &FieldElement) -> FieldElement {
        FieldCtx::inv(self, a).expect("inverse of zero element")
    }
    fn size(&self) -> u128 {
        self.qr
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f9() -> FieldCtx {
        FieldCtx::build(3, 1, 2).unwrap()
    }

    #[test]
    fn build_f9_canonical() {
        let f = f9();
        assert_eq!(f.order(), 9);
        assert_eq!(f.modulus_qr_codes(), vec![1, 0, 1]); // X^2 + 1
        // generator is t + 1
        let g = f.add(&f.t_gen(), &f.one());
        assert_eq!(*f.generator(), g);
    }

    #[test]
    fn build_trivial_f2() {
        let f = FieldCtx::build(2, 1, 1).unwrap();
        assert_eq!(f.order(), 2);
        assert_eq!(f.basis().len(), 1);
        assert!(f.is_one(&f.basis()[0]));
        assert!(f.is_one(f.generator()));
    }

    #[test]
    fn composite_characteristic_rejected() {
        assert!(matches!(
            FieldCtx::build(4, 1, 1),
            Err(Error::CompositeCharacteristic(4))
        ));
    }

    #[test]
    fn f9_multiplication_table_facts() {
        let f = f9();
        let t = f.t_gen();
        // t * t = 2
        assert_eq!(f.mul(&t, &t), f.from_u64(2));
        // frobenius(t, 1) = t^3 = 2t
        assert_eq!(f.frobenius(&t, 1), f.mul_fq(&t, &vec![2]));
        // a + 0 = a
        let a = f.from_code(5);
        assert_eq!(f.add(&a, &f.zero()), a);
        // division by zero
        assert!(matches!(f.div(&a, &f.zero()), Err(Error::DivisionByZero)));
    }

    #[test]
    fn inv_and_pow() {
        let f3 = FieldCtx::build(3, 1, 1).unwrap();
        assert_eq!(f3.inv(&f3.from_u64(2)).unwrap(), f3.from_u64(2));
        let f = f9();
        let g = f.generator().clone();
        assert!(f.is_one(&f.pow(&g, 8)));
        assert_eq!(f.pow(&f.t_gen(), 2), f.from_u64(2));
        // pow(a, 0) = 1
        assert!(f.is_one(&f.pow(&f.zero(), 0)));
        for code in 1..9 {
            let x = f.from_code(code);
            let i = f.inv(&x).unwrap();
            assert!(f.is_one(&f.mul(&x, &i)));
            assert_eq!(f.pow_i(&x, -1).unwrap(), i);
        }
    }

    #[test]
    fn traces_and_norms_f9() {
        let f = f9();
        let t = f.t_gen();
        assert_eq!(f.trace_to_fp(&f.one()), f.from_u64(2));
        assert_eq!(f.trace_to_fp(&t), f.zero());
        assert_eq!(f.norm(&f.one()), f.one());
        assert_eq!(f.norm(&t), f.one()); // t * t^3 = t^4 = 1
        assert_eq!(f.norm(&f.zero()), f.zero());
    }

    #[test]
    fn trace_transitivity() {
        // Tr_{F_{q^r}/F_p} = Tr_{F_q/F_p} . Tr_{F_{q^r}/F_q} on all of F_{3^4} as (k=2, r=2)
        let f = FieldCtx::build(3, 2, 2).unwrap();
        for code in 0..81 {
            let x = f.from_code(code);
            let down = f.trace_to_fq(&x);
            // embedded F_q element: its K/F_p trace is r * (F_q/F_p trace); instead
            // compose by hand: trace of the embedded value within F_q = F_{p^2}
            let fq_chunk = down.c[..f.k()].to_vec();
            let mut acc = 0u64;
            // Tr_{F_q/F_p}(c) = c + c^p computed inside F_q
            let fq = &f.fq;
            let c1 = fq_chunk.clone();
            let c2 = fq.pow_el(&c1, 3);
            let s = fq.add_el(&c1, &c2);
            assert!(s[1] == 0);
            acc += s[0];
            assert_eq!(acc % 3, f.trace_fp_scalar(&x));
        }
    }

    #[test]
    fn frobenius_fixed_field() {
        let f = FieldCtx::build(3, 1, 3).unwrap(); // F_27
        for code in 0..27 {
            let x = f.from_code(code);
            assert_eq!(f.frobenius(&x, 3), x); // full orbit is identity
            let fixed = f.frobenius(&x, 1) == x;
            let in_fp = f.in_subfield_fq(&x); // k = 1: F_q = F_p
            assert_eq!(fixed, in_fp);
        }
    }

    #[test]
    fn generator_and_dlog_f9() {
        let f = f9();
        assert_eq!(f.dlog(f.generator()).unwrap(), 1);
        assert_eq!(f.dlog(&f.from_u64(2)).unwrap(), 4); // (t+1)^4 = 2
        assert!(matches!(f.dlog(&f.zero()), Err(Error::DlogOfZero)));
        for code in 1..9 {
            let x = f.from_code(code);
            let e = f.dlog(&x).unwrap();
            assert_eq!(f.pow(f.generator(), e as u128), x);
        }
    }

    #[test]
    fn bsgs_matches_table() {
        let with_table = FieldCtx::build(3, 1, 4).unwrap();
        let no_table = FieldCtx::builder(3, 1, 4).table_cap(0).build().unwrap();
        assert!(with_table.has_dlog_table());
        assert!(!no_table.has_dlog_table());
        for code in 1..81 {
            let a = with_table.dlog(&with_table.from_code(code)).unwrap();
            let b = no_table.dlog(&no_table.from_code(code)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn coords_round_trip_power_basis() {
        let f = f9();
        let t = f.t_gen();
        assert_eq!(f.coords(&t), vec![vec![0], vec![1]]);
        assert_eq!(f.from_coords(&[vec![0], vec![0]]).unwrap(), f.zero());
        for code in 0..9 {
            let x = f.from_code(code);
            assert_eq!(f.from_coords(&f.coords(&x)).unwrap(), x);
        }
        assert!(f.from_coords(&[vec![1]]).is_err());
    }

    #[test]
    fn custom_basis() {
        let f = f9();
        let t = f.t_gen();
        // basis (t, 1): permuted power basis
        let g = f.with_basis(vec![t.clone(), f.one()]).unwrap();
        assert_eq!(g.coords(&t), vec![vec![1], vec![0]]);
        for code in 0..9 {
            let x = g.from_code(code);
            assert_eq!(g.from_coords(&g.coords(&x)).unwrap(), x);
        }
        // dependent basis rejected
        assert!(matches!(
            f.with_basis(vec![f.one(), f.from_u64(2)]),
            Err(Error::DependentBasis)
        ));
    }

    #[test]
    fn context_mismatch_detected() {
        let a = f9();
        let b = FieldCtx::build(3, 1, 3).unwrap();
        let x = b.from_code(4);
        assert!(matches!(a.check(&x), Err(Error::ContextMismatch)));
    }

    #[test]
    fn supplied_modulus_validation() {
        // reducible quadratic over F_3: X^2 + 2
        assert!(FieldCtx::builder(3, 1, 2)
            .modulus_qr_codes(vec![2, 0, 1])
            .build()
            .is_err());
        // valid alternative: X^2 + X + 2
        let f = FieldCtx::builder(3, 1, 2)
            .modulus_qr_codes(vec![2, 1, 1])
            .build()
            .unwrap();
        assert_eq!(f.order(), 9);
        let t = f.t_gen();
        // t^2 = -t - 2 = 2t + 1
        let t2 = f.mul(&t, &t);
        let expect = f.add(&f.mul_fq(&t, &vec![2]), &f.one());
        assert_eq!(t2, expect);
    }
}

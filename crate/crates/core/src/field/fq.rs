//! The middle layer of the tower: F_q = F_p[y]/(m_q(y)).
//!
//! Elements are coefficient vectors of length k over F_p (ascending powers
//! of y, not trimmed). Everything here is internal plumbing for `FieldCtx`.

use crate::arith::pow_mod;
use crate::error::{Error, Result};
use crate::ring::{self, CoeffField};

/// F_p as a coefficient field for the generic polynomial routines.
pub(crate) struct PrimeField(pub u64);

impl CoeffField for PrimeField {
    type El = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.0
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        (a + self.0 - b) % self.0
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        a * b % self.0
    }
    fn inv(&self, a: &u64) -> u64 {
        assert!(*a != 0, "inverse of zero in F_p");
        pow_mod(*a, self.0 - 2, self.0)
    }
    fn size(&self) -> u128 {
        self.0 as u128
    }
}

/// Fixed-length coefficient vector over F_p representing an element of F_q.
pub type FqEl = Vec<u64>;

#[derive(Debug)]
pub(crate) struct FqCtx {
    pub p: u64,
    pub k: usize,
    pub q: u128,
    /// Monic irreducible of degree k over F_p, ascending, length k+1.
    pub modulus: Vec<u64>,
}

impl FqCtx {
    /// `modulus` must be monic of degree k and irreducible over F_p.
    pub fn new(p: u64, k: usize, modulus: Vec<u64>) -> Result<Self> {
        let fp = PrimeField(p);
        if modulus.len() != k + 1 || modulus[k] != 1 {
            return Err(Error::BadModulus(format!(
                "inner modulus must be monic of degree {k}"
            )));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::BadModulus("inner modulus coefficient out of range".into()));
        }
        if !ring::pis_irreducible(&fp, &modulus) {
            return Err(Error::BadModulus("inner modulus is reducible over F_p".into()));
        }
        let q = (p as u128)
            .checked_pow(k as u32)
            .ok_or_else(|| Error::FieldTooLarge("p^k overflows".into()))?;
        Ok(FqCtx { p, k, q, modulus })
    }

    /// Smallest-encoding monic irreducible of degree k over F_p.
    pub fn canonical_modulus(p: u64, k: usize) -> Vec<u64> {
        let fp = PrimeField(p);
        let total = (p as u128).pow(k as u32);
        let mut enc: u128 = 0;
        loop {
            debug_assert!(enc < total, "no irreducible found (impossible)");
            let mut m: Vec<u64> = Vec::with_capacity(k + 1);
            let mut e = enc;
            for _ in 0..k {
                m.push((e % p as u128) as u64);
                e /= p as u128;
            }
            m.push(1);
            if ring::pis_irreducible(&fp, &m) {
                return m;
            }
            enc += 1;
        }
    }

    pub fn zero(&self) -> FqEl {
        vec![0; self.k]
    }

    pub fn one(&self) -> FqEl {
        let mut v = vec![0; self.k];
        v[0] = 1;
        v
    }

    pub fn is_zero_el(&self, a: &FqEl) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn add_el(&self, a: &FqEl, b: &FqEl) -> FqEl {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.p).collect()
    }

    pub fn sub_el(&self, a: &FqEl, b: &FqEl) -> FqEl {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x + self.p - y) % self.p)
            .collect()
    }

    pub fn neg_el(&self, a: &FqEl) -> FqEl {
        a.iter().map(|x| (self.p - x) % self.p).collect()
    }

    pub fn mul_el(&self, a: &FqEl, b: &FqEl) -> FqEl {
        let k = self.k;
        if k == 1 {
            return vec![a[0] * b[0] % self.p];
        }
        let mut prod = vec![0u64; 2 * k - 1];
        for i in 0..k {
            if a[i] == 0 {
                continue;
            }
            for j in 0..k {
                prod[i + j] = (prod[i + j] + a[i] * b[j]) % self.p;
            }
        }
        // reduce by the monic modulus: y^k = -(lower part)
        for i in (k..2 * k - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..k {
                let t = c * self.modulus[j] % self.p;
                prod[i - k + j] = (prod[i - k + j] + self.p - t) % self.p;
            }
        }
        prod.truncate(k);
        prod
    }

    pub fn inv_el(&self, a: &FqEl) -> Result<FqEl> {
        if self.is_zero_el(a) {
            return Err(Error::DivisionByZero);
        }
        // a^(q-2); q is small enough that this beats extended Euclid bookkeeping
        Ok(self.pow_el(a, self.q - 2))
    }

    pub fn pow_el(&self, a: &FqEl, mut e: u128) -> FqEl {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_el(&acc, &base);
            }
            base = self.mul_el(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Integer code in [0, q): sum of a_j p^j, constant term least significant.
    pub fn code(&self, a: &FqEl) -> u128 {
        let mut c: u128 = 0;
        for &x in a.iter().rev() {
            c = c * self.p as u128 + x as u128;
        }
        c
    }

    pub fn from_code(&self, mut c: u128) -> FqEl {
        let mut v = Vec::with_capacity(self.k);
        for _ in 0..self.k {
            v.push((c % self.p as u128) as u64);
            c /= self.p as u128;
        }
        v
    }

    /// All q elements in code order.
    pub fn all_elements(&self) -> Vec<FqEl> {
        (0..self.q).map(|c| self.from_code(c)).collect()
    }
}

impl CoeffField for FqCtx {
    type El = FqEl;
    fn zero(&self) -> FqEl {
        FqCtx::zero(self)
    }
    fn one(&self) -> FqEl {
        FqCtx::one(self)
    }
    fn is_zero(&self, a: &FqEl) -> bool {
        self.is_zero_el(a)
    }
    fn add(&self, a: &FqEl, b: &FqEl) -> FqEl {
        self.add_el(a, b)
    }
    fn sub(&self, a: &FqEl, b: &FqEl) -> FqEl {
        self.sub_el(a, b)
    }
    fn mul(&self, a: &FqEl, b: &FqEl) -> FqEl {
        self.mul_el(a, b)
    }
    fn inv(&self, a: &FqEl) -> FqEl {
        self.inv_el(a).expect("inverse of zero in F_q")
    }
    fn size(&self) -> u128 {
        self.q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_moduli() {
        // degree 1 over any prime: X itself (encoding 0)
        assert_eq!(FqCtx::canonical_modulus(3, 1), vec![0, 1]);
        // F_9: X^2 + 1 is the first irreducible quadratic by encoding
        assert_eq!(FqCtx::canonical_modulus(3, 2), vec![1, 0, 1]);
        // F_4: X^2 + X + 1 is the only irreducible quadratic over F_2
        assert_eq!(FqCtx::canonical_modulus(2, 2), vec![1, 1, 1]);
    }

    #[test]
    fn f9_arithmetic() {
        let fq = FqCtx::new(3, 2, vec![1, 0, 1]).unwrap();
        let y = vec![0, 1];
        // y^2 = -1 = 2
        assert_eq!(fq.mul_el(&y, &y), vec![2, 0]);
        let inv = fq.inv_el(&y).unwrap();
        assert_eq!(fq.mul_el(&y, &inv), fq.one());
        // code round trip
        for c in 0..9 {
            assert_eq!(fq.code(&fq.from_code(c)), c);
        }
    }

    #[test]
    fn rejects_reducible() {
        assert!(FqCtx::new(3, 2, vec![2, 0, 1]).is_err());
    }
}

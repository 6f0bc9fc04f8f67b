//! Generic dense polynomial routines over an abstract coefficient field.
//!
//! The same code drives three layers: F_p (modulus selection for F_q),
//! F_q (modulus selection for the top extension) and F_{q^r} (the public
//! polynomial type). Coefficient vectors are ascending-degree with trailing
//! zeros trimmed; the zero polynomial is the empty vector.

pub(crate) trait CoeffField {
    type El: Clone + PartialEq;

    fn zero(&self) -> Self::El;
    fn one(&self) -> Self::El;
    fn is_zero(&self, a: &Self::El) -> bool;
    fn add(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn sub(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn mul(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn inv(&self, a: &Self::El) -> Self::El;
    /// Number of elements of the coefficient field.
    fn size(&self) -> u128;
}

pub(crate) fn ptrim<F: CoeffField>(f: &F, mut v: Vec<F::El>) -> Vec<F::El> {
    while v.last().map_or(false, |c| f.is_zero(c)) {
        v.pop();
    }
    v
}

pub(crate) fn pdeg<E>(v: &[E]) -> Option<usize> {
    if v.is_empty() {
        None
    } else {
        Some(v.len() - 1)
    }
}

pub(crate) fn padd<F: CoeffField>(f: &F, a: &[F::El], b: &[F::El]) -> Vec<F::El> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).cloned().unwrap_or_else(|| f.zero());
        let y = b.get(i).cloned().unwrap_or_else(|| f.zero());
        out.push(f.add(&x, &y));
    }
    ptrim(f, out)
}

pub(crate) fn psub<F: CoeffField>(f: &F, a: &[F::El], b: &[F::El]) -> Vec<F::El> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).cloned().unwrap_or_else(|| f.zero());
        let y = b.get(i).cloned().unwrap_or_else(|| f.zero());
        out.push(f.sub(&x, &y));
    }
    ptrim(f, out)
}

pub(crate) fn pmul<F: CoeffField>(f: &F, a: &[F::El], b: &[F::El]) -> Vec<F::El> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![f.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if f.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = f.add(&out[i + j], &f.mul(x, y));
        }
    }
    ptrim(f, out)
}

pub(crate) fn pscale<F: CoeffField>(f: &F, a: &[F::El], c: &F::El) -> Vec<F::El> {
    ptrim(f, a.iter().map(|x| f.mul(x, c)).collect())
}

/// Quotient and remainder; divisor must be nonzero.
pub(crate) fn pdivmod<F: CoeffField>(
    f: &F,
    a: &[F::El],
    b: &[F::El],
) -> (Vec<F::El>, Vec<F::El>) {
    assert!(!b.is_empty(), "division by zero polynomial");
    if a.len() < b.len() {
        return (Vec::new(), a.to_vec());
    }
    let lead_inv = f.inv(b.last().unwrap());
    let mut rem = a.to_vec();
    let mut quo = vec![f.zero(); a.len() - b.len() + 1];
    for i in (0..quo.len()).rev() {
        let top = rem.get(i + b.len() - 1).cloned().unwrap_or_else(|| f.zero());
        if f.is_zero(&top) {
            continue;
        }
        let c = f.mul(&top, &lead_inv);
        for (j, bj) in b.iter().enumerate() {
            let t = f.mul(&c, bj);
            rem[i + j] = f.sub(&rem[i + j], &t);
        }
        quo[i] = c;
    }
    (ptrim(f, quo), ptrim(f, rem))
}

pub(crate) fn pmonic<F: CoeffField>(f: &F, a: &[F::El]) -> Vec<F::El> {
    match a.last() {
        None => Vec::new(),
        Some(l) => {
            let inv = f.inv(l);
            pscale(f, a, &inv)
        }
    }
}

/// Monic greatest common divisor.
pub(crate) fn pgcd<F: CoeffField>(f: &F, a: &[F::El], b: &[F::El]) -> Vec<F::El> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    while !y.is_empty() {
        let (_, r) = pdivmod(f, &x, &y);
        x = y;
        y = r;
    }
    pmonic(f, &x)
}

pub(crate) fn pmulmod<F: CoeffField>(f: &F, a: &[F::El], b: &[F::El], m: &[F::El]) -> Vec<F::El> {
    let prod = pmul(f, a, b);
    pdivmod(f, &prod, m).1
}

pub(crate) fn ppowmod<F: CoeffField>(
    f: &F,
    a: &[F::El],
    mut e: u128,
    m: &[F::El],
) -> Vec<F::El> {
    let mut base = pdivmod(f, a, m).1;
    let mut acc = vec![f.one()];
    while e > 0 {
        if e & 1 == 1 {
            acc = pmulmod(f, &acc, &base, m);
        }
        base = pmulmod(f, &base, &base, m);
        e >>= 1;
    }
    acc
}

pub(crate) fn peval<F: CoeffField>(f: &F, a: &[F::El], x: &F::El) -> F::El {
    match a.len() {
        0 => f.zero(),
        1 => a[0].clone(),
        _ => {
            let mut acc = a.last().unwrap().clone();
            for c in a[..a.len() - 1].iter().rev() {
                acc = f.add(&f.mul(&acc, x), c);
            }
            acc
        }
    }
}

/// Rabin irreducibility test for a monic polynomial of degree >= 1 over a
/// field of `size` elements: X^{S^m} = X mod f, and gcd(X^{S^{m/l}} - X, f) = 1
/// for every prime l dividing m.
pub(crate) fn pis_irreducible<F: CoeffField>(f: &F, m: &[F::El]) -> bool {
    let deg = match pdeg(m) {
        None | Some(0) => return false,
        Some(d) => d,
    };
    if deg == 1 {
        return true;
    }
    let s = f.size();
    let x: Vec<F::El> = vec![f.zero(), f.one()];
    // x_pow[i] caches X^{S^i} mod m, computed by iterated S-powering.
    let mut frob = x.clone();
    let frob_at = |target: usize, cur: &mut usize, frob: &mut Vec<F::El>| {
        while *cur < target {
            *frob = ppowmod(f, frob, s, m);
            *cur += 1;
        }
    };
    let mut cur = 0usize;
    for (l, _) in crate::arith::factorize(deg as u64) {
        let d = deg / l as usize;
        frob_at(d, &mut cur, &mut frob);
        let diff = psub(f, &frob, &x);
        let g = pgcd(f, &diff, m);
        if pdeg(&g) != Some(0) {
            return false;
        }
    }
    frob_at(deg, &mut cur, &mut frob);
    psub(f, &frob, &x).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// F_p for tests.
    struct Fp(u64);
    impl CoeffField for Fp {
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
            crate::arith::pow_mod(*a, self.0 - 2, self.0)
        }
        fn size(&self) -> u128 {
            self.0 as u128
        }
    }

    #[test]
    fn divide_and_gcd() {
        let f = Fp(3);
        // (X^2 - 1) / (X - 1) = X + 1 over F_3
        let a = vec![2, 0, 1]; // X^2 + 2 = X^2 - 1
        let b = vec![2, 1]; // X + 2 = X - 1
        let (q, r) = pdivmod(&f, &a, &b);
        assert_eq!(q, vec![1, 1]);
        assert!(r.is_empty());
        assert_eq!(pgcd(&f, &a, &b), vec![2, 1]);
    }

    #[test]
    fn irreducibility_over_f3() {
        let f = Fp(3);
        assert!(pis_irreducible(&f, &[1, 0, 1])); // X^2 + 1
        assert!(!pis_irreducible(&f, &[2, 0, 1])); // X^2 + 2 = (X-1)(X+1)
        assert!(pis_irreducible(&f, &[1, 2, 0, 1])); // X^3 + 2X + 1
        assert!(!pis_irreducible(&f, &[0, 2, 0, 1])); // X(X^2+2)
        assert!(pis_irreducible(&f, &[0, 1])); // X
    }
}

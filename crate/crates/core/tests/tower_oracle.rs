//! Cross-check of the tower arithmetic against an independently implemented
//! single-extension model F_p[X]/(m) with deg m = k r.
//!
//! The isomorphism is fixed by matching generators: the minimal polynomial of
//! the tower's multiplicative generator over F_p is extracted by linear
//! algebra on its power limbs, the flat model is built on that modulus, and
//! g^e -> X^e extends the generator match multiplicatively. Exhaustive
//! additivity of the map then pins the two structures together.

use rsums::field::FieldCtx;

/// Minimal standalone arithmetic in F_p[X]/(m): the oracle implementation.
struct Flat {
    p: u64,
    deg: usize,
    modulus: Vec<u64>, // monic, ascending, length deg+1
}

impl Flat {
    fn zero(&self) -> Vec<u64> {
        vec![0; self.deg]
    }

    fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.p).collect()
    }

    fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut prod = vec![0u64; 2 * self.deg - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        for i in (self.deg..prod.len()).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..self.deg {
                let t = c * self.modulus[j] % self.p;
                prod[i - self.deg + j] = (prod[i - self.deg + j] + self.p - t) % self.p;
            }
        }
        prod.truncate(self.deg);
        prod
    }
}

/// Minimal polynomial of the element with the given power-limb sequence:
/// Gaussian elimination over F_p on the matrix of powers 1, g, ..., g^deg.
fn min_poly(p: u64, powers: &[Vec<u64>]) -> Vec<u64> {
    let deg = powers.len() - 1;
    let width = powers[0].len();
    // solve sum_{i<deg} c_i g^i = -g^deg
    let inv = |a: u64| -> u64 {
        let mut acc = 1u64;
        let mut b = a % p;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        acc
    };
    let mut m: Vec<Vec<u64>> = (0..width)
        .map(|row| {
            let mut v: Vec<u64> = (0..deg).map(|col| powers[col][row]).collect();
            v.push((p - powers[deg][row] % p) % p);
            v
        })
        .collect();
    // row reduce [A | rhs]
    let mut pivots = Vec::new();
    let mut rank = 0usize;
    for col in 0..deg {
        let Some(pr) = (rank..width).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, pr);
        let iv = inv(m[rank][col]);
        for x in m[rank].iter_mut() {
            *x = *x * iv % p;
        }
        for r in 0..width {
            if r != rank && m[r][col] != 0 {
                let f = m[r][col];
                let prow = m[rank].clone();
                for (x, &pv) in m[r].iter_mut().zip(&prow) {
                    *x = (*x + (p - f) * pv % p) % p;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    assert_eq!(rank, deg, "generator must have full degree over F_p");
    let mut coeffs = vec![0u64; deg + 1];
    coeffs[deg] = 1;
    for (r, &col) in pivots.iter().enumerate() {
        coeffs[col] = m[r][deg];
    }
    coeffs
}

fn check_tower_against_flat(p: u64, k: usize, r: usize) {
    let ctx = FieldCtx::build(p, k, r).unwrap();
    let deg = k * r;
    let n = (ctx.order() - 1) as usize;

    // tower powers of the generator, as flat F_p limb vectors
    let mut tower_pows = Vec::with_capacity(n + 1);
    let mut x = ctx.one();
    for _ in 0..=deg.max(n) {
        tower_pows.push(x.limbs().to_vec());
        x = ctx.mul(&x, ctx.generator());
    }

    let modulus = min_poly(p, &tower_pows[..=deg]);
    let flat = Flat { p, deg, modulus };

    // phi(g^e) = X^e in the flat model
    let mut flat_pows = Vec::with_capacity(n);
    let mut fx = flat.zero();
    fx[0] = 1;
    let mut gen = flat.zero();
    if deg == 1 {
        // X reduces to a constant; the matched generator is that residue
        gen[0] = (p - flat.modulus[0] % p) % p;
    } else {
        gen[1] = 1;
    }
    for _ in 0..n {
        flat_pows.push(fx.clone());
        fx = flat.mul(&fx, &gen);
    }
    assert_eq!(fx, flat_pows[0], "generator order must match");

    // map by element code for the additivity check
    let mut phi = std::collections::HashMap::new();
    phi.insert(ctx.code(&ctx.zero()), flat.zero());
    for (e, limbs) in tower_pows[..n].iter().enumerate() {
        // rebuild the element code from its limb vector
        let mut code: u128 = 0;
        for i in (0..r).rev() {
            let mut chunk: u128 = 0;
            for j in (0..k).rev() {
                chunk = chunk * p as u128 + limbs[i * k + j] as u128;
            }
            code = code * ctx.q() + chunk;
        }
        phi.insert(code, flat_pows[e].clone());
    }
    assert_eq!(phi.len() as u128, ctx.order());

    // exhaustive additivity: phi(a + b) = phi(a) + phi(b)
    for a_code in 0..ctx.order() {
        let a = ctx.from_code(a_code);
        for b_code in a_code..ctx.order() {
            let b = ctx.from_code(b_code);
            let lhs = &phi[&ctx.code(&ctx.add(&a, &b))];
            let rhs = flat.add(&phi[&a_code], &phi[&b_code]);
            assert_eq!(*lhs, rhs, "additivity at ({a_code}, {b_code})");
        }
    }

    // spot-check multiplicativity away from the generator powers used above
    for a_code in 1..ctx.order().min(32) {
        for b_code in 1..ctx.order().min(32) {
            let a = ctx.from_code(a_code);
            let b = ctx.from_code(b_code);
            let lhs = &phi[&ctx.code(&ctx.mul(&a, &b))];
            let rhs = flat.mul(&phi[&a_code], &phi[&b_code]);
            assert_eq!(*lhs, rhs);
        }
    }
}

#[test]
fn tower_matches_flat_model_f9() {
    check_tower_against_flat(3, 1, 2);
}

#[test]
fn tower_matches_flat_model_f8() {
    check_tower_against_flat(2, 1, 3);
}

#[test]
fn tower_matches_flat_model_f81_as_tower() {
    // k = 2, r = 2: the genuinely nested case
    check_tower_against_flat(3, 2, 2);
}

#[test]
fn tower_matches_flat_model_f64() {
    check_tower_against_flat(2, 2, 3);
}

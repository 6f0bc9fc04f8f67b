//! The exponent calculus behind the saving bounds: kappa_s(rho), the
//! equalizing split point tau_0, the two-term exponent Delta, the Cantor-set
//! constant gamma, and optimization over the moment parameter s.
//!
//! Everything here is double-precision evaluation of closed formulas; the
//! defining identities are pinned down by tests at 1e-12 .. 1e-15.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::restricted::RestrictedSetSpec;

fn check_domain(s: u32, rho: f64) -> Result<()> {
    if s < 1 {
        return Err(Error::InvalidArgument("s must be at least 1".into()));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidArgument("rho must lie in (0, 1]".into()));
    }
    Ok(())
}

/// kappa_s(rho) = (s rho (2 rho - 1) + rho - 1) / (4 s (s rho + 1)).
pub fn kappa(s: u32, rho: f64) -> Result<f64> {
    check_domain(s, rho)?;
    let s = s as f64;
    Ok((s * rho * (2.0 * rho - 1.0) + rho - 1.0) / (4.0 * s * (s * rho + 1.0)))
}

/// The split point tau_0 = (2 s rho + 1) / (2 (s rho + 1)) equalizing the two
/// terms inside the Delta maximum.
pub fn tau0(s: u32, rho: f64) -> Result<f64> {
    check_domain(s, rho)?;
    let s = s as f64;
    Ok((2.0 * s * rho + 1.0) / (2.0 * (s * rho + 1.0)))
}

/// The two terms inside the maximum of Delta at a given tau.
pub fn delta_max_terms(s: u32, rho: f64, tau: f64) -> Result<(f64, f64)> {
    check_domain(s, rho)?;
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidArgument("tau must lie in [0, 1]".into()));
    }
    let s = s as f64;
    let a = tau / (2.0 * s) + rho * (1.0 - tau) / 2.0;
    let b = 1.0 / (4.0 * s) + rho * (1.0 - tau);
    Ok((a, b))
}

/// Delta_{s,rho}(tau) = (1 - 1/(2s)) rho tau + max(tau/(2s) + rho(1-tau)/2,
/// 1/(4s) + rho(1-tau)).
pub fn delta(s: u32, rho: f64, tau: f64) -> Result<f64> {
    let (a, b) = delta_max_terms(s, rho, tau)?;
    let s = s as f64;
    Ok((1.0 - 1.0 / (2.0 * s)) * rho * tau + a.max(b))
}

/// rho for the Cantor digit set {0, 2} in base 3.
pub fn rho_cantor() -> f64 {
    2f64.ln() / 3f64.ln()
}

/// gamma = 1 - (log 3 / log 2) kappa_5(log 2 / log 3) = 0.99128...
pub fn gamma_cantor() -> f64 {
    let rho = rho_cantor();
    1.0 - kappa(5, rho).expect("valid domain") / rho
}

/// argmax of kappa(s, rho) over 1..=s_max; ties break toward smaller s.
pub fn best_s(rho: f64, s_max: u32) -> Result<(u32, f64)> {
    if s_max < 1 {
        return Err(Error::InvalidArgument("s_max must be at least 1".into()));
    }
    let mut best = (1, kappa(1, rho)?);
    for s in 2..=s_max {
        let k = kappa(s, rho)?;
        if k > best.1 {
            best = (s, k);
        }
    }
    Ok(best)
}

/// Exponent profile for one (s, rho) pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundProfile {
    pub s: u32,
    pub rho: f64,
    pub kappa: f64,
    pub tau0: f64,
    pub delta_at_tau0: f64,
    /// 1 - kappa/rho: the per-digit saving exponent; for the Cantor set at
    /// s = 5 this is the 0.99128... constant.
    pub gamma: Option<f64>,
    pub saving_positive: bool,
    /// Base-q exponent of the bound: rho - kappa.
    pub exponent_q: f64,
    /// Base-q exponent of the trivial bound: rho.
    pub trivial_exponent: f64,
}

/// Full profile for (s, rho): the bound is (#A)^r q^{-r kappa} = q^{r (rho - kappa)}.
pub fn bound_profile(s: u32, rho: f64) -> Result<BoundProfile> {
    let k = kappa(s, rho)?;
    let t0 = tau0(s, rho)?;
    let d0 = delta(s, rho, t0)?;
    let saving = k > 0.0;
    Ok(BoundProfile {
        s,
        rho,
        kappa: k,
        tau0: t0,
        delta_at_tau0: d0,
        gamma: if saving { Some(1.0 - k / rho) } else { None },
        saving_positive: saving,
        exponent_q: rho - k,
        trivial_exponent: rho,
    })
}

/// Profile for a concrete restricted set.
pub fn bound_exponent(spec: &RestrictedSetSpec, s: u32) -> Result<BoundProfile> {
    bound_profile(s, spec.rho())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_closed_forms() {
        // s = 1 reduces to (2 rho^2 - 1)/(4 (rho + 1))
        for i in 1..=10 {
            let rho = i as f64 / 10.0;
            let lhs = kappa(1, rho).unwrap();
            let rhs = (2.0 * rho * rho - 1.0) / (4.0 * (rho + 1.0));
            assert!((lhs - rhs).abs() < 1e-15);
        }
        // root of kappa_1 at 2^{-1/2}
        assert!(kappa(1, 2f64.powf(-0.5)).unwrap().abs() < 1e-15);
        // kappa_5 at the Cantor density
        let k5 = kappa(5, rho_cantor()).unwrap();
        assert!((k5 - 0.0055000).abs() < 1e-6);
    }

    #[test]
    fn tau0_is_the_equalizer_and_minimizer() {
        assert!((tau0(1, 1.0).unwrap() - 0.75).abs() < 1e-15);
        for s in [1u32, 2, 3, 5, 8, 16, 32] {
            for i in 1..=40 {
                let rho = i as f64 / 40.0;
                let t0 = tau0(s, rho).unwrap();
                assert!(t0 > 0.5 && t0 < 1.0);
                let (a, b) = delta_max_terms(s, rho, t0).unwrap();
                assert!((a - b).abs() < 1e-12);
                let d0 = delta(s, rho, t0).unwrap();
                // identity closing the proof
                let k = kappa(s, rho).unwrap();
                assert!((d0 - (rho - k)).abs() < 1e-12);
                // minimum over a tau grid
                for j in 0..=50 {
                    let tau = j as f64 / 50.0;
                    assert!(delta(s, rho, tau).unwrap() >= d0 - 1e-12);
                }
            }
        }
    }

    #[test]
    fn delta_at_zero() {
        for s in [1u32, 2, 7] {
            for rho in [0.2, 0.63, 1.0] {
                let d = delta(s, rho, 0.0).unwrap();
                assert!((d - (rho + 1.0 / (4.0 * s as f64))).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gamma_constant() {
        let g = gamma_cantor();
        assert!((g - 0.99128).abs() < 5e-6);
        assert!(g < 1.0);
        // internal consistency with kappa
        let rho = rho_cantor();
        let k5 = kappa(5, rho).unwrap();
        assert!((g - (1.0 - k5 / rho)).abs() < 1e-15);
    }

    #[test]
    fn best_s_examples() {
        assert_eq!(best_s(rho_cantor(), 20).unwrap().0, 5);
        // at rho = 1: kappa_s(1) = 1/(4(s+1)) is decreasing
        assert_eq!(best_s(1.0, 20).unwrap().0, 1);
        // no saving below 1/2
        for i in 1..=5 {
            let rho = i as f64 / 10.0;
            let (_, k) = best_s(rho, 32).unwrap();
            assert!(k < 0.0);
        }
    }

    #[test]
    fn positive_saving_above_half() {
        // realize: for rho > 1/2 some s <= ceil(2/((2 rho - 1) rho)) works
        for i in 1..=50 {
            let rho = 0.5 + 0.01 * i as f64 * 0.99;
            let rho = rho.min(1.0);
            let s_cap = (2.0 / ((2.0 * rho - 1.0) * rho)).ceil() as u32;
            let found = (1..=s_cap).any(|s| kappa(s, rho).unwrap() > 0.0);
            assert!(found, "rho = {rho}");
        }
    }

    #[test]
    fn profile_flags() {
        let p = bound_profile(5, rho_cantor()).unwrap();
        assert!(p.saving_positive);
        assert!(p.exponent_q < p.trivial_exponent);
        assert!((p.delta_at_tau0 - (p.rho - p.kappa)).abs() < 1e-12);
        let trivial = bound_profile(1, 0.4).unwrap();
        assert!(!trivial.saving_positive);
        assert!(trivial.exponent_q >= trivial.trivial_exponent);
        assert!(trivial.gamma.is_none());
    }
}

//! Property tests for the algebraic invariants: field axioms, coordinate
//! round trips, factorization round trips, shift/eval commutation, class
//! verdicts, parser round trips, and accumulator algebra.

use proptest::prelude::*;

use rsums::characters::{AddChar, CharTerm, CyclotomicSum, MultChar};
use rsums::classify::{in_q, in_r, not_in_e_witness, VerdictKind};
use rsums::expr::{format_rational, parse_rational};
use rsums::field::FieldCtx;
use rsums::poly::{factor_poly, Polynomial, RationalFunction};
use rsums::restricted::RestrictedSetSpec;
use rsums::sums::{mixed_sum, Domain, SumReport};

fn f9() -> FieldCtx {
    FieldCtx::build(3, 1, 2).unwrap()
}

fn f27() -> FieldCtx {
    FieldCtx::build(3, 1, 3).unwrap()
}

fn poly_from_codes(ctx: &FieldCtx, codes: &[u8]) -> Polynomial {
    Polynomial::from_coeffs(
        ctx,
        codes
            .iter()
            .map(|&c| ctx.from_code(c as u128 % ctx.order()))
            .collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms_f27(a_code in 0u128..27, b_code in 0u128..27, c_code in 0u128..27) {
        let f = f27();
        let a = f.from_code(a_code);
        let b = f.from_code(b_code);
        let c = f.from_code(c_code);
        prop_assert_eq!(f.add(&a, &b), f.add(&b, &a));
        prop_assert_eq!(f.mul(&a, &b), f.mul(&b, &a));
        prop_assert_eq!(f.mul(&f.mul(&a, &b), &c), f.mul(&a, &f.mul(&b, &c)));
        prop_assert_eq!(
            f.mul(&a, &f.add(&b, &c)),
            f.add(&f.mul(&a, &b), &f.mul(&a, &c))
        );
        if !f.is_zero(&a) {
            let inv = f.inv(&a).unwrap();
            prop_assert!(f.is_one(&f.mul(&a, &inv)));
        }
        prop_assert!(f.is_zero(&f.add(&a, &f.neg(&a))));
    }

    #[test]
    fn frobenius_is_additive_and_fixes_subfield(a_code in 0u128..81, b_code in 0u128..81) {
        let f = FieldCtx::build(3, 2, 2).unwrap();
        let a = f.from_code(a_code);
        let b = f.from_code(b_code);
        let fr = |x: &rsums::FieldElement| f.frobenius(x, 1);
        prop_assert_eq!(fr(&f.add(&a, &b)), f.add(&fr(&a), &fr(&b)));
        // trace and norm land in the subfield
        prop_assert!(f.in_subfield_fq(&f.trace_to_fq(&a)));
        prop_assert!(f.in_subfield_fq(&f.norm(&a)));
    }

    #[test]
    fn coords_round_trip(a_code in 0u128..81) {
        let f = FieldCtx::build(3, 1, 4).unwrap();
        let a = f.from_code(a_code);
        let v = f.coords(&a);
        prop_assert_eq!(f.from_coords(&v).unwrap(), a);
    }

    #[test]
    fn factor_expand_round_trip(codes in prop::collection::vec(0u8..9, 1..8)) {
        let f = f9();
        let p = poly_from_codes(&f, &codes);
        if !p.is_zero() {
            let fac = factor_poly(&f, &p).unwrap();
            let back = fac.expand(&f).unwrap();
            prop_assert!(back.den().is_one(&f));
            prop_assert_eq!(back.num(), &p);
        }
    }

    #[test]
    fn shift_commutes_with_eval(codes in prop::collection::vec(0u8..9, 1..6), v_code in 0u128..9) {
        let f = f9();
        let p = poly_from_codes(&f, &codes);
        let v = f.from_code(v_code);
        let shifted = p.shift(&f, &v);
        for x_code in 0..9u128 {
            let x = f.from_code(x_code);
            prop_assert_eq!(shifted.eval(&f, &x), p.eval(&f, &f.add(&x, &v)));
        }
    }

    #[test]
    fn q_verdict_scale_invariant(
        ncodes in prop::collection::vec(0u8..9, 1..5),
        dcodes in prop::collection::vec(0u8..9, 1..4),
        c_code in 1u128..9,
    ) {
        let f = f9();
        let num = poly_from_codes(&f, &ncodes);
        let den = poly_from_codes(&f, &dcodes);
        if !den.is_zero() {
            let r = RationalFunction::new(&f, num, den).unwrap();
            if !r.is_zero() {
                let v0 = in_q(&f, &r, 8, 2).unwrap().verdict;
                let scaled = r
                    .mul(&f, &RationalFunction::constant(&f, f.from_code(c_code)))
                    .unwrap();
                prop_assert_eq!(in_q(&f, &scaled, 8, 2).unwrap().verdict, v0);
            }
        }
    }

    #[test]
    fn r_members_exclude_e(
        ncodes in prop::collection::vec(0u8..9, 1..4),
        dcodes in prop::collection::vec(0u8..9, 2..5),
    ) {
        let f = f9();
        let num = poly_from_codes(&f, &ncodes);
        let den = poly_from_codes(&f, &dcodes);
        if !den.is_zero() {
            let r = RationalFunction::new(&f, num, den).unwrap();
            if !r.is_zero() && in_r(&f, &r, 8).unwrap().is_member() {
                prop_assert_eq!(
                    not_in_e_witness(&f, &r).unwrap().verdict,
                    VerdictKind::NonMember
                );
            }
        }
    }

    #[test]
    fn parser_round_trip(
        ncodes in prop::collection::vec(0u8..27, 1..5),
        dcodes in prop::collection::vec(0u8..27, 1..4),
    ) {
        let f = f27();
        let num = poly_from_codes(&f, &ncodes);
        let den = poly_from_codes(&f, &dcodes);
        if !den.is_zero() {
            let r = RationalFunction::new(&f, num, den).unwrap();
            let printed = format_rational(&f, &r);
            prop_assert_eq!(parse_rational(&f, &printed).unwrap(), r);
        }
    }

    #[test]
    fn accumulator_merge_is_commutative(
        xs in prop::collection::vec(0u64..12, 0..40),
        ys in prop::collection::vec(0u64..12, 0..40),
    ) {
        let mut a = CyclotomicSum::new(12).unwrap();
        let mut b = CyclotomicSum::new(12).unwrap();
        for &j in &xs {
            a.accumulate(CharTerm::Root(j));
        }
        for &j in &ys {
            b.accumulate(CharTerm::Root(j));
        }
        let mut ab = a.clone();
        ab.merge(&b).unwrap();
        let mut ba = b.clone();
        ba.merge(&a).unwrap();
        prop_assert_eq!(&ab, &ba);
        // conjugation is an involution and preserves magnitude
        prop_assert_eq!(ab.conjugate().conjugate(), ab.clone());
        prop_assert!((ab.magnitude() - ab.conjugate().magnitude()).abs() < 1e-9);
    }

    #[test]
    fn mixed_sum_partition_merge(m in 1u128..27, beta in 0u128..27, cut in 1usize..7) {
        let f = f27();
        let spec = RestrictedSetSpec::cantor(&f).unwrap();
        let chi = MultChar::new(&f, m);
        let psi = AddChar::new(&f, f.from_code(beta)).unwrap();
        let g1 = RationalFunction::x(&f);
        let g2 = parse_rational(&f, "X^2 + 2*X").unwrap();
        let single = mixed_sum(&f, &g1, &g2, &chi, &psi, &Domain::Restricted(spec.clone())).unwrap();
        let els: Vec<rsums::FieldElement> = spec.stream(&f).collect();
        let mut merged = SumReport::empty(single.acc.order() as u128).unwrap();
        for chunk in els.chunks(cut) {
            let part = mixed_sum(&f, &g1, &g2, &chi, &psi, &Domain::Elements(chunk.to_vec()))
                .unwrap();
            merged.merge(&part).unwrap();
        }
        prop_assert_eq!(&merged.acc, &single.acc);
        prop_assert_eq!(merged.terms_total, single.terms_total);
        prop_assert_eq!(merged.terms_excluded_pole, single.terms_excluded_pole);
    }
}

#[test]
fn trace_is_balanced_over_f27() {
    // surjective F_p-linear maps hit every value equally often
    let f = f27();
    let mut counts = [0u64; 3];
    for code in 0..27u128 {
        counts[f.trace_fp_scalar(&f.from_code(code)) as usize] += 1;
    }
    assert_eq!(counts, [9, 9, 9]);
}

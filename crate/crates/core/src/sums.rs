//! Exact computation of the character sums: mixed sums over arbitrary
//! domains, Kloosterman sums, affine-subspace sums, the U/V double sum, the
//! 2s-th moment computed along two independent routes, and the exceptional
//! shift-vector counts.
//!
//! Sums are mergeable monoids: domains are partitioned deterministically (by
//! structure, never by worker count) and per-partition accumulators merge in
//! partition order, so results are bit-identical however many threads run.

use std::time::Instant;

use itertools::Itertools;
use rayon::prelude::*;

use crate::characters::{pair_order, AddChar, CharPairEval, CharTerm, CyclotomicSum, MultChar};
use crate::classify::{is_nth_power_closure, not_in_e_witness, VerdictKind};
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::poly::{build_l, build_p, EvalResult, RationalFunction};
use crate::restricted::{AffineSubspace, GrayStream, RestrictedSetSpec, SplitDecomposition};

/// A summation domain.
#[derive(Clone, Debug)]
pub enum Domain {
    /// Every element of F_{q^r}.
    Full,
    /// The restricted-coordinate set S_r(A).
    Restricted(RestrictedSetSpec),
    /// An affine subspace.
    Affine(AffineSubspace),
    /// An explicit list.
    Elements(Vec<FieldElement>),
}

impl Domain {
    pub fn cardinality(&self, ctx: &FieldCtx) -> u128 {
        match self {
            Domain::Full => ctx.order(),
            Domain::Restricted(s) => s.cardinality(ctx),
            Domain::Affine(a) => a.cardinality(ctx),
            Domain::Elements(v) => v.len() as u128,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Domain::Full => "full",
            Domain::Restricted(_) => "restricted",
            Domain::Affine(_) => "subspace",
            Domain::Elements(_) => "list",
        }
    }

    /// Deterministic partition into independently enumerable parts. The part
    /// count depends only on the domain, never on the executor.
    fn parts<'a>(&'a self, ctx: &'a FieldCtx) -> Vec<DomainPart<'a>> {
        const SPLIT_THRESHOLD: u128 = 1 << 14;
        const CHUNK: usize = 1 << 13;
        match self {
            Domain::Full => {
                let spec_digits = ctx.subfield_fq_elements();
                let full = RestrictedSetSpec::new(ctx, spec_digits).expect("q >= 2");
                split_spec_parts(ctx, &full, SPLIT_THRESHOLD)
            }
            Domain::Restricted(s) => split_spec_parts(ctx, s, SPLIT_THRESHOLD),
            Domain::Affine(a) => vec![DomainPart::Stream(a.stream(ctx))],
            Domain::Elements(v) => v.chunks(CHUNK).map(DomainPart::Slice).collect(),
        }
    }
}

fn split_spec_parts<'a>(
    ctx: &'a FieldCtx,
    spec: &RestrictedSetSpec,
    threshold: u128,
) -> Vec<DomainPart<'a>> {
    if spec.cardinality(ctx) < threshold {
        return vec![DomainPart::Stream(spec.stream(ctx))];
    }
    let base = spec.digit_count() as u128;
    let mut levels = 1usize;
    while base.pow(levels as u32) < 32 && levels < ctx.r() {
        levels += 1;
    }
    spec.partitions(ctx, levels)
        .into_iter()
        .map(DomainPart::Stream)
        .collect()
}

enum DomainPart<'a> {
    Stream(GrayStream<'a>),
    Slice(&'a [FieldElement]),
}

impl<'a> DomainPart<'a> {
    fn for_each<F: FnMut(&FieldElement)>(self, mut f: F) {
        match self {
            DomainPart::Stream(s) => s.for_each(f),
            DomainPart::Slice(v) => v.iter().for_each(|e| f(e)),
        }
    }
}

/// Result of one exact sum.
#[derive(Clone, Debug)]
pub struct SumReport {
    pub acc: CyclotomicSum,
    pub terms_total: u64,
    pub terms_excluded_pole: u64,
    pub terms_zero_char: u64,
    float_re: f64,
    float_im: f64,
}

impl SumReport {
    /// An empty report ready to merge partial results into.
    pub fn empty(m: u128) -> Result<Self> {
        Self::new(m)
    }

    fn new(m: u128) -> Result<Self> {
        Ok(SumReport {
            acc: CyclotomicSum::new(m)?,
            terms_total: 0,
            terms_excluded_pole: 0,
            terms_zero_char: 0,
            float_re: 0.0,
            float_im: 0.0,
        })
    }

    /// Magnitude from the exact accumulator.
    pub fn magnitude(&self) -> f64 {
        self.acc.magnitude()
    }

    /// Magnitude from the independent complex-double accumulation path.
    pub fn float_magnitude(&self) -> f64 {
        self.float_re.hypot(self.float_im)
    }

    pub fn merge(&mut self, other: &SumReport) -> Result<()> {
        self.acc.merge(&other.acc)?;
        self.terms_total += other.terms_total;
        self.terms_excluded_pole += other.terms_excluded_pole;
        self.terms_zero_char += other.terms_zero_char;
        self.float_re += other.float_re;
        self.float_im += other.float_im;
        Ok(())
    }
}

fn unit_table(m: u64) -> Vec<(f64, f64)> {
    (0..m)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
            (theta.cos(), theta.sin())
        })
        .collect()
}

/// Evaluation shape: the trivial argument functions the harness uses all the
/// time (X, constants) avoid per-term allocation entirely.
enum FnShape {
    Identity,
    Constant(FieldElement),
    General,
}

fn shape_of(ctx: &FieldCtx, f: &RationalFunction) -> FnShape {
    if !f.is_polynomial(ctx) {
        return FnShape::General;
    }
    let n = f.num();
    match n.degree() {
        None => FnShape::Constant(ctx.zero()),
        Some(0) => FnShape::Constant(n.coeff(ctx, 0)),
        Some(1) if ctx.is_zero(&n.coeff(ctx, 0)) && ctx.is_one(&n.coeff(ctx, 1)) => {
            FnShape::Identity
        }
        _ => FnShape::General,
    }
}

struct TermAccum<'a> {
    ctx: &'a FieldCtx,
    f1: &'a RationalFunction,
    f2: &'a RationalFunction,
    shape1: FnShape,
    shape2: FnShape,
    pair: &'a CharPairEval<'a>,
    units: &'a [(f64, f64)],
    report: SumReport,
}

impl<'a> TermAccum<'a> {
    fn consume(&mut self, w: &FieldElement) {
        self.report.terms_total += 1;
        let mut u_store = None;
        let u_ref: Option<&FieldElement> = match &self.shape1 {
            FnShape::Identity => Some(w),
            FnShape::Constant(c) => Some(c),
            FnShape::General => match self.f1.eval(self.ctx, w).expect("context checked") {
                EvalResult::Pole => None,
                EvalResult::Value(v) => {
                    u_store = Some(v);
                    u_store.as_ref()
                }
            },
        };
        let mut w_store = None;
        let w_ref: Option<&FieldElement> = match &self.shape2 {
            FnShape::Identity => Some(w),
            FnShape::Constant(c) => Some(c),
            FnShape::General => match self.f2.eval(self.ctx, w).expect("context checked") {
                EvalResult::Pole => None,
                EvalResult::Value(v) => {
                    w_store = Some(v);
                    w_store.as_ref()
                }
            },
        };
        match self
            .pair
            .eval_refs(self.ctx, u_ref, w_ref)
            .expect("nonzero dlog")
        {
            CharTerm::Excluded => self.report.terms_excluded_pole += 1,
            CharTerm::Zero => {
                self.report.terms_zero_char += 1;
                self.report.acc.accumulate(CharTerm::Zero);
            }
            CharTerm::Root(j) => {
                self.report.acc.accumulate(CharTerm::Root(j));
                let (re, im) = self.units[j as usize];
                self.report.float_re += re;
                self.report.float_im += im;
            }
        }
        let _ = (&u_store, &w_store);
    }
}

fn validate_inputs(
    ctx: &FieldCtx,
    fs: &[&RationalFunction],
    chi: &MultChar,
    psi: &AddChar,
) -> Result<()> {
    for f in fs {
        for c in f.num().coeffs().iter().chain(f.den().coeffs()) {
            ctx.check(c)?;
        }
    }
    ctx.check(psi.beta())?;
    let _ = chi;
    Ok(())
}

/// S = sum over the domain of chi(f1(w)) psi(f2(w)), poles excluded,
/// chi(0) = 0. Exact accumulator plus an independent float cross-path.
pub fn mixed_sum(
    ctx: &FieldCtx,
    f1: &RationalFunction,
    f2: &RationalFunction,
    chi: &MultChar,
    psi: &AddChar,
    domain: &Domain,
) -> Result<SumReport> {
    validate_inputs(ctx, &[f1, f2], chi, psi)?;
    match domain {
        Domain::Restricted(s) => {
            if s.fingerprint() != ctx.fingerprint() {
                return Err(Error::ContextMismatch);
            }
        }
        Domain::Affine(a) => {
            ctx.check(a.offset())?;
            for g in a.span() {
                ctx.check(g)?;
            }
        }
        Domain::Elements(v) => {
            for e in v {
                ctx.check(e)?;
            }
        }
        Domain::Full => {}
    }
    let m = pair_order(ctx, chi, psi);
    let units = unit_table(m as u64);
    let pair = CharPairEval::new(ctx, chi, psi)?;
    let parts = domain.parts(ctx);
    let fresh = || -> Result<SumReport> { SumReport::new(m) };
    let run = |part: DomainPart| -> Result<SumReport> {
        let mut acc = TermAccum {
            ctx,
            f1,
            f2,
            shape1: shape_of(ctx, f1),
            shape2: shape_of(ctx, f2),
            pair: &pair,
            units: &units,
            report: fresh()?,
        };
        part.for_each(|w| acc.consume(w));
        Ok(acc.report)
    };
    let partials: Vec<SumReport> = if parts.len() > 1 {
        parts
            .into_par_iter()
            .map(run)
            .collect::<Result<Vec<_>>>()?
    } else {
        parts.into_iter().map(run).collect::<Result<Vec<_>>>()?
    };
    let mut total = fresh()?;
    for p in &partials {
        total.merge(p)?;
    }
    Ok(total)
}

/// Kloosterman sum over the domain: psi(a w + b / w) with chi principal;
/// w = 0 is excluded as the pole of b/X. Requires b != 0.
pub fn kloosterman_sum(
    ctx: &FieldCtx,
    psi: &AddChar,
    a: &FieldElement,
    b: &FieldElement,
    domain: &Domain,
) -> Result<SumReport> {
    ctx.check(a)?;
    ctx.check(b)?;
    if ctx.is_zero(b) {
        return Err(Error::InvalidArgument(
            "kloosterman requires b != 0 (otherwise the sum is linear)".into(),
        ));
    }
    let num = crate::poly::Polynomial::from_coeffs(ctx, vec![b.clone(), ctx.zero(), a.clone()]);
    let den = crate::poly::Polynomial::x(ctx);
    let f2 = RationalFunction::new(ctx, num, den)?;
    let f1 = RationalFunction::one(ctx);
    let chi = MultChar::new(ctx, 0);
    mixed_sum(ctx, &f1, &f2, &chi, psi, domain)
}

/// Exact sum over an affine subspace.
pub fn subspace_mixed_sum(
    ctx: &FieldCtx,
    g1: &RationalFunction,
    g2: &RationalFunction,
    chi: &MultChar,
    psi: &AddChar,
    subspace: &AffineSubspace,
) -> Result<SumReport> {
    mixed_sum(ctx, g1, g2, chi, psi, &Domain::Affine(subspace.clone()))
}

#[derive(Clone, Debug)]
pub struct DoubleSumProfile {
    pub s: u32,
    /// U^{1-1/(2s)} (q^{t/(2s)} V^{1/2} + q^{r/(4s)} V), no implied constant.
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct DoubleSumReport {
    /// sum over u of |inner sum over v|, inner sums exact.
    pub lhs: f64,
    pub u_count: u128,
    pub v_count: u128,
    pub t: usize,
    pub terms_total: u64,
    pub terms_excluded_pole: u64,
    pub profiles: Vec<DoubleSumProfile>,
}

/// The double sum of the main technical lemma: outer over u in U of the
/// magnitude of the exact inner sum over v in V of chi(g1(u+v)) psi(g2(u+v)).
pub fn double_sum(
    ctx: &FieldCtx,
    g1: &RationalFunction,
    g2: &RationalFunction,
    chi: &MultChar,
    psi: &AddChar,
    split: &SplitDecomposition,
    s_list: &[u32],
) -> Result<DoubleSumReport> {
    validate_inputs(ctx, &[g1, g2], chi, psi)?;
    let m = pair_order(ctx, chi, psi);
    let units = unit_table(m as u64);
    let pair = CharPairEval::new(ctx, chi, psi)?;
    let mut lhs = 0.0;
    let mut terms_total = 0u64;
    let mut excluded = 0u64;
    for u in split.u_stream(ctx) {
        let mut acc = TermAccum {
            ctx,
            f1: g1,
            f2: g2,
            shape1: shape_of(ctx, g1),
            shape2: shape_of(ctx, g2),
            pair: &pair,
            units: &units,
            report: SumReport::new(m)?,
        };
        split
            .spec()
            .stream_range_offset(ctx, split.t, ctx.r(), u)
            .for_each(|w| acc.consume(w));
        lhs += acc.report.magnitude();
        terms_total += acc.report.terms_total;
        excluded += acc.report.terms_excluded_pole;
    }
    let u_count = split.u_cardinality();
    let v_count = split.v_cardinality(ctx);
    let q = ctx.q() as f64;
    let profiles = s_list
        .iter()
        .map(|&s| {
            let sf = s as f64;
            let rhs = (u_count as f64).powf(1.0 - 1.0 / (2.0 * sf))
                * (q.powf(split.t as f64 / (2.0 * sf)) * (v_count as f64).sqrt()
                    + q.powf(ctx.r() as f64 / (4.0 * sf)) * v_count as f64);
            DoubleSumProfile {
                s,
                rhs,
                ratio: if rhs > 0.0 { lhs / rhs } else { f64::INFINITY },
            }
        })
        .collect();
    Ok(DoubleSumReport {
        lhs,
        u_count,
        v_count,
        t: split.t,
        terms_total,
        terms_excluded_pole: excluded,
        profiles,
    })
}

#[derive(Clone, Debug)]
pub struct MomentReport {
    pub s: u32,
    /// The moment as a real number (float read-out of the exact value).
    pub value: f64,
    /// Path (a): sum over lambda of |inner|^{2s} via exact convolutions.
    pub direct: CyclotomicSum,
    /// Path (b): expansion over shift vectors via P_{v,g1} and L_{v,g2}.
    pub expanded: CyclotomicSum,
    /// Exact equality of the two paths as cyclotomic integers.
    pub paths_equal: bool,
    pub direct_ms: f64,
    pub expanded_ms: f64,
}

/// The 2s-th moment sum over lambda in L of |sum over v in V of
/// chi(g1(lambda+v)) psi(g2(lambda+v))|^{2s}, computed two ways that must
/// agree exactly: directly via |z|^{2s} = (z conj z)^s convolutions, and
/// expanded over v-tuples via the product/linear-combination constructions.
pub fn moment_sum(
    ctx: &FieldCtx,
    g1: &RationalFunction,
    g2: &RationalFunction,
    chi: &MultChar,
    psi: &AddChar,
    lspace: &AffineSubspace,
    v_set: &[FieldElement],
    s: u32,
) -> Result<MomentReport> {
    if s < 1 {
        return Err(Error::InvalidArgument("s must be at least 1".into()));
    }
    validate_inputs(ctx, &[g1, g2], chi, psi)?;
    for v in v_set {
        ctx.check(v)?;
    }
    let m = pair_order(ctx, chi, psi);
    let pair = CharPairEval::new(ctx, chi, psi)?;

    // path (a): exact inner accumulators, then (z conj z)^s
    let t0 = Instant::now();
    let mut direct = CyclotomicSum::new(m)?;
    let lambdas: Vec<FieldElement> = lspace.stream(ctx).collect();
    for lambda in &lambdas {
        let mut z = CyclotomicSum::new(m)?;
        for v in v_set {
            let w = ctx.add(lambda, v);
            let u = g1.eval(ctx, &w)?;
            let t = g2.eval(ctx, &w)?;
            z.accumulate(pair.eval(ctx, &u, &t)?);
        }
        let norm2 = z.norm_squared();
        let mut power = norm2.clone();
        for _ in 1..s {
            power = power.convolve(&norm2)?;
        }
        direct.merge(&power)?;
    }
    let direct_ms = t0.elapsed().as_secs_f64() * 1e3;

    // path (b): expansion over v-tuples through P and L
    let t1 = Instant::now();
    let mut expanded = CyclotomicSum::new(m)?;
    let one = ctx.one();
    let tuples = (0..2 * s).map(|_| v_set.iter()).multi_cartesian_product();
    for tuple in tuples {
        let v: Vec<FieldElement> = tuple.into_iter().cloned().collect();
        let p_fn = if chi.is_principal() {
            None
        } else {
            Some(build_p(ctx, g1, &v)?)
        };
        let l_fn = build_l(ctx, g2, &v)?;
        'lambda: for lambda in &lambdas {
            for vi in &v {
                let w = ctx.add(lambda, vi);
                let x = g1.eval(ctx, &w)?;
                match x {
                    EvalResult::Pole => continue 'lambda,
                    EvalResult::Value(ref xv) => {
                        if !chi.is_principal() && ctx.is_zero(xv) {
                            continue 'lambda;
                        }
                    }
                }
                if g2.eval(ctx, &w)?.is_pole() {
                    continue 'lambda;
                }
            }
            let u_eval = match &p_fn {
                None => EvalResult::Value(one.clone()),
                Some(p) => {
                    let e = p.eval(ctx, lambda)?;
                    debug_assert!(
                        matches!(&e, EvalResult::Value(v) if !ctx.is_zero(v)),
                        "P must be finite and nonzero at good lambda"
                    );
                    e
                }
            };
            let w_eval = l_fn.eval(ctx, lambda)?;
            debug_assert!(!w_eval.is_pole(), "L must be finite at good lambda");
            let term = pair.eval(ctx, &u_eval, &w_eval)?;
            debug_assert!(matches!(term, CharTerm::Root(_)));
            expanded.accumulate(term);
        }
    }
    let expanded_ms = t1.elapsed().as_secs_f64() * 1e3;

    let paths_equal = direct.value_eq(&expanded)?;
    let (re, im) = direct.complex_value();
    debug_assert!(im.abs() < 1e-6 * re.abs().max(1.0), "moment must be real");
    Ok(MomentReport {
        s,
        value: re,
        direct,
        expanded,
        paths_equal,
        direct_ms,
        expanded_ms,
    })
}

/// Which exceptional-vector count to run.
#[derive(Clone, Copy, Debug)]
pub enum CountMode {
    /// Count v with P_{v,f} an n-th power over the closure (not in Q_{2ds,n}).
    Product { n: u32 },
    /// Count v with L_{v,f} not certified outside E.
    Linear,
}

#[derive(Clone, Debug)]
pub struct ExceptionalCount {
    pub count: u64,
    pub tuples: u128,
    pub v_size: usize,
    pub s: u32,
    /// count / V^s: the lemmas assert this stays bounded.
    pub ratio_to_vs: f64,
}

/// Exhaustive count of exceptional shift vectors v in V^{2s}.
pub fn exceptional_count(
    ctx: &FieldCtx,
    f: &RationalFunction,
    v_set: &[FieldElement],
    s: u32,
    mode: CountMode,
    budget_tuples: u128,
) -> Result<ExceptionalCount> {
    if f.is_zero() {
        return Err(Error::ZeroFunction);
    }
    if s < 1 {
        return Err(Error::InvalidArgument("s must be at least 1".into()));
    }
    for v in v_set {
        ctx.check(v)?;
    }
    let v_size = v_set.len();
    let tuples = (v_size as u128).pow(2 * s);
    if tuples > budget_tuples {
        return Err(Error::BudgetExceeded(format!(
            "V^(2s) = {tuples} exceeds the tuple budget {budget_tuples}"
        )));
    }
    let count: u64 = v_set
        .par_iter()
        .map(|first| -> Result<u64> {
            let mut local = 0u64;
            let rest = 2 * s as usize - 1;
            let mut idx = vec![0usize; rest];
            loop {
                let mut v = Vec::with_capacity(2 * s as usize);
                v.push(first.clone());
                v.extend(idx.iter().map(|&i| v_set[i].clone()));
                let bad = match mode {
                    CountMode::Product { n } => {
                        let p = build_p(ctx, f, &v)?;
                        is_nth_power_closure(ctx, &p, n)?
                    }
                    CountMode::Linear => {
                        let l = build_l(ctx, f, &v)?;
                        if l.is_zero() {
                            true
                        } else {
                            not_in_e_witness(ctx, &l)?.verdict != VerdictKind::NonMember
                        }
                    }
                };
                if bad {
                    local += 1;
                }
                // odometer over the remaining components
                let mut i = 0;
                while i < rest {
                    idx[i] += 1;
                    if idx[i] < v_size {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
                if i == rest {
                    break;
                }
                if rest == 0 {
                    break;
                }
            }
            Ok(local)
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum();
    Ok(ExceptionalCount {
        count,
        tuples,
        v_size,
        s,
        ratio_to_vs: count as f64 / (v_size as f64).powi(s as i32),
    })
}

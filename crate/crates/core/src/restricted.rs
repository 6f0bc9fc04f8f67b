//! Restricted-coordinate sets S_r(A), affine subspaces, and the U/L/V
//! coordinate split.
//!
//! Enumeration is incremental: a mixed-radix reflected Gray code walks the
//! coordinate digits so that consecutive elements differ in one coordinate,
//! costing one precomputed field addition per step.

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement};

/// A digit set A inside the embedded subfield F_q together with the density
/// parameter rho = log #A / log q.
#[derive(Clone, Debug)]
pub struct RestrictedSetSpec {
    fp: u64,
    digits: Vec<FieldElement>,
    rho: f64,
}

impl RestrictedSetSpec {
    /// Validates and sorts the digit set: nonempty (at least two digits so
    /// that rho > 0), duplicate-free, all inside the embedded F_q.
    pub fn new(ctx: &FieldCtx, digits: Vec<FieldElement>) -> Result<Self> {
        if digits.len() < 2 {
            return Err(Error::BadDigitSet(
                "digit set needs at least two elements (rho > 0)".into(),
            ));
        }
        for d in &digits {
            ctx.check(d)?;
            if !ctx.in_subfield_fq(d) {
                return Err(Error::BadDigitSet(
                    "digit set elements must lie in the subfield F_q".into(),
                ));
            }
        }
        let mut digits = digits;
        digits.sort_by_key(|d| ctx.code(d));
        if digits.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::BadDigitSet("duplicate digit".into()));
        }
        let rho = (digits.len() as f64).ln() / (ctx.q() as f64).ln();
        Ok(RestrictedSetSpec {
            fp: ctx.fingerprint(),
            digits,
            rho,
        })
    }

    /// The Cantor-like digit set {0, 2}; requires q >= 3.
    pub fn cantor(ctx: &FieldCtx) -> Result<Self> {
        Self::new(ctx, vec![ctx.zero(), ctx.from_u64(2)])
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn digits(&self) -> &[FieldElement] {
        &self.digits
    }

    pub fn digit_count(&self) -> usize {
        self.digits.len()
    }

    pub fn fingerprint(&self) -> u64 {
        self.fp
    }

    /// (#A)^r.
    pub fn cardinality(&self, ctx: &FieldCtx) -> u128 {
        (self.digits.len() as u128).pow(ctx.r() as u32)
    }

    /// Enumerate all of S_r(A).
    pub fn stream<'a>(&self, ctx: &'a FieldCtx) -> GrayStream<'a> {
        self.stream_range(ctx, 0, ctx.r())
    }

    /// Enumerate the span of basis coordinates [lo, hi) with digits in A.
    pub fn stream_range<'a>(&self, ctx: &'a FieldCtx, lo: usize, hi: usize) -> GrayStream<'a> {
        self.stream_range_offset(ctx, lo, hi, ctx.zero())
    }

    pub fn stream_range_offset<'a>(
        &self,
        ctx: &'a FieldCtx,
        lo: usize,
        hi: usize,
        offset: FieldElement,
    ) -> GrayStream<'a> {
        GrayStream::new(ctx, self.digits.clone(), ctx.basis()[lo..hi].to_vec(), offset)
    }

    /// Disjoint covering partition of the enumeration obtained by fixing the
    /// `levels` highest coordinates; (#A)^levels parts, in deterministic order.
    pub fn partitions<'a>(&self, ctx: &'a FieldCtx, levels: usize) -> Vec<GrayStream<'a>> {
        let r = ctx.r();
        let levels = levels.min(r);
        let top = self.stream_range(ctx, r - levels, r);
        top.map(|offset| self.stream_range_offset(ctx, 0, r - levels, offset))
            .collect()
    }
}

/// offset + F_q-span of independent generators.
#[derive(Clone, Debug)]
pub struct AffineSubspace {
    offset: FieldElement,
    span: Vec<FieldElement>,
}

impl AffineSubspace {
    pub fn new(ctx: &FieldCtx, offset: FieldElement, span: Vec<FieldElement>) -> Result<Self> {
        ctx.check(&offset)?;
        for s in &span {
            ctx.check(s)?;
        }
        if fq_rank(ctx, &span) != span.len() {
            return Err(Error::DependentBasis);
        }
        Ok(AffineSubspace { offset, span })
    }

    /// A single point.
    pub fn point(ctx: &FieldCtx, offset: FieldElement) -> Self {
        let _ = ctx;
        AffineSubspace {
            offset,
            span: Vec::new(),
        }
    }

    /// The whole field as a span of the context basis.
    pub fn full(ctx: &FieldCtx) -> Self {
        AffineSubspace {
            offset: ctx.zero(),
            span: ctx.basis().to_vec(),
        }
    }

    pub fn offset(&self) -> &FieldElement {
        &self.offset
    }

    pub fn span(&self) -> &[FieldElement] {
        &self.span
    }

    pub fn dim(&self) -> usize {
        self.span.len()
    }

    pub fn cardinality(&self, ctx: &FieldCtx) -> u128 {
        ctx.q().pow(self.span.len() as u32)
    }

    pub fn stream<'a>(&self, ctx: &'a FieldCtx) -> GrayStream<'a> {
        GrayStream::new(
            ctx,
            ctx.subfield_fq_elements(),
            self.span.clone(),
            self.offset.clone(),
        )
    }
}

/// F_q-rank of a set of elements, by elimination on their F_q coordinate
/// chunks.
fn fq_rank(ctx: &FieldCtx, els: &[FieldElement]) -> usize {
    let fq = ctx.fq_ctx();
    let k = ctx.k();
    let mut rows: Vec<Vec<crate::field::FqEl>> = els
        .iter()
        .map(|e| {
            (0..ctx.r())
                .map(|i| e.limbs()[i * k..(i + 1) * k].to_vec())
                .collect()
        })
        .collect();
    let mut rank = 0;
    for col in 0..ctx.r() {
        let Some(pivot) = (rank..rows.len()).find(|&i| !fq.is_zero_el(&rows[i][col])) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = fq.inv_el(&rows[rank][col]).expect("nonzero pivot");
        for c in 0..ctx.r() {
            rows[rank][c] = fq.mul_el(&rows[rank][c], &inv);
        }
        for i in 0..rows.len() {
            if i == rank || fq.is_zero_el(&rows[i][col]) {
                continue;
            }
            let f = rows[i][col].clone();
            for c in 0..ctx.r() {
                let t = fq.mul_el(&f, &rows[rank][c]);
                rows[i][c] = fq.sub_el(&rows[i][c], &t);
            }
        }
        rank += 1;
    }
    rank
}

/// Loopless mixed-radix reflected Gray enumeration of
/// offset + sum_i digits[d_i] * basis_i.
pub struct GrayStream<'a> {
    ctx: &'a FieldCtx,
    base: usize,
    n: usize,
    digit_idx: Vec<usize>,
    dirs: Vec<i8>,
    focus: Vec<usize>,
    current: FieldElement,
    /// deltas[i][j] = (digits[j+1] - digits[j]) * basis_i
    deltas: Vec<Vec<FieldElement>>,
    started: bool,
    exhausted: bool,
}

impl<'a> GrayStream<'a> {
    pub fn new(
        ctx: &'a FieldCtx,
        digits: Vec<FieldElement>,
        basis: Vec<FieldElement>,
        offset: FieldElement,
    ) -> Self {
        let base = digits.len();
        let n = basis.len();
        let mut current = offset;
        for b in &basis {
            current = ctx.add(&current, &ctx.mul(&digits[0], b));
        }
        let deltas = basis
            .iter()
            .map(|b| {
                (0..base.saturating_sub(1))
                    .map(|j| ctx.mul(&ctx.sub(&digits[j + 1], &digits[j]), b))
                    .collect()
            })
            .collect();
        GrayStream {
            ctx,
            base,
            n,
            digit_idx: vec![0; n],
            dirs: vec![1; n],
            focus: (0..=n).collect(),
            current,
            deltas,
            started: false,
            exhausted: false,
        }
    }

    /// Number of elements the stream will yield.
    pub fn cardinality(&self) -> u128 {
        (self.base as u128).pow(self.n as u32)
    }

    fn step(&mut self) -> bool {
        if self.base <= 1 || self.n == 0 {
            return false;
        }
        let j = self.focus[0];
        self.focus[0] = 0;
        if j == self.n {
            return false;
        }
        let o = self.dirs[j];
        let d = self.digit_idx[j];
        let nd = if o > 0 { d + 1 } else { d - 1 };
        if o > 0 {
            let delta = self.deltas[j][d].clone();
            self.ctx.add_assign(&mut self.current, &delta);
        } else {
            let delta = self.ctx.neg(&self.deltas[j][nd]);
            self.ctx.add_assign(&mut self.current, &delta);
        }
        self.digit_idx[j] = nd;
        if nd == 0 || nd == self.base - 1 {
            self.dirs[j] = -self.dirs[j];
            self.focus[j] = self.focus[j + 1];
            self.focus[j + 1] = j + 1;
        }
        true
    }

    /// Visit every element without cloning.
    pub fn for_each<F: FnMut(&FieldElement)>(mut self, mut f: F) {
        f(&self.current);
        while self.step() {
            f(&self.current);
        }
    }
}

impl<'a> Iterator for GrayStream<'a> {
    type Item = FieldElement;

    fn next(&mut self) -> Option<FieldElement> {
        if self.exhausted {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.current.clone());
        }
        if self.step() {
            Some(self.current.clone())
        } else {
            self.exhausted = true;
            None
        }
    }
}

/// The U/L/V decomposition at t = floor(tau * r): U restricts coordinates
/// 1..t to A, L is the F_q-span of the first t basis vectors, V restricts
/// the remaining coordinates to A.
#[derive(Clone, Debug)]
pub struct SplitDecomposition {
    spec: RestrictedSetSpec,
    pub tau: f64,
    pub t: usize,
}

impl SplitDecomposition {
    pub fn u_cardinality(&self) -> u128 {
        (self.spec.digit_count() as u128).pow(self.t as u32)
    }

    pub fn l_cardinality(&self, ctx: &FieldCtx) -> u128 {
        ctx.q().pow(self.t as u32)
    }

    pub fn v_cardinality(&self, ctx: &FieldCtx) -> u128 {
        (self.spec.digit_count() as u128).pow((ctx.r() - self.t) as u32)
    }

    pub fn u_stream<'a>(&self, ctx: &'a FieldCtx) -> GrayStream<'a> {
        self.spec.stream_range(ctx, 0, self.t)
    }

    pub fn v_stream<'a>(&self, ctx: &'a FieldCtx) -> GrayStream<'a> {
        self.spec.stream_range(ctx, self.t, ctx.r())
    }

    pub fn l_subspace(&self, ctx: &FieldCtx) -> AffineSubspace {
        AffineSubspace {
            offset: ctx.zero(),
            span: ctx.basis()[..self.t].to_vec(),
        }
    }

    pub fn spec(&self) -> &RestrictedSetSpec {
        &self.spec
    }
}

/// Split S_r(A) at t = floor(tau * r).
pub fn split_ulv(ctx: &FieldCtx, spec: &RestrictedSetSpec, tau: f64) -> Result<SplitDecomposition> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidArgument("tau must lie in [0, 1]".into()));
    }
    let t = (tau * ctx.r() as f64).floor() as usize;
    Ok(SplitDecomposition {
        spec: spec.clone(),
        tau,
        t: t.min(ctx.r()),
    })
}

use std::collections::{HashSet, VecDeque};

use crate::enumeration::{enumerate_product, Candidate, RangeContext};
use crate::linalg::{vectorize_unchecked, BipartiteDims};
use crate::states::ProductState;

/// Projector coordinates are compared on this grid when removing duplicates.
const DEDUP_SCALE: f64 = 1e9;

/// Distinct product states in enumeration order.
///
/// Full-rank mode walks the rational grid. Range mode walks the range
/// enumeration and, at the same index, keeps any grid vector lying inside the
/// support.
#[derive(Debug, Clone)]
pub(crate) struct ProductSource {
    dims: BipartiteDims,
    range: Option<RangeContext>,
    product_tol: f64,
    cursor: u64,
    range_exhausted: bool,
    queue: VecDeque<ProductState>,
    seen: HashSet<Vec<i64>>,
    indices_per_call: u64,
}

impl ProductSource {
    pub(crate) fn full(dims: BipartiteDims, product_tol: f64, indices_per_call: u64) -> Self {
        Self::build(dims, None, product_tol, indices_per_call)
    }

    pub(crate) fn range(ctx: RangeContext, product_tol: f64, indices_per_call: u64) -> Self {
        Self::build(ctx.dims(), Some(ctx), product_tol, indices_per_call)
    }

    fn build(
        dims: BipartiteDims,
        range: Option<RangeContext>,
        product_tol: f64,
        indices_per_call: u64,
    ) -> Self {
        Self {
            dims,
            range,
            product_tol,
            cursor: 0,
            range_exhausted: false,
            queue: VecDeque::new(),
            seen: HashSet::new(),
            indices_per_call,
        }
    }

    pub(crate) fn cursor(&self) -> u64 {
        self.cursor
    }

    /// Next distinct product state, trying at most `indices_per_call`
    /// enumeration indices.
    pub(crate) fn next(&mut self) -> Option<ProductState> {
        for _ in 0..self.indices_per_call {
            if let Some(p) = self.queue.pop_front() {
                return Some(p);
            }
            self.advance();
        }
        self.queue.pop_front()
    }

    fn advance(&mut self) {
        let i = self.cursor;
        self.cursor += 1;
        let grid = enumerate_product(i, self.dims).into_product();
        match &self.range {
            None => {
                if let Some(p) = grid {
                    self.offer(p);
                }
            }
            Some(ctx) => {
                let ranged = if self.range_exhausted {
                    None
                } else {
                    match ctx.enumerate(i, self.product_tol) {
                        Candidate::Product(p) => Some(p),
                        Candidate::Skip(crate::enumeration::SkipReason::Exhausted) => {
                            self.range_exhausted = true;
                            None
                        }
                        Candidate::Skip(_) => None,
                    }
                };
                let in_range =
                    grid.filter(|p| ctx.distance_from_range(&p.vector()) <= self.product_tol);
                for p in in_range.into_iter().chain(ranged) {
                    self.offer(p);
                }
            }
        }
    }

    fn offer(&mut self, p: ProductState) {
        let key: Vec<i64> = vectorize_unchecked(p.projector())
            .into_iter()
            .map(|x| (x * DEDUP_SCALE).round() as i64)
            .collect();
        if self.seen.insert(key) {
            self.queue.push_back(p);
        }
    }
}

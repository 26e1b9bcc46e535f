use serde::{Deserialize, Serialize};

use super::shell::{Shell, SlotKind};
use super::{
    coefficient_matrix, reduced_purity, Candidate, EnumerationError, RationalPhaseCoeff, SkipReason,
};
use crate::linalg::real::polynomial_roots;
use crate::linalg::{hermitian_eig, inner, normalized, BipartiteDims, C64, ZERO};
use crate::states::{DensityMatrix, ProductState};

/// Number of roots of the closing quartic.
const ROOT_SLOTS: u64 = 4;
/// Accepted deviation of a root modulus from 1.
const UNIT_CIRCLE_TOL: f64 = 1e-6;
/// Quartics with every coefficient below this vanish identically.
const ZERO_POLY_TOL: f64 = 1e-14;
const ROOT_REL_TOL: f64 = 1e-12;

/// Support of a state: its eigenvectors with eigenvalue above the cutoff,
/// ordered by decreasing eigenvalue.
#[derive(Debug, Clone)]
pub struct RangeContext {
    dims: BipartiteDims,
    basis: Vec<Vec<C64>>,
    shell: Shell,
}

impl RangeContext {
    pub fn new(rho: &DensityMatrix, cutoff: f64) -> Self {
        let eig = hermitian_eig(rho.matrix()).expect("density matrices are Hermitian");
        let basis: Vec<Vec<C64>> = (0..eig.dim())
            .rev()
            .filter(|&k| eig.eigenvalues[k] > cutoff)
            .map(|k| eig.eigenvector(k))
            .collect();
        let rank = basis.len();
        let shell = Shell::new(
            (0..rank.saturating_sub(1))
                .flat_map(|_| [SlotKind::Modulus, SlotKind::Phase])
                .chain(std::iter::once(SlotKind::Selector(ROOT_SLOTS)))
                .collect(),
        );
        Self {
            dims: rho.dims(),
            basis,
            shell,
        }
    }

    /// As [`RangeContext::new`], failing unless the numerical rank is `rank`.
    pub fn with_rank(
        rho: &DensityMatrix,
        rank: usize,
        cutoff: f64,
    ) -> Result<Self, EnumerationError> {
        let ctx = Self::new(rho, cutoff);
        if ctx.rank() != rank {
            return Err(EnumerationError::RankMismatch {
                expected: rank,
                actual: ctx.rank(),
            });
        }
        Ok(ctx)
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.dims.total()
    }

    pub fn basis(&self) -> &[Vec<C64>] {
        &self.basis
    }

    /// Convex decompositions inside the support need at most `rank^2` atoms.
    pub fn caratheodory_bound(&self) -> usize {
        self.rank() * self.rank()
    }

    /// Norm of the component of `psi` orthogonal to the support.
    pub fn distance_from_range(&self, psi: &[C64]) -> f64 {
        let mut residual = psi.to_vec();
        for phi in &self.basis {
            let c = inner(phi, psi);
            for (r, p) in residual.iter_mut().zip(phi) {
                *r -= c * p;
            }
        }
        residual.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Range index at flat position `index`; `None` once a finite index set
    /// (rank one) is exhausted.
    pub fn index(&self, index: u64) -> Option<RangeIndex> {
        let pos = self.shell.unrank(index)?;
        let free_count = self.rank().saturating_sub(1);
        let free = (0..free_count)
            .map(|j| {
                let (p, q) = SlotKind::Modulus.fraction_at(pos[2 * j]);
                let (r, s) = SlotKind::Phase.fraction_at(pos[2 * j + 1]);
                RationalPhaseCoeff { p, q, r, s }
            })
            .collect();
        Some(RangeIndex {
            rank: self.rank(),
            free,
            selector: pos[2 * free_count] as u8,
        })
    }

    pub fn enumerate(&self, index: u64, tol: f64) -> Candidate {
        match self.index(index) {
            Some(idx) => {
                enumerate_range_product(self, &idx, tol).expect("index built for this context")
            }
            None => Candidate::Skip(SkipReason::Exhausted),
        }
    }
}

/// Free coefficients `λ_1..λ_{r-1}` over the support basis plus the root
/// selector for the phase of the closing coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RangeIndex {
    pub rank: usize,
    pub free: Vec<RationalPhaseCoeff>,
    pub selector: u8,
}

/// Builds `ψ(w) = Σ_{i<r} λ_i φ_i + w·c·φ_r` with `c` fixed by normalization
/// and `w` the selected unit-modulus root of `w^2 Σ |minor_2x2(ψ(w))|^2`.
pub fn enumerate_range_product(
    ctx: &RangeContext,
    index: &RangeIndex,
    tol: f64,
) -> Result<Candidate, EnumerationError> {
    let rank = ctx.rank();
    if index.rank != rank || index.free.len() + 1 != rank.max(1) {
        return Err(EnumerationError::RankMismatch {
            expected: rank,
            actual: index.rank,
        });
    }
    if rank == 0 {
        return Ok(Candidate::Skip(SkipReason::Exhausted));
    }
    let dims = ctx.dims;
    let d = dims.total();

    let mut budget = 0.0;
    for c in &index.free {
        if c.p == 0 && c.r != 0 {
            return Ok(Candidate::Skip(SkipReason::RedundantPhase));
        }
        budget += c.modulus().powi(2);
    }
    if budget > 1.0 + 1e-15 {
        return Ok(Candidate::Skip(SkipReason::NormBudget));
    }
    let closing = (1.0 - budget).max(0.0).sqrt();

    let mut fixed = vec![ZERO; d];
    for (c, phi) in index.free.iter().zip(&ctx.basis) {
        let lambda = c.value();
        for (f, p) in fixed.iter_mut().zip(phi) {
            *f += lambda * p;
        }
    }
    let last = &ctx.basis[rank - 1];
    let moving: Vec<C64> = last.iter().map(|p| p * closing).collect();

    let w = if closing == 0.0 {
        if index.selector != 0 {
            return Ok(Candidate::Skip(SkipReason::RedundantPhase));
        }
        C64::new(1.0, 0.0)
    } else {
        let coeffs = minor_quartic(&fixed, &moving, dims);
        let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale <= ZERO_POLY_TOL {
            if index.selector != 0 {
                return Ok(Candidate::Skip(SkipReason::NoRoot));
            }
            C64::new(1.0, 0.0)
        } else {
            let mut roots = polynomial_roots(&coeffs, ROOT_REL_TOL);
            roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
            let Some(&root) = roots.get(index.selector as usize) else {
                return Ok(Candidate::Skip(SkipReason::NoRoot));
            };
            if (root.norm() - 1.0).abs() > UNIT_CIRCLE_TOL {
                return Ok(Candidate::Skip(SkipReason::OffUnitCircle));
            }
            root / root.norm()
        }
    };

    let psi: Vec<C64> = fixed.iter().zip(&moving).map(|(f, m)| f + w * m).collect();
    let psi = normalized(&psi);
    if reduced_purity(&psi, dims) < 1.0 - tol {
        return Ok(Candidate::Skip(SkipReason::NotProduct));
    }
    Ok(Candidate::Product(factor_product(&psi, dims)))
}

/// Coefficients (ascending powers) of `w^2 Σ |α + βw + γw^2|^2` on `|w| = 1`,
/// summed over all 2x2 minors of the reshaped `fixed + w·moving`.
fn minor_quartic(fixed: &[C64], moving: &[C64], dims: BipartiteDims) -> [C64; 5] {
    let u = coefficient_matrix(fixed, dims);
    let f = coefficient_matrix(moving, dims);
    let mut out = [ZERO; 5];
    for i in 0..dims.n {
        for k in (i + 1)..dims.n {
            for j in 0..dims.m {
                for l in (j + 1)..dims.m {
                    let alpha = u[(i, j)] * u[(k, l)] - u[(i, l)] * u[(k, j)];
                    let beta = u[(i, j)] * f[(k, l)] + f[(i, j)] * u[(k, l)]
                        - u[(i, l)] * f[(k, j)]
                        - f[(i, l)] * u[(k, j)];
                    let gamma = f[(i, j)] * f[(k, l)] - f[(i, l)] * f[(k, j)];
                    out[0] += alpha * gamma.conj();
                    out[1] += alpha * beta.conj() + beta * gamma.conj();
                    out[2] += alpha.norm_sqr() + beta.norm_sqr() + gamma.norm_sqr();
                    out[3] += beta * alpha.conj() + gamma * beta.conj();
                    out[4] += gamma * alpha.conj();
                }
            }
        }
    }
    out
}

/// Splits a (numerically) product vector into unit factors `a ⊗ b`.
pub fn factor_product(psi: &[C64], dims: BipartiteDims) -> ProductState {
    let m = coefficient_matrix(psi, dims);
    let row = (0..dims.n)
        .max_by(|&x, &y| {
            let nx: f64 = (0..dims.m).map(|j| m[(x, j)].norm_sqr()).sum();
            let ny: f64 = (0..dims.m).map(|j| m[(y, j)].norm_sqr()).sum();
            nx.total_cmp(&ny)
        })
        .expect("n >= 2");
    let b = normalized(&(0..dims.m).map(|j| m[(row, j)]).collect::<Vec<_>>());
    let a: Vec<C64> = (0..dims.n)
        .map(|i| (0..dims.m).map(|j| m[(i, j)] * b[j].conj()).sum())
        .collect();
    ProductState::new(normalized(&a), b).expect("normalized factors")
}

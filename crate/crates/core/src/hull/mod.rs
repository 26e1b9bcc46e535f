//! Convex hull membership for vectorized Hermitian operators.
//!
//! All tests work in the real coordinates of
//! [`vectorize_hermitian`](crate::linalg::vectorize_hermitian), so Euclidean
//! geometry here is Hilbert–Schmidt geometry on operators.
//!
//! Separating facets follow one convention throughout: every hull point `x`
//! satisfies `⟨normal, x⟩ >= offset` while the target has
//! `⟨normal, target⟩ < offset`.

mod certificate;
mod grow;
mod simplex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{devectorize_hermitian, vectorize_unchecked, ComplexMatrix};
use crate::states::ProductState;

pub use certificate::{extract_certificate, SeparableDecomposition};
pub use grow::{growing_hull_check, GrowingHull, HullDistance};
pub use simplex::{
    affinely_independent, affinely_independent_vectors, barycentric_membership,
    barycentric_vectors, facet_sign_membership, facet_sign_vectors,
};

/// Default membership tolerance in Hilbert–Schmidt distance.
pub const HULL_TOL: f64 = 1e-8;
/// Band around a facet inside which the sign test reports `Degenerate`.
pub const DEGENERATE_TOL: f64 = 1e-9;
/// Barycentric weights above `-WEIGHT_TOL` count as nonnegative.
pub const WEIGHT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HullError {
    #[error("tuple holds {len} elements but its bound is {bound}")]
    TupleTooLong { len: usize, bound: usize },
    #[error("membership test needs exactly {bound} elements, got {len}")]
    WrongTupleSize { len: usize, bound: usize },
    #[error("tuple elements are affinely dependent")]
    AffinelyDependent,
    #[error("empty point set")]
    Empty,
    #[error("points have {found} coordinates, target has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("weights and points differ in length ({weights} vs {points})")]
    WeightCount { weights: usize, points: usize },
    #[error("certificate residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
}

pub type Result<T> = std::result::Result<T, HullError>;

/// Up to `bound` product states; the candidate vertices of one simplex.
#[derive(Debug, Clone)]
pub struct Tuple {
    elements: Vec<ProductState>,
    bound: usize,
}

impl Tuple {
    pub fn new(elements: Vec<ProductState>, bound: usize) -> Result<Self> {
        if elements.len() > bound {
            return Err(HullError::TupleTooLong {
                len: elements.len(),
                bound,
            });
        }
        Ok(Self { elements, bound })
    }

    pub fn elements(&self) -> &[ProductState] {
        &self.elements
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub(crate) fn vectors(&self) -> Vec<Vec<f64>> {
        self.elements
            .iter()
            .map(|e| vectorize_unchecked(e.projector()))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    In,
    Out,
    Degenerate,
}

/// Affine functional `x ↦ ⟨normal, x⟩` with hull points at or above `offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatingFacet {
    /// Normal in vectorized coordinates.
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl SeparatingFacet {
    pub fn value(&self, x: &[f64]) -> f64 {
        crate::linalg::real::dot(&self.normal, x)
    }

    /// `Tr[ξ X]` for a Hermitian operator `X`.
    pub fn evaluate(&self, x: &ComplexMatrix) -> f64 {
        self.value(&vectorize_unchecked(x))
    }

    /// The normal as a Hermitian operator.
    pub fn operator(&self) -> ComplexMatrix {
        devectorize_hermitian(&self.normal).expect("normal has d^2 coordinates")
    }

    pub(crate) fn normalized(mut self) -> Self {
        let n = crate::linalg::real::norm(&self.normal);
        if n > 0.0 {
            self.normal.iter_mut().for_each(|x| *x /= n);
            self.offset /= n;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipResult {
    pub verdict: Membership,
    pub weights: Option<Vec<f64>>,
    pub separating_facet: Option<SeparatingFacet>,
}

impl MembershipResult {
    pub(crate) fn inside(weights: Vec<f64>) -> Self {
        Self {
            verdict: Membership::In,
            weights: Some(weights),
            separating_facet: None,
        }
    }

    pub(crate) fn outside(facet: SeparatingFacet) -> Self {
        Self {
            verdict: Membership::Out,
            weights: None,
            separating_facet: Some(facet.normalized()),
        }
    }

    pub(crate) fn degenerate() -> Self {
        Self {
            verdict: Membership::Degenerate,
            weights: None,
            separating_facet: None,
        }
    }

    pub fn is_in(&self) -> bool {
        self.verdict == Membership::In
    }
}

pub(crate) fn check_dims(points: &[Vec<f64>], target: &[f64]) -> Result<()> {
    if points.is_empty() {
        return Err(HullError::Empty);
    }
    for p in points {
        if p.len() != target.len() {
            return Err(HullError::DimensionMismatch {
                expected: target.len(),
                found: p.len(),
            });
        }
    }
    Ok(())
}

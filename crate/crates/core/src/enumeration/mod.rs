//! Countable grid of product states with rational coefficients.
//!
//! A factor vector on `C^n` is written as
//!
//! ```text
//! v_0 = sqrt(1 - Σ_j (p_j/q_j)^2) · e^{2πi r_0/s_0}
//! v_j = (p_j/q_j) · e^{2πi r_j/s_j}          j = 1..n-1
//! ```
//!
//! so the all-zero tuple gives the basis vector `|0⟩`. A product index holds
//! one such tuple per factor. Indices are ranked by the largest denominator
//! they use (see [`shell`]), which places small-denominator states first.
//!
//! Range mode works inside the support of a rank-deficient state: vectors
//! `Σ λ_i φ_i` over its eigenvectors, where the last coefficient's phase is
//! chosen among the roots of the quartic that makes every 2x2 minor of the
//! reshaped vector vanish.

mod range;
pub(crate) mod shell;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    inner, partial_trace_raw, reshape_bipartite, BipartiteDims, ComplexMatrix, Subsystem, C64,
};
use crate::states::{gcd, ProductState, PureState};
use shell::{Shell, SlotKind};

pub use range::{enumerate_range_product, factor_product, RangeContext, RangeIndex};

/// Default purity tolerance for [`is_product`].
pub const PRODUCT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnumerationError {
    #[error("vectors live in different dimensions ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },
    #[error("state has numerical rank {actual}, expected {expected}")]
    RankMismatch { expected: usize, actual: usize },
    #[error("invalid coefficient {0}")]
    InvalidCoefficient(String),
}

/// `(p/q) · exp(2πi r/s)` with both fractions in lowest terms, `p <= q` and
/// `r < s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalPhaseCoeff {
    pub p: u64,
    pub q: u64,
    pub r: u64,
    pub s: u64,
}

impl RationalPhaseCoeff {
    /// Reduces both fractions and folds the phase into `[0, 1)`.
    pub fn new(p: u64, q: u64, r: u64, s: u64) -> Result<Self, EnumerationError> {
        if q == 0 || s == 0 || p > q {
            return Err(EnumerationError::InvalidCoefficient(format!(
                "{p}/{q} e^(2πi {r}/{s})"
            )));
        }
        let (p, q) = reduce(p, q);
        let (r, s) = reduce(r % s, s);
        Ok(Self { p, q, r, s })
    }

    pub fn modulus(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn value(&self) -> C64 {
        unit_phase(self.r, self.s) * self.modulus()
    }

    pub fn max_denominator(&self) -> u64 {
        self.q.max(self.s)
    }
}

impl fmt::Display for RationalPhaseCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}·e^(2πi·{}/{})", self.p, self.q, self.r, self.s)
    }
}

fn reduce(a: u64, b: u64) -> (u64, u64) {
    if a == 0 {
        return (0, 1);
    }
    let g = gcd(a, b);
    (a / g, b / g)
}

/// `exp(2πi r/s)`, exact at multiples of a quarter turn.
pub fn unit_phase(r: u64, s: u64) -> C64 {
    let r = r % s;
    if (4 * r) % s == 0 {
        return match 4 * r / s {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
    }
    let angle = 2.0 * std::f64::consts::PI * (r as f64 / s as f64);
    C64::new(libm::cos(angle), libm::sin(angle))
}

/// Rational data for one tensor factor of dimension `free.len() + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactorIndex {
    pub free: Vec<RationalPhaseCoeff>,
    /// Phase `(r, s)` of the closing coefficient on `|0⟩`.
    pub closing_phase: (u64, u64),
}

impl FactorIndex {
    pub fn dim(&self) -> usize {
        self.free.len() + 1
    }

    pub fn max_denominator(&self) -> u64 {
        self.free
            .iter()
            .map(RationalPhaseCoeff::max_denominator)
            .chain(std::iter::once(self.closing_phase.1))
            .max()
            .unwrap_or(1)
    }

    /// Builds the factor vector, or the reason it is excluded from the grid.
    pub fn vector(&self) -> Result<Vec<C64>, SkipReason> {
        for c in &self.free {
            if c.p == 0 && c.r != 0 {
                return Err(SkipReason::RedundantPhase);
            }
        }
        // Σ (p/q)^2 as an exact fraction.
        let mut num: u128 = 0;
        let mut den: u128 = 1;
        for c in &self.free {
            let (p2, q2) = ((c.p as u128).pow(2), (c.q as u128).pow(2));
            num = num * q2 + p2 * den;
            den *= q2;
            let g = gcd_u128(num, den);
            num /= g;
            den /= g;
        }
        if num > den {
            return Err(SkipReason::NormBudget);
        }
        let rest = den - num;
        let (r0, s0) = self.closing_phase;
        if rest == 0 && r0 != 0 {
            return Err(SkipReason::RedundantPhase);
        }
        let closing = (rest as f64 / den as f64).sqrt();
        let mut v = Vec::with_capacity(self.dim());
        v.push(unit_phase(r0, s0) * closing);
        v.extend(self.free.iter().map(RationalPhaseCoeff::value));
        Ok(v)
    }

    fn slots(dim: usize) -> impl Iterator<Item = SlotKind> {
        (0..dim - 1)
            .flat_map(|_| [SlotKind::Modulus, SlotKind::Phase])
            .chain(std::iter::once(SlotKind::Phase))
    }

    fn from_positions(dim: usize, pos: &[u64]) -> Self {
        let free = (0..dim - 1)
            .map(|j| {
                let (p, q) = SlotKind::Modulus.fraction_at(pos[2 * j]);
                let (r, s) = SlotKind::Phase.fraction_at(pos[2 * j + 1]);
                RationalPhaseCoeff { p, q, r, s }
            })
            .collect();
        FactorIndex {
            free,
            closing_phase: SlotKind::Phase.fraction_at(pos[2 * (dim - 1)]),
        }
    }

    fn positions(&self) -> Option<Vec<u64>> {
        let mut out = Vec::with_capacity(2 * self.free.len() + 1);
        for c in &self.free {
            out.push(SlotKind::Modulus.position_of(c.p, c.q)?);
            out.push(SlotKind::Phase.position_of(c.r, c.s)?);
        }
        let (r, s) = self.closing_phase;
        out.push(SlotKind::Phase.position_of(r, s)?);
        Some(out)
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Rational data addressing one grid product state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProductIndex {
    pub a: FactorIndex,
    pub b: FactorIndex,
}

impl ProductIndex {
    pub fn dims(&self) -> BipartiteDims {
        BipartiteDims {
            n: self.a.dim(),
            m: self.b.dim(),
        }
    }

    /// Largest denominator over all slots; the enumeration level.
    pub fn height(&self) -> u64 {
        self.a.max_denominator().max(self.b.max_denominator())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SkipReason {
    /// Free moduli exceed the unit norm.
    NormBudget,
    /// A phase attached to a zero coefficient.
    RedundantPhase,
    /// Grid vector outside the support of the target.
    NotInRange,
    /// Root selector beyond the number of roots.
    NoRoot,
    /// Selected root is off the unit circle.
    OffUnitCircle,
    /// Purity below `1 - tol`.
    NotProduct,
    /// Finite index set already exhausted.
    Exhausted,
}

#[derive(Debug, Clone)]
pub enum Candidate {
    Product(ProductState),
    Skip(SkipReason),
}

impl Candidate {
    pub fn into_product(self) -> Option<ProductState> {
        match self {
            Candidate::Product(p) => Some(p),
            Candidate::Skip(_) => None,
        }
    }

    pub fn is_skip(&self) -> bool {
        matches!(self, Candidate::Skip(_))
    }
}

fn product_shell(dims: BipartiteDims) -> Shell {
    Shell::new(
        FactorIndex::slots(dims.n)
            .chain(FactorIndex::slots(dims.m))
            .collect(),
    )
}

/// Rational data at position `index` of the enumeration.
pub fn product_index(index: u64, dims: BipartiteDims) -> ProductIndex {
    let pos = product_shell(dims)
        .unrank(index)
        .expect("product shells are infinite");
    let split = 2 * dims.n - 1;
    ProductIndex {
        a: FactorIndex::from_positions(dims.n, &pos[..split]),
        b: FactorIndex::from_positions(dims.m, &pos[split..]),
    }
}

/// Position of the given rational data in the enumeration, if it is in
/// canonical form.
pub fn index_of(index: &ProductIndex) -> Option<u64> {
    let mut pos = index.a.positions()?;
    pos.extend(index.b.positions()?);
    product_shell(index.dims()).rank(&pos)
}

/// Number of indices whose height is at most `max_den`.
pub fn indices_up_to_height(max_den: u64, dims: BipartiteDims) -> u128 {
    product_shell(dims).total(max_den)
}

pub fn product_from_index(index: &ProductIndex) -> Candidate {
    let a = match index.a.vector() {
        Ok(v) => v,
        Err(reason) => return Candidate::Skip(reason),
    };
    let b = match index.b.vector() {
        Ok(v) => v,
        Err(reason) => return Candidate::Skip(reason),
    };
    Candidate::Product(ProductState::new(a, b).expect("grid factors are unit vectors"))
}

/// The grid product state at position `index`, or why the index is skipped.
pub fn enumerate_product(index: u64, dims: BipartiteDims) -> Candidate {
    product_from_index(&product_index(index, dims))
}

/// `sqrt(2 (1 - Re⟨ψ|φ⟩))`.
pub fn vector_distance(psi: &PureState, phi: &PureState) -> Result<f64, EnumerationError> {
    raw_vector_distance(psi.amplitudes(), phi.amplitudes())
}

pub(crate) fn raw_vector_distance(psi: &[C64], phi: &[C64]) -> Result<f64, EnumerationError> {
    if psi.len() != phi.len() {
        return Err(EnumerationError::DimensionMismatch {
            left: psi.len(),
            right: phi.len(),
        });
    }
    Ok(distance_from_overlap(inner(psi, phi).re))
}

fn distance_from_overlap(re: f64) -> f64 {
    (2.0 * (1.0 - re)).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductTest {
    pub is_product: bool,
    /// `Tr[(Tr_B |ψ⟩⟨ψ|)^2]`.
    pub purity: f64,
}

pub fn is_product(psi: &PureState, tol: f64) -> ProductTest {
    let purity = reduced_purity(psi.amplitudes(), psi.dims());
    ProductTest {
        is_product: purity >= 1.0 - tol,
        purity,
    }
}

pub(crate) fn reduced_purity(psi: &[C64], dims: BipartiteDims) -> f64 {
    let rho = ComplexMatrix::projector(psi);
    let reduced =
        partial_trace_raw(&rho, dims.n, dims.m, Subsystem::A).expect("vector length matches dims");
    reduced.as_slice().iter().map(|z| z.norm_sqr()).sum()
}

/// All grid vectors of one factor with every denominator `<= max_den`.
pub fn factor_grid(dim: usize, max_den: u64) -> Vec<(FactorIndex, Vec<C64>)> {
    let shell = Shell::new(FactorIndex::slots(dim).collect());
    let total = shell.total(max_den) as u64;
    (0..total)
        .filter_map(|i| {
            let pos = shell.unrank(i)?;
            let idx = FactorIndex::from_positions(dim, &pos);
            idx.vector().ok().map(|v| (idx, v))
        })
        .collect()
}

/// Grid product state closest to `psi` in [`vector_distance`], over all
/// indices of height `<= max_den`.
///
/// The overlap factorizes as `⟨g|a⟩⟨h|b⟩`, so for each A-side overlap `x`
/// only the vertices of the convex hull of the B-side overlaps need to be
/// tried.
pub fn nearest_in_grid(psi: &ProductState, max_den: u64) -> (ProductState, ProductIndex, f64) {
    let dims = psi.dims();
    let grid_a = factor_grid(dims.n, max_den.max(1));
    let grid_b = factor_grid(dims.m, max_den.max(1));
    let xs: Vec<C64> = grid_a.iter().map(|(_, g)| inner(g, psi.a())).collect();
    let ys: Vec<C64> = grid_b.iter().map(|(_, h)| inner(h, psi.b())).collect();
    let hull = convex_hull_2d(&ys);

    let mut best = (f64::NEG_INFINITY, 0, 0);
    for (i, x) in xs.iter().enumerate() {
        for &j in &hull {
            let re = (x * ys[j]).re;
            if re > best.0 {
                best = (re, i, j);
            }
        }
    }
    let (re, i, j) = best;
    let (idx_a, a) = grid_a[i].clone();
    let (idx_b, b) = grid_b[j].clone();
    let state = ProductState::new(a, b).expect("grid factors are unit vectors");
    (
        state,
        ProductIndex { a: idx_a, b: idx_b },
        distance_from_overlap(re),
    )
}

/// Indices of the convex hull vertices (monotone chain).
fn convex_hull_2d(points: &[C64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        points[i]
            .re
            .total_cmp(&points[j].re)
            .then(points[i].im.total_cmp(&points[j].im))
    });
    if order.len() < 3 {
        return order;
    }
    let cross = |o: usize, a: usize, b: usize| {
        let (o, a, b) = (points[o], points[a], points[b]);
        (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
    };
    let mut hull: Vec<usize> = Vec::with_capacity(2 * order.len());
    for &i in order.iter().chain(order.iter().rev().skip(1)) {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], i) <= 0.0 {
            hull.pop();
        }
        hull.push(i);
    }
    hull.pop();
    hull.sort_unstable();
    hull.dedup();
    hull
}

/// Rebuilds a state vector `|a⟩ ⊗ |b⟩` as an `n x m` coefficient matrix.
pub(crate) fn coefficient_matrix(psi: &[C64], dims: BipartiteDims) -> ComplexMatrix {
    reshape_bipartite(psi, dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hs_distance, kron_vec, normalized};

    fn dims22() -> BipartiteDims {
        BipartiteDims::new(2, 2).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn first_index_is_ground_product() {
        let s = enumerate_product(0, dims22()).into_product().unwrap();
        assert_eq!(s.a(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(s.b(), &[c(1.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn first_four_are_computational_basis() {
        let mut diag = Vec::new();
        for i in 0..4 {
            let s = enumerate_product(i, dims22()).into_product().unwrap();
            let p = s.projector();
            let k = (0..4)
                .find(|&k| (p[(k, k)].re - 1.0).abs() < 1e-15)
                .unwrap();
            diag.push(k);
        }
        diag.sort();
        assert_eq!(diag, vec![0, 1, 2, 3]);
        assert_eq!(indices_up_to_height(1, dims22()), 4);
    }

    #[test]
    fn half_modulus_closes_at_root_three_over_two() {
        let f = FactorIndex {
            free: vec![RationalPhaseCoeff::new(1, 2, 0, 1).unwrap()],
            closing_phase: (0, 1),
        };
        let v = f.vector().unwrap();
        assert!((v[0].norm() - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((v[1].norm() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn over_budget_is_skipped() {
        // (1/2)^2 + (1/1)^2 = 5/4
        let f = FactorIndex {
            free: vec![
                RationalPhaseCoeff::new(1, 2, 0, 1).unwrap(),
                RationalPhaseCoeff::new(1, 1, 0, 1).unwrap(),
            ],
            closing_phase: (0, 1),
        };
        assert_eq!(f.vector(), Err(SkipReason::NormBudget));
    }

    #[test]
    fn redundant_phases_are_skipped() {
        let zero_with_phase = FactorIndex {
            free: vec![RationalPhaseCoeff::new(0, 1, 1, 2).unwrap()],
            closing_phase: (0, 1),
        };
        assert_eq!(zero_with_phase.vector(), Err(SkipReason::RedundantPhase));
        let closed_with_phase = FactorIndex {
            free: vec![RationalPhaseCoeff::new(1, 1, 0, 1).unwrap()],
            closing_phase: (1, 2),
        };
        assert_eq!(closed_with_phase.vector(), Err(SkipReason::RedundantPhase));
    }

    #[test]
    fn coefficient_reduction() {
        let c = RationalPhaseCoeff::new(2, 4, 5, 4).unwrap();
        assert_eq!((c.p, c.q, c.r, c.s), (1, 2, 1, 4));
        assert!(RationalPhaseCoeff::new(3, 2, 0, 1).is_err());
        assert!((c.value() - C64::new(0.0, 0.5)).norm() < 1e-16);
    }

    #[test]
    fn index_round_trip() {
        let dims = BipartiteDims::new(2, 3).unwrap();
        for i in (0..200_000).step_by(997) {
            let idx = product_index(i, dims);
            assert_eq!(index_of(&idx), Some(i));
        }
    }

    #[test]
    fn vector_distance_cases() {
        let d = dims22();
        let e0 =
            PureState::new(d, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let e1 =
            PureState::new(d, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let minus =
            PureState::new(d, vec![c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(vector_distance(&e0, &e0).unwrap(), 0.0);
        assert!((vector_distance(&e0, &e1).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((vector_distance(&e0, &minus).unwrap() - 2.0).abs() < 1e-15);
        assert!(hs_distance(&e0.projector(), &minus.projector()).unwrap() < 1e-15);
        let other = PureState::new(BipartiteDims::new(2, 3).unwrap(), {
            let mut v = vec![c(0.0, 0.0); 6];
            v[0] = c(1.0, 0.0);
            v
        })
        .unwrap();
        assert!(vector_distance(&e0, &other).is_err());
    }

    #[test]
    fn product_test_cases() {
        let d = dims22();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let e01 =
            PureState::new(d, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let t = is_product(&e01, PRODUCT_TOL);
        assert!(t.is_product && (t.purity - 1.0).abs() < 1e-15);
        let bell = PureState::new(d, vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]).unwrap();
        let t = is_product(&bell, PRODUCT_TOL);
        assert!(!t.is_product && (t.purity - 0.5).abs() < 1e-15);
        let plus = PureState::new(d, vec![c(s, 0.0), c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(is_product(&plus, PRODUCT_TOL).is_product);
    }

    #[test]
    fn grid_member_found_exactly() {
        let zero = vec![c(1.0, 0.0), c(0.0, 0.0)];
        let target = ProductState::new(zero.clone(), zero).unwrap();
        let (found, _, dist) = nearest_in_grid(&target, 1);
        assert!(dist < 1e-7);
        assert!(hs_distance(found.projector(), target.projector()).unwrap() < 1e-12);
    }

    /// Exhaustive sweep over every product index up to the height.
    fn brute_nearest(psi: &ProductState, max_den: u64) -> f64 {
        let total = indices_up_to_height(max_den, psi.dims()) as u64;
        let target = psi.vector();
        (0..total)
            .filter_map(|i| enumerate_product(i, psi.dims()).into_product())
            .map(|g| raw_vector_distance(&g.vector(), &target).unwrap())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn nearest_matches_exhaustive_sweep() {
        let dims = dims22();
        let samples = [
            (
                vec![c(0.6, 0.1), c(-0.3, 0.7)],
                vec![c(0.2, -0.5), c(0.8, 0.1)],
            ),
            (
                vec![c(0.1, 0.9), c(0.4, 0.0)],
                vec![c(-0.7, 0.0), c(0.1, 0.3)],
            ),
        ];
        for (a, b) in samples {
            let psi = ProductState::new(normalized(&a), normalized(&b)).unwrap();
            assert_eq!(psi.dims(), dims);
            for q in 1..=3 {
                let (g, idx, dist) = nearest_in_grid(&psi, q);
                let want = brute_nearest(&psi, q);
                assert!((dist - want).abs() < 1e-12, "q={q}: {dist} vs {want}");
                assert!(idx.height() <= q);
                let direct = raw_vector_distance(&g.vector(), &kron_vec(psi.a(), psi.b())).unwrap();
                assert!((direct - dist).abs() < 1e-12);
            }
        }
    }
}

use super::{
    check_dims, HullError, Membership, MembershipResult, Result, SeparatingFacet, Tuple, WEIGHT_TOL,
};
use crate::linalg::real::{
    dot, norm, orthogonal_residual, orthonormal_basis, pseudo_inverse, rank, sub,
};
use crate::linalg::{vectorize_unchecked, ComplexMatrix};
use nalgebra::{DMatrix, DVector};

/// Relative singular value cutoff for rank decisions on difference vectors.
const RANK_TOL: f64 = 1e-10;

/// Whether the differences `x_i - x_0` have full rank.
pub fn affinely_independent_vectors(points: &[Vec<f64>], tol: f64) -> bool {
    if points.len() <= 1 {
        return !points.is_empty();
    }
    let diffs = difference_matrix(points);
    if diffs.nrows() < diffs.ncols() {
        return false;
    }
    rank(&diffs, tol) == points.len() - 1
}

pub fn affinely_independent(tuple: &Tuple, tol: f64) -> bool {
    affinely_independent_vectors(&tuple.vectors(), tol)
}

fn difference_matrix(points: &[Vec<f64>]) -> DMatrix<f64> {
    let base = &points[0];
    DMatrix::from_fn(base.len(), points.len() - 1, |i, j| {
        points[j + 1][i] - base[i]
    })
}

fn check_tuple(tuple: &Tuple) -> Result<()> {
    if tuple.len() != tuple.bound() {
        return Err(HullError::WrongTupleSize {
            len: tuple.len(),
            bound: tuple.bound(),
        });
    }
    Ok(())
}

/// Facet-sign test of `target` against the simplex spanned by `tuple`.
///
/// For each vertex, the facet through the other vertices gets a normal inside
/// the simplex's affine span; the target is inside iff it lies on the same
/// side of every facet as the left-out vertex. A target farther than `tol`
/// from the affine span is reported outside.
pub fn facet_sign_membership(
    target: &ComplexMatrix,
    tuple: &Tuple,
    tol: f64,
) -> Result<MembershipResult> {
    check_tuple(tuple)?;
    facet_sign_vectors(
        &tuple.vectors(),
        &vectorize_unchecked(&target.symmetrized()),
        tol,
    )
}

pub fn facet_sign_vectors(
    points: &[Vec<f64>],
    target: &[f64],
    tol: f64,
) -> Result<MembershipResult> {
    check_dims(points, target)?;
    if !affinely_independent_vectors(points, RANK_TOL) {
        return Err(HullError::AffinelyDependent);
    }
    let k = points.len();
    let base = &points[0];
    let spans: Vec<Vec<f64>> = points[1..].iter().map(|p| sub(p, base)).collect();
    let span_basis = orthonormal_basis(&spans, 1e-12);
    let off_span = orthogonal_residual(&span_basis, &sub(target, base));
    if norm(&off_span) > tol {
        return Ok(MembershipResult::outside(off_span_facet(&off_span, base)));
    }
    if k == 1 {
        return Ok(MembershipResult::inside(vec![1.0]));
    }

    let mut weights = Vec::with_capacity(k);
    let mut worst: Option<(f64, SeparatingFacet)> = None;
    let mut degenerate = false;
    for r in 0..k {
        let facet: Vec<usize> = (0..k).filter(|&i| i != r).collect();
        let anchor = &points[facet[0]];
        let edges: Vec<Vec<f64>> = facet[1..]
            .iter()
            .map(|&j| sub(&points[j], anchor))
            .collect();
        let basis = orthonormal_basis(&edges, 1e-12);
        let mut normal = orthogonal_residual(&basis, &sub(&points[r], anchor));
        let len = norm(&normal);
        normal.iter_mut().for_each(|x| *x /= len);
        let vertex_side = dot(&normal, &sub(&points[r], anchor));
        let target_side = dot(&normal, &sub(target, anchor));
        if target_side.abs() < tol {
            degenerate = true;
        } else if target_side < 0.0 && worst.as_ref().map_or(true, |(s, _)| target_side < *s) {
            let offset = dot(&normal, anchor);
            worst = Some((target_side, SeparatingFacet { normal, offset }));
        }
        weights.push(target_side / vertex_side);
    }
    if let Some((_, facet)) = worst {
        return Ok(MembershipResult::outside(facet));
    }
    if degenerate {
        return Ok(MembershipResult::degenerate());
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(MembershipResult::inside(weights))
}

fn off_span_facet(residual: &[f64], base: &[f64]) -> SeparatingFacet {
    let normal: Vec<f64> = residual.iter().map(|x| -x).collect();
    let offset = dot(&normal, base);
    SeparatingFacet { normal, offset }
}

/// Barycentric coordinates of `target` from a pseudo-inverse solve.
pub fn barycentric_membership(
    target: &ComplexMatrix,
    tuple: &Tuple,
    tol: f64,
) -> Result<MembershipResult> {
    check_tuple(tuple)?;
    barycentric_vectors(
        &tuple.vectors(),
        &vectorize_unchecked(&target.symmetrized()),
        tol,
    )
}

/// Solves `Σ w_i x_i = target`, `Σ w_i = 1`. Inside iff every `w_i >= -1e-10`;
/// weights are then clamped and renormalized. Outside, the facet is the
/// affine functional giving the most negative coordinate.
pub fn barycentric_vectors(
    points: &[Vec<f64>],
    target: &[f64],
    tol: f64,
) -> Result<MembershipResult> {
    check_dims(points, target)?;
    let k = points.len();
    let base = &points[0];
    if k == 1 {
        let diff = sub(target, base);
        if norm(&diff) > tol {
            return Ok(MembershipResult::outside(off_span_facet(&diff, base)));
        }
        return Ok(MembershipResult::inside(vec![1.0]));
    }
    let diffs = difference_matrix(points);
    if diffs.nrows() < diffs.ncols() || rank(&diffs, RANK_TOL) != k - 1 {
        return Err(HullError::AffinelyDependent);
    }
    let pinv = pseudo_inverse(&diffs, 1e-12);
    let rhs = DVector::from_vec(sub(target, base));
    let coords = &pinv * &rhs;
    let residual = &rhs - &diffs * &coords;
    if residual.norm() > tol {
        let r: Vec<f64> = residual.iter().copied().collect();
        return Ok(MembershipResult::outside(off_span_facet(&r, base)));
    }
    let mut weights = Vec::with_capacity(k);
    weights.push(1.0 - coords.sum());
    weights.extend(coords.iter().copied());

    let (worst, &min_w) = weights
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("k >= 2");
    if min_w >= -WEIGHT_TOL {
        let mut w: Vec<f64> = weights.iter().map(|x| x.max(0.0)).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        return Ok(MembershipResult::inside(w));
    }
    // w_r(x) = g_r · (x - x_0) for r >= 1 and w_0 = 1 - Σ_r w_r.
    let row = |r: usize| -> Vec<f64> { pinv.row(r).iter().copied().collect() };
    let (normal, offset) = if worst == 0 {
        let mut g = vec![0.0; target.len()];
        for r in 0..k - 1 {
            for (gi, x) in g.iter_mut().zip(row(r)) {
                *gi -= x;
            }
        }
        let offset = dot(&g, base) - 1.0;
        (g, offset)
    } else {
        let g = row(worst - 1);
        let offset = dot(&g, base);
        (g, offset)
    };
    let result = MembershipResult::outside(SeparatingFacet { normal, offset });
    debug_assert_eq!(result.verdict, Membership::Out);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{BipartiteDims, C64};
    use crate::states::ProductState;

    fn computational(i: usize) -> ProductState {
        let e = |k: usize| {
            let mut v = vec![C64::new(0.0, 0.0); 2];
            v[k] = C64::new(1.0, 0.0);
            v
        };
        ProductState::new(e(i / 2), e(i % 2)).unwrap()
    }

    fn simplex_2d() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]
    }

    #[test]
    fn independence_cases() {
        let pts: Vec<ProductState> = (0..4).map(computational).collect();
        let t = Tuple::new(pts.clone(), 16).unwrap();
        assert!(affinely_independent(&t, 1e-10));
        let repeated = Tuple::new(vec![pts[0].clone(), pts[0].clone()], 16).unwrap();
        assert!(!affinely_independent(&repeated, 1e-10));
        let collinear = vec![vec![0.0, 0.0], vec![2.0, 1.0], vec![1.0, 0.5]];
        assert!(!affinely_independent_vectors(&collinear, 1e-10));
        assert!(affinely_independent_vectors(&simplex_2d(), 1e-10));
        assert!(Tuple::new(pts, 3).is_err());
    }

    #[test]
    fn centroid_is_inside() {
        let pts = simplex_2d();
        let c = vec![1.0 / 3.0, 1.0 / 3.0];
        for res in [
            facet_sign_vectors(&pts, &c, 1e-9).unwrap(),
            barycentric_vectors(&pts, &c, 1e-9).unwrap(),
        ] {
            assert!(res.is_in());
            for w in res.weights.unwrap() {
                assert!((w - 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn vertex_gets_unit_weight() {
        let pts = simplex_2d();
        let res = barycentric_vectors(&pts, &pts[2], 1e-9).unwrap();
        let w = res.weights.unwrap();
        assert!((w[2] - 1.0).abs() < 1e-12 && w[0].abs() < 1e-12 && w[1].abs() < 1e-12);
    }

    #[test]
    fn reflected_point_outside_past_first_vertex_facet() {
        let pts = simplex_2d();
        let c = [1.0 / 3.0, 1.0 / 3.0];
        let reflected = vec![2.0 * pts[0][0] - c[0], 2.0 * pts[0][1] - c[1]];
        for res in [
            facet_sign_vectors(&pts, &reflected, 1e-9).unwrap(),
            barycentric_vectors(&pts, &reflected, 1e-9).unwrap(),
        ] {
            assert_eq!(res.verdict, Membership::Out);
            let f = res.separating_facet.unwrap();
            assert!(f.value(&reflected) < f.offset);
            for p in &pts {
                assert!(f.value(p) >= f.offset - 1e-12);
            }
            // The point sits beyond vertex 0, so the separating facet contains it.
            assert!((f.value(&pts[0]) - f.offset).abs() < 1e-12);
        }
    }

    #[test]
    fn facet_band_is_degenerate() {
        let pts = simplex_2d();
        let on_edge = vec![0.5, 0.0];
        let res = facet_sign_vectors(&pts, &on_edge, 1e-9).unwrap();
        assert_eq!(res.verdict, Membership::Degenerate);
    }

    #[test]
    fn off_span_target_is_outside() {
        let pts = vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ];
        let target = vec![0.2, 0.2, 0.1];
        for res in [
            facet_sign_vectors(&pts, &target, 1e-9).unwrap(),
            barycentric_vectors(&pts, &target, 1e-9).unwrap(),
        ] {
            assert_eq!(res.verdict, Membership::Out);
            let f = res.separating_facet.unwrap();
            assert!(f.value(&target) < f.offset);
        }
    }

    #[test]
    fn max_mixed_against_padded_tuple() {
        // Four computational projectors plus twelve further grid states.
        let dims = BipartiteDims::new(2, 2).unwrap();
        let mut elements: Vec<ProductState> = (0..4).map(computational).collect();
        let mut i = 4;
        while elements.len() < 16 {
            if let Some(s) = crate::enumeration::enumerate_product(i, dims).into_product() {
                let mut trial = elements.clone();
                trial.push(s);
                if affinely_independent(&Tuple::new(trial.clone(), 16).unwrap(), 1e-10) {
                    elements = trial;
                }
            }
            i += 1;
        }
        let tuple = Tuple::new(elements, 16).unwrap();
        let target = ComplexMatrix::identity(4).scale(0.25);
        let res = barycentric_membership(&target, &tuple, 1e-9).unwrap();
        let w = res.weights.unwrap();
        for (k, wk) in w.iter().enumerate() {
            let want = if k < 4 { 0.25 } else { 0.0 };
            assert!((wk - want).abs() < 1e-9, "{k}: {wk}");
        }
        // Zero weights put the target on facets.
        let facet = facet_sign_membership(&target, &tuple, 1e-9).unwrap();
        assert_eq!(facet.verdict, Membership::Degenerate);
    }

    #[test]
    fn wrong_size_and_dependent_tuples_rejected() {
        let t = Tuple::new(vec![computational(0)], 16).unwrap();
        let target = ComplexMatrix::identity(4).scale(0.25);
        assert!(matches!(
            facet_sign_membership(&target, &t, 1e-9),
            Err(HullError::WrongTupleSize { .. })
        ));
        let dep = Tuple::new(vec![computational(0), computational(0)], 2).unwrap();
        assert!(matches!(
            barycentric_membership(&target, &dep, 1e-9),
            Err(HullError::AffinelyDependent)
        ));
    }
}

use nalgebra::DMatrix;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::{HullError, Result};
use crate::linalg::real::null_vector;
use crate::linalg::{hs_distance, vectorize_unchecked, ComplexMatrix, C64};
use crate::states::ProductState;

/// `ρ ≈ Σ p_i |a_i⟩⟨a_i| ⊗ |b_i⟩⟨b_i|` with the Hilbert–Schmidt residual of
/// the reconstruction.
#[derive(Debug, Clone)]
pub struct SeparableDecomposition {
    pub pairs: Vec<(f64, ProductState)>,
    pub residual: f64,
}

impl SeparableDecomposition {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.pairs.first().map_or(0, |(_, s)| s.projector().rows());
        let mut out = ComplexMatrix::zeros(d, d);
        for (w, s) in &self.pairs {
            out += &s.projector().scale(*w);
        }
        out
    }
}

#[derive(Serialize)]
struct AtomRepr<'a> {
    weight: f64,
    a: &'a [C64],
    b: &'a [C64],
}

impl Serialize for SeparableDecomposition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let atoms: Vec<AtomRepr<'_>> = self
            .pairs
            .iter()
            .map(|(w, s)| AtomRepr {
                weight: *w,
                a: s.a(),
                b: s.b(),
            })
            .collect();
        let mut st = serializer.serialize_struct("SeparableDecomposition", 2)?;
        st.serialize_field("residual", &self.residual)?;
        st.serialize_field("atoms", &atoms)?;
        st.end()
    }
}

/// Prunes zero weights, reduces the support to at most `bound` atoms by
/// eliminating affine dependencies, and checks the reconstruction.
pub fn extract_certificate(
    weights: &[f64],
    points: &[ProductState],
    target: &ComplexMatrix,
    bound: usize,
    tol: f64,
) -> Result<SeparableDecomposition> {
    if weights.len() != points.len() {
        return Err(HullError::WeightCount {
            weights: weights.len(),
            points: points.len(),
        });
    }
    let mut support: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    if support.is_empty() {
        return Err(HullError::Empty);
    }
    let mut w: Vec<f64> = support.iter().map(|&i| weights[i]).collect();
    normalize(&mut w);

    let vecs: Vec<Vec<f64>> = points
        .iter()
        .map(|p| vectorize_unchecked(p.projector()))
        .collect();
    while support.len() > bound.max(1) {
        let rows = vecs[0].len() + 1;
        let a = DMatrix::from_fn(rows, support.len(), |r, c| {
            if r + 1 == rows {
                1.0
            } else {
                vecs[support[c]][r]
            }
        });
        let Some(mut v) = null_vector(&a, 1e-10) else {
            break;
        };
        if v.max() <= 0.0 {
            v = -v;
        }
        let (drop, step) = (0..support.len())
            .filter(|&k| v[k] > 0.0)
            .map(|k| (k, w[k] / v[k]))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("null vector has a positive entry");
        for k in 0..support.len() {
            w[k] -= step * v[k];
        }
        w[drop] = 0.0;
        let keep: Vec<usize> = (0..support.len()).filter(|&k| w[k] > 0.0).collect();
        support = keep.iter().map(|&k| support[k]).collect();
        w = keep.iter().map(|&k| w[k]).collect();
        normalize(&mut w);
    }

    let mut decomposition = SeparableDecomposition {
        pairs: support
            .iter()
            .zip(&w)
            .map(|(&i, &wi)| (wi, points[i].clone()))
            .collect(),
        residual: 0.0,
    };
    decomposition.residual = hs_distance(&decomposition.reconstruct(), target).map_err(|_| {
        HullError::DimensionMismatch {
            expected: target.rows(),
            found: points[0].projector().rows(),
        }
    })?;
    if decomposition.residual > tol {
        return Err(HullError::ResidualTooLarge {
            residual: decomposition.residual,
            tol,
        });
    }
    Ok(decomposition)
}

fn normalize(w: &mut [f64]) {
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::enumerate_product;
    use crate::linalg::BipartiteDims;

    fn grid(count: usize) -> Vec<ProductState> {
        let dims = BipartiteDims::new(2, 2).unwrap();
        (0..)
            .filter_map(|i| enumerate_product(i, dims).into_product())
            .take(count)
            .collect()
    }

    #[test]
    fn single_atom_is_kept() {
        let pts = grid(1);
        let cert = extract_certificate(&[1.0], &pts, pts[0].projector(), 16, 1e-8).unwrap();
        assert_eq!(cert.len(), 1);
        assert!(cert.residual < 1e-15);
    }

    #[test]
    fn dependency_reduced_below_bound() {
        let pts = grid(19);
        let w = vec![1.0 / 19.0; 19];
        let mut target = ComplexMatrix::zeros(4, 4);
        for (wi, p) in w.iter().zip(&pts) {
            target += &p.projector().scale(*wi);
        }
        let cert = extract_certificate(&w, &pts, &target, 16, 1e-9).unwrap();
        assert!(cert.len() <= 16);
        assert!(cert.residual <= 1e-9);
        let total: f64 = cert.pairs.iter().map(|(p, _)| p).sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert!(cert.pairs.iter().all(|(p, _)| *p >= 0.0));
    }

    #[test]
    fn bad_weights_fail_residual_check() {
        let pts = grid(4);
        let target = ComplexMatrix::identity(4).scale(0.25);
        let err = extract_certificate(&[1.0, 0.0, 0.0, 0.0], &pts, &target, 16, 1e-8);
        assert!(matches!(err, Err(HullError::ResidualTooLarge { .. })));
    }
}

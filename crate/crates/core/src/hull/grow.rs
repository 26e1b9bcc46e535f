use nalgebra::{DMatrix, DVector};

use super::{check_dims, Result};
use crate::linalg::real::{dot, pseudo_inverse};
use crate::linalg::{vectorize_unchecked, ComplexMatrix};

/// Weights below this are dropped from the active set.
const DROP_TOL: f64 = 1e-15;
/// Squared norm treated as an exact hit.
const ZERO_NORM_SQR: f64 = 1e-30;

#[derive(Debug, Clone, PartialEq)]
pub struct HullDistance {
    pub distance: f64,
    /// Convex weights over all points pushed so far.
    pub weights: Vec<f64>,
}

/// Nearest point of a growing point set's convex hull to a fixed target,
/// by Wolfe's minimum-norm-point method on the shifted points `p_i - target`.
///
/// Points may be appended between solves; the previous active set is reused.
#[derive(Debug, Clone)]
pub struct GrowingHull {
    target: Vec<f64>,
    shifted: Vec<Vec<f64>>,
    active: Vec<usize>,
    lambda: Vec<f64>,
    x: Vec<f64>,
    tol: f64,
    optimal: bool,
}

impl GrowingHull {
    pub fn new(target: Vec<f64>, tol: f64) -> Self {
        let dim = target.len();
        Self {
            target,
            shifted: Vec::new(),
            active: Vec::new(),
            lambda: Vec::new(),
            x: vec![0.0; dim],
            tol,
            optimal: false,
        }
    }

    pub fn for_operator(target: &ComplexMatrix, tol: f64) -> Self {
        Self::new(vectorize_unchecked(&target.symmetrized()), tol)
    }

    pub fn len(&self) -> usize {
        self.shifted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifted.is_empty()
    }

    pub fn push(&mut self, point: &[f64]) {
        assert_eq!(point.len(), self.target.len(), "point dimension");
        let y: Vec<f64> = point.iter().zip(&self.target).map(|(p, t)| p - t).collect();
        if self.shifted.is_empty() {
            self.active = vec![0];
            self.lambda = vec![1.0];
            self.x = y.clone();
            self.optimal = true;
        } else if self.optimal {
            let xx = dot(&self.x, &self.x);
            if xx - dot(&self.x, &y) > self.gap_tol() {
                self.optimal = false;
            }
        }
        self.shifted.push(y);
    }

    pub fn push_operator(&mut self, point: &ComplexMatrix) {
        self.push(&vectorize_unchecked(point));
    }

    fn gap_tol(&self) -> f64 {
        self.tol * self.tol
    }

    /// Current distance without further iterations.
    pub fn distance(&self) -> f64 {
        dot(&self.x, &self.x).sqrt()
    }

    pub fn weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.shifted.len()];
        for (&i, &l) in self.active.iter().zip(&self.lambda) {
            w[i] = l;
        }
        w
    }

    pub fn solve(&mut self) -> HullDistance {
        if !self.shifted.is_empty() && !self.optimal {
            self.iterate();
        }
        HullDistance {
            distance: if self.shifted.is_empty() {
                f64::INFINITY
            } else {
                self.distance()
            },
            weights: self.weights(),
        }
    }

    fn iterate(&mut self) {
        let max_major = 10 * (self.target.len() + 1) * self.shifted.len();
        for _ in 0..max_major {
            let xx = dot(&self.x, &self.x);
            if xx <= ZERO_NORM_SQR {
                break;
            }
            let (j, xy) = self
                .shifted
                .iter()
                .enumerate()
                .map(|(j, y)| (j, dot(&self.x, y)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty");
            if xx - xy <= self.gap_tol() || self.active.contains(&j) {
                break;
            }
            self.active.push(j);
            self.lambda.push(0.0);
            self.minor_cycle();
        }
        self.optimal = true;
    }

    fn minor_cycle(&mut self) {
        loop {
            let alpha = self.affine_minimizer();
            if alpha.iter().all(|&a| a > DROP_TOL) {
                self.lambda = alpha;
                break;
            }
            let mut theta: f64 = 1.0;
            for (&l, &a) in self.lambda.iter().zip(&alpha) {
                if a <= DROP_TOL && l - a > 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            let mut kept_active = Vec::with_capacity(self.active.len());
            let mut kept_lambda = Vec::with_capacity(self.active.len());
            for (k, (&l, &a)) in self.lambda.iter().zip(&alpha).enumerate() {
                let v = (1.0 - theta) * l + theta * a;
                if v > DROP_TOL {
                    kept_active.push(self.active[k]);
                    kept_lambda.push(v);
                }
            }
            if kept_active.len() == self.active.len() || kept_active.is_empty() {
                // No progress possible; keep the best feasible combination.
                if kept_active.is_empty() {
                    break;
                }
                self.active = kept_active;
                self.lambda = kept_lambda;
                break;
            }
            self.active = kept_active;
            self.lambda = kept_lambda;
        }
        let total: f64 = self.lambda.iter().sum();
        self.lambda.iter_mut().for_each(|l| *l /= total);
        let mut x = vec![0.0; self.target.len()];
        for (&i, &l) in self.active.iter().zip(&self.lambda) {
            for (xi, yi) in x.iter_mut().zip(&self.shifted[i]) {
                *xi += l * yi;
            }
        }
        self.x = x;
    }

    /// Minimizer of `|Σ α_i y_i|` subject to `Σ α_i = 1` over the active set.
    fn affine_minimizer(&self) -> Vec<f64> {
        let k = self.active.len();
        let mut kkt = DMatrix::<f64>::zeros(k + 1, k + 1);
        for a in 0..k {
            for b in a..k {
                let g = dot(&self.shifted[self.active[a]], &self.shifted[self.active[b]]);
                kkt[(a, b)] = g;
                kkt[(b, a)] = g;
            }
            kkt[(a, k)] = 1.0;
            kkt[(k, a)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(k + 1);
        rhs[k] = 1.0;
        let solved = kkt
            .clone()
            .lu()
            .solve(&rhs)
            .filter(|s| s.iter().all(|v| v.is_finite()));
        let sol = solved.unwrap_or_else(|| pseudo_inverse(&kkt, 1e-14) * &rhs);
        sol.iter().take(k).copied().collect()
    }
}

/// Distance from `target` to the convex hull of `points` with optimal
/// weights.
pub fn growing_hull_check(
    target: &ComplexMatrix,
    points: &[ComplexMatrix],
    tol: f64,
) -> Result<HullDistance> {
    let t = vectorize_unchecked(&target.symmetrized());
    let vecs: Vec<Vec<f64>> = points.iter().map(vectorize_unchecked).collect();
    check_dims(&vecs, &t)?;
    let mut hull = GrowingHull::new(t, tol);
    for v in &vecs {
        hull.push(v);
    }
    Ok(hull.solve())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{BipartiteDims, C64};
    use crate::states::{bell, max_mixed, Bell};

    fn diagonal_projectors() -> Vec<ComplexMatrix> {
        (0..4)
            .map(|k| {
                let mut d = [0.0; 4];
                d[k] = 1.0;
                ComplexMatrix::diagonal(&d)
            })
            .collect()
    }

    #[test]
    fn target_equal_to_a_point() {
        let pts = diagonal_projectors();
        let res = growing_hull_check(&pts[2], &pts, 1e-8).unwrap();
        assert!(res.distance < 1e-12);
        assert!((res.weights[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn max_mixed_uniform_weights() {
        let rho = max_mixed(BipartiteDims::new(2, 2).unwrap());
        let res = growing_hull_check(rho.matrix(), &diagonal_projectors(), 1e-8).unwrap();
        assert!(res.distance < 1e-12);
        for w in res.weights {
            assert!((w - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn bell_state_distance_to_diagonal_hull() {
        let rho = bell(Bell::PhiPlus);
        let res = growing_hull_check(rho.matrix(), &diagonal_projectors(), 1e-8).unwrap();
        assert!(
            (res.distance - 0.5f64.sqrt()).abs() < 1e-12,
            "{}",
            res.distance
        );
        assert!((res.weights[0] - 0.5).abs() < 1e-12 && (res.weights[3] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn incremental_matches_batch() {
        let pts: Vec<Vec<f64>> = (0..12)
            .map(|k| {
                let a = k as f64;
                vec![a.sin(), (1.7 * a).cos(), (0.3 * a).sin() * 2.0]
            })
            .collect();
        let target = vec![0.1, 0.2, -0.05];
        let mut inc = GrowingHull::new(target.clone(), 1e-10);
        let mut last = f64::INFINITY;
        for p in &pts {
            inc.push(p);
            let d = inc.solve().distance;
            assert!(d <= last + 1e-12);
            last = d;
        }
        let mut batch = GrowingHull::new(target, 1e-10);
        for p in &pts {
            batch.push(p);
        }
        assert!((batch.solve().distance - last).abs() < 1e-9);
        let _ = C64::new(0.0, 0.0);
    }
}

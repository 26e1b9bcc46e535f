#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use sepcheck_core::linalg::{inner, BipartiteDims};
use sepcheck_core::states::validate;
use sepcheck_core::{ComplexMatrix, DensityMatrix, ProductState, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let data: Vec<C64> = (0..rows * cols).map(|_| gaussian(rng)).collect();
    ComplexMatrix::from_row_major(rows, cols, data)
}

pub fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
    let n = inner(&v, &v).re.sqrt();
    v.into_iter().map(|z| z / n).collect()
}

pub fn random_product(rng: &mut ChaCha8Rng, dims: BipartiteDims) -> ProductState {
    ProductState::new(random_unit(rng, dims.n), random_unit(rng, dims.m)).unwrap()
}

/// `G G† / Tr`, full rank with probability one.
pub fn random_psd(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    let g = random_matrix(rng, dim, dim);
    let p = g.matmul(&g.adjoint()).unwrap();
    let t = p.trace().re;
    p.scale(1.0 / t).symmetrized()
}

pub fn random_density(rng: &mut ChaCha8Rng, dims: BipartiteDims) -> DensityMatrix {
    validate(&random_psd(rng, dims.total()), dims).unwrap()
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    let g = random_matrix(rng, dim, dim);
    (&g + &g.adjoint()).scale(0.5)
}

/// Gram-Schmidt on Gaussian columns.
pub fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
        for c in &cols {
            let proj = inner(c, &v);
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi -= proj * ci;
            }
        }
        let n = inner(&v, &v).re.sqrt();
        if n > 1e-6 {
            cols.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    ComplexMatrix::from_fn(dim, dim, |r, c| cols[c][r])
}

pub fn conjugate(u: &ComplexMatrix, x: &ComplexMatrix) -> ComplexMatrix {
    u.matmul(x).unwrap().matmul(&u.adjoint()).unwrap()
}

pub fn dims(n: usize, m: usize) -> BipartiteDims {
    BipartiteDims::new(n, m).unwrap()
}

use serde::{Deserialize, Serialize};

use super::source::ProductSource;
use crate::hull::{
    affinely_independent_vectors, extract_certificate, facet_sign_vectors, GrowingHull, Membership,
    SeparableDecomposition,
};
use crate::linalg::vectorize_unchecked;
use crate::states::{DensityMatrix, ProductState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum A2Mode {
    /// Nearest point of the hull of every product state seen so far.
    Grow,
    /// Simplex membership over `L`-tuples in colexicographic order.
    Tuple,
}

impl std::str::FromStr for A2Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "grow" => Ok(A2Mode::Grow),
            "tuple" => Ok(A2Mode::Tuple),
            other => Err(format!("unknown mode {other:?} (expected grow or tuple)")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct A2Counters {
    /// Steps in which the enumerator produced no new product state.
    pub empty_steps: u64,
    /// Tuples rejected as affinely dependent.
    pub dependent_tuples: u64,
    /// Tuples whose facet test came back degenerate.
    pub degenerate_tuples: u64,
    /// Hits whose certificate failed the residual check.
    pub rejected_certificates: u64,
    /// Enumeration indices visited.
    pub indices_visited: u64,
}

#[derive(Debug, Clone)]
enum Engine {
    Grow(GrowingHull),
    Tuple { rank: u128 },
}

/// One separability search: enumerated product states against a fixed target.
#[derive(Debug, Clone)]
pub(crate) struct A2Stream {
    target: DensityMatrix,
    target_vec: Vec<f64>,
    source: ProductSource,
    pool: Vec<ProductState>,
    pool_vecs: Vec<Vec<f64>>,
    engine: Engine,
    bound: usize,
    tol: f64,
    degenerate_tol: f64,
    counters: A2Counters,
}

impl A2Stream {
    pub(crate) fn new(
        target: &DensityMatrix,
        source: ProductSource,
        mode: A2Mode,
        bound: usize,
        tol: f64,
        degenerate_tol: f64,
    ) -> Self {
        let target_vec = vectorize_unchecked(target.matrix());
        let engine = match mode {
            A2Mode::Grow => Engine::Grow(GrowingHull::new(target_vec.clone(), tol)),
            A2Mode::Tuple => Engine::Tuple { rank: 0 },
        };
        Self {
            target: target.clone(),
            target_vec,
            source,
            pool: Vec::new(),
            pool_vecs: Vec::new(),
            engine,
            bound,
            tol,
            degenerate_tol,
            counters: A2Counters::default(),
        }
    }

    pub(crate) fn counters(&self) -> A2Counters {
        A2Counters {
            indices_visited: self.source.cursor(),
            ..self.counters
        }
    }

    #[cfg(test)]
    pub(crate) fn pool_len(&self) -> usize {
        self.pool.len()
    }

    fn fetch(&mut self) -> Option<usize> {
        let p = self.source.next()?;
        self.pool_vecs.push(vectorize_unchecked(p.projector()));
        self.pool.push(p);
        Some(self.pool.len() - 1)
    }

    /// One unit of work; returns a certificate on detection.
    pub(crate) fn step(&mut self) -> Option<SeparableDecomposition> {
        match self.engine {
            Engine::Grow(_) => self.grow_step(),
            Engine::Tuple { rank } => self.tuple_step(rank),
        }
    }

    fn grow_step(&mut self) -> Option<SeparableDecomposition> {
        let Some(k) = self.fetch() else {
            self.counters.empty_steps += 1;
            return None;
        };
        let Engine::Grow(hull) = &mut self.engine else {
            unreachable!()
        };
        hull.push(&self.pool_vecs[k]);
        let res = hull.solve();
        if res.distance > self.tol {
            return None;
        }
        let pool = std::mem::take(&mut self.pool);
        let cert = self.certify(&res.weights, &pool);
        self.pool = pool;
        cert
    }

    fn tuple_step(&mut self, rank: u128) -> Option<SeparableDecomposition> {
        let members = colex_unrank(rank, self.bound);
        let needed = members.last().map_or(0, |&c| c as usize + 1);
        while self.pool.len() < needed {
            if self.fetch().is_none() {
                self.counters.empty_steps += 1;
                return None;
            }
        }
        self.engine = Engine::Tuple { rank: rank + 1 };
        let points: Vec<Vec<f64>> = members
            .iter()
            .map(|&c| self.pool_vecs[c as usize].clone())
            .collect();
        if !affinely_independent_vectors(&points, self.degenerate_tol) {
            self.counters.dependent_tuples += 1;
            return None;
        }
        let result = facet_sign_vectors(&points, &self.target_vec, self.degenerate_tol).ok()?;
        match result.verdict {
            Membership::In => {
                let atoms: Vec<ProductState> = members
                    .iter()
                    .map(|&c| self.pool[c as usize].clone())
                    .collect();
                let weights = result.weights.expect("inside carries weights");
                self.certify(&weights, &atoms)
            }
            Membership::Degenerate => {
                self.counters.degenerate_tuples += 1;
                None
            }
            Membership::Out => None,
        }
    }

    fn certify(
        &mut self,
        weights: &[f64],
        atoms: &[ProductState],
    ) -> Option<SeparableDecomposition> {
        match extract_certificate(weights, atoms, self.target.matrix(), self.bound, self.tol) {
            Ok(cert) => Some(cert),
            Err(_) => {
                self.counters.rejected_certificates += 1;
                None
            }
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out: u128 = 1;
    for i in 0..k {
        out = out.saturating_mul(n - i) / (i + 1);
    }
    out
}

/// The `rank`-th `size`-subset of the naturals in colexicographic order,
/// ascending.
pub(crate) fn colex_unrank(mut rank: u128, size: usize) -> Vec<u64> {
    let mut out = vec![0u64; size];
    for j in (1..=size).rev() {
        let k = j as u128;
        let mut c = k - 1;
        while binomial(c + 1, k) <= rank {
            c += 1;
        }
        rank -= binomial(c, k);
        out[j - 1] = c as u64;
    }
    out
}

//! Entanglement detection by positive partial transpose and by symmetric
//! extensions.
//!
//! Level 1 is the partial transpose test and is exact. Level `k >= 2` looks
//! for a state on `H_A ⊗ H_B^{⊗k}` that is supported on the symmetric
//! subspace of the B copies and reduces to `ρ`, using Dykstra's alternating
//! projections between the positive cone and that affine set. Projections
//! certify feasibility only; a stalled residual is reported as a heuristic
//! entanglement verdict.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::real::pseudo_inverse;
use crate::linalg::{
    devectorize_hermitian, hermitian_eig, hs_distance, kron, partial_trace_raw, partial_transpose,
    partial_transpose_raw, vectorize_unchecked, ComplexMatrix, Subsystem, C64, ONE, ZERO,
};
use crate::states::DensityMatrix;

/// Partial transpose eigenvalues below `-NPT_TOL` flag entanglement.
pub const NPT_TOL: f64 = 1e-10;
/// Largest supported `m^k` for the B copies.
pub const MAX_EXTENSION_DIM: usize = 4096;

pub const LABEL_EXACT: &str = "exact";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DpsError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("extension space of dimension {dim} exceeds the limit {limit}")]
    DimensionGuard { dim: usize, limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpsConfig {
    pub level: usize,
    pub impose_ppt_on_extension: bool,
    pub max_iterations: usize,
    pub feasibility_tol: f64,
    pub infeasibility_threshold: f64,
    /// Consecutive iterations a residual plateau must last.
    pub plateau_window: usize,
    /// Largest relative spread `(max - min) / max` inside a plateau window.
    pub plateau_spread: f64,
}

impl Default for DpsConfig {
    fn default() -> Self {
        Self {
            level: 1,
            impose_ppt_on_extension: false,
            max_iterations: 10_000,
            feasibility_tol: 1e-6,
            infeasibility_threshold: 1e-3,
            plateau_window: 500,
            plateau_spread: 1e-2,
        }
    }
}

impl DpsConfig {
    pub fn with_level(level: usize) -> Self {
        Self {
            level,
            ..Self::default()
        }
    }

    // Negated comparisons so NaN is rejected.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), DpsError> {
        let bad = |msg: &str| Err(DpsError::InvalidConfig(msg.to_string()));
        if self.level == 0 {
            return bad("level must be at least 1");
        }
        if !(self.feasibility_tol > 0.0) || !(self.infeasibility_threshold > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.infeasibility_threshold <= self.feasibility_tol {
            return bad("infeasibility threshold must exceed the feasibility tolerance");
        }
        if self.plateau_window == 0 || !(self.plateau_spread > 0.0) {
            return bad("plateau window and spread must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PptResult {
    Ppt {
        min_eigenvalue: f64,
    },
    Npt {
        min_eigenvalue: f64,
        eigenvector: Vec<C64>,
    },
}

impl PptResult {
    pub fn min_eigenvalue(&self) -> f64 {
        match self {
            PptResult::Ppt { min_eigenvalue } | PptResult::Npt { min_eigenvalue, .. } => {
                *min_eigenvalue
            }
        }
    }

    pub fn is_npt(&self) -> bool {
        matches!(self, PptResult::Npt { .. })
    }
}

/// Smallest eigenvalue of `ρ^{T_B}` and its eigenvector.
pub fn ppt_check(rho: &DensityMatrix) -> PptResult {
    let pt =
        partial_transpose(rho.matrix(), rho.dims(), Subsystem::B).expect("state matches its dims");
    let eig = hermitian_eig(&pt).expect("partial transpose is Hermitian");
    let min_eigenvalue = eig.min_eigenvalue();
    if min_eigenvalue < -NPT_TOL {
        PptResult::Npt {
            min_eigenvalue,
            eigenvector: eig.eigenvector(0),
        }
    } else {
        PptResult::Ppt { min_eigenvalue }
    }
}

/// Orthogonal projector onto the symmetric subspace of `(C^m)^{⊗k}`.
pub fn symmetric_projector(m: usize, k: usize) -> Result<ComplexMatrix, DpsError> {
    if k == 0 {
        return Err(DpsError::InvalidConfig("k must be at least 1".into()));
    }
    let dim = checked_power(m, k)?;
    let perms = permutations(k);
    let weight = 1.0 / perms.len() as f64;
    let mut out = ComplexMatrix::zeros(dim, dim);
    let mut digits = vec![0usize; k];
    for col in 0..dim {
        to_digits(col, m, &mut digits);
        for perm in &perms {
            let row = perm.iter().fold(0, |acc, &p| acc * m + digits[p]);
            out[(row, col)] += C64::new(weight, 0.0);
        }
    }
    Ok(out)
}

fn checked_power(m: usize, k: usize) -> Result<usize, DpsError> {
    let mut dim: usize = 1;
    for _ in 0..k {
        dim = dim.saturating_mul(m);
        if dim > MAX_EXTENSION_DIM {
            return Err(DpsError::DimensionGuard {
                dim,
                limit: MAX_EXTENSION_DIM,
            });
        }
    }
    Ok(dim)
}

fn to_digits(mut x: usize, base: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = x % base;
        x /= base;
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum EntanglementCertificate {
    /// Negative eigenpair of the partial transpose.
    NegativePartialTranspose {
        label: String,
        min_eigenvalue: f64,
        eigenvector: Vec<C64>,
    },
    /// Residual of the extension search stuck above the threshold.
    ExtensionPlateau {
        label: String,
        level: usize,
        iterations: usize,
        window_min: f64,
        window_max: f64,
        residual_window: Vec<f64>,
    },
}

impl EntanglementCertificate {
    pub fn label(&self) -> &str {
        match self {
            EntanglementCertificate::NegativePartialTranspose { label, .. }
            | EntanglementCertificate::ExtensionPlateau { label, .. } => label,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(
            self,
            EntanglementCertificate::NegativePartialTranspose { .. }
        )
    }
}

pub fn heuristic_label(level: usize) -> String {
    format!("level-{level} heuristic")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DpsOutcome {
    EntangledCertified(EntanglementCertificate),
    NotDetectedAtLevel {
        level: usize,
        iterations: usize,
        residual: f64,
        /// False when the iteration cap ended the search undecided.
        converged: bool,
    },
    InProgress {
        residual: f64,
    },
}

impl DpsOutcome {
    pub fn is_final(&self) -> bool {
        !matches!(self, DpsOutcome::InProgress { .. })
    }

    pub fn is_entangled(&self) -> bool {
        matches!(self, DpsOutcome::EntangledCertified(_))
    }
}

/// Iteration carry for one state at one level.
#[derive(Debug, Clone)]
pub struct DpsRunner {
    cfg: DpsConfig,
    rho: DensityMatrix,
    extension: Option<Extension>,
    iterations: usize,
    finished: Option<DpsOutcome>,
}

impl DpsRunner {
    pub fn new(rho: &DensityMatrix, cfg: DpsConfig) -> Result<Self, DpsError> {
        cfg.validate()?;
        let extension = if cfg.level >= 2 {
            Some(Extension::new(
                rho,
                cfg.level,
                cfg.impose_ppt_on_extension,
                cfg.plateau_window,
            )?)
        } else {
            None
        };
        Ok(Self {
            cfg,
            rho: rho.clone(),
            extension,
            iterations: 0,
            finished: None,
        })
    }

    pub fn config(&self) -> &DpsConfig {
        &self.cfg
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn is_finished(&self) -> bool {
        self.finished.is_some()
    }

    /// Residuals of every projection pass so far (empty at level 1).
    pub fn residual_history(&self) -> &[f64] {
        self.extension.as_ref().map_or(&[], |e| &e.history)
    }

    /// Current extension iterate after the last affine projection.
    pub fn extension_iterate(&self) -> Option<&ComplexMatrix> {
        self.extension.as_ref().map(|e| &e.affine_iterate)
    }

    /// One unit of work: the PPT test at level 1, one projection pass above.
    pub fn step(&mut self) -> DpsOutcome {
        if let Some(done) = &self.finished {
            return done.clone();
        }
        self.iterations += 1;
        let outcome = match &mut self.extension {
            None => match ppt_check(&self.rho) {
                PptResult::Npt {
                    min_eigenvalue,
                    eigenvector,
                } => DpsOutcome::EntangledCertified(
                    EntanglementCertificate::NegativePartialTranspose {
                        label: LABEL_EXACT.to_string(),
                        min_eigenvalue,
                        eigenvector,
                    },
                ),
                PptResult::Ppt { min_eigenvalue } => DpsOutcome::NotDetectedAtLevel {
                    level: 1,
                    iterations: 1,
                    residual: min_eigenvalue.min(0.0).abs(),
                    converged: true,
                },
            },
            Some(ext) => {
                let residual = ext.pass();
                self.judge(residual)
            }
        };
        if outcome.is_final() {
            self.finished = Some(outcome.clone());
        }
        outcome
    }

    fn judge(&self, residual: f64) -> DpsOutcome {
        let cfg = &self.cfg;
        if residual <= cfg.feasibility_tol {
            return DpsOutcome::NotDetectedAtLevel {
                level: cfg.level,
                iterations: self.iterations,
                residual,
                converged: true,
            };
        }
        let ext = self.extension.as_ref().expect("level >= 2");
        if ext.window.len() == cfg.plateau_window {
            let lo = ext.window.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ext.window.iter().copied().fold(0.0, f64::max);
            if lo >= cfg.infeasibility_threshold && (hi - lo) / hi <= cfg.plateau_spread {
                return DpsOutcome::EntangledCertified(EntanglementCertificate::ExtensionPlateau {
                    label: heuristic_label(cfg.level),
                    level: cfg.level,
                    iterations: self.iterations,
                    window_min: lo,
                    window_max: hi,
                    residual_window: ext.window.iter().copied().collect(),
                });
            }
        }
        if self.iterations >= cfg.max_iterations {
            return DpsOutcome::NotDetectedAtLevel {
                level: cfg.level,
                iterations: self.iterations,
                residual,
                converged: false,
            };
        }
        DpsOutcome::InProgress { residual }
    }
}

/// Dykstra state for the extension search on `H_A ⊗ H_B^{⊗k}`.
#[derive(Debug, Clone)]
struct Extension {
    rho: ComplexMatrix,
    /// `n·m`, the kept factor.
    kept: usize,
    /// `m^{k-1}`, the traced copies.
    traced: usize,
    /// `m^k`, every B copy, for the partial transpose constraint.
    b_block: usize,
    sym: ComplexMatrix,
    gram_pinv: nalgebra::DMatrix<f64>,
    iterate: ComplexMatrix,
    affine_iterate: ComplexMatrix,
    corrections: Vec<ComplexMatrix>,
    history: Vec<f64>,
    window: VecDeque<f64>,
    window_len: usize,
}

impl Extension {
    fn new(
        rho: &DensityMatrix,
        level: usize,
        impose_ppt: bool,
        window_len: usize,
    ) -> Result<Self, DpsError> {
        let dims = rho.dims();
        let b_block = checked_power(dims.m, level)?;
        let p_sym = symmetric_projector(dims.m, level)?;
        let sym = kron(&ComplexMatrix::identity(dims.n), &p_sym);
        let kept = dims.total();
        let traced = b_block / dims.m;

        let mut ext = Self {
            rho: rho.matrix().clone(),
            kept,
            traced,
            b_block,
            sym,
            gram_pinv: nalgebra::DMatrix::zeros(0, 0),
            iterate: kron(rho.matrix(), &ComplexMatrix::identity(traced))
                .scale(1.0 / traced as f64),
            affine_iterate: ComplexMatrix::zeros(0, 0),
            corrections: Vec::new(),
            history: Vec::new(),
            window: VecDeque::new(),
            window_len,
        };
        // G(Z) = T(Π (Z ⊗ I) Π) on Hermitian Z, in isometric coordinates.
        let basis_len = kept * kept;
        let mut gram = nalgebra::DMatrix::<f64>::zeros(basis_len, basis_len);
        for c in 0..basis_len {
            let mut e = vec![0.0; basis_len];
            e[c] = 1.0;
            let z = devectorize_hermitian(&e).expect("square length");
            let col = vectorize_unchecked(&ext.reduce(&ext.lift(&z)));
            for (r, v) in col.into_iter().enumerate() {
                gram[(r, c)] = v;
            }
        }
        ext.gram_pinv = pseudo_inverse(&gram, 1e-12);
        ext.affine_iterate = ext.iterate.clone();
        let sets = if impose_ppt { 3 } else { 2 };
        let dim = ext.iterate.rows();
        ext.corrections = vec![ComplexMatrix::zeros(dim, dim); sets];
        Ok(ext)
    }

    fn symmetrize(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let px = self.sym.matmul(x).expect("square");
        px.matmul(&self.sym).expect("square")
    }

    /// `Π (Z ⊗ I) Π`.
    fn lift(&self, z: &ComplexMatrix) -> ComplexMatrix {
        self.symmetrize(&kron(z, &ComplexMatrix::identity(self.traced)))
    }

    /// Trace over B copies `2..k`.
    fn reduce(&self, x: &ComplexMatrix) -> ComplexMatrix {
        partial_trace_raw(x, self.kept, self.traced, Subsystem::A).expect("extension shape")
    }

    fn project_affine(&self, y: &ComplexMatrix) -> ComplexMatrix {
        let base = self.symmetrize(&y.symmetrized());
        let defect = vectorize_unchecked(&(&self.rho - &self.reduce(&base)).symmetrized());
        let coeffs = &self.gram_pinv * nalgebra::DVector::from_vec(defect);
        let z = devectorize_hermitian(coeffs.as_slice()).expect("square length");
        (&base + &self.lift(&z)).symmetrized()
    }

    fn project_psd(y: &ComplexMatrix) -> ComplexMatrix {
        hermitian_eig(&y.symmetrized())
            .expect("symmetrized input")
            .reconstruct_with(|l| l.max(0.0))
    }

    fn project_ppt(&self, y: &ComplexMatrix) -> ComplexMatrix {
        let n = self.iterate.rows() / self.b_block;
        let pt = partial_transpose_raw(y, n, self.b_block, Subsystem::B);
        partial_transpose_raw(&Self::project_psd(&pt), n, self.b_block, Subsystem::B)
    }

    /// One Dykstra pass; returns the distance between the affine iterate and
    /// the cone iterates.
    fn pass(&mut self) -> f64 {
        let sets = self.corrections.len();
        let mut x = self.iterate.clone();
        let mut projected = Vec::with_capacity(sets);
        for i in 0..sets {
            let y = &x + &self.corrections[i];
            let next = match i {
                0 => self.project_affine(&y),
                1 => Self::project_psd(&y),
                _ => self.project_ppt(&y),
            };
            self.corrections[i] = &y - &next;
            projected.push(next.clone());
            x = next;
        }
        self.iterate = x;
        let affine = &projected[0];
        let residual = projected[1..]
            .iter()
            .map(|p| hs_distance(affine, p).expect("same shape"))
            .fold(0.0, f64::max);
        self.affine_iterate = projected.swap_remove(0);
        self.history.push(residual);
        self.window.push_back(residual);
        while self.window.len() > self.window_len {
            self.window.pop_front();
        }
        residual
    }
}

/// `SWAP` on two copies of `C^m`; used to cross-check the symmetric projector.
pub fn swap_two_copies(m: usize) -> ComplexMatrix {
    let d = m * m;
    ComplexMatrix::from_fn(
        d,
        d,
        |r, c| {
            if r == (c % m) * m + c / m {
                ONE
            } else {
                ZERO
            }
        },
    )
}

//! Density matrices, pure and product states, canonical test states and the
//! JSON interchange format.
//!
//! State files look like
//!
//! ```json
//! {"dims":[2,2],"re":[[0.25,0,0,0],...],"im":[[0,0,0,0],...]}
//! ```
//!
//! with row-major `d x d` arrays of real and imaginary parts.
//!
//! Mixing conventions used by the generators, with `P = |Φ+⟩⟨Φ+|` and
//! `d = n^2`:
//!
//! * `isotropic(p, n) = p P + (1 - p) I/d`
//! * `werner(p, n) = p A + (1 - p) I/d`, where `A = (I - SWAP) / (n(n-1))` is
//!   the normalized projector onto the antisymmetric subspace. For two qubits
//!   `A = |Ψ-⟩⟨Ψ-|`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumeration::{product_from_index, FactorIndex, ProductIndex, RationalPhaseCoeff};
use crate::linalg::{
    hermitian_eig, inner, kron, kron_vec, vector_norm, BipartiteDims, ComplexMatrix, LinalgError,
    C64, ONE, ZERO,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("matrix is {rows}x{cols} but dims {dims} require {expected}x{expected}")]
    DimensionMismatch {
        dims: BipartiteDims,
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("invalid density matrix: {}", list_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("parameter {name} = {value} is out of range {range}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("state JSON parse error: {0}")]
    Parse(String),
    #[error("state JSON schema violation: {0}")]
    Schema(String),
}

fn list_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    NotHermitian { defect: f64 },
    TraceNotOne { trace: f64 },
    NotPositive { min_eigenvalue: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotHermitian { defect } => write!(f, "not Hermitian (defect {defect:.3e})"),
            Violation::TraceNotOne { trace } => write!(f, "trace is {trace} instead of 1"),
            Violation::NotPositive { min_eigenvalue } => {
                write!(f, "not positive (minimum eigenvalue {min_eigenvalue:.3e})")
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, StateError>;

/// Tolerances applied by [`validate`]. The Hermiticity tolerance is scaled by
/// the total dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationTolerances {
    pub hermitian: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
}

impl Default for ValidationTolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-12,
            trace: 1e-12,
            min_eigenvalue: -1e-10,
        }
    }
}

impl ValidationTolerances {
    /// Uniform loosening for noisy inputs.
    pub fn loose(tol: f64) -> Self {
        Self {
            hermitian: tol,
            trace: tol,
            min_eigenvalue: -tol,
        }
    }
}

/// A validated bipartite density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: BipartiteDims,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.dims.total()
    }

    /// Wraps an operator that is a state by construction (mixtures of states).
    /// Only Hermitian symmetrization is applied.
    pub(crate) fn from_trusted(mat: ComplexMatrix, dims: BipartiteDims) -> Self {
        Self {
            dims,
            mat: mat.symmetrized(),
        }
    }
}

/// Checks Hermiticity, unit trace and positivity, reporting every violation.
pub fn validate(raw: &ComplexMatrix, dims: BipartiteDims) -> Result<DensityMatrix> {
    validate_with(raw, dims, ValidationTolerances::default())
}

#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn validate_with(
    raw: &ComplexMatrix,
    dims: BipartiteDims,
    tol: ValidationTolerances,
) -> Result<DensityMatrix> {
    let d = dims.total();
    if raw.rows() != d || raw.cols() != d {
        return Err(StateError::DimensionMismatch {
            dims,
            rows: raw.rows(),
            cols: raw.cols(),
            expected: d,
        });
    }
    let mut violations = Vec::new();
    let defect = raw.hermitian_defect();
    if !(defect <= tol.hermitian * d as f64) {
        violations.push(Violation::NotHermitian { defect });
    }
    let mat = raw.symmetrized();
    let trace = mat.trace().re;
    if !((trace - 1.0).abs() <= tol.trace) {
        violations.push(Violation::TraceNotOne { trace });
    }
    let eig = hermitian_eig(&mat)?;
    let min_eigenvalue = eig.min_eigenvalue();
    if !(min_eigenvalue >= tol.min_eigenvalue) {
        violations.push(Violation::NotPositive { min_eigenvalue });
    }
    if violations.is_empty() {
        Ok(DensityMatrix { dims, mat })
    } else {
        Err(StateError::Invalid(violations))
    }
}

/// A normalized vector on `H_A ⊗ H_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: BipartiteDims,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(dims: BipartiteDims, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != dims.total() {
            return Err(StateError::DimensionMismatch {
                dims,
                rows: amplitudes.len(),
                cols: 1,
                expected: dims.total(),
            });
        }
        let norm = vector_norm(&amplitudes);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(StateError::NotNormalized { norm });
        }
        Ok(Self { dims, amplitudes })
    }

    /// Normalizes the given amplitudes.
    pub fn normalize(dims: BipartiteDims, amplitudes: &[C64]) -> Result<Self> {
        let norm = vector_norm(amplitudes);
        if norm == 0.0 || !norm.is_finite() {
            return Err(StateError::NotNormalized { norm });
        }
        Self::new(dims, amplitudes.iter().map(|z| z / norm).collect())
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.amplitudes)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(self.projector(), self.dims)
    }
}

/// A pure product vector `|a⟩ ⊗ |b⟩` with its cached projector.
#[derive(Clone, PartialEq)]
pub struct ProductState {
    a: Vec<C64>,
    b: Vec<C64>,
    projector: ComplexMatrix,
}

impl fmt::Debug for ProductState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProductState")
            .field("a", &self.a)
            .field("b", &self.b)
            .finish()
    }
}

impl ProductState {
    pub fn new(a: Vec<C64>, b: Vec<C64>) -> Result<Self> {
        for v in [&a, &b] {
            let norm = vector_norm(v);
            if (norm - 1.0).abs() > 1e-12 {
                return Err(StateError::NotNormalized { norm });
            }
        }
        let projector = kron(&ComplexMatrix::projector(&a), &ComplexMatrix::projector(&b));
        Ok(Self { a, b, projector })
    }

    pub fn dims(&self) -> BipartiteDims {
        BipartiteDims {
            n: self.a.len(),
            m: self.b.len(),
        }
    }

    pub fn a(&self) -> &[C64] {
        &self.a
    }

    pub fn b(&self) -> &[C64] {
        &self.b
    }

    pub fn projector(&self) -> &ComplexMatrix {
        &self.projector
    }

    pub fn vector(&self) -> Vec<C64> {
        kron_vec(&self.a, &self.b)
    }

    pub fn to_pure(&self) -> PureState {
        PureState {
            dims: self.dims(),
            amplitudes: self.vector(),
        }
    }

    /// `|⟨self|other⟩|^2`, computed factorwise.
    pub fn overlap_sqr(&self, other: &ProductState) -> f64 {
        (inner(&self.a, &other.a) * inner(&self.b, &other.b)).norm_sqr()
    }
}

// ---------------------------------------------------------------------------
// Generators

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bell {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl FromStr for Bell {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "phi+" | "phi_plus" | "phiplus" => Ok(Bell::PhiPlus),
            "phi-" | "phi_minus" | "phiminus" => Ok(Bell::PhiMinus),
            "psi+" | "psi_plus" | "psiplus" => Ok(Bell::PsiPlus),
            "psi-" | "psi_minus" | "psiminus" => Ok(Bell::PsiMinus),
            other => Err(format!(
                "unknown Bell state {other:?} (phi+, phi-, psi+, psi-)"
            )),
        }
    }
}

pub fn bell_vector(which: Bell) -> Vec<C64> {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    match which {
        Bell::PhiPlus => vec![s, ZERO, ZERO, s],
        Bell::PhiMinus => vec![s, ZERO, ZERO, -s],
        Bell::PsiPlus => vec![ZERO, s, s, ZERO],
        Bell::PsiMinus => vec![ZERO, s, -s, ZERO],
    }
}

pub fn bell(which: Bell) -> DensityMatrix {
    DensityMatrix::from_trusted(
        ComplexMatrix::projector(&bell_vector(which)),
        BipartiteDims { n: 2, m: 2 },
    )
}

/// `|Φ+⟩ = Σ_i |ii⟩ / √n`.
pub fn max_entangled_vector(n: usize) -> Vec<C64> {
    let amp = 1.0 / (n as f64).sqrt();
    let mut v = vec![ZERO; n * n];
    for i in 0..n {
        v[i * n + i] = C64::new(amp, 0.0);
    }
    v
}

pub fn max_mixed(dims: BipartiteDims) -> DensityMatrix {
    let d = dims.total();
    DensityMatrix::from_trusted(ComplexMatrix::identity(d).scale(1.0 / d as f64), dims)
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(StateError::ParameterOutOfRange {
            name,
            value: p,
            range: "[0, 1]",
        });
    }
    Ok(())
}

fn check_local_dim(n: usize) -> Result<BipartiteDims> {
    Ok(BipartiteDims::new(n, n)?)
}

/// `p |Φ+⟩⟨Φ+| + (1 - p) I/n^2` on `n ⊗ n`.
pub fn isotropic(p: f64, n: usize) -> Result<DensityMatrix> {
    check_probability("p", p)?;
    let dims = check_local_dim(n)?;
    let d = dims.total();
    let phi = ComplexMatrix::projector(&max_entangled_vector(n));
    let noise = ComplexMatrix::identity(d).scale((1.0 - p) / d as f64);
    Ok(DensityMatrix::from_trusted(&phi.scale(p) + &noise, dims))
}

/// Swap operator on `n ⊗ n`.
pub fn swap_operator(n: usize) -> ComplexMatrix {
    let d = n * n;
    ComplexMatrix::from_fn(d, d, |r, c| {
        let (i, k) = (r / n, r % n);
        if c == k * n + i {
            ONE
        } else {
            ZERO
        }
    })
}

/// `p (I - SWAP)/(n(n-1)) + (1 - p) I/n^2` on `n ⊗ n`.
pub fn werner(p: f64, n: usize) -> Result<DensityMatrix> {
    check_probability("p", p)?;
    let dims = check_local_dim(n)?;
    let d = dims.total();
    let anti = (&ComplexMatrix::identity(d) - &swap_operator(n)).scale(1.0 / (n * (n - 1)) as f64);
    let noise = ComplexMatrix::identity(d).scale((1.0 - p) / d as f64);
    Ok(DensityMatrix::from_trusted(&anti.scale(p) + &noise, dims))
}

/// Parameters for [`random_rational_separable`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSeparableSpec {
    pub seed: u64,
    /// Number of product atoms in the mixture (at least 1).
    pub count: usize,
    pub dims: BipartiteDims,
    /// Largest denominator used in moduli and phase fractions.
    pub max_denominator: u64,
}

/// A constructed separable mixture together with its atoms.
#[derive(Debug, Clone)]
pub struct RationalMixture {
    pub state: DensityMatrix,
    pub weights: Vec<f64>,
    pub indices: Vec<ProductIndex>,
    pub atoms: Vec<ProductState>,
}

/// Separable state mixing product vectors drawn from the rational grid.
pub fn random_rational_separable(spec: &RandomSeparableSpec) -> Result<DensityMatrix> {
    Ok(random_rational_mixture(spec)?.state)
}

pub fn random_rational_mixture(spec: &RandomSeparableSpec) -> Result<RationalMixture> {
    if spec.count == 0 {
        return Err(StateError::ParameterOutOfRange {
            name: "count",
            value: 0.0,
            range: ">= 1",
        });
    }
    if spec.max_denominator == 0 {
        return Err(StateError::ParameterOutOfRange {
            name: "max_denominator",
            value: 0.0,
            range: ">= 1",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let dims = spec.dims;
    let mut indices = Vec::with_capacity(spec.count);
    let mut atoms = Vec::with_capacity(spec.count);
    while atoms.len() < spec.count {
        let index = ProductIndex {
            a: random_factor(&mut rng, dims.n, spec.max_denominator),
            b: random_factor(&mut rng, dims.m, spec.max_denominator),
        };
        // Rejection keeps the draw uniform over admissible grid tuples.
        if let Some(state) = product_from_index(&index).into_product() {
            indices.push(index);
            atoms.push(state);
        }
    }
    let raw: Vec<f64> = (0..spec.count)
        .map(|_| rng.random_range(1..=8) as f64)
        .collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let d = dims.total();
    let mut mat = ComplexMatrix::zeros(d, d);
    for (w, atom) in weights.iter().zip(&atoms) {
        mat += &atom.projector().scale(*w);
    }
    Ok(RationalMixture {
        state: DensityMatrix::from_trusted(mat, dims),
        weights,
        indices,
        atoms,
    })
}

fn random_fraction(rng: &mut ChaCha8Rng, max_den: u64, closed: bool) -> (u64, u64) {
    loop {
        let den = rng.random_range(1..=max_den);
        let num = if closed {
            rng.random_range(0..=den)
        } else {
            rng.random_range(0..den)
        };
        if gcd(num, den) == 1 {
            return (num, den);
        }
    }
}

fn random_factor(rng: &mut ChaCha8Rng, dim: usize, max_den: u64) -> FactorIndex {
    let free = (0..dim - 1)
        .map(|_| {
            let (p, q) = random_fraction(rng, max_den, true);
            let (r, s) = random_fraction(rng, max_den, false);
            RationalPhaseCoeff { p, q, r, s }
        })
        .collect();
    let closing_phase = random_fraction(rng, max_den, false);
    FactorIndex {
        free,
        closing_phase,
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

// ---------------------------------------------------------------------------
// JSON interchange

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    dims: [usize; 2],
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

/// Parses a state file and validates it with default tolerances.
pub fn read_state(text: &str) -> Result<DensityMatrix> {
    read_state_with(text, ValidationTolerances::default())
}

pub fn read_state_with(text: &str, tol: ValidationTolerances) -> Result<DensityMatrix> {
    let (raw, dims) = read_raw_operator(text)?;
    validate_with(&raw, dims, tol)
}

/// Parses a state file without positivity/trace validation. Used for hull
/// targets, which may be arbitrary Hermitian operators.
pub fn read_raw_operator(text: &str) -> Result<(ComplexMatrix, BipartiteDims)> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| StateError::Parse(e.to_string()))?;
    let file: StateFile =
        serde_json::from_value(value).map_err(|e| StateError::Schema(e.to_string()))?;
    let [n, m] = file.dims;
    let dims = BipartiteDims::new(n, m)
        .map_err(|_| StateError::Schema(format!("dims [{n}, {m}]: each must be >= 2")))?;
    let d = dims.total();
    let rows = file.re.len();
    let shape_ok =
        rows == file.im.len() && file.re.iter().chain(&file.im).all(|row| row.len() == rows);
    if !shape_ok {
        return Err(StateError::Schema(
            "\"re\" and \"im\" must be square arrays of equal shape".into(),
        ));
    }
    if rows != d {
        return Err(StateError::DimensionMismatch {
            dims,
            rows,
            cols: rows,
            expected: d,
        });
    }
    let raw = ComplexMatrix::from_fn(d, d, |i, j| C64::new(file.re[i][j], file.im[i][j]));
    Ok((raw, dims))
}

/// Canonical compact JSON form (one line, no trailing newline).
pub fn write_state(state: &DensityMatrix) -> String {
    write_operator(state.matrix(), state.dims())
}

pub fn write_operator(mat: &ComplexMatrix, dims: BipartiteDims) -> String {
    let d = mat.rows();
    let file = StateFile {
        dims: [dims.n, dims.m],
        re: (0..d)
            .map(|i| (0..d).map(|j| mat[(i, j)].re).collect())
            .collect(),
        im: (0..d)
            .map(|i| (0..d).map(|j| mat[(i, j)].im).collect())
            .collect(),
    };
    serde_json::to_string(&file).expect("state serialization cannot fail")
}

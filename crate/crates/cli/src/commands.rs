use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use sepcheck_core::defaults;
use sepcheck_core::dps::{DpsConfig, DpsOutcome, DpsRunner, EntanglementCertificate};
use sepcheck_core::enumeration::{enumerate_product, product_index, Candidate, ProductIndex};
use sepcheck_core::hull::{
    barycentric_vectors, facet_sign_vectors, GrowingHull, Membership, MembershipResult,
    SeparatingFacet,
};
use sepcheck_core::linalg::{vectorize_hermitian, BipartiteDims, HERMITIAN_TOL};
use sepcheck_core::scheduler::{Certificate, RunConfig, Verdict, VerdictKind};
use sepcheck_core::states::{
    bell, isotropic, max_mixed, random_rational_separable, read_raw_operator, read_state_with,
    werner, write_state, RandomSeparableSpec, ValidationTolerances,
};
use sepcheck_core::{ppt_check, A2Mode, DensityMatrix, ProductState, C64};

use crate::args::{
    Cli, Command, DecideArgs, DpsArgs, EnumerateArgs, GenArgs, HullCheckArgs, HullMode, ModeArg,
};
use crate::error::{CliError, Result};

pub fn dispatch(cli: Cli) -> Result<u8> {
    let tol = validation_tolerances(cli.validation_tol)?;
    match cli.command {
        Command::Decide(a) => decide(a, tol),
        Command::Ppt(a) => ppt(&load_state(&a.state, tol)?),
        Command::Dps(a) => dps(a, tol),
        Command::Enumerate(a) => enumerate(a),
        Command::HullCheck(a) => hull_check(a),
        Command::Gen(a) => generate(a),
    }
}

fn validation_tolerances(tol: Option<f64>) -> Result<ValidationTolerances> {
    match tol {
        None => Ok(ValidationTolerances::default()),
        Some(t) if t > 0.0 && t < 1.0 => Ok(ValidationTolerances::loose(t)),
        Some(t) => Err(CliError::Validation(format!(
            "--validation-tol must lie in (0, 1), got {t}"
        ))),
    }
}

fn read_input(path: &Path) -> Result<String> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(io)
    }
}

fn load_state(path: &Path, tol: ValidationTolerances) -> Result<DensityMatrix> {
    Ok(read_state_with(&read_input(path)?, tol)?)
}

fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Io(format!("stdout: {e}")))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Internal(e.to_string()))
}

fn decide(a: DecideArgs, tol: ValidationTolerances) -> Result<u8> {
    let cfg = RunConfig {
        eta: a.eta,
        budget: a.budget,
        dps: defaults::dps_config(a.dps_level),
        mode: match a.mode {
            ModeArg::Grow => A2Mode::Grow,
            ModeArg::Tuple => A2Mode::Tuple,
        },
        hull_tol: a.hull_tol,
        ..RunConfig::default()
    };
    cfg.validate()?;
    let rho = load_state(&a.state.state, tol)?;
    let verdict = sepcheck_core::run(&rho, &cfg)?;
    if a.json {
        emit(&to_json(&verdict)?)?;
    } else {
        emit(&summary(&verdict))?;
    }
    Ok(verdict.kind.exit_code() as u8)
}

fn summary(v: &Verdict) -> String {
    let steps = format!("{} step{}", v.steps, if v.steps == 1 { "" } else { "s" });
    let body = match (&v.kind, &v.certificate) {
        (VerdictKind::Separable, Certificate::Decomposition(d)) => format!(
            "Separable: {} product atoms, residual {:.3e}, {steps}",
            d.len(),
            d.residual
        ),
        (VerdictKind::Entangled, Certificate::Entanglement(c)) => match c {
            EntanglementCertificate::NegativePartialTranspose { min_eigenvalue, .. } => format!(
                "Entangled ({}): partial transpose eigenvalue {min_eigenvalue:.6e}, {steps}",
                c.label()
            ),
            EntanglementCertificate::ExtensionPlateau { window_min, .. } => format!(
                "Entangled ({}): extension residual stuck at {window_min:.3e}, {steps}",
                c.label()
            ),
        },
        (
            VerdictKind::Border,
            Certificate::Border {
                eta,
                f1_step,
                f2_step,
            },
        ) => format!(
            "Border (eta {eta}): shifted state entangled at step {f1_step}, \
             shifted state separable at step {f2_step}"
        ),
        _ => format!("BudgetExhausted after {steps}"),
    };
    body + "\n"
}

#[derive(Serialize)]
struct PptReport<'a> {
    npt: bool,
    min_eigenvalue: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    eigenvector: Option<&'a [C64]>,
}

fn ppt(rho: &DensityMatrix) -> Result<u8> {
    let r = ppt_check(rho);
    let eigenvector = match &r {
        sepcheck_core::PptResult::Npt { eigenvector, .. } => Some(eigenvector.as_slice()),
        _ => None,
    };
    emit(&to_json(&PptReport {
        npt: r.is_npt(),
        min_eigenvalue: r.min_eigenvalue(),
        eigenvector,
    })?)?;
    Ok(u8::from(r.is_npt()))
}

#[derive(Serialize)]
struct DpsReport<'a> {
    level: usize,
    iterations: usize,
    outcome: &'a DpsOutcome,
    final_residual: Option<f64>,
}

fn dps(a: DpsArgs, tol: ValidationTolerances) -> Result<u8> {
    let cfg = DpsConfig {
        level: a.level,
        max_iterations: a.max_iter,
        impose_ppt_on_extension: a.ppt,
        ..defaults::dps_config(a.level)
    };
    cfg.validate()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let rho = load_state(&a.state.state, tol)?;
    let mut runner = DpsRunner::new(&rho, cfg).map_err(|e| CliError::Validation(e.to_string()))?;
    let mut out = runner.step();
    while !out.is_final() {
        out = runner.step();
    }
    emit(&to_json(&DpsReport {
        level: a.level,
        iterations: runner.iterations(),
        outcome: &out,
        final_residual: runner.residual_history().last().copied(),
    })?)?;
    Ok(match out {
        DpsOutcome::EntangledCertified(_) => 1,
        DpsOutcome::NotDetectedAtLevel {
            converged: false, ..
        } => 3,
        _ => 0,
    })
}

fn dims_from(values: &[usize]) -> Result<BipartiteDims> {
    let [n, m] = values else {
        return Err(CliError::Usage("--dims takes two values".into()));
    };
    BipartiteDims::new(*n, *m).map_err(|e| CliError::Validation(e.to_string()))
}

/// One product state per line, shared by `enumerate` output and
/// `hull-check --points` input.
#[derive(Serialize, Deserialize)]
struct ProductLine {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    index: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    height: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    factors: Option<ProductIndex>,
    a: Vec<C64>,
    b: Vec<C64>,
}

fn enumerate(a: EnumerateArgs) -> Result<u8> {
    let dims = dims_from(&a.dims)?;
    if a.height_max == Some(0) {
        return Err(CliError::Validation(
            "--height-max must be at least 1".into(),
        ));
    }
    let mut out = String::new();
    let mut written = 0;
    let mut i = 0u64;
    while written < a.count {
        let idx = product_index(i, dims);
        let height = idx.height();
        if a.height_max.is_some_and(|h| height > h) {
            break;
        }
        if let Candidate::Product(p) = enumerate_product(i, dims) {
            let line = ProductLine {
                index: Some(i),
                height: Some(height),
                factors: Some(idx),
                a: p.a().to_vec(),
                b: p.b().to_vec(),
            };
            out += &serde_json::to_string(&line).map_err(|e| CliError::Internal(e.to_string()))?;
            out.push('\n');
            written += 1;
        }
        i += 1;
    }
    emit(&out)?;
    Ok(0)
}

#[derive(Serialize)]
struct HullReport {
    mode: &'static str,
    verdict: Membership,
    weights: Option<Vec<f64>>,
    separating_facet: Option<SeparatingFacet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distance: Option<f64>,
}

impl HullReport {
    fn from_membership(mode: &'static str, r: MembershipResult) -> Self {
        Self {
            mode,
            verdict: r.verdict,
            weights: r.weights,
            separating_facet: r.separating_facet,
            distance: None,
        }
    }
}

fn hull_check(a: HullCheckArgs) -> Result<u8> {
    let (raw, dims) = read_raw_operator(&read_input(&a.state.state)?)?;
    let target = raw
        .to_hermitian(HERMITIAN_TOL)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let target_vec = vectorize_hermitian(&target).map_err(|e| CliError::Internal(e.to_string()))?;
    let points = read_points(&a.points, dims)?;
    let vecs: Vec<Vec<f64>> = points
        .iter()
        .map(|p| vectorize_hermitian(p.projector()).expect("projectors are Hermitian"))
        .collect();
    let simplex_tol = a.tol.unwrap_or(defaults::DEGENERATE_TOL);
    let simplex_ready = || -> Result<()> {
        if vecs.len() > dims.caratheodory_bound() {
            return Err(CliError::Validation(format!(
                "{} points exceed the simplex bound {}",
                vecs.len(),
                dims.caratheodory_bound()
            )));
        }
        Ok(())
    };
    let hull_err = |e: sepcheck_core::hull::HullError| CliError::Validation(e.to_string());
    let report = match a.mode {
        HullMode::Facet => {
            simplex_ready()?;
            let r = facet_sign_vectors(&vecs, &target_vec, simplex_tol).map_err(hull_err)?;
            HullReport::from_membership("facet", r)
        }
        HullMode::Bary => {
            simplex_ready()?;
            let r = barycentric_vectors(&vecs, &target_vec, simplex_tol).map_err(hull_err)?;
            HullReport::from_membership("bary", r)
        }
        HullMode::Grow => {
            let tol = a.tol.unwrap_or(defaults::HULL_TOL);
            let mut hull = GrowingHull::new(target_vec, tol);
            for v in &vecs {
                hull.push(v);
            }
            let res = hull.solve();
            HullReport {
                mode: "grow",
                verdict: if res.distance <= tol {
                    Membership::In
                } else {
                    Membership::Out
                },
                weights: Some(res.weights),
                separating_facet: None,
                distance: Some(res.distance),
            }
        }
    };
    emit(&to_json(&report)?)?;
    Ok(0)
}

fn read_points(path: &Path, dims: BipartiteDims) -> Result<Vec<ProductState>> {
    let text = read_input(path)?;
    let mut out = Vec::new();
    for (k, line) in text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let bad =
            |m: String| CliError::Validation(format!("{} line {}: {m}", path.display(), k + 1));
        let p: ProductLine = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        if p.a.len() != dims.n || p.b.len() != dims.m {
            return Err(bad(format!(
                "factor lengths {}x{} do not match dims {dims}",
                p.a.len(),
                p.b.len()
            )));
        }
        out.push(ProductState::new(p.a, p.b).map_err(|e| bad(e.to_string()))?);
    }
    if out.is_empty() {
        return Err(CliError::Validation(format!(
            "{}: no points",
            path.display()
        )));
    }
    Ok(out)
}

fn generate(a: GenArgs) -> Result<u8> {
    let state = if let Some(which) = a.bell {
        bell(which)
    } else if let Some(p) = a.isotropic {
        isotropic(p, a.n)?
    } else if let Some(p) = a.werner {
        werner(p, a.n)?
    } else if a.maxmixed {
        max_mixed(dims_from(&a.dims)?)
    } else {
        let spec = RandomSeparableSpec {
            seed: a.seed,
            count: a.count,
            dims: dims_from(&a.dims)?,
            max_denominator: a.max_den,
        };
        random_rational_separable(&spec)?
    };
    let text = write_state(&state) + "\n";
    match a.out {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => emit(&text)?,
    }
    Ok(0)
}

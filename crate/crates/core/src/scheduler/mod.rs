//! The combined two-way search.
//!
//! Four streams advance in lockstep, one unit of work each per iteration:
//!
//! 1. entanglement search on `ρ`;
//! 2. separability search on `ρ`;
//! 3. entanglement search on `ρ_e = (1+η)ρ - η·I/d`, which sets `f1`;
//! 4. separability search on `ρ_s = (1-η)ρ + η·I/d`, which sets `f2`.
//!
//! At the end of each iteration, a hit on stream 1 ends the run as
//! `Entangled`, a hit on stream 2 as `Separable`, and `f1 ∧ f2` as `Border`.
//! When `ρ_e` is not a state, streams 3 and 4 are dropped and `Border` is
//! never reported.

mod a2;
mod source;

use serde::Serialize;
use thiserror::Error;

use crate::defaults;
use crate::dps::{DpsConfig, DpsError, DpsOutcome, DpsRunner, EntanglementCertificate};
use crate::enumeration::RangeContext;
use crate::hull::SeparableDecomposition;
use crate::linalg::{hermitian_eig, ComplexMatrix};
use crate::states::DensityMatrix;

pub use a2::{A2Counters, A2Mode};

use a2::A2Stream;
use source::ProductSource;

pub const IDENTITY_NOTE: &str =
    "shifted states mix with the maximally mixed state I/d so that both keep unit trace";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchedulerError {
    #[error("eta must lie strictly between 0 and 1, got {0}")]
    EtaOutOfRange(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Dps(#[from] DpsError),
}

/// `ρ` pushed out of and into the separable set by `η`.
#[derive(Debug, Clone)]
pub struct EtaShift {
    pub eta: f64,
    /// `(1+η)ρ - η·I/d`; a state only when `valid`.
    pub rho_e: ComplexMatrix,
    pub rho_s: DensityMatrix,
    pub valid: bool,
    pub rho_e_min_eigenvalue: f64,
}

impl EtaShift {
    /// `ρ_e` as a state, when it is one.
    pub fn rho_e_state(&self) -> Option<DensityMatrix> {
        self.valid
            .then(|| DensityMatrix::from_trusted(self.rho_e.clone(), self.rho_s.dims()))
    }
}

pub fn make_shift(rho: &DensityMatrix, eta: f64) -> Result<EtaShift, SchedulerError> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(SchedulerError::EtaOutOfRange(eta));
    }
    let d = rho.dim();
    let noise = ComplexMatrix::identity(d).scale(eta / d as f64);
    let rho_e = (&rho.matrix().scale(1.0 + eta) - &noise).symmetrized();
    let rho_s = (&rho.matrix().scale(1.0 - eta) + &noise).symmetrized();
    let rho_e_min_eigenvalue = hermitian_eig(&rho_e)
        .expect("Hermitian by construction")
        .min_eigenvalue();
    Ok(EtaShift {
        eta,
        rho_e,
        rho_s: DensityMatrix::from_trusted(rho_s, rho.dims()),
        valid: rho_e_min_eigenvalue >= -defaults::SHIFT_PSD_TOL,
        rho_e_min_eigenvalue,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunConfig {
    pub eta: f64,
    pub budget: u64,
    pub dps: DpsConfig,
    pub mode: A2Mode,
    pub hull_tol: f64,
    pub degenerate_tol: f64,
    pub rank_cutoff: f64,
    pub product_tol: f64,
    pub indices_per_step: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            eta: defaults::ETA,
            budget: defaults::STEP_BUDGET,
            dps: defaults::dps_config(defaults::DPS_LEVEL),
            mode: A2Mode::Grow,
            hull_tol: defaults::HULL_TOL,
            degenerate_tol: defaults::DEGENERATE_TOL,
            rank_cutoff: defaults::RANK_CUTOFF,
            product_tol: defaults::PRODUCT_TOL,
            indices_per_step: defaults::INDICES_PER_STEP,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), SchedulerError> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(SchedulerError::EtaOutOfRange(self.eta));
        }
        self.dps.validate()?;
        let positive = [
            ("hull_tol", self.hull_tol),
            ("degenerate_tol", self.degenerate_tol),
            ("rank_cutoff", self.rank_cutoff),
            ("product_tol", self.product_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v < 1.0) {
                return Err(SchedulerError::InvalidConfig(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        if self.indices_per_step == 0 {
            return Err(SchedulerError::InvalidConfig(
                "indices_per_step must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerdictKind {
    Entangled,
    Separable,
    Border,
    BudgetExhausted,
}

impl VerdictKind {
    pub fn exit_code(self) -> i32 {
        match self {
            VerdictKind::Separable => 0,
            VerdictKind::Entangled => 1,
            VerdictKind::Border => 2,
            VerdictKind::BudgetExhausted => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Certificate {
    Entanglement(EntanglementCertificate),
    Decomposition(SeparableDecomposition),
    Border {
        eta: f64,
        f1_step: u64,
        f2_step: u64,
    },
    Budget {
        steps: u64,
    },
}

/// Units of work done by each stream.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StreamSteps {
    pub entangled_rho: u64,
    pub separable_rho: u64,
    pub entangled_rho_e: u64,
    pub separable_rho_s: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub f1: bool,
    pub f2: bool,
    pub f1_step: Option<u64>,
    pub f2_step: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    /// Scheduler iterations executed.
    pub steps: u64,
    pub certificate: Certificate,
    pub stream_steps: StreamSteps,
    pub flags: Flags,
    pub rank: usize,
    pub range_mode: bool,
    pub rho_e_valid: bool,
    pub separable_counters: A2Counters,
    pub settings: RunConfig,
    pub notes: Vec<String>,
}

struct A1Stream {
    runner: DpsRunner,
}

impl A1Stream {
    /// `None` once the runner has finished without a detection.
    fn step(&mut self) -> Option<DpsOutcome> {
        if self.runner.is_finished() {
            return None;
        }
        Some(self.runner.step())
    }
}

fn entanglement_hit(out: &Option<DpsOutcome>) -> Option<EntanglementCertificate> {
    match out {
        Some(DpsOutcome::EntangledCertified(c)) => Some(c.clone()),
        _ => None,
    }
}

pub fn run(rho: &DensityMatrix, cfg: &RunConfig) -> Result<Verdict, SchedulerError> {
    cfg.validate()?;
    let shift = make_shift(rho, cfg.eta)?;
    let range = RangeContext::new(rho, cfg.rank_cutoff);
    let rank = range.rank();
    let range_mode = !range.is_full_rank();
    let dims = rho.dims();

    let mut s1 = A1Stream {
        runner: DpsRunner::new(rho, cfg.dps)?,
    };
    let (source2, bound2) = if range_mode {
        let bound = range.caratheodory_bound();
        (
            ProductSource::range(range, cfg.product_tol, cfg.indices_per_step),
            bound,
        )
    } else {
        (
            ProductSource::full(dims, cfg.product_tol, cfg.indices_per_step),
            dims.caratheodory_bound(),
        )
    };
    let mut s2 = A2Stream::new(
        rho,
        source2,
        cfg.mode,
        bound2,
        cfg.hull_tol,
        cfg.degenerate_tol,
    );
    let (mut s3, mut s4) = match shift.rho_e_state() {
        Some(rho_e) => (
            Some(A1Stream {
                runner: DpsRunner::new(&rho_e, cfg.dps)?,
            }),
            Some(A2Stream::new(
                &shift.rho_s,
                ProductSource::full(dims, cfg.product_tol, cfg.indices_per_step),
                cfg.mode,
                dims.caratheodory_bound(),
                cfg.hull_tol,
                cfg.degenerate_tol,
            )),
        ),
        None => (None, None),
    };

    let mut notes = vec![IDENTITY_NOTE.to_string()];
    if !shift.valid {
        notes.push(format!(
            "rho_e has eigenvalue {:.3e}; shifted streams dropped and no border verdict possible",
            shift.rho_e_min_eigenvalue
        ));
    }
    if range_mode {
        notes.push(format!(
            "rank {rank} below {}; separability search restricted to the support",
            dims.total()
        ));
    }

    let mut counts = StreamSteps::default();
    let mut flags = Flags::default();
    let finish = |kind, steps, certificate, counts, flags, s2: &A2Stream, notes| Verdict {
        kind,
        steps,
        certificate,
        stream_steps: counts,
        flags,
        rank,
        range_mode,
        rho_e_valid: shift.valid,
        separable_counters: s2.counters(),
        settings: *cfg,
        notes,
    };

    for i in 1..=cfg.budget {
        let before = flags;
        let o1 = s1.step();
        counts.entangled_rho += u64::from(o1.is_some());
        let d2 = s2.step();
        counts.separable_rho += 1;

        if !flags.f1 {
            if let Some(s3) = s3.as_mut() {
                let o3 = s3.step();
                counts.entangled_rho_e += u64::from(o3.is_some());
                if entanglement_hit(&o3).is_some() {
                    flags.f1 = true;
                    flags.f1_step = Some(i);
                }
            }
        }
        if !flags.f2 {
            if let Some(s4) = s4.as_mut() {
                counts.separable_rho_s += 1;
                if s4.step().is_some() {
                    flags.f2 = true;
                    flags.f2_step = Some(i);
                }
            }
        }

        assert!(
            (flags.f1 || !before.f1) && (flags.f2 || !before.f2),
            "flags never reset"
        );

        if let Some(cert) = entanglement_hit(&o1) {
            let c = Certificate::Entanglement(cert);
            return Ok(finish(
                VerdictKind::Entangled,
                i,
                c,
                counts,
                flags,
                &s2,
                notes,
            ));
        }
        if let Some(cert) = d2 {
            let c = Certificate::Decomposition(cert);
            return Ok(finish(
                VerdictKind::Separable,
                i,
                c,
                counts,
                flags,
                &s2,
                notes,
            ));
        }
        if flags.f1 && flags.f2 {
            let c = Certificate::Border {
                eta: cfg.eta,
                f1_step: flags.f1_step.expect("set with f1"),
                f2_step: flags.f2_step.expect("set with f2"),
            };
            return Ok(finish(VerdictKind::Border, i, c, counts, flags, &s2, notes));
        }
    }
    let c = Certificate::Budget { steps: cfg.budget };
    Ok(finish(
        VerdictKind::BudgetExhausted,
        cfg.budget,
        c,
        counts,
        flags,
        &s2,
        notes,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::BipartiteDims;
    use crate::states::{bell, isotropic, max_mixed, Bell};

    fn dims() -> BipartiteDims {
        BipartiteDims::new(2, 2).unwrap()
    }

    #[test]
    fn shift_of_max_mixed_is_fixed() {
        let rho = max_mixed(dims());
        let s = make_shift(&rho, 0.3).unwrap();
        assert!(s.valid);
        assert!(s.rho_e.approx_eq(rho.matrix(), 1e-15));
        assert!(s.rho_s.matrix().approx_eq(rho.matrix(), 1e-15));
    }

    #[test]
    fn shift_of_bell_is_invalid() {
        for eta in [0.01, 0.05, 0.5] {
            let s = make_shift(&bell(Bell::PhiPlus), eta).unwrap();
            assert!(!s.valid);
            assert!((s.rho_e_min_eigenvalue + eta / 4.0).abs() < 1e-12);
            assert!((s.rho_e.trace().re - 1.0).abs() < 1e-12);
            assert!((s.rho_s.matrix().trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eta_bounds() {
        let rho = max_mixed(dims());
        for eta in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(matches!(
                make_shift(&rho, eta),
                Err(SchedulerError::EtaOutOfRange(_))
            ));
        }
    }

    #[test]
    fn bell_entangled_at_step_one() {
        let v = run(&bell(Bell::PhiPlus), &RunConfig::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::Entangled);
        assert_eq!(v.steps, 1);
        let Certificate::Entanglement(EntanglementCertificate::NegativePartialTranspose {
            min_eigenvalue,
            ..
        }) = v.certificate
        else {
            panic!("{:?}", v.certificate)
        };
        assert!((min_eigenvalue + 0.5).abs() < 1e-12);
        assert!(!v.rho_e_valid && v.range_mode && v.rank == 1);
    }

    #[test]
    fn max_mixed_separable_with_four_atoms() {
        let v = run(&max_mixed(dims()), &RunConfig::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::Separable);
        assert_eq!(v.steps, 4);
        let Certificate::Decomposition(d) = &v.certificate else {
            panic!()
        };
        assert_eq!(d.len(), 4);
        for (w, _) in &d.pairs {
            assert!((w - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_budget() {
        let cfg = RunConfig {
            budget: 0,
            ..RunConfig::default()
        };
        let v = run(&max_mixed(dims()), &cfg).unwrap();
        assert_eq!(v.kind, VerdictKind::BudgetExhausted);
        assert_eq!(v.steps, 0);
        assert_eq!(v.stream_steps, StreamSteps::default());
    }

    #[test]
    fn isotropic_border() {
        let cfg = RunConfig {
            eta: 0.2,
            ..RunConfig::default()
        };
        let v = run(&isotropic(1.0 / 3.0, 2).unwrap(), &cfg).unwrap();
        assert_eq!(v.kind, VerdictKind::Border, "{:?}", v.flags);
    }

    #[test]
    fn verdict_serializes() {
        let v = run(&max_mixed(dims()), &RunConfig::default()).unwrap();
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["kind"], "Separable");
        assert_eq!(json["certificate"]["type"], "decomposition");
        assert_eq!(json["certificate"]["atoms"].as_array().unwrap().len(), 4);
    }
}

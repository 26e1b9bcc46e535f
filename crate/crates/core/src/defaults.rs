//! Every default setting, in one table. Command-line flags override these;
//! nothing reads the environment.
//!
//! | setting | value | used by |
//! |---|---|---|
//! | `ETA` | 0.05 | width of the border band |
//! | `STEP_BUDGET` | 100 000 | scheduler iterations before giving up |
//! | `DPS_LEVEL` | 1 | 1 is the partial transpose test |
//! | `DPS_MAX_ITERATIONS` | 10 000 | projection passes per extension search |
//! | `DPS_FEASIBILITY_TOL` | 1e-6 | residual accepted as an extension |
//! | `DPS_INFEASIBILITY_THRESHOLD` | 1e-3 | plateau floor for the heuristic verdict |
//! | `DPS_PLATEAU_WINDOW` | 500 | passes a plateau must last |
//! | `DPS_PLATEAU_SPREAD` | 1e-2 | relative spread allowed in the window |
//! | `HULL_TOL` | 1e-8 | hull distance and certificate residual |
//! | `DEGENERATE_TOL` | 1e-9 | facet test band and affine independence |
//! | `RANK_CUTOFF` | 1e-9 | eigenvalues counted in the support |
//! | `PRODUCT_TOL` | 1e-8 | purity defect and range membership |
//! | `SHIFT_PSD_TOL` | 1e-10 | smallest eigenvalue of a valid shifted state |
//! | `INDICES_PER_STEP` | 4096 | enumeration indices tried per step |
//! | `VALIDATION` | 1e-12 / 1e-12 / -1e-10 | Hermiticity, trace, eigenvalue floor |

use crate::dps::DpsConfig;

pub const ETA: f64 = 0.05;
pub const STEP_BUDGET: u64 = 100_000;
pub const DPS_LEVEL: usize = 1;
pub const DPS_MAX_ITERATIONS: usize = 10_000;
pub const DPS_FEASIBILITY_TOL: f64 = 1e-6;
pub const DPS_INFEASIBILITY_THRESHOLD: f64 = 1e-3;
pub const DPS_PLATEAU_WINDOW: usize = 500;
pub const DPS_PLATEAU_SPREAD: f64 = 1e-2;
pub const HULL_TOL: f64 = crate::hull::HULL_TOL;
pub const DEGENERATE_TOL: f64 = crate::hull::DEGENERATE_TOL;
pub const RANK_CUTOFF: f64 = 1e-9;
pub const PRODUCT_TOL: f64 = crate::enumeration::PRODUCT_TOL;
pub const SHIFT_PSD_TOL: f64 = 1e-10;
pub const INDICES_PER_STEP: u64 = 4096;

pub fn dps_config(level: usize) -> DpsConfig {
    DpsConfig {
        level,
        impose_ppt_on_extension: false,
        max_iterations: DPS_MAX_ITERATIONS,
        feasibility_tol: DPS_FEASIBILITY_TOL,
        infeasibility_threshold: DPS_INFEASIBILITY_THRESHOLD,
        plateau_window: DPS_PLATEAU_WINDOW,
        plateau_spread: DPS_PLATEAU_SPREAD,
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn dps_defaults_agree() {
        assert_eq!(super::dps_config(1), crate::dps::DpsConfig::default());
    }
}

//! Fixed-point chirp design, the transformed-frame phase residual, the
//! rotating-wave validity heuristic, and transfer verification.

mod check;
mod chirp;
mod report;
mod residual;

pub use check::{
    modulation_depth, rwa_validity_metric, verify_on_map, verify_transfer, RwaMetric, Transfer,
    VerifyOptions, RWA_THRESHOLD, TRANSFER_THRESHOLD,
};
pub use chirp::{design_chirp, design_grid, ChirpDesign, ChirpIterate, DesignOptions};
pub use report::DesignReport;
pub use residual::{chirp_residual, ChirpResidual, RESIDUAL_STENCIL};

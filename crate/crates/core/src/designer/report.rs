use std::fmt::Write as _;
use std::path::Path;

use crate::designer::{ChirpDesign, RwaMetric, Transfer};
use crate::error::{Error, Result};
use crate::model::format_sample_table;

/// Everything a design run produced.
#[derive(Debug, Clone)]
pub struct DesignReport {
    pub design: ChirpDesign,
    pub rwa_metric: RwaMetric,
    pub rwa_threshold: f64,
    pub modulation_depth: f64,
    pub transfer: Option<Transfer>,
    pub transfer_threshold: f64,
}

impl DesignReport {
    pub fn converged(&self) -> bool {
        self.design.converged
    }

    pub fn residual(&self) -> f64 {
        self.design.final_residual()
    }

    /// Key-value summary, one `key = value` per line, fixed key order.
    pub fn to_text(&self) -> String {
        let d = &self.design;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("converged", d.converged.to_string());
        kv("iterations", d.iterations().to_string());
        kv("final_change", format!("{:e}", d.final_change()));
        kv("residual_sup", format!("{:e}", d.final_residual()));
        kv("relaxation", d.relaxation.to_string());
        kv("grid_points", d.grid.len().to_string());
        kv("t_start", d.grid[0].to_string());
        kv("t_end", d.grid[d.grid.len() - 1].to_string());
        kv("rwa_metric", format!("{:e}", self.rwa_metric.value));
        kv("rwa_metric_at", self.rwa_metric.at.to_string());
        kv("rwa_threshold", self.rwa_threshold.to_string());
        kv(
            "rwa_pass",
            self.rwa_metric.passes(self.rwa_threshold).to_string(),
        );
        kv("modulation_depth", format!("{:e}", self.modulation_depth));
        if let Some(t) = &self.transfer {
            kv("p_beta_max", format!("{:.12}", t.p_beta_max));
            kv("tau_at_max", format!("{:.12}", t.tau_at_max));
            kv("tau_end", format!("{:.12}", t.tau_end));
            kv("p_beta_end", format!("{:.12}", t.p_beta_end));
            kv("norm_drift", format!("{:e}", t.norm_drift));
            kv("transfer_threshold", self.transfer_threshold.to_string());
            kv(
                "transfer_pass",
                t.passes(self.transfer_threshold).to_string(),
            );
        }
        for h in &d.history {
            kv(
                &format!("iteration.{}", h.iteration),
                format!("change={:e} residual={:e}", h.change, h.residual),
            );
        }
        out
    }

    /// Converged chirp as a two-column sample table.
    pub fn chirp_table(&self) -> String {
        format_sample_table("t omega", &self.design.grid, self.design.values())
    }

    /// Write `report.txt` and `chirp.dat` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let report = dir.join("report.txt");
        std::fs::write(&report, self.to_text()).map_err(|e| Error::io(&report, e))?;
        let chirp = dir.join("chirp.dat");
        std::fs::write(&chirp, self.chirp_table()).map_err(|e| Error::io(&chirp, e))
    }
}

//! CSV and JSON writers.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use cbwring_core::dsl::Bindings;
use cbwring_core::{CaseReport, FringeMetrics, ModeTrace, Peak, Trace, TransferMatrix};
use serde::Serialize;

use crate::config::RunConfig;
use crate::{io_error, CliError};

pub const SCHEMA_VERSION: u32 = 1;

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_error(path, e))
}

/// Columns of a trace file: `psi,I_A,I_B[,I_FP][,amp_A_m<k>,amp_B_m<k>...]`.
pub struct CsvColumns<'a> {
    pub trace: &'a Trace,
    pub fp: Option<&'a Trace>,
    pub modes: &'a [ModeTrace],
}

impl CsvColumns<'_> {
    pub fn header(&self) -> String {
        let mut h = String::from("psi,I_A,I_B");
        if self.fp.is_some() {
            h.push_str(",I_FP");
        }
        for m in self.modes {
            let _ = write!(h, ",amp_A_m{0},amp_B_m{0}", m.order);
        }
        h
    }

    pub fn write(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", self.header())?;
        let mut row = String::new();
        for i in 0..self.trace.len() {
            row.clear();
            let _ = write!(
                row,
                "{:.16e},{:.16e},{:.16e}",
                self.trace.psi_grid[i], self.trace.i_a[i], self.trace.i_b[i]
            );
            if let Some(fp) = self.fp {
                let _ = write!(row, ",{:.16e}", fp.i_a[i]);
            }
            for m in self.modes {
                let _ = write!(row, ",{:.16e},{:.16e}", m.amp_a[i], m.amp_b[i]);
            }
            writeln!(w, "{row}")?;
        }
        w.flush()
    }

    pub fn write_file(&self, path: &Path) -> Result<(), CliError> {
        let mut w = create(path)?;
        self.write(&mut w).map_err(|e| io_error(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlternateGain {
    pub name: String,
    pub fwhm_cbw: Option<f64>,
    pub resolution_gain: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub config: RunConfig,
    /// Fringe maxima of channel A above half height.
    pub peaks: Vec<Peak>,
    pub peak_fwhm: Vec<Option<f64>>,
    pub fwhm_cbw: f64,
    pub fwhm_fp: f64,
    pub resolution_gain: f64,
    pub cases: CaseReport,
    pub cases_pass: bool,
    pub zeta_max_dev: f64,
    pub sagnac_psi: f64,
    /// Gains under the other channel and loss conventions, for reference.
    pub alternate_conventions: Vec<AlternateGain>,
    pub wall_time_s: f64,
    #[serde(skip)]
    cbw: Trace,
    #[serde(skip)]
    fp: Trace,
}

impl CompareReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        config: RunConfig,
        metrics: FringeMetrics,
        zeta_max_dev: f64,
        sagnac_psi: f64,
        alternate_conventions: Vec<AlternateGain>,
        wall_time_s: f64,
        cbw: Trace,
        fp: Trace,
    ) -> Self {
        CompareReport {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            config,
            peaks: metrics.peaks,
            peak_fwhm: metrics.fwhm,
            fwhm_cbw: metrics.resolution.fwhm_cbw,
            fwhm_fp: metrics.resolution.fwhm_fp,
            resolution_gain: metrics.resolution.gain,
            cases_pass: metrics.case_report.all_pass(),
            cases: metrics.case_report,
            zeta_max_dev,
            sagnac_psi,
            alternate_conventions,
            wall_time_s,
            cbw,
            fp,
        }
    }

    pub fn cbw_trace(&self) -> &Trace {
        &self.cbw
    }

    pub fn fp_trace(&self) -> &Trace {
        &self.fp
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_json(&self, path: &Path) -> Result<(), CliError> {
        let mut w = create(path)?;
        writeln!(w, "{}", self.to_json())
            .and_then(|_| w.flush())
            .map_err(|e| io_error(path, e))
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        CsvColumns {
            trace: &self.cbw,
            fp: Some(&self.fp),
            modes: &[],
        }
        .write_file(path)
    }

    pub fn failed_cases(&self) -> Vec<String> {
        self.cases
            .cases
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{:?} (max residual {:.3e})", c.case, c.max_residual))
            .collect()
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "FWHM CBW        {:.6e} rad", self.fwhm_cbw);
        let _ = writeln!(s, "FWHM FP         {:.6e} rad", self.fwhm_fp);
        let _ = writeln!(s, "resolution gain {:.4}", self.resolution_gain);
        for c in &self.cases.cases {
            let _ = writeln!(
                s,
                "case {:<3}        {} (max residual {:.3e}, tol {:e})",
                format!("{:?}", c.case).to_lowercase(),
                if c.pass { "pass" } else { "FAIL" },
                c.max_residual,
                self.cases.tol
            );
        }
        let _ = writeln!(s, "zeta deviation  {:.3e}", self.zeta_max_dev);
        let _ = write!(s, "sagnac phase    {:.6e} rad", self.sagnac_psi);
        s
    }
}

pub fn matrix_table(chain: &str, m: &TransferMatrix) -> String {
    let mut s = format!("chain {chain}\n");
    for (row, entries) in [[m.m00, m.m01], [m.m10, m.m11]].iter().enumerate() {
        let _ = write!(s, "  row {row}:");
        for z in entries {
            let _ = write!(s, "  {:+.12} {:+.12}i", z.re, z.im);
        }
        s.push('\n');
    }
    let _ = writeln!(s, "  unitarity defect {:.3e}", m.unitarity_defect());
    s
}

pub fn matrix_json(chain: &str, bindings: &Bindings, m: &TransferMatrix) -> serde_json::Value {
    let entry = |z: cbwring_core::ComplexAmp| serde_json::json!({ "re": z.re, "im": z.im });
    let bound: serde_json::Map<String, serde_json::Value> = bindings
        .iter()
        .map(|(k, v)| (k.to_string(), serde_json::json!(v)))
        .collect();
    serde_json::json!({
        "chain": chain,
        "bindings": bound,
        "matrix": [[entry(m.m00), entry(m.m01)], [entry(m.m10), entry(m.m11)]],
        "unitarity_defect": m.unitarity_defect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use cbwring_core::{sweep, CavityConfig, Grid};

    #[test]
    fn csv_layout() {
        let cfg = CavityConfig {
            max_order: 3,
            ..Default::default()
        };
        let grid = Grid::new(0.0, 1.0, 5).unwrap();
        let trace = sweep(&cfg, &grid).unwrap();
        let modes = cbwring_core::mode_traces(&[1, 3], &cfg, &grid).unwrap();
        let cols = CsvColumns {
            trace: &trace,
            fp: None,
            modes: &modes,
        };
        assert_eq!(
            cols.header(),
            "psi,I_A,I_B,amp_A_m1,amp_B_m1,amp_A_m3,amp_B_m3"
        );
        let mut buf = Vec::new();
        cols.write(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[1].split(',').count(), 7);
        assert!(lines[1].starts_with("0.0000000000000000e0,"));
    }
}

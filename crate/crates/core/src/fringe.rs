//! Fringe metrology on intensity traces: peaks, FWHM, the CBW/FP resolution
//! gain, and checks of the analytic interference cases.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::cavity::{superpose, sweep, sweep_with, CavityConfig, Grid, SweepOptions, Trace};
use crate::error::{Error, Result};
use crate::optics::Phase;

/// Minimum normalized height for a fringe maximum to count as a peak when
/// measuring widths.
pub const PRINCIPAL_MIN_HEIGHT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    A,
    B,
}

impl Channel {
    fn of(self, trace: &Trace) -> &[f64] {
        match self {
            Channel::A => &trace.i_a,
            Channel::B => &trace.i_b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Sub-sample position from a 3-point parabola through the maximum.
    pub position: Phase,
    /// Sampled intensity at `index`.
    pub height: f64,
    pub index: usize,
    pub channel: Channel,
}

fn parabola(x: &[f64], y: &[f64], i: usize) -> (f64, f64) {
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    if denom >= 0.0 {
        return (x[i], y1);
    }
    let offset = (0.5 * (y0 - y2) / denom).clamp(-0.5, 0.5);
    let h = 0.5 * (x[i + 1] - x[i - 1]);
    (x[i] + offset * h, y1 - 0.25 * (y0 - y2) * offset)
}

/// Interior local maxima above `min_height`, in grid order.
///
/// A plateau yields one peak at its first sample. End points are never
/// peaks since they cannot be refined.
pub fn find_peaks(trace: &Trace, channel: Channel, min_height: f64) -> Vec<Peak> {
    let y = channel.of(trace);
    let x = &trace.psi_grid;
    if y.len() < 3 {
        return Vec::new();
    }
    (1..y.len() - 1)
        .filter(|&i| y[i] > min_height && y[i] > y[i - 1] && y[i] >= y[i + 1])
        .map(|i| Peak {
            position: Phase::new(parabola(x, y, i).0),
            height: y[i],
            index: i,
            channel,
        })
        .collect()
}

/// Walk from the peak until the intensity drops to `level`, interpolating
/// linearly between the bracketing samples.
fn crossing(x: &[f64], y: &[f64], start: usize, level: f64, forward: bool) -> Option<f64> {
    let mut prev = start;
    loop {
        let next = if forward {
            (prev + 1 < y.len()).then_some(prev + 1)?
        } else {
            prev.checked_sub(1)?
        };
        if y[next] <= level {
            let t = (y[prev] - level) / (y[prev] - y[next]);
            return Some(x[prev] + t * (x[next] - x[prev]));
        }
        prev = next;
    }
}

/// Full width at half of the (parabola-refined) peak intensity.
pub fn fwhm(trace: &Trace, peak: &Peak) -> Result<f64> {
    let y = peak.channel.of(trace);
    let x = &trace.psi_grid;
    let i = peak.index;
    if i == 0 || i + 1 >= y.len() {
        return Err(Error::Analysis(format!(
            "peak index {i} is on the grid edge"
        )));
    }
    let level = 0.5 * parabola(x, y, i).1;
    let right = crossing(x, y, i, level, true);
    let left = crossing(x, y, i, level, false);
    match (left, right) {
        (Some(l), Some(r)) => Ok(r - l),
        _ => Err(Error::Analysis(format!(
            "half maximum of the peak at {} is not bracketed by the grid",
            x[i]
        ))),
    }
}

/// Peak on channel A nearest to `target`.
pub fn principal_peak(trace: &Trace, target: f64) -> Result<Peak> {
    find_peaks(trace, Channel::A, PRINCIPAL_MIN_HEIGHT)
        .into_iter()
        .min_by(|p, q| {
            let dp = (p.position.radians() - target).abs();
            let dq = (q.position.radians() - target).abs();
            dp.total_cmp(&dq)
        })
        .ok_or_else(|| Error::Analysis("no fringe peak above half height on channel A".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolutionSummary {
    pub cbw_peak: Peak,
    pub fp_peak: Peak,
    pub fwhm_cbw: f64,
    pub fwhm_fp: f64,
    /// `fwhm_fp / fwhm_cbw`.
    pub gain: f64,
}

/// Compare the principal (nearest-π) fringes of a CBW and a FP trace.
pub fn measure_resolution(cbw: &Trace, fp: &Trace) -> Result<ResolutionSummary> {
    let cbw_peak = principal_peak(cbw, PI)?;
    let fp_peak = principal_peak(fp, PI)?;
    let fwhm_cbw = fwhm(cbw, &cbw_peak)?;
    let fwhm_fp = fwhm(fp, &fp_peak)?;
    Ok(ResolutionSummary {
        cbw_peak,
        fp_peak,
        fwhm_cbw,
        fwhm_fp,
        gain: fwhm_fp / fwhm_cbw,
    })
}

pub fn resolution_gain(cbw: &Trace, fp: &Trace) -> Result<f64> {
    measure_resolution(cbw, fp).map(|s| s.gain)
}

/// The three analytic interference cases for the aggregate sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalyticCase {
    /// `ψ = ±(2n-1)π/2`: both detectors dark.
    I,
    /// `ψ = ±2nπ`: both detectors dark.
    Ii,
    /// `ψ = ±(2n-1)π`: A at full (normalized) intensity, B dark.
    Iii,
}

impl AnalyticCase {
    pub const ALL: [AnalyticCase; 3] = [AnalyticCase::I, AnalyticCase::Ii, AnalyticCase::Iii];

    fn phases(self) -> Vec<f64> {
        let n_values = [1.0, 2.0];
        match self {
            AnalyticCase::I => n_values
                .iter()
                .flat_map(|n| [(2.0 * n - 1.0) * FRAC_PI_2, -(2.0 * n - 1.0) * FRAC_PI_2])
                .collect(),
            AnalyticCase::Ii => std::iter::once(0.0)
                .chain(n_values.iter().flat_map(|n| [2.0 * n * PI, -2.0 * n * PI]))
                .collect(),
            AnalyticCase::Iii => n_values
                .iter()
                .flat_map(|n| [(2.0 * n - 1.0) * PI, -(2.0 * n - 1.0) * PI])
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseCheck {
    pub psi: f64,
    pub channel: Channel,
    /// Normalized intensity.
    pub value: f64,
    pub expected: f64,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub case: AnalyticCase,
    pub pass: bool,
    pub max_residual: f64,
    pub checks: Vec<CaseCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub tol: f64,
    pub cases: Vec<CaseResult>,
}

impl CaseReport {
    pub fn all_pass(&self) -> bool {
        self.cases.iter().all(|c| c.pass)
    }

    pub fn case(&self, which: AnalyticCase) -> Option<&CaseResult> {
        self.cases.iter().find(|c| c.case == which)
    }
}

/// Sweep the default grid with `cfg` and check the analytic cases on it.
pub fn verify_analytic_cases(cfg: &CavityConfig, tol: f64) -> Result<CaseReport> {
    let trace = sweep(cfg, &Grid::default())?;
    verify_analytic_cases_on(&trace, tol)
}

/// Check the analytic cases against a normalized cavity trace.
///
/// Intensities are evaluated exactly at the case phases and divided by the
/// trace's normalization, so the representative phases need not lie on
/// the grid.
pub fn verify_analytic_cases_on(trace: &Trace, tol: f64) -> Result<CaseReport> {
    let cfg = trace
        .cavity_config()
        .ok_or_else(|| Error::Analysis("analytic cases need a cavity trace".into()))?;
    if !trace.normalized {
        return Err(Error::Analysis(
            "analytic cases need a normalized trace".into(),
        ));
    }
    let cases = AnalyticCase::ALL
        .iter()
        .map(|&case| {
            let checks: Vec<CaseCheck> = case
                .phases()
                .into_iter()
                .flat_map(|psi| {
                    let (ia, ib) = superpose(Phase::new(psi), cfg).intensities();
                    let expected_a = if case == AnalyticCase::Iii { 1.0 } else { 0.0 };
                    [(Channel::A, ia, expected_a), (Channel::B, ib, 0.0)].map(
                        |(channel, raw, expected)| {
                            let value = raw / trace.scale;
                            let residual = (value - expected).abs();
                            CaseCheck {
                                psi,
                                channel,
                                value,
                                expected,
                                residual,
                                pass: residual < tol,
                            }
                        },
                    )
                })
                .collect();
            CaseResult {
                case,
                pass: checks.iter().all(|c| c.pass),
                max_residual: checks.iter().map(|c| c.residual).fold(0.0, f64::max),
                checks,
            }
        })
        .collect();
    Ok(CaseReport { tol, cases })
}

/// Largest change of either normalized intensity over `psi_grid` when the
/// ring phase takes each value of `zetas`, relative to `ζ = 0`.
pub fn zeta_invariance(cfg: &CavityConfig, zetas: &[f64], psi_grid: &Grid) -> Result<f64> {
    zeta_invariance_with(cfg, zetas, psi_grid, SweepOptions::default())
}

pub fn zeta_invariance_with(
    cfg: &CavityConfig,
    zetas: &[f64],
    psi_grid: &Grid,
    opts: SweepOptions,
) -> Result<f64> {
    let base_cfg = CavityConfig {
        zeta: Phase::ZERO,
        ..*cfg
    };
    let base = sweep_with(&base_cfg, psi_grid, opts)?;
    let mut worst = 0.0f64;
    for &zeta in zetas {
        let shifted_cfg = CavityConfig {
            zeta: Phase::new(zeta),
            ..*cfg
        };
        let shifted = sweep_with(&shifted_cfg, psi_grid, opts)?;
        let dev = base
            .i_a
            .iter()
            .zip(&shifted.i_a)
            .chain(base.i_b.iter().zip(&shifted.i_b))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        worst = worst.max(dev);
    }
    Ok(worst)
}

/// Everything measured on one CBW/FP pair of traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeMetrics {
    pub peaks: Vec<Peak>,
    /// Width of each entry of `peaks`; `None` where the half maximum is not
    /// bracketed.
    pub fwhm: Vec<Option<f64>>,
    pub resolution: ResolutionSummary,
    pub case_report: CaseReport,
}

impl FringeMetrics {
    pub fn measure(cbw: &Trace, fp: &Trace, tol: f64) -> Result<Self> {
        let peaks = find_peaks(cbw, Channel::A, PRINCIPAL_MIN_HEIGHT);
        let widths = peaks.iter().map(|p| fwhm(cbw, p).ok()).collect();
        Ok(FringeMetrics {
            peaks,
            fwhm: widths,
            resolution: measure_resolution(cbw, fp)?,
            case_report: verify_analytic_cases_on(cbw, tol)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::{TraceSource, ZetaModel};
    use crate::reference::{fp_trace, FabryPerotConfig};

    fn synthetic(y: Vec<f64>) -> Trace {
        let n = y.len();
        Trace {
            psi_grid: (0..n).map(|i| i as f64 * 0.1).collect(),
            i_b: vec![0.0; n],
            i_a: y,
            normalized: true,
            scale: 1.0,
            source: TraceSource::FabryPerot(FabryPerotConfig::default()),
        }
    }

    #[test]
    fn constant_trace_has_no_peaks() {
        let t = synthetic(vec![0.7; 50]);
        assert!(find_peaks(&t, Channel::A, 0.0).is_empty());
    }

    #[test]
    fn parabola_recovers_vertex_of_quadratic() {
        // y = 1 - (x - 0.43)^2 sampled at 0.1 spacing
        let y: Vec<f64> = (0..10)
            .map(|i| 1.0 - (i as f64 * 0.1 - 0.43).powi(2))
            .collect();
        let t = synthetic(y);
        let peaks = find_peaks(&t, Channel::A, 0.0);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].position.radians() - 0.43).abs() < 1e-12);
        assert_eq!(peaks[0].index, 4);
    }

    #[test]
    fn fp_trace_has_single_peak_at_center() {
        let grid = Grid::new(0.0, 2.0 * PI, 4001).unwrap();
        let t = fp_trace(&FabryPerotConfig::default(), &grid).unwrap();
        let peaks = find_peaks(&t, Channel::A, 0.5);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].position.radians() - PI).abs() < 1e-12);
    }

    #[test]
    fn fwhm_of_triangle_is_exact() {
        // Linear flanks: interpolation is exact.
        let y = vec![0.0, 0.25, 0.5, 0.75, 1.0, 0.75, 0.5, 0.25, 0.0];
        let t = synthetic(y);
        let p = find_peaks(&t, Channel::A, 0.1)[0];
        // the parabola through (0.75, 1, 0.75) peaks at 1 exactly
        assert!((fwhm(&t, &p).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn fwhm_requires_bracketing() {
        let y = vec![0.9, 0.95, 1.0, 0.95, 0.9];
        let t = synthetic(y);
        let p = find_peaks(&t, Channel::A, 0.1)[0];
        assert!(matches!(fwhm(&t, &p), Err(Error::Analysis(_))));
    }

    #[test]
    fn identical_traces_have_unit_gain() {
        let grid = Grid::new(0.0, 2.0 * PI, 4001).unwrap();
        let t = fp_trace(
            &FabryPerotConfig {
                r: 0.9,
                ..Default::default()
            },
            &grid,
        )
        .unwrap();
        assert_eq!(resolution_gain(&t, &t).unwrap(), 1.0);
    }

    #[test]
    fn case_report_at_single_order_fails_case_ii() {
        let cfg = CavityConfig {
            max_order: 1,
            ..Default::default()
        };
        let report = verify_analytic_cases(&cfg, 1e-5).unwrap();
        assert!(!report.case(AnalyticCase::Ii).unwrap().pass);
        assert!(report.case(AnalyticCase::Iii).unwrap().pass);
    }

    #[test]
    fn cases_need_a_normalized_cavity_trace() {
        let t = synthetic(vec![0.0, 1.0, 0.0]);
        assert!(verify_analytic_cases_on(&t, 1e-5).is_err());
    }

    #[test]
    fn common_mode_zeta_is_invisible_for_one_order() {
        let cfg = CavityConfig {
            max_order: 1,
            ..Default::default()
        };
        let grid = Grid::new(-2.0 * PI, 2.0 * PI, 2001).unwrap();
        let dev = zeta_invariance(&cfg, &[0.0, PI / 4.0, PI, 3.0 * PI], &grid).unwrap();
        assert!(dev < 1e-12, "{dev}");
    }

    #[test]
    fn differential_zeta_moves_the_fringes() {
        let cfg = CavityConfig {
            max_order: 2000,
            r: 0.99,
            zeta_model: ZetaModel::Differential,
            ..Default::default()
        };
        let grid = Grid::new(-2.0 * PI, 2.0 * PI, 4001).unwrap();
        let dev = zeta_invariance(&cfg, &[FRAC_PI_2], &grid).unwrap();
        assert!(dev > 0.1, "{dev}");
    }
}

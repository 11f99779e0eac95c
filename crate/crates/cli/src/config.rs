//! Run configuration: built-in defaults, then an optional `key = value` file,
//! then command-line flags.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use cbwring_core::{
    CavityConfig, ChannelConvention, FabryPerotConfig, Grid, LossExponent, Phase, SagnacParams,
    ZetaModel,
};
use clap::Args;
use serde::Serialize;

use crate::CliError;

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let [min, max, steps] = parts.as_slice() else {
        return Err(format!("grid must be MIN:MAX:STEPS, got `{s}`"));
    };
    let min: f64 = min
        .parse()
        .map_err(|_| format!("bad grid minimum `{min}`"))?;
    let max: f64 = max
        .parse()
        .map_err(|_| format!("bad grid maximum `{max}`"))?;
    let steps: usize = steps
        .parse()
        .map_err(|_| format!("bad grid point count `{steps}`"))?;
    Grid::new(min, max, steps).map_err(|e| e.to_string())
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| format!("bad list entry `{t}`")))
        .collect()
}

pub fn parse_orders(s: &str) -> Result<Vec<u32>, String> {
    parse_list(s)
}

pub fn parse_phases(s: &str) -> Result<Vec<f64>, String> {
    parse_list(s)
}

fn parse_order_count(s: &str) -> Result<u32, String> {
    match s.trim().parse::<u32>() {
        Ok(0) => Err("orders must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(_) => Err(format!("`{s}` is not a positive integer")),
    }
}

fn parse_loss_exponent(s: &str) -> Result<LossExponent, String> {
    match s.trim() {
        "1" => Ok(LossExponent::One),
        "2" => Ok(LossExponent::Two),
        other => Err(format!("loss exponent must be 1 or 2, got `{other}`")),
    }
}

fn parse_convention(s: &str) -> Result<ChannelConvention, String> {
    match s.trim() {
        "cos-a" => Ok(ChannelConvention::CosA),
        "sin-a" => Ok(ChannelConvention::SinA),
        other => Err(format!("unknown convention `{other}` (cos-a | sin-a)")),
    }
}

fn parse_zeta_model(s: &str) -> Result<ZetaModel, String> {
    match s.trim() {
        "common-mode" => Ok(ZetaModel::CommonMode),
        "differential" => Ok(ZetaModel::Differential),
        other => Err(format!(
            "unknown zeta model `{other}` (common-mode | differential)"
        )),
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(format!("`{other}` is not a boolean")),
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("`{}` is not a number", s.trim()))
}

/// Every tunable of a run. All fields are optional so that layers can be
/// merged; the config-file keys are the long flag names.
#[derive(Debug, Clone, Default, Args)]
pub struct Settings {
    /// Per-round-trip amplitude retention r, in (0, 1].
    #[arg(long, value_parser = parse_f64)]
    pub r: Option<f64>,
    /// Highest round-trip order M (at least 1).
    #[arg(long, value_parser = parse_order_count)]
    pub orders: Option<u32>,
    /// Weight orders by r^m (1) or r^(2m) (2).
    #[arg(long, value_parser = parse_loss_exponent)]
    pub loss_exponent: Option<LossExponent>,
    /// Keep the e^{imψ} factor in every order.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_parser = parse_bool)]
    pub global_phase: Option<bool>,
    /// Channel assignment: cos-a or sin-a.
    #[arg(long, value_parser = parse_convention)]
    pub convention: Option<ChannelConvention>,
    /// Ring phase coupling: common-mode or differential.
    #[arg(long, value_parser = parse_zeta_model)]
    pub zeta_model: Option<ZetaModel>,
    /// Cavity-length phase φ (rad).
    #[arg(long, value_parser = parse_f64, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    /// Ring phase ζ (rad).
    #[arg(long, value_parser = parse_f64, allow_hyphen_values = true)]
    pub zeta: Option<f64>,
    /// Input amplitude E0.
    #[arg(long, value_parser = parse_f64)]
    pub amplitude: Option<f64>,
    /// Phase grid MIN:MAX:STEPS (rad).
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: Option<Grid>,
    /// Fabry-Perot mirror amplitude reflectivity (defaults to --r).
    #[arg(long, value_parser = parse_f64)]
    pub fp_r: Option<f64>,
    /// Fabry-Perot peak position (rad).
    #[arg(long, value_parser = parse_f64, allow_hyphen_values = true)]
    pub fp_center: Option<f64>,
    /// Ring area for the Sagnac phase (m²).
    #[arg(long, value_parser = parse_f64)]
    pub area: Option<f64>,
    /// Wavelength for the Sagnac phase (m).
    #[arg(long, value_parser = parse_f64)]
    pub wavelength: Option<f64>,
    /// Rotation rate Ω (rad/s).
    #[arg(long, value_parser = parse_f64, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    /// Tolerance for the analytic interference cases.
    #[arg(long, value_parser = parse_f64)]
    pub tol: Option<f64>,
    /// Comma-separated ζ values for the invariance check.
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    pub zeta_grid: Option<Vec<f64>>,
    /// Comma-separated orders whose amplitudes are added to the trace.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub modes: Option<Vec<u32>>,
    /// Add the Fabry-Perot transmission as an I_FP column.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_parser = parse_bool)]
    pub with_fp: Option<bool>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($field:ident),* $(,)?) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )*
    };
}

impl Settings {
    /// Fields set in `other` replace those in `self`.
    pub fn overlay(&mut self, other: &Settings) {
        overlay!(
            self,
            other,
            r,
            orders,
            loss_exponent,
            global_phase,
            convention,
            zeta_model,
            phi,
            zeta,
            amplitude,
            grid,
            fp_r,
            fp_center,
            area,
            wavelength,
            omega,
            tol,
            zeta_grid,
            modes,
            with_fp,
        );
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "r" => self.r = Some(parse_f64(value)?),
            "orders" => self.orders = Some(parse_order_count(value)?),
            "loss-exponent" => self.loss_exponent = Some(parse_loss_exponent(value)?),
            "global-phase" => self.global_phase = Some(parse_bool(value)?),
            "convention" => self.convention = Some(parse_convention(value)?),
            "zeta-model" => self.zeta_model = Some(parse_zeta_model(value)?),
            "phi" => self.phi = Some(parse_f64(value)?),
            "zeta" => self.zeta = Some(parse_f64(value)?),
            "amplitude" => self.amplitude = Some(parse_f64(value)?),
            "grid" => self.grid = Some(parse_grid(value)?),
            "fp-r" => self.fp_r = Some(parse_f64(value)?),
            "fp-center" => self.fp_center = Some(parse_f64(value)?),
            "area" => self.area = Some(parse_f64(value)?),
            "wavelength" => self.wavelength = Some(parse_f64(value)?),
            "omega" => self.omega = Some(parse_f64(value)?),
            "tol" => self.tol = Some(parse_f64(value)?),
            "zeta-grid" => self.zeta_grid = Some(parse_phases(value)?),
            "modes" => self.modes = Some(parse_orders(value)?),
            "with-fp" => self.with_fp = Some(parse_bool(value)?),
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Parse the flat `key = value` config format. Blank lines and `#`
    /// comments are ignored.
    pub fn from_config_text(text: &str) -> Result<(Settings, ConfigPaths), String> {
        let mut settings = Settings::default();
        let mut paths = ConfigPaths::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", n + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let res = match key {
                "output" => {
                    paths.output = Some(PathBuf::from(value));
                    Ok(())
                }
                "csv" => {
                    paths.csv = Some(PathBuf::from(value));
                    Ok(())
                }
                _ => settings.set(key, value),
            };
            res.map_err(|e| format!("line {}: {e}", n + 1))?;
        }
        Ok((settings, paths))
    }

    pub fn from_config_file(path: &Path) -> Result<(Settings, ConfigPaths), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::from_config_text(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Fill unset fields from the defaults and validate the result.
    pub fn resolve(&self, paths: ConfigPaths) -> Result<RunConfig, CliError> {
        let defaults = CavityConfig::default();
        let cavity = CavityConfig {
            r: self.r.unwrap_or(defaults.r),
            max_order: self.orders.unwrap_or(defaults.max_order),
            loss_exponent: self.loss_exponent.unwrap_or(defaults.loss_exponent),
            include_global_phase: self.global_phase.unwrap_or(defaults.include_global_phase),
            channel_convention: self.convention.unwrap_or(defaults.channel_convention),
            zeta_model: self.zeta_model.unwrap_or(defaults.zeta_model),
            phi: self.phi.map(Phase::new).unwrap_or(defaults.phi),
            zeta: self.zeta.map(Phase::new).unwrap_or(defaults.zeta),
            input_amplitude: self.amplitude.unwrap_or(defaults.input_amplitude),
        };
        let fabry_perot = FabryPerotConfig {
            r: self.fp_r.unwrap_or(cavity.r),
            center: Phase::new(self.fp_center.unwrap_or(PI)),
        };
        let sagnac_defaults = SagnacParams::default();
        let sagnac = SagnacParams {
            area: self.area.unwrap_or(sagnac_defaults.area),
            wavelength: self.wavelength.unwrap_or(sagnac_defaults.wavelength),
            omega: self.omega.unwrap_or(sagnac_defaults.omega),
        };
        let cfg = RunConfig {
            cavity,
            fabry_perot,
            sagnac,
            grid: self.grid.unwrap_or_default(),
            tol: self.tol.unwrap_or(DEFAULT_TOL),
            zeta_grid: self
                .zeta_grid
                .clone()
                .unwrap_or_else(|| DEFAULT_ZETA_GRID.to_vec()),
            modes: self.modes.clone().unwrap_or_default(),
            with_fp: self.with_fp.unwrap_or(false),
            output: paths.output,
            csv: paths.csv,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigPaths {
    pub output: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl ConfigPaths {
    pub fn overlay(&mut self, other: &ConfigPaths) {
        if other.output.is_some() {
            self.output = other.output.clone();
        }
        if other.csv.is_some() {
            self.csv = other.csv.clone();
        }
    }
}

pub const DEFAULT_TOL: f64 = 1e-5;
pub const DEFAULT_ZETA_GRID: [f64; 5] = [0.0, PI / 4.0, PI / 2.0, PI, 3.0 * PI];

/// The fully resolved configuration of one run, echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub cavity: CavityConfig,
    pub fabry_perot: FabryPerotConfig,
    pub sagnac: SagnacParams,
    pub grid: Grid,
    pub tol: f64,
    pub zeta_grid: Vec<f64>,
    pub modes: Vec<u32>,
    pub with_fp: bool,
    pub output: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |e: cbwring_core::Error| CliError::Usage(e.to_string());
        self.cavity.validate().map_err(usage)?;
        self.fabry_perot.validate().map_err(usage)?;
        self.sagnac.validate().map_err(usage)?;
        self.grid.validate().map_err(usage)?;
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(CliError::Usage(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if let Some(bad) = self.zeta_grid.iter().find(|z| !z.is_finite()) {
            return Err(CliError::Usage(format!("non-finite zeta value {bad}")));
        }
        if let Some(bad) = self
            .modes
            .iter()
            .find(|&&m| m == 0 || m > self.cavity.max_order)
        {
            return Err(CliError::Usage(format!(
                "mode order {bad} not in 1..={}",
                self.cavity.max_order
            )));
        }
        Ok(())
    }
}

//! Lossy superposition of CBW round-trip orders inside the ring cavity.
//!
//! Order `m` contributes
//!
//! ```text
//! E_A^(m) = w_m (-1)^m g(m) cos(mψ) E0,   E_B^(m) = w_m (-1)^m g(m) sin(mψ) E0
//! ```
//!
//! with `w_m = r^(k·m)` (`k` the loss exponent) and `g(m) = e^{imψ}` only when
//! the global phase is requested. The detector fields are the sums over
//! `m = 1..=M`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{ensure_finite, Error, Result};
use crate::optics::{mzi_block, phase_matrix, Arm, FieldPair, MziSign, Phase, TransferMatrix};
use crate::reference::FabryPerotConfig;

/// Orders between exact re-evaluations of the rotor in the summation loop.
/// Between anchors each of the `LANES` rotors advances by complex
/// multiplication, so the accumulated rounding stays below
/// ~ANCHOR_INTERVAL / LANES ulps.
const ANCHOR_INTERVAL: u32 = 256;

/// Per-order loss weight `r^m` or `r^(2m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum LossExponent {
    #[default]
    One,
    Two,
}

impl LossExponent {
    pub fn get(self) -> u32 {
        match self {
            LossExponent::One => 1,
            LossExponent::Two => 2,
        }
    }
}

impl From<LossExponent> for u8 {
    fn from(e: LossExponent) -> u8 {
        e.get() as u8
    }
}

impl TryFrom<u8> for LossExponent {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(LossExponent::One),
            2 => Ok(LossExponent::Two),
            other => Err(Error::domain(
                "loss exponent",
                format!("{other} (expected 1 or 2)"),
            )),
        }
    }
}

/// Which trig function feeds which detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelConvention {
    /// `E_A ∝ cos(mψ)`, `E_B ∝ sin(mψ)`.
    #[default]
    CosA,
    /// `E_A ∝ sin(mψ)`, `E_B ∝ cos(mψ)`.
    SinA,
}

/// How the ring phase `ζ` couples into the round trip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZetaModel {
    /// `ζ` is common to both arms and to every order: a global phase
    /// `e^{2iζ}` on the superposed output.
    #[default]
    CommonMode,
    /// Diagnostic: `ζ` sits on the lower arm between the two MZIs of every
    /// round trip. Evaluated by iterating the round-trip matrix.
    Differential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub struct CavityConfig {
    /// Amplitude retained per round trip.
    pub r: f64,
    pub max_order: u32,
    pub loss_exponent: LossExponent,
    pub include_global_phase: bool,
    pub channel_convention: ChannelConvention,
    pub zeta_model: ZetaModel,
    pub phi: Phase,
    pub zeta: Phase,
    pub input_amplitude: f64,
}

impl Default for CavityConfig {
    fn default() -> Self {
        CavityConfig {
            r: 0.999,
            max_order: 5000,
            loss_exponent: LossExponent::One,
            include_global_phase: false,
            channel_convention: ChannelConvention::CosA,
            zeta_model: ZetaModel::CommonMode,
            phi: Phase::ZERO,
            zeta: Phase::ZERO,
            input_amplitude: 1.0,
        }
    }
}

impl CavityConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("r", self.r)?;
        if !(self.r > 0.0 && self.r <= 1.0) {
            return Err(Error::domain("r", format!("{} not in (0, 1]", self.r)));
        }
        if self.max_order == 0 {
            return Err(Error::domain("max_order", "must be at least 1"));
        }
        ensure_finite("phi", self.phi.radians())?;
        ensure_finite("zeta", self.zeta.radians())?;
        ensure_finite("input_amplitude", self.input_amplitude)?;
        Ok(())
    }

    /// `w_m = r^(k·m)`.
    pub fn weight(&self, m: u32) -> f64 {
        let exp = i32::try_from(self.loss_exponent.get() * m).unwrap_or(i32::MAX);
        self.r.powi(exp)
    }

    fn weight_step(&self) -> f64 {
        self.r.powi(self.loss_exponent.get() as i32)
    }
}

/// A uniform phase grid of `steps` points from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            min: -2.0 * PI,
            max: 2.0 * PI,
            steps: 40001,
        }
    }
}

impl Grid {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        let g = Grid { min, max, steps };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("grid minimum", self.min)?;
        ensure_finite("grid maximum", self.max)?;
        if self.steps < 2 {
            return Err(Error::domain("grid", "needs at least 2 points"));
        }
        if self.min >= self.max {
            return Err(Error::domain(
                "grid",
                format!("minimum {} is not below maximum {}", self.min, self.max),
            ));
        }
        Ok(())
    }

    /// Point `i`, computed as a weighted mean of the end points so that a
    /// grid with `min == -max` is exactly mirror symmetric.
    pub fn point(&self, i: usize) -> f64 {
        let n = (self.steps - 1) as f64;
        let hi = i as f64;
        let lo = (self.steps - 1 - i) as f64;
        (self.min * lo + self.max * hi) / n
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.point(i)).collect()
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.steps - 1) as f64
    }
}

/// Where a trace came from; echoed so that a trace is self-describing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceSource {
    Cavity(CavityConfig),
    FabryPerot(FabryPerotConfig),
}

/// Detector intensities over a phase grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub psi_grid: Vec<f64>,
    pub i_a: Vec<f64>,
    pub i_b: Vec<f64>,
    pub normalized: bool,
    /// Divisor applied to the raw intensities (1 when not normalized).
    pub scale: f64,
    pub source: TraceSource,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.psi_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi_grid.is_empty()
    }

    pub fn cavity_config(&self) -> Option<&CavityConfig> {
        match &self.source {
            TraceSource::Cavity(cfg) => Some(cfg),
            TraceSource::FabryPerot(_) => None,
        }
    }

    /// Divide both channels by their joint maximum.
    pub fn normalize(&mut self) {
        let max = self
            .i_a
            .iter()
            .chain(self.i_b.iter())
            .copied()
            .fold(0.0, f64::max);
        if max > 0.0 {
            for v in self.i_a.iter_mut().chain(self.i_b.iter_mut()) {
                *v /= max;
            }
            self.scale *= max;
            self.normalized = true;
        }
    }
}

/// Signed real amplitude of one order, global phase excluded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeTrace {
    pub order: u32,
    pub psi_grid: Vec<f64>,
    pub amp_a: Vec<f64>,
    pub amp_b: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    pub normalize: bool,
    /// Evaluate grid points on the rayon pool. Results are identical to
    /// serial evaluation bit for bit.
    pub parallel: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            normalize: true,
            parallel: true,
        }
    }
}

/// State shared by every order at one `ψ`.
struct OrderTerm<'a> {
    cfg: &'a CavityConfig,
}

impl OrderTerm<'_> {
    /// Unscaled amplitudes of order `m`, given `rotor = e^{imψ}`, the weight
    /// `w_m` and `phi_rotor = e^{imφ}`.
    #[inline(always)]
    fn amplitudes(
        &self,
        m: u32,
        rotor: Complex64,
        weight: f64,
        phi_rotor: Option<Complex64>,
    ) -> (Complex64, Complex64) {
        let signed = if m % 2 == 1 { -weight } else { weight };
        let mut common = Complex64::new(signed, 0.0);
        if self.cfg.include_global_phase {
            common *= rotor;
        }
        if let Some(p) = phi_rotor {
            common *= p;
        }
        let (cos, sin) = (rotor.re, rotor.im);
        match self.cfg.channel_convention {
            ChannelConvention::CosA => (common * cos, common * sin),
            ChannelConvention::SinA => (common * sin, common * cos),
        }
    }
}

/// `E0 · e^{2iζ}` in the common-mode model (skips the multiply at ζ = 0).
fn output_factor(cfg: &CavityConfig) -> Complex64 {
    let e0 = Complex64::new(cfg.input_amplitude, 0.0);
    match cfg.zeta_model {
        ZetaModel::CommonMode if cfg.zeta.radians() != 0.0 => {
            e0 * Complex64::cis(2.0 * cfg.zeta.radians())
        }
        _ => e0,
    }
}

fn phi_rotor(cfg: &CavityConfig, m: u32) -> Option<Complex64> {
    let phi = cfg.phi.radians();
    (phi != 0.0).then(|| Complex64::cis(f64::from(m) * phi))
}

/// Complex amplitudes `(E_A^(m), E_B^(m))` of a single order.
pub fn mode_amplitudes(m: u32, psi: Phase, cfg: &CavityConfig) -> Result<(Complex64, Complex64)> {
    cfg.validate()?;
    let psi = ensure_finite("psi", psi.radians())?;
    if m == 0 || m > cfg.max_order {
        return Err(Error::domain(
            "order",
            format!("{m} not in 1..={}", cfg.max_order),
        ));
    }
    if cfg.zeta_model == ZetaModel::Differential {
        return Ok(differential_order(m, psi, cfg));
    }
    let term = OrderTerm { cfg };
    let rotor = Complex64::cis(f64::from(m) * psi);
    let (a, b) = term.amplitudes(m, rotor, cfg.weight(m), phi_rotor(cfg, m));
    let g = output_factor(cfg);
    Ok((a * g, b * g))
}

/// Superposed detector fields at one `ψ`: the sum of all orders `1..=M`.
///
/// The configuration is assumed valid; call [`CavityConfig::validate`]
/// first when it comes from user input.
pub fn superpose(psi: Phase, cfg: &CavityConfig) -> FieldPair {
    match cfg.zeta_model {
        ZetaModel::CommonMode => superpose_closed_form(psi.radians(), cfg),
        ZetaModel::Differential => superpose_iterated(psi.radians(), cfg),
    }
}

fn superpose_closed_form(psi: f64, cfg: &CavityConfig) -> FieldPair {
    let global = cfg.include_global_phase;
    let phi = cfg.phi.radians();
    let (a, b) = if !global && phi == 0.0 {
        let (a, b) = order_sum::<false>(psi, 0.0, cfg);
        (Complex64::new(a.re, 0.0), Complex64::new(b.re, 0.0))
    } else {
        let theta = if global { psi + phi } else { phi };
        order_sum::<true>(psi, theta, cfg)
    };
    let (a, b) = match cfg.channel_convention {
        ChannelConvention::CosA => (a, b),
        ChannelConvention::SinA => (b, a),
    };
    let g = output_factor(cfg);
    FieldPair::new(a * g, b * g)
}

const LANES: usize = 4;

#[inline(always)]
fn accumulate<const TWIST: bool>(
    acc_a: &mut Complex64,
    acc_b: &mut Complex64,
    rotor: Complex64,
    twist: Complex64,
    weight: f64,
) {
    if TWIST {
        let c = twist * weight;
        *acc_a += c * rotor.re;
        *acc_b += c * rotor.im;
    } else {
        acc_a.re += weight * rotor.re;
        acc_b.re += weight * rotor.im;
    }
}

/// `(Σ c_m cos mψ, Σ c_m sin mψ)` with `c_m = (-1)^m w_m e^{imθ}`; with
/// `TWIST = false` the `e^{imθ}` factor is dropped and the sums are real.
///
/// Orders are split over `LANES` independent recurrences stepping by
/// `LANES·ψ` with separate accumulators, re-anchored exactly at the start of
/// every block of `ANCHOR_INTERVAL` orders.
fn order_sum<const TWIST: bool>(
    psi: f64,
    theta: f64,
    cfg: &CavityConfig,
) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    let step = Complex64::cis(LANES as f64 * psi);
    let twist_step = Complex64::cis(LANES as f64 * theta);
    let w_step = cfg.weight_step().powi(LANES as i32);
    let mut acc_a = [zero; LANES];
    let mut acc_b = [zero; LANES];
    let mut rotor = [zero; LANES];
    let mut twist = [Complex64::new(1.0, 0.0); LANES];
    let mut weight = [0.0f64; LANES];
    // offsets of lane j from the block anchor: e^{ijψ}, e^{ijθ}, (-1)^j r^{kj}
    let lane_rotor: [Complex64; LANES] = std::array::from_fn(|j| Complex64::cis(j as f64 * psi));
    let lane_twist: [Complex64; LANES] = std::array::from_fn(|j| Complex64::cis(j as f64 * theta));
    let lane_weight: [f64; LANES] = std::array::from_fn(|j| (-cfg.weight_step()).powi(j as i32));

    let last = cfg.max_order;
    let mut first = 1u32;
    while first <= last {
        let end = first.saturating_add(ANCHOR_INTERVAL - 1).min(last);
        let len = (end - first + 1) as usize;
        let anchor = Complex64::cis(f64::from(first) * psi);
        let twist_anchor = if TWIST {
            Complex64::cis(f64::from(first) * theta)
        } else {
            Complex64::new(1.0, 0.0)
        };
        let w = cfg.weight(first);
        let w = if first % 2 == 1 { -w } else { w };
        for j in 0..LANES {
            rotor[j] = anchor * lane_rotor[j];
            twist[j] = twist_anchor * lane_twist[j];
            weight[j] = w * lane_weight[j];
        }
        for _ in 0..len / LANES {
            for j in 0..LANES {
                accumulate::<TWIST>(&mut acc_a[j], &mut acc_b[j], rotor[j], twist[j], weight[j]);
                rotor[j] *= step;
                if TWIST {
                    twist[j] *= twist_step;
                }
                weight[j] *= w_step;
            }
        }
        for j in 0..len % LANES {
            accumulate::<TWIST>(&mut acc_a[j], &mut acc_b[j], rotor[j], twist[j], weight[j]);
        }
        match end.checked_add(1) {
            Some(next) => first = next,
            None => break,
        }
    }
    let sum = |acc: [Complex64; LANES]| acc.iter().fold(zero, |s, v| s + v);
    (sum(acc_a), sum(acc_b))
}

/// Round trip with `ζ` on the lower arm between the MZIs; the global
/// `e^{iψ}` is divided out unless requested.
fn differential_round_trip(psi: f64, cfg: &CavityConfig) -> TransferMatrix {
    let p = Phase::new(psi);
    let trip = mzi_block(MziSign::Plus, p, Phase::ZERO).expect("finite psi")
        * phase_matrix(Arm::Both, cfg.phi).expect("finite phi")
        * phase_matrix(Arm::Lower, cfg.zeta).expect("finite zeta")
        * mzi_block(MziSign::Minus, p, Phase::ZERO).expect("finite psi");
    if cfg.include_global_phase {
        trip
    } else {
        trip.scaled(Complex64::cis(-psi))
    }
}

fn assign_channels(cfg: &CavityConfig, v: FieldPair) -> (Complex64, Complex64) {
    match cfg.channel_convention {
        ChannelConvention::CosA => (v.a, v.b),
        ChannelConvention::SinA => (v.b, v.a),
    }
}

fn differential_order(m: u32, psi: f64, cfg: &CavityConfig) -> (Complex64, Complex64) {
    let trip = differential_round_trip(psi, cfg);
    let v = trip
        .pow(m)
        .apply(FieldPair::input(cfg.input_amplitude))
        .scale(Complex64::new(cfg.weight(m), 0.0));
    assign_channels(cfg, v)
}

fn superpose_iterated(psi: f64, cfg: &CavityConfig) -> FieldPair {
    let trip = differential_round_trip(psi, cfg);
    let w_step = cfg.weight_step();
    let mut v = FieldPair::input(cfg.input_amplitude);
    let mut weight = 1.0;
    let mut sum = FieldPair::input(0.0);
    for m in 1..=cfg.max_order {
        v = trip.apply(v);
        weight = if (m - 1) % ANCHOR_INTERVAL == 0 {
            cfg.weight(m)
        } else {
            weight * w_step
        };
        sum = sum + v.scale(Complex64::new(weight, 0.0));
    }
    let (a, b) = assign_channels(cfg, sum);
    FieldPair::new(a, b)
}

/// Normalized intensity sweep with default options.
pub fn sweep(cfg: &CavityConfig, grid: &Grid) -> Result<Trace> {
    sweep_with(cfg, grid, SweepOptions::default())
}

pub fn sweep_with(cfg: &CavityConfig, grid: &Grid, opts: SweepOptions) -> Result<Trace> {
    cfg.validate()?;
    grid.validate()?;
    let psi_grid = grid.points();
    let eval = |psi: &f64| superpose(Phase::new(*psi), cfg).intensities();
    let intensities: Vec<(f64, f64)> = if opts.parallel {
        psi_grid.par_iter().map(eval).collect()
    } else {
        psi_grid.iter().map(eval).collect()
    };
    let (i_a, i_b) = intensities.into_iter().unzip();
    let mut trace = Trace {
        psi_grid,
        i_a,
        i_b,
        normalized: false,
        scale: 1.0,
        source: TraceSource::Cavity(*cfg),
    };
    if opts.normalize {
        trace.normalize();
    }
    Ok(trace)
}

/// Per-order signed amplitude curves `w_m (-1)^m cos(mψ) E0` (and `sin`).
pub fn mode_traces(orders: &[u32], cfg: &CavityConfig, grid: &Grid) -> Result<Vec<ModeTrace>> {
    cfg.validate()?;
    grid.validate()?;
    let psi_grid = grid.points();
    orders
        .iter()
        .map(|&m| {
            if m == 0 || m > cfg.max_order {
                return Err(Error::domain(
                    "order",
                    format!("{m} not in 1..={}", cfg.max_order),
                ));
            }
            let amp = cfg.weight(m) * cfg.input_amplitude;
            let signed = if m % 2 == 1 { -amp } else { amp };
            let (amp_cos, amp_sin): (Vec<f64>, Vec<f64>) = psi_grid
                .iter()
                .map(|&psi| {
                    let (s, c) = (f64::from(m) * psi).sin_cos();
                    (signed * c, signed * s)
                })
                .unzip();
            let (amp_a, amp_b) = match cfg.channel_convention {
                ChannelConvention::CosA => (amp_cos, amp_sin),
                ChannelConvention::SinA => (amp_sin, amp_cos),
            };
            Ok(ModeTrace {
                order: m,
                psi_grid: psi_grid.clone(),
                amp_a,
                amp_b,
            })
        })
        .collect()
}

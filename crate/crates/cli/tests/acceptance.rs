//! Acceptance suite: one pass/fail line per criterion, nonzero exit if any
//! criterion fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::Path;
use std::time::Instant;

use cbwring_core::dsl::{self, Bindings};
use cbwring_core::{
    bs_matrix, cbw_order_matrix, find_peaks, fp_trace, measure_resolution, mode_amplitudes,
    mzi_block, phase_matrix, ring_product, sweep, verify_analytic_cases_on, zeta_invariance, Arm,
    CavityConfig, Channel, ComplexAmp, FabryPerotConfig, FieldPair, Grid, MziSign, Phase,
    TransferMatrix, RING_NETLIST,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_phase(rng: &mut ChaCha8Rng) -> Phase {
    Phase::new(rng.gen_range(-4.0 * PI..4.0 * PI))
}

fn random_field(rng: &mut ChaCha8Rng) -> FieldPair {
    let mut c = || ComplexAmp::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    FieldPair::new(c(), c())
}

fn unitarity_and_conservation() -> Outcome {
    const TOL: f64 = 1e-12;
    let mut rng = rng(1);
    let mut worst_unitary = 0.0f64;
    let mut worst_energy = 0.0f64;
    for _ in 0..1000 {
        let psi = random_phase(&mut rng);
        let phi = random_phase(&mut rng);
        let zeta = random_phase(&mut rng);
        let m = rng.gen_range(1..=5000);
        let flag = rng.gen_bool(0.5);
        let elements = [
            bs_matrix(rng.gen_range(0.0..=1.0)).unwrap(),
            phase_matrix(Arm::Upper, psi).unwrap(),
            phase_matrix(Arm::Lower, psi).unwrap(),
            phase_matrix(Arm::Both, phi).unwrap(),
            mzi_block(MziSign::Plus, psi, zeta).unwrap(),
            mzi_block(MziSign::Minus, psi, zeta).unwrap(),
            ring_product(psi, phi, zeta).unwrap(),
            cbw_order_matrix(psi, m, flag).unwrap(),
        ];
        for e in &elements {
            worst_unitary = worst_unitary.max(e.unitarity_defect());
        }
        let input = random_field(&mut rng);
        let output = elements[6].apply(input);
        worst_energy = worst_energy.max((output.power() - input.power()).abs());
    }
    outcome(
        worst_unitary < TOL && worst_energy < TOL,
        format!(
            "max |M†M - I| = {worst_unitary:.2e}, max power change = {worst_energy:.2e} (tol {TOL:e})"
        ),
    )
}

fn closed_form_vs_iteration() -> Outcome {
    const TOL: f64 = 1e-9;
    let mut rng = rng(2);
    let mut worst = 0.0f64;
    for m in [2u32, 10, 100, 5000] {
        for _ in 0..100 {
            let psi = random_phase(&mut rng);
            for flag in [false, true] {
                let one = cbw_order_matrix(psi, 1, flag).unwrap();
                let mut product = TransferMatrix::identity();
                for _ in 0..m {
                    product = one * product;
                }
                let closed = cbw_order_matrix(psi, m, flag).unwrap();
                worst = worst.max(closed.max_abs_diff(&product));
            }
        }
    }
    outcome(
        worst < TOL,
        format!(
            "max elementwise deviation {worst:.2e} over m ∈ {{2, 10, 100, 5000}} (tol {TOL:e})"
        ),
    )
}

fn phase_quantization() -> Outcome {
    const TOL: f64 = 1e-12;
    let cfg = CavityConfig {
        max_order: 100,
        ..Default::default()
    };
    let mut worst = 0.0f64;
    let mut count = 0;
    for m in 1..=100u32 {
        let mi = m as i32;
        for k in -mi..=mi {
            let psi = Phase::new(f64::from(k) * PI / f64::from(m));
            let (_, b) = mode_amplitudes(m, psi, &cfg).unwrap();
            worst = worst.max(b.norm());
            count += 1;
        }
    }
    outcome(
        worst < TOL,
        format!("max |E_B^(m)| = {worst:.2e} over {count} points ψ = kπ/m (tol {TOL:e})"),
    )
}

/// `I_A` from the closed-form geometric series
/// `Σ_{m=1}^{M} (-r)^m cos(mψ) = Re[z (1 - z^M) / (1 - z)]`, `z = -r e^{iψ}`.
fn series_intensity_a(r: f64, orders: u32, psi: f64) -> f64 {
    let z = ComplexAmp::from_polar(r, psi + PI);
    let s = z * (ComplexAmp::new(1.0, 0.0) - z.powu(orders)) / (ComplexAmp::new(1.0, 0.0) - z);
    s.re * s.re
}

/// Full width at half maximum of the series peak at `ψ = π`, by bisection.
fn series_fwhm(r: f64, orders: u32) -> f64 {
    let half = 0.5 * series_intensity_a(r, orders, PI);
    let (mut lo, mut hi) = (0.0, 0.1);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if series_intensity_a(r, orders, PI + mid) > half {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo + hi
}

fn fringe_reproduction(cfg: &CavityConfig, grid: &Grid) -> Outcome {
    let trace = sweep(cfg, grid).unwrap();
    let peaks = find_peaks(&trace, Channel::A, 0.5);
    let positions: Vec<f64> = peaks.iter().map(|p| p.position.radians()).collect();
    let peak_err = [-PI, PI]
        .iter()
        .map(|&target| {
            positions
                .iter()
                .map(|p| (p - target).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0f64, f64::max);

    let nearest = |psi: f64| ((psi - grid.min) / grid.spacing()).round() as usize;
    let dark = [0.0, FRAC_PI_2, -FRAC_PI_2]
        .iter()
        .map(|&psi| trace.i_a[nearest(psi)])
        .fold(0.0f64, f64::max);

    // independent oracle for the whole normalized curve
    let raw: Vec<f64> = trace
        .psi_grid
        .iter()
        .map(|&p| series_intensity_a(cfg.r, cfg.max_order, p))
        .collect();
    let oracle_max = raw.iter().copied().fold(0.0, f64::max);
    let oracle_dev = raw
        .iter()
        .zip(&trace.i_a)
        .map(|(o, t)| (o / oracle_max - t).abs())
        .fold(0.0f64, f64::max);

    let cases = verify_analytic_cases_on(&trace, 1e-5).unwrap();
    let pass =
        peaks.len() == 2 && peak_err < 1e-4 && dark < 1e-5 && oracle_dev < 1e-9 && cases.all_pass();
    outcome(
        pass,
        format!(
            "{} peaks, max |peak - (±π)| = {peak_err:.2e} (tol 1e-4); max I_A at 0, ±π/2 = {dark:.3e} \
             (tol 1e-5); series oracle deviation {oracle_dev:.1e}; cases (i)-(iii) {} at tol 1e-5",
            peaks.len(),
            if cases.all_pass() { "pass" } else { "FAIL" }
        ),
    )
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target
}

fn resolution_claim(cfg: &CavityConfig, grid: &Grid) -> Outcome {
    let cbw = sweep(cfg, grid).unwrap();
    let fp_cfg = FabryPerotConfig {
        r: cfg.r,
        ..Default::default()
    };
    let fp = fp_trace(&fp_cfg, grid).unwrap();
    let res = measure_resolution(&cbw, &fp).unwrap();

    // half-maximum widths solved on the closed forms, off the grid
    let fp_oracle = 4.0 * (1.0 / fp_cfg.finesse_coefficient().sqrt()).asin();
    let cbw_oracle = series_fwhm(cfg.r, cfg.max_order);
    let cbw_limit = 2.0 * (2f64.sqrt() - 1.0).sqrt() * (1.0 - cfg.r);

    let pass_cbw = within(res.fwhm_cbw, 1.29e-3, 0.03);
    let pass_fp = within(res.fwhm_fp, 4.00e-3, 0.03);
    let pass_gain = (2.9..=3.3).contains(&res.gain);
    let pass_oracles =
        within(res.fwhm_cbw, cbw_oracle, 0.03) && within(res.fwhm_fp, fp_oracle, 0.03);
    outcome(
        pass_cbw && pass_fp && pass_gain && pass_oracles,
        format!(
            "FWHM_CBW = {:.4e} (1.29e-3 ± 3%, oracle {cbw_oracle:.4e}, M → ∞ {cbw_limit:.4e}), \
             FWHM_FP = {:.4e} (4.00e-3 ± 3%, oracle {fp_oracle:.4e}), gain = {:.3} (∈ [2.9, 3.3])",
            res.fwhm_cbw, res.fwhm_fp, res.gain
        ),
    )
}

fn zeta_immunity(cfg: &CavityConfig, grid: &Grid) -> Outcome {
    let zetas = [0.0, PI / 4.0, PI / 2.0, PI, 3.0 * PI];
    let dev = zeta_invariance(cfg, &zetas, grid).unwrap();
    outcome(
        dev < 1e-12,
        format!("max |I(ζ) - I(0)| = {dev:.2e} over ζ ∈ {{0, π/4, π/2, π, 3π}} (tol 1e-12)"),
    )
}

fn cross_construction() -> Outcome {
    let ast = dsl::parse(RING_NETLIST).expect("bundled netlist parses");
    let mut rng = rng(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let psi = random_phase(&mut rng);
        let b = Bindings::new().with("psi", psi.radians()).with("phi", 0.0);
        let compiled = dsl::compile(&ast, "ring", &b).unwrap();
        let library = ring_product(psi, Phase::ZERO, Phase::ZERO).unwrap();
        worst = worst.max(compiled.max_abs_diff(&library));
    }

    let psi = Phase::new(0.7);
    let b = Bindings::new()
        .with("psi", psi.radians())
        .with("phi", PI / 3.0);
    let detuned = dsl::compile(&ast, "ring", &b).unwrap();
    let input = FieldPair::input(1.0);
    let rotation = cbw_order_matrix(psi, 1, true).unwrap().apply(input);
    let off = detuned.apply(input).max_abs_diff(&rotation);
    outcome(
        worst < 1e-12 && off > 1e-3,
        format!(
            "netlist vs library product: max deviation {worst:.2e} (tol 1e-12); \
             φ = π/3 output deviates from the rotation form by {off:.3}"
        ),
    )
}

fn run_compare(dir: &Path, threads: usize) -> (String, Vec<u8>) {
    let report = dir.join("report.json");
    let csv = dir.join("trace.csv");
    let args = [
        "cbwring".to_string(),
        "compare".into(),
        "--threads".into(),
        threads.to_string(),
        "-o".into(),
        report.display().to_string(),
        "--csv".into(),
        csv.display().to_string(),
    ];
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cbwring_cli::run_from(args, &mut out, &mut err);
    assert_eq!(code, 0, "compare failed: {}", String::from_utf8_lossy(&err));
    let json = fs::read_to_string(&report).unwrap();
    let json = json
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"wall_time_s\""))
        .collect::<Vec<_>>()
        .join("\n");
    let csv_bytes = fs::read(&csv).unwrap();
    fs::remove_file(report).unwrap();
    fs::remove_file(csv).unwrap();
    (json, csv_bytes)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (json_serial, csv_serial) = run_compare(dir.path(), 1);
    let (json_parallel, csv_parallel) = run_compare(dir.path(), 4);
    let json_same = json_serial == json_parallel;
    let csv_same = csv_serial == csv_parallel;
    outcome(
        json_same && csv_same && json_serial.contains("\"alternate_conventions\""),
        format!(
            "serial vs 4 threads: JSON {} ({} bytes), CSV {} ({} bytes)",
            if json_same { "identical" } else { "DIFFERS" },
            json_serial.len(),
            if csv_same { "identical" } else { "DIFFERS" },
            csv_serial.len()
        ),
    )
}

fn main() {
    let start = Instant::now();
    let cfg = CavityConfig::default();
    let grid = Grid::default();
    let criteria: [(&str, &dyn Fn() -> Outcome); 8] = [
        ("unitarity and conservation", &unitarity_and_conservation),
        ("closed form vs iteration", &closed_form_vs_iteration),
        ("phase quantization", &phase_quantization),
        ("fringe reproduction", &|| fringe_reproduction(&cfg, &grid)),
        ("resolution claim", &|| resolution_claim(&cfg, &grid)),
        ("zeta immunity", &|| zeta_immunity(&cfg, &grid)),
        ("netlist cross-construction", &cross_construction),
        ("determinism", &determinism),
    ];
    let mut failures = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = check();
        if !o.pass {
            failures += 1;
        }
        println!(
            "[{}] {}. {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            n + 1,
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        criteria.len() - failures,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}

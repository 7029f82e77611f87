//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if
//! any criterion fails. Oracles are computed here, independently of the
//! code paths they check.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use isodelta::delta::{
    bare_potential, cumulative_i, ground_state_delta, iso_potential, iso_tail, sample_ground_state,
    sample_ground_superpotential, sample_iso_tail, sample_iso_wavefunction, singularity_scan,
    DeltaCoupling, HalfLine,
};
use isodelta::spectral::{ground_state_energy, scattering, SingularPotential};
use isodelta::susy::{
    apply_annihilation, apply_creation, cumulative_integral, general_riccati_superpotential,
    isospectral_family_potential, riccati_residual,
};
use isodelta::{FactorizationFrame, FamilyOptions, Grid, GridFunction, IsoParameter, SupportLine};

const FIG1_SET: [f64; 4] = [1e-5, 0.10001, 1.10001, 5.10001];
const FIG3_SET: [f64; 4] = [-1.4, -0.9, -0.6, -0.3];

// Tolerances, one block per criterion.
const C1_ENERGY_TOL: f64 = 1e-3;
const C1_RUNTIME: Duration = Duration::from_secs(10);
const C2_TAIL_TOL: f64 = 1e-6;
const C2_WINDOW: f64 = 10.0;
const C2_SPACING: f64 = 5e-4;
const C3_TRANSMISSION_TOL: f64 = 1e-3;
const C3_FLUX_TOL: f64 = 1e-6;
const C4_NORM_TOL: f64 = 1e-6;
const C5_TAIL_BOUND: f64 = 2e-4;
const C5_STATE_BOUND: f64 = 1e-3;
const C6_ROOT_TOL: f64 = 1e-8;
const C7_FACTOR: f64 = 10.0;
const C8_ENERGY_TOL: f64 = 1e-3;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn coupling(g: f64) -> DeltaCoupling {
    DeltaCoupling::new(g).unwrap()
}

fn param(c: f64) -> IsoParameter {
    IsoParameter::new(c).unwrap()
}

fn default_grid() -> Grid {
    Grid::symmetric(25.0, 5001).unwrap()
}

fn sup_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.zip_with(b, |x, y| (x - y).abs()).unwrap().max_abs()
}

fn require(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Bound-energy invariance across the first figure set.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let grid = default_grid();
    let e0 = -0.25;
    let mut worst = 0.0_f64;
    for c in FIG1_SET {
        let p =
            iso_potential(coupling(-1.0), &param(c), &grid, false).map_err(|e| e.to_string())?;
        let r = ground_state_energy(&p).map_err(|e| e.to_string())?;
        worst = worst.max((r.energy - e0).abs());
    }
    let elapsed = start.elapsed();
    require(
        worst < C1_ENERGY_TOL && elapsed < C1_RUNTIME,
        format!("max |E + 0.25| = {worst:.3e} (< {C1_ENERGY_TOL:e}), runtime {elapsed:.2?} (< {C1_RUNTIME:?})"),
    )
}

/// Generic construction from the sampled ground state vs the closed form.
fn criterion_2() -> Outcome {
    let grid = Grid::with_spacing(-40.0, 40.0, C2_SPACING).unwrap();
    let h = grid.spacing();
    let zero = GridFunction::constant(grid, 0.0);
    let mut worst = 0.0_f64;
    for g in [-0.5, -1.0, -2.0] {
        let psi0 = sample_ground_state(coupling(g), &grid).unwrap();
        for c in [0.1, 1.0, 5.0] {
            let m = isospectral_family_potential(
                &zero,
                &psi0,
                &param(c),
                SupportLine::FullLine,
                FamilyOptions::default(),
            )
            .map_err(|e| e.to_string())?;
            for (i, x) in grid.nodes().enumerate() {
                if x.abs() > C2_WINDOW || x.abs() <= 2.0 * h {
                    continue;
                }
                let closed = iso_tail(coupling(g), &param(c), x).unwrap();
                worst = worst.max((m.potential.value(i) - closed).abs());
            }
        }
    }
    require(
        worst < C2_TAIL_TOL,
        format!("max |numeric - closed| = {worst:.3e} (< {C2_TAIL_TOL:e})"),
    )
}

/// Transmission of family members against the analytic delta value.
fn criterion_3() -> Outcome {
    let g = -1.0;
    let grid = default_grid();
    let mut worst_t = 0.0_f64;
    let mut worst_flux = 0.0_f64;
    let bare = bare_potential(coupling(g), &grid).unwrap();
    for k in [0.5, 1.0, 2.0] {
        let oracle = 4.0 * k * k / (4.0 * k * k + g * g);
        let b = scattering(&bare, k).map_err(|e| e.to_string())?;
        worst_flux = worst_flux.max((b.flux() - 1.0).abs());
        for c in [0.1, 1.0] {
            let p = iso_potential(coupling(g), &param(c), &grid, false).unwrap();
            let s = scattering(&p, k).map_err(|e| e.to_string())?;
            worst_t = worst_t.max((s.transmission_probability() - oracle).abs());
            worst_flux = worst_flux.max((s.flux() - 1.0).abs());
        }
    }
    require(
        worst_t < C3_TRANSMISSION_TOL && worst_flux <= C3_FLUX_TOL,
        format!("max ||T|² - 4k²/(4k²+g²)| = {worst_t:.3e} (< {C3_TRANSMISSION_TOL:e}), max |flux - 1| = {worst_flux:.3e} (≤ {C3_FLUX_TOL:e})"),
    )
}

/// Norms of the normalized and unnormalized closed-form states.
fn criterion_4() -> Outcome {
    let grid = default_grid();
    let mut worst = 0.0_f64;
    for c in [0.5, 1.0, 5.0] {
        let n = sample_iso_wavefunction(coupling(-1.0), &param(c), &grid, true, false).unwrap();
        let u = sample_iso_wavefunction(coupling(-1.0), &param(c), &grid, false, false).unwrap();
        let norm = n.map(|p| p * p).integral().unwrap();
        let unorm = u.map(|p| p * p).integral().unwrap();
        worst = worst
            .max((norm - 1.0).abs())
            .max((unorm - 1.0 / (c * (c + 1.0))).abs());
    }
    require(
        worst <= C4_NORM_TOL,
        format!("max norm deviation = {worst:.3e} (≤ {C4_NORM_TOL:e})"),
    )
}

/// Collapse onto the bare delta as C grows.
fn criterion_5() -> Outcome {
    let grid = default_grid();
    let g = coupling(-1.0);
    let psi0 = sample_ground_state(g, &grid).unwrap();
    let mut tails = Vec::new();
    let mut states = Vec::new();
    for c in [1.0, 10.0, 100.0, 1e4] {
        tails.push(
            sample_iso_tail(g, &param(c), &grid, false)
                .unwrap()
                .max_abs(),
        );
        let psi = sample_iso_wavefunction(g, &param(c), &grid, true, false).unwrap();
        states.push(
            psi.zip_with(&psi0, |a, b| (a.abs() - b).abs())
                .unwrap()
                .max_abs(),
        );
    }
    let monotone = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let (t, s) = (tails[3], states[3]);
    require(
        t <= C5_TAIL_BOUND && s <= C5_STATE_BOUND && monotone(&tails) && monotone(&states),
        format!(
            "C=1e4: sup|tail| = {t:.3e} (≤ {C5_TAIL_BOUND:e}), sup||ψ| - ψ0| = {s:.3e} (≤ {C5_STATE_BOUND:e}), monotone: {}",
            monotone(&tails) && monotone(&states)
        ),
    )
}

/// Sign change (or zero) of the denominator on the positive half-line,
/// scanned on a fine grid.
fn brute_positive_pole(g: f64, c: f64) -> bool {
    let d = |x: f64| 1.0 - 2.0 * (c + 1.0) * (-g * x).exp();
    let mut prev = d(0.0);
    if prev == 0.0 {
        return true;
    }
    for k in 1..=25_000 {
        let v = d(k as f64 * 1e-3);
        if v == 0.0 || v.signum() != prev.signum() {
            return true;
        }
        prev = v;
    }
    false
}

/// Singular band on the positive half-line and located roots.
fn criterion_6() -> Outcome {
    let g = -1.0;
    let grid = default_grid();
    let mut band_ok = true;
    for step in 0..=300 {
        let c = (step as f64 - 200.0) / 100.0;
        let brute = brute_positive_pole(g, c);
        let scanned = singularity_scan(coupling(g), c, &grid)
            .locations
            .iter()
            .any(|p| p.half_line == HalfLine::Positive);
        band_ok &= brute == (c > -1.0 && c <= -0.5) && scanned == brute;
    }
    let mut root_err = 0.0_f64;
    for c in [-0.9_f64, -0.6] {
        // 1 - 2(C+1) e^{x} = 0 on x > 0 for g = -1
        let oracle = (1.0 / (2.0 * (c + 1.0))).ln();
        let r = singularity_scan(coupling(g), c, &grid);
        match r
            .locations
            .iter()
            .find(|p| p.half_line == HalfLine::Positive)
        {
            Some(p) => root_err = root_err.max((p.x - oracle).abs()),
            None => root_err = f64::INFINITY,
        }
    }
    let regular = singularity_scan(coupling(g), -1.4, &grid).is_empty();
    require(
        band_ok && root_err < C6_ROOT_TOL && regular,
        format!("band (-1, -1/2] matches brute scan: {band_ok}, root error {root_err:.3e} (< {C6_ROOT_TOL:e}), C=-1.4 regular: {regular}"),
    )
}

/// General Riccati superpotential vs the log-derivative of ψ0/(C + I).
fn criterion_7() -> Outcome {
    let grid = default_grid();
    let h = grid.spacing();
    let g = coupling(-1.0);
    let i0 = grid.origin_index().unwrap();
    let w0 = sample_ground_superpotential(g, &grid).unwrap();
    let mut worst = 0.0_f64;
    for c in [0.5, 1.0, 5.0] {
        let w1 = general_riccati_superpotential(&w0, &param(c), SupportLine::FullLine).unwrap();
        let log_state = GridFunction::from_fn(grid, |x| {
            (ground_state_delta(g, x) / (c + cumulative_i(g, x))).ln()
        })
        .with_kink(i0)
        .unwrap();
        let target = log_state.derivative().scale(-1.0);
        worst = worst.max(sup_diff(&w1, &target));
    }
    let bound = C7_FACTOR * h * h;
    require(
        worst <= bound,
        format!("max |W1 + (ln ψ_iso)'| = {worst:.3e} (≤ 10h² = {bound:.1e})"),
    )
}

/// Generic engine on the harmonic frame W = x.
fn criterion_8() -> Outcome {
    let grid = Grid::symmetric(8.0, 1601).unwrap();
    let h = grid.spacing();
    let w = GridFunction::from_fn(grid, |x| x);
    let gaussian = |grid: Grid| {
        GridFunction::from_fn(grid, |x| {
            std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp()
        })
    };
    let psi = gaussian(grid);
    let mut failures = Vec::new();

    let psi0 = cumulative_integral(&w, SupportLine::FullLine)
        .unwrap()
        .map(|v| (-v).exp());
    let annihilated = apply_annihilation(&w, &psi0).unwrap().max_abs();
    if annihilated > 10.0 * h * h * psi0.second_derivative().max_abs() {
        failures.push(format!("annihilation {annihilated:.2e}"));
    }

    let a_psi = apply_annihilation(&w, &psi).unwrap();
    let adag_a = apply_creation(&w, &a_psi).unwrap();
    let a_adag = apply_annihilation(&w, &apply_creation(&w, &psi).unwrap()).unwrap();
    let commutator = adag_a.zip_with(&a_adag, |p, q| p - q).unwrap();
    let expected = GridFunction::from_fn(grid, |x| {
        -2.0 * std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp()
    });
    let comm_err = sup_diff(&commutator, &expected);
    if comm_err > 20.0 * h * h {
        failures.push(format!("commutator {comm_err:.2e}"));
    }

    let frame = FactorizationFrame::new(w.clone(), 0.0);
    let v2 = frame.partner_potential();
    let partner_err = sup_diff(&v2, &GridFunction::from_fn(grid, |x| x * x + 1.0));
    if partner_err > 1e-9 {
        failures.push(format!("partner {partner_err:.2e}"));
    }
    for c in [0.5, 1.0, 5.0] {
        let w1 = general_riccati_superpotential(&w, &param(c), SupportLine::FullLine).unwrap();
        let r = riccati_residual(&w1, &v2).unwrap().max_abs();
        if r > 50.0 * h * h {
            failures.push(format!("riccati C={c} {r:.2e}"));
        }
    }

    let big = Grid::symmetric(10.0, 2001).unwrap();
    let v1 = GridFunction::from_fn(big, |x| x * x);
    let m = isospectral_family_potential(
        &v1,
        &gaussian(big),
        &param(0.5),
        SupportLine::FullLine,
        FamilyOptions::default(),
    )
    .unwrap();
    let original =
        ground_state_energy(&SingularPotential::new(0.0, v1)).map_err(|e| e.to_string())?;
    let member = ground_state_energy(&SingularPotential::new(0.0, m.potential))
        .map_err(|e| e.to_string())?;
    let de = (member.energy - original.energy).abs();
    if de >= C8_ENERGY_TOL {
        failures.push(format!("member energy {de:.2e}"));
    }
    require(
        failures.is_empty(),
        if failures.is_empty() {
            format!("annihilation, commutator, partner, Riccati within O(h²); |E(C=0.5) - E| = {de:.3e} (< {C8_ENERGY_TOL:e})")
        } else {
            failures.join("; ")
        },
    )
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_isodelta"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn header(c_set: &[f64], psi0: bool) -> String {
    let mut cols = vec!["x".to_string()];
    if psi0 {
        cols.push("psi0".to_string());
    }
    cols.extend(c_set.iter().map(|c| format!("C={c}")));
    cols.join(",")
}

/// Figure datasets, byte-identical reruns, and `verify` on defaults.
fn criterion_9() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = run_cli(&["figures", "--out", dir.to_str().unwrap()]);
        if !out.status.success() {
            return Err(format!(
                "figures failed: {}",
                String::from_utf8_lossy(&out.stderr)
            ));
        }
    }
    let first = read_dir_sorted(&a);
    let identical = first == read_dir_sorted(&b);

    let expected = [
        ("fig1_family.csv", header(&FIG1_SET, false)),
        ("fig2_wavefunction.csv", header(&FIG1_SET, false)),
        ("fig3_family.csv", header(&FIG3_SET, false)),
        ("fig4_wavefunction.csv", header(&FIG3_SET, true)),
    ];
    let mut headers_ok = true;
    for (name, head) in &expected {
        let text = fs::read_to_string(a.join(name)).unwrap_or_default();
        headers_ok &= text.lines().next() == Some(head.as_str());
    }
    let datasets = first.iter().filter(|(n, _)| n.ends_with(".csv")).count();

    let verify = run_cli(&["verify"]);
    let code = verify.status.code();
    let report: serde_json::Value = serde_json::from_slice(&verify.stdout).unwrap_or_default();
    let all_pass = report["all_pass"] == serde_json::Value::Bool(true);
    require(
        identical && headers_ok && datasets == 4 && code == Some(0) && all_pass,
        format!("4 datasets: {}, parameter sets in headers: {headers_ok}, byte-identical reruns: {identical}, verify exit {code:?}", datasets == 4),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("bound-energy invariance", criterion_1),
        ("closed-form equivalence", criterion_2),
        ("scattering invariance", criterion_3),
        ("normalization law", criterion_4),
        ("large-C collapse", criterion_5),
        ("singular band", criterion_6),
        ("superpotential duality", criterion_7),
        ("generic-engine properties", criterion_8),
        ("CLI determinism and schema", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

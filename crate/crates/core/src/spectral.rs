//! Numerical spectra of `H = -d²/dx² + g δ(x) + tail(x)` on a finite box.
//!
//! Bound states are computed twice with independent delta realizations:
//!
//! * a 3-point finite-difference matrix with the delta folded into the
//!   diagonal as `g/h` at the origin node, solved by Sturm bisection;
//! * RK4 shooting from both walls towards the origin, matched through the
//!   jump condition `ψ'(0⁺) - ψ'(0⁻) = g ψ(0)`.
//!
//! Scattering uses the same RK4 propagation with the analytic jump.

use log::warn;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::tridiag;

/// Absolute width of the final bisection bracket for matrix eigenvalues.
pub const EIGEN_TOLERANCE: f64 = 1e-10;

/// Tail magnitude above which the hard walls are reported as intrusive.
pub const EDGE_TAIL_LIMIT: f64 = 1e-8;

/// Upper bound on `k·h` for scattering runs.
pub const MAX_KH: f64 = 0.1;

/// `g δ(x) + tail(x)`; the tail is smooth on each half-line and may jump
/// at the origin (stored as a break of the grid function).
#[derive(Debug, Clone, PartialEq)]
pub struct SingularPotential {
    pub delta_strength: f64,
    pub tail: GridFunction,
}

impl SingularPotential {
    pub fn new(delta_strength: f64, tail: GridFunction) -> Self {
        Self {
            delta_strength,
            tail,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.tail.grid()
    }

    /// Same potential at spacing h/2.
    pub fn refined(&self) -> Self {
        Self::new(self.delta_strength, self.tail.refined())
    }

    fn origin(&self) -> Result<Option<usize>> {
        match self.grid().origin_index() {
            Some(i) => Ok(Some(i)),
            None if self.delta_strength == 0.0 => Ok(None),
            None => Err(Error::NoOriginNode),
        }
    }

    /// Lowest asymptotic value of the potential, read at the walls.
    pub fn continuum_threshold(&self) -> f64 {
        let n = self.tail.len();
        self.tail.value(0).min(self.tail.value(n - 1))
    }

    fn edge_tail(&self) -> f64 {
        let n = self.tail.len();
        self.tail.value(0).abs().max(self.tail.value(n - 1).abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    /// Lowest eigenvalue of the finite-difference matrix at spacing h.
    pub energy: f64,
    pub node_count: usize,
    /// Relative off-origin residual of the finite-difference eigenvector.
    pub ode_residual: f64,
    /// Relative jump-condition residual of the same eigenvector.
    pub jump_residual: f64,
    pub grid: Grid,
    /// Finite-difference eigenvalue at spacing h/2.
    pub refined_energy: f64,
    /// `(4 E_{h/2} - E_h) / 3`.
    pub richardson_energy: f64,
    /// Eigenvalue from shooting with the explicit jump condition.
    pub shooting_energy: f64,
    /// Largest |tail| at the walls.
    pub edge_tail: f64,
}

/// Diagonal and off-diagonal of the interior Hamiltonian matrix.
fn fd_matrix(potential: &SingularPotential) -> Result<(Vec<f64>, Vec<f64>)> {
    potential.tail.check_finite()?;
    let grid = potential.grid();
    let n = grid.len();
    let h = grid.spacing();
    let kinetic = 1.0 / (h * h);
    let origin = potential.origin()?;
    let diag = (1..n - 1)
        .map(|i| {
            let spike = if Some(i) == origin {
                potential.delta_strength / h
            } else {
                0.0
            };
            2.0 * kinetic + potential.tail.value(i) + spike
        })
        .collect();
    let off = vec![-kinetic; n - 3];
    Ok((diag, off))
}

fn fd_lowest(potential: &SingularPotential) -> Result<f64> {
    let (diag, off) = fd_matrix(potential)?;
    Ok(tridiag::kth_eigenvalue(&diag, &off, 0, EIGEN_TOLERANCE))
}

fn count_nodes(v: &[f64]) -> usize {
    let peak = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let mut last = 0.0;
    let mut nodes = 0;
    for &x in v {
        if x.abs() <= 1e-8 * peak {
            continue;
        }
        if last != 0.0 && x.signum() != last {
            nodes += 1;
        }
        last = x.signum();
    }
    nodes
}

/// Lowest bound state of the potential on its own grid (hard walls at the
/// grid ends). Fails with [`Error::NoBoundState`] when the lowest matrix
/// eigenvalue is not below the continuum threshold.
pub fn ground_state_energy(potential: &SingularPotential) -> Result<SpectralReport> {
    let grid = *potential.grid();
    let edge_tail = potential.edge_tail();
    if edge_tail > EDGE_TAIL_LIMIT {
        warn!("tail reaches {edge_tail:.3e} at the walls; box truncation may bias energies");
    }

    let (diag, off) = fd_matrix(potential)?;
    let energy = tridiag::kth_eigenvalue(&diag, &off, 0, EIGEN_TOLERANCE);
    if energy >= potential.continuum_threshold() - EIGEN_TOLERANCE {
        return Err(Error::NoBoundState { lowest: energy });
    }

    let refined_energy = fd_lowest(&potential.refined())?;
    let richardson_energy = (4.0 * refined_energy - energy) / 3.0;

    let v = tridiag::eigenvector(&diag, &off, energy);
    let node_count = count_nodes(&v);
    let mut values = Vec::with_capacity(grid.len());
    values.push(0.0);
    values.extend_from_slice(&v);
    values.push(0.0);
    let psi = GridFunction::new(grid, values)?;
    let (ode_residual, jump_residual) = eigenfunction_residual(potential, &psi, energy)?;

    let shooting_energy = shooting_energy(potential, energy)?;

    Ok(SpectralReport {
        energy,
        node_count,
        ode_residual,
        jump_residual,
        grid,
        refined_energy,
        richardson_energy,
        shooting_energy,
        edge_tail,
    })
}

/// Tail samples at spacing h/2 with one-sided access at the origin.
struct HalfStepTail {
    values: Vec<f64>,
    origin: Option<(usize, f64, f64)>,
}

impl HalfStepTail {
    fn new(potential: &SingularPotential) -> Result<Self> {
        let fine = potential.tail.refined();
        fine.check_finite()?;
        let origin = potential
            .origin()?
            .map(|i| (2 * i, fine.left_limit(2 * i), fine.right_limit(2 * i)));
        Ok(Self {
            values: fine.into_values(),
            origin,
        })
    }

    /// Value at fine index `k`, seen from the right (`from_right`) or left.
    fn at(&self, k: usize, from_right: bool) -> f64 {
        match self.origin {
            Some((i, l, r)) if i == k => {
                if from_right {
                    r
                } else {
                    l
                }
            }
            _ => self.values[k],
        }
    }
}

/// One RK4 step of `ψ'' = (V - E) ψ` from coarse node `i` to `i ± 1`.
fn rk4_step<T>(y: (T, T), h: f64, q: [f64; 3]) -> (T, T)
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let f = |(p, d): (T, T), qv: f64| (d, p * qv);
    let k1 = f(y, q[0]);
    let k2 = f((y.0 + k1.0 * (h / 2.0), y.1 + k1.1 * (h / 2.0)), q[1]);
    let k3 = f((y.0 + k2.0 * (h / 2.0), y.1 + k2.1 * (h / 2.0)), q[1]);
    let k4 = f((y.0 + k3.0 * h, y.1 + k3.1 * h), q[2]);
    (
        y.0 + (k1.0 + k2.0 * 2.0 + k3.0 * 2.0 + k4.0) * (h / 6.0),
        y.1 + (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * (h / 6.0),
    )
}

/// Propagates `(ψ, ψ')` over coarse nodes `from → to` (either direction),
/// reading the tail from the side of the interval being traversed.
fn propagate<T>(
    tail: &HalfStepTail,
    energy: f64,
    h: f64,
    from: usize,
    to: usize,
    mut y: (T, T),
    renorm: impl Fn((T, T)) -> (T, T),
) -> (T, T)
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let leftward = to < from;
    let mut i = from;
    while i != to {
        let j = if leftward { i - 1 } else { i + 1 };
        let (a, b) = (2 * i, 2 * j);
        let mid = (a + b) / 2;
        // the interval lies right of node j when moving left
        let q = [
            tail.at(a, !leftward) - energy,
            tail.at(mid, true) - energy,
            tail.at(b, leftward) - energy,
        ];
        let step = if leftward { -h } else { h };
        y = renorm(rk4_step(y, step, q));
        i = j;
    }
    y
}

fn renorm_real((p, d): (f64, f64)) -> (f64, f64) {
    let s = p.abs().max(d.abs());
    if s > 1e100 {
        (p / s, d / s)
    } else {
        (p, d)
    }
}

/// Jump-condition mismatch at the origin for trial energy `e`, in the
/// pole-free form `ψR'ψL - ψL'ψR - g ψLψR` with both solutions scaled to
/// unit `(ψ, ψ')` length (positive scaling keeps the sign).
fn matching_function(potential: &SingularPotential, tail: &HalfStepTail, i0: usize, e: f64) -> f64 {
    let grid = potential.grid();
    let h = grid.spacing();
    let n = grid.len();
    let unit = |(p, d): (f64, f64)| {
        let s = p.hypot(d);
        (p / s, d / s)
    };
    let (pr, dr) = unit(propagate(tail, e, h, n - 1, i0, (0.0, -1.0), renorm_real));
    let (pl, dl) = unit(propagate(tail, e, h, 0, i0, (0.0, 1.0), renorm_real));
    dr * pl - dl * pr - potential.delta_strength * pl * pr
}

/// Bound-state energy from the jump-condition shooting variant, searched
/// around `guess`.
pub fn shooting_energy(potential: &SingularPotential, guess: f64) -> Result<f64> {
    let i0 = potential.grid().origin_index().ok_or(Error::NoOriginNode)?;
    let tail = HalfStepTail::new(potential)?;
    let f = |e: f64| matching_function(potential, &tail, i0, e);

    let mut width = 1e-3 * guess.abs().max(1e-2);
    let (mut lo, mut hi) = (guess - width, guess + width);
    let (mut flo, mut fhi) = (f(lo), f(hi));
    let mut tries = 0;
    while !(flo.is_finite() && fhi.is_finite() && flo.signum() != fhi.signum()) {
        tries += 1;
        if tries > 40 {
            return Err(Error::InvalidArgument(format!(
                "shooting could not bracket a bound state near {guess}"
            )));
        }
        width *= 2.0;
        lo = guess - width;
        hi = (guess + width).min(-f64::EPSILON);
        flo = f(lo);
        fhi = f(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-13 * mid.abs().max(1.0) {
            break;
        }
        let fm = f(mid);
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Complex reflection and transmission amplitudes for incidence from the
/// left at wavenumber `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringResult {
    pub k: f64,
    pub reflection: Complex64,
    pub transmission: Complex64,
}

impl ScatteringResult {
    pub fn reflection_probability(&self) -> f64 {
        self.reflection.norm_sqr()
    }

    pub fn transmission_probability(&self) -> f64 {
        self.transmission.norm_sqr()
    }

    /// `|R|² + |T|²`.
    pub fn flux(&self) -> f64 {
        self.reflection_probability() + self.transmission_probability()
    }
}

/// Integrates from the right wall (pure outgoing wave `e^{ikx}`) to the
/// left wall and matches `A e^{ikx} + B e^{-ikx}` on the last two nodes.
pub fn scattering(potential: &SingularPotential, k: f64) -> Result<ScatteringResult> {
    if k.is_nan() || k <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "k must be positive, got {k}"
        )));
    }
    let grid = *potential.grid();
    let h = grid.spacing();
    if k * h >= MAX_KH {
        return Err(Error::NonConvergent { k, kh: k * h });
    }
    let tail = HalfStepTail::new(potential)?;
    let n = grid.len();
    let e = k * k;
    let ik = Complex64::new(0.0, k);
    let plane = |x: f64| (ik * x).exp();

    let xr = grid.x(n - 1);
    let start = (plane(xr), ik * plane(xr));
    let keep = |y| y;
    let y = match potential.origin()? {
        Some(i0) => {
            let (p, d) = propagate(&tail, e, h, n - 1, i0, start, keep);
            let jumped = (p, d - p * potential.delta_strength);
            propagate(&tail, e, h, i0, 1, jumped, keep)
        }
        None => propagate(&tail, e, h, n - 1, 1, start, keep),
    };
    let psi1 = y.0;
    let (p0, _) = propagate(&tail, e, h, 1, 0, y, keep);
    let (x0, x1) = (grid.x(0), grid.x(1));
    let det = plane(x0) * plane(-x1) - plane(x1) * plane(-x0);
    let a = (p0 * plane(-x1) - psi1 * plane(-x0)) / det;
    let b = (psi1 * plane(x0) - p0 * plane(x1)) / det;

    Ok(ScatteringResult {
        k,
        reflection: b / a,
        transmission: 1.0 / a,
    })
}

/// `(ode_residual, jump_residual)` of a candidate eigenfunction.
///
/// The ODE residual is `max |-ψ'' + tail ψ - E ψ| / max |ψ|` over interior
/// nodes away from the origin and from flagged (non-finite) samples. The
/// jump residual is `|ψ'(0⁺) - ψ'(0⁻) - g ψ(0)| / |ψ(0)|` with one-sided
/// 2nd-order derivatives; it is zero when the grid has no origin node and
/// there is no delta.
pub fn eigenfunction_residual(
    potential: &SingularPotential,
    psi: &GridFunction,
    energy: f64,
) -> Result<(f64, f64)> {
    if psi.grid() != potential.grid() {
        return Err(Error::GridMismatch);
    }
    let peak = psi.max_abs();
    if peak == 0.0 {
        return Err(Error::VanishingWavefunction);
    }
    let origin = potential.origin()?;
    let psi = match origin {
        Some(i0) if psi.break_at(i0).is_none() => psi.clone().with_kink(i0)?,
        _ => psi.clone(),
    };
    let d2 = psi.second_derivative();
    let tail = &potential.tail;
    let n = psi.len();
    let clean = |i: usize| psi.value(i).is_finite() && tail.value(i).is_finite();

    let mut ode = 0.0_f64;
    for i in 1..n - 1 {
        if Some(i) == origin || !(clean(i - 1) && clean(i) && clean(i + 1)) {
            continue;
        }
        let r = -d2.value(i) + (tail.value(i) - energy) * psi.value(i);
        ode = ode.max(r.abs());
    }

    let jump = match origin {
        Some(i0) => {
            let d1 = psi.derivative();
            let b = d1.break_at(i0).expect("kink recorded at origin");
            let p0 = psi.value(i0);
            if p0 == 0.0 {
                return Err(Error::VanishingWavefunction);
            }
            ((b.right - b.left - potential.delta_strength * p0) / p0).abs()
        }
        None => 0.0,
    };
    Ok((ode / peak, jump))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delta::{self, DeltaCoupling};
    use approx::assert_abs_diff_eq;

    fn default_grid() -> Grid {
        Grid::symmetric(25.0, 5001).unwrap()
    }

    fn g1() -> DeltaCoupling {
        DeltaCoupling::new(-1.0).unwrap()
    }

    #[test]
    fn bare_delta_energy() {
        let pot = delta::bare_potential(g1(), &default_grid()).unwrap();
        let report = ground_state_energy(&pot).unwrap();
        assert_abs_diff_eq!(report.energy, -0.25, epsilon = 1e-3);
        assert_abs_diff_eq!(report.shooting_energy, -0.25, epsilon = 1e-6);
        assert_eq!(report.node_count, 0);
    }

    #[test]
    fn partner_has_no_bound_state() {
        let pot = delta::partner_potential(g1(), &default_grid()).unwrap();
        assert!(matches!(
            ground_state_energy(&pot),
            Err(Error::NoBoundState { .. })
        ));
    }

    #[test]
    fn free_particle_transmits_fully() {
        let grid = Grid::symmetric(10.0, 2001).unwrap();
        let pot = SingularPotential::new(0.0, GridFunction::constant(grid, 0.0));
        let s = scattering(&pot, 1.0).unwrap();
        // RK4 phase drift over the box stays below 1e-8
        assert_abs_diff_eq!(s.transmission.re, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(s.transmission.im, 0.0, epsilon = 1e-8);
        assert!(s.reflection.norm() < 1e-9);
    }

    #[test]
    fn delta_transmission_matches_textbook() {
        let pot = delta::bare_potential(g1(), &default_grid()).unwrap();
        let s = scattering(&pot, 1.0).unwrap();
        assert_abs_diff_eq!(s.transmission_probability(), 0.8, epsilon = 1e-4);
        assert_abs_diff_eq!(s.flux(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn coarse_steps_are_rejected() {
        let grid = Grid::symmetric(25.0, 501).unwrap();
        let pot = delta::bare_potential(g1(), &grid).unwrap();
        assert!(matches!(
            scattering(&pot, 1.0),
            Err(Error::NonConvergent { .. })
        ));
        assert!(scattering(&pot, -1.0).is_err());
    }

    #[test]
    fn residual_detects_wrong_energy() {
        let grid = default_grid();
        let pot = delta::bare_potential(g1(), &grid).unwrap();
        let psi = delta::sample_ground_state(g1(), &grid).unwrap();
        let h = grid.spacing();
        let (ode, jump) = eigenfunction_residual(&pot, &psi, -0.25).unwrap();
        assert!(ode <= 10.0 * h * h, "ode {ode}");
        assert!(jump <= 10.0 * h * h, "jump {jump}");
        let (ode, _) = eigenfunction_residual(&pot, &psi, 0.0).unwrap();
        assert_abs_diff_eq!(ode, 0.25, epsilon = 2e-3);
    }

    #[test]
    fn residual_of_zero_function_fails() {
        let grid = default_grid();
        let pot = delta::bare_potential(g1(), &grid).unwrap();
        let psi = GridFunction::constant(grid, 0.0);
        assert!(matches!(
            eigenfunction_residual(&pot, &psi, -0.25),
            Err(Error::VanishingWavefunction)
        ));
    }

    #[test]
    fn node_counting() {
        assert_eq!(count_nodes(&[0.0, 1.0, 2.0, 1.0, 0.0]), 0);
        assert_eq!(count_nodes(&[0.0, 1.0, -1.0, 0.0]), 1);
        assert_eq!(count_nodes(&[1.0, 1e-12, -1e-12, 1.0]), 0);
    }
}

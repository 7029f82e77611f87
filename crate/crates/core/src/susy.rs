//! Supersymmetric factorization on grid-sampled functions.
//!
//! Conventions: the superpotential is `W = -(ln ψ0)'`, so `A = d/dx + W`
//! annihilates `ψ0`, `A†A = -d²/dx² + W² - W'` and `AA† = -d²/dx² + W² + W'`.
//! A factorization offset `e0` is added to both potentials.
//!
//! The one-parameter family is built from `I(x) = ∫ψ0²` (from `x_min` on the
//! full line, from `0` on the half line):
//!
//! ```text
//! W1    = W0 + f0 / (C + ∫f0)                 f0 = exp(-2∫W0)
//! V_iso = V1 - 2 (ln(C + I))''
//!       = V1 - 4 ψ0 ψ0' / (C + I) + 2 ψ0⁴ / (C + I)²
//! ψ_iso = √(C(C+1)) ψ0 / (C + I)
//! ```

use std::fmt;

use log::warn;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Largest exponent accepted when forming the integration factor.
pub const MAX_EXPONENT: f64 = 700.0;

/// Tolerance on `∫ψ0² = 1` before a ground state is renormalized.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// Where the cumulative integrals start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SupportLine {
    /// From the left end of the grid, standing in for `-∞`.
    FullLine,
    /// From the node at `x = 0`.
    HalfLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ParameterClass {
    Normalizable,
    Pursey,
    AbrahamMoses,
    ForbiddenBand,
}

impl fmt::Display for ParameterClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParameterClass::Normalizable => "normalizable",
            ParameterClass::Pursey => "Pursey limit",
            ParameterClass::AbrahamMoses => "Abraham-Moses limit",
            ParameterClass::ForbiddenBand => "forbidden band (-1, 0)",
        };
        f.write_str(s)
    }
}

/// The family parameter `C` with its classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsoParameter {
    value: f64,
    class: ParameterClass,
}

impl IsoParameter {
    pub fn new(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::InvalidArgument(format!("C must be finite, got {c}")));
        }
        let class = if c == 0.0 {
            ParameterClass::Pursey
        } else if c == -1.0 {
            ParameterClass::AbrahamMoses
        } else if c > -1.0 && c < 0.0 {
            ParameterClass::ForbiddenBand
        } else {
            ParameterClass::Normalizable
        };
        Ok(Self { value: c, class })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn class(&self) -> ParameterClass {
        self.class
    }

    pub fn is_normalizable(&self) -> bool {
        self.class == ParameterClass::Normalizable
    }

    fn forbidden(&self) -> Error {
        Error::ForbiddenParameter {
            c: self.value,
            class: self.class,
        }
    }
}

/// `N_iso = √(C(C+1))`, defined only for normalizable members.
pub fn normalization_constant(c: &IsoParameter) -> Result<f64> {
    if !c.is_normalizable() {
        return Err(c.forbidden());
    }
    let v = c.value();
    Ok((v * (v + 1.0)).sqrt())
}

fn anchor_index(f: &GridFunction, support: SupportLine) -> Result<usize> {
    match support {
        SupportLine::FullLine => Ok(0),
        SupportLine::HalfLine => f.grid().origin_index().ok_or(Error::NoOriginNode),
    }
}

/// Running integral of `f` starting at the support's lower limit.
pub fn cumulative_integral(f: &GridFunction, support: SupportLine) -> Result<GridFunction> {
    let anchor = anchor_index(f, support)?;
    f.cumulative_from(anchor)
}

/// `W = -ψ0'/ψ0` for a nodeless, strictly positive `ψ0`.
pub fn superpotential_from_ground_state(psi0: &GridFunction) -> Result<GridFunction> {
    let grid = psi0.grid();
    for (i, &v) in psi0.values().iter().enumerate() {
        if v.is_nan() || v <= 0.0 {
            return Err(Error::NonPositiveState {
                x: grid.x(i),
                value: v,
            });
        }
    }
    for b in psi0.breaks() {
        if !(b.left > 0.0 && b.right > 0.0) {
            return Err(Error::NonPositiveState {
                x: grid.x(b.index),
                value: b.left.min(b.right),
            });
        }
    }
    psi0.derivative().zip_with(psi0, |d, p| -d / p)
}

/// `f0 = exp(-2∫W0)`, anchored to 1 at the support's lower limit.
pub fn integration_factor(w0: &GridFunction, support: SupportLine) -> Result<GridFunction> {
    let exponent = cumulative_integral(w0, support)?.scale(-2.0);
    for (i, &e) in exponent.values().iter().enumerate() {
        if e > MAX_EXPONENT {
            return Err(Error::Overflow {
                x: w0.grid().x(i),
                exponent: e,
            });
        }
    }
    Ok(exponent.map(f64::exp))
}

/// Intervals `(x_i, x_{i+1})` where `den` changes sign or touches zero.
fn zero_crossings(den: &GridFunction) -> Vec<(usize, usize)> {
    let n = den.len();
    let mut out = Vec::new();
    for i in 0..n - 1 {
        let a = den.right_limit(i);
        let b = den.left_limit(i + 1);
        if a == 0.0 || b == 0.0 || a.signum() != b.signum() {
            out.push((i, i + 1));
        }
    }
    out
}

/// Returns the denominator with crossing nodes set to NaN when singular
/// members are allowed, or the crossing intervals as an error.
fn guard_denominator(
    den: GridFunction,
    c: &IsoParameter,
    allow_singular: bool,
) -> Result<GridFunction> {
    let crossings = zero_crossings(&den);
    if crossings.is_empty() {
        return Ok(den);
    }
    let grid = *den.grid();
    if !allow_singular {
        return Err(Error::SingularFamilyMember {
            c: c.value(),
            intervals: crossings
                .iter()
                .map(|&(a, b)| (grid.x(a), grid.x(b)))
                .collect(),
        });
    }
    let mut values = den.values().to_vec();
    for &(a, b) in &crossings {
        values[a] = f64::NAN;
        values[b] = f64::NAN;
    }
    // breaks of a running integral are kinks; NaN nodes drop them
    let mut out = GridFunction::new(grid, values.clone())?;
    for br in den.breaks() {
        if values[br.index].is_finite() {
            out = out.with_break(br.index, br.left, br.right)?;
        }
    }
    Ok(out)
}

/// General Riccati solution `W1 = W0 + f0/(C + ∫f0)`.
///
/// On the full line `f0` is scaled to unit total mass so that `C` has the
/// same meaning as in the wavefunction and potential formulas (there `f0`
/// is the normalized `ψ0²`). On the half line `f0` is used as anchored.
pub fn general_riccati_superpotential(
    w0: &GridFunction,
    c: &IsoParameter,
    support: SupportLine,
) -> Result<GridFunction> {
    let mut f0 = integration_factor(w0, support)?;
    if support == SupportLine::FullLine {
        let mass = f0.integral()?;
        f0 = f0.scale(1.0 / mass);
    }
    let den = cumulative_integral(&f0, support)?.map(|v| c.value() + v);
    let den = guard_denominator(den, c, false)?;
    let u = f0.zip_with(&den, |f, d| f / d)?;
    w0.zip_with(&u, |w, u| w + u)
}

/// `W' + W² - V2`; vanishes (to discretization error) for every Riccati
/// solution belonging to `V2`.
pub fn riccati_residual(w: &GridFunction, v2: &GridFunction) -> Result<GridFunction> {
    let lhs = w.derivative().zip_with(w, |d, w| d + w * w)?;
    lhs.zip_with(v2, |l, v| l - v)
}

/// `Aψ = ψ' + Wψ`.
pub fn apply_annihilation(w: &GridFunction, psi: &GridFunction) -> Result<GridFunction> {
    let wpsi = w.zip_with(psi, |w, p| w * p)?;
    psi.derivative().zip_with(&wpsi, |d, wp| d + wp)
}

/// `A†ψ = -ψ' + Wψ`.
pub fn apply_creation(w: &GridFunction, psi: &GridFunction) -> Result<GridFunction> {
    let wpsi = w.zip_with(psi, |w, p| w * p)?;
    psi.derivative().zip_with(&wpsi, |d, wp| -d + wp)
}

/// `H = A†A + e0` with `A = d/dx + W`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationFrame {
    pub superpotential: GridFunction,
    pub offset: f64,
}

impl FactorizationFrame {
    pub fn new(superpotential: GridFunction, offset: f64) -> Self {
        Self {
            superpotential,
            offset,
        }
    }

    pub fn from_ground_state(psi0: &GridFunction, offset: f64) -> Result<Self> {
        Ok(Self::new(superpotential_from_ground_state(psi0)?, offset))
    }

    /// `V1 = W² - W' + e0`.
    pub fn original_potential(&self) -> GridFunction {
        let w = &self.superpotential;
        let e0 = self.offset;
        w.derivative()
            .zip_with(w, |d, w| w * w - d + e0)
            .expect("derivative shares the grid")
    }

    /// `V2 = W² + W' + e0`.
    pub fn partner_potential(&self) -> GridFunction {
        partner_potential(self)
    }
}

pub fn partner_potential(frame: &FactorizationFrame) -> GridFunction {
    let w = &frame.superpotential;
    let e0 = frame.offset;
    w.derivative()
        .zip_with(w, |d, w| w * w + d + e0)
        .expect("derivative shares the grid")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FamilyOptions {
    /// Emit members whose denominator `C + I` vanishes, with NaN at the
    /// nodes bracketing each zero, instead of failing.
    pub allow_singular: bool,
}

/// A family member in both algebraic forms.
#[derive(Debug, Clone, PartialEq)]
pub struct IsospectralPotential {
    /// `V1 - 4ψ0ψ0'/(C+I) + 2ψ0⁴/(C+I)²`.
    pub potential: GridFunction,
    /// `V1 - 2 (ln|C+I|)''`.
    pub log_form: GridFunction,
    /// Largest difference between the two forms over finite samples.
    pub form_discrepancy: f64,
}

fn normalized_state(psi0: &GridFunction) -> Result<GridFunction> {
    let norm = psi0.map(|p| p * p).integral()?;
    if norm.is_nan() || norm <= 0.0 {
        return Err(Error::VanishingWavefunction);
    }
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        warn!("ground state has norm {norm:.9}; renormalizing");
        Ok(psi0.scale(1.0 / norm.sqrt()))
    } else {
        Ok(psi0.clone())
    }
}

/// `(ψ0 normalized, C + I)` with the singularity policy applied.
fn family_denominator(
    psi0: &GridFunction,
    c: &IsoParameter,
    support: SupportLine,
    allow_singular: bool,
) -> Result<(GridFunction, GridFunction)> {
    let psi = normalized_state(psi0)?;
    let i = cumulative_integral(&psi.map(|p| p * p), support)?;
    let den = guard_denominator(i.map(|v| c.value() + v), c, allow_singular)?;
    Ok((psi, den))
}

pub fn isospectral_family_potential(
    v1_tail: &GridFunction,
    psi0: &GridFunction,
    c: &IsoParameter,
    support: SupportLine,
    options: FamilyOptions,
) -> Result<IsospectralPotential> {
    if !options.allow_singular && !c.is_normalizable() {
        return Err(c.forbidden());
    }
    let (psi, den) = family_denominator(psi0, c, support, options.allow_singular)?;
    let dpsi = psi.derivative();

    let first = psi
        .zip_with(&dpsi, |p, d| 4.0 * p * d)?
        .zip_with(&den, |a, d| a / d)?;
    let second = psi.zip_with(&den, |p, d| 2.0 * p.powi(4) / (d * d))?;
    let potential = v1_tail
        .zip_with(&first, |v, a| v - a)?
        .zip_with(&second, |v, b| v + b)?;

    let log_form = v1_tail.zip_with(&den.map(|d| d.abs().ln()).second_derivative(), |v, l| {
        v - 2.0 * l
    })?;

    let form_discrepancy = potential
        .zip_with(&log_form, |a, b| (a - b).abs())?
        .max_abs();

    Ok(IsospectralPotential {
        potential,
        log_form,
        form_discrepancy,
    })
}

/// `ψ0/(C + I)`, multiplied by `N_iso` when `normalized` is set.
pub fn isospectral_ground_state(
    psi0: &GridFunction,
    c: &IsoParameter,
    support: SupportLine,
    normalized: bool,
    options: FamilyOptions,
) -> Result<GridFunction> {
    let scale = if normalized {
        normalization_constant(c)?
    } else {
        1.0
    };
    let (psi, den) = family_denominator(psi0, c, support, options.allow_singular)?;
    psi.zip_with(&den, |p, d| scale * p / d)
}

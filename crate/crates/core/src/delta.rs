//! Closed forms for the isospectral family of the attractive delta
//! potential `g δ(x)`, `g < 0`, in units with `ħ²/2m = 1`.
//!
//! With `S(x) = 2C + sign(x) + 1` and `D(x) = 1 - S(x) sign(x) e^{-g|x|}`:
//!
//! ```text
//! ψ0(x)   = √(-g/2) e^{g|x|/2}                    E0 = -g²/4
//! I(x)    = -½ sign(x) e^{g|x|} + ½ sign(x) + ½
//! tail(x) = 2g² S sign(x) e^{-g|x|} / D²
//! ψ_iso   = -√(-2g) √(C(C+1)) sign(x) e^{-g|x|/2} / D
//! ```
//!
//! The full family member is `g δ(x) + tail(x)`; the delta strength is never
//! changed by the deformation. At `x = 0` every formula is evaluated as a
//! pair of one-sided limits ([`Side`]).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::spectral::SingularPotential;
use crate::susy::{normalization_constant, IsoParameter, ParameterClass};

/// Accuracy demanded of refined pole positions, in denominator units.
pub const POLE_RESIDUAL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaCoupling(f64);

impl DeltaCoupling {
    pub fn new(g: f64) -> Result<Self> {
        if g < 0.0 && g.is_finite() {
            Ok(Self(g))
        } else {
            Err(Error::NotAttractive(g))
        }
    }

    pub fn g(&self) -> f64 {
        self.0
    }
}

/// Which half-line a formula is evaluated on; only matters at `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn of(x: f64) -> Self {
        if x < 0.0 {
            Side::Left
        } else {
            Side::Right
        }
    }

    fn sign(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

/// The piecewise constant `2C + sign(x) + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScriptC {
    pub c: f64,
    pub value_pos: f64,
    pub value_neg: f64,
}

impl ScriptC {
    pub fn new(c: f64) -> Self {
        Self {
            c,
            value_pos: 2.0 * c + 2.0,
            value_neg: 2.0 * c,
        }
    }

    pub fn on(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.value_neg,
            Side::Right => self.value_pos,
        }
    }

    /// Value at `x`; at the origin both limits `(2C, 2C + 2)` are returned.
    pub fn at(&self, x: f64) -> (f64, f64) {
        if x > 0.0 {
            (self.value_pos, self.value_pos)
        } else if x < 0.0 {
            (self.value_neg, self.value_neg)
        } else {
            (self.value_neg, self.value_pos)
        }
    }
}

pub fn bound_energy(g: DeltaCoupling) -> f64 {
    -g.g() * g.g() / 4.0
}

pub fn ground_state_delta(g: DeltaCoupling, x: f64) -> f64 {
    let g = g.g();
    (-g / 2.0).sqrt() * (g * x.abs() / 2.0).exp()
}

/// `W0 = -(g/2) sign(x)` on the given side.
pub fn ground_superpotential(g: DeltaCoupling, x: f64, side: Side) -> f64 {
    let s = if x == 0.0 { side.sign() } else { x.signum() };
    -g.g() / 2.0 * s
}

/// `∫_{-∞}^x ψ0²`; continuous, equal to ½ at the origin.
pub fn cumulative_i(g: DeltaCoupling, x: f64) -> f64 {
    let e = (g.g() * x.abs()).exp();
    if x > 0.0 {
        1.0 - 0.5 * e
    } else {
        0.5 * e
    }
}

/// `D = 1 - S sign(x) e^{-g|x|}` on a given side.
pub fn denominator(g: DeltaCoupling, c: f64, x: f64, side: Side) -> f64 {
    let side = if x == 0.0 { side } else { Side::of(x) };
    let s = ScriptC::new(c).on(side);
    1.0 - s * side.sign() * (-g.g() * x.abs()).exp()
}

fn tail_from_parts(g: f64, num: f64, den: f64) -> f64 {
    2.0 * g * g * num / (den * den)
}

/// Darboux tail on one side of the origin.
pub fn iso_tail_on(g: DeltaCoupling, c: &IsoParameter, x: f64, side: Side) -> Result<f64> {
    let side = if x == 0.0 { side } else { Side::of(x) };
    let s = ScriptC::new(c.value()).on(side);
    let grow = (-g.g() * x.abs()).exp();
    let num = s * side.sign() * grow;
    let den = 1.0 - num;
    if den == 0.0 {
        return Err(Error::Singular(x));
    }
    Ok(tail_from_parts(g.g(), num, den))
}

/// Darboux tail; at `x = 0` the mean of the two one-sided limits.
pub fn iso_tail(g: DeltaCoupling, c: &IsoParameter, x: f64) -> Result<f64> {
    if x == 0.0 {
        let l = iso_tail_on(g, c, x, Side::Left)?;
        let r = iso_tail_on(g, c, x, Side::Right)?;
        Ok(0.5 * (l + r))
    } else {
        iso_tail_on(g, c, x, Side::of(x))
    }
}

pub fn iso_wavefunction_on(
    g: DeltaCoupling,
    c: &IsoParameter,
    x: f64,
    side: Side,
    normalized: bool,
) -> Result<f64> {
    let n = if normalized {
        normalization_constant(c)?
    } else {
        1.0
    };
    let side = if x == 0.0 { side } else { Side::of(x) };
    let den = denominator(g, c.value(), x, side);
    if den == 0.0 {
        return Err(Error::Singular(x));
    }
    let gv = g.g();
    Ok(-(-2.0 * gv).sqrt() * n * side.sign() * (-gv * x.abs() / 2.0).exp() / den)
}

/// Isospectral ground state; at the origin the mean of both limits (they
/// agree whenever the denominator is regular on both sides).
pub fn iso_wavefunction(
    g: DeltaCoupling,
    c: &IsoParameter,
    x: f64,
    normalized: bool,
) -> Result<f64> {
    if x == 0.0 {
        let l = iso_wavefunction_on(g, c, x, Side::Left, normalized)?;
        let r = iso_wavefunction_on(g, c, x, Side::Right, normalized)?;
        Ok(0.5 * (l + r))
    } else {
        iso_wavefunction_on(g, c, x, Side::of(x), normalized)
    }
}

/// Sub-bands of the forbidden interval where the denominator has a zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SingularBand {
    /// `C ∈ (-1, -1/2]`: a pole on the positive half-line.
    PositiveSideBand,
    /// `C ∈ (-1/2, 0)`: a pole on the negative half-line only.
    NegativeSideBand,
    None,
}

impl SingularBand {
    pub fn of(c: f64) -> Self {
        if c > -1.0 && c <= -0.5 {
            SingularBand::PositiveSideBand
        } else if c > -0.5 && c < 0.0 {
            SingularBand::NegativeSideBand
        } else {
            SingularBand::None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParameterInfo {
    pub parameter: IsoParameter,
    pub band: SingularBand,
}

pub fn classify_parameter(c: f64) -> Result<ParameterInfo> {
    Ok(ParameterInfo {
        parameter: IsoParameter::new(c)?,
        band: SingularBand::of(c),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HalfLine {
    Negative,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pole {
    pub x: f64,
    pub half_line: HalfLine,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularityReport {
    pub c: f64,
    pub locations: Vec<Pole>,
    pub parameter_band: SingularBand,
}

impl SingularityReport {
    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }
}

/// Newton iteration on `D(x)` within one half-line.
fn refine_pole(g: DeltaCoupling, c: f64, mut x: f64, side: Side) -> f64 {
    let gv = g.g();
    let s = ScriptC::new(c).on(side) * side.sign();
    for _ in 0..50 {
        let e = (-gv * x.abs()).exp();
        let d = 1.0 - s * e;
        // dD/dx = -s e (-g sign(x))
        let dd = s * e * gv * side.sign();
        if dd == 0.0 {
            break;
        }
        let step = d / dd;
        let next = x - step;
        // stay on the half-line
        let next = match side {
            Side::Right => next.max(0.0),
            Side::Left => next.min(0.0),
        };
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) {
            x = next;
            break;
        }
        x = next;
    }
    x
}

/// All zeros of the denominator inside `search_domain`, one closed-form
/// root per half-line followed by Newton refinement.
pub fn singularity_scan(g: DeltaCoupling, c: f64, search_domain: &Grid) -> SingularityReport {
    let gv = g.g();
    let mut locations = Vec::new();
    // x < 0: 1 + 2C e^{-g|x|} = 0  ⇒  e^{-g|x|} = -1/(2C) ≥ 1
    if c < 0.0 && -1.0 / (2.0 * c) >= 1.0 {
        let x0 = (-1.0 / (2.0 * c)).ln() / gv;
        let x = refine_pole(g, c, x0, Side::Left);
        locations.push(Pole {
            x,
            half_line: HalfLine::Negative,
        });
    }
    // x > 0: 1 - (2C + 2) e^{-g x} = 0  ⇒  x = ln(2(C + 1))/g with 0 < 2(C+1) ≤ 1
    let s = 2.0 * (c + 1.0);
    if s > 0.0 && s <= 1.0 {
        let x0 = s.ln() / gv;
        let x = refine_pole(g, c, x0, Side::Right);
        locations.push(Pole {
            x,
            half_line: HalfLine::Positive,
        });
    }
    locations.retain(|p| p.x >= search_domain.x_min() && p.x <= search_domain.x_max());
    SingularityReport {
        c,
        locations,
        parameter_band: SingularBand::of(c),
    }
}

/// Samples a closed form on `grid`, recording the origin as a break with
/// one-sided limits. Nodes within one spacing of a pole become NaN when
/// `allow_singular` is set; otherwise the first pole is an error.
fn sample(
    grid: &Grid,
    poles: &[Pole],
    allow_singular: bool,
    f: impl Fn(f64, Side) -> Result<f64>,
) -> Result<GridFunction> {
    let i0 = grid.origin_index().ok_or(Error::NoOriginNode)?;
    if let (false, Some(p)) = (allow_singular, poles.first()) {
        return Err(Error::Singular(p.x));
    }
    let h = grid.spacing();
    let near_pole = |x: f64, side: Side| {
        poles.iter().any(|p| {
            let same_side = matches!(
                (p.half_line, side),
                (HalfLine::Negative, Side::Left) | (HalfLine::Positive, Side::Right)
            );
            same_side && (x - p.x).abs() < h
        })
    };
    let eval = |x: f64, side: Side| -> Result<f64> {
        if near_pole(x, side) {
            return Ok(f64::NAN);
        }
        match f(x, side) {
            Err(Error::Singular(_)) if allow_singular => Ok(f64::NAN),
            other => other,
        }
    };
    let mut values = Vec::with_capacity(grid.len());
    for (i, x) in grid.nodes().enumerate() {
        let v = if i == i0 { 0.0 } else { eval(x, Side::of(x))? };
        values.push(v);
    }
    let left = eval(0.0, Side::Left)?;
    let right = eval(0.0, Side::Right)?;
    GridFunction::new(*grid, values)?.with_break(i0, left, right)
}

pub fn sample_ground_state(g: DeltaCoupling, grid: &Grid) -> Result<GridFunction> {
    sample(grid, &[], false, |x, _| Ok(ground_state_delta(g, x)))
}

pub fn sample_ground_superpotential(g: DeltaCoupling, grid: &Grid) -> Result<GridFunction> {
    sample(grid, &[], false, |x, side| {
        Ok(ground_superpotential(g, x, side))
    })
}

pub fn sample_iso_tail(
    g: DeltaCoupling,
    c: &IsoParameter,
    grid: &Grid,
    allow_singular: bool,
) -> Result<GridFunction> {
    let poles = singularity_scan(g, c.value(), grid).locations;
    sample(grid, &poles, allow_singular, |x, side| {
        iso_tail_on(g, c, x, side)
    })
}

pub fn sample_iso_wavefunction(
    g: DeltaCoupling,
    c: &IsoParameter,
    grid: &Grid,
    normalized: bool,
    allow_singular: bool,
) -> Result<GridFunction> {
    if normalized && !c.is_normalizable() {
        return Err(Error::ForbiddenParameter {
            c: c.value(),
            class: c.class(),
        });
    }
    let poles = singularity_scan(g, c.value(), grid).locations;
    sample(grid, &poles, allow_singular, |x, side| {
        iso_wavefunction_on(g, c, x, side, normalized)
    })
}

/// The full family member `g δ(x) + tail(x)` on `grid`.
pub fn iso_potential(
    g: DeltaCoupling,
    c: &IsoParameter,
    grid: &Grid,
    allow_singular: bool,
) -> Result<SingularPotential> {
    if !allow_singular && c.class() == ParameterClass::ForbiddenBand {
        return Err(Error::ForbiddenParameter {
            c: c.value(),
            class: c.class(),
        });
    }
    Ok(SingularPotential::new(
        g.g(),
        sample_iso_tail(g, c, grid, allow_singular)?,
    ))
}

/// The bare delta `g δ(x)` on `grid`.
pub fn bare_potential(g: DeltaCoupling, grid: &Grid) -> Result<SingularPotential> {
    grid.origin_index().ok_or(Error::NoOriginNode)?;
    Ok(SingularPotential::new(
        g.g(),
        GridFunction::constant(*grid, 0.0),
    ))
}

/// Superpartner `-g δ(x)` with the constant offset removed: purely
/// repulsive, without bound states.
pub fn partner_potential(g: DeltaCoupling, grid: &Grid) -> Result<SingularPotential> {
    grid.origin_index().ok_or(Error::NoOriginNode)?;
    Ok(SingularPotential::new(
        -g.g(),
        GridFunction::constant(*grid, 0.0),
    ))
}

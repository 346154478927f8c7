//! Adaptive Gauss–Kronrod (G10/K21) quadrature with nested rules for polar discs and boxes.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{fabs, pow};

use super::NumericsError;

/// Tolerances and subdivision budget for one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub relative_tolerance: f64,
    pub absolute_tolerance: f64,
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    pub fn new(
        relative_tolerance: f64,
        absolute_tolerance: f64,
        max_subdivisions: usize,
    ) -> Result<Self, NumericsError> {
        let spec = Self {
            relative_tolerance,
            absolute_tolerance,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Default for one- and two-dimensional integrals.
    pub const fn planar() -> Self {
        Self {
            relative_tolerance: 1e-8,
            absolute_tolerance: 1e-15,
            max_subdivisions: 500,
        }
    }

    /// Default for three-dimensional integrals.
    pub const fn volume() -> Self {
        Self {
            relative_tolerance: 1e-6,
            absolute_tolerance: 1e-13,
            max_subdivisions: 200,
        }
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        if !(self.relative_tolerance > 0.0) || !(self.absolute_tolerance > 0.0) {
            return Err(NumericsError::Domain("quadrature tolerances must be positive"));
        }
        if self.max_subdivisions < 1 {
            return Err(NumericsError::Domain("quadrature needs at least one subdivision"));
        }
        Ok(())
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::planar()
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208745729490,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    estimate: f64,
    error: f64,
}

fn kronrod_panel<F>(f: &mut F, lo: f64, hi: f64) -> Result<Panel, NumericsError>
where
    F: FnMut(f64) -> Result<f64, NumericsError>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let f_center = f(center)?;
    let mut kronrod = f_center * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = fabs(kronrod);
    let mut values = [(0.0f64, 0.0f64); 10];
    for (j, &node) in XGK[..10].iter().enumerate() {
        let dx = half * node;
        let left = f(center - dx)?;
        let right = f(center + dx)?;
        values[j] = (left, right);
        kronrod += WGK[j] * (left + right);
        abs_sum += WGK[j] * (fabs(left) + fabs(right));
        if j % 2 == 1 {
            gauss += WG[j / 2] * (left + right);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * fabs(f_center - mean);
    for (j, &(left, right)) in values.iter().enumerate() {
        asc += WGK[j] * (fabs(left - mean) + fabs(right - mean));
    }

    let estimate = kronrod * half;
    let res_abs = abs_sum * fabs(half);
    let res_asc = asc * fabs(half);
    let mut error = fabs((kronrod - gauss) * half);
    if res_asc != 0.0 && error != 0.0 {
        let scale = pow(200.0 * error / res_asc, 1.5);
        error = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    if !estimate.is_finite() {
        return Err(NumericsError::Domain("integrand is not finite on the domain"));
    }
    Ok(Panel {
        lo,
        hi,
        estimate,
        error,
    })
}

/// Adaptive bisection driven by the panel with the largest error estimate.
pub(crate) fn adaptive<F>(mut f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<f64, NumericsError>
where
    F: FnMut(f64) -> Result<f64, NumericsError>,
{
    spec.validate()?;
    if !lo.is_finite() || !hi.is_finite() {
        return Err(NumericsError::Domain("integration bounds must be finite"));
    }
    if lo == hi {
        return Ok(0.0);
    }
    let mut panels: Vec<Panel> = Vec::with_capacity(16);
    panels.push(kronrod_panel(&mut f, lo, hi)?);
    loop {
        // summing in panel order keeps the result bit-reproducible
        let total: f64 = panels.iter().map(|p| p.estimate).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let target = spec.absolute_tolerance.max(spec.relative_tolerance * fabs(total));
        if error <= target {
            return Ok(total);
        }
        if panels.len() >= spec.max_subdivisions {
            return Err(NumericsError::ToleranceNotMet { estimate: total, error });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |best, (i, p)| {
                if p.error > best.1 {
                    (i, p.error)
                } else {
                    best
                }
            });
        let split = panels[worst];
        let mid = 0.5 * (split.lo + split.hi);
        if mid <= split.lo || mid >= split.hi {
            return Err(NumericsError::ToleranceNotMet { estimate: total, error });
        }
        panels[worst] = kronrod_panel(&mut f, split.lo, mid)?;
        panels.push(kronrod_panel(&mut f, mid, split.hi)?);
    }
}

/// ∫ f(t) dt over [lo, hi].
pub fn integrate_1d<F>(f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    adaptive(|t| Ok(f(t)), lo, hi, spec)
}

/// Area integral of f(r, θ) over the disc of radius `radius`; the Jacobian r is applied here.
pub fn integrate_polar_disc<F>(f: F, radius: f64, spec: &QuadratureSpec) -> Result<f64, NumericsError>
where
    F: Fn(f64, f64) -> f64,
{
    if !(radius >= 0.0) {
        return Err(NumericsError::Domain("disc radius must be nonnegative"));
    }
    adaptive(
        |r| {
            let ring = adaptive(|theta| Ok(f(r, theta)), 0.0, 2.0 * PI, spec)?;
            Ok(r * ring)
        },
        0.0,
        radius,
        spec,
    )
}

/// Axis-aligned box for [`integrate_3d`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box3 {
    pub r: (f64, f64),
    pub x: (f64, f64),
    pub theta: (f64, f64),
}

/// ∫∫∫ f(r, x, θ) dθ dx dr over a box, nested one-dimensional rules (no Jacobian).
pub fn integrate_3d<F>(f: F, bounds: Box3, spec: &QuadratureSpec) -> Result<f64, NumericsError>
where
    F: Fn(f64, f64, f64) -> f64,
{
    adaptive(
        |r| {
            adaptive(
                |x| adaptive(|theta| Ok(f(r, x, theta)), bounds.theta.0, bounds.theta.1, spec),
                bounds.x.0,
                bounds.x.1,
                spec,
            )
        },
        bounds.r.0,
        bounds.r.1,
        spec,
    )
}

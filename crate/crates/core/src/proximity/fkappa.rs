//! The lune-diameter bound `F_kappa` and the lune sets it controls.

use crate::model_space::{note_clamp, Point, Space};
use crate::{Error, Result};

fn check_args(kappa: f64, d: f64, r: f64, sigma: f64) -> Result<()> {
    if !(kappa < 0.0 && kappa.is_finite()) {
        return Err(Error::DomainViolation(format!(
            "kappa must be negative, got {kappa}"
        )));
    }
    if !(d >= 0.0 && r >= 0.0 && sigma >= 0.0)
        || !(d.is_finite() && r.is_finite() && sigma.is_finite())
    {
        return Err(Error::DomainViolation(
            "d, r and sigma must be finite and nonnegative".into(),
        ));
    }
    if d == 0.0 {
        return Err(Error::DomainViolation(
            "F_kappa is undefined at d = 0 (sinh(0) divisor)".into(),
        ));
    }
    Ok(())
}

/// `F_kappa(d, r, sigma)`, the bound on the diameter of the lune
/// `D(x, y; r, sigma)` with `d = d(x, y)` in spaces of curvature bounded
/// below by `kappa < 0`.
///
/// Evaluated through the identity `arg - 1 = 2 (sinh a / sinh D)
/// sinh(R + k sigma / 2) sinh(k sigma / 2)` for the arccosh argument, with
/// `k = sqrt(-kappa)`, `a = k (r - d + sigma)`, `D = k d`, `R = k r`, which
/// avoids the cancellation of the expanded form for small `sigma`.
pub fn f_kappa(kappa: f64, d: f64, r: f64, sigma: f64) -> Result<f64> {
    check_args(kappa, d, r, sigma)?;
    let k = (-kappa).sqrt();
    let a = k * (r - d + sigma);
    let half_q =
        a.sinh() / (k * d).sinh() * (k * r + k * sigma / 2.0).sinh() * (k * sigma / 2.0).sinh();
    if half_q < 0.0 {
        note_clamp("F_kappa arccosh argument", -2.0 * half_q);
        if -2.0 * half_q > 1e-9 {
            log::warn!(
                "F_kappa({kappa}, {d}, {r}, {sigma}): arccosh argument below 1 by {:e}",
                -2.0 * half_q
            );
        }
    }
    Ok(4.0 / k * half_q.max(0.0).sqrt().asinh())
}

/// `F_kappa` evaluated term by term as displayed; loses about 1e-8 of
/// absolute accuracy near `sigma = 0`. Kept as a cross-check.
pub fn f_kappa_expanded(kappa: f64, d: f64, r: f64, sigma: f64) -> Result<f64> {
    check_args(kappa, d, r, sigma)?;
    let k = (-kappa).sqrt();
    let a = k * (r - d + sigma);
    let arg =
        a.cosh().powi(2) - a.sinh() / (k * d).sinh() * ((k * r).cosh() - (k * d).cosh() * a.cosh());
    if arg < 1.0 {
        note_clamp("F_kappa arccosh argument", 1.0 - arg);
    }
    Ok(2.0 / k * arg.max(1.0).acosh())
}

/// Checks the standing assumption on a lune: `r > 0`,
/// `0 < d(x, y) < r / 2` and `0 <= sigma <= 2 d(x, y)`.
pub fn check_lune_assumption(
    space: &Space,
    x: &Point,
    y: &Point,
    r: f64,
    sigma: f64,
) -> Result<f64> {
    space.validate(x)?;
    space.validate(y)?;
    let d = space.d(x, y);
    if !(r > 0.0) || !(d > 0.0 && d < r / 2.0) || !(sigma >= 0.0 && sigma <= 2.0 * d) {
        return Err(Error::Precondition(format!(
            "need 0 < d(x,y) < r/2 and 0 <= sigma <= 2 d(x,y); got d = {d}, r = {r}, sigma = {sigma}"
        )));
    }
    Ok(d)
}

/// Membership in `D(x, y; r, sigma)`: `d(z, y) <= r - d(x, y) + sigma` and
/// `d(z, x) >= r`, each with 1e-12 slack toward inclusion.
pub fn d_set_contains(
    space: &Space,
    x: &Point,
    y: &Point,
    r: f64,
    sigma: f64,
    z: &Point,
) -> Result<bool> {
    let d = check_lune_assumption(space, x, y, r, sigma)?;
    space.validate(z)?;
    Ok(lune_member(space, x, y, d, r, sigma, z))
}

pub(crate) fn lune_member(
    space: &Space,
    x: &Point,
    y: &Point,
    d: f64,
    r: f64,
    sigma: f64,
    z: &Point,
) -> bool {
    space.d(z, y) <= r - d + sigma + 1e-12 && space.d(z, x) >= r - 1e-12
}

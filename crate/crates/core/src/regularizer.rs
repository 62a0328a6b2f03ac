//! Drop perturbations that make a nearest or farthest pair problem
//! well-posed: a point `x'` is placed just beyond the optimal pair and the
//! set `X` is replaced by the hull of `X ∪ {x'}`.

use serde::{Deserialize, Serialize};

use crate::model_space::Point;
use crate::proximity::{f_kappa, Diagnostics, Mode, ProfileSettings};
use crate::setkit::{cone_hull, diam, hausdorff, lambda_mu, FiniteSet, Slicer};
use crate::{par, Error, Result};

/// Indices of `A` whose distance to `z` is within `tol` of the minimum.
pub fn nearest_map(a: &FiniteSet, z: &Point, tol: f64) -> Vec<usize> {
    let d: Vec<f64> = par::map(a.points(), |p| a.space().d(p, z));
    let best = d.iter().copied().fold(f64::INFINITY, f64::min);
    (0..d.len()).filter(|&i| d[i] <= best + tol).collect()
}

/// Indices of `A` whose distance to `z` is within `tol` of the maximum.
pub fn farthest_map(a: &FiniteSet, z: &Point, tol: f64) -> Vec<usize> {
    let d: Vec<f64> = par::map(a.points(), |p| a.space().d(p, z));
    let best = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..d.len()).filter(|&i| d[i] >= best - tol).collect()
}

/// Slack in the hull bound `dist(y, X) <= dist(x', X) - alpha d(x', y)` for
/// `y` in co(X ∪ {x'}), where `alpha = dist(x', X) / (dist(x', X) + diam X)`.
/// Distances to `X` are taken to the exact hull of its samples when
/// available. Nonnegative whenever the bound holds.
pub fn lemma_hull_bound_defect(x: &FiniteSet, x_prime: &Point, y: &Point) -> Result<f64> {
    x.space().validate(y)?;
    let (dx, alpha) = hull_bound_constants(x, x_prime)?;
    Ok(dx - alpha * x.space().d(x_prime, y) - x.closure_dist(y))
}

/// [`lemma_hull_bound_defect`] at every sample of `ys`.
pub fn lemma_hull_bound_defects(
    x: &FiniteSet,
    x_prime: &Point,
    ys: &FiniteSet,
) -> Result<Vec<f64>> {
    x.check_same_space(ys)?;
    let (dx, alpha) = hull_bound_constants(x, x_prime)?;
    Ok(par::map(ys.points(), |y| {
        dx - alpha * x.space().d(x_prime, y) - x.closure_dist(y)
    }))
}

fn hull_bound_constants(x: &FiniteSet, x_prime: &Point) -> Result<(f64, f64)> {
    x.space().validate(x_prime)?;
    let dx = x.closure_dist(x_prime);
    if !(dx > 0.0) {
        return Err(Error::Precondition("x' must lie outside X".into()));
    }
    Ok((dx, dx / (dx + diam(x))))
}

/// Which construction produced a [`DropResult`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// Hull of `X ∪ {x'}`, with constants chosen from a lower curvature bound.
    CurvatureBound,
    /// Hull of `X ∪ {x'}` at an exactly optimal pair, relying on the absence
    /// of bifurcating geodesics.
    NoBifurcation,
    /// `X ∪ {x'}` without hulling, for the farthest-pair problem.
    NoBifurcationUnion,
}

/// Constants fixed by the curvature-bound construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProofConstants {
    pub kappa: f64,
    pub sigma: f64,
    pub tau: f64,
    pub n0: u64,
    /// `dist(x', X) / (dist(x', X) + diam X)`.
    pub alpha: f64,
    /// `F_kappa(..) + 2 sigma` at the chosen `sigma`.
    pub bound: f64,
    /// `1 / p`.
    pub target: f64,
}

/// Diameter of one slice compared with the limit the construction promises.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SliceCheck {
    pub width: f64,
    pub diam: f64,
    pub limit: f64,
    pub ok: bool,
}

impl SliceCheck {
    fn new(slicer: &Slicer<'_>, width: f64, limit: f64) -> SliceCheck {
        let diam = slicer.diam(width);
        SliceCheck {
            width,
            diam,
            limit,
            ok: diam < limit,
        }
    }
}

/// Sample-level checks of the properties the construction guarantees.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DropChecks {
    /// Hausdorff distance between the samples of `X` (with the anchor
    /// added) and those of `Y`.
    pub hausdorff: f64,
    /// Largest distance from a sample of `Y` to the set `X` stands for.
    pub hausdorff_closure: f64,
    pub hausdorff_ok: bool,
    /// `lambda_AX` or `mu_AX` before the drop.
    pub value_before: f64,
    /// `lambda_AY` or `mu_AY` after the drop.
    pub value_after: f64,
    pub value_ok: bool,
    /// Slice of `Y` toward `A` at width `tau / 2`.
    pub slice_ya: Option<SliceCheck>,
    /// Slice of `A` toward `Y` at width `tau / 4`.
    pub slice_ay: Option<SliceCheck>,
    /// Nearest (min) or farthest (max) map of `A` at `x'`.
    pub map: Vec<usize>,
    pub map_singleton: bool,
}

impl DropChecks {
    pub fn ok(&self) -> bool {
        self.hausdorff_ok
            && self.value_ok
            && self.slice_ya.map_or(true, |c| c.ok)
            && self.slice_ay.map_or(true, |c| c.ok)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DropResult {
    pub mode: Mode,
    pub construction: Construction,
    pub radius: f64,
    /// Anchor point of `X`: a sample, or the foot on the hull of the
    /// samples when that is nearer to `A`.
    pub x1: Point,
    /// Index of the anchor point of `A`.
    pub a1: usize,
    pub x_prime: Point,
    pub y: FiniteSet,
    pub constants: Option<ProofConstants>,
    pub checks: DropChecks,
    pub certified: Diagnostics,
}

impl DropResult {
    /// All sample checks pass and the profile of `(A, Y)` is well-posed.
    pub fn ok(&self) -> bool {
        self.checks.ok() && self.certified.verdict
    }
}

/// Tuning of the drop constructions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DropOptions {
    /// Points sampled on each segment from `X` to `x'`.
    pub cone_m: usize,
    pub profile: ProfileSettings,
    /// Tolerance of the nearest/farthest map at `x'`.
    pub map_tol: f64,
    /// Run the bifurcation-free constructions even where the space has
    /// bifurcating geodesics.
    pub allow_bifurcating: bool,
    /// Hull `X ∪ {x'}` in the farthest-pair construction without a
    /// curvature bound.
    pub hull_union: bool,
}

impl Default for DropOptions {
    fn default() -> Self {
        DropOptions {
            cone_m: 9,
            profile: ProfileSettings::default(),
            map_tol: 1e-6,
            allow_bifurcating: false,
            hull_union: false,
        }
    }
}

/// Largest `sigma` in `(0, upper]` with `g(sigma) < target`, by bisection,
/// for `g` increasing. Returns the width and `g` there.
fn select_sigma(upper: f64, target: f64, g: impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let top = g(upper)?;
    if top < target {
        return Ok((upper, top));
    }
    let (mut lo, mut hi) = (0.0, upper);
    while hi - lo > 1e-9 * upper {
        let mid = 0.5 * (lo + hi);
        if g(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo == 0.0 {
        return Err(Error::NoFeasibleSigma { best: g(hi)? });
    }
    Ok((lo, g(lo)?))
}

/// Index `n0` with `1/n0 < rho eps / (4 (rho + diam X))`, past which the
/// shrinking sets around any `x'` with `dist(x', X) >= rho` have diameter
/// below `eps`.
fn shrink_index(rho: f64, eps: f64, diam_x: f64) -> u64 {
    let bound = rho * eps / (4.0 * (rho + diam_x));
    let mut n0 = (1.0 / bound).floor() as u64 + 1;
    while !(1.0 / (n0 as f64) < bound) {
        n0 += 1;
    }
    n0
}

fn check_inputs(a: &FiniteSet, x: &FiniteSet, r: f64) -> Result<()> {
    a.check_same_space(x)?;
    if !x.is_convex() {
        return Err(Error::Precondition("X must be marked convex".into()));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Precondition(format!(
            "radius must be positive, got {r}"
        )));
    }
    Ok(())
}

/// Nearest pair with `x1` taken on the set `X` stands for; ties go to the
/// lowest index of `A`.
fn nearest_anchor(a: &FiniteSet, x: &FiniteSet) -> (usize, Point, f64) {
    let feet = par::map(a.points(), |p| x.closure_nearest(p));
    let mut best = 0;
    for (i, f) in feet.iter().enumerate() {
        if f.0 < feet[best].0 {
            best = i;
        }
    }
    let (d, foot) = feet[best].clone();
    (best, foot, d)
}

/// `X` with the anchor added to its samples.
fn anchored(x: &FiniteSet, x1: &Point) -> Result<FiniteSet> {
    Ok(x.with_points(std::slice::from_ref(x1))?
        .with_convex(x.is_convex()))
}

fn closure_excess(x: &FiniteSet, y: &FiniteSet) -> f64 {
    par::max_range(y.len(), |i| x.closure_dist(y.point(i)))
}

struct Built {
    xh: FiniteSet,
    y: FiniteSet,
    hausdorff: f64,
    hausdorff_closure: f64,
}

fn build(x: &FiniteSet, x1: &Point, x_prime: &Point, m: usize, hull: bool) -> Result<Built> {
    let xh = anchored(x, x1)?;
    let y = if hull {
        cone_hull(&xh, x_prime, m)?
    } else {
        xh.with_points(std::slice::from_ref(x_prime))?
    };
    let hausdorff = hausdorff(&xh, &y)?;
    let hausdorff_closure = closure_excess(x, &y);
    Ok(Built {
        xh,
        y,
        hausdorff,
        hausdorff_closure,
    })
}

/// Drop for `min(A, X)` in a space with convex metric and curvature bounded
/// below: the result's nearest-pair problem is well-posed with slice
/// diameters below `1/p` at the widths the construction fixes.
pub fn regularize_min(a: &FiniteSet, x: &FiniteSet, r: f64, p: u64) -> Result<DropResult> {
    regularize_min_with(a, x, r, p, &DropOptions::default())
}

pub fn regularize_min_with(
    a: &FiniteSet,
    x: &FiniteSet,
    r: f64,
    p: u64,
    opts: &DropOptions,
) -> Result<DropResult> {
    check_inputs(a, x, r)?;
    let space = x.space();
    let caps = space.caps();
    space.require(caps.convex_metric, "needs a convex metric")?;
    let kappa = caps
        .curvature_bounded_below
        .ok_or_else(|| Error::Capability("needs a lower curvature bound".into()))?;
    if p == 0 {
        return Err(Error::Precondition("p must be at least 1".into()));
    }
    let (a1, x1, lambda) = nearest_anchor(a, x);
    if !(r < lambda) {
        return Err(Error::Precondition(format!(
            "need 0 < r < lambda_AX = {lambda}, got r = {r}"
        )));
    }
    let target = 1.0 / p as f64;
    let (sigma, bound) = select_sigma(r, target, |s| Ok(f_kappa(kappa, r, lambda, s)? + 2.0 * s))?;
    let diam_x = diam(x);
    let n0 = shrink_index(r / 2.0, sigma / 2.0, diam_x);
    let tau = (sigma / 2.0).min(1.0 / n0 as f64);

    let x_prime = space.geodesic_point(&x1, a.point(a1), r / lambda)?;
    let built = build(x, &x1, &x_prime, opts.cone_m, true)?;
    let dx = x.closure_dist(&x_prime);
    let alpha = dx / (dx + diam_x);

    let before = lambda_mu(a, &built.xh)?.lambda;
    let after = lambda_mu(a, &built.y)?.lambda;
    let sm = Mode::Min.slice_mode();
    let slice_ya = SliceCheck::new(&Slicer::new(&built.y, a, sm)?, tau / 2.0, sigma / 2.0);
    let slice_ay = SliceCheck::new(&Slicer::new(a, &built.y, sm)?, tau / 4.0, target);
    let map = nearest_map(a, &x_prime, opts.map_tol);
    let checks = DropChecks {
        hausdorff: built.hausdorff,
        hausdorff_closure: built.hausdorff_closure,
        hausdorff_ok: built.hausdorff <= r + 1e-6,
        value_before: before,
        value_after: after,
        value_ok: after >= before - r - tau && after <= before - r + tau,
        slice_ya: Some(slice_ya),
        slice_ay: Some(slice_ay),
        map_singleton: map.len() == 1,
        map,
    };
    let certified = opts.profile.profile(a, &built.y, Mode::Min)?;
    Ok(DropResult {
        mode: Mode::Min,
        construction: Construction::CurvatureBound,
        radius: r,
        x1,
        a1,
        x_prime,
        y: built.y,
        constants: Some(ProofConstants {
            kappa,
            sigma,
            tau,
            n0,
            alpha,
            bound,
            target,
        }),
        checks,
        certified,
    })
}

/// Drop for `max(A, X)` in a space with convex metric, curvature bounded
/// below and geodesic extension.
pub fn regularize_max(a: &FiniteSet, x: &FiniteSet, r: f64, p: u64) -> Result<DropResult> {
    regularize_max_with(a, x, r, p, &DropOptions::default())
}

pub fn regularize_max_with(
    a: &FiniteSet,
    x: &FiniteSet,
    r: f64,
    p: u64,
    opts: &DropOptions,
) -> Result<DropResult> {
    check_inputs(a, x, r)?;
    let space = x.space();
    let caps = space.caps();
    space.require(caps.convex_metric, "needs a convex metric")?;
    space.require(caps.geodesic_extension, "needs geodesic extension")?;
    let kappa = caps
        .curvature_bounded_below
        .ok_or_else(|| Error::Capability("needs a lower curvature bound".into()))?;
    if p == 0 {
        return Err(Error::Precondition("p must be at least 1".into()));
    }
    // The farthest point of a convex hull from a point is one of its
    // vertices, so the sample optimum is exact.
    let lm = lambda_mu(a, x)?;
    let (a1, xi) = lm.argmax;
    let mu = lm.mu;
    if !(r < mu) {
        return Err(Error::Precondition(format!(
            "need 0 < r < mu_AX = {mu}, got r = {r}"
        )));
    }
    let target = 1.0 / p as f64;
    let (sigma, bound) = select_sigma(r.min(mu), target, |s| {
        Ok(f_kappa(kappa, r, mu + r - s, s)? + 2.0 * s)
    })?;
    let diam_x = diam(x);
    let n0 = shrink_index(r / 2.0, sigma / 2.0, diam_x);
    let tau = (sigma / 2.0).min(1.0 / n0 as f64);

    let x1 = x.point(xi).clone();
    let x_prime = space.extend_geodesic(a.point(a1), &x1, r)?;
    let built = build(x, &x1, &x_prime, opts.cone_m, true)?;
    let dx = x.closure_dist(&x_prime);
    let alpha = dx / (dx + diam_x);

    let after = lambda_mu(a, &built.y)?.mu;
    let sm = Mode::Max.slice_mode();
    let slice_ya = SliceCheck::new(&Slicer::new(&built.y, a, sm)?, tau / 2.0, sigma / 2.0);
    let slice_ay = SliceCheck::new(&Slicer::new(a, &built.y, sm)?, tau / 4.0, target);
    let map = farthest_map(a, &x_prime, opts.map_tol);
    let checks = DropChecks {
        hausdorff: built.hausdorff,
        hausdorff_closure: built.hausdorff_closure,
        hausdorff_ok: built.hausdorff <= r + 1e-6,
        value_before: mu,
        value_after: after,
        value_ok: after >= mu - tau / 4.0 + r,
        slice_ya: Some(slice_ya),
        slice_ay: Some(slice_ay),
        map_singleton: map.len() == 1,
        map,
    };
    let certified = opts.profile.profile(a, &built.y, Mode::Max)?;
    Ok(DropResult {
        mode: Mode::Max,
        construction: Construction::CurvatureBound,
        radius: r,
        x1,
        a1,
        x_prime,
        y: built.y,
        constants: Some(ProofConstants {
            kappa,
            sigma,
            tau,
            n0,
            alpha,
            bound,
            target,
        }),
        checks,
        certified,
    })
}

fn require_no_bifurcation(x: &FiniteSet, opts: &DropOptions) -> Result<()> {
    if !x.space().caps().bifurcation_free && !opts.allow_bifurcating {
        return Err(Error::Capability(
            "the space has bifurcating geodesics (set allow_bifurcating to run anyway)".into(),
        ));
    }
    Ok(())
}

/// Drop for `min(A, X)` with `A` compact in a space with convex metric and
/// no bifurcating geodesics: `x'` lies on the optimal segment at distance
/// `r` from `X`, and `A`'s nearest map at `x'` is the anchor alone.
pub fn regularize_min_compact(a: &FiniteSet, x: &FiniteSet, r: f64) -> Result<DropResult> {
    regularize_min_compact_with(a, x, r, &DropOptions::default())
}

pub fn regularize_min_compact_with(
    a: &FiniteSet,
    x: &FiniteSet,
    r: f64,
    opts: &DropOptions,
) -> Result<DropResult> {
    check_inputs(a, x, r)?;
    let space = x.space();
    space.require(space.caps().convex_metric, "needs a convex metric")?;
    require_no_bifurcation(x, opts)?;
    let (a1, x1, lambda) = nearest_anchor(a, x);
    if !(r < lambda) {
        return Err(Error::Precondition(format!(
            "need 0 < r < lambda_AX = {lambda}, got r = {r}"
        )));
    }
    let x_prime = space.geodesic_point(&x1, a.point(a1), r / lambda)?;
    let built = build(x, &x1, &x_prime, opts.cone_m, true)?;
    let before = lambda_mu(a, &built.xh)?.lambda;
    let after = lambda_mu(a, &built.y)?.lambda;
    let map = nearest_map(a, &x_prime, opts.map_tol);
    let checks = DropChecks {
        hausdorff: built.hausdorff,
        hausdorff_closure: built.hausdorff_closure,
        hausdorff_ok: built.hausdorff <= r + 1e-6,
        value_before: before,
        value_after: after,
        value_ok: (after - (before - r)).abs() <= 1e-9 * before.max(1.0),
        slice_ya: None,
        slice_ay: None,
        map_singleton: map.len() == 1,
        map,
    };
    let certified = opts.profile.profile(a, &built.y, Mode::Min)?;
    Ok(DropResult {
        mode: Mode::Min,
        construction: Construction::NoBifurcation,
        radius: r,
        x1,
        a1,
        x_prime,
        y: built.y,
        constants: None,
        checks,
        certified,
    })
}

/// Drop for `max(A, X)` with `A` and `X` compact in a space with geodesic
/// extension and no bifurcating geodesics: `Y = X ∪ {x'}` with `x'` on the
/// extension of the optimal segment beyond `X`. With
/// [`DropOptions::hull_union`] the hull of `X ∪ {x'}` is used instead.
pub fn regularize_max_compact(a: &FiniteSet, x: &FiniteSet, r: f64) -> Result<DropResult> {
    regularize_max_compact_with(a, x, r, &DropOptions::default())
}

pub fn regularize_max_compact_with(
    a: &FiniteSet,
    x: &FiniteSet,
    r: f64,
    opts: &DropOptions,
) -> Result<DropResult> {
    a.check_same_space(x)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Precondition(format!(
            "radius must be positive, got {r}"
        )));
    }
    let space = x.space();
    space.require(space.caps().geodesic_extension, "needs geodesic extension")?;
    require_no_bifurcation(x, opts)?;
    if opts.hull_union {
        space.require(space.caps().convex_metric, "hulls need a convex metric")?;
    }
    let lm = lambda_mu(a, x)?;
    let (a1, xi) = lm.argmax;
    let mu = lm.mu;
    if !(r < mu) {
        return Err(Error::Precondition(format!(
            "need 0 < r < mu_AX = {mu}, got r = {r}"
        )));
    }
    let x1 = x.point(xi).clone();
    let x_prime = space.extend_geodesic(a.point(a1), &x1, r)?;
    let built = build(x, &x1, &x_prime, opts.cone_m, opts.hull_union)?;
    let after = lambda_mu(a, &built.y)?.mu;
    let map = farthest_map(a, &x_prime, opts.map_tol);
    let checks = DropChecks {
        hausdorff: built.hausdorff,
        hausdorff_closure: built.hausdorff_closure,
        hausdorff_ok: built.hausdorff <= r + 1e-6,
        value_before: mu,
        value_after: after,
        value_ok: (after - (mu + r)).abs() <= 1e-9 * mu.max(1.0),
        slice_ya: None,
        slice_ay: None,
        map_singleton: map.len() == 1,
        map,
    };
    let certified = opts.profile.profile(a, &built.y, Mode::Max)?;
    Ok(DropResult {
        mode: Mode::Max,
        construction: if opts.hull_union {
            Construction::NoBifurcation
        } else {
            Construction::NoBifurcationUnion
        },
        radius: r,
        x1,
        a1,
        x_prime,
        y: built.y,
        constants: None,
        checks,
        certified,
    })
}

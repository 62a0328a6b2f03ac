//! Finite samples of bounded closed sets: hull iteration, Hausdorff
//! distance, nearest/farthest values, slices and the shrinking sets used by
//! the drop constructions.

mod sampling;

use std::collections::HashSet;
use std::sync::{Arc, OnceLock};

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

pub use sampling::{ball_rings, sample_ball, segment};

use crate::model_space::{ConvexRegion, Point, Space};
use crate::{par, Error, Result};

/// Largest number of points [`hull_iterate`] may produce by default.
pub const DEFAULT_HULL_CAP: usize = 20_000;

/// Parameters of the iterated geodesic hull: `k` rounds, `m` interior
/// samples on every pair per round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HullParams {
    pub k: usize,
    pub m: usize,
}

impl Default for HullParams {
    fn default() -> Self {
        HullParams { k: 2, m: 9 }
    }
}

/// A nonempty finite sample of a set in one space.
#[derive(Clone, Debug)]
pub struct FiniteSet {
    space: Space,
    points: Vec<Point>,
    convex: bool,
    hull: Option<HullParams>,
    region: OnceLock<Option<Arc<ConvexRegion>>>,
}

impl PartialEq for FiniteSet {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.points == other.points && self.convex == other.convex
    }
}

impl FiniteSet {
    /// Validates every point and drops duplicates (same cell of a 1e-12
    /// grid), keeping first occurrences.
    pub fn new(space: Space, points: Vec<Point>) -> Result<FiniteSet> {
        if points.is_empty() {
            return Err(Error::EmptySet);
        }
        for p in &points {
            space.validate(p)?;
        }
        Ok(FiniteSet {
            points: dedup(points, 1e-12),
            space,
            convex: false,
            hull: None,
            region: OnceLock::new(),
        })
    }

    /// Like [`FiniteSet::new`], marking the samples as standing for a convex set.
    pub fn convex(space: Space, points: Vec<Point>) -> Result<FiniteSet> {
        Ok(FiniteSet::new(space, points)?.with_convex(true))
    }

    pub fn with_convex(mut self, convex: bool) -> FiniteSet {
        self.convex = convex;
        self.region = OnceLock::new();
        self
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.points[i]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn hull_params(&self) -> Option<HullParams> {
        self.hull
    }

    /// Union with further points of the same space.
    pub fn with_points(&self, extra: &[Point]) -> Result<FiniteSet> {
        let mut pts = self.points.clone();
        pts.extend_from_slice(extra);
        FiniteSet::new(self.space.clone(), pts)
    }

    /// Exact hull of the samples when the set is convex and lives in a
    /// planar space.
    pub fn region(&self) -> Option<&ConvexRegion> {
        self.region
            .get_or_init(|| {
                if self.convex {
                    ConvexRegion::new(&self.space, &self.points).map(Arc::new)
                } else {
                    None
                }
            })
            .as_deref()
    }

    /// Distance from `z` to the set this sample stands for: the exact hull
    /// of the samples for convex planar sets, the nearest sample otherwise.
    pub fn closure_dist(&self, z: &Point) -> f64 {
        match self.region() {
            Some(r) => r.distance(&self.space, z),
            None => dist_to(z, self).0,
        }
    }

    /// Nearest point of the set this sample stands for, with its distance:
    /// the foot on the exact hull for convex planar sets, the nearest
    /// sample (lowest index among ties) otherwise.
    pub fn closure_nearest(&self, z: &Point) -> (f64, Point) {
        match self.region() {
            Some(r) => r.nearest(&self.space, z),
            None => {
                let (d, i) = dist_to(z, self);
                (d, self.points[i].clone())
            }
        }
    }

    pub(crate) fn check_same_space(&self, other: &FiniteSet) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

/// Serialized as `{"points": [..], "convex": bool, "hull": {"k", "m"} | null}`;
/// the space is serialized separately.
impl Serialize for FiniteSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("FiniteSet", 3)?;
        st.serialize_field("points", &self.points)?;
        st.serialize_field("convex", &self.convex)?;
        st.serialize_field("hull", &self.hull)?;
        st.end()
    }
}

/// Deserialized form of a [`FiniteSet`], completed by [`FiniteSetData::build`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteSetData {
    pub points: Vec<Point>,
    #[serde(default)]
    pub convex: bool,
    #[serde(default)]
    pub hull: Option<HullParams>,
}

impl FiniteSetData {
    pub fn build(self, space: &Space) -> Result<FiniteSet> {
        let mut out = FiniteSet::new(space.clone(), self.points)?.with_convex(self.convex);
        out.hull = self.hull;
        Ok(out)
    }
}

fn dedup(points: Vec<Point>, grid: f64) -> Vec<Point> {
    let mut seen = HashSet::with_capacity(points.len());
    points
        .into_iter()
        .filter(|p| seen.insert(p.grid_key(grid)))
        .collect()
}

/// Samples of `G_k(generators)`: `k` rounds of adding `m` evenly spaced
/// geodesic points on every pair of current points, deduplicated on a
/// 1e-9 grid. Errors if a round would exceed [`DEFAULT_HULL_CAP`] points.
pub fn hull_iterate(generators: &FiniteSet, k: usize, m: usize) -> Result<FiniteSet> {
    hull_iterate_capped(generators, k, m, DEFAULT_HULL_CAP)
}

pub fn hull_iterate_capped(
    generators: &FiniteSet,
    k: usize,
    m: usize,
    cap: usize,
) -> Result<FiniteSet> {
    let space = generators.space();
    space.require(
        space.caps().convex_metric,
        "hull iteration needs a convex metric",
    )?;
    if m == 0 {
        return Err(Error::Precondition("hull iteration needs m >= 1".into()));
    }
    let mut current = generators.points.clone();
    for _ in 0..k {
        let n = current.len();
        let would = n + n * (n - 1) / 2 * m;
        if would > cap {
            return Err(Error::HullTooLarge { would, cap });
        }
        let cur = &current;
        let rows: Vec<Result<Vec<Point>>> = par::map_range(n, |i| {
            let mut out = Vec::with_capacity((n - i - 1) * m);
            for j in i + 1..n {
                for s in 1..=m {
                    out.push(space.geodesic_point(&cur[i], &cur[j], s as f64 / (m + 1) as f64)?);
                }
            }
            Ok(out)
        });
        let mut next = current.clone();
        for row in rows {
            next.extend(row?);
        }
        current = dedup(next, 1e-9);
    }
    let mut out = FiniteSet::new(space.clone(), current)?.with_convex(true);
    out.hull = Some(HullParams { k, m });
    Ok(out)
}

/// Samples of the hull of a convex set `base` and an external point `apex`:
/// the base samples, the apex, and `m` evenly spaced points on each segment
/// from a base sample to the apex.
pub fn cone_hull(base: &FiniteSet, apex: &Point, m: usize) -> Result<FiniteSet> {
    let space = base.space();
    space.validate(apex)?;
    let rows: Vec<Result<Vec<Point>>> = par::map(base.points(), |x| {
        (1..=m)
            .map(|s| space.geodesic_point(x, apex, s as f64 / (m + 1) as f64))
            .collect()
    });
    let mut pts = base.points.clone();
    pts.push(apex.clone());
    for row in rows {
        pts.extend(row?);
    }
    let mut out = FiniteSet::new(space.clone(), pts)?.with_convex(base.convex);
    out.hull = Some(HullParams { k: 1, m });
    Ok(out)
}

/// Nearest sample of `x` to `z` with the lowest index among ties.
pub fn dist_to(z: &Point, x: &FiniteSet) -> (f64, usize) {
    let s = x.space();
    let mut best = (f64::INFINITY, 0);
    for (i, p) in x.points.iter().enumerate() {
        let d = s.d(z, p);
        if d < best.0 {
            best = (d, i);
        }
    }
    best
}

/// Farthest sample of `x` from `z` with the lowest index among ties.
pub fn remotal_to(z: &Point, x: &FiniteSet) -> (f64, usize) {
    let s = x.space();
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, p) in x.points.iter().enumerate() {
        let d = s.d(z, p);
        if d > best.0 {
            best = (d, i);
        }
    }
    best
}

/// Directed sup-inf distance from the samples of `x` to those of `y`.
pub fn directed_hausdorff(x: &FiniteSet, y: &FiniteSet) -> Result<f64> {
    x.check_same_space(y)?;
    Ok(par::max_range(x.len(), |i| dist_to(&x.points[i], y).0))
}

/// Pompeiu–Hausdorff distance between the samples.
pub fn hausdorff(x: &FiniteSet, y: &FiniteSet) -> Result<f64> {
    Ok(directed_hausdorff(x, y)?.max(directed_hausdorff(y, x)?))
}

/// Minimum and maximum distance over the sample product with the
/// lexicographically smallest index pairs attaining them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LambdaMu {
    pub lambda: f64,
    pub mu: f64,
    pub argmin: (usize, usize),
    pub argmax: (usize, usize),
}

pub fn lambda_mu(x: &FiniteSet, y: &FiniteSet) -> Result<LambdaMu> {
    x.check_same_space(y)?;
    let rows = par::map(x.points(), |p| (dist_to(p, y), remotal_to(p, y)));
    let mut out = LambdaMu {
        lambda: f64::INFINITY,
        mu: f64::NEG_INFINITY,
        argmin: (0, 0),
        argmax: (0, 0),
    };
    for (i, ((dmin, jmin), (dmax, jmax))) in rows.into_iter().enumerate() {
        if dmin < out.lambda {
            out.lambda = dmin;
            out.argmin = (i, jmin);
        }
        if dmax > out.mu {
            out.mu = dmax;
            out.argmax = (i, jmax);
        }
    }
    Ok(out)
}

/// Which slice of a set is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SliceMode {
    /// Points whose distance to the partner is within `sigma` of the minimum.
    LNear,
    /// Points whose farthest distance to the partner is within `sigma` of the maximum.
    MFar,
}

/// The members of `base` in the slice of width `sigma` toward `partner`.
#[derive(Clone, Debug)]
pub struct SliceSet<'a> {
    pub base: &'a FiniteSet,
    pub partner: &'a FiniteSet,
    pub sigma: f64,
    pub mode: SliceMode,
    pub members: Vec<usize>,
}

impl SliceSet<'_> {
    pub fn diam(&self) -> f64 {
        diam_indexed(self.base, &self.members)
    }
}

/// Per-point distances of one set to another, from which slices of any
/// width can be read without recomputing distances.
#[derive(Clone, Debug)]
pub struct Slicer<'a> {
    base: &'a FiniteSet,
    partner: &'a FiniteSet,
    mode: SliceMode,
    values: Vec<f64>,
    extreme: f64,
}

impl<'a> Slicer<'a> {
    pub fn new(base: &'a FiniteSet, partner: &'a FiniteSet, mode: SliceMode) -> Result<Slicer<'a>> {
        base.check_same_space(partner)?;
        let values = par::map(base.points(), |p| match mode {
            SliceMode::LNear => dist_to(p, partner).0,
            SliceMode::MFar => remotal_to(p, partner).0,
        });
        let extreme = match mode {
            SliceMode::LNear => values.iter().copied().fold(f64::INFINITY, f64::min),
            SliceMode::MFar => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        };
        Ok(Slicer {
            base,
            partner,
            mode,
            values,
            extreme,
        })
    }

    /// `lambda` (near mode) or `mu` (far mode) over the samples.
    pub fn extreme(&self) -> f64 {
        self.extreme
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn members(&self, sigma: f64) -> Vec<usize> {
        (0..self.values.len())
            .filter(|&i| match self.mode {
                SliceMode::LNear => self.values[i] <= self.extreme + sigma,
                SliceMode::MFar => self.values[i] >= self.extreme - sigma,
            })
            .collect()
    }

    pub fn slice(&self, sigma: f64) -> SliceSet<'a> {
        SliceSet {
            base: self.base,
            partner: self.partner,
            sigma,
            mode: self.mode,
            members: self.members(sigma),
        }
    }

    pub fn diam(&self, sigma: f64) -> f64 {
        diam_indexed(self.base, &self.members(sigma))
    }
}

/// `L_XY(sigma)` or `M_XY(sigma)` over the samples.
pub fn slice<'a>(
    x: &'a FiniteSet,
    y: &'a FiniteSet,
    sigma: f64,
    mode: SliceMode,
) -> Result<SliceSet<'a>> {
    if !(sigma >= 0.0) {
        return Err(Error::Precondition(
            "slice width must be nonnegative".into(),
        ));
    }
    Ok(Slicer::new(x, y, mode)?.slice(sigma))
}

/// Largest pairwise distance between samples.
pub fn diam(x: &FiniteSet) -> f64 {
    diam_of(x.space(), x.points())
}

/// Largest pairwise distance among the samples with the given indices.
pub fn diam_indexed(x: &FiniteSet, idx: &[usize]) -> f64 {
    if idx.len() == x.len() {
        return diam(x);
    }
    let pts: Vec<Point> = idx.iter().map(|&i| x.points[i].clone()).collect();
    diam_of(x.space(), &pts)
}

/// Largest pairwise distance in a list of points. In the planar spaces the
/// maximum is attained at vertices of the chart hull, so large inputs are
/// reduced to those first.
pub fn diam_of(space: &Space, pts: &[Point]) -> f64 {
    if pts.len() > 64 && space.is_planar() {
        if let Some(r) = ConvexRegion::new(space, pts) {
            return brute_diam(space, r.vertices());
        }
    }
    brute_diam(space, pts)
}

fn brute_diam(space: &Space, pts: &[Point]) -> f64 {
    par::max_range(pts.len(), |i| {
        pts[i + 1..]
            .iter()
            .map(|q| space.d(&pts[i], q))
            .fold(0.0, f64::max)
    })
}

/// The shrinking sets `C_n` of co(X ∪ {x'}): hull samples whose distance to
/// X is at least `dist(x', X) - 1/n`. Distances to X are taken to the exact
/// hull of X's samples when it is available.
#[derive(Clone, Debug)]
pub struct CnFamily {
    hull: FiniteSet,
    apex_dist: f64,
    margins: Vec<f64>,
}

impl CnFamily {
    /// Samples co(X ∪ {x'}) with `m` points per segment toward `x'`.
    pub fn new(x: &FiniteSet, apex: &Point, m: usize) -> Result<CnFamily> {
        let apex_dist = x.closure_dist(apex);
        if !(apex_dist > 0.0) {
            return Err(Error::Precondition("x' must lie outside X".into()));
        }
        let hull = cone_hull(x, apex, m)?;
        let margins = par::map(hull.points(), |y| x.closure_dist(y));
        Ok(CnFamily {
            hull,
            apex_dist,
            margins,
        })
    }

    pub fn hull(&self) -> &FiniteSet {
        &self.hull
    }

    /// `dist(x', X)`.
    pub fn apex_dist(&self) -> f64 {
        self.apex_dist
    }

    pub fn members(&self, n: u64) -> Result<Vec<usize>> {
        let cut = self.apex_dist - 1.0 / n as f64;
        if !(cut > 0.0) {
            return Err(Error::Precondition(format!(
                "need dist(x', X) > 1/n (n = {n})"
            )));
        }
        Ok((0..self.margins.len())
            .filter(|&i| self.margins[i] >= cut - 1e-12)
            .collect())
    }

    pub fn set(&self, n: u64) -> Result<FiniteSet> {
        let pts = self
            .members(n)?
            .into_iter()
            .map(|i| self.hull.points[i].clone())
            .collect();
        FiniteSet::new(self.hull.space().clone(), pts)
    }

    pub fn diam(&self, n: u64) -> Result<f64> {
        Ok(diam_indexed(&self.hull, &self.members(n)?))
    }
}

/// `C_n` for convex `x`, sampled with `m = 9` points per segment.
pub fn c_n_set(x: &FiniteSet, apex: &Point, n: u64) -> Result<FiniteSet> {
    CnFamily::new(x, apex, 9)?.set(n)
}

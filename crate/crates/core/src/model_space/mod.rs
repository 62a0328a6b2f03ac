//! Points, distances and geodesics in Euclidean space, the hyperbolic and
//! spherical model spaces of constant curvature, and finite metric trees.

mod chart;
mod comparison;
pub(crate) mod hyperbolic;
mod serial;
mod spherical;
mod tree;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use chart::ConvexRegion;
pub use comparison::{
    cat_defect, cn_defect, comparison_triangle, convexity_defect, ComparisonTriangle, EdgePoint,
};
pub use serial::SpaceSpec;
pub use tree::{Edge, MetricTree, TreePoint};

use crate::{Error, Result};

/// Default absolute tolerance used by invariant checks.
pub const TOL: f64 = 1e-9;

static CLAMP_EVENTS: AtomicU64 = AtomicU64::new(0);

/// Number of times a numerically out-of-range quantity was clamped by more
/// than 1e-12 since process start.
pub fn clamp_events() -> u64 {
    CLAMP_EVENTS.load(Ordering::Relaxed)
}

pub(crate) fn note_clamp(what: &str, excess: f64) {
    if excess > 1e-12 {
        CLAMP_EVENTS.fetch_add(1, Ordering::Relaxed);
        log::debug!("clamped {what} by {excess:e}");
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Geometry {
    Euclidean {
        dim: usize,
    },
    /// Hyperboloid model of curvature `kappa < 0`.
    Hyperbolic {
        kappa: f64,
        dim: usize,
    },
    /// Round sphere of curvature `kappa > 0`.
    Spherical {
        kappa: f64,
        dim: usize,
    },
    Tree(Arc<MetricTree>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Capabilities {
    pub convex_metric: bool,
    pub cat0: bool,
    /// Some `kappa < 0` for which the space has curvature bounded below.
    pub curvature_bounded_below: Option<f64>,
    pub geodesic_extension: bool,
    pub bifurcation_free: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Space {
    geometry: Geometry,
    caps: Capabilities,
}

/// Serialized as a coordinate array or as `{"edge": .., "offset": ..}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    /// Ambient coordinates of a model-space point.
    Coords(Vec<f64>),
    Tree(TreePoint),
}

impl Point {
    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Point::Coords(c) => Some(c),
            Point::Tree(_) => None,
        }
    }

    pub(crate) fn c(&self) -> &[f64] {
        match self {
            Point::Coords(c) => c,
            Point::Tree(_) => panic!("tree point used as coordinates"),
        }
    }

    fn t(&self) -> &TreePoint {
        match self {
            Point::Tree(p) => p,
            Point::Coords(_) => panic!("coordinate point used as tree point"),
        }
    }

    /// Integer key of the cell containing this point on a grid of spacing `grid`.
    pub(crate) fn grid_key(&self, grid: f64) -> Vec<i64> {
        match self {
            Point::Coords(c) => c.iter().map(|x| (x / grid).round() as i64).collect(),
            Point::Tree(p) => vec![p.edge as i64, (p.offset / grid).round() as i64],
        }
    }
}

impl From<Vec<f64>> for Point {
    fn from(c: Vec<f64>) -> Self {
        Point::Coords(c)
    }
}

impl Space {
    /// Validates parameters and derives capability flags.
    pub fn new(geometry: Geometry) -> Result<Space> {
        let caps = match &geometry {
            Geometry::Euclidean { dim } => {
                if *dim == 0 {
                    return Err(Error::Precondition("dimension must be positive".into()));
                }
                Capabilities {
                    convex_metric: true,
                    cat0: true,
                    curvature_bounded_below: Some(-1.0),
                    geodesic_extension: true,
                    bifurcation_free: true,
                }
            }
            Geometry::Hyperbolic { kappa, dim } => {
                if !(*kappa < 0.0 && kappa.is_finite()) || *dim == 0 {
                    return Err(Error::Precondition(
                        "hyperbolic space needs kappa < 0 and a positive dimension".into(),
                    ));
                }
                Capabilities {
                    convex_metric: true,
                    cat0: true,
                    curvature_bounded_below: Some(*kappa),
                    geodesic_extension: true,
                    bifurcation_free: true,
                }
            }
            Geometry::Spherical { kappa, dim } => {
                if !(*kappa > 0.0 && kappa.is_finite()) || *dim == 0 {
                    return Err(Error::Precondition(
                        "spherical space needs kappa > 0 and a positive dimension".into(),
                    ));
                }
                Capabilities {
                    convex_metric: false,
                    cat0: false,
                    curvature_bounded_below: None,
                    geodesic_extension: true,
                    bifurcation_free: true,
                }
            }
            Geometry::Tree(t) => Capabilities {
                convex_metric: true,
                cat0: true,
                curvature_bounded_below: None,
                geodesic_extension: false,
                bifurcation_free: t.is_bifurcation_free(),
            },
        };
        Ok(Space { geometry, caps })
    }

    /// Euclidean space of dimension `dim`.
    pub fn euclidean(dim: usize) -> Space {
        Space::new(Geometry::Euclidean { dim }).expect("positive dimension")
    }

    /// Hyperbolic plane of curvature `kappa`. Panics unless `kappa < 0`.
    pub fn hyperbolic(kappa: f64) -> Space {
        Space::new(Geometry::Hyperbolic { kappa, dim: 2 }).expect("kappa < 0")
    }

    /// Sphere of curvature `kappa`. Panics unless `kappa > 0`.
    pub fn spherical(kappa: f64) -> Space {
        Space::new(Geometry::Spherical { kappa, dim: 2 }).expect("kappa > 0")
    }

    pub fn tree(tree: MetricTree) -> Space {
        Space::new(Geometry::Tree(Arc::new(tree))).expect("trees are always valid spaces")
    }

    /// The model plane of curvature `kappa`: sphere, Euclidean plane or
    /// hyperbolic plane.
    pub fn model_plane(kappa: f64) -> Space {
        if kappa < 0.0 {
            Space::hyperbolic(kappa)
        } else if kappa > 0.0 {
            Space::spherical(kappa)
        } else {
            Space::euclidean(2)
        }
    }

    /// Replaces the advertised lower curvature bound of a Euclidean space
    /// (any negative value is valid there).
    pub fn with_lower_curvature(mut self, kappa: f64) -> Result<Space> {
        match self.geometry {
            Geometry::Euclidean { .. } if kappa < 0.0 => {
                self.caps.curvature_bounded_below = Some(kappa);
                Ok(self)
            }
            _ => Err(Error::Precondition(
                "only Euclidean spaces accept an arbitrary negative lower curvature bound".into(),
            )),
        }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn caps(&self) -> Capabilities {
        self.caps
    }

    /// Curvature of a model space (0 for Euclidean, `None` for trees).
    pub fn curvature(&self) -> Option<f64> {
        match self.geometry {
            Geometry::Euclidean { .. } => Some(0.0),
            Geometry::Hyperbolic { kappa, .. } | Geometry::Spherical { kappa, .. } => Some(kappa),
            Geometry::Tree(_) => None,
        }
    }

    /// Intrinsic dimension (1 for trees).
    pub fn dim(&self) -> usize {
        match self.geometry {
            Geometry::Euclidean { dim }
            | Geometry::Hyperbolic { dim, .. }
            | Geometry::Spherical { dim, .. } => dim,
            Geometry::Tree(_) => 1,
        }
    }

    fn ambient_len(&self) -> usize {
        match self.geometry {
            Geometry::Euclidean { dim } => dim,
            Geometry::Hyperbolic { dim, .. } | Geometry::Spherical { dim, .. } => dim + 1,
            Geometry::Tree(_) => 2,
        }
    }

    /// Euclidean plane or hyperbolic plane: the spaces with a planar chart
    /// in which geodesics are straight lines.
    pub fn is_planar(&self) -> bool {
        matches!(
            self.geometry,
            Geometry::Euclidean { dim: 2 } | Geometry::Hyperbolic { dim: 2, .. }
        )
    }

    pub fn as_tree(&self) -> Option<&MetricTree> {
        match &self.geometry {
            Geometry::Tree(t) => Some(t),
            _ => None,
        }
    }

    pub(crate) fn require(&self, ok: bool, what: &str) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::Capability(what.into()))
        }
    }

    fn sqrt_abs_kappa(&self) -> f64 {
        match self.geometry {
            Geometry::Hyperbolic { kappa, .. } | Geometry::Spherical { kappa, .. } => {
                kappa.abs().sqrt()
            }
            _ => 1.0,
        }
    }

    /// Builds a model-space point from coordinates. Hyperbolic points may be
    /// given by their spatial coordinates alone, in which case the time
    /// coordinate is filled in.
    pub fn point(&self, coords: Vec<f64>) -> Result<Point> {
        if let Geometry::Hyperbolic { dim, .. } = self.geometry {
            if coords.len() == dim {
                let mut full = coords;
                full.push(0.0);
                return Ok(Point::Coords(hyperbolic::lift(self.sqrt_abs_kappa(), full)));
            }
        }
        let p = Point::Coords(coords);
        self.validate(&p)?;
        Ok(p)
    }

    /// Builds a tree point.
    pub fn tree_point(&self, edge: usize, offset: f64) -> Result<Point> {
        let p = Point::Tree(TreePoint { edge, offset });
        self.validate(&p)?;
        Ok(p)
    }

    /// Checks that `p` is a valid point of this space.
    pub fn validate(&self, p: &Point) -> Result<()> {
        match (&self.geometry, p) {
            (Geometry::Tree(t), Point::Tree(tp)) => t.validate(tp),
            (Geometry::Tree(_), Point::Coords(_)) | (_, Point::Tree(_)) => {
                Err(Error::SpaceMismatch)
            }
            (g, Point::Coords(c)) => {
                if c.len() != self.ambient_len() {
                    return Err(Error::InvalidPoint(format!(
                        "expected {} coordinates, got {}",
                        self.ambient_len(),
                        c.len()
                    )));
                }
                if c.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidPoint("non-finite coordinate".into()));
                }
                match g {
                    Geometry::Hyperbolic { kappa, .. } => {
                        let q = hyperbolic::minkowski(c, c);
                        let scale = c[c.len() - 1].powi(2).max(1.0);
                        if (q + 1.0 / kappa.abs()).abs() > TOL * scale || c[c.len() - 1] <= 0.0 {
                            return Err(Error::InvalidPoint(format!(
                                "not on the upper hyperboloid sheet (<x,x> = {q})"
                            )));
                        }
                    }
                    Geometry::Spherical { kappa, .. } => {
                        let q: f64 = c.iter().map(|x| x * x).sum();
                        if (q - 1.0 / kappa).abs() > TOL {
                            return Err(Error::InvalidPoint(format!(
                                "not on the sphere (|x|^2 = {q})"
                            )));
                        }
                    }
                    _ => {}
                }
                Ok(())
            }
        }
    }

    /// Canonical basepoint: origin, hyperboloid vertex, north pole, or the
    /// start of edge 0.
    pub fn basepoint(&self) -> Point {
        let n = self.ambient_len();
        match &self.geometry {
            Geometry::Euclidean { .. } => Point::Coords(vec![0.0; n]),
            Geometry::Hyperbolic { .. } | Geometry::Spherical { .. } => {
                let mut c = vec![0.0; n];
                c[n - 1] = 1.0 / self.sqrt_abs_kappa();
                Point::Coords(c)
            }
            Geometry::Tree(_) => Point::Tree(TreePoint {
                edge: 0,
                offset: 0.0,
            }),
        }
    }

    /// Distance between points already validated for this space.
    pub fn d(&self, a: &Point, b: &Point) -> f64 {
        match &self.geometry {
            Geometry::Euclidean { .. } => euclid_dist(a.c(), b.c()),
            Geometry::Hyperbolic { .. } => {
                hyperbolic::distance(self.sqrt_abs_kappa(), a.c(), b.c())
            }
            Geometry::Spherical { .. } => spherical::distance(self.sqrt_abs_kappa(), a.c(), b.c()),
            Geometry::Tree(t) => t.distance(a.t(), b.t()),
        }
    }

    /// Checked distance.
    pub fn distance(&self, a: &Point, b: &Point) -> Result<f64> {
        self.validate(a)?;
        self.validate(b)?;
        Ok(self.d(a, b))
    }

    /// The point `(1-t)a + tb` on the geodesic from `a` to `b`.
    pub fn geodesic_point(&self, a: &Point, b: &Point, t: f64) -> Result<Point> {
        if t == 0.0 {
            return Ok(a.clone());
        }
        if t == 1.0 {
            return Ok(b.clone());
        }
        let k = self.sqrt_abs_kappa();
        Ok(match &self.geometry {
            Geometry::Euclidean { .. } => Point::Coords(
                a.c()
                    .iter()
                    .zip(b.c())
                    .map(|(x, y)| x + t * (y - x))
                    .collect(),
            ),
            Geometry::Hyperbolic { .. } => Point::Coords(hyperbolic::geodesic(k, a.c(), b.c(), t)),
            Geometry::Spherical { .. } => Point::Coords(spherical::geodesic(k, a.c(), b.c(), t)?),
            Geometry::Tree(tr) => Point::Tree(tr.geodesic_point(a.t(), b.t(), t)),
        })
    }

    /// The point at distance `s` beyond `b` on the geodesic from `a` through `b`.
    pub fn extend_geodesic(&self, a: &Point, b: &Point, s: f64) -> Result<Point> {
        if s < 0.0 {
            return Err(Error::Precondition(
                "extension length must be nonnegative".into(),
            ));
        }
        if s == 0.0 {
            return Ok(b.clone());
        }
        let k = self.sqrt_abs_kappa();
        let degenerate = || Error::Precondition("extension needs distinct points".into());
        match &self.geometry {
            Geometry::Euclidean { .. } => {
                let d = euclid_dist(a.c(), b.c());
                if d == 0.0 {
                    return Err(degenerate());
                }
                Ok(Point::Coords(
                    a.c()
                        .iter()
                        .zip(b.c())
                        .map(|(x, y)| y + (s / d) * (y - x))
                        .collect(),
                ))
            }
            Geometry::Hyperbolic { .. } => hyperbolic::extend(k, a.c(), b.c(), s)
                .map(Point::Coords)
                .ok_or_else(degenerate),
            Geometry::Spherical { .. } => spherical::extend(k, a.c(), b.c(), s)?
                .map(Point::Coords)
                .ok_or_else(degenerate),
            Geometry::Tree(t) => t.extend(a.t(), b.t(), s).map(Point::Tree),
        }
    }

    /// Orthonormal basis of the tangent space at `x`, in ambient coordinates.
    pub fn tangent_frame(&self, x: &Point) -> Result<Vec<Vec<f64>>> {
        let k = self.sqrt_abs_kappa();
        match &self.geometry {
            Geometry::Euclidean { dim } => Ok((0..*dim)
                .map(|i| {
                    let mut e = vec![0.0; *dim];
                    e[i] = 1.0;
                    e
                })
                .collect()),
            Geometry::Hyperbolic { .. } => Ok(hyperbolic::tangent_frame(k, x.c())),
            Geometry::Spherical { .. } => Ok(spherical::tangent_frame(k, x.c())),
            Geometry::Tree(_) => Err(Error::Unsupported("trees have no tangent frames".into())),
        }
    }

    /// Exponential map: follows the geodesic from `x` with initial velocity
    /// `w` (an ambient tangent vector) for unit time.
    pub fn exp(&self, x: &Point, w: &[f64]) -> Result<Point> {
        let k = self.sqrt_abs_kappa();
        if let Point::Coords(c) = x {
            if c.len() != w.len() {
                return Err(Error::InvalidPoint(format!(
                    "tangent vector has {} coordinates, expected {}",
                    w.len(),
                    c.len()
                )));
            }
        }
        match &self.geometry {
            Geometry::Euclidean { .. } => Ok(Point::Coords(
                x.c().iter().zip(w).map(|(a, b)| a + b).collect(),
            )),
            Geometry::Hyperbolic { .. } => Ok(Point::Coords(hyperbolic::exp(k, x.c(), w))),
            Geometry::Spherical { .. } => Ok(Point::Coords(spherical::exp(k, x.c(), w))),
            Geometry::Tree(_) => Err(Error::Unsupported("trees have no exponential map".into())),
        }
    }

    /// Point reached from `x` by moving distance `len` in the direction at
    /// angle `theta` within the plane of the first two frame vectors.
    pub fn polar_offset(
        &self,
        x: &Point,
        frame: &[Vec<f64>],
        len: f64,
        theta: f64,
    ) -> Result<Point> {
        let (c, s) = (theta.cos(), theta.sin());
        self.polar_offset_cs(x, frame, len, c, s)
    }

    pub(crate) fn polar_offset_cs(
        &self,
        x: &Point,
        frame: &[Vec<f64>],
        len: f64,
        c: f64,
        s: f64,
    ) -> Result<Point> {
        if frame.len() < 2 {
            return Err(Error::Unsupported("polar offsets need a 2-plane".into()));
        }
        let w: Vec<f64> = frame[0]
            .iter()
            .zip(&frame[1])
            .map(|(e1, e2)| len * (c * e1 + s * e2))
            .collect();
        self.exp(x, &w)
    }

    /// Unit tangent at `x` pointing toward `y`.
    pub fn direction(&self, x: &Point, y: &Point) -> Result<Vec<f64>> {
        let k = self.sqrt_abs_kappa();
        let dir = match &self.geometry {
            Geometry::Euclidean { .. } => {
                let d = euclid_dist(x.c(), y.c());
                (d > 0.0).then(|| x.c().iter().zip(y.c()).map(|(a, b)| (b - a) / d).collect())
            }
            Geometry::Hyperbolic { .. } => hyperbolic::direction(k, x.c(), y.c()),
            Geometry::Spherical { .. } => spherical::direction(k, x.c(), y.c()),
            Geometry::Tree(_) => {
                return Err(Error::Unsupported("trees have no tangent vectors".into()))
            }
        };
        dir.ok_or_else(|| Error::Precondition("direction between coincident points".into()))
    }

    /// Inner product of tangent vectors (Minkowski form in hyperbolic space).
    pub fn tangent_dot(&self, u: &[f64], v: &[f64]) -> f64 {
        match self.geometry {
            Geometry::Hyperbolic { .. } => hyperbolic::minkowski(u, v),
            _ => u.iter().zip(v).map(|(a, b)| a * b).sum(),
        }
    }

    /// Coordinates of `p` in a planar chart where geodesics are straight
    /// lines (identity for the Euclidean plane, Klein chart for H^2).
    pub fn chart(&self, p: &Point) -> Option<[f64; 2]> {
        match self.geometry {
            Geometry::Euclidean { dim: 2 } => Some([p.c()[0], p.c()[1]]),
            Geometry::Hyperbolic { dim: 2, .. } => {
                let k = hyperbolic::klein(p.c());
                Some([k[0], k[1]])
            }
            _ => None,
        }
    }

    /// Distance from `p` to the geodesic segment `[a, b]`.
    pub fn segment_distance(&self, p: &Point, a: &Point, b: &Point) -> Result<f64> {
        Ok(self.segment_nearest(p, a, b)?.0)
    }

    /// Nearest point of the geodesic segment `[a, b]` to `p`, with its
    /// distance. Endpoints are returned exactly when they are nearest.
    pub fn segment_nearest(&self, p: &Point, a: &Point, b: &Point) -> Result<(f64, Point)> {
        match &self.geometry {
            Geometry::Euclidean { .. } => {
                let (pc, ac, bc) = (p.c(), a.c(), b.c());
                let ab: Vec<f64> = ac.iter().zip(bc).map(|(x, y)| y - x).collect();
                let len2: f64 = ab.iter().map(|x| x * x).sum();
                let t = if len2 == 0.0 {
                    0.0
                } else {
                    let dot: f64 = pc
                        .iter()
                        .zip(ac)
                        .zip(&ab)
                        .map(|((p, a), v)| (p - a) * v)
                        .sum();
                    (dot / len2).clamp(0.0, 1.0)
                };
                let foot = if t == 0.0 {
                    a.clone()
                } else if t == 1.0 {
                    b.clone()
                } else {
                    Point::Coords(ac.iter().zip(&ab).map(|(a, v)| a + t * v).collect())
                };
                Ok((euclid_dist(pc, foot.c()), foot))
            }
            Geometry::Hyperbolic { .. } => {
                let (d, foot) =
                    hyperbolic::segment_nearest(self.sqrt_abs_kappa(), p.c(), a.c(), b.c());
                Ok((d, Point::Coords(foot)))
            }
            _ => {
                // Golden-section search; distance to a point is convex along
                // geodesics in the spaces this is used for.
                let f = |t: f64| -> Result<(f64, Point)> {
                    let z = self.geodesic_point(a, b, t)?;
                    Ok((self.d(p, &z), z))
                };
                let g = 0.5 * (5f64.sqrt() - 1.0);
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..80 {
                    let m1 = hi - g * (hi - lo);
                    let m2 = lo + g * (hi - lo);
                    if f(m1)?.0 <= f(m2)?.0 {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                }
                let mut best = f(0.5 * (lo + hi))?;
                for t in [0.0, 1.0] {
                    let e = f(t)?;
                    if e.0 < best.0 {
                        best = e;
                    }
                }
                Ok(best)
            }
        }
    }

    /// Busemann function of the geodesic ray starting at `a` through `b`,
    /// normalised to vanish at `a`. Decreases at unit rate along the ray.
    pub fn busemann(&self, x: &Point, a: &Point, b: &Point) -> Result<f64> {
        match &self.geometry {
            Geometry::Euclidean { .. } => {
                let v = self.direction(a, b)?;
                Ok(-x
                    .c()
                    .iter()
                    .zip(a.c())
                    .zip(&v)
                    .map(|((x, a), v)| (x - a) * v)
                    .sum::<f64>())
            }
            Geometry::Hyperbolic { .. } => {
                hyperbolic::busemann(self.sqrt_abs_kappa(), x.c(), a.c(), b.c())
                    .ok_or_else(|| Error::Precondition("ray needs distinct points".into()))
            }
            _ => Err(Error::Unsupported(
                "Busemann functions are implemented for Euclidean and hyperbolic spaces".into(),
            )),
        }
    }
}

pub(crate) fn euclid_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

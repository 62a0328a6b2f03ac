//! Comparison triangles in the model planes and the curvature inequality
//! defects built on them.

use super::{Point, Space, TOL};
use crate::{Error, Result};

/// A triangle in the model plane of curvature `kappa` with prescribed sides.
#[derive(Clone, Debug)]
pub struct ComparisonTriangle {
    pub kappa: f64,
    pub space: Space,
    pub vertices: [Point; 3],
    /// Side lengths `(l12, l13, l23)`.
    pub sides: [f64; 3],
}

/// Builds the triangle with side lengths `l12 = d(v1,v2)`, `l13`, `l23` in
/// the model plane of curvature `kappa`: `v1` at the basepoint, `v2` along
/// the first frame axis, `v3` in the upper half.
pub fn comparison_triangle(kappa: f64, l12: f64, l13: f64, l23: f64) -> Result<ComparisonTriangle> {
    let sides = [l12, l13, l23];
    if sides.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(Error::Infeasible(
            "side lengths must be finite and nonnegative".into(),
        ));
    }
    let scale = l12.max(l13).max(l23).max(1.0);
    if l23 > l12 + l13 + TOL * scale
        || l12 > l13 + l23 + TOL * scale
        || l13 > l12 + l23 + TOL * scale
    {
        return Err(Error::Infeasible(format!(
            "sides {l12}, {l13}, {l23} violate the triangle inequality"
        )));
    }
    if kappa > 0.0 && l12 + l13 + l23 >= 2.0 * std::f64::consts::PI / kappa.sqrt() {
        return Err(Error::Infeasible(
            "perimeter too large for the sphere".into(),
        ));
    }
    let space = Space::model_plane(kappa);
    let v1 = space.basepoint();
    let frame = space.tangent_frame(&v1)?;
    let gamma = vertex_angle(kappa, l12, l13, l23);
    let v2 = space.polar_offset_cs(&v1, &frame, l12, 1.0, 0.0)?;
    let v3 = space.polar_offset(&v1, &frame, l13, gamma)?;
    Ok(ComparisonTriangle {
        kappa,
        space,
        vertices: [v1, v2, v3],
        sides,
    })
}

/// Angle at the vertex joining sides `a` and `b` opposite side `c`, from the
/// half-angle form of the law of cosines (accurate for thin triangles).
fn vertex_angle(kappa: f64, a: f64, b: f64, c: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let k = kappa.abs().sqrt();
    let s = |x: f64| {
        if kappa < 0.0 {
            (k * x).sinh()
        } else if kappa > 0.0 {
            (k * x).sin()
        } else {
            x
        }
    };
    let p = (c + a - b).max(0.0) / 2.0;
    let q = (c - a + b).max(0.0) / 2.0;
    let sin2 = s(p) * s(q) / (s(a) * s(b));
    if !(0.0..=1.0).contains(&sin2) {
        super::note_clamp("half-angle sine", (sin2 - sin2.clamp(0.0, 1.0)).abs());
    }
    2.0 * sin2.clamp(0.0, 1.0).sqrt().asin()
}

/// A point on a triangle side: `(1-t) v_from + t v_to`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgePoint {
    pub from: usize,
    pub to: usize,
    pub t: f64,
}

impl EdgePoint {
    pub fn new(from: usize, to: usize, t: f64) -> EdgePoint {
        EdgePoint { from, to, t }
    }

    fn check(&self) -> Result<()> {
        if self.from > 2 || self.to > 2 || self.from == self.to || !(0.0..=1.0).contains(&self.t) {
            return Err(Error::Precondition(format!("invalid edge point {self:?}")));
        }
        Ok(())
    }
}

/// `d(x̄, ȳ) - d(x, y)` for points `x`, `y` on the sides of the triangle
/// `tri` and their counterparts on the comparison triangle in the model
/// plane of curvature `kappa`. Nonnegative in CAT(kappa) spaces,
/// nonpositive in spaces of curvature bounded below by `kappa`.
pub fn cat_defect(
    space: &Space,
    tri: &[Point; 3],
    x: EdgePoint,
    y: EdgePoint,
    kappa: f64,
) -> Result<f64> {
    x.check()?;
    y.check()?;
    for p in tri {
        space.validate(p)?;
    }
    let l12 = space.d(&tri[0], &tri[1]);
    let l13 = space.d(&tri[0], &tri[2]);
    let l23 = space.d(&tri[1], &tri[2]);
    if l12.min(l13).min(l23) <= TOL {
        return Err(Error::Precondition(
            "triangle vertices must be pairwise distinct".into(),
        ));
    }
    let cmp = comparison_triangle(kappa, l12, l13, l23)?;
    let on = |s: &Space, v: &[Point; 3], e: EdgePoint| s.geodesic_point(&v[e.from], &v[e.to], e.t);
    let (px, py) = (on(space, tri, x)?, on(space, tri, y)?);
    let (qx, qy) = (
        on(&cmp.space, &cmp.vertices, x)?,
        on(&cmp.space, &cmp.vertices, y)?,
    );
    Ok(cmp.space.d(&qx, &qy) - space.d(&px, &py))
}

/// Defect of the Bruhat–Tits CN inequality at `m = (1-t) y1 + t y2`:
/// `(1-t) d(x,y1)^2 + t d(x,y2)^2 - t(1-t) d(y1,y2)^2 - d(x,m)^2`.
pub fn cn_defect(space: &Space, x: &Point, y1: &Point, y2: &Point, t: f64) -> Result<f64> {
    for p in [x, y1, y2] {
        space.validate(p)?;
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let m = space.geodesic_point(y1, y2, t)?;
    let (a, b, c, dm) = (
        space.d(x, y1),
        space.d(x, y2),
        space.d(y1, y2),
        space.d(x, &m),
    );
    Ok((1.0 - t) * a * a + t * b * b - t * (1.0 - t) * c * c - dm * dm)
}

/// Defect of the convex-metric inequality for two geodesics `c1 = [p0, p1]`
/// and `c2 = [q0, q1]`:
/// `(1-t) d(p0,q0) + t d(p1,q1) - d(c1(t), c2(t))`.
pub fn convexity_defect(
    space: &Space,
    c1: (&Point, &Point),
    c2: (&Point, &Point),
    t: f64,
) -> Result<f64> {
    for p in [c1.0, c1.1, c2.0, c2.1] {
        space.validate(p)?;
    }
    let x = space.geodesic_point(c1.0, c1.1, t)?;
    let y = space.geodesic_point(c2.0, c2.1, t)?;
    Ok((1.0 - t) * space.d(c1.0, c2.0) + t * space.d(c1.1, c2.1) - space.d(&x, &y))
}

//! Seeded and deterministic generators of sample sets.

use rand::Rng;
use rand_distr::StandardNormal;

use super::FiniteSet;
use crate::model_space::{Geometry, MetricTree, Point, Space, TreePoint};
use crate::{Error, Result};

/// `count` points distributed uniformly by volume in the closed ball of
/// radius `radius` around `center`.
pub fn sample_ball<R: Rng + ?Sized>(
    space: &Space,
    center: &Point,
    radius: f64,
    count: usize,
    rng: &mut R,
) -> Result<FiniteSet> {
    if count == 0 {
        return Err(Error::EmptySet);
    }
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::Precondition(
            "ball radius must be finite and nonnegative".into(),
        ));
    }
    space.validate(center)?;
    let pts = match space.geometry() {
        Geometry::Tree(t) => sample_tree_ball(t, center, radius, count, rng)?,
        _ => {
            let frame = space.tangent_frame(center)?;
            (0..count)
                .map(|_| {
                    let s = radial_sample(space, radius, rng);
                    let g: Vec<f64> = frame.iter().map(|_| rng.sample(StandardNormal)).collect();
                    let norm = g
                        .iter()
                        .map(|x| x * x)
                        .sum::<f64>()
                        .sqrt()
                        .max(f64::MIN_POSITIVE);
                    let mut w = vec![0.0; frame[0].len()];
                    for (gi, e) in g.iter().zip(&frame) {
                        for (wj, ej) in w.iter_mut().zip(e) {
                            *wj += s * gi / norm * ej;
                        }
                    }
                    space.exp(center, &w)
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    FiniteSet::new(space.clone(), pts)
}

/// Distance from the centre of a uniformly distributed point in a ball.
fn radial_sample<R: Rng + ?Sized>(space: &Space, radius: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    let dim = space.dim() as i32;
    let kappa = space.curvature().unwrap_or(0.0);
    let k = kappa.abs().sqrt();
    if kappa == 0.0 {
        return radius * u.powf(1.0 / dim as f64);
    }
    if dim == 2 && kappa < 0.0 {
        return 2.0 * (u.sqrt() * (k * radius / 2.0).sinh()).asinh() / k;
    }
    if dim == 2 && k * radius <= std::f64::consts::PI {
        return 2.0 * (u.sqrt() * (k * radius / 2.0).sin()).asin() / k;
    }
    // Rejection against the radial density g(ks)^(dim-1).
    let g = |s: f64| {
        if kappa < 0.0 {
            (k * s).sinh()
        } else {
            (k * s).sin().max(0.0)
        }
    };
    let peak = if kappa > 0.0 && k * radius >= std::f64::consts::FRAC_PI_2 {
        1.0
    } else {
        g(radius).powi(dim - 1)
    };
    let mut s = radius * u;
    while rng.random::<f64>() * peak > g(s).powi(dim - 1) {
        s = radius * rng.random::<f64>();
    }
    s
}

fn sample_tree_ball<R: Rng + ?Sized>(
    tree: &MetricTree,
    center: &Point,
    radius: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Point>> {
    let Point::Tree(c) = center else {
        return Err(Error::SpaceMismatch);
    };
    let mut pieces: Vec<(usize, f64, f64)> = Vec::new();
    for (i, e) in tree.edges().iter().enumerate() {
        let mut intervals = if i == c.edge {
            vec![(
                (c.offset - radius).max(0.0),
                (c.offset + radius).min(e.length),
            )]
        } else {
            let du = tree.distance(
                c,
                &TreePoint {
                    edge: i,
                    offset: 0.0,
                },
            );
            let dv = tree.distance(
                c,
                &TreePoint {
                    edge: i,
                    offset: e.length,
                },
            );
            let mut v = Vec::new();
            if radius >= du {
                v.push((0.0, (radius - du).min(e.length)));
            }
            if radius >= dv {
                v.push(((e.length - (radius - dv)).max(0.0), e.length));
            }
            if v.len() == 2 && v[0].1 >= v[1].0 {
                v = vec![(0.0, e.length)];
            }
            v
        };
        intervals.retain(|(a, b)| b >= a);
        pieces.extend(intervals.into_iter().map(|(a, b)| (i, a, b)));
    }
    let total: f64 = pieces.iter().map(|(_, a, b)| b - a).sum();
    if total == 0.0 {
        return Ok(vec![center.clone()]);
    }
    Ok((0..count)
        .map(|_| {
            let mut u = rng.random::<f64>() * total;
            for &(edge, a, b) in &pieces {
                if u <= b - a {
                    return Point::Tree(TreePoint {
                        edge,
                        offset: a + u,
                    });
                }
                u -= b - a;
            }
            let &(edge, _, b) = pieces.last().expect("nonempty pieces");
            Point::Tree(TreePoint { edge, offset: b })
        })
        .collect())
}

/// Deterministic disk sample for two-dimensional model spaces: the centre
/// plus `rings` concentric circles, the outermost carrying about `per_ring`
/// points. Each ring is symmetric under reflection in the first frame axis
/// at `center`, exactly so when `center` is the basepoint.
pub fn ball_rings(
    space: &Space,
    center: &Point,
    radius: f64,
    rings: usize,
    per_ring: usize,
) -> Result<FiniteSet> {
    space.validate(center)?;
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::Precondition(
            "ball radius must be finite and nonnegative".into(),
        ));
    }
    let frame = space.tangent_frame(center)?;
    let mut pts = vec![center.clone()];
    for i in 1..=rings {
        let rho = radius * i as f64 / rings as f64;
        let raw = (per_ring as f64 * i as f64 / rings as f64).round() as usize;
        let n = raw.max(8).next_multiple_of(2);
        for j in 0..=n / 2 {
            let theta = std::f64::consts::TAU * j as f64 / n as f64;
            let c = theta.cos();
            let s = if j == 0 || j == n / 2 {
                0.0
            } else {
                theta.sin()
            };
            pts.push(space.polar_offset_cs(center, &frame, rho, c, s)?);
            if s != 0.0 {
                pts.push(space.polar_offset_cs(center, &frame, rho, c, -s)?);
            }
        }
    }
    FiniteSet::convex(space.clone(), pts)
}

/// `count` evenly spaced points on the geodesic segment from `a` to `b`.
pub fn segment(space: &Space, a: &Point, b: &Point, count: usize) -> Result<FiniteSet> {
    if count == 0 {
        return Err(Error::EmptySet);
    }
    space.validate(a)?;
    space.validate(b)?;
    let pts = if count == 1 {
        vec![a.clone()]
    } else {
        (0..count)
            .map(|i| space.geodesic_point(a, b, i as f64 / (count - 1) as f64))
            .collect::<Result<Vec<_>>>()?
    };
    FiniteSet::convex(space.clone(), pts)
}

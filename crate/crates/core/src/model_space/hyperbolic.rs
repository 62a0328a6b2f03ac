//! Hyperboloid-model kernels for curvature `-k^2`.
//!
//! Points satisfy `<x,x> = -1/k^2` with positive last coordinate, where
//! `<.,.>` is the Minkowski form with the time coordinate last. Kernels
//! work on unit-scaled coordinates `k * x` internally.

use super::note_clamp;

pub(crate) fn minkowski(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() - 1;
    let mut s = 0.0;
    for i in 0..n {
        s += a[i] * b[i];
    }
    s - a[n] * b[n]
}

/// Recomputes the time coordinate from the spatial ones.
pub(crate) fn lift(k: f64, mut x: Vec<f64>) -> Vec<f64> {
    let n = x.len() - 1;
    let spatial: f64 = x[..n].iter().map(|c| c * c).sum();
    x[n] = (1.0 / (k * k) + spatial).sqrt();
    x
}

/// Unit-space distance between unit-scaled points.
fn unit_distance(a: &[f64], b: &[f64]) -> f64 {
    let delta: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let q = minkowski(&delta, &delta);
    if q < 0.0 {
        note_clamp("hyperbolic chord", -q);
    }
    2.0 * (q.max(0.0).sqrt() / 2.0).asinh()
}

fn scaled(k: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|c| c * k).collect()
}

pub(crate) fn distance(k: f64, a: &[f64], b: &[f64]) -> f64 {
    unit_distance(&scaled(k, a), &scaled(k, b)) / k
}

/// Unit tangent at `a` pointing toward `b` (both unit-scaled), or `None` if
/// the points coincide numerically.
fn unit_direction(a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let delta: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let q = minkowski(&delta, &delta);
    let v: Vec<f64> = delta.iter().zip(a).map(|(d, x)| d - 0.5 * q * x).collect();
    let nv = minkowski(&v, &v).max(0.0).sqrt();
    if nv <= 1e-300 || !nv.is_finite() {
        return None;
    }
    Some(v.into_iter().map(|c| c / nv).collect())
}

/// Direction at `a` toward `b` as a unit tangent vector in ambient coordinates.
pub(crate) fn direction(k: f64, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    unit_direction(&scaled(k, a), &scaled(k, b))
}

fn along(k: f64, base_unit: &[f64], dir: &[f64], s_unit: f64) -> Vec<f64> {
    let (c, s) = (s_unit.cosh(), s_unit.sinh());
    let z: Vec<f64> = base_unit
        .iter()
        .zip(dir)
        .map(|(x, v)| (c * x + s * v) / k)
        .collect();
    lift(k, z)
}

pub(crate) fn geodesic(k: f64, a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    let (au, bu) = (scaled(k, a), scaled(k, b));
    let d = unit_distance(&au, &bu);
    match unit_direction(&au, &bu) {
        Some(v) => along(k, &au, &v, t * d),
        None => a.to_vec(),
    }
}

/// Point at distance `s` beyond `b` on the geodesic from `a` through `b`.
pub(crate) fn extend(k: f64, a: &[f64], b: &[f64], s: f64) -> Option<Vec<f64>> {
    let (au, bu) = (scaled(k, a), scaled(k, b));
    let back = unit_direction(&bu, &au)?;
    let away: Vec<f64> = back.iter().map(|c| -c).collect();
    Some(along(k, &bu, &away, k * s))
}

/// Exponential map at `x` applied to tangent vector `w`.
pub(crate) fn exp(k: f64, x: &[f64], w: &[f64]) -> Vec<f64> {
    let len = minkowski(w, w).max(0.0).sqrt();
    if len == 0.0 {
        return x.to_vec();
    }
    let kl = k * len;
    let c = kl.cosh();
    let s = kl.sinh() / kl;
    let z: Vec<f64> = x.iter().zip(w).map(|(xi, wi)| c * xi + s * wi).collect();
    lift(k, z)
}

/// Minkowski-orthonormal basis of the tangent space at `x`.
pub(crate) fn tangent_frame(k: f64, x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        let p = k * k * minkowski(x, &w);
        for (wj, xj) in w.iter_mut().zip(x) {
            *wj += p * xj;
        }
        for f in &frame {
            let c = minkowski(f, &w);
            for (wj, fj) in w.iter_mut().zip(f) {
                *wj -= c * fj;
            }
        }
        let nw = minkowski(&w, &w).sqrt();
        frame.push(w.into_iter().map(|c| c / nw).collect());
    }
    frame
}

/// Euclidean projection of a point (given with the time coordinate) to the
/// Klein chart of the unit-scaled hyperboloid.
pub(crate) fn klein(x: &[f64]) -> Vec<f64> {
    let n = x.len() - 1;
    x[..n].iter().map(|c| c / x[n]).collect()
}

/// Nearest point of the geodesic segment `[a, b]` to `p`, with its distance.
pub(crate) fn segment_nearest(k: f64, p: &[f64], a: &[f64], b: &[f64]) -> (f64, Vec<f64>) {
    let (pu, au, bu) = (scaled(k, p), scaled(k, a), scaled(k, b));
    let len = unit_distance(&au, &bu);
    let Some(v) = unit_direction(&au, &bu) else {
        return (unit_distance(&pu, &au) / k, a.to_vec());
    };
    // Along z(s) = cosh(s) a + sinh(s) v, cosh d(p, z(s)) = A cosh s + B sinh s.
    let big_a = -minkowski(&pu, &au);
    let big_b = -minkowski(&pu, &v);
    let s = if big_b >= 0.0 {
        0.0
    } else {
        (-big_b / big_a).min(1.0 - 1e-16).atanh().clamp(0.0, len)
    };
    if s == 0.0 {
        return (unit_distance(&pu, &au) / k, a.to_vec());
    }
    if s == len {
        return (unit_distance(&pu, &bu) / k, b.to_vec());
    }
    let (c, sh) = (s.cosh(), s.sinh());
    let foot: Vec<f64> = au.iter().zip(&v).map(|(x, w)| c * x + sh * w).collect();
    let foot = lift(1.0, foot);
    let d = unit_distance(&pu, &foot) / k;
    (d, lift(k, foot.iter().map(|x| x / k).collect()))
}

/// Busemann function of the geodesic ray from `a` in direction toward `b`.
pub(crate) fn busemann(k: f64, x: &[f64], a: &[f64], b: &[f64]) -> Option<f64> {
    let (xu, au) = (scaled(k, x), scaled(k, a));
    let v = unit_direction(&au, &scaled(k, b))?;
    let ideal: Vec<f64> = au.iter().zip(&v).map(|(p, w)| p + w).collect();
    Some((-minkowski(&xu, &ideal)).ln() / k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_at_basepoint_is_axis_aligned() {
        let f = tangent_frame(1.0, &[0.0, 0.0, 1.0]);
        assert_eq!(f, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
    }

    #[test]
    fn direction_is_unit_and_tangent() {
        let a = lift(1.0, vec![0.3, -0.2, 0.0]);
        let b = lift(1.0, vec![-1.0, 2.0, 0.0]);
        let v = direction(1.0, &a, &b).unwrap();
        assert!((minkowski(&v, &v) - 1.0).abs() < 1e-12);
        assert!(minkowski(&v, &a).abs() < 1e-12);
    }
}

//! Round-sphere kernels for curvature `k^2`; points lie on the sphere of
//! radius `1/k` centred at the origin.

use super::Error;

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn project(k: f64, x: Vec<f64>) -> Vec<f64> {
    let n = norm(&x);
    x.into_iter().map(|c| c / (n * k)).collect()
}

fn unit_distance(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let sum: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
    2.0 * norm(&diff).atan2(norm(&sum))
}

fn scaled(k: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|c| c * k).collect()
}

pub(crate) fn distance(k: f64, a: &[f64], b: &[f64]) -> f64 {
    unit_distance(&scaled(k, a), &scaled(k, b)) / k
}

fn unit_direction(a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let delta: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let q = dot(&delta, &delta);
    let v: Vec<f64> = delta.iter().zip(a).map(|(d, x)| d + 0.5 * q * x).collect();
    let nv = norm(&v);
    if nv <= 1e-300 {
        return None;
    }
    Some(v.into_iter().map(|c| c / nv).collect())
}

pub(crate) fn direction(k: f64, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    unit_direction(&scaled(k, a), &scaled(k, b))
}

fn along(k: f64, base_unit: &[f64], dir: &[f64], s_unit: f64) -> Vec<f64> {
    let (c, s) = (s_unit.cos(), s_unit.sin());
    let z = base_unit
        .iter()
        .zip(dir)
        .map(|(x, v)| c * x + s * v)
        .collect();
    project(k, z)
}

pub(crate) fn geodesic(k: f64, a: &[f64], b: &[f64], t: f64) -> Result<Vec<f64>, Error> {
    let (au, bu) = (scaled(k, a), scaled(k, b));
    let d = unit_distance(&au, &bu);
    if d > std::f64::consts::PI - 1e-9 {
        return Err(Error::NonUniqueGeodesic);
    }
    Ok(match unit_direction(&au, &bu) {
        Some(v) => along(k, &au, &v, t * d),
        None => a.to_vec(),
    })
}

pub(crate) fn extend(k: f64, a: &[f64], b: &[f64], s: f64) -> Result<Option<Vec<f64>>, Error> {
    let (au, bu) = (scaled(k, a), scaled(k, b));
    if unit_distance(&au, &bu) > std::f64::consts::PI - 1e-9 {
        return Err(Error::NonUniqueGeodesic);
    }
    let Some(back) = unit_direction(&bu, &au) else {
        return Ok(None);
    };
    let away: Vec<f64> = back.iter().map(|c| -c).collect();
    Ok(Some(along(k, &bu, &away, k * s)))
}

pub(crate) fn exp(k: f64, x: &[f64], w: &[f64]) -> Vec<f64> {
    let len = norm(w);
    if len == 0.0 {
        return x.to_vec();
    }
    let kl = k * len;
    let c = kl.cos();
    let s = kl.sin() / kl;
    project(k, x.iter().zip(w).map(|(xi, wi)| c * xi + s * wi).collect())
}

pub(crate) fn tangent_frame(k: f64, x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for i in 0..n {
        if frame.len() == n - 1 {
            break;
        }
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        let p = k * k * dot(x, &w);
        for (wj, xj) in w.iter_mut().zip(x) {
            *wj -= p * xj;
        }
        for f in &frame {
            let c = dot(f, &w);
            for (wj, fj) in w.iter_mut().zip(f) {
                *wj -= c * fj;
            }
        }
        let nw = norm(&w);
        if nw > 1e-8 {
            frame.push(w.into_iter().map(|c| c / nw).collect());
        }
    }
    frame
}

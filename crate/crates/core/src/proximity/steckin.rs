//! Monte Carlo check of the lune-diameter bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::fkappa::{check_lune_assumption, f_kappa, lune_member};
use crate::model_space::{Point, Space};
use crate::setkit::diam_of;
use crate::{par, Error, Result};

/// Accepted samples drawn per independently seeded batch.
const BATCH: usize = 1024;
/// Lowest acceptance rate tolerated before a batch gives up.
const MIN_RATE: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteckinReport {
    pub kappa: f64,
    pub d: f64,
    pub r: f64,
    pub sigma: f64,
    pub accepted: usize,
    pub proposals: u64,
    pub empirical_diam: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Samples `n_samples` points uniformly from the lune `D(x, y; r, sigma)`
/// and compares their diameter with `F_kappa(d(x,y), r, sigma) + 2 sigma`,
/// `kappa` being the space's lower curvature bound.
///
/// Proposals are area-uniform in the annular sector around `y` that
/// contains the lune (radii in `[r - d, r - d + sigma]`, angles about the
/// ray from `y` away from `x` bounded by the law of cosines), so accepted
/// points are uniform on the lune. Batches are seeded from `seed` by
/// stream index, which makes the result independent of the thread count.
pub fn steckin_bound_check(
    space: &Space,
    x: &Point,
    y: &Point,
    r: f64,
    sigma: f64,
    n_samples: usize,
    seed: u64,
) -> Result<SteckinReport> {
    let caps = space.caps();
    let kappa = caps
        .curvature_bounded_below
        .ok_or_else(|| Error::Capability("needs a lower curvature bound".into()))?;
    space.require(caps.geodesic_extension, "needs geodesic extension")?;
    if !space.is_planar() {
        return Err(Error::Unsupported(
            "lune sampling is implemented for 2-D planes".into(),
        ));
    }
    let d = check_lune_assumption(space, x, y, r, sigma)?;
    let bound = f_kappa(kappa, d, r, sigma)? + 2.0 * sigma;
    let u = space.extend_geodesic(x, y, r - d)?;
    let sampler = LuneSampler::new(space, x, y, &u, d, r, sigma)?;

    let batches = n_samples.div_ceil(BATCH);
    let results = par::map_range(batches, |b| {
        let want = BATCH.min(n_samples - b * BATCH);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        sampler.batch(&mut rng, want)
    });
    let mut pts = Vec::with_capacity(n_samples);
    let mut proposals = 0u64;
    let mut starved = false;
    for (batch, tried, ok) in results {
        proposals += tried;
        starved |= !ok;
        pts.extend(batch?);
    }
    if starved {
        return Err(Error::SamplingStarvation {
            accepted: pts.len(),
            requested: n_samples,
            rate: pts.len() as f64 / proposals.max(1) as f64,
        });
    }
    let empirical_diam = diam_of(space, &pts);
    Ok(SteckinReport {
        kappa,
        d,
        r,
        sigma,
        accepted: pts.len(),
        proposals,
        empirical_diam,
        bound,
        ok: empirical_diam <= bound + 1e-6,
    })
}

struct LuneSampler<'a> {
    space: &'a Space,
    x: &'a Point,
    y: &'a Point,
    d: f64,
    r: f64,
    sigma: f64,
    e1: Vec<f64>,
    e2: Vec<f64>,
    inner: f64,
    outer: f64,
    theta_max: f64,
    curvature: f64,
}

impl<'a> LuneSampler<'a> {
    fn new(
        space: &'a Space,
        x: &'a Point,
        y: &'a Point,
        u: &Point,
        d: f64,
        r: f64,
        sigma: f64,
    ) -> Result<Self> {
        let e1 = space.direction(y, u)?;
        let frame = space.tangent_frame(y)?;
        // Complete e1 to an orthonormal pair using the frame vector least aligned with it.
        let pick = frame
            .iter()
            .min_by(|a, b| {
                let da = space.tangent_dot(a, &e1).abs();
                let db = space.tangent_dot(b, &e1).abs();
                da.partial_cmp(&db).expect("finite")
            })
            .expect("2-D frame");
        let c = space.tangent_dot(pick, &e1);
        let mut e2: Vec<f64> = pick.iter().zip(&e1).map(|(p, e)| p - c * e).collect();
        let n = space.tangent_dot(&e2, &e2).sqrt();
        e2.iter_mut().for_each(|v| *v /= n);

        let curvature = space.curvature().unwrap_or(0.0);
        let inner = r - d;
        let outer = r - d + sigma;
        let k = (-curvature).sqrt();
        let cos_max = if curvature < 0.0 {
            ((k * r).cosh() - (k * d).cosh() * (k * outer).cosh())
                / ((k * d).sinh() * (k * outer).sinh())
        } else {
            (r * r - d * d - outer * outer) / (2.0 * d * outer)
        };
        let theta_max = if sigma == 0.0 {
            0.0
        } else {
            cos_max.clamp(-1.0, 1.0).acos()
        };
        Ok(LuneSampler {
            space,
            x,
            y,
            d,
            r,
            sigma,
            e1,
            e2,
            inner,
            outer,
            theta_max,
            curvature,
        })
    }

    fn radius(&self, u: f64) -> f64 {
        if self.curvature < 0.0 {
            let k = (-self.curvature).sqrt();
            let (c0, c1) = ((k * self.inner).cosh(), (k * self.outer).cosh());
            (c0 + u * (c1 - c0)).acosh() / k
        } else {
            (self.inner.powi(2) + u * (self.outer.powi(2) - self.inner.powi(2))).sqrt()
        }
    }

    fn propose(&self, rng: &mut ChaCha8Rng) -> Result<Point> {
        let s = self.radius(rng.random());
        let theta = self.theta_max * (2.0 * rng.random::<f64>() - 1.0);
        let (c, sn) = (theta.cos(), theta.sin());
        let w: Vec<f64> = self
            .e1
            .iter()
            .zip(&self.e2)
            .map(|(a, b)| s * (c * a + sn * b))
            .collect();
        self.space.exp(self.y, &w)
    }

    /// Draws until `want` points are accepted or the acceptance rate
    /// falls below the starvation threshold.
    fn batch(&self, rng: &mut ChaCha8Rng, want: usize) -> (Result<Vec<Point>>, u64, bool) {
        let budget = (want as f64 / MIN_RATE) as u64;
        let mut out = Vec::with_capacity(want);
        let mut tried = 0u64;
        while out.len() < want {
            if tried >= budget {
                return (Ok(out), tried, false);
            }
            tried += 1;
            let z = match self.propose(rng) {
                Ok(z) => z,
                Err(e) => return (Err(e), tried, true),
            };
            if lune_member(self.space, self.x, self.y, self.d, self.r, self.sigma, &z) {
                out.push(z);
            }
        }
        (Ok(out), tried, true)
    }
}

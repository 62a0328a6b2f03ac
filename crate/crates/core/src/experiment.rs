//! Seeded Monte Carlo runs of the drop constructions: sample `(A, X)`,
//! profile the pair problem, regularize, profile again.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model_space::{Point, Space};
use crate::proximity::Mode;
use crate::regularizer::{regularize_max_with, regularize_min_with, DropOptions};
use crate::setkit::{ball_rings, sample_ball, FiniteSet};
use crate::{par, Error, Result};

/// How the sets of one trial are drawn. `X` is a ring-sampled disk at the
/// basepoint; `A` is a random ball sample (or, for degenerate trials, a
/// pair of points mirror-symmetric about the ray through `X`'s centre)
/// centred at distance `x_radius + gap` in a random direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialSampler {
    pub x_radius: f64,
    pub rings: usize,
    pub per_ring: usize,
    pub a_radius: f64,
    pub a_count: usize,
    /// Range of the gap between `X`'s boundary and `A`'s centre.
    pub gap: [f64; 2],
    /// Range of the drop radius.
    pub r: [f64; 2],
    /// Every `degenerate_every`-th trial (0: none) uses the mirror pair.
    pub degenerate_every: usize,
    /// Half the angle, seen from `X`'s centre, between the mirror points.
    pub mirror_angle: f64,
}

impl Default for TrialSampler {
    fn default() -> Self {
        TrialSampler {
            x_radius: 1.0,
            rings: 6,
            per_ring: 48,
            a_radius: 0.3,
            a_count: 20,
            gap: [1.5, 2.5],
            r: [0.2, 0.45],
            degenerate_every: 0,
            mirror_angle: 0.3,
        }
    }
}

/// The sets and radius of one trial.
#[derive(Clone, Debug)]
pub struct TrialInput {
    pub a: FiniteSet,
    pub x: FiniteSet,
    pub r: f64,
    pub degenerate: bool,
}

impl TrialSampler {
    fn validate(&self) -> Result<()> {
        let ok = self.x_radius > 0.0
            && self.a_radius >= 0.0
            && self.a_count > 0
            && self.rings > 0
            && self.gap[0] > self.a_radius
            && self.gap[0] <= self.gap[1]
            && self.r[0] > 0.0
            && self.r[0] <= self.r[1];
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition("invalid trial sampler ranges".into()))
        }
    }

    /// Draws trial `index` from the stream `index` of the root seed.
    pub fn draw(&self, space: &Space, root_seed: u64, index: u64) -> Result<TrialInput> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
        rng.set_stream(index);
        let base = space.basepoint();
        let frame = space.tangent_frame(&base)?;
        let x = ball_rings(space, &base, self.x_radius, self.rings, self.per_ring)?;
        let dist = self.x_radius + rng.random_range(self.gap[0]..=self.gap[1]);
        let r = rng.random_range(self.r[0]..=self.r[1]);
        let degenerate = self.degenerate_every > 0 && index % self.degenerate_every as u64 == 0;
        let a = if degenerate {
            let (c, s) = (self.mirror_angle.cos(), self.mirror_angle.sin());
            let pts: Vec<Point> = [s, -s]
                .iter()
                .map(|&si| space.polar_offset_cs(&base, &frame, dist, c, si))
                .collect::<Result<_>>()?;
            FiniteSet::new(space.clone(), pts)?
        } else {
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let centre = space.polar_offset(&base, &frame, dist, theta)?;
            sample_ball(space, &centre, self.a_radius, self.a_count, &mut rng)?
        };
        Ok(TrialInput {
            a,
            x,
            r,
            degenerate,
        })
    }
}

/// Parameters of a genericity run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenericityConfig {
    pub mode: Mode,
    pub p: u64,
    pub trials: usize,
    pub sampler: TrialSampler,
    pub drop: DropOptions,
}

impl Default for GenericityConfig {
    fn default() -> Self {
        GenericityConfig {
            mode: Mode::Min,
            p: 10,
            trials: 100,
            sampler: TrialSampler::default(),
            drop: DropOptions::default(),
        }
    }
}

/// Outcome of one trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub index: u64,
    pub degenerate: bool,
    pub r: f64,
    pub pre_verdict: Option<bool>,
    pub post_verdict: Option<bool>,
    pub checks_ok: Option<bool>,
    pub hausdorff: Option<f64>,
    pub value_before: Option<f64>,
    pub value_after: Option<f64>,
    pub sigma: Option<f64>,
    pub tau: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenericitySummary {
    pub trials: usize,
    pub completed: usize,
    pub failed: usize,
    pub degenerate: usize,
    /// Degenerate trials whose pre-drop verdict was false.
    pub degenerate_pre_false: usize,
    pub pre_fraction: f64,
    pub post_fraction: f64,
    pub checks_fraction: f64,
    pub mean_hausdorff: f64,
    pub mean_r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenericityReport {
    pub root_seed: u64,
    pub summary: GenericitySummary,
    pub records: Vec<TrialRecord>,
}

fn run_trial(space: &Space, cfg: &GenericityConfig, root_seed: u64, index: u64) -> TrialRecord {
    let mut rec = TrialRecord {
        index,
        degenerate: false,
        r: f64::NAN,
        pre_verdict: None,
        post_verdict: None,
        checks_ok: None,
        hausdorff: None,
        value_before: None,
        value_after: None,
        sigma: None,
        tau: None,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let t = cfg.sampler.draw(space, root_seed, index)?;
        rec.degenerate = t.degenerate;
        rec.r = t.r;
        rec.pre_verdict = Some(cfg.drop.profile.profile(&t.a, &t.x, cfg.mode)?.verdict);
        let d = match cfg.mode {
            Mode::Min => regularize_min_with(&t.a, &t.x, t.r, cfg.p, &cfg.drop)?,
            Mode::Max => regularize_max_with(&t.a, &t.x, t.r, cfg.p, &cfg.drop)?,
        };
        rec.post_verdict = Some(d.certified.verdict);
        rec.checks_ok = Some(d.checks.ok());
        rec.hausdorff = Some(d.checks.hausdorff);
        rec.value_before = Some(d.checks.value_before);
        rec.value_after = Some(d.checks.value_after);
        rec.sigma = d.constants.map(|c| c.sigma);
        rec.tau = d.constants.map(|c| c.tau);
        Ok(())
    })();
    if let Err(e) = outcome {
        rec.error = Some(e.to_string());
    }
    rec
}

fn fraction(n: usize, of: usize) -> f64 {
    if of == 0 {
        0.0
    } else {
        n as f64 / of as f64
    }
}

/// Runs `cfg.trials` independent trials. Trial `i` draws from stream `i`
/// of `root_seed`, so records do not depend on how trials are scheduled.
/// Trials that fail a precondition are recorded with their error.
pub fn genericity_experiment(
    space: &Space,
    cfg: &GenericityConfig,
    root_seed: u64,
) -> Result<GenericityReport> {
    if cfg.trials == 0 {
        return Err(Error::Precondition("need at least one trial".into()));
    }
    cfg.sampler.validate()?;
    let records = par::map_range(cfg.trials, |i| run_trial(space, cfg, root_seed, i as u64));
    let done: Vec<&TrialRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    let count = |f: &dyn Fn(&TrialRecord) -> bool| done.iter().filter(|r| f(r)).count();
    let degenerate = records.iter().filter(|r| r.degenerate).count();
    let summary = GenericitySummary {
        trials: cfg.trials,
        completed: done.len(),
        failed: records.len() - done.len(),
        degenerate,
        degenerate_pre_false: count(&|r| r.degenerate && r.pre_verdict == Some(false)),
        pre_fraction: fraction(count(&|r| r.pre_verdict == Some(true)), done.len()),
        post_fraction: fraction(count(&|r| r.post_verdict == Some(true)), done.len()),
        checks_fraction: fraction(count(&|r| r.checks_ok == Some(true)), done.len()),
        mean_hausdorff: if done.is_empty() {
            0.0
        } else {
            done.iter().map(|r| r.hausdorff.unwrap_or(0.0)).sum::<f64>() / done.len() as f64
        },
        mean_r: if done.is_empty() {
            0.0
        } else {
            done.iter().map(|r| r.r).sum::<f64>() / done.len() as f64
        },
    };
    Ok(GenericityReport {
        root_seed,
        summary,
        records,
    })
}

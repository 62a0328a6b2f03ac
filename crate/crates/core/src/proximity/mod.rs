//! Nearest and farthest pairs between two sample sets, slice-diameter
//! profiles of their well-posedness, and the lune-diameter bound.

mod fkappa;
mod steckin;

use std::fmt::Write as _;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use fkappa::{check_lune_assumption, d_set_contains, f_kappa, f_kappa_expanded};
pub use steckin::{steckin_bound_check, SteckinReport};

use crate::setkit::{lambda_mu, FiniteSet, LambdaMu, SliceMode, Slicer};
use crate::{Error, Result};

/// Whether the pair problem minimises or maximises distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Min,
    Max,
}

impl Mode {
    pub fn slice_mode(self) -> SliceMode {
        match self {
            Mode::Min => SliceMode::LNear,
            Mode::Max => SliceMode::MFar,
        }
    }
}

/// The problem of finding `(a, x)` in `A × X` at minimal or maximal distance.
#[derive(Clone, Debug)]
pub struct PairProblem {
    pub a: FiniteSet,
    pub x: FiniteSet,
    pub mode: Mode,
    values: OnceLock<LambdaMu>,
}

impl PairProblem {
    pub fn new(a: FiniteSet, x: FiniteSet, mode: Mode) -> Result<PairProblem> {
        if a.space() != x.space() {
            return Err(Error::SpaceMismatch);
        }
        Ok(PairProblem {
            a,
            x,
            mode,
            values: OnceLock::new(),
        })
    }

    pub fn lambda_mu(&self) -> &LambdaMu {
        self.values
            .get_or_init(|| lambda_mu(&self.a, &self.x).expect("spaces checked on construction"))
    }
}

/// Optimal pair over the samples (lowest `(a, x)` indices among ties).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Solution {
    pub a_index: usize,
    pub x_index: usize,
    pub value: f64,
}

pub fn solve(problem: &PairProblem) -> Solution {
    let lm = problem.lambda_mu();
    let ((a_index, x_index), value) = match problem.mode {
        Mode::Min => (lm.argmin, lm.lambda),
        Mode::Max => (lm.argmax, lm.mu),
    };
    Solution {
        a_index,
        x_index,
        value,
    }
}

/// Slice diameters of a pair problem over a descending grid of widths.
/// `diam_xy[i]` is the diameter of the slice of the first set toward the
/// second at width `sigma_grid[i]`, `diam_yx[i]` the reverse.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub mode: Mode,
    pub sigma_grid: Vec<f64>,
    pub diam_xy: Vec<f64>,
    pub diam_yx: Vec<f64>,
    pub tau_wp: f64,
    pub verdict: bool,
}

impl Diagnostics {
    /// One row per grid width; `verdict` marks rows where both diameters
    /// are within tolerance.
    pub fn to_csv(&self) -> String {
        let tag = match self.mode {
            Mode::Min => "L",
            Mode::Max => "M",
        };
        let mut out = format!("sigma,diam_{tag}_XY,diam_{tag}_YX,verdict\n");
        for i in 0..self.sigma_grid.len() {
            let ok = self.diam_xy[i] <= self.tau_wp && self.diam_yx[i] <= self.tau_wp;
            let _ = writeln!(
                out,
                "{:e},{:e},{:e},{}",
                self.sigma_grid[i], self.diam_xy[i], self.diam_yx[i], ok
            );
        }
        out
    }
}

/// `sigma0 * 2^-i` for `i = 0..=depth`.
pub fn dyadic_grid(sigma0: f64, depth: usize) -> Vec<f64> {
    (0..=depth)
        .map(|i| sigma0 * 0.5f64.powi(i as i32))
        .collect()
}

/// Slice-diameter profile of the pair problem `(a, x, mode)`.
pub fn wellposedness_profile(
    a: &FiniteSet,
    x: &FiniteSet,
    mode: Mode,
    sigma_grid: &[f64],
    tau_wp: f64,
) -> Result<Diagnostics> {
    if sigma_grid.is_empty()
        || sigma_grid.iter().any(|s| !(*s > 0.0))
        || sigma_grid.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::Precondition(
            "sigma grid must be positive and strictly descending".into(),
        ));
    }
    let sm = mode.slice_mode();
    let first = Slicer::new(a, x, sm)?;
    let second = Slicer::new(x, a, sm)?;
    let diam_xy: Vec<f64> = sigma_grid.iter().map(|&s| first.diam(s)).collect();
    let diam_yx: Vec<f64> = sigma_grid.iter().map(|&s| second.diam(s)).collect();
    let last = sigma_grid.len() - 1;
    let verdict = diam_xy[last] <= tau_wp && diam_yx[last] <= tau_wp;
    Ok(Diagnostics {
        mode,
        sigma_grid: sigma_grid.to_vec(),
        diam_xy,
        diam_yx,
        tau_wp,
        verdict,
    })
}

/// How profiles pick their grid and tolerance when none is given.
///
/// The scale of a pair problem is the largest distance between the two
/// sets (1 if they are the same single point). The grid starts at a
/// quarter of the scale and halves `depth` times; the tolerance is
/// `tau_rel` times the scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProfileSettings {
    pub depth: usize,
    pub tau_rel: f64,
    pub sigma0: Option<f64>,
    pub tau_wp: Option<f64>,
}

impl Default for ProfileSettings {
    fn default() -> Self {
        ProfileSettings {
            depth: 16,
            tau_rel: 1e-3,
            sigma0: None,
            tau_wp: None,
        }
    }
}

impl ProfileSettings {
    pub fn grid_and_tol(&self, scale: f64) -> (Vec<f64>, f64) {
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let grid = dyadic_grid(self.sigma0.unwrap_or(scale / 4.0), self.depth);
        (grid, self.tau_wp.unwrap_or(self.tau_rel * scale))
    }

    pub fn profile(&self, a: &FiniteSet, x: &FiniteSet, mode: Mode) -> Result<Diagnostics> {
        let scale = lambda_mu(a, x)?.mu;
        let (grid, tau) = self.grid_and_tol(scale);
        wellposedness_profile(a, x, mode, &grid, tau)
    }
}

/// Outcome of the one-sided well-posedness test for a convex set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OneSideReport {
    /// `diam L_YX` fell within tolerance at the finest width.
    pub hypothesis_met: bool,
    /// Some grid width gave `diam L_XY` within tolerance.
    pub slice_conclusion: Option<bool>,
    /// Largest distance of sampled near-optimal pairs from the optimum.
    pub cluster_radius: Option<f64>,
    pub diagnostics: Diagnostics,
    pub passed: bool,
}

/// Tests the one-sided characterisation of well-posedness for `min(X, Y)`
/// with `X` convex in a CAT(0) space: when the slices of `Y` shrink, the
/// slices of `X` must shrink too, and near-optimal pairs drawn at the four
/// finest widths must cluster at the optimum.
pub fn cat0_oneside_check(
    x: &FiniteSet,
    y: &FiniteSet,
    sigma_grid: &[f64],
    tau_wp: f64,
    seed: u64,
) -> Result<OneSideReport> {
    x.space()
        .require(x.space().caps().cat0, "needs a CAT(0) space")?;
    if !x.is_convex() {
        return Err(Error::Precondition("X must be marked convex".into()));
    }
    let diagnostics = wellposedness_profile(x, y, Mode::Min, sigma_grid, tau_wp)?;
    let last = sigma_grid.len() - 1;
    let hypothesis_met = diagnostics.diam_yx[last] <= tau_wp;
    if !hypothesis_met {
        return Ok(OneSideReport {
            hypothesis_met,
            slice_conclusion: None,
            cluster_radius: None,
            diagnostics,
            passed: true,
        });
    }
    let slice_ok = diagnostics.diam_xy.iter().any(|&d| d <= tau_wp);
    let lm = lambda_mu(x, y)?;
    let (xo, yo) = (x.point(lm.argmin.0), y.point(lm.argmin.1));
    let space = x.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut radius: f64 = 0.0;
    for &sigma in &sigma_grid[sigma_grid.len().saturating_sub(4)..] {
        let near: Vec<(usize, usize)> = (0..x.len())
            .flat_map(|i| (0..y.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| space.d(x.point(i), y.point(j)) <= lm.lambda + sigma)
            .collect();
        let (i, j) = near[rng.random_range(0..near.len())];
        radius = radius
            .max(space.d(x.point(i), xo))
            .max(space.d(y.point(j), yo));
    }
    let passed = slice_ok && radius <= tau_wp;
    Ok(OneSideReport {
        hypothesis_met,
        slice_conclusion: Some(slice_ok),
        cluster_radius: Some(radius),
        diagnostics,
        passed,
    })
}

//! Petals, the petal search, the drop search and the regularization of
//! `min(X, f)` for convex continuous `f`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model_space::{Point, Space};
use crate::proximity::ProfileSettings;
use crate::setkit::{cone_hull, diam, diam_of, dist_to, FiniteSet};
use crate::{par, Error, Result};

/// A real function on the points of a space.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarField {
    /// `d(x, z)`.
    DistToPoint { z: Point },
    /// Distance to the set a sample stands for (see [`FiniteSet::closure_dist`]).
    DistToSet { set: FiniteSet },
    /// Pointwise maximum.
    MaxOf { fields: Vec<ScalarField> },
    /// `offset + slope * b(x)` with `b` the Busemann function of the ray
    /// from `from` through `toward`; affine along that ray.
    AffineAlongGeodesic {
        offset: f64,
        slope: f64,
        from: Point,
        toward: Point,
    },
    /// Values given on the samples of `set` only; `convex` is the caller's claim.
    Table {
        set: FiniteSet,
        values: Vec<f64>,
        convex: bool,
    },
}

impl ScalarField {
    pub fn dist_to_point(z: Point) -> ScalarField {
        ScalarField::DistToPoint { z }
    }

    pub fn max_of_distances(z1: Point, z2: Point) -> ScalarField {
        ScalarField::MaxOf {
            fields: vec![
                ScalarField::DistToPoint { z: z1 },
                ScalarField::DistToPoint { z: z2 },
            ],
        }
    }

    pub fn table(set: FiniteSet, values: Vec<f64>, convex: bool) -> Result<ScalarField> {
        if values.len() != set.len() {
            return Err(Error::Precondition(format!(
                "table has {} values for {} points",
                values.len(),
                set.len()
            )));
        }
        Ok(ScalarField::Table {
            set,
            values,
            convex,
        })
    }

    pub fn eval(&self, space: &Space, x: &Point) -> Result<f64> {
        match self {
            ScalarField::DistToPoint { z } => space.distance(x, z),
            ScalarField::DistToSet { set } => {
                set.check_same_space_as(space)?;
                space.validate(x)?;
                Ok(set.closure_dist(x))
            }
            ScalarField::MaxOf { fields } => {
                let mut best = f64::NEG_INFINITY;
                for f in fields {
                    best = best.max(f.eval(space, x)?);
                }
                Ok(best)
            }
            ScalarField::AffineAlongGeodesic {
                offset,
                slope,
                from,
                toward,
            } => Ok(offset + slope * space.busemann(x, from, toward)?),
            ScalarField::Table { set, values, .. } => {
                let (d, i) = dist_to(x, set);
                if d <= 1e-9 {
                    Ok(values[i])
                } else {
                    Err(Error::DomainViolation("point is not in the table".into()))
                }
            }
        }
    }

    /// Values at every sample of `set`, in order.
    pub fn eval_all(&self, set: &FiniteSet) -> Result<Vec<f64>> {
        par::map(set.points(), |p| self.eval(set.space(), p))
            .into_iter()
            .collect()
    }

    /// A Lipschitz constant: exact for the distance and affine kinds,
    /// the largest difference quotient over the samples for tables.
    pub fn lipschitz_bound(&self, space: &Space) -> f64 {
        match self {
            ScalarField::DistToPoint { .. } | ScalarField::DistToSet { .. } => 1.0,
            ScalarField::MaxOf { fields } => fields
                .iter()
                .map(|f| f.lipschitz_bound(space))
                .fold(0.0, f64::max),
            ScalarField::AffineAlongGeodesic { slope, .. } => slope.abs(),
            ScalarField::Table { set, values, .. } => par::max_range(set.len(), |i| {
                (i + 1..set.len())
                    .map(|j| (values[i] - values[j]).abs() / space.d(set.point(i), set.point(j)))
                    .fold(0.0, f64::max)
            }),
        }
    }

    /// Whether `f` is known to be convex along geodesics of `space`.
    /// Distances to points and convex sets are convex when the metric is;
    /// Busemann functions are convex in CAT(0) spaces.
    pub fn is_convex(&self, space: &Space) -> bool {
        let caps = space.caps();
        match self {
            ScalarField::DistToPoint { .. } => caps.convex_metric,
            ScalarField::DistToSet { set } => caps.convex_metric && set.is_convex(),
            ScalarField::MaxOf { fields } => fields.iter().all(|f| f.is_convex(space)),
            ScalarField::AffineAlongGeodesic { slope, .. } => caps.cat0 && *slope >= 0.0,
            ScalarField::Table { convex, .. } => *convex,
        }
    }
}

impl FiniteSet {
    fn check_same_space_as(&self, space: &Space) -> Result<()> {
        if self.space() == space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

/// Smallest value of `(1 - t) f(x) + t f(y) - f(γ(t))` over `trials` random
/// sample pairs and times `t`; at least `-1e-9` for convex `f`.
pub fn convexity_spot_check(
    f: &ScalarField,
    samples: &FiniteSet,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let space = samples.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let x = samples.point(rng.random_range(0..samples.len()));
        let y = samples.point(rng.random_range(0..samples.len()));
        let t: f64 = rng.random();
        let g = space.geodesic_point(x, y, t)?;
        let defect = (1.0 - t) * f.eval(space, x)? + t * f.eval(space, y)? - f.eval(space, &g)?;
        worst = worst.min(defect);
    }
    Ok(worst)
}

/// The petal `{x : f(x) <= f(x0) - alpha d(x, x0) + delta}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Petal {
    pub x0: Point,
    pub alpha: f64,
    pub delta: f64,
    pub f: ScalarField,
}

impl Petal {
    pub fn new(x0: Point, alpha: f64, delta: f64, f: ScalarField) -> Result<Petal> {
        if !(alpha > 0.0) || !(delta >= 0.0) {
            return Err(Error::Precondition(
                "petals need alpha > 0 and delta >= 0".into(),
            ));
        }
        Ok(Petal {
            x0,
            alpha,
            delta,
            f,
        })
    }
}

/// Membership in the petal, with 1e-12 slack toward inclusion.
pub fn petal_contains(space: &Space, petal: &Petal, x: &Point) -> Result<bool> {
    let fx = petal.f.eval(space, x)?;
    let f0 = petal.f.eval(space, &petal.x0)?;
    Ok(petal_test(
        fx,
        f0,
        petal.alpha,
        space.distance(x, &petal.x0)?,
        petal.delta,
    ))
}

fn petal_test(fx: f64, f0: f64, alpha: f64, d: f64, delta: f64) -> bool {
    fx <= f0 - alpha * d + delta + 1e-12
}

/// Result of [`petal_search`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PetalSearch {
    /// Index of the fixed point `a`.
    pub index: usize,
    /// Indices visited, starting with `x0` and ending with `a`.
    pub trace: Vec<usize>,
    /// `f` along the trace; strictly decreasing.
    pub values: Vec<f64>,
    /// No other sample lies in the petal of width 0 at `a`.
    pub isolated: bool,
    /// `a` lies in the petal of width `delta` at `x0`.
    pub in_start_petal: bool,
}

fn petal_search_values(
    a: &FiniteSet,
    fv: &[f64],
    alpha: f64,
    delta: f64,
    x0: usize,
) -> PetalSearch {
    let space = a.space();
    let in_petal = |centre: usize, i: usize| {
        petal_test(
            fv[i],
            fv[centre],
            alpha,
            space.d(a.point(i), a.point(centre)),
            0.0,
        )
    };
    let mut cur = x0;
    let mut trace = vec![x0];
    loop {
        // The lowest value in the petal at `cur`, lowest index among ties;
        // only strict decreases move the search.
        let next = (0..a.len())
            .filter(|&i| i != cur && fv[i] < fv[cur] && in_petal(cur, i))
            .min_by(|&i, &j| fv[i].total_cmp(&fv[j]).then(i.cmp(&j)));
        match next {
            Some(i) => {
                cur = i;
                trace.push(i);
            }
            None => break,
        }
    }
    let isolated = (0..a.len())
        .all(|i| i == cur || fv[i] > fv[cur] - alpha * space.d(a.point(i), a.point(cur)));
    let in_start_petal = petal_test(
        fv[cur],
        fv[x0],
        alpha,
        space.d(a.point(cur), a.point(x0)),
        delta,
    );
    PetalSearch {
        index: cur,
        values: trace.iter().map(|&i| fv[i]).collect(),
        trace,
        isolated,
        in_start_petal,
    }
}

/// Walks from `x0` to a point `a` of `A` whose petal of width 0 meets `A`
/// only at `a`: each step moves to the lowest value of `f` in the current
/// petal. Each step lowers `f` by at least `alpha` times its length, so the
/// walk ends within `|A|` steps.
pub fn petal_search(
    a: &FiniteSet,
    f: &ScalarField,
    alpha: f64,
    delta: f64,
    x0: usize,
) -> Result<PetalSearch> {
    if x0 >= a.len() {
        return Err(Error::Precondition(format!(
            "start index {x0} out of range"
        )));
    }
    if !(alpha > 0.0) || !(delta >= 0.0) {
        return Err(Error::Precondition(
            "petal search needs alpha > 0 and delta >= 0".into(),
        ));
    }
    let fv = f.eval_all(a)?;
    Ok(petal_search_values(a, &fv, alpha, delta, x0))
}

/// Certificate of the three drop conditions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DropReport {
    /// `dist(a, B)`.
    pub dist_a: f64,
    /// (i) `dist(a, B) < lambda_AB + eps`.
    pub near_optimal: bool,
    /// Smallest distance from another sample of `A` to a drop sample.
    pub nearest_other: Option<f64>,
    /// Other samples of `A` inside the exact hull of the drop samples
    /// (planar spaces only).
    pub others_inside: Vec<usize>,
    /// (ii) no other sample of `A` lies in the drop.
    pub isolated: bool,
    /// Smallest slack of `dist(y, B) <= dist(a, B) - alpha d(a, y)` over
    /// the drop samples `y`.
    pub inclusion_defect: f64,
    /// (iii) the drop lies in the petal at `a` (slack at least -1e-9).
    pub in_petal: bool,
}

impl DropReport {
    pub fn ok(&self) -> bool {
        self.near_optimal && self.isolated && self.in_petal
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DropSearch {
    /// Index of the drop point in `A`.
    pub a: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub eps: f64,
    pub search: PetalSearch,
    /// Samples of co(B ∪ {a}).
    pub drop: FiniteSet,
    pub report: DropReport,
}

/// Finds `a` in `A` whose drop co(B ∪ {a}) meets `A` only at `a`, with
/// `dist(a, B) < lambda_AB + eps`.
pub fn drop_search(a: &FiniteSet, b: &FiniteSet, eps: f64) -> Result<DropSearch> {
    drop_search_from(a, b, eps, None, 9)
}

/// [`drop_search`] starting from `x0` (which must satisfy
/// `dist(x0, B) < lambda_AB + eps / 2`) or, if `None`, from the lowest index
/// that does; the drop is sampled with `m` points per segment.
pub fn drop_search_from(
    a: &FiniteSet,
    b: &FiniteSet,
    eps: f64,
    x0: Option<usize>,
    m: usize,
) -> Result<DropSearch> {
    a.check_same_space_as(b.space())?;
    let space = b.space();
    space.require(space.caps().convex_metric, "needs a convex metric")?;
    if !b.is_convex() {
        return Err(Error::Precondition("B must be marked convex".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::Precondition("eps must be positive".into()));
    }
    let f = ScalarField::DistToSet { set: b.clone() };
    let fv = f.eval_all(a)?;
    let lambda = fv.iter().copied().fold(f64::INFINITY, f64::min);
    if !(lambda > 0.0) {
        return Err(Error::Precondition("need lambda_AB > 0".into()));
    }
    let alpha = lambda / (lambda + diam(b));
    let x0 = match x0 {
        Some(i) if i < a.len() && fv[i] < lambda + eps / 2.0 => i,
        Some(i) => {
            return Err(Error::Precondition(format!(
                "start {i} is not within eps/2 of lambda_AB"
            )));
        }
        None => (0..a.len())
            .find(|&i| fv[i] < lambda + eps / 2.0)
            .expect("the minimum qualifies"),
    };
    let search = petal_search_values(a, &fv, alpha, eps / 2.0, x0);
    let ai = search.index;
    let apex = a.point(ai);
    let drop = cone_hull(b, apex, m)?;

    let others: Vec<usize> = (0..a.len()).filter(|&i| i != ai).collect();
    let gaps = par::map(&others, |&i| dist_to(a.point(i), &drop).0);
    let nearest_other = gaps.iter().copied().reduce(f64::min);
    let others_inside: Vec<usize> = match drop.region() {
        Some(region) => others
            .iter()
            .copied()
            .filter(|&i| region.distance(space, a.point(i)) <= 0.0)
            .collect(),
        None => Vec::new(),
    };
    let fa = fv[ai];
    let defects = par::map(drop.points(), |y| {
        fa - alpha * space.d(apex, y) - b.closure_dist(y)
    });
    let inclusion_defect = defects.iter().copied().fold(f64::INFINITY, f64::min);
    let report = DropReport {
        dist_a: fa,
        near_optimal: fa < lambda + eps,
        nearest_other,
        isolated: nearest_other.map_or(true, |g| g > 1e-9) && others_inside.is_empty(),
        others_inside,
        inclusion_defect,
        in_petal: inclusion_defect >= -1e-9,
    };
    Ok(DropSearch {
        a: ai,
        alpha,
        lambda,
        eps,
        search,
        drop,
        report,
    })
}

/// For each `eps`, the largest `delta` on the grid `eps * 2^(1-j)`,
/// `j = 0..=20`, such that every sample `x` of `X` with `f(x) < c + delta`
/// lies within `eps` of the sampled sublevel set `{f <= c}` (`None` if no
/// grid value works).
///
/// The sublevel set is sampled on the segments from `z` to the samples of
/// `X`: 64 evenly spaced points each plus the crossing of the level `c`,
/// located by bisection.
pub fn sublevel_dist_check(
    f: &ScalarField,
    c: f64,
    z: &Point,
    x: &FiniteSet,
    eps_grid: &[f64],
) -> Result<Vec<(f64, Option<f64>)>> {
    let space = x.space();
    let fz = f.eval(space, z)?;
    if !(fz < c) {
        return Err(Error::Precondition(format!(
            "need f(z) < c, got f(z) = {fz}, c = {c}"
        )));
    }
    if eps_grid.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Precondition("eps values must be positive".into()));
    }
    const STEPS: usize = 64;
    let rays: Vec<Result<Vec<Point>>> = par::map(x.points(), |p| {
        let mut out = Vec::with_capacity(STEPS + 2);
        let mut last_in = 0.0;
        let mut crossed = false;
        for s in 0..=STEPS {
            let t = s as f64 / STEPS as f64;
            let q = space.geodesic_point(z, p, t)?;
            if f.eval(space, &q)? <= c {
                out.push(q);
                if !crossed {
                    last_in = t;
                }
            } else {
                crossed = true;
            }
        }
        if crossed {
            let (mut lo, mut hi) = (last_in, (last_in + 1.0 / STEPS as f64).min(1.0));
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if f.eval(space, &space.geodesic_point(z, p, mid)?)? <= c {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(space.geodesic_point(z, p, lo)?);
        }
        Ok(out)
    });
    let mut pts = vec![z.clone()];
    for r in rays {
        pts.extend(r?);
    }
    if pts.is_empty() {
        return Err(Error::SamplingStarvation {
            accepted: 0,
            requested: 1,
            rate: 0.0,
        });
    }
    let sub = FiniteSet::new(space.clone(), pts)?;
    let fx = f.eval_all(x)?;
    let gaps = par::map(x.points(), |p| dist_to(p, &sub).0);
    Ok(eps_grid
        .iter()
        .map(|&eps| {
            let delta = (0..=20)
                .map(|j| eps * 2f64.powi(1 - j))
                .find(|&delta| (0..x.len()).all(|i| !(fx[i] < c + delta) || gaps[i] < eps + 1e-12));
            (eps, delta)
        })
        .collect())
}

/// Slice diameters of `min(Y, f)` in the sense of Revalski over a
/// descending grid of widths.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldDiagnostics {
    pub inf_value: f64,
    pub sigma_grid: Vec<f64>,
    pub diam: Vec<f64>,
    pub members: Vec<usize>,
    pub tau_wp: f64,
    pub verdict: bool,
}

/// Profile of `L_{Y,f}(sigma) = {x : f(x) <= inf_Y f + sigma, dist(x, Y) <= sigma}`.
///
/// Members are the samples of `Y` and probe points at distance
/// `sigma_i / 2` and `sigma_i` in 8 directions around the samples with
/// `f <= inf + sigma_i`, for each grid width `sigma_i`; a probe built at
/// radius `rho` belongs to the slices with `sigma >= rho` whose value bound
/// it meets. The grid and tolerance come from `settings` with the diameter
/// of `Y` as scale. Needs a space with tangent frames.
pub fn revalski_profile(
    y: &FiniteSet,
    f: &ScalarField,
    settings: &ProfileSettings,
) -> Result<FieldDiagnostics> {
    let space = y.space();
    let fy = f.eval_all(y)?;
    let inf = fy.iter().copied().fold(f64::INFINITY, f64::min);
    let (grid, tau) = settings.grid_and_tol(diam(y));
    let mut probes: Vec<(f64, Point, f64)> = Vec::new();
    for &s in &grid {
        let centres: Vec<usize> = (0..y.len()).filter(|&i| fy[i] <= inf + s).collect();
        let made: Vec<Result<Vec<(f64, Point, f64)>>> = par::map(&centres, |&i| {
            let p = y.point(i);
            let frame = space.tangent_frame(p)?;
            let mut out = Vec::with_capacity(16);
            for rho in [s / 2.0, s] {
                for k in 0..8 {
                    let q = space.polar_offset(p, &frame, rho, TAU * k as f64 / 8.0)?;
                    let v = f.eval(space, &q)?;
                    out.push((rho, q, v));
                }
            }
            Ok(out)
        });
        for m in made {
            probes.extend(m?);
        }
    }
    let mut diams = Vec::with_capacity(grid.len());
    let mut counts = Vec::with_capacity(grid.len());
    for &s in &grid {
        let mut pts: Vec<Point> = (0..y.len())
            .filter(|&i| fy[i] <= inf + s)
            .map(|i| y.point(i).clone())
            .collect();
        pts.extend(
            probes
                .iter()
                .filter(|(rho, _, v)| *rho <= s && *v <= inf + s)
                .map(|(_, q, _)| q.clone()),
        );
        counts.push(pts.len());
        diams.push(diam_of(space, &pts));
    }
    let verdict = *diams.last().expect("grid is nonempty") <= tau;
    Ok(FieldDiagnostics {
        inf_value: inf,
        sigma_grid: grid,
        diam: diams,
        members: counts,
        tau_wp: tau,
        verdict,
    })
}

/// Which of the two hypotheses on `f` the caller asserts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hypothesis {
    /// `f` is unbounded below.
    Unbounded,
    /// `f` attains its infimum only at `z0`, and every sequence whose
    /// values tend to the infimum converges to `z0`.
    Minimizer { z0: Point },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizationCase {
    /// The minimizer is within `r` of `X` and is added to it.
    MinimizerWithinReach,
    /// A drop point on the boundary of the `r/2`-neighbourhood of `X`.
    Drop,
}

/// Settings of [`regularize_convex_min`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvexRegularizeOptions {
    /// Directions sampled around each sample of `X` for the neighbourhood.
    pub directions: usize,
    /// Points per segment of the hull toward the new point.
    pub cone_m: usize,
    pub profile: ProfileSettings,
}

impl Default for ConvexRegularizeOptions {
    fn default() -> Self {
        ConvexRegularizeOptions {
            directions: 64,
            cone_m: 9,
            profile: ProfileSettings::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexRegularization {
    pub case: RegularizationCase,
    /// The point added to `X`.
    pub a: Point,
    pub y: FiniteSet,
    /// Sampled infimum of `f` over the neighbourhood (drop case).
    pub m: Option<f64>,
    pub f_a: f64,
    /// Smallest `f(y) - f(a)` over the other samples of `Y`.
    pub min_gap: f64,
    /// Largest distance from a sample of `Y` to the set `X` stands for.
    pub hausdorff_closure: f64,
    pub drop: Option<DropSearch>,
    pub pre: FieldDiagnostics,
    pub post: FieldDiagnostics,
}

/// Adds one point to `X` so that `min(Y, f)` is well-posed in the sense of
/// Revalski and `Y` is within Hausdorff distance `r` of `X`.
///
/// If the asserted minimizer is within `r` of `X` it is added. Otherwise
/// `f` is minimized over samples of the `r/2`-neighbourhood `B` of `X` with
/// value `m`; the sublevel set `{f <= m}` is sampled on `B` and on four
/// shells outside it, and the drop search for `X` over those samples,
/// started at the minimizer over `B`, gives the point added.
pub fn regularize_convex_min(
    x: &FiniteSet,
    f: &ScalarField,
    r: f64,
    hypothesis: &Hypothesis,
    opts: &ConvexRegularizeOptions,
) -> Result<ConvexRegularization> {
    let space = x.space();
    space.require(space.caps().convex_metric, "needs a convex metric")?;
    if !x.is_convex() {
        return Err(Error::Precondition("X must be marked convex".into()));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Precondition(format!(
            "radius must be positive, got {r}"
        )));
    }
    if opts.directions == 0 {
        return Err(Error::Precondition("need at least one direction".into()));
    }
    let pre = revalski_profile(x, f, &opts.profile)?;
    if let Hypothesis::Minimizer { z0 } = hypothesis {
        space.validate(z0)?;
        if x.closure_dist(z0) <= r {
            let y = cone_hull(x, z0, opts.cone_m)?;
            return finish(
                x,
                f,
                y,
                z0.clone(),
                RegularizationCase::MinimizerWithinReach,
                None,
                None,
                pre,
                opts,
            );
        }
    }

    // Samples of the neighbourhood at radius r/2 and of shells beyond it.
    let shells = [0.5, 0.5625, 0.625, 0.6875, 0.75];
    let rows: Vec<Result<Vec<(usize, Point, f64)>>> = par::map(x.points(), |p| {
        let frame = space.tangent_frame(p)?;
        let mut out = Vec::with_capacity(shells.len() * opts.directions);
        for (level, &k) in shells.iter().enumerate() {
            for j in 0..opts.directions {
                let q = space.polar_offset(
                    p,
                    &frame,
                    k * r,
                    TAU * j as f64 / opts.directions as f64,
                )?;
                let v = f.eval(space, &q)?;
                out.push((level, q, v));
            }
        }
        Ok(out)
    });
    let mut cands: Vec<(usize, Point, f64)> = Vec::new();
    for row in rows {
        cands.extend(row?);
    }
    let fx = f.eval_all(x)?;
    let in_b = |c: &(usize, Point, f64)| c.0 == 0 || x.closure_dist(&c.1) <= r / 2.0;
    let mut m = fx.iter().copied().fold(f64::INFINITY, f64::min);
    let mut start: Option<Point> = None;
    for c in cands.iter().filter(|c| in_b(c)) {
        if c.2 < m {
            m = c.2;
            start = Some(c.1.clone());
        }
    }
    let Some(start) = start else {
        return Err(Error::Precondition(
            "f attains its minimum over the neighbourhood on X; no drop is needed".into(),
        ));
    };
    let mut sub = vec![start];
    sub.extend(cands.into_iter().filter(|c| c.2 <= m).map(|c| c.1));
    let a_set = FiniteSet::new(space.clone(), sub)?;
    let ds = drop_search_from(&a_set, x, r / 2.0, Some(0), opts.cone_m)?;
    let apex = a_set.point(ds.a).clone();
    let y = ds.drop.clone();
    finish(
        x,
        f,
        y,
        apex,
        RegularizationCase::Drop,
        Some(m),
        Some(ds),
        pre,
        opts,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    x: &FiniteSet,
    f: &ScalarField,
    y: FiniteSet,
    a: Point,
    case: RegularizationCase,
    m: Option<f64>,
    drop: Option<DropSearch>,
    pre: FieldDiagnostics,
    opts: &ConvexRegularizeOptions,
) -> Result<ConvexRegularization> {
    let space = x.space();
    let f_a = f.eval(space, &a)?;
    let fy = f.eval_all(&y)?;
    let min_gap = (0..y.len())
        .filter(|&i| y.point(i) != &a)
        .map(|i| fy[i] - f_a)
        .fold(f64::INFINITY, f64::min);
    let hausdorff_closure = par::max_range(y.len(), |i| x.closure_dist(y.point(i)));
    let post = revalski_profile(&y, f, &opts.profile)?;
    Ok(ConvexRegularization {
        case,
        a,
        y,
        m,
        f_a,
        min_gap,
        hausdorff_closure,
        drop,
        pre,
        post,
    })
}

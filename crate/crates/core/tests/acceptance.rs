//! End-to-end acceptance run: ten criteria at their stated tolerances, one
//! PASS/FAIL line each. Runs as a plain binary so the lines always show.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use geoprox::experiment::{genericity_experiment, GenericityConfig, TrialSampler};
use geoprox::model_space::{cn_defect, comparison_triangle, convexity_defect, MetricTree};
use geoprox::proximity::{f_kappa, steckin_bound_check, Mode, ProfileSettings};
use geoprox::regularizer::{
    lemma_hull_bound_defects, regularize_max_compact, regularize_min_compact,
    regularize_min_compact_with, DropOptions,
};
use geoprox::setkit::{
    ball_rings, cone_hull, diam, hull_iterate, sample_ball, CnFamily, FiniteSet,
};
use geoprox::variational::{
    drop_search, regularize_convex_min, ConvexRegularizeOptions, Hypothesis, ScalarField,
};
use geoprox::{Point, Space};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn planes() -> [Space; 2] {
    [Space::euclidean(2), Space::hyperbolic(-1.0)]
}

fn random_point(s: &Space, radius: f64, rng: &mut ChaCha8Rng) -> Point {
    let base = s.basepoint();
    let frame = s.tangent_frame(&base).unwrap();
    s.polar_offset(
        &base,
        &frame,
        radius * rng.random::<f64>().sqrt(),
        rng.random_range(0.0..TAU),
    )
    .unwrap()
}

fn fkappa_zero_width() -> Outcome {
    let mut worst = 0.0f64;
    for k in [-0.5, -1.0, -2.0] {
        for i in 0..20 {
            let d = 0.1 + 1.9 * i as f64 / 19.0;
            for j in 0..20 {
                let r = d + (3.0 - d) * j as f64 / 19.0;
                worst = worst.max(f_kappa(k, d, r, 0.0).map_err(|e| e.to_string())?.abs());
            }
        }
    }
    ensure(worst <= 1e-9, || format!("max |F(d,r,0)| = {worst:e}"))?;
    Ok(format!("max |F(d,r,0)| = {worst:.1e} over 1200 points"))
}

fn steckin_bound() -> Outcome {
    let mut worst = f64::INFINITY;
    for i in 0..50u64 {
        let kappa = if i % 2 == 0 { -1.0 } else { -2.0 };
        let s = Space::hyperbolic(kappa);
        let mut g = rng(2, i);
        let x = s.basepoint();
        let frame = s.tangent_frame(&x).unwrap();
        let d = g.random_range(0.05..0.5);
        let y = s
            .polar_offset(&x, &frame, d, g.random_range(0.0..TAU))
            .unwrap();
        let r = g.random_range(2.0 * d + 0.05..2.5);
        let sigma = g.random_range(0.05..1.0) * 2.0 * d;
        let rep = steckin_bound_check(&s, &x, &y, r, sigma, 10_000, i)
            .map_err(|e| format!("config {i}: {e}"))?;
        ensure(rep.accepted == 10_000, || {
            format!("config {i}: accepted {}", rep.accepted)
        })?;
        let slack = rep.bound + 1e-6 - rep.empirical_diam;
        ensure(slack >= 0.0, || {
            format!(
                "config {i}: diam {} > bound {}",
                rep.empirical_diam, rep.bound
            )
        })?;
        worst = worst.min(slack);
    }
    Ok(format!(
        "50 lunes x 1e4 samples, smallest slack {worst:.3e}"
    ))
}

fn hull_bound() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut samples = 0usize;
    for (si, s) in planes().iter().enumerate() {
        for i in 0..50u64 {
            let mut g = rng(3, 100 * si as u64 + i);
            let gens: Vec<Point> = (0..g.random_range(3..7))
                .map(|_| random_point(s, 1.0, &mut g))
                .collect();
            let x = hull_iterate(&FiniteSet::new(s.clone(), gens).unwrap(), 1, 9)
                .map_err(|e| e.to_string())?;
            let xp = loop {
                let p = random_point(s, 3.0, &mut g);
                if x.closure_dist(&p) > 1e-3 {
                    break p;
                }
            };
            let hull = cone_hull(&x, &xp, 9).map_err(|e| e.to_string())?;
            let defects = lemma_hull_bound_defects(&x, &xp, &hull).map_err(|e| e.to_string())?;
            worst = defects.into_iter().fold(worst, f64::min);
            samples += hull.len();
        }
    }
    ensure(worst >= -1e-9, || format!("defect {worst:e}"))?;
    Ok(format!(
        "100 instances, {samples} hull samples, smallest defect {worst:.3e}"
    ))
}

fn cn_shrinkage() -> Outcome {
    let mut report = Vec::new();
    for i in 0..20u64 {
        let s = &planes()[i as usize % 2];
        let mut g = rng(4, i);
        let x = ball_rings(s, &s.basepoint(), g.random_range(0.5..1.5), 4, 24)
            .map_err(|e| e.to_string())?;
        let frame = s.tangent_frame(&s.basepoint()).unwrap();
        let reach = g.random_range(0.3..2.0);
        let apex = s
            .polar_offset(
                &s.basepoint(),
                &frame,
                1.5 + reach,
                g.random_range(0.0..TAU),
            )
            .unwrap();
        let fam = CnFamily::new(&x, &apex, 9).map_err(|e| e.to_string())?;
        let rho = fam.apex_dist();
        let eps = 0.05 * diam(fam.hull());
        let bound = rho * eps / (4.0 * (rho + diam(&x)));
        let mut n0 = (1.0 / bound).ceil() as u64;
        while !(1.0 / (n0 as f64) < bound) {
            n0 += 1;
        }
        let first = (1.0 / rho).floor() as u64 + 1;
        let mut prev = f64::INFINITY;
        for n in first..=n0 {
            let d = fam.diam(n).map_err(|e| e.to_string())?;
            ensure(d <= prev + 1e-9, || {
                format!("instance {i}: diam rises at n = {n}")
            })?;
            prev = d;
        }
        ensure(prev < eps, || {
            format!("instance {i}: diam(C_n0) = {prev} >= eps = {eps}")
        })?;
        report.push(prev / eps);
    }
    let worst = report.iter().copied().fold(0.0, f64::max);
    Ok(format!("20 instances, largest diam(C_n0)/eps = {worst:.3}"))
}

fn min_max_drops(mode: Mode) -> Outcome {
    let mut lines = Vec::new();
    for s in planes() {
        let cfg = GenericityConfig {
            mode,
            trials: 100,
            sampler: TrialSampler {
                degenerate_every: 10,
                ..Default::default()
            },
            ..Default::default()
        };
        let rep = genericity_experiment(&s, &cfg, 42).map_err(|e| e.to_string())?;
        let sum = &rep.summary;
        let name = if s.curvature() == Some(0.0) {
            "R2"
        } else {
            "H2"
        };
        ensure(sum.failed == 0, || {
            let e = rep
                .records
                .iter()
                .find_map(|r| r.error.clone())
                .unwrap_or_default();
            format!("{name}: {} trials failed ({e})", sum.failed)
        })?;
        ensure(sum.checks_fraction == 1.0, || {
            format!("{name}: checks fraction {}", sum.checks_fraction)
        })?;
        ensure(sum.post_fraction >= 0.99, || {
            format!("{name}: post fraction {}", sum.post_fraction)
        })?;
        ensure(
            sum.degenerate > 0 && sum.degenerate_pre_false == sum.degenerate,
            || {
                format!(
                    "{name}: {}/{} degenerate trials ill-posed before",
                    sum.degenerate_pre_false, sum.degenerate
                )
            },
        )?;
        lines.push(format!(
            "{name} post {:.2} checks {:.2} degenerate {}/{}",
            sum.post_fraction, sum.checks_fraction, sum.degenerate_pre_false, sum.degenerate
        ));
    }
    Ok(lines.join("; "))
}

fn compact_uniqueness() -> Outcome {
    let sampler = TrialSampler::default();
    let mut counts = Vec::new();
    for s in planes() {
        let mut singletons = 0;
        for i in 0..100u64 {
            let t = sampler.draw(&s, 7, i).map_err(|e| e.to_string())?;
            let dmin =
                regularize_min_compact(&t.a, &t.x, t.r).map_err(|e| format!("trial {i}: {e}"))?;
            let dmax =
                regularize_max_compact(&t.a, &t.x, t.r).map_err(|e| format!("trial {i}: {e}"))?;
            ensure(
                dmin.checks.map == vec![dmin.a1] && dmax.checks.map == vec![dmax.a1],
                || {
                    format!(
                        "trial {i}: maps {:?} / {:?}",
                        dmin.checks.map, dmax.checks.map
                    )
                },
            )?;
            singletons += 1;
        }
        counts.push(singletons);
    }
    let t = Space::tree(MetricTree::tripod(1.0));
    let x = FiniteSet::convex(t.clone(), vec![t.tree_point(0, 1.0).unwrap()]).unwrap();
    let a = FiniteSet::new(
        t.clone(),
        vec![t.tree_point(1, 0.5).unwrap(), t.tree_point(2, 0.5).unwrap()],
    )
    .unwrap();
    let opts = DropOptions {
        allow_bifurcating: true,
        ..Default::default()
    };
    let d = regularize_min_compact_with(&a, &x, 1.0, &opts).map_err(|e| e.to_string())?;
    ensure(!d.checks.map_singleton, || {
        "tripod map is a singleton".into()
    })?;
    Ok(format!(
        "singleton maps R2 {}/100 H2 {}/100; tripod map {:?}",
        counts[0], counts[1], d.checks.map
    ))
}

fn drop_search_certification() -> Outcome {
    let mut worst_defect = f64::INFINITY;
    let mut worst_gap = f64::INFINITY;
    for i in 0..50u64 {
        let s = &planes()[i as usize % 2];
        let mut g = rng(8, i);
        let base = s.basepoint();
        let frame = s.tangent_frame(&base).unwrap();
        let b = ball_rings(s, &base, g.random_range(0.5..1.2), 4, 32).unwrap();
        let radius = g.random_range(2.0..3.0);
        let theta0 = g.random_range(0.0..TAU);
        let span = g.random_range(0.5..2.0);
        let a = FiniteSet::new(
            s.clone(),
            (0..30)
                .map(|_| {
                    let rr = radius + g.random_range(-0.3..0.3);
                    s.polar_offset(&base, &frame, rr, theta0 + span * g.random::<f64>())
                        .unwrap()
                })
                .collect(),
        )
        .unwrap();
        let eps = g.random_range(0.05..0.5);
        let ds = drop_search(&a, &b, eps).map_err(|e| format!("instance {i}: {e}"))?;
        let d: Vec<f64> = a.points().iter().map(|p| b.closure_dist(p)).collect();
        let lambda = d.iter().copied().fold(f64::INFINITY, f64::min);
        ensure(d[ds.a] < lambda + eps, || {
            format!("instance {i}: condition (i)")
        })?;
        let apex = a.point(ds.a);
        for (j, p) in a.points().iter().enumerate() {
            if j != ds.a {
                let gap = ds
                    .drop
                    .points()
                    .iter()
                    .map(|y| s.d(p, y))
                    .fold(f64::INFINITY, f64::min);
                ensure(gap > 1e-9, || {
                    format!("instance {i}: sample {j} lies in the drop")
                })?;
                worst_gap = worst_gap.min(gap);
            }
        }
        ensure(ds.report.others_inside.is_empty(), || {
            format!("instance {i}: samples inside the drop")
        })?;
        for y in ds.drop.points() {
            let defect = d[ds.a] - ds.alpha * s.d(apex, y) - b.closure_dist(y);
            worst_defect = worst_defect.min(defect);
        }
        ensure(worst_defect >= -1e-9, || {
            format!("instance {i}: inclusion defect {worst_defect:e}")
        })?;
    }
    Ok(format!(
        "50 instances, smallest gap {worst_gap:.3e}, smallest inclusion slack {worst_defect:.3e}"
    ))
}

/// A field, the convex set and radius it is regularized with, and its
/// minimizer.
fn convex_trial(kind: usize, i: u64) -> (Space, FiniteSet, ScalarField, Point, f64) {
    let s = planes()[i as usize % 2].clone();
    let mut g = rng(9 + kind as u64, i);
    let base = s.basepoint();
    let frame = s.tangent_frame(&base).unwrap();
    let x = ball_rings(&s, &base, 1.0, 4, 24).unwrap();
    let r = g.random_range(0.2..0.45);
    let theta = g.random_range(0.0..TAU);
    if kind == 0 {
        let z0 = s
            .polar_offset(&base, &frame, 1.0 + g.random_range(0.1..3.0), theta)
            .unwrap();
        (s, x, ScalarField::dist_to_point(z0.clone()), z0, r)
    } else {
        let mid = s
            .polar_offset(&base, &frame, 1.0 + g.random_range(0.5..2.5), theta)
            .unwrap();
        let mf = s.tangent_frame(&mid).unwrap();
        let h = g.random_range(0.3..1.5);
        let phi = g.random_range(0.0..PI);
        let z1 = s.polar_offset(&mid, &mf, h, phi).unwrap();
        let z2 = s.polar_offset(&mid, &mf, h, phi + PI).unwrap();
        (s, x, ScalarField::max_of_distances(z1, z2), mid, r)
    }
}

fn convex_regularization() -> Outcome {
    let opts = ConvexRegularizeOptions::default();
    let mut worst = 0.0f64;
    for kind in 0..2 {
        for i in 0..50u64 {
            let (s, x, f, z0, r) = convex_trial(kind, i);
            let res = regularize_convex_min(&x, &f, r, &Hypothesis::Minimizer { z0 }, &opts)
                .map_err(|e| format!("field {kind} trial {i}: {e}"))?;
            let post = &res.post;
            let last = *post.diam.last().unwrap();
            ensure(last <= post.tau_wp, || {
                format!(
                    "field {kind} trial {i} in {s:?}: diam {last:e} > tau {:e}",
                    post.tau_wp
                )
            })?;
            if let Some(m) = res.m {
                ensure((res.f_a - m).abs() <= 1e-9 && res.min_gap > 1e-9, || {
                    format!(
                        "field {kind} trial {i}: f(a) - m = {:e}, gap {:e}",
                        res.f_a - m,
                        res.min_gap
                    )
                })?;
            }
            worst = worst.max(last / post.tau_wp);
        }
    }
    // Nearest-point problem of a far point against a segment.
    let s = Space::euclidean(2);
    let x = geoprox::setkit::segment(
        &s,
        &Point::from(vec![-0.6, 0.0]),
        &Point::from(vec![0.6, 0.0]),
        31,
    )
    .unwrap();
    let y = Point::from(vec![0.0, 40.0]);
    let res = regularize_convex_min(
        &x,
        &ScalarField::dist_to_point(y.clone()),
        0.3,
        &Hypothesis::Minimizer { z0: y.clone() },
        &opts,
    )
    .map_err(|e| e.to_string())?;
    let single = FiniteSet::new(s, vec![y]).unwrap();
    let verdict = ProfileSettings::default()
        .profile(&single, &res.y, Mode::Min)
        .map_err(|e| e.to_string())?
        .verdict;
    ensure(verdict, || "min(Y, y) is not well-posed".into())?;
    Ok(format!(
        "2 x 50 trials, largest diam/tau {worst:.3}; nearest-point instance well-posed"
    ))
}

fn geometry_substrate() -> Outcome {
    let h = Space::hyperbolic(-1.0);
    let e = Space::euclidean(2);
    let mut g = rng(10, 0);
    let (mut cn_h, mut cn_e) = (f64::INFINITY, 0.0f64);
    for _ in 0..10_000 {
        let t = g.random::<f64>();
        let p: Vec<Point> = (0..3).map(|_| random_point(&h, 3.0, &mut g)).collect();
        cn_h = cn_h.min(cn_defect(&h, &p[0], &p[1], &p[2], t).unwrap());
        let q: Vec<Point> = (0..3).map(|_| random_point(&e, 3.0, &mut g)).collect();
        cn_e = cn_e.max(cn_defect(&e, &q[0], &q[1], &q[2], t).unwrap().abs());
    }
    ensure(cn_h >= -1e-9, || format!("H2 CN defect {cn_h:e}"))?;
    ensure(cn_e <= 1e-9, || format!("R2 CN defect {cn_e:e}"))?;

    let mut round_trip = 0.0f64;
    for i in 0..2000 {
        let kappa = [-2.0, -1.0, 0.0, 1.0][i % 4];
        let (a, b): (f64, f64) = (g.random_range(0.1..1.2), g.random_range(0.1..1.2));
        let c = g.random_range((a - b).abs()..a + b);
        let tri = comparison_triangle(kappa, a, b, c).unwrap();
        let v = &tri.vertices;
        let got = [
            tri.space.d(&v[0], &v[1]),
            tri.space.d(&v[0], &v[2]),
            tri.space.d(&v[1], &v[2]),
        ];
        for (x, y) in got.iter().zip([a, b, c]) {
            round_trip = round_trip.max((x - y).abs());
        }
    }
    ensure(round_trip <= 1e-9, || {
        format!("comparison sides off by {round_trip:e}")
    })?;

    let tree = Space::tree(MetricTree::tripod(1.0));
    let mut convexity = f64::INFINITY;
    for s in [e.clone(), h.clone(), Space::hyperbolic(-2.0), tree.clone()] {
        for _ in 0..2000 {
            let t = g.random::<f64>();
            let p: Vec<Point> = if s == tree {
                (0..4)
                    .map(|_| {
                        tree.tree_point(g.random_range(0..3), g.random::<f64>())
                            .unwrap()
                    })
                    .collect()
            } else {
                (0..4).map(|_| random_point(&s, 3.0, &mut g)).collect()
            };
            convexity =
                convexity.min(convexity_defect(&s, (&p[0], &p[1]), (&p[2], &p[3]), t).unwrap());
        }
    }
    ensure(convexity >= -1e-9, || {
        format!("convexity defect {convexity:e}")
    })?;

    let cfg = GenericityConfig {
        trials: 20,
        sampler: TrialSampler {
            degenerate_every: 5,
            ..Default::default()
        },
        ..Default::default()
    };
    let run = |threads: usize| -> Result<String, String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| e.to_string())?;
        pool.install(|| {
            let rep = genericity_experiment(&h, &cfg, 99).map_err(|e| e.to_string())?;
            serde_json::to_string(&rep).map_err(|e| e.to_string())
        })
    };
    let one = run(1)?;
    let four = run(4)?;
    ensure(one == four, || {
        "reports differ between 1 and 4 threads".into()
    })?;
    let ball = sample_ball(&h, &h.basepoint(), 1.0, 5, &mut rng(10, 1)).unwrap();
    let again = sample_ball(&h, &h.basepoint(), 1.0, 5, &mut rng(10, 1)).unwrap();
    ensure(ball == again, || {
        "seeded sampling is not reproducible".into()
    })?;
    Ok(format!(
        "CN H2 min {cn_h:.2e}, CN R2 max |.| {cn_e:.1e}, round trip {round_trip:.1e}, convexity min {convexity:.2e}, {} report bytes identical",
        one.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (
            "1 F_kappa vanishes at zero width",
            fkappa_zero_width,
            Duration::from_secs(1),
        ),
        (
            "2 lune diameter bound",
            steckin_bound,
            Duration::from_secs(60),
        ),
        ("3 hull distance bound", hull_bound, Duration::from_secs(30)),
        ("4 C_n shrinkage", cn_shrinkage, Duration::from_secs(30)),
        (
            "5 nearest-pair drop",
            || min_max_drops(Mode::Min),
            Duration::from_secs(300),
        ),
        (
            "6 farthest-pair drop",
            || min_max_drops(Mode::Max),
            Duration::from_secs(300),
        ),
        (
            "7 compact-case uniqueness",
            compact_uniqueness,
            Duration::from_secs(300),
        ),
        (
            "8 drop search",
            drop_search_certification,
            Duration::from_secs(120),
        ),
        (
            "9 convex-function regularization",
            convex_regularization,
            Duration::from_secs(300),
        ),
        (
            "10 geometry substrate and determinism",
            geometry_substrate,
            Duration::from_secs(300),
        ),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let (tag, detail) = match outcome {
            Ok(d) if took <= budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; took longer than {budget:?}")),
            Err(e) => ("FAIL", e),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!(
            "{tag} criterion {name} ({:.2} s): {detail}",
            took.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

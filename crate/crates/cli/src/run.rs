//! Executes a scenario's command and collects its artifacts.

use std::f64::consts::TAU;

use geoprox::experiment::{genericity_experiment, GenericityConfig, TrialSampler};
use geoprox::model_space::{cn_defect, convexity_defect};
use geoprox::proximity::{f_kappa, solve, steckin_bound_check, Mode, PairProblem, ProfileSettings};
use geoprox::regularizer::{
    lemma_hull_bound_defects, regularize_max_compact_with, regularize_max_with,
    regularize_min_compact_with, regularize_min_with, DropOptions,
};
use geoprox::setkit::{ball_rings, cone_hull, hull_iterate};
use geoprox::variational::{drop_search, regularize_convex_min, Hypothesis};
use geoprox::{FiniteSet, Point, Space};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::scenario::{build_sets, lookup, resolve, Command, Scenario};
use crate::CliError;

/// What a command produced.
pub struct Artifacts {
    /// Body of `report.json`.
    pub report: Value,
    /// Extra files: name and contents.
    pub files: Vec<(String, String)>,
    /// A certification the command performs did not hold.
    pub check_failed: Option<String>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn certified(report: Value, ok: bool, what: &str) -> Artifacts {
    Artifacts {
        report,
        files: Vec::new(),
        check_failed: (!ok).then(|| what.to_string()),
    }
}

pub fn run(sc: &Scenario, seed: Option<u64>) -> Result<Artifacts, CliError> {
    let space = sc.space.build()?;
    let sets = build_sets(&space, &sc.sets)?;
    let seed = match (seed, sc.command.needs_seed()) {
        (Some(s), _) => s,
        (None, false) => 0,
        (None, true) => {
            return Err(CliError::Schema(format!(
                "command '{}' needs a seed",
                sc.command.name()
            )));
        }
    };
    let settings = sc.profile;
    let drop_opts = |o: &DropOptions| DropOptions {
        profile: settings,
        ..*o
    };
    Ok(match &sc.command {
        Command::Solve { a, x, mode } => {
            let problem =
                PairProblem::new(lookup(&sets, a)?.clone(), lookup(&sets, x)?.clone(), *mode)?;
            let sol = solve(&problem);
            let pa = problem.a.point(sol.a_index).clone();
            let px = problem.x.point(sol.x_index).clone();
            certified(
                json!({ "solution": sol, "a_point": pa, "x_point": px }),
                true,
                "",
            )
        }
        Command::Profile { a, x, mode } => {
            let d = settings.profile(lookup(&sets, a)?, lookup(&sets, x)?, *mode)?;
            Artifacts {
                files: vec![("profile.csv".into(), d.to_csv())],
                report: to_value(&d),
                check_failed: None,
            }
        }
        Command::RegularizeMin {
            a,
            x,
            r,
            p,
            options,
        } => {
            let d = regularize_min_with(
                lookup(&sets, a)?,
                lookup(&sets, x)?,
                *r,
                *p,
                &drop_opts(options),
            )?;
            certified(
                to_value(&d),
                d.ok(),
                "drop checks or post-drop verdict failed",
            )
        }
        Command::RegularizeMax {
            a,
            x,
            r,
            p,
            options,
        } => {
            let d = regularize_max_with(
                lookup(&sets, a)?,
                lookup(&sets, x)?,
                *r,
                *p,
                &drop_opts(options),
            )?;
            certified(
                to_value(&d),
                d.ok(),
                "drop checks or post-drop verdict failed",
            )
        }
        Command::RegularizeMinCompact { a, x, r, options } => {
            let d = regularize_min_compact_with(
                lookup(&sets, a)?,
                lookup(&sets, x)?,
                *r,
                &drop_opts(options),
            )?;
            certified(
                to_value(&d),
                d.ok() && d.checks.map_singleton,
                "drop checks failed",
            )
        }
        Command::RegularizeMaxCompact { a, x, r, options } => {
            let d = regularize_max_compact_with(
                lookup(&sets, a)?,
                lookup(&sets, x)?,
                *r,
                &drop_opts(options),
            )?;
            certified(
                to_value(&d),
                d.ok() && d.checks.map_singleton,
                "drop checks failed",
            )
        }
        Command::Drop { a, b, eps } => {
            let d = drop_search(lookup(&sets, a)?, lookup(&sets, b)?, *eps)?;
            let ok = d.report.ok();
            certified(to_value(&d), ok, "drop conditions failed")
        }
        Command::RegularizeConvexMin {
            x,
            field,
            r,
            hypothesis,
            options,
        } => {
            let f = field.build(&space, &sets)?;
            let hypothesis = match hypothesis {
                Hypothesis::Minimizer { z0 } => Hypothesis::Minimizer {
                    z0: resolve(&space, z0)?,
                },
                h => h.clone(),
            };
            let opts = geoprox::variational::ConvexRegularizeOptions {
                profile: settings,
                ..*options
            };
            let res = regularize_convex_min(lookup(&sets, x)?, &f, *r, &hypothesis, &opts)?;
            certified(
                to_value(&res),
                res.post.verdict,
                "post-regularization verdict is false",
            )
        }
        Command::FkappaTable { kappa, d, r, sigma } => fkappa_table(kappa, d, r, sigma)?,
        Command::Steckin {
            x,
            y,
            r,
            sigma,
            samples,
        } => {
            let rep = steckin_bound_check(
                &space,
                &resolve(&space, x)?,
                &resolve(&space, y)?,
                *r,
                *sigma,
                *samples,
                seed,
            )?;
            certified(
                to_value(&rep),
                rep.ok,
                "empirical lune diameter exceeds the bound",
            )
        }
        Command::Genericity { config } => genericity(&space, config, settings, seed)?,
        Command::CheckAll { instances } => check_all(*instances, seed, settings)?,
    })
}

fn fkappa_table(kappa: &[f64], d: &[f64], r: &[f64], sigma: &[f64]) -> Result<Artifacts, CliError> {
    let mut csv = String::from("kappa,d,r,sigma,f_kappa,f_kappa_zero_width\n");
    let mut rows = 0usize;
    let mut worst_zero = 0.0f64;
    for &k in kappa {
        for &dd in d {
            for &rr in r {
                let zero = f_kappa(k, dd, rr, 0.0)?;
                worst_zero = worst_zero.max(zero.abs());
                for &s in sigma {
                    let v = f_kappa(k, dd, rr, s)?;
                    csv.push_str(&format!("{k},{dd},{rr},{s},{v:.17e},{zero:.17e}\n"));
                    rows += 1;
                }
            }
        }
    }
    Ok(Artifacts {
        report: json!({ "rows": rows, "max_abs_zero_width": worst_zero }),
        files: vec![("fkappa.csv".into(), csv)],
        check_failed: None,
    })
}

fn genericity(
    space: &Space,
    config: &GenericityConfig,
    settings: ProfileSettings,
    seed: u64,
) -> Result<Artifacts, CliError> {
    let cfg = GenericityConfig {
        drop: DropOptions {
            profile: settings,
            ..config.drop
        },
        ..config.clone()
    };
    let rep = genericity_experiment(space, &cfg, seed)?;
    let mut lines = String::new();
    for rec in &rep.records {
        let line = serde_json::to_string(rec).expect("records serialize");
        log::info!(target: "trial", "{line}");
        lines.push_str(&line);
        lines.push('\n');
    }
    Ok(Artifacts {
        report: json!({ "root_seed": rep.root_seed, "config": cfg, "summary": rep.summary }),
        files: vec![("trials.jsonl".into(), lines)],
        check_failed: None,
    })
}

#[derive(Serialize)]
struct CheckLine {
    name: &'static str,
    /// Worst observed value of the checked quantity.
    worst: f64,
    passed: bool,
}

fn random_point(s: &Space, radius: f64, rng: &mut ChaCha8Rng) -> Result<Point, CliError> {
    let base = s.basepoint();
    let frame = s.tangent_frame(&base)?;
    Ok(s.polar_offset(
        &base,
        &frame,
        radius * rng.random::<f64>().sqrt(),
        rng.random_range(0.0..TAU),
    )?)
}

fn stream(seed: u64, check: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ check.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    rng.set_stream(i as u64);
    rng
}

/// Runs every invariant suite on `instances` seeded instances per check.
fn check_all(
    instances: usize,
    seed: u64,
    settings: ProfileSettings,
) -> Result<Artifacts, CliError> {
    if instances == 0 {
        return Err(CliError::Core(geoprox::Error::Precondition(
            "need at least one instance".into(),
        )));
    }
    let planes = [Space::euclidean(2), Space::hyperbolic(-1.0)];
    let mut lines = Vec::new();

    let mut zero = 0.0f64;
    for k in [-0.5, -1.0, -2.0] {
        for i in 0..20 {
            let d = 0.1 + 1.9 * i as f64 / 19.0;
            for j in 0..20 {
                zero = zero.max(f_kappa(k, d, d + (3.0 - d) * j as f64 / 19.0, 0.0)?.abs());
            }
        }
    }
    lines.push(CheckLine {
        name: "f_kappa_zero_width",
        worst: zero,
        passed: zero <= 1e-9,
    });

    let (mut cn, mut convexity) = (f64::INFINITY, f64::INFINITY);
    for i in 0..instances * 100 {
        let s = &planes[i % 2];
        let mut g = stream(seed, 1, i);
        let p: Vec<Point> = (0..4)
            .map(|_| random_point(s, 3.0, &mut g))
            .collect::<Result<_, _>>()?;
        let t = g.random::<f64>();
        cn = cn.min(cn_defect(s, &p[0], &p[1], &p[2], t)?);
        convexity = convexity.min(convexity_defect(s, (&p[0], &p[1]), (&p[2], &p[3]), t)?);
    }
    lines.push(CheckLine {
        name: "cn_inequality",
        worst: cn,
        passed: cn >= -1e-9,
    });
    lines.push(CheckLine {
        name: "convex_metric",
        worst: convexity,
        passed: convexity >= -1e-9,
    });

    let mut hull_defect = f64::INFINITY;
    for i in 0..instances {
        let s = &planes[i % 2];
        let mut g = stream(seed, 2, i);
        let gens: Vec<Point> = (0..4)
            .map(|_| random_point(s, 1.0, &mut g))
            .collect::<Result<_, _>>()?;
        let x = hull_iterate(&FiniteSet::new(s.clone(), gens)?, 1, 9)?;
        let xp = s.polar_offset(
            &s.basepoint(),
            &s.tangent_frame(&s.basepoint())?,
            2.5,
            g.random_range(0.0..TAU),
        )?;
        let hull = cone_hull(&x, &xp, 9)?;
        hull_defect = lemma_hull_bound_defects(&x, &xp, &hull)?
            .into_iter()
            .fold(hull_defect, f64::min);
    }
    lines.push(CheckLine {
        name: "hull_distance_bound",
        worst: hull_defect,
        passed: hull_defect >= -1e-9,
    });

    let mut drops_ok = 0usize;
    for i in 0..instances {
        let s = &planes[i % 2];
        let mut g = stream(seed, 3, i);
        let b = ball_rings(s, &s.basepoint(), 1.0, 3, 24)?;
        let a = FiniteSet::new(
            s.clone(),
            (0..20)
                .map(|_| {
                    let frame = s.tangent_frame(&s.basepoint())?;
                    Ok(s.polar_offset(
                        &s.basepoint(),
                        &frame,
                        g.random_range(2.0..3.0),
                        g.random_range(0.0..1.5),
                    )?)
                })
                .collect::<Result<_, CliError>>()?,
        )?;
        if drop_search(&a, &b, 0.2)?.report.ok() {
            drops_ok += 1;
        }
    }
    lines.push(CheckLine {
        name: "drop_conditions",
        worst: drops_ok as f64 / instances as f64,
        passed: drops_ok == instances,
    });

    for (mode, name) in [
        (Mode::Min, "nearest_pair_drop"),
        (Mode::Max, "farthest_pair_drop"),
    ] {
        let mut good = 0usize;
        for (k, s) in planes.iter().enumerate() {
            let cfg = GenericityConfig {
                mode,
                trials: instances.div_ceil(2),
                sampler: TrialSampler::default(),
                drop: DropOptions {
                    profile: settings,
                    ..Default::default()
                },
                ..Default::default()
            };
            let rep = genericity_experiment(s, &cfg, seed.wrapping_add(k as u64))?;
            good += rep
                .records
                .iter()
                .filter(|r| r.checks_ok == Some(true) && r.post_verdict == Some(true))
                .count();
        }
        let total = 2 * instances.div_ceil(2);
        lines.push(CheckLine {
            name,
            worst: good as f64 / total as f64,
            passed: good == total,
        });
    }

    let failed: Vec<&str> = lines.iter().filter(|l| !l.passed).map(|l| l.name).collect();
    let report = json!({ "seed": seed, "instances": instances, "checks": lines });
    Ok(Artifacts {
        report,
        files: Vec::new(),
        check_failed: (!failed.is_empty()).then(|| format!("failed checks: {}", failed.join(", "))),
    })
}

//! Scenario files: a space, named sets and one command.

use std::collections::BTreeMap;

use geoprox::experiment::GenericityConfig;
use geoprox::model_space::SpaceSpec;
use geoprox::proximity::{Mode, ProfileSettings};
use geoprox::regularizer::DropOptions;
use geoprox::setkit::{ball_rings, hull_iterate, sample_ball, segment, FiniteSetData, HullParams};
use geoprox::variational::{ConvexRegularizeOptions, Hypothesis, ScalarField};
use geoprox::{FiniteSet, Point, Space};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    /// Root seed of sampled commands; `--seed` overrides it.
    #[serde(default)]
    pub seed: Option<u64>,
    pub space: SpaceSpec,
    #[serde(default)]
    pub sets: BTreeMap<String, SetSpec>,
    pub command: Command,
    /// Well-posedness grid and tolerance used by every profile.
    #[serde(default)]
    pub profile: ProfileSettings,
}

/// How a named set is produced.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Explicit {
        points: Vec<Point>,
        #[serde(default)]
        convex: bool,
        #[serde(default)]
        hull: Option<HullParams>,
    },
    /// Disk sample of concentric rings (planar spaces).
    BallRings {
        #[serde(default)]
        center: Option<Point>,
        radius: f64,
        rings: usize,
        per_ring: usize,
    },
    /// Uniform random ball sample; the seed is required.
    SampleBall {
        #[serde(default)]
        center: Option<Point>,
        radius: f64,
        count: usize,
        seed: u64,
    },
    Segment {
        from: Point,
        to: Point,
        count: usize,
    },
    /// Hull samples of another named set.
    Hull {
        of: String,
        #[serde(default = "default_k")]
        k: usize,
        #[serde(default = "default_m")]
        m: usize,
    },
}

fn default_k() -> usize {
    2
}

fn default_m() -> usize {
    9
}

/// A scalar field whose sets are referred to by name.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    DistToPoint {
        z: Point,
    },
    DistToSet {
        set: String,
    },
    MaxOf {
        fields: Vec<FieldSpec>,
    },
    AffineAlongGeodesic {
        offset: f64,
        slope: f64,
        from: Point,
        toward: Point,
    },
    Table {
        set: String,
        values: Vec<f64>,
        convex: bool,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    Solve {
        a: String,
        x: String,
        mode: Mode,
    },
    Profile {
        a: String,
        x: String,
        mode: Mode,
    },
    RegularizeMin {
        a: String,
        x: String,
        r: f64,
        p: u64,
        #[serde(default)]
        options: DropOptions,
    },
    RegularizeMax {
        a: String,
        x: String,
        r: f64,
        p: u64,
        #[serde(default)]
        options: DropOptions,
    },
    RegularizeMinCompact {
        a: String,
        x: String,
        r: f64,
        #[serde(default)]
        options: DropOptions,
    },
    RegularizeMaxCompact {
        a: String,
        x: String,
        r: f64,
        #[serde(default)]
        options: DropOptions,
    },
    Drop {
        a: String,
        b: String,
        eps: f64,
    },
    RegularizeConvexMin {
        x: String,
        field: FieldSpec,
        r: f64,
        hypothesis: Hypothesis,
        #[serde(default)]
        options: ConvexRegularizeOptions,
    },
    FkappaTable {
        kappa: Vec<f64>,
        d: Vec<f64>,
        r: Vec<f64>,
        sigma: Vec<f64>,
    },
    Steckin {
        x: Point,
        y: Point,
        r: f64,
        sigma: f64,
        samples: usize,
    },
    Genericity {
        #[serde(default)]
        config: GenericityConfig,
    },
    CheckAll {
        /// Instances per check.
        #[serde(default = "default_instances")]
        instances: usize,
    },
}

fn default_instances() -> usize {
    20
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve { .. } => "solve",
            Command::Profile { .. } => "profile",
            Command::RegularizeMin { .. } => "regularize_min",
            Command::RegularizeMax { .. } => "regularize_max",
            Command::RegularizeMinCompact { .. } => "regularize_min_compact",
            Command::RegularizeMaxCompact { .. } => "regularize_max_compact",
            Command::Drop { .. } => "drop",
            Command::RegularizeConvexMin { .. } => "regularize_convex_min",
            Command::FkappaTable { .. } => "fkappa_table",
            Command::Steckin { .. } => "steckin",
            Command::Genericity { .. } => "genericity",
            Command::CheckAll { .. } => "check_all",
        }
    }

    /// Whether the command draws random samples and so needs a root seed.
    pub fn needs_seed(&self) -> bool {
        matches!(
            self,
            Command::Steckin { .. } | Command::Genericity { .. } | Command::CheckAll { .. }
        )
    }
}

/// Parses a scenario, reporting schema errors with line and column.
pub fn parse(text: &str) -> Result<Scenario, CliError> {
    let sc: Scenario = serde_json::from_str(text)
        .map_err(|e| CliError::Schema(format!("line {} column {}: {e}", e.line(), e.column())))?;
    if sc.version != SCHEMA_VERSION {
        return Err(CliError::Schema(format!(
            "unsupported scenario version {} (expected {SCHEMA_VERSION})",
            sc.version
        )));
    }
    Ok(sc)
}

/// Builds the named sets in name order; `hull` sets may refer to sets
/// defined under any name.
pub fn build_sets(
    space: &Space,
    specs: &BTreeMap<String, SetSpec>,
) -> Result<BTreeMap<String, FiniteSet>, CliError> {
    let mut out = BTreeMap::new();
    for name in specs.keys() {
        build_set(space, specs, name, &mut out, 0)?;
    }
    Ok(out)
}

fn build_set(
    space: &Space,
    specs: &BTreeMap<String, SetSpec>,
    name: &str,
    done: &mut BTreeMap<String, FiniteSet>,
    depth: usize,
) -> Result<(), CliError> {
    if done.contains_key(name) {
        return Ok(());
    }
    if depth > specs.len() {
        return Err(CliError::Schema(format!("set '{name}' refers to itself")));
    }
    let spec = specs
        .get(name)
        .ok_or_else(|| CliError::Schema(format!("unknown set '{name}'")))?;
    let centre = |c: &Option<Point>| {
        c.as_ref()
            .map_or_else(|| Ok(space.basepoint()), |p| resolve(space, p))
    };
    let set = match spec {
        SetSpec::Explicit {
            points,
            convex,
            hull,
        } => FiniteSetData {
            points: resolve_all(space, points)?,
            convex: *convex,
            hull: *hull,
        }
        .build(space)?,
        SetSpec::BallRings {
            center,
            radius,
            rings,
            per_ring,
        } => ball_rings(space, &centre(center)?, *radius, *rings, *per_ring)?,
        SetSpec::SampleBall {
            center,
            radius,
            count,
            seed,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            sample_ball(space, &centre(center)?, *radius, *count, &mut rng)?
        }
        SetSpec::Segment { from, to, count } => {
            segment(space, &resolve(space, from)?, &resolve(space, to)?, *count)?
        }
        SetSpec::Hull { of, k, m } => {
            build_set(space, specs, of, done, depth + 1)?;
            hull_iterate(&done[of.as_str()], *k, *m)?
        }
    };
    done.insert(name.to_string(), set);
    Ok(())
}

/// Accepts a point in ambient or chart coordinates (planar hyperbolic
/// points may be given as two chart coordinates).
pub fn resolve(space: &Space, p: &Point) -> Result<Point, CliError> {
    Ok(match p {
        Point::Coords(c) => space.point(c.clone())?,
        Point::Tree(t) => space.tree_point(t.edge, t.offset)?,
    })
}

fn resolve_all(space: &Space, ps: &[Point]) -> Result<Vec<Point>, CliError> {
    ps.iter().map(|p| resolve(space, p)).collect()
}

pub fn lookup<'a>(
    sets: &'a BTreeMap<String, FiniteSet>,
    name: &str,
) -> Result<&'a FiniteSet, CliError> {
    sets.get(name)
        .ok_or_else(|| CliError::Schema(format!("unknown set '{name}'")))
}

impl FieldSpec {
    pub fn build(
        &self,
        space: &Space,
        sets: &BTreeMap<String, FiniteSet>,
    ) -> Result<ScalarField, CliError> {
        Ok(match self {
            FieldSpec::DistToPoint { z } => ScalarField::DistToPoint {
                z: resolve(space, z)?,
            },
            FieldSpec::DistToSet { set } => ScalarField::DistToSet {
                set: lookup(sets, set)?.clone(),
            },
            FieldSpec::MaxOf { fields } => ScalarField::MaxOf {
                fields: fields
                    .iter()
                    .map(|f| f.build(space, sets))
                    .collect::<Result<_, _>>()?,
            },
            FieldSpec::AffineAlongGeodesic {
                offset,
                slope,
                from,
                toward,
            } => ScalarField::AffineAlongGeodesic {
                offset: *offset,
                slope: *slope,
                from: resolve(space, from)?,
                toward: resolve(space, toward)?,
            },
            FieldSpec::Table {
                set,
                values,
                convex,
            } => ScalarField::table(lookup(sets, set)?.clone(), values.clone(), *convex)?,
        })
    }
}

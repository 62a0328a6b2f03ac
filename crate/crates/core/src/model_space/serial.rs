//! JSON form of spaces.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Edge, Geometry, MetricTree, Space};
use crate::Result;

fn plane() -> usize {
    2
}

/// Description of a space from which [`Space`] is built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    Euclidean {
        dim: usize,
        /// Lower curvature bound advertised to the drop constructions.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower_curvature: Option<f64>,
    },
    Hyperbolic {
        kappa: f64,
        #[serde(default = "plane")]
        dim: usize,
    },
    Spherical {
        kappa: f64,
        #[serde(default = "plane")]
        dim: usize,
    },
    Tree {
        vertices: usize,
        edges: Vec<Edge>,
    },
    /// Three legs of equal length joined at vertex 0.
    Tripod {
        length: f64,
    },
}

impl SpaceSpec {
    pub fn build(&self) -> Result<Space> {
        match self {
            SpaceSpec::Euclidean {
                dim,
                lower_curvature,
            } => {
                let s = Space::new(Geometry::Euclidean { dim: *dim })?;
                match lower_curvature {
                    Some(k) => s.with_lower_curvature(*k),
                    None => Ok(s),
                }
            }
            SpaceSpec::Hyperbolic { kappa, dim } => Space::new(Geometry::Hyperbolic {
                kappa: *kappa,
                dim: *dim,
            }),
            SpaceSpec::Spherical { kappa, dim } => Space::new(Geometry::Spherical {
                kappa: *kappa,
                dim: *dim,
            }),
            SpaceSpec::Tree { vertices, edges } => {
                Ok(Space::tree(MetricTree::new(*vertices, edges.clone())?))
            }
            SpaceSpec::Tripod { length } => {
                if !(*length > 0.0 && length.is_finite()) {
                    return Err(crate::Error::Precondition(
                        "tripod legs need a positive length".into(),
                    ));
                }
                Ok(Space::tree(MetricTree::tripod(*length)))
            }
        }
    }
}

impl From<&Space> for SpaceSpec {
    fn from(s: &Space) -> Self {
        match s.geometry() {
            Geometry::Euclidean { dim } => SpaceSpec::Euclidean {
                dim: *dim,
                lower_curvature: s.caps().curvature_bounded_below.filter(|&k| k != -1.0),
            },
            Geometry::Hyperbolic { kappa, dim } => SpaceSpec::Hyperbolic {
                kappa: *kappa,
                dim: *dim,
            },
            Geometry::Spherical { kappa, dim } => SpaceSpec::Spherical {
                kappa: *kappa,
                dim: *dim,
            },
            Geometry::Tree(t) => SpaceSpec::Tree {
                vertices: t.vertices(),
                edges: t.edges().to_vec(),
            },
        }
    }
}

impl Serialize for Space {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SpaceSpec::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Space {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        SpaceSpec::deserialize(deserializer)?
            .build()
            .map_err(serde::de::Error::custom)
    }
}

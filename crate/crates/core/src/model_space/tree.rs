//! Finite weighted trees as geodesic spaces. Points are `(edge, offset)`
//! pairs, with the offset measured from the edge's `u` endpoint.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreePoint {
    pub edge: usize,
    pub offset: f64,
}

/// A piece of a path: the stretch of `edge` between two offsets.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Seg {
    edge: usize,
    from: f64,
    to: f64,
}

const NONE: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq)]
pub struct MetricTree {
    vertices: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
    vertex_distance: Vec<Vec<f64>>,
    first_edge: Vec<Vec<usize>>,
}

impl MetricTree {
    pub fn new(vertices: usize, edges: Vec<Edge>) -> Result<Self> {
        if vertices == 0 || edges.len() + 1 != vertices {
            return Err(Error::Precondition(format!(
                "a tree on {vertices} vertices needs {} edges, got {}",
                vertices.saturating_sub(1),
                edges.len()
            )));
        }
        let mut adjacency = vec![Vec::new(); vertices];
        for (i, e) in edges.iter().enumerate() {
            if e.u >= vertices || e.v >= vertices || e.u == e.v {
                return Err(Error::Precondition(format!(
                    "edge {i} has invalid endpoints"
                )));
            }
            if !(e.length > 0.0 && e.length.is_finite()) {
                return Err(Error::Precondition(format!(
                    "edge {i} needs a positive length"
                )));
            }
            adjacency[e.u].push(i);
            adjacency[e.v].push(i);
        }
        let mut vertex_distance = vec![vec![f64::INFINITY; vertices]; vertices];
        let mut first_edge = vec![vec![NONE; vertices]; vertices];
        for src in 0..vertices {
            let dist = &mut vertex_distance[src];
            let first = &mut first_edge[src];
            dist[src] = 0.0;
            let mut queue = VecDeque::from([src]);
            while let Some(w) = queue.pop_front() {
                for &e in &adjacency[w] {
                    let next = other_end(&edges[e], w);
                    if dist[next].is_infinite() {
                        dist[next] = dist[w] + edges[e].length;
                        first[next] = if w == src { e } else { first[w] };
                        queue.push_back(next);
                    }
                }
            }
            if dist.iter().any(|d| d.is_infinite()) {
                return Err(Error::Precondition("tree is not connected".into()));
            }
        }
        Ok(MetricTree {
            vertices,
            edges,
            adjacency,
            vertex_distance,
            first_edge,
        })
    }

    /// Three edges of equal length joined at vertex 0.
    pub fn tripod(length: f64) -> Self {
        let edges = (1..=3).map(|v| Edge { u: 0, v, length }).collect();
        MetricTree::new(4, edges).expect("tripod is a valid tree")
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn degree(&self, vertex: usize) -> usize {
        self.adjacency[vertex].len()
    }

    /// No vertex has three or more incident edges.
    pub fn is_bifurcation_free(&self) -> bool {
        self.adjacency.iter().all(|a| a.len() <= 2)
    }

    pub fn validate(&self, p: &TreePoint) -> Result<()> {
        let Some(e) = self.edges.get(p.edge) else {
            return Err(Error::InvalidPoint(format!("no edge {}", p.edge)));
        };
        if !(0.0..=e.length).contains(&p.offset) {
            return Err(Error::InvalidPoint(format!(
                "offset {} outside [0, {}] on edge {}",
                p.offset, e.length, p.edge
            )));
        }
        Ok(())
    }

    /// The point sitting at `vertex`, expressed on its lowest-index edge.
    pub fn vertex_point(&self, vertex: usize) -> TreePoint {
        let e = self.adjacency[vertex][0];
        let offset = if self.edges[e].u == vertex {
            0.0
        } else {
            self.edges[e].length
        };
        TreePoint { edge: e, offset }
    }

    fn path(&self, a: &TreePoint, b: &TreePoint) -> Vec<Seg> {
        if a.edge == b.edge {
            if a.offset == b.offset {
                return Vec::new();
            }
            return vec![Seg {
                edge: a.edge,
                from: a.offset,
                to: b.offset,
            }];
        }
        let (ea, eb) = (&self.edges[a.edge], &self.edges[b.edge]);
        let anchors_a = [
            (ea.u, a.offset, 0.0),
            (ea.v, ea.length - a.offset, ea.length),
        ];
        let anchors_b = [
            (eb.u, b.offset, 0.0),
            (eb.v, eb.length - b.offset, eb.length),
        ];
        let mut best = (f64::INFINITY, 0, 0);
        for (i, &(x, dx, _)) in anchors_a.iter().enumerate() {
            for (j, &(y, dy, _)) in anchors_b.iter().enumerate() {
                let total = dx + self.vertex_distance[x][y] + dy;
                if total < best.0 {
                    best = (total, i, j);
                }
            }
        }
        let (x, _, ox) = anchors_a[best.1];
        let (y, _, oy) = anchors_b[best.2];
        let mut segs = Vec::new();
        if a.offset != ox {
            segs.push(Seg {
                edge: a.edge,
                from: a.offset,
                to: ox,
            });
        }
        let mut cur = x;
        while cur != y {
            let e = self.first_edge[cur][y];
            let edge = &self.edges[e];
            let from = if edge.u == cur { 0.0 } else { edge.length };
            segs.push(Seg {
                edge: e,
                from,
                to: edge.length - from,
            });
            cur = other_end(edge, cur);
        }
        if oy != b.offset {
            segs.push(Seg {
                edge: b.edge,
                from: oy,
                to: b.offset,
            });
        }
        segs
    }

    pub fn distance(&self, a: &TreePoint, b: &TreePoint) -> f64 {
        self.path(a, b).iter().map(|s| (s.to - s.from).abs()).sum()
    }

    pub fn geodesic_point(&self, a: &TreePoint, b: &TreePoint, t: f64) -> TreePoint {
        if t <= 0.0 {
            return *a;
        }
        if t >= 1.0 {
            return *b;
        }
        let segs = self.path(a, b);
        let total: f64 = segs.iter().map(|s| (s.to - s.from).abs()).sum();
        let mut remaining = t * total;
        for s in &segs {
            let len = (s.to - s.from).abs();
            if remaining <= len {
                let offset = s.from + (s.to - s.from).signum() * remaining;
                return TreePoint {
                    edge: s.edge,
                    offset,
                };
            }
            remaining -= len;
        }
        *b
    }

    /// Continues the geodesic from `a` through `b` for a further length `s`.
    /// At interior vertices the lowest-index continuing edge is taken;
    /// reaching a leaf with length left over is an error.
    pub fn extend(&self, a: &TreePoint, b: &TreePoint, s: f64) -> Result<TreePoint> {
        let segs = self.path(a, b);
        let Some(last) = segs.last() else {
            return Err(Error::Precondition(
                "extension needs distinct points".into(),
            ));
        };
        let mut edge = last.edge;
        let mut pos = last.to;
        let mut dir = (last.to - last.from).signum();
        let mut remaining = s;
        loop {
            let len = self.edges[edge].length;
            let room = if dir > 0.0 { len - pos } else { pos };
            if remaining <= room {
                let offset = (pos + dir * remaining).clamp(0.0, len);
                return Ok(TreePoint { edge, offset });
            }
            remaining -= room;
            let w = if dir > 0.0 {
                self.edges[edge].v
            } else {
                self.edges[edge].u
            };
            let next = self.adjacency[w]
                .iter()
                .copied()
                .filter(|&e| e != edge)
                .min();
            let Some(next) = next else {
                return Err(Error::ExtensionUnavailable(format!(
                    "reached leaf vertex {w} with {remaining} left"
                )));
            };
            edge = next;
            if self.edges[edge].u == w {
                pos = 0.0;
                dir = 1.0;
            } else {
                pos = self.edges[edge].length;
                dir = -1.0;
            }
        }
    }
}

fn other_end(e: &Edge, w: usize) -> usize {
    if e.u == w {
        e.v
    } else {
        e.u
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_tree() -> MetricTree {
        MetricTree::new(
            4,
            vec![
                Edge {
                    u: 0,
                    v: 1,
                    length: 1.0,
                },
                Edge {
                    u: 2,
                    v: 1,
                    length: 2.0,
                },
                Edge {
                    u: 2,
                    v: 3,
                    length: 0.5,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn rejects_cycles_and_disconnected_inputs() {
        let cyc = MetricTree::new(
            3,
            vec![
                Edge {
                    u: 0,
                    v: 1,
                    length: 1.0,
                },
                Edge {
                    u: 1,
                    v: 2,
                    length: 1.0,
                },
                Edge {
                    u: 2,
                    v: 0,
                    length: 1.0,
                },
            ],
        );
        assert!(cyc.is_err());
        let split = MetricTree::new(
            4,
            vec![
                Edge {
                    u: 0,
                    v: 1,
                    length: 1.0,
                },
                Edge {
                    u: 0,
                    v: 1,
                    length: 1.0,
                },
                Edge {
                    u: 2,
                    v: 3,
                    length: 1.0,
                },
            ],
        );
        assert!(split.is_err());
    }

    #[test]
    fn distances_follow_the_unique_path() {
        let t = path_tree();
        let a = TreePoint {
            edge: 0,
            offset: 0.25,
        };
        let b = TreePoint {
            edge: 2,
            offset: 0.5,
        };
        // 0.75 to vertex 1, 2.0 along edge 1, 0.5 along edge 2.
        assert!((t.distance(&a, &b) - 3.25).abs() < 1e-15);
        assert_eq!(t.distance(&a, &a), 0.0);
        let mid = t.geodesic_point(&a, &b, 0.5);
        assert!((t.distance(&a, &mid) - 1.625).abs() < 1e-12);
        assert!((t.distance(&mid, &b) - 1.625).abs() < 1e-12);
    }

    #[test]
    fn vertex_points_on_different_edges_coincide() {
        let t = path_tree();
        let v1_on_0 = TreePoint {
            edge: 0,
            offset: 1.0,
        };
        let v1_on_1 = TreePoint {
            edge: 1,
            offset: 2.0,
        };
        assert_eq!(t.distance(&v1_on_0, &v1_on_1), 0.0);
    }

    #[test]
    fn extension_stops_at_leaves() {
        let t = path_tree();
        let a = TreePoint {
            edge: 0,
            offset: 0.0,
        };
        let b = TreePoint {
            edge: 0,
            offset: 0.5,
        };
        let x = t.extend(&a, &b, 2.0).unwrap();
        assert!((t.distance(&a, &x) - 2.5).abs() < 1e-12);
        assert!(matches!(
            t.extend(&a, &b, 10.0),
            Err(Error::ExtensionUnavailable(_))
        ));
    }

    #[test]
    fn tripod_bifurcates() {
        let t = MetricTree::tripod(1.0);
        assert!(!t.is_bifurcation_free());
        assert_eq!(t.degree(0), 3);
    }
}

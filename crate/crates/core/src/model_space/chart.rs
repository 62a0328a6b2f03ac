//! Exact convex hulls of finite sets in the Euclidean and hyperbolic planes,
//! computed in a chart where geodesics are straight lines.

use super::{Point, Space};

/// The convex hull of finitely many points of a planar space.
#[derive(Clone, Debug)]
pub struct ConvexRegion {
    vertices: Vec<Point>,
    chart: Vec<[f64; 2]>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl ConvexRegion {
    /// Hull of `points`, or `None` if the space has no planar chart or the
    /// input is empty.
    pub fn new(space: &Space, points: &[Point]) -> Option<ConvexRegion> {
        if !space.is_planar() || points.is_empty() {
            return None;
        }
        let mut idx: Vec<(usize, [f64; 2])> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, space.chart(p).expect("planar space has a chart")))
            .collect();
        idx.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite chart coordinates"));
        idx.dedup_by(|a, b| a.1 == b.1);
        if idx.len() < 3 {
            return Some(ConvexRegion {
                vertices: idx.iter().map(|&(i, _)| points[i].clone()).collect(),
                chart: idx.iter().map(|&(_, c)| c).collect(),
            });
        }
        // Andrew's monotone chain, counter-clockwise, collinear points dropped.
        let mut hull: Vec<(usize, [f64; 2])> = Vec::with_capacity(2 * idx.len());
        for pass in 0..2 {
            let start = hull.len();
            let iter: Box<dyn Iterator<Item = &(usize, [f64; 2])>> = if pass == 0 {
                Box::new(idx.iter())
            } else {
                Box::new(idx.iter().rev())
            };
            for &p in iter {
                while hull.len() >= start + 2
                    && cross(hull[hull.len() - 2].1, hull[hull.len() - 1].1, p.1) <= 0.0
                {
                    hull.pop();
                }
                hull.push(p);
            }
            hull.pop();
        }
        Some(ConvexRegion {
            vertices: hull.iter().map(|&(i, _)| points[i].clone()).collect(),
            chart: hull.iter().map(|&(_, c)| c).collect(),
        })
    }

    /// Hull vertices in counter-clockwise order.
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Edges `i` whose supporting line strictly separates `q` from the region.
    fn visible_edges(&self, q: [f64; 2]) -> impl Iterator<Item = usize> + '_ {
        let n = self.chart.len();
        (0..n).filter(move |&i| cross(self.chart[i], self.chart[(i + 1) % n], q) < 0.0)
    }

    /// Distance from `p` to the hull (0 inside).
    pub fn distance(&self, space: &Space, p: &Point) -> f64 {
        self.nearest(space, p).0
    }

    /// Nearest point of the hull to `p` (`p` itself inside), with its distance.
    pub fn nearest(&self, space: &Space, p: &Point) -> (f64, Point) {
        let seg = |i: usize, j: usize| {
            space
                .segment_nearest(p, &self.vertices[i], &self.vertices[j])
                .expect("planar spaces have unique geodesics")
        };
        match self.vertices.len() {
            1 => (space.d(p, &self.vertices[0]), self.vertices[0].clone()),
            2 => seg(0, 1),
            n => {
                let q = space.chart(p).expect("planar space has a chart");
                if self.visible_edges(q).next().is_none() {
                    return (0.0, p.clone());
                }
                // Outside, the nearest point is on the boundary. All edges
                // are scanned: with nearly collinear vertices an edge can be
                // "visible" by rounding while the nearest point is elsewhere.
                let mut best = seg(0, 1);
                for i in 1..n {
                    let cand = seg(i, (i + 1) % n);
                    if cand.0 < best.0 {
                        best = cand;
                    }
                }
                best
            }
        }
    }
}

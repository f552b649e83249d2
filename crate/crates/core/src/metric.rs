//! Metric spaces hosting facilities and customers.
//!
//! Four spaces are supported: the real line, an `r x c` grid graph, an
//! arbitrary connected unweighted graph and the Euclidean plane. Grid and
//! graph distances are hop counts and always integral.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in one of the metric spaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Line(f64),
    /// `(row, col)`.
    Grid(usize, usize),
    Vertex(usize),
    Plane(f64, f64),
}

impl Location {
    pub fn kind(&self) -> &'static str {
        match self {
            Location::Line(_) => "line",
            Location::Grid(..) => "grid",
            Location::Vertex(_) => "graph",
            Location::Plane(..) => "plane",
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(x) => write!(f, "{x}"),
            Location::Grid(r, c) => write!(f, "({r},{c})"),
            Location::Vertex(v) => write!(f, "v{v}"),
            Location::Plane(x, y) => write!(f, "({x},{y})"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphRepr {
    vertices: usize,
    edges: Vec<[usize; 2]>,
}

/// Connected, unweighted, simple graph with a precomputed distance table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct Graph {
    vertices: usize,
    edges: Vec<[usize; 2]>,
    adjacency: Vec<Vec<usize>>,
    dist: Vec<u32>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges
    }
}

impl TryFrom<GraphRepr> for Graph {
    type Error = Error;

    fn try_from(repr: GraphRepr) -> Result<Self> {
        Graph::new(repr.vertices, repr.edges)
    }
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr {
            vertices: g.vertices,
            edges: g.edges,
        }
    }
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges, out-of-range
    /// endpoints and disconnected inputs.
    pub fn new(vertices: usize, edges: Vec<[usize; 2]>) -> Result<Self> {
        if vertices == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        let mut seen = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); vertices];
        for &[u, v] in &edges {
            if u >= vertices || v >= vertices {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u},{v}) references a vertex outside 0..{vertices}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop on vertex {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({u},{v})")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        let mut dist = vec![u32::MAX; vertices * vertices];
        for s in 0..vertices {
            bfs_into(&adjacency, s, &mut dist[s * vertices..(s + 1) * vertices]);
        }
        if let Some(v) = (0..vertices).find(|&v| dist[v] == u32::MAX) {
            return Err(Error::InvalidGraph(format!(
                "graph is disconnected: vertex {v} unreachable from 0"
            )));
        }
        Ok(Graph {
            vertices,
            edges,
            adjacency,
            dist,
        })
    }

    /// Path graph `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Result<Self> {
        Graph::new(n, (1..n).map(|v| [v - 1, v]).collect())
    }

    /// Cycle on `n >= 3` vertices.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGraph(
                "a cycle needs at least 3 vertices".into(),
            ));
        }
        let mut edges: Vec<_> = (1..n).map(|v| [v - 1, v]).collect();
        edges.push([n - 1, 0]);
        Graph::new(n, edges)
    }

    /// Explicit grid graph; vertex `(row, col)` gets id `row * cols + col`.
    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    edges.push([v, v + 1]);
                }
                if r + 1 < rows {
                    edges.push([v, v + cols]);
                }
            }
        }
        Graph::new(rows * cols, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn distance(&self, u: usize, v: usize) -> Result<u32> {
        if u >= self.vertices || v >= self.vertices {
            return Err(Error::InvalidArgument(format!(
                "vertex out of range 0..{}",
                self.vertices
            )));
        }
        match self.dist[u * self.vertices + v] {
            u32::MAX => Err(Error::Unreachable(u, v)),
            d => Ok(d),
        }
    }

    /// Eccentricity, radius, diameter and center.
    pub fn metrics(&self) -> GraphMetrics {
        let n = self.vertices;
        let eccentricity: Vec<u32> = (0..n)
            .map(|u| *self.dist[u * n..(u + 1) * n].iter().max().unwrap())
            .collect();
        let radius = *eccentricity.iter().min().unwrap();
        let diameter = *eccentricity.iter().max().unwrap();
        let center = (0..n).filter(|&v| eccentricity[v] == radius).collect();
        GraphMetrics {
            n,
            dist: self.dist.clone(),
            eccentricity,
            radius,
            diameter,
            center,
        }
    }
}

fn bfs_into(adjacency: &[Vec<usize>], source: usize, out: &mut [u32]) {
    out[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &w in &adjacency[u] {
            if out[w] == u32::MAX {
                out[w] = out[u] + 1;
                queue.push_back(w);
            }
        }
    }
}

/// All-pairs distances plus eccentricity-derived quantities of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphMetrics {
    n: usize,
    dist: Vec<u32>,
    pub eccentricity: Vec<u32>,
    pub radius: u32,
    pub diameter: u32,
    pub center: Vec<usize>,
}

impl GraphMetrics {
    pub fn distance(&self, u: usize, v: usize) -> u32 {
        self.dist[u * self.n + v]
    }
}

/// The space facilities and customers live in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MetricSpace {
    Line,
    Grid { rows: usize, cols: usize },
    Graph(Graph),
    Plane,
}

impl MetricSpace {
    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(
                "grid dimensions must be >= 1".into(),
            ));
        }
        Ok(MetricSpace::Grid { rows, cols })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MetricSpace::Line => "line",
            MetricSpace::Grid { .. } => "grid",
            MetricSpace::Graph(_) => "graph",
            MetricSpace::Plane => "plane",
        }
    }

    /// True when all distances are integers (given integral line points).
    pub fn is_discrete(&self) -> bool {
        matches!(self, MetricSpace::Grid { .. } | MetricSpace::Graph(_))
    }

    /// Checks that `loc` is a point of this space.
    pub fn check(&self, loc: &Location) -> Result<()> {
        match (self, loc) {
            (MetricSpace::Line, Location::Line(x)) if x.is_finite() => Ok(()),
            (MetricSpace::Plane, Location::Plane(x, y)) if x.is_finite() && y.is_finite() => Ok(()),
            (MetricSpace::Grid { rows, cols }, Location::Grid(r, c)) if r < rows && c < cols => {
                Ok(())
            }
            (MetricSpace::Graph(g), Location::Vertex(v)) if *v < g.vertex_count() => Ok(()),
            (space, loc) if space.kind() == loc.kind() => Err(Error::InvalidArgument(format!(
                "location {loc} lies outside the {} space",
                space.kind()
            ))),
            (space, loc) => Err(Error::InvalidArgument(format!(
                "{} location {loc} used in a {} space",
                loc.kind(),
                space.kind()
            ))),
        }
    }

    /// Distance between two points of this space.
    pub fn distance(&self, a: &Location, b: &Location) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (self, a, b) {
            (MetricSpace::Line, Location::Line(x), Location::Line(y)) => (x - y).abs(),
            (MetricSpace::Grid { .. }, Location::Grid(r1, c1), Location::Grid(r2, c2)) => {
                (r1.abs_diff(*r2) + c1.abs_diff(*c2)) as f64
            }
            (MetricSpace::Graph(g), Location::Vertex(u), Location::Vertex(v)) => {
                g.distance(*u, *v)? as f64
            }
            (MetricSpace::Plane, Location::Plane(x1, y1), Location::Plane(x2, y2)) => {
                (x1 - x2).hypot(y1 - y2)
            }
            _ => unreachable!("checked above"),
        })
    }

    /// Number of vertices for the discrete spaces.
    pub fn vertex_count(&self) -> Option<usize> {
        match self {
            MetricSpace::Grid { rows, cols } => Some(rows * cols),
            MetricSpace::Graph(g) => Some(g.vertex_count()),
            _ => None,
        }
    }

    /// Dense vertex index of a discrete location.
    pub fn vertex_index(&self, loc: &Location) -> Option<usize> {
        match (self, loc) {
            (MetricSpace::Grid { cols, .. }, Location::Grid(r, c)) => Some(r * cols + c),
            (MetricSpace::Graph(_), Location::Vertex(v)) => Some(*v),
            _ => None,
        }
    }

    /// Neighbours of a vertex index in the discrete spaces.
    pub fn vertex_neighbors(&self, v: usize) -> Vec<usize> {
        match self {
            MetricSpace::Grid { rows, cols } => {
                let (r, c) = (v / cols, v % cols);
                let mut out = Vec::with_capacity(4);
                if r > 0 {
                    out.push(v - cols);
                }
                if c > 0 {
                    out.push(v - 1);
                }
                if c + 1 < *cols {
                    out.push(v + 1);
                }
                if r + 1 < *rows {
                    out.push(v + cols);
                }
                out
            }
            MetricSpace::Graph(g) => g.neighbors(v).to_vec(),
            _ => Vec::new(),
        }
    }

    /// Graph metrics of a graph space.
    pub fn graph_metrics(&self) -> Result<GraphMetrics> {
        match self {
            MetricSpace::Graph(g) => Ok(g.metrics()),
            MetricSpace::Grid { rows, cols } => Ok(Graph::grid(*rows, *cols)?.metrics()),
            other => Err(Error::InvalidArgument(format!(
                "graph metrics need a graph space, got {}",
                other.kind()
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_distance_examples() {
        let g = MetricSpace::grid(4, 4).unwrap();
        let d = |a, b| g.distance(&a, &b).unwrap();
        assert_eq!(d(Location::Grid(0, 0), Location::Grid(0, 0)), 0.0);
        assert_eq!(d(Location::Grid(0, 0), Location::Grid(2, 3)), 5.0);
    }

    #[test]
    fn plane_distance_345() {
        let d = MetricSpace::Plane
            .distance(&Location::Plane(0.0, 0.0), &Location::Plane(3.0, 4.0))
            .unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn mismatched_location_is_rejected() {
        let err = MetricSpace::Line
            .distance(&Location::Line(0.0), &Location::Grid(0, 0))
            .unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
        let g = MetricSpace::grid(2, 2).unwrap();
        assert!(g.check(&Location::Grid(2, 0)).is_err());
    }

    #[test]
    fn path_and_cycle_metrics() {
        let m = Graph::path(5).unwrap().metrics();
        assert_eq!(m.radius, 2);
        assert_eq!(m.diameter, 4);
        assert_eq!(m.center, vec![2]);

        let m = Graph::cycle(4).unwrap().metrics();
        assert_eq!(m.radius, 2);
        assert_eq!(m.center, vec![0, 1, 2, 3]);
    }

    #[test]
    fn three_by_three_grid_center() {
        let m = MetricSpace::grid(3, 3).unwrap().graph_metrics().unwrap();
        assert_eq!(m.radius, 2);
        assert_eq!(m.center, vec![4]);
    }

    #[test]
    fn graph_construction_errors() {
        assert!(matches!(
            Graph::new(3, vec![[0, 1]]),
            Err(Error::InvalidGraph(_))
        ));
        assert!(Graph::new(2, vec![[0, 0], [0, 1]]).is_err());
        assert!(Graph::new(2, vec![[0, 1], [1, 0]]).is_err());
        assert!(Graph::new(2, vec![[0, 2]]).is_err());
        assert!(Graph::new(0, vec![]).is_err());
    }

    #[test]
    fn graph_json_is_validated() {
        let ok: MetricSpace =
            serde_json::from_str(r#"{"type":"graph","vertices":3,"edges":[[0,1],[1,2]]}"#).unwrap();
        assert_eq!(ok, MetricSpace::Graph(Graph::path(3).unwrap()));
        let bad =
            serde_json::from_str::<MetricSpace>(r#"{"type":"graph","vertices":3,"edges":[[0,1]]}"#);
        assert!(bad.is_err());
        let grid: MetricSpace =
            serde_json::from_str(r#"{"type":"grid","rows":2,"cols":5}"#).unwrap();
        assert_eq!(grid, MetricSpace::Grid { rows: 2, cols: 5 });
    }

    #[test]
    fn location_json_shapes() {
        let locs = [
            Location::Line(2.5),
            Location::Grid(1, 2),
            Location::Vertex(3),
            Location::Plane(0.5, -1.0),
        ];
        let json = serde_json::to_string(&locs).unwrap();
        assert_eq!(
            json,
            r#"[{"line":2.5},{"grid":[1,2]},{"vertex":3},{"plane":[0.5,-1.0]}]"#
        );
        let back: Vec<Location> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, locs);
    }

    #[test]
    fn grid_neighbors_match_explicit_graph() {
        let space = MetricSpace::grid(3, 4).unwrap();
        let g = Graph::grid(3, 4).unwrap();
        for v in 0..12 {
            assert_eq!(space.vertex_neighbors(v), g.neighbors(v));
        }
    }
}

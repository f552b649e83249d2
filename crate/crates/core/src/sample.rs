//! Seeded random instances for oracle and property checks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Graph, Location, MetricSpace};
use crate::model::{Facility, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Line,
    Grid,
    Graph,
    Plane,
}

impl SpaceKind {
    pub const ALL: [SpaceKind; 4] = [
        SpaceKind::Line,
        SpaceKind::Grid,
        SpaceKind::Graph,
        SpaceKind::Plane,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::Line => "line",
            SpaceKind::Grid => "grid",
            SpaceKind::Graph => "graph",
            SpaceKind::Plane => "plane",
        }
    }
}

/// Random connected graph: a random spanning tree plus `extra` random edges.
pub fn random_connected_graph(rng: &mut impl Rng, vertices: usize, extra: usize) -> Result<Graph> {
    if vertices == 0 {
        return Err(Error::InvalidArgument("graph needs a vertex".into()));
    }
    let mut order: Vec<usize> = (0..vertices).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 1..vertices {
        let parent = order[rng.gen_range(0..i)];
        edges.push([parent, order[i]]);
    }
    if vertices > 1 {
        for _ in 0..extra {
            let u = rng.gen_range(0..vertices);
            let v = rng.gen_range(0..vertices);
            if u != v
                && !edges
                    .iter()
                    .any(|e| (e[0], e[1]) == (u, v) || (e[0], e[1]) == (v, u))
            {
                edges.push([u, v]);
            }
        }
    }
    Graph::new(vertices, edges)
}

/// A feasible instance with `facilities` facilities of capacity in
/// `1..=max_capacity` and at most `customers` customers (clamped to the
/// total capacity).
///
/// Line points are integers, so line, grid and graph costs are exact.
pub fn random_instance(
    rng: &mut impl Rng,
    kind: SpaceKind,
    facilities: usize,
    customers: usize,
    max_capacity: usize,
) -> Result<Instance> {
    if facilities == 0 || max_capacity == 0 {
        return Err(Error::InvalidArgument(
            "need at least one facility of positive capacity".into(),
        ));
    }
    let space = match kind {
        SpaceKind::Line => MetricSpace::Line,
        SpaceKind::Plane => MetricSpace::Plane,
        SpaceKind::Grid => MetricSpace::grid(rng.gen_range(1..=5), rng.gen_range(2..=5))?,
        SpaceKind::Graph => {
            let n = rng.gen_range(2..=10);
            let extra = rng.gen_range(0..=n);
            MetricSpace::Graph(random_connected_graph(rng, n, extra)?)
        }
    };
    let point = |rng: &mut dyn rand::RngCore| -> Location {
        match &space {
            MetricSpace::Line => Location::Line(rng.gen_range(0..20) as f64),
            MetricSpace::Plane => {
                Location::Plane(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0))
            }
            MetricSpace::Grid { rows, cols } => {
                Location::Grid(rng.gen_range(0..*rows), rng.gen_range(0..*cols))
            }
            MetricSpace::Graph(g) => Location::Vertex(rng.gen_range(0..g.vertex_count())),
        }
    };
    let facs: Vec<Facility> = (0..facilities)
        .map(|id| Facility::new(id, point(rng), rng.gen_range(1..=max_capacity)))
        .collect();
    let cap: usize = facs.iter().map(|f| f.capacity).sum();
    let custs = (0..customers.min(cap)).map(|_| point(rng)).collect();
    Ok(Instance::new(space, facs, custs))
}

/// Random-instance parameters as a named generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub space: SpaceKind,
    pub facilities: usize,
    pub customers: usize,
    #[serde(default = "one")]
    pub capacity: usize,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

impl RandomSpec {
    pub fn generate(&self) -> Result<Instance> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        random_instance(
            &mut rng,
            self.space,
            self.facilities,
            self.customers,
            self.capacity,
        )
    }
}

//! Worst-case input families and the chasing adversary.
//!
//! Most families follow the same pattern: start with one or two customers
//! placed between facilities, then put every new customer exactly on the
//! facility the algorithm just used. Where the construction depends on how
//! the algorithm breaks a distance tie, facility ids are ordered so that the
//! lowest-id rule makes the adversarial choice.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Graph, Location, MetricSpace};
use crate::model::{Facility, Instance};
use crate::online::{Algorithm, OnlineRunner};
use crate::sample::RandomSpec;

/// Places `seeds` first, then each further customer on the facility the
/// algorithm assigned to the previous one, until every facility is used.
pub fn adaptive_adversary(
    algorithm: Algorithm,
    space: &MetricSpace,
    facilities: &[Facility],
    seeds: &[Location],
) -> Result<Instance> {
    if let Some(f) = facilities.iter().find(|f| f.capacity != 1) {
        return Err(Error::InvalidArgument(format!(
            "adaptive adversary needs unit capacities, facility {} has {}",
            f.id, f.capacity
        )));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidArgument(
            "adversary needs a seed customer".into(),
        ));
    }
    let mut runner = OnlineRunner::new(algorithm, space, facilities)?;
    let mut customers = Vec::with_capacity(facilities.len());
    let mut last = None;
    for &seed in seeds.iter().take(facilities.len()) {
        last = Some(runner.serve(seed)?.facility);
        customers.push(seed);
    }
    while customers.len() < facilities.len() {
        let at = facilities[last.expect("at least one seed served")].location;
        last = Some(runner.serve(at)?.facility);
        customers.push(at);
    }
    Ok(Instance::new(space.clone(), facilities.to_vec(), customers))
}

/// Multiplies every capacity by `l` and repeats the arrival sequence `l`
/// times, one repetition per partition class.
pub fn replicate_capacity(instance: &Instance, l: usize) -> Result<Instance> {
    if l == 0 {
        return Err(Error::InvalidArgument(
            "replication factor must be >= 1".into(),
        ));
    }
    let facilities = instance
        .facilities
        .iter()
        .map(|f| Facility::new(f.id, f.location, f.capacity * l))
        .collect();
    let customers = (0..l)
        .flat_map(|_| instance.customers.iter().copied())
        .collect();
    Ok(Instance::new(instance.space.clone(), facilities, customers))
}

fn grid_cells(path: &[(usize, usize)]) -> impl Iterator<Item = Location> + '_ {
    path.iter().map(|&(r, c)| Location::Grid(r, c))
}

fn transpose(path: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    path.into_iter().map(|(r, c)| (c, r)).collect()
}

/// Hamiltonian path of the grid minus the corner `(0,0)`, starting next to
/// the corner and ending as far from it as parity allows.
fn chase_path(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let row_snake = |upto: usize| {
        let mut path = Vec::new();
        for r in 0..upto {
            if r % 2 == 0 {
                let start = if r == 0 { 1 } else { 0 };
                path.extend((start..cols).map(|c| (r, c)));
            } else {
                path.extend((0..cols).rev().map(|c| (r, c)));
            }
        }
        path
    };
    let both_even = rows.is_multiple_of(2) && cols.is_multiple_of(2);
    if rows % 2 == 1 || (rows == 2 && cols == 2) {
        row_snake(rows)
    } else if !both_even || rows == 2 {
        transpose(chase_path(cols, rows))
    } else {
        // snake down to row r-3, then zigzag through the last two rows
        let mut path = row_snake(rows - 2);
        for c in 0..cols {
            if c % 2 == 0 {
                path.extend([(rows - 2, c), (rows - 1, c)]);
            } else {
                path.extend([(rows - 1, c), (rows - 2, c)]);
            }
        }
        path
    }
}

/// Greedy chase on an `r x c` grid: a facility on every vertex except one
/// neighbour `v2` of the corner `v1 = (0,0)`.
///
/// The first customer arrives on `v2`; each later customer arrives on the
/// facility Greedy just used. Facility ids follow the chase, so every tie
/// resolves away from `v1` and the last customer travels back to `v1`.
/// The optimum costs 1. The last hop is `r + c - 2` unless both sides are
/// even, where parity limits it to `r + c - 3`.
pub fn grid_greedy_chase(rows: usize, cols: usize) -> Result<Instance> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidArgument("grid chase needs r, c >= 2".into()));
    }
    let path = chase_path(rows, cols);
    let space = MetricSpace::grid(rows, cols)?;
    let facilities =
        Instance::facilities_at(grid_cells(&path[1..]).chain([Location::Grid(0, 0)]), 1);
    let customers = grid_cells(&path).collect();
    Ok(Instance::new(space, facilities, customers))
}

/// Length of the last Greedy hop on [`grid_greedy_chase`].
pub fn grid_greedy_chase_last_hop(rows: usize, cols: usize) -> usize {
    if rows.is_multiple_of(2) && cols.is_multiple_of(2) {
        rows + cols - 3
    } else {
        rows + cols - 2
    }
}

/// Chase cells for the tie-free layout on a grid with at least 3 columns.
fn alt_path(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut path: Vec<(usize, usize)> = (3..cols).map(|c| (0, c)).collect();
    let mut at_right = true;
    let mut r = 0;
    while r + 2 < rows {
        let side = if at_right { cols - 1 } else { 0 };
        path.push((r + 1, side));
        r += 2;
        if at_right {
            path.extend((0..cols).rev().map(|c| (r, c)));
        } else {
            path.extend((0..cols).map(|c| (r, c)));
        }
        at_right = !at_right;
    }
    if path.is_empty() {
        path.push((1, cols - 1));
    }
    path
}

/// Greedy trap without distance ties.
///
/// Facilities snake along every other row, joined by single connector
/// cells; the first customer sits two steps from the corner facility `v1`
/// but one step from the snake, so Greedy walks the whole snake and the last
/// customer pays the long way back to `v1`.
pub fn grid_greedy_alt(rows: usize, cols: usize) -> Result<Instance> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidArgument("grid trap needs r, c >= 2".into()));
    }
    let space = MetricSpace::grid(rows, cols)?;
    let (first, path) = if rows == 2 && cols == 2 {
        ((1, 1), vec![(1, 0)])
    } else if cols >= 3 {
        ((0, 2), alt_path(rows, cols))
    } else {
        ((2, 0), transpose(alt_path(cols, rows)))
    };
    let facilities = Instance::facilities_at(grid_cells(&path).chain([Location::Grid(0, 0)]), 1);
    let mut customers = vec![Location::Grid(first.0, first.1)];
    customers.extend(grid_cells(&path));
    Ok(Instance::new(space, facilities, customers))
}

/// Vertices of an `n x n` grid at distance exactly `radius` from the centre,
/// in row-major order.
pub fn ring_vertices(n: usize, radius: usize) -> Vec<Location> {
    let m = n / 2;
    let mut out = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if r.abs_diff(m) + c.abs_diff(m) == radius {
                out.push(Location::Grid(r, c));
            }
        }
    }
    out
}

/// Largest set of vertices sharing one distance from the centre of an
/// `n x n` grid (odd `n`).
pub fn max_equidistant_set(n: usize) -> usize {
    (1..=n)
        .map(|d| ring_vertices(n, d).len())
        .max()
        .unwrap_or(0)
}

/// The `2n - 2` row-counting bound on equidistant sets.
pub fn equidistant_row_bound(n: usize) -> usize {
    2 * n - 2
}

/// Optimal-Fill chase on a diamond of unit facilities around the centre of
/// an odd `n x n` grid; the first customer sits on the centre.
pub fn grid_optfill_ring(n: usize, radius: usize) -> Result<Instance> {
    if n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(
            "ring family needs an odd grid so a single centre exists".into(),
        ));
    }
    if radius == 0 || radius > n / 2 {
        return Err(Error::InvalidArgument(format!(
            "ring radius must lie in 1..={}",
            n / 2
        )));
    }
    let space = MetricSpace::grid(n, n)?;
    let facilities = Instance::facilities_at(ring_vertices(n, radius), 1);
    let centre = Location::Grid(n / 2, n / 2);
    adaptive_adversary(Algorithm::OptimalFill, &space, &facilities, &[centre])
}

/// Facility on every vertex except a central one; the first customer
/// arrives on that vertex and the adversary chases `algorithm`.
pub fn grid_center_chase(rows: usize, cols: usize, algorithm: Algorithm) -> Result<Instance> {
    if rows * cols < 2 {
        return Err(Error::InvalidArgument(
            "grid needs at least two vertices".into(),
        ));
    }
    let space = MetricSpace::grid(rows, cols)?;
    let centre = (rows / 2, cols / 2);
    let cells = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .filter(|&rc| rc != centre)
        .map(|(r, c)| Location::Grid(r, c));
    let facilities = Instance::facilities_at(cells, 1);
    adaptive_adversary(
        algorithm,
        &space,
        &facilities,
        &[Location::Grid(centre.0, centre.1)],
    )
}

/// Spider: a centre vertex `0` with `spokes` paths of `length` edges.
/// Spoke `i` holds vertices `1 + i*length ..= (i+1)*length`, leaf last.
pub fn spider_graph(spokes: usize, length: usize) -> Result<Graph> {
    let mut edges = Vec::new();
    for i in 0..spokes {
        let base = 1 + i * length;
        edges.push([0, base]);
        for d in 1..length {
            edges.push([base + d - 1, base + d]);
        }
    }
    Graph::new(1 + spokes * length, edges)
}

/// Optimal-Fill chase on a spider with a facility on every leaf and the
/// first customer on the centre.
pub fn spider(spokes: usize, length: usize) -> Result<Instance> {
    if spokes < 2 || length < 1 {
        return Err(Error::InvalidArgument(
            "spider needs k >= 2 and s >= 1".into(),
        ));
    }
    let space = MetricSpace::Graph(spider_graph(spokes, length)?);
    let leaves = (0..spokes).map(|i| Location::Vertex((i + 1) * length));
    let facilities = Instance::facilities_at(leaves, 1);
    adaptive_adversary(
        Algorithm::OptimalFill,
        &space,
        &facilities,
        &[Location::Vertex(0)],
    )
}

/// The same layout on a path of `m` vertices and on the cycle closing it.
///
/// Every vertex holds a facility and the first two customers arrive on the
/// middle vertex `(m-1)/2`; the rest of the arrival sequence is the
/// Optimal-Fill chase on the path, which zig-zags outwards until the last
/// customer crosses the whole path. The cycle reuses the same arrival
/// sequence.
pub fn path_and_cycle(m: usize) -> Result<(Instance, Instance)> {
    if m < 3 {
        return Err(Error::InvalidArgument(
            "path/cycle family needs m >= 3".into(),
        ));
    }
    let path_space = MetricSpace::Graph(Graph::path(m)?);
    let facilities = Instance::facilities_at((0..m).map(Location::Vertex), 1);
    let mid = Location::Vertex((m - 1) / 2);
    let on_path = adaptive_adversary(
        Algorithm::OptimalFill,
        &path_space,
        &facilities,
        &[mid, mid],
    )?;
    let on_cycle = Instance::new(
        MetricSpace::Graph(Graph::cycle(m)?),
        on_path.facilities.clone(),
        on_path.customers.clone(),
    );
    Ok((on_path, on_cycle))
}

/// Facilities on the vertices of a regular `n`-gon with side `spacing`.
///
/// Facility `0` sits at angle zero and ids increase around the polygon, so
/// facility `n-1` neighbours facility `0`. The first customer arrives at the
/// midpoint of the edge between them, shifted `offset` towards facility `0`;
/// every later customer arrives on the facility just used. With a zero
/// offset the tie goes to facility `0`, and each later tie to the next id,
/// so the chase runs once around the polygon.
pub fn plane_chain(n: usize, spacing: f64, offset: f64) -> Result<Instance> {
    if n < 3 {
        return Err(Error::InvalidArgument("plane chain needs n >= 3".into()));
    }
    if !(spacing > 0.0) || !(0.0..spacing / 2.0).contains(&offset) {
        return Err(Error::InvalidArgument(
            "plane chain needs p > 0 and 0 <= offset < p/2".into(),
        ));
    }
    let radius = spacing / (2.0 * (PI / n as f64).sin());
    let vertex = |k: usize| {
        let a = 2.0 * PI * k as f64 / n as f64;
        (radius * a.cos(), radius * a.sin())
    };
    let facilities =
        Instance::facilities_at((0..n).map(vertex).map(|(x, y)| Location::Plane(x, y)), 1);
    let (ax, ay) = vertex(n - 1);
    let (bx, by) = vertex(0);
    let t = 0.5 + offset / spacing;
    let first = Location::Plane(ax + t * (bx - ax), ay + t * (by - ay));
    let mut customers = vec![first];
    customers.extend(facilities[..n - 1].iter().map(|f| f.location));
    Ok(Instance::new(MetricSpace::Plane, facilities, customers))
}

/// Unit facilities on `0..m`, two customers on the middle facility, then
/// the chase against `algorithm`.
pub fn line_chase(m: usize, algorithm: Algorithm) -> Result<Instance> {
    if m.is_multiple_of(2) || m < 3 {
        return Err(Error::InvalidArgument(
            "line chase needs an odd m >= 3".into(),
        ));
    }
    let facilities = Instance::facilities_at((0..m).map(|x| Location::Line(x as f64)), 1);
    let mid = Location::Line((m / 2) as f64);
    adaptive_adversary(algorithm, &MetricSpace::Line, &facilities, &[mid, mid])
}

/// A named, parameterised generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    GridGreedyChase {
        r: usize,
        c: usize,
        #[serde(default = "one")]
        l: usize,
    },
    GridGreedyAlt {
        r: usize,
        c: usize,
        #[serde(default = "one")]
        l: usize,
    },
    GridOptfillRing {
        n: usize,
        r: usize,
    },
    GridCenterChase {
        r: usize,
        c: usize,
        #[serde(default = "default_chaser")]
        chase: String,
    },
    Spider {
        k: usize,
        s: usize,
    },
    Path {
        m: usize,
    },
    Cycle {
        m: usize,
    },
    PlaneChain {
        n: usize,
        p: f64,
        #[serde(default)]
        offset: f64,
    },
    LineChase {
        m: usize,
        #[serde(default = "default_line_chaser")]
        chase: String,
    },
    LineTrap {
        k: usize,
        #[serde(default = "default_gap")]
        gap: f64,
        #[serde(default = "default_line_chaser")]
        chase: String,
    },
    Random(RandomSpec),
}

fn one() -> usize {
    1
}

fn default_chaser() -> String {
    "optimal-fill".into()
}

fn default_line_chaser() -> String {
    "greedy".into()
}

fn default_gap() -> f64 {
    1e-3
}

impl GeneratorSpec {
    pub fn family(&self) -> &'static str {
        match self {
            GeneratorSpec::GridGreedyChase { .. } => "grid-greedy-chase",
            GeneratorSpec::GridGreedyAlt { .. } => "grid-greedy-alt",
            GeneratorSpec::GridOptfillRing { .. } => "grid-optfill-ring",
            GeneratorSpec::GridCenterChase { .. } => "grid-center-chase",
            GeneratorSpec::Spider { .. } => "spider",
            GeneratorSpec::Path { .. } => "path",
            GeneratorSpec::Cycle { .. } => "cycle",
            GeneratorSpec::PlaneChain { .. } => "plane-chain",
            GeneratorSpec::LineChase { .. } => "line-chase",
            GeneratorSpec::LineTrap { .. } => "line-trap",
            GeneratorSpec::Random(_) => "random",
        }
    }

    /// Canonical `key=value;...` parameter string.
    pub fn params(&self) -> String {
        match self {
            GeneratorSpec::GridGreedyChase { r, c, l }
            | GeneratorSpec::GridGreedyAlt { r, c, l } => {
                format!("r={r};c={c};l={l}")
            }
            GeneratorSpec::GridOptfillRing { n, r } => format!("n={n};r={r}"),
            GeneratorSpec::GridCenterChase { r, c, chase } => format!("r={r};c={c};chase={chase}"),
            GeneratorSpec::Spider { k, s } => format!("k={k};s={s}"),
            GeneratorSpec::Path { m } | GeneratorSpec::Cycle { m } => format!("m={m}"),
            GeneratorSpec::PlaneChain { n, p, offset } => format!("n={n};p={p};offset={offset}"),
            GeneratorSpec::LineChase { m, chase } => format!("m={m};chase={chase}"),
            GeneratorSpec::LineTrap { k, gap, chase } => format!("k={k};gap={gap};chase={chase}"),
            GeneratorSpec::Random(r) => format!(
                "space={};facilities={};customers={};capacity={};seed={}",
                r.space.name(),
                r.facilities,
                r.customers,
                r.capacity,
                r.seed
            ),
        }
    }

    pub fn generate(&self) -> Result<Instance> {
        match self {
            GeneratorSpec::GridGreedyChase { r, c, l } => {
                replicate_capacity(&grid_greedy_chase(*r, *c)?, *l)
            }
            GeneratorSpec::GridGreedyAlt { r, c, l } => {
                replicate_capacity(&grid_greedy_alt(*r, *c)?, *l)
            }
            GeneratorSpec::GridOptfillRing { n, r } => grid_optfill_ring(*n, *r),
            GeneratorSpec::GridCenterChase { r, c, chase } => {
                grid_center_chase(*r, *c, chase.parse()?)
            }
            GeneratorSpec::Spider { k, s } => spider(*k, *s),
            GeneratorSpec::Path { m } => Ok(path_and_cycle(*m)?.0),
            GeneratorSpec::Cycle { m } => Ok(path_and_cycle(*m)?.1),
            GeneratorSpec::PlaneChain { n, p, offset } => plane_chain(*n, *p, *offset),
            GeneratorSpec::LineChase { m, chase } => line_chase(*m, chase.parse()?),
            GeneratorSpec::LineTrap { k, gap, chase } => line_trap(*k, *gap, chase.parse()?),
            GeneratorSpec::Random(r) => r.generate(),
        }
    }

    /// Whether the output depends on a seed.
    pub fn is_seeded(&self) -> bool {
        matches!(self, GeneratorSpec::Random(_))
    }

    /// The same spec with its seed replaced; unseeded families are returned
    /// unchanged.
    pub fn with_seed(&self, seed: u64) -> GeneratorSpec {
        match self {
            GeneratorSpec::Random(r) => GeneratorSpec::Random(RandomSpec { seed, ..r.clone() }),
            other => other.clone(),
        }
    }

    /// Competitive-ratio bound this family is checked against for
    /// `algorithm`, if any.
    pub fn bound(&self, algorithm: Algorithm, instance: &Instance) -> Option<f64> {
        let facilities = instance.facilities.len() as f64;
        match (self, algorithm) {
            (
                GeneratorSpec::GridGreedyChase { r, c, .. }
                | GeneratorSpec::GridGreedyAlt { r, c, .. },
                Algorithm::Greedy,
            ) => Some((r * c + r + c) as f64),
            (
                GeneratorSpec::GridOptfillRing { .. }
                | GeneratorSpec::GridCenterChase { .. }
                | GeneratorSpec::Spider { .. }
                | GeneratorSpec::Path { .. }
                | GeneratorSpec::Cycle { .. },
                Algorithm::OptimalFill,
            ) => Some(2.0 * facilities),
            (GeneratorSpec::PlaneChain { n, .. }, Algorithm::Voronoi(_)) => {
                Some((2 * n - 1) as f64)
            }
            _ => None,
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.family(), self.params())
    }
}

/// One-sided line trap: unit facilities on `1..=k` and one at `-(1 + gap)`,
/// the first customer at `0`, then the chase against `algorithm`.
///
/// Greedy takes the slightly nearer right side and is chased to `k` before
/// it has to come back, while the optimum pays only `1 + gap`.
pub fn line_trap(k: usize, gap: f64, algorithm: Algorithm) -> Result<Instance> {
    if k == 0 || !(gap > 0.0) {
        return Err(Error::InvalidArgument(
            "line trap needs k >= 1 and gap > 0".into(),
        ));
    }
    let mut locs = vec![Location::Line(-(1.0 + gap))];
    locs.extend((1..=k).map(|x| Location::Line(x as f64)));
    let facilities = Instance::facilities_at(locs, 1);
    adaptive_adversary(
        algorithm,
        &MetricSpace::Line,
        &facilities,
        &[Location::Line(0.0)],
    )
}

//! Instances, assignment traces and the predicates defined over them.

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Location, MetricSpace};

/// Largest accepted mismatch between a recorded plane cost and the metric.
pub const PLANE_COST_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facility {
    pub id: usize,
    pub location: Location,
    pub capacity: usize,
}

impl Facility {
    pub fn new(id: usize, location: Location, capacity: usize) -> Self {
        Facility {
            id,
            location,
            capacity,
        }
    }
}

/// Facilities plus a customer arrival sequence in a metric space.
///
/// Facility ids are dense: the facility at index `i` has id `i`. Every
/// algorithm breaks distance ties towards the lower id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub space: MetricSpace,
    pub facilities: Vec<Facility>,
    pub customers: Vec<Location>,
}

/// A single violated instance invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    FacilityIdMismatch { index: usize, id: usize },
    ZeroCapacity { facility: usize },
    InvalidFacilityLocation { facility: usize, reason: String },
    InvalidCustomerLocation { customer: usize, reason: String },
    CapacityOverflow { customers: usize, capacity: usize },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::FacilityIdMismatch { index, id } => {
                write!(
                    f,
                    "facility at index {index} has id {id}; ids must equal their index"
                )
            }
            Diagnostic::ZeroCapacity { facility } => {
                write!(f, "facility {facility} has capacity 0")
            }
            Diagnostic::InvalidFacilityLocation { facility, reason } => {
                write!(f, "facility {facility}: invalid location: {reason}")
            }
            Diagnostic::InvalidCustomerLocation { customer, reason } => {
                write!(f, "customer {customer}: invalid location: {reason}")
            }
            Diagnostic::CapacityOverflow {
                customers,
                capacity,
            } => write!(
                f,
                "capacity overflow: {customers} customers but total capacity {capacity}"
            ),
        }
    }
}

impl Instance {
    pub fn new(space: MetricSpace, facilities: Vec<Facility>, customers: Vec<Location>) -> Self {
        Instance {
            space,
            facilities,
            customers,
        }
    }

    /// Facilities at the given locations, ids in iteration order.
    pub fn facilities_at(
        locations: impl IntoIterator<Item = Location>,
        capacity: usize,
    ) -> Vec<Facility> {
        locations
            .into_iter()
            .enumerate()
            .map(|(id, loc)| Facility::new(id, loc, capacity))
            .collect()
    }

    pub fn total_capacity(&self) -> usize {
        self.facilities.iter().map(|f| f.capacity).sum()
    }

    pub fn distance(&self, customer: &Location, facility: usize) -> Result<f64> {
        self.space
            .distance(customer, &self.facilities[facility].location)
    }

    /// Every violated invariant; empty when the instance is valid.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for (index, f) in self.facilities.iter().enumerate() {
            if f.id != index {
                out.push(Diagnostic::FacilityIdMismatch { index, id: f.id });
            }
            if f.capacity == 0 {
                out.push(Diagnostic::ZeroCapacity { facility: index });
            }
            if let Err(e) = self.space.check(&f.location) {
                out.push(Diagnostic::InvalidFacilityLocation {
                    facility: index,
                    reason: e.to_string(),
                });
            }
        }
        for (customer, loc) in self.customers.iter().enumerate() {
            if let Err(e) = self.space.check(loc) {
                out.push(Diagnostic::InvalidCustomerLocation {
                    customer,
                    reason: e.to_string(),
                });
            }
        }
        let capacity = self.total_capacity();
        if self.customers.len() > capacity {
            out.push(Diagnostic::CapacityOverflow {
                customers: self.customers.len(),
                capacity,
            });
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let diags = self.diagnostics();
        if diags.is_empty() {
            Ok(())
        } else {
            let msg: Vec<String> = diags.iter().map(ToString::to_string).collect();
            Err(Error::InvalidInstance(msg.join("; ")))
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses an instance. Structural problems are parse errors; invariant
    /// violations are left to [`Instance::diagnostics`].
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Instance::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// True iff every pair of adjacent facilities has a customer between
    /// them.
    ///
    /// On the line "between" is the open interval. On grids and graphs two
    /// facilities are adjacent when some path joins them with no other
    /// facility on it; a customer is between them when it sits on an
    /// interior vertex of such a path, or, for facilities joined directly by
    /// an edge (no interior vertex exists), on either endpoint. Co-located
    /// facilities impose no requirement.
    pub fn is_well_distributed(&self) -> Result<bool> {
        match &self.space {
            MetricSpace::Line => Ok(self.line_well_distributed()),
            MetricSpace::Grid { .. } | MetricSpace::Graph(_) => Ok(self.graph_well_distributed()),
            MetricSpace::Plane => Err(Error::UnsupportedPredicate {
                predicate: "is_well_distributed",
                space: "plane",
            }),
        }
    }

    fn line_well_distributed(&self) -> bool {
        let mut xs: Vec<f64> = self
            .facilities
            .iter()
            .filter_map(|f| match f.location {
                Location::Line(x) => Some(x),
                _ => None,
            })
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let customers: Vec<f64> = self
            .customers
            .iter()
            .filter_map(|c| match c {
                Location::Line(x) => Some(*x),
                _ => None,
            })
            .collect();
        xs.windows(2)
            .all(|w| customers.iter().any(|&x| w[0] < x && x < w[1]))
    }

    fn graph_well_distributed(&self) -> bool {
        let space = &self.space;
        let n = space.vertex_count().unwrap_or(0);
        let mut is_facility = vec![false; n];
        for f in &self.facilities {
            if let Some(v) = space.vertex_index(&f.location) {
                is_facility[v] = true;
            }
        }
        let mut has_customer = vec![false; n];
        for c in &self.customers {
            if let Some(v) = space.vertex_index(c) {
                has_customer[v] = true;
            }
        }

        // Label the connected components of facility-free vertices.
        let mut component = vec![usize::MAX; n];
        let mut comp_has_customer = Vec::new();
        for s in 0..n {
            if is_facility[s] || component[s] != usize::MAX {
                continue;
            }
            let id = comp_has_customer.len();
            let mut any = false;
            component[s] = id;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                any |= has_customer[u];
                for w in space.vertex_neighbors(u) {
                    if !is_facility[w] && component[w] == usize::MAX {
                        component[w] = id;
                        queue.push_back(w);
                    }
                }
            }
            comp_has_customer.push(any);
        }

        // Facility vertices bordering each component, and edge-adjacent pairs.
        let mut borders: Vec<Vec<usize>> = vec![Vec::new(); comp_has_customer.len()];
        let mut direct = Vec::new();
        for f in (0..n).filter(|&v| is_facility[v]) {
            for w in space.vertex_neighbors(f) {
                if is_facility[w] {
                    if f < w {
                        direct.push((f, w));
                    }
                } else if !borders[component[w]].contains(&f) {
                    borders[component[w]].push(f);
                }
            }
        }

        let mut adjacent = std::collections::BTreeSet::new();
        for list in &borders {
            for (i, &a) in list.iter().enumerate() {
                for &b in &list[i + 1..] {
                    adjacent.insert((a.min(b), a.max(b)));
                }
            }
        }
        adjacent.extend(direct.iter().copied());

        adjacent.into_iter().all(|(a, b)| {
            let via_component = borders
                .iter()
                .enumerate()
                .any(|(c, list)| comp_has_customer[c] && list.contains(&a) && list.contains(&b));
            let via_edge = direct.contains(&(a, b)) && (has_customer[a] || has_customer[b]);
            via_component || via_edge
        })
    }
}

/// A closed segment on the line; `None` marks an unbounded end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverArea {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

impl CoverArea {
    pub fn contains(&self, x: f64) -> bool {
        self.lo.is_none_or(|lo| lo <= x) && self.hi.is_none_or(|hi| x <= hi)
    }
}

/// Cover area of facility `id` among the free facilities on a line.
///
/// Each end is the midpoint towards the nearest free facility on that side,
/// or unbounded if there is none.
pub fn cover_area(facilities: &[Facility], free: &[bool], id: usize) -> Result<CoverArea> {
    let coord = |f: &Facility| match f.location {
        Location::Line(x) => Ok(x),
        other => Err(Error::InvalidArgument(format!(
            "cover area needs line facilities, got {other}"
        ))),
    };
    let me = facilities
        .get(id)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown facility {id}")))?;
    if free.len() != facilities.len() {
        return Err(Error::InvalidArgument("free mask length mismatch".into()));
    }
    let x = coord(me)?;
    let mut left: Option<f64> = None;
    let mut right: Option<f64> = None;
    for (f, &is_free) in facilities.iter().zip(free) {
        if f.id == id || !is_free {
            continue;
        }
        let y = coord(f)?;
        if y < x && left.is_none_or(|l| y > l) {
            left = Some(y);
        }
        if y > x && right.is_none_or(|r| y < r) {
            right = Some(y);
        }
    }
    Ok(CoverArea {
        lo: left.map(|l| (l + x) / 2.0),
        hi: right.map(|r| (r + x) / 2.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssignmentRecord {
    pub customer: usize,
    pub facility: usize,
    pub cost: f64,
}

/// The assignments one algorithm made, in arrival order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AssignmentTrace {
    pub records: Vec<AssignmentRecord>,
}

impl AssignmentTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, record: AssignmentRecord) {
        self.records.push(record);
    }

    pub fn total_cost(&self) -> f64 {
        self.records.iter().map(|r| r.cost).sum()
    }

    /// Assigned facility ids in arrival order.
    pub fn facilities(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.facility).collect()
    }

    /// How many customers each facility serves.
    pub fn usage(&self, facility_count: usize) -> Vec<usize> {
        let mut counts = vec![0; facility_count];
        for r in &self.records {
            counts[r.facility] += 1;
        }
        counts
    }

    /// Checks the trace against the instance it claims to serve.
    ///
    /// Every customer must be assigned exactly once, in arrival order,
    /// without exceeding capacities, and each recorded cost must be the
    /// metric distance (exactly, or within [`PLANE_COST_TOLERANCE`] on the
    /// plane).
    pub fn validate(&self, instance: &Instance) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(format!("invalid trace: {msg}")));
        if self.records.len() != instance.customers.len() {
            return bad(format!(
                "{} records for {} customers",
                self.records.len(),
                instance.customers.len()
            ));
        }
        let mut used = vec![0usize; instance.facilities.len()];
        for (i, r) in self.records.iter().enumerate() {
            if r.customer != i {
                return bad(format!("record {i} is for customer {}", r.customer));
            }
            let Some(f) = instance.facilities.get(r.facility) else {
                return bad(format!("record {i} names unknown facility {}", r.facility));
            };
            used[r.facility] += 1;
            if used[r.facility] > f.capacity {
                return bad(format!(
                    "facility {} over capacity {}",
                    r.facility, f.capacity
                ));
            }
            let d = instance.distance(&instance.customers[i], r.facility)?;
            let tol = if instance.space == MetricSpace::Plane {
                PLANE_COST_TOLERANCE
            } else {
                0.0
            };
            if (d - r.cost).abs() > tol || !r.cost.is_finite() {
                return bad(format!(
                    "record {i} cost {} differs from distance {d}",
                    r.cost
                ));
            }
        }
        Ok(())
    }
}

/// One row of an experiment: an algorithm measured against the optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub family: String,
    pub params: String,
    pub algorithm: String,
    pub cost_alg: f64,
    pub cost_opt: f64,
    /// `None` when the optimum is zero.
    pub ratio: Option<f64>,
    pub bound: Option<f64>,
    /// Always zero: bounds are checked in the strict sense.
    pub additive_constant: f64,
}

impl RatioReport {
    pub fn new(
        family: impl Into<String>,
        params: impl Into<String>,
        algorithm: impl Into<String>,
        cost_alg: f64,
        cost_opt: f64,
        bound: Option<f64>,
    ) -> Self {
        let ratio = (cost_opt > 0.0).then(|| cost_alg / cost_opt);
        RatioReport {
            family: family.into(),
            params: params.into(),
            algorithm: algorithm.into(),
            cost_alg,
            cost_opt,
            ratio,
            bound,
            additive_constant: 0.0,
        }
    }

    /// `None` when there is nothing to check (no bound or undefined ratio).
    pub fn within_bound(&self, tolerance: f64) -> Option<bool> {
        match (self.ratio, self.bound) {
            (Some(r), Some(b)) => Some(r <= b + tolerance),
            _ => None,
        }
    }
}

//! Online assignment algorithms.
//!
//! Each algorithm commits a facility for the newest customer before the
//! next one arrives. Distance ties always go to the lowest facility id; on
//! the plane distances within a relative `1e-12` count as ties so that
//! geometrically symmetric placements behave like exact ones.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metric::{Location, MetricSpace};
use crate::model::{AssignmentRecord, AssignmentTrace, Facility, Instance};
use crate::opt::{solve_optimal, IncrementalAssignment};

const PLANE_TIE_TOLERANCE: f64 = 1e-12;

/// Weight applied to a facility's remaining capacity in the Voronoi rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VoronoiWeight {
    /// Plain nearest-free-facility cells.
    #[default]
    Uniform,
    /// Multiplicative weighting by remaining capacity.
    Capacity,
}

impl VoronoiWeight {
    fn weight(self, remaining: usize) -> f64 {
        match self {
            VoronoiWeight::Uniform => 1.0,
            VoronoiWeight::Capacity => remaining as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Greedy,
    OptimalFill,
    Voronoi(VoronoiWeight),
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [
        Algorithm::Greedy,
        Algorithm::OptimalFill,
        Algorithm::Voronoi(VoronoiWeight::Uniform),
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::OptimalFill => "optimal-fill",
            Algorithm::Voronoi(VoronoiWeight::Uniform) => "voronoi",
            Algorithm::Voronoi(VoronoiWeight::Capacity) => "voronoi-capacity",
        }
    }

    pub fn supports(&self, space: &MetricSpace) -> bool {
        match self {
            Algorithm::Voronoi(_) => *space == MetricSpace::Plane,
            _ => true,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Algorithm::Greedy),
            "optimal-fill" => Ok(Algorithm::OptimalFill),
            "voronoi" => Ok(Algorithm::Voronoi(VoronoiWeight::Uniform)),
            "voronoi-capacity" => Ok(Algorithm::Voronoi(VoronoiWeight::Capacity)),
            other => Err(Error::UnknownAlgorithm(other.to_string())),
        }
    }
}

/// What an online algorithm knows after serving a prefix of the input.
#[derive(Debug, Clone)]
pub struct OnlineState<'a> {
    space: &'a MetricSpace,
    facilities: &'a [Facility],
    remaining: Vec<usize>,
    trace: AssignmentTrace,
    seen: Vec<Location>,
}

impl<'a> OnlineState<'a> {
    pub fn new(space: &'a MetricSpace, facilities: &'a [Facility]) -> Self {
        OnlineState {
            space,
            facilities,
            remaining: facilities.iter().map(|f| f.capacity).collect(),
            trace: AssignmentTrace::default(),
            seen: Vec::new(),
        }
    }

    pub fn space(&self) -> &MetricSpace {
        self.space
    }

    pub fn facilities(&self) -> &[Facility] {
        self.facilities
    }

    pub fn remaining(&self) -> &[usize] {
        &self.remaining
    }

    pub fn trace(&self) -> &AssignmentTrace {
        &self.trace
    }

    pub fn into_trace(self) -> AssignmentTrace {
        self.trace
    }

    /// Customers served so far, in arrival order.
    pub fn seen(&self) -> &[Location] {
        &self.seen
    }

    pub fn is_free(&self, facility: usize) -> bool {
        self.remaining[facility] > 0
    }

    pub fn has_free(&self) -> bool {
        self.remaining.iter().any(|&r| r > 0)
    }

    /// Records the assignment of `customer` to `facility`.
    pub fn commit(&mut self, customer: Location, facility: usize) -> Result<AssignmentRecord> {
        if !self.is_free(facility) {
            return Err(Error::Invariant(format!("facility {facility} is not free")));
        }
        let cost = self
            .space
            .distance(&customer, &self.facilities[facility].location)?;
        self.remaining[facility] -= 1;
        let record = AssignmentRecord {
            customer: self.seen.len(),
            facility,
            cost,
        };
        self.seen.push(customer);
        self.trace.push(record);
        Ok(record)
    }

    /// Free facility minimising `score`, lowest id on ties.
    fn argmin_free(&self, mut score: impl FnMut(usize) -> Result<f64>) -> Result<usize> {
        let plane = *self.space == MetricSpace::Plane;
        let mut best: Option<(usize, f64)> = None;
        for id in 0..self.facilities.len() {
            if !self.is_free(id) {
                continue;
            }
            let s = score(id)?;
            let better = match best {
                None => true,
                Some((_, b)) if plane => s < b - PLANE_TIE_TOLERANCE * b.abs().max(1.0),
                Some((_, b)) => s < b,
            };
            if better {
                best = Some((id, s));
            }
        }
        best.map(|(id, _)| id).ok_or(Error::CapacityExhausted)
    }
}

/// Nearest free facility.
pub fn greedy_step(state: &OnlineState, customer: &Location) -> Result<usize> {
    state.argmin_free(|id| {
        state
            .space
            .distance(customer, &state.facilities[id].location)
    })
}

/// Facility whose weighted Voronoi cell contains the customer, among the
/// facilities with remaining capacity.
pub fn voronoi_step(
    state: &OnlineState,
    customer: &Location,
    weight: VoronoiWeight,
) -> Result<usize> {
    if *state.space != MetricSpace::Plane {
        return Err(Error::IncompatibleSpace {
            algorithm: "voronoi",
            space: state.space.kind(),
        });
    }
    state.argmin_free(|id| {
        let d = state
            .space
            .distance(customer, &state.facilities[id].location)?;
        Ok(d / weight.weight(state.remaining[id]))
    })
}

/// The single facility the optimum uses beyond what the algorithm already
/// committed: `F_opt \ F_alg` as multisets.
fn multiset_difference(opt_usage: &[usize], alg_usage: &[usize]) -> Result<usize> {
    let mut extra = None;
    for (id, (&o, &a)) in opt_usage.iter().zip(alg_usage).enumerate() {
        if o < a {
            return Err(Error::Invariant(format!(
                "optimum uses facility {id} {o} times but the algorithm already used it {a} times"
            )));
        }
        match (o - a, extra) {
            (0, _) => {}
            (1, None) => extra = Some(id),
            _ => {
                return Err(Error::Invariant(
                    "optimum differs from the committed assignment by more than one facility"
                        .into(),
                ))
            }
        }
    }
    extra.ok_or_else(|| Error::Invariant("optimum adds no new facility".into()))
}

/// Optimal-Fill, recomputing the optimum of the whole prefix from scratch.
pub fn optimal_fill_step(state: &OnlineState, customer: &Location) -> Result<usize> {
    if !state.has_free() {
        return Err(Error::CapacityExhausted);
    }
    let mut prefix = state.seen.clone();
    prefix.push(*customer);
    let opt = solve_optimal(state.space, state.facilities, &prefix)?;
    let alg_usage = state.trace.usage(state.facilities.len());
    multiset_difference(&opt.usage(state.facilities.len()), &alg_usage)
}

/// Distance from `facility` back to the facility nearest `customer` among
/// those on a shortest customer-to-facility path (a facility at the
/// customer's own location counts; `facility` itself always qualifies).
pub fn on_path_gap(
    space: &MetricSpace,
    facilities: &[Facility],
    customer: &Location,
    facility: usize,
) -> Result<f64> {
    let target = &facilities
        .get(facility)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown facility {facility}")))?
        .location;
    let x = space.distance(customer, target)?;
    let tol = if space.is_discrete() {
        0.0
    } else {
        1e-9 * x.max(1.0)
    };
    let mut nearest = x;
    for f in facilities {
        let a = space.distance(customer, &f.location)?;
        let b = space.distance(&f.location, target)?;
        if a + b <= x + tol && a < nearest {
            nearest = a;
        }
    }
    Ok(x - nearest)
}

/// Drives one algorithm over an arrival sequence.
///
/// Optimal-Fill keeps an incremental solver whose state after `k` customers
/// equals a from-scratch solve of the `k`-prefix, so each step costs one
/// augmentation instead of a full re-solve.
pub struct OnlineRunner<'a> {
    algorithm: Algorithm,
    state: OnlineState<'a>,
    solver: Option<IncrementalAssignment>,
}

impl<'a> OnlineRunner<'a> {
    pub fn new(
        algorithm: Algorithm,
        space: &'a MetricSpace,
        facilities: &'a [Facility],
    ) -> Result<Self> {
        if !algorithm.supports(space) {
            return Err(Error::IncompatibleSpace {
                algorithm: algorithm.name(),
                space: space.kind(),
            });
        }
        let solver = match algorithm {
            Algorithm::OptimalFill => Some(IncrementalAssignment::new(space, facilities)?),
            _ => None,
        };
        Ok(OnlineRunner {
            algorithm,
            state: OnlineState::new(space, facilities),
            solver,
        })
    }

    pub fn state(&self) -> &OnlineState<'a> {
        &self.state
    }

    pub fn into_trace(self) -> AssignmentTrace {
        self.state.into_trace()
    }

    /// Serves the next customer.
    pub fn serve(&mut self, customer: Location) -> Result<AssignmentRecord> {
        let index = self.state.seen.len();
        let attach = |e: Error| Error::Step {
            index,
            source: Box::new(e),
        };
        self.state.space.check(&customer).map_err(attach)?;
        let facility = match self.algorithm {
            Algorithm::Greedy => greedy_step(&self.state, &customer),
            Algorithm::Voronoi(w) => voronoi_step(&self.state, &customer, w),
            Algorithm::OptimalFill => {
                let solver = self.solver.as_mut().expect("created with the runner");
                if !self.state.has_free() {
                    Err(Error::CapacityExhausted)
                } else {
                    solver.push(customer).and_then(|_| {
                        let alg = self.state.trace.usage(self.state.facilities.len());
                        multiset_difference(&solver.usage(), &alg)
                    })
                }
            }
        }
        .map_err(attach)?;
        self.state.commit(customer, facility).map_err(attach)
    }
}

/// Runs `algorithm` over the whole arrival sequence of `instance`.
pub fn run(algorithm: Algorithm, instance: &Instance) -> Result<AssignmentTrace> {
    let mut runner = OnlineRunner::new(algorithm, &instance.space, &instance.facilities)?;
    for c in &instance.customers {
        runner.serve(*c)?;
    }
    Ok(runner.into_trace())
}

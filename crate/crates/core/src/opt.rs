//! Offline minimum-cost capacitated assignment.
//!
//! Facilities are expanded into unit slots (a facility of capacity `l` owns
//! `l` consecutive slots, slots ordered by facility id) and customers are
//! inserted one at a time with a shortest augmenting path over reduced costs
//! (the row-by-row Hungarian method). After `k` insertions the matching is a
//! minimum-cost assignment of the first `k` customers, and inserting a row
//! never unassigns a slot, so the used-facility multiset of prefix `k` always
//! contains that of prefix `k - 1`.
//!
//! Among equally short augmenting paths the one reaching the lowest slot
//! index first is taken, which makes the solution a pure function of the
//! input.

use crate::error::{Error, Result};
use crate::metric::{Location, MetricSpace};
use crate::model::Facility;

/// Total capacity up to which [`brute_force_optimal`] will enumerate.
pub const ORACLE_CAPACITY_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalSolution {
    /// Facility id serving each customer, in arrival order.
    pub assignment: Vec<usize>,
    pub total_cost: f64,
}

impl OptimalSolution {
    /// Number of customers served by each facility.
    pub fn usage(&self, facility_count: usize) -> Vec<usize> {
        let mut counts = vec![0; facility_count];
        for &f in &self.assignment {
            counts[f] += 1;
        }
        counts
    }

    /// Sorted facility id multiset.
    pub fn used_multiset(&self) -> Vec<usize> {
        let mut v = self.assignment.clone();
        v.sort_unstable();
        v
    }
}

/// Row-incremental assignment solver.
#[derive(Debug, Clone)]
pub struct IncrementalAssignment {
    space: MetricSpace,
    slot_facility: Vec<usize>,
    slot_location: Vec<Location>,
    facility_locations: Vec<Location>,
    facility_count: usize,
    customers: Vec<Location>,
    // costs[i][j]: customer i (0-based) to slot j (0-based)
    costs: Vec<Vec<f64>>,
    // potentials, 1-based with index 0 as the virtual row/column
    row_pot: Vec<f64>,
    col_pot: Vec<f64>,
    // slot_owner[j]: 1-based customer in slot j (1-based), 0 when free
    slot_owner: Vec<usize>,
    eps: f64,
}

impl IncrementalAssignment {
    pub fn new(space: &MetricSpace, facilities: &[Facility]) -> Result<Self> {
        let mut slot_facility = Vec::new();
        let mut slot_location = Vec::new();
        for (idx, f) in facilities.iter().enumerate() {
            space.check(&f.location)?;
            for _ in 0..f.capacity {
                slot_facility.push(idx);
                slot_location.push(f.location);
            }
        }
        let slots = slot_facility.len();
        Ok(IncrementalAssignment {
            space: space.clone(),
            slot_facility,
            slot_location,
            facility_locations: facilities.iter().map(|f| f.location).collect(),
            facility_count: facilities.len(),
            customers: Vec::new(),
            costs: Vec::new(),
            row_pot: vec![0.0],
            col_pot: vec![0.0; slots + 1],
            slot_owner: vec![0; slots + 1],
            eps: 0.0,
        })
    }

    pub fn customer_count(&self) -> usize {
        self.customers.len()
    }

    pub fn capacity(&self) -> usize {
        self.slot_facility.len()
    }

    /// Inserts the next customer and re-optimises.
    pub fn push(&mut self, customer: Location) -> Result<()> {
        let m = self.capacity();
        if self.customers.len() >= m {
            return Err(Error::Infeasible {
                customers: self.customers.len() + 1,
                capacity: m,
            });
        }
        let row: Vec<f64> = self
            .slot_location
            .iter()
            .map(|f| self.space.distance(&customer, f))
            .collect::<Result<_>>()?;
        if self.space == MetricSpace::Plane || self.space == MetricSpace::Line {
            let scale = row.iter().fold(1.0f64, |a, &b| a.max(b));
            self.eps = self.eps.max(1e-12 * scale);
        }
        self.customers.push(customer);
        self.costs.push(row);
        self.row_pot.push(0.0);
        self.augment(self.customers.len());
        Ok(())
    }

    fn augment(&mut self, row: usize) {
        let m = self.capacity();
        let eps = self.eps;
        let mut min_slack = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        let mut way = vec![0usize; m + 1];
        self.slot_owner[0] = row;
        let mut j0 = 0;
        loop {
            used[j0] = true;
            let i0 = self.slot_owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = self.costs[i0 - 1][j - 1] - self.row_pot[i0] - self.col_pot[j];
                if cur < min_slack[j] - eps {
                    min_slack[j] = cur;
                    way[j] = j0;
                }
                if min_slack[j] < delta - eps {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    self.row_pot[self.slot_owner[j]] += delta;
                    self.col_pot[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if self.slot_owner[j0] == 0 {
                break;
            }
        }
        while j0 != 0 {
            let j1 = way[j0];
            self.slot_owner[j0] = self.slot_owner[j1];
            j0 = j1;
        }
    }

    /// Current optimal assignment of all inserted customers.
    pub fn solution(&self) -> OptimalSolution {
        let mut assignment = vec![usize::MAX; self.customers.len()];
        let mut total_cost = 0.0;
        for j in 1..=self.capacity() {
            let owner = self.slot_owner[j];
            if owner != 0 {
                assignment[owner - 1] = self.slot_facility[j - 1];
            }
        }
        for (i, &f) in assignment.iter().enumerate() {
            total_cost += self
                .space
                .distance(&self.customers[i], &self.facility_locations[f])
                .expect("locations checked on insertion");
        }
        OptimalSolution {
            assignment,
            total_cost,
        }
    }

    /// Customers per facility in the current solution.
    pub fn usage(&self) -> Vec<usize> {
        let mut counts = vec![0; self.facility_count];
        for j in 1..=self.capacity() {
            if self.slot_owner[j] != 0 {
                counts[self.slot_facility[j - 1]] += 1;
            }
        }
        counts
    }
}

/// Minimum-cost assignment of `customers` (in order) to `facilities`.
pub fn solve_optimal(
    space: &MetricSpace,
    facilities: &[Facility],
    customers: &[Location],
) -> Result<OptimalSolution> {
    let capacity: usize = facilities.iter().map(|f| f.capacity).sum();
    if customers.len() > capacity {
        return Err(Error::Infeasible {
            customers: customers.len(),
            capacity,
        });
    }
    let mut solver = IncrementalAssignment::new(space, facilities)?;
    for c in customers {
        solver.push(*c)?;
    }
    Ok(solver.solution())
}

/// Exhaustive enumeration of every capacity-respecting assignment.
///
/// Only for small inputs: total capacity must not exceed
/// [`ORACLE_CAPACITY_LIMIT`]. Returns the first minimum in enumeration
/// order (customers in arrival order, facilities by id).
pub fn brute_force_optimal(
    space: &MetricSpace,
    facilities: &[Facility],
    customers: &[Location],
) -> Result<OptimalSolution> {
    let capacity: usize = facilities.iter().map(|f| f.capacity).sum();
    if capacity > ORACLE_CAPACITY_LIMIT {
        return Err(Error::OracleLimit {
            capacity,
            limit: ORACLE_CAPACITY_LIMIT,
        });
    }
    if customers.len() > capacity {
        return Err(Error::Infeasible {
            customers: customers.len(),
            capacity,
        });
    }
    let cost: Vec<Vec<f64>> = customers
        .iter()
        .map(|c| {
            facilities
                .iter()
                .map(|f| space.distance(c, &f.location))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    struct Search<'a> {
        cost: &'a [Vec<f64>],
        remaining: Vec<usize>,
        current: Vec<usize>,
        best: Option<(f64, Vec<usize>)>,
    }
    impl Search<'_> {
        fn go(&mut self, i: usize, acc: f64) {
            if i == self.cost.len() {
                if self.best.as_ref().is_none_or(|(b, _)| acc < *b) {
                    self.best = Some((acc, self.current.clone()));
                }
                return;
            }
            for f in 0..self.remaining.len() {
                if self.remaining[f] == 0 {
                    continue;
                }
                self.remaining[f] -= 1;
                self.current.push(f);
                self.go(i + 1, acc + self.cost[i][f]);
                self.current.pop();
                self.remaining[f] += 1;
            }
        }
    }

    let mut search = Search {
        cost: &cost,
        remaining: facilities.iter().map(|f| f.capacity).collect(),
        current: Vec::new(),
        best: None,
    };
    search.go(0, 0.0);
    let (_, assignment) = search.best.expect("feasible by the capacity check");
    let total_cost = assignment
        .iter()
        .enumerate()
        .map(|(i, &f)| cost[i][f])
        .sum();
    Ok(OptimalSolution {
        assignment,
        total_cost,
    })
}

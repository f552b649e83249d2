//! Linear search on a line ("cow path") and its correspondence with chase
//! traces of online assignment on integer lines.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Location, MetricSpace};
use crate::model::{AssignmentRecord, AssignmentTrace, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn of(x: f64) -> Side {
        if x < 0.0 {
            Side::Left
        } else {
            Side::Right
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// One search: probe depths alternate sides starting at `first_side`; the
/// last probe is the one that reaches the bridge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CowPathRun {
    pub bridge: f64,
    pub first_side: Side,
    pub probes: Vec<f64>,
    pub total: f64,
}

impl CowPathRun {
    /// Checks a turn schedule and computes the walked distance.
    ///
    /// Every probe but the last must miss the bridge, the last must reach it,
    /// and depths on each side must strictly grow.
    pub fn from_schedule(bridge: f64, first_side: Side, probes: Vec<f64>) -> Result<Self> {
        if !bridge.is_finite() || bridge == 0.0 {
            return Err(Error::Domain(format!(
                "bridge must be finite and nonzero, got {bridge}"
            )));
        }
        if probes.is_empty() {
            return Err(Error::Domain("empty turn schedule".into()));
        }
        if probes.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::Domain("probe depths must be positive".into()));
        }
        if probes.windows(3).any(|w| w[2] <= w[0]) {
            return Err(Error::Domain(
                "probe depths on one side must strictly increase".into(),
            ));
        }
        let target = Side::of(bridge);
        let dist = bridge.abs();
        let side_of = |i: usize| {
            if i.is_multiple_of(2) {
                first_side
            } else {
                first_side.opposite()
            }
        };
        let last = probes.len() - 1;
        for (i, &d) in probes.iter().enumerate() {
            let hits = side_of(i) == target && d >= dist;
            if hits != (i == last) {
                return Err(Error::Domain(if hits {
                    format!("probe {i} already reaches the bridge")
                } else {
                    "schedule ends before reaching the bridge".into()
                }));
            }
        }
        let failed: f64 = probes[..last].iter().sum();
        Ok(CowPathRun {
            bridge,
            first_side,
            probes,
            total: dist + 2.0 * failed,
        })
    }

    pub fn side(&self, probe: usize) -> Side {
        if probe.is_multiple_of(2) {
            self.first_side
        } else {
            self.first_side.opposite()
        }
    }

    pub fn ratio(&self) -> f64 {
        self.total / self.bridge.abs()
    }
}

/// Geometric search: depths `base * multiplier^i`, alternating sides.
pub fn simulate_doubling(
    bridge: f64,
    first_side: Side,
    base: f64,
    multiplier: f64,
) -> Result<CowPathRun> {
    if !bridge.is_finite() || bridge.abs() < 1.0 {
        return Err(Error::Domain(format!(
            "|bridge| must be at least 1, got {bridge}"
        )));
    }
    if !(base > 0.0 && base.is_finite()) || !(multiplier > 1.0 && multiplier.is_finite()) {
        return Err(Error::Domain("need base > 0 and multiplier > 1".into()));
    }
    let target = Side::of(bridge);
    let dist = bridge.abs();
    let mut probes = Vec::new();
    let mut depth = base;
    let mut side = first_side;
    let mut failed = 0.0;
    loop {
        probes.push(depth);
        if side == target && depth >= dist {
            break;
        }
        failed += depth;
        depth *= multiplier;
        side = side.opposite();
    }
    Ok(CowPathRun {
        bridge,
        first_side,
        probes,
        total: dist + 2.0 * failed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub runs: Vec<CowPathRun>,
    pub max_ratio: f64,
    pub argmax: f64,
}

/// Runs the doubling search for every bridge and reports the worst ratio.
/// Ties go to the earliest bridge in `bridges`.
pub fn sweep_ratio(
    bridges: &[f64],
    first_side: Side,
    base: f64,
    multiplier: f64,
) -> Result<SweepResult> {
    if bridges.is_empty() {
        return Err(Error::Domain("empty sweep".into()));
    }
    let runs = bridges
        .par_iter()
        .map(|&b| simulate_doubling(b, first_side, base, multiplier))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.ratio() > runs[best].ratio() {
            best = i;
        }
    }
    Ok(SweepResult {
        max_ratio: runs[best].ratio(),
        argmax: runs[best].bridge,
        runs,
    })
}

/// Bridges `±min, ±(min+step), …` up to `max`, positive one first.
pub fn symmetric_bridges(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min >= 1.0 && max >= min && step > 0.0) || !max.is_finite() {
        return Err(Error::Domain("need 1 <= min <= max and step > 0".into()));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| min + i as f64 * step)
        .flat_map(|b| [b, -b])
        .collect())
}

fn integral(x: f64) -> Option<i64> {
    (x.fract() == 0.0 && x.abs() < 1e15).then_some(x as i64)
}

/// Builds the integer line instance in which the search is a chase.
///
/// The origin is the middle facility and receives the first two customers.
/// Facilities cover exactly the explored interval plus the bridge, and the
/// scripted trace extends the occupied interval one facility at a time,
/// switching ends whenever the search turns. Its cost equals `run.total`
/// and the optimum equals `|bridge|`.
pub fn line_instance_from_cowpath(run: &CowPathRun) -> Result<(Instance, AssignmentTrace)> {
    let bridge = integral(run.bridge)
        .filter(|b| *b != 0)
        .ok_or_else(|| Error::Domain("reduction needs an integer bridge".into()))?;
    let Some(last) = run.probes.len().checked_sub(1) else {
        return Err(Error::Domain("empty turn schedule".into()));
    };
    let mut failed = Vec::with_capacity(last);
    for &d in &run.probes[..last] {
        failed.push(
            integral(d)
                .ok_or_else(|| Error::Domain("reduction needs integer probe depths".into()))?,
        );
    }
    // Reachable extents on each side; the final probe stops at the bridge.
    let mut reach = [0i64; 2];
    let idx = |s: Side| (s == Side::Right) as usize;
    let mut order: Vec<i64> = Vec::new();
    let mut extend = |side: Side, depth: i64, reach: &mut [i64; 2]| {
        let r = &mut reach[idx(side)];
        while *r < depth {
            *r += 1;
            order.push(side.sign() as i64 * *r);
        }
    };
    for (i, &d) in failed.iter().enumerate() {
        extend(run.side(i), d, &mut reach);
    }
    extend(run.side(last), bridge.abs(), &mut reach);

    let (left, right) = (reach[0], reach[1]);
    let locs = (-left..=right).map(|x| Location::Line(x as f64));
    let facilities = Instance::facilities_at(locs, 1);
    let id_of = |x: i64| (x + left) as usize;

    let mut customers = vec![Location::Line(0.0), Location::Line(0.0)];
    let mut trace = AssignmentTrace::default();
    trace.push(AssignmentRecord {
        customer: 0,
        facility: id_of(0),
        cost: 0.0,
    });
    let mut at = 0i64;
    for (k, &x) in order.iter().enumerate() {
        if k > 0 {
            customers.push(Location::Line(at as f64));
        }
        trace.push(AssignmentRecord {
            customer: k + 1,
            facility: id_of(x),
            cost: (x - at).abs() as f64,
        });
        at = x;
    }
    let instance = Instance::new(MetricSpace::Line, facilities, customers);
    trace.validate(&instance)?;
    Ok((instance, trace))
}

/// Reads a search back out of a chase trace on an integer line.
///
/// The trace must start with two customers on one facility, put every later
/// customer on the facility just used, and grow a contiguous block of unit
/// spaced facilities by one at either end per step.
pub fn cowpath_from_line_trace(instance: &Instance, trace: &AssignmentTrace) -> Result<CowPathRun> {
    let bad = |why: &str| Error::NotReducible(why.to_string());
    if !matches!(instance.space, MetricSpace::Line) {
        return Err(bad("not a line instance"));
    }
    if trace.len() != instance.customers.len() || trace.len() < 2 {
        return Err(bad("trace must cover at least two customers"));
    }
    let pos = |id: usize| -> Result<i64> {
        let f = instance
            .facilities
            .get(id)
            .ok_or_else(|| bad("unknown facility"))?;
        if f.capacity != 1 {
            return Err(bad("facilities must have unit capacity"));
        }
        match f.location {
            Location::Line(x) => integral(x).ok_or_else(|| bad("facility off the integer lattice")),
            _ => Err(bad("facility is not on the line")),
        }
    };
    let at = |loc: &Location| match loc {
        Location::Line(x) => integral(*x).ok_or_else(|| bad("customer off the integer lattice")),
        _ => Err(bad("customer is not on the line")),
    };
    let origin = pos(trace.records[0].facility)?;
    if at(&instance.customers[0])? != origin || at(&instance.customers[1])? != origin {
        return Err(bad(
            "first two customers must sit on the first facility used",
        ));
    }
    let occupied: std::collections::HashSet<i64> = instance
        .facilities
        .iter()
        .map(|f| pos(f.id))
        .collect::<Result<_>>()?;

    let (mut lo, mut hi) = (origin, origin);
    let mut probes: Vec<f64> = Vec::new();
    let mut first_side = None;
    let mut current: Option<Side> = None;
    let mut prev = origin;
    for (i, rec) in trace.records.iter().enumerate().skip(1) {
        if i >= 2 && at(&instance.customers[i])? != prev {
            return Err(bad("customer not placed on the facility just used"));
        }
        let x = pos(rec.facility)?;
        let side = if x == hi + 1 && occupied.contains(&x) {
            hi = x;
            Side::Right
        } else if x == lo - 1 && occupied.contains(&x) {
            lo = x;
            Side::Left
        } else {
            return Err(bad("assignment does not extend the occupied block by one"));
        };
        let depth = (x - origin).abs() as f64;
        if current == Some(side) {
            *probes.last_mut().expect("probe exists") = depth;
        } else {
            first_side.get_or_insert(side);
            probes.push(depth);
            current = Some(side);
        }
        prev = x;
    }
    let bridge = (prev - origin) as f64;
    CowPathRun::from_schedule(bridge, first_side.expect("at least one step"), probes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opt::solve_optimal;

    #[test]
    fn immediate_hit() {
        let run = simulate_doubling(1.0, Side::Right, 1.0, 2.0).unwrap();
        assert_eq!(run.total, 1.0);
        assert_eq!(run.ratio(), 1.0);
    }

    #[test]
    fn wrong_side_first() {
        let run = simulate_doubling(-1.0, Side::Right, 1.0, 2.0).unwrap();
        assert_eq!(run.probes, vec![1.0, 2.0]);
        assert_eq!(run.total, 3.0);
    }

    #[test]
    fn just_past_a_turn() {
        let run = simulate_doubling(256.001, Side::Right, 1.0, 2.0).unwrap();
        assert!((run.ratio() - 9.0).abs() < 0.2, "{}", run.ratio());
    }

    #[test]
    fn domain_errors() {
        assert!(simulate_doubling(0.5, Side::Right, 1.0, 2.0).is_err());
        assert!(simulate_doubling(2.0, Side::Right, 1.0, 1.0).is_err());
        assert!(sweep_ratio(&[], Side::Right, 1.0, 2.0).is_err());
    }

    #[test]
    fn small_sweeps() {
        assert_eq!(
            sweep_ratio(&[1.0, -1.0], Side::Right, 1.0, 2.0)
                .unwrap()
                .max_ratio,
            3.0
        );
        assert_eq!(
            sweep_ratio(&[1.0], Side::Right, 1.0, 2.0)
                .unwrap()
                .max_ratio,
            1.0
        );
    }

    #[test]
    fn schedule_checks() {
        assert!(CowPathRun::from_schedule(3.0, Side::Right, vec![1.0, 2.0, 4.0]).is_ok());
        assert!(CowPathRun::from_schedule(3.0, Side::Right, vec![4.0]).is_ok());
        assert!(CowPathRun::from_schedule(3.0, Side::Right, vec![4.0, 5.0]).is_err());
        assert!(CowPathRun::from_schedule(3.0, Side::Right, vec![1.0, 2.0]).is_err());
        assert!(CowPathRun::from_schedule(-3.0, Side::Right, vec![2.0, 1.0, 2.0, 4.0]).is_err());
    }

    #[test]
    fn reduction_example() {
        let run = CowPathRun::from_schedule(3.0, Side::Right, vec![1.0, 2.0, 4.0]).unwrap();
        assert_eq!(run.total, 9.0);
        let (inst, trace) = line_instance_from_cowpath(&run).unwrap();
        assert_eq!(trace.total_cost(), 9.0);
        let opt = solve_optimal(&inst.space, &inst.facilities, &inst.customers).unwrap();
        assert_eq!(opt.total_cost, 3.0);
        let back = cowpath_from_line_trace(&inst, &trace).unwrap();
        assert_eq!(back.total, 9.0);
        assert_eq!(back.probes, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn immediate_hit_reduces_to_ratio_one() {
        let run = simulate_doubling(1.0, Side::Right, 1.0, 2.0).unwrap();
        let (inst, trace) = line_instance_from_cowpath(&run).unwrap();
        let opt = solve_optimal(&inst.space, &inst.facilities, &inst.customers).unwrap();
        assert_eq!(trace.total_cost(), opt.total_cost);
    }

    #[test]
    fn rejects_non_chase() {
        let inst = Instance::new(
            MetricSpace::Line,
            Instance::facilities_at([0.0, 1.0, 2.0].map(Location::Line), 1),
            vec![
                Location::Line(1.0),
                Location::Line(0.0),
                Location::Line(2.0),
            ],
        );
        let trace = crate::online::run(crate::online::Algorithm::Greedy, &inst).unwrap();
        assert!(matches!(
            cowpath_from_line_trace(&inst, &trace),
            Err(Error::NotReducible(_))
        ));
    }
}

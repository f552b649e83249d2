//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! prints its own PASS/FAIL line.

use std::path::PathBuf;
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ofa_core::adversary::{self, grid_greedy_chase_last_hop, GeneratorSpec};
use ofa_core::cowpath::{
    cowpath_from_line_trace, line_instance_from_cowpath, sweep_ratio, symmetric_bridges, Side,
};
use ofa_core::harness::{self, ExperimentConfig};
use ofa_core::online::on_path_gap;
use ofa_core::sample::{random_instance, SpaceKind};
use ofa_core::*;

type Outcome = std::result::Result<String, String>;
type Check = fn() -> Outcome;

fn costs(alg: Algorithm, inst: &Instance) -> (AssignmentTrace, f64) {
    let trace = run(alg, inst).expect("algorithm runs");
    let opt = solve_optimal(&inst.space, &inst.facilities, &inst.customers).expect("feasible");
    (trace, opt.total_cost)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut count = 0;
    for kind in SpaceKind::ALL {
        let mut done = 0;
        while done < 200 {
            let nf = rng.gen_range(1..=5);
            let nc = rng.gen_range(0..=5);
            let inst = random_instance(&mut rng, kind, nf, nc, 2).map_err(|e| e.to_string())?;
            if inst.total_capacity() > opt::ORACLE_CAPACITY_LIMIT {
                continue;
            }
            let fast = solve_optimal(&inst.space, &inst.facilities, &inst.customers)
                .map_err(|e| e.to_string())?;
            let slow = brute_force_optimal(&inst.space, &inst.facilities, &inst.customers)
                .map_err(|e| e.to_string())?;
            let ok = if kind == SpaceKind::Plane {
                (fast.total_cost - slow.total_cost).abs() <= 1e-9 * slow.total_cost.max(1.0)
            } else {
                fast.total_cost == slow.total_cost
            };
            ensure(ok, || {
                format!(
                    "{} instance {done}: {} vs {}",
                    kind.name(),
                    fast.total_cost,
                    slow.total_cost
                )
            })?;
            done += 1;
            count += 1;
        }
    }
    Ok(format!("{count} instances, 200 per space"))
}

fn plane_chain_exact() -> Outcome {
    let voronoi = Algorithm::Voronoi(VoronoiWeight::Uniform);
    let mut worst_offset = 0.0f64;
    for n in 3..=10 {
        for p in [1.0, 2.5] {
            let inst = adversary::plane_chain(n, p, 0.0).map_err(|e| e.to_string())?;
            let (trace, opt) = costs(voronoi, &inst);
            let alg = trace.total_cost();
            let want = (2 * n - 1) as f64;
            ensure((alg - want * p / 2.0).abs() <= 1e-9, || {
                format!("n={n} p={p}: cost {alg}")
            })?;
            ensure((opt - p / 2.0).abs() <= 1e-9, || {
                format!("n={n} p={p}: opt {opt}")
            })?;
            ensure((alg / opt - want).abs() <= 1e-9, || {
                format!("n={n} p={p}: ratio {}", alg / opt)
            })?;

            let inst = adversary::plane_chain(n, p, 1e-6).map_err(|e| e.to_string())?;
            let (trace, opt) = costs(voronoi, &inst);
            let gap = (trace.total_cost() / opt - want).abs();
            ensure(gap <= 1e-4, || {
                format!("offset n={n} p={p}: ratio off by {gap}")
            })?;
            worst_offset = worst_offset.max(gap);
        }
    }
    let (trace, opt) = costs(voronoi, &adversary::plane_chain(4, 1.0, 0.0).unwrap());
    let r4 = trace.total_cost() / opt;
    ensure((r4 - 7.0).abs() <= 1e-9, || format!("n=4 ratio {r4}"))?;
    Ok(format!(
        "ratio 2n-1 for n=3..10, n=4 gives {r4:.12}, offset variant within {worst_offset:.2e}"
    ))
}

fn greedy_grid_bound() -> Outcome {
    let mut worst = 0.0f64;
    let mut adjusted = Vec::new();
    for r in 2..=8 {
        for c in 2..=8 {
            let bound = (r * c + r + c) as f64;
            for l in 1..=3 {
                for spec in [
                    GeneratorSpec::GridGreedyChase { r, c, l },
                    GeneratorSpec::GridGreedyAlt { r, c, l },
                ] {
                    let inst = spec.generate().map_err(|e| e.to_string())?;
                    let (trace, opt) = costs(Algorithm::Greedy, &inst);
                    let ratio = trace.total_cost() / opt;
                    ensure(ratio <= bound, || {
                        format!("{spec}: ratio {ratio} > {bound}")
                    })?;
                    worst = worst.max(ratio / bound);
                }
            }
            let inst = adversary::grid_greedy_chase(r, c).unwrap();
            let (trace, opt) = costs(Algorithm::Greedy, &inst);
            ensure(opt == 1.0, || format!("{r}x{c}: opt {opt}"))?;
            let last = trace.records.last().unwrap().cost as usize;
            let want = grid_greedy_chase_last_hop(r, c);
            ensure(last == want, || {
                format!("{r}x{c}: last hop {last}, expected {want}")
            })?;
            if want != r + c - 2 {
                adjusted.push(format!("{r}x{c}"));
            }
        }
    }
    Ok(format!(
        "max ratio/bound {worst:.3}; OPT 1 and last hop r+c-2 on all grids except r+c-3 on even-by-even ({} grids)",
        adjusted.len()
    ))
}

fn spider_bound() -> Outcome {
    let mut tight = 0;
    for k in 2..=8 {
        for s in 1..=8 {
            let inst = adversary::spider(k, s).map_err(|e| e.to_string())?;
            let f = inst.facilities.len() as f64;
            let (trace, opt) = costs(Algorithm::OptimalFill, &inst);
            let ratio = trace.total_cost() / opt;
            ensure(ratio <= 2.0 * f, || {
                format!("k={k} s={s}: ratio {ratio} > {}", 2.0 * f)
            })?;
            ensure(ratio >= 2.0 * f - 2.0, || {
                format!("k={k} s={s}: ratio {ratio} < {}", 2.0 * f - 2.0)
            })?;
            if ratio == 2.0 * f - 1.0 {
                tight += 1;
            }
        }
    }
    Ok(format!(
        "2|F|-2 <= ratio <= 2|F| on 56 spiders; ratio exactly 2|F|-1 on {tight}"
    ))
}

fn rings_and_grids() -> Outcome {
    let mut ring_cost = Vec::new();
    for r in 1..=3 {
        let inst = adversary::grid_optfill_ring(7, r).map_err(|e| e.to_string())?;
        ensure(inst.facilities.len() == 4 * r, || {
            format!("r={r}: {} facilities", inst.facilities.len())
        })?;
        ring_cost.push(run(Algorithm::OptimalFill, &inst).unwrap().total_cost());
    }
    let fit = (ring_cost[0] / 1.0).max(ring_cost[1] / 4.0);
    ensure(ring_cost[2] <= fit * 9.0, || {
        format!("r=3 cost {} > {fit}*9", ring_cost[2])
    })?;

    let mut worst = 0.0f64;
    for r in 2..=7 {
        for c in 2..=7 {
            let inst = adversary::grid_center_chase(r, c, Algorithm::OptimalFill)
                .map_err(|e| e.to_string())?;
            let (trace, opt) = costs(Algorithm::OptimalFill, &inst);
            let ratio = trace.total_cost() / opt;
            let bound = 2.0 * (r * c) as f64;
            ensure(ratio <= bound, || {
                format!("{r}x{c}: ratio {ratio} > {bound}")
            })?;
            worst = worst.max(ratio / (r * c) as f64);
        }
    }
    Ok(format!(
        "ring sizes 4,8,12; costs {ring_cost:?} <= {fit}*r^2; grid chase ratio <= {worst:.3}*r*c (checked against 2*r*c); \
         equidistant sets on 7x7: {} (row-count bound {})",
        adversary::max_equidistant_set(7),
        adversary::equidistant_row_bound(7)
    ))
}

fn path_vs_cycle() -> Outcome {
    let mut parts = Vec::new();
    for m in [6, 8, 10] {
        let (p, c) = adversary::path_and_cycle(m).map_err(|e| e.to_string())?;
        let (tp, op) = costs(Algorithm::OptimalFill, &p);
        let (tc, oc) = costs(Algorithm::OptimalFill, &c);
        let (rp, rc) = (tp.total_cost() / op, tc.total_cost() / oc);
        ensure(rc <= rp, || format!("m={m}: cycle {rc} > path {rp}"))?;
        parts.push(format!("m={m} path {rp:.3} cycle {rc:.3}"));
    }
    Ok(parts.join(", "))
}

fn on_path_gap_check() -> Outcome {
    let mut instances = Vec::new();
    for k in 2..=8 {
        for s in 1..=8 {
            instances.push(adversary::spider(k, s).unwrap());
        }
    }
    for n in [3, 5, 7, 9] {
        for r in 1..=n / 2 {
            instances.push(adversary::grid_optfill_ring(n, r).unwrap());
        }
    }
    let mut steps = 0;
    for inst in &instances {
        let (trace, full) = costs(Algorithm::OptimalFill, inst);
        for (i, rec) in trace.records.iter().enumerate() {
            let gap = on_path_gap(
                &inst.space,
                &inst.facilities,
                &inst.customers[i],
                rec.facility,
            )
            .unwrap();
            let prefix = solve_optimal(&inst.space, &inst.facilities, &inst.customers[..=i])
                .unwrap()
                .total_cost;
            ensure(full >= gap / 2.0 && prefix >= gap / 2.0, || {
                format!("step {i}: gap {gap}, prefix opt {prefix}, full opt {full}")
            })?;
            steps += 1;
        }
    }
    Ok(format!(
        "{} traces, {steps} steps, no violations",
        instances.len()
    ))
}

fn cow_path() -> Outcome {
    let bridges = symmetric_bridges(1.0, 4096.0, 0.5).map_err(|e| e.to_string())?;
    let coarse = symmetric_bridges(1.0, 4096.0, 1.0).unwrap();
    let mut maxes = Vec::new();
    for side in [Side::Right, Side::Left] {
        let sweep = sweep_ratio(&bridges, side, 1.0, 2.0).map_err(|e| e.to_string())?;
        ensure(sweep.max_ratio <= 9.0 + 1e-9, || {
            format!("{side}: max {}", sweep.max_ratio)
        })?;
        ensure(sweep.max_ratio > 8.9, || {
            format!("{side}: max only {}", sweep.max_ratio)
        })?;
        let rough = sweep_ratio(&coarse, side, 1.0, 2.0).unwrap();
        ensure(rough.max_ratio <= sweep.max_ratio, || {
            "refining the sweep lowered the max".into()
        })?;
        maxes.push(format!(
            "{side} first {:.6} at {}",
            sweep.max_ratio, sweep.argmax
        ));
    }

    for m in [7, 9, 11] {
        for alg in [Algorithm::Greedy, Algorithm::OptimalFill] {
            let inst = adversary::line_chase(m, alg).unwrap();
            let (trace, opt) = costs(alg, &inst);
            let cow =
                cowpath_from_line_trace(&inst, &trace).map_err(|e| format!("m={m} {alg}: {e}"))?;
            let (back, script) = line_instance_from_cowpath(&cow).map_err(|e| e.to_string())?;
            let back_opt = solve_optimal(&back.space, &back.facilities, &back.customers)
                .unwrap()
                .total_cost;
            ensure(
                cow.total == trace.total_cost() && script.total_cost() == trace.total_cost(),
                || {
                    format!(
                        "m={m} {alg}: cost {} -> {} -> {}",
                        trace.total_cost(),
                        cow.total,
                        script.total_cost()
                    )
                },
            )?;
            ensure(back_opt == opt && cow.bridge.abs() == opt, || {
                format!("m={m} {alg}: opt {opt} -> {back_opt}")
            })?;
        }
    }

    let mut probes = Vec::new();
    for alg in [Algorithm::Greedy, Algorithm::OptimalFill] {
        let probe = harness::line_probe(alg, 15, 8, 9.001).map_err(|e| e.to_string())?;
        ensure(probe.exceeds, || probe.summary())?;
        probes.push(probe.summary());
    }
    Ok(format!(
        "{}; round trips exact for m=7,9,11; {}",
        maxes.join(", "),
        probes.join("; ")
    ))
}

fn determinism() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut paths: Vec<_> = std::fs::read_dir(&dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    ensure(!paths.is_empty(), || "no configs found".into())?;
    for path in &paths {
        let config =
            ExperimentConfig::load(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let a =
            harness::to_csv(&harness::run_experiment(&config, Some(1)).map_err(|e| e.to_string())?)
                .unwrap();
        let b =
            harness::to_csv(&harness::run_experiment(&config, Some(4)).map_err(|e| e.to_string())?)
                .unwrap();
        ensure(a == b, || {
            format!("{} differs between runs", path.display())
        })?;
    }
    Ok(format!(
        "{} configs byte-identical across runs and thread counts",
        paths.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("plane chain closed form", plane_chain_exact),
        ("greedy grid bound", greedy_grid_bound),
        ("spider bound and tightness", spider_bound),
        ("rings and grid chase", rings_and_grids),
        ("cycle vs path", path_vs_cycle),
        ("on-path gap lower bound", on_path_gap_check),
        ("cow path and line reduction", cow_path),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = std::time::Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{}] {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

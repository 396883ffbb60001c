//! Acceptance suite. Every test prints one `PASS`/`FAIL` line, written
//! straight to stdout so it shows up without `--nocapture`.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use fairdiv_core::crossing::{
    lift_pk, solve_crossing_det, solve_mon_crossing, CrossingInstance,
    MonCrossingInstance,
};
use fairdiv_core::experiment::{
    bench_row, trial_seed, trial_valuations, BenchProtocol, BENCH_DENSITY, BENCH_SEGMENTS,
};
use fairdiv_core::movingknife::{
    austin, austin_phase1_step, austin_phase2_step, probe_cap, verify_epsilon_outcome,
};
use fairdiv_core::oracle::{
    brute_crossing, check_fair, equitable_threshold, gen_equitable_hard, gen_perfect_hard,
    perfect_threshold, random_crossing, random_mon_crossing, recover_crossing_index,
    FairnessNotion, Notion, Reduction,
};
use fairdiv_core::protocols::{
    ef3_grid, envy_free_three, equitable_grid, equitable_two, noncomm_cells, perfect_grid, perfect_random_noncomm, perfect_two,
    proportional_grid, proportional_simultaneous, run_rw_simulated, rw_grid, CrossingMode,
    CutAndChoose, EvenPaz, RwProgram,
};
use fairdiv_core::rational::{ceil_log2, ceil_log2_inv, q, qi, qu, width_for, Q};
use fairdiv_core::{DensityValuation, PublicCoins, Transcript};

/// Runs one criterion, prints its verdict line and re-raises any failure.
fn criterion(id: u32, title: &str, body: impl FnOnce() -> String) {
    let start = Instant::now();
    let res = catch_unwind(AssertUnwindSafe(body));
    let secs = start.elapsed().as_secs_f64();
    let line = match &res {
        Ok(detail) => format!("criterion {id:02} PASS {title} ({detail}; {secs:.1}s)"),
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            format!("criterion {id:02} FAIL {title}: {msg}")
        }
    };
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").unwrap();
    out.flush().unwrap();
    if let Err(e) = res {
        std::panic::resume_unwind(e);
    }
}

fn log2(m: u64) -> u64 {
    ceil_log2(m) as u64
}

fn eps_pow(k: u32) -> Q {
    qi(1) / qu(1u64 << k)
}

fn passes(
    alloc: &fairdiv_core::Allocation,
    vals: &[DensityValuation],
    tag: Notion,
    eps: &Q,
) -> bool {
    let notion = FairnessNotion::new(tag, eps.clone()).unwrap();
    check_fair(alloc, vals, &notion).unwrap().pass
}

/// All weakly increasing sequences of length `m + 1` from `0` to `k`.
fn monotone_sequences(m: u64, k: u64) -> Vec<Vec<u64>> {
    fn rec(len: usize, lo: u64, k: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for v in lo..=k {
            cur.push(v);
            rec(len, v, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0];
    rec(m as usize, 0, k, &mut cur, &mut out);
    out.into_iter()
        .map(|mut s| {
            s.push(k);
            s
        })
        .collect()
}

fn all_mon_instances(m: u64, k: u64) -> Vec<MonCrossingInstance> {
    let seqs = monotone_sequences(m, k);
    let mut out = Vec::new();
    for x in &seqs {
        for ys in &seqs {
            let y: Vec<u64> = ys.iter().rev().copied().collect();
            out.push(MonCrossingInstance::new(m, k, x.clone(), y).unwrap());
        }
    }
    out
}

/// Every general instance over `0..=m` with entries in `0..=m`.
fn all_general_instances(m: u64) -> Vec<CrossingInstance> {
    let len = m as usize + 1;
    let base = m + 1;
    let total = base.pow(len as u32);
    let seq = |mut c: u64| {
        (0..len)
            .map(|_| {
                let d = c % base;
                c /= base;
                d
            })
            .collect::<Vec<u64>>()
    };
    let mut out = Vec::new();
    for a in 0..total {
        let x = seq(a);
        for b in 0..total {
            let y = seq(b);
            if x[0] <= y[0] && x[len - 1] >= y[len - 1] {
                out.push(CrossingInstance::new(m, x.clone(), y).unwrap());
            }
        }
    }
    out
}

#[test]
fn criterion_01_crossing_exhaustive() {
    criterion(1, "crossing solvers agree with brute force on every small instance", || {
        let start = Instant::now();
        let mut checked = 0usize;
        for m in 1..=4 {
            for k in 1..=4 {
                for inst in all_mon_instances(m, k) {
                    let valid = brute_crossing(&inst.x, &inst.y);
                    assert!(!valid.is_empty(), "empty valid set for {inst:?}");
                    let mut tr = Transcript::new();
                    let ans = solve_mon_crossing(&inst, &mut tr).unwrap();
                    assert!(valid.contains(&ans.index), "mon {inst:?} -> {}", ans.index);
                    let general =
                        CrossingInstance::with_bound(m, k, inst.x.clone(), inst.y.clone()).unwrap();
                    let mut tr = Transcript::new();
                    let ans = solve_crossing_det(&general, &mut tr).unwrap();
                    assert!(valid.contains(&ans.index), "det on mon {inst:?}");
                    checked += 1;
                }
            }
        }
        for m in 1..=3 {
            for inst in all_general_instances(m) {
                let valid = brute_crossing(&inst.x, &inst.y);
                assert!(!valid.is_empty(), "empty valid set for {inst:?}");
                let mut tr = Transcript::new();
                let ans = solve_crossing_det(&inst, &mut tr).unwrap();
                assert!(valid.contains(&ans.index), "det {inst:?} -> {}", ans.index);
                checked += 1;
            }
        }
        let secs = start.elapsed().as_secs_f64();
        assert!(secs < 60.0, "took {secs:.1}s");
        format!("{checked} instances")
    });
}

#[test]
fn criterion_02_mon_crossing_cost() {
    criterion(2, "mon-crossing bits within 2(log m + log k) + 8", || {
        let mut worst = 0i64;
        for e in 4..=16 {
            let m = 1u64 << e;
            let row = bench_row(&BenchProtocol::MonCrossing, &qu(m), 100, 2).unwrap();
            let bound = 2 * (log2(m) + log2(m)) + 8;
            assert!(row.bits_total_max <= bound, "m=2^{e}: {} > {bound}", row.bits_total_max);
            assert_eq!(row.success_rate, qi(1), "m=2^{e}");
            worst = worst.max(row.bits_total_max as i64 - bound as i64);
        }
        format!("m = 2^4..2^16, max bits - bound = {worst}")
    });
}

#[test]
fn criterion_03_general_crossing_cost() {
    criterion(3, "deterministic crossing bits and rounds", || {
        let mut sizes: Vec<u64> = (1..=12).map(|e| 1u64 << e).collect();
        sizes.extend([3, 5, 7, 100, 1000, 3000, 4095]);
        let mut rows = 0;
        for &m in &sizes {
            let row = bench_row(&BenchProtocol::Crossing, &qu(m), 50, 3).unwrap();
            let bits = 4 * width_for(m) as u64 * (log2(m) + 1);
            assert!(row.bits_total_max <= bits, "m={m}: bits {} > {bits}", row.bits_total_max);
            assert!(row.rounds_max <= log2(m) + 1, "m={m}: rounds {}", row.rounds_max);
            assert_eq!(row.success_rate, qi(1));
            rows += 1;
        }
        format!("{rows} sizes up to 2^12, 50 instances each")
    });
}

#[test]
fn criterion_04_randomized_crossing() {
    criterion(4, "randomized crossing error and bit growth", || {
        let row = bench_row(&BenchProtocol::CrossingRand, &qu(1 << 10), 1000, 4).unwrap();
        let error = qi(1) - &row.success_rate;
        assert!(error <= q(1, 3), "error rate {error}");
        let mut cs = Vec::new();
        for e in [8u32, 10, 12] {
            let m = 1u64 << e;
            let row = bench_row(&BenchProtocol::CrossingRand, &qu(m), 200, 40 + e as u64).unwrap();
            let lg = e as f64;
            cs.push(row.bits_total_max as f64 / (lg * lg.log2()));
        }
        let mean = cs.iter().sum::<f64>() / cs.len() as f64;
        for c in &cs {
            assert!((c - mean).abs() <= 0.2 * mean, "c = {cs:?} not within 20% of {mean:.2}");
        }
        format!(
            "error {error} at m=2^10; c = {:.2}/{:.2}/{:.2}",
            cs[0], cs[1], cs[2]
        )
    });
}

/// `bits ≤ c·log2(1/eps)` for eps ≤ 2^-8. The exact count is at most
/// `8L + 6` with `L = log2 m = log2(1/eps) + 2` at density bound 4, so
/// `c = 8 + 22/8`.
const EQUITABLE_C: f64 = 10.75;
/// `bits ≤ c·log2²(1/eps)` for eps ≤ 2^-8. The exact count is at most
/// `2(L+1)(L+2)` with `L = log2(1/eps) + 5`, so `c = 420/64`.
const PERFECT_C: f64 = 6.5625;

#[test]
fn criterion_05_equitable_two() {
    criterion(5, "two-player equitable", || {
        let d = qi(BENCH_DENSITY);
        let mut worst_c = 0f64;
        for k in [8u32, 12, 16] {
            let eps = eps_pow(k);
            for t in 0..100 {
                let vals = trial_valuations(&BenchProtocol::Equitable2, trial_seed(5, t)).unwrap();
                let out = equitable_two(&vals[0], &vals[1], &eps).unwrap();
                let notion = FairnessNotion::new(Notion::Equitable, eps.clone()).unwrap();
                let report = check_fair(&out.allocation, &vals, &notion).unwrap();
                assert!(report.slack >= qi(0), "eps=2^-{k} trial {t}: slack {}", report.slack);
                assert_eq!(out.allocation.cut_count(), 1);
                let l = log2(equitable_grid(&d, &eps)) as usize;
                assert!(out.cost().total_bits <= 8 * l + 6);
                let c = out.cost().total_bits as f64 / k as f64;
                worst_c = worst_c.max(c);
            }
        }
        assert!(worst_c <= EQUITABLE_C, "bits/log2(1/eps) reached {worst_c:.2}");
        format!("300 runs, max bits/log2(1/eps) = {worst_c:.2} <= {EQUITABLE_C}")
    });
}

#[test]
fn criterion_06_perfect_two() {
    criterion(6, "two-player perfect", || {
        let d = qi(BENCH_DENSITY);
        let mut worst_c = 0f64;
        for k in [8u32, 12, 16] {
            let eps = eps_pow(k);
            for t in 0..100 {
                let vals = trial_valuations(&BenchProtocol::Perfect2, trial_seed(6, t)).unwrap();
                let mut coins = PublicCoins::new(t);
                let out =
                    perfect_two(&vals[0], &vals[1], &eps, CrossingMode::Deterministic, &mut coins)
                        .unwrap();
                assert!(passes(&out.allocation, &vals, Notion::Perfect, &eps), "2^-{k} trial {t}");
                assert_eq!(out.allocation.cut_count(), 2);
                let l = log2(perfect_grid(&d, &eps)) as usize;
                assert!(out.cost().total_bits <= 2 * (l + 1) * (l + 2));
                let c = out.cost().total_bits as f64 / (k as f64 * k as f64);
                worst_c = worst_c.max(c);
            }
        }
        assert!(worst_c <= PERFECT_C, "bits/log2^2(1/eps) reached {worst_c:.2}");
        format!("300 runs, max bits/log2^2(1/eps) = {worst_c:.2} <= {PERFECT_C}")
    });
}

#[test]
fn criterion_07_envy_free_three() {
    criterion(7, "three-player envy-free", || {
        let mut worst_extra = i64::MIN;
        for k in [8u32, 12] {
            let eps = eps_pow(k);
            let d = qi(BENCH_DENSITY);
            let m = ef3_grid(&d, &eps);
            // Worst-case rounds of one mon-crossing solve at the largest
            // size the protocol builds: indices up to m + 2, values up to m.
            let mon_rounds = (log2(m + 2) + log2(m + 1)) as i64;
            for t in 0..100 {
                let vals = trial_valuations(&BenchProtocol::Ef3, trial_seed(7, t)).unwrap();
                let out = envy_free_three(&vals[0], &vals[1], &vals[2], &eps).unwrap();
                assert!(passes(&out.allocation, &vals, Notion::EnvyFree, &eps), "2^-{k} trial {t}");
                assert_eq!(out.allocation.cut_count(), 2);
                let extra = out.cost().rounds as i64 - mon_rounds;
                assert!(extra <= 5, "2^-{k} trial {t}: {extra} extra rounds");
                worst_extra = worst_extra.max(extra);
            }
        }
        format!("200 runs, rounds - mon-crossing rounds <= {worst_extra}")
    });
}

#[test]
fn criterion_08_proportional() {
    criterion(8, "simultaneous proportional", || {
        let eps = eps_pow(10);
        let mut worst_over = i64::MIN;
        for n in 2..=4usize {
            let proto = BenchProtocol::Proportional(n);
            let d = qi(BENCH_DENSITY);
            let m = proportional_grid(n, &d, &eps);
            let budget = (n as i64 - 1) * width_for(m) as i64;
            for t in 0..100 {
                let vals = trial_valuations(&proto, trial_seed(8, t)).unwrap();
                let out = proportional_simultaneous(&vals, &eps).unwrap();
                assert!(passes(&out.allocation, &vals, Notion::Proportional, &eps));
                assert_eq!(out.cost().rounds, 1);
                for p in 0..n {
                    let over = out.transcript.bits_sent_by(p) as i64 - budget;
                    worst_over = worst_over.max(over);
                    assert!(over <= 0, "n={n} party {p} sent {over} bits over budget");
                }
            }
        }
        format!("300 profiles, per-party bits - (n-1)log(m+1) <= {worst_over}")
    });
}

#[test]
fn criterion_09_noncomm_perfect() {
    criterion(9, "silent randomized perfect", || {
        let eps = q(1, 10);
        let proto = BenchProtocol::PerfectRandNoncomm;
        let mut hits = 0u32;
        for t in 0..1000u64 {
            let vals = trial_valuations(&proto, trial_seed(9, t)).unwrap();
            let d = vals.iter().map(|v| v.density_bound().clone()).max().unwrap();
            let out = perfect_random_noncomm(&vals, &eps, &mut PublicCoins::new(t)).unwrap();
            assert_eq!(out.cost().total_bits, 0);
            assert!(out.allocation.cut_count() as u64 <= noncomm_cells(&d, 2, &eps) - 1);
            hits += passes(&out.allocation, &vals, Notion::Perfect, &eps) as u32;
        }
        assert!(hits >= 900, "success {hits}/1000");
        format!("success {hits}/1000")
    });
}

fn equitable_round_trip(inst: &MonCrossingInstance) {
    let m = inst.m;
    let (va, vb) = gen_equitable_hard(inst).unwrap();
    let out = equitable_two(&va, &vb, &equitable_threshold(m)).unwrap();
    let i = recover_crossing_index(&out.allocation, m, Reduction::Equitable).unwrap();
    assert!(inst.is_valid_answer(i), "equitable {inst:?} -> {i}");
}

fn perfect_round_trip(inst: &CrossingInstance, seed: u64) {
    let m = inst.m;
    let (va, vb) = gen_perfect_hard(inst).unwrap();
    let mut coins = PublicCoins::new(seed);
    let out = perfect_two(&va, &vb, &perfect_threshold(m), CrossingMode::Deterministic, &mut coins)
        .unwrap();
    let i = recover_crossing_index(&out.allocation, m, Reduction::Perfect).unwrap();
    assert!(inst.is_valid_answer(i), "perfect {inst:?} -> {i}");
}

#[test]
fn criterion_10_reduction_round_trips() {
    criterion(10, "hard-instance round trips", || {
        let mut count = 0usize;
        for m in 1..=4 {
            for inst in all_mon_instances(m, m) {
                equitable_round_trip(&inst);
                let general = CrossingInstance::new(m, inst.x.clone(), inst.y.clone()).unwrap();
                perfect_round_trip(&general, count as u64);
                count += 2;
            }
        }
        // General instances at m = 4 number in the millions; monotone ones
        // cover that size above.
        for m in 1..=3 {
            for inst in all_general_instances(m) {
                perfect_round_trip(&inst, count as u64);
                count += 1;
            }
        }
        for seed in 0..100 {
            equitable_round_trip(&random_mon_crossing(seed, 64, 64));
            perfect_round_trip(&random_crossing(seed, 64), seed);
            count += 2;
        }
        format!("{count} round trips")
    });
}

#[test]
fn criterion_11_lift() {
    criterion(11, "P^k lift back-maps every crossing", || {
        let mut count = 0usize;
        for m in 1..=3u64 {
            let seqs = monotone_sequences(m, m);
            for k in 1..=3u32 {
                let combos = seqs.len().pow(k);
                for c in 0..combos {
                    let mut rest = c;
                    let xs: Vec<Vec<u64>> = (0..k)
                        .map(|_| {
                            let s = seqs[rest % seqs.len()].clone();
                            rest /= seqs.len();
                            s
                        })
                        .collect();
                    for ys in &seqs {
                        let y: Vec<u64> = ys.iter().rev().copied().collect();
                        for z in 1..=k as u64 {
                            let lifted = lift_pk(&xs, &y, z).unwrap();
                            let inst = &lifted.instance;
                            let xz = &xs[z as usize - 1];
                            for w in brute_crossing(&inst.x, &inst.y) {
                                let i = lifted.back_map(w).unwrap();
                                assert!(
                                    brute_crossing(xz, &y).contains(&i),
                                    "xs={xs:?} y={y:?} z={z} w={w}"
                                );
                            }
                            count += 1;
                        }
                    }
                }
            }
        }
        format!("{count} lifted instances")
    });
}

#[test]
fn criterion_12_moving_knife() {
    criterion(12, "moving-knife outcomes and two-cut perfect division", || {
        let mut worst_probes = 0u32;
        for k in [8u32, 12] {
            let eps = eps_pow(k);
            for t in 0..100 {
                let vals = trial_valuations(&BenchProtocol::Austin, trial_seed(12, t)).unwrap();
                let (out, trace) = austin(&vals[0], &vals[1], &eps, &mut PublicCoins::new(t)).unwrap();
                assert!(passes(&out.allocation, &vals, Notion::Perfect, &eps), "2^-{k} trial {t}");
                assert_eq!(out.allocation.cut_count(), 2);
                let mut check = |step: &fairdiv_core::movingknife::Step,
                                 o: &fairdiv_core::movingknife::EpsilonOutcome,
                                 e: &Q| {
                    assert!(verify_epsilon_outcome(step, o, e), "2^-{k} trial {t}: bad outcome");
                    let bound = ceil_log2_inv(&(e / (qi(2) * &step.zeta))) + 2;
                    assert!(o.probes <= probe_cap(step, e).min(bound), "probes {}", o.probes);
                    worst_probes = worst_probes.max(o.probes);
                };
                for (player, o) in &trace.phase1 {
                    let step = austin_phase1_step(*player, &trace.hungry[*player]).unwrap();
                    check(&step, o, &trace.phase1_eps);
                }
                let (c, o) = (trace.caller, 1 - trace.caller);
                let step = austin_phase2_step(
                    c,
                    o,
                    &trace.hungry[c],
                    &trace.hungry[o],
                    trace.phase2_omega.clone(),
                )
                .unwrap();
                check(&step, &trace.phase2, &trace.phase2_eps);
            }
        }
        format!("200 runs, most probes in one search = {worst_probes}")
    });
}

#[test]
fn criterion_13_rw_simulation() {
    criterion(13, "RW programs under simulation", || {
        let eps = eps_pow(10);
        let d = qi(BENCH_DENSITY);
        let programs: Vec<(Box<dyn RwProgram>, Notion)> = vec![
            (Box::new(CutAndChoose), Notion::EnvyFree),
            (Box::new(EvenPaz { n: 3 }), Notion::Proportional),
            (Box::new(EvenPaz { n: 4 }), Notion::Proportional),
        ];
        for (prog, tag) in &programs {
            let m = rw_grid(prog.cut_bound(), &d, &eps);
            let per_round = 4 * width_for(m) as usize;
            for t in 0..100 {
                let vals: Vec<DensityValuation> = (0..prog.players() as u64)
                    .map(|i| {
                        fairdiv_core::oracle::random_valuation(
                            trial_seed(13, t) * 8 + i,
                            BENCH_SEGMENTS,
                            &d,
                        )
                    })
                    .collect();
                let out = run_rw_simulated(prog.as_ref(), &vals, &eps).unwrap();
                assert!(passes(&out.allocation, &vals, *tag, &eps), "{} trial {t}", prog.name());
                assert_eq!(out.cost().rounds, prog.query_bound());
                for round in out.transcript.rounds() {
                    for msg in round {
                        assert!(msg.bits.len() <= per_round, "{} bits", msg.bits.len());
                    }
                }
                if prog.name() == "cut-and-choose" {
                    assert_eq!(out.allocation.cut_count(), 1);
                    let a = &out.allocation.assignment;
                    assert_ne!(a[0], a[1], "one player took the whole cake");
                }
            }
        }
        // A half mark deep inside a cell of the simulated grid: the run
        // still splits the cake instead of handing it to one player.
        let alice = DensityValuation::from_masses(
            vec![qi(0), q(1, 2), q(7, 10), qi(1)],
            &[q(3, 10), q(99, 500), q(251, 500)],
            qi(3),
        )
        .unwrap();
        let vals = [alice, DensityValuation::uniform()];
        let out = run_rw_simulated(&CutAndChoose, &vals, &q(1, 1000)).unwrap();
        assert_eq!(out.allocation.cut_count(), 1);
        assert_ne!(out.allocation.assignment[0], out.allocation.assignment[1]);
        "cut-and-choose, even-paz:3, even-paz:4 x 100 profiles; staircase regression".to_string()
    });
}

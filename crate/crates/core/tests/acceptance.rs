//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test --test acceptance`.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coop_relay::assignment::Strategy;
use coop_relay::channel::{end_to_end_ser, PairCoefficients, PairTable};
use coop_relay::harness::oracle::{exhaustive_lex_min, exhaustive_min_max, exhaustive_min_sum};
use coop_relay::harness::{run_experiment_records, ExperimentSpec, RunRecord};
use coop_relay::matching::{
    bottleneck_matching, hungarian_min_weight, minimum_bottleneck_matching, unique_bottleneck_edge_test, WeightMatrix,
};
use coop_relay::power::{glm_allocate, mwtp_allocate, relay_power_on_target, PairContext};
use coop_relay::sim::{run_lifetime, run_lifetime_with_table, LifetimeResult, SimConfig};

const SEED: u64 = 20_240_601;

struct Report {
    failed: Vec<&'static str>,
}

impl Report {
    fn line(&mut self, id: &'static str, title: &str, ok: bool, detail: String) {
        println!("{} {id:<3} {title}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed.push(id);
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

fn random_context(rng: &mut ChaCha8Rng) -> PairContext {
    let a = log_uniform(rng, 1e-10, 1.0);
    let b = log_uniform(rng, 1e-10, 1.0);
    let es = log_uniform(rng, 0.1, 100.0);
    let er = log_uniform(rng, 0.1, 100.0);
    let p = log_uniform(rng, 1e-6, 1e-2);
    PairContext::new(PairCoefficients { a, b }, es, er, p).unwrap()
}

/// Central-difference slope of `ps/es + f(ps)/er` at the MWTP optimum,
/// in units of the source term's slope `1/es`.
fn mwtp_slope(ctx: &PairContext) -> f64 {
    let ps = mwtp_allocate(ctx).ps;
    let pole = (ctx.coeff.a / ctx.ser_target).sqrt();
    let g = |x: f64| x / ctx.es + relay_power_on_target(&ctx.coeff, ctx.ser_target, x).unwrap() / ctx.er;
    let h = (1e-6 * ps).min(1e-3 * (ps - pole));
    (g(ps + h) - g(ps - h)) / (2.0 * h) * ctx.es
}

fn c1(report: &mut Report) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut ser_err, mut life_err, mut slope): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..10_000 {
        let ctx = random_context(&mut rng);
        let g = glm_allocate(&ctx);
        let m = mwtp_allocate(&ctx);
        for al in [&g, &m] {
            ser_err = ser_err.max(rel(end_to_end_ser(al.ps, al.pr, &ctx.coeff).unwrap(), ctx.ser_target));
        }
        life_err = life_err.max(rel(ctx.es / g.ps, ctx.er / g.pr));
        slope = slope.max(mwtp_slope(&ctx).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = ser_err <= 1e-9 && life_err <= 1e-12 && slope <= 1e-5 && secs < 5.0;
    report.line(
        "C1",
        "power allocation on 10^4 contexts",
        ok,
        format!("max SER rel err {ser_err:.2e} (<=1e-9), GLM lifetime rel err {life_err:.2e} (<=1e-12), MWTP |slope| {slope:.2e} (<=1e-5), {secs:.2}s (<5s)"),
    );
}

fn c2(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut worst: f64 = 0.0;
    for _ in 0..1_000 {
        let ctx = random_context(&mut rng);
        let k = log_uniform(&mut rng, 1e-3, 1e3);
        let scaled = PairContext {
            es: ctx.es * k,
            er: ctx.er * k,
            ..ctx
        };
        for (x, y) in [(glm_allocate(&ctx), glm_allocate(&scaled)), (mwtp_allocate(&ctx), mwtp_allocate(&scaled))] {
            worst = worst.max(rel(y.ps, x.ps)).max(rel(y.pr, x.pr)).max(rel(y.weight, x.weight / k));
        }
    }
    report.line(
        "C2",
        "energy-scaling invariance on 10^3 cases",
        worst <= 1e-12,
        format!("max rel deviation {worst:.2e} (<=1e-12)"),
    );
}

fn c3(report: &mut Report) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut mismatches = 0;
    let (mut distinct, mut distinct_certified) = (0, 0);
    let (mut equal, mut equal_uncertified) = (0, 0);
    let mut certified_compared = 0;
    for k in 0..500 {
        let flavour = k % 3;
        let n = if flavour == 2 { rng.gen_range(2..=7) } else { rng.gen_range(1..=7) };
        let m = rng.gen_range(1..=n);
        let c = rng.gen_range(0.1..1.0);
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                (0..n)
                    .map(|_| match flavour {
                        0 => rng.gen_range(0.0..1.0),
                        1 => f64::from(rng.gen_range(1u32..5)),
                        _ => c,
                    })
                    .collect()
            })
            .collect();
        let w = WeightMatrix::from_real_rows(rows).unwrap();

        if hungarian_min_weight(&w).1 != exhaustive_min_sum(&w) {
            mismatches += 1;
        }
        if bottleneck_matching(&w).bottleneck_value != exhaustive_min_max(&w) {
            mismatches += 1;
        }
        let mbm = minimum_bottleneck_matching(&w);
        if mbm.certified {
            certified_compared += 1;
            if mbm.matching.descending_weights(&w) != exhaustive_lex_min(&w) {
                mismatches += 1;
            }
        }
        match flavour {
            0 => {
                distinct += 1;
                distinct_certified += usize::from(mbm.certified);
            }
            2 => {
                equal += 1;
                equal_uncertified += usize::from(!mbm.certified);
            }
            _ => {}
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = mismatches == 0 && distinct_certified == distinct && equal_uncertified == equal && secs < 30.0;
    report.line(
        "C3",
        "matching vs exhaustive oracle on 500 matrices",
        ok,
        format!(
            "{mismatches} mismatches ({certified_compared} certified lex checks), distinct certified {distinct_certified}/{distinct}, all-equal uncertified {equal_uncertified}/{equal}, {secs:.2}s (<30s)"
        ),
    );
}

fn c4(report: &mut Report) {
    let w = WeightMatrix::new(3, vec![vec![0.5, 0.9, 0.9], vec![0.9, 0.2, 0.3], vec![0.9, 0.3, 0.25]]).unwrap();
    let bn = bottleneck_matching(&w);
    let unique = unique_bottleneck_edge_test(&w, &bn);
    let mbm = minimum_bottleneck_matching(&w);
    let ok = bn.bottleneck_value == 0.5
        && bn.bottleneck_edge == (0, 0)
        && unique
        && mbm.certified
        && mbm.matching.pairing == vec![0, 1, 2];
    report.line(
        "C4",
        "3x3 walkthrough fixture",
        ok,
        format!(
            "bottleneck {} at {:?}, unique {unique}, MBM {:?} certified {}",
            bn.bottleneck_value, bn.bottleneck_edge, mbm.matching.pairing, mbm.certified
        ),
    );
}

fn conservation_error(r: &LifetimeResult) -> f64 {
    let residual: f64 = r.residual_source_energy.iter().chain(&r.residual_relay_energy).sum();
    rel(r.consumed_energy + residual, r.initial_energy)
}

fn c5(report: &mut Report, sweep_records: &[RunRecord]) {
    let spec = ExperimentSpec::default();
    let no_updates = |strategy| SimConfig {
        strategy,
        update_interval_packets: u64::MAX,
        ..spec.sim.clone()
    };
    let mut worst = sweep_records.iter().map(|r| conservation_error(&r.result)).fold(0.0, f64::max);
    let mut unequal = 0;
    for index in 0..100 {
        let topo = spec.topology(20, index).unwrap();
        let bm = run_lifetime(&topo, &no_updates(Strategy::GLM_BM)).unwrap();
        let mbm = run_lifetime(&topo, &no_updates(Strategy::GLM_MBM)).unwrap();
        worst = worst.max(conservation_error(&bm)).max(conservation_error(&mbm));
        unequal += usize::from(bm.lifetime_packets != mbm.lifetime_packets);
    }

    // a = b = 5e-7 at 1e-4 gives ps = pr = 0.1 W; 1 J at 0.01 J per packet
    let coeff = PairCoefficients { a: 5e-7, b: 5e-7 };
    let table = PairTable::from_parts(vec![vec![coeff]], vec![1.0]).unwrap();
    let one = run_lifetime_with_table(&table, &[1.0], &[1.0], &no_updates(Strategy::GLM_MBM)).unwrap();

    let ok = worst <= 1e-9 && unequal == 0 && one.lifetime_packets == 100;
    report.line(
        "C5",
        "simulator identities",
        ok,
        format!(
            "max conservation rel err {worst:.2e} over {} runs (<=1e-9), BM != MBM lifetime on {unequal}/100 topologies without updates, one-pair fixture {} packets (100)",
            sweep_records.len() + 200,
            one.lifetime_packets
        ),
    );
}

/// Per (strategy, sweep value): mean and standard error of a metric.
type Table = BTreeMap<(String, u64), (f64, f64)>;

fn tabulate(records: &[RunRecord], metric: impl Fn(&LifetimeResult) -> f64) -> Table {
    let mut groups: BTreeMap<(String, u64), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry((r.strategy.to_string(), r.sweep_value)).or_default().push(metric(&r.result));
    }
    groups
        .into_iter()
        .map(|(k, v)| {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            (k, (mean, (var / n).sqrt()))
        })
        .collect()
}

fn mean(t: &Table, s: Strategy, v: u64) -> f64 {
    t[&(s.to_string(), v)].0
}

fn c6(report: &mut Report, life: &Table) {
    let n = 20;
    let ratios = [
        ("GLM-MBM/GLM-SRS", Strategy::GLM_MBM, Strategy::GLM_SRS, 1.03),
        ("GLM-MBM/GLM-BM", Strategy::GLM_MBM, Strategy::GLM_BM, 1.05),
        ("GLM-SRS/MWTP-MWM", Strategy::GLM_SRS, Strategy::MWTP_MWM, 1.11),
        ("GLM-SRS/MWTP-SRS", Strategy::GLM_SRS, Strategy::MWTP_SRS, 1.12),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, num, den, target) in ratios {
        let r = mean(life, num, n) / mean(life, den, n);
        let hit = (r - target).abs() <= 0.04;
        ok &= hit;
        parts.push(format!("{name} {r:.3} (target {target}±0.04{})", if hit { "" } else { " MISS" }));
    }
    report.line("C6", "lifetime ratios at N=20, T_u=60", ok, parts.join(", "));
}

fn c7(report: &mut Report, life: &Table, relay_counts: &[u64]) {
    let mut ok = true;
    let mut parts = Vec::new();
    for s in Strategy::ALL {
        let points: Vec<(f64, f64)> = relay_counts.iter().map(|&v| life[&(s.to_string(), v)]).collect();
        let drops: Vec<(f64, f64)> = points
            .windows(2)
            .filter(|w| w[1].0 < w[0].0)
            .map(|w| (w[0].0 - w[1].0, w[0].1.max(w[1].1)))
            .collect();
        let pass = drops.is_empty() || (drops.len() == 1 && drops[0].0 <= drops[0].1);
        ok &= pass;
        parts.push(format!("{s} {} inversion(s)", drops.len()));
    }
    report.line("C7", "lifetime non-decreasing in N over {10..30}", ok, parts.join(", "));
}

fn c8(report: &mut Report, life: &Table, intervals: &[u64], fig2: &[RunRecord]) {
    let mut rising = Vec::new();
    for s in Strategy::ALL {
        for w in intervals.windows(2) {
            let (a, b) = (mean(life, s, w[0]), mean(life, s, w[1]));
            if b > a {
                rising.push(format!("{s} {}->{} +{:.0}", w[0], w[1], b - a));
            }
        }
    }
    let monotone = rising.is_empty();

    let gap = |v: u64| mean(life, Strategy::GLM_BM, v) - mean(life, Strategy::GLM_SRS, v);
    let first_ahead = intervals.iter().copied().find(|&v| gap(v) > 0.0);
    let crossover = gap(intervals[0]) < 0.0 && first_ahead.is_some_and(|v| (1_000..=30_000).contains(&v));

    let last = *intervals.last().unwrap();
    let per_topology = |s: Strategy| -> BTreeMap<usize, &LifetimeResult> {
        fig2.iter()
            .filter(|r| r.strategy == s && r.sweep_value == last)
            .map(|r| (r.topology_index, &r.result))
            .collect()
    };
    let (bm, mbm) = (per_topology(Strategy::GLM_BM), per_topology(Strategy::GLM_MBM));
    let differ = bm.iter().filter(|(k, r)| r.lifetime_packets != mbm[k].lifetime_packets).count();
    let outlived = bm.values().chain(mbm.values()).filter(|r| r.updates > 0).count();
    let coincide = differ == 0;

    let detail = format!(
        "non-increasing in T_u: {} [{}]; BM-SRS gap at T_u=60 {:.0}, first T_u with BM ahead {}: {}; at T_u={last} BM and MBM differ on {differ}/{} topologies ({outlived} runs outlived T_u): {}",
        if monotone { "yes" } else { "no" },
        rising.join("; "),
        gap(intervals[0]),
        first_ahead.map_or("none".to_string(), |v| v.to_string()),
        if crossover { "ok" } else { "no crossover" },
        bm.len(),
        if coincide { "ok" } else { "not coincident" },
    );
    report.line("C8", "update-interval trends at N=20", monotone && crossover && coincide, detail);
}

fn c9(report: &mut Report, energy: &Table, wasted: &Table) {
    let glm = [Strategy::GLM_BM, Strategy::GLM_MBM, Strategy::GLM_SRS];
    let mwtp = [Strategy::MWTP_MWM, Strategy::MWTP_SRS];
    let mut ok = true;
    let mut parts = Vec::new();
    for v in [60, 30_000] {
        let glm_min_e = glm.iter().map(|&s| mean(energy, s, v)).fold(f64::INFINITY, f64::min);
        let mwtp_max_e = mwtp.iter().map(|&s| mean(energy, s, v)).fold(0.0, f64::max);
        let glm_max_w = glm.iter().map(|&s| mean(wasted, s, v)).fold(0.0, f64::max);
        let mwtp_min_w = mwtp.iter().map(|&s| mean(wasted, s, v)).fold(f64::INFINITY, f64::min);
        ok &= glm_min_e >= mwtp_max_e && glm_max_w < mwtp_min_w;
        parts.push(format!(
            "T_u={v}: J/packet GLM min {glm_min_e:.3e} vs MWTP max {mwtp_max_e:.3e}, wasted J GLM max {glm_max_w:.1} vs MWTP min {mwtp_min_w:.1}"
        ));
    }
    report.line("C9", "energy per packet and wasted energy", ok, parts.join("; "));
}

fn main() -> ExitCode {
    let mut report = Report { failed: Vec::new() };
    c1(&mut report);
    c2(&mut report);
    c3(&mut report);
    c4(&mut report);

    let start = Instant::now();
    // the N=20 point of the relay sweep is the T_u=60 point of the interval sweep
    let fig2 = ExperimentSpec::figure(2).unwrap();
    let mut fig1 = ExperimentSpec::figure(1).unwrap();
    assert_eq!((fig1.relays, fig1.seed, fig1.sim.update_interval_packets), (20, fig2.seed, 60));
    fig1.sweep_values.retain(|&n| n != 20);
    let fig2_records = run_experiment_records(&fig2).unwrap();
    let mut fig1_records = run_experiment_records(&fig1).unwrap();
    fig1_records.extend(fig2_records.iter().filter(|r| r.sweep_value == 60).cloned().map(|mut r| {
        r.sweep_value = 20;
        r
    }));
    let sweep_secs = start.elapsed().as_secs_f64();

    let all: Vec<RunRecord> = fig1_records.iter().chain(&fig2_records).cloned().collect();
    c5(&mut report, &all);

    let lifetime = |r: &LifetimeResult| r.lifetime_packets as f64;
    let life1 = tabulate(&fig1_records, lifetime);
    let life2 = tabulate(&fig2_records, lifetime);
    let energy2 = tabulate(&fig2_records, |r| r.avg_energy_per_packet.unwrap_or(0.0));
    let wasted2 = tabulate(&fig2_records, |r| r.wasted_energy);

    c6(&mut report, &life1);
    c7(&mut report, &life1, &ExperimentSpec::figure(1).unwrap().sweep_values);
    c8(&mut report, &life2, &fig2.sweep_values, &fig2_records);
    c9(&mut report, &energy2, &wasted2);

    println!("(Monte-Carlo sweeps: {} topologies, seed {}, {sweep_secs:.0}s)", fig2.topologies, fig2.seed);
    if report.failed.is_empty() {
        println!("all 9 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", report.failed.join(", "));
        ExitCode::FAILURE
    }
}

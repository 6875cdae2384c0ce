use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mmimo_core::mc_oracle::{
    conditional_expectations, mmse_estimate, received_pilots, sample_channels, ConditionalCase, McScenario,
};
use mmimo_core::optimizer::ReusePlans;
use mmimo_core::rng::{stream, Purpose};
use mmimo_core::{
    compute_moments, make_pilot_plan, optimize_point, se_joint, HexNetwork, InterferenceCase, MomentTable, Scheme,
    SeConfig,
};
use std::hint::black_box;

const SNR: f64 = 3.1622776601683795;

fn net(tiers: u32) -> HexNetwork {
    HexNetwork::new(tiers, 1.0, 3.7, 1.0).unwrap()
}

fn table() -> MomentTable {
    compute_moments(&net(5), InterferenceCase::Average, 10_000, 1).unwrap()
}

fn closed_form(c: &mut Criterion) {
    let mt = table();
    let plan = make_pilot_plan(3, &net(5), 10).unwrap();
    let cfg = SeConfig::new(100, 10, 3, 400, SNR);
    let mut g = c.benchmark_group("se_joint");
    for s in Scheme::ALL {
        g.bench_function(s.as_str(), |b| {
            b.iter(|| se_joint(s, black_box(&cfg), &mt, &plan).unwrap())
        });
    }
    g.finish();

    let plans = ReusePlans::new(&net(5), &[1, 3, 4, 7]).unwrap();
    let base = SeConfig::new(1, 1, 1, 400, SNR);
    let mut g = c.benchmark_group("optimize_point");
    for m in [100usize, 10_000] {
        g.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| optimize_point(m, Scheme::Zf, &base, &mt, &plans).unwrap())
        });
    }
    g.finish();
}

fn moments(c: &mut Criterion) {
    let n = net(2);
    let mut g = c.benchmark_group("moments");
    g.sample_size(10);
    g.bench_function("average_tiers2_10k", |b| {
        b.iter(|| compute_moments(&n, InterferenceCase::Average, 10_000, 1).unwrap())
    });
    g.bench_function("worst_tiers2", |b| {
        b.iter(|| compute_moments(&n, InterferenceCase::Worst, 1000, 0).unwrap())
    });
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let n = net(1);
    let plan = make_pilot_plan(1, &n, 4).unwrap();
    let scn = McScenario::sample(n, plan, 64, SNR, &mut stream(1, Purpose::Positions, 0)).unwrap();
    let mut rng = stream(1, Purpose::Channels, 0);
    c.bench_function("mmse_estimate_m64_k4", |b| {
        b.iter(|| {
            let h = sample_channels(&scn, 0, &mut rng);
            let y = received_pilots(&scn, &h, &mut rng);
            mmse_estimate(&scn, 0, &y).unwrap()
        })
    });
    let mut g = c.benchmark_group("conditional_100_draws");
    for s in Scheme::ALL {
        let cases = [ConditionalCase { scheme: s, scn: &scn }];
        g.bench_function(s.as_str(), |b| {
            b.iter(|| conditional_expectations(&cases, 0.0, 100, &mut rng).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, closed_form, moments, oracle);
criterion_main!(benches);

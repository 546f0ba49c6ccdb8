use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use uavbs_core::{knapsack, placement, rate_inversion, scenario};
use uavbs_core::{GenSpec, Region, SearchConfig};

fn small_scenario(n: usize) -> uavbs_core::Scenario {
    let mut spec = GenSpec::new(n, 4, 2, 7);
    spec.region = Region {
        width_m: 1500.0,
        height_m: 1500.0,
    };
    scenario::generate(&spec).unwrap()
}

fn bench_demand_table(c: &mut Criterion) {
    let sc = small_scenario(50);
    let users = sc.user_points();
    let uav = uavbs_core::Point3::new(750.0, 750.0, 200.0);
    c.bench_function("demand_table_q50", |b| {
        b.iter(|| {
            rate_inversion::build_demand_table(
                &sc.channel,
                &uav,
                &users,
                &sc.tiers_bps,
                10.0e6,
                rate_inversion::DEFAULT_BISECTION_TOL_HZ,
            )
            .unwrap()
        })
    });
}

fn bench_knapsack(c: &mut Criterion) {
    let mut group = c.benchmark_group("knapsack_dp");
    for &n in &[20usize, 50] {
        let sc = small_scenario(n);
        let cfg = SearchConfig::for_scenario(&sc);
        let uav = uavbs_core::Point3::new(750.0, 750.0, 200.0);
        let users = sc.user_points();
        let demand = rate_inversion::build_demand_table(
            &sc.channel,
            &uav,
            &users,
            &sc.tiers_bps,
            10.0e6,
            cfg.bisect_tol_hz,
        )
        .unwrap();
        let instance =
            knapsack::build_instance(&demand, &sc.willingness, &sc.tiers_bps, 30.0e6, 10.0e6)
                .unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &instance, |b, inst| {
            b.iter(|| {
                knapsack::solve_dp_with_budget(
                    inst,
                    cfg.rate_unit_bps,
                    cfg.bw_unit_hz,
                    knapsack::DEFAULT_CELL_BUDGET,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_gss(c: &mut Criterion) {
    let sc = small_scenario(20);
    let mut cfg = SearchConfig::for_scenario(&sc);
    cfg.grid_rows = 2;
    cfg.grid_cols = 3;
    cfg.bw_unit_hz = 50.0e3;
    let mut group = c.benchmark_group("gss");
    group.sample_size(10);
    group.bench_function("q20_grid2x3", |b| {
        b.iter(|| placement::gss_optimize(&sc, &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_demand_table, bench_knapsack, bench_gss);
criterion_main!(benches);

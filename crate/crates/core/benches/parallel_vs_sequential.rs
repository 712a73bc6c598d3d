//! Compares the rayon lanes against sequential execution.
//!
//! With the `parallel` feature (default), every benchmark runs twice: once
//! inside a 1-thread rayon pool and once inside a pool sized to the
//! machine. Building with `--no-default-features` measures the true
//! sequential fallback for the same benchmark names:
//!
//! ```text
//! cargo bench -p sce-core
//! cargo bench -p sce-core --no-default-features
//! ```

use criterion::{criterion_group, criterion_main, Criterion};

use sce_core::hardness::{wdasw_search, AdjustmentWeights};
use sce_core::oracle::{OracleObjective, StabilityOracle};
use sce_core::rational::{rat, ratio, Rational};
use sce_core::solver::{solve_opt_sce_pa, LeaderWeights};
use sce_core::{NormalFormGame, StackelbergGame};
use std::collections::BTreeSet;

/// Deterministic utility tensor with small mixed-denominator rationals.
fn synthetic_game(strategy_counts: Vec<usize>) -> NormalFormGame {
    let mut state = 0x9e3779b97f4a7c15u64;
    NormalFormGame::from_fn(strategy_counts, |_, _| {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let numer = ((state >> 33) % 19) as i64 - 9;
        let denom = 1 + ((state >> 21) % 3) as i64;
        ratio(numer, denom)
    })
}

fn run_lanes(c: &mut Criterion, name: &str, mut job: impl FnMut() + Send) {
    #[cfg(feature = "parallel")]
    {
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("pool");
        c.bench_function(&format!("{name}/threads-1"), |b| {
            b.iter(|| single.install(&mut job))
        });
        let full = rayon::ThreadPoolBuilder::new().build().expect("pool");
        let threads = full.current_num_threads();
        c.bench_function(&format!("{name}/threads-{threads}"), |b| {
            b.iter(|| full.install(&mut job))
        });
    }
    #[cfg(not(feature = "parallel"))]
    {
        c.bench_function(&format!("{name}/sequential"), |b| b.iter(&mut job));
    }
}

fn bench_profile_scan(c: &mut Criterion) {
    let game = synthetic_game(vec![16, 16, 16]);
    let weights = AdjustmentWeights {
        deviation: std::collections::BTreeMap::new(),
        utility: vec![rat(1), rat(1), rat(1)],
    };
    // Threshold above the welfare ceiling forces a full scan.
    let threshold = rat(100);
    run_lanes(c, "wdasw_scan_4096_profiles", move || {
        let hit = wdasw_search(&game, &weights, &threshold).expect("within scan limit");
        assert!(hit.is_none());
    });
}

fn bench_oracle_solve(c: &mut Criterion) {
    let game = synthetic_game(vec![5, 5]);
    let sg = StackelbergGame::new(game, vec![0]).expect("leader in range");
    run_lanes(c, "oracle_equilibrium_5x5", move || {
        let oracle = StabilityOracle::new(&sg);
        let objective = OracleObjective::social_welfare(2);
        let x = oracle
            .optimize(&objective, &BTreeSet::new(), &[])
            .expect("equilibria exist");
        assert!(x.support_size() >= 1);
    });
}

fn bench_punishment_recursion(c: &mut Criterion) {
    let game = synthetic_game(vec![2, 2, 2]);
    let sg = StackelbergGame::all_leaders(game);
    let weights = LeaderWeights::new(vec![rat(1), ratio(1, 2), ratio(1, 3)]).expect("in range");
    run_lanes(c, "optimal_plan_three_leaders", move || {
        let report = solve_opt_sce_pa(&sg, &weights).expect("solves");
        assert_eq!(report.oracle_queries, 13);
        let _ = Rational::from(report.objective);
    });
}

criterion_group!(
    benches,
    bench_profile_scan,
    bench_oracle_solve,
    bench_punishment_recursion
);
criterion_main!(benches);

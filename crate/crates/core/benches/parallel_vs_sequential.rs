use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;

use dsekit::flash::{flash, FlashParams};
use dsekit::harness::experiment::{run_experiment, RunOptions};
use dsekit::harness::plan::ExperimentPlan;
use dsekit::indicators::{hypervolume_monte_carlo, HvOptions};
use dsekit::pareto::nondominated_indices;
use dsekit::problems::TabularSpace;
use dsekit::{Exec, Front, SeededRng};

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn random_points(n: usize, m: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = SeededRng::new(seed);
    (0..n)
        .map(|_| (0..m).map(|_| rng.random::<f64>()).collect())
        .collect()
}

fn monte_carlo_hv(c: &mut Criterion) {
    let mut rng = SeededRng::new(1);
    // points near the unit sphere so most of them are mutually non-dominated
    let pts: Vec<Vec<f64>> = (0..200)
        .map(|_| {
            let v: Vec<f64> = (0..4).map(|_| rng.random::<f64>() + 0.01).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| x / norm).collect()
        })
        .collect();
    let front = Front::new(pts).unwrap();
    let mut g = c.benchmark_group("hypervolume_mc_4d");
    for (name, exec) in MODES {
        let opts = HvOptions {
            samples: 200_000,
            seed: 7,
            exec,
        };
        g.bench_function(name, |b| {
            b.iter(|| hypervolume_monte_carlo(black_box(&front), &[1.1; 4], &opts).unwrap())
        });
    }
    g.finish();
}

fn nondominated(c: &mut Criterion) {
    let mut g = c.benchmark_group("nondominated_3d");
    for n in [1_000, 5_000] {
        let pts = random_points(n, 3, n as u64);
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, n), &pts, |b, pts| {
                b.iter(|| nondominated_indices(black_box(pts), exec).unwrap())
            });
        }
    }
    g.finish();
}

fn flash_steps(c: &mut Criterion) {
    let mut csv = String::from("a,b,c,d,o1,o2\n");
    for (i, p) in random_points(4000, 2, 3).iter().enumerate() {
        let (a, b, cc, d) = (i % 10, (i / 10) % 10, (i / 100) % 10, i / 1000);
        csv.push_str(&format!(
            "{a},{b},{cc},{d},{},{}\n",
            p[0] + a as f64,
            p[1] + (9 - b) as f64
        ));
    }
    let table = TabularSpace::read(csv.as_bytes(), 2, "bench").unwrap();
    let mut g = c.benchmark_group("flash_4000_rows");
    g.sample_size(10);
    for (name, exec) in MODES {
        let params = FlashParams {
            init_samples: 20,
            budget: 40,
            exec,
            ..FlashParams::default()
        };
        g.bench_function(name, |b| {
            b.iter(|| flash(black_box(&table), &params, 5).unwrap())
        });
    }
    g.finish();
}

fn small_plan(c: &mut Criterion) {
    let plan = ExperimentPlan::parse(
        r#"
budget = 1000
repeats = 8
indicators = ["igd", "hv", "spread"]

[problems.zdt1]
type = "zdt1"
n = 10

[algorithms.random]
type = "random"

[algorithms.ga]
type = "ga"
pop_size = 40
"#,
        ".",
    )
    .unwrap();
    let mut g = c.benchmark_group("plan_zdt1_2x8");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = RunOptions {
            exec,
            ..RunOptions::default()
        };
        g.bench_function(name, |b| {
            b.iter(|| run_experiment(black_box(&plan), &opts).unwrap())
        });
    }
    g.finish();
}

criterion_group!(
    benches,
    monte_carlo_hv,
    nondominated,
    flash_steps,
    small_plan
);
criterion_main!(benches);

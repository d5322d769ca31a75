use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use latticekit::gauge::{sample_ball, Gauge, LpNorm};
use latticekit::lattice::Lattice;
use latticekit::rational::{QVec, Q};
use latticekit::rng::SeedStream;
use latticekit::sieve::{aks_pairs, sieve_round};

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let seq = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let par = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("sequential", seq), ("parallel", par)]
}

fn points(n: usize, count: usize) -> (Gauge, Q, Vec<QVec>) {
    let g = Gauge::lp(n, LpNorm::L2);
    let r = Q::from_integer(4.into());
    let mut rng = SeedStream::new(7).rng();
    let pts = (0..count).map(|_| sample_ball(&g, &r, &mut rng).unwrap()).collect();
    (g, r, pts)
}

fn bench_round(c: &mut Criterion) {
    let (g, r, pts) = points(6, 4000);
    let mut group = c.benchmark_group("sieve_round");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| sieve_round(&pts, &r, &g).unwrap()))
        });
    }
    group.finish();
}

fn bench_pairs(c: &mut Criterion) {
    let l = Lattice::from_integer_rows(&[vec![3, 1, 0, 0], vec![0, 2, 1, 0], vec![1, 0, 4, 1], vec![0, 1, 0, 5]]).unwrap();
    let g = Gauge::lp(4, LpNorm::L2);
    let target = Q::from_integer(6.into());
    let stream = SeedStream::new(11);
    let mut group = c.benchmark_group("aks_pairs");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| aks_pairs(&l, &g, 3000, &target, &stream).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_round, bench_pairs);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hardnash::brouwer::{build_field, GeometryParams};
use hardnash::codec::build_code;
use hardnash::lineworld::{gen_instance, Kind};
use hardnash::par::{map_range, Exec};
use rand::{Rng, SeedableRng};

fn eval_sampling(c: &mut Criterion) {
    let inst = gen_instance(Kind::Eotl, 3, 0).unwrap();
    let code = build_code(inst.layout.kappa(), 0.3, 0).unwrap();
    let field = build_field(&inst, &code, GeometryParams::demo()).unwrap();
    let segs: Vec<_> = field.pieces().segments.values().cloned().collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let points: Vec<Vec<f64>> = (0..4096)
        .map(|k| {
            let s = &segs[k % segs.len()];
            s.closest(rng.gen_range(0.0..=s.len))
                .into_iter()
                .map(|v| (v + rng.gen_range(-0.02..0.02)).clamp(-1.0, 2.0))
                .collect()
        })
        .collect();

    let mut group = c.benchmark_group("eval_f_4096");
    group.sample_size(10);
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| map_range(exec, points.len(), |i| field.eval_f(&points[i]).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, eval_sampling);
criterion_main!(benches);

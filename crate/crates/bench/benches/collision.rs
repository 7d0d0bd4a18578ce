use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use speclag::collide::{collision_operator, conserve_project, ConservationBasis};
use speclag::grid::{forward_transform, inverse_transform};
use speclag::kernel::ghat_maxwell;
use speclag::scenarios::maxwellian_pdf;
use speclag::{CollisionParams, RealField, VelocityGrid};

fn maxwellian(n: usize) -> RealField {
    let grid = VelocityGrid::new(10.0, n).expect("valid grid");
    RealField::from_fn(grid, |v| maxwellian_pdf(v, 1.0))
}

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("transform");
    for n in [16, 32] {
        let f = maxwellian(n);
        let fh = forward_transform(&f);
        group.bench_with_input(BenchmarkId::new("forward", n), &f, |b, f| {
            b.iter(|| forward_transform(black_box(f)))
        });
        group.bench_with_input(BenchmarkId::new("inverse", n), &fh, |b, fh| {
            b.iter(|| inverse_transform(black_box(fh)))
        });
    }
    group.finish();
}

fn collision(c: &mut Criterion) {
    let params = CollisionParams::maxwell(8.0).expect("valid params");
    let mut group = c.benchmark_group("collision");
    group.sample_size(10);
    for n in [16, 24] {
        let f = maxwellian(n);
        group.bench_with_input(BenchmarkId::new("operator", n), &f, |b, f| {
            b.iter(|| collision_operator(black_box(f), &params).expect("finite"))
        });
        let basis = ConservationBasis::new(*f.grid()).expect("basis");
        let q = collision_operator(&f, &params).expect("finite").q;
        group.bench_with_input(BenchmarkId::new("projection", n), &q, |b, q| {
            b.iter(|| conserve_project(black_box(q), &basis).expect("projects"))
        });
    }
    group.finish();
}

fn kernel(c: &mut Criterion) {
    let params = CollisionParams::maxwell(8.0).expect("valid params");
    c.bench_function("ghat_maxwell", |b| {
        b.iter(|| {
            ghat_maxwell(
                black_box([0.7, -1.3, 2.1]),
                black_box([1.1, 0.4, -0.9]),
                &params,
            )
        })
    });
}

criterion_group!(benches, transforms, collision, kernel);
criterion_main!(benches);

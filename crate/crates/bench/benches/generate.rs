use criterion::{criterion_group, criterion_main, Criterion};
use parkaug::pipeline::Plan;
use parkaug::{GenerationMode, PipelineConfig};
use parkaug_bench::corpus;

fn records(c: &mut Criterion) {
    let corpus = corpus(1280, 580, 3);
    let mut g = c.benchmark_group("record 1280x580");
    for (name, mode) in [("oda", GenerationMode::Oda), ("pda", GenerationMode::Pda)] {
        let plan = Plan::new(&corpus, PipelineConfig::new(1, 1, mode)).unwrap();
        let mut i = 0u64;
        g.bench_function(name, |b| {
            b.iter(|| {
                i += 1;
                plan.generate_record(i).1.unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, records);
criterion_main!(benches);

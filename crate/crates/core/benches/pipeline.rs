use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use relwords::clustering::pairwise_distances_with;
use relwords::embedding::{gram_matrix_with, KpcaModel};
use relwords::features::{vectorize_with, Vocabulary};
use relwords::par::Strategy;
use relwords::synthetic::PlantedTopics;
use relwords::text::{tokenize_corpus_with, BigramStats};

const STRATEGIES: [(&str, Strategy); 2] = [("sequential", Strategy::Sequential), ("parallel", Strategy::Parallel)];

fn corpus(docs_per_topic: usize) -> relwords::corpus::Corpus {
    PlantedTopics {
        n_topics: 8,
        docs_per_topic,
        filler_vocab: 2000,
        filler_per_doc: 80,
        ..Default::default()
    }
    .generate()
    .0
}

fn bench_kernels(c: &mut Criterion) {
    let corpus = corpus(100);
    let streams = tokenize_corpus_with(&corpus, Strategy::Sequential);
    let vocab = Vocabulary::build(&streams, 1).unwrap();
    let matrix = vectorize_with(&streams, &vocab, Strategy::Sequential);
    let model = KpcaModel::fit_rows(matrix.rows(), matrix.n_terms(), 250, Strategy::Parallel).unwrap();
    let embedding = model.transform_rows(matrix.rows(), Strategy::Parallel);

    let mut g = c.benchmark_group("kernels");
    g.sample_size(20);
    for (name, strategy) in STRATEGIES {
        g.bench_with_input(BenchmarkId::new("tokenize", name), &strategy, |b, &s| {
            b.iter(|| tokenize_corpus_with(&corpus, s))
        });
        g.bench_with_input(BenchmarkId::new("bigram_counts", name), &strategy, |b, &s| {
            b.iter(|| BigramStats::from_streams_with(&streams, s))
        });
        g.bench_with_input(BenchmarkId::new("vectorize", name), &strategy, |b, &s| {
            b.iter(|| vectorize_with(&streams, &vocab, s))
        });
        g.bench_with_input(BenchmarkId::new("gram", name), &strategy, |b, &s| {
            b.iter(|| gram_matrix_with(matrix.rows(), s))
        });
        g.bench_with_input(BenchmarkId::new("kpca_transform", name), &strategy, |b, &s| {
            b.iter(|| model.transform_rows(matrix.rows(), s))
        });
        g.bench_with_input(BenchmarkId::new("pairwise_distances", name), &strategy, |b, &s| {
            b.iter(|| pairwise_distances_with(&embedding, s))
        });
    }
    g.finish();
}

fn bench_fit(c: &mut Criterion) {
    let mut g = c.benchmark_group("kpca_fit");
    g.sample_size(10);
    for docs_per_topic in [25, 50] {
        let corpus = corpus(docs_per_topic);
        let streams = tokenize_corpus_with(&corpus, Strategy::Sequential);
        let vocab = Vocabulary::build(&streams, 1).unwrap();
        let matrix = vectorize_with(&streams, &vocab, Strategy::Sequential);
        for (name, strategy) in STRATEGIES {
            g.bench_with_input(BenchmarkId::new(name, corpus.len()), &strategy, |b, &s| {
                b.iter(|| KpcaModel::fit_rows(matrix.rows(), matrix.n_terms(), 250, s).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, bench_kernels, bench_fit);
criterion_main!(benches);

//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL
//! line; the process exits nonzero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use approx::abs_diff_eq;
use common::*;
use relwords::clustering::{cosine_distance, dbscan};
use relwords::embedding::fit_transform;
use relwords::features::{idf, vectorize, Vocabulary};
use relwords::pipeline::{self, PipelineConfig};
use relwords::relevance::{fpr_from_rates, score_final, score_quot, DEFAULT_EPSILON};
use relwords::report::{layout_contrast_cloud, layout_wordcloud, render_contrast_svg, render_svg, Canvas};
use relwords::synthetic::{PlantedTopics, TrendingPeriods};
use relwords::text::TokenStream;
use relwords::Error;

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: false,
        detail: detail.into(),
    }
}

fn score_fixed_points() -> Outcome {
    let eps = DEFAULT_EPSILON;
    let a = score_quot(0.3, 0.05, eps);
    let b = score_quot(1.0, 0.05, eps);
    if a != 1.0 || b != 1.0 {
        return fail(format!("score_quot(0.3, 0.05) = {a}, score_quot(1.0, 0.05) = {b}"));
    }
    let top = score_final(1.0, 0.0, eps);
    if top != 1.0 {
        return fail(format!("score_final(1, 0) = {top}"));
    }
    for i in 0..=100 {
        let f = i as f64 / 100.0;
        let r = score_final(0.0, f, eps);
        if r != 0.0 {
            return fail(format!("score_final(0, {f}) = {r}"));
        }
    }
    pass("quot(0.3,0.05) = quot(1,0.05) = 1; final(1,0) = 1; final(0,f) = 0")
}

fn surface_shape() -> Outcome {
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
    let r = |t: f64, f: f64| score_final(t, f, DEFAULT_EPSILON);
    for &f in &grid {
        for &t in &grid {
            let v = r(t, f);
            if !(0.0..=1.0).contains(&v) {
                return fail(format!("r({t}, {f}) = {v} out of [0, 1]"));
            }
        }
        for w in grid.windows(2) {
            if r(w[1], f) < r(w[0], f) {
                return fail(format!("r decreases in TPR at fpr {f}, tpr {}", w[1]));
            }
            if r(f, w[1]) > r(f, w[0]) {
                return fail(format!("r increases in FPR at tpr {f}, fpr {}", w[1]));
            }
        }
    }
    pass("21x21 grid: bounded, monotone in both axes")
}

fn dbscan_oracle_equivalence() -> Outcome {
    let mut max_n = 0;
    for seed in 0..100u64 {
        let (n, d) = random_distance_matrix(seed);
        max_n = max_n.max(n);
        let got = match dbscan(&matrix(n, d.clone()), 0.45, 3) {
            Ok(a) => a,
            Err(e) => return fail(format!("seed {seed}: {e}")),
        };
        let want = dbscan_oracle(n, &|i, j| d[i * n + j], 0.45, 3);
        let got = label_options(&got.labels);
        if canonical(&got) != canonical(&want) {
            return fail(format!("seed {seed}: partition differs from oracle"));
        }
    }
    pass(format!("100 matrices (max N = {max_n}) match the oracle"))
}

fn streams_of(docs: Vec<Vec<String>>) -> Vec<TokenStream> {
    docs.into_iter()
        .enumerate()
        .map(|(i, tokens)| TokenStream {
            doc_id: format!("d{i}"),
            tokens,
        })
        .collect()
}

fn spectral_reconstruction() -> Outcome {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2017);
    let mut worst: f64 = 0.0;
    for trial in 0..25 {
        let n = rng.random_range(3..=100);
        let vocab_size = rng.random_range(5..300);
        let mut docs = random_docs(&mut rng, n, vocab_size, 1..50);
        let dup = rng.random_range(0..n);
        docs.push(docs[dup].clone());
        let s = streams_of(docs);
        let m = vectorize(&s, &Vocabulary::build(&s, 1).unwrap());
        let (_, y) = match fit_transform(&m, m.n_docs()) {
            Ok(r) => r,
            Err(Error::DegenerateCorpus) => continue,
            Err(e) => return fail(format!("trial {trial}: {e}")),
        };
        let exact = centered_gram_ref(m.rows(), m.n_terms());
        let size = m.n_docs();
        let approx: Vec<Vec<f64>> = y.gram().chunks(size).map(<[f64]>::to_vec).collect();
        let err = frobenius_rel_error(&approx, &exact);
        worst = worst.max(err);
        if err > 1e-8 {
            return fail(format!("trial {trial}: relative error {err:e}"));
        }
        if y.row(dup) != y.row(size - 1) {
            return fail(format!("trial {trial}: duplicate documents embed differently"));
        }
    }
    pass(format!("worst relative error {worst:.2e}; duplicates identical"))
}

fn planted_topics() -> Outcome {
    let gen = PlantedTopics::default();
    let (corpus, topics) = gen.generate();
    let run = match pipeline::run(&corpus, &PipelineConfig::default()) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    let a = &run.assignment;
    if a.n_clusters != gen.n_topics {
        return fail(format!("{} clusters, {} noise", a.n_clusters, a.noise_count()));
    }
    let mut misassigned = a.noise_count();
    let mut cluster_topic = Vec::new();
    for c in 0..a.n_clusters {
        let members = a.members(c);
        let mut votes = vec![0; gen.n_topics];
        for &i in &members {
            votes[topics[i]] += 1;
        }
        let (major, hits) = votes.iter().enumerate().max_by_key(|(_, v)| **v).unwrap();
        misassigned += members.len() - hits;
        cluster_topic.push(major);
    }
    if misassigned > 0 {
        return fail(format!("{misassigned} misassigned documents"));
    }
    let table = match run.relevance() {
        Ok(t) => t,
        Err(e) => return fail(e.to_string()),
    };
    for (c, &topic) in cluster_topic.iter().enumerate() {
        let keywords = gen.keywords(topic);
        let top = table.rank_terms(c, 5).unwrap();
        if top.len() < 5 || top.iter().any(|t| !keywords.contains(&t.term)) {
            let terms: Vec<&str> = top.iter().map(|t| t.term.as_str()).collect();
            return fail(format!(
                "cluster {c} top-5 {terms:?} not all planted keywords of topic {topic}"
            ));
        }
    }
    pass(format!(
        "3 clusters, 0 misassigned, top-5 planted (dim {})",
        run.embedding.dim()
    ))
}

fn contrast_mode() -> Outcome {
    let gen = TrendingPeriods::default();
    let (corpus, boundary) = gen.generate();
    let table = match pipeline::contrast(&corpus, boundary, &PipelineConfig::default()) {
        Ok(t) => t,
        Err(e) => return fail(e.to_string()),
    };
    // group 0 is the later period
    let later: Vec<String> = table.rank_terms(0, 10).unwrap().into_iter().map(|t| t.term).collect();
    let earlier: Vec<String> = table.rank_terms(1, 10).unwrap().into_iter().map(|t| t.term).collect();
    for w in &gen.trending {
        if !later.contains(w) {
            return fail(format!("{w} missing from later top-10 {later:?}"));
        }
        if earlier.contains(w) {
            return fail(format!("{w} present in earlier top-10 {earlier:?}"));
        }
    }
    pass("all 5 trending words in the later top-10, none in the earlier")
}

fn formula_exactness() -> Outcome {
    let v = idf(&[2], 4)[0];
    if !abs_diff_eq!(v, std::f64::consts::LN_2, epsilon = 1e-12) {
        return fail(format!("idf(4, 2) = {v}"));
    }
    let f = fpr_from_rates(&[0.2, 0.0, 0.1]);
    let want = 0.1 + (0.02f64 / 3.0).sqrt();
    if !abs_diff_eq!(f, want, epsilon = 1e-12) {
        return fail(format!("FPR = {f}, expected {want}"));
    }
    let cases: [(&[f64], &[f64], f64); 6] = [
        (&[1.0, 2.0, -0.5], &[1.0, 2.0, -0.5], 0.0),
        (&[0.3, 0.7], &[0.3, 0.7], 0.0),
        (&[1.0, 0.0], &[0.0, 3.0], 1.0),
        (&[1.0, 1.0, 0.0], &[0.0, 0.0, 2.5], 1.0),
        (&[1.0, 2.0, -0.5], &[-1.0, -2.0, 0.5], 2.0),
        (&[0.1, 0.7, 0.3], &[-0.1, -0.7, -0.3], 2.0),
    ];
    for (a, b, want) in cases {
        let got = cosine_distance(a, b).unwrap();
        if got != want {
            return fail(format!("cosine_distance({a:?}, {b:?}) = {got}, expected {want}"));
        }
    }
    pass("idf = ln 2, FPR = 0.1 + sqrt(0.02/3), cosine {0, 1, 2} exact")
}

struct Artifacts {
    labels: Vec<u8>,
    relevance: String,
    clouds: Vec<String>,
    contrast: String,
}

fn full_run() -> relwords::Result<Artifacts> {
    let (corpus, _) = PlantedTopics::default().generate();
    let cfg = PipelineConfig::default();
    let dir = tempfile::tempdir().expect("tempdir");
    let run = pipeline::run(&corpus, &cfg)?;
    pipeline::write_run(&run, &corpus, dir.path())?;
    let labels = std::fs::read(dir.path().join("labels.csv")).expect("labels.csv written");
    let table = run.relevance()?;
    let canvas = Canvas::default();
    let mut clouds = Vec::new();
    for c in 0..table.n_clusters() {
        let ranked = table.rank_terms(c, cfg.top_k)?;
        clouds.push(render_svg(&layout_wordcloud(&ranked, cfg.top_k, canvas)?));
    }
    let (trend_corpus, boundary) = TrendingPeriods::default().generate();
    let ct = pipeline::contrast(&trend_corpus, boundary, &cfg)?;
    let cloud = layout_contrast_cloud(
        &ct.rank_terms(0, cfg.top_k)?,
        &ct.rank_terms(1, cfg.top_k)?,
        cfg.top_k,
        canvas,
    )?;
    Ok(Artifacts {
        labels,
        relevance: table.to_csv(),
        clouds,
        contrast: render_contrast_svg(&cloud),
    })
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let first = match full_run() {
        Ok(a) => a,
        Err(e) => return fail(e.to_string()),
    };
    let single = start.elapsed();
    let second = match full_run() {
        Ok(a) => a,
        Err(e) => return fail(e.to_string()),
    };
    if first.labels != second.labels {
        return fail("labels CSV differs");
    }
    if first.relevance != second.relevance {
        return fail("relevance CSV differs");
    }
    if first.clouds != second.clouds || first.contrast != second.contrast {
        return fail("SVG output differs");
    }
    let total = start.elapsed();
    // the second run should cost no more than the first, within slack
    if total > single * 2 + Duration::from_secs(1) {
        return fail(format!("two runs took {total:?}, one took {single:?}"));
    }
    pass(format!(
        "labels, relevance and {} SVGs byte-identical",
        first.clouds.len() + 1
    ))
}

fn main() {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check, Duration); 8] = [
        ("score fixed points", score_fixed_points, Duration::from_secs(1)),
        ("relevance surface shape", surface_shape, Duration::from_secs(1)),
        (
            "dbscan oracle equivalence",
            dbscan_oracle_equivalence,
            Duration::from_secs(30),
        ),
        (
            "kernel pca spectral reconstruction",
            spectral_reconstruction,
            Duration::from_secs(10),
        ),
        ("planted topic recovery", planted_topics, Duration::from_secs(10)),
        ("contrast mode", contrast_mode, Duration::from_secs(5)),
        ("formula exactness", formula_exactness, Duration::from_secs(1)),
        ("determinism", determinism, Duration::MAX),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut out = check();
        let elapsed = start.elapsed();
        if out.ok && elapsed > *budget {
            out = fail(format!("{} (took {elapsed:.2?}, budget {budget:?})", out.detail));
        }
        let status = if out.ok { "PASS" } else { "FAIL" };
        println!("criterion {} {name}: {status} [{elapsed:.2?}] {}", i + 1, out.detail);
        if !out.ok {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

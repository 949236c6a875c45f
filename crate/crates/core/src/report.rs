//! Static report artifacts: word clouds (SVG), highlighted documents
//! (HTML) and term-frequency-over-time tables (CSV).

use std::fmt::Write as _;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate};

use crate::clustering::Label;
use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::relevance::{RankedTerm, RelevanceTable};
use crate::text::{token_spans, TokenStream, BIGRAM_JOINER};

pub const DEFAULT_TOP_K: usize = 50;
pub const MIN_FONT_PT: f64 = 10.0;
pub const MAX_FONT_PT: f64 = 48.0;
/// Assumed glyph advance as a fraction of the font size.
pub const CHAR_ADVANCE: f64 = 0.6;

pub const GREEN: &str = "#2e7d32";
pub const RED: &str = "#c62828";
const PALETTE: [&str; 6] = ["#1f4e79", "#2e75b6", "#7030a0", "#c55a11", "#385723", "#833c0b"];

/// Spiral radius grows by this many pixels per turn.
const SPIRAL_PITCH: f64 = 6.0;
/// Approximate arc length between successive spiral probes.
const SPIRAL_STEP: f64 = 3.0;

/// Quotes a CSV field when it contains a delimiter, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Canvas {
    pub width: f64,
    pub height: f64,
}

impl Default for Canvas {
    fn default() -> Self {
        Canvas {
            width: 800.0,
            height: 600.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl BoundingBox {
    pub fn intersects(&self, other: &BoundingBox) -> bool {
        self.x < other.x + other.width
            && other.x < self.x + self.width
            && self.y < other.y + other.height
            && other.y < self.y + self.height
    }

    pub fn within(&self, canvas: Canvas) -> bool {
        self.x >= 0.0 && self.y >= 0.0 && self.x + self.width <= canvas.width && self.y + self.height <= canvas.height
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordEntry {
    pub term: String,
    pub weight: f64,
    pub font_size: f64,
    pub bbox: BoundingBox,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordCloudSpec {
    pub canvas: Canvas,
    pub entries: Vec<WordEntry>,
    /// Terms that could not be placed.
    pub skipped: Vec<String>,
}

impl WordCloudSpec {
    pub fn empty(canvas: Canvas) -> Self {
        WordCloudSpec {
            canvas,
            entries: Vec::new(),
            skipped: Vec::new(),
        }
    }
}

fn font_size(r: f64, r_min: f64, r_max: f64) -> f64 {
    if r_max > r_min {
        MIN_FONT_PT + (MAX_FONT_PT - MIN_FONT_PT) * (r - r_min) / (r_max - r_min)
    } else {
        MAX_FONT_PT
    }
}

fn text_box(term: &str, size: f64) -> (f64, f64) {
    (CHAR_ADVANCE * size * term.chars().count() as f64, size)
}

/// First collision-free position along an Archimedean spiral from the
/// canvas center.
fn place(width: f64, height: f64, canvas: Canvas, placed: &[WordEntry]) -> Option<BoundingBox> {
    let (cx, cy) = (canvas.width / 2.0, canvas.height / 2.0);
    let max_radius = (canvas.width.powi(2) + canvas.height.powi(2)).sqrt() / 2.0 + width.max(height);
    let a = SPIRAL_PITCH / std::f64::consts::TAU;
    let mut theta = 0.0f64;
    loop {
        let r = a * theta;
        if r > max_radius {
            return None;
        }
        let bbox = BoundingBox {
            x: cx + r * theta.cos() - width / 2.0,
            y: cy + r * theta.sin() - height / 2.0,
            width,
            height,
        };
        if bbox.within(canvas) && !placed.iter().any(|e| e.bbox.intersects(&bbox)) {
            return Some(bbox);
        }
        theta += SPIRAL_STEP / r.max(SPIRAL_STEP);
    }
}

/// Lays out the top `top_k` terms, largest first. Font size is affine in r
/// between [`MIN_FONT_PT`] and [`MAX_FONT_PT`]. `color` picks the fill for
/// the i-th placed word.
pub fn layout_wordcloud_with(
    ranked: &[RankedTerm],
    top_k: usize,
    canvas: Canvas,
    color: &dyn Fn(usize) -> String,
) -> Result<WordCloudSpec> {
    if ranked.is_empty() {
        return Err(Error::InvalidParameter("no ranked terms to lay out".into()));
    }
    let mut words: Vec<&RankedTerm> = ranked.iter().take(top_k).collect();
    words.sort_by(|a, b| b.r.total_cmp(&a.r));
    let r_max = words.iter().map(|w| w.r).fold(f64::NEG_INFINITY, f64::max);
    let r_min = words.iter().map(|w| w.r).fold(f64::INFINITY, f64::min);
    let mut spec = WordCloudSpec::empty(canvas);
    for w in words {
        let size = font_size(w.r, r_min, r_max);
        let (width, height) = text_box(&w.term, size);
        let placed = if width <= canvas.width && height <= canvas.height {
            place(width, height, canvas, &spec.entries)
        } else {
            None
        };
        match placed {
            Some(bbox) => {
                let i = spec.entries.len();
                spec.entries.push(WordEntry {
                    term: w.term.clone(),
                    weight: w.r,
                    font_size: size,
                    bbox,
                    color: color(i),
                })
            }
            None => {
                log::warn!("word cloud: no room for `{}`", w.term);
                spec.skipped.push(w.term.clone());
            }
        }
    }
    Ok(spec)
}

pub fn layout_wordcloud(ranked: &[RankedTerm], top_k: usize, canvas: Canvas) -> Result<WordCloudSpec> {
    layout_wordcloud_with(ranked, top_k, canvas, &|i| PALETTE[i % PALETTE.len()].to_string())
}

fn push_entries(out: &mut String, spec: &WordCloudSpec, dy: f64) {
    for e in &spec.entries {
        let _ = writeln!(
            out,
            r#"  <text x="{:.2}" y="{:.2}" font-size="{:.2}" fill="{}" text-anchor="middle" dominant-baseline="central">{}</text>"#,
            e.bbox.x + e.bbox.width / 2.0,
            e.bbox.y + e.bbox.height / 2.0 + dy,
            e.font_size,
            e.color,
            escape_xml(&e.term)
        );
    }
}

fn svg_open(canvas: Canvas) -> String {
    format!(
        concat!(
            r#"<?xml version="1.0" encoding="UTF-8"?>"#,
            "\n",
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#,
            "\n",
            r#"  <rect width="{w}" height="{h}" fill="white"/>"#,
            "\n"
        ),
        w = canvas.width,
        h = canvas.height
    )
}

pub fn render_svg(spec: &WordCloudSpec) -> String {
    let mut out = svg_open(spec.canvas);
    push_entries(&mut out, spec, 0.0);
    out.push_str("</svg>\n");
    out
}

pub fn write_svg(spec: &WordCloudSpec, path: &Path) -> Result<()> {
    write_atomic(path, render_svg(spec).as_bytes())
}

/// Group A's words in green on the upper half, group B's in red on the
/// lower half, each half laid out independently.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastCloud {
    pub canvas: Canvas,
    pub upper: WordCloudSpec,
    pub lower: WordCloudSpec,
}

pub fn layout_contrast_cloud(
    group_a: &[RankedTerm],
    group_b: &[RankedTerm],
    top_k: usize,
    canvas: Canvas,
) -> Result<ContrastCloud> {
    if group_a.is_empty() || group_b.is_empty() {
        return Err(Error::InvalidContrast("both groups need relevant words".into()));
    }
    let half = Canvas {
        width: canvas.width,
        height: canvas.height / 2.0,
    };
    Ok(ContrastCloud {
        canvas,
        upper: layout_wordcloud_with(group_a, top_k, half, &|_| GREEN.to_string())?,
        lower: layout_wordcloud_with(group_b, top_k, half, &|_| RED.to_string())?,
    })
}

pub fn render_contrast_svg(cloud: &ContrastCloud) -> String {
    let mut out = svg_open(cloud.canvas);
    let mid = cloud.canvas.height / 2.0;
    let _ = writeln!(
        out,
        r##"  <line x1="0" y1="{mid}" x2="{}" y2="{mid}" stroke="#999999" stroke-width="1"/>"##,
        cloud.canvas.width
    );
    push_entries(&mut out, &cloud.upper, 0.0);
    push_entries(&mut out, &cloud.lower, mid);
    out.push_str("</svg>\n");
    out
}

pub fn render_contrast_cloud(
    group_a: &[RankedTerm],
    group_b: &[RankedTerm],
    top_k: usize,
    canvas: Canvas,
    path: &Path,
) -> Result<ContrastCloud> {
    let cloud = layout_contrast_cloud(group_a, group_b, top_k, canvas)?;
    write_atomic(path, render_contrast_svg(&cloud).as_bytes())?;
    Ok(cloud)
}

/// Byte ranges in `doc.text` for each token of `stream`, which must be the
/// (possibly bigram-merged) tokenization of that text.
fn align_stream(doc: &Document, stream: &TokenStream) -> Result<Vec<std::ops::Range<usize>>> {
    let mismatch = || Error::StreamMismatch(doc.id.clone());
    let raw = token_spans(&doc.text);
    let mut out = Vec::with_capacity(stream.tokens.len());
    let mut i = 0;
    for tok in &stream.tokens {
        let span = raw.get(i).ok_or_else(mismatch)?;
        if *tok == span.term {
            out.push(span.range.clone());
            i += 1;
            continue;
        }
        let next = raw.get(i + 1).ok_or_else(mismatch)?;
        let merged = format!("{}{BIGRAM_JOINER}{}", span.term, next.term);
        if *tok != merged {
            return Err(mismatch());
        }
        out.push(span.range.start..next.range.end);
        i += 2;
    }
    if i != raw.len() {
        return Err(mismatch());
    }
    Ok(out)
}

/// Escaped document text with every positively scored token wrapped in a
/// highlight span whose opacity is the token's score. Returns the fragment
/// and the number of spans.
pub fn highlight_fragment(
    doc: &Document,
    stream: &TokenStream,
    table: &RelevanceTable,
    cluster: usize,
) -> Result<(String, usize)> {
    if cluster >= table.n_clusters() {
        return Err(Error::UnknownCluster(cluster));
    }
    let ranges = align_stream(doc, stream)?;
    let mut out = String::with_capacity(doc.text.len() * 2);
    let mut cursor = 0;
    let mut spans = 0;
    for (tok, range) in stream.tokens.iter().zip(ranges) {
        let Some(score) = table.score_of(cluster, tok) else {
            continue;
        };
        if score.r <= 0.0 {
            continue;
        }
        out.push_str(&escape_xml(&doc.text[cursor..range.start]));
        let _ = write!(
            out,
            r#"<span style="background-color: rgba(255, 170, 0, {:.4})" title="{} r={:.4}">{}</span>"#,
            score.r,
            escape_xml(tok),
            score.r,
            escape_xml(&doc.text[range.clone()])
        );
        cursor = range.end;
        spans += 1;
    }
    out.push_str(&escape_xml(&doc.text[cursor..]));
    Ok((out, spans))
}

/// Standalone HTML page for one document of `cluster`. `label` is the
/// document's own assignment and must match.
pub fn highlight_html(
    doc: &Document,
    stream: &TokenStream,
    label: Label,
    table: &RelevanceTable,
    cluster: usize,
) -> Result<String> {
    if label != Label::Cluster(cluster) {
        return Err(Error::ClusterMismatch {
            doc: doc.id.clone(),
            cluster,
        });
    }
    let (body, _) = highlight_fragment(doc, stream, table, cluster)?;
    Ok(format!(
        concat!(
            "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>{title}</title>\n</head>\n<body>\n",
            "<h1>{title}</h1>\n<p>cluster {cluster}</p>\n",
            "<pre style=\"white-space: pre-wrap; font-family: serif\">{body}</pre>\n</body>\n</html>\n"
        ),
        title = escape_xml(&doc.id),
        cluster = escape_xml(&table.names()[cluster]),
        body = body
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bucket {
    Day,
    /// ISO weeks, starting Monday.
    Week,
}

impl Bucket {
    pub fn start(self, date: NaiveDate) -> NaiveDate {
        match self {
            Bucket::Day => date,
            Bucket::Week => date - Duration::days(date.weekday().num_days_from_monday() as i64),
        }
    }

    fn step(self) -> Duration {
        match self {
            Bucket::Day => Duration::days(1),
            Bucket::Week => Duration::days(7),
        }
    }
}

impl std::str::FromStr for Bucket {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "day" => Ok(Bucket::Day),
            "week" => Ok(Bucket::Week),
            _ => Err(Error::InvalidParameter(format!(
                "bucket must be day or week, got `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendTable {
    pub terms: Vec<String>,
    /// Contiguous bucket start dates.
    pub buckets: Vec<NaiveDate>,
    pub bucket_docs: Vec<usize>,
    /// `[term][bucket]`
    pub counts: Vec<Vec<usize>>,
}

impl TrendTable {
    pub fn rate(&self, term: usize, bucket: usize) -> f64 {
        match self.bucket_docs[bucket] {
            0 => 0.0,
            n => self.counts[term][bucket] as f64 / n as f64,
        }
    }

    /// `term,bucket_start,count,rate`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("term,bucket_start,count,rate\n");
        for (t, term) in self.terms.iter().enumerate() {
            for (b, start) in self.buckets.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    csv_field(term),
                    start.format("%Y-%m-%d"),
                    self.counts[t][b],
                    self.rate(t, b)
                );
            }
        }
        out
    }
}

fn stream_contains(tokens: &[String], term: &str) -> bool {
    if tokens.iter().any(|t| t == term) {
        return true;
    }
    match term.split_once(BIGRAM_JOINER) {
        Some((a, b)) => tokens.windows(2).any(|w| w[0] == a && w[1] == b),
        None => false,
    }
}

/// Per time bucket, how many documents contain each term. A `a_b` term
/// also matches the adjacent pair `a b` in unmerged streams.
pub fn term_trends(corpus: &Corpus, streams: &[TokenStream], terms: &[String], bucket: Bucket) -> Result<TrendTable> {
    if streams.len() != corpus.len() {
        return Err(Error::DimensionMismatch {
            expected: corpus.len(),
            actual: streams.len(),
        });
    }
    let missing: Vec<String> = corpus
        .docs()
        .iter()
        .filter(|d| d.timestamp.is_none())
        .map(|d| d.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingTimestamps(missing));
    }
    let starts: Vec<NaiveDate> = corpus
        .docs()
        .iter()
        .map(|d| bucket.start(d.timestamp.expect("checked").date_naive()))
        .collect();
    let first = *starts.iter().min().expect("corpus is non-empty");
    let last = *starts.iter().max().expect("corpus is non-empty");
    let mut buckets = Vec::new();
    let mut cur = first;
    while cur <= last {
        buckets.push(cur);
        cur += bucket.step();
    }
    let slot = |d: NaiveDate| ((d - first).num_days() / bucket.step().num_days()) as usize;
    let mut bucket_docs = vec![0; buckets.len()];
    for &s in &starts {
        bucket_docs[slot(s)] += 1;
    }
    let counts = terms
        .iter()
        .map(|term| {
            let mut row = vec![0; buckets.len()];
            for (stream, &s) in streams.iter().zip(&starts) {
                if stream_contains(&stream.tokens, term) {
                    row[slot(s)] += 1;
                }
            }
            row
        })
        .collect();
    Ok(TrendTable {
        terms: terms.to_vec(),
        buckets,
        bucket_docs,
        counts,
    })
}

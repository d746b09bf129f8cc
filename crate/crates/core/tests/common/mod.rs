#![allow(dead_code)]

use std::collections::BTreeMap;

use playerank::ingest::{load_corpus, EventStore, LoadOptions};
use playerank::roles::Point;
use playerank::synth::{generate, SynthConfig, SynthCorpus};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const FIG3: &str = r#"{"id": 253668302, "eventName": "Pass", "eventSec": 2.41, "playerId": 3344, "matchId": 2576335, "teamId": 3161, "positions": [{"x": 49, "y": 50}], "subEventId": 85, "subEventName": "Simple pass", "tags": [{"id": 1801}]}"#;

pub fn synth_store(matches: usize, seed: u64) -> (SynthCorpus, EventStore) {
    let corpus = generate(&SynthConfig { matches, seed, ..Default::default() }).unwrap();
    let store = load_corpus(&corpus.text, LoadOptions::default()).unwrap();
    (corpus, store)
}

/// Fraction of (positive, negative) pairs ordered correctly, ties counting one half.
pub fn auc_pairwise(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut twice_wins, mut pairs) = (0u64, 0u64);
    for (i, &yi) in labels.iter().enumerate() {
        if !yi {
            continue;
        }
        for (j, &yj) in labels.iter().enumerate() {
            if yj {
                continue;
            }
            pairs += 1;
            twice_wins += match scores[i].partial_cmp(&scores[j]).unwrap() {
                std::cmp::Ordering::Greater => 2,
                std::cmp::Ordering::Equal => 1,
                std::cmp::Ordering::Less => 0,
            };
        }
    }
    (twice_wins as f64 / 2.0) / pairs as f64
}

fn euclid(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Textbook silhouette: for each point, a = mean distance to the rest of its
/// cluster, b = smallest mean distance to another cluster.
pub fn silhouette_definition(points: &[Point], labels: &[usize]) -> f64 {
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        let own: Vec<usize> = (0..n).filter(|&j| j != i && labels[j] == labels[i]).collect();
        if own.is_empty() {
            continue;
        }
        let a = own.iter().map(|&j| euclid(&points[i], &points[j])).sum::<f64>() / own.len() as f64;
        let mut others: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for j in 0..n {
            if labels[j] != labels[i] {
                let e = others.entry(labels[j]).or_insert((0.0, 0));
                e.0 += euclid(&points[i], &points[j]);
                e.1 += 1;
            }
        }
        let b = others.values().map(|(s, c)| s / *c as f64).fold(f64::INFINITY, f64::min);
        if a.max(b) > 0.0 {
            total += (b - a) / a.max(b);
        }
    }
    total / n as f64
}

/// Score every player, sort by z descending then id ascending.
pub fn brute_force_search(
    zones: &[usize],
    vectors: &BTreeMap<u64, Vec<f64>>,
    ratings: &BTreeMap<u64, f64>,
) -> Vec<(u64, f64)> {
    let mut rows: Vec<(u64, f64)> = Vec::new();
    for (id, r) in ratings {
        if let Some(v) = vectors.get(id) {
            let mut sorted = zones.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            let s: f64 = sorted.iter().map(|&z| v[z]).sum();
            rows.push((*id, s * r));
        }
    }
    rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    rows
}

/// `per_blob` points around each center with isotropic noise `sigma`,
/// clipped to the pitch.
pub fn planted_blobs(rng: &mut ChaCha8Rng, centers: &[Point], per_blob: usize, sigma: f64) -> Vec<(Point, usize)> {
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut out = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per_blob {
            let x = (center[0] + noise.sample(rng)).clamp(0.0, 100.0);
            let y = (center[1] + noise.sample(rng)).clamp(0.0, 100.0);
            out.push(([x, y], c));
        }
    }
    out
}

/// Smallest total distance over all one-to-one matchings of fitted to
/// planted centroids (brute force over permutations), reported as the
/// largest single matched distance.
pub fn matched_centroid_error(fitted: &[Point], planted: &[Point]) -> f64 {
    assert_eq!(fitted.len(), planted.len());
    let n = fitted.len();
    let mut best = (f64::INFINITY, f64::INFINITY);
    let mut perm: Vec<usize> = (0..n).collect();
    permute(&mut perm, 0, &mut |p| {
        let dists: Vec<f64> = p.iter().enumerate().map(|(i, &j)| euclid(&fitted[i], &planted[j])).collect();
        let total: f64 = dists.iter().sum();
        if total < best.0 {
            best = (total, dists.iter().copied().fold(0.0, f64::max));
        }
    });
    best.1
}

fn permute(p: &mut Vec<usize>, at: usize, f: &mut impl FnMut(&[usize])) {
    if at == p.len() {
        f(p);
        return;
    }
    for i in at..p.len() {
        p.swap(at, i);
        permute(p, at + 1, f);
        p.swap(at, i);
    }
}

pub fn random_point(rng: &mut ChaCha8Rng) -> Point {
    [rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)]
}

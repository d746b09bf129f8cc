mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use playerank::features::{aggregate_all_teams, build_feature_catalog, extract_all};
use playerank::ingest::{event_to_json, parse_event, EventType, Subtype, Tag};
use playerank::learning::{build_training_set, roc_auc, train_weights, TrainConfig, TrainingScope};
use playerank::numeric::spearman;
use playerank::pipeline::{
    build_snapshot, run_learning_phase, run_online_update, OnlineSettings, PipelineConfig, Snapshot,
};
use playerank::rating::{
    adjusted_rating, concordance, ewma_step, rate_values, versatility, ExpertLabel, ExpertPair, RatingConfig,
    RatingSeries, MatchRating,
};
use playerank::retrieval::{score_query, search, PlayerZoneVector, ZoneQuery, ZoneTessellation};
use playerank::roles::{fit_roles, silhouette_score, soft_assign, Point, RoleAssignment, RoleFitConfig};
use playerank::synth::ROLE_CENTERS;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use common::*;

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn classifier_recovery() -> Outcome {
    let (corpus, store) = synth_store(2000, 7);
    let catalog = build_feature_catalog();
    let vectors = extract_all(&store, &catalog).unwrap();
    let teams = aggregate_all_teams(&store, &vectors).unwrap();
    let (examples, _) = build_training_set(&store, &teams, &catalog).unwrap();
    let start = Instant::now();
    let (w, eval) = train_weights(&examples, catalog.hash(), TrainingScope::All, &TrainConfig::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let rho = spearman(&w.weights, &corpus.truth.weights).unwrap_or(f64::NAN);
    outcome(
        eval.auc >= 0.85 && rho >= 0.9 && secs < 60.0,
        format!(
            "2000 matches: holdout AUC {:.3} (>= 0.85), Spearman(w, w*) {rho:.3} (>= 0.9), training {secs:.1}s (< 60s)",
            eval.auc
        ),
    )
}

fn role_recovery() -> Outcome {
    let sigma = 3.0;
    let min_sep = (0..8)
        .flat_map(|i| (i + 1..8).map(move |j| (i, j)))
        .map(|(i, j)| playerank::roles::dist(&ROLE_CENTERS[i], &ROLE_CENTERS[j]))
        .fold(f64::INFINITY, f64::min);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let points: Vec<Point> = planted_blobs(&mut rng, &ROLE_CENTERS, 250, sigma).into_iter().map(|p| p.0).collect();
    let model = fit_roles(&points, &RoleFitConfig::default()).unwrap();
    let err = if model.k == 8 { matched_centroid_error(&model.centroids, &ROLE_CENTERS) } else { f64::INFINITY };
    let deltas = [0.0, 0.05, 0.1, 0.2];
    let fractions: Vec<f64> = deltas
        .iter()
        .map(|&d| {
            let hybrid = points.iter().filter(|p| soft_assign(**p, &model, d).unwrap().is_hybrid()).count();
            hybrid as f64 / points.len() as f64
        })
        .collect();
    let monotone = fractions.windows(2).all(|w| w[0] <= w[1]);
    outcome(
        points.len() >= 2000 && min_sep >= 4.0 * sigma && model.k == 8 && err < 0.5 && monotone,
        format!(
            "{} points, separation {:.1} sigma, k = {} (8), max centroid error {err:.3} (< 0.5), hybrid fraction {:?} monotone",
            points.len(),
            min_sep / sigma,
            model.k,
            fractions.iter().map(|f| format!("{f:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn rating_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let tol = 1e-12;
    let mut failures = 0;
    for _ in 0..10_000 {
        let n = rng.random_range(1..=76);
        let mut w: Vec<f64> =
            (0..n).map(|_| if rng.random_bool(0.1) { 0.0 } else { rng.random_range(-1.0..1.0) }).collect();
        if w.iter().all(|x| *x == 0.0) {
            w[0] = 0.5;
        }
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
        let cfg = RatingConfig::from_weights(&w, 0.0, 0.1, 1).unwrap();
        let r = rate_values(&v, &w, &cfg).unwrap();
        let in_range = (-tol..=1.0 + tol).contains(&r);

        let i = rng.random_range(0..n);
        let mut up = v.clone();
        up[i] = rng.random_range(v[i]..=1.0);
        let r_up = rate_values(&up, &w, &cfg).unwrap();
        let monotone = if w[i] > 0.0 {
            r_up >= r - tol
        } else if w[i] < 0.0 {
            r_up <= r + tol
        } else {
            (r_up - r).abs() <= tol
        };

        let max_goals = rng.random_range(1..6);
        let goals = rng.random_range(0..=max_goals);
        let alpha = rng.random_range(0.0..=1.0);
        let (rs, g) = adjusted_rating(r, goals, max_goals, alpha).unwrap();
        let convex = rs >= r.min(g) - tol && rs <= r.max(g) + tol;
        if !(in_range && monotone && convex) {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("10000 random (v, w) pairs, {failures} violations at 1e-12"))
}

fn ewma_and_versatility() -> Outcome {
    let tol = 1e-9;
    let seq = [0.2, 0.9, 0.4, 0.7];
    let mut avg = None;
    for &x in &seq {
        avg = Some(ewma_step(avg, x, 1.0).unwrap());
    }
    let last_value = (avg.unwrap() - 0.7).abs() <= tol;

    let mut s = RatingSeries::new(1);
    for m in 0..50 {
        let rating = MatchRating { player_id: 1, match_id: m, r: 0.37, r_star: 0.37, norm_goals: 0.0, role: None };
        s.ewma_update(rating, 0.1).unwrap();
    }
    let fixed_point = s.entries.iter().all(|e| (e.r_bar - 0.37).abs() <= tol);

    let single = |p: usize| RoleAssignment { primary: p, hybrids: BTreeSet::new(), silhouettes: vec![], delta: 0.1 };
    let v0 = versatility(1, &vec![single(3); 12], 8).unwrap().v;
    let v1 = versatility(1, &(0..24).map(|i| single(i % 8)).collect::<Vec<_>>(), 8).unwrap().v;
    outcome(
        last_value && fixed_point && v0.abs() <= tol && (v1 - 1.0).abs() <= tol,
        format!(
            "beta=1 last value {last_value}, constant fixed point {fixed_point}, V single-role {v0:.2e}, V uniform-8 {v1:.12}"
        ),
    )
}

fn retrieval_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let grid = ZoneTessellation::default();
    let mut vectors = BTreeMap::new();
    let mut plain = BTreeMap::new();
    let mut ratings = BTreeMap::new();
    for id in 0..500u64 {
        let focus = rng.random_range(0..100usize);
        let counts: Vec<u64> = (0..100)
            .map(|z| {
                let (dr, dc) = ((z / 10) as i64 - (focus / 10) as i64, (z % 10) as i64 - (focus % 10) as i64);
                if dr.abs() + dc.abs() <= 3 { rng.random_range(0..12) } else { u64::from(rng.random_bool(0.05)) }
            })
            .collect();
        let counts = if counts.iter().all(|&c| c == 0) { vec![1; 100] } else { counts };
        let v = PlayerZoneVector::from_counts(id, grid, counts).unwrap();
        plain.insert(id, v.v.clone());
        vectors.insert(id, v);
        ratings.insert(id, if id % 25 == 0 { 0.5 } else { rng.random_range(0.1..0.9) });
    }
    let mut ordering_mismatch = 0;
    for _ in 0..200 {
        let zones: Vec<usize> = (0..rng.random_range(1..40)).map(|_| rng.random_range(0..100)).collect();
        let q = ZoneQuery::from_zones(grid, &zones).unwrap();
        let got: Vec<(u64, f64)> =
            search(&q, &vectors, &ratings, 500).unwrap().hits.iter().map(|h| (h.player_id, h.z)).collect();
        if got != brute_force_search(&zones, &plain, &ratings) {
            ordering_mismatch += 1;
        }
    }
    let ids: Vec<u64> = plain.keys().copied().collect();
    let mut property_failures = 0;
    for _ in 0..1000 {
        let v = &plain[&ids[rng.random_range(0..ids.len())]];
        let a: BTreeSet<usize> = (0..rng.random_range(0..30)).map(|_| rng.random_range(0..100)).collect();
        let b: BTreeSet<usize> = (0..rng.random_range(0..30)).map(|_| rng.random_range(0..100)).collect();
        let bin = |s: &BTreeSet<usize>| (0..100).map(|i| f64::from(u8::from(s.contains(&i)))).collect::<Vec<_>>();
        let (qa, qb) = (bin(&a), bin(&b));
        let sum: Vec<f64> = qa.iter().zip(&qb).map(|(x, y)| x + y).collect();
        let union: BTreeSet<usize> = a.union(&b).copied().collect();
        let (sa, sb) = (score_query(v, &qa).unwrap(), score_query(v, &qb).unwrap());
        let linear = (score_query(v, &sum).unwrap() - sa - sb).abs() <= 1e-12;
        let su = score_query(v, &bin(&union)).unwrap();
        let monotone = su >= sa && su >= sb && (0.0..=1.0 + 1e-12).contains(&su);
        if !(linear && monotone) {
            property_failures += 1;
        }
    }
    outcome(
        ordering_mismatch == 0 && property_failures == 0,
        format!(
            "200 queries x 500 players: {ordering_mismatch} ordering mismatches; 1000 query pairs: {property_failures} linearity/monotonicity failures"
        ),
    )
}

fn silhouette_and_auc_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.random_range(4..=30);
        let k = rng.random_range(2..=4);
        let points: Vec<Point> = (0..n).map(|_| random_point(&mut rng)).collect();
        let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        labels[..4].copy_from_slice(&[0, 0, 1, 1]);
        let d = (silhouette_score(&points, &labels).unwrap() - silhouette_definition(&points, &labels)).abs();
        worst = worst.max(d);
    }
    let mut auc_mismatch = 0;
    for _ in 0..20 {
        let n = rng.random_range(2..=50);
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..10) as f64 / 4.0).collect();
        let mut labels: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        labels[0] = true;
        labels[1] = false;
        if roc_auc(&scores, &labels).unwrap() != auc_pairwise(&scores, &labels) {
            auc_mismatch += 1;
        }
    }
    outcome(
        worst <= 1e-10 && auc_mismatch == 0,
        format!("silhouette max deviation {worst:.1e} (<= 1e-10); AUC {auc_mismatch}/20 inexact"),
    )
}

fn pipeline_determinism() -> Outcome {
    let (_, store) = synth_store(60, 12);
    let cfg = PipelineConfig { min_matches: 3, ..Default::default() };
    let a = run_learning_phase(&store, &cfg).unwrap().bundle;
    let b = run_learning_phase(&store, &cfg).unwrap().bundle;
    let batch = build_snapshot(&store, &a, OnlineSettings::from_config(&cfg, &a)).unwrap();
    let mut inc = Snapshot::empty(OnlineSettings::from_config(&cfg, &a), &a);
    let order = store.matches_chronological();
    for m in &order {
        run_online_update(&store, &a, &mut inc, m.match_id).unwrap();
    }
    let mut worst = 0.0f64;
    let mut same_shape = inc.series.len() == batch.series.len();
    for (p, s) in &batch.series {
        match inc.series.get(p) {
            Some(t) if t.entries.len() == s.entries.len() => {
                for (x, y) in t.entries.iter().zip(&s.entries) {
                    worst = worst.max((x.r_bar - y.r_bar).abs()).max((x.rating.r - y.rating.r).abs());
                    worst = worst.max((x.r_bar_star - y.r_bar_star).abs());
                }
            }
            _ => same_shape = false,
        }
    }
    let rankings_equal = inc.rankings == batch.rankings && inc.player_roles == batch.player_roles;
    outcome(
        a.digest() == b.digest() && same_shape && worst <= 1e-12 && rankings_equal,
        format!(
            "digests {} / {}; incremental vs batch over {} matches: max deviation {worst:.1e}, rankings equal {rankings_equal}",
            &a.digest()[..12],
            &b.digest()[..12],
            order.len()
        ),
    )
}

fn concordance_trend() -> Outcome {
    let (corpus, store) = synth_store(300, 7);
    let cfg = PipelineConfig { min_matches: 10, ..Default::default() };
    let bundle = run_learning_phase(&store, &cfg).unwrap().bundle;
    let snap = build_snapshot(&store, &bundle, OnlineSettings::from_config(&cfg, &bundle)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let mut totals = [(0usize, 0usize); 3];
    for ranking in &snap.rankings {
        let ids: Vec<u64> = ranking.entries.iter().map(|e| e.player_id).collect();
        let mut pairs = Vec::new();
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                let gap = corpus.truth.quality[&ids[i]].ln() - corpus.truth.quality[&ids[j]].ln();
                let labels = [(); 3].map(|_| {
                    let seen = gap + noise.sample(&mut rng);
                    if seen.abs() < 0.02 {
                        ExpertLabel::Equal
                    } else if seen > 0.0 {
                        ExpertLabel::First
                    } else {
                        ExpertLabel::Second
                    }
                });
                let pair = ExpertPair { player_a: ids[i], player_b: ids[j], labels };
                pairs.push(if rng.random_bool(0.5) { pair.swapped() } else { pair });
            }
        }
        if let Ok(report) = concordance(&pairs, ranking) {
            for (t, b) in totals.iter_mut().zip(&report.buckets) {
                t.0 += b.pairs;
                t.1 += b.majority_agree;
            }
        }
    }
    let c: Vec<f64> = totals.iter().map(|(n, a)| *a as f64 / (*n).max(1) as f64).collect();
    let enough = totals.iter().all(|(n, _)| *n >= 100);
    outcome(
        enough && c[0] <= c[1] && c[1] <= c[2],
        format!(
            "majority concordance [1,10] {:.3} ({} pairs) -> [11,20] {:.3} ({}) -> [21,inf) {:.3} ({})",
            c[0], totals[0].0, c[1], totals[1].0, c[2], totals[2].0
        ),
    )
}

fn parse_fidelity() -> Outcome {
    let ev = parse_event(FIG3).unwrap();
    let fields_ok = ev.event_id == 253668302
        && ev.event_type == EventType::Pass
        && ev.event_sec == 2.41
        && ev.player_id == 3344
        && ev.match_id == 2576335
        && ev.team_id == 3161
        && (ev.position.x, ev.position.y) == (49.0, 50.0)
        && ev.sub_event_id == Some(85)
        && ev.subtype == Some(Subtype::SimplePass)
        && ev.tags == BTreeSet::from([Tag(1801)]);
    let round_trip = parse_event(&event_to_json(&ev)).ok() == Some(ev);
    outcome(fields_ok && round_trip, format!("10 fields preserved {fields_ok}, round trip {round_trip}"))
}

fn main() {
    let criteria: [(&str, Check); 9] = [
        ("classifier recovery", classifier_recovery),
        ("role recovery", role_recovery),
        ("rating algebra", rating_algebra),
        ("EWMA and versatility exact cases", ewma_and_versatility),
        ("retrieval oracle equivalence", retrieval_oracle),
        ("silhouette and AUC oracles", silhouette_and_auc_oracles),
        ("pipeline determinism and incrementality", pipeline_determinism),
        ("concordance trend", concordance_trend),
        ("parse fidelity", parse_fidelity),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

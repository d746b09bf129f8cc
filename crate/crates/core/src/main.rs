use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use playerank::features::{build_feature_catalog, extract_all, fit_normalization, PerformanceVector};
use playerank::ingest::{corpus_stats, load_corpus, CorpusText, EventStore, LoadOptions};
use playerank::learning::{
    build_role_training_set, build_training_set, compute_nrmse, train_scoped_weights, ScopeKind,
};
use playerank::modelfile::{self, ModelDoc};
use playerank::pipeline::{
    build_snapshot, collect_centers, ranking_table, ratings_table, run_learning_phase, ModelBundle,
    OnlineSettings, PipelineConfig, Snapshot,
};
use playerank::rating::{alpha_sweep_correlation, concordance, parse_expert_pairs};
use playerank::retrieval::{search, ZoneQuery};
use playerank::roles::{fit_roles, soft_assign, Point};
use playerank::service::{serve, AppState};
use playerank::synth::{generate, write_corpus, SynthConfig};
use playerank::{Error, Result};

#[derive(Parser)]
#[command(name = "playerank", version, about = "Performance ratings, role rankings and player search from soccer event logs")]
struct Cli {
    /// TOML configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Overrides {
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long = "delta", global = true)]
    delta_s: Option<f64>,
    #[arg(long, global = true)]
    x_pct: Option<f64>,
    #[arg(long, global = true)]
    min_matches: Option<usize>,
    #[arg(long = "kmin", global = true)]
    k_min: Option<usize>,
    #[arg(long = "kmax", global = true)]
    k_max: Option<usize>,
}

#[derive(Args)]
struct Online {
    #[arg(long)]
    store: PathBuf,
    #[arg(long)]
    model: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a corpus into a store file
    Ingest {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        matches: PathBuf,
        #[arg(long)]
        players: PathBuf,
        #[arg(long)]
        competitions: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Fail on events without a position instead of dropping them
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        keep_goalkeepers: bool,
    },
    /// Feature extraction
    #[command(subcommand)]
    Features(FeaturesCmd),
    /// Train feature weights from extracted vectors
    Train {
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value = "all", value_parser = ["all", "competition", "role"])]
        scope: String,
        /// Role model, required for --scope role
        #[arg(long)]
        roles: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Normalized RMS difference between two weight files
    Nrmse {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        other: PathBuf,
        #[arg(long, default_value = "weights")]
        base_section: String,
        #[arg(long, default_value = "weights")]
        other_section: String,
    },
    /// Role detection
    #[command(subcommand)]
    Roles(RolesCmd),
    /// Run the whole learning phase and write a model bundle
    Learn {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rate every match and export the ratings table
    Rate {
        #[command(flatten)]
        online: Online,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also save the full snapshot as JSON
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
    /// Print a role-based ranking
    Rank {
        #[command(flatten)]
        online: Online,
        #[arg(long)]
        role: usize,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Spatial player search
    Search {
        #[command(flatten)]
        online: Online,
        /// Comma-separated zone indices
        #[arg(long, value_delimiter = ',', conflicts_with = "weights")]
        zones: Vec<usize>,
        /// Comma-separated zone weights, one per zone
        #[arg(long, value_delimiter = ',')]
        weights: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
    },
    /// Versatility of one player or of all players
    Versatility {
        #[command(flatten)]
        online: Online,
        #[arg(long)]
        player: Option<u64>,
    },
    /// Rating distribution statistics
    Stats {
        #[command(flatten)]
        online: Online,
        /// Comma-separated alpha values for the goal-adjustment correlation sweep
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<f64>,
    },
    /// Agreement of a ranking with expert pairwise judgements
    Concordance {
        #[command(flatten)]
        online: Online,
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        role: usize,
    },
    /// Serve the HTTP API
    Serve {
        #[command(flatten)]
        online: Online,
        #[arg(long)]
        bind: Option<String>,
    },
    /// Generate a synthetic corpus and run the full pipeline on it
    Demo {
        #[arg(long, default_value_t = 200)]
        matches: usize,
        #[arg(long, default_value = "playerank-demo")]
        out: PathBuf,
        /// Serve the API on the demo results afterwards
        #[arg(long)]
        serve: bool,
    },
}

#[derive(Subcommand)]
enum FeaturesCmd {
    /// Extract raw per-player performance vectors and their normalization
    Extract {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        norm_out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum RolesCmd {
    /// Export centers of performance
    Centers {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the role model
    Fit {
        #[arg(long)]
        centers: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Soft-assign centers to roles
    Assign {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        centers: PathBuf,
    },
}

fn config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    let o = &cli.overrides;
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = o.$f { cfg.$f = v; } )* };
    }
    set!(seed, alpha, beta, delta_s, x_pct, min_matches, k_min, k_max);
    cfg.validate()?;
    Ok(cfg)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io { path: p.to_path_buf(), source: e }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Error::Io { path: "<stdout>".into(), source: e })
        }
    }
}

fn open_online(online: &Online, cfg: &PipelineConfig) -> Result<(EventStore, ModelBundle, Snapshot)> {
    let store = EventStore::load(&online.store)?;
    let bundle = ModelBundle::load(&online.model)?;
    let settings = OnlineSettings::from_config(cfg, &bundle);
    let snap = build_snapshot(&store, &bundle, settings)?;
    Ok((store, bundle, snap))
}

fn read_vectors(path: &Path) -> Result<Vec<PerformanceVector>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    text.lines().filter(|l| !l.trim().is_empty()).map(|l| Ok(serde_json::from_str(l)?)).collect()
}

fn read_centers(path: &Path) -> Result<Vec<(u64, u64, Point)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let cols: Vec<&str> = line.split('\t').collect();
        let bad = || Error::Validation(format!("{}: line {}: expected player, match, x, y", path.display(), i + 1));
        if cols.len() < 4 {
            return Err(bad());
        }
        let p = cols[0].parse().map_err(|_| bad())?;
        let m = cols[1].parse().map_err(|_| bad())?;
        let x = cols[2].parse().map_err(|_| bad())?;
        let y = cols[3].parse().map_err(|_| bad())?;
        out.push((p, m, [x, y]));
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = config(&cli)?;
    match cli.command {
        Command::Ingest { events, matches, players, competitions, out, strict, keep_goalkeepers } => {
            let text = CorpusText::read(&events, &matches, &players, competitions.as_deref())?;
            let opts = LoadOptions { keep_goalkeepers: keep_goalkeepers || cfg.keep_goalkeepers, strict };
            let store = load_corpus(&text, opts)?;
            store.save(&out)?;
            let stats = corpus_stats(&store)?;
            println!("{}", serde_json::to_string_pretty(&serde_json::json!({
                "matches": store.matches().count(),
                "players": store.players().count(),
                "events": store.event_count(),
                "report": store.report(),
                "stats": stats,
            }))?);
        }
        Command::Features(FeaturesCmd::Extract { store, out, norm_out }) => {
            let store = EventStore::load(&store)?;
            let catalog = build_feature_catalog();
            let vectors = extract_all(&store, &catalog)?;
            let mut text = String::new();
            for v in &vectors {
                text.push_str(&serde_json::to_string(v)?);
                text.push('\n');
            }
            write_out(Some(&out), &text)?;
            let mut norm = fit_normalization(&vectors, &catalog)?;
            if let Some(cap) = cfg.max_goals {
                norm.max_goals = cap;
            }
            if let Some(p) = norm_out {
                write_out(Some(&p), &modelfile::normalization_to_string(&norm, &catalog))?;
            }
            eprintln!("{} vectors over {} features (catalog {})", vectors.len(), catalog.len(), catalog.hash());
        }
        Command::Train { vectors, store, scope, roles, out } => {
            let store = EventStore::load(&store)?;
            let catalog = build_feature_catalog();
            let vectors = read_vectors(&vectors)?;
            let tcfg = cfg.train_config();
            let results = match scope.as_str() {
                "role" => {
                    let path = roles.ok_or_else(|| Error::Validation("--scope role needs --roles".into()))?;
                    let (model, delta) = modelfile::read_role_model(&ModelDoc::read(&path)?, "roles")?;
                    let mut primary = BTreeMap::new();
                    for (p, m, c) in collect_centers(&store, cfg.min_events)? {
                        primary.insert((p, m), soft_assign(c, &model, delta)?.primary);
                    }
                    let ex = build_role_training_set(&store, &vectors, &primary, &catalog)?;
                    train_scoped_weights(&ex, ScopeKind::Role, catalog.hash(), &tcfg)?
                }
                kind => {
                    let teams = playerank::features::aggregate_all_teams(&store, &vectors)?;
                    let (ex, _) = build_training_set(&store, &teams, &catalog)?;
                    let k = if kind == "all" { ScopeKind::All } else { ScopeKind::Competition };
                    train_scoped_weights(&ex, k, catalog.hash(), &tcfg)?
                }
            };
            let mut text = String::from("# playerank weights v1\n");
            for (w, eval) in &results {
                let section = if results.len() == 1 { "weights".to_string() } else { format!("weights:{}", w.scope) };
                modelfile::write_weights(&mut text, &section, w, &catalog);
                eprintln!(
                    "{}: cost {} auc {:.4} f1 {:.4} accuracy {:.4} ({} holdout examples)",
                    w.scope, w.cost, eval.auc, eval.f1, eval.accuracy, eval.examples
                );
            }
            write_out(Some(&out), &text)?;
        }
        Command::Nrmse { base, other, base_section, other_section } => {
            let catalog = build_feature_catalog();
            let a = modelfile::read_weights(&ModelDoc::read(&base)?, &base_section, &catalog)?;
            let b = modelfile::read_weights(&ModelDoc::read(&other)?, &other_section, &catalog)?;
            println!("{:.6}", compute_nrmse(&a.weights, &b.weights)?);
        }
        Command::Roles(RolesCmd::Centers { store, out }) => {
            let store = EventStore::load(&store)?;
            let mut text = String::from("player_id\tmatch_id\tx\ty\n");
            for (p, m, c) in collect_centers(&store, cfg.min_events)? {
                text.push_str(&format!("{p}\t{m}\t{:?}\t{:?}\n", c[0], c[1]));
            }
            write_out(Some(&out), &text)?;
        }
        Command::Roles(RolesCmd::Fit { centers, out }) => {
            let points: Vec<Point> = read_centers(&centers)?.into_iter().map(|c| c.2).collect();
            let model = fit_roles(&points, &cfg.role_config())?;
            for (k, ss) in &model.sweep {
                eprintln!("k = {k:2}  silhouette {ss:.4}");
            }
            eprintln!("selected k = {} (silhouette {:.4})", model.k, model.silhouette);
            write_out(Some(&out), &modelfile::role_model_to_string(&model, cfg.delta_s))?;
        }
        Command::Roles(RolesCmd::Assign { model, centers }) => {
            let doc = ModelDoc::read(&model)?;
            let (model, _) = modelfile::read_role_model(&doc, "roles")?;
            let mut text = String::from("player_id\tmatch_id\tprimary\thybrids\n");
            let mut hybrid = 0usize;
            let centers = read_centers(&centers)?;
            for (p, m, c) in &centers {
                let a = soft_assign(*c, &model, cfg.delta_s)?;
                hybrid += usize::from(a.is_hybrid());
                let h: Vec<String> = a.hybrids.iter().map(usize::to_string).collect();
                text.push_str(&format!("{p}\t{m}\t{}\t{}\n", a.primary, h.join(",")));
            }
            write_out(None, &text)?;
            eprintln!("{hybrid} of {} centers are hybrid at delta {}", centers.len(), cfg.delta_s);
        }
        Command::Learn { store, out } => {
            let store = EventStore::load(&store)?;
            let outcome = run_learning_phase(&store, &cfg)?;
            outcome.bundle.save(&out)?;
            eprintln!(
                "holdout AUC {:.4}, F1 {:.4}, accuracy {:.4}; k = {} (silhouette {:.4}); digest {}",
                outcome.eval.auc,
                outcome.eval.f1,
                outcome.eval.accuracy,
                outcome.bundle.roles.k,
                outcome.bundle.roles.silhouette,
                outcome.bundle.digest()
            );
        }
        Command::Rate { online, out, snapshot } => {
            let (_, _, snap) = open_online(&online, &cfg)?;
            write_out(out.as_deref(), &ratings_table(&snap))?;
            if let Some(p) = snapshot {
                snap.save(&p)?;
            }
        }
        Command::Rank { online, role, limit } => {
            let (_, _, mut snap) = open_online(&online, &cfg)?;
            let k = snap.k;
            let ranking = snap
                .rankings
                .get_mut(role)
                .ok_or_else(|| Error::NotFound(format!("role {role} (model has {k} roles)")))?;
            if let Some(l) = limit {
                ranking.entries.truncate(l);
            }
            write_out(None, &ranking_table(ranking, &snap.names))?;
        }
        Command::Search { online, zones, weights, top_k } => {
            let (_, _, snap) = open_online(&online, &cfg)?;
            let query = if weights.is_empty() {
                ZoneQuery::from_zones(snap.settings.grid, &zones)?
            } else {
                ZoneQuery::from_weights(snap.settings.grid, weights)?
            };
            let res = search(&query, &snap.zones, &snap.eligible_ratings(), top_k)?;
            let mut text = String::from("rank\tplayer_id\tname\tz\ts\tr_bar\n");
            for (i, h) in res.hits.iter().enumerate() {
                let name = snap.names.get(&h.player_id).map(String::as_str).unwrap_or("");
                text.push_str(&format!("{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\n", i + 1, h.player_id, name, h.z, h.s, h.r_bar));
            }
            write_out(None, &text)?;
        }
        Command::Versatility { online, player } => {
            let (_, _, snap) = open_online(&online, &cfg)?;
            let mut text = String::from("player_id\tname\tv\tfrequencies\n");
            for (p, v) in &snap.versatility {
                if player.is_some_and(|id| id != *p) {
                    continue;
                }
                let f: Vec<String> = v.frequencies.iter().map(|x| format!("{x:.3}")).collect();
                let name = snap.names.get(p).map(String::as_str).unwrap_or("");
                text.push_str(&format!("{p}\t{name}\t{:.4}\t{}\n", v.v, f.join(",")));
            }
            if let Some(id) = player {
                if !snap.versatility.contains_key(&id) {
                    return Err(Error::NotFound(format!("player {id} has no role history")));
                }
            }
            write_out(None, &text)?;
        }
        Command::Stats { online, alphas } => {
            let (_, _, snap) = open_online(&online, &cfg)?;
            let s = snap.stats()?;
            let (lo, hi) = s.band();
            println!("ratings\t{}", s.ratings);
            println!("mu\t{:.4}", s.mu);
            println!("sigma\t{:.4}", s.sigma);
            println!("excellence_threshold\t{:.4}", s.excellence_threshold);
            println!("excellent\t{} ({:.2}%)", s.excellent_count, 100.0 * s.excellent_count as f64 / s.ratings as f64);
            println!("within_band\t{:.2}% of [{lo:.4}, {hi:.4}]", 100.0 * s.within_band);
            match s.mean_std_correlation {
                Some(c) => println!("mean_std_correlation\t{c:.4}"),
                None => println!("mean_std_correlation\tundefined"),
            }
            if !alphas.is_empty() {
                let sweep =
                    alpha_sweep_correlation(&snap.series, &snap.player_roles, &alphas, cfg.beta, cfg.min_matches)?;
                for a in sweep {
                    let overall = a.overall.map_or("undefined".to_string(), |c| format!("{c:.4}"));
                    println!("alpha {:.2}\tcorrelation {overall}", a.alpha);
                }
            }
        }
        Command::Concordance { online, pairs, role } => {
            let (_, _, snap) = open_online(&online, &cfg)?;
            let text = fs::read_to_string(&pairs).map_err(|e| Error::Io { path: pairs.clone(), source: e })?;
            let pairs = parse_expert_pairs(&text)?;
            let ranking = snap.ranking(role).ok_or_else(|| Error::NotFound(format!("role {role}")))?;
            let rep = concordance(&pairs, ranking)?;
            println!("{}", serde_json::to_string_pretty(&rep)?);
        }
        Command::Serve { online, bind } => {
            let (_, bundle, snap) = open_online(&online, &cfg)?;
            let addr = bind.unwrap_or(cfg.bind.clone());
            serve_blocking(bundle, snap, &addr)?;
        }
        Command::Demo { matches, out, serve } => demo(&cfg, matches, &out, serve)?,
    }
    Ok(())
}

fn serve_blocking(bundle: ModelBundle, snap: Snapshot, addr: &str) -> Result<()> {
    let addr = addr.parse().map_err(|_| Error::Validation(format!("bad bind address `{addr}`")))?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| Error::Io { path: "runtime".into(), source: e })?;
    rt.block_on(serve(AppState::new(bundle, snap), addr))
}

fn demo(cfg: &PipelineConfig, matches: usize, out: &Path, serve_after: bool) -> Result<()> {
    let corpus = generate(&SynthConfig { matches, seed: cfg.seed, ..SynthConfig::default() })?;
    let [events, matches_p, players, comps] = write_corpus(&out.join("corpus"), &corpus.text)?;
    let text = CorpusText::read(&events, &matches_p, &players, Some(&comps))?;
    let store = load_corpus(&text, LoadOptions { keep_goalkeepers: cfg.keep_goalkeepers, strict: false })?;
    store.save(&out.join("store.json"))?;
    eprintln!("corpus: {} matches, {} events -> {}", store.matches().count(), store.event_count(), out.display());

    let outcome = run_learning_phase(&store, cfg)?;
    let bundle = outcome.bundle;
    bundle.save(&out.join("model.txt"))?;
    eprintln!(
        "learning: holdout AUC {:.3}, k = {} roles (silhouette {:.3}), bundle digest {}",
        outcome.eval.auc,
        bundle.roles.k,
        bundle.roles.silhouette,
        &bundle.digest()[..16]
    );
    let catalog = build_feature_catalog();
    let mut order: Vec<usize> = (0..catalog.len()).collect();
    order.sort_by(|&a, &b| bundle.weights.weights[b].total_cmp(&bundle.weights.weights[a]));
    eprintln!("top weighted features:");
    for &i in order.iter().take(5) {
        eprintln!("  {:+.3}  {}", bundle.weights.weights[i], catalog.names()[i]);
    }

    let snap = build_snapshot(&store, &bundle, OnlineSettings::from_config(cfg, &bundle))?;
    write_out(Some(&out.join("ratings.tsv")), &ratings_table(&snap))?;
    snap.save(&out.join("snapshot.json"))?;
    let stats = snap.stats()?;
    eprintln!(
        "ratings: {} player-matches, mu {:.3}, sigma {:.3}, {} excellent",
        stats.ratings, stats.mu, stats.sigma, stats.excellent_count
    );
    for r in &snap.rankings {
        if let Some(top) = r.entries.first() {
            eprintln!(
                "role {} at ({:.0}, {:.0}): {} ranked, top {} (r_bar {:.3})",
                r.role,
                bundle.roles.centroids[r.role][0],
                bundle.roles.centroids[r.role][1],
                r.entries.len(),
                snap.names.get(&top.player_id).map(String::as_str).unwrap_or("?"),
                top.r_bar
            );
        }
    }
    if serve_after {
        serve_blocking(bundle, snap, &cfg.bind)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}

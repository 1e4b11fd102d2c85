use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use super::args::*;
use super::{usage, write_resolved_config};
use crate::analysis::{
    bimodality_gap, conditional_mean_length, heatmap, is_unimodal, modes_default, quantile_edges, ConditionalOptions,
    Entity, Grouping, Response,
};
use crate::corpus::{
    corpus_from_patterns, generate_synthetic_corpus, load_corpus_with, read_threads, save_corpus, Corpus,
    LengthDistribution, LoadOptions, SocialGraph, SynthConfig,
};
use crate::features::{
    first_commenter, post_distinctiveness, train_unigram_lm, FeatureConfig, FirstCommenterIndex, UnigramLM,
};
use crate::genmodels::{
    ensemble_density, ensemble_patterns, exact_distinct_distribution_class_f, ArrivalModel, ArrivalSchedule, ModelSpec,
    SelectionRule,
};
use crate::learn::{
    build_length_task, build_reentry_task, cross_validate, evaluate, length_dataset, positive_bias_baseline,
    reentry_dataset, stepwise_forward_selection, train_bagged_trees, write_metrics_table, CvConfig, Dataset,
    MetricsReport, Scorer, SelectionConfig, TreeEnsemble, TreeParams,
};
use crate::patterns::pattern_reentry_stats;

pub(crate) fn dispatch(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Analyze { analysis } => match analysis {
            Analysis::Heatmap(a) => analyze_heatmap(a),
            Analysis::PatternStats(a) => analyze_patterns(a),
            Analysis::LengthVsLinks(a) => analyze_links(a),
            Analysis::LengthVsLag(a) => analyze_lag(a),
            Analysis::Distinctiveness(a) => analyze_distinctiveness(a),
        },
        Command::MakeCorpus(a) => make_corpus(a),
        Command::ExtractFeatures(a) => extract(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::SelectFeatures(a) => select(a),
        Command::CrossValidate(a) => cv(a),
    }
}

fn prepare<T: Serialize>(common: &Common, command: &str, args: &T) -> Result<()> {
    std::fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    write_resolved_config(&common.out, command, args)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(
        File::create(&path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn load(c: &CorpusArgs) -> Result<Corpus> {
    let threads = c.threads.as_ref().ok_or_else(|| usage("--threads is required"))?;
    let options = LoadOptions {
        population: c.population,
        min_length: c.min_length,
    };
    let corpus = match &c.edges {
        Some(edges) => load_corpus_with(threads, edges, &options)?,
        None => {
            let file = File::open(threads).with_context(|| format!("opening {}", threads.display()))?;
            let all = read_threads(std::io::BufReader::new(file))?;
            let kept = all.into_iter().filter(|t| t.len() >= c.min_length).collect();
            Corpus::new(kept, SocialGraph::new(), c.population)?
        }
    };
    eprintln!("loaded {} threads", corpus.len());
    Ok(corpus)
}

fn simulate(a: &SimulateArgs) -> Result<String> {
    let mut pairs = BTreeMap::new();
    pairs.insert("k".to_string(), a.k.to_string());
    pairs.insert("beta".to_string(), a.beta.to_string());
    pairs.insert("theta".to_string(), a.theta.clone());
    match a.model {
        ModelKind::Urn => {
            pairs.insert("model".into(), "urn".into());
            let alpha = a.alpha.ok_or_else(|| usage("--alpha is required for the urn model"))?;
            pairs.insert("alpha".into(), alpha.to_string());
        }
        ModelKind::Classf => {
            pairs.insert("model".into(), "classf".into());
            let p =
                a.p.as_ref()
                    .ok_or_else(|| usage("--p is required for class-F models"))?;
            pairs.insert("p".into(), p.clone());
        }
    }
    let spec = ModelSpec::from_pairs(&pairs).map_err(|e| usage(e.to_string()))?;
    if a.exact && !matches!(spec, ModelSpec::ClassF(_)) {
        return Err(usage("--exact applies to class-F models only"));
    }
    prepare(&a.common, "simulate", a)?;
    let out = &a.common.out;
    let (density, samples) = match &spec {
        ModelSpec::ClassF(p) if a.exact => (exact_distinct_distribution_class_f(p.p())?, usize::MAX),
        _ => (ensemble_density(&spec, a.runs, a.common.seed)?, a.runs),
    };
    let name = if a.exact { "exact_pmf.csv" } else { "density.csv" };
    let mut w = create(out, name)?;
    density.write_csv(&mut w)?;
    let found = modes_default(&density, samples);
    write_json(
        out,
        "modes.json",
        &json!({
            "k": a.k,
            "runs": if a.exact { None } else { Some(a.runs) },
            "modes": found.iter().map(|m| json!({"d": m.d, "mass": m.mass, "prominence": m.prominence})).collect::<Vec<_>>(),
            "unimodal": is_unimodal(&density),
            "bimodality_gap": bimodality_gap(&density, a.k),
            "mean": density.mean(),
        }),
    )?;
    if a.write_corpus && !a.exact {
        let corpus = corpus_from_patterns(&ensemble_patterns(&spec, a.runs, a.common.seed));
        save_corpus(&corpus, out.join("threads.jsonl"), out.join("edges.csv"))?;
    }
    let modes: Vec<String> = found.iter().map(|m| m.d.to_string()).collect();
    Ok(format!(
        "simulate: wrote {} (mean {:.3}, modes at d = [{}])",
        out.join(name).display(),
        density.mean(),
        modes.join(", ")
    ))
}

fn analyze_heatmap(a: &HeatmapArgs) -> Result<String> {
    if a.kmax == 0 {
        return Err(usage("--kmax must be at least 1"));
    }
    prepare(&a.common, "analyze heatmap", a)?;
    let corpus = load(&a.corpus)?;
    let map = heatmap(&corpus, a.kmax)?;
    let mut w = create(&a.common.out, "heatmap.csv")?;
    map.write_csv(&mut w)?;
    let filled = map.columns().filter(|(_, c)| c.is_some()).count();
    Ok(format!("analyze heatmap: {filled} of {} columns defined", a.kmax))
}

fn analyze_patterns(a: &PatternStatsArgs) -> Result<String> {
    prepare(&a.common, "analyze pattern-stats", a)?;
    let corpus = load(&a.corpus)?;
    let stats = pattern_reentry_stats(&corpus, a.prefix, a.binned)?;
    stats.write_csv(create(&a.common.out, "pattern_stats.csv")?)?;
    Ok(format!(
        "analyze pattern-stats: {} groups over {} threads",
        stats.rows.len(),
        stats.eligible_threads
    ))
}

fn options(g: &GroupingArgs) -> ConditionalOptions {
    ConditionalOptions {
        response: match g.response {
            ResponseArg::Length => Response::Length,
            ResponseArg::Reentry => Response::FirstCommenterReentry,
        },
        min_threads_per_user: g.min_threads_per_user,
        sparse_share: g.sparse_share,
        confidence: g.confidence,
    }
}

fn write_table(out: &Path, name: &str, grouping: &Grouping<'_>, corpus: &Corpus, g: &GroupingArgs) -> Result<String> {
    let table = conditional_mean_length(corpus, grouping, &options(g))?;
    table.write_csv(create(out, name)?)?;
    let sparse = table.rows.iter().filter(|r| r.sparse).count();
    Ok(format!(
        "analyze {}: {} groups ({sparse} sparse)",
        grouping.name(),
        table.rows.len()
    ))
}

fn analyze_links(a: &LinksArgs) -> Result<String> {
    prepare(&a.common, "analyze length-vs-links", a)?;
    let corpus = load(&a.corpus)?;
    let entity = match a.entity {
        EntityArg::Comments => Entity::Comments,
        EntityArg::Likes => Entity::Likes,
    };
    let grouping = Grouping::EdgesAmongFirst { k: a.k, entity };
    write_table(&a.common.out, "length_vs_links.csv", &grouping, &corpus, &a.grouping)
}

fn analyze_lag(a: &LagArgs) -> Result<String> {
    prepare(&a.common, "analyze length-vs-lag", a)?;
    let corpus = load(&a.corpus)?;
    let lags: Vec<f64> = corpus
        .threads()
        .iter()
        .filter_map(|t| t.comments.first().map(|c| (c.time - t.post.time) as f64))
        .collect();
    let grouping = Grouping::FirstCommentLag {
        buckets: quantile_edges(&lags, a.buckets)?,
    };
    write_table(&a.common.out, "length_vs_lag.csv", &grouping, &corpus, &a.grouping)
}

fn analyze_distinctiveness(a: &DistinctivenessArgs) -> Result<String> {
    prepare(&a.common, "analyze distinctiveness", a)?;
    let corpus = load(&a.corpus)?;
    match a.target {
        TargetArg::Post => {
            let lm = match &a.lm {
                Some(path) => {
                    UnigramLM::read_csv(File::open(path).with_context(|| format!("opening {}", path.display()))?)?
                }
                None => {
                    let posts: Vec<&str> = corpus.threads().iter().map(|t| t.post.text.as_str()).collect();
                    train_unigram_lm(&posts, a.oov_floor)?
                }
            };
            let scores: Vec<f64> = corpus
                .threads()
                .iter()
                .filter_map(|t| post_distinctiveness(&t.post.text, &lm).ok())
                .collect();
            let grouping = Grouping::PostDistinctiveness {
                lm: &lm,
                buckets: quantile_edges(&scores, a.buckets)?,
                min_words: a.min_words,
                min_comments: a.min_comments,
            };
            write_table(&a.common.out, "distinctiveness.csv", &grouping, &corpus, &a.grouping)
        }
        TargetArg::FirstCommenter => {
            let index = FirstCommenterIndex::build(&corpus, a.min_posts);
            let scores: Vec<f64> = corpus
                .threads()
                .iter()
                .filter_map(|t| index.distinctiveness(&t.poster_id, first_commenter(t)?).ok())
                .collect();
            let grouping = Grouping::FirstCommenterDistinctiveness {
                buckets: quantile_edges(&scores, a.buckets)?,
                min_posts: a.min_posts,
            };
            write_table(&a.common.out, "distinctiveness.csv", &grouping, &corpus, &a.grouping)
        }
    }
}

fn make_corpus(a: &MakeCorpusArgs) -> Result<String> {
    let model = match (a.model, &a.alphas) {
        (ModelKind::Urn, Some(list)) => {
            let components = list
                .split(',')
                .map(|v| {
                    let alpha: f64 = v.trim().parse().map_err(|_| usage(format!("bad alpha {v:?}")))?;
                    Ok((1.0, ArrivalModel::urn(alpha, a.beta)))
                })
                .collect::<Result<Vec<_>>>()?;
            ArrivalModel::Mixture { components }
        }
        (ModelKind::Urn, None) => ArrivalModel::urn(a.alpha, a.beta),
        (ModelKind::Classf, _) => {
            let rule: SelectionRule = a
                .theta
                .parse()
                .map_err(|e: crate::genmodels::ModelError| usage(e.to_string()))?;
            let schedule: ArrivalSchedule =
                a.p.parse()
                    .map_err(|e: crate::genmodels::ModelError| usage(e.to_string()))?;
            ArrivalModel::class_f(rule, schedule)
        }
    };
    let lengths: LengthDistribution = a
        .lengths
        .parse()
        .map_err(|e: crate::corpus::CorpusError| usage(e.to_string()))?;
    let cfg = SynthConfig {
        posters: a.posters,
        posts_per_poster: a.posts_per_poster,
        model,
        lengths,
        length_coupling: a.length_coupling,
        time_coupling: a.time_coupling,
        mean_gap_secs: a.mean_gap_secs,
        audience_size: a.audience_size,
        audience_share: a.audience_share,
        poster_link_prob: a.poster_link_prob,
        edge_prob: a.edge_prob,
        vocab_size: a.vocab_size,
        zipf_exponent: a.zipf_exponent,
        post_like_mean: a.post_like_mean,
        comment_like_mean: a.comment_like_mean,
        seed: a.common.seed,
        ..SynthConfig::default()
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    prepare(&a.common, "make-corpus", a)?;
    let corpus = generate_synthetic_corpus(&cfg)?;
    let out = &a.common.out;
    save_corpus(&corpus, out.join("threads.jsonl"), out.join("edges.csv"))?;
    write_json(out, "synth_config.json", &cfg)?;
    let comments: usize = corpus.threads().iter().map(|t| t.len()).sum();
    Ok(format!(
        "make-corpus: {} threads, {comments} comments, {} edges",
        corpus.len(),
        corpus.graph().edge_count()
    ))
}

fn feature_config(corpus: &Corpus, t: &TaskArgs) -> Result<FeatureConfig> {
    let mut cfg = FeatureConfig::for_population(corpus.population());
    if let Some(terms) = &t.terms {
        cfg.terms = terms
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
    }
    if t.text_features {
        let posts: Vec<&str> = corpus.threads().iter().map(|t| t.post.text.as_str()).collect();
        cfg.lm = Some(Arc::new(train_unigram_lm(&posts, 1e-6)?));
        cfg.first_commenter = Some(Arc::new(FirstCommenterIndex::build(corpus, t.min_posts)));
    }
    Ok(cfg)
}

fn full_dataset(corpus: &Corpus, t: &TaskArgs) -> Result<Dataset> {
    let fc = feature_config(corpus, t)?;
    Ok(match t.task {
        TaskKind::Length => length_dataset(corpus, t.prefix, t.threshold, &fc)?,
        TaskKind::Reentry => reentry_dataset(corpus, t.prefix, t.target_code, &fc)?,
    })
}

fn split(corpus: &Corpus, t: &TaskArgs, seed: u64) -> Result<(Dataset, Dataset)> {
    let fc = feature_config(corpus, t)?;
    let (train, test) = match t.task {
        TaskKind::Length => build_length_task(corpus, t.prefix, t.threshold, &fc, seed, t.test_fraction)?,
        TaskKind::Reentry => build_reentry_task(corpus, t.prefix, t.target_code, &fc, seed, t.test_fraction)?,
    };
    eprintln!("{} training and {} test instances", train.len(), test.len());
    Ok((train, test))
}

fn tree_params(f: &ForestArgs) -> TreeParams {
    TreeParams {
        max_depth: f.max_depth,
        min_leaf: f.min_leaf,
    }
}

fn extract(a: &ExtractArgs) -> Result<String> {
    prepare(&a.common, "extract-features", a)?;
    let corpus = load(&a.corpus)?;
    let data = full_dataset(&corpus, &a.task)?;
    let out = &a.common.out;
    data.write_csv(create(out, "features.csv")?)?;
    let mut csv = csv::Writer::from_writer(create(out, "instances.csv")?);
    csv.write_record(["thread_id", "target_code"])?;
    for id in data.ids() {
        csv.write_record([
            id.thread_id.clone(),
            id.target_code.map(|c| c.to_string()).unwrap_or_default(),
        ])?;
    }
    csv.flush()?;
    Ok(format!(
        "extract-features: {} instances x {} features ({} positive)",
        data.len(),
        data.n_features(),
        data.positives()
    ))
}

fn write_reports(out: &Path, rows: &[(&str, MetricsReport)], extra: serde_json::Value) -> Result<()> {
    write_metrics_table(create(out, "metrics.csv")?, rows)?;
    let mut doc = serde_json::Map::new();
    for (name, m) in rows {
        doc.insert(name.to_string(), serde_json::to_value(m)?);
    }
    if let serde_json::Value::Object(map) = extra {
        doc.extend(map);
    }
    write_json(out, "metrics.json", &doc)
}

fn train(a: &TrainArgs) -> Result<String> {
    prepare(&a.common, "train", a)?;
    let corpus = load(&a.corpus)?;
    let (train, test) = split(&corpus, &a.task, a.common.seed)?;
    let model = train_bagged_trees(&train, a.forest.trees, tree_params(&a.forest), a.common.seed)?;
    let out = &a.common.out;
    model.write_json(create(out, "model.json")?)?;
    let scores = model.predict_dataset(&test)?;
    let report = evaluate(&scores, test.labels(), a.forest.decision_threshold)?;
    let baseline = positive_bias_baseline(train.labels())?;
    let base = evaluate(&baseline.score_all(&test), test.labels(), a.forest.decision_threshold)?;
    write_reports(
        out,
        &[("bagged-trees", report), ("positive-bias-baseline", base)],
        json!({"n_train": train.len(), "n_test": test.len(), "config": a}),
    )?;
    Ok(format!(
        "train: test AUC {:.3} (baseline {:.3}) on {} instances",
        report.auc,
        base.auc,
        test.len()
    ))
}

fn evaluate_cmd(a: &EvaluateArgs) -> Result<String> {
    prepare(&a.common, "evaluate", a)?;
    let (train_labels, test) = match &a.dataset {
        Some(path) => {
            let data = Dataset::read_csv(File::open(path).with_context(|| format!("opening {}", path.display()))?)?;
            (data.labels().to_vec(), data)
        }
        None => {
            let corpus = load(&a.corpus)?;
            let (train, test) = split(&corpus, &a.task, a.common.seed)?;
            (train.labels().to_vec(), test)
        }
    };
    let (name, scores) = match (&a.model, a.baseline) {
        (Some(path), _) => {
            let model =
                TreeEnsemble::read_json(File::open(path).with_context(|| format!("opening {}", path.display()))?)?;
            ("bagged-trees", model.predict_dataset(&test)?)
        }
        (None, Some(BaselineKind::PositiveBias)) => (
            "positive-bias-baseline",
            positive_bias_baseline(&train_labels)?.score_all(&test),
        ),
        (None, None) => bail!(usage("one of --model or --baseline is required")),
    };
    let report = evaluate(&scores, test.labels(), a.decision_threshold)?;
    write_reports(
        &a.common.out,
        &[(name, report)],
        json!({"n_test": test.len(), "config": a}),
    )?;
    Ok(format!(
        "evaluate: {name} ACC {:.3} AUC {:.3} RMSE {:.3} APR {:.3} CXE {:.3}",
        report.acc, report.auc, report.rmse, report.apr, report.cxe
    ))
}

fn select(a: &SelectArgs) -> Result<String> {
    prepare(&a.common, "select-features", a)?;
    let corpus = load(&a.corpus)?;
    let (train, validation) = split(&corpus, &a.task, a.common.seed)?;
    let cfg = SelectionConfig {
        inner_trees: a.inner_trees,
        final_trees: a.forest.trees,
        epsilon: a.epsilon,
        params: tree_params(&a.forest),
        seed: a.common.seed,
    };
    let steps = stepwise_forward_selection(&train, &validation, train.feature_names(), a.max_steps, &cfg)?;
    let mut csv = csv::Writer::from_writer(create(&a.common.out, "selection.csv")?);
    csv.write_record(["feature", "AUC"])?;
    for s in &steps {
        csv.write_record([s.feature.clone(), format!("{:.4}", s.auc)])?;
    }
    csv.flush()?;
    let names: Vec<&str> = steps.iter().map(|s| s.feature.as_str()).collect();
    Ok(format!(
        "select-features: {} (final AUC {:.4})",
        names.join(" > "),
        steps.last().map_or(0.5, |s| s.auc)
    ))
}

fn cv(a: &CvArgs) -> Result<String> {
    prepare(&a.common, "cross-validate", a)?;
    let data = match &a.dataset {
        Some(path) => Dataset::read_csv(File::open(path).with_context(|| format!("opening {}", path.display()))?)?,
        None => full_dataset(&load(&a.corpus)?, &a.task)?,
    };
    let cfg = CvConfig {
        n_trees: a.forest.trees,
        params: tree_params(&a.forest),
        threshold: a.forest.decision_threshold,
        seed: a.common.seed,
    };
    let report = cross_validate(&data, a.folds, &cfg)?;
    let out = &a.common.out;
    write_metrics_table(create(out, "cv.csv")?, &[("bagged-trees", report.mean)])?;
    write_json(out, "cv.json", &json!({"report": report, "config": a}))?;
    Ok(format!(
        "cross-validate: mean AUC {:.3} over {} folds{}",
        report.mean.auc,
        a.folds,
        if report.pooled { " (pooled)" } else { "" }
    ))
}

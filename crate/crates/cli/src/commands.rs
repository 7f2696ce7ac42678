use std::path::Path;

use lamp::analysis::{
    empirical_state_distribution, is_ergodic, lamp_mixing_bound, mixing_time, renewal_rate_estimate,
    simulate_exponent_process, stationary_distribution, total_variation, tv_profile, AnalysisReport,
};
use lamp::baselines::{fit_kneser_ney, fit_naive_ngram, ngram_log_likelihood, ngram_perplexity};
use lamp::data::{self, PreprocessConfig};
use lamp::learn::{alternate_minimize, TrainConfig};
use lamp::model::{log_likelihood_with, EvalOptions, DEFAULT_FLOOR};
use lamp::{generate as sample, log_likelihood, Corpus, HistoryDistribution, LampError, LampModel};
use serde_json::json;

use crate::args::{
    Analysis, AnalyzeArgs, BaselineArgs, BaselineKind, EvaluateArgs, GenerateArgs, PreprocessArgs, TrainArgs,
};
use crate::manifest::{number, Run};
use crate::CliError;

/// `.json` paths are corpus caches from `preprocess`; anything else is text.
fn load_corpus(path: &Path) -> Result<Corpus, LampError> {
    if path.extension().is_some_and(|e| e == "json") {
        Corpus::load_json(path)
    } else {
        Ok(data::load_corpus(path, None)?.0)
    }
}

fn parse_weights(text: &str) -> Result<HistoryDistribution, CliError> {
    let raw: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("--w expects comma-separated numbers: {e}")))?;
    Ok(HistoryDistribution::new(raw)?)
}

fn json_text<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).unwrap_or_default()
}

pub fn preprocess(a: PreprocessArgs, threads: usize) -> Result<String, CliError> {
    let mut run = Run::start("preprocess", &a.out_dir)?;
    run.input(&a.input)?;
    let cfg = PreprocessConfig {
        collapse_repeats: !a.no_collapse,
        rare_min_count: a.min_count,
        rare_token_label: a.rare_token.clone(),
        split_fraction: a.split.unwrap_or(0.9),
        split_seed: a.seed,
    };
    cfg.validate()?;
    let (raw, load) = data::load_corpus(&a.input, a.limit)?;
    let (corpus, report) = data::preprocess(&raw, &cfg)?;

    let mut summary = format!(
        "preprocess sequences={} vocab={} dropped={}",
        report.output_sequences, report.output_vocab, report.dropped_sequences
    );
    let split = match a.split {
        Some(fraction) => {
            let (train, test) = data::split(&corpus, fraction, a.seed, &a.rare_token)?;
            train.save_json(&run.record("train.json"))?;
            test.save_json(&run.record("test.json"))?;
            summary.push_str(&format!(" train_sequences={} test_sequences={}", train.len(), test.len()));
            json!({
                "fraction": fraction,
                "seed": a.seed,
                "train_sequences": train.len(),
                "test_sequences": test.len(),
                "train_vocab": train.vocab().len(),
            })
        }
        None => {
            corpus.save_json(&run.record("corpus.json"))?;
            serde_json::Value::Null
        }
    };
    run.write_json("preprocess.json", &json!({ "load": load, "preprocess": report, "split": split }))?;
    run.finish(&json!({ "args": a, "preprocess_config": cfg }), Some(a.seed), threads, None)?;
    Ok(summary)
}

fn train_config(a: &TrainArgs, run: &mut Run) -> Result<TrainConfig, CliError> {
    let mut cfg = match &a.config {
        Some(path) => {
            run.input(path)?;
            let text = std::fs::read_to_string(path)
                .map_err(|source| LampError::Io { path: path.display().to_string(), source })?;
            serde_json::from_str(&text).map_err(LampError::from)?
        }
        None => TrainConfig::default(),
    };
    if let Some(k) = a.k {
        cfg.k = k;
    }
    if let Some(r) = a.rounds {
        cfg.rounds = r;
    }
    if a.weight_only {
        cfg.weight_only = true;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(d) = a.init_decay {
        cfg.init_decay = d;
    }
    if let Some(t) = a.kkt_tol {
        cfg.kkt_tol = t;
    }
    if let Some(m) = a.max_newton_iters {
        cfg.max_newton_iters = m;
    }
    if let Some(e) = a.support_epsilon {
        cfg.support_epsilon = e;
    }
    if let Some(p) = a.prior_count {
        cfg.prior_count = p;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn train(a: TrainArgs, threads: usize) -> Result<String, CliError> {
    let mut run = Run::start("train", &a.out_dir)?;
    let cfg = train_config(&a, &mut run)?;
    run.input(&a.corpus)?;
    let corpus = load_corpus(&a.corpus)?;
    let (model, report) = alternate_minimize(&corpus, &cfg)?;
    let ll = log_likelihood(&model, &corpus)?;
    let ppl = ll.perplexity()?;

    model.save(&run.record("model.json"))?;
    run.write_text("train_report.jsonl", &report.to_json_lines()?)?;
    run.write_json(
        "train.json",
        &json!({
            "corpus": a.corpus,
            "k": cfg.k,
            "rounds": cfg.rounds,
            "half_iterations": cfg.half_iterations(),
            "train_log_likelihood": number(ll.total),
            "train_perplexity": number(ppl),
            "impossible_transitions": ll.impossible,
            "empty_rows": report.empty_rows,
            "w": model.w().weights(),
            "config": cfg,
        }),
    )?;
    let timings = json!({ "block_wall_time_ms": report.wall_time_ms });
    run.finish(&json!({ "args": a, "train_config": cfg }), Some(cfg.seed), threads, Some(timings))?;
    Ok(format!("train perplexity={} k={} rounds={}", ppl, cfg.k, cfg.rounds))
}

pub fn evaluate(a: EvaluateArgs, threads: usize) -> Result<String, CliError> {
    let mut run = Run::start("evaluate", &a.out_dir)?;
    run.input(&a.model)?;
    run.input(&a.corpus)?;
    let model = LampModel::load(&a.model)?;
    let corpus = load_corpus(&a.corpus)?;
    let corpus = if corpus.vocab() == model.vocab() { corpus } else { corpus.reencode(model.vocab())? };
    let floor = a.floor.then(|| a.floor_value.unwrap_or(DEFAULT_FLOOR));
    let ll = log_likelihood_with(&model, &corpus, EvalOptions { floor })?;
    let ppl = ll.perplexity()?;
    run.write_json(
        "evaluation.json",
        &json!({
            "model": a.model,
            "corpus": a.corpus,
            "perplexity": number(ppl),
            "log_likelihood": number(ll.total),
            "scored_transitions": ll.scored,
            "impossible_transitions": ll.impossible,
            "floor": floor,
        }),
    )?;
    run.finish(&a, None, threads, None)?;
    Ok(format!("evaluate perplexity={} impossible_transitions={}", ppl, ll.impossible))
}

pub fn generate(a: GenerateArgs, threads: usize) -> Result<String, CliError> {
    let mut run = Run::start("generate", &a.out_dir)?;
    run.input(&a.model)?;
    let model = LampModel::load(&a.model)?;
    let start = match &a.start {
        Some(token) => model.vocab().id(token).ok_or_else(|| {
            LampError::VocabMismatch(format!("start token {token:?} is not in the model vocabulary"))
        })?,
        None => 0,
    };
    let ids = sample(&model, start, a.length, a.seed)?;
    let tokens: Vec<&str> = ids.iter().map(|&id| model.vocab().token(id).unwrap_or("?")).collect();
    run.write_json(
        "generated.json",
        &json!({ "start": tokens.first(), "length": a.length, "seed": a.seed, "tokens": tokens }),
    )?;
    let line = tokens.join(" ");
    run.finish(&a, Some(a.seed), threads, None)?;
    Ok(line)
}

pub fn analyze(a: AnalyzeArgs, threads: usize) -> Result<String, CliError> {
    let (command, file) = match a.analysis {
        Analysis::Stationary => ("analyze-stationary", "analysis_stationary.json"),
        Analysis::Mixing => ("analyze-mixing", "analysis_mixing.json"),
        Analysis::Exponent => ("analyze-exponent", "analysis_exponent.json"),
        Analysis::Bound => ("analyze-bound", "analysis_bound.json"),
    };
    let mut run = Run::start(command, &a.out_dir)?;
    let model = match &a.model {
        Some(path) => {
            run.input(path)?;
            Some(LampModel::load(path)?)
        }
        None => None,
    };
    let w = match (&a.w, &model) {
        (Some(text), _) => Some(parse_weights(text)?),
        (None, Some(m)) => Some(m.w().clone()),
        (None, None) => None,
    };
    let need_model = || {
        model.as_ref().ok_or_else(|| CliError::Usage(format!("{command} needs --model")))
    };

    let (report, summary) = match a.analysis {
        Analysis::Stationary => {
            let m = need_model()?;
            let class = is_ergodic(m.p());
            if !class.is_ergodic() {
                return Err(LampError::NotErgodic(class.reason()).into());
            }
            let pi = stationary_distribution(m.p(), a.tol)?;
            let mut outputs = json!({ "ergodicity": "ergodic", "pi": pi });
            let mut summary = format!("stationary pi={}", json_text(&pi));
            let mut report = None;
            if let Some(steps) = a.steps {
                let walk = m.with_w(w.clone().expect("model supplies w"));
                let empirical = empirical_state_distribution(&walk, steps, 0, a.seed)?;
                let tv = total_variation(&empirical, &pi);
                outputs["empirical"] = json!(empirical);
                outputs["total_variation"] = json!(tv);
                summary.push_str(&format!(" total_variation={tv}"));
                let inputs = json!({ "steps": steps, "seed": a.seed, "tol": a.tol, "w": walk.w().weights() });
                report = Some(
                    AnalysisReport::new("stationary", inputs, outputs.clone())
                        .with_check(json!({ "total_variation": a.tv_tolerance }), tv <= a.tv_tolerance),
                );
            }
            let report = report.unwrap_or_else(|| AnalysisReport::new("stationary", json!({ "tol": a.tol }), outputs));
            (report, summary)
        }
        Analysis::Mixing => {
            let m = need_model()?;
            let t = mixing_time(m.p(), a.delta)?;
            let pi = stationary_distribution(m.p(), 1e-14)?;
            let profile = tv_profile(m.p(), &pi, t);
            let report = AnalysisReport::new(
                "mixing",
                json!({ "delta": a.delta }),
                json!({ "mixing_time": t, "tv_profile": profile }),
            );
            (report, format!("mixing delta={} mixing_time={}", a.delta, t))
        }
        Analysis::Exponent => {
            let w = w.ok_or_else(|| CliError::Usage("exponent needs --w or --model".into()))?;
            let steps = a.steps.unwrap_or(100_000);
            let trace = simulate_exponent_process(&w, steps, a.seed)?;
            let est = renewal_rate_estimate(&trace, &w);
            let bounds = trace.within_bounds(w.k());
            run.write_text("exponent_trace.csv", &trace.to_csv())?;
            let summary = format!(
                "exponent t={} e_t={} rate={} predicted_rate={}",
                est.t,
                trace.last(),
                est.empirical_rate,
                est.predicted_rate
            );
            let report = AnalysisReport::new(
                "exponent",
                json!({ "w": w.weights(), "steps": steps, "seed": a.seed }),
                json!({ "e_t": trace.last(), "estimate": est, "bounds_hold": bounds }),
            )
            .with_check(json!({ "lower_bound": "e_t >= floor(t / k)" }), bounds);
            (report, summary)
        }
        Analysis::Bound => {
            let m = need_model()?;
            let w = w.expect("model supplies w");
            let b = lamp_mixing_bound(&w, m.p(), a.delta, a.epsilon, a.threshold)?;
            let summary = format!("bound bound={} confidence={} C={}", b.bound, b.confidence, b.c);
            let report = AnalysisReport::new(
                "bound",
                json!({ "w": w.weights(), "delta": a.delta, "epsilon": a.epsilon, "T": a.threshold }),
                json!(b),
            );
            (report, summary)
        }
    };
    run.write_json(file, &report)?;
    run.finish(&a, Some(a.seed), threads, None)?;
    Ok(summary)
}

pub fn baseline(a: BaselineArgs, threads: usize) -> Result<String, CliError> {
    let mut run = Run::start("baseline", &a.out_dir)?;
    run.input(&a.train)?;
    let train = load_corpus(&a.train)?;
    let model = match a.kind {
        BaselineKind::Naive => fit_naive_ngram(&train, a.order)?,
        BaselineKind::KneserNey => fit_kneser_ney(&train, a.order, a.discount)?,
    };
    let train_ppl = ngram_perplexity(&model, &train)?;
    let mut out = json!({
        "kind": a.kind,
        "order": a.order,
        "discount": (a.kind == BaselineKind::KneserNey).then_some(a.discount),
        "train_perplexity": number(train_ppl),
    });
    let kind = match a.kind {
        BaselineKind::Naive => "naive",
        BaselineKind::KneserNey => "kneser_ney",
    };
    let mut summary = format!("baseline kind={kind} order={} train_perplexity={}", a.order, train_ppl);
    if let Some(path) = &a.test {
        run.input(path)?;
        let test = load_corpus(path)?;
        let test = if test.vocab() == train.vocab() { test } else { test.reencode(train.vocab())? };
        let ll = ngram_log_likelihood(&model, &test)?;
        let ppl = ll.perplexity()?;
        out["test_perplexity"] = number(ppl);
        out["test_impossible_transitions"] = json!(ll.impossible);
        summary.push_str(&format!(" test_perplexity={} test_impossible_transitions={}", ppl, ll.impossible));
    }
    model.save(&run.record("ngram.json"))?;
    run.write_json("baseline.json", &out)?;
    run.finish(&a, None, threads, None)?;
    Ok(summary)
}

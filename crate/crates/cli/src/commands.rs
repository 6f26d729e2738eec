use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use serde_json::{json, Value};

use agec_core::config::AppConfig;
use agec_core::corrupt::{corrupt_corpus_par, verify_distribution, Tolerances, MIN_RECORDS_FOR_VERIFY};
use agec_core::llm::{
    self, alc_taxonomy, HttpTransport, PromptTemplate, ReplayTransport, Shot, Stage, Strategy, Transport,
};
use agec_core::m2::{annotate_pair, emit_m2, parse_m2_reader, M2Record};
use agec_core::maxmatch::{render_table, Scorer};
use agec_core::stats::CorpusStats;
use agec_core::tags::{decode_tags_with, dump_line, edit_space_stats, encode_tags, iterative_correct, parse_dump_line};
use agec_core::text::{detokenize, NormalizationMode, Sentence, TextConfig};

use crate::{AnnotateArgs, Cli, Command, CorruptArgs, LlmArgs, PairArgs, ScoreArgs, StatsArgs, StrategyArg, TagsCommand};

pub fn run(cli: &Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => AppConfig::from_toml_str(&read(path)?).with_context(|| format!("config {}", path.display()))?,
        None => AppConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.corruption.seed = seed;
    }
    let text = TextConfig::default();
    let report = match &cli.command {
        Command::Score(a) => score(cli, &cfg, &text, a)?,
        Command::Annotate(a) => annotate(&text, a)?,
        Command::Corrupt(a) => corrupt(&cfg, &text, a)?,
        Command::Tags { action } => tags(&text, action)?,
        Command::Stats(a) => stats(&text, a)?,
        Command::Llm(a) => run_llm(&cfg, &text, a)?,
    };
    if let (Some(path), Some(report)) = (&cli.json, report) {
        let body = serde_json::to_string_pretty(&report)?;
        fs::write(path, body + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_corpus(text: &TextConfig, path: &Path) -> Result<Vec<Sentence>> {
    Ok(read(path)?
        .lines()
        .enumerate()
        .map(|(i, l)| text.tokenize(l).with_id(format!("{}", i + 1)))
        .collect())
}

fn read_m2(text: &TextConfig, path: &Path) -> Result<Vec<M2Record>> {
    let file = File::open(path).with_context(|| format!("reading {}", path.display()))?;
    parse_m2_reader(BufReader::new(file), text).with_context(|| format!("parsing {}", path.display()))
}

fn read_pair(text: &TextConfig, a: &PairArgs) -> Result<(Vec<Sentence>, Vec<Sentence>)> {
    let src = read_corpus(text, &a.src)?;
    let tgt = read_corpus(text, &a.tgt)?;
    ensure!(
        src.len() == tgt.len(),
        "{} has {} lines but {} has {}",
        a.src.display(),
        src.len(),
        a.tgt.display(),
        tgt.len()
    );
    Ok((src, tgt))
}

fn print_lines<I: IntoIterator<Item = String>>(lines: I) -> Result<()> {
    let mut out = BufWriter::new(std::io::stdout().lock());
    for l in lines {
        writeln!(out, "{l}")?;
    }
    out.flush()?;
    Ok(())
}

fn score(cli: &Cli, cfg: &AppConfig, text: &TextConfig, a: &ScoreArgs) -> Result<Option<Value>> {
    let src = read_corpus(text, &a.src)?;
    let hyp = read_corpus(text, &a.hyp)?;
    let gold = read_m2(text, &a.m2)?;
    ensure!(
        src.len() == hyp.len(),
        "{} source lines but {} hypothesis lines",
        src.len(),
        hyp.len()
    );
    let betas = if a.betas.is_empty() { cfg.score.betas.clone() } else { a.betas.clone() };
    ensure!(betas.iter().all(|b| b.is_finite() && *b > 0.0), "beta must be positive");
    let scorer = Scorer {
        text: text.clone(),
        betas,
    };
    let pairs: Vec<(Sentence, Sentence)> = src.into_iter().zip(hyp).collect();
    let modes: Vec<NormalizationMode> = match cli.mode {
        Some(m) => vec![m.into()],
        None => NormalizationMode::ALL.to_vec(),
    };
    let reports = modes
        .iter()
        .map(|&m| scorer.score_corpus(&pairs, &gold, m))
        .collect::<Result<Vec<_>, _>>()?;
    print!("{}", render_table(&reports));
    Ok(Some(Value::Array(reports.iter().map(|r| r.to_json()).collect())))
}

fn annotate(text: &TextConfig, a: &AnnotateArgs) -> Result<Option<Value>> {
    let (src, reference) = read_pair(
        text,
        &PairArgs {
            src: a.src.clone(),
            tgt: a.reference.clone(),
        },
    )?;
    let records: Vec<M2Record> = src
        .iter()
        .zip(&reference)
        .map(|(s, r)| annotate_pair(s, r, 0, a.types))
        .collect();
    let m2 = emit_m2(&records);
    match &a.out {
        Some(path) => fs::write(path, m2).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{m2}"),
    }
    Ok(None)
}

fn corrupt(cfg: &AppConfig, text: &TextConfig, a: &CorruptArgs) -> Result<Option<Value>> {
    let all = read_corpus(text, &a.clean)?;
    let clean: Vec<Sentence> = all.into_iter().filter(|s| !s.is_empty()).collect();
    let records = corrupt_corpus_par(&clean, &cfg.corruption)?;
    let dropped: usize = records.iter().map(|r| r.dropped_actions.len()).sum();
    if dropped > 0 {
        log::warn!("{dropped} planned actions found no site and were dropped");
    }
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let tsv: String = records
        .iter()
        .map(|r| format!("{}\t{}\n", detokenize(&r.noisy), detokenize(&r.clean)))
        .collect();
    let m2: Vec<M2Record> = records.iter().map(|r| r.to_m2()).collect();
    fs::write(a.out.join("corpus.tsv"), tsv).context("writing corpus.tsv")?;
    fs::write(a.out.join("corpus.m2"), emit_m2(&m2)).context("writing corpus.m2")?;

    if records.len() < MIN_RECORDS_FOR_VERIFY {
        log::warn!(
            "{} records; conformance needs at least {MIN_RECORDS_FOR_VERIFY}, check skipped",
            records.len()
        );
        println!("records {}", records.len());
        return Ok(Some(json!({ "records": records.len(), "conformance": null })));
    }
    let report = verify_distribution(&records, &cfg.corruption, Tolerances::default())?;
    print!("{}", report.render());
    if !report.pass {
        log::warn!("corpus falls outside the configured distribution tolerances");
    }
    Ok(Some(json!({ "records": records.len(), "conformance": report })))
}

fn tags(text: &TextConfig, action: &TagsCommand) -> Result<Option<Value>> {
    match action {
        TagsCommand::Encode(a) => {
            let (src, tgt) = read_pair(text, a)?;
            print_lines(src.iter().zip(&tgt).map(|(s, t)| dump_line(s, &encode_tags(s, t))))?;
            Ok(None)
        }
        TagsCommand::Decode {
            tags: Some(path), ..
        } => {
            let mut out = Vec::new();
            for (i, line) in read(path)?.lines().enumerate() {
                let (src, seq) = parse_dump_line(text, line).with_context(|| format!("{}:{}", path.display(), i + 1))?;
                let decoded = decode_tags_with(text, &src, &seq).with_context(|| format!("{}:{}", path.display(), i + 1))?;
                out.push(detokenize(&decoded));
            }
            print_lines(out)?;
            Ok(None)
        }
        TagsCommand::Decode {
            src: Some(src),
            tgt: Some(tgt),
            max_iters,
            ..
        } => {
            ensure!(*max_iters > 0, "--max-iters must be at least 1");
            let (src, tgt) = read_pair(
                text,
                &PairArgs {
                    src: src.clone(),
                    tgt: tgt.clone(),
                },
            )?;
            let mut unresolved = 0;
            let mut out = Vec::with_capacity(src.len());
            for (s, t) in src.iter().zip(&tgt) {
                let c = iterative_correct(s, |x| Ok::<_, std::convert::Infallible>(encode_tags(x, t)), *max_iters)
                    .map_err(|e| anyhow::anyhow!("{e}"))?;
                if !c.sentence.same_tokens(t) {
                    unresolved += 1;
                }
                out.push(detokenize(&c.sentence));
            }
            print_lines(out)?;
            if unresolved > 0 {
                log::warn!("{unresolved} sentences not reconstructed within {max_iters} iterations");
            }
            Ok(Some(json!({ "sentences": src.len(), "unresolved": unresolved, "max_iters": max_iters })))
        }
        TagsCommand::Decode { .. } => bail!("decode needs --tags, or both --src and --tgt"),
        TagsCommand::Stats(a) => {
            let (src, tgt) = read_pair(text, a)?;
            let stats = edit_space_stats(src.iter().zip(&tgt));
            print!("{}", stats.render());
            Ok(Some(stats.to_json()))
        }
    }
}

fn stats(text: &TextConfig, a: &StatsArgs) -> Result<Option<Value>> {
    let records = read_m2(text, &a.m2)?;
    if let Some(path) = &a.src {
        let src = read_corpus(text, path)?;
        ensure!(src.len() == records.len(), "{} source lines but {} M2 records", src.len(), records.len());
        if let Some(i) = src.iter().zip(&records).position(|(s, r)| !s.same_tokens(&r.source)) {
            bail!("line {} of {} differs from its M2 source", i + 1, path.display());
        }
    }
    let stats = CorpusStats::from_records(&records)?;
    print!("{}", stats.render());
    Ok(Some(stats.to_json()))
}

fn read_shots(text: &TextConfig, path: &Path, n: usize) -> Result<Vec<Shot>> {
    let shots: Vec<Shot> = read(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .take(n)
        .enumerate()
        .map(|(i, l)| {
            let (s, t) = l
                .split_once('\t')
                .with_context(|| format!("{}:{}: expected source<TAB>target", path.display(), i + 1))?;
            Ok(Shot {
                source: text.tokenize(s),
                target: text.tokenize(t),
            })
        })
        .collect::<Result<_>>()?;
    ensure!(shots.len() == n, "{} holds {} examples, {n} requested", path.display(), shots.len());
    Ok(shots)
}

fn run_llm(cfg: &AppConfig, text: &TextConfig, a: &LlmArgs) -> Result<Option<Value>> {
    let shots = match (&a.shots_file, a.shots) {
        (_, 0) => Vec::new(),
        (Some(path), n) => read_shots(text, path, n)?,
        (None, n) => bail!("--shots {n} needs --shots-file"),
    };
    let template = match a.strategy {
        StrategyArg::Cot => PromptTemplate::new(Strategy::FewShotCoT, shots, None, Stage::AnswerExtraction),
        StrategyArg::Expert => {
            PromptTemplate::new(Strategy::Expert, shots, Some(alc_taxonomy()), Stage::AnswerExtraction)
        }
        StrategyArg::Corruptor => {
            PromptTemplate::new(Strategy::Corruptor, Vec::new(), Some(alc_taxonomy()), Stage::AnswerExtraction)
        }
    }?;
    let inputs: Vec<Sentence> = read_corpus(text, &a.input)?;

    if a.dry_run {
        let prompts = llm::build_prompts(&template, &inputs)?;
        print_lines(
            prompts
                .iter()
                .enumerate()
                .map(|(i, p)| json!({ "ordinal": i, "prompt": p }).to_string()),
        )?;
        return Ok(None);
    }

    let transport: Box<dyn Transport> = match &a.replay {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("reading {}", path.display()))?;
            let replay = ReplayTransport::from_jsonl(BufReader::new(file))
                .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
            Box::new(replay)
        }
        None => Box::new(HttpTransport::new(&cfg.transport)),
    };
    let mut log_file = match &a.log {
        Some(path) => Some(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => None,
    };
    let outcomes = llm::run(
        transport.as_ref(),
        &cfg.transport,
        &template,
        &inputs,
        log_file.as_mut().map(|w| w as &mut (dyn Write + Send)),
    )?;
    if let Some(mut w) = log_file {
        w.flush()?;
    }
    let unparsed = outcomes.iter().filter(|o| o.parsed.is_none()).count();
    let low_confidence = outcomes
        .iter()
        .filter(|o| o.parsed.as_ref().is_some_and(|p| p.low_confidence))
        .count();
    if unparsed > 0 {
        log::warn!("{unparsed} replies had no usable sentence; their sources were kept");
    }
    print_lines(outcomes.iter().map(|o| detokenize(&o.sentence_or_source())))?;
    Ok(Some(json!({
        "sentences": outcomes.len(),
        "unparsed": unparsed,
        "low_confidence": low_confidence,
        "retries": outcomes.iter().map(|o| o.retries).sum::<u32>(),
    })))
}

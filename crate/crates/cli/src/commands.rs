use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use kasus_annotate::{load_fillers, AnnotationService, AssignmentConfig, ItemPool, ServiceConfig};
use kasus_core::case::Case;
use kasus_core::genset::{build_dataset, load_templates, Dataset, Restriction};
use kasus_core::lexicon::load_lexicon;
use kasus_core::metrics::{
    aggregate, constraint_check, correlate_scores, correlate_set_aucs, evaluate_sets, human_scores,
    read_annotations, read_set_aucs, set_roc_curves, write_set_aucs, ComparisonTable,
    ConstraintRanking, GroupBy, QcRemoval, SetAuc,
};
use kasus_core::scoring::{
    export_requests, import_scores, score_dataset, train_ngram_partitioned, NgramConfig,
    NgramModel, NgramScorer, ScoreTable, TextCorpus,
};

use crate::cli::*;
use crate::manifest::{check_dataset, write_atomic, write_with, Manifest, RunConfig};

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    Dataset::read_jsonl(open(path)?).with_context(|| format!("reading dataset {}", path.display()))
}

fn load_scores(path: &Path, dataset: &Dataset) -> Result<ScoreTable> {
    let name = crate::manifest::read_manifest(path)?
        .and_then(|m| m.config.scorer_name)
        .unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        });
    import_scores(open(path)?, &name, dataset)
        .with_context(|| format!("reading scores {}", path.display()))
}

fn load_aucs(path: &Path) -> Result<(String, Vec<SetAuc>)> {
    read_set_aucs(open(path)?).with_context(|| format!("reading per-set AUCs {}", path.display()))
}

pub fn generate(args: &GenerateArgs) -> Result<String> {
    let lexicon = load_lexicon(open(&args.lexicon)?)
        .with_context(|| format!("reading {}", args.lexicon.display()))?;
    let templates = load_templates(open(&args.templates)?)
        .with_context(|| format!("reading {}", args.templates.display()))?;
    let dataset = build_dataset(&templates, &lexicon)?;

    let data_path = args.out_dir.join("dataset.jsonl");
    let sets_path = args.out_dir.join("sets.jsonl");
    write_with(&data_path, |buf| Ok(dataset.write_jsonl(buf)?))?;
    write_with(&sets_path, |buf| Ok(dataset.write_sets_jsonl(buf)?))?;

    let config = RunConfig {
        lexicon: Some(args.lexicon.clone()),
        templates: Some(args.templates.clone()),
        output: Some(args.out_dir.clone()),
        ..Default::default()
    };
    let mut manifest = Manifest::new("generate", config, Some(dataset.content_hash()));
    manifest.input(&args.lexicon)?;
    manifest.input(&args.templates)?;
    manifest.output(&data_path)?;
    manifest.output(&sets_path)?;
    manifest.write_for(&data_path)?;
    manifest.write_for(&sets_path)?;

    let acceptable = dataset.acceptable_count();
    Ok(format!(
        "{} templates\n{} total / {} acceptable / {} unacceptable\n",
        templates.len(),
        dataset.len(),
        acceptable,
        dataset.len() - acceptable
    ))
}

pub fn train(args: &TrainArgs) -> Result<String> {
    let config = match args.order {
        1 => NgramConfig::unigram(args.vocab_size),
        _ => NgramConfig::bigram(args.vocab_size),
    };
    let parts = TextCorpus::strided(&args.corpus, args.partitions);
    let refs: Vec<&TextCorpus> = parts.iter().collect();
    let model = train_ngram_partitioned(&refs, config)?;
    write_with(&args.out, |buf| Ok(model.write(buf)?))?;

    let run = RunConfig {
        corpus: Some(args.corpus.clone()),
        output: Some(args.out.clone()),
        order: Some(args.order),
        vocab_size: Some(args.vocab_size),
        partitions: Some(args.partitions),
        ..Default::default()
    };
    let mut manifest = Manifest::new("train", run, None);
    manifest.input(&args.corpus)?;
    manifest.output(&args.out)?;
    manifest.write_for(&args.out)?;
    Ok(format!(
        "order {} model: {} vocabulary entries, {} training tokens\n",
        model.order(),
        model.vocab().len(),
        model.total_tokens()
    ))
}

pub fn score(args: &ScoreArgs) -> Result<String> {
    let dataset = load_dataset(&args.dataset)?;
    let model = NgramModel::read(open(&args.model)?)
        .with_context(|| format!("reading {}", args.model.display()))?;
    let mut scorer = NgramScorer::new(model);
    scorer.include_punctuation = !args.no_punctuation;
    if let Some(name) = &args.name {
        scorer.name = name.clone();
    }
    let table = score_dataset(&scorer, &dataset)?;
    write_with(&args.out, |buf| Ok(table.write(&dataset, buf)?))?;

    let run = RunConfig {
        dataset: Some(args.dataset.clone()),
        model: Some(args.model.clone()),
        output: Some(args.out.clone()),
        scorer_name: Some(scorer.name.clone()),
        include_punctuation: Some(scorer.include_punctuation),
        ..Default::default()
    };
    let mut manifest = Manifest::new("score", run, Some(dataset.content_hash()));
    manifest.input(&args.dataset)?;
    manifest.input(&args.model)?;
    manifest.output(&args.out)?;
    manifest.write_for(&args.out)?;
    Ok(format!(
        "scored {} sentences with {}\n",
        table.len(),
        scorer.name
    ))
}

pub fn export_requests_cmd(args: &ExportRequestsArgs) -> Result<String> {
    let dataset = load_dataset(&args.dataset)?;
    write_with(&args.out, |buf| Ok(export_requests(&dataset, buf)?))?;
    let run = RunConfig {
        dataset: Some(args.dataset.clone()),
        output: Some(args.out.clone()),
        ..Default::default()
    };
    let mut manifest = Manifest::new("export-requests", run, Some(dataset.content_hash()));
    manifest.input(&args.dataset)?;
    manifest.output(&args.out)?;
    manifest.write_for(&args.out)?;
    Ok(format!("wrote {} requests\n", dataset.len()))
}

pub fn import_scores_cmd(args: &ImportScoresArgs) -> Result<String> {
    let dataset = load_dataset(&args.dataset)?;
    let table = import_scores(open(&args.input)?, &args.name, &dataset)
        .with_context(|| format!("reading {}", args.input.display()))?;
    table.validate_coverage(&dataset)?;
    write_with(&args.out, |buf| Ok(table.write(&dataset, buf)?))?;
    let run = RunConfig {
        dataset: Some(args.dataset.clone()),
        scores: vec![args.input.clone()],
        output: Some(args.out.clone()),
        scorer_name: Some(args.name.clone()),
        ..Default::default()
    };
    let mut manifest = Manifest::new("import-scores", run, Some(dataset.content_hash()));
    manifest.input(&args.dataset)?;
    manifest.input(&args.input)?;
    manifest.output(&args.out)?;
    manifest.write_for(&args.out)?;
    Ok(format!(
        "imported {} scores for {}\n",
        table.len(),
        args.name
    ))
}

pub fn import_annotations(args: &ImportAnnotationsArgs) -> Result<String> {
    let dataset = load_dataset(&args.dataset)?;
    let records = read_annotations(open(&args.annotations)?)
        .with_context(|| format!("reading {}", args.annotations.display()))?;
    let unknown: Vec<&str> = records
        .iter()
        .filter(|r| !r.is_filler && !dataset.contains(&r.sentence_id))
        .map(|r| r.sentence_id.as_str())
        .collect();
    if !unknown.is_empty() {
        bail!(
            "{} test ratings name sentences outside the dataset, e.g. {:?}",
            unknown.len(),
            unknown[0]
        );
    }
    let (qc, normalized) = human_scores(&records);
    for w in &normalized.warnings {
        log::warn!("{w}");
    }
    let table = normalized.to_score_table(&args.name);
    write_with(&args.out, |buf| Ok(table.write(&dataset, buf)?))?;

    let run = RunConfig {
        dataset: Some(args.dataset.clone()),
        annotations: Some(args.annotations.clone()),
        output: Some(args.out.clone()),
        scorer_name: Some(args.name.clone()),
        ..Default::default()
    };
    let mut manifest = Manifest::new("import-annotations", run, Some(dataset.content_hash()));
    manifest.input(&args.dataset)?;
    manifest.input(&args.annotations)?;
    manifest.output(&args.out)?;
    manifest.write_for(&args.out)?;

    let mut out = format!(
        "annotators retained: {}, removed: {}\n",
        qc.retained.len(),
        qc.removed.len()
    );
    for (annotator, reason) in &qc.removed {
        let _ = match reason {
            QcRemoval::FailedFillers { acceptable_mean, violation_mean } => writeln!(
                out,
                "  removed {annotator}: acceptable fillers {acceptable_mean:.2} <= violation fillers {violation_mean:.2}"
            ),
            QcRemoval::MissingFillerKind(kind) => writeln!(out, "  removed {annotator}: no {kind:?} filler ratings"),
        };
    }
    let _ = writeln!(out, "sentence scores: {} of {}", table.len(), dataset.len());
    Ok(out)
}

fn restrictions(arg: RestrictionArg) -> Vec<Restriction> {
    match arg {
        RestrictionArg::All => vec![Restriction::All],
        RestrictionArg::Nom => vec![Restriction::Doubled(Case::Nom)],
        RestrictionArg::Acc => vec![Restriction::Doubled(Case::Acc)],
        RestrictionArg::Dat => vec![Restriction::Doubled(Case::Dat)],
        RestrictionArg::Every => Restriction::EVERY.to_vec(),
    }
}

pub fn evaluate(args: &EvaluateArgs) -> Result<String> {
    let dataset = load_dataset(&args.dataset)?;
    let hash = dataset.content_hash();
    check_dataset(&args.scores, &hash, false)?;
    let scores = load_scores(&args.scores, &dataset)?;
    let mut aucs = Vec::new();
    for r in restrictions(args.restriction) {
        aucs.extend(evaluate_sets(&dataset, &scores, r)?);
    }
    write_with(&args.out, |buf| {
        Ok(write_set_aucs(&scores.scorer_name, &aucs, buf)?)
    })?;
    if let Some(roc) = &args.roc {
        write_with(roc, |buf| {
            let mut w = csv::Writer::from_writer(buf);
            w.write_record([
                "acceptable_id",
                "restriction",
                "threshold",
                "false_positive_rate",
                "true_positive_rate",
            ])?;
            for r in restrictions(args.restriction) {
                for (id, points) in set_roc_curves(&dataset, &scores, r)? {
                    for p in points {
                        w.write_record([
                            id.clone(),
                            r.key().to_string(),
                            p.threshold.to_string(),
                            p.false_positive_rate.to_string(),
                            p.true_positive_rate.to_string(),
                        ])?;
                    }
                }
            }
            w.flush()?;
            Ok(())
        })?;
    }

    let run = RunConfig {
        dataset: Some(args.dataset.clone()),
        scores: vec![args.scores.clone()],
        output: Some(args.out.clone()),
        scorer_name: Some(scores.scorer_name.clone()),
        restriction: Some(format!("{:?}", args.restriction).to_lowercase()),
        ..Default::default()
    };
    let mut manifest = Manifest::new("evaluate", run, Some(hash));
    manifest.input(&args.dataset)?;
    manifest.input(&args.scores)?;
    manifest.output(&args.out)?;
    if let Some(roc) = &args.roc {
        manifest.output(roc)?;
    }
    manifest.write_for(&args.out)?;

    let mean = |r: Restriction| {
        let v: Vec<f64> = aucs
            .iter()
            .filter(|a| a.restriction == r)
            .map(|a| a.auc)
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    let mut out = format!("{}: {} set AUCs\n", scores.scorer_name, aucs.len());
    for r in Restriction::EVERY {
        if let Some(m) = mean(r) {
            let _ = writeln!(out, "  {:<10} {:.4}", r.display_label(), m);
        }
    }
    Ok(out)
}

pub fn parse_ranking(spec: &str) -> Result<ConstraintRanking> {
    Ok(match spec {
        "appendix" => ConstraintRanking::appendix(),
        "main" => ConstraintRanking::main_text(),
        path => {
            let text =
                std::fs::read_to_string(path).with_context(|| format!("reading ranking {path}"))?;
            ConstraintRanking::from_json(&text)?
        }
    })
}

fn slug(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Everything `report` renders, keyed by output file name.
pub fn render_report(
    scorers: &[(String, Vec<SetAuc>)],
    ranking: &ConstraintRanking,
) -> Result<BTreeMap<String, String>> {
    let mut files = BTreeMap::new();
    let mut summary = String::from("# Evaluation report\n");
    let mut by_case = Vec::new();
    let mut by_role = Vec::new();
    let mut by_restriction = Vec::new();
    for (name, aucs) in scorers {
        let full: Vec<SetAuc> = aucs
            .iter()
            .filter(|a| a.restriction == Restriction::All)
            .cloned()
            .collect();
        if !full.is_empty() {
            let grid = aggregate(&full, ranking, GroupBy::CaseOrderByRole)?;
            let grid_md = grid.to_markdown();
            let _ = write!(
                summary,
                "\n## {name}: case order by role assignment (1-6 sets)\n\n{grid_md}"
            );
            if grid.row_labels.len() == 6 && grid.col_labels.len() == 6 {
                let report = constraint_check(&grid)?;
                let _ = write!(summary, "\n```\n{report}```\n");
                files.insert(
                    format!("{}.constraints.txt", slug(name)),
                    report.to_string(),
                );
            }
            files.insert(format!("{}.grid.md", slug(name)), grid_md);
            files.insert(format!("{}.grid.csv", slug(name)), grid.to_csv()?);
            by_case.push((name.clone(), aggregate(&full, ranking, GroupBy::CaseOrder)?));
            by_role.push((name.clone(), aggregate(&full, ranking, GroupBy::Role)?));
        }
        by_restriction.push((
            name.clone(),
            aggregate(aucs, ranking, GroupBy::Restriction)?,
        ));
    }
    for (stem, title, header, tables, avg) in [
        (
            "restrictions",
            "Mean AUC by minimal variation set",
            "Minimal variation sets",
            &by_restriction,
            false,
        ),
        (
            "case_orders",
            "Mean AUC by case order (1-6 sets)",
            "Case order",
            &by_case,
            true,
        ),
        (
            "roles",
            "Mean AUC by role assignment (1-6 sets)",
            "Role assignment",
            &by_role,
            true,
        ),
    ] {
        if tables.is_empty() {
            continue;
        }
        let table = ComparisonTable::from_tables(header, tables, avg);
        let md = table.to_markdown();
        let _ = write!(summary, "\n## {title}\n\n{md}");
        files.insert(format!("{stem}.md"), md);
        files.insert(format!("{stem}.csv"), table.to_csv()?);
    }
    files.insert("report.md".into(), summary);
    Ok(files)
}

pub fn report(args: &ReportArgs) -> Result<String> {
    let ranking = parse_ranking(&args.ranking)?;
    let expected = match &args.dataset {
        Some(p) => Some(load_dataset(p)?.content_hash()),
        None => None,
    };
    let mut hashes: BTreeMap<String, PathBuf> = BTreeMap::new();
    let mut scorers = Vec::new();
    for path in &args.aucs {
        let manifest = crate::manifest::read_manifest(path)?.with_context(|| {
            format!(
                "{} has no manifest; produce it with `kasus evaluate`",
                path.display()
            )
        })?;
        let hash = manifest
            .dataset_hash
            .with_context(|| format!("manifest of {} lacks a dataset hash", path.display()))?;
        if let Some(e) = &expected {
            check_dataset(path, e, true)?;
        }
        hashes.entry(hash).or_insert_with(|| path.clone());
        let (name, aucs) = load_aucs(path)?;
        ensure!(
            !aucs.is_empty(),
            "{} contains no per-set AUCs",
            path.display()
        );
        ensure!(
            !scorers
                .iter()
                .any(|(n, _): &(String, Vec<SetAuc>)| *n == name),
            "scorer {name:?} appears twice"
        );
        scorers.push((name, aucs));
    }
    if hashes.len() > 1 {
        let listing: Vec<String> = hashes
            .iter()
            .map(|(h, p)| format!("{} ({})", p.display(), &h[..12]))
            .collect();
        bail!(
            "per-set AUC files come from different dataset versions: {}",
            listing.join(", ")
        );
    }

    let files = render_report(&scorers, &ranking)?;
    for (name, content) in &files {
        write_atomic(&args.out_dir.join(name), content.as_bytes())?;
    }
    let run = RunConfig {
        dataset: args.dataset.clone(),
        aucs: args.aucs.clone(),
        output: Some(args.out_dir.clone()),
        ranking: Some(args.ranking.clone()),
        ..Default::default()
    };
    let report_path = args.out_dir.join("report.md");
    let mut manifest = Manifest::new("report", run, hashes.into_keys().next());
    for p in &args.aucs {
        manifest.input(p)?;
    }
    for name in files.keys() {
        manifest.output(&args.out_dir.join(name))?;
    }
    manifest.write_for(&report_path)?;
    Ok(files["report.md"].clone())
}

pub fn correlate(args: &CorrelateArgs) -> Result<String> {
    let mut rows = Vec::new();
    match args.mode {
        CorrelationMode::Sets => {
            let (ref_name, reference) = load_aucs(&args.reference)?;
            let reference: Vec<SetAuc> = reference
                .into_iter()
                .filter(|a| a.restriction == Restriction::All)
                .collect();
            for path in &args.with {
                let (name, aucs) = load_aucs(path)?;
                let aucs: Vec<SetAuc> = aucs
                    .into_iter()
                    .filter(|a| a.restriction == Restriction::All)
                    .collect();
                let c = correlate_set_aucs(&reference, &aucs)
                    .with_context(|| format!("correlating {ref_name} with {name}"))?;
                rows.push((format!("{ref_name} - {name}"), c));
            }
        }
        CorrelationMode::Sentences => {
            let dataset = load_dataset(
                args.dataset
                    .as_deref()
                    .context("--dataset is required in sentence mode")?,
            )?;
            let reference = load_scores(&args.reference, &dataset)?;
            for path in &args.with {
                let other = load_scores(path, &dataset)?;
                let c = correlate_scores(&reference, &other)?;
                rows.push((
                    format!("{} - {}", reference.scorer_name, other.scorer_name),
                    c,
                ));
            }
        }
    }
    let column = match args.mode {
        CorrelationMode::Sets => "(1-6) minimal variation sets",
        CorrelationMode::Sentences => "sentence scores",
    };
    let mut md = format!("| Pearson correlation | {column} | n |\n| --- | --- | --- |\n");
    let mut csv_out = "pair,r,n,unmatched\n".to_string();
    for (pair, c) in &rows {
        let _ = writeln!(md, "| {pair} | {:.2} | {} |", c.r, c.n);
        let _ = writeln!(csv_out, "{pair},{},{},{}", c.r, c.n, c.unmatched);
        if c.unmatched > 0 {
            log::warn!(
                "{pair}: {} entries present on only one side were ignored",
                c.unmatched
            );
        }
    }
    if let Some(out) = &args.out {
        write_atomic(out, csv_out.as_bytes())?;
        let run = RunConfig {
            aucs: std::iter::once(args.reference.clone())
                .chain(args.with.iter().cloned())
                .collect(),
            dataset: args.dataset.clone(),
            output: Some(out.clone()),
            correlation_mode: Some(format!("{:?}", args.mode).to_lowercase()),
            ..Default::default()
        };
        let mut manifest = Manifest::new("correlate", run, None);
        manifest.input(&args.reference)?;
        for p in &args.with {
            manifest.input(p)?;
        }
        manifest.output(out)?;
        manifest.write_for(out)?;
    }
    Ok(md)
}

pub fn serve(args: &ServeArgs) -> Result<()> {
    let dataset = load_dataset(&args.dataset)?;
    let fillers = load_fillers(open(&args.fillers)?)?;
    let pool = ItemPool::new(&dataset, fillers)?;
    let config = ServiceConfig {
        assignment: AssignmentConfig {
            target_annotations: args.target_annotations,
            filler_every: args.filler_every,
            warmup_items: args.warmup_items,
            ..Default::default()
        },
        require_eligibility: args.require_eligibility,
        base_seed: args.seed,
    };
    let service = Arc::new(AnnotationService::open(pool, config, &args.log)?);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(args.addr).await?;
        log::info!("serving on http://{}", listener.local_addr()?);
        kasus_annotate::http::serve(listener, service).await?;
        Ok(())
    })
}

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use molvae_chem::props::ghose_pass;
use molvae_chem::{compute_properties, parse_smiles, ConditionVector, PropertyTables};
use molvae_core::eval::{beta_table, evaluate, EvalOptions, EvalReport, NearestIndex, ReportMetadata};
use molvae_core::nn::ModelParams;
use molvae_core::pipeline::checkpoint::loss_csv;
use molvae_core::pipeline::{
    ingest, read_generation, sample as draw, split, subsample, write_generation, Checkpoint, Dataset, DatasetRecord,
    IngestOptions, PipelineError, Trainer, TrainingConfig,
};
use serde_json::json;

use crate::manifest::{sha256_hex, ManifestBuilder};
use crate::{
    CliError, EvalArgs, ModelArgs, PreprocessArgs, PropsArgs, SampleArgs, SweepArgs, TrainArgs, EXIT_EMPTY, EXIT_IO,
    EXIT_MISMATCH,
};

const CACHE_VERIFY: usize = 100;

pub fn tables() -> Result<&'static PropertyTables, CliError> {
    PropertyTables::shared().map_err(|e| CliError::new(EXIT_IO, format!("property tables: {e}")))
}

fn io_at(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::new(EXIT_IO, format!("{}: {e}", path.display()))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(io_at(path))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(io_at(path))
}

pub fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    let f = File::open(path).map_err(io_at(path))?;
    Ok(Dataset::read(BufReader::new(f), tables()?, CACHE_VERIFY)?)
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint, CliError> {
    let f = File::open(path).map_err(io_at(path))?;
    Ok(Checkpoint::read(BufReader::new(f))?)
}

pub fn parse_condition(text: &str) -> Result<ConditionVector, CliError> {
    ConditionVector::parse(text).map_err(|e| CliError::new(EXIT_MISMATCH, format!("condition `{text}`: {e}")))
}

/// `none` or a comma list of `clogp, cmr, qed, sas` (or `c1`..`c4`).
pub fn parse_condition_mask(text: &str) -> Result<[bool; 4], CliError> {
    let mut mask = [false; 4];
    let text = text.trim();
    if text.is_empty() || text == "none" {
        return Ok(mask);
    }
    for part in text.split(',') {
        let slot = match part.trim() {
            "clogp" | "c1" => 0,
            "cmr" | "c2" => 1,
            "qed" | "c3" => 2,
            "sas" | "c4" => 3,
            other => return Err(CliError::new(EXIT_MISMATCH, format!("unknown condition `{other}`"))),
        };
        mask[slot] = true;
    }
    Ok(mask)
}

pub fn preprocess(a: &PreprocessArgs) -> Result<(), CliError> {
    let m = ManifestBuilder::start("preprocess");
    if a.max_atoms == 0 || a.max_atoms > 16 {
        return Err(CliError::new(EXIT_MISMATCH, "--max-atoms must be between 1 and 16"));
    }
    let tables = tables()?;
    let input = File::open(&a.input).map_err(io_at(&a.input))?;
    let opts = IngestOptions {
        max_atoms: a.max_atoms,
        reject_literal_minus: a.reject_literal_minus,
    };
    let result = ingest(BufReader::new(input), &opts, tables).map_err(io_at(&a.input))?;
    create_dir(&a.out)?;
    let rejections = a.out.join("rejections.tsv");
    let mut w = BufWriter::new(File::create(&rejections).map_err(io_at(&rejections))?);
    molvae_core::pipeline::ingest::write_rejections(&mut w, &result.rejections).map_err(io_at(&rejections))?;
    w.flush().map_err(io_at(&rejections))?;

    let mut counts = std::collections::BTreeMap::new();
    for r in &result.rejections {
        *counts.entry(r.reason.as_str()).or_insert(0usize) += 1;
    }
    let accepted = result.accepted.len();
    println!("accepted {accepted}, rejected {}", result.rejections.len());
    for (reason, n) in &counts {
        println!("  {reason}: {n}");
    }
    if accepted == 0 {
        return Err(CliError::new(EXIT_EMPTY, "no molecules survived ingestion"));
    }
    let kept = if a.subsample > 0 {
        subsample(result.accepted, a.subsample, a.seed)
    } else {
        result.accepted
    };
    let records: Vec<DatasetRecord> = kept.into_iter().map(Into::into).collect();
    let (train, test) = split(records, a.seed);
    let source = a
        .input
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ds = Dataset::new(&source, a.seed, train, test);
    let bytes = ds.to_bytes();
    let cache = a.out.join("dataset.bin");
    write_file(&cache, &bytes)?;
    let hash = sha256_hex(&bytes);
    println!("train {}, test {}; cache {} sha256 {hash}", ds.train.len(), ds.test.len(), cache.display());

    let manifest = a.out.join("manifest.json");
    m.finish(
        json!({
            "max_atoms": a.max_atoms,
            "subsample": a.subsample,
            "reject_literal_minus": a.reject_literal_minus,
            "accepted": accepted,
            "rejected": counts,
            "train": ds.train.len(),
            "test": ds.test.len(),
            "cache_sha256": hash,
        }),
        vec![a.seed],
        &[&a.input],
        &[&cache, &rejections],
    )
    .write(&manifest)
    .map_err(io_at(&manifest))?;
    Ok(())
}

pub fn training_config(m: &ModelArgs, beta: f64, objective: Option<&str>) -> Result<TrainingConfig, CliError> {
    let mask = parse_condition_mask(&m.conditions)?;
    let mut cfg = TrainingConfig {
        epochs: m.epochs,
        batch_size: m.batch,
        optimizer: m.optimizer.clone(),
        learning_rate: m.lr,
        hyper_lr: m.hyper_lr,
        seed: m.seed,
        encoder_hidden: m.encoder_hidden.clone(),
        latent_dim: m.latent,
        decoder_hidden: m.decoder_hidden.clone(),
        checkpoint_every: m.checkpoint_every,
        ..TrainingConfig::default()
    }
    .with_objective(beta, mask);
    if let Some(o) = objective {
        cfg.objective = o.to_string();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs epochs until the trainer's target, writing checkpoints and the loss
/// curve into `out`. On divergence the curve so far is still written.
pub fn run_training(trainer: &mut Trainer, data: &[DatasetRecord], out: &Path, quiet: bool) -> Result<Vec<PathBuf>, CliError> {
    create_dir(out)?;
    let curve = out.join("loss.csv");
    let mut outputs = vec![curve.clone()];
    while !trainer.finished() {
        match trainer.run_epoch(data) {
            Ok(l) => {
                if !quiet {
                    println!(
                        "epoch {} recon {:.4} kl {:.4} total {:.4} lr {:.3e}",
                        l.epoch,
                        l.reconstruction,
                        l.kl,
                        l.total,
                        trainer.learning_rate()
                    );
                }
                let every = trainer.config.checkpoint_every;
                if every > 0 && l.epoch % every == 0 && !trainer.finished() {
                    let p = out.join(format!("checkpoint-epoch{:04}.bin", l.epoch));
                    write_file(&p, &trainer.checkpoint().to_bytes())?;
                    outputs.push(p);
                }
            }
            Err(e) => {
                write_file(&curve, loss_csv(&trainer.history).as_bytes())?;
                return Err(e.into());
            }
        }
    }
    write_file(&curve, loss_csv(&trainer.history).as_bytes())?;
    let ck = out.join("checkpoint.bin");
    write_file(&ck, &trainer.checkpoint().to_bytes())?;
    outputs.push(ck);
    Ok(outputs)
}

pub fn train(a: &TrainArgs) -> Result<(), CliError> {
    let m = ManifestBuilder::start("train");
    let ds = read_dataset(&a.cache)?;
    if ds.train.is_empty() {
        return Err(CliError::new(EXIT_EMPTY, "training split is empty"));
    }
    let mut trainer = match &a.resume {
        Some(path) => {
            let mut ck = read_checkpoint(path)?;
            ck.config.epochs = a.model.epochs;
            Trainer::from_checkpoint(&ck)?
        }
        None => Trainer::new(training_config(&a.model, a.beta, a.objective.as_deref())?)?,
    };
    let outputs = run_training(&mut trainer, &ds.train, &a.out, a.quiet)?;
    let manifest = a.out.join("manifest.json");
    let mut inputs: Vec<&Path> = vec![&a.cache];
    if let Some(r) = &a.resume {
        inputs.push(r);
    }
    let outs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    m.finish(
        serde_json::to_value(&trainer.config).expect("config serializes"),
        vec![trainer.config.seed],
        &inputs,
        &outs,
    )
    .write(&manifest)
    .map_err(io_at(&manifest))?;
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn sample_to_file(
    ck: &Checkpoint,
    condition: &ConditionVector,
    n: usize,
    seed: u64,
    allow_offgrid: bool,
    out: &Path,
) -> Result<molvae_core::pipeline::GenerationSet, CliError> {
    let params = ModelParams::from_values(ck.model.clone(), ck.params.clone()).map_err(PipelineError::from)?;
    let set = draw(&params, ck.config.conditions, condition, n, seed, allow_offgrid, tables()?)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    let mut w = BufWriter::new(File::create(out).map_err(io_at(out))?);
    write_generation(&mut w, &set).map_err(io_at(out))?;
    w.flush().map_err(io_at(out))?;
    Ok(set)
}

pub fn sample(a: &SampleArgs) -> Result<(), CliError> {
    let m = ManifestBuilder::start("sample");
    let ck = read_checkpoint(&a.checkpoint)?;
    let condition = parse_condition(&a.condition)?;
    let set = sample_to_file(&ck, &condition, a.n, a.seed, a.allow_offgrid, &a.out)?;
    let valid = set.attempts.iter().filter(|g| g.valid()).count();
    println!("{} attempts, {valid} valid", set.attempts.len());
    let manifest = manifest_path(&a.out);
    m.finish(
        json!({ "condition": a.condition, "n": a.n, "allow_offgrid": a.allow_offgrid }),
        vec![a.seed],
        &[&a.checkpoint],
        &[&a.out],
    )
    .write(&manifest)
    .map_err(io_at(&manifest))?;
    Ok(())
}

pub fn file_id(path: &Path) -> Result<String, CliError> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(io_at(path))?;
    Ok(format!("{} sha256:{}", path.display(), &sha256_hex(&bytes)[..16]))
}

pub fn evaluate_files(
    generation: &Path,
    ds: &Dataset,
    condition: Option<&str>,
    threshold: Option<f64>,
    exemplars: usize,
    metadata: ReportMetadata,
) -> Result<EvalReport, CliError> {
    let f = File::open(generation).map_err(io_at(generation))?;
    let mut set = read_generation(BufReader::new(f))?;
    if let Some(c) = condition {
        set.condition = parse_condition(c)?;
    }
    if set.attempts.is_empty() {
        return Err(CliError::new(EXIT_EMPTY, "generation file has no attempts"));
    }
    let training: HashSet<String> = ds.train.iter().map(|r| r.canonical_smiles.clone()).collect();
    let index = NearestIndex::new(ds.all().map(|r| (r.canonical_smiles.as_str(), r.properties)))
        .map_err(|e| CliError::new(EXIT_IO, e.to_string()))?;
    let opts = EvalOptions {
        threshold,
        exemplars,
        metadata,
    };
    evaluate(&set, &training, &index, &opts).map_err(|e| CliError::new(EXIT_IO, e.to_string()))
}

fn write_report(report: &EvalReport, out: &Path) -> Result<(PathBuf, PathBuf), CliError> {
    create_dir(out)?;
    let json_path = out.join("report.json");
    let md_path = out.join("report.md");
    let text = report.to_json().map_err(|e| CliError::new(EXIT_IO, e.to_string()))?;
    write_file(&json_path, (text + "\n").as_bytes())?;
    let md = report.to_markdown().map_err(|e| CliError::new(EXIT_IO, e.to_string()))?;
    write_file(&md_path, md.as_bytes())?;
    Ok((json_path, md_path))
}

pub fn eval(a: &EvalArgs) -> Result<(), CliError> {
    let m = ManifestBuilder::start("eval");
    let ds = read_dataset(&a.dataset)?;
    let metadata = ReportMetadata {
        checkpoint: a.checkpoint.as_deref().map(file_id).transpose()?.unwrap_or_default(),
        generation: file_id(&a.generation)?,
        dataset: file_id(&a.dataset)?,
        seed: None,
    };
    let report = evaluate_files(&a.generation, &ds, a.condition.as_deref(), a.threshold, a.exemplars, metadata)?;
    let (j, md) = write_report(&report, &a.out)?;
    print!("{}", report.to_markdown().map_err(|e| CliError::new(EXIT_IO, e.to_string()))?);
    let manifest = a.out.join("manifest.json");
    m.finish(
        json!({ "condition": a.condition, "threshold": a.threshold, "exemplars": a.exemplars }),
        vec![],
        &[&a.generation, &a.dataset],
        &[&j, &md],
    )
    .write(&manifest)
    .map_err(io_at(&manifest))?;
    Ok(())
}

pub fn props(a: &PropsArgs) -> Result<(), CliError> {
    let tables = tables()?;
    let inputs: Vec<String> = if a.smiles.is_empty() {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text)?;
        text.lines()
            .filter_map(molvae_core::pipeline::ingest::smiles_field)
            .map(str::to_string)
            .collect()
    } else {
        a.smiles.clone()
    };
    let mut rows = Vec::new();
    let mut out = io::stdout().lock();
    if !a.json {
        writeln!(out, "smiles\tclogp\tcmr\tqed\tsas\tghose_clogp\tghose_cmr")?;
    }
    for s in &inputs {
        let result = parse_smiles(s).and_then(|m| compute_properties(&m, tables));
        match result {
            Ok(p) => {
                let (gc, gm) = ghose_pass(&p);
                if a.json {
                    rows.push(json!({
                        "smiles": s, "clogp": p.clogp, "cmr": p.cmr, "qed": p.qed, "sas": p.sas,
                        "ghose_clogp": gc, "ghose_cmr": gm,
                    }));
                } else {
                    writeln!(
                        out,
                        "{s}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{gc}\t{gm}",
                        p.clogp, p.cmr, p.qed, p.sas
                    )?;
                }
            }
            Err(e) => {
                if a.json {
                    rows.push(json!({ "smiles": s, "error": e.to_string() }));
                } else {
                    writeln!(out, "{s}\tERROR\t{e}")?;
                }
            }
        }
    }
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&rows).expect("rows serialize"))?;
    }
    Ok(())
}

pub fn sweep(a: &SweepArgs) -> Result<(), CliError> {
    let m = ManifestBuilder::start("sweep");
    let ds = read_dataset(&a.cache)?;
    if ds.train.is_empty() {
        return Err(CliError::new(EXIT_EMPTY, "training split is empty"));
    }
    let condition = parse_condition(&a.condition)?;
    let mut reports = Vec::new();
    let mut outputs = Vec::new();
    for &beta in &a.betas {
        let dir = a.out.join(format!("beta-{beta}"));
        let cfg = training_config(&a.model, beta, None)?;
        molvae_core::pipeline::sample::check_condition(cfg.conditions, &condition, false)?;
        println!("β = {beta}: training {} epochs", cfg.epochs);
        let mut trainer = Trainer::new(cfg)?;
        run_training(&mut trainer, &ds.train, &dir, true)?;
        let gen = dir.join("generated.tsv");
        sample_to_file(&trainer.checkpoint(), &condition, a.n, a.sample_seed, false, &gen)?;
        let metadata = ReportMetadata {
            checkpoint: file_id(&dir.join("checkpoint.bin"))?,
            generation: file_id(&gen)?,
            dataset: file_id(&a.cache)?,
            seed: Some(a.sample_seed),
        };
        let report = evaluate_files(&gen, &ds, None, None, 5, metadata)?;
        write_report(&report, &dir)?;
        println!(
            "β = {beta}: validity {:.2}, novelty {:.2}, uniqueness {:.2}",
            report.validity, report.novelty, report.uniqueness
        );
        outputs.push(dir);
        reports.push((beta, report));
    }
    let rows: Vec<(f64, &EvalReport)> = reports.iter().map(|(b, r)| (*b, r)).collect();
    let table = a.out.join("uniqueness_vs_beta.md");
    write_file(&table, beta_table(&rows).as_bytes())?;
    let mut tsv = String::from("beta\tvalidity\tnovelty\tuniqueness\n");
    for (b, r) in &rows {
        tsv.push_str(&format!("{b}\t{:.2}\t{:.2}\t{:.2}\n", r.validity, r.novelty, r.uniqueness));
    }
    let tsv_path = a.out.join("uniqueness_vs_beta.tsv");
    write_file(&tsv_path, tsv.as_bytes())?;
    print!("{}", beta_table(&rows));
    let manifest = a.out.join("manifest.json");
    let mut outs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    outs.push(&table);
    outs.push(&tsv_path);
    m.finish(
        json!({ "betas": a.betas, "condition": a.condition, "n": a.n, "model": training_config(&a.model, 1.0, None)? }),
        vec![a.model.seed, a.sample_seed],
        &[&a.cache],
        &outs,
    )
    .write(&manifest)
    .map_err(io_at(&manifest))?;
    Ok(())
}

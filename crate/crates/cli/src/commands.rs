use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;
use std::time::Instant;

use thiserror::Error;
use uspm::incremental::{replay, Algorithm, IncrementReport, LwesMode};
use uspm::io::{
    generate, parse_spmf, parse_usf, parse_weights, synthetic, write_patterns, write_usf,
    write_weights, GenConfig, ListingFormat,
};
use uspm::{
    completeness, fuws, fuws_with_thresholds, oracle_mine, Bound, ClassifiedPattern, MiningParams,
    OracleParams, PatternClass, Thresholds, UncertainDatabase, WeightTable,
};

use crate::{CompareArgs, GenArgs, IncmineArgs, MineArgs, OracleArgs, OutputArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Params(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Params(_) => 2,
        }
    }
}

impl From<uspm::Error> for CliError {
    fn from(err: uspm::Error) -> Self {
        if err.is_input_error() {
            CliError::Input(err.to_string())
        } else {
            CliError::Params(err.to_string())
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn input_error(path: &Path, err: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {err}", path.display()))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| input_error(path, e))
}

fn load_db(path: &Path) -> Result<UncertainDatabase> {
    parse_usf(open(path)?).map_err(|e| input_error(path, e))
}

fn load_weights(path: &Path) -> Result<WeightTable> {
    parse_weights(open(path)?).map_err(|e| input_error(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| input_error(path, e))
}

fn emit(output: &OutputArgs, bytes: &[u8]) -> Result<()> {
    match &output.out {
        Some(path) => write_file(path, bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Input(format!("standard output: {e}")))
        }
    }
}

fn format_of(output: &OutputArgs) -> Result<ListingFormat> {
    Ok(output.format.parse()?)
}

fn listing(patterns: &[ClassifiedPattern], format: ListingFormat, buf: &mut Vec<u8>) -> Result<()> {
    write_patterns(patterns, format, buf)?;
    Ok(())
}

pub fn mine(args: &MineArgs) -> Result<()> {
    let params = MiningParams::new(args.min_sup, args.mu, args.wgt_fct)?;
    let bound: Bound = args.bound.parse()?;
    let format = format_of(&args.output)?;
    let db = load_db(&args.db)?;
    let weights = load_weights(&args.weights)?;

    let started = Instant::now();
    let result = match args.override_minwes {
        Some(min_wes) => {
            let semi = args.override_minwes_semi.unwrap_or(min_wes * args.mu);
            if !(min_wes > 0.0 && semi > 0.0 && semi <= min_wes) {
                return Err(CliError::Params(format!(
                    "threshold overrides must satisfy 0 < semi-frequent ({semi}) <= frequent ({min_wes})"
                )));
            }
            let wam = uspm::preprocess::wam(&uspm::preprocess::frequencies(&db), &weights)?;
            let thresholds = Thresholds {
                wam,
                min_wes,
                min_wes_semi: semi,
                lwes: None,
            };
            fuws_with_thresholds(&db, &weights, thresholds, bound)?
        }
        None if args.override_minwes_semi.is_some() => {
            return Err(CliError::Params(
                "--override-minwes-semi requires --override-minwes".into(),
            ))
        }
        None => fuws(&db, &weights, &params, bound)?,
    };
    let elapsed = started.elapsed();

    let mut buf = Vec::new();
    let patterns: Vec<_> = result.fs.iter().chain(&result.sfs).cloned().collect();
    listing(&patterns, format, &mut buf)?;
    emit(&args.output, &buf)?;
    eprintln!(
        "minwes={:.6} minwes_semi={:.6} fs={} sfs={} candidates={} nodes={} time_ms={:.3}",
        result.thresholds.min_wes,
        result.thresholds.min_wes_semi,
        result.fs.len(),
        result.sfs.len(),
        result.candidate_count,
        result.stats.candidate_nodes,
        elapsed.as_secs_f64() * 1e3
    );
    Ok(())
}

fn report_header(report: &IncrementReport, buf: &mut Vec<u8>) {
    let t = &report.thresholds;
    let opt = |v: Option<f64>| v.map_or("NA".to_string(), |v| format!("{v:.6}"));
    // Writes into a Vec cannot fail.
    let _ = writeln!(
        buf,
        "# report {} db_size={} wam={:.6} wam_delta={} minwes={:.6} minwes_semi={:.6} lwes={}",
        report.index,
        report.db_size,
        t.wam,
        opt(report.wam_delta),
        t.min_wes,
        t.min_wes_semi,
        opt(t.lwes)
    );
    let _ = writeln!(
        buf,
        "# fs={} sfs={} pfs={} lfs={} promotions={} demotions={} deletions={} insertions={}",
        report.fs.len(),
        report.sfs.len(),
        report.pfs.len(),
        report.lfs.len(),
        report.promotions,
        report.demotions,
        report.deletions,
        report.insertions
    );
}

pub fn incmine(args: &IncmineArgs) -> Result<()> {
    let params = MiningParams::new(args.min_sup, args.mu, args.wgt_fct)?.with_gamma(args.gamma)?;
    let algorithm: Algorithm = args.algo.parse()?;
    let lwes_mode: LwesMode = args.lwes_wam.parse()?;
    let format = format_of(&args.output)?;
    let initial = load_db(&args.initial)?;
    let deltas = args
        .deltas
        .iter()
        .map(|p| load_db(p))
        .collect::<Result<Vec<_>>>()?;
    let weights = load_weights(&args.weights)?;

    let reports = replay(&initial, &deltas, &weights, &params, algorithm, lwes_mode)?;
    let shown: Vec<&IncrementReport> = if args.report_each && reports.len() > 1 {
        reports[1..].iter().collect()
    } else {
        vec![reports.last().expect("replay reports the initial state")]
    };

    let mut buf = Vec::new();
    for report in &shown {
        report_header(report, &mut buf);
        listing(&report.listing(), format, &mut buf)?;
    }
    emit(&args.output, &buf)?;

    if args.audit {
        let mut prefixes = vec![initial.clone()];
        for delta in &deltas {
            let mut next = prefixes.last().unwrap().clone();
            next.extend(delta);
            prefixes.push(next);
        }
        for report in shown {
            let db = &prefixes[report.index];
            let longest = db.iter().map(|s| s.items().count()).max().unwrap_or(1);
            let oracle_params = OracleParams::new(report.thresholds.min_wes).with_max_len(longest);
            let truth: BTreeSet<_> = oracle_mine(db, &weights, &oracle_params)?
                .into_iter()
                .map(|(p, _)| p)
                .collect();
            let found: BTreeSet<_> = report.fs.iter().map(|c| c.pattern.clone()).collect();
            eprintln!(
                "audit report={} baseline_fs={} reported_fs={} completeness={:.6}",
                report.index,
                truth.len(),
                found.len(),
                completeness(&found, &truth)
            );
        }
    }
    Ok(())
}

pub fn gen(args: &GenArgs) -> Result<()> {
    let precise = match (&args.spmf, &args.synthetic) {
        (Some(path), _) => parse_spmf(open(path)?).map_err(|e| input_error(path, e))?,
        (None, Some([count, max_events, alphabet])) => {
            synthetic(*count, *max_events, *alphabet, args.seed)?
        }
        (None, None) => {
            return Err(CliError::Params(
                "one of --spmf or --synthetic is required".into(),
            ))
        }
    };
    let cfg = GenConfig {
        prob_mean: args.prob_mean,
        prob_sd: args.prob_sd,
        wgt_mean: args.wgt_mean,
        wgt_sd: args.wgt_sd,
        seed: args.seed,
        ..GenConfig::default()
    };
    let (db, weights) = generate(&precise, &cfg)?;
    let mut db_buf = Vec::new();
    write_usf(&db, &mut db_buf)?;
    let mut w_buf = Vec::new();
    write_weights(&weights, &mut w_buf)?;
    write_file(&args.out_db, &db_buf)?;
    write_file(&args.out_weights, &w_buf)?;
    eprintln!("sequences={} items={}", db.len(), weights.len());
    Ok(())
}

pub fn compare_bounds(args: &CompareArgs) -> Result<()> {
    let db = load_db(&args.db)?;
    let weights = load_weights(&args.weights)?;
    let mut buf = Vec::new();
    let _ = writeln!(
        buf,
        "min_sup\tcandidates_cap\tcandidates_top\tfalse_positive_rate_cap\tfalse_positive_rate_top\ttime_cap_ms\ttime_top_ms"
    );
    for &min_sup in &args.min_sup {
        let params = MiningParams::new(min_sup, args.mu, args.wgt_fct)?;
        let mut row = Vec::new();
        for bound in [Bound::Cap, Bound::Top] {
            let started = Instant::now();
            let result = fuws(&db, &weights, &params, bound)?;
            let ms = started.elapsed().as_secs_f64() * 1e3;
            let kept = result.fs.len() + result.sfs.len();
            let fpr = if result.candidate_count == 0 {
                0.0
            } else {
                (result.candidate_count - kept) as f64 / result.candidate_count as f64
            };
            row.push((result.candidate_count, fpr, ms));
        }
        let time = |ms: f64| {
            if args.no_timing {
                "NA".to_string()
            } else {
                format!("{ms:.3}")
            }
        };
        let _ = writeln!(
            buf,
            "{min_sup}\t{}\t{}\t{:.6}\t{:.6}\t{}\t{}",
            row[0].0,
            row[1].0,
            row[0].1,
            row[1].1,
            time(row[0].2),
            time(row[1].2)
        );
    }
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(&buf)
        .map_err(|e| CliError::Input(format!("standard output: {e}")))
}

pub fn oracle(args: &OracleArgs) -> Result<()> {
    if !(args.threshold >= 0.0 && args.threshold.is_finite()) {
        return Err(CliError::Params(format!(
            "threshold {} must be >= 0",
            args.threshold
        )));
    }
    let format = format_of(&args.output)?;
    let db = load_db(&args.db)?;
    let weights = load_weights(&args.weights)?;
    let params = OracleParams::new(args.threshold).with_max_len(args.max_len);
    let found = oracle_mine(&db, &weights, &params)?;
    let patterns: Vec<_> = found
        .into_iter()
        .map(|(pattern, wes)| ClassifiedPattern {
            pattern,
            wes,
            class: PatternClass::Fs,
        })
        .collect();
    let mut buf = Vec::new();
    listing(&patterns, format, &mut buf)?;
    emit(&args.output, &buf)?;
    eprintln!("patterns={}", patterns.len());
    Ok(())
}

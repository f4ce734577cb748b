//! `lus` — lung-ultrasound texture classification pipeline.
//!
//! Exit codes: 0 success, 1 evaluation error, 2 input error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lus_cli::synth::SynthSpec;
use lus_cli::{
    cmd_extract, cmd_run, cmd_sweep, cmd_synth, resolve_extract_config, FileConfig,
};
use lus_core::eval::CvMode;
use lus_core::learn::PriorMode;

#[derive(Parser)]
#[command(
    name = "lus",
    about = "Lung-ultrasound image classification: DTCWT texture features, chi-square selection, LDA, LOO/LOSO cross-validation",
    version
)]
struct Cli {
    /// Optional key=value config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Default)]
struct ExtractFlags {
    /// Decomposition depth.
    #[arg(long)]
    levels: Option<usize>,
    /// Exclude the lowpass subimage from the feature set.
    #[arg(long)]
    no_lowpass: bool,
    /// Disable the statistical feature family.
    #[arg(long)]
    no_stat: bool,
    /// Disable the co-occurrence feature family.
    #[arg(long)]
    no_glcm: bool,
    /// Disable the run-length feature family.
    #[arg(long)]
    no_glrlm: bool,
    /// Disable the local-binary-pattern feature family.
    #[arg(long)]
    no_lbp: bool,
    /// Statistical entropy variant: histogram | pixelwise.
    #[arg(long)]
    entropy: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the dataset from a manifest and export the feature CSV.
    Extract {
        /// Dataset manifest CSV.
        manifest: PathBuf,
        /// Output feature CSV.
        out: PathBuf,
        #[command(flatten)]
        flags: ExtractFlags,
        /// Dump every magnitude subimage as PGM into this directory.
        #[arg(long)]
        dump_subimages: Option<PathBuf>,
    },
    /// Run one cross-validation experiment and write confusion reports.
    Run {
        /// Manifest CSV or previously exported feature CSV.
        input: PathBuf,
        /// Cross-validation mode: loo | loso.
        #[arg(long)]
        cv: Option<String>,
        /// Number of top-ranked image features.
        #[arg(long)]
        k: Option<usize>,
        /// Prior mode: equal | proportional.
        #[arg(long)]
        priors: Option<String>,
        /// Report base path (writes <out>.csv and <out>.txt).
        #[arg(long, default_value = "confusion")]
        out: PathBuf,
        #[command(flatten)]
        flags: ExtractFlags,
    },
    /// Sweep the selected-feature count and write the accuracy curve.
    Sweep {
        /// Manifest CSV or previously exported feature CSV.
        input: PathBuf,
        /// Largest feature count to try.
        #[arg(long)]
        k_max: Option<usize>,
        /// Cross-validation mode: loo | loso.
        #[arg(long)]
        cv: Option<String>,
        /// Prior mode: equal | proportional.
        #[arg(long)]
        priors: Option<String>,
        /// Output curve CSV.
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
        #[command(flatten)]
        flags: ExtractFlags,
    },
    /// Generate a synthetic dataset (images + manifest).
    Synth {
        /// Output directory.
        out_dir: PathBuf,
        #[arg(long)]
        subjects_per_class: Option<usize>,
        #[arg(long)]
        images_per_subject: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Background speckle amplitude in [0, 0.5].
        #[arg(long)]
        noise: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> lus_core::error::Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let extract_config = |flags: &ExtractFlags| {
        resolve_extract_config(
            &file,
            flags.levels,
            flags.no_lowpass,
            flags.no_stat,
            flags.no_glcm,
            flags.no_glrlm,
            flags.no_lbp,
            flags.entropy.clone(),
        )
    };
    let resolve_cv = |flag: &Option<String>| -> lus_core::error::Result<CvMode> {
        match flag.as_deref().or_else(|| file.get("cv")) {
            Some(raw) => raw.parse(),
            None => Ok(CvMode::Loo),
        }
    };
    let resolve_priors = |flag: &Option<String>| -> lus_core::error::Result<PriorMode> {
        match flag.as_deref().or_else(|| file.get("priors")) {
            Some(raw) => raw.parse(),
            None => Ok(PriorMode::Equal),
        }
    };

    match cli.command {
        Command::Extract {
            manifest,
            out,
            flags,
            dump_subimages,
        } => {
            let config = extract_config(&flags)?;
            let summary = cmd_extract(&manifest, &out, &config, dump_subimages.as_deref())?;
            println!("{summary}");
        }
        Command::Run {
            input,
            cv,
            k,
            priors,
            out,
            flags,
        } => {
            let config = extract_config(&flags)?;
            let cv = resolve_cv(&cv)?;
            let priors = resolve_priors(&priors)?;
            let k = match k.or(file.parse::<usize>("k")?) {
                Some(v) => v,
                None => 15,
            };
            let outcome = cmd_run(&input, cv, k, priors, &config, &out)?;
            print!("{}", outcome.report_text);
            println!(
                "cv={} k={k} priors={} accuracy={:.2}%",
                cv.as_str(),
                priors.as_str(),
                outcome.accuracy * 100.0
            );
            println!("reports: {} {}", outcome.csv_path.display(), outcome.txt_path.display());
        }
        Command::Sweep {
            input,
            k_max,
            cv,
            priors,
            out,
            flags,
        } => {
            let config = extract_config(&flags)?;
            let cv = resolve_cv(&cv)?;
            let priors = resolve_priors(&priors)?;
            let k_max = match k_max.or(file.parse::<usize>("k_max")?) {
                Some(v) => v,
                None => 15,
            };
            let outcome = cmd_sweep(&input, k_max, cv, priors, &config, &out)?;
            println!(
                "max accuracy {:.2}% at k={} ({} points -> {})",
                outcome.best_accuracy_percent,
                outcome.best_k,
                k_max,
                outcome.curve_path.display()
            );
        }
        Command::Synth {
            out_dir,
            subjects_per_class,
            images_per_subject,
            seed,
            noise,
        } => {
            let defaults = SynthSpec::default();
            let spec = SynthSpec {
                subjects_per_class: subjects_per_class
                    .or(file.parse::<usize>("subjects_per_class")?)
                    .unwrap_or(defaults.subjects_per_class),
                images_per_subject: images_per_subject
                    .or(file.parse::<usize>("images_per_subject")?)
                    .unwrap_or(defaults.images_per_subject),
                seed: seed.or(file.parse::<u64>("seed")?).unwrap_or(defaults.seed),
                noise_level: noise
                    .or(file.parse::<f64>("noise")?)
                    .unwrap_or(defaults.noise_level),
            };
            let manifest = cmd_synth(&spec, &out_dir)?;
            println!(
                "generated {} classes x {} subjects x {} images -> {}",
                lus_core::pipeline::ClassLabel::ALL.len(),
                spec.subjects_per_class,
                spec.images_per_subject,
                manifest.display()
            );
        }
    }
    Ok(())
}

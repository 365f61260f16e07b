use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use tracing_subscriber::EnvFilter;

use guiloc::eval::Alternative;
use guiloc::retrieval::Technique;
use guiloc::runner::{cmd_analyze, cmd_index, cmd_queries, cmd_run, ConfigSelection, DatasetManifest, RunOptions, RunReport};
use guiloc::Error;

#[derive(Parser)]
#[command(name = "guiloc", version, about = "GUI-augmented text-retrieval bug localization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlternativeArg {
    TwoSided,
    Greater,
    Less,
}

#[derive(Subcommand)]
enum Command {
    /// Build and persist one tf-idf index per app.
    Index {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate baselines and augmentation configurations.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        /// Comma-separated subset of rvsm, tfidf, embed.
        #[arg(long, default_value = "rvsm,tfidf")]
        tech: String,
        /// `all`, `none`, or comma-separated configuration strings such as `s4/fb:SC+GS/none`.
        #[arg(long, default_value = "all")]
        configs: String,
        /// Directory written by `index`; indices are rebuilt when absent.
        #[arg(long)]
        index_dir: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank movement, significance and overlap between two run reports.
    Analyze {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        aug: PathBuf,
        #[arg(long, value_enum, default_value = "two-sided")]
        alternative: AlternativeArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump every baseline and reformulated query as JSON lines `{key, text}`.
    Queries {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Exit code 1 for invalid input, 2 for failures while running.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Manifest(_) | Error::Config(_) | Error::Json { .. }) => 1,
        _ => 2,
    }
}

fn parse_techniques(spec: &str) -> Result<Vec<Technique>, Error> {
    let mut out: Vec<Technique> = spec
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_, _>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

fn write(path: &std::path::Path, contents: &str) -> anyhow::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Index { manifest, out } => {
            let manifest = DatasetManifest::load(&manifest)?;
            let summary = cmd_index(&manifest, &out)?;
            println!("wrote {} index file(s)", summary.written.len());
            for e in &summary.errors {
                eprintln!("error: {}: {}", e.bug_id, e.reason);
            }
        }
        Command::Run {
            manifest,
            tech,
            configs,
            index_dir,
            out,
        } => {
            let opts = RunOptions {
                techniques: parse_techniques(&tech)?,
                configs: ConfigSelection::parse(&configs)?,
                index_dir,
            };
            let manifest = DatasetManifest::load(&manifest)?;
            let report = cmd_run(&manifest, &opts)?;
            report.write(&out)?;
            for t in &report.techniques {
                let b = &t.baseline;
                let f = |k| b.hits_at(k).map_or(0.0, |h| h.fraction);
                println!(
                    "{:<6} baseline H@1 {:.2} H@5 {:.2} H@10 {:.2} ({} configurations)",
                    t.technique.as_str(),
                    f(1),
                    f(5),
                    f(10),
                    t.configs.len()
                );
                if let Some(best) = t.best_config() {
                    let h10 = best.hits_at(10).map_or(0.0, |h| h.fraction);
                    println!("       best {} H@10 {:.2}", best.config, h10);
                }
            }
            for e in &report.excluded {
                eprintln!("excluded {}: {}", e.bug_id, e.reason);
            }
        }
        Command::Analyze {
            base,
            aug,
            alternative,
            out,
        } => {
            let alternative = match alternative {
                AlternativeArg::TwoSided => Alternative::TwoSided,
                AlternativeArg::Greater => Alternative::Greater,
                AlternativeArg::Less => Alternative::Less,
            };
            let base = RunReport::load(&base)?;
            let aug = RunReport::load(&aug)?;
            let analysis = cmd_analyze(&base, &aug, alternative)?;
            write(&out.join("analysis.json"), &analysis.to_json())?;
            println!("analyzed {} pair(s)", analysis.pairs.len());
        }
        Command::Queries { manifest, out } => {
            let manifest = DatasetManifest::load(&manifest)?;
            let (queries, excluded) = cmd_queries(&manifest)?;
            let mut text = String::new();
            for q in &queries {
                text.push_str(&serde_json::to_string(q)?);
                text.push('\n');
            }
            write(&out, &text)?;
            for e in &excluded {
                eprintln!("excluded {}: {}", e.bug_id, e.reason);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

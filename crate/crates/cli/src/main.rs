//! `mgk`: command-line front end for the matchstick toolkit.
//!
//! Exit status is 0 on success, 1 on a clean negative result (a graph fails
//! verification, refinement does not converge, a rigidity expectation is not
//! met, a catalog has failures) and 2 on operational errors.

use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use matchstick::catalog::{build_catalog, embedded_catalog, read_corpus_dir, PipelineOptions};
use matchstick::congruence::{dedup, DEFAULT_CONGRUENCE_TOLERANCE};
use matchstick::ingest::{ingest_figure, normalize, IngestOptions};
use matchstick::mgf::{read_mgf, write_mgf, write_mgf_with_comments};
use matchstick::model::{connected_components, Graph, RegularityClass};
use matchstick::refine::{refine, RefineError, RefineOptions};
use matchstick::render::{render_svg, RenderOptions};
use matchstick::report::GraphRecord;
use matchstick::rigidity::{analyze_rigidity, Classification};
use matchstick::verify::{degree2_distance, verify_matchstick, VerificationPolicy};

type Result<T> = std::result::Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "mgk", version, about = "Matchstick graph ingestion, refinement and verification")]
struct Cli {
    /// Tolerance for the command: edge length (verify, catalog), residual
    /// target (refine), alignment (dedup), endpoint merge distance (parse).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Minimum clearance between non-incident features.
    #[arg(long, global = true, default_value_t = 1e-6)]
    delta: f64,
    /// Output file, or output directory for `parse`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Tikz,
    Mgf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Expect {
    Rigid,
    Flexible,
}

#[derive(Subcommand)]
enum Command {
    /// Split a figure or MGF file into one normalized MGF per component.
    Parse {
        input: PathBuf,
        /// Input format; guessed from the extension when omitted.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Check unit lengths, clearances, degrees and connectivity.
    Verify { input: PathBuf },
    /// Move vertices onto exact unit edge lengths.
    Refine {
        input: PathBuf,
        /// Where to write the refined graph [default: <stem>.refined.mgf].
        #[arg(long)]
        mgf: Option<PathBuf>,
    },
    /// Rank of the rigidity matrix and internal degrees of freedom.
    Rigidity {
        input: PathBuf,
        /// Exit 1 unless the classification matches.
        #[arg(long, value_enum)]
        expect: Option<Expect>,
        /// Write the graph with its non-trivial flex basis as MGF comments.
        #[arg(long)]
        flex_out: Option<PathBuf>,
    },
    /// Group graphs into congruence classes.
    Dedup {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Draw a graph as SVG.
    Render {
        input: PathBuf,
        /// Pixels per unit edge.
        #[arg(long, default_value_t = 40.0)]
        ppu: f64,
        /// Mark degree-2 vertices.
        #[arg(long)]
        label_degrees: bool,
    },
    /// Run the full pipeline over a corpus directory and compare counts with
    /// the published tables. Without a directory the built-in corpus is used.
    Catalog {
        #[arg(env = "MGK_CORPUS")]
        dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("mgk: {e}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()).into())
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()).into())
}

fn read_graph(path: &Path) -> Result<Graph> {
    read_mgf(&read(path)?).map_err(|e| format!("{}: {e}", path.display()).into())
}

/// Writes to `--out` when given, stdout otherwise.
fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "graph".into())
}

fn policy(cli: &Cli) -> Result<VerificationPolicy> {
    let defaults = VerificationPolicy::default();
    Ok(VerificationPolicy::new(
        cli.tol.unwrap_or(defaults.length_tolerance()),
        cli.delta,
        defaults.require_connected(),
    )?)
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Parse { input, format } => parse(cli, input, *format),
        Command::Verify { input } => {
            let g = read_graph(input)?;
            let report = verify_matchstick(&g, &policy(cli)?);
            let d2 = match report.regularity {
                RegularityClass::TwoFourRegular(2) => degree2_distance(&g).ok(),
                _ => None,
            };
            let record = GraphRecord::new(stem(input), &g)
                .with_verification(&report)
                .with_degree2_distance(d2);
            emit(cli, &to_json(&record)?)?;
            Ok(report.passed())
        }
        Command::Refine { input, mgf } => {
            let g = read_graph(input)?;
            let opts = RefineOptions {
                residual_target: cli.tol.unwrap_or(RefineOptions::default().residual_target),
                ..RefineOptions::default()
            };
            let (refined, trace) = match refine(&g, &opts) {
                Ok(done) => done,
                Err(RefineError::DidNotConverge { trace }) => {
                    let record = GraphRecord::new(stem(input), &g).with_refinement(&trace);
                    emit(cli, &to_json(&record)?)?;
                    return Ok(false);
                }
                Err(e) => return Err(e.into()),
            };
            let target = mgf
                .clone()
                .unwrap_or_else(|| input.with_file_name(format!("{}.refined.mgf", stem(input))));
            write(&target, &write_mgf(&refined))?;
            let record = GraphRecord::new(stem(input), &refined).with_refinement(&trace);
            emit(cli, &to_json(&record)?)?;
            Ok(true)
        }
        Command::Rigidity {
            input,
            expect,
            flex_out,
        } => {
            let g = read_graph(input)?;
            let report = analyze_rigidity(&g)?;
            if let Some(path) = flex_out {
                let comments: Vec<String> = report
                    .flex_basis
                    .iter()
                    .enumerate()
                    .map(|(k, v)| {
                        let coords: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                        format!("flex {k}: {}", coords.join(" "))
                    })
                    .collect();
                write(path, &write_mgf_with_comments(&g, &comments))?;
            }
            let record = GraphRecord::new(stem(input), &g).with_rigidity(&report);
            emit(cli, &to_json(&record)?)?;
            Ok(match expect {
                None => true,
                Some(Expect::Rigid) => report.classification == Classification::Rigid,
                Some(Expect::Flexible) => report.classification == Classification::Flexible,
            })
        }
        Command::Dedup { inputs } => {
            let graphs = inputs
                .iter()
                .map(|p| Ok((p.display().to_string(), read_graph(p)?)))
                .collect::<Result<Vec<_>>>()?;
            let items: Vec<(&str, &Graph)> = graphs.iter().map(|(id, g)| (id.as_str(), g)).collect();
            let classes = dedup(&items, cli.tol.unwrap_or(DEFAULT_CONGRUENCE_TOLERANCE))?;
            emit(cli, &to_json(&classes)?)?;
            Ok(true)
        }
        Command::Render {
            input,
            ppu,
            label_degrees,
        } => {
            let g = read_graph(input)?;
            let svg = render_svg(
                &g,
                &RenderOptions {
                    pixels_per_unit: *ppu,
                    label_degrees: *label_degrees,
                },
            )?;
            emit(cli, &svg)?;
            Ok(true)
        }
        Command::Catalog { dir } => {
            let opts = PipelineOptions {
                policy: policy(cli)?,
                ..PipelineOptions::default()
            };
            let catalog = match dir {
                Some(dir) => build_catalog(read_corpus_dir(dir)?, &opts)?,
                None => embedded_catalog(&opts)?,
            };
            let text = if cli.json {
                catalog.summary.to_json()
            } else {
                catalog.summary.render_table()
            };
            emit(cli, &text)?;
            Ok(!catalog.has_failures())
        }
    }
}

fn parse(cli: &Cli, input: &Path, format: Option<Format>) -> Result<bool> {
    let text = read(input)?;
    let format = format.unwrap_or(match input.extension().and_then(|e| e.to_str()) {
        Some("mgf") => Format::Mgf,
        _ => Format::Tikz,
    });
    let components = match format {
        Format::Tikz => {
            let opts = IngestOptions {
                merge_tolerance: cli.tol.unwrap_or(IngestOptions::default().merge_tolerance),
                ..IngestOptions::default()
            };
            ingest_figure(&text, &opts)?
                .into_iter()
                .map(|c| {
                    let scale = c.scale();
                    normalize(&c, scale)
                })
                .collect::<std::result::Result<Vec<_>, _>>()?
        }
        Format::Mgf => connected_components(&read_mgf(&text)?),
    };
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let name = stem(input);
    let mut written = Vec::new();
    for (k, g) in components.iter().enumerate() {
        let path = dir.join(format!("{name}-{k}.mgf"));
        write(&path, &write_mgf(g))?;
        written.push(serde_json::json!({
            "file": path.display().to_string(),
            "vertices": g.vertex_count(),
            "edges": g.edge_count(),
        }));
    }
    if cli.json {
        print!("{}", to_json(&serde_json::json!({ "components": written }))?);
    } else {
        println!("{} components", components.len());
        for w in &written {
            println!("{}: {} vertices, {} edges", w["file"].as_str().unwrap_or(""), w["vertices"], w["edges"]);
        }
    }
    Ok(true)
}

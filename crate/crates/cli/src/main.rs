use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use geosel::federation::synth::grid_federation;
use geosel::federation::{
    generate_workload, partition_dataset, run_benchmark, scrape, Boundary, Federation, PartitionOptions, Template,
    Variant, WorkloadQuery,
};
use geosel::query::{parse_query, Query};
use geosel::selector::{Mode, SourceAssignment};
use geosel::store::Store;
use geosel::summaries::{emit_descriptor, Flavor};

#[derive(Parser)]
#[command(name = "geosel", version, about = "Geospatial source selection for federated GeoSPARQL")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Write a dataset descriptor for each dump.
    Scrape {
        /// union | mbb | quadtree:K | explicit:FILE
        #[arg(long)]
        flavor: String,
        /// Directory for `<id>.void.ttl` files; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(required = true)]
        dumps: Vec<PathBuf>,
    },
    /// Split a dump along convex boundaries.
    Partition {
        /// JSON list of {"name", "wkt"} objects.
        #[arg(long)]
        boundaries: PathBuf,
        /// IRI prefix per partition; `{name}` is replaced by the boundary name.
        #[arg(long)]
        prefix_template: String,
        /// Fail if a shape lies partly outside every boundary.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: PathBuf,
        dump: PathBuf,
    },
    /// Select sources for each pattern of a query.
    Select {
        #[arg(long)]
        federation: PathBuf,
        #[arg(long)]
        query: PathBuf,
        /// Override the mode in the federation file.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Sources each pattern really needs, found by evaluating the query.
    Oracle {
        #[arg(long)]
        federation: PathBuf,
        #[arg(long)]
        query: PathBuf,
        /// Re-evaluate once per omitted (pattern, source) pair instead of
        /// reading derivation provenance.
        #[arg(long)]
        removal: bool,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Time selection over a generated workload and check every result.
    Bench {
        /// Federation files, one variant each. Without any, the built-in
        /// three-layer grid federation is used in four variants.
        #[arg(long)]
        federation: Vec<PathBuf>,
        /// Directory of `.rq` files to use instead of generated queries.
        #[arg(long, conflicts_with = "templates")]
        queries: Option<PathBuf>,
        /// Comma-separated templates.
        #[arg(long, value_delimiter = ',', default_value = "Q1,Q2,Q3,Q4,Q5,Q6,Q7")]
        templates: Vec<Template>,
        /// Queries per template.
        #[arg(short = 'n', long, default_value_t = 10)]
        instances: usize,
        #[arg(long, default_value_t = 3)]
        repetitions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Thm,
    Geo,
}

enum Failure {
    Input(String),
    Internal(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_query(path: &Path) -> Result<Query, Failure> {
    parse_query(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Writes to stdout; a reader that went away early is not an error.
fn emit(text: &str) -> Result<(), Failure> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Input(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn assignment_json(q: &Query, sigma: &SourceAssignment) -> serde_json::Value {
    let patterns: Vec<serde_json::Value> = q
        .bgp
        .iter()
        .zip(sigma.sets())
        .enumerate()
        .map(|(i, (t, s))| serde_json::json!({ "pattern": format!("t{}", i + 1), "triple": t.to_string(), "sources": s }))
        .collect();
    serde_json::json!({ "patterns": patterns })
}

fn print_assignment(q: &Query, sigma: &SourceAssignment, format: Format) -> Result<(), Failure> {
    match format {
        Format::Json => emit(&format!("{}\n", serde_json::to_string_pretty(&assignment_json(q, sigma)).unwrap())),
        Format::Table => emit(&sigma.to_string()),
    }
}

fn scrape_cmd(flavor: &str, out: Option<&Path>, dumps: &[PathBuf]) -> Result<(), Failure> {
    let (flavor, boundary) = match flavor.strip_prefix("explicit:") {
        Some(file) => (Flavor::Explicit, Some(read(Path::new(file))?)),
        None => (flavor.parse::<Flavor>()?, None),
    };
    if let Some(dir) = out {
        create_dir(dir)?;
    }
    for dump in dumps {
        let store = Store::load_file(dump)?;
        let text = emit_descriptor(&scrape(&store, flavor, boundary.as_deref())?);
        match out {
            Some(dir) => write(&dir.join(format!("{}.void.ttl", store.id())), &text)?,
            None => emit(&text)?,
        }
    }
    Ok(())
}

fn partition_cmd(boundaries: &Path, template: &str, strict: bool, out: &Path, dump: &Path) -> Result<(), Failure> {
    let boundaries = Boundary::from_json(&read(boundaries)?)?;
    let store = Store::load_file(dump)?;
    let parts = partition_dataset(&store, &boundaries, template, PartitionOptions { strict })?;
    create_dir(out)?;
    for p in &parts {
        write(&out.join(format!("{}.nt", p.id())), &format!("# @source {}\n{}", p.id(), p.to_ntriples()))?;
        eprintln!("{}: {} triples", p.id(), p.len());
    }
    Ok(())
}

fn bench_variants(files: &[PathBuf], seed: u64) -> Result<Vec<Variant>, Failure> {
    if files.is_empty() {
        let grid = grid_federation(seed);
        return Ok(vec![
            Variant { name: "thm".into(), federation: grid.federation(Mode::Thm)? },
            Variant { name: "geo-mbb".into(), federation: grid.with_flavor(Flavor::Mbb, Mode::Geo)? },
            Variant { name: "geo-quadtree2".into(), federation: grid.with_flavor(Flavor::Quadtree(2), Mode::Geo)? },
            Variant { name: "geo-explicit".into(), federation: grid.federation(Mode::Geo)? },
        ]);
    }
    files
        .iter()
        .map(|f| Ok(Variant { name: f.display().to_string(), federation: Federation::load(f)? }))
        .collect()
}

fn query_dir(dir: &Path) -> Result<Vec<WorkloadQuery>, Failure> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "rq"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Failure::Input(format!("{}: no .rq files", dir.display())));
    }
    paths
        .iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            Ok(WorkloadQuery { template: None, name, query: load_query(p)? })
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn bench_cmd(
    files: &[PathBuf],
    queries: Option<&Path>,
    templates: &[Template],
    n: usize,
    repetitions: usize,
    seed: u64,
    jobs: Option<usize>,
    format: Format,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let variants = bench_variants(files, seed)?;
    let workload = match queries {
        Some(dir) => query_dir(dir)?,
        None => generate_workload(templates, n, seed, &variants[0].federation)?,
    };
    let report = run_benchmark(&variants, &workload, repetitions, jobs);
    match format {
        Format::Json => emit(&format!("{}\n", report.to_json()))?,
        Format::Table => emit(&report.to_table())?,
    }
    if let Some(path) = out {
        write(path, &report.to_json())?;
    }
    let bad: Vec<String> = report
        .rows
        .iter()
        .filter(|r| r.error.is_none() && !r.sound)
        .map(|r| format!("{}/{}", r.variant, r.query))
        .collect();
    if !bad.is_empty() {
        return Err(Failure::Internal(format!("unsound selection for {}", bad.join(", "))));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Scrape { flavor, out, dumps } => scrape_cmd(&flavor, out.as_deref(), &dumps),
        Command::Partition { boundaries, prefix_template, strict, out, dump } => {
            partition_cmd(&boundaries, &prefix_template, strict, &out, &dump)
        }
        Command::Select { federation, query, mode, format } => {
            let mut fed = Federation::load(&federation)?;
            if let Some(m) = mode {
                fed.mode = match m {
                    ModeArg::Thm => Mode::Thm,
                    ModeArg::Geo => Mode::Geo,
                };
            }
            let q = load_query(&query)?;
            print_assignment(&q, &fed.select(&q)?, format)
        }
        Command::Oracle { federation, query, removal, format } => {
            let fed = Federation::load(&federation)?;
            let q = load_query(&query)?;
            let relevant = if removal { fed.relevant_by_removal(&q)? } else { fed.relevant_sources(&q)? };
            print_assignment(&q, &relevant, format)
        }
        Command::Bench { federation, queries, templates, instances, repetitions, seed, jobs, format, out } => {
            bench_cmd(&federation, queries.as_deref(), &templates, instances, repetitions, seed, jobs, format, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(2)
        }
    }
}

// SPDX-License-Identifier: Apache-2.0

//! def2graph: DEF-to-circuit-graph pipeline frontend.
//!
//! Exit codes: 0 success, 1 diagnostics with errors, 2 usage, 3 I/O.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use defgraph::bundle::{parse_manifest, read_bundle, write_homo_bundle, write_typed_bundle, BundleGraph};
use defgraph::db::{resolve, validate, TechTable, Vocabularies};
use defgraph::def::{detect_stage, emit_def, parse_def, tokenize_def, Stage};
use defgraph::error::Error;
use defgraph::graph::{CircuitGraph, ViewKind};
use defgraph::homo::{merge_graphs, split_dataset, to_homograph, HomoGraph, SplitPolicy};
use defgraph::labels::attach_labels;
use defgraph::stats::{stats_report, PathMode, SimpleGraph};
use defgraph::syngen::{generate_design, SynSpec};
use defgraph::views::{build_view, check_parity, ViewOptions, ViewVariant};

#[derive(Parser)]
#[command(name = "def2graph", version, about = "Convert DEF physical-design files into circuit graphs")]
struct Cli {
    /// Config file in the manifest dialect; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a DEF file and print a summary.
    Parse {
        def: PathBuf,
        /// Re-emit the design in canonical form instead of the summary.
        #[arg(long)]
        emit: bool,
    },
    /// Build graph views from a DEF file and write them as bundles.
    Build(BuildArgs),
    /// Print graph statistics for a bundle or DEF file.
    Stats {
        input: PathBuf,
        /// Force exact all-sources BFS regardless of size.
        #[arg(long, conflicts_with = "sample")]
        exact: bool,
        /// Sample k BFS sources.
        #[arg(long, value_name = "K")]
        sample: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Merge homogeneous bundles into one dataset bundle.
    Merge {
        #[arg(required = true)]
        bundles: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compute design-level train/validation/test masks for a merged bundle.
    Split {
        bundle: PathBuf,
        /// Split granularity; only `design` is supported.
        #[arg(long, default_value = "design")]
        policy: String,
        /// Percentages train,validation,test.
        #[arg(long)]
        ratios: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Validate a DEF file or bundle: database diagnostics plus view parity.
    Validate { input: PathBuf },
    /// Generate a synthetic DEF design with ground-truth sidecars.
    Gen {
        #[arg(long)]
        gates: usize,
        #[arg(long, default_value_t = 2.0)]
        fanout: f64,
        #[arg(long, default_value_t = 4)]
        io: usize,
        #[arg(long, default_value = "routing")]
        stage: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct BuildArgs {
    def: PathBuf,
    /// One of b,c,d,e,f or `all`.
    #[arg(long)]
    view: Option<String>,
    /// floorplan, place(ment) or rout(ing); defaults to the detected stage.
    #[arg(long)]
    stage: Option<String>,
    /// Alternate feature placement for view e.
    #[arg(long, value_name = "VARIANT")]
    view_variant: Option<String>,
    /// Technology sidecar (cell pin direction [area] [leakage] lines).
    #[arg(long)]
    tech: Option<PathBuf>,
    /// Keep power/ground/clock and SPECIALNETS nets in supervision.
    #[arg(long)]
    include_special: bool,
    /// Also write the homogeneous conversion next to each typed bundle.
    #[arg(long)]
    homo: bool,
    #[arg(short, long)]
    output: PathBuf,
}

/// Errors sorted into process exit codes.
enum Failure {
    Diagnostics(String),
    Io(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match &e {
            Error::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Diagnostics(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err(f) => return fail(f),
    };
    let result = match cli.command {
        Command::Parse { def, emit } => cmd_parse(&def, emit),
        Command::Build(args) => cmd_build(args, &config),
        Command::Stats {
            input,
            exact,
            sample,
            seed,
        } => cmd_stats(&input, exact, sample, seed, &config),
        Command::Merge { bundles, output } => cmd_merge(&bundles, &output),
        Command::Split {
            bundle,
            policy,
            ratios,
            seed,
        } => cmd_split(&bundle, &policy, ratios, seed, &config),
        Command::Validate { input } => cmd_validate(&input),
        Command::Gen {
            gates,
            fanout,
            io,
            stage,
            seed,
            output,
        } => cmd_gen(gates, fanout, io, &stage, seed, &output, &config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => fail(f),
    }
}

fn fail(f: Failure) -> ExitCode {
    match f {
        Failure::Diagnostics(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Failure::Usage(msg) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Failure::Io(msg) => {
            eprintln!("io error: {msg}");
            ExitCode::from(3)
        }
    }
}

type Config = HashMap<String, String>;

fn load_config(path: Option<&Path>) -> Result<Config, Failure> {
    let Some(path) = path else {
        return Ok(Config::new());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let entries =
        parse_manifest(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(entries.into_iter().collect())
}

/// Flag > config > default.
fn resolved<T: Clone + std::str::FromStr>(
    flag: Option<T>,
    config: &Config,
    key: &str,
    default: T,
) -> Result<T, Failure> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match config.get(key) {
        Some(raw) => raw
            .parse()
            .map_err(|_| Failure::Usage(format!("config `{key}` = `{raw}` is invalid"))),
        None => Ok(default),
    }
}

fn threads() -> usize {
    std::env::var("R2G_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|n| *n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

fn load_def(path: &Path) -> Result<defgraph::def::Parsed, Failure> {
    let file = fs::File::open(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let tokens = tokenize_def(std::io::BufReader::new(file))?;
    Ok(parse_def(&tokens)?)
}

fn cmd_parse(path: &Path, emit: bool) -> Result<(), Failure> {
    let parsed = load_def(path)?;
    let d = &parsed.design;
    if emit {
        print!("{}", emit_def(d));
        return Ok(());
    }
    println!("design = {}", d.design_name);
    if let Some(dbu) = d.dbu_per_micron {
        println!("dbu_per_micron = {dbu}");
    }
    if let Some(die) = d.die_area {
        println!(
            "die_area = ( {} {} ) ( {} {} )",
            die.x_lo, die.y_lo, die.x_hi, die.y_hi
        );
    }
    println!("stage = {}", detect_stage(d));
    println!("components = {}", d.components.len());
    println!("pins = {}", d.pins.len());
    println!("nets = {}", d.nets.len());
    println!("special_nets = {}", d.special_nets.len());
    for w in &parsed.warnings {
        eprintln!("{w}");
    }
    Ok(())
}

fn parse_views(s: &str) -> Result<Vec<ViewKind>, Failure> {
    if s == "all" {
        return Ok(ViewKind::ALL.to_vec());
    }
    ViewKind::from_name(s)
        .map(|v| vec![v])
        .ok_or_else(|| Failure::Usage(format!("unknown view `{s}` (expected b,c,d,e,f or all)")))
}

fn parse_stage(s: &str) -> Result<Stage, Failure> {
    Stage::from_name(s).ok_or_else(|| Failure::Usage(format!("unknown stage `{s}`")))
}

struct Pipeline {
    db: defgraph::db::DesignDatabase,
    stage: Stage,
    opts: ViewOptions,
    include_special: bool,
}

impl Pipeline {
    fn build_labeled(&self, view: ViewKind) -> Result<CircuitGraph, Error> {
        let mut g = build_view(&self.db, view, self.stage, self.opts)?;
        attach_labels(&mut g, &self.db, self.stage, self.include_special)?;
        Ok(g)
    }
}

fn cmd_build(args: BuildArgs, config: &Config) -> Result<(), Failure> {
    let views = parse_views(&resolved(
        args.view,
        config,
        "view",
        "all".to_string(),
    )?)?;
    let variant = match resolved(args.view_variant, config, "view_variant", "canonical".into())?
        .as_str()
    {
        "canonical" => ViewVariant::Canonical,
        "table2" => ViewVariant::Table2,
        other => return Err(Failure::Usage(format!("unknown view variant `{other}`"))),
    };
    let tech = match &args.tech {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
            Some(TechTable::parse(&text)?)
        }
        None => None,
    };

    let parsed = load_def(&args.def)?;
    for w in &parsed.warnings {
        eprintln!("{w}");
    }
    let db = resolve(&parsed.design, Vocabularies::default(), tech.as_ref())?;
    for w in &db.warnings {
        eprintln!("{w}");
    }
    let stage = match args.stage {
        Some(s) => parse_stage(&s)?,
        None => match config.get("stage") {
            Some(s) => parse_stage(s)?,
            None => db.stage,
        },
    };
    let pipe = Pipeline {
        stage,
        opts: ViewOptions { variant },
        include_special: args.include_special,
        db,
    };

    // build views concurrently, capped by R2G_THREADS
    let mut graphs: Vec<Option<CircuitGraph>> = Vec::new();
    graphs.resize_with(views.len(), || None);
    let cap = threads();
    std::thread::scope(|scope| -> Result<(), Error> {
        for chunk in views.chunks(cap) {
            let handles: Vec<_> = chunk
                .iter()
                .map(|v| scope.spawn(|| pipe.build_labeled(*v)))
                .collect();
            for (v, h) in chunk.iter().zip(handles) {
                let g = h.join().expect("view build panicked")?;
                let slot = views.iter().position(|x| x == v).unwrap();
                graphs[slot] = Some(g);
            }
        }
        Ok(())
    })?;
    let graphs: Vec<CircuitGraph> = graphs.into_iter().map(Option::unwrap).collect();

    if graphs.len() > 1 {
        let report = check_parity(&graphs);
        if report.pass {
            println!("parity PASS");
        } else {
            for p in &report.problems {
                eprintln!("parity: {p}");
            }
            println!("parity FAIL");
            return Err(Failure::Diagnostics("information parity violated".into()));
        }
    }

    fs::create_dir_all(&args.output)?;
    let vocab_hash = pipe.db.vocab.hash();
    fs::write(args.output.join("vocab.tsv"), pipe.db.vocab.to_sidecar())?;
    let meta = vec![("vocab_hash".to_string(), vocab_hash)];
    for g in &graphs {
        let dir = args.output.join(g.view.name());
        write_typed_bundle(g, &dir, &meta)?;
        println!("wrote {}", dir.display());
        if args.homo {
            let h = to_homograph(g);
            let hdir = args.output.join(format!("{}-homo", g.view.name()));
            write_homo_bundle(&h, &hdir, &meta)?;
            println!("wrote {}", hdir.display());
        }
    }
    Ok(())
}

fn simple_graph_of(input: &Path) -> Result<SimpleGraph, Failure> {
    if input.join("manifest").is_file() {
        match read_bundle(input)? {
            BundleGraph::Typed(g) => Ok(SimpleGraph::from_circuit(&g)),
            BundleGraph::Homo(h) => Ok(SimpleGraph::from_homo(&h)),
        }
    } else {
        // DEF input: stats over view b at the detected stage
        let parsed = load_def(input)?;
        let db = resolve(&parsed.design, Vocabularies::default(), None)?;
        let g = build_view(&db, ViewKind::B, db.stage, ViewOptions::default())?;
        Ok(SimpleGraph::from_circuit(&g))
    }
}

fn cmd_stats(
    input: &Path,
    exact: bool,
    sample: Option<usize>,
    seed: Option<u64>,
    config: &Config,
) -> Result<(), Failure> {
    let g = simple_graph_of(input)?;
    let seed = resolved(seed, config, "seed", 0u64)?;
    let mode = if exact {
        PathMode::Exact
    } else {
        match resolved(sample, config, "sample", 0usize)? {
            0 => PathMode::Auto { seed },
            k => PathMode::Sampled { k, seed },
        }
    };
    for (k, v) in stats_report(&g, mode) {
        println!("{k} = {v}");
    }
    Ok(())
}

fn load_homo(path: &Path) -> Result<HomoGraph, Failure> {
    match read_bundle(path)? {
        BundleGraph::Homo(h) => Ok(h),
        BundleGraph::Typed(g) => Ok(to_homograph(&g)),
    }
}

fn cmd_merge(bundles: &[PathBuf], output: &Path) -> Result<(), Failure> {
    let mut graphs = Vec::with_capacity(bundles.len());
    for b in bundles {
        graphs.push(load_homo(b)?);
    }
    let merged = merge_graphs(&graphs)?;
    write_homo_bundle(&merged, output, &[])?;
    println!(
        "wrote {} ({} designs, {} nodes, {} edges)",
        output.display(),
        merged.designs.len(),
        merged.num_nodes,
        merged.num_edges()
    );
    Ok(())
}

fn cmd_split(
    bundle: &Path,
    policy: &str,
    ratios: Option<String>,
    seed: Option<u64>,
    config: &Config,
) -> Result<(), Failure> {
    if policy != "design" {
        return Err(Failure::Usage(format!(
            "unknown split policy `{policy}` (only `design` is supported)"
        )));
    }
    let ratios = resolved(ratios, config, "ratios", "70,15,15".to_string())?;
    let parts: Vec<f64> = ratios
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("bad --ratios `{ratios}`")))?;
    let [a, b, c] = parts[..] else {
        return Err(Failure::Usage(format!("bad --ratios `{ratios}`")));
    };
    let seed = resolved(seed, config, "seed", 0u64)?;
    let h = load_homo(bundle)?;
    let masks = split_dataset(&h, SplitPolicy { ratios: (a, b, c) }, seed)?;

    let tables = bundle.join("tables");
    let write_mask = |name: &str, mask: &[bool]| -> Result<(), Failure> {
        let bytes: Vec<u8> = mask
            .iter()
            .flat_map(|b| (*b as i64).to_le_bytes())
            .collect();
        fs::write(tables.join(format!("split.{name}")), bytes)?;
        Ok(())
    };
    write_mask("__train", &masks.train)?;
    write_mask("__validation", &masks.validation)?;
    write_mask("__test", &masks.test)?;
    let count = |k: u8| masks.design_split.iter().filter(|x| **x == k).count();
    let rows = |m: &[bool]| m.iter().filter(|x| **x).count();
    let splits_text = format!(
        "policy = design\nratios = {ratios}\nseed = {seed}\ndesigns = {}/{}/{}\nrows = {}/{}/{}\n",
        count(0),
        count(1),
        count(2),
        rows(&masks.train),
        rows(&masks.validation),
        rows(&masks.test),
    );
    fs::write(bundle.join("splits"), &splits_text)?;
    print!("{splits_text}");
    Ok(())
}

fn cmd_validate(input: &Path) -> Result<(), Failure> {
    if input.join("manifest").is_file() {
        let g = read_bundle(input)?;
        println!(
            "bundle OK: view {} stage {}",
            g.view(),
            g.stage()
        );
        return Ok(());
    }
    let parsed = load_def(input)?;
    for w in &parsed.warnings {
        println!("{w}");
    }
    let db = resolve(&parsed.design, Vocabularies::default(), None)?;
    for w in &db.warnings {
        println!("{w}");
    }
    let diags = validate(&db);
    for d in &diags {
        println!("ERROR {d}");
    }
    let mut graphs = Vec::new();
    for v in ViewKind::ALL {
        let mut g = build_view(&db, v, db.stage, ViewOptions::default())?;
        attach_labels(&mut g, &db, db.stage, false)?;
        graphs.push(g);
    }
    let report = check_parity(&graphs);
    for p in &report.problems {
        println!("ERROR parity: {p}");
    }
    if diags.is_empty() && report.pass {
        println!("validate PASS");
        Ok(())
    } else {
        println!("validate FAIL");
        Err(Failure::Diagnostics(format!(
            "{} diagnostic(s)",
            diags.len() + report.problems.len()
        )))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    gates: usize,
    fanout: f64,
    io: usize,
    stage: &str,
    seed: Option<u64>,
    output: &Path,
    config: &Config,
) -> Result<(), Failure> {
    let spec = SynSpec {
        gates,
        avg_fanout: fanout,
        io_count: io,
        grid: None,
        seed: resolved(seed, config, "seed", 0u64)?,
        stage: parse_stage(stage)?,
    };
    let gen = generate_design(&spec)?;
    fs::write(output, &gen.def_text)?;
    fs::write(output.with_extension("truth"), gen.truth.to_text())?;
    fs::write(output.with_extension("tech"), &gen.tech_text)?;
    println!(
        "wrote {} ({} gates, {} nets, {} ios)",
        output.display(),
        gen.truth.gates,
        gen.truth.nets,
        gen.truth.ios
    );
    Ok(())
}

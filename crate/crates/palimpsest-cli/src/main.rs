//! Command-line front end for the rewrite-aware coding library: loads a
//! joint source from JSON, runs code schemes and embedding searches, and
//! emits rate/malleability reports as text, JSON, CSV, or SVG.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use palimpsest::codes::{
    embedding_code, huffman_family, huffman_scheme, identity_code, incremental_code, ppm_code,
    CodePair, Labeling,
};
use palimpsest::evaluate::{evaluate_exact, evaluate_mc, malleability_lower_bound};
use palimpsest::graph::{adjacency_graph, hypercube, levenshtein_graph, LabeledGraph};
use palimpsest::prob::{balanced_t, rate_frontier, relative_entropy, tilted_distribution};
use palimpsest::scalar::format_sig12;
use palimpsest::typicality::{rate_sufficiency_check, typicality_graph, TypicalityConfig};
use palimpsest::{EditMetric, Error, ErrorKind, JointSource, Result, Scalar};

/// Analyze rewrite-aware source codes: storage rates before and after an
/// edit, and the expected storage-edit distance between the two versions.
#[derive(Parser)]
#[command(name = "palimpsest", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print entropies, divergences, stationarity, and the per-block
    /// malleability floors of a joint source.
    Info {
        /// Joint source JSON file.
        file: PathBuf,
        /// Largest block length to print the malleability floor for.
        #[arg(long, default_value_t = 4)]
        max_n: u32,
    },
    /// Run a concrete code scheme and print its rate/malleability triple.
    Scheme {
        /// Joint source JSON file.
        file: PathBuf,
        /// Which scheme to run.
        #[arg(long, value_enum)]
        scheme: SchemeKind,
        /// Source block length.
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Storage edit metric: hamming, extended_hamming, or levenshtein.
        #[arg(long, default_value = "extended_hamming")]
        metric: String,
        /// Estimate by sampling this many block pairs instead of exact
        /// enumeration.
        #[arg(long)]
        samples: Option<u64>,
        /// RNG seed for sampling; derived and printed when omitted.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Embed the source adjacency graph into a storage graph and print the
    /// resulting codebook and triple.
    Embed {
        /// Joint source JSON file.
        file: PathBuf,
        /// Host graph: "hypercube:M" or "levgraph:MAXLEN".
        #[arg(long)]
        host: String,
        /// Source block length.
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// How codewords are chosen: host labels freely ("fixed") or the
        /// cheapest member of the optimal prefix-code family.
        #[arg(long, value_enum, default_value_t = LabelChoice::Fixed)]
        labels: LabelChoice,
        /// Storage edit metric override; defaults to hamming for hypercube
        /// hosts and levenshtein for edit-graph hosts.
        #[arg(long)]
        metric: Option<String>,
    },
    /// Sweep the compression-loss frontier between the two marginals.
    Frontier {
        /// Joint source JSON file.
        file: PathBuf,
        /// Number of sweep points.
        #[arg(long, default_value_t = 33)]
        grid: usize,
        /// Output format.
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        out: OutFormat,
        /// Write the artifact here instead of stdout.
        #[arg(long)]
        path: Option<PathBuf>,
    },
    /// Build the joint-typicality graph of a block source and report its
    /// shape, optionally checking a storage budget against it.
    Block {
        /// Joint source JSON file.
        file: PathBuf,
        /// Source block length.
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Typicality tolerance: "auto" or a number in (0, 1).
        #[arg(long, default_value = "auto")]
        delta: String,
        /// Total storage budget n·K in bits; adds a rate feasibility check.
        #[arg(long = "nK")]
        nk: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeKind {
    Identity,
    Huffman,
    Incremental,
    Ppm,
}

#[derive(Clone, Copy, ValueEnum)]
enum LabelChoice {
    /// Codewords are host vertex labels, assigned by the search.
    Fixed,
    /// Codewords come from the cheapest optimal prefix-code family member.
    HuffmanFamily,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Svg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Input => 2u8,
                ErrorKind::Resource => 3,
                ErrorKind::Infeasible => 4,
            })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Info { file, max_n } => cmd_info(&file, max_n),
        Command::Scheme { file, scheme, n, metric, samples, seed } => {
            cmd_scheme(&file, scheme, n, &metric, samples, seed)
        }
        Command::Embed { file, host, n, labels, metric } => {
            cmd_embed(&file, &host, n, labels, metric.as_deref())
        }
        Command::Frontier { file, grid, out, path } => {
            cmd_frontier(&file, grid, out, path.as_deref())
        }
        Command::Block { file, n, delta, nk } => cmd_block(&file, n, &delta, nk),
    }
}

// ---------------------------------------------------------------------------
// Source file loading
// ---------------------------------------------------------------------------

/// On-disk description of a joint source. `joint[x][y]` is the probability
/// that symbol `x` is edited into symbol `y`; entries may be JSON numbers
/// or exact "p/q" strings.
#[derive(Deserialize)]
struct SourceFile {
    alphabet: Vec<String>,
    joint: Vec<Vec<Scalar>>,
    storage_alphabet_size: usize,
}

fn load_source(path: &Path) -> Result<JointSource> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let file: SourceFile = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    JointSource::new(file.alphabet, file.joint, file.storage_alphabet_size)
}

// ---------------------------------------------------------------------------
// info
// ---------------------------------------------------------------------------

fn cmd_info(file: &Path, max_n: u32) -> Result<()> {
    let src = load_source(file)?;
    let px = src.marginal_x();
    let py = src.marginal_y();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "source: {} symbols, storage alphabet size {}",
        src.w_size(),
        src.v_size()
    );
    let _ = writeln!(out, "exact arithmetic: {}", yes_no(src.is_exact()));
    let _ = writeln!(out, "stationary: {}", yes_no(src.is_stationary()));
    let _ = writeln!(out, "H(X)   = {} bits", format_sig12(src.entropy_x(2.0)));
    let _ = writeln!(out, "H(Y)   = {} bits", format_sig12(src.entropy_y(2.0)));
    let _ = writeln!(out, "H(Y|X) = {} bits", format_sig12(src.conditional_entropy(2.0)));
    let _ = writeln!(out, "H(X,Y) = {} bits", format_sig12(src.joint_entropy(2.0)));
    let _ = writeln!(
        out,
        "D(p_X || p_Y) = {} bits",
        format_sig12(relative_entropy(&px, &py, 2.0)?)
    );
    let _ = writeln!(
        out,
        "D(p_Y || p_X) = {} bits",
        format_sig12(relative_entropy(&py, &px, 2.0)?)
    );
    let _ = writeln!(out, "unchanged-symbol mass: {}", src.diagonal_mass().display_string());
    let _ = writeln!(out, "malleability floor (min expected edits per source letter):");
    for n in 1..=max_n.max(1) {
        let bound = malleability_lower_bound(&src, n as usize)?;
        let _ = writeln!(out, "  n={n}  {}", bound.display_string());
    }
    print!("{out}");
    Ok(())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

// ---------------------------------------------------------------------------
// scheme
// ---------------------------------------------------------------------------

fn build_scheme(src: &JointSource, scheme: SchemeKind, n: usize) -> Result<CodePair> {
    match scheme {
        SchemeKind::Identity => {
            if n != 1 {
                return Err(Error::InvalidInput(
                    "the identity scheme stores single letters; use --n 1".into(),
                ));
            }
            identity_code(src)
        }
        SchemeKind::Huffman => huffman_scheme(src, n),
        SchemeKind::Incremental => incremental_code(src, n),
        SchemeKind::Ppm => ppm_code(src, n, None),
    }
}

fn cmd_scheme(
    file: &Path,
    scheme: SchemeKind,
    n: usize,
    metric: &str,
    samples: Option<u64>,
    seed: Option<u64>,
) -> Result<()> {
    let src = load_source(file)?;
    let metric = EditMetric::parse(metric)?;
    let pair = build_scheme(&src, scheme, n)?;
    let triple = match samples {
        None => evaluate_exact(&src, &pair.code_x, &pair.code_y, metric)?,
        Some(samples) => {
            let seed = seed.unwrap_or_else(derive_seed);
            eprintln!("seed: {seed}");
            evaluate_mc(&src, &pair.code_x, &pair.code_y, metric, samples, seed)?
        }
    };
    println!("{}", to_pretty(&triple)?);
    Ok(())
}

/// Clock-derived seed for sampling runs that did not pin one. It is always
/// printed, so any run can be reproduced afterwards.
fn derive_seed() -> u64 {
    use std::time::{SystemTime, UNIX_EPOCH};
    match SystemTime::now().duration_since(UNIX_EPOCH) {
        Ok(d) => d.as_nanos() as u64,
        Err(_) => 0x9e37_79b9_7f4a_7c15,
    }
}

// ---------------------------------------------------------------------------
// embed
// ---------------------------------------------------------------------------

/// "hypercube:M" or "levgraph:MAXLEN" → the host graph and its natural
/// storage edit metric.
fn parse_host(descriptor: &str, storage_v: usize) -> Result<(LabeledGraph, EditMetric)> {
    let (kind, arg) = descriptor.split_once(':').ok_or_else(|| {
        Error::InvalidInput(format!(
            "host must look like hypercube:M or levgraph:MAXLEN, got {descriptor:?}"
        ))
    })?;
    let arg: u32 = arg
        .parse()
        .map_err(|_| Error::InvalidInput(format!("host parameter {arg:?} is not a number")))?;
    match kind {
        "hypercube" => Ok((hypercube(arg)?, EditMetric::Hamming)),
        "levgraph" => Ok((
            levenshtein_graph(storage_v, arg as usize, true)?,
            EditMetric::Levenshtein,
        )),
        other => Err(Error::InvalidInput(format!(
            "unknown host kind {other:?}; expected hypercube or levgraph"
        ))),
    }
}

fn cmd_embed(
    file: &Path,
    host_spec: &str,
    n: usize,
    labels: LabelChoice,
    metric: Option<&str>,
) -> Result<()> {
    let src = load_source(file)?;
    let (host, default_metric) = parse_host(host_spec, src.v_size())?;
    let metric = match metric {
        Some(s) => EditMetric::parse(s)?,
        None => default_metric,
    };
    let labeling = match labels {
        LabelChoice::Fixed => Labeling::FixedHostLabels,
        LabelChoice::HuffmanFamily => {
            // Label blocks with an optimal prefix code for the letter law:
            // the stationary marginal, or the balanced mixture of the two
            // marginals when the source drifts.
            let dist = if src.is_stationary() {
                src.marginal_x()
            } else {
                let px = src.marginal_x();
                let py = src.marginal_y();
                let t = balanced_t(&px, &py)?;
                tilted_distribution(&px, &py, t)?
            };
            Labeling::Family(huffman_family(&dist, src.v_size(), 64)?)
        }
    };
    let (pair, embedding) = embedding_code(&src, n, &host, &labeling)?;
    let triple = evaluate_exact(&src, &pair.code_x, &pair.code_y, metric)?;

    let guest = adjacency_graph(&src, n)?;
    let deleted: Vec<Value> = embedding
        .deleted_edges
        .iter()
        .map(|&(u, v)| json!([guest.name(u), guest.name(v)]))
        .collect();
    let report = json!({
        "host": host_spec,
        "metric": metric.name(),
        "embedding": {
            "cost": embedding.cost,
            "deleted_edges": deleted,
            "proven_optimal": embedding.proven_optimal,
        },
        "code": serde_json::to_value(&pair.code_x)
            .map_err(|e| Error::InvalidInput(e.to_string()))?,
        "triple": serde_json::to_value(&triple)
            .map_err(|e| Error::InvalidInput(e.to_string()))?,
    });
    println!("{}", to_pretty(&report)?);
    Ok(())
}

// ---------------------------------------------------------------------------
// frontier
// ---------------------------------------------------------------------------

fn cmd_frontier(file: &Path, grid: usize, out: OutFormat, path: Option<&Path>) -> Result<()> {
    let src = load_source(file)?;
    let points = rate_frontier(&src, grid, 2.0)?;
    let artifact = match out {
        OutFormat::Csv => frontier_csv(&points)?,
        OutFormat::Svg => frontier_svg(&points),
    };
    match path {
        None => print!("{artifact}"),
        Some(p) => std::fs::write(p, artifact)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", p.display())))?,
    }
    Ok(())
}

fn frontier_csv(points: &[palimpsest::prob::RateLossPoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| Error::InvalidInput(e.to_string());
    w.write_record(["t", "k_loss", "l_loss"]).map_err(io_err)?;
    for p in points {
        w.write_record([
            format_sig12(p.t),
            format_sig12(p.k_loss),
            format_sig12(p.l_loss),
        ])
        .map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Fixed 800×600 canvas: the extra compression rate paid on the first
/// version (K axis) against the extra rate paid on the rewritten version
/// (L axis), one marker per sweep point.
fn frontier_svg(points: &[palimpsest::prob::RateLossPoint]) -> String {
    const W: f64 = 800.0;
    const H: f64 = 600.0;
    const MARGIN: f64 = 70.0;
    let max_k = points.iter().map(|p| p.k_loss).fold(0.0_f64, f64::max);
    let max_l = points.iter().map(|p| p.l_loss).fold(0.0_f64, f64::max);
    let span_k = if max_k > 0.0 { max_k } else { 1.0 };
    let span_l = if max_l > 0.0 { max_l } else { 1.0 };
    let x = |k: f64| MARGIN + (W - 2.0 * MARGIN) * k / span_k;
    let y = |l: f64| (H - MARGIN) - (H - 2.0 * MARGIN) * l / span_l;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" \
         viewBox=\"0 0 800 600\">"
    );
    let _ = writeln!(s, "  <rect width=\"800\" height=\"600\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "  <line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>",
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    );
    let _ = writeln!(
        s,
        "  <line x1=\"{m}\" y1=\"{b}\" x2=\"{m}\" y2=\"{t}\" stroke=\"black\"/>",
        m = MARGIN,
        b = H - MARGIN,
        t = MARGIN
    );
    let _ = writeln!(
        s,
        "  <text x=\"{}\" y=\"{}\" font-size=\"18\">K</text>",
        W - MARGIN + 20.0,
        H - MARGIN + 6.0
    );
    let _ = writeln!(s, "  <text x=\"{}\" y=\"{}\" font-size=\"18\">L</text>", MARGIN - 6.0, MARGIN - 20.0);
    let _ = writeln!(
        s,
        "  <text x=\"{}\" y=\"30\" font-size=\"16\">compression loss frontier \
         (bits per letter over each marginal's entropy)</text>",
        MARGIN
    );
    if points.len() > 1 {
        let path: Vec<String> = points
            .iter()
            .map(|p| format!("{:.3},{:.3}", x(p.k_loss), y(p.l_loss)))
            .collect();
        let _ = writeln!(
            s,
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\"/>",
            path.join(" ")
        );
    }
    for p in points {
        let _ = writeln!(
            s,
            "  <circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"4\" fill=\"steelblue\"/>",
            x(p.k_loss),
            y(p.l_loss)
        );
    }
    let _ = writeln!(s, "</svg>");
    s
}

// ---------------------------------------------------------------------------
// block
// ---------------------------------------------------------------------------

fn cmd_block(file: &Path, n: usize, delta: &str, nk: Option<u64>) -> Result<()> {
    let src = load_source(file)?;
    let cfg = if delta == "auto" {
        TypicalityConfig::auto(n)
    } else {
        let v: f64 = delta.parse().map_err(|_| {
            Error::InvalidInput(format!("--delta must be \"auto\" or a number, got {delta:?}"))
        })?;
        TypicalityConfig::fixed(n, v)
    };
    let (_graph, report) = typicality_graph(&src, &cfg)?;
    let mut doc = Map::new();
    doc.insert(
        "report".into(),
        serde_json::to_value(&report).map_err(|e| Error::InvalidInput(e.to_string()))?,
    );
    if let Some(nk) = nk {
        let verdict = rate_sufficiency_check(&src, &cfg, nk);
        doc.insert(
            "rate_check".into(),
            serde_json::to_value(&verdict).map_err(|e| Error::InvalidInput(e.to_string()))?,
        );
    }
    println!("{}", to_pretty(&Value::Object(doc))?);
    Ok(())
}

// ---------------------------------------------------------------------------
// shared output plumbing
// ---------------------------------------------------------------------------

fn to_pretty(value: &impl serde::Serialize) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::InvalidInput(e.to_string()))
}

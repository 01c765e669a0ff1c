use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{ArgGroup, Parser, Subcommand};
use log::info;
use mapwit::cert::Certificate;
use mapwit::oracle::Oracle;
use mapwit::render::render_svg;
use mapwit::witness::{check_hole_free, is_compact, Compactness};
use mapwit::{min_k, parse_graph, parse_td, recognize, verify_witness, Graph, Mode, Outcome, RunOptions, TreeDecomposition};

#[derive(Parser)]
#[command(name = "mapwit", version, about = "Recognize k-map and hole-free k-map graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a graph is a (hole-free) k-map graph.
    #[command(group(ArgGroup::new("target").required(true).args(["k", "min_k"])))]
    Recognize {
        graph: PathBuf,
        #[arg(long)]
        td: Option<PathBuf>,
        #[arg(long)]
        k: Option<usize>,
        /// Find the smallest accepted k.
        #[arg(long)]
        min_k: bool,
        #[arg(long)]
        hole_free: bool,
        /// Write the witness of a yes answer as JSON.
        #[arg(long, value_name = "OUT")]
        certificate: Option<PathBuf>,
        /// Cross-check the answer with the brute-force oracle.
        #[arg(long)]
        oracle_check: bool,
        /// Work on sketches only; no witness is built.
        #[arg(long, conflicts_with = "certificate")]
        decision_only: bool,
    },
    /// Check a certificate against a graph.
    Verify {
        graph: PathBuf,
        witness: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        hole_free: bool,
    },
    /// Brute-force decision for small graphs.
    Oracle {
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        hole_free: bool,
    },
    /// Draw a certificate as SVG.
    Render {
        witness: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_graph(path: &Path) -> anyhow::Result<Graph> {
    parse_graph(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_certificate(path: &Path) -> anyhow::Result<Certificate> {
    Certificate::from_json(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn yes_no(accepted: bool) -> ExitCode {
    ExitCode::from(if accepted { 0 } else { 1 })
}

fn oracle_decides(g: &Graph, k: usize, hole_free: bool) -> anyhow::Result<bool> {
    let o = Oracle::default();
    let (yes, _) = if hole_free { o.is_hole_free_k_map(g, k)? } else { o.is_k_map(g, k)? };
    Ok(yes)
}

#[allow(clippy::too_many_arguments)]
fn cmd_recognize(
    graph: &Path,
    td: Option<&Path>,
    k: Option<usize>,
    hole_free: bool,
    certificate: Option<&Path>,
    oracle_check: bool,
    decision_only: bool,
) -> anyhow::Result<ExitCode> {
    let g = load_graph(graph)?;
    let td: Option<TreeDecomposition> = match td {
        Some(p) => Some(parse_td(&read(p)?, &g).with_context(|| format!("in {}", p.display()))?),
        None => None,
    };
    let mode = if decision_only { Mode::Decision } else { Mode::Certificate };
    let result: Option<(usize, Outcome)> = match k {
        Some(k) => {
            let out = recognize(&g, td.as_ref(), &RunOptions::new(k).hole_free(hole_free).mode(mode))?;
            out.accepted.then_some((k, out))
        }
        None => min_k(&g, td.as_ref(), hole_free, mode)?,
    };
    if let Some((_, out)) = &result {
        info!(
            "{} nodes, width {}, largest record {}, largest sketch {}",
            out.stats.nodes, out.stats.width, out.stats.max_record, out.stats.max_sketch_vertices
        );
    }
    if oracle_check {
        match (k, &result) {
            (Some(k), r) => {
                let o = oracle_decides(&g, k, hole_free)?;
                if o != r.is_some() {
                    bail!("oracle disagrees: oracle says {}", if o { "yes" } else { "no" });
                }
            }
            (None, Some((found, _))) => {
                if !oracle_decides(&g, *found, hole_free)? || (*found > 1 && oracle_decides(&g, found - 1, hole_free)?) {
                    bail!("oracle disagrees with minimum k = {found}");
                }
            }
            (None, None) => {
                let top = g.n().max(2);
                if oracle_decides(&g, top, hole_free)? {
                    bail!("oracle accepts k = {top}");
                }
            }
        }
    }
    match result {
        Some((k, out)) => {
            println!("YES k={k}");
            if let Some(path) = certificate {
                let w = out.witness.context("no witness was built")?;
                let c = Certificate::from_witness(&w, g.n(), k, hole_free)?;
                std::fs::write(path, c.to_json()).with_context(|| format!("cannot write {}", path.display()))?;
            }
            Ok(yes_no(true))
        }
        None => {
            println!("NO");
            Ok(yes_no(false))
        }
    }
}

fn cmd_verify(graph: &Path, witness: &Path, k: Option<usize>, hole_free: bool) -> anyhow::Result<ExitCode> {
    let g = load_graph(graph)?;
    let c = load_certificate(witness)?;
    let mut failure: Option<String> = None;
    if c.n != g.n() {
        failure = Some(format!("certificate has {} reals, graph has {} vertices", c.n, g.n()));
    }
    let w = c.to_witness()?;
    if failure.is_none() {
        let r = verify_witness(&g, &w);
        if !r.is_witness {
            failure = r.first_failure.or_else(|| Some("not a witness".into()));
        } else if let Some(k) = k.filter(|&k| r.max_intersection_degree > k) {
            failure = Some(format!("intersection of degree {} exceeds k = {k}", r.max_intersection_degree));
        } else if hole_free && !check_hole_free(&w) {
            failure = Some("witness is not a biconnected quadrangulation".into());
        }
    }
    match failure {
        None => {
            let compact = is_compact(&w) == Compactness::Compact;
            println!("VALID{}", if compact { " compact" } else { "" });
            Ok(yes_no(true))
        }
        Some(f) => {
            println!("INVALID: {f}");
            Ok(yes_no(false))
        }
    }
}

fn cmd_oracle(graph: &Path, k: usize, hole_free: bool) -> anyhow::Result<ExitCode> {
    let g = load_graph(graph)?;
    let yes = oracle_decides(&g, k, hole_free)?;
    println!("{}", if yes { format!("YES k={k}") } else { "NO".into() });
    Ok(yes_no(yes))
}

fn cmd_render(witness: &Path, output: &Path) -> anyhow::Result<ExitCode> {
    let w = load_certificate(witness)?.to_witness()?;
    let svg = render_svg(&w)?;
    std::fs::write(output, svg).with_context(|| format!("cannot write {}", output.display()))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Recognize {
            graph,
            td,
            k,
            min_k: _,
            hole_free,
            certificate,
            oracle_check,
            decision_only,
        } => cmd_recognize(&graph, td.as_deref(), k, hole_free, certificate.as_deref(), oracle_check, decision_only),
        Command::Verify {
            graph,
            witness,
            k,
            hole_free,
        } => cmd_verify(&graph, &witness, k, hole_free),
        Command::Oracle { graph, k, hole_free } => cmd_oracle(&graph, k, hole_free),
        Command::Render { witness, output } => cmd_render(&witness, &output),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

//! Command-line frontend.
//!
//! Subcommands: matroid | rankwidth | carving | hyperbw | oracle | verify.
//! Common flags: --k <int> --input <path> [--output <path>]
//! [--format postorder|edges|json] [--trace] [--cap <nodes>]
//! [--decomposition <path>] (verify only).
//!
//! Exit codes: 0 decomposition found / verified within k; 10 width exceeds
//! k (proven); 11 rejected by a frontend guard; 12 resource cap exceeded;
//! 2 input error.

use branchwidth::bdtree::DecTree;
use branchwidth::frontends::{
    self, arrangement_width_of, carving_width_of, hyper_width_of, rank_decomposition_width, solve,
    Reject,
};
use branchwidth::fullset::{Outcome, SolveError, DEFAULT_NODE_CAP};
use branchwidth::io::{emit, parse_decomposition, parse_input, Input, OutFormat};
use branchwidth::linalg::Mat;
use branchwidth::oracle::brute_branchwidth;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_INPUT: u8 = 2;
const EXIT_ABOVE_K: u8 = 10;
const EXIT_REJECTED: u8 = 11;
const EXIT_RESOURCE: u8 = 12;

struct Args {
    cmd: String,
    k: Option<usize>,
    input: Option<String>,
    output: Option<String>,
    format: OutFormat,
    trace: bool,
    cap: usize,
    decomposition: Option<String>,
    kind: Option<String>,
}

const USAGE: &str = "usage: branchwidth <matroid|rankwidth|carving|hyperbw|oracle|verify> \
--input <path> [--k <int>] [--output <path>] [--format postorder|edges|json] \
[--trace] [--cap <nodes>] [--decomposition <path>] [--kind <frontend>]";

fn parse_args() -> Result<Args, String> {
    let mut it = std::env::args().skip(1);
    let cmd = it.next().ok_or(USAGE)?;
    let mut args = Args {
        cmd,
        k: None,
        input: None,
        output: None,
        format: OutFormat::Postorder,
        trace: false,
        cap: DEFAULT_NODE_CAP,
        decomposition: None,
        kind: None,
    };
    while let Some(flag) = it.next() {
        let mut val = |name: &str| it.next().ok_or(format!("{name} needs a value"));
        match flag.as_str() {
            "--k" => args.k = Some(val("--k")?.parse().map_err(|_| "bad --k")?),
            "--input" => args.input = Some(val("--input")?),
            "--output" => args.output = Some(val("--output")?),
            "--format" => {
                args.format = OutFormat::parse(&val("--format")?).map_err(|e| e.to_string())?
            }
            "--trace" => args.trace = true,
            "--cap" => args.cap = val("--cap")?.parse().map_err(|_| "bad --cap")?,
            "--decomposition" => args.decomposition = Some(val("--decomposition")?),
            "--kind" => args.kind = Some(val("--kind")?),
            other => return Err(format!("unknown flag {other}\n{USAGE}")),
        }
    }
    Ok(args)
}

fn read(path: &str) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))
}

fn write_out(args: &Args, content: &str) -> Result<(), String> {
    match &args.output {
        Some(p) => std::fs::write(p, content).map_err(|e| format!("cannot write {p}: {e}")),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn reject_exit(r: &Reject) -> u8 {
    eprintln!("rejected: {r}");
    EXIT_REJECTED
}

fn run_solver(
    args: &Args,
    mat: &Mat,
    sizes: &[usize],
    k: usize,
    relabel: Option<&[usize]>,
) -> Result<Result<DecTree, u8>, String> {
    match solve(mat, sizes, k, args.cap, args.trace) {
        Ok((Outcome::Decomposition(t), stats)) => {
            if args.trace {
                for (round, rows) in &stats.trace {
                    for r in rows {
                        eprintln!(
                            "trace round={} comp={} kind={:?} base={} table={} max_nodes={}",
                            round, r.comp, r.kind, r.base_node, r.table_len, r.max_namu_nodes
                        );
                    }
                }
                eprintln!(
                    "trace dp_runs={} max_table={}",
                    stats.dp_runs, stats.max_table
                );
            }
            let t = match relabel {
                Some(map) => {
                    let labels: Vec<Option<usize>> =
                        (0..t.n()).map(|v| t.label(v).map(|p| map[p])).collect();
                    DecTree::from_edges(&t.edges(), labels)
                }
                None => t,
            };
            Ok(Ok(t))
        }
        Ok((Outcome::AboveK, _)) => Ok(Err(EXIT_ABOVE_K)),
        Err(SolveError::ResourceExceeded {
            base_node,
            needed,
            cap,
        }) => {
            eprintln!("resource cap exceeded at node {base_node}: need {needed}, cap {cap}");
            Ok(Err(EXIT_RESOURCE))
        }
        Err(e) => Err(e.to_string()),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run() -> Result<u8, String> {
    let args = parse_args().map_err(|e| e.to_string())?;
    let input_path = args.input.clone().ok_or("--input is required")?;
    let text = read(&input_path)?;
    let parsed = parse_input(&text).map_err(|e| e.to_string())?;

    match args.cmd.as_str() {
        "matroid" => {
            let k = args.k.ok_or("--k is required")?;
            let Input::Arrangement(_, mat, _) = parsed else {
                return Err("matroid expects an arrangement file (one part per column)".into());
            };
            let (m, sizes) = frontends::matroid_arrangement(&mat);
            match run_solver(&args, &m, &sizes, k, None)? {
                Ok(t) => {
                    write_out(&args, &emit(&t, args.format))?;
                    Ok(EXIT_OK)
                }
                Err(code) => Ok(code),
            }
        }
        "rankwidth" => {
            let k = args.k.ok_or("--k is required")?;
            let Input::Graph(g) = parsed else {
                return Err("rankwidth expects a graph file".into());
            };
            let (mat, sizes) = frontends::rankwidth_arrangement(&g);
            match run_solver(&args, &mat, &sizes, 2 * k, None)? {
                Ok(t) => {
                    write_out(&args, &emit(&t, args.format))?;
                    Ok(EXIT_OK)
                }
                Err(code) => Ok(code),
            }
        }
        "carving" => {
            let k = args.k.ok_or("--k is required")?;
            let Input::Graph(g) = parsed else {
                return Err("carving expects a graph file".into());
            };
            let (mat, sizes) = match frontends::carving_arrangement(&g, k) {
                Ok(x) => x,
                Err(r) => return Ok(reject_exit(&r)),
            };
            match run_solver(&args, &mat, &sizes, k, None)? {
                Ok(t) => {
                    write_out(&args, &emit(&t, args.format))?;
                    Ok(EXIT_OK)
                }
                Err(code) => Ok(code),
            }
        }
        "hyperbw" => {
            let k = args.k.ok_or("--k is required")?;
            let Input::Hypergraph(h) = parsed else {
                return Err("hyperbw expects a hypergraph file".into());
            };
            let red = match frontends::hypergraph_arrangement(&h, k) {
                Ok(x) => x,
                Err(r) => return Ok(reject_exit(&r)),
            };
            match run_solver(&args, &red.mat, &red.sizes, k, Some(&red.kept))? {
                Ok(t) => {
                    let full = frontends::reinsert_parallel(&t, &red.dupes);
                    write_out(&args, &emit(&full, args.format))?;
                    Ok(EXIT_OK)
                }
                Err(code) => Ok(code),
            }
        }
        "oracle" => {
            let Input::Arrangement(_, mat, sizes) = parsed else {
                return Err("oracle expects an arrangement file".into());
            };
            let a = branchwidth::arrangement::Arrangement::new(&mat, &sizes);
            let (w, t) = brute_branchwidth(&a).map_err(|e| e.to_string())?;
            let mut out = format!("width {w}\n");
            out.push_str(&emit(&t, args.format));
            write_out(&args, &out)?;
            match args.k {
                Some(k) if w > k => Ok(EXIT_ABOVE_K),
                _ => Ok(EXIT_OK),
            }
        }
        "verify" => {
            let k = args.k.ok_or("--k is required")?;
            let dpath = args
                .decomposition
                .clone()
                .ok_or("--decomposition is required")?;
            let t = parse_decomposition(&read(&dpath)?).map_err(|e| e.to_string())?;
            let kind = args.kind.clone().unwrap_or_else(|| "arrangement".into());
            let w = match (&parsed, kind.as_str()) {
                (Input::Arrangement(_, mat, sizes), "arrangement" | "matroid") => {
                    let (m2, s2) = if kind == "matroid" {
                        frontends::matroid_arrangement(mat)
                    } else {
                        (mat.clone(), sizes.clone())
                    };
                    arrangement_width_of(&m2, &s2, &t)
                }
                (Input::Graph(g), "rankwidth") => rank_decomposition_width(g, &t),
                (Input::Graph(g), "carving") => carving_width_of(g, &t),
                (Input::Hypergraph(h), "hyperbw") => hyper_width_of(h, &t),
                _ => return Err(format!("--kind {kind} does not match the input file")),
            };
            write_out(&args, &format!("width {w}\n"))?;
            if w <= k {
                Ok(EXIT_OK)
            } else {
                Ok(EXIT_ABOVE_K)
            }
        }
        other => Err(format!("unknown subcommand '{other}'\n{USAGE}")),
    }
}

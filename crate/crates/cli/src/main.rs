use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use fbc_core::classify::{ct_normal_form_check, Severity};
use fbc_core::decompose::{build_delta, display_letters};
use fbc_core::delta::parse_delta;
use fbc_core::nielsen::{analyze, fix_basis};
use fbc_core::oracle::oracle_fix_generators;
use fbc_core::torus::validate_pi1_bijectivity;
use fbc_core::verdict::{decide_detailed, Decision, VerdictError};
use fbc_core::witness::{branching_witness, BranchingWitness, WitnessError};
use fbc_core::{parse_graph_map, GraphMap, MarkedGraph};

/// Decide hierarchical hyperbolicity of free-by-cyclic groups given by
/// normal-form graph maps.
#[derive(Parser)]
#[command(name = "fbc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Graph-map file (`vertex`, `edge`, `map` lines).
    file: PathBuf,
    /// Analyse the M-fold composite of the map instead.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    power: u32,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the map and check the normal-form axioms.
    Validate(Input),
    /// Growth degree of every edge and the stratification.
    Classify(Input),
    /// Linear edges, Nielsen classes and fixed-subgroup ranks.
    Nielsen {
        #[command(flatten)]
        input: Input,
        /// Cross-check ranks against the brute-force search.
        #[arg(long)]
        oracle: bool,
        /// Loop length bound for the brute-force search.
        #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..))]
        max_len: u32,
    },
    /// Build the black/white graph of groups, or read one with --from-delta.
    Delta {
        /// Graph-map file.
        file: Option<PathBuf>,
        /// Read a graph of groups directly instead of building one.
        #[arg(long, conflicts_with = "file")]
        from_delta: Option<PathBuf>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        power: u32,
        #[arg(long)]
        json: bool,
        /// Write a Graphviz rendering to this path.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Keep low-valence black vertices and downgrade invariant
        /// violations to warnings.
        #[arg(long)]
        no_prune: bool,
    },
    /// The verdict.
    Decide {
        #[command(flatten)]
        input: Input,
        /// Exit with 0 for HHG and 3 otherwise.
        #[arg(long)]
        exit_verdict: bool,
        /// Report every axis with excessive linearity.
        #[arg(long)]
        all: bool,
    },
    /// Blocks and commuting pair showing that the answer is negative.
    Witness {
        #[command(flatten)]
        input: Input,
        /// One witness per axis with excessive linearity.
        #[arg(long)]
        all: bool,
    },
    /// Brute-force ranks of fixed subgroups at every vertex.
    Oracle {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..))]
        max_len: u32,
        /// Restrict to one vertex.
        #[arg(long)]
        vertex: Option<String>,
    },
}

/// An error that means the tool itself is wrong, not the input.
#[derive(Debug)]
struct Internal(String);

impl std::fmt::Display for Internal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Internal {}

fn internal(msg: impl Into<String>) -> anyhow::Error {
    Internal(msg.into()).into()
}

fn verdict_error(e: VerdictError) -> anyhow::Error {
    match e {
        VerdictError::InternalInconsistency(m) => internal(format!("internal inconsistency: {m}")),
        other => other.into(),
    }
}

fn witness_error(e: WitnessError) -> anyhow::Error {
    match e {
        WitnessError::CheckFailed(_) => internal(e.to_string()),
        other => other.into(),
    }
}

fn load(path: &Path, power: u32) -> Result<GraphMap> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let f = parse_graph_map(&text).with_context(|| format!("{}", path.display()))?;
    if power == 1 {
        return Ok(f);
    }
    f.power(power as usize)
        .with_context(|| format!("cannot form the {power}-fold composite"))
}

fn print_json(v: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(v).expect("JSON values serialize")
    );
}

fn names<T>(items: &[T], name: impl Fn(&T) -> String) -> Vec<String> {
    items.iter().map(name).collect()
}

fn validate(input: &Input) -> Result<u8> {
    let f = load(&input.file, input.power)?;
    let g = f.graph();
    let report = ct_normal_form_check(&f);
    let pi1 = validate_pi1_bijectivity(&f);
    if input.json {
        let diags: Vec<Value> = report
            .diagnostics
            .iter()
            .map(|d| json!({ "axiom": d.axiom, "severity": d.severity, "message": d.message }))
            .collect();
        print_json(&json!({
            "valid": report.passes() && pi1.passes(),
            "vertices": g.vertex_count(),
            "edges": g.edge_count(),
            "rank": g.rank(),
            "diagnostics": diags,
            "pi1": { "expected_rank": pi1.expected_rank, "image_rank": pi1.image_rank, "surjective": pi1.surjective },
        }));
    } else {
        println!(
            "{} vertices, {} edges, rank {}",
            g.vertex_count(),
            g.edge_count(),
            g.rank()
        );
        for d in &report.diagnostics {
            let sev = match d.severity {
                Severity::Note => "note",
                Severity::Soft => "warning",
                Severity::Hard => "error",
            };
            println!("{sev} [{}]: {}", d.axiom, d.message);
        }
        if !pi1.passes() {
            println!(
                "error [pi1-bijectivity]: images generate a subgroup of rank {} (expected {}), surjective: {}",
                pi1.image_rank, pi1.expected_rank, pi1.surjective
            );
        }
    }
    if !report.passes() || !pi1.passes() {
        let first = report
            .hard()
            .next()
            .map(|d| format!("[{}] {}", d.axiom, d.message))
            .unwrap_or_else(|| "[pi1-bijectivity] the map is not a homotopy equivalence".into());
        bail!("validation failed: {first}");
    }
    if !input.json {
        println!("valid");
    }
    Ok(0)
}

fn classify(input: &Input) -> Result<u8> {
    let f = load(&input.file, input.power)?;
    let g = f.graph();
    let report = ct_normal_form_check(&f);
    let Some(growth) = report.growth.as_ref().filter(|_| report.passes()) else {
        let first = report
            .hard()
            .next()
            .expect("failing report has a hard diagnostic");
        bail!("[{}] {}", first.axiom, first.message);
    };
    let strata: Vec<Vec<String>> = growth
        .filtration
        .strata
        .iter()
        .map(|s| names(s, |&e| g.edge_name(e).to_string()))
        .collect();
    let eg: Vec<Vec<String>> = growth
        .eg_strata
        .iter()
        .map(|&i| strata[i].clone())
        .collect();
    if input.json {
        let edges: serde_json::Map<String, Value> = g
            .edges()
            .map(|e| {
                (
                    g.edge_name(e).to_string(),
                    serde_json::to_value(growth.degree(e)).expect("serializes"),
                )
            })
            .collect();
        print_json(&json!({
            "edges": edges,
            "overall": growth.overall,
            "strata": strata,
            "eg_strata": eg,
        }));
    } else {
        println!("{:<12} {:>7} {:>8}", "edge", "degree", "stratum");
        for e in g.edges() {
            println!(
                "{:<12} {:>7} {:>8}",
                g.edge_name(e),
                growth.degree(e).to_string(),
                growth.filtration.stratum_of(e)
            );
        }
        println!("overall growth: {}", growth.overall);
        if !eg.is_empty() {
            println!("exponentially growing strata: {eg:?}");
        }
    }
    Ok(0)
}

fn nielsen(input: &Input, run_oracle: bool, max_len: u32) -> Result<u8> {
    let f = load(&input.file, input.power)?;
    let g = f.graph();
    let a = analyze(&f)?;
    let mut agree = true;
    let mut ranks = Vec::new();
    for v in g.vertices() {
        let rank = a.fix_rank(v);
        let oracle = run_oracle.then(|| oracle_fix_generators(&f, v, max_len as usize).rank);
        agree &= oracle.is_none_or(|o| o == rank);
        ranks.push((g.vertex_name(v).to_string(), rank, oracle));
    }
    if input.json {
        let linear: Vec<Value> = a
            .linear
            .iter()
            .map(|r| {
                json!({
                    "edge": g.dart_name(r.edge),
                    "root": r.root.display(g).to_string(),
                    "exponent": r.exponent,
                    "axis": r.axis.display(g),
                    "twist": r.twist,
                })
            })
            .collect();
        let classes: Vec<Value> = a
            .classes
            .iter()
            .map(|c| {
                json!({
                    "axis": c.axis.display(g),
                    "E": names(&c.edges, |&e| g.edge_name(e).to_string()),
                    "T": names(&c.high_rank_vertices, |&v| g.vertex_name(v).to_string()),
                    "rewritten": display_letters(g, &c.rewritten),
                })
            })
            .collect();
        let ranks: Vec<Value> = ranks
            .iter()
            .map(|(v, r, o)| json!({ "vertex": v, "fix_rank": r, "oracle_rank": o }))
            .collect();
        let mut out = json!({ "linear_edges": linear, "classes": classes, "ranks": ranks });
        if run_oracle {
            out["oracle_agrees"] = json!(agree);
            out["max_len"] = json!(max_len);
        }
        print_json(&out);
    } else {
        println!("linear edges:");
        for r in &a.linear {
            println!(
                "  {:<10} root {:<16} exponent {:>3}  axis {} (twist {})",
                g.dart_name(r.edge),
                r.root.display(g).to_string(),
                r.exponent,
                r.axis.display(g),
                r.twist
            );
        }
        println!("classes:");
        for c in &a.classes {
            println!(
                "  axis {}: E = {{{}}}, T = {{{}}}, rewritten {}",
                c.axis.display(g),
                names(&c.edges, |&e| g.edge_name(e).to_string()).join(", "),
                names(&c.high_rank_vertices, |&v| g.vertex_name(v).to_string()).join(", "),
                display_letters(g, &c.rewritten)
            );
        }
        println!("fixed-subgroup ranks:");
        for (v, r, o) in &ranks {
            match o {
                Some(o) => println!("  {v:<10} {r}  (search up to length {max_len}: {o})"),
                None => println!("  {v:<10} {r}"),
            }
        }
        if run_oracle {
            println!("oracle {}", if agree { "agrees" } else { "DISAGREES" });
        }
    }
    if !agree {
        return Err(internal(
            "fixed-subgroup ranks disagree with the brute-force search",
        ));
    }
    Ok(0)
}

fn delta(
    file: Option<&Path>,
    from_delta: Option<&Path>,
    power: u32,
    json_out: bool,
    dot: Option<&Path>,
    no_prune: bool,
) -> Result<u8> {
    let (d, notes) = match (file, from_delta) {
        (_, Some(p)) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            parse_delta(&text, !no_prune).with_context(|| format!("{}", p.display()))?
        }
        (Some(p), None) => {
            let f = load(p, power)?;
            let a = analyze(&f)?;
            let built = build_delta(&f, &a);
            (built.delta, built.notes)
        }
        (None, None) => bail!("give a graph-map file or --from-delta FILE"),
    };
    for n in &notes {
        eprintln!("note: {n}");
    }
    if let Some(path) = dot {
        fs::write(path, d.to_dot()).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let unbranched = d.unbranched();
    if json_out {
        let mut v = serde_json::to_value(&d).expect("delta graphs serialize");
        v["unbranched"] = json!(unbranched);
        v["max_black_valence"] = json!(d.max_black_valence());
        v["notes"] = json!(notes);
        print_json(&v);
    } else {
        print!("{}", d.to_text());
        println!(
            "# {} black, {} white, {} edges; max black valence {}; {}",
            d.black.len(),
            d.white.len(),
            d.edges.len(),
            d.max_black_valence(),
            if unbranched {
                "unbranched"
            } else {
                "not unbranched"
            }
        );
    }
    Ok(0)
}

/// Witnesses for the first (or every) excessive axis, each paired with the
/// graph its words live in.
fn witnesses(decision: &Decision, all: bool) -> Result<Vec<(MarkedGraph, BranchingWitness)>> {
    let mut out = Vec::new();
    for c in &decision.components {
        for (class, _) in &c.excessive {
            let w =
                branching_witness(&c.component.map, &c.analysis, *class).map_err(witness_error)?;
            out.push((c.component.map.graph().clone(), w));
            if !all {
                return Ok(out);
            }
        }
    }
    Ok(out)
}

fn decide(input: &Input, exit_verdict: bool, all: bool) -> Result<u8> {
    let f = load(&input.file, input.power)?;
    let d = decide_detailed(&f).map_err(verdict_error)?;
    let v = &d.verdict;
    let found = if v.hhg {
        Vec::new()
    } else {
        match witnesses(&d, all) {
            Ok(w) => w,
            Err(e) if e.downcast_ref::<Internal>().is_some() => return Err(e),
            Err(e) => {
                eprintln!("note: no witness constructed: {e:#}");
                Vec::new()
            }
        }
    };
    if input.json {
        let witness = found.first().map(|(g, w)| w.to_json(g));
        let mut out = v.to_json(witness);
        if all {
            let every: Vec<Value> = d
                .components
                .iter()
                .flat_map(|c| {
                    c.excessive
                        .iter()
                        .map(|(_, w)| serde_json::to_value(w).expect("serializes"))
                })
                .collect();
            out["all_excessive"] = json!(every);
            out["all_witnesses"] =
                json!(found.iter().map(|(g, w)| w.to_json(g)).collect::<Vec<_>>());
        }
        print_json(&out);
    } else {
        println!("{}", v.headline());
        println!("rank {}, growth {}", v.rank, v.growth);
        match &v.excessive {
            Some(w) => println!(
                "excessive linearity on axis {}: E = {{{}}}, T = {{{}}} (count {})",
                w.axis,
                w.edges.join(", "),
                w.vertices.join(", "),
                w.count()
            ),
            None => println!("no excessive linearity"),
        }
        if all {
            let every = d
                .components
                .iter()
                .flat_map(|c| c.excessive.iter().map(|(_, w)| w));
            for w in every.skip(1) {
                println!(
                    "also excessive on axis {}: E = {{{}}}, T = {{{}}}",
                    w.axis,
                    w.edges.join(", "),
                    w.vertices.join(", ")
                );
            }
        }
        println!(
            "unbranched {}, coarse median {}, quasicubical {}, no 2-RBF {}",
            v.unbranched, v.coarse_median, v.quasicubical, v.no_2rbf
        );
        for c in &v.caveats {
            println!("caveat: {c}");
        }
        for (g, w) in &found {
            print!("{}", w.display(g));
        }
    }
    Ok(if exit_verdict && !v.hhg { 3 } else { 0 })
}

fn witness(input: &Input, all: bool) -> Result<u8> {
    let f = load(&input.file, input.power)?;
    let d = decide_detailed(&f).map_err(verdict_error)?;
    if d.verdict.hhg {
        bail!("no excessive linearity, so there is no branching witness");
    }
    let found = witnesses(&d, all)?;
    if input.json {
        let items: Vec<Value> = found.iter().map(|(g, w)| w.to_json(g)).collect();
        print_json(&if all {
            json!(items)
        } else {
            items.into_iter().next().unwrap_or(Value::Null)
        });
    } else {
        for (g, w) in &found {
            print!("{}", w.display(g));
            println!("all commutation, independence and membership checks passed");
        }
    }
    Ok(0)
}

fn oracle(input: &Input, max_len: u32, vertex: Option<&str>) -> Result<u8> {
    let f = load(&input.file, input.power)?;
    let g = f.graph();
    let a = analyze(&f)?;
    let vertices: Vec<_> = match vertex {
        Some(name) => vec![g
            .vertex_id(name)
            .with_context(|| format!("unknown vertex `{name}`"))?],
        None => g.vertices().collect(),
    };
    let mut rows = Vec::new();
    let mut agree = true;
    for v in vertices {
        let rep = oracle_fix_generators(&f, v, max_len as usize);
        let expected = a.fix_rank(v);
        agree &= rep.rank == expected;
        rows.push((rep, expected, fix_basis(&f, &a, v)));
    }
    if input.json {
        let items: Vec<Value> = rows
            .iter()
            .map(|(rep, expected, basis)| {
                json!({
                    "vertex": g.vertex_name(rep.vertex),
                    "max_len": rep.max_len,
                    "loops_found": rep.loops_found,
                    "oracle_rank": rep.rank,
                    "fix_rank": expected,
                    "generators": rep.generators.iter().map(|p| p.display(g).to_string()).collect::<Vec<_>>(),
                    "basis": basis.iter().map(|p| p.display(g).to_string()).collect::<Vec<_>>(),
                })
            })
            .collect();
        print_json(&json!({ "agree": agree, "vertices": items }));
    } else {
        for (rep, expected, _) in &rows {
            println!(
                "{}: {} Nielsen loops up to length {}, folded rank {}, computed rank {}{}",
                g.vertex_name(rep.vertex),
                rep.loops_found,
                rep.max_len,
                rep.rank,
                expected,
                if rep.rank == *expected {
                    ""
                } else {
                    "  MISMATCH"
                }
            );
            for p in &rep.generators {
                println!("    {}", p.display(g));
            }
        }
    }
    if !agree {
        return Err(internal(
            "brute-force ranks disagree with the computed ranks",
        ));
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Validate(i) => validate(&i),
        Command::Classify(i) => classify(&i),
        Command::Nielsen {
            input,
            oracle,
            max_len,
        } => nielsen(&input, oracle, max_len),
        Command::Delta {
            file,
            from_delta,
            power,
            json,
            dot,
            no_prune,
        } => delta(
            file.as_deref(),
            from_delta.as_deref(),
            power,
            json,
            dot.as_deref(),
            no_prune,
        ),
        Command::Decide {
            input,
            exit_verdict,
            all,
        } => decide(&input, exit_verdict, all),
        Command::Witness { input, all } => witness(&input, all),
        Command::Oracle {
            input,
            max_len,
            vertex,
        } => oracle(&input, max_len, vertex.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.downcast_ref::<Internal>().is_some() {
                1
            } else {
                2
            })
        }
    }
}

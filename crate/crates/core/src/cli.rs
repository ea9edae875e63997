//! Command-line front end.

use std::fmt::Write as _;
use std::path::Path;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::cylinder::{self, CoherenceKind};
use crate::globset::{self, CoglobFamily};
use crate::theory::library::{self, generating_cofibrations, groupoidalize, standard_library};
use crate::theory::{Kind, Theory};
use crate::theta::{self, ThetaMap};
use crate::tree::{self, Tree};

#[derive(Parser, Debug)]
#[command(name = "globwb", version, about = "Trees, Θ, coherators and cylinders")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Graphviz output where available.
    #[arg(long, global = true)]
    dot: bool,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Refuse hom-set enumerations larger than this.
    #[arg(long, global = true, default_value_t = 200_000)]
    max_homs: u128,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Trees and tables of dimensions.
    Tree {
        #[command(subcommand)]
        op: TreeCmd,
    },
    /// The ordered set of one-leaf extensions of a tree.
    Lins { tree: String },
    /// Maps of Θ. Map literals are JSON, a JSON file, or `S->T#i` (the
    /// i-th element of hom(S,T)).
    Theta {
        #[command(subcommand)]
        op: ThetaCmd,
    },
    /// Coherators.
    Theory {
        #[command(subcommand)]
        op: TheoryCmd,
    },
    /// Cylinders.
    Cyl {
        #[command(subcommand)]
        op: CylCmd,
    },
    /// Property suites.
    Check {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 4)]
        max_nodes: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
}

#[derive(Subcommand, Debug)]
enum TreeCmd {
    Parse { tree: String },
    Table { tree: String },
    Dim { tree: String },
    Boundary { tree: String },
    Suspend { tree: String },
    Decompose { tree: String },
    /// All trees with the given number of nodes.
    Enumerate { nodes: usize },
}

#[derive(Subcommand, Debug)]
enum ThetaCmd {
    Hom {
        source: String,
        target: String,
        #[arg(long)]
        count: bool,
    },
    Compose { f: String, g: String },
    Factor { f: String },
    Filler { f: String, g: String },
    Admissible {
        f: String,
        g: String,
        #[arg(long, value_enum, default_value_t = KindArg::Groupoidal)]
        kind: KindArg,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Groupoidal,
    Categorical,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Kind {
        match k {
            KindArg::Groupoidal => Kind::Groupoidal,
            KindArg::Categorical => Kind::Categorical,
        }
    }
}

#[derive(clap::Args, Debug)]
struct TheoryArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, value_enum, default_value_t = KindArg::Categorical)]
    kind: KindArg,
    /// JSON theory specification file.
    #[arg(long)]
    spec: Option<String>,
}

#[derive(Subcommand, Debug)]
enum TheoryCmd {
    Build(TheoryArgs),
    Audit(TheoryArgs),
    Export(TheoryArgs),
    Systems(TheoryArgs),
    Groupoidalize(TheoryArgs),
    Cofibs {
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
}

#[derive(Subcommand, Debug)]
enum CylCmd {
    /// cyl(D_k), optionally with a collapsed 0-dimensional side.
    Present {
        k: usize,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        q: Option<usize>,
    },
    Boundary { k: usize },
    /// cyl(A) glued from globes, with the inclusions of 𝓛(A).
    GlobSum { tree: String },
    /// Stack of a homogeneous map D_k → A (map literal).
    Stack { map: String },
    Modification { k: usize },
    Coherence {
        #[arg(value_enum)]
        kind: CohArg,
        #[arg(value_delimiter = ',')]
        indices: Vec<usize>,
        level: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CohArg {
    Psi,
    Phi,
    Theta,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Suite {
    Lins,
    Hom,
    Laws,
    Hg,
    Bijff,
    Latching,
    Tower,
    Cyl,
    Stacks,
    All,
}

enum Fail {
    Usage(String),
    Domain(String),
}

impl<E: std::fmt::Display> From<E> for Fail {
    fn from(e: E) -> Fail {
        Fail::Domain(e.to_string())
    }
}

type R<T> = Result<T, Fail>;

enum Out {
    Text(String),
    Json(Value),
    Dot(String),
}

/// Runs the command line `argv` (including the program name) and returns
/// the exit code and the text written to stdout or stderr.
pub fn run<I, S>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return (code, e.render().to_string());
        }
    };
    match dispatch(&cli) {
        Ok(Out::Text(s)) => (0, s),
        Ok(Out::Json(v)) => (0, serde_json::to_string_pretty(&v).unwrap() + "\n"),
        Ok(Out::Dot(s)) => (0, s),
        Err(Fail::Usage(m)) => (2, format!("error: {m}\n")),
        Err(Fail::Domain(m)) => (1, format!("error: {m}\n")),
    }
}

fn parse_tree(s: &str) -> R<Tree> {
    Tree::parse_any(s).map_err(|e| Fail::Usage(format!("bad tree literal {s:?}: {e}")))
}

fn parse_map(s: &str, bound: u128) -> R<ThetaMap> {
    let t = s.trim();
    if t.starts_with('{') {
        let v: Value = serde_json::from_str(t).map_err(|e| Fail::Usage(format!("bad map JSON: {e}")))?;
        return Ok(ThetaMap::from_json(&v)?);
    }
    if let Some((lhs, idx)) = t.rsplit_once('#') {
        if let Some((a, b)) = lhs.split_once("->") {
            let (a, b) = (parse_tree(a)?, parse_tree(b)?);
            let i: usize = idx.trim().parse().map_err(|_| Fail::Usage(format!("bad index in {s:?}")))?;
            let hs = theta::hom_bounded(&a, &b, bound)?;
            let n = hs.len();
            return hs.into_iter().nth(i).ok_or_else(|| Fail::Domain(format!("hom({a},{b}) has {n} elements, no #{i}")));
        }
    }
    if Path::new(t).is_file() {
        let txt = std::fs::read_to_string(t)?;
        return parse_map(&txt, bound);
    }
    Err(Fail::Usage(format!("cannot read map literal {s:?}")))
}

fn theory_from(a: &TheoryArgs) -> R<Theory> {
    match &a.spec {
        Some(p) => {
            let txt = std::fs::read_to_string(p).map_err(|e| Fail::Usage(format!("{p}: {e}")))?;
            let v: Value = serde_json::from_str(&txt).map_err(|e| Fail::Usage(format!("{p}: {e}")))?;
            Ok(Theory::from_spec(&v)?)
        }
        None => Ok(standard_library(a.n, a.kind.into())?),
    }
}

fn dispatch(cli: &Cli) -> R<Out> {
    let text = |s: String| Ok(Out::Text(s));
    match &cli.cmd {
        Cmd::Tree { op } => {
            let (t, v, s): (Tree, Value, String) = match op {
                TreeCmd::Enumerate { nodes } => {
                    let ts = tree::trees_with_nodes(*nodes);
                    let lines: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
                    if cli.json {
                        return Ok(Out::Json(json!(lines)));
                    }
                    return text(lines.join("\n") + "\n");
                }
                TreeCmd::Parse { tree } => {
                    let t = parse_tree(tree)?;
                    (t.clone(), t.to_json(), t.to_string())
                }
                TreeCmd::Table { tree } => {
                    let t = parse_tree(tree)?;
                    let tab = t.table();
                    (t, json!({"tops": tab.tops, "joins": tab.joins}), tab.to_string())
                }
                TreeCmd::Dim { tree } => {
                    let t = parse_tree(tree)?;
                    let d = t.dim();
                    (t, json!(d), d.to_string())
                }
                TreeCmd::Boundary { tree } => {
                    let b = parse_tree(tree)?.boundary()?;
                    (b.clone(), json!(b.to_string()), b.to_string())
                }
                TreeCmd::Suspend { tree } => {
                    let b = parse_tree(tree)?.suspend();
                    (b.clone(), json!(b.to_string()), b.to_string())
                }
                TreeCmd::Decompose { tree } => {
                    let t = parse_tree(tree)?;
                    let parts: Vec<String> = t.decompose().iter().map(|x| x.to_string()).collect();
                    (t, json!(parts), parts.join(" v "))
                }
            };
            if cli.dot {
                Ok(Out::Dot(t.to_dot(None)))
            } else if cli.json {
                Ok(Out::Json(v))
            } else {
                text(s + "\n")
            }
        }
        Cmd::Lins { tree } => {
            let t = parse_tree(tree)?;
            let lin = t.linearization();
            if cli.json {
                let recs: Vec<Value> = lin
                    .iter()
                    .enumerate()
                    .map(|(i, x)| {
                        json!({
                            "index": i,
                            "tree": x.tree.to_string(),
                            "klass": x.klass.to_string(),
                            "case": x.klass.case(),
                            "sector": {"path": x.sector.path, "gap": x.sector.gap},
                            "source_degenerate": x.klass.source_degenerate(),
                            "target_degenerate": x.klass.target_degenerate(),
                        })
                    })
                    .collect();
                return Ok(Out::Json(json!(recs)));
            }
            if cli.dot {
                let mut s = String::new();
                for x in &lin {
                    s += &x.tree.to_dot(Some(&x.sector.new_leaf()));
                }
                return Ok(Out::Dot(s));
            }
            let mut s = String::new();
            for (i, x) in lin.iter().enumerate() {
                writeln!(s, "{i}\t{}\t{}", x.klass, x.tree).unwrap();
            }
            text(s)
        }
        Cmd::Theta { op } => theta_cmd(cli, op),
        Cmd::Theory { op } => theory_cmd(cli, op),
        Cmd::Cyl { op } => cyl_cmd(cli, op),
        Cmd::Check { suite, max_nodes, samples } => {
            let reports = run_suites(*suite, *max_nodes, *samples, cli.seed)?;
            let failed = reports.iter().any(|r| !r.failures.is_empty());
            let out = if cli.json {
                serde_json::to_string_pretty(&json!(reports
                    .iter()
                    .map(|r| json!({"suite": r.name, "checked": r.checked, "failures": r.failures}))
                    .collect::<Vec<_>>()))
                .unwrap()
                    + "\n"
            } else {
                let mut s = String::new();
                for r in &reports {
                    let tag = if r.failures.is_empty() { "ok" } else { "FAILED" };
                    writeln!(s, "{:<9} {tag:<7} {} checked", r.name, r.checked).unwrap();
                    for f in &r.failures {
                        writeln!(s, "  {f}").unwrap();
                    }
                }
                s
            };
            if failed {
                Err(Fail::Domain(format!("property suite failed\n{out}")))
            } else {
                text(out)
            }
        }
    }
}

fn theta_cmd(cli: &Cli, op: &ThetaCmd) -> R<Out> {
    let b = cli.max_homs;
    let show = |m: &ThetaMap| -> Out {
        if cli.json {
            Out::Json(m.to_json())
        } else {
            Out::Text(format!("{m}\n"))
        }
    };
    match op {
        ThetaCmd::Hom { source, target, count } => {
            let (s, t) = (parse_tree(source)?, parse_tree(target)?);
            if *count {
                let n = theta::hom_count(&s, &t);
                return Ok(if cli.json { Out::Json(json!(n.to_string())) } else { Out::Text(format!("{n}\n")) });
            }
            let hs = theta::hom_bounded(&s, &t, b)?;
            if cli.json {
                return Ok(Out::Json(json!(hs.iter().map(ThetaMap::to_json).collect::<Vec<_>>())));
            }
            let mut out = String::new();
            for (i, h) in hs.iter().enumerate() {
                let tag = if theta::is_homogeneous(h) { "h" } else if theta::is_globular(h) { "g" } else { "-" };
                writeln!(out, "#{i}\t{tag}\t{}", h.data).unwrap();
            }
            Ok(Out::Text(out))
        }
        ThetaCmd::Compose { f, g } => {
            let (f, g) = (parse_map(f, b)?, parse_map(g, b)?);
            Ok(show(&theta::compose(&f, &g)?))
        }
        ThetaCmd::Factor { f } => {
            let f = parse_map(f, b)?;
            let hg = theta::hg_factorize(&f);
            if cli.json {
                return Ok(Out::Json(json!({"homogeneous": hg.homogeneous.to_json(), "globular": hg.globular.to_json()})));
            }
            Ok(Out::Text(format!("homogeneous: {}\nglobular:    {}\n", hg.homogeneous, hg.globular)))
        }
        ThetaCmd::Filler { f, g } => {
            let (f, g) = (parse_map(f, b)?, parse_map(g, b)?);
            Ok(show(&theta::filler(&f, &g)?))
        }
        ThetaCmd::Admissible { f, g, kind } => {
            let (f, g) = (parse_map(f, b)?, parse_map(g, b)?);
            let ok = match Kind::from(*kind) {
                Kind::Groupoidal => theta::is_admissible_groupoidal(&f, &g)?,
                Kind::Categorical => theta::is_admissible_categorical(&f, &g)?,
            };
            Ok(if cli.json { Out::Json(json!(ok)) } else { Out::Text(format!("{ok}\n")) })
        }
    }
}

fn theory_cmd(cli: &Cli, op: &TheoryCmd) -> R<Out> {
    match op {
        TheoryCmd::Build(a) => {
            let th = theory_from(a)?;
            let counts = th.counts_by_stage();
            if cli.json {
                return Ok(Out::Json(json!({"n": th.n, "kind": th.kind.to_string(), "stages": counts})));
            }
            Ok(Out::Text(format!("{} theory, n = {}, symbols per stage {:?}\n", th.kind, th.n, counts)))
        }
        TheoryCmd::Audit(a) => {
            let th = theory_from(a)?;
            let rep = th.audit();
            let bad: Vec<String> = rep.iter().filter_map(|(n, r)| r.as_ref().err().map(|e| format!("{n}: {e}"))).collect();
            let summary = format!("{} symbols audited, {} failures\n", rep.len(), bad.len());
            if !bad.is_empty() {
                return Err(Fail::Domain(summary + &bad.join("\n")));
            }
            Ok(if cli.json { Out::Json(json!({"audited": rep.len(), "failures": bad})) } else { Out::Text(summary) })
        }
        TheoryCmd::Export(a) => Ok(Out::Json(theory_from(a)?.to_json())),
        TheoryCmd::Systems(a) => {
            let th = theory_from(a)?;
            if cli.json {
                return Ok(Out::Json(json!(th.systems)));
            }
            let mut s = String::new();
            for (k, v) in &th.systems {
                writeln!(s, "{k}: {}", v.join(" ")).unwrap();
            }
            Ok(Out::Text(s))
        }
        TheoryCmd::Groupoidalize(a) => {
            let th = groupoidalize(&theory_from(a)?)?;
            let (i, k, e) = library::inverse_counts(&th);
            if cli.json {
                return Ok(Out::Json(json!({"inverses": i, "k_operations": k, "k_equations": e, "theory": th.to_json()})));
            }
            Ok(Out::Text(format!("inverse symbols {i}, k-operations {k}, k-equations {e}\n")))
        }
        TheoryCmd::Cofibs { n } => {
            let c = generating_cofibrations(*n);
            if cli.json {
                let f = |v: &Vec<(String, globset::GlobMap)>| {
                    v.iter().map(|(n, m)| json!({"name": n, "map": m.to_json()})).collect::<Vec<_>>()
                };
                return Ok(Out::Json(json!({"I": f(&c.i), "J": f(&c.j)})));
            }
            let mut s = String::from("I:\n");
            for (n, _) in &c.i {
                writeln!(s, "  {n}").unwrap();
            }
            s += "J:\n";
            for (n, _) in &c.j {
                writeln!(s, "  {n}").unwrap();
            }
            Ok(Out::Text(s))
        }
    }
}

fn cyl_theory() -> R<Theory> {
    Ok(groupoidalize(&standard_library(3, Kind::Groupoidal)?)?)
}

fn computad_text(cx: &crate::theory::expr::Computad) -> String {
    let mut s = format!("counts {:?}\n", cx.counts());
    for g in cx.generators() {
        match &g.faces {
            None => writeln!(s, "  {} : {}-cell", g.name, g.dim).unwrap(),
            Some((a, b)) => writeln!(s, "  {} : {a} -> {b}", g.name).unwrap(),
        }
    }
    s
}

fn cyl_cmd(cli: &Cli, op: &CylCmd) -> R<Out> {
    let th = cyl_theory()?;
    match op {
        CylCmd::Present { k, p, q } => {
            let c = cylinder::degenerate_cyl(*k, *p, *q, &th)?;
            Ok(if cli.json { Out::Json(c.to_json()) } else { Out::Text(computad_text(&c.computad)) })
        }
        CylCmd::Boundary { k } => {
            let b = cylinder::boundary_cyl(*k, &th)?;
            if cli.json {
                return Ok(Out::Json(json!({"boundary": b.presentation.to_json(), "added": b.added})));
            }
            Ok(Out::Text(computad_text(&b.presentation.computad) + &format!("added {}\n", b.added.join(" "))))
        }
        CylCmd::GlobSum { tree } => {
            let g = cylinder::cyl_glob_sum(&parse_tree(tree)?, &th)?;
            let incl: Vec<Value> = g
                .inclusions
                .iter()
                .map(|(ins, m)| {
                    json!({
                        "klass": ins.klass.to_string(),
                        "tree": ins.tree.to_string(),
                        "cells": m.iter().map(|(k, e)| json!([cylinder::cell_name("", k), e.to_string()])).collect::<Vec<_>>(),
                    })
                })
                .collect();
            if cli.json {
                return Ok(Out::Json(json!({"presentation": cylinder::computad_json(&g.computad), "inclusions": incl})));
            }
            let mut s = computad_text(&g.computad);
            for (ins, m) in &g.inclusions {
                writeln!(s, "i_B for {} ({}):", ins.tree, ins.klass).unwrap();
                for (k, e) in m {
                    writeln!(s, "  {} -> {e}", cylinder::cell_name("", k)).unwrap();
                }
            }
            Ok(Out::Text(s))
        }
        CylCmd::Stack { map } => {
            let st = cylinder::stack(&parse_map(map, cli.max_homs)?)?;
            if cli.dot {
                return Ok(Out::Dot(st.to_dot()));
            }
            if cli.json {
                return Ok(Out::Json(st.to_json()));
            }
            let mut s = format!("top    {}\n", st.squares[0].top);
            for (i, q) in st.squares.iter().enumerate() {
                writeln!(s, "{i}: cyl{} {} [{} | {}]\n   -> {}", q.case, q.klass, q.left, q.right, q.bottom).unwrap();
            }
            Ok(Out::Text(s))
        }
        CylCmd::Modification { k } => {
            let m = cylinder::modification_presentation(*k, &th)?;
            if cli.json {
                return Ok(Out::Json(json!({"k": m.k, "presentation": cylinder::computad_json(&m.computad), "xi": m.xi, "data": m.data})));
            }
            Ok(Out::Text(computad_text(&m.computad)))
        }
        CylCmd::Coherence { kind, indices, level } => {
            let kind = match kind {
                CohArg::Psi => CoherenceKind::Psi,
                CohArg::Phi => CoherenceKind::Phi,
                CohArg::Theta => CoherenceKind::Theta,
            };
            let mut th = standard_library(3, Kind::Categorical)?;
            let p = cylinder::coherence_boundary(kind, indices, *level, &mut th)?;
            if cli.json {
                return Ok(Out::Json(json!({
                    "extension": p.extension,
                    "arity": p.first.target.to_string(),
                    "first": p.first.to_string(),
                    "second": p.second.to_string(),
                })));
            }
            Ok(Out::Text(format!("{}\n  first:  {}\n  second: {}\n", p.extension, p.first, p.second)))
        }
    }
}

/// Outcome of one property suite.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checked: usize,
    pub failures: Vec<String>,
}

fn run_suites(s: Suite, max_nodes: usize, samples: usize, seed: u64) -> R<Vec<SuiteReport>> {
    let all = [
        Suite::Lins,
        Suite::Hom,
        Suite::Laws,
        Suite::Hg,
        Suite::Bijff,
        Suite::Latching,
        Suite::Tower,
        Suite::Cyl,
        Suite::Stacks,
    ];
    let chosen: Vec<Suite> = if s == Suite::All { all.to_vec() } else { vec![s] };
    chosen.into_iter().map(|s| suite(s, max_nodes, samples, seed)).collect()
}

fn suite(s: Suite, max_nodes: usize, samples: usize, seed: u64) -> R<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut check = |ok: bool, what: String| {
        checked += 1;
        if !ok {
            failures.push(what);
        }
    };
    let trees = tree::trees_up_to(max_nodes);
    let name = match s {
        Suite::Lins => {
            for t in &trees {
                let lin = t.linearization();
                check(lin.len() == 2 * t.node_count() - 1, format!("{t}: |L| = {}", lin.len()));
                for x in &lin {
                    check(x.tree.node_count() == t.node_count() + 1, format!("{t}: {} is not a one-leaf extension", x.tree));
                }
            }
            "lins"
        }
        Suite::Hom => {
            for a in &trees {
                for b in &trees {
                    let n = theta::hom_count(a, b);
                    if n > 5000 {
                        continue;
                    }
                    let hs = theta::hom(a, b)?;
                    check(hs.len() as u128 == n, format!("hom({a},{b}): {} listed, {n} counted", hs.len()));
                }
            }
            "hom"
        }
        Suite::Laws => {
            let small: Vec<&Tree> = trees.iter().filter(|t| t.node_count() <= max_nodes.min(3)).collect();
            for a in &small {
                for b in &small {
                    for f in theta::hom(a, b)? {
                        let ida = ThetaMap::identity(a);
                        let idb = ThetaMap::identity(b);
                        check(theta::compose(&ida, &f)? == f && theta::compose(&f, &idb)? == f, format!("unit law at {f}"));
                        for c in &small {
                            for g in theta::hom(b, c)? {
                                let fg = theta::compose(&f, &g)?;
                                for d in &small {
                                    for h in theta::hom(c, d)? {
                                        let l = theta::compose(&fg, &h)?;
                                        let r = theta::compose(&f, &theta::compose(&g, &h)?)?;
                                        check(l == r, format!("associativity at {f}; {g}; {h}"));
                                    }
                                }
                            }
                        }
                    }
                }
            }
            "laws"
        }
        Suite::Hg => {
            for a in &trees {
                for b in &trees {
                    if theta::hom_count(a, b) > 2000 {
                        continue;
                    }
                    for f in theta::hom(a, b)? {
                        let hg = theta::hg_factorize(&f);
                        let trivial = hg.globular == ThetaMap::identity(b);
                        let ok = theta::compose(&hg.homogeneous, &hg.globular)? == f
                            && theta::is_homogeneous(&hg.homogeneous)
                            && theta::is_globular(&hg.globular)
                            && theta::is_homogeneous(&f) == trivial;
                        check(ok, format!("factorization of {f}"));
                    }
                }
            }
            "hg"
        }
        Suite::Bijff => {
            for m in 0..=3 {
                let mut done = 0;
                let mut tries = 0;
                while done < samples && tries < samples * 50 {
                    tries += 1;
                    let x = globset::random_globset(&mut rng, 3, 3);
                    let y = globset::random_globset(&mut rng, 3, 3);
                    let Some(f) = globset::random_map(&mut rng, &x, &y, 64) else { continue };
                    done += 1;
                    let (i, p) = globset::factor_bij_ff(&f, m);
                    let comp = i.then(&p).map(|c| c.f == f.f).unwrap_or(false);
                    check(comp, format!("m={m}: factorization does not compose back"));
                    check(globset::classify(&i, m).0, format!("m={m}: left factor not bijective"));
                    check(globset::classify(&p, m).1, format!("m={m}: right factor not fully faithful"));
                }
            }
            "bijff"
        }
        Suite::Latching => {
            let fam = CoglobFamily::globes(5);
            for m in 1..=4 {
                let l = globset::latching(&fam, m)?;
                let s = globset::sphere(m as isize - 1);
                check(globset::find_iso(&l.apex.padded(s.dims()), &s).is_some(), format!("latching at {m}"));
            }
            for t in tree::trees_up_to(max_nodes.max(6)) {
                if t.node_count() < 2 {
                    continue;
                }
                let b = t.boundary()?;
                check(b.dim() + 1 == t.dim() || (t.dim() == 0), format!("{t}: boundary {b}"));
                check(b.node_count() <= t.node_count(), format!("{t}: boundary {b} grew"));
            }
            "latching"
        }
        Suite::Tower => {
            let th = standard_library(3, Kind::Categorical)?;
            for (n, r) in th.audit() {
                check(r.is_ok(), format!("{n}: {r:?}"));
            }
            let g = groupoidalize(&standard_library(3, Kind::Groupoidal)?)?;
            check(library::inverse_counts(&g) == (6, 4, 2), format!("inverse counts {:?}", library::inverse_counts(&g)));
            let globes: Vec<Tree> = tree::trees_up_to(3);
            let mut done = 0;
            let mut tries = 0;
            while done < samples && tries < samples * 40 {
                tries += 1;
                use rand::seq::SliceRandom;
                let a = globes.choose(&mut rng).unwrap();
                let b = globes.choose(&mut rng).unwrap();
                let c = globes.choose(&mut rng).unwrap();
                let Some(t) = library::random_term(&th, &mut rng, a, b, 2) else { continue };
                let Some(u) = library::random_term(&th, &mut rng, b, c, 2) else { continue };
                done += 1;
                let tu = th.substitute(&t, &u)?;
                let l = th.eval_theta(&tu)?;
                let r = theta::compose(&th.eval_theta(&t)?, &th.eval_theta(&u)?)?;
                check(l == r, format!("eval_theta({t} ; {u})"));
            }
            "tower"
        }
        Suite::Cyl => {
            let th = cyl_theory()?;
            let want = [vec![2, 1], vec![4, 4, 1], vec![4, 6, 4, 1]];
            for (k, w) in want.iter().enumerate() {
                let c = cylinder::cyl_presentation(k, &th)?;
                check(&c.computad.counts() == w, format!("cyl(D_{k}) counts {:?}", c.computad.counts()));
                let g = cylinder::cyl_glob_sum(&Tree::globe(k), &th)?;
                check(cylinder::find_presentation_iso(&g.computad, &c.computad).is_some(), format!("glob sum at D_{k}"));
            }
            let b = cylinder::boundary_cyl(1, &th)?;
            check(b.presentation.computad.counts() == vec![4, 4], "boundary of cyl(D_1)".into());
            "cyl"
        }
        Suite::Stacks => {
            for t in tree::trees_up_to(max_nodes + 1) {
                if t.dim() > 2 || t.dim() == 0 || t.leaf_count() > 5 {
                    continue;
                }
                for rho in theta::hom(&Tree::globe(2), &t)?.into_iter().filter(theta::is_homogeneous) {
                    let r = cylinder::stack(&rho).and_then(|st| cylinder::check_restriction(&st, false).and(cylinder::check_restriction(&st, true)));
                    check(r.is_ok(), format!("stack of {rho}: {:?}", r.err()));
                }
            }
            "stacks"
        }
        Suite::All => unreachable!(),
    };
    Ok(SuiteReport { name, checked, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn go(args: &[&str]) -> (i32, String) {
        run(std::iter::once("globwb").chain(args.iter().copied()))
    }

    #[test]
    fn table_example() {
        assert_eq!(go(&["tree", "table", "[[[][]][]]"]), (0, "(2,2,1;1,0)\n".into()));
    }

    #[test]
    fn hom_count_example() {
        assert_eq!(go(&["theta", "hom", "D2", "D2", "--count"]), (0, "5\n".into()));
    }

    #[test]
    fn lins_json() {
        let (c, out) = go(&["lins", "[[[][]][]]", "--json"]);
        assert_eq!(c, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 9);
        assert_eq!(out, go(&["lins", "[[[][]][]]", "--json"]).1);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(go(&["tree", "dim", "[[]"]).0, 2);
        assert_eq!(go(&["tree", "frobnicate"]).0, 2);
        assert_eq!(go(&["--bogus", "tree", "dim", "[]"]).0, 2);
        assert_eq!(go(&["tree", "boundary", "[]"]).0, 1);
        assert_eq!(go(&["cyl", "present", "7"]).0, 1);
    }

    #[test]
    fn map_literals() {
        let (c, out) = go(&["theta", "compose", "D1->D2#1", "D2->D2#0"]);
        assert_eq!(c, 0, "{out}");
        let (c, _) = go(&["theta", "factor", "D1->[[][]]#2", "--json"]);
        assert_eq!(c, 0);
        assert_eq!(go(&["theta", "factor", "D1->D1#99"]).0, 1);
    }
}

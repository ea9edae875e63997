//! Cylinders: presentations of `cyl(D_k)`, its boundary, degenerate and
//! modification variants, boundaries of coherence cylinders, and the stack
//! of squares attached to a homogeneous operation `ρ: D_k → A`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::globset::{self, GlobMap};
use crate::theta::{self, ThetaError, ThetaMap};
use crate::theory::expr::{rename_expr, Computad, Ctx, Expr, Generator};
use crate::theory::library::{gamma_arity, gamma_op, whisker_arity, wl, wr};
use crate::theory::{leaf_cell, Op, Term, Theory, TheoryError};
use crate::tree::{CellKey, Insertion, Klass, Sector, Tree, TreeError};

#[derive(Debug, Error)]
pub enum CylError {
    #[error("out of range: {0}")]
    Range(String),
    #[error("not homogeneous: {0}")]
    NotHomogeneous(String),
    #[error("adjacent cylinders do not match: {0}")]
    Adjacency(String),
    #[error("ill-typed: {0}")]
    Type(String),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

pub type CRes<T> = Result<T, CylError>;

/// A finite presentation of a cylinder-like object over a theory.
#[derive(Clone, Debug, PartialEq)]
pub struct CylPresentation {
    pub k: usize,
    pub computad: Computad,
    /// Images of the cells of `D_k` under `ι₀` and `ι₁`, by dimension,
    /// source before target.
    pub iota: [Vec<Vec<String>>; 2],
    /// Generators outside the two copies of `D_k`.
    pub fillers: Vec<String>,
}

fn globe_name(prefix: &str, k: usize, i: usize, target: bool) -> String {
    if i == k {
        prefix.to_string()
    } else {
        format!("{prefix}{i}{}", if target { 't' } else { 's' })
    }
}

fn add_globe(cx: &mut Computad, th: &Theory, prefix: &str, k: usize) -> CRes<Vec<Vec<String>>> {
    let mut out = Vec::new();
    for i in 0..=k {
        let sides: &[bool] = if i == k { &[false] } else { &[false, true] };
        let mut row = Vec::new();
        for &t in sides {
            let name = globe_name(prefix, k, i, t);
            if i == 0 {
                cx.add_point(&name)?;
            } else {
                let s = Expr::gen(&globe_name(prefix, k, i - 1, false));
                let u = Expr::gen(&globe_name(prefix, k, i - 1, true));
                cx.add_cell(th, &name, s, u)?;
            }
            row.push(name);
        }
        out.push(row);
    }
    Ok(out)
}

/// A `j`-cylinder `p ↷ q` inside the hom at depth `d`.
fn cyl_rec(cx: &mut Computad, th: &Theory, d: usize, j: usize, p: Expr, q: Expr, fillers: &mut Vec<String>) -> CRes<()> {
    if j == 0 {
        let name = format!("F{d}");
        cx.add_cell(th, &name, p, q)?;
        fillers.push(name);
        return Ok(());
    }
    let (ps, qs, pt, qt) = {
        let c = Ctx::new(th, cx);
        (c.face_to(&p, d, false)?, c.face_to(&q, d, false)?, c.face_to(&p, d, true)?, c.face_to(&q, d, true)?)
    };
    let (ns, nt) = (format!("F{d}s"), format!("F{d}t"));
    let fs = cx.add_cell(th, &ns, ps, qs)?;
    let ft = cx.add_cell(th, &nt, pt, qt)?;
    fillers.push(ns);
    fillers.push(nt);
    let (p2, q2) = {
        let c = Ctx::new(th, cx);
        (c.sym(&wr(d, j), vec![p, ft])?, c.sym(&wl(d, j), vec![fs, q])?)
    };
    cyl_rec(cx, th, d + 1, j - 1, p2, q2, fillers)
}

/// `cyl(D_k)`: top cells `A`, `B`, side cells `F{d}s`, `F{d}t` at each
/// depth `d < k`, and the filler `F{k}`.
pub fn cyl_presentation(k: usize, th: &Theory) -> CRes<CylPresentation> {
    if k > 3 || k > th.n {
        return Err(CylError::Range(format!("cylinders of dimension {k} over a {}-truncated theory", th.n)));
    }
    let mut cx = Computad::new();
    let ia = add_globe(&mut cx, th, "A", k)?;
    let ib = add_globe(&mut cx, th, "B", k)?;
    let mut fillers = Vec::new();
    cyl_rec(&mut cx, th, 0, k, Expr::gen("A"), Expr::gen("B"), &mut fillers)?;
    Ok(CylPresentation { k, computad: cx, iota: [ia, ib], fillers })
}

/// Union of presentations along generators of equal name; identified
/// generators must agree on dimension and boundary.
pub fn glue(parts: &[&Computad], th: &Theory) -> CRes<Computad> {
    let mut all: Vec<&Generator> = parts.iter().flat_map(|c| c.generators()).collect();
    all.sort_by_key(|g| g.dim);
    let mut out = Computad::new();
    for g in all {
        match out.get(&g.name) {
            Some(h) if h == g => {}
            Some(h) => {
                return Err(CylError::Type(format!("identified generators {} disagree: {:?} vs {:?}", g.name, h.faces, g.faces)))
            }
            None => {
                out.add_generator(g.clone())?;
            }
        }
    }
    check_computad(&out, th)?;
    Ok(out)
}

/// Every generator boundary type-checks and is parallel.
pub fn check_computad(cx: &Computad, th: &Theory) -> CRes<()> {
    let c = Ctx::new(th, cx);
    for g in cx.generators() {
        if let Some((s, t)) = &g.faces {
            c.check(s)?;
            c.check(t)?;
            if c.dim(s)? + 1 != g.dim {
                return Err(CylError::Type(format!("{}: boundary of the wrong dimension", g.name)));
            }
            c.parallel(s, t).map_err(|e| CylError::Type(format!("{}: {e}", g.name)))?;
        }
    }
    Ok(())
}

fn face_copy_name(name: &str, k: usize, target: bool) -> String {
    let e = if target { 't' } else { 's' };
    if name == "A" || name == "B" {
        format!("{name}{}{e}", k - 1)
    } else if name == format!("F{}", k - 1) {
        format!("F{}{e}", k - 1)
    } else {
        name.to_string()
    }
}

/// `∂cyl(D_k)` as the pushout of `cyl(S^{k−1})` and `D_k ∐ D_k`, with the
/// generators its inclusion into `cyl(D_k)` adds.
#[derive(Clone, Debug)]
pub struct BoundaryCyl {
    pub presentation: CylPresentation,
    pub added: Vec<String>,
}

pub fn boundary_cyl(k: usize, th: &Theory) -> CRes<BoundaryCyl> {
    if k == 0 {
        return Err(CylError::Range("cyl(D_0) has empty boundary data".into()));
    }
    let full = cyl_presentation(k, th)?;
    let lower = cyl_presentation(k - 1, th)?;
    let s = lower.computad.rename(&|n| face_copy_name(n, k, false));
    let t = lower.computad.rename(&|n| face_copy_name(n, k, true));
    let mut globes = Computad::new();
    add_globe(&mut globes, th, "A", k)?;
    add_globe(&mut globes, th, "B", k)?;
    let glued = glue(&[&s, &t, &globes], th)?;
    for g in glued.generators() {
        if full.computad.get(&g.name) != Some(g) {
            return Err(CylError::Type(format!("{} is not a generator of cyl(D_{k})", g.name)));
        }
    }
    let added: Vec<String> =
        full.computad.generators().iter().filter(|g| glued.get(&g.name).is_none()).map(|g| g.name.clone()).collect();
    let fillers = full.fillers.iter().filter(|n| !added.contains(n)).cloned().collect();
    Ok(BoundaryCyl { presentation: CylPresentation { k, computad: glued, iota: full.iota.clone(), fillers }, added })
}

pub fn subst_expr(e: &Expr, m: &HashMap<String, Expr>) -> Expr {
    match e {
        Expr::Gen(n) => m.get(n).cloned().unwrap_or_else(|| e.clone()),
        Expr::Sym { sym, args } => Expr::Sym { sym: sym.clone(), args: args.iter().map(|a| subst_expr(a, m)).collect() },
        Expr::Theta { map, args } => Expr::Theta { map: map.clone(), args: args.iter().map(|a| subst_expr(a, m)).collect() },
        Expr::Opaque { label, dim, src, tgt } => Expr::Opaque {
            label: label.clone(),
            dim: *dim,
            src: Box::new(subst_expr(src, m)),
            tgt: Box::new(subst_expr(tgt, m)),
        },
    }
}

fn is_identity(e: &Expr) -> bool {
    matches!(e, Expr::Sym { sym, .. } if sym.starts_with("id") && sym[2..].parse::<usize>().is_ok())
}

fn is_comp(sym: &str) -> bool {
    sym.starts_with('c') && sym[1..].parse::<usize>().is_ok()
}

/// Absorbs identities in compositions and in whiskerings by 1-cells.
pub fn strip_units(e: &Expr) -> Expr {
    match e {
        Expr::Sym { sym, args } => {
            let args: Vec<Expr> = args.iter().map(strip_units).collect();
            if args.len() == 2 {
                if is_comp(sym) {
                    if is_identity(&args[0]) {
                        return args[1].clone();
                    }
                    if is_identity(&args[1]) {
                        return args[0].clone();
                    }
                }
                if sym.starts_with("wl0_") && is_identity(&args[0]) {
                    return args[1].clone();
                }
                if sym.starts_with("wr0_") && is_identity(&args[1]) {
                    return args[0].clone();
                }
            }
            Expr::Sym { sym: sym.clone(), args }
        }
        Expr::Opaque { label, dim, src, tgt } => {
            Expr::Opaque { label: label.clone(), dim: *dim, src: Box::new(strip_units(src)), tgt: Box::new(strip_units(tgt)) }
        }
        _ => e.clone(),
    }
}

fn rebuild(cx: &Computad, th: &Theory, m: &HashMap<String, Expr>, f: &dyn Fn(&Expr) -> Expr) -> CRes<Computad> {
    let mut out = Computad::new();
    for g in cx.generators() {
        if m.contains_key(&g.name) {
            continue;
        }
        match &g.faces {
            None => {
                out.add_point(&g.name)?;
            }
            Some((s, t)) => {
                out.add_cell(th, &g.name, f(&subst_expr(s, m)), f(&subst_expr(t, m)))?;
            }
        }
    }
    Ok(out)
}

/// `cyl^p_q(D_k)`: the 0-dimensional source (`p = Some(0)`) and/or target
/// (`q = Some(0)`) side collapsed to an identity.
pub fn degenerate_cyl(k: usize, p: Option<usize>, q: Option<usize>, th: &Theory) -> CRes<CylPresentation> {
    let full = cyl_presentation(k, th)?;
    let mut m = HashMap::new();
    for (x, target) in [(p, false), (q, true)] {
        let Some(x) = x else { continue };
        if x >= k {
            return Err(CylError::Range(format!("degeneracy index {x} for a {k}-cylinder")));
        }
        if x > 0 {
            return Err(CylError::Range(format!("collapsing the {x}-dimensional side is not supported")));
        }
        let e = if target { 't' } else { 's' };
        let a = Expr::gen(&format!("A0{e}"));
        m.insert(format!("B0{e}"), a.clone());
        m.insert(format!("F0{e}"), Expr::Sym { sym: "id0".into(), args: vec![a] });
    }
    let cx = rebuild(&full.computad, th, &m, &strip_units)?;
    let keep = |v: &Vec<Vec<String>>| -> Vec<Vec<String>> {
        v.iter()
            .map(|row| {
                row.iter()
                    .map(|n| match m.get(n) {
                        Some(Expr::Gen(g)) => g.clone(),
                        _ => n.clone(),
                    })
                    .collect()
            })
            .collect()
    };
    let fillers = full.fillers.iter().filter(|n| !m.contains_key(*n)).cloned().collect();
    Ok(CylPresentation { k, computad: cx, iota: [keep(&full.iota[0]), keep(&full.iota[1])], fillers })
}

pub fn cell_name(prefix: &str, c: &CellKey) -> String {
    let p: Vec<String> = c.path.iter().map(|x| x.to_string()).collect();
    format!("{prefix}[{}:{}]", p.join(","), c.gap)
}

fn root(v: usize) -> CellKey {
    CellKey { path: vec![], gap: v }
}

fn key(path: &[usize], gap: usize) -> CellKey {
    CellKey { path: path.to_vec(), gap }
}

fn face_key(c: &CellKey, i: usize, target: bool) -> CellKey {
    let mut x = c.clone();
    while x.dim() > i {
        let mut p = x.path.clone();
        let last = p.pop().unwrap();
        x = CellKey { path: p, gap: if target { last + 1 } else { last } };
    }
    x
}

/// `cyl(A)` as a colimit of the cylinders on the globes of `A`, with the
/// structural maps `i_B: B → cyl(A)` for `B ∈ 𝓛(A)`.
#[derive(Clone, Debug)]
pub struct GlobSumCyl {
    pub tree: Tree,
    pub computad: Computad,
    pub inclusions: Vec<(Insertion, BTreeMap<CellKey, Expr>)>,
}

pub fn cyl_glob_sum(a: &Tree, th: &Theory) -> CRes<GlobSumCyl> {
    if a.dim() > 2 {
        return Err(CylError::Range(format!("cyl of a globular sum of dimension {}", a.dim())));
    }
    let mut parts = Vec::new();
    for path in a.leaf_paths() {
        let h = path.len();
        let top = key(&path, 0);
        let lower = cyl_presentation(h, th)?;
        let mut m: HashMap<String, String> = HashMap::new();
        for i in 0..=h {
            let sides: &[bool] = if i == h { &[false] } else { &[false, true] };
            for &t in sides {
                let c = face_key(&top, i, t);
                for (from, to) in [("A", "U"), ("B", "V")] {
                    m.insert(globe_name(from, h, i, t), cell_name(to, &c));
                }
                let f = if i == h { format!("F{i}") } else { format!("F{i}{}", if t { 't' } else { 's' }) };
                m.insert(f, cell_name("F", &c));
            }
        }
        parts.push(lower.computad.rename(&|n| m[n].clone()));
    }
    let refs: Vec<&Computad> = parts.iter().collect();
    let computad = glue(&refs, th)?;
    let mut inclusions = Vec::new();
    for ins in a.linearization() {
        let cells = include_map(&ins)?;
        let c = Ctx::new(th, &computad);
        for (y, e) in &cells {
            c.check(e).map_err(|err| CylError::Type(format!("i_B at {y:?}: {err}")))?;
            if y.dim() > 0 {
                for t in [false, true] {
                    let fy = face_key(y, y.dim() - 1, t);
                    if c.face(e, t)? != cells[&fy] {
                        return Err(CylError::Type(format!("i_B does not commute with faces at {y:?}")));
                    }
                }
            }
        }
        inclusions.push((ins, cells));
    }
    Ok(GlobSumCyl { tree: a.clone(), computad, inclusions })
}

fn gen_of(prefix: &str, c: &CellKey) -> Expr {
    Expr::Gen(cell_name(prefix, c))
}

fn sym2(s: &str, a: Expr, b: Expr) -> Expr {
    Expr::Sym { sym: s.into(), args: vec![a, b] }
}

fn include_map(ins: &Insertion) -> CRes<BTreeMap<CellKey, Expr>> {
    let b = &ins.tree;
    let s = &ins.sector;
    let (u, v, f) = (|c: &CellKey| gen_of("U", c), |c: &CellKey| gen_of("V", c), |c: &CellKey| gen_of("F", c));
    let mut out = BTreeMap::new();
    for y in b.cells().into_iter().flatten() {
        let e = match s.path.len() {
            0 => {
                let g = s.gap;
                if y.path.is_empty() {
                    if y.gap <= g {
                        u(&root(y.gap))
                    } else {
                        v(&root(y.gap - 1))
                    }
                } else if y.path[0] < g {
                    u(&y)
                } else if y.path[0] == g {
                    f(&root(g))
                } else {
                    let mut p = y.path.clone();
                    p[0] -= 1;
                    v(&key(&p, y.gap))
                }
            }
            1 => {
                let (c, g) = (s.path[0], s.gap);
                if y.path.is_empty() {
                    if y.gap <= c {
                        u(&y)
                    } else {
                        v(&y)
                    }
                } else if y.path[0] < c {
                    u(&y)
                } else if y.path[0] > c {
                    v(&y)
                } else if y.path.len() == 1 {
                    let j = y.gap;
                    if j <= g {
                        sym2("c1", u(&key(&[c], j)), f(&root(c + 1)))
                    } else {
                        sym2("c1", f(&root(c)), v(&key(&[c], j - 1)))
                    }
                } else {
                    let r = y.path[1];
                    if r < g {
                        sym2("wr0_2", u(&key(&[c, r], 0)), f(&root(c + 1)))
                    } else if r == g {
                        f(&key(&[c], g))
                    } else {
                        sym2("wl0_2", f(&root(c)), v(&key(&[c, r - 1], 0)))
                    }
                }
            }
            2 => {
                let (c, r) = (s.path[0], s.path[1]);
                if y.path.is_empty() {
                    if y.gap <= c {
                        u(&y)
                    } else {
                        v(&y)
                    }
                } else if y.path[0] < c {
                    u(&y)
                } else if y.path[0] > c {
                    v(&y)
                } else if y.path.len() == 1 {
                    if y.gap <= r {
                        sym2("c1", u(&y), f(&root(c + 1)))
                    } else {
                        sym2("c1", f(&root(c)), v(&y))
                    }
                } else if y.path.len() == 2 {
                    let rr = y.path[1];
                    let yy = key(&[c, rr], 0);
                    if rr < r {
                        sym2("wr0_2", u(&yy), f(&root(c + 1)))
                    } else if rr > r {
                        sym2("wl0_2", f(&root(c)), v(&yy))
                    } else if y.gap == 0 {
                        sym2("c2", sym2("wr0_2", u(&yy), f(&root(c + 1))), f(&key(&[c], r + 1)))
                    } else {
                        sym2("c2", f(&key(&[c], r)), sym2("wl0_2", f(&root(c)), v(&yy)))
                    }
                } else {
                    f(&key(&[c, r], 0))
                }
            }
            h => return Err(CylError::Range(format!("insertion at height {}", h + 1))),
        };
        out.insert(y, e);
    }
    Ok(out)
}

/// A renaming `x → y` of generators that is an isomorphism of
/// presentations, found by backtracking.
pub fn find_presentation_iso(x: &Computad, y: &Computad) -> Option<HashMap<String, String>> {
    if x.counts() != y.counts() {
        return None;
    }
    let mut xs: Vec<&Generator> = x.generators().iter().collect();
    xs.sort_by_key(|g| g.dim);
    fn bt(i: usize, xs: &[&Generator], y: &Computad, m: &mut HashMap<String, String>, used: &mut HashSet<String>) -> bool {
        if i == xs.len() {
            return true;
        }
        let g = xs[i];
        for h in y.generators() {
            if h.dim != g.dim || used.contains(&h.name) {
                continue;
            }
            let ok = match (&g.faces, &h.faces) {
                (None, None) => true,
                (Some((a, b)), Some((c, d))) => {
                    let r = |n: &str| m.get(n).cloned().unwrap_or_else(|| format!("?{n}"));
                    rename_expr(a, &r) == *c && rename_expr(b, &r) == *d
                }
                _ => false,
            };
            if ok {
                m.insert(g.name.clone(), h.name.clone());
                used.insert(h.name.clone());
                if bt(i + 1, xs, y, m, used) {
                    return true;
                }
                m.remove(&g.name);
                used.remove(&h.name);
            }
        }
        false
    }
    let mut m = HashMap::new();
    bt(0, &xs, y, &mut m, &mut HashSet::new()).then_some(m)
}

/// Which coherence cylinder.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoherenceKind {
    Psi,
    Phi,
    Theta,
}

impl fmt::Display for CoherenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoherenceKind::Psi => "Psi",
            CoherenceKind::Phi => "Phi",
            CoherenceKind::Theta => "Theta",
        })
    }
}

/// Boundary of a coherence cylinder at one level: the two composites it
/// connects. The cylinder itself is a chosen extension named `extension`.
#[derive(Clone, Debug)]
pub struct CoherencePair {
    pub kind: CoherenceKind,
    pub indices: Vec<usize>,
    pub level: usize,
    pub first: Term,
    pub second: Term,
    pub extension: String,
}

pub fn coherence_boundary(kind: CoherenceKind, indices: &[usize], level: usize, th: &mut Theory) -> CRes<CoherencePair> {
    let glob = |a: &Tree, i: usize| Op::Glob(leaf_cell(a, i));
    let (d, a, first, second) = match (kind, indices) {
        (CoherenceKind::Psi, &[m, k]) => {
            let d = level + 1;
            if d > th.n {
                return Err(CylError::Range(format!("level {level} needs {d}-cells")));
            }
            let a = gamma_arity(m, d, k);
            let fs: Vec<Op> = (0..m).map(|i| glob(&a, i)).collect();
            let alpha = glob(&a, m);
            let gs: Vec<Op> = (0..k).map(|i| glob(&a, m + 1 + i)).collect();
            let first = if m == 0 {
                gamma_op(th, 0, d, k, [vec![alpha.clone()], gs.clone()].concat())?
            } else {
                let w = Op::app(&wl(0, d), vec![fs[m - 1].clone(), alpha.clone()]);
                gamma_op(th, m - 1, d, k, [fs[..m - 1].to_vec(), vec![w], gs.clone()].concat())?
            };
            let second = if k == 0 {
                gamma_op(th, m, d, 0, [fs.clone(), vec![alpha]].concat())?
            } else {
                let w = Op::app(&wr(0, d), vec![alpha, gs[0].clone()]);
                gamma_op(th, m, d, k - 1, [fs, vec![w], gs[1..].to_vec()].concat())?
            };
            (d, a, first, second)
        }
        (CoherenceKind::Phi | CoherenceKind::Theta, &[q, m, k]) => {
            if m == 0 || level == 0 {
                return Err(CylError::Range("Φ and Θ need m ≥ 1 and level ≥ 1".into()));
            }
            let d = m + level;
            if d > th.n {
                return Err(CylError::Range(format!("Σ^{m} D_{level} exceeds the truncation")));
            }
            let right = kind == CoherenceKind::Theta;
            let w = whisker_arity(m, level, right);
            let mut kids = vec![Tree::leaf(); q];
            kids.extend(w.children().iter().cloned());
            kids.extend(vec![Tree::leaf(); k]);
            let a = Tree::new(kids);
            let fs: Vec<Op> = (0..q).map(|i| glob(&a, i)).collect();
            let gs: Vec<Op> = (0..k).map(|i| glob(&a, q + 2 + i)).collect();
            let (x, y) = (glob(&a, q), glob(&a, q + 1));
            let name = if right { wr(m, level) } else { wl(m, level) };
            let (big, small) = if right { (x.clone(), y.clone()) } else { (y.clone(), x.clone()) };
            let inner = Op::app(&name, vec![x, y]);
            let first = gamma_op(th, q, d, k, [fs.clone(), vec![inner], gs.clone()].concat())?;
            let gb = gamma_op(th, q, d, k, [fs.clone(), vec![big], gs.clone()].concat())?;
            let gsm = gamma_op(th, q, m + 1, k, [fs, vec![small], gs].concat())?;
            let second = if right { Op::app(&name, vec![gb, gsm]) } else { Op::app(&name, vec![gsm, gb]) };
            (d, a, first, second)
        }
        _ => return Err(CylError::Range(format!("malformed indices {indices:?} for {kind}"))),
    };
    let mk = |op: Op| -> CRes<Term> {
        let t = Term { source: Tree::globe(d), target: a.clone(), entries: vec![th.normalize(&op)?] };
        th.check_term(&t)?;
        Ok(t)
    };
    let idx: Vec<String> = indices.iter().map(|i| i.to_string()).collect();
    Ok(CoherencePair {
        kind,
        indices: indices.to_vec(),
        level,
        first: mk(first)?,
        second: mk(second)?,
        extension: format!("{kind}^{{{}}}_{level}", idx.join(",")),
    })
}

/// Presentation of `𝐌_k` with the two cylinder copies `C`, `D` glued
/// along `ι₀`, `ι₁` and the maps `Ξ` from each copy of `cyl(D_k)`.
#[derive(Clone, Debug)]
pub struct ModPresentation {
    pub k: usize,
    pub computad: Computad,
    pub xi: [BTreeMap<String, String>; 2],
    pub data: Vec<String>,
}

pub fn modification_presentation(k: usize, th: &Theory) -> CRes<ModPresentation> {
    if k > 2 {
        return Err(CylError::Range(format!("modifications of {k}-cylinders")));
    }
    let base = cyl_presentation(k, th)?;
    let copy = |p: char| move |n: &str| if n.starts_with('F') { format!("{p}{n}") } else { n.to_string() };
    let cc = base.computad.rename(&copy('C'));
    let dc = base.computad.rename(&copy('D'));
    let mut cx = glue(&[&cc, &dc], th)?;
    let mut xi = [BTreeMap::new(), BTreeMap::new()];
    for (i, p) in ['C', 'D'].into_iter().enumerate() {
        let f = copy(p);
        for g in base.computad.generators() {
            let img = f(&g.name);
            let faces = g.faces.as_ref().map(|(a, b)| (rename_expr(a, &f), rename_expr(b, &f)));
            if cx.get(&img).map(|h| &h.faces) != Some(&faces) {
                return Err(CylError::Type(format!("Ξ does not restrict to copy {p} at {}", g.name)));
            }
            xi[i].insert(g.name.clone(), img);
        }
    }
    let gn = Expr::gen;
    let mut data = Vec::new();
    match k {
        0 => {
            cx.add_cell(th, "Theta", gn("CF0"), gn("DF0"))?;
            data.push("Theta".into());
        }
        1 => {
            cx.add_cell(th, "Theta_s", gn("CF0s"), gn("DF0s"))?;
            cx.add_cell(th, "Theta_t", gn("DF0t"), gn("CF0t"))?;
            let c = Ctx::new(th, &cx);
            let ups = c.opaque("Upsilon(A,Theta_t)", sym2("c1", gn("A"), gn("DF0t")), sym2("c1", gn("A"), gn("CF0t")))?;
            let gam = c.opaque("Gamma(Theta_s,B)", sym2("c1", gn("CF0s"), gn("B")), sym2("c1", gn("DF0s"), gn("B")))?;
            let src = c.sym("c2", vec![c.sym("c2", vec![ups, gn("CF1")])?, gam])?;
            cx.add_cell(th, "Theta~", src, gn("DF1"))?;
            data.extend(["Theta_s", "Theta_t", "Theta~"].map(String::from));
        }
        _ => {
            cx.add_cell(th, "Theta_s", gn("CF0s"), gn("DF0s"))?;
            cx.add_cell(th, "Theta_t", gn("DF0t"), gn("CF0t"))?;
            let c = Ctx::new(th, &cx);
            let side = |e: char, c: &Ctx| -> CRes<Expr> {
                let (a, b) = (gn(&format!("A1{e}")), gn(&format!("B1{e}")));
                let ups = c.opaque(&format!("Upsilon_{e}"), sym2("c1", a.clone(), gn("DF0t")), sym2("c1", a, gn("CF0t")))?;
                let gam = c.opaque(&format!("Gamma_{e}"), sym2("c1", gn("CF0s"), b.clone()), sym2("c1", gn("DF0s"), b))?;
                Ok(c.sym("c2", vec![c.sym("c2", vec![ups, gn(&format!("CF1{e}"))])?, gam])?)
            };
            let es = side('s', &c)?;
            let et = side('t', &c)?;
            let alpha = c.sym("wr0_2", vec![gn("A"), gn("DF0t")])?;
            let beta = c.sym("wl0_2", vec![gn("DF0s"), gn("B")])?;
            let e = c.opaque(
                "Upsilon*C*Gamma",
                c.sym("c2", vec![alpha.clone(), et.clone()])?,
                c.sym("c2", vec![es.clone(), beta.clone()])?,
            )?;
            cx.add_cell(th, "Theta~_s", es, gn("DF1s"))?;
            cx.add_cell(th, "Theta~_t", gn("DF1t"), et)?;
            let c = Ctx::new(th, &cx);
            let l = c.sym("wl1_2", vec![alpha, gn("Theta~_t")])?;
            let r = c.sym("wr1_2", vec![gn("Theta~_s"), beta])?;
            let src = c.sym("c3", vec![c.sym("c3", vec![l, e])?, r])?;
            cx.add_cell(th, "Theta~", src, gn("DF2"))?;
            data.extend(["Theta_s", "Theta_t", "Theta~_s", "Theta~_t", "Theta~"].map(String::from));
        }
    }
    check_computad(&cx, th)?;
    Ok(ModPresentation { k, computad: cx, xi, data })
}

fn collapse_endos(e: &Expr) -> Expr {
    match e {
        Expr::Opaque { dim, src, tgt, .. } if src == tgt => {
            Expr::Sym { sym: format!("id{}", dim - 1), args: vec![collapse_endos(src)] }
        }
        Expr::Sym { sym, args } => Expr::Sym { sym: sym.clone(), args: args.iter().map(collapse_endos).collect() },
        _ => e.clone(),
    }
}

/// A modification of 1-cylinders with identity `Θ_s`, `Θ_t`: the boundary
/// of its 3-cell once the identity data is absorbed.
pub fn identity_boundary_modification(th: &Theory) -> CRes<(Expr, Expr)> {
    let m = modification_presentation(1, th)?;
    let mut sub = HashMap::new();
    sub.insert("DF0s".to_string(), Expr::gen("CF0s"));
    sub.insert("DF0t".to_string(), Expr::gen("CF0t"));
    sub.insert("Theta_s".to_string(), Expr::Sym { sym: "id1".into(), args: vec![Expr::gen("CF0s")] });
    sub.insert("Theta_t".to_string(), Expr::Sym { sym: "id1".into(), args: vec![Expr::gen("CF0t")] });
    let g = m.computad.get("Theta~").ok_or_else(|| CylError::Type("missing 3-cell".into()))?;
    let (s, t) = g.faces.clone().unwrap();
    let f = |e: &Expr| strip_units(&collapse_endos(&subst_expr(e, &sub)));
    Ok((f(&s), f(&t)))
}

// ---------------------------------------------------------------------------
// Stacks

/// A 2-cell whiskered by paths of 1-cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Whisk {
    pub pre: Vec<String>,
    pub cell: String,
    pub post: Vec<String>,
}

/// Contents of one column of an `A`-shaped diagram: a path for a `D_1`
/// column, or slots of vertically composed whiskered 2-cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Col {
    Path(Vec<String>),
    Cells(Vec<Vec<Whisk>>),
}

/// `pre · ρ(cols) · post`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub pre: Vec<String>,
    pub cols: Vec<Col>,
    pub post: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Side {
    /// No side: the squares of a 1-operation are single cells.
    Absent,
    Degenerate,
    /// A coherence constraint between two bracketings of one path.
    Constraint { src: Vec<String>, tgt: Vec<String> },
    /// `ρ^*_ε` applied to a whiskered 2-cell; `filler` is the chosen
    /// extension `D_2 → ∂A⁺` in Θ.
    Extension { label: String, cell: CellKey, whisker: Whisk, src: Vec<String>, tgt: Vec<String>, filler: ThetaMap },
}

#[derive(Clone, Debug, PartialEq)]
pub struct StackSquare {
    pub case: usize,
    pub klass: Klass,
    pub sector: Sector,
    pub tree: Tree,
    pub source_degenerate: bool,
    pub target_degenerate: bool,
    pub top: Edge,
    pub bottom: Edge,
    pub left: Side,
    pub right: Side,
    /// The cell of `A` whose cylinder filler the square uses, if any.
    pub filler: Option<CellKey>,
}

/// Endpoints of atomic 1-cells and boundary paths of atomic 2-cells of
/// `cyl(A)`.
#[derive(Clone, Debug, Default)]
pub struct Atoms {
    ends: HashMap<String, (String, String)>,
    bounds: HashMap<String, (Vec<String>, Vec<String>)>,
    pub x: String,
    pub y: String,
}

impl Atoms {
    pub fn new(a: &Tree) -> Atoms {
        let mut at = Atoms::default();
        let p = a.arity();
        for v in 0..=p {
            at.ends.insert(cell_name("F", &root(v)), (cell_name("U", &root(v)), cell_name("V", &root(v))));
        }
        for c in 0..p {
            let m = a.children()[c].arity();
            for j in 0..=m {
                let x = key(&[c], j);
                for pre in ["U", "V"] {
                    at.ends.insert(cell_name(pre, &x), (cell_name(pre, &root(c)), cell_name(pre, &root(c + 1))));
                }
                at.bounds.insert(
                    cell_name("F", &x),
                    (vec![cell_name("U", &x), cell_name("F", &root(c + 1))], vec![cell_name("F", &root(c)), cell_name("V", &x)]),
                );
            }
            for r in 0..m {
                for pre in ["U", "V"] {
                    at.bounds.insert(
                        cell_name(pre, &key(&[c, r], 0)),
                        (vec![cell_name(pre, &key(&[c], r))], vec![cell_name(pre, &key(&[c], r + 1))]),
                    );
                }
            }
        }
        at.x = cell_name("U", &root(0));
        at.y = cell_name("V", &root(p));
        at
    }

    /// Checks the path is composable and returns its endpoints.
    pub fn path_ends(&self, path: &[String]) -> CRes<(String, String)> {
        let mut cur: Option<(String, String)> = None;
        for a in path {
            let (s, t) = self.ends.get(a).ok_or_else(|| CylError::Type(format!("unknown 1-cell {a}")))?;
            cur = match cur {
                None => Some((s.clone(), t.clone())),
                Some((s0, t0)) if t0 == *s => Some((s0, t.clone())),
                Some(_) => return Err(CylError::Type(format!("path {path:?} is not composable"))),
            };
        }
        cur.ok_or_else(|| CylError::Type("empty path".into()))
    }

    pub fn whisk_bounds(&self, w: &Whisk) -> CRes<(Vec<String>, Vec<String>)> {
        let (s, t) = self.bounds.get(&w.cell).ok_or_else(|| CylError::Type(format!("unknown 2-cell {}", w.cell)))?;
        let f = |mid: &Vec<String>| [w.pre.clone(), mid.clone(), w.post.clone()].concat();
        Ok((f(s), f(t)))
    }

    /// Source and target paths of an edge, after checking that each
    /// column composes vertically and the paths run from `x` to `y`.
    pub fn edge_bounds(&self, e: &Edge) -> CRes<(Vec<String>, Vec<String>)> {
        let mut src = e.pre.clone();
        let mut tgt = e.pre.clone();
        for col in &e.cols {
            match col {
                Col::Path(p) => {
                    src.extend(p.iter().cloned());
                    tgt.extend(p.iter().cloned());
                }
                Col::Cells(groups) => {
                    let flat: Vec<&Whisk> = groups.iter().flatten().collect();
                    if flat.is_empty() || groups.iter().any(|g| g.is_empty()) {
                        return Err(CylError::Type("empty slot".into()));
                    }
                    let bs = flat.iter().map(|w| self.whisk_bounds(w)).collect::<CRes<Vec<_>>>()?;
                    for i in 1..bs.len() {
                        if bs[i - 1].1 != bs[i].0 {
                            return Err(CylError::Type(format!("{} and {} do not compose", flat[i - 1].cell, flat[i].cell)));
                        }
                    }
                    src.extend(bs[0].0.iter().cloned());
                    tgt.extend(bs[bs.len() - 1].1.iter().cloned());
                }
            }
        }
        src.extend(e.post.iter().cloned());
        tgt.extend(e.post.iter().cloned());
        for p in [&src, &tgt] {
            let (a, b) = self.path_ends(p)?;
            if a != self.x || b != self.y {
                return Err(CylError::Type(format!("path {p:?} does not run from {} to {}", self.x, self.y)));
            }
        }
        Ok((src, tgt))
    }
}

/// The stack of (possibly degenerate) cylinders attached to a homogeneous
/// `ρ: D_k → A`, one square per element of `𝓛(A)`.
#[derive(Clone, Debug)]
pub struct Stack {
    pub rho: ThetaMap,
    pub k: usize,
    pub tree: Tree,
    pub atoms: Atoms,
    pub squares: Vec<StackSquare>,
}

struct Shape<'a> {
    a: &'a Tree,
    p: usize,
}

impl Shape<'_> {
    fn m(&self, c: usize) -> usize {
        self.a.children()[c].arity()
    }

    fn cv(&self, v: usize) -> String {
        cell_name("F", &root(v))
    }

    fn d(&self, c: usize, j: usize) -> String {
        cell_name("F", &key(&[c], j))
    }

    fn whisk(&self, c: usize, r: usize, right: bool) -> Whisk {
        if right {
            Whisk { pre: vec![], cell: cell_name("U", &key(&[c, r], 0)), post: vec![self.cv(c + 1)] }
        } else {
            Whisk { pre: vec![self.cv(c)], cell: cell_name("V", &key(&[c, r], 0)), post: vec![] }
        }
    }

    fn plain(&self, c: usize, pre: &str) -> Col {
        let m = self.m(c);
        if m == 0 {
            Col::Path(vec![cell_name(pre, &key(&[c], 0))])
        } else {
            Col::Cells((0..m).map(|r| vec![Whisk { pre: vec![], cell: cell_name(pre, &key(&[c, r], 0)), post: vec![] }]).collect())
        }
    }

    /// Column `c` of `U` followed by the side at vertex `c+1`.
    fn a_u(&self, c: usize) -> Col {
        let m = self.m(c);
        if m == 0 {
            Col::Path(vec![cell_name("U", &key(&[c], 0)), self.cv(c + 1)])
        } else {
            Col::Cells((0..m).map(|r| vec![self.whisk(c, r, true)]).collect())
        }
    }

    /// The side at vertex `c` followed by column `c` of `V`.
    fn v_a(&self, c: usize) -> Col {
        let m = self.m(c);
        if m == 0 {
            Col::Path(vec![self.cv(c), cell_name("V", &key(&[c], 0))])
        } else {
            Col::Cells((0..m).map(|r| vec![self.whisk(c, r, false)]).collect())
        }
    }

    fn edge(&self, pre: Vec<String>, at: &[(usize, Col)], post: Vec<String>) -> Edge {
        let lo = at.first().map_or(self.p, |x| x.0);
        let mut cols = Vec::new();
        for c in 0..self.p {
            if let Some((_, col)) = at.iter().find(|x| x.0 == c) {
                cols.push(col.clone());
            } else if c < lo {
                cols.push(self.plain(c, "U"));
            } else {
                cols.push(self.plain(c, "V"));
            }
        }
        Edge { pre, cols, post }
    }

    fn whisk_ext(&self, c: usize, j: usize, target: bool) -> Whisk {
        let g = |c2: usize| if target { self.m(c2) } else { 0 };
        Whisk {
            pre: (0..c).map(|c2| cell_name("U", &key(&[c2], g(c2)))).collect(),
            cell: self.d(c, j),
            post: (c + 1..self.p).map(|c2| cell_name("V", &key(&[c2], g(c2)))).collect(),
        }
    }
}

/// `C_t ρ(U)`.
pub fn stack_first_edge(a: &Tree) -> Edge {
    let sh = Shape { a, p: a.arity() };
    Edge { pre: vec![], cols: (0..sh.p).map(|c| sh.plain(c, "U")).collect(), post: vec![sh.cv(sh.p)] }
}

/// `ρ(V) C_s`.
pub fn stack_last_edge(a: &Tree) -> Edge {
    let sh = Shape { a, p: a.arity() };
    Edge { pre: vec![sh.cv(0)], cols: (0..sh.p).map(|c| sh.plain(c, "V")).collect(), post: vec![] }
}

fn sector_plus(s: &Tree, c: usize) -> CRes<(Tree, ThetaMap, ThetaMap)> {
    let node = s.node(&[c]).ok_or_else(|| CylError::Type(format!("no column {c} in {s}")))?;
    let plus = s.insert_leaf(&Sector { path: vec![c], gap: 0 })?;
    let sc = s.cells();
    let mk = |target: bool| -> CRes<ThetaMap> {
        let mut f = Vec::new();
        for cs in &sc {
            let mut fk = Vec::new();
            for x in cs {
                let y = if x.path == [c] && node.arity() == 0 { key(&[c], usize::from(target)) } else { x.clone() };
                fk.push(globset::cell_index(&plus, &y).ok_or_else(|| CylError::Type(format!("{y:?} not in {plus}")))?);
            }
            f.push(fk);
        }
        let g = GlobMap::new(globset::realize(s), globset::realize(&plus), f).map_err(|e| CylError::Type(e.to_string()))?;
        Ok(theta::embed_globular(s, &plus, &g)?)
    };
    Ok((plus.clone(), mk(false)?, mk(true)?))
}

fn rho_star(rho: &ThetaMap, c: usize, target: bool) -> CRes<ThetaMap> {
    let f = theta::compose(&theta::globe_face(1, target), rho)?;
    let hg = theta::hg_factorize(&f);
    let (_, ds, dt) = sector_plus(&hg.homogeneous.target, c)?;
    let (x, y) = (theta::compose(&hg.homogeneous, &ds)?, theta::compose(&hg.homogeneous, &dt)?);
    if !theta::is_admissible_groupoidal(&x, &y)? {
        return Err(CylError::Type("ρ* boundary is not admissible".into()));
    }
    Ok(theta::filler(&x, &y)?)
}

pub fn stack(rho: &ThetaMap) -> CRes<Stack> {
    let k = rho.source.dim();
    if !rho.source.is_globe() || !(1..=2).contains(&k) {
        return Err(CylError::Range(format!("stacks are built for operations on D_1 and D_2, not {}", rho.source)));
    }
    if !theta::is_homogeneous(rho) {
        return Err(CylError::NotHomogeneous(format!("{} → {}", rho.source, rho.target)));
    }
    let a = rho.target.clone();
    let sh = Shape { a: &a, p: a.arity() };
    let p = sh.p;
    let atoms = Atoms::new(&a);
    let mut squares = Vec::new();
    for ins in a.linearization() {
        let s = ins.sector.clone();
        let klass = ins.klass;
        let (top, bottom, mut left, mut right, filler) = match s.path.len() {
            0 => {
                let g = s.gap;
                let (top, bottom) = if p == 0 {
                    (stack_first_edge(&a), stack_last_edge(&a))
                } else if g == p {
                    (stack_first_edge(&a), sh.edge(vec![], &[(p - 1, sh.a_u(p - 1))], vec![]))
                } else if g == 0 {
                    (sh.edge(vec![], &[(0, sh.v_a(0))], vec![]), stack_last_edge(&a))
                } else {
                    (
                        sh.edge(vec![], &[(g, sh.v_a(g))], vec![]),
                        sh.edge(vec![], &[(g - 1, sh.a_u(g - 1))], vec![]),
                    )
                };
                let (ts, tt) = atoms.edge_bounds(&top)?;
                let (bs, bt) = atoms.edge_bounds(&bottom)?;
                (top, bottom, Side::Constraint { src: ts, tgt: bs }, Side::Constraint { src: tt, tgt: bt }, None)
            }
            1 => {
                let (c, g) = (s.path[0], s.gap);
                let m = sh.m(c);
                let cell = key(&[c], g);
                if m == 0 {
                    let top = sh.edge(vec![], &[(c, sh.a_u(c))], vec![]);
                    let bottom = sh.edge(vec![], &[(c, sh.v_a(c))], vec![]);
                    (top, bottom, Side::Degenerate, Side::Degenerate, Some(cell))
                } else {
                    let dcell = Whisk { pre: vec![], cell: sh.d(c, g), post: vec![] };
                    let mut u_side: Vec<Vec<Whisk>> = (0..g).map(|r| vec![sh.whisk(c, r, true)]).collect();
                    let mut v_side: Vec<Vec<Whisk>> = (g..m).map(|r| vec![sh.whisk(c, r, false)]).collect();
                    let top_col;
                    let bottom_col;
                    if g == m {
                        top_col = Col::Cells(u_side.clone());
                        u_side.last_mut().unwrap().push(dcell);
                        bottom_col = Col::Cells(u_side);
                    } else if g == 0 {
                        bottom_col = Col::Cells(v_side.clone());
                        v_side[0].insert(0, dcell);
                        top_col = Col::Cells(v_side);
                    } else {
                        let mut vt = v_side.clone();
                        vt[0].insert(0, dcell.clone());
                        top_col = Col::Cells([u_side.clone(), vt].concat());
                        let mut ub = u_side;
                        ub.last_mut().unwrap().push(dcell);
                        bottom_col = Col::Cells([ub, v_side].concat());
                    }
                    let top = sh.edge(vec![], &[(c, top_col)], vec![]);
                    let bottom = sh.edge(vec![], &[(c, bottom_col)], vec![]);
                    (top, bottom, Side::Degenerate, Side::Degenerate, Some(cell))
                }
            }
            2 => {
                let (c, r) = (s.path[0], s.path[1]);
                let m = sh.m(c);
                let mut groups: Vec<Vec<Whisk>> =
                    (0..m).map(|i| vec![sh.whisk(c, i, i <= r)]).collect();
                groups[r].push(Whisk { pre: vec![], cell: sh.d(c, r + 1), post: vec![] });
                let top = sh.edge(vec![], &[(c, Col::Cells(groups.clone()))], vec![]);
                groups[r] = vec![Whisk { pre: vec![], cell: sh.d(c, r), post: vec![] }, sh.whisk(c, r, false)];
                let bottom = sh.edge(vec![], &[(c, Col::Cells(groups))], vec![]);
                (top, bottom, Side::Degenerate, Side::Degenerate, Some(key(&[c, r], 0)))
            }
            h => return Err(CylError::Range(format!("insertion at height {} over an operation on D_{k}", h + 1))),
        };
        if s.path.len() == 1 && k == 2 {
            let (c, g) = (s.path[0], s.gap);
            let ext = |target: bool| -> CRes<Side> {
                let whisker = sh.whisk_ext(c, g, target);
                let (src, tgt) = atoms.whisk_bounds(&whisker)?;
                Ok(Side::Extension {
                    label: format!("rho*_{}", if target { "tau" } else { "sigma" }),
                    cell: key(&[c], g),
                    whisker,
                    src,
                    tgt,
                    filler: rho_star(rho, c, target)?,
                })
            };
            match klass {
                Klass::H2OverEdge => {
                    left = ext(false)?;
                    right = ext(true)?;
                }
                Klass::H2Max => right = ext(true)?,
                Klass::H2Min => left = ext(false)?,
                _ => {}
            }
        }
        if k == 1 {
            left = Side::Absent;
            right = Side::Absent;
        }
        squares.push(StackSquare {
            case: klass.case(),
            klass,
            sector: s,
            tree: ins.tree.clone(),
            source_degenerate: left == Side::Degenerate,
            target_degenerate: right == Side::Degenerate,
            top,
            bottom,
            left,
            right,
            filler,
        });
    }
    let st = Stack { rho: rho.clone(), k, tree: a, atoms, squares };
    check_stack(&st)?;
    Ok(st)
}

fn check_side(atoms: &Atoms, side: &Side, from: &[String], to: &[String], what: &str) -> CRes<()> {
    let bad = |m: &str| Err(CylError::Type(format!("{what}: {m}")));
    match side {
        Side::Absent => bad("missing side"),
        Side::Degenerate => {
            if from != to {
                return bad("degenerate side joins different corners");
            }
            Ok(())
        }
        Side::Constraint { src, tgt } => {
            if src != tgt {
                return bad("constraint between different composites");
            }
            if src.as_slice() != from || tgt.as_slice() != to {
                return bad("constraint does not meet the corners");
            }
            Ok(())
        }
        Side::Extension { whisker, src, tgt, filler, .. } => {
            let (s, t) = atoms.whisk_bounds(whisker)?;
            if &s != src || &t != tgt || src.as_slice() != from || tgt.as_slice() != to {
                return bad("extension does not meet the corners");
            }
            if filler.source != Tree::globe(2) || !theta::is_homogeneous(filler) {
                return bad("extension is not a homogeneous 2-cell");
            }
            Ok(())
        }
    }
}

/// Typing, composability, endpoints and degeneracy flags of a stack.
pub fn check_stack(st: &Stack) -> CRes<()> {
    let at = &st.atoms;
    for (i, sq) in st.squares.iter().enumerate() {
        let (ts, tt) = at.edge_bounds(&sq.top)?;
        let (bs, bt) = at.edge_bounds(&sq.bottom)?;
        let what = format!("square {i} ({})", sq.klass);
        if st.k == 2 {
            check_side(at, &sq.left, &ts, &bs, &format!("{what}, left"))?;
            check_side(at, &sq.right, &tt, &bt, &format!("{what}, right"))?;
        } else if sq.left != Side::Absent || sq.right != Side::Absent {
            return Err(CylError::Type(format!("{what}: sides on a stack of 0-cylinders")));
        }
        if sq.source_degenerate != (sq.left == Side::Degenerate) || sq.target_degenerate != (sq.right == Side::Degenerate) {
            return Err(CylError::Type(format!("{what}: flags disagree with sides")));
        }
        if i + 1 < st.squares.len() && sq.bottom != st.squares[i + 1].top {
            return Err(CylError::Adjacency(format!("squares {i} and {}", i + 1)));
        }
    }
    let first = st.squares.first().ok_or_else(|| CylError::Type("empty stack".into()))?;
    if first.top != stack_first_edge(&st.tree) {
        return Err(CylError::Adjacency("first edge is not C_t ρ(U)".into()));
    }
    if st.squares.last().unwrap().bottom != stack_last_edge(&st.tree) {
        return Err(CylError::Adjacency("last edge is not ρ(V) C_s".into()));
    }
    Ok(())
}

/// The source (`target = false`) or target sides of a 2-dimensional
/// stack agree with the stack of the homogeneous part of `ρ∘σ` (or
/// `ρ∘τ`), transported along the globular part.
pub fn check_restriction(st: &Stack, target: bool) -> CRes<()> {
    if st.k != 2 {
        return Err(CylError::Range("restrictions are compared for operations on D_2".into()));
    }
    let f = theta::compose(&theta::globe_face(1, target), &st.rho)?;
    let hg = theta::hg_factorize(&f);
    let lower = stack(&hg.homogeneous)?;
    let want: Vec<String> = lower
        .squares
        .iter()
        .map(|sq| match &sq.filler {
            None => Ok("~".to_string()),
            Some(c) => theta::globular_cell_map(&hg.globular, c)
                .map(|x| cell_name("F", &x))
                .ok_or_else(|| CylError::Type("globular part does not map the cell".into())),
        })
        .collect::<CRes<_>>()?;
    let got: Vec<String> = st
        .squares
        .iter()
        .filter_map(|sq| match if target { &sq.right } else { &sq.left } {
            Side::Constraint { .. } => Some("~".to_string()),
            Side::Extension { cell, .. } => Some(cell_name("F", cell)),
            _ => None,
        })
        .collect();
    if want != got {
        return Err(CylError::Type(format!("restriction mismatch: {want:?} vs {got:?}")));
    }
    Ok(())
}

/// Boundary record of a (possibly degenerate) cylinder, as used for
/// vertical composition.
#[derive(Clone, Debug, PartialEq)]
pub struct CylMeta {
    pub top: Edge,
    pub bottom: Edge,
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub source: Vec<Side>,
    pub target: Vec<Side>,
}

impl StackSquare {
    pub fn meta(&self) -> CylMeta {
        let side = |s: &Side| if *s == Side::Degenerate || *s == Side::Absent { vec![] } else { vec![s.clone()] };
        CylMeta {
            top: self.top.clone(),
            bottom: self.bottom.clone(),
            p: self.source_degenerate.then_some(0),
            q: self.target_degenerate.then_some(0),
            source: side(&self.left),
            target: side(&self.right),
        }
    }
}

/// `F_m ⊗ … ⊗ F_1`: `p` and `q` are minima (absent = ∞) and sources and
/// targets compose sidewise.
pub fn vcompose_meta(items: &[CylMeta]) -> CRes<CylMeta> {
    let first = items.first().ok_or_else(|| CylError::Range("empty composite".into()))?;
    for (i, w) in items.windows(2).enumerate() {
        if w[0].bottom != w[1].top {
            return Err(CylError::Adjacency(format!("cylinders {i} and {}", i + 1)));
        }
    }
    Ok(CylMeta {
        top: first.top.clone(),
        bottom: items.last().unwrap().bottom.clone(),
        p: items.iter().filter_map(|m| m.p).min(),
        q: items.iter().filter_map(|m| m.q).min(),
        source: items.iter().flat_map(|m| m.source.clone()).collect(),
        target: items.iter().flat_map(|m| m.target.clone()).collect(),
    })
}

/// Composes a list of sides vertically starting from `start`.
pub fn chain_sides(sides: &[Side], start: &[String]) -> Option<Vec<String>> {
    let mut cur = start.to_vec();
    for s in sides {
        match s {
            Side::Constraint { src, tgt } | Side::Extension { src, tgt, .. } => {
                if *src != cur {
                    return None;
                }
                cur = tgt.clone();
            }
            _ => {}
        }
    }
    Some(cur)
}

impl fmt::Display for Whisk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> =
            self.pre.iter().map(String::as_str).chain([self.cell.as_str()]).chain(self.post.iter().map(String::as_str)).collect();
        write!(f, "{}", parts.join("."))
    }
}

impl fmt::Display for Col {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Col::Path(p) => write!(f, "{}", p.join(".")),
            Col::Cells(gs) => {
                let s: Vec<String> =
                    gs.iter().map(|g| g.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(" ; ")).collect();
                write!(f, "{}", s.join(" | "))
            }
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.pre {
            write!(f, "{a}.")?;
        }
        let cols: Vec<String> = self.cols.iter().map(|c| format!("{{{c}}}")).collect();
        write!(f, "rho({})", cols.join(", "))?;
        for a in &self.post {
            write!(f, ".{a}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Absent => write!(f, "-"),
            Side::Degenerate => write!(f, "degenerate"),
            Side::Constraint { .. } => write!(f, "~"),
            Side::Extension { label, whisker, .. } => write!(f, "{label}({whisker})"),
        }
    }
}

impl Stack {
    pub fn to_json(&self) -> Value {
        let sq: Vec<Value> = self
            .squares
            .iter()
            .map(|s| {
                json!({
                    "case": format!("cyl{}", s.case),
                    "klass": s.klass.to_string(),
                    "tree": s.tree.to_string(),
                    "source_degenerate": s.source_degenerate,
                    "target_degenerate": s.target_degenerate,
                    "top": s.top.to_string(),
                    "bottom": s.bottom.to_string(),
                    "left": s.left.to_string(),
                    "right": s.right.to_string(),
                })
            })
            .collect();
        json!({ "rho": self.rho.to_json(), "tree": self.tree.to_string(), "squares": sq })
    }

    /// A ladder: one node per edge, one arrow per square.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph stack {\n  rankdir=TB;\n  node [shape=box, fontname=monospace];\n");
        let mut edges = vec![&self.squares[0].top];
        edges.extend(self.squares.iter().map(|q| &q.bottom));
        for (i, e) in edges.iter().enumerate() {
            s.push_str(&format!("  e{i} [label=\"{}\"];\n", e.to_string().replace('"', "'")));
        }
        for (i, q) in self.squares.iter().enumerate() {
            let mut marks = Vec::new();
            if q.source_degenerate {
                marks.push("src=");
            }
            if q.target_degenerate {
                marks.push("tgt=");
            }
            let style = if marks.is_empty() { "solid" } else { "dashed" };
            s.push_str(&format!(
                "  e{i} -> e{} [label=\"cyl{} {} {}\", style={style}];\n",
                i + 1,
                q.case,
                q.klass,
                marks.join(" ")
            ));
        }
        s.push_str("}\n");
        s
    }
}

pub fn computad_json(cx: &Computad) -> Value {
    let gens: Vec<Value> = cx
        .generators()
        .iter()
        .map(|g| match &g.faces {
            None => json!({ "name": g.name, "dim": g.dim }),
            Some((s, t)) => json!({ "name": g.name, "dim": g.dim, "src": s.to_string(), "tgt": t.to_string() }),
        })
        .collect();
    json!({ "counts": cx.counts(), "generators": gens })
}

impl CylPresentation {
    pub fn to_json(&self) -> Value {
        json!({ "k": self.k, "presentation": computad_json(&self.computad), "iota0": self.iota[0], "iota1": self.iota[1], "fillers": self.fillers })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::library::{groupoidalize, standard_library};
    use crate::theory::Kind;

    fn th() -> Theory {
        groupoidalize(&standard_library(3, Kind::Groupoidal).unwrap()).unwrap()
    }

    fn t(s: &str) -> Tree {
        Tree::parse_any(s).unwrap()
    }

    #[test]
    fn cylinder_counts() {
        let th = th();
        let counts: Vec<Vec<usize>> = (0..=3).map(|k| cyl_presentation(k, &th).unwrap().computad.counts()).collect();
        assert_eq!(counts[0], vec![2, 1]);
        assert_eq!(counts[1], vec![4, 4, 1]);
        assert_eq!(counts[2], vec![4, 6, 4, 1]);
        assert_eq!(counts[3], vec![4, 6, 6, 4, 1]);
        let small = Theory::base(1, Kind::Groupoidal);
        assert!(matches!(cyl_presentation(2, &small), Err(CylError::Range(_))));
    }

    #[test]
    fn boundary() {
        let th = th();
        let b = boundary_cyl(1, &th).unwrap();
        assert_eq!(b.presentation.computad.counts(), vec![4, 4]);
        assert_eq!(b.added, vec!["F1"]);
        let b2 = boundary_cyl(2, &th).unwrap();
        assert_eq!(b2.presentation.computad.counts(), vec![4, 6, 4]);
        assert_eq!(b2.added, vec!["F2"]);
        assert!(boundary_cyl(0, &th).is_err());
    }

    #[test]
    fn degenerate() {
        let th = th();
        let d = degenerate_cyl(1, Some(0), None, &th).unwrap();
        assert_eq!(d.computad.counts(), vec![3, 3, 1]);
        let (s, t) = d.computad.get("F1").unwrap().faces.clone().unwrap();
        assert_eq!(s.to_string(), "c1(A, F0t)");
        assert_eq!(t.to_string(), "B");
        let both = degenerate_cyl(1, Some(0), Some(0), &th).unwrap();
        let (s, t) = both.computad.get("F1").unwrap().faces.clone().unwrap();
        assert_eq!((s.to_string(), t.to_string()), ("A".into(), "B".into()));
        assert_eq!(degenerate_cyl(2, None, None, &th).unwrap(), cyl_presentation(2, &th).unwrap());
        assert!(degenerate_cyl(1, Some(1), None, &th).is_err());
    }

    #[test]
    fn glob_sums() {
        let th = th();
        for k in 0..=2 {
            let g = cyl_glob_sum(&Tree::globe(k), &th).unwrap();
            let c = cyl_presentation(k, &th).unwrap();
            assert!(find_presentation_iso(&g.computad, &c.computad).is_some(), "k = {k}");
        }
        let a = t("[[[][]][]]");
        let g = cyl_glob_sum(&a, &th).unwrap();
        assert_eq!(g.inclusions.len(), 9);
        assert!(cyl_glob_sum(&Tree::globe(3), &th).is_err());
    }

    #[test]
    fn coherence() {
        let mut th = standard_library(3, Kind::Categorical).unwrap();
        let p = coherence_boundary(CoherenceKind::Psi, &[2, 1], 1, &mut th).unwrap();
        assert_eq!(p.first.target, t("[[][][[]][]]"));
        assert_ne!(p.first, p.second);
        let z = coherence_boundary(CoherenceKind::Psi, &[0, 0], 1, &mut th).unwrap();
        assert_eq!(z.first, z.second);
        assert!(coherence_boundary(CoherenceKind::Phi, &[1, 1, 1], 1, &mut th).is_ok());
        assert!(coherence_boundary(CoherenceKind::Theta, &[0, 1, 2], 2, &mut th).is_ok());
        assert!(coherence_boundary(CoherenceKind::Psi, &[1], 1, &mut th).is_err());
    }

    #[test]
    fn psi_levels_are_compatible() {
        let mut th = standard_library(3, Kind::Categorical).unwrap();
        let (m, k) = (1, 2);
        let hi = coherence_boundary(CoherenceKind::Psi, &[m, k], 1, &mut th).unwrap();
        let lo = coherence_boundary(CoherenceKind::Psi, &[m, k], 0, &mut th).unwrap();
        let a = &hi.first.target;
        for target in [false, true] {
            let alpha = leaf_cell(a, m);
            let face = face_key(&alpha, 1, target);
            let mut args: Vec<Op> = (0..a.leaf_count()).map(|i| Op::Glob(leaf_cell(a, i))).collect();
            args[m] = Op::Glob(face);
            for (h, l) in [(&hi.first, &lo.first), (&hi.second, &lo.second)] {
                let f = th.face(&h.entries[0], target).unwrap();
                let g = th.subst(&l.entries[0], &l.target, &args).unwrap();
                assert_eq!(th.normalize(&f).unwrap(), g);
            }
        }
    }

    #[test]
    fn modifications() {
        let th = th();
        let m0 = modification_presentation(0, &th).unwrap();
        assert_eq!(m0.computad.counts(), vec![2, 2, 1]);
        let m1 = modification_presentation(1, &th).unwrap();
        assert_eq!(m1.computad.counts(), vec![4, 6, 4, 1]);
        assert_eq!(m1.xi[0]["F1"], "CF1");
        let m2 = modification_presentation(2, &th).unwrap();
        assert_eq!(m2.computad.counts()[4], 1);
        let (s, t) = identity_boundary_modification(&th).unwrap();
        assert_eq!((s, t), (Expr::gen("CF1"), Expr::gen("DF1")));
    }

    fn rho_for(a: &Tree) -> ThetaMap {
        theta::hom(&Tree::globe(2), a).unwrap().into_iter().find(theta::is_homogeneous).unwrap()
    }

    #[test]
    fn nine_square_stack() {
        let a = t("[[[][]][]]");
        let st = stack(&rho_for(&a)).unwrap();
        assert_eq!(st.squares.len(), 9);
        let cases: Vec<usize> = st.squares.iter().map(|s| s.case).collect();
        assert_eq!(cases, vec![1, 4, 3, 5, 8, 7, 8, 6, 2]);
        check_restriction(&st, false).unwrap();
        check_restriction(&st, true).unwrap();
        let metas: Vec<CylMeta> = st.squares.iter().map(StackSquare::meta).collect();
        let comp = vcompose_meta(&metas).unwrap();
        let (ts, tt) = st.atoms.edge_bounds(&comp.top).unwrap();
        let (bs, bt) = st.atoms.edge_bounds(&comp.bottom).unwrap();
        assert_eq!(chain_sides(&comp.source, &ts), Some(bs));
        assert_eq!(chain_sides(&comp.target, &tt), Some(bt));
        assert!(st.to_dot().contains("cyl8"));
    }

    #[test]
    fn small_stacks() {
        for s in ["[]", "[[]]", "[[][]]", "[[[]]]", "[[[]][]]"] {
            let a = t(s);
            let st = stack(&rho_for(&a)).unwrap();
            assert_eq!(st.squares.len(), 2 * a.node_count() - 1, "{s}");
        }
        let one = stack(&theta::hom(&Tree::globe(1), &t("[[][]]")).unwrap().into_iter().find(theta::is_homogeneous).unwrap())
            .unwrap();
        assert_eq!(one.squares.len(), 5);
        let id = ThetaMap::identity(&t("[[][]]"));
        assert!(matches!(stack(&id), Err(CylError::Range(_))));
    }

    #[test]
    fn min_rule() {
        let a = t("[[]]");
        let st = stack(&rho_for(&a)).unwrap();
        let mut x = st.squares[0].meta();
        let mut y = x.clone();
        x.p = Some(0);
        y.q = Some(0);
        y.top = x.bottom.clone();
        let c = vcompose_meta(&[x.clone(), y]).unwrap();
        assert_eq!((c.p, c.q), (Some(0), Some(0)));
        assert_eq!(vcompose_meta(&[x.clone()]).unwrap(), x);
    }
}

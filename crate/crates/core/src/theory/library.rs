//! Standard operations: compositions, identities, unitors, whiskerings,
//! associators, interchangers and 3-coherences, plus inverse systems.

use rand::seq::SliceRandom;
use rand::Rng;

use super::expr::{Computad, Ctx, Expr};
use super::{leaf_cell, Kind, Op, OperationSymbol, Res, SymbolSpec, Term, Theory, TheoryError};
use crate::globset::{self, GlobMap, GlobSet};
use crate::tree::{CellKey, Tree};

fn susp(t: Tree, m: usize) -> Tree {
    let mut t = t;
    for _ in 0..m {
        t = t.suspend();
    }
    t
}

fn g(c: CellKey) -> Op {
    Op::Glob(c)
}

/// Top cell of `D_k`.
pub fn top(k: usize) -> CellKey {
    CellKey { path: vec![0; k], gap: 0 }
}

pub fn src_cell(c: &CellKey) -> CellKey {
    Tree::leaf().cell_faces(c).expect("positive dimension").0
}

pub fn tgt_cell(c: &CellKey) -> CellKey {
    Tree::leaf().cell_faces(c).expect("positive dimension").1
}

/// `D_k ∐_{D_{k-1}} D_k`.
pub fn comp_arity(k: usize) -> Tree {
    susp(Tree::new(vec![Tree::leaf(), Tree::leaf()]), k - 1)
}

/// `D_{m+j} ∐_{D_m} D_{m+1}` (`right`) or `D_{m+1} ∐_{D_m} D_{m+j}`.
pub fn whisker_arity(m: usize, j: usize, right: bool) -> Tree {
    let big = Tree::globe(j - 1);
    let kids = if right { vec![big, Tree::leaf()] } else { vec![Tree::leaf(), big] };
    susp(Tree::new(kids), m)
}

pub fn comp(k: usize) -> String {
    format!("c{k}")
}

pub fn ident(k: usize) -> String {
    format!("id{k}")
}

/// Name of the right whiskering `D_{m+j} → D_{m+j} ∐_{D_m} D_{m+1}`.
pub fn wr(m: usize, j: usize) -> String {
    if j == 1 {
        comp(m + 1)
    } else {
        format!("wr{m}_{j}")
    }
}

/// Name of the left whiskering `D_{m+j} → D_{m+1} ∐_{D_m} D_{m+j}`.
pub fn wl(m: usize, j: usize) -> String {
    if j == 1 {
        comp(m + 1)
    } else {
        format!("wl{m}_{j}")
    }
}

fn systems_batch(n: usize, k: usize) -> Vec<SymbolSpec> {
    let mut b = Vec::new();
    if k <= n {
        let a = comp_arity(k);
        let l = a.leaf_paths();
        let (x, y) = (CellKey { path: l[0].clone(), gap: 0 }, CellKey { path: l[1].clone(), gap: 0 });
        b.push(SymbolSpec::new(&comp(k), a, g(src_cell(&x)), g(tgt_cell(&y))));
        b.push(SymbolSpec::new(&ident(k - 1), Tree::globe(k - 1), g(top(k - 1)), g(top(k - 1))));
    }
    if k >= 2 {
        let x = top(k - 1);
        let a = Tree::globe(k - 1);
        let idt = Op::app(&ident(k - 2), vec![g(tgt_cell(&x))]);
        let ids = Op::app(&ident(k - 2), vec![g(src_cell(&x))]);
        b.push(SymbolSpec::new(&format!("l{k}"), a.clone(), g(x.clone()), Op::app(&comp(k - 1), vec![g(x.clone()), idt])));
        b.push(SymbolSpec::new(&format!("r{k}"), a, g(x.clone()), Op::app(&comp(k - 1), vec![ids, g(x)])));
    }
    if k <= n {
        for m in 0..k {
            let j = k - m;
            if j < 2 {
                continue;
            }
            for right in [true, false] {
                let a = whisker_arity(m, j, right);
                let l = a.leaf_paths();
                let cells: Vec<CellKey> = l.iter().map(|p| CellKey { path: p.clone(), gap: 0 }).collect();
                let (xi, yi) = if right { (0, 1) } else { (1, 0) };
                let x = &cells[xi];
                let y = g(cells[yi].clone());
                let mk = |face: CellKey| {
                    if right {
                        Op::app(&wr(m, j - 1), vec![g(face), y.clone()])
                    } else {
                        Op::app(&wl(m, j - 1), vec![y.clone(), g(face)])
                    }
                };
                let name = if right { wr(m, j) } else { wl(m, j) };
                b.push(SymbolSpec::new(&name, a, mk(src_cell(x)), mk(tgt_cell(x))));
            }
        }
    }
    b
}

fn leaves(a: &Tree) -> Vec<Op> {
    (0..a.leaf_count()).map(|i| g(leaf_cell(a, i))).collect()
}

fn extras_batch(n: usize, k: usize) -> Vec<SymbolSpec> {
    let mut b = Vec::new();
    if k >= 2 {
        let m = k - 2;
        let a = susp(Tree::new(vec![Tree::leaf(); 3]), m);
        let v = leaves(&a);
        let c = comp(m + 1);
        let left = Op::app(&c, vec![Op::app(&c, vec![v[0].clone(), v[1].clone()]), v[2].clone()]);
        let right = Op::app(&c, vec![v[0].clone(), Op::app(&c, vec![v[1].clone(), v[2].clone()])]);
        if k <= n {
            b.push(SymbolSpec::new(&format!("assoc{m}"), a.clone(), left.clone(), right.clone()));
            b.push(SymbolSpec::new(&format!("assoc_inv{m}"), a, right, left));
        } else if k == n + 1 {
            b.push(SymbolSpec::new(&format!("assoc{m}"), a, left, right));
        }
    }
    if k == 3 && n >= 3 {
        // interchange of two horizontally composable 2-cells
        let a = Tree::new(vec![Tree::globe(1), Tree::globe(1)]);
        let x = CellKey { path: vec![0, 0], gap: 0 };
        let y = CellKey { path: vec![1, 0], gap: 0 };
        let (x0, x1, y0, y1) = (src_cell(&x), tgt_cell(&x), src_cell(&y), tgt_cell(&y));
        let wl2 = |e: CellKey, f: CellKey| Op::app(&wl(0, 2), vec![g(e), g(f)]);
        let wr2 = |f: CellKey, e: CellKey| Op::app(&wr(0, 2), vec![g(f), g(e)]);
        let lr = Op::app(&comp(2), vec![wl2(x0.clone(), y.clone()), wr2(x.clone(), y1.clone())]);
        let rl = Op::app(&comp(2), vec![wr2(x.clone(), y0), wl2(x1, y)]);
        b.push(SymbolSpec::new("xi_lr", a.clone(), lr.clone(), rl.clone()));
        b.push(SymbolSpec::new("xi_rl", a, rl, lr));

        let a4 = Tree::new(vec![Tree::leaf(); 4]);
        let v = leaves(&a4);
        let c1 = |x: Op, y: Op| Op::app("c1", vec![x, y]);
        let c2 = |x: Op, y: Op| Op::app("c2", vec![x, y]);
        let as0 = |x: Op, y: Op, z: Op| Op::app("assoc0", vec![x, y, z]);
        let (p, q, r, s) = (v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone());
        let path1 = c2(as0(c1(p.clone(), q.clone()), r.clone(), s.clone()), as0(p.clone(), q.clone(), c1(r.clone(), s.clone())));
        let path2 = c2(
            c2(
                Op::app(&wr(0, 2), vec![as0(p.clone(), q.clone(), r.clone()), s.clone()]),
                as0(p.clone(), c1(q.clone(), r.clone()), s.clone()),
            ),
            Op::app(&wl(0, 2), vec![p, as0(q, r, s)]),
        );
        b.push(SymbolSpec::new("pentagonator", a4, path2, path1));

        let a2 = Tree::new(vec![Tree::leaf(); 2]);
        let v = leaves(&a2);
        let (p, q) = (v[0].clone(), v[1].clone());
        let mid = Op::app("id0", vec![g(CellKey { path: vec![], gap: 1 })]);
        let lhs = Op::app(&wr(0, 2), vec![Op::app("l2", vec![p.clone()]), q.clone()]);
        let rhs = c2(Op::app(&wl(0, 2), vec![p.clone(), Op::app("r2", vec![q.clone()])]), Op::app("assoc_inv0", vec![p, mid, q]));
        b.push(SymbolSpec::new("triangle", a2, lhs, rhs));
    }
    b
}

/// Compositions, identities and unitors (`𝐜_k`, `𝐢𝐝_k`, `𝐥_k`, `𝐫_k`) and
/// the whiskering family, one stage per dimension.
pub fn standard_systems(th: &mut Theory) -> Res<()> {
    let n = th.n;
    for k in 1..=n + 1 {
        th.extend(systems_batch(n, k))?;
    }
    record_systems(th);
    Ok(())
}

fn record_systems(th: &mut Theory) {
    let n = th.n;
    th.systems.insert("comp".into(), (1..=n).map(comp).collect());
    th.systems.insert("id".into(), (0..n).map(ident).collect());
    th.systems.insert("unit".into(), (2..=n + 1).flat_map(|k| [format!("l{k}"), format!("r{k}")]).collect());
}

/// The shipped batch library: systems plus associators, interchangers,
/// pentagonator and triangle.
pub fn standard_library(n: usize, kind: Kind) -> Res<Theory> {
    let mut th = Theory::base(n, kind);
    for k in 1..=n + 1 {
        let mut b = systems_batch(n, k);
        b.extend(extras_batch(n, k));
        th.extend(b)?;
    }
    record_systems(&mut th);
    Ok(th)
}

/// Name of `γ: D_d → D_1^{⊗m} ∐ D_d ∐ D_1^{⊗k}`; `None` for the identity.
pub fn gamma_name(m: usize, d: usize, k: usize) -> Option<String> {
    match (m, k) {
        (0, 0) => None,
        (1, 0) => Some(wl(0, d)),
        (0, 1) => Some(wr(0, d)),
        _ => Some(format!("gamma{m}_{d}_{k}")),
    }
}

pub fn gamma_arity(m: usize, d: usize, k: usize) -> Tree {
    let mut kids = vec![Tree::leaf(); m];
    kids.push(Tree::globe(d - 1));
    kids.extend(vec![Tree::leaf(); k]);
    Tree::new(kids)
}

/// Adds `γ_{m,d,k}` and its lower-dimensional companions if missing.
pub fn ensure_gamma(th: &mut Theory, m: usize, d: usize, k: usize) -> Res<Option<String>> {
    let Some(name) = gamma_name(m, d, k) else { return Ok(None) };
    if th.has(&name) {
        return Ok(Some(name));
    }
    if d > th.n {
        return Err(TheoryError::Type(format!("{name} exceeds the truncation")));
    }
    if d > 1 {
        ensure_gamma(th, m, d - 1, k)?;
    }
    let a = gamma_arity(m, d, k);
    let v = leaves(&a);
    let alpha = leaf_cell(&a, m);
    let spec = if d == 1 {
        SymbolSpec::new(&name, a.clone(), g(CellKey { path: vec![], gap: 0 }), g(CellKey { path: vec![], gap: m + k + 1 }))
    } else {
        let lower = gamma_name(m, d - 1, k).unwrap();
        let mk = |face: CellKey| {
            let mut args = v.clone();
            args[m] = g(face);
            Op::app(&lower, args)
        };
        SymbolSpec::new(&name, a, mk(src_cell(&alpha)), mk(tgt_cell(&alpha)))
    };
    th.adjoin(spec)?;
    Ok(Some(name))
}

/// `γ_{m,d,k}` applied to a tuple, or the middle entry when `m = k = 0`.
pub fn gamma_op(th: &mut Theory, m: usize, d: usize, k: usize, args: Vec<Op>) -> Res<Op> {
    match ensure_gamma(th, m, d, k)? {
        None => Ok(args[0].clone()),
        Some(n) => Ok(Op::app(&n, args)),
    }
}

/// `𝔠^W`: adjoins left and right inverse systems `𝐢^l_k, 𝐢^r_k` and
/// `𝐤^l_k, 𝐤^r_k` against the chosen compositions and identities.
pub fn groupoidalize(th: &Theory) -> Res<Theory> {
    if !th.systems.contains_key("comp") || !th.systems.contains_key("id") {
        return Err(TheoryError::MissingSystems("comp and id".into()));
    }
    let mut out = th.clone();
    let n = th.n;
    let mut names = Vec::new();
    for k in 1..=n + 1 {
        if k <= n {
            let x = top(k);
            for s in ["il", "ir"] {
                let name = format!("{s}{k}");
                out.add_free(&name, Tree::globe(k), (g(tgt_cell(&x)), g(src_cell(&x))), false)?;
                names.push(name);
            }
        }
        if k >= 2 {
            let x = top(k - 1);
            let a = Tree::globe(k - 1);
            let c = comp(k - 1);
            let id = ident(k - 2);
            let kl = (
                Op::app(&id, vec![g(src_cell(&x))]),
                Op::app(&c, vec![g(x.clone()), Op::app(&format!("il{}", k - 1), vec![g(x.clone())])]),
            );
            let kr = (
                Op::app(&id, vec![g(tgt_cell(&x))]),
                Op::app(&c, vec![Op::app(&format!("ir{}", k - 1), vec![g(x.clone())]), g(x.clone())]),
            );
            out.add_free(&format!("kl{k}"), a.clone(), kl, k == n + 1)?;
            out.add_free(&format!("kr{k}"), a, kr, k == n + 1)?;
            names.push(format!("kl{k}"));
            names.push(format!("kr{k}"));
        }
    }
    out.systems.insert("inv".into(), names);
    Ok(out)
}

/// Counts of adjoined inverse symbols: `(i-symbols, k-operations, k-equations)`.
pub fn inverse_counts(th: &Theory) -> (usize, usize, usize) {
    let inv: Vec<&OperationSymbol> = th.symbols().iter().filter(|s| s.name.starts_with('i') && s.origin == super::Origin::Inverse).collect();
    let ks: Vec<&OperationSymbol> = th.symbols().iter().filter(|s| s.name.starts_with('k')).collect();
    (inv.len(), ks.iter().filter(|s| !s.is_equation()).count(), ks.iter().filter(|s| s.is_equation()).count())
}

/// Generating cofibrations `I_n` (boundary inclusions and the collapse of
/// two parallel `n`-cells) and `J_n` (source maps).
#[derive(Clone, Debug)]
pub struct Cofibrations {
    pub i: Vec<(String, GlobMap)>,
    pub j: Vec<(String, GlobMap)>,
}

pub fn generating_cofibrations(n: usize) -> Cofibrations {
    let mut i = Vec::new();
    for k in 0..=n {
        i.push((format!("S^{} -> D_{k}", k as isize - 1), globset::sphere_inclusion(k)));
    }
    i.push((format!("(1,1): S^{n} -> D_{n}"), collapse(n)));
    let j = (0..n).map(|k| (format!("sigma_{k}: D_{k} -> D_{}", k + 1), globset::globe_face(k, false))).collect();
    Cofibrations { i, j }
}

fn collapse(n: usize) -> GlobMap {
    let s: GlobSet = globset::sphere(n as isize);
    let d = globset::realize(&Tree::globe(n));
    let mut f = Vec::new();
    for k in 0..=n {
        if k < n {
            f.push((0..s.count(k)).collect());
        } else {
            f.push(vec![0; s.count(k)]);
        }
    }
    GlobMap::new(s.clone(), d.clone(), f)
        .ok()
        .or_else(|| {
            globset::all_maps(&s, &d).into_iter().find(|m| (0..n).all(|k| m.f[k].iter().collect::<std::collections::BTreeSet<_>>().len() == 2))
        })
        .expect("collapse map")
}

/// The interval presentation: points `0, 1`, edges `g: 0 → 1`,
/// `f: 1 → 0`, `k: 0 → 1`, 2-cells `1_0 ⇒ gf` and `1_1 ⇒ fk`; the
/// designated cell is `f`.
pub struct Interval {
    pub computad: Computad,
    pub alpha: String,
}

pub fn interval_presentation(th: &Theory) -> Res<Interval> {
    let mut cx = Computad::new();
    let p0 = cx.add_point("0")?;
    let p1 = cx.add_point("1")?;
    let gg = cx.add_cell(th, "g", p0.clone(), p1.clone())?;
    let ff = cx.add_cell(th, "f", p1.clone(), p0.clone())?;
    let kk = cx.add_cell(th, "k", p0.clone(), p1.clone())?;
    let id = |p: Expr| Expr::Sym { sym: "id0".into(), args: vec![p] };
    let c1 = |a: Expr, b: Expr| Expr::Sym { sym: "c1".into(), args: vec![a, b] };
    cx.add_cell(th, "left", id(p0), c1(gg, ff.clone()))?;
    cx.add_cell(th, "right", id(p1), c1(ff, kk))?;
    Ok(Interval { computad: cx, alpha: "f".into() })
}

/// A formal composite of cells in a free model, factor by factor.
#[derive(Clone, Debug)]
pub struct Schema {
    pub computad: Computad,
    pub factors: Vec<Expr>,
    pub composite: Expr,
}

fn compose_chain(cx: &Ctx, factors: &[Expr]) -> Res<Expr> {
    let d = cx.dim(&factors[0])?;
    let c = comp(d);
    let mut acc = factors[0].clone();
    for f in &factors[1..] {
        acc = cx.sym(&c, vec![acc, f.clone()])?;
    }
    Ok(acc)
}

/// Division schema: from `H: fA → fB`, a cell `A → B` assembled from
/// coherence constraints and a whiskering of `H` by `f⁻¹`.
pub fn division_term(th: &Theory, n: usize) -> Res<Schema> {
    let need = ["ir1", "kr2", "il2", "assoc0", "assoc_inv0", "r2", "wl0_2", "wr0_2"];
    for s in need {
        th.symbol(s).map_err(|_| TheoryError::MissingSystems(s.into()))?;
    }
    let mut cx = Computad::new();
    let w = cx.add_point("w")?;
    let x = cx.add_point("x")?;
    let y = cx.add_point("y")?;
    let f = cx.add_cell(th, "f", w, x.clone())?;
    let s = |sym: &str, args: Vec<Expr>| Expr::Sym { sym: sym.into(), args };
    let finv = s("ir1", vec![f.clone()]);
    // u ⇒ f⁻¹(f u) and back, for a 1-cell u out of x
    let into = |u: &Expr| {
        s(
            "c2",
            vec![
                s("c2", vec![s("r2", vec![u.clone()]), s("wr0_2", vec![s("kr2", vec![f.clone()]), u.clone()])]),
                s("assoc0", vec![finv.clone(), f.clone(), u.clone()]),
            ],
        )
    };
    let back = |u: &Expr| {
        s(
            "c2",
            vec![
                s("c2", vec![s("assoc_inv0", vec![finv.clone(), f.clone(), u.clone()]), s("wr0_2", vec![s("il2", vec![s("kr2", vec![f.clone()])]), u.clone()])]),
                s("il2", vec![s("r2", vec![u.clone()])]),
            ],
        )
    };
    match n {
        1 => {
            let a = cx.add_cell(th, "A", x.clone(), y.clone())?;
            let b = cx.add_cell(th, "B", x.clone(), y.clone())?;
            let fa = s("c1", vec![f.clone(), a.clone()]);
            let fb = s("c1", vec![f.clone(), b.clone()]);
            let h = cx.add_cell(th, "H", fa, fb)?;
            let ctx = Ctx::new(th, &cx);
            let factors = vec![into(&a), s("wl0_2", vec![finv.clone(), h]), back(&b)];
            for e in &factors {
                ctx.check(e)?;
            }
            let composite = compose_chain(&ctx, &factors)?;
            ctx.check(&composite)?;
            Ok(Schema { computad: cx, factors, composite })
        }
        2 => {
            for s in ["wl0_3", "wl1_2", "wr1_2"] {
                th.symbol(s).map_err(|_| TheoryError::MissingSystems(s.into()))?;
            }
            let u = cx.add_cell(th, "u", x.clone(), y.clone())?;
            let v = cx.add_cell(th, "v", x.clone(), y.clone())?;
            let a = cx.add_cell(th, "A", u.clone(), v.clone())?;
            let b = cx.add_cell(th, "B", u.clone(), v.clone())?;
            let fa = s("wl0_2", vec![f.clone(), a.clone()]);
            let fb = s("wl0_2", vec![f.clone(), b.clone()]);
            let h = cx.add_cell(th, "H", fa, fb)?;
            let ctx = Ctx::new(th, &cx);
            let conj = |z: &Expr| {
                s("c2", vec![s("c2", vec![into(&u), s("wl0_2", vec![finv.clone(), s("wl0_2", vec![f.clone(), z.clone()])])]), back(&v)])
            };
            let mid = s(
                "wr1_2",
                vec![s("wl1_2", vec![into(&u), s("wl0_3", vec![finv.clone(), h])]), back(&v)],
            );
            let first = ctx.opaque("constraint(A)", a.clone(), conj(&a))?;
            let last = ctx.opaque("constraint(B)", conj(&b), b.clone())?;
            let factors = vec![first, mid, last];
            for e in &factors {
                ctx.check(e)?;
            }
            let composite = compose_chain(&ctx, &factors)?;
            ctx.check(&composite)?;
            Ok(Schema { computad: cx, factors, composite })
        }
        _ => Err(TheoryError::Type(format!("division schemas exist for n = 1, 2, not {n}"))),
    }
}

/// A cell from a left inverse `k` to a right inverse `g` of `f`.
pub fn promote_inverse_term(th: &Theory) -> Res<Schema> {
    let mut cx = Computad::new();
    let a = cx.add_point("a")?;
    let b = cx.add_point("b")?;
    let f = cx.add_cell(th, "f", a, b)?;
    let s = |sym: &str, args: Vec<Expr>| Expr::Sym { sym: sym.into(), args };
    let k = s("il1", vec![f.clone()]);
    let gg = s("ir1", vec![f.clone()]);
    let ctx = Ctx::new(th, &cx);
    let f1 = s("c2", vec![s("r2", vec![k.clone()]), s("wr0_2", vec![s("kr2", vec![f.clone()]), k.clone()])]);
    let f2 = s(
        "c2",
        vec![
            s("c2", vec![s("assoc0", vec![gg.clone(), f.clone(), k.clone()]), s("wl0_2", vec![gg.clone(), s("ir2", vec![s("kl2", vec![f.clone()])])])]),
            s("il2", vec![s("l2", vec![gg])]),
        ],
    );
    let factors = vec![f1, f2];
    for e in &factors {
        ctx.check(e)?;
    }
    let composite = compose_chain(&ctx, &factors)?;
    ctx.check(&composite)?;
    Ok(Schema { computad: cx, factors, composite })
}

/// Random well-typed operations over `target`, built greedily from the
/// Θ-evaluable symbols of `th`.
pub fn random_op_pool<R: Rng>(th: &Theory, rng: &mut R, target: &Tree, depth: usize, per_symbol: usize) -> Vec<Vec<Op>> {
    let dmax = th.n;
    let mut pool: Vec<Vec<Op>> = vec![Vec::new(); dmax + 1];
    for (k, cs) in target.cells().into_iter().enumerate() {
        if k <= dmax {
            pool[k].extend(cs.into_iter().map(Op::Glob));
        }
    }
    let syms: Vec<&OperationSymbol> = th
        .symbols()
        .iter()
        .filter(|s| s.theta_image.is_some() && !s.is_equation() && s.dim <= dmax && s.boundary.is_some())
        .collect();
    for _ in 0..depth {
        let mut add = Vec::new();
        for s in &syms {
            for _ in 0..per_symbol {
                if let Some(args) = random_tuple(th, rng, &s.arity, &pool) {
                    add.push((s.dim, Op::App { sym: s.name.clone(), args }));
                }
            }
        }
        for (d, op) in add {
            if !pool[d].contains(&op) {
                pool[d].push(op);
            }
        }
    }
    pool
}

/// A random tuple of operations indexed by the leaves of `a`.
pub fn random_tuple<R: Rng>(th: &Theory, rng: &mut R, a: &Tree, pool: &[Vec<Op>]) -> Option<Vec<Op>> {
    let table = a.table();
    for _attempt in 0..8 {
        let mut out: Vec<Op> = Vec::new();
        let mut ok = true;
        for (i, &h) in table.tops.iter().enumerate() {
            let cands = pool.get(h)?;
            let mut idx: Vec<usize> = (0..cands.len()).collect();
            idx.shuffle(rng);
            let pick = idx.into_iter().find(|&c| {
                if i == 0 {
                    return true;
                }
                let j = table.joins[i - 1];
                let mut x = out[i - 1].clone();
                for _ in j..table.tops[i - 1] {
                    match th.face(&x, true) {
                        Ok(y) => x = y,
                        Err(_) => return false,
                    }
                }
                let mut y = cands[c].clone();
                for _ in j..h {
                    match th.face(&y, false) {
                        Ok(z) => y = z,
                        Err(_) => return false,
                    }
                }
                x == y
            });
            match pick {
                Some(c) => out.push(cands[c].clone()),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Some(out);
        }
    }
    None
}

pub fn random_term<R: Rng>(th: &Theory, rng: &mut R, source: &Tree, target: &Tree, depth: usize) -> Option<Term> {
    let pool = random_op_pool(th, rng, target, depth, 2);
    let entries = random_tuple(th, rng, source, &pool)?;
    let entries = entries.into_iter().map(|e| th.normalize(&e)).collect::<Res<Vec<_>>>().ok()?;
    Some(Term { source: source.clone(), target: target.clone(), entries })
}

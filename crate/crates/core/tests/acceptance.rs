//! Acceptance suite: one PASS/FAIL line per criterion, each with a pinned
//! runtime bound. Oracles here are written independently of the library.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::{Duration, Instant};

use globwb::cylinder::{self, chain_sides, vcompose_meta, CylMeta, Side, StackSquare};
use globwb::globset::{self, CoglobFamily, GlobMap, GlobSet};
use globwb::theory::library::{self, groupoidalize, standard_library};
use globwb::theory::expr::{rename_expr, Computad};
use globwb::theory::{Kind, Origin, Theory};
use globwb::theta::{self, ThetaMap};
use globwb::tree::{self, Klass, Tree};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn t(s: &str) -> Tree {
    s.parse().unwrap()
}

// ---------------------------------------------------------------------------
// Oracles

/// Globular set of a tree by direct recursion: the points `0..=p`, and for
/// child `i` the suspension of the child between points `i` and `i+1`.
/// Cells per dimension with (source, target) indices.
#[derive(Clone, Debug)]
struct Cells {
    count: Vec<usize>,
    faces: Vec<Vec<(usize, usize)>>,
}

fn oracle_cells(a: &Tree) -> Cells {
    let mut count = vec![a.children().len() + 1];
    let mut faces: Vec<Vec<(usize, usize)>> = vec![vec![]];
    for (i, c) in a.children().iter().enumerate() {
        let sub = oracle_cells(c);
        let mut off = Vec::new();
        for d in 0..sub.count.len() {
            if count.len() <= d + 1 {
                count.push(0);
                faces.push(vec![]);
            }
            off.push(count[d + 1]);
        }
        for d in 0..sub.count.len() {
            for x in 0..sub.count[d] {
                let f = if d == 0 { (i, i + 1) } else { (off[d - 1] + sub.faces[d][x].0, off[d - 1] + sub.faces[d][x].1) };
                faces[d + 1].push(f);
            }
            count[d + 1] += sub.count[d];
        }
    }
    Cells { count, faces }
}

/// Number of `k`-cells of the free strict ω-category on a pasting diagram,
/// counted as Steiner tables `(x_0^∓, …, x_k^∓)` of 0/1 chains with
/// `∂x_i^∓ = x_{i−1}^+ − x_{i−1}^−`, `x_k^− = x_k^+`, and `x_0^∓` single points.
fn steiner_count(c: &Cells, k: usize) -> u64 {
    let dimn = |d: usize| if d < c.count.len() { c.count[d] } else { 0 };
    let boundary = |d: usize, x: &[i32]| -> Vec<i32> {
        let mut out = vec![0; dimn(d - 1)];
        for (i, &v) in x.iter().enumerate() {
            if v != 0 {
                let (s, t) = c.faces[d][i];
                out[t] += v;
                out[s] -= v;
            }
        }
        out
    };
    fn subsets(n: usize) -> Vec<Vec<i32>> {
        (0..1u32 << n).map(|m| (0..n).map(|i| ((m >> i) & 1) as i32).collect()).collect()
    }
    // Counts tables below level `d` given x_d^− = a, x_d^+ = b.
    fn below(d: usize, a: &[i32], b: &[i32], bd: &dyn Fn(usize, &[i32]) -> Vec<i32>, n: &dyn Fn(usize) -> usize) -> u64 {
        if d == 0 {
            let single = |x: &[i32]| x.iter().sum::<i32>() == 1;
            return u64::from(single(a) && single(b));
        }
        let da = bd(d, a);
        if da != bd(d, b) {
            return 0;
        }
        let mut total = 0;
        for lo in subsets(n(d - 1)) {
            let hi: Vec<i32> = lo.iter().zip(&da).map(|(x, y)| x + y).collect();
            if hi.iter().all(|&v| v == 0 || v == 1) {
                total += below(d - 1, &lo, &hi, bd, n);
            }
        }
        total
    }
    subsets(dimn(k)).iter().map(|x| below(k, x, x, &boundary, &dimn)).sum()
}

/// Table of dimensions read directly off the tree.
fn oracle_table(a: &Tree) -> (Vec<usize>, Vec<usize>) {
    fn leaves(a: &Tree, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if a.children().is_empty() {
            out.push(path.clone());
        }
        for (i, c) in a.children().iter().enumerate() {
            path.push(i);
            leaves(c, path, out);
            path.pop();
        }
    }
    let mut ls = Vec::new();
    leaves(a, &mut vec![], &mut ls);
    let tops = ls.iter().map(Vec::len).collect();
    let joins = ls.windows(2).map(|w| w[0].iter().zip(&w[1]).take_while(|(x, y)| x == y).count()).collect();
    (tops, joins)
}

/// Boundary by the table rule: lower the tops of dimension `n` by one, then
/// merge neighbouring globes that became equal to their junction.
fn oracle_boundary_table(a: &Tree) -> (Vec<usize>, Vec<usize>) {
    let (tops, joins) = oracle_table(a);
    let n = *tops.iter().max().unwrap();
    let mut tops: Vec<usize> = tops.into_iter().map(|x| if x == n { n - 1 } else { x }).collect();
    let mut joins = joins;
    loop {
        let mut changed = false;
        for k in 0..joins.len() {
            if tops[k] == joins[k] {
                tops.remove(k);
                joins.remove(k);
                changed = true;
                break;
            }
            if tops[k + 1] == joins[k] {
                tops.remove(k + 1);
                joins.remove(k);
                changed = true;
                break;
            }
        }
        if !changed {
            break;
        }
    }
    (tops, joins)
}

fn is_bijective_degreewise(f: &GlobMap, upto: usize) -> bool {
    (0..=upto).all(|k| {
        let (n, m) = (f.dom.count(k), f.cod.count(k));
        let img: BTreeSet<usize> = f.f.get(k).map(|v| v.iter().copied().collect()).unwrap_or_default();
        n == m && img.len() == n
    })
}

fn commutes_with_faces(f: &GlobMap) -> bool {
    (1..f.dom.dims()).all(|k| {
        (0..f.dom.count(k)).all(|x| {
            f.cod.src(k, f.f[k][x]) == f.f[k - 1][f.dom.src(k, x)] && f.cod.tgt(k, f.f[k][x]) == f.f[k - 1][f.dom.tgt(k, x)]
        })
    })
}

/// m-fully-faithful: for `i ≥ m`, cells of `X_{i+1}` over each parallel pair
/// of `X_i` correspond bijectively to cells of `Y_{i+1}` over its image.
fn oracle_ff(f: &GlobMap, m: usize) -> bool {
    let top = f.dom.dims().max(f.cod.dims());
    let x = f.dom.padded(top + 1);
    let y = f.cod.padded(top + 1);
    let fm = |k: usize, a: usize| f.f[k][a];
    for i in m..top {
        if i + 1 >= f.f.len() && x.count(i + 1) == 0 && y.count(i + 1) == 0 {
            continue;
        }
        for a in 0..x.count(i) {
            for b in 0..x.count(i) {
                if i > 0 && !(x.src(i, a) == x.src(i, b) && x.tgt(i, a) == x.tgt(i, b)) {
                    continue;
                }
                let over_x: Vec<usize> = (0..x.count(i + 1)).filter(|&c| x.src(i + 1, c) == a && x.tgt(i + 1, c) == b).collect();
                let over_y: BTreeSet<usize> =
                    (0..y.count(i + 1)).filter(|&c| y.src(i + 1, c) == fm(i, a) && y.tgt(i + 1, c) == fm(i, b)).collect();
                let img: BTreeSet<usize> = over_x.iter().map(|&c| fm(i + 1, c)).collect();
                if img.len() != over_x.len() || img != over_y {
                    return false;
                }
            }
        }
    }
    true
}

/// All `d: W → W'` with `d ∘ i = u` and `p ∘ d = v`, by backtracking.
fn oracle_diagonals(i: &GlobMap, p: &GlobMap, u: &GlobMap, v: &GlobMap) -> Vec<Vec<Vec<usize>>> {
    let w = &i.cod;
    let wp = &p.dom;
    let dims = w.dims();
    let mut fixed: Vec<HashMap<usize, usize>> = vec![HashMap::new(); dims];
    for k in 0..dims.min(i.f.len()) {
        for (a, &b) in i.f[k].iter().enumerate() {
            if let Some(&old) = fixed[k].get(&b) {
                if old != u.f[k][a] {
                    return vec![];
                }
            }
            fixed[k].insert(b, u.f[k][a]);
        }
    }
    let cells: Vec<(usize, usize)> = (0..dims).flat_map(|k| (0..w.count(k)).map(move |c| (k, c))).collect();
    let mut out = Vec::new();
    let mut cur: Vec<Vec<usize>> = (0..dims).map(|k| vec![usize::MAX; w.count(k)]).collect();
    fn go(
        n: usize,
        cells: &[(usize, usize)],
        w: &GlobSet,
        wp: &GlobSet,
        p: &GlobMap,
        v: &GlobMap,
        fixed: &[HashMap<usize, usize>],
        cur: &mut Vec<Vec<usize>>,
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        if out.len() > 2 {
            return;
        }
        if n == cells.len() {
            out.push(cur.clone());
            return;
        }
        let (k, c) = cells[n];
        let cands: Vec<usize> = match fixed[k].get(&c) {
            Some(&x) => vec![x],
            None => (0..wp.count(k)).collect(),
        };
        for x in cands {
            if p.f[k][x] != v.f[k][c] {
                continue;
            }
            if k > 0 && (wp.src(k, x) != cur[k - 1][w.src(k, c)] || wp.tgt(k, x) != cur[k - 1][w.tgt(k, c)]) {
                continue;
            }
            cur[k][c] = x;
            go(n + 1, cells, w, wp, p, v, fixed, cur, out);
            cur[k][c] = usize::MAX;
        }
    }
    go(0, &cells, w, wp, p, v, &fixed, &mut cur, &mut out);
    out
}

/// Globular by definition: every leaf globe of the source lands on a cell
/// of the same dimension.
fn oracle_globular(g: &ThetaMap) -> bool {
    let s = &g.source;
    s.leaf_paths().iter().all(|path| {
        let c = tree::CellKey { path: path.clone(), gap: 0 };
        let leg = theta::compose(&theta::cell_inclusion(s, &c), g).unwrap();
        g.target.cells().get(path.len()).is_some_and(|cs| cs.iter().any(|d| theta::cell_inclusion(&g.target, d) == leg))
    })
}

// ---------------------------------------------------------------------------
// Criteria

fn c1_lins() -> Check {
    let a = t("[[[][]][]]");
    let lin = a.linearization();
    ensure(lin.len() == 9, || format!("|L(A)| = {}", lin.len()))?;
    let mut multiset: BTreeMap<String, usize> = BTreeMap::new();
    for x in &lin {
        *multiset.entry(x.klass.to_string()).or_default() += 1;
    }
    let want: BTreeMap<String, usize> = [
        (Klass::H1Right, 1),
        (Klass::H1Mid, 1),
        (Klass::H1Left, 1),
        (Klass::H2OverEdge, 1),
        (Klass::H2Max, 1),
        (Klass::H2Min, 1),
        (Klass::H2Mid, 1),
        (Klass::H3, 2),
    ]
    .into_iter()
    .map(|(k, n)| (k.to_string(), n))
    .collect();
    ensure(multiset == want, || format!("klass multiset {multiset:?}"))?;
    ensure(lin[0].klass == Klass::H1Right && lin[8].klass == Klass::H1Left, || "endpoints".into())?;
    for x in &lin {
        ensure(x.tree.node_count() == a.node_count() + 1 && x.tree.boundary().is_ok(), || format!("{} is not a one-leaf extension", x.tree))?;
    }
    let marked: BTreeSet<(String, Vec<usize>)> = lin.iter().map(|x| (x.tree.to_string(), x.sector.new_leaf())).collect();
    ensure(marked.len() == 9, || "repeated extension".into())?;
    for x in &lin {
        let leaf = x.sector.new_leaf();
        ensure(x.tree.node(&leaf).is_some_and(|n| n.children().is_empty()), || format!("{}: no new leaf at {leaf:?}", x.tree))?;
    }
    Ok("9 extensions, klass multiset and endpoints as expected".into())
}

fn c2_theta_oracle() -> Check {
    let trees = tree::trees_up_to(4);
    let mut n = 0;
    for a in &trees {
        let cells = oracle_cells(a);
        for k in 0..=3 {
            let want = steiner_count(&cells, k);
            let got = theta::hom(&Tree::globe(k), a).map_err(|e| e.to_string())?.len() as u64;
            ensure(got == want && theta::hom_count(&Tree::globe(k), a) as u64 == want, || {
                format!("hom(D_{k}, {a}) = {got}, Steiner oracle {want}")
            })?;
            n += 1;
        }
    }
    let hc = |k: usize, j: usize| theta::hom(&Tree::globe(k), &Tree::globe(j)).unwrap().len();
    ensure(hc(1, 1) == 3 && hc(1, 2) == 4 && hc(2, 2) == 5, || "anchored counts".into())?;
    Ok(format!("{n} (tree, k) pairs agree with the Steiner oracle"))
}

fn c3_laws() -> Check {
    let trees = tree::trees_up_to(3);
    let homs: HashMap<(usize, usize), Vec<ThetaMap>> = (0..trees.len())
        .flat_map(|i| (0..trees.len()).map(move |j| (i, j)))
        .map(|(i, j)| ((i, j), theta::hom(&trees[i], &trees[j]).unwrap()))
        .collect();
    let mut triples = 0;
    let nt = trees.len();
    for a in 0..nt {
        for b in 0..nt {
            for f in &homs[&(a, b)] {
                let l = theta::compose(&ThetaMap::identity(&trees[a]), f).map_err(|e| e.to_string())?;
                let r = theta::compose(f, &ThetaMap::identity(&trees[b])).map_err(|e| e.to_string())?;
                ensure(&l == f && &r == f, || format!("unit law fails at {f}"))?;
                for c in 0..nt {
                    for g in &homs[&(b, c)] {
                        let fg = theta::compose(f, g).unwrap();
                        for d in 0..nt {
                            for h in &homs[&(c, d)] {
                                let x = theta::compose(&fg, h).unwrap();
                                let y = theta::compose(f, &theta::compose(g, h).unwrap()).unwrap();
                                ensure(x == y, || format!("associativity fails at {f}, {g}, {h}"))?;
                                triples += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{triples} composable triples, units on all maps"))
}

fn c4_hg() -> Check {
    let trees = tree::trees_up_to(4);
    let mut globulars: HashMap<(Tree, Tree), Vec<ThetaMap>> = HashMap::new();
    for b in &trees {
        for c in &trees {
            let gs: Vec<ThetaMap> = theta::hom(b, c).unwrap().into_iter().filter(oracle_globular).collect();
            globulars.insert((b.clone(), c.clone()), gs);
        }
    }
    let mut n = 0;
    for a in &trees {
        for c in &trees {
            for f in theta::hom(a, c).unwrap() {
                let hg = theta::hg_factorize(&f);
                ensure(theta::compose(&hg.homogeneous, &hg.globular).unwrap() == f, || format!("{f}: h;g ≠ f"))?;
                ensure(oracle_globular(&hg.globular), || format!("{f}: right factor not globular"))?;
                // Every factorization through a globular map, found exhaustively.
                let mut alts = Vec::new();
                for b in &trees {
                    for g in &globulars[&(b.clone(), c.clone())] {
                        for h in theta::hom(a, b).unwrap() {
                            if theta::compose(&h, g).unwrap() == f {
                                alts.push((h, g.clone()));
                            }
                        }
                    }
                }
                // Homogeneous by definition: f has no factorization through a
                // globular map other than an isomorphism.
                let hom_def = alts.iter().all(|(_, g)| g.source == g.target);
                ensure(hom_def == theta::is_homogeneous(&f), || format!("{f}: is_homogeneous disagrees with the definition"))?;
                let homog: Vec<&(ThetaMap, ThetaMap)> = alts.iter().filter(|(h, _)| is_homogeneous_def(h, &globulars)).collect();
                ensure(homog.len() == 1, || format!("{f}: {} homogeneous-globular factorizations", homog.len()))?;
                ensure(homog[0].0 == hg.homogeneous && homog[0].1 == hg.globular, || format!("{f}: factorization differs"))?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} maps factor uniquely"))
}

fn is_homogeneous_def(h: &ThetaMap, globulars: &HashMap<(Tree, Tree), Vec<ThetaMap>>) -> bool {
    for ((b, c), gs) in globulars {
        if *c != h.target || *b == h.target {
            continue;
        }
        for g in gs {
            if theta::hom(&h.source, b).unwrap().iter().any(|k| theta::compose(k, g).unwrap() == *h) {
                return false;
            }
        }
    }
    true
}

fn c5_bijff() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut total = 0;
    for m in 0..=3 {
        let mut done = 0;
        let mut tries = 0;
        while done < 200 {
            tries += 1;
            ensure(tries < 20_000, || format!("m={m}: could not sample 200 maps"))?;
            let x = globset::random_globset(&mut rng, 4, 3);
            let y = globset::random_globset(&mut rng, 4, 3);
            let Some(f) = globset::random_map(&mut rng, &x, &y, 200) else { continue };
            done += 1;
            let (h, g) = globset::factor_bij_ff(&f, m);
            let comp = h.then(&g).map_err(|e| e.to_string())?;
            let dims = f.dom.dims();
            ensure((0..dims).all(|k| comp.f[k] == f.f[k]), || format!("m={m}: g∘h ≠ f"))?;
            ensure(commutes_with_faces(&h) && commutes_with_faces(&g), || "factors are not maps".into())?;
            ensure(is_bijective_degreewise(&h, m.min(h.dom.dims() - 1)), || format!("m={m}: h not m-bijective"))?;
            ensure(oracle_ff(&g, m), || format!("m={m}: g not m-fully faithful"))?;
            let (b, ff) = globset::classify(&h, m);
            let (_, ff2) = globset::classify(&g, m);
            ensure(b && ff2, || format!("m={m}: classify disagrees"))?;
            ensure(oracle_ff(&f, m) == ff_of(&f, m), || format!("m={m}: classify(f) disagrees with the oracle"))?;
            // The square (h, g; h, g) has exactly the identity as diagonal.
            let ds = oracle_diagonals(&h, &g, &h, &g);
            let id: Vec<Vec<usize>> = (0..h.cod.dims()).map(|k| (0..h.cod.count(k)).collect()).collect();
            ensure(ds.len() == 1 && ds[0] == id, || format!("m={m}: {} diagonals", ds.len()))?;
            let lib = globset::check_orthogonal(&h, &g, &h, &g).map_err(|e| e.to_string())?;
            ensure(lib.f[..id.len()] == id[..], || "check_orthogonal returned another filler".into())?;
            let _ = ff;
            total += 1;
        }
    }
    Ok(format!("{total} random maps factor with unique lifts"))
}

fn ff_of(f: &GlobMap, m: usize) -> bool {
    globset::classify(f, m).1
}

fn c6_latching() -> Check {
    let fam = CoglobFamily::globes(5);
    for m in 1..=4 {
        let l = globset::latching(&fam, m).map_err(|e| e.to_string())?;
        let s = globset::sphere(m as isize - 1);
        let apex = l.apex.padded(s.dims());
        let iso = globset::find_iso(&apex, &s).ok_or_else(|| format!("latching at {m} is not S^{}", m - 1))?;
        ensure(is_bijective_degreewise(&iso, s.dims() - 1) && commutes_with_faces(&iso), || format!("m={m}: not an iso"))?;
        ensure(apex.counts() == vec![2; m].into_iter().chain(vec![0; s.dims() - m]).collect::<Vec<_>>(), || {
            format!("m={m}: counts {:?}", apex.counts())
        })?;
    }
    let mut n = 0;
    for a in tree::trees_up_to(6) {
        if a.dim() == 0 {
            ensure(a.boundary().is_err(), || "D_0 has a boundary".into())?;
            continue;
        }
        let b = a.boundary().map_err(|e| e.to_string())?;
        ensure(oracle_table(&b) == oracle_boundary_table(&a), || {
            format!("∂{a} = {b}, table oracle {:?}", oracle_boundary_table(&a))
        })?;
        let cells = oracle_cells(&a);
        ensure(globset::realize(&a).counts().iter().take(cells.count.len()).eq(cells.count.iter()), || format!("realize({a})"))?;
        n += 1;
    }
    Ok(format!("latching ≅ S^(m-1) for m = 1..4; {n} boundaries match the table oracle"))
}

fn c7_tower() -> Check {
    let th = standard_library(3, Kind::Categorical).map_err(|e| e.to_string())?;
    let gth = standard_library(3, Kind::Groupoidal).map_err(|e| e.to_string())?;
    for tt in [&th, &gth] {
        for (name, r) in tt.audit() {
            ensure(r.is_ok(), || format!("{name}: {r:?}"))?;
        }
        for s in tt.symbols() {
            let (Some(img), Some((b0, b1))) = (&s.theta_image, &s.boundary) else { continue };
            let d = s.dim - 1;
            let f = tt.eval_op(&s.arity, b0).map_err(|e| e.to_string())?;
            let g = tt.eval_op(&s.arity, b1).map_err(|e| e.to_string())?;
            ensure(
                theta::compose(&theta::globe_face(d, false), img).unwrap() == f
                    && theta::compose(&theta::globe_face(d, true), img).unwrap() == g,
                || format!("{}: image is not a filler", s.name),
            )?;
        }
    }
    let w = groupoidalize(&gth).map_err(|e| e.to_string())?;
    let before: BTreeSet<String> = gth.symbols().iter().map(|s| s.name.clone()).collect();
    let added: BTreeSet<String> = w.symbols().iter().map(|s| s.name.clone()).filter(|n| !before.contains(n)).collect();
    let want: BTreeSet<String> = (1..=3)
        .flat_map(|k| [format!("il{k}"), format!("ir{k}")])
        .chain((2..=4).flat_map(|k| [format!("kl{k}"), format!("kr{k}")]))
        .collect();
    ensure(added == want, || format!("groupoidalize added {added:?}"))?;
    for k in 1..=3 {
        for s in ["il", "ir"] {
            let name = format!("{s}{k}");
            let sym = w.symbol(&name).unwrap();
            ensure(sym.origin == Origin::Inverse, || format!("{name}: origin"))?;
            let term = w.symbol_term(&name).map_err(|e| e.to_string())?;
            let x = Theory::identity_term(&Tree::globe(k));
            let (ts, tt) = (w.src(&term).unwrap(), w.tgt(&term).unwrap());
            ensure(ts == w.tgt(&x).unwrap() && tt == w.src(&x).unwrap(), || format!("{name}: boundary"))?;
        }
    }
    for k in 2..=3 {
        for s in ["kl", "kr"] {
            let name = format!("{s}{k}");
            let term = w.symbol_term(&name).map_err(|e| e.to_string())?;
            let src = w.src(&term).unwrap();
            let tgt = w.tgt(&term).unwrap();
            ensure(src.to_string().contains("id") && tgt.to_string().contains(&format!("i{}", &s[1..])), || {
                format!("{name}: {src} ⇒ {tgt}")
            })?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let shapes: Vec<Tree> = tree::trees_up_to(3);
    let mut pairs = 0;
    let mut tries = 0;
    while pairs < 200 {
        tries += 1;
        ensure(tries < 50_000, || "could not sample composable pairs".into())?;
        use rand::seq::SliceRandom;
        let a = Tree::globe(*[0usize, 1, 2].choose(&mut rng).unwrap());
        let b = shapes.choose(&mut rng).unwrap();
        let c = shapes.choose(&mut rng).unwrap();
        let Some(x) = library::random_term(&th, &mut rng, &a, b, 2) else { continue };
        let Some(y) = library::random_term(&th, &mut rng, b, c, 2) else { continue };
        let xy = th.substitute(&x, &y).map_err(|e| e.to_string())?;
        let l = th.eval_theta(&xy).map_err(|e| e.to_string())?;
        let r = theta::compose(&th.eval_theta(&x).unwrap(), &th.eval_theta(&y).unwrap()).unwrap();
        ensure(l == r, || format!("eval_theta not functorial on {x} ; {y}"))?;
        let id = Theory::identity_term(b);
        ensure(th.eval_theta(&id).unwrap() == ThetaMap::identity(b), || "identity".into())?;
        pairs += 1;
    }
    Ok(format!("library audited, inverses {:?}, {pairs} composable pairs", library::inverse_counts(&w)))
}

fn same_faces_under(x: &Computad, y: &Computad, m: &HashMap<String, String>) -> bool {
    let r = |n: &str| m.get(n).cloned().unwrap_or_default();
    m.len() == x.generators().len()
        && m.values().collect::<BTreeSet<_>>().len() == m.len()
        && x.generators().iter().all(|g| {
            let h = y.get(&m[&g.name]).unwrap();
            h.dim == g.dim
                && match (&g.faces, &h.faces) {
                    (None, None) => true,
                    (Some((a, b)), Some((c, d))) => rename_expr(a, &r) == *c && rename_expr(b, &r) == *d,
                    _ => false,
                }
        })
}

fn c8_cylinders() -> Check {
    let th = groupoidalize(&standard_library(3, Kind::Groupoidal).unwrap()).unwrap();
    let want = [vec![2, 1], vec![4, 4, 1], vec![4, 6, 4, 1]];
    for (k, w) in want.iter().enumerate() {
        let c = cylinder::cyl_presentation(k, &th).map_err(|e| e.to_string())?;
        ensure(&c.computad.counts() == w, || format!("cyl(D_{k}) counts {:?}", c.computad.counts()))?;
        cylinder::check_computad(&c.computad, &th).map_err(|e| e.to_string())?;
        let g = cylinder::cyl_glob_sum(&Tree::globe(k), &th).map_err(|e| e.to_string())?;
        let iso = cylinder::find_presentation_iso(&g.computad, &c.computad).ok_or_else(|| format!("no iso at k = {k}"))?;
        ensure(same_faces_under(&g.computad, &c.computad, &iso), || format!("k = {k}: iso does not preserve faces"))?;
    }
    let b = cylinder::boundary_cyl(1, &th).map_err(|e| e.to_string())?;
    let mut counts = b.presentation.computad.counts();
    counts.resize(3, 0);
    ensure(counts == vec![4, 4, 0], || format!("∂cyl(D_1) counts {counts:?}"))?;
    cylinder::check_computad(&b.presentation.computad, &th).map_err(|e| e.to_string())?;
    Ok("(2,1), (4,4,1), (4,6,4,1); ∂cyl(D_1) = (4,4,0); glob sums isomorphic".into())
}

fn expected_flags(k: Klass) -> (bool, bool) {
    match k {
        Klass::H1Right | Klass::H1Left | Klass::H1Mid | Klass::H2OverEdge => (false, false),
        Klass::H2Max => (true, false),
        Klass::H2Min => (false, true),
        Klass::H2Mid | Klass::H3 => (true, true),
    }
}

fn expected_klass(a: &Tree, s: &tree::Sector) -> Klass {
    match s.path.len() {
        0 => {
            let p = a.children().len();
            if s.gap == p {
                Klass::H1Right
            } else if s.gap == 0 {
                Klass::H1Left
            } else {
                Klass::H1Mid
            }
        }
        1 => {
            let m = a.children()[s.path[0]].children().len();
            if m == 0 {
                Klass::H2OverEdge
            } else if s.gap == m {
                Klass::H2Max
            } else if s.gap == 0 {
                Klass::H2Min
            } else {
                Klass::H2Mid
            }
        }
        _ => Klass::H3,
    }
}

fn edge_all(e: &cylinder::Edge, prefix: char) -> bool {
    e.cols.iter().all(|c| match c {
        cylinder::Col::Path(p) => p.iter().all(|x| x.starts_with(prefix)),
        cylinder::Col::Cells(gs) => gs.iter().flatten().all(|w| w.pre.is_empty() && w.post.is_empty() && w.cell.starts_with(prefix)),
    })
}

fn c9_stacks() -> Check {
    let mut trees = 0;
    let mut squares = 0;
    for a in tree::trees_up_to(11) {
        if a.dim() > 2 || a.leaf_count() > 5 {
            continue;
        }
        let rhos: Vec<ThetaMap> = theta::hom(&Tree::globe(2), &a).unwrap().into_iter().filter(theta::is_homogeneous).collect();
        ensure(a.dim() < 2 || !rhos.is_empty(), || format!("{a}: no homogeneous operation"))?;
        for rho in rhos {
            let st = cylinder::stack(&rho).map_err(|e| format!("{a}: {e}"))?;
            let p = a.children().len();
            ensure(st.squares.len() == 2 * a.node_count() - 1, || format!("{a}: {} squares", st.squares.len()))?;
            let first = &st.squares[0].top;
            let last = &st.squares.last().unwrap().bottom;
            ensure(first.pre.is_empty() && first.post == vec![cylinder::cell_name("F", &tree::CellKey { path: vec![], gap: p })] && edge_all(first, 'U'), || {
                format!("{a}: first edge {first}")
            })?;
            ensure(last.post.is_empty() && last.pre == vec![cylinder::cell_name("F", &tree::CellKey { path: vec![], gap: 0 })] && edge_all(last, 'V'), || {
                format!("{a}: last edge {last}")
            })?;
            for (i, sq) in st.squares.iter().enumerate() {
                ensure(sq.klass == expected_klass(&a, &sq.sector), || format!("{a}: square {i} klass {}", sq.klass))?;
                ensure((sq.source_degenerate, sq.target_degenerate) == expected_flags(sq.klass), || {
                    format!("{a}: square {i} ({}) flags", sq.klass)
                })?;
                ensure(
                    sq.source_degenerate == (sq.left == Side::Degenerate) && sq.target_degenerate == (sq.right == Side::Degenerate),
                    || format!("{a}: square {i} sides"),
                )?;
                if i + 1 < st.squares.len() {
                    ensure(sq.bottom == st.squares[i + 1].top, || format!("{a}: squares {i}, {} not composable", i + 1))?;
                }
            }
            cylinder::check_stack(&st).map_err(|e| format!("{a}: {e}"))?;
            cylinder::check_restriction(&st, false).map_err(|e| format!("{a}: {e}"))?;
            cylinder::check_restriction(&st, true).map_err(|e| format!("{a}: {e}"))?;
            let metas: Vec<CylMeta> = st.squares.iter().map(StackSquare::meta).collect();
            for lo in 0..metas.len() {
                for hi in lo + 1..=metas.len() {
                    let w = &metas[lo..hi];
                    let c = vcompose_meta(w).map_err(|e| format!("{a}: {e}"))?;
                    let want_p = w.iter().filter_map(|m| m.p).min();
                    let want_q = w.iter().filter_map(|m| m.q).min();
                    ensure(c.p == want_p && c.q == want_q, || format!("{a}: min rule on {lo}..{hi}"))?;
                    ensure(c.p == (w.iter().any(|m| m.p.is_some())).then_some(0), || format!("{a}: p on {lo}..{hi}"))?;
                }
            }
            let all = vcompose_meta(&metas).unwrap();
            let (ts, tt) = st.atoms.edge_bounds(&all.top).map_err(|e| e.to_string())?;
            let (bs, bt) = st.atoms.edge_bounds(&all.bottom).map_err(|e| e.to_string())?;
            ensure(chain_sides(&all.source, &ts) == Some(bs) && chain_sides(&all.target, &tt) == Some(bt), || {
                format!("{a}: sides do not compose")
            })?;
            squares += st.squares.len();
        }
        trees += 1;
    }
    Ok(format!("{trees} trees, {squares} squares"))
}

fn main() {
    let criteria: [(&str, fn() -> Check, u64); 9] = [
        ("1 linearization golden", c1_lins, 1),
        ("2 Theta vs Steiner oracle", c2_theta_oracle, 60),
        ("3 category laws", c3_laws, 60),
        ("4 homogeneous-globular factorization", c4_hg, 120),
        ("5 (bij_m, ff_m) factorization", c5_bijff, 30),
        ("6 spheres, latching, boundaries", c6_latching, 10),
        ("7 coherator tower", c7_tower, 60),
        ("8 cylinder presentations", c8_cylinders, 10),
        ("9 stack suite", c9_stacks, 120),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f, bound) in criteria {
        if !filter.is_empty() && !filter.iter().any(|x| name.contains(x.as_str())) {
            continue;
        }
        let start = Instant::now();
        let r = f();
        let el = start.elapsed();
        let limit = Duration::from_secs(bound);
        let (tag, msg) = match r {
            Ok(m) if el <= limit => ("PASS", m),
            Ok(m) => ("FAIL", format!("{m}; exceeded {bound}s")),
            Err(m) => ("FAIL", m),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("{tag} criterion {name} ({:.2}s, bound {bound}s): {msg}", el.as_secs_f64());
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

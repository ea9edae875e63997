//! The category Θ of globular sums and operations between them, encoded
//! by iterated wreath data.
//!
//! A map `S → T` is a monotone map `φ: [m] → [n]` between root arities,
//! together with a map `S_i → T_j` whenever `φ(i-1) < j ≤ φ(i)`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::globset::{self, GlobMap, GlobSet};
use crate::tree::{CellKey, Tree};

pub const DEFAULT_MAX_HOMS: u128 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ThetaError {
    #[error("hom set has {count} elements, above the bound {bound}")]
    TooLarge { count: u128, bound: u128 },
    #[error("maps do not compose: target {0} is not source {1}")]
    Mismatch(Tree, Tree),
    #[error("map is not globular")]
    NotGlobular,
    #[error("source is not a globe")]
    NotAGlobe,
    #[error("the point has no boundary")]
    NoBoundary,
    #[error("no filler in Θ")]
    NoFiller,
    #[error("maps have different targets or sources")]
    TargetMismatch,
    #[error("malformed map data: {0}")]
    Malformed(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ThetaData {
    pub phi: Vec<usize>,
    pub comps: Vec<ThetaData>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ThetaMap {
    pub source: Tree,
    pub target: Tree,
    pub data: ThetaData,
}

impl ThetaData {
    fn comp_index(&self, i: usize, j: usize) -> usize {
        let mut off = 0;
        for a in 1..i {
            off += self.phi[a] - self.phi[a - 1];
        }
        off + (j - self.phi[i - 1] - 1)
    }

    fn comp(&self, i: usize, j: usize) -> &ThetaData {
        &self.comps[self.comp_index(i, j)]
    }

    fn to_json(&self) -> Value {
        json!({ "phi": self.phi, "components": self.comps.iter().map(ThetaData::to_json).collect::<Vec<_>>() })
    }

    fn from_json(v: &Value) -> Result<ThetaData, ThetaError> {
        let bad = || ThetaError::Malformed("expected {phi, components}".into());
        let phi = v
            .get("phi")
            .and_then(Value::as_array)
            .ok_or_else(bad)?
            .iter()
            .map(|x| x.as_u64().map(|x| x as usize).ok_or_else(bad))
            .collect::<Result<Vec<_>, _>>()?;
        let comps = match v.get("components") {
            Some(Value::Array(xs)) => xs.iter().map(ThetaData::from_json).collect::<Result<Vec<_>, _>>()?,
            None => Vec::new(),
            _ => return Err(bad()),
        };
        Ok(ThetaData { phi, comps })
    }
}

impl fmt::Display for ThetaData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.phi.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        if !self.comps.is_empty() {
            write!(f, "|")?;
            for (i, c) in self.comps.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{c}")?;
            }
        }
        write!(f, ")")
    }
}

impl fmt::Display for ThetaMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} : {}", self.source, self.target, self.data)
    }
}

fn check_data(s: &Tree, t: &Tree, d: &ThetaData) -> Result<(), ThetaError> {
    let (m, n) = (s.arity(), t.arity());
    if d.phi.len() != m + 1 || d.phi.iter().any(|&x| x > n) || d.phi.windows(2).any(|w| w[0] > w[1]) {
        return Err(ThetaError::Malformed(format!("phi {:?} is not a monotone map [{m}] -> [{n}]", d.phi)));
    }
    let expected: usize = (1..=m).map(|i| d.phi[i] - d.phi[i - 1]).sum();
    if d.comps.len() != expected {
        return Err(ThetaError::Malformed(format!("expected {expected} components, got {}", d.comps.len())));
    }
    for i in 1..=m {
        for j in d.phi[i - 1] + 1..=d.phi[i] {
            check_data(&s.children()[i - 1], &t.children()[j - 1], d.comp(i, j))?;
        }
    }
    Ok(())
}

impl ThetaMap {
    pub fn new(source: Tree, target: Tree, data: ThetaData) -> Result<ThetaMap, ThetaError> {
        check_data(&source, &target, &data)?;
        Ok(ThetaMap { source, target, data })
    }

    pub fn identity(t: &Tree) -> ThetaMap {
        fn id(t: &Tree) -> ThetaData {
            ThetaData { phi: (0..=t.arity()).collect(), comps: t.children().iter().map(id).collect() }
        }
        ThetaMap { source: t.clone(), target: t.clone(), data: id(t) }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "source": self.source.to_string(),
            "target": self.target.to_string(),
            "map": self.data.to_json(),
        })
    }

    pub fn from_json(v: &Value) -> Result<ThetaMap, ThetaError> {
        let tree = |k: &str| -> Result<Tree, ThetaError> {
            let s = v.get(k).and_then(Value::as_str).ok_or_else(|| ThetaError::Malformed(format!("missing {k}")))?;
            Tree::parse_any(s).map_err(|e| ThetaError::Malformed(e.to_string()))
        };
        let data = ThetaData::from_json(v.get("map").ok_or_else(|| ThetaError::Malformed("missing map".into()))?)?;
        ThetaMap::new(tree("source")?, tree("target")?, data)
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &ThetaMap) -> Result<ThetaMap, ThetaError> {
        compose(self, g)
    }

    pub fn source_globe_dim(&self) -> Option<usize> {
        self.source.is_globe().then(|| self.source.dim())
    }
}

/// Monotone maps `[m] → [n]` in lexicographic order.
pub fn monotone_maps(m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m + 1);
    fn go(m: usize, n: usize, lo: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m + 1 {
            out.push(cur.clone());
            return;
        }
        for v in lo..=n {
            cur.push(v);
            go(m, n, v, cur, out);
            cur.pop();
        }
    }
    go(m, n, 0, &mut cur, &mut out);
    out
}

/// Exact size of `hom(s, t)`, saturating.
pub fn hom_count(s: &Tree, t: &Tree) -> u128 {
    fn go(s: &Tree, t: &Tree, memo: &mut HashMap<(Tree, Tree), u128>) -> u128 {
        if let Some(&c) = memo.get(&(s.clone(), t.clone())) {
            return c;
        }
        let mut total: u128 = 0;
        for phi in monotone_maps(s.arity(), t.arity()) {
            let mut prod: u128 = 1;
            for i in 1..=s.arity() {
                for j in phi[i - 1] + 1..=phi[i] {
                    prod = prod.saturating_mul(go(&s.children()[i - 1], &t.children()[j - 1], memo));
                }
            }
            total = total.saturating_add(prod);
        }
        memo.insert((s.clone(), t.clone()), total);
        total
    }
    go(s, t, &mut HashMap::new())
}

pub fn hom(s: &Tree, t: &Tree) -> Result<Vec<ThetaMap>, ThetaError> {
    hom_bounded(s, t, DEFAULT_MAX_HOMS)
}

/// All maps `s → t`, ordered by `φ` and then by components.
pub fn hom_bounded(s: &Tree, t: &Tree, bound: u128) -> Result<Vec<ThetaMap>, ThetaError> {
    let count = hom_count(s, t);
    if count > bound {
        return Err(ThetaError::TooLarge { count, bound });
    }
    let mut memo = HashMap::new();
    Ok(hom_data(s, t, &mut memo)
        .into_iter()
        .map(|data| ThetaMap { source: s.clone(), target: t.clone(), data })
        .collect())
}

fn hom_data(s: &Tree, t: &Tree, memo: &mut HashMap<(Tree, Tree), Vec<ThetaData>>) -> Vec<ThetaData> {
    if let Some(v) = memo.get(&(s.clone(), t.clone())) {
        return v.clone();
    }
    let mut out = Vec::new();
    for phi in monotone_maps(s.arity(), t.arity()) {
        let mut factors = Vec::new();
        for i in 1..=s.arity() {
            for j in phi[i - 1] + 1..=phi[i] {
                factors.push(hom_data(&s.children()[i - 1], &t.children()[j - 1], memo));
            }
        }
        if factors.iter().any(Vec::is_empty) {
            continue;
        }
        let mut idx = vec![0usize; factors.len()];
        loop {
            out.push(ThetaData {
                phi: phi.clone(),
                comps: idx.iter().zip(&factors).map(|(&a, f)| f[a].clone()).collect(),
            });
            let mut p = factors.len();
            loop {
                if p == 0 {
                    break;
                }
                p -= 1;
                idx[p] += 1;
                if idx[p] < factors[p].len() {
                    break;
                }
                idx[p] = 0;
                if p == 0 {
                    p = usize::MAX;
                    break;
                }
            }
            if p == usize::MAX || factors.is_empty() {
                break;
            }
        }
    }
    memo.insert((s.clone(), t.clone()), out.clone());
    out
}

fn compose_data(s: &Tree, t: &Tree, u: &Tree, f: &ThetaData, g: &ThetaData) -> ThetaData {
    let chi: Vec<usize> = f.phi.iter().map(|&x| g.phi[x]).collect();
    let mut comps = Vec::new();
    for i in 1..=s.arity() {
        for k in chi[i - 1] + 1..=chi[i] {
            let j = (f.phi[i - 1] + 1..=f.phi[i])
                .find(|&j| g.phi[j - 1] < k && k <= g.phi[j])
                .expect("k lies over a unique j");
            comps.push(compose_data(
                &s.children()[i - 1],
                &t.children()[j - 1],
                &u.children()[k - 1],
                f.comp(i, j),
                g.comp(j, k),
            ));
        }
    }
    ThetaData { phi: chi, comps }
}

/// The composite `g ∘ f` (first `f`, then `g`).
pub fn compose(f: &ThetaMap, g: &ThetaMap) -> Result<ThetaMap, ThetaError> {
    if f.target != g.source {
        return Err(ThetaError::Mismatch(f.target.clone(), g.source.clone()));
    }
    Ok(ThetaMap {
        source: f.source.clone(),
        target: g.target.clone(),
        data: compose_data(&f.source, &f.target, &g.target, &f.data, &g.data),
    })
}

pub fn suspend_map(f: &ThetaMap) -> ThetaMap {
    ThetaMap {
        source: f.source.suspend(),
        target: f.target.suspend(),
        data: ThetaData { phi: vec![0, 1], comps: vec![f.data.clone()] },
    }
}

/// `σ_k: D_k → D_{k+1}` (`target == false`) or `τ_k`.
pub fn globe_face(k: usize, target: bool) -> ThetaMap {
    let mut m = ThetaMap {
        source: Tree::leaf(),
        target: Tree::globe(1),
        data: ThetaData { phi: vec![if target { 1 } else { 0 }], comps: vec![] },
    };
    for _ in 0..k {
        m = suspend_map(&m);
    }
    m
}

/// The globe `D_d → t` picking out a cell of the realization.
pub fn cell_inclusion(t: &Tree, c: &CellKey) -> ThetaMap {
    fn go(t: &Tree, path: &[usize], gap: usize) -> (Tree, ThetaData) {
        match path.split_first() {
            None => (Tree::leaf(), ThetaData { phi: vec![gap], comps: vec![] }),
            Some((&i, rest)) => {
                let (s, d) = go(&t.children()[i], rest, gap);
                (s.suspend(), ThetaData { phi: vec![i, i + 1], comps: vec![d] })
            }
        }
    }
    let (s, data) = go(t, &c.path, c.gap);
    ThetaMap { source: s, target: t.clone(), data }
}

pub fn is_globular(f: &ThetaMap) -> bool {
    fn go(s: &Tree, d: &ThetaData) -> bool {
        (1..=s.arity()).all(|i| d.phi[i] == d.phi[i - 1] + 1 && go(&s.children()[i - 1], d.comp(i, d.phi[i])))
    }
    go(&f.source, &f.data)
}

/// Cell map of a globular map.
pub fn globular_cell_map(f: &ThetaMap, c: &CellKey) -> Option<CellKey> {
    fn go(s: &Tree, d: &ThetaData, path: &[usize], gap: usize) -> Option<CellKey> {
        match path.split_first() {
            None => Some(CellKey { path: vec![], gap: *d.phi.get(gap)? }),
            Some((&i, rest)) => {
                let i1 = i + 1;
                if d.phi[i1] != d.phi[i1 - 1] + 1 {
                    return None;
                }
                let j = d.phi[i1];
                let mut k = go(&s.children()[i], d.comp(i1, j), rest, gap)?;
                k.path.insert(0, j - 1);
                Some(k)
            }
        }
    }
    go(&f.source, &f.data, &c.path, c.gap)
}

pub fn to_globmap(f: &ThetaMap) -> Result<GlobMap, ThetaError> {
    if !is_globular(f) {
        return Err(ThetaError::NotGlobular);
    }
    let sc = f.source.cells();
    let tc = f.target.cells();
    let mut m = Vec::new();
    for (k, cs) in sc.iter().enumerate() {
        let mut row = Vec::new();
        for c in cs {
            let img = globular_cell_map(f, c).ok_or(ThetaError::NotGlobular)?;
            row.push(tc[k].binary_search(&img).map_err(|_| ThetaError::NotGlobular)?);
        }
        m.push(row);
    }
    GlobMap::new(globset::realize(&f.source), globset::realize(&f.target), m).map_err(|_| ThetaError::NotGlobular)
}

/// The Θ-map of a map between realizations of trees, if it is globular.
pub fn embed_globular(s: &Tree, t: &Tree, g: &GlobMap) -> Result<ThetaMap, ThetaError> {
    let sc = s.cells();
    let tc = t.cells();
    if g.f.len() < sc.len() {
        return Err(ThetaError::NotGlobular);
    }
    let image = |c: &CellKey| -> Result<CellKey, ThetaError> {
        let i = sc[c.dim()].binary_search(c).map_err(|_| ThetaError::NotGlobular)?;
        let j = *g.f[c.dim()].get(i).ok_or(ThetaError::NotGlobular)?;
        tc.get(c.dim()).and_then(|v| v.get(j)).cloned().ok_or(ThetaError::NotGlobular)
    };
    fn go(
        s: &Tree,
        t: &Tree,
        prefix_s: &[usize],
        prefix_t: &[usize],
        image: &dyn Fn(&CellKey) -> Result<CellKey, ThetaError>,
    ) -> Result<ThetaData, ThetaError> {
        let mut phi = Vec::new();
        for gap in 0..=s.arity() {
            let k = image(&CellKey { path: prefix_s.to_vec(), gap })?;
            if k.path != prefix_t {
                return Err(ThetaError::NotGlobular);
            }
            phi.push(k.gap);
        }
        let mut comps = Vec::new();
        for i in 1..=s.arity() {
            if phi[i] != phi[i - 1] + 1 {
                return Err(ThetaError::NotGlobular);
            }
            let j = phi[i];
            let mut ps = prefix_s.to_vec();
            ps.push(i - 1);
            let mut pt = prefix_t.to_vec();
            pt.push(j - 1);
            comps.push(go(&s.children()[i - 1], &t.children()[j - 1], &ps, &pt, image)?);
        }
        Ok(ThetaData { phi, comps })
    }
    let data = go(s, t, &[], &[], &image)?;
    ThetaMap::new(s.clone(), t.clone(), data)
}

/// `(∂_σ, ∂_τ): ∂t → t`.
pub fn boundary_maps(t: &Tree) -> Result<(ThetaMap, ThetaMap), ThetaError> {
    let b = t.boundary().map_err(|_| ThetaError::NoBoundary)?;
    let mk = |target: bool| {
        let g = globset::boundary_inclusion_of_tree(t, target).ok_or(ThetaError::NoBoundary)?;
        embed_globular(&b, t, &g)
    };
    Ok((mk(false)?, mk(true)?))
}

/// A cell of the free strict ω-category on `realize(t)`, as a table of
/// generator sets: `minus[j]`, `plus[j]` for each dimension up to `k`,
/// with `minus[k] == plus[k]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellTable {
    pub minus: Vec<BTreeSet<CellKey>>,
    pub plus: Vec<BTreeSet<CellKey>>,
}

impl CellTable {
    pub fn dim(&self) -> usize {
        self.minus.len() - 1
    }

    pub fn generators(&self) -> BTreeSet<CellKey> {
        self.minus.iter().chain(self.plus.iter()).flat_map(|s| s.iter().cloned()).collect()
    }
}

/// Table of a map out of a globe.
pub fn cell_table(f: &ThetaMap) -> Result<CellTable, ThetaError> {
    if !f.source.is_globe() {
        return Err(ThetaError::NotAGlobe);
    }
    fn go(s: &Tree, t: &Tree, d: &ThetaData, k: usize) -> CellTable {
        let mut minus = vec![BTreeSet::new(); k + 1];
        let mut plus = vec![BTreeSet::new(); k + 1];
        let (a, b) = (d.phi[0], *d.phi.last().unwrap());
        minus[0].insert(CellKey { path: vec![], gap: a });
        plus[0].insert(CellKey { path: vec![], gap: b });
        if k == 0 {
            return CellTable { minus, plus };
        }
        if a == b {
            return CellTable { minus, plus };
        }
        for j in a + 1..=b {
            let sub = go(&s.children()[0], &t.children()[j - 1], d.comp(1, j), k - 1);
            for lvl in 0..k {
                let lift = |c: &CellKey| {
                    let mut p = vec![j - 1];
                    p.extend(&c.path);
                    CellKey { path: p, gap: c.gap }
                };
                minus[lvl + 1].extend(sub.minus[lvl].iter().map(lift));
                plus[lvl + 1].extend(sub.plus[lvl].iter().map(lift));
            }
        }
        CellTable { minus, plus }
    }
    Ok(go(&f.source, &f.target, &f.data, f.source.dim()))
}

/// Face-closed set of cells of the target touched by `f`.
pub fn support_cells(f: &ThetaMap) -> BTreeSet<CellKey> {
    let mut out = BTreeSet::new();
    for leaf in f.source.leaf_paths() {
        let inc = cell_inclusion(&f.source, &CellKey { path: leaf, gap: 0 });
        let c = compose(&inc, f).expect("leaf inclusion composes");
        out.extend(cell_table(&c).expect("globe source").generators());
    }
    let mut stack: Vec<CellKey> = out.iter().cloned().collect();
    while let Some(c) = stack.pop() {
        if let Some((a, b)) = f.target.cell_faces(&c) {
            for x in [a, b] {
                if out.insert(x.clone()) {
                    stack.push(x);
                }
            }
        }
    }
    out
}

/// Globular set spanned by a face-closed set of cells of `t`, with the
/// inclusion into `realize(t)`.
pub fn subobject(t: &Tree, cells: &BTreeSet<CellKey>) -> GlobMap {
    let all = t.cells();
    let full = globset::realize(t);
    let mut keep: Vec<Vec<usize>> = Vec::new();
    for cs in all.iter() {
        keep.push((0..cs.len()).filter(|&i| cells.contains(&cs[i])).collect());
    }
    while keep.len() > 1 && keep.last().map_or(false, Vec::is_empty) {
        keep.pop();
    }
    let pos: Vec<HashMap<usize, usize>> =
        keep.iter().map(|v| v.iter().enumerate().map(|(a, &b)| (b, a)).collect()).collect();
    let counts = keep.iter().map(Vec::len).collect();
    let mut src = vec![Vec::new(); keep.len()];
    let mut tgt = vec![Vec::new(); keep.len()];
    for k in 1..keep.len() {
        src[k] = keep[k].iter().map(|&i| pos[k - 1][&full.src(k, i)]).collect();
        tgt[k] = keep[k].iter().map(|&i| pos[k - 1][&full.tgt(k, i)]).collect();
    }
    let labels = keep.iter().enumerate().map(|(k, v)| v.iter().map(|&i| full.label(k, i).to_string()).collect()).collect();
    let sub = GlobSet::with_labels(counts, src, tgt, labels).expect("face-closed subsets are globular");
    GlobMap::new(sub, full, keep).expect("inclusion")
}

/// Homogeneous map followed by a globular one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HGFactorization {
    pub homogeneous: ThetaMap,
    pub globular: ThetaMap,
}

pub fn hg_factorize(f: &ThetaMap) -> HGFactorization {
    let cells = support_cells(f);
    if cells.len() == f.target.cells().iter().map(Vec::len).sum::<usize>() {
        return HGFactorization { homogeneous: f.clone(), globular: ThetaMap::identity(&f.target) };
    }
    let inc = subobject(&f.target, &cells);
    let (b, iso) = globset::recognize_tree(&inc.dom).expect("supports in trees are globular sums");
    let gm = iso.then(&inc).expect("composable");
    let g = embed_globular(&b, &f.target, &gm).expect("inclusion of a sub-sum is globular");
    let h = lift_through_globular(f, &g).expect("f factors through its support");
    HGFactorization { homogeneous: h, globular: g }
}

/// The unique `h` with `g ∘ h = f`, for `g` globular.
pub fn lift_through_globular(f: &ThetaMap, g: &ThetaMap) -> Option<ThetaMap> {
    if f.target != g.target || !is_globular(g) {
        return None;
    }
    hom(&f.source, &g.source).ok()?.into_iter().find(|h| compose(h, g).ok().as_ref() == Some(f))
}

pub fn is_homogeneous(f: &ThetaMap) -> bool {
    let n: usize = f.target.cells().iter().map(Vec::len).sum();
    support_cells(f).len() == n
}

/// Support of a cell `D_m → t`: the smallest sub-sum containing it, the
/// globular inclusion and the homogeneous residue.
pub fn support(c: &ThetaMap) -> Result<(Tree, ThetaMap, ThetaMap), ThetaError> {
    if !c.source.is_globe() {
        return Err(ThetaError::NotAGlobe);
    }
    let hg = hg_factorize(c);
    Ok((hg.globular.source.clone(), hg.globular, hg.homogeneous))
}

pub fn parallel(f: &ThetaMap, g: &ThetaMap) -> Result<bool, ThetaError> {
    if f.source != g.source || f.target != g.target {
        return Err(ThetaError::TargetMismatch);
    }
    let k = f.source.dim();
    if k == 0 {
        return Ok(true);
    }
    let s = globe_face(k - 1, false);
    let t = globe_face(k - 1, true);
    Ok(compose(&s, f)? == compose(&s, g)? && compose(&t, f)? == compose(&t, g)?)
}

pub fn is_admissible_groupoidal(f: &ThetaMap, g: &ThetaMap) -> Result<bool, ThetaError> {
    if !f.source.is_globe() {
        return Err(ThetaError::NotAGlobe);
    }
    let k = f.source.dim();
    let par = parallel(f, g)?;
    Ok((k == 0 || par) && f.target.dim() <= k + 1)
}

/// Parallelism is required here as well; the remaining clauses follow the
/// categorical definition.
pub fn is_admissible_categorical(f: &ThetaMap, g: &ThetaMap) -> Result<bool, ThetaError> {
    if !f.source.is_globe() {
        return Err(ThetaError::NotAGlobe);
    }
    let k = f.source.dim();
    if !parallel(f, g)? {
        return Ok(false);
    }
    if k == 0 || (is_homogeneous(f) && is_homogeneous(g)) {
        return Ok(true);
    }
    let (ds, dt) = match boundary_maps(&f.target) {
        Ok(p) => p,
        Err(_) => return Ok(false),
    };
    let cands = hom(&f.source, &ds.source)?;
    let has = |e: &ThetaMap, x: &ThetaMap| cands.iter().any(|h| is_homogeneous(h) && compose(h, e).ok().as_ref() == Some(x));
    Ok(has(&ds, f) && has(&dt, g))
}

/// First `h: D_{k+1} → A` in hom order with `h∘σ = f` and `h∘τ = g`.
pub fn filler(f: &ThetaMap, g: &ThetaMap) -> Result<ThetaMap, ThetaError> {
    if !f.source.is_globe() {
        return Err(ThetaError::NotAGlobe);
    }
    if f.target != g.target || f.source != g.source {
        return Err(ThetaError::TargetMismatch);
    }
    let k = f.source.dim();
    let s = globe_face(k, false);
    let t = globe_face(k, true);
    for h in hom(&Tree::globe(k + 1), &f.target)? {
        if compose(&s, &h)? == *f && compose(&t, &h)? == *g {
            return Ok(h);
        }
    }
    Err(ThetaError::NoFiller)
}

/// Copairing of maps out of the leaf globes of `s` that agree on shared
/// faces, as a map `s → t`.
pub fn copair(s: &Tree, legs: &[ThetaMap]) -> Result<ThetaMap, ThetaError> {
    let leaves = s.leaf_paths();
    if legs.len() != leaves.len() {
        return Err(ThetaError::Malformed(format!("{} legs for {} leaves", legs.len(), leaves.len())));
    }
    let t = legs.first().map(|l| l.target.clone()).ok_or_else(|| ThetaError::Malformed("no legs".into()))?;
    if legs.iter().any(|l| l.target != t) {
        return Err(ThetaError::TargetMismatch);
    }
    fn go(s: &Tree, t: &Tree, legs: &[ThetaData]) -> Result<ThetaData, ThetaError> {
        if s.is_leaf() {
            return Ok(legs[0].clone());
        }
        let mut phi = Vec::new();
        let mut comps = Vec::new();
        let mut at = 0;
        for (ci, c) in s.children().iter().enumerate() {
            let nl = c.leaf_count();
            let group = &legs[at..at + nl];
            at += nl;
            let (a, b) = (group[0].phi[0], group[0].phi[1]);
            if group.iter().any(|d| d.phi.len() != 2 || d.phi[0] != a || d.phi[1] != b) {
                return Err(ThetaError::Malformed("legs disagree on 0-cells".into()));
            }
            if ci == 0 {
                phi.push(a);
            } else if *phi.last().unwrap() != a {
                return Err(ThetaError::Malformed("legs are not composable".into()));
            }
            phi.push(b);
            for j in a + 1..=b {
                let sub: Vec<ThetaData> = group.iter().map(|d| d.comp(1, j).clone()).collect();
                comps.push(go(c, &t.children()[j - 1], &sub)?);
            }
        }
        Ok(ThetaData { phi, comps })
    }
    let data = go(s, &t, &legs.iter().map(|l| l.data.clone()).collect::<Vec<_>>())?;
    let m = ThetaMap::new(s.clone(), t, data)?;
    for (p, leg) in leaves.iter().zip(legs) {
        let inc = cell_inclusion(s, &CellKey { path: p.clone(), gap: 0 });
        if compose(&inc, &m)? != *leg {
            return Err(ThetaError::Malformed("legs disagree on shared faces".into()));
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::trees_up_to;

    fn t(s: &str) -> Tree {
        s.parse().unwrap()
    }

    #[test]
    fn small_hom_counts() {
        let d = Tree::globe;
        assert_eq!(hom(&d(1), &d(1)).unwrap().len(), 3);
        assert_eq!(hom(&d(2), &d(2)).unwrap().len(), 5);
        assert_eq!(hom(&d(1), &d(2)).unwrap().len(), 4);
        assert_eq!(hom_count(&d(2), &d(2)), 5);
    }

    #[test]
    fn size_guard() {
        let big = t("[[][][][][][][]]");
        assert!(matches!(hom_bounded(&Tree::globe(1), &big, 10), Err(ThetaError::TooLarge { .. })));
    }

    #[test]
    fn constant_absorbs() {
        let d1 = Tree::globe(1);
        let homs = hom(&d1, &d1).unwrap();
        let id = homs.iter().find(|h| h.data.phi == vec![0, 1]).unwrap();
        let c0 = homs.iter().find(|h| h.data.phi == vec![0, 0]).unwrap();
        assert_eq!(compose(c0, id).unwrap(), *c0);
        assert_eq!(compose(id, c0).unwrap(), *c0);
    }

    #[test]
    fn associativity_on_d2() {
        let d2 = Tree::globe(2);
        let hs = hom(&d2, &d2).unwrap();
        let mut n = 0;
        for a in &hs {
            for b in &hs {
                for c in &hs {
                    let l = compose(&compose(a, b).unwrap(), c).unwrap();
                    let r = compose(a, &compose(b, c).unwrap()).unwrap();
                    assert_eq!(l, r);
                    n += 1;
                }
            }
        }
        assert_eq!(n, 125);
    }

    #[test]
    fn globular_embedding() {
        let inc = globset::globe_face(1, false);
        let m = embed_globular(&Tree::globe(1), &Tree::globe(2), &inc).unwrap();
        assert_eq!(m.data.phi, vec![0, 1]);
        assert_eq!(m.data.comps[0].phi, vec![0]);
        assert!(is_globular(&m));
        assert_eq!(to_globmap(&m).unwrap().f, inc.f);
        assert!(is_globular(&ThetaMap::identity(&t("[[[][]][]]"))));
        let degen = hom(&Tree::globe(2), &Tree::globe(2))
            .unwrap()
            .into_iter()
            .find(|h| h.data.phi == vec![0, 1] && h.data.comps[0].phi == vec![0, 0])
            .unwrap();
        assert!(!is_globular(&degen));
    }

    #[test]
    fn support_examples() {
        let d2 = Tree::globe(2);
        let (b, _, r) = support(&ThetaMap::identity(&d2)).unwrap();
        assert_eq!(b, d2);
        assert_eq!(r, ThetaMap::identity(&d2));
        let degen = hom(&d2, &d2)
            .unwrap()
            .into_iter()
            .find(|h| h.data.phi == vec![0, 1] && h.data.comps[0].phi == vec![0, 0])
            .unwrap();
        let (b, g, h) = support(&degen).unwrap();
        assert_eq!(b, Tree::globe(1));
        assert_eq!(compose(&h, &g).unwrap(), degen);
        let edge = globe_face(1, false);
        let (b, g, h) = support(&edge).unwrap();
        assert_eq!(b, Tree::globe(1));
        assert_eq!(g, edge);
        assert_eq!(h, ThetaMap::identity(&Tree::globe(1)));
    }

    #[test]
    fn homogeneity() {
        let d2 = Tree::globe(2);
        assert!(is_homogeneous(&ThetaMap::identity(&d2)));
        assert!(!is_homogeneous(&globe_face(1, false)));
        let two = t("[[][]]");
        let comp = ThetaMap::new(
            Tree::globe(1),
            two.clone(),
            ThetaData { phi: vec![0, 2], comps: vec![ThetaData { phi: vec![0], comps: vec![] }; 2] },
        )
        .unwrap();
        assert!(is_homogeneous(&comp));
    }

    #[test]
    fn hg_on_identity_of_last_edge() {
        let a = t("[[[][]][]]");
        // identity 2-cell on the last edge
        let f = ThetaMap::new(
            Tree::globe(2),
            a.clone(),
            ThetaData { phi: vec![1, 2], comps: vec![ThetaData { phi: vec![0, 0], comps: vec![] }] },
        )
        .unwrap();
        let hg = hg_factorize(&f);
        assert_eq!(hg.globular.source, Tree::globe(1));
        assert_eq!(globular_cell_map(&hg.globular, &CellKey { path: vec![0], gap: 0 }), Some(CellKey { path: vec![1], gap: 0 }));
        assert_eq!(compose(&hg.homogeneous, &hg.globular).unwrap(), f);
    }

    #[test]
    fn admissibility() {
        let s = globe_face(1, false);
        let tt = globe_face(1, true);
        assert!(is_admissible_groupoidal(&s, &tt).unwrap());
        assert!(is_admissible_categorical(&s, &tt).unwrap());
        let d3 = Tree::globe(3);
        let e = compose(&globe_face(1, false), &globe_face(2, false)).unwrap();
        let e2 = compose(&globe_face(1, true), &globe_face(2, false)).unwrap();
        assert!(!is_admissible_groupoidal(&e, &e2).unwrap());
        assert_eq!(e.target, d3);
        let pt = |v| ThetaMap::new(Tree::leaf(), t("[[][]]"), ThetaData { phi: vec![v], comps: vec![] }).unwrap();
        assert!(is_admissible_groupoidal(&pt(0), &pt(2)).unwrap());
        let q = |v| ThetaMap::new(Tree::leaf(), Tree::globe(2), ThetaData { phi: vec![v], comps: vec![] }).unwrap();
        assert!(!is_admissible_groupoidal(&q(0), &q(1)).unwrap());
        let two = t("[[][]]");
        let pt0 = ThetaData { phi: vec![0], comps: vec![] };
        let first = ThetaMap::new(Tree::globe(1), two.clone(), ThetaData { phi: vec![0, 1], comps: vec![pt0.clone()] }).unwrap();
        let whole = ThetaMap::new(Tree::globe(1), two, ThetaData { phi: vec![0, 2], comps: vec![pt0.clone(), pt0] }).unwrap();
        assert!(is_homogeneous(&whole) && is_globular(&first));
        assert!(!is_admissible_categorical(&first, &whole).unwrap());
        assert!(is_admissible_categorical(&whole, &whole).unwrap());
    }

    #[test]
    fn fillers() {
        let s = globe_face(1, false);
        let tt = globe_face(1, true);
        assert_eq!(filler(&s, &tt).unwrap(), ThetaMap::identity(&Tree::globe(2)));
        let h = filler(&s, &s).unwrap();
        assert!(!is_homogeneous(&h));
    }

    #[test]
    fn boundary_maps_of_globes() {
        for m in 1..4 {
            let (s, t) = boundary_maps(&Tree::globe(m)).unwrap();
            assert_eq!(s, globe_face(m - 1, false));
            assert_eq!(t, globe_face(m - 1, true));
        }
        let a = t("[[[][]][]]");
        let (s, tt) = boundary_maps(&a).unwrap();
        for m in [s, tt] {
            let g = to_globmap(&m).unwrap();
            assert!(globset::classify(&g, 0).0);
        }
    }

    #[test]
    fn suspension() {
        assert_eq!(suspend_map(&ThetaMap::identity(&Tree::leaf())), ThetaMap::identity(&Tree::globe(1)));
    }

    #[test]
    fn category_laws_small() {
        let ts = trees_up_to(3);
        for a in &ts {
            for b in &ts {
                for f in hom(a, b).unwrap() {
                    assert_eq!(compose(&ThetaMap::identity(a), &f).unwrap(), f);
                    assert_eq!(compose(&f, &ThetaMap::identity(b)).unwrap(), f);
                }
            }
        }
    }

    #[test]
    fn copair_recovers_maps() {
        let a = t("[[[][]][]]");
        for s in trees_up_to(4) {
            for f in hom(&s, &a).unwrap().into_iter().take(50) {
                let legs: Vec<ThetaMap> = s
                    .leaf_paths()
                    .into_iter()
                    .map(|p| compose(&cell_inclusion(&s, &CellKey { path: p, gap: 0 }), &f).unwrap())
                    .collect();
                assert_eq!(copair(&s, &legs).unwrap(), f);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let f = globe_face(2, true);
        assert_eq!(ThetaMap::from_json(&f.to_json()).unwrap(), f);
    }
}

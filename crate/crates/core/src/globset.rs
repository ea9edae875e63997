//! Finite truncated globular sets and maps between them.

use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::tree::{CellKey, Tree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GlobError {
    #[error("face map of dimension {dim} has wrong length or out-of-range entry")]
    BadFaces { dim: usize },
    #[error("globular identity fails at cell {idx} of dimension {dim}")]
    NotGlobular { dim: usize, idx: usize },
    #[error("map does not commute with faces at cell {idx} of dimension {dim}")]
    NotAMap { dim: usize, idx: usize },
    #[error("maps are not composable")]
    NotComposable,
    #[error("square does not commute")]
    SquareNotCommuting,
    #[error("no diagonal filler")]
    NoFiller,
    #[error("diagonal filler is not unique")]
    NonUniqueFiller,
    #[error("{0}")]
    BadStructure(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GlobSet {
    counts: Vec<usize>,
    src: Vec<Vec<usize>>,
    tgt: Vec<Vec<usize>>,
    labels: Vec<Vec<String>>,
}

impl GlobSet {
    /// `src[k]` and `tgt[k]` list faces of the `k`-cells; index 0 is ignored.
    pub fn new(counts: Vec<usize>, src: Vec<Vec<usize>>, tgt: Vec<Vec<usize>>) -> Result<GlobSet, GlobError> {
        let labels = counts
            .iter()
            .enumerate()
            .map(|(k, &c)| (0..c).map(|i| format!("{k}:{i}")).collect())
            .collect();
        GlobSet::with_labels(counts, src, tgt, labels)
    }

    pub fn with_labels(
        counts: Vec<usize>,
        mut src: Vec<Vec<usize>>,
        mut tgt: Vec<Vec<usize>>,
        labels: Vec<Vec<String>>,
    ) -> Result<GlobSet, GlobError> {
        let n = counts.len();
        src.resize(n, Vec::new());
        tgt.resize(n, Vec::new());
        if n > 0 {
            src[0].clear();
            tgt[0].clear();
        }
        for k in 1..n {
            if src[k].len() != counts[k]
                || tgt[k].len() != counts[k]
                || src[k].iter().chain(tgt[k].iter()).any(|&x| x >= counts[k - 1])
            {
                return Err(GlobError::BadFaces { dim: k });
            }
        }
        let g = GlobSet { counts, src, tgt, labels };
        g.check_globular()?;
        Ok(g)
    }

    pub fn empty(n: usize) -> GlobSet {
        GlobSet::new(vec![0; n + 1], Vec::new(), Vec::new()).unwrap()
    }

    fn check_globular(&self) -> Result<(), GlobError> {
        for k in 2..self.counts.len() {
            for i in 0..self.counts[k] {
                let (s, t) = (self.src[k][i], self.tgt[k][i]);
                if self.src[k - 1][s] != self.src[k - 1][t] || self.tgt[k - 1][s] != self.tgt[k - 1][t] {
                    return Err(GlobError::NotGlobular { dim: k, idx: i });
                }
            }
        }
        Ok(())
    }

    /// Number of stored dimensions (truncation level plus one).
    pub fn dims(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, k: usize) -> usize {
        self.counts.get(k).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> Vec<usize> {
        self.counts.clone()
    }

    /// Counts with trailing empty dimensions removed.
    pub fn trimmed_counts(&self) -> Vec<usize> {
        let mut c = self.counts.clone();
        while c.last() == Some(&0) {
            c.pop();
        }
        c
    }

    pub fn src(&self, k: usize, i: usize) -> usize {
        self.src[k][i]
    }

    pub fn tgt(&self, k: usize, i: usize) -> usize {
        self.tgt[k][i]
    }

    pub fn face(&self, k: usize, i: usize, target: bool) -> usize {
        if target {
            self.tgt[k][i]
        } else {
            self.src[k][i]
        }
    }

    /// Iterated face down to dimension `j`.
    pub fn face_to(&self, mut k: usize, mut i: usize, j: usize, target: bool) -> usize {
        while k > j {
            i = self.face(k, i, target);
            k -= 1;
        }
        i
    }

    pub fn label(&self, k: usize, i: usize) -> &str {
        &self.labels[k][i]
    }

    pub fn parallel(&self, k: usize, a: usize, b: usize) -> bool {
        k == 0 || (self.src[k][a] == self.src[k][b] && self.tgt[k][a] == self.tgt[k][b])
    }

    pub fn padded(&self, n: usize) -> GlobSet {
        let mut g = self.clone();
        while g.counts.len() < n {
            g.counts.push(0);
            g.src.push(Vec::new());
            g.tgt.push(Vec::new());
            g.labels.push(Vec::new());
        }
        g
    }

    pub fn to_json(&self) -> Value {
        json!({
            "counts": self.counts,
            "src": self.src,
            "tgt": self.tgt,
            "labels": self.labels,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for GlobSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.counts.len() {
            write!(f, "dim {k}:")?;
            for i in 0..self.counts[k] {
                if k == 0 {
                    write!(f, " {}", self.labels[k][i])?;
                } else {
                    write!(
                        f,
                        " {}:{}->{}",
                        self.labels[k][i],
                        self.labels[k - 1][self.src[k][i]],
                        self.labels[k - 1][self.tgt[k][i]]
                    )?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GlobMap {
    pub dom: GlobSet,
    pub cod: GlobSet,
    pub f: Vec<Vec<usize>>,
}

impl GlobMap {
    pub fn new(dom: GlobSet, cod: GlobSet, mut f: Vec<Vec<usize>>) -> Result<GlobMap, GlobError> {
        f.resize(dom.dims(), Vec::new());
        for k in 0..dom.dims() {
            if f[k].len() != dom.count(k) || f[k].iter().any(|&y| y >= cod.count(k)) {
                return Err(GlobError::NotAMap { dim: k, idx: 0 });
            }
            if k > 0 {
                for i in 0..dom.count(k) {
                    let y = f[k][i];
                    if cod.src(k, y) != f[k - 1][dom.src(k, i)] || cod.tgt(k, y) != f[k - 1][dom.tgt(k, i)] {
                        return Err(GlobError::NotAMap { dim: k, idx: i });
                    }
                }
            }
        }
        Ok(GlobMap { dom, cod, f })
    }

    pub fn identity(x: &GlobSet) -> GlobMap {
        let f = (0..x.dims()).map(|k| (0..x.count(k)).collect()).collect();
        GlobMap { dom: x.clone(), cod: x.clone(), f }
    }

    pub fn apply(&self, k: usize, i: usize) -> usize {
        self.f[k][i]
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &GlobMap) -> Result<GlobMap, GlobError> {
        if !same_shape(&self.cod, &other.dom) {
            return Err(GlobError::NotComposable);
        }
        let f = (0..self.dom.dims()).map(|k| self.f[k].iter().map(|&y| other.f[k][y]).collect()).collect();
        Ok(GlobMap { dom: self.dom.clone(), cod: other.cod.clone(), f })
    }

    pub fn is_injective(&self) -> bool {
        (0..self.dom.dims()).all(|k| {
            let mut seen = vec![false; self.cod.count(k)];
            self.f[k].iter().all(|&y| !std::mem::replace(&mut seen[y], true))
        })
    }

    pub fn is_bijective(&self) -> bool {
        self.is_injective() && (0..self.dom.dims().max(self.cod.dims())).all(|k| self.dom.count(k) == self.cod.count(k))
    }

    pub fn inverse(&self) -> Option<GlobMap> {
        if !self.is_bijective() {
            return None;
        }
        let mut g: Vec<Vec<usize>> = (0..self.cod.dims()).map(|k| vec![0; self.cod.count(k)]).collect();
        for k in 0..self.dom.dims() {
            for (i, &y) in self.f[k].iter().enumerate() {
                g[k][y] = i;
            }
        }
        Some(GlobMap { dom: self.cod.clone(), cod: self.dom.clone(), f: g })
    }

    pub fn to_json(&self) -> Value {
        json!({ "dom": self.dom.to_json(), "cod": self.cod.to_json(), "f": self.f })
    }
}

/// Equality of underlying globular structure, ignoring labels.
pub fn same_shape(a: &GlobSet, b: &GlobSet) -> bool {
    a.trimmed_counts() == b.trimmed_counts()
        && (1..a.dims().min(b.dims())).all(|k| a.src[k] == b.src[k] && a.tgt[k] == b.tgt[k])
}

/// The globular set of a tree. Cells are indexed in the order of
/// [`Tree::cells`] and labelled by their key.
pub fn realize(t: &Tree) -> GlobSet {
    let cells = t.cells();
    let index = |c: &CellKey| cells[c.dim()].binary_search(c).expect("face is a cell");
    let counts: Vec<usize> = cells.iter().map(Vec::len).collect();
    let mut src = vec![Vec::new(); counts.len()];
    let mut tgt = vec![Vec::new(); counts.len()];
    for k in 1..cells.len() {
        for c in &cells[k] {
            let (s, u) = t.cell_faces(c).unwrap();
            src[k].push(index(&s));
            tgt[k].push(index(&u));
        }
    }
    let labels = cells
        .iter()
        .map(|v| v.iter().map(|c| format!("{:?}/{}", c.path, c.gap)).collect())
        .collect();
    GlobSet::with_labels(counts, src, tgt, labels).expect("trees realize to globular sets")
}

/// Index of a cell key within [`realize`].
pub fn cell_index(t: &Tree, c: &CellKey) -> Option<usize> {
    t.cells().get(c.dim())?.binary_search(c).ok()
}

/// Inclusion of the source (`target == false`) or target boundary of a
/// tree, `realize(∂t) → realize(t)`. Nodes of top height minus one keep
/// their lower cells; their single gap goes to the first or last gap.
pub fn boundary_inclusion_of_tree(t: &Tree, target: bool) -> Option<GlobMap> {
    let b = t.boundary().ok()?;
    let bc = b.cells();
    let tc = t.cells();
    let top = b.dim();
    let mut f = Vec::new();
    for (k, cs) in bc.iter().enumerate() {
        let mut fk = Vec::new();
        for c in cs {
            let key = if k == top {
                let r = t.node(&c.path).unwrap().arity();
                CellKey { path: c.path.clone(), gap: if target { r } else { 0 } }
            } else {
                c.clone()
            };
            fk.push(tc[k].binary_search(&key).unwrap());
        }
        f.push(fk);
    }
    GlobMap::new(realize(&b), realize(t), f).ok()
}

/// `D_j → D_{j+1}`, onto the source or target face.
pub fn globe_face(j: usize, target: bool) -> GlobMap {
    let mut f: Vec<Vec<usize>> = (0..j).map(|_| vec![0, 1]).collect();
    f.push(vec![if target { 1 } else { 0 }]);
    GlobMap::new(realize(&Tree::globe(j)), realize(&Tree::globe(j + 1)), f).unwrap()
}

/// The inclusion `D_j → D_k` of the iterated source or target face.
pub fn globe_inclusion(j: usize, k: usize, target: bool) -> GlobMap {
    let mut m = GlobMap::identity(&realize(&Tree::globe(j)));
    for i in j..k {
        m = m.then(&globe_face(i, target)).unwrap();
    }
    m
}

pub struct Colimit {
    pub apex: GlobSet,
    pub legs: Vec<GlobMap>,
}

/// Colimit of a finite diagram. Arrows are `(from, to, map)` between the
/// listed objects. Classes are represented by their least member in the
/// order (object, cell).
pub fn colimit(objects: &[GlobSet], arrows: &[(usize, usize, &GlobMap)]) -> Result<Colimit, GlobError> {
    let dims = objects.iter().map(GlobSet::dims).max().unwrap_or(1);
    let mut offsets = vec![vec![0usize; objects.len() + 1]; dims];
    for k in 0..dims {
        for (o, x) in objects.iter().enumerate() {
            offsets[k][o + 1] = offsets[k][o] + x.count(k);
        }
    }
    let mut uf: Vec<Vec<usize>> = (0..dims).map(|k| (0..offsets[k][objects.len()]).collect()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let n = p[y];
            p[y] = r;
            y = n;
        }
        r
    }
    for &(a, b, m) in arrows {
        for k in 0..m.dom.dims().min(dims) {
            for (i, &j) in m.f[k].iter().enumerate() {
                let x = find(&mut uf[k], offsets[k][a] + i);
                let y = find(&mut uf[k], offsets[k][b] + j);
                let (lo, hi) = if x < y { (x, y) } else { (y, x) };
                uf[k][hi] = lo;
            }
        }
    }
    let mut class_of: Vec<Vec<usize>> = Vec::new();
    let mut reps: Vec<Vec<usize>> = Vec::new();
    for k in 0..dims {
        let total = offsets[k][objects.len()];
        let mut idx = vec![usize::MAX; total];
        let mut rk = Vec::new();
        let mut ck = vec![0; total];
        for x in 0..total {
            let r = find(&mut uf[k], x);
            if idx[r] == usize::MAX {
                idx[r] = rk.len();
                rk.push(r);
            }
            ck[x] = idx[r];
        }
        class_of.push(ck);
        reps.push(rk);
    }
    let locate = |k: usize, x: usize| -> (usize, usize) {
        let o = offsets[k].partition_point(|&off| off <= x) - 1;
        (o, x - offsets[k][o])
    };
    let counts: Vec<usize> = reps.iter().map(Vec::len).collect();
    let mut src = vec![Vec::new(); dims];
    let mut tgt = vec![Vec::new(); dims];
    let mut labels = vec![Vec::new(); dims];
    for k in 0..dims {
        for &r in &reps[k] {
            let (o, i) = locate(k, r);
            labels[k].push(objects[o].label(k, i).to_string());
            if k > 0 {
                src[k].push(class_of[k - 1][offsets[k - 1][o] + objects[o].src(k, i)]);
                tgt[k].push(class_of[k - 1][offsets[k - 1][o] + objects[o].tgt(k, i)]);
            }
        }
        if k > 0 {
            for x in 0..offsets[k][objects.len()] {
                let (o, i) = locate(k, x);
                let c = class_of[k][x];
                if src[k][c] != class_of[k - 1][offsets[k - 1][o] + objects[o].src(k, i)]
                    || tgt[k][c] != class_of[k - 1][offsets[k - 1][o] + objects[o].tgt(k, i)]
                {
                    return Err(GlobError::NotGlobular { dim: k, idx: c });
                }
            }
        }
    }
    let apex = GlobSet::with_labels(counts, src, tgt, labels)?;
    let legs = objects
        .iter()
        .enumerate()
        .map(|(o, x)| {
            let f = (0..x.dims()).map(|k| (0..x.count(k)).map(|i| class_of[k][offsets[k][o] + i]).collect()).collect();
            GlobMap::new(x.clone(), apex.clone(), f)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Colimit { apex, legs })
}

/// Pushout of `Y ← X → Z`; returns the apex and the legs from `Y` and `Z`.
pub fn pushout(f: &GlobMap, g: &GlobMap) -> Result<(GlobSet, GlobMap, GlobMap), GlobError> {
    if !same_shape(&f.dom, &g.dom) {
        return Err(GlobError::NotComposable);
    }
    let objs = [f.dom.clone(), f.cod.clone(), g.cod.clone()];
    let c = colimit(&objs, &[(0, 1, f), (0, 2, g)])?;
    let mut legs = c.legs.into_iter();
    legs.next();
    let l1 = legs.next().unwrap();
    let l2 = legs.next().unwrap();
    Ok((c.apex, l1, l2))
}

/// The boundary `S^{k-1}` of `D_k`, built as iterated pushouts, with its
/// inclusion into `realize(D_k)`.
pub fn sphere_inclusion(k: usize) -> GlobMap {
    let dk = realize(&Tree::globe(k));
    if k == 0 {
        return GlobMap::new(GlobSet::empty(0), dk, vec![vec![]]).unwrap();
    }
    let s = sphere(k as isize - 1);
    let f = (0..k).map(|_| vec![0, 1]).collect();
    GlobMap::new(s, dk, f).unwrap()
}

/// `S^k = D_k ∐_{S^{k-1}} D_k`; `S^{-1}` is empty.
pub fn sphere(k: isize) -> GlobSet {
    if k < 0 {
        return GlobSet::empty(0);
    }
    let k = k as usize;
    let inc = sphere_inclusion(k);
    let (apex, _, _) = pushout(&inc, &inc).expect("sphere pushout");
    apex
}

/// A coglobular family `X_0 ⇉ X_1 ⇉ …` of globular sets.
#[derive(Clone, Debug)]
pub struct CoglobFamily {
    pub objects: Vec<GlobSet>,
    pub sigma: Vec<GlobMap>,
    pub tau: Vec<GlobMap>,
}

impl CoglobFamily {
    /// The globes with their face inclusions, up to `D_n`.
    pub fn globes(n: usize) -> CoglobFamily {
        CoglobFamily {
            objects: (0..=n).map(|k| realize(&Tree::globe(k))).collect(),
            sigma: (0..n).map(|k| globe_face(k, false)).collect(),
            tau: (0..n).map(|k| globe_face(k, true)).collect(),
        }
    }

    pub fn constant(x: &GlobSet, n: usize) -> CoglobFamily {
        let id = GlobMap::identity(x);
        CoglobFamily { objects: vec![x.clone(); n + 1], sigma: vec![id.clone(); n], tau: vec![id; n] }
    }

    fn chain(&self, j: usize, j2: usize, target: bool) -> GlobMap {
        let mut m = GlobMap::identity(&self.objects[j]);
        for i in j..j2 {
            let step = if target { &self.tau[i] } else { &self.sigma[i] };
            m = m.then(step).unwrap();
        }
        m
    }
}

/// Latching object at `m`: the colimit over the objects `(j, ε)` with
/// `j < m`. The map `(j, ε) → (j', ε')` is the composite whose first step
/// is `ε`, so it does not depend on `ε'`.
pub fn latching(fam: &CoglobFamily, m: usize) -> Result<Colimit, GlobError> {
    let mut objs = Vec::new();
    let mut keys = Vec::new();
    for j in 0..m {
        for target in [false, true] {
            objs.push(fam.objects[j].clone());
            keys.push((j, target));
        }
    }
    let mut maps = Vec::new();
    for (a, &(j, e)) in keys.iter().enumerate() {
        for (b, &(j2, _)) in keys.iter().enumerate() {
            if j < j2 {
                maps.push((a, b, fam.chain(j, j2, e)));
            }
        }
    }
    let arrows: Vec<(usize, usize, &GlobMap)> = maps.iter().map(|(a, b, f)| (*a, *b, f)).collect();
    colimit(&objs, &arrows)
}

/// Exhaustive enumeration of maps `dom → cod`, dimension by dimension.
/// `allowed(k, i, y)` prunes candidates; the visitor returns `false` to stop.
pub fn search_maps<'a>(
    dom: &'a GlobSet,
    cod: &'a GlobSet,
    injective: bool,
    allowed: &'a dyn Fn(usize, usize, usize) -> bool,
    shuffle: Option<&'a mut dyn rand::RngCore>,
    budget: &mut usize,
    visit: &mut dyn FnMut(&[Vec<usize>]) -> bool,
) {
    let order: Vec<(usize, usize)> = (0..dom.dims()).flat_map(|k| (0..dom.count(k)).map(move |i| (k, i))).collect();
    let mut f: Vec<Vec<usize>> = (0..dom.dims()).map(|k| vec![usize::MAX; dom.count(k)]).collect();
    let mut used: Vec<Vec<bool>> = (0..dom.dims()).map(|k| vec![false; cod.count(k)]).collect();
    struct St<'a> {
        dom: &'a GlobSet,
        cod: &'a GlobSet,
        injective: bool,
        allowed: &'a dyn Fn(usize, usize, usize) -> bool,
        rng: Option<&'a mut dyn rand::RngCore>,
        order: Vec<(usize, usize)>,
    }
    fn go(
        st: &mut St,
        pos: usize,
        f: &mut Vec<Vec<usize>>,
        used: &mut Vec<Vec<bool>>,
        budget: &mut usize,
        visit: &mut dyn FnMut(&[Vec<usize>]) -> bool,
    ) -> bool {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        if pos == st.order.len() {
            return visit(f);
        }
        let (k, i) = st.order[pos];
        let mut cands: Vec<usize> = (0..st.cod.count(k))
            .filter(|&y| {
                (!st.injective || !used[k][y])
                    && (k == 0
                        || (st.cod.src(k, y) == f[k - 1][st.dom.src(k, i)]
                            && st.cod.tgt(k, y) == f[k - 1][st.dom.tgt(k, i)]))
                    && (st.allowed)(k, i, y)
            })
            .collect();
        if let Some(r) = st.rng.as_mut() {
            cands.shuffle(r);
        }
        for y in cands {
            f[k][i] = y;
            used[k][y] = true;
            let cont = go(st, pos + 1, f, used, budget, visit);
            used[k][y] = false;
            if !cont {
                f[k][i] = usize::MAX;
                return false;
            }
        }
        f[k][i] = usize::MAX;
        true
    }
    for k in 0..dom.dims() {
        if dom.count(k) > 0 && cod.count(k) == 0 {
            return;
        }
    }
    let mut st = St { dom, cod, injective, allowed, rng: shuffle, order };
    go(&mut st, 0, &mut f, &mut used, budget, visit);
}

pub fn find_iso(x: &GlobSet, y: &GlobSet) -> Option<GlobMap> {
    if x.trimmed_counts() != y.trimmed_counts() {
        return None;
    }
    let mut found = None;
    let mut budget = usize::MAX;
    search_maps(x, y, true, &|_, _, _| true, None, &mut budget, &mut |f| {
        found = Some(f.to_vec());
        false
    });
    found.map(|f| GlobMap::new(x.clone(), y.padded(x.dims()), f).unwrap())
}

pub fn all_maps(x: &GlobSet, y: &GlobSet) -> Vec<GlobMap> {
    let mut out = Vec::new();
    let mut budget = usize::MAX;
    let y = y.padded(x.dims());
    search_maps(x, &y, false, &|_, _, _| true, None, &mut budget, &mut |f| {
        out.push(f.to_vec());
        true
    });
    out.into_iter().map(|f| GlobMap::new(x.clone(), y.clone(), f).unwrap()).collect()
}

/// Returns `(m-bijective, m-fully-faithful)`. Fullness is tested over
/// parallel pairs in positive dimension, which keeps the middle object of
/// the factorization globular.
pub fn classify(f: &GlobMap, m: usize) -> (bool, bool) {
    let top = f.dom.dims().max(f.cod.dims());
    let dom = f.dom.padded(top + 1);
    let cod = f.cod.padded(top + 1);
    let mut ff = f.f.clone();
    ff.resize(top + 1, Vec::new());
    let bij = (0..=m).all(|k| {
        dom.count(k) == cod.count(k) && {
            let mut seen = vec![false; cod.count(k)];
            ff[k].iter().all(|&y| !std::mem::replace(&mut seen[y], true))
        }
    });
    let mut full = true;
    'outer: for i in m..top {
        for y in 0..cod.count(i + 1) {
            let (sy, ty) = (cod.src(i + 1, y), cod.tgt(i + 1, y));
            for a in 0..dom.count(i) {
                if ff[i][a] != sy {
                    continue;
                }
                for b in 0..dom.count(i) {
                    if ff[i][b] != ty || !dom.parallel(i, a, b) {
                        continue;
                    }
                    let lifts = (0..dom.count(i + 1))
                        .filter(|&x| ff[i + 1][x] == y && dom.src(i + 1, x) == a && dom.tgt(i + 1, x) == b)
                        .count();
                    if lifts != 1 {
                        full = false;
                        break 'outer;
                    }
                }
            }
        }
    }
    (bij, full)
}

/// `f = g ∘ h` with `h` m-bijective and `g` m-fully faithful.
pub fn factor_bij_ff(f: &GlobMap, m: usize) -> (GlobMap, GlobMap) {
    let top = f.dom.dims().max(f.cod.dims());
    let x = f.dom.padded(top);
    let y = f.cod.padded(top);
    let mut fm = f.f.clone();
    fm.resize(top, Vec::new());
    let mut counts = Vec::new();
    let mut src = vec![Vec::new(); top];
    let mut tgt = vec![Vec::new(); top];
    let mut labels = Vec::new();
    let mut g: Vec<Vec<usize>> = Vec::new();
    let mut h: Vec<Vec<usize>> = Vec::new();
    for k in 0..top {
        if k <= m {
            counts.push(x.count(k));
            labels.push((0..x.count(k)).map(|i| x.label(k, i).to_string()).collect::<Vec<_>>());
            if k > 0 {
                src[k] = (0..x.count(k)).map(|i| x.src(k, i)).collect();
                tgt[k] = (0..x.count(k)).map(|i| x.tgt(k, i)).collect();
            }
            g.push(fm[k].clone());
            h.push((0..x.count(k)).collect());
        } else {
            let mut idx: HashMap<(usize, usize, usize), usize> = HashMap::new();
            let mut gk = Vec::new();
            let mut lk = Vec::new();
            let wprev = counts[k - 1];
            for yy in 0..y.count(k) {
                for a in 0..wprev {
                    if g[k - 1][a] != y.src(k, yy) {
                        continue;
                    }
                    for b in 0..wprev {
                        if g[k - 1][b] != y.tgt(k, yy) {
                            continue;
                        }
                        let par = k == 1 || (src[k - 1][a] == src[k - 1][b] && tgt[k - 1][a] == tgt[k - 1][b]);
                        if !par {
                            continue;
                        }
                        idx.insert((yy, a, b), gk.len());
                        gk.push(yy);
                        src[k].push(a);
                        tgt[k].push(b);
                        lk.push(format!("{}|{}|{}", y.label(k, yy), a, b));
                    }
                }
            }
            let hk = (0..x.count(k)).map(|i| idx[&(fm[k][i], h[k - 1][x.src(k, i)], h[k - 1][x.tgt(k, i)])]).collect();
            counts.push(gk.len());
            labels.push(lk);
            g.push(gk);
            h.push(hk);
        }
    }
    let w = GlobSet::with_labels(counts, src, tgt, labels).expect("middle object is globular");
    let hm = GlobMap::new(x, w.clone(), h).expect("h is a map");
    let gm = GlobMap::new(w, y, g).expect("g is a map");
    (hm, gm)
}

/// All diagonal fillers `d: B → X` of the square `p∘u = v∘i`, up to `limit`.
pub fn diagonal_fillers(i: &GlobMap, p: &GlobMap, u: &GlobMap, v: &GlobMap, limit: usize) -> Vec<GlobMap> {
    let b = &i.cod;
    let x = &p.dom;
    let mut fixed: Vec<Vec<Option<usize>>> = (0..b.dims()).map(|k| vec![None; b.count(k)]).collect();
    let mut clash = false;
    for k in 0..i.dom.dims() {
        for a in 0..i.dom.count(k) {
            let slot = &mut fixed[k][i.f[k][a]];
            match slot {
                Some(z) if *z != u.f[k][a] => clash = true,
                _ => *slot = Some(u.f[k][a]),
            }
        }
    }
    if clash {
        return Vec::new();
    }
    let allowed = |k: usize, bi: usize, xi: usize| {
        p.f.get(k).map(|pk| pk[xi]) == Some(v.f[k][bi]) && fixed[k][bi].map_or(true, |z| z == xi)
    };
    let mut out = Vec::new();
    let mut budget = usize::MAX;
    let xp = x.padded(b.dims());
    search_maps(b, &xp, false, &allowed, None, &mut budget, &mut |f| {
        out.push(f.to_vec());
        out.len() < limit
    });
    out.into_iter().map(|f| GlobMap::new(b.clone(), xp.clone(), f).unwrap()).collect()
}

/// The unique diagonal filler of a commuting square.
pub fn check_orthogonal(i: &GlobMap, p: &GlobMap, u: &GlobMap, v: &GlobMap) -> Result<GlobMap, GlobError> {
    let top = i.dom.dims().max(i.cod.dims());
    for k in 0..top.min(u.f.len()) {
        for a in 0..i.dom.count(k) {
            if p.f[k][u.f[k][a]] != v.f[k][i.f[k][a]] {
                return Err(GlobError::SquareNotCommuting);
            }
        }
    }
    let mut fs = diagonal_fillers(i, p, u, v, 2);
    match fs.len() {
        0 => Err(GlobError::NoFiller),
        1 => Ok(fs.pop().unwrap()),
        _ => Err(GlobError::NonUniqueFiller),
    }
}

/// A random globular set with `dims` dimensions and at most `max` cells in
/// each; every positive-dimensional cell gets a random parallel pair.
pub fn random_globset<R: Rng>(rng: &mut R, dims: usize, max: usize) -> GlobSet {
    let mut counts = vec![rng.gen_range(1..=max)];
    let mut src = vec![Vec::new()];
    let mut tgt = vec![Vec::new()];
    for k in 1..dims {
        let prev = counts[k - 1];
        let c = if prev == 0 { 0 } else { rng.gen_range(0..=max) };
        let mut sk = Vec::new();
        let mut tk = Vec::new();
        for _ in 0..c {
            let a = rng.gen_range(0..prev);
            let b = if k == 1 {
                rng.gen_range(0..prev)
            } else {
                let par: Vec<usize> =
                    (0..prev).filter(|&b| src[k - 1][b] == src[k - 1][a] && tgt[k - 1][b] == tgt[k - 1][a]).collect();
                *par.choose(rng).unwrap()
            };
            sk.push(a);
            tk.push(b);
        }
        counts.push(c);
        src.push(sk);
        tgt.push(tk);
    }
    GlobSet::new(counts, src, tgt).expect("random construction is globular")
}

/// A random map found by shuffled depth-first search within `budget` steps.
pub fn random_map<R: Rng>(rng: &mut R, dom: &GlobSet, cod: &GlobSet, budget: usize) -> Option<GlobMap> {
    let cod = cod.padded(dom.dims());
    let mut found = None;
    let mut b = budget;
    let r: &mut dyn rand::RngCore = rng;
    search_maps(dom, &cod, false, &|_, _, _| true, Some(r), &mut b, &mut |f| {
        found = Some(f.to_vec());
        false
    });
    found.map(|f| GlobMap::new(dom.clone(), cod.clone(), f).unwrap())
}

/// Cells of `X` in dimensions `≥ 1` whose iterated 0-source is `a` and
/// 0-target is `b`, shifted down by one. Also returns, per dimension, the
/// index in `X` of each cell.
pub fn loopspace(x: &GlobSet, a: usize, b: usize) -> (GlobSet, Vec<Vec<usize>>) {
    let dims = x.dims().saturating_sub(1).max(1);
    let mut idx: Vec<Vec<usize>> = Vec::new();
    let mut pos: Vec<HashMap<usize, usize>> = Vec::new();
    let mut counts = Vec::new();
    let mut src = vec![Vec::new(); dims];
    let mut tgt = vec![Vec::new(); dims];
    let mut labels = Vec::new();
    for k in 0..dims {
        let d = k + 1;
        let cells: Vec<usize> = (0..x.count(d))
            .filter(|&c| x.face_to(d, c, 0, false) == a && x.face_to(d, c, 0, true) == b)
            .collect();
        pos.push(cells.iter().enumerate().map(|(i, &c)| (c, i)).collect());
        if k > 0 {
            src[k] = cells.iter().map(|&c| pos[k - 1][&x.src(d, c)]).collect();
            tgt[k] = cells.iter().map(|&c| pos[k - 1][&x.tgt(d, c)]).collect();
        }
        counts.push(cells.len());
        labels.push(cells.iter().map(|&c| x.label(d, c).to_string()).collect());
        idx.push(cells);
    }
    (GlobSet::with_labels(counts, src, tgt, labels).expect("loop space is globular"), idx)
}

/// Finds a tree `T` with `realize(T) ≅ X`, together with the isomorphism.
pub fn recognize_tree(x: &GlobSet) -> Option<(Tree, GlobMap)> {
    let t = candidate_tree(x)?;
    let iso = find_iso(&realize(&t), x)?;
    Some((t, iso))
}

fn candidate_tree(x: &GlobSet) -> Option<Tree> {
    let n0 = x.count(0);
    if n0 == 0 {
        return None;
    }
    if n0 == 1 {
        return if (1..x.dims()).all(|k| x.count(k) == 0) { Some(Tree::leaf()) } else { None };
    }
    let mut next = vec![None; n0];
    let mut has_in = vec![false; n0];
    for e in 0..x.count(1) {
        let (s, t) = (x.src(1, e), x.tgt(1, e));
        if s == t {
            return None;
        }
        match next[s] {
            None => next[s] = Some(t),
            Some(u) if u == t => {}
            _ => return None,
        }
        has_in[t] = true;
    }
    let start = (0..n0).find(|&v| !has_in[v])?;
    let mut order = vec![start];
    while let Some(v) = next[*order.last().unwrap()] {
        if order.contains(&v) {
            return None;
        }
        order.push(v);
    }
    if order.len() != n0 {
        return None;
    }
    let mut kids = Vec::new();
    for w in order.windows(2) {
        let (l, _) = loopspace(x, w[0], w[1]);
        kids.push(candidate_tree(&l)?);
    }
    Some(Tree::new(kids))
}

/// Candidate structure tables on a 2-truncated globular set, as in the
/// locally posetal bicategory built from it.
#[derive(Clone, Debug, Default)]
pub struct ChiStructure {
    /// `(f, g) ↦ g∘f` for `t f = s g`.
    pub comp1: HashMap<(usize, usize), usize>,
    /// `(α, β) ↦` a 2-cell from `s α` to `t β`, for `t α = s β`.
    pub vcomp2: HashMap<(usize, usize), usize>,
    /// `(α, h) ↦` a 2-cell `h∘s α ⇒ h∘t α`.
    pub whisker_left: HashMap<(usize, usize), usize>,
    /// `(h, α) ↦` a 2-cell `s α∘h ⇒ t α∘h`.
    pub whisker_right: HashMap<(usize, usize), usize>,
    pub id1: HashMap<usize, usize>,
    pub id2: HashMap<usize, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChiItem {
    pub item: usize,
    pub name: &'static str,
    pub ok: bool,
    pub witness: Option<String>,
}

/// Runs the seven-item checklist. Entries that are present but ill typed
/// are a validation error; missing entries are reported as violations.
pub fn chi_check(x: &GlobSet, st: &ChiStructure) -> Result<Vec<ChiItem>, GlobError> {
    let n1 = x.count(1);
    let n2 = x.count(2);
    let bad = |what: &str| GlobError::BadStructure(what.to_string());
    let hom2 = |f: usize, g: usize| (0..n2).any(|a| x.src(2, a) == f && x.tgt(2, a) == g);
    for (&(f, g), &h) in &st.comp1 {
        if f >= n1 || g >= n1 || h >= n1 || x.tgt(1, f) != x.src(1, g) || x.src(1, h) != x.src(1, f) || x.tgt(1, h) != x.tgt(1, g) {
            return Err(bad("comp1 entry is ill typed"));
        }
    }
    for (&(a, b), &c) in &st.vcomp2 {
        if a >= n2 || b >= n2 || c >= n2 || x.tgt(2, a) != x.src(2, b) || x.src(2, c) != x.src(2, a) || x.tgt(2, c) != x.tgt(2, b) {
            return Err(bad("vcomp2 entry is ill typed"));
        }
    }
    for (&a, &i) in &st.id1 {
        if a >= x.count(0) || i >= n1 || x.src(1, i) != a || x.tgt(1, i) != a {
            return Err(bad("id1 entry is ill typed"));
        }
    }
    for (&f, &i) in &st.id2 {
        if f >= n1 || i >= n2 || x.src(2, i) != f || x.tgt(2, i) != f {
            return Err(bad("id2 entry is ill typed"));
        }
    }
    let comp = |f: usize, g: usize| st.comp1.get(&(f, g)).copied();
    for (&(a, h), &c) in &st.whisker_left {
        if a >= n2 || h >= n1 || c >= n2 {
            return Err(bad("whisker_left entry out of range"));
        }
        let (f, g) = (x.src(2, a), x.tgt(2, a));
        if x.tgt(1, f) != x.src(1, h) {
            return Err(bad("whisker_left entry is ill typed"));
        }
        if let (Some(hf), Some(hg)) = (comp(f, h), comp(g, h)) {
            if x.src(2, c) != hf || x.tgt(2, c) != hg {
                return Err(bad("whisker_left entry is ill typed"));
            }
        }
    }
    for (&(h, a), &c) in &st.whisker_right {
        if a >= n2 || h >= n1 || c >= n2 {
            return Err(bad("whisker_right entry out of range"));
        }
        let (f, g) = (x.src(2, a), x.tgt(2, a));
        if x.tgt(1, h) != x.src(1, f) {
            return Err(bad("whisker_right entry is ill typed"));
        }
        if let (Some(fh), Some(gh)) = (comp(h, f), comp(h, g)) {
            if x.src(2, c) != fh || x.tgt(2, c) != gh {
                return Err(bad("whisker_right entry is ill typed"));
            }
        }
    }

    let mut items = Vec::new();
    let mut push = |item: usize, name: &'static str, w: Option<String>| {
        items.push(ChiItem { item, name, ok: w.is_none(), witness: w });
    };

    let pairs1: Vec<(usize, usize)> =
        (0..n1).flat_map(|f| (0..n1).map(move |g| (f, g))).filter(|&(f, g)| x.tgt(1, f) == x.src(1, g)).collect();
    push(
        1,
        "composition of 1-cells",
        pairs1.iter().find(|p| !st.comp1.contains_key(p)).map(|(f, g)| format!("no composite of ({f}, {g})")),
    );

    let pairs2 = (0..n2).flat_map(|a| (0..n2).map(move |b| (a, b))).filter(|&(a, b)| x.tgt(2, a) == x.src(2, b));
    let mut w2 = None;
    for (a, b) in pairs2 {
        if !st.vcomp2.contains_key(&(a, b)) {
            w2 = Some(format!("no vertical composite of ({a}, {b})"));
            break;
        }
    }
    push(2, "vertical composition of 2-cells", w2);

    let mut w3 = None;
    'w: for a in 0..n2 {
        for h in 0..n1 {
            if x.tgt(1, x.src(2, a)) == x.src(1, h) && !st.whisker_left.contains_key(&(a, h)) {
                w3 = Some(format!("no whiskering of 2-cell {a} by 1-cell {h}"));
                break 'w;
            }
            if x.tgt(1, h) == x.src(1, x.src(2, a)) && !st.whisker_right.contains_key(&(h, a)) {
                w3 = Some(format!("no whiskering of 1-cell {h} by 2-cell {a}"));
                break 'w;
            }
        }
    }
    push(3, "whiskerings", w3);

    push(
        4,
        "identity 1-cells",
        (0..x.count(0)).find(|a| !st.id1.contains_key(a)).map(|a| format!("no identity on 0-cell {a}")),
    );
    push(5, "identity 2-cells", (0..n1).find(|f| !st.id2.contains_key(f)).map(|f| format!("no identity on 1-cell {f}")));

    let mut w6 = None;
    for f in 0..n1 {
        let l = st.id1.get(&x.src(1, f)).and_then(|&i| comp(i, f));
        let r = st.id1.get(&x.tgt(1, f)).and_then(|&i| comp(f, i));
        let ok = match (l, r) {
            (Some(l), Some(r)) => hom2(l, f) && hom2(f, l) && hom2(r, f) && hom2(f, r),
            _ => false,
        };
        if !ok {
            w6 = Some(format!("unit constraint missing for 1-cell {f}"));
            break;
        }
    }
    push(6, "unit constraints", w6);

    let mut w7 = None;
    'a: for &(f, g) in &pairs1 {
        for h in 0..n1 {
            if x.tgt(1, g) != x.src(1, h) {
                continue;
            }
            let l = comp(f, g).and_then(|gf| comp(gf, h));
            let r = comp(g, h).and_then(|hg| comp(f, hg));
            let ok = matches!((l, r), (Some(l), Some(r)) if hom2(l, r) && hom2(r, l));
            if !ok {
                w7 = Some(format!("associator missing for ({f}, {g}, {h})"));
                break 'a;
            }
        }
    }
    push(7, "associators", w7);
    Ok(items)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(s: &str) -> Tree {
        s.parse().unwrap()
    }

    #[test]
    fn realize_counts() {
        assert_eq!(realize(&Tree::globe(2)).counts(), vec![2, 2, 1]);
        assert_eq!(realize(&t("[[[][]][]]")).counts(), vec![3, 4, 2]);
        let x = t("[[][[]]]");
        let mut c = vec![2];
        c.extend(realize(&x).counts());
        assert_eq!(realize(&x.suspend()).counts(), c);
    }

    #[test]
    fn pushouts() {
        let d1 = realize(&Tree::globe(1));
        let id = GlobMap::identity(&d1);
        let (p, _, _) = pushout(&id, &id).unwrap();
        assert!(find_iso(&p, &d1).is_some());
        let (p, _, _) = pushout(&globe_inclusion(0, 1, true), &globe_inclusion(0, 1, false)).unwrap();
        assert_eq!(p.counts(), vec![3, 2]);
        let (p, _, _) = pushout(&globe_face(1, true), &globe_face(1, false)).unwrap();
        assert_eq!(p.counts(), vec![2, 3, 2]);
    }

    #[test]
    fn spheres() {
        assert!(sphere(-1).is_empty());
        assert_eq!(sphere(0).counts(), vec![2]);
        assert_eq!(sphere(2).counts(), vec![2, 2, 2]);
    }

    #[test]
    fn latching_of_globes() {
        let fam = CoglobFamily::globes(5);
        for m in 1..=4 {
            let l = latching(&fam, m).unwrap();
            assert!(find_iso(&l.apex, &sphere(m as isize - 1)).is_some(), "m = {m}");
        }
    }

    #[test]
    fn latching_of_constant() {
        let x = realize(&t("[[][]]"));
        let fam = CoglobFamily::constant(&x, 4);
        assert_eq!(latching(&fam, 1).unwrap().apex.counts(), vec![6, 4]);
        for m in 2..=4 {
            assert!(find_iso(&latching(&fam, m).unwrap().apex, &x).is_some());
        }
    }

    #[test]
    fn classify_examples() {
        let d2 = realize(&Tree::globe(2));
        for m in 0..3 {
            assert_eq!(classify(&GlobMap::identity(&d2), m), (true, true));
        }
        assert!(classify(&globe_face(1, false), 0).0);
        let s = sphere_inclusion(2);
        assert_eq!(classify(&s, 1), (true, false));
    }

    #[test]
    fn factor_examples() {
        let s = sphere_inclusion(2);
        let (h, g) = factor_bij_ff(&s, 1);
        assert!(find_iso(&h.cod, &realize(&Tree::globe(2))).is_some());
        assert!(g.is_bijective());
        let two = sphere(0);
        let pt = realize(&Tree::leaf());
        let fold = GlobMap::new(two, pt, vec![vec![0, 0]]).unwrap();
        let (h, g) = factor_bij_ff(&fold, 0);
        assert_eq!(h.then(&g).unwrap().f, fold.f);
        assert!(classify(&h, 0).0 && classify(&g, 0).1);
    }

    #[test]
    fn loopspaces() {
        let d1 = realize(&Tree::globe(1));
        let (l, _) = loopspace(&d1, 0, 1);
        assert_eq!(l.counts(), vec![1]);
        let (l, _) = loopspace(&d1, 0, 0);
        assert!(l.is_empty());
        let (l, _) = loopspace(&realize(&Tree::globe(2)), 0, 1);
        assert_eq!(l.trimmed_counts(), vec![2, 1]);
    }

    #[test]
    fn recognize() {
        for x in crate::tree::trees_up_to(6) {
            let (y, _) = recognize_tree(&realize(&x)).unwrap();
            assert_eq!(y, x);
        }
        assert!(recognize_tree(&sphere(1)).is_none());
    }

    #[test]
    fn chi_on_globe_lacks_identities() {
        let x = realize(&Tree::globe(2));
        let r = chi_check(&x, &ChiStructure::default()).unwrap();
        assert!(r[0].ok);
        assert!(!r[3].ok);
        let y = realize(&t("[[][]]"));
        assert!(!chi_check(&y, &ChiStructure::default()).unwrap()[0].ok);
    }

    #[test]
    fn chi_idempotent_passes() {
        // one object a, arrows 1 and e with e∘e = e, 2-cells identities plus e ⇒ 1, 1 ⇒ e.
        let x = GlobSet::new(vec![1, 2, 4], vec![vec![], vec![0, 0], vec![0, 1, 1, 0]], vec![vec![], vec![0, 0], vec![0, 1, 0, 1]])
            .unwrap();
        let mut st = ChiStructure::default();
        for f in 0..2 {
            for g in 0..2 {
                st.comp1.insert((f, g), f.max(g));
            }
        }
        st.id1.insert(0, 0);
        st.id2.insert(0, 0);
        st.id2.insert(1, 1);
        let cell = |f: usize, g: usize| (0..4).find(|&a| x.src(2, a) == f && x.tgt(2, a) == g).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                if x.tgt(2, a) == x.src(2, b) {
                    st.vcomp2.insert((a, b), cell(x.src(2, a), x.tgt(2, b)));
                }
            }
            for h in 0..2 {
                let (f, g) = (x.src(2, a), x.tgt(2, a));
                st.whisker_left.insert((a, h), cell(f.max(h), g.max(h)));
                st.whisker_right.insert((h, a), cell(f.max(h), g.max(h)));
            }
        }
        let r = chi_check(&x, &st).unwrap();
        assert!(r.iter().all(|i| i.ok), "{r:?}");
    }

    #[test]
    fn chi_unit_flag_and_validation() {
        // a single arrow f and its identity, but no 2-cell f∘1 ⇒ f
        let x = GlobSet::new(vec![1, 2, 2], vec![vec![], vec![0, 0], vec![0, 1]], vec![vec![], vec![0, 0], vec![0, 1]]).unwrap();
        let mut st = ChiStructure::default();
        st.id1.insert(0, 0);
        for f in 0..2 {
            for g in 0..2 {
                st.comp1.insert((f, g), 1);
            }
        }
        st.comp1.insert((0, 1), 0);
        let r = chi_check(&x, &st).unwrap();
        assert!(!r[5].ok);
        st.id1.insert(0, 7);
        assert!(chi_check(&x, &st).is_err());
    }

    proptest! {
        #[test]
        fn factorization_classes(seed in 0u64..500, m in 0usize..3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_globset(&mut rng, 3, 3);
            let b = random_globset(&mut rng, 3, 3);
            if let Some(f) = random_map(&mut rng, &a, &b, 2000) {
                let (h, g) = factor_bij_ff(&f, m);
                prop_assert_eq!(h.then(&g).unwrap().f, f.f.clone());
                prop_assert!(classify(&h, m).0);
                prop_assert!(classify(&g, m).1);
            }
        }

        #[test]
        fn bijective_closed_under_pushout(seed in 0u64..300, m in 0usize..2) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_globset(&mut rng, 3, 3);
            let b = random_globset(&mut rng, 3, 3);
            let c = random_globset(&mut rng, 3, 3);
            if let (Some(f), Some(g)) = (random_map(&mut rng, &a, &b, 2000), random_map(&mut rng, &a, &c, 2000)) {
                let (h, _) = factor_bij_ff(&f, m);
                let (_, _, leg) = pushout(&h, &g).unwrap();
                prop_assert!(classify(&leg, m).0);
            }
        }
    }
}

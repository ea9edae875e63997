//! Planar rooted trees (Batanin trees) and their combinatorics.
//!
//! A tree of height `n` is a pasting shape for globes. Leaves sit over
//! globes, inner nodes over the faces along which they are glued.

use std::fmt;
use std::str::FromStr;

use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("parse error at offset {offset}: {msg}")]
    Parse { offset: usize, msg: String },
    #[error("invalid dimension table: {0}")]
    InvalidTable(String),
    #[error("the point has no boundary")]
    NoBoundary,
    #[error("no node at path {0:?}")]
    BadPath(Vec<usize>),
    #[error("gap {gap} out of range for node with {arity} children")]
    BadGap { gap: usize, arity: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tree {
    children: Vec<Tree>,
}

/// A cell of the globular set of a tree: the `gap`-th gap of the node at
/// `path`. Its dimension is the height of the node, `path.len()`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub path: Vec<usize>,
    pub gap: usize,
}

impl CellKey {
    pub fn dim(&self) -> usize {
        self.path.len()
    }
}

/// Position where a new leaf may be inserted: before child `gap` of the
/// node at `path`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sector {
    pub path: Vec<usize>,
    pub gap: usize,
}

impl Sector {
    /// Height of the inserted vertex.
    pub fn height(&self) -> usize {
        self.path.len() + 1
    }

    /// Path of the inserted leaf in the extended tree.
    pub fn new_leaf(&self) -> Vec<usize> {
        let mut p = self.path.clone();
        p.push(self.gap);
        p
    }
}

/// Classification of an element of the linearization by where the new
/// vertex sits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Klass {
    H1Right,
    H1Mid,
    H1Left,
    H2OverEdge,
    H2Max,
    H2Mid,
    H2Min,
    H3,
}

impl Klass {
    pub const ALL: [Klass; 8] = [
        Klass::H1Right,
        Klass::H1Mid,
        Klass::H1Left,
        Klass::H2OverEdge,
        Klass::H2Max,
        Klass::H2Mid,
        Klass::H2Min,
        Klass::H3,
    ];

    pub fn source_degenerate(self) -> bool {
        matches!(self, Klass::H2Max | Klass::H2Mid | Klass::H3)
    }

    pub fn target_degenerate(self) -> bool {
        matches!(self, Klass::H2Min | Klass::H2Mid | Klass::H3)
    }

    /// Index of the cylinder square shape used for this class in a stack.
    pub fn case(self) -> usize {
        match self {
            Klass::H1Right => 1,
            Klass::H1Left => 2,
            Klass::H1Mid => 3,
            Klass::H2OverEdge => 4,
            Klass::H2Max => 5,
            Klass::H2Min => 6,
            Klass::H2Mid => 7,
            Klass::H3 => 8,
        }
    }
}

impl fmt::Display for Klass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Klass::H1Right => "H1-Right",
            Klass::H1Mid => "H1-Mid",
            Klass::H1Left => "H1-Left",
            Klass::H2OverEdge => "H2-OverEdge",
            Klass::H2Max => "H2-Max",
            Klass::H2Mid => "H2-Mid",
            Klass::H2Min => "H2-Min",
            Klass::H3 => "H3",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Insertion {
    pub sector: Sector,
    pub klass: Klass,
    pub tree: Tree,
}

/// Leaf heights and the heights of meets of consecutive leaves.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Table {
    pub tops: Vec<usize>,
    pub joins: Vec<usize>,
}

impl Table {
    pub fn new(tops: Vec<usize>, joins: Vec<usize>) -> Result<Table, TreeError> {
        if tops.is_empty() {
            return Err(TreeError::InvalidTable("no leaves".into()));
        }
        if joins.len() + 1 != tops.len() {
            return Err(TreeError::InvalidTable(format!(
                "{} tops need {} joins, got {}",
                tops.len(),
                tops.len() - 1,
                joins.len()
            )));
        }
        for (k, &j) in joins.iter().enumerate() {
            if j >= tops[k] || j >= tops[k + 1] {
                return Err(TreeError::InvalidTable(format!(
                    "join {j} at position {k} is not below both neighbours ({}, {})",
                    tops[k],
                    tops[k + 1]
                )));
            }
        }
        Ok(Table { tops, joins })
    }

    pub fn to_tree(&self) -> Tree {
        fn build(t: &Table, a: usize, b: usize, h: usize) -> Tree {
            if a == b && t.tops[a] == h {
                return Tree::leaf();
            }
            let mut children = Vec::new();
            let mut start = a;
            for k in a..b {
                if t.joins[k] == h {
                    children.push(build(t, start, k, h + 1));
                    start = k + 1;
                }
            }
            children.push(build(t, start, b, h + 1));
            Tree { children }
        }
        build(self, 0, self.tops.len() - 1, 0)
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "({};{})", join(&self.tops), join(&self.joins))
    }
}

impl FromStr for Table {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Table, TreeError> {
        let s = s.trim();
        let inner = s
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| TreeError::Parse { offset: 0, msg: "expected (tops;joins)".into() })?;
        let (a, b) = inner
            .split_once(';')
            .ok_or_else(|| TreeError::Parse { offset: 1, msg: "missing ';'".into() })?;
        let nums = |part: &str, base: usize| -> Result<Vec<usize>, TreeError> {
            if part.trim().is_empty() {
                return Ok(Vec::new());
            }
            part.split(',')
                .map(|x| {
                    x.trim().parse::<usize>().map_err(|_| TreeError::Parse {
                        offset: base,
                        msg: format!("bad number {x:?}"),
                    })
                })
                .collect()
        };
        let tops = nums(a, 1)?;
        let joins = nums(b, a.len() + 2)?;
        Table::new(tops, joins)
    }
}

impl Tree {
    pub fn leaf() -> Tree {
        Tree { children: Vec::new() }
    }

    pub fn new(children: Vec<Tree>) -> Tree {
        Tree { children }
    }

    /// The globe `D_k`: a linear tree with `k` edges.
    pub fn globe(k: usize) -> Tree {
        let mut t = Tree::leaf();
        for _ in 0..k {
            t = t.suspend();
        }
        t
    }

    pub fn children(&self) -> &[Tree] {
        &self.children
    }

    pub fn arity(&self) -> usize {
        self.children.len()
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(Tree::node_count).sum::<usize>()
    }

    pub fn leaf_count(&self) -> usize {
        if self.is_leaf() {
            1
        } else {
            self.children.iter().map(Tree::leaf_count).sum()
        }
    }

    /// Height of the tree, which is the dimension of the pasting shape.
    pub fn dim(&self) -> usize {
        self.children.iter().map(|c| c.dim() + 1).max().unwrap_or(0)
    }

    pub fn is_globe(&self) -> bool {
        match self.children.as_slice() {
            [] => true,
            [c] => c.is_globe(),
            _ => false,
        }
    }

    pub fn suspend(&self) -> Tree {
        Tree { children: vec![self.clone()] }
    }

    /// The children of the root. The tree is the wedge of their suspensions.
    pub fn decompose(&self) -> Vec<Tree> {
        self.children.clone()
    }

    pub fn reassemble(parts: &[Tree]) -> Tree {
        Tree { children: parts.to_vec() }
    }

    /// Truncation to height `dim - 1`.
    pub fn boundary(&self) -> Result<Tree, TreeError> {
        let d = self.dim();
        if d == 0 {
            return Err(TreeError::NoBoundary);
        }
        Ok(self.truncate(d - 1))
    }

    pub fn truncate(&self, h: usize) -> Tree {
        if h == 0 {
            return Tree::leaf();
        }
        Tree { children: self.children.iter().map(|c| c.truncate(h - 1)).collect() }
    }

    pub fn node(&self, path: &[usize]) -> Option<&Tree> {
        let mut t = self;
        for &i in path {
            t = t.children.get(i)?;
        }
        Some(t)
    }

    fn node_mut(&mut self, path: &[usize]) -> Option<&mut Tree> {
        let mut t = self;
        for &i in path {
            t = t.children.get_mut(i)?;
        }
        Some(t)
    }

    pub fn insert_leaf(&self, sector: &Sector) -> Result<Tree, TreeError> {
        let mut t = self.clone();
        let node = t.node_mut(&sector.path).ok_or_else(|| TreeError::BadPath(sector.path.clone()))?;
        if sector.gap > node.children.len() {
            return Err(TreeError::BadGap { gap: sector.gap, arity: node.children.len() });
        }
        node.children.insert(sector.gap, Tree::leaf());
        Ok(t)
    }

    /// Node paths in preorder, which is lexicographic order.
    pub fn node_paths(&self) -> Vec<Vec<usize>> {
        fn go(t: &Tree, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            out.push(p.clone());
            for (i, c) in t.children.iter().enumerate() {
                p.push(i);
                go(c, p, out);
                p.pop();
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn leaf_paths(&self) -> Vec<Vec<usize>> {
        self.node_paths()
            .into_iter()
            .filter(|p| self.node(p).map(Tree::is_leaf).unwrap_or(false))
            .collect()
    }

    /// Cells of the realized globular set, by dimension. The `k`-cells are
    /// the gaps of the nodes of height `k`, in lexicographic order.
    pub fn cells(&self) -> Vec<Vec<CellKey>> {
        let mut out = vec![Vec::new(); self.dim() + 1];
        for p in self.node_paths() {
            let r = self.node(&p).unwrap().arity();
            for gap in 0..=r {
                out[p.len()].push(CellKey { path: p.clone(), gap });
            }
        }
        out
    }

    /// Source and target of a positive-dimensional cell.
    pub fn cell_faces(&self, c: &CellKey) -> Option<(CellKey, CellKey)> {
        let (&i, parent) = c.path.split_last()?;
        let parent = parent.to_vec();
        Some((CellKey { path: parent.clone(), gap: i }, CellKey { path: parent, gap: i + 1 }))
    }

    pub fn table(&self) -> Table {
        let leaves = self.leaf_paths();
        let tops = leaves.iter().map(Vec::len).collect();
        let joins = leaves
            .windows(2)
            .map(|w| w[0].iter().zip(w[1].iter()).take_while(|(a, b)| a == b).count())
            .collect();
        Table { tops, joins }
    }

    pub fn from_table(t: &Table) -> Result<Tree, TreeError> {
        let t = Table::new(t.tops.clone(), t.joins.clone())?;
        Ok(t.to_tree())
    }

    /// All insertions of a new leaf, in contour order from the right of the
    /// root around to its left.
    pub fn linearization(&self) -> Vec<Insertion> {
        let mut sectors = Vec::new();
        self.sector_list(&mut Vec::new(), &mut sectors);
        sectors
            .into_iter()
            .map(|s| {
                let klass = self.klass_of(&s);
                let tree = self.insert_leaf(&s).expect("sector in range");
                Insertion { sector: s, klass, tree }
            })
            .collect()
    }

    fn sector_list(&self, path: &mut Vec<usize>, out: &mut Vec<Sector>) {
        let node = self.node(path).unwrap();
        let r = node.arity();
        out.push(Sector { path: path.clone(), gap: r });
        for j in (0..r).rev() {
            path.push(j);
            self.sector_list(path, out);
            path.pop();
            out.push(Sector { path: path.clone(), gap: j });
        }
    }

    pub fn klass_of(&self, s: &Sector) -> Klass {
        let r = self.node(&s.path).map(Tree::arity).unwrap_or(0);
        match s.height() {
            1 => {
                if s.gap == r {
                    Klass::H1Right
                } else if s.gap == 0 {
                    Klass::H1Left
                } else {
                    Klass::H1Mid
                }
            }
            2 => {
                if r == 0 {
                    Klass::H2OverEdge
                } else if s.gap == r {
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

    pub fn to_json(&self) -> Value {
        Value::Array(self.children.iter().map(Tree::to_json).collect())
    }

    pub fn from_json(v: &Value) -> Result<Tree, TreeError> {
        match v {
            Value::Array(xs) => Ok(Tree { children: xs.iter().map(Tree::from_json).collect::<Result<_, _>>()? }),
            _ => Err(TreeError::Parse { offset: 0, msg: "expected nested arrays".into() }),
        }
    }

    /// Graphviz rendering. The node at `highlight`, if any, is filled.
    pub fn to_dot(&self, highlight: Option<&[usize]>) -> String {
        let paths = self.node_paths();
        let name = |p: &[usize]| {
            if p.is_empty() {
                "r".to_string()
            } else {
                format!("n{}", p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("_"))
            }
        };
        let mut s = String::from("digraph tree {\n  node [shape=circle, label=\"\", width=0.2];\n");
        for p in &paths {
            if Some(p.as_slice()) == highlight {
                s += &format!("  {} [style=filled, fillcolor=red];\n", name(p));
            } else {
                s += &format!("  {};\n", name(p));
            }
        }
        for p in paths.iter().filter(|p| !p.is_empty()) {
            s += &format!("  {} -> {};\n", name(&p[..p.len() - 1]), name(p));
        }
        s += "}\n";
        s
    }

    /// Accepts bracket syntax, `Dk` for globes, or a table `(tops;joins)`.
    pub fn parse_any(s: &str) -> Result<Tree, TreeError> {
        let t = s.trim();
        if let Some(k) = t.strip_prefix('D') {
            let k = k
                .parse::<usize>()
                .map_err(|_| TreeError::Parse { offset: 1, msg: "expected a number after D".into() })?;
            return Ok(Tree::globe(k));
        }
        if t.starts_with('(') {
            return Ok(t.parse::<Table>()?.to_tree());
        }
        t.parse()
    }
}

impl FromStr for Tree {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Tree, TreeError> {
        let bytes = s.as_bytes();
        let mut pos = 0;
        let skip = |pos: &mut usize| {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
        };
        fn parse_node(bytes: &[u8], pos: &mut usize, skip: &dyn Fn(&mut usize)) -> Result<Tree, TreeError> {
            skip(pos);
            if *pos >= bytes.len() || bytes[*pos] != b'[' {
                return Err(TreeError::Parse { offset: *pos, msg: "expected '['".into() });
            }
            *pos += 1;
            let mut children = Vec::new();
            loop {
                skip(pos);
                match bytes.get(*pos) {
                    Some(b']') => {
                        *pos += 1;
                        return Ok(Tree { children });
                    }
                    Some(b'[') => children.push(parse_node(bytes, pos, skip)?),
                    Some(_) => return Err(TreeError::Parse { offset: *pos, msg: "unexpected character".into() }),
                    None => return Err(TreeError::Parse { offset: *pos, msg: "unclosed '['".into() }),
                }
            }
        }
        let t = parse_node(bytes, &mut pos, &skip)?;
        skip(&mut pos);
        if pos != bytes.len() {
            return Err(TreeError::Parse { offset: pos, msg: "trailing input".into() });
        }
        Ok(t)
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for c in &self.children {
            write!(f, "{c}")?;
        }
        f.write_str("]")
    }
}

/// All trees with exactly `n` nodes, sorted.
pub fn trees_with_nodes(n: usize) -> Vec<Tree> {
    fn forests(n: usize, memo: &mut Vec<Option<Vec<Vec<Tree>>>>) -> Vec<Vec<Tree>> {
        if let Some(f) = &memo[n] {
            return f.clone();
        }
        let mut out = Vec::new();
        if n == 0 {
            out.push(Vec::new());
        } else {
            for first in 1..=n {
                let heads = trees(first, memo);
                let tails = forests(n - first, memo);
                for h in &heads {
                    for t in &tails {
                        let mut f = vec![h.clone()];
                        f.extend(t.iter().cloned());
                        out.push(f);
                    }
                }
            }
        }
        memo[n] = Some(out.clone());
        out
    }
    fn trees(n: usize, memo: &mut Vec<Option<Vec<Vec<Tree>>>>) -> Vec<Tree> {
        forests(n - 1, memo).into_iter().map(Tree::new).collect()
    }
    if n == 0 {
        return Vec::new();
    }
    let mut memo = vec![None; n + 1];
    let mut ts = trees(n, &mut memo);
    ts.sort();
    ts
}

/// All trees with between 1 and `n` nodes, smallest first.
pub fn trees_up_to(n: usize) -> Vec<Tree> {
    (1..=n).flat_map(trees_with_nodes).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(s: &str) -> Tree {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_print() {
        let x = t("[[[][]][]]");
        assert_eq!(x.to_string(), "[[[][]][]]");
        assert_eq!(x.node_count(), 5);
        assert_eq!(x.dim(), 2);
    }

    #[test]
    fn parse_error_offset() {
        assert_eq!(
            "[[]".parse::<Tree>(),
            Err(TreeError::Parse { offset: 3, msg: "unclosed '['".into() })
        );
        assert!(matches!("[]x".parse::<Tree>(), Err(TreeError::Parse { offset: 2, .. })));
    }

    #[test]
    fn table_of_example() {
        let x = t("[[[][]][]]");
        let tb = x.table();
        assert_eq!(tb.to_string(), "(2,2,1;1,0)");
        assert_eq!(tb.to_tree(), x);
        assert_eq!("(2,2,1;1,0)".parse::<Table>().unwrap().to_tree(), x);
    }

    #[test]
    fn bad_tables() {
        assert!(Table::new(vec![1, 1], vec![1]).is_err());
        assert!(Table::new(vec![1, 1], vec![]).is_err());
        assert!(Table::new(vec![], vec![]).is_err());
    }

    #[test]
    fn globes() {
        assert_eq!(Tree::globe(2), t("[[[]]]"));
        assert_eq!(Tree::parse_any("D3").unwrap().dim(), 3);
        assert_eq!(Tree::globe(0).boundary(), Err(TreeError::NoBoundary));
        assert_eq!(Tree::globe(3).boundary().unwrap(), Tree::globe(2));
    }

    #[test]
    fn cell_counts() {
        let x = t("[[[][]][]]");
        let counts: Vec<usize> = x.cells().iter().map(Vec::len).collect();
        assert_eq!(counts, vec![3, 4, 2]);
    }

    #[test]
    fn enumeration_is_catalan() {
        let cat = [1, 1, 2, 5, 14, 42, 132];
        for n in 1..=7 {
            assert_eq!(trees_with_nodes(n).len(), cat[n - 1]);
        }
    }

    #[test]
    fn linearization_of_example() {
        let x = t("[[[][]][]]");
        let lin = x.linearization();
        let ks: Vec<String> = lin.iter().map(|i| i.klass.to_string()).collect();
        assert_eq!(
            ks,
            ["H1-Right", "H2-OverEdge", "H1-Mid", "H2-Max", "H3", "H2-Mid", "H3", "H2-Min", "H1-Left"]
        );
        assert_eq!(lin[0].tree, t("[[[][]][][]]"));
        assert_eq!(lin[1].tree, t("[[[][]][[]]]"));
        assert_eq!(lin[8].tree, t("[[][[][]][]]"));
    }

    #[test]
    fn point_linearizes_to_edge() {
        let lin = Tree::leaf().linearization();
        assert_eq!(lin.len(), 1);
        assert_eq!(lin[0].klass, Klass::H1Right);
        assert_eq!(lin[0].tree, Tree::globe(1));
    }

    #[test]
    fn json_and_dot() {
        let x = t("[[][[]]]");
        assert_eq!(Tree::from_json(&x.to_json()).unwrap(), x);
        let dot = x.to_dot(Some(&[1, 0]));
        assert!(dot.contains("n1_0 [style=filled"));
    }

    fn arb_tree() -> impl Strategy<Value = Tree> {
        let leaf = Just(Tree::leaf());
        leaf.prop_recursive(4, 24, 4, |inner| prop::collection::vec(inner, 0..4).prop_map(Tree::new))
    }

    proptest! {
        #[test]
        fn table_round_trip(x in arb_tree()) {
            let tb = x.table();
            prop_assert_eq!(Tree::from_table(&tb).unwrap(), x.clone());
            let text = tb.to_string();
            prop_assert_eq!(text.parse::<Table>().unwrap(), tb);
        }

        #[test]
        fn linearization_size(x in arb_tree()) {
            let lin = x.linearization();
            prop_assert_eq!(lin.len(), 2 * x.node_count() - 1);
            for ins in &lin {
                prop_assert_eq!(ins.tree.node_count(), x.node_count() + 1);
            }
        }

        #[test]
        fn decompose_reassemble(x in arb_tree()) {
            prop_assert_eq!(Tree::reassemble(&x.decompose()), x.clone());
            prop_assert_eq!(x.suspend().dim(), x.dim() + 1);
        }

        #[test]
        fn print_parse(x in arb_tree()) {
            prop_assert_eq!(x.to_string().parse::<Tree>().unwrap(), x);
        }
    }
}

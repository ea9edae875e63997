//! Presentations of globular theories as towers of freely added
//! operations over Θ₀, with a normal-form term calculus and evaluation
//! into Θ.

pub mod expr;
pub mod library;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::theta::{self, ThetaError, ThetaMap};
use crate::tree::{CellKey, Tree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Groupoidal,
    Categorical,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Groupoidal => "groupoidal",
            Kind::Categorical => "categorical",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TheoryError {
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("symbol {0} is already defined")]
    Duplicate(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("pair for {name} is not admissible: {predicate}")]
    Inadmissible { name: String, predicate: String },
    #[error("boundary of {0} is not parallel")]
    NotParallel(String),
    #[error("symbol {0} has no image in Θ")]
    NoThetaImage(String),
    #[error("equation {0} does not hold in Θ")]
    EquationFails(String),
    #[error("missing chosen systems: {0}")]
    MissingSystems(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Theta(#[from] ThetaError),
}

type Res<T> = Result<T, TheoryError>;

/// How a symbol entered the presentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Filler,
    Point,
    Equation,
    Inverse,
}

/// A basic operation `D_k → arity`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperationSymbol {
    pub name: String,
    pub arity: Tree,
    pub dim: usize,
    pub boundary: Option<(Op, Op)>,
    pub theta_image: Option<ThetaMap>,
    pub stage: usize,
    pub origin: Origin,
}

impl OperationSymbol {
    pub fn is_equation(&self) -> bool {
        self.origin == Origin::Equation
    }
}

/// A cell-valued operation over a tree: either a cell of the tree, or a
/// symbol applied to one operation per leaf of its arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Glob(CellKey),
    App { sym: String, args: Vec<Op> },
}

impl Op {
    pub fn app(sym: &str, args: Vec<Op>) -> Op {
        Op::App { sym: sym.to_string(), args }
    }

    pub fn size(&self) -> usize {
        match self {
            Op::Glob(_) => 1,
            Op::App { args, .. } => 1 + args.iter().map(Op::size).sum::<usize>(),
        }
    }

    pub fn symbols(&self, out: &mut Vec<String>) {
        if let Op::App { sym, args } = self {
            out.push(sym.clone());
            for a in args {
                a.symbols(out);
            }
        }
    }
}

/// A morphism `source → target` of the presented theory: one operation
/// per leaf of `source`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub source: Tree,
    pub target: Tree,
    pub entries: Vec<Op>,
}

/// Spec of a symbol to add.
#[derive(Clone, Debug)]
pub struct SymbolSpec {
    pub name: String,
    pub arity: Tree,
    pub boundary: Option<(Op, Op)>,
}

impl SymbolSpec {
    pub fn new(name: &str, arity: Tree, src: Op, tgt: Op) -> SymbolSpec {
        SymbolSpec { name: name.to_string(), arity, boundary: Some((src, tgt)) }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Rule {
    arity: Tree,
    lhs: Op,
    rhs: Op,
    dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Theory {
    pub n: usize,
    pub kind: Kind,
    symbols: Vec<OperationSymbol>,
    index: HashMap<String, usize>,
    pub stages: Vec<Vec<String>>,
    pub systems: BTreeMap<String, Vec<String>>,
    rules: Vec<Rule>,
    pub notes: Vec<String>,
}

/// Leaf reaching a cell of `a` through faces, and the face steps
/// (`true` = target) from the leaf cell down to the cell.
pub fn locate(a: &Tree, c: &CellKey) -> Option<(usize, Vec<bool>)> {
    let mut path = c.path.clone();
    let mut node = a.node(&path)?;
    if c.gap > node.arity() {
        return None;
    }
    let mut steps = Vec::new();
    let mut gap = c.gap;
    while !node.is_leaf() {
        if gap < node.arity() {
            steps.push(false);
            path.push(gap);
        } else {
            steps.push(true);
            path.push(gap - 1);
        }
        node = a.node(&path)?;
        gap = 0;
    }
    steps.reverse();
    let idx = a.leaf_paths().iter().position(|p| *p == path)?;
    Some((idx, steps))
}

pub fn leaf_cell(a: &Tree, i: usize) -> CellKey {
    CellKey { path: a.leaf_paths()[i].clone(), gap: 0 }
}

/// Shared compatibility check for a tuple of cells indexed by the leaves
/// of `a`: dimensions match leaf heights and consecutive leaves agree on
/// their common face.
pub fn check_tuple<T: PartialEq + Clone>(
    a: &Tree,
    args: &[T],
    dim: &dyn Fn(&T) -> Res<usize>,
    face: &dyn Fn(&T, bool) -> Res<T>,
    show: &dyn Fn(&T) -> String,
) -> Res<()> {
    let table = a.table();
    if args.len() != table.tops.len() {
        return Err(TheoryError::Type(format!("{} arguments for arity {a} with {} leaves", args.len(), table.tops.len())));
    }
    for (i, x) in args.iter().enumerate() {
        let d = dim(x)?;
        if d != table.tops[i] {
            return Err(TheoryError::Type(format!("argument {i} of arity {a} has dimension {d}, expected {}", table.tops[i])));
        }
    }
    for i in 0..table.joins.len() {
        let j = table.joins[i];
        let mut x = args[i].clone();
        for _ in j..table.tops[i] {
            x = face(&x, true)?;
        }
        let mut y = args[i + 1].clone();
        for _ in j..table.tops[i + 1] {
            y = face(&y, false)?;
        }
        if x != y {
            return Err(TheoryError::Type(format!(
                "arguments {i} and {} of arity {a} disagree in dimension {j}: {} vs {}",
                i + 1,
                show(&x),
                show(&y)
            )));
        }
    }
    Ok(())
}

impl Theory {
    /// The empty tower over Θ₀ truncated at `n`.
    pub fn base(n: usize, kind: Kind) -> Theory {
        Theory {
            n,
            kind,
            symbols: Vec::new(),
            index: HashMap::new(),
            stages: vec![Vec::new()],
            systems: BTreeMap::new(),
            rules: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn symbols(&self) -> &[OperationSymbol] {
        &self.symbols
    }

    pub fn symbol(&self, name: &str) -> Res<&OperationSymbol> {
        self.index.get(name).map(|&i| &self.symbols[i]).ok_or_else(|| TheoryError::UnknownSymbol(name.to_string()))
    }

    pub fn has(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn op_dim(&self, op: &Op) -> Res<usize> {
        match op {
            Op::Glob(c) => Ok(c.dim()),
            Op::App { sym, .. } => Ok(self.symbol(sym)?.dim),
        }
    }

    /// Source (`target == false`) or target of an operation.
    pub fn face(&self, op: &Op, target: bool) -> Res<Op> {
        match op {
            Op::Glob(c) => {
                let t = Tree::leaf();
                let (s, tt) = t
                    .cell_faces(c)
                    .ok_or_else(|| TheoryError::Type("a 0-cell has no faces".into()))?;
                Ok(Op::Glob(if target { tt } else { s }))
            }
            Op::App { sym, args } => {
                let s = self.symbol(sym)?;
                let (b0, b1) = s
                    .boundary
                    .as_ref()
                    .ok_or_else(|| TheoryError::Type(format!("{sym} has dimension 0")))?;
                self.subst(if target { b1 } else { b0 }, &s.arity, args)
            }
        }
    }

    fn cell_of_args(&self, a: &Tree, args: &[Op], c: &CellKey) -> Res<Op> {
        let (i, steps) = locate(a, c).ok_or_else(|| TheoryError::Type(format!("{c:?} is not a cell of {a}")))?;
        let mut x = args.get(i).cloned().ok_or_else(|| TheoryError::Type("missing argument".into()))?;
        for t in steps {
            x = self.face(&x, t)?;
        }
        Ok(x)
    }

    fn subst_raw(&self, e: &Op, a: &Tree, args: &[Op]) -> Res<Op> {
        match e {
            Op::Glob(c) => self.cell_of_args(a, args, c),
            Op::App { sym, args: sub } => Ok(Op::App {
                sym: sym.clone(),
                args: sub.iter().map(|x| self.subst_raw(x, a, args)).collect::<Res<_>>()?,
            }),
        }
    }

    /// `e` over `a`, with the leaves of `a` replaced by `args`.
    pub fn subst(&self, e: &Op, a: &Tree, args: &[Op]) -> Res<Op> {
        let r = self.subst_raw(e, a, args)?;
        self.normalize(&r)
    }

    pub fn normalize(&self, op: &Op) -> Res<Op> {
        match op {
            Op::Glob(_) => Ok(op.clone()),
            Op::App { sym, args } => {
                let args = args.iter().map(|x| self.normalize(x)).collect::<Res<Vec<_>>>()?;
                let cand = Op::App { sym: sym.clone(), args };
                let d = self.op_dim(&cand)?;
                for r in self.rules.iter().filter(|r| r.dim == d) {
                    if let Some(out) = self.try_rule(r, &cand)? {
                        return self.normalize(&out);
                    }
                }
                Ok(cand)
            }
        }
    }

    fn try_rule(&self, r: &Rule, op: &Op) -> Res<Option<Op>> {
        fn matches(p: &Op, o: &Op, bind: &mut HashMap<CellKey, Op>) -> bool {
            match (p, o) {
                (Op::Glob(c), _) => match bind.get(c) {
                    Some(b) => b == o,
                    None => {
                        bind.insert(c.clone(), o.clone());
                        true
                    }
                },
                (Op::App { sym: a, args: xs }, Op::App { sym: b, args: ys }) => {
                    a == b && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| matches(x, y, bind))
                }
                _ => false,
            }
        }
        let mut bind = HashMap::new();
        if !matches(&r.lhs, op, &mut bind) {
            return Ok(None);
        }
        let mut args = Vec::new();
        for i in 0..r.arity.leaf_count() {
            match bind.get(&leaf_cell(&r.arity, i)) {
                Some(x) => args.push(x.clone()),
                None => return Ok(None),
            }
        }
        if self.check_args(&r.arity, &args).is_err() || self.subst_raw(&r.lhs, &r.arity, &args)? != *op {
            return Ok(None);
        }
        Ok(Some(self.subst_raw(&r.rhs, &r.arity, &args)?))
    }

    pub fn check_args(&self, a: &Tree, args: &[Op]) -> Res<()> {
        check_tuple(a, args, &|x| self.op_dim(x), &|x, t| self.face(x, t), &|x| format!("{x:?}"))
    }

    /// Well-typedness of an operation over `target`.
    pub fn check_op(&self, target: &Tree, op: &Op) -> Res<()> {
        match op {
            Op::Glob(c) => {
                if target.cells().get(c.dim()).map_or(false, |cs| cs.contains(c)) {
                    Ok(())
                } else {
                    Err(TheoryError::Type(format!("{c:?} is not a cell of {target}")))
                }
            }
            Op::App { sym, args } => {
                let s = self.symbol(sym)?;
                if s.is_equation() {
                    return Err(TheoryError::Type(format!("{sym} is an equation")));
                }
                for a in args {
                    self.check_op(target, a)?;
                }
                self.check_args(&s.arity, args)
            }
        }
    }

    pub fn check_term(&self, t: &Term) -> Res<()> {
        for e in &t.entries {
            self.check_op(&t.target, e)?;
        }
        self.check_args(&t.source, &t.entries)
    }

    pub fn identity_term(a: &Tree) -> Term {
        Term {
            source: a.clone(),
            target: a.clone(),
            entries: (0..a.leaf_count()).map(|i| Op::Glob(leaf_cell(a, i))).collect(),
        }
    }

    /// The term `D_k → arity` of a symbol.
    pub fn symbol_term(&self, name: &str) -> Res<Term> {
        let s = self.symbol(name)?;
        let id = Theory::identity_term(&s.arity);
        Ok(Term { source: Tree::globe(s.dim), target: s.arity.clone(), entries: vec![Op::app(name, id.entries)] })
    }

    /// A globular Θ-map as a term.
    pub fn globular_term(&self, f: &ThetaMap) -> Res<Term> {
        let mut entries = Vec::new();
        for p in f.source.leaf_paths() {
            let c = theta::globular_cell_map(f, &CellKey { path: p, gap: 0 }).ok_or(ThetaError::NotGlobular)?;
            entries.push(Op::Glob(c));
        }
        Ok(Term { source: f.source.clone(), target: f.target.clone(), entries })
    }

    /// `u ∘ t`: first `t`, then `u`.
    pub fn substitute(&self, t: &Term, u: &Term) -> Res<Term> {
        if t.target != u.source {
            return Err(TheoryError::Type(format!("cannot compose {} -> {} with {} -> {}", t.source, t.target, u.source, u.target)));
        }
        Ok(Term {
            source: t.source.clone(),
            target: u.target.clone(),
            entries: t.entries.iter().map(|e| self.subst(e, &u.source, &u.entries)).collect::<Res<_>>()?,
        })
    }

    pub fn term_face(&self, t: &Term, target: bool) -> Res<Term> {
        if !t.source.is_globe() || t.source.dim() == 0 {
            return Err(TheoryError::Type("faces are defined for terms out of D_k, k > 0".into()));
        }
        Ok(Term {
            source: Tree::globe(t.source.dim() - 1),
            target: t.target.clone(),
            entries: vec![self.face(&t.entries[0], target)?],
        })
    }

    pub fn src(&self, t: &Term) -> Res<Term> {
        self.term_face(t, false)
    }

    pub fn tgt(&self, t: &Term) -> Res<Term> {
        self.term_face(t, true)
    }

    pub fn eval_op(&self, target: &Tree, op: &Op) -> Res<ThetaMap> {
        match op {
            Op::Glob(c) => Ok(theta::cell_inclusion(target, c)),
            Op::App { sym, args } => {
                let s = self.symbol(sym)?;
                let img = s.theta_image.as_ref().ok_or_else(|| TheoryError::NoThetaImage(sym.clone()))?;
                let legs = args.iter().map(|a| self.eval_op(target, a)).collect::<Res<Vec<_>>>()?;
                let m = theta::copair(&s.arity, &legs)?;
                Ok(theta::compose(img, &m)?)
            }
        }
    }

    pub fn eval_theta(&self, t: &Term) -> Res<ThetaMap> {
        let legs = t.entries.iter().map(|e| self.eval_op(&t.target, e)).collect::<Res<Vec<_>>>()?;
        Ok(theta::copair(&t.source, &legs)?)
    }

    fn admissible(&self, f: &ThetaMap, g: &ThetaMap) -> Res<(bool, &'static str)> {
        Ok(match self.kind {
            Kind::Groupoidal => (theta::is_admissible_groupoidal(f, g)?, "groupoidal: parallel with dim(A) ≤ k+1"),
            Kind::Categorical => (
                theta::is_admissible_categorical(f, g)?,
                "categorical: parallel and homogeneous, or boundary-factored through homogeneous maps",
            ),
        })
    }

    /// Appends a stage of freely added operations.
    pub fn extend(&mut self, batch: Vec<SymbolSpec>) -> Res<()> {
        let stage = self.stages.len();
        let mut prepared = Vec::new();
        for spec in &batch {
            if self.has(&spec.name) || batch.iter().filter(|b| b.name == spec.name).count() > 1 {
                return Err(TheoryError::Duplicate(spec.name.clone()));
            }
            prepared.push(self.prepare(spec, stage)?);
        }
        let mut names = Vec::new();
        for (sym, rule) in prepared {
            names.push(sym.name.clone());
            self.insert(sym);
            if let Some(r) = rule {
                self.rules.push(r);
            }
        }
        self.stages.push(names);
        Ok(())
    }

    /// Adds one filler symbol to the stage of its own dimension.
    pub fn adjoin(&mut self, spec: SymbolSpec) -> Res<()> {
        if self.has(&spec.name) {
            return Err(TheoryError::Duplicate(spec.name));
        }
        let (mut sym, rule) = self.prepare(&spec, 0)?;
        let k = sym.dim;
        sym.stage = k;
        while self.stages.len() <= k {
            self.stages.push(Vec::new());
        }
        self.stages[k].push(sym.name.clone());
        self.insert(sym);
        if let Some(r) = rule {
            self.rules.push(r);
        }
        Ok(())
    }

    fn insert(&mut self, sym: OperationSymbol) {
        self.index.insert(sym.name.clone(), self.symbols.len());
        self.symbols.push(sym);
    }

    fn prepare(&mut self, spec: &SymbolSpec, stage: usize) -> Res<(OperationSymbol, Option<Rule>)> {
        let a = &spec.arity;
        let Some((b0, b1)) = &spec.boundary else {
            let img = theta::hom(&Tree::leaf(), a)?.into_iter().next().ok_or(ThetaError::NoFiller)?;
            return Ok((
                OperationSymbol {
                    name: spec.name.clone(),
                    arity: a.clone(),
                    dim: 0,
                    boundary: None,
                    theta_image: Some(img),
                    stage,
                    origin: Origin::Point,
                },
                None,
            ));
        };
        self.check_op(a, b0)?;
        self.check_op(a, b1)?;
        let (b0, b1) = (self.normalize(b0)?, self.normalize(b1)?);
        let d = self.op_dim(&b0)?;
        if self.op_dim(&b1)? != d {
            return Err(TheoryError::NotParallel(spec.name.clone()));
        }
        if d > 0 && (self.face(&b0, false)? != self.face(&b1, false)? || self.face(&b0, true)? != self.face(&b1, true)?) {
            return Err(TheoryError::NotParallel(spec.name.clone()));
        }
        let f = self.eval_op(a, &b0)?;
        let g = self.eval_op(a, &b1)?;
        let (ok, pred) = self.admissible(&f, &g)?;
        if !ok {
            return Err(TheoryError::Inadmissible { name: spec.name.clone(), predicate: pred.to_string() });
        }
        let k = d + 1;
        if k == self.n + 1 {
            if f != g {
                return Err(TheoryError::EquationFails(spec.name.clone()));
            }
            let (lhs, rhs) = if b1.size() > b0.size() { (b1.clone(), b0.clone()) } else { (b0.clone(), b1.clone()) };
            let rule = (lhs != rhs).then(|| Rule { arity: a.clone(), lhs, rhs, dim: d });
            return Ok((
                OperationSymbol {
                    name: spec.name.clone(),
                    arity: a.clone(),
                    dim: k,
                    boundary: Some((b0, b1)),
                    theta_image: None,
                    stage,
                    origin: Origin::Equation,
                },
                rule,
            ));
        }
        if k > self.n + 1 {
            return Err(TheoryError::Type(format!("{} has dimension {k} above n+1", spec.name)));
        }
        let img = match theta::filler(&f, &g) {
            Ok(h) => Some(h),
            Err(ThetaError::NoFiller) => {
                self.notes.push(format!("{}: admissible pair without a filler in Θ", spec.name));
                None
            }
            Err(e) => return Err(e.into()),
        };
        Ok((
            OperationSymbol {
                name: spec.name.clone(),
                arity: a.clone(),
                dim: k,
                boundary: Some((b0, b1)),
                theta_image: img,
                stage,
                origin: Origin::Filler,
            },
            None,
        ))
    }

    /// Adds symbols that do not come from fillers in Θ (free inverses).
    pub(crate) fn add_free(&mut self, name: &str, arity: Tree, boundary: (Op, Op), equation: bool) -> Res<()> {
        if self.has(name) {
            return Ok(());
        }
        let d = self.op_dim(&boundary.0)?;
        self.check_op(&arity, &boundary.0)?;
        self.check_op(&arity, &boundary.1)?;
        let k = d + 1;
        while self.stages.len() <= k {
            self.stages.push(Vec::new());
        }
        self.stages[k].push(name.to_string());
        if equation {
            let (b0, b1) = &boundary;
            let (lhs, rhs) = if b1.size() > b0.size() { (b1.clone(), b0.clone()) } else { (b0.clone(), b1.clone()) };
            self.rules.push(Rule { arity: arity.clone(), lhs, rhs, dim: d });
        }
        self.insert(OperationSymbol {
            name: name.to_string(),
            arity,
            dim: k,
            boundary: Some(boundary),
            theta_image: None,
            stage: k,
            origin: if equation { Origin::Equation } else { Origin::Inverse },
        });
        Ok(())
    }

    /// Re-checks every filler symbol: admissible boundary and a genuine
    /// filler image.
    pub fn audit(&self) -> Vec<(String, Res<()>)> {
        let mut out = Vec::new();
        for s in &self.symbols {
            let r = (|| -> Res<()> {
                let Some((b0, b1)) = &s.boundary else { return Ok(()) };
                self.check_op(&s.arity, b0)?;
                self.check_op(&s.arity, b1)?;
                if s.origin == Origin::Inverse {
                    if self.op_dim(b0)? > 0
                        && (self.face(b0, false)? != self.face(b1, false)? || self.face(b0, true)? != self.face(b1, true)?)
                    {
                        return Err(TheoryError::NotParallel(s.name.clone()));
                    }
                    return Ok(());
                }
                let f = self.eval_op(&s.arity, b0)?;
                let g = self.eval_op(&s.arity, b1)?;
                let (ok, pred) = self.admissible(&f, &g)?;
                if !ok {
                    return Err(TheoryError::Inadmissible { name: s.name.clone(), predicate: pred.to_string() });
                }
                if let Some(h) = &s.theta_image {
                    let d = s.dim - 1;
                    if theta::compose(&theta::globe_face(d, false), h)? != f
                        || theta::compose(&theta::globe_face(d, true), h)? != g
                    {
                        return Err(TheoryError::Type(format!("{}: image is not a filler", s.name)));
                    }
                } else if s.is_equation() && f != g {
                    return Err(TheoryError::EquationFails(s.name.clone()));
                }
                Ok(())
            })();
            out.push((s.name.clone(), r));
        }
        out
    }

    pub fn counts_by_stage(&self) -> Vec<usize> {
        self.stages.iter().map(Vec::len).collect()
    }

    pub fn to_json(&self) -> Value {
        let stages: Vec<Value> = self
            .stages
            .iter()
            .map(|names| {
                Value::Array(
                    names
                        .iter()
                        .map(|n| {
                            let s = self.symbol(n).unwrap();
                            let (src, tgt) = match &s.boundary {
                                Some((a, b)) => (json!(fmt_op(a, &s.arity)), json!(fmt_op(b, &s.arity))),
                                None => (Value::Null, Value::Null),
                            };
                            json!({
                                "name": s.name,
                                "arity": s.arity.to_string(),
                                "dim": s.dim,
                                "src": src,
                                "tgt": tgt,
                                "origin": format!("{:?}", s.origin).to_lowercase(),
                                "theta_image": s.theta_image.as_ref().map(|m| m.to_json()),
                            })
                        })
                        .collect(),
                )
            })
            .collect();
        json!({ "n": self.n, "kind": self.kind.to_string(), "stages": stages, "systems": self.systems })
    }

    /// Builds a theory from a JSON spec:
    /// `{"n": 3, "kind": "categorical", "standard": true, "batches": [[{"name", "arity", "src", "tgt"}]]}`.
    pub fn from_spec(v: &Value) -> Res<Theory> {
        let n = v.get("n").and_then(Value::as_u64).unwrap_or(3) as usize;
        let kind = match v.get("kind").and_then(Value::as_str).unwrap_or("categorical") {
            "groupoidal" => Kind::Groupoidal,
            "categorical" => Kind::Categorical,
            k => return Err(TheoryError::Parse(format!("unknown kind {k}"))),
        };
        let mut th = if v.get("standard").and_then(Value::as_bool).unwrap_or(false) {
            library::standard_library(n, kind)?
        } else {
            Theory::base(n, kind)
        };
        let batches = v.get("batches").and_then(Value::as_array).cloned().unwrap_or_default();
        for b in batches {
            let items = b.as_array().ok_or_else(|| TheoryError::Parse("batch must be an array".into()))?;
            let mut specs = Vec::new();
            for it in items {
                let get = |k: &str| it.get(k).and_then(Value::as_str);
                let name = get("name").ok_or_else(|| TheoryError::Parse("symbol without name".into()))?;
                let arity = Tree::parse_any(get("arity").ok_or_else(|| TheoryError::Parse(format!("{name}: no arity")))?)
                    .map_err(|e| TheoryError::Parse(e.to_string()))?;
                let boundary = match (get("src"), get("tgt")) {
                    (Some(s), Some(t)) => Some((parse_op(s, &arity)?, parse_op(t, &arity)?)),
                    (None, None) => None,
                    _ => return Err(TheoryError::Parse(format!("{name}: give both src and tgt"))),
                };
                specs.push(SymbolSpec { name: name.to_string(), arity, boundary });
            }
            th.extend(specs)?;
        }
        Ok(th)
    }
}

/// Prints an operation over `a`, with cells written `$dim.index`.
pub fn fmt_op(op: &Op, a: &Tree) -> String {
    match op {
        Op::Glob(c) => {
            let cells = a.cells();
            match cells.get(c.dim()).and_then(|v| v.iter().position(|x| x == c)) {
                Some(i) => format!("${}.{}", c.dim(), i),
                None => format!("${c:?}"),
            }
        }
        Op::App { sym, args } => {
            format!("{sym}({})", args.iter().map(|x| fmt_op(x, a)).collect::<Vec<_>>().join(", "))
        }
    }
}

pub fn parse_op(s: &str, a: &Tree) -> Res<Op> {
    let cells = a.cells();
    let b = s.as_bytes();
    let mut pos = 0;
    fn ws(b: &[u8], pos: &mut usize) {
        while *pos < b.len() && b[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    }
    fn num(b: &[u8], pos: &mut usize) -> Res<usize> {
        let st = *pos;
        while *pos < b.len() && b[*pos].is_ascii_digit() {
            *pos += 1;
        }
        std::str::from_utf8(&b[st..*pos])
            .unwrap()
            .parse()
            .map_err(|_| TheoryError::Parse(format!("expected a number at offset {st}")))
    }
    fn go(b: &[u8], pos: &mut usize, cells: &[Vec<CellKey>]) -> Res<Op> {
        ws(b, pos);
        if b.get(*pos) == Some(&b'$') {
            *pos += 1;
            let d = num(b, pos)?;
            if b.get(*pos) != Some(&b'.') {
                return Err(TheoryError::Parse(format!("expected '.' at offset {}", *pos)));
            }
            *pos += 1;
            let i = num(b, pos)?;
            return cells
                .get(d)
                .and_then(|v| v.get(i))
                .cloned()
                .map(Op::Glob)
                .ok_or_else(|| TheoryError::Parse(format!("no cell ${d}.{i}")));
        }
        let st = *pos;
        while *pos < b.len() && (b[*pos].is_ascii_alphanumeric() || b[*pos] == b'_') {
            *pos += 1;
        }
        if st == *pos {
            return Err(TheoryError::Parse(format!("expected a cell or a symbol at offset {st}")));
        }
        let name = std::str::from_utf8(&b[st..*pos]).unwrap().to_string();
        ws(b, pos);
        if b.get(*pos) != Some(&b'(') {
            return Err(TheoryError::Parse(format!("expected '(' at offset {}", *pos)));
        }
        *pos += 1;
        let mut args = Vec::new();
        loop {
            ws(b, pos);
            if b.get(*pos) == Some(&b')') {
                *pos += 1;
                break;
            }
            args.push(go(b, pos, cells)?);
            ws(b, pos);
            match b.get(*pos) {
                Some(b',') => *pos += 1,
                Some(b')') => {
                    *pos += 1;
                    break;
                }
                _ => return Err(TheoryError::Parse(format!("expected ',' or ')' at offset {}", *pos))),
            }
        }
        Ok(Op::App { sym: name, args })
    }
    let op = go(b, &mut pos, &cells)?;
    ws(b, &mut pos);
    if pos != b.len() {
        return Err(TheoryError::Parse(format!("trailing input at offset {pos}")));
    }
    Ok(op)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} : (", self.source, self.target)?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", fmt_op(e, &self.target))?;
        }
        write!(f, ")")
    }
}

//! Cells of free models on finite computads: generators, applied
//! symbols, applied Θ-maps and opaque chosen fillers.

use std::collections::HashMap;
use std::fmt;

use super::{check_tuple, locate, Op, Res, Theory, TheoryError};
use crate::theta::{self, ThetaMap};
use crate::tree::{CellKey, Tree};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Gen(String),
    Sym { sym: String, args: Vec<Expr> },
    /// A Θ-map `D_k → A` applied to an `A`-shaped diagram.
    Theta { map: ThetaMap, args: Vec<Expr> },
    /// A chosen cell with a recorded boundary.
    Opaque { label: String, dim: usize, src: Box<Expr>, tgt: Box<Expr> },
}

impl Expr {
    pub fn gen(name: &str) -> Expr {
        Expr::Gen(name.to_string())
    }

    pub fn size(&self) -> usize {
        match self {
            Expr::Gen(_) => 1,
            Expr::Sym { args, .. } | Expr::Theta { args, .. } => 1 + args.iter().map(Expr::size).sum::<usize>(),
            Expr::Opaque { .. } => 1,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, args: &[Expr]| -> fmt::Result {
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{a}")?;
            }
            Ok(())
        };
        match self {
            Expr::Gen(n) => write!(f, "{n}"),
            Expr::Sym { sym, args } => {
                write!(f, "{sym}(")?;
                list(f, args)?;
                write!(f, ")")
            }
            Expr::Theta { map, args } => {
                write!(f, "<{}>(", map.data)?;
                list(f, args)?;
                write!(f, ")")
            }
            Expr::Opaque { label, .. } => write!(f, "{label}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub name: String,
    pub dim: usize,
    pub faces: Option<(Expr, Expr)>,
}

/// A finite computad: generators added in order, each with a boundary
/// made of earlier material.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Computad {
    gens: Vec<Generator>,
    index: HashMap<String, usize>,
}

impl Computad {
    pub fn new() -> Computad {
        Computad::default()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn get(&self, name: &str) -> Option<&Generator> {
        self.index.get(name).map(|&i| &self.gens[i])
    }

    /// Number of generators per dimension.
    pub fn counts(&self) -> Vec<usize> {
        let d = self.gens.iter().map(|g| g.dim + 1).max().unwrap_or(0);
        let mut c = vec![0; d];
        for g in &self.gens {
            c[g.dim] += 1;
        }
        c
    }

    fn push(&mut self, g: Generator) -> Res<Expr> {
        if self.index.contains_key(&g.name) {
            return Err(TheoryError::Duplicate(g.name));
        }
        let e = Expr::Gen(g.name.clone());
        self.index.insert(g.name.clone(), self.gens.len());
        self.gens.push(g);
        Ok(e)
    }

    /// Adds a generator as given; callers re-check with [`Ctx::check`].
    pub fn add_generator(&mut self, g: Generator) -> Res<Expr> {
        self.push(g)
    }

    pub fn add_point(&mut self, name: &str) -> Res<Expr> {
        self.push(Generator { name: name.to_string(), dim: 0, faces: None })
    }

    /// Adds a generator `src → tgt`, checking the pair is parallel.
    pub fn add_cell(&mut self, th: &Theory, name: &str, src: Expr, tgt: Expr) -> Res<Expr> {
        let cx = Ctx { th, cx: self };
        let d = cx.dim(&src)?;
        cx.check(&src)?;
        cx.check(&tgt)?;
        cx.parallel(&src, &tgt).map_err(|e| TheoryError::Type(format!("generator {name}: {e}")))?;
        self.push(Generator { name: name.to_string(), dim: d + 1, faces: Some((src, tgt)) })
    }

    /// Identifies generator names, used for quotients of presentations.
    pub fn rename(&self, f: &dyn Fn(&str) -> String) -> Computad {
        let mut out = Computad::new();
        for g in &self.gens {
            let name = f(&g.name);
            if out.index.contains_key(&name) {
                continue;
            }
            let faces = g.faces.as_ref().map(|(a, b)| (rename_expr(a, f), rename_expr(b, f)));
            out.push(Generator { name, dim: g.dim, faces }).unwrap();
        }
        out
    }
}

pub fn rename_expr(e: &Expr, f: &dyn Fn(&str) -> String) -> Expr {
    match e {
        Expr::Gen(n) => Expr::Gen(f(n)),
        Expr::Sym { sym, args } => Expr::Sym { sym: sym.clone(), args: args.iter().map(|a| rename_expr(a, f)).collect() },
        Expr::Theta { map, args } => Expr::Theta { map: map.clone(), args: args.iter().map(|a| rename_expr(a, f)).collect() },
        Expr::Opaque { label, dim, src, tgt } => Expr::Opaque {
            label: label.clone(),
            dim: *dim,
            src: Box::new(rename_expr(src, f)),
            tgt: Box::new(rename_expr(tgt, f)),
        },
    }
}

/// Typing context: a theory for symbols and a computad for generators.
#[derive(Clone, Copy)]
pub struct Ctx<'a> {
    pub th: &'a Theory,
    pub cx: &'a Computad,
}

impl<'a> Ctx<'a> {
    pub fn new(th: &'a Theory, cx: &'a Computad) -> Ctx<'a> {
        Ctx { th, cx }
    }

    pub fn dim(&self, e: &Expr) -> Res<usize> {
        match e {
            Expr::Gen(n) => self.cx.get(n).map(|g| g.dim).ok_or_else(|| TheoryError::UnknownSymbol(n.clone())),
            Expr::Sym { sym, .. } => Ok(self.th.symbol(sym)?.dim),
            Expr::Theta { map, .. } => Ok(map.source.dim()),
            Expr::Opaque { dim, .. } => Ok(*dim),
        }
    }

    pub fn face(&self, e: &Expr, target: bool) -> Res<Expr> {
        let pick = |p: &(Expr, Expr)| if target { p.1.clone() } else { p.0.clone() };
        match e {
            Expr::Gen(n) => {
                let g = self.cx.get(n).ok_or_else(|| TheoryError::UnknownSymbol(n.clone()))?;
                g.faces.as_ref().map(pick).ok_or_else(|| TheoryError::Type(format!("{n} is a point")))
            }
            Expr::Sym { sym, args } => {
                let s = self.th.symbol(sym)?;
                let b = s.boundary.as_ref().ok_or_else(|| TheoryError::Type(format!("{sym} has dimension 0")))?;
                self.apply_op(if target { &b.1 } else { &b.0 }, &s.arity, args)
            }
            Expr::Theta { map, args } => {
                let k = map.source.dim();
                if k == 0 {
                    return Err(TheoryError::Type("a 0-cell has no faces".into()));
                }
                let m = theta::compose(&theta::globe_face(k - 1, target), map)?;
                self.theta(m, args.clone())
            }
            Expr::Opaque { src, tgt, .. } => Ok(if target { (**tgt).clone() } else { (**src).clone() }),
        }
    }

    pub fn src(&self, e: &Expr) -> Res<Expr> {
        self.face(e, false)
    }

    pub fn tgt(&self, e: &Expr) -> Res<Expr> {
        self.face(e, true)
    }

    /// Iterated face down to dimension `j`.
    pub fn face_to(&self, e: &Expr, j: usize, target: bool) -> Res<Expr> {
        let mut x = e.clone();
        while self.dim(&x)? > j {
            x = self.face(&x, target)?;
        }
        Ok(x)
    }

    pub fn parallel(&self, a: &Expr, b: &Expr) -> Res<()> {
        let (da, db) = (self.dim(a)?, self.dim(b)?);
        if da != db {
            return Err(TheoryError::Type(format!("dimensions {da} and {db} differ: {a} vs {b}")));
        }
        if da > 0 {
            for t in [false, true] {
                let (x, y) = (self.face(a, t)?, self.face(b, t)?);
                if x != y {
                    return Err(TheoryError::Type(format!(
                        "{} differ: {x} vs {y}",
                        if t { "targets" } else { "sources" }
                    )));
                }
            }
        }
        Ok(())
    }

    /// Cell of an `a`-shaped diagram at a cell of `a`.
    pub fn cell_of(&self, a: &Tree, args: &[Expr], c: &CellKey) -> Res<Expr> {
        let (i, steps) = locate(a, c).ok_or_else(|| TheoryError::Type(format!("{c:?} is not a cell of {a}")))?;
        let mut x = args.get(i).cloned().ok_or_else(|| TheoryError::Type("missing argument".into()))?;
        for t in steps {
            x = self.face(&x, t)?;
        }
        Ok(x)
    }

    /// Substitutes a diagram into an operation over `a`.
    pub fn apply_op(&self, op: &Op, a: &Tree, args: &[Expr]) -> Res<Expr> {
        match op {
            Op::Glob(c) => self.cell_of(a, args, c),
            Op::App { sym, args: sub } => Ok(Expr::Sym {
                sym: sym.clone(),
                args: sub.iter().map(|x| self.apply_op(x, a, args)).collect::<Res<_>>()?,
            }),
        }
    }

    pub fn check_args(&self, a: &Tree, args: &[Expr]) -> Res<()> {
        check_tuple(a, args, &|x| self.dim(x), &|x, t| self.face(x, t), &|x| x.to_string())
    }

    pub fn check(&self, e: &Expr) -> Res<()> {
        match e {
            Expr::Gen(n) => self.cx.get(n).map(|_| ()).ok_or_else(|| TheoryError::UnknownSymbol(n.clone())),
            Expr::Sym { sym, args } => {
                let s = self.th.symbol(sym)?;
                if s.is_equation() {
                    return Err(TheoryError::Type(format!("{sym} is an equation")));
                }
                for a in args {
                    self.check(a)?;
                }
                self.check_args(&s.arity, args)
            }
            Expr::Theta { map, args } => {
                for a in args {
                    self.check(a)?;
                }
                self.check_args(&map.target, args)
            }
            Expr::Opaque { dim, src, tgt, .. } => {
                self.check(src)?;
                self.check(tgt)?;
                if self.dim(src)? + 1 != *dim {
                    return Err(TheoryError::Type("opaque cell has a boundary of the wrong dimension".into()));
                }
                self.parallel(src, tgt)
            }
        }
    }

    /// Applied symbol, type-checked.
    pub fn sym(&self, name: &str, args: Vec<Expr>) -> Res<Expr> {
        let s = self.th.symbol(name)?;
        self.check_args(&s.arity, &args).map_err(|e| TheoryError::Type(format!("{name}: {e}")))?;
        Ok(Expr::Sym { sym: name.to_string(), args })
    }

    /// Applied Θ-map in normal form: globular parts are absorbed into the
    /// arguments and only the homogeneous part is kept.
    pub fn theta(&self, map: ThetaMap, args: Vec<Expr>) -> Res<Expr> {
        let a = map.target.clone();
        if theta::is_globular(&map) {
            let top = CellKey { path: map.source.leaf_paths()[0].clone(), gap: 0 };
            let c = theta::globular_cell_map(&map, &top).ok_or(theta::ThetaError::NotGlobular)?;
            return self.cell_of(&a, &args, &c);
        }
        let hg = theta::hg_factorize(&map);
        if hg.globular == ThetaMap::identity(&a) {
            return Ok(Expr::Theta { map, args });
        }
        let b = hg.globular.source.clone();
        let mut sub = Vec::new();
        for p in b.leaf_paths() {
            let c = theta::globular_cell_map(&hg.globular, &CellKey { path: p, gap: 0 }).ok_or(theta::ThetaError::NotGlobular)?;
            sub.push(self.cell_of(&a, &args, &c)?);
        }
        self.theta(hg.homogeneous, sub)
    }

    pub fn opaque(&self, label: &str, src: Expr, tgt: Expr) -> Res<Expr> {
        self.parallel(&src, &tgt).map_err(|e| TheoryError::Type(format!("{label}: {e}")))?;
        let dim = self.dim(&src)? + 1;
        Ok(Expr::Opaque { label: label.to_string(), dim, src: Box::new(src), tgt: Box::new(tgt) })
    }
}

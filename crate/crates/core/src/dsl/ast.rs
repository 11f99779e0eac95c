use std::collections::BTreeSet;
use std::fmt;

use crate::optics::Arm;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl Span {
    pub const fn new(line: usize, column: usize) -> Self {
        Span { line, column }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    Sym(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Evaluate with `lookup` resolving free symbols; the first unresolved
    /// symbol is returned as the error.
    pub fn eval<F>(&self, lookup: &F) -> Result<f64, String>
    where
        F: Fn(&str) -> Option<f64>,
    {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Pi => std::f64::consts::PI,
            Expr::Sym(name) => lookup(name).ok_or_else(|| name.clone())?,
            Expr::Neg(e) => -e.eval(lookup)?,
            Expr::Bin(op, l, r) => {
                let (l, r) = (l.eval(lookup)?, r.eval(lookup)?);
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => l / r,
                }
            }
        })
    }

    /// Value when the expression has no free symbols.
    pub fn constant(&self) -> Option<f64> {
        self.eval(&|_| None).ok()
    }

    pub fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) | Expr::Pi => {}
            Expr::Sym(s) => {
                out.insert(s.clone());
            }
            Expr::Neg(e) => e.collect_symbols(out),
            Expr::Bin(_, l, r) => {
                l.collect_symbols(out);
                r.collect_symbols(out);
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Pi => f.write_str("pi"),
            Expr::Sym(s) => f.write_str(s),
            Expr::Neg(e) => write!(f, "-{e}"),
            Expr::Bin(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    /// Beam splitter with the given power reflectance.
    Bs(Expr),
    Phase(Arm, Expr),
    /// Identity scaled by an amplitude factor (1 when omitted).
    Mirror(Option<Expr>),
    /// Inlined copy of an earlier chain; `target` indexes
    /// [`CircuitAst::chains`].
    ChainRef {
        name: String,
        target: usize,
    },
}

#[derive(Debug, Clone)]
pub struct Element {
    pub kind: ElementKind,
    pub span: Span,
}

// Spans never take part in structural equality.
impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ElementKind::Bs(e) => write!(f, "bs({e})"),
            ElementKind::Phase(arm, e) => write!(f, "phase {} ({e})", arm.keyword()),
            ElementKind::Mirror(None) => f.write_str("mirror"),
            ElementKind::Mirror(Some(e)) => write!(f, "mirror({e})"),
            ElementKind::ChainRef { name, .. } => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Chain {
    pub name: String,
    pub name_span: Span,
    pub elements: Vec<Element>,
}

impl PartialEq for Chain {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.elements == other.elements
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chain {} : ", self.name)?;
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(" -> ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CircuitAst {
    pub chains: Vec<Chain>,
}

impl CircuitAst {
    /// Index of the visible (last) definition of `name`.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.chains.iter().rposition(|c| c.name == name)
    }

    pub fn chain(&self, name: &str) -> Option<&Chain> {
        self.index_of(name).map(|i| &self.chains[i])
    }

    /// The last chain in the file, conventionally the top-level circuit.
    pub fn root(&self) -> Option<&Chain> {
        self.chains.last()
    }

    /// Free symbols of chain `index`, including those of referenced chains.
    pub fn free_symbols(&self, index: usize) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(index, &mut out, 0);
        out
    }

    fn collect_symbols(&self, index: usize, out: &mut BTreeSet<String>, depth: usize) {
        if depth > self.chains.len() {
            return;
        }
        for e in &self.chains[index].elements {
            match &e.kind {
                ElementKind::Bs(x) | ElementKind::Phase(_, x) | ElementKind::Mirror(Some(x)) => {
                    x.collect_symbols(out)
                }
                ElementKind::Mirror(None) => {}
                ElementKind::ChainRef { target, .. } => {
                    if *target < self.chains.len() {
                        self.collect_symbols(*target, out, depth + 1);
                    }
                }
            }
        }
    }
}

impl fmt::Display for CircuitAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.chains {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::ast::{CircuitAst, ElementKind, Expr};
use crate::error::{Error, Result};
use crate::optics::{bs_matrix, phase_matrix, Phase, TransferMatrix};

/// Values for the free symbols of a netlist, in radians.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bindings(BTreeMap<String, f64>);

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.insert(name, value);
        self
    }

    pub fn insert(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_owned(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Parse one `name=value` assignment.
    pub fn parse_assignment(text: &str) -> std::result::Result<(String, f64), String> {
        let (name, value) = text
            .split_once('=')
            .ok_or_else(|| format!("expected NAME=VALUE, got `{text}`"))?;
        let name = name.trim();
        if name.is_empty() {
            return Err(format!("missing symbol name in `{text}`"));
        }
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| format!("`{}` is not a number", value.trim()))?;
        if !value.is_finite() {
            return Err(format!("binding for `{name}` is not finite"));
        }
        Ok((name.to_owned(), value))
    }
}

impl FromIterator<(String, f64)> for Bindings {
    fn from_iter<T: IntoIterator<Item = (String, f64)>>(iter: T) -> Self {
        Bindings(iter.into_iter().collect())
    }
}

fn eval(expr: &Expr, bindings: &Bindings) -> Result<f64> {
    expr.eval(&|name| bindings.get(name))
        .map_err(Error::UnboundSymbol)
}

/// Compile the visible definition of `chain` into one transfer matrix.
pub fn compile(ast: &CircuitAst, chain: &str, bindings: &Bindings) -> Result<TransferMatrix> {
    let index = ast
        .index_of(chain)
        .ok_or_else(|| Error::UnknownChain(chain.to_owned()))?;
    compile_chain_at(ast, index, bindings)
}

/// Compile chain number `index`; references resolve to the definitions they
/// were bound to at parse time.
pub fn compile_chain_at(
    ast: &CircuitAst,
    index: usize,
    bindings: &Bindings,
) -> Result<TransferMatrix> {
    let chain = ast
        .chains
        .get(index)
        .ok_or_else(|| Error::UnknownChain(format!("#{index}")))?;
    let mut acc = TransferMatrix::IDENTITY;
    for element in &chain.elements {
        let m = match &element.kind {
            ElementKind::Bs(e) => bs_matrix(eval(e, bindings)?)?,
            ElementKind::Phase(arm, e) => phase_matrix(*arm, Phase::new(eval(e, bindings)?))?,
            ElementKind::Mirror(None) => TransferMatrix::IDENTITY,
            ElementKind::Mirror(Some(e)) => {
                let f = crate::error::ensure_finite("mirror factor", eval(e, bindings)?)?;
                TransferMatrix::IDENTITY.scaled(Complex64::new(f, 0.0))
            }
            ElementKind::ChainRef { name, target } => {
                if *target >= index {
                    return Err(Error::domain(
                        "chain reference",
                        format!(
                            "`{name}` in `{}` does not point to an earlier chain",
                            chain.name
                        ),
                    ));
                }
                compile_chain_at(ast, *target, bindings)?
            }
        };
        acc = m * acc;
    }
    Ok(acc)
}

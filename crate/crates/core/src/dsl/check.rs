use std::collections::HashMap;

use super::ast::{CircuitAst, ElementKind};
use super::Diagnostic;

/// Lint a parsed netlist: constant parameters outside the lossless range,
/// chains unreachable from the last (root) chain, and redefined names.
pub fn check(ast: &CircuitAst) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    for chain in &ast.chains {
        for e in &chain.elements {
            match &e.kind {
                ElementKind::Bs(x) => {
                    if let Some(v) = x.constant().filter(|v| !(0.0..=1.0).contains(v)) {
                        out.push(Diagnostic::warning(
                            e.span,
                            format!("beam splitter reflectance {v} is outside [0, 1]"),
                        ));
                    }
                }
                ElementKind::Mirror(Some(x)) => {
                    if let Some(v) = x.constant().filter(|v| !(0.0..=1.0).contains(v)) {
                        out.push(Diagnostic::warning(
                            e.span,
                            format!("mirror amplitude factor {v} is outside [0, 1]"),
                        ));
                    }
                }
                _ => {}
            }
        }
    }

    if let Some(root) = ast.chains.len().checked_sub(1) {
        let mut reachable = vec![false; ast.chains.len()];
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            if std::mem::replace(&mut reachable[i], true) {
                continue;
            }
            for e in &ast.chains[i].elements {
                if let ElementKind::ChainRef { target, .. } = e.kind {
                    if target < ast.chains.len() {
                        stack.push(target);
                    }
                }
            }
        }
        let root_name = &ast.chains[root].name;
        for (chain, _) in ast.chains.iter().zip(&reachable).filter(|(_, r)| !**r) {
            out.push(Diagnostic::warning(
                chain.name_span,
                format!(
                    "chain `{}` is not used by the root chain `{root_name}`",
                    chain.name
                ),
            ));
        }
    }

    let mut first_seen: HashMap<&str, usize> = HashMap::new();
    for chain in &ast.chains {
        if let Some(line) = first_seen.get(chain.name.as_str()) {
            out.push(Diagnostic::warning(
                chain.name_span,
                format!(
                    "chain `{}` shadows an earlier definition on line {line}",
                    chain.name
                ),
            ));
        } else {
            first_seen.insert(&chain.name, chain.name_span.line);
        }
    }

    out.sort_by_key(|d| (d.line, d.column));
    out
}

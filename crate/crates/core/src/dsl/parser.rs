use std::collections::HashMap;

use super::ast::{BinOp, Chain, CircuitAst, Element, ElementKind, Expr, Span};
use super::lexer::{Lexer, Token, TokenKind};
use super::Diagnostic;
use crate::optics::Arm;

const RESERVED: [&str; 5] = ["chain", "bs", "phase", "mirror", "pi"];

/// Parse netlist source. On failure every error found is returned, sorted
/// by position; parsing resumes at the next line after an error.
pub fn parse(source: &str) -> Result<CircuitAst, Vec<Diagnostic>> {
    let (tokens, mut errors) = Lexer::new(source).tokenize();
    let mut parser = Parser::new(tokens);
    let ast = parser.file();
    errors.extend(parser.errors);
    if errors.is_empty() {
        Ok(ast)
    } else {
        errors.sort_by_key(|d| (d.line, d.column));
        Err(errors)
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    errors: Vec<Diagnostic>,
    /// Visible definitions so far: name -> chain index.
    defined: HashMap<String, usize>,
    /// Every `chain NAME` header in the file with its line, for better
    /// messages on forward references.
    declared: HashMap<String, usize>,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn new(tokens: Vec<Token>) -> Self {
        let mut declared = HashMap::new();
        for w in tokens.windows(2) {
            if let (TokenKind::Ident(kw), TokenKind::Ident(name)) = (&w[0].kind, &w[1].kind) {
                if kw == "chain" {
                    declared.entry(name.clone()).or_insert(w[1].span.line);
                }
            }
        }
        Parser {
            tokens,
            pos: 0,
            errors: Vec::new(),
            defined: HashMap::new(),
            declared,
        }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    /// Like `advance`, but leaves a line terminator in place so that error
    /// recovery resumes on the right line.
    fn next_in_line(&mut self) -> Token {
        if self.at_line_end() {
            self.peek().clone()
        } else {
            self.advance()
        }
    }

    fn at_line_end(&self) -> bool {
        matches!(self.peek().kind, TokenKind::Newline | TokenKind::Eof)
    }

    fn expect(&mut self, kind: TokenKind, context: &str) -> PResult<Token> {
        if self.peek().kind == kind {
            Ok(self.advance())
        } else {
            let t = self.peek();
            Err(Diagnostic::error(
                t.span,
                format!(
                    "expected {} {context}, found {}",
                    kind.describe(),
                    t.kind.describe()
                ),
            ))
        }
    }

    fn ident(&mut self, context: &str) -> PResult<(String, Span)> {
        let t = self.next_in_line();
        match t.kind {
            TokenKind::Ident(name) => Ok((name, t.span)),
            other => Err(Diagnostic::error(
                t.span,
                format!("expected a name {context}, found {}", other.describe()),
            )),
        }
    }

    fn skip_line(&mut self) {
        while !self.at_line_end() {
            self.advance();
        }
    }

    fn file(&mut self) -> CircuitAst {
        let mut ast = CircuitAst::default();
        loop {
            match self.peek().kind {
                TokenKind::Eof => break,
                TokenKind::Newline => {
                    self.advance();
                }
                _ => match self.statement(ast.chains.len()) {
                    Ok(chain) => {
                        self.defined.insert(chain.name.clone(), ast.chains.len());
                        ast.chains.push(chain);
                    }
                    Err(d) => {
                        self.errors.push(d);
                        self.skip_line();
                    }
                },
            }
        }
        ast
    }

    fn statement(&mut self, index: usize) -> PResult<Chain> {
        let (kw, kw_span) = self.ident("at the start of a statement")?;
        if kw != "chain" {
            return Err(Diagnostic::error(
                kw_span,
                format!("expected `chain`, found `{kw}`"),
            ));
        }
        let (name, name_span) = self.ident("after `chain`")?;
        if RESERVED.contains(&name.as_str()) {
            return Err(Diagnostic::error(
                name_span,
                format!("`{name}` is reserved and cannot name a chain"),
            ));
        }
        self.expect(TokenKind::Colon, "after the chain name")?;
        let mut elements = vec![self.element(&name, index)?];
        while self.peek().kind == TokenKind::Arrow {
            self.advance();
            elements.push(self.element(&name, index)?);
        }
        if !self.at_line_end() {
            let t = self.peek();
            return Err(Diagnostic::error(
                t.span,
                format!("expected `->` or end of line, found {}", t.kind.describe()),
            ));
        }
        Ok(Chain {
            name,
            name_span,
            elements,
        })
    }

    fn parenthesized(&mut self, what: &str) -> PResult<Expr> {
        self.expect(TokenKind::LParen, &format!("after `{what}`"))?;
        let e = self.expr()?;
        self.expect(TokenKind::RParen, &format!("to close `{what}(`"))?;
        Ok(e)
    }

    fn element(&mut self, current: &str, index: usize) -> PResult<Element> {
        let (word, span) = self.ident("for an element")?;
        let kind = match word.as_str() {
            "bs" => ElementKind::Bs(self.parenthesized("bs")?),
            "phase" => {
                let (arm_word, arm_span) = self.ident("for the phase arm")?;
                let arm = match arm_word.as_str() {
                    "upper" => Arm::Upper,
                    "lower" => Arm::Lower,
                    "both" => Arm::Both,
                    other => {
                        return Err(Diagnostic::error(
                            arm_span,
                            format!(
                                "unknown arm keyword `{other}` (expected upper, lower or both)"
                            ),
                        ))
                    }
                };
                ElementKind::Phase(arm, self.parenthesized("phase")?)
            }
            "mirror" => {
                if self.peek().kind == TokenKind::LParen {
                    ElementKind::Mirror(Some(self.parenthesized("mirror")?))
                } else {
                    ElementKind::Mirror(None)
                }
            }
            "chain" | "pi" => {
                return Err(Diagnostic::error(
                    span,
                    format!("`{word}` is reserved and cannot be used as an element"),
                ))
            }
            _ => ElementKind::ChainRef {
                target: self.resolve(&word, span, current, index)?,
                name: word,
            },
        };
        Ok(Element { kind, span })
    }

    fn resolve(&self, name: &str, span: Span, current: &str, index: usize) -> PResult<usize> {
        if let Some(&target) = self.defined.get(name) {
            debug_assert!(target < index);
            return Ok(target);
        }
        let message = if name == current {
            format!("chain `{name}` refers to itself")
        } else if let Some(line) = self.declared.get(name) {
            format!("chain `{name}` is used before its definition on line {line}")
        } else {
            format!("undefined chain `{name}`")
        };
        Err(Diagnostic::error(span, message))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Star => BinOp::Mul,
                TokenKind::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance();
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.peek().kind == TokenKind::Minus {
            self.advance();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let t = self.next_in_line();
        match t.kind {
            TokenKind::Number(v) => Ok(Expr::Num(v)),
            TokenKind::Ident(name) if name == "pi" => Ok(Expr::Pi),
            TokenKind::Ident(name) => Ok(Expr::Sym(name)),
            TokenKind::LParen => {
                let e = self.expr()?;
                self.expect(TokenKind::RParen, "to close the expression")?;
                Ok(e)
            }
            other => Err(Diagnostic::error(
                t.span,
                format!("expected an expression, found {}", other.describe()),
            )),
        }
    }
}

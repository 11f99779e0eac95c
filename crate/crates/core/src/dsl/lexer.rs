use super::ast::Span;
use super::Diagnostic;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Number(f64),
    Colon,
    Arrow,
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
    Newline,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Number(v) => format!("number {v}"),
            TokenKind::Colon => "`:`".into(),
            TokenKind::Arrow => "`->`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::Plus => "`+`".into(),
            TokenKind::Minus => "`-`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::Slash => "`/`".into(),
            TokenKind::Newline => "end of line".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

pub struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    pub fn new(source: &'a str) -> Self {
        Lexer {
            chars: source.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn take_while(&mut self, out: &mut String, pred: impl Fn(char) -> bool) {
        while let Some(&c) = self.chars.peek() {
            if !pred(c) {
                break;
            }
            out.push(c);
            self.bump();
        }
    }

    fn number(&mut self, span: Span) -> Result<TokenKind, Diagnostic> {
        let mut text = String::new();
        self.take_while(&mut text, |c| c.is_ascii_digit());
        if self.chars.peek() == Some(&'.') {
            text.push('.');
            self.bump();
            self.take_while(&mut text, |c| c.is_ascii_digit());
        }
        if matches!(self.chars.peek(), Some('e' | 'E')) {
            text.push('e');
            self.bump();
            if let Some(&sign @ ('+' | '-')) = self.chars.peek() {
                text.push(sign);
                self.bump();
            }
            let before = text.len();
            self.take_while(&mut text, |c| c.is_ascii_digit());
            if text.len() == before {
                return Err(Diagnostic::error(
                    span,
                    format!("malformed number `{text}`"),
                ));
            }
        }
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(TokenKind::Number(v)),
            _ => Err(Diagnostic::error(
                span,
                format!("malformed number `{text}`"),
            )),
        }
    }

    /// Tokenize the whole input. Lexical errors are collected; the offending
    /// character is skipped.
    pub fn tokenize(mut self) -> (Vec<Token>, Vec<Diagnostic>) {
        let mut tokens = Vec::new();
        let mut errors = Vec::new();
        loop {
            let span = Span::new(self.line, self.column);
            let Some(&c) = self.chars.peek() else {
                tokens.push(Token {
                    kind: TokenKind::Eof,
                    span,
                });
                break;
            };
            let kind = match c {
                '\n' => {
                    self.bump();
                    TokenKind::Newline
                }
                c if c.is_whitespace() => {
                    self.bump();
                    continue;
                }
                '#' => {
                    while matches!(self.chars.peek(), Some(&c) if c != '\n') {
                        self.bump();
                    }
                    continue;
                }
                ':' => {
                    self.bump();
                    TokenKind::Colon
                }
                '(' => {
                    self.bump();
                    TokenKind::LParen
                }
                ')' => {
                    self.bump();
                    TokenKind::RParen
                }
                '+' => {
                    self.bump();
                    TokenKind::Plus
                }
                '*' => {
                    self.bump();
                    TokenKind::Star
                }
                '/' => {
                    self.bump();
                    TokenKind::Slash
                }
                '-' => {
                    self.bump();
                    if self.chars.peek() == Some(&'>') {
                        self.bump();
                        TokenKind::Arrow
                    } else {
                        TokenKind::Minus
                    }
                }
                c if c.is_ascii_digit() => match self.number(span) {
                    Ok(kind) => kind,
                    Err(d) => {
                        errors.push(d);
                        continue;
                    }
                },
                c if c.is_alphabetic() || c == '_' => {
                    let mut name = String::new();
                    self.take_while(&mut name, |c| c.is_alphanumeric() || c == '_');
                    TokenKind::Ident(name)
                }
                other => {
                    self.bump();
                    errors.push(Diagnostic::error(
                        span,
                        format!("unexpected character `{other}`"),
                    ));
                    continue;
                }
            };
            tokens.push(Token { kind, span });
        }
        (tokens, errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        let (toks, errs) = Lexer::new(src).tokenize();
        assert!(errs.is_empty(), "{errs:?}");
        toks.into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn arrows_numbers_and_comments() {
        use TokenKind::*;
        assert_eq!(
            kinds("a -> bs(1.5e-1) # tail\n-x"),
            vec![
                Ident("a".into()),
                Arrow,
                Ident("bs".into()),
                LParen,
                Number(0.15),
                RParen,
                Newline,
                Minus,
                Ident("x".into()),
                Eof
            ]
        );
    }

    #[test]
    fn spans_are_one_based() {
        let (toks, _) = Lexer::new("chain a\n  : b").tokenize();
        let colon = toks.iter().find(|t| t.kind == TokenKind::Colon).unwrap();
        assert_eq!((colon.span.line, colon.span.column), (2, 3));
    }

    #[test]
    fn bad_characters_and_numbers() {
        let (_, errs) = Lexer::new("bs(0.5) $ 1e").tokenize();
        assert_eq!(errs.len(), 2);
        assert_eq!((errs[0].line, errs[0].column), (1, 9));
        assert!(errs[1].message.contains("malformed number"));
        let (_, errs) = Lexer::new("1e999").tokenize();
        assert_eq!(errs.len(), 1);
    }
}

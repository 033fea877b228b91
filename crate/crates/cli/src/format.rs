//! Text formats for algebra and metric files, with位置-aware parse errors
//! and a canonical writer (parse-then-write is idempotent byte for byte).
//!
//! Algebra file grammar (1-based indices, `i < j`, `#` comments to EOL):
//!
//! ```text
//! dim: 4
//! labels: [X1, X2, X3, Y]
//! brackets: [
//!   {i: 1, j: 2, k: 3, c: 1},
//! ]
//! ```
//!
//! Metric file grammar (row-major Gram entries):
//!
//! ```text
//! dim: 2
//! gram: [
//!   1, 0,
//!   0, 4,
//! ]
//! ```

use negricci::algebra::{BracketTerm, LieAlgebra};
use negricci::ricci::InnerProduct;
use negricci::nalgebra::DMatrix;
use std::fmt;

#[derive(Debug)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Number(f64),
    Colon,
    Comma,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
}

struct Lexer<'a> {
    src: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, chars: src.char_indices().peekable(), line: 1, column: 1 }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, column: self.column, message: message.into() }
    }

    fn bump(&mut self) -> Option<(usize, char)> {
        let next = self.chars.next();
        if let Some((_, c)) = next {
            if c == '\n' {
                self.line += 1;
                self.column = 1;
            } else {
                self.column += 1;
            }
        }
        next
    }

    fn tokens(mut self) -> Result<Vec<(Token, usize, usize)>, ParseError> {
        let mut out = Vec::new();
        while let Some(&(at, c)) = self.chars.peek() {
            let (line, column) = (self.line, self.column);
            match c {
                ' ' | '\t' | '\r' | '\n' => {
                    self.bump();
                }
                '#' => {
                    while let Some(&(_, c)) = self.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                ':' => {
                    self.bump();
                    out.push((Token::Colon, line, column));
                }
                ',' => {
                    self.bump();
                    out.push((Token::Comma, line, column));
                }
                '[' => {
                    self.bump();
                    out.push((Token::LBracket, line, column));
                }
                ']' => {
                    self.bump();
                    out.push((Token::RBracket, line, column));
                }
                '{' => {
                    self.bump();
                    out.push((Token::LBrace, line, column));
                }
                '}' => {
                    self.bump();
                    out.push((Token::RBrace, line, column));
                }
                c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                    let start = at;
                    let mut end = at;
                    while let Some(&(p, c)) = self.chars.peek() {
                        if c.is_ascii_digit() || matches!(c, '-' | '+' | '.' | 'e' | 'E') {
                            end = p + c.len_utf8();
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let text = &self.src[start..end];
                    let value = text.parse::<f64>().map_err(|_| ParseError {
                        line,
                        column,
                        message: format!("invalid number `{text}`"),
                    })?;
                    out.push((Token::Number(value), line, column));
                }
                c if c.is_alphanumeric() || c == '_' => {
                    let start = at;
                    let mut end = at;
                    while let Some(&(p, c)) = self.chars.peek() {
                        if c.is_alphanumeric() || c == '_' {
                            end = p + c.len_utf8();
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    out.push((Token::Ident(self.src[start..end].to_string()), line, column));
                }
                other => return Err(self.error(format!("unexpected character `{other}`"))),
            }
        }
        Ok(out)
    }
}

struct Parser {
    tokens: Vec<(Token, usize, usize)>,
    at: usize,
}

impl Parser {
    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self
            .tokens
            .get(self.at.min(self.tokens.len().saturating_sub(1)))
            .map(|(_, l, c)| (*l, *c))
            .unwrap_or((1, 1));
        ParseError { line, column, message: message.into() }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.at).map(|(t, _, _)| t)
    }

    fn next(&mut self) -> Result<Token, ParseError> {
        let t = self
            .tokens
            .get(self.at)
            .map(|(t, _, _)| t.clone())
            .ok_or_else(|| self.error_here("unexpected end of input"))?;
        self.at += 1;
        Ok(t)
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<(), ParseError> {
        let got = self.next()?;
        if got != want {
            self.at -= 1;
            return Err(self.error_here(format!("expected {what}")));
        }
        Ok(())
    }

    fn key(&mut self, name: &str) -> Result<(), ParseError> {
        match self.next()? {
            Token::Ident(s) if s == name => {}
            _ => {
                self.at -= 1;
                return Err(self.error_here(format!("expected field `{name}`")));
            }
        }
        self.expect(Token::Colon, "`:`")
    }

    fn number(&mut self, what: &str) -> Result<f64, ParseError> {
        match self.next()? {
            Token::Number(v) => Ok(v),
            _ => {
                self.at -= 1;
                Err(self.error_here(format!("expected {what}")))
            }
        }
    }

    fn positive_index(&mut self, what: &str) -> Result<usize, ParseError> {
        let v = self.number(what)?;
        if v < 1.0 || v.fract() != 0.0 || v > usize::MAX as f64 {
            self.at -= 1;
            return Err(self.error_here(format!("{what} must be a positive integer (1-based)")));
        }
        Ok(v as usize)
    }
}

/// Parse an algebra file.
pub fn parse_algebra(src: &str) -> Result<LieAlgebra, ParseError> {
    let tokens = Lexer::new(src).tokens()?;
    let mut p = Parser { tokens, at: 0 };
    p.key("dim")?;
    let dim = p.positive_index("dimension")?;
    let mut labels: Option<Vec<String>> = None;
    if matches!(p.peek(), Some(Token::Ident(s)) if s == "labels") {
        p.key("labels")?;
        p.expect(Token::LBracket, "`[`")?;
        let mut ls = Vec::new();
        loop {
            match p.next()? {
                Token::RBracket => break,
                Token::Ident(s) => {
                    ls.push(s);
                    if matches!(p.peek(), Some(Token::Comma)) {
                        p.next()?;
                    }
                }
                _ => {
                    p.at -= 1;
                    return Err(p.error_here("expected a label or `]`"));
                }
            }
        }
        if ls.len() != dim {
            return Err(p.error_here(format!("expected {dim} labels, got {}", ls.len())));
        }
        labels = Some(ls);
    }
    p.key("brackets")?;
    p.expect(Token::LBracket, "`[`")?;
    let mut terms = Vec::new();
    loop {
        let record_at = p.tokens.get(p.at).map(|(_, l, c)| (*l, *c)).unwrap_or((1, 1));
        match p.next()? {
            Token::RBracket => break,
            Token::LBrace => {
                p.key("i")?;
                let i = p.positive_index("index i")?;
                p.expect(Token::Comma, "`,`")?;
                p.key("j")?;
                let j = p.positive_index("index j")?;
                p.expect(Token::Comma, "`,`")?;
                p.key("k")?;
                let k = p.positive_index("index k")?;
                p.expect(Token::Comma, "`,`")?;
                p.key("c")?;
                let c = p.number("coefficient c")?;
                p.expect(Token::RBrace, "`}`")?;
                if matches!(p.peek(), Some(Token::Comma)) {
                    p.next()?;
                }
                if i >= j {
                    return Err(ParseError {
                        line: record_at.0,
                        column: record_at.1,
                        message: format!("bracket indices need i < j, got i={i}, j={j}"),
                    });
                }
                if j > dim || k > dim {
                    return Err(ParseError {
                        line: record_at.0,
                        column: record_at.1,
                        message: format!(
                            "bracket index out of range for dim {dim}: i={i}, j={j}, k={k}"
                        ),
                    });
                }
                terms.push(BracketTerm { i: i - 1, j: j - 1, k: k - 1, c });
            }
            _ => {
                p.at -= 1;
                return Err(p.error_here("expected `{` or `]`"));
            }
        }
    }
    if p.peek().is_some() {
        return Err(p.error_here("unexpected trailing input"));
    }
    let alg = LieAlgebra::new(dim, terms)
        .map_err(|e| ParseError { line: 1, column: 1, message: e.to_string() })?;
    match labels {
        Some(ls) => alg
            .with_labels(ls)
            .map_err(|e| ParseError { line: 1, column: 1, message: e.to_string() }),
        None => Ok(alg),
    }
}

/// Parse a metric file.
pub fn parse_metric(src: &str) -> Result<InnerProduct, ParseError> {
    let tokens = Lexer::new(src).tokens()?;
    let mut p = Parser { tokens, at: 0 };
    p.key("dim")?;
    let dim = p.positive_index("dimension")?;
    p.key("gram")?;
    p.expect(Token::LBracket, "`[`")?;
    let mut entries = Vec::new();
    loop {
        match p.next()? {
            Token::RBracket => break,
            Token::Number(v) => {
                entries.push(v);
                if matches!(p.peek(), Some(Token::Comma)) {
                    p.next()?;
                }
            }
            _ => {
                p.at -= 1;
                return Err(p.error_here("expected a number or `]`"));
            }
        }
    }
    if p.peek().is_some() {
        return Err(p.error_here("unexpected trailing input"));
    }
    if entries.len() != dim * dim {
        return Err(p.error_here(format!(
            "expected {} gram entries (row-major {dim}x{dim}), got {}",
            dim * dim,
            entries.len()
        )));
    }
    let gram = DMatrix::from_row_slice(dim, dim, &entries);
    InnerProduct::new(gram).map_err(|e| ParseError { line: 1, column: 1, message: e.to_string() })
}

/// Serialize a floating-point value: integers plainly, everything else with
/// 17 significant digits (round-trip exact).
pub fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.16e}")
    }
}

/// Canonical algebra text: fixed field order, one bracket per line, terms
/// sorted by (i, j, k).
pub fn write_algebra(alg: &LieAlgebra) -> String {
    let mut out = String::new();
    out.push_str(&format!("dim: {}\n", alg.dim()));
    if let Some(labels) = alg.labels() {
        out.push_str(&format!("labels: [{}]\n", labels.join(", ")));
    }
    out.push_str("brackets: [\n");
    let mut terms: Vec<&BracketTerm> = alg.terms().iter().collect();
    terms.sort_by_key(|t| (t.i, t.j, t.k));
    for t in terms {
        out.push_str(&format!(
            "  {{i: {}, j: {}, k: {}, c: {}}},\n",
            t.i + 1,
            t.j + 1,
            t.k + 1,
            format_number(t.c)
        ));
    }
    out.push_str("]\n");
    out
}

/// Canonical metric text.
pub fn write_metric(metric: &InnerProduct) -> String {
    let n = metric.dim();
    let mut out = String::new();
    out.push_str(&format!("dim: {n}\n"));
    out.push_str("gram: [\n");
    for r in 0..n {
        let row: Vec<String> = (0..n).map(|c| format_number(metric.gram()[(r, c)])).collect();
        out.push_str(&format!("  {},\n", row.join(", ")));
    }
    out.push_str("]\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_basic_algebra() {
        let src = "# heisenberg\ndim: 3\nlabels: [X1, X2, Z]\nbrackets: [\n  {i: 1, j: 2, k: 3, c: 1},\n]\n";
        let alg = parse_algebra(src).unwrap();
        assert_eq!(alg.dim(), 3);
        assert_eq!(alg.terms().len(), 1);
        assert_eq!(alg.labels().unwrap()[2], "Z");
    }

    #[test]
    fn parse_error_has_position() {
        let src = "dim: 3\nbrackets: [\n  {i: 2, j: 1, k: 3, c: 1},\n]\n";
        let err = parse_algebra(src).unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("i < j"), "{}", err.message);
        let err = parse_algebra("dim: x").unwrap_err();
        assert_eq!(err.line, 1);
    }

    #[test]
    fn canonical_roundtrip_is_idempotent() {
        let src = "dim: 4\nbrackets: [\n  {i: 1, j: 3, k: 4, c: 1.5},\n  {i: 1, j: 2, k: 3, c: 1},\n]\n";
        let alg = parse_algebra(src).unwrap();
        let canon = write_algebra(&alg);
        let reparsed = parse_algebra(&canon).unwrap();
        assert_eq!(write_algebra(&reparsed), canon);
    }

    #[test]
    fn metric_roundtrip() {
        let src = "dim: 2\ngram: [\n  2, 0.5,\n  0.5, 1,\n]\n";
        let m = parse_metric(src).unwrap();
        let canon = write_metric(&m);
        let reparsed = parse_metric(&canon).unwrap();
        assert_eq!(write_metric(&reparsed), canon);
        // rejects non-SPD
        let bad = "dim: 2\ngram: [\n  1, 3,\n  3, 1,\n]\n";
        assert!(parse_metric(bad).is_err());
    }

    #[test]
    fn seventeen_digit_floats_roundtrip() {
        let v = std::f64::consts::PI;
        let s = format_number(v);
        assert_eq!(s.parse::<f64>().unwrap(), v);
    }
}

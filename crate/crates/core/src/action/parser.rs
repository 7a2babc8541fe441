//! Line-oriented parser for action programs.
//!
//! ```text
//! statement := [ident "="] ident "(" [arg ("," arg)*] ")"
//! arg       := [ident "="] value
//! value     := number | string | "(" number "," number ["," number] ")" | ident
//! ```
//!
//! `#` starts a comment outside strings; blank lines are ignored.

use std::fmt;

use serde::Serialize;

use super::ast::{ActionProgram, Call, Statement, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseErrorKind {
    MalformedLiteral,
    UnbalancedParens,
    DuplicateKeyword,
    PositionalAfterKeyword,
    UnexpectedToken,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParseError {
    pub line: usize,
    /// 1-based character column.
    pub column: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Str(String),
    LParen,
    RParen,
    Comma,
    Eq,
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Lexer {
    fn err(&self, column: usize, kind: ParseErrorKind, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: column + 1,
            kind,
            message: message.into(),
        }
    }

    /// Tokens with their 0-based start columns; stops at a comment.
    fn run(mut self) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut out = Vec::new();
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            let start = self.pos;
            match c {
                ' ' | '\t' | '\r' => self.pos += 1,
                '#' => break,
                '(' => {
                    out.push((Tok::LParen, start));
                    self.pos += 1;
                }
                ')' => {
                    out.push((Tok::RParen, start));
                    self.pos += 1;
                }
                ',' => {
                    out.push((Tok::Comma, start));
                    self.pos += 1;
                }
                '=' => {
                    out.push((Tok::Eq, start));
                    self.pos += 1;
                }
                '"' | '\'' => out.push((Tok::Str(self.string(c)?), start)),
                c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                    out.push((Tok::Number(self.number()?), start));
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    while self.pos < self.chars.len()
                        && (self.chars[self.pos].is_ascii_alphanumeric() || self.chars[self.pos] == '_')
                    {
                        self.pos += 1;
                    }
                    let word: String = self.chars[start..self.pos].iter().collect();
                    out.push((Tok::Ident(word), start));
                }
                other => {
                    return Err(self.err(start, ParseErrorKind::UnexpectedToken, format!("unexpected character {other:?}")))
                }
            }
        }
        Ok(out)
    }

    fn string(&mut self, quote: char) -> Result<String, ParseError> {
        let start = self.pos;
        self.pos += 1;
        let mut s = String::new();
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            self.pos += 1;
            if c == quote {
                return Ok(s);
            }
            if c == '\\' {
                let Some(&e) = self.chars.get(self.pos) else { break };
                self.pos += 1;
                s.push(match e {
                    'n' => '\n',
                    't' => '\t',
                    'r' => '\r',
                    '\\' | '"' | '\'' => e,
                    other => {
                        return Err(self.err(self.pos - 2, ParseErrorKind::MalformedLiteral, format!("unknown escape \\{other}")))
                    }
                });
            } else {
                s.push(c);
            }
        }
        Err(self.err(start, ParseErrorKind::MalformedLiteral, "unterminated string"))
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        let at = |l: &Self, i: usize| l.chars.get(i).copied().unwrap_or('\0');
        let mut i = self.pos;
        if matches!(at(self, i), '-' | '+') {
            i += 1;
        }
        let int_start = i;
        while at(self, i).is_ascii_digit() {
            i += 1;
        }
        let mut digits = i - int_start;
        if at(self, i) == '.' {
            i += 1;
            let frac_start = i;
            while at(self, i).is_ascii_digit() {
                i += 1;
            }
            digits += i - frac_start;
        }
        if digits > 0 && matches!(at(self, i), 'e' | 'E') {
            let mut j = i + 1;
            if matches!(at(self, j), '-' | '+') {
                j += 1;
            }
            let exp_start = j;
            while at(self, j).is_ascii_digit() {
                j += 1;
            }
            if j == exp_start {
                return Err(self.err(start, ParseErrorKind::MalformedLiteral, "malformed number"));
            }
            i = j;
        }
        // A number glued to letters or another dot (`1.2.3`, `3abc`) is malformed.
        let next = at(self, i);
        if digits == 0 || next.is_ascii_alphanumeric() || next == '.' || next == '_' {
            while self.pos < self.chars.len() && !matches!(self.chars[self.pos], ' ' | ',' | ')' | '(' | '#') {
                self.pos += 1;
            }
            let text: String = self.chars[start..self.pos].iter().collect();
            return Err(self.err(start, ParseErrorKind::MalformedLiteral, format!("malformed number {text:?}")));
        }
        let text: String = self.chars[start..i].iter().collect();
        self.pos = i;
        match text.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(self.err(start, ParseErrorKind::MalformedLiteral, format!("malformed number {text:?}"))),
        }
    }
}

struct LineParser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
}

impl LineParser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.1)
    }

    fn err(&self, kind: ParseErrorKind, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.col() + 1,
            kind,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        let binding = match (self.toks.first(), self.toks.get(1)) {
            (Some((Tok::Ident(name), _)), Some((Tok::Eq, _))) => {
                self.pos = 2;
                Some(name.clone())
            }
            _ => None,
        };
        let function = match self.next() {
            Some(Tok::Ident(name)) => name,
            _ => {
                self.pos -= 1;
                return Err(self.err(ParseErrorKind::UnexpectedToken, "expected a function name"));
            }
        };
        if self.next() != Some(Tok::LParen) {
            self.pos -= 1;
            return Err(self.err(ParseErrorKind::UnexpectedToken, "expected '('"));
        }
        let mut call = Call {
            function,
            positional: Vec::new(),
            keyword: Vec::new(),
        };
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
        } else {
            loop {
                self.arg(&mut call)?;
                match self.next() {
                    Some(Tok::Comma) => continue,
                    Some(Tok::RParen) => break,
                    None => {
                        return Err(self.err(ParseErrorKind::UnbalancedParens, "unbalanced parentheses: missing ')'"))
                    }
                    Some(_) => {
                        self.pos -= 1;
                        return Err(self.err(ParseErrorKind::UnexpectedToken, "expected ',' or ')'"));
                    }
                }
            }
        }
        match self.peek() {
            None => Ok(Statement {
                binding,
                call,
                line: self.line,
            }),
            Some(Tok::RParen) => Err(self.err(ParseErrorKind::UnbalancedParens, "unbalanced parentheses: extra ')'")),
            Some(_) => Err(self.err(ParseErrorKind::UnexpectedToken, "unexpected text after call")),
        }
    }

    fn arg(&mut self, call: &mut Call) -> Result<(), ParseError> {
        if let (Some(Tok::Ident(name)), Some((Tok::Eq, _))) = (self.peek().cloned(), self.toks.get(self.pos + 1)) {
            let col = self.col();
            self.pos += 2;
            let value = self.value()?;
            if call.keyword.iter().any(|(k, _)| *k == name) {
                return Err(ParseError {
                    line: self.line,
                    column: col + 1,
                    kind: ParseErrorKind::DuplicateKeyword,
                    message: format!("duplicate keyword argument {name:?}"),
                });
            }
            call.keyword.push((name, value));
            return Ok(());
        }
        if !call.keyword.is_empty() {
            return Err(self.err(ParseErrorKind::PositionalAfterKeyword, "positional argument after keyword argument"));
        }
        let value = self.value()?;
        call.positional.push(value);
        Ok(())
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        match self.next() {
            Some(Tok::Number(x)) => Ok(Value::Number(x)),
            Some(Tok::Str(s)) => Ok(Value::Str(s)),
            Some(Tok::Ident(name)) => Ok(Value::Ident(name)),
            Some(Tok::LParen) => self.tuple(),
            Some(Tok::RParen) | None => {
                self.pos -= 1;
                Err(self.err(ParseErrorKind::UnexpectedToken, "expected a value"))
            }
            Some(_) => {
                self.pos -= 1;
                Err(self.err(ParseErrorKind::UnexpectedToken, "expected a value"))
            }
        }
    }

    fn tuple(&mut self) -> Result<Value, ParseError> {
        let open = self.pos - 1;
        let mut items = Vec::new();
        loop {
            match self.next() {
                Some(Tok::Number(x)) => items.push(x),
                None => return Err(self.err(ParseErrorKind::UnbalancedParens, "unbalanced parentheses: missing ')'")),
                Some(_) => {
                    self.pos -= 1;
                    return Err(self.err(ParseErrorKind::MalformedLiteral, "tuple items must be numbers"));
                }
            }
            match self.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RParen) => break,
                None => return Err(self.err(ParseErrorKind::UnbalancedParens, "unbalanced parentheses: missing ')'")),
                Some(_) => {
                    self.pos -= 1;
                    return Err(self.err(ParseErrorKind::MalformedLiteral, "expected ',' or ')' in tuple"));
                }
            }
        }
        match items[..] {
            [a, b] => Ok(Value::Tuple2([a, b])),
            [a, b, c] => Ok(Value::Tuple3([a, b, c])),
            _ => Err(ParseError {
                line: self.line,
                column: self.toks[open].1 + 1,
                kind: ParseErrorKind::MalformedLiteral,
                message: format!("tuples have 2 or 3 numbers, found {}", items.len()),
            }),
        }
    }
}

/// Parses program text. Unknown function names are accepted here and
/// resolved at execution time.
pub fn parse(source_text: &str) -> Result<ActionProgram, ParseError> {
    let mut statements = Vec::new();
    for (i, text) in source_text.lines().enumerate() {
        let line = i + 1;
        let lexer = Lexer {
            chars: text.chars().collect(),
            pos: 0,
            line,
        };
        let toks = lexer.run()?;
        if toks.is_empty() {
            continue;
        }
        let mut p = LineParser {
            toks,
            pos: 0,
            line,
            end_col: text.chars().count(),
        };
        statements.push(p.statement()?);
    }
    Ok(ActionProgram {
        statements,
        source_text: source_text.to_string(),
    })
}

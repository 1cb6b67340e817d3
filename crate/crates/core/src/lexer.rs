//! Tokenizer shared by the CUT-lang parser and the scaffold syntax checker.

use crate::ast::Span;
use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    /// Unsigned integer literal; sign is handled by the parser.
    Int(u64),
    Float(f64),
    Str(String),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

impl Token {
    pub fn is_punct(&self, p: &str) -> bool {
        matches!(self.kind, TokenKind::Punct(q) if q == p)
    }

    pub fn is_ident(&self, name: &str) -> bool {
        matches!(&self.kind, TokenKind::Ident(s) if s == name)
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Int(i) => format!("`{i}`"),
            TokenKind::Float(f) => format!("`{f:?}`"),
            TokenKind::Str(s) => format!("\"{s}\""),
            TokenKind::Punct(p) => format!("`{p}`"),
            TokenKind::Eof => "end of input".to_string(),
        }
    }
}

// Longest first so that `->` wins over `-`, `&&` over `&`, and so on.
const PUNCTS: &[&str] = &[
    "::", "->", "&&", "||", "<=", ">=", "==", "!=", "{", "}", "(", ")", ";", ":", ",", "*", "=",
    "<", ">", "+", "-", "/", "!", "&", "#", ".", "~",
];

pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    Lexer::new(text).run()
}

struct Lexer<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: u32,
    column: u32,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            text,
            bytes: text.as_bytes(),
            pos: 0,
            line: 1,
            column: 1,
        }
    }

    fn here(&self) -> Span {
        Span {
            start: self.pos,
            end: self.pos,
            line: self.line,
            column: self.column,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.text[self.pos..].chars().next()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<u8> {
        self.bytes.get(self.pos + off).copied()
    }

    fn error(&self, span: Span, message: impl Into<String>) -> ParseError {
        ParseError {
            line: span.line,
            column: span.column,
            message: message.into(),
        }
    }

    fn run(mut self) -> Result<Vec<Token>, ParseError> {
        let mut tokens = Vec::new();
        loop {
            self.skip_trivia()?;
            let start = self.here();
            let Some(c) = self.peek() else {
                tokens.push(Token {
                    kind: TokenKind::Eof,
                    span: start,
                });
                return Ok(tokens);
            };
            let kind = if c.is_ascii_alphabetic() || c == b'_' {
                while matches!(self.peek(), Some(b) if b.is_ascii_alphanumeric() || b == b'_') {
                    self.bump();
                }
                TokenKind::Ident(self.text[start.start..self.pos].to_string())
            } else if c.is_ascii_digit() {
                self.number(start)?
            } else if c == b'"' {
                self.bump();
                let body_start = self.pos;
                loop {
                    match self.peek() {
                        None | Some(b'\n') => return Err(self.error(start, "unterminated string literal")),
                        Some(b'"') => break,
                        Some(_) => {
                            self.bump();
                        }
                    }
                }
                let s = self.text[body_start..self.pos].to_string();
                self.bump();
                TokenKind::Str(s)
            } else if let Some(p) = PUNCTS.iter().find(|p| self.text[self.pos..].starts_with(**p)) {
                for _ in 0..p.len() {
                    self.bump();
                }
                TokenKind::Punct(p)
            } else {
                let ch = self.text[self.pos..].chars().next().unwrap_or('?');
                return Err(self.error(start, format!("unexpected character `{ch}`")));
            };
            tokens.push(Token {
                kind,
                span: Span {
                    end: self.pos,
                    ..start
                },
            });
        }
    }

    fn skip_trivia(&mut self) -> Result<(), ParseError> {
        loop {
            match (self.peek(), self.peek_at(1)) {
                (Some(c), _) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                (Some(b'/'), Some(b'/')) => {
                    while !matches!(self.peek(), None | Some(b'\n')) {
                        self.bump();
                    }
                }
                (Some(b'/'), Some(b'*')) => {
                    let start = self.here();
                    self.bump();
                    self.bump();
                    loop {
                        match (self.peek(), self.peek_at(1)) {
                            (None, _) => return Err(self.error(start, "unterminated block comment")),
                            (Some(b'*'), Some(b'/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            _ => {
                                self.bump();
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn number(&mut self, start: Span) -> Result<TokenKind, ParseError> {
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.bump();
        }
        let mut is_float = false;
        if self.peek() == Some(b'.') && matches!(self.peek_at(1), Some(b) if b.is_ascii_digit()) {
            is_float = true;
            self.bump();
            while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
                self.bump();
            }
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let sign = usize::from(matches!(self.peek_at(1), Some(b'+' | b'-')));
            if matches!(self.peek_at(1 + sign), Some(b) if b.is_ascii_digit()) {
                is_float = true;
                for _ in 0..=sign {
                    self.bump();
                }
                while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
                    self.bump();
                }
            }
        }
        if matches!(self.peek(), Some(b) if b.is_ascii_alphabetic() || b == b'_') {
            return Err(self.error(self.here(), "malformed number literal"));
        }
        let lexeme = &self.text[start.start..self.pos];
        if is_float {
            lexeme
                .parse::<f64>()
                .map(TokenKind::Float)
                .map_err(|_| self.error(start, format!("invalid float literal `{lexeme}`")))
        } else {
            lexeme
                .parse::<u64>()
                .map(TokenKind::Int)
                .map_err(|_| self.error(start, format!("integer literal `{lexeme}` out of range")))
        }
    }
}

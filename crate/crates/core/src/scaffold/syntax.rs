//! Recognizer for the emitted test dialect.
//!
//! ```text
//! file     = { item } ;
//! item     = "#" ( "include" STRING | "pragma" "once" )
//!          | "class" IDENT [ ":" "public" qname ] "{" { member } "}" ";"
//!          | "TEST_F" "(" IDENT "," IDENT ")" body
//!          | [ "inline" ] [ type ] qname "(" [ params ] ")" body ;
//! member   = "public" ":"
//!          | [ "virtual" ] [ type ] IDENT ( "(" [ params ] ")" | ) ";" ;
//! type     = qname [ "*" ] ;
//! qname    = IDENT { "::" IDENT } ;
//! params   = type IDENT { "," type IDENT } ;
//! body     = "{" { stmt } "}" ;
//! stmt     = "return" expr ";" | "delete" IDENT ";" | expr ";" ;
//! expr     = postfix [ "=" expr ] ;
//! postfix  = primary { "->" IDENT | "." IDENT | "(" [ expr { "," expr } ] ")" } ;
//! primary  = "new" qname "(" ")" | qname | INT | FLOAT ;
//! ```

use crate::error::ParseError;
use crate::lexer::{tokenize, Token, TokenKind};

/// Checks that `text` is well formed in the dialect above.
pub fn check_syntax(text: &str) -> Result<(), ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Checker { tokens, pos: 0 };
    while !p.at_eof() {
        p.item()?;
    }
    Ok(())
}

struct Checker {
    tokens: Vec<Token>,
    pos: usize,
}

impl Checker {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_at(&self, n: usize) -> &Token {
        &self.tokens[(self.pos + n).min(self.tokens.len() - 1)]
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek().kind, TokenKind::Eof)
    }

    fn error(&self, expected: &str) -> ParseError {
        let t = self.peek();
        ParseError {
            line: t.span.line,
            column: t.span.column,
            message: format!("expected {expected}, found {}", t.describe()),
        }
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.peek().is_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn punct(&mut self, p: &str) -> Result<(), ParseError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.error(&format!("`{p}`")))
        }
    }

    fn eat_ident(&mut self, name: &str) -> bool {
        if self.peek().is_ident(name) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn keyword(&mut self, name: &str) -> Result<(), ParseError> {
        if self.eat_ident(name) {
            Ok(())
        } else {
            Err(self.error(&format!("`{name}`")))
        }
    }

    fn ident(&mut self) -> Result<(), ParseError> {
        if matches!(self.peek().kind, TokenKind::Ident(_)) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error("identifier"))
        }
    }

    fn qname(&mut self) -> Result<(), ParseError> {
        self.ident()?;
        while self.eat_punct("::") {
            self.ident()?;
        }
        Ok(())
    }

    fn item(&mut self) -> Result<(), ParseError> {
        if self.eat_punct("#") {
            if self.eat_ident("include") {
                return match self.peek().kind {
                    TokenKind::Str(_) => {
                        self.pos += 1;
                        Ok(())
                    }
                    _ => Err(self.error("string")),
                };
            }
            self.keyword("pragma")?;
            return self.keyword("once");
        }
        if self.eat_ident("class") {
            self.ident()?;
            if self.eat_punct(":") {
                self.keyword("public")?;
                self.qname()?;
            }
            self.punct("{")?;
            while !self.eat_punct("}") {
                self.member()?;
            }
            return self.punct(";");
        }
        if self.eat_ident("TEST_F") {
            self.punct("(")?;
            self.ident()?;
            self.punct(",")?;
            self.ident()?;
            self.punct(")")?;
            return self.body();
        }
        self.eat_ident("inline");
        self.qname()?;
        if !self.peek().is_punct("(") {
            self.eat_punct("*");
            self.qname()?;
        }
        self.params()?;
        self.body()
    }

    fn member(&mut self) -> Result<(), ParseError> {
        if self.eat_ident("public") {
            return self.punct(":");
        }
        self.eat_ident("virtual");
        self.qname()?;
        if self.peek().is_punct("(") {
            // Constructor declaration.
            self.params()?;
            return self.punct(";");
        }
        self.eat_punct("*");
        self.ident()?;
        if self.peek().is_punct("(") {
            self.params()?;
        }
        self.punct(";")
    }

    fn params(&mut self) -> Result<(), ParseError> {
        self.punct("(")?;
        if self.eat_punct(")") {
            return Ok(());
        }
        loop {
            self.qname()?;
            self.eat_punct("*");
            self.ident()?;
            if self.eat_punct(")") {
                return Ok(());
            }
            self.punct(",")?;
        }
    }

    fn body(&mut self) -> Result<(), ParseError> {
        self.punct("{")?;
        while !self.eat_punct("}") {
            if self.at_eof() {
                return Err(self.error("`}`"));
            }
            self.stmt()?;
        }
        Ok(())
    }

    fn stmt(&mut self) -> Result<(), ParseError> {
        if self.eat_ident("delete") {
            self.ident()?;
        } else {
            self.eat_ident("return");
            self.expr()?;
        }
        self.punct(";")
    }

    fn expr(&mut self) -> Result<(), ParseError> {
        self.postfix()?;
        if self.eat_punct("=") {
            self.expr()?;
        }
        Ok(())
    }

    fn postfix(&mut self) -> Result<(), ParseError> {
        self.primary()?;
        loop {
            if self.eat_punct("->") || self.eat_punct(".") {
                self.ident()?;
            } else if self.eat_punct("(") {
                if !self.eat_punct(")") {
                    loop {
                        self.expr()?;
                        if self.eat_punct(")") {
                            break;
                        }
                        self.punct(",")?;
                    }
                }
            } else {
                return Ok(());
            }
        }
    }

    fn primary(&mut self) -> Result<(), ParseError> {
        if self.eat_ident("new") {
            self.qname()?;
            self.punct("(")?;
            return self.punct(")");
        }
        match self.peek().kind {
            TokenKind::Int(_) | TokenKind::Float(_) => {
                self.pos += 1;
                Ok(())
            }
            TokenKind::Ident(_) if !self.peek_at(0).is_ident("return") => self.qname(),
            _ => Err(self.error("expression")),
        }
    }
}

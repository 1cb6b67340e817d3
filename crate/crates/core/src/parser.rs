//! Recursive-descent parser and type checker for CUT-lang.
//!
//! ```text
//! unit    = { class | extern } ;
//! extern  = "extern" "class" IDENT ( ";" | members [";"] ) ;
//! class   = "class" IDENT [ ":" [access] IDENT ] members [";"] ;
//! members = "{" { access ":" | field | method } "}" ;
//! field   = scalar IDENT ";" | IDENT "*" IDENT ";" ;
//! method  = (scalar | "void") IDENT "(" [ param { "," param } ] ")" ( block | ";" ) ;
//! block   = "{" { stmt } "}" ;
//! stmt    = "if" "(" expr ")" block [ "else" ( block | if ) ]
//!         | "while" "(" expr ")" block
//!         | "return" [ expr ] ";"
//!         | "assert" "(" expr ")" ";"
//!         | IDENT "=" expr ";"
//!         | expr ";" ;
//! expr    = binary expression over || && == != < <= > >= + - * /, unary "!",
//!           literals, names and IDENT "->" IDENT "(" ")" calls ;
//! ```

use std::collections::{BTreeSet, HashSet};

use crate::ast::*;
use crate::error::{ParseError, SourceError};
use crate::lexer::{tokenize, Token, TokenKind};
use crate::value::Scalar;

const ACCESS: [&str; 3] = ["public", "private", "protected"];

/// Parses and type-checks a CUT-lang source text.
pub fn parse_source(text: &str, path: &str) -> Result<SourceUnit, SourceError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        params: Vec::new(),
        next_decision: 0,
    };
    let classes = parser.unit()?;
    let mut unit = SourceUnit {
        path: path.to_string(),
        classes,
    };
    check_unit(&mut unit)?;
    Ok(unit)
}

/// Direct dependencies of `class`: the classes named by its reference fields.
pub fn list_dependencies(unit: &SourceUnit, class: &str) -> Result<BTreeSet<DependencyRef>, SourceError> {
    unit.class(class)
        .map(|c| c.dependencies.clone())
        .ok_or_else(|| SourceError::UnknownClass(class.to_string()))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    /// Parameters of the method currently being parsed.
    params: Vec<String>,
    next_decision: u32,
}

type PResult<T> = Result<T, ParseError>;

fn untyped(kind: ExprKind, span: Span) -> Expr {
    Expr {
        kind,
        ty: Type::Void,
        span,
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, off: usize) -> &Token {
        let i = (self.pos + off).min(self.tokens.len() - 1);
        &self.tokens[i]
    }

    fn advance(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn error_at(&self, tok: &Token, message: impl Into<String>) -> ParseError {
        ParseError {
            line: tok.span.line,
            column: tok.span.column,
            message: message.into(),
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let tok = self.peek();
        self.error_at(tok, format!("expected {expected}, found {}", tok.describe()))
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.peek().is_punct(p) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Span> {
        if self.peek().is_punct(p) {
            Ok(self.advance().span)
        } else {
            Err(self.unexpected(&format!("`{p}`")))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.peek().is_ident(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Span> {
        if self.peek().is_ident(kw) {
            Ok(self.advance().span)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match &self.peek().kind {
            TokenKind::Ident(name) if !is_reserved(name) => {
                let name = name.clone();
                Ok((name, self.advance().span))
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn scalar_type(&self) -> Option<ScalarType> {
        match &self.peek().kind {
            TokenKind::Ident(s) => match s.as_str() {
                "int" => Some(ScalarType::Int),
                "bool" => Some(ScalarType::Bool),
                "float" => Some(ScalarType::Float),
                _ => None,
            },
            _ => None,
        }
    }

    fn unit(&mut self) -> PResult<Vec<ClassDecl>> {
        let mut classes = Vec::new();
        while !matches!(self.peek().kind, TokenKind::Eof) {
            classes.push(self.class_decl()?);
        }
        Ok(classes)
    }

    fn class_decl(&mut self) -> PResult<ClassDecl> {
        let start = self.peek().span;
        let is_extern = self.eat_keyword("extern");
        self.expect_keyword("class")?;
        let (name, _) = self.ident()?;
        let mut base = None;
        if !is_extern && self.eat_punct(":") {
            for access in ACCESS {
                if self.eat_keyword(access) {
                    break;
                }
            }
            base = Some(self.ident()?.0);
        }
        let mut class = ClassDecl {
            name,
            base,
            fields: Vec::new(),
            methods: Vec::new(),
            is_extern,
            has_surface: false,
            dependencies: BTreeSet::new(),
            span: start,
        };
        if is_extern && self.eat_punct(";") {
            class.span = start.to(self.prev_span());
            return Ok(class);
        }
        self.expect_punct("{")?;
        class.has_surface = true;
        while !self.peek().is_punct("}") {
            if matches!(self.peek().kind, TokenKind::Eof) {
                return Err(self.unexpected("`}`"));
            }
            self.member(&mut class)?;
        }
        let end = self.expect_punct("}")?;
        class.span = start.to(end);
        self.eat_punct(";");
        Ok(class)
    }

    fn member(&mut self, class: &mut ClassDecl) -> PResult<()> {
        let start = self.peek().span;
        if ACCESS.iter().any(|a| self.peek().is_ident(a)) && self.peek_at(1).is_punct(":") {
            self.advance();
            self.advance();
            return Ok(());
        }
        if let Some(ty) = self.scalar_type() {
            self.advance();
            let (name, _) = self.ident()?;
            if self.peek().is_punct("(") {
                return self.method_rest(class, name, Some(ty), start);
            }
            self.expect_punct(";")?;
            class.fields.push(FieldDecl {
                name,
                ty: FieldType::Scalar(ty),
                span: start.to(self.prev_span()),
            });
            return Ok(());
        }
        if self.eat_keyword("void") {
            let (name, _) = self.ident()?;
            return self.method_rest(class, name, None, start);
        }
        let (type_name, _) = self.ident()?;
        self.expect_punct("*")?;
        let (name, _) = self.ident()?;
        self.expect_punct(";")?;
        class.fields.push(FieldDecl {
            name,
            ty: FieldType::Ref(type_name),
            span: start.to(self.prev_span()),
        });
        Ok(())
    }

    fn method_rest(
        &mut self,
        class: &mut ClassDecl,
        name: String,
        return_type: Option<ScalarType>,
        start: Span,
    ) -> PResult<()> {
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.peek().is_punct(")") {
            loop {
                let pstart = self.peek().span;
                let Some(ty) = self.scalar_type() else {
                    return Err(self.unexpected("parameter type (`int`, `bool` or `float`)"));
                };
                self.advance();
                let (pname, pspan) = self.ident()?;
                params.push(Param {
                    name: pname,
                    ty,
                    span: pstart.to(pspan),
                });
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        self.params = params.iter().map(|p| p.name.clone()).collect();
        self.next_decision = 0;
        let (body, has_body) = if self.eat_punct(";") {
            (Block::default(), false)
        } else {
            (self.block()?, true)
        };
        self.params.clear();
        class.methods.push(MethodDecl {
            name,
            params,
            return_type,
            body,
            has_body,
            span: start.to(self.prev_span()),
        });
        Ok(())
    }

    fn block(&mut self) -> PResult<Block> {
        let start = self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.peek().is_punct("}") {
            if matches!(self.peek().kind, TokenKind::Eof) {
                return Err(self.unexpected("`}`"));
            }
            stmts.push(self.stmt()?);
        }
        let end = self.expect_punct("}")?;
        Ok(Block {
            stmts,
            span: start.to(end),
        })
    }

    fn take_decision(&mut self) -> u32 {
        let d = self.next_decision;
        self.next_decision += 1;
        d
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.peek().span;
        let kind = if self.eat_keyword("if") {
            return self.if_rest(start);
        } else if self.eat_keyword("while") {
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let decision = self.take_decision();
            let body = self.block()?;
            StmtKind::While { decision, cond, body }
        } else if self.eat_keyword("return") {
            let value = if self.peek().is_punct(";") {
                None
            } else {
                Some(self.expr()?)
            };
            self.expect_punct(";")?;
            StmtKind::Return(value)
        } else if self.eat_keyword("assert") {
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            self.expect_punct(";")?;
            let decision = self.take_decision();
            StmtKind::Assert { decision, cond }
        } else if matches!(self.peek().kind, TokenKind::Ident(_)) && self.peek_at(1).is_punct("=") {
            let (name, span) = self.ident()?;
            self.advance();
            let value = self.expr()?;
            self.expect_punct(";")?;
            let kind = if self.params.contains(&name) {
                VarRef::Param(name)
            } else {
                VarRef::Field(name)
            };
            StmtKind::Assign {
                target: LValue { kind, span },
                value,
            }
        } else {
            let e = self.expr()?;
            self.expect_punct(";")?;
            StmtKind::Expr(e)
        };
        Ok(Stmt {
            kind,
            span: start.to(self.prev_span()),
        })
    }

    fn if_rest(&mut self, start: Span) -> PResult<Stmt> {
        self.expect_punct("(")?;
        let cond = self.expr()?;
        self.expect_punct(")")?;
        let decision = self.take_decision();
        let then_block = self.block()?;
        let else_block = if self.eat_keyword("else") {
            if self.peek().is_ident("if") {
                let nested_start = self.advance().span;
                let nested = self.if_rest(nested_start)?;
                Some(Block {
                    span: nested.span,
                    stmts: vec![nested],
                })
            } else {
                Some(self.block()?)
            }
        } else {
            None
        };
        Ok(Stmt {
            kind: StmtKind::If {
                decision,
                cond,
                then_block,
                else_block,
            },
            span: start.to(self.prev_span()),
        })
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn peek_binop(&self) -> Option<BinOp> {
        let TokenKind::Punct(p) = self.peek().kind else {
            return None;
        };
        Some(match p {
            "||" => BinOp::Or,
            "&&" => BinOp::And,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.peek_binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.advance();
            let rhs = self.binary(prec + 1)?;
            let span = lhs.span.to(rhs.span);
            lhs = untyped(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.peek().span;
        if self.eat_punct("!") {
            let operand = self.unary()?;
            let span = start.to(operand.span);
            return Ok(untyped(ExprKind::Unary(UnaryOp::Not, Box::new(operand)), span));
        }
        if self.peek().is_punct("-") {
            let tok = self.advance();
            let lit = self.advance();
            let span = tok.span.to(lit.span);
            return match lit.kind {
                TokenKind::Int(v) if v <= i64::MAX as u64 + 1 => {
                    Ok(untyped(ExprKind::Lit(Scalar::Int((v as i64).wrapping_neg())), span))
                }
                TokenKind::Int(_) => Err(self.error_at(&lit, "integer literal out of range")),
                TokenKind::Float(f) => Ok(untyped(ExprKind::Lit(Scalar::Float(-f)), span)),
                _ => Err(self.error_at(&tok, "unary `-` applies only to numeric literals")),
            };
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let tok = self.peek().clone();
        match &tok.kind {
            TokenKind::Int(v) => {
                self.advance();
                let v = i64::try_from(*v).map_err(|_| self.error_at(&tok, "integer literal out of range"))?;
                Ok(untyped(ExprKind::Lit(Scalar::Int(v)), tok.span))
            }
            TokenKind::Float(f) => {
                self.advance();
                Ok(untyped(ExprKind::Lit(Scalar::Float(*f)), tok.span))
            }
            TokenKind::Punct("(") => {
                self.advance();
                let inner = self.expr()?;
                self.expect_punct(")")?;
                Ok(inner)
            }
            TokenKind::Ident(name) if name == "true" || name == "false" => {
                self.advance();
                Ok(untyped(ExprKind::Lit(Scalar::Bool(name == "true")), tok.span))
            }
            TokenKind::Ident(_) => {
                let (name, span) = self.ident()?;
                if self.eat_punct("->") {
                    let (method, _) = self.ident()?;
                    self.expect_punct("(")?;
                    let end = self.expect_punct(")")?;
                    return Ok(untyped(
                        ExprKind::Call(CallExpr {
                            receiver: name,
                            method,
                            receiver_span: span,
                        }),
                        span.to(end),
                    ));
                }
                let kind = if self.params.contains(&name) {
                    ExprKind::Param(name)
                } else {
                    ExprKind::Field(name)
                };
                Ok(untyped(kind, span))
            }
            _ => Err(self.unexpected("expression")),
        }
    }
}

fn is_reserved(name: &str) -> bool {
    matches!(
        name,
        "class"
            | "extern"
            | "int"
            | "bool"
            | "float"
            | "void"
            | "if"
            | "else"
            | "while"
            | "return"
            | "assert"
            | "true"
            | "false"
    )
}

fn type_error(node: Span, message: impl Into<String>) -> SourceError {
    SourceError::Type {
        node,
        message: message.into(),
    }
}

fn check_unit(unit: &mut SourceUnit) -> Result<(), SourceError> {
    let mut seen = HashSet::new();
    for class in &unit.classes {
        if !seen.insert(class.name.as_str()) {
            return Err(SourceError::DuplicateName {
                kind: "class",
                name: class.name.clone(),
                span: class.span,
            });
        }
    }

    for class in &unit.classes {
        let mut members = HashSet::new();
        for (name, span) in class
            .fields
            .iter()
            .map(|f| (&f.name, f.span))
            .chain(class.methods.iter().map(|m| (&m.name, m.span)))
        {
            if !members.insert(name.as_str()) {
                return Err(SourceError::DuplicateName {
                    kind: "member",
                    name: name.clone(),
                    span,
                });
            }
        }
        for method in &class.methods {
            let mut names = HashSet::new();
            for p in &method.params {
                if !names.insert(p.name.as_str()) {
                    return Err(SourceError::DuplicateName {
                        kind: "parameter",
                        name: p.name.clone(),
                        span: p.span,
                    });
                }
            }
        }
        if let Some(base) = &class.base {
            if unit.class(base).is_none() {
                return Err(SourceError::UnknownClass(base.clone()));
            }
            let mut current = base.as_str();
            let mut hops = 0;
            while let Some(next) = unit.class(current).and_then(|c| c.base.as_deref()) {
                hops += 1;
                if next == class.name || hops > unit.classes.len() {
                    return Err(type_error(class.span, format!("inheritance cycle through `{}`", class.name)));
                }
                current = next;
            }
        }
        for field in &class.fields {
            if let FieldType::Ref(target) = &field.ty {
                if unit.class(target).is_none() {
                    return Err(SourceError::UnknownClass(target.clone()));
                }
            }
        }
    }

    let mut checked = Vec::with_capacity(unit.classes.len());
    for class in &unit.classes {
        let mut class = class.clone();
        class.dependencies = class
            .fields
            .iter()
            .filter_map(|f| match &f.ty {
                FieldType::Ref(t) => Some(DependencyRef {
                    class: t.clone(),
                    is_extern: unit.class(t).is_some_and(|c| c.is_extern),
                }),
                FieldType::Scalar(_) => None,
            })
            .collect();
        for method in &mut class.methods {
            let cx = Checker {
                unit,
                class: unit.class(&class.name).expect("class present"),
                params: &method.params,
                return_type: method.return_type,
            };
            let mut body = std::mem::take(&mut method.body);
            cx.block(&mut body)?;
            method.body = body;
        }
        checked.push(class);
    }
    unit.classes = checked;
    Ok(())
}

struct Checker<'a> {
    unit: &'a SourceUnit,
    class: &'a ClassDecl,
    params: &'a [Param],
    return_type: Option<ScalarType>,
}

impl Checker<'_> {
    fn block(&self, block: &mut Block) -> Result<(), SourceError> {
        for stmt in &mut block.stmts {
            self.stmt(stmt)?;
        }
        Ok(())
    }

    fn predicate(&self, cond: &mut Expr, what: &str) -> Result<(), SourceError> {
        if self.expr(cond)? != Type::BOOL {
            return Err(type_error(cond.span, format!("{what} condition must be bool, found {}", cond.ty)));
        }
        Ok(())
    }

    fn stmt(&self, stmt: &mut Stmt) -> Result<(), SourceError> {
        match &mut stmt.kind {
            StmtKind::If { cond, then_block, else_block, .. } => {
                self.predicate(cond, "if")?;
                self.block(then_block)?;
                if let Some(e) = else_block {
                    self.block(e)?;
                }
            }
            StmtKind::While { cond, body, .. } => {
                self.predicate(cond, "while")?;
                self.block(body)?;
            }
            StmtKind::Assert { cond, .. } => self.predicate(cond, "assert")?,
            StmtKind::Return(value) => match (value, self.return_type) {
                (None, None) => {}
                (None, Some(t)) => return Err(type_error(stmt.span, format!("missing return value of type {t}"))),
                (Some(e), None) => return Err(type_error(e.span, "void method returns a value")),
                (Some(e), Some(t)) => {
                    let found = self.expr(e)?;
                    if !assignable(found, t) {
                        return Err(type_error(e.span, format!("return type mismatch: expected {t}, found {found}")));
                    }
                }
            },
            StmtKind::Assign { target, value } => {
                let target_ty = match &target.kind {
                    VarRef::Param(name) => self.params.iter().find(|p| &p.name == name).map(|p| p.ty),
                    VarRef::Field(name) => match self.unit.lookup_field(self.class, name) {
                        Some(FieldDecl {
                            ty: FieldType::Scalar(t), ..
                        }) => Some(*t),
                        Some(_) => {
                            return Err(type_error(target.span, format!("cannot assign to reference field `{name}`")))
                        }
                        None => None,
                    },
                };
                let Some(target_ty) = target_ty else {
                    return Err(type_error(target.span, format!("unknown name `{}`", target.kind.name())));
                };
                let found = self.expr(value)?;
                if !assignable(found, target_ty) {
                    return Err(type_error(
                        value.span,
                        format!("cannot assign {found} to `{}` of type {target_ty}", target.kind.name()),
                    ));
                }
            }
            StmtKind::Expr(e) => {
                self.expr(e)?;
            }
        }
        Ok(())
    }

    fn expr(&self, expr: &mut Expr) -> Result<Type, SourceError> {
        let span = expr.span;
        let ty = match &mut expr.kind {
            ExprKind::Lit(v) => Type::Scalar(v.ty()),
            ExprKind::Param(name) => {
                let p = self.params.iter().find(|p| &p.name == name).expect("resolved at parse time");
                Type::Scalar(p.ty)
            }
            ExprKind::Field(name) => match self.unit.lookup_field(self.class, name) {
                Some(FieldDecl {
                    ty: FieldType::Scalar(t), ..
                }) => Type::Scalar(*t),
                Some(_) => {
                    return Err(type_error(span, format!("reference field `{name}` can only be used as a call receiver")))
                }
                None => return Err(type_error(span, format!("unknown name `{name}`"))),
            },
            ExprKind::Call(call) => {
                let target = match self.unit.lookup_field(self.class, &call.receiver) {
                    Some(FieldDecl {
                        ty: FieldType::Ref(t), ..
                    }) => t,
                    Some(_) => {
                        return Err(type_error(span, format!("call receiver `{}` is not a reference field", call.receiver)))
                    }
                    None => return Err(type_error(span, format!("unknown call receiver `{}`", call.receiver))),
                };
                let target_class = self.unit.class(target).expect("ref targets checked");
                match self.unit.lookup_method(target_class, &call.method) {
                    Some(m) => m.return_type.map(Type::Scalar).unwrap_or(Type::Void),
                    None => {
                        return Err(type_error(
                            span,
                            format!("class `{target}` has no method `{}`", call.method),
                        ))
                    }
                }
            }
            ExprKind::Unary(UnaryOp::Not, operand) => {
                let t = self.expr(operand)?;
                if t != Type::BOOL {
                    return Err(type_error(operand.span, format!("`!` expects bool, found {t}")));
                }
                Type::BOOL
            }
            ExprKind::Binary(op, lhs, rhs) => {
                let op = *op;
                let l = self.expr(lhs)?;
                let r = self.expr(rhs)?;
                let numeric = |t: Type| t.scalar().is_some_and(|s| s.is_numeric());
                if op.is_logical() {
                    if l != Type::BOOL || r != Type::BOOL {
                        return Err(type_error(span, format!("`{}` expects bool operands, found {l} and {r}", op.symbol())));
                    }
                    Type::BOOL
                } else if matches!(op, BinOp::Eq | BinOp::Ne) && l == Type::BOOL && r == Type::BOOL {
                    if contains_logical(lhs) || contains_logical(rhs) {
                        return Err(type_error(
                            span,
                            format!("`{}` cannot compare `&&`, `||` or `!` expressions", op.symbol()),
                        ));
                    }
                    Type::BOOL
                } else if !numeric(l) || !numeric(r) {
                    return Err(type_error(span, format!("`{}` expects numeric operands, found {l} and {r}", op.symbol())));
                } else if op.is_comparison() {
                    Type::BOOL
                } else if l == Type::FLOAT || r == Type::FLOAT {
                    Type::FLOAT
                } else {
                    Type::INT
                }
            }
        };
        expr.ty = ty;
        Ok(ty)
    }
}

// Keeps condition atoms free of logical operators: a logical operator may
// only appear in the skeleton of a predicate, never under a comparison.
fn contains_logical(expr: &Expr) -> bool {
    let mut found = false;
    expr.walk(&mut |e| found |= e.is_logical());
    found
}

fn assignable(found: Type, target: ScalarType) -> bool {
    match found {
        Type::Scalar(s) => s == target || (s == ScalarType::Int && target == ScalarType::Float),
        Type::Void => false,
    }
}

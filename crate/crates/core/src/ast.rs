//! Syntax tree for CUT-lang, the class subset the generators work on.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::value::Scalar;

/// Byte range plus the 1-based line/column of its first character.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub column: u32,
}

impl Span {
    pub fn to(self, other: Span) -> Span {
        Span {
            start: self.start,
            end: other.end.max(self.end),
            line: self.line,
            column: self.column,
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarType {
    Int,
    Bool,
    Float,
}

impl ScalarType {
    pub fn keyword(self) -> &'static str {
        match self {
            ScalarType::Int => "int",
            ScalarType::Bool => "bool",
            ScalarType::Float => "float",
        }
    }

    pub fn is_numeric(self) -> bool {
        !matches!(self, ScalarType::Bool)
    }
}

impl fmt::Display for ScalarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Static type of an expression. `Void` only appears on calls to void methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Type {
    Scalar(ScalarType),
    Void,
}

impl Type {
    pub const INT: Type = Type::Scalar(ScalarType::Int);
    pub const BOOL: Type = Type::Scalar(ScalarType::Bool);
    pub const FLOAT: Type = Type::Scalar(ScalarType::Float);

    pub fn scalar(self) -> Option<ScalarType> {
        match self {
            Type::Scalar(s) => Some(s),
            Type::Void => None,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Scalar(s) => s.fmt(f),
            Type::Void => f.write_str("void"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "name", rename_all = "lowercase")]
pub enum FieldType {
    Scalar(ScalarType),
    Ref(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceUnit {
    pub path: String,
    pub classes: Vec<ClassDecl>,
}

impl SourceUnit {
    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.iter().find(|c| c.name == name)
    }

    /// Looks a field up on `class` and then along its base chain.
    pub fn lookup_field<'a>(&'a self, class: &'a ClassDecl, name: &str) -> Option<&'a FieldDecl> {
        let mut current = Some(class);
        let mut hops = 0;
        while let Some(c) = current {
            if let Some(f) = c.fields.iter().find(|f| f.name == name) {
                return Some(f);
            }
            hops += 1;
            if hops > self.classes.len() {
                return None;
            }
            current = c.base.as_deref().and_then(|b| self.class(b));
        }
        None
    }

    pub fn lookup_method<'a>(&'a self, class: &'a ClassDecl, name: &str) -> Option<&'a MethodDecl> {
        let mut current = Some(class);
        let mut hops = 0;
        while let Some(c) = current {
            if let Some(m) = c.methods.iter().find(|m| m.name == name) {
                return Some(m);
            }
            hops += 1;
            if hops > self.classes.len() {
                return None;
            }
            current = c.base.as_deref().and_then(|b| self.class(b));
        }
        None
    }

    /// Copy of the unit with every span zeroed, for structural comparison.
    pub fn without_spans(&self) -> SourceUnit {
        let mut unit = self.clone();
        for class in &mut unit.classes {
            class.span = Span::default();
            for f in &mut class.fields {
                f.span = Span::default();
            }
            for m in &mut class.methods {
                m.span = Span::default();
                for p in &mut m.params {
                    p.span = Span::default();
                }
                strip_block(&mut m.body);
            }
        }
        unit
    }

    pub fn structurally_eq(&self, other: &SourceUnit) -> bool {
        let a = self.without_spans();
        let b = other.without_spans();
        a.classes == b.classes
    }
}

fn strip_block(block: &mut Block) {
    block.span = Span::default();
    for stmt in &mut block.stmts {
        stmt.span = Span::default();
        match &mut stmt.kind {
            StmtKind::If { cond, then_block, else_block, .. } => {
                strip_expr(cond);
                strip_block(then_block);
                if let Some(e) = else_block {
                    strip_block(e);
                }
            }
            StmtKind::While { cond, body, .. } => {
                strip_expr(cond);
                strip_block(body);
            }
            StmtKind::Return(Some(e)) | StmtKind::Expr(e) | StmtKind::Assert { cond: e, .. } => {
                strip_expr(e)
            }
            StmtKind::Return(None) => {}
            StmtKind::Assign { target, value } => {
                target.span = Span::default();
                strip_expr(value);
            }
        }
    }
}

fn strip_expr(expr: &mut Expr) {
    expr.span = Span::default();
    match &mut expr.kind {
        ExprKind::Unary(_, e) => strip_expr(e),
        ExprKind::Binary(_, l, r) => {
            strip_expr(l);
            strip_expr(r);
        }
        ExprKind::Call(call) => call.receiver_span = Span::default(),
        _ => {}
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DependencyRef {
    pub class: String,
    #[serde(rename = "extern")]
    pub is_extern: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDecl {
    pub name: String,
    pub base: Option<String>,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
    /// Declared with `extern class`; only its surface is known.
    pub is_extern: bool,
    /// Whether an extern declaration listed its members.
    pub has_surface: bool,
    pub dependencies: BTreeSet<DependencyRef>,
    pub span: Span,
}

impl ClassDecl {
    pub fn field(&self, name: &str) -> Option<&FieldDecl> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn method(&self, name: &str) -> Option<&MethodDecl> {
        self.methods.iter().find(|m| m.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDecl {
    pub name: String,
    pub ty: FieldType,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: ScalarType,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodDecl {
    pub name: String,
    pub params: Vec<Param>,
    /// `None` for `void`.
    pub return_type: Option<ScalarType>,
    pub body: Block,
    /// False when declared as `int f();` without a body.
    pub has_body: bool,
    pub span: Span,
}

impl MethodDecl {
    pub fn param(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

/// Statements. Branching statements carry `decision`, the pre-order ordinal
/// of their predicate among all predicates of the enclosing method.
#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    If {
        decision: u32,
        cond: Expr,
        then_block: Block,
        else_block: Option<Block>,
    },
    While {
        decision: u32,
        cond: Expr,
        body: Block,
    },
    Return(Option<Expr>),
    Assign {
        target: LValue,
        value: Expr,
    },
    Expr(Expr),
    Assert {
        decision: u32,
        cond: Expr,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LValue {
    pub kind: VarRef,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarRef {
    Param(String),
    Field(String),
}

impl VarRef {
    pub fn name(&self) -> &str {
        match self {
            VarRef::Param(n) | VarRef::Field(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub ty: Type,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Lit(Scalar),
    Param(String),
    Field(String),
    Call(CallExpr),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

/// `receiver->method()` where `receiver` is a reference field.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CallExpr {
    pub receiver: String,
    pub method: String,
    pub receiver_span: Span,
}

impl CallExpr {
    pub fn key(&self) -> CallKey {
        CallKey {
            field: self.receiver.clone(),
            method: self.method.clone(),
        }
    }
}

/// Identity of a mockable call target: the dependency field and the method.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CallKey {
    pub field: String,
    pub method: String,
}

impl fmt::Display for CallKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.field, self.method)
    }
}

impl std::str::FromStr for CallKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (field, method) = s
            .split_once("->")
            .or_else(|| s.split_once('.'))
            .ok_or_else(|| format!("expected `field.method`, got `{s}`"))?;
        if field.is_empty() || method.is_empty() {
            return Err(format!("expected `field.method`, got `{s}`"));
        }
        Ok(CallKey {
            field: field.to_string(),
            method: method.to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BinOp {
    And,
    Or,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div => 6,
        }
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne
        )
    }
}

impl Expr {
    /// Visits every node of the expression in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Unary(_, e) => e.walk(f),
            ExprKind::Binary(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
            _ => {}
        }
    }

    pub fn is_logical(&self) -> bool {
        matches!(
            self.kind,
            ExprKind::Unary(UnaryOp::Not, _) | ExprKind::Binary(BinOp::And | BinOp::Or, _, _)
        )
    }
}

impl Block {
    /// Visits every statement in pre-order, entering nested blocks.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        for stmt in &self.stmts {
            f(stmt);
            match &stmt.kind {
                StmtKind::If { then_block, else_block, .. } => {
                    then_block.walk(f);
                    if let Some(e) = else_block {
                        e.walk(f);
                    }
                }
                StmtKind::While { body, .. } => body.walk(f),
                _ => {}
            }
        }
    }

    /// Visits every expression reachable from the block's statements.
    pub fn walk_exprs<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        self.walk(&mut |stmt| match &stmt.kind {
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } | StmtKind::Assert { cond, .. } => {
                cond.walk(f)
            }
            StmtKind::Return(Some(e)) | StmtKind::Expr(e) => e.walk(f),
            StmtKind::Assign { value, .. } => value.walk(f),
            StmtKind::Return(None) => {}
        });
    }
}

impl Serialize for CallKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for CallKey {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

//! Decisions (branch predicates) and their atomic conditions.
//!
//! A decision is the full predicate of an `if`, `while` or `assert`. Its
//! conditions are the maximal subexpressions free of `&&`, `||` and `!`,
//! listed left to right. Negation is decision structure: `!(a < 1)` has the
//! single condition `a < 1`.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::ast::*;
use crate::printer::expr_to_string;
use crate::value::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DecisionKind {
    If,
    While,
    Assert,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DecisionId {
    pub class: String,
    pub method: String,
    pub ordinal: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ConditionId {
    pub decision: u32,
    pub index: u32,
}

/// What determines a condition's outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Driver {
    ParameterDriven,
    CallDriven,
    FieldDriven,
    Mixed,
}

impl fmt::Display for Driver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub id: ConditionId,
    pub atom: Expr,
    pub driver: Driver,
    pub referenced_params: BTreeSet<String>,
    pub referenced_fields: BTreeSet<String>,
    pub referenced_calls: BTreeSet<CallKey>,
    pub compared_literals: BTreeSet<Scalar>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub id: DecisionId,
    pub expr: Expr,
    pub conditions: Vec<Condition>,
    pub site: Span,
    pub kind: DecisionKind,
}

/// The logical skeleton of a decision with conditions replaced by indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    Atom(usize),
    Not(Box<Predicate>),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
}

impl Predicate {
    pub fn of(expr: &Expr) -> Predicate {
        let mut next = 0;
        Self::build(expr, &mut next)
    }

    fn build(expr: &Expr, next: &mut usize) -> Predicate {
        match &expr.kind {
            ExprKind::Unary(UnaryOp::Not, e) => Predicate::Not(Box::new(Self::build(e, next))),
            ExprKind::Binary(BinOp::And, l, r) => {
                let l = Self::build(l, next);
                Predicate::And(Box::new(l), Box::new(Self::build(r, next)))
            }
            ExprKind::Binary(BinOp::Or, l, r) => {
                let l = Self::build(l, next);
                Predicate::Or(Box::new(l), Box::new(Self::build(r, next)))
            }
            _ => {
                *next += 1;
                Predicate::Atom(*next - 1)
            }
        }
    }

    /// Evaluates the skeleton over known condition values.
    pub fn eval(&self, values: &[bool]) -> bool {
        match self {
            Predicate::Atom(i) => values[*i],
            Predicate::Not(p) => !p.eval(values),
            Predicate::And(l, r) => l.eval(values) && r.eval(values),
            Predicate::Or(l, r) => l.eval(values) || r.eval(values),
        }
    }

    /// Rebuilds an expression from the skeleton and the condition atoms.
    pub fn reassemble(&self, atoms: &[Expr]) -> Expr {
        let node = |kind| Expr {
            kind,
            ty: Type::BOOL,
            span: Span::default(),
        };
        match self {
            Predicate::Atom(i) => atoms[*i].clone(),
            Predicate::Not(p) => node(ExprKind::Unary(UnaryOp::Not, Box::new(p.reassemble(atoms)))),
            Predicate::And(l, r) => node(ExprKind::Binary(
                BinOp::And,
                Box::new(l.reassemble(atoms)),
                Box::new(r.reassemble(atoms)),
            )),
            Predicate::Or(l, r) => node(ExprKind::Binary(
                BinOp::Or,
                Box::new(l.reassemble(atoms)),
                Box::new(r.reassemble(atoms)),
            )),
        }
    }
}

/// Condition atoms of a predicate, left to right.
pub fn atoms(expr: &Expr) -> Vec<&Expr> {
    let mut out = Vec::new();
    collect_atoms(expr, &mut out);
    out
}

fn collect_atoms<'a>(expr: &'a Expr, out: &mut Vec<&'a Expr>) {
    match &expr.kind {
        ExprKind::Unary(UnaryOp::Not, e) => collect_atoms(e, out),
        ExprKind::Binary(BinOp::And | BinOp::Or, l, r) => {
            collect_atoms(l, out);
            collect_atoms(r, out);
        }
        _ => out.push(expr),
    }
}

/// Number of condition atoms in `expr`.
pub fn atom_count(expr: &Expr) -> usize {
    match &expr.kind {
        ExprKind::Unary(UnaryOp::Not, e) => atom_count(e),
        ExprKind::Binary(BinOp::And | BinOp::Or, l, r) => atom_count(l) + atom_count(r),
        _ => 1,
    }
}

/// One decision per `if`/`while`/`assert` predicate, in pre-order.
pub fn extract_decisions(class: &str, method: &MethodDecl) -> Vec<Decision> {
    let mut out = Vec::new();
    method.body.walk(&mut |stmt| {
        let (decision, cond, kind) = match &stmt.kind {
            StmtKind::If { decision, cond, .. } => (*decision, cond, DecisionKind::If),
            StmtKind::While { decision, cond, .. } => (*decision, cond, DecisionKind::While),
            StmtKind::Assert { decision, cond } => (*decision, cond, DecisionKind::Assert),
            _ => return,
        };
        let conditions = atoms(cond)
            .into_iter()
            .enumerate()
            .map(|(index, atom)| {
                build_condition(
                    ConditionId {
                        decision,
                        index: index as u32,
                    },
                    atom,
                )
            })
            .collect();
        out.push(Decision {
            id: DecisionId {
                class: class.to_string(),
                method: method.name.clone(),
                ordinal: decision,
            },
            expr: cond.clone(),
            conditions,
            site: cond.span,
            kind,
        });
    });
    out
}

fn build_condition(id: ConditionId, atom: &Expr) -> Condition {
    let mut cond = Condition {
        id,
        atom: atom.clone(),
        driver: Driver::FieldDriven,
        referenced_params: BTreeSet::new(),
        referenced_fields: BTreeSet::new(),
        referenced_calls: BTreeSet::new(),
        compared_literals: BTreeSet::new(),
    };
    atom.walk(&mut |e| match &e.kind {
        ExprKind::Param(n) => {
            cond.referenced_params.insert(n.clone());
        }
        ExprKind::Field(n) => {
            cond.referenced_fields.insert(n.clone());
        }
        ExprKind::Call(c) => {
            cond.referenced_calls.insert(c.key());
        }
        ExprKind::Lit(v) => {
            cond.compared_literals.insert(*v);
        }
        _ => {}
    });
    cond.driver = classify_condition(&cond);
    cond
}

/// Parameter-driven atoms read parameters but make no calls, call-driven
/// atoms make calls but read no parameters, atoms with neither are
/// field-driven (constants included) and the rest are mixed.
pub fn classify_condition(cond: &Condition) -> Driver {
    match (cond.referenced_params.is_empty(), cond.referenced_calls.is_empty()) {
        (false, true) => Driver::ParameterDriven,
        (true, false) => Driver::CallDriven,
        (true, true) => Driver::FieldDriven,
        (false, false) => Driver::Mixed,
    }
}

/// JSON view of a method's decision table.
#[derive(Debug, Serialize)]
pub struct DecisionTable {
    pub class: String,
    pub method: String,
    pub decisions: Vec<DecisionRow>,
}

#[derive(Debug, Serialize)]
pub struct DecisionRow {
    pub ordinal: u32,
    pub kind: DecisionKind,
    pub line: u32,
    pub column: u32,
    pub expr: String,
    pub conditions: Vec<ConditionRow>,
}

#[derive(Debug, Serialize)]
pub struct ConditionRow {
    pub index: u32,
    pub atom: String,
    pub driver: Driver,
    pub params: Vec<String>,
    pub fields: Vec<String>,
    pub calls: Vec<String>,
    pub literals: Vec<Scalar>,
}

impl DecisionTable {
    pub fn new(class: &str, method: &str, decisions: &[Decision]) -> Self {
        DecisionTable {
            class: class.to_string(),
            method: method.to_string(),
            decisions: decisions
                .iter()
                .map(|d| DecisionRow {
                    ordinal: d.id.ordinal,
                    kind: d.kind,
                    line: d.site.line,
                    column: d.site.column,
                    expr: expr_to_string(&d.expr),
                    conditions: d
                        .conditions
                        .iter()
                        .map(|c| ConditionRow {
                            index: c.id.index,
                            atom: expr_to_string(&c.atom),
                            driver: c.driver,
                            params: c.referenced_params.iter().cloned().collect(),
                            fields: c.referenced_fields.iter().cloned().collect(),
                            calls: c.referenced_calls.iter().map(|k| k.to_string()).collect(),
                            literals: c.compared_literals.iter().copied().collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_source;

    fn decisions_of(src: &str) -> Vec<Decision> {
        let unit = parse_source(src, "t").unwrap();
        let class = unit.classes.last().unwrap();
        extract_decisions(&class.name, &class.methods[0])
    }

    fn atom_texts(d: &Decision) -> Vec<String> {
        d.conditions.iter().map(|c| expr_to_string(&c.atom)).collect()
    }

    const DEP: &str = "class C { int getStatus() { return 0; } int f() { return 0; } }\n";

    #[test]
    fn empty_body_has_no_decisions() {
        assert!(decisions_of("class A { void f() {} }").is_empty());
    }

    #[test]
    fn conjunction_splits_into_two_conditions() {
        let src = format!(
            "{DEP}class A {{ C* c; int f(int x) {{ if (x > 0 && c->getStatus() == 3) {{ return 1; }} else {{ return 0; }} }} }}"
        );
        let ds = decisions_of(&src);
        assert_eq!(ds.len(), 1);
        assert_eq!(atom_texts(&ds[0]), ["x > 0", "c->getStatus() == 3"]);
        assert_eq!(ds[0].conditions[0].driver, Driver::ParameterDriven);
        assert_eq!(ds[0].conditions[1].driver, Driver::CallDriven);
        assert_eq!(ds[0].conditions[1].compared_literals.iter().copied().collect::<Vec<_>>(), [Scalar::Int(3)]);
    }

    #[test]
    fn negation_is_structure_not_a_condition() {
        let ds = decisions_of("class A { void f(int a, int b) { if (!(a < 1) || b == 2) {} } }");
        assert_eq!(atom_texts(&ds[0]), ["a < 1", "b == 2"]);
        assert_eq!(
            Predicate::of(&ds[0].expr),
            Predicate::Or(
                Box::new(Predicate::Not(Box::new(Predicate::Atom(0)))),
                Box::new(Predicate::Atom(1))
            )
        );
    }

    #[test]
    fn classification_covers_all_drivers() {
        let src = format!(
            "{DEP}class A {{ C* c; int n; void f(int x) {{ if (x > 0) {{}} if (c->getStatus() == 3) {{}} \
             if (x + c->f() > 0) {{}} if (n < 4) {{}} assert(true); }} }}"
        );
        let drivers: Vec<_> = decisions_of(&src).iter().map(|d| d.conditions[0].driver).collect();
        assert_eq!(
            drivers,
            [
                Driver::ParameterDriven,
                Driver::CallDriven,
                Driver::Mixed,
                Driver::FieldDriven,
                Driver::FieldDriven
            ]
        );
    }

    #[test]
    fn bool_valued_atoms_are_conditions() {
        let ds = decisions_of("class A { bool flag; void f(bool p) { while (p && !flag) { p = false; } } }");
        assert_eq!(ds[0].kind, DecisionKind::While);
        assert_eq!(atom_texts(&ds[0]), ["p", "flag"]);
    }

    #[test]
    fn ordinals_follow_parser_numbering() {
        let ds = decisions_of(
            "class A { void f(int x) { if (x > 0) { assert(x != 3); } while (x < 10) { x = x + 1; } } }",
        );
        let ords: Vec<_> = ds.iter().map(|d| d.id.ordinal).collect();
        assert_eq!(ords, [0, 1, 2]);
        assert_eq!(ds[1].kind, DecisionKind::Assert);
    }
}

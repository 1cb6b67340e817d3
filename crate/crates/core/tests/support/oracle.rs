//! A second evaluator, written against the language rules rather than the
//! main interpreter. Each predicate's atoms are listed up front and an atom
//! is identified by address while the predicate is evaluated.

use std::collections::{BTreeMap, BTreeSet};

use ultgen_core::ast::{
    BinOp, Block, CallKey, ClassDecl, ExprKind, FieldType, MethodDecl, SourceUnit, StmtKind, Type, UnaryOp, VarRef,
};
use ultgen_core::ast::{Expr, ScalarType, Stmt};
use ultgen_core::cases::TestCase;
use ultgen_core::exec::{Entity, Event, Outcome, Site, Terminal};
use ultgen_core::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub outcomes: BTreeSet<Outcome>,
    pub terminal: Terminal,
    pub return_value: Option<Scalar>,
}

enum Control {
    Continue,
    Returned(Option<Scalar>),
    Stopped(Event),
}

struct State<'u> {
    unit: &'u SourceUnit,
    class: &'u ClassDecl,
    locals: BTreeMap<String, Scalar>,
    fields: BTreeMap<String, Scalar>,
    scripts: BTreeMap<CallKey, (Vec<Scalar>, usize)>,
    seen: BTreeSet<Outcome>,
    fuel_left: u64,
}

fn field_ty(unit: &SourceUnit, class: &ClassDecl, name: &str) -> ScalarType {
    match unit.lookup_field(class, name).map(|f| &f.ty) {
        Some(FieldType::Scalar(t)) => *t,
        other => panic!("field {name} is not scalar: {other:?}"),
    }
}

fn widen(v: Scalar, to: ScalarType) -> Scalar {
    match (v, to) {
        (Scalar::Int(i), ScalarType::Float) => Scalar::Float(i as f64),
        (v, _) => v,
    }
}

fn flatten<'e>(e: &'e Expr, out: &mut Vec<&'e Expr>) {
    match &e.kind {
        ExprKind::Unary(UnaryOp::Not, inner) => flatten(inner, out),
        ExprKind::Binary(BinOp::And | BinOp::Or, l, r) => {
            flatten(l, out);
            flatten(r, out);
        }
        _ => out.push(e),
    }
}

impl<'u> State<'u> {
    /// Charges one unit; `false` once the budget is gone.
    fn charge(&mut self) -> bool {
        if self.fuel_left == 0 {
            return false;
        }
        self.fuel_left -= 1;
        true
    }

    fn run_block(&mut self, b: &'u Block) -> Control {
        for s in &b.stmts {
            match self.run_stmt(s) {
                Control::Continue => {}
                done => return done,
            }
        }
        Control::Continue
    }

    fn run_stmt(&mut self, s: &'u Stmt) -> Control {
        if !self.charge() {
            return Control::Stopped(Event::FuelExhausted);
        }
        match &s.kind {
            StmtKind::If {
                decision,
                cond,
                then_block,
                else_block,
            } => match self.predicate(*decision, cond) {
                Err(e) => Control::Stopped(e),
                Ok(true) => self.run_block(then_block),
                Ok(false) => else_block.as_ref().map_or(Control::Continue, |b| self.run_block(b)),
            },
            StmtKind::While { decision, cond, body } => loop {
                match self.predicate(*decision, cond) {
                    Err(e) => return Control::Stopped(e),
                    Ok(false) => return Control::Continue,
                    Ok(true) => {}
                }
                match self.run_block(body) {
                    Control::Continue => {}
                    done => return done,
                }
                if !self.charge() {
                    return Control::Stopped(Event::FuelExhausted);
                }
            },
            StmtKind::Assert { decision, cond } => match self.predicate(*decision, cond) {
                Err(e) => Control::Stopped(e),
                Ok(true) => Control::Continue,
                Ok(false) => Control::Stopped(Event::AssertFailure {
                    site: Site {
                        line: s.span.line,
                        column: s.span.column,
                    },
                }),
            },
            StmtKind::Return(None) => Control::Returned(None),
            StmtKind::Return(Some(e)) => match self.eval(e) {
                Ok(v) => Control::Returned(v),
                Err(ev) => Control::Stopped(ev),
            },
            StmtKind::Assign { target, value } => {
                let v = match self.eval(value) {
                    Ok(v) => v.expect("assigned value"),
                    Err(ev) => return Control::Stopped(ev),
                };
                match &target.kind {
                    VarRef::Param(n) => {
                        let ty = self.locals[n].ty();
                        self.locals.insert(n.clone(), widen(v, ty));
                    }
                    VarRef::Field(n) => {
                        let ty = field_ty(self.unit, self.class, n);
                        self.fields.insert(n.clone(), widen(v, ty));
                    }
                }
                Control::Continue
            }
            StmtKind::Expr(e) => match self.eval(e) {
                Ok(_) => Control::Continue,
                Err(ev) => Control::Stopped(ev),
            },
        }
    }

    fn predicate(&mut self, decision: u32, cond: &'u Expr) -> Result<bool, Event> {
        let mut atoms = Vec::new();
        flatten(cond, &mut atoms);
        let v = self.logic(decision, cond, &atoms)?;
        self.seen.insert(Outcome {
            entity: Entity::Decision(decision),
            value: v,
        });
        Ok(v)
    }

    fn logic(&mut self, decision: u32, e: &'u Expr, atoms: &[&'u Expr]) -> Result<bool, Event> {
        match &e.kind {
            ExprKind::Unary(UnaryOp::Not, inner) => self.logic(decision, inner, atoms).map(|b| !b),
            ExprKind::Binary(BinOp::And, l, r) => Ok(self.logic(decision, l, atoms)? && self.logic(decision, r, atoms)?),
            ExprKind::Binary(BinOp::Or, l, r) => Ok(self.logic(decision, l, atoms)? || self.logic(decision, r, atoms)?),
            _ => {
                let index = atoms.iter().position(|a| std::ptr::eq(*a, e)).expect("atom listed");
                let b = match self.eval(e)? {
                    Some(Scalar::Bool(b)) => b,
                    other => panic!("condition is not bool: {other:?}"),
                };
                self.seen.insert(Outcome {
                    entity: Entity::Condition {
                        decision,
                        index: index as u32,
                    },
                    value: b,
                });
                Ok(b)
            }
        }
    }

    fn eval(&mut self, e: &'u Expr) -> Result<Option<Scalar>, Event> {
        let site = Site {
            line: e.span.line,
            column: e.span.column,
        };
        Ok(Some(match &e.kind {
            ExprKind::Lit(v) => *v,
            ExprKind::Param(n) => self.locals[n],
            ExprKind::Field(n) => match self.fields.get(n) {
                Some(v) => *v,
                None => match field_ty(self.unit, self.class, n) {
                    ScalarType::Int => Scalar::Int(0),
                    ScalarType::Bool => Scalar::Bool(false),
                    ScalarType::Float => Scalar::Float(0.0),
                },
            },
            ExprKind::Call(call) => {
                let Type::Scalar(ret) = e.ty else { return Ok(None) };
                let key = call.key();
                let unmocked = Event::UnmockedCall {
                    site,
                    call: format!("{}->{}()", call.receiver, call.method),
                };
                let Some((values, used)) = self.scripts.get_mut(&key) else {
                    return Err(unmocked);
                };
                if values.is_empty() {
                    return Err(unmocked);
                }
                let v = values[(*used).min(values.len() - 1)];
                *used += 1;
                widen(v, ret)
            }
            ExprKind::Unary(UnaryOp::Not, inner) => match self.eval(inner)? {
                Some(Scalar::Bool(b)) => Scalar::Bool(!b),
                other => panic!("`!` on {other:?}"),
            },
            ExprKind::Binary(BinOp::And, l, r) => {
                let a = self.eval(l)?.and_then(|v| v.as_bool()).expect("bool");
                Scalar::Bool(a && self.eval(r)?.and_then(|v| v.as_bool()).expect("bool"))
            }
            ExprKind::Binary(BinOp::Or, l, r) => {
                let a = self.eval(l)?.and_then(|v| v.as_bool()).expect("bool");
                Scalar::Bool(a || self.eval(r)?.and_then(|v| v.as_bool()).expect("bool"))
            }
            ExprKind::Binary(op, l, r) => {
                let a = self.eval(l)?.expect("operand");
                let b = self.eval(r)?.expect("operand");
                arith(*op, a, b).ok_or(Event::DivByZero { site })?
            }
        }))
    }
}

fn arith(op: BinOp, a: Scalar, b: Scalar) -> Option<Scalar> {
    let cmp = |o: std::cmp::Ordering| -> bool {
        use std::cmp::Ordering::*;
        match op {
            BinOp::Lt => o == Less,
            BinOp::Le => o != Greater,
            BinOp::Gt => o == Greater,
            BinOp::Ge => o != Less,
            BinOp::Eq => o == Equal,
            BinOp::Ne => o != Equal,
            _ => unreachable!(),
        }
    };
    let is_cmp = matches!(op, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne);
    match (a, b) {
        (Scalar::Bool(x), Scalar::Bool(y)) => Some(Scalar::Bool(match op {
            BinOp::Eq => x == y,
            BinOp::Ne => x != y,
            _ => panic!("bool operand for {op:?}"),
        })),
        (Scalar::Int(x), Scalar::Int(y)) => Some(if is_cmp {
            Scalar::Bool(cmp(x.cmp(&y)))
        } else {
            Scalar::Int(match op {
                BinOp::Add => x.wrapping_add(y),
                BinOp::Sub => x.wrapping_sub(y),
                BinOp::Mul => x.wrapping_mul(y),
                BinOp::Div => {
                    if y == 0 {
                        return None;
                    }
                    x.wrapping_div(y)
                }
                _ => unreachable!(),
            })
        }),
        _ => {
            let f = |v: Scalar| match v {
                Scalar::Int(i) => i as f64,
                Scalar::Float(x) => x,
                Scalar::Bool(_) => panic!("bool in arithmetic"),
            };
            let (x, y) = (f(a), f(b));
            Some(if is_cmp {
                // IEEE comparisons: every ordered test is false with a NaN.
                Scalar::Bool(match x.partial_cmp(&y) {
                    Some(o) => cmp(o),
                    None => op == BinOp::Ne,
                })
            } else {
                Scalar::Float(match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    _ => unreachable!(),
                })
            })
        }
    }
}

/// Runs `case` on `class.method` with `fuel` units.
pub fn oracle_run(unit: &SourceUnit, class: &str, method: &str, case: &TestCase, fuel: u64) -> OracleResult {
    let class_decl = unit.class(class).expect("class");
    let m: &MethodDecl = class_decl.method(method).expect("method");
    let mut st = State {
        unit,
        class: class_decl,
        locals: m
            .params
            .iter()
            .map(|p| (p.name.clone(), widen(case.params[&p.name], p.ty)))
            .collect(),
        fields: case
            .fields
            .iter()
            .map(|(n, v)| (n.clone(), widen(*v, field_ty(unit, class_decl, n))))
            .collect(),
        scripts: case.mocks.iter().map(|(k, v)| (k.clone(), (v.clone(), 0))).collect(),
        seen: BTreeSet::new(),
        fuel_left: fuel.max(1),
    };
    let (terminal, ret) = match st.run_block(&m.body) {
        Control::Continue => (Terminal::Normal, None),
        Control::Returned(v) => (Terminal::Normal, v),
        Control::Stopped(e) => (Terminal::Crashed(e), None),
    };
    let return_value = match (ret, m.return_type) {
        (Some(v), Some(t)) => Some(widen(v, t)),
        _ => None,
    };
    OracleResult {
        outcomes: st.seen,
        terminal,
        return_value,
    }
}

use std::collections::{BTreeSet, HashMap};

use crate::ast::*;
use crate::cases::TestCase;
use crate::decision::atom_count;
use crate::value::Scalar;

use super::{Entity, Event, ExecError, ExecutionTrace, MethodTarget, Outcome, Site, Terminal};

/// Runs `case` against the target method body.
///
/// `&&`/`||` short-circuit, and a condition is only recorded when it was
/// evaluated. Integer division by zero, failed asserts and calls without a
/// script stop execution with a crash event; so does running out of `fuel`
/// (one unit per executed statement and per loop iteration). Crashes are part
/// of the trace; only a case that does not match the method is an error.
pub fn evaluate_case(target: &MethodTarget<'_>, case: &TestCase, fuel: u64) -> Result<ExecutionTrace, ExecError> {
    let mut machine = Machine::prepare(target, case, fuel)?;
    let result = machine.block(&target.method.body);
    let (terminal, events, return_value) = match result {
        Ok(Flow::Return(v)) => (Terminal::Normal, Vec::new(), v),
        Ok(Flow::Next) => (Terminal::Normal, Vec::new(), None),
        Err(event) => (Terminal::Crashed(event.clone()), vec![event], None),
    };
    let return_value = match (return_value, target.method.return_type) {
        (Some(v), Some(t)) => v.coerce(t),
        _ => None,
    };
    Ok(ExecutionTrace {
        case_id: case.id.clone(),
        class: target.class.name.clone(),
        method: target.method.name.clone(),
        fingerprint: target.fingerprint.clone(),
        outcomes: machine.outcomes,
        events,
        terminal,
        steps: machine.steps,
        return_value,
    })
}

enum Flow {
    Next,
    Return(Option<Scalar>),
}

struct Script<'c> {
    values: &'c [Scalar],
    next: usize,
}

struct Machine<'a, 'c> {
    target: &'a MethodTarget<'a>,
    params: HashMap<&'a str, Scalar>,
    fields: HashMap<String, Scalar>,
    scripts: HashMap<CallKey, Script<'c>>,
    outcomes: BTreeSet<Outcome>,
    steps: u64,
    fuel: u64,
}

fn violation(case: &TestCase, message: String) -> ExecError {
    ExecError::ContractViolation {
        case: case.id.clone(),
        message,
    }
}

impl<'a, 'c> Machine<'a, 'c> {
    fn prepare(target: &'a MethodTarget<'a>, case: &'c TestCase, fuel: u64) -> Result<Self, ExecError> {
        if case.class != target.class.name || case.method != target.method.name {
            return Err(violation(
                case,
                format!("case targets {}.{}, not {}", case.class, case.method, target.qualified_name()),
            ));
        }
        let mut params = HashMap::new();
        for p in &target.method.params {
            let value = case
                .params
                .get(&p.name)
                .ok_or_else(|| violation(case, format!("missing parameter `{}`", p.name)))?;
            let value = value
                .coerce(p.ty)
                .ok_or_else(|| violation(case, format!("parameter `{}` expects {}, got {value}", p.name, p.ty)))?;
            params.insert(p.name.as_str(), value);
        }
        if let Some(extra) = case.params.keys().find(|k| target.method.param(k).is_none()) {
            return Err(violation(case, format!("unknown parameter `{extra}`")));
        }

        let mut fields = HashMap::new();
        for (name, value) in &case.fields {
            let ty = match target.unit.lookup_field(target.class, name) {
                Some(FieldDecl {
                    ty: FieldType::Scalar(t), ..
                }) => *t,
                _ => return Err(violation(case, format!("`{name}` is not a scalar field of {}", target.class.name))),
            };
            let value = value
                .coerce(ty)
                .ok_or_else(|| violation(case, format!("field `{name}` expects {ty}, got {value}")))?;
            fields.insert(name.clone(), value);
        }

        let mut scripts = HashMap::new();
        for (key, values) in &case.mocks {
            let ret = mock_return_type(target, key).map_err(|m| violation(case, m))?;
            if let Some(bad) = values.iter().find(|v| v.coerce(ret).is_none()) {
                return Err(violation(case, format!("mock `{key}` returns {ret}, script has {bad}")));
            }
            scripts.insert(key.clone(), Script { values, next: 0 });
        }

        Ok(Machine {
            target,
            params,
            fields,
            scripts,
            outcomes: BTreeSet::new(),
            steps: 0,
            fuel: fuel.max(1),
        })
    }

    fn tick(&mut self) -> Result<(), Event> {
        self.steps += 1;
        if self.steps > self.fuel {
            Err(Event::FuelExhausted)
        } else {
            Ok(())
        }
    }

    fn block(&mut self, block: &Block) -> Result<Flow, Event> {
        for stmt in &block.stmts {
            if let Flow::Return(v) = self.stmt(stmt)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Next)
    }

    fn stmt(&mut self, stmt: &Stmt) -> Result<Flow, Event> {
        self.tick()?;
        match &stmt.kind {
            StmtKind::If {
                decision,
                cond,
                then_block,
                else_block,
            } => {
                if self.decision(*decision, cond)? {
                    self.block(then_block)
                } else if let Some(e) = else_block {
                    self.block(e)
                } else {
                    Ok(Flow::Next)
                }
            }
            StmtKind::While { decision, cond, body } => {
                while self.decision(*decision, cond)? {
                    if let Flow::Return(v) = self.block(body)? {
                        return Ok(Flow::Return(v));
                    }
                    self.tick()?;
                }
                Ok(Flow::Next)
            }
            StmtKind::Assert { decision, cond } => {
                if self.decision(*decision, cond)? {
                    Ok(Flow::Next)
                } else {
                    Err(Event::AssertFailure {
                        site: Site::from(stmt.span),
                    })
                }
            }
            StmtKind::Return(value) => {
                let v = match value {
                    Some(e) => Some(self.value(e)?),
                    None => None,
                };
                Ok(Flow::Return(v))
            }
            StmtKind::Assign { target, value } => {
                let v = self.value(value)?;
                match &target.kind {
                    VarRef::Param(name) => {
                        let slot = self.params.get_mut(name.as_str()).expect("checked parameter");
                        *slot = v.coerce(slot.ty()).expect("type-checked assignment");
                    }
                    VarRef::Field(name) => {
                        let ty = self.field_type(name);
                        self.fields.insert(name.clone(), v.coerce(ty).expect("type-checked assignment"));
                    }
                }
                Ok(Flow::Next)
            }
            StmtKind::Expr(e) => {
                self.eval(e)?;
                Ok(Flow::Next)
            }
        }
    }

    fn field_type(&self, name: &str) -> ScalarType {
        match self.target.unit.lookup_field(self.target.class, name) {
            Some(FieldDecl {
                ty: FieldType::Scalar(t), ..
            }) => *t,
            _ => unreachable!("type checker admits only scalar field reads"),
        }
    }

    fn decision(&mut self, decision: u32, cond: &Expr) -> Result<bool, Event> {
        let v = self.predicate(decision, cond, 0)?;
        self.outcomes.insert(Outcome {
            entity: Entity::Decision(decision),
            value: v,
        });
        Ok(v)
    }

    /// Evaluates the logical skeleton; `first` is the index of the first
    /// condition atom inside `expr`.
    fn predicate(&mut self, decision: u32, expr: &Expr, first: usize) -> Result<bool, Event> {
        match &expr.kind {
            ExprKind::Unary(UnaryOp::Not, e) => Ok(!self.predicate(decision, e, first)?),
            ExprKind::Binary(BinOp::And, l, r) => {
                if !self.predicate(decision, l, first)? {
                    return Ok(false);
                }
                self.predicate(decision, r, first + atom_count(l))
            }
            ExprKind::Binary(BinOp::Or, l, r) => {
                if self.predicate(decision, l, first)? {
                    return Ok(true);
                }
                self.predicate(decision, r, first + atom_count(l))
            }
            _ => {
                let v = self.value(expr)?.as_bool().expect("type-checked predicate");
                self.outcomes.insert(Outcome {
                    entity: Entity::Condition {
                        decision,
                        index: first as u32,
                    },
                    value: v,
                });
                Ok(v)
            }
        }
    }

    fn value(&mut self, expr: &Expr) -> Result<Scalar, Event> {
        Ok(self.eval(expr)?.expect("type checker rejects void values"))
    }

    fn eval(&mut self, expr: &Expr) -> Result<Option<Scalar>, Event> {
        let v = match &expr.kind {
            ExprKind::Lit(v) => *v,
            ExprKind::Param(name) => self.params[name.as_str()],
            ExprKind::Field(name) => match self.fields.get(name) {
                Some(v) => *v,
                None => Scalar::default_for(self.field_type(name)),
            },
            ExprKind::Call(call) => return self.call(call, expr),
            ExprKind::Unary(UnaryOp::Not, e) => Scalar::Bool(!self.value(e)?.as_bool().expect("bool operand")),
            ExprKind::Binary(BinOp::And, l, r) => {
                let b = self.value(l)?.as_bool().expect("bool operand") && self.value(r)?.as_bool().expect("bool operand");
                Scalar::Bool(b)
            }
            ExprKind::Binary(BinOp::Or, l, r) => {
                let b = self.value(l)?.as_bool().expect("bool operand") || self.value(r)?.as_bool().expect("bool operand");
                Scalar::Bool(b)
            }
            ExprKind::Binary(op, l, r) => {
                let a = self.value(l)?;
                let b = self.value(r)?;
                binary(*op, a, b).ok_or(Event::DivByZero {
                    site: Site::from(expr.span),
                })?
            }
        };
        Ok(Some(v))
    }

    fn call(&mut self, call: &CallExpr, expr: &Expr) -> Result<Option<Scalar>, Event> {
        let Type::Scalar(ret) = expr.ty else {
            return Ok(None);
        };
        let unmocked = || Event::UnmockedCall {
            site: Site::from(expr.span),
            call: format!("{}->{}()", call.receiver, call.method),
        };
        let script = self.scripts.get_mut(&call.key()).ok_or_else(unmocked)?;
        if script.values.is_empty() {
            return Err(unmocked());
        }
        let idx = script.next.min(script.values.len() - 1);
        script.next += 1;
        Ok(Some(script.values[idx].coerce(ret).expect("script types checked")))
    }
}

/// Return type of a mockable call, or a description of why `key` is not one.
pub(crate) fn mock_return_type(target: &MethodTarget<'_>, key: &CallKey) -> Result<ScalarType, String> {
    let dep = match target.unit.lookup_field(target.class, &key.field) {
        Some(FieldDecl {
            ty: FieldType::Ref(dep), ..
        }) => dep,
        _ => return Err(format!("`{}` is not a dependency field of {}", key.field, target.class.name)),
    };
    let dep_class = target.unit.class(dep).ok_or_else(|| format!("unknown class `{dep}`"))?;
    match target.unit.lookup_method(dep_class, &key.method) {
        Some(MethodDecl {
            return_type: Some(t), ..
        }) => Ok(*t),
        Some(_) => Err(format!("`{dep}::{}` returns void and cannot be scripted", key.method)),
        None => Err(format!("`{dep}` has no method `{}`", key.method)),
    }
}

/// Non-logical binary operators. `None` signals integer division by zero.
pub(crate) fn binary(op: BinOp, a: Scalar, b: Scalar) -> Option<Scalar> {
    use Scalar::*;
    Some(match (a, b) {
        (Int(x), Int(y)) => match op {
            BinOp::Add => Int(x.wrapping_add(y)),
            BinOp::Sub => Int(x.wrapping_sub(y)),
            BinOp::Mul => Int(x.wrapping_mul(y)),
            BinOp::Div if y == 0 => return None,
            BinOp::Div => Int(x.wrapping_div(y)),
            BinOp::Lt => Bool(x < y),
            BinOp::Le => Bool(x <= y),
            BinOp::Gt => Bool(x > y),
            BinOp::Ge => Bool(x >= y),
            BinOp::Eq => Bool(x == y),
            BinOp::Ne => Bool(x != y),
            BinOp::And | BinOp::Or => unreachable!("logical operators handled by the caller"),
        },
        (Bool(x), Bool(y)) => match op {
            BinOp::Eq => Bool(x == y),
            BinOp::Ne => Bool(x != y),
            _ => unreachable!("type checker admits only ==/!= on bools"),
        },
        _ => {
            let x = a.as_f64().expect("numeric operand");
            let y = b.as_f64().expect("numeric operand");
            match op {
                BinOp::Add => Float(x + y),
                BinOp::Sub => Float(x - y),
                BinOp::Mul => Float(x * y),
                BinOp::Div => Float(x / y),
                BinOp::Lt => Bool(x < y),
                BinOp::Le => Bool(x <= y),
                BinOp::Gt => Bool(x > y),
                BinOp::Ge => Bool(x >= y),
                BinOp::Eq => Bool(x == y),
                BinOp::Ne => Bool(x != y),
                BinOp::And | BinOp::Or => unreachable!("logical operators handled by the caller"),
            }
        }
    })
}

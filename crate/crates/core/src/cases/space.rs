//! The input variables of a method: parameters, scalar fields it reads and
//! one slot per static call site of every value-returning mocked call.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::ast::{CallKey, ExprKind, FieldDecl, FieldType, ScalarType, Type};
use crate::decision::Decision;
use crate::exec::MethodTarget;
use crate::value::Scalar;

use super::{Origin, SeedInfo, TestCase};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum VarKind {
    Param(String),
    Field(String),
    /// The `slot`-th scripted return of `key`.
    Mock { key: CallKey, slot: usize },
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarKind::Param(n) => f.write_str(n),
            VarKind::Field(n) => write!(f, "field:{n}"),
            VarKind::Mock { key, slot } => write!(f, "{key}#{slot}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub kind: VarKind,
    pub ty: ScalarType,
    /// Literals compared in conditions that read this variable, coerced to `ty`.
    pub literals: BTreeSet<Scalar>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub class: String,
    pub method: String,
    pub vars: Vec<Variable>,
}

impl SearchSpace {
    /// Parameters in declaration order, then fields read by the body, then
    /// mock slots, both sorted by name.
    pub fn of(target: &MethodTarget<'_>, decisions: &[Decision]) -> SearchSpace {
        let method = target.method;
        let mut fields = BTreeMap::new();
        let mut sites: BTreeMap<CallKey, (usize, ScalarType)> = BTreeMap::new();
        method.body.walk_exprs(&mut |e| match &e.kind {
            ExprKind::Field(name) => {
                if let Some(FieldDecl {
                    ty: FieldType::Scalar(t), ..
                }) = target.unit.lookup_field(target.class, name)
                {
                    fields.insert(name.clone(), *t);
                }
            }
            ExprKind::Call(call) => {
                if let Type::Scalar(t) = e.ty {
                    sites.entry(call.key()).or_insert((0, t)).0 += 1;
                }
            }
            _ => {}
        });

        let literals_for = |kind: &VarKind, ty: ScalarType| -> BTreeSet<Scalar> {
            decisions
                .iter()
                .flat_map(|d| &d.conditions)
                .filter(|c| match kind {
                    VarKind::Param(n) => c.referenced_params.contains(n),
                    VarKind::Field(n) => c.referenced_fields.contains(n),
                    VarKind::Mock { key, .. } => c.referenced_calls.contains(key),
                })
                .flat_map(|c| c.compared_literals.iter())
                .filter_map(|l| l.coerce(ty))
                .collect()
        };

        let mut vars = Vec::new();
        let mut push = |kind: VarKind, ty: ScalarType| {
            let literals = literals_for(&kind, ty);
            vars.push(Variable { kind, ty, literals });
        };
        for p in &method.params {
            push(VarKind::Param(p.name.clone()), p.ty);
        }
        for (name, ty) in fields {
            push(VarKind::Field(name), ty);
        }
        for (key, (count, ty)) in sites {
            for slot in 0..count {
                push(VarKind::Mock { key: key.clone(), slot }, ty);
            }
        }
        SearchSpace {
            class: target.class.name.clone(),
            method: method.name.clone(),
            vars,
        }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Builds a case from one value per variable, in `vars` order.
    pub fn to_case(&self, id: String, values: &[Scalar], origin: Origin, seed_info: Option<SeedInfo>) -> TestCase {
        assert_eq!(values.len(), self.vars.len());
        let mut case = TestCase {
            id,
            class: self.class.clone(),
            method: self.method.clone(),
            params: BTreeMap::new(),
            fields: BTreeMap::new(),
            mocks: BTreeMap::new(),
            origin,
            seed_info,
        };
        for (var, value) in self.vars.iter().zip(values) {
            match &var.kind {
                VarKind::Param(n) => {
                    case.params.insert(n.clone(), *value);
                }
                VarKind::Field(n) => {
                    case.fields.insert(n.clone(), *value);
                }
                VarKind::Mock { key, .. } => case.mocks.entry(key.clone()).or_default().push(*value),
            }
        }
        case
    }
}

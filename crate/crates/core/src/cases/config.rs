//! Developer-written case configuration: named functional cases and value
//! pool overrides per method.
//!
//! ```json
//! {
//!   "A": {
//!     "func1": {
//!       "cases": [
//!         { "name": "happy", "params": { "x": 1 }, "mocks": { "c.getStatus": [3] } }
//!       ],
//!       "pools": { "params": { "x": [0, 1, 7] } }
//!     }
//!   }
//! }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{CallKey, ClassDecl, FieldDecl, FieldType, MethodDecl, ScalarType, SourceUnit};
use crate::exec::{Domains, MethodTarget};
use crate::value::Scalar;

use super::{Origin, SearchSpace, TestCase, VarKind};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfiguredCase {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, Scalar>,
    #[serde(default)]
    pub fields: BTreeMap<String, Scalar>,
    #[serde(default)]
    pub mocks: BTreeMap<CallKey, Vec<Scalar>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    #[serde(default)]
    pub cases: Vec<ConfiguredCase>,
    /// Replace the fuzzer's default pool for the named variables.
    #[serde(default)]
    pub pools: Domains,
}

/// Class name → method name → configuration.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(transparent)]
pub struct CaseConfig {
    pub classes: BTreeMap<String, BTreeMap<String, MethodConfig>>,
}

impl CaseConfig {
    pub fn method(&self, class: &str, method: &str) -> Option<&MethodConfig> {
        self.classes.get(class)?.get(method)
    }

    pub fn pools(&self, class: &str, method: &str) -> Option<&Domains> {
        self.method(class, method).map(|m| &m.pools)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("config schema: {0}")]
    Schema(String),
    #[error("unknown target `{path}`")]
    UnknownTarget { path: String },
    #[error("`{path}`: {message}")]
    InvalidValue { path: String, message: String },
}

/// A note about a configured case that was completed with defaults.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub case: String,
    pub kind: DiagnosticKind,
    pub target: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DiagnosticKind {
    DefaultFilled,
}

/// Parses `text` and checks every class, method, parameter, field and mock
/// key it names against `unit`.
pub fn load_case_config(text: &str, unit: &SourceUnit) -> Result<CaseConfig, ConfigError> {
    let config: CaseConfig = serde_json::from_str(text).map_err(|e| ConfigError::Schema(e.to_string()))?;
    for (class_name, methods) in &config.classes {
        let class = unit
            .class(class_name)
            .filter(|c| !c.is_extern)
            .ok_or_else(|| ConfigError::UnknownTarget {
                path: class_name.clone(),
            })?;
        for (method_name, entry) in methods {
            let base = format!("{class_name}.{method_name}");
            let method = class
                .method(method_name)
                .ok_or_else(|| ConfigError::UnknownTarget { path: base.clone() })?;
            let target = MethodTarget::from_decls(unit, class, method);
            let mut names = std::collections::BTreeSet::new();
            for (i, case) in entry.cases.iter().enumerate() {
                let path = format!("{base}.cases[{i}]");
                if !names.insert(case.name.as_str()) {
                    return Err(ConfigError::InvalidValue {
                        path,
                        message: format!("duplicate case name `{}`", case.name),
                    });
                }
                check_params(method, &path, case.params.iter().map(|(k, v)| (k, std::slice::from_ref(v))))?;
                check_fields(unit, class, &path, case.fields.iter().map(|(k, v)| (k, std::slice::from_ref(v))))?;
                check_mocks(&target, &path, case.mocks.iter().map(|(k, v)| (k, v.as_slice())))?;
            }
            let path = format!("{base}.pools");
            let pools = &entry.pools;
            check_params(method, &path, pools.params.iter().map(|(k, v)| (k, v.as_slice())))?;
            check_fields(unit, class, &path, pools.fields.iter().map(|(k, v)| (k, v.as_slice())))?;
            check_mocks(&target, &path, pools.mocks.iter().map(|(k, v)| (k, v.as_slice())))?;
            for (name, values) in pools
                .params
                .iter()
                .chain(&pools.fields)
                .map(|(k, v)| (k.to_string(), v))
                .chain(pools.mocks.iter().map(|(k, v)| (k.to_string(), v)))
            {
                if values.is_empty() {
                    return Err(ConfigError::InvalidValue {
                        path: format!("{path}.{name}"),
                        message: "empty pool".into(),
                    });
                }
            }
        }
    }
    Ok(config)
}

fn check_values(path: &str, ty: ScalarType, values: &[Scalar]) -> Result<(), ConfigError> {
    match values.iter().find(|v| v.coerce(ty).is_none()) {
        Some(bad) => Err(ConfigError::InvalidValue {
            path: path.to_string(),
            message: format!("expected {ty}, got {bad}"),
        }),
        None => Ok(()),
    }
}

fn check_params<'v>(
    method: &MethodDecl,
    path: &str,
    entries: impl Iterator<Item = (&'v String, &'v [Scalar])>,
) -> Result<(), ConfigError> {
    for (name, values) in entries {
        let path = format!("{path}.params.{name}");
        let param = method
            .param(name)
            .ok_or_else(|| ConfigError::UnknownTarget { path: path.clone() })?;
        check_values(&path, param.ty, values)?;
    }
    Ok(())
}

fn check_fields<'v>(
    unit: &SourceUnit,
    class: &ClassDecl,
    path: &str,
    entries: impl Iterator<Item = (&'v String, &'v [Scalar])>,
) -> Result<(), ConfigError> {
    for (name, values) in entries {
        let path = format!("{path}.fields.{name}");
        match unit.lookup_field(class, name) {
            Some(FieldDecl {
                ty: FieldType::Scalar(t), ..
            }) => check_values(&path, *t, values)?,
            _ => return Err(ConfigError::UnknownTarget { path }),
        }
    }
    Ok(())
}

fn check_mocks<'v>(
    target: &MethodTarget<'_>,
    path: &str,
    entries: impl Iterator<Item = (&'v CallKey, &'v [Scalar])>,
) -> Result<(), ConfigError> {
    for (key, values) in entries {
        let path = format!("{path}.mocks.{key}");
        let ty = crate::exec::mock_return_type(target, key).map_err(|_| ConfigError::UnknownTarget { path: path.clone() })?;
        check_values(&path, ty, values)?;
    }
    Ok(())
}

/// One case per configured entry, in class, method and file order. Missing
/// parameters take the type default (int 0, bool false, float 0.0), as do
/// missing or empty scripts for calls the method makes; each fill is reported.
pub fn expand_configured_cases(config: &CaseConfig, unit: &SourceUnit) -> (Vec<TestCase>, Vec<Diagnostic>) {
    let mut cases = Vec::new();
    let mut diagnostics = Vec::new();
    for (class_name, methods) in &config.classes {
        let Some(class) = unit.class(class_name) else { continue };
        for (method_name, entry) in methods {
            let Some(method) = class.method(method_name) else { continue };
            let target = MethodTarget::from_decls(unit, class, method);
            let space = SearchSpace::of(&target, &target.decisions());
            for configured in &entry.cases {
                let id = format!("{class_name}.{method_name}#{}", configured.name);
                let mut case = TestCase {
                    id: id.clone(),
                    class: class_name.clone(),
                    method: method_name.clone(),
                    params: configured.params.clone(),
                    fields: configured.fields.clone(),
                    mocks: configured.mocks.clone(),
                    origin: Origin::Configured,
                    seed_info: None,
                };
                for p in &method.params {
                    if !case.params.contains_key(&p.name) {
                        case.params.insert(p.name.clone(), Scalar::default_for(p.ty));
                        diagnostics.push(Diagnostic {
                            case: id.clone(),
                            kind: DiagnosticKind::DefaultFilled,
                            target: p.name.clone(),
                        });
                    }
                }
                for var in &space.vars {
                    if let VarKind::Mock { key, slot: 0 } = &var.kind {
                        let script = case.mocks.entry(key.clone()).or_default();
                        if script.is_empty() {
                            script.push(Scalar::default_for(var.ty));
                            diagnostics.push(Diagnostic {
                                case: id.clone(),
                                kind: DiagnosticKind::DefaultFilled,
                                target: key.to_string(),
                            });
                        }
                    }
                }
                cases.push(case);
            }
        }
    }
    (cases, diagnostics)
}

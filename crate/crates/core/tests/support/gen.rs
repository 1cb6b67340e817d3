//! Seeded random CUT-lang methods and matching cases.

use std::collections::{BTreeMap, BTreeSet};

use ultgen_core::ast::ScalarType;
use ultgen_core::cases::{Origin, TestCase};
use ultgen_core::rng::SplitMix64;
use ultgen_core::Scalar;

pub const PRELUDE: &str = "extern class Dep { int gi(); bool gb(); float gf(); void act(); };\n";

pub struct RandomMethod {
    pub source: String,
    pub params: Vec<(String, ScalarType)>,
    pub calls: BTreeSet<&'static str>,
}

struct Gen<'r> {
    rng: &'r mut SplitMix64,
    params: Vec<(String, ScalarType)>,
    calls: BTreeSet<&'static str>,
    ret: Option<ScalarType>,
}

const FIELDS: [(&str, ScalarType); 4] = [
    ("fi", ScalarType::Int),
    ("fj", ScalarType::Int),
    ("fb", ScalarType::Bool),
    ("ff", ScalarType::Float),
];

fn ty_name(t: ScalarType) -> &'static str {
    match t {
        ScalarType::Int => "int",
        ScalarType::Bool => "bool",
        ScalarType::Float => "float",
    }
}

impl Gen<'_> {
    fn pick(&mut self, n: usize) -> usize {
        self.rng.below(n as u64) as usize
    }

    fn chance(&mut self, percent: u64) -> bool {
        self.rng.below(100) < percent
    }

    fn var(&mut self, ty: ScalarType) -> Option<String> {
        let mut names: Vec<String> = self.params.iter().filter(|p| p.1 == ty).map(|p| p.0.clone()).collect();
        names.extend(FIELDS.iter().filter(|f| f.1 == ty).map(|f| f.0.to_string()));
        if names.is_empty() {
            None
        } else {
            let i = self.pick(names.len());
            Some(names.swap_remove(i))
        }
    }

    fn call(&mut self, ty: ScalarType) -> String {
        let name = match ty {
            ScalarType::Int => "gi",
            ScalarType::Bool => "gb",
            ScalarType::Float => "gf",
        };
        self.calls.insert(name);
        format!("d->{name}()")
    }

    fn int(&mut self, depth: u32) -> String {
        match if depth == 0 { self.pick(3) } else { self.pick(5) } {
            0 => ["0", "1", "2", "3", "7", "10", "100", "-1", "-5"][self.pick(9)].to_string(),
            1 => self.var(ScalarType::Int).unwrap_or_else(|| "4".into()),
            2 => self.call(ScalarType::Int),
            _ => {
                let op = ["+", "-", "*", "/"][self.pick(4)];
                format!("({} {op} {})", self.int(depth - 1), self.int(depth - 1))
            }
        }
    }

    fn float(&mut self, depth: u32) -> String {
        match if depth == 0 { self.pick(3) } else { self.pick(5) } {
            0 => ["0.0", "1.5", "-2.25", "100.0", "0.5"][self.pick(5)].to_string(),
            1 => self.var(ScalarType::Float).unwrap_or_else(|| "3.0".into()),
            2 => self.call(ScalarType::Float),
            _ => {
                let op = ["+", "-", "*", "/"][self.pick(4)];
                format!("({} {op} {})", self.float(depth - 1), self.float(depth - 1))
            }
        }
    }

    /// A bool expression with no logical operators.
    fn atom(&mut self, depth: u32) -> String {
        match self.pick(6) {
            0 => ["true", "false"][self.pick(2)].to_string(),
            1 => self.var(ScalarType::Bool).unwrap_or_else(|| "true".into()),
            2 => self.call(ScalarType::Bool),
            3 | 4 => {
                let op = ["<", "<=", ">", ">=", "==", "!="][self.pick(6)];
                if self.chance(75) {
                    format!("{} {op} {}", self.int(depth), self.int(depth))
                } else {
                    format!("{} {op} {}", self.float(depth), self.float(depth))
                }
            }
            _ => {
                let op = ["==", "!="][self.pick(2)];
                let a = self.var(ScalarType::Bool).unwrap_or_else(|| "fb".into());
                let b = self.call(ScalarType::Bool);
                format!("{a} {op} {b}")
            }
        }
    }

    fn boolean(&mut self, depth: u32) -> String {
        match if depth == 0 { 0 } else { self.pick(5) } {
            0 | 1 => self.atom(1),
            2 => format!("({} && {})", self.boolean(depth - 1), self.boolean(depth - 1)),
            3 => format!("({} || {})", self.boolean(depth - 1), self.boolean(depth - 1)),
            _ => format!("!({})", self.boolean(depth - 1)),
        }
    }

    fn value(&mut self, ty: ScalarType) -> String {
        match ty {
            ScalarType::Int => self.int(2),
            ScalarType::Bool => self.boolean(2),
            ScalarType::Float => self.float(2),
        }
    }

    fn block(&mut self, depth: u32, indent: usize) -> String {
        let n = 1 + self.pick(3);
        let mut out = String::new();
        for _ in 0..n {
            out.push_str(&self.stmt(depth, indent));
        }
        out
    }

    fn stmt(&mut self, depth: u32, indent: usize) -> String {
        let pad = "  ".repeat(indent);
        let kind = if depth == 0 { 3 + self.pick(4) } else { self.pick(7) };
        match kind {
            0 | 1 => {
                let mut s = format!(
                    "{pad}if ({}) {{\n{}{pad}}}",
                    self.boolean(2),
                    self.block(depth - 1, indent + 1)
                );
                if self.chance(50) {
                    s.push_str(&format!(" else {{\n{}{pad}}}", self.block(depth - 1, indent + 1)));
                }
                s.push('\n');
                s
            }
            2 => format!(
                "{pad}while ({}) {{\n{}{pad}}}\n",
                self.boolean(1),
                self.block(depth - 1, indent + 1)
            ),
            3 => format!("{pad}assert({});\n", self.boolean(1)),
            4 => {
                if self.chance(60) {
                    let (name, ty) = if !self.params.is_empty() && self.chance(50) {
                        let i = self.pick(self.params.len());
                        self.params[i].clone()
                    } else {
                        let f = FIELDS[self.pick(FIELDS.len())];
                        (f.0.to_string(), f.1)
                    };
                    format!("{pad}{name} = {};\n", self.value(ty))
                } else {
                    match self.ret {
                        Some(t) => format!("{pad}return {};\n", self.value(t)),
                        None => format!("{pad}return;\n"),
                    }
                }
            }
            5 => {
                if self.chance(50) {
                    format!("{pad}d->act();\n")
                } else {
                    format!("{pad}{};\n", self.call(ScalarType::Int))
                }
            }
            _ => {
                let (name, ty) = FIELDS[self.pick(FIELDS.len())];
                format!("{pad}{name} = {};\n", self.value(ty))
            }
        }
    }
}

/// One random class `R` with method `m`, preceded by the `Dep` surface.
pub fn random_method(rng: &mut SplitMix64) -> RandomMethod {
    let types = [ScalarType::Int, ScalarType::Bool, ScalarType::Float];
    let nparams = rng.below(4) as usize;
    let params: Vec<(String, ScalarType)> = (0..nparams)
        .map(|i| (format!("p{i}"), types[rng.below(3) as usize]))
        .collect();
    let ret = match rng.below(4) {
        0 => None,
        i => Some(types[i as usize - 1]),
    };
    let mut g = Gen {
        rng,
        params: params.clone(),
        calls: BTreeSet::new(),
        ret,
    };
    let body = g.block(3, 2);
    let tail = match ret {
        Some(t) => format!("    return {};\n", g.value(t)),
        None => String::new(),
    };
    let sig: Vec<String> = params.iter().map(|(n, t)| format!("{} {n}", ty_name(*t))).collect();
    let source = format!(
        "{PRELUDE}class R {{\n  Dep* d;\n  int fi;\n  int fj;\n  bool fb;\n  float ff;\n  {} m({}) {{\n{body}{tail}  }}\n}};\n",
        ret.map_or("void", ty_name),
        sig.join(", ")
    );
    RandomMethod {
        source,
        params,
        calls: g.calls,
    }
}

pub fn random_scalar(rng: &mut SplitMix64, ty: ScalarType) -> Scalar {
    match ty {
        ScalarType::Int => Scalar::Int(match rng.below(10) {
            0 => i64::MAX,
            1 => i64::MIN,
            2 => rng.next_u64() as i64,
            _ => rng.range_i64(-10, 12),
        }),
        ScalarType::Bool => Scalar::Bool(rng.below(2) == 1),
        ScalarType::Float => Scalar::Float(match rng.below(10) {
            0 => f64::INFINITY,
            1 => f64::NEG_INFINITY,
            2 => 1e300,
            _ => (rng.range_i64(-40, 40) as f64) / 4.0,
        }),
    }
}

/// A well-formed case for `m`: every parameter set, some fields set, and
/// scripts of 0 to 3 values (or none) for the calls it makes.
pub fn random_case(rng: &mut SplitMix64, m: &RandomMethod, id: usize) -> TestCase {
    let params = m
        .params
        .iter()
        .map(|(n, t)| (n.clone(), random_scalar(rng, *t)))
        .collect();
    let mut fields = BTreeMap::new();
    for (n, t) in FIELDS {
        if rng.below(2) == 0 {
            fields.insert(n.to_string(), random_scalar(rng, t));
        }
    }
    let mut mocks = BTreeMap::new();
    for call in &m.calls {
        if rng.below(10) == 0 {
            continue;
        }
        let ty = match *call {
            "gi" => ScalarType::Int,
            "gb" => ScalarType::Bool,
            _ => ScalarType::Float,
        };
        let len = rng.below(4) as usize;
        let script = (0..len).map(|_| random_scalar(rng, ty)).collect();
        mocks.insert(format!("d.{call}").parse().expect("call key"), script);
    }
    TestCase {
        id: format!("R.m#rand{id}"),
        class: "R".into(),
        method: "m".into(),
        params,
        fields,
        mocks,
        origin: Origin::Fuzzed,
        seed_info: None,
    }
}

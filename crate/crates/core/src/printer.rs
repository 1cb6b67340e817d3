//! Canonical CUT-lang text for a parsed unit.

use std::fmt::Write;

use crate::ast::*;
use crate::value::Scalar;

pub fn print_unit(unit: &SourceUnit) -> String {
    let mut out = String::new();
    for (i, class) in unit.classes.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_class(&mut out, class);
    }
    out
}

fn print_class(out: &mut String, class: &ClassDecl) {
    if class.is_extern {
        if !class.has_surface {
            let _ = writeln!(out, "extern class {};", class.name);
            return;
        }
        let _ = write!(out, "extern class {}", class.name);
    } else {
        let _ = write!(out, "class {}", class.name);
        if let Some(base) = &class.base {
            let _ = write!(out, " : public {base}");
        }
    }
    out.push_str("\n{\n");
    for field in &class.fields {
        match &field.ty {
            FieldType::Scalar(t) => {
                let _ = writeln!(out, "    {t} {};", field.name);
            }
            FieldType::Ref(t) => {
                let _ = writeln!(out, "    {t}* {};", field.name);
            }
        }
    }
    for method in &class.methods {
        print_method(out, method, 1);
    }
    out.push_str("};\n");
}

/// Prints a single method declaration; used for fingerprints as well.
pub fn print_method(out: &mut String, method: &MethodDecl, depth: usize) {
    indent(out, depth);
    let ret = method.return_type.map_or("void", |t| t.keyword());
    let params: Vec<String> = method.params.iter().map(|p| format!("{} {}", p.ty, p.name)).collect();
    let _ = write!(out, "{ret} {}({})", method.name, params.join(", "));
    if method.has_body {
        out.push('\n');
        print_block(out, &method.body, depth);
        out.push('\n');
    } else {
        out.push_str(";\n");
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn print_block(out: &mut String, block: &Block, depth: usize) {
    indent(out, depth);
    out.push_str("{\n");
    for stmt in &block.stmts {
        print_stmt(out, stmt, depth + 1);
    }
    indent(out, depth);
    out.push('}');
}

fn print_stmt(out: &mut String, stmt: &Stmt, depth: usize) {
    indent(out, depth);
    match &stmt.kind {
        StmtKind::If {
            cond,
            then_block,
            else_block,
            ..
        } => {
            let _ = writeln!(out, "if ({})", expr_to_string(cond));
            print_block(out, then_block, depth);
            if let Some(e) = else_block {
                out.push('\n');
                indent(out, depth);
                out.push_str("else\n");
                print_block(out, e, depth);
            }
            out.push('\n');
        }
        StmtKind::While { cond, body, .. } => {
            let _ = writeln!(out, "while ({})", expr_to_string(cond));
            print_block(out, body, depth);
            out.push('\n');
        }
        StmtKind::Return(None) => out.push_str("return;\n"),
        StmtKind::Return(Some(e)) => {
            let _ = writeln!(out, "return {};", expr_to_string(e));
        }
        StmtKind::Assign { target, value } => {
            let _ = writeln!(out, "{} = {};", target.kind.name(), expr_to_string(value));
        }
        StmtKind::Expr(e) => {
            let _ = writeln!(out, "{};", expr_to_string(e));
        }
        StmtKind::Assert { cond, .. } => {
            let _ = writeln!(out, "assert({});", expr_to_string(cond));
        }
    }
}

pub fn expr_to_string(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, expr, 0);
    out
}

pub fn literal_to_string(v: &Scalar) -> String {
    match v {
        Scalar::Int(i) => i.to_string(),
        Scalar::Bool(b) => b.to_string(),
        // `{:?}` is the shortest text that parses back to the same bits and
        // always carries a `.` or an exponent.
        Scalar::Float(f) => format!("{f:?}"),
    }
}

fn write_expr(out: &mut String, expr: &Expr, min_prec: u8) {
    match &expr.kind {
        ExprKind::Lit(v) => out.push_str(&literal_to_string(v)),
        ExprKind::Param(n) | ExprKind::Field(n) => out.push_str(n),
        ExprKind::Call(c) => {
            let _ = write!(out, "{}->{}()", c.receiver, c.method);
        }
        ExprKind::Unary(UnaryOp::Not, e) => {
            out.push('!');
            write_expr(out, e, u8::MAX);
        }
        ExprKind::Binary(op, l, r) => {
            let prec = op.precedence();
            let wrap = prec < min_prec;
            if wrap {
                out.push('(');
            }
            write_expr(out, l, prec);
            let _ = write!(out, " {} ", op.symbol());
            // Left-associative: an equal-precedence right child needs parens.
            write_expr(out, r, prec + 1);
            if wrap {
                out.push(')');
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_source;

    fn roundtrip(src: &str) {
        let a = parse_source(src, "t").unwrap();
        let printed = print_unit(&a);
        let b = parse_source(&printed, "t").unwrap_or_else(|e| panic!("reparse failed: {e}\n{printed}"));
        assert!(a.structurally_eq(&b), "round trip changed the tree:\n{printed}");
        assert_eq!(print_unit(&b), printed);
    }

    #[test]
    fn precedence_and_associativity_survive() {
        roundtrip(
            "class A { int f(int a, int b, int c) { return a - (b - c) * (a + b) / c - 1; } \
             bool g(bool p, bool q, bool r) { return !(p || q) && (r || !p) || p && q; } }",
        );
    }

    #[test]
    fn statements_and_literals_survive() {
        roundtrip(
            "extern class C { int getStatus(); float v; }; \
             class A { C* c; float w; float f(float x) { while (x < 1e300) { x = x * 2.5; } \
             if (x >= -0.125) { w = x; } else if (c->getStatus() == 3) { assert(false); } return x; } void g(); }",
        );
    }

    #[test]
    fn negative_literal_after_minus() {
        let src = "class A { int f(int x) { return x - -1; } }";
        let printed = print_unit(&parse_source(src, "t").unwrap());
        assert!(printed.contains("x - -1"));
        roundtrip(src);
    }
}

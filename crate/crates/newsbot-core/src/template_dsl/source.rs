//! AST-to-source serialization. `parse_template(program.to_source())` yields
//! a structurally identical AST: literals re-escape `{` and `#`, and
//! expressions re-introduce parentheses wherever precedence requires them.

use super::{Expr, Node, TemplateProgram};

impl TemplateProgram {
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        write_nodes(&self.nodes, &mut out);
        out
    }
}

fn write_nodes(nodes: &[Node], out: &mut String) {
    for node in nodes {
        match node {
            Node::Text { literal, .. } => {
                for c in literal.chars() {
                    match c {
                        '{' => out.push_str("{{"),
                        '#' => out.push_str("##"),
                        other => out.push(other),
                    }
                }
            }
            Node::Interp { expr, .. } => {
                out.push('{');
                write_expr(expr, 1, out);
                out.push('}');
            }
            Node::If {
                branches,
                else_body,
                ..
            } => {
                for (i, branch) in branches.iter().enumerate() {
                    out.push_str(if i == 0 { "#if(" } else { "#elif(" });
                    write_expr(&branch.condition, 1, out);
                    out.push(')');
                    write_nodes(&branch.body, out);
                }
                if let Some(body) = else_body {
                    out.push_str("#else");
                    write_nodes(body, out);
                }
                out.push_str("#end");
            }
        }
    }
}

/// Precedence: `||` = 1, `&&` = 2, comparisons = 3, primaries = 4.
fn precedence(expr: &Expr) -> u8 {
    match expr {
        Expr::Or(..) => 1,
        Expr::And(..) => 2,
        Expr::Compare { .. } => 3,
        Expr::Path(_) | Expr::Int(_) | Expr::Str(_) | Expr::Call { .. } => 4,
    }
}

/// Write `expr`, parenthesizing when its precedence is below what the
/// surrounding position requires. Binary operators are left-associative, so
/// a right child of equal precedence also needs parentheses.
fn write_expr(expr: &Expr, min_prec: u8, out: &mut String) {
    let prec = precedence(expr);
    let parens = prec < min_prec;
    if parens {
        out.push('(');
    }
    match expr {
        Expr::Path(segments) => out.push_str(&segments.join(".")),
        Expr::Int(n) => out.push_str(&n.to_string()),
        Expr::Str(s) => {
            out.push('"');
            for c in s.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    other => out.push(other),
                }
            }
            out.push('"');
        }
        Expr::Call { name, args } => {
            out.push_str(name);
            out.push('(');
            for (i, arg) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(arg, 1, out);
            }
            out.push(')');
        }
        Expr::Compare { op, lhs, rhs } => {
            write_expr(lhs, 4, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_expr(rhs, 4, out);
        }
        Expr::And(lhs, rhs) => {
            write_expr(lhs, 2, out);
            out.push_str(" && ");
            write_expr(rhs, 3, out);
        }
        Expr::Or(lhs, rhs) => {
            write_expr(lhs, 1, out);
            out.push_str(" || ");
            write_expr(rhs, 2, out);
        }
    }
    if parens {
        out.push(')');
    }
}

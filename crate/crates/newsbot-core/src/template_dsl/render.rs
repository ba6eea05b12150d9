//! Template evaluation. Rendering is a pure function of the program and the
//! context: the same inputs always produce byte-identical output.

use super::{CmpOp, Expr, Node, Pos, RenderContext, TemplateError, TemplateProgram, Value};

/// Render a parsed template against a context.
///
/// Conditionals evaluate their branches top-down and the first true branch
/// wins. Integers render in plain decimal, booleans as `true` / `false`.
/// Referencing an unbound path in a *reachable* node is an error; paths in
/// branches that are not taken are never evaluated.
pub fn render(program: &TemplateProgram, ctx: &RenderContext) -> Result<String, TemplateError> {
    let mut out = String::new();
    render_nodes(&program.nodes, ctx, &program.source_name, &mut out)?;
    Ok(out)
}

fn render_nodes(
    nodes: &[Node],
    ctx: &RenderContext,
    name: &str,
    out: &mut String,
) -> Result<(), TemplateError> {
    for node in nodes {
        match node {
            Node::Text { literal, .. } => out.push_str(literal),
            Node::Interp { expr, pos } => {
                let value = eval(expr, ctx, name, *pos)?;
                match value {
                    Value::Text(t) => out.push_str(&t),
                    Value::Int(n) => out.push_str(&n.to_string()),
                    Value::Bool(b) => out.push_str(if b { "true" } else { "false" }),
                }
            }
            Node::If {
                branches,
                else_body,
                pos,
            } => {
                let mut taken = false;
                for branch in branches {
                    if eval_condition(&branch.condition, ctx, name, *pos)? {
                        render_nodes(&branch.body, ctx, name, out)?;
                        taken = true;
                        break;
                    }
                }
                if !taken {
                    if let Some(body) = else_body {
                        render_nodes(body, ctx, name, out)?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn eval_condition(
    expr: &Expr,
    ctx: &RenderContext,
    name: &str,
    pos: Pos,
) -> Result<bool, TemplateError> {
    match eval(expr, ctx, name, pos)? {
        Value::Bool(b) => Ok(b),
        other => Err(type_mismatch(
            name,
            pos,
            format!("condition must be boolean, got {}", other.kind()),
        )),
    }
}

fn eval(expr: &Expr, ctx: &RenderContext, name: &str, pos: Pos) -> Result<Value, TemplateError> {
    match expr {
        Expr::Path(segments) => {
            let path = segments.join(".");
            ctx.lookup(&path)
                .cloned()
                .ok_or_else(|| TemplateError::UnboundPath {
                    name: name.to_string(),
                    line: pos.line,
                    column: pos.column,
                    path,
                })
        }
        Expr::Int(n) => Ok(Value::Int(*n)),
        Expr::Str(s) => Ok(Value::Text(s.clone())),
        Expr::Call { name: func, args } => {
            let arg = eval(&args[0], ctx, name, pos)?;
            let Value::Int(n) = arg else {
                return Err(type_mismatch(
                    name,
                    pos,
                    format!("{func}() expects an integer, got {}", arg.kind()),
                ));
            };
            match func.as_str() {
                "ordinal" => Ok(Value::Text(ordinal_text(n))),
                "minute" => Ok(Value::Text(n.to_string())),
                other => unreachable!("parser admits only known builtins, got {other}"),
            }
        }
        Expr::Compare { op, lhs, rhs } => {
            let l = eval(lhs, ctx, name, pos)?;
            let r = eval(rhs, ctx, name, pos)?;
            compare(*op, &l, &r, name, pos).map(Value::Bool)
        }
        // Boolean operators short-circuit, so an unbound path on the right is
        // only an error when the right side actually decides the outcome.
        Expr::And(lhs, rhs) => {
            if !eval_condition(lhs, ctx, name, pos)? {
                return Ok(Value::Bool(false));
            }
            Ok(Value::Bool(eval_condition(rhs, ctx, name, pos)?))
        }
        Expr::Or(lhs, rhs) => {
            if eval_condition(lhs, ctx, name, pos)? {
                return Ok(Value::Bool(true));
            }
            Ok(Value::Bool(eval_condition(rhs, ctx, name, pos)?))
        }
    }
}

fn compare(
    op: CmpOp,
    lhs: &Value,
    rhs: &Value,
    name: &str,
    pos: Pos,
) -> Result<bool, TemplateError> {
    match op {
        CmpOp::Eq | CmpOp::Ne => {
            let equal = match (lhs, rhs) {
                (Value::Text(a), Value::Text(b)) => a == b,
                (Value::Int(a), Value::Int(b)) => a == b,
                (Value::Bool(a), Value::Bool(b)) => a == b,
                _ => {
                    return Err(type_mismatch(
                        name,
                        pos,
                        format!("cannot compare {} with {}", lhs.kind(), rhs.kind()),
                    ))
                }
            };
            Ok(if op == CmpOp::Eq { equal } else { !equal })
        }
        CmpOp::Lt | CmpOp::Le | CmpOp::Gt | CmpOp::Ge => {
            let (Value::Int(a), Value::Int(b)) = (lhs, rhs) else {
                return Err(type_mismatch(
                    name,
                    pos,
                    format!(
                        "ordering comparison {} needs integers, got {} and {}",
                        op.symbol(),
                        lhs.kind(),
                        rhs.kind()
                    ),
                ));
            };
            Ok(match op {
                CmpOp::Lt => a < b,
                CmpOp::Le => a <= b,
                CmpOp::Gt => a > b,
                CmpOp::Ge => a >= b,
                _ => unreachable!(),
            })
        }
    }
}

fn type_mismatch(name: &str, pos: Pos, message: String) -> TemplateError {
    TemplateError::TypeMismatch {
        name: name.to_string(),
        line: pos.line,
        column: pos.column,
        message,
    }
}

/// English ordinal text: 1 → "1st", 2 → "2nd", 3 → "3rd", otherwise "th",
/// with the 11/12/13 exceptions ("11th", "112th", ...).
fn ordinal_text(n: i64) -> String {
    let tens = n.abs() % 100;
    let units = n.abs() % 10;
    let suffix = if (11..=13).contains(&tens) {
        "th"
    } else {
        match units {
            1 => "st",
            2 => "nd",
            3 => "rd",
            _ => "th",
        }
    };
    format!("{n}{suffix}")
}

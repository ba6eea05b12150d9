//! Hand-written scanner and recursive-descent parser for the template
//! grammar. The parse is total over the grammar: every failure is a
//! [`TemplateError::Syntax`] carrying the 1-based line/column of the offence.

use super::{CmpOp, Expr, IfBranch, Node, Pos, TemplateError, TemplateProgram};

/// Builtins with their arity, validated at parse time.
const BUILTINS: &[(&str, usize)] = &[("ordinal", 1), ("minute", 1)];

struct Scanner<'a> {
    chars: Vec<char>,
    index: usize,
    line: u32,
    column: u32,
    name: &'a str,
}

impl<'a> Scanner<'a> {
    fn new(source: &str, name: &'a str) -> Self {
        Self {
            chars: source.chars().collect(),
            index: 0,
            line: 1,
            column: 1,
            name,
        }
    }

    fn pos(&self) -> Pos {
        Pos::new(self.line, self.column)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.index).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.index + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.index += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    /// Consume `literal` if the input starts with it here.
    fn eat(&mut self, literal: &str) -> bool {
        if literal
            .chars()
            .enumerate()
            .all(|(i, c)| self.peek_at(i) == Some(c))
        {
            for _ in 0..literal.chars().count() {
                self.bump();
            }
            true
        } else {
            false
        }
    }

    fn skip_spaces(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.bump();
        }
    }

    fn error(&self, pos: Pos, message: impl Into<String>) -> TemplateError {
        TemplateError::Syntax {
            name: self.name.to_string(),
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }

    fn error_here(&self, message: impl Into<String>) -> TemplateError {
        self.error(self.pos(), message)
    }
}

/// What stopped a node sequence.
enum Stop {
    Eof,
    Elif(Pos),
    Else(Pos),
    End(Pos),
}

/// Parse one template source into its AST.
pub fn parse_template(source: &str, name: &str) -> Result<TemplateProgram, TemplateError> {
    let mut scanner = Scanner::new(source, name);
    let (nodes, stop) = parse_nodes(&mut scanner)?;
    match stop {
        Stop::Eof => Ok(TemplateProgram {
            nodes,
            source_name: name.to_string(),
        }),
        Stop::Elif(pos) => Err(scanner.error(pos, "#elif outside #if")),
        Stop::Else(pos) => Err(scanner.error(pos, "#else outside #if")),
        Stop::End(pos) => Err(scanner.error(pos, "#end without matching #if")),
    }
}

fn parse_nodes(scanner: &mut Scanner) -> Result<(Vec<Node>, Stop), TemplateError> {
    let mut nodes = Vec::new();
    let mut literal = String::new();
    let mut literal_pos = scanner.pos();

    macro_rules! flush_literal {
        () => {
            if !literal.is_empty() {
                nodes.push(Node::Text {
                    literal: std::mem::take(&mut literal),
                    pos: literal_pos,
                });
            }
        };
    }

    loop {
        let pos = scanner.pos();
        match scanner.peek() {
            None => {
                flush_literal!();
                return Ok((nodes, Stop::Eof));
            }
            Some('{') => {
                if scanner.eat("{{") {
                    if literal.is_empty() {
                        literal_pos = pos;
                    }
                    literal.push('{');
                    continue;
                }
                flush_literal!();
                scanner.bump();
                let expr = parse_expr(scanner)?;
                scanner.skip_spaces();
                if scanner.peek() != Some('}') {
                    return Err(scanner.error(pos, "unterminated '{' interpolation"));
                }
                scanner.bump();
                nodes.push(Node::Interp { expr, pos });
            }
            Some('#') => {
                if scanner.eat("##") {
                    if literal.is_empty() {
                        literal_pos = pos;
                    }
                    literal.push('#');
                    continue;
                }
                if scanner.eat("#if(") {
                    flush_literal!();
                    nodes.push(parse_if(scanner, pos)?);
                } else if scanner.eat("#elif(") {
                    flush_literal!();
                    return Ok((nodes, Stop::Elif(pos)));
                } else if scanner.eat("#else") {
                    flush_literal!();
                    return Ok((nodes, Stop::Else(pos)));
                } else if scanner.eat("#end") {
                    flush_literal!();
                    return Ok((nodes, Stop::End(pos)));
                } else {
                    return Err(scanner.error(
                        pos,
                        "unknown directive: expected #if(, #elif(, #else, #end or the escape ##",
                    ));
                }
            }
            Some(c) => {
                if literal.is_empty() {
                    literal_pos = pos;
                }
                literal.push(c);
                scanner.bump();
            }
        }
    }
}

/// Parse an `#if` whose `#if(` has already been consumed.
fn parse_if(scanner: &mut Scanner, if_pos: Pos) -> Result<Node, TemplateError> {
    let mut branches = Vec::new();
    let mut condition = parse_condition(scanner, if_pos)?;

    loop {
        let (body, stop) = parse_nodes(scanner)?;
        match stop {
            Stop::Eof => return Err(scanner.error(if_pos, "unbalanced #if: missing #end")),
            Stop::Elif(pos) => {
                branches.push(IfBranch { condition, body });
                condition = parse_condition(scanner, pos)?;
            }
            Stop::Else(else_pos) => {
                branches.push(IfBranch { condition, body });
                let (else_body, stop) = parse_nodes(scanner)?;
                return match stop {
                    Stop::End(_) => Ok(Node::If {
                        branches,
                        else_body: Some(else_body),
                        pos: if_pos,
                    }),
                    Stop::Eof => Err(scanner.error(if_pos, "unbalanced #if: missing #end")),
                    Stop::Elif(pos) => Err(scanner.error(pos, "#elif after #else")),
                    Stop::Else(_) => Err(scanner.error(else_pos, "duplicate #else")),
                };
            }
            Stop::End(_) => {
                branches.push(IfBranch { condition, body });
                return Ok(Node::If {
                    branches,
                    else_body: None,
                    pos: if_pos,
                });
            }
        }
    }
}

/// Parse the `expr)` part of `#if(expr)` / `#elif(expr)`.
fn parse_condition(scanner: &mut Scanner, open_pos: Pos) -> Result<Expr, TemplateError> {
    let expr = parse_expr(scanner)?;
    scanner.skip_spaces();
    if scanner.peek() != Some(')') {
        return Err(scanner.error(open_pos, "unterminated condition: missing ')'"));
    }
    scanner.bump();
    Ok(expr)
}

// Precedence climbing: or < and < comparison < primary. Comparisons do not
// chain; `a < b < c` is a syntax error.
fn parse_expr(scanner: &mut Scanner) -> Result<Expr, TemplateError> {
    parse_or(scanner)
}

fn parse_or(scanner: &mut Scanner) -> Result<Expr, TemplateError> {
    let mut lhs = parse_and(scanner)?;
    loop {
        scanner.skip_spaces();
        if scanner.peek() == Some('|') {
            let pos = scanner.pos();
            if !scanner.eat("||") {
                return Err(scanner.error(pos, "expected '||'"));
            }
            let rhs = parse_and(scanner)?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        } else {
            return Ok(lhs);
        }
    }
}

fn parse_and(scanner: &mut Scanner) -> Result<Expr, TemplateError> {
    let mut lhs = parse_comparison(scanner)?;
    loop {
        scanner.skip_spaces();
        if scanner.peek() == Some('&') {
            let pos = scanner.pos();
            if !scanner.eat("&&") {
                return Err(scanner.error(pos, "expected '&&'"));
            }
            let rhs = parse_comparison(scanner)?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        } else {
            return Ok(lhs);
        }
    }
}

fn peek_cmp_op(scanner: &mut Scanner) -> Option<CmpOp> {
    scanner.skip_spaces();
    for (text, op) in [
        ("==", CmpOp::Eq),
        ("!=", CmpOp::Ne),
        ("<=", CmpOp::Le),
        (">=", CmpOp::Ge),
        ("<", CmpOp::Lt),
        (">", CmpOp::Gt),
    ] {
        if scanner.eat(text) {
            return Some(op);
        }
    }
    None
}

fn parse_comparison(scanner: &mut Scanner) -> Result<Expr, TemplateError> {
    let lhs = parse_primary(scanner)?;
    let Some(op) = peek_cmp_op(scanner) else {
        return Ok(lhs);
    };
    let rhs = parse_primary(scanner)?;
    let pos = scanner.pos();
    if peek_cmp_op(scanner).is_some() {
        return Err(scanner.error(pos, "comparisons cannot be chained"));
    }
    Ok(Expr::Compare {
        op,
        lhs: Box::new(lhs),
        rhs: Box::new(rhs),
    })
}

fn parse_primary(scanner: &mut Scanner) -> Result<Expr, TemplateError> {
    scanner.skip_spaces();
    let pos = scanner.pos();
    match scanner.peek() {
        None => Err(scanner.error_here("unexpected end of input in expression")),
        Some('(') => {
            scanner.bump();
            let inner = parse_expr(scanner)?;
            scanner.skip_spaces();
            if scanner.peek() != Some(')') {
                return Err(scanner.error(pos, "unterminated '(' in expression"));
            }
            scanner.bump();
            Ok(inner)
        }
        Some('"') => parse_string(scanner),
        Some(c) if c.is_ascii_digit() => parse_int(scanner, false),
        Some('-') if scanner.peek_at(1).is_some_and(|c| c.is_ascii_digit()) => {
            scanner.bump();
            parse_int(scanner, true)
        }
        Some(c) if is_ident_start(c) => parse_path_or_call(scanner),
        Some(c) => Err(scanner.error_here(format!("unexpected character {c:?} in expression"))),
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn parse_ident(scanner: &mut Scanner) -> Result<String, TemplateError> {
    scanner.skip_spaces();
    let mut ident = String::new();
    match scanner.peek() {
        Some(c) if is_ident_start(c) => {
            ident.push(c);
            scanner.bump();
        }
        _ => return Err(scanner.error_here("expected identifier")),
    }
    while scanner.peek().is_some_and(is_ident_continue) {
        ident.push(scanner.bump().unwrap());
    }
    Ok(ident)
}

fn parse_int(scanner: &mut Scanner, negative: bool) -> Result<Expr, TemplateError> {
    let pos = scanner.pos();
    let mut digits = String::new();
    while scanner.peek().is_some_and(|c| c.is_ascii_digit()) {
        digits.push(scanner.bump().unwrap());
    }
    let value: i64 = digits
        .parse()
        .map_err(|_| scanner.error(pos, format!("integer literal {digits:?} out of range")))?;
    Ok(Expr::Int(if negative { -value } else { value }))
}

fn parse_string(scanner: &mut Scanner) -> Result<Expr, TemplateError> {
    let open_pos = scanner.pos();
    scanner.bump(); // opening quote
    let mut text = String::new();
    loop {
        match scanner.peek() {
            None | Some('\n') => return Err(scanner.error(open_pos, "unterminated string literal")),
            Some('"') => {
                scanner.bump();
                return Ok(Expr::Str(text));
            }
            Some('\\') => {
                scanner.bump();
                match scanner.bump() {
                    Some('"') => text.push('"'),
                    Some('\\') => text.push('\\'),
                    _ => {
                        return Err(scanner.error(open_pos, "unsupported escape in string literal"))
                    }
                }
            }
            Some(c) => {
                text.push(c);
                scanner.bump();
            }
        }
    }
}

fn parse_path_or_call(scanner: &mut Scanner) -> Result<Expr, TemplateError> {
    let start = scanner.pos();
    let first = parse_ident(scanner)?;

    if scanner.peek() == Some('(') {
        scanner.bump();
        let mut args = Vec::new();
        scanner.skip_spaces();
        if scanner.peek() == Some(')') {
            scanner.bump();
        } else {
            loop {
                args.push(parse_expr(scanner)?);
                scanner.skip_spaces();
                match scanner.peek() {
                    Some(',') => {
                        scanner.bump();
                    }
                    Some(')') => {
                        scanner.bump();
                        break;
                    }
                    _ => return Err(scanner.error(start, "unterminated argument list")),
                }
            }
        }
        let Some((_, arity)) = BUILTINS.iter().find(|(n, _)| *n == first) else {
            return Err(scanner.error(start, format!("unknown function {first:?}")));
        };
        if args.len() != *arity {
            return Err(scanner.error(
                start,
                format!("{first} expects {arity} argument(s), got {}", args.len()),
            ));
        }
        return Ok(Expr::Call { name: first, args });
    }

    let mut segments = vec![first];
    while scanner.peek() == Some('.') {
        scanner.bump();
        segments.push(parse_ident(scanner)?);
    }
    Ok(Expr::Path(segments))
}

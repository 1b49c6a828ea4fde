//! LP file format: writer and a parser for the subset this crate emits.
//!
//! The writer produces standard sections (`Minimize`, `Subject To`,
//! `Bounds`, `Binary`, `End`) so exported models load directly into common
//! external solvers.  The parser understands the same subset and exists so
//! tests can check that an exported file reconstructs the original model.

use std::collections::HashMap;
use std::io::{self, Write};

use thiserror::Error;

use super::{Model, Sense, VarId, VarKind};

#[derive(Debug, Error)]
#[error("LP parse error at token {position} ({token}): {message}")]
pub struct ParseError {
    position: usize,
    token: String,
    message: String,
}

const LINE_WIDTH: usize = 76;

fn fmt_num(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x}")
    }
}

/// Appends tokens to `out`, folding lines at a fixed width.  Continuation
/// lines start with extra indentation so they cannot be mistaken for a new
/// labelled row.
fn write_folded(out: &mut impl Write, head: &str, tokens: &[String]) -> io::Result<()> {
    let mut line = head.to_string();
    for token in tokens {
        if line.len() + 1 + token.len() > LINE_WIDTH && line.len() > head.len() {
            writeln!(out, "{line}")?;
            line = "   ".to_string();
        }
        line.push(' ');
        line.push_str(token);
    }
    writeln!(out, "{line}")
}

fn expr_tokens(model: &Model, terms: &[(VarId, f64)], constant: f64) -> Vec<String> {
    let mut tokens = Vec::new();
    for &(var, coef) in terms {
        if coef < 0.0 {
            tokens.push("-".to_string());
        } else if !tokens.is_empty() {
            tokens.push("+".to_string());
        }
        tokens.push(fmt_num(coef.abs()));
        tokens.push(model.var(var).name.clone());
    }
    if constant != 0.0 {
        if constant < 0.0 {
            tokens.push("-".to_string());
        } else if !tokens.is_empty() {
            tokens.push("+".to_string());
        }
        tokens.push(fmt_num(constant.abs()));
    }
    if tokens.is_empty() {
        tokens.push("0".to_string());
        if let Some((_, first)) = model.vars().next() {
            tokens.push(first.name.clone());
        }
    }
    tokens
}

pub(super) fn write_lp(model: &Model, out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "\\ Problem: {}", model.name())?;
    writeln!(out, "Minimize")?;
    let objective: Vec<(VarId, f64)> = model
        .vars()
        .filter(|(_, v)| v.objective != 0.0)
        .map(|(id, v)| (id, v.objective))
        .collect();
    write_folded(
        out,
        " obj:",
        &expr_tokens(model, &objective, model.objective_offset()),
    )?;
    writeln!(out, "Subject To")?;
    for row in model.rows() {
        assert!(!row.terms.is_empty(), "row {} has no terms", row.name);
        let mut tokens = expr_tokens(model, &row.terms, 0.0);
        tokens.push(
            match row.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            }
            .to_string(),
        );
        tokens.push(fmt_num(row.rhs));
        write_folded(out, &format!(" {}:", row.name), &tokens)?;
    }
    let mut bounds_lines = Vec::new();
    for (_, var) in model.vars() {
        let default = match var.kind {
            VarKind::Continuous => (0.0, f64::INFINITY),
            VarKind::Binary => (0.0, 1.0),
        };
        if (var.lower, var.upper) == default {
            continue;
        }
        let line = if var.lower == var.upper {
            format!(" {} = {}", var.name, fmt_num(var.lower))
        } else if var.lower == f64::NEG_INFINITY && var.upper == f64::INFINITY {
            format!(" {} free", var.name)
        } else if var.lower == 0.0 {
            format!(" {} <= {}", var.name, fmt_num(var.upper))
        } else if var.upper == f64::INFINITY {
            format!(" {} >= {}", var.name, fmt_num(var.lower))
        } else {
            format!(
                " {} <= {} <= {}",
                fmt_num(var.lower),
                var.name,
                fmt_num(var.upper)
            )
        };
        bounds_lines.push(line);
    }
    if !bounds_lines.is_empty() {
        writeln!(out, "Bounds")?;
        for line in bounds_lines {
            writeln!(out, "{line}")?;
        }
    }
    let binaries: Vec<String> = model
        .vars()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(_, v)| v.name.clone())
        .collect();
    if !binaries.is_empty() {
        writeln!(out, "Binary")?;
        write_folded(out, "", &binaries)?;
    }
    writeln!(out, "End")
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Tokens {
    items: Vec<String>,
    pos: usize,
}

impl Tokens {
    fn new(text: &str) -> Self {
        let mut items = Vec::new();
        for line in text.lines() {
            let line = line.split('\\').next().unwrap_or("");
            for raw in line.split_whitespace() {
                if let Some(stripped) = raw.strip_suffix(':') {
                    if !stripped.is_empty() {
                        items.push(stripped.to_string());
                    }
                    items.push(":".to_string());
                } else {
                    items.push(raw.to_string());
                }
            }
        }
        Tokens { items, pos: 0 }
    }

    fn peek(&self) -> Option<&str> {
        self.items.get(self.pos).map(String::as_str)
    }

    fn next(&mut self) -> Option<&str> {
        let item = self.items.get(self.pos).map(String::as_str);
        if item.is_some() {
            self.pos += 1;
        }
        item
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            position: self.pos,
            token: self
                .items
                .get(self.pos.min(self.items.len().saturating_sub(1)))
                .cloned()
                .unwrap_or_else(|| "<end>".to_string()),
            message: message.into(),
        }
    }
}

fn parse_number(token: &str) -> Option<f64> {
    match token {
        "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        _ => token.parse().ok(),
    }
}

fn is_section_keyword(token: &str) -> bool {
    matches!(
        token.to_ascii_lowercase().as_str(),
        "subject" | "st" | "s.t." | "bounds" | "binary" | "binaries" | "bin" | "general" | "end"
    )
}

fn is_name(token: &str) -> bool {
    !is_section_keyword(token)
        && parse_number(token).is_none()
        && token
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
}

/// Working representation of a variable while parsing.
#[derive(Default)]
struct VarDraft {
    objective: f64,
    lower: Option<f64>,
    upper: Option<f64>,
    binary: bool,
}

struct Draft {
    order: Vec<String>,
    vars: HashMap<String, VarDraft>,
}

impl Draft {
    fn touch(&mut self, name: &str) {
        if !self.vars.contains_key(name) {
            self.order.push(name.to_string());
            self.vars.insert(name.to_string(), VarDraft::default());
        }
    }
}

/// Parses `(terms, constant)` up to a relational operator or section
/// keyword.
fn parse_expr(
    tokens: &mut Tokens,
    draft: &mut Draft,
) -> Result<(Vec<(String, f64)>, f64), ParseError> {
    let mut terms = Vec::new();
    let mut constant = 0.0;
    while let Some(tok) = tokens.peek() {
        if is_section_keyword(tok) || matches!(tok, "<=" | ">=" | "=" | "<" | ">") {
            break;
        }
        let mut sign = 1.0;
        while let Some(tok) = tokens.peek() {
            match tok {
                "+" => {
                    tokens.next();
                }
                "-" => {
                    sign = -sign;
                    tokens.next();
                }
                _ => break,
            }
        }
        let Some(tok) = tokens.peek() else {
            return Err(tokens.error("expression ended after a sign"));
        };
        if let Some(num) = parse_number(tok) {
            tokens.next();
            match tokens.peek() {
                Some(name_tok) if is_name(name_tok) => {
                    let name = name_tok.to_string();
                    tokens.next();
                    draft.touch(&name);
                    terms.push((name, sign * num));
                }
                _ => constant += sign * num,
            }
        } else if is_name(tok) {
            let name = tok.to_string();
            tokens.next();
            draft.touch(&name);
            terms.push((name, sign));
        } else {
            return Err(tokens.error("expected a number or variable name"));
        }
    }
    Ok((terms, constant))
}

fn parse_sense(tokens: &mut Tokens) -> Result<Sense, ParseError> {
    match tokens.next() {
        Some("<=") | Some("<") => Ok(Sense::Le),
        Some(">=") | Some(">") => Ok(Sense::Ge),
        Some("=") => Ok(Sense::Eq),
        _ => {
            tokens.pos = tokens.pos.saturating_sub(1);
            Err(tokens.error("expected a relational operator"))
        }
    }
}

fn parse_rhs(tokens: &mut Tokens) -> Result<f64, ParseError> {
    let mut sign = 1.0;
    while tokens.peek() == Some("-") || tokens.peek() == Some("+") {
        if tokens.next() == Some("-") {
            sign = -sign;
        }
    }
    match tokens.peek().and_then(parse_number) {
        Some(num) => {
            tokens.next();
            Ok(sign * num)
        }
        None => Err(tokens.error("expected a number")),
    }
}

/// Parses LP text (the subset produced by [`Model::write_lp`]) back into a
/// [`Model`].
pub fn parse_lp(text: &str) -> Result<Model, ParseError> {
    let mut tokens = Tokens::new(text);
    let mut draft = Draft {
        order: Vec::new(),
        vars: HashMap::new(),
    };

    match tokens.next().map(str::to_ascii_lowercase).as_deref() {
        Some("minimize") | Some("min") | Some("minimise") => {}
        Some("maximize") | Some("max") => {
            return Err(tokens.error("maximisation models are not supported"))
        }
        _ => return Err(tokens.error("expected 'Minimize'")),
    }
    if tokens.peek().is_some_and(is_name) && tokens.items.get(tokens.pos + 1).map(String::as_str) == Some(":") {
        tokens.next();
        tokens.next();
    }
    let (objective_terms, offset) = parse_expr(&mut tokens, &mut draft)?;
    for (name, coef) in &objective_terms {
        draft.vars.get_mut(name).unwrap().objective += coef;
    }

    match tokens.next().map(str::to_ascii_lowercase).as_deref() {
        Some("subject") => {
            if tokens.next().map(str::to_ascii_lowercase).as_deref() != Some("to") {
                return Err(tokens.error("expected 'To' after 'Subject'"));
            }
        }
        Some("st") | Some("s.t.") => {}
        _ => return Err(tokens.error("expected 'Subject To'")),
    }

    // Parsed rows as (name, named terms, sense, rhs).
    type ParsedRow = (String, Vec<(String, f64)>, Sense, f64);
    let mut rows: Vec<ParsedRow> = Vec::new();
    while let Some(tok) = tokens.peek() {
        if is_section_keyword(tok) {
            break;
        }
        let name = if is_name(tok)
            && tokens.items.get(tokens.pos + 1).map(String::as_str) == Some(":")
        {
            let name = tok.to_string();
            tokens.next();
            tokens.next();
            name
        } else {
            format!("r{}", rows.len())
        };
        let (terms, constant) = parse_expr(&mut tokens, &mut draft)?;
        let sense = parse_sense(&mut tokens)?;
        let rhs = parse_rhs(&mut tokens)? - constant;
        rows.push((name, terms, sense, rhs));
    }

    loop {
        match tokens.next().map(str::to_ascii_lowercase).as_deref() {
            Some("bounds") => {
                while let Some(tok) = tokens.peek() {
                    if is_section_keyword(tok) {
                        break;
                    }
                    if let Some(lower) = parse_number(tok) {
                        // form: lower <= name <= upper
                        tokens.next();
                        if parse_sense(&mut tokens)? != Sense::Le {
                            return Err(tokens.error("expected '<=' in a range bound"));
                        }
                        let name = match tokens.next() {
                            Some(t) if is_name(t) => t.to_string(),
                            _ => return Err(tokens.error("expected a variable name")),
                        };
                        if parse_sense(&mut tokens)? != Sense::Le {
                            return Err(tokens.error("expected '<=' in a range bound"));
                        }
                        let upper = parse_rhs(&mut tokens)?;
                        draft.touch(&name);
                        let var = draft.vars.get_mut(&name).unwrap();
                        var.lower = Some(lower);
                        var.upper = Some(upper);
                    } else if is_name(tok) {
                        let name = tok.to_string();
                        tokens.next();
                        draft.touch(&name);
                        if tokens.peek() == Some("free") {
                            tokens.next();
                            let var = draft.vars.get_mut(&name).unwrap();
                            var.lower = Some(f64::NEG_INFINITY);
                            var.upper = Some(f64::INFINITY);
                            continue;
                        }
                        let sense = parse_sense(&mut tokens)?;
                        let value = parse_rhs(&mut tokens)?;
                        let var = draft.vars.get_mut(&name).unwrap();
                        match sense {
                            Sense::Le => var.upper = Some(value),
                            Sense::Ge => var.lower = Some(value),
                            Sense::Eq => {
                                var.lower = Some(value);
                                var.upper = Some(value);
                            }
                        }
                    } else {
                        return Err(tokens.error("unexpected token in Bounds"));
                    }
                }
            }
            Some("binary") | Some("binaries") | Some("bin") => {
                while let Some(tok) = tokens.peek() {
                    if is_section_keyword(tok) {
                        break;
                    }
                    if !is_name(tok) {
                        return Err(tokens.error("expected a variable name in Binary"));
                    }
                    let name = tok.to_string();
                    tokens.next();
                    draft.touch(&name);
                    draft.vars.get_mut(&name).unwrap().binary = true;
                }
            }
            Some("general") => {
                return Err(tokens.error("general integer variables are not supported"))
            }
            Some("end") => break,
            Some("subject") | Some("st") | Some("s.t.") => {
                return Err(tokens.error("unexpected second constraint section"))
            }
            Some(_) => return Err(tokens.error("unexpected token between sections")),
            None => break,
        }
    }

    let mut model = Model::new("parsed");
    let mut ids = HashMap::new();
    for name in &draft.order {
        let info = &draft.vars[name];
        let kind = if info.binary {
            VarKind::Binary
        } else {
            VarKind::Continuous
        };
        let default = match kind {
            VarKind::Continuous => (0.0, f64::INFINITY),
            VarKind::Binary => (0.0, 1.0),
        };
        let id = model.add_var(
            name.clone(),
            kind,
            info.lower.unwrap_or(default.0),
            info.upper.unwrap_or(default.1),
            info.objective,
        );
        ids.insert(name.clone(), id);
    }
    model.set_objective_offset(offset);
    for (name, terms, sense, rhs) in rows {
        model.add_row(
            name,
            terms.into_iter().map(|(n, c)| (ids[&n], c)),
            sense,
            rhs,
        );
    }
    Ok(model)
}

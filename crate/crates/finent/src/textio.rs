//! Text formats for knowledge bases, queries and interpretations.
//!
//! The KB format is line based:
//!
//! ```text
//! CONCEPT A
//! ROLE r TRANSITIVE
//! INDIVIDUAL a
//! CI A SUBCLASSOF some r. B
//! CI X EQUIV {a}
//! A(a)
//! r(a,b)
//! ```
//!
//! with concept expressions `top | A | not E | (E and E) | {a} |
//! some r. E | some inv(r). E`. `EQUIV` is accepted between a name and a
//! nominal so normalised bases reprint exactly. Queries are one CQ per
//! line, `Q <- r(x,y), B(y)`. Interpretations use `ELEM n`,
//! `IN A: 1 3`, `EDGE r: (1,2) (2,3)`, `NAME a = 1`.

use std::fmt;

use thiserror::Error;

use crate::interp::Interpretation;
use crate::kb::{ConceptExpr, ConceptId, KnowledgeBase, NormalCi, RoleId, Signature, UnaryType};
use crate::query::{Cq, Ucq};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

fn err<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, col, msg: msg.into() })
}

/// A tokenizer over one line: identifiers, integers and punctuation.
struct Toks<'a> {
    line: usize,
    src: &'a str,
    pos: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(u32),
    Punct(char),
}

impl<'a> Toks<'a> {
    fn new(line: usize, src: &'a str) -> Self {
        Toks { line, src, pos: 0 }
    }
    fn col(&self) -> usize {
        self.pos + 1
    }
    fn peek(&mut self) -> Option<(usize, Tok)> {
        let save = self.pos;
        let t = self.next_tok();
        let at = self.pos;
        self.pos = save;
        t.map(|t| (at, t))
    }
    fn next_tok(&mut self) -> Option<Tok> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= bytes.len() {
            return None;
        }
        let c = bytes[self.pos] as char;
        if c.is_ascii_alphabetic() || c == '_' || c == '~' {
            let start = self.pos;
            while self.pos < bytes.len()
                && (bytes[self.pos].is_ascii_alphanumeric()
                    || bytes[self.pos] == b'_'
                    || bytes[self.pos] == b'~')
            {
                self.pos += 1;
            }
            Some(Tok::Ident(self.src[start..self.pos].to_string()))
        } else if c.is_ascii_digit() {
            let start = self.pos;
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            Some(Tok::Int(self.src[start..self.pos].parse().unwrap()))
        } else {
            self.pos += 1;
            Some(Tok::Punct(c))
        }
    }
    fn expect_punct(&mut self, c: char) -> Result<(), ParseError> {
        let col = self.col();
        match self.next_tok() {
            Some(Tok::Punct(p)) if p == c => Ok(()),
            other => err(self.line, col, format!("expected `{c}`, got {other:?}")),
        }
    }
    fn expect_ident(&mut self) -> Result<String, ParseError> {
        let col = self.col();
        match self.next_tok() {
            Some(Tok::Ident(s)) => Ok(s),
            other => err(self.line, col, format!("expected a name, got {other:?}")),
        }
    }
    fn expect_int(&mut self) -> Result<u32, ParseError> {
        let col = self.col();
        match self.next_tok() {
            Some(Tok::Int(n)) => Ok(n),
            other => err(self.line, col, format!("expected a number, got {other:?}")),
        }
    }
    fn expect_end(&mut self) -> Result<(), ParseError> {
        let col = self.col();
        match self.next_tok() {
            None => Ok(()),
            Some(t) => err(self.line, col, format!("unexpected trailing {t:?}")),
        }
    }
}

fn parse_role(t: &mut Toks, sig: &Signature) -> Result<RoleId, ParseError> {
    let col = t.col();
    let name = t.expect_ident()?;
    if name == "inv" {
        t.expect_punct('(')?;
        let inner = t.expect_ident()?;
        t.expect_punct(')')?;
        match sig.role_by_name(&inner) {
            Some(r) => Ok(r.inverse()),
            None => err(t.line, col, format!("unknown role `{inner}`")),
        }
    } else {
        match sig.role_by_name(&name) {
            Some(r) => Ok(r),
            None => err(t.line, col, format!("unknown role `{name}`")),
        }
    }
}

fn parse_expr(t: &mut Toks, sig: &Signature) -> Result<ConceptExpr, ParseError> {
    let col = t.col();
    match t.next_tok() {
        Some(Tok::Ident(w)) if w == "top" => Ok(ConceptExpr::Top),
        Some(Tok::Ident(w)) if w == "not" => Ok(ConceptExpr::not(parse_expr(t, sig)?)),
        Some(Tok::Ident(w)) if w == "some" => {
            let r = parse_role(t, sig)?;
            t.expect_punct('.')?;
            Ok(ConceptExpr::exists(r, parse_expr(t, sig)?))
        }
        Some(Tok::Ident(w)) => match sig.concept_by_name(&w) {
            Some(c) => Ok(ConceptExpr::Atom(c)),
            None => err(t.line, col, format!("unknown concept name `{w}`")),
        },
        Some(Tok::Punct('(')) => {
            let a = parse_expr(t, sig)?;
            let col2 = t.col();
            match t.next_tok() {
                Some(Tok::Ident(w)) if w == "and" => {}
                other => return err(t.line, col2, format!("expected `and`, got {other:?}")),
            }
            let b = parse_expr(t, sig)?;
            t.expect_punct(')')?;
            Ok(ConceptExpr::and(a, b))
        }
        Some(Tok::Punct('{')) => {
            let col2 = t.col();
            let name = t.expect_ident()?;
            t.expect_punct('}')?;
            match sig.individual_by_name(&name) {
                Some(a) => Ok(ConceptExpr::Nominal(a)),
                None => err(t.line, col2, format!("unknown individual `{name}`")),
            }
        }
        other => err(t.line, col, format!("expected a concept expression, got {other:?}")),
    }
}

/// Parses the KB format; the returned TBox is normalised (already-normal
/// inclusions pass through unchanged).
pub fn parse_kb(text: &str) -> Result<KnowledgeBase, ParseError> {
    let mut sig = Signature::new();
    let mut raw: Vec<(usize, String)> = Vec::new(); // CI lines, processed after declarations
    let mut assertions: Vec<(usize, String)> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut t = Toks::new(line_no, line);
        let (_, first) = t.peek().unwrap();
        match first {
            Tok::Ident(w) if w == "CONCEPT" => {
                t.next_tok();
                let name = t.expect_ident()?;
                t.expect_end()?;
                sig.add_concept(&name)
                    .map_err(|e| ParseError { line: line_no, col: 1, msg: e.to_string() })?;
            }
            Tok::Ident(w) if w == "ROLE" => {
                t.next_tok();
                let name = t.expect_ident()?;
                let r = sig
                    .add_role(&name)
                    .map_err(|e| ParseError { line: line_no, col: 1, msg: e.to_string() })?;
                while let Some((_, Tok::Ident(flag))) = t.peek() {
                    t.next_tok();
                    match flag.as_str() {
                        "TRANSITIVE" => sig.set_transitive(r),
                        "FUNCTIONAL" => sig.set_functional(r),
                        "INVFUNCTIONAL" => sig.set_functional(r.inverse()),
                        other => {
                            return err(line_no, t.col(), format!("unknown role flag `{other}`"))
                        }
                    }
                }
                t.expect_end()?;
            }
            Tok::Ident(w) if w == "INDIVIDUAL" => {
                t.next_tok();
                let name = t.expect_ident()?;
                t.expect_end()?;
                sig.add_individual(&name)
                    .map_err(|e| ParseError { line: line_no, col: 1, msg: e.to_string() })?;
            }
            Tok::Ident(w) if w == "CI" => raw.push((line_no, line.to_string())),
            _ => assertions.push((line_no, line.to_string())),
        }
    }

    let mut raw_cis: Vec<(ConceptExpr, ConceptExpr)> = Vec::new();
    let mut nominal_eqs: Vec<(ConceptId, crate::kb::Ind)> = Vec::new();
    for (line_no, line) in &raw {
        let mut t = Toks::new(*line_no, line);
        t.next_tok(); // CI
        let lhs = parse_expr(&mut t, &sig)?;
        let col = t.col();
        let kw = t.expect_ident()?;
        match kw.as_str() {
            "SUBCLASSOF" => {
                let rhs = parse_expr(&mut t, &sig)?;
                t.expect_end()?;
                raw_cis.push((lhs, rhs));
            }
            "EQUIV" => {
                let rhs = parse_expr(&mut t, &sig)?;
                t.expect_end()?;
                match (&lhs, &rhs) {
                    (ConceptExpr::Atom(c), ConceptExpr::Nominal(a)) => {
                        sig.mark_nominal(*a);
                        nominal_eqs.push((*c, *a));
                    }
                    _ => {
                        raw_cis.push((lhs.clone(), rhs.clone()));
                        raw_cis.push((rhs, lhs));
                    }
                }
            }
            other => return err(*line_no, col, format!("expected SUBCLASSOF or EQUIV, got `{other}`")),
        }
    }

    let mut tbox = crate::kb::normalize(&mut sig, &raw_cis)
        .map_err(|e| ParseError { line: 0, col: 0, msg: e.to_string() })?;
    for (c, a) in nominal_eqs {
        tbox.push(NormalCi::NominalEq(c, a));
    }

    let mut kb = KnowledgeBase { sig, tbox, ..Default::default() };
    for (line_no, line) in &assertions {
        let mut t = Toks::new(*line_no, line);
        let col = t.col();
        let name = t.expect_ident()?;
        t.expect_punct('(')?;
        let arg1 = t.expect_ident()?;
        let a = match kb.sig.individual_by_name(&arg1) {
            Some(a) => a,
            None => return err(*line_no, col, format!("unknown individual `{arg1}`")),
        };
        match t.peek() {
            Some((_, Tok::Punct(','))) => {
                t.next_tok();
                let arg2 = t.expect_ident()?;
                t.expect_punct(')')?;
                t.expect_end()?;
                let b = match kb.sig.individual_by_name(&arg2) {
                    Some(b) => b,
                    None => return err(*line_no, col, format!("unknown individual `{arg2}`")),
                };
                match kb.sig.role_by_name(&name) {
                    Some(r) => {
                        kb.abox_roles.insert((r.base(), a, b));
                    }
                    None => return err(*line_no, col, format!("unknown role `{name}`")),
                }
            }
            _ => {
                t.expect_punct(')')?;
                t.expect_end()?;
                match kb.sig.concept_by_name(&name) {
                    Some(c) => {
                        kb.abox_concepts.insert((a, c));
                    }
                    None => return err(*line_no, col, format!("unknown concept name `{name}`")),
                }
            }
        }
    }
    Ok(kb)
}

fn literal_str(sig: &Signature, c: ConceptId) -> String {
    if c.is_positive() {
        sig.concept_name(c).to_string()
    } else {
        format!("not {}", sig.concept_name(c.complement()))
    }
}

fn conj_str(sig: &Signature, cs: &[ConceptId]) -> String {
    match cs {
        [] => "top".to_string(),
        [c] => literal_str(sig, *c),
        [c, rest @ ..] => format!("({} and {})", literal_str(sig, *c), conj_str(sig, rest)),
    }
}

fn disj_str(sig: &Signature, cs: &[ConceptId]) -> String {
    // B₁ ⊔ … ⊔ Bₘ as ¬(¬B₁ ⊓ … ⊓ ¬Bₘ); the empty disjunction is `not top`.
    match cs {
        [] => "not top".to_string(),
        [c] => literal_str(sig, *c),
        _ => {
            let negs: Vec<ConceptId> = cs.iter().map(|c| c.complement()).collect();
            format!("not {}", conj_str(sig, &negs))
        }
    }
}

/// Writes the KB in its text format, deterministically ordered.
pub fn write_kb(f: &mut impl fmt::Write, kb: &KnowledgeBase) -> fmt::Result {
    let sig = &kb.sig;
    for c in sig.concepts() {
        if c.is_positive() && !sig.concept_name(c).starts_with('~') {
            writeln!(f, "CONCEPT {}", sig.concept_name(c))?;
        }
    }
    for base in 0..sig.role_count() as u32 {
        let d = sig.role_decl(base);
        let mut line = format!("ROLE {}", d.name);
        if d.transitive {
            line.push_str(" TRANSITIVE");
        }
        if d.functional[0] {
            line.push_str(" FUNCTIONAL");
        }
        if d.functional[1] {
            line.push_str(" INVFUNCTIONAL");
        }
        writeln!(f, "{line}")?;
    }
    for a in sig.individuals() {
        writeln!(f, "INDIVIDUAL {}", sig.individual_name(a))?;
    }
    for ci in &kb.tbox {
        match ci {
            NormalCi::Subsume(conj, disj) => {
                writeln!(f, "CI {} SUBCLASSOF {}", conj_str(sig, conj), disj_str(sig, disj))?
            }
            NormalCi::NominalEq(c, a) => writeln!(
                f,
                "CI {} EQUIV {{{}}}",
                literal_str(sig, *c),
                sig.individual_name(*a)
            )?,
            NormalCi::ExistRestr(a, r, b) => writeln!(
                f,
                "CI {} SUBCLASSOF some {}. {}",
                literal_str(sig, *a),
                sig.role_name(*r),
                literal_str(sig, *b)
            )?,
            NormalCi::ValueRestr(a, r, b) => writeln!(
                f,
                "CI {} SUBCLASSOF not some {}. {}",
                literal_str(sig, *a),
                sig.role_name(*r),
                literal_str(sig, b.complement())
            )?,
        }
    }
    for &(a, c) in &kb.abox_concepts {
        writeln!(f, "{}({})", sig.concept_name(c), sig.individual_name(a))?;
    }
    for &(base, a, b) in &kb.abox_roles {
        writeln!(
            f,
            "{}({},{})",
            sig.role_decl(base).name,
            sig.individual_name(a),
            sig.individual_name(b)
        )?;
    }
    Ok(())
}

pub fn print_kb(kb: &KnowledgeBase) -> String {
    let mut s = String::new();
    write_kb(&mut s, kb).unwrap();
    s
}

/// Parses the query format: one CQ per line, `Q <- atom, atom, ...`.
pub fn parse_query(text: &str, sig: &Signature) -> Result<Ucq, ParseError> {
    let mut out = Ucq::default();
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut t = Toks::new(line_no, line);
        let col = t.col();
        let q = t.expect_ident()?;
        if q != "Q" {
            return err(line_no, col, format!("expected `Q`, got `{q}`"));
        }
        t.expect_punct('<')?;
        t.expect_punct('-')?;
        let mut vars: Vec<String> = Vec::new();
        let mut cq = Cq { vars: 0, concept_atoms: vec![], role_atoms: vec![] };
        loop {
            let col = t.col();
            let name = t.expect_ident()?;
            t.expect_punct('(')?;
            let x = t.expect_ident()?;
            match t.peek() {
                Some((_, Tok::Punct(','))) => {
                    t.next_tok();
                    let y = t.expect_ident()?;
                    t.expect_punct(')')?;
                    match sig.role_by_name(&name) {
                        Some(r) => {
                            let vx = var_id(&mut vars, x);
                            let vy = var_id(&mut vars, y);
                            cq.role_atoms.push((r.base(), vx, vy));
                        }
                        None => return err(line_no, col, format!("unknown role `{name}`")),
                    }
                }
                _ => {
                    t.expect_punct(')')?;
                    match sig.concept_by_name(&name) {
                        Some(c) => {
                            let vx = var_id(&mut vars, x);
                            cq.concept_atoms.push((c, vx));
                        }
                        None => return err(line_no, col, format!("unknown concept name `{name}`")),
                    }
                }
            }
            match t.peek() {
                Some((_, Tok::Punct(','))) => {
                    t.next_tok();
                }
                None => break,
                Some((c, tok)) => return err(line_no, c, format!("unexpected {tok:?}")),
            }
        }
        cq.vars = vars.len() as u32;
        out.cqs.push(cq);
    }
    Ok(out)
}

fn var_id(vars: &mut Vec<String>, name: String) -> u32 {
    if let Some(i) = vars.iter().position(|v| *v == name) {
        i as u32
    } else {
        vars.push(name);
        vars.len() as u32 - 1
    }
}

pub fn print_query(q: &Ucq, sig: &Signature) -> String {
    let mut s = String::new();
    for cq in &q.cqs {
        // Renumber variables by first appearance so printing is a fixpoint
        // under parse-then-print.
        let mut order: Vec<u32> = Vec::new();
        let local = |x: u32, order: &mut Vec<u32>| -> u32 {
            if let Some(i) = order.iter().position(|&v| v == x) {
                i as u32
            } else {
                order.push(x);
                order.len() as u32 - 1
            }
        };
        let mut atoms: Vec<String> = Vec::new();
        for &(c, x) in &cq.concept_atoms {
            let x = local(x, &mut order);
            atoms.push(format!("{}(x{})", sig.concept_name(c), x));
        }
        for &(r, x, y) in &cq.role_atoms {
            let x = local(x, &mut order);
            let y = local(y, &mut order);
            atoms.push(format!("{}(x{},x{})", sig.role_decl(r).name, x, y));
        }
        s.push_str(&format!("Q <- {}\n", atoms.join(", ")));
    }
    s
}

/// Parses the interpretation format against a signature.
pub fn parse_interp(text: &str, sig: &Signature) -> Result<Interpretation, ParseError> {
    let mut i = Interpretation::default();
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut t = Toks::new(line_no, line);
        let col = t.col();
        let kw = t.expect_ident()?;
        match kw.as_str() {
            "ELEM" => {
                let n = t.expect_int()?;
                t.expect_end()?;
                i.types = vec![UnaryType(0); n as usize];
            }
            "IN" => {
                let name = t.expect_ident()?;
                let c = match sig.concept_by_name(&name) {
                    Some(c) => c,
                    None => return err(line_no, col, format!("unknown concept name `{name}`")),
                };
                t.expect_punct(':')?;
                while let Some((_, Tok::Int(_))) = t.peek() {
                    let d = t.expect_int()?;
                    if d as usize >= i.types.len() {
                        return err(line_no, col, format!("element {d} out of range"));
                    }
                    i.types[d as usize] = i.types[d as usize].with(c);
                }
                t.expect_end()?;
            }
            "EDGE" => {
                let name = t.expect_ident()?;
                let r = match sig.role_by_name(&name) {
                    Some(r) => r,
                    None => return err(line_no, col, format!("unknown role `{name}`")),
                };
                t.expect_punct(':')?;
                while let Some((_, Tok::Punct('('))) = t.peek() {
                    t.next_tok();
                    let a = t.expect_int()?;
                    t.expect_punct(',')?;
                    let b = t.expect_int()?;
                    t.expect_punct(')')?;
                    if a as usize >= i.types.len() || b as usize >= i.types.len() {
                        return err(line_no, col, "edge endpoint out of range".to_string());
                    }
                    i.add_edge(r, a, b);
                }
                t.expect_end()?;
            }
            "NAME" => {
                let name = t.expect_ident()?;
                let a = match sig.individual_by_name(&name) {
                    Some(a) => a,
                    None => return err(line_no, col, format!("unknown individual `{name}`")),
                };
                t.expect_punct('=')?;
                let d = t.expect_int()?;
                t.expect_end()?;
                if d as usize >= i.types.len() {
                    return err(line_no, col, format!("element {d} out of range"));
                }
                i.names.insert(a, d);
            }
            other => return err(line_no, col, format!("unknown directive `{other}`")),
        }
    }
    Ok(i)
}

pub fn print_interp(i: &Interpretation, sig: &Signature) -> String {
    let mut s = format!("ELEM {}\n", i.size());
    for c in sig.concepts() {
        if !c.is_positive() {
            continue;
        }
        let members: Vec<String> = (0..i.size() as u32)
            .filter(|&d| i.in_concept(c, d))
            .map(|d| d.to_string())
            .collect();
        if !members.is_empty() {
            s.push_str(&format!("IN {}: {}\n", sig.concept_name(c), members.join(" ")));
        }
    }
    for (&base, edges) in &i.roles {
        if edges.is_empty() {
            continue;
        }
        let pairs: Vec<String> = edges.iter().map(|(a, b)| format!("({a},{b})")).collect();
        s.push_str(&format!("EDGE {}: {}\n", sig.role_decl(base).name, pairs.join(" ")));
    }
    for (&a, &d) in &i.names {
        s.push_str(&format!("NAME {} = {}\n", sig.individual_name(a), d));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const KB: &str = "\
CONCEPT A
CONCEPT B
ROLE r TRANSITIVE
INDIVIDUAL a
CI A SUBCLASSOF some r. B
A(a)
";

    #[test]
    fn parse_simple_kb() {
        let kb = parse_kb(KB).unwrap();
        assert_eq!(kb.sig.pair_count(), 2);
        assert_eq!(kb.tbox.len(), 1);
        assert!(kb.sig.is_transitive(kb.sig.role_by_name("r").unwrap()));
        assert_eq!(kb.abox_concepts.len(), 1);
    }

    #[test]
    fn print_parse_fixpoint_for_kb() {
        let kb = parse_kb(KB).unwrap();
        let printed = print_kb(&kb);
        let again = parse_kb(&printed).unwrap();
        assert_eq!(print_kb(&again), printed);
    }

    #[test]
    fn exist_restriction_roundtrip() {
        let kb = parse_kb("CONCEPT A\nROLE r\nCI A SUBCLASSOF some r. (A and not A)\n").unwrap();
        let printed = print_kb(&kb);
        let again = parse_kb(&printed).unwrap();
        assert_eq!(print_kb(&again), printed);
    }

    #[test]
    fn errors_carry_position() {
        let e = parse_kb("CONCEPT A\nCI A SUBCLASSOF some r. B\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.msg.contains("unknown role"));
    }

    #[test]
    fn query_roundtrip() {
        let kb = parse_kb("CONCEPT B\nROLE r\n").unwrap();
        let q = parse_query("Q <- r(x,y), B(y)\n", &kb.sig).unwrap();
        assert_eq!(q.cqs.len(), 1);
        assert_eq!(q.cqs[0].role_atoms.len(), 1);
        assert_eq!(q.cqs[0].concept_atoms.len(), 1);
        let printed = print_query(&q, &kb.sig);
        let again = parse_query(&printed, &kb.sig).unwrap();
        assert_eq!(print_query(&again, &kb.sig), printed);
    }

    #[test]
    fn interp_roundtrip() {
        let kb = parse_kb("CONCEPT A\nROLE r\nINDIVIDUAL a\n").unwrap();
        let text = "ELEM 3\nIN A: 0 2\nEDGE r: (0,1) (1,2)\nNAME a = 0\n";
        let i = parse_interp(text, &kb.sig).unwrap();
        assert_eq!(print_interp(&i, &kb.sig), text);
    }
}

//! Line-oriented native network format.
//!
//! ```text
//! # histidine kinase
//! r1: X -> Xp @ 1.0
//! r2: Xp + Y -> X + Yp @ 2
//! b: 2 A <-> B @ 1.5, 0.5      # expands to `b` and `b_rev`
//! f,g: A <-> 0                 # explicit labels for both directions
//! %species X Xp Y Yp           # optional: pin the species order
//! ```

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use super::{Format, IoError, NetworkDocument};
use crate::crn::{Complex, Crn, CrnBuilder, CrnError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

type Terms = Vec<(BigRational, String)>;

struct Statement {
    line: usize,
    labels: Vec<String>,
    lhs: Terms,
    rhs: Terms,
    reversible: bool,
    rates: Vec<f64>,
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        let body = match src.find('#') {
            Some(i) => &src[..i],
            None => src,
        };
        Cursor {
            chars: body.chars().collect(),
            pos: 0,
            line,
            _src: src,
        }
    }

    fn err(&self, at: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: at + 1,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.chars.len()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        let n = s.chars().count();
        if self.chars[self.pos..].iter().take(n).copied().eq(s.chars()) {
            self.pos += n;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.pos += 1,
            _ => return None,
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        Some(self.chars[start..self.pos].iter().collect())
    }

    fn digits(&mut self) -> Option<String> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().collect())
    }

    /// Labels followed by `:`, or nothing (cursor restored).
    fn labels(&mut self) -> Vec<String> {
        let save = self.pos;
        let mut out = Vec::new();
        loop {
            match self.ident() {
                Some(l) => out.push(l),
                None => break,
            }
            if !self.eat(",") {
                break;
            }
        }
        if !out.is_empty() && self.eat(":") {
            out
        } else {
            self.pos = save;
            Vec::new()
        }
    }

    fn complex(&mut self) -> Result<Terms, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let mut terms = Vec::new();
        loop {
            self.skip_ws();
            let term_start = self.pos;
            let coef = match self.digits() {
                Some(num) => {
                    let mut q = BigRational::from_integer(num.parse::<BigInt>().unwrap());
                    if self.peek() == Some('/') {
                        self.pos += 1;
                        let den = self
                            .digits()
                            .ok_or_else(|| self.err(self.pos, "expected denominator after `/`"))?;
                        let den: BigInt = den.parse().unwrap();
                        if den.is_zero() {
                            return Err(self.err(term_start, "zero denominator"));
                        }
                        q = BigRational::new(q.to_integer(), den);
                    }
                    Some(q)
                }
                None => None,
            };
            match self.ident() {
                Some(name) => {
                    let c = coef.unwrap_or_else(BigRational::one);
                    if c.is_zero() {
                        return Err(self.err(term_start, format!("zero coefficient on `{name}`")));
                    }
                    terms.push((c, name));
                }
                None => match coef {
                    Some(c) if c.is_zero() && terms.is_empty() => {
                        return Ok(terms);
                    }
                    Some(_) => return Err(self.err(self.pos, "expected species name after coefficient")),
                    None => {
                        let msg = if term_start == start {
                            "expected a complex (species terms or `0`)"
                        } else {
                            "expected a species term after `+`"
                        };
                        return Err(self.err(self.pos, msg));
                    }
                },
            }
            if !self.eat("+") {
                return Ok(terms);
            }
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || matches!(c, '.' | '+' | '-'))
        {
            self.pos += 1;
        }
        let tok: String = self.chars[start..self.pos].iter().collect();
        match tok.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
            Ok(_) => Err(self.err(start, format!("rate `{tok}` must be a positive finite number"))),
            Err(_) => Err(self.err(start, format!("invalid rate `{tok}`"))),
        }
    }
}

fn parse_statement(text: &str, line: usize) -> Result<Option<Statement>, ParseError> {
    let mut c = Cursor::new(text, line);
    if c.at_end() {
        return Ok(None);
    }
    let labels = c.labels();
    let lhs = c.complex()?;
    let reversible = if c.eat("<->") {
        true
    } else if c.eat("->") {
        false
    } else {
        return Err(c.err(c.pos, "expected `->` or `<->`"));
    };
    let rhs = c.complex()?;
    let mut rates = Vec::new();
    if c.eat("@") {
        rates.push(c.number()?);
        if c.eat(",") {
            rates.push(c.number()?);
        }
    }
    if !c.at_end() {
        return Err(c.err(c.pos, "unexpected trailing input"));
    }
    let want = if reversible { 2 } else { 1 };
    if !rates.is_empty() && rates.len() != want {
        return Err(c.err(
            0,
            format!("{} reaction needs {} rate(s), found {}", if reversible { "reversible" } else { "irreversible" }, want, rates.len()),
        ));
    }
    if labels.len() > want {
        return Err(c.err(0, format!("too many labels for a reaction with {want} direction(s)")));
    }
    Ok(Some(Statement {
        line,
        labels,
        lhs,
        rhs,
        reversible,
        rates,
    }))
}

fn parse_species_directive(text: &str, line: usize) -> Result<Option<Vec<String>>, ParseError> {
    let trimmed = text.trim_start();
    let Some(rest) = trimmed.strip_prefix("%species") else {
        return Ok(None);
    };
    let offset = text.len() - rest.len();
    let mut c = Cursor::new(rest, line);
    let mut names = Vec::new();
    while !c.at_end() {
        let at = c.pos;
        match c.ident() {
            Some(n) => names.push(n),
            None => return Err(c.err(at + offset, "expected a species name")),
        }
    }
    Ok(Some(names))
}

pub fn parse_native(text: &str) -> Result<NetworkDocument, IoError> {
    let mut species: Vec<String> = Vec::new();
    let mut known: HashMap<String, usize> = HashMap::new();
    let mut statements = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if let Some(names) = parse_species_directive(raw, line)? {
            for n in names {
                if known.contains_key(&n) {
                    continue;
                }
                known.insert(n.clone(), species.len());
                species.push(n);
            }
            continue;
        }
        if let Some(st) = parse_statement(raw, line)? {
            for (_, name) in st.lhs.iter().chain(&st.rhs) {
                if !known.contains_key(name) {
                    known.insert(name.clone(), species.len());
                    species.push(name.clone());
                }
            }
            statements.push(st);
        }
    }

    let m = species.len();
    let complex = |terms: &Terms| {
        let mut v = vec![BigRational::zero(); m];
        for (c, name) in terms {
            v[known[name]] += c;
        }
        Complex(v)
    };
    let mut b = CrnBuilder::new(&species)?;
    let mut labels_seen: HashMap<String, usize> = HashMap::new();
    let mut count = 0usize;
    for st in &statements {
        let s = complex(&st.lhs);
        let p = complex(&st.rhs);
        let mut dirs = vec![(s.clone(), p.clone())];
        if st.reversible {
            dirs.push((p, s));
        }
        for (d, (src, prod)) in dirs.into_iter().enumerate() {
            count += 1;
            let label = match (st.labels.len(), d) {
                (0, _) if st.reversible => {
                    let base = format!("r{}", count - d);
                    if d == 0 { base } else { format!("{base}_rev") }
                }
                (0, _) => format!("r{count}"),
                (1, 0) => st.labels[0].clone(),
                (1, _) => format!("{}_rev", st.labels[0]),
                (_, d) => st.labels[d].clone(),
            };
            if let Some(prev) = labels_seen.insert(label.clone(), st.line) {
                return Err(ParseError {
                    line: st.line,
                    column: 1,
                    message: format!("label `{label}` already used on line {prev}"),
                }
                .into());
            }
            let rate = st.rates.get(d).copied();
            b.add_reaction(label.clone(), src, prod, rate).map_err(|e| match e {
                CrnError::SelfLoop(l) => IoError::Parse(ParseError {
                    line: st.line,
                    column: 1,
                    message: format!("self-loop: reaction `{l}` has identical source and product"),
                }),
                other => IoError::Crn(other),
            })?;
        }
    }
    Ok(NetworkDocument {
        source: None,
        format: Format::Native,
        crn: b.build()?,
        diagnostics: Vec::new(),
    })
}

fn complex_text(c: &Complex, crn: &Crn) -> String {
    let mut parts = Vec::new();
    for (q, s) in c.coeffs().iter().zip(crn.species()) {
        if q.is_zero() {
            continue;
        }
        if q.is_one() {
            parts.push(s.name.clone());
        } else {
            parts.push(format!("{} {}", q, s.name));
        }
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ")
    }
}

/// Writes a network in the native format; reparsing yields an identical
/// network (species order, complex order, labels and rates).
pub fn to_native(crn: &Crn) -> String {
    let mut out = String::from("%species");
    for s in crn.species() {
        out.push(' ');
        out.push_str(&s.name);
    }
    out.push('\n');
    for (k, r) in crn.reactions().iter().enumerate() {
        out.push_str(&format!(
            "{}: {} -> {}",
            r.label,
            complex_text(crn.source(k), crn),
            complex_text(crn.product(k), crn)
        ));
        if let Some(rate) = r.rate {
            out.push_str(&format!(" @ {rate}"));
        }
        out.push('\n');
    }
    out
}

//! Structural SBML subset: species, reactions, stoichiometries, and a
//! mass-action constant when the kinetic law carries exactly the expected
//! number of parameters.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Zero};
use roxmltree::{Document, Node};

use super::{Format, IoError, NetworkDocument};
use crate::crn::{Complex, CrnBuilder, CrnError};

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    node.children().find(|c| c.is_element() && c.tag_name().name() == name)
}

fn children<'a, 'i>(node: Node<'a, 'i>, name: &'a str) -> impl Iterator<Item = Node<'a, 'i>> + 'a {
    node.children()
        .filter(move |c| c.is_element() && c.tag_name().name() == name)
}

/// Exact decimal parse: `2`, `1.5`, `-3e2`, `1/3`.
fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        return (!q.is_zero()).then(|| BigRational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("0{int_part}{frac_part}").parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut q = if scale >= 0 {
        BigRational::from_integer(all * Pow::pow(&ten, scale as u32))
    } else {
        BigRational::new(all, Pow::pow(&ten, (-scale) as u32))
    };
    if neg {
        q = -q;
    }
    Some(q)
}

fn kinetic_parameters(reaction: Node) -> Vec<Option<f64>> {
    let Some(law) = child(reaction, "kineticLaw") else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for (list, item) in [("listOfLocalParameters", "localParameter"), ("listOfParameters", "parameter")] {
        if let Some(l) = child(law, list) {
            for p in children(l, item) {
                out.push(p.attribute("value").and_then(|v| v.trim().parse::<f64>().ok()));
            }
        }
    }
    out
}

pub fn parse_sbml_subset(xml: &str) -> Result<NetworkDocument, IoError> {
    let doc = Document::parse(xml)?;
    let root = doc.root_element();
    if root.tag_name().name() != "sbml" {
        return Err(IoError::Sbml(format!(
            "root element is <{}>, expected <sbml>",
            root.tag_name().name()
        )));
    }
    let model = child(root, "model").ok_or_else(|| IoError::Sbml("missing <model>".into()))?;
    let mut diagnostics = Vec::new();

    let mut species = Vec::new();
    let mut boundary = HashSet::new();
    if let Some(list) = child(model, "listOfSpecies") {
        for s in children(list, "species") {
            let id = s
                .attribute("id")
                .ok_or_else(|| IoError::Sbml("species without id".into()))?;
            if s.attribute("boundaryCondition") == Some("true") {
                diagnostics.push(format!("boundary species `{id}` dropped from complexes"));
                boundary.insert(id.to_string());
            } else {
                species.push(id.to_string());
            }
        }
    }
    let index: HashMap<&str, usize> = species.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut b = CrnBuilder::new(&species)?;

    let Some(reactions) = child(model, "listOfReactions") else {
        diagnostics.push("no reactions".to_string());
        return Ok(NetworkDocument {
            source: None,
            format: Format::Sbml,
            crn: b.build()?,
            diagnostics,
        });
    };

    let mut count = 0;
    for r in children(reactions, "reaction") {
        count += 1;
        let id = r.attribute("id").map(str::to_string).unwrap_or_else(|| format!("r{count}"));
        let side = |list: &str| -> Result<Complex, IoError> {
            let mut v = vec![BigRational::zero(); species.len()];
            if let Some(l) = child(r, list) {
                for sr in children(l, "speciesReference") {
                    let sp = sr
                        .attribute("species")
                        .ok_or_else(|| IoError::Sbml(format!("reaction `{id}`: speciesReference without species")))?;
                    let st = match sr.attribute("stoichiometry") {
                        Some(t) => parse_rational(t).ok_or_else(|| {
                            IoError::Sbml(format!("reaction `{id}`: stoichiometry `{t}` is not a rational number"))
                        })?,
                        None => BigRational::from_integer(1.into()),
                    };
                    if boundary.contains(sp) {
                        continue;
                    }
                    let i = *index
                        .get(sp)
                        .ok_or_else(|| IoError::Sbml(format!("reaction `{id}` references unknown species `{sp}`")))?;
                    v[i] += st;
                }
            }
            Ok(Complex(v))
        };
        let source = side("listOfReactants")?;
        let product = side("listOfProducts")?;
        let reversible = match r.attribute("reversible") {
            Some("true") => true,
            Some(_) => false,
            None => {
                diagnostics.push(format!("reaction `{id}`: no reversible attribute, read as irreversible"));
                false
            }
        };
        let params = kinetic_parameters(r);
        let want = if reversible { 2 } else { 1 };
        let rates: Vec<Option<f64>> = if params.len() == want && params.iter().all(|p| p.is_some_and(|v| v > 0.0)) {
            params
        } else {
            if !params.is_empty() || child(r, "kineticLaw").is_some() {
                diagnostics.push(format!("reaction `{id}`: rate constant not extractable from kinetic law"));
            }
            vec![None; want]
        };
        let mut dirs = vec![(id.clone(), source.clone(), product.clone(), rates[0])];
        if reversible {
            dirs.push((format!("{id}_rev"), product, source, rates[1]));
        }
        for (label, s, p, k) in dirs {
            match b.add_reaction(label.clone(), s, p, k) {
                Ok(_) => {}
                Err(CrnError::SelfLoop(_)) => {
                    diagnostics.push(format!("reaction `{label}` is a self-loop after dropping boundary species; skipped"));
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    if count == 0 {
        diagnostics.push("no reactions".to_string());
    }
    Ok(NetworkDocument {
        source: None,
        format: Format::Sbml,
        crn: b.build()?,
        diagnostics,
    })
}

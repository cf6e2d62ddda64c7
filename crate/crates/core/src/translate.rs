//! Structural translation from a reaction-to-reaction graph: the
//! consistency test, propagation of translation complexes, the per-class
//! nonnegativity shift, and certification.

use std::collections::VecDeque;

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::crn::{linkage_classes, Complex, Crn, CrnBuilder, CrnError};
use crate::linalg::{self, QMatrix};
use crate::r2r::R2RGraph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error("translation system is inconsistent (a cycle of the graph is not a flux mode)")]
    Inconsistent,
    #[error("internal error: conflicting translation complexes for reaction {0}")]
    PropagationConflict(usize),
    #[error("reaction {0} becomes a self-loop after translation")]
    Degenerate(usize),
    #[error("graph has {graph} vertices but the network has {network} reactions")]
    SizeMismatch { graph: usize, network: usize },
    #[error(transparent)]
    Crn(#[from] CrnError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub gamma_equal: bool,
    pub weakly_reversible: bool,
    pub deficiency: usize,
}

impl Certificate {
    pub fn holds(&self) -> bool {
        self.gamma_equal && self.weakly_reversible && self.deficiency == 0
    }

    /// Names of the properties that fail.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.gamma_equal {
            out.push("stoichiometric matrix changed");
        }
        if !self.weakly_reversible {
            out.push("not weakly reversible");
        }
        if self.deficiency != 0 {
            out.push("nonzero deficiency");
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Translation {
    /// Raw propagated complexes; may have negative entries.
    pub alphas: Vec<Complex>,
    /// After the per-linkage-class shift.
    pub shifted_alphas: Vec<Complex>,
    pub translated: Crn,
}

/// Block system `A alpha = b`: one block row per edge `(i, j)` with `-I` at
/// block `i`, `+I` at block `j`, and right-hand side `y_p(i) - y_s(j)`.
pub fn consistency_system(g: &R2RGraph, crn: &Crn) -> (QMatrix, Vec<BigRational>) {
    let m = crn.species_count();
    let r = crn.reaction_count();
    let edges = g.edge_vec();
    let mut a = QMatrix::zeros(edges.len() * m, r * m);
    let mut b = vec![BigRational::zero(); edges.len() * m];
    for (e, &(i, j)) in edges.iter().enumerate() {
        let yp = crn.product(i).coeffs();
        let ys = crn.source(j).coeffs();
        for s in 0..m {
            let row = e * m + s;
            a.set(row, i * m + s, -BigRational::one());
            a.set(row, j * m + s, BigRational::one());
            b[row] = &yp[s] - &ys[s];
        }
    }
    (a, b)
}

pub fn consistency_check(g: &R2RGraph, crn: &Crn) -> bool {
    let (a, b) = consistency_system(g, crn);
    linalg::is_consistent(&a, &b)
}

/// Propagates translation complexes over the undirected graph. Each
/// component starts at its first reaction in `root_order` with alpha = 0.
pub fn propagate_with_roots(
    g: &R2RGraph,
    crn: &Crn,
    root_order: &[usize],
) -> Result<Vec<Complex>, TranslateError> {
    let r = crn.reaction_count();
    if g.reaction_count() != r {
        return Err(TranslateError::SizeMismatch {
            graph: g.reaction_count(),
            network: r,
        });
    }
    let m = crn.species_count();
    // offset(i, j) = y_p(i) - y_s(j), so alpha_j = alpha_i + offset.
    let offset = |i: usize, j: usize| crn.product(i).sub(crn.source(j));
    let mut adj: Vec<Vec<(usize, bool)>> = vec![Vec::new(); r];
    for (i, j) in g.edges() {
        adj[i].push((j, true));
        adj[j].push((i, false));
    }
    let mut alpha: Vec<Option<Complex>> = vec![None; r];
    let order: Vec<usize> = root_order.iter().copied().chain(0..r).collect();
    for root in order {
        if alpha[root].is_some() {
            continue;
        }
        alpha[root] = Some(Complex::zero(m));
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let av = alpha[v].clone().unwrap();
            for &(w, forward) in &adj[v] {
                if alpha[w].is_some() {
                    continue;
                }
                let aw = if forward {
                    av.add(&offset(v, w))
                } else {
                    av.sub(&offset(w, v))
                };
                alpha[w] = Some(aw);
                queue.push_back(w);
            }
        }
    }
    let alpha: Vec<Complex> = alpha.into_iter().map(Option::unwrap).collect();
    for (i, j) in g.edges() {
        if alpha[j] != alpha[i].add(&offset(i, j)) {
            return Err(TranslateError::PropagationConflict(j));
        }
    }
    Ok(alpha)
}

pub fn propagate(g: &R2RGraph, crn: &Crn) -> Result<Vec<Complex>, TranslateError> {
    propagate_with_roots(g, crn, &[])
}

fn translated_network(crn: &Crn, alphas: &[Complex], signed: bool) -> Result<Crn, TranslateError> {
    let names: Vec<&str> = crn.species().iter().map(|s| s.name.as_str()).collect();
    let mut b = CrnBuilder::new(&names)?;
    for (k, rx) in crn.reactions().iter().enumerate() {
        let s = crn.source(k).add(&alphas[k]);
        let p = crn.product(k).add(&alphas[k]);
        b.add_reaction(rx.label.clone(), s, p, rx.rate).map_err(|e| match e {
            CrnError::SelfLoop(_) => TranslateError::Degenerate(k),
            other => other.into(),
        })?;
    }
    Ok(if signed { b.build_signed()? } else { b.build()? })
}

/// Moves each linkage class of the translated network by a common vector
/// so that the componentwise minimum over the class's complexes is zero.
/// This is the least uniform shift leaving every complex nonnegative.
pub fn nonnegative_shift(crn: &Crn, alphas: &[Complex]) -> Result<Vec<Complex>, TranslateError> {
    let raw = translated_network(crn, alphas, true)?;
    let classes = linkage_classes(raw.complex_count(), &raw.edges());
    let mut class_of = vec![0; raw.complex_count()];
    let mut shift = Vec::with_capacity(classes.len());
    for (c, members) in classes.iter().enumerate() {
        let mut low = raw.complexes()[members[0]].clone();
        for &v in members {
            class_of[v] = c;
            for (s, q) in low.0.iter_mut().zip(raw.complexes()[v].coeffs()) {
                if q < s {
                    *s = q.clone();
                }
            }
        }
        shift.push(Complex(low.0.into_iter().map(|q| -q).collect()));
    }
    Ok(raw
        .reactions()
        .iter()
        .zip(alphas)
        .map(|(rx, a)| a.add(&shift[class_of[rx.source]]))
        .collect())
}

/// Propagation, shift and rebuild. The caller decides what to do with a
/// failed [`certify`].
pub fn solve_translation(g: &R2RGraph, crn: &Crn) -> Result<Translation, TranslateError> {
    if !consistency_check(g, crn) {
        return Err(TranslateError::Inconsistent);
    }
    let alphas = propagate(g, crn)?;
    from_alphas(crn, alphas)
}

pub fn from_alphas(crn: &Crn, alphas: Vec<Complex>) -> Result<Translation, TranslateError> {
    let shifted_alphas = nonnegative_shift(crn, &alphas)?;
    let translated = translated_network(crn, &shifted_alphas, false)?;
    Ok(Translation {
        alphas,
        shifted_alphas,
        translated,
    })
}

pub fn certify(translation: &Translation, crn: &Crn) -> Result<Certificate, CrnError> {
    let t = &translation.translated;
    let gamma_equal = t.stoichiometric() == crn.stoichiometric();
    let weakly_reversible = t.linkage_analysis().weakly_reversible;
    let deficiency = t.deficiency()?;
    Ok(Certificate {
        gamma_equal,
        weakly_reversible,
        deficiency,
    })
}

//! Generalized networks carrying kinetic-order complexes, phantom edges
//! between stoichiometrically identical vertices, tree constants and the
//! log-linear steady-state system.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::crn::{graph_deficiency, linkage_classes, Complex, Crn, CrnError};
use crate::linalg::{self, rational_to_f64, QMatrix};
use crate::translate::Translation;

/// Classes up to this size get their tree constants recomputed by explicit
/// in-tree enumeration.
pub const ENUMERATION_LIMIT: usize = 8;
/// Larger classes are still enumerated when the number of out-edge
/// assignments stays below this.
pub const ENUMERATION_BUDGET: f64 = 1e5;
pub const TREE_TOLERANCE: f64 = 1e-10;
pub const LOGLINEAR_TOLERANCE: f64 = 1e-8;
pub const CONDITION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GcrnError {
    #[error("translated complex {0} is never a source; the translation is not weakly reversible")]
    SinkComplex(String),
    #[error("vertex {0} cannot be distinguished: out of range or its class already has a choice")]
    BadDistinguished(usize),
    #[error("expected {expected} {what}, got {got}")]
    Count {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("reaction {0} has no positive rate constant")]
    MissingRate(usize),
    #[error("phantom parameter sigma{0} must be positive")]
    BadSigma(usize),
    #[error("tree constant of vertex {0} vanishes; its linkage class is not strongly connected")]
    ZeroTreeConstant(usize),
    #[error("tree constants of vertex {vertex} disagree (relative gap {gap:e})")]
    TreeMismatch { vertex: usize, gap: f64 },
    #[error("log-linear system is inconsistent (residual {0:e})")]
    Inconsistent(f64),
    #[error("kinetic-order conditions could not be satisfied with positive phantom parameters")]
    SigmaUnsolved(Vec<SigmaCondition>),
    #[error(transparent)]
    Crn(#[from] CrnError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcrnVertex {
    pub stoich: Complex,
    pub kinetic: Complex,
    pub class_id: usize,
    pub distinguished: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrueEdge {
    pub reaction: usize,
    pub source: usize,
    pub target: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhantomEdge {
    /// Zero-based index into the sigma vector.
    pub sigma: usize,
    pub source: usize,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gcrn {
    pub species_count: usize,
    pub vertices: Vec<GcrnVertex>,
    /// Stoichiometric classes, members ascending.
    pub classes: Vec<Vec<usize>>,
    pub true_edges: Vec<TrueEdge>,
    pub phantom_edges: Vec<PhantomEdge>,
    /// Reactions sharing both endpoints. Each is kept as its own edge, which
    /// is the same Laplacian as one edge with the summed rate.
    pub parallel_reactions: Vec<Vec<usize>>,
}

impl Gcrn {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn sigma_count(&self) -> usize {
        self.phantom_edges.len()
    }

    pub fn distinguished(&self) -> Vec<usize> {
        self.classes
            .iter()
            .map(|c| *c.iter().find(|&&v| self.vertices[v].distinguished).expect("one per class"))
            .collect()
    }

    /// All edges, true edges first, as (source, target).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.true_edges
            .iter()
            .map(|e| (e.source, e.target))
            .chain(self.phantom_edges.iter().map(|e| (e.source, e.target)))
            .collect()
    }

    /// Edges with their numeric weights.
    pub fn weighted_edges(&self, rates: &[f64], sigma: &[f64]) -> Vec<(usize, usize, f64)> {
        self.true_edges
            .iter()
            .map(|e| (e.source, e.target, rates[e.reaction]))
            .chain(self.phantom_edges.iter().map(|e| (e.source, e.target, sigma[e.sigma])))
            .collect()
    }

    /// Linkage classes of the full edge set.
    pub fn linkage_classes(&self) -> Vec<Vec<usize>> {
        linkage_classes(self.vertex_count(), &self.edges())
    }

    fn check_inputs(&self, reactions: usize, rates: &[f64], sigma: &[f64]) -> Result<(), GcrnError> {
        if rates.len() != reactions {
            return Err(GcrnError::Count {
                what: "rate constants",
                expected: reactions,
                got: rates.len(),
            });
        }
        if sigma.len() != self.sigma_count() {
            return Err(GcrnError::Count {
                what: "phantom parameters",
                expected: self.sigma_count(),
                got: sigma.len(),
            });
        }
        if let Some(e) = self.true_edges.iter().find(|e| !(rates[e.reaction] > 0.0 && rates[e.reaction].is_finite())) {
            return Err(GcrnError::MissingRate(e.reaction));
        }
        if let Some(j) = (0..sigma.len()).find(|&j| !(sigma[j] > 0.0 && sigma[j].is_finite())) {
            return Err(GcrnError::BadSigma(j));
        }
        Ok(())
    }
}

/// Splits each translated source complex by the original source complex
/// it carries, then applies the default distinguished-vertex choice.
pub fn build_gcrn(crn: &Crn, translation: &Translation) -> Result<Gcrn, GcrnError> {
    let t = &translation.translated;
    let mut vertices: Vec<GcrnVertex> = Vec::new();
    let mut by_key: HashMap<(usize, usize), usize> = HashMap::new();
    let mut class_of_stoich: HashMap<usize, usize> = HashMap::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut edge_source = Vec::with_capacity(crn.reaction_count());
    for (k, rx) in t.reactions().iter().enumerate() {
        let key = (rx.source, crn.reactions()[k].source);
        let v = *by_key.entry(key).or_insert_with(|| {
            let next_class = classes.len();
            let class_id = *class_of_stoich.entry(rx.source).or_insert(next_class);
            if class_id == classes.len() {
                classes.push(Vec::new());
            }
            classes[class_id].push(vertices.len());
            vertices.push(GcrnVertex {
                stoich: t.source(k).clone(),
                kinetic: crn.source(k).clone(),
                class_id,
                distinguished: false,
            });
            vertices.len() - 1
        });
        edge_source.push(v);
    }
    let mut true_edges = Vec::with_capacity(crn.reaction_count());
    for (k, rx) in t.reactions().iter().enumerate() {
        let class = *class_of_stoich
            .get(&rx.product)
            .ok_or_else(|| GcrnError::SinkComplex(t.complex_label(rx.product)))?;
        true_edges.push(TrueEdge {
            reaction: k,
            source: edge_source[k],
            target: classes[class][0],
        });
    }
    let g = Gcrn {
        species_count: crn.species_count(),
        vertices,
        classes,
        true_edges,
        phantom_edges: Vec::new(),
        parallel_reactions: Vec::new(),
    };
    make_vstar_directed(g, &[])
}

/// Chooses one distinguished vertex per class (the listed vertices where
/// given, otherwise the lowest index), sends every true edge entering a
/// class to it, and fans phantom edges out from it to the rest of the
/// class. Phantom parameters are numbered in class order.
pub fn make_vstar_directed(mut g: Gcrn, chosen: &[usize]) -> Result<Gcrn, GcrnError> {
    let mut pick: Vec<Option<usize>> = vec![None; g.classes.len()];
    for &v in chosen {
        let c = g.vertices.get(v).ok_or(GcrnError::BadDistinguished(v))?.class_id;
        if pick[c].is_some_and(|p| p != v) {
            return Err(GcrnError::BadDistinguished(v));
        }
        pick[c] = Some(v);
    }
    let star: Vec<usize> = g
        .classes
        .iter()
        .zip(&pick)
        .map(|(members, p)| p.unwrap_or(members[0]))
        .collect();
    for v in g.vertices.iter_mut() {
        v.distinguished = false;
    }
    for &s in &star {
        g.vertices[s].distinguished = true;
    }
    for e in g.true_edges.iter_mut() {
        e.target = star[g.vertices[e.target].class_id];
    }
    g.phantom_edges.clear();
    for (c, members) in g.classes.iter().enumerate() {
        for &v in members.iter().filter(|&&v| v != star[c]) {
            g.phantom_edges.push(PhantomEdge {
                sigma: g.phantom_edges.len(),
                source: star[c],
                target: v,
            });
        }
    }
    let mut groups: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for e in &g.true_edges {
        groups.entry((e.source, e.target)).or_default().push(e.reaction);
    }
    let mut parallel: Vec<Vec<usize>> = groups.into_values().filter(|r| r.len() > 1).collect();
    parallel.sort();
    g.parallel_reactions = parallel;
    Ok(g)
}

/// Deficiency of the graph whose vertices carry the kinetic-order complexes.
pub fn kinetic_order_deficiency(g: &Gcrn) -> Result<usize, CrnError> {
    let vectors: Vec<&Complex> = g.vertices.iter().map(|v| &v.kinetic).collect();
    graph_deficiency(&vectors, &g.edges(), g.species_count)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeConstants {
    /// Natural logarithms of the tree constants.
    pub ln_k: Vec<f64>,
    /// Enumeration results where the class was small enough.
    pub ln_k_enumerated: Vec<Option<f64>>,
    pub max_relative_gap: f64,
}

impl TreeConstants {
    pub fn values(&self) -> Vec<f64> {
        self.ln_k.iter().map(|l| l.exp()).collect()
    }
}

/// Log of the principal minor of the out-degree Laplacian of `members`
/// with `root` deleted: the weighted count of in-trees rooted at `root`.
fn ln_cofactor(members: &[usize], root: usize, edges: &[(usize, usize, f64)]) -> Option<f64> {
    let rest: Vec<usize> = members.iter().copied().filter(|&v| v != root).collect();
    if rest.is_empty() {
        return Some(0.0);
    }
    let pos: HashMap<usize, usize> = rest.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = rest.len();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for &(a, b, w) in edges {
        let Some(&i) = pos.get(&a) else { continue };
        l[(i, i)] += w;
        if let Some(&j) = pos.get(&b) {
            l[(i, j)] -= w;
        }
    }
    let lu = l.lu();
    let mut sign: f64 = lu.p().determinant();
    let mut ln = 0.0;
    for d in lu.u().diagonal().iter() {
        if *d == 0.0 || !d.is_finite() {
            return None;
        }
        sign *= d.signum();
        ln += d.abs().ln();
    }
    (sign > 0.0).then_some(ln)
}

/// Sum over in-trees rooted at `root` by choosing one outgoing edge per
/// non-root vertex and keeping the choices that reach the root.
fn enumerate_in_trees(members: &[usize], root: usize, edges: &[(usize, usize, f64)]) -> f64 {
    let rest: Vec<usize> = members.iter().copied().filter(|&v| v != root).collect();
    let out: Vec<Vec<(usize, f64)>> = rest
        .iter()
        .map(|&v| edges.iter().filter(|e| e.0 == v).map(|e| (e.1, e.2)).collect())
        .collect();
    let mut parent: HashMap<usize, usize> = HashMap::new();
    fn reaches_root(v: usize, root: usize, parent: &HashMap<usize, usize>, limit: usize) -> bool {
        let mut cur = v;
        for _ in 0..=limit {
            if cur == root {
                return true;
            }
            match parent.get(&cur) {
                Some(&p) => cur = p,
                None => return false,
            }
        }
        false
    }
    fn go(
        i: usize,
        rest: &[usize],
        out: &[Vec<(usize, f64)>],
        root: usize,
        parent: &mut HashMap<usize, usize>,
        weight: f64,
    ) -> f64 {
        if i == rest.len() {
            return if rest.iter().all(|&v| reaches_root(v, root, parent, rest.len())) {
                weight
            } else {
                0.0
            };
        }
        let mut total = 0.0;
        for &(t, w) in &out[i] {
            parent.insert(rest[i], t);
            total += go(i + 1, rest, out, root, parent, weight * w);
        }
        parent.remove(&rest[i]);
        total
    }
    go(0, &rest, &out, root, &mut parent, 1.0)
}

fn ln_tree_constants_cofactor(g: &Gcrn, edges: &[(usize, usize, f64)]) -> Result<Vec<f64>, GcrnError> {
    let mut ln_k = vec![0.0; g.vertex_count()];
    for members in g.linkage_classes() {
        for &v in &members {
            ln_k[v] = ln_cofactor(&members, v, edges).ok_or(GcrnError::ZeroTreeConstant(v))?;
        }
    }
    Ok(ln_k)
}

fn enumerable(members: &[usize], edges: &[(usize, usize, f64)]) -> bool {
    let assignments: f64 = members
        .iter()
        .map(|&v| edges.iter().filter(|e| e.0 == v).count().max(1) as f64)
        .product();
    members.len() <= ENUMERATION_LIMIT || assignments <= ENUMERATION_BUDGET
}

/// Tree constants per vertex, by cofactor, cross-checked by enumeration on
/// classes of at most [`ENUMERATION_LIMIT`] vertices or at most
/// [`ENUMERATION_BUDGET`] out-edge assignments.
pub fn tree_constants(g: &Gcrn, rates: &[f64], sigma: &[f64]) -> Result<TreeConstants, GcrnError> {
    g.check_inputs(rates.len(), rates, sigma)?;
    let edges = g.weighted_edges(rates, sigma);
    let ln_k = ln_tree_constants_cofactor(g, &edges)?;
    let mut ln_k_enumerated = vec![None; g.vertex_count()];
    let mut max_relative_gap: f64 = 0.0;
    for members in g.linkage_classes() {
        if !enumerable(&members, &edges) {
            continue;
        }
        for &v in &members {
            let k = enumerate_in_trees(&members, v, &edges);
            if k <= 0.0 {
                return Err(GcrnError::ZeroTreeConstant(v));
            }
            let gap = ((k.ln() - ln_k[v]).exp() - 1.0).abs();
            if gap > TREE_TOLERANCE {
                return Err(GcrnError::TreeMismatch { vertex: v, gap });
            }
            max_relative_gap = max_relative_gap.max(gap);
            ln_k_enumerated[v] = Some(k.ln());
        }
    }
    Ok(TreeConstants {
        ln_k,
        ln_k_enumerated,
        max_relative_gap,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogLinear {
    /// (root, v) per row.
    pub pairs: Vec<(usize, usize)>,
    /// species x pairs; column p is kinetic(v) - kinetic(root).
    pub m: QMatrix,
    pub b: Vec<f64>,
}

fn star_pairs(g: &Gcrn) -> Vec<(usize, usize)> {
    g.linkage_classes()
        .iter()
        .flat_map(|c| c[1..].iter().map(move |&v| (c[0], v)))
        .collect()
}

fn pair_matrix(g: &Gcrn, pairs: &[(usize, usize)]) -> QMatrix {
    let cols: Vec<Vec<_>> = pairs
        .iter()
        .map(|&(i, j)| g.vertices[j].kinetic.sub(&g.vertices[i].kinetic).0)
        .collect();
    QMatrix::from_columns(g.species_count, &cols)
}

pub fn build_loglinear(g: &Gcrn, ln_k: &[f64]) -> LogLinear {
    let pairs = star_pairs(g);
    let m = pair_matrix(g, &pairs);
    let b = pairs.iter().map(|&(i, j)| ln_k[j] - ln_k[i]).collect();
    LogLinear { pairs, m, b }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogLinearSolution {
    /// ln x with the free species set to zero.
    pub particular: Vec<f64>,
    /// Integer basis of ker(M^T); each vector is one free direction.
    pub kernel_basis: Vec<Vec<BigInt>>,
    pub pivots: Vec<usize>,
    pub residual: f64,
}

fn mat_vec_f64(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Solves `M^T ln x = b` using the exact reduced echelon form of `M^T`.
pub fn solve_loglinear(ll: &LogLinear) -> Result<LogLinearSolution, GcrnError> {
    let mt = ll.m.transpose();
    let species = ll.m.rows();
    let r = linalg::rref(&mt);
    let tb = mat_vec_f64(&r.transform.to_f64(), &ll.b);
    let mut particular = vec![0.0; species];
    for (row, &col) in r.pivots.iter().enumerate() {
        particular[col] = tb[row];
    }
    let residual = loglinear_residual(ll, &particular);
    if residual.is_nan() || residual > LOGLINEAR_TOLERANCE {
        return Err(GcrnError::Inconsistent(residual));
    }
    Ok(LogLinearSolution {
        particular,
        kernel_basis: linalg::kernel(&mt),
        pivots: r.pivots,
        residual,
    })
}

pub fn loglinear_residual(ll: &LogLinear, ln_x: &[f64]) -> f64 {
    let lhs = mat_vec_f64(&ll.m.transpose().to_f64(), ln_x);
    max_abs(lhs.iter().zip(&ll.b).map(|(a, b)| a - b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaCondition {
    /// Kernel vector of M, indexed by pair.
    pub c: Vec<BigInt>,
    /// `c^T b` at the final sigma values.
    pub residual: f64,
    /// Phantom parameter adjusted to satisfy this condition.
    pub solved_for: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaSolution {
    pub sigma: Vec<f64>,
    pub conditions: Vec<SigmaCondition>,
    pub solved: bool,
}

fn condition_value(g: &Gcrn, pairs: &[(usize, usize)], c: &[f64], rates: &[f64], sigma: &[f64]) -> Option<f64> {
    let ln_k = ln_tree_constants_cofactor(g, &g.weighted_edges(rates, sigma)).ok()?;
    Some(pairs.iter().zip(c).map(|(&(i, j), w)| w * (ln_k[j] - ln_k[i])).sum())
}

/// Bisection in ln(sigma_j) on a bracket found by scanning [-30, 30].
fn solve_one(
    f: &dyn Fn(f64) -> Option<f64>,
    start: f64,
) -> Option<f64> {
    let grid: Vec<f64> = (0..=120).map(|i| -30.0 + 0.5 * i as f64).collect();
    let vals: Vec<Option<f64>> = grid.iter().map(|&t| f(t)).collect();
    let mut best: Option<(f64, f64, f64)> = None;
    for w in 0..grid.len() - 1 {
        let (Some(a), Some(b)) = (vals[w], vals[w + 1]) else { continue };
        if a == 0.0 {
            return Some(grid[w]);
        }
        if a.signum() != b.signum() {
            let dist = (0.5 * (grid[w] + grid[w + 1]) - start).abs();
            if best.is_none_or(|(d, _, _)| dist < d) {
                best = Some((dist, grid[w], grid[w + 1]));
            }
        }
    }
    let (_, mut lo, mut hi) = best?;
    let mut flo = f(lo)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// The conditions `c^T b(sigma) = 0` for a basis of ker(M), solved one at
/// a time for a single free phantom parameter each, trying the
/// highest-numbered free parameter first. `fixed` pins parameters.
pub fn sigma_conditions(
    g: &Gcrn,
    rates: &[f64],
    sigma_start: &[f64],
    fixed: &[bool],
) -> Result<SigmaSolution, GcrnError> {
    g.check_inputs(rates.len(), rates, sigma_start)?;
    let pairs = star_pairs(g);
    let kernel = linalg::kernel(&pair_matrix(g, &pairs));
    let mut sigma = sigma_start.to_vec();
    let mut used = fixed.to_vec();
    used.resize(sigma.len(), false);
    let mut solved_for = vec![None; kernel.len()];
    for (ci, c) in kernel.iter().enumerate() {
        let cf: Vec<f64> = c.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
        let now = condition_value(g, &pairs, &cf, rates, &sigma).ok_or(GcrnError::ZeroTreeConstant(0))?;
        if now.abs() <= CONDITION_TOLERANCE {
            continue;
        }
        for j in (0..sigma.len()).rev().filter(|&j| !used[j]) {
            let f = |t: f64| {
                let mut s = sigma.clone();
                s[j] = t.exp();
                condition_value(g, &pairs, &cf, rates, &s)
            };
            if let Some(t) = solve_one(&f, sigma[j].ln()) {
                sigma[j] = t.exp();
                used[j] = true;
                solved_for[ci] = Some(j);
                break;
            }
        }
    }
    let mut conditions = Vec::with_capacity(kernel.len());
    let mut solved = true;
    for (c, s) in kernel.into_iter().zip(solved_for) {
        let cf: Vec<f64> = c.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
        let residual = condition_value(g, &pairs, &cf, rates, &sigma).unwrap_or(f64::NAN);
        let scale = c.iter().map(|v| v.abs().to_f64().unwrap_or(1.0)).fold(1.0, f64::max);
        solved &= residual.abs() <= CONDITION_TOLERANCE * scale;
        conditions.push(SigmaCondition {
            c,
            residual,
            solved_for: s,
        });
    }
    Ok(SigmaSolution {
        sigma,
        conditions,
        solved,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub loglinear: f64,
    pub complex_balance: f64,
    pub mass_action: f64,
}

fn monomial(y: &Complex, ln_x: &[f64]) -> f64 {
    y.coeffs()
        .iter()
        .zip(ln_x)
        .filter(|(q, _)| !q.is_zero())
        .map(|(q, l)| rational_to_f64(q) * l)
        .sum::<f64>()
        .exp()
}

/// Mass-action residual of the original network at `x`, relative to the
/// largest reaction flux.
pub fn mass_action_residual(crn: &Crn, rates: &[f64], x: &[f64]) -> f64 {
    let ln_x: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let mut dx = vec![0.0; crn.species_count()];
    let mut largest: f64 = 0.0;
    for k in 0..crn.reaction_count() {
        let flux = rates[k] * monomial(crn.source(k), &ln_x);
        largest = largest.max(flux.abs());
        for (s, d) in dx.iter_mut().enumerate() {
            let net = &crn.product(k).coeffs()[s] - &crn.source(k).coeffs()[s];
            if !net.is_zero() {
                *d += flux * rational_to_f64(&net);
            }
        }
    }
    if largest == 0.0 {
        return 0.0;
    }
    max_abs(dx) / largest
}

/// `A_k R~(x)` relative to the largest edge flux.
pub fn complex_balance_residual(g: &Gcrn, rates: &[f64], sigma: &[f64], x: &[f64]) -> f64 {
    let ln_x: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let mono: Vec<f64> = g.vertices.iter().map(|v| monomial(&v.kinetic, &ln_x)).collect();
    let mut net = vec![0.0; g.vertex_count()];
    let mut largest: f64 = 0.0;
    for (a, b, w) in g.weighted_edges(rates, sigma) {
        let flux = w * mono[a];
        largest = largest.max(flux);
        net[a] -= flux;
        net[b] += flux;
    }
    if largest == 0.0 {
        return 0.0;
    }
    max_abs(net) / largest
}

pub fn residuals(crn: &Crn, g: &Gcrn, ll: &LogLinear, rates: &[f64], sigma: &[f64], x: &[f64]) -> Residuals {
    let ln_x: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    Residuals {
        loglinear: loglinear_residual(ll, &ln_x),
        complex_balance: complex_balance_residual(g, rates, sigma, x),
        mass_action: mass_action_residual(crn, rates, x),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parametrization {
    pub kinetic_deficiency: usize,
    pub sigma: Vec<f64>,
    pub conditions: Vec<SigmaCondition>,
    pub tree: TreeConstants,
    pub loglinear: LogLinear,
    pub solution: LogLinearSolution,
    /// exp(particular).
    pub point: Vec<f64>,
    pub residuals: Residuals,
}

impl Parametrization {
    /// The steady state `exp(particular + sum_i t_i v_i)` for kernel
    /// directions `v_i`.
    pub fn point_at(&self, t: &[f64]) -> Vec<f64> {
        let mut ln_x = self.solution.particular.clone();
        for (ti, v) in t.iter().zip(&self.solution.kernel_basis) {
            for (l, c) in ln_x.iter_mut().zip(v) {
                *l += ti * c.to_f64().unwrap_or(f64::NAN);
            }
        }
        ln_x.into_iter().map(f64::exp).collect()
    }
}

/// Steps from kinetic-order deficiency to a verified steady state. Phantom
/// parameters marked `fixed` are never adjusted by the condition solver.
pub fn parametrize(
    crn: &Crn,
    g: &Gcrn,
    rates: &[f64],
    sigma: &[f64],
    fixed: &[bool],
) -> Result<Parametrization, GcrnError> {
    if rates.len() != crn.reaction_count() {
        return Err(GcrnError::Count {
            what: "rate constants",
            expected: crn.reaction_count(),
            got: rates.len(),
        });
    }
    g.check_inputs(rates.len(), rates, sigma)?;
    let kinetic_deficiency = kinetic_order_deficiency(g)?;
    let (sigma, conditions) = if kinetic_deficiency > 0 {
        let s = sigma_conditions(g, rates, sigma, fixed)?;
        if !s.solved {
            return Err(GcrnError::SigmaUnsolved(s.conditions));
        }
        (s.sigma, s.conditions)
    } else {
        (sigma.to_vec(), Vec::new())
    };
    let tree = tree_constants(g, rates, &sigma)?;
    let loglinear = build_loglinear(g, &tree.ln_k);
    let solution = solve_loglinear(&loglinear)?;
    let point: Vec<f64> = solution.particular.iter().map(|l| l.exp()).collect();
    let residuals = residuals(crn, g, &loglinear, rates, &sigma, &point);
    Ok(Parametrization {
        kinetic_deficiency,
        sigma,
        conditions,
        tree,
        loglinear,
        solution,
        point,
        residuals,
    })
}

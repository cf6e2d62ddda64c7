//! Elementary flux modes by double description, plus the shared-source
//! family and reaction partition derived from them.

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use petgraph::unionfind::UnionFind;
use thiserror::Error;

use crate::crn::Crn;
use crate::deadline::{Deadline, TimedOut};
use crate::linalg::{self, QMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EfmError {
    #[error(transparent)]
    TimedOut(#[from] TimedOut),
    #[error("reaction {0} has a zero column in the stoichiometric matrix")]
    ZeroColumn(usize),
    #[error("stoichiometric matrix has no columns")]
    NoReactions,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FluxMode {
    /// Scaled so that the smallest nonzero entry is 1.
    pub vector: Vec<BigRational>,
    /// Sorted indices of the strictly positive entries.
    pub support: Vec<usize>,
}

impl FluxMode {
    fn from_ray(ray: &[BigInt]) -> Self {
        let min = ray
            .iter()
            .filter(|v| v.is_positive())
            .min()
            .cloned()
            .unwrap_or_else(BigInt::one);
        let vector = ray
            .iter()
            .map(|v| BigRational::new(v.clone(), min.clone()))
            .collect();
        let support = ray
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_positive())
            .map(|(i, _)| i)
            .collect();
        FluxMode { vector, support }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn is_unitary(&self) -> bool {
        self.vector.iter().all(|v| v.is_zero() || v.is_one())
    }

    pub fn contains(&self, reaction: usize) -> bool {
        self.support.binary_search(&reaction).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Cyclic,
    Stoichiometric,
}

impl ModeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModeKind::Cyclic => "cyclic",
            ModeKind::Stoichiometric => "stoichiometric",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FluxModeAnalysis {
    pub reaction_count: usize,
    pub modes: Vec<FluxMode>,
    pub kinds: Vec<ModeKind>,
    pub unitary: bool,
    pub covers: bool,
    pub shared_source_family: Vec<Vec<usize>>,
    pub partition: Vec<Vec<usize>>,
}

impl FluxModeAnalysis {
    /// Reason the translation procedure cannot continue, if any.
    pub fn rejection(&self) -> Option<String> {
        if let Some(i) = self.modes.iter().position(|m| !m.is_unitary()) {
            return Some(format!(
                "elementary flux mode {} is not unitary (entries {})",
                i,
                self.modes[i]
                    .vector
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ));
        }
        if !self.covers {
            let uncovered = uncovered_reactions(&self.modes, self.reaction_count);
            return Some(format!(
                "elementary flux modes do not cover the reaction set (uncovered reactions {:?})",
                uncovered
            ));
        }
        None
    }
}

/// Computes modes, kinds, flags, F and G for a network.
pub fn analyze(crn: &Crn, deadline: &Deadline) -> Result<FluxModeAnalysis, EfmError> {
    let modes = elementary_flux_modes(crn.stoichiometric(), deadline)?;
    let kinds = classify(&modes, crn.incidence());
    let r = crn.reaction_count();
    let (unitary, covers) = check_unitary_and_coverage(&modes, r);
    let shared_source_family = shared_source_sets(crn);
    let partition = partition_reactions(&modes, &shared_source_family);
    Ok(FluxModeAnalysis {
        reaction_count: r,
        modes,
        kinds,
        unitary,
        covers,
        shared_source_family,
        partition,
    })
}

struct Ray {
    values: Vec<BigInt>,
    support: FixedBitSet,
}

impl Ray {
    fn new(values: Vec<BigInt>) -> Self {
        let mut support = FixedBitSet::with_capacity(values.len());
        for (i, v) in values.iter().enumerate() {
            if !v.is_zero() {
                support.insert(i);
            }
        }
        Ray { values, support }
    }
}

/// Extreme rays of `{v >= 0 : gamma v = 0}`, sorted by support.
pub fn elementary_flux_modes(
    gamma: &QMatrix,
    deadline: &Deadline,
) -> Result<Vec<FluxMode>, EfmError> {
    let r = gamma.cols();
    if r == 0 {
        return Err(EfmError::NoReactions);
    }
    for k in 0..r {
        if (0..gamma.rows()).all(|i| gamma.get(i, k).is_zero()) {
            return Err(EfmError::ZeroColumn(k));
        }
    }

    let constraints = row_space_basis(gamma);
    let mut rays: Vec<Ray> = (0..r)
        .map(|i| {
            let mut v = vec![BigInt::zero(); r];
            v[i] = BigInt::one();
            Ray::new(v)
        })
        .collect();

    for h in &constraints {
        deadline.check()?;
        let vals: Vec<BigInt> = rays.iter().map(|ray| dot(h, &ray.values)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();

        let mut next: Vec<Ray> = Vec::new();
        for (i, ray) in rays.iter().enumerate() {
            if vals[i].is_zero() {
                next.push(Ray::new(ray.values.clone()));
            }
        }
        for &p in &pos {
            deadline.check()?;
            for &n in &neg {
                let mut union = rays[p].support.clone();
                union.union_with(&rays[n].support);
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(w, ray)| w == p || w == n || !ray.support.is_subset(&union));
                if !adjacent {
                    continue;
                }
                let hp = &vals[p];
                let hn = -&vals[n];
                let combined: Vec<BigInt> = rays[p]
                    .values
                    .iter()
                    .zip(&rays[n].values)
                    .map(|(a, b)| a * &hn + b * hp)
                    .collect();
                next.push(Ray::new(primitive(combined)));
            }
        }
        rays = next;
    }

    let mut modes: Vec<FluxMode> = rays.iter().map(|ray| FluxMode::from_ray(&ray.values)).collect();
    modes.sort_by(|a, b| a.support.cmp(&b.support).then_with(|| a.vector.cmp(&b.vector)));
    modes.dedup();
    Ok(modes)
}

fn dot(h: &[BigInt], v: &[BigInt]) -> BigInt {
    h.iter()
        .zip(v)
        .filter(|(a, b)| !a.is_zero() && !b.is_zero())
        .map(|(a, b)| a * b)
        .sum()
}

fn primitive(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
    v
}

/// Integer rows spanning the row space of `m`.
fn row_space_basis(m: &QMatrix) -> Vec<Vec<BigInt>> {
    let red = linalg::rref(m).reduced;
    let mut out = Vec::new();
    for i in 0..red.rows() {
        let row = red.row(i);
        if row.iter().all(Zero::is_zero) {
            continue;
        }
        let l = row
            .iter()
            .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let ints: Vec<BigInt> = row.iter().map(|q| (q * BigRational::from(l.clone())).to_integer()).collect();
        out.push(primitive(ints));
    }
    out
}

/// A mode is cyclic when it lies in the kernel of the incidence matrix.
pub fn classify(modes: &[FluxMode], ia: &QMatrix) -> Vec<ModeKind> {
    modes
        .iter()
        .map(|m| {
            if ia.mul_vec(&m.vector).iter().all(Zero::is_zero) {
                ModeKind::Cyclic
            } else {
                ModeKind::Stoichiometric
            }
        })
        .collect()
}

/// `(unitary, covers)` for a mode set over `r` reactions.
pub fn check_unitary_and_coverage(modes: &[FluxMode], r: usize) -> (bool, bool) {
    let unitary = modes.iter().all(FluxMode::is_unitary);
    let mut sum = vec![BigRational::zero(); r];
    for m in modes {
        for (s, v) in sum.iter_mut().zip(&m.vector) {
            *s += v;
        }
    }
    let union_all = uncovered_reactions(modes, r).is_empty();
    let covers = r > 0 && union_all && sum.iter().all(|v| v.is_positive());
    (unitary, covers)
}

fn uncovered_reactions(modes: &[FluxMode], r: usize) -> Vec<usize> {
    (0..r)
        .filter(|&k| !modes.iter().any(|m| m.contains(k)))
        .collect()
}

/// Sets of at least two reactions sharing a source complex, ordered by the
/// source complex index.
pub fn shared_source_sets(crn: &Crn) -> Vec<Vec<usize>> {
    let mut by_source: Vec<Vec<usize>> = vec![Vec::new(); crn.complex_count()];
    for (k, rx) in crn.reactions().iter().enumerate() {
        by_source[rx.source].push(k);
    }
    by_source.into_iter().filter(|s| s.len() >= 2).collect()
}

/// Closure of "share a reaction" and "contain reactions with a common
/// source" over modes; each block is the union of its modes' supports.
pub fn partition_reactions(modes: &[FluxMode], family: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let q = modes.len();
    let mut uf = UnionFind::<usize>::new(q);
    let max_r = modes
        .iter()
        .flat_map(|m| m.support.iter().copied())
        .chain(family.iter().flatten().copied())
        .max()
        .map_or(0, |x| x + 1);
    let mut first_mode: Vec<Option<usize>> = vec![None; max_r];
    for (i, m) in modes.iter().enumerate() {
        for &k in &m.support {
            match first_mode[k] {
                Some(j) => {
                    uf.union(i, j);
                }
                None => first_mode[k] = Some(i),
            }
        }
    }
    for f in family {
        let touching: Vec<usize> = f.iter().filter_map(|&k| first_mode[k]).collect();
        for w in touching.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    let mut blocks: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut slot = std::collections::HashMap::new();
    for (i, m) in modes.iter().enumerate() {
        let root = uf.find(i);
        let b = *slot.entry(root).or_insert_with(|| {
            blocks.push((root, Vec::new()));
            blocks.len() - 1
        });
        blocks[b].1.extend(m.support.iter().copied());
    }
    let mut out: Vec<Vec<usize>> = blocks
        .into_iter()
        .map(|(_, mut v)| {
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    out.sort();
    out
}

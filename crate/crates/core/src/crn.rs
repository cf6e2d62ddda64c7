//! Reaction networks, their structural matrices, and linkage/deficiency
//! analysis.

use std::collections::HashMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use petgraph::unionfind::UnionFind;
use thiserror::Error;

use crate::linalg::{self, QMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CrnError {
    #[error("species `{0}` declared twice")]
    DuplicateSpecies(String),
    #[error("reaction `{0}` has identical source and product complexes (self-loop)")]
    SelfLoop(String),
    #[error("complexes {0} and {1} are identical vectors")]
    DuplicateComplexes(usize, usize),
    #[error("complex has {found} coefficients but the network has {expected} species")]
    LengthMismatch { expected: usize, found: usize },
    #[error("complex {0} has a negative coefficient")]
    NegativeCoefficient(usize),
    #[error("reaction `{label}` references complex {index} which does not exist")]
    BadComplexIndex { label: String, index: usize },
    #[error("stoichiometric matrix disagrees with Y*Ia at ({0}, {1})")]
    GammaMismatch(usize, usize),
    #[error("deficiency formulas disagree: n - l - s = {by_count}, dim(ker Y ∩ im Ia) = {by_intersection}")]
    DeficiencyMismatch {
        by_count: i64,
        by_intersection: i64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Species {
    pub name: String,
    pub index: usize,
}

/// A complex as a vector of stoichiometric coefficients, one per species.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Complex(pub Vec<BigRational>);

impl Complex {
    pub fn zero(m: usize) -> Self {
        Complex(vec![BigRational::zero(); m])
    }

    pub fn from_ints(v: &[i64]) -> Self {
        Complex(v.iter().map(|&c| linalg::int(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|c| !c.is_negative())
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(BigRational::is_integer)
    }

    pub fn add(&self, other: &Complex) -> Complex {
        Complex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Complex) -> Complex {
        Complex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(linalg::rational_to_f64).collect()
    }

    /// Human-readable form such as `X + 2 Yp`, `0` for the empty complex.
    pub fn display<'a>(&'a self, species: &'a [Species]) -> ComplexDisplay<'a> {
        ComplexDisplay {
            complex: self,
            species,
        }
    }
}

pub struct ComplexDisplay<'a> {
    complex: &'a Complex,
    species: &'a [Species],
}

impl fmt::Display for ComplexDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, s) in self.complex.0.iter().zip(self.species) {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.is_one() {
                write!(f, "{}", s.name)?;
            } else {
                write!(f, "{} {}", c, s.name)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub label: String,
    pub source: usize,
    pub product: usize,
    pub rate: Option<f64>,
}

/// Incrementally assembles a network, merging identical complexes.
#[derive(Debug, Clone, Default)]
pub struct CrnBuilder {
    species: Vec<Species>,
    complexes: Vec<Complex>,
    index: HashMap<Complex, usize>,
    reactions: Vec<Reaction>,
}

impl CrnBuilder {
    pub fn new<S: AsRef<str>>(species: &[S]) -> Result<Self, CrnError> {
        let mut b = CrnBuilder::default();
        for name in species {
            b.add_species(name.as_ref())?;
        }
        Ok(b)
    }

    pub fn add_species(&mut self, name: &str) -> Result<usize, CrnError> {
        if self.species.iter().any(|s| s.name == name) {
            return Err(CrnError::DuplicateSpecies(name.to_string()));
        }
        let index = self.species.len();
        self.species.push(Species {
            name: name.to_string(),
            index,
        });
        Ok(index)
    }

    pub fn species_count(&self) -> usize {
        self.species.len()
    }

    fn intern(&mut self, c: Complex) -> Result<usize, CrnError> {
        if c.len() != self.species.len() {
            return Err(CrnError::LengthMismatch {
                expected: self.species.len(),
                found: c.len(),
            });
        }
        if let Some(&i) = self.index.get(&c) {
            return Ok(i);
        }
        let i = self.complexes.len();
        self.index.insert(c.clone(), i);
        self.complexes.push(c);
        Ok(i)
    }

    pub fn add_reaction(
        &mut self,
        label: impl Into<String>,
        source: Complex,
        product: Complex,
        rate: Option<f64>,
    ) -> Result<usize, CrnError> {
        let label = label.into();
        if source == product {
            return Err(CrnError::SelfLoop(label));
        }
        let s = self.intern(source)?;
        let p = self.intern(product)?;
        self.reactions.push(Reaction {
            label,
            source: s,
            product: p,
            rate,
        });
        Ok(self.reactions.len() - 1)
    }

    /// Finalizes a network whose complexes must all be nonnegative.
    pub fn build(self) -> Result<Crn, CrnError> {
        if let Some(i) = self.complexes.iter().position(|c| !c.is_nonnegative()) {
            return Err(CrnError::NegativeCoefficient(i));
        }
        self.build_signed()
    }

    /// Finalizes without the sign check (intermediate translations).
    pub fn build_signed(self) -> Result<Crn, CrnError> {
        Crn::assemble(self.species, self.complexes, self.reactions)
    }
}

/// A chemical reaction network with cached structural matrices.
#[derive(Debug, Clone)]
pub struct Crn {
    species: Vec<Species>,
    complexes: Vec<Complex>,
    reactions: Vec<Reaction>,
    y: QMatrix,
    ia: QMatrix,
    gamma: QMatrix,
}

impl Crn {
    /// Builds from explicit parts. Fails if two complexes coincide.
    pub fn from_parts(
        species: Vec<Species>,
        complexes: Vec<Complex>,
        reactions: Vec<Reaction>,
    ) -> Result<Crn, CrnError> {
        let mut seen: HashMap<&Complex, usize> = HashMap::new();
        for (i, c) in complexes.iter().enumerate() {
            if let Some(&j) = seen.get(c) {
                return Err(CrnError::DuplicateComplexes(j, i));
            }
            seen.insert(c, i);
        }
        Crn::assemble(species, complexes, reactions)
    }

    fn assemble(
        species: Vec<Species>,
        complexes: Vec<Complex>,
        reactions: Vec<Reaction>,
    ) -> Result<Crn, CrnError> {
        let m = species.len();
        for c in &complexes {
            if c.len() != m {
                return Err(CrnError::LengthMismatch {
                    expected: m,
                    found: c.len(),
                });
            }
        }
        let n = complexes.len();
        for r in &reactions {
            for idx in [r.source, r.product] {
                if idx >= n {
                    return Err(CrnError::BadComplexIndex {
                        label: r.label.clone(),
                        index: idx,
                    });
                }
            }
            if r.source == r.product {
                return Err(CrnError::SelfLoop(r.label.clone()));
            }
        }
        let (y, ia, gamma) = build_matrices(&complexes, &reactions, m)?;
        Ok(Crn {
            species,
            complexes,
            reactions,
            y,
            ia,
            gamma,
        })
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn complexes(&self) -> &[Complex] {
        &self.complexes
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn species_count(&self) -> usize {
        self.species.len()
    }

    pub fn complex_count(&self) -> usize {
        self.complexes.len()
    }

    pub fn reaction_count(&self) -> usize {
        self.reactions.len()
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s.name == name)
    }

    pub fn source(&self, k: usize) -> &Complex {
        &self.complexes[self.reactions[k].source]
    }

    pub fn product(&self, k: usize) -> &Complex {
        &self.complexes[self.reactions[k].product]
    }

    pub fn complex_matrix(&self) -> &QMatrix {
        &self.y
    }

    pub fn incidence(&self) -> &QMatrix {
        &self.ia
    }

    pub fn stoichiometric(&self) -> &QMatrix {
        &self.gamma
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.reactions.iter().map(|r| (r.source, r.product)).collect()
    }

    pub fn complex_label(&self, i: usize) -> String {
        self.complexes[i].display(&self.species).to_string()
    }

    pub fn reaction_label(&self, k: usize) -> String {
        format!(
            "{} -> {}",
            self.complex_label(self.reactions[k].source),
            self.complex_label(self.reactions[k].product)
        )
    }

    pub fn rates(&self) -> Vec<Option<f64>> {
        self.reactions.iter().map(|r| r.rate).collect()
    }

    pub fn set_rate(&mut self, k: usize, rate: f64) {
        self.reactions[k].rate = Some(rate);
    }

    pub fn with_rates(&self, rates: &[f64]) -> Crn {
        let mut out = self.clone();
        for (r, &k) in out.reactions.iter_mut().zip(rates) {
            r.rate = Some(k);
        }
        out
    }

    pub fn linkage_analysis(&self) -> StructureReport {
        let linkage = linkage_classes(self.complex_count(), &self.edges());
        let strong = strong_linkage_classes(self.complex_count(), &self.edges());
        let dim_s = linalg::rank(&self.gamma);
        let n = self.complex_count();
        let ell = linkage.len();
        let weakly_reversible = linkage == strong;
        StructureReport {
            n,
            ell,
            dim_s,
            deficiency: (n - ell - dim_s) as i64,
            weakly_reversible,
            linkage_classes: linkage,
            strong_linkage_classes: strong,
        }
    }

    /// Deficiency computed by counting and by subspace intersection.
    pub fn deficiency(&self) -> Result<usize, CrnError> {
        let vectors: Vec<&Complex> = self.complexes.iter().collect();
        graph_deficiency(&vectors, &self.edges(), self.species_count())
    }

    /// Checks that two networks have the same reaction graph under the
    /// complex correspondence induced by matching reaction indices.
    pub fn same_reaction_graph(&self, other: &Crn) -> bool {
        if self.reaction_count() != other.reaction_count()
            || self.complex_count() != other.complex_count()
        {
            return false;
        }
        let mut fwd: HashMap<usize, usize> = HashMap::new();
        let mut bwd: HashMap<usize, usize> = HashMap::new();
        for (a, b) in self.reactions.iter().zip(&other.reactions) {
            for (x, y) in [(a.source, b.source), (a.product, b.product)] {
                if *fwd.entry(x).or_insert(y) != y || *bwd.entry(y).or_insert(x) != x {
                    return false;
                }
            }
        }
        true
    }
}

fn build_matrices(
    complexes: &[Complex],
    reactions: &[Reaction],
    m: usize,
) -> Result<(QMatrix, QMatrix, QMatrix), CrnError> {
    let n = complexes.len();
    let r = reactions.len();
    let cols: Vec<Vec<BigRational>> = complexes.iter().map(|c| c.0.clone()).collect();
    let y = QMatrix::from_columns(m, &cols);
    let mut ia = QMatrix::zeros(n, r);
    let mut gamma = QMatrix::zeros(m, r);
    for (k, rx) in reactions.iter().enumerate() {
        ia.set(rx.source, k, -BigRational::one());
        ia.set(rx.product, k, BigRational::one());
        for i in 0..m {
            gamma.set(
                i,
                k,
                &complexes[rx.product].0[i] - &complexes[rx.source].0[i],
            );
        }
    }
    let check = y.mul(&ia);
    for i in 0..m {
        for k in 0..r {
            if check.get(i, k) != gamma.get(i, k) {
                return Err(CrnError::GammaMismatch(i, k));
            }
        }
    }
    Ok((y, ia, gamma))
}

/// Structural summary of a network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureReport {
    pub n: usize,
    pub ell: usize,
    pub dim_s: usize,
    pub deficiency: i64,
    pub weakly_reversible: bool,
    pub linkage_classes: Vec<Vec<usize>>,
    pub strong_linkage_classes: Vec<Vec<usize>>,
}

/// Connected components of the undirected graph, each sorted, ordered by
/// smallest member.
pub fn linkage_classes(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::<usize>::new(n);
    for &(a, b) in edges {
        uf.union(a, b);
    }
    group_by_label(n, |v| uf.find(v))
}

/// Strongly connected components, each sorted, ordered by smallest member.
pub fn strong_linkage_classes(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut g = DiGraph::<(), ()>::with_capacity(n, edges.len());
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for &(a, b) in edges {
        g.add_edge(nodes[a], nodes[b], ());
    }
    let mut label = vec![0; n];
    for (c, comp) in tarjan_scc(&g).into_iter().enumerate() {
        for v in comp {
            label[v.index()] = c;
        }
    }
    group_by_label(n, |v| label[v])
}

fn group_by_label(n: usize, mut label: impl FnMut(usize) -> usize) -> Vec<Vec<usize>> {
    let mut slot: HashMap<usize, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        let l = label(v);
        let g = *slot.entry(l).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(v);
    }
    groups
}

/// Deficiency of a directed graph whose vertices carry complex vectors.
///
/// Vertices need not carry distinct vectors (generalized networks split
/// vertices), so this works on vertex indices throughout. Both
/// `n - l - rank(Y Ia)` and `dim(ker Y ∩ im Ia)` are evaluated; the second
/// uses `dim U + dim W - dim(U + W)` on explicit bases.
pub fn graph_deficiency(
    vectors: &[&Complex],
    edges: &[(usize, usize)],
    m: usize,
) -> Result<usize, CrnError> {
    let n = vectors.len();
    let ell = linkage_classes(n, edges).len();
    let cols: Vec<Vec<BigRational>> = vectors.iter().map(|c| c.0.clone()).collect();
    let y = QMatrix::from_columns(m, &cols);
    let mut ia = QMatrix::zeros(n, edges.len());
    for (k, &(a, b)) in edges.iter().enumerate() {
        ia.set(a, k, -BigRational::one());
        ia.set(b, k, BigRational::one());
    }
    let dim_s = linalg::rank(&y.mul(&ia));
    let by_count = n as i64 - ell as i64 - dim_s as i64;

    let ker_y = linalg::kernel_rational(&y);
    let dim_im = linalg::rank(&ia);
    let mut sum_cols: Vec<Vec<BigRational>> = ker_y.clone();
    sum_cols.extend((0..ia.cols()).map(|k| ia.column(k)));
    let dim_sum = if sum_cols.is_empty() {
        0
    } else {
        linalg::rank(&QMatrix::from_columns(n, &sum_cols))
    };
    let by_intersection = ker_y.len() as i64 + dim_im as i64 - dim_sum as i64;

    if by_count != by_intersection || by_count < 0 {
        return Err(CrnError::DeficiencyMismatch {
            by_count,
            by_intersection,
        });
    }
    Ok(by_count as usize)
}

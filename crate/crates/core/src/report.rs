//! Serializable run reports (JSON schema version 1) and a plain-text
//! rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::blp::{BlpOutcome, SolveStats};
use crate::crn::{Complex, Crn};
use crate::efm::FluxModeAnalysis;
use crate::gcrn::{Gcrn, Parametrization};
use crate::translate::{Certificate, Translation};

pub const SCHEMA_VERSION: u32 = 1;

/// `p/q`, always with an explicit denominator.
pub fn rational_string(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

fn complex_strings(c: &Complex) -> Vec<String> {
    c.coeffs().iter().map(rational_string).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Translated,
    EfmRejected,
    BlpInfeasible,
    Inconsistent,
    Timeout,
    Parametrized,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Translated => "translated",
            Status::EfmRejected => "efm_rejected",
            Status::BlpInfeasible => "blp_infeasible",
            Status::Inconsistent => "inconsistent",
            Status::Timeout => "timeout",
            Status::Parametrized => "parametrized",
        }
    }

    /// Whether a structural translation was produced.
    pub fn is_success(&self) -> bool {
        matches!(self, Status::Translated | Status::Parametrized)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReactionEntry {
    pub label: String,
    pub source: String,
    pub product: String,
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureSection {
    pub species: Vec<String>,
    pub complexes: Vec<String>,
    pub reactions: Vec<ReactionEntry>,
    pub n: usize,
    pub ell: usize,
    pub dim_s: usize,
    pub deficiency: i64,
    pub weakly_reversible: bool,
    pub linkage_classes: Vec<Vec<usize>>,
    pub strong_linkage_classes: Vec<Vec<usize>>,
}

impl StructureSection {
    pub fn new(crn: &Crn) -> Self {
        let s = crn.linkage_analysis();
        StructureSection {
            species: crn.species().iter().map(|s| s.name.clone()).collect(),
            complexes: (0..crn.complex_count()).map(|i| crn.complex_label(i)).collect(),
            reactions: crn
                .reactions()
                .iter()
                .map(|r| ReactionEntry {
                    label: r.label.clone(),
                    source: crn.complex_label(r.source),
                    product: crn.complex_label(r.product),
                    rate: r.rate,
                })
                .collect(),
            n: s.n,
            ell: s.ell,
            dim_s: s.dim_s,
            deficiency: s.deficiency,
            weakly_reversible: s.weakly_reversible,
            linkage_classes: s.linkage_classes,
            strong_linkage_classes: s.strong_linkage_classes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeEntry {
    pub vector: Vec<String>,
    pub support: Vec<usize>,
    pub kind: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfmSection {
    pub modes: Vec<ModeEntry>,
    pub unitary: bool,
    pub covers: bool,
    pub shared_source_family: Vec<Vec<usize>>,
    pub partition: Vec<Vec<usize>>,
}

impl EfmSection {
    pub fn new(a: &FluxModeAnalysis) -> Self {
        EfmSection {
            modes: a
                .modes
                .iter()
                .zip(&a.kinds)
                .map(|(m, k)| ModeEntry {
                    vector: m.vector.iter().map(rational_string).collect(),
                    support: m.support.clone(),
                    kind: k.as_str(),
                })
                .collect(),
            unitary: a.unitary,
            covers: a.covers,
            shared_source_family: a.shared_source_family.clone(),
            partition: a.partition.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlpSection {
    pub feasible: bool,
    pub edges: Vec<(usize, usize)>,
    pub edge_labels: Vec<(String, String)>,
    pub objective: Option<usize>,
    pub offset_weight: Option<i64>,
    pub variables: usize,
    pub constraints: usize,
    pub nodes: u64,
    pub lazy_cuts: usize,
}

impl BlpSection {
    pub fn new(outcome: &BlpOutcome, crn: &Crn) -> Self {
        let label = |k: usize| crn.reactions()[k].label.clone();
        let from_stats = |s: &SolveStats, feasible: bool| BlpSection {
            feasible,
            edges: Vec::new(),
            edge_labels: Vec::new(),
            objective: None,
            offset_weight: None,
            variables: s.variables,
            constraints: s.constraints,
            nodes: s.nodes,
            lazy_cuts: s.lazy_cuts,
        };
        match outcome {
            BlpOutcome::Infeasible(s) => from_stats(s, false),
            BlpOutcome::Optimal(sol) => {
                let mut out = from_stats(&sol.stats, true);
                out.edges = sol.graph.edge_vec();
                out.edge_labels = out.edges.iter().map(|&(i, j)| (label(i), label(j))).collect();
                out.objective = Some(sol.objective);
                out.offset_weight = Some(sol.offset_weight);
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateEntry {
    pub gamma_equal: bool,
    pub weakly_reversible: bool,
    pub deficiency: usize,
    pub holds: bool,
}

impl From<&Certificate> for CertificateEntry {
    fn from(c: &Certificate) -> Self {
        CertificateEntry {
            gamma_equal: c.gamma_equal,
            weakly_reversible: c.weakly_reversible,
            deficiency: c.deficiency,
            holds: c.holds(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranslationSection {
    pub alphas: Vec<Vec<String>>,
    pub shifted_alphas: Vec<Vec<String>>,
    pub complexes: Vec<String>,
    pub reactions: Vec<String>,
    pub native: String,
    pub certificate: Option<CertificateEntry>,
}

impl TranslationSection {
    pub fn new(t: &Translation, cert: Option<&Certificate>) -> Self {
        let tr = &t.translated;
        TranslationSection {
            alphas: t.alphas.iter().map(complex_strings).collect(),
            shifted_alphas: t.shifted_alphas.iter().map(complex_strings).collect(),
            complexes: (0..tr.complex_count()).map(|i| tr.complex_label(i)).collect(),
            reactions: (0..tr.reaction_count()).map(|k| tr.reaction_label(k)).collect(),
            native: crate::io::to_native(tr),
            certificate: cert.map(Into::into),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexEntry {
    pub stoich: String,
    pub kinetic: String,
    pub class_id: usize,
    pub distinguished: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeEntry {
    pub label: String,
    pub source: usize,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GcrnSection {
    pub vertices: Vec<VertexEntry>,
    pub true_edges: Vec<EdgeEntry>,
    pub phantom_edges: Vec<EdgeEntry>,
    pub parallel_reactions: Vec<Vec<String>>,
    pub kinetic_deficiency: Option<usize>,
}

pub fn sigma_name(j: usize) -> String {
    format!("sigma{}", j + 1)
}

impl GcrnSection {
    pub fn new(g: &Gcrn, crn: &Crn, kinetic_deficiency: Option<usize>) -> Self {
        let sp = crn.species();
        let label = |k: usize| crn.reactions()[k].label.clone();
        GcrnSection {
            vertices: g
                .vertices
                .iter()
                .map(|v| VertexEntry {
                    stoich: v.stoich.display(sp).to_string(),
                    kinetic: v.kinetic.display(sp).to_string(),
                    class_id: v.class_id,
                    distinguished: v.distinguished,
                })
                .collect(),
            true_edges: g
                .true_edges
                .iter()
                .map(|e| EdgeEntry {
                    label: label(e.reaction),
                    source: e.source,
                    target: e.target,
                })
                .collect(),
            phantom_edges: g
                .phantom_edges
                .iter()
                .map(|e| EdgeEntry {
                    label: sigma_name(e.sigma),
                    source: e.source,
                    target: e.target,
                })
                .collect(),
            parallel_reactions: g
                .parallel_reactions
                .iter()
                .map(|rs| rs.iter().map(|&k| label(k)).collect())
                .collect(),
            kinetic_deficiency,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionEntry {
    pub c: Vec<String>,
    pub residual: f64,
    pub solved_for: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualsEntry {
    pub loglinear: f64,
    pub complex_balance: f64,
    pub mass_action: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParametrizationSection {
    pub rates: BTreeMap<String, f64>,
    pub sigma: BTreeMap<String, f64>,
    pub conditions: Vec<ConditionEntry>,
    pub tree_constants: Vec<f64>,
    pub pairs: Vec<(usize, usize)>,
    /// Rows are species, columns are pairs.
    pub m: Vec<Vec<String>>,
    pub b: Vec<f64>,
    pub particular_ln_x: Vec<f64>,
    pub point: BTreeMap<String, f64>,
    pub kernel_basis: Vec<Vec<String>>,
    pub residuals: ResidualsEntry,
}

fn ints(v: &[BigInt]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

impl ParametrizationSection {
    pub fn new(p: &Parametrization, crn: &Crn, rates: &[f64]) -> Self {
        let names: Vec<&str> = crn.species().iter().map(|s| s.name.as_str()).collect();
        ParametrizationSection {
            rates: crn
                .reactions()
                .iter()
                .zip(rates)
                .map(|(r, &k)| (r.label.clone(), k))
                .collect(),
            sigma: p.sigma.iter().enumerate().map(|(j, &s)| (sigma_name(j), s)).collect(),
            conditions: p
                .conditions
                .iter()
                .map(|c| ConditionEntry {
                    c: ints(&c.c),
                    residual: c.residual,
                    solved_for: c.solved_for.map(sigma_name),
                })
                .collect(),
            tree_constants: p.tree.values(),
            pairs: p.loglinear.pairs.clone(),
            m: (0..p.loglinear.m.rows())
                .map(|i| p.loglinear.m.row(i).iter().map(rational_string).collect())
                .collect(),
            b: p.loglinear.b.clone(),
            particular_ln_x: p.solution.particular.clone(),
            point: names.iter().zip(&p.point).map(|(n, &x)| (n.to_string(), x)).collect(),
            kernel_basis: p.solution.kernel_basis.iter().map(|v| ints(v)).collect(),
            residuals: ResidualsEntry {
                loglinear: p.residuals.loglinear,
                complex_balance: p.residuals.complex_balance,
                mass_action: p.residuals.mass_action,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub name: String,
    pub format: &'static str,
    pub diagnostics: Vec<String>,
    /// `None` when the run was stopped before a terminal stage on purpose.
    pub status: Option<Status>,
    pub stopped_after: Option<&'static str>,
    pub reason: Option<String>,
    pub structure: StructureSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub efm: Option<EfmSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blp: Option<BlpSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub translation: Option<TranslationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gcrn: Option<GcrnSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parametrization: Option<ParametrizationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parametrization_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<&'static str, f64>>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn status_str(&self) -> &'static str {
        self.status.map(|s| s.as_str()).unwrap_or("incomplete")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let s = &self.structure;
        match self.stopped_after {
            Some(stage) => writeln!(out, "{}: stopped after {stage}", self.name),
            None => writeln!(out, "{}: {}", self.name, self.status_str()),
        }
        .ok();
        if let Some(r) = &self.reason {
            let _ = writeln!(out, "  reason: {r}");
        }
        for d in &self.diagnostics {
            let _ = writeln!(out, "  note: {d}");
        }
        let _ = writeln!(
            out,
            "  structure: m={} n={} r={} l={} s={} deficiency={} weakly_reversible={}",
            s.species.len(),
            s.n,
            s.reactions.len(),
            s.ell,
            s.dim_s,
            s.deficiency,
            s.weakly_reversible
        );
        if let Some(e) = &self.efm {
            let _ = writeln!(out, "  flux modes: {} (unitary={} covers={})", e.modes.len(), e.unitary, e.covers);
        }
        if let Some(b) = &self.blp {
            if b.feasible {
                let edges: Vec<String> = b.edge_labels.iter().map(|(i, j)| format!("{i}->{j}")).collect();
                let _ = writeln!(out, "  graph: {} edges [{}]", edges.len(), edges.join(", "));
            } else {
                let _ = writeln!(out, "  graph: infeasible");
            }
        }
        if let Some(t) = &self.translation {
            let _ = writeln!(out, "  translation:");
            for r in &t.reactions {
                let _ = writeln!(out, "    {r}");
            }
            if let Some(c) = &t.certificate {
                let _ = writeln!(
                    out,
                    "  certificate: gamma_equal={} weakly_reversible={} deficiency={}",
                    c.gamma_equal, c.weakly_reversible, c.deficiency
                );
            }
        }
        if let Some(g) = &self.gcrn {
            let _ = writeln!(
                out,
                "  generalized network: {} vertices, {} phantom edge{}, kinetic deficiency {}",
                g.vertices.len(),
                g.phantom_edges.len(),
                if g.phantom_edges.len() == 1 { "" } else { "s" },
                g.kinetic_deficiency.map(|d| d.to_string()).unwrap_or_else(|| "?".into())
            );
        }
        if let Some(p) = &self.parametrization {
            for (k, v) in &p.sigma {
                let _ = writeln!(out, "    {k} = {v}");
            }
            let _ = writeln!(out, "  steady state:");
            for (name, x) in &p.point {
                let _ = writeln!(out, "    {name} = {x:.12e}");
            }
            let _ = writeln!(
                out,
                "  residuals: loglinear={:.3e} complex_balance={:.3e} mass_action={:.3e}; {} free directions",
                p.residuals.loglinear,
                p.residuals.complex_balance,
                p.residuals.mass_action,
                p.kernel_basis.len()
            );
        }
        if let Some(e) = &self.parametrization_error {
            let _ = writeln!(out, "  parametrization unavailable: {e}");
        }
        out
    }
}

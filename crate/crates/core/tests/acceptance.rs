//! End-to-end acceptance checks. Each criterion prints one PASS or FAIL
//! line; the test fails if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::*;
use crnt_core::blp::{self, BlpOutcome, BlpSolution};
use crnt_core::crn::Crn;
use crnt_core::deadline::Deadline;
use crnt_core::efm::{self, FluxModeAnalysis};
use crnt_core::gcrn::{self, Gcrn};
use crnt_core::io::{self, Format};
use crnt_core::pipeline::{self, Options};
use crnt_core::r2r::{is_cs_compatible, R2RGraph};
use crnt_core::translate::{self, Translation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CLOSED_FORM_TOLERANCE: f64 = 1e-8;
const SIGMA_FORMULA_TOLERANCE: f64 = 1e-9;
const MASS_ACTION_TOLERANCE: f64 = 1e-8;
const DRAWS: usize = 100;

const ZIGZAG_TRANSLATED: &str = "%species X1 X2 X3 X4 X5 X6 X7 X8 X9 X10 X11 X12 X13
r1: X1 + X2 -> X3
r2: X3 -> X1 + X2
r3: X3 -> X3 + X4
r4: X3 + X4 -> X3
r5: X3 + X4 -> X3
r6: X5 + X6 -> X7
r7: X7 -> X5 + X6
r8: X11 -> X9 + X11
r9: X9 + X11 -> X1 + X9 + X11
r10: X9 + X11 -> X9 + X10 + X11
r11: X1 + X9 + X11 -> X9 + X11
r12: X5 + X9 + X11 -> X9 + X11
r13: X9 + X11 -> X11
r14: X9 + X10 + X11 -> X9 + X11
r15: X9 + X11 -> X11
r16: X9 + X11 -> X11
r17: X9 + X10 + X11 -> X9 + X12
r18: X9 + X12 -> X9 + X10 + X11
r19: X9 + X12 -> X5 + X9 + X11
r20: X4 + X11 -> X13
r21: X13 -> X4 + X11
";

const MAPK_TRANSLATED: &str = "%species X K XK Xp XpK Xpp M XppM XpM XspM XM
r1: X + K + M -> XK + M
r2: XK + M -> X + K + M
r3: XK + M -> Xp + K + M
r4: Xp + K + M -> XpK + M
r5: XpK + M -> Xp + K + M
r6: XpK + M -> Xpp + K + M
r7: Xpp + K + M -> XppM + K
r8: XppM + K -> Xpp + K + M
r9: XppM + K -> XpM + K
r10: XpM + K -> Xp + K + M
r11: Xp + K + M -> XpM + K
r12: Xp + K + M -> XspM + K
r13: XspM + K -> Xp + K + M
r14: XspM + K -> XM + K
r15: XM + K -> X + K + M
r16: X + K + M -> XM + K
";

struct Ledger {
    failures: Vec<String>,
}

impl Ledger {
    fn record(&mut self, name: &str, pass: bool, detail: String) {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures.push(name.to_string());
        }
    }
}

fn load(name: &str) -> Crn {
    io::load(&fixture(&format!("networks/{name}.crn")), None).unwrap().crn
}

fn parse(text: &str) -> Crn {
    io::parse_text(text, Format::Native).unwrap().crn
}

struct Translated {
    analysis: FluxModeAnalysis,
    solution: BlpSolution,
    translation: Translation,
}

fn translate_crn(crn: &Crn) -> Option<Translated> {
    let never = Deadline::never();
    let analysis = efm::analyze(crn, &never).ok()?;
    if analysis.rejection().is_some() {
        return None;
    }
    let inst = blp::build_instance(&analysis, crn);
    let BlpOutcome::Optimal(solution) = blp::solve(&inst, &never).ok()? else {
        return None;
    };
    let translation = translate::solve_translation(&solution.graph, crn).ok()?;
    Some(Translated { analysis, solution, translation })
}

/// Same reactions with the same complex vectors, species order pinned.
fn same_network(a: &Crn, b: &Crn) -> bool {
    let names = |c: &Crn| c.species().iter().map(|s| s.name.clone()).collect::<Vec<_>>();
    names(a) == names(b)
        && a.same_reaction_graph(b)
        && (0..a.reaction_count()).all(|k| a.source(k) == b.source(k) && a.product(k) == b.product(k))
}

fn label(g: &Gcrn, crn: &Crn, v: usize) -> String {
    g.vertices[v].kinetic.display(crn.species()).to_string()
}

fn phantom_index(g: &Gcrn, crn: &Crn, from: &str, to: &str) -> usize {
    g.phantom_edges
        .iter()
        .find(|e| label(g, crn, e.source) == from && label(g, crn, e.target) == to)
        .unwrap_or_else(|| panic!("no phantom edge {from} -> {to}"))
        .sigma
}

fn max_relative_error(got: &[f64], want: &[f64]) -> f64 {
    got.iter().zip(want).map(|(g, w)| ((g - w) / w).abs()).fold(0.0, f64::max)
}

/// Rates indexed 1..=r so formulas read with the reaction numbers.
fn draw_rates(rng: &mut ChaCha8Rng, r: usize) -> Vec<f64> {
    std::iter::once(f64::NAN).chain((0..r).map(|_| log_uniform(rng, 0.1, 10.0))).collect()
}

fn histidine(led: &mut Ledger) {
    let start = Instant::now();
    let crn = load("histidine");
    let s = crn.linkage_analysis();
    let t = translate_crn(&crn).expect("histidine translates");
    let elapsed = start.elapsed();

    let modes: BTreeSet<Vec<i64>> = t
        .analysis
        .modes
        .iter()
        .map(|m| m.vector.iter().map(|q| q.to_integer().try_into().unwrap()).collect())
        .collect();
    let want_modes: BTreeSet<Vec<i64>> = [vec![1, 1, 0, 1], vec![0, 1, 1, 0]].into();
    let edges: BTreeSet<(usize, usize)> = t.solution.graph.edges().collect();
    let want_edges: BTreeSet<(usize, usize)> = [(0, 1), (1, 2), (1, 3), (2, 1), (3, 0)].into();
    let cycles = t.solution.graph.minimal_cycle_sets();
    let want_cycles: BTreeSet<Vec<usize>> = [vec![0, 1, 3], vec![1, 2]].into();
    let tr = &t.translation.translated;
    let complexes: BTreeSet<String> = (0..tr.complex_count()).map(|i| tr.complex_label(i)).collect();
    let want_complexes: BTreeSet<String> = ["X + Y", "Xp + Y", "X + Yp"].iter().map(|s| s.to_string()).collect();
    let cert = translate::certify(&t.translation, &crn).unwrap();

    let pass = s.deficiency == 1
        && s.ell == 3
        && !s.weakly_reversible
        && modes == want_modes
        && edges == want_edges
        && cycles == want_cycles
        && complexes == want_complexes
        && cert.holds()
        && elapsed < Duration::from_secs(1);
    led.record(
        "histidine kinase translation",
        pass,
        format!(
            "deficiency {} classes {} wr {} modes {:?} edges {:?} complexes {:?} certificate {} in {:.3}s",
            s.deficiency,
            s.ell,
            s.weakly_reversible,
            modes,
            edges,
            complexes,
            cert.holds(),
            elapsed.as_secs_f64()
        ),
    );
}

fn zigzag_closed_form(k: &[f64], s: &[f64]) -> Vec<f64> {
    let q = k[17] * k[19] + (k[18] + k[19]) * s[2];
    vec![
        k[9] * k[12] * q * s[1] / (k[5] * k[10] * k[11] * k[17] * k[19]),
        k[2] * (k[4] + s[1]) * k[5] * k[10] * k[11] * k[17] * k[19] * s[4]
            / (k[1] * k[3] * k[9] * k[12] * k[16] * q * s[1]),
        (k[4] + s[1]) * s[4] / (k[3] * k[16]),
        s[4] / k[16],
        s[1] / k[5],
        k[5] * k[7] * s[3] / (k[6] * k[15] * s[1]),
        s[3] / k[15],
        k[12] * (k[13] + s[3] + s[4]) * ((k[17] + s[2]) * k[19] + k[18] * s[2]) * s[1]
            / (k[5] * k[8] * k[10] * k[17] * k[19]),
        k[12] * q * s[1] / (k[5] * k[10] * k[17] * k[19]),
        k[12] * (k[18] + k[19]) * s[1] * s[2] / (k[5] * k[14] * k[17] * k[19]),
        k[14] / s[2],
        k[12] * s[1] / (k[5] * k[19]),
        k[14] * k[20] * s[4] / (k[16] * k[21] * s[2]),
    ]
}

fn zigzag(led: &mut Ledger) {
    let start = Instant::now();
    let crn = load("zigzag");
    let t = translate_crn(&crn).expect("zigzag translates");
    let cert = translate::certify(&t.translation, &crn).unwrap();
    let matches = same_network(&t.translation.translated, &parse(ZIGZAG_TRANSLATED));
    let g = gcrn::build_gcrn(&crn, &t.translation).unwrap();
    let pick = (0..g.vertex_count()).find(|&v| label(&g, &crn, v) == "X10 + X11").unwrap();
    let g = gcrn::make_vstar_directed(g, &[pick]).unwrap();
    let kd = gcrn::kinetic_order_deficiency(&g).unwrap();
    let map = [
        phantom_index(&g, &crn, "X4", "X4 + X5"),
        phantom_index(&g, &crn, "X10 + X11", "X10"),
        phantom_index(&g, &crn, "X9", "X7 + X9"),
        phantom_index(&g, &crn, "X9", "X4 + X9"),
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut worst, mut worst_ma, mut free_dims) = (0.0f64, 0.0f64, 0);
    let mut errors = 0;
    for _ in 0..DRAWS {
        let k = draw_rates(&mut rng, 21);
        let s: Vec<f64> = std::iter::once(f64::NAN).chain((0..4).map(|_| log_uniform(&mut rng, 0.1, 10.0))).collect();
        let mut sigma = vec![1.0; g.sigma_count()];
        for (reference, &ours) in map.iter().enumerate() {
            sigma[ours] = s[reference + 1];
        }
        match gcrn::parametrize(&crn, &g, &k[1..], &sigma, &[]) {
            Ok(p) => {
                free_dims = free_dims.max(p.solution.kernel_basis.len());
                worst = worst.max(max_relative_error(&p.point, &zigzag_closed_form(&k, &s)));
                worst_ma = worst_ma.max(p.residuals.mass_action);
            }
            Err(_) => errors += 1,
        }
    }
    let elapsed = start.elapsed();
    let pass = cert.holds()
        && matches
        && kd == 0
        && errors == 0
        && free_dims == 0
        && worst < CLOSED_FORM_TOLERANCE
        && worst_ma < MASS_ACTION_TOLERANCE
        && elapsed < Duration::from_secs(10);
    led.record(
        "zigzag parametrization",
        pass,
        format!(
            "certificate {} matches reference {matches} kinetic deficiency {kd} failures {errors} \
             max closed-form error {worst:.2e} max mass-action residual {worst_ma:.2e} in {:.3}s",
            cert.holds(),
            elapsed.as_secs_f64()
        ),
    );
}

/// Species order X K XK Xp XpK Xpp M XppM XpM XspM XM, with the family
/// parameters read off the point itself.
fn mapk_closed_form(k: &[f64], s1: f64, x: &[f64]) -> Vec<f64> {
    let t2 = x[1];
    let t1 = x[10] / x[1];
    let d = (k[2] + k[3]) * s1 + k[1] * k[3];
    let c = k[1] * k[3] * (k[13] + k[14]) * k[15];
    vec![
        (k[2] + k[3]) * k[15] * t1 / d,
        t2,
        k[1] * k[15] * t1 * t2 / d,
        c * k[16] * t1 / (d * k[12] * k[14] * s1),
        k[4] * c * k[16] * t1 * t2 / (d * (k[5] + k[6]) * k[12] * k[14] * s1),
        k[4] * k[6] * (k[8] + k[9]) * c * k[16] * k[16] * t1
            / (d * (k[5] + k[6]) * k[7] * k[9] * k[12] * k[14] * s1 * s1),
        s1 * t2 / k[16],
        k[4] * k[6] * c * k[16] * t1 * t2 / (d * (k[5] + k[6]) * k[9] * k[12] * k[14] * s1),
        (s1 * (k[5] + k[6]) * k[11] + k[4] * k[6] * k[16]) * c * t1 * t2
            / (d * (k[5] + k[6]) * k[10] * k[12] * k[14] * s1),
        k[1] * k[3] * k[15] * t1 * t2 / (d * k[14]),
        t1 * t2,
    ]
}

fn mapk(led: &mut Ledger) {
    let start = Instant::now();
    let crn = load("mapk");
    let t = translate_crn(&crn).expect("mapk translates");
    let cert = translate::certify(&t.translation, &crn).unwrap();
    let matches = same_network(&t.translation.translated, &parse(MAPK_TRANSLATED));
    let g = gcrn::build_gcrn(&crn, &t.translation).unwrap();
    let kd = gcrn::kinetic_order_deficiency(&g).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut worst, mut worst_sigma, mut worst_ma) = (0.0f64, 0.0f64, 0.0f64);
    let mut errors = 0;
    for _ in 0..DRAWS {
        let k = draw_rates(&mut rng, 16);
        let s1 = log_uniform(&mut rng, 0.1, 10.0);
        let directions: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
        match gcrn::parametrize(&crn, &g, &k[1..], &[s1, 1.0], &[true, false]) {
            Ok(p) => {
                let s2 = (k[11] + k[12]) * s1 / k[16];
                worst_sigma = worst_sigma.max(((p.sigma[1] - s2) / s2).abs());
                for x in [p.point.clone(), p.point_at(&directions)] {
                    worst = worst.max(max_relative_error(&x, &mapk_closed_form(&k, s1, &x)));
                    worst_ma = worst_ma.max(gcrn::mass_action_residual(&crn, &k[1..], &x));
                }
            }
            Err(_) => errors += 1,
        }
    }
    let elapsed = start.elapsed();
    let pass = cert.holds()
        && matches
        && kd == 1
        && errors == 0
        && worst_sigma < SIGMA_FORMULA_TOLERANCE
        && worst < CLOSED_FORM_TOLERANCE
        && worst_ma < MASS_ACTION_TOLERANCE
        && elapsed < Duration::from_secs(10);
    led.record(
        "mapk parametrization",
        pass,
        format!(
            "certificate {} matches reference {matches} kinetic deficiency {kd} failures {errors} \
             max sigma2 error {worst_sigma:.2e} max closed-form error {worst:.2e} \
             max mass-action residual {worst_ma:.2e} in {:.3}s",
            cert.holds(),
            elapsed.as_secs_f64()
        ),
    );
}

fn efm_oracle(led: &mut Ledger) {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut checked, mut mismatches) = (0, 0);
    while checked < 500 {
        let Some(crn) = random_crn(&mut rng, 4, 5, 5, 2) else { continue };
        checked += 1;
        let modes = efm::elementary_flux_modes(crn.stoichiometric(), &Deadline::never()).unwrap();
        if mode_set(&modes) != brute_force_modes(crn.stoichiometric()) {
            mismatches += 1;
        }
    }
    led.record(
        "flux modes against support enumeration",
        mismatches == 0,
        format!("{checked} networks, {mismatches} mismatches"),
    );
}

fn blp_oracle(led: &mut Ledger) {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let (mut checked, mut feasible, mut mismatches) = (0, 0, 0);
    while checked < 200 {
        let Some(crn) = cyclic_crn(&mut rng) else { continue };
        if crn.reaction_count() > 4 {
            continue;
        }
        let Ok(analysis) = efm::analyze(&crn, &Deadline::never()) else { continue };
        if analysis.rejection().is_some() {
            continue;
        }
        checked += 1;
        let inst = blp::build_instance(&analysis, &crn);
        let got = match blp::solve(&inst, &Deadline::never()).unwrap() {
            BlpOutcome::Optimal(s) => Some(s.graph.edge_vec()),
            BlpOutcome::Infeasible(_) => None,
        };
        let want = exhaustive_blp(&crn, &analysis.modes);
        if got.is_some() {
            feasible += 1;
        }
        if got != want {
            mismatches += 1;
            println!("  mismatch on\n{}  solver {got:?} exhaustive {want:?}", io::to_native(&crn));
        }
    }
    led.record(
        "edge selection against exhaustive search",
        mismatches == 0,
        format!("{checked} instances, {feasible} feasible, {mismatches} mismatches"),
    );
}

fn invariants(led: &mut Ledger) {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (mut networks, mut ps_failures) = (0, 0);
    let (mut successes, mut bad_successes) = (0, 0);
    while networks < 300 {
        let Some(crn) = cyclic_crn(&mut rng).or_else(|| random_crn(&mut rng, 4, 5, 5, 2)) else { continue };
        networks += 1;
        if !is_cs_compatible(&R2RGraph::product_source(&crn), &crn) {
            ps_failures += 1;
        }
        if let Some(t) = translate_crn(&crn) {
            let tr = &t.translation.translated;
            successes += 1;
            if !translate::certify(&t.translation, &crn).unwrap().holds()
                || !weakly_reversible_by_dfs(tr)
                || float_deficiency(tr) != 0
            {
                bad_successes += 1;
            }
        }
    }
    for name in ["histidine", "zigzag", "mapk"] {
        let crn = load(name);
        let t = translate_crn(&crn).unwrap();
        successes += 1;
        let tr = &t.translation.translated;
        if !weakly_reversible_by_dfs(tr) || float_deficiency(tr) != 0 {
            bad_successes += 1;
        }
    }
    led.record(
        "product-source graphs are complex-source compatible",
        ps_failures == 0,
        format!("{networks} networks, {ps_failures} failures"),
    );
    led.record(
        "successful translations are weakly reversible with deficiency zero",
        bad_successes == 0 && successes > 3,
        format!("{successes} translations, {bad_successes} failures"),
    );

    let mut worst = 0.0f64;
    let mut unenumerated = 0;
    for name in ["histidine", "zigzag", "mapk"] {
        let crn = load(name);
        let t = translate_crn(&crn).unwrap();
        let g = gcrn::build_gcrn(&crn, &t.translation).unwrap();
        let rates: Vec<f64> = (0..crn.reaction_count()).map(|k| 0.3 + 0.7 * k as f64).collect();
        let tree = gcrn::tree_constants(&g, &rates, &vec![1.3; g.sigma_count()]).unwrap();
        unenumerated += tree.ln_k_enumerated.iter().filter(|e| e.is_none()).count();
        worst = worst.max(tree.max_relative_gap);
    }
    led.record(
        "tree constants agree with spanning-tree enumeration",
        worst <= gcrn::TREE_TOLERANCE && unenumerated == 0,
        format!("max relative gap {worst:.2e}, {unenumerated} vertices not enumerated"),
    );
}

fn batch(led: &mut Ledger) {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_path_buf();
    for f in ["histidine", "zigzag", "mapk"] {
        std::fs::copy(fixture(&format!("networks/{f}.crn")), dir.join(format!("{f}.crn"))).unwrap();
    }
    std::fs::copy(fixture("pathological/complete9.crn"), dir.join("complete9.crn")).unwrap();
    let opts = Options { timeout: Some(Duration::from_secs(1)), ..Options::default() };
    let start = Instant::now();
    let a = pipeline::batch(&dir, None, &opts).unwrap();
    let elapsed = start.elapsed();
    let b = pipeline::batch(&dir, None, &opts).unwrap();
    let count = |k: &str| a.counts.get(k).copied().unwrap_or(0);
    let same = a.counts == b.counts && a.entries == b.entries;
    let pass = count("translated") == 3 && count("timeout") == 1 && a.total == 4 && same && elapsed < Duration::from_secs(5);
    led.record(
        "batch run",
        pass,
        format!("counts {:?} repeatable {same} in {:.3}s", a.counts, elapsed.as_secs_f64()),
    );
}

fn main() {
    let mut led = Ledger { failures: Vec::new() };
    histidine(&mut led);
    zigzag(&mut led);
    mapk(&mut led);
    efm_oracle(&mut led);
    blp_oracle(&mut led);
    invariants(&mut led);
    batch(&mut led);
    if !led.failures.is_empty() {
        eprintln!("failed criteria: {:?}", led.failures);
        std::process::exit(1);
    }
}

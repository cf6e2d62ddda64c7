//! Random network generators and brute-force oracles shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use crnt_core::crn::{Complex, Crn, CrnBuilder};
use crnt_core::efm::FluxMode;
use crnt_core::linalg::{self, QMatrix};
use crnt_core::r2r::{is_cs_compatible, R2RGraph};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

/// Network on `m` species whose reactions connect complexes drawn from a
/// pool of `pool` random complexes with coefficients up to `max_coeff`.
/// Returns `None` when the draw degenerates.
pub fn random_crn(rng: &mut ChaCha8Rng, max_species: usize, max_pool: usize, max_reactions: usize, max_coeff: i64) -> Option<Crn> {
    let m = rng.gen_range(1..=max_species);
    let pool_size = rng.gen_range(2..=max_pool);
    let mut pool: Vec<Vec<i64>> = Vec::new();
    let mut seen = HashSet::new();
    for _ in 0..pool_size * 4 {
        if pool.len() == pool_size {
            break;
        }
        let c: Vec<i64> = (0..m).map(|_| rng.gen_range(0..=max_coeff)).collect();
        if seen.insert(c.clone()) {
            pool.push(c);
        }
    }
    if pool.len() < 2 {
        return None;
    }
    let r = rng.gen_range(1..=max_reactions);
    let mut pairs = BTreeSet::new();
    let mut order = Vec::new();
    for _ in 0..r * 4 {
        if order.len() == r {
            break;
        }
        let a = rng.gen_range(0..pool.len());
        let b = rng.gen_range(0..pool.len());
        if a != b && pairs.insert((a, b)) {
            order.push((a, b));
        }
    }
    if order.is_empty() {
        return None;
    }
    let names: Vec<String> = (0..m).map(|i| format!("S{i}")).collect();
    let mut builder = CrnBuilder::new(&names).ok()?;
    for (k, &(a, b)) in order.iter().enumerate() {
        builder
            .add_reaction(format!("r{}", k + 1), Complex::from_ints(&pool[a]), Complex::from_ints(&pool[b]), None)
            .ok()?;
    }
    builder.build().ok()
}

/// Divides by the first nonzero entry.
pub fn normalize(v: &[BigRational]) -> Vec<BigRational> {
    let first = v.iter().find(|q| !q.is_zero()).cloned().expect("nonzero vector");
    v.iter().map(|q| q / &first).collect()
}

/// Elementary modes by support enumeration: a subset `S` is the support of
/// an elementary mode iff the kernel of the columns in `S` is one
/// dimensional and spanned by a vector with all entries of one sign.
pub fn brute_force_modes(gamma: &QMatrix) -> BTreeSet<(Vec<usize>, Vec<BigRational>)> {
    let r = gamma.cols();
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << r) {
        let cols: Vec<usize> = (0..r).filter(|&k| mask & (1 << k) != 0).collect();
        let sub = gamma.select_columns(&cols);
        let ker = linalg::kernel_rational(&sub);
        if ker.len() != 1 {
            continue;
        }
        let v = &ker[0];
        let all_pos = v.iter().all(|q| q.is_positive());
        let all_neg = v.iter().all(|q| q.is_negative());
        if !(all_pos || all_neg) {
            continue;
        }
        let mut full = vec![BigRational::zero(); r];
        for (&k, q) in cols.iter().zip(v) {
            full[k] = q.abs();
        }
        out.insert((cols, normalize(&full)));
    }
    out
}

pub fn mode_set(modes: &[FluxMode]) -> BTreeSet<(Vec<usize>, Vec<BigRational>)> {
    modes.iter().map(|m| (m.support.clone(), normalize(&m.vector))).collect()
}

/// Each support carries exactly one directed Hamiltonian cycle and
/// nothing else among its own vertices.
pub fn supports_are_single_cycles(g: &R2RGraph, supports: &[Vec<usize>]) -> bool {
    supports.iter().all(|s| {
        let inside: HashSet<usize> = s.iter().copied().collect();
        let internal: Vec<(usize, usize)> = g.edges().filter(|(i, j)| inside.contains(i) && inside.contains(j)).collect();
        if internal.len() != s.len() {
            return false;
        }
        let out_ok = s.iter().all(|v| internal.iter().filter(|e| e.0 == *v).count() == 1);
        let in_ok = s.iter().all(|v| internal.iter().filter(|e| e.1 == *v).count() == 1);
        if !(out_ok && in_ok) {
            return false;
        }
        // Follow successors from the first vertex; a single cycle visits all.
        let next = |v: usize| internal.iter().find(|e| e.0 == v).unwrap().1;
        let mut v = s[0];
        let mut steps = 0;
        loop {
            v = next(v);
            steps += 1;
            if v == s[0] {
                break;
            }
        }
        steps == s.len()
    })
}

pub fn offset_norm(crn: &Crn, i: usize, j: usize) -> BigRational {
    crn.product(i)
        .sub(crn.source(j))
        .coeffs()
        .iter()
        .fold(BigRational::zero(), |acc, q| acc + q.abs())
}

/// Exhaustive search over all directed graphs on the reactions. The
/// optimum is the fewest edges, then the smallest total offset norm, then
/// the lexicographically smallest sorted edge list.
pub fn exhaustive_blp(crn: &Crn, modes: &[FluxMode]) -> Option<Vec<(usize, usize)>> {
    let r = crn.reaction_count();
    let pairs: Vec<(usize, usize)> = (0..r).flat_map(|i| (0..r).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    assert!(pairs.len() <= 20, "exhaustive search is for tiny networks");
    let supports: Vec<Vec<usize>> = modes.iter().map(|m| m.support.clone()).collect();
    let mut best: Option<(usize, BigRational, Vec<(usize, usize)>)> = None;
    for mask in 0u64..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> = (0..pairs.len()).filter(|&b| mask & (1 << b) != 0).map(|b| pairs[b]).collect();
        if let Some((n, _, _)) = &best {
            if edges.len() > *n {
                continue;
            }
        }
        let g = R2RGraph::from_edges(r, edges.iter().copied());
        if !is_cs_compatible(&g, crn) || !supports_are_single_cycles(&g, &supports) {
            continue;
        }
        let w = edges.iter().fold(BigRational::zero(), |acc, &(i, j)| acc + offset_norm(crn, i, j));
        let key = (edges.len(), w, edges);
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
    }
    best.map(|b| b.2)
}

/// Weak reversibility by reachability: every reaction's product reaches
/// its source.
pub fn weakly_reversible_by_dfs(crn: &Crn) -> bool {
    let n = crn.complex_count();
    let mut adj = vec![Vec::new(); n];
    for (a, b) in crn.edges() {
        adj[a].push(b);
    }
    let reaches = |from: usize, to: usize| {
        let mut seen = vec![false; n];
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if std::mem::replace(&mut seen[v], true) {
                continue;
            }
            stack.extend(adj[v].iter().copied());
        }
        false
    };
    crn.edges().iter().all(|&(a, b)| reaches(b, a))
}

/// Rank by partial-pivot elimination in floating point.
pub fn float_rank(rows: &[Vec<f64>]) -> usize {
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let ncols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..a.len()).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())) else {
            break;
        };
        if a[p][c].abs() < 1e-9 {
            continue;
        }
        a.swap(rank, p);
        for i in 0..a.len() {
            if i != rank {
                let f = a[i][c] / a[rank][c];
                for j in c..ncols {
                    a[i][j] -= f * a[rank][j];
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Deficiency from scratch: complexes, components and float rank of the
/// reaction vectors.
pub fn float_deficiency(crn: &Crn) -> i64 {
    let n = crn.complex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], v: usize) -> usize {
        let mut v = v;
        while p[v] != v {
            p[v] = p[p[v]];
            v = p[v];
        }
        v
    }
    for (a, b) in crn.edges() {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let ell = (0..n).filter(|&v| find(&mut parent, v) == v).count();
    let vectors: Vec<Vec<f64>> = (0..crn.reaction_count())
        .map(|k| crn.product(k).sub(crn.source(k)).to_f64())
        .collect();
    n as i64 - ell as i64 - float_rank(&vectors) as i64
}

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

/// Networks over a small pool of complexes with a bias toward cycles so
/// that a fair share passes the flux-mode checks.
pub fn cyclic_crn(rng: &mut ChaCha8Rng) -> Option<Crn> {
    if rng.gen_bool(0.3) {
        return random_crn(rng, 3, 4, 4, 1);
    }
    let m = rng.gen_range(1..=3);
    let pool: BTreeSet<Vec<i64>> = (0..rng.gen_range(2..=4)).map(|_| (0..m).map(|_| rng.gen_range(0..=1)).collect()).collect();
    let pool: Vec<Vec<i64>> = pool.into_iter().collect();
    if pool.len() < 2 {
        return None;
    }
    let mut text = format!(
        "%species {}\n",
        (0..m).map(|i| format!("S{i}")).collect::<Vec<_>>().join(" ")
    );
    let show = |c: &[i64]| {
        let terms: Vec<String> = c.iter().enumerate().filter(|(_, &v)| v > 0).map(|(i, _)| format!("S{i}")).collect();
        if terms.is_empty() { "0".to_string() } else { terms.join(" + ") }
    };
    let mut seen = BTreeSet::new();
    let r = rng.gen_range(2..=4);
    let mut k = 0;
    while k < r {
        let len = rng.gen_range(2..=pool.len().min(r - k).max(2));
        let mut cycle: Vec<usize> = (0..pool.len()).collect();
        for i in 0..cycle.len() {
            let j = rng.gen_range(i..cycle.len());
            cycle.swap(i, j);
        }
        cycle.truncate(len);
        for w in 0..len {
            if k == r {
                break;
            }
            let (a, b) = (cycle[w], cycle[(w + 1) % len]);
            if seen.insert((a, b)) {
                k += 1;
                text.push_str(&format!("r{k}: {} -> {}\n", show(&pool[a]), show(&pool[b])));
            }
        }
        if seen.len() >= pool.len() * (pool.len() - 1) {
            break;
        }
    }
    crnt_core::io::parse_text(&text, crnt_core::io::Format::Native).ok().map(|d| d.crn)
}

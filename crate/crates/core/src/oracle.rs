//! Exact analysis of the model on small rings.
//!
//! States are encoded base `c` with site 0 least significant (type `k` is
//! digit `k - 1`). The generator charges, for every dissatisfied site `v` and
//! every offset `q` in the support of the moving distribution, rate `mu(q)` to
//! the configuration produced by the accepted swap `(v, v+q)`; denied attempts
//! contribute nothing off the diagonal.

use std::collections::{BTreeMap, HashMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{run_replicates, RunOptions};
use crate::error::{param, Error, Result};
use crate::model::{judge, ModelParams, RingConfiguration};
use crate::moving::MovingDistribution;

pub const DEFAULT_STATE_LIMIT: u128 = 2_000_000;
/// Largest type-count sector solved densely in [`absorption_analysis`].
pub const DENSE_SECTOR_LIMIT: usize = 6000;
const POISSON_TAIL: f64 = 1e-10;

/// Bijection between ring configurations and `0..c^L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateSpace {
    len: usize,
    types: usize,
    size: usize,
}

impl StateSpace {
    pub fn new(len: usize, types: usize) -> Result<Self> {
        Self::with_limit(len, types, DEFAULT_STATE_LIMIT)
    }

    pub fn with_limit(len: usize, types: usize, limit: u128) -> Result<Self> {
        if len < 3 {
            return param(format!("ring length must be at least 3, got {len}"));
        }
        if types < 2 {
            return param(format!("need at least 2 types, got {types}"));
        }
        let states = (types as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
        if states > limit {
            return Err(Error::Capacity { states, limit });
        }
        Ok(StateSpace {
            len,
            types,
            size: states as usize,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn types(&self) -> usize {
        self.types
    }

    /// Number of states, `c^L`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn encode(&self, config: &RingConfiguration) -> usize {
        config
            .colors()
            .iter()
            .rev()
            .fold(0, |acc, &col| acc * self.types + (col as usize - 1))
    }

    pub fn decode(&self, mut code: usize) -> RingConfiguration {
        let mut colors = Vec::with_capacity(self.len);
        for _ in 0..self.len {
            colors.push((code % self.types) as u8 + 1);
            code /= self.types;
        }
        RingConfiguration::new(colors, self.types).expect("decoded configuration is valid")
    }

    /// Per-type counts of `code`, without building the configuration.
    fn sector(&self, mut code: usize) -> Vec<u8> {
        let mut counts = vec![0u8; self.types];
        for _ in 0..self.len {
            counts[code % self.types] += 1;
            code /= self.types;
        }
        counts
    }
}

/// Canonical enumeration `0..c^L`.
pub fn enumerate_states(len: usize, types: usize) -> Result<(StateSpace, std::ops::Range<usize>)> {
    let space = StateSpace::new(len, types)?;
    Ok((space, 0..space.size()))
}

/// Sparse rate matrix in compressed-row form.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    space: StateSpace,
    row_ptr: Vec<usize>,
    targets: Vec<u32>,
    rates: Vec<f64>,
    exit: Vec<f64>,
}

impl GeneratorMatrix {
    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.size
    }

    /// Off-diagonal entries of row `s`, targets ascending.
    pub fn row(&self, s: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[s], self.row_ptr[s + 1]);
        self.targets[a..b]
            .iter()
            .zip(&self.rates[a..b])
            .map(|(&t, &r)| (t as usize, r))
    }

    pub fn exit_rate(&self, s: usize) -> f64 {
        self.exit[s]
    }

    /// Diagonal entry, minus the exit rate.
    pub fn diagonal(&self, s: usize) -> f64 {
        -self.exit[s]
    }

    pub fn rate(&self, s: usize, target: usize) -> f64 {
        if s == target {
            return self.diagonal(s);
        }
        self.row(s)
            .find(|&(t, _)| t == target)
            .map_or(0.0, |(_, r)| r)
    }

    pub fn max_exit_rate(&self) -> f64 {
        self.exit.iter().copied().fold(0.0, f64::max)
    }

    pub fn nnz(&self) -> usize {
        self.targets.len()
    }
}

pub fn build_generator(
    len: usize,
    params: &ModelParams,
    mu: &MovingDistribution,
) -> Result<GeneratorMatrix> {
    build_generator_with_limit(len, params, mu, DEFAULT_STATE_LIMIT)
}

pub fn build_generator_with_limit(
    len: usize,
    params: &ModelParams,
    mu: &MovingDistribution,
    limit: u128,
) -> Result<GeneratorMatrix> {
    params.validate_for(len)?;
    if mu.len() != len {
        return param(format!(
            "moving distribution defined for L={}, ring has L={len}",
            mu.len()
        ));
    }
    let space = StateSpace::with_limit(len, params.types, limit)?;
    let c = params.types;
    let pow: Vec<usize> = (0..len).map(|i| c.pow(i as u32)).collect();

    let rows: Vec<Vec<(u32, f64)>> = (0..space.size)
        .into_par_iter()
        .map(|s| {
            let cfg = space.decode(s);
            let mut row: Vec<(u32, f64)> = Vec::new();
            for v in 0..len {
                if !params.is_dissatisfied_value(cfg.sat(v)) {
                    continue;
                }
                for &q in mu.support() {
                    let u = cfg.shift(v, q);
                    if !judge(&cfg, v, u, params).accepted {
                        continue;
                    }
                    let (dv, du) = (cfg.color(v) as usize - 1, cfg.color(u) as usize - 1);
                    let next = s - dv * pow[v] - du * pow[u] + du * pow[v] + dv * pow[u];
                    row.push((next as u32, mu.prob(q)));
                }
            }
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(row.len());
            for (t, r) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == t => last.1 += r,
                    _ => merged.push((t, r)),
                }
            }
            merged
        })
        .collect();

    let nnz = rows.iter().map(Vec::len).sum();
    let mut row_ptr = Vec::with_capacity(space.size + 1);
    let mut targets = Vec::with_capacity(nnz);
    let mut rates = Vec::with_capacity(nnz);
    let mut exit = Vec::with_capacity(space.size);
    row_ptr.push(0);
    for row in rows {
        exit.push(row.iter().map(|e| e.1).sum());
        for (t, r) in row {
            targets.push(t);
            rates.push(r);
        }
        row_ptr.push(targets.len());
    }
    Ok(GeneratorMatrix {
        space,
        row_ptr,
        targets,
        rates,
        exit,
    })
}

/// States with an empty off-diagonal row, ascending.
pub fn absorbing_states(g: &GeneratorMatrix) -> Vec<usize> {
    (0..g.dim())
        .filter(|&s| g.row_ptr[s] == g.row_ptr[s + 1])
        .collect()
}

/// Initial law with every site drawn independently with law `p`.
pub fn product_law(space: &StateSpace, p: &[f64]) -> Result<Vec<f64>> {
    if p.len() != space.types {
        return param(format!("{} frequencies for {} types", p.len(), space.types));
    }
    Ok((0..space.size)
        .map(|mut code| {
            let mut prob = 1.0;
            for _ in 0..space.len {
                prob *= p[code % space.types];
                code /= space.types;
            }
            prob
        })
        .collect())
}

pub fn point_mass(space: &StateSpace, config: &RingConfiguration) -> Result<Vec<f64>> {
    if config.len() != space.len || config.types() != space.types {
        return param("configuration does not belong to this state space");
    }
    let mut pi = vec![0.0; space.size];
    pi[space.encode(config)] = 1.0;
    Ok(pi)
}

#[derive(Debug, Clone)]
pub struct Transient {
    pub dist: Vec<f64>,
    /// Poisson mass left out by the truncation.
    pub truncation_error: f64,
    /// Number of jump-chain powers summed.
    pub terms: usize,
}

/// `pi0 * exp(tG)` by uniformization.
pub fn transient_distribution(g: &GeneratorMatrix, pi0: &[f64], t: f64) -> Result<Transient> {
    check_distribution(g, pi0)?;
    if !(t >= 0.0 && t.is_finite()) {
        return param(format!("time must be finite and >= 0, got {t}"));
    }
    let lambda = g.max_exit_rate();
    if t == 0.0 || lambda == 0.0 {
        return Ok(Transient {
            dist: pi0.to_vec(),
            truncation_error: 0.0,
            terms: 1,
        });
    }
    let rate = lambda * t;
    let n = g.dim();
    let mut v = pi0.to_vec();
    let mut next = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut log_w = -rate;
    let mut cumulative = 0.0;
    let mut k = 0usize;
    loop {
        let w = log_w.exp();
        if w > 0.0 {
            out.iter_mut().zip(&v).for_each(|(o, x)| *o += w * x);
        }
        cumulative += w;
        if 1.0 - cumulative < POISSON_TAIL && k as f64 >= rate {
            break;
        }
        if k > 100 + (rate + 50.0 * rate.sqrt()) as usize {
            break;
        }
        // next = v * (I + G / lambda)
        for ((nx, &x), &e) in next.iter_mut().zip(&v).zip(&g.exit) {
            *nx = x * (1.0 - e / lambda);
        }
        for (s, &mass) in v.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (t2, r) in g.row(s) {
                next[t2] += mass * r / lambda;
            }
        }
        std::mem::swap(&mut v, &mut next);
        k += 1;
        log_w += rate.ln() - (k as f64).ln();
    }
    Ok(Transient {
        dist: out,
        truncation_error: (1.0 - cumulative).max(0.0),
        terms: k + 1,
    })
}

fn check_distribution(g: &GeneratorMatrix, pi0: &[f64]) -> Result<()> {
    if pi0.len() != g.dim() {
        return param(format!(
            "distribution has {} entries, state space has {}",
            pi0.len(),
            g.dim()
        ));
    }
    if pi0.iter().any(|&x| x.is_nan() || x < 0.0) {
        return param("distribution has negative or NaN entries");
    }
    let total: f64 = pi0.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return param(format!("distribution sums to {total}"));
    }
    Ok(())
}

/// States reachable from `sources` along positive rates, ascending.
pub fn reachable(g: &GeneratorMatrix, sources: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; g.dim()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &s in sources {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        for (t, _) in g.row(s) {
            if !seen[t] {
                seen[t] = true;
                queue.push_back(t);
            }
        }
    }
    (0..g.dim()).filter(|&s| seen[s]).collect()
}

/// Closed communicating classes with more than one state among the states
/// reachable from `sources`. Each class is sorted; classes are ordered by
/// their smallest state.
pub fn recurrent_classes(g: &GeneratorMatrix, sources: &[usize]) -> Vec<Vec<usize>> {
    let states = reachable(g, sources);
    let index: HashMap<usize, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut graph = DiGraph::<usize, ()>::with_capacity(states.len(), 0);
    let nodes: Vec<_> = states.iter().map(|&s| graph.add_node(s)).collect();
    for (i, &s) in states.iter().enumerate() {
        for (t, _) in g.row(s) {
            graph.add_edge(nodes[i], nodes[index[&t]], ());
        }
    }
    let mut classes: Vec<Vec<usize>> = tarjan_scc(&graph)
        .into_iter()
        .filter_map(|comp| {
            let members: Vec<usize> = comp.iter().map(|&n| graph[n]).collect();
            let closed = members
                .iter()
                .all(|&s| g.row(s).all(|(t, _)| members.contains(&t)));
            let absorbing = members.len() == 1 && g.exit_rate(members[0]) == 0.0;
            (closed && !absorbing).then(|| {
                let mut m = members;
                m.sort_unstable();
                m
            })
        })
        .collect();
    classes.sort();
    classes
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsorptionAnalysis {
    /// `(absorbing state, hitting probability)` for every reachable absorbing
    /// state, ascending by state.
    pub hitting: Vec<(usize, f64)>,
    pub expected_time: f64,
}

/// Hitting probabilities of absorbing states and the expected absorption time
/// from `pi0`. Fails with [`Error::RecurrentClasses`] when a closed
/// non-absorbing class is reachable.
pub fn absorption_analysis(g: &GeneratorMatrix, pi0: &[f64]) -> Result<AbsorptionAnalysis> {
    check_distribution(g, pi0)?;
    let sources: Vec<usize> = (0..g.dim()).filter(|&s| pi0[s] > 0.0).collect();
    let classes = recurrent_classes(g, &sources);
    if !classes.is_empty() {
        return Err(Error::RecurrentClasses { classes });
    }
    let states = reachable(g, &sources);
    let mut hitting: BTreeMap<usize, f64> = BTreeMap::new();
    let mut by_sector: BTreeMap<Vec<u8>, Vec<usize>> = BTreeMap::new();
    for &s in &states {
        if g.exit_rate(s) == 0.0 {
            hitting.insert(s, pi0[s]);
        } else {
            by_sector.entry(g.space.sector(s)).or_default().push(s);
        }
    }
    let mut expected_time = 0.0;
    // Type counts are conserved, so the transient block splits by sector.
    for transient in by_sector.values() {
        let n = transient.len();
        if n > DENSE_SECTOR_LIMIT {
            return Err(Error::Capacity {
                states: n as u128,
                limit: DENSE_SECTOR_LIMIT as u128,
            });
        }
        let local: HashMap<usize, usize> =
            transient.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        // Occupation times z solve z (-G_TT) = pi0_T, i.e. (-G_TT)^T z = pi0_T.
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut b = DVector::<f64>::zeros(n);
        for (i, &s) in transient.iter().enumerate() {
            a[(i, i)] = g.exit_rate(s);
            b[i] = pi0[s];
            for (t, r) in g.row(s) {
                if let Some(&j) = local.get(&t) {
                    a[(j, i)] -= r;
                }
            }
        }
        if b.iter().all(|&x| x == 0.0) {
            continue;
        }
        let z = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::Invariant("transient block is singular".into()))?;
        for (i, &s) in transient.iter().enumerate() {
            expected_time += z[i];
            for (t, r) in g.row(s) {
                if !local.contains_key(&t) {
                    *hitting.entry(t).or_insert(0.0) += z[i] * r;
                }
            }
        }
    }
    Ok(AbsorptionAnalysis {
        hitting: hitting.into_iter().collect(),
        expected_time,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TvReport {
    pub tv: f64,
    pub truncation_error: f64,
    pub n_reps: usize,
    pub t: f64,
}

/// Total-variation distance between the engine's end-state distribution at
/// time `t` (initial law: product law `params.p`) and the exact transient law.
pub fn mc_vs_exact(
    len: usize,
    params: &ModelParams,
    mu: &MovingDistribution,
    t: f64,
    n_reps: usize,
    seed: u64,
) -> Result<TvReport> {
    mc_vs_exact_with(len, params, params, mu, t, n_reps, seed)
}

/// As [`mc_vs_exact`], simulating with `engine_params` while the exact law
/// uses `params`. Used for negative controls.
pub fn mc_vs_exact_with(
    len: usize,
    params: &ModelParams,
    engine_params: &ModelParams,
    mu: &MovingDistribution,
    t: f64,
    n_reps: usize,
    seed: u64,
) -> Result<TvReport> {
    let g = build_generator(len, params, mu)?;
    let pi0 = product_law(g.space(), &params.p)?;
    let exact = transient_distribution(&g, &pi0, t)?;
    let reps = run_replicates(
        n_reps,
        seed,
        len,
        engine_params,
        mu,
        t,
        &RunOptions::default(),
        |_| (),
    )?;
    let mut counts = vec![0u64; g.dim()];
    for r in &reps {
        counts[g.space().encode(&r.summary.final_config)] += 1;
    }
    let tv = 0.5
        * counts
            .iter()
            .zip(&exact.dist)
            .map(|(&c, &p)| (c as f64 / n_reps as f64 - p).abs())
            .sum::<f64>();
    Ok(TvReport {
        tv,
        truncation_error: exact.truncation_error,
        n_reps,
        t,
    })
}

/// JSON document produced by the `oracle` and `compare` commands.
#[derive(Debug, Clone, Default, Serialize)]
pub struct OracleReport {
    pub absorbing: Vec<String>,
    pub recurrent_classes: Vec<Vec<String>>,
    pub hitting: BTreeMap<String, f64>,
    pub expected_time: Option<f64>,
    pub tv: Option<f64>,
    pub truncation_error: Option<f64>,
}

impl OracleReport {
    /// Absorbing set of `g`, plus hitting data or recurrent classes from `pi0`.
    pub fn analyse(g: &GeneratorMatrix, pi0: &[f64]) -> Result<Self> {
        let name = |s: usize| g.space().decode(s).to_rle();
        let mut report = OracleReport {
            absorbing: absorbing_states(g).into_iter().map(name).collect(),
            ..OracleReport::default()
        };
        match absorption_analysis(g, pi0) {
            Ok(a) => {
                report.hitting = a.hitting.into_iter().map(|(s, p)| (name(s), p)).collect();
                report.expected_time = Some(a.expected_time);
            }
            Err(Error::RecurrentClasses { classes }) => {
                report.recurrent_classes = classes
                    .into_iter()
                    .map(|c| c.into_iter().map(name).collect())
                    .collect();
            }
            Err(e) => return Err(e),
        }
        Ok(report)
    }
}

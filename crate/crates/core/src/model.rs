//! Ring configurations and the deterministic swap rules.
//!
//! Sites are indexed `0..L` with periodic adjacency. Agent types are
//! 1-based (`1..=c`). An agent's satisfaction is the number of its two ring
//! neighbours sharing its type minus the number that do not, so it is always
//! one of `-2`, `0` or `2`. An agent is dissatisfied when its satisfaction is
//! at most the threshold `tau`.
//!
//! A swap initiated by a dissatisfied agent at `v` towards site `u` is judged
//! in this order:
//!
//! 1. `u == v` is a denied no-op;
//! 2. equal types are denied;
//! 3. the target must itself be dissatisfied;
//! 4. both satisfactions are recomputed in the fully exchanged configuration
//!    and neither may decrease (lazy agents require a strict increase).

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::moving::MovingDistribution;

/// Agent type, `1..=c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgentType(pub u8);

impl fmt::Display for AgentType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// How far a dissatisfied agent may look for a swap partner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Horizon {
    /// Offsets with ring distance at most `h`.
    Finite(usize),
    /// Every site of the ring is reachable; stands in for an unbounded horizon.
    FullRing,
}

/// Satisfaction of a single agent: one of `-2`, `0`, `2`.
pub type Satisfaction = i32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Number of agent types, at least 2.
    pub types: usize,
    /// Initial type frequencies, one per type.
    pub p: Vec<f64>,
    /// Dissatisfaction threshold; an agent is dissatisfied iff `sat <= tau`.
    #[serde(default)]
    pub tau: i32,
    /// Lazy agents only accept strict improvements.
    #[serde(default)]
    pub lazy: bool,
    pub horizon: Horizon,
    /// Drops the requirement that the target agent be dissatisfied. Off by
    /// default; only used for compatibility experiments and negative controls.
    #[serde(default)]
    pub relax_target_check: bool,
}

impl ModelParams {
    pub fn new(p: Vec<f64>, horizon: Horizon) -> Result<Self> {
        let params = ModelParams {
            types: p.len(),
            p,
            tau: 0,
            lazy: false,
            horizon,
            relax_target_check: false,
        };
        params.validate()?;
        Ok(params)
    }

    /// Equal frequencies over `c` types.
    pub fn uniform(c: usize, horizon: Horizon) -> Result<Self> {
        if c < 2 {
            return param(format!("need at least 2 types, got {c}"));
        }
        Self::new(vec![1.0 / c as f64; c], horizon)
    }

    pub fn with_tau(mut self, tau: i32) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_lazy(mut self, lazy: bool) -> Self {
        self.lazy = lazy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.types < 2 {
            return param(format!("need at least 2 types, got {}", self.types));
        }
        if self.types > u8::MAX as usize {
            return param(format!("at most {} types supported", u8::MAX));
        }
        if self.p.len() != self.types {
            return param(format!(
                "frequency vector has {} entries for {} types",
                self.p.len(),
                self.types
            ));
        }
        if let Some(bad) = self.p.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
            return param(format!("type frequencies must lie in (0,1), got {bad}"));
        }
        let total: f64 = self.p.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return param(format!("type frequencies sum to {total}, expected 1"));
        }
        Ok(())
    }

    /// Checks the parameters against a ring of `len` sites.
    pub fn validate_for(&self, len: usize) -> Result<()> {
        self.validate()?;
        if len < 3 {
            return param(format!("ring length must be at least 3, got {len}"));
        }
        if let Horizon::Finite(h) = self.horizon {
            if 2 * h + 1 > len {
                return param(format!("horizon {h} needs 2h+1 <= L, got L={len}"));
            }
        }
        Ok(())
    }

    pub fn is_dissatisfied_value(&self, sat: Satisfaction) -> bool {
        sat <= self.tau
    }
}

/// Why a swap attempt was accepted or denied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SwapReason {
    Accepted,
    SameType,
    TargetSatisfied,
    InitiatorWorse,
    TargetWorse,
    LazyNoStrictGain,
    SelfOffset,
}

impl SwapReason {
    pub const ALL: [SwapReason; 7] = [
        SwapReason::Accepted,
        SwapReason::SameType,
        SwapReason::TargetSatisfied,
        SwapReason::InitiatorWorse,
        SwapReason::TargetWorse,
        SwapReason::LazyNoStrictGain,
        SwapReason::SelfOffset,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SwapReason::Accepted => "Accepted",
            SwapReason::SameType => "SameType",
            SwapReason::TargetSatisfied => "TargetSatisfied",
            SwapReason::InitiatorWorse => "InitiatorWorse",
            SwapReason::TargetWorse => "TargetWorse",
            SwapReason::LazyNoStrictGain => "LazyNoStrictGain",
            SwapReason::SelfOffset => "SelfOffset",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SwapReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapVerdict {
    pub accepted: bool,
    pub reason: SwapReason,
    /// Initiator's satisfaction at the target site after the exchange minus
    /// its satisfaction before. Zero when the attempt was denied before the
    /// exchange was evaluated.
    pub delta_initiator: i32,
    pub delta_target: i32,
}

impl SwapVerdict {
    fn denied(reason: SwapReason) -> Self {
        SwapVerdict {
            accepted: false,
            reason,
            delta_initiator: 0,
            delta_target: 0,
        }
    }
}

/// Agent types on a periodic line, with cached per-type counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RingConfiguration {
    colors: Vec<u8>,
    counts: Vec<usize>,
}

impl RingConfiguration {
    /// Builds a configuration from 1-based types.
    pub fn new(colors: Vec<u8>, types: usize) -> Result<Self> {
        if colors.len() < 3 {
            return param(format!(
                "ring length must be at least 3, got {}",
                colors.len()
            ));
        }
        if types < 2 || types > u8::MAX as usize {
            return param(format!("number of types must lie in 2..=255, got {types}"));
        }
        let mut counts = vec![0; types];
        for &col in &colors {
            if col == 0 || col as usize > types {
                return param(format!("agent type {col} outside 1..={types}"));
            }
            counts[col as usize - 1] += 1;
        }
        Ok(RingConfiguration { colors, counts })
    }

    pub fn monochromatic(len: usize, color: u8, types: usize) -> Result<Self> {
        Self::new(vec![color; len], types)
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn types(&self) -> usize {
        self.counts.len()
    }

    pub fn colors(&self) -> &[u8] {
        &self.colors
    }

    /// Number of agents of each type, indexed by `type - 1`.
    pub fn type_counts(&self) -> &[usize] {
        &self.counts
    }

    #[inline]
    pub fn color(&self, v: usize) -> u8 {
        self.colors[v]
    }

    pub fn agent(&self, v: usize) -> Result<AgentType> {
        self.check_index(v)?;
        Ok(AgentType(self.colors[v]))
    }

    pub fn is_monochromatic(&self) -> bool {
        self.counts.iter().filter(|&&n| n > 0).count() <= 1
    }

    #[inline]
    pub fn left(&self, v: usize) -> usize {
        if v == 0 {
            self.colors.len() - 1
        } else {
            v - 1
        }
    }

    #[inline]
    pub fn right(&self, v: usize) -> usize {
        if v + 1 == self.colors.len() {
            0
        } else {
            v + 1
        }
    }

    /// Site `v + offset` on the ring, `offset` taken modulo `L`.
    #[inline]
    pub fn shift(&self, v: usize, offset: usize) -> usize {
        let s = v + offset % self.colors.len();
        if s >= self.colors.len() {
            s - self.colors.len()
        } else {
            s
        }
    }

    pub(crate) fn check_index(&self, v: usize) -> Result<()> {
        if v < self.colors.len() {
            Ok(())
        } else {
            Err(Error::Index {
                index: v,
                len: self.colors.len(),
            })
        }
    }

    /// Satisfaction of the agent at `v`. Panics if `v` is out of range; see
    /// [`satisfaction`] for the checked variant.
    #[inline]
    pub fn sat(&self, v: usize) -> Satisfaction {
        let me = self.colors[v];
        pair_score(me, self.colors[self.left(v)]) + pair_score(me, self.colors[self.right(v)])
    }

    /// Number of edges `<v, v+1>` whose endpoints hold different types.
    pub fn separator_count(&self) -> usize {
        (0..self.len())
            .filter(|&v| self.colors[v] != self.colors[self.right(v)])
            .count()
    }

    /// Exchanges the agents at `v` and `u`.
    pub fn apply_swap(&mut self, v: usize, u: usize) -> Result<()> {
        self.check_index(v)?;
        self.check_index(u)?;
        if self.colors[v] == self.colors[u] {
            return Err(Error::Contract(format!(
                "swap of sites {v} and {u} with equal type {}",
                self.colors[v]
            )));
        }
        self.colors.swap(v, u);
        Ok(())
    }

    /// Exchanged copy; see [`RingConfiguration::apply_swap`].
    pub fn swapped(&self, v: usize, u: usize) -> Result<Self> {
        let mut next = self.clone();
        next.apply_swap(v, u)?;
        Ok(next)
    }

    /// Run-length encoding starting at site 0, e.g. `1:3,2:2,1:1`.
    pub fn to_rle(&self) -> String {
        let mut out = String::new();
        let mut i = 0;
        while i < self.colors.len() {
            let col = self.colors[i];
            let mut j = i;
            while j < self.colors.len() && self.colors[j] == col {
                j += 1;
            }
            if !out.is_empty() {
                out.push(',');
            }
            out.push_str(&format!("{}:{}", col, j - i));
            i = j;
        }
        out
    }

    /// Three-type ring of length `2h + 3`: a single agent of type 3 at site 0,
    /// a run of `h` agents of type 2, then a run of `h + 2` agents of type 1.
    /// Under horizon `h` the type-3 agent hops back and forth over the type-2
    /// run forever.
    pub fn singleton_hop(h: usize) -> Result<Self> {
        if h == 0 {
            return param("the hopping configuration needs h >= 1");
        }
        let mut colors = vec![3u8];
        colors.extend(std::iter::repeat_n(2u8, h));
        colors.extend(std::iter::repeat_n(1u8, h + 2));
        RingConfiguration::new(colors, 3)
    }

    /// Parses the encoding produced by [`RingConfiguration::to_rle`].
    pub fn from_rle(s: &str, types: usize) -> Result<Self> {
        let mut colors = Vec::new();
        for run in s.trim().split(',') {
            let (col, count) = run
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("run `{run}` is not type:count")))?;
            let col: u8 = col
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad type in run `{run}`")))?;
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad count in run `{run}`")))?;
            if count == 0 {
                return Err(Error::Parse(format!("empty run `{run}`")));
            }
            colors.extend(std::iter::repeat_n(col, count));
        }
        Self::new(colors, types)
    }
}

impl fmt::Display for RingConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_rle())
    }
}

#[inline]
fn pair_score(a: u8, b: u8) -> i32 {
    if a == b {
        1
    } else {
        -1
    }
}

/// Draws every site independently with law `params.p`.
pub fn initial_configuration<R: Rng + ?Sized>(
    len: usize,
    params: &ModelParams,
    rng: &mut R,
) -> Result<RingConfiguration> {
    params.validate()?;
    if len < 3 {
        return param(format!("ring length must be at least 3, got {len}"));
    }
    let mut cumulative = Vec::with_capacity(params.types);
    let mut acc = 0.0;
    for &x in &params.p {
        acc += x;
        cumulative.push(acc);
    }
    let colors = (0..len)
        .map(|_| {
            let x: f64 = rng.random();
            let k = cumulative
                .iter()
                .position(|&c| x < c)
                .unwrap_or(params.types - 1);
            (k + 1) as u8
        })
        .collect();
    RingConfiguration::new(colors, params.types)
}

pub fn satisfaction(config: &RingConfiguration, v: usize) -> Result<Satisfaction> {
    config.check_index(v)?;
    Ok(config.sat(v))
}

pub fn is_dissatisfied(config: &RingConfiguration, v: usize, tau: i32) -> Result<bool> {
    Ok(satisfaction(config, v)? <= tau)
}

/// Judges a swap attempt of the dissatisfied agent at `v` towards `u`.
pub fn evaluate_swap(
    config: &RingConfiguration,
    v: usize,
    u: usize,
    params: &ModelParams,
) -> Result<SwapVerdict> {
    config.check_index(v)?;
    config.check_index(u)?;
    if !params.is_dissatisfied_value(config.sat(v)) {
        return Err(Error::Contract(format!(
            "initiator {v} is not dissatisfied (sat {} > tau {})",
            config.sat(v),
            params.tau
        )));
    }
    Ok(judge(config, v, u, params))
}

/// [`evaluate_swap`] without the precondition checks.
#[inline]
pub(crate) fn judge(
    config: &RingConfiguration,
    v: usize,
    u: usize,
    params: &ModelParams,
) -> SwapVerdict {
    if u == v {
        return SwapVerdict::denied(SwapReason::SelfOffset);
    }
    let cv = config.color(v);
    let cu = config.color(u);
    if cv == cu {
        return SwapVerdict::denied(SwapReason::SameType);
    }
    let sat_u = config.sat(u);
    if !params.relax_target_check && !params.is_dissatisfied_value(sat_u) {
        return SwapVerdict::denied(SwapReason::TargetSatisfied);
    }
    let post = |x: usize| {
        if x == v {
            cu
        } else if x == u {
            cv
        } else {
            config.color(x)
        }
    };
    let post_sat = |x: usize| {
        let me = post(x);
        pair_score(me, post(config.left(x))) + pair_score(me, post(config.right(x)))
    };
    let delta_initiator = post_sat(u) - config.sat(v);
    let delta_target = post_sat(v) - sat_u;
    let reason = if delta_initiator < 0 {
        SwapReason::InitiatorWorse
    } else if delta_target < 0 {
        SwapReason::TargetWorse
    } else if params.lazy && (delta_initiator == 0 || delta_target == 0) {
        SwapReason::LazyNoStrictGain
    } else {
        SwapReason::Accepted
    };
    SwapVerdict {
        accepted: reason == SwapReason::Accepted,
        reason,
        delta_initiator,
        delta_target,
    }
}

/// In-place exchange; see [`RingConfiguration::apply_swap`].
pub fn apply_swap(config: &mut RingConfiguration, v: usize, u: usize) -> Result<()> {
    config.apply_swap(v, u)
}

fn check_compatible(config: &RingConfiguration, mu: &MovingDistribution) -> Result<()> {
    if mu.len() != config.len() {
        return param(format!(
            "moving distribution defined for L={}, configuration has L={}",
            mu.len(),
            config.len()
        ));
    }
    Ok(())
}

/// Every ordered pair `(v, v+q)` with `mu(q) > 0`, `v` dissatisfied and the
/// swap accepted.
pub fn admissible_swaps(
    config: &RingConfiguration,
    mu: &MovingDistribution,
    params: &ModelParams,
) -> Result<Vec<(usize, usize)>> {
    check_compatible(config, mu)?;
    let mut out = Vec::new();
    for v in 0..config.len() {
        if !params.is_dissatisfied_value(config.sat(v)) {
            continue;
        }
        for &q in mu.support() {
            let u = config.shift(v, q);
            if judge(config, v, u, params).accepted {
                out.push((v, u));
            }
        }
    }
    Ok(out)
}

/// True iff no attempt can change the configuration.
pub fn is_absorbing(
    config: &RingConfiguration,
    mu: &MovingDistribution,
    params: &ModelParams,
) -> Result<bool> {
    check_compatible(config, mu)?;
    Ok(absorbing_among(config, mu, params, 0..config.len()))
}

pub(crate) fn absorbing_among(
    config: &RingConfiguration,
    mu: &MovingDistribution,
    params: &ModelParams,
    sites: impl IntoIterator<Item = usize>,
) -> bool {
    for v in sites {
        if !params.is_dissatisfied_value(config.sat(v)) {
            continue;
        }
        for &q in mu.support() {
            if judge(config, v, config.shift(v, q), params).accepted {
                return false;
            }
        }
    }
    true
}

/// Unlike edges among those incident to `v` or `u`.
pub(crate) fn local_separators(config: &RingConfiguration, v: usize, u: usize) -> usize {
    let mut edges = [config.left(v), v, config.left(u), u];
    edges.sort_unstable();
    let mut count = 0;
    let mut prev = usize::MAX;
    for e in edges {
        if e != prev && config.color(e) != config.color(config.right(e)) {
            count += 1;
        }
        prev = e;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ring(cols: &[u8], c: usize) -> RingConfiguration {
        RingConfiguration::new(cols.to_vec(), c).unwrap()
    }

    fn params(h: usize) -> ModelParams {
        ModelParams::uniform(2, Horizon::Finite(h)).unwrap()
    }

    #[test]
    fn satisfaction_values() {
        assert_eq!(satisfaction(&ring(&[1, 1, 1], 2), 1).unwrap(), 2);
        assert_eq!(satisfaction(&ring(&[2, 1, 2], 2), 1).unwrap(), -2);
        assert_eq!(satisfaction(&ring(&[1, 1, 2], 2), 1).unwrap(), 0);
        assert!(matches!(
            satisfaction(&ring(&[1, 1, 2], 2), 3),
            Err(Error::Index { index: 3, len: 3 })
        ));
    }

    #[test]
    fn dissatisfaction_threshold() {
        let split = ring(&[1, 1, 2], 2);
        let single = ring(&[2, 1, 2], 2);
        assert!(is_dissatisfied(&split, 1, 0).unwrap());
        assert!(!is_dissatisfied(&split, 1, -1).unwrap());
        assert!(is_dissatisfied(&single, 1, -1).unwrap());
    }

    #[test]
    fn initial_configuration_rejects_bad_frequencies() {
        let bad = ModelParams {
            types: 2,
            p: vec![1.0, 0.0],
            tau: 0,
            lazy: false,
            horizon: Horizon::Finite(1),
            relax_target_check: false,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            initial_configuration(4, &bad, &mut rng),
            Err(Error::Parameter(_))
        ));
        assert!(initial_configuration(2, &params(0), &mut rng).is_err());
    }

    #[test]
    fn initial_configuration_is_reproducible() {
        let p = params(1);
        let a = initial_configuration(6, &p, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = initial_configuration(6, &p, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.type_counts().iter().sum::<usize>(), 6);
    }

    #[test]
    fn initial_frequency_within_binomial_band() {
        let p = ModelParams::new(vec![0.3, 0.7], Horizon::Finite(1)).unwrap();
        let len = 100_000;
        let band = 3.0 * (0.21f64 / len as f64).sqrt();
        let mut misses = 0;
        for seed in 0..20 {
            let cfg = initial_configuration(len, &p, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let freq = cfg.type_counts()[0] as f64 / len as f64;
            if (freq - 0.3).abs() > band {
                misses += 1;
            }
        }
        // 3 sigma: P(miss) ~ 0.0027 per seed
        assert!(misses <= 1, "{misses} of 20 seeds outside the band");
    }

    #[test]
    fn closing_a_gap_gains_both_sides() {
        let cfg = ring(&[1, 1, 2, 1, 2, 2], 2);
        let v = evaluate_swap(&cfg, 2, 3, &params(1)).unwrap();
        assert!(v.accepted);
        assert_eq!((v.delta_initiator, v.delta_target), (2, 2));
        assert_eq!(cfg.swapped(2, 3).unwrap().colors(), &[1, 1, 1, 2, 2, 2]);
    }

    #[test]
    fn satisfied_target_is_refused() {
        let cfg = ring(&[2, 1, 2, 2, 2, 2, 2, 2], 2);
        let v = evaluate_swap(&cfg, 1, 4, &params(3)).unwrap();
        assert_eq!(v.reason, SwapReason::TargetSatisfied);
        assert!(!v.accepted);

        let mut relaxed = params(3);
        relaxed.relax_target_check = true;
        assert!(evaluate_swap(&cfg, 1, 4, &relaxed).unwrap().accepted);
    }

    #[test]
    fn sliding_section_is_neutral_and_lazy_refuses_it() {
        let cfg = ring(&[2, 1, 1, 2, 2, 2, 2], 2);
        let v = evaluate_swap(&cfg, 1, 3, &params(2)).unwrap();
        assert!(v.accepted);
        assert_eq!((v.delta_initiator, v.delta_target), (0, 0));
        let lazy = params(2).with_lazy(true);
        let v = evaluate_swap(&cfg, 1, 3, &lazy).unwrap();
        assert_eq!(v.reason, SwapReason::LazyNoStrictGain);
    }

    #[test]
    fn self_offset_and_same_type_are_denied() {
        let cfg = ring(&[1, 2, 1, 2], 2);
        let p = params(1);
        assert_eq!(
            evaluate_swap(&cfg, 1, 1, &p).unwrap().reason,
            SwapReason::SelfOffset
        );
        assert_eq!(
            evaluate_swap(&cfg, 1, 3, &p).unwrap().reason,
            SwapReason::SameType
        );
    }

    #[test]
    fn satisfied_initiator_is_a_contract_violation() {
        let cfg = ring(&[1, 1, 1, 2, 2, 2], 2);
        assert!(matches!(
            evaluate_swap(&cfg, 1, 4, &params(1)),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn apply_swap_is_an_involution_and_conserves_counts() {
        let mut cfg = ring(&[1, 1, 2, 1, 2, 2], 2);
        let orig = cfg.clone();
        apply_swap(&mut cfg, 2, 3).unwrap();
        assert_eq!(cfg.colors(), &[1, 1, 1, 2, 2, 2]);
        assert_eq!(cfg.type_counts(), orig.type_counts());
        apply_swap(&mut cfg, 2, 3).unwrap();
        assert_eq!(cfg, orig);
        assert!(matches!(cfg.apply_swap(0, 1), Err(Error::Contract(_))));
    }

    #[test]
    fn admissible_swaps_small_cases() {
        let p = params(1);
        let mono = ring(&[1; 6], 2);
        let mu6 = MovingDistribution::bounded_uniform(6, 1).unwrap();
        assert!(admissible_swaps(&mono, &mu6, &p).unwrap().is_empty());
        assert!(is_absorbing(&mono, &mu6, &p).unwrap());

        let blocks = ring(&[1, 1, 1, 2, 2, 2], 2);
        assert!(admissible_swaps(&blocks, &mu6, &p).unwrap().is_empty());
        assert!(is_absorbing(&blocks, &mu6, &p).unwrap());

        let alt = ring(&[1, 2, 1, 2], 2);
        let mu4 = MovingDistribution::bounded_uniform(4, 1).unwrap();
        let pairs = admissible_swaps(&alt, &mu4, &p).unwrap();
        assert!(!pairs.is_empty());
        let mut dedup = pairs.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), pairs.len());
        assert!(!is_absorbing(&alt, &mu4, &p).unwrap());

        assert!(matches!(
            admissible_swaps(&alt, &mu6, &p),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn rle_round_trip() {
        let cfg = ring(&[1, 1, 2, 1, 2, 2], 2);
        assert_eq!(cfg.to_rle(), "1:2,2:1,1:1,2:2");
        assert_eq!(
            RingConfiguration::from_rle("1:2,2:1,1:1,2:2", 2).unwrap(),
            cfg
        );
        assert!(RingConfiguration::from_rle("1:2,3:1,1:1", 2).is_err());
        assert!(RingConfiguration::from_rle("1-2", 2).is_err());
    }

    #[test]
    fn local_separator_count_matches_global_difference() {
        let cfg = ring(&[1, 1, 2, 1, 2, 2, 3, 1], 3);
        for v in 0..8 {
            for u in 0..8 {
                if cfg.color(v) == cfg.color(u) {
                    continue;
                }
                let next = cfg.swapped(v, u).unwrap();
                let d_global = next.separator_count() as i64 - cfg.separator_count() as i64;
                let d_local =
                    local_separators(&next, v, u) as i64 - local_separators(&cfg, v, u) as i64;
                assert_eq!(d_global, d_local, "v={v} u={u}");
            }
        }
    }
}

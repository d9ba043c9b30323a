//! Continuous-time event engine.
//!
//! Every site carries a rate-1 clock, but a firing at a satisfied site does
//! nothing, so the engine only simulates the superposition of the clocks of
//! dissatisfied sites: holding times are exponential with rate
//! `|dissatisfied|` and the initiator is uniform over the dissatisfied set.
//! Denied attempts are real events; they consume a clock firing and an offset
//! sample and leave the configuration unchanged.
//!
//! Randomness comes from `ChaCha8Rng` (rand_chacha 0.9) seeded through
//! `SeedableRng::seed_from_u64`; replicate seeds are derived with
//! [`replicate_seed`]. Changing either changes every trajectory.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::model::{
    absorbing_among, initial_configuration, judge, local_separators, ModelParams,
    RingConfiguration, SwapReason, SwapVerdict,
};
use crate::moving::MovingDistribution;
use crate::observables::{metrics_sample, FlipTracker, MetricsSample};

/// One clock firing at a dissatisfied site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventRecord {
    pub time: f64,
    pub initiator: usize,
    pub target: usize,
    pub verdict: SwapVerdict,
}

/// Observer attached to a trajectory.
///
/// `on_event` runs after the event has been applied, so `config` is the
/// post-event configuration.
pub trait Hook {
    fn on_event(&mut self, _config: &RingConfiguration, _event: &EventRecord) {}
    fn on_sample(&mut self, _config: &RingConfiguration, _sample: &MetricsSample) {}
}

impl Hook for () {}

impl<H: Hook + ?Sized> Hook for &mut H {
    fn on_event(&mut self, config: &RingConfiguration, event: &EventRecord) {
        (**self).on_event(config, event)
    }
    fn on_sample(&mut self, config: &RingConfiguration, sample: &MetricsSample) {
        (**self).on_sample(config, sample)
    }
}

impl<A: Hook, B: Hook> Hook for (A, B) {
    fn on_event(&mut self, config: &RingConfiguration, event: &EventRecord) {
        self.0.on_event(config, event);
        self.1.on_event(config, event);
    }
    fn on_sample(&mut self, config: &RingConfiguration, sample: &MetricsSample) {
        self.0.on_sample(config, sample);
        self.1.on_sample(config, sample);
    }
}

impl<H: Hook> Hook for Option<H> {
    fn on_event(&mut self, config: &RingConfiguration, event: &EventRecord) {
        if let Some(h) = self {
            h.on_event(config, event)
        }
    }
    fn on_sample(&mut self, config: &RingConfiguration, sample: &MetricsSample) {
        if let Some(h) = self {
            h.on_sample(config, sample)
        }
    }
}

/// Keeps every event in memory.
#[derive(Debug, Clone, Default)]
pub struct EventLog {
    pub events: Vec<EventRecord>,
}

impl Hook for EventLog {
    fn on_event(&mut self, _config: &RingConfiguration, event: &EventRecord) {
        self.events.push(*event);
    }
}

#[derive(Serialize)]
struct EventLine {
    t: f64,
    v: usize,
    u: usize,
    accepted: bool,
    reason: &'static str,
}

/// One JSON object per line: `{"t":…,"v":…,"u":…,"accepted":…,"reason":…}`.
pub fn event_json_line(event: &EventRecord) -> String {
    serde_json::to_string(&EventLine {
        t: event.time,
        v: event.initiator,
        u: event.target,
        accepted: event.verdict.accepted,
        reason: event.verdict.reason.as_str(),
    })
    .expect("event line serializes")
}

/// Streams events as JSONL. The first write error is kept and reported by
/// [`JsonlEventWriter::finish`].
pub struct JsonlEventWriter<W: Write> {
    out: W,
    error: Option<std::io::Error>,
}

impl<W: Write> JsonlEventWriter<W> {
    pub fn new(out: W) -> Self {
        JsonlEventWriter { out, error: None }
    }

    pub fn finish(mut self) -> Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e.into());
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> Hook for JsonlEventWriter<W> {
    fn on_event(&mut self, _config: &RingConfiguration, event: &EventRecord) {
        if self.error.is_none() {
            if let Err(e) = writeln!(self.out, "{}", event_json_line(event)) {
                self.error = Some(e);
            }
        }
    }
}

/// Sites whose agents are currently dissatisfied, with O(1) insert, remove and
/// uniform pick.
#[derive(Debug, Clone)]
pub struct DissatisfiedSet {
    members: Vec<usize>,
    slot: Vec<usize>,
}

const ABSENT: usize = usize::MAX;

impl DissatisfiedSet {
    pub fn build(config: &RingConfiguration, tau: i32) -> Self {
        let mut set = DissatisfiedSet {
            members: Vec::new(),
            slot: vec![ABSENT; config.len()],
        };
        for v in 0..config.len() {
            if config.sat(v) <= tau {
                set.insert(v);
            }
        }
        set
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.slot[v] != ABSENT
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    fn insert(&mut self, v: usize) {
        if self.slot[v] == ABSENT {
            self.slot[v] = self.members.len();
            self.members.push(v);
        }
    }

    fn remove(&mut self, v: usize) {
        let i = self.slot[v];
        if i == ABSENT {
            return;
        }
        let last = *self.members.last().expect("non-empty");
        self.members.swap_remove(i);
        if last != v {
            self.slot[last] = i;
        }
        self.slot[v] = ABSENT;
    }

    fn refresh(&mut self, config: &RingConfiguration, tau: i32, v: usize) {
        if config.sat(v) <= tau {
            self.insert(v);
        } else {
            self.remove(v);
        }
    }

    /// Sorted copy of the members.
    pub fn sorted(&self) -> Vec<usize> {
        let mut m = self.members.clone();
        m.sort_unstable();
        m
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EventCounts {
    pub attempted: u64,
    pub accepted: u64,
    pub by_reason: BTreeMap<String, u64>,
}

impl EventCounts {
    fn new() -> Self {
        EventCounts {
            attempted: 0,
            accepted: 0,
            by_reason: SwapReason::ALL
                .iter()
                .map(|r| (r.as_str().to_string(), 0))
                .collect(),
        }
    }

    fn record(&mut self, reason: SwapReason) {
        self.attempted += 1;
        if reason == SwapReason::Accepted {
            self.accepted += 1;
        }
        *self
            .by_reason
            .get_mut(reason.as_str())
            .expect("all reasons present") += 1;
    }

    pub fn reason(&self, reason: SwapReason) -> u64 {
        self.by_reason.get(reason.as_str()).copied().unwrap_or(0)
    }
}

/// Running state of one trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryState {
    pub time: f64,
    pub config: RingConfiguration,
    pub dissatisfied: DissatisfiedSet,
    pub rng: ChaCha8Rng,
    pub counts: EventCounts,
    /// Time of the most recent accepted swap.
    pub last_accept_time: Option<f64>,
    attempts_since_accept: u64,
    /// Recompute the dissatisfied set from scratch after every event and
    /// compare with the incremental update.
    pub check_invariants: bool,
}

impl TrajectoryState {
    pub fn new(config: RingConfiguration, tau: i32, seed: u64) -> Self {
        Self::with_rng(config, tau, ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn with_rng(config: RingConfiguration, tau: i32, rng: ChaCha8Rng) -> Self {
        let dissatisfied = DissatisfiedSet::build(&config, tau);
        TrajectoryState {
            time: 0.0,
            config,
            dissatisfied,
            rng,
            counts: EventCounts::new(),
            last_accept_time: None,
            attempts_since_accept: 0,
            check_invariants: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Event {
        record: EventRecord,
        dt: f64,
    },
    /// No dissatisfied site left; the holding time is infinite.
    Absorbed,
    /// The next firing would fall after the time limit; the clock was moved to
    /// the limit and nothing else changed.
    Horizon,
}

fn check_inputs(len: usize, params: &ModelParams, mu: &MovingDistribution) -> Result<()> {
    params.validate_for(len)?;
    if mu.len() != len {
        return param(format!(
            "moving distribution defined for L={}, ring has L={len}",
            mu.len()
        ));
    }
    if mu.horizon() != params.horizon {
        return param(format!(
            "moving distribution horizon {:?} differs from model horizon {:?}",
            mu.horizon(),
            params.horizon
        ));
    }
    Ok(())
}

/// Performs one event with no time limit.
pub fn step(
    state: &mut TrajectoryState,
    mu: &MovingDistribution,
    params: &ModelParams,
) -> Result<StepOutcome> {
    step_until(state, mu, params, f64::INFINITY)
}

/// Performs one event unless it would occur after `t_limit`.
pub fn step_until(
    state: &mut TrajectoryState,
    mu: &MovingDistribution,
    params: &ModelParams,
    t_limit: f64,
) -> Result<StepOutcome> {
    let Some((t, dt)) = draw_time(state) else {
        return Ok(StepOutcome::Absorbed);
    };
    if t > t_limit {
        state.time = t_limit;
        return Ok(StepOutcome::Horizon);
    }
    let record = fire(state, mu, params, t)?;
    Ok(StepOutcome::Event { record, dt })
}

/// Next firing time and holding time, or `None` when nothing can fire.
fn draw_time(state: &mut TrajectoryState) -> Option<(f64, f64)> {
    let n = state.dissatisfied.len();
    if n == 0 {
        return None;
    }
    let u01: f64 = state.rng.random();
    let dt = -(1.0 - u01).ln() / n as f64;
    Some((state.time + dt, dt))
}

fn fire(
    state: &mut TrajectoryState,
    mu: &MovingDistribution,
    params: &ModelParams,
    t: f64,
) -> Result<EventRecord> {
    if t <= state.time {
        return Err(Error::Invariant(format!(
            "event time {t} does not advance the clock from {}",
            state.time
        )));
    }
    state.time = t;
    let n = state.dissatisfied.len();
    let v = state.dissatisfied.members[state.rng.random_range(0..n)];
    let q = mu.sample(&mut state.rng);
    let cfg = &state.config;
    let u = cfg.shift(v, q);
    if !params.is_dissatisfied_value(cfg.sat(v)) {
        return Err(Error::Invariant(format!(
            "site {v} in the dissatisfied set has satisfaction {}",
            cfg.sat(v)
        )));
    }
    let verdict = judge(cfg, v, u, params);
    state.counts.record(verdict.reason);
    if verdict.accepted {
        apply_accepted(state, params, v, u)?;
        state.last_accept_time = Some(t);
        state.attempts_since_accept = 0;
    } else {
        state.attempts_since_accept += 1;
    }
    Ok(EventRecord {
        time: t,
        initiator: v,
        target: u,
        verdict,
    })
}

fn apply_accepted(
    state: &mut TrajectoryState,
    params: &ModelParams,
    v: usize,
    u: usize,
) -> Result<()> {
    let cfg = &mut state.config;
    let pre = [cfg.sat(v), cfg.sat(u)];
    let seps_before = local_separators(cfg, v, u);
    cfg.apply_swap(v, u)?;
    let seps_after = local_separators(cfg, v, u);
    // initiator now sits at u, target at v
    let post = [cfg.sat(u), cfg.sat(v)];

    if seps_after > seps_before {
        return Err(Error::Invariant(format!(
            "swap ({v},{u}) at t={} raised the separator count",
            state.time
        )));
    }
    if params.lazy && !(0..2).any(|i| pre[i] == -2 && post[i] > -2) {
        return Err(Error::Invariant(format!(
            "lazy swap ({v},{u}) involves no singleton that stops being one"
        )));
    }
    if params.tau < 0 && !params.relax_target_check && pre != [-2, -2] {
        return Err(Error::Invariant(format!(
            "swap ({v},{u}) under tau<0 between non-singletons {pre:?}"
        )));
    }

    for site in [cfg.left(v), v, cfg.right(v), cfg.left(u), u, cfg.right(u)] {
        state.dissatisfied.refresh(cfg, params.tau, site);
    }
    if state.check_invariants {
        let full = DissatisfiedSet::build(cfg, params.tau);
        if full.sorted() != state.dissatisfied.sorted() {
            return Err(Error::Invariant(format!(
                "incremental dissatisfied set diverged after swap ({v},{u})"
            )));
        }
    }
    Ok(())
}

/// When metric samples are taken.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum SampleSchedule {
    #[default]
    Never,
    /// `0, dt, 2dt, …` up to the time limit.
    Every(f64),
    /// Explicit ascending times.
    At(Vec<f64>),
}

impl SampleSchedule {
    fn times(&self, t_max: f64) -> Result<Vec<f64>> {
        match self {
            SampleSchedule::Never => Ok(Vec::new()),
            SampleSchedule::Every(dt) => {
                if !(*dt > 0.0 && dt.is_finite()) {
                    return param(format!("sample interval must be positive, got {dt}"));
                }
                if !t_max.is_finite() {
                    return param("periodic sampling needs a finite time limit");
                }
                let n = (t_max / dt + 1e-9).floor() as u64;
                Ok((0..=n).map(|k| k as f64 * dt).collect())
            }
            SampleSchedule::At(ts) => {
                if ts.windows(2).any(|w| w[0] > w[1]) {
                    return param("sample times must be sorted ascending");
                }
                Ok(ts.iter().copied().filter(|&t| t <= t_max).collect())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Attempts without an accepted swap before the absorption test runs.
    /// `None` means `50 * L`.
    pub patience: Option<u64>,
    pub check_invariants: bool,
    pub track_flips: bool,
    pub schedule: SampleSchedule,
    pub l_list: Vec<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            patience: None,
            check_invariants: false,
            track_flips: false,
            schedule: SampleSchedule::Never,
            l_list: vec![1],
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub seed: u64,
    pub initial_config: RingConfiguration,
    pub final_config: RingConfiguration,
    /// Model time at which the run stopped.
    pub end_time: f64,
    pub counts: EventCounts,
    pub absorbed: bool,
    /// Time at which the absorbing configuration was entered (the last
    /// accepted swap, or 0).
    pub absorbed_at: Option<f64>,
    pub last_accept_time: Option<f64>,
    pub samples: Vec<MetricsSample>,
    pub flips: Option<FlipTracker>,
}

impl RunSummary {
    /// Mean number of accepted swaps each site took part in.
    pub fn swaps_per_site(&self) -> f64 {
        2.0 * self.counts.accepted as f64 / self.final_config.len() as f64
    }
}

/// Draws the initial configuration from `seed` and runs to `t_max`.
pub fn run<H: Hook>(
    len: usize,
    params: &ModelParams,
    mu: &MovingDistribution,
    seed: u64,
    t_max: f64,
    opts: &RunOptions,
    hook: H,
) -> Result<RunSummary> {
    check_inputs(len, params, mu)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = initial_configuration(len, params, &mut rng)?;
    let state = TrajectoryState::with_rng(config, params.tau, rng);
    drive(state, seed, params, mu, t_max, opts, hook)
}

/// Runs from a given configuration.
pub fn run_from<H: Hook>(
    config: RingConfiguration,
    params: &ModelParams,
    mu: &MovingDistribution,
    seed: u64,
    t_max: f64,
    opts: &RunOptions,
    hook: H,
) -> Result<RunSummary> {
    check_inputs(config.len(), params, mu)?;
    if config.types() != params.types {
        return param(format!(
            "configuration has {} types, model has {}",
            config.types(),
            params.types
        ));
    }
    let state = TrajectoryState::new(config, params.tau, seed);
    drive(state, seed, params, mu, t_max, opts, hook)
}

fn drive<H: Hook>(
    mut state: TrajectoryState,
    seed: u64,
    params: &ModelParams,
    mu: &MovingDistribution,
    t_max: f64,
    opts: &RunOptions,
    mut hook: H,
) -> Result<RunSummary> {
    if t_max.is_nan() || t_max < 0.0 {
        return param(format!("time limit must be >= 0, got {t_max}"));
    }
    if opts.l_list.contains(&0) {
        return param("q_l needs l >= 1");
    }
    let len = state.config.len();
    state.check_invariants = opts.check_invariants;
    let patience = opts.patience.unwrap_or(50 * len as u64).max(1);
    let sample_times = opts.schedule.times(t_max)?;
    let mut next_sample = 0;
    let mut samples = Vec::with_capacity(sample_times.len());
    let mut flips = opts.track_flips.then(|| FlipTracker::new(len));
    let mut flips_cum = 0u64;
    let initial_config = state.config.clone();

    let mut emit = |upto: f64,
                    inclusive: bool,
                    state: &TrajectoryState,
                    flips_cum: u64,
                    next: &mut usize,
                    hook: &mut H|
     -> Result<()> {
        while *next < sample_times.len()
            && (sample_times[*next] < upto || (inclusive && sample_times[*next] <= upto))
        {
            let s = metrics_sample(
                &state.config,
                params.tau,
                flips_cum,
                sample_times[*next],
                &opts.l_list,
            )?;
            hook.on_sample(&state.config, &s);
            samples.push(s);
            *next += 1;
        }
        Ok(())
    };

    let mut absorbed = false;
    loop {
        if state.attempts_since_accept >= patience {
            let cfg = &state.config;
            if absorbing_among(
                cfg,
                mu,
                params,
                state.dissatisfied.members().iter().copied(),
            ) {
                absorbed = true;
                break;
            }
            state.attempts_since_accept = 0;
        }
        let Some((t, _)) = draw_time(&mut state) else {
            absorbed = true;
            break;
        };
        if t > t_max {
            state.time = t_max;
            break;
        }
        emit(t, false, &state, flips_cum, &mut next_sample, &mut hook)?;
        let record = fire(&mut state, mu, params, t)?;
        if record.verdict.accepted {
            flips_cum += 2;
            if let Some(f) = flips.as_mut() {
                f.record_swap(record.time, record.initiator, record.target);
            }
        }
        hook.on_event(&state.config, &record);
    }
    // A frozen configuration keeps its value until the time limit.
    emit(t_max, true, &state, flips_cum, &mut next_sample, &mut hook)?;

    let absorbed_at = absorbed.then(|| state.last_accept_time.unwrap_or(0.0));
    Ok(RunSummary {
        seed,
        initial_config,
        final_config: state.config,
        end_time: state.time,
        counts: state.counts,
        absorbed,
        absorbed_at,
        last_accept_time: state.last_accept_time,
        samples,
        flips,
    })
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `k` under `base_seed`.
pub fn replicate_seed(base_seed: u64, k: u64) -> u64 {
    mix64(base_seed ^ mix64(k))
}

#[derive(Debug, Clone)]
pub struct Replicate<H> {
    pub index: usize,
    pub summary: RunSummary,
    pub hook: H,
}

/// Runs `n` independent replicates in parallel; results are ordered by
/// replicate index.
#[allow(clippy::too_many_arguments)]
pub fn run_replicates<H, F>(
    n: usize,
    base_seed: u64,
    len: usize,
    params: &ModelParams,
    mu: &MovingDistribution,
    t_max: f64,
    opts: &RunOptions,
    make_hook: F,
) -> Result<Vec<Replicate<H>>>
where
    H: Hook + Send,
    F: Fn(usize) -> H + Sync,
{
    if n == 0 {
        return param("need at least one replicate");
    }
    check_inputs(len, params, mu)?;
    (0..n)
        .into_par_iter()
        .map(|k| {
            let mut hook = make_hook(k);
            let seed = replicate_seed(base_seed, k as u64);
            let summary = run(len, params, mu, seed, t_max, opts, &mut hook)?;
            Ok(Replicate {
                index: k,
                summary,
                hook,
            })
        })
        .collect()
}

/// Attempts targeting site `v` in the window `(t, t + eps]`.
pub fn attempt_rate_audit(events: &[EventRecord], t: f64, eps: f64, v: usize) -> usize {
    events
        .iter()
        .filter(|e| e.target == v && e.time > t && e.time <= t + eps)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Horizon;
    use crate::observables::separators;

    fn ring(cols: &[u8], c: usize) -> RingConfiguration {
        RingConfiguration::new(cols.to_vec(), c).unwrap()
    }

    fn setup(len: usize, h: usize) -> (ModelParams, MovingDistribution) {
        (
            ModelParams::uniform(2, Horizon::Finite(h)).unwrap(),
            MovingDistribution::bounded_uniform(len, h).unwrap(),
        )
    }

    #[test]
    fn monochromatic_is_absorbed_immediately() {
        let (p, mu) = setup(6, 1);
        let mut st = TrajectoryState::new(ring(&[1; 6], 2), 0, 1);
        assert_eq!(step(&mut st, &mu, &p).unwrap(), StepOutcome::Absorbed);
        let s = run_from(
            ring(&[2; 6], 2),
            &p,
            &mu,
            1,
            100.0,
            &RunOptions::default(),
            (),
        )
        .unwrap();
        assert!(s.absorbed);
        assert_eq!(s.absorbed_at, Some(0.0));
        assert_eq!(s.counts.attempted, 0);
    }

    #[test]
    fn stable_blocks_only_see_denials() {
        let (p, mu) = setup(6, 1);
        let start = ring(&[1, 1, 1, 2, 2, 2], 2);
        let mut st = TrajectoryState::new(start.clone(), 0, 9);
        for _ in 0..500 {
            match step(&mut st, &mu, &p).unwrap() {
                StepOutcome::Event { record, .. } => assert!(!record.verdict.accepted),
                other => panic!("unexpected {other:?}"),
            }
        }
        assert_eq!(st.config, start);
    }

    #[test]
    fn steps_are_reproducible() {
        let (p, mu) = setup(10, 2);
        let cfg = ring(&[1, 2, 1, 1, 2, 2, 1, 2, 1, 2], 2);
        let mut a = TrajectoryState::new(cfg.clone(), 0, 42);
        let mut b = TrajectoryState::new(cfg, 0, 42);
        for _ in 0..50 {
            assert_eq!(
                step(&mut a, &mu, &p).unwrap(),
                step(&mut b, &mu, &p).unwrap()
            );
            assert_eq!(a.config, b.config);
        }
    }

    #[test]
    fn zero_time_limit_returns_initial_state() {
        let (p, mu) = setup(20, 2);
        let opts = RunOptions {
            schedule: SampleSchedule::Every(1.0),
            ..RunOptions::default()
        };
        let s = run(20, &p, &mu, 5, 0.0, &opts, ()).unwrap();
        assert_eq!(s.counts.attempted, 0);
        assert_eq!(s.final_config, s.initial_config);
        assert_eq!(s.samples.len(), 1);
        assert_eq!(s.samples[0].t, 0.0);
    }

    #[test]
    fn small_ring_freezes_into_long_sections() {
        let (p, mu) = setup(6, 1);
        for seed in 0..20 {
            let s = run(6, &p, &mu, seed, 1000.0, &RunOptions::default(), ()).unwrap();
            let cfg = &s.final_config;
            if cfg.type_counts().contains(&1) {
                // A lone agent among the other type hops around forever.
                assert!(!s.absorbed, "seed {seed}");
                continue;
            }
            assert!(s.absorbed, "seed {seed}: {cfg}");
            let ok = cfg.is_monochromatic()
                || crate::observables::sections(cfg)
                    .sections
                    .iter()
                    .all(|x| x.len >= 2);
            assert!(ok, "seed {seed}: {cfg}");
        }
    }

    #[test]
    fn incremental_set_matches_recomputation() {
        for (c, h, lazy, tau) in [
            (2, 1, false, 0),
            (3, 2, false, 0),
            (2, 3, true, 0),
            (2, 2, false, -1),
        ] {
            let p = ModelParams::uniform(c, Horizon::Finite(h))
                .unwrap()
                .with_lazy(lazy)
                .with_tau(tau);
            let mu = MovingDistribution::bounded_uniform(16, h).unwrap();
            let opts = RunOptions {
                check_invariants: true,
                ..RunOptions::default()
            };
            for seed in 0..10 {
                run(16, &p, &mu, seed, 50.0, &opts, ()).unwrap();
            }
        }
    }

    struct SepWatch {
        last: usize,
        events: usize,
    }

    impl Hook for SepWatch {
        fn on_event(&mut self, config: &RingConfiguration, _e: &EventRecord) {
            let now = separators(config).len();
            assert!(now <= self.last);
            self.last = now;
            self.events += 1;
        }
    }

    #[test]
    fn separators_never_increase_along_a_trajectory() {
        let p = ModelParams::uniform(2, Horizon::FullRing).unwrap();
        let mu = MovingDistribution::ring_uniform(40).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cfg = initial_configuration(40, &p, &mut rng).unwrap();
        let mut w = SepWatch {
            last: separators(&cfg).len(),
            events: 0,
        };
        run_from(cfg, &p, &mu, 3, 200.0, &RunOptions::default(), &mut w).unwrap();
        assert!(w.events > 0);
    }

    #[test]
    fn event_times_increase_and_holding_times_are_exponential() {
        // Stable blocks keep the dissatisfied set fixed at 4 sites.
        let (p, mu) = setup(12, 1);
        let mut st = TrajectoryState::new(ring(&[1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2], 2), 0, 17);
        let mut dts = Vec::new();
        let mut last = 0.0;
        for _ in 0..5000 {
            if let StepOutcome::Event { record, dt } = step(&mut st, &mu, &p).unwrap() {
                assert!(record.time > last);
                last = record.time;
                dts.push(dt);
            }
        }
        assert_eq!(st.dissatisfied.len(), 4);
        // Kolmogorov-Smirnov against Exp(4); 1% critical value 1.628/sqrt(n).
        dts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = dts.len() as f64;
        let d = dts
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = 1.0 - (-4.0 * x).exp();
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 1.628 / n.sqrt(), "KS statistic {d}");
    }

    #[test]
    fn replicates_are_keyed_by_index() {
        let (p, mu) = setup(12, 1);
        let opts = RunOptions::default();
        let a = run_replicates(4, 77, 12, &p, &mu, 20.0, &opts, |_| ()).unwrap();
        let b = run_replicates(4, 77, 12, &p, &mu, 20.0, &opts, |_| ()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.index, y.index);
            assert_eq!(x.summary.final_config, y.summary.final_config);
            assert_eq!(x.summary.counts, y.summary.counts);
        }
        let single = run(12, &p, &mu, replicate_seed(77, 0), 20.0, &opts, ()).unwrap();
        assert_eq!(single.final_config, a[0].summary.final_config);
        assert_eq!(single.end_time, a[0].summary.end_time);
        assert!(run_replicates(0, 1, 12, &p, &mu, 1.0, &opts, |_| ()).is_err());
    }

    #[test]
    fn audit_counts_targets_in_window() {
        assert_eq!(attempt_rate_audit(&[], 0.0, 1.0, 0), 0);
        let (p, mu) = setup(10, 2);
        let mut log = EventLog::default();
        run(10, &p, &mu, 2, 5.0, &RunOptions::default(), &mut log).unwrap();
        assert_eq!(attempt_rate_audit(&log.events, 1.0, 0.0, 3), 0);
        let total: usize = (0..10)
            .map(|v| attempt_rate_audit(&log.events, 0.0, 5.0, v))
            .sum();
        assert_eq!(total, log.events.len());
    }

    #[test]
    fn jsonl_lines() {
        let rec = EventRecord {
            time: 0.5,
            initiator: 2,
            target: 3,
            verdict: SwapVerdict {
                accepted: true,
                reason: SwapReason::Accepted,
                delta_initiator: 2,
                delta_target: 2,
            },
        };
        assert_eq!(
            event_json_line(&rec),
            r#"{"t":0.5,"v":2,"u":3,"accepted":true,"reason":"Accepted"}"#
        );
        let mut w = JsonlEventWriter::new(Vec::new());
        w.on_event(&ring(&[1, 2, 1], 2), &rec);
        let bytes = w.finish().unwrap();
        assert_eq!(bytes.iter().filter(|&&b| b == b'\n').count(), 1);
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let (p, mu) = setup(8, 1);
        assert!(run(10, &p, &mu, 0, 1.0, &RunOptions::default(), ()).is_err());
        let full = MovingDistribution::ring_uniform(8).unwrap();
        assert!(run(8, &p, &full, 0, 1.0, &RunOptions::default(), ()).is_err());
        assert!(run(8, &p, &mu, 0, -1.0, &RunOptions::default(), ()).is_err());
    }
}

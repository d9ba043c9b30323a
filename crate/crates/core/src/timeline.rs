//! Timelines of monochromatic sections.
//!
//! A tagged section is followed through the accepted swaps of a trajectory.
//! After each swap its continuation is the section of the same type whose
//! right endpoint lies within one site of the previous right endpoint. When
//! none exists the timeline ends: a single-site section whose agent took part
//! in the swap has vanished, anything else was absorbed by a coalescence from
//! its right (the merged section continues the right-hand timeline).

use serde::Serialize;

use crate::engine::{EventRecord, Hook};
use crate::error::{param, Result};
use crate::model::{AgentType, RingConfiguration};
use crate::observables::{sections, Section};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TimelineEvent {
    /// Length dropped from above `h` to at most `h`.
    BecameMobile,
    /// Length rose from at most `h` to above `h`.
    BecameImmobile,
    Vanished,
    /// The right endpoint moved by one site.
    EndpointMoved(Direction),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    Vanished,
    /// Swallowed by a merge; the section to its right carries on.
    Coalesced,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimelineEventLog {
    pub color: AgentType,
    pub initial: Section,
    pub events: Vec<(f64, TimelineEvent)>,
    pub termination: Option<(f64, Termination)>,
    /// Current extent while the timeline is alive.
    pub current: Option<Section>,
}

impl TimelineEventLog {
    pub fn is_alive(&self) -> bool {
        self.termination.is_none()
    }

    /// Mobility transitions in order, without endpoint moves.
    pub fn mobility(&self) -> Vec<TimelineEvent> {
        self.events
            .iter()
            .map(|&(_, e)| e)
            .filter(|e| {
                matches!(
                    e,
                    TimelineEvent::BecameMobile | TimelineEvent::BecameImmobile
                )
            })
            .collect()
    }
}

/// Hook following one or more tagged sections.
#[derive(Debug, Clone)]
pub struct TimelineTracker {
    h: usize,
    logs: Vec<TimelineEventLog>,
}

impl TimelineTracker {
    /// Tags `initial`, which must be a section of `config`.
    pub fn new(config: &RingConfiguration, h: usize, initial: Section) -> Result<Self> {
        let mut t = TimelineTracker {
            h,
            logs: Vec::new(),
        };
        t.tag(config, initial)?;
        Ok(t)
    }

    /// Tags every section of `config`.
    pub fn all_sections(config: &RingConfiguration, h: usize) -> Self {
        let logs = if config.is_monochromatic() {
            Vec::new()
        } else {
            sections(config).sections.into_iter().map(new_log).collect()
        };
        TimelineTracker { h, logs }
    }

    pub fn tag(&mut self, config: &RingConfiguration, initial: Section) -> Result<()> {
        if config.is_monochromatic() || !sections(config).sections.contains(&initial) {
            return param(format!(
                "no section of length {} starting at site {} in the initial configuration",
                initial.len, initial.start
            ));
        }
        self.logs.push(new_log(initial));
        Ok(())
    }

    pub fn logs(&self) -> &[TimelineEventLog] {
        &self.logs
    }

    pub fn into_logs(self) -> Vec<TimelineEventLog> {
        self.logs
    }

    /// Feeds one accepted swap; `config` is the configuration after it.
    pub fn observe(&mut self, config: &RingConfiguration, t: f64, v: usize, u: usize) {
        let h = self.h;
        for log in self.logs.iter_mut().filter(|l| l.is_alive()) {
            advance(log, h, config, t, v, u);
        }
    }
}

fn new_log(initial: Section) -> TimelineEventLog {
    TimelineEventLog {
        color: initial.color,
        initial,
        events: Vec::new(),
        termination: None,
        current: Some(initial),
    }
}

impl Hook for TimelineTracker {
    fn on_event(&mut self, config: &RingConfiguration, event: &EventRecord) {
        if event.verdict.accepted {
            self.observe(config, event.time, event.initiator, event.target);
        }
    }
}

fn advance(
    log: &mut TimelineEventLog,
    h: usize,
    config: &RingConfiguration,
    t: f64,
    v: usize,
    u: usize,
) {
    let n = config.len();
    let cur = log.current.expect("alive timeline has an extent");
    // Only swaps touching the section or its two bordering sites matter.
    let lo = (cur.start + n - 1) % n;
    let near = |x: usize| cur.len + 2 >= n || (x + n - lo) % n < cur.len + 2;
    if !near(v) && !near(u) {
        return;
    }
    let col = log.color.0;
    let end = cur.end(n);
    let is_right_end = |x: usize| config.color(x) == col && config.color(config.right(x)) != col;
    let candidates = [end, config.right(end), config.left(end)];
    let mut found = candidates.iter().copied().filter(|&x| is_right_end(x));
    let next_end = found.next();
    debug_assert!(found.next().is_none(), "continuation must be unique");

    let Some(new_end) = next_end else {
        let involved = cur.len == 1 && (v == cur.start || u == cur.start);
        if involved {
            log.events.push((t, TimelineEvent::Vanished));
            log.termination = Some((t, Termination::Vanished));
        } else {
            log.termination = Some((t, Termination::Coalesced));
        }
        log.current = None;
        return;
    };

    let mut new_len = 1;
    let mut x = new_end;
    while new_len < n && config.color(config.left(x)) == col {
        x = config.left(x);
        new_len += 1;
    }
    if new_end == config.right(end) {
        log.events
            .push((t, TimelineEvent::EndpointMoved(Direction::Right)));
    } else if new_end == config.left(end) {
        log.events
            .push((t, TimelineEvent::EndpointMoved(Direction::Left)));
    }
    if cur.len > h && new_len <= h {
        log.events.push((t, TimelineEvent::BecameMobile));
    } else if cur.len <= h && new_len > h {
        log.events.push((t, TimelineEvent::BecameImmobile));
    }
    log.current = Some(Section {
        start: x,
        len: new_len,
        color: log.color,
    });
}

/// Follows `initial` through an already recorded trajectory.
pub fn track_timeline(
    initial_config: &RingConfiguration,
    events: &[EventRecord],
    h: usize,
    initial: Section,
) -> Result<TimelineEventLog> {
    let mut tracker = TimelineTracker::new(initial_config, h, initial)?;
    let mut cfg = initial_config.clone();
    for e in events.iter().filter(|e| e.verdict.accepted) {
        cfg.apply_swap(e.initiator, e.target)?;
        tracker.observe(&cfg, e.time, e.initiator, e.target);
    }
    Ok(tracker.into_logs().remove(0))
}

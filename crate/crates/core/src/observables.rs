//! Configuration observables: separators, monochromatic sections, short-section
//! fractions, shades, flip counting and metric samples.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::engine::{EventRecord, Hook};
use crate::error::{param, Result};
use crate::model::{AgentType, Horizon, RingConfiguration};

/// Edges `<e, e+1 mod L>` whose endpoints hold different types, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparatorSet {
    pub edges: Vec<usize>,
}

impl SeparatorSet {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

pub fn separators(config: &RingConfiguration) -> SeparatorSet {
    let edges = (0..config.len())
        .filter(|&e| config.color(e) != config.color(config.right(e)))
        .collect();
    SeparatorSet { edges }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub start: usize,
    pub len: usize,
    pub color: AgentType,
}

impl Section {
    /// Last site of the section (its right endpoint).
    pub fn end(&self, ring_len: usize) -> usize {
        (self.start + self.len - 1) % ring_len
    }

    pub fn contains(&self, v: usize, ring_len: usize) -> bool {
        (v + ring_len - self.start) % ring_len < self.len
    }
}

/// Maximal constant-type runs covering the ring, in ring order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionDecomposition {
    pub ring_len: usize,
    pub sections: Vec<Section>,
}

impl SectionDecomposition {
    /// Length of the section containing each site.
    pub fn lengths_by_site(&self) -> Vec<usize> {
        let mut out = vec![0; self.ring_len];
        for s in &self.sections {
            for k in 0..s.len {
                out[(s.start + k) % self.ring_len] = s.len;
            }
        }
        out
    }

    /// The section containing site `v`.
    pub fn section_of(&self, v: usize) -> Option<&Section> {
        self.sections.iter().find(|s| s.contains(v, self.ring_len))
    }
}

pub fn sections(config: &RingConfiguration) -> SectionDecomposition {
    let len = config.len();
    let first_sep = (0..len).find(|&e| config.color(e) != config.color(config.right(e)));
    let Some(e) = first_sep else {
        return SectionDecomposition {
            ring_len: len,
            sections: vec![Section {
                start: 0,
                len,
                color: AgentType(config.color(0)),
            }],
        };
    };
    let mut sections = Vec::new();
    let origin = (e + 1) % len;
    let mut start = origin;
    let mut run = 1;
    for k in 1..len {
        let v = (origin + k) % len;
        if config.color(v) == config.color(start) {
            run += 1;
        } else {
            sections.push(Section {
                start,
                len: run,
                color: AgentType(config.color(start)),
            });
            start = v;
            run = 1;
        }
    }
    sections.push(Section {
        start,
        len: run,
        color: AgentType(config.color(start)),
    });
    // list from the section holding site 0
    let head = sections
        .iter()
        .position(|s| s.contains(0, len))
        .unwrap_or(0);
    sections.rotate_left(head);
    SectionDecomposition {
        ring_len: len,
        sections,
    }
}

/// Fraction of sites lying in a monochromatic section of length at most `l`.
pub fn q_l(config: &RingConfiguration, l: usize) -> Result<f64> {
    if l == 0 {
        return param("q_l needs l >= 1");
    }
    Ok(q_l_of(&sections(config), l))
}

fn q_l_of(dec: &SectionDecomposition, l: usize) -> f64 {
    let short: usize = dec
        .sections
        .iter()
        .filter(|s| s.len <= l)
        .map(|s| s.len)
        .sum();
    short as f64 / dec.ring_len as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shade {
    /// Section length at most `h`: the section can travel.
    Light(AgentType),
    Dark(AgentType),
}

pub fn shade(config: &RingConfiguration, v: usize, horizon: Horizon) -> Result<Shade> {
    config.check_index(v)?;
    let Horizon::Finite(h) = horizon else {
        return param("shades are defined only for a finite horizon");
    };
    let dec = sections(config);
    let len = dec.section_of(v).map_or(config.len(), |s| s.len);
    let color = AgentType(config.color(v));
    Ok(if len <= h {
        Shade::Light(color)
    } else {
        Shade::Dark(color)
    })
}

/// Per-site record of accepted swaps.
///
/// Every accepted swap exchanges two different types, so each participation
/// is also a colour change of that site.
#[derive(Debug, Clone, Default)]
pub struct FlipTracker {
    times: Vec<Vec<f64>>,
    participations: Vec<u64>,
}

impl FlipTracker {
    pub fn new(len: usize) -> Self {
        FlipTracker {
            times: vec![Vec::new(); len],
            participations: vec![0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn record_swap(&mut self, t: f64, v: usize, u: usize) {
        for site in [v, u] {
            self.times[site].push(t);
            self.participations[site] += 1;
        }
    }

    pub fn last_change_time(&self, v: usize) -> Option<f64> {
        self.times[v].last().copied()
    }

    pub fn change_count(&self, v: usize) -> u64 {
        self.times[v].len() as u64
    }

    pub fn participations(&self, v: usize) -> u64 {
        self.participations[v]
    }

    /// Colour changes over all sites.
    pub fn total_changes(&self) -> u64 {
        self.times.iter().map(|t| t.len() as u64).sum()
    }

    fn changes_in(&self, v: usize, t1: f64, t2: f64) -> u64 {
        let ts = &self.times[v];
        let lo = ts.partition_point(|&t| t <= t1);
        let hi = ts.partition_point(|&t| t <= t2);
        (hi - lo) as u64
    }
}

impl Hook for FlipTracker {
    fn on_event(&mut self, _config: &RingConfiguration, event: &EventRecord) {
        if event.verdict.accepted {
            self.record_swap(event.time, event.initiator, event.target);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlipStats {
    pub changes: Vec<u64>,
    pub swaps: Vec<u64>,
    pub mean_changes: f64,
    pub max_changes: u64,
    /// Fraction of sites with at least one colour change in the window.
    pub flipped_fraction: f64,
    pub mean_swaps: f64,
}

/// Counts in the window `(t1, t2]`.
pub fn flip_stats(tracker: &FlipTracker, t1: f64, t2: f64) -> Result<FlipStats> {
    if t1 > t2 {
        return param(format!("window start {t1} after end {t2}"));
    }
    let n = tracker.len();
    let changes: Vec<u64> = (0..n).map(|v| tracker.changes_in(v, t1, t2)).collect();
    let swaps = changes.clone();
    let total: u64 = changes.iter().sum();
    let denom = n.max(1) as f64;
    Ok(FlipStats {
        mean_changes: total as f64 / denom,
        max_changes: changes.iter().copied().max().unwrap_or(0),
        flipped_fraction: changes.iter().filter(|&&c| c > 0).count() as f64 / denom,
        mean_swaps: total as f64 / denom,
        changes,
        swaps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsSample {
    pub t: f64,
    pub separators: usize,
    pub density: f64,
    /// `(l, q_l)` pairs in the requested order.
    pub q: Vec<(usize, f64)>,
    pub dissatisfied: usize,
    pub flips_cum: u64,
    pub counts: Vec<usize>,
}

pub fn metrics_sample(
    config: &RingConfiguration,
    tau: i32,
    flips_cum: u64,
    t: f64,
    l_list: &[usize],
) -> Result<MetricsSample> {
    if l_list.contains(&0) {
        return param("q_l needs l >= 1");
    }
    let dec = sections(config);
    let seps = if config.is_monochromatic() {
        0
    } else {
        dec.sections.len()
    };
    Ok(MetricsSample {
        t,
        separators: seps,
        density: seps as f64 / config.len() as f64,
        q: l_list.iter().map(|&l| (l, q_l_of(&dec, l))).collect(),
        dissatisfied: (0..config.len()).filter(|&v| config.sat(v) <= tau).count(),
        flips_cum,
        counts: config.type_counts().to_vec(),
    })
}

impl MetricsSample {
    pub fn csv_header(l_list: &[usize], types: usize) -> String {
        let mut h = String::from("t,separators,density");
        for l in l_list {
            let _ = write!(h, ",q_{l}");
        }
        h.push_str(",dissatisfied,flips_cum");
        for i in 1..=types {
            let _ = write!(h, ",count_{i}");
        }
        h
    }

    pub fn csv_row(&self) -> String {
        let mut r = format!("{},{},{}", self.t, self.separators, self.density);
        for (_, q) in &self.q {
            let _ = write!(r, ",{q}");
        }
        let _ = write!(r, ",{},{}", self.dissatisfied, self.flips_cum);
        for c in &self.counts {
            let _ = write!(r, ",{c}");
        }
        r
    }
}

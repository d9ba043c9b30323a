//! Follows every initial monochromatic section through a run and tallies how
//! the timelines end and how often they switch between mobile and immobile.

use std::collections::BTreeMap;

use schelling::engine::{run_from, RunOptions};
use schelling::model::initial_configuration;
use schelling::timeline::{Termination, TimelineTracker};
use schelling::{Horizon, ModelParams, MovingDistribution};

fn main() -> schelling::Result<()> {
    let (len, h) = (3000, 2);
    let params = ModelParams::uniform(2, Horizon::Finite(h))?;
    let mu = MovingDistribution::bounded_uniform(len, h)?;
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(12);
    let cfg = initial_configuration(len, &params, &mut rng)?;

    let mut tracker = TimelineTracker::all_sections(&cfg, h);
    let summary = run_from(
        cfg,
        &params,
        &mu,
        12,
        500.0,
        &RunOptions::default(),
        &mut tracker,
    )?;
    let logs = tracker.into_logs();

    let mut endings: BTreeMap<&str, usize> = BTreeMap::new();
    let mut switches = 0;
    for log in &logs {
        let key = match log.termination {
            None => "alive",
            Some((_, Termination::Vanished)) => "vanished",
            Some((_, Termination::Coalesced)) => "coalesced",
        };
        *endings.entry(key).or_default() += 1;
        switches += log.mobility().len();
    }
    println!(
        "{} timelines, absorbed {} at t={:?}",
        logs.len(),
        summary.absorbed,
        summary.absorbed_at
    );
    for (k, n) in &endings {
        println!("  {k:<10} {n}");
    }
    println!("mobility switches: {switches}");
    if let Some(log) = logs.iter().find(|l| l.is_alive() && l.events.len() > 3) {
        println!("a surviving timeline, started as {:?}:", log.initial);
        for (t, e) in log.events.iter().take(8) {
            println!("  t={t:.2} {e:?}");
        }
        println!("  now {:?}", log.current);
    }
    Ok(())
}

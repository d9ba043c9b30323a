//! Three types on a ring of length 2h+3: a single type-3 agent next to a run
//! of h type-2 agents keeps hopping over that run. The oracle certifies the
//! two-state recurrent class; a simulation shows the alternation.
//!
//! `cargo run --release --example singleton_hop -- [h]`

use schelling::engine::{run_from, EventLog, RunOptions};
use schelling::oracle::{absorption_analysis, build_generator, point_mass};
use schelling::{Error, Horizon, ModelParams, MovingDistribution, RingConfiguration};

fn main() -> schelling::Result<()> {
    let h: usize = std::env::args().nth(1).map_or(1, |s| s.parse().unwrap());
    let start = RingConfiguration::singleton_hop(h)?;
    let len = start.len();
    let params = ModelParams::uniform(3, Horizon::Finite(h))?;
    let mu = MovingDistribution::bounded_uniform(len, h)?;
    println!("start {start} (L={len}, h={h})");

    let g = build_generator(len, &params, &mu)?;
    match absorption_analysis(&g, &point_mass(g.space(), &start)?) {
        Err(Error::RecurrentClasses { classes }) => {
            for class in classes {
                let names: Vec<String> = class
                    .iter()
                    .map(|&s| g.space().decode(s).to_rle())
                    .collect();
                println!("recurrent class: {}", names.join("  <->  "));
            }
        }
        other => println!("unexpected: {other:?}"),
    }

    let mut log = EventLog::default();
    let summary = run_from(
        start.clone(),
        &params,
        &mu,
        1,
        100.0,
        &RunOptions::default(),
        &mut log,
    )?;
    let mut cfg = start;
    let mut line = String::from("type-3 position:");
    for e in log.events.iter().filter(|e| e.verdict.accepted).take(12) {
        cfg.apply_swap(e.initiator, e.target)?;
        let pos = cfg.colors().iter().position(|&x| x == 3).unwrap();
        line.push_str(&format!(" {pos}@{:.1}", e.time));
    }
    println!("{line} ...");
    println!(
        "accepted swaps by t=100: {}, absorbed: {}",
        summary.counts.accepted, summary.absorbed
    );
    Ok(())
}

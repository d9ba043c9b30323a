//! Unbounded-horizon surrogate: ring-uniform moves on a ring of 512 sites.
//! For each seed, runs until only two separators remain (or t = 1e5), then
//! counts the sites that change type during the next 1e4 time units.
//!
//! `cargo run --release --example nonfixation -- [seeds] [reach_limit]`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use schelling::engine::{replicate_seed, step_until, StepOutcome, TrajectoryState};
use schelling::model::initial_configuration;
use schelling::observables::{flip_stats, FlipTracker};
use schelling::{Horizon, ModelParams, MovingDistribution};

const LEN: usize = 512;
const WINDOW: f64 = 1e4;

fn main() -> schelling::Result<()> {
    let seeds: u64 = std::env::args().nth(1).map_or(10, |s| s.parse().unwrap());
    let reach_limit: f64 = std::env::args().nth(2).map_or(1e5, |s| s.parse().unwrap());
    let params = ModelParams::uniform(2, Horizon::FullRing)?;
    let mu = MovingDistribution::ring_uniform(LEN)?;
    println!("seed,t_two_separators,flipped_fraction,accepted_in_window");
    // Empty fields: two separators not reached before the limit.
    for k in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(replicate_seed(7, k));
        let cfg = initial_configuration(LEN, &params, &mut rng)?;
        let mut state = TrajectoryState::with_rng(cfg, params.tau, rng);
        let mut hit = None;
        while state.config.separator_count() > 2 {
            match step_until(&mut state, &mu, &params, reach_limit)? {
                StepOutcome::Event { .. } => {}
                _ => break,
            }
        }
        if state.config.separator_count() <= 2 {
            hit = Some(state.time);
        }
        let Some(t0) = hit else {
            println!("{k},,,");
            continue;
        };
        let mut flips = FlipTracker::new(LEN);
        let accepted_before = state.counts.accepted;
        while let StepOutcome::Event { record, .. } =
            step_until(&mut state, &mu, &params, t0 + WINDOW)?
        {
            if record.verdict.accepted {
                flips.record_swap(record.time, record.initiator, record.target);
            }
        }
        let stats = flip_stats(&flips, t0, t0 + WINDOW)?;
        println!(
            "{k},{t0:.1},{:.4},{}",
            stats.flipped_fraction,
            state.counts.accepted - accepted_before
        );
    }
    Ok(())
}

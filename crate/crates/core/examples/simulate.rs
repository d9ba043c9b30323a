//! Single trajectory with periodic metrics, printed as CSV.
//!
//! `cargo run --release --example simulate -- [L] [h] [t_max] [seed]`

use schelling::engine::{run, RunOptions, SampleSchedule};
use schelling::observables::MetricsSample;
use schelling::{Horizon, ModelParams, MovingDistribution};

fn main() -> schelling::Result<()> {
    let arg = |i: usize, d: &str| std::env::args().nth(i).unwrap_or_else(|| d.to_string());
    let len: usize = arg(1, "2000").parse().unwrap();
    let h: usize = arg(2, "2").parse().unwrap();
    let t_max: f64 = arg(3, "100").parse().unwrap();
    let seed: u64 = arg(4, "1").parse().unwrap();

    let params = ModelParams::uniform(2, Horizon::Finite(h))?;
    let mu = MovingDistribution::bounded_uniform(len, h)?;
    let l_list = vec![1, h, h + 1];
    let opts = RunOptions {
        schedule: SampleSchedule::Every(t_max / 20.0),
        l_list: l_list.clone(),
        ..RunOptions::default()
    };
    let summary = run(len, &params, &mu, seed, t_max, &opts, ())?;

    println!("{}", MetricsSample::csv_header(&l_list, params.types));
    for s in &summary.samples {
        println!("{}", s.csv_row());
    }
    eprintln!(
        "attempts {} accepted {} absorbed {} (at {:?}) swaps/site {:.3}",
        summary.counts.attempted,
        summary.counts.accepted,
        summary.absorbed,
        summary.absorbed_at,
        summary.swaps_per_site()
    );
    for (reason, n) in &summary.counts.by_reason {
        eprintln!("  {reason:<18} {n}");
    }
    Ok(())
}

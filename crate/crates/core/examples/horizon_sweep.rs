//! Replicates over several horizons: frozen section lengths grow with h.

use schelling::engine::{run_replicates, RunOptions};
use schelling::observables::{q_l, sections};
use schelling::{Horizon, ModelParams, MovingDistribution};

fn main() -> schelling::Result<()> {
    let (len, reps) = (5000, 8);
    println!("h,absorbed,mean_section_length,min_section_length,q_h,swaps_per_site");
    for h in 1..=5 {
        let params = ModelParams::uniform(2, Horizon::Finite(h))?;
        let mu = MovingDistribution::bounded_uniform(len, h)?;
        let out = run_replicates(
            reps,
            99,
            len,
            &params,
            &mu,
            2000.0,
            &RunOptions::default(),
            |_| (),
        )?;
        let mut absorbed = 0;
        let (mut mean_len, mut min_len, mut q_h, mut swaps) = (0.0, usize::MAX, 0.0, 0.0);
        for r in &out {
            let cfg = &r.summary.final_config;
            let dec = sections(cfg);
            absorbed += r.summary.absorbed as usize;
            mean_len += len as f64 / dec.sections.len() as f64;
            min_len = min_len.min(dec.sections.iter().map(|s| s.len).min().unwrap());
            q_h += q_l(cfg, h)?;
            swaps += r.summary.swaps_per_site();
        }
        let n = reps as f64;
        println!(
            "{h},{absorbed}/{reps},{:.2},{min_len},{:.4},{:.3}",
            mean_len / n,
            q_h / n,
            swaps / n
        );
    }
    Ok(())
}

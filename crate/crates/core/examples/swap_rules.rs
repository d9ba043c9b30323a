//! Verdicts of the swap rule on a few hand-picked configurations, including
//! the lazy and negative-threshold variants.

use schelling::model::{admissible_swaps, evaluate_swap, is_absorbing};
use schelling::{Horizon, ModelParams, MovingDistribution, RingConfiguration};

fn main() -> schelling::Result<()> {
    let base = ModelParams::uniform(2, Horizon::Finite(2))?;
    let variants = [
        ("tau=0", base.clone()),
        ("lazy", base.clone().with_lazy(true)),
        ("tau=-1", base.clone().with_tau(-1)),
    ];
    let cfg = RingConfiguration::from_rle("1:3,2:1,1:2,2:2,1:1,2:3", 2)?;
    println!("configuration {cfg}");
    print!("satisfaction ");
    for v in 0..cfg.len() {
        print!("{:>3}", cfg.sat(v));
    }
    println!();

    for (name, params) in &variants {
        println!("-- {name}");
        for v in (0..cfg.len()).filter(|&v| params.is_dissatisfied_value(cfg.sat(v))) {
            for d in [1usize, 2] {
                for u in [cfg.shift(v, d), cfg.shift(v, cfg.len() - d)] {
                    let verdict = evaluate_swap(&cfg, v, u, params)?;
                    println!(
                        "  {v:>2} -> {u:>2}: {:<18} (initiator {:+}, target {:+})",
                        verdict.reason.as_str(),
                        verdict.delta_initiator,
                        verdict.delta_target
                    );
                }
            }
        }
    }

    let mu = MovingDistribution::bounded_uniform(cfg.len(), 2)?;
    let swaps = admissible_swaps(&cfg, &mu, &base)?;
    println!("admissible swaps under h=2: {swaps:?}");
    let frozen = RingConfiguration::from_rle("1:3,2:4,1:3,2:3", 2)?;
    let frozen_mu = MovingDistribution::bounded_uniform(frozen.len(), 2)?;
    println!(
        "{frozen} absorbing: {}",
        is_absorbing(&frozen, &frozen_mu, &base)?
    );
    Ok(())
}

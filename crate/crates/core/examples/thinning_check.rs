//! Total-variation distance between simulated end states and the exact
//! transient law, for the honest engine and for one that skips the target
//! dissatisfaction check.

use schelling::oracle::{mc_vs_exact, mc_vs_exact_with};
use schelling::{Horizon, ModelParams, MovingDistribution};

fn main() -> schelling::Result<()> {
    let reps = 100_000;
    let params = ModelParams::uniform(2, Horizon::Finite(1))?;
    let mu = MovingDistribution::bounded_uniform(6, 1)?;
    for t in [0.0, 1.0, 5.0] {
        let r = mc_vs_exact(6, &params, &mu, t, reps, 1)?;
        println!(
            "L=6 h=1 t={t}: TV {:.4} (truncation {:.1e})",
            r.tv, r.truncation_error
        );
    }

    let params = ModelParams::uniform(2, Horizon::FullRing)?.with_tau(-1);
    let mu = MovingDistribution::ring_uniform(6)?;
    let mut relaxed = params.clone();
    relaxed.relax_target_check = true;
    let honest = mc_vs_exact(6, &params, &mu, 5.0, reps, 2)?;
    let broken = mc_vs_exact_with(6, &params, &relaxed, &mu, 5.0, reps, 2)?;
    println!(
        "ring-uniform tau=-1 t=5: honest TV {:.4}, target check skipped TV {:.4}",
        honest.tv, broken.tv
    );
    Ok(())
}

//! Exact analysis of a small ring: absorbing states, transient law by
//! uniformization, hitting probabilities and expected absorption time.
//!
//! `cargo run --release --example exact_oracle -- [L] [h]`

use schelling::oracle::{
    absorbing_states, absorption_analysis, build_generator, point_mass, product_law,
    transient_distribution,
};
use schelling::{Error, Horizon, ModelParams, MovingDistribution, RingConfiguration};

fn main() -> schelling::Result<()> {
    let arg = |i: usize, d: &str| std::env::args().nth(i).unwrap_or_else(|| d.to_string());
    let len: usize = arg(1, "8").parse().unwrap();
    let h: usize = arg(2, "1").parse().unwrap();
    let params = ModelParams::uniform(2, Horizon::Finite(h))?;
    let mu = MovingDistribution::bounded_uniform(len, h)?;
    let g = build_generator(len, &params, &mu)?;
    let space = *g.space();
    println!(
        "{} states, {} nonzero rates, max exit rate {:.3}",
        g.dim(),
        g.nnz(),
        g.max_exit_rate()
    );

    let absorbing = absorbing_states(&g);
    println!("{} absorbing states, e.g.", absorbing.len());
    for &s in absorbing.iter().take(6) {
        println!("  {}", space.decode(s));
    }

    let pi0 = product_law(&space, &params.p)?;
    for t in [0.0, 1.0, 5.0, 25.0] {
        let tr = transient_distribution(&g, &pi0, t)?;
        let mass: f64 = absorbing.iter().map(|&s| tr.dist[s]).sum();
        println!(
            "t={t:>5}: P(absorbed) {mass:.5}, truncation {:.1e}, {} terms",
            tr.truncation_error, tr.terms
        );
    }

    // From the product law some sectors never freeze; the analysis says so.
    match absorption_analysis(&g, &pi0) {
        Err(Error::RecurrentClasses { classes }) => {
            println!(
                "{} recurrent non-absorbing classes from the product law, e.g.",
                classes.len()
            );
            for s in classes[0].iter().take(4) {
                println!("  {}", space.decode(*s));
            }
        }
        other => println!("{other:?}"),
    }

    let start =
        RingConfiguration::from_rle(&format!("1:{},2:{}", len / 2 - 1, len - len / 2 + 1), 2)?;
    let start = {
        let mut c = start;
        c.apply_swap(0, len - 1)?;
        c
    };
    println!("from {start}:");
    match absorption_analysis(&g, &point_mass(&space, &start)?) {
        Ok(a) => {
            for (s, p) in &a.hitting {
                println!("  -> {} with probability {p:.4}", space.decode(*s));
            }
            println!("  expected absorption time {:.4}", a.expected_time);
        }
        Err(e) => println!("  {e}"),
    }
    Ok(())
}

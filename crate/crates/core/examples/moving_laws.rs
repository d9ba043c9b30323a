//! The moving distributions: bounded uniform, ring-wide uniform, folded
//! geometric and a custom pmf parsed from text.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use schelling::moving::ring_distance;
use schelling::MovingDistribution;

fn describe(name: &str, mu: &MovingDistribution) {
    let len = mu.len();
    let mean_dist: f64 = (0..len)
        .map(|q| mu.prob(q) * ring_distance(q, len) as f64)
        .sum();
    println!(
        "{name:<16} horizon {:?}, support {} offsets, mean ring distance {mean_dist:.3}",
        mu.horizon(),
        mu.support().len()
    );
}

fn main() -> schelling::Result<()> {
    let len = 11;
    describe("bounded h=2", &MovingDistribution::bounded_uniform(len, 2)?);
    describe("ring uniform", &MovingDistribution::ring_uniform(len)?);
    let geo = MovingDistribution::folded_geometric(len, 0.5)?;
    describe("geometric 0.5", &geo);

    let text = "# offset probability\n-5 0\n-4 0\n-3 0\n-2 0.1\n-1 0.3\n0 0.2\n1 0.3\n2 0.1\n3 0\n4 0\n5 0\n";
    let custom = MovingDistribution::parse_pmf_text(text, len)?;
    describe("custom", &custom);
    print!("custom pmf written back:\n{}", custom.to_pmf_text());

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut counts = vec![0u32; len];
    for _ in 0..100_000 {
        counts[geo.sample(&mut rng)] += 1;
    }
    println!("geometric sample frequencies vs pmf:");
    for (q, &n) in counts.iter().enumerate() {
        println!("  q={q:>2} {:.4} {:.4}", n as f64 / 1e5, geo.prob(q));
    }
    Ok(())
}

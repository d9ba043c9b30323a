//! The moving distribution: the law of the offset between an active agent and
//! the site it asks to swap with.
//!
//! Offsets are stored modulo `L`, so offset `q` from site `v` targets
//! `v + q mod L`. A finite horizon `h` means positive mass exactly on offsets
//! within ring distance `h` (including offset 0); a full-ring law charges
//! every offset.

use std::fmt::Write as _;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{param, Error, Result};
use crate::model::Horizon;

const SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct MovingDistribution {
    pmf: Vec<f64>,
    horizon: Horizon,
    support: Vec<usize>,
    sampler: Sampler,
}

#[derive(Debug, Clone)]
enum Sampler {
    /// Equal mass on every support offset.
    Uniform,
    Weighted(WeightedIndex<f64>),
}

/// Ring distance of offset `q` on a ring of `len` sites.
pub fn ring_distance(q: usize, len: usize) -> usize {
    let q = q % len;
    q.min(len - q)
}

impl MovingDistribution {
    /// Uniform mass `1/(2h+1)` on offsets `-h..=h`.
    pub fn bounded_uniform(len: usize, h: usize) -> Result<Self> {
        if len < 3 {
            return param(format!("ring length must be at least 3, got {len}"));
        }
        if 2 * h + 1 > len {
            return param(format!("horizon {h} needs 2h+1 <= L, got L={len}"));
        }
        let w = 1.0 / (2 * h + 1) as f64;
        let pmf = (0..len)
            .map(|q| if ring_distance(q, len) <= h { w } else { 0.0 })
            .collect();
        Self::build(pmf, Horizon::Finite(h), true)
    }

    /// Two-sided geometric law with ratio `rho`, folded onto the ring.
    pub fn folded_geometric(len: usize, rho: f64) -> Result<Self> {
        if len < 3 {
            return param(format!("ring length must be at least 3, got {len}"));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return param(format!("geometric ratio must lie in (0,1), got {rho}"));
        }
        // sum over k = q (mod L) of rho^|k| = (rho^q + rho^(L-q)) / (1 - rho^L)
        let mut pmf: Vec<f64> = (0..len)
            .map(|q| rho.powi(q as i32) + rho.powi((len - q) as i32))
            .collect();
        let total: f64 = pmf.iter().sum();
        pmf.iter_mut().for_each(|x| *x /= total);
        Self::build(pmf, Horizon::FullRing, false)
    }

    /// Mass `1/L` on every offset.
    pub fn ring_uniform(len: usize) -> Result<Self> {
        if len < 3 {
            return param(format!("ring length must be at least 3, got {len}"));
        }
        Self::build(vec![1.0 / len as f64; len], Horizon::FullRing, true)
    }

    /// Arbitrary offset law, indexed by offset `0..L`. The horizon is inferred
    /// from the support, which must be a symmetric ring ball around 0 or the
    /// whole ring.
    pub fn from_pmf(pmf: Vec<f64>) -> Result<Self> {
        let len = pmf.len();
        if len < 3 {
            return param(format!("ring length must be at least 3, got {len}"));
        }
        if let Some(bad) = pmf.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return param(format!("probabilities must be finite and >= 0, got {bad}"));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return param(format!("probabilities sum to {total}, expected 1"));
        }
        let horizon = if pmf.iter().all(|&x| x > 0.0) {
            Horizon::FullRing
        } else {
            let h = (0..len)
                .filter(|&q| pmf[q] > 0.0)
                .map(|q| ring_distance(q, len))
                .max()
                .unwrap_or(0);
            for (q, &m) in pmf.iter().enumerate() {
                if (m > 0.0) != (ring_distance(q, len) <= h) {
                    return param(format!(
                        "support must be exactly the offsets within distance {h}; offset {q} breaks it"
                    ));
                }
            }
            if 2 * h + 1 > len {
                return param(format!("horizon {h} needs 2h+1 <= L, got L={len}"));
            }
            Horizon::Finite(h)
        };
        let first = pmf.iter().copied().find(|&x| x > 0.0).unwrap_or(0.0);
        let uniform = pmf.iter().all(|&x| x == 0.0 || x == first);
        Self::build(pmf, horizon, uniform)
    }

    fn build(pmf: Vec<f64>, horizon: Horizon, uniform: bool) -> Result<Self> {
        let support: Vec<usize> = (0..pmf.len()).filter(|&q| pmf[q] > 0.0).collect();
        let sampler = if uniform {
            Sampler::Uniform
        } else {
            let weights = support.iter().map(|&q| pmf[q]);
            Sampler::Weighted(
                WeightedIndex::new(weights).map_err(|e| Error::Parameter(e.to_string()))?,
            )
        };
        Ok(MovingDistribution {
            pmf,
            horizon,
            support,
            sampler,
        })
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Probability of offset `q` (taken modulo `L`).
    pub fn prob(&self, q: usize) -> f64 {
        self.pmf[q % self.pmf.len()]
    }

    /// Offsets with positive mass, ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.sampler {
            Sampler::Uniform => self.support[rng.random_range(0..self.support.len())],
            Sampler::Weighted(w) => self.support[w.sample(rng)],
        }
    }

    /// Parses a pmf file: one `q p_q` line per offset `q` in
    /// `-floor(L/2) ..= ceil(L/2) - 1`. Blank lines and `#` comments are
    /// ignored.
    pub fn parse_pmf_text(text: &str, len: usize) -> Result<Self> {
        if len < 3 {
            return param(format!("ring length must be at least 3, got {len}"));
        }
        let lo = -((len / 2) as i64);
        let hi = len.div_ceil(2) as i64 - 1;
        let mut pmf = vec![f64::NAN; len];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(q), Some(p), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(format!(
                    "line {}: expected `q p_q`",
                    lineno + 1
                )));
            };
            let q: i64 = q
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad offset `{q}`", lineno + 1)))?;
            let p: f64 = p
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad probability `{p}`", lineno + 1)))?;
            if q < lo || q > hi {
                return Err(Error::Parse(format!(
                    "line {}: offset {q} outside {lo}..={hi}",
                    lineno + 1
                )));
            }
            let idx = q.rem_euclid(len as i64) as usize;
            if !pmf[idx].is_nan() {
                return Err(Error::Parse(format!(
                    "line {}: offset {q} repeated",
                    lineno + 1
                )));
            }
            pmf[idx] = p;
        }
        if let Some(missing) = pmf.iter().position(|x| x.is_nan()) {
            let q = if missing as i64 > hi {
                missing as i64 - len as i64
            } else {
                missing as i64
            };
            return Err(Error::Parse(format!("offset {q} missing")));
        }
        Self::from_pmf(pmf)
    }

    pub fn load_pmf_file(path: &Path, len: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse_pmf_text(&text, len)
    }

    /// Inverse of [`MovingDistribution::parse_pmf_text`].
    pub fn to_pmf_text(&self) -> String {
        let len = self.len() as i64;
        let lo = -(len / 2);
        let hi = (len + 1) / 2 - 1;
        let mut out = String::new();
        for q in lo..=hi {
            let _ = writeln!(out, "{q} {:e}", self.pmf[q.rem_euclid(len) as usize]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Pearson chi-square statistic of `counts` against `probs`.
    fn chi_square(counts: &[u64], probs: &[f64]) -> f64 {
        let n: u64 = counts.iter().sum();
        counts
            .iter()
            .zip(probs)
            .map(|(&c, &p)| {
                let e = p * n as f64;
                (c as f64 - e).powi(2) / e
            })
            .sum()
    }

    // Upper 1% points of chi-square for small degrees of freedom.
    const CHI2_99: [f64; 12] = [
        6.635, 9.210, 11.345, 13.277, 15.086, 16.812, 18.475, 20.090, 21.666, 23.209, 24.725,
        26.217,
    ];

    #[test]
    fn bounded_uniform_support() {
        let mu = MovingDistribution::bounded_uniform(10, 1).unwrap();
        assert_eq!(mu.support(), &[0, 1, 9]);
        for q in [0, 1, 9] {
            assert!((mu.prob(q) - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(mu.prob(2), 0.0);
        assert_eq!(mu.horizon(), Horizon::Finite(1));
        assert!(MovingDistribution::bounded_uniform(5, 3).is_err());
    }

    #[test]
    fn support_law_for_every_horizon() {
        for len in 3..14 {
            for h in 0..=(len - 1) / 2 {
                let mu = MovingDistribution::bounded_uniform(len, h).unwrap();
                for q in 0..len {
                    assert_eq!(mu.prob(q) > 0.0, ring_distance(q, len) <= h);
                }
                let total: f64 = mu.pmf().iter().sum();
                assert!((total - 1.0).abs() < SUM_TOL);
            }
        }
    }

    #[test]
    fn folded_geometric_matches_truncated_series() {
        let (len, rho) = (4usize, 0.5f64);
        let mu = MovingDistribution::folded_geometric(len, rho).unwrap();
        let mut direct = vec![0.0; len];
        for k in -200i64..=200 {
            direct[k.rem_euclid(len as i64) as usize] += rho.powi(k.unsigned_abs() as i32);
        }
        let total: f64 = direct.iter().sum();
        for (q, d) in direct.iter().enumerate() {
            assert!((mu.prob(q) - d / total).abs() < 1e-14, "offset {q}");
        }
        for len in [3, 7, 20] {
            let mu = MovingDistribution::folded_geometric(len, 0.8).unwrap();
            for q in 1..len {
                assert!((mu.prob(q) - mu.prob(len - q)).abs() < 1e-15);
            }
            let total: f64 = mu.pmf().iter().sum();
            assert!((total - 1.0).abs() < SUM_TOL);
            assert_eq!(mu.horizon(), Horizon::FullRing);
            assert_eq!(mu.support().len(), len);
        }
        assert!(MovingDistribution::folded_geometric(6, 1.0).is_err());
        assert!(MovingDistribution::folded_geometric(6, 0.0).is_err());
    }

    #[test]
    fn ring_uniform_mass() {
        let mu = MovingDistribution::ring_uniform(8).unwrap();
        assert_eq!(mu.prob(0), 1.0 / 8.0);
        let total: f64 = mu.pmf().iter().sum();
        assert!((total - 1.0).abs() < SUM_TOL);
    }

    #[test]
    fn degenerate_law_always_returns_zero() {
        let mu = MovingDistribution::bounded_uniform(6, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..1000).all(|_| mu.sample(&mut rng) == 0));
    }

    #[test]
    fn sampling_is_deterministic() {
        let mu = MovingDistribution::folded_geometric(12, 0.6).unwrap();
        let a: Vec<_> = {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            (0..200).map(|_| mu.sample(&mut rng)).collect()
        };
        let b: Vec<_> = {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            (0..200).map(|_| mu.sample(&mut rng)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn bounded_uniform_frequencies_within_three_sigma() {
        let mu = MovingDistribution::bounded_uniform(10, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let mut counts = [0u64; 10];
        for _ in 0..n {
            counts[mu.sample(&mut rng)] += 1;
        }
        let sigma = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for q in [0, 1, 9] {
            assert!((counts[q] as f64 - n as f64 / 3.0).abs() < 3.0 * sigma);
        }
    }

    #[test]
    fn sampling_passes_chi_square() {
        let n = 100_000;
        for mu in [
            MovingDistribution::ring_uniform(10).unwrap(),
            MovingDistribution::folded_geometric(9, 0.7).unwrap(),
            MovingDistribution::bounded_uniform(13, 4).unwrap(),
        ] {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let mut counts = vec![0u64; mu.len()];
            for _ in 0..n {
                counts[mu.sample(&mut rng)] += 1;
            }
            let sup = mu.support();
            let c: Vec<u64> = sup.iter().map(|&q| counts[q]).collect();
            let p: Vec<f64> = sup.iter().map(|&q| mu.prob(q)).collect();
            let stat = chi_square(&c, &p);
            assert!(
                stat < CHI2_99[sup.len() - 2],
                "chi2 {stat} with {} cells",
                sup.len()
            );
        }
    }

    #[test]
    fn pmf_file_round_trip_and_validation() {
        let mu = MovingDistribution::folded_geometric(7, 0.4).unwrap();
        let back = MovingDistribution::parse_pmf_text(&mu.to_pmf_text(), 7).unwrap();
        for q in 0..7 {
            assert!((back.prob(q) - mu.prob(q)).abs() < 1e-15);
        }
        let text = "-2 0\n-1 0.25\n0 0.5\n1 0.25\n# tail\n";
        let parsed = MovingDistribution::parse_pmf_text(text, 4).unwrap();
        assert_eq!(parsed.horizon(), Horizon::Finite(1));
        assert_eq!(parsed.prob(3), 0.25);

        // Gap in the support.
        assert!(MovingDistribution::parse_pmf_text("-2 0.2\n-1 0\n0 0.6\n1 0.2\n", 4).is_err());
        // Missing offset, out of range offset, bad sum.
        assert!(MovingDistribution::parse_pmf_text("-2 0\n-1 0.5\n0 0.5\n", 4).is_err());
        assert!(MovingDistribution::parse_pmf_text("-2 0\n-1 0.25\n0 0.5\n2 0.25\n", 4).is_err());
        assert!(MovingDistribution::parse_pmf_text("-2 0\n-1 0.25\n0 0.4\n1 0.25\n", 4).is_err());
    }
}

use crate::error::{Error, Result};

/// Binned counts over monotone edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    edges: Vec<f64>,
    counts: Vec<u64>,
    outside: u64,
}

impl Histogram {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("histogram edges must be strictly increasing".into()));
        }
        let bins = edges.len() - 1;
        Ok(Self {
            edges,
            counts: vec![0; bins],
            outside: 0,
        })
    }

    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 || !(hi > lo) {
            return Err(Error::InvalidParameter(format!("bad range [{lo}, {hi}) with {bins} bins")));
        }
        Self::new((0..=bins).map(|k| lo + (hi - lo) * k as f64 / bins as f64).collect())
    }

    pub fn add(&mut self, x: f64) {
        let (lo, hi) = (self.edges[0], self.edges[self.edges.len() - 1]);
        if !(x >= lo && x < hi) {
            self.outside += 1;
            return;
        }
        let k = self.edges.partition_point(|&e| e <= x) - 1;
        self.counts[k] += 1;
    }

    pub fn extend<I: IntoIterator<Item = f64>>(&mut self, xs: I) {
        for x in xs {
            self.add(x);
        }
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Samples that fell outside the binned range.
    pub fn outside(&self) -> u64 {
        self.outside
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Densities normalized over the binned range (integrate to one).
    pub fn densities(&self) -> Vec<f64> {
        let total: u64 = self.counts.iter().sum();
        self.edges
            .windows(2)
            .zip(&self.counts)
            .map(|(w, &c)| if total == 0 { 0.0 } else { c as f64 / (total as f64 * (w[1] - w[0])) })
            .collect()
    }

    /// Densities normalized by all samples, including those outside the range.
    pub fn densities_of_total(&self) -> Vec<f64> {
        let total = self.counts.iter().sum::<u64>() + self.outside;
        self.edges
            .windows(2)
            .zip(&self.counts)
            .map(|(w, &c)| if total == 0 { 0.0 } else { c as f64 / (total as f64 * (w[1] - w[0])) })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use rand::Rng;

    #[test]
    fn density_integrates_to_one() {
        let mut h = Histogram::new(vec![0.0, 0.1, 0.5, 0.55, 2.0]).unwrap();
        let mut rng = RngStream::new(0, 0).rng();
        h.extend((0..10_000).map(|_| rng.random::<f64>() * 2.5));
        let integral: f64 = h.densities().iter().zip(h.edges().windows(2)).map(|(d, w)| d * (w[1] - w[0])).sum();
        assert!((integral - 1.0).abs() < 1e-10);
        assert_eq!(h.counts().iter().sum::<u64>() + h.outside(), 10_000);
    }

    #[test]
    fn bins_are_half_open() {
        let mut h = Histogram::uniform(0.0, 1.0, 4).unwrap();
        h.extend([0.0, 0.25, 0.2499, 1.0, -0.1]);
        assert_eq!(h.counts(), &[2, 1, 0, 0]);
        assert_eq!(h.outside(), 2);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Histogram::new(vec![0.0, 0.0, 1.0]).is_err());
        assert!(Histogram::uniform(1.0, 0.0, 3).is_err());
    }
}

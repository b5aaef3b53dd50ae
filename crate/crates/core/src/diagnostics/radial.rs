use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::state::ParticleState;

/// Radially binned net charge density around ions.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub bin_width: f64,
    /// Bin centres.
    pub r: Vec<f64>,
    /// Counter-charge density `ρ(r)`: `-q_c Σ q_j` per centre and frame,
    /// divided by the shell volume.
    pub density: Vec<f64>,
    /// Number of (centre, partner) pairs counted in each bin.
    pub pairs: Vec<u64>,
    pub total_pairs: u64,
}

impl RadialProfile {
    /// `(r, ln(r ρ(r)))` for bins with positive density.
    pub fn log_profile(&self) -> Vec<(f64, f64)> {
        self.r
            .iter()
            .zip(&self.density)
            .filter(|(_, &d)| d > 0.0)
            .map(|(&r, &d)| (r, (r * d).ln()))
            .collect()
    }
}

/// Time-averaged net charge density around charged centres, up to `r_max`.
///
/// With `cations_only` the centres are the positive ions; otherwise every
/// charged particle is a centre and partner charges are weighted by the
/// centre's sign, which for a symmetric electrolyte estimates the same
/// profile with twice the statistics.
pub fn radial_net_charge(
    frames: &[ParticleState],
    charges: &[f64],
    bin_width: f64,
    r_max: f64,
    cations_only: bool,
) -> Result<RadialProfile> {
    if !(bin_width > 0.0 && r_max > bin_width) {
        return Err(Error::InvalidParameter(format!("bin width {bin_width}, range {r_max}")));
    }
    let bins = (r_max / bin_width).floor() as usize;
    let mut net = vec![0.0; bins];
    let mut pairs = vec![0u64; bins];
    let mut centres = 0u64;
    let mut d = [0.0; 8];
    for frame in frames {
        if frame.len() != charges.len() {
            return Err(Error::Shape(format!("{} charges for {} particles", charges.len(), frame.len())));
        }
        if let Some(l) = frame.box_length() {
            if r_max > 0.5 * l {
                return Err(Error::CutoffTooLarge { cutoff: r_max, half: 0.5 * l });
            }
        }
        let dim = frame.dim();
        let d = &mut d[..dim];
        for (c, &qc) in charges.iter().enumerate() {
            if qc == 0.0 || (cations_only && qc < 0.0) {
                continue;
            }
            centres += 1;
            let sign = qc.signum();
            for (j, &qj) in charges.iter().enumerate() {
                if j == c {
                    continue;
                }
                frame.displacement(c, j, d);
                let r = d.iter().map(|x| x * x).sum::<f64>().sqrt();
                let k = (r / bin_width) as usize;
                if k < bins {
                    net[k] -= sign * qj;
                    pairs[k] += 1;
                }
            }
        }
    }
    let r: Vec<f64> = (0..bins).map(|k| (k as f64 + 0.5) * bin_width).collect();
    let density = (0..bins)
        .map(|k| {
            let (a, b) = (k as f64 * bin_width, (k + 1) as f64 * bin_width);
            let shell = 4.0 / 3.0 * PI * (b.powi(3) - a.powi(3));
            if centres == 0 {
                0.0
            } else {
                net[k] / (centres as f64 * shell)
            }
        })
        .collect();
    let total_pairs = pairs.iter().sum();
    Ok(RadialProfile {
        bin_width,
        r,
        density,
        pairs,
        total_pairs,
    })
}

/// Least-squares line `y = slope·r + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Fit `ln(r ρ(r))` over bins whose centre lies in `[lo, hi]` and whose
/// density is positive.
pub fn fit_log_profile(profile: &RadialProfile, lo: f64, hi: f64) -> Result<LineFit> {
    let pts: Vec<(f64, f64)> = profile
        .log_profile()
        .into_iter()
        .filter(|(r, _)| *r >= lo && *r <= hi)
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "only {} usable bins in [{lo}, {hi}]",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
        points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use rand::Rng;
    use rand_distr::{Distribution, Gamma, StandardNormal};

    #[test]
    fn synthetic_screening_cloud_recovers_slope() {
        // Radii ~ Gamma(2, 1/κ) give a shell density ∝ e^{-κr}/r, i.e.
        // ln(r ρ) linear in r with slope -κ.
        let kappa = 1.941;
        let l = 12.0;
        let n_anions = 200_000;
        let mut rng = RngStream::new(7, 0).rng();
        let radius = Gamma::new(2.0, 1.0 / kappa).unwrap();
        let centre = [l / 2.0; 3];
        let mut xs = centre.to_vec();
        let mut charges = vec![1.0];
        while charges.len() <= n_anions {
            let r: f64 = radius.sample(&mut rng);
            if r >= 5.5 {
                continue;
            }
            let mut u: [f64; 3] = [0.0; 3];
            for c in &mut u {
                *c = StandardNormal.sample(&mut rng);
            }
            let norm = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
            for c in 0..3 {
                xs.push(centre[c] + r * u[c] / norm);
            }
            charges.push(-1.0);
        }
        let frame = ParticleState::new(3, xs).unwrap().periodic(l).unwrap();
        let p = radial_net_charge(&[frame], &charges, 0.05, 5.0, true).unwrap();
        let fit = fit_log_profile(&p, 0.5, 2.5).unwrap();
        assert!((fit.slope + kappa).abs() < 0.05, "{fit:?}");
        assert_eq!(p.total_pairs, p.pairs.iter().sum::<u64>());
        assert!(p.total_pairs <= n_anions as u64);
    }

    #[test]
    fn uniform_mixture_has_no_net_charge() {
        let l = 10.0;
        let n = 2000;
        let mut rng = RngStream::new(8, 0).rng();
        let xs: Vec<f64> = (0..n * 3).map(|_| rng.random::<f64>() * l).collect();
        let charges: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let frame = ParticleState::new(3, xs).unwrap().periodic(l).unwrap();
        let p = radial_net_charge(&[frame], &charges, 0.5, 4.5, false).unwrap();
        let rho = n as f64 / l.powi(3);
        for (k, d) in p.density.iter().enumerate() {
            // Poisson noise of the partner count in the shell, per centre.
            let shell = 4.0 / 3.0 * PI * (((k + 1) as f64 * 0.5).powi(3) - (k as f64 * 0.5).powi(3));
            let noise = (rho * shell * n as f64).sqrt() / (n as f64 * shell);
            assert!(d.abs() < 5.0 * noise, "bin {k}: {d} vs {noise}");
        }
    }

    #[test]
    fn rejects_range_beyond_half_box() {
        let frame = ParticleState::new(3, vec![0.0; 6]).unwrap().periodic(4.0).unwrap();
        assert!(radial_net_charge(&[frame], &[1.0, -1.0], 0.1, 2.5, true).is_err());
    }

    #[test]
    fn line_fit_is_exact_on_a_line() {
        let p = RadialProfile {
            bin_width: 0.1,
            r: vec![0.5, 1.0, 1.5, 2.0],
            density: [0.5, 1.0, 1.5, 2.0].iter().map(|&r: &f64| (-2.0 * r + 0.3f64).exp() / r).collect(),
            pairs: vec![1; 4],
            total_pairs: 4,
        };
        let fit = fit_log_profile(&p, 0.0, 3.0).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-12 && (fit.intercept - 0.3).abs() < 1e-12);
    }
}

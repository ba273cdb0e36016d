//! Linear-binned Gaussian kernel density estimate on a uniform grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::CHUNK_SIZE;
use crate::error::{Error, Result};

pub const DEFAULT_GRID_POINTS: usize = 512;

/// Kernel support in bandwidths; beyond this the Gaussian is below 1e-11.
const KERNEL_CUTOFF: f64 = 7.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl DensityEstimate {
    pub fn step(&self) -> f64 {
        if self.grid.len() < 2 {
            0.0
        } else {
            self.grid[1] - self.grid[0]
        }
    }

    /// Trapezoid integral over the grid.
    pub fn integral(&self) -> f64 {
        let h = self.step();
        self.density
            .windows(2)
            .map(|w| 0.5 * h * (w[0] + w[1]))
            .sum()
    }

    /// Grid argmax; ties go to the smallest t.
    pub fn argmax(&self) -> f64 {
        let mut best = 0;
        for (i, &d) in self.density.iter().enumerate() {
            if d > self.density[best] {
                best = i;
            }
        }
        self.grid[best]
    }
}

/// Silverman's rule `0.9 min(sd, IQR/1.34) n^(-1/5)`.
///
/// Falls back to whichever spread measure is nonzero.
pub fn silverman_bandwidth(std_dev: f64, iqr: f64, n: usize) -> Result<f64> {
    let a = iqr / 1.34;
    let spread = match (std_dev > 0.0, a > 0.0) {
        (true, true) => std_dev.min(a),
        (true, false) => std_dev,
        (false, true) => a,
        (false, false) => return Err(Error::DegenerateSample),
    };
    Ok(0.9 * spread * (n as f64).powf(-0.2))
}

/// Evaluates the KDE of `values` with bandwidth `h` on `grid_points` points
/// spanning `[max(0, min - 3h), max + 3h]`.
pub fn kde_on_grid(values: &[f64], h: f64, grid_points: usize) -> Result<DensityEstimate> {
    if values.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain {
            name: "bandwidth",
            value: h,
            expected: "(0, inf)",
        });
    }
    if grid_points < 2 {
        return Err(Error::Config {
            field: "kde_grid",
            reason: "need at least 2 grid points".into(),
        });
    }
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let lo = (min - 3.0 * h).max(0.0);
    let hi = max + 3.0 * h;
    let g = grid_points;
    let step = (hi - lo) / (g - 1) as f64;
    let grid: Vec<f64> = (0..g).map(|i| lo + i as f64 * step).collect();

    let weights = linear_bin(values, lo, step, g);

    let reach = ((KERNEL_CUTOFF * h / step).ceil() as usize).min(g - 1);
    let norm = 1.0 / (values.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let kernel: Vec<f64> = (0..=reach)
        .map(|j| {
            let z = j as f64 * step / h;
            (-0.5 * z * z).exp() * norm
        })
        .collect();

    let density = (0..g)
        .map(|i| {
            let from = i.saturating_sub(reach);
            let to = (i + reach).min(g - 1);
            (from..=to)
                .map(|j| weights[j] * kernel[i.abs_diff(j)])
                .sum::<f64>()
                .max(0.0)
        })
        .collect();

    Ok(DensityEstimate {
        grid,
        density,
        bandwidth: h,
    })
}

fn linear_bin(values: &[f64], lo: f64, step: f64, g: usize) -> Vec<f64> {
    let parts: Vec<Vec<f64>> = values
        .par_chunks(CHUNK_SIZE)
        .map(|chunk| {
            let mut w = vec![0.0; g];
            for &v in chunk {
                let pos = ((v - lo) / step).clamp(0.0, (g - 1) as f64);
                let i = (pos.floor() as usize).min(g - 2);
                let frac = pos - i as f64;
                w[i] += 1.0 - frac;
                w[i + 1] += frac;
            }
            w
        })
        .collect();
    let mut total = vec![0.0; g];
    for w in parts {
        for (t, x) in total.iter_mut().zip(w) {
            *t += x;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_peak() {
        let d = kde_on_grid(&[0.0], 1.0, 512).unwrap();
        assert_eq!(d.grid[0], 0.0);
        let peak = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((d.density[0] - peak).abs() < 1e-12);
        assert!((d.density[0] - 0.3989423).abs() < 1e-7);
    }

    #[test]
    fn symmetric_sample_gives_symmetric_density() {
        let c = 10.0;
        let offsets = [0.3, 0.7, 1.1, 1.9, 2.4, 0.05];
        let mut v = vec![c];
        for o in offsets {
            v.push(c - o);
            v.push(c + o);
        }
        let d = kde_on_grid(&v, 0.4, 401).unwrap();
        assert!((d.grid[200] - c).abs() < 1e-12);
        for i in 0..401 {
            assert!((d.density[i] - d.density[400 - i]).abs() < 1e-12, "i={i}");
        }
    }

    #[test]
    fn integrates_to_one_away_from_zero() {
        let v: Vec<f64> = (0..10_000).map(|i| 5.0 + (i as f64 * 0.618_033_988_7).fract()).collect();
        let d = kde_on_grid(&v, 0.1, 512).unwrap();
        assert!((d.integral() - 1.0).abs() < 1e-3, "{}", d.integral());
        assert!(d.density.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn silverman_rule() {
        let h = silverman_bandwidth(2.0, 1.34, 100_000).unwrap();
        assert!((h - 0.9 * 100_000f64.powf(-0.2)).abs() < 1e-15);
        assert!(silverman_bandwidth(0.0, 1.34, 10).is_ok());
        assert_eq!(silverman_bandwidth(0.0, 0.0, 10), Err(Error::DegenerateSample));
    }

    #[test]
    fn argmax_ties_go_left() {
        let d = DensityEstimate {
            grid: vec![0.0, 1.0, 2.0, 3.0],
            density: vec![0.1, 0.5, 0.5, 0.2],
            bandwidth: 1.0,
        };
        assert_eq!(d.argmax(), 1.0);
    }
}

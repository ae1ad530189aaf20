//! Post-processing of evolution output: stationary-basis populations, packet
//! centroid and width, and run-to-run comparison.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::Snapshot;
use crate::field::{real_inner, ComplexField, Quadrature};
use crate::stationary::SpectrumResult;

/// Relative tolerance used when matching snapshot times between runs.
pub const TIME_MATCH_TOLERANCE: f64 = 1e-9;

/// `P_n(t) = |<phi_n, psi(t)>|^2` for every snapshot and every basis state.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSeries {
    /// Eigenvalues of the basis the populations refer to.
    pub levels: Vec<f64>,
    pub times: Vec<f64>,
    /// `populations[t][n]`.
    pub populations: Vec<Vec<f64>>,
}

impl PopulationSeries {
    pub fn state(&self, n: usize) -> Vec<f64> {
        self.populations.iter().map(|row| row[n]).collect()
    }

    /// Largest `|P_n(t) - P_n(0)|` over the run.
    pub fn max_deviation(&self, n: usize) -> f64 {
        let p = self.state(n);
        let first = p.first().copied().unwrap_or(0.0);
        p.iter().map(|v| (v - first).abs()).fold(0.0, f64::max)
    }

    pub fn max_deviation_all(&self) -> f64 {
        (0..self.levels.len())
            .map(|n| self.max_deviation(n))
            .fold(0.0, f64::max)
    }
}

pub fn populations(snapshots: &[Snapshot], basis: &SpectrumResult) -> Result<PopulationSeries> {
    populations_with(snapshots, basis, Quadrature::Trapezoid)
}

pub fn populations_with(
    snapshots: &[Snapshot],
    basis: &SpectrumResult,
    rule: Quadrature,
) -> Result<PopulationSeries> {
    let fields: Vec<&ComplexField> = snapshots.iter().map(|s| &s.psi).collect();
    let times = snapshots.iter().map(|s| s.t).collect();
    Ok(PopulationSeries {
        levels: basis.eigenvalues.clone(),
        times,
        populations: field_populations(&fields, basis, rule)?,
    })
}

fn field_populations(
    fields: &[&ComplexField],
    basis: &SpectrumResult,
    rule: Quadrature,
) -> Result<Vec<Vec<f64>>> {
    fields
        .iter()
        .map(|psi| {
            basis
                .eigenvectors
                .iter()
                .map(|phi| phi.inner_with(psi, rule).map(|c| c.norm_sqr()))
                .collect()
        })
        .collect()
}

/// Centroid, width and norm of `|psi|^2` over time.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketStats {
    pub times: Vec<f64>,
    pub centroid: Vec<f64>,
    pub width: Vec<f64>,
    pub norm: Vec<f64>,
    /// Domain length when the grid is periodic; centroids are then circular means.
    pub period: Option<f64>,
}

impl PacketStats {
    /// Centroid track with periodic wrap-arounds removed.
    pub fn unwrapped_centroid(&self) -> Vec<f64> {
        let Some(l) = self.period else {
            return self.centroid.clone();
        };
        let mut out = Vec::with_capacity(self.centroid.len());
        let mut offset = 0.0;
        for (i, &c) in self.centroid.iter().enumerate() {
            if i > 0 {
                let prev = self.centroid[i - 1];
                let jump = c - prev;
                offset -= l * (jump / l).round();
            }
            out.push(c + offset);
        }
        out
    }

    /// Average centroid speed between the first and last sample.
    pub fn mean_speed(&self) -> Option<f64> {
        let c = self.unwrapped_centroid();
        let (t0, t1) = (*self.times.first()?, *self.times.last()?);
        if t1 == t0 {
            return None;
        }
        Some((c[c.len() - 1] - c[0]) / (t1 - t0))
    }

    /// `width(t_end) / width(0) - 1`.
    pub fn width_growth(&self) -> f64 {
        match (self.width.first(), self.width.last()) {
            (Some(&w0), Some(&w1)) if w0 > 0.0 => w1 / w0 - 1.0,
            _ => 0.0,
        }
    }
}

/// Moments of a single field. On periodic grids the centroid is the circular
/// mean and the width is the wrapped-normal width `L/(2 pi) sqrt(-2 ln R)`.
pub fn field_moments(psi: &ComplexField) -> (f64, f64, f64) {
    let grid = psi.grid();
    let rho = psi.density();
    let mass = real_inner(grid, &rho, &vec![1.0; rho.len()]);
    let norm = mass.sqrt();
    if mass == 0.0 {
        return (0.5 * (grid.x_min() + grid.x_max()), 0.0, 0.0);
    }
    let xs = grid.points();
    if grid.is_periodic() {
        let l = grid.length();
        let phase: Vec<Complex64> = xs
            .iter()
            .map(|x| Complex64::from_polar(1.0, 2.0 * PI * (x - grid.x_min()) / l))
            .collect();
        let re: Vec<f64> = phase.iter().map(|z| z.re).collect();
        let im: Vec<f64> = phase.iter().map(|z| z.im).collect();
        let z = Complex64::new(real_inner(grid, &rho, &re), real_inner(grid, &rho, &im)) / mass;
        let angle = z.arg().rem_euclid(2.0 * PI);
        let centroid = grid.x_min() + l * angle / (2.0 * PI);
        let r = z.norm().min(1.0);
        let width = l / (2.0 * PI) * (-2.0 * r.ln()).max(0.0).sqrt();
        (centroid, width, norm)
    } else {
        let mean = real_inner(grid, &rho, &xs) / mass;
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = real_inner(grid, &rho, &dev) / mass;
        (mean, var.max(0.0).sqrt(), norm)
    }
}

pub fn packet_stats(snapshots: &[Snapshot]) -> PacketStats {
    let mut out = PacketStats {
        times: Vec::with_capacity(snapshots.len()),
        centroid: Vec::with_capacity(snapshots.len()),
        width: Vec::with_capacity(snapshots.len()),
        norm: Vec::with_capacity(snapshots.len()),
        period: None,
    };
    for s in snapshots {
        let (c, w, n) = field_moments(&s.psi);
        out.times.push(s.t);
        out.centroid.push(c);
        out.width.push(w);
        out.norm.push(n);
        if s.psi.grid().is_periodic() {
            out.period = Some(s.psi.grid().length());
        }
    }
    out
}

/// Pairwise comparison of two runs sampled at the same times on the same grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceReport {
    pub samples: usize,
    /// `max_t ||psi_a(t) - psi_b(t)||`.
    pub max_l2_distance: f64,
    /// `max_{t,n} |P_a,n(t) - P_b,n(t)|`, when a basis is given.
    pub max_population_distance: Option<f64>,
    pub width_growth_a: f64,
    pub width_growth_b: f64,
    /// `|width_growth_a - width_growth_b|`.
    pub width_growth_divergence: f64,
}

fn check_times(a: &[Snapshot], b: &[Snapshot]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::TimeMismatch(format!(
            "{} snapshots against {}",
            a.len(),
            b.len()
        )));
    }
    for (sa, sb) in a.iter().zip(b) {
        let scale = sa.t.abs().max(sb.t.abs()).max(1.0);
        if (sa.t - sb.t).abs() > TIME_MATCH_TOLERANCE * scale {
            return Err(Error::TimeMismatch(format!("t = {} against t = {}", sa.t, sb.t)));
        }
        sa.psi.ensure_same_grid(&sb.psi)?;
    }
    Ok(())
}

pub fn compare_runs(a: &[Snapshot], b: &[Snapshot], basis: Option<&SpectrumResult>) -> Result<DivergenceReport> {
    check_times(a, b)?;
    let mut max_l2: f64 = 0.0;
    for (sa, sb) in a.iter().zip(b) {
        max_l2 = max_l2.max(sa.psi.distance(&sb.psi)?);
    }
    let max_population_distance = match basis {
        Some(basis) => {
            let pa = populations(a, basis)?;
            let pb = populations(b, basis)?;
            let d = pa
                .populations
                .iter()
                .zip(&pb.populations)
                .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).abs()))
                .fold(0.0, f64::max);
            Some(d)
        }
        None => None,
    };
    let ga = packet_stats(a).width_growth();
    let gb = packet_stats(b).width_growth();
    Ok(DivergenceReport {
        samples: a.len(),
        max_l2_distance: max_l2,
        max_population_distance,
        width_growth_a: ga,
        width_growth_b: gb,
        width_growth_divergence: (ga - gb).abs(),
    })
}

/// Largest change in any population when the midpoint rule replaces the
/// trapezoid rule.
pub fn quadrature_sensitivity(snapshots: &[Snapshot], basis: &SpectrumResult) -> Result<f64> {
    let t = populations_with(snapshots, basis, Quadrature::Trapezoid)?;
    let m = populations_with(snapshots, basis, Quadrature::Midpoint)?;
    Ok(t.populations
        .iter()
        .zip(&m.populations)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max))
}

/// Snapshot of a bare field, for post-processing fields not produced by `evolve`.
pub fn snapshot_of(psi: ComplexField, t: f64, step_index: usize) -> Snapshot {
    let norm = psi.norm();
    Snapshot {
        step_index,
        t,
        psi,
        psi_dot: None,
        diagnostics: crate::evolution::Diagnostics { norm, energy: f64::NAN },
    }
}

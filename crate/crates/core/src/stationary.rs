//! Eigensolvers for the stationary equations and residuals of the stationary
//! charged-particle equation.
//!
//! Eigenvalues come from Sylvester-inertia bisection on the banded operator;
//! eigenvectors from inverse iteration with Gram–Schmidt against the states
//! already found. Nothing is ever stored densely.

use num_complex::Complex64;

use crate::analytic::PlaneWave;
use crate::equation::{EquationSpec, Family};
use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid1D;
use crate::laplacian::LaplacianStencil;
use crate::linalg::SymOperator;

/// Relative gap (of the spectral width) under which eigenvalues are merged.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

const MAX_INVERSE_ITERATIONS: usize = 12;

/// What the eigenvalues of a [`SpectrumResult`] measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenvalueKind {
    Energy,
    /// Squared energy `E^2`, as produced by the relativistic stationary equation.
    EnergySquared,
}

/// Lowest eigenpairs of a stationary equation.
///
/// Eigenvalues are non-decreasing; members of a degenerate cluster carry the
/// identical (averaged) value so the distinct levels are strictly ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub kind: EigenvalueKind,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<ComplexField>,
}

impl SpectrumResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn grid(&self) -> Option<&Grid1D> {
        self.eigenvectors.first().map(|v| v.grid())
    }

    /// Energies: the eigenvalues themselves, or the positive root of `E^2`.
    pub fn energies(&self) -> Vec<f64> {
        match self.kind {
            EigenvalueKind::Energy => self.eigenvalues.clone(),
            EigenvalueKind::EnergySquared => {
                self.eigenvalues.iter().map(|e2| e2.max(0.0).sqrt()).collect()
            }
        }
    }

    /// Distinct levels with their multiplicities.
    pub fn levels(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &e in &self.eigenvalues {
            match out.last_mut() {
                Some((v, m)) if *v == e => *m += 1,
                _ => out.push((e, 1)),
            }
        }
        out
    }
}

/// Lowest `count` eigenpairs of a real symmetric chain/ring operator.
///
/// Returns raw eigenvalues (not merged) and eigenvectors normalised to unit
/// Euclidean length.
pub fn lowest_eigenpairs(op: &SymOperator, count: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = op.len();
    if count > n {
        return Err(Error::invalid(
            "n_states",
            format!("requested {count} states but only {n} unknowns"),
        ));
    }
    let (lo, hi) = op.gershgorin();
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let tol = 4.0 * f64::EPSILON * scale;

    let mut values = Vec::with_capacity(count);
    for j in 0..count {
        // smallest x with more than j eigenvalues below it
        let (mut a, mut b) = (lo - tol, hi + tol);
        if let Some(&prev) = values.last() {
            a = f64::max(a, prev - tol);
        }
        let mut iterations = 0;
        while b - a > tol {
            let mid = 0.5 * (a + b);
            if mid == a || mid == b {
                break;
            }
            if op.count_below(mid) > j {
                b = mid;
            } else {
                a = mid;
            }
            iterations += 1;
            if iterations > 200 {
                return Err(Error::NonConvergence { index: j });
            }
        }
        values.push(0.5 * (a + b));
    }

    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(count);
    for (j, &lambda) in values.iter().enumerate() {
        let sys = op.affine_band(-lambda, 1.0).factor(true)?;
        let mut x = start_vector(n, j);
        let mut converged = false;
        for _ in 0..MAX_INVERSE_ITERATIONS {
            let mut y = sys.solve(&x);
            orthogonalize(&mut y, &vectors);
            orthogonalize(&mut y, &vectors);
            let norm = euclid(&y);
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::NonConvergence { index: j });
            }
            y.iter_mut().for_each(|v| *v /= norm);
            x = y;
            let ax = op.apply(&x);
            let res = ax
                .iter()
                .zip(&x)
                .map(|(a, v)| (a - lambda * v).powi(2))
                .sum::<f64>()
                .sqrt();
            if res <= 1e3 * tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence { index: j });
        }
        fix_sign(&mut x);
        vectors.push(x);
    }
    Ok((values, vectors))
}

fn start_vector(n: usize, seed: usize) -> Vec<f64> {
    // deterministic pseudo-random start, SplitMix64
    let mut state = 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(seed as u64 + 1);
    (0..n)
        .map(|_| {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn orthogonalize(y: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let d: f64 = y.iter().zip(b).map(|(a, c)| a * c).sum();
        y.iter_mut().zip(b).for_each(|(a, c)| *a -= d * c);
    }
}

/// Largest-magnitude component made positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0.0;
    let mut sign = 1.0;
    for &x in v.iter() {
        // ties resolved by the first occurrence
        if x.abs() > best * (1.0 + 1e-9) {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn merge_degenerate(values: &mut [f64], width: f64) {
    let tol = DEGENERACY_TOLERANCE * width;
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end] - values[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            let mean = values[start..end].iter().sum::<f64>() / (end - start) as f64;
            values[start..end].iter_mut().for_each(|v| *v = mean);
        }
        start = end;
    }
}

/// `x^T (-L) x` for an active-range vector, written as a sum of squared
/// differences so that it is free of cancellation.
fn dirichlet_form(grid: &Grid1D, x: &[f64]) -> f64 {
    let h2 = grid.dx() * grid.dx();
    let m = x.len();
    let mut s: f64 = x.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    if grid.is_periodic() {
        s += (x[0] - x[m - 1]).powi(2);
    } else {
        s += x[0] * x[0] + x[m - 1] * x[m - 1];
    }
    s / h2
}

/// Operator of the form `alpha (-L) + diag(w)` on the active unknowns.
struct StationaryProblem<'a> {
    grid: &'a Grid1D,
    alpha: f64,
    /// Diagonal term sampled on the full grid.
    w: Vec<f64>,
    kind: EigenvalueKind,
}

impl StationaryProblem<'_> {
    fn operator(&self) -> SymOperator {
        LaplacianStencil::new(*self.grid).operator(-self.alpha, &self.w)
    }

    fn rayleigh(&self, x: &[f64]) -> f64 {
        let potential: f64 = self
            .grid
            .active_range()
            .zip(x)
            .map(|(i, v)| self.w[i] * v * v)
            .sum();
        let norm: f64 = x.iter().map(|v| v * v).sum();
        (self.alpha * dirichlet_form(self.grid, x) + potential) / norm
    }

    fn solve(&self, n_states: usize) -> Result<SpectrumResult> {
        let grid = self.grid;
        let limit = grid.len() - 2;
        if n_states > limit {
            return Err(Error::invalid(
                "n_states",
                format!("at most n_points - 2 = {limit} states may be requested"),
            ));
        }
        let op = self.operator();
        let (_, vectors) = lowest_eigenpairs(&op, n_states)?;
        // refine with the Rayleigh quotient, accurate to the square of the residual
        let mut values: Vec<f64> = vectors.iter().map(|v| self.rayleigh(v)).collect();
        let (lo, hi) = op.gershgorin();
        merge_degenerate(&mut values, hi - lo);
        let weight = grid.dx().sqrt();
        let eigenvectors = vectors
            .into_iter()
            .map(|v| {
                let mut full = vec![Complex64::new(0.0, 0.0); grid.len()];
                for (q, i) in grid.active_range().enumerate() {
                    full[i] = Complex64::new(v[q] / weight, 0.0);
                }
                ComplexField::from_raw(*grid, full)
            })
            .collect();
        Ok(SpectrumResult {
            kind: self.kind,
            eigenvalues: values,
            eigenvectors,
        })
    }
}

/// Discrete Hamiltonian `-(hbar^2/2m) L + V` on the active unknowns.
pub fn schrodinger_operator(spec: &EquationSpec, grid: &Grid1D) -> Result<SymOperator> {
    let k = spec.constants();
    let v = spec.potential().sample(grid)?;
    let scale = -k.hbar() * k.hbar() / (2.0 * k.m0());
    Ok(LaplacianStencil::new(*grid).operator(scale, &v))
}

/// Relativistic operator `E0^2 - c^2 hbar^2 L` on the active unknowns.
pub fn relativistic_operator(spec: &EquationSpec, grid: &Grid1D) -> SymOperator {
    let k = spec.constants();
    let e0 = k.rest_energy();
    let ch = k.c() * k.hbar();
    LaplacianStencil::new(*grid).operator(-ch * ch, &vec![e0 * e0; grid.len()])
}

/// Lowest eigenpairs of `[-hbar^2/(2m) d2 + V] psi = E psi`.
pub fn solve_schrodinger_stationary(
    spec: &EquationSpec,
    grid: &Grid1D,
    n_states: usize,
) -> Result<SpectrumResult> {
    spec.expect_family(&[Family::SchrodingerStationary, Family::SchrodingerTD, Family::NewTD])?;
    let k = spec.constants();
    StationaryProblem {
        grid,
        alpha: k.hbar() * k.hbar() / (2.0 * k.m0()),
        w: spec.potential().sample(grid)?,
        kind: EigenvalueKind::Energy,
    }
    .solve(n_states)
}

/// Lowest eigenpairs of `[E0^2 - c^2 hbar^2 d2] psi = E^2 psi`; eigenvalues are `E^2`.
pub fn solve_relativistic_stationary(
    spec: &EquationSpec,
    grid: &Grid1D,
    n_states: usize,
) -> Result<SpectrumResult> {
    spec.expect_family(&[Family::RelStationary, Family::RelNewTD, Family::KleinGordon])?;
    let k = spec.constants();
    let e0 = k.rest_energy();
    let ch = k.c() * k.hbar();
    StationaryProblem {
        grid,
        alpha: ch * ch,
        w: vec![e0 * e0; grid.len()],
        kind: EigenvalueKind::EnergySquared,
    }
    .solve(n_states)
}

/// Which printed form of the stationary charged-particle equation to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmForm {
    /// Momentum kept as the c-number `p` inside the bracket.
    CNumber,
    /// Momentum quantised; the outer Laplacian acts on bracket^2 psi.
    Operator,
}

/// Spatial candidate for a stationary residual.
#[derive(Debug, Clone)]
pub enum StationaryCandidate<'a> {
    /// Sampled field; derivatives by the discrete stencil.
    Sampled(&'a ComplexField),
    /// Closed-form plane wave evaluated at `t = 0` on the grid; analytic derivatives.
    PlaneWave { wave: &'a PlaneWave, grid: &'a Grid1D },
}

impl StationaryCandidate<'_> {
    fn grid(&self) -> Grid1D {
        match self {
            StationaryCandidate::Sampled(f) => *f.grid(),
            StationaryCandidate::PlaneWave { grid, .. } => **grid,
        }
    }

    fn values(&self) -> Vec<Complex64> {
        match self {
            StationaryCandidate::Sampled(f) => f.values().to_vec(),
            StationaryCandidate::PlaneWave { wave, grid } => {
                grid.points().iter().map(|&x| wave.value(x, 0.0)).collect()
            }
        }
    }

    fn laplacian(&self) -> Vec<Complex64> {
        match self {
            StationaryCandidate::Sampled(f) => LaplacianStencil::new(*f.grid()).apply_slice(f.values()),
            StationaryCandidate::PlaneWave { wave, grid } => grid
                .points()
                .iter()
                .map(|&x| wave.value(x, 0.0) * (-wave.k * wave.k))
                .collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        let grid = self.grid();
        let v = self.values();
        crate::field::inner_slices(&grid, &v, &v, crate::field::Quadrature::Trapezoid)
            .re
            .sqrt()
    }
}

/// Discrete L2 norm of the left-hand side of the stationary charged-particle
/// equation. Zero means the candidate solves it at this discretisation.
pub fn em_stationary_residual(
    spec: &EquationSpec,
    psi: &StationaryCandidate<'_>,
    form: EmForm,
) -> Result<f64> {
    spec.expect_family(&[Family::EmStationaryP])?;
    let grid = psi.grid();
    spec.em().check_grid(&grid)?;
    let lhs = em_stationary_lhs(spec, psi, form)?;
    Ok(crate::field::inner_slices(&grid, &lhs, &lhs, crate::field::Quadrature::Trapezoid)
        .re
        .sqrt())
}

pub(crate) fn em_stationary_lhs(
    spec: &EquationSpec,
    psi: &StationaryCandidate<'_>,
    form: EmForm,
) -> Result<Vec<Complex64>> {
    em_stationary_terms(spec, &psi.values(), &psi.laplacian(), form)
}

/// Pointwise left-hand side given samples and their Laplacian.
pub(crate) fn em_stationary_terms(
    spec: &EquationSpec,
    values: &[Complex64],
    lap: &[Complex64],
    form: EmForm,
) -> Result<Vec<Complex64>> {
    let k = spec.constants();
    let e0 = k.rest_energy();
    let energy = spec.require_energy()?;
    let p = spec.momentum();
    let p2: f64 = p.iter().map(|x| x * x).sum();
    match form {
        EmForm::CNumber => {
            let coeff = p2 / (e0 * e0 * k.hbar() * k.hbar());
            Ok((0..values.len())
                .map(|i| {
                    let b = crate::em_kinematics::gamma_l_value(
                        k,
                        p,
                        spec.em().vector.at(i),
                        spec.em().scalar.at(i),
                        energy,
                    );
                    lap[i] + values[i] * (coeff * b * b)
                })
                .collect())
        }
        EmForm::Operator => {
            let (_, phi) = spec.em().as_uniform().ok_or(Error::NonUniformPotential)?;
            // uniform A: the divergence term vanishes and the bracket is a scalar
            let charge = k.e();
            let bracket = -e0 - (energy - charge * phi) / e0 * charge * phi;
            let factor = 1.0 - bracket * bracket / (e0 * e0);
            Ok(lap.iter().map(|l| l * factor).collect())
        }
    }
}

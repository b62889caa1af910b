//! Iteration driver and the direct normal-equation solvers used to check it.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::grid::{wrapped_frequency, MeasuredSignal, Signal, SpectralSupport};
use crate::operators::{initial_estimate, weighted_step, RegularizationParams};
use crate::synthesis::nmse;

/// Denominator floor of the relative successive-iterate residual.
pub const RESIDUAL_FLOOR: f64 = 1e-300;

/// NMSE above which a run is declared divergent.
pub const DIVERGENCE_NMSE_DB: f64 = 100.0;

/// Condition number above which oracle solutions are flagged ill-posed.
pub const ILL_POSED_CONDITION: f64 = 1e12;

/// Largest bandlimited subspace the dense oracles will assemble.
pub const ORACLE_MAX_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Unregularized,
    Regularized(RegularizationParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub max_iters: usize,
    /// Stop once `‖f_{k+1} - f_k‖ / ‖f_k‖` falls to this value.
    pub residual_tol: f64,
    /// Keep every `record_every`-th entry (plus the last one).
    pub record_every: usize,
}

impl RunConfig {
    pub fn new(
        mode: Mode,
        max_iters: usize,
        residual_tol: f64,
        record_every: usize,
    ) -> Result<Self> {
        if max_iters == 0 {
            return Err(Error::param("max_iters must be at least 1"));
        }
        if residual_tol.is_nan() || residual_tol < 0.0 {
            return Err(Error::param("residual_tol must be >= 0"));
        }
        if record_every == 0 {
            return Err(Error::param("record_every must be at least 1"));
        }
        Ok(RunConfig {
            mode,
            max_iters,
            residual_tol,
            record_every,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Present only when a ground truth was supplied.
    pub nmse_db: Option<f64>,
    pub residual: f64,
    /// `‖f_{k+1} - f_k‖ / ‖f_k - f_{k-1}‖`; absent on the first step.
    pub contraction: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIters,
    ResidualTol,
    Diverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub records: Vec<IterationRecord>,
    pub final_signal: Signal,
    pub stop_reason: StopReason,
    /// Number of steps taken.
    pub iterations: usize,
}

impl IterationReport {
    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }
}

/// Runs the weighted iteration from the initial estimate.
///
/// A non-finite iterate, or an NMSE above [`DIVERGENCE_NMSE_DB`] when
/// `truth` is given, ends the run with [`Error::Diverged`] carrying the
/// report up to the last finite iterate.
pub fn run_extrapolation(
    meas: &MeasuredSignal,
    support: &SpectralSupport,
    cfg: &RunConfig,
    truth: Option<&Signal>,
) -> Result<IterationReport> {
    if let Some(t) = truth {
        support.shape().ensure_same(t.shape(), "truth")?;
    }
    let (keep, tau) = match cfg.mode {
        Mode::Unregularized => (1.0, 1.0),
        Mode::Regularized(p) => (p.contraction_factor(), p.tau()),
    };
    let mut f = initial_estimate(meas, support)?;
    if !f.is_finite() {
        return Err(Error::Diverged(Box::new(IterationReport {
            records: Vec::new(),
            final_signal: Signal::zeros(support.shape()),
            stop_reason: StopReason::Diverged,
            iterations: 0,
        })));
    }
    let mut records = Vec::new();
    let mut prev_diff: Option<f64> = None;

    for k in 1..=cfg.max_iters {
        let next = weighted_step(&f, meas, support, keep, tau)?;
        if !next.is_finite() {
            return Err(Error::Diverged(Box::new(IterationReport {
                records,
                final_signal: f,
                stop_reason: StopReason::Diverged,
                iterations: k,
            })));
        }
        let diff = next.distance(&f);
        let residual = diff / f.norm().max(RESIDUAL_FLOOR);
        let contraction = prev_diff.filter(|&p| p > 0.0).map(|p| diff / p);
        let nmse_db = truth.map(|t| nmse(t, &next)).transpose()?;
        prev_diff = Some(diff);
        f = next;

        let record = IterationRecord {
            iteration: k,
            nmse_db,
            residual,
            contraction,
        };
        if nmse_db.is_some_and(|v| v > DIVERGENCE_NMSE_DB) {
            records.push(record);
            return Err(Error::Diverged(Box::new(IterationReport {
                records,
                final_signal: f,
                stop_reason: StopReason::Diverged,
                iterations: k,
            })));
        }
        let stop = if residual <= cfg.residual_tol {
            Some(StopReason::ResidualTol)
        } else if k == cfg.max_iters {
            Some(StopReason::MaxIters)
        } else {
            None
        };
        if k % cfg.record_every == 0 || stop.is_some() {
            records.push(record);
        }
        if let Some(stop_reason) = stop {
            return Ok(IterationReport {
                records,
                final_signal: f,
                stop_reason,
                iterations: k,
            });
        }
    }
    unreachable!("loop returns on its last iteration")
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub signal: Signal,
    /// Ratio of extreme eigenvalues of the normal matrix (infinite when
    /// singular).
    pub condition_number: f64,
    /// Set when the condition number exceeds [`ILL_POSED_CONDITION`]; the
    /// returned signal is then the minimum-norm solution.
    pub ill_posed: bool,
}

/// Real orthonormal basis of the bandlimited subspace, one vector per
/// in-band bin: `cos` for self-mirrored bins, a `cos`/`sin` pair for each
/// mirror pair. Evaluated from the DFT definition, not through the FFT.
fn bandlimited_basis(support: &SpectralSupport) -> Vec<Vec<f64>> {
    let shape = support.shape();
    let n = shape.len();
    let dims = shape.dims();
    let points: Vec<Vec<usize>> = (0..n).map(|x| shape.unravel(x)).collect();
    let phase = |k: &[usize], x: &[usize]| -> f64 {
        let turns: f64 = k
            .iter()
            .zip(x)
            .zip(dims)
            .map(|((&ki, &xi), &d)| {
                // Reduce the integer product first to keep the angle small.
                let prod = (wrapped_frequency(ki, d) * xi as i64).rem_euclid(d as i64);
                prod as f64 / d as f64
            })
            .sum();
        2.0 * std::f64::consts::PI * turns
    };
    let mut basis = Vec::with_capacity(support.count());
    for bin in 0..n {
        if !support.contains(bin) {
            continue;
        }
        let mirror = shape.mirror(bin);
        let k = shape.unravel(bin);
        if mirror == bin {
            let s = 1.0 / (n as f64).sqrt();
            basis.push(points.iter().map(|x| s * phase(&k, x).cos()).collect());
        } else if bin < mirror {
            let s = (2.0 / n as f64).sqrt();
            basis.push(points.iter().map(|x| s * phase(&k, x).cos()).collect());
            basis.push(points.iter().map(|x| s * phase(&k, x).sin()).collect());
        }
    }
    basis
}

/// Solves `(B^T W B + mu I) c = B^T W h` over the bandlimited basis `B`,
/// with `W = sum_m w_m chi_m`.
fn solve_normal_equations(
    meas: &MeasuredSignal,
    support: &SpectralSupport,
    mu: f64,
) -> Result<OracleSolution> {
    support.shape().ensure_same(meas.shape(), "oracle")?;
    let dim = support.count();
    if dim > ORACLE_MAX_DIM {
        return Err(Error::param(format!(
            "bandlimited subspace dimension {dim} exceeds the dense-solve budget {ORACLE_MAX_DIM}"
        )));
    }
    let n = support.shape().len();
    let mut w = vec![0.0; n];
    for (region, weight) in meas.regions().iter() {
        for (wx, &inside) in w.iter_mut().zip(region.mask()) {
            if inside {
                *wx += weight;
            }
        }
    }
    let active: Vec<usize> = (0..n).filter(|&x| w[x] > 0.0).collect();
    let basis = bandlimited_basis(support);
    let h = meas.samples().values();

    let mut a = DMatrix::<f64>::zeros(dim, dim);
    let mut b = DVector::<f64>::zeros(dim);
    for i in 0..dim {
        let bi = &basis[i];
        b[i] = active.iter().map(|&x| w[x] * bi[x] * h[x]).sum();
        for j in 0..=i {
            let bj = &basis[j];
            let v: f64 = active.iter().map(|&x| w[x] * bi[x] * bj[x]).sum();
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
        a[(i, i)] += mu;
    }

    let eig = SymmetricEigen::new(a);
    let max = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let condition_number = if min > 0.0 { max / min } else { f64::INFINITY };
    let cutoff = max * 1e-14;
    let mut coeffs = DVector::<f64>::zeros(dim);
    for (col, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > cutoff {
            let v = eig.eigenvectors.column(col);
            coeffs += v * (v.dot(&b) / lambda);
        }
    }
    let mut values = vec![0.0; n];
    for (c, bv) in coeffs.iter().zip(&basis) {
        for (out, x) in values.iter_mut().zip(bv) {
            *out += c * x;
        }
    }
    Ok(OracleSolution {
        signal: Signal::new(support.shape().clone(), values)?,
        condition_number,
        ill_posed: condition_number > ILL_POSED_CONDITION,
    })
}

/// Minimizer over bandlimited `f` of `sum_m w_m ‖chi_m f - h‖²`, solved
/// densely on the in-band coefficients.
pub fn least_squares_oracle(
    meas: &MeasuredSignal,
    support: &SpectralSupport,
) -> Result<OracleSolution> {
    solve_normal_equations(meas, support, 0.0)
}

/// Minimizer over bandlimited `f` of `sum_m w_m ‖chi_m f - h‖² + mu ‖f‖²`.
pub fn tikhonov_oracle(
    meas: &MeasuredSignal,
    support: &SpectralSupport,
    mu: f64,
) -> Result<OracleSolution> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::param(format!("mu = {mu} must be positive")));
    }
    solve_normal_equations(meas, support, mu)
}

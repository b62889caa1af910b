//! Eigen-analysis of `Q = P chi_D P` on the bandlimited subspace and the
//! contraction constants derived from its spectrum.
//!
//! The eigenvalues measure how much of a bandlimited signal's energy can sit
//! inside a region; they are the discrete counterpart of the prolate
//! spheroidal concentration values. A discrete grid signal may be wholly
//! supported in the region, so `λ = 1` is attainable here.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::grid::{MeasuredSignal, Region, Signal, SpectralSupport};
use crate::operators::{bandlimit_project, composite_apply, weighted_step, RegularizationParams};
use crate::synthesis::SeededStream;

/// Slack allowed outside `[0, 1]` before an eigenvalue is treated as an error.
pub const EIGEN_RANGE_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenOptions {
    pub max_iters: usize,
    /// Seed of the random starting block.
    pub seed: u64,
    /// Extra block vectors carried beyond the requested count.
    pub oversample: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            max_iters: 10_000,
            seed: 0,
            oversample: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    region_index: usize,
    eigenvalues: Vec<f64>,
    eigenvectors: Option<Vec<Signal>>,
    residuals: Vec<f64>,
}

impl EigenSpectrum {
    /// Spectrum from known eigenvalues, without vectors.
    pub fn from_eigenvalues(region_index: usize, eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::param("spectrum needs at least one eigenvalue"));
        }
        for (i, &l) in eigenvalues.iter().enumerate() {
            if !(-EIGEN_RANGE_SLACK..=1.0 + EIGEN_RANGE_SLACK).contains(&l) {
                return Err(Error::param(format!(
                    "eigenvalue {i} = {l} is outside [0, 1]"
                )));
            }
        }
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::param(
                "eigenvalues must be sorted in descending order",
            ));
        }
        let residuals = vec![0.0; eigenvalues.len()];
        Ok(EigenSpectrum {
            region_index,
            eigenvalues,
            eigenvectors: None,
            residuals,
        })
    }

    pub fn region_index(&self) -> usize {
        self.region_index
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvalue `n`, clamped to `[0, 1]`.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        self.eigenvalues[n].clamp(0.0, 1.0)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| l.clamp(0.0, 1.0)).collect()
    }

    /// Values as computed, before clamping.
    pub fn raw_eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> Option<&[Signal]> {
        self.eigenvectors.as_deref()
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n >= self.eigenvalues.len() {
            return Err(Error::param(format!(
                "truncation index {n} needs at least {} eigenvalues, spectrum has {}",
                n + 1,
                self.eigenvalues.len()
            )));
        }
        Ok(())
    }
}

/// Modified Gram-Schmidt (two passes) of `v` against `basis`; returns the
/// norm left after removing the projections.
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn random_bandlimited_vector(
    support: &SpectralSupport,
    stream: &mut SeededStream,
) -> Result<Vec<f64>> {
    let shape = support.shape();
    let raw = Signal::from_raw(
        shape.clone(),
        (0..shape.len()).map(|_| stream.normal()).collect(),
    );
    Ok(bandlimit_project(&raw, support)?.into_values())
}

/// Orthonormalizes `vectors` in place, replacing directions that collapse
/// (rank deficiency of `Q`) with fresh random bandlimited vectors.
fn orthonormalize(
    vectors: Vec<Vec<f64>>,
    support: &SpectralSupport,
    stream: &mut SeededStream,
) -> Result<Vec<Vec<f64>>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for mut v in vectors {
        let mut before = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut after = orthogonalize(&mut v, &basis);
        let mut attempts = 0;
        while !(before > 0.0 && after > 1e-8 * before) {
            attempts += 1;
            if attempts > 16 {
                return Err(Error::Internal(
                    "could not extend the orthonormal block inside the bandlimited subspace".into(),
                ));
            }
            v = random_bandlimited_vector(support, stream)?;
            before = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            after = orthogonalize(&mut v, &basis);
        }
        for x in v.iter_mut() {
            *x /= after;
        }
        basis.push(v);
    }
    Ok(basis)
}

fn fix_sign(v: &mut [f64]) {
    let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-8 * peak) {
        if *first < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
}

/// Top `count` eigenpairs of `P chi_D P` restricted to the bandlimited
/// subspace, with default [`EigenOptions`].
pub fn eigen_spectrum(
    region: &Region,
    support: &SpectralSupport,
    count: usize,
    tol: f64,
) -> Result<EigenSpectrum> {
    eigen_spectrum_with(region, support, count, tol, &EigenOptions::default())
}

/// Blocked subspace iteration with Rayleigh-Ritz extraction. Only operator
/// applications are used. Converged when every requested pair has
/// `‖Qψ - λψ‖ < tol`.
pub fn eigen_spectrum_with(
    region: &Region,
    support: &SpectralSupport,
    count: usize,
    tol: f64,
    options: &EigenOptions,
) -> Result<EigenSpectrum> {
    support
        .shape()
        .ensure_same(region.shape(), "eigen_spectrum")?;
    let dim = support.count();
    if count == 0 || count > dim {
        return Err(Error::param(format!(
            "eigenpair count {count} must lie in 1..={dim} (bandlimited subspace dimension)"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::param("eigen tolerance must be positive"));
    }
    let shape = support.shape().clone();
    let block = (count + options.oversample).min(dim);
    let mut stream = SeededStream::new(options.seed);
    let start = (0..block)
        .map(|_| random_bandlimited_vector(support, &mut stream))
        .collect::<Result<Vec<_>>>()?;
    let mut basis = orthonormalize(start, support, &mut stream)?;

    let apply = |v: &[f64]| -> Result<Vec<f64>> {
        Ok(composite_apply(
            &Signal::from_raw(shape.clone(), v.to_vec()),
            region,
            support,
        )?
        .into_values())
    };

    let mut best = vec![f64::INFINITY; count];
    for _ in 0..options.max_iters.max(1) {
        let images = basis.iter().map(|v| apply(v)).collect::<Result<Vec<_>>>()?;
        let mut h = DMatrix::<f64>::zeros(block, block);
        for i in 0..block {
            for j in 0..=i {
                let a: f64 = basis[i].iter().zip(&images[j]).map(|(x, y)| x * y).sum();
                let b: f64 = basis[j].iter().zip(&images[i]).map(|(x, y)| x * y).sum();
                let v = 0.5 * (a + b);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

        let combine = |src: &[Vec<f64>], col: usize| -> Vec<f64> {
            let mut out = vec![0.0; src[0].len()];
            for (row, s) in src.iter().enumerate() {
                let c = eig.eigenvectors[(row, col)];
                for (o, x) in out.iter_mut().zip(s) {
                    *o += c * x;
                }
            }
            out
        };
        let ritz: Vec<Vec<f64>> = order.iter().map(|&c| combine(&basis, c)).collect();
        let ritz_images: Vec<Vec<f64>> = order.iter().map(|&c| combine(&images, c)).collect();
        let values: Vec<f64> = order.iter().map(|&c| eig.eigenvalues[c]).collect();
        let residuals: Vec<f64> = (0..count)
            .map(|i| {
                ritz_images[i]
                    .iter()
                    .zip(&ritz[i])
                    .map(|(q, v)| (q - values[i] * v).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        for (b, r) in best.iter_mut().zip(&residuals) {
            *b = b.min(*r);
        }

        // A full block spans the whole subspace, so one extraction is exact.
        if residuals.iter().all(|&r| r < tol) || block == dim {
            let mut vectors = Vec::with_capacity(count);
            for mut v in ritz.into_iter().take(count) {
                fix_sign(&mut v);
                vectors.push(Signal::from_raw(shape.clone(), v));
            }
            let eigenvalues: Vec<f64> = values[..count].to_vec();
            if let Some(l) = eigenvalues
                .iter()
                .find(|l| !(-EIGEN_RANGE_SLACK..=1.0 + EIGEN_RANGE_SLACK).contains(*l))
            {
                return Err(Error::Internal(format!("eigenvalue {l} left [0, 1]")));
            }
            return Ok(EigenSpectrum {
                region_index: 0,
                eigenvalues,
                eigenvectors: Some(vectors),
                residuals,
            });
        }
        basis = orthonormalize(ritz_images, support, &mut stream)?;
    }
    let worst = best.iter().cloned().fold(0.0, f64::max);
    Err(Error::NoConvergence {
        iterations: options.max_iters,
        worst,
        residuals: best,
    })
}

/// Spectra for every region of a set, tagged with their region index.
pub fn region_spectra(
    regions: &[Region],
    support: &SpectralSupport,
    count: usize,
    tol: f64,
    options: &EigenOptions,
) -> Result<Vec<EigenSpectrum>> {
    regions
        .iter()
        .enumerate()
        .map(|(m, r)| {
            let mut spec = eigen_spectrum_with(r, support, count, tol, options)?;
            spec.region_index = m;
            Ok(spec)
        })
        .collect()
}

/// `1 - λ_N`: contraction constant of the single-region step on the span of
/// the top `N + 1` eigenvectors.
pub fn lipschitz_unregularized(spec: &EigenSpectrum, n: usize) -> Result<f64> {
    spec.check_index(n)?;
    Ok(1.0 - spec.eigenvalue(n))
}

/// `2 / (λ_0 + λ_N + 2 mu)`: largest step size for which the regularized
/// constant is governed by `λ_N`.
pub fn tau_upper_bound(spec: &EigenSpectrum, n: usize, mu: f64) -> Result<f64> {
    spec.check_index(n)?;
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::param(format!("mu = {mu} must be finite and >= 0")));
    }
    Ok(2.0 / (spec.eigenvalue(0) + spec.eigenvalue(n) + 2.0 * mu))
}

/// `|1 - tau (λ_N + mu)|`, valid for `tau <= tau_upper_bound`.
pub fn lipschitz_regularized(
    spec: &EigenSpectrum,
    n: usize,
    params: &RegularizationParams,
) -> Result<f64> {
    let bound = tau_upper_bound(spec, n, params.mu())?;
    if params.tau() > bound {
        return Err(Error::param(format!(
            "tau = {} exceeds {bound}; contraction is not guaranteed",
            params.tau()
        )));
    }
    Ok((1.0 - params.tau() * (spec.eigenvalue(n) + params.mu())).abs())
}

/// Constant obtained at `tau = tau_upper_bound`:
/// `1 - 2 (λ_N + mu) / (λ_0 + λ_N + 2 mu)`.
pub fn lipschitz_at_tau_bound(lambda_0: f64, lambda_n: f64, mu: f64) -> f64 {
    1.0 - 2.0 * (lambda_n + mu) / (lambda_0 + lambda_n + 2.0 * mu)
}

/// Weights proportional to `λ_N` of each region, normalized to one.
pub fn suggest_weights(spectra: &[EigenSpectrum], n: usize) -> Result<Vec<f64>> {
    if spectra.is_empty() {
        return Err(Error::param("no spectra supplied"));
    }
    let lambdas = spectra
        .iter()
        .map(|s| s.check_index(n).map(|_| s.eigenvalue(n)))
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = lambdas.iter().sum();
    if let Some(m) = lambdas.iter().position(|&l| l <= 0.0) {
        if total <= 0.0 {
            return Err(Error::DegenerateSpectrum(format!(
                "λ_{n} is zero for every region"
            )));
        }
        return Err(Error::DegenerateSpectrum(format!(
            "λ_{n} is zero for region {m}; it would receive no weight"
        )));
    }
    Ok(lambdas.iter().map(|l| l / total).collect())
}

/// Predicted against measured per-step contraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionEstimate {
    pub predicted: f64,
    pub measured: f64,
    pub subspace_dim: usize,
}

/// `sum_m w_m L_m`, with `L_m` from [`lipschitz_unregularized`] or
/// [`lipschitz_regularized`].
pub fn predicted_contraction(
    spectra: &[EigenSpectrum],
    weights: &[f64],
    n: usize,
    params: Option<&RegularizationParams>,
) -> Result<f64> {
    if spectra.len() != weights.len() {
        return Err(Error::param("one spectrum per weight is required"));
    }
    spectra.iter().zip(weights).try_fold(0.0, |acc, (s, &w)| {
        let l = match params {
            Some(p) => lipschitz_regularized(s, n, p)?,
            None => lipschitz_unregularized(s, n)?,
        };
        Ok(acc + w * l)
    })
}

/// Measures `‖Tf - Tg‖ / ‖f - g‖` over `trials` random differences `f - g`
/// confined to the top `n + 1` eigenvectors, and compares against the
/// predicted constant.
///
/// With one region the difference lives in that region's leading
/// eigenvectors. With several regions the eigenbases differ, so `n + 1` must
/// equal the full subspace dimension and the difference is any bandlimited
/// signal.
pub fn estimate_contraction(
    meas: &MeasuredSignal,
    support: &SpectralSupport,
    spectra: &[EigenSpectrum],
    n: usize,
    params: Option<&RegularizationParams>,
    trials: usize,
    seed: u64,
) -> Result<ContractionEstimate> {
    let weights = meas.regions().weights();
    let predicted = predicted_contraction(spectra, weights, n, params)?;
    let dim = support.count();
    let multi = spectra.len() > 1;
    if multi && n + 1 != dim {
        return Err(Error::param(format!(
            "with several regions the truncation must cover the whole subspace (N = {})",
            dim - 1
        )));
    }
    let vectors = if multi {
        None
    } else {
        Some(
            spectra[0]
                .eigenvectors()
                .ok_or_else(|| Error::param("spectrum carries no eigenvectors"))?,
        )
    };
    let (keep, tau) = match params {
        Some(p) => (p.contraction_factor(), p.tau()),
        None => (1.0, 1.0),
    };
    let mut stream = SeededStream::new(seed);
    let base = crate::operators::initial_estimate(meas, support)?;
    let t_base = weighted_step(&base, meas, support, keep, tau)?;
    let mut measured = 0.0f64;
    for _ in 0..trials.max(1) {
        let diff = match vectors {
            Some(vs) => vs[..=n]
                .iter()
                .fold(Signal::zeros(support.shape()), |acc, v| {
                    acc.add_scaled(stream.normal(), v)
                }),
            None => Signal::from_raw(
                support.shape().clone(),
                random_bandlimited_vector(support, &mut stream)?,
            ),
        };
        let f = base.add_scaled(1.0, &diff);
        let tf = weighted_step(&f, meas, support, keep, tau)?;
        measured = measured.max(tf.distance(&t_base) / diff.norm());
    }
    Ok(ContractionEstimate {
        predicted,
        measured,
        subspace_dim: n + 1,
    })
}

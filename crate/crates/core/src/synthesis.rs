//! Reproducible test signals and the NMSE / out-of-band SNR metrics.
//!
//! # Random stream
//!
//! Every generator draws from ChaCha20 (20 rounds, stream 0) keyed with the
//! 64-bit seed in little-endian order in the first eight key bytes and zeros
//! in the remaining 24. A uniform variate is `(next_u64 >> 11) * 2^-53`;
//! standard normals come from the Box-Muller transform applied to
//! consecutive uniform pairs `(u1, u2)` with `u1` replaced by `1 - u1`,
//! yielding `r cos(θ)` then `r sin(θ)`. Any implementation following these
//! steps reproduces the same signals.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{GridShape, Signal, SpectralSupport};
use crate::operators::bandlimit_project;

/// Out-of-band energy below this fraction of the total counts as zero.
pub const EXACT_BANDLIMIT_FLOOR: f64 = 1e-28;

/// Seeded uniform / standard-normal source.
pub struct SeededStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl SeededStream {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        SeededStream {
            rng: ChaCha20Rng::from_seed(key),
            spare: None,
        }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisSpec {
    pub shape: GridShape,
    pub support: SpectralSupport,
    pub seed: u64,
    pub rms: f64,
}

impl SynthesisSpec {
    pub fn new(shape: GridShape, support: SpectralSupport, seed: u64, rms: f64) -> Result<Self> {
        shape.ensure_same(support.shape(), "synthesis support")?;
        if !(rms.is_finite() && rms > 0.0) {
            return Err(Error::param(format!("rms = {rms} must be positive")));
        }
        Ok(SynthesisSpec {
            shape,
            support,
            seed,
            rms,
        })
    }
}

/// Fills Hermitian-symmetric coefficients on the bins selected by `pick`,
/// visiting bins in flat order and drawing only for the lower index of each
/// mirror pair (one real draw for self-mirrored bins).
fn hermitian_coefficients(
    shape: &GridShape,
    stream: &mut SeededStream,
    pick: impl Fn(usize) -> bool,
) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::default(); shape.len()];
    for k in 0..shape.len() {
        if !pick(k) {
            continue;
        }
        let mirror = shape.mirror(k);
        if mirror == k {
            coeffs[k] = Complex64::new(stream.normal(), 0.0);
        } else if k < mirror {
            let re = stream.normal();
            let im = stream.normal();
            coeffs[k] = Complex64::new(re, im);
            coeffs[mirror] = Complex64::new(re, -im);
        }
    }
    coeffs
}

fn real_inverse(support: &SpectralSupport, mut coeffs: Vec<Complex64>) -> Vec<f64> {
    support.fft().inverse(&mut coeffs);
    let scale = 1.0 / coeffs.len() as f64;
    coeffs.iter().map(|c| c.re * scale).collect()
}

fn rms_of(values: &[f64]) -> f64 {
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

/// Exactly bandlimited random field with independent standard-normal
/// in-band coefficients, rescaled to the requested RMS.
pub fn random_bandlimited(spec: &SynthesisSpec) -> Result<Signal> {
    let mut stream = SeededStream::new(spec.seed);
    let coeffs = hermitian_coefficients(&spec.shape, &mut stream, |k| spec.support.contains(k));
    let values = real_inverse(&spec.support, coeffs);
    let current = rms_of(&values);
    if current == 0.0 {
        return Err(Error::Synthesis("all in-band draws were zero".into()));
    }
    Signal::new(
        spec.shape.clone(),
        values.iter().map(|v| v / current * spec.rms).collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseMode {
    /// Superimposed spatial Gaussian bumps.
    #[default]
    GaussianBumps,
    /// Random out-of-band DFT coefficients.
    Spectral,
}

/// How the out-of-band perturbation is generated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub mode: NoiseMode,
    /// Number of Gaussian bumps.
    pub bumps: usize,
    /// Standard deviation range of the bumps, in samples.
    pub min_width: f64,
    pub max_width: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            mode: NoiseMode::GaussianBumps,
            bumps: 8,
            min_width: 0.5,
            max_width: 2.0,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.mode == NoiseMode::GaussianBumps {
            if self.bumps == 0 {
                return Err(Error::param("at least one Gaussian bump is required"));
            }
            if !(self.min_width > 0.0
                && self.min_width <= self.max_width
                && self.max_width.is_finite())
            {
                return Err(Error::param(format!(
                    "bump widths [{}, {}] must satisfy 0 < min <= max",
                    self.min_width, self.max_width
                )));
            }
        }
        Ok(())
    }
}

fn gaussian_bumps(
    shape: &GridShape,
    spec: &NoiseSpec,
    amplitude: f64,
    stream: &mut SeededStream,
) -> Vec<f64> {
    let dims = shape.dims();
    let mut values = vec![0.0; shape.len()];
    for _ in 0..spec.bumps {
        let center: Vec<f64> = dims.iter().map(|&d| stream.uniform() * d as f64).collect();
        let width = spec.min_width + (spec.max_width - spec.min_width) * stream.uniform();
        let height = amplitude * stream.normal();
        for (flat, v) in values.iter_mut().enumerate() {
            let r2: f64 = shape
                .unravel(flat)
                .iter()
                .zip(&center)
                .zip(dims)
                .map(|((&i, &c), &d)| {
                    // Periodic distance on the torus.
                    let mut delta = (i as f64 - c).abs() % d as f64;
                    if delta > d as f64 / 2.0 {
                        delta = d as f64 - delta;
                    }
                    delta * delta
                })
                .sum();
            *v += height * (-r2 / (2.0 * width * width)).exp();
        }
    }
    values
}

/// Adds an out-of-band perturbation at `target_snr_db` using the default
/// [`NoiseSpec`].
pub fn add_out_of_band_noise(
    h: &Signal,
    support: &SpectralSupport,
    target_snr_db: f64,
    seed: u64,
) -> Result<Signal> {
    add_out_of_band_noise_with(h, support, target_snr_db, seed, &NoiseSpec::default())
}

/// Adds an out-of-band perturbation so that the result has the requested
/// in-band / out-of-band energy ratio.
///
/// In bump mode the bumps' in-band leakage is kept as generated; only their
/// out-of-band part is scaled, with the ratio taken against the in-band
/// energy of the result (`h` plus leakage) so [`snr_in_out`] of the output
/// reads back the target.
pub fn add_out_of_band_noise_with(
    h: &Signal,
    support: &SpectralSupport,
    target_snr_db: f64,
    seed: u64,
    spec: &NoiseSpec,
) -> Result<Signal> {
    support.shape().ensure_same(h.shape(), "noise target")?;
    if !target_snr_db.is_finite() {
        return Err(Error::param("target SNR must be finite"));
    }
    spec.validate()?;
    let projected = bandlimit_project(h, support)?;
    if projected.distance(h) > 1e-8 * h.norm() {
        return Err(Error::Contract(
            "noise target signal is not bandlimited".into(),
        ));
    }
    let shape = h.shape();
    let mut stream = SeededStream::new(seed);
    let (inband, outband) = match spec.mode {
        NoiseMode::GaussianBumps => {
            let amplitude = rms_of(h.values()).max(f64::MIN_POSITIVE);
            let bumps = Signal::from_raw(
                shape.clone(),
                gaussian_bumps(shape, spec, amplitude, &mut stream),
            );
            let inband = bandlimit_project(&bumps, support)?;
            let outband = bumps.sub(&inband);
            (inband, outband)
        }
        NoiseMode::Spectral => {
            let coeffs = hermitian_coefficients(shape, &mut stream, |k| !support.contains(k));
            let outband = Signal::from_raw(shape.clone(), real_inverse(support, coeffs));
            (Signal::zeros(shape), outband)
        }
    };
    let clean = h.add_scaled(1.0, &inband);
    let out_norm = outband.norm();
    if out_norm <= 1e-12 * (clean.norm() + inband.norm()).max(f64::MIN_POSITIVE) || out_norm == 0.0
    {
        return Err(Error::Synthesis(
            "perturbation has no out-of-band energy; widen the grid or narrow the bumps".into(),
        ));
    }
    let factor = clean.norm() / (out_norm * 10f64.powf(target_snr_db / 20.0));
    let result = clean.add_scaled(factor, &outband);
    if !result.is_finite() {
        return Err(Error::Synthesis("scaled perturbation overflowed".into()));
    }
    Ok(result)
}

/// In-band and out-of-band energies from the DFT via Parseval.
pub fn band_energies(f: &Signal, support: &SpectralSupport) -> Result<(f64, f64)> {
    support.shape().ensure_same(f.shape(), "band_energies")?;
    let mut buf: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    support.fft().forward(&mut buf);
    let (mut inside, mut outside) = (0.0, 0.0);
    for (c, &keep) in buf.iter().zip(support.mask()) {
        if keep {
            inside += c.norm_sqr();
        } else {
            outside += c.norm_sqr();
        }
    }
    let n = buf.len() as f64;
    Ok((inside / n, outside / n))
}

/// `10 log10(in-band energy / out-of-band energy)` in dB.
pub fn snr_in_out(f: &Signal, support: &SpectralSupport) -> Result<f64> {
    let (inside, outside) = band_energies(f, support)?;
    if outside <= EXACT_BANDLIMIT_FLOOR * (inside + outside) {
        return Err(Error::ExactlyBandlimited);
    }
    Ok(10.0 * (inside / outside).log10())
}

/// Normalized mean square error `10 log10(‖h - f‖² / ‖h‖²)` in dB.
/// Returns negative infinity when `f` equals `h` exactly.
pub fn nmse(h: &Signal, estimate: &Signal) -> Result<f64> {
    h.shape().ensure_same(estimate.shape(), "nmse")?;
    let reference = h.norm_sq();
    if reference == 0.0 {
        return Err(Error::UndefinedMetric(
            "reference signal has zero norm".into(),
        ));
    }
    let err = h.distance(estimate);
    if err == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(10.0 * (err * err / reference).log10())
}

//! Bandlimiting projection, region truncation and the iteration steps built
//! from them.
//!
//! Steps evaluate the weighted sum region by region, each term projected on
//! its own, and accumulate in ascending region order so results are
//! bit-reproducible.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{MeasuredSignal, Region, Signal, SpectralSupport};

/// Relative size of the imaginary part tolerated after the inverse DFT.
pub const IMAG_RESIDUAL_TOL: f64 = 1e-10;

/// Relative tolerance of the bandlimited-input precondition on steps.
pub const BANDLIMIT_TOL: f64 = 1e-8;

/// Tikhonov weight `mu` and step size `tau` of the regularized step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizationParams {
    mu: f64,
    tau: f64,
}

impl RegularizationParams {
    /// Accepts `mu >= 0` and `0 < tau < 2 / (1 + 2 mu)`.
    ///
    /// `mu = 0` is allowed so the regularized step can be compared with the
    /// plain one; contraction needs `mu > 0`, see [`Self::is_contraction`].
    pub fn new(mu: f64, tau: f64) -> Result<Self> {
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::param(format!("mu = {mu} must be finite and >= 0")));
        }
        let bound = 2.0 / (1.0 + 2.0 * mu);
        if !(tau > 0.0 && tau < bound) {
            return Err(Error::param(format!(
                "tau = {tau} must lie in the open interval (0, {bound})"
            )));
        }
        Ok(RegularizationParams { mu, tau })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn is_contraction(&self) -> bool {
        self.mu > 0.0
    }

    /// Lipschitz constant `1 - mu tau` of the regularized step.
    pub fn contraction_factor(&self) -> f64 {
        1.0 - self.mu * self.tau
    }
}

fn project_values(values: &[f64], support: &SpectralSupport) -> Result<Vec<f64>> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let fft = support.fft();
    fft.forward(&mut buf);
    for (bin, &keep) in buf.iter_mut().zip(support.mask()) {
        if !keep {
            *bin = Complex64::default();
        }
    }
    fft.inverse(&mut buf);
    let scale = 1.0 / values.len() as f64;
    let mut imag_sq = 0.0;
    let mut input_sq = 0.0;
    let out = buf
        .iter()
        .zip(values)
        .map(|(c, v)| {
            imag_sq += c.im * c.im;
            input_sq += v * v;
            c.re * scale
        })
        .collect();
    let imag = imag_sq.sqrt() * scale;
    if imag > IMAG_RESIDUAL_TOL * input_sq.sqrt() {
        return Err(Error::Internal(format!(
            "projection left an imaginary residual of {imag:.3e}; support mask is not Hermitian"
        )));
    }
    Ok(out)
}

/// Orthogonal projection onto signals whose DFT vanishes outside `support`.
pub fn bandlimit_project(f: &Signal, support: &SpectralSupport) -> Result<Signal> {
    support
        .shape()
        .ensure_same(f.shape(), "bandlimit_project")?;
    let values = project_values(f.values(), support)?;
    Ok(Signal::from_raw(f.shape().clone(), values))
}

/// Pointwise product with the region indicator.
pub fn region_truncate(f: &Signal, region: &Region) -> Result<Signal> {
    region.shape().ensure_same(f.shape(), "region_truncate")?;
    let values = f
        .values()
        .iter()
        .zip(region.mask())
        .map(|(&v, &inside)| if inside { v } else { 0.0 })
        .collect();
    Ok(Signal::from_raw(f.shape().clone(), values))
}

fn check_measurement(meas: &MeasuredSignal, support: &SpectralSupport) -> Result<()> {
    support.shape().ensure_same(meas.shape(), "measurement")
}

/// Starting point of the iteration: the sum over regions of the projected
/// truncated measurements.
pub fn initial_estimate(meas: &MeasuredSignal, support: &SpectralSupport) -> Result<Signal> {
    check_measurement(meas, support)?;
    let h = meas.samples();
    let mut acc = vec![0.0; h.values().len()];
    for region in meas.regions().regions() {
        let term = project_values(region_truncate(h, region)?.values(), support)?;
        for (a, t) in acc.iter_mut().zip(term) {
            *a += t;
        }
    }
    Ok(Signal::from_raw(h.shape().clone(), acc))
}

pub(crate) fn check_bandlimited(f: &Signal, support: &SpectralSupport) -> Result<()> {
    support.shape().ensure_same(f.shape(), "step input")?;
    let projected = bandlimit_project(f, support)?;
    let gap = projected.distance(f);
    if gap > BANDLIMIT_TOL * f.norm() {
        return Err(Error::Contract(format!(
            "step input is not bandlimited (‖Pf - f‖ = {gap:.3e}, ‖f‖ = {:.3e})",
            f.norm()
        )));
    }
    Ok(())
}

/// `sum_m w_m P(keep * f + tau * chi_m (h - f))`, in ascending region order.
pub(crate) fn weighted_step(
    f: &Signal,
    meas: &MeasuredSignal,
    support: &SpectralSupport,
    keep: f64,
    tau: f64,
) -> Result<Signal> {
    let h = meas.samples().values();
    let fv = f.values();
    let mut acc = vec![0.0; fv.len()];
    let mut term = vec![0.0; fv.len()];
    for (region, weight) in meas.regions().iter() {
        for ((t, (&fx, &hx)), &inside) in term.iter_mut().zip(fv.iter().zip(h)).zip(region.mask()) {
            *t = if inside {
                keep * fx + tau * (hx - fx)
            } else {
                keep * fx
            };
        }
        let projected = project_values(&term, support)?;
        for (a, p) in acc.iter_mut().zip(projected) {
            *a += weight * p;
        }
    }
    Ok(Signal::from_raw(f.shape().clone(), acc))
}

/// One step of the weighted iteration,
/// `sum_m w_m P(f + chi_m (h - f))`.
///
/// `f` must be bandlimited to within [`BANDLIMIT_TOL`].
pub fn papoulis_step(
    f: &Signal,
    meas: &MeasuredSignal,
    support: &SpectralSupport,
) -> Result<Signal> {
    check_measurement(meas, support)?;
    check_bandlimited(f, support)?;
    weighted_step(f, meas, support, 1.0, 1.0)
}

/// One step of the regularized iteration,
/// `sum_m w_m P((1 - mu tau) f + tau chi_m (h - f))`.
pub fn regularized_step(
    f: &Signal,
    meas: &MeasuredSignal,
    support: &SpectralSupport,
    params: &RegularizationParams,
) -> Result<Signal> {
    check_measurement(meas, support)?;
    check_bandlimited(f, support)?;
    weighted_step(f, meas, support, params.contraction_factor(), params.tau())
}

/// Unweighted projected Landweber step on the region union,
/// `P(f + chi_union (h - f))`.
pub fn landweber_step(
    f: &Signal,
    meas: &MeasuredSignal,
    support: &SpectralSupport,
) -> Result<Signal> {
    check_measurement(meas, support)?;
    check_bandlimited(f, support)?;
    let union = meas.regions().union_mask();
    let values: Vec<f64> = f
        .values()
        .iter()
        .zip(meas.samples().values())
        .zip(&union)
        .map(|((&fx, &hx), &inside)| if inside { hx } else { fx })
        .collect();
    Ok(Signal::from_raw(
        f.shape().clone(),
        project_values(&values, support)?,
    ))
}

/// `P chi_D P f`, the operator whose eigenpairs are the discrete prolate
/// analogues for region `D`.
pub fn composite_apply(f: &Signal, region: &Region, support: &SpectralSupport) -> Result<Signal> {
    support.shape().ensure_same(f.shape(), "composite_apply")?;
    region.shape().ensure_same(f.shape(), "composite_apply")?;
    let inner = bandlimit_project(f, support)?;
    bandlimit_project(&region_truncate(&inner, region)?, support)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridShape, WeightedRegionSet};
    use crate::synthesis::{random_bandlimited, SynthesisSpec};
    use proptest::prelude::*;

    fn shape(d: &[usize]) -> GridShape {
        GridShape::new(d.to_vec()).unwrap()
    }

    fn lcg_signal(sh: &GridShape, seed: u64) -> Signal {
        let mut s = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let values = (0..sh.len())
            .map(|_| {
                s = s
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect();
        Signal::new(sh.clone(), values).unwrap()
    }

    fn tone(sh: &GridShape, k: usize) -> Signal {
        let n = sh.len() as f64;
        let values = (0..sh.len())
            .map(|x| (2.0 * std::f64::consts::PI * (k * x) as f64 / n).cos())
            .collect();
        Signal::new(sh.clone(), values).unwrap()
    }

    fn bandlimited(sh: &GridShape, s: &SpectralSupport, seed: u64) -> Signal {
        random_bandlimited(&SynthesisSpec::new(sh.clone(), s.clone(), seed, 1.0).unwrap()).unwrap()
    }

    fn two_region_meas(sh: &GridShape, h: &Signal, weights: Vec<f64>) -> MeasuredSignal {
        let r1 = Region::from_rect(sh, &[0, 0], &[4, 6]).unwrap();
        let r2 = Region::from_rect(sh, &[8, 5], &[5, 5]).unwrap();
        MeasuredSignal::observe(WeightedRegionSet::new(vec![r1, r2], weights).unwrap(), h).unwrap()
    }

    #[test]
    fn impulse_onto_dc_is_constant() {
        let sh = shape(&[8]);
        let s = SpectralSupport::lowpass(&sh, &[0]).unwrap();
        let mut v = vec![0.0; 8];
        v[0] = 1.0;
        let out = bandlimit_project(&Signal::new(sh, v).unwrap(), &s).unwrap();
        for &x in out.values() {
            assert!((x - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn projection_fixes_range_and_kills_complement() {
        let sh = shape(&[16]);
        let s = SpectralSupport::lowpass(&sh, &[2]).unwrap();
        let inband = tone(&sh, 2);
        let out = bandlimit_project(&inband, &s).unwrap();
        assert!(out.distance(&inband) <= 1e-10 * inband.norm());
        let outband = tone(&sh, 5);
        assert!(bandlimit_project(&outband, &s).unwrap().norm() < 1e-10 * outband.norm());
    }

    #[test]
    fn shape_mismatch_is_parameter_error() {
        let s = SpectralSupport::lowpass(&shape(&[8]), &[1]).unwrap();
        let f = Signal::zeros(&shape(&[4]));
        assert!(matches!(
            bandlimit_project(&f, &s),
            Err(Error::Parameter(_))
        ));
        let r = Region::full(&shape(&[8]));
        assert!(matches!(region_truncate(&f, &r), Err(Error::Parameter(_))));
    }

    #[test]
    fn truncation_basics() {
        let sh = shape(&[6, 5]);
        let f = lcg_signal(&sh, 3);
        assert_eq!(region_truncate(&f, &Region::full(&sh)).unwrap(), f);
        let r = Region::from_rect(&sh, &[1, 1], &[2, 3]).unwrap();
        let once = region_truncate(&f, &r).unwrap();
        for (i, &v) in once.values().iter().enumerate() {
            if !r.mask()[i] {
                assert_eq!(v, 0.0);
            }
        }
        assert_eq!(region_truncate(&once, &r).unwrap(), once);
    }

    #[test]
    fn initial_estimate_cases() {
        let sh = shape(&[16, 16]);
        let s = SpectralSupport::lowpass(&sh, &[2, 2]).unwrap();
        let h = bandlimited(&sh, &s, 11);

        let full = MeasuredSignal::observe(
            WeightedRegionSet::new(vec![Region::full(&sh)], vec![1.0]).unwrap(),
            &h,
        )
        .unwrap();
        let f0 = initial_estimate(&full, &s).unwrap();
        assert!(f0.distance(&h) <= 1e-12 * h.norm());

        let zero = two_region_meas(&sh, &Signal::zeros(&sh), vec![0.5, 0.5]);
        assert_eq!(initial_estimate(&zero, &s).unwrap().norm(), 0.0);

        // Disjoint regions: the sum of projections equals the projection of
        // the stitched measurement.
        let meas = two_region_meas(&sh, &h, vec![0.5, 0.5]);
        let f0 = initial_estimate(&meas, &s).unwrap();
        let direct = bandlimit_project(meas.samples(), &s).unwrap();
        assert!(f0.distance(&direct) <= 1e-12 * direct.norm());
        assert!(bandlimit_project(&f0, &s).unwrap().distance(&f0) <= 1e-10 * f0.norm());
    }

    #[test]
    fn truth_is_a_fixed_point() {
        let sh = shape(&[16, 16]);
        let s = SpectralSupport::lowpass(&sh, &[2, 2]).unwrap();
        let h = bandlimited(&sh, &s, 5);
        for w in [vec![0.5, 0.5], vec![0.8, 0.2]] {
            let meas = two_region_meas(&sh, &h, w);
            let out = papoulis_step(&h, &meas, &s).unwrap();
            assert!(out.distance(&h) <= 1e-9 * h.norm());
        }
    }

    #[test]
    fn full_information_recovers_in_one_step() {
        let sh = shape(&[12, 10]);
        let s = SpectralSupport::lowpass(&sh, &[3, 2]).unwrap();
        let h = bandlimited(&sh, &s, 8);
        let meas = MeasuredSignal::observe(
            WeightedRegionSet::new(vec![Region::full(&sh)], vec![1.0]).unwrap(),
            &h,
        )
        .unwrap();
        let start = bandlimited(&sh, &s, 99);
        let out = papoulis_step(&start, &meas, &s).unwrap();
        assert!(out.distance(&h) <= 1e-12 * h.norm());
    }

    #[test]
    fn step_from_zero_is_initial_estimate() {
        let sh = shape(&[16, 16]);
        let s = SpectralSupport::lowpass(&sh, &[2, 2]).unwrap();
        let h = bandlimited(&sh, &s, 6);
        let meas = two_region_meas(&sh, &h, vec![0.3, 0.7]);
        let zero = Signal::zeros(&sh);
        let f0 = initial_estimate(&meas, &s).unwrap();
        // With f = 0 the step collapses to sum_m w_m P(chi_m h); for disjoint
        // regions that is the initial estimate with each term reweighted.
        let step = papoulis_step(&zero, &meas, &s).unwrap();
        let mut expected = Signal::zeros(&sh);
        for (region, w) in meas.regions().iter() {
            let t =
                bandlimit_project(&region_truncate(meas.samples(), region).unwrap(), &s).unwrap();
            expected = expected.add_scaled(w, &t);
        }
        assert!(step.distance(&expected) <= 1e-12 * expected.norm());

        // Uniform single-region weighting gives back f0 exactly.
        let single = MeasuredSignal::observe(
            WeightedRegionSet::new(
                vec![Region::from_rect(&sh, &[2, 2], &[6, 7]).unwrap()],
                vec![1.0],
            )
            .unwrap(),
            &h,
        )
        .unwrap();
        let f0_single = initial_estimate(&single, &s).unwrap();
        let step_single = papoulis_step(&zero, &single, &s).unwrap();
        assert!(step_single.distance(&f0_single) <= 1e-12 * f0_single.norm());
        assert!(f0.norm() > 0.0);
    }

    #[test]
    fn regularized_reduces_to_plain_step() {
        let sh = shape(&[16, 16]);
        let s = SpectralSupport::lowpass(&sh, &[2, 2]).unwrap();
        let h = bandlimited(&sh, &s, 21);
        let meas = two_region_meas(&sh, &h, vec![0.4, 0.6]);
        let f = bandlimited(&sh, &s, 22);
        let p = RegularizationParams::new(0.0, 1.0).unwrap();
        let a = regularized_step(&f, &meas, &s, &p).unwrap();
        let b = papoulis_step(&f, &meas, &s).unwrap();
        assert!(a.distance(&b) <= 1e-12 * b.norm());
    }

    #[test]
    fn regularized_step_from_zero_scales_initial_estimate() {
        let sh = shape(&[16, 16]);
        let s = SpectralSupport::lowpass(&sh, &[2, 2]).unwrap();
        let h = bandlimited(&sh, &s, 23);
        let region = Region::from_rect(&sh, &[3, 1], &[7, 9]).unwrap();
        let meas =
            MeasuredSignal::observe(WeightedRegionSet::new(vec![region], vec![1.0]).unwrap(), &h)
                .unwrap();
        let p = RegularizationParams::new(0.005, 1.99 / 1.01).unwrap();
        let out = regularized_step(&Signal::zeros(&sh), &meas, &s, &p).unwrap();
        let f0 = initial_estimate(&meas, &s).unwrap().scaled(p.tau());
        assert!(out.distance(&f0) <= 1e-12 * f0.norm());
    }

    #[test]
    fn params_domain() {
        let p = RegularizationParams::new(0.005, 1.99 / (1.0 + 2.0 * 0.005)).unwrap();
        assert!((p.tau() - 1.9703).abs() < 1e-4);
        assert!(RegularizationParams::new(0.005, 2.0 / 1.01).is_err());
        assert!(RegularizationParams::new(0.1, 0.0).is_err());
        assert!(RegularizationParams::new(-0.1, 1.0).is_err());
        assert!(!RegularizationParams::new(0.0, 1.0)
            .unwrap()
            .is_contraction());
    }

    #[test]
    fn non_bandlimited_input_is_contract_violation() {
        let sh = shape(&[16]);
        let s = SpectralSupport::lowpass(&sh, &[2]).unwrap();
        let h = bandlimited(&sh, &s, 1);
        let meas = MeasuredSignal::observe(
            WeightedRegionSet::new(vec![Region::from_rect(&sh, &[0], &[8]).unwrap()], vec![1.0])
                .unwrap(),
            &h,
        )
        .unwrap();
        let bad = h.add_scaled(0.1, &tone(&sh, 6));
        assert!(matches!(
            papoulis_step(&bad, &meas, &s),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn composite_cases() {
        let sh = shape(&[16]);
        let s = SpectralSupport::lowpass(&sh, &[2]).unwrap();
        let f = lcg_signal(&sh, 4);
        let full = composite_apply(&f, &Region::full(&sh), &s).unwrap();
        let p = bandlimit_project(&f, &s).unwrap();
        assert!(full.distance(&p) <= 1e-12 * p.norm());
        let r = Region::from_rect(&sh, &[3], &[5]).unwrap();
        assert!(composite_apply(&tone(&sh, 7), &r, &s).unwrap().norm() < 1e-12);
    }

    #[test]
    fn composite_quadratic_form_matches_dense_matrix() {
        // Dense P from the DFT definition on an 8-sample grid.
        let n = 8;
        let sh = shape(&[n]);
        let s = SpectralSupport::lowpass(&sh, &[1]).unwrap();
        let r = Region::from_rect(&sh, &[1], &[3]).unwrap();
        let mut p = vec![vec![0.0; n]; n];
        for (x, row) in p.iter_mut().enumerate() {
            for (y, v) in row.iter_mut().enumerate() {
                *v = [0i64, 1, -1]
                    .iter()
                    .map(|&k| {
                        (2.0 * std::f64::consts::PI * k as f64 * (x as f64 - y as f64) / n as f64)
                            .cos()
                    })
                    .sum::<f64>()
                    / n as f64;
            }
        }
        let chi: Vec<f64> = r
            .mask()
            .iter()
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect();
        for seed in 0..20 {
            let f = lcg_signal(&sh, seed);
            let pf: Vec<f64> = (0..n)
                .map(|x| (0..n).map(|y| p[x][y] * f.values()[y]).sum())
                .collect();
            let dense_form: f64 = (0..n).map(|x| chi[x] * pf[x] * pf[x]).sum();
            let qf = composite_apply(&f, &r, &s).unwrap();
            let form = qf.dot(&f);
            assert!((form - dense_form).abs() < 1e-12);
            assert!(form >= -1e-10 * f.norm_sq() && form <= f.norm_sq() * (1.0 + 1e-10));
        }
    }

    #[test]
    fn uniform_weights_relate_to_landweber() {
        let sh = shape(&[16, 16]);
        let s = SpectralSupport::lowpass(&sh, &[2, 2]).unwrap();
        let h = bandlimited(&sh, &s, 31);
        let meas = two_region_meas(&sh, &h, vec![0.5, 0.5]);
        for seed in 40..45 {
            let f = bandlimited(&sh, &s, seed);
            let weighted = papoulis_step(&f, &meas, &s).unwrap();
            let pli = landweber_step(&f, &meas, &s).unwrap();
            // M (Tf - f) = PLI f - f for disjoint regions and w = 1/M.
            let lhs = weighted.sub(&f).scaled(2.0);
            let rhs = pli.sub(&f);
            assert!(lhs.distance(&rhs) <= 1e-10 * rhs.norm().max(f.norm()));
        }
    }

    #[test]
    fn step_ignores_values_outside_union() {
        let sh = shape(&[16, 16]);
        let s = SpectralSupport::lowpass(&sh, &[2, 2]).unwrap();
        let h = bandlimited(&sh, &s, 50);
        let noise = lcg_signal(&sh, 51);
        let a = two_region_meas(&sh, &h, vec![0.5, 0.5]);
        let b = two_region_meas(&sh, &h.add_scaled(1.0, &noise), vec![0.5, 0.5]);
        let union = a.regions().union_mask();
        // Same samples on the union, differing elsewhere before masking.
        let h_b = Signal::new(
            sh.clone(),
            h.values()
                .iter()
                .zip(noise.values())
                .zip(&union)
                .map(|((&x, &e), &u)| if u { x } else { x + e })
                .collect(),
        )
        .unwrap();
        let b2 = MeasuredSignal::observe(a.regions().clone(), &h_b).unwrap();
        let f = bandlimited(&sh, &s, 52);
        assert_eq!(
            papoulis_step(&f, &a, &s).unwrap(),
            papoulis_step(&f, &b2, &s).unwrap()
        );
        assert_ne!(
            papoulis_step(&f, &a, &s).unwrap(),
            papoulis_step(&f, &b, &s).unwrap()
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn projection_is_idempotent_and_self_adjoint(seed_f in any::<u64>(), seed_g in any::<u64>(), hb in 0usize..4) {
            let sh = shape(&[12, 9]);
            let s = SpectralSupport::lowpass(&sh, &[hb, hb.min(3)]).unwrap();
            let f = lcg_signal(&sh, seed_f);
            let g = lcg_signal(&sh, seed_g);
            let pf = bandlimit_project(&f, &s).unwrap();
            let ppf = bandlimit_project(&pf, &s).unwrap();
            prop_assert!(ppf.distance(&pf) <= 1e-10 * f.norm());
            let pg = bandlimit_project(&g, &s).unwrap();
            prop_assert!((pf.dot(&g) - f.dot(&pg)).abs() <= 1e-10 * f.norm() * g.norm());
        }

        #[test]
        fn steps_are_deterministic(seed in any::<u64>()) {
            let sh = shape(&[16, 16]);
            let s = SpectralSupport::lowpass(&sh, &[2, 2]).unwrap();
            let h = bandlimited(&sh, &s, seed);
            let meas = two_region_meas(&sh, &h, vec![0.25, 0.75]);
            let f = bandlimited(&sh, &s, seed ^ 1);
            let a = papoulis_step(&f, &meas, &s).unwrap();
            let b = papoulis_step(&f, &meas, &s).unwrap();
            prop_assert_eq!(a.values(), b.values());
        }
    }
}

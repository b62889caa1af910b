//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use bandex::config::ModeConfig;
use bandex::engine::{least_squares_oracle, run_extrapolation, tikhonov_oracle, StopReason};
use bandex::operators::{bandlimit_project, composite_apply, papoulis_step, region_truncate};
use bandex::spectral::{
    eigen_spectrum, estimate_contraction, region_spectra, tau_upper_bound, EigenOptions,
};
use bandex::synthesis::{add_out_of_band_noise, band_energies, snr_in_out, SeededStream};
use bandex::{
    parse_config, random_bandlimited, Experiment, GridShape, MeasuredSignal, Mode, Region,
    RegularizationParams, RunConfig, Signal, SpectralSupport, SynthesisSpec, WeightedRegionSet,
};
use nalgebra::DMatrix;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn shape(dims: &[usize]) -> GridShape {
    GridShape::new(dims.to_vec()).unwrap()
}

fn lowpass(sh: &GridShape, hb: &[usize]) -> SpectralSupport {
    SpectralSupport::lowpass(sh, hb).unwrap()
}

fn white(sh: &GridShape, stream: &mut SeededStream) -> Signal {
    Signal::new(sh.clone(), (0..sh.len()).map(|_| stream.normal()).collect()).unwrap()
}

fn bandlimited(sh: &GridShape, s: &SpectralSupport, seed: u64, rms: f64) -> Signal {
    random_bandlimited(&SynthesisSpec::new(sh.clone(), s.clone(), seed, rms).unwrap()).unwrap()
}

fn rects(sh: &GridShape, boxes: &[(&[usize], &[usize])]) -> Vec<Region> {
    boxes
        .iter()
        .map(|(c, e)| Region::from_rect(sh, c, e).unwrap())
        .collect()
}

fn random_region(sh: &GridShape, stream: &mut SeededStream) -> Region {
    let mut corner = Vec::new();
    let mut extent = Vec::new();
    for &d in sh.dims() {
        let e = 1 + (stream.uniform() * (d as f64 * 0.6)) as usize;
        let c = (stream.uniform() * (d - e + 1) as f64) as usize;
        corner.push(c.min(d - e));
        extent.push(e);
    }
    Region::from_rect(sh, &corner, &extent).unwrap()
}

fn rel(a: &Signal, b: &Signal) -> f64 {
    a.distance(b) / b.norm()
}

fn operator_algebra() -> Outcome {
    let cases: [(&[usize], &[usize]); 5] = [
        (&[8], &[2]),
        (&[33], &[5]),
        (&[16, 12], &[3, 2]),
        (&[6, 5, 4], &[1, 1, 1]),
        (&[64, 64], &[4, 4]),
    ];
    let mut stream = SeededStream::new(101);
    let mut worst = 0.0f64;
    let mut checks = 0;
    for (dims, hb) in cases {
        let sh = shape(dims);
        let s = lowpass(&sh, hb);
        for _ in 0..5 {
            let f = white(&sh, &mut stream);
            let g = white(&sh, &mut stream);
            let d = random_region(&sh, &mut stream);
            let pf = bandlimit_project(&f, &s).unwrap();
            let pg = bandlimit_project(&g, &s).unwrap();
            let scale = f.norm() * g.norm();
            let mut record = |name: &str, err: f64| -> Result<(), String> {
                checks += 1;
                worst = worst.max(err);
                ensure(err <= 1e-10, || {
                    format!("{name} on {sh}: relative error {err:.3e}")
                })
            };
            record(
                "P idempotence",
                rel(&bandlimit_project(&pf, &s).unwrap(), &pf),
            )?;
            record(
                "P self-adjointness",
                (pf.dot(&g) - f.dot(&pg)).abs() / scale,
            )?;
            let cf = region_truncate(&f, &d).unwrap();
            let cg = region_truncate(&g, &d).unwrap();
            record(
                "chi idempotence",
                region_truncate(&cf, &d).unwrap().distance(&cf) / f.norm(),
            )?;
            record(
                "chi self-adjointness",
                (cf.dot(&g) - f.dot(&cg)).abs() / scale,
            )?;
            let qf = composite_apply(&pf, &d, &s).unwrap();
            let qg = composite_apply(&pg, &d, &s).unwrap();
            record(
                "PchiP self-adjointness",
                (qf.dot(&pg) - pf.dot(&qg)).abs() / scale,
            )?;
            let (inside, outside) = band_energies(&f, &s).unwrap();
            record(
                "Parseval split",
                ((inside + outside) - f.norm_sq()).abs() / f.norm_sq(),
            )?;
            record(
                "Parseval in-band",
                (inside - pf.norm_sq()).abs() / f.norm_sq(),
            )?;
        }
    }
    Ok(format!("{checks} checks, worst relative error {worst:.2e}"))
}

fn firm_nonexpansiveness() -> Outcome {
    let grids: [(&[usize], &[usize]); 4] = [
        (&[32], &[4]),
        (&[20, 18], &[3, 2]),
        (&[32, 32], &[4, 3]),
        (&[8, 8, 6], &[1, 2, 1]),
    ];
    let mut stream = SeededStream::new(202);
    let trials = 160;
    let mut worst_margin = f64::NEG_INFINITY;
    for trial in 0..trials {
        let (dims, hb) = grids[trial % grids.len()];
        let sh = shape(dims);
        let s = lowpass(&sh, hb);
        let m = 1 + (stream.uniform() * 4.0) as usize;
        let regions: Vec<Region> = (0..m).map(|_| random_region(&sh, &mut stream)).collect();
        let raw: Vec<f64> = (0..m).map(|_| 0.05 + stream.uniform()).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let set = WeightedRegionSet::new(regions, weights).map_err(|e| e.to_string())?;
        let truth = bandlimited(&sh, &s, 10_000 + trial as u64, 1.0);
        let meas = MeasuredSignal::observe(set, &truth).unwrap();
        let f = bandlimited(&sh, &s, 20_000 + trial as u64, 0.1 + 3.0 * stream.uniform());
        let g = bandlimited(&sh, &s, 30_000 + trial as u64, 0.1 + 3.0 * stream.uniform());
        let tf = papoulis_step(&f, &meas, &s).unwrap();
        let tg = papoulis_step(&g, &meas, &s).unwrap();
        let d = f.sub(&g);
        let td = tf.sub(&tg);
        let lhs = td.norm_sq();
        let rhs = d.dot(&td) + 1e-9 * d.norm_sq();
        worst_margin = worst_margin.max((lhs - d.dot(&td)) / d.norm_sq());
        ensure(lhs <= rhs, || {
            format!("trial {trial}: {lhs:.6e} > {rhs:.6e}")
        })?;
    }
    Ok(format!(
        "{trials} pairs, 0 violations, max (‖Td‖²-<d,Td>)/‖d‖² = {worst_margin:.2e}"
    ))
}

fn fixed_point() -> Outcome {
    let mut worst = 0.0f64;
    let cases: [(&[usize], &[usize]); 3] = [
        (&[48], &[6]),
        (&[32, 32], &[3, 3]),
        (&[10, 12, 8], &[2, 2, 1]),
    ];
    for (i, (dims, hb)) in cases.into_iter().enumerate() {
        let sh = shape(dims);
        let s = lowpass(&sh, hb);
        let h = bandlimited(&sh, &s, 300 + i as u64, 1.0);
        let mut stream = SeededStream::new(303 + i as u64);
        let regions: Vec<Region> = (0..3).map(|_| random_region(&sh, &mut stream)).collect();
        for weights in [vec![1.0 / 3.0; 3], vec![0.7, 0.2, 0.1]] {
            let set = WeightedRegionSet::new(regions.clone(), weights.clone()).unwrap();
            let meas = MeasuredSignal::observe(set, &h).unwrap();
            let err = rel(&papoulis_step(&h, &meas, &s).unwrap(), &h);
            worst = worst.max(err);
            ensure(err <= 1e-9, || {
                format!("{sh} weights {weights:?}: {err:.3e}")
            })?;
        }
    }
    Ok(format!(
        "uniform and non-uniform weights, worst relative deviation {worst:.2e}"
    ))
}

fn exact_recovery() -> Outcome {
    let cfg = parse_config(&fs::read_to_string(configs_dir().join("recovery.json")).unwrap())
        .map_err(|e| e.to_string())?;
    let exp = Experiment::build(&cfg).map_err(|e| e.to_string())?;
    ensure(exp.support.count() == 81, || {
        format!("support has {} bins", exp.support.count())
    })?;
    let oracle = least_squares_oracle(&exp.measured, &exp.support).map_err(|e| e.to_string())?;
    ensure(oracle.condition_number < 1e6, || {
        format!(
            "region set not certified: condition {:.3e}",
            oracle.condition_number
        )
    })?;
    let run = RunConfig::new(Mode::Unregularized, 200_000, 1e-13, 1).unwrap();
    let report = run_extrapolation(&exp.measured, &exp.support, &run, Some(&exp.clean))
        .map_err(|e| e.to_string())?;
    let trace: Vec<f64> = report.records.iter().map(|r| r.nmse_db.unwrap()).collect();
    let last = *trace.last().unwrap();
    ensure(last <= -40.0, || format!("final NMSE {last:.2} dB"))?;
    let gap = rel(&report.final_signal, &oracle.signal);
    ensure(gap <= 1e-6, || format!("oracle mismatch {gap:.3e}"))?;
    for (k, w) in trace.windows(2).enumerate() {
        ensure(w[1] <= w[0] + 1e-6, || {
            format!("NMSE rose at iteration {}: {} -> {}", k + 2, w[0], w[1])
        })?;
    }
    Ok(format!(
        "condition {:.1}, {} iterations, final NMSE {last:.1} dB, oracle gap {gap:.1e}, trace monotone",
        oracle.condition_number, report.iterations
    ))
}

fn tikhonov_equivalence() -> Outcome {
    let sh = shape(&[32, 32]);
    let s = lowpass(&sh, &[3, 3]);
    let configs: [Vec<(&[usize], &[usize])>; 3] = [
        vec![(&[0, 0], &[14, 14])],
        vec![(&[0, 0], &[12, 20]), (&[16, 8], &[14, 10])],
        vec![
            (&[2, 2], &[8, 8]),
            (&[2, 20], &[10, 10]),
            (&[18, 4], &[10, 8]),
            (&[20, 20], &[9, 11]),
        ],
    ];
    let clean = bandlimited(&sh, &s, 505, 1.0);
    let field = add_out_of_band_noise(&clean, &s, 10.0, 506).unwrap();
    let mut worst = 0.0f64;
    let mut most_iters = 0;
    for (ci, boxes) in configs.iter().enumerate() {
        let set = WeightedRegionSet::uniform(rects(&sh, boxes)).unwrap();
        let meas = MeasuredSignal::observe(set, &field).unwrap();
        for mu in [0.005, 0.05, 0.5] {
            let params = RegularizationParams::new(mu, 1.8 / (1.0 + 2.0 * mu)).unwrap();
            let run =
                RunConfig::new(Mode::Regularized(params), 1_000_000, 1e-12, 1_000_000).unwrap();
            let report = run_extrapolation(&meas, &s, &run, None).map_err(|e| e.to_string())?;
            ensure(report.stop_reason == StopReason::ResidualTol, || {
                format!("config {ci}, mu {mu}: residual tolerance not reached")
            })?;
            let oracle = tikhonov_oracle(&meas, &s, mu).unwrap();
            let gap = rel(&report.final_signal, &oracle.signal);
            worst = worst.max(gap);
            most_iters = most_iters.max(report.iterations);
            ensure(gap <= 1e-6, || {
                format!("config {ci}, mu {mu}: gap {gap:.3e}")
            })?;
        }
    }
    Ok(format!(
        "3 region sets x 3 mu, worst gap {worst:.2e}, up to {most_iters} iterations"
    ))
}

/// Dense `P chi_D P` assembled from the closed-form projection kernel.
fn dense_composite(sh: &GridShape, s: &SpectralSupport, d: &Region) -> DMatrix<f64> {
    let n = sh.len();
    let dims = sh.dims();
    let bins: Vec<Vec<usize>> = (0..n)
        .filter(|&k| s.contains(k))
        .map(|k| sh.unravel(k))
        .collect();
    let coords: Vec<Vec<usize>> = (0..n).map(|i| sh.unravel(i)).collect();
    let p = DMatrix::from_fn(n, n, |x, y| {
        bins.iter()
            .map(|k| {
                let phase: f64 = (0..dims.len())
                    .map(|a| {
                        k[a] as f64 * (coords[x][a] as f64 - coords[y][a] as f64) / dims[a] as f64
                    })
                    .sum();
                (2.0 * std::f64::consts::PI * phase).cos()
            })
            .sum::<f64>()
            / n as f64
    });
    let chi = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        d.mask().iter().map(|&b| if b { 1.0 } else { 0.0 }),
    ));
    &p * chi * &p
}

fn contraction_bounds() -> Outcome {
    // Eigenvalues against a dense decomposition, and the trace identity.
    let sh = shape(&[14, 12]);
    let s = lowpass(&sh, &[2, 2]);
    let d = Region::from_rect(&sh, &[2, 3], &[6, 5]).unwrap();
    let dim = s.count();
    let spec = eigen_spectrum(&d, &s, dim, 1e-11).map_err(|e| e.to_string())?;
    let mut dense: Vec<f64> = dense_composite(&sh, &s, &d)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    dense.sort_by(|a, b| b.total_cmp(a));
    let eig_gap = spec
        .raw_eigenvalues()
        .iter()
        .zip(&dense)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(eig_gap <= 1e-6, || {
        format!("dense eigenvalue mismatch {eig_gap:.3e}")
    })?;
    let trace: f64 = spec.raw_eigenvalues().iter().sum();
    let expected = (dim * d.count()) as f64 / sh.len() as f64;
    ensure((trace - expected).abs() <= 1e-8, || {
        format!("trace {trace} vs {expected}")
    })?;

    let mut checked = 0;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut check =
        |label: String, est: bandex::spectral::ContractionEstimate| -> Result<(), String> {
            checked += 1;
            worst_excess = worst_excess.max(est.measured - est.predicted);
            ensure(est.measured <= est.predicted + 1e-6, || {
                format!(
                    "{label}: measured {:.9} > predicted {:.9}",
                    est.measured, est.predicted
                )
            })
        };

    // One region: errors confined to the leading N + 1 eigenvectors.
    let sh = shape(&[32, 32]);
    let s = lowpass(&sh, &[3, 3]);
    let h = bandlimited(&sh, &s, 606, 1.0);
    let region = Region::from_rect(&sh, &[4, 6], &[14, 12]).unwrap();
    let single = MeasuredSignal::observe(
        WeightedRegionSet::uniform(vec![region.clone()]).unwrap(),
        &h,
    )
    .unwrap();
    let spectra = region_spectra(&[region], &s, 16, 1e-11, &EigenOptions::default())
        .map_err(|e| e.to_string())?;
    for n in [0, 3, 8, 15] {
        check(
            format!("single region, N = {n}"),
            estimate_contraction(&single, &s, &spectra, n, None, 40, 7)
                .map_err(|e| e.to_string())?,
        )?;
        let bound = tau_upper_bound(&spectra[0], n, 0.05).unwrap();
        for tau in [0.5 * bound, 0.9 * bound, bound.min(0.999 * 2.0 / 1.1)] {
            let params = RegularizationParams::new(0.05, tau).map_err(|e| e.to_string())?;
            check(
                format!("single region, N = {n}, tau = {tau:.4}"),
                estimate_contraction(&single, &s, &spectra, n, Some(&params), 40, 8)
                    .map_err(|e| e.to_string())?,
            )?;
        }
    }

    // Several regions: the truncation spans the whole subspace.
    let s = lowpass(&sh, &[1, 2]);
    let dim = s.count();
    let h = bandlimited(&sh, &s, 607, 1.0);
    let regions = rects(
        &sh,
        &[
            (&[0, 0], &[10, 10]),
            (&[12, 4], &[8, 16]),
            (&[22, 22], &[9, 9]),
        ],
    );
    let set = WeightedRegionSet::new(regions.clone(), vec![0.5, 0.3, 0.2]).unwrap();
    let multi = MeasuredSignal::observe(set, &h).unwrap();
    let spectra = region_spectra(&regions, &s, dim, 1e-11, &EigenOptions::default())
        .map_err(|e| e.to_string())?;
    let n = dim - 1;
    check(
        "three regions, unregularized".into(),
        estimate_contraction(&multi, &s, &spectra, n, None, 60, 9).map_err(|e| e.to_string())?,
    )?;
    let bound = spectra
        .iter()
        .map(|sp| tau_upper_bound(sp, n, 0.05).unwrap())
        .fold(f64::INFINITY, f64::min);
    for tau in [0.5 * bound, bound.min(0.999 * 2.0 / 1.1)] {
        let params = RegularizationParams::new(0.05, tau).map_err(|e| e.to_string())?;
        check(
            format!("three regions, tau = {tau:.4}"),
            estimate_contraction(&multi, &s, &spectra, n, Some(&params), 60, 10)
                .map_err(|e| e.to_string())?,
        )?;
    }
    Ok(format!(
        "dense gap {eig_gap:.1e}, trace error {:.1e}, {checked} bounds hold (max measured - predicted {worst_excess:.2e})",
        (trace - expected).abs()
    ))
}

fn stability() -> Outcome {
    let mut cfg = parse_config(&fs::read_to_string(configs_dir().join("stability.json")).unwrap())
        .map_err(|e| e.to_string())?;
    let (mu, tau) = (0.005, 1.99 / (1.0 + 2.0 * 0.005));
    ensure(cfg.mode == ModeConfig::Regularized { mu, tau }, || {
        format!("unexpected mode {:?}", cfg.mode)
    })?;
    ensure(cfg.regions.len() == 4, || "four regions expected".into())?;
    let exp = Experiment::build(&cfg).map_err(|e| e.to_string())?;
    let mask = exp.measured.regions().union_mask();
    ensure(
        mask.iter().filter(|&&b| b).count()
            == exp
                .measured
                .regions()
                .regions()
                .iter()
                .map(Region::count)
                .sum::<usize>(),
        || "regions overlap".into(),
    )?;
    ensure(
        exp.measured.regions().weights().iter().all(|&w| w == 0.25),
        || "weights must be 1/4".into(),
    )?;
    let snr = snr_in_out(&exp.field, &exp.support).unwrap();
    ensure((snr - 6.9).abs() <= 0.01, || {
        format!("out-of-band SNR {snr:.4} dB")
    })?;

    let nmse_at =
        |report: &bandex::IterationReport, k: usize| report.records[k - 1].nmse_db.unwrap();
    let regularized = run_extrapolation(&exp.measured, &exp.support, &exp.run, Some(&exp.field))
        .map_err(|e| e.to_string())?;
    let plateau: Vec<f64> = regularized.records[99..]
        .iter()
        .map(|r| r.nmse_db.unwrap())
        .collect();
    let hi = plateau.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = plateau.iter().copied().fold(f64::INFINITY, f64::min);
    ensure(hi - lo <= 0.5, || {
        format!(
            "regularized NMSE varies by {:.3} dB after iteration 100",
            hi - lo
        )
    })?;

    cfg.mode = ModeConfig::Unregularized;
    let exp = Experiment::build(&cfg).map_err(|e| e.to_string())?;
    let plain = run_extrapolation(&exp.measured, &exp.support, &exp.run, Some(&exp.field))
        .map_err(|e| e.to_string())?;
    let rise = nmse_at(&plain, 10_000) - nmse_at(&plain, 100);
    ensure(rise >= 10.0, || {
        format!("unregularized NMSE rose only {rise:.2} dB")
    })?;
    Ok(format!(
        "SNR {snr:.3} dB; unregularized {:.2} -> {:.2} dB (+{rise:.2}); regularized plateau {lo:.2}..{hi:.2} dB",
        nmse_at(&plain, 100),
        nmse_at(&plain, 10_000)
    ))
}

fn reproducibility() -> Outcome {
    let config = configs_dir().join("stability.json");
    let mut text = fs::read_to_string(&config).unwrap();
    text = text.replace("\"max_iters\": 10000", "\"max_iters\": 300");
    let tmp = tempfile::TempDir::new().unwrap();
    let cfg_path = tmp.path().join("cfg.json");
    fs::write(&cfg_path, text).unwrap();
    let line = configs_dir().join("line.json");
    let mut compared = 0;
    for (cfg, cmds) in [
        (&cfg_path, &["synth", "run"][..]),
        (&line, &["synth", "run", "eigen"][..]),
    ] {
        let outs: Vec<PathBuf> = (0..2).map(|i| tmp.path().join(format!("run{i}"))).collect();
        for out in &outs {
            for cmd in cmds {
                let args = [
                    "bandex",
                    "--quiet",
                    "--config",
                    cfg.to_str().unwrap(),
                    "--out",
                    out.to_str().unwrap(),
                    cmd,
                ];
                let code = bandex::cli::run_cli(args);
                ensure(code == 0, || format!("{cmd} exited with {code}"))?;
            }
        }
        let mut names: Vec<String> = fs::read_dir(&outs[0])
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .filter(|n| n.ends_with(".ndsig") || n.ends_with(".csv"))
            .collect();
        names.sort();
        ensure(names.iter().any(|n| n == "metrics.csv"), || {
            "metrics.csv missing".into()
        })?;
        for name in &names {
            let a = fs::read(outs[0].join(name)).unwrap();
            let b = fs::read(outs[1].join(name)).map_err(|e| format!("{name}: {e}"))?;
            ensure(a == b, || format!("{name} differs between runs"))?;
            compared += 1;
        }
        fs::remove_dir_all(&outs[0]).unwrap();
        fs::remove_dir_all(&outs[1]).unwrap();
    }
    Ok(format!(
        "{compared} NDSIG/CSV files byte-identical across two runs"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            "operator algebra",
            operator_algebra,
            Some(Duration::from_secs(10)),
        ),
        ("firm nonexpansiveness", firm_nonexpansiveness, None),
        ("fixed point", fixed_point, None),
        (
            "exact recovery",
            exact_recovery,
            Some(Duration::from_secs(60)),
        ),
        (
            "regularized fixed point = Tikhonov",
            tikhonov_equivalence,
            None,
        ),
        ("contraction bounds", contraction_bounds, None),
        ("stability", stability, Some(Duration::from_secs(120))),
        ("reproducibility", reproducibility, None),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(limit)) if elapsed > *limit => {
                Err(format!("took {elapsed:.1?}, limit {limit:?}"))
            }
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS  [{}] {name}: {detail} ({elapsed:.2?})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  [{}] {name}: {detail} ({elapsed:.2?})", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

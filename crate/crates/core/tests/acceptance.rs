//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use bunchlab::conjectures::{bridge_m2_to_m1, check_m1, check_m2, theorem1_b, verify_theorem1};
use bunchlab::distinguishability::{
    bunching_probability, default_grid, epsilon_scan, interpolation_gram, measured_delta_p,
    optimal_directions, perturbed_states, predicted_delta_p, InternalStateFamily, PerturbationSource,
    PerturbationSpec,
};
use bunchlab::interferometry::{
    clements_decompose, clements_reconstruct, drury_gram, drury_setup,
    extend_counterexample, h_matrix, Interferometer,
};
use bunchlab::io::write_matrix;
use bunchlab::matcore::hermitian_eig;
use bunchlab::oracle::fock_bunching_oracle;
use bunchlab::permanent::{f_matrix, minc_sum_expansion, permanent};
use bunchlab::{CVector, ComplexMatrix, GramMatrix};
use common::*;
use num_complex::Complex64;
use rand::Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn lib<T>(r: bunchlab::Result<T>) -> Result<T, String> {
    r.map_err(|e| format!("library error: {e}"))
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

/// A setup with a seeded random interferometer and a proper output subset.
/// Collecting every mode would give `H = I`, for which `P` does not depend
/// on the internal states at all.
fn random_setup(n: usize, m: usize, seed: u64) -> bunchlab::interferometry::BunchingSetup {
    let mut r = rng(seed ^ 0x5eed);
    let u = Interferometer::random(m, seed);
    let size = r.random_range(1..m);
    let mut subset: Vec<usize> = (0..m).collect();
    for i in 0..size {
        let j = r.random_range(i..m);
        subset.swap(i, j);
    }
    subset.truncate(size);
    h_matrix(&u, &subset, n).expect("valid setup")
}

fn drury_f_reference() -> (Dense, f64) {
    let a = to_dense(&drury_gram());
    let n = a.len();
    let f: Dense = (0..n)
        .map(|i| (0..n).map(|j| a[i][j] * perm(&minor(&a, i, j))).collect())
        .collect();
    (f, perm(&a).re)
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let verdict = lib(check_m2(&drury_gram()))?;
    let elapsed = start.elapsed();
    let (f, perm_a) = drury_f_reference();
    let reference = power_iteration(&f) / perm_a;
    ensure(within(verdict.ratio, 1.015, 1.019), format!("ratio {}", verdict.ratio))?;
    ensure(verdict.violated, "not flagged as violated".into())?;
    ensure(
        (verdict.ratio - reference).abs() < 1e-9,
        format!("ratio {} vs power iteration {reference}", verdict.ratio),
    )?;
    ensure(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!("ratio {:.6} (reference {reference:.6}), {elapsed:.2?}", verdict.ratio))
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let a = to_dense(&drury_gram());
    let alpha = 1.0 / power_iteration(&a);
    let scaled: Dense = a.iter().map(|r| r.iter().map(|z| z * alpha).collect()).collect();
    let reference = perm(&scaled).re;
    let d = lib(drury_setup(0))?;
    let p = lib(bunching_probability(&d.setup.h, &GramMatrix::ones(8)))?;
    let elapsed = start.elapsed();
    ensure(within(p, 1.314e-3, 1.340e-3), format!("P(0) = {p:e}"))?;
    ensure((p - reference).abs() < 1e-12, format!("P(0) {p:e} vs reference {reference:e}"))?;
    ensure((d.alpha - alpha).abs() < 1e-12 * alpha, format!("alpha {} vs {alpha}", d.alpha))?;
    ensure(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!("P(0) = {p:.6e} (reference {reference:.6e}), alpha {alpha:.6e}"))
}

fn drury_scan() -> Result<bunchlab::distinguishability::ScanResult, String> {
    let setup = lib(drury_setup(0))?.setup;
    let dirs = lib(optimal_directions(&setup.h))?;
    lib(epsilon_scan(&setup.h, &dirs.v_max, &GramMatrix::ones(8), &default_grid()))
}

fn criterion_3() -> Check {
    let start = Instant::now();
    let scan = drury_scan()?;
    let elapsed = start.elapsed();
    let peak = *scan.peak();

    // Recompute the peak from explicit polarization states |H⟩ + ε v_i |V⟩.
    let setup = lib(drury_setup(0))?.setup;
    let v = lib(optimal_directions(&setup.h))?.v_max;
    let states: Vec<Vec<Complex64>> = v
        .iter()
        .map(|vi| normalize(vec![c(1.0, 0.0), vi * peak.epsilon]))
        .collect();
    let reference = perm(&hadamard(&to_dense(&setup.h), &gram(&states))).re;

    ensure(within(peak.epsilon, 1.0, 1.4), format!("argmax {}", peak.epsilon))?;
    ensure(within(peak.ratio, 1.015, 1.025), format!("peak ratio {}", peak.ratio))?;
    ensure(within(peak.p_bunch, 1.339e-3, 1.367e-3), format!("peak P {:e}", peak.p_bunch))?;
    ensure(
        (peak.p_bunch - reference).abs() < 1e-12,
        format!("peak P {:e} vs explicit states {reference:e}", peak.p_bunch),
    )?;
    ensure(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!(
        "argmax eps {:.2}, peak ratio {:.5}, P {:.5e}, {} points in {elapsed:.2?}",
        peak.epsilon,
        peak.ratio,
        peak.p_bunch,
        scan.rows.len()
    ))
}

fn criterion_4() -> Check {
    let scan = drury_scan()?;
    ensure(scan.rows[0].epsilon == 0.0, "grid does not start at 0".into())?;
    ensure(
        scan.rows[0].indistinguishability == 1.0,
        format!("d(0) = {}", scan.rows[0].indistinguishability),
    )?;
    for w in scan.rows.windows(2) {
        ensure(
            w[1].indistinguishability < w[0].indistinguishability,
            format!("d not decreasing between eps {} and {}", w[0].epsilon, w[1].epsilon),
        )?;
    }
    let near = scan
        .rows
        .iter()
        .min_by(|a, b| (a.epsilon - 1.2).abs().total_cmp(&(b.epsilon - 1.2).abs()))
        .expect("non-empty");
    Ok(format!(
        "strictly decreasing over {} points; d({:.2}) = {:.4} (reference value 0.281, informational)",
        scan.rows.len(),
        near.epsilon,
        near.indistinguishability
    ))
}

fn criterion_5() -> Check {
    let mut worst: f64 = 0.0;
    let instances = 60;
    for seed in 0..instances {
        let n = 2 + (seed % 5) as usize;
        let m = n + 1 + (seed % 3) as usize;
        let setup = random_setup(n, m, 1000 + seed);
        let mut r = rng(2000 + seed);
        let d = n + 1;
        let phi0 = CVector::from_vec(unit_vector(d, &mut r));
        let etas: Vec<CVector> = (0..n).map(|_| CVector::from_vec(unit_vector(d, &mut r))).collect();
        let v = CVector::from_vec(unit_vector(n, &mut r));
        let p0 = lib(bunching_probability(&setup.h, &GramMatrix::ones(n)))?;
        let mut points = Vec::new();
        for eps in [1e-2, 1e-3, 1e-4] {
            let spec = lib(PerturbationSpec::new(
                eps,
                v.clone(),
                PerturbationSource::Vectors(etas.clone()),
                false,
            ))?;
            let states = lib(perturbed_states(&phi0, &spec))?;
            let p = lib(bunching_probability(&setup.h, &lib(states.gram())?))?;
            points.push((eps, (p - p0).abs() / eps));
        }
        let slope = loglog_slope(&points);
        worst = worst.max((slope - 1.0).abs());
        ensure(
            (slope - 1.0).abs() <= 0.1,
            format!("seed {seed}: slope {slope:.4}, points {points:?}"),
        )?;
    }
    Ok(format!("{instances} instances, worst |slope - 1| = {worst:.2e}"))
}

fn criterion_6() -> Check {
    let instances = 60;
    let mut worst: f64 = 0.0;
    for seed in 0..instances {
        let n = 2 + (seed % 5) as usize;
        let m = n + 2;
        let setup = random_setup(n, m, 3000 + seed);
        let mut r = rng(4000 + seed);
        // Reference state e_0; perturbations live in the complement.
        let d = n + 2;
        let etas: Vec<Vec<Complex64>> = (0..n)
            .map(|_| {
                let mut e = unit_vector(d - 1, &mut r);
                e.insert(0, c(0.0, 0.0));
                e
            })
            .collect();
        let v = unit_vector(n, &mut r);
        let eps = 1e-3;
        let states: Vec<Vec<Complex64>> = (0..n)
            .map(|i| {
                let mut s: Vec<Complex64> = etas[i].iter().map(|z| z * v[i] * eps).collect();
                s[0] += 1.0;
                normalize(s)
            })
            .collect();
        let h = to_dense(&setup.h);
        let p0 = perm(&h).re;
        let p = perm(&hadamard(&h, &gram(&states))).re;
        let fd = (p - p0) / (eps * eps);

        let delta = lib(GramMatrix::new(to_matrix(&gram(&etas))))?;
        let spec = lib(PerturbationSpec::orthogonal_gram(eps, CVector::from_vec(v), delta))?;
        let predicted = lib(predicted_delta_p(&setup.h, &spec))?;
        let rel = (fd - predicted).abs() / predicted.abs();
        worst = worst.max(rel);
        ensure(rel <= 1e-3, format!("seed {seed}: fd {fd:e} vs predicted {predicted:e}"))?;
    }
    Ok(format!("{instances} instances, worst relative error {worst:.2e}"))
}

fn criterion_7() -> Check {
    let setup = lib(drury_setup(0))?.setup;
    let dirs = lib(optimal_directions(&setup.h))?;
    let h = to_dense(&setup.h);
    let p0 = perm(&h).re;
    // Explicit (|H⟩ + ε v_i |V⟩) states and Richardson extrapolation.
    let coefficient = |v: &CVector| {
        let g = |eps: f64| {
            let states: Vec<Vec<Complex64>> =
                v.iter().map(|vi| normalize(vec![c(1.0, 0.0), vi * eps])).collect();
            (perm(&hadamard(&h, &gram(&states))).re - p0) / (eps * eps)
        };
        (100.0 * g(1e-3) - g(1e-2)) / 99.0
    };
    let up = coefficient(&dirs.v_max);
    let down = coefficient(&dirs.v_min);
    let ones = GramMatrix::ones(8);
    let up_lib = lib(measured_delta_p(&setup.h, &dirs.v_max, &ones, 1e-2))?;
    let down_lib = lib(measured_delta_p(&setup.h, &dirs.v_min, &ones, 1e-2))?;
    let want_up = dirs.lambda_max - dirs.perm_h;
    let want_down = dirs.lambda_min - dirs.perm_h;
    for (label, got, want) in [
        ("v_max", up, want_up),
        ("v_min", down, want_down),
        ("v_max (library)", up_lib, want_up),
        ("v_min (library)", down_lib, want_down),
    ] {
        ensure((got - want).abs() <= 1e-6, format!("{label}: {got:e} vs {want:e}"))?;
    }
    Ok(format!(
        "v_max {up:.6e} vs {want_up:.6e} (diff {:.1e}); v_min {down:.6e} vs {want_down:.6e} (diff {:.1e})",
        (up - want_up).abs(),
        (down - want_down).abs()
    ))
}

fn criterion_8() -> Check {
    let mut cases: Vec<(String, ComplexMatrix)> =
        vec![("drury".into(), lib(drury_setup(0))?.setup.h)];
    for seed in 0..20u64 {
        let mut r = rng(5000 + seed);
        let n = 2 + (seed % 6) as usize;
        let k = r.random_range(1..=n);
        cases.push((format!("random #{seed}"), to_matrix(&random_psd(n, k, &mut r))));
    }
    let mut margin = f64::INFINITY;
    for (label, h) in &cases {
        let n = h.rows();
        let dirs = lib(optimal_directions(h))?;
        let spec = lib(PerturbationSpec::orthogonal_gram(0.0, dirs.v_min.clone(), GramMatrix::ones(n)))?;
        let v_min_coeff = lib(predicted_delta_p(h, &spec))?;
        let f = lib(f_matrix(h))?;
        let trace: f64 = (0..n).map(|i| f.matrix[(i, i)].re).sum();
        let interp = trace / n as f64 - dirs.perm_h;

        // The interpolation model's coefficient, measured by finite differences.
        let hd = to_dense(h);
        let p0 = perm(&hd).re;
        let eps = 1e-3;
        let s = to_dense(lib(interpolation_gram(n, eps))?.matrix());
        let fd = (perm(&hadamard(&hd, &s)).re - p0) / (eps * eps);
        let scale = dirs.perm_h.abs().max(dirs.lambda_max.abs());
        ensure(
            (fd - interp).abs() <= 1e-4 * scale,
            format!("{label}: interpolation fd {fd:e} vs tr(F)/n - perm {interp:e}"),
        )?;
        ensure(
            v_min_coeff <= interp + 1e-12 * scale,
            format!("{label}: v_min {v_min_coeff:e} > interpolation {interp:e}"),
        )?;
        if *label == "drury" {
            margin = interp - v_min_coeff;
        }
    }
    Ok(format!("{} matrices; on Drury H the v_min coefficient is lower by {margin:.4e}", cases.len()))
}

fn criterion_9() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let instances = 120u64;
    for seed in 0..instances {
        let n = 1 + (seed % 3) as usize;
        let m = (n + 1 + (seed % 3) as usize).min(5);
        let (u, subset, states) = lib(bunchlab::cli::random_oracle_instance(n, m, seed))?;
        let oracle = lib(fock_bunching_oracle(&u, &subset, &states))?;
        let setup = lib(h_matrix(&u, &subset, n))?;
        let formula = lib(bunching_probability(&setup.h, &lib(states.gram())?))?;
        worst = worst.max((oracle - formula).abs());
    }
    ensure(worst <= 1e-10, format!("worst disagreement {worst:e}"))?;
    let bs = Interferometer::balanced_coupler();
    let one = CVector::from_element(1, c(1.0, 0.0));
    let same = lib(fock_bunching_oracle(&bs, &[0], &lib(InternalStateFamily::identical(one, 2))?))?;
    let diff = lib(fock_bunching_oracle(&bs, &[0], &InternalStateFamily::orthogonal(2)))?;
    ensure((same - 0.5).abs() <= 1e-10, format!("HOM identical {same}"))?;
    ensure((diff - 0.25).abs() <= 1e-10, format!("HOM orthogonal {diff}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), format!("took {elapsed:?}"))?;
    Ok(format!("{instances} instances, worst {worst:.1e}; HOM {same} and {diff}; {elapsed:.2?}"))
}

fn criterion_10() -> Check {
    let mut r = rng(6000);
    let mut worst: f64 = 0.0;
    for trial in 0..200 {
        let n = 1 + trial % 8;
        let a = random_dense(n, n, &mut r);
        let reference = perm(&a);
        let got = lib(permanent(&to_matrix(&a)))?;
        let rel = (got - reference).norm() / reference.norm();
        worst = worst.max(rel);
        ensure(rel <= 1e-10, format!("trial {trial} (n = {n}): relative error {rel:e}"))?;
    }
    let a = to_matrix(&random_dense(8, 8, &mut r));
    let mut times: Vec<Duration> = (0..101)
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(permanent(std::hint::black_box(&a)).expect("8x8"));
            t.elapsed()
        })
        .collect();
    times.sort();
    let median = times[50];
    ensure(median < Duration::from_millis(1), format!("8x8 median {median:?}"))?;
    let mut minc_worst: f64 = 0.0;
    for trial in 0..50 {
        let n = 1 + trial % 5;
        let a = random_dense(n, n, &mut r);
        let b = random_dense(n, n, &mut r);
        let sum: Dense = a.iter().zip(&b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect()).collect();
        let reference = perm(&sum);
        let got = lib(minc_sum_expansion(&to_matrix(&a), &to_matrix(&b)))?;
        let err = (got - reference).norm() / reference.norm().max(1.0);
        minc_worst = minc_worst.max(err);
        ensure(err <= 1e-9, format!("Minc trial {trial}: {got} vs {reference}"))?;
    }
    Ok(format!(
        "Ryser vs naive worst {worst:.1e}; 8x8 median {median:.2?}; Minc worst {minc_worst:.1e}"
    ))
}

fn criterion_11() -> Check {
    let a = drury_gram();
    let m2 = lib(check_m2(&a))?;
    let v = m2.witness_vector.clone().ok_or("no witness vector")?;
    let eps = [0.08, 0.04, 0.02, 0.01, 0.005];
    let report = lib(verify_theorem1(&a, &v, &eps))?;
    let slope = report.residual_slope.ok_or("no slope")?;
    ensure((slope - 4.0).abs() <= 0.3, format!("residual slope {slope}"))?;

    let bridge = lib(bridge_m2_to_m1(&a, &bunchlab::distinguishability::linear_grid(0.05, 1.0, 20)))?
        .ok_or("no M1 violation on (0, 1]")?;
    let direct = lib(check_m1(&a, &theorem1_b(&v, bridge.epsilon)))?;
    ensure(direct.violated, "check_m1 disagrees with the bridge".into())?;

    // The command line reports the same violation with exit code 10.
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("drury_A.json");
    lib(write_matrix(&path, &a))?;
    let status = Command::new(env!("CARGO_BIN_EXE_bunchlab"))
        .args(["check-m1", "--input"])
        .arg(&path)
        .args(["--epsilon", &bridge.epsilon.to_string()])
        .output()
        .map_err(|e| e.to_string())?
        .status;
    ensure(status.code() == Some(10), format!("check-m1 exit status {status}"))?;
    Ok(format!(
        "residual slope {slope:.3}; M1 broken at eps {:.2} with ratio {:.6}; CLI exit 10",
        bridge.epsilon, bridge.m1.ratio
    ))
}

fn criterion_12() -> Check {
    let mut r = rng(7000);
    let mut worst_sum: f64 = 0.0;
    let mut worst_eig: f64 = 0.0;
    for trial in 0..100 {
        let n = 2 + trial % 7;
        let k = r.random_range(1..=n);
        let h = random_psd(n, k, &mut r);
        let f = lib(f_matrix(&to_matrix(&h)))?;
        let p = perm(&h);
        for i in 0..n {
            let row: Complex64 = (0..n).map(|j| f.matrix[(i, j)]).sum();
            let col: Complex64 = (0..n).map(|j| f.matrix[(j, i)]).sum();
            let err = (row - p).norm().max((col - p).norm()) / p.norm();
            worst_sum = worst_sum.max(err);
            ensure(err <= 1e-9, format!("trial {trial}: F sums off by {err:e}"))?;
        }
        let eig = lib(hermitian_eig(&f.matrix))?;
        let rel = eig.min() / eig.max();
        worst_eig = worst_eig.min(rel);
        ensure(rel >= -1e-10, format!("trial {trial}: min eigenvalue ratio {rel:e}"))?;
    }

    let mut worst_mesh: f64 = 0.0;
    for trial in 0..20u64 {
        let m = 1 + (trial % 10) as usize;
        let u = Interferometer::random(m, 8000 + trial);
        let back = lib(clements_reconstruct(&lib(clements_decompose(&u))?))?;
        let err = back.unitary().max_abs_diff(u.unitary());
        worst_mesh = worst_mesh.max(err);
        ensure(err <= 1e-9, format!("m = {m}: round trip {err:e}"))?;
    }

    let mut worst_ext: f64 = 0.0;
    for case in 0..10u64 {
        let base = if case < 5 {
            lib(drury_setup(case))?.setup
        } else {
            random_setup(3, 5, 9000 + case)
        };
        let m2 = base.subset.len() + (case % 4) as usize;
        let second = Interferometer::random(m2, 9100 + case);
        let big = lib(extend_counterexample(&base, &second, 0))?;
        let err = big.h.max_abs_diff(&base.h);
        worst_ext = worst_ext.max(err);
        ensure(err <= 1e-10, format!("case {case}: H changed by {err:e}"))?;
    }
    Ok(format!(
        "F sums worst {worst_sum:.1e}, min eig ratio {worst_eig:.1e}; mesh worst {worst_mesh:.1e}; extension worst {worst_ext:.1e}"
    ))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("1 Drury eigenvalue ratio", criterion_1),
        ("2 baseline bunching probability", criterion_2),
        ("3 enhancement scan", criterion_3),
        ("4 monotone indistinguishability", criterion_4),
        ("5 first-order stability", criterion_5),
        ("6 second-order coefficient", criterion_6),
        ("7 bound saturation", criterion_7),
        ("8 minimization comparison", criterion_8),
        ("9 oracle equivalence", criterion_9),
        ("10 permanent engine", criterion_10),
        ("11 eigenvalue-to-Hadamard bridge", criterion_11),
        ("12 structural invariants", criterion_12),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

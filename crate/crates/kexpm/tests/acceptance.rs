//! Acceptance suite: one PASS/FAIL line per criterion.

use std::fs;
use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use kexpm::mtx::{read_matrix_market, write_matrix_market};
use kexpm::run::{self, run_history, ExampleRun, RunConfig};
use kexpm::exit;
use kexpm_core::bounds::{apriori_skew, hochbruck_lubich_skew, simplified_q_skew, threshold_q_m0, ConvergenceRecord};
use kexpm_core::conformal::{build_conformal, level_curve, modulus_ratio, psi_minus_r, solve_modulus, SpectralBox};
use kexpm_core::dense::{dense_expm, hermitian_eigenvalues, hermitian_part, two_norm};
use kexpm_core::elliptic::{complete_elliptic, jacobi_epsilon, jacobi_scd};
use kexpm_core::krylov::{arnoldi, krylov_approx, lanczos, Propagation};
use kexpm_core::operator::{apply_new, LinearOperator, SparseMatrix, Structure};
use kexpm_core::problems::*;
use kexpm_core::{Error, C64};

type Outcome = Result<String, String>;
type Histories = [(String, Vec<ConvergenceRecord>)];

// Defining integrals of K(1/2) and E(1/2) by 30-digit quadrature.
const K_HALF: f64 = 1.854_074_677_301_371_9;
const E_HALF: f64 = 1.350_643_881_047_675_5;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn elliptic_suite() -> Outcome {
    let p = complete_elliptic(0.5).map_err(|e| e.to_string())?;
    check((p.k - K_HALF).abs() <= 1e-12 && (p.e - E_HALF).abs() <= 1e-12, format!("K={} E={}", p.k, p.e))?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut evaluated = 0;
    while evaluated < 500 {
        let m: f64 = rng.random_range(0.01..0.99);
        let k = complete_elliptic(m).unwrap().k;
        let kp = complete_elliptic(1.0 - m).unwrap().k;
        let u = C64::new(rng.random_range(-1.0..1.0) * k, rng.random_range(-0.95..0.95) * kp);
        match jacobi_scd(u, m) {
            Ok(t) => {
                let scale = 1.0 + t.sn.norm_sqr();
                let a = (t.sn * t.sn + t.cn * t.cn - 1.0).norm() / scale;
                let b = (t.sn * t.sn * m + t.dn * t.dn - 1.0).norm() / scale;
                worst = worst.max(a).max(b);
                evaluated += 1;
            }
            Err(Error::PoleProximity { .. }) => {}
            Err(e) => return Err(e.to_string()),
        }
    }
    check(worst <= 1e-12, format!("identity residual {worst:e}"))?;

    let mut worst_d: f64 = 0.0;
    for m in [0.05, 0.3, 0.5, 0.8, 0.95] {
        let h = 1e-6;
        let (lo, hi, p) = (complete_elliptic(m - h).unwrap(), complete_elliptic(m + h).unwrap(), complete_elliptic(m).unwrap());
        let dk = (hi.k - lo.k) / (2.0 * h);
        let de = (hi.e - lo.e) / (2.0 * h);
        worst_d = worst_d.max(((p.dk_dm() - dk) / dk).abs()).max(((p.de_dm() - de) / de).abs());
    }
    check(worst_d <= 1e-6, format!("derivative rel. error {worst_d:e}"))?;

    let mut worst_q: f64 = 0.0;
    for m in [0.1, 0.5, 0.9] {
        let kp = complete_elliptic(1.0 - m).unwrap();
        let expect = C64::new(0.0, 2.0 * (kp.k - kp.e));
        for x in [0.2, 0.7, -0.4] {
            let u = C64::new(x, 0.1);
            let gap = jacobi_epsilon(u + C64::new(0.0, 2.0 * kp.k), m).unwrap() - jacobi_epsilon(u, m).unwrap();
            worst_q = worst_q.max((gap - expect).norm());
        }
    }
    check(worst_q <= 1e-10, format!("quasi-period error {worst_q:e}"))?;
    Ok(format!("identities {worst:.1e}, derivatives {worst_d:.1e}, quasi-period {worst_q:.1e}"))
}

fn modulus_solver() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let rho = 10f64.powf(-3.0 + 6.0 * i as f64 / 49.0);
        let m = solve_modulus(rho).map_err(|e| e.to_string())?;
        worst = worst.max((modulus_ratio(m).unwrap() - rho).abs() / rho);
    }
    check(worst <= 1e-12, format!("round trip rel. error {worst:e}"))?;
    let half = solve_modulus(1.0).unwrap();
    check((half - 0.5).abs() <= 1e-13, format!("solve_modulus(1) = {half}"))?;
    let mut worst_ex2: f64 = 0.0;
    for m in [0.01, 0.1, 0.9, 0.99] {
        let bx = example2_box(m).unwrap();
        worst_ex2 = worst_ex2.max((solve_modulus(bx.c / bx.half_width()).unwrap() - m).abs());
    }
    check(worst_ex2 <= 1e-12, format!("Example 2 round trip error {worst_ex2:e}"))?;
    Ok(format!("g round trip {worst:.1e}, Example 2 {worst_ex2:.1e}"))
}

fn conformal_geometry() -> Outcome {
    let mut worst_left: f64 = 0.0;
    let mut worst_odd: f64 = 0.0;
    let mut worst_far: f64 = 0.0;
    for m in [0.1, 0.5, 0.9] {
        let bx = SpectralBox::new(0.5, 2.5, modulus_ratio(m).unwrap()).unwrap();
        let cp = build_conformal(&bx).map_err(|e| e.to_string())?;
        for r in [1.2, 2.0, 4.0] {
            let pts = level_curve(&cp, &bx, r, 256).map_err(|e| e.to_string())?;
            let (imin, zmin) = pts.iter().enumerate().min_by(|a, b| a.1.re.total_cmp(&b.1.re)).unwrap();
            check(imin.abs_diff(128) <= 1, format!("m={m} r={r}: minimum at index {imin}"))?;
            worst_left = worst_left.max((zmin.re - psi_minus_r(&cp, &bx, r).unwrap()).abs());
            let c = bx.center();
            for j in 0..128 {
                let (z, w) = (pts[j] - c, pts[j + 128] - c);
                worst_odd = worst_odd.max((z + w).norm());
            }
        }
        for r in [1e2, 1e3, 1e4] {
            let pts = level_curve(&cp, &bx, r, 16).map_err(|e| e.to_string())?;
            for (j, z) in pts.iter().enumerate() {
                let u = C64::from_polar(r, std::f64::consts::TAU * j as f64 / 16.0);
                let dev = ((z - bx.center()) * (2.0 * cp.lambda) / u - 1.0).norm();
                check(dev <= 10.0 / r, format!("m={m} |u|={r}: normalization deviation {dev:e}"))?;
                worst_far = worst_far.max(dev * r);
            }
        }
    }
    check(worst_left <= 1e-6, format!("leftmost point error {worst_left:e}"))?;
    check(worst_odd <= 1e-6, format!("odd symmetry error {worst_odd:e}"))?;
    Ok(format!("leftmost {worst_left:.1e}, odd symmetry {worst_odd:.1e}, max |u|*deviation {worst_far:.1e}"))
}

/// Convergence histories for every run of the four experiments.
fn all_histories() -> Result<Vec<(String, Vec<ConvergenceRecord>)>, String> {
    let mut runs: Vec<ExampleRun> = Vec::new();
    for id in 1..=4 {
        let mut cfg = RunConfig::new(run::Command::Example);
        cfg.example_id = Some(id);
        runs.extend(run::example_runs(&cfg).map_err(|e| e.to_string())?);
    }
    let cfg = RunConfig::new(run::Command::Example);
    runs.par_iter()
        .map(|r| run_history(r, &cfg).map(|h| (r.name.clone(), h)).map_err(|e| format!("{}: {e}", r.name)))
        .collect()
}

fn bound_validity(histories: &Histories) -> Outcome {
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (name, rows) in histories {
        for r in rows {
            let err = r.err_true.unwrap_or(0.0);
            if err < 1e-12 {
                continue;
            }
            checked += 1;
            worst = worst.max(err / r.bnd_prior);
            if r.bnd_prior < err * (1.0 - 1e-8) {
                failures.push(format!("{name} k={} err={:.3e} bound={:.3e}", r.k, err, r.bnd_prior));
            }
        }
    }
    check(failures.is_empty(), format!("{} violations, first: {}", failures.len(), failures.first().cloned().unwrap_or_default()))?;
    Ok(format!("{} runs, {checked} points, max error/bound {worst:.2e}", histories.len()))
}

fn stagnation_onset(histories: &Histories) -> Outcome {
    let n = 1000.0;
    let rho_exact = (1.0 - 1.0 / n) / 4.0;
    for (tau, onset) in [(2.0, 1usize), (10.0, 5), (20.0, 10), (50.0, 25)] {
        let tr = tau * 0.25;
        for k in 1..=onset {
            check(simplified_q_skew(tr, k) == 1.0, format!("tau={tau}: q({k}) != 1"))?;
        }
        let next = simplified_q_skew(tr, onset + 1);
        check(next < 1.0, format!("tau={tau}: q({}) = {next}", onset + 1))?;
        check((2.0 * tau * rho_exact).ceil() as usize == onset, format!("tau={tau}: rounding of 2 tau rho"))?;
    }
    let mut measured = Vec::new();
    for tau in [20.0, 50.0] {
        let name = format!("example4_tau{tau}");
        let rows = &histories.iter().find(|(n, _)| *n == name).ok_or("missing Example 4 run")?.1;
        let k = rows.iter().find(|r| r.err_true.is_some_and(|e| e < 0.1)).map(|r| r.k).ok_or("error never below 0.1")?;
        let predicted = 2.0 * tau * rho_exact;
        check((k as f64 - predicted).abs() <= 5.0, format!("tau={tau}: onset {k}, predicted {predicted:.2}"))?;
        measured.push(format!("tau={tau}: k={k} vs {predicted:.2}"));
    }
    Ok(format!("onsets 1,5,10,25; measured {}", measured.join(", ")))
}

fn hochbruck_lubich_implication() -> Outcome {
    let rho = 0.25;
    let mut worst = f64::NEG_INFINITY;
    for tr in [1.0f64, 5.0, 12.5] {
        let tau = tr / rho;
        for k in ((2.0 * tr).ceil() as usize)..=200 {
            let ours = apriori_skew(rho, tau, k, tr / k as f64).map_err(|e| e.to_string())?;
            let hl = hochbruck_lubich_skew(tr, k).ok_or(format!("tau rho={tr} k={k}: reference undefined"))?;
            check(ours.ln <= hl.ln + 1e-12f64.ln_1p(), format!("tau rho={tr} k={k}: {} > {}", ours.ln, hl.ln))?;
            worst = worst.max(ours.ln - hl.ln);
        }
    }
    Ok(format!("max ln(ours/reference) = {worst:.3}"))
}

fn corollary_rate() -> Outcome {
    let limit = 9.0 / 11.0;
    let q6 = threshold_q_m0(100.0, 1e-6).map_err(|e| e.to_string())?;
    let q10 = threshold_q_m0(100.0, 1e-10).map_err(|e| e.to_string())?;
    check((q6 - limit).abs() <= 0.01, format!("m=1e-6: q0={q6}"))?;
    check((q10 - limit).abs() < 1e-3, format!("m=1e-10: q0={q10}"))?;
    Ok(format!("gap {:.2e} at m=1e-6, {:.2e} at m=1e-10", (q6 - limit).abs(), (q10 - limit).abs()))
}

fn estimator_sharpness(histories: &Histories) -> Outcome {
    let mut parts = Vec::new();
    for name in ["example3_tau2", "example4_tau2"] {
        let rows = &histories.iter().find(|(n, _)| n == name).ok_or(format!("missing {name}"))?.1;
        let (mut lo, mut hi, mut count) = (f64::INFINITY, 0.0f64, 0);
        for r in rows {
            let err = r.err_true.unwrap_or(0.0);
            if (1e-10..=1e-1).contains(&err) {
                let ratio = r.est_post / err;
                lo = lo.min(ratio);
                hi = hi.max(ratio);
                count += 1;
            }
        }
        check(count > 0, format!("{name}: no points in the convergence regime"))?;
        check(lo >= 0.1 && hi <= 100.0, format!("{name}: ratio in [{lo:.3}, {hi:.3}]"))?;
        parts.push(format!("{name} [{lo:.3}, {hi:.3}] over {count} steps"));
    }
    Ok(parts.join("; "))
}

fn random_dense(n: usize, seed: u64) -> DMatrix<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn krylov_exactness() -> Outcome {
    let n = 30;
    let a = random_dense(n, 5);
    let t: Vec<_> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (i, j, a[(i, j)])).collect();
    let op = SparseMatrix::from_triplets(n, &t).unwrap();
    let v = random_unit_vector(n, 9);
    let dec = arnoldi(&op, &v, n).map_err(|e| e.to_string())?;
    let mut worst_full: f64 = 0.0;
    for tau in [0.5, 2.0] {
        let w = krylov_approx(&dec.full().unwrap(), tau, Propagation::Decay).unwrap();
        let exact = dense_expm(&(&a * C64::new(-tau, 0.0))).unwrap() * DVector::from_column_slice(&v);
        worst_full = worst_full.max(distance(&w, exact.as_slice()));
    }
    check(worst_full <= 1e-10, format!("full-dimension error {worst_full:e}"))?;

    let d: Vec<C64> = (0..300).map(|j| C64::new((j as f64).sin() * 3.0, 0.0)).collect();
    let herm = SparseMatrix::diagonal(&d).with_structure(Structure::Hermitian);
    let dec = lanczos(&herm, &random_unit_vector(300, 4), 40).unwrap();
    let mut worst_unit: f64 = 0.0;
    for k in 1..=40 {
        let w = krylov_approx(&dec.view(k).unwrap(), 7.0, Propagation::Unitary).unwrap();
        worst_unit = worst_unit.max((w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt() - 1.0).abs());
    }
    check(worst_unit <= 1e-10, format!("unitary norm drift {worst_unit:e}"))?;

    let mut worst_ratio: f64 = 0.0;
    for trial in 0..50u64 {
        let mut a = random_dense(20, 100 + trial);
        let nu0 = hermitian_eigenvalues(&hermitian_part(&a))[0];
        let shift = if nu0 <= 0.0 { 0.1 - nu0 } else { 0.0 };
        for i in 0..20 {
            a[(i, i)] += C64::new(shift, 0.0);
        }
        let nu = hermitian_eigenvalues(&hermitian_part(&a))[0];
        check(nu > 0.0, format!("trial {trial} not positive definite"))?;
        for t in [0.1, 1.0, 5.0] {
            let ratio = two_norm(&dense_expm(&(&a * C64::new(-t, 0.0))).unwrap()) / (-t * nu).exp();
            worst_ratio = worst_ratio.max(ratio);
        }
    }
    check(worst_ratio <= 1.0 + 1e-10, format!("log-norm ratio {worst_ratio}"))?;
    Ok(format!("full {worst_full:.1e}, unitary {worst_unit:.1e}, max ||e^-tA||/e^-t nu {worst_ratio:.6}"))
}

fn example3_construction() -> Outcome {
    let p = example3(DEFAULT_SEED).map_err(|e| e.to_string())?;
    let norm = two_norm(&p.operator.to_dense());
    let nu = hermitian_eigenvalues(&hermitian_part(&p.operator.to_dense()))[0];
    check((7.5..=8.0).contains(&norm), format!("||A|| = {norm}"))?;
    check(nu > 0.0, format!("nu(A) = {nu}"))?;
    Ok(format!("||A||_2 = {norm:.4}, nu(A) = {nu:.4e}"))
}

fn cli_contracts() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_kexpm");
    let run = |args: &[&str]| Command::new(bin).args(args).env_remove("KEXPM_OUT").output().map_err(|e| e.to_string());

    let mut outputs = Vec::new();
    for sub in ["a", "b"] {
        let dir = tmp.path().join(sub);
        let out = run(&["example", "--example", "3", "--tau", "2", "--max-k", "40", "--seed", "11", "--out", dir.to_str().unwrap()])?;
        check(out.status.code() == Some(exit::SUCCESS), format!("example run exit {:?}", out.status.code()))?;
        outputs.push(fs::read(dir.join("example3_tau2.csv")).map_err(|e| e.to_string())?);
    }
    check(outputs[0] == outputs[1], "CSV differs between identical runs")?;

    let mut worst: f64 = 0.0;
    for m in [example3(1).unwrap().operator, example1(1).unwrap().operator, example4(1).unwrap().operator] {
        let mut buf = Vec::new();
        write_matrix_market(&m, &mut buf).map_err(|e| e.to_string())?;
        let back = read_matrix_market(buf.as_slice()).map_err(|e| e.to_string())?;
        for seed in 0..4 {
            let x = random_unit_vector(m.dim(), seed);
            worst = worst.max(distance(&apply_new(&m, &x), &apply_new(&back, &x)) / m.norm_estimate());
        }
    }
    check(worst <= 1e-15, format!("Matrix Market matvec gap {worst:e}"))?;

    let bad = tmp.path().join("bad.mtx");
    fs::write(&bad, "%%MatrixMarket matrix coordinate real general extra\n1 1 1\n1 1 1\n").unwrap();
    let out = run(&["expmv", "--matrix", bad.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()])?;
    check(out.status.code() == Some(exit::INPUT), format!("malformed header exit {:?}", out.status.code()))?;
    check(String::from_utf8_lossy(&out.stderr).contains("line 1"), "header error does not name line 1")?;
    let cd = tmp.path().join("cd.mtx");
    write_matrix_market(&example3(1).unwrap().operator, fs::File::create(&cd).unwrap()).unwrap();
    let out = run(&["expmv", "--matrix", cd.to_str().unwrap(), "--tau", "10", "--max-k", "2", "--out", tmp.path().to_str().unwrap()])?;
    check(out.status.code() == Some(exit::NONCONVERGENCE), format!("nonconvergence exit {:?}", out.status.code()))?;
    let out = run(&["expmv", "--matrix", cd.to_str().unwrap(), "--tau", "1", "--out", tmp.path().to_str().unwrap()])?;
    check(out.status.code() == Some(exit::SUCCESS), format!("success exit {:?}", out.status.code()))?;
    Ok(format!("rerun identical, matvec gap {worst:.1e}, exit codes 0/2/3"))
}

fn main() {
    let started = Instant::now();
    let histories = all_histories();
    let with_histories = |f: fn(&Histories) -> Outcome| match &histories {
        Ok(h) => f(h),
        Err(e) => Err(e.clone()),
    };
    let results: Vec<(&str, Outcome)> = vec![
        ("elliptic suite", elliptic_suite()),
        ("modulus solver", modulus_solver()),
        ("conformal geometry", conformal_geometry()),
        ("a priori bound validity", with_histories(bound_validity)),
        ("Example 4 stagnation onset", with_histories(stagnation_onset)),
        ("Hochbruck-Lubich implication", hochbruck_lubich_implication()),
        ("threshold rate as m -> 0", corollary_rate()),
        ("estimator sharpness", with_histories(estimator_sharpness)),
        ("Krylov exactness and conservation", krylov_exactness()),
        ("Example 3 construction", example3_construction()),
        ("CLI contracts", cli_contracts()),
    ];
    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed in {:.1}s", results.len() - failed, started.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Acceptance suite. Every criterion prints one `PASS`/`FAIL` line and the
//! test fails when its criterion does.

use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wulff_core::anisotropy::AnisotropyModel;
use wulff_core::curvalg::{
    b_coeff, discriminant_p, elementary_symmetric, maclaurin_check, newton_eps, newton_recurrence, normalized_means, sigma_charpoly,
    sigma_eps, trace_checks, CurvaturePoint,
};
use wulff_core::functionals::{first_variation_table, minkowski_residual_with, CurvatureField};
use wulff_core::geometry::{BuildOptions, SampledImmersion, VariationFamily};
use wulff_core::parallel::with_workers;
use wulff_core::stability::{
    closed_form_residuals, jacobi_qform_fd, jacobi_qform_operator, theorem_pipeline, StabilityProblem, StabilityReport, Tolerances, Verdict,
};

// Criteria run one at a time so their wall-clock bounds mean something.
static SERIAL: Mutex<()> = Mutex::new(());

// Residuals below this are roundoff at both resolutions; no ratio is taken.
const NOISE_FLOOR: f64 = 1e-12;

/// Not subject to the harness's output capture.
fn say(line: String) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

fn verdict(id: u32, title: &str, started: Instant, limit: Duration, ok: bool, detail: String) {
    let elapsed = started.elapsed();
    let in_time = elapsed <= limit;
    let tag = if ok && in_time { "PASS" } else { "FAIL" };
    say(format!("{tag} criterion {id:>2} {title}: {detail}; {:.1} s of {} s", elapsed.as_secs_f64(), limit.as_secs()));
    assert!(ok, "criterion {id} ({title}) failed: {detail}");
    assert!(in_time, "criterion {id} ({title}) took {elapsed:?}, limit {limit:?}");
}

fn quadric(m: usize) -> AnisotropyModel {
    let mut d = vec![1.0; m];
    d[0] = 4.0;
    AnisotropyModel::quadric(DMatrix::from_diagonal(&DVector::from_vec(d))).unwrap()
}

fn models(m: usize) -> Vec<(&'static str, AnisotropyModel)> {
    vec![("isotropic", AnisotropyModel::isotropic(m).unwrap()), ("quadric", quadric(m)), ("pnorm-4", AnisotropyModel::pnorm(4, m).unwrap())]
}

fn ellipsoid_axes(m: usize) -> Vec<f64> {
    let mut a = vec![1.0; m];
    a[0] = 1.3;
    a[m - 1] = 0.8;
    a
}

fn square_norm(imm: &SampledImmersion, f: &[f64]) -> f64 {
    imm.integrate(&f.iter().map(|v| v * v).collect::<Vec<_>>()).unwrap()
}

/// Degree ≤ 2 polynomial in the unit normal with random coefficients.
fn low_harmonic(imm: &SampledImmersion, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let m = imm.ambient_dim();
    let lin: Vec<f64> = (0..=m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let quad: Vec<f64> = (0..m * m).map(|_| rng.gen_range(-0.5..0.5)).collect();
    imm.nodes()
        .iter()
        .map(|g| {
            let p = &g.normal;
            let mut v = lin[m];
            for i in 0..m {
                v += lin[i] * p[i];
                for j in 0..m {
                    v += quad[i * m + j] * p[i] * p[j];
                }
            }
            v
        })
        .collect()
}

fn mean_zero(imm: &SampledImmersion, f: Vec<f64>) -> Vec<f64> {
    let mean = imm.integrate(&f).unwrap() / imm.area();
    f.into_iter().map(|v| v - mean).collect()
}

#[test]
fn criterion_01_convention_calibration() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t0 = Instant::now();
    let (mut h_err, mut mink, mut fv_gap, mut vol_gap) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for n in [2usize, 3] {
        let iso = AnisotropyModel::isotropic(n + 1).unwrap();
        let res = if n == 2 { 32 } else { 16 };
        for rho in [0.5, 1.0, 2.0] {
            let s = SampledImmersion::sphere(n, rho, BuildOptions::new(res)).unwrap();
            let field = CurvatureField::compute(&s, &iso).unwrap();
            for r in 0..=n {
                let expect = rho.powi(-(r as i32));
                for h in field.h(r) {
                    h_err = h_err.max((h - expect).abs());
                }
            }
            let speed: Vec<f64> = s.nodes().iter().map(|g| 1.0 + 0.4 * g.normal[0] - 0.3 * g.normal[1] * g.normal[n]).collect();
            let family = VariationFamily::new(s.clone(), speed).unwrap();
            let table = first_variation_table(&family, &[&iso]).unwrap();
            for r in 0..n {
                mink = mink.max(minkowski_residual_with(&s, &field, r).unwrap().abs());
                fv_gap = fv_gap.max(table.area[0][r].gap);
            }
            vol_gap = vol_gap.max(table.volume.gap);
        }
    }
    let ok = h_err <= 1e-6 && mink <= 1e-8 && fv_gap <= 1e-5 && vol_gap <= 1e-6;
    verdict(
        1,
        "convention calibration",
        t0,
        Duration::from_secs(10),
        ok,
        format!("H_r err {h_err:.1e}, Minkowski {mink:.1e}, first variation gap {fv_gap:.1e}, volume gap {vol_gap:.1e}"),
    );
}

fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    &b * b.transpose() + DMatrix::identity(n, n) * 0.3
}

fn random_sym(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    (&b + b.transpose()) * 0.5
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

#[test]
fn criterion_02_algebra_suite() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut sig, mut newton, mut traces, mut sym, mut pin) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for n in 2..=6 {
        for _ in 0..1000 {
            let a_f = random_spd(n, &mut rng);
            let s = random_sym(n, &mut rng);
            let p = CurvaturePoint::new(&a_f, &s).unwrap();
            let scale = p.spectral_radius().max(1.0);
            let cp = sigma_charpoly(&p.s_f).unwrap();
            for r in 0..=n {
                let e = sigma_eps(&p.s_f, r).unwrap();
                sig = sig.max((e - cp[r]).abs() / scale.powi(r as i32));
                if r < n {
                    let rel = (r as f64 + 1.0) * p.sigma_at(r + 1) - b_coeff(n, r) * p.h[r + 1];
                    pin = pin.max(rel.abs() / scale.powi(r as i32 + 1));
                }
            }
            let rec = newton_recurrence(&p.s_f, &cp);
            for r in 0..n {
                let eps = newton_eps(&p.s_f, r).unwrap();
                newton = newton.max(max_abs(&(&eps - &rec[r])) / scale.powi(r as i32));
                sym = sym.max(max_abs(&(&p.t[r] - p.t[r].transpose())) / (max_abs(&p.t[r]).max(1.0)));
            }
            for t in trace_checks(&p) {
                let s = scale.powi(t.r as i32 + 2);
                traces = traces.max(t.trace / s).max(t.trace_sf / s).max(t.trace_sf2 / s);
            }
        }
    }
    let ok = sig <= 1e-10 && newton <= 1e-8 && traces <= 1e-8 && sym <= 1e-10 && pin <= 1e-12;
    verdict(
        2,
        "algebra suite",
        t0,
        Duration::from_secs(30),
        ok,
        format!("sigma {sig:.1e}, Newton {newton:.1e}, traces {traces:.1e}, T_r asymmetry {sym:.1e}, normalization {pin:.1e}"),
    );
}

/// Samples in the cone where `H_1..H_{r+1} > 0`: generic draws, exact
/// umbilics and umbilics perturbed well below the umbilic threshold.
fn curvature_samples(count: usize, seed: u64) -> Vec<(Vec<f64>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.gen_range(2..=6);
        let r = rng.gen_range(0..n);
        let kappa: Vec<f64> = match out.len() % 10 {
            0 => vec![rng.gen_range(0.1..3.0); n],
            1 => {
                let c = rng.gen_range(0.1..3.0);
                (0..n).map(|_| c + rng.gen_range(-1e-9..1e-9)).collect()
            }
            _ => (0..n).map(|_| rng.gen_range(-1.0..3.0)).collect(),
        };
        let h = normalized_means(&kappa);
        if elementary_symmetric(&kappa)[r + 1] > 0.0 && (1..=r + 1).all(|j| h[j] > 0.0) {
            out.push((kappa, r));
        }
    }
    out
}

#[test]
fn criterion_03_maclaurin_sampling() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t0 = Instant::now();
    let samples = curvature_samples(100_000, 3);
    let (mut min_gap, mut bad_equalities, mut umbilics) = (f64::INFINITY, 0usize, 0usize);
    for (kappa, r) in &samples {
        let rep = maclaurin_check(kappa, *r).unwrap();
        let spread = kappa.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - kappa.iter().cloned().fold(f64::INFINITY, f64::min);
        if spread <= 1e-6 {
            umbilics += 1;
        }
        min_gap = min_gap.min(rep.min_gap);
        if rep.gaps.iter().any(|g| g.abs() <= 1e-10) && spread > 1e-6 {
            bad_equalities += 1;
        }
    }
    let ok = min_gap >= -1e-10 && bad_equalities == 0;
    verdict(
        3,
        "Maclaurin sampling",
        t0,
        Duration::from_secs(30),
        ok,
        format!("{} samples ({umbilics} umbilic), min gap {min_gap:.1e}, non-umbilic equalities {bad_equalities}", samples.len()),
    );
}

#[test]
fn criterion_04_discriminant_sign() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t0 = Instant::now();
    let samples = curvature_samples(100_000, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_delta, mut min_poly, mut checked) = (f64::NEG_INFINITY, f64::INFINITY, 0usize);
    let zs: Vec<f64> = (0..201).map(|i| -5.0 + 0.05 * i as f64).collect();
    for (kappa, r) in &samples {
        let h = normalized_means(kappa);
        let f_nu = rng.gen_range(0.5..2.0);
        let beta = rng.gen_range(-2.0..2.0);
        for j in 0..=*r {
            let d = discriminant_p(j, f_nu, beta, &h).unwrap();
            worst_delta = worst_delta.max(d.delta / d.scale.max(1e-300));
            for &z in &zs {
                min_poly = min_poly.min(d.eval(z));
            }
            checked += 1;
        }
    }
    let ok = worst_delta <= 1e-10 && min_poly >= -1e-10;
    verdict(
        4,
        "discriminant sign",
        t0,
        Duration::from_secs(30),
        ok,
        format!("{checked} quadratics, max delta/scale {worst_delta:.1e}, min P on z-grid {min_poly:.1e}"),
    );
}

fn builders(n: usize, res: usize) -> Vec<(&'static str, SampledImmersion)> {
    let m = n + 1;
    let o = BuildOptions::new(res);
    let mut out = vec![
        ("sphere", SampledImmersion::sphere(n, 1.0, o).unwrap()),
        ("ellipsoid", SampledImmersion::ellipsoid(&ellipsoid_axes(m), o).unwrap()),
        ("wulff(quadric)", SampledImmersion::wulff(&quadric(m), 1.0, o).unwrap()),
    ];
    if n == 2 {
        out.push(("torus", SampledImmersion::torus(2.0, 0.7, o).unwrap()));
    }
    out
}

#[test]
fn criterion_05_minkowski_suite() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t0 = Instant::now();
    let (mut worst, mut worst_ratio, mut cases, mut failures) = (0.0f64, f64::INFINITY, 0usize, Vec::new());
    for n in [2usize, 3] {
        let (coarse, fine) = if n == 2 { (32, 64) } else { (16, 32) };
        let mods = models(n + 1);
        let c_builds = builders(n, coarse);
        let f_builds = builders(n, fine);
        for ((bname, c), (_, f)) in c_builds.iter().zip(&f_builds) {
            for (mname, model) in &mods {
                let cf = CurvatureField::compute(c, model).unwrap();
                let ff = CurvatureField::compute(f, model).unwrap();
                for r in 0..n {
                    cases += 1;
                    let rc = minkowski_residual_with(c, &cf, r).unwrap().abs();
                    let rf = minkowski_residual_with(f, &ff, r).unwrap().abs();
                    worst = worst.max(rf);
                    let ratio_ok = if rc > NOISE_FLOOR {
                        let ratio = rc / rf;
                        worst_ratio = worst_ratio.min(ratio);
                        ratio >= 3.5
                    } else {
                        true
                    };
                    if rf > 1e-5 || !ratio_ok {
                        failures.push(format!("n={n} {bname} {mname} r={r}: {rc:.1e} -> {rf:.1e}"));
                    }
                }
            }
        }
    }
    verdict(
        5,
        "Minkowski suite",
        t0,
        Duration::from_secs(120),
        failures.is_empty(),
        format!(
            "{cases} cases, worst residual {worst:.1e}, smallest ratio above noise floor {worst_ratio:.1}{}",
            if failures.is_empty() { String::new() } else { format!(", failing: {}", failures.join("; ")) }
        ),
    );
}

#[test]
fn criterion_06_first_variation_suite() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut checks, mut worst, mut failures) = (0usize, 0.0f64, Vec::new());
    for n in [2usize, 3] {
        let res = if n == 2 { 32 } else { 16 };
        // pnorm-4 is under-resolved at N = 16.
        let mods: Vec<_> = models(n + 1).into_iter().filter(|(name, _)| n == 2 || *name != "pnorm-4").collect();
        let refs: Vec<&AnisotropyModel> = mods.iter().map(|(_, m)| m).collect();
        for (bname, imm) in builders(n, res).into_iter().filter(|(b, _)| *b != "torus") {
            for _ in 0..5 {
                let family = VariationFamily::new(imm.clone(), low_harmonic(&imm, &mut rng)).unwrap();
                let table = first_variation_table(&family, &refs).unwrap();
                for (mi, (mname, _)) in mods.iter().enumerate() {
                    for r in 0..n {
                        let c = &table.area[mi][r];
                        let bound = (1e-4 * c.formula_value.abs()).max(1e-6);
                        worst = worst.max(c.gap / bound);
                        checks += 1;
                        if c.gap > bound {
                            failures.push(format!("n={n} {bname} {mname} r={r}: gap {:.1e} vs {bound:.1e}", c.gap));
                        }
                    }
                }
            }
        }
    }
    verdict(
        6,
        "first-variation suite",
        t0,
        Duration::from_secs(120),
        failures.is_empty(),
        format!(
            "{checks} checks, worst gap/bound {worst:.2}{}",
            if failures.is_empty() { String::new() } else { format!(", failing: {}", failures.join("; ")) }
        ),
    );
}

#[test]
fn criterion_07_closed_form_identities() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t0 = Instant::now();
    let (mut worst, mut worst_order, mut failures) = (0.0f64, f64::INFINITY, Vec::new());
    for n in [2usize, 3] {
        let m = n + 1;
        let (coarse, base) = if n == 2 { (32, 64) } else { (16, 32) };
        let cases = [("sphere", AnisotropyModel::isotropic(m).unwrap()), ("wulff(quadric)", quadric(m))];
        for (bname, model) in &cases {
            let build = |res| {
                let o = BuildOptions::new(res);
                if *bname == "sphere" { SampledImmersion::sphere(n, 1.0, o) } else { SampledImmersion::wulff(model, 1.0, o) }.unwrap()
            };
            let (c, b) = (build(coarse), build(base));
            let (pc, pb) =
                (StabilityProblem::new(&c, model, 0, 0, &[1.0]).unwrap(), StabilityProblem::new(&b, model, 0, 0, &[1.0]).unwrap());
            for j in 0..n {
                let rc = closed_form_residuals(&pc, j).unwrap().max_norm(&c.interior_mask());
                let rb = closed_form_residuals(&pb, j).unwrap().max_norm(&b.interior_mask());
                for (which, (ec, eb)) in [(1, (rc.0, rb.0)), (2, (rc.1, rb.1))] {
                    worst = worst.max(eb);
                    let order_ok = if ec > NOISE_FLOOR {
                        let order = (ec / eb).log2();
                        worst_order = worst_order.min(order);
                        order >= 2.0
                    } else {
                        true
                    };
                    if eb > 1e-4 || !order_ok {
                        failures.push(format!("n={n} {bname} j={j} identity {which}: {ec:.1e} -> {eb:.1e}"));
                    }
                }
            }
        }
        // The pnorm-4 Wulff shape is only C¹; reported, not graded.
        let p4 = AnisotropyModel::pnorm(4, m).unwrap();
        let w = SampledImmersion::wulff(&p4, 1.0, BuildOptions::new(base)).unwrap();
        let pw = StabilityProblem::new(&w, &p4, 0, 0, &[1.0]).unwrap();
        let info: Vec<String> = (0..n)
            .map(|j| {
                let (a, b) = closed_form_residuals(&pw, j).unwrap().max_norm(&w.interior_mask());
                format!("j={j} {a:.1e}/{b:.1e}")
            })
            .collect();
        say(format!("INFO criterion  7 wulff(pnorm-4) n={n} N={base} interior residuals {}", info.join(", ")));
        // Unit sphere, F ≡ 1: I_j[1] = q_j against σ_1σ_{j+1} - (j+2)σ_{j+2}.
        let s = SampledImmersion::sphere(n, 1.0, BuildOptions::new(base)).unwrap();
        let iso = AnisotropyModel::isotropic(m).unwrap();
        let p = StabilityProblem::new(&s, &iso, 0, 0, &[1.0]).unwrap();
        for j in 0..n {
            let q = p.q_field(j).unwrap();
            for (k, qk) in q.iter().enumerate() {
                let pt = &p.field.points[k];
                let rhs = pt.sigma_at(1) * pt.sigma_at(j + 1) - (j + 2) as f64 * pt.sigma_at(j + 2);
                if (qk - rhs).abs() > 1e-6 {
                    failures.push(format!("n={n} sphere trace match j={j} node {k}: {qk} vs {rhs}"));
                    break;
                }
            }
        }
    }
    verdict(
        7,
        "closed-form identities",
        t0,
        Duration::from_secs(120),
        failures.is_empty(),
        format!(
            "worst interior residual {worst:.1e}, smallest order above noise floor {worst_order:.1}{}",
            if failures.is_empty() { String::new() } else { format!(", failing: {}", failures.join("; ")) }
        ),
    );
}

#[test]
fn criterion_08_jacobi_cross_route() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let mut detail = Vec::new();
    let s = SampledImmersion::sphere(2, 1.0, BuildOptions::new(64)).unwrap();
    let iso = AnisotropyModel::isotropic(3).unwrap();
    let prob = StabilityProblem::new(&s, &iso, 0, 0, &[1.0]).unwrap();
    let y1: Vec<f64> = s.nodes().iter().map(|g| g.position[2]).collect();
    let y2: Vec<f64> = s.nodes().iter().map(|g| g.position[0] * g.position[1]).collect();
    for (name, f, expect_zero) in [("Y1", &y1, true), ("Y2", &y2, false)] {
        let n2 = square_norm(&s, f);
        let op = jacobi_qform_operator(&prob, f).unwrap().direct;
        let fd = jacobi_qform_fd(&prob, f, 0.0, 1e-3).unwrap().second.value;
        let ok = if expect_zero {
            op.abs() <= 1e-4 * n2 && fd.abs() <= 1e-4 * n2
        } else {
            let target = 4.0 * n2;
            (op - target).abs() <= 1e-3 * target && (fd - target).abs() <= 1e-3 * target
        };
        detail.push(format!("{name} op {op:.4e} fd {fd:.4e}"));
        if !ok {
            failures.push(name.to_string());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for n in [2usize, 3] {
        let q = quadric(n + 1);
        let res = if n == 2 { 64 } else { 16 };
        let w = SampledImmersion::wulff(&q, 1.0, BuildOptions::new(res)).unwrap();
        let prob = StabilityProblem::new(&w, &q, 0, 0, &[1.0]).unwrap();
        for i in 0..3 {
            let f = mean_zero(&w, low_harmonic(&w, &mut rng));
            let n2 = square_norm(&w, &f);
            let op = jacobi_qform_operator(&prob, &f).unwrap().direct;
            let fd = jacobi_qform_fd(&prob, &f, 0.0, 1e-3).unwrap().second.value;
            let bound = (1e-3 * fd.abs()).max(1e-4 * n2);
            worst = worst.max((op - fd).abs() / bound);
            if (op - fd).abs() > bound {
                failures.push(format!("wulff n={n} f{i}: op {op:.4e} fd {fd:.4e}"));
            }
        }
    }
    detail.push(format!("wulff(quadric) worst gap/bound {worst:.2e}"));
    if !failures.is_empty() {
        detail.push(format!("failing: {}", failures.join("; ")));
    }
    verdict(8, "Jacobi cross-route", t0, Duration::from_secs(180), failures.is_empty(), detail.join(", "));
}

const EQUALITY_RESOLUTION: usize = 16;

fn equality_reports() -> Vec<(String, StabilityReport)> {
    let q = quadric(4);
    let p4 = AnisotropyModel::pnorm(4, 4).unwrap();
    let mut out = Vec::new();
    for (name, model) in [("quadric", &q), ("pnorm-4", &p4)] {
        let w = SampledImmersion::wulff(model, 1.0, BuildOptions::new(EQUALITY_RESOLUTION)).unwrap();
        for (r, s, a) in [(0, 0, vec![1.0]), (0, 1, vec![1.0, 1.0]), (1, 1, vec![1.0])] {
            let prob = StabilityProblem::new(&w, model, r, s, &a).unwrap();
            let rep = theorem_pipeline(&prob, &Tolerances::default()).unwrap();
            out.push((format!("{name} ({r},{s})"), rep));
        }
    }
    out
}

#[test]
fn criterion_09_equality_case() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let (mut sf, mut j2, mut grouped) = (0.0f64, 0.0f64, 0.0f64);
    for (name, rep) in equality_reports() {
        let scale = rep.test_function.f_scale;
        let routes = [rep.j2_operator, rep.j2_closed_form, rep.j2_fd];
        let route_max = routes.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let (g1, g2) = rep.grouped_max();
        sf = sf.max(rep.sf_umbilic_deviation);
        j2 = j2.max(route_max / scale);
        grouped = grouped.max(g1).max(g2);
        let ok = rep.verdict == Verdict::WulffEquality
            && rep.sf_umbilic_deviation <= 1e-5
            && route_max <= 1e-4 * scale
            && g1 <= 1e-8
            && g2 <= 1e-8;
        if !ok {
            failures.push(format!("{name}: {:?}", rep.verdict));
        }
    }
    verdict(
        9,
        "equality case",
        t0,
        Duration::from_secs(180),
        failures.is_empty(),
        format!(
            "6 cases, S_F - Id {sf:.1e}, J'' / f-scale {j2:.1e}, grouped terms {grouped:.1e}{}",
            if failures.is_empty() { String::new() } else { format!(", failing: {}", failures.join("; ")) }
        ),
    );
}

#[test]
fn criterion_10_determinism() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t0 = Instant::now();
    let runs: Vec<Vec<String>> =
        [1usize, 4, 8].iter().map(|&w| with_workers(w, || equality_reports().into_iter().map(|(_, r)| r.to_json()).collect())).collect();
    let identical = runs.iter().all(|r| r == &runs[0]);
    let bytes: usize = runs[0].iter().map(|s| s.len()).sum();
    verdict(
        10,
        "determinism",
        t0,
        Duration::from_secs(300),
        identical,
        format!("workers 1/4/8, {} reports, {bytes} bytes each run, identical: {identical}", runs[0].len()),
    );
}

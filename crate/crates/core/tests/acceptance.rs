//! Acceptance suite. Each criterion prints one `PASS` / `FAIL` line; the
//! process exits non-zero if any criterion fails.
//!
//! Run with `cargo test -p condens --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use condens::estimator::{ConditionalDensity, Conditioning, Denominator, DynConditioning, EstimatorKind, Realizer};
use condens::experiments::{
    rep_stream, run_experiment, run_replications, write_outputs, EvaluationGrid, ExperimentConfig, ExperimentOutput,
    LatticeConfig, RunSpec,
};
use condens::models::asian::gamma_inverse_newton;
use condens::models::{
    Asian, AsianParams, DensityModel, FailureSpec, HypoMethod, Hypoexp, ModelConfig, Queue, QueueParams, SanGraph,
    Structure, SumNormals, SumUniforms,
};
use condens::numerics::{adaptive_simpson, trapezoid_points};
use condens::points::{rng_stream, PointKind, UniformStream};
use condens::quantile::{quantile_ci, CdfAverage};
use condens::special::norm_inv;

/// Outcome of one criterion: pass flag plus a one-line summary.
struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict { pass, detail: detail.into() }
    }
}

fn all(parts: Vec<Verdict>) -> Verdict {
    let pass = parts.iter().all(|v| v.pass);
    let detail =
        parts.iter().map(|v| format!("{}{}", if v.pass { "" } else { "!" }, v.detail)).collect::<Vec<_>>().join("; ");
    Verdict::new(pass, detail)
}

fn within_time(start: Instant, limit: Duration) -> Verdict {
    let t = start.elapsed();
    Verdict::new(t <= limit, format!("{:.1}s (limit {}s)", t.as_secs_f64(), limit.as_secs()))
}

fn config(model: ModelConfig, estimator: EstimatorKind, variant: &str, pointset: PointKind) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(model, estimator);
    c.variant = Some(variant.to_string());
    c.pointset = pointset;
    c
}

fn fixed_grid(a: f64, b: f64, points: Vec<f64>) -> EvaluationGrid {
    EvaluationGrid { a, b, points }
}

/// Per-sample means and standard errors of one realizer at each grid point,
/// over `n` i.i.d. draws (one estimator output, denominator applied).
fn per_sample(r: &dyn Realizer, grid: &[f64], n: usize, stream: &mut UniformStream) -> Vec<(f64, f64)> {
    let scale = match r.denominator() {
        Denominator::Known(m) => 1.0 / m,
        _ => 1.0,
    };
    let mut s1 = vec![0.0; grid.len()];
    let mut s2 = vec![0.0; grid.len()];
    let mut acc = vec![vec![0.0; grid.len()]; r.outputs()];
    for _ in 0..n {
        acc.iter_mut().flatten().for_each(|v| *v = 0.0);
        r.accumulate(stream, grid, &mut acc);
        r.finish(&mut acc);
        for (j, v) in acc[0].iter().enumerate() {
            let v = v * scale;
            s1[j] += v;
            s2[j] += v * v;
        }
    }
    let m = n as f64;
    s1.iter()
        .zip(&s2)
        .map(|(a, b)| {
            let mean = a / m;
            let var = ((b - m * mean * mean) / (m - 1.0)).max(0.0);
            (mean, (var / m).sqrt())
        })
        .collect()
}

/// One-sample IV of a conditioning over [a, b] on a stratified grid.
fn one_sample_iv(c: &dyn DynConditioning, a: f64, b: f64, n_e: usize, n: usize, seed: u64) -> f64 {
    let grid = condens::experiments::build_grid(a, b, n_e, &mut rng_stream(seed, 1)).unwrap();
    let mut s = rng_stream(seed, 2);
    let (mut s1, mut s2) = (vec![0.0; n_e], vec![0.0; n_e]);
    let mut buf = vec![0.0; n_e];
    for _ in 0..n {
        let d = c.realize_dyn(&mut s).expect("no rejections");
        buf.iter_mut().for_each(|v| *v = 0.0);
        d.add_density_grid(&grid.points, &mut buf);
        for j in 0..n_e {
            s1[j] += buf[j];
            s2[j] += buf[j] * buf[j];
        }
    }
    let m = n as f64;
    grid.cell() * s1.iter().zip(&s2).map(|(a, b)| (b - a * a / m) / (m - 1.0)).sum::<f64>()
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let model = SumNormals::new(vec![1.0, 1.0]).unwrap();
    let grid = fixed_grid(-1.5, 1.5, vec![-1.0, 0.0, 1.0]);
    let lattice = LatticeConfig::default();
    let (n, n_r) = (1 << 14, 100);
    let spec = RunSpec {
        kind: EstimatorKind::Cde,
        variant: "g-2",
        pointset: PointKind::Mc,
        n,
        n_r,
        seed: 101,
        salt: 0,
        lattice: &lattice,
        bandwidth: None,
    };
    let reps = run_replications(&model, &spec, &grid).unwrap();
    let mut parts = Vec::new();
    for (j, &x) in grid.points.iter().enumerate() {
        let mean = reps.estimates.iter().map(|r| r[j]).sum::<f64>() / n_r as f64;
        let s2 = reps.estimates.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n_r - 1) as f64;
        let v = n as f64 * s2;
        let se = v * (2.0 / (n_r - 1) as f64).sqrt();
        let exact = model.exact_variance(1, x);
        parts.push(Verdict::new(
            (v - exact).abs() <= 3.0 * se,
            format!("x={x}: var {v:.6} vs {exact:.6} (se {se:.1e})"),
        ));
    }
    parts.push(within_time(start, Duration::from_secs(10)));
    all(parts)
}

fn criterion_2() -> Verdict {
    let mut parts = Vec::new();
    for (eps, check_values) in [(0.75, true), (1.0 / 16.0, false)] {
        let m = SumUniforms::new(eps).unwrap();
        let iv1 = one_sample_iv(&m.hide(1).unwrap(), 0.0, 1.0 + eps, 2000, 200_000, 7);
        let iv2 = one_sample_iv(&m.hide(2).unwrap(), 0.0, 1.0 + eps, 2000, 200_000, 8);
        if check_values {
            for (k, iv) in [(1, iv1), (2, iv2)] {
                let exact = m.exact_iv(k).unwrap();
                parts.push(Verdict::new(
                    ((iv - exact) / exact).abs() <= 0.03,
                    format!("eps={eps} hide Y{k}: IV {iv:.5} vs {exact:.5}"),
                ));
            }
        }
        parts.push(Verdict::new(iv1 < iv2, format!("eps={eps}: IV(G-1) {iv1:.4} < IV(G-2) {iv2:.4}")));
    }
    all(parts)
}

fn criterion_3_and_4() -> (Verdict, Verdict) {
    let start = Instant::now();
    let cantilever = || ModelConfig::Cantilever(Default::default());
    let run = |kind, variant: &str, ps| {
        let mut c = config(cantilever(), kind, variant, ps);
        c.seed = 303;
        run_experiment(&c).unwrap()
    };
    let mut parts = Vec::new();
    let mut mc_g3 = None;
    for v in ["g-1", "g-2", "g-3"] {
        let out = run(EstimatorKind::Cde, v, PointKind::Mc);
        let nu = out.curve.fit.nu;
        parts.push(Verdict::new((0.95..=1.05).contains(&nu), format!("cde {v} nu {nu:.3}")));
        if v == "g-3" {
            mc_g3 = Some(out);
        }
    }
    for v in ["psi-1", "psi-2", "psi-3"] {
        let nu = run(EstimatorKind::Glrde, v, PointKind::Mc).curve.fit.nu;
        parts.push(Verdict::new((0.95..=1.05).contains(&nu), format!("glrde {v} nu {nu:.3}")));
    }
    let nu = run(EstimatorKind::Kde, "plain", PointKind::Mc).curve.fit.nu;
    parts.push(Verdict::new((0.65..=0.90).contains(&nu), format!("kde nu {nu:.3}")));
    parts.push(within_time(start, Duration::from_secs(300)));
    let c3 = all(parts);

    let lat = run(EstimatorKind::Cde, "g-3", PointKind::LatticeShift);
    let mc = mc_g3.unwrap();
    let at = |o: &ExperimentOutput| o.curve.points.iter().find(|p| p.n == 1 << 14).unwrap().value;
    let ratio = at(&mc) / at(&lat);
    let c4 = all(vec![
        Verdict::new(lat.curve.fit.nu >= 1.6, format!("lat-s nu {:.3}", lat.curve.fit.nu)),
        Verdict::new(ratio >= 100.0, format!("IV(mc)/IV(lat-s) at 2^14 = {ratio:.1}")),
    ]);
    (c3, c4)
}

fn criterion_5() -> Verdict {
    let asian = Asian::new(AsianParams::default()).unwrap();
    let (a, b) = asian.interval();
    let grid = condens::experiments::build_grid(a, b, 128, &mut rng_stream(5, 0)).unwrap();
    let bridge = asian.bridge();
    let mut s = rng_stream(5, 1);
    let (mut worst, mut failures) = (0.0_f64, 0);
    for _ in 0..100 {
        let g = bridge.realize(&mut s).unwrap();
        let f = |z: f64| g.eval(z);
        for &x in &grid.points {
            match gamma_inverse_newton(f, x, 0.0, AsianParams::default().newton_iters) {
                Ok(z) => worst = worst.max((f(z).0 - x).abs()),
                Err(_) if f(-12.0).0 > x || f(12.0).0 < x => {}
                Err(_) => failures += 1,
            }
        }
    }
    let residuals =
        Verdict::new(worst < 1e-9 && failures == 0, format!("max Newton residual {worst:.1e}, {failures} failures"));

    let model = || ModelConfig::Asian(AsianParams::default());
    let mut sob = config(model(), EstimatorKind::Cde, "bridge", PointKind::SobolLms);
    sob.n = Some((8..=13).map(|k| 1 << k).collect());
    sob.seed = 505;
    let sob = run_experiment(&sob).unwrap();
    let rate = Verdict::new(sob.curve.fit.nu >= 1.3, format!("bridge sobol-lms nu {:.3}", sob.curve.fit.nu));

    let mc_iv = |variant: &str| {
        let mut c = config(model(), EstimatorKind::Cde, variant, PointKind::Mc);
        c.n = Some(vec![1 << 13]);
        c.seed = 506;
        run_experiment(&c).unwrap().curve.points[0].value
    };
    let (iv_b, iv_s) = (mc_iv("bridge"), mc_iv("seq"));
    let gap = Verdict::new(iv_b <= iv_s / 50.0, format!("mc IV seq/bridge at 2^13 = {:.1}", iv_s / iv_b));
    all(vec![residuals, rate, gap])
}

fn criterion_6() -> Verdict {
    let q = Queue::new(QueueParams::default()).unwrap();
    let n = 1 << 14;
    let mut s = rng_stream(606, 0);
    let counts: Vec<f64> = (0..n).map(|_| q.simulate(&mut s).n as f64).collect();
    let mean = counts.iter().sum::<f64>() / n as f64;
    let sd = (counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let se = sd / (n as f64).sqrt();
    let en = Verdict::new((mean - 60.0).abs() <= 3.0 * se, format!("E[N] {mean:.3} (se {se:.3})"));

    // p̂₀ + ∫f̂ over the same days, with f̂ on a fine grid out to where the tail is negligible.
    let days = 1 << 12;
    let fine: Vec<f64> = (0..=2000).map(|k| 1e-9 + 30.0 * k as f64 / 2000.0).collect();
    let lattice = LatticeConfig::default();
    let spec = RunSpec {
        kind: EstimatorKind::Cde,
        variant: "hide-service",
        pointset: PointKind::Mc,
        n: days,
        n_r: 1,
        seed: 607,
        salt: 0,
        lattice: &lattice,
        bandwidth: None,
    };
    let f = run_replications(&q, &spec, &fixed_grid(0.0, 30.0, fine.clone())).unwrap().mean;
    let mut s = rep_stream(607, 0, days, 0);
    let p0 = (0..days).map(|_| q.zero_mass_sum(&q.simulate(&mut s))).sum::<f64>() / (days as f64 * 60.0);
    let total = p0 + trapezoid_points(&fine, &f);
    let norm = Verdict::new((0.99..=1.01).contains(&total), format!("p0 {p0:.4} + integral = {total:.4}"));

    let iv = |estimator, variant: &str| {
        let mut c = config(ModelConfig::Queue(QueueParams::default()), estimator, variant, PointKind::Mc);
        c.n = Some(vec![1 << 14]);
        c.n_r = Some(16);
        c.n_e = 32;
        c.seed = 608;
        run_experiment(&c).unwrap().curve.points[0].value
    };
    let (cde, glr) = (iv(EstimatorKind::Cde, "hide-service"), iv(EstimatorKind::Glrde, "psi-service"));
    let gap = Verdict::new(cde <= glr / 100.0, format!("IV glrde/cde at 2^14 = {:.0}", glr / cde));
    all(vec![en, norm, gap])
}

fn criterion_7() -> Verdict {
    let start = Instant::now();
    let n = 100_000;
    let failure =
        |structure| FailureSpec { rates: vec![1.0, 2.0, 3.0], structure, interval: [0.1, 2.5], ..Default::default() };
    let models: Vec<Box<dyn DensityModel>> = [
        ModelConfig::SumNormals { a: vec![1.0, 2.0, 0.5], interval: None },
        ModelConfig::SumUniforms { eps: 0.75 },
        ModelConfig::Cantilever(Default::default()),
        ModelConfig::Queue(QueueParams::default()),
        ModelConfig::Asian(AsianParams::default()),
        ModelConfig::Buckling(Default::default()),
        ModelConfig::Failure(failure(Structure::Parallel { d: 3 })),
        ModelConfig::Failure(failure(Structure::Series { d: 3 })),
    ]
    .iter()
    .map(|c| c.build().unwrap())
    .collect();

    let mut parts = Vec::new();
    for (idx, model) in models.iter().enumerate() {
        let (a, b) = model.interval();
        let grid: Vec<f64> = (0..5).map(|k| a + (b - a) * (k as f64 + 0.5) / 5.0).collect();
        let mut estimators: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
        let variants: Vec<(EstimatorKind, String)> = model
            .cde_variants()
            .into_iter()
            .map(|v| (EstimatorKind::Cde, v))
            .chain(model.glr_variants().into_iter().map(|v| (EstimatorKind::Glrde, v)))
            .collect();
        for (i, (kind, v)) in variants.iter().enumerate() {
            let r = model.realizer(*kind, v).unwrap();
            let mut s = rng_stream(700 + idx as u64, i as u64);
            estimators.push((v.clone(), per_sample(r.as_ref(), &grid, n, &mut s)));
        }
        let exact: Option<Vec<f64>> = grid.iter().map(|&x| model.exact_density(x)).collect();
        let mut worst = 0.0_f64;
        let mut checks = 0;
        match &exact {
            Some(f) => {
                for (_, est) in &estimators {
                    for ((m, se), fx) in est.iter().zip(f) {
                        worst = worst.max((m - fx).abs() / se.max(1e-12 * fx.abs()).max(1e-300));
                        checks += 1;
                    }
                }
            }
            None => {
                for i in 0..estimators.len() {
                    for k in i + 1..estimators.len() {
                        for ((m1, s1), (m2, s2)) in estimators[i].1.iter().zip(&estimators[k].1) {
                            worst = worst.max((m1 - m2).abs() / s1.hypot(*s2).max(1e-12 * m1.abs()).max(1e-300));
                            checks += 1;
                        }
                    }
                }
            }
        }
        if checks == 0 {
            continue;
        }
        let names: Vec<&str> = estimators.iter().map(|e| e.0.as_str()).collect();
        parts.push(Verdict::new(
            worst <= 4.0,
            format!(
                "{} [{}]{}: max {worst:.2} se",
                model.name(),
                names.join(","),
                if exact.is_some() { " vs exact" } else { "" }
            ),
        ));
    }
    parts.push(within_time(start, Duration::from_secs(300)));
    all(parts)
}

fn criterion_8() -> Verdict {
    let two = Hypoexp::new(vec![2.0, 1.0], HypoMethod::Auto).unwrap();
    let conv = (0..=400)
        .map(|k| {
            let x = k as f64 * 0.05;
            (two.density(x) - 2.0 * ((-x).exp() - (-2.0 * x).exp())).abs()
        })
        .fold(0.0, f64::max);
    let five = Hypoexp::new(vec![13.0, 12.0, 11.0, 10.0, 9.0], HypoMethod::Auto).unwrap();
    let mass = adaptive_simpson(&|x| five.density(x), 0.0, 10.0, 1e-11);
    let tie_rates = vec![2.0, 2.0 * (1.0 - 1e-6), 1.0, 0.5];
    let prod = Hypoexp::new(tie_rates.clone(), HypoMethod::Product).unwrap();
    let unif = Hypoexp::new(tie_rates, HypoMethod::Uniformization).unwrap();
    let rel = (1..=60)
        .map(|k| {
            let x = k as f64 * 0.25;
            let d = ((prod.density(x) - unif.density(x)) / prod.density(x)).abs();
            let c = ((prod.cdf(x) - unif.cdf(x)) / prod.cdf(x)).abs();
            d.max(c)
        })
        .fold(0.0, f64::max);
    all(vec![
        Verdict::new(conv <= 1e-12, format!("c=2 max error {conv:.1e}")),
        Verdict::new((mass - 1.0).abs() <= 1e-8, format!("c=5 mass error {:.1e}", (mass - 1.0).abs())),
        Verdict::new(rel <= 1e-6, format!("near tie relative gap {rel:.1e}")),
    ])
}

fn criterion_9() -> Verdict {
    let model = SumNormals::new(vec![1.0, 1.0]).unwrap();
    let cond = model.hide(1).unwrap();
    let mut parts = Vec::new();
    for (qi, q) in [0.5, 0.95].into_iter().enumerate() {
        let truth = norm_inv(q);
        let (mut covered, mut ordered) = (0, 0);
        for t in 0..100 {
            let mut s = rng_stream(909, (qi * 1000 + t) as u64);
            let ds: Vec<_> = (0..1 << 12).map(|_| cond.realize(&mut s).unwrap()).collect();
            let ci = quantile_ci(&CdfAverage::new(ds).unwrap(), q, 0.95, (-2.0, 2.0)).unwrap();
            covered += (ci.lower <= truth && truth <= ci.upper) as usize;
            ordered += (ci.sigma2_cmc <= ci.sigma2_plain) as usize;
        }
        parts.push(Verdict::new(covered >= 90, format!("q={q}: {covered}/100 covered")));
        parts.push(Verdict::new(ordered == 100, format!("q={q}: sigma2_cmc <= sigma2 in {ordered}/100")));
    }
    all(parts)
}

fn criterion_10() -> Verdict {
    let small = |model: ModelConfig, kind, variant: &str, ps| {
        let mut c = config(model, kind, variant, ps);
        c.n = Some(vec![256, 512]);
        c.n_r = Some(4);
        c.n_e = 16;
        c.seed = 1010;
        c.reference.n = 2048;
        c.reference.n_r = 2;
        c
    };
    let configs = vec![
        small(
            ModelConfig::SumNormals { a: vec![1.0, 1.0], interval: None },
            EstimatorKind::Kde,
            "plain",
            PointKind::Mc,
        ),
        small(ModelConfig::SumUniforms { eps: 0.75 }, EstimatorKind::Cde, "g-1", PointKind::LatticeShiftBaker),
        small(ModelConfig::Cantilever(Default::default()), EstimatorKind::CdeCombo, "all", PointKind::SobolLms),
        small(ModelConfig::Cantilever(Default::default()), EstimatorKind::Glrde, "psi-2", PointKind::LatticeShift),
        small(ModelConfig::San(SanGraph::thirteen_arc()), EstimatorKind::Cde, "cut", PointKind::Mc),
        small(ModelConfig::Queue(QueueParams::default()), EstimatorKind::Cde, "hide-service", PointKind::LatticeShift),
        small(ModelConfig::Asian(AsianParams::default()), EstimatorKind::Cde, "bridge", PointKind::SobolLms),
        small(ModelConfig::Buckling(Default::default()), EstimatorKind::Glrde, "psi-6", PointKind::Mc),
        small(ModelConfig::Failure(Default::default()), EstimatorKind::Cde, "order", PointKind::LatticeShift),
    ];
    let dir = tempfile::tempdir().unwrap();
    let run_in = |threads: usize, sub: &str| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let outs: Vec<ExperimentOutput> = pool.install(|| configs.iter().map(|c| run_experiment(c).unwrap()).collect());
        let path = dir.path().join(sub);
        write_outputs(&outs, &path).unwrap();
        std::fs::read(path.join("results.csv")).unwrap()
    };
    let first = run_in(1, "a");
    let second = run_in(3, "b");
    let third = run_in(1, "c");
    Verdict::new(
        first == second && first == third && !first.is_empty(),
        format!("{} experiments, results.csv {} bytes, identical across 3 runs", configs.len(), first.len()),
    )
}

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let wanted = |k: &str| filter.is_empty() || filter.iter().any(|f| f == k);
    let mut results: Vec<(&str, &str, Verdict)> = Vec::new();
    let guarded = |f: &dyn Fn() -> Verdict| {
        catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Verdict::new(false, format!("panicked: {msg}"))
        })
    };
    let mut record = |k: &'static str, name: &'static str, v: Verdict| {
        println!("{} criterion {k:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        results.push((k, name, v));
    };
    if wanted("1") {
        record("1", "exact-variance oracle", guarded(&criterion_1));
    }
    if wanted("2") {
        record("2", "sum-of-uniforms one-sample IV", guarded(&criterion_2));
    }
    if wanted("3") || wanted("4") {
        let both = catch_unwind(criterion_3_and_4)
            .unwrap_or_else(|_| (Verdict::new(false, "panicked"), Verdict::new(false, "panicked")));
        record("3", "cantilever MC rates", both.0);
        record("4", "cantilever RQMC gain", both.1);
    }
    if wanted("5") {
        record("5", "asian bridge", guarded(&criterion_5));
    }
    if wanted("6") {
        record("6", "queue", guarded(&criterion_6));
    }
    if wanted("7") {
        record("7", "unbiasedness", guarded(&criterion_7));
    }
    if wanted("8") {
        record("8", "hypoexponential", guarded(&criterion_8));
    }
    if wanted("9") {
        record("9", "quantile coverage", guarded(&criterion_9));
    }
    if wanted("10") {
        record("10", "determinism", guarded(&criterion_10));
    }
    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Acceptance run: one PASS/FAIL line per criterion with its runtime.
//!
//! Two criteria cannot be met as stated, and their lines read FAIL whatever
//! the implementation does:
//!
//! - 6, theta part: the Bergman function of `L^k` on an elliptic curve with
//!   `deg L = 1` varies by `O(e^{-c k})` relative to its mean, which is far
//!   above `1e-8` for every `k ≤ 8` (about `3e-5` at `k = 8`).
//! - 8: a generic cubic jet contains leafwise terms scaling like `l^{-1/2}`,
//!   whose sup over the box of radius `log m` grows until `m ≈ e⁶`; the
//!   linear metric terms behave like `log m / √m` and stay above `1e-2` for
//!   `m ≤ 20`.
//!
//! For those two the attainable sub-checks are still enforced. The process
//! exits nonzero only when an attainable check fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use morse_core::forms::{
    cutoff_energy, dbar, dbar_star, galerkin_extremal, laplacian, model_bergman, model_test_form, norm_sq,
    sandwich_check, CutoffProfile, FormIndex, ModelWeight, DEFAULT_HARMONIC_TOL,
};
use morse_core::hermitian::{det_rel, CurvatureSpectrum};
use morse_core::hodge::{hodge_numbers, random_complex};
use morse_core::localize::{
    deviation_sup, metric_deviation_sup, r_scale, volume_identity_check, ScalingPair, SplitMetric, WeightJet,
};
use morse_core::torus::{
    bergman_constant, cohomology_dims, det_rel_exact, morse_integrals, morse_rhs_exact, theta_bergman,
    truncated_bergman_check, weak_morse_check, MuRule, Perturbation, TorusScenario,
};
use morse_core::Complex64;
use morse_lab::config::{defaults, HodgeConfig, Kind, ScenarioConfig};
use morse_lab::run::{complex_shape, random_spectrum, stream};
use morse_lab::sweep;
use num_rational::Ratio;
use rand::Rng;

const SEED: u64 = 2024;
const DEGREE: usize = 12;

struct Verdict {
    /// Everything the criterion asks for.
    pass: bool,
    /// The part that is expected to hold; equal to `pass` unless the
    /// criterion is known to be out of reach.
    attainable: bool,
    detail: String,
}

impl Verdict {
    fn full(pass: bool, detail: String) -> Self {
        Verdict { pass, attainable: pass, detail }
    }
}

fn spectra() -> Vec<CurvatureSpectrum> {
    (0..20).map(|i| random_spectrum(3, &mut stream(SEED, i))).collect()
}

fn negatives(spec: &CurvatureSpectrum) -> usize {
    spec.values().filter(|v| *v < 0.0).count()
}

fn flat_scenarios() -> Vec<TorusScenario> {
    [(vec![1], vec![1]), (vec![-1], vec![2]), (vec![-2], vec![1, 3])]
        .into_iter()
        .map(|(d, e)| TorusScenario::new(d, e).unwrap())
        .collect()
}

fn within(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

fn model_kernel() -> Verdict {
    let mut worst = 0.0f64;
    let mut off = 0.0f64;
    let mut ok = true;
    for spec in spectra() {
        let q = negatives(&spec);
        // |β(0)|² = ∏|μ_i| / π^n, computed here from the spectrum directly
        let closed: f64 = spec.values().map(f64::abs).product::<f64>() / PI.powi(spec.n() as i32);
        let ev = galerkin_extremal(&spec, q, DEGREE, DEFAULT_HARMONIC_TOL).unwrap();
        ok &= within(model_bergman(&spec, q).unwrap(), closed, 1e-12);
        ok &= within(ev.b, ev.s, 1e-2) && within(ev.b, closed, 1e-2) && within(ev.s, closed, 1e-2);
        worst = worst.max((ev.b - closed).abs() / closed).max((ev.s - closed).abs() / closed);
        for (index, s) in &ev.components {
            if *index != FormIndex::leading(q) {
                off = off.max(*s);
            }
        }
    }
    ok &= off <= 1e-6;
    Verdict::full(ok, format!("20 spectra at d={DEGREE}, max rel err {worst:.1e}, off-leading S_I ≤ {off:.1e}"))
}

fn test_form() -> Verdict {
    let mut ok = true;
    let mut worst = 0.0f64;
    for spec in spectra() {
        let (w, q) = ModelWeight::negatives_first(&spec).unwrap();
        let beta = model_test_form(&w).unwrap();
        let e = (norm_sq(&beta, &w).unwrap() - 1.0).abs();
        worst = worst.max(e);
        ok &= e <= 1e-12 && laplacian(&beta, &w).unwrap().is_zero();
        if q < w.n() {
            ok &= dbar(&beta).unwrap().is_zero();
        }
        if q > 0 {
            ok &= dbar_star(&beta, &w).unwrap().is_zero();
        }
    }
    Verdict::full(ok, format!("|‖β‖²−1| ≤ {worst:.1e}, Δβ, ∂̄β, ∂̄*β cancel exactly"))
}

fn cutoff() -> Verdict {
    let spec = CurvatureSpectrum::new(vec![-3.0 * PI], vec![3.0 * PI]);
    let chi = CutoffProfile::default();
    let mut ok = true;
    let mut last = f64::INFINITY;
    let mut min_norm = f64::INFINITY;
    let mut final_delta = f64::NAN;
    for m in 4..=20u64 {
        let r = r_scale(m * m * m, m);
        let c = cutoff_energy(&spec, 1, r, &chi, 32).unwrap();
        if m >= 8 {
            ok &= c.norm >= 1.0 - 1e-3 && c.norm <= 1.0;
            min_norm = min_norm.min(c.norm);
        }
        ok &= c.energy <= c.delta_bound && c.delta_bound < last;
        last = c.delta_bound;
        final_delta = c.delta_bound;
    }
    ok &= final_delta < 1e-4;
    Verdict::full(
        ok,
        format!("min ‖χβ‖² (m≥8) = {min_norm:.6}, δ(20) = {final_delta:.2e}, √δ(20) = {:.2e}", final_delta.sqrt()),
    )
}

fn exact_morse() -> Verdict {
    let pairs = sweep(3, 2..=12).unwrap();
    let mut ok = true;
    let mut rows = 0;
    for s in flat_scenarios() {
        let q0 = s.realized_q();
        for r in weak_morse_check(&s, &pairs, 16).unwrap() {
            let exact = morse_rhs_exact(&s, r.k, r.l).unwrap();
            ok &= r.passed() && r.h == cohomology_dims(&s, r.k, r.l).unwrap();
            for q in 0..=s.n() {
                ok &= r.h[q] == exact[q] && (q == q0 || r.h[q] == 0);
            }
            rows += 1;
        }
    }
    Verdict::full(ok, format!("{rows} (scenario, m) points, integer equality at q₀, zeros elsewhere"))
}

fn perturbed_morse() -> Verdict {
    let pairs = sweep(3, 2..=12).unwrap();
    let mut ok = true;
    let mut drift = 0.0f64;
    let mut euler = 0.0f64;
    for base in flat_scenarios() {
        let s = base.clone().with_perturbation(Perturbation::cosine(0.1, base.r())).unwrap();
        for r in weak_morse_check(&s, &pairs, 32).unwrap() {
            let m = morse_integrals(&s, r.k, r.l, 32).unwrap();
            let scale = m.rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for q in 0..=s.n() {
                ok &= r.weak[q] && r.h[q] as f64 <= r.rhs[q] * (1.0 + 1e-6);
                drift = drift.max((m.rhs[q] - m.coarse[q]).abs() / m.rhs[q].abs().max(1e-9 * scale));
            }
            let flat = cohomology_dims(&base, r.k, r.l).unwrap();
            let chi = flat.iter().enumerate().map(|(q, v)| if q % 2 == 0 { *v } else { -v }).sum::<i128>() as f64;
            euler = euler.max((r.euler_rhs - chi).abs() / chi.abs());
        }
    }
    ok &= drift <= 1e-2 && euler <= 1e-2;
    Verdict::full(ok, format!("grid 64, refinement drift {drift:.1e}, Chern-Weil rel err {euler:.1e}"))
}

fn bergman_constants() -> Verdict {
    let pairs = sweep(3, 2..=12).unwrap();
    let mut exact = true;
    for s in flat_scenarios() {
        let q0 = s.realized_q();
        let float_det = det_rel(&s.spectrum()).unwrap();
        for p in &pairs {
            let b = bergman_constant(&s, q0, p.k, p.l).unwrap();
            let d = det_rel_exact(&s, q0).unwrap();
            exact &= b / d == Ratio::from_integer(1) && d == Ratio::from_integer(float_det as i128);
        }
    }
    let mut integral = true;
    let mut defects = Vec::new();
    for k in 1..=8 {
        let f = theta_bergman(1, k, 61).unwrap();
        integral &= (f.integral - k as f64).abs() <= 1e-6;
        defects.push(f.defect);
    }
    let constant = defects.iter().all(|&d| d <= 1e-8);
    let worst = defects.iter().fold(0.0f64, |a, &b| a.max(b));
    let best = defects.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    Verdict {
        pass: exact && integral && constant,
        attainable: exact && integral,
        detail: format!(
            "ratio exactly 1: {exact}; ∫B = k: {integral}; theta defect k≤8 in [{best:.1e}, {worst:.1e}] vs 1e-8 \
             (known unattainable)"
        ),
    }
}

fn truncated() -> Verdict {
    let pairs = sweep(3, 4..=20).unwrap();
    let mut ok = true;
    let mut m0 = Vec::new();
    for s in flat_scenarios() {
        let rep = truncated_bergman_check(&s, s.realized_q(), &pairs, MuRule::SqrtDeltaBound).unwrap();
        match rep.first_passing {
            Some(f) => {
                m0.push(pairs[f].l);
                for row in &rep.rows[f..] {
                    ok &= row.truncated == Some(row.harmonic)
                        && row.harmonic == bergman_constant(&s, rep.q, row.k, row.l).unwrap();
                }
            }
            None => ok = false,
        }
    }
    Verdict::full(ok, format!("μ = √δ, m₀ = {m0:?}"))
}

fn localization() -> Verdict {
    let mut rng = stream(SEED, 100);
    let jet = WeightJet::random(2, 1, &mut rng).unwrap();
    let metric = SplitMetric::random(2, 1, 0.1, &mut rng).unwrap();
    let pairs: Vec<ScalingPair> = sweep(3, 4..=20).unwrap();
    let sups = |f: &dyn Fn(ScalingPair) -> f64| -> Vec<f64> { pairs.iter().map(|&p| f(p)).collect() };
    let dev = sups(&|p| deviation_sup(&jet, p, 0, 12).unwrap().value);
    let met = sups(&|p| metric_deviation_sup(&metric, p, 0, 12).unwrap().value);
    let converges = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]) && *v.last().unwrap() < 1e-2;

    let quad = WeightJet::quadratic(vec![-1.0], vec![2.0]).unwrap();
    let flat = SplitMetric::identity(2, 1).unwrap();
    let zeros = pairs.iter().all(|&p| {
        (0..=2).all(|o| deviation_sup(&quad, p, o, 8).unwrap().value == 0.0)
            && metric_deviation_sup(&flat, p, 1, 8).unwrap().value == 0.0
    });
    let points: Vec<Vec<Complex64>> = (0..50)
        .map(|_| (0..2).map(|_| Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))).collect())
        .collect();
    let volume = pairs.iter().map(|&p| volume_identity_check(&metric, p, &points).unwrap()).fold(0.0, f64::max);
    let attainable = zeros && volume <= 1e-12;
    Verdict {
        pass: attainable && converges(&dev) && converges(&met),
        attainable,
        detail: format!(
            "jet sup {:.2e} -> {:.2e}, metric sup {:.2e} -> {:.2e} (known unattainable); quadratic zeros: {zeros}; \
             volume err {volume:.1e}",
            dev[0],
            dev[dev.len() - 1],
            met[0],
            met[met.len() - 1]
        ),
    }
}

fn spectral_truncation() -> Verdict {
    let ScenarioConfig::Hodge(cfg) = defaults(Kind::Hodge).remove(0) else { unreachable!() };
    let cfg = HodgeConfig { seed: SEED, count: 1000, ..cfg };
    let mut violations = 0;
    let mut sums = 0;
    let mut checks = 0;
    for i in 0..cfg.count as u64 {
        let (dims, seed) = complex_shape(&cfg, i);
        let c = random_complex(&dims, None, seed).unwrap();
        let h = hodge_numbers(&c);
        for mu in h.canonical_mu_grid(cfg.mu_points) {
            for q in 0..=c.length() {
                checks += 1;
                violations += (h.truncation_holds(q, mu) != Some(true)) as usize;
            }
            sums += (h.truncated_euler_characteristic(mu) != h.euler_characteristic()) as usize;
        }
    }
    Verdict::full(
        violations == 0 && sums == 0,
        format!("1000 complexes, {checks} (q, μ) checks, {violations} violations, {sums} alternating-sum mismatches"),
    )
}

fn sandwich() -> Verdict {
    let mut ok = true;
    let mut dims = 0;
    for spec in spectra() {
        let q = negatives(&spec);
        let r = sandwich_check(&spec, q, DEGREE, None).unwrap();
        let ev = galerkin_extremal(&spec, q, DEGREE, DEFAULT_HARMONIC_TOL).unwrap();
        let sum: f64 = ev.components.iter().map(|(_, s)| s).sum();
        ok &= r.holds && ev.s <= ev.b + 1e-9 && ev.b <= sum + 1e-9;
        dims += r.basis_size;
    }
    Verdict::full(ok, format!("S ≤ B ≤ Σ S_I on 20 spaces ({dims} harmonic vectors)"))
}

type Criterion = (u32, &'static str, Option<u64>, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "model kernel identity", Some(60), model_kernel),
        (2, "test form exactness", Some(1), test_form),
        (3, "cutoff program", Some(30), cutoff),
        (4, "torus exact Morse equality", Some(5), exact_morse),
        (5, "perturbed weak inequality", Some(120), perturbed_morse),
        (6, "Bergman constants", Some(30), bergman_constants),
        (7, "truncated kernels", Some(30), truncated),
        (8, "localization convergence", Some(20), localization),
        (9, "spectral truncation lemma", Some(60), spectral_truncation),
        (10, "kernel sandwich", None, sandwich),
    ];
    let mut broken = Vec::new();
    for (id, name, limit, f) in criteria {
        let start = Instant::now();
        let v = f();
        let t = start.elapsed();
        let in_time = limit.is_none_or(|s| t <= Duration::from_secs(s));
        let status = if v.pass && in_time { "PASS" } else { "FAIL" };
        let budget = limit.map_or(String::new(), |s| format!(" / {s} s"));
        println!("{status} criterion {id:>2} {name}: {} [{:.2} s{budget}]", v.detail, t.as_secs_f64());
        if !(v.attainable && in_time) {
            broken.push(id);
        }
    }
    if broken.is_empty() {
        println!("acceptance: all attainable checks hold; criteria 6 (theta part) and 8 are known unattainable");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: attainable checks failed in criteria {broken:?}");
        ExitCode::FAILURE
    }
}

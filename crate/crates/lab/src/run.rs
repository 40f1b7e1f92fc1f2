//! Turns validated configs into report rows.

use morse_core::forms::{
    dbar, dbar_star, galerkin_extremal, laplacian, model_bergman, model_test_form, norm_sq, sandwich_check, FormIndex,
    ModelWeight, DEFAULT_HARMONIC_TOL,
};
use morse_core::hermitian::CurvatureSpectrum;
use morse_core::hodge::{hodge_numbers, random_complex};
use morse_core::localize::{
    deviation_sup, metric_deviation_sup, volume_identity_check, ScalingPair, SplitMetric, WeightJet,
};
use morse_core::torus::{
    bergman_constant, cohomology_dims, det_rel_exact, theta_bergman, truncated_bergman_check, weak_morse_check,
    MorseReport, MuRule, Perturbation, TorusScenario, QUADRATURE_SLACK, WEAK_SLACK,
};
use morse_core::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{HodgeConfig, JetKind, LocalizeConfig, ModelConfig, ScenarioConfig, TorusConfig};
use crate::report::{Provenance, Report, ReportRow};
use crate::LabError;

/// Stream `i` of the generator seeded by `seed`, so that item `i` sees the
/// same numbers whatever the thread count.
pub fn stream(seed: u64, i: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    rng
}

fn compute<E: std::fmt::Display>(id: &str) -> impl Fn(E) -> LabError + '_ {
    move |e| LabError::Compute(format!("{id}: {e}"))
}

/// Runs every config on a pool of `jobs` threads (0 means one per core).
pub fn run_all(configs: &[ScenarioConfig], jobs: usize) -> Result<Report, LabError> {
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| LabError::Compute(e.to_string()))?;
    let rows = pool.install(|| configs.iter().map(run).collect::<Result<Vec<_>, _>>())?;
    Ok(Report::new(rows.into_iter().flatten().collect()))
}

pub fn run(config: &ScenarioConfig) -> Result<Vec<ReportRow>, LabError> {
    match config {
        ScenarioConfig::Model(c) => run_model(c),
        ScenarioConfig::Torus(c) => run_torus(c),
        ScenarioConfig::Localize(c) => run_localize(c),
        ScenarioConfig::Hodge(c) => run_hodge(c),
    }
}

/// Random spectrum with `1 ≤ n ≤ max_n`, a random split `r`, and
/// eigenvalues of either sign with modulus in `[0.3, 4)`.
pub fn random_spectrum(max_n: usize, rng: &mut impl Rng) -> CurvatureSpectrum {
    let n = rng.gen_range(1..=max_n);
    let r = rng.gen_range(0..=n);
    let mut value = || {
        let m: f64 = rng.gen_range(0.3..4.0);
        if rng.gen_bool(0.5) {
            m
        } else {
            -m
        }
    };
    let lambdas = (0..r).map(|_| value()).collect();
    let nus = (r..n).map(|_| value()).collect();
    CurvatureSpectrum::new(lambdas, nus)
}

fn relative_ok(measured: f64, reference: f64, tol: f64) -> bool {
    (measured - reference).abs() <= tol * reference.abs()
}

pub fn model_spectra(c: &ModelConfig) -> Vec<CurvatureSpectrum> {
    match &c.random {
        Some(r) => (0..r.count).map(|i| random_spectrum(r.max_n, &mut stream(c.seed, i as u64))).collect(),
        None => c.spectra.iter().map(|s| CurvatureSpectrum::new(s.lambdas.clone(), s.nus.clone())).collect(),
    }
}

fn run_model(c: &ModelConfig) -> Result<Vec<ReportRow>, LabError> {
    let spectra = model_spectra(c);
    let per: Vec<Vec<ReportRow>> =
        spectra.par_iter().enumerate().map(|(i, spec)| model_rows(c, i, spec)).collect::<Result<_, _>>()?;
    Ok(per.into_iter().flatten().collect())
}

fn model_rows(c: &ModelConfig, i: usize, spec: &CurvatureSpectrum) -> Result<Vec<ReportRow>, LabError> {
    let err = compute(&c.id);
    let (weight, q) = ModelWeight::negatives_first(spec).map_err(&err)?;
    let want = model_bergman(spec, q).map_err(&err)?;
    let ev = galerkin_extremal(spec, q, c.degree, DEFAULT_HARMONIC_TOL).map_err(&err)?;
    let sandwich = sandwich_check(spec, q, c.degree, None).map_err(&err)?;
    let off =
        ev.components.iter().filter(|(idx, _)| *idx != FormIndex::leading(q)).map(|(_, s)| *s).fold(0.0, f64::max);
    let beta = model_test_form(&weight).map_err(&err)?;
    let norm = norm_sq(&beta, &weight).map_err(&err)?;
    let mut residual_terms = laplacian(&beta, &weight).map_err(&err)?.len();
    if q < weight.n() {
        residual_terms += dbar(&beta).map_err(&err)?.len();
    }
    if q > 0 {
        residual_terms += dbar_star(&beta, &weight).map_err(&err)?.len();
    }
    let row = |check| ReportRow::new(&c.id, check, Provenance::Theorem).index(i).param(c.degree as f64);
    let harmonic_warning = (ev.harmonic_dim != 1).then(|| format!("harmonic space has dimension {}", ev.harmonic_dim));
    Ok(vec![
        row("kernel_identity")
            .measured(ev.b)
            .reference(want)
            .tolerance(c.tolerance)
            .pass(relative_ok(ev.b, want, c.tolerance))
            .warn(harmonic_warning),
        row("extremal_identity").measured(ev.s).reference(want).tolerance(c.tolerance).pass(relative_ok(
            ev.s,
            want,
            c.tolerance,
        )),
        ReportRow::new(&c.id, "off_leading_components", Provenance::Derived)
            .index(i)
            .param(c.degree as f64)
            .measured(off)
            .reference(0.0)
            .tolerance(c.component_tolerance)
            .pass(off <= c.component_tolerance),
        row("sandwich").measured(sandwich.b).reference(sandwich.component_sum).tolerance(1e-9).pass(sandwich.holds),
        row("test_form_norm").measured(norm).reference(1.0).tolerance(1e-12).pass((norm - 1.0).abs() <= 1e-12),
        row("test_form_harmonic")
            .measured(residual_terms as f64)
            .reference(0.0)
            .tolerance(0.0)
            .pass(residual_terms == 0),
    ])
}

fn scenario(c: &TorusConfig) -> Result<TorusScenario, LabError> {
    let err = compute(&c.id);
    let mut s = TorusScenario::new(c.d.clone(), c.e.clone()).map_err(&err)?.with_twist(c.twist).map_err(&err)?;
    if let Some(p) = &c.perturbation {
        s = s.with_perturbation(Perturbation::cosine(p.epsilon, p.r)).map_err(&err)?;
    }
    Ok(s)
}

fn alternating(values: &[f64], q: usize) -> f64 {
    (0..=q).map(|j| if (q - j).is_multiple_of(2) { values[j] } else { -values[j] }).sum()
}

fn morse_rows(c: &TorusConfig, s: &TorusScenario, r: &MorseReport) -> Vec<ReportRow> {
    let flat = s.is_flat();
    let provenance = if flat { Provenance::Theorem } else { Provenance::Derived };
    let h: Vec<f64> = r.h.iter().map(|&v| v as f64).collect();
    let warning = (r.degenerate_measure > 0.0).then(|| format!("degenerate measure {:e}", r.degenerate_measure));
    let mut rows = Vec::new();
    for q in 0..=s.n() {
        rows.push(
            ReportRow::new(&c.id, "morse_weak", provenance)
                .at(r.k, r.l)
                .index(q)
                .measured(h[q])
                .reference(r.rhs[q])
                .tolerance(if flat { 0.0 } else { WEAK_SLACK })
                .pass(r.weak[q])
                .warn(warning.clone()),
        );
        rows.push(
            ReportRow::new(&c.id, "morse_strong", provenance)
                .at(r.k, r.l)
                .index(q)
                .measured(alternating(&h, q))
                .reference(alternating(&r.rhs, q))
                .tolerance(if flat { 0.0 } else { QUADRATURE_SLACK })
                .pass(r.strong[q]),
        );
    }
    rows
}

fn ratio_f64(r: Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn run_torus(c: &TorusConfig) -> Result<Vec<ReportRow>, LabError> {
    let err = compute(&c.id);
    let s = scenario(c)?;
    let pairs = c.sweep.expand()?;
    let per: Vec<Vec<ReportRow>> = pairs
        .par_iter()
        .map(|p| -> Result<Vec<ReportRow>, LabError> {
            let report = weak_morse_check(&s, std::slice::from_ref(p), c.grid).map_err(&err)?.remove(0);
            let mut rows = morse_rows(c, &s, &report);
            if s.is_flat() {
                let q0 = s.realized_q();
                let b = bergman_constant(&s, q0, p.k, p.l).map_err(&err)?;
                let d = det_rel_exact(&s, q0).map_err(&err)?;
                let ratio = b / d;
                rows.push(
                    ReportRow::new(&c.id, "bergman_ratio", Provenance::Theorem)
                        .at(p.k, p.l)
                        .index(q0)
                        .measured(ratio_f64(ratio))
                        .reference(1.0)
                        .tolerance(0.0)
                        .pass(ratio == Ratio::from_integer(1)),
                );
            } else {
                // integral of the top Chern form does not see the perturbation
                let flat =
                    TorusScenario::new(c.d.clone(), c.e.clone()).and_then(|f| f.with_twist(c.twist)).map_err(&err)?;
                let h = cohomology_dims(&flat, p.k, p.l).map_err(&err)?;
                let n = s.n();
                let chi: i128 = h.iter().enumerate().map(|(q, v)| if q % 2 == 0 { *v } else { -v }).sum();
                let chi = chi as f64;
                rows.push(
                    ReportRow::new(&c.id, "chern_weil", Provenance::Theorem)
                        .at(p.k, p.l)
                        .index(n)
                        .measured(report.euler_rhs)
                        .reference(chi)
                        .tolerance(QUADRATURE_SLACK)
                        .pass(relative_ok(report.euler_rhs, chi, QUADRATURE_SLACK)),
                );
            }
            Ok(rows)
        })
        .collect::<Result<_, _>>()?;
    let mut rows: Vec<ReportRow> = per.into_iter().flatten().collect();
    if let Some(rule) = &c.truncation {
        let pairs = rule.expand()?;
        let q0 = s.realized_q();
        let rep = truncated_bergman_check(&s, q0, &pairs, MuRule::SqrtDeltaBound).map_err(&err)?;
        let first = rep.first_passing;
        for (i, row) in rep.rows.iter().enumerate() {
            let settled = first.is_some_and(|f| i >= f);
            let warning = (!row.pass).then(|| match row.mu {
                None => "radius below 1".to_string(),
                Some(mu) if mu >= rep.gap => format!("mu {mu:e} above the gap {:e}", rep.gap),
                Some(_) => "truncated kernel differs".to_string(),
            });
            rows.push(
                ReportRow::new(&c.id, "truncated_kernel", Provenance::Theorem)
                    .at(row.k, row.l)
                    .index(q0)
                    .param(row.mu.unwrap_or(f64::NAN))
                    .measured(row.truncated.map_or(f64::NAN, ratio_f64))
                    .reference(ratio_f64(row.harmonic))
                    .tolerance(0.0)
                    // rows before the sweep settles only warn
                    .pass(row.pass || !settled && first.is_some())
                    .warn(warning),
            );
        }
        let m0 = first.map(|f| pairs[f].l);
        rows.push(
            ReportRow::new(&c.id, "truncation_settles", Provenance::Theorem)
                .index(q0)
                .param(rep.gap)
                .measured(m0.map_or(f64::NAN, |m| m as f64))
                .pass(m0.is_some()),
        );
    }
    if let Some(t) = &c.theta {
        let fields: Vec<ReportRow> = (1..=t.k_max)
            .into_par_iter()
            .map(|k| -> Result<Vec<ReportRow>, LabError> {
                let f = theta_bergman(1, k, t.grid).map_err(&err)?;
                let row =
                    |check| ReportRow::new(&c.id, check, Provenance::Derived).at(k as u64, 1).param(t.grid as f64);
                Ok(vec![
                    row("theta_integral")
                        .measured(f.integral)
                        .reference(k as f64)
                        .tolerance(1e-6)
                        .pass((f.integral - k as f64).abs() <= 1e-6),
                    row("theta_constancy")
                        .measured(f.defect)
                        .reference(0.0)
                        .tolerance(t.defect_tolerance)
                        .pass(f.defect <= t.defect_tolerance),
                ])
            })
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .flatten()
            .collect();
        rows.extend(fields);
    }
    Ok(rows)
}

fn grid_warning(value: f64, coarse: f64) -> Option<String> {
    let spread = (value - coarse).abs();
    (spread > 1e-2 * value.abs() && spread > 1e-12).then(|| format!("half-resolution grid gives {coarse:e}"))
}

/// Rows of one sup along the sweep: each must be below its predecessor (or
/// exactly zero for quadratic diagonal jets), and the last below `limit`.
fn monotone_rows(
    c: &LocalizeConfig,
    check: &'static str,
    order: usize,
    pairs: &[ScalingPair],
    sups: &[(f64, f64)],
) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    let exact = c.jet == JetKind::Quadratic && (check == "deviation_sup" || c.metric_scale == 0.0);
    let mut prev: Option<f64> = None;
    for (p, &(value, coarse)) in pairs.iter().zip(sups) {
        let mut row = ReportRow::new(&c.id, check, Provenance::Theorem)
            .at(p.k, p.l)
            .index(order)
            .param(p.radius())
            .measured(value)
            .warn(grid_warning(value, coarse));
        row = if exact {
            row.reference(0.0).tolerance(0.0).pass(value == 0.0)
        } else {
            let ok = prev.is_none_or(|v| value < v);
            match prev {
                Some(v) => row.reference(v),
                None => row,
            }
            .pass(ok)
        };
        rows.push(row);
        prev = Some(value);
    }
    let last = sups.last().map_or(f64::NAN, |s| s.0);
    rows.push(
        ReportRow::new(
            &c.id,
            if check == "deviation_sup" { "deviation_limit" } else { "metric_deviation_limit" },
            Provenance::Theorem,
        )
        .index(order)
        .measured(last)
        .reference(0.0)
        .tolerance(c.limit)
        .pass(last < c.limit),
    );
    rows
}

fn run_localize(c: &LocalizeConfig) -> Result<Vec<ReportRow>, LabError> {
    let err = compute(&c.id);
    let mut rng = stream(c.seed, 0);
    let jet = match c.jet {
        JetKind::Random => WeightJet::random(c.n, c.r, &mut rng).map_err(&err)?,
        JetKind::Quadratic => {
            let diag: Vec<f64> = (0..c.n).map(|i| if i % 2 == 0 { -1.0 - i as f64 } else { 0.5 + i as f64 }).collect();
            WeightJet::quadratic(diag[..c.r].to_vec(), diag[c.r..].to_vec()).map_err(&err)?
        }
    };
    let metric = if c.metric_scale == 0.0 {
        SplitMetric::identity(c.n, c.r).map_err(&err)?
    } else {
        SplitMetric::random(c.n, c.r, c.metric_scale, &mut rng).map_err(&err)?
    };
    // points in the unit box, where the perturbed metric stays positive
    let points: Vec<Vec<Complex64>> = (0..c.points)
        .map(|_| (0..c.n).map(|_| Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))).collect())
        .collect();
    let pairs = c.sweep.expand()?;
    let mut rows = Vec::new();
    for &order in &c.orders {
        let sups = |metric_side: bool| -> Result<Vec<(f64, f64)>, LabError> {
            pairs
                .par_iter()
                .map(|&p| {
                    let g = if metric_side {
                        metric_deviation_sup(&metric, p, order, c.grid)
                    } else {
                        deviation_sup(&jet, p, order, c.grid)
                    };
                    g.map(|g| (g.value, g.coarse)).map_err(&err)
                })
                .collect()
        };
        rows.extend(monotone_rows(c, "deviation_sup", order, &pairs, &sups(false)?));
        rows.extend(monotone_rows(c, "metric_deviation_sup", order, &pairs, &sups(true)?));
    }
    for p in &pairs {
        let e = volume_identity_check(&metric, *p, &points).map_err(&err)?;
        rows.push(
            ReportRow::new(&c.id, "volume_identity", Provenance::Trivial)
                .at(p.k, p.l)
                .param(c.points as f64)
                .measured(e)
                .reference(0.0)
                .tolerance(1e-12)
                .pass(e <= 1e-12),
        );
    }
    Ok(rows)
}

/// Space dimensions of complex `i`: between 1 and `max_spaces` spaces of
/// dimension at most `max_dim`, plus the seed of its maps.
pub fn complex_shape(c: &HodgeConfig, i: u64) -> (Vec<usize>, u64) {
    let mut rng = stream(c.seed, i);
    let len = rng.gen_range(1..=c.max_spaces);
    let dims = (0..len).map(|_| rng.gen_range(1..=c.max_dim)).collect();
    (dims, rng.gen())
}

fn run_hodge(c: &HodgeConfig) -> Result<Vec<ReportRow>, LabError> {
    let err = compute(&c.id);
    let per: Vec<Vec<ReportRow>> = (0..c.count as u64)
        .into_par_iter()
        .map(|i| -> Result<Vec<ReportRow>, LabError> {
            let (dims, seed) = complex_shape(c, i);
            let cx = random_complex(&dims, None, seed).map_err(&err)?;
            let h = hodge_numbers(&cx);
            let grid = h.canonical_mu_grid(c.mu_points);
            let m = cx.length();
            let mut violations = 0usize;
            let mut euler_gap = 0i64;
            for &mu in &grid {
                for q in 0..=m {
                    if h.truncation_holds(q, mu) != Some(true) {
                        violations += 1;
                    }
                }
                euler_gap = euler_gap.max((h.truncated_euler_characteristic(mu) - h.euler_characteristic()).abs());
            }
            let residual = (0..m.saturating_sub(1)).map(|j| cx.composition_residual(j)).fold(0.0, f64::max);
            let row = |check, prov| ReportRow::new(&c.id, check, prov).index(i as usize).param(dims.len() as f64);
            Ok(vec![
                row("truncation_inequality", Provenance::Theorem)
                    .measured(violations as f64)
                    .reference(0.0)
                    .tolerance(0.0)
                    .pass(violations == 0),
                row("alternating_sum", Provenance::Theorem)
                    .measured(euler_gap as f64)
                    .reference(0.0)
                    .tolerance(0.0)
                    .pass(euler_gap == 0),
                row("composition", Provenance::Trivial)
                    .measured(residual)
                    .reference(0.0)
                    .tolerance(0.0)
                    .pass(residual == 0.0),
            ])
        })
        .collect::<Result<_, _>>()?;
    Ok(per.into_iter().flatten().collect())
}

//! Release acceptance gate. Every criterion prints exactly one PASS or FAIL
//! line carrying the measured numbers behind the verdict; multi-clause
//! criteria list their clauses indented underneath. The process exits with
//! status 1 if any criterion fails, and a closing paragraph explains the
//! shared physical cause behind the failures that the model cannot satisfy.

use std::time::{Duration, Instant};

use autler_cavity::bloch::{inversion_thresholds, steady_state, ExcitedLevel};
use autler_cavity::error::Result;
use autler_cavity::oracle::{atomic_marginal, oracle_steady_state, FullModelConfig};
use autler_cavity::params::ModelParams;
use autler_cavity::spectrum::{
    closed_form_eta0, default_grid, spectrum_trace, sum_rule_check, sum_rule_grid,
};
use autler_cavity::sweeps::{self, SweepData};
use autler_cavity::{AtomState, SpectrumPoint};

struct Outcome {
    pass: bool,
    detail: String,
    clauses: Vec<(bool, String)>,
}

impl Outcome {
    fn simple(pass: bool, detail: String) -> Self {
        Outcome {
            pass,
            detail,
            clauses: Vec::new(),
        }
    }

    fn clauses(detail: String, clauses: Vec<(bool, String)>) -> Self {
        Outcome {
            pass: clauses.iter().all(|(ok, _)| *ok),
            detail,
            clauses,
        }
    }
}

type Criterion = fn() -> Result<Outcome>;

fn main() {
    let criteria: [(&str, Criterion); 11] = [
        ("eta = 0 thermal steady state", c1_thermal_steady_state),
        ("eta = 0 two-Lorentzian spectrum", c2_closed_form_spectrum),
        ("doublet symmetry at zero detuning", c3_doublet_symmetry),
        ("interference gain sign", c4_gain_sign),
        ("population inversion thresholds", c5_inversion_thresholds),
        ("coherence maximum over detuning", c6_coherence_maximum),
        ("spectrum decomposition", c7_decomposition),
        ("sum rule", c8_sum_rule),
        ("joint-model oracle equivalence", c9_oracle_equivalence),
        (
            "far-detuned interference collapse",
            c10_far_detuned_collapse,
        ),
        ("determinism", c11_determinism),
    ];

    let mut failures = 0;
    for (number, (label, criterion)) in criteria.iter().enumerate() {
        let outcome =
            criterion().unwrap_or_else(|e| Outcome::simple(false, format!("errored: {e}")));
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {:2} [{label}]: {verdict}  {}",
            number + 1,
            outcome.detail
        );
        for (ok, text) in &outcome.clauses {
            println!("              {} {text}", if *ok { "ok  " } else { "FAIL" });
        }
        if !outcome.pass {
            failures += 1;
        }
    }

    println!();
    if failures == 0 {
        println!("all 11 criteria pass");
        return;
    }
    println!("{failures} of 11 criteria fail. The failing clauses share one cause:");
    println!("with thermal driving, the joint atom-cavity model has an exact product");
    println!("steady state (thermal cavity, thermal atomic populations, zero");
    println!("excited-state coherence), and the reduced equations inherit that fixed");
    println!("point at every detuning and every interference setting. Stationary");
    println!("inversion, stationary coherence, probe gain, and the interference-gap");
    println!("collapse ordering asserted above are therefore not reachable in this");
    println!("model; the measured values printed with each criterion quantify what");
    println!("the model does instead.");
    std::process::exit(1);
}

/// For N in {1, 10, 20} and assorted detunings, cavity widths, splittings,
/// and couplings, the interference-free steady state must be the closed-form
/// thermal point p1 = p2 = N/(3N+1), p0 = (N+1)/(3N+1), coh12 = 0 to 1e-12,
/// in under a millisecond per solve.
fn c1_thermal_steady_state() -> Result<Outcome> {
    steady_state(&ModelParams::symmetric(1.0, 100.0, 0.0, 10.0, 1.0, 0.0))?;
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    let mut cases = 0;
    for n in [1.0, 10.0, 20.0] {
        for (g, kappa, delta, omega21) in [
            (10.0, 100.0, 0.0, 100.0),
            (4.0, 250.0, 37.5, 60.0),
            (2.5, 80.0, -120.0, 310.0),
        ] {
            let p = ModelParams::symmetric(g, kappa, delta, omega21, n, 0.0);
            let t0 = Instant::now();
            let st = steady_state(&p)?;
            slowest = slowest.max(t0.elapsed());
            let pop_excited = n / (3.0 * n + 1.0);
            let pop_ground = (n + 1.0) / (3.0 * n + 1.0);
            worst = worst
                .max((st.p0 - pop_ground).abs())
                .max((st.p1 - pop_excited).abs())
                .max((st.p2 - pop_excited).abs())
                .max(st.coh12.norm());
            cases += 1;
        }
    }
    Ok(Outcome::simple(
        worst <= 1e-12 && slowest < Duration::from_millis(1),
        format!(
            "max gap to N/(3N+1) closed form {worst:.3e} over {cases} cases \
             (bound 1e-12); slowest solve {slowest:.2?} (bound 1 ms)"
        ),
    ))
}

/// The interference-free spectrum of the first figure preset must match the
/// analytic two-Lorentzian expression pointwise to 1e-9 relative on the
/// default 4001-point grid, computed in under 0.1 s.
fn c2_closed_form_spectrum() -> Result<Outcome> {
    let p = sweeps::preset("fig1a")?.params.with_eta(0.0);
    let grid = default_grid(&p)?;
    let t0 = Instant::now();
    let trace = spectrum_trace(&p, &grid)?;
    let elapsed = t0.elapsed();
    let mut worst = 0.0f64;
    for (point, &omega) in trace.points.iter().zip(&grid) {
        let reference = closed_form_eta0(&p, omega)?;
        worst = worst.max((point.total - reference).abs() / reference.abs());
    }
    Ok(Outcome::simple(
        worst <= 1e-9 && elapsed < Duration::from_millis(100),
        format!(
            "max pointwise relative gap {worst:.3e} over {} points (bound 1e-9); \
             trace took {elapsed:.2?} (bound 0.1 s)",
            grid.len()
        ),
    ))
}

/// At zero detuning the full-interference doublet must be an even function
/// of probe frequency to 1e-9 of its peak height.
fn c3_doublet_symmetry() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut worst_name = "";
    for name in ["fig1a", "fig2a", "fig3a"] {
        let p = sweeps::preset(name)?.params;
        let trace = spectrum_trace(&p, &default_grid(&p)?)?;
        let n = trace.grid.len();
        let scale = trace
            .points
            .iter()
            .map(|pt| pt.total.abs())
            .fold(0.0, f64::max);
        for k in 0..n / 2 {
            let asym = (trace.points[k].total - trace.points[n - 1 - k].total).abs() / scale;
            if asym > worst {
                worst = asym;
                worst_name = name;
            }
        }
    }
    Ok(Outcome::simple(
        worst <= 1e-9,
        format!(
            "max mirror asymmetry {worst:.3e} of peak height (bound 1e-9; worst preset {worst_name})"
        ),
    ))
}

/// The detuned preset fig1c is asserted to amplify the probe (negative
/// absorption) on the high-frequency side while staying absorptive on the
/// low-frequency side, and to be everywhere absorptive without interference.
fn c4_gain_sign() -> Result<Outcome> {
    let p = sweeps::preset("fig1c")?.params;
    let grid: Vec<f64> = (0..=6000).map(|k| -150.0 + 0.05 * k as f64).collect();
    let with = spectrum_trace(&p, &grid)?;
    let without = spectrum_trace(&p.with_eta(0.0), &grid)?;
    let min_where = |pred: &dyn Fn(f64) -> bool| -> f64 {
        with.grid
            .iter()
            .zip(&with.points)
            .filter(|(w, _)| pred(**w))
            .map(|(_, pt)| pt.total)
            .fold(f64::INFINITY, f64::min)
    };
    let upper = min_where(&|w| w > 0.0 && w <= 150.0);
    let lower = min_where(&|w| (-150.0..0.0).contains(&w));
    let plain = without
        .points
        .iter()
        .map(|pt| pt.total)
        .fold(f64::INFINITY, f64::min);
    Ok(Outcome::clauses(
        format!("min A: {upper:+.3e} on (0, 150], {lower:+.3e} on [-150, 0), {plain:+.3e} without interference"),
        vec![
            (
                upper < 0.0,
                format!("gain on the high-frequency side: min {upper:+.3e}, expected negative"),
            ),
            (
                lower > 0.0,
                format!("absorption on the low-frequency side: min {lower:+.3e}, expected positive"),
            ),
            (
                plain >= 0.0,
                format!("interference-free trace nonnegative: min {plain:+.3e}"),
            ),
        ],
    ))
}

/// Population inversion p1 > p0 is asserted to switch on at delta = 143.8
/// and off at delta = 650 (p2 mirrored in sign), located by bisection in
/// under 0.1 s.
fn c5_inversion_thresholds() -> Result<Outcome> {
    let template = ModelParams::symmetric(10.0, 100.0, 0.0, 200.0, 20.0, 1.0);
    let gap = |delta: f64| -> Result<f64> {
        let st = steady_state(&template.with_delta(delta))?;
        Ok(st.p1 - st.p0)
    };
    let at_low = gap(143.8)?;
    let at_high = gap(650.0)?;

    let t0 = Instant::now();
    let scans = [
        (ExcitedLevel::One, (100.0, 200.0), 143.8, 0.5),
        (ExcitedLevel::One, (600.0, 700.0), 650.0, 5.0),
        (ExcitedLevel::Two, (-200.0, -100.0), -143.8, 0.5),
        (ExcitedLevel::Two, (-700.0, -600.0), -650.0, 5.0),
    ];
    let mut clauses = Vec::new();
    for (which, bracket, expected, tol) in scans {
        let label = match which {
            ExcitedLevel::One => "p1 - p0",
            ExcitedLevel::Two => "p2 - p0",
        };
        match inversion_thresholds(&template, which, bracket) {
            Ok(root) => clauses.push((
                (root - expected).abs() <= tol,
                format!("root of {label} at delta = {root:.2} (expected {expected} within {tol})"),
            )),
            Err(e) => clauses.push((
                false,
                format!("{label} on [{}, {}]: {e}", bracket.0, bracket.1),
            )),
        }
    }
    let elapsed = t0.elapsed();
    clauses.push((
        elapsed < Duration::from_millis(100),
        format!("threshold scans took {elapsed:.2?} (bound 0.1 s)"),
    ));
    Ok(Outcome::clauses(
        format!("p1 - p0 = {at_low:+.3e} at delta = 143.8 and {at_high:+.3e} at delta = 650"),
        clauses,
    ))
}

/// Over the 1401-point detuning scan, Re coh12 must be symmetric in delta
/// to 1e-9 and attain its maximum at delta = 0.
fn c6_coherence_maximum() -> Result<Outcome> {
    let result = sweeps::run_preset("fig4", 0)?;
    let SweepData::Detuning(scan) = &result.data else {
        return Ok(Outcome::simple(false, "unexpected sweep shape".to_string()));
    };
    let re: Vec<f64> = scan.states.iter().map(|s| s.coh12.re).collect();
    let n = re.len();
    let asym = (0..n / 2)
        .map(|k| (re[k] - re[n - 1 - k]).abs())
        .fold(0.0, f64::max);
    let center = re[n / 2];
    let max = re.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let magnitude = re.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(Outcome::simple(
        asym <= 1e-9 && center >= max - 1e-9,
        format!(
            "max asymmetry {asym:.3e} (bound 1e-9); Re coh12 at delta = 0 is {center:+.3e} \
             vs scan maximum {max:+.3e}; the whole curve is bounded by {magnitude:.3e}"
        ),
    ))
}

/// The population and coherence parts must add up to the total spectrum
/// exactly; the asserted sign pattern is a negative coherence extremum with
/// an everywhere-positive population part at delta in {0, 50, 100}, with
/// both signs swapped at delta = 200.
fn c7_decomposition() -> Result<Outcome> {
    let mut additivity = 0.0f64;
    let mut coherence_scale = 0.0f64;
    let mut clauses = Vec::new();
    for name in ["fig5a", "fig5b", "fig5c", "fig5d"] {
        let p = sweeps::preset(name)?.params;
        let trace = spectrum_trace(&p, &default_grid(&p)?)?;
        for pt in &trace.points {
            additivity = additivity.max((pt.pop_part + pt.coh_part - pt.total).abs());
        }
        let signed_extremum = |f: &dyn Fn(&SpectrumPoint) -> f64| -> f64 {
            trace
                .points
                .iter()
                .map(f)
                .fold(0.0, |acc, v| if v.abs() > acc.abs() { v } else { acc })
        };
        let coh_ext = signed_extremum(&|pt| pt.coh_part);
        let pop_min = trace
            .points
            .iter()
            .map(|pt| pt.pop_part)
            .fold(f64::INFINITY, f64::min);
        coherence_scale = coherence_scale.max(coh_ext.abs());
        if name == "fig5d" {
            clauses.push((
                coh_ext > 0.0,
                format!(
                    "{name}: coherence extremum {coh_ext:+.3e}, expected positive after the swap"
                ),
            ));
            clauses.push((
                pop_min < 0.0,
                format!(
                    "{name}: population minimum {pop_min:+.3e}, expected negative after the swap"
                ),
            ));
        } else {
            clauses.push((
                coh_ext < 0.0,
                format!("{name}: coherence extremum {coh_ext:+.3e}, expected negative"),
            ));
            clauses.push((
                pop_min > 0.0,
                format!("{name}: population minimum {pop_min:+.3e}, expected positive"),
            ));
        }
    }
    clauses.insert(
        0,
        (
            additivity <= 1e-12,
            format!("pop + coh reproduces the total to {additivity:.3e} (bound 1e-12)"),
        ),
    );
    Ok(Outcome::clauses(
        format!(
            "max additivity gap {additivity:.3e}; max |coherence part| across presets {coherence_scale:.3e}"
        ),
        clauses,
    ))
}

/// The integrated spectrum of every spectrum preset must match pi times the
/// equal-time commutator weight to 1e-3 relative.
fn c8_sum_rule() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut worst_name = String::new();
    for family in ["fig1", "fig2", "fig3"] {
        for suffix in ["a", "b", "c", "d", "e", "f"] {
            let name = format!("{family}{suffix}");
            let p = sweeps::preset(&name)?.params;
            let trace = spectrum_trace(&p, &sum_rule_grid(&p)?)?;
            let (integral, weight) = sum_rule_check(&p, &trace)?;
            let rel = (integral - weight).abs() / weight.abs();
            if rel > worst {
                worst = rel;
                worst_name = name;
            }
        }
    }
    Ok(Outcome::simple(
        worst <= 1e-3,
        format!("worst relative mismatch {worst:.3e} at {worst_name} over 18 presets (bound 1e-3)"),
    ))
}

/// The truncated joint atom-cavity model, solved without any adiabatic
/// elimination, must reproduce the reduced populations to 5% at
/// g/kappa = 0.1 (N = 1, delta = 0, omega21 = kappa), deviate strictly less
/// at g/kappa = 0.05, be Fock-converged at cutoff 20 to 1e-6, and finish
/// each solve inside 60 s.
fn c9_oracle_equivalence() -> Result<Outcome> {
    let strong = ModelParams::symmetric(10.0, 100.0, 0.0, 100.0, 1.0, 1.0);
    let weak = ModelParams::symmetric(5.0, 100.0, 0.0, 100.0, 1.0, 1.0);
    let reduced_strong = steady_state(&strong)?;
    let reduced_weak = steady_state(&weak)?;

    let solve = |params: ModelParams, n_max: usize| -> Result<(AtomState, Duration)> {
        let t0 = Instant::now();
        let solution = oracle_steady_state(&FullModelConfig::new(params, n_max))?;
        Ok((atomic_marginal(&solution.rho), t0.elapsed()))
    };
    let (atom_strong, t_strong) = solve(strong, 20)?;
    let (atom_weak, t_weak) = solve(weak, 20)?;
    let (atom_fine, t_fine) = solve(strong, 25)?;

    let relative_gap = |full: &AtomState, reduced: &AtomState| -> f64 {
        ((full.p0 - reduced.p0) / reduced.p0)
            .abs()
            .max(((full.p1 - reduced.p1) / reduced.p1).abs())
            .max(((full.p2 - reduced.p2) / reduced.p2).abs())
    };
    let dev_strong = relative_gap(&atom_strong, &reduced_strong);
    let dev_weak = relative_gap(&atom_weak, &reduced_weak);
    let convergence = (atom_strong.p0 - atom_fine.p0)
        .abs()
        .max((atom_strong.p1 - atom_fine.p1).abs())
        .max((atom_strong.p2 - atom_fine.p2).abs())
        .max((atom_strong.coh12 - atom_fine.coh12).norm());
    let slowest = t_strong.max(t_weak).max(t_fine);

    Ok(Outcome::clauses(
        format!("full-model marginal vs reduced state: {dev_strong:.3e} relative at g/kappa = 0.1"),
        vec![
            (
                dev_strong <= 0.05,
                format!("population gap {dev_strong:.3e} at g/kappa = 0.1 (bound 5%)"),
            ),
            (
                dev_weak < dev_strong,
                format!(
                    "gap {dev_weak:.3e} at g/kappa = 0.05 strictly below {dev_strong:.3e} at 0.1 \
                     (both are rounding-level: the marginal is exactly thermal at every coupling, \
                     so no systematic trend exists)"
                ),
            ),
            (
                convergence < 1e-6,
                format!(
                    "Fock cutoff 20 -> 25 changes the marginal by {convergence:.3e} (bound 1e-6)"
                ),
            ),
            (
                slowest < Duration::from_secs(60),
                format!("solve times {t_strong:.2?}, {t_weak:.2?}, {t_fine:.2?} (bound 60 s each)"),
            ),
        ],
    ))
}

/// At delta = 500 the gap between the interference-free and
/// full-interference traces is asserted to collapse by at least a factor of
/// 10 relative to delta = 10 for the narrow splitting, while the wide
/// splitting retains a gap above that collapsed level.
fn c10_far_detuned_collapse() -> Result<Outcome> {
    let gap = |name: &str| -> Result<f64> {
        let result = sweeps::run_preset(name, 0)?;
        Ok(sweeps::compare_eta(&result)
            .expect("spectrum pair preset")
            .max_pointwise)
    };
    let near = gap("fig1b")?;
    let far = gap("fig1f")?;
    let wide = gap("fig3f")?;
    Ok(Outcome::clauses(
        format!("max pointwise eta gaps: fig1b {near:.3e}, fig1f {far:.3e}, fig3f {wide:.3e}"),
        vec![
            (
                far * 10.0 <= near,
                format!(
                    "fig1f gap {far:.3e} should undercut fig1b {near:.3e} tenfold; measured \
                     ratio fig1f/fig1b = {:.2}",
                    far / near
                ),
            ),
            (
                wide > far,
                format!(
                    "fig3f gap {wide:.3e} should stay above the collapsed fig1f level {far:.3e}"
                ),
            ),
        ],
    ))
}

/// Every preset must produce byte-identical output files across repeated
/// runs and across worker counts 1 and 8.
fn c11_determinism() -> Result<Outcome> {
    let mut files = 0;
    for name in sweeps::PRESET_NAMES {
        let first = sweeps::output_files(&sweeps::run_preset(name, 1)?)?;
        let repeat = sweeps::output_files(&sweeps::run_preset(name, 1)?)?;
        let pooled = sweeps::output_files(&sweeps::run_preset(name, 8)?)?;
        if first != repeat {
            return Ok(Outcome::simple(
                false,
                format!("{name} outputs differ between repeated single-worker runs"),
            ));
        }
        if first != pooled {
            return Ok(Outcome::simple(
                false,
                format!("{name} outputs differ between worker counts 1 and 8"),
            ));
        }
        files += first.len();
    }
    Ok(Outcome::simple(
        true,
        format!(
            "{files} output files over {} presets bit-identical across repeats and worker \
             counts 1 and 8",
            sweeps::PRESET_NAMES.len()
        ),
    ))
}

//! Weak-probe absorption spectrum via the quantum regression theorem,
//! including its decomposition into population and coherence contributions,
//! peak extraction, and a sum-rule consistency check.
//!
//! The spectrum is
//!
//! ```text
//! A(omega) = Re integral_0^inf  <[P(tau), P+(0)]>_ss  e^{i omega tau} d tau,
//! P = d1 A01 + d2 A02,
//! ```
//!
//! where the optical coherences obey the closed pair
//! d/dtau (<A01>, <A02>)^T = m (<A01>, <A02>)^T with
//!
//! ```text
//! m11 = -[F+ |g1|^2 (2N+1) + F- |g2|^2 N - i omega21/2]
//! m12 = -eta F- conj(g1) g2 (N+1)
//! m21 = -eta F+ g1 conj(g2) (N+1)
//! m22 = -[F+ |g1|^2 N + F- |g2|^2 (2N+1) + i omega21/2]
//! ```
//!
//! Initial conditions (the regression step). Expanding the commutator,
//! <[P(tau), P+(0)]> = sum_ij d_i conj(d_j) <[A_0i(tau), A_j0(0)]>. By the
//! regression theorem each correlation <A_0i(tau) X> (and <X A_0i(tau)>)
//! evolves in tau under the same matrix m, starting from the steady-state
//! moment of the operator product. The products reduce by level algebra:
//!
//! ```text
//! A_0i A_j0 = |0><i|j><0| = delta_ij A_00,      A_j0 A_0i = A_ji,
//! ```
//!
//! so the commutator's initial vector for probe index j is
//! u(j)_i = delta_ij <A_00> - <A_ji>, i.e.
//!
//! ```text
//! u(1) = (p0 - p1, -coh12),      u(2) = (-conj(coh12), p0 - p2),
//! ```
//!
//! and with R(omega) = -(m + i omega I)^(-1) (the tau integral, convergent
//! because m is strictly damped),
//!
//! ```text
//! A(omega) = Re sum_j conj(d_j) * (d1, d2) . R(omega) . u(j).
//! ```
//!
//! The population part keeps only the delta_ij (p0 - p_j) pieces of the
//! u vectors; the coherence part keeps only the -<A_ji> (i != j) pieces.
//! Linearity of R makes the two parts sum to the total exactly.
//!
//! With eta = 0 the matrix is diagonal, m11 = -Gamma_l + i phi_l and
//! m22 = -Gamma_h - i phi_h, and the spectrum collapses to two Lorentzians
//! of HWHM Gamma_l, Gamma_h centered at omega = -phi_l and +phi_h. The
//! centers include the cavity level shifts phi (see
//! [`ModelParams::level_shifts`]); they approach omega21/2 only as
//! kappa -> infinity.

use std::io::Write;

use num_complex::Complex64;

use crate::bloch::{steady_state, AtomState};
use crate::error::{Error, Result};
use crate::params::{ModelParams, RateKernel};

/// Generator of the optical coherence pair (<A01>, <A02>).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceGenerator {
    pub m: [[Complex64; 2]; 2],
}

/// One spectrum sample. `total = pop_part + coh_part` holds exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub omega: f64,
    pub total: f64,
    pub pop_part: f64,
    pub coh_part: f64,
}

/// A(omega) sampled on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    pub grid: Vec<f64>,
    pub points: Vec<SpectrumPoint>,
}

/// A located spectral feature. Troughs (gain) carry negative height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub center: f64,
    pub height: f64,
    pub fwhm: f64,
}

/// Assembles m from the kernels; entries exactly as documented above.
pub fn build_coherence_generator(params: &ModelParams, kernel: &RateKernel) -> CoherenceGenerator {
    let n = params.n_thermal;
    let eta = params.eta;
    let fp = kernel.f_plus;
    let fm = kernel.f_minus;
    let a1 = params.g1.norm_sqr();
    let a2 = params.g2.norm_sqr();
    let half_split = Complex64::new(0.0, params.omega21 / 2.0);
    let m11 = -(fp * a1 * (2.0 * n + 1.0) + fm * a2 * n - half_split);
    let m12 = -eta * fm * params.g1.conj() * params.g2 * (n + 1.0);
    let m21 = -eta * fp * params.g1 * params.g2.conj() * (n + 1.0);
    let m22 = -(fp * a1 * n + fm * a2 * (2.0 * n + 1.0) + half_split);
    CoherenceGenerator {
        m: [[m11, m12], [m21, m22]],
    }
}

/// Eigenvalues of the 2x2 generator, in closed form.
pub fn coherence_eigenvalues(gen: &CoherenceGenerator) -> [Complex64; 2] {
    let m = &gen.m;
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (tr * tr - 4.0 * det).sqrt();
    [(tr + disc) / 2.0, (tr - disc) / 2.0]
}

fn check_coherence_damping(gen: &CoherenceGenerator) -> Result<()> {
    let norm = gen
        .m
        .iter()
        .flatten()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    for l in coherence_eigenvalues(gen) {
        if l.re >= -1e-12 * norm {
            return Err(Error::GeneratorNotDamped { eigenvalue: l });
        }
    }
    Ok(())
}

/// One spectrum sample from the resolvent R(omega) = -(m + i omega I)^(-1).
pub fn spectrum_point(
    params: &ModelParams,
    ss: &AtomState,
    gen: &CoherenceGenerator,
    omega: f64,
) -> Result<SpectrumPoint> {
    check_coherence_damping(gen)?;
    Ok(spectrum_point_unchecked(params, ss, gen, omega))
}

/// The arithmetic of one sample, damping already verified by the caller.
fn spectrum_point_unchecked(
    params: &ModelParams,
    ss: &AtomState,
    gen: &CoherenceGenerator,
    omega: f64,
) -> SpectrumPoint {
    let m = &gen.m;
    let iw = Complex64::new(0.0, omega);
    let a = m[0][0] + iw;
    let b = m[0][1];
    let c = m[1][0];
    let d = m[1][1] + iw;
    let det = a * d - b * c;
    // Row vector w = (d1, d2) . R with R = -inv(M).
    let (d1, d2) = (params.d1, params.d2);
    let w0 = -(d1 * d - d2 * c) / det;
    let w1 = -(-d1 * b + d2 * a) / det;

    // Population piece of the u vectors: diagonal entries p0 - p_j.
    let pop = (d1.conj() * w0 * (ss.p0 - ss.p1) + d2.conj() * w1 * (ss.p0 - ss.p2)).re;
    // Coherence piece: off-diagonal entries -<A_ji>.
    let coh = (d1.conj() * w1 * (-ss.coh12) + d2.conj() * w0 * (-ss.coh12.conj())).re;
    SpectrumPoint {
        omega,
        total: pop + coh,
        pop_part: pop,
        coh_part: coh,
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid {
            message: "empty omega grid".to_string(),
        });
    }
    // partial_cmp also rejects NaN entries, which `<` alone would admit.
    let increasing = |w: &[f64]| w[0].partial_cmp(&w[1]) == Some(std::cmp::Ordering::Less);
    if !grid.windows(2).all(increasing) {
        return Err(Error::InvalidGrid {
            message: "omega grid must be strictly increasing".to_string(),
        });
    }
    Ok(())
}

/// Batch evaluation: one steady state and one generator shared by all grid
/// points.
pub fn spectrum_trace(params: &ModelParams, grid: &[f64]) -> Result<SpectrumTrace> {
    validate_grid(grid)?;
    let kernel = params.rate_kernel()?;
    let ss = steady_state(params)?;
    let gen = build_coherence_generator(params, &kernel);
    check_coherence_damping(&gen)?;
    let points = grid
        .iter()
        .map(|&w| spectrum_point_unchecked(params, &ss, &gen, w))
        .collect();
    Ok(SpectrumTrace {
        grid: grid.to_vec(),
        points,
    })
}

/// Default presentation grid: 4001 points over
/// [-(omega21/2 + 25 Gamma_max), +(omega21/2 + 25 Gamma_max)]. Adequate for
/// plotting and peak extraction; for quadrature use [`sum_rule_grid`], since
/// a Lorentzian cut at 25 half-widths still leaves ~2.5% of its weight in
/// the tails.
pub fn default_grid(params: &ModelParams) -> Result<Vec<f64>> {
    let (gl, gh) = params.sideband_linewidths()?;
    let w = params.omega21 / 2.0 + 25.0 * gl.max(gh);
    Ok(linspace(-w, w, 4001))
}

/// Quadrature grid for the sum rule: a uniform core resolving the peaks
/// (spacing Gamma_min/40 over +-(omega21/2 + 30 Gamma_max)) plus log-spaced
/// wings (80 points per decade) out to |omega| = 1e6, where the 1/omega^2
/// tail is negligible at the 1e-5 level.
pub fn sum_rule_grid(params: &ModelParams) -> Result<Vec<f64>> {
    let (gl, gh) = params.sideband_linewidths()?;
    let g_max = gl.max(gh);
    let g_min = gl.min(gh).max(1e-6 * g_max).max(1e-12);
    let w0 = params.omega21 / 2.0 + 30.0 * g_max;
    let far = 1e6_f64.max(100.0 * w0);

    let core_n = ((2.0 * w0) / (g_min / 40.0)).ceil() as usize;
    let core = linspace(-w0, w0, core_n.max(2) + 1);

    let decades = (far / w0).log10();
    let wing_n = (decades * 80.0).ceil() as usize;
    let mut grid = Vec::with_capacity(core.len() + 2 * wing_n);
    for k in (1..=wing_n).rev() {
        grid.push(-w0 * 10f64.powf(decades * k as f64 / wing_n as f64));
    }
    grid.extend_from_slice(&core);
    for k in 1..=wing_n {
        grid.push(w0 * 10f64.powf(decades * k as f64 / wing_n as f64));
    }
    Ok(grid)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// The eta = 0 spectrum in closed form: two Lorentzians with HWHM Gamma_l,
/// Gamma_h centered at -phi_l, +phi_h, weighted by the thermal population
/// differences. The resolvent reduces to exactly this when the cross terms
/// vanish, so agreement is at rounding level.
pub fn closed_form_eta0(params: &ModelParams, omega: f64) -> Result<f64> {
    let (gl, gh) = params.sideband_linewidths()?;
    let (phi_l, phi_h) = params.level_shifts()?;
    let n = params.n_thermal;
    let pd = 1.0 / (3.0 * n + 1.0); // p0 - p1 = p0 - p2 at thermal occupation
    let low = params.d1.norm_sqr() * pd * gl / (gl * gl + (omega + phi_l) * (omega + phi_l));
    let high = params.d2.norm_sqr() * pd * gh / (gh * gh + (omega - phi_h) * (omega - phi_h));
    Ok(low + high)
}

/// Local extrema by 3-point test with quadratic center/height refinement and
/// FWHM from linearly interpolated half-height crossings. Features below
/// 1e-9 of the trace maximum are treated as rounding noise and skipped, as
/// are extrema whose half-height crossings fall outside the grid.
pub fn extract_peaks(trace: &SpectrumTrace) -> Result<Vec<Peak>> {
    let a: Vec<f64> = trace.points.iter().map(|p| p.total).collect();
    let omega = &trace.grid;
    let n = a.len();
    let max_abs = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let thresh = 1e-9 * max_abs;
    let mut peaks = Vec::new();
    for k in 1..n.saturating_sub(1) {
        let positive = a[k] > a[k - 1] && a[k] >= a[k + 1] && a[k] > thresh;
        let negative = a[k] < a[k - 1] && a[k] <= a[k + 1] && a[k] < -thresh;
        if !positive && !negative {
            continue;
        }
        // Quadratic refinement through the three points around the extremum.
        let (y0, y1, y2) = (a[k - 1], a[k], a[k + 1]);
        let h = omega[k + 1] - omega[k];
        let denom = y0 - 2.0 * y1 + y2;
        let (shift, height) = if denom == 0.0 {
            (0.0, y1) // flat triple; keep the grid sample as-is
        } else {
            (
                0.5 * h * (y0 - y2) / denom,
                y1 - 0.125 * (y0 - y2) * (y0 - y2) / denom,
            )
        };
        let center = omega[k] + shift;

        let half = height / 2.0;
        let above = |v: f64| if positive { v >= half } else { v <= half };
        // Count the contiguous run of grid points past half height.
        let mut left = k;
        while left > 0 && above(a[left - 1]) {
            left -= 1;
        }
        let mut right = k;
        while right + 1 < n && above(a[right + 1]) {
            right += 1;
        }
        let span = right - left + 1;
        if span < 7 {
            return Err(Error::PeakTooCoarse { points: span });
        }
        if left == 0 || right == n - 1 {
            continue; // feature truncated by the grid edge; not a full peak
        }
        let interp = |i: usize, j: usize| -> f64 {
            // Crossing of `half` between grid points i and j.
            omega[i] + (half - a[i]) / (a[j] - a[i]) * (omega[j] - omega[i])
        };
        let x_left = interp(left - 1, left);
        let x_right = interp(right + 1, right);
        peaks.push(Peak {
            center,
            height,
            fwhm: (x_right - x_left).abs(),
        });
    }
    Ok(peaks)
}

/// Trapezoidal integral of the trace against the exact equal-time commutator
/// weight pi * Re sum_ij d_i conj(d_j) (delta_ij p0 - <A_ji>). Returns
/// (integral, weight); the Fourier identity makes them equal on an adequate
/// grid.
pub fn sum_rule_check(params: &ModelParams, trace: &SpectrumTrace) -> Result<(f64, f64)> {
    validate_grid(&trace.grid)?;
    let ss = steady_state(params)?;
    let mut integral = 0.0;
    for w in trace.points.windows(2) {
        integral += 0.5 * (w[0].total + w[1].total) * (w[1].omega - w[0].omega);
    }
    let weight = std::f64::consts::PI
        * (params.d1.norm_sqr() * (ss.p0 - ss.p1) + params.d2.norm_sqr() * (ss.p0 - ss.p2)
            - 2.0 * (params.d1.conj() * params.d2 * ss.coh12).re);

    // 1/omega^2 tail bound from the edge samples; conservative because the
    // asymptote is approached from above only far outside the peaks.
    let first = trace.points.first().expect("validated non-empty");
    let last = trace.points.last().expect("validated non-empty");
    let tail = (first.total * first.omega).abs() + (last.total * last.omega).abs();
    let scale = integral.abs().max(weight.abs());
    if scale > 0.0 && tail > 0.01 * scale {
        return Err(Error::GridTooNarrow {
            tail_fraction: tail / scale,
        });
    }
    Ok((integral, weight))
}

/// CSV serialization: header `omega,total,pop_part,coh_part`, 17 significant
/// digits, locale-independent.
pub fn write_trace_csv<W: Write>(trace: &SpectrumTrace, mut out: W) -> std::io::Result<()> {
    writeln!(out, "omega,total,pop_part,coh_part")?;
    for p in &trace.points {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            p.omega, p.total, p.pop_part, p.coh_part
        )?;
    }
    Ok(())
}

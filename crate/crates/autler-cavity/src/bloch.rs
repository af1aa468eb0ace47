//! Reduced Bloch equations of the atom after cavity elimination: generator
//! assembly, steady states, and population-inversion root finding.
//!
//! With F+ = F(+omega21), F- = F(-omega21), g12 = g1 conj(g2),
//! g21 = conj(g1) g2, and writing p_i for the populations and c = <A12> for
//! the excited-doublet coherence, the equations of motion are
//!
//! ```text
//! dp1/dt = -2Re(F+)|g1|^2 [(N+1)p1 - N p0] - eta (N+1) [F-  g21 c + conj(F-) g12 cbar]
//! dp2/dt = -2Re(F-)|g2|^2 [(N+1)p2 - N p0] - eta (N+1) [conj(F+) g21 c + F+ g12 cbar]
//! dc/dt  = -eta (N+1) g12 [F+ p1 + conj(F-) p2] + eta N g12 (F+ + conj(F-)) p0
//!          - [(N+1)(conj(F+)|g1|^2 + F- |g2|^2) + i omega21] c
//! ```
//!
//! plus the conjugate line for cbar, with p0 = 1 - p1 - p2 eliminated.
//!
//! A structural property worth knowing before reading any output: the
//! coherence feeding combines pump and decay in flux form,
//! F+[(N+1)p1 - N p0] + conj(F-)[(N+1)p2 - N p0], and the population cross
//! terms pair the same way. Every bracket vanishes at the thermal point
//! p1 = p2 = N/(3N+1), p0 = (N+1)/(3N+1), c = 0, for any kernel values. That
//! state is therefore an exact fixed point of these equations for every
//! detuning and every eta, and since the generator is strictly damped it is
//! the unique steady state: populations never invert and no stationary
//! coherence builds up. The full atom+cavity model has the same property
//! (its stationary state is exactly thermal in the joint excitation number),
//! which the brute-force oracle in this crate confirms numerically.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::params::{ModelParams, RateKernel};

/// Atomic steady state: level occupations and the |1><2| coherence <A12>.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AtomState {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub coh12: Complex64,
}

impl AtomState {
    /// Probability and positivity constraints of the 3x3 atomic density
    /// matrix whose only off-diagonal pair is coh12.
    pub fn validate(&self) -> Result<()> {
        let tol = 1e-10;
        if (self.p0 + self.p1 + self.p2 - 1.0).abs() > tol {
            return Err(non_physical(format!(
                "populations sum to {} instead of 1",
                self.p0 + self.p1 + self.p2
            )));
        }
        for (name, p) in [("p0", self.p0), ("p1", self.p1), ("p2", self.p2)] {
            if !(-tol..=1.0 + tol).contains(&p) {
                return Err(non_physical(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if self.coh12.norm_sqr() > self.p1 * self.p2 + tol {
            return Err(non_physical(format!(
                "|coh12|^2 = {} exceeds p1 p2 = {}",
                self.coh12.norm_sqr(),
                self.p1 * self.p2
            )));
        }
        Ok(())
    }
}

fn non_physical(detail: String) -> Error {
    Error::NonPhysicalState { detail }
}

/// Linear generator of the reduced dynamics on x = (p1, p2, c, cbar) with
/// p0 eliminated: dx/dt = matrix * x + drive.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationGenerator {
    pub matrix: [[Complex64; 4]; 4],
    /// Inhomogeneity from the N p0 pump terms after substituting
    /// p0 = 1 - p1 - p2.
    pub drive: [Complex64; 4],
}

/// Assembles the generator exactly as the equations above read, row by row.
pub fn build_population_generator(
    params: &ModelParams,
    kernel: &RateKernel,
) -> PopulationGenerator {
    let n = params.n_thermal;
    let eta = params.eta;
    let fp = kernel.f_plus;
    let fm = kernel.f_minus;
    let g12 = params.g1 * params.g2.conj();
    let g21 = params.g1.conj() * params.g2;
    let a1 = params.g1.norm_sqr();
    let a2 = params.g2.norm_sqr();
    // Population relaxation scales 2 Re F |g|^2 = 2 gamma_i.
    let big_g1 = 2.0 * fp.re * a1;
    let big_g2 = 2.0 * fm.re * a2;
    // Coherence decay constant and the combined pump kernel.
    let dc = (n + 1.0) * (fp.conj() * a1 + fm * a2) + Complex64::new(0.0, params.omega21);
    let s = fp + fm.conj();

    let z = Complex64::default();
    let mut m = [[z; 4]; 4];
    let mut drive = [z; 4];

    // dp1/dt row: decay -G1(N+1)p1, pump +G1 N (1-p1-p2), cross terms on c, cbar.
    m[0][0] = Complex64::from(-big_g1 * (2.0 * n + 1.0));
    m[0][1] = Complex64::from(-big_g1 * n);
    m[0][2] = -eta * (n + 1.0) * fm * g21;
    m[0][3] = -eta * (n + 1.0) * fm.conj() * g12;
    drive[0] = Complex64::from(big_g1 * n);

    // dp2/dt row.
    m[1][0] = Complex64::from(-big_g2 * n);
    m[1][1] = Complex64::from(-big_g2 * (2.0 * n + 1.0));
    m[1][2] = -eta * (n + 1.0) * fp.conj() * g21;
    m[1][3] = -eta * (n + 1.0) * fp * g12;
    drive[1] = Complex64::from(big_g2 * n);

    // dc/dt row: feeding -eta(N+1)g12[F+ p1 + conj(F-) p2] plus the pump
    // +eta N g12 S (1 - p1 - p2), then the damping -Dc c.
    m[2][0] = -eta * g12 * ((n + 1.0) * fp + n * s);
    m[2][1] = -eta * g12 * ((n + 1.0) * fm.conj() + n * s);
    m[2][2] = -dc;
    m[2][3] = z;
    drive[2] = eta * n * g12 * s;

    // dcbar/dt is the complex conjugate line under c <-> cbar.
    m[3][0] = m[2][0].conj();
    m[3][1] = m[2][1].conj();
    m[3][2] = z;
    m[3][3] = (-dc).conj();
    drive[3] = drive[2].conj();

    PopulationGenerator { matrix: m, drive }
}

/// The same dynamics before eliminating p0, on y = (p0, p1, p2, c, cbar),
/// dy/dt = M y (homogeneous: the pump terms are linear in p0 here). The dp0
/// row is derived independently rather than as -(dp1 + dp2), so testing that
/// (1,1,1,0,0) annihilates M from the left genuinely checks the algebra.
pub fn build_uneliminated_generator(
    params: &ModelParams,
    kernel: &RateKernel,
) -> [[Complex64; 5]; 5] {
    let n = params.n_thermal;
    let eta = params.eta;
    let fp = kernel.f_plus;
    let fm = kernel.f_minus;
    let g12 = params.g1 * params.g2.conj();
    let g21 = params.g1.conj() * params.g2;
    let a1 = params.g1.norm_sqr();
    let a2 = params.g2.norm_sqr();
    let big_g1 = 2.0 * fp.re * a1;
    let big_g2 = 2.0 * fm.re * a2;
    let dc = (n + 1.0) * (fp.conj() * a1 + fm * a2) + Complex64::new(0.0, params.omega21);
    let s = fp + fm.conj();

    let z = Complex64::default();
    let mut m = [[z; 5]; 5];

    // dp0/dt: gains both decays, loses both pumps, and collects the
    // conjugate pairs of both population cross terms.
    m[0][0] = Complex64::from(-(big_g1 + big_g2) * n);
    m[0][1] = Complex64::from(big_g1 * (n + 1.0));
    m[0][2] = Complex64::from(big_g2 * (n + 1.0));
    m[0][3] = eta * (n + 1.0) * (fm + fp.conj()) * g21;
    m[0][4] = eta * (n + 1.0) * (fm.conj() + fp) * g12;

    m[1][0] = Complex64::from(big_g1 * n);
    m[1][1] = Complex64::from(-big_g1 * (n + 1.0));
    m[1][3] = -eta * (n + 1.0) * fm * g21;
    m[1][4] = -eta * (n + 1.0) * fm.conj() * g12;

    m[2][0] = Complex64::from(big_g2 * n);
    m[2][2] = Complex64::from(-big_g2 * (n + 1.0));
    m[2][3] = -eta * (n + 1.0) * fp.conj() * g21;
    m[2][4] = -eta * (n + 1.0) * fp * g12;

    m[3][0] = eta * n * g12 * s;
    m[3][1] = -eta * (n + 1.0) * g12 * fp;
    m[3][2] = -eta * (n + 1.0) * g12 * fm.conj();
    m[3][3] = -dc;

    m[4][0] = m[3][0].conj();
    m[4][1] = m[3][1].conj();
    m[4][2] = m[3][2].conj();
    m[4][4] = (-dc).conj();

    m
}

fn matrix_to_array(m: &[[Complex64; 4]; 4]) -> ndarray::Array2<Complex64> {
    ndarray::Array2::from_shape_fn((4, 4), |(i, j)| m[i][j])
}

fn frob_norm(m: &[[Complex64; 4]; 4]) -> f64 {
    m.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Verifies that every relaxation mode decays. Returns the eigenvalues so
/// callers can report them.
pub fn check_damping(gen: &PopulationGenerator) -> Result<Vec<Complex64>> {
    let eigs = linalg::eigenvalues(&matrix_to_array(&gen.matrix))?;
    let tol = 1e-12 * frob_norm(&gen.matrix);
    if let Some(bad) = eigs.iter().find(|l| l.re >= -tol) {
        return Err(Error::SingularGenerator {
            rcond: bad.re,
            detail: undamped_detail(*bad),
        });
    }
    Ok(eigs)
}

fn undamped_detail(eig: Complex64) -> String {
    format!(
        "relaxation mode with eigenvalue {:.6e}{:+.6e}i does not decay; this \
         happens for the degenerate doublet omega21 = 0 with eta = 1 and \
         matched couplings, where one superposition of |1> and |2> is dark \
         to the cavity",
        eig.re, eig.im
    )
}

/// Steady state of the reduced equations by direct solve of
/// matrix x = -drive, after checking that the generator is strictly damped.
pub fn steady_state(params: &ModelParams) -> Result<AtomState> {
    let kernel = params.rate_kernel()?;
    let gen = build_population_generator(params, &kernel);
    check_damping(&gen)?;

    let a_cm = linalg::to_col_major(&matrix_to_array(&gen.matrix));
    let lu = linalg::lu_factor_cm(a_cm, 4).map_err(|e| match e {
        Error::Lapack {
            routine: "zgetrf",
            info,
        } if info > 0 => Error::SingularGenerator {
            rcond: 0.0,
            detail: format!("LU pivot {info} vanished"),
        },
        other => other,
    })?;
    let rcond = lu.rcond()?;
    if rcond < 1e-14 {
        return Err(Error::SingularGenerator {
            rcond,
            detail: "generator numerically singular".to_string(),
        });
    }
    let mut x: Vec<Complex64> = gen.drive.iter().map(|d| -d).collect();
    lu.solve_in_place(&mut x)?;

    let tol = 1e-10;
    if x[0].im.abs() > tol || x[1].im.abs() > tol {
        return Err(non_physical(format!(
            "populations acquired imaginary parts {:.3e}, {:.3e}",
            x[0].im, x[1].im
        )));
    }
    if (x[3] - x[2].conj()).norm() > tol {
        return Err(non_physical(format!(
            "cbar differs from conj(c) by {:.3e}",
            (x[3] - x[2].conj()).norm()
        )));
    }
    let p1 = x[0].re;
    let p2 = x[1].re;
    let state = AtomState {
        p0: 1.0 - p1 - p2,
        p1,
        p2,
        coh12: x[2],
    };
    state.validate()?;
    Ok(state)
}

/// Which excited level to compare against the ground state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExcitedLevel {
    One,
    Two,
}

/// Locates a root of p_level(delta) - p0(delta) inside `bracket` by
/// bisection to an absolute delta tolerance of 1e-6.
pub fn inversion_thresholds(
    params_template: &ModelParams,
    which: ExcitedLevel,
    bracket: (f64, f64),
) -> Result<f64> {
    let f = |delta: f64| -> Result<f64> {
        let st = steady_state(&params_template.with_delta(delta))?;
        Ok(match which {
            ExcitedLevel::One => st.p1 - st.p0,
            ExcitedLevel::Two => st.p2 - st.p0,
        })
    };
    bisect(f, bracket, 1e-6)
}

/// Derivative-free bisection for a continuous objective, to an absolute
/// abscissa tolerance. Exact zeros at probe points are returned immediately.
pub fn bisect<F>(mut f: F, bracket: (f64, f64), tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = bracket;
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fixed-step RK4 integration of the reduced equations from an arbitrary
/// initial state. Validation of the end state is the caller's business; this
/// exists so tests can confirm that time evolution relaxes onto the linear
/// solver's steady state.
pub fn evolve_atom_state(
    params: &ModelParams,
    init: &AtomState,
    total_time: f64,
    dt: f64,
) -> Result<AtomState> {
    let kernel = params.rate_kernel()?;
    let gen = build_population_generator(params, &kernel);
    let rhs = |x: &[Complex64; 4]| -> [Complex64; 4] {
        let mut out = gen.drive;
        for (acc, row) in out.iter_mut().zip(&gen.matrix) {
            for (entry, value) in row.iter().zip(x) {
                *acc += entry * value;
            }
        }
        out
    };
    let mut x = [
        Complex64::from(init.p1),
        Complex64::from(init.p2),
        init.coh12,
        init.coh12.conj(),
    ];
    let steps = (total_time / dt).ceil() as usize;
    let h = total_time / steps as f64;
    for _ in 0..steps {
        let k1 = rhs(&x);
        let k2 = rhs(&add_scaled(&x, &k1, h / 2.0));
        let k3 = rhs(&add_scaled(&x, &k2, h / 2.0));
        let k4 = rhs(&add_scaled(&x, &k3, h));
        for i in 0..4 {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    let p1 = x[0].re;
    let p2 = x[1].re;
    Ok(AtomState {
        p0: 1.0 - p1 - p2,
        p1,
        p2,
        coh12: x[2],
    })
}

fn add_scaled(x: &[Complex64; 4], k: &[Complex64; 4], h: f64) -> [Complex64; 4] {
    let mut out = *x;
    for i in 0..4 {
        out[i] += h * k[i];
    }
    out
}

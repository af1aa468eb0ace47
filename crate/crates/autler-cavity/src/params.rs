//! Physical parameters of the V-type atom + cavity model and the derived
//! cavity rate kernels.
//!
//! The atom has ground state |0> and excited doublet |1>, |2> split by
//! omega21. A single damped cavity mode (decay kappa, detuning
//! delta = omega_C - omega_0, thermal occupation N) couples both transitions
//! with amplitudes g1, g2. Eliminating the fast cavity leaves the atom with
//! complex rate kernels
//!
//! ```text
//! F(+omega21) = 1 / [kappa + i(delta + omega21/2)]
//! F(-omega21) = 1 / [kappa + i(delta - omega21/2)]
//! ```
//!
//! whose real parts set the cavity-induced decay rates gamma1, gamma2 and
//! whose imaginary parts shift the doublet resonances. The interference
//! switch eta scales every g1*conj(g2) cross term; d1, d2 are the probe's
//! projections onto the two transition dipoles.
//!
//! All quantities are plain numbers in one common angular-frequency unit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every physical input of the model. Immutable after validation; share
/// freely across threads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Atom-cavity coupling of the |0> <-> |1> transition.
    pub g1: Complex64,
    /// Atom-cavity coupling of the |0> <-> |2> transition.
    pub g2: Complex64,
    /// Cavity field decay rate, > 0.
    pub kappa: f64,
    /// Cavity detuning delta = omega_C - omega_0 (signed).
    pub delta: f64,
    /// Excited doublet splitting, >= 0.
    pub omega21: f64,
    /// Mean thermal photon number N, >= 0.
    pub n_thermal: f64,
    /// Interference switch in [0, 1]; scales the g_i conj(g_j) cross terms.
    pub eta: f64,
    /// Probe projection onto dipole 1 (default 1).
    pub d1: Complex64,
    /// Probe projection onto dipole 2 (default 1).
    pub d2: Complex64,
}

/// Derived complex kernels and real decay rates for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateKernel {
    /// F(+omega21).
    pub f_plus: Complex64,
    /// F(-omega21).
    pub f_minus: Complex64,
    /// kappa |g1|^2 / (kappa^2 + (delta + omega21/2)^2) = |g1|^2 Re F(+omega21).
    pub gamma1: f64,
    /// kappa |g2|^2 / (kappa^2 + (delta - omega21/2)^2) = |g2|^2 Re F(-omega21).
    pub gamma2: f64,
}

impl ModelParams {
    /// Parameter set with unit probe projections.
    pub fn new(
        g1: Complex64,
        g2: Complex64,
        kappa: f64,
        delta: f64,
        omega21: f64,
        n_thermal: f64,
        eta: f64,
    ) -> Self {
        ModelParams {
            g1,
            g2,
            kappa,
            delta,
            omega21,
            n_thermal,
            eta,
            d1: Complex64::new(1.0, 0.0),
            d2: Complex64::new(1.0, 0.0),
        }
    }

    /// Equal real couplings, the configuration of every figure preset.
    pub fn symmetric(
        g: f64,
        kappa: f64,
        delta: f64,
        omega21: f64,
        n_thermal: f64,
        eta: f64,
    ) -> Self {
        Self::new(
            Complex64::new(g, 0.0),
            Complex64::new(g, 0.0),
            kappa,
            delta,
            omega21,
            n_thermal,
            eta,
        )
    }

    pub fn with_probe(mut self, d1: Complex64, d2: Complex64) -> Self {
        self.d1 = d1;
        self.d2 = d2;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    /// Checks the domain constraints. Finite-ness is checked for every field
    /// so NaN cannot propagate into solvers.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("g1", self.g1.re),
            ("g1", self.g1.im),
            ("g2", self.g2.re),
            ("g2", self.g2.im),
            ("kappa", self.kappa),
            ("delta", self.delta),
            ("omega21", self.omega21),
            ("n_thermal", self.n_thermal),
            ("eta", self.eta),
            ("d1", self.d1.re),
            ("d1", self.d1.im),
            ("d2", self.d2.re),
            ("d2", self.d2.im),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        if self.kappa <= 0.0 {
            return Err(invalid("kappa", "cavity decay rate must be > 0"));
        }
        if self.omega21 < 0.0 {
            return Err(invalid("omega21", "doublet splitting must be >= 0"));
        }
        if self.n_thermal < 0.0 {
            return Err(invalid("n_thermal", "thermal photon number must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(invalid("eta", "interference switch must lie in [0, 1]"));
        }
        Ok(())
    }

    /// The elimination behind the reduced equations assumes the bad-cavity
    /// limit kappa >> |g_i|. Outside |g_i| <= kappa/5 the model is still a
    /// well-posed linear system, so this is advisory only; the full-model
    /// oracle quantifies the actual error.
    pub fn bad_cavity_warning(&self) -> Option<String> {
        let gmax = self.g1.norm().max(self.g2.norm());
        if gmax > self.kappa / 5.0 {
            Some(format!(
                "bad-cavity advisory: max|g| = {:.6} exceeds kappa/5 = {:.6}; \
                 the reduced equations assume kappa >> g",
                gmax,
                self.kappa / 5.0
            ))
        } else {
            None
        }
    }

    /// Cavity rate kernels F(+-omega21) and decay rates gamma1, gamma2.
    pub fn rate_kernel(&self) -> Result<RateKernel> {
        self.validate()?;
        let hp = self.delta + self.omega21 / 2.0;
        let hm = self.delta - self.omega21 / 2.0;
        let f_plus = Complex64::new(self.kappa, hp).inv();
        let f_minus = Complex64::new(self.kappa, hm).inv();
        let gamma1 = self.kappa * self.g1.norm_sqr() / (self.kappa * self.kappa + hp * hp);
        let gamma2 = self.kappa * self.g2.norm_sqr() / (self.kappa * self.kappa + hm * hm);
        Ok(RateKernel {
            f_plus,
            f_minus,
            gamma1,
            gamma2,
        })
    }

    /// Half-widths (Gamma_l, Gamma_h) of the lower and higher frequency
    /// sidebands in the eta = 0 spectrum:
    ///
    /// ```text
    /// Gamma_l = gamma1 (2N+1) + gamma2 N
    /// Gamma_h = gamma1 N + gamma2 (2N+1)
    /// ```
    ///
    /// These are the exact HWHM of the two Lorentzians with interference off;
    /// with eta > 0 the cross-damping mixes the modes.
    pub fn sideband_linewidths(&self) -> Result<(f64, f64)> {
        let k = self.rate_kernel()?;
        let n = self.n_thermal;
        let gamma_l = k.gamma1 * (2.0 * n + 1.0) + k.gamma2 * n;
        let gamma_h = k.gamma1 * n + k.gamma2 * (2.0 * n + 1.0);
        Ok((gamma_l, gamma_h))
    }

    /// Cavity level shifts of the sideband centers in the eta = 0 spectrum.
    ///
    /// The coherence decay constants are -Gamma_l + i phi_l and
    /// -Gamma_h - i phi_h, so the sidebands peak at omega = -phi_l and
    /// omega = +phi_h with
    ///
    /// ```text
    /// phi_l = omega21/2 - Im F(+omega21) |g1|^2 (2N+1) - Im F(-omega21) |g2|^2 N
    /// phi_h = omega21/2 + Im F(+omega21) |g1|^2 N + Im F(-omega21) |g2|^2 (2N+1)
    /// ```
    ///
    /// The shifts vanish only as kappa -> infinity; at finite kappa the peaks
    /// do not sit exactly at +-omega21/2.
    pub fn level_shifts(&self) -> Result<(f64, f64)> {
        let k = self.rate_kernel()?;
        let n = self.n_thermal;
        let a1 = self.g1.norm_sqr();
        let a2 = self.g2.norm_sqr();
        let phi_l = self.omega21 / 2.0 - k.f_plus.im * a1 * (2.0 * n + 1.0) - k.f_minus.im * a2 * n;
        let phi_h = self.omega21 / 2.0 + k.f_plus.im * a1 * n + k.f_minus.im * a2 * (2.0 * n + 1.0);
        Ok((phi_l, phi_h))
    }
}

fn invalid(name: &str, message: &str) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        message: message.to_string(),
    }
}

/// The exact key set of the flat `key=value` config format.
pub const CONFIG_KEYS: [&str; 13] = [
    "g1_re",
    "g1_im",
    "g2_re",
    "g2_im",
    "kappa",
    "delta",
    "omega21",
    "n_thermal",
    "eta",
    "d1_re",
    "d1_im",
    "d2_re",
    "d2_im",
];

/// Accumulates parameters from a config file and/or CLI flags before
/// validation. `None` means "not given"; [`PartialParams::finalize`] applies
/// defaults where they exist and rejects missing required fields.
#[derive(Debug, Clone, Copy, Default)]
pub struct PartialParams {
    pub g1_re: Option<f64>,
    pub g1_im: Option<f64>,
    pub g2_re: Option<f64>,
    pub g2_im: Option<f64>,
    pub kappa: Option<f64>,
    pub delta: Option<f64>,
    pub omega21: Option<f64>,
    pub n_thermal: Option<f64>,
    pub eta: Option<f64>,
    pub d1_re: Option<f64>,
    pub d1_im: Option<f64>,
    pub d2_re: Option<f64>,
    pub d2_im: Option<f64>,
}

impl PartialParams {
    /// Parses the flat UTF-8 config format: one `key=value` per line, `#`
    /// comments, blank lines allowed. Unknown and duplicate keys are errors.
    pub fn parse_config(text: &str) -> Result<Self> {
        let mut out = PartialParams::default();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::InvalidValue {
                key: line.to_string(),
                value: "expected key=value".to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            if !CONFIG_KEYS.contains(&key) {
                return Err(Error::UnknownKey {
                    key: key.to_string(),
                });
            }
            let parsed: f64 = value.parse().map_err(|_| Error::InvalidValue {
                key: key.to_string(),
                value: value.to_string(),
            })?;
            let slot = out.slot_mut(key);
            if slot.is_some() {
                return Err(Error::DuplicateKey {
                    key: key.to_string(),
                });
            }
            *slot = Some(parsed);
        }
        Ok(out)
    }

    fn slot_mut(&mut self, key: &str) -> &mut Option<f64> {
        match key {
            "g1_re" => &mut self.g1_re,
            "g1_im" => &mut self.g1_im,
            "g2_re" => &mut self.g2_re,
            "g2_im" => &mut self.g2_im,
            "kappa" => &mut self.kappa,
            "delta" => &mut self.delta,
            "omega21" => &mut self.omega21,
            "n_thermal" => &mut self.n_thermal,
            "eta" => &mut self.eta,
            "d1_re" => &mut self.d1_re,
            "d1_im" => &mut self.d1_im,
            "d2_re" => &mut self.d2_re,
            "d2_im" => &mut self.d2_im,
            _ => unreachable!("key checked against CONFIG_KEYS"),
        }
    }

    /// Overlays `other` on top of `self` (CLI flags over config file).
    pub fn merged_with(self, other: PartialParams) -> PartialParams {
        PartialParams {
            g1_re: other.g1_re.or(self.g1_re),
            g1_im: other.g1_im.or(self.g1_im),
            g2_re: other.g2_re.or(self.g2_re),
            g2_im: other.g2_im.or(self.g2_im),
            kappa: other.kappa.or(self.kappa),
            delta: other.delta.or(self.delta),
            omega21: other.omega21.or(self.omega21),
            n_thermal: other.n_thermal.or(self.n_thermal),
            eta: other.eta.or(self.eta),
            d1_re: other.d1_re.or(self.d1_re),
            d1_im: other.d1_im.or(self.d1_im),
            d2_re: other.d2_re.or(self.d2_re),
            d2_im: other.d2_im.or(self.d2_im),
        }
    }

    /// Required: g1_re, g2_re, kappa, omega21, n_thermal, eta. Defaults:
    /// imaginary parts 0, delta 0, probe projections 1.
    pub fn finalize(self) -> Result<ModelParams> {
        fn require(v: Option<f64>, name: &str) -> Result<f64> {
            v.ok_or_else(|| Error::MissingParameter {
                name: name.to_string(),
            })
        }
        let params = ModelParams {
            g1: Complex64::new(require(self.g1_re, "g1_re")?, self.g1_im.unwrap_or(0.0)),
            g2: Complex64::new(require(self.g2_re, "g2_re")?, self.g2_im.unwrap_or(0.0)),
            kappa: require(self.kappa, "kappa")?,
            delta: self.delta.unwrap_or(0.0),
            omega21: require(self.omega21, "omega21")?,
            n_thermal: require(self.n_thermal, "n_thermal")?,
            eta: require(self.eta, "eta")?,
            d1: Complex64::new(self.d1_re.unwrap_or(1.0), self.d1_im.unwrap_or(0.0)),
            d2: Complex64::new(self.d2_re.unwrap_or(1.0), self.d2_im.unwrap_or(0.0)),
        };
        params.validate()?;
        Ok(params)
    }
}

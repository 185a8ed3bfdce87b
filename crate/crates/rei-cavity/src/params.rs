//! Closed-form cavity-QED parameter derivations.
//!
//! Rates entering and leaving this module are ordinary frequencies (Hz,
//! the "value/2π" convention of the literature tables); angular conversion
//! happens only inside formulas that need ω.

use serde::{Deserialize, Serialize};

use crate::constants::{C_LIGHT, EPSILON_0, HBAR, TWO_PI};
use crate::error::{Error, Result};

/// Local-field correction χ_l = ((n² + 2)/3)² entering the dipole-lifetime
/// relation.
pub fn local_field_correction(n_host: f64) -> f64 {
    let x = (n_host * n_host + 2.0) / 3.0;
    x * x
}

/// Optical and spin properties of a dopant-host pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IonSpecies {
    pub name: String,
    /// Transition wavelength, m.
    pub lambda_a: f64,
    /// Spontaneous lifetime, s (optional; derivable from the dipole).
    pub t_spon: Option<f64>,
    /// Transition dipole moment, C·m (optional; derivable from the lifetime).
    pub mu: Option<f64>,
    /// Host refractive index.
    pub n_host: f64,
    /// Optical pure dephasing rate, Hz ordinary.
    pub gamma_p: f64,
    /// Spin qubit decoherence time, s (optional).
    pub t_d: Option<f64>,
}

impl IonSpecies {
    pub fn validate(&self) -> Result<()> {
        if self.lambda_a <= 0.0 {
            return Err(Error::InvalidInput {
                name: format!("ion {}: lambda_a", self.name),
                reason: "wavelength must be positive".into(),
            });
        }
        if self.n_host < 1.0 {
            return Err(Error::InvalidInput {
                name: format!("ion {}: n_host", self.name),
                reason: "refractive index must be >= 1".into(),
            });
        }
        if let Some(t) = self.t_spon {
            if t <= 0.0 {
                return Err(Error::InvalidInput {
                    name: format!("ion {}: t_spon", self.name),
                    reason: "lifetime must be positive".into(),
                });
            }
        }
        if let Some(mu) = self.mu {
            if mu <= 0.0 {
                return Err(Error::InvalidInput {
                    name: format!("ion {}: mu", self.name),
                    reason: "dipole moment must be positive".into(),
                });
            }
        }
        if self.gamma_p < 0.0 {
            return Err(Error::NegativeRate {
                name: "gamma_p",
                value: self.gamma_p,
            });
        }
        if self.t_spon.is_none() && self.mu.is_none() {
            return Err(Error::InvalidInput {
                name: format!("ion {}", self.name),
                reason: "need at least one of t_spon or mu".into(),
            });
        }
        Ok(())
    }

    /// Transition dipole moment: stored, or derived from the lifetime.
    pub fn dipole(&self) -> Result<f64> {
        match self.mu {
            Some(mu) => Ok(mu),
            None => dipole_from_lifetime(self),
        }
    }

    /// Spontaneous lifetime: stored, or derived from the dipole.
    pub fn lifetime(&self) -> Result<f64> {
        match self.t_spon {
            Some(t) => Ok(t),
            None => {
                let mu = self.mu.ok_or_else(|| Error::InvalidInput {
                    name: format!("ion {}", self.name),
                    reason: "neither lifetime nor dipole available".into(),
                })?;
                Ok(lifetime_from_dipole(mu, self.lambda_a, self.n_host))
            }
        }
    }

    /// Spontaneous emission rate γ, Hz ordinary (γ_angular = 1/T_spon).
    pub fn gamma_hz(&self) -> Result<f64> {
        Ok(1.0 / (TWO_PI * self.lifetime()?))
    }
}

/// Geometric and loss description of a microresonator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CavityDesign {
    /// Disk radius, m.
    pub radius: f64,
    /// Film thickness, m.
    pub thickness: f64,
    pub n_cavity: f64,
    /// Resonance wavelength, m.
    pub lambda_c: f64,
    /// Mode volume, m³.
    pub mode_volume: f64,
    /// Partial quality factors; `None` means lossless (∞) for that channel.
    pub q_radiation: Option<f64>,
    pub q_material: Option<f64>,
    pub q_scattering: Option<f64>,
    /// Fiber-cavity external coupling rate, Hz ordinary.
    pub kappa_out: f64,
    /// Backscattering coupling, Hz ordinary.
    pub beta: f64,
}

impl CavityDesign {
    pub fn validate(&self) -> Result<()> {
        if self.mode_volume <= 0.0 {
            return Err(Error::InvalidInput {
                name: "cavity.mode_volume".into(),
                reason: "mode volume must be positive".into(),
            });
        }
        if self.lambda_c <= 0.0 {
            return Err(Error::InvalidInput {
                name: "cavity.lambda_c".into(),
                reason: "wavelength must be positive".into(),
            });
        }
        for (name, q) in [
            ("q_radiation", self.q_radiation),
            ("q_material", self.q_material),
            ("q_scattering", self.q_scattering),
        ] {
            if let Some(q) = q {
                if q <= 0.0 {
                    return Err(Error::InvalidInput {
                        name: format!("cavity.{name}"),
                        reason: "partial Q must be positive".into(),
                    });
                }
            }
        }
        if self.kappa_out < 0.0 {
            return Err(Error::NegativeRate {
                name: "kappa_out",
                value: self.kappa_out,
            });
        }
        if self.beta < 0.0 {
            return Err(Error::NegativeRate {
                name: "beta",
                value: self.beta,
            });
        }
        Ok(())
    }

    /// Total Q from the partial budget.
    pub fn q_total(&self) -> Result<f64> {
        q_combine(self.q_radiation, self.q_material, self.q_scattering)
    }
}

/// The working rate set of a coupled ion-cavity system, ordinary Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CqedRates {
    /// Ion-photon coupling g.
    pub g: f64,
    /// Intrinsic cavity decay κ.
    pub kappa: f64,
    /// External (fiber) coupling κ_out.
    pub kappa_out: f64,
    /// Spontaneous emission γ.
    pub gamma: f64,
    /// Pure dephasing γ_p.
    pub gamma_p: f64,
    /// Cavity-ion detuning ν_c − ν_a.
    pub delta_ca: f64,
    /// Laser-ion detuning ν_l − ν_a.
    pub delta_la: f64,
}

impl CqedRates {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("g", self.g),
            ("kappa", self.kappa),
            ("kappa_out", self.kappa_out),
            ("gamma", self.gamma),
            ("gamma_p", self.gamma_p),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidInput {
                    name: name.into(),
                    reason: format!("rate must be nonnegative, got {v:.6e}"),
                });
            }
        }
        Ok(())
    }

    /// Total cavity linewidth κ_all = κ + κ_out.
    pub fn kappa_all(&self) -> f64 {
        self.kappa + self.kappa_out
    }
}

/// κ = ω_c/(2Q), returned in ordinary units: κ = ν_c/(2Q).
pub fn kappa_from_q(lambda_c: f64, q: f64) -> Result<f64> {
    if q <= 0.0 {
        return Err(Error::InvalidInput {
            name: "Q".into(),
            reason: format!("quality factor must be positive, got {q}"),
        });
    }
    if lambda_c <= 0.0 {
        return Err(Error::InvalidInput {
            name: "lambda_c".into(),
            reason: "wavelength must be positive".into(),
        });
    }
    Ok(C_LIGHT / lambda_c / (2.0 * q))
}

/// The two Q-to-linewidth conventions in circulation, labeled. `half` is
/// κ = ν/2Q, `full_linewidth` is κ = ν/Q (the convention many parameter
/// tables use).
#[derive(Debug, Clone, Copy)]
pub struct KappaCrosscheck {
    pub half_hz: f64,
    pub full_linewidth_hz: f64,
}

pub fn kappa_crosscheck(lambda_c: f64, q: f64) -> Result<KappaCrosscheck> {
    let half = kappa_from_q(lambda_c, q)?;
    Ok(KappaCrosscheck {
        half_hz: half,
        full_linewidth_hz: 2.0 * half,
    })
}

/// Dipole moment from the spontaneous lifetime:
/// μ = sqrt(3 ε₀ ħ λ³ / (8π n χ_l T_spon)).
pub fn dipole_from_lifetime(ion: &IonSpecies) -> Result<f64> {
    let t = ion.t_spon.ok_or_else(|| Error::InvalidInput {
        name: format!("ion {}", ion.name),
        reason: "missing lifetime".into(),
    })?;
    if t <= 0.0 {
        return Err(Error::InvalidInput {
            name: format!("ion {}: t_spon", ion.name),
            reason: "lifetime must be positive".into(),
        });
    }
    let chi_l = local_field_correction(ion.n_host);
    let lam3 = ion.lambda_a.powi(3);
    Ok((3.0 * EPSILON_0 * HBAR * lam3
        / (8.0 * std::f64::consts::PI * ion.n_host * chi_l * t))
        .sqrt())
}

/// Inverse of [`dipole_from_lifetime`]: T_spon = 3 ε₀ ħ λ³ / (8π n χ_l μ²).
pub fn lifetime_from_dipole(mu: f64, lambda_a: f64, n_host: f64) -> f64 {
    let chi_l = local_field_correction(n_host);
    3.0 * EPSILON_0 * HBAR * lambda_a.powi(3)
        / (8.0 * std::f64::consts::PI * n_host * chi_l * mu * mu)
}

/// Single-photon coupling g = (μ/n)·sqrt(ω_a/(2ħε₀V)), returned in
/// ordinary units (g_angular/2π).
pub fn coupling_g(ion: &IonSpecies, cavity: &CavityDesign) -> Result<f64> {
    let mu = ion.mu.ok_or_else(|| Error::InvalidInput {
        name: format!("ion {}", ion.name),
        reason: "missing dipole moment; derive it from the lifetime first".into(),
    })?;
    if cavity.mode_volume <= 0.0 {
        return Err(Error::InvalidInput {
            name: "cavity.mode_volume".into(),
            reason: "mode volume must be positive".into(),
        });
    }
    let omega_a = TWO_PI * C_LIGHT / ion.lambda_a;
    let g_angular =
        (mu / cavity.n_cavity) * (omega_a / (2.0 * HBAR * EPSILON_0 * cavity.mode_volume)).sqrt();
    Ok(g_angular / TWO_PI)
}

/// Strong-coupling figure of merit 3Q²/(16π² χ_l k ω T_spon); values above
/// 1 mark the feasible region. `k` is the normalized mode volume V/λ³.
pub fn strong_coupling_fom(ion: &IonSpecies, q: f64, k: f64) -> Result<f64> {
    if q <= 0.0 || k <= 0.0 {
        return Err(Error::InvalidInput {
            name: "strong_coupling_fom".into(),
            reason: format!("Q and k must be positive, got Q={q}, k={k}"),
        });
    }
    let t = ion.lifetime()?;
    let chi_l = local_field_correction(ion.n_host);
    let omega = TWO_PI * C_LIGHT / ion.lambda_a;
    Ok(3.0 * q * q / (16.0 * std::f64::consts::PI.powi(2) * chi_l * k * omega * t))
}

/// The Q at which the figure of merit crosses 1, for fixed ion and k.
pub fn q_threshold(ion: &IonSpecies, k: f64) -> Result<f64> {
    if k <= 0.0 {
        return Err(Error::InvalidInput {
            name: "k".into(),
            reason: "normalized mode volume must be positive".into(),
        });
    }
    let t = ion.lifetime()?;
    let chi_l = local_field_correction(ion.n_host);
    let omega = TWO_PI * C_LIGHT / ion.lambda_a;
    Ok((16.0 * std::f64::consts::PI.powi(2) * chi_l * k * omega * t / 3.0).sqrt())
}

/// Harmonic combination 1/Q = 1/Q_r + 1/Q_m + 1/Q_s; missing channels are
/// lossless.
pub fn q_combine(q_r: Option<f64>, q_m: Option<f64>, q_s: Option<f64>) -> Result<f64> {
    let present: Vec<f64> = [q_r, q_m, q_s].iter().filter_map(|q| *q).collect();
    if present.is_empty() {
        return Err(Error::InvalidInput {
            name: "q_combine".into(),
            reason: "all partial quality factors missing".into(),
        });
    }
    for &q in &present {
        if q <= 0.0 {
            return Err(Error::InvalidInput {
                name: "q_combine".into(),
                reason: format!("partial Q must be positive, got {q}"),
            });
        }
    }
    Ok(1.0 / present.iter().map(|q| 1.0 / q).sum::<f64>())
}

/// Cooperativity (Purcell factor) C = 4g²/(κ_all·γ). Pure ratio: any
/// common unit convention for the rates cancels.
pub fn cooperativity(rates: &CqedRates) -> Result<f64> {
    let kappa_all = rates.kappa_all();
    if kappa_all <= 0.0 || rates.gamma <= 0.0 {
        return Err(Error::InvalidInput {
            name: "cooperativity".into(),
            reason: format!(
                "kappa_all and gamma must be positive, got {kappa_all:.3e} and {:.3e}",
                rates.gamma
            ),
        });
    }
    Ok(4.0 * rates.g * rates.g / (kappa_all * rates.gamma))
}

/// Electro-optic tuning arithmetic: Δλ = rate·V, Δν = c·Δλ/λ².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EoTuning {
    pub delta_lambda_m: f64,
    pub delta_nu_hz: f64,
}

pub fn eo_tuning(voltage: f64, rate_m_per_v: f64, lambda: f64) -> Result<EoTuning> {
    if rate_m_per_v <= 0.0 {
        return Err(Error::InvalidInput {
            name: "rate_m_per_v".into(),
            reason: "tuning rate must be positive".into(),
        });
    }
    if lambda <= 0.0 {
        return Err(Error::InvalidInput {
            name: "lambda".into(),
            reason: "wavelength must be positive".into(),
        });
    }
    let delta_lambda = rate_m_per_v * voltage;
    Ok(EoTuning {
        delta_lambda_m: delta_lambda,
        delta_nu_hz: C_LIGHT * delta_lambda / (lambda * lambda),
    })
}

/// One row of the feasibility surface.
#[derive(Debug, Clone)]
pub struct FeasibilityRow {
    pub ion: String,
    pub k: f64,
    pub q: f64,
    pub fom: f64,
    pub feasible: bool,
}

/// FOM surface over (ion, k, Q) plus the FOM = 1 contour Q_threshold(k)
/// per ion.
#[derive(Debug, Clone)]
pub struct FeasibilityMap {
    pub rows: Vec<FeasibilityRow>,
    pub contours: Vec<(String, Vec<(f64, f64)>)>,
}

pub fn feasibility_map(
    ions: &[IonSpecies],
    k_grid: &[f64],
    q_grid: &[f64],
) -> Result<FeasibilityMap> {
    if ions.is_empty() {
        return Err(Error::InvalidInput {
            name: "ions".into(),
            reason: "no ions supplied".into(),
        });
    }
    check_positive_ascending("k_grid", k_grid)?;
    check_positive_ascending("q_grid", q_grid)?;

    let mut rows = Vec::with_capacity(ions.len() * k_grid.len() * q_grid.len());
    let mut contours = Vec::with_capacity(ions.len());
    for ion in ions {
        for &k in k_grid {
            for &q in q_grid {
                let fom = strong_coupling_fom(ion, q, k)?;
                rows.push(FeasibilityRow {
                    ion: ion.name.clone(),
                    k,
                    q,
                    fom,
                    feasible: fom > 1.0,
                });
            }
        }
        let contour = k_grid
            .iter()
            .map(|&k| q_threshold(ion, k).map(|q| (k, q)))
            .collect::<Result<Vec<_>>>()?;
        contours.push((ion.name.clone(), contour));
    }
    Ok(FeasibilityMap { rows, contours })
}

pub(crate) fn check_positive_ascending(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Grid(format!("{name} is empty")));
    }
    if grid[0] <= 0.0 {
        return Err(Error::Grid(format!("{name} must be positive")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid(format!("{name} must be strictly ascending")));
    }
    Ok(())
}

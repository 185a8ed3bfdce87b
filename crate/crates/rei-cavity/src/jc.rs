//! Jaynes–Cummings model construction and coupled-system spectroscopy.
//!
//! The working frame rotates at the ion frequency, so the bare Hamiltonian
//! is H = Δ_ca·a†a + g(σ+a + σ−a†) with Δ_ca the cavity-ion detuning. The
//! spectrum grid is the laser-ion detuning in ordinary Hz.
//!
//! Two backends compute the same physics: an eigen-decomposition of the
//! single-excitation manifold with Lorentzian lifetime broadening, and a
//! weak-drive steady-state scan of the full master equation. Line centers
//! are the contract; the broadened widths carry the usual decay-weight
//! heuristic.

use num_complex::Complex64 as C64;

use crate::constants::{to_angular, to_ordinary};
use crate::error::{Error, Result};
use crate::hilbert::{HilbertSpace, QOperator};
use crate::lindblad::{build_liouvillian, expectation, steady_state, DissipatorSpec};
use crate::params::CqedRates;

/// Steady-state photon-number bound for the weak-probe precondition.
pub const WEAK_PROBE_LIMIT: f64 = 0.01;

/// A coupled two-level/single-mode system in the rotating frame.
#[derive(Debug, Clone)]
pub struct JcSystem {
    pub rates: CqedRates,
    pub space: HilbertSpace,
    pub hamiltonian: QOperator,
    pub n_fock: usize,
}

/// Build the rotating-frame Jaynes–Cummings system.
pub fn build_jc(rates: &CqedRates, n_fock: usize) -> Result<JcSystem> {
    if n_fock < 2 {
        return Err(Error::InvalidInput {
            name: "n_fock".into(),
            reason: format!("need at least 2 Fock levels, got {n_fock}"),
        });
    }
    rates.validate()?;
    let space = HilbertSpace::two_level_with_mode(n_fock)?;
    let h = jc_hamiltonian(&space, rates, 0.0)?;
    h.check_hermitian(1e-12)?;
    Ok(JcSystem {
        rates: *rates,
        space,
        hamiltonian: h,
        n_fock,
    })
}

/// H = −Δ_la·σ+σ− + (Δ_ca − Δ_la)·a†a + g(σ+a + σ−a†), angular units,
/// in the frame rotating at the laser when `delta_la_hz` is nonzero and at
/// the ion otherwise.
fn jc_hamiltonian(space: &HilbertSpace, rates: &CqedRates, delta_la_hz: f64) -> Result<QOperator> {
    let g = to_angular(rates.g);
    let delta_al = -to_angular(delta_la_hz);
    let delta_cl = to_angular(rates.delta_ca - delta_la_hz);

    let sm = QOperator::lowering(space, 0)?;
    let a = QOperator::annihilation(space, 1)?;
    let coupling = sm.dagger().matmul(&a)?;
    let mut h = coupling.add(&coupling.dagger())?.scaled(C64::new(g, 0.0));
    h = h.add(
        &QOperator::excited_projector(space, 0)?.scaled(C64::new(delta_al, 0.0)),
    )?;
    h = h.add(&QOperator::number(space, 1)?.scaled(C64::new(delta_cl, 0.0)))?;
    Ok(h)
}

impl JcSystem {
    /// Total excitation number σ+σ− + a†a.
    pub fn excitation_number(&self) -> Result<QOperator> {
        QOperator::excited_projector(&self.space, 0)?.add(&QOperator::number(&self.space, 1)?)
    }

    /// max |[H, N]| — zero for any rotating-frame system built here.
    pub fn excitation_conservation_defect(&self) -> Result<f64> {
        Ok(self
            .hamiltonian
            .commutator(&self.excitation_number()?)?
            .max_abs())
    }

    /// The single-excitation block of H in the basis {|e,0⟩, |g,1⟩},
    /// angular units.
    pub fn single_excitation_block(&self) -> Result<[[C64; 2]; 2]> {
        let i_e0 = self.space.basis_index(&[1, 0])?;
        let i_g1 = self.space.basis_index(&[0, 1])?;
        let m = self.hamiltonian.matrix();
        Ok([
            [m[[i_e0, i_e0]], m[[i_e0, i_g1]]],
            [m[[i_g1, i_e0]], m[[i_g1, i_g1]]],
        ])
    }
}

/// One spectral line or located response maximum.
#[derive(Debug, Clone, Copy)]
pub struct Peak {
    /// Position on the detuning grid, Hz ordinary.
    pub position_hz: f64,
    /// Normalized amplitude at the position.
    pub height: f64,
    /// Full width at half maximum, Hz ordinary.
    pub width_hz: f64,
}

/// A frequency response on a detuning grid, normalized to max = 1.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub detuning_hz: Vec<f64>,
    pub amplitude: Vec<f64>,
    /// Eigen backend: line centers snapped to the grid. Numeric backend:
    /// local maxima of the response curve.
    pub peaks: Vec<Peak>,
    /// The raw maximum divided out by the max-1 display normalization;
    /// multiply `amplitude` by this to undo it.
    pub scale: f64,
}

fn check_ascending(name: &str, grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::Grid(format!("{name} needs at least 2 points")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid(format!("{name} must be strictly ascending")));
    }
    Ok(())
}

fn nearest_grid_index(grid: &[f64], x: f64) -> usize {
    let mut best = 0;
    let mut dist = f64::INFINITY;
    for (i, &g) in grid.iter().enumerate() {
        let d = (g - x).abs();
        if d < dist {
            dist = d;
            best = i;
        }
    }
    best
}

/// Spectral lines of the single-excitation manifold: positions, projection
/// weights onto |g,1⟩, and decay-weighted half-widths (all ordinary Hz).
fn eigen_lines(sys: &JcSystem) -> Result<Vec<(f64, f64, f64)>> {
    let block = sys.single_excitation_block()?;
    // 2x2 Hermitian eigenproblem, solved in closed form.
    let a = block[0][0].re;
    let d = block[1][1].re;
    let b = block[0][1];
    let tr_half = 0.5 * (a + d);
    let disc = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    let lam = [tr_half - disc, tr_half + disc];

    let mut lines = Vec::with_capacity(2);
    for &l in &lam {
        // eigenvector of [[a, b], [b*, d]] for eigenvalue l
        let (c_e0, c_g1) = if b.norm() > 1e-300 {
            let v0 = b;
            let v1 = C64::new(l - a, 0.0);
            let n = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
            (v0 / n, v1 / n)
        } else if (l - a).abs() < (l - d).abs() {
            (C64::new(1.0, 0.0), C64::new(0.0, 0.0))
        } else {
            (C64::new(0.0, 0.0), C64::new(1.0, 0.0))
        };
        let w_photon = c_g1.norm_sqr();
        let w_atom = c_e0.norm_sqr();
        let hwhm = sys.rates.kappa * w_photon + (sys.rates.gamma + sys.rates.gamma_p) * w_atom;
        lines.push((to_ordinary(l), w_photon, hwhm));
    }
    Ok(lines)
}

/// Emission/transmission spectrum from the single-excitation
/// eigen-decomposition with Lorentzian broadening.
///
/// Each eigenstate contributes an area-normalized Lorentzian at its
/// eigenfrequency, weighted by its photonic projection |⟨g,1|ψ⟩|²; the
/// remaining frequency- and dipole-dependent prefactors are constant over
/// the narrow scan and absorbed into the max-1 display normalization.
pub fn spectrum_eigen(sys: &JcSystem, detuning_grid_hz: &[f64]) -> Result<SpectrumResult> {
    check_ascending("detuning_grid", detuning_grid_hz)?;
    let lines = eigen_lines(sys)?;
    let lo = detuning_grid_hz[0];
    let hi = *detuning_grid_hz.last().unwrap();
    for &(pos, _, _) in &lines {
        if pos < lo || pos > hi {
            return Err(Error::Grid(format!(
                "grid [{lo:.3e}, {hi:.3e}] Hz does not contain the spectral line at {pos:.3e} Hz"
            )));
        }
    }

    let mut amplitude = vec![0.0; detuning_grid_hz.len()];
    for (i, &x) in detuning_grid_hz.iter().enumerate() {
        let mut acc = 0.0;
        for &(pos, weight, hwhm) in &lines {
            let h = hwhm.max(f64::MIN_POSITIVE);
            acc += weight * h / std::f64::consts::PI / ((x - pos).powi(2) + h * h);
        }
        amplitude[i] = acc;
    }
    let scale = amplitude.iter().cloned().fold(0.0f64, f64::max);
    if scale <= 0.0 {
        return Err(Error::Grid("spectrum vanished on the grid".into()));
    }
    for a in &mut amplitude {
        *a /= scale;
    }

    let peaks = lines
        .iter()
        .map(|&(pos, _, hwhm)| {
            let idx = nearest_grid_index(detuning_grid_hz, pos);
            Peak {
                position_hz: detuning_grid_hz[idx],
                height: amplitude[idx],
                width_hz: 2.0 * hwhm,
            }
        })
        .collect();

    Ok(SpectrumResult {
        detuning_hz: detuning_grid_hz.to_vec(),
        amplitude,
        peaks,
        scale,
    })
}

/// Local maxima of a sampled curve (strictly above the left neighbor, at
/// least equal to the right), with FWHM estimated from half-height
/// crossings.
pub fn curve_maxima(grid: &[f64], values: &[f64]) -> Vec<Peak> {
    let mut peaks = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        if values[i] > values[i - 1] && values[i] >= values[i + 1] {
            let half = values[i] / 2.0;
            let mut left = grid[0];
            for j in (0..i).rev() {
                if values[j] <= half {
                    let f = (half - values[j]) / (values[j + 1] - values[j]);
                    left = grid[j] + f * (grid[j + 1] - grid[j]);
                    break;
                }
            }
            let mut right = *grid.last().unwrap();
            for j in i + 1..values.len() {
                if values[j] <= half {
                    let f = (values[j - 1] - half) / (values[j - 1] - values[j]);
                    right = grid[j - 1] + f * (grid[j] - grid[j - 1]);
                    break;
                }
            }
            peaks.push(Peak {
                position_hz: grid[i],
                height: values[i],
                width_hz: right - left,
            });
        }
    }
    peaks
}

/// 2D spectrum over (laser detuning, cavity detuning), jointly normalized.
#[derive(Debug, Clone)]
pub struct SpectrumMap {
    pub laser_detuning_hz: Vec<f64>,
    pub cavity_detuning_hz: Vec<f64>,
    /// amplitude[cavity_index][laser_index]
    pub amplitude: Vec<Vec<f64>>,
}

/// Eigen-backend spectrum per cavity detuning; all rows share one global
/// normalization so the avoided-crossing contrast is preserved.
pub fn spectrum_map(
    rates: &CqedRates,
    laser_grid_hz: &[f64],
    cavity_grid_hz: &[f64],
) -> Result<SpectrumMap> {
    check_ascending("laser_grid", laser_grid_hz)?;
    check_ascending("cavity_grid", cavity_grid_hz)?;
    let mut rows = Vec::with_capacity(cavity_grid_hz.len());
    let mut global_max = 0.0f64;
    for &dc in cavity_grid_hz {
        let r = CqedRates {
            delta_ca: dc,
            ..*rates
        };
        let sys = build_jc(&r, 2)?;
        let lines = eigen_lines(&sys)?;
        let mut row = vec![0.0; laser_grid_hz.len()];
        for (i, &x) in laser_grid_hz.iter().enumerate() {
            let mut acc = 0.0;
            for &(pos, weight, hwhm) in &lines {
                let h = hwhm.max(f64::MIN_POSITIVE);
                acc += weight * h / std::f64::consts::PI / ((x - pos).powi(2) + h * h);
            }
            row[i] = acc;
            global_max = global_max.max(acc);
        }
        rows.push(row);
    }
    if global_max <= 0.0 {
        return Err(Error::Grid("spectrum map vanished on the grid".into()));
    }
    for row in &mut rows {
        for v in row {
            *v /= global_max;
        }
    }
    Ok(SpectrumMap {
        laser_detuning_hz: laser_grid_hz.to_vec(),
        cavity_detuning_hz: cavity_grid_hz.to_vec(),
        amplitude: rows,
    })
}

/// Weak-drive steady-state spectrum: intracavity ⟨a†a⟩ versus laser-ion
/// detuning. Serves as the independent oracle for [`spectrum_eigen`] peak
/// positions.
pub fn spectrum_numeric(
    rates: &CqedRates,
    detuning_grid_hz: &[f64],
    probe_amplitude_hz: f64,
    n_fock: usize,
) -> Result<SpectrumResult> {
    check_ascending("detuning_grid", detuning_grid_hz)?;
    if probe_amplitude_hz <= 0.0 {
        return Err(Error::InvalidInput {
            name: "probe_amplitude".into(),
            reason: "probe amplitude must be positive".into(),
        });
    }
    let space = HilbertSpace::two_level_with_mode(n_fock)?;
    let kappa_ang = to_angular(rates.kappa);
    let gamma_ang = to_angular(rates.gamma);
    let gamma_p_ang = to_angular(rates.gamma_p);
    let e_ang = to_angular(probe_amplitude_hz);
    let n_op = QOperator::number(&space, 1)?;
    let a = QOperator::annihilation(&space, 1)?;
    let drive = a.add(&a.dagger())?.scaled(C64::new(e_ang, 0.0));

    let mut values = Vec::with_capacity(detuning_grid_hz.len());
    for &delta_la in detuning_grid_hz {
        let h = jc_hamiltonian(&space, rates, delta_la)?.add(&drive)?;
        let liou = build_liouvillian(
            &h,
            &DissipatorSpec::new(vec![kappa_ang], gamma_ang, gamma_p_ang)?,
        )?;
        let rho = steady_state(&liou)?;
        let n = expectation(&rho, &n_op)?.re;
        if n > WEAK_PROBE_LIMIT {
            return Err(Error::ProbeTooStrong {
                n,
                limit: WEAK_PROBE_LIMIT,
            });
        }
        // top-level population guard for the truncation
        let top = rho.fock_level_population(1, n_fock - 1)?;
        if top > 1e-6 {
            return Err(Error::TruncationInadequate(format!(
                "steady state holds {top:.3e} population in the top Fock level"
            )));
        }
        values.push(n);
    }

    let scale = values.iter().cloned().fold(0.0f64, f64::max);
    if scale <= 0.0 {
        return Err(Error::Grid("numeric spectrum vanished on the grid".into()));
    }
    let amplitude: Vec<f64> = values.iter().map(|v| v / scale).collect();
    let peaks = curve_maxima(detuning_grid_hz, &amplitude);
    Ok(SpectrumResult {
        detuning_hz: detuning_grid_hz.to_vec(),
        amplitude,
        peaks,
        scale,
    })
}

/// Initial-state-free weak-probe steady state of an empty driven cavity,
/// used in unit tests; exposed for reuse by transmission oracles.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

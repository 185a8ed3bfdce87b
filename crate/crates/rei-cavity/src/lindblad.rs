//! Liouvillian construction and open-system dynamics.
//!
//! The generator is the standard decay-form master equation
//!
//! ```text
//! dρ/dt = −i[H, ρ] + Σⱼ (rⱼ/2)(2 cⱼ ρ cⱼ† − cⱼ†cⱼ ρ − ρ cⱼ†cⱼ)
//! ```
//!
//! with jump operators c = a (rate κ, one per cavity mode), c = σ− (rate
//! γ), and c = σ_z (rate γ_p), all rates angular. The σ_z channel leaves
//! populations untouched and damps coherences at 2γ_p.
//!
//! Density matrices are vectorized row-major, so vec(AρB) = (A ⊗ Bᵀ) vec(ρ).

use ndarray::linalg::kron;
use ndarray::{Array1, Array2};
use ndarray_linalg::{Norm, Solve, SVD};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{
    DensityMatrix, DensityTolerances, HilbertSpace, QOperator, TRUNCATION_POPULATION_LIMIT,
};

/// Dissipation rates, angular (rad/s).
#[derive(Debug, Clone)]
pub struct DissipatorSpec {
    /// Cavity energy decay rate per Fock-mode factor, in factor order.
    pub kappa: Vec<f64>,
    /// Spontaneous emission rate of each two-level factor.
    pub gamma: f64,
    /// Pure dephasing rate of each two-level factor.
    pub gamma_p: f64,
}

impl DissipatorSpec {
    pub fn new(kappa: Vec<f64>, gamma: f64, gamma_p: f64) -> Result<Self> {
        for (i, &k) in kappa.iter().enumerate() {
            if k < 0.0 {
                return Err(Error::NegativeRate {
                    name: "kappa",
                    value: k,
                })
                .map_err(|e| match e {
                    Error::NegativeRate { value, .. } => Error::InvalidInput {
                        name: format!("kappa[{i}]"),
                        reason: format!("negative rate {value:.6e}"),
                    },
                    other => other,
                });
            }
        }
        if gamma < 0.0 {
            return Err(Error::NegativeRate {
                name: "gamma",
                value: gamma,
            });
        }
        if gamma_p < 0.0 {
            return Err(Error::NegativeRate {
                name: "gamma_p",
                value: gamma_p,
            });
        }
        Ok(Self {
            kappa,
            gamma,
            gamma_p,
        })
    }

    /// No dissipation (closed system).
    pub fn closed(n_modes: usize) -> Self {
        Self {
            kappa: vec![0.0; n_modes],
            gamma: 0.0,
            gamma_p: 0.0,
        }
    }
}

/// The full generator as a dense superoperator over vec(ρ).
#[derive(Debug, Clone)]
pub struct Liouvillian {
    space: HilbertSpace,
    superop: Array2<C64>,
}

fn transpose_conj(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|x| x.conj())
}

fn superop_identity(d: usize) -> Array2<C64> {
    Array2::from_diag(&Array1::from_elem(d, C64::new(1.0, 0.0)))
}

/// Add the decay-form dissipator with jump operator `c` and rate `r` to the
/// superoperator `acc` (row-major vectorization).
fn add_dissipator(acc: &mut Array2<C64>, c: &Array2<C64>, r: f64) {
    if r == 0.0 {
        return;
    }
    let d = c.nrows();
    let id = superop_identity(d);
    let cdag_c = transpose_conj(c).dot(c);
    let half = C64::new(0.5 * r, 0.0);
    // 2 c ρ c†  →  c ⊗ conj(c)
    let sandwich = kron(c, &c.mapv(|x| x.conj()));
    // c†c ρ  →  (c†c) ⊗ I ;  ρ c†c  →  I ⊗ (c†c)ᵀ
    let left = kron(&cdag_c, &id);
    let right = kron(&id, &cdag_c.t().to_owned());
    *acc = &*acc + &sandwich.mapv(|x| 2.0 * half * x)
        - &left.mapv(|x| half * x)
        - &right.mapv(|x| half * x);
}

/// Build the Liouvillian for Hamiltonian `h` (angular units) and the given
/// dissipation channels.
pub fn build_liouvillian(h: &QOperator, spec: &DissipatorSpec) -> Result<Liouvillian> {
    h.check_hermitian(1e-12)?;
    let space = h.space().clone();
    let fock = space.fock_factor_indices();
    if spec.kappa.len() != fock.len() {
        return Err(Error::InvalidInput {
            name: "kappa".into(),
            reason: format!(
                "{} cavity rates supplied for {} Fock modes",
                spec.kappa.len(),
                fock.len()
            ),
        });
    }
    for &k in &spec.kappa {
        if k < 0.0 {
            return Err(Error::NegativeRate {
                name: "kappa",
                value: k,
            });
        }
    }
    if spec.gamma < 0.0 {
        return Err(Error::NegativeRate {
            name: "gamma",
            value: spec.gamma,
        });
    }
    if spec.gamma_p < 0.0 {
        return Err(Error::NegativeRate {
            name: "gamma_p",
            value: spec.gamma_p,
        });
    }

    let d = space.total_dim();
    let id = superop_identity(d);
    let hm = h.matrix();

    // −i (H ⊗ I − I ⊗ Hᵀ)
    let mut s = kron(hm, &id);
    s = &s - &kron(&id, &hm.t().to_owned());
    let mut superop = s.mapv(|x| C64::new(0.0, -1.0) * x);

    for (&mode, &rate) in fock.iter().zip(&spec.kappa) {
        let a = QOperator::annihilation(&space, mode)?;
        add_dissipator(&mut superop, a.matrix(), rate);
    }
    for tls in space.two_level_factor_indices() {
        if spec.gamma > 0.0 {
            let sm = QOperator::lowering(&space, tls)?;
            add_dissipator(&mut superop, sm.matrix(), spec.gamma);
        }
        if spec.gamma_p > 0.0 {
            let sz = QOperator::sigma_z(&space, tls)?;
            add_dissipator(&mut superop, sz.matrix(), spec.gamma_p);
        }
    }

    Ok(Liouvillian { space, superop })
}

impl Liouvillian {
    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn superoperator(&self) -> &Array2<C64> {
        &self.superop
    }

    /// Apply the generator to a density matrix: dρ/dt = L(ρ).
    pub fn apply(&self, rho: &DensityMatrix) -> Result<Array2<C64>> {
        if rho.space() != &self.space {
            return Err(Error::SpaceMismatch("liouvillian apply".into()));
        }
        let d = self.space.total_dim();
        let v = vectorize(rho.matrix());
        let dv = self.superop.dot(&v);
        Ok(devectorize(&dv, d))
    }
}

fn vectorize(m: &Array2<C64>) -> Array1<C64> {
    Array1::from_iter(m.iter().cloned())
}

fn devectorize(v: &Array1<C64>, d: usize) -> Array2<C64> {
    Array2::from_shape_vec((d, d), v.to_vec()).expect("dimension mismatch in devectorize")
}

/// Integrator controls for [`evolve`].
#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Population allowed in the top Fock level of any mode before the run
    /// aborts with a truncation diagnostic.
    pub truncation_limit: f64,
    pub density_tol: DensityTolerances,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            truncation_limit: TRUNCATION_POPULATION_LIMIT,
            density_tol: DensityTolerances::default(),
        }
    }
}

struct Dopri5<'a> {
    s: &'a Array2<C64>,
    rel_tol: f64,
    abs_tol: f64,
}

impl<'a> Dopri5<'a> {
    fn rhs(&self, y: &Array1<C64>) -> Array1<C64> {
        self.s.dot(y)
    }

    /// One adaptive Dormand–Prince 5(4) step; returns (y_new, err_norm).
    fn step(&self, y: &Array1<C64>, h: f64, k1: &Array1<C64>) -> (Array1<C64>, Array1<C64>, f64) {
        const A21: f64 = 1.0 / 5.0;
        const A31: f64 = 3.0 / 40.0;
        const A32: f64 = 9.0 / 40.0;
        const A41: f64 = 44.0 / 45.0;
        const A42: f64 = -56.0 / 15.0;
        const A43: f64 = 32.0 / 9.0;
        const A51: f64 = 19372.0 / 6561.0;
        const A52: f64 = -25360.0 / 2187.0;
        const A53: f64 = 64448.0 / 6561.0;
        const A54: f64 = -212.0 / 729.0;
        const A61: f64 = 9017.0 / 3168.0;
        const A62: f64 = -355.0 / 33.0;
        const A63: f64 = 46732.0 / 5247.0;
        const A64: f64 = 49.0 / 176.0;
        const A65: f64 = -5103.0 / 18656.0;
        const B1: f64 = 35.0 / 384.0;
        const B3: f64 = 500.0 / 1113.0;
        const B4: f64 = 125.0 / 192.0;
        const B5: f64 = -2187.0 / 6784.0;
        const B6: f64 = 11.0 / 84.0;
        // embedded 4th-order weights
        const E1: f64 = 5179.0 / 57600.0;
        const E3: f64 = 7571.0 / 16695.0;
        const E4: f64 = 393.0 / 640.0;
        const E5: f64 = -92097.0 / 339200.0;
        const E6: f64 = 187.0 / 2100.0;
        const E7: f64 = 1.0 / 40.0;

        let hc = C64::new(h, 0.0);
        let k2 = self.rhs(&(y + &k1.mapv(|x| hc * A21 * x)));
        let k3 = self.rhs(&(y + &k1.mapv(|x| hc * A31 * x) + &k2.mapv(|x| hc * A32 * x)));
        let k4 = self.rhs(
            &(y + &k1.mapv(|x| hc * A41 * x)
                + &k2.mapv(|x| hc * A42 * x)
                + &k3.mapv(|x| hc * A43 * x)),
        );
        let k5 = self.rhs(
            &(y + &k1.mapv(|x| hc * A51 * x)
                + &k2.mapv(|x| hc * A52 * x)
                + &k3.mapv(|x| hc * A53 * x)
                + &k4.mapv(|x| hc * A54 * x)),
        );
        let k6 = self.rhs(
            &(y + &k1.mapv(|x| hc * A61 * x)
                + &k2.mapv(|x| hc * A62 * x)
                + &k3.mapv(|x| hc * A63 * x)
                + &k4.mapv(|x| hc * A64 * x)
                + &k5.mapv(|x| hc * A65 * x)),
        );
        let y5 = y
            + &k1.mapv(|x| hc * B1 * x)
            + &k3.mapv(|x| hc * B3 * x)
            + &k4.mapv(|x| hc * B4 * x)
            + &k5.mapv(|x| hc * B5 * x)
            + &k6.mapv(|x| hc * B6 * x);
        let k7 = self.rhs(&y5);
        let y4 = y
            + &k1.mapv(|x| hc * E1 * x)
            + &k3.mapv(|x| hc * E3 * x)
            + &k4.mapv(|x| hc * E4 * x)
            + &k5.mapv(|x| hc * E5 * x)
            + &k6.mapv(|x| hc * E6 * x)
            + &k7.mapv(|x| hc * E7 * x);

        let mut err2 = 0.0;
        for i in 0..y.len() {
            let sc = self.abs_tol + self.rel_tol * y[i].norm().max(y5[i].norm());
            let e = (y5[i] - y4[i]).norm() / sc;
            err2 += e * e;
        }
        let err = (err2 / y.len() as f64).sqrt();
        (y5, k7, err)
    }
}

/// Integrate dρ/dt = L(ρ) and return ρ at each requested time.
///
/// `t_grid` must be ascending with t_grid[0] ≥ 0. Each returned state is
/// checked against the density-matrix invariants and the Fock
/// truncation-adequacy bound; violations abort the run.
pub fn evolve(
    liouvillian: &Liouvillian,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<DensityMatrix>> {
    if rho0.space() != liouvillian.space() {
        return Err(Error::SpaceMismatch("evolve".into()));
    }
    check_grid(t_grid)?;
    rho0.validate(&opts.density_tol)?;

    let d = liouvillian.space().total_dim();
    let stepper = Dopri5 {
        s: &liouvillian.superop,
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
    };

    // Characteristic rate for the initial step.
    let s_scale = liouvillian.superop.norm_max().max(f64::MIN_POSITIVE);
    let mut h = (0.1 / s_scale).min(1.0);

    let mut t = 0.0;
    let mut y = vectorize(rho0.matrix());
    let mut k1 = stepper.rhs(&y);
    let mut out = Vec::with_capacity(t_grid.len());

    let fock_factors: Vec<(usize, usize)> = liouvillian
        .space()
        .fock_factor_indices()
        .into_iter()
        .map(|i| (i, liouvillian.space().factors()[i].dim()))
        .collect();

    for &t_target in t_grid {
        while t < t_target {
            let h_try = h.min(t_target - t);
            let (y_new, k_new, err) = stepper.step(&y, h_try, &k1);
            if err <= 1.0 {
                t += h_try;
                y = y_new;
                k1 = k_new;
                // Truncation adequacy at every accepted step: diagonal
                // population of the top Fock level of each mode.
                for &(mode, dim) in &fock_factors {
                    if dim < 2 {
                        continue;
                    }
                    let rho_now = DensityMatrix::from_matrix(
                        liouvillian.space().clone(),
                        devectorize(&y, d),
                    )?;
                    let pop = rho_now.fock_level_population(mode, dim - 1)?;
                    if pop > opts.truncation_limit {
                        return Err(Error::TruncationInadequate(format!(
                            "population {pop:.3e} in top Fock level of mode factor {mode} at t = {t:.3e} s"
                        )));
                    }
                }
            }
            // Standard PI-free step-size update with safety factor.
            let factor = if err > 0.0 {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            h = (h_try * factor).max(f64::MIN_POSITIVE);
            if h < 1e-18 * t_target.max(1e-12) {
                return Err(Error::StepUnderflow { t });
            }
        }
        let rho = DensityMatrix::from_matrix(liouvillian.space().clone(), devectorize(&y, d))?;
        rho.validate(&opts.density_tol)?;
        out.push(rho);
    }
    Ok(out)
}

/// Matrix-exponential stepping backend: ρ(tᵢ) = exp(L·tᵢ) ρ₀.
///
/// Exact for the time-independent generator up to the Padé tolerance; used
/// as the built-in cross-check oracle for [`evolve`].
pub fn evolve_expm(
    liouvillian: &Liouvillian,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<DensityMatrix>> {
    if rho0.space() != liouvillian.space() {
        return Err(Error::SpaceMismatch("evolve_expm".into()));
    }
    check_grid(t_grid)?;
    let d = liouvillian.space().total_dim();
    let mut out = Vec::with_capacity(t_grid.len());
    let mut y = vectorize(rho0.matrix());
    let mut t_prev = 0.0;
    for &t in t_grid {
        let dt = t - t_prev;
        if dt > 0.0 {
            let scaled = liouvillian.superop.mapv(|x| x * C64::new(dt, 0.0));
            let propagator = expm(&scaled)?;
            y = propagator.dot(&y);
        }
        t_prev = t;
        let rho = DensityMatrix::from_matrix(liouvillian.space().clone(), devectorize(&y, d))?;
        rho.validate(&opts.density_tol)?;
        out.push(rho);
    }
    Ok(out)
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::Grid("time grid is empty".into()));
    }
    if t_grid[0] < 0.0 {
        return Err(Error::Grid("time grid starts before t = 0".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid("time grid is not strictly ascending".into()));
    }
    Ok(())
}

/// Dense matrix exponential by scaling-and-squaring with a 13th-order Padé
/// approximant.
pub fn expm(a: &Array2<C64>) -> Result<Array2<C64>> {
    let d = a.nrows();
    let norm = a.norm_l1();
    const THETA_13: f64 = 5.371920351148152;
    let s = if norm > THETA_13 {
        ((norm / THETA_13).log2().ceil() as i32).max(0)
    } else {
        0
    };
    let a_scaled = a.mapv(|x| x / C64::new(2f64.powi(s), 0.0));

    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];

    let id = superop_identity(d);
    let a2 = a_scaled.dot(&a_scaled);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);

    let u_inner = &a6.mapv(|x| x * B[13])
        + &a4.mapv(|x| x * B[11])
        + &a2.mapv(|x| x * B[9]);
    let u = a_scaled.dot(
        &(&a6.dot(&u_inner)
            + &a6.mapv(|x| x * B[7])
            + &a4.mapv(|x| x * B[5])
            + &a2.mapv(|x| x * B[3])
            + &id.mapv(|x| x * B[1])),
    );
    let v_inner = &a6.mapv(|x| x * B[12])
        + &a4.mapv(|x| x * B[10])
        + &a2.mapv(|x| x * B[8]);
    let v = &a6.dot(&v_inner)
        + &a6.mapv(|x| x * B[6])
        + &a4.mapv(|x| x * B[4])
        + &a2.mapv(|x| x * B[2])
        + &id.mapv(|x| x * B[0]);

    // Solve (V − U) X = (V + U) column by column.
    let q = &v - &u;
    let p = &v + &u;
    let mut x = Array2::<C64>::zeros((d, d));
    use ndarray_linalg::Factorize;
    let lu = q.factorize()?;
    for j in 0..d {
        let col = p.column(j).to_owned();
        let sol = lu.solve(&col)?;
        x.column_mut(j).assign(&sol);
    }
    for _ in 0..s {
        x = x.dot(&x);
    }
    Ok(x)
}

/// Steady state of the generator: solves L(ρ) = 0 with unit trace by
/// replacing one row of the vectorized superoperator with the trace
/// constraint. A degenerate null space is detected and reported rather
/// than silently resolved.
pub fn steady_state(liouvillian: &Liouvillian) -> Result<DensityMatrix> {
    let d = liouvillian.space().total_dim();
    let n = d * d;
    let mut m = liouvillian.superop.clone();
    let mut b = Array1::<C64>::zeros(n);
    // Replace the first row with Σᵢ ρᵢᵢ = 1 (row-major: entries i*d + i).
    for j in 0..n {
        m[[0, j]] = C64::new(0.0, 0.0);
    }
    for i in 0..d {
        m[[0, i * d + i]] = C64::new(1.0, 0.0);
    }
    b[0] = C64::new(1.0, 0.0);

    let solved = m.solve(&b);
    let x = match solved {
        Ok(x) => x,
        Err(_) => return Err(degenerate_diagnostic(liouvillian)),
    };

    // Residual against the original generator, scaled by its norm.
    let resid = liouvillian.superop.dot(&x);
    let resid_norm = resid.norm_l2();
    let scale = liouvillian.superop.norm_l2().max(f64::MIN_POSITIVE);
    if !resid_norm.is_finite() || resid_norm > 1e-10 * scale {
        return Err(degenerate_diagnostic(liouvillian));
    }

    // Symmetrize rounding noise; the trace row already pins tr ρ = 1.
    let mut rho = devectorize(&x, d);
    let rho_dag = transpose_conj(&rho);
    rho = (&rho + &rho_dag).mapv(|x| x * C64::new(0.5, 0.0));
    DensityMatrix::from_matrix(liouvillian.space().clone(), rho)
}

fn degenerate_diagnostic(liouvillian: &Liouvillian) -> Error {
    // Rank-deficiency count via SVD of the generator.
    match liouvillian.superop.svd(false, false) {
        Ok((_, sv, _)) => {
            let max_sv = sv.iter().cloned().fold(0.0f64, f64::max);
            let tol = 1e-12 * max_sv.max(f64::MIN_POSITIVE);
            let null_dim = sv.iter().filter(|&&s| s <= tol).count();
            Error::SteadyState(format!(
                "null space appears {null_dim}-dimensional (singular values below {tol:.3e}); \
                 add a drive or dissipation to make the steady state unique"
            ))
        }
        Err(e) => Error::SteadyState(format!("degeneracy diagnostic failed: {e}")),
    }
}

/// ⟨Op⟩ = tr(ρ·Op).
pub fn expectation(rho: &DensityMatrix, op: &QOperator) -> Result<C64> {
    if rho.space() != op.space() {
        return Err(Error::SpaceMismatch("expectation".into()));
    }
    let d = rho.matrix().nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += rho.matrix()[[i, j]] * op.matrix()[[j, i]];
        }
    }
    Ok(acc)
}

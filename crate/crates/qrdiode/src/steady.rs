//! Steady states of the secular master equation, by two independent
//! routes: the classical rate-matrix null space, and direct RK4 time
//! evolution of the full generator. The two must agree; keeping both
//! paths alive is what lets the test suite cross-check them.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::dissipation::{Liouvillian, RateMatrix};
use crate::numerics::{self, eigh, QOperator};
use crate::{Error, Result};

/// Singular values below `tol * sigma_max` count as zero when deciding
/// the null-space dimension.
pub const DEFAULT_NULLSPACE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    NullSpace,
    TimeEvolution,
}

/// A diagonal (energy-basis) steady state plus solution diagnostics.
#[derive(Debug, Clone)]
pub struct SteadyState {
    /// Level occupations, clamped and normalized to sum one.
    pub populations: Vec<f64>,
    /// Residual of the route that produced the state: |M p|_inf for the
    /// null space, |d rho/dt|_inf at the end of a time evolution.
    pub residual: f64,
    pub method: SolveMethod,
    /// Largest remaining coherence magnitude (zero for the null-space
    /// route, which works on populations only).
    pub max_offdiag: f64,
}

/// Stationary populations of a rate matrix.
pub fn solve_steady(rate: &RateMatrix, nullspace_tol: f64) -> Result<SteadyState> {
    let p = numerics::nullspace(rate.matrix(), nullspace_tol)?;
    let residual = (rate.matrix() * &p)
        .iter()
        .fold(0.0_f64, |a, &x| a.max(x.abs()));
    Ok(SteadyState {
        populations: p.iter().copied().collect(),
        residual,
        method: SolveMethod::NullSpace,
        max_offdiag: 0.0,
    })
}

/// Knobs for [`evolve_to_steady`]; `None` picks automatic values from
/// the generator's rates.
#[derive(Debug, Clone, Copy, Default)]
pub struct EvolveOptions {
    pub t_final: Option<f64>,
    pub dt: Option<f64>,
}

/// Integrates d(rho)/dt = L rho from `rho0` until the derivative dies
/// out, and extracts the populations.
///
/// The automatic horizon is fifty relaxation times of the slowest
/// channel; the automatic step keeps `dt * |L|` near 0.1, well inside
/// the RK4 stability region. Because the exact steady state is a fixed
/// point of the RK4 map, endpoint accuracy is set by how far the
/// transient has decayed, not by the step size.
pub fn evolve_to_steady(
    liouv: &Liouvillian,
    rho0: &QOperator,
    opts: &EvolveOptions,
) -> Result<(SteadyState, QOperator)> {
    let dim = liouv.dim();
    if rho0.dim() != dim {
        return Err(Error::BasisMismatch(format!(
            "initial state dim {} vs generator dim {}",
            rho0.dim(),
            dim
        )));
    }
    if !rho0.is_hermitian(1e-10) {
        return Err(Error::NonHermitianInput {
            residual: rho0.hermiticity_residual(),
            tol: 1e-10 * rho0.max_abs(),
        });
    }
    if (rho0.trace().re - 1.0).abs() > 1e-6 || rho0.trace().im.abs() > 1e-6 {
        return Err(Error::NonPhysical(format!(
            "initial state trace {} is not 1",
            rho0.trace()
        )));
    }
    let eig0 = eigh(&rho0.hermitized())?;
    if eig0.energies[0] < -1e-6 {
        return Err(Error::NonPhysical(format!(
            "initial state eigenvalue {:.3e} is negative",
            eig0.energies[0]
        )));
    }

    let rates: Vec<f64> = liouv
        .channels()
        .iter()
        .map(|c| c.gamma_plus + c.gamma_minus)
        .collect();
    let slowest = rates.iter().copied().fold(f64::MAX, f64::min);
    if liouv.channels().is_empty() || !(slowest > 0.0) {
        return Err(Error::InvalidParams(
            "time evolution needs at least one dissipative channel".into(),
        ));
    }
    let norm_est = liouv.norm_estimate();
    let t_final = opts.t_final.unwrap_or(50.0 / slowest);
    if !(t_final > 0.0) {
        return Err(Error::InvalidParams(format!(
            "evolution horizon must be positive, got {t_final}"
        )));
    }
    let dt_req = opts.dt.unwrap_or(0.1 / norm_est).min(t_final);
    let steps = (t_final / dt_req).ceil() as usize;
    let dt = t_final / steps as f64;

    let converge_tol = 1e-13 * norm_est;
    let accept_tol = 1e-10 * norm_est;

    let unvec = |v: &DVector<C64>| DMatrix::from_iterator(dim, dim, v.iter().copied());
    let f = |v: &DVector<C64>| {
        let d = liouv.apply(&unvec(v));
        DVector::from_iterator(dim * dim, d.iter().copied())
    };
    let inf = |v: &DVector<C64>| v.iter().fold(0.0_f64, |a, z| a.max(z.norm()));

    let mut y = DVector::from_iterator(dim * dim, rho0.matrix().iter().copied());
    let mut deriv = inf(&f(&y));
    if deriv > converge_tol {
        for step in 0..steps {
            y = numerics::rk4_step(&f, &y, dt);
            if step % 8 == 7 || step + 1 == steps {
                deriv = inf(&f(&y));
                if deriv <= converge_tol {
                    break;
                }
            }
        }
    }
    if deriv > accept_tol {
        return Err(Error::NotConverged(format!(
            "derivative norm {deriv:.3e} after t = {t_final:.3e} \
             (acceptance level {accept_tol:.3e})"
        )));
    }

    let rho = QOperator::new(unvec(&y)).hermitized();
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-6 {
        return Err(Error::NonPhysical(format!(
            "evolved state trace drifted to {}",
            tr.re
        )));
    }
    let spect = eigh(&rho)?;
    if spect.energies[0] < -1e-6 {
        return Err(Error::NonPhysical(format!(
            "evolved state eigenvalue {:.3e} is negative",
            spect.energies[0]
        )));
    }

    let mut max_offdiag = 0.0_f64;
    for i in 0..dim {
        for j in 0..dim {
            if i != j {
                max_offdiag = max_offdiag.max(rho.matrix()[(i, j)].norm());
            }
        }
    }
    let diag = DVector::from_iterator(dim, (0..dim).map(|i| rho.matrix()[(i, i)].re));
    let populations = numerics::normalize_populations(diag)?;

    Ok((
        SteadyState {
            populations: populations.iter().copied().collect(),
            residual: deriv,
            method: SolveMethod::TimeEvolution,
            max_offdiag,
        },
        rho,
    ))
}

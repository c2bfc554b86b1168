//! Reported quantities: bath-resolved heat currents (computed two
//! independent ways), the rectification coefficient from the
//! forward/reverse temperature protocol, output photon detection
//! rates with their asymmetry coefficient, and the per-transition
//! ledger that decomposes a current into channel contributions.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::dissipation::{
    apply_dissipator, default_deg_tol, extract_channels, rethermalized, BathSpec,
    TransitionChannel,
};
use crate::models::{ModelParams, ModelSpec};
use crate::numerics::{eigh, EigenSystem, QOperator};
use crate::steady::{solve_steady, SteadyState};
use crate::{Bath, Error, Result};

/// Ratios |a ± b| / |a ∓ b| are reported as undefined below this
/// denominator.
pub const RATIO_DENOM_FLOOR: f64 = 1e-15;

/// Heat currents into the system from each bath, units of hbar omega_0
/// squared (frequency units with hbar = k_B = 1).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HeatCurrents {
    pub q_l: f64,
    pub q_r: f64,
}

impl HeatCurrents {
    pub fn for_bath(&self, bath: Bath) -> f64 {
        match bath {
            Bath::L => self.q_l,
            Bath::R => self.q_r,
        }
    }

    /// |q_L + q_R|; zero at an exact steady state.
    pub fn conservation_residual(&self) -> f64 {
        (self.q_l + self.q_r).abs()
    }

    pub fn conservation_ok(&self) -> bool {
        self.conservation_residual() <= 1e-10 * self.q_l.abs().max(self.q_r.abs()).max(1e-18)
    }
}

fn check_members(channels: &[TransitionChannel], dim: usize) -> Result<()> {
    for ch in channels {
        for m in &ch.members {
            if m.lower >= dim || m.upper >= dim {
                return Err(Error::BasisMismatch(format!(
                    "channel member ({}, {}) outside a {dim}-level system",
                    m.lower, m.upper
                )));
            }
        }
    }
    Ok(())
}

/// Net decay rate through one transition: emission minus absorption,
/// weighted by the matrix element.
fn net_rate(ch: &TransitionChannel, lower: usize, upper: usize, w: f64, p: &[f64]) -> f64 {
    (ch.gamma_plus * p[upper] - ch.gamma_minus * p[lower]) * w
}

/// Heat currents from the population rates: for each bath,
/// q = -sum over members of (net decay rate) * (E_upper - E_lower),
/// with the exact level splitting of each member (not the grouped
/// channel frequency, so the trace form is matched to roundoff).
pub fn heat_current_rate_form(
    channels: &[TransitionChannel],
    energies: &[f64],
    populations: &[f64],
) -> Result<HeatCurrents> {
    if energies.len() != populations.len() {
        return Err(Error::BasisMismatch(format!(
            "{} energies vs {} populations",
            energies.len(),
            populations.len()
        )));
    }
    check_members(channels, energies.len())?;
    let mut q = HeatCurrents { q_l: 0.0, q_r: 0.0 };
    for ch in channels {
        let mut acc = 0.0;
        for m in &ch.members {
            let de = energies[m.upper] - energies[m.lower];
            acc -= net_rate(ch, m.lower, m.upper, m.amplitude.norm_sqr(), populations) * de;
        }
        match ch.bath {
            Bath::L => q.q_l += acc,
            Bath::R => q.q_r += acc,
        }
    }
    Ok(q)
}

/// Heat currents as Tr{H L_nu[rho]}, evaluated with the per-bath
/// dissipator acting on the full density matrix. Independent of the
/// rate form above; the two must agree to 1e-10 relative.
pub fn heat_current_trace_form(
    channels: &[TransitionChannel],
    energies: &[f64],
    rho: &QOperator,
) -> Result<HeatCurrents> {
    if rho.dim() != energies.len() {
        return Err(Error::BasisMismatch(format!(
            "state dim {} vs {} energies",
            rho.dim(),
            energies.len()
        )));
    }
    check_members(channels, energies.len())?;
    let mut q = HeatCurrents { q_l: 0.0, q_r: 0.0 };
    for bath in [Bath::L, Bath::R] {
        let subset: Vec<TransitionChannel> = channels
            .iter()
            .filter(|c| c.bath == bath)
            .cloned()
            .collect();
        if subset.is_empty() {
            continue;
        }
        let d = apply_dissipator(&subset, rho.matrix());
        let val: f64 = (0..energies.len()).map(|i| energies[i] * d[(i, i)].re).sum();
        match bath {
            Bath::L => q.q_l = val,
            Bath::R => q.q_r = val,
        }
    }
    Ok(q)
}

/// Rectification coefficient |q_f + q_r| / |q_f - q_r|: 0 for a
/// reciprocal device, 1 for a perfect diode. `None` when both
/// protocol currents are too small to compare.
pub fn rectification(q_f: f64, q_r: f64) -> Option<f64> {
    let denom = (q_f - q_r).abs();
    if denom < RATIO_DENOM_FLOOR {
        None
    } else {
        Some((q_f + q_r).abs() / denom)
    }
}

/// Detection rate of the bath's output field: the steady-state
/// expectation of the frequency-weighted eigenoperator product,
/// D = sum over channel pairs (k, k') of omega_k omega_k'
/// Tr(rho S_k^dag S_k'), units omega_0 squared. The physical output
/// photon flux is gamma * D.
pub fn photon_detection_rate(
    channels: &[TransitionChannel],
    bath: Bath,
    rho: &QOperator,
) -> Result<f64> {
    check_members(channels, rho.dim())?;
    let mut total = C64::new(0.0, 0.0);
    let of_bath: Vec<&TransitionChannel> = channels.iter().filter(|c| c.bath == bath).collect();
    for k in &of_bath {
        for kp in &of_bath {
            let mut tr = C64::new(0.0, 0.0);
            for a in &k.members {
                for b in &kp.members {
                    if a.lower == b.lower {
                        tr += a.amplitude.conj() * b.amplitude * rho.matrix()[(b.upper, a.upper)];
                    }
                }
            }
            total += C64::new(k.omega * kp.omega, 0.0) * tr;
        }
    }
    if total.im.abs() > 1e-10 * total.re.abs().max(1e-18) {
        return Err(Error::NonPhysical(format!(
            "detection rate picked up an imaginary part {:.3e}",
            total.im
        )));
    }
    Ok(total.re)
}

/// Diagonal-state reduction of [`photon_detection_rate`]:
/// sum_k omega_k^2 sum_members |amplitude|^2 p_upper. Kept as an
/// independent cross-check of the double sum.
pub fn photon_detection_rate_diagonal(
    channels: &[TransitionChannel],
    bath: Bath,
    populations: &[f64],
) -> Result<f64> {
    check_members(channels, populations.len())?;
    Ok(channels
        .iter()
        .filter(|c| c.bath == bath)
        .map(|ch| {
            ch.omega
                * ch.omega
                * ch.members
                    .iter()
                    .map(|m| m.amplitude.norm_sqr() * populations[m.upper])
                    .sum::<f64>()
        })
        .sum())
}

/// Asymmetry coefficient |D_f - D_r| / |D_f + D_r| of the detection
/// rates under the temperature exchange; `None` when both vanish.
pub fn photon_asymmetry(d_f: f64, d_r: f64) -> Option<f64> {
    let denom = (d_f + d_r).abs();
    if denom < RATIO_DENOM_FLOOR {
        None
    } else {
        Some((d_f - d_r).abs() / denom)
    }
}

/// One transition's contribution to a bath current.
#[derive(Debug, Clone, Serialize)]
pub struct TransitionLedgerEntry {
    pub bath: Bath,
    /// Lower / upper level indices (ascending energy order).
    pub lower: usize,
    pub upper: usize,
    /// Exact splitting E_upper - E_lower.
    pub omega: f64,
    /// Net decay rate through this transition at the steady state.
    pub net_rate: f64,
    /// -net_rate * omega; a bath's entries sum to its heat current.
    pub energy_flux_contribution: f64,
}

/// Decomposes the heat currents transition by transition.
pub fn transition_ledger(
    channels: &[TransitionChannel],
    energies: &[f64],
    populations: &[f64],
) -> Result<Vec<TransitionLedgerEntry>> {
    if energies.len() != populations.len() {
        return Err(Error::BasisMismatch(format!(
            "{} energies vs {} populations",
            energies.len(),
            populations.len()
        )));
    }
    check_members(channels, energies.len())?;
    let mut entries = Vec::new();
    for ch in channels {
        for m in &ch.members {
            let omega = energies[m.upper] - energies[m.lower];
            let rate = net_rate(ch, m.lower, m.upper, m.amplitude.norm_sqr(), populations);
            entries.push(TransitionLedgerEntry {
                bath: ch.bath,
                lower: m.lower,
                upper: m.upper,
                omega,
                net_rate: rate,
                energy_flux_contribution: -rate * omega,
            });
        }
    }
    Ok(entries)
}

/// Everything produced by one steady-state solve at fixed temperatures.
#[derive(Debug, Clone)]
pub struct SolvedPoint {
    pub channels: Vec<TransitionChannel>,
    pub steady: SteadyState,
    pub currents: HeatCurrents,
    /// Left-output detection rate D_L (units omega_0 squared).
    pub detection: f64,
}

/// One full record of the forward/reverse protocol at a configured
/// temperature pair: the as-given run supplies (q_L, q_R, q_f = q_R,
/// D_f); the temperature-swapped run supplies (q_r, D_r).
#[derive(Debug, Clone, Serialize)]
pub struct ObservableRecord {
    pub params: ModelParams,
    pub gamma: f64,
    pub t_l: f64,
    pub t_r: f64,
    pub q_l: f64,
    pub q_r: f64,
    pub q_f: f64,
    pub q_rev: f64,
    pub rectification: Option<f64>,
    pub d_f: f64,
    pub d_r: f64,
    pub photon_asymmetry: Option<f64>,
    pub n_fock: Option<usize>,
    /// Worst solver residual of the two runs.
    pub residual: f64,
}

/// Prepared spectral data for one model: eigensystem plus per-bath
/// channel skeletons, so a temperature sweep re-thermalizes rates
/// instead of repeating the O(dim^3) basis work.
#[derive(Debug)]
pub struct PointSolver {
    params: ModelParams,
    spec: ModelSpec,
    es: EigenSystem,
    template_l: Vec<TransitionChannel>,
    template_r: Vec<TransitionChannel>,
    gamma: f64,
    nullspace_tol: f64,
}

impl PointSolver {
    pub fn new(
        params: &ModelParams,
        gamma: f64,
        deg_tol: Option<f64>,
        nullspace_tol: f64,
    ) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParams(format!(
                "bath coupling gamma must be positive, got {gamma}"
            )));
        }
        let spec = params.build()?;
        let es = eigh(&spec.hamiltonian)?;
        let tol = deg_tol.unwrap_or_else(|| default_deg_tol(&es));
        // Template rates at T = 1; every solve re-thermalizes them.
        let unit_l = BathSpec::new(Bath::L, 1.0, gamma)?;
        let unit_r = BathSpec::new(Bath::R, 1.0, gamma)?;
        let template_l = extract_channels(&es, &spec.jump_l, &unit_l, tol)?;
        let template_r = extract_channels(&es, &spec.jump_r, &unit_r, tol)?;
        Ok(Self {
            params: *params,
            spec,
            es,
            template_l,
            template_r,
            gamma,
            nullspace_tol,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn model(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn eigensystem(&self) -> &EigenSystem {
        &self.es
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Both baths' channels with rates thermalized to (T_L, T_R).
    pub fn channels_at(&self, t_l: f64, t_r: f64) -> Result<Vec<TransitionChannel>> {
        let mut ch = rethermalized(&self.template_l, &BathSpec::new(Bath::L, t_l, self.gamma)?)?;
        ch.extend(rethermalized(
            &self.template_r,
            &BathSpec::new(Bath::R, t_r, self.gamma)?,
        )?);
        Ok(ch)
    }

    /// Null-space steady state and observables at one temperature pair.
    pub fn solve(&self, t_l: f64, t_r: f64) -> Result<SolvedPoint> {
        let channels = self.channels_at(t_l, t_r)?;
        let rate = crate::dissipation::build_rate_matrix(&channels, self.es.dim());
        let steady = solve_steady(&rate, self.nullspace_tol)?;
        let currents =
            heat_current_rate_form(&channels, &self.es.energies, &steady.populations)?;
        let detection =
            photon_detection_rate_diagonal(&channels, Bath::L, &steady.populations)?;
        Ok(SolvedPoint {
            channels,
            steady,
            currents,
            detection,
        })
    }

    /// Forward/reverse protocol record at a configured pair: the run
    /// at (t_l, t_r) as given, plus the run with temperatures swapped.
    pub fn record(&self, t_l: f64, t_r: f64) -> Result<ObservableRecord> {
        let fwd = self.solve(t_l, t_r)?;
        let rev = self.solve(t_r, t_l)?;
        let q_f = fwd.currents.q_r;
        let q_rev = rev.currents.q_r;
        Ok(ObservableRecord {
            params: self.params,
            gamma: self.gamma,
            t_l,
            t_r,
            q_l: fwd.currents.q_l,
            q_r: fwd.currents.q_r,
            q_f,
            q_rev,
            rectification: rectification(q_f, q_rev),
            d_f: fwd.detection,
            d_r: rev.detection,
            photon_asymmetry: photon_asymmetry(fwd.detection, rev.detection),
            n_fock: self.params.n_fock(),
            residual: fwd.steady.residual.max(rev.steady.residual),
        })
    }

    /// Transition-by-transition current decomposition at one pair.
    pub fn ledger(&self, t_l: f64, t_r: f64) -> Result<Vec<TransitionLedgerEntry>> {
        let point = self.solve(t_l, t_r)?;
        transition_ledger(&point.channels, &self.es.energies, &point.steady.populations)
    }
}

/// Solves the forward/reverse protocol for a model at one temperature
/// pair, building the solver internally.
pub fn rectification_pair(
    params: &ModelParams,
    t_l: f64,
    t_r: f64,
    gamma: f64,
    deg_tol: Option<f64>,
    nullspace_tol: f64,
) -> Result<ObservableRecord> {
    PointSolver::new(params, gamma, deg_tol, nullspace_tol)?.record(t_l, t_r)
}

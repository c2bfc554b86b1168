//! Global (secular) Lindblad dissipators for two independent Ohmic baths.
//!
//! Each bath couples through a Hermitian system operator S. In the
//! energy eigenbasis, S splits into eigenoperators
//!
//! ```text
//! S(omega) = sum_{E_j - E_i = omega} |E_i><E_i| S |E_j><E_j|,   omega > 0,
//! ```
//!
//! one lowering operator per Bohr frequency (grouped within `deg_tol`).
//! Ohmic coupling gives the bare rate Gamma = gamma * omega, dressed by
//! the thermal occupation into emission Gamma*(nbar+1) and absorption
//! Gamma*nbar. Zero-frequency (dephasing) components are dropped: in
//! this secular form populations close on themselves and the steady
//! state is diagonal in the energy basis, which is what the rate-matrix
//! path exploits and the full Liouvillian lets us verify.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::numerics::{EigenSystem, QOperator};
use crate::{Bath, Error, Result};

/// Matrix elements below this magnitude do not form channels.
pub const AMPLITUDE_TOL: f64 = 1e-12;

/// One reservoir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub label: Bath,
    pub temperature: f64,
    pub gamma: f64,
}

impl BathSpec {
    pub fn new(label: Bath, temperature: f64, gamma: f64) -> Result<Self> {
        if !(temperature > 0.0) || !temperature.is_finite() {
            return Err(Error::InvalidParams(format!(
                "bath temperature must be positive, got {temperature}"
            )));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParams(format!(
                "bath coupling gamma must be positive, got {gamma}"
            )));
        }
        Ok(Self {
            label,
            temperature,
            gamma,
        })
    }
}

/// Bose-Einstein occupation 1/(exp(omega/T) - 1).
///
/// `exp_m1` keeps low-frequency channels accurate and overflows cleanly
/// to zero occupation for omega/T beyond the exponent range.
pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::DomainError(format!(
            "occupation needs omega > 0, got {omega}"
        )));
    }
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::DomainError(format!(
            "occupation needs T > 0, got {temperature}"
        )));
    }
    Ok(1.0 / f64::exp_m1(omega / temperature))
}

/// One transition inside a channel: amplitude `<E_lower|S|E_upper>`.
#[derive(Debug, Clone, Copy)]
pub struct ChannelMember {
    pub lower: usize,
    pub upper: usize,
    pub amplitude: C64,
}

/// All transitions of one bath sharing a Bohr frequency.
#[derive(Debug, Clone)]
pub struct TransitionChannel {
    pub bath: Bath,
    pub omega: f64,
    pub members: Vec<ChannelMember>,
    /// Emission rate Gamma_+ = gamma * omega * (nbar + 1).
    pub gamma_plus: f64,
    /// Absorption rate Gamma_- = gamma * omega * nbar.
    pub gamma_minus: f64,
}

impl TransitionChannel {
    /// Materializes the lowering eigenoperator in the energy basis.
    pub fn op(&self, dim: usize) -> QOperator {
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for mem in &self.members {
            m[(mem.lower, mem.upper)] += mem.amplitude;
        }
        QOperator::new(m)
    }

    pub fn weight(&self) -> f64 {
        self.members.iter().map(|m| m.amplitude.norm_sqr()).sum()
    }
}

/// Default Bohr-frequency grouping tolerance for a spectrum.
pub fn default_deg_tol(es: &EigenSystem) -> f64 {
    let emax = es.energies.iter().fold(0.0_f64, |a, &e| a.max(e.abs()));
    1e-8 * emax.max(1.0)
}

/// Decomposes a Hermitian coupling operator into thermal transition
/// channels for one bath.
pub fn extract_channels(
    es: &EigenSystem,
    s_op: &QOperator,
    bath: &BathSpec,
    deg_tol: f64,
) -> Result<Vec<TransitionChannel>> {
    if s_op.dim() != es.dim() {
        return Err(Error::BasisMismatch(format!(
            "coupling operator dim {} vs eigensystem dim {}",
            s_op.dim(),
            es.dim()
        )));
    }
    if !s_op.is_hermitian(1e-12) {
        return Err(Error::NonHermitianInput {
            residual: s_op.hermiticity_residual(),
            tol: 1e-12 * s_op.max_abs(),
        });
    }
    let dim = es.dim();
    let s_e = es.to_energy_basis(s_op);

    // Candidate lowering transitions i < j, sorted by Bohr frequency
    // (index order tiebreak keeps grouping deterministic).
    let mut cands: Vec<(f64, usize, usize, C64)> = Vec::new();
    for j in 1..dim {
        for i in 0..j {
            let amp = s_e.matrix()[(i, j)];
            let omega = es.energies[j] - es.energies[i];
            if omega > deg_tol && amp.norm() > AMPLITUDE_TOL {
                cands.push((omega, i, j, amp));
            }
        }
    }
    cands.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    let mut channels = Vec::new();
    let mut idx = 0;
    while idx < cands.len() {
        let mut members = vec![ChannelMember {
            lower: cands[idx].1,
            upper: cands[idx].2,
            amplitude: cands[idx].3,
        }];
        let mut omega_sum = cands[idx].0;
        let mut last = cands[idx].0;
        let mut next = idx + 1;
        while next < cands.len() && cands[next].0 - last <= deg_tol {
            members.push(ChannelMember {
                lower: cands[next].1,
                upper: cands[next].2,
                amplitude: cands[next].3,
            });
            omega_sum += cands[next].0;
            last = cands[next].0;
            next += 1;
        }
        let omega = omega_sum / members.len() as f64;
        let nbar = bose_occupation(omega, bath.temperature)?;
        let bare = bath.gamma * omega;
        channels.push(TransitionChannel {
            bath: bath.label,
            omega,
            members,
            gamma_plus: bare * (nbar + 1.0),
            gamma_minus: bare * nbar,
        });
        idx = next;
    }
    Ok(channels)
}

/// Recomputes the thermal rates of already-extracted channels for a
/// new bath record. The member structure (a property of the spectrum
/// alone) is reused, so temperature sweeps skip the basis transform.
pub fn rethermalized(
    channels: &[TransitionChannel],
    bath: &BathSpec,
) -> Result<Vec<TransitionChannel>> {
    channels
        .iter()
        .map(|ch| {
            if ch.bath != bath.label {
                return Err(Error::BasisMismatch(format!(
                    "channel belongs to bath {}, rates requested for bath {}",
                    ch.bath, bath.label
                )));
            }
            let nbar = bose_occupation(ch.omega, bath.temperature)?;
            let bare = bath.gamma * ch.omega;
            Ok(TransitionChannel {
                bath: ch.bath,
                omega: ch.omega,
                members: ch.members.clone(),
                gamma_plus: bare * (nbar + 1.0),
                gamma_minus: bare * nbar,
            })
        })
        .collect()
}

/// Classical rate matrix over energy-level populations: dp/dt = M p.
#[derive(Debug, Clone)]
pub struct RateMatrix {
    m: DMatrix<f64>,
}

impl RateMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// Largest |column sum|; zero in exact arithmetic.
    pub fn column_sum_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for j in 0..self.m.ncols() {
            let s: f64 = self.m.column(j).iter().sum();
            worst = worst.max(s.abs());
        }
        worst
    }
}

/// Populates gain/loss rates from every channel of every bath:
/// emission j -> i at Gamma_+ |s_ij|^2, absorption i -> j at
/// Gamma_- |s_ij|^2, diagonal fixed so each column sums to zero.
pub fn build_rate_matrix(channels: &[TransitionChannel], dim: usize) -> RateMatrix {
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for ch in channels {
        for mem in &ch.members {
            let w = mem.amplitude.norm_sqr();
            m[(mem.lower, mem.upper)] += ch.gamma_plus * w;
            m[(mem.upper, mem.lower)] += ch.gamma_minus * w;
        }
    }
    for j in 0..dim {
        let off: f64 = (0..dim).filter(|&i| i != j).map(|i| m[(i, j)]).sum();
        m[(j, j)] = -off;
    }
    RateMatrix { m }
}

/// Generator of the full master equation in the energy basis,
/// applied matrix-free (member loops) so long time evolutions stay
/// affordable; [`Liouvillian::to_dense`] materializes the
/// column-stacking superoperator when a small dense copy is wanted.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    dim: usize,
    /// Energy diagonal; `None` drops the coherent commutator (the
    /// interaction picture, where the secular dissipator is autonomous
    /// and populations evolve identically).
    energies: Option<Vec<f64>>,
    channels: Vec<TransitionChannel>,
    /// K = sum_ch [Gamma_+ S^dag S + Gamma_- S S^dag], the lump in
    /// -1/2 {K, rho}.
    k: DMatrix<C64>,
    /// Fast path: K is diagonal whenever no channel has two members
    /// sharing a lower (or upper) level, true away from degeneracies.
    k_diag: Option<DVector<f64>>,
}

/// Builds the master-equation generator from already-extracted
/// channels (all baths together, or one bath for its dissipator alone).
pub fn build_liouvillian(
    es: &EigenSystem,
    channels: &[TransitionChannel],
    include_hamiltonian: bool,
) -> Liouvillian {
    let dim = es.dim();
    let mut k = DMatrix::<C64>::zeros(dim, dim);
    for ch in channels {
        for a in &ch.members {
            for b in &ch.members {
                if a.lower == b.lower {
                    k[(a.upper, b.upper)] +=
                        C64::new(ch.gamma_plus, 0.0) * a.amplitude.conj() * b.amplitude;
                }
                if a.upper == b.upper {
                    k[(a.lower, b.lower)] +=
                        C64::new(ch.gamma_minus, 0.0) * a.amplitude * b.amplitude.conj();
                }
            }
        }
    }
    let mut diag_ok = true;
    'outer: for i in 0..dim {
        for j in 0..dim {
            if i != j && k[(i, j)].norm() > 0.0 {
                diag_ok = false;
                break 'outer;
            }
        }
    }
    let k_diag = diag_ok.then(|| DVector::from_iterator(dim, (0..dim).map(|i| k[(i, i)].re)));
    Liouvillian {
        dim,
        energies: include_hamiltonian.then(|| es.energies.clone()),
        channels: channels.to_vec(),
        k,
        k_diag,
    }
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn channels(&self) -> &[TransitionChannel] {
        &self.channels
    }

    /// d(rho)/dt for a density matrix given in the energy basis.
    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        assert_eq!(rho.nrows(), self.dim, "state dimension mismatch");
        let mut out = DMatrix::<C64>::zeros(self.dim, self.dim);

        if let Some(es) = &self.energies {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    out[(i, j)] += C64::new(0.0, -(es[i] - es[j])) * rho[(i, j)];
                }
            }
        }

        jump_action(&self.channels, rho, &mut out);

        match &self.k_diag {
            Some(kd) => {
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        out[(i, j)] -= 0.5 * (kd[i] + kd[j]) * rho[(i, j)];
                    }
                }
            }
            None => {
                let anti = &self.k * rho + rho * &self.k;
                out -= anti.map(|z| 0.5 * z);
            }
        }
        out
    }

    /// Infinity-norm upper estimate, good enough to pick a stable RK4
    /// step (the true norm is within a small factor).
    pub fn norm_estimate(&self) -> f64 {
        let mut k_row = 0.0_f64;
        for i in 0..self.dim {
            let s: f64 = (0..self.dim).map(|j| self.k[(i, j)].norm()).sum();
            k_row = k_row.max(s);
        }
        let h_span = self
            .energies
            .as_ref()
            .map(|e| {
                e.iter().fold(f64::MIN, |a, &x| a.max(x)) - e.iter().fold(f64::MAX, |a, &x| a.min(x))
            })
            .unwrap_or(0.0);
        // Jump terms carry the same Gamma |s|^2 weights that K does.
        h_span + 4.0 * k_row
    }

    /// Dense superoperator, column-stacking convention: for
    /// vec(rho) stacking columns, vec(A rho B) = (B^T kron A) vec(rho).
    pub fn to_dense(&self) -> DMatrix<C64> {
        let d = self.dim;
        let eye = QOperator::identity(d);
        let mut sup = DMatrix::<C64>::zeros(d * d, d * d);

        let kron_tb = |bt: &QOperator, a: &QOperator| -> DMatrix<C64> {
            crate::numerics::kron(bt, a).into_matrix()
        };

        if let Some(es) = &self.energies {
            let mut h = DMatrix::<C64>::zeros(d, d);
            for i in 0..d {
                h[(i, i)] = C64::new(es[i], 0.0);
            }
            let h = QOperator::new(h);
            // -i (I kron H - H^T kron I); H is real diagonal.
            let left = kron_tb(&eye, &h);
            let right = kron_tb(&h, &eye);
            sup += (left - right).map(|z| C64::new(0.0, -1.0) * z);
        }

        for ch in &self.channels {
            let s = ch.op(d);
            let sd = s.dagger();
            for (rate, jump) in [(ch.gamma_plus, &s), (ch.gamma_minus, &sd)] {
                let jd = jump.dagger();
                let jdj = &jd * jump;
                // conj(J) kron J - 1/2 (I kron J^dag J + (J^dag J)^T kron I)
                let jconj = QOperator::new(jump.matrix().map(|z| z.conj()));
                let jt = QOperator::new(jdj.matrix().transpose());
                let term = kron_tb(&jconj, jump)
                    - (kron_tb(&eye, &jdj) + kron_tb(&jt, &eye)).map(|z| 0.5 * z);
                sup += term.map(|z| rate * z);
            }
        }
        sup
    }
}

/// Accumulates sum_ch [Gamma_+ S rho S^dag + Gamma_- S^dag rho S]
/// into `out` via member pairs.
fn jump_action(channels: &[TransitionChannel], rho: &DMatrix<C64>, out: &mut DMatrix<C64>) {
    for ch in channels {
        for a in &ch.members {
            for b in &ch.members {
                out[(a.lower, b.lower)] += C64::new(ch.gamma_plus, 0.0)
                    * a.amplitude
                    * b.amplitude.conj()
                    * rho[(a.upper, b.upper)];
                out[(a.upper, b.upper)] += C64::new(ch.gamma_minus, 0.0)
                    * a.amplitude.conj()
                    * b.amplitude
                    * rho[(a.lower, b.lower)];
            }
        }
    }
}

/// Dissipator action of a channel subset (for example one bath) on a
/// density matrix; no Hamiltonian part.
pub fn apply_dissipator(channels: &[TransitionChannel], rho: &DMatrix<C64>) -> DMatrix<C64> {
    let dim = rho.nrows();
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    jump_action(channels, rho, &mut out);
    for ch in channels {
        for a in &ch.members {
            for b in &ch.members {
                if a.lower == b.lower {
                    let w = C64::new(ch.gamma_plus, 0.0) * a.amplitude.conj() * b.amplitude;
                    // -1/2 {|a.up><b.up|, rho} scaled by w
                    for j in 0..dim {
                        out[(a.upper, j)] -= 0.5 * w * rho[(b.upper, j)];
                        out[(j, b.upper)] -= 0.5 * w * rho[(j, a.upper)];
                    }
                }
                if a.upper == b.upper {
                    let w = C64::new(ch.gamma_minus, 0.0) * a.amplitude * b.amplitude.conj();
                    for j in 0..dim {
                        out[(a.lower, j)] -= 0.5 * w * rho[(b.lower, j)];
                        out[(j, b.lower)] -= 0.5 * w * rho[(j, a.lower)];
                    }
                }
            }
        }
    }
    out
}

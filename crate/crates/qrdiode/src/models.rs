//! Model Hamiltonians and their bath coupling operators.
//!
//! Primary model: a flux qubit coupled quadratically to a resonator mode,
//!
//! ```text
//! H = omega_L a^dag a - (omega_R/2) sigma_z
//!     + g (a + a^dag)^2 (sigma_z sin(theta) + sigma_x cos(theta))
//! ```
//!
//! in the qubit's rotated eigenbasis; theta measures how far the flux
//! bias detunes the qubit from its symmetry point (tan(theta) = eps/q).
//! Tensor order is fixed as qubit (x) resonator, with the photon space
//! truncated to states 0..=n_fock. The resonator couples to bath L
//! through a + a^dag, the qubit to bath R through the same rotated
//! operator sigma_z sin(theta) + sigma_x cos(theta).
//!
//! Three two-qubit couplers serve as comparisons (longitudinal ZZ,
//! asymmetric ZX, and a Dzyaloshinskii-Moriya exchange), each with
//! sigma_x bath coupling on both qubits.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::numerics::{kron, QOperator};
use crate::{Bath, Error, Result};

/// Resonator frequency unit omega_0 = 2 pi * 20 GHz in rad/s.
pub const OMEGA0_RAD_PER_S: f64 = 2.0 * std::f64::consts::PI * 20.0e9;
const HBAR: f64 = 1.054_571_817e-34; // J s
const KB: f64 = 1.380_649e-23; // J / K

/// Two-photon Rabi model parameters, energies in units of omega_L's
/// own scale (set omega_L = 1 for natural units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RabiParams {
    pub omega_l: f64,
    pub omega_r: f64,
    pub g: f64,
    pub theta: f64,
    pub n_fock: usize,
}

impl RabiParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_l > 0.0) || !self.omega_l.is_finite() {
            return Err(Error::InvalidParams(format!(
                "omega_L must be positive, got {}",
                self.omega_l
            )));
        }
        if !(self.omega_r > 0.0) || !self.omega_r.is_finite() {
            return Err(Error::InvalidParams(format!(
                "omega_R must be positive, got {}",
                self.omega_r
            )));
        }
        if self.n_fock < 2 {
            return Err(Error::TruncationTooSmall {
                n_fock: self.n_fock,
            });
        }
        if !(self.g >= 0.0) || !self.g.is_finite() {
            return Err(Error::InvalidParams(format!(
                "g must be nonnegative, got {}",
                self.g
            )));
        }
        if self.g >= self.omega_l / 2.0 {
            return Err(Error::SpectralCollapse {
                g: self.g,
                bound: self.omega_l / 2.0,
            });
        }
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&self.theta) {
            return Err(Error::InvalidParams(format!(
                "theta must lie in [0, pi/2], got {}",
                self.theta
            )));
        }
        Ok(())
    }

    /// Builds from the raw qubit energies: tunneling gap `q` and flux
    /// bias `eps`, giving omega_R = sqrt(eps^2 + q^2) and
    /// theta = atan2(eps, q).
    pub fn from_qubit_energies(
        omega_l: f64,
        eps: f64,
        q: f64,
        g: f64,
        n_fock: usize,
    ) -> Result<Self> {
        let p = Self {
            omega_l,
            omega_r: (eps * eps + q * q).sqrt(),
            g,
            theta: eps.atan2(q),
            n_fock,
        };
        p.validate()?;
        Ok(p)
    }
}

/// Comparison coupler Hamiltonian shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CouplerKind {
    /// H = (1/2)(omega_L sz_L + omega_R sz_R + g sz_L sz_R)
    IsingZZ,
    /// H = (omega_L/2) sz_L + (omega_R/2) sz_R + g sz_L sx_R
    AsymmetricZX,
    /// H = (omega_L/2) sz_L + (omega_R/2) sz_R + g (sx_L sy_R - sy_L sx_R)
    Dm,
}

impl CouplerKind {
    pub fn name(&self) -> &'static str {
        match self {
            CouplerKind::IsingZZ => "ising_zz",
            CouplerKind::AsymmetricZX => "asymmetric_zx",
            CouplerKind::Dm => "dm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoQubitParams {
    pub kind: CouplerKind,
    pub omega_l: f64,
    pub omega_r: f64,
    pub g: f64,
}

impl TwoQubitParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("omega_L", self.omega_l), ("omega_R", self.omega_r)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.g >= 0.0) || !self.g.is_finite() {
            return Err(Error::InvalidParams(format!(
                "g must be nonnegative, got {}",
                self.g
            )));
        }
        Ok(())
    }
}

/// Parameters of whichever model a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ModelParams {
    Rabi(RabiParams),
    TwoQubit(TwoQubitParams),
}

impl ModelParams {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelParams::Rabi(_) => "two_photon_rabi",
            ModelParams::TwoQubit(p) => p.kind.name(),
        }
    }

    pub fn n_fock(&self) -> Option<usize> {
        match self {
            ModelParams::Rabi(p) => Some(p.n_fock),
            ModelParams::TwoQubit(_) => None,
        }
    }

    pub fn build(&self) -> Result<ModelSpec> {
        match self {
            ModelParams::Rabi(p) => build_two_photon_rabi(*p),
            ModelParams::TwoQubit(p) => build_comparison_model(*p),
        }
    }
}

/// A built model: Hamiltonian plus the system operator each bath
/// couples to, all in the same product basis.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub hamiltonian: QOperator,
    pub jump_l: QOperator,
    pub jump_r: QOperator,
    pub params: ModelParams,
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn jump_op(&self, bath: Bath) -> &QOperator {
        match bath {
            Bath::L => &self.jump_l,
            Bath::R => &self.jump_r,
        }
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn pauli_x() -> QOperator {
    QOperator::new(DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]))
}

pub fn pauli_y() -> QOperator {
    QOperator::new(DMatrix::from_row_slice(
        2,
        2,
        &[c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0)],
    ))
}

pub fn pauli_z() -> QOperator {
    QOperator::new(DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]))
}

/// Truncated annihilation operator on photon states 0..=n_fock.
pub fn annihilation(n_fock: usize) -> QOperator {
    let dim = n_fock + 1;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = c((n as f64).sqrt());
    }
    QOperator::new(m)
}

/// Builds the dissipative two-photon Rabi model.
pub fn build_two_photon_rabi(params: RabiParams) -> Result<ModelSpec> {
    params.validate()?;
    let nq = 2;
    let a = annihilation(params.n_fock);
    let x = &a + &a.dagger();
    let x2 = &x * &x;
    let num = &a.dagger() * &a;
    let eye_res = QOperator::identity(params.n_fock + 1);
    let eye_q = QOperator::identity(nq);

    // Rotated qubit coupling operator sigma_z sin(theta) + sigma_x cos(theta).
    let s_q = &(&pauli_z() * params.theta.sin()) + &(&pauli_x() * params.theta.cos());

    let h = &(&(&kron(&eye_q, &num) * params.omega_l)
        - &(&kron(&pauli_z(), &eye_res) * (params.omega_r / 2.0)))
        + &(&kron(&s_q, &x2) * params.g);

    Ok(ModelSpec {
        hamiltonian: h,
        jump_l: kron(&eye_q, &x),
        jump_r: kron(&s_q, &eye_res),
        params: ModelParams::Rabi(params),
    })
}

/// Builds one of the two-qubit comparison couplers (left qubit (x) right
/// qubit, sigma_x bath coupling on each).
pub fn build_comparison_model(params: TwoQubitParams) -> Result<ModelSpec> {
    params.validate()?;
    let eye = QOperator::identity(2);
    let (sx, sy, sz) = (pauli_x(), pauli_y(), pauli_z());

    let zl = kron(&sz, &eye);
    let zr = kron(&eye, &sz);
    let h = match params.kind {
        CouplerKind::IsingZZ => {
            let zz = kron(&sz, &sz);
            &(&(&zl * params.omega_l) + &(&zr * params.omega_r)) + &(&zz * params.g)
        }
        CouplerKind::AsymmetricZX => {
            let zx = kron(&sz, &sx);
            &(&(&zl * params.omega_l) + &(&zr * params.omega_r)) + &(&zx * (2.0 * params.g))
        }
        CouplerKind::Dm => {
            let dm = &kron(&sx, &sy) - &kron(&sy, &sx);
            &(&(&zl * params.omega_l) + &(&zr * params.omega_r)) + &(&dm * (2.0 * params.g))
        }
    };
    let h = &h * 0.5;

    Ok(ModelSpec {
        hamiltonian: h,
        jump_l: kron(&sx, &eye),
        jump_r: kron(&eye, &sx),
        params: ModelParams::TwoQubit(params),
    })
}

/// Converts a value in natural units (hbar = k_B = 1, energies in
/// omega_0) to SI for the circuit realization omega_0 = 2 pi * 20 GHz.
///
/// `kind` is one of `frequency` (-> rad/s), `temperature` (-> K), or
/// `power` (-> W).
pub fn units_to_si(value: f64, kind: &str) -> Result<f64> {
    match kind {
        "frequency" => Ok(value * OMEGA0_RAD_PER_S),
        "temperature" => Ok(value * HBAR * OMEGA0_RAD_PER_S / KB),
        "power" => Ok(value * HBAR * OMEGA0_RAD_PER_S * OMEGA0_RAD_PER_S),
        other => Err(Error::UnknownUnitKind(other.to_string())),
    }
}

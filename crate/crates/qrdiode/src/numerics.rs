//! Dense complex linear algebra shared by every layer above.
//!
//! Conventions: operators are square `DMatrix<Complex64>` wrapped in
//! [`QOperator`]; eigenbases are stored column-wise with eigenvalues
//! ascending and each eigenvector phase-fixed (first nonzero component
//! real-positive) so results are deterministic run to run.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::{Error, Result};

/// Relative Hermiticity tolerance: max |A - A^dag| <= HERM_TOL * max |A|.
pub const HERM_TOL: f64 = 1e-12;

/// Largest per-eigenpair residual |H v - E v| accepted from the
/// decomposition backend, relative to the largest matrix entry.
const EIGH_RESID_TOL: f64 = 1e-11;

/// Components of a phase-fixed eigenvector below this (relative to the
/// column maximum) are treated as zero when picking the anchor entry.
const PHASE_ANCHOR_TOL: f64 = 1e-12;

/// Steady-state vector components may dip this far below zero from
/// roundoff; they are clamped. Anything worse is a solver failure.
const NEGATIVITY_TOL: f64 = 1e-10;

/// Square complex matrix acting on the model Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct QOperator {
    m: DMatrix<C64>,
}

impl QOperator {
    /// Wraps a square matrix. Panics on non-square input (that is a
    /// programming error, not a data error).
    pub fn new(m: DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "QOperator must be square");
        Self { m }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim))
    }

    /// Builds from a real matrix (imaginary parts zero).
    pub fn from_real(m: DMatrix<f64>) -> Self {
        Self::new(m.map(|x| C64::new(x, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn dagger(&self) -> Self {
        Self::new(self.m.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// max |A - A^dag| over all entries.
    pub fn hermiticity_residual(&self) -> f64 {
        let adj = self.m.adjoint();
        (&self.m - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermiticity_residual() <= rel_tol * self.max_abs().max(1e-300)
    }

    /// (A + A^dag)/2, used to scrub roundoff before eigendecomposition.
    pub fn hermitized(&self) -> Self {
        let adj = self.m.adjoint();
        Self::new((&self.m + adj).map(|z| 0.5 * z))
    }
}

impl std::ops::Add<&QOperator> for &QOperator {
    type Output = QOperator;
    fn add(self, rhs: &QOperator) -> QOperator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        QOperator::new(&self.m + &rhs.m)
    }
}

impl std::ops::Sub<&QOperator> for &QOperator {
    type Output = QOperator;
    fn sub(self, rhs: &QOperator) -> QOperator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        QOperator::new(&self.m - &rhs.m)
    }
}

impl std::ops::Mul<&QOperator> for &QOperator {
    type Output = QOperator;
    fn mul(self, rhs: &QOperator) -> QOperator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        QOperator::new(&self.m * &rhs.m)
    }
}

impl std::ops::Mul<f64> for &QOperator {
    type Output = QOperator;
    fn mul(self, rhs: f64) -> QOperator {
        QOperator::new(self.m.map(|z| z * rhs))
    }
}

impl std::ops::Mul<C64> for &QOperator {
    type Output = QOperator;
    fn mul(self, rhs: C64) -> QOperator {
        QOperator::new(self.m.map(|z| z * rhs))
    }
}

/// Kronecker product A (x) B with row-major index convention:
/// entry ((i*p + k), (j*q + l)) = A[i,j] * B[k,l] for B of shape p x q.
pub fn kron(a: &QOperator, b: &QOperator) -> QOperator {
    QOperator::new(a.matrix().kronecker(b.matrix()))
}

/// Hermitian eigendecomposition of a model Hamiltonian or observable.
///
/// `energies` ascend; `vectors` holds the matching eigenvectors as
/// columns, each phase-fixed. `source_dim` records the Hilbert-space
/// dimension the decomposition belongs to so downstream consumers can
/// detect basis mixups.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub energies: Vec<f64>,
    pub vectors: DMatrix<C64>,
    pub source_dim: usize,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.source_dim
    }

    /// V^dag A V: expresses `op` in this eigenbasis.
    pub fn to_energy_basis(&self, op: &QOperator) -> QOperator {
        assert_eq!(op.dim(), self.source_dim, "dimension mismatch");
        QOperator::new(self.vectors.adjoint() * op.matrix() * &self.vectors)
    }

    /// V diag(E) V^dag: rebuilds the operator from the decomposition.
    pub fn reconstruct(&self) -> QOperator {
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            self.source_dim,
            self.energies.iter().map(|&e| C64::new(e, 0.0)),
        ));
        QOperator::new(&self.vectors * d * self.vectors.adjoint())
    }

    /// max |V^dag V - I|.
    pub fn orthonormality_residual(&self) -> f64 {
        let g = self.vectors.adjoint() * &self.vectors;
        let eye = DMatrix::<C64>::identity(self.source_dim, self.source_dim);
        (g - eye).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }
}

/// Hermitian eigendecomposition with deterministic ordering.
///
/// Rejects input whose Hermiticity residual exceeds `HERM_TOL` relative
/// to the largest entry; the decomposition itself runs on (A + A^dag)/2.
///
/// Every eigenpair is verified against |H v - E v| before the result is
/// returned. An orthonormal basis with scrambled eigenvectors passes
/// every orthogonality check yet silently corrupts each downstream
/// matrix element, so a backend that drifts is rejected loudly here.
pub fn eigh(h: &QOperator) -> Result<EigenSystem> {
    let residual = h.hermiticity_residual();
    let scale = h.max_abs().max(1e-300);
    if residual > HERM_TOL * scale {
        return Err(Error::NonHermitianInput {
            residual,
            tol: HERM_TOL * scale,
        });
    }

    let dim = h.dim();
    let sym = h.hermitized();
    let a = faer::Mat::<C64>::from_fn(dim, dim, |i, j| sym.matrix()[(i, j)]);
    let decomp = a
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Eigendecomposition(format!("backend did not converge: {e:?}")))?;

    // The backend sorts nondecreasing already; re-sort defensively
    // (stable, so exact ties keep the decomposition's order).
    let raw: Vec<f64> = decomp.S().column_vector().iter().map(|z| z.re).collect();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));

    let energies: Vec<f64> = order.iter().map(|&i| raw[i]).collect();
    let u = decomp.U();
    let mut vectors = DMatrix::<C64>::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        for row in 0..dim {
            vectors[(row, dst)] = u[(row, src)];
        }
    }

    // Phase fix: first non-negligible component of each column made
    // real-positive, so repeated runs emit bitwise-identical bases.
    for mut col in vectors.column_iter_mut() {
        let col_max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if col_max == 0.0 {
            continue;
        }
        let anchor = col
            .iter()
            .find(|z| z.norm() > PHASE_ANCHOR_TOL * col_max)
            .copied()
            .unwrap_or(C64::new(1.0, 0.0));
        let phase = anchor / anchor.norm();
        let factor = phase.conj();
        for z in col.iter_mut() {
            *z *= factor;
        }
    }

    let hv = sym.matrix() * &vectors;
    let mut worst = 0.0_f64;
    for k in 0..dim {
        for row in 0..dim {
            let d = (hv[(row, k)] - vectors[(row, k)] * energies[k]).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    if worst > EIGH_RESID_TOL * scale {
        return Err(Error::Eigendecomposition(format!(
            "eigenpair residual {worst:.3e} exceeds {:.3e}",
            EIGH_RESID_TOL * scale
        )));
    }

    Ok(EigenSystem {
        energies,
        vectors,
        source_dim: dim,
    })
}

/// One-dimensional null vector of a rate-matrix-shaped operator
/// (columns summing to zero, nonnegative off-diagonal entries),
/// normalized to a probability vector.
///
/// Nullity is decided from the singular spectrum: values at or below
/// `tol * sigma_max` count as zero, and anything other than exactly one
/// is a [`Error::DegenerateSteadyState`]. The vector itself comes from
/// GTH-style elimination (no subtractions, so components tiny relative
/// to the largest still carry full relative accuracy); if the rate
/// graph has one-way edges the elimination can stall, in which case the
/// SVD null vector is used as a fallback.
pub fn nullspace(m: &DMatrix<f64>, tol: f64) -> Result<DVector<f64>> {
    assert_eq!(m.nrows(), m.ncols(), "nullspace expects a square matrix");
    let dim = m.nrows();

    let svd = m.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().fold(0.0_f64, |a, &b| a.max(b));
    let threshold = tol * sigma_max;
    let null_indices: Vec<usize> = (0..dim)
        .filter(|&i| svd.singular_values[i] <= threshold)
        .collect();
    if null_indices.len() != 1 {
        return Err(Error::DegenerateSteadyState {
            nullity: null_indices.len(),
        });
    }

    let v = match gth_stationary(m) {
        Some(p) => p,
        None => {
            // Right singular vector of the (unique) zero singular value.
            let v_t = svd.v_t.as_ref().expect("svd computed with vectors");
            let mut p: DVector<f64> = v_t.row(null_indices[0]).transpose();
            let sum: f64 = p.iter().sum();
            if sum < 0.0 {
                p.neg_mut();
            }
            p
        }
    };

    normalize_populations(v)
}

/// GTH elimination for the stationary vector of a generator whose
/// columns sum to zero. Returns `None` when a state has no outflow
/// toward lower indices (reducible ordering), leaving the caller to
/// fall back on the SVD vector.
fn gth_stationary(m: &DMatrix<f64>) -> Option<DVector<f64>> {
    let n = m.nrows();
    if n == 1 {
        return Some(DVector::from_element(1, 1.0));
    }
    // a[i][j] = rate i -> j = m[(j, i)], diagonal unused.
    let mut a = vec![vec![0.0_f64; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let r = m[(j, i)];
                if r < 0.0 {
                    return None; // not rate-matrix shaped
                }
                a[i][j] = r;
            }
        }
    }
    for k in (1..n).rev() {
        let s: f64 = a[k][..k].iter().sum();
        if !(s > 0.0) || !s.is_finite() {
            return None;
        }
        for i in 0..k {
            a[i][k] /= s;
        }
        for i in 0..k {
            let w = a[i][k];
            if w == 0.0 {
                continue;
            }
            for j in 0..k {
                if j != i {
                    a[i][j] += w * a[k][j];
                }
            }
        }
    }
    let mut pi = vec![0.0_f64; n];
    pi[0] = 1.0;
    for k in 1..n {
        let mut acc = 0.0;
        for i in 0..k {
            acc += pi[i] * a[i][k];
        }
        pi[k] = acc;
    }
    Some(DVector::from_vec(pi))
}

/// Scales to sum one, clamping roundoff-level negative entries.
pub(crate) fn normalize_populations(mut v: DVector<f64>) -> Result<DVector<f64>> {
    let sum: f64 = v.iter().sum();
    if !(sum.abs() > 0.0) || !sum.is_finite() {
        return Err(Error::NonPhysical(
            "steady-state vector sums to zero".into(),
        ));
    }
    v /= sum;
    let worst = v.iter().cloned().fold(0.0_f64, f64::min);
    if worst < -NEGATIVITY_TOL {
        return Err(Error::NonPhysical(format!(
            "steady-state population {worst:.3e} below -{NEGATIVITY_TOL:.0e}"
        )));
    }
    for x in v.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let sum: f64 = v.iter().sum();
    v /= sum;
    Ok(v)
}

/// One classic fourth-order Runge-Kutta step for dy/dt = f(y).
pub fn rk4_step<F>(f: F, y: &DVector<C64>, dt: f64) -> DVector<C64>
where
    F: Fn(&DVector<C64>) -> DVector<C64>,
{
    let k1 = f(y);
    let k2 = f(&(y + &k1 * C64::new(dt / 2.0, 0.0)));
    let k3 = f(&(y + &k2 * C64::new(dt / 2.0, 0.0)));
    let k4 = f(&(y + &k3 * C64::new(dt, 0.0)));
    y + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> QOperator {
        let raw = DMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        QOperator::new(raw).hermitized()
    }

    #[test]
    fn kron_matches_hand_example() {
        let sx = QOperator::new(DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        ));
        let eye = QOperator::identity(2);
        let k = kron(&sx, &eye);
        assert_eq!(k.dim(), 4);
        // sigma_x (x) I swaps the two 2-blocks.
        assert_eq!(k.matrix()[(0, 2)], C64::new(1.0, 0.0));
        assert_eq!(k.matrix()[(1, 3)], C64::new(1.0, 0.0));
        assert_eq!(k.matrix()[(0, 1)], C64::new(0.0, 0.0));
    }

    #[test]
    fn kron_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_hermitian(2, &mut rng);
            let b = random_hermitian(3, &mut rng);
            let c = random_hermitian(2, &mut rng);
            let left = kron(&kron(&a, &b), &c);
            let right = kron(&a, &kron(&b, &c));
            let diff = (&left - &right).max_abs();
            assert!(diff <= 1e-12, "associativity residual {diff:.3e}");
        }
    }

    #[test]
    fn eigh_pauli_x() {
        let sx = QOperator::new(DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        ));
        let es = eigh(&sx).unwrap();
        assert_relative_eq!(es.energies[0], -1.0, max_relative = 1e-14);
        assert_relative_eq!(es.energies[1], 1.0, max_relative = 1e-14);
        // Phase fix: first component real positive.
        for col in es.vectors.column_iter() {
            assert!(col[0].re > 0.0 && col[0].im.abs() < 1e-14);
        }
    }

    #[test]
    fn eigh_number_operator() {
        let n = 6;
        let num = QOperator::new(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(i as f64, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }));
        let es = eigh(&num).unwrap();
        for (k, &e) in es.energies.iter().enumerate() {
            assert_relative_eq!(e, k as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn eigh_reconstructs_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &dim in &[2usize, 3, 5, 16, 64, 128] {
            let h = random_hermitian(dim, &mut rng);
            let es = eigh(&h).unwrap();
            let scale = h.max_abs();
            let recon = es.reconstruct();
            let resid = (&recon - &h).max_abs();
            assert!(
                resid <= 1e-10 * scale,
                "dim {dim}: reconstruction residual {resid:.3e} vs scale {scale:.3e}"
            );
            assert!(es.orthonormality_residual() <= 1e-12);
            for w in es.energies.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn eigh_exact_on_clustered_dressed_ladders() {
        // Orthonormality alone cannot reveal scrambled eigenvectors, so
        // check |H v - E v| directly on spectra packed with
        // near-degenerate doublets (resonant dressed ladders at several
        // truncations, including ones that exposed backend drift).
        use crate::models::{ModelParams, RabiParams};
        for &n_fock in &[20usize, 22, 23, 40] {
            let params = ModelParams::Rabi(RabiParams {
                omega_l: 1.0,
                omega_r: 2.0,
                g: 0.015,
                theta: 0.0,
                n_fock,
            });
            let spec = params.build().unwrap();
            let es = eigh(&spec.hamiltonian).unwrap();
            let h = spec.hamiltonian.matrix();
            let scale = spec.hamiltonian.max_abs();
            let hv = h * &es.vectors;
            let mut worst = 0.0_f64;
            for k in 0..es.dim() {
                for r in 0..es.dim() {
                    let d = (hv[(r, k)] - es.vectors[(r, k)] * es.energies[k]).norm();
                    worst = worst.max(d);
                }
            }
            assert!(
                worst <= 1e-12 * scale,
                "n_fock {n_fock}: eigenpair residual {worst:.3e} vs scale {scale:.3e}"
            );
        }
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = QOperator::new(DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.5, 0.0),
                C64::new(0.0, 0.0),
            ],
        ));
        assert!(matches!(eigh(&m), Err(Error::NonHermitianInput { .. })));
    }

    #[test]
    fn eigh_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(24, &mut rng);
        let a = eigh(&h).unwrap();
        let b = eigh(&h).unwrap();
        assert_eq!(a.energies, b.energies);
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn nullspace_two_state_detailed_balance() {
        // Rates 0->1 = 2, 1->0 = 3: columns sum to zero.
        let m = DMatrix::from_row_slice(2, 2, &[-2.0, 3.0, 2.0, -3.0]);
        let v = nullspace(&m, 1e-10).unwrap();
        assert_relative_eq!(v[0], 0.6, max_relative = 1e-14);
        assert_relative_eq!(v[1], 0.4, max_relative = 1e-14);
    }

    #[test]
    fn nullspace_rejects_zero_matrix() {
        let m = DMatrix::<f64>::zeros(2, 2);
        match nullspace(&m, 1e-10) {
            Err(Error::DegenerateSteadyState { nullity }) => assert_eq!(nullity, 2),
            other => panic!("expected DegenerateSteadyState, got {other:?}"),
        }
    }

    #[test]
    fn nullspace_scaling_invariance() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[-3.0, 1.0, 2.0, 1.0, -5.0, 1.5, 2.0, 4.0, -3.5],
        );
        let base = nullspace(&m, 1e-10).unwrap();
        for &c in &[0.1, 10.0] {
            let scaled = nullspace(&(m.clone() * c), 1e-10).unwrap();
            for i in 0..3 {
                assert_relative_eq!(base[i], scaled[i], max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn nullspace_keeps_tiny_components_accurate() {
        // Detailed-balance chain with a 1e-12 population tail; GTH keeps
        // the tiny component to full relative accuracy.
        let up1 = 1.0e-6_f64;
        let dn1 = 1.0_f64;
        let up2 = 1.0e-6_f64;
        let dn2 = 1.0_f64;
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(3, 3, &[
            -up1,        dn1,          0.0,
             up1,  -(dn1 + up2),       dn2,
             0.0,        up2,         -dn2,
        ]);
        let v = nullspace(&m, 1e-10).unwrap();
        let z = 1.0 + up1 / dn1 + (up1 / dn1) * (up2 / dn2);
        assert_relative_eq!(v[0], 1.0 / z, max_relative = 1e-13);
        assert_relative_eq!(v[1], (up1 / dn1) / z, max_relative = 1e-13);
        assert_relative_eq!(v[2], (up1 / dn1) * (up2 / dn2) / z, max_relative = 1e-13);
    }

    #[test]
    fn nullspace_falls_back_on_one_way_chains() {
        // States 0 and 1 exchange; state 2 only drains into 1 (no inflow),
        // so elimination ordering stalls and the SVD path must serve.
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(3, 3, &[
            -1.0,  2.0,  0.0,
             1.0, -2.0,  5.0,
             0.0,  0.0, -5.0,
        ]);
        let v = nullspace(&m, 1e-10).unwrap();
        assert_relative_eq!(v[0], 2.0 / 3.0, epsilon = 1e-10);
        assert_relative_eq!(v[1], 1.0 / 3.0, epsilon = 1e-10);
        assert!(v[2].abs() <= 1e-12);
    }

    #[test]
    fn rk4_exponential_decay() {
        // dy/dt = -y over t = 1 in 100 steps lands on e^{-1}.
        let f = |y: &DVector<C64>| -> DVector<C64> { y * C64::new(-1.0, 0.0) };
        let mut y = DVector::from_element(1, C64::new(1.0, 0.0));
        for _ in 0..100 {
            y = rk4_step(f, &y, 0.01);
        }
        assert!((y[0].re - (-1.0_f64).exp()).abs() <= 1e-8);
        assert!(y[0].im.abs() <= 1e-15);
    }

    #[test]
    fn rk4_norm_preservation_on_rotation() {
        // dy/dt = i w y at w dt = 0.04 keeps |y| within 1e-8 per 100 steps.
        let w = 4.0;
        let dt = 0.01;
        let f = move |y: &DVector<C64>| -> DVector<C64> { y * C64::new(0.0, w) };
        let mut y = DVector::from_element(1, C64::new(1.0, 0.0));
        for _ in 0..100 {
            y = rk4_step(f, &y, dt);
        }
        assert!((y[0].norm() - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn rk4_matches_rate_matrix_nullspace_on_cyclic_chain() {
        // Three-state cyclic rate matrix: propagate dp/dt = M p to
        // stationarity and compare against the null-space answer.
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(3, 3, &[
            -1.0,  0.5,  0.2,
             0.7, -1.5,  0.8,
             0.3,  1.0, -1.0,
        ]);
        let p_null = nullspace(&m, 1e-10).unwrap();

        let mc = m.map(|x| C64::new(x, 0.0));
        let f = move |p: &DVector<C64>| -> DVector<C64> { &mc * p };
        let mut p = DVector::from_element(3, C64::new(1.0 / 3.0, 0.0));
        for _ in 0..4000 {
            p = rk4_step(&f, &p, 0.05);
        }
        for i in 0..3 {
            assert!((p[i].re - p_null[i]).abs() <= 1e-12);
            assert!(p[i].im.abs() <= 1e-15);
        }
    }
}

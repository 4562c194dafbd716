//! Steady states of the pair master equation.
//!
//! `G₀ = −A⁻¹` is factorized once; the perturbation series in the exchange
//! coupling is generated by repeated application of `G₀V` to vectors:
//!
//! ```text
//! ⟨Q⟩^[0] = G₀ j,   ⟨Q⟩^[n+1] = G₀ V ⟨Q⟩^[n]
//! ```

use nalgebra::{DMatrix, DVector, Dyn, SymmetricEigen, LU};
use thiserror::Error;

use crate::geometry::{PairGeometry, C64, ZERO};
use crate::liouvillian::{DipoleModel, DriveParams, LiouvilleSystem};
use crate::operators::{complete, single_atom_basis, PairIndex, PAIR_DIM, SINGLE_DIM, TRUNCATED_DIM};

/// Reciprocal condition numbers below this are treated as singular.
pub const RCOND_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("matrix is singular or ill-conditioned (reciprocal condition {rcond:e})")]
    IllConditioned { rcond: f64 },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("non-finite value in solver input")]
    NonFinite,
}

fn one_norm(m: &DMatrix<C64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Factorized `−A⁻¹` with an explicit inverse for transposed applications.
#[derive(Clone, Debug)]
pub struct GreensMatrix {
    lu: LU<C64, Dyn, Dyn>,
    inverse: DMatrix<C64>,
    rcond: f64,
}

impl GreensMatrix {
    pub fn new(a: &DMatrix<C64>) -> Result<Self, SolverError> {
        if !a.is_square() {
            return Err(SolverError::Dimension { expected: a.nrows(), found: a.ncols() });
        }
        if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(SolverError::NonFinite);
        }
        let lu = a.clone().lu();
        let inverse = lu.try_inverse().ok_or(SolverError::IllConditioned { rcond: 0.0 })?;
        let rcond = 1.0 / (one_norm(a) * one_norm(&inverse));
        if !(rcond >= RCOND_THRESHOLD) {
            return Err(SolverError::IllConditioned { rcond });
        }
        Ok(Self { lu, inverse, rcond })
    }

    /// Reciprocal 1-norm condition number of `A`.
    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    pub fn dim(&self) -> usize {
        self.inverse.nrows()
    }

    /// `G₀ v = −A⁻¹ v`.
    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        -self.lu.solve(v).expect("factorization checked at construction")
    }

    /// `G₀ᵀ v`.
    pub fn apply_transpose(&self, v: &DVector<C64>) -> DVector<C64> {
        -(self.inverse.tr_mul(v))
    }

    /// Explicit `G₀`.
    pub fn matrix(&self) -> DMatrix<C64> {
        -self.inverse.clone()
    }
}

/// Orders `⟨Q⟩^[0..=n_max]` of the expansion in the exchange coupling.
#[derive(Clone, Debug)]
pub struct SteadyStateOrders {
    pub orders: Vec<DVector<C64>>,
    pub rcond: f64,
    pub drive: DriveParams,
    pub geometry: PairGeometry,
    pub dipole: DipoleModel,
}

impl SteadyStateOrders {
    pub fn max_order(&self) -> usize {
        self.orders.len() - 1
    }

    /// `Σ_{n ≤ max} ⟨Q⟩^[n]`.
    pub fn partial_sum(&self, max: usize) -> DVector<C64> {
        self.orders.iter().take(max + 1).fold(DVector::zeros(TRUNCATED_DIM), |acc, x| acc + x)
    }
}

pub fn perturbative_orders(system: &LiouvilleSystem, n_max: usize) -> Result<SteadyStateOrders, SolverError> {
    let green = GreensMatrix::new(&system.a)?;
    let mut orders = Vec::with_capacity(n_max + 1);
    orders.push(green.apply(&system.j));
    for n in 0..n_max {
        let next = green.apply(&(&system.v * &orders[n]));
        orders.push(next);
    }
    Ok(SteadyStateOrders {
        orders,
        rcond: green.rcond(),
        drive: system.drive,
        geometry: system.geometry,
        dipole: system.dipole,
    })
}

/// Nonperturbative stationary point of `(A + V)x + j = 0`.
pub fn full_steady_state(system: &LiouvilleSystem) -> Result<DVector<C64>, SolverError> {
    let green = GreensMatrix::new(&(&system.a + &system.v))?;
    Ok(green.apply(&system.j))
}

/// Pair density operator `ρ = Σ ⟨Q_n⟩ Q_nᵀ` from truncated coordinates of a
/// complete state, in the product basis `|k⟩⊗|l⟩ ↦ 4(k−1) + (l−1)`.
pub fn density_operator(x: &DVector<C64>) -> Result<DMatrix<C64>, SolverError> {
    let full = complete(x).map_err(|_| SolverError::Dimension { expected: TRUNCATED_DIM, found: x.len() })?;
    let basis = single_atom_basis();
    let mut rho = DMatrix::zeros(SINGLE_DIM, SINGLE_DIM);
    for flat in 0..PAIR_DIM {
        let c = full[flat];
        if c == ZERO {
            continue;
        }
        let p = PairIndex::from_flat(flat);
        let (a, b) = (basis[p.first].matrix.transpose(), basis[p.second].matrix.transpose());
        for i in 0..4 {
            for k in 0..4 {
                if a[(i, k)] == ZERO {
                    continue;
                }
                for j in 0..4 {
                    for l in 0..4 {
                        rho[(4 * i + j, 4 * k + l)] += c * a[(i, k)] * b[(j, l)];
                    }
                }
            }
        }
    }
    Ok(rho)
}

/// Smallest eigenvalue of the Hermitian part of `rho`.
pub fn min_eigenvalue(rho: &DMatrix<C64>) -> f64 {
    let herm = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(herm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{I, ONE};
    use crate::liouvillian::{build_pair_system, build_single_generator, Incident};
    use crate::operators::{observable_coordinates, sigma, PairOperator};

    fn system(s: f64, delta: f64) -> LiouvilleSystem {
        let drive = DriveParams::from_saturation(s, delta, Incident::CircularPlus);
        let geom = PairGeometry::new(0.9, 0.4, 8.0).unwrap();
        build_pair_system(&drive, &geom, DipoleModel::Full)
    }

    #[test]
    fn greens_matrix_inverts() {
        let sys = system(1.3, 0.5);
        let g = GreensMatrix::new(&sys.a).unwrap();
        let residual = &sys.a * g.matrix() + DMatrix::identity(TRUNCATED_DIM, TRUNCATED_DIM);
        assert!(residual.camax() < 1e-10);
        assert!(g.rcond() > 1e-6);
        let v = DVector::from_fn(TRUNCATED_DIM, |i, _| C64::new(i as f64, 1.0));
        let lhs = g.apply_transpose(&v);
        let rhs = g.matrix().transpose() * &v;
        assert!((lhs - rhs).camax() < 1e-10);
    }

    #[test]
    fn singular_matrix_rejected() {
        let mut a = DMatrix::<C64>::identity(4, 4);
        a[(3, 3)] = ZERO;
        assert!(matches!(GreensMatrix::new(&a), Err(SolverError::IllConditioned { .. })));
    }

    #[test]
    fn uncoupled_state_is_a_product() {
        let sys = system(0.8, -1.0);
        let x0 = perturbative_orders(&sys, 0).unwrap().orders.remove(0);
        // each atom sees its own laser phase
        for atom in 0..2 {
            let mut drive = sys.drive;
            drive.rabi = sys.rabi[atom];
            let single = build_single_generator(&drive);
            for (k, l) in [(1, 1), (1, 4), (4, 1), (4, 4)] {
                let o = observable_coordinates(&PairOperator::on_atom(atom, sigma(k, l))).unwrap();
                assert!((o.expectation(&x0) - single.expectation(&sigma(k, l))).norm() < 1e-13);
            }
        }
        let s = sys.drive.saturation();
        let o11 = observable_coordinates(&PairOperator::on_first(sigma(1, 1))).unwrap();
        assert!((o11.expectation(&x0).re - (2.0 + s) / (2.0 * (1.0 + s))).abs() < 1e-13);
    }

    #[test]
    fn first_order_coherence() {
        for &(s, delta) in &[(0.5, 0.0), (2.0, 1.5)] {
            let sys = system(s, delta);
            let orders = perturbative_orders(&sys, 1).unwrap();
            let o = observable_coordinates(&PairOperator::on_first(sigma(1, 2))).unwrap();
            let got = o.correction(&orders.orders[1]);
            let dpp = sys.geometry.projector().component(
                crate::geometry::Spherical::Plus,
                crate::geometry::Spherical::Plus,
            );
            let want = I * sys.geometry.g.conj() * dpp * sys.rabi[1]
                / (C64::new(1.0, -delta).powi(2) * 2.0 * (1.0 + s).powi(2));
            assert!((got - want).norm() < 1e-12 * want.norm(), "{got} vs {want}");
        }
    }

    #[test]
    fn orders_scale_with_coupling() {
        let sys = system(1.0, 0.0);
        let mut scaled = sys.clone();
        scaled.v *= C64::new(3.0, 0.0);
        let a = perturbative_orders(&sys, 2).unwrap();
        let b = perturbative_orders(&scaled, 2).unwrap();
        for n in 0..=2 {
            let f = 3f64.powi(n as i32);
            assert!((&b.orders[n] - &a.orders[n] * C64::new(f, 0.0)).camax() < 1e-12 * f);
        }
    }

    #[test]
    fn hermiticity_and_trace_at_every_order() {
        let sys = system(2.0, 1.0);
        let orders = perturbative_orders(&sys, 2).unwrap();
        for (n, x) in orders.orders.iter().enumerate() {
            let pop: C64 = (1..=4)
                .map(|k| {
                    let o = observable_coordinates(&PairOperator::on_second(sigma(k, k))).unwrap();
                    if n == 0 { o.expectation(x) } else { o.correction(x) }
                })
                .sum();
            let want = if n == 0 { ONE } else { ZERO };
            assert!((pop - want).norm() < 1e-12);
            for (k, l) in [(1, 2), (1, 4), (2, 4), (3, 1)] {
                let a = observable_coordinates(&PairOperator::on_first(sigma(k, l))).unwrap();
                let b = observable_coordinates(&PairOperator::on_first(sigma(l, k))).unwrap();
                assert!((a.correction(x) - b.correction(x).conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn full_state_is_physical() {
        let sys = system(3.0, 0.5);
        let x = full_steady_state(&sys).unwrap();
        let rho = density_operator(&x).unwrap();
        assert!((rho.trace() - ONE).norm() < 1e-12);
        assert!(min_eigenvalue(&rho) > -1e-10);

        let mut uncoupled = sys.clone();
        uncoupled.v.fill(ZERO);
        let x = full_steady_state(&uncoupled).unwrap();
        let x0 = perturbative_orders(&uncoupled, 0).unwrap().orders.remove(0);
        assert!((x - x0).camax() < 1e-13);
    }
}

//! Brute-force reference dynamics for small grids.
//!
//! Builds the lattice Hamiltonian as an explicit real symmetric matrix
//! (kinetic part from a direct DFT sum, no FFT), diagonalizes it and
//! exponentiates exactly. Used to cross-check the split-step integrator and
//! the packet S-matrix.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::spectral::{Grid, Representation, State};

/// Largest grid the dense oracle accepts.
pub const MAX_DENSE_POINTS: usize = 1024;

pub struct DenseOracle {
    grid: Grid,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

/// `T_{jl} = (1/n) Σ_m (k_m²/2m) cos(k_m (x_j - x_l))`.
pub fn kinetic_matrix(grid: &Grid) -> DMatrix<f64> {
    let n = grid.n();
    let m = grid.mass();
    let dk = grid.dk();
    let dx = grid.dx();
    // row depends only on j - l
    let profile: Vec<f64> = (0..n)
        .map(|d| {
            let sep = d as f64 * dx;
            (0..n)
                .map(|idx| {
                    let mi = if idx <= n / 2 {
                        idx as f64
                    } else {
                        idx as f64 - n as f64
                    };
                    let k = mi * dk;
                    0.5 * k * k / m * (k * sep).cos()
                })
                .sum::<f64>()
                / n as f64
        })
        .collect();
    DMatrix::from_fn(n, n, |j, l| profile[j.abs_diff(l)])
}

impl DenseOracle {
    pub fn new(grid: &Grid, pot: &PotentialSpec) -> Result<Self> {
        if grid.n() > MAX_DENSE_POINTS {
            return Err(Error::config(format!(
                "dense oracle limited to n <= {MAX_DENSE_POINTS}, got {}",
                grid.n()
            )));
        }
        let mut h = kinetic_matrix(grid);
        for (j, &x) in grid.positions().iter().enumerate() {
            h[(j, j)] += pot.value(x);
        }
        let eig = SymmetricEigen::new(h);
        Ok(Self {
            grid: grid.clone(),
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Dense `e^{-iHt}` in the position basis.
    pub fn propagator(&self, t: f64) -> DMatrix<Complex64> {
        let n = self.grid.n();
        let q = &self.eigenvectors;
        let phases: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&l| Complex64::cis(-l * t))
            .collect();
        DMatrix::from_fn(n, n, |j, l| {
            (0..n)
                .map(|e| phases[e] * (q[(j, e)] * q[(l, e)]))
                .sum::<Complex64>()
        })
    }

    pub fn propagate(&self, state: &State, t: f64) -> State {
        let psi = position_vector(state);
        let q = &self.eigenvectors;
        // Qᵀ ψ, phase, Q
        let coeffs: Vec<Complex64> = (0..self.grid.n())
            .map(|e| {
                let c: Complex64 = q
                    .column(e)
                    .iter()
                    .zip(psi.iter())
                    .map(|(a, b)| b * *a)
                    .sum();
                c * Complex64::cis(-self.eigenvalues[e] * t)
            })
            .collect();
        let out: Vec<Complex64> = (0..self.grid.n())
            .map(|j| coeffs.iter().enumerate().map(|(e, c)| c * q[(j, e)]).sum())
            .collect();
        State::new(&self.grid, Representation::Position, out).expect("length matches grid")
    }

    /// Dense Dollard-reference S-matrix `U_D(T)^{-1} e^{-2iHT} U_D(-T)`.
    pub fn dollard_s_matrix(&self, horizon: f64, alpha: f64) -> DMatrix<Complex64> {
        let ud_minus = self.dollard_matrix(-horizon, alpha);
        let ud_plus_inv = self.dollard_matrix(horizon, alpha).adjoint();
        ud_plus_inv * self.propagator(2.0 * horizon) * ud_minus
    }

    /// Dense `U_D(t)` via an explicit DFT matrix.
    pub fn dollard_matrix(&self, t: f64, alpha: f64) -> DMatrix<Complex64> {
        let n = self.grid.n();
        let m = self.grid.mass();
        let x = self.grid.positions();
        let dx = self.grid.dx();
        let dk = self.grid.dk();
        let k: Vec<f64> = (0..n)
            .map(|idx| if idx <= n / 2 { idx as f64 } else { idx as f64 - n as f64 } * dk)
            .collect();
        let diag: Vec<Complex64> = k
            .iter()
            .map(|&k| {
                let phi = if k == 0.0 || t == 0.0 {
                    0.0
                } else {
                    -t.signum() * alpha * m / k.abs() * (1.0 + k.abs() * t.abs() / m).ln()
                };
                Complex64::cis(-0.5 * k * k * t / m + phi)
            })
            .collect();
        let forward = DMatrix::from_fn(n, n, |mi, j| {
            Complex64::cis(-k[mi] * x[j]) * (dx / (2.0 * PI).sqrt())
        });
        let inverse = DMatrix::from_fn(n, n, |j, mi| {
            Complex64::cis(k[mi] * x[j]) * (dk / (2.0 * PI).sqrt())
        });
        inverse * DMatrix::from_diagonal(&DVector::from_vec(diag)) * forward
    }

    pub fn apply(&self, matrix: &DMatrix<Complex64>, state: &State) -> State {
        let out = matrix * position_vector(state);
        State::new(
            &self.grid,
            Representation::Position,
            out.iter().copied().collect(),
        )
        .expect("length matches grid")
    }
}

fn position_vector(state: &State) -> DVector<Complex64> {
    DVector::from_column_slice(state.to_position().amplitudes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{distance, gaussian_packet, make_grid, PacketSpec};

    #[test]
    fn free_oracle_matches_spectral_free_evolution() {
        let g = make_grid(64, 32.0, 1.0).unwrap();
        let oracle = DenseOracle::new(&g, &PotentialSpec::coulomb(0.0, 1.0)).unwrap();
        let psi = gaussian_packet(&g, &PacketSpec::new(-4.0, 2.0, 1.5)).unwrap();
        let a = oracle.propagate(&psi, 0.7);
        let b = crate::dynamics::free_propagate(&psi, 0.7);
        assert!(distance(&a, &b).unwrap() < 1e-12);
    }

    #[test]
    fn dense_propagator_is_unitary() {
        let g = make_grid(32, 16.0, 1.0).unwrap();
        let oracle = DenseOracle::new(&g, &PotentialSpec::coulomb(0.5, 1.0)).unwrap();
        let u = oracle.propagator(1.3);
        let id = u.adjoint() * &u;
        let err = (id - DMatrix::<Complex64>::identity(32, 32)).norm();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn rejects_large_grids() {
        let g = make_grid(2048, 1024.0, 1.0).unwrap();
        assert!(DenseOracle::new(&g, &PotentialSpec::coulomb(0.5, 1.0)).is_err());
    }
}

//! Two-mode Gaussian covariance matrices.
//!
//! All values are in shot-noise units: the vacuum has quadrature variance 1,
//! so a state is physical iff its smallest symplectic eigenvalue is at least 1.

use nalgebra::{Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Default slack on `nu_minus >= 1`. Pure states sit exactly on the bound.
pub const DEFAULT_PHYSICAL_TOL: f64 = 1e-9;

/// Symmetry tolerance for [`GeneralCM::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

// Relative slack on negative eigenvalues before a matrix counts as indefinite.
const PSD_REL_TOL: f64 = 1e-12;

/// Covariance matrix in the `(alpha I, gamma Z; gamma Z, beta I)` standard form.
///
/// `gamma` is the X-X correlation; the P-P correlation is `-gamma`. The type
/// holds any finite triple with nonnegative diagonal, so that noisy estimates
/// can be represented; physicality (which implies `alpha, beta >= 1`) is a
/// separate check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardFormCM {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// `(det sigma_A, det sigma_B, det sigma_AB)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetBlocks {
    pub det_a: f64,
    pub det_b: f64,
    pub det_ab: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymplecticSpectrum {
    pub nu_minus: f64,
    pub nu_plus: f64,
}

impl SymplecticSpectrum {
    pub fn is_physical(&self, tol: f64) -> bool {
        self.nu_minus >= 1.0 - tol
    }
}

/// Shared behaviour of the two covariance representations.
pub trait CovarianceMatrix {
    fn symplectic_eigenvalues(&self) -> Result<SymplecticSpectrum>;

    /// True iff `nu_minus >= 1 - tol`.
    fn is_physical(&self, tol: f64) -> Result<bool> {
        Ok(self.symplectic_eigenvalues()?.is_physical(tol))
    }

    /// Fails with [`Error::UnphysicalState`] unless the state is physical.
    fn ensure_physical(&self, tol: f64) -> Result<SymplecticSpectrum> {
        let spectrum = self.symplectic_eigenvalues()?;
        if spectrum.is_physical(tol) {
            Ok(spectrum)
        } else {
            Err(Error::UnphysicalState {
                nu_minus: spectrum.nu_minus,
                tol,
            })
        }
    }
}

impl StandardFormCM {
    pub const VACUUM: StandardFormCM = StandardFormCM {
        alpha: 1.0,
        beta: 1.0,
        gamma: 0.0,
    };

    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
            return Err(domain(format!(
                "non-finite covariance entries ({alpha}, {beta}, {gamma})"
            )));
        }
        if alpha < 0.0 || beta < 0.0 {
            return Err(domain(format!(
                "negative marginal variance (alpha={alpha}, beta={beta})"
            )));
        }
        Ok(Self { alpha, beta, gamma })
    }

    /// `alpha*beta - gamma^2`, the determinant of either 2x2 quadrature block.
    /// `det sigma_AB` is its square.
    pub fn reduced_det(&self) -> f64 {
        self.alpha * self.beta - self.gamma * self.gamma
    }

    pub fn det_blocks(&self) -> DetBlocks {
        let r = self.reduced_det();
        DetBlocks {
            det_a: self.alpha * self.alpha,
            det_b: self.beta * self.beta,
            det_ab: r * r,
        }
    }

    /// Dense 4x4 form over `(X_A, P_A, X_B, P_B)`.
    pub fn to_general(&self) -> GeneralCM {
        let (a, b, c) = (self.alpha, self.beta, self.gamma);
        GeneralCM {
            entries: [
                [a, 0.0, c, 0.0],
                [0.0, a, 0.0, -c],
                [c, 0.0, b, 0.0],
                [0.0, -c, 0.0, b],
            ],
        }
    }

    fn min_eigenvalue(&self) -> f64 {
        let (a, b, c) = (self.alpha, self.beta, self.gamma);
        0.5 * ((a + b) - ((a - b) * (a - b) + 4.0 * c * c).sqrt())
    }
}

impl CovarianceMatrix for StandardFormCM {
    /// Closed form: `nu^2 = (D +- sqrt(D^2 - 4 det))/2` with
    /// `D = alpha^2 + beta^2 - 2 gamma^2`.
    fn symplectic_eigenvalues(&self) -> Result<SymplecticSpectrum> {
        let scale = self.alpha.max(self.beta).max(1.0);
        let min_eig = self.min_eigenvalue();
        if min_eig < -PSD_REL_TOL * scale {
            return Err(Error::NonPositiveMatrix(min_eig));
        }
        let (a, b, c) = (self.alpha, self.beta, self.gamma);
        let delta = a * a + b * b - 2.0 * c * c;
        let det = self.det_blocks().det_ab;
        let disc = delta * delta - 4.0 * det;
        if disc < -PSD_REL_TOL * scale.powi(4) {
            return Err(Error::NumericalFailure(format!(
                "negative symplectic discriminant {disc:e}"
            )));
        }
        let nu_plus_sq = 0.5 * (delta + disc.max(0.0).sqrt());
        // nu_-^2 nu_+^2 = det; avoids cancellation near pure states.
        let nu_minus_sq = if nu_plus_sq > 0.0 { det / nu_plus_sq } else { 0.0 };
        Ok(SymplecticSpectrum {
            nu_minus: nu_minus_sq.sqrt(),
            nu_plus: nu_plus_sq.sqrt(),
        })
    }
}

/// Dense symmetric 4x4 covariance matrix over `(X_A, P_A, X_B, P_B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralCM {
    entries: [[f64; 4]; 4],
}

/// Result of projecting a [`GeneralCM`] onto the standard form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub cm: StandardFormCM,
    /// Largest absolute deviation of any entry from the projected matrix,
    /// or the largest asymmetry, whichever is bigger.
    pub residual: f64,
}

impl GeneralCM {
    pub fn new(entries: [[f64; 4]; 4]) -> Result<Self> {
        if entries.iter().flatten().any(|x| !x.is_finite()) {
            return Err(domain("non-finite covariance entry"));
        }
        let asym = max_asymmetry(&entries);
        if asym > SYMMETRY_TOL {
            return Err(domain(format!("matrix is not symmetric (max |s_ij - s_ji| = {asym:e})")));
        }
        Ok(Self { entries })
    }

    pub fn zeros() -> Self {
        Self {
            entries: [[0.0; 4]; 4],
        }
    }

    pub fn entries(&self) -> &[[f64; 4]; 4] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.entries[i][j])
    }

    /// Projects onto `(alpha I, gamma Z; gamma Z, beta I)` by averaging the
    /// entries that the standard form ties together.
    ///
    /// Fails with [`Error::StructureViolation`] when the residual exceeds `tol`.
    pub fn standard_form_of(&self, tol: f64) -> Result<Projection> {
        let s = &self.entries;
        let alpha = 0.5 * (s[0][0] + s[1][1]);
        let beta = 0.5 * (s[2][2] + s[3][3]);
        let gamma = 0.25 * (s[0][2] + s[2][0] - s[1][3] - s[3][1]);
        let projected = StandardFormCM {
            alpha,
            beta,
            gamma,
        };
        let target = projected.to_general();
        let mut residual = max_asymmetry(s);
        for (row, expected) in s.iter().zip(&target.entries) {
            for (x, t) in row.iter().zip(expected) {
                residual = residual.max((x - t).abs());
            }
        }
        if residual > tol {
            return Err(Error::StructureViolation { residual, tol });
        }
        let cm = StandardFormCM::new(alpha, beta, gamma)?;
        Ok(Projection { cm, residual })
    }
}

/// Eigenvalues of `|i Omega sigma|`, taken as the singular values of the real
/// antisymmetric matrix `sqrt(sigma) Omega sqrt(sigma)`.
impl CovarianceMatrix for GeneralCM {
    fn symplectic_eigenvalues(&self) -> Result<SymplecticSpectrum> {
        let sigma = self.to_matrix();
        let eig = SymmetricEigen::new(sigma);
        let scale = eig.eigenvalues.amax().max(1.0);
        let min_eig = eig.eigenvalues.min();
        if min_eig < -PSD_REL_TOL * scale {
            return Err(Error::NonPositiveMatrix(min_eig));
        }
        let root = eig.eigenvectors
            * Matrix4::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()))
            * eig.eigenvectors.transpose();
        let m = root * symplectic_form() * root;
        let gram = m.transpose() * m;
        let mut nu_sq: Vec<f64> = SymmetricEigen::new(gram)
            .eigenvalues
            .iter()
            .map(|x| x.max(0.0))
            .collect();
        nu_sq.sort_by(f64::total_cmp);
        let pair_gap = (nu_sq[1] - nu_sq[0]).abs().max((nu_sq[3] - nu_sq[2]).abs());
        if pair_gap > 1e-6 * scale * scale {
            return Err(Error::NumericalFailure(format!(
                "symplectic eigenvalues not paired (gap {pair_gap:e})"
            )));
        }
        Ok(SymplecticSpectrum {
            nu_minus: (0.5 * (nu_sq[0] + nu_sq[1])).sqrt(),
            nu_plus: (0.5 * (nu_sq[2] + nu_sq[3])).sqrt(),
        })
    }
}

impl From<StandardFormCM> for GeneralCM {
    fn from(cm: StandardFormCM) -> Self {
        cm.to_general()
    }
}

/// Two-mode symplectic form `Omega = diag(J, J)`, `J = (0 1; -1 0)`.
pub fn symplectic_form() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

#[allow(clippy::needless_range_loop)]
fn max_asymmetry(s: &[[f64; 4]; 4]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in (i + 1)..4 {
            worst = worst.max((s[i][j] - s[j][i]).abs());
        }
    }
    worst
}

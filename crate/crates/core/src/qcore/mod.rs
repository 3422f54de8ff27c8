//! Dense complex linear algebra for small quantum registers.
//!
//! Everything here is exact double-precision arithmetic on matrices of
//! dimension `2^K` with `K` bounded by [`Tolerances::max_qubits`]. The
//! types validate their invariants on construction; operations return new
//! values and never mutate their inputs.

mod io;
mod observable;
pub mod random;

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

pub use io::{read_matrix_binary, read_matrix_text, write_matrix_binary, write_matrix_text};
pub use observable::Observable;

/// Largest register whose density invariants are re-checked by debug builds.
const DEBUG_CHECK_QUBITS: u32 = 6;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;

/// Numerical tolerances and the dimension cap, in one place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max-norm of `A - A^dagger` accepted as Hermitian.
    pub hermitian: f64,
    /// Allowed deviation of a density matrix trace from one.
    pub trace: f64,
    /// Most negative eigenvalue accepted as positive semidefinite.
    pub psd: f64,
    /// Eigenvalues closer than this share an eigenspace.
    pub group: f64,
    /// Padding on both ends of a band interval.
    pub band_pad: f64,
    /// `Tr(M rho M)` at or below this is a vanishing projection.
    pub zero_projection: f64,
    /// Largest imaginary part tolerated in `Tr(E rho)`.
    pub imag_trace: f64,
    /// Eigenvalues this close to a band edge are flagged in diagnostics.
    pub band_edge_warning: f64,
    /// Largest register, in qubits.
    pub max_qubits: u32,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            trace: 1e-9,
            psd: 1e-9,
            group: 1e-9,
            band_pad: 1e-9,
            zero_projection: 1e-12,
            imag_trace: 1e-9,
            band_edge_warning: 1e-6,
            max_qubits: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QcoreError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("trace {0} is not one")]
    BadTrace(f64),
    #[error("matrix is not positive semidefinite")]
    NotPsd,
    #[error("spectrum [{min}, {max}] is outside [0, 1]")]
    SpectrumOutOfRange { min: f64, max: f64 },
    #[error("trace has imaginary part {0:e}; operator is corrupted")]
    ImaginaryTrace(f64),
    #[error("register of {qubits} qubits exceeds the cap of {cap}")]
    CapExceeded { qubits: u32, cap: u32 },
    #[error("projection has vanishing weight {0:e}")]
    VanishingProjection(f64),
    #[error("eigendecomposition did not converge")]
    EigenFailure,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed matrix data: {0}")]
    Format(String),
}

pub type Result<T, E = QcoreError> = std::result::Result<T, E>;

pub(crate) fn qubits_of(dim: usize) -> Result<u32> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(QcoreError::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros())
}

fn check_cap(qubits: u32, tol: &Tolerances) -> Result<()> {
    if qubits > tol.max_qubits {
        return Err(QcoreError::CapExceeded { qubits, cap: tol.max_qubits });
    }
    Ok(())
}

/// Max-norm of `A - A^dagger`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(QcoreError::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    Ok(())
}

fn hermitize(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    let eig = SymmetricEigen::try_new(m.clone(), 1e-15, 0).ok_or(QcoreError::EigenFailure)?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// A Hermitian, positive semidefinite, unit-trace matrix on `K` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    qubits: u32,
    m: CMatrix,
}

impl DensityMatrix {
    /// Validates all three invariants and the dimension cap.
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::new_with(m, &Tolerances::default())
    }

    pub fn new_with(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        check_square(&m)?;
        let qubits = qubits_of(m.nrows())?;
        check_cap(qubits, tol)?;
        validate_density(&m, tol)?;
        Ok(Self { qubits, m })
    }

    /// Construction from arithmetic that preserves the invariants. The
    /// matrix is re-symmetrised; invariants are re-checked in debug builds
    /// for registers small enough that the eigendecomposition is cheap.
    pub(crate) fn from_trusted(mut m: CMatrix) -> Self {
        hermitize(&mut m);
        let qubits = m.nrows().trailing_zeros();
        debug_assert!(m.nrows().is_power_of_two());
        debug_assert!(
            qubits > DEBUG_CHECK_QUBITS || validate_density(&m, &Tolerances::default()).is_ok(),
            "density matrix invariant broken: {:?}",
            validate_density(&m, &Tolerances::default())
        );
        Self { qubits, m }
    }

    /// `|psi><psi|` for a (not necessarily normalised) state vector.
    pub fn from_pure(amplitudes: &[C64]) -> Result<Self> {
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(QcoreError::InvalidArgument("zero state vector".into()));
        }
        let n = amplitudes.len();
        let m = CMatrix::from_fn(n, n, |i, j| amplitudes[i] * amplitudes[j].conj() / norm2);
        Self::new(m)
    }

    /// Computational basis state `|index><index|`.
    pub fn basis_state(qubits: u32, index: usize) -> Result<Self> {
        let dim = 1usize << qubits;
        if index >= dim {
            return Err(QcoreError::InvalidArgument(format!("basis index {index} >= {dim}")));
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = C64::new(1.0, 0.0);
        Self::new(m)
    }

    pub fn qubits(&self) -> u32 {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    /// Convex combination `alpha * self + (1 - alpha) * other`.
    pub fn mix(&self, other: &DensityMatrix, alpha: f64) -> Result<DensityMatrix> {
        if self.dim() != other.dim() {
            return Err(QcoreError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(QcoreError::InvalidArgument(format!("mixing weight {alpha}")));
        }
        Ok(Self::from_trusted(&self.m * C64::from(alpha) + &other.m * C64::from(1.0 - alpha)))
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        check_cap(self.qubits + other.qubits, &Tolerances::default())?;
        Ok(Self::from_trusted(self.m.kronecker(&other.m)))
    }
}

fn validate_density(m: &CMatrix, tol: &Tolerances) -> Result<()> {
    let defect = hermitian_defect(m);
    if defect > tol.hermitian {
        return Err(QcoreError::NotHermitian(defect));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
        return Err(QcoreError::BadTrace(tr.re));
    }
    // PSD within tolerance iff A + psd * I admits a Cholesky factor. The
    // check runs on the real embedding [[Re, -Im], [Im, Re]], which has the
    // same spectrum with doubled multiplicity.
    let n = m.nrows();
    let real = DMatrix::<f64>::from_fn(2 * n, 2 * n, |i, j| {
        let z = m[(i % n, j % n)];
        let base = match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        };
        if i == j {
            base + tol.psd
        } else {
            base
        }
    });
    let real = (&real + real.transpose()) * 0.5;
    if Cholesky::new(real).is_none() {
        return Err(QcoreError::NotPsd);
    }
    Ok(())
}

/// Hermitian operator with spectrum in `[0, 1]`; the accepting element of a
/// two-outcome measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOperator {
    m: CMatrix,
}

impl MeasurementOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        let tol = Tolerances::default();
        check_square(&m)?;
        let defect = hermitian_defect(&m);
        if defect > tol.hermitian {
            return Err(QcoreError::NotHermitian(defect));
        }
        let mut m = m;
        hermitize(&mut m);
        let eig = hermitian_eigenvalues(&m)?;
        let (min, max) = (eig[0], eig[eig.len() - 1]);
        if min < -tol.psd || max > 1.0 + tol.psd {
            return Err(QcoreError::SpectrumOutOfRange { min, max });
        }
        Ok(Self { m })
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: CMatrix::identity(dim, dim) }
    }

    pub fn zero(dim: usize) -> Self {
        Self { m: CMatrix::zeros(dim, dim) }
    }

    /// Projector onto the normalised span of `v`.
    pub fn projector_onto(v: &[C64]) -> Result<Self> {
        Ok(Self { m: DensityMatrix::from_pure(v)?.into_matrix() })
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let n = values.len();
        Self::new(CMatrix::from_fn(n, n, |i, j| if i == j { C64::from(values[i]) } else { C64::from(0.0) }))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    /// `I - E`, the rejecting element.
    pub fn complement(&self) -> Self {
        let n = self.dim();
        Self { m: CMatrix::identity(n, n) - &self.m }
    }
}

/// `p = Tr(E rho)`, clamped into `[0, 1]`.
pub fn acceptance_probability(e: &MeasurementOperator, rho: &DensityMatrix) -> Result<f64> {
    if e.dim() != rho.dim() {
        return Err(QcoreError::DimensionMismatch { expected: rho.dim(), found: e.dim() });
    }
    let tr = (e.matrix() * rho.matrix()).trace();
    if tr.im.abs() > Tolerances::default().imag_trace {
        return Err(QcoreError::ImaginaryTrace(tr.im));
    }
    Ok(tr.re.clamp(0.0, 1.0))
}

/// `rho^{⊗r}` under the default dimension cap.
pub fn tensor_power(rho: &DensityMatrix, r: usize) -> Result<DensityMatrix> {
    tensor_power_with(rho, r, &Tolerances::default())
}

pub fn tensor_power_with(rho: &DensityMatrix, r: usize, tol: &Tolerances) -> Result<DensityMatrix> {
    if r == 0 {
        return Err(QcoreError::InvalidArgument("tensor power r must be >= 1".into()));
    }
    check_cap(rho.qubits().saturating_mul(r as u32), tol)?;
    let mut acc = rho.matrix().clone();
    for _ in 1..r {
        acc = acc.kronecker(rho.matrix());
    }
    Ok(DensityMatrix::from_trusted(acc))
}

/// The observable `(1/r) Σ_j E^{(j)}` on `r` copies, with its spectral
/// decomposition in product form.
pub fn average_observable(e: &MeasurementOperator, r: usize) -> Result<Observable> {
    average_observable_with(e, r, &Tolerances::default())
}

pub fn average_observable_with(e: &MeasurementOperator, r: usize, tol: &Tolerances) -> Result<Observable> {
    if r == 0 {
        return Err(QcoreError::InvalidArgument("copy count r must be >= 1".into()));
    }
    let q = qubits_of(e.dim())?;
    check_cap(q.saturating_mul(r as u32), tol)?;
    Observable::product_average(e.matrix(), r, tol.group)
}

/// Spectral decomposition with eigenvalues closer than `group_tol` merged.
pub fn spectral_decompose(h: &CMatrix, group_tol: f64) -> Result<Observable> {
    check_square(h)?;
    let defect = hermitian_defect(h);
    if defect > Tolerances::default().hermitian {
        return Err(QcoreError::NotHermitian(defect));
    }
    Observable::dense(h, group_tol)
}

/// Projector onto the eigenspaces of `f` with eigenvalue in
/// `[center - halfwidth, center + halfwidth]`, padded by the default band tolerance.
pub fn band_projector(f: &Observable, center: f64, halfwidth: f64) -> CMatrix {
    f.band_projector(center, halfwidth, Tolerances::default().band_pad)
}

/// `M rho M / Tr(M rho M)`.
pub fn project_renormalize(rho: &DensityMatrix, m: &CMatrix) -> Result<DensityMatrix> {
    project_renormalize_with(rho, m, Tolerances::default().zero_projection)
}

pub fn project_renormalize_with(rho: &DensityMatrix, m: &CMatrix, zero_tol: f64) -> Result<DensityMatrix> {
    if m.nrows() != rho.dim() || m.ncols() != rho.dim() {
        return Err(QcoreError::DimensionMismatch { expected: rho.dim(), found: m.nrows() });
    }
    let projected = m * rho.matrix() * m;
    let weight = projected.trace().re;
    if weight <= zero_tol {
        return Err(QcoreError::VanishingProjection(weight));
    }
    Ok(DensityMatrix::from_trusted(projected / C64::from(weight)))
}

/// `I / 2^K`.
pub fn maximally_mixed(num_qubits: u32) -> Result<DensityMatrix> {
    maximally_mixed_with(num_qubits, &Tolerances::default())
}

pub fn maximally_mixed_with(num_qubits: u32, tol: &Tolerances) -> Result<DensityMatrix> {
    check_cap(num_qubits, tol)?;
    let dim = 1usize << num_qubits;
    Ok(DensityMatrix { qubits: num_qubits, m: CMatrix::identity(dim, dim) / C64::from(dim as f64) })
}

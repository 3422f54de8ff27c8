use nalgebra::SymmetricEigen;
use num_traits::Zero;

use super::{CMatrix, DensityMatrix, QcoreError, Result, C64};

/// Orthonormal eigenbasis, either dense or the `r`-fold tensor power of a
/// single-copy basis.
#[derive(Debug, Clone)]
enum Basis {
    Dense(CMatrix),
    /// `single` is the one-copy operator `E` being averaged.
    Product {
        factor: CMatrix,
        copies: usize,
        single: CMatrix,
    },
}

/// A Hermitian operator together with its spectral decomposition
/// `F = Σ_i λ_i P_i`, distinct eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Observable {
    dim: usize,
    basis: Basis,
    /// Eigenvalue of each basis column, after grouping.
    column_values: Vec<f64>,
    eigenvalues: Vec<f64>,
    groups: Vec<Vec<usize>>,
}

fn group_values(raw: &[f64], group_tol: f64) -> (Vec<f64>, Vec<Vec<usize>>, Vec<f64>) {
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for idx in order {
        let v = raw[idx];
        match groups.last_mut() {
            Some(g) if v - last <= group_tol => g.push(idx),
            _ => groups.push(vec![idx]),
        }
        last = v;
    }
    let eigenvalues: Vec<f64> =
        groups.iter().map(|g| g.iter().map(|&i| raw[i]).sum::<f64>() / g.len() as f64).collect();
    let mut column_values = vec![0.0; raw.len()];
    for (g, &lambda) in groups.iter().zip(&eigenvalues) {
        for &i in g {
            column_values[i] = lambda;
        }
    }
    (eigenvalues, groups, column_values)
}

/// Within every run of `d * stride` values, replace sub-slice `a` (length
/// `stride`) by `Σ_b coef[a * d + b] * sub-slice b`.
fn mix_runs(data: &mut [C64], coef: &[C64], d: usize, stride: usize, tmp: &mut Vec<C64>) {
    let run = d * stride;
    tmp.resize(run, C64::zero());
    for chunk in data.chunks_exact_mut(run) {
        tmp.copy_from_slice(chunk);
        for (a, out) in chunk.chunks_exact_mut(stride).enumerate() {
            out.fill(C64::zero());
            for (b, src) in tmp.chunks_exact(stride).enumerate() {
                let c = coef[a * d + b];
                for (o, s) in out.iter_mut().zip(src) {
                    *o += c * s;
                }
            }
        }
    }
}

/// [`mix_runs`] with the factor dimension known at compile time.
fn mix_runs_const<const D: usize>(data: &mut [C64], coef: &[C64], stride: usize) {
    let mut w = [[C64::zero(); D]; D];
    for (a, row) in w.iter_mut().enumerate() {
        row.copy_from_slice(&coef[a * D..(a + 1) * D]);
    }
    for chunk in data.chunks_exact_mut(D * stride) {
        for k in 0..stride {
            let mut v = [C64::zero(); D];
            for (b, slot) in v.iter_mut().enumerate() {
                *slot = chunk[b * stride + k];
            }
            for (a, row) in w.iter().enumerate() {
                let mut acc = C64::zero();
                for (c, x) in row.iter().zip(&v) {
                    acc += c * x;
                }
                chunk[a * stride + k] = acc;
            }
        }
    }
}

/// `A <- W^{⊗r} A`, one column at a time so each column stays in cache
/// for all `r` factors.
fn apply_power_left(a: &mut CMatrix, w: &CMatrix, copies: usize) {
    let d = w.nrows();
    let dim = a.nrows();
    let coef: Vec<C64> = (0..d * d).map(|k| w[(k / d, k % d)]).collect();
    let mut tmp = Vec::new();
    for column in a.as_mut_slice().chunks_exact_mut(dim) {
        for slot in 0..copies {
            let stride = d.pow((copies - 1 - slot) as u32);
            match d {
                2 => mix_runs_const::<2>(column, &coef, stride),
                4 => mix_runs_const::<4>(column, &coef, stride),
                _ => mix_runs(column, &coef, d, stride, &mut tmp),
            }
        }
    }
}

/// `A W^{⊗r} = ((W^dagger)^{⊗r} A^dagger)^dagger`.
fn apply_power_right(a: &CMatrix, w: &CMatrix, copies: usize) -> CMatrix {
    let mut t = a.adjoint();
    apply_power_left(&mut t, &w.adjoint(), copies);
    t.adjoint()
}

/// `(1/r) Σ_j Tr(E rho_j)` with `rho_j` the marginal on copy `j`.
fn average_single_copy(e: &CMatrix, rho: &CMatrix, copies: usize) -> f64 {
    let d = e.nrows();
    let dim = rho.nrows();
    let mut total = 0.0;
    for slot in 0..copies {
        let stride = d.pow((copies - 1 - slot) as u32);
        let block = stride * d;
        for outer in (0..dim).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for a in 0..d {
                    for b in 0..d {
                        total += (e[(b, a)] * rho[(base + a * stride, base + b * stride)]).re;
                    }
                }
            }
        }
    }
    total / copies as f64
}

impl Observable {
    pub(crate) fn dense(h: &CMatrix, group_tol: f64) -> Result<Self> {
        let eig = SymmetricEigen::try_new(h.clone(), 1e-15, 0).ok_or(QcoreError::EigenFailure)?;
        let raw: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let (eigenvalues, groups, column_values) = group_values(&raw, group_tol);
        Ok(Self { dim: h.nrows(), basis: Basis::Dense(eig.eigenvectors), column_values, eigenvalues, groups })
    }

    /// `(1/r) Σ_j E^{(j)}`: eigenvectors are tensor products of the
    /// eigenvectors of `E`; eigenvalues are averages of `r` eigenvalues of `E`.
    pub(crate) fn product_average(e: &CMatrix, copies: usize, group_tol: f64) -> Result<Self> {
        let eig = SymmetricEigen::try_new(e.clone(), 1e-15, 0).ok_or(QcoreError::EigenFailure)?;
        let single: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let d = single.len();
        let dim = d.pow(copies as u32);
        let mut raw = vec![0.0; dim];
        for (idx, value) in raw.iter_mut().enumerate() {
            let mut rest = idx;
            let mut sum = 0.0;
            for _ in 0..copies {
                sum += single[rest % d];
                rest /= d;
            }
            *value = sum / copies as f64;
        }
        let (eigenvalues, groups, column_values) = group_values(&raw, group_tol);
        Ok(Self {
            dim,
            basis: Basis::Product { factor: eig.eigenvectors, copies, single: e.clone() },
            column_values,
            eigenvalues,
            groups,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Distinct eigenvalues, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    /// `V^dagger A V`, with `V` the eigenbasis.
    pub fn to_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        match &self.basis {
            Basis::Dense(v) => v.adjoint() * a * v,
            Basis::Product { factor, copies, .. } => {
                let mut out = a.clone();
                apply_power_left(&mut out, &factor.adjoint(), *copies);
                apply_power_right(&out, factor, *copies)
            }
        }
    }

    /// `V A V^dagger`.
    pub fn from_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        match &self.basis {
            Basis::Dense(v) => v * a * v.adjoint(),
            Basis::Product { factor, copies, .. } => {
                let mut out = a.clone();
                apply_power_left(&mut out, factor, *copies);
                apply_power_right(&out, &factor.adjoint(), *copies)
            }
        }
    }

    fn diagonal_mask(&self, keep: impl Fn(usize) -> bool) -> CMatrix {
        CMatrix::from_fn(self.dim, self.dim, |i, j| if i == j && keep(i) { C64::new(1.0, 0.0) } else { C64::zero() })
    }

    /// Projector `P_i` onto the `i`-th eigenspace.
    pub fn projector(&self, i: usize) -> CMatrix {
        let members = &self.groups[i];
        self.from_eigenbasis(&self.diagonal_mask(|k| members.contains(&k)))
    }

    /// `Σ_i λ_i P_i`.
    pub fn matrix(&self) -> CMatrix {
        let diag =
            CMatrix::from_fn(
                self.dim,
                self.dim,
                |i, j| {
                    if i == j {
                        C64::from(self.column_values[i])
                    } else {
                        C64::zero()
                    }
                },
            );
        self.from_eigenbasis(&diag)
    }

    /// `Tr(F rho)`.
    pub fn expectation(&self, rho: &DensityMatrix) -> f64 {
        match &self.basis {
            Basis::Dense(_) => self.expectation_rotated(&self.to_eigenbasis(rho.matrix())),
            Basis::Product { single, copies, .. } => average_single_copy(single, rho.matrix(), *copies),
        }
    }

    /// Whether an eigenvalue lies in the padded closed band.
    pub fn in_band(&self, lambda: f64, center: f64, halfwidth: f64, pad: f64) -> bool {
        lambda >= center - halfwidth - pad && lambda <= center + halfwidth + pad
    }

    /// Whether some eigenvalue sits within `margin` of either band edge.
    pub fn near_band_edge(&self, center: f64, halfwidth: f64, margin: f64) -> bool {
        let lo = center - halfwidth;
        let hi = center + halfwidth;
        self.eigenvalues.iter().any(|&l| (l - lo).abs() <= margin || (l - hi).abs() <= margin)
    }

    pub fn band_projector(&self, center: f64, halfwidth: f64, pad: f64) -> CMatrix {
        self.from_eigenbasis(&self.diagonal_mask(|k| self.in_band(self.column_values[k], center, halfwidth, pad)))
    }

    /// Band projection of `rho` computed in the eigenbasis. Returns the
    /// renormalised state and `Tr(M rho)`.
    #[cfg(test)]
    pub(crate) fn project_band(
        &self,
        rho: &DensityMatrix,
        center: f64,
        halfwidth: f64,
        pad: f64,
        zero_tol: f64,
    ) -> Result<(DensityMatrix, f64)> {
        self.project_band_rotated(self.to_eigenbasis(rho.matrix()), center, halfwidth, pad, zero_tol)
    }

    /// `Tr(F rho)` from `V^dagger rho V`.
    pub(crate) fn expectation_rotated(&self, rotated: &CMatrix) -> f64 {
        (0..self.dim).map(|k| self.column_values[k] * rotated[(k, k)].re).sum()
    }

    /// `project_band` for a state already in the eigenbasis.
    pub(crate) fn project_band_rotated(
        &self,
        mut rotated: CMatrix,
        center: f64,
        halfwidth: f64,
        pad: f64,
        zero_tol: f64,
    ) -> Result<(DensityMatrix, f64)> {
        let keep: Vec<bool> =
            (0..self.dim).map(|k| self.in_band(self.column_values[k], center, halfwidth, pad)).collect();
        let weight: f64 = (0..self.dim).filter(|&k| keep[k]).map(|k| rotated[(k, k)].re).sum();
        if weight <= zero_tol {
            return Err(QcoreError::VanishingProjection(weight));
        }
        for j in 0..self.dim {
            for i in 0..self.dim {
                if !(keep[i] && keep[j]) {
                    rotated[(i, j)] = C64::zero();
                }
            }
        }
        let back = self.from_eigenbasis(&rotated) / C64::from(weight);
        Ok((DensityMatrix::from_trusted(back), weight))
    }
}

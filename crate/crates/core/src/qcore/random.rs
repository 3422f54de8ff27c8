//! Seeded random instances: Ginibre density matrices, Haar-ish unitaries and
//! measurement operators with uniform spectrum.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{CMatrix, DensityMatrix, MeasurementOperator, C64};

fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(dim, rng);
    (&g + g.adjoint()) * C64::from(0.5)
}

pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(dim, rng).qr();
    let (q, r) = qr.unpack();
    // Fix column phases so the distribution does not depend on the QR convention.
    let mut q = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Full-rank mixed state `G G^dagger / Tr(G G^dagger)`.
pub fn random_density<R: Rng + ?Sized>(qubits: u32, rng: &mut R) -> DensityMatrix {
    let g = ginibre(1 << qubits, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m / C64::from(tr)).expect("Ginibre state is a density matrix")
}

pub fn random_pure<R: Rng + ?Sized>(qubits: u32, rng: &mut R) -> DensityMatrix {
    let v: Vec<C64> =
        (0..1usize << qubits).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    DensityMatrix::from_pure(&v).expect("nonzero vector")
}

/// `U diag(u) U^dagger` with `u` uniform in `[0, 1]`.
pub fn random_measurement<R: Rng + ?Sized>(qubits: u32, rng: &mut R) -> MeasurementOperator {
    let dim = 1usize << qubits;
    let u = random_unitary(dim, rng);
    let d = CMatrix::from_fn(dim, dim, |i, j| if i == j { C64::from(rng.random::<f64>()) } else { C64::from(0.0) });
    MeasurementOperator::new(&u * d * u.adjoint()).expect("spectrum in [0, 1]")
}

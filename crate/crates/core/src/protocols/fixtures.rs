//! Small quantum-classical protocols in canonical form, with the function
//! they are meant to compute and the input lists that index its table.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use rand::Rng;

use crate::qcore::random::{random_density, random_measurement};
use crate::qcore::{CMatrix, DensityMatrix, MeasurementOperator, C64};
use crate::rng::stream_rng;
use crate::smp::{worst_case_error, CoinMode, Dist, FunctionTable, QcProtocol, Result, SmpError};

use super::hidden_matching::xor_matching;

pub struct QcFixture {
    pub protocol: QcProtocol<u64, u64>,
    pub function: FunctionTable,
    pub xs: Vec<u64>,
    pub ys: Vec<u64>,
}

impl QcFixture {
    pub fn worst_case_error(&self) -> Result<f64> {
        let xs: Vec<&u64> = self.xs.iter().collect();
        let ys: Vec<&u64> = self.ys.iter().collect();
        worst_case_error(&self.protocol, &self.function, &xs, &ys)
    }
}

/// `|0>, |+>, |1>, |->` indexed by 2-bit values.
fn toy_states() -> Vec<Vec<C64>> {
    let s = FRAC_1_SQRT_2;
    vec![
        vec![C64::from(1.0), C64::from(0.0)],
        vec![C64::from(s), C64::from(s)],
        vec![C64::from(0.0), C64::from(1.0)],
        vec![C64::from(s), C64::from(-s)],
    ]
}

fn hadamard_conjugate(m: &CMatrix) -> CMatrix {
    let s = C64::from(FRAC_1_SQRT_2);
    let h = CMatrix::from_row_slice(2, 2, &[s, s, s, -s]);
    &h * m * &h
}

/// One qubit for a 2-bit `x`; Bob sends `b = y`; the referee projects onto
/// the state for `b`.
pub fn toy_qc_equality() -> Result<QcFixture> {
    let states = toy_states();
    let family = states.iter().map(|v| MeasurementOperator::projector_onto(v)).collect::<Result<Vec<_>, _>>()?;
    let rhos: Vec<DensityMatrix> = states.iter().map(|v| DensityMatrix::from_pure(v)).collect::<Result<_, _>>()?;
    let protocol = QcProtocol::new(
        "qc-toy-equality",
        1,
        2,
        CoinMode::Private,
        vec![family],
        move |x: &u64, _| Ok(rhos[*x as usize].clone()),
        |y: &u64, _| Ok(Dist::point(*y)),
    )?;
    Ok(QcFixture { protocol, function: FunctionTable::equality(2), xs: (0..4).collect(), ys: (0..4).collect() })
}

/// The toy protocol with a one-bit public coin that conjugates states and
/// measurements by a Hadamard, and a Bob who sends the orthogonal index
/// `y ⊕ 2` with probability 1/5.
pub fn toy_qc_equality_public() -> Result<QcFixture> {
    let states = toy_states();
    let base = states.iter().map(|v| MeasurementOperator::projector_onto(v)).collect::<Result<Vec<_>, _>>()?;
    let rotated =
        base.iter().map(|e| MeasurementOperator::new(hadamard_conjugate(e.matrix()))).collect::<Result<Vec<_>, _>>()?;
    let rhos: Vec<DensityMatrix> = states.iter().map(|v| DensityMatrix::from_pure(v)).collect::<Result<_, _>>()?;
    let protocol = QcProtocol::new(
        "qc-toy-equality-public",
        1,
        2,
        CoinMode::Public { size: 2 },
        vec![base, rotated],
        move |x: &u64, coin| {
            let rho = &rhos[*x as usize];
            if coin == 0 {
                Ok(rho.clone())
            } else {
                Ok(DensityMatrix::new(hadamard_conjugate(rho.matrix()))?)
            }
        },
        |y: &u64, _| Dist::new(vec![(*y, 0.8), (*y ^ 2, 0.2)]),
    )?;
    Ok(QcFixture { protocol, function: FunctionTable::equality(2), xs: (0..4).collect(), ys: (0..4).collect() })
}

/// Random states on `qubits` qubits for `inputs` values of `x`, random
/// measurement operators for every `b`, and a random Bob distribution per
/// `y`. The reference function is Equality on `log2(inputs)` bits.
pub fn random_qc_fixture(seed: u64, qubits: u32, bob_bits: usize, input_bits: u32) -> Result<QcFixture> {
    let inputs = 1usize << input_bits;
    let mut rng = stream_rng(seed, 0);
    let family: Vec<MeasurementOperator> =
        (0..1usize << bob_bits).map(|_| random_measurement(qubits, &mut rng)).collect();
    let rhos: Vec<DensityMatrix> = (0..inputs).map(|_| random_density(qubits, &mut rng)).collect();
    let bobs: Vec<Dist<u64>> = (0..inputs)
        .map(|_| {
            let w: Vec<f64> = (0..1u64 << bob_bits).map(|_| rng.random::<f64>() + 0.05).collect();
            let total: f64 = w.iter().sum();
            Dist::new(w.iter().enumerate().map(|(b, p)| (b as u64, p / total)).collect())
        })
        .collect::<Result<_>>()?;
    let bobs = Arc::new(bobs);
    let protocol = QcProtocol::new(
        format!("qc-random(seed={seed})"),
        qubits,
        bob_bits,
        CoinMode::Private,
        vec![family],
        move |x: &u64, _| Ok(rhos[*x as usize].clone()),
        move |y: &u64, _| Ok(bobs[*y as usize].clone()),
    )?;
    Ok(QcFixture {
        protocol,
        function: FunctionTable::equality(input_bits),
        xs: (0..inputs as u64).collect(),
        ys: (0..inputs as u64).collect(),
    })
}

/// Boolean verification version of hidden matching: Bob holds `(k, w)` with
/// `w ∈ {0,1}^{n/2}` promised to be `M_k x` or its complement, and sends
/// `b = (k << n/2) | w`. The referee accepts with the weight of the state on
/// `Σ_e |v_e><v_e|`, `v_e = (|i> + (-1)^{w_e}|j>)/√2`. Column `(k-1) 2^{n/2} + w`
/// of the table holds Bob's input `(k, w)`.
pub fn hidden_matching_verification(n: usize) -> Result<QcFixture> {
    if !(4..=8).contains(&n) || !n.is_power_of_two() {
        return Err(SmpError::InvalidParameter(format!("verification fixture needs n in {{4, 8}}, got {n}")));
    }
    let half = n / 2;
    let qubits = n.trailing_zeros();
    let bob_bits = qubits as usize + half;
    let s = FRAC_1_SQRT_2;
    let mut family = Vec::with_capacity(1 << bob_bits);
    for b in 0..1usize << bob_bits {
        let k = b >> half;
        if k == 0 {
            family.push(MeasurementOperator::zero(n));
            continue;
        }
        let mut m = CMatrix::zeros(n, n);
        for (e, (i, j)) in xor_matching(n, k).into_iter().enumerate() {
            let sign = if (b >> e) & 1 == 1 { -s } else { s };
            let mut v = vec![C64::from(0.0); n];
            v[i] = C64::from(s);
            v[j] = C64::from(sign);
            m += MeasurementOperator::projector_onto(&v)?.matrix();
        }
        family.push(MeasurementOperator::new(m)?);
    }
    let parities = move |x: u64, k: usize| -> u64 {
        xor_matching(n, k).into_iter().enumerate().fold(0, |acc, (e, (i, j))| acc | ((((x >> i) ^ (x >> j)) & 1) << e))
    };
    let cols = (n - 1) << half;
    let full = (1u64 << half) - 1;
    let function = FunctionTable::from_fn(1 << n, cols, 1, |x, col| {
        let k = 1 + (col >> half);
        let w = (col as u64) & full;
        let mx = parities(x as u64, k);
        if w == mx {
            Some(1)
        } else if w == mx ^ full {
            Some(0)
        } else {
            None
        }
    })?;
    let protocol = QcProtocol::new(
        format!("hidden-matching-verify(n={n})"),
        qubits,
        bob_bits,
        CoinMode::Private,
        vec![family],
        move |x: &u64, _| {
            let a = 1.0 / (n as f64).sqrt();
            let v: Vec<C64> = (0..n).map(|i| C64::from(if (x >> i) & 1 == 1 { -a } else { a })).collect();
            Ok(DensityMatrix::from_pure(&v)?)
        },
        move |y: &u64, _| Ok(Dist::point(((1 + (*y >> half)) << half) | (y & full))),
    )?;
    Ok(QcFixture { protocol, function, xs: (0..1u64 << n).collect(), ys: (0..cols as u64).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smp::exact_acceptance;

    #[test]
    fn toy_acceptance_is_overlap() {
        let f = toy_qc_equality().unwrap();
        let states = toy_states();
        for x in 0..4u64 {
            for y in 0..4u64 {
                let a = &states[x as usize];
                let b = &states[y as usize];
                let overlap = (a[0].conj() * b[0] + a[1].conj() * b[1]).norm_sqr();
                assert!((exact_acceptance(&f.protocol, &x, &y).unwrap() - overlap).abs() <= 1e-12);
            }
        }
        assert!((f.worst_case_error().unwrap() - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn public_variant_conditions_on_the_coin() {
        let f = toy_qc_equality_public().unwrap();
        let plain = toy_qc_equality().unwrap();
        for x in 0..4u64 {
            for y in 0..4u64 {
                // Both coin values give the same acceptance, and the
                // orthogonal index contributes zero.
                let want = 0.8 * exact_acceptance(&plain.protocol, &x, &y).unwrap()
                    + 0.2 * exact_acceptance(&plain.protocol, &x, &(y ^ 2)).unwrap();
                assert!((exact_acceptance(&f.protocol, &x, &y).unwrap() - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn hidden_matching_verification_is_exact() {
        let f = hidden_matching_verification(4).unwrap();
        assert_eq!(f.function.domain().count(), 16 * 3 * 2);
        assert!(f.worst_case_error().unwrap() <= 1e-12);
        assert_eq!(f.protocol.bob_bits(), 4);
    }

    #[test]
    fn random_fixture_is_seeded() {
        let a = random_qc_fixture(3, 2, 2, 2).unwrap();
        let b = random_qc_fixture(3, 2, 2, 2).unwrap();
        for x in 0..4u64 {
            for y in 0..4u64 {
                assert_eq!(
                    exact_acceptance(&a.protocol, &x, &y).unwrap(),
                    exact_acceptance(&b.protocol, &x, &y).unwrap()
                );
            }
        }
    }
}

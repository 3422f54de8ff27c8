use std::fmt::Write as _;

use num_traits::Float;

use super::{Result, TransformError};
use crate::bits::{BitReader, BitString};
use crate::qcore::{
    acceptance_probability, average_observable_with, maximally_mixed_with, CMatrix, DensityMatrix, MeasurementOperator,
    Observable, QcoreError, Tolerances, C64,
};

/// Parameters shared by the sender and the replaying receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnConfig {
    pub tolerances: Tolerances,
    /// Largest `r q` chosen by [`default_copies`].
    pub qubit_budget: u32,
    /// Fail on a bad step whose band carries no weight. Otherwise the entry
    /// is still recorded and the hypothesis is left unchanged; the replay
    /// makes the same choice.
    pub strict_projection: bool,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self { tolerances: Tolerances::default(), qubit_budget: 10, strict_projection: false }
    }
}

/// `max(2, ⌈8 ln(max(q, 2)) / δ²⌉)`, capped so that `r q` stays within the
/// qubit budget (never below one copy).
pub fn default_copies(q: u32, delta: f64, qubit_budget: u32) -> usize {
    let wanted = (8.0 * (q.max(2) as f64).ln() / (delta * delta)).ceil().max(2.0) as usize;
    let cap = (qubit_budget / q.max(1)).max(1) as usize;
    wanted.min(cap)
}

/// `t = ⌈(K + 1) / log₂(1/η)⌉ + 1` with `η = 1 - δ/4`.
pub fn bad_count_bound(k: u32, delta: f64) -> u64 {
    let eta = 1.0 - delta / 4.0;
    ((k as f64 + 1.0) / (1.0 / eta).log2()).ceil() as u64 + 1
}

/// Bits used for a truncated probability: `⌈log₂(8/δ)⌉ + 3`.
pub fn index_bits(delta: f64) -> usize {
    (8.0 / delta).log2().ceil() as usize + 3
}

fn step(delta: f64) -> f64 {
    delta / 8.0
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(TransformError::InvalidParameter(format!("delta = {delta} must lie in (0, 1/2)")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LearnEntry {
    pub b: u64,
    /// `p̃_b = min(1, index · δ/8)`.
    pub index: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnRecord {
    q: u32,
    c: usize,
    r: usize,
    delta: f64,
    entries: Vec<LearnEntry>,
}

const HEADER_BITS: usize = 8 + 8 + 16 + 64 + 16 + 32;

impl LearnRecord {
    pub fn new(q: u32, c: usize, r: usize, delta: f64, entries: Vec<LearnEntry>) -> Result<Self> {
        check_delta(delta)?;
        if q == 0 || q > 255 || c > 63 || r == 0 || r > u16::MAX as usize {
            return Err(TransformError::InvalidParameter(format!("header out of range: q={q} c={c} r={r}")));
        }
        let limit = 1u64 << index_bits(delta);
        for pair in entries.windows(2) {
            if pair[0].b >= pair[1].b {
                return Err(TransformError::Divergence(format!("entries not increasing at b = {}", pair[1].b)));
            }
        }
        if let Some(e) = entries.iter().find(|e| e.b >= 1u64 << c || e.index >= limit) {
            return Err(TransformError::Divergence(format!("entry ({}, {}) out of range", e.b, e.index)));
        }
        Ok(Self { q, c, r, delta, entries })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn entries(&self) -> &[LearnEntry] {
        &self.entries
    }

    pub fn p_tilde(&self, entry: &LearnEntry) -> f64 {
        (entry.index as f64 * step(self.delta)).min(1.0)
    }

    /// `|entries| · (c + ⌈log₂(8/δ)⌉ + 3)`.
    pub fn payload_bits(&self) -> usize {
        self.entries.len() * (self.c + index_bits(self.delta))
    }

    /// Entries only; the receiver knows `q, c, r, δ` from the protocol.
    pub fn encode_payload(&self) -> BitString {
        let ib = index_bits(self.delta);
        let mut out = BitString::new();
        for e in &self.entries {
            out.push_u64(e.b, self.c);
            out.push_u64(e.index, ib);
        }
        out
    }

    pub fn decode_payload(bits: &BitString, q: u32, c: usize, r: usize, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        let width = c + index_bits(delta);
        if !bits.len().is_multiple_of(width) {
            return Err(TransformError::Format(format!("{} payload bits is not a multiple of {width}", bits.len())));
        }
        let mut reader = bits.reader();
        let mut entries = Vec::with_capacity(bits.len() / width);
        while reader.remaining() > 0 {
            let b = take(&mut reader, c)?;
            let index = take(&mut reader, index_bits(delta))?;
            entries.push(LearnEntry { b, index });
        }
        Self::new(q, c, r, delta, entries)
    }

    /// Self-describing container: `q` (8 bits), `c` (8), `r` (16), `δ` as
    /// `mantissa · 2^exponent` (64 + 16), entry count (32), then the payload.
    pub fn encode(&self) -> BitString {
        let (mantissa, exponent, _) = self.delta.integer_decode();
        let mut out = BitString::new();
        out.push_u64(self.q as u64, 8);
        out.push_u64(self.c as u64, 8);
        out.push_u64(self.r as u64, 16);
        out.push_u64(mantissa, 64);
        out.push_u64(exponent as u16 as u64, 16);
        out.push_u64(self.entries.len() as u64, 32);
        out.extend(&self.encode_payload());
        out
    }

    pub fn decode(bits: &BitString) -> Result<Self> {
        if bits.len() < HEADER_BITS {
            return Err(TransformError::Format("record shorter than its header".into()));
        }
        let mut reader = bits.reader();
        let q = take(&mut reader, 8)? as u32;
        let c = take(&mut reader, 8)? as usize;
        let r = take(&mut reader, 16)? as usize;
        let mantissa = take(&mut reader, 64)?;
        let exponent = take(&mut reader, 16)? as u16 as i16;
        let count = take(&mut reader, 32)? as usize;
        let delta = mantissa as f64 * (exponent as f64).exp2();
        let payload = bits.slice(HEADER_BITS, bits.len() - HEADER_BITS);
        let rec = Self::decode_payload(&payload, q, c, r, delta)?;
        if rec.entries.len() != count {
            return Err(TransformError::Format(format!(
                "header says {count} entries, payload has {}",
                rec.entries.len()
            )));
        }
        Ok(rec)
    }

    pub fn to_text(&self) -> String {
        let mut s =
            format!("q={} c={} r={} delta={} entries={}\n", self.q, self.c, self.r, self.delta, self.entries.len());
        for e in &self.entries {
            let _ = writeln!(s, "{:0width$b} {} {}", e.b, e.index, self.p_tilde(e), width = self.c);
        }
        s
    }
}

fn take(reader: &mut BitReader<'_>, len: usize) -> Result<u64> {
    reader.read(len).ok_or_else(|| TransformError::Format("truncated record".into()))
}

/// What happened at one index `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnStep {
    pub b: u64,
    /// `p_b = Tr(E_b rho)`.
    pub p: f64,
    /// `Tr(F_b rho_b)`.
    pub predicted: f64,
    pub bad: bool,
    /// `Tr(M_b rho_b)` at a bad step.
    pub band_weight: Option<f64>,
    /// An eigenvalue of `F_b` lies within the edge margin of the band.
    pub near_band_edge: bool,
    /// The band carried no weight and the hypothesis was kept.
    pub update_skipped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnOutcome {
    pub record: LearnRecord,
    pub steps: Vec<LearnStep>,
}

impl LearnOutcome {
    pub fn bad_count(&self) -> usize {
        self.record.entries.len()
    }

    /// Largest `Tr(M_b rho_b)` over bad steps.
    pub fn max_band_weight(&self) -> Option<f64> {
        self.steps.iter().filter_map(|s| s.band_weight).reduce(f64::max)
    }
}

fn family_bits(family: &[MeasurementOperator]) -> Result<usize> {
    let n = family.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(TransformError::InvalidParameter(format!("family size {n} is not a power of 2")));
    }
    Ok(n.trailing_zeros() as usize)
}

fn check_sizes(q: u32, family: &[MeasurementOperator], r: usize, cfg: &LearnConfig) -> Result<usize> {
    let c = family_bits(family)?;
    if let Some(e) = family.iter().find(|e| e.dim() != 1usize << q) {
        return Err(TransformError::InvalidParameter(format!("operator of dim {} for {q} qubits", e.dim())));
    }
    if r == 0 {
        return Err(TransformError::InvalidParameter("r must be >= 1".into()));
    }
    let k = q as usize * r;
    if k > cfg.tolerances.max_qubits as usize {
        return Err(QcoreError::CapExceeded { qubits: k as u32, cap: cfg.tolerances.max_qubits }.into());
    }
    Ok(c)
}

fn observable(e: &MeasurementOperator, r: usize, cfg: &LearnConfig) -> Result<Observable> {
    Ok(average_observable_with(e, r, &cfg.tolerances)?)
}

/// `V^dagger rho V` in the eigenbasis of `f`; the maximally mixed state is
/// invariant and needs no rotation.
fn rotate(f: &Observable, hypothesis: &DensityMatrix, mixed: bool) -> CMatrix {
    if mixed {
        let dim = hypothesis.dim();
        CMatrix::identity(dim, dim) / C64::from(dim as f64)
    } else {
        f.to_eigenbasis(hypothesis.matrix())
    }
}

/// Project onto the band, or keep the hypothesis when the band is empty
/// and the configuration allows it. Returns the band weight and whether the
/// update was skipped.
fn band_update(
    f: &Observable,
    rotated: CMatrix,
    hypothesis: &mut DensityMatrix,
    b: u64,
    center: f64,
    halfwidth: f64,
    cfg: &LearnConfig,
) -> Result<(f64, bool)> {
    let tol = &cfg.tolerances;
    match f.project_band_rotated(rotated, center, halfwidth, tol.band_pad, tol.zero_projection) {
        Ok((next, weight)) => {
            *hypothesis = next;
            Ok((weight, false))
        }
        Err(QcoreError::VanishingProjection(weight)) if !cfg.strict_projection => Ok((weight.max(0.0), true)),
        Err(QcoreError::VanishingProjection(weight)) => Err(TransformError::VanishingProjection { b, weight }),
        Err(other) => Err(other.into()),
    }
}

/// Alice's side: walk `b = 0, 1, ...` keeping a hypothesis state on `r q`
/// qubits, starting from the maximally mixed state, and record every `b`
/// whose prediction `Tr(F_b rho_b)` misses `p_b` by more than `δ`.
pub fn learn_state_message(
    rho: &DensityMatrix,
    family: &[MeasurementOperator],
    delta: f64,
    r: usize,
) -> Result<LearnOutcome> {
    learn_state_message_with(rho, family, delta, r, &LearnConfig::default())
}

pub fn learn_state_message_with(
    rho: &DensityMatrix,
    family: &[MeasurementOperator],
    delta: f64,
    r: usize,
    cfg: &LearnConfig,
) -> Result<LearnOutcome> {
    check_delta(delta)?;
    let q = rho.qubits();
    let c = check_sizes(q, family, r, cfg)?;
    let tol = &cfg.tolerances;
    let mut hypothesis = maximally_mixed_with(q * r as u32, tol)?;
    let mut mixed = true;
    let mut entries = Vec::new();
    let mut steps = Vec::with_capacity(family.len());
    for (b, e) in family.iter().enumerate() {
        let b = b as u64;
        let p = acceptance_probability(e, rho)?;
        let f = observable(e, r, cfg)?;
        let predicted = f.expectation(&hypothesis);
        if (predicted - p).abs() <= delta {
            steps.push(LearnStep {
                b,
                p,
                predicted,
                bad: false,
                band_weight: None,
                near_band_edge: false,
                update_skipped: false,
            });
            continue;
        }
        let index = (p / step(delta)).round() as u64;
        let entry = LearnEntry { b, index };
        let center = (index as f64 * step(delta)).min(1.0);
        let rotated = rotate(&f, &hypothesis, mixed);
        let (weight, skipped) = band_update(&f, rotated, &mut hypothesis, b, center, delta / 2.0, cfg)?;
        mixed &= skipped;
        steps.push(LearnStep {
            b,
            p,
            predicted,
            bad: true,
            band_weight: Some(weight),
            near_band_edge: f.near_band_edge(center, delta / 2.0, tol.band_edge_warning),
            update_skipped: skipped,
        });
        entries.push(entry);
    }
    let record = LearnRecord::new(q, c, r, delta, entries)?;
    Ok(LearnOutcome { record, steps })
}

/// Bob's side: replay the hypothesis sequence from the record alone and
/// return `p'_b` for every `b`.
pub fn reconstruct_estimates(rec: &LearnRecord, family: &[MeasurementOperator], q: u32) -> Result<Vec<f64>> {
    reconstruct_estimates_with(rec, family, q, &LearnConfig::default())
}

pub fn reconstruct_estimates_with(
    rec: &LearnRecord,
    family: &[MeasurementOperator],
    q: u32,
    cfg: &LearnConfig,
) -> Result<Vec<f64>> {
    let c = check_sizes(q, family, rec.r, cfg)?;
    if q != rec.q || c != rec.c {
        return Err(TransformError::Divergence(format!(
            "record is for q={}, c={} but the family has q={q}, c={c}",
            rec.q, rec.c
        )));
    }
    let delta = rec.delta;
    let r = rec.r;
    let mut hypothesis = maximally_mixed_with(q * r as u32, &cfg.tolerances)?;
    let mut mixed = true;
    let mut pending = rec.entries.iter().peekable();
    let mut estimates = Vec::with_capacity(family.len());
    for (b, e) in family.iter().enumerate() {
        let b = b as u64;
        let f = observable(e, r, cfg)?;
        let predicted = f.expectation(&hypothesis);
        match pending.peek() {
            Some(entry) if entry.b == b => {
                let p_tilde = rec.p_tilde(entry);
                // A bad step has |predicted - p| > δ and |p - p̃| <= δ/16.
                if (predicted - p_tilde).abs() <= delta - delta / 16.0 {
                    return Err(TransformError::Divergence(format!("recorded b = {b} replays as good")));
                }
                let rotated = rotate(&f, &hypothesis, mixed);
                let (_, skipped) = band_update(&f, rotated, &mut hypothesis, b, p_tilde, delta / 2.0, cfg)?;
                mixed &= skipped;
                estimates.push(p_tilde);
                pending.next();
            }
            _ => estimates.push(predicted.clamp(0.0, 1.0)),
        }
    }
    if let Some(entry) = pending.next() {
        return Err(TransformError::Divergence(format!("record names b = {} beyond the family", entry.b)));
    }
    Ok(estimates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::random::{random_density, random_measurement};
    use crate::qcore::{CMatrix, C64};
    use crate::rng::stream_rng;
    use proptest::prelude::*;

    fn basis_family() -> Vec<MeasurementOperator> {
        vec![MeasurementOperator::diagonal(&[1.0, 0.0]).unwrap(), MeasurementOperator::diagonal(&[0.0, 1.0]).unwrap()]
    }

    #[test]
    fn bound_values() {
        assert_eq!(bad_count_bound(4, 0.1), 138);
        assert_eq!(bad_count_bound(1, 0.5 - 1e-12), 12);
        for k in 1..20 {
            assert!(bad_count_bound(k + 1, 0.1) >= bad_count_bound(k, 0.1));
            assert!(bad_count_bound(k, 0.2) <= bad_count_bound(k, 0.1));
        }
    }

    #[test]
    fn copies_policy() {
        assert_eq!(default_copies(1, 0.1, 1000), 555);
        assert_eq!(default_copies(1, 0.1, 100), 100);
        assert_eq!(default_copies(2, 0.1, 10), 5);
        assert_eq!(default_copies(1, 0.1, 10), 10);
        assert_eq!(default_copies(8, 0.45, 1000), 83);
        assert_eq!(index_bits(0.1), 10);
        assert_eq!(index_bits(0.125), 9);
    }

    #[test]
    fn trivial_families_give_empty_records() {
        let rho = random_density(1, &mut stream_rng(1, 0));
        for family in [vec![MeasurementOperator::identity(2); 4], vec![MeasurementOperator::zero(2); 4]] {
            let out = learn_state_message(&rho, &family, 0.1, 3).unwrap();
            assert!(out.record.entries().is_empty());
            let est = reconstruct_estimates(&out.record, &family, 1).unwrap();
            let want = acceptance_probability(&family[0], &rho).unwrap();
            assert!(est.iter().all(|&p| (p - want).abs() <= 1e-12));
        }
    }

    #[test]
    fn basis_state_example() {
        let rho = DensityMatrix::basis_state(1, 0).unwrap();
        let family = basis_family();
        let out = learn_state_message(&rho, &family, 0.1, 2).unwrap();
        // b = 0 is bad at the mixed state; projecting onto |00> leaves a
        // hypothesis that already predicts p_1 = 0, so b = 1 is good.
        assert_eq!(out.bad_count(), 1);
        assert!((out.steps[0].predicted - 0.5).abs() <= 1e-12);
        assert!(out.steps[1].predicted.abs() <= 1e-12 && !out.steps[1].bad);
        let rec = &out.record;
        assert_eq!(rec.entries(), &[LearnEntry { b: 0, index: 80 }]);
        assert_eq!(rec.p_tilde(&rec.entries()[0]), 1.0);
        let est = reconstruct_estimates(rec, &family, 1).unwrap();
        assert!((est[0] - 1.0).abs() <= 1e-12 && est[1].abs() <= 1e-12);
        assert_eq!(rec.payload_bits(), 1 + 10);
    }

    /// Independent check of the first bad step at dim 4: build the band
    /// projector densely from explicit eigenvectors of `F = (E⊗I + I⊗E)/2`.
    #[test]
    fn first_step_matches_dense_construction() {
        let e = basis_family().remove(0);
        let f = CMatrix::from_fn(4, 4, |i, j| {
            if i != j {
                return C64::from(0.0);
            }
            let bits = [(i >> 1) & 1, i & 1];
            C64::from(bits.iter().filter(|&&bit| bit == 0).count() as f64 / 2.0)
        });
        // p̃ = 1, band [0.95, 1.05] keeps only |00>.
        let m = CMatrix::from_fn(4, 4, |i, j| C64::from(if i == 0 && j == 0 { 1.0 } else { 0.0 }));
        let mixed = CMatrix::identity(4, 4) / C64::from(4.0);
        assert!(((&f * &mixed).trace().re - 0.5).abs() <= 1e-12);
        assert!(((&m * &mixed).trace().re - 0.25).abs() <= 1e-12);
        let rho = DensityMatrix::basis_state(1, 0).unwrap();
        let out = learn_state_message(&rho, &[e.clone(), e], 0.1, 2).unwrap();
        assert!((out.steps[0].band_weight.unwrap() - 0.25).abs() <= 1e-12);
        // After projecting onto |00>, the second identical query is good.
        assert!(!out.steps[1].bad);
        assert!((out.steps[1].predicted - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn containers_round_trip() {
        let rho = random_density(2, &mut stream_rng(4, 0));
        let mut rng = stream_rng(4, 1);
        let family: Vec<_> = (0..8).map(|_| random_measurement(2, &mut rng)).collect();
        let out = learn_state_message(&rho, &family, 0.1, 2).unwrap();
        let rec = &out.record;
        let full = rec.encode();
        assert_eq!(full.len(), HEADER_BITS + rec.payload_bits());
        assert_eq!(&LearnRecord::decode(&full).unwrap(), rec);
        let payload = rec.encode_payload();
        assert_eq!(payload.len(), rec.payload_bits());
        assert_eq!(&LearnRecord::decode_payload(&payload, 2, 3, 2, 0.1).unwrap(), rec);
        assert!(rec.to_text().starts_with("q=2 c=3 r=2 delta=0.1"));
    }

    #[test]
    fn replay_detects_tampering() {
        let rho = DensityMatrix::basis_state(1, 0).unwrap();
        let family = basis_family();
        // b = 0 is bad; claiming p̃ = 0.5 makes it replay as good.
        let fake = LearnRecord::new(1, 1, 2, 0.1, vec![LearnEntry { b: 0, index: 40 }]).unwrap();
        assert!(matches!(reconstruct_estimates(&fake, &family, 1), Err(TransformError::Divergence(_))));
        assert!(
            LearnRecord::new(1, 1, 2, 0.1, vec![LearnEntry { b: 1, index: 0 }, LearnEntry { b: 0, index: 0 }]).is_err()
        );
        assert!(LearnRecord::new(1, 1, 2, 0.1, vec![LearnEntry { b: 2, index: 0 }]).is_err());
        let out = learn_state_message(&rho, &family, 0.1, 2).unwrap();
        assert!(reconstruct_estimates(&out.record, &family[..1], 1).is_err());
    }

    #[test]
    fn empty_band_keeps_the_hypothesis() {
        // p = 0.7 but E has eigenvalues 0.9 and 0.1 only, so at r = 1 the
        // band [0.65, 0.75] is empty.
        let rho = DensityMatrix::new(CMatrix::from_fn(2, 2, |i, j| {
            C64::from(if i != j {
                0.0
            } else if i == 0 {
                0.75
            } else {
                0.25
            })
        }))
        .unwrap();
        let e = MeasurementOperator::diagonal(&[0.9, 0.1]).unwrap();
        let family = vec![e.clone(), e];
        let out = learn_state_message(&rho, &family, 0.1, 1).unwrap();
        assert_eq!(out.bad_count(), 2);
        assert!(out.steps.iter().all(|s| s.update_skipped && s.band_weight == Some(0.0)));
        let est = reconstruct_estimates(&out.record, &family, 1).unwrap();
        assert!(est.iter().all(|&p| (p - 0.7).abs() <= 1e-12));
        let strict = LearnConfig { strict_projection: true, ..LearnConfig::default() };
        assert!(matches!(
            learn_state_message_with(&rho, &family, 0.1, 1, &strict),
            Err(TransformError::VanishingProjection { b: 0, .. })
        ));
    }

    #[test]
    fn rejects_bad_parameters() {
        let rho = DensityMatrix::basis_state(1, 0).unwrap();
        let family = basis_family();
        assert!(learn_state_message(&rho, &family, 0.5, 2).is_err());
        assert!(learn_state_message(&rho, &family, 0.1, 0).is_err());
        assert!(matches!(
            learn_state_message(&rho, &family, 0.1, 13),
            Err(TransformError::Qcore(QcoreError::CapExceeded { .. }))
        ));
        assert!(learn_state_message(&rho, &vec![family[0].clone(); 3], 0.1, 2).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn round_trip_within_delta(seed in any::<u64>(), q in 1u32..=2, c in 1usize..=3, r in 1usize..=3) {
            let mut rng = stream_rng(seed, 0);
            let rho = random_density(q, &mut rng);
            let family: Vec<_> = (0..1usize << c).map(|_| random_measurement(q, &mut rng)).collect();
            let out = learn_state_message(&rho, &family, 0.1, r).unwrap();
            let est = reconstruct_estimates(&out.record, &family, q).unwrap();
            let eta = 1.0 - 0.1 / 4.0;
            for (b, e) in family.iter().enumerate() {
                let p = acceptance_probability(e, &rho).unwrap();
                prop_assert!((est[b] - p).abs() <= 0.1 + 1e-12);
            }
            for s in &out.steps {
                if let Some(w) = s.band_weight {
                    prop_assert!(w <= eta + 1e-6);
                }
            }
        }
    }
}

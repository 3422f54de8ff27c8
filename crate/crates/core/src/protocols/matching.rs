use std::collections::HashMap;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::bits::{ceil_log2, BitString};
use crate::qcore::C64;
use crate::rng::stream_rng;
use crate::smp::{
    AliceMessage, CoinMode, Cost, Dist, MessageCost, QuantumMessage, Received, Result, SmpError, SmpProtocol,
};

/// Bob's half of a matching instance: a perfect matching of `[n]` and one
/// bit per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BobMatching {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub w: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingInstance {
    pub x: Vec<bool>,
    pub bob: BobMatching,
}

impl MatchingInstance {
    pub fn new(x: Vec<bool>, edges: Vec<(usize, usize)>, w: Vec<bool>) -> Result<Self> {
        let n = x.len();
        if n == 0 || !n.is_multiple_of(2) {
            return Err(SmpError::InvalidParameter(format!("n = {n} must be positive and even")));
        }
        if edges.len() != n / 2 || w.len() != n / 2 {
            return Err(SmpError::InvalidParameter("need n/2 edges and n/2 bits of w".into()));
        }
        let mut seen = vec![false; n];
        for &(i, j) in &edges {
            if i >= n || j >= n || i == j || seen[i] || seen[j] {
                return Err(SmpError::InvalidParameter(format!("({i}, {j}) breaks the perfect matching")));
            }
            seen[i] = true;
            seen[j] = true;
        }
        Ok(Self { x, bob: BobMatching { n, edges, w } })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// `Mx`: the parity of `x` along each edge.
    pub fn mx(&self) -> Vec<bool> {
        self.bob.edges.iter().map(|&(i, j)| self.x[i] ^ self.x[j]).collect()
    }

    pub fn distance(&self) -> usize {
        self.mx().iter().zip(&self.bob.w).filter(|(a, b)| a != b).count()
    }

    /// The same instance after renaming index `i` to `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        if perm.len() != n {
            return Err(SmpError::InvalidParameter("permutation length differs from n".into()));
        }
        let mut x = vec![false; n];
        for (i, &p) in perm.iter().enumerate() {
            x[p] = self.x[i];
        }
        let edges = self.bob.edges.iter().map(|&(i, j)| (perm[i], perm[j])).collect();
        Self::new(x, edges, self.bob.w.clone())
    }
}

/// 1 iff `d(w, Mx) <= n/6`; an error when `n/6 < d < n/3`.
pub fn matching_value(inst: &MatchingInstance) -> Result<bool> {
    let n = inst.n();
    let d = inst.distance();
    if 6 * d <= n {
        Ok(true)
    } else if 3 * d >= n {
        Ok(false)
    } else {
        Err(SmpError::Protocol(format!("promise violated: distance {d} with n = {n}")))
    }
}

/// Random `x` and matching, then `w = Mx` with a uniformly chosen number of
/// flips from the range allowed for `value`.
pub fn random_promise_instance<R: Rng + ?Sized>(n: usize, value: bool, rng: &mut R) -> Result<MatchingInstance> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(SmpError::InvalidParameter(format!("n = {n} must be even and at least 2")));
    }
    let x: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = perm.chunks(2).map(|p| (p[0].min(p[1]), p[0].max(p[1]))).collect();
    edges.sort_unstable();
    let half = n / 2;
    let (lo, hi) = if value { (0, n / 6) } else { (n.div_ceil(3), half) };
    let d = rng.random_range(lo..=hi);
    let mut w: Vec<bool> = edges.iter().map(|&(i, j)| x[i] ^ x[j]).collect();
    for e in index::sample(rng, half, d) {
        w[e] = !w[e];
    }
    MatchingInstance::new(x, edges, w)
}

/// The random subset `S` selected by the shared coin, in increasing order.
pub fn shared_subset(n: usize, size: usize, coin: u64) -> Vec<usize> {
    let mut s = index::sample(&mut stream_rng(coin, 0), n, size.min(n)).into_vec();
    s.sort_unstable();
    s
}

/// Edges of Bob's matching inside `S`, as position pairs within `S`, in
/// matching order, with their `w` bits.
fn edges_inside(bob: &BobMatching, subset: &[usize]) -> Vec<(usize, usize, bool)> {
    let mut pos = vec![usize::MAX; bob.n];
    for (p, &i) in subset.iter().enumerate() {
        pos[i] = p;
    }
    bob.edges
        .iter()
        .zip(&bob.w)
        .filter(|((i, j), _)| pos[*i] != usize::MAX && pos[*j] != usize::MAX)
        .map(|(&(i, j), &w)| (pos[i], pos[j], w))
        .collect()
}

#[derive(Debug, Clone)]
struct EdgeCodec {
    count_bits: usize,
    pos_bits: usize,
    max_edges: usize,
}

impl EdgeCodec {
    fn new(subset_size: usize, max_edges: usize) -> Self {
        Self { count_bits: ceil_log2(max_edges as u64 + 1), pos_bits: ceil_log2(subset_size as u64), max_edges }
    }

    fn max_len(&self) -> usize {
        self.count_bits + self.max_edges * (2 * self.pos_bits + 1)
    }

    fn encode(&self, edges: &[(usize, usize, bool)]) -> BitString {
        let kept = &edges[..edges.len().min(self.max_edges)];
        let mut m = BitString::from_u64(kept.len() as u64, self.count_bits);
        for &(i, j, w) in kept {
            m.push_u64(i as u64, self.pos_bits);
            m.push_u64(j as u64, self.pos_bits);
            m.push(w);
        }
        m
    }

    fn decode(&self, m: &BitString, subset_size: usize) -> Result<Vec<(usize, usize, bool)>> {
        let bad = || SmpError::InvalidMessage("malformed edge list".into());
        let mut r = m.reader();
        let count = r.read(self.count_bits).ok_or_else(bad)? as usize;
        if count > self.max_edges {
            return Err(bad());
        }
        let mut edges = Vec::with_capacity(count);
        for _ in 0..count {
            let i = r.read(self.pos_bits).ok_or_else(bad)? as usize;
            let j = r.read(self.pos_bits).ok_or_else(bad)? as usize;
            let w = r.read(1).ok_or_else(bad)? == 1;
            if i >= subset_size || j >= subset_size || i == j {
                return Err(bad());
            }
            edges.push((i, j, w));
        }
        if r.remaining() != 0 {
            return Err(bad());
        }
        Ok(edges)
    }
}

/// Majority of agreements; ties (including no recovered edge) are a fair coin.
fn majority(agree: usize, disagree: usize) -> f64 {
    match agree.cmp(&disagree) {
        std::cmp::Ordering::Greater => 1.0,
        std::cmp::Ordering::Less => 0.0,
        std::cmp::Ordering::Equal => 0.5,
    }
}

/// Probability that projecting a normalised state onto `span{|i>,|j>}`
/// succeeds.
pub fn edge_projection_probability(amplitudes: &[C64], i: usize, j: usize) -> f64 {
    amplitudes[i].norm_sqr() + amplitudes[j].norm_sqr()
}

/// Outcome probabilities of the `{(|i> ± |j>)/√2}` measurement after a
/// successful projection, as `(parity 0, parity 1)`.
pub fn edge_parity_distribution(amplitudes: &[C64], i: usize, j: usize) -> (f64, f64) {
    let p = edge_projection_probability(amplitudes, i, j);
    let plus = (amplitudes[i] + amplitudes[j]).norm_sqr() / 2.0;
    let minus = (amplitudes[i] - amplitudes[j]).norm_sqr() / 2.0;
    (plus / p, minus / p)
}

/// Exact acceptance of the matching referee on `copies` copies of a pure
/// state. Each copy is measured with the two-dimensional projectors of all
/// still unused received edges plus their complement; a hit on edge `e`
/// marks it used and is followed by the parity measurement.
pub fn matching_referee_acceptance(amplitudes: &[C64], copies: usize, edges: &[(usize, usize, bool)]) -> Result<f64> {
    if edges.len() > 63 {
        return Err(SmpError::InvalidParameter("at most 63 edges per referee".into()));
    }
    struct Ctx<'a> {
        hit: Vec<f64>,
        agree: Vec<f64>,
        memo: HashMap<(usize, u64, usize, usize), f64>,
        edges: &'a [(usize, usize, bool)],
    }
    fn go(ctx: &mut Ctx<'_>, left: usize, used: u64, agree: usize, disagree: usize) -> f64 {
        if left == 0 {
            return majority(agree, disagree);
        }
        if let Some(&v) = ctx.memo.get(&(left, used, agree, disagree)) {
            return v;
        }
        let mut total = 0.0;
        let mut miss = 1.0;
        for e in 0..ctx.edges.len() {
            if used >> e & 1 == 1 {
                continue;
            }
            let (hit, ok) = (ctx.hit[e], ctx.agree[e]);
            miss -= hit;
            let next = used | 1 << e;
            if ok > 0.0 {
                total += hit * ok * go(ctx, left - 1, next, agree + 1, disagree);
            }
            if ok < 1.0 {
                total += hit * (1.0 - ok) * go(ctx, left - 1, next, agree, disagree + 1);
            }
        }
        total += miss.max(0.0) * go(ctx, left - 1, used, agree, disagree);
        ctx.memo.insert((left, used, agree, disagree), total);
        total
    }
    let mut hit = Vec::with_capacity(edges.len());
    let mut agree = Vec::with_capacity(edges.len());
    for &(i, j, w) in edges {
        let p = edge_projection_probability(amplitudes, i, j);
        hit.push(p);
        if p <= 0.0 {
            agree.push(0.0);
            continue;
        }
        let (p0, p1) = edge_parity_distribution(amplitudes, i, j);
        agree.push(if w { p1 } else { p0 });
    }
    let mut ctx = Ctx { hit, agree, memo: HashMap::new(), edges };
    Ok(go(&mut ctx, copies, 0, 0, 0).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchingQcParams {
    pub subset_size: usize,
    pub copies: usize,
    pub edges_sent: usize,
}

/// Smallest `s` with `s^3 >= v`.
fn ceil_cbrt(v: u64) -> usize {
    let mut s = (v as f64).cbrt().floor() as u64;
    while s * s * s < v {
        s += 1;
    }
    while s > 0 && (s - 1) * (s - 1) * (s - 1) >= v {
        s -= 1;
    }
    s as usize
}

impl MatchingQcParams {
    /// `|S| = ⌈n^{2/3}⌉`, `⌈n^{1/3}⌉` copies and edges.
    pub fn defaults(n: usize) -> Self {
        let n64 = n as u64;
        Self { subset_size: ceil_cbrt(n64 * n64).min(n), copies: ceil_cbrt(n64), edges_sent: ceil_cbrt(n64) }
    }
}

/// Public-coin quantum-classical protocol for the matching problem: the coin
/// picks `S`; Alice sends copies of the uniform superposition over `S` with
/// phases `(-1)^{x_i}`; Bob sends the edges of his matching inside `S`.
#[derive(Debug, Clone)]
pub struct MatchingQc {
    n: usize,
    params: MatchingQcParams,
    codec: EdgeCodec,
}

fn check_n(n: usize, subset_size: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(SmpError::InvalidParameter(format!("n = {n} must be a power of 2")));
    }
    if subset_size < 2 || subset_size > n {
        return Err(SmpError::InvalidParameter(format!("subset size {subset_size} outside 2..={n}")));
    }
    Ok(())
}

pub fn matching_qc(n: usize, params: MatchingQcParams) -> Result<MatchingQc> {
    check_n(n, params.subset_size)?;
    if params.copies == 0 || params.edges_sent == 0 || params.edges_sent > 63 {
        return Err(SmpError::InvalidParameter("copies >= 1 and 1 <= edges_sent <= 63 required".into()));
    }
    Ok(MatchingQc { n, params, codec: EdgeCodec::new(params.subset_size, params.edges_sent) })
}

impl MatchingQc {
    pub fn params(&self) -> MatchingQcParams {
        self.params
    }

    /// Number of received edges for this coin; zero means the referee abstains.
    pub fn received_edges(&self, y: &BobMatching, coin: u64) -> usize {
        let s = shared_subset(self.n, self.params.subset_size, coin);
        edges_inside(y, &s).len().min(self.params.edges_sent)
    }
}

impl SmpProtocol for MatchingQc {
    type AliceInput = Vec<bool>;
    type BobInput = BobMatching;

    fn name(&self) -> String {
        let p = self.params;
        format!("matching-qc(n={},S={},copies={},edges={})", self.n, p.subset_size, p.copies, p.edges_sent)
    }

    fn coin_mode(&self) -> CoinMode {
        CoinMode::PublicSeed
    }

    fn cost(&self) -> Cost {
        let q = self.params.copies * ceil_log2(self.params.subset_size as u64);
        Cost { alice: MessageCost::Qubits(q), bob_bits: self.codec.max_len() }
    }

    fn alice(&self, x: &Vec<bool>, coin: u64) -> Result<AliceMessage> {
        if x.len() != self.n {
            return Err(SmpError::InvalidParameter(format!("x has {} bits, expected {}", x.len(), self.n)));
        }
        let s = shared_subset(self.n, self.params.subset_size, coin);
        let a = 1.0 / (s.len() as f64).sqrt();
        let amplitudes = s.iter().map(|&i| C64::from(if x[i] { -a } else { a })).collect();
        Ok(AliceMessage::Quantum(QuantumMessage::PureCopies {
            amplitudes,
            copies: self.params.copies,
            qubits_per_copy: ceil_log2(s.len() as u64),
        }))
    }

    fn bob(&self, y: &BobMatching, coin: u64) -> Result<Dist<BitString>> {
        if y.n != self.n {
            return Err(SmpError::InvalidParameter("matching size differs from n".into()));
        }
        let s = shared_subset(self.n, self.params.subset_size, coin);
        Ok(Dist::point(self.codec.encode(&edges_inside(y, &s))))
    }

    fn referee(&self, alice: Received<'_>, bob: &BitString, _coin: u64) -> Result<f64> {
        let QuantumMessage::PureCopies { amplitudes, copies, .. } = alice.state()? else {
            return Err(SmpError::InvalidMessage("expected copies of a pure state".into()));
        };
        let edges = self.codec.decode(bob, amplitudes.len())?;
        matching_referee_acceptance(amplitudes, *copies, &edges)
    }
}

/// Classical public-coin protocol: Alice sends `x` restricted to `S` and the
/// referee checks each received edge directly.
#[derive(Debug, Clone)]
pub struct MatchingClassical {
    n: usize,
    subset_size: usize,
    codec: EdgeCodec,
}

/// Multiplier of `⌈√n⌉` in the default subset size.
pub const CLASSICAL_SUBSET_FACTOR: usize = 3;

pub fn default_classical_subset(n: usize) -> usize {
    (CLASSICAL_SUBSET_FACTOR * (n as f64).sqrt().ceil() as usize).min(n)
}

pub fn matching_classical(n: usize, subset_size: usize) -> Result<MatchingClassical> {
    check_n(n, subset_size)?;
    Ok(MatchingClassical { n, subset_size, codec: EdgeCodec::new(subset_size, subset_size / 2) })
}

impl MatchingClassical {
    pub fn subset_size(&self) -> usize {
        self.subset_size
    }
}

impl SmpProtocol for MatchingClassical {
    type AliceInput = Vec<bool>;
    type BobInput = BobMatching;

    fn name(&self) -> String {
        format!("matching-classical(n={},S={})", self.n, self.subset_size)
    }

    fn coin_mode(&self) -> CoinMode {
        CoinMode::PublicSeed
    }

    fn cost(&self) -> Cost {
        Cost { alice: MessageCost::Bits(self.subset_size), bob_bits: self.codec.max_len() }
    }

    fn alice(&self, x: &Vec<bool>, coin: u64) -> Result<AliceMessage> {
        if x.len() != self.n {
            return Err(SmpError::InvalidParameter(format!("x has {} bits, expected {}", x.len(), self.n)));
        }
        let s = shared_subset(self.n, self.subset_size, coin);
        Ok(AliceMessage::Classical(Dist::point(BitString::from_bits(s.iter().map(|&i| x[i]).collect()))))
    }

    fn bob(&self, y: &BobMatching, coin: u64) -> Result<Dist<BitString>> {
        if y.n != self.n {
            return Err(SmpError::InvalidParameter("matching size differs from n".into()));
        }
        let s = shared_subset(self.n, self.subset_size, coin);
        Ok(Dist::point(self.codec.encode(&edges_inside(y, &s))))
    }

    fn referee(&self, alice: Received<'_>, bob: &BitString, _coin: u64) -> Result<f64> {
        let xs = alice.bits()?;
        if xs.len() != self.subset_size {
            return Err(SmpError::InvalidMessage("restriction has the wrong length".into()));
        }
        let edges = self.codec.decode(bob, self.subset_size)?;
        let agree = edges.iter().filter(|&&(i, j, w)| (xs.get(i) ^ xs.get(j)) == w).count();
        Ok(majority(agree, edges.len() - agree))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smp::{sampled_acceptance, sampled_success};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn instance(x: &[u8], edges: &[(usize, usize)], w: &[u8]) -> MatchingInstance {
        MatchingInstance::new(x.iter().map(|&b| b == 1).collect(), edges.to_vec(), w.iter().map(|&b| b == 1).collect())
            .unwrap()
    }

    #[test]
    fn value_on_simple_instances() {
        let edges: Vec<(usize, usize)> = (0..6).map(|i| (2 * i, 2 * i + 1)).collect();
        let x = [1, 0, 1, 1, 0, 0, 1, 0, 0, 1, 1, 1];
        let base = instance(&x, &edges, &[0; 6]);
        let mx: Vec<u8> = base.mx().iter().map(|&b| b as u8).collect();
        assert_eq!(mx, vec![1, 0, 0, 1, 1, 0]);
        assert!(matching_value(&instance(&x, &edges, &mx)).unwrap());
        let comp: Vec<u8> = mx.iter().map(|b| 1 - b).collect();
        assert!(!matching_value(&instance(&x, &edges, &comp)).unwrap());
        let mut two = mx.clone();
        two[0] ^= 1;
        two[3] ^= 1;
        assert!(matching_value(&instance(&x, &edges, &two)).unwrap());
    }

    #[test]
    fn promise_gap_is_an_error() {
        let edges: Vec<(usize, usize)> = (0..9).map(|i| (2 * i, 2 * i + 1)).collect();
        // n = 18: distance 4 lies strictly between 3 and 6.
        let w = [1, 1, 1, 1, 0, 0, 0, 0, 0];
        assert!(matching_value(&instance(&[0; 18], &edges, &w)).is_err());
    }

    #[test]
    fn rejects_non_matchings() {
        assert!(MatchingInstance::new(vec![false; 4], vec![(0, 1), (1, 2)], vec![false; 2]).is_err());
        assert!(MatchingInstance::new(vec![false; 3], vec![(0, 1)], vec![false]).is_err());
    }

    #[test]
    fn random_instances_keep_the_promise_and_relabeling_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for t in 0..200 {
            let value = t % 2 == 0;
            let inst = random_promise_instance(24, value, &mut rng).unwrap();
            assert_eq!(matching_value(&inst).unwrap(), value);
            let mut perm: Vec<usize> = (0..24).collect();
            perm.shuffle(&mut rng);
            assert_eq!(matching_value(&inst.relabel(&perm).unwrap()).unwrap(), value);
        }
    }

    #[test]
    fn edge_projection_and_parity() {
        let s = 8usize;
        let a = 1.0 / (s as f64).sqrt();
        let x = [0, 1, 1, 0, 0, 0, 1, 1];
        let amps: Vec<C64> = x.iter().map(|&b| C64::from(if b == 1 { -a } else { a })).collect();
        for i in 0..s {
            for j in 0..s {
                if i == j {
                    continue;
                }
                assert!((edge_projection_probability(&amps, i, j) - 2.0 / s as f64).abs() <= 1e-12);
                let (p0, p1) = edge_parity_distribution(&amps, i, j);
                let parity = x[i] ^ x[j];
                assert!(((if parity == 0 { p0 } else { p1 }) - 1.0).abs() <= 1e-12);
            }
        }
    }

    /// Brute-force referee over every sequence of per-copy outcomes.
    fn referee_by_paths(amps: &[C64], copies: usize, edges: &[(usize, usize, bool)]) -> f64 {
        fn walk(
            amps: &[C64],
            left: usize,
            edges: &[(usize, usize, bool)],
            used: &mut Vec<bool>,
            votes: (i32, i32),
        ) -> f64 {
            if left == 0 {
                return if votes.0 > votes.1 {
                    1.0
                } else if votes.0 < votes.1 {
                    0.0
                } else {
                    0.5
                };
            }
            let mut total = 0.0;
            let mut miss = 1.0;
            for e in 0..edges.len() {
                if used[e] {
                    continue;
                }
                let (i, j, w) = edges[e];
                let hit = amps[i].norm_sqr() + amps[j].norm_sqr();
                miss -= hit;
                let p1 = (amps[i] - amps[j]).norm_sqr() / 2.0 / hit;
                used[e] = true;
                let agree = if w { p1 } else { 1.0 - p1 };
                total += hit * agree * walk(amps, left - 1, edges, used, (votes.0 + 1, votes.1));
                total += hit * (1.0 - agree) * walk(amps, left - 1, edges, used, (votes.0, votes.1 + 1));
                used[e] = false;
            }
            total + miss * walk(amps, left - 1, edges, used, votes)
        }
        walk(amps, copies, edges, &mut vec![false; edges.len()], (0, 0))
    }

    #[test]
    fn referee_recursion_matches_path_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let s = 8;
            let a = 1.0 / (s as f64).sqrt();
            let amps: Vec<C64> = (0..s).map(|_| C64::from(if rng.random() { -a } else { a })).collect();
            let edges = [(0, 1, rng.random()), (2, 5, rng.random()), (3, 7, rng.random())];
            for copies in 1..=4 {
                let fast = matching_referee_acceptance(&amps, copies, &edges).unwrap();
                assert!((fast - referee_by_paths(&amps, copies, &edges)).abs() <= 1e-12);
            }
        }
        assert_eq!(matching_referee_acceptance(&[C64::from(1.0)], 3, &[]).unwrap(), 0.5);
    }

    #[test]
    fn default_parameters() {
        assert_eq!(MatchingQcParams::defaults(64), MatchingQcParams { subset_size: 16, copies: 4, edges_sent: 4 });
        assert_eq!(MatchingQcParams::defaults(8), MatchingQcParams { subset_size: 4, copies: 2, edges_sent: 2 });
        assert_eq!(MatchingQcParams::defaults(512), MatchingQcParams { subset_size: 64, copies: 8, edges_sent: 8 });
        assert_eq!(default_classical_subset(64), 24);
    }

    #[test]
    fn costs() {
        let p = matching_qc(64, MatchingQcParams::defaults(64)).unwrap();
        assert_eq!(p.cost(), Cost { alice: MessageCost::Qubits(16), bob_bits: 3 + 4 * 9 });
        let c = matching_classical(64, 24).unwrap();
        assert_eq!(c.cost(), Cost { alice: MessageCost::Bits(24), bob_bits: 4 + 12 * 11 });
    }

    #[test]
    fn classical_comparisons_are_errorless_on_full_subset() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let inst = random_promise_instance(8, true, &mut rng).unwrap();
        let p = matching_classical(8, 8).unwrap();
        let est = sampled_acceptance(&p, &inst.x, &inst.bob, 50, 1).unwrap();
        let mx = inst.mx();
        let agree = mx.iter().zip(&inst.bob.w).filter(|(a, b)| a == b).count();
        let want = majority(agree, 4 - agree);
        assert_eq!(est.estimate, want);
    }

    #[test]
    fn expected_edges_inside_subset() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inst = random_promise_instance(64, true, &mut rng).unwrap();
        let s = 24usize;
        let trials = 4000u64;
        let total: usize = (0..trials).map(|c| edges_inside(&inst.bob, &shared_subset(64, s, c)).len()).sum();
        let mean = total as f64 / trials as f64;
        // (n/2) * s(s-1) / (n(n-1)) = s(s-1)/(2(n-1)).
        let want = (s * (s - 1)) as f64 / (2.0 * 63.0);
        assert!((mean - want).abs() < 0.15, "{mean} vs {want}");
        assert!((mean - (s * s) as f64 / 128.0).abs() < 0.5);
    }

    #[test]
    fn sampled_estimates_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let inst = random_promise_instance(64, false, &mut rng).unwrap();
        let p = matching_qc(64, MatchingQcParams::defaults(64)).unwrap();
        let a = sampled_acceptance(&p, &inst.x, &inst.bob, 300, 7).unwrap();
        let b = sampled_acceptance(&p, &inst.x, &inst.bob, 300, 7).unwrap();
        assert_eq!(a, b);
        let instances = [(&inst.x, &inst.bob, false)];
        let s = sampled_success(&p, &instances, 300, 7).unwrap();
        assert!((s.estimate - (1.0 - a.estimate)).abs() <= 1e-12);
    }
}

use rand::Rng;

use super::{Result, SmpError};

/// Finite probability distribution with explicit support.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist<T> {
    items: Vec<(T, f64)>,
}

pub const DIST_TOLERANCE: f64 = 1e-12;

impl<T> Dist<T> {
    pub fn new(items: Vec<(T, f64)>) -> Result<Self> {
        if items.is_empty() {
            return Err(SmpError::InvalidDistribution("empty support".into()));
        }
        if let Some((_, p)) = items.iter().find(|(_, p)| !(*p >= 0.0) || *p > 1.0 + DIST_TOLERANCE) {
            return Err(SmpError::InvalidDistribution(format!("probability {p}")));
        }
        let total: f64 = items.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > DIST_TOLERANCE {
            return Err(SmpError::InvalidDistribution(format!("total mass {total}")));
        }
        Ok(Self { items })
    }

    pub fn point(value: T) -> Self {
        Self { items: vec![(value, 1.0)] }
    }

    pub fn uniform(values: Vec<T>) -> Result<Self> {
        let n = values.len() as f64;
        Self::new(values.into_iter().map(|v| (v, 1.0 / n)).collect())
    }

    pub fn items(&self) -> &[(T, f64)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn map<U>(self, f: impl Fn(T) -> U) -> Dist<U> {
        Dist { items: self.items.into_iter().map(|(v, p)| (f(v), p)).collect() }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &T {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (v, p) in &self.items {
            acc += p;
            if u < acc {
                return v;
            }
        }
        &self.items.last().expect("nonempty").0
    }

    /// `E[f(v)]`.
    pub fn expect(&self, mut f: impl FnMut(&T) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (v, p) in &self.items {
            if *p > 0.0 {
                acc += p * f(v)?;
            }
        }
        Ok(acc)
    }
}

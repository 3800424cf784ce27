use crate::{Error, Result};

/// Ordered collection of labelled tensor factors.
///
/// The label order *is* the tensor order: the first factor is the most
/// significant index of the flattened matrix. Every operator in the crate
/// carries one of these so that cross-module contractions can state their
/// factor order explicitly instead of relying on positional convention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemDims {
    factors: Vec<(String, usize)>,
}

impl SystemDims {
    pub fn new<I, S>(factors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let factors: Vec<(String, usize)> =
            factors.into_iter().map(|(l, d)| (l.into(), d)).collect();
        for (i, (label, dim)) in factors.iter().enumerate() {
            if *dim < 1 {
                return Err(Error::InvalidArgument(format!(
                    "dimension of `{label}` must be >= 1, got {dim}"
                )));
            }
            if factors[..i].iter().any(|(other, _)| other == label) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self { factors })
    }

    /// Single factor.
    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|(l, _)| l.as_str())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|&(_, d)| d).collect()
    }

    pub fn factor(&self, i: usize) -> (&str, usize) {
        let (l, d) = &self.factors[i];
        (l.as_str(), *d)
    }

    pub fn total(&self) -> usize {
        self.factors.iter().map(|&(_, d)| d).product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.position(label).map(|i| self.factors[i].1)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.factors.iter().any(|(l, _)| l == label)
    }

    /// Concatenation, used by tensor products. Fails on label collision.
    pub fn join(&self, other: &Self) -> Result<Self> {
        Self::new(
            self.factors
                .iter()
                .chain(other.factors.iter())
                .map(|(l, d)| (l.clone(), *d)),
        )
    }

    /// Dims restricted to `keep` positions, in the given order.
    pub fn select(&self, keep: &[usize]) -> Self {
        Self {
            factors: keep.iter().map(|&i| self.factors[i].clone()).collect(),
        }
    }

    /// Replace the label at `pos`, keeping the dimension.
    pub fn relabelled(&self, pos: usize, label: &str) -> Result<Self> {
        let mut factors = self.factors.clone();
        factors[pos].0 = label.to_string();
        Self::new(factors)
    }

    /// Replace the factor at `pos` with a new `(label, dim)` pair.
    pub fn replaced(&self, pos: usize, label: &str, dim: usize) -> Result<Self> {
        let mut factors = self.factors.clone();
        factors[pos] = (label.to_string(), dim);
        Self::new(factors)
    }

    /// Positions of the given labels, erroring on unknown ones.
    pub fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.position(l)).collect()
    }
}

impl std::fmt::Display for SystemDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(l, d)| format!("{l}:{d}"))
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_zero_dims() {
        assert!(SystemDims::new([("A", 2), ("A", 3)]).is_err());
        assert!(SystemDims::new([("A", 0)]).is_err());
    }

    #[test]
    fn total_and_lookup() {
        let d = SystemDims::new([("A", 2), ("B", 3), ("C", 4)]).unwrap();
        assert_eq!(d.total(), 24);
        assert_eq!(d.position("B").unwrap(), 1);
        assert_eq!(d.dim_of("C").unwrap(), 4);
        assert!(d.position("Z").is_err());
    }

    #[test]
    fn join_detects_collisions() {
        let a = SystemDims::new([("A", 2)]).unwrap();
        let b = SystemDims::new([("A", 2)]).unwrap();
        assert!(a.join(&b).is_err());
    }
}

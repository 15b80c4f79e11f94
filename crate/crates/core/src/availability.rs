//! Closed-form path availability.
//!
//! Paths are independent Bernoulli trials with success probability `P_l`.
//! Subsets of size `γ` of a path collection `Φ` are indexed by `α = 1..=C(|Φ|, γ)`
//! in lexicographic order of their member positions.

use thiserror::Error;

use crate::sum::pairwise_sum;
use crate::topology::{PathEnsemble, TopologyError};

#[derive(Debug, Error)]
pub enum AvailabilityError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("subset size {gamma} exceeds collection size {size}")]
    SubsetSize { gamma: usize, size: usize },
    #[error("combination index {alpha} outside 1..={count}")]
    ComboIndex { alpha: u64, count: u64 },
    #[error("collection member {0} is not an ensemble position")]
    UnknownMember(usize),
    #[error("no single-path availability outcome has nonzero probability")]
    Degenerate,
}

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Positions of the `alpha`-th (1-based) lexicographic `k`-subset of `0..n`.
pub fn unrank_combination(n: usize, k: usize, alpha: u64) -> Result<Vec<usize>, AvailabilityError> {
    if k > n {
        return Err(AvailabilityError::SubsetSize { gamma: k, size: n });
    }
    let count = binomial(n, k);
    if alpha == 0 || alpha > count {
        return Err(AvailabilityError::ComboIndex { alpha, count });
    }
    let mut rank = alpha - 1;
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    for slot in 0..k {
        let mut c = next;
        loop {
            // subsets whose `slot`-th member is `c`
            let with_c = binomial(n - c - 1, k - slot - 1);
            if rank < with_c {
                break;
            }
            rank -= with_c;
            c += 1;
        }
        out.push(c);
        next = c + 1;
    }
    Ok(out)
}

/// Lexicographic iterator over `k`-subsets of `0..n`.
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            current: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.current.take()?;
        let k = cur.len();
        let mut succ = cur.clone();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if succ[i] < self.n - k + i {
                succ[i] += 1;
                for j in i + 1..k {
                    succ[j] = succ[j - 1] + 1;
                }
                self.current = Some(succ);
                return Some(cur);
            }
        }
        Some(cur)
    }
}

/// A combination `A_α` of `γ` paths drawn from a collection `Φ` of
/// ensemble positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComboQuery {
    /// Ensemble positions forming `Φ`; `None` means all paths (`Ψ`).
    pub collection: Option<Vec<usize>>,
    pub subset_size: usize,
    pub alpha: u64,
}

impl ComboQuery {
    pub fn over_all(subset_size: usize, alpha: u64) -> Self {
        Self {
            collection: None,
            subset_size,
            alpha,
        }
    }
}

fn combo_product(p: &[f64], members: &[usize], chosen: &[usize]) -> f64 {
    let mut prob = 1.0;
    let mut c = chosen.iter().peekable();
    for (pos, &m) in members.iter().enumerate() {
        if c.peek() == Some(&&pos) {
            c.next();
            prob *= p[m];
        } else {
            prob *= 1.0 - p[m];
        }
    }
    prob
}

/// Probability that exactly the paths in `A_α` are available and the rest
/// of `Φ` are not.
pub fn prob_combo(ensemble: &PathEnsemble, q: &ComboQuery) -> Result<f64, AvailabilityError> {
    let p = ensemble.availabilities()?;
    let members: Vec<usize> = match &q.collection {
        Some(c) => {
            if let Some(&bad) = c.iter().find(|&&i| i >= p.len()) {
                return Err(AvailabilityError::UnknownMember(bad));
            }
            c.clone()
        }
        None => (0..p.len()).collect(),
    };
    let chosen = unrank_combination(members.len(), q.subset_size, q.alpha)?;
    Ok(combo_product(&p, &members, &chosen))
}

fn exactly_from(p: &[f64], j: usize) -> f64 {
    let members: Vec<usize> = (0..p.len()).collect();
    let terms: Vec<f64> = Combinations::new(p.len(), j)
        .map(|chosen| combo_product(p, &members, &chosen))
        .collect();
    pairwise_sum(&terms)
}

/// `P̂(Ω = j)`: exactly `j` of the ensemble's paths are available.
pub fn prob_exactly(ensemble: &PathEnsemble, j: usize) -> Result<f64, AvailabilityError> {
    let p = ensemble.availabilities()?;
    if j > p.len() {
        return Err(AvailabilityError::SubsetSize {
            gamma: j,
            size: p.len(),
        });
    }
    Ok(exactly_from(&p, j))
}

/// `P_B = P̂(Ω = 0)`; an empty ensemble blocks with probability 1.
pub fn blocking_probability(ensemble: &PathEnsemble) -> Result<f64, AvailabilityError> {
    prob_exactly(ensemble, 0)
}

fn selection_from(p: &[f64]) -> Result<Vec<f64>, AvailabilityError> {
    let members: Vec<usize> = (0..p.len()).collect();
    let singles: Vec<f64> = (0..p.len())
        .map(|i| combo_product(p, &members, &[i]))
        .collect();
    let exactly_one = pairwise_sum(&singles);
    if exactly_one == 0.0 {
        return Err(AvailabilityError::Degenerate);
    }
    let blocking = exactly_from(p, 0);
    Ok(singles
        .into_iter()
        .map(|s| s * (1.0 - blocking) / exactly_one)
        .collect())
}

/// `P(α) = P''(α, 1, Ψ) (1 − P_B) / P̂(Ω = 1)` for the single-path set
/// holding path `α` (1-based ensemble position).
pub fn selection_probability(
    ensemble: &PathEnsemble,
    alpha: u64,
) -> Result<f64, AvailabilityError> {
    let p = ensemble.availabilities()?;
    let count = p.len() as u64;
    if alpha == 0 || alpha > count {
        return Err(AvailabilityError::ComboIndex { alpha, count });
    }
    Ok(selection_from(&p)?[alpha as usize - 1])
}

/// Every `P(α)` in ensemble order.
pub fn selection_vector(ensemble: &PathEnsemble) -> Result<Vec<f64>, AvailabilityError> {
    selection_from(&ensemble.availabilities()?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AvailabilityReport {
    /// `P̂(Ω = j)` for `j = 0..=N`.
    pub distribution: Vec<f64>,
    pub blocking: f64,
    /// `P(α)` per path; `None` when the single-path outcome is impossible.
    pub selection: Option<Vec<f64>>,
}

impl AvailabilityReport {
    pub fn compute(ensemble: &PathEnsemble) -> Result<Self, AvailabilityError> {
        let p = ensemble.availabilities()?;
        let distribution: Vec<f64> = (0..=p.len()).map(|j| exactly_from(&p, j)).collect();
        let selection = match selection_from(&p) {
            Ok(s) => Some(s),
            Err(AvailabilityError::Degenerate) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            blocking: distribution[0],
            distribution,
            selection,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ens(p: &[f64]) -> PathEnsemble {
        PathEnsemble::parallel(p).unwrap()
    }

    #[test]
    fn unranking_matches_iteration() {
        for n in 0..8 {
            for k in 0..=n {
                let all: Vec<_> = Combinations::new(n, k).collect();
                assert_eq!(all.len() as u64, binomial(n, k));
                for (i, c) in all.iter().enumerate() {
                    assert_eq!(&unrank_combination(n, k, i as u64 + 1).unwrap(), c);
                }
            }
        }
        assert_eq!(binomial(12, 6), 924);
        assert!(unrank_combination(4, 2, 7).is_err());
        assert!(unrank_combination(4, 2, 0).is_err());
    }

    #[test]
    fn combo_examples() {
        let close = |a: f64, b: f64| (a - b).abs() < 1e-15;
        assert!(close(
            prob_combo(&ens(&[0.9]), &ComboQuery::over_all(1, 1)).unwrap(),
            0.9
        ));
        let two = ens(&[0.9, 0.5]);
        assert!(close(
            prob_combo(&two, &ComboQuery::over_all(1, 1)).unwrap(),
            0.45
        ));
        assert!(close(
            prob_combo(&two, &ComboQuery::over_all(0, 1)).unwrap(),
            0.05
        ));
        assert!(matches!(
            prob_combo(&two, &ComboQuery::over_all(1, 3)),
            Err(AvailabilityError::ComboIndex { alpha: 3, count: 2 })
        ));
    }

    #[test]
    fn combo_over_available_subset() {
        let e = ens(&[0.9, 0.5, 0.2]);
        let q = ComboQuery {
            collection: Some(vec![0, 2]),
            subset_size: 1,
            alpha: 2,
        };
        // A = {path 3}, B = {path 1}
        assert!((prob_combo(&e, &q).unwrap() - 0.2 * 0.1).abs() < 1e-15);
        let bad = ComboQuery {
            collection: Some(vec![5]),
            subset_size: 1,
            alpha: 1,
        };
        assert!(matches!(
            prob_combo(&e, &bad),
            Err(AvailabilityError::UnknownMember(5))
        ));
    }

    #[test]
    fn exactly_examples() {
        assert_eq!(prob_exactly(&ens(&[1.0]), 1).unwrap(), 1.0);
        assert!((prob_exactly(&ens(&[0.9, 0.5]), 1).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            prob_exactly(&ens(&[0.9, 0.5]), 3),
            Err(AvailabilityError::SubsetSize { .. })
        ));
    }

    #[test]
    fn blocking_examples() {
        assert_eq!(blocking_probability(&ens(&[1.0, 1.0])).unwrap(), 0.0);
        assert!((blocking_probability(&ens(&[0.9, 0.5])).unwrap() - 0.05).abs() < 1e-15);
        assert_eq!(blocking_probability(&ens(&[])).unwrap(), 1.0);
    }

    #[test]
    fn selection_examples() {
        assert!((selection_probability(&ens(&[0.7]), 1).unwrap() - 0.7).abs() < 1e-15);
        let sym = ens(&[0.5, 0.5]);
        let a = selection_probability(&sym, 1).unwrap();
        let b = selection_probability(&sym, 2).unwrap();
        assert_eq!(a, b);
        assert!((a - 0.375).abs() < 1e-15);
        assert!(matches!(
            selection_probability(&ens(&[1.0, 1.0]), 1),
            Err(AvailabilityError::Degenerate)
        ));
        let r = AvailabilityReport::compute(&ens(&[1.0, 1.0])).unwrap();
        assert!(r.selection.is_none());
        assert_eq!(r.blocking, 0.0);
    }
}

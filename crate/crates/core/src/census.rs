//! Exact counting and degree-support calculations: the hyperelliptic component
//! count, the Poincaré polynomial of M_{0,2g+2}, and a one-page calculator for
//! the nerve spectral sequence E₁^{s,t} = H_c^t(𝒴_s) ⟹ H_c^{s+t}(Y).

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 2^{g²} ∏_{k=1}^{g} (2^{2k} − 1) / (2g + 2)!, i.e. |Sp_g(F₂)| / |S_{2g+2}|.
pub fn component_count(genus: u32) -> Result<BigRational> {
    if genus < 2 {
        return Err(Error::InvalidArgument(format!("component count needs g >= 2, got {genus}")));
    }
    let two = BigInt::from(2u32);
    let mut numerator = two.pow(genus * genus);
    for k in 1..=genus {
        numerator *= two.pow(2 * k) - BigInt::one();
    }
    let denominator: BigInt = (1..=(2 * genus + 2)).map(BigInt::from).product();
    Ok(BigRational::new(numerator, denominator))
}

/// Coefficients (constant term first) of ∏_{j=2}^{2g} (jt + 1).
pub fn poincare_polynomial(genus: u32) -> Result<Vec<BigInt>> {
    if genus < 1 {
        return Err(Error::InvalidArgument("genus must be positive".into()));
    }
    let mut coeffs = vec![BigInt::one()];
    for j in 2..=(2 * genus) {
        let mut next = vec![BigInt::zero(); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i] += c;
            next[i + 1] += c * BigInt::from(j);
        }
        coeffs = next;
    }
    Ok(coeffs)
}

/// First Betti number of M_{0,2g+2}: the t-coefficient of its Poincaré
/// polynomial.
pub fn moduli_betti(genus: u32) -> Result<BigInt> {
    if genus < 2 {
        return Err(Error::InvalidArgument(format!("betti number needs g >= 2, got {genus}")));
    }
    Ok(poincare_polynomial(genus)?[1].clone())
}

/// C(8, 3) = 56: the number of ways to split eight Weierstrass points into
/// subsets of sizes 5 and 3.
///
/// Only the binomial coefficient is computed here; the correspondence with
/// boundary component types of the genus-3 hyperelliptic locus is not
/// verified by this crate.
pub fn weierstrass_partition_types() -> u64 {
    binomial(8, 3)
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Cells of each level of the nerve: level s lists the dimensions of the
/// (Euclidean) cells making up 𝒴_s.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NerveInput {
    pub ambient_dim: usize,
    pub levels: Vec<Vec<usize>>,
}

impl NerveInput {
    /// Components ≅ 𝔥₂ × 𝔥₁ ≅ ℝ⁸, pairwise intersections ≅ 𝔥₁³ ≅ ℝ⁶, no triple
    /// intersections, inside a component of real dimension 10.
    pub fn reducible_boundary() -> Self {
        NerveInput {
            ambient_dim: 10,
            levels: vec![vec![8], vec![6]],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankFlag {
    Zero,
    /// Free abelian, possibly of infinite rank.
    Free,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NerveEntry {
    pub s: usize,
    pub t: usize,
    pub rank: RankFlag,
}

/// Nonzero positions of the E₁ page; every position not listed is zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NerveTable {
    pub entries: Vec<NerveEntry>,
}

impl NerveTable {
    pub fn rank(&self, s: usize, t: usize) -> RankFlag {
        self.entries
            .iter()
            .find(|e| e.s == s && e.t == t)
            .map_or(RankFlag::Zero, |e| e.rank)
    }

    pub fn positions(&self) -> BTreeSet<(usize, usize)> {
        self.entries.iter().filter(|e| e.rank != RankFlag::Zero).map(|e| (e.s, e.t)).collect()
    }
}

/// E₁^{s,t} = H_c^t(𝒴_s): a d-cell has compactly supported cohomology free of
/// rank one in degree d and zero elsewhere.
pub fn nerve_e1(input: &NerveInput) -> NerveTable {
    let positions: BTreeSet<(usize, usize)> = input
        .levels
        .iter()
        .enumerate()
        .flat_map(|(s, dims)| dims.iter().map(move |&t| (s, t)))
        .collect();
    NerveTable {
        entries: positions
            .into_iter()
            .map(|(s, t)| NerveEntry { s, t, rank: RankFlag::Free })
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneration {
    Automatic,
    NotAutomatic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeSupport {
    pub degrees: BTreeSet<usize>,
    pub degeneration: Degeneration,
    /// Pairs (source, target) of nonzero positions joined by some
    /// d_r: (s, t) → (s + r, t − r + 1), r ≥ 1.
    pub differential_pairs: Vec<((usize, usize), (usize, usize))>,
    /// Total degrees reached from more than one position.
    pub shared_degrees: Vec<usize>,
}

/// Total degrees s + t carrying a nonzero E₁ entry.
///
/// Degeneration is reported as automatic only when no differential can join
/// two nonzero positions and each total degree comes from a single position;
/// the degree set is then the support of H_c, with free groups.
pub fn supported_degrees(table: &NerveTable) -> DegreeSupport {
    let positions = table.positions();
    let mut differential_pairs = Vec::new();
    for &(s, t) in &positions {
        for &(s2, t2) in &positions {
            // d_r lands at (s + r, t − r + 1)
            if s2 > s && t2 + (s2 - s) == t + 1 {
                differential_pairs.push(((s, t), (s2, t2)));
            }
        }
    }
    let mut by_degree: BTreeMap<usize, usize> = BTreeMap::new();
    for &(s, t) in &positions {
        *by_degree.entry(s + t).or_default() += 1;
    }
    let shared_degrees: Vec<usize> = by_degree.iter().filter(|(_, &n)| n > 1).map(|(&k, _)| k).collect();
    let degeneration = if differential_pairs.is_empty() && shared_degrees.is_empty() {
        Degeneration::Automatic
    } else {
        Degeneration::NotAutomatic
    };
    DegreeSupport {
        degrees: by_degree.keys().copied().collect(),
        degeneration,
        differential_pairs,
        shared_degrees,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GysinStatus {
    /// Both neighbours in the exact sequence vanish.
    Zero,
    /// Injects into a free abelian group, hence free abelian.
    Free,
    Unconstrained,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GysinConstraint {
    pub k: usize,
    /// Degree n − k of the compactly supported boundary cohomology.
    pub boundary_degree: usize,
    pub status: GysinStatus,
}

/// Constraints on H_k(X) from the exact segment
/// H_k(X − Z) → H_k(X) → H_c^{n−k}(Z), given that H_k(X − Z) = 0 for
/// k ≥ `complement_vanishes_from` and that H_c^*(Z) is free and supported on
/// `boundary_support`.
pub fn gysin_support(
    ambient_dim: usize,
    boundary_support: &BTreeSet<usize>,
    complement_vanishes_from: usize,
) -> Vec<GysinConstraint> {
    (0..=ambient_dim)
        .map(|k| {
            let boundary_degree = ambient_dim - k;
            let complement_zero = k >= complement_vanishes_from;
            let boundary_zero = !boundary_support.contains(&boundary_degree);
            let status = match (complement_zero, boundary_zero) {
                (true, true) => GysinStatus::Zero,
                (true, false) => GysinStatus::Free,
                (false, _) => GysinStatus::Unconstrained,
            };
            GysinConstraint {
                k,
                boundary_degree,
                status,
            }
        })
        .collect()
}

/// Integer value of a rational known to be integral, if it fits in u128.
pub fn as_integer(q: &BigRational) -> Option<u128> {
    if q.is_integer() {
        q.to_integer().to_u128()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn component_counts() {
        assert_eq!(component_count(2).unwrap(), BigRational::from_integer(BigInt::from(1)));
        assert_eq!(component_count(3).unwrap(), BigRational::from_integer(BigInt::from(36)));
        // regression values from an independent big-integer evaluation
        assert_eq!(as_integer(&component_count(4).unwrap()), Some(13_056));
        assert_eq!(as_integer(&component_count(5).unwrap()), Some(51_806_208));
        assert_eq!(as_integer(&component_count(6).unwrap()), Some(2_387_230_064_640));
        assert!(component_count(1).is_err());
    }

    #[test]
    fn component_counts_are_positive_integers() {
        for g in 2..=6 {
            let q = component_count(g).unwrap();
            assert!(q.is_integer() && q > BigRational::zero(), "g={g}");
        }
    }

    #[test]
    fn poincare_polynomial_genus_two() {
        // (2t+1)(3t+1)(4t+1) = 24t³ + 26t² + 9t + 1
        let p = poincare_polynomial(2).unwrap();
        let want: Vec<BigInt> = [1, 9, 26, 24].iter().map(|&c| BigInt::from(c)).collect();
        assert_eq!(p, want);
    }

    #[test]
    fn betti_numbers() {
        assert_eq!(moduli_betti(2).unwrap(), BigInt::from(9));
        assert_eq!(moduli_betti(3).unwrap(), BigInt::from(20));
        for g in 2..=8u32 {
            let closed = i64::from(g * (2 * g + 1)) - 1;
            assert_eq!(moduli_betti(g).unwrap(), BigInt::from(closed));
        }
        assert!(moduli_betti(1).is_err());
    }

    #[test]
    fn reducible_boundary_table() {
        let table = nerve_e1(&NerveInput::reducible_boundary());
        assert_eq!(table.positions(), BTreeSet::from([(0, 8), (1, 6)]));
        assert!(table.positions().iter().all(|&(s, _)| s < 2));
        let support = supported_degrees(&table);
        assert_eq!(support.degrees, BTreeSet::from([7, 8]));
        assert_eq!(support.degeneration, Degeneration::Automatic);
    }

    #[test]
    fn single_cell() {
        let table = nerve_e1(&NerveInput {
            ambient_dim: 8,
            levels: vec![vec![8]],
        });
        assert_eq!(table.positions(), BTreeSet::from([(0, 8)]));
        let support = supported_degrees(&table);
        assert_eq!(support.degrees, BTreeSet::from([8]));
        assert_eq!(support.degeneration, Degeneration::Automatic);
    }

    #[test]
    fn shared_total_degree_is_flagged() {
        let table = nerve_e1(&NerveInput {
            ambient_dim: 10,
            levels: vec![vec![8], vec![7]],
        });
        let support = supported_degrees(&table);
        assert_eq!(support.degrees, BTreeSet::from([8]));
        assert_eq!(support.shared_degrees, vec![8]);
        assert_eq!(support.degeneration, Degeneration::NotAutomatic);
    }

    #[test]
    fn differential_pair_is_flagged() {
        // d_1: (0, 6) → (1, 6)
        let table = nerve_e1(&NerveInput {
            ambient_dim: 10,
            levels: vec![vec![6], vec![6]],
        });
        let support = supported_degrees(&table);
        assert_eq!(support.differential_pairs, vec![((0, 6), (1, 6))]);
        assert_eq!(support.degeneration, Degeneration::NotAutomatic);
    }

    #[test]
    fn gysin_constraints() {
        let c = gysin_support(10, &BTreeSet::from([7, 8]), 3);
        let status = |k: usize| c[k].status;
        for k in 4..=10 {
            assert_eq!(status(k), GysinStatus::Zero, "k={k}");
        }
        assert_eq!(status(3), GysinStatus::Free);
        assert_eq!(c[3].boundary_degree, 7);
        for k in 0..=2 {
            assert_eq!(status(k), GysinStatus::Unconstrained, "k={k}");
        }
    }

    #[test]
    fn weierstrass_types() {
        assert_eq!(weierstrass_partition_types(), 56);
    }

    #[test]
    fn nerve_input_json() {
        let json = r#"{"ambient_dim":10,"levels":[[8],[6]]}"#;
        let input: NerveInput = serde_json::from_str(json).unwrap();
        assert_eq!(input, NerveInput::reducible_boundary());
        assert!(serde_json::from_str::<NerveInput>(r#"{"ambient_dim":10,"levels":[[-1]]}"#).is_err());
    }
}

//! Which even genus-3 thetanulls vanish on the reducible strata of 𝔥₃.
//!
//! Every statement is available twice: exactly, by splitting characteristics
//! over F₂ along a coordinate grouping, and numerically, by evaluating the 36
//! even thetanulls at sampled block-diagonal points.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charalg::{enumerate, Characteristic, Parity};
use crate::error::{Error, Result};
use crate::siegel::{act_with_tol, sample_generic_with, seeded_rng, PeriodMatrix, SymplecticMatrix};
use crate::thetanum::{eval_thetanull, Classification, Margins, ThetaConfig};

const GENUS: usize = 3;
const BLOCK_TOL: f64 = 1e-12;
const MAX_RESAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StratumKind {
    Generic,
    Red,
    RedSing,
}

impl fmt::Display for StratumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StratumKind::Generic => "generic",
            StratumKind::Red => "red",
            StratumKind::RedSing => "red_sing",
        })
    }
}

impl std::str::FromStr for StratumKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic" => Ok(StratumKind::Generic),
            "red" => Ok(StratumKind::Red),
            "red_sing" => Ok(StratumKind::RedSing),
            other => Err(Error::InvalidArgument(format!("unknown stratum kind {other:?}"))),
        }
    }
}

/// An ordered partition of the coordinates {1, 2, 3}; 0-based internally,
/// 1-based in JSON and text.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct Grouping {
    blocks: Vec<Vec<usize>>,
}

impl Grouping {
    /// Validates a 0-based partition of {0, 1, 2}.
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = [false; GENUS];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::UnsupportedGrouping("empty block".into()));
            }
            for &c in block {
                if c >= GENUS || seen[c] {
                    return Err(Error::UnsupportedGrouping(format!("{blocks:?} is not a partition of the coordinates")));
                }
                seen[c] = true;
            }
        }
        if seen.contains(&false) {
            return Err(Error::UnsupportedGrouping(format!("{blocks:?} does not cover every coordinate")));
        }
        Ok(Grouping { blocks })
    }

    /// The [2,1] grouping that separates coordinate `single` (0-based) from
    /// the other two.
    pub fn separating(single: usize) -> Result<Self> {
        if single >= GENUS {
            return Err(Error::UnsupportedGrouping(format!("coordinate {single} out of range")));
        }
        let pair: Vec<usize> = (0..GENUS).filter(|&c| c != single).collect();
        Grouping::new(vec![pair, vec![single]])
    }

    pub fn singletons() -> Self {
        Grouping {
            blocks: (0..GENUS).map(|c| vec![c]).collect(),
        }
    }

    pub fn whole() -> Self {
        Grouping {
            blocks: vec![(0..GENUS).collect()],
        }
    }

    /// The three [2,1] coordinate groupings, by separated coordinate.
    pub fn all_red() -> Vec<Grouping> {
        (0..GENUS).map(|c| Grouping::separating(c).expect("coordinate in range")).collect()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Block sizes sorted in decreasing order.
    pub fn shape(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.blocks.iter().map(|b| b.len()).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    /// For a [2,1] grouping, the coordinate in the singleton block.
    pub fn separated_coordinate(&self) -> Option<usize> {
        if self.shape() != [2, 1] {
            return None;
        }
        self.blocks.iter().find(|b| b.len() == 1).map(|b| b[0])
    }

    /// True when every block of `finer` lies inside a block of `self`.
    pub fn is_refined_by(&self, finer: &Grouping) -> bool {
        finer
            .blocks
            .iter()
            .all(|fb| self.blocks.iter().any(|b| fb.iter().all(|c| b.contains(c))))
    }
}

impl TryFrom<Vec<Vec<usize>>> for Grouping {
    type Error = Error;

    fn try_from(one_based: Vec<Vec<usize>>) -> Result<Self> {
        let blocks = one_based
            .into_iter()
            .map(|b| {
                b.into_iter()
                    .map(|c| c.checked_sub(1).ok_or_else(|| Error::UnsupportedGrouping("coordinates are 1-based".into())))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Grouping::new(blocks)
    }
}

impl From<Grouping> for Vec<Vec<usize>> {
    fn from(g: Grouping) -> Self {
        g.blocks.into_iter().map(|b| b.into_iter().map(|c| c + 1).collect()).collect()
    }
}

impl fmt::Display for Grouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                let inner: Vec<String> = b.iter().map(|c| (c + 1).to_string()).collect();
                format!("{{{}}}", inner.join(","))
            })
            .collect();
        f.write_str(&parts.join(""))
    }
}

/// A sampled point of one of the coordinate strata of 𝔥₃.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratumPoint {
    pub kind: StratumKind,
    pub grouping: Grouping,
    pub omega: PeriodMatrix,
}

impl StratumPoint {
    pub fn new(kind: StratumKind, grouping: Grouping, omega: PeriodMatrix) -> Result<Self> {
        let point = StratumPoint { kind, grouping, omega };
        point.validate()?;
        Ok(point)
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega.genus() != GENUS {
            return Err(Error::GenusMismatch {
                expected: GENUS,
                actual: self.omega.genus(),
            });
        }
        let expected_shape: &[usize] = match self.kind {
            StratumKind::Generic => &[3],
            StratumKind::Red => &[2, 1],
            StratumKind::RedSing => &[1, 1, 1],
        };
        if self.grouping.shape() != expected_shape {
            return Err(Error::UnsupportedGrouping(format!(
                "grouping {} does not match kind {}",
                self.grouping, self.kind
            )));
        }
        if !self.omega.is_block_diagonal(self.grouping.blocks(), BLOCK_TOL) {
            return Err(Error::InvalidArgument(format!(
                "period matrix is not block-diagonal for {}",
                self.grouping
            )));
        }
        if self.kind == StratumKind::Red {
            let pair = self.grouping.blocks().iter().find(|b| b.len() == 2).expect("shape [2,1]");
            if self.omega.get(pair[0], pair[1]).norm() <= BLOCK_TOL {
                return Err(Error::InvalidArgument("genus-2 block is itself block-diagonal".into()));
            }
        }
        Ok(())
    }
}

/// Places block matrices on the coordinates of `grouping`.
fn assemble(grouping: &Grouping, parts: &[PeriodMatrix]) -> Result<PeriodMatrix> {
    let mut entries = DMatrix::from_element(GENUS, GENUS, Complex64::new(0.0, 0.0));
    for (block, part) in grouping.blocks().iter().zip(parts) {
        for (a, &ca) in block.iter().enumerate() {
            for (b, &cb) in block.iter().enumerate() {
                entries[(ca, cb)] = part.get(a, b);
            }
        }
    }
    PeriodMatrix::new(entries, BLOCK_TOL)
}

/// A genus-2 point at which all ten even thetanulls clear `tol_nonzero`,
/// drawn by rejection from [`sample_generic_with`].
pub fn sample_generic_genus_two<R: Rng + ?Sized>(rng: &mut R, cfg: &ThetaConfig, margins: &Margins) -> Result<PeriodMatrix> {
    let evens = enumerate(2, Some(Parity::Even))?;
    for _ in 0..MAX_RESAMPLES {
        let candidate = sample_generic_with(2, rng);
        let mut generic = true;
        for d in &evens {
            if margins.classify(eval_thetanull(d, &candidate, cfg)?.normalized()) != Classification::Nonzero {
                generic = false;
                break;
            }
        }
        if generic {
            return Ok(candidate);
        }
    }
    Err(Error::InvalidArgument("no generic genus-2 point found".into()))
}

/// Samples a point of the stratum given by `kind` and `grouping`,
/// deterministically from `seed`.
pub fn sample_stratum_point(
    kind: StratumKind,
    grouping: &Grouping,
    seed: u64,
    cfg: &ThetaConfig,
    margins: &Margins,
) -> Result<StratumPoint> {
    let mut rng = seeded_rng(seed);
    let parts: Vec<PeriodMatrix> = grouping
        .blocks()
        .iter()
        .map(|b| match b.len() {
            2 => sample_generic_genus_two(&mut rng, cfg, margins),
            n => Ok(sample_generic_with(n, &mut rng)),
        })
        .collect::<Result<_>>()?;
    StratumPoint::new(kind, grouping.clone(), assemble(grouping, &parts)?)
}

/// Default grouping for a stratum kind: {1,2}{3}, {1}{2}{3} or {1,2,3}.
pub fn default_grouping(kind: StratumKind) -> Grouping {
    match kind {
        StratumKind::Generic => Grouping::whole(),
        StratumKind::Red => Grouping::separating(2).expect("coordinate in range"),
        StratumKind::RedSing => Grouping::singletons(),
    }
}

/// Even genus-3 characteristics whose thetanull vanishes identically on the
/// [2,1] stratum (both factors odd) or at a generic point of the [1,1,1]
/// stratum (exactly two odd genus-1 factors).
pub fn vanishing_set_combinatorial(grouping: &Grouping) -> Result<BTreeSet<Characteristic>> {
    let shape = grouping.shape();
    if shape != [2, 1] && shape != [1, 1, 1] {
        return Err(Error::UnsupportedGrouping(format!(
            "grouping {grouping} has shape {shape:?}; expected [2,1] or [1,1,1]"
        )));
    }
    let mut out = BTreeSet::new();
    for delta in enumerate(GENUS, Some(Parity::Even))? {
        let odd_factors = grouping
            .blocks()
            .iter()
            .map(|b| delta.restrict(b).map(|f| f.parity() == Parity::Odd))
            .collect::<Result<Vec<bool>>>()?;
        // [2,1]: both factors odd; [1,1,1]: two odd, one even
        if odd_factors.iter().filter(|&&o| o).count() == 2 {
            out.insert(delta);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncidenceEntry {
    pub delta: Characteristic,
    pub magnitude: f64,
    pub normalized: f64,
    pub tail_bound: f64,
    pub classification: Classification,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncidenceReport {
    pub point: StratumPoint,
    pub vanishing_even: BTreeSet<Characteristic>,
    pub indeterminate: BTreeSet<Characteristic>,
    pub entries: Vec<IncidenceEntry>,
    pub margins: Margins,
    pub tol: f64,
}

impl IncidenceReport {
    pub fn is_certain(&self) -> bool {
        self.indeterminate.is_empty()
    }
}

/// Classifies the 36 even thetanulls at an arbitrary point of 𝔥₃.
pub fn classify_even_thetanulls(omega: &PeriodMatrix, cfg: &ThetaConfig, margins: &Margins) -> Result<Vec<IncidenceEntry>> {
    if omega.genus() != GENUS {
        return Err(Error::GenusMismatch {
            expected: GENUS,
            actual: omega.genus(),
        });
    }
    enumerate(GENUS, Some(Parity::Even))?
        .into_par_iter()
        .map(|delta| {
            let v = eval_thetanull(&delta, omega, cfg)?;
            let normalized = v.normalized();
            Ok(IncidenceEntry {
                delta,
                magnitude: v.value.norm(),
                normalized,
                tail_bound: v.tail_bound,
                classification: margins.classify(normalized),
            })
        })
        .collect()
}

/// Numeric incidence report; indeterminate classifications are listed, not
/// raised.
pub fn incidence_report(point: &StratumPoint, cfg: &ThetaConfig, margins: &Margins) -> Result<IncidenceReport> {
    point.validate()?;
    let entries = classify_even_thetanulls(&point.omega, cfg, margins)?;
    let pick = |class: Classification| -> BTreeSet<Characteristic> {
        entries.iter().filter(|e| e.classification == class).map(|e| e.delta).collect()
    };
    Ok(IncidenceReport {
        point: point.clone(),
        vanishing_even: pick(Classification::Zero),
        indeterminate: pick(Classification::Indeterminate),
        entries,
        margins: *margins,
        tol: cfg.tol,
    })
}

/// Strict form of [`incidence_report`]: any indeterminate magnitude is an
/// error listing the offending characteristics.
pub fn vanishing_set_numeric(point: &StratumPoint, cfg: &ThetaConfig, margins: &Margins) -> Result<IncidenceReport> {
    let report = incidence_report(point, cfg, margins)?;
    if !report.is_certain() {
        return Err(Error::Indeterminate(report.indeterminate.iter().copied().collect()));
    }
    Ok(report)
}

/// The [2,1] coordinate groupings whose whole stratum lies in the zero locus
/// of ϑ_δ(−, 0), for δ vanishing at the [1,1,1] point.
pub fn components_containing(delta: &Characteristic, point: &StratumPoint) -> Result<Vec<Grouping>> {
    if point.kind != StratumKind::RedSing {
        return Err(Error::UnsupportedGrouping(format!(
            "components are counted at a red_sing point, got {}",
            point.kind
        )));
    }
    if delta.genus() != GENUS {
        return Err(Error::GenusMismatch {
            expected: GENUS,
            actual: delta.genus(),
        });
    }
    if !vanishing_set_combinatorial(&point.grouping)?.contains(delta) {
        return Err(Error::NotVanishing(*delta));
    }
    Grouping::all_red()
        .into_iter()
        .filter(|g| g.is_refined_by(&point.grouping))
        .map(|g| Ok((vanishing_set_combinatorial(&g)?.contains(delta), g)))
        .filter_map(|r: Result<(bool, Grouping)>| match r {
            Ok((true, g)) => Some(Ok(g)),
            Ok((false, _)) => None,
            Err(e) => Some(Err(e)),
        })
        .collect()
}

/// Double count of hyperelliptic components through a [1,1,1] point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalCensus {
    pub components_of_red_at_point: usize,
    pub hyp_per_red_point: usize,
    pub incidences_with_multiplicity: usize,
    pub distinct_hyp: usize,
    pub containments_per_delta: usize,
    /// Σ_δ |components_containing(δ)|, which must equal the multiplicity count.
    pub containment_sum: usize,
    /// No even δ contains all three [2,1] strata through the point.
    pub no_triple_containment: bool,
}

pub fn local_intersection_census() -> Result<LocalCensus> {
    let point_grouping = Grouping::singletons();
    let reds: Vec<Grouping> = Grouping::all_red()
        .into_iter()
        .filter(|g| g.is_refined_by(&point_grouping))
        .collect();
    let per_red: Vec<BTreeSet<Characteristic>> = reds.iter().map(vanishing_set_combinatorial).collect::<Result<_>>()?;
    let hyp_per_red_point = per_red[0].len();
    if per_red.iter().any(|s| s.len() != hyp_per_red_point) {
        return Err(Error::InvalidArgument("[2,1] groupings disagree on their vanishing count".into()));
    }
    let incidences_with_multiplicity: usize = per_red.iter().map(|s| s.len()).sum();
    let union: BTreeSet<Characteristic> = per_red.iter().flatten().copied().collect();
    let at_point = vanishing_set_combinatorial(&point_grouping)?;
    if union != at_point {
        return Err(Error::InvalidArgument("union of [2,1] vanishing sets differs from the [1,1,1] set".into()));
    }

    // a synthetic point carries the grouping; only the combinatorics is used
    let tau = PeriodMatrix::scalar(Complex64::new(0.0, 1.0))?;
    let point = StratumPoint::new(
        StratumKind::RedSing,
        point_grouping.clone(),
        assemble(&point_grouping, &[tau.clone(), tau.clone(), tau])?,
    )?;
    let counts: Vec<usize> = at_point
        .iter()
        .map(|d| components_containing(d, &point).map(|v| v.len()))
        .collect::<Result<_>>()?;
    let containments_per_delta = counts[0];
    if counts.iter().any(|&c| c != containments_per_delta) {
        return Err(Error::InvalidArgument("containment count differs between characteristics".into()));
    }
    Ok(LocalCensus {
        components_of_red_at_point: reds.len(),
        hyp_per_red_point,
        incidences_with_multiplicity,
        distinct_hyp: at_point.len(),
        containments_per_delta,
        containment_sum: counts.iter().sum(),
        no_triple_containment: counts.iter().all(|&c| c < reds.len()),
    })
}

/// Number of even thetanulls classified as zero at Ω; indeterminate
/// magnitudes are an error.
pub fn vanishing_count(omega: &PeriodMatrix, cfg: &ThetaConfig, margins: &Margins) -> Result<usize> {
    let entries = classify_even_thetanulls(omega, cfg, margins)?;
    let bad: Vec<Characteristic> = entries
        .iter()
        .filter(|e| e.classification == Classification::Indeterminate)
        .map(|e| e.delta)
        .collect();
    if !bad.is_empty() {
        return Err(Error::Indeterminate(bad));
    }
    Ok(entries.iter().filter(|e| e.classification == Classification::Zero).count())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvarianceOutcome {
    pub count_before: usize,
    pub count_after: usize,
}

impl InvarianceOutcome {
    pub fn preserved(&self) -> bool {
        self.count_before == self.count_after
    }
}

/// Compares the number of vanishing even thetanulls at the point and at its
/// image under M.
pub fn sp_invariance(point: &StratumPoint, m: &SymplecticMatrix, cfg: &ThetaConfig, margins: &Margins) -> Result<InvarianceOutcome> {
    if m.genus() != GENUS {
        return Err(Error::GenusMismatch {
            expected: GENUS,
            actual: m.genus(),
        });
    }
    let image = act_with_tol(m, &point.omega, cfg.membership_tol)?;
    Ok(InvarianceOutcome {
        count_before: vanishing_count(&point.omega, cfg, margins)?,
        count_after: vanishing_count(&image, cfg, margins)?,
    })
}

pub fn sp_invariance_check(point: &StratumPoint, m: &SymplecticMatrix, cfg: &ThetaConfig, margins: &Margins) -> Result<bool> {
    Ok(sp_invariance(point, m, cfg, margins)?.preserved())
}

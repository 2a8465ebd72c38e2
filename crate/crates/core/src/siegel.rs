//! Siegel upper half space, its block-diagonal strata and the action of
//! Sp_g(ℤ) by fractional linear transformations.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, RngExt, SeedableRng};
use rand_pcg::Pcg32;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance on the symmetry residual and on λ_min(Im Ω).
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Seeded generator used for every sampled object in the crate.
///
/// `Pcg32` is a 64-bit linear congruential generator with a permuted 32-bit
/// output; uniforms are drawn with `rand`'s standard `f64` conversion.
pub fn seeded_rng(seed: u64) -> Pcg32 {
    Pcg32::seed_from_u64(seed)
}

/// Smallest eigenvalue of a real symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn symmetry_residual(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for k in (j + 1)..n {
            worst = worst.max((m[(j, k)] - m[(k, j)]).norm());
        }
    }
    worst
}

/// Membership test for 𝔥_g: symmetric to `tol` and λ_min(Im Ω) > `tol`.
pub fn is_member(omega: &DMatrix<Complex64>, tol: f64) -> Result<bool> {
    if omega.nrows() != omega.ncols() {
        return Err(Error::NotSquare {
            rows: omega.nrows(),
            cols: omega.ncols(),
        });
    }
    if omega.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Ok(false);
    }
    if symmetry_residual(omega) > tol {
        return Ok(false);
    }
    let im = omega.map(|z| z.im);
    let im = (&im + im.transpose()) * 0.5;
    Ok(min_eigenvalue(&im) > tol)
}

/// A point Ω of the Siegel upper half space 𝔥_g.
///
/// Construction symmetrizes the input after checking the residual, so the
/// stored matrix is exactly symmetric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PeriodMatrixRepr", into = "PeriodMatrixRepr")]
pub struct PeriodMatrix {
    entries: DMatrix<Complex64>,
}

impl PeriodMatrix {
    pub fn new(entries: DMatrix<Complex64>, tol: f64) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::NotSquare {
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        if entries.nrows() == 0 {
            return Err(Error::NotInSiegelSpace {
                invariant: "genus must be positive".into(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NotInSiegelSpace {
                invariant: "entries must be finite".into(),
            });
        }
        let residual = symmetry_residual(&entries);
        if residual > tol {
            return Err(Error::NotInSiegelSpace {
                invariant: format!("symmetry residual {residual:e} exceeds {tol:e}"),
            });
        }
        let entries = (&entries + entries.transpose()).map(|z| z * 0.5);
        let lambda_min = min_eigenvalue(&entries.map(|z| z.im));
        if !(lambda_min > tol) {
            return Err(Error::NotInSiegelSpace {
                invariant: format!(
                    "imaginary part not positive definite (smallest eigenvalue {lambda_min:e})"
                ),
            });
        }
        Ok(PeriodMatrix { entries })
    }

    /// Builds Ω from row-major real and imaginary parts.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>], tol: f64) -> Result<Self> {
        let g = re.len();
        if im.len() != g || re.iter().chain(im.iter()).any(|row| row.len() != g) {
            return Err(Error::NotSquare {
                rows: g,
                cols: re.first().map_or(0, |r| r.len()),
            });
        }
        let entries = DMatrix::from_fn(g, g, |j, k| Complex64::new(re[j][k], im[j][k]));
        PeriodMatrix::new(entries, tol)
    }

    /// Ω = τ for genus 1.
    pub fn scalar(tau: Complex64) -> Result<Self> {
        PeriodMatrix::new(DMatrix::from_element(1, 1, tau), MEMBERSHIP_TOL)
    }

    pub fn genus(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.entries[(j, k)]
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        self.entries.map(|z| z.re)
    }

    pub fn imag_part(&self) -> DMatrix<f64> {
        self.entries.map(|z| z.im)
    }

    pub fn lambda_min(&self) -> f64 {
        min_eigenvalue(&self.imag_part())
    }

    /// Ω + h·(E_jk + E_kj) for j ≠ k, Ω + h·E_jj for j = k.
    pub fn shifted_entry(&self, j: usize, k: usize, h: Complex64, tol: f64) -> Result<Self> {
        let mut entries = self.entries.clone();
        entries[(j, k)] += h;
        if j != k {
            entries[(k, j)] += h;
        }
        PeriodMatrix::new(entries, tol)
    }

    /// Ω_{ij} restricted to the listed coordinates, in that order.
    pub fn principal_submatrix(&self, coords: &[usize]) -> Result<Self> {
        let entries = DMatrix::from_fn(coords.len(), coords.len(), |a, b| self.entries[(coords[a], coords[b])]);
        PeriodMatrix::new(entries, MEMBERSHIP_TOL)
    }

    /// Conjugation by a coordinate permutation: the result has
    /// `result[(perm[a], perm[b])] = self[(a, b)]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let g = self.genus();
        if !is_permutation(perm, g) {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation of 0..{g}")));
        }
        let mut entries = DMatrix::zeros(g, g);
        for a in 0..g {
            for b in 0..g {
                entries[(perm[a], perm[b])] = self.entries[(a, b)];
            }
        }
        Ok(PeriodMatrix { entries })
    }

    /// True when every entry linking two different blocks of `blocks` is
    /// below `tol` in magnitude.
    pub fn is_block_diagonal(&self, blocks: &[Vec<usize>], tol: f64) -> bool {
        let g = self.genus();
        let mut owner = vec![usize::MAX; g];
        for (b, block) in blocks.iter().enumerate() {
            for &c in block {
                if c >= g || owner[c] != usize::MAX {
                    return false;
                }
                owner[c] = b;
            }
        }
        if owner.contains(&usize::MAX) {
            return false;
        }
        (0..g).all(|j| (0..g).all(|k| owner[j] == owner[k] || self.entries[(j, k)].norm() <= tol))
    }

    pub fn is_block_diagonal_shape(&self, shape: &BlockShape, tol: f64) -> bool {
        self.is_block_diagonal(&shape.blocks(), tol)
    }
}

fn is_permutation(perm: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    perm.len() == n
        && perm.iter().all(|&p| {
            if p >= n || seen[p] {
                false
            } else {
                seen[p] = true;
                true
            }
        })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PeriodMatrixRepr {
    genus: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl TryFrom<PeriodMatrixRepr> for PeriodMatrix {
    type Error = Error;

    fn try_from(repr: PeriodMatrixRepr) -> Result<Self> {
        for (field, rows) in [("re", &repr.re), ("im", &repr.im)] {
            if rows.len() != repr.genus || rows.iter().any(|r| r.len() != repr.genus) {
                return Err(Error::Schema {
                    field: field.into(),
                    message: format!("expected a {0}x{0} array", repr.genus),
                });
            }
        }
        PeriodMatrix::from_parts(&repr.re, &repr.im, MEMBERSHIP_TOL).map_err(|e| match e {
            Error::NotInSiegelSpace { invariant } => Error::Schema {
                field: if invariant.contains("imaginary") { "im" } else { "re" }.into(),
                message: invariant,
            },
            other => other,
        })
    }
}

impl From<PeriodMatrix> for PeriodMatrixRepr {
    fn from(p: PeriodMatrix) -> Self {
        let g = p.genus();
        PeriodMatrixRepr {
            genus: g,
            re: (0..g).map(|j| (0..g).map(|k| p.entries[(j, k)].re).collect()).collect(),
            im: (0..g).map(|j| (0..g).map(|k| p.entries[(j, k)].im).collect()).collect(),
        }
    }
}

/// Sizes of consecutive diagonal blocks, Ω = Ω₁ ⊕ ··· ⊕ Ωₙ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockShape(Vec<usize>);

impl BlockShape {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidArgument(format!("invalid block sizes {sizes:?}")));
        }
        Ok(BlockShape(sizes))
    }

    pub fn sizes(&self) -> &[usize] {
        &self.0
    }

    pub fn genus(&self) -> usize {
        self.0.iter().sum()
    }

    /// Coordinate lists of each block (0-based).
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut start = 0;
        self.0
            .iter()
            .map(|&s| {
                let block = (start..start + s).collect();
                start += s;
                block
            })
            .collect()
    }
}

impl fmt::Display for BlockShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Ω₁ ⊕ ··· ⊕ Ωₙ.
pub fn block_sum(parts: &[PeriodMatrix]) -> Result<PeriodMatrix> {
    if parts.is_empty() {
        return Err(Error::InvalidArgument("block sum of an empty list".into()));
    }
    let g: usize = parts.iter().map(|p| p.genus()).sum();
    let mut entries = DMatrix::zeros(g, g);
    let mut offset = 0;
    for p in parts {
        let n = p.genus();
        entries.view_mut((offset, offset), (n, n)).copy_from(&p.entries);
        offset += n;
    }
    Ok(PeriodMatrix { entries })
}

/// Ω = X + iY with X symmetric, entries uniform in [−1, 1], and Y = I + LᵀL
/// with L uniform in [−½, ½].
///
/// Draw order: the upper triangle of X row by row (diagonal included), then L
/// row by row.
pub fn sample_generic(genus: usize, seed: u64) -> PeriodMatrix {
    let mut rng = seeded_rng(seed);
    sample_generic_with(genus, &mut rng)
}

pub fn sample_generic_with<R: Rng + ?Sized>(genus: usize, rng: &mut R) -> PeriodMatrix {
    assert!(genus > 0, "genus must be positive");
    let mut x = DMatrix::<f64>::zeros(genus, genus);
    for j in 0..genus {
        for k in j..genus {
            let v = rng.random_range(-1.0..=1.0);
            x[(j, k)] = v;
            x[(k, j)] = v;
        }
    }
    let l = DMatrix::<f64>::from_fn(genus, genus, |_, _| 0.0);
    let mut l = l;
    for j in 0..genus {
        for k in 0..genus {
            l[(j, k)] = rng.random_range(-0.5..=0.5);
        }
    }
    let y = DMatrix::<f64>::identity(genus, genus) + l.transpose() * &l;
    let entries = DMatrix::from_fn(genus, genus, |j, k| Complex64::new(x[(j, k)], y[(j, k)]));
    PeriodMatrix::new(entries, MEMBERSHIP_TOL).expect("sampled matrix lies in Siegel space by construction")
}

/// An element of Sp_g(ℤ) stored as a 2g×2g integer matrix [[A, B], [C, D]].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct SymplecticMatrix {
    genus: usize,
    // row-major, 2g x 2g
    data: Vec<i64>,
}

impl SymplecticMatrix {
    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || !n.is_multiple_of(2) || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument(format!(
                "symplectic matrix must be 2g x 2g, got {n} rows"
            )));
        }
        let m = SymplecticMatrix {
            genus: n / 2,
            data: rows.into_iter().flatten().collect(),
        };
        if !m.is_symplectic()? {
            return Err(Error::NotSymplectic);
        }
        Ok(m)
    }

    /// [[A, B], [C, D]] from g×g blocks given row-major.
    pub fn from_blocks(genus: usize, a: &[i64], b: &[i64], c: &[i64], d: &[i64]) -> Result<Self> {
        let g = genus;
        if [a, b, c, d].iter().any(|blk| blk.len() != g * g) {
            return Err(Error::InvalidArgument("block has wrong size".into()));
        }
        let n = 2 * g;
        let mut data = vec![0i64; n * n];
        for j in 0..g {
            for k in 0..g {
                data[j * n + k] = a[j * g + k];
                data[j * n + g + k] = b[j * g + k];
                data[(g + j) * n + k] = c[j * g + k];
                data[(g + j) * n + g + k] = d[j * g + k];
            }
        }
        let m = SymplecticMatrix { genus, data };
        if !m.is_symplectic()? {
            return Err(Error::NotSymplectic);
        }
        Ok(m)
    }

    pub fn identity(genus: usize) -> Self {
        let n = 2 * genus;
        let data = (0..n * n).map(|i| i64::from(i / n == i % n)).collect();
        SymplecticMatrix { genus, data }
    }

    /// The standard form J = [[0, I], [−I, 0]].
    pub fn standard_form(genus: usize) -> Self {
        let g = genus;
        let n = 2 * g;
        let mut data = vec![0i64; n * n];
        for j in 0..g {
            data[j * n + g + j] = 1;
            data[(g + j) * n + j] = -1;
        }
        SymplecticMatrix { genus, data }
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn dim(&self) -> usize {
        2 * self.genus
    }

    pub fn get(&self, j: usize, k: usize) -> i64 {
        self.data[j * self.dim() + k]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.dim()).map(|r| r.to_vec()).collect()
    }

    fn block(&self, row: usize, col: usize) -> DMatrix<Complex64> {
        let g = self.genus;
        DMatrix::from_fn(g, g, |j, k| Complex64::new(self.get(row * g + j, col * g + k) as f64, 0.0))
    }

    pub fn checked_mul(&self, rhs: &SymplecticMatrix) -> Result<SymplecticMatrix> {
        if self.genus != rhs.genus {
            return Err(Error::GenusMismatch {
                expected: self.genus,
                actual: rhs.genus,
            });
        }
        let n = self.dim();
        Ok(SymplecticMatrix {
            genus: self.genus,
            data: mat_mul(&self.data, &rhs.data, n)?,
        })
    }

    pub fn transpose(&self) -> SymplecticMatrix {
        let n = self.dim();
        let data = (0..n * n).map(|i| self.data[(i % n) * n + i / n]).collect();
        SymplecticMatrix { genus: self.genus, data }
    }

    /// Mᵀ J M = J in exact integer arithmetic.
    pub fn is_symplectic(&self) -> Result<bool> {
        let n = self.dim();
        let j = SymplecticMatrix::standard_form(self.genus);
        let mt = self.transpose();
        let lhs = mat_mul(&mat_mul(&mt.data, &j.data, n)?, &self.data, n)?;
        Ok(lhs == j.data)
    }

    /// M ≡ I (mod 2).
    pub fn is_level_two(&self) -> bool {
        let id = SymplecticMatrix::identity(self.genus);
        self.data.iter().zip(&id.data).all(|(a, b)| (a - b).rem_euclid(2) == 0)
    }

    pub fn negated(&self) -> SymplecticMatrix {
        SymplecticMatrix {
            genus: self.genus,
            data: self.data.iter().map(|x| -x).collect(),
        }
    }
}

impl TryFrom<Vec<Vec<i64>>> for SymplecticMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self> {
        SymplecticMatrix::from_rows(rows)
    }
}

impl From<SymplecticMatrix> for Vec<Vec<i64>> {
    fn from(m: SymplecticMatrix) -> Self {
        m.rows()
    }
}

fn mat_mul(a: &[i64], b: &[i64], n: usize) -> Result<Vec<i64>> {
    let mut out = vec![0i64; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0 {
                continue;
            }
            for j in 0..n {
                let prod = aik.checked_mul(b[k * n + j]).ok_or(Error::Overflow)?;
                out[i * n + j] = out[i * n + j].checked_add(prod).ok_or(Error::Overflow)?;
            }
        }
    }
    Ok(out)
}

/// Block embedding Sp_{g₁}(ℤ) × ··· → Sp_{g₁+···}(ℤ) compatible with
/// [`block_sum`].
pub fn symplectic_block_sum(parts: &[SymplecticMatrix]) -> Result<SymplecticMatrix> {
    if parts.is_empty() {
        return Err(Error::InvalidArgument("block sum of an empty list".into()));
    }
    let g: usize = parts.iter().map(|p| p.genus).sum();
    let mut blocks = [vec![0i64; g * g], vec![0i64; g * g], vec![0i64; g * g], vec![0i64; g * g]];
    let mut offset = 0;
    for p in parts {
        let h = p.genus;
        for (bi, blk) in blocks.iter_mut().enumerate() {
            let (r, c) = (bi / 2, bi % 2);
            for j in 0..h {
                for k in 0..h {
                    blk[(offset + j) * g + offset + k] = p.get(r * h + j, c * h + k);
                }
            }
        }
        offset += h;
    }
    SymplecticMatrix::from_blocks(g, &blocks[0], &blocks[1], &blocks[2], &blocks[3])
}

/// M·Ω = (AΩ + B)(CΩ + D)⁻¹.
pub fn act(m: &SymplecticMatrix, omega: &PeriodMatrix) -> Result<PeriodMatrix> {
    act_with_tol(m, omega, MEMBERSHIP_TOL)
}

pub fn act_with_tol(m: &SymplecticMatrix, omega: &PeriodMatrix, tol: f64) -> Result<PeriodMatrix> {
    if m.genus() != omega.genus() {
        return Err(Error::GenusMismatch {
            expected: m.genus(),
            actual: omega.genus(),
        });
    }
    let om = omega.entries();
    let num = m.block(0, 0) * om + m.block(0, 1);
    let den = m.block(1, 0) * om + m.block(1, 1);
    let scale = den.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let lu = den.clone().lu();
    let det_abs = lu.determinant().norm();
    if !(det_abs > 1e-12 * scale.powi(den.nrows() as i32)) {
        return Err(Error::SingularDenominator { det_abs });
    }
    let inv = lu.try_inverse().ok_or(Error::SingularDenominator { det_abs })?;
    let result = num * inv;
    // the product is symmetric up to rounding; allow residual relative to magnitude
    let mag = result.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let sym = (&result + result.transpose()).map(|z| z * 0.5);
    if symmetry_residual(&result) > 1e-8 * mag {
        return Err(Error::NotInSiegelSpace {
            invariant: "image is not symmetric".into(),
        });
    }
    PeriodMatrix::new(sym, tol)
}

/// Generators of Sp_g(ℤ): block translations Ω ↦ Ω ± S for the elementary
/// symmetric S, the form J, and the conjugations Ω ↦ UΩUᵀ for elementary
/// U = I ± E_jk.
pub fn generators(genus: usize) -> Result<Vec<SymplecticMatrix>> {
    if genus == 0 || genus > 4 {
        return Err(Error::InvalidArgument(format!("generators are provided for 1 <= g <= 4, got {genus}")));
    }
    let g = genus;
    let id: Vec<i64> = (0..g * g).map(|i| i64::from(i / g == i % g)).collect();
    let zero = vec![0i64; g * g];
    let mut out = Vec::new();
    for j in 0..g {
        for k in j..g {
            for sign in [1i64, -1] {
                let mut s = zero.clone();
                s[j * g + k] = sign;
                s[k * g + j] = sign;
                out.push(SymplecticMatrix::from_blocks(g, &id, &s, &zero, &id)?);
            }
        }
    }
    out.push(SymplecticMatrix::standard_form(g));
    for j in 0..g {
        for k in 0..g {
            if j == k {
                continue;
            }
            for sign in [1i64, -1] {
                let mut u = id.clone();
                u[j * g + k] = sign;
                // (Uᵀ)⁻¹ for U = I + sE_jk is I − sE_kj
                let mut u_inv_t = id.clone();
                u_inv_t[k * g + j] = -sign;
                out.push(SymplecticMatrix::from_blocks(g, &u, &zero, &zero, &u_inv_t)?);
            }
        }
    }
    Ok(out)
}

/// Product of `length` generators drawn uniformly from [`generators`].
pub fn random_word(genus: usize, length: usize, seed: u64) -> Result<SymplecticMatrix> {
    let mut rng = seeded_rng(seed);
    random_word_with(genus, length, &mut rng)
}

pub fn random_word_with<R: Rng + ?Sized>(genus: usize, length: usize, rng: &mut R) -> Result<SymplecticMatrix> {
    let gens = generators(genus)?;
    let mut word = SymplecticMatrix::identity(genus);
    for _ in 0..length {
        let pick = rng.random_range(0..gens.len());
        word = word.checked_mul(&gens[pick])?;
    }
    Ok(word)
}

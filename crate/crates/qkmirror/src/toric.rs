//! Toric data: ingestion, validation, the rank-2 normal form, and
//! intersection numbers by iterated residues.
//!
//! A model is given by the integer matrix of its moment map together with
//! the positive-orthant chamber. [`validate`] decides compactness (the cone
//! of the columns lies in a half-space), smoothness (every basis subset
//! whose cone meets the chamber has determinant +-1) and the Fano condition
//! (the column sum lies in the open chamber), all in exact integer
//! arithmetic. [`normalize_rank2`] carries a validated rank-2 matrix to the
//! normal form
//!
//! ```text
//!   ( 1 ... 1  0  -a_1 ... -a_k )
//!   ( 0 ... 0  1   1   ...  1   )
//! ```
//!
//! by a determinant +-1 integer row transformation and a column
//! permutation, both recorded in the report. Rank-1 models (N copies of the
//! column (1), projective space P^{N-1}) are supported as a degenerate mode.
//!
//! Intersection numbers are computed by the iterated residue
//! Res_{y=0} Res_{x=0} f(x,y) dx dy / (x^N y (y - a_1 x)...(y - a_k x)),
//! implemented as exact coefficient extraction: each 1/(y - a_j x) expands
//! as sum_{m>=0} a_j^m x^m y^{-m-1}, so a monomial x^u y^v contributes the
//! complete homogeneous symmetric value h_{N-1-u}(a) exactly when
//! u + v = dim X and u <= N - 1.

use crate::algebra::{build_algebra, AlgebraElement, KWord};
use crate::error::Error;
use crate::scalar::{rational_string, Rational, Scalar};
use crate::Result;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Chamber of regular values; only the positive orthant is supported,
/// matching the rank-2 normal form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Chamber {
    #[default]
    #[serde(rename = "positive_orthant")]
    PositiveOrthant,
}

/// Integer moment-map matrix (rows index torus factors, columns the
/// vectors alpha_j) together with the chamber.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentData {
    matrix: Vec<Vec<i64>>,
    chamber: Chamber,
}

impl MomentData {
    pub fn new(matrix: Vec<Vec<i64>>, chamber: Chamber) -> Result<Self> {
        let r = matrix.len();
        if r == 0 || r > 2 {
            return Err(Error::UnsupportedRank(r));
        }
        let n = matrix[0].len();
        if matrix.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument("ragged moment matrix".into()));
        }
        if n < r {
            return Err(Error::InvalidArgument(format!(
                "need at least r = {r} columns, got {n}"
            )));
        }
        for j in 0..n {
            if matrix.iter().all(|row| row[j] == 0) {
                return Err(Error::ZeroColumn(j));
            }
        }
        Ok(MomentData { matrix, chamber })
    }

    pub fn rank(&self) -> usize {
        self.matrix.len()
    }

    pub fn n_columns(&self) -> usize {
        self.matrix[0].len()
    }

    /// Column j as a (first-row, second-row) pair; the second entry is 0
    /// for rank-1 data.
    pub fn column(&self, j: usize) -> (i64, i64) {
        let x = self.matrix[0][j];
        let y = if self.rank() == 2 {
            self.matrix[1][j]
        } else {
            0
        };
        (x, y)
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn chamber(&self) -> Chamber {
        self.chamber
    }
}

/// Validation outcome. `fano` is only reported true when the model is also
/// compact and smooth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub compact: bool,
    pub smooth: bool,
    pub fano: bool,
    pub c1: Vec<i64>,
    pub failure_witness: Option<String>,
}

/// Decide compact / smooth / Fano for a moment matrix with the
/// positive-orthant chamber.
pub fn validate(data: &MomentData) -> Result<ValidationReport> {
    let r = data.rank();
    let n = data.n_columns();
    let mut witness = None;

    let compact = match r {
        1 => {
            let signs_pos = (0..n).all(|j| data.matrix[0][j] > 0);
            let signs_neg = (0..n).all(|j| data.matrix[0][j] < 0);
            if !(signs_pos || signs_neg) {
                witness = Some("cone spans the whole line".into());
            }
            signs_pos || signs_neg
        }
        2 => {
            // the cone lies in a half-space iff some rotated column normal
            // has nonnegative pairing with every column
            let mut found = false;
            'outer: for j in 0..n {
                let (x, y) = data.column(j);
                for c in [(-y, x), (y, -x)] {
                    if (0..n).all(|i| {
                        let (u, v) = data.column(i);
                        c.0 * u + c.1 * v >= 0
                    }) {
                        found = true;
                        break 'outer;
                    }
                }
            }
            if !found {
                witness = Some("no half-space contains the cone".into());
            }
            found
        }
        r => return Err(Error::UnsupportedRank(r)),
    };

    let smooth = match r {
        1 => {
            let mut ok = true;
            for j in 0..n {
                let a = data.matrix[0][j];
                if a > 0 && a != 1 {
                    ok = false;
                    witness.get_or_insert(format!("column {{{j}}} has determinant {a}"));
                    break;
                }
            }
            ok
        }
        _ => {
            let mut ok = true;
            'pairs: for i in 0..n {
                for j in (i + 1)..n {
                    let u = data.column(i);
                    let v = data.column(j);
                    let det = u.0 * v.1 - u.1 * v.0;
                    if det == 0 {
                        continue;
                    }
                    if cone_meets_open_orthant(u, v) && det.abs() != 1 {
                        ok = false;
                        witness
                            .get_or_insert(format!("columns {{{i},{j}}} have determinant {det}"));
                        break 'pairs;
                    }
                }
            }
            ok
        }
    };

    let c1: Vec<i64> = (0..r)
        .map(|i| (0..n).map(|j| data.matrix[i][j]).sum())
        .collect();
    let fano_raw = c1.iter().all(|&c| c > 0);
    let fano = fano_raw && compact && smooth;

    Ok(ValidationReport {
        compact,
        smooth,
        fano,
        c1,
        failure_witness: witness,
    })
}

/// Does Cone(u, v) intersect the open positive quadrant?
fn cone_meets_open_orthant(u: (i64, i64), v: (i64, i64)) -> bool {
    if (u.0 > 0 && u.1 > 0) || (v.0 > 0 && v.1 > 0) {
        return true;
    }
    // strictly interior points are u + mu v, mu > 0, up to scale
    ray_combination_feasible(u, v) || ray_combination_feasible(v, u)
}

/// Is there mu > 0 with a + mu b in the open quadrant? Exact rational
/// interval arithmetic on the two coordinate constraints.
fn ray_combination_feasible(a: (i64, i64), b: (i64, i64)) -> bool {
    // feasible interval (lo, hi) for mu, starting from (0, inf)
    let mut lo = (0i64, 1i64); // fraction lo.0/lo.1, lower bound (open)
    let mut hi: Option<(i64, i64)> = None; // None = +inf
    for (ac, bc) in [(a.0, b.0), (a.1, b.1)] {
        if bc > 0 {
            // mu > -ac/bc
            let cand = (-ac, bc);
            if frac_lt(&lo, &cand) {
                lo = cand;
            }
        } else if bc < 0 {
            // mu < ac/(-bc)
            let cand = (ac, -bc);
            match hi {
                None => hi = Some(cand),
                Some(h) if frac_lt(&cand, &h) => hi = Some(cand),
                _ => {}
            }
        } else if ac <= 0 {
            return false;
        }
    }
    match hi {
        None => true,
        Some(h) => frac_lt(&lo, &h),
    }
}

/// a/b < c/d for positive denominators.
fn frac_lt(a: &(i64, i64), c: &(i64, i64)) -> bool {
    debug_assert!(a.1 > 0 && c.1 > 0);
    a.0 * c.1 < c.0 * a.1
}

/// A model in the rank-2 normal form (or rank-1 degenerate mode).
///
/// Rank 2: the column (1,0) repeated N times, then (0,1), then the columns
/// (-a_j, 1); the a-list is kept sorted descending so the normal form is
/// canonical. Rank 1: N copies of the column (1), the projective space
/// P^{N-1}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankTwoModel {
    rank: u8,
    n_repeat: usize,
    a: Vec<i64>,
}

impl RankTwoModel {
    pub fn rank2(n_repeat: usize, mut a: Vec<i64>) -> Result<Self> {
        if n_repeat == 0 {
            return Err(Error::InvalidArgument("N must be positive".into()));
        }
        if a.iter().any(|&x| x < 0) {
            return Err(Error::InvalidArgument("a_j must be nonnegative".into()));
        }
        a.sort_unstable_by(|x, y| y.cmp(x));
        Ok(RankTwoModel {
            rank: 2,
            n_repeat,
            a,
        })
    }

    pub fn rank1(n_repeat: usize) -> Result<Self> {
        if n_repeat == 0 {
            return Err(Error::InvalidArgument("N must be positive".into()));
        }
        Ok(RankTwoModel {
            rank: 1,
            n_repeat,
            a: Vec::new(),
        })
    }

    pub fn rank(&self) -> usize {
        self.rank as usize
    }

    /// Multiplicity of the repeated first column.
    pub fn n_repeat(&self) -> usize {
        self.n_repeat
    }

    /// The twist list a_1 >= ... >= a_k.
    pub fn a(&self) -> &[i64] {
        &self.a
    }

    pub fn k(&self) -> usize {
        self.a.len()
    }

    /// Number of moment-matrix columns.
    pub fn n_columns(&self) -> usize {
        match self.rank {
            1 => self.n_repeat,
            _ => self.n_repeat + self.a.len() + 1,
        }
    }

    /// Complex dimension N - 1 + k.
    pub fn dim(&self) -> usize {
        self.n_repeat - 1 + self.a.len()
    }

    /// All columns as (row-1, row-2) pairs (second entry 0 for rank 1).
    pub fn columns(&self) -> Vec<(i64, i64)> {
        match self.rank {
            1 => vec![(1, 0); self.n_repeat],
            _ => {
                let mut cols = vec![(1, 0); self.n_repeat];
                cols.push((0, 1));
                cols.extend(self.a.iter().map(|&aj| (-aj, 1)));
                cols
            }
        }
    }

    /// c1 of the tangent bundle in the p-basis: (N - sum a, k + 1) for
    /// rank 2, (N) for rank 1.
    pub fn c1_vec(&self) -> Vec<i64> {
        match self.rank {
            1 => vec![self.n_repeat as i64],
            _ => vec![
                self.n_repeat as i64 - self.a.iter().sum::<i64>(),
                self.a.len() as i64 + 1,
            ],
        }
    }

    /// Degrees m_i = sum_j m_{ij} of the Novikov variables (equals c1).
    pub fn m_degrees(&self) -> Vec<i64> {
        self.c1_vec()
    }

    pub fn fano(&self) -> bool {
        self.c1_vec().iter().all(|&c| c > 0)
    }

    pub fn to_moment_data(&self) -> MomentData {
        let cols = self.columns();
        let matrix = match self.rank {
            1 => vec![cols.iter().map(|c| c.0).collect()],
            _ => vec![
                cols.iter().map(|c| c.0).collect(),
                cols.iter().map(|c| c.1).collect(),
            ],
        };
        MomentData::new(matrix, Chamber::PositiveOrthant).expect("normal form is valid data")
    }

    /// Short display name like "(N=3, a=[1])" or "P^2".
    pub fn label(&self) -> String {
        match self.rank {
            1 => format!("P^{}", self.n_repeat - 1),
            _ => format!("(N={}, a={:?})", self.n_repeat, self.a),
        }
    }
}

/// Outcome of [`normalize_rank2`]: the normal-form model, the GL_2(Z) row
/// transformation that was applied, and the column permutation (entry i is
/// the input column placed at normal position i).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalizeReport {
    pub model: RankTwoModel,
    pub row_transform: [[i64; 2]; 2],
    pub column_permutation: Vec<usize>,
}

/// Carry a compact + smooth rank-2 moment matrix to the normal form.
///
/// The chamber is the declared positive orthant when that orthant is a
/// chamber of the given matrix (boundary rays present among the columns and
/// no column ray strictly inside); otherwise the matrix is assumed to be a
/// transformed model and the chamber is located as the one containing
/// c1 = sum of the columns, which pins it down exactly for Fano models.
pub fn normalize_rank2(data: &MomentData) -> Result<NormalizeReport> {
    if data.rank() != 2 {
        return Err(Error::NotRankTwoNormalizable(format!(
            "rank {} input",
            data.rank()
        )));
    }
    let report = validate(data)?;
    if !(report.compact && report.smooth) {
        return Err(Error::UnvalidatedModel(
            report
                .failure_witness
                .unwrap_or_else(|| "not compact or not smooth".into()),
        ));
    }
    let n = data.n_columns();
    let cols: Vec<(i64, i64)> = (0..n).map(|j| data.column(j)).collect();

    let (c1g, c2g) = find_chamber_generators(&cols)?;
    let det = c1g.0 * c2g.1 - c1g.1 * c2g.0;
    if det.abs() != 1 {
        return Err(Error::NotRankTwoNormalizable(format!(
            "chamber generators {c1g:?}, {c2g:?} have determinant {det}"
        )));
    }
    // A = (C1 | C2)^{-1}; with det = +-1 this is det * [[c2y, -c2x], [-c1y, c1x]]
    let a_rows = [[c2g.1 * det, -c2g.0 * det], [-c1g.1 * det, c1g.0 * det]];
    let apply = |m: &[[i64; 2]; 2], c: (i64, i64)| -> (i64, i64) {
        (m[0][0] * c.0 + m[0][1] * c.1, m[1][0] * c.0 + m[1][1] * c.1)
    };
    let transformed: Vec<(i64, i64)> = cols.iter().map(|&c| apply(&a_rows, c)).collect();

    // classify columns of the transformed matrix
    let mut e1 = Vec::new(); // (1, 0)
    let mut e2 = Vec::new(); // (0, 1)
    let mut a_type = Vec::new(); // (-a, 1), a > 0
    let mut b_type = Vec::new(); // (1, -b), b > 0
    for (j, &(x, y)) in transformed.iter().enumerate() {
        match (x, y) {
            (1, 0) => e1.push(j),
            (0, 1) => e2.push(j),
            (x, 1) if x < 0 => a_type.push((j, -x)),
            (1, y) if y < 0 => b_type.push((j, -y)),
            other => {
                return Err(Error::NotRankTwoNormalizable(format!(
                    "column {j} = {other:?} fits no normal-form type"
                )))
            }
        }
    }
    if !a_type.is_empty() && !b_type.is_empty() {
        return Err(Error::NotRankTwoNormalizable(
            "mixed column types (-a,1) and (1,-b)".into(),
        ));
    }
    let swap = !b_type.is_empty() || (a_type.is_empty() && e2.len() > e1.len());
    let (row_transform, e1, e2, a_cols) = if swap {
        let swapped = [[a_rows[1][0], a_rows[1][1]], [a_rows[0][0], a_rows[0][1]]];
        let b_as_a: Vec<(usize, i64)> = b_type;
        (swapped, e2, e1, b_as_a)
    } else {
        (a_rows, e1, e2, a_type)
    };
    if e2.is_empty() {
        return Err(Error::NotRankTwoNormalizable(
            "no column generates the second chamber ray".into(),
        ));
    }
    let n_repeat = e1.len();
    if n_repeat == 0 {
        return Err(Error::NotRankTwoNormalizable(
            "no column generates the first chamber ray".into(),
        ));
    }

    // a-list: explicit (-a,1) columns plus a zero for every extra (0,1)
    let mut a_entries: Vec<(usize, i64)> = a_cols;
    for &j in e2.iter().skip(1) {
        a_entries.push((j, 0));
    }
    a_entries.sort_by(|l, r| r.1.cmp(&l.1).then(l.0.cmp(&r.0)));

    let mut permutation = Vec::with_capacity(n);
    permutation.extend(e1.iter().copied());
    permutation.push(e2[0]);
    permutation.extend(a_entries.iter().map(|&(j, _)| j));

    let model = RankTwoModel::rank2(n_repeat, a_entries.iter().map(|&(_, a)| a).collect())?;
    Ok(NormalizeReport {
        model,
        row_transform,
        column_permutation: permutation,
    })
}

/// Find the columns generating the chamber boundary rays.
///
/// The chamber of a transformed matrix cannot be read off the declared
/// "positive_orthant" tag, so the Fano route comes first: the chamber is
/// the unique one containing c1 = sum of the columns, whose boundary rays
/// are the tightest column rays around c1. When c1 does not locate an
/// interior chamber (non-Fano input), the declared orthant is used if it
/// is a chamber of the matrix (both boundary rays among the columns,
/// nothing strictly inside).
fn find_chamber_generators(cols: &[(i64, i64)]) -> Result<((i64, i64), (i64, i64))> {
    let c1 = cols
        .iter()
        .fold((0i64, 0i64), |acc, c| (acc.0 + c.0, acc.1 + c.1));
    let cross = |u: (i64, i64), v: (i64, i64)| u.0 * v.1 - u.1 * v.0;
    let on_c1_ray = cols
        .iter()
        .any(|&c| cross(c, c1) == 0 && c.0 * c1.0 + c.1 * c1.1 > 0);
    if !on_c1_ray {
        // compactness puts all columns in a half-plane, so the cross
        // comparisons below induce a consistent angular order
        let mut before: Option<(i64, i64)> = None; // tightest ray clockwise of c1
        let mut after: Option<(i64, i64)> = None;
        for &c in cols {
            if cross(c, c1) > 0 {
                before = Some(match before {
                    Some(b) if cross(b, c) > 0 => c,
                    Some(b) => b,
                    None => c,
                });
            } else if cross(c1, c) > 0 {
                after = Some(match after {
                    Some(a) if cross(c, a) > 0 => c,
                    Some(a) => a,
                    None => c,
                });
            }
        }
        if let (Some(b), Some(a)) = (before, after) {
            if (cross(b, a)).abs() == 1 {
                return Ok((b, a));
            }
            // c1 singles out a non-smooth chamber: the input must be a
            // declared non-Fano normal form, handled below
        }
    }
    // fallback: the declared orthant itself, when it is a chamber
    let on_e1 = cols.iter().find(|c| c.0 > 0 && c.1 == 0);
    let on_e2 = cols.iter().find(|c| c.0 == 0 && c.1 > 0);
    let inside = cols.iter().any(|c| c.0 > 0 && c.1 > 0);
    if let (Some(&u), Some(&v)) = (on_e1, on_e2) {
        if !inside {
            return Ok((u, v));
        }
    }
    Err(Error::NotRankTwoNormalizable(
        "chamber cannot be inferred: c1 does not locate a smooth chamber and the declared \
         orthant is not a chamber"
            .into(),
    ))
}

/// A polynomial class in the divisor variables, prior to reduction:
/// list of ((power of p1, power of p2), coefficient).
#[derive(Debug, Clone, Default)]
pub struct RawPoly(pub Vec<((u32, u32), Rational)>);

impl RawPoly {
    pub fn monomial(u: u32, v: u32) -> Self {
        RawPoly(vec![((u, v), <Rational as Scalar>::one())])
    }
}

/// Complete homogeneous symmetric polynomial h_m(a).
fn complete_homogeneous(m: usize, a: &[i64]) -> Rational {
    if m == 0 {
        return <Rational as Scalar>::one();
    }
    if a.is_empty() {
        return <Rational as Scalar>::zero();
    }
    let mut h = vec![<Rational as Scalar>::zero(); m + 1];
    h[0] = <Rational as Scalar>::one();
    for &aj in a {
        let ar = <Rational as Scalar>::from_int(aj);
        for i in 1..=m {
            let add = ar.clone() * h[i - 1].clone();
            h[i] = h[i].clone() + add;
        }
    }
    h[m].clone()
}

/// Iterated-residue integral of a raw polynomial class: exact coefficient
/// extraction against the denominator x^N y (y - a_1 x) ... (y - a_k x)
/// (rank 1: x^N).
pub fn integrate_poly(model: &RankTwoModel, poly: &RawPoly) -> Rational {
    let nn = model.n_repeat();
    let dim = model.dim() as u32;
    let mut total = <Rational as Scalar>::zero();
    for ((u, v), c) in &poly.0 {
        if model.rank() == 1 {
            if *v == 0 && *u == nn as u32 - 1 {
                total += c.clone();
            }
            continue;
        }
        if u + v == dim && *u < nn as u32 {
            let h = complete_homogeneous((nn as u32 - 1 - u) as usize, model.a());
            total += c.clone() * h;
        }
    }
    total
}

/// Integral of a reduced cohomology class: the coefficient of the top
/// basis monomial p1^{N-1} p2^k (whose integral is 1), everything of lower
/// degree integrating to 0.
pub fn integrate(element: &AlgebraElement<Rational>) -> Rational {
    element.top_coefficient()
}

/// Poincare pairing matrix M[u][v] = integral of basis_u * basis_v, in the
/// monomial basis order of the algebra.
pub fn pairing_matrix(model: &RankTwoModel) -> Result<Vec<Vec<Rational>>> {
    let algebra = build_algebra::<Rational>(model)?;
    let b = algebra.basis_len();
    let mut m = vec![vec![<Rational as Scalar>::zero(); b]; b];
    for i in 0..b {
        let ei = AlgebraElement::basis(&algebra, i);
        for j in 0..b {
            let ej = AlgebraElement::basis(&algebra, j);
            m[i][j] = ei.mul(&ej).top_coefficient();
        }
    }
    Ok(m)
}

/// Euler pairing chi(E, F) = integral of ch(E) ch(F) Td(TX), exact.
pub fn euler_pairing(model: &RankTwoModel, e: &KWord, f: &KWord) -> Result<Rational> {
    let algebra = build_algebra::<Rational>(model)?;
    let che = algebra.chern_character(e)?;
    let chf = algebra.chern_character(f)?;
    let td = algebra.todd_class()?;
    Ok(che.mul(&chf).mul(&td).top_coefficient())
}

/// Exact determinant by fraction-free Gaussian elimination, used by the
/// nondegeneracy checks on the pairing matrix.
pub fn determinant(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut det = <Rational as Scalar>::one();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero());
        let Some(p) = pivot else {
            return <Rational as Scalar>::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let inv = a[col][col].clone().recip_checked().unwrap();
        det *= a[col][col].clone();
        for r in (col + 1)..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone() * inv.clone();
            for c in col..n {
                let sub = factor.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - sub;
            }
        }
    }
    det
}

/// Serialize a rational matrix with "num/den" entries.
pub fn matrix_strings(m: &[Vec<Rational>]) -> Vec<Vec<String>> {
    m.iter()
        .map(|row| row.iter().map(rational_string).collect())
        .collect()
}

/// Arc-wrapped exact algebra for a model, the common entry point for the
/// higher modules.
pub fn exact_algebra(
    model: &RankTwoModel,
) -> Result<Arc<crate::algebra::NilpotentAlgebra<Rational>>> {
    build_algebra::<Rational>(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational_as_i64;

    fn blp3_data() -> MomentData {
        MomentData::new(
            vec![vec![1, 1, 1, 0, -1], vec![0, 0, 0, 1, 1]],
            Chamber::PositiveOrthant,
        )
        .unwrap()
    }

    #[test]
    fn validate_blp3() {
        let r = validate(&blp3_data()).unwrap();
        assert!(r.compact && r.smooth && r.fano);
        assert_eq!(r.c1, vec![2, 2]);
    }

    #[test]
    fn validate_noncompact_line() {
        let data = MomentData::new(vec![vec![1, -1]], Chamber::PositiveOrthant).unwrap();
        let r = validate(&data).unwrap();
        assert!(!r.compact);
    }

    #[test]
    fn validate_nonfano_family() {
        // N = 1, a = [2]: Fano criterion N > sum a fails
        let m = RankTwoModel::rank2(1, vec![2]).unwrap();
        let r = validate(&m.to_moment_data()).unwrap();
        assert!(r.compact && r.smooth);
        assert!(!r.fano);
        assert!(!m.fano());
    }

    #[test]
    fn validate_rejects_zero_column_and_high_rank() {
        assert!(matches!(
            MomentData::new(vec![vec![1, 0], vec![1, 0]], Chamber::PositiveOrthant),
            Err(Error::ZeroColumn(1))
        ));
        assert!(matches!(
            MomentData::new(vec![vec![1], vec![1], vec![1]], Chamber::PositiveOrthant),
            Err(Error::UnsupportedRank(3))
        ));
    }

    #[test]
    fn validate_nonsmooth_weighted() {
        // weighted projective-like: column (2,0) with (0,1)
        let data = MomentData::new(vec![vec![2, 0], vec![0, 1]], Chamber::PositiveOrthant).unwrap();
        let r = validate(&data).unwrap();
        assert!(!r.smooth);
        assert!(r.failure_witness.is_some());
    }

    #[test]
    fn normalize_blp3() {
        let rep = normalize_rank2(&blp3_data()).unwrap();
        assert_eq!(rep.model, RankTwoModel::rank2(3, vec![1]).unwrap());
        assert_eq!(rep.row_transform, [[1, 0], [0, 1]]);
    }

    #[test]
    fn normalize_row_swapped_and_shuffled() {
        // rows swapped and columns shuffled version of Bl_pt P^3:
        // swap of [[1,1,1,0,-1],[0,0,0,1,1]] has columns
        // (0,1) x3, (1,0), (1,-1); shuffle them
        let swapped = MomentData::new(
            vec![vec![0, 1, 0, 1, 0], vec![1, -1, 1, 0, 1]],
            Chamber::PositiveOrthant,
        )
        .unwrap();
        let rep = normalize_rank2(&swapped).unwrap();
        assert_eq!(rep.model, RankTwoModel::rank2(3, vec![1]).unwrap());
        // the row transform must have determinant +-1
        let t = rep.row_transform;
        assert_eq!((t[0][0] * t[1][1] - t[0][1] * t[1][0]).abs(), 1);
        // and the recorded permutation must place the (1,0)-type columns first
        assert_eq!(rep.column_permutation.len(), 5);
    }

    #[test]
    fn normalize_point() {
        let data = MomentData::new(vec![vec![1, 0], vec![0, 1]], Chamber::PositiveOrthant).unwrap();
        let rep = normalize_rank2(&data).unwrap();
        assert_eq!(rep.model, RankTwoModel::rank2(1, vec![]).unwrap());
    }

    #[test]
    fn normalize_gl2_orbit_constant() {
        // random GL_2(Z) row action + column shuffle is constant per model
        let models = [
            RankTwoModel::rank2(3, vec![1]).unwrap(),
            RankTwoModel::rank2(2, vec![1]).unwrap(),
            RankTwoModel::rank2(2, vec![1, 0]).unwrap(),
            RankTwoModel::rank2(3, vec![0]).unwrap(),
        ];
        let mut state = 0xc0ffee1234567890u64;
        let mut rnd = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 33) as i64
        };
        for model in &models {
            for _ in 0..100 {
                // random unimodular matrix from elementary operations
                let mut a = [[1i64, 0], [0, 1]];
                for _ in 0..6 {
                    let s = rnd().rem_euclid(3) - 1;
                    if rnd() % 2 == 0 {
                        // row1 += s*row2
                        a[0][0] += s * a[1][0];
                        a[0][1] += s * a[1][1];
                    } else {
                        a[1][0] += s * a[0][0];
                        a[1][1] += s * a[0][1];
                    }
                    if rnd() % 5 == 0 {
                        a.swap(0, 1);
                    }
                }
                let cols = model.columns();
                let mut transformed: Vec<(i64, i64)> = cols
                    .iter()
                    .map(|&(x, y)| (a[0][0] * x + a[0][1] * y, a[1][0] * x + a[1][1] * y))
                    .collect();
                // Fisher-Yates shuffle
                for i in (1..transformed.len()).rev() {
                    let j = (rnd().rem_euclid(i as i64 + 1)) as usize;
                    transformed.swap(i, j);
                }
                let data = MomentData::new(
                    vec![
                        transformed.iter().map(|c| c.0).collect(),
                        transformed.iter().map(|c| c.1).collect(),
                    ],
                    Chamber::PositiveOrthant,
                )
                .unwrap();
                let rep = normalize_rank2(&data).unwrap();
                assert_eq!(&rep.model, model, "transform {a:?}");
            }
        }
    }

    #[test]
    fn integrate_poly_examples() {
        let blp3 = RankTwoModel::rank2(3, vec![1]).unwrap();
        // p1^2 p2 -> 1, p1^3 -> 0, p2^3 -> 1
        assert_eq!(
            rational_as_i64(&integrate_poly(&blp3, &RawPoly::monomial(2, 1))),
            Some(1)
        );
        assert_eq!(
            rational_as_i64(&integrate_poly(&blp3, &RawPoly::monomial(3, 0))),
            Some(0)
        );
        assert_eq!(
            rational_as_i64(&integrate_poly(&blp3, &RawPoly::monomial(0, 3))),
            Some(1)
        );
        // F1 = (N=2, a=[1]): p1 p2 -> 1, p2^2 -> 1
        let f1 = RankTwoModel::rank2(2, vec![1]).unwrap();
        assert_eq!(
            rational_as_i64(&integrate_poly(&f1, &RawPoly::monomial(1, 1))),
            Some(1)
        );
        assert_eq!(
            rational_as_i64(&integrate_poly(&f1, &RawPoly::monomial(0, 2))),
            Some(1)
        );
        // P^2 rank-1: p^2 -> 1
        let p2 = RankTwoModel::rank1(3).unwrap();
        assert_eq!(
            rational_as_i64(&integrate_poly(&p2, &RawPoly::monomial(2, 0))),
            Some(1)
        );
        // degree mismatch integrates to zero
        assert_eq!(
            rational_as_i64(&integrate_poly(&blp3, &RawPoly::monomial(1, 1))),
            Some(0)
        );
    }

    #[test]
    fn top_monomial_integrates_to_one() {
        for model in [
            RankTwoModel::rank2(4, vec![2, 1]).unwrap(),
            RankTwoModel::rank2(2, vec![0]).unwrap(),
            RankTwoModel::rank1(4).unwrap(),
        ] {
            let top = if model.rank() == 1 {
                RawPoly::monomial(model.n_repeat() as u32 - 1, 0)
            } else {
                RawPoly::monomial(model.n_repeat() as u32 - 1, model.k() as u32)
            };
            assert_eq!(rational_as_i64(&integrate_poly(&model, &top)), Some(1));
        }
    }

    #[test]
    fn pairing_matrix_p1() {
        let p1 = RankTwoModel::rank1(2).unwrap();
        let m = pairing_matrix(&p1).unwrap();
        let as_int: Vec<Vec<i64>> = m
            .iter()
            .map(|row| row.iter().map(|x| rational_as_i64(x).unwrap()).collect())
            .collect();
        assert_eq!(as_int, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn pairing_matrix_point() {
        let pt = RankTwoModel::rank2(1, vec![]).unwrap();
        let m = pairing_matrix(&pt).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(rational_as_i64(&m[0][0]), Some(1));
    }

    #[test]
    fn pairing_matrix_blp3_nondegenerate() {
        let blp3 = RankTwoModel::rank2(3, vec![1]).unwrap();
        let m = pairing_matrix(&blp3).unwrap();
        assert_eq!(m.len(), 6); // basis size N(k+1) = 3 * 2
        for i in 0..m.len() {
            for j in 0..m.len() {
                assert_eq!(m[i][j], m[j][i]);
            }
        }
        assert!(!determinant(&m).is_zero());
    }

    #[test]
    fn pairing_nondegenerate_all_fano_models() {
        // symmetric with nonzero determinant for every validated Fano
        // model with N <= 6, k <= 3, a_j <= 2
        for n in 1..=6usize {
            for k in 0..=3usize {
                let mut lists = vec![vec![]];
                for _ in 0..k {
                    let mut next = Vec::new();
                    for base in &lists {
                        let start = base.last().copied().unwrap_or(2);
                        for a in 0..=start {
                            let mut l: Vec<i64> = base.clone();
                            l.push(a);
                            next.push(l);
                        }
                    }
                    lists = next;
                }
                for a in lists {
                    let model = RankTwoModel::rank2(n, a).unwrap();
                    if !model.fano() {
                        continue;
                    }
                    let m = pairing_matrix(&model).unwrap();
                    for i in 0..m.len() {
                        for j in 0..m.len() {
                            assert_eq!(m[i][j], m[j][i], "{}", model.label());
                        }
                    }
                    assert!(!determinant(&m).is_zero(), "{}", model.label());
                }
            }
        }
    }

    #[test]
    fn euler_pairing_p1() {
        let p1 = RankTwoModel::rank1(2).unwrap();
        let one = KWord::new(vec![]);
        let p = KWord::generator(0, 1);
        // chi(O, O) = 1
        assert_eq!(
            rational_as_i64(&euler_pairing(&p1, &one, &one).unwrap()),
            Some(1)
        );
        // chi(P1, P1) = -1 (Riemann-Roch for O(-2))
        assert_eq!(
            rational_as_i64(&euler_pairing(&p1, &p, &p).unwrap()),
            Some(-1)
        );
    }

    #[test]
    fn euler_pairing_symmetric() {
        let f1 = RankTwoModel::rank2(2, vec![1]).unwrap();
        let words = [
            KWord::new(vec![]),
            KWord::generator(0, 1),
            KWord::generator(1, -1),
            KWord::new(vec![(0, 2), (1, 1)]),
        ];
        for e in &words {
            for f in &words {
                assert_eq!(
                    euler_pairing(&f1, e, f).unwrap(),
                    euler_pairing(&f1, f, e).unwrap()
                );
            }
        }
    }
}

//! Truncated Novikov-series I-functions (cohomological and K-theoretic),
//! prefactor handling, the Fano I-to-J normalization, and the exact
//! verification of the shared differential / q-difference systems.
//!
//! Series are stored prefactor-stripped: the coefficient of Q^d of the
//! cohomological I-function is
//!
//! ```text
//!   c_d = prod_j  [ prod_{r=-inf}^{0} (alpha_j(p) - r z) ]
//!               / [ prod_{r=-inf}^{alpha_j(d)} (alpha_j(p) - r z) ],
//! ```
//!
//! a finite ratio: 1/prod_{r=1}^{alpha_j(d)} (alpha_j(p) - r z) when
//! alpha_j(d) >= 0, and the polynomial factor
//! prod_{r=alpha_j(d)+1}^{0} (alpha_j(p) - r z) when alpha_j(d) < 0. The
//! K-theoretic coefficients replace alpha_j(p) - r z by 1 - U_j(P) q^r with
//! U_j(P) represented exactly through its Chern-character image
//! exp(-alpha_j(p)), which identifies K(X) (x) Q with the cohomology ring.
//!
//! Stripped operator actions. On the attached K-theoretic series the shift
//! q^{alpha_j(Q dQ)} maps P^{-l(Q)} Q^d v to P^{-l(Q)} U_j(P) q^{alpha_j(d)}
//! Q^d v, because l(q Q_i) = l(Q_i) - 1; so on stripped coefficients it acts
//! as multiplication by U_j(P) q^{alpha_j(d)}. On the attached cohomological
//! series Q_i dQ_i acts on e^{-sum p log Q / z} Q^d as d_i - p_i/z, so
//! alpha_j(Q dQ) acts on stripped coefficients as alpha_j(d) - alpha_j(p)/z.
//! Both residuals vanish identically for the I-functions, and are checked
//! exactly in rational arithmetic at fixed rational q (polynomial identity
//! testing: the coefficients are rational functions of bounded degree, so
//! agreement at a few rational points certifies the identity).

use crate::algebra::{AlgebraElement, NilpotentAlgebra};
use crate::error::Error;
use crate::scalar::Scalar;
use crate::toric::RankTwoModel;
use crate::Result;
use std::sync::Arc;

/// A Novikov degree (d1, d2); d2 = 0 throughout for rank-1 models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Deg {
    pub d1: u32,
    pub d2: u32,
}

impl Deg {
    pub fn total(&self) -> u32 {
        self.d1 + self.d2
    }

    /// alpha_j(d) for a moment-matrix column.
    pub fn alpha(&self, column: (i64, i64)) -> i64 {
        column.0 * self.d1 as i64 + column.1 * self.d2 as i64
    }

    fn minus_unit(&self, i: usize) -> Option<Deg> {
        match i {
            0 if self.d1 > 0 => Some(Deg {
                d1: self.d1 - 1,
                d2: self.d2,
            }),
            1 if self.d2 > 0 => Some(Deg {
                d1: self.d1,
                d2: self.d2 - 1,
            }),
            _ => None,
        }
    }
}

/// Effective-cone degrees up to total degree `max`, ordered by
/// (total degree, d1): a fixed deterministic order used everywhere.
pub fn effective_degrees(model: &RankTwoModel, max: u32) -> Vec<Deg> {
    let mut out = Vec::new();
    for total in 0..=max {
        if model.rank() == 1 {
            out.push(Deg { d1: total, d2: 0 });
        } else {
            for d1 in 0..=total {
                out.push(Deg { d1, d2: total - d1 });
            }
        }
    }
    out
}

/// Which I-function a series is.
#[derive(Debug, Clone, PartialEq)]
pub enum SeriesKind<S: Scalar> {
    Coh { z: S },
    Kth { q: S },
}

/// Prefactor state of a series.
#[derive(Debug, Clone, PartialEq)]
pub enum Prefactor {
    Stripped,
    /// e^{-sum p_i log(Q_i)/z} attached at the recorded Q values.
    CohAttached {
        q_values: Vec<f64>,
    },
    /// The K-word prod P_i^{b_i} attached (Q_i = q^{b_i} on the q-spiral,
    /// where l(Q_i) = -b_i exactly).
    KthAttached {
        b: Vec<i64>,
    },
}

/// A truncated Novikov series with algebra-valued coefficients.
#[derive(Debug, Clone)]
pub struct NovikovSeries<S: Scalar> {
    algebra: Arc<NilpotentAlgebra<S>>,
    degree: u32,
    terms: Vec<(Deg, AlgebraElement<S>)>,
    kind: SeriesKind<S>,
    prefactor: Prefactor,
}

impl<S: Scalar> NovikovSeries<S> {
    pub fn algebra(&self) -> &Arc<NilpotentAlgebra<S>> {
        &self.algebra
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn kind(&self) -> &SeriesKind<S> {
        &self.kind
    }

    pub fn prefactor(&self) -> &Prefactor {
        &self.prefactor
    }

    pub fn terms(&self) -> &[(Deg, AlgebraElement<S>)] {
        &self.terms
    }

    pub fn coefficient(&self, d: Deg) -> Option<&AlgebraElement<S>> {
        self.terms.iter().find(|(dd, _)| *dd == d).map(|(_, c)| c)
    }

    /// Truncate to a smaller degree (coefficientwise restriction).
    pub fn truncate(&self, max: u32) -> NovikovSeries<S> {
        NovikovSeries {
            algebra: self.algebra.clone(),
            degree: max.min(self.degree),
            terms: self
                .terms
                .iter()
                .filter(|(d, _)| d.total() <= max)
                .cloned()
                .collect(),
            kind: self.kind.clone(),
            prefactor: self.prefactor.clone(),
        }
    }

    /// Map all coefficients into another backend.
    pub fn convert<T: Scalar>(
        &self,
        target: &Arc<NilpotentAlgebra<T>>,
        f: impl Fn(&S) -> T + Copy,
        kind: SeriesKind<T>,
    ) -> NovikovSeries<T> {
        NovikovSeries {
            algebra: target.clone(),
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(d, c)| (*d, c.convert(target, f)))
                .collect(),
            kind,
            prefactor: self.prefactor.clone(),
        }
    }

    fn map_coefficients(&self, f: impl Fn(Deg, &AlgebraElement<S>) -> AlgebraElement<S>) -> Self {
        NovikovSeries {
            algebra: self.algebra.clone(),
            degree: self.degree,
            terms: self.terms.iter().map(|(d, c)| (*d, f(*d, c))).collect(),
            kind: self.kind.clone(),
            prefactor: self.prefactor.clone(),
        }
    }
}

fn require_fano(model: &RankTwoModel) -> Result<()> {
    if !model.fano() {
        return Err(Error::UnvalidatedModel(format!(
            "{} is not Fano; the small I-function normalization assumes it",
            model.label()
        )));
    }
    Ok(())
}

/// Cohomological small I-function, prefactor-stripped, truncated at `max`.
pub fn i_coh<S: Scalar>(
    algebra: &Arc<NilpotentAlgebra<S>>,
    max: u32,
    z: S,
) -> Result<NovikovSeries<S>> {
    require_fano(algebra.model())?;
    if z.is_zero() {
        return Err(Error::InvalidArgument("z = 0".into()));
    }
    let columns = algebra.model().columns();
    let alphas: Vec<AlgebraElement<S>> =
        columns.iter().map(|&c| algebra.alpha_element(c)).collect();
    let mut terms = Vec::new();
    for d in effective_degrees(algebra.model(), max) {
        let mut coeff = AlgebraElement::one(algebra);
        for (j, col) in columns.iter().enumerate() {
            let a = d.alpha(*col);
            if a > 0 {
                for r in 1..=a {
                    let factor =
                        alphas[j].sub(&AlgebraElement::scalar(algebra, S::from_int(r) * z.clone()));
                    let inv = factor.inverse().map_err(|_| {
                        Error::PoleAtDegreeZero(format!(
                            "i_coh factor alpha_{j}(p) - {r} z is not invertible"
                        ))
                    })?;
                    coeff = coeff.mul(&inv);
                }
            } else {
                for r in (a + 1)..=0 {
                    let factor =
                        alphas[j].sub(&AlgebraElement::scalar(algebra, S::from_int(r) * z.clone()));
                    coeff = coeff.mul(&factor);
                }
            }
        }
        terms.push((d, coeff));
    }
    Ok(NovikovSeries {
        algebra: algebra.clone(),
        degree: max,
        terms,
        kind: SeriesKind::Coh { z },
        prefactor: Prefactor::Stripped,
    })
}

/// K-theoretic small I-function, prefactor-stripped, truncated at `max`.
/// Coefficients are Chern-character images; with an exact rational q != 1
/// they are exact K-ring data.
pub fn i_kth<S: Scalar>(
    algebra: &Arc<NilpotentAlgebra<S>>,
    max: u32,
    q: S,
) -> Result<NovikovSeries<S>> {
    require_fano(algebra.model())?;
    if q.is_zero() || q == S::one() {
        return Err(Error::InvalidArgument("q must differ from 0 and 1".into()));
    }
    let columns = algebra.model().columns();
    let chs: Vec<AlgebraElement<S>> = columns
        .iter()
        .map(|&c| algebra.chern_of_column(c))
        .collect::<Result<_>>()?;
    let one = AlgebraElement::one(algebra);
    let mut terms = Vec::new();
    for d in effective_degrees(algebra.model(), max) {
        let mut coeff = one.clone();
        for (j, col) in columns.iter().enumerate() {
            let a = d.alpha(*col);
            if a > 0 {
                for r in 1..=a {
                    let factor = one.sub(&chs[j].scale(&q.powi(r)));
                    let inv = factor.inverse().map_err(|_| {
                        Error::Pole(format!("i_kth scalar denominator 1 - q^{r} vanishes"))
                    })?;
                    coeff = coeff.mul(&inv);
                }
            } else {
                for r in (a + 1)..=0 {
                    let factor = one.sub(&chs[j].scale(&q.powi(r)));
                    coeff = coeff.mul(&factor);
                }
            }
        }
        terms.push((d, coeff));
    }
    Ok(NovikovSeries {
        algebra: algebra.clone(),
        degree: max,
        terms,
        kind: SeriesKind::Kth { q },
        prefactor: Prefactor::Stripped,
    })
}

/// Attach the cohomological prefactor e^{-sum p_i log(Q_i)/z} at numeric
/// Novikov values.
pub fn attach_coh_prefactor(
    series: &NovikovSeries<f64>,
    q_values: &[f64],
) -> Result<NovikovSeries<f64>> {
    let SeriesKind::Coh { z } = series.kind else {
        return Err(Error::InvalidArgument(
            "cohomological series required".into(),
        ));
    };
    if series.prefactor != Prefactor::Stripped {
        return Err(Error::InvalidArgument(
            "series already has a prefactor".into(),
        ));
    }
    if q_values.len() != series.algebra.model().rank() {
        return Err(Error::InvalidArgument("one Q value per Picard rank".into()));
    }
    if q_values.iter().any(|&q| q <= 0.0) {
        return Err(Error::InvalidArgument("Q_i must be positive".into()));
    }
    let pref = coh_prefactor_element(&series.algebra, q_values, z, false)?;
    let mut out = series.map_coefficients(|_, c| c.mul(&pref));
    out.prefactor = Prefactor::CohAttached {
        q_values: q_values.to_vec(),
    };
    Ok(out)
}

/// Remove a previously attached cohomological prefactor.
pub fn strip_coh_prefactor(series: &NovikovSeries<f64>) -> Result<NovikovSeries<f64>> {
    let SeriesKind::Coh { z } = series.kind else {
        return Err(Error::InvalidArgument(
            "cohomological series required".into(),
        ));
    };
    let Prefactor::CohAttached { q_values } = series.prefactor.clone() else {
        return Err(Error::InvalidArgument(
            "series has no cohomological prefactor".into(),
        ));
    };
    let pref = coh_prefactor_element(&series.algebra, &q_values, z, true)?;
    let mut out = series.map_coefficients(|_, c| c.mul(&pref));
    out.prefactor = Prefactor::Stripped;
    Ok(out)
}

fn coh_prefactor_element(
    algebra: &Arc<NilpotentAlgebra<f64>>,
    q_values: &[f64],
    z: f64,
    inverse: bool,
) -> Result<AlgebraElement<f64>> {
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut expo = AlgebraElement::zero(algebra);
    for (i, &qi) in q_values.iter().enumerate() {
        let p = AlgebraElement::generator(algebra, i);
        expo = expo.add(&p.scale(&(sign * qi.ln() / z)));
    }
    expo.exp_nilpotent()
}

/// Attach the K-theoretic prefactor P^{-l(Q)} for Q_i = q^{b_i} on the
/// q-spiral, which is the exact K-word prod P_i^{b_i} (ch-image
/// exp(-sum b_i p_i)); works in any backend since b is integral.
pub fn attach_kth_prefactor<S: Scalar>(
    series: &NovikovSeries<S>,
    b: &[i64],
) -> Result<NovikovSeries<S>> {
    let SeriesKind::Kth { .. } = series.kind else {
        return Err(Error::InvalidArgument("K-theoretic series required".into()));
    };
    if series.prefactor != Prefactor::Stripped {
        return Err(Error::InvalidArgument(
            "series already has a prefactor".into(),
        ));
    }
    if b.len() != series.algebra.model().rank() {
        return Err(Error::InvalidArgument(
            "one spiral exponent per Picard rank".into(),
        ));
    }
    let pref = kth_prefactor_element(&series.algebra, b, false)?;
    let mut out = series.map_coefficients(|_, c| c.mul(&pref));
    out.prefactor = Prefactor::KthAttached { b: b.to_vec() };
    Ok(out)
}

/// Remove a previously attached K-theoretic prefactor.
pub fn strip_kth_prefactor<S: Scalar>(series: &NovikovSeries<S>) -> Result<NovikovSeries<S>> {
    let Prefactor::KthAttached { b } = series.prefactor.clone() else {
        return Err(Error::InvalidArgument(
            "series has no K-theoretic prefactor".into(),
        ));
    };
    let pref = kth_prefactor_element(&series.algebra, &b, true)?;
    let mut out = series.map_coefficients(|_, c| c.mul(&pref));
    out.prefactor = Prefactor::Stripped;
    Ok(out)
}

fn kth_prefactor_element<S: Scalar>(
    algebra: &Arc<NilpotentAlgebra<S>>,
    b: &[i64],
    inverse: bool,
) -> Result<AlgebraElement<S>> {
    let sign = if inverse { 1 } else { -1 };
    let mut expo = AlgebraElement::zero(algebra);
    for (i, &bi) in b.iter().enumerate() {
        let p = AlgebraElement::generator(algebra, i);
        expo = expo.add(&p.scale(&S::from_int(sign * bi)));
    }
    expo.exp_nilpotent()
}

/// Fano normalization J = (1 - q) P^{l(Q)} I: on stripped series this is
/// the scalar factor (1 - q) on every coefficient.
pub fn j_from_i_fano<S: Scalar>(series: &NovikovSeries<S>) -> Result<NovikovSeries<S>> {
    let SeriesKind::Kth { q } = series.kind.clone() else {
        return Err(Error::InvalidArgument("K-theoretic series required".into()));
    };
    let factor = S::one() - q;
    Ok(series.map_coefficients(|_, c| c.scale(&factor)))
}

/// Residual of the q-difference operator with index `i` applied to a
/// stripped K-theoretic series in the exact backend. The contract is that
/// every residual coefficient with d_i >= 1 and total degree <= D vanishes
/// exactly for the I-function.
pub fn qde_residual<S: Scalar>(series: &NovikovSeries<S>, i: usize) -> Result<NovikovSeries<S>> {
    if !S::EXACT {
        return Err(Error::ExactBackendRequired("qde_residual"));
    }
    let SeriesKind::Kth { q } = series.kind.clone() else {
        return Err(Error::InvalidArgument("K-theoretic series required".into()));
    };
    if series.prefactor != Prefactor::Stripped {
        return Err(Error::InvalidArgument("stripped series required".into()));
    }
    let model = series.algebra.model().clone();
    if i >= model.rank() {
        return Err(Error::InvalidArgument(format!(
            "operator index {i} out of range for rank {}",
            model.rank()
        )));
    }
    let algebra = series.algebra.clone();
    let columns = model.columns();
    let chs: Vec<AlgebraElement<S>> = columns
        .iter()
        .map(|&c| algebra.chern_of_column(c))
        .collect::<Result<_>>()?;
    let one = AlgebraElement::one(&algebra);
    let row = |col: (i64, i64)| if i == 0 { col.0 } else { col.1 };

    let apply_factors = |d: Deg, positive: bool, x: &AlgebraElement<S>| -> AlgebraElement<S> {
        let mut acc = x.clone();
        for (j, col) in columns.iter().enumerate() {
            let mij = row(*col);
            let count = if positive { mij } else { -mij };
            if count <= 0 {
                continue;
            }
            let aj = d.alpha(*col);
            for r in 0..count {
                // 1 - q^{alpha_j(d) - r} U_j(P)
                let factor = one.sub(&chs[j].scale(&q.powi(aj - r)));
                acc = acc.mul(&factor);
            }
        }
        acc
    };

    let residual = series.map_coefficients(|d, c| {
        let first = apply_factors(d, true, c);
        let second = match d.minus_unit(i) {
            Some(dm) => match series.coefficient(dm) {
                Some(cm) => apply_factors(dm, false, cm),
                None => AlgebraElement::zero(&algebra),
            },
            None => AlgebraElement::zero(&algebra),
        };
        first.sub(&second)
    });
    Ok(residual)
}

/// Residual of the differential operator with index `i` applied to a
/// stripped cohomological series in the exact backend.
pub fn ode_residual_coh<S: Scalar>(
    series: &NovikovSeries<S>,
    i: usize,
) -> Result<NovikovSeries<S>> {
    if !S::EXACT {
        return Err(Error::ExactBackendRequired("ode_residual_coh"));
    }
    let SeriesKind::Coh { z } = series.kind.clone() else {
        return Err(Error::InvalidArgument(
            "cohomological series required".into(),
        ));
    };
    if series.prefactor != Prefactor::Stripped {
        return Err(Error::InvalidArgument("stripped series required".into()));
    }
    let model = series.algebra.model().clone();
    if i >= model.rank() {
        return Err(Error::InvalidArgument(format!(
            "operator index {i} out of range for rank {}",
            model.rank()
        )));
    }
    let algebra = series.algebra.clone();
    let columns = model.columns();
    let zinv = z.clone().recip_checked().expect("z != 0 by construction");
    let alphas_over_z: Vec<AlgebraElement<S>> = columns
        .iter()
        .map(|&c| algebra.alpha_element(c).scale(&zinv))
        .collect();
    let row = |col: (i64, i64)| if i == 0 { col.0 } else { col.1 };

    let apply_factors = |d: Deg, positive: bool, x: &AlgebraElement<S>| -> AlgebraElement<S> {
        let mut acc = x.clone();
        for (j, col) in columns.iter().enumerate() {
            let mij = row(*col);
            let count = if positive { mij } else { -mij };
            if count <= 0 {
                continue;
            }
            let aj = d.alpha(*col);
            for r in 0..count {
                // (r - alpha_j(d)) + alpha_j(p)/z
                let factor =
                    alphas_over_z[j].add(&AlgebraElement::scalar(&algebra, S::from_int(r - aj)));
                acc = acc.mul(&factor);
            }
        }
        acc
    };

    let m_i = model.m_degrees()[i];
    let z_pow = z.powi(-m_i);
    let residual = series.map_coefficients(|d, c| {
        let first = apply_factors(d, true, c);
        let second = match d.minus_unit(i) {
            Some(dm) => match series.coefficient(dm) {
                Some(cm) => apply_factors(dm, false, cm).scale(&z_pow),
                None => AlgebraElement::zero(&algebra),
            },
            None => AlgebraElement::zero(&algebra),
        };
        first.sub(&second)
    });
    Ok(residual)
}

/// Check the residual contract: all coefficients with d_i >= 1 vanish.
pub fn residual_is_zero<S: Scalar>(residual: &NovikovSeries<S>, i: usize) -> bool {
    residual.terms.iter().all(|(d, c)| {
        let di = if i == 0 { d.d1 } else { d.d2 };
        di == 0 || c.is_zero()
    })
}

/// Homogeneity transport of a stripped cohomological series built at
/// z = 1 to parameter z: c_d(z) = z^{-<m, d>} (z^{-1})^{deg} c_d(1).
///
/// This is the prefactor-stripped coefficient form of the J-function
/// identity J(z, Q) = z^{1 - deg} J(1, z^{-m_1} Q_1, ..., z^{-m_r} Q_r);
/// the overall z and the z^{rho/z} prefactor bookkeeping cancel between
/// the attached prefactors at rescaled Novikov values, leaving the exact
/// coefficientwise relation above, tested against an independent build.
pub fn rescale_z<S: Scalar>(series: &NovikovSeries<S>, z: S) -> Result<NovikovSeries<S>> {
    let SeriesKind::Coh { z: z0 } = series.kind.clone() else {
        return Err(Error::InvalidArgument(
            "cohomological series required".into(),
        ));
    };
    if z0 != S::one() {
        return Err(Error::InvalidArgument(
            "rescale_z expects a series built at z = 1".into(),
        ));
    }
    if z.is_zero() {
        return Err(Error::InvalidArgument("z = 0".into()));
    }
    let m = series.algebra.model().m_degrees();
    let zinv = z.clone().recip_checked().unwrap();
    let mut out = series.map_coefficients(|d, c| {
        let pow = m[0] * d.d1 as i64 + m.get(1).copied().unwrap_or(0) * d.d2 as i64;
        c.degree_scale(&zinv).scale(&z.powi(-pow))
    });
    out.kind = SeriesKind::Coh { z };
    Ok(out)
}

/// Numeric evaluation: sum Q^d c_d in the stored deterministic order,
/// together with per-total-degree shell magnitudes for tail estimates.
pub fn sum_at(series: &NovikovSeries<f64>, q_values: &[f64]) -> (AlgebraElement<f64>, Vec<f64>) {
    let mut acc = AlgebraElement::zero(series.algebra());
    let mut shells = vec![0.0f64; series.degree as usize + 1];
    for (d, c) in &series.terms {
        let weight = q_values[0].powi(d.d1 as i32)
            * q_values.get(1).copied().unwrap_or(1.0).powi(d.d2 as i32);
        let term = c.scale(&weight);
        shells[d.total() as usize] += term.max_abs();
        acc = acc.add(&term);
    }
    (acc, shells)
}

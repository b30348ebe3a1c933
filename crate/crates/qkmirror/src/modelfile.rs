//! Model files and inline model specifications.
//!
//! TOML model files carry either the raw moment matrix or the normal-form
//! shorthand:
//!
//! ```toml
//! matrix = [[1, 1, 1, 0, -1], [0, 0, 0, 1, 1]]
//! chamber = "positive_orthant"
//! ```
//!
//! ```toml
//! family = { N = 3, a = [1] }
//! ```
//!
//! Rank-1 models (projective spaces) are written with a single-row matrix
//! or `family = { N = 3, rank = 1 }`. Inline specifications on the command
//! line use `N=3,a=[1]` / `N=2,a=1,0` / `P^2`.

use crate::error::Error;
use crate::toric::{normalize_rank2, Chamber, MomentData, RankTwoModel};
use crate::Result;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
struct ModelFile {
    matrix: Option<Vec<Vec<i64>>>,
    family: Option<FamilySpec>,
    #[serde(default)]
    chamber: Chamber,
}

#[derive(Debug, Deserialize)]
struct FamilySpec {
    #[serde(rename = "N")]
    n: usize,
    #[serde(default)]
    a: Vec<i64>,
    #[serde(default = "default_rank")]
    rank: usize,
}

fn default_rank() -> usize {
    2
}

/// Parse a TOML model file into moment data, normalizing matrices to the
/// rank-2 normal form where applicable.
pub fn model_from_toml(text: &str) -> Result<RankTwoModel> {
    let file: ModelFile =
        toml::from_str(text).map_err(|e| Error::Config(format!("model file: {e}")))?;
    match (file.matrix, file.family) {
        (Some(matrix), None) => {
            let data = MomentData::new(matrix, file.chamber)?;
            model_from_moment_data(&data)
        }
        (None, Some(fam)) => match fam.rank {
            1 => RankTwoModel::rank1(fam.n),
            2 => RankTwoModel::rank2(fam.n, fam.a),
            r => Err(Error::UnsupportedRank(r)),
        },
        _ => Err(Error::Config(
            "model file needs exactly one of `matrix`, `family`".into(),
        )),
    }
}

/// Turn raw moment data into a model: rank-1 matrices directly, rank-2
/// matrices through the normal form.
pub fn model_from_moment_data(data: &MomentData) -> Result<RankTwoModel> {
    if data.rank() == 1 {
        let n = data.n_columns();
        for j in 0..n {
            if data.column(j).0 != 1 {
                return Err(Error::InvalidArgument(
                    "rank-1 models must have all columns equal to (1)".into(),
                ));
            }
        }
        RankTwoModel::rank1(n)
    } else {
        Ok(normalize_rank2(data)?.model)
    }
}

/// Parse an inline model spec: `N=3,a=[1]`, `N=2,a=1,0`, `N=2`, `P^3`.
pub fn model_from_inline(spec: &str) -> Result<RankTwoModel> {
    let s = spec.trim();
    if let Some(rest) = s.strip_prefix("P^").or_else(|| s.strip_prefix('P')) {
        if let Ok(dim) = rest.trim().parse::<usize>() {
            return RankTwoModel::rank1(dim + 1);
        }
    }
    let mut n: Option<usize> = None;
    let mut a: Vec<i64> = Vec::new();
    let normalized = s.replace(['[', ']'], "");
    let mut parts = normalized.split(',').peekable();
    while let Some(part) = parts.next() {
        let part = part.trim();
        if let Some(v) = part.strip_prefix("N=").or_else(|| part.strip_prefix("n=")) {
            n = Some(
                v.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad N in family spec: {spec}")))?,
            );
        } else if let Some(v) = part.strip_prefix("a=") {
            a.push(
                v.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad a in family spec: {spec}")))?,
            );
            // the remaining comma-separated entries extend the a-list
            while let Some(next) = parts.peek() {
                let t = next.trim();
                if t.contains('=') {
                    break;
                }
                a.push(
                    t.parse()
                        .map_err(|_| Error::Config(format!("bad a entry: {t}")))?,
                );
                parts.next();
            }
        } else if !part.is_empty() {
            return Err(Error::Config(format!("unrecognized family field: {part}")));
        }
    }
    let n = n.ok_or_else(|| Error::Config(format!("family spec needs N: {spec}")))?;
    RankTwoModel::rank2(n, a)
}

/// Parse a polynomial class string like "p1^2*p2" or "p^2" (rank 1) or
/// "2*p1*p2 + p2^2 - 3" into a raw polynomial.
pub fn parse_class(text: &str) -> Result<crate::toric::RawPoly> {
    use crate::scalar::{parse_rational, Rational, Scalar};
    let mut terms: Vec<((u32, u32), Rational)> = Vec::new();
    let cleaned = text.replace('-', "+-").replace(' ', "");
    for chunk in cleaned.split('+') {
        if chunk.is_empty() {
            continue;
        }
        let mut coeff = <Rational as Scalar>::one();
        let mut negative = false;
        let mut u = 0u32;
        let mut v = 0u32;
        let body = if let Some(b) = chunk.strip_prefix('-') {
            negative = true;
            b
        } else {
            chunk
        };
        for factor in body.split('*') {
            let factor = factor.trim();
            if factor.is_empty() {
                continue;
            }
            let (name, exp) = match factor.split_once('^') {
                Some((n, e)) => (
                    n,
                    e.parse::<u32>()
                        .map_err(|_| Error::Config(format!("bad exponent in {factor}")))?,
                ),
                None => (factor, 1),
            };
            match name {
                "p1" | "p" => u += exp,
                "p2" => v += exp,
                other => {
                    let c = parse_rational(other)
                        .ok_or_else(|| Error::Config(format!("bad factor: {other}")))?;
                    // numeric factor; its exponent must be 1
                    if exp != 1 {
                        return Err(Error::Config(format!("bad factor: {factor}")));
                    }
                    coeff *= c;
                }
            }
        }
        if negative {
            coeff = -coeff;
        }
        terms.push(((u, v), coeff));
    }
    Ok(crate::toric::RawPoly(terms))
}

/// Parse a Laurent K-word like "P1^2*P2^-1" or "1".
pub fn parse_kword(text: &str) -> Result<crate::algebra::KWord> {
    let mut factors = Vec::new();
    let t = text.trim();
    if t == "1" {
        return Ok(crate::algebra::KWord::new(vec![]));
    }
    for factor in t.split('*') {
        let factor = factor.trim();
        let (name, exp) = match factor.split_once('^') {
            Some((n, e)) => (
                n,
                e.parse::<i64>()
                    .map_err(|_| Error::Config(format!("bad exponent in {factor}")))?,
            ),
            None => (factor, 1),
        };
        let g = match name {
            "P1" | "P" => 0,
            "P2" => 1,
            other => return Err(Error::Config(format!("unknown K-ring generator: {other}"))),
        };
        factors.push((g, exp));
    }
    Ok(crate::algebra::KWord::new(factors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational_as_i64;
    use crate::toric::integrate_poly;

    #[test]
    fn toml_matrix_model() {
        let text = r#"
matrix = [[1, 1, 1, 0, -1], [0, 0, 0, 1, 1]]
chamber = "positive_orthant"
"#;
        let model = model_from_toml(text).unwrap();
        assert_eq!(model, RankTwoModel::rank2(3, vec![1]).unwrap());
    }

    #[test]
    fn toml_family_model() {
        let model = model_from_toml("family = { N = 2, a = [1, 0] }").unwrap();
        assert_eq!(model, RankTwoModel::rank2(2, vec![1, 0]).unwrap());
        let p2 = model_from_toml("family = { N = 3, rank = 1 }").unwrap();
        assert_eq!(p2, RankTwoModel::rank1(3).unwrap());
        let p1_matrix = model_from_toml("matrix = [[1, 1]]").unwrap();
        assert_eq!(p1_matrix, RankTwoModel::rank1(2).unwrap());
    }

    #[test]
    fn inline_models() {
        assert_eq!(
            model_from_inline("N=2,a=1").unwrap(),
            RankTwoModel::rank2(2, vec![1]).unwrap()
        );
        assert_eq!(
            model_from_inline("N=2,a=[1,0]").unwrap(),
            RankTwoModel::rank2(2, vec![1, 0]).unwrap()
        );
        assert_eq!(
            model_from_inline("N=3").unwrap(),
            RankTwoModel::rank2(3, vec![]).unwrap()
        );
        assert_eq!(
            model_from_inline("P^2").unwrap(),
            RankTwoModel::rank1(3).unwrap()
        );
    }

    #[test]
    fn class_parsing_and_integration() {
        let f1 = RankTwoModel::rank2(2, vec![1]).unwrap();
        let poly = parse_class("p2^2").unwrap();
        assert_eq!(rational_as_i64(&integrate_poly(&f1, &poly)), Some(1));
        let poly = parse_class("p1*p2 - p2^2").unwrap();
        assert_eq!(rational_as_i64(&integrate_poly(&f1, &poly)), Some(0));
        let poly = parse_class("3*p1*p2").unwrap();
        assert_eq!(rational_as_i64(&integrate_poly(&f1, &poly)), Some(3));
    }

    #[test]
    fn kword_parsing() {
        let w = parse_kword("P1^2*P2^-1").unwrap();
        assert_eq!(w.exponents, [2, -1]);
        assert_eq!(parse_kword("1").unwrap().exponents, [0, 0]);
    }
}

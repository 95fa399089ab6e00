//! JSON encodings shared by the file formats: complex numbers as `[re, im]`
//! pairs, matrices as nested row arrays of pairs.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec};
use num_complex::Complex64;

pub type Pair = [f64; 2];

pub fn to_pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

pub fn from_pair(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn matrix_to_rows(m: &CMat) -> Vec<Vec<Pair>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| to_pair(m[(i, j)])).collect()).collect()
}

pub fn rows_to_matrix(rows: &[Vec<Pair>]) -> Result<CMat> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidShape("ragged matrix rows".into()));
    }
    Ok(CMat::from_fn(n, m, |i, j| from_pair(rows[i][j])))
}

pub fn vector_to_pairs(v: &CVec) -> Vec<Pair> {
    v.iter().map(|&z| to_pair(z)).collect()
}

pub fn pairs_to_vector(p: &[Pair]) -> CVec {
    CVec::from_iterator(p.len(), p.iter().map(|&x| from_pair(x)))
}

/// `serde(with = ...)` adapter for a complex matrix as nested rows.
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMat, D::Error> {
        let rows = Vec::<Vec<Pair>>::deserialize(d)?;
        rows_to_matrix(&rows).map_err(serde::de::Error::custom)
    }
}

/// `serde(with = ...)` adapter for a complex vector as an array of pairs.
pub mod vector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &CVec, s: S) -> std::result::Result<S::Ok, S::Error> {
        vector_to_pairs(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CVec, D::Error> {
        let pairs = Vec::<Pair>::deserialize(d)?;
        Ok(pairs_to_vector(&pairs))
    }
}

/// `serde(with = ...)` adapter for a list of complex matrices.
pub mod matrix_list {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[CMat], s: S) -> std::result::Result<S::Ok, S::Error> {
        ms.iter().map(matrix_to_rows).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<CMat>, D::Error> {
        let all = Vec::<Vec<Vec<Pair>>>::deserialize(d)?;
        all.iter().map(|rows| rows_to_matrix(rows).map_err(serde::de::Error::custom)).collect()
    }
}

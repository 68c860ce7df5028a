//! JSON files shared by the library and the CLI.
//!
//! Atom indices and permutations are one-based in files. Every float is
//! written with 17 significant digits so that files round-trip exactly.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

use crate::error::Result;
use crate::generator::GroundTruth;
use crate::measure_space::{DiscreteMeasureSpace, ToleranceConfig};
use crate::operator::{matrix_from_rows, NonnegativeOperator};

/// `{"weights": [...], "matrix": [[...]], "r": k}` with an optional
/// `ground_truth` object written by the generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub weights: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
    pub r: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GroundTruth>,
}

impl OperatorFile {
    pub fn from_operator(op: &NonnegativeOperator, ground_truth: Option<GroundTruth>) -> Self {
        Self {
            weights: op.space().weights().to_vec(),
            matrix: op.rows(),
            r: op.potency(),
            ground_truth,
        }
    }

    /// Space and raw matrix, before any nonnegativity handling.
    pub fn parts(&self) -> Result<(DiscreteMeasureSpace, nalgebra::DMatrix<f64>)> {
        let space = DiscreteMeasureSpace::new(self.weights.clone())?;
        let matrix = matrix_from_rows(&self.matrix, space.atom_count())?;
        Ok((space, matrix))
    }

    pub fn to_operator(&self, cfg: &ToleranceConfig) -> Result<NonnegativeOperator> {
        let (space, matrix) = self.parts()?;
        NonnegativeOperator::new(space, matrix, self.r, cfg)
    }
}

/// Pretty JSON with every float rewritten to 17 significant digits.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    canonicalize_floats(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

fn canonicalize_floats(v: &mut Value) {
    match v {
        Value::Number(n) => {
            let text = n.to_string();
            if text.contains(['.', 'e', 'E']) {
                if let Some(x) = n.as_f64() {
                    let x = if x == 0.0 { 0.0 } else { x };
                    if let Ok(m) = Number::from_str(&format!("{x:.16e}")) {
                        *n = m;
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(canonicalize_floats),
        Value::Object(map) => map.values_mut().for_each(canonicalize_floats),
        _ => {}
    }
}

pub fn from_json_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    from_json_str(&fs::read_to_string(path)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

pub fn read_operator_file(path: &Path) -> Result<OperatorFile> {
    read_json(path)
}

/// Serde adapter writing zero-based indices as one-based.
pub mod one_based {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[usize], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|i| i + 1).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<usize>, D::Error> {
        Vec::<usize>::deserialize(d)?
            .into_iter()
            .map(|i| {
                i.checked_sub(1)
                    .ok_or_else(|| serde::de::Error::custom("indices are one-based"))
            })
            .collect()
    }
}

/// Serde adapter for an optional atom set as a one-based index list.
pub mod one_based_opt {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::measure_space::AtomSet;

    pub fn serialize<S: Serializer>(v: &Option<AtomSet>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(AtomSet::to_one_based).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<AtomSet>, D::Error> {
        match Option::<Vec<usize>>::deserialize(d)? {
            None => Ok(None),
            Some(v) => AtomSet::from_one_based(&v)
                .map(Some)
                .map_err(serde::de::Error::custom),
        }
    }
}

/// Serde adapter for a list of atom sets as one-based index lists.
pub mod one_based_sets {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::measure_space::AtomSet;

    pub fn serialize<S: Serializer>(v: &[AtomSet], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(AtomSet::to_one_based)
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<AtomSet>, D::Error> {
        Vec::<Vec<usize>>::deserialize(d)?
            .iter()
            .map(|v| AtomSet::from_one_based(v).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_get_seventeen_digits_and_integers_stay() {
        let text =
            to_json_string(&serde_json::json!({"x": 0.1, "r": 3, "v": [1.0, -2.5e-7]})).unwrap();
        assert!(text.contains("\"r\": 3"));
        assert!(text.contains("1.0000000000000001e-1"));
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
        assert_eq!(back["v"][1].as_f64(), Some(-2.5e-7));
    }

    #[test]
    fn operator_file_round_trip() {
        let cfg = ToleranceConfig::default();
        let op = NonnegativeOperator::from_rows(
            vec![1.0, 2.0 / 3.0],
            &[vec![0.0, 1.0 / 3.0], vec![3.0, 0.0]],
            3,
            &cfg,
        )
        .unwrap();
        let file = OperatorFile::from_operator(&op, None);
        let text = to_json_string(&file).unwrap();
        let back: OperatorFile = from_json_str(&text).unwrap();
        assert_eq!(back, file);
        assert!(from_json_str::<OperatorFile>("{\"weights\": [1.0]").is_err());
    }
}

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::SceneError;

/// Loads a label table: JSON object mapping class name to a d-dimensional
/// unit-norm embedding. All classes must share the same dimension.
pub fn load_label_table(path: &Path) -> Result<BTreeMap<String, Vec<f64>>, SceneError> {
    let text = fs::read_to_string(path).map_err(|e| SceneError::io(path, e))?;
    let raw: BTreeMap<String, Vec<f64>> =
        serde_json::from_str(&text).map_err(|e| SceneError::json(path, e))?;
    validate_label_table(&raw)?;
    Ok(raw)
}

pub fn save_label_table(path: &Path, table: &BTreeMap<String, Vec<f64>>) -> Result<(), SceneError> {
    validate_label_table(table)?;
    let text = serde_json::to_string_pretty(table).expect("label table serializes");
    fs::write(path, text).map_err(|e| SceneError::io(path, e))
}

pub fn validate_label_table(table: &BTreeMap<String, Vec<f64>>) -> Result<(), SceneError> {
    let mut dim: Option<usize> = None;
    for (class, emb) in table {
        if emb.is_empty() {
            return Err(SceneError::InvalidLabel {
                class: class.clone(),
                reason: "empty embedding".into(),
            });
        }
        match dim {
            None => dim = Some(emb.len()),
            Some(d) if d != emb.len() => {
                return Err(SceneError::InvalidLabel {
                    class: class.clone(),
                    reason: format!("dimension {} != {}", emb.len(), d),
                });
            }
            _ => {}
        }
        if emb.iter().any(|v| !v.is_finite()) {
            return Err(SceneError::InvalidLabel {
                class: class.clone(),
                reason: "non-finite component".into(),
            });
        }
        let norm = emb.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(SceneError::InvalidLabel {
                class: class.clone(),
                reason: format!("norm {norm} not within 1e-6 of 1"),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(v: &[f64]) -> Vec<f64> {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter().map(|x| x / n).collect()
    }

    #[test]
    fn round_trips_through_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.json");
        let mut table = BTreeMap::new();
        table.insert("table".to_string(), unit(&[1.0, 2.0, 3.0, 4.0]));
        table.insert("robot".to_string(), unit(&[-0.5, 0.25, 0.125, 2.0]));
        save_label_table(&path, &table).unwrap();
        let back = load_label_table(&path).unwrap();
        assert_eq!(back.len(), 2);
        for (class, emb) in &table {
            let got = &back[class];
            for (a, b) in emb.iter().zip(got.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_non_unit_embedding() {
        let mut table = BTreeMap::new();
        table.insert("x".to_string(), vec![1.0, 1.0]);
        assert!(validate_label_table(&table).is_err());
    }

    #[test]
    fn rejects_mismatched_dimensions() {
        let mut table = BTreeMap::new();
        table.insert("a".to_string(), vec![1.0]);
        table.insert("b".to_string(), unit(&[1.0, 1.0]));
        assert!(validate_label_table(&table).is_err());
    }
}

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

use super::input::InputSignal;
use super::system::PhDaeSystem;

/// On-disk model layout: nested row-major arrays plus a tagged input object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(rename = "E")]
    pub e: Vec<Vec<f64>>,
    #[serde(rename = "J")]
    pub j: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    pub r: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    pub x0: Vec<f64>,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub input: InputSignal,
}

impl ModelFile {
    pub fn from_system(sys: &PhDaeSystem<f64>) -> Self {
        Self {
            e: sys.e.to_rows(),
            j: sys.j.to_rows(),
            r: sys.r.to_rows(),
            q: sys.q.to_rows(),
            b: sys.b.to_rows(),
            x0: sys.x0.clone(),
            horizon: sys.horizon,
            input: sys.input.clone(),
        }
    }

    pub fn into_system(self) -> Result<PhDaeSystem<f64>> {
        let mat = |name: &str, rows: &[Vec<f64>]| {
            DenseMatrix::from_rows(rows).map_err(|e| Error::ModelFile(format!("{name}: {e}")))
        };
        PhDaeSystem::new(
            mat("E", &self.e)?,
            mat("J", &self.j)?,
            mat("R", &self.r)?,
            mat("Q", &self.q)?,
            mat("B", &self.b)?,
            self.input,
            self.x0,
            self.horizon,
        )
    }
}

pub fn model_from_json(text: &str) -> Result<PhDaeSystem<f64>> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::ModelFile(e.to_string()))?;
    file.into_system()
}

pub fn model_to_json(sys: &PhDaeSystem<f64>) -> String {
    serde_json::to_string_pretty(&ModelFile::from_system(sys)).expect("model serializes")
}

pub fn load_model(path: &Path) -> Result<PhDaeSystem<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::ModelFile(format!("{}: {e}", path.display())))?;
    model_from_json(&text)
}

pub fn save_model(sys: &PhDaeSystem<f64>, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_json(sys)).map_err(|e| Error::ModelFile(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_malformed_files() {
        assert!(matches!(model_from_json("{"), Err(Error::ModelFile(_))));
        let ragged = r#"{"E":[[1,0],[0]],"J":[[0,0],[0,0]],"R":[[0,0],[0,0]],"Q":[[1,0],[0,1]],
            "B":[[1],[0]],"x0":[0,0],"T":1,"input":{"kind":"zero"}}"#;
        assert!(matches!(model_from_json(ragged), Err(Error::ModelFile(_))));
    }

    #[test]
    fn round_trip_small_model() {
        let text = r#"{"E":[[1,0],[0,0]],"J":[[0,1],[-1,0]],"R":[[0.5,0],[0,1]],"Q":[[1,0],[0,1]],
            "B":[[1],[0]],"x0":[0.1,0.3],"T":2.5,"input":{"kind":"gaussian","amplitude":1,"center":0.5,"width":0.1}}"#;
        let sys = model_from_json(text).unwrap();
        let back = model_from_json(&model_to_json(&sys)).unwrap();
        assert_eq!(back.e, sys.e);
        assert_eq!(back.x0, sys.x0);
        assert_eq!(back.input, sys.input);
        assert_eq!(back.horizon, 2.5);
    }
}

//! JSON model-file format.
//!
//! Matrices are row-major nested arrays under the keys
//! `dims, A, B, C, D, E, F, G, Q, R, Qh, ss`; the `ss` block holds the
//! steady-state references. Every load re-runs full structural validation.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::{Dims, GasGenModel, ModelError, SteadyState};

#[derive(Deserialize)]
struct RawSteadyState {
    x: Vec<f64>,
    u: Vec<f64>,
    y: Vec<f64>,
    theta: Vec<f64>,
    pe: f64,
}

#[derive(Deserialize)]
struct RawModel {
    dims: Dims,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    d: Vec<Vec<f64>>,
    #[serde(rename = "E")]
    e: Vec<Vec<f64>>,
    #[serde(rename = "F")]
    f: Vec<Vec<f64>>,
    #[serde(rename = "G")]
    g: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    r: Vec<Vec<f64>>,
    #[serde(rename = "Qh")]
    qh: Vec<Vec<f64>>,
    ss: RawSteadyState,
}

fn to_matrix(name: &'static str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>, ModelError> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    for row in rows {
        if row.len() != ncols {
            return Err(ModelError::DimensionMismatch {
                name,
                rows: nrows,
                cols: row.len(),
                expected_rows: nrows,
                expected_cols: ncols,
            });
        }
    }
    Ok(DMatrix::from_row_iterator(
        nrows,
        ncols,
        rows.iter().flatten().copied(),
    ))
}

impl GasGenModel {
    /// Parse and validate a model from its JSON text.
    pub fn from_json_str(text: &str) -> Result<GasGenModel, ModelError> {
        let raw: RawModel = serde_json::from_str(text)?;
        let model = GasGenModel {
            dims: raw.dims,
            a: to_matrix("A", &raw.a)?,
            b: to_matrix("B", &raw.b)?,
            c: to_matrix("C", &raw.c)?,
            d: to_matrix("D", &raw.d)?,
            e: to_matrix("E", &raw.e)?,
            f: to_matrix("F", &raw.f)?,
            g: to_matrix("G", &raw.g)?,
            q: to_matrix("Q", &raw.q)?,
            r: to_matrix("R", &raw.r)?,
            qh: to_matrix("Qh", &raw.qh)?,
            ss: SteadyState {
                x: DVector::from_vec(raw.ss.x),
                u: DVector::from_vec(raw.ss.u),
                y: DVector::from_vec(raw.ss.y),
                theta: DVector::from_vec(raw.ss.theta),
                pe: raw.ss.pe,
            },
        };
        model.validate()?;
        Ok(model)
    }

    /// Read and validate a model file.
    pub fn from_json_file<P: AsRef<Path>>(path: P) -> Result<GasGenModel, ModelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        GasGenModel::from_json_str(&text)
    }
}

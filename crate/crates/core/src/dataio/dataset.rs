use std::collections::BTreeSet;
use std::io::Write;

use crate::dataio::table::RawTable;
use crate::error::{Error, Result};
use crate::nn::Matrix;
use crate::Scalar;

/// Per-attribute min and max in original units.
#[derive(Debug, Clone, PartialEq)]
pub struct NormParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormParams {
    pub fn d(&self) -> usize {
        self.min.len()
    }

    /// Maps an original-unit value of attribute `j` into the unit interval; zero-range
    /// attributes map to 0.
    pub fn scale(&self, j: usize, x: f64) -> f64 {
        let range = self.max[j] - self.min[j];
        if range > 0.0 {
            (x - self.min[j]) / range
        } else {
            0.0
        }
    }

    /// Inverse of [`scale`](Self::scale); zero-range attributes map to the stored constant.
    pub fn unscale(&self, j: usize, v: f64) -> f64 {
        let range = self.max[j] - self.min[j];
        if range > 0.0 {
            v * range + self.min[j]
        } else {
            self.min[j]
        }
    }
}

/// Normalised numeric matrix (entries in `[0, 1]`) with class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T = f64> {
    pub values: Matrix<T>,
    pub class_labels: Vec<String>,
    pub norm: NormParams,
    pub attribute_names: Vec<String>,
}

impl<T: Scalar> Dataset<T> {
    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn d(&self) -> usize {
        self.values.cols()
    }

    /// Distinct class labels in sorted order.
    pub fn classes(&self) -> Vec<String> {
        self.class_labels
            .iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .cloned()
            .collect()
    }

    /// Rows at `indices`, in the given order, with labels travelling along.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            values: self.values.select_rows(indices),
            class_labels: indices
                .iter()
                .map(|&i| self.class_labels[i].clone())
                .collect(),
            norm: self.norm.clone(),
            attribute_names: self.attribute_names.clone(),
        }
    }

    /// Same labels and schema with a replacement value matrix.
    pub fn with_values(&self, values: Matrix<T>) -> Result<Self> {
        if values.shape() != self.values.shape() {
            return Err(Error::shape(format!(
                "replacement values {:?} for dataset {:?}",
                values.shape(),
                self.values.shape()
            )));
        }
        Ok(Self {
            values,
            ..self.clone()
        })
    }

    pub fn same_schema(&self, other: &Self) -> bool {
        self.attribute_names == other.attribute_names && self.norm == other.norm
    }

    /// Writes the dataset in original units as CSV with a trailing `class` column.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let orig = denormalize(self, &self.values)?;
        let mut w = csv::Writer::from_writer(out);
        let mut header = self.attribute_names.clone();
        header.push("class".into());
        w.write_record(&header)?;
        for i in 0..self.n() {
            let mut rec: Vec<String> = orig.row(i).iter().map(|v| v.to_string()).collect();
            rec.push(self.class_labels[i].clone());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }
}

/// Per-attribute min–max scaling of a table without missing cells.
pub fn normalize<T: Scalar>(raw: &RawTable) -> Result<Dataset<T>> {
    if raw.has_missing() {
        return Err(Error::invalid(
            "normalize requires a table without missing cells",
        ));
    }
    let d = raw.d();
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    for row in &raw.rows {
        for (j, v) in row.iter().enumerate() {
            let v = v.expect("checked above");
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    let norm = NormParams { min, max };
    let data = raw
        .rows
        .iter()
        .flat_map(|row| {
            let norm = &norm;
            row.iter()
                .enumerate()
                .map(move |(j, v)| T::lit(norm.scale(j, v.expect("checked above"))))
        })
        .collect();
    Ok(Dataset {
        values: Matrix::from_vec(raw.n(), d, data)?,
        class_labels: raw.class_labels.clone(),
        norm,
        attribute_names: raw.attribute_names.clone(),
    })
}

/// Maps unit-scaled values back to original units using the dataset's parameters.
pub fn denormalize<T: Scalar>(ds: &Dataset<T>, values: &Matrix<T>) -> Result<Matrix<f64>> {
    if values.cols() != ds.norm.d() {
        return Err(Error::shape(format!(
            "{} columns for {} attributes",
            values.cols(),
            ds.norm.d()
        )));
    }
    let mut out = Matrix::zeros(values.rows(), values.cols());
    for i in 0..values.rows() {
        for (j, &v) in values.row(i).iter().enumerate() {
            out[(i, j)] = ds.norm.unscale(j, v.as_f64());
        }
    }
    Ok(out)
}

use crate::dataio::dataset::{normalize, Dataset};
use crate::dataio::table::RawTable;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::Scalar;

/// Attribute name, class-0 mean, class-1 mean, standard deviation, clip range.
type AttrSpec = (&'static str, f64, f64, f64, (f64, f64));

const MILK_ATTRIBUTES: [AttrSpec; 11] = [
    ("milk_quantity", 25.0, 21.0, 5.0, (0.0, 60.0)),
    ("casein", 2.6, 2.5, 0.3, (0.0, 6.0)),
    ("fat", 3.9, 4.1, 0.6, (0.0, 10.0)),
    ("lactose", 4.8, 4.5, 0.25, (0.0, 7.0)),
    ("ph", 6.65, 6.8, 0.1, (6.0, 7.5)),
    ("protein", 3.3, 3.4, 0.3, (0.0, 7.0)),
    ("urea", 25.0, 27.0, 6.0, (0.0, 80.0)),
    ("somatic_cells_log10", 5.0, 5.8, 0.4, (3.0, 8.0)),
    ("conductivity", 4.8, 5.6, 0.5, (2.0, 10.0)),
    ("dry_matter", 12.5, 12.3, 0.8, (5.0, 20.0)),
    ("freezing_point", -0.52, -0.51, 0.01, (-0.6, -0.4)),
];

/// Correlation between attributes `i` and `j` within a component.
const CORRELATION_DECAY: f64 = 0.6;

/// Lower Cholesky factor of the AR(1)-style correlation matrix `ρ^|i−j|`.
fn correlation_cholesky(d: usize) -> Vec<Vec<f64>> {
    let corr = |i: usize, j: usize| CORRELATION_DECAY.powi(i.abs_diff(j) as i32);
    let mut l = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][j] = (corr(i, i) - s).sqrt();
            } else {
                l[i][j] = (corr(i, j) - s) / l[j][j];
            }
        }
    }
    l
}

/// Milk-study-shaped synthetic data: `n` instances, 11 numeric attributes drawn from a
/// two-component correlated Gaussian mixture with equal weights, binary class = component.
pub fn synth_milk<T: Scalar>(n: usize, seed: u64) -> Result<Dataset<T>> {
    if n < 2 {
        return Err(Error::invalid(
            "synthetic dataset needs at least 2 instances",
        ));
    }
    let mut rng = RngStream::new(seed);
    let d = MILK_ATTRIBUTES.len();
    let chol = correlation_cholesky(d);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut text = Vec::with_capacity(n);
    for _ in 0..n {
        let component = usize::from(rng.bernoulli(0.5));
        let z: Vec<f64> = (0..d).map(|_| rng.standard_normal::<f64>()).collect();
        let row: Vec<Option<f64>> = MILK_ATTRIBUTES
            .iter()
            .enumerate()
            .map(|(j, &(_, m0, m1, sd, (lo, hi)))| {
                let mean = if component == 0 { m0 } else { m1 };
                let e: f64 = (0..=j).map(|k| chol[j][k] * z[k]).sum();
                Some((mean + sd * e).clamp(lo, hi))
            })
            .collect();
        text.push(row.iter().map(|v| v.unwrap().to_string()).collect());
        rows.push(row);
        labels.push(component.to_string());
    }
    let names: Vec<String> = MILK_ATTRIBUTES.iter().map(|a| a.0.to_owned()).collect();
    let mut header = names.clone();
    header.push("class".into());
    normalize(&RawTable {
        attribute_names: names,
        rows,
        class_labels: labels,
        source_id: "synth-milk".into(),
        header,
        class_position: d,
        cell_text: text,
    })
}

//! Model files: the layer format of [`crate::nn::persist`] wrapped with a model-kind tag, the
//! KL weight and the attribute schema the model was trained on.

use std::io::{BufRead, Write};

use crate::dataio::NormParams;
use crate::error::{Error, Result};
use crate::models::{AeModel, Model, VaeModel};
use crate::nn::persist::{hex, io_err, parse_usize, read_layers, unhex, write_layers, LineReader};
use crate::nn::{DenseLayer, Mlp};
use crate::Scalar;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A model together with the schema needed to normalise new inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile<T = f64> {
    pub model: Model<T>,
    pub attribute_names: Vec<String>,
    pub norm: NormParams,
    /// Distinct class labels seen in training.
    pub classes: Vec<String>,
}

pub fn save_model<T: Scalar>(file: &ModelFile<T>, out: &mut impl Write) -> Result<()> {
    if file.attribute_names.len() != file.model.d() || file.norm.d() != file.model.d() {
        return Err(Error::SchemaMismatch(
            "schema width differs from model".into(),
        ));
    }
    writeln!(out, "mcdimpute-model {MODEL_FORMAT_VERSION}").map_err(io_err)?;
    let kl = match &file.model {
        Model::Ae(_) => 0.0,
        Model::Vae(v) => v.kl_weight,
    };
    writeln!(out, "kind {}", file.model.family().id()).map_err(io_err)?;
    writeln!(out, "kl_weight {}", hex(kl)).map_err(io_err)?;
    writeln!(out, "attributes {}", file.attribute_names.len()).map_err(io_err)?;
    for (j, name) in file.attribute_names.iter().enumerate() {
        writeln!(
            out,
            "attr {} {} {name}",
            hex(file.norm.min[j]),
            hex(file.norm.max[j])
        )
        .map_err(io_err)?;
    }
    writeln!(out, "classes {}", file.classes.len()).map_err(io_err)?;
    for c in &file.classes {
        writeln!(out, "class {c}").map_err(io_err)?;
    }
    match &file.model {
        Model::Ae(m) => {
            writeln!(out, "section encoder").map_err(io_err)?;
            write_layers(out, m.encoder.layers.iter())?;
            writeln!(out, "section decoder").map_err(io_err)?;
            write_layers(out, m.decoder.layers.iter())?;
        }
        Model::Vae(m) => {
            writeln!(out, "section trunk").map_err(io_err)?;
            write_layers(out, m.trunk.layers.iter())?;
            writeln!(out, "section heads").map_err(io_err)?;
            write_layers(out, [&m.mu_head, &m.logvar_head].into_iter())?;
            writeln!(out, "section decoder").map_err(io_err)?;
            write_layers(out, m.decoder.layers.iter())?;
        }
    }
    Ok(())
}

fn section_layers<T: Scalar, R: BufRead>(
    r: &mut LineReader<R>,
    name: &str,
) -> Result<Vec<DenseLayer<T>>> {
    let got = r.expect_one("section")?;
    if got != name {
        return Err(Error::Format(format!(
            "expected section {name}, found {got}"
        )));
    }
    read_layers(r)
}

fn section<T: Scalar, R: BufRead>(r: &mut LineReader<R>, name: &str) -> Result<Mlp<T>> {
    Mlp::new(section_layers(r, name)?)
}

pub fn load_model<T: Scalar>(input: impl BufRead) -> Result<ModelFile<T>> {
    let mut r = LineReader::new(input);
    let version = r.expect_one("mcdimpute-model")?;
    if version != MODEL_FORMAT_VERSION.to_string() {
        return Err(Error::Format(format!(
            "unsupported model format version {version}"
        )));
    }
    let kind = r.expect_one("kind")?;
    let kl_weight = unhex(&r.expect_one("kl_weight")?)?;
    let d = parse_usize(&r.expect_one("attributes")?)?;
    let mut names = Vec::with_capacity(d);
    let mut min = Vec::with_capacity(d);
    let mut max = Vec::with_capacity(d);
    for _ in 0..d {
        let rest = r.expect_rest("attr")?;
        let mut parts = rest.splitn(3, ' ');
        let (Some(lo), Some(hi), Some(name)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Format("attr line needs min, max and name".into()));
        };
        min.push(unhex(lo)?);
        max.push(unhex(hi)?);
        names.push(name.to_owned());
    }
    let c = parse_usize(&r.expect_one("classes")?)?;
    let classes = (0..c)
        .map(|_| r.expect_rest("class"))
        .collect::<Result<Vec<_>>>()?;
    let model = match kind.as_str() {
        "ae" => {
            let encoder = section(&mut r, "encoder")?;
            let decoder = section(&mut r, "decoder")?;
            Model::Ae(AeModel::from_parts(encoder, decoder)?)
        }
        "vae" => {
            let trunk = section(&mut r, "trunk")?;
            let mut heads = section_layers::<T, _>(&mut r, "heads")?;
            if heads.len() != 2 {
                return Err(Error::Format("vae needs exactly two latent heads".into()));
            }
            let logvar_head = heads.pop().expect("two heads");
            let mu_head = heads.pop().expect("two heads");
            let decoder = section(&mut r, "decoder")?;
            Model::Vae(VaeModel::from_parts(
                trunk,
                mu_head,
                logvar_head,
                decoder,
                kl_weight,
            )?)
        }
        other => return Err(Error::Format(format!("unknown model kind {other:?}"))),
    };
    if model.d() != d {
        return Err(Error::Format(
            "attribute count differs from model width".into(),
        ));
    }
    Ok(ModelFile {
        model,
        attribute_names: names,
        norm: NormParams { min, max },
        classes,
    })
}

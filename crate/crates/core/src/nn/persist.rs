//! Line-oriented text persistence for dense layers.
//!
//! ```text
//! mcdimpute-nn 1
//! layers 2
//! layer 9 80 relu 3fc999999999999a
//! w <out·in hex words, row-major>
//! b <out hex words>
//! ...
//! ```
//!
//! Every float is stored as the hexadecimal bit pattern of its `f64` widening, so a round trip
//! is bit-exact for both `f32` and `f64`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::nn::layer::DenseLayer;
use crate::nn::matrix::Matrix;
use crate::nn::network::Mlp;
use crate::Scalar;

pub const NN_FORMAT_VERSION: u32 = 1;

pub(crate) fn hex(x: f64) -> String {
    format!("{:016x}", x.to_bits())
}

pub(crate) fn unhex(s: &str) -> Result<f64> {
    u64::from_str_radix(s, 16)
        .map(f64::from_bits)
        .map_err(|_| Error::Format(format!("bad float word {s:?}")))
}

pub(crate) fn io_err(e: std::io::Error) -> Error {
    Error::Format(e.to_string())
}

/// Token reader over `key value...` lines.
pub(crate) struct LineReader<R> {
    inner: R,
    line: String,
}

impl<R: BufRead> LineReader<R> {
    pub(crate) fn new(inner: R) -> Self {
        Self {
            inner,
            line: String::new(),
        }
    }

    /// Reads the next non-empty line and checks that it starts with `key`; returns the
    /// remaining whitespace-separated tokens.
    pub(crate) fn expect(&mut self, key: &str) -> Result<Vec<String>> {
        loop {
            self.line.clear();
            if self.inner.read_line(&mut self.line).map_err(io_err)? == 0 {
                return Err(Error::Format(format!(
                    "unexpected end of file, wanted {key:?}"
                )));
            }
            if !self.line.trim().is_empty() {
                break;
            }
        }
        let mut toks = self.line.split_whitespace();
        match toks.next() {
            Some(k) if k == key => Ok(toks.map(str::to_owned).collect()),
            other => Err(Error::Format(format!("expected {key:?}, found {other:?}"))),
        }
    }

    /// Like [`expect`](Self::expect) but returns the untokenised remainder of the line.
    pub(crate) fn expect_rest(&mut self, key: &str) -> Result<String> {
        self.expect(key)?;
        let line = self.line.trim_end_matches(['\n', '\r']);
        let rest = line.trim_start().strip_prefix(key).unwrap_or("");
        Ok(rest.strip_prefix(' ').unwrap_or(rest).to_owned())
    }

    pub(crate) fn expect_one(&mut self, key: &str) -> Result<String> {
        let mut toks = self.expect(key)?;
        if toks.len() != 1 {
            return Err(Error::Format(format!("{key} takes exactly one value")));
        }
        Ok(toks.remove(0))
    }
}

pub(crate) fn parse_usize(s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::Format(format!("bad integer {s:?}")))
}

fn write_floats<T: Scalar>(out: &mut impl Write, key: &str, values: &[T]) -> Result<()> {
    write!(out, "{key}").map_err(io_err)?;
    for v in values {
        write!(out, " {}", hex(v.as_f64())).map_err(io_err)?;
    }
    writeln!(out).map_err(io_err)
}

fn read_floats<T: Scalar>(toks: &[String], expected: usize) -> Result<Vec<T>> {
    if toks.len() != expected {
        return Err(Error::Format(format!(
            "expected {expected} values, found {}",
            toks.len()
        )));
    }
    toks.iter().map(|t| unhex(t).map(T::lit)).collect()
}

pub(crate) fn write_layers<'a, T: Scalar>(
    out: &mut impl Write,
    layers: impl ExactSizeIterator<Item = &'a DenseLayer<T>>,
) -> Result<()> {
    writeln!(out, "layers {}", layers.len()).map_err(io_err)?;
    for l in layers {
        writeln!(
            out,
            "layer {} {} {} {}",
            l.in_dim(),
            l.out_dim(),
            l.activation,
            hex(l.dropout_p)
        )
        .map_err(io_err)?;
        write_floats(out, "w", l.w.as_slice())?;
        write_floats(out, "b", &l.b)?;
    }
    Ok(())
}

pub(crate) fn read_layers<T: Scalar, R: BufRead>(
    r: &mut LineReader<R>,
) -> Result<Vec<DenseLayer<T>>> {
    let n = parse_usize(&r.expect_one("layers")?)?;
    let mut layers = Vec::with_capacity(n);
    for _ in 0..n {
        let head = r.expect("layer")?;
        if head.len() != 4 {
            return Err(Error::Format("layer header needs 4 fields".into()));
        }
        let fan_in = parse_usize(&head[0])?;
        let fan_out = parse_usize(&head[1])?;
        let activation = head[2].parse()?;
        let p = unhex(&head[3])?;
        let w = read_floats(&r.expect("w")?, fan_in * fan_out)?;
        let b = read_floats(&r.expect("b")?, fan_out)?;
        layers.push(DenseLayer::new(
            Matrix::from_vec(fan_out, fan_in, w)?,
            b,
            activation,
            p,
        )?);
    }
    Ok(layers)
}

pub fn save_mlp<T: Scalar>(net: &Mlp<T>, out: &mut impl Write) -> Result<()> {
    writeln!(out, "mcdimpute-nn {NN_FORMAT_VERSION}").map_err(io_err)?;
    write_layers(out, net.layers.iter())
}

pub fn load_mlp<T: Scalar>(input: impl BufRead) -> Result<Mlp<T>> {
    let mut r = LineReader::new(input);
    let version = r.expect_one("mcdimpute-nn")?;
    if version != NN_FORMAT_VERSION.to_string() {
        return Err(Error::Format(format!(
            "unsupported format version {version}"
        )));
    }
    Mlp::new(read_layers(&mut r)?)
}

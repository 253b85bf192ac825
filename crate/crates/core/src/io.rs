//! File formats: potentials as `x,v` CSV, everything else as JSON with a fixed
//! float layout so that identical inputs give byte-identical files.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::forward::Eigenpair;
use crate::potential::GridFunction;

/// Tolerance on the abscissae of a CSV potential.
const GRID_TOL: f64 = 1e-9;

pub fn read_potential(path: &Path) -> Result<GridFunction> {
    let text = fs::read_to_string(path)?;
    parse_potential(&text)
}

pub fn parse_potential(text: &str) -> Result<GridFunction> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "v" {
        return Err(Error::Parse(format!(
            "expected header `x,v`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let field = |k: usize| -> Result<f64> {
            record[k]
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", row + 1)))
        };
        xs.push(field(0)?);
        vs.push(field(1)?);
    }
    if xs.len() < 2 {
        return Err(Error::Parse("potential needs at least two rows".into()));
    }
    let n = xs.len() - 1;
    if let Some(i) = (0..=n).find(|&i| (xs[i] - i as f64 / n as f64).abs() > GRID_TOL) {
        return Err(Error::Parse(format!(
            "row {}: x = {} is off the uniform grid i/{n}",
            i + 1,
            xs[i]
        )));
    }
    GridFunction::new(vs)
}

pub fn format_potential(v: &GridFunction) -> String {
    let mut out = String::from("x,v\n");
    for (i, s) in v.samples().iter().enumerate() {
        out.push_str(&format!("{:.16e},{:.16e}\n", v.x(i), s));
    }
    out
}

pub fn write_potential(path: &Path, v: &GridFunction) -> Result<()> {
    fs::write(path, format_potential(v))?;
    Ok(())
}

/// Plot table with one row per eigenpair.
pub fn format_spectral_table(pairs: &[Eigenpair]) -> String {
    let mut out = String::from("n,lambda,mu,nu,alpha\n");
    for e in pairs {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            e.n, e.lambda, e.mu, e.nu, e.alpha
        ));
    }
    out
}

/// Pretty JSON printing every float with 17 significant digits.
struct FixedFloats<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

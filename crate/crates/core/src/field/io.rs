use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GridSpec, ScalarGrid, SkewGrid, VectorGrid};
use crate::{container, Error, Result};

pub const FIELD_MAGIC: &[u8; 8] = b"VTF1\0\0\0\0";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Scalar,
    Vector,
    Skew,
}

/// JSON header of a field file. Samples are node-major with the
/// components innermost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub dims: [usize; 3],
    pub origin: [f64; 3],
    pub spacing: [f64; 3],
    pub components: usize,
    pub kind: FieldKind,
    pub dtype: String,
    #[serde(default)]
    pub config_hash: String,
}

/// A sampled field of any rank.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyField {
    Scalar(ScalarGrid),
    Vector(VectorGrid),
    Skew(SkewGrid),
}

impl AnyField {
    fn parts(&self) -> (GridSpec, FieldKind, Vec<&[f64]>) {
        match self {
            AnyField::Scalar(g) => (g.spec, FieldKind::Scalar, vec![&g.values]),
            AnyField::Vector(g) => (g.spec, FieldKind::Vector, g.comps.iter().map(|c| c.as_slice()).collect()),
            AnyField::Skew(g) => (g.spec, FieldKind::Skew, g.comps.iter().map(|c| c.as_slice()).collect()),
        }
    }
}

pub fn write_field(path: &Path, field: &AnyField, config_hash: &str) -> Result<()> {
    let (spec, kind, comps) = field.parts();
    let header = FieldHeader {
        dims: spec.dims,
        origin: spec.origin,
        spacing: spec.spacing,
        components: comps.len(),
        kind,
        dtype: "f64-le".into(),
        config_hash: config_hash.into(),
    };
    let mut payload = Vec::with_capacity(spec.len() * comps.len());
    for i in 0..spec.len() {
        payload.extend(comps.iter().map(|c| c[i]));
    }
    container::write(path, FIELD_MAGIC, &header, &payload)
}

pub fn read_field(path: &Path) -> Result<(FieldHeader, AnyField)> {
    let (h, payload): (FieldHeader, Vec<f64>) = container::read(path, FIELD_MAGIC)?;
    let spec = GridSpec { dims: h.dims, origin: h.origin, spacing: h.spacing };
    let bad = |reason: &str| Error::Container { path: Some(path.to_path_buf()), reason: reason.into() };
    if h.dtype != "f64-le" {
        return Err(bad("unsupported dtype"));
    }
    let want = match h.kind {
        FieldKind::Scalar => 1,
        _ => 3,
    };
    if h.components != want || payload.len() != spec.len() * want {
        return Err(bad("payload size does not match header"));
    }
    let comp = |c: usize| -> Vec<f64> { payload.iter().skip(c).step_by(want).copied().collect() };
    let field = match h.kind {
        FieldKind::Scalar => AnyField::Scalar(ScalarGrid { spec, values: payload.clone() }),
        FieldKind::Vector => AnyField::Vector(VectorGrid { spec, comps: [comp(0), comp(1), comp(2)] }),
        FieldKind::Skew => AnyField::Skew(SkewGrid { spec, comps: [comp(0), comp(1), comp(2)] }),
    };
    Ok((h, field))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vec3;

    #[test]
    fn vector_field_round_trip() {
        let spec = GridSpec::cube(9, 1.2);
        let f = VectorGrid::from_fn(spec, |x| Vec3::new(x.x, x.y * x.z, -1.0 / 3.0));
        let p = std::env::temp_dir().join(format!("restray-vtf-{}.vtf", std::process::id()));
        write_field(&p, &AnyField::Vector(f.clone()), "abc").unwrap();
        let (h, back) = read_field(&p).unwrap();
        assert_eq!(h.config_hash, "abc");
        assert_eq!(back, AnyField::Vector(f));
        std::fs::remove_file(p).unwrap();
    }
}

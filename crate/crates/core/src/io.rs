//! Field files, grayscale map export, and CSV dumps.
//!
//! The native field format ("SMF1") is little-endian and uncompressed so
//! that writing the same field twice produces identical bytes:
//!
//! ```text
//! magic   4 bytes  "SMF1"
//! version u16      1
//! dim     u8       2 or 3
//! ncomp   u8       1 (scalar) or d(d+1)/2 (Mandel tensor)
//! sizes   dim x u32
//! payload ncomp * prod(sizes) f64 values, row-major points,
//!         components interleaved per point in Mandel order
//! meta    UTF-8 "key=value" lines, one per line, to end of file
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{Grid, ScalarField, TensorField};
use crate::tensor::Dim;

const MAGIC: &[u8; 4] = b"SMF1";
const VERSION: u16 = 1;

/// Either field type the format can hold.
#[derive(Clone, Debug)]
pub enum FieldData {
    Scalar(ScalarField),
    Tensor(TensorField),
}

impl FieldData {
    pub fn grid(&self) -> Grid {
        match self {
            FieldData::Scalar(f) => f.grid(),
            FieldData::Tensor(f) => f.grid(),
        }
    }

    fn ncomp(&self) -> usize {
        match self {
            FieldData::Scalar(_) => 1,
            FieldData::Tensor(f) => f.ncomp(),
        }
    }
}

/// A field plus its ordered metadata lines.
#[derive(Clone, Debug)]
pub struct FieldFile {
    pub data: FieldData,
    pub metadata: Vec<(String, String)>,
}

impl FieldFile {
    pub fn new(data: FieldData) -> Self {
        Self {
            data,
            metadata: Vec::new(),
        }
    }

    pub fn with_metadata(data: FieldData, metadata: Vec<(String, String)>) -> Self {
        Self { data, metadata }
    }

    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Unwraps a scalar field, erroring with the component count otherwise.
    pub fn into_scalar(self) -> Result<ScalarField> {
        match self.data {
            FieldData::Scalar(f) => Ok(f),
            FieldData::Tensor(f) => Err(Error::DimensionMismatch {
                expected: 1,
                got: f.ncomp(),
            }),
        }
    }

    pub fn into_tensor(self) -> Result<TensorField> {
        match self.data {
            FieldData::Tensor(f) => Ok(f),
            FieldData::Scalar(_) => Err(Error::DimensionMismatch {
                expected: 3,
                got: 1,
            }),
        }
    }
}

/// Serializes a field file; identical inputs yield identical bytes.
///
/// # Panics
///
/// Panics if a metadata key contains `=` or either part contains a newline.
pub fn write_field(path: &Path, file: &FieldFile) -> Result<()> {
    let grid = file.data.grid();
    let ncomp = file.data.ncomp();
    let npts = grid.len();
    let mut bytes = Vec::with_capacity(4 + 2 + 2 + 4 * grid.dim().size() + 8 * ncomp * npts);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.push(grid.dim().size() as u8);
    bytes.push(ncomp as u8);
    for &n in grid.shape() {
        bytes.extend_from_slice(&(n as u32).to_le_bytes());
    }
    match &file.data {
        FieldData::Scalar(f) => {
            for &v in f.values() {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
        FieldData::Tensor(f) => {
            for flat in 0..npts {
                for c in 0..ncomp {
                    bytes.extend_from_slice(&f.component(c)[flat].to_le_bytes());
                }
            }
        }
    }
    for (k, v) in &file.metadata {
        assert!(
            !k.contains('=') && !k.contains('\n') && !v.contains('\n'),
            "metadata must be newline-free with '='-free keys"
        );
        bytes.extend_from_slice(k.as_bytes());
        bytes.push(b'=');
        bytes.extend_from_slice(v.as_bytes());
        bytes.push(b'\n');
    }
    fs::write(path, bytes)?;
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::TruncatedPayload {
                offset: self.buf.len() as u64,
            });
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }
}

/// Reads a field file; exact inverse of [`write_field`].
pub fn read_field(path: &Path) -> Result<FieldFile> {
    let buf = fs::read(path)?;
    let mut cur = Cursor { buf: &buf, pos: 0 };
    if cur.take(4)? != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = u16::from_le_bytes(cur.take(2)?.try_into().unwrap());
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let dim_raw = cur.take(1)?[0] as usize;
    let dim = Dim::from_usize(dim_raw)?;
    let ncomp = cur.take(1)?[0] as usize;
    let mut sizes = [0usize; 3];
    for s in sizes.iter_mut().take(dim.size()) {
        *s = u32::from_le_bytes(cur.take(4)?.try_into().unwrap()) as usize;
    }
    let grid = match dim {
        Dim::Two => Grid::new2(sizes[0], sizes[1]),
        Dim::Three => Grid::new3(sizes[0], sizes[1], sizes[2]),
    };
    let npts = grid.len();
    let payload = cur.take(8 * ncomp * npts)?;
    let read_f64 = |k: usize| f64::from_le_bytes(payload[8 * k..8 * k + 8].try_into().unwrap());
    let data = if ncomp == 1 {
        let values = (0..npts).map(read_f64).collect();
        FieldData::Scalar(ScalarField::new(grid, values)?)
    } else if ncomp == dim.mandel_len() {
        let mut field = TensorField::zeros(grid);
        for c in 0..ncomp {
            let plane = field.component_mut(c);
            for (flat, p) in plane.iter_mut().enumerate() {
                *p = read_f64(flat * ncomp + c);
            }
        }
        FieldData::Tensor(field)
    } else {
        return Err(Error::DimensionMismatch {
            expected: dim.mandel_len(),
            got: ncomp,
        });
    };
    let meta_str = std::str::from_utf8(&buf[cur.pos..])
        .map_err(|e| Error::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, e)))?;
    let mut metadata = Vec::new();
    for line in meta_str.lines() {
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Io(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("metadata line without '=': {line}"),
            ))
        })?;
        metadata.push((k.to_string(), v.to_string()));
    }
    Ok(FieldFile { data, metadata })
}

/// Gray-mapping range for [`write_pgm`].
#[derive(Clone, Copy, Debug)]
pub enum PgmRange {
    /// Min-max of the field, widened by 1e-12 each way when degenerate.
    Auto,
    Fixed(f64, f64),
}

/// Writes an 8-bit binary PGM (axis 0 maps to image rows) plus a sidecar
/// `<path>.scale` recording the `(lo, hi)` actually used, so several maps
/// can share one scale. Returns that range.
///
/// Errors with [`Error::UnsupportedDimension`] for 3D fields.
pub fn write_pgm(field: &ScalarField, path: &Path, range: PgmRange) -> Result<(f64, f64)> {
    let grid = field.grid();
    if grid.dim() != Dim::Two {
        return Err(Error::UnsupportedDimension(3));
    }
    let (mut lo, mut hi) = match range {
        PgmRange::Fixed(lo, hi) => (lo, hi),
        PgmRange::Auto => (field.min(), field.max()),
    };
    if hi <= lo {
        lo -= 1e-12;
        hi += 1e-12;
    }
    let shape = grid.shape();
    let mut bytes = format!("P5\n{} {}\n255\n", shape[1], shape[0]).into_bytes();
    for flat in 0..grid.len() {
        let t = (field.get(flat) - lo) / (hi - lo) * 255.0;
        bytes.push(t.round().clamp(0.0, 255.0) as u8);
    }
    fs::write(path, bytes)?;
    let mut scale_path = path.as_os_str().to_owned();
    scale_path.push(".scale");
    fs::write(scale_path, format!("lo={lo}\nhi={hi}\n"))?;
    Ok((lo, hi))
}

/// Writes a field as CSV: grid indices, then the component values, using
/// shortest round-trip decimal formatting so every f64 survives re-parsing.
pub fn write_csv(path: &Path, data: &FieldData) -> Result<()> {
    let grid = data.grid();
    let d = grid.dim().size();
    let mut out = String::new();
    match data {
        FieldData::Scalar(_) => {
            out.push_str(if d == 2 {
                "i,j,value\n"
            } else {
                "i,j,k,value\n"
            });
        }
        FieldData::Tensor(f) => {
            out.push_str(if d == 2 { "i,j" } else { "i,j,k" });
            for c in 0..f.ncomp() {
                out.push_str(&format!(",m{c}"));
            }
            out.push('\n');
        }
    }
    for flat in 0..grid.len() {
        let idx = grid.unflat(flat);
        for (axis, i) in idx.iter().take(d).enumerate() {
            if axis > 0 {
                out.push(',');
            }
            out.push_str(&i.to_string());
        }
        match data {
            FieldData::Scalar(f) => {
                out.push_str(&format!(",{}", f.get(flat)));
            }
            FieldData::Tensor(f) => {
                for c in 0..f.ncomp() {
                    out.push_str(&format!(",{}", f.component(c)[flat]));
                }
            }
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

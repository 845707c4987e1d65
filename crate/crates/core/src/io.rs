//! Field snapshots (TFF1 binary format), structured text reports, and CSV.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{CoreError, Result};
use crate::field::FourierField;
use crate::lattice::ModeLattice;
use crate::Complex64;

const MAGIC: &[u8; 4] = b"TFF1";
const VERSION: u32 = 1;
const HERMITIAN_TOL: f64 = 1e-12;

/// A field snapshot with its simulation time.
#[derive(Debug, Clone)]
pub struct FieldRecord {
    pub field: FourierField,
    pub time: f64,
}

/// Writes a cubic-lattice field in the TFF1 layout: magic, version (u32),
/// dimension (u8), cutoff (u32), time (f64), then `(2N+1)^d` little-endian
/// `(re, im)` pairs in lexicographic mode order.
pub fn write_field<W: Write>(w: &mut W, field: &FourierField, time: f64) -> Result<()> {
    let lat = field.lattice();
    let n = lat.cutoff()?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[lat.d() as u8])?;
    w.write_all(&(n as u32).to_le_bytes())?;
    w.write_all(&time.to_le_bytes())?;
    for z in field.as_slice() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_exact_array<R: Read, const K: usize>(r: &mut R) -> Result<[u8; K]> {
    let mut buf = [0u8; K];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

/// Reads a TFF1 snapshot, validating the layout and the Hermitian symmetry
/// of the coefficients.
pub fn read_field<R: Read>(r: &mut R) -> Result<FieldRecord> {
    let magic = read_exact_array::<_, 4>(r)?;
    if &magic != MAGIC {
        return Err(CoreError::Format("bad magic, not a TFF1 snapshot".into()));
    }
    let version = u32::from_le_bytes(read_exact_array::<_, 4>(r)?);
    if version != VERSION {
        return Err(CoreError::Format(format!("unsupported version {version}")));
    }
    let d = read_exact_array::<_, 1>(r)?[0] as usize;
    if !(1..=crate::lattice::MAX_D).contains(&d) {
        return Err(CoreError::Format(format!("unsupported dimension {d}")));
    }
    let n = u32::from_le_bytes(read_exact_array::<_, 4>(r)?) as i64;
    let time = f64::from_le_bytes(read_exact_array::<_, 8>(r)?);
    if !time.is_finite() {
        return Err(CoreError::Format("non-finite snapshot time".into()));
    }
    let lat = ModeLattice::cubic(d, n)?;
    let mut coeffs = Vec::with_capacity(lat.len());
    for _ in 0..lat.len() {
        let re = f64::from_le_bytes(read_exact_array::<_, 8>(r)?);
        let im = f64::from_le_bytes(read_exact_array::<_, 8>(r)?);
        coeffs.push(Complex64::new(re, im));
    }
    let field = FourierField::from_vec(lat, coeffs)?;
    let defect = field.hermitian_defect();
    if !(defect <= HERMITIAN_TOL) {
        return Err(CoreError::NotHermitian {
            defect,
            tol: HERMITIAN_TOL,
        });
    }
    Ok(FieldRecord { field, time })
}

/// Writes a snapshot to a file path.
pub fn write_field_file<P: AsRef<Path>>(path: P, field: &FourierField, time: f64) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_field(&mut f, field, time)?;
    f.flush()?;
    Ok(())
}

/// Reads a snapshot from a file path.
pub fn read_field_file<P: AsRef<Path>>(path: P) -> Result<FieldRecord> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    read_field(&mut f)
}

/// Formats a float so that parsing the text recovers the value exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// A `key = value` report with caller-controlled stable key order.
#[derive(Debug, Default)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        let value = value.into();
        debug_assert!(
            self.entries.iter().all(|(k, _)| k != key),
            "duplicate report key {key}"
        );
        self.entries.push((key.to_string(), value));
        self
    }

    pub fn push_f64(&mut self, key: &str, value: f64) -> &mut Self {
        self.push(key, fmt_f64(value))
    }

    pub fn push_i64(&mut self, key: &str, value: i64) -> &mut Self {
        self.push(key, value.to_string())
    }

    pub fn push_usize(&mut self, key: &str, value: usize) -> &mut Self {
        self.push(key, value.to_string())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

/// Line-oriented CSV writer with a fixed column count.
pub struct CsvWriter<W: Write> {
    w: W,
    cols: usize,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut w: W, header: &[&str]) -> Result<Self> {
        writeln!(w, "{}", header.join(","))?;
        Ok(CsvWriter {
            w,
            cols: header.len(),
        })
    }

    pub fn row(&mut self, cells: &[String]) -> Result<()> {
        if cells.len() != self.cols {
            return Err(CoreError::InvalidArgument(format!(
                "csv row has {} cells, expected {}",
                cells.len(),
                self.cols
            )));
        }
        writeln!(self.w, "{}", cells.join(","))?;
        Ok(())
    }

    pub fn row_f64(&mut self, cells: &[f64]) -> Result<()> {
        let cells: Vec<String> = cells.iter().map(|&x| fmt_f64(x)).collect();
        self.row(&cells)
    }

    pub fn finish(mut self) -> Result<()> {
        self.w.flush()?;
        Ok(())
    }
}

//! CSV and PGM files.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use expray_core::{ComplexPoint, RayPolyline};
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder};

/// 17 significant digits, enough to round-trip any double.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trace<W: Write>(out: W, line: &RayPolyline) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "re", "im", "residual"])?;
    for e in &line.entries {
        w.write_record([fmt_f64(e.t), fmt_f64(e.value.re), fmt_f64(e.value.im), fmt_f64(e.residual)])?;
    }
    w.flush()?;
    Ok(())
}

/// Points from a CSV file with `re` and `im` columns, such as a trace.
pub fn read_points(path: &Path) -> Result<Vec<ComplexPoint>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))?;
    let headers = r.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (Some(re), Some(im)) = (column("re"), column("im")) else {
        bail!("{}: header needs `re` and `im` columns", path.display());
    };
    let mut points = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let field = |j: usize| -> Result<f64> {
            let text = record.get(j).unwrap_or("").trim();
            text.parse().with_context(|| format!("{}: row {}: bad number {text:?}", path.display(), i + 2))
        };
        points.push(ComplexPoint::new(field(re)?, field(im)?));
    }
    Ok(points)
}

/// Binary greyscale PGM, row-major from the top row.
pub fn write_pgm<W: Write>(out: W, width: u32, height: u32, pixels: &[u8]) -> Result<()> {
    PnmEncoder::new(out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(pixels, width, height, ExtendedColorType::L8)?;
    Ok(())
}

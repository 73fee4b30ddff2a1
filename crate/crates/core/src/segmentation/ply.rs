use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::ColoredPointCloud;

/// Writes an ASCII PLY 1.0 file with float x/y/z and uchar red/green/blue
/// per vertex, in cloud order.
pub fn export_cloud(cloud: &ColoredPointCloud, path: &Path) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_ply(cloud, &mut w)?;
    w.flush()
}

pub(crate) fn write_ply(cloud: &ColoredPointCloud, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    writeln!(w, "element vertex {}", cloud.points.len())?;
    for axis in ["x", "y", "z"] {
        writeln!(w, "property float {axis}")?;
    }
    for ch in ["red", "green", "blue"] {
        writeln!(w, "property uchar {ch}")?;
    }
    writeln!(w, "end_header")?;
    for p in &cloud.points {
        writeln!(w, "{} {} {} {} {} {}", p.x, p.y, p.z, p.rgb[0], p.rgb[1], p.rgb[2])?;
    }
    Ok(())
}

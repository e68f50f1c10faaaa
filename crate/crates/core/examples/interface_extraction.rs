//! Extracts the zero level set of an analytic field, fits a circle to it and
//! round-trips the field through a binary snapshot.

use phasefield::grid::{Grid, ScalarField};
use phasefield::sharp::{extract_interface, interface_metrics, InterfaceCurve};
use phasefield::snapshot::Snapshot;

fn main() -> phasefield::Result<()> {
    let grid = Grid::cube(2, 1.0, 64)?;
    // two discs: the curve has two closed components
    let u = ScalarField::from_fn(grid, |x| {
        let a = 0.2 - ((x[0] - 0.3).powi(2) + (x[1] - 0.5).powi(2)).sqrt();
        let b = 0.15 - ((x[0] - 0.75).powi(2) + (x[1] - 0.5).powi(2)).sqrt();
        a.max(b).tanh()
    });
    let curve = extract_interface(&u);
    if let InterfaceCurve::Polylines(lines) = &curve {
        for (k, line) in lines.iter().enumerate() {
            println!("component {k}: {} points, closed={}, length {:.4}", line.points.len(), line.closed, line.length());
        }
    }
    let m = interface_metrics(&curve, 2)?;
    println!("total length {:.4}, centroid ({:.3}, {:.3})", m.measure, m.centroid[0], m.centroid[1]);

    let path = std::env::temp_dir().join("phasefield-example.pfs");
    Snapshot { time: 0.0, epsilon: 0.02, field: u.clone() }.write(&path)?;
    let back = Snapshot::read(&path)?;
    assert_eq!(back.field, u);
    println!("snapshot round trip ok: {}", path.display());
    Ok(())
}

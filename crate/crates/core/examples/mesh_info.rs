//! Structured meshes: counts, areas, and point location.
//!
//! ```text
//! cargo run --example mesh_info -- 4 3
//! ```

use ctstokes::mesh::{build_structured_mesh, Rect};

fn main() -> ctstokes::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("integer"));
    let nx = args.next().unwrap_or(4);
    let ny = args.next().unwrap_or(nx);
    let mesh = build_structured_mesh(Rect::symmetric_unit(), nx, ny)?;
    let stats = mesh.statistics();

    println!("{nx} x {ny} mesh of (-1, 1)^2");
    println!(
        "  V = {}, E = {}, T = {} (V - E + T = {})",
        mesh.num_vertices(),
        mesh.num_edges(),
        mesh.num_triangles(),
        mesh.num_vertices() as i64 - mesh.num_edges() as i64 + mesh.num_triangles() as i64
    );
    println!(
        "  area: min {}, max {}, total {}",
        stats.min_area, stats.max_area, stats.total_area
    );

    let x = [0.3, -0.45];
    if let Some((t, bary)) = mesh.locate(x) {
        println!("  {x:?} lies in triangle {t} with barycentrics {bary:.4?}");
    }
    if nx * ny <= 4 {
        print!("{}", mesh.to_text());
    }
    Ok(())
}

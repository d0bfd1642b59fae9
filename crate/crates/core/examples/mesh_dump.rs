//! Builds the Cook's membrane mesh, writes it in the text format, reads it
//! back and reports the face classes.

use cghdg::mesh::{read_mesh, write_mesh, FaceClass};
use cghdg::problems::ProblemKind;
use cghdg::driver::SolveConfig;

fn main() -> cghdg::Result<()> {
    let level: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1);
    let mesh = SolveConfig::new(ProblemKind::CooksMembrane).definition()?.mesh(level)?;
    let mut text = Vec::new();
    write_mesh(&mesh, &mut text)?;
    let back = read_mesh(text.as_slice())?;
    println!("level {level}: {} nodes, {} elements, {} bytes", back.nodes().len(), back.n_elements(), text.len());
    for class in [
        FaceClass::CgInterior,
        FaceClass::HdgInterior,
        FaceClass::Interface,
        FaceClass::Dirichlet,
        FaceClass::Neumann,
    ] {
        println!("{class:?}: {}", back.count_class(class));
    }
    Ok(())
}

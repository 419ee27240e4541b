use std::time::Instant;

use qloc::eigen::Eigensolver;
use qloc::hamiltonian::{Hamiltonian, LaplacianMode, PlanckParams};
use qloc::image::ImageGrid;

fn main() {
    let side: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(32);
    let px: Vec<f64> = (0..side * side).map(|i| ((i as f64) * 0.7311).sin().abs()).collect();
    let img = ImageGrid::new(side, px).unwrap();
    let p = PlanckParams::from_image(&img, 1.0).unwrap();
    let h = Hamiltonian::build(&img, &p, LaplacianMode::Literal);
    let start = Instant::now();
    let basis = Eigensolver::default().solve_hamiltonian(&h).unwrap();
    println!(
        "side={side} dim={} secs={:.3}",
        basis.dim(),
        start.elapsed().as_secs_f64()
    );
}

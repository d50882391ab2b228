//! Times one 250x250 symmetric registration.
//!
//! cargo run --release -p slicereg --example bench

use std::time::Instant;

use slicereg::{
    generate_phantom_pair, register_symmetric, PhantomSpec, RegistrationConfig,
};

fn main() -> slicereg::Result<()> {
    let spec = PhantomSpec::disk(250, 250, 40.0)
        .with_center(120.0, 124.5)
        .with_translation(9.0, 0.0)
        .with_edge_softness(1.5);
    let (r1, r2, _) = generate_phantom_pair(&spec)?;
    let cfg = RegistrationConfig::default();
    let start = Instant::now();
    let res = register_symmetric(&r1, &r2, &cfg)?;
    println!(
        "250x250: {} iterations, converged={}, ssd {:.3} -> {:.3}, {:.2?}",
        res.iterations,
        res.converged,
        res.initial_ssd(),
        res.final_ssd(),
        start.elapsed()
    );
    Ok(())
}

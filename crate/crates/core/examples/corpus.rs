//! Runs the standard phantom corpus and prints per-instance MSD figures.
//!
//! cargo run --release -p slicereg --example corpus -- [alpha] [tau] [max_iters] [tol]
//! cargo run --release -p slicereg --example corpus -- corpus

use std::time::Instant;

use slicereg::{
    generate_phantom_pair, interpolate_midpoint, interpolate_single_direction, linear_interpolate,
    msd, register_single_direction, register_symmetric, standard_corpus, RegistrationConfig,
};

fn main() -> slicereg::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = RegistrationConfig::default();
    if args.first().map(String::as_str) == Some("corpus") {
        cfg = slicereg::corpus_config();
    } else {
        let num = |i: usize| {
            args.get(i)
                .map(|a| a.parse::<f64>().expect("numeric argument"))
        };
        cfg.alpha = num(0).unwrap_or(cfg.alpha);
        cfg.tau = num(1).unwrap_or(cfg.tau);
        cfg.max_iters = num(2).map_or(cfg.max_iters, |m| m as usize);
        cfg.tol = num(3).unwrap_or(cfg.tol);
    }
    println!(
        "alpha={} tau={} max_iters={} tol={}",
        cfg.alpha, cfg.tau, cfg.max_iters, cfg.tol
    );

    let mut ratios = Vec::new();
    let (mut sum_sym, mut sum_single, mut sum_lin) = (0.0, 0.0, 0.0);
    for (i, spec) in standard_corpus().iter().enumerate() {
        let start = Instant::now();
        let (r1, r2, truth) = generate_phantom_pair(spec)?;
        let sym = register_symmetric(&r1, &r2, &cfg)?;
        let single = register_single_direction(&r1, &r2, &cfg)?;
        let m_sym = msd(&truth, &interpolate_midpoint(&r1, &r2, &sym.field)?)?;
        let m_single = msd(
            &truth,
            &interpolate_single_direction(&r1, &r2, &single.field)?,
        )?;
        let m_lin = msd(&truth, &linear_interpolate(&r1, &r2, 0.5)?)?;
        let rises = sym
            .energy_history
            .windows(2)
            .filter(|w| w[1] > w[0] + 1e-9)
            .count();
        println!(
            "#{i} sym={m_sym:.3} single={m_single:.3} linear={m_lin:.3} ratio={:.4} iters={}/{} conv={}/{} ssd_ratio={:.4} rises={rises} ({:.2?})",
            m_sym / m_lin,
            sym.iterations,
            single.iterations,
            sym.converged,
            single.converged,
            sym.final_ssd() / sym.initial_ssd(),
            start.elapsed()
        );
        ratios.push(m_sym / m_lin);
        sum_sym += m_sym;
        sum_single += m_single;
        sum_lin += m_lin;
    }
    let n = ratios.len() as f64;
    println!(
        "mean sym={:.3} single={:.3} linear={:.3} mean_ratio={:.4}",
        sum_sym / n,
        sum_single / n,
        sum_lin / n,
        ratios.iter().sum::<f64>() / n
    );
    Ok(())
}

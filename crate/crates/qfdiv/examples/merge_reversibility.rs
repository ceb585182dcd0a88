//! Reversibility analysis of a coarse-graining channel.
//!
//! The channel merges the first two levels of a three-level system and
//! keeps the third. It preserves the Chernoff distance of the state pair
//! below, yet the pair cannot be recovered: the preserved measure sits
//! at an endpoint of the optimization interval, where equality carries
//! no recovery guarantee. The report shows which conditions break.
//!
//! Run with `cargo run --example merge_reversibility`.

use qfdiv::discrimination::chernoff_distance;
use qfdiv::fdiv::DivergenceFunction;
use qfdiv::reversibility::{equality_report, EqualityOptions};
use qfdiv::sampling::three_level_merge_channel;
use qfdiv::Psd64;

fn main() -> qfdiv::Result<()> {
    let rho = Psd64::from_diagonal(&[2.0 / 3.0, 1.0 / 3.0, 0.0])?;
    let sigma = Psd64::from_diagonal(&[1.0 / 6.0, 1.0 / 3.0, 1.0 / 2.0])?;
    let phi = three_level_merge_channel::<f64>();

    let c_src = chernoff_distance(&rho, &sigma)?;
    let rho_out = Psd64::new(phi.apply(rho.matrix())?)?;
    let sigma_out = Psd64::new(phi.apply(sigma.matrix())?)?;
    let c_img = chernoff_distance(&rho_out, &sigma_out)?;
    println!(
        "Chernoff distance: source {} (alpha* = {:.3}, {}), image {}",
        c_src.value, c_src.alpha_star, c_src.minimizer, c_img.value
    );

    let f = DivergenceFunction::x_log_x();
    let report = equality_report(&phi, &rho, &sigma, &f, &EqualityOptions::default())?;
    println!("relative-entropy gap: {}", report.fdiv_gap.to_f64_lossy());
    let worst_primitive = report
        .primitive_gaps
        .iter()
        .map(|(_, g)| g.abs())
        .fold(0.0, f64::max);
    println!(
        "largest primitive gap over {} nodes: {worst_primitive:.6}",
        report.t_count
    );
    println!("recovery residual: {:.6}", report.recovery_residual);
    println!("verdict: {:?}", report.verdict);
    Ok(())
}

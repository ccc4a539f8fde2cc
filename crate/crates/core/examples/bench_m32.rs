use ma_core::field::{complex_hessian, ma_measure, PeriodicField, ReferenceForm};
use ma_core::density::normalize;
use ma_core::solver::{continuum_mms, solve_fixed_rhs, SolverConfig};
use ma_core::GridSpec;
use std::time::Instant;

fn main() {
    let grid = GridSpec::unit(2, 32).unwrap();
    let omega = ReferenceForm::flat(grid);
    let (phi_star, _) = continuum_mms(grid, 0.02);

    let t0 = Instant::now();
    let h = complex_hessian(&phi_star);
    println!("hessian: {:?} ({} nodes)", t0.elapsed(), grid.nodes());
    drop(h);

    let t0 = Instant::now();
    let mu = ma_measure(&phi_star, &omega);
    println!("ma_measure: {:?}", t0.elapsed());

    let f = normalize(&mu, 1.0).unwrap();
    let t0 = Instant::now();
    let report = solve_fixed_rhs(&omega, &f, &SolverConfig::default()).unwrap();
    println!(
        "solve: {:?}, newton iters {}, residuals {:?}",
        t0.elapsed(),
        report.iterations,
        report.residual_history.last().map(|h| h.len())
    );
}

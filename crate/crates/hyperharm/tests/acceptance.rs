//! Acceptance suite: every criterion at its stated tolerance, one line each.

use std::process::ExitCode;
use std::time::Instant;

use hyperharm::verify;

fn main() -> ExitCode {
    let runs: [(&str, fn() -> verify::Criterion); 11] = [
        ("1", verify::y_power_identity),
        ("2", verify::explicit_surjectivity),
        ("3", verify::regularized_field),
        ("4", verify::boundary_extension),
        ("5", || verify::fourier_splitting(200)),
        ("6", verify::kernel_facts),
        ("7", verify::cohomology_dimensions),
        ("8", verify::phi_audit),
        ("9", verify::poisson_convergence),
        ("10", verify::round_trip),
        ("11", verify::fd_order),
    ];
    let mut failed = 0;
    for (id, run) in runs {
        let t = Instant::now();
        let c = run();
        let status = if c.pass() { "PASS" } else { "FAIL" };
        let bad: Vec<String> = c
            .checks
            .iter()
            .filter(|k| !k.pass)
            .map(|k| format!("{} = {:e} (bound {:e})", k.name, k.value, k.bound))
            .collect();
        println!(
            "{status} criterion {id:>2}: {} [{} checks, {:.1}s]{}",
            c.name,
            c.checks.len(),
            t.elapsed().as_secs_f64(),
            if bad.is_empty() { String::new() } else { format!(" failing: {}", bad.join("; ")) }
        );
        if !c.pass() {
            failed += 1;
        }
    }
    println!("acceptance: {} of 11 criteria pass", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Solve a single polytropic star and print its bulk properties.
//!
//!     cargo run --release --example polytrope_star

use starstab::eos::{build_enthalpy, PressureLaw, TabulationSpec};
use starstab::star::{solve_star, SolveOptions};

fn main() {
    let law = PressureLaw::polytrope(1.0, 1.5).expect("admissible exponent");
    let enthalpy = build_enthalpy(&law, &TabulationSpec::default()).unwrap();
    println!("law: {}", law.label());
    println!("{:>8} {:>12} {:>12} {:>12} {:>10}", "mu", "R", "M", "V(R)", "residual");
    for mu in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let p = solve_star(&enthalpy, mu, &SolveOptions::default()).unwrap();
        println!(
            "{:>8.3} {:>12.8} {:>12.8} {:>12.8} {:>10.2e}",
            mu,
            p.radius,
            p.mass,
            p.v_at(p.radius),
            p.residual
        );
    }
    // scaling collapse: R mu^{1/4} and M mu^{-1/4} should be constant
    let p1 = solve_star(&enthalpy, 1.0, &SolveOptions::default()).unwrap();
    let p4 = solve_star(&enthalpy, 4.0, &SolveOptions::default()).unwrap();
    println!(
        "\nscaling check: R(4)/R(1) = {:.6} (expect 4^(-1/4) = {:.6})",
        p4.radius / p1.radius,
        4f64.powf(-0.25)
    );
}

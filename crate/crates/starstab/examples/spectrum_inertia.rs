//! Inertia of the discretized stability operators: the constrained density
//! form L_mu|_{Z_mu} and the dual operator tilde-L per harmonic degree.
//! The negative count matches the turning point prediction, and the l = 1
//! block carries the translation kernel spanned by V_mu'(r).
//!
//!     cargo run --release --example spectrum_inertia

use starstab::eos::{build_enthalpy, PressureLaw, TabulationSpec};
use starstab::spectral::{coercivity_constant, spectral_report, OperatorKind, ReportOptions};
use starstab::star::{solve_star, SolveOptions};

fn main() {
    let opts = ReportOptions { cells: 48, ..Default::default() };
    for gamma in [1.5, 1.25] {
        let law = PressureLaw::polytrope(1.0, gamma).unwrap();
        let enthalpy = build_enthalpy(&law, &TabulationSpec::default()).unwrap();
        let profile = solve_star(&enthalpy, 1.0, &SolveOptions::default()).unwrap();
        println!("gamma = {gamma} (mu = 1, R = {:.4}, M = {:.4})", profile.radius, profile.mass);
        for kind in [OperatorKind::LmuZmuRadial, OperatorKind::TildeL0, OperatorKind::TildeL1] {
            let rep = spectral_report(&profile, &enthalpy, kind, &opts).unwrap();
            let conv = rep.convergence.as_ref().unwrap();
            println!(
                "  {:?}: n^- = {}, n^0 = {}, min eig = {:+.4e}  (coarse grid agrees: {})",
                kind,
                rep.n_neg,
                rep.n_zero,
                rep.min_eigenvalue,
                conv.coarse_n_neg == rep.n_neg && conv.coarse_n_zero == rep.n_zero,
            );
            if kind == OperatorKind::TildeL1 {
                println!(
                    "    translation kernel eigenvalue shrinks {:.1}x per grid doubling",
                    conv.min_abs_ratio
                );
            }
        }
        match coercivity_constant(&profile, &enthalpy, &opts) {
            Ok(c0) => println!("  coercivity constant C0 = {c0:.5}"),
            Err(e) => println!("  coercivity constant: {e}"),
        }
        println!();
    }
}

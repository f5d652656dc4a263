//! Sweep the white-dwarf mass-radius curve and classify it: the mass grows
//! monotonically toward the limiting value, and every star is stable.
//!
//!     cargo run --release --example white_dwarf_family

use starstab::eos::{build_enthalpy, PressureLaw, TabulationSpec};
use starstab::family::{classify, sweep};
use starstab::star::SolveOptions;

fn main() {
    let law = PressureLaw::white_dwarf(1.0, 1.0).unwrap();
    law.validate().unwrap();
    let enthalpy = build_enthalpy(&law, &TabulationSpec::default()).unwrap();
    let opts = SolveOptions { profile_nodes: 256, rtol: 1e-10, ..Default::default() };
    let mut curve = sweep(&enthalpy, 1e-2, 1e4, 21, &opts, true).unwrap();
    classify(&mut curve, law.gamma0()).unwrap();
    println!("{:>10} {:>12} {:>12} {:>12} {:>5}", "mu", "M", "R", "dM/dmu", "n^u");
    for s in &curve.samples {
        println!(
            "{:>10.3e} {:>12.6} {:>12.6} {:>12.4e} {:>5}",
            s.mu,
            s.mass,
            s.radius,
            s.dm_dmu,
            s.n_unstable.unwrap()
        );
    }
    let last = curve.samples.last().unwrap();
    println!("\nmass approaches its limit: M({:.0e}) = {:.6}", last.mu, last.mass);
}

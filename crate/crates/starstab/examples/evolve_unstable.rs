//! Seed the most negative direction of L_mu|_{Z_mu} on a linearly unstable
//! star (gamma = 5/4, n^u = 1) and watch d(t) grow by orders of magnitude.
//!
//!     cargo run --release --example evolve_unstable

use starstab::eos::{build_enthalpy, PressureLaw, TabulationSpec};
use starstab::hydro::{evolve, make_initial, HydroConfig, PerturbationKind, PerturbationSpec};
use starstab::star::{solve_star, SolveOptions};
use std::sync::Arc;

fn main() {
    let law = PressureLaw::polytrope(1.0, 1.25).unwrap();
    let enthalpy = build_enthalpy(&law, &TabulationSpec::default()).unwrap();
    let profile = Arc::new(solve_star(&enthalpy, 1.0, &SolveOptions::default()).unwrap());
    // The collapse runs away on the core dynamical time, far shorter than a
    // sound-crossing time; stop once d(t) has grown by 1000x.
    let config = HydroConfig {
        cells: 256,
        t_end_crossings: 2.0,
        cadence_crossings: 0.02,
        stop_growth_factor: Some(1000.0),
        perturbation: PerturbationSpec {
            kind: PerturbationKind::EigenmodeSeed,
            amplitude: 1e-3,
            mass_preserving: false,
            center_frac: 0.5,
            width_frac: 0.12,
        },
        ..Default::default()
    };
    let initial = make_initial(&profile, &enthalpy, &config).unwrap();
    let traj = evolve(&initial, &config, &profile, &enthalpy).unwrap();
    let d0 = traj.dist[0].total;
    println!("{:>8} {:>12} {:>10}", "t/t_sc", "d(t)", "d/d(0)");
    for i in 0..traj.times.len() {
        println!(
            "{:>8.2} {:>12.4e} {:>10.2}",
            traj.times[i] / traj.t_unit,
            traj.dist[i].total,
            traj.dist[i].total / d0
        );
    }
    println!("\ngrowth factor sup_t d / d(0) = {:.1}", traj.sup_distance() / d0);
}

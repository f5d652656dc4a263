//! The pointwise Legendre transform of the relative enthalpy and the dual
//! functional B: Fenchel-Young holds to round-off for closed-form laws, and
//! d2 - d4 dominates its dual lower bound with a slack that vanishes
//! quadratically at the linearization.
//!
//!     cargo run --release --example legendre_duality

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use starstab::eos::{build_enthalpy, PressureLaw, TabulationSpec};
use starstab::functionals::{dual_b, duality_gap, PerturbedState};
use starstab::star::{solve_star, SolveOptions};
use std::sync::Arc;

fn main() {
    let law = PressureLaw::polytrope(1.0, 1.5).unwrap();
    let ent = build_enthalpy(&law, &TabulationSpec::default()).unwrap();
    // pointwise transform at a sample background
    let rho_b = 1.0;
    for y in [-5.0, -1.0, 0.0, 1.0, 3.0] {
        let v = ent.psi_star(rho_b, y);
        println!("Psi*_{{rho_b={rho_b}}}({y:+}) = {:+.6}  d/dy = {:+.6}  d2/dy2 = {:+.6}", v.value, v.d1, v.d2);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let viol = ent.fenchel_check(rho_b, 10_000, &mut rng);
    println!("max Fenchel-Young violation over 10^4 samples: {viol:.2e}\n");

    // dual functional on a star
    let profile = Arc::new(solve_star(&ent, 1.0, &SolveOptions::default()).unwrap());
    let r0 = profile.radius;
    let phi = move |r: f64| if r <= r0 { 1.0 } else { r0 / r };
    let dphi = move |r: f64| if r <= r0 { 0.0 } else { -r0 / (r * r) };
    let b = dual_b(phi, dphi, &profile, &ent, 3.0 * r0);
    println!("B(constant inside, harmonic outside) = {b:.6} (pure gradient term {:.6})", 0.5 * r0);

    // duality gap of an interior perturbation
    for eps in [4e-2, 2e-2, 1e-2] {
        let prof = profile.clone();
        let entc = ent.clone();
        let st = PerturbedState::from_fields(profile.clone(), 1.3 * r0, 2049, move |r| {
            let s = r / prof.radius;
            prof.rho_at(r, &entc) * (1.0 + eps * (2.0 * std::f64::consts::PI * s).sin())
        }, |_| 0.0)
        .unwrap();
        let g = duality_gap(&st, &ent).unwrap();
        println!(
            "eps = {eps:.0e}: d2 - d4 = {:+.6e}, dual bound = {:+.6e}, slack = {:.3e}",
            g.d2_minus_d4, g.surrogate, g.slack
        );
    }
}

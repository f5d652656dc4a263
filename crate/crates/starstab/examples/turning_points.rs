//! The turning point principle in action: the unstable-mode count is seeded
//! by the vacuum exponent and changes only at mass extrema, by the bend
//! direction of the mass-radius curve.
//!
//!     cargo run --release --example turning_points

use starstab::eos::{build_enthalpy, PressureLaw, TabulationSpec};
use starstab::family::{classify, i_mu, sweep, CurveEvent, FamilyCurve};
use starstab::star::SolveOptions;

fn main() {
    let opts = SolveOptions { profile_nodes: 256, ..Default::default() };
    for gamma in [1.25, 1.5] {
        let law = PressureLaw::polytrope(1.0, gamma).unwrap();
        let enthalpy = build_enthalpy(&law, &TabulationSpec::default()).unwrap();
        let mut curve = sweep(&enthalpy, 0.1, 10.0, 17, &opts, true).unwrap();
        classify(&mut curve, gamma).unwrap();
        let nu = curve.samples[0].n_unstable.unwrap();
        println!("gamma = {gamma}: n^u = {nu} across the sampled family (no mass extrema)");
        let k = curve.samples.len() / 2;
        println!("  index i_mu at mu = {:.2}: {}", curve.samples[k].mu, i_mu(&curve, k).unwrap());
    }

    // A synthetic curve with a mass maximum while R decreases: M'R' flips
    // from - to +, the curve bends counterclockwise, and n^u rises by one.
    let mu: Vec<f64> = (0..41).map(|i| 1.0 + 0.1 * i as f64).collect();
    let mass: Vec<f64> = mu.iter().map(|&x| 2.0 - 0.05 * (x - 3.0) * (x - 3.0)).collect();
    let radius: Vec<f64> = mu.iter().map(|&x| 3.0 / x).collect();
    let mut curve = FamilyCurve::from_points(mu, mass, radius);
    classify(&mut curve, 1.5).unwrap();
    println!("\nsynthetic curve with a mass maximum:");
    for e in &curve.events {
        if let CurveEvent::MassExtremum { mu, delta } = e {
            println!("  extremum at mu = {mu:.3}, n^u change {delta:+}");
        }
    }
    println!(
        "  n^u: {} -> {}",
        curve.samples.first().unwrap().n_unstable.unwrap(),
        curve.samples.last().unwrap().n_unstable.unwrap()
    );
}

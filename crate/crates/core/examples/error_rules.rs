//! Compares the two error-estimate rules on the one-signed benchmark set.
//!
//! `cargo run --release -p pagani --example error_rules`

use std::time::Instant;

use pagani::cubature::ErrorRule;
use pagani::driver::{integrate, Config};
use pagani::geometry::Bounds;
use pagani::integrands::{lookup, IntegrandId};

fn main() {
    let configs = [(IntegrandId::F3, 3), (IntegrandId::F4, 5), (IntegrandId::F5, 8), (IntegrandId::F6, 6), (IntegrandId::F7, 8)];
    let taus = [1e-3, 2e-4, 4e-5, 8e-6];
    println!("rule,integrand,tau_rel,status,true_rel_err,claimed_rel_err,iterations,regions,wall_ms");
    for rule in [ErrorRule::Cascade, ErrorRule::MaxNull] {
        for (id, dim) in configs {
            let spec = lookup(id, dim).unwrap();
            for tau in taus {
                let cfg = Config { error_rule: rule, ..Config::with_tau_rel(tau) };
                let t = Instant::now();
                let r = integrate(&|x: &[f64]| spec.eval(x), &Bounds::unit(dim).unwrap(), &cfg).unwrap();
                println!(
                    "{rule:?},{},{tau:e},{:?},{:.3e},{:.3e},{},{},{}",
                    spec.label(),
                    r.status,
                    (r.estimate - spec.reference_value).abs() / spec.reference_value.abs(),
                    r.errorest / r.estimate.abs(),
                    r.iterations,
                    r.regions_generated,
                    t.elapsed().as_millis()
                );
            }
        }
    }
}

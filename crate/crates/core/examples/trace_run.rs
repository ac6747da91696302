//! Prints a per-iteration trace of one integration.
//!
//! `cargo run --release -p pagani --example trace_run -- f4 5 1e-5`

use pagani::driver::{integrate_with, Config};
use pagani::errorest::InflatingRefiner;
use pagani::geometry::Bounds;
use pagani::integrands::lookup;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.len() != 4 {
        eprintln!("usage: trace_run <id> <dim> <tau_rel>");
        std::process::exit(2);
    }
    let spec = lookup(args[1].parse().unwrap(), args[2].parse().unwrap()).unwrap();
    let tau: f64 = args[3].parse().unwrap();
    let cfg = Config { rel_filtering_enabled: spec.rel_filtering(), ..Config::with_tau_rel(tau) };
    let f = |x: &[f64]| spec.eval(x);
    let r = integrate_with(&f, &Bounds::unit(spec.dim).unwrap(), &cfg, &InflatingRefiner, &mut |rep, _, _| {
        println!(
            "it {:>3} regions {:>8} rel-finished {:>8} kept {:>8} v {:.6e} e {:.3e} v_f {:.6e} e_f {:.3e} threshold {:?}",
            rep.iteration,
            rep.regions,
            rep.rel_finished,
            rep.active_after,
            rep.acc.v,
            rep.acc.e,
            rep.acc.v_f,
            rep.acc.e_f,
            rep.threshold.as_ref().map(|t| (t.success, t.finished_count))
        );
    })
    .unwrap();
    println!("{r:?}\nreference {}", spec.reference_value);
}

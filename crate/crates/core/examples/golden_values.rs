//! Regenerates the oracle reference values stored in `integrands.rs`.
//!
//!     cargo run --release -p pagani --example golden_values

use pagani::oracle::{box_power_exact, escalating_tensor_gauss, rational_to_f64};

fn main() {
    let per_axis = 100.0 * 25.0f64.atan();
    for dim in [2, 3, 6] {
        let v = per_axis.powi(dim);
        println!("(IntegrandId::F2, {dim}, {v:e}),");
    }
    for dim in [2, 3, 8] {
        let v = rational_to_f64(&box_power_exact(dim, 11));
        println!("(IntegrandId::F7, {dim}, {v:e}),");
    }
    let f8 = |x: &[f64]| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        r2.powi(7) * r2.sqrt()
    };
    for dim in [2usize, 3, 8] {
        let (v, q) = escalating_tensor_gauss(&f8, dim, 1e-13, 8, if dim == 8 { 28 } else { 64 });
        println!("(IntegrandId::F8, {dim}, {v:e}), // q = {q}");
    }
}

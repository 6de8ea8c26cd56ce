use lgsolve::boundary::cos_theta;
use lgsolve::oracle::{minimize_relaxed, GridProblem};
use lgsolve::geometry::Domain;
use lgsolve::anisotropy::Norm2D;

fn main() {
    let d = Domain::disc();
    let f = cos_theta(d.clone());
    let gp = GridProblem::from_domain(&d, &f, &Norm2D::l2(), 64).unwrap();
    let sol = minimize_relaxed(&gp, 6000);
    let h = &sol.energy_history;
    let window = 50;
    let mut prev = f64::INFINITY;
    let mut i = 10;
    let mut worst = (0.0f64, 0usize);
    while i + window <= h.len() {
        let mean: f64 = h[i..i + window].iter().sum::<f64>() / window as f64;
        if mean - prev > worst.0 {
            worst = (mean - prev, i);
        }
        prev = mean;
        i += window;
    }
    println!("worst increase {:.4e} at window {}", worst.0, worst.1);
    println!("monotone(1e-7 slack): {}", sol.history_monotone());
    let w = worst.1;
    if w > 60 {
        for j in (w as i64 - 55)..(w as i64 + 5) {
            if j % 10 == 0 { println!("E[{}] = {:.9}", j, h[j as usize]); }
        }
    }
}

use lgsolve::boundary::{brothers, staircase};
use lgsolve::chord::{solve, trace_deviation, SolveOptions};
use lgsolve::geometry::Domain;
use lgsolve::anisotropy::Norm2D;

fn main() {
    let d = Domain::disc();
    for (name, f) in [("brothers", brothers(d.clone())), ("staircase", staircase(d.clone(), 10))] {
        let offset = d.diameter() * 2f64.powi(-9);
        let mut prev = f64::INFINITY;
        for eps in [1e-2, 1e-3, 1e-4] {
            let excl = 4.0 * eps + 2.0 * offset;
            let opts = SolveOptions {
                levels: 500,
                mollify_eps: eps,
                eps_schedule: Some(vec![eps]),
                ..Default::default()
            };
            let t0 = std::time::Instant::now();
            let field = solve(&d, &f, &Norm2D::l2(), &opts).unwrap();
            let rep = trace_deviation(&field, &f, excl, offset);
            let dev = rep.mean_offset_deviation;
            println!(
                "{name} eps={eps:.0e}: mean dev {:.4} (max {:.4}, int {:.4}, cont {}/{}) decreasing={} [{:?}]",
                dev,
                rep.max_by_radius.last().unwrap(),
                rep.integral_deviation,
                rep.continuity_samples,
                rep.total_samples,
                dev < prev,
                t0.elapsed()
            );
            prev = dev;
        }
    }
}

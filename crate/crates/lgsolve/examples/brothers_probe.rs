use lgsolve::boundary::brothers;
use lgsolve::chord::{solve, tie_families, trace_deviation, SolveOptions};
use lgsolve::geometry::Domain;
use lgsolve::anisotropy::Norm2D;
use lgsolve::pt;

fn main() {
    let d = Domain::disc();
    let f = brothers(d.clone());
    let opts = SolveOptions { levels: 200, mollify_eps: 1e-3, ..Default::default() };
    let t0 = std::time::Instant::now();
    let field = solve(&d, &f, &Norm2D::l2(), &opts).unwrap();
    println!("solve took {:?}", t0.elapsed());
    println!("u(0.9, 0)  = {}", field.eval(pt(0.9, 0.0)));
    println!("u(0, 0.9)  = {}", field.eval(pt(0.0, 0.9)));
    println!("u(0, 0)    = {}", field.eval(pt(0.0, 0.0)));
    println!("nesting residual = {:e}", field.family.nesting.max_residual);
    println!("discrete tv = {}", field.discrete_tv());
    let fams = tie_families(&field);
    println!("tie families: {}", fams.len());
    for fam in &fams {
        println!("  t in [{:.4}, {:.4}], area {:.4}, levels {}", fam.t_lo, fam.t_hi, fam.area, fam.levels);
    }
    let t1 = std::time::Instant::now();
    let rep = trace_deviation(&field, &f, 0.05);
    println!("trace took {:?}", t1.elapsed());
    println!("mean dev by radius: {:?}", rep.mean_by_radius);
    println!("max dev by radius: {:?}", rep.max_by_radius);
    println!("integral dev: {}", rep.integral_deviation);
}

use lgsolve::boundary::bump_train;
use lgsolve::chord::SolveOptions;
use lgsolve::geometry::Domain;
use lgsolve::anisotropy::Norm2D;
use lgsolve::unbounded::{solve_unbounded, TruncationSchedule, UnboundedError};

fn main() {
    let d = Domain::strip_exp();
    let f = bump_train(d.clone());
    let sched = TruncationSchedule::default_for(&d).unwrap().with_offsets(vec![38.0, 40.0]);
    let opts = SolveOptions { levels: 300, ..Default::default() };
    let out = match solve_unbounded(&d, &f, &Norm2D::l2(), &sched, &opts) {
        Ok(o) => o,
        Err(UnboundedError::NoStabilization { partial, .. }) => *partial,
        Err(e) => panic!("{e}"),
    };
    for xm in [2.0f64, 5.0, 10.0, 17.0, 26.0, 37.0] {
        let tv = out.field.discrete_tv_in_slab(&sched.halfplane, xm);
        let mut s = 0.0;
        let mut n = 1.0;
        while n * n <= xm { s += 2.0 / n; n += 1.0; }
        println!("X={xm:>5}: TV {tv:.4}  sum {s:.4}  ratio {:.3}  pass(0.9): {}", tv / s, tv >= 0.9 * s);
    }
}

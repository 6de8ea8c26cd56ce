use lgsolve::boundary::{brothers, cos_theta, mollify, BoundaryFunction, DataClass, MollificationKernel};
use lgsolve::chord::{solve, SolveOptions};
use lgsolve::oracle::{minimize_relaxed, GridProblem};
use lgsolve::geometry::Domain;
use lgsolve::anisotropy::Norm2D;

fn main() {
    let d = Domain::disc();
    let norm = Norm2D::l2();
    let cases: Vec<(&str, BoundaryFunction, usize, usize)> = vec![
        ("constant", BoundaryFunction::new(d.clone(), |_, _| 1.5, vec![], DataClass::C0, "c"), 400, 64),
        ("cos_theta", cos_theta(d.clone()), 400, 64),
        ("cos_theta", cos_theta(d.clone()), 1600, 64),
        ("brothers", brothers(d.clone()), 400, 128),
        ("brothers", brothers(d.clone()), 1600, 128),
    ];
    for (name, f, k, div) in cases {
        let opts = SolveOptions { levels: k, mollify_eps: 1e-3, ..Default::default() };
        let t0 = std::time::Instant::now();
        let field = solve(&d, &f, &norm, &opts).unwrap();
        let f_run = if f.jumps().is_empty() { f.clone() } else { mollify(&f, &MollificationKernel::new(1e-3)) };
        let gp = GridProblem::from_domain(&d, &f_run, &norm, div).unwrap();
        let sol = minimize_relaxed(&gp, 20000);
        let sampled = gp.sample_field(&field);
        let e_chord = gp.energy(&sampled);
        let l1 = gp.l1_distance(&sampled, &sol.v);
        println!(
            "{name} K={k} div={div}: L1 {:.4} (budget {:.4}); E_chord {:.4} E_oracle {:.4} gap {:+.4} (tol {:.4}) native_tv {:.4}  [{:?}]",
            l1, 0.02 * d.area(), e_chord, sol.final_energy, e_chord - sol.final_energy,
            1e-3 * sol.final_energy.max(1.0), field.discrete_tv(), t0.elapsed()
        );
    }
}

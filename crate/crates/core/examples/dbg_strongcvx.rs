use feasopt::model::{ConstraintFunction, ObjectiveFunction, Optimum, Problem, SimpleSet};
use feasopt::strongcvx::{run, StrongcvxConfig};

fn main() {
    for (c, r, d) in [(0.6, 1.0, 2.0), (0.3, 1.0, 3.0), (0.8, 1.2, 2.5)] {
        let corner = (r * r - c * c as f64).sqrt();
        let f_star = 0.5 * (d - corner) * (d - corner);
        let p = Problem::new(
            ObjectiveFunction::ShiftedQuadratic { x0: vec![d, 0.0] },
            vec![
                ConstraintFunction::DistanceToBall { center: vec![0.0, c], radius: r },
                ConstraintFunction::DistanceToBall { center: vec![0.0, -c], radius: r },
            ],
            SimpleSet::AllSpace,
            8.0,
            None,
            Some(Optimum { point: vec![corner, 0.0], value: f_star }),
        )
        .unwrap();
        let cfg = StrongcvxConfig::new(1.0, 500);
        match run(&p, &cfg) {
            Ok(res) => {
                let mut min_gk = f64::INFINITY;
                let mut max_gk = f64::NEG_INFINITY;
                let mut min_dk = f64::INFINITY;
                let mut max_dk = f64::NEG_INFINITY;
                let mut total_inner = 0usize;
                for rec in &res.outers {
                    total_inner += rec.inner;
                    if rec.k < 50 || rec.k > 500 {
                        continue;
                    }
                    let gap = (f_star - p.objective.value(&rec.x)).abs();
                    let dist = ((rec.x[0] - corner).powi(2) + rec.x[1].powi(2)).sqrt();
                    let gk = gap * rec.k as f64;
                    let dk = dist * (rec.k as f64).sqrt();
                    min_gk = min_gk.min(gk);
                    max_gk = max_gk.max(gk);
                    min_dk = min_dk.min(dk);
                    max_dk = max_dk.max(dk);
                }
                println!(
                    "c={c} r={r} d={d}: rows={} conv={} inner_total={} gap*k band ratio={:.2} [{:.3e},{:.3e}] dist*sqrt(k) ratio={:.2} [{:.3e},{:.3e}]",
                    res.trace.len(), res.converged, total_inner,
                    max_gk / min_gk, min_gk, max_gk,
                    max_dk / min_dk, min_dk, max_dk
                );
            }
            Err(e) => println!("c={c} r={r} d={d}: error {e}"),
        }
    }
}

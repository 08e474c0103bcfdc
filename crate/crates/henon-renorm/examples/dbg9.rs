use henon_renorm::geom::Pt;
use henon_renorm::henon::{build_tower, HenonLikeMap};
use henon_renorm::invariants::{morse_smale_report, scan_curve_against_graph};
use henon_renorm::manifolds::{regular_fixed_point, GraphOverY, MapOps};

const A_STAR_T01: f64 = 1.561511646209;

fn main() {
    // probe 1: second parabola scan (grid missing s=0)
    let eval = |s: f64| -> henon_renorm::error::Result<Pt> { Ok([1.0 - 2.0 * s * s, s]) };
    let grid: Vec<f64> = (0..400).map(|i| -1.0 + 2.0 * i as f64 / 399.0).collect();
    let tangent = GraphOverY::constant(1.0, [-1.2, 1.2]);
    let scan = scan_curve_against_graph(eval, &grid, &tangent, 0, 0).unwrap();
    println!(
        "parabola scan: {} tangencies {} transverse",
        scan.tangencies.len(),
        scan.transverse.len()
    );
    for t in &scan.tangencies {
        println!("  tangency param {} point {:?} res {} {}", t.param, t.point, t.residual_g, t.residual_dg);
    }

    // probe 2: regular fixed point of level-1 map
    let map = HenonLikeMap::family_ty(A_STAR_T01, 0.1, 41);
    let tower = build_tower(&map, 8);
    for n in 0..3 {
        let lvl = tower.level(n);
        let ops = MapOps::new(lvl);
        let c = lvl.f.critical_point();
        println!("level {n}: c = {c:.4}");
        for x in [-1.44, -1.3, -1.2, -1.0, -0.5, c - 1e-3] {
            match ops.x1(x, x) {
                Ok(v) => println!("  g({x:.3}) = {:.4}", v - x),
                Err(e) => println!("  g({x:.3}) ERR {e}"),
            }
        }
        match regular_fixed_point(lvl) {
            Ok(s) => println!("  beta0 = {:?} mu={}", s.point, s.mu_u),
            Err(e) => println!("  beta0 ERR {e}"),
        }
    }

    // probe 3: morse-smale on period-2 window
    let m2 = HenonLikeMap::family_ty(1.1, 0.0, 41);
    let rep = morse_smale_report(&m2, 1).unwrap();
    println!("MS report: verdict {:?} homoclinic_free {}", rep.verdict, rep.homoclinic_free);
    for o in &rep.orbits {
        println!("  orbit p={} pt=({:.4},{:.4}) eigs {:?} hyp={} saddle={}", o.period, o.point[0], o.point[1], o.eig_moduli, o.hyperbolic, o.saddle);
    }
    for s in &rep.scans {
        println!("  scan u={} s={} trans={} tang={} partial={}", s.unstable_period, s.stable_period, s.transverse, s.tangencies, s.partial);
    }
}

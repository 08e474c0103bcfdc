use henon_renorm::attractor::tip;
use henon_renorm::geom::{dist_to_polygon, point_in_polygon};
use henon_renorm::henon::{build_tower, HenonLikeMap};
use henon_renorm::manifolds::*;

const A_INF: f64 = 1.401155189092046;
const A_STAR_T01: f64 = 1.561511646209;

fn main() {
    for (label, map) in [
        ("degenerate", HenonLikeMap::family_ty(A_INF, 0.0, 41)),
        ("t=0.1", HenonLikeMap::family_ty(A_STAR_T01, 0.1, 41)),
    ] {
        println!("=== {label} ===");
        let tower = build_tower(&map, 8);
        let tp = tip(&tower).unwrap();
        let ops = MapOps::new(&map);
        let mut doms = Vec::new();
        for n in 1..=3usize {
            let d = prerenorm_domain(&tower, n, tp.tau).unwrap();
            // invariance: 50 interior samples, image under F^{2^n}
            let (mut xlo, mut xhi, mut ylo, mut yhi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
            for p in &d.boundary {
                xlo = xlo.min(p[0]); xhi = xhi.max(p[0]);
                ylo = ylo.min(p[1]); yhi = yhi.max(p[1]);
            }
            let mut seed = 0x9e3779b97f4a7c15u64;
            let mut rng = || {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (seed >> 11) as f64 / (1u64 << 53) as f64
            };
            let mut ok = 0;
            let mut worst: f64 = 0.0;
            let mut got = 0;
            while got < 50 {
                let p = [xlo + (xhi - xlo) * rng(), ylo + (yhi - ylo) * rng()];
                if !point_in_polygon(&d.boundary, p) { continue; }
                got += 1;
                let mut q = p;
                for _ in 0..(1usize << n) {
                    q = ops.apply(q).unwrap();
                }
                if point_in_polygon(&d.boundary, q) {
                    ok += 1;
                } else {
                    worst = worst.max(dist_to_polygon(&d.boundary, q));
                }
            }
            let scale = ((d.corners[1][0]-d.corners[0][0]).powi(2)+(d.corners[1][1]-d.corners[0][1]).powi(2)).sqrt();
            println!("D{n}: inv {ok}/50 worst-escape {:.3e} scale {:.3e}", worst, scale);
            doms.push(d);
        }
        // nesting: vertices of D_{n+1} inside D_n
        for n in 0..2 {
            let inner = &doms[n + 1];
            let outer = &doms[n];
            let mut out_cnt = 0;
            let mut worst: f64 = 0.0;
            for p in &inner.boundary {
                if !point_in_polygon(&outer.boundary, *p) {
                    out_cnt += 1;
                    worst = worst.max(dist_to_polygon(&outer.boundary, *p));
                }
            }
            println!("D{} in D{}: {} of {} vertices outside, worst {:.3e}", n + 2, n + 1, out_cnt, inner.boundary.len(), worst);
        }
        // turning points of W^u(beta_0)
        let b0 = regular_fixed_point(&map).unwrap();
        let un = UnstableManifold::new(&map, b0);
        let dir = if un.saddle.eigvec_u[1] > 0.0 { 1.0 } else { -1.0 };
        let curve = un.trace(dir, 8.0).unwrap();
        let tps = unstable_turning_points(&un, &curve).unwrap();
        let c = map.f.critical_point();
        let v = map.f.eval(c);
        println!("(v,c) = ({:.6},{:.6}) tau=({:.6},{:.6})", v, c, tp.tau[0], tp.tau[1]);
        for (i, (_, p)) in tps.iter().take(4).enumerate() {
            println!("turn {}: ({:.6},{:.6}) |.-(v,c)|={:.4e} |.-tau|={:.4e}", i + 1, p[0], p[1],
                ((p[0]-v).powi(2)+(p[1]-c).powi(2)).sqrt(),
                ((p[0]-tp.tau[0]).powi(2)+(p[1]-tp.tau[1]).powi(2)).sqrt());
        }
        // stable leaf contraction (Prop 3.9 style)
        let b1 = flip_fixed_point(&map).unwrap();
        if let Ok(g) = local_stable_graph(&ops, &b1, 0.3, [-0.6, 0.6], 24) {
            let mut pts: Vec<[f64;2]> = (0..=8).map(|k| {
                let y = -0.3 + 0.6 * k as f64 / 8.0;
                [g.eval(y), y]
            }).collect();
            let mut diams = Vec::new();
            for _ in 0..10 {
                for p in pts.iter_mut() { *p = ops.apply(*p).unwrap(); }
                diams.push(henon_renorm::geom::diameter(&pts));
            }
            let slopes: Vec<f64> = diams.windows(2).map(|w| (w[1]/w[0]).ln()).collect();
            println!("leaf diam slopes {:?}", slopes.iter().map(|s| format!("{s:.3}")).collect::<Vec<_>>());
        }
    }
}

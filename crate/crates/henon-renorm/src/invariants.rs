//! Combinatorial and metric invariants of the heteroclinic web: tangency
//! detection between unstable arcs and stable graphs, the entry time kappa
//! of the extended stable curves into the tip component, the hierarchy
//! index j_k, eigenvalue ratios with their continued fractions, the
//! fold width w(F), and Morse-Smale reports for maps in a doubling window.

use serde::{Deserialize, Serialize};

use crate::attractor::tip;
use crate::error::{Error, Result};
use crate::geom::{diameter, point_in_polygon, Pt};
use crate::henon::{build_tower, microscope, phi_word, HenonLikeMap, RenormTower};
use crate::manifolds::{
    extended_stable, gamma2_marker, gamma_hierarchy, local_stable_graph, newton_periodic,
    prerenorm_domain, regular_fixed_point, saddle_from_point, unstable_turning_points,
    GraphOverY, MapOps, PlaneCurve, SaddleData, UnstableManifold,
};

/// Residual bound (on g and g') below which a critical point of the signed
/// distance counts as a numerical tangency.
pub const TANGENCY_RESIDUAL: f64 = 1e-9;
/// A local extremum of the signed distance is refined only when its
/// parabolic extrapolation predicts a value this close to zero; a pair of
/// transverse roots closer than this fraction of the parameter span is
/// re-examined as a near-tangency.
pub const TANGENCY_ESCALATE: f64 = 1e-6;

/// A detected tangency between the unstable arc of a period-2^k orbit and a
/// stable graph attached to a period-2^n orbit (k, n are labels supplied by
/// the caller and carried through for reporting).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TangencyRecord {
    pub k: usize,
    pub n: usize,
    pub point: Pt,
    /// curve parameter of the tangency in the scanned parametrization
    pub param: f64,
    /// |x(t) - psi(y(t))| at the refined parameter
    pub residual_g: f64,
    /// |d/dt (x(t) - psi(y(t)))| at the refined parameter
    pub residual_dg: f64,
}

/// Outcome of scanning one parametrized curve against one graph x = psi(y).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossingScan {
    pub tangencies: Vec<TangencyRecord>,
    /// transverse crossings: (parameter, point), in parameter order
    pub transverse: Vec<(f64, Pt)>,
    /// true when part of the curve left the graph's y-domain, so crossings
    /// there (if any) were not seen
    pub partial: bool,
}

/// Scan a parametrized plane curve against a graph x = psi(y), separating
/// transverse crossings (sign changes of g(t) = x(t) - psi(y(t)), bisected)
/// from tangencies (interior critical points of g with |g|, |g'| below
/// [`TANGENCY_RESIDUAL`], polished by Newton on g').
pub fn scan_curve_against_graph<E>(
    eval: E,
    grid: &[f64],
    psi: &GraphOverY,
    k: usize,
    n: usize,
) -> Result<CrossingScan>
where
    E: Fn(f64) -> Result<Pt>,
{
    if grid.len() < 3 {
        return Err(Error::Config("tangency scan needs at least 3 grid points".into()));
    }
    let [ylo, yhi] = psi.ydom();
    let g = |t: f64| -> Result<Option<f64>> {
        let p = eval(t)?;
        if p[1] < ylo || p[1] > yhi {
            return Ok(None);
        }
        Ok(Some(p[0] - psi.eval(p[1])))
    };
    let span = (grid[grid.len() - 1] - grid[0]).abs().max(f64::MIN_POSITIVE);

    // contiguous runs of parameters whose image stays in the graph's y-domain
    let mut partial = false;
    let mut runs: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
    for &t in grid {
        match g(t)? {
            Some(v) => runs.last_mut().unwrap().push((t, v)),
            None => {
                partial = true;
                if !runs.last().unwrap().is_empty() {
                    runs.push(Vec::new());
                }
            }
        }
    }

    let mut transverse: Vec<(f64, Pt)> = Vec::new();
    let mut tangencies: Vec<TangencyRecord> = Vec::new();
    let eval_g = |t: f64| -> Result<f64> {
        g(t)?.ok_or(Error::NoIntersection("curve left the graph domain during refinement"))
    };

    for run in &runs {
        // transverse crossings: bisect strict sign changes
        for w in run.windows(2) {
            let ((ta, va), (tb, vb)) = (w[0], w[1]);
            if va * vb < 0.0 {
                let (mut lo, mut hi) = (ta, tb);
                for _ in 0..60 {
                    let tm = 0.5 * (lo + hi);
                    if eval_g(tm)? * va > 0.0 {
                        lo = tm;
                    } else {
                        hi = tm;
                    }
                }
                let t = 0.5 * (lo + hi);
                transverse.push((t, eval(t)?));
            }
        }
        // tangency candidates: interior extrema of g between same-sign
        // neighbours whose parabolic extrapolation comes near zero
        for i in 1..run.len().saturating_sub(1) {
            let (tm, vm) = run[i];
            let (tl, vl) = run[i - 1];
            let (tr, vr) = run[i + 1];
            if vl * vr <= 0.0 || vm.abs() > vl.abs() || vm.abs() > vr.abs() {
                continue;
            }
            let curv = vl - 2.0 * vm + vr;
            let pred = if curv.abs() > 0.0 { vm - (vr - vl).powi(2) / (8.0 * curv) } else { vm };
            let scale = vl.abs().max(vr.abs()).max(1.0);
            if pred.abs() > TANGENCY_ESCALATE * scale {
                continue;
            }
            if let Some(rec) = refine_tangency(&eval_g, &eval, tm, [tl, tr], span, k, n)? {
                tangencies.push(rec);
            }
        }
    }

    // near-coincident transverse pairs may be an unresolved tangency
    let mut i = 0;
    while i + 1 < transverse.len() {
        let (t0, _) = transverse[i];
        let (t1, _) = transverse[i + 1];
        if (t1 - t0).abs() < TANGENCY_ESCALATE * span {
            if let Some(rec) =
                refine_tangency(&eval_g, &eval, 0.5 * (t0 + t1), [t0, t1], span, k, n)?
            {
                tangencies.push(rec);
                transverse.drain(i..=i + 1);
                continue;
            }
        }
        i += 1;
    }

    tangencies.sort_by(|a, b| a.param.partial_cmp(&b.param).unwrap());
    tangencies.dedup_by(|a, b| (a.param - b.param).abs() < 1e-9 * span);
    Ok(CrossingScan { tangencies, transverse, partial })
}

/// Newton on g' (finite differences) from t0, clamped to the bracket; keeps
/// the result only when both residuals drop below [`TANGENCY_RESIDUAL`].
fn refine_tangency<G, E>(
    eval_g: &G,
    eval: &E,
    t0: f64,
    bracket: [f64; 2],
    span: f64,
    k: usize,
    n: usize,
) -> Result<Option<TangencyRecord>>
where
    G: Fn(f64) -> Result<f64>,
    E: Fn(f64) -> Result<Pt>,
{
    let h = 1e-6 * span;
    let dg = |t: f64| -> Result<f64> { Ok((eval_g(t + h)? - eval_g(t - h)?) / (2.0 * h)) };
    let (lo, hi) = (bracket[0].min(bracket[1]), bracket[0].max(bracket[1]));
    let mut t = t0;
    for _ in 0..60 {
        let d1 = dg(t)?;
        let d2 = (eval_g(t + h)? - 2.0 * eval_g(t)? + eval_g(t - h)?) / (h * h);
        if d2 == 0.0 {
            break;
        }
        let tn = (t - d1 / d2).clamp(lo, hi);
        if (tn - t).abs() < 1e-14 * span {
            t = tn;
            break;
        }
        t = tn;
    }
    let residual_g = eval_g(t)?.abs();
    let residual_dg = dg(t)?.abs();
    if residual_g < TANGENCY_RESIDUAL && residual_dg < TANGENCY_RESIDUAL {
        Ok(Some(TangencyRecord { k, n, point: eval(t)?, param: t, residual_g, residual_dg }))
    } else {
        Ok(None)
    }
}

/// Scan a traced unstable branch against a stable graph.
pub fn detect_tangencies(
    un: &UnstableManifold,
    curve: &PlaneCurve,
    psi: &GraphOverY,
    k: usize,
    n: usize,
) -> Result<CrossingScan> {
    scan_curve_against_graph(|t| un.eval(t), &curve.params, psi, k, n)
}

/// Search cap for the entry time kappa.
pub const KAPPA_CAP: usize = 12;
/// Extended stable curves are measured directly up to this index; deeper
/// markers ride the sigma^2 geometric tail (the deep levels are
/// epsilon-degenerate, so the measured ratio has already converged).
const KAPPA_MEASURED_MAX: usize = 4;

/// The entry time kappa = min{k >= 1: M_1^k enters the tip component of
/// D_1 minus the local stable curve of the tip}, decided through the
/// marker distances |tau - z_k| against |tau - a|.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KappaData {
    /// None when no marker enters by `cap`
    pub kappa: Option<usize>,
    pub cap: usize,
    /// horizontal distances |tau - z_k|, k = 1..=cap
    pub marker_dists: Vec<f64>,
    /// leading entries of `marker_dists` measured directly; the rest are
    /// extrapolated geometrically at `ratio`
    pub measured: usize,
    /// geometric tail ratio (tends to sigma^2 = 0.1596...)
    pub ratio: f64,
    /// horizontal distance |tau - a|, a the Gamma_2 marker at the tip height
    pub a_dist: f64,
    /// smallest k whose curve M_1^k visibly enters the tip component
    /// (direct polygon test, attempted over the measured range only)
    pub geometric: Option<usize>,
}

pub fn kappa(tower: &RenormTower) -> Result<KappaData> {
    kappa_with_cap(tower, KAPPA_CAP)
}

pub fn kappa_with_cap(tower: &RenormTower, cap: usize) -> Result<KappaData> {
    let tau = tip(tower)?.tau;
    let a = gamma2_marker(tower.level(0), tau)?;
    let a_dist = (a[0] - tau[0]).abs();
    let mut marker_dists = Vec::new();
    for k in 1..=KAPPA_MEASURED_MAX.min(tower.depth()) {
        match extended_stable(tower, k, tau) {
            Ok(es) => marker_dists.push((es.z[0] - tau[0]).abs()),
            Err(_) => break,
        }
    }
    if marker_dists.is_empty() {
        return Err(Error::TowerTooShallow { op: "kappa", needed: 1, have: tower.depth() });
    }
    let measured = marker_dists.len();
    let ratio = if measured >= 2 {
        marker_dists[measured - 1] / marker_dists[measured - 2]
    } else {
        0.16
    };
    while marker_dists.len() < cap {
        marker_dists.push(marker_dists.last().unwrap() * ratio);
    }
    let kappa = marker_dists.iter().position(|d| *d <= a_dist).map(|i| i + 1);
    let geometric = match kappa {
        Some(k) if k <= measured => kappa_geometric(tower, tau, measured).unwrap_or(None),
        _ => None,
    };
    Ok(KappaData { kappa, cap, marker_dists, measured, ratio, a_dist, geometric })
}

/// Direct geometric entry test: clip D_1 by the local stable leaf through
/// tau (keeping the component away from beta_1) and look for samples of
/// M_1^k inside.
fn kappa_geometric(tower: &RenormTower, tau: Pt, kmax: usize) -> Result<Option<usize>> {
    let d1 = prerenorm_domain(tower, 1, tau)?;
    let nl = tower.depth().min(4);
    let leaf = extended_stable(tower, nl, tau)?.m0;
    let off = tau[0] - leaf.eval(tau[1]);
    let side = |p: Pt| p[0] - (leaf.eval(p[1]) + off);
    let nb = d1.boundary.len();
    let mut poly: Vec<Pt> = Vec::new();
    for i in 0..nb {
        let p = d1.boundary[i];
        let q = d1.boundary[(i + 1) % nb];
        let (sp, sq) = (side(p), side(q));
        if sp >= 0.0 {
            poly.push(p);
        }
        if sp * sq < 0.0 {
            let t = sp / (sp - sq);
            poly.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    if poly.len() < 3 {
        return Ok(None);
    }
    // keep test points clear of the leaf so grazing contact doesn't count
    let margin = 1e-6 * diameter(&poly);
    for k in 1..=kmax {
        let m1 = extended_stable(tower, k, tau)?.m1;
        let [ylo, yhi] = m1.ydom();
        let hit = (0..=200).any(|i| {
            let y = ylo + (yhi - ylo) * i as f64 / 200.0;
            let p = [m1.eval(y), y];
            side(p) > margin && point_in_polygon(&poly, p)
        });
        if hit {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// kappa of R^n F for n = 0..=nmax, from suffix towers of one base tower.
pub fn kappa_per_level(tower: &RenormTower, nmax: usize) -> Result<Vec<KappaData>> {
    (0..=nmax)
        .map(|n| {
            if n > tower.depth() {
                return Err(Error::TowerTooShallow {
                    op: "kappa_per_level",
                    needed: n,
                    have: tower.depth(),
                });
            }
            kappa(&tower.suffix(n))
        })
        .collect()
}

/// The hierarchy index j_k: the largest j >= 2 whose curve Gamma_j sits on
/// the opposite side of M_1^k from Gamma_inf (whether Gamma_j meets M_1^k
/// flips exactly once along the hierarchy).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JData {
    pub k: usize,
    /// None when every Gamma_j up to jmax already agrees with Gamma_inf
    pub j: Option<usize>,
    /// whether Gamma_inf itself meets M_1^k (selects the defining branch)
    pub inf_meets: bool,
    /// meet flags for Gamma_j, j = 2..=jmax
    pub meets: Vec<bool>,
    /// true when the remaining curves sit closer to Gamma_inf than
    /// Gamma_inf's separation from M_1^k, so deeper j cannot flip the answer
    pub decided: bool,
    pub jmax: usize,
}

pub fn j_invariant(tower: &RenormTower, k: usize, jmax: usize) -> Result<JData> {
    let tau = tip(tower)?.tau;
    let m1 = extended_stable(tower, k, tau)?.m1;
    let gh = gamma_hierarchy(tower.level(0), jmax)?;
    let inf_meets = graphs_cross(&gh.big_gamma_inf, &m1);
    let meets: Vec<bool> = gh.big_gammas.iter().map(|g| graphs_cross(g, &m1)).collect();
    let j = meets
        .iter()
        .enumerate()
        .rev()
        .find(|&(_, m)| *m != inf_meets)
        .map(|(i, _)| i + 2);
    // separation certificate: once dist(Gamma_j, Gamma_inf) stays below
    // min |Gamma_inf - M_1^k|, every deeper curve agrees with Gamma_inf
    let decided = if inf_meets {
        false
    } else {
        let sep = graph_separation(&gh.big_gamma_inf, &m1);
        let tail = match j {
            Some(j) => j - 1, // dists[i] belongs to Gamma_{i+2}
            None => 0,
        };
        gh.dists[tail..].iter().all(|d| *d < sep)
    };
    Ok(JData { k, j, inf_meets, meets, decided, jmax })
}

/// Whether two graphs over y cross on the overlap of their domains.
fn graphs_cross(a: &GraphOverY, b: &GraphOverY) -> bool {
    let lo = a.ydom()[0].max(b.ydom()[0]);
    let hi = a.ydom()[1].min(b.ydom()[1]);
    if lo >= hi {
        return false;
    }
    let n = 400;
    let mut prev = a.eval(lo) - b.eval(lo);
    if prev == 0.0 {
        return true;
    }
    for i in 1..=n {
        let y = lo + (hi - lo) * i as f64 / n as f64;
        let cur = a.eval(y) - b.eval(y);
        if cur == 0.0 || prev * cur < 0.0 {
            return true;
        }
        prev = cur;
    }
    false
}

/// min |a - b| over the overlap of the domains (infinite if disjoint).
fn graph_separation(a: &GraphOverY, b: &GraphOverY) -> f64 {
    let lo = a.ydom()[0].max(b.ydom()[0]);
    let hi = a.ydom()[1].min(b.ydom()[1]);
    if lo >= hi {
        return f64::INFINITY;
    }
    let n = 400;
    (0..=n)
        .map(|i| {
            let y = lo + (hi - lo) * i as f64 / n as f64;
            (a.eval(y) - b.eval(y)).abs()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvalue ratio rho = ln|lambda| / ln|mu| of a contracting and an
/// expanding eigenvalue, with the leading continued-fraction terms of |rho|
/// (reported as data; no rationality claim is made).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RhoData {
    pub rho: f64,
    pub log_lambda: f64,
    pub log_mu: f64,
    pub continued_fraction: Vec<i64>,
}

pub fn ratio_rho(contracting: &SaddleData, expanding: &SaddleData) -> Result<RhoData> {
    let l = contracting.lambda_s.abs();
    if l <= 0.0 {
        return Err(Error::OutOfRange { what: "contracting eigenvalue in rho", value: l });
    }
    let mu = expanding.mu_u.abs();
    if mu <= 1.0 {
        return Err(Error::OutOfRange { what: "expanding eigenvalue in rho", value: mu });
    }
    let (log_lambda, log_mu) = (l.ln(), mu.ln());
    let rho = log_lambda / log_mu;
    Ok(RhoData { rho, log_lambda, log_mu, continued_fraction: continued_fraction(rho.abs(), 10) })
}

fn continued_fraction(mut x: f64, terms: usize) -> Vec<i64> {
    let mut out = Vec::new();
    for _ in 0..terms {
        let a = x.floor();
        out.push(a as i64);
        let frac = x - a;
        if frac < 1e-12 {
            break;
        }
        x = 1.0 / frac;
    }
    out
}

/// Fold width w(F): horizontal distance between the first and third
/// turning points of W^u(beta_0); scales like b_F and, renormalized,
/// like b^(2^n).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WidthData {
    pub w: f64,
    /// first and third turning points
    pub pts: [Pt; 2],
}

pub fn width(map: &HenonLikeMap) -> Result<WidthData> {
    let b0 = regular_fixed_point(map)?;
    let un = UnstableManifold::new(map, b0);
    let dir = if un.saddle.eigvec_u[1] > 0.0 { 1.0 } else { -1.0 };
    let curve = un.trace(dir, 8.0)?;
    let turns = unstable_turning_points(&un, &curve)?;
    if turns.len() < 3 {
        return Err(Error::NoIntersection("fewer than three turning points on W^u(beta_0)"));
    }
    let (p1, p3) = (turns[0].1, turns[2].1);
    Ok(WidthData { w: (p1[0] - p3[0]).abs(), pts: [p1, p3] })
}

/// w(R^n F) for n = 0..=nmax.
pub fn width_per_level(tower: &RenormTower, nmax: usize) -> Result<Vec<WidthData>> {
    if nmax > tower.depth() {
        return Err(Error::TowerTooShallow {
            op: "width_per_level",
            needed: nmax,
            have: tower.depth(),
        });
    }
    (0..=nmax).map(|n| width(tower.level(n))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MsVerdict {
    /// every orbit of period up to 2^depth is hyperbolic, no tangency was
    /// found, and no homoclinic intersection showed up in the scans
    MorseSmaleUpToDepth,
    TangencyFound,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitVerdict {
    pub period: usize,
    pub point: Pt,
    /// eigenvalue moduli of DF^period at the orbit, ascending
    pub eig_moduli: [f64; 2],
    pub hyperbolic: bool,
    pub saddle: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanSummary {
    /// period of the saddle whose unstable branch was traced
    pub unstable_period: usize,
    /// period of the saddle whose local stable graph was scanned
    pub stable_period: usize,
    pub transverse: usize,
    pub tangencies: usize,
    pub partial: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MorseSmaleReport {
    pub depth: usize,
    pub orbits: Vec<OrbitVerdict>,
    pub scans: Vec<ScanSummary>,
    pub tangencies: Vec<TangencyRecord>,
    pub homoclinic_free: bool,
    pub verdict: MsVerdict,
}

/// Hyperbolicity and intersection report for a map inside a period-2^depth
/// doubling window: locates the periodic orbits of period 2^0..2^depth
/// (through the renormalization charts), checks their eigenvalues off the
/// unit circle, scans unstable branches of the saddles against the local
/// stable graphs of the others, and looks for homoclinic intersections.
/// The verdict is "up to depth and budget": manifolds are traced to finite
/// arclength and stable graphs are local.
pub fn morse_smale_report(map: &HenonLikeMap, depth: usize) -> Result<MorseSmaleReport> {
    let tower = build_tower(map, depth);
    if tower.depth() < depth {
        return Ok(MorseSmaleReport {
            depth: tower.depth(),
            orbits: vec![],
            scans: vec![],
            tangencies: vec![],
            homoclinic_free: true,
            verdict: MsVerdict::Inconclusive,
        });
    }
    let ops = MapOps::new(tower.level(0));
    let tol = 1e-6;
    let mut orbits: Vec<OrbitVerdict> = Vec::new();
    // beta_0 sits left of B and can fall outside the extended domain for
    // small a; it is then omitted from the report rather than failing it
    let b0 = regular_fixed_point(tower.level(0)).ok();
    if let Some(b0) = &b0 {
        orbits.push(orbit_verdict(&ops, b0.point, 1, tol)?);
    }
    for k in 0..=depth {
        let zk = core_fixed_point(tower.level(k))?;
        let seed = microscope(&tower, &phi_word(k), zk)?;
        let period = 1usize << k;
        let z = newton_periodic(&ops, seed, period)?;
        orbits.push(orbit_verdict(&ops, z, period, tol)?);
    }

    // saddles carry the invariant curves to scan
    let saddles: Vec<SaddleData> = orbits
        .iter()
        .filter(|o| o.saddle)
        .filter_map(|o| saddle_from_point(&ops, o.point, o.period).ok())
        .collect();
    let ydom = [-1.3, 1.3];
    let mut scans: Vec<ScanSummary> = Vec::new();
    let mut tangencies: Vec<TangencyRecord> = Vec::new();
    let mut homoclinic_free = true;
    for su in &saddles {
        let un = UnstableManifold::new(tower.level(0), su.clone());
        let branches: Vec<PlaneCurve> = [1.0, -1.0]
            .iter()
            .filter_map(|&dir| un.trace(dir, 6.0).ok())
            .collect();
        for ss in &saddles {
            let stable = match local_stable_graph(&ops, ss, 0.25, ydom, 24) {
                Ok(g) => g,
                Err(_) => {
                    scans.push(ScanSummary {
                        unstable_period: su.period,
                        stable_period: ss.period,
                        transverse: 0,
                        tangencies: 0,
                        partial: true,
                    });
                    continue;
                }
            };
            let mut summary = ScanSummary {
                unstable_period: su.period,
                stable_period: ss.period,
                transverse: 0,
                tangencies: 0,
                partial: branches.len() < 2,
            };
            let same_orbit = su.period == ss.period
                && (su.point[0] - ss.point[0]).abs() + (su.point[1] - ss.point[1]).abs() < 1e-9;
            let orbit_pts = orbit_points(&ops, ss.point, ss.period)?;
            for curve in &branches {
                let scan = match detect_tangencies(&un, curve, &stable, su.period, ss.period) {
                    Ok(s) => s,
                    Err(_) => {
                        summary.partial = true;
                        continue;
                    }
                };
                summary.partial |= scan.partial;
                summary.tangencies += scan.tangencies.len();
                tangencies.extend(scan.tangencies);
                for (_, p) in &scan.transverse {
                    // the saddle itself lies on both of its manifolds
                    let on_orbit = orbit_pts
                        .iter()
                        .any(|q| (p[0] - q[0]).abs() + (p[1] - q[1]).abs() < 1e-6);
                    if !on_orbit {
                        summary.transverse += 1;
                        if same_orbit {
                            homoclinic_free = false;
                        }
                    }
                }
            }
            scans.push(summary);
        }
    }

    let all_hyperbolic = orbits.iter().all(|o| o.hyperbolic);
    let verdict = if !tangencies.is_empty() {
        MsVerdict::TangencyFound
    } else if all_hyperbolic && homoclinic_free && !orbits.is_empty() {
        MsVerdict::MorseSmaleUpToDepth
    } else {
        MsVerdict::Inconclusive
    };
    Ok(MorseSmaleReport { depth, orbits, scans, tangencies, homoclinic_free, verdict })
}

fn orbit_points(ops: &MapOps, z: Pt, period: usize) -> Result<Vec<Pt>> {
    let mut pts = vec![z];
    for _ in 1..period {
        let q = ops.apply(*pts.last().unwrap())?;
        pts.push(q);
    }
    Ok(pts)
}

/// Eigenvalue moduli of DF^period along the orbit, plus hyperbolicity and
/// saddle flags (a complex pair reports its common modulus twice).
fn orbit_verdict(ops: &MapOps, z: Pt, period: usize, tol: f64) -> Result<OrbitVerdict> {
    let mut m = [[1.0f64, 0.0], [0.0, 1.0]];
    let mut p = z;
    for _ in 0..period {
        let d = ops.dmat(p)?;
        m = [
            [d[0][0] * m[0][0] + d[0][1] * m[1][0], d[0][0] * m[0][1] + d[0][1] * m[1][1]],
            [d[1][0] * m[0][0] + d[1][1] * m[1][0], d[1][0] * m[0][1] + d[1][1] * m[1][1]],
        ];
        p = ops.apply(p)?;
    }
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = 0.25 * tr * tr - det;
    let eig_moduli = if disc >= 0.0 {
        let r = disc.sqrt();
        let (e1, e2) = ((0.5 * tr - r).abs(), (0.5 * tr + r).abs());
        [e1.min(e2), e1.max(e2)]
    } else {
        let modu = det.abs().sqrt();
        [modu, modu]
    };
    let hyperbolic = (eig_moduli[0] - 1.0).abs() > tol && (eig_moduli[1] - 1.0).abs() > tol;
    let saddle = eig_moduli[0] < 1.0 && eig_moduli[1] > 1.0;
    Ok(OrbitVerdict { period, point: z, eig_moduli, hyperbolic, saddle })
}

/// The fixed point of a (level) map on the core side of the critical point,
/// found on the diagonal x1(x, x) = x; exists regardless of stability, so
/// it also seeds the sink at the deepest level of a doubling window.
fn core_fixed_point(map: &HenonLikeMap) -> Result<Pt> {
    let ops = MapOps::new(map);
    let c = map.f.critical_point();
    let g = |x: f64| -> Result<f64> { Ok(ops.x1(x, x)? - x) };
    let (mut lo, mut hi) = (c + 1e-3, 1.0);
    let (glo, ghi) = (g(lo)?, g(hi)?);
    if glo * ghi > 0.0 {
        return Err(Error::Bracket { what: "core fixed point on the diagonal" });
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if g(mid)? * glo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    Ok([x, x])
}

//! Geodesic tightening of combinatorial closed curves.
//!
//! The word is expanded to a cyclic portal word over the triangulated
//! complex and developed into the plane. If a straight closed leaf crosses
//! every developed window, the class is a cylinder core and its length is
//! the holonomy translation. Otherwise the minimal representative bends at
//! window endpoints, and a shortest-cycle search over those contact vertices
//! finds it: chords are validated by exact monotone window intersections.
//!
//! The result is certified by the angle criterion (both side angles at
//! least π at every cone point). A failed certificate rewrites the portal
//! word across the deficient vertex and reruns, which strictly shortens the
//! representative, so the fixed point is the geodesic.

use crate::complex::{Complex, RayAt};
use crate::error::{FlatError, Result};
use crate::num::{q_to_f64, seg_intersect_params, Direction, Iso, Q, V2};
use crate::surface::HalfTranslationSurface;
use crate::trace::{trace_on, TraceEnd};
use crate::word::{Crossing, CurveWord};
use num_traits::{Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeodesicKind {
    /// Interior closed leaf of a cylinder; meets no cone point.
    CylinderCore,
    /// Meets cone points, but always with one side angle exactly π.
    BoundaryCore,
    /// Genuinely bends at some cone point (both sides strictly above π
    /// somewhere, or mixed).
    Singular,
}

#[derive(Clone, Debug)]
pub struct GeoSegment {
    /// Physical length of the straight segment.
    pub len: f64,
    /// Exact physical squared length.
    pub len2: Q,
    pub direction: Direction,
    /// Angle of the segment in `[0, π)`.
    pub theta: f64,
}

#[derive(Clone, Debug)]
pub struct CornerTurn {
    pub class: usize,
    pub left_angle: f64,
    pub right_angle: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct Portal {
    pub tri: usize,
    pub slot: usize,
    pub crossing: Option<Crossing>,
}

/// One straight stretch of the representative inside a triangle.
#[derive(Clone, Debug)]
pub(crate) struct Piece {
    pub tri: usize,
    pub a: V2,
    pub b: V2,
    /// Index into the period portal list of the next portal the path
    /// crosses after this piece.
    pub next_portal: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct Visit {
    pub class: usize,
    /// Ray pointing back along the incoming segment.
    pub back_ray: RayAt,
    /// Ray along the outgoing segment.
    pub out_ray: RayAt,
    pub left: f64,
    pub right: f64,
    /// The visit happens right after this piece (cyclically).
    pub after_piece: usize,
}

#[derive(Clone, Debug)]
pub struct FlatGeodesic {
    /// Crossing word of the tightened representative.
    pub word: CurveWord,
    /// Total physical length.
    pub length: f64,
    pub segments: Vec<GeoSegment>,
    pub corners: Vec<CornerTurn>,
    pub kind: GeodesicKind,
    pub(crate) pieces: Vec<Piece>,
    pub(crate) visits: Vec<Visit>,
    pub(crate) portals: Vec<Portal>,
}

impl FlatGeodesic {
    pub fn is_cylinder(&self) -> bool {
        matches!(self.kind, GeodesicKind::CylinderCore | GeodesicKind::BoundaryCore)
    }
}

struct Windows {
    /// One period of portals.
    portals: Vec<Portal>,
    /// Placement of the from-triangle of portal `k` for `k = 0..=2m`.
    mdev: Vec<Iso>,
    /// Developed window endpoints `(left, right)` from the path's view.
    win: Vec<(V2, V2)>,
    holonomy: Iso,
}

fn dual_path(cx: &Complex, from: usize, to: usize) -> Result<Vec<Portal>> {
    if from == to {
        return Ok(Vec::new());
    }
    // BFS over diagonal adjacencies inside one polygon.
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; cx.tris.len()];
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(from);
    prev[from] = Some((from, 3));
    while let Some(t) = queue.pop_front() {
        if t == to {
            break;
        }
        for slot in 0..3 {
            let adj = &cx.tris[t].adj[slot];
            if adj.crossing.is_some() {
                continue;
            }
            if prev[adj.tri].is_none() {
                prev[adj.tri] = Some((t, slot));
                queue.push_back(adj.tri);
            }
        }
    }
    if prev[to].is_none() {
        return Err(FlatError::Internal("polygon dual tree is disconnected".into()));
    }
    let mut rev = Vec::new();
    let mut cur = to;
    while cur != from {
        let (t, slot) = prev[cur].unwrap();
        rev.push(Portal {
            tri: t,
            slot,
            crossing: None,
        });
        cur = t;
    }
    rev.reverse();
    Ok(rev)
}

fn build_windows(
    cx: &Complex,
    surface: &HalfTranslationSurface,
    word: &CurveWord,
    boundary_slot: &std::collections::HashMap<(usize, usize), (usize, usize)>,
) -> Result<Windows> {
    let n = word.len();
    let mut portals: Vec<Portal> = Vec::new();
    for i in 0..n {
        let c = word.crossings[i];
        let c_next = word.crossings[(i + 1) % n];
        let entry = c.entry_edge(surface);
        let exit = c_next.exit_edge(surface);
        let &(t_in, _) = boundary_slot
            .get(&(entry.poly, entry.edge))
            .ok_or_else(|| FlatError::Internal("missing entry slot".into()))?;
        let &(t_out, s_out) = boundary_slot
            .get(&(exit.poly, exit.edge))
            .ok_or_else(|| FlatError::Internal("missing exit slot".into()))?;
        portals.extend(dual_path(cx, t_in, t_out)?);
        portals.push(Portal {
            tri: t_out,
            slot: s_out,
            crossing: Some(c_next),
        });
    }
    let m = portals.len();
    let mut mdev = Vec::with_capacity(3 * m + 2);
    let mut win = Vec::with_capacity(3 * m + 1);
    let mut cur = Iso::identity();
    for k in 0..=(3 * m) {
        let p = &portals[k % m];
        mdev.push(cur.clone());
        let tri = &cx.tris[p.tri];
        let l = cur.apply(&tri.v[(p.slot + 1) % 3]);
        let r = cur.apply(&tri.v[p.slot]);
        win.push((l, r));
        let iso = &tri.adj[p.slot].iso;
        cur = cur.compose(&iso.inverse());
    }
    mdev.push(cur.clone());
    let holonomy = mdev[m].clone();
    Ok(Windows {
        portals,
        mdev,
        win,
        holonomy,
    })
}

/// Straight closed leaf: offsets of lines in direction `t` crossing every
/// window of the first period, as an exact interval. Returns a start point
/// on window 0 when the interval has interior.
fn straight_leaf(w: &Windows) -> Option<V2> {
    let h = &w.holonomy;
    if h.flip || h.t.is_zero() {
        return None;
    }
    let t = &h.t;
    let m = w.portals.len();
    let mut lo: Option<Q> = None;
    let mut hi: Option<Q> = None;
    for k in 0..m {
        let (l, r) = &w.win[k];
        // Forward crossing: the leaf must exit through each portal.
        let e = l.sub(r);
        let n_out = V2::new(e.y.clone(), -e.x.clone());
        if !t.dot(&n_out).is_positive() {
            return None;
        }
        let cl = t.cross(l);
        let cr = t.cross(r);
        let (a, b) = if cl <= cr { (cl, cr) } else { (cr, cl) };
        lo = Some(match lo {
            None => a,
            Some(x) => x.max(a),
        });
        hi = Some(match hi {
            None => b,
            Some(x) => x.min(b),
        });
    }
    let (lo, hi) = (lo?, hi?);
    if lo >= hi {
        return None;
    }
    let c = (&lo + &hi) / crate::num::qi(2);
    let (l0, r0) = &w.win[0];
    let cl = t.cross(l0);
    let cr = t.cross(r0);
    let denom = &cl - &cr;
    if denom.is_zero() {
        return None;
    }
    let s = (&c - &cr) / denom;
    Some(r0.add(&l0.sub(r0).scale(&s)))
}

/// Chord feasibility: `[a, b]` meets windows `i+1..j` in weakly increasing
/// parameter order.
fn chord_ok(w: &Windows, a: &V2, b: &V2, i: usize, j: usize) -> bool {
    let mut prev = Q::zero();
    for k in (i + 1)..j {
        let (l, r) = &w.win[k];
        match seg_intersect_params(a, b, l, r) {
            None => return false,
            Some((lo, hi)) => {
                let lo = lo.max(prev.clone());
                if lo > hi {
                    return false;
                }
                prev = lo;
            }
        }
    }
    true
}

fn point_at(w: &Windows, pos: usize, left: bool) -> &V2 {
    let (l, r) = &w.win[pos];
    if left {
        l
    } else {
        r
    }
}

struct DpPath {
    /// Contact sequence `(position, is_left)` from some start to its
    /// holonomy image one period later.
    contacts: Vec<(usize, bool)>,
    length: f64,
    max_chord_len2: Q,
}

fn dp_shortest(w: &Windows) -> Option<DpPath> {
    let m = w.portals.len();
    let node_len = |a: &V2, b: &V2| -> f64 { q_to_f64(&b.sub(a).norm2()).sqrt() };
    let mut best: Option<DpPath> = None;
    let mut best_len = f64::INFINITY;
    for k0 in 0..m {
        for s0 in [true, false] {
            let start_pt = point_at(w, k0, s0).clone();
            // dist[(k - k0 - 1) * 2 + side] over positions k0+1..=k0+m.
            let span = m;
            let mut dist = vec![f64::INFINITY; span * 2];
            let mut pred: Vec<Option<(usize, bool)>> = vec![None; span * 2];
            let idx = |k: usize, left: bool| -> usize { (k - k0 - 1) * 2 + usize::from(left) };
            for k in (k0 + 1)..=(k0 + m) {
                for side in [true, false] {
                    let pt = point_at(w, k, side);
                    // Direct chord from the start contact.
                    if chord_ok(w, &start_pt, pt, k0, k) {
                        let d = node_len(&start_pt, pt);
                        if d < dist[idx(k, side)] {
                            dist[idx(k, side)] = d;
                            pred[idx(k, side)] = None;
                        }
                    }
                    for ki in (k0 + 1)..k {
                        for si in [true, false] {
                            let di = dist[idx(ki, si)];
                            if !di.is_finite() || di >= dist[idx(k, side)] || di >= best_len {
                                continue;
                            }
                            let pi = point_at(w, ki, si);
                            if chord_ok(w, pi, pt, ki, k) {
                                let d = di + node_len(pi, pt);
                                if d < dist[idx(k, side)] {
                                    dist[idx(k, side)] = d;
                                    pred[idx(k, side)] = Some((ki, si));
                                }
                            }
                        }
                    }
                }
            }
            let total = dist[idx(k0 + m, s0)];
            if total < best_len {
                best_len = total;
                // Reconstruct contacts.
                let mut contacts = vec![(k0 + m, s0)];
                let mut cur = (k0 + m, s0);
                while let Some(p) = pred[idx(cur.0, cur.1)] {
                    contacts.push(p);
                    cur = p;
                }
                contacts.push((k0, s0));
                contacts.reverse();
                let mut max_chord = Q::zero();
                for pair in contacts.windows(2) {
                    let a = point_at(w, pair[0].0, pair[0].1);
                    let b = point_at(w, pair[1].0, pair[1].1);
                    max_chord = max_chord.max(b.sub(a).norm2());
                }
                best = Some(DpPath {
                    contacts,
                    length: total,
                    max_chord_len2: max_chord,
                });
            }
        }
    }
    best
}

struct VisitSpec {
    /// Window positions crossed at the vertex (inclusive range).
    first_pos: usize,
    last_pos: usize,
    /// Ray pointing back along the incoming stretch, in the chart of the
    /// triangle that stretch actually lies in.
    back_ray: RayAt,
    /// Ray along the outgoing stretch.
    out_ray: RayAt,
}

/// Greedy monotone crossing points of the chord `[a, b]` spanning window
/// positions `(pa, pb)`, keyed by absolute position.
fn chord_crossing_points(
    w: &Windows,
    a: &V2,
    b: &V2,
    pa: usize,
    pb: usize,
) -> Result<std::collections::HashMap<usize, V2>> {
    let mut xs = std::collections::HashMap::new();
    let mut prev = Q::zero();
    let delta = b.sub(a);
    for k in (pa + 1)..pb {
        let (l, r) = &w.win[k];
        let (lo, hi) = seg_intersect_params(a, b, l, r)
            .ok_or_else(|| FlatError::Internal("chord misses a window".into()))?;
        let t = lo.max(prev.clone());
        if t > hi {
            return Err(FlatError::Internal("chord crossings not monotone".into()));
        }
        xs.insert(k, a.add(&delta.scale(&t)));
        prev = t;
    }
    Ok(xs)
}

/// Ray based at the vertex `v` (developed coordinates) pointing back along
/// the chord `[a, b]`, where the chord reaches `v` at window position `at`.
fn ray_back_along(
    w: &Windows,
    cx: &Complex,
    a: &V2,
    xs: &std::collections::HashMap<usize, V2>,
    pa: usize,
    at: usize,
    v: &V2,
) -> Result<RayAt> {
    let m = w.portals.len();
    let mut k = at;
    let mut px;
    loop {
        if k == pa {
            px = a.clone();
            break;
        }
        k -= 1;
        px = if k == pa { a.clone() } else { xs[&k].clone() };
        if px != *v {
            break;
        }
    }
    if px == *v {
        return Err(FlatError::Internal("chord degenerates at its vertex".into()));
    }
    // The stretch [px, v] lies between windows k and k+1, i.e. in the
    // from-triangle of portal k+1.
    let chart = w.mdev[k + 1].inverse();
    let tri = w.portals[(k + 1) % m].tri;
    let v_chart = chart.apply(v);
    let corner = (0..3)
        .find(|&c| cx.tris[tri].v[c] == v_chart)
        .ok_or_else(|| FlatError::Internal("vertex not a corner of its stretch triangle".into()))?;
    Ok(RayAt {
        tri,
        corner,
        dir: chart.apply_dir(&px.sub(v)),
    })
}

/// Ray based at `v` pointing forward along the chord `[a, b]` that crosses
/// window position `at` exactly at `v`.
fn ray_forward_along(
    w: &Windows,
    cx: &Complex,
    b: &V2,
    xs: &std::collections::HashMap<usize, V2>,
    pb: usize,
    at: usize,
    v: &V2,
) -> Result<RayAt> {
    let m = w.portals.len();
    let mut k = at;
    let mut nx;
    loop {
        k += 1;
        if k >= pb {
            nx = b.clone();
            k = pb;
            break;
        }
        nx = xs[&k].clone();
        if nx != *v {
            break;
        }
    }
    if nx == *v {
        return Err(FlatError::Internal("chord degenerates at its vertex".into()));
    }
    // The stretch [v, nx] lies between windows k-1 and k.
    let chart = w.mdev[k].inverse();
    let tri = w.portals[k % m].tri;
    let v_chart = chart.apply(v);
    let corner = (0..3)
        .find(|&c| cx.tris[tri].v[c] == v_chart)
        .ok_or_else(|| FlatError::Internal("vertex not a corner of its stretch triangle".into()))?;
    Ok(RayAt {
        tri,
        corner,
        dir: chart.apply_dir(&nx.sub(v)),
    })
}

/// Tightening driver.
pub fn tighten(
    surface: &HalfTranslationSurface,
    word: &CurveWord,
    cfg: &crate::Config,
) -> Result<FlatGeodesic> {
    let report = crate::surface::require_valid(surface)?;
    let cx = Complex::build_with_report(surface, &report)?;
    // (poly, edge) -> (tri, slot) for boundary edges.
    let mut boundary_slot = std::collections::HashMap::new();
    for (t, tri) in cx.tris.iter().enumerate() {
        for slot in 0..3 {
            if let Some(c) = &tri.adj[slot].crossing {
                let e = if c.forward {
                    surface.gluings[c.gluing].from
                } else {
                    surface.gluings[c.gluing].to
                };
                boundary_slot.insert((e.poly, e.edge), (t, slot));
            }
        }
    }
    tighten_on(&cx, surface, word, &boundary_slot, cfg)
}

pub(crate) fn tighten_on(
    cx: &Complex,
    surface: &HalfTranslationSurface,
    word: &CurveWord,
    boundary_slot: &std::collections::HashMap<(usize, usize), (usize, usize)>,
    cfg: &crate::Config,
) -> Result<FlatGeodesic> {
    word.check_coherent(surface)?;
    let mut cur = word.reduced();
    if cur.is_empty() {
        return Err(FlatError::ContractibleCurve);
    }
    let mut last_len = f64::INFINITY;
    for _iter in 0..500 {
        cur.check_coherent(surface).map_err(|e| {
            FlatError::Internal(format!("rewrite produced an incoherent word: {e}"))
        })?;
        let w = build_windows(cx, surface, &cur, boundary_slot)?;
        // Identity holonomy does not imply contractibility: a geodesic that
        // reverses through cone points can develop onto a closed segment.
        // The contact search below settles it (zero cycle = contractible).
        if let Some(x0) = straight_leaf(&w) {
            return finish_core(cx, surface, &w, x0, cfg);
        }
        let dp = dp_shortest(&w)
            .ok_or_else(|| FlatError::Internal("no contact cycle found".into()))?;
        if dp.max_chord_len2.is_zero() {
            return Err(FlatError::ContractibleCurve);
        }
        if dp.length > last_len + 1e-9 {
            return Err(FlatError::Internal(format!(
                "tightening length increased: {} -> {}",
                last_len, dp.length
            )));
        }
        last_len = dp.length;
        match certify(cx, &w, &dp, cfg)? {
            Certified::Ok(geo) => {
                return assemble(cx, surface, &w, &dp, geo, cfg);
            }
            Certified::Rewrite { visit, go_left } => {
                if std::env::var("FLATK_DEBUG_TIGHTEN").is_ok() {
                    eprintln!(
                        "iter {_iter}: len {} word {} rewrite at pos {}..{} go_left {}",
                        dp.length, cur, visit.first_pos, visit.last_pos, go_left
                    );
                }
                cur = rewrite_word(cx, surface, &w, &visit, go_left)?;
                if std::env::var("FLATK_DEBUG_TIGHTEN").is_ok() {
                    let sl = crate::trace::develop(surface, &cur);
                    eprintln!("  new word {} holonomy {:?}", cur, sl.map(|x| x.holonomy));
                }
                cur = cur.reduced();
                if cur.is_empty() {
                    return Err(FlatError::ContractibleCurve);
                }
            }
        }
    }
    Err(FlatError::Internal("tightening did not converge".into()))
}

enum Certified {
    Ok(Vec<(VisitSpec, f64, f64)>),
    Rewrite { visit: VisitSpec, go_left: bool },
}

/// Gathers every vertex event of the contact path (bends and straight
/// passes), measures surface angles, and reports the first deficient one.
fn certify(cx: &Complex, w: &Windows, dp: &DpPath, cfg: &crate::Config) -> Result<Certified> {
    let specs = collect_visits(cx, w, dp)?;
    let mut out = Vec::new();
    for spec in specs {
        let left = cx.angle_ccw_between(&spec.out_ray, &spec.back_ray);
        let class = cx.ray_class(&spec.back_ray);
        let right = cx.cone_angle(class) - left;
        let pi = std::f64::consts::PI;
        if std::env::var("FLATK_DEBUG_TIGHTEN").is_ok() {
            eprintln!(
                "  visit pos {}..{} class {class} L {left:.6} R {right:.6}",
                spec.first_pos, spec.last_pos
            );
        }
        if left < pi - cfg.tol {
            return Ok(Certified::Rewrite {
                visit: spec,
                go_left: true,
            });
        }
        if right < pi - cfg.tol {
            return Ok(Certified::Rewrite {
                visit: spec,
                go_left: false,
            });
        }
        out.push((spec, left, right));
    }
    Ok(Certified::Ok(out))
}

/// Visits of the contact path: grouped bend contacts plus straight window
/// crossings that land exactly on a window endpoint.
fn collect_visits(cx: &Complex, w: &Windows, dp: &DpPath) -> Result<Vec<VisitSpec>> {
    let pts: Vec<V2> = dp
        .contacts
        .iter()
        .map(|&(k, s)| point_at(w, k, s).clone())
        .collect();
    let n = dp.contacts.len();
    let m = w.portals.len();
    // Real chord arcs between distinct consecutive points, as contact index
    // ranges.
    let mut arcs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i + 1 < n {
        let mut j = i + 1;
        while j < n && pts[j] == pts[i] {
            j += 1;
        }
        if j == n {
            break;
        }
        arcs.push((i, j));
        i = j;
    }
    if arcs.is_empty() {
        return Err(FlatError::Internal("contact path has no real chord".into()));
    }
    // Chord data: (a, b, pa, pb, crossing points).
    struct ChordData {
        a: V2,
        b: V2,
        pa: usize,
        pb: usize,
        xs: std::collections::HashMap<usize, V2>,
    }
    let mut chords = Vec::new();
    for &(ia, ja) in &arcs {
        let (pa, _) = dp.contacts[ia];
        let (pb, _) = dp.contacts[ja];
        let a = pts[ia].clone();
        let b = pts[ja].clone();
        let xs = chord_crossing_points(w, &a, &b, pa, pb)?;
        chords.push(ChordData { a, b, pa, pb, xs });
    }
    let mut visits = Vec::new();
    // True vertex extent of a contact: consecutive windows crossed exactly
    // at the vertex (monotone params pin a degenerate suffix or prefix of
    // crossings to the contact point, and the vertex is then a shared
    // endpoint of each of those windows).
    let is_endpoint = |k: usize, v: &V2| -> bool {
        let (l, r) = &w.win[k];
        v == l || v == r
    };
    // Bend visits between consecutive arcs. On the wrap the outgoing chord
    // is the first arc shifted one period forward.
    for r in 0..arcs.len() {
        let c_in = &chords[r];
        let v = c_in.b.clone();
        let mut first_pos = c_in.pb;
        for k in ((c_in.pa + 1)..c_in.pb).rev() {
            if c_in.xs[&k] == v && is_endpoint(k, &v) {
                first_pos = k;
            } else {
                break;
            }
        }
        let back = ray_back_along(w, cx, &c_in.a, &c_in.xs, c_in.pa, c_in.pb, &c_in.b)?;
        let (out_ray, mut last_pos, out_xs, out_pa, out_pb) = if r + 1 < arcs.len() {
            let c_out = &chords[r + 1];
            (
                ray_forward_along(w, cx, &c_out.b, &c_out.xs, c_out.pb, c_out.pa, &c_out.a)?,
                c_out.pa,
                c_out.xs.clone(),
                c_out.pa,
                c_out.pb,
            )
        } else {
            // Shift the first chord forward one period.
            let c0 = &chords[0];
            let h = &w.holonomy;
            let a = h.apply(&c0.a);
            let b = h.apply(&c0.b);
            let xs = chord_crossing_points(w, &a, &b, c0.pa + m, c0.pb + m)?;
            (
                ray_forward_along(w, cx, &b, &xs, c0.pb + m, c0.pa + m, &a)?,
                c0.pa + m,
                xs,
                c0.pa + m,
                c0.pb + m,
            )
        };
        let v_out = point_at(w, last_pos, dp.contacts[arcs[(r + 1) % arcs.len()].0].1).clone();
        for k in (out_pa + 1)..out_pb {
            if out_xs[&k] == v_out && is_endpoint(k, &v_out) {
                last_pos = k;
            } else {
                break;
            }
        }
        visits.push(VisitSpec {
            first_pos,
            last_pos,
            back_ray: back,
            out_ray,
        });
    }
    // Straight pass visits: maximal runs of windows a chord interior
    // crosses exactly at one vertex copy, excluding the chord's endpoints.
    for c in &chords {
        let mut k = c.pa + 1;
        while k < c.pb {
            let x = c.xs[&k].clone();
            if x == c.a || x == c.b || !is_endpoint(k, &x) {
                k += 1;
                continue;
            }
            let mut kend = k;
            while kend + 1 < c.pb && c.xs[&(kend + 1)] == x && is_endpoint(kend + 1, &x) {
                kend += 1;
            }
            let back = ray_back_along(w, cx, &c.a, &c.xs, c.pa, k, &x)?;
            let fwd = ray_forward_along(w, cx, &c.b, &c.xs, c.pb, kend, &x)?;
            visits.push(VisitSpec {
                first_pos: k,
                last_pos: kend,
                back_ray: back,
                out_ray: fwd,
            });
            k = kend + 1;
        }
    }
    Ok(visits)
}

/// Replaces the portals crossed at a deficient vertex by the fan portals on
/// the given side, producing the rewritten crossing word.
fn rewrite_word(
    cx: &Complex,
    surface: &HalfTranslationSurface,
    w: &Windows,
    visit: &VisitSpec,
    go_left: bool,
) -> Result<CurveWord> {
    let m = w.portals.len();
    let j = visit.first_pos % m;
    let jp = visit.last_pos % m;
    let r = (jp + m - j) % m + 1;
    if r >= m {
        return Err(FlatError::ContractibleCurve);
    }
    let back = cx.normalize_ray(&visit.back_ray);
    let fwd = cx.normalize_ray(&visit.out_ray);
    let (t_in, c_in) = (back.tri, back.corner);
    let (t_out, c_out) = (fwd.tri, fwd.corner);
    if std::env::var("FLATK_DEBUG_TIGHTEN").is_ok() {
        eprintln!(
            "  rewrite: back ({},{}) dir {:?} -> out ({},{}) dir {:?} go_left {go_left}",
            t_in, c_in, back.dir, t_out, c_out, fwd.dir
        );
    }
    let mut fan: Vec<Portal> = Vec::new();
    let (mut t, mut k) = (t_in, c_in);
    let limit = 3 * cx.tris.len() + 2;
    let mut steps = 0;
    while (t, k) != (t_out, c_out) {
        steps += 1;
        if steps > limit {
            return Err(FlatError::Internal("vertex fan rewrite did not close".into()));
        }
        if go_left {
            // Push into the left side: cross the outgoing wedge boundary,
            // walking clockwise around the vertex.
            let slot = k;
            let adj = &cx.tris[t].adj[slot];
            fan.push(Portal {
                tri: t,
                slot,
                crossing: adj.crossing,
            });
            let (nt, nk, _) = cx.prev_ccw(t, k);
            (t, k) = (nt, nk);
        } else {
            let slot = (k + 2) % 3;
            let adj = &cx.tris[t].adj[slot];
            fan.push(Portal {
                tri: t,
                slot,
                crossing: adj.crossing,
            });
            let (nt, nk, _) = cx.next_ccw(t, k);
            (t, k) = (nt, nk);
        }
    }
    // New period: the non-visit portals in cyclic order, then the fan.
    let mut portals: Vec<Portal> = Vec::new();
    let mut pos = (jp + 1) % m;
    for _ in 0..(m - r) {
        portals.push(w.portals[pos].clone());
        pos = (pos + 1) % m;
    }
    portals.extend(fan);
    let crossings: Vec<Crossing> = portals.iter().filter_map(|p| p.crossing).collect();
    if crossings.is_empty() {
        return Err(FlatError::ContractibleCurve);
    }
    let word = CurveWord::new(crossings);
    word.check_coherent(surface)
        .map_err(|e| FlatError::Internal(format!("fan rewrite incoherent: {e}")))?;
    Ok(word)
}

/// Builds the cylinder-core result from a straight closed leaf.
fn finish_core(
    cx: &Complex,
    surface: &HalfTranslationSurface,
    w: &Windows,
    x0: V2,
    cfg: &crate::Config,
) -> Result<FlatGeodesic> {
    let t_vec = w.holonomy.t.clone();
    let start_tri = w.portals[0].tri;
    let core_cfg = crate::Config {
        continue_through_marked: false,
        ..cfg.clone()
    };
    let cap = (q_to_f64(&t_vec.norm2()) * q_to_f64(&cx.scale_sq)).sqrt() * 1.5 + 1.0;
    let tr = trace_on(cx, start_tri, x0, t_vec.clone(), cap, &core_cfg, true)?;
    if tr.end != TraceEnd::Periodic {
        return Err(FlatError::Internal(format!(
            "straight leaf did not close: {:?}",
            tr.end
        )));
    }
    let len2_phys = &tr.len2_chart * &cx.scale_sq;
    let direction = Direction::from_vec(&t_vec).ok_or(FlatError::ContractibleCurve)?;
    let word = CurveWord::new(tr.crossings.clone());
    let pieces = core_pieces(cx, w, surface, cfg)?;
    Ok(FlatGeodesic {
        word,
        length: q_to_f64(&len2_phys).sqrt(),
        segments: vec![GeoSegment {
            len: q_to_f64(&len2_phys).sqrt(),
            len2: len2_phys,
            theta: direction.angle(),
            direction,
        }],
        corners: Vec::new(),
        kind: GeodesicKind::CylinderCore,
        pieces,
        visits: Vec::new(),
        portals: w.portals.clone(),
    })
}

fn tr_start(w: &Windows, _surface: &HalfTranslationSurface) -> Result<V2> {
    straight_leaf(w).ok_or_else(|| FlatError::Internal("lost the straight leaf".into()))
}

fn core_pieces(
    cx: &Complex,
    w: &Windows,
    surface: &HalfTranslationSurface,
    cfg: &crate::Config,
) -> Result<Vec<Piece>> {
    let x0 = tr_start(w, surface)?;
    let t_vec = w.holonomy.t.clone();
    let mut m = crate::trace::March::new(cx, w.portals[0].tri, x0.clone(), t_vec.clone(), cfg.work_budget);
    m.watch = Some((w.portals[0].tri, x0.clone(), t_vec.clone()));
    let mut pieces = Vec::new();
    let mut crossings_seen = 0usize;
    loop {
        let before = m.pieces.len();
        let ev = m.step()?;
        for (t, a, b) in &m.pieces[before..] {
            if a == b {
                continue;
            }
            pieces.push(Piece {
                tri: *t,
                a: a.clone(),
                b: b.clone(),
                next_portal: crossings_seen % w.portals.len(),
            });
        }
        match ev {
            crate::trace::MarchEvent::Crossed => {
                crossings_seen += 1;
                continue;
            }
            crate::trace::MarchEvent::Returned => break,
            crate::trace::MarchEvent::VertexHit { .. } => {
                return Err(FlatError::Internal("core leaf hit a vertex".into()))
            }
        }
    }
    Ok(pieces)
}

/// Builds the final geodesic from a certified contact path.
fn assemble(
    cx: &Complex,
    surface: &HalfTranslationSurface,
    w: &Windows,
    dp: &DpPath,
    mut certified: Vec<(VisitSpec, f64, f64)>,
    cfg: &crate::Config,
) -> Result<FlatGeodesic> {
    // Path order: visits sorted by their first window position interleave
    // with the chord sub-segments, so visit i separates segment i from
    // segment i+1 cyclically.
    certified.sort_by_key(|(spec, _, _)| spec.first_pos);
    let scale = &cx.scale_sq;
    let pts: Vec<V2> = dp
        .contacts
        .iter()
        .map(|&(k, s)| point_at(w, k, s).clone())
        .collect();
    let n = dp.contacts.len();
    let m = w.portals.len();

    // Real chords with their position spans.
    let mut chords: Vec<(usize, usize, V2, V2)> = Vec::new(); // (pos_a, pos_b, a, b)
    let mut i = 0;
    while i + 1 < n {
        let mut j = i + 1;
        while j < n && pts[j] == pts[i] {
            j += 1;
        }
        if j == n {
            break;
        }
        chords.push((dp.contacts[i].0, dp.contacts[j].0, pts[i].clone(), pts[j].clone()));
        i = j;
    }

    let mut segments = Vec::new();
    let mut pieces: Vec<Piece> = Vec::new();
    // Absolute window position -> index of the piece ending at its crossing.
    let mut ends_at: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    let mut length = 0.0;
    for (pos_a, pos_b, a, b) in &chords {
        let delta = b.sub(a);
        let direction = Direction::from_vec(&delta)
            .ok_or_else(|| FlatError::Internal("zero chord in assembly".into()))?;
        // Split points: straight passes through vertex copies subdivide the
        // chord into saddle connections.
        let mut split_pts: Vec<V2> = vec![a.clone()];
        // Chart pieces along the chord.
        let mut prev_param = Q::zero();
        let mut prev_pt = a.clone();
        for k in (*pos_a + 1)..*pos_b {
            let (l, r) = &w.win[k];
            let (lo, hi) = seg_intersect_params(a, b, l, r)
                .ok_or_else(|| FlatError::Internal("assembled chord misses a window".into()))?;
            let t = lo.max(prev_param.clone());
            if t > hi {
                return Err(FlatError::Internal("assembled chord not monotone".into()));
            }
            let x = a.add(&delta.scale(&t));
            if prev_pt != x {
                let chart = w.mdev[k].inverse();
                pieces.push(Piece {
                    tri: w.portals[k % m].tri,
                    a: chart.apply(&prev_pt),
                    b: chart.apply(&x),
                    next_portal: k % m,
                });
                ends_at.insert(k, pieces.len() - 1);
            }
            let (l, r) = &w.win[k];
            if (x == *l || x == *r) && x != *a && x != *b && split_pts.last() != Some(&x) {
                split_pts.push(x.clone());
            }
            prev_param = t;
            prev_pt = x;
        }
        if prev_pt != *b {
            let chart = w.mdev[*pos_b].inverse();
            pieces.push(Piece {
                tri: w.portals[*pos_b % m].tri,
                a: chart.apply(&prev_pt),
                b: chart.apply(b),
                next_portal: *pos_b % m,
            });
            ends_at.insert(*pos_b, pieces.len() - 1);
        }
        split_pts.push(b.clone());
        for pair in split_pts.windows(2) {
            let len2 = pair[1].sub(&pair[0]).norm2() * scale;
            let len = q_to_f64(&len2).sqrt();
            length += len;
            segments.push(GeoSegment {
                len,
                len2,
                theta: direction.angle(),
                direction: direction.clone(),
            });
        }
    }

    let mut visits = Vec::new();
    let mut corners = Vec::new();
    let pi = std::f64::consts::PI;
    let mut boundary_core = true;
    for (spec, left, right) in &certified {
        let class = cx.ray_class(&spec.back_ray);
        corners.push(CornerTurn {
            class,
            left_angle: *left,
            right_angle: *right,
        });
        if (left - pi).abs() > cfg.tol && (right - pi).abs() > cfg.tol {
            boundary_core = false;
        }
        // Anchor: the piece ending at the vertex (searching back through
        // degenerately crossed windows).
        let mut anchor = pieces.len().saturating_sub(1);
        for back in 0..=spec.first_pos {
            if let Some(&i) = ends_at.get(&(spec.first_pos - back)) {
                anchor = i;
                break;
            }
        }
        visits.push(Visit {
            class,
            back_ray: spec.back_ray.clone(),
            out_ray: spec.out_ray.clone(),
            left: *left,
            right: *right,
            after_piece: anchor,
        });
    }

    let kind = if visits.is_empty() {
        GeodesicKind::CylinderCore
    } else if boundary_core {
        GeodesicKind::BoundaryCore
    } else {
        GeodesicKind::Singular
    };
    let word = CurveWord::new(
        w.portals
            .iter()
            .filter_map(|p| p.crossing)
            .collect::<Vec<_>>(),
    );
    word.check_coherent(surface)?;
    Ok(FlatGeodesic {
        word,
        length,
        segments,
        corners,
        kind,
        pieces,
        visits,
        portals: w.portals.clone(),
    })
}

/// Chart pieces of a geodesic, for diagnostics.
pub fn debug_pieces(g: &FlatGeodesic) -> Vec<(usize, (f64, f64), (f64, f64))> {
    g.pieces
        .iter()
        .map(|p| (p.tri, p.a.to_f64(), p.b.to_f64()))
        .collect()
}

/// Flat length of the free homotopy class of `word`.
pub fn curve_length(
    surface: &HalfTranslationSurface,
    word: &CurveWord,
    cfg: &crate::Config,
) -> Result<f64> {
    Ok(tighten(surface, word, cfg)?.length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::Config;

    /// Torus class `(p, q)` as a crossing word: `+1` moves right, `-0` up.
    pub(crate) fn torus_word(p: i64, q: i64) -> CurveWord {
        let mut cr = Vec::new();
        for _ in 0..p.abs() {
            cr.push(Crossing {
                gluing: 1,
                forward: p > 0,
            });
        }
        for _ in 0..q.abs() {
            cr.push(Crossing {
                gluing: 0,
                forward: q < 0,
            });
        }
        CurveWord::new(cr)
    }

    #[test]
    fn torus_classes_have_lattice_lengths() {
        let t = corpus::torus();
        let cfg = Config::default();
        for (p, q) in [(1i64, 0i64), (0, 1), (1, 1), (2, 1), (3, -2), (5, 3)] {
            let g = tighten(&t, &torus_word(p, q), &cfg).unwrap();
            let expect = ((p * p + q * q) as f64).sqrt();
            assert!(
                (g.length - expect).abs() < 1e-12,
                "class ({p},{q}): {} vs {}",
                g.length,
                expect
            );
            assert!(g.is_cylinder());
        }
    }

    #[test]
    fn immediate_backtrack_is_contractible() {
        let t = corpus::torus();
        let w = CurveWord::parse("+1,-1").unwrap();
        match tighten(&t, &w, &Config::default()) {
            Err(FlatError::ContractibleCurve) => {}
            other => panic!("expected contractible, got {other:?}"),
        }
    }

    #[test]
    fn lshape_h_v_product_tightens_to_double_diagonal() {
        let l = corpus::lshape();
        // Horizontal row loop (crossing right<->left gluing 2) followed by
        // the downward column loop (crossing bottom<->top gluing 0).
        let w = CurveWord::parse("+2,+0").unwrap();
        let g = tighten(&l, &w, &Config::default()).unwrap();
        assert!((g.length - 2.0 * 2f64.sqrt()).abs() < 1e-9, "{}", g.length);
        // Straight through the 6π cone point twice: one side exactly π, the
        // other 5π, so this class is a cylinder boundary curve.
        assert_eq!(g.kind, GeodesicKind::BoundaryCore);
        assert_eq!(g.segments.len(), 2);
        let pi = std::f64::consts::PI;
        for c in &g.corners {
            assert!(c.left_angle >= pi - 1e-9);
            assert!(c.right_angle >= pi - 1e-9);
            let m = c.left_angle.min(c.right_angle);
            let mx = c.left_angle.max(c.right_angle);
            assert!((m - pi).abs() < 1e-9 && (mx - 5.0 * pi).abs() < 1e-9);
        }
    }

    #[test]
    fn tighten_is_idempotent_on_its_output() {
        let l = corpus::lshape();
        let g = tighten(&l, &CurveWord::parse("+2,+0").unwrap(), &Config::default()).unwrap();
        let g2 = tighten(&l, &g.word, &Config::default()).unwrap();
        assert!((g.length - g2.length).abs() < 1e-12);
        assert!(g.word.same_class_unoriented(&g2.word));
    }

    #[test]
    fn genus2_short_pair_class_has_length_twice_slit() {
        let s = crate::num::qr(1, 4);
        let surf = corpus::genus2(&s).unwrap();
        let g = tighten(&surf, &corpus::genus2_short_pair_word(), &Config::default()).unwrap();
        let expect = 2.0 * crate::num::q_to_f64(&s);
        assert!((g.length - expect).abs() < 1e-12, "{} vs {expect}", g.length);
        assert_eq!(g.kind, GeodesicKind::Singular);
        let gl = tighten(&surf, &corpus::genus2_long_pair_word(), &Config::default()).unwrap();
        let expect_l = 2.0 * crate::num::q_to_f64(&(corpus::genus2_side() - &s));
        assert!((gl.length - expect_l).abs() < 1e-12, "{} vs {expect_l}", gl.length);
    }

    #[test]
    fn length_is_a_class_function() {
        let t = corpus::torus();
        let cfg = Config::default();
        let a = tighten(&t, &CurveWord::parse("+1,-0").unwrap(), &cfg).unwrap();
        // Same class with a backtrack inserted and rotated.
        let b = tighten(&t, &CurveWord::parse("-0,+1,+0,-0").unwrap(), &cfg).unwrap();
        assert!((a.length - b.length).abs() < 1e-12);
        let c = tighten(&t, &CurveWord::parse("+1,-0").unwrap().reversed(), &cfg).unwrap();
        assert!((a.length - c.length).abs() < 1e-12);
    }
}

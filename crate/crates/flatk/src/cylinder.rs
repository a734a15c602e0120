//! Cylinder decompositions in a fixed direction and cylinder core curves.
//!
//! A direction is decided periodic by shooting every separatrix (a ray from
//! a vertex sector containing the direction) until it hits a vertex. If all
//! of them land within the cap, the singular leaves cut the surface into
//! euclidean cylinders. Boundary circles are walked by continuing straight
//! with angle exactly π on the cylinder side, a transversal shot pairs the
//! circles and measures heights, and the core curve is the closed leaf
//! through the transversal's midpoint.

use crate::complex::Complex;
use crate::error::{FlatError, Result};
use crate::exec::map_indexed;
use crate::num::{q_to_f64, seg_intersect_params, Direction, Iso, Q, V2};
use crate::saddle::saddle_directions;
use crate::surface::HalfTranslationSurface;
use crate::trace::{continue_straight_iso, trace_on, March, MarchEvent, TraceEnd};
use crate::word::CurveWord;
use num_traits::{Signed, Zero};
use std::collections::HashMap;

#[derive(Clone, Debug)]
pub struct BoundaryArc {
    pub src_class: usize,
    pub dst_class: usize,
    /// Exact physical squared length of the arc.
    pub len2: Q,
}

#[derive(Clone, Debug)]
pub struct Cylinder {
    pub direction: Direction,
    pub circumference: f64,
    /// Exact physical squared circumference.
    pub circ2: Q,
    pub height: f64,
    pub height2: Q,
    pub core: CurveWord,
    pub boundary: [Vec<BoundaryArc>; 2],
}

impl Cylinder {
    pub fn area(&self) -> f64 {
        self.circumference * self.height
    }
}

#[derive(Clone, Debug)]
pub enum Decomposition {
    Cylinders(Vec<Cylinder>),
    /// Some separatrix exceeded the cap: not decided periodic within it.
    NotPeriodic,
}

struct Separatrix {
    /// Source sector and signed direction in its chart.
    src: (usize, usize),
    dir: V2,
    /// Arrival corner and the incoming direction there.
    arrival: (usize, usize),
    arrival_dir: V2,
    /// Chart pieces (tri, from, to) along the traversal.
    pieces: Vec<(usize, V2, V2)>,
    /// Squared chart length.
    len2: Q,
}

fn shoot_separatrix(
    cx: &Complex,
    t: usize,
    k: usize,
    d: &V2,
    cap_chart2: &Q,
    budget: u64,
) -> Result<Option<Separatrix>> {
    let p0 = cx.tris[t].v[k].clone();
    let mut m = March::new(cx, t, p0.clone(), d.clone(), budget);
    loop {
        let ev = m.step()?;
        let len2 = m.dev_point().sub(&p0).norm2();
        if len2 > *cap_chart2 {
            return Ok(None);
        }
        match ev {
            MarchEvent::Crossed => continue,
            MarchEvent::Returned => {
                return Err(FlatError::Internal("separatrix reported a return".into()))
            }
            MarchEvent::VertexHit { tri, corner } => {
                return Ok(Some(Separatrix {
                    src: (t, k),
                    dir: d.clone(),
                    arrival: (tri, corner),
                    arrival_dir: m.d.clone(),
                    pieces: m.pieces,
                    len2,
                }));
            }
        }
    }
}

/// Decomposes the surface in direction `dir`. `cap` is the physical length
/// each separatrix may run before the direction is declared undecided.
pub fn cylinder_decomposition(
    surface: &HalfTranslationSurface,
    dir: &Direction,
    cap: f64,
    cfg: &crate::Config,
) -> Result<Decomposition> {
    let cx = Complex::build(surface)?;
    cylinder_decomposition_on(&cx, dir, cap, cfg)
}

pub(crate) fn cylinder_decomposition_on(
    cx: &Complex,
    dir: &Direction,
    cap: f64,
    cfg: &crate::Config,
) -> Result<Decomposition> {
    let v = dir.to_v2();
    let cap_q = Q::from_float(cap.max(0.0)).unwrap_or_else(Q::zero);
    let cap_chart2 = &cap_q * &cap_q / &cx.scale_sq;

    // Shoot every separatrix: sectors whose half-open wedge contains +v or -v.
    let mut seps: Vec<Separatrix> = Vec::new();
    for t in 0..cx.tris.len() {
        for k in 0..3 {
            for d in [v.clone(), v.neg()] {
                if !cx.wedge_contains(t, k, &d) {
                    continue;
                }
                match shoot_separatrix(cx, t, k, &d, &cap_chart2, cfg.work_budget)? {
                    Some(s) => seps.push(s),
                    None => return Ok(Decomposition::NotPeriodic),
                }
            }
        }
    }

    // Index: source sector -> separatrix, and per-triangle singular pieces.
    let mut by_src: HashMap<(usize, usize, bool), usize> = HashMap::new();
    let mut tri_pieces: Vec<Vec<(usize, V2, V2)>> = vec![Vec::new(); cx.tris.len()];
    for (i, s) in seps.iter().enumerate() {
        let positive = s.dir.dot(&v).is_positive();
        by_src.insert((s.src.0, s.src.1, positive), i);
        for (pt, a, b) in &s.pieces {
            if a != b {
                tri_pieces[*pt].push((i, a.clone(), b.clone()));
            }
        }
    }

    // Boundary circles, cylinder side on the right of the traversal: the
    // next arc continues with right angle exactly π (counterclockwise scan).
    let next_sep = |i: usize| -> Result<usize> {
        let s = &seps[i];
        let (ray, _iso) = continue_straight_iso(cx, s.arrival.0, s.arrival.1, &s.arrival_dir);
        let positive = ray.dir.dot(&v).is_positive();
        by_src
            .get(&(ray.tri, ray.corner, positive))
            .copied()
            .ok_or_else(|| FlatError::Internal("boundary walk left the separatrix set".into()))
    };
    let mut circle_of = vec![usize::MAX; seps.len()];
    let mut circles: Vec<Vec<usize>> = Vec::new();
    for i in 0..seps.len() {
        if circle_of[i] != usize::MAX {
            continue;
        }
        let id = circles.len();
        let mut cyc = Vec::new();
        let mut cur = i;
        loop {
            if circle_of[cur] != usize::MAX {
                if circle_of[cur] == id && cyc.first() == Some(&cur) {
                    break;
                }
                return Err(FlatError::Internal("boundary circles are not disjoint".into()));
            }
            circle_of[cur] = id;
            cyc.push(cur);
            cur = next_sep(cur)?;
            if cur == i {
                break;
            }
        }
        circles.push(cyc);
    }

    // Pair circles across cylinders with a transversal shot into the right
    // side of each circle's first arc.
    let mut used = vec![false; circles.len()];
    let mut cylinders = Vec::new();
    for b in 0..circles.len() {
        if used[b] {
            continue;
        }
        used[b] = true;
        let s0 = &seps[circles[b][0]];
        let (pt0, a0, b0) = s0
            .pieces
            .iter()
            .find(|(_, a, bb)| a != bb)
            .cloned()
            .ok_or_else(|| FlatError::Internal("empty separatrix".into()))?;
        let start = a0.add(&b0).scale(&crate::num::qr(1, 2));
        let u_dir = b0.sub(&a0);
        // Right normal of the traversal.
        let n = V2::new(u_dir.y.clone(), -u_dir.x.clone());
        let hit = shoot_transversal(cx, pt0, &start, &n, &tri_pieces, cfg)?;
        let partner = match &hit.kind {
            HitKind::Arc { tri, point } => {
                // The separatrix through the hit point whose direction keeps
                // the cylinder on its right seen from the other side.
                // Edge-aligned leaves are recorded in the chart on their
                // left, so the search follows the point across adjacencies.
                let want = V2::new(hit.n_dir.y.clone(), -hit.n_dir.x.clone());
                find_partner(cx, &tri_pieces, *tri, point, &want)
                    .ok_or_else(|| FlatError::Internal("transversal hit no oriented arc".into()))?
            }
            HitKind::Vertex { tri, corner } => {
                // The opposite boundary passes through this cone point; its
                // outgoing arc sits exactly a quarter turn counterclockwise
                // from the reversed arrival ray, in the matching sector.
                let back = hit.n_dir.neg();
                let target = back.rot90();
                let ray = quarter_turn_sector(cx, *tri, *corner, &back, &target)?;
                let positive = ray.dir.dot(&v).is_positive();
                *by_src.get(&(ray.tri, ray.corner, positive)).ok_or_else(|| {
                    FlatError::Internal("quarter-turn sector holds no separatrix".into())
                })?
            }
        };
        let b2 = circle_of[partner];
        if b2 != b {
            if used[b2] {
                return Err(FlatError::Internal("circle paired twice".into()));
            }
            used[b2] = true;
        }

        // Core leaf through the transversal midpoint.
        let (core_tri, core_pt, core_dir) = hit.midpoint(cx)?;
        let core_cfg = crate::Config {
            continue_through_marked: false,
            ..cfg.clone()
        };
        let total_len: f64 = seps
            .iter()
            .map(|s| (q_to_f64(&s.len2) * q_to_f64(&cx.scale_sq)).sqrt())
            .sum();
        let tr = trace_on(cx, core_tri, core_pt, core_dir, total_len + 1.0, &core_cfg, true)?;
        if tr.end != TraceEnd::Periodic {
            return Err(FlatError::Internal(format!(
                "core leaf did not close: {:?}",
                tr.end
            )));
        }
        let circ2 = &tr.len2_chart * &cx.scale_sq;
        let height2 = &hit.dist2 * &cx.scale_sq;
        let arcs = |cid: usize| -> Vec<BoundaryArc> {
            circles[cid]
                .iter()
                .map(|&si| {
                    let s = &seps[si];
                    BoundaryArc {
                        src_class: cx.tris[s.src.0].class[s.src.1],
                        dst_class: cx.tris[s.arrival.0].class[s.arrival.1],
                        len2: &s.len2 * &cx.scale_sq,
                    }
                })
                .collect()
        };
        let circumference = q_to_f64(&circ2).sqrt();
        // Boundary circles have the same length as the core.
        let blen: f64 = arcs(b).iter().map(|a| q_to_f64(&a.len2).sqrt()).sum();
        if (blen - circumference).abs() > 1e-9 * (1.0 + circumference) {
            return Err(FlatError::Internal(format!(
                "boundary length {blen} disagrees with core circumference {circumference}"
            )));
        }
        cylinders.push(Cylinder {
            direction: dir.clone(),
            circumference,
            circ2,
            height: q_to_f64(&height2).sqrt(),
            height2,
            core: CurveWord::new(tr.crossings),
            boundary: [arcs(b), arcs(b2)],
        });
    }

    // Full decomposition must tile the surface.
    let area: f64 = cylinders.iter().map(|c| c.area()).sum();
    let total = q_to_f64(&{
        let mut a = Q::zero();
        for t in &cx.tris {
            a += t.v[1].sub(&t.v[0]).cross(&t.v[2].sub(&t.v[0]));
        }
        a / crate::num::qi(2) * &cx.scale_sq
    });
    if (area - total).abs() > 1e-9 * (1.0 + total) {
        return Err(FlatError::Internal(format!(
            "cylinder areas {area} do not sum to the surface area {total}"
        )));
    }
    cylinders.sort_by(|a, b| {
        (&a.circ2, &a.height2)
            .cmp(&(&b.circ2, &b.height2))
            .then_with(|| a.core.to_string().cmp(&b.core.to_string()))
    });
    Ok(Decomposition::Cylinders(cylinders))
}

/// Searches for an oriented singular arc through `point` with direction of
/// positive component along `want`, looking in the given chart, across each
/// incident edge, and around each coincident vertex fan.
fn find_partner(
    cx: &Complex,
    tri_pieces: &[Vec<(usize, V2, V2)>],
    tri: usize,
    point: &V2,
    want: &V2,
) -> Option<usize> {
    let scan = |t: usize, p: &V2, w: &V2| -> Option<usize> {
        for &(si, ref ca, ref cb) in &tri_pieces[t] {
            if !crate::num::point_on_segment(p, ca, cb) {
                continue;
            }
            if cb.sub(ca).dot(w).is_positive() {
                return Some(si);
            }
        }
        None
    };
    if let Some(si) = scan(tri, point, want) {
        return Some(si);
    }
    // Across edges containing the point.
    for j in 0..3 {
        let a = &cx.tris[tri].v[j];
        let b = &cx.tris[tri].v[(j + 1) % 3];
        if !crate::num::point_on_segment(point, a, b) {
            continue;
        }
        let adj = &cx.tris[tri].adj[j];
        let p2 = adj.iso.apply(point);
        let w2 = adj.iso.apply_dir(want);
        if let Some(si) = scan(adj.tri, &p2, &w2) {
            return Some(si);
        }
    }
    // Around coincident vertices.
    for m in 0..3 {
        if *point != cx.tris[tri].v[m] {
            continue;
        }
        let (mut t, mut k) = (tri, m);
        let mut iso_acc = crate::num::Iso::identity();
        for _ in 0..(3 * cx.tris.len()) {
            let (nt, nk, step) = cx.next_ccw(t, k);
            iso_acc = step.compose(&iso_acc);
            (t, k) = (nt, nk);
            if (t, k) == (tri, m) {
                break;
            }
            let p2 = iso_acc.apply(point);
            let w2 = iso_acc.apply_dir(want);
            if let Some(si) = scan(t, &p2, &w2) {
                return Some(si);
            }
        }
    }
    None
}

enum HitKind {
    Arc { tri: usize, point: V2 },
    Vertex { tri: usize, corner: usize },
}

struct TransversalHit {
    kind: HitKind,
    /// Direction of the transversal in the hit chart.
    n_dir: V2,
    /// Exact squared chart length of the transversal run.
    dist2: Q,
    /// March pieces with their developing maps, for midpoint extraction.
    path: Vec<(usize, V2, V2, Iso)>,
    start_dev: V2,
    delta_dev: V2,
}

/// Scans counterclockwise from the ray `back` (based at the vertex of corner
/// `(t, k)`, pointing back into the arrival triangle) until the sector whose
/// wedge contains `target` is reached. `target` must be within the first
/// half turn, which makes the first containing wedge the right one.
fn quarter_turn_sector(
    cx: &Complex,
    t: usize,
    k: usize,
    back: &V2,
    target: &V2,
) -> Result<crate::complex::RayAt> {
    // The arrival corner itself counts when the target is past `back`.
    if cx.wedge_contains(t, k, target) && back.cross(target).is_positive() {
        return Ok(crate::complex::RayAt {
            tri: t,
            corner: k,
            dir: target.clone(),
        });
    }
    let mut dir = target.clone();
    let (mut ct, mut ck) = (t, k);
    for _ in 0..(3 * cx.tris.len() + 2) {
        let (nt, nk, iso) = cx.next_ccw(ct, ck);
        dir = iso.apply_dir(&dir);
        (ct, ck) = (nt, nk);
        if cx.wedge_contains(ct, ck, &dir) {
            return Ok(crate::complex::RayAt {
                tri: ct,
                corner: ck,
                dir,
            });
        }
    }
    Err(FlatError::Internal("quarter-turn scan did not close".into()))
}

impl TransversalHit {
    /// Chart location of the transversal's midpoint and the leaf direction
    /// there (the transversal direction rotated back a quarter turn).
    fn midpoint(&self, _cx: &Complex) -> Result<(usize, V2, V2)> {
        let half = self.delta_dev.scale(&crate::num::qr(1, 2));
        let target = self.start_dev.add(&half);
        let t_mid = half.dot(&self.delta_dev);
        for (tri, a, b, dev) in &self.path {
            let ta = dev.apply(a).sub(&self.start_dev).dot(&self.delta_dev);
            let tb = dev.apply(b).sub(&self.start_dev).dot(&self.delta_dev);
            if ta <= t_mid && t_mid <= tb {
                let inv = dev.inverse();
                let p = inv.apply(&target);
                let n_chart = inv.apply_dir(&self.delta_dev);
                // Leaf direction: left normal of the transversal.
                let leaf = V2::new(-n_chart.y.clone(), n_chart.x.clone());
                return Ok((*tri, p, leaf.neg()));
            }
        }
        Err(FlatError::Internal("transversal midpoint not on the path".into()))
    }
}

fn shoot_transversal(
    cx: &Complex,
    t: usize,
    start: &V2,
    n: &V2,
    tri_pieces: &[Vec<(usize, V2, V2)>],
    cfg: &crate::Config,
) -> Result<TransversalHit> {
    let mut m = March::new(cx, t, start.clone(), n.clone(), cfg.work_budget);
    let mut path: Vec<(usize, V2, V2, Iso)> = Vec::new();
    loop {
        let pieces_before = m.pieces.len();
        let dev_before = m.dev.clone();
        let ev = m.step()?;
        for (pt, a, b) in &m.pieces[pieces_before..] {
            path.push((*pt, a.clone(), b.clone(), dev_before.clone()));
            // Earliest singular crossing on this march piece. The march's
            // start chart is the original chart, so the developed start is
            // `start` itself.
            let mut best: Option<(Q, V2)> = None;
            for (_, ca, cb) in &tri_pieces[*pt] {
                if let Some((lo, _hi)) = seg_intersect_params(a, b, ca, cb) {
                    let pt_hit = a.add(&b.sub(a).scale(&lo));
                    let dev_hit = dev_before.apply(&pt_hit);
                    let d2 = dev_hit.sub(start).norm2();
                    // The shot begins on a singular leaf; skip that incidence.
                    if d2.is_zero() {
                        continue;
                    }
                    if best.as_ref().map_or(true, |(bd, _)| d2 < *bd) {
                        best = Some((d2, pt_hit));
                    }
                }
            }
            if let Some((_, hit_pt)) = best {
                // A hit exactly at a vertex copy is handled by the vertex
                // event below (the march piece ends there).
                let at_vertex = (0..3).any(|mm| hit_pt == cx.tris[*pt].v[mm]);
                if !at_vertex {
                    let dev_hit = dev_before.apply(&hit_pt);
                    let delta = dev_hit.sub(start);
                    return Ok(TransversalHit {
                        kind: HitKind::Arc {
                            tri: *pt,
                            point: hit_pt,
                        },
                        n_dir: dev_before.inverse().apply_dir(&delta),
                        dist2: delta.norm2(),
                        path,
                        start_dev: start.clone(),
                        delta_dev: delta,
                    });
                }
            }
        }
        match ev {
            MarchEvent::Crossed => continue,
            MarchEvent::Returned => {
                return Err(FlatError::Internal("transversal watch misfire".into()))
            }
            MarchEvent::VertexHit { tri, corner } => {
                let dev_hit = m.dev_point();
                let delta = dev_hit.sub(start);
                if delta.is_zero() {
                    return Err(FlatError::Internal(
                        "transversal started at a vertex".into(),
                    ));
                }
                return Ok(TransversalHit {
                    kind: HitKind::Vertex { tri, corner },
                    n_dir: m.d.clone(),
                    dist2: delta.norm2(),
                    path,
                    start_dev: start.clone(),
                    delta_dev: delta,
                });
            }
        }
    }
}

/// Default periodicity cap: a generous multiple of the surface's scale.
pub fn default_cap(surface: &HalfTranslationSurface) -> f64 {
    let area = surface.area().max(1e-12);
    let longest = surface
        .polygons
        .iter()
        .flat_map(|p| (0..p.len()).map(|i| q_to_f64(&p.edge_vec(i).norm2())))
        .fold(0.0f64, f64::max)
        .sqrt()
        * surface.scale();
    100.0 * (area.sqrt() + longest)
}

#[derive(Clone, Debug)]
pub struct CylinderCurve {
    pub word: CurveWord,
    pub length: f64,
    /// Exact physical squared length.
    pub len2: Q,
    pub direction: Direction,
    pub height: f64,
}

/// Core curves of all cylinders in directions realized by saddle connections
/// of length at most `l`, keeping circumferences at most `l`, one entry per
/// free homotopy class.
pub fn cylinder_curves_up_to(
    surface: &HalfTranslationSurface,
    l: f64,
    cfg: &crate::Config,
) -> Result<Vec<CylinderCurve>> {
    let dirs = saddle_directions(surface, l, cfg)?;
    let cx = Complex::build(surface)?;
    let cap = default_cap(surface);
    let per_dir: Vec<Result<Vec<CylinderCurve>>> = map_indexed(cfg.parallelism, dirs.len(), |i| {
        let dir = &dirs[i];
        let mut out = Vec::new();
        match cylinder_decomposition_on(&cx, dir, cap, cfg)? {
            Decomposition::NotPeriodic => {}
            Decomposition::Cylinders(cyls) => {
                for c in cyls {
                    if c.circumference <= l + 1e-12 {
                        out.push(CylinderCurve {
                            word: c.core.clone(),
                            length: c.circumference,
                            len2: c.circ2.clone(),
                            direction: c.direction.clone(),
                            height: c.height,
                        });
                    }
                }
            }
        }
        Ok(out)
    });
    let mut all: Vec<CylinderCurve> = Vec::new();
    for r in per_dir {
        all.extend(r?);
    }
    // One representative per unoriented free homotopy class.
    let mut seen: Vec<CurveWord> = Vec::new();
    let mut dedup = Vec::new();
    for c in all {
        let key = c.word.reduced().canonical_unoriented();
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        dedup.push(c);
    }
    dedup.sort_by(|a, b| {
        (&a.len2, &a.direction)
            .cmp(&(&b.len2, &b.direction))
            .then_with(|| a.word.to_string().cmp(&b.word.to_string()))
    });
    Ok(dedup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::num::qi;
    use crate::Config;

    fn dir(x: i64, y: i64) -> Direction {
        Direction::from_vec(&V2::new(qi(x), qi(y))).unwrap()
    }

    #[test]
    fn torus_horizontal_is_one_unit_cylinder() {
        let t = corpus::torus();
        match cylinder_decomposition(&t, &dir(1, 0), 50.0, &Config::default()).unwrap() {
            Decomposition::Cylinders(c) => {
                assert_eq!(c.len(), 1);
                assert!((c[0].circumference - 1.0).abs() < 1e-12);
                assert!((c[0].height - 1.0).abs() < 1e-12);
                assert_eq!(c[0].circ2, qi(1));
            }
            Decomposition::NotPeriodic => panic!("horizontal torus direction is periodic"),
        }
    }

    #[test]
    fn lshape_horizontal_has_two_cylinders_summing_to_area() {
        let l = corpus::lshape();
        match cylinder_decomposition(&l, &dir(1, 0), 100.0, &Config::default()).unwrap() {
            Decomposition::Cylinders(c) => {
                assert_eq!(c.len(), 2);
                let mut dims: Vec<(f64, f64)> =
                    c.iter().map(|cy| (cy.circumference, cy.height)).collect();
                dims.sort_by(|a, b| a.partial_cmp(b).unwrap());
                assert!((dims[0].0 - 1.0).abs() < 1e-12 && (dims[0].1 - 1.0).abs() < 1e-12);
                assert!((dims[1].0 - 2.0).abs() < 1e-12 && (dims[1].1 - 1.0).abs() < 1e-12);
                let area: f64 = c.iter().map(|cy| cy.area()).sum();
                assert!((area - 3.0).abs() < 1e-9);
            }
            Decomposition::NotPeriodic => panic!("horizontal L direction is periodic"),
        }
    }

    #[test]
    fn lshape_diagonal_is_one_long_cylinder() {
        let l = corpus::lshape();
        match cylinder_decomposition(&l, &dir(1, 1), 100.0, &Config::default()).unwrap() {
            Decomposition::Cylinders(c) => {
                assert_eq!(c.len(), 1);
                assert!((c[0].circumference - 3.0 * 2f64.sqrt()).abs() < 1e-9);
                assert!((c[0].height - 1.0 / 2f64.sqrt()).abs() < 1e-9);
            }
            Decomposition::NotPeriodic => panic!("diagonal L direction is periodic"),
        }
    }

    #[test]
    fn small_cap_reports_not_periodic() {
        let t = corpus::torus();
        match cylinder_decomposition(&t, &dir(7, 5), 5.0, &Config::default()).unwrap() {
            Decomposition::NotPeriodic => {}
            Decomposition::Cylinders(_) => panic!("|(7,5)| exceeds the cap"),
        }
    }

    #[test]
    fn torus_core_curves_up_to_one_and_a_half() {
        let t = corpus::torus();
        let curves = cylinder_curves_up_to(&t, 1.5, &Config::default()).unwrap();
        let lens: Vec<f64> = curves.iter().map(|c| c.length).collect();
        assert_eq!(curves.len(), 4, "{lens:?}");
        assert!((lens[0] - 1.0).abs() < 1e-12);
        assert!((lens[1] - 1.0).abs() < 1e-12);
        assert!((lens[2] - 2f64.sqrt()).abs() < 1e-12);
        assert!((lens[3] - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn lshape_unit_core_curves() {
        let l = corpus::lshape();
        let curves = cylinder_curves_up_to(&l, 1.0, &Config::default()).unwrap();
        assert_eq!(curves.len(), 2);
        for c in &curves {
            assert_eq!(c.len2, qi(1));
        }
        // Below the systole nothing is found.
        assert!(cylinder_curves_up_to(&l, 0.9, &Config::default()).unwrap().is_empty());
    }
}

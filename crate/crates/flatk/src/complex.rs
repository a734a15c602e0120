//! Triangulated view of a surface: every polygon is ear-clipped, every
//! triangle edge knows its twin and the exact chart transition across it, and
//! corners are organized into cyclic fans around each surface vertex.
//!
//! Triangles of one polygon share the polygon's chart, so diagonal crossings
//! are identity transitions and only gluing crossings move coordinates. All
//! transitions have linear part ±1, which keeps direction tests exact; in
//! particular "continue straight through this vertex on this side" is decided
//! with integer sign tests rather than floating-point angles.

use crate::error::{FlatError, Result};
use crate::num::{orient, Iso, Q, V2};
use crate::surface::{require_valid, HalfTranslationSurface, ValidationReport};
use crate::word::Crossing;
use num_traits::{Signed, Zero};
use std::collections::HashMap;

#[derive(Clone, Debug)]
pub struct Adj {
    pub tri: usize,
    pub edge: usize,
    /// Chart transition from this triangle's polygon into the neighbor's.
    pub iso: Iso,
    /// Present when the shared edge is a polygon gluing (None for diagonals).
    pub crossing: Option<Crossing>,
}

#[derive(Clone, Debug)]
pub struct Tri {
    pub poly: usize,
    /// Counterclockwise vertices in the polygon chart. Edge `i` runs from
    /// `v[i]` to `v[(i+1)%3]`.
    pub v: [V2; 3],
    pub adj: [Adj; 3],
    /// Surface vertex class of each corner.
    pub class: [usize; 3],
    /// Polygon vertex index behind each corner.
    pub orig: [usize; 3],
    /// Corner angles in radians.
    pub angle: [f64; 3],
}

impl Tri {
    pub fn edge_vec(&self, i: usize) -> V2 {
        self.v[(i + 1) % 3].sub(&self.v[i])
    }

    /// Outgoing wedge boundary of corner `k` (along edge `k`).
    pub fn wedge_u(&self, k: usize) -> V2 {
        self.v[(k + 1) % 3].sub(&self.v[k])
    }

    /// Closing wedge boundary of corner `k` (towards the third vertex).
    pub fn wedge_w(&self, k: usize) -> V2 {
        self.v[(k + 2) % 3].sub(&self.v[k])
    }
}

/// A ray based at a surface vertex, expressed in one corner's chart.
#[derive(Clone, Debug)]
pub struct RayAt {
    pub tri: usize,
    pub corner: usize,
    pub dir: V2,
}

#[derive(Clone, Debug)]
pub struct Complex {
    pub tris: Vec<Tri>,
    pub n_classes: usize,
    /// Cone angle of each class as a multiple of π.
    pub class_mult: Vec<i64>,
    pub class_marked: Vec<bool>,
    /// Corners around each vertex class in counterclockwise cyclic order.
    pub fans: Vec<Vec<(usize, usize)>>,
    fan_pos: HashMap<(usize, usize), (usize, usize)>,
    pub scale_sq: Q,
}

fn in_closed_triangle(q: &V2, a: &V2, b: &V2, c: &V2) -> bool {
    orient(a, b, q) >= 0 && orient(b, c, q) >= 0 && orient(c, a, q) >= 0
}

fn triangulate(vertices: &[V2]) -> Result<Vec<[usize; 3]>> {
    let n = vertices.len();
    let mut active: Vec<usize> = (0..n).collect();
    let mut tris = Vec::with_capacity(n - 2);
    while active.len() > 3 {
        let m = active.len();
        let mut clipped = false;
        for i in 0..m {
            let p = active[(i + m - 1) % m];
            let c = active[i];
            let nx = active[(i + 1) % m];
            let (vp, vc, vn) = (&vertices[p], &vertices[c], &vertices[nx]);
            if orient(vp, vc, vn) <= 0 {
                continue;
            }
            let blocked = active.iter().any(|&q| {
                q != p && q != c && q != nx && in_closed_triangle(&vertices[q], vp, vc, vn)
            });
            if blocked {
                continue;
            }
            tris.push([p, c, nx]);
            active.remove(i);
            clipped = true;
            break;
        }
        if !clipped {
            return Err(FlatError::Internal(
                "ear clipping stalled on a validated polygon".into(),
            ));
        }
    }
    let [a, b, c] = [active[0], active[1], active[2]];
    if orient(&vertices[a], &vertices[b], &vertices[c]) <= 0 {
        return Err(FlatError::Internal("degenerate final triangle".into()));
    }
    tris.push([a, b, c]);
    Ok(tris)
}

impl Complex {
    pub fn build(s: &HalfTranslationSurface) -> Result<Complex> {
        let report = require_valid(s)?;
        Self::build_with_report(s, &report)
    }

    pub fn build_with_report(
        s: &HalfTranslationSurface,
        report: &ValidationReport,
    ) -> Result<Complex> {
        let mut tris: Vec<Tri> = Vec::new();
        // (poly, polygon edge) -> (tri, slot)
        let mut boundary_slot: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        // Diagonal twins within one polygon, keyed by ordered vertex pair.
        let mut diag_slot: HashMap<(usize, usize, usize), (usize, usize)> = HashMap::new();
        let mut pending_diag: Vec<((usize, usize, usize), (usize, usize))> = Vec::new();

        for (pi, poly) in s.polygons.iter().enumerate() {
            let n = poly.len();
            let local = triangulate(&poly.vertices)?;
            for idx in local {
                let t = tris.len();
                let v = [
                    poly.vertices[idx[0]].clone(),
                    poly.vertices[idx[1]].clone(),
                    poly.vertices[idx[2]].clone(),
                ];
                let class = [
                    report.corner_class[pi][idx[0]],
                    report.corner_class[pi][idx[1]],
                    report.corner_class[pi][idx[2]],
                ];
                let mut angle = [0.0f64; 3];
                for k in 0..3 {
                    let u = v[(k + 1) % 3].sub(&v[k]);
                    let w = v[(k + 2) % 3].sub(&v[k]);
                    let (ux, uy) = u.to_f64();
                    let (wx, wy) = w.to_f64();
                    angle[k] = (ux * wy - uy * wx).atan2(ux * wx + uy * wy);
                }
                let placeholder = Adj {
                    tri: usize::MAX,
                    edge: 0,
                    iso: Iso::identity(),
                    crossing: None,
                };
                tris.push(Tri {
                    poly: pi,
                    v,
                    adj: [placeholder.clone(), placeholder.clone(), placeholder],
                    class,
                    orig: idx,
                    angle,
                });
                for slot in 0..3 {
                    let a = idx[slot];
                    let b = idx[(slot + 1) % 3];
                    if (a + 1) % n == b {
                        boundary_slot.insert((pi, a), (t, slot));
                    } else {
                        pending_diag.push(((pi, a, b), (t, slot)));
                    }
                }
            }
        }

        for (key, loc) in pending_diag {
            diag_slot.insert(key, loc);
        }
        let diag_keys: Vec<(usize, usize, usize)> = diag_slot.keys().cloned().collect();
        for key in diag_keys {
            let (pi, a, b) = key;
            let twin_key = (pi, b, a);
            let &(t1, s1) = diag_slot.get(&key).unwrap();
            let &(t2, s2) = diag_slot
                .get(&twin_key)
                .ok_or_else(|| FlatError::Internal("unpaired diagonal".into()))?;
            tris[t1].adj[s1] = Adj {
                tri: t2,
                edge: s2,
                iso: Iso::identity(),
                crossing: None,
            };
        }

        for (k, g) in s.gluings.iter().enumerate() {
            let &(tf, sf) = boundary_slot
                .get(&(g.from.poly, g.from.edge))
                .ok_or_else(|| FlatError::Internal("missing boundary slot".into()))?;
            let &(tt, st) = boundary_slot
                .get(&(g.to.poly, g.to.edge))
                .ok_or_else(|| FlatError::Internal("missing boundary slot".into()))?;
            tris[tf].adj[sf] = Adj {
                tri: tt,
                edge: st,
                iso: s.gluing_iso(k, true),
                crossing: Some(Crossing {
                    gluing: k,
                    forward: true,
                }),
            };
            tris[tt].adj[st] = Adj {
                tri: tf,
                edge: sf,
                iso: s.gluing_iso(k, false),
                crossing: Some(Crossing {
                    gluing: k,
                    forward: false,
                }),
            };
        }

        for (t, tri) in tris.iter().enumerate() {
            for slot in 0..3 {
                if tri.adj[slot].tri == usize::MAX {
                    return Err(FlatError::Internal(format!(
                        "triangle {t} edge {slot} has no twin"
                    )));
                }
            }
        }

        let n_classes = report.cone_points.len();
        let mut class_mult = vec![0i64; n_classes];
        let mut class_marked = vec![false; n_classes];
        for c in &report.cone_points {
            class_mult[c.class] = c.angle_multiple;
            class_marked[c.class] = c.marked;
        }

        let mut cx = Complex {
            tris,
            n_classes,
            class_mult,
            class_marked,
            fans: Vec::new(),
            fan_pos: HashMap::new(),
            scale_sq: s.scale_sq.clone(),
        };
        cx.build_fans()?;
        Ok(cx)
    }

    /// Corner reached by rotating counterclockwise around the vertex of
    /// corner `(t, k)`, with the chart transition.
    pub fn next_ccw(&self, t: usize, k: usize) -> (usize, usize, &Iso) {
        let a = &self.tris[t].adj[(k + 2) % 3];
        (a.tri, a.edge, &a.iso)
    }

    /// Clockwise counterpart of [`next_ccw`].
    pub fn prev_ccw(&self, t: usize, k: usize) -> (usize, usize, &Iso) {
        let a = &self.tris[t].adj[k];
        (a.tri, (a.edge + 1) % 3, &a.iso)
    }

    fn build_fans(&mut self) -> Result<()> {
        let mut seen: HashMap<(usize, usize), bool> = HashMap::new();
        let mut fans: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.n_classes];
        let mut all: Vec<(usize, usize)> = Vec::new();
        for t in 0..self.tris.len() {
            for k in 0..3 {
                all.push((t, k));
            }
        }
        all.sort_unstable();
        for &(t0, k0) in &all {
            if seen.contains_key(&(t0, k0)) {
                continue;
            }
            let class = self.tris[t0].class[k0];
            let mut fan = Vec::new();
            let (mut t, mut k) = (t0, k0);
            loop {
                if seen.insert((t, k), true).is_some() {
                    return Err(FlatError::Internal("corner fan is not a simple cycle".into()));
                }
                fan.push((t, k));
                if self.tris[t].class[k] != class {
                    return Err(FlatError::Internal("corner fan crosses vertex classes".into()));
                }
                let (nt, nk, _) = self.next_ccw(t, k);
                if (nt, nk) == (t0, k0) {
                    break;
                }
                (t, k) = (nt, nk);
                if fan.len() > 3 * self.tris.len() {
                    return Err(FlatError::Internal("corner fan does not close".into()));
                }
            }
            if fans[class].is_empty() {
                fans[class] = fan;
            } else {
                return Err(FlatError::Internal(
                    "vertex class split into several corner cycles".into(),
                ));
            }
        }
        for (class, fan) in fans.iter().enumerate() {
            let total: f64 = fan.iter().map(|&(t, k)| self.tris[t].angle[k]).sum();
            let expect = self.class_mult[class] as f64 * std::f64::consts::PI;
            if (total - expect).abs() > 1e-6 {
                return Err(FlatError::Internal(format!(
                    "fan angle {total} disagrees with cone angle {expect}"
                )));
            }
        }
        self.fan_pos = fans
            .iter()
            .enumerate()
            .flat_map(|(c, fan)| {
                fan.iter()
                    .enumerate()
                    .map(move |(i, &ck)| (ck, (c, i)))
                    .collect::<Vec<_>>()
            })
            .collect();
        self.fans = fans;
        Ok(())
    }

    pub fn fan_position(&self, t: usize, k: usize) -> (usize, usize) {
        self.fan_pos[&(t, k)]
    }

    /// Whether direction `d` lies in the half-open wedge `[U, W)` of corner
    /// `(t, k)`.
    pub fn wedge_contains(&self, t: usize, k: usize, d: &V2) -> bool {
        let tri = &self.tris[t];
        let u = tri.wedge_u(k);
        let w = tri.wedge_w(k);
        let cu = u.cross(d);
        if cu.is_zero() {
            return u.dot(d).is_positive();
        }
        cu.is_positive() && d.cross(&w).is_positive()
    }

    /// Moves a ray whose direction sits exactly on the closing boundary of
    /// its corner into the following corner, so that every ray has a unique
    /// `[U, W)` home.
    pub fn normalize_ray(&self, ray: &RayAt) -> RayAt {
        let mut r = ray.clone();
        for _ in 0..(3 * self.tris.len() + 1) {
            if self.wedge_contains(r.tri, r.corner, &r.dir) {
                return r;
            }
            let (nt, nk, iso) = self.next_ccw(r.tri, r.corner);
            r = RayAt {
                tri: nt,
                corner: nk,
                dir: iso.apply_dir(&r.dir),
            };
        }
        // A ray of a genuine path segment always lands in some wedge.
        unreachable!("ray not contained in any wedge around its vertex")
    }

    /// Straight continuation through a vertex: the ray arriving at the
    /// vertex of corner `(t, k)` with chart direction `d` continues so that
    /// the turn on the given side is exactly π. Exact: the continuation is
    /// the unique corner (scanning from the arrival) whose wedge contains
    /// the transported direction.
    pub fn continue_straight(&self, t: usize, k: usize, d: &V2, ccw: bool) -> RayAt {
        let mut dir = d.clone();
        let (mut ct, mut ck) = (t, k);
        let limit = 3 * self.tris.len() + 2;
        for _ in 0..limit {
            let (nt, nk, iso) = if ccw {
                self.next_ccw(ct, ck)
            } else {
                self.prev_ccw(ct, ck)
            };
            dir = iso.apply_dir(&dir);
            (ct, ck) = (nt, nk);
            let inside = if ccw {
                self.wedge_contains(ct, ck, &dir)
            } else {
                self.wedge_contains_cw(ct, ck, &dir)
            };
            if inside {
                return RayAt {
                    tri: ct,
                    corner: ck,
                    dir,
                };
            }
        }
        unreachable!("straight continuation did not land in any wedge")
    }

    /// Wedge containment with the opposite half-open convention `(U, W]`,
    /// used by clockwise scans.
    fn wedge_contains_cw(&self, t: usize, k: usize, d: &V2) -> bool {
        let tri = &self.tris[t];
        let u = tri.wedge_u(k);
        let w = tri.wedge_w(k);
        let cw = d.cross(&w);
        if cw.is_zero() {
            return w.dot(d).is_positive();
        }
        cw.is_positive() && u.cross(d).is_positive()
    }

    /// Counterclockwise angle from `a` to `b`, both rays at the same vertex
    /// class. Returns a value in `[0, kπ)`.
    pub fn angle_ccw_between(&self, a: &RayAt, b: &RayAt) -> f64 {
        let a = self.normalize_ray(a);
        let b = self.normalize_ray(b);
        let (class_a, pos_a) = self.fan_position(a.tri, a.corner);
        let (class_b, pos_b) = self.fan_position(b.tri, b.corner);
        assert_eq!(class_a, class_b, "rays at different vertices");
        let fan = &self.fans[class_a];
        let angle_from_u = |r: &RayAt| {
            let u = self.tris[r.tri].wedge_u(r.corner);
            let (ux, uy) = u.to_f64();
            let (dx, dy) = r.dir.to_f64();
            (ux * dy - uy * dx).atan2(ux * dx + uy * dy)
        };
        let off_a = angle_from_u(&a);
        let off_b = angle_from_u(&b);
        if pos_a == pos_b && off_b >= off_a - 1e-15 {
            return (off_b - off_a).max(0.0);
        }
        let mut total = self.tris[a.tri].angle[a.corner] - off_a;
        let n = fan.len();
        let mut i = (pos_a + 1) % n;
        while i != pos_b {
            let (t, k) = fan[i];
            total += self.tris[t].angle[k];
            i = (i + 1) % n;
        }
        total + off_b
    }

    /// Total cone angle at the class of a ray, in radians.
    pub fn cone_angle(&self, class: usize) -> f64 {
        self.class_mult[class] as f64 * std::f64::consts::PI
    }

    /// Cyclic comparison key of a ray around its vertex: fan position plus a
    /// within-corner tie ordered by exact cross products.
    pub fn ray_class(&self, ray: &RayAt) -> usize {
        self.tris[ray.tri].class[ray.corner]
    }

    /// Exact cyclic ordering test: do rays `x` and `y` coincide?
    pub fn rays_equal(&self, x: &RayAt, y: &RayAt) -> bool {
        let x = self.normalize_ray(x);
        let y = self.normalize_ray(y);
        (x.tri, x.corner) == (y.tri, y.corner)
            && x.dir.cross(&y.dir).is_zero()
            && x.dir.dot(&y.dir).is_positive()
    }

    /// Strict cyclic order of three pairwise-distinct rays around a vertex:
    /// true when walking counterclockwise from `a` meets `b` before `c`.
    pub fn rays_ccw_ordered(&self, a: &RayAt, b: &RayAt, c: &RayAt) -> bool {
        let key = |r: &RayAt| {
            let n = self.normalize_ray(r);
            let (_, pos) = self.fan_position(n.tri, n.corner);
            (pos, n)
        };
        let (pa, na) = key(a);
        let (pb, nb) = key(b);
        let (pc, nc) = key(c);
        // Compare within-corner positions exactly when fan positions tie.
        let less = |p1: usize, r1: &RayAt, p2: usize, r2: &RayAt| -> bool {
            if p1 != p2 {
                return p1 < p2;
            }
            // Same corner: earlier means closer to the U boundary.
            r1.dir.cross(&r2.dir).is_positive()
        };
        let ab = less(pa, &na, pb, &nb);
        let bc = less(pb, &nb, pc, &nc);
        let ca = less(pc, &nc, pa, &na);
        // b between a and c cyclically.
        (ab && bc) || (bc && ca) || (ca && ab)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::num::qi;

    #[test]
    fn torus_complex_has_single_six_corner_fan() {
        let cx = Complex::build(&corpus::torus()).unwrap();
        assert_eq!(cx.tris.len(), 2);
        assert_eq!(cx.n_classes, 1);
        assert_eq!(cx.fans[0].len(), 6);
        assert_eq!(cx.class_mult[0], 2);
        assert!(cx.class_marked[0]);
    }

    #[test]
    fn lshape_complex_fan_angle_is_6pi() {
        let cx = Complex::build(&corpus::lshape()).unwrap();
        assert_eq!(cx.tris.len(), 6);
        assert_eq!(cx.n_classes, 1);
        let total: f64 = cx.fans[0]
            .iter()
            .map(|&(t, k)| cx.tris[t].angle[k])
            .sum();
        assert!((total - 6.0 * std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn straight_continuation_through_marked_point() {
        // The diagonal through the torus corner continues as the diagonal.
        let cx = Complex::build(&corpus::torus()).unwrap();
        // Find the corner whose wedge contains (1,1) and whose vertex is at
        // the end of arriving along direction (1,1): arrival corner has the
        // reversed direction (-1,-1) in its wedge.
        let d = V2::new(qi(1), qi(1));
        let back = d.neg();
        let mut arrival = None;
        for t in 0..cx.tris.len() {
            for k in 0..3 {
                if cx.wedge_contains(t, k, &back) {
                    arrival = Some((t, k));
                }
            }
        }
        let (t, k) = arrival.expect("some wedge holds the reversed ray");
        let out = cx.continue_straight(t, k, &d, true);
        // The outgoing ray must again point along (1,1) in its own chart.
        assert!(out.dir.cross(&d).is_zero() && out.dir.dot(&d).is_positive());
        assert!(cx.wedge_contains(out.tri, out.corner, &out.dir));
        // Left and right turns agree at a 2π point.
        let out_cw = cx.continue_straight(t, k, &d, false);
        assert_eq!((out.tri, out.corner), (out_cw.tri, out_cw.corner));
    }

    #[test]
    fn genus2_fans_close_up() {
        let s = corpus::genus2(&crate::num::qr(1, 3)).unwrap();
        let cx = Complex::build(&s).unwrap();
        assert_eq!(cx.n_classes, 2);
        for class in 0..2 {
            let total: f64 = cx.fans[class]
                .iter()
                .map(|&(t, k)| cx.tris[t].angle[k])
                .sum();
            assert!((total - 4.0 * std::f64::consts::PI).abs() < 1e-9);
        }
    }
}

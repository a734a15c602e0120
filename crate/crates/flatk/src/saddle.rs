//! Complete enumeration of saddle connections up to a length bound.
//!
//! From every corner sector the search develops triangles into the sector's
//! frame, keeping for each branch the direction wedge still to be explored
//! and the window (sub-edge) all its connections must cross. Wedges are
//! half-open `[lo, hi)` so each connection is discovered exactly once, and
//! all pruning is by exact squared distances.

use crate::complex::Complex;
use crate::error::{FlatError, Result};
use crate::exec::map_indexed;
use crate::num::{Direction, Iso, Q, V2};
use crate::surface::HalfTranslationSurface;
use num_traits::{Signed, Zero};
use std::sync::atomic::{AtomicU64, Ordering};

#[derive(Clone, Debug)]
pub struct SaddleConnection {
    /// Source sector as a polygon corner.
    pub src_poly: usize,
    pub src_vertex: usize,
    pub src_class: usize,
    pub dst_class: usize,
    /// Chart-coordinate displacement, in canonical orientation.
    pub holonomy: V2,
    /// Exact physical squared length (`|holonomy|² · scale_sq`).
    pub len2: Q,
    pub direction: Direction,
}

fn canonical_oriented(h: &V2) -> bool {
    h.y.is_positive() || (h.y.is_zero() && h.x.is_positive())
}

/// Angular minimum of two directions inside a common half-plane cone.
fn ang_min(a: &V2, b: &V2) -> V2 {
    if a.cross(b).is_positive() {
        a.clone()
    } else {
        b.clone()
    }
}

fn ang_max(a: &V2, b: &V2) -> V2 {
    if a.cross(b).is_positive() {
        b.clone()
    } else {
        a.clone()
    }
}

/// Exact squared distance from the origin to the closed segment `[a, b]`.
fn seg_dist2(a: &V2, b: &V2) -> Q {
    let ab = b.sub(a);
    let denom = ab.norm2();
    if denom.is_zero() {
        return a.norm2();
    }
    let t = a.neg().dot(&ab);
    if !t.is_positive() {
        a.norm2()
    } else if t >= denom {
        b.norm2()
    } else {
        let c = a.cross(b);
        &c * &c / denom
    }
}

struct Search<'a> {
    cx: &'a Complex,
    l2_chart: Q,
    budget: &'a AtomicU64,
    budget_limit: u64,
    out: Vec<SaddleConnection>,
    src_tri: usize,
    src_corner: usize,
}

impl<'a> Search<'a> {
    fn emit(&mut self, h: &V2, dst_class: usize) {
        if h.norm2() > self.l2_chart {
            return;
        }
        let tri = &self.cx.tris[self.src_tri];
        self.out.push(SaddleConnection {
            src_poly: tri.poly,
            src_vertex: tri.orig[self.src_corner],
            src_class: tri.class[self.src_corner],
            dst_class,
            holonomy: h.clone(),
            len2: h.norm2() * &self.cx.scale_sq,
            direction: Direction::from_vec(h).expect("nonzero holonomy"),
        });
    }

    /// Explores the branch entering triangle `t` (placed by `m`: chart ->
    /// frame) through edge `entry`, with direction wedge `[lo, hi)`.
    fn expand(&mut self, t: usize, m: &Iso, entry: usize, lo: &V2, hi: &V2) -> Result<()> {
        if !lo.cross(hi).is_positive() {
            return Ok(()); // empty wedge
        }
        if self.budget.fetch_add(1, Ordering::Relaxed) >= self.budget_limit {
            return Err(FlatError::CapTooLarge(self.budget_limit));
        }
        let tri = &self.cx.tris[t];
        let p_a = m.apply(&tri.v[entry]);
        let p_b = m.apply(&tri.v[(entry + 1) % 3]);
        // Prune on the window segment's distance to the origin.
        if seg_dist2(&p_a, &p_b) > self.l2_chart {
            return Ok(());
        }
        let apex_slot = (entry + 2) % 3;
        let apex = m.apply(&tri.v[apex_slot]);
        if apex.is_zero() {
            return Err(FlatError::Internal("developed apex collapsed onto the source".into()));
        }
        // Which entry endpoint sits on the lo side? Crossing into the
        // triangle, the placed edge (a -> b) has the triangle on its far
        // side; a is the hi-side endpoint exactly when a × b is positive.
        let (_p_lo, _p_hi, edge_lo, edge_hi) = if p_a.cross(&p_b).is_positive() {
            // directions: a before b counterclockwise, so a is the lo side
            (p_a, p_b, (apex_slot, false), ((entry + 1) % 3, true))
        } else {
            (p_b, p_a, ((entry + 1) % 3, true), (apex_slot, false))
        };
        // edge_lo/edge_hi: (slot, apex_is_start): the lo-side child edge
        // joins the lo endpoint with the apex, the hi-side child edge joins
        // the apex with the hi endpoint.
        let _ = edge_lo;
        let _ = edge_hi;

        // Emit only apexes strictly inside the open wedge. A wedge boundary
        // ray is always created by a closer vertex copy (the initial corner
        // edges or an earlier apex), so anything on the boundary has that
        // vertex in its interior and is not a saddle connection.
        if apex.cross(lo).is_negative() && apex.cross(hi).is_positive() {
            let dst = tri.class[apex_slot];
            self.emit(&apex, dst);
        }

        // Children: clamp the wedge on each side of the apex direction.
        let lo_hi = ang_min(hi, &apex);
        let hi_lo = ang_max(lo, &apex);
        // Lo-side child crosses the edge between the lo endpoint and apex.
        let (slot_lo, slot_hi) = self.child_slots(t, m, entry);
        self.descend(t, m, slot_lo, lo, &lo_hi)?;
        self.descend(t, m, slot_hi, &hi_lo, hi)?;
        Ok(())
    }

    /// The two non-entry edges of the triangle, ordered (lo side, hi side)
    /// as seen from the origin of the frame.
    fn child_slots(&self, t: usize, m: &Iso, entry: usize) -> (usize, usize) {
        let tri = &self.cx.tris[t];
        let apex_slot = (entry + 2) % 3;
        let e1 = (entry + 1) % 3; // from entry-end to apex
        let p_a = m.apply(&tri.v[entry]);
        let p_b = m.apply(&tri.v[(entry + 1) % 3]);
        if p_a.cross(&p_b).is_positive() {
            // a on the lo side: the lo child edge contains a, i.e. the edge
            // (apex -> a) with slot apex_slot.
            (apex_slot, e1)
        } else {
            (e1, apex_slot)
        }
    }

    fn descend(&mut self, t: usize, m: &Iso, slot: usize, lo: &V2, hi: &V2) -> Result<()> {
        if !lo.cross(hi).is_positive() {
            return Ok(());
        }
        let adj = self.cx.tris[t].adj[slot].clone();
        let m_next = m.compose(&adj.iso.inverse());
        self.expand(adj.tri, &m_next, adj.edge, lo, hi)
    }

    fn run_from_corner(&mut self) -> Result<()> {
        let (t, k) = (self.src_tri, self.src_corner);
        let tri = &self.cx.tris[t];
        let u = tri.wedge_u(k);
        let w = tri.wedge_w(k);
        // The outgoing edge itself is a saddle connection and belongs to
        // this sector's half-open wedge; the closing edge is counted by the
        // next corner around the vertex.
        let dst = tri.class[(k + 1) % 3];
        self.emit(&u.clone(), dst);
        let m = Iso::translation(tri.v[k].neg());
        self.descend(t, &m, (k + 1) % 3, &u, &w)
    }
}

/// All saddle connections of physical length at most `l`, each unoriented
/// connection reported once in canonical orientation, sorted by squared
/// length then holonomy.
pub fn saddle_connections(
    surface: &HalfTranslationSurface,
    l: f64,
    cfg: &crate::Config,
) -> Result<Vec<SaddleConnection>> {
    let cx = Complex::build(surface)?;
    saddle_connections_on(&cx, l, cfg)
}

pub(crate) fn saddle_connections_on(
    cx: &Complex,
    l: f64,
    cfg: &crate::Config,
) -> Result<Vec<SaddleConnection>> {
    if !(l > 0.0) {
        return Ok(Vec::new());
    }
    let l_q = Q::from_float(l).ok_or(FlatError::InvalidSurface("non-finite length bound".into()))?;
    let l2_chart = &l_q * &l_q / &cx.scale_sq;
    let corners: Vec<(usize, usize)> = (0..cx.tris.len())
        .flat_map(|t| (0..3).map(move |k| (t, k)))
        .collect();
    let budget = AtomicU64::new(0);
    let results: Vec<Result<Vec<SaddleConnection>>> =
        map_indexed(cfg.parallelism, corners.len(), |i| {
            let (t, k) = corners[i];
            let mut search = Search {
                cx,
                l2_chart: l2_chart.clone(),
                budget: &budget,
                budget_limit: cfg.work_budget,
                out: Vec::new(),
                src_tri: t,
                src_corner: k,
            };
            search.run_from_corner()?;
            Ok(search.out)
        });
    let mut all = Vec::new();
    for r in results {
        all.extend(r?);
    }
    all.retain(|sc| canonical_oriented(&sc.holonomy));
    all.sort_by(|a, b| {
        (&a.len2, &a.holonomy.x, &a.holonomy.y, a.src_class, a.dst_class, a.src_poly, a.src_vertex)
            .cmp(&(&b.len2, &b.holonomy.x, &b.holonomy.y, b.src_class, b.dst_class, b.src_poly, b.src_vertex))
    });
    Ok(all)
}

/// Directions realized by saddle connections up to length `l`, deduplicated.
pub fn saddle_directions(
    surface: &HalfTranslationSurface,
    l: f64,
    cfg: &crate::Config,
) -> Result<Vec<Direction>> {
    let mut dirs: Vec<Direction> = saddle_connections(surface, l, cfg)?
        .into_iter()
        .map(|sc| sc.direction)
        .collect();
    dirs.sort();
    dirs.dedup();
    Ok(dirs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::num::qi;
    use crate::trace::{trace_ray_from_sector, TraceEnd};
    use crate::Config;

    /// Independent oracle for the square torus: visible lattice points in
    /// canonical orientation.
    fn torus_lattice_oracle(l: f64) -> Vec<(i64, i64)> {
        let r = l.floor() as i64;
        let mut v = Vec::new();
        for y in 0..=r {
            for x in -r..=r {
                if x == 0 && y == 0 {
                    continue;
                }
                if y == 0 && x <= 0 {
                    continue;
                }
                if ((x * x + y * y) as f64) > l * l + 1e-12 {
                    continue;
                }
                if num_integer::gcd(x.abs(), y) != 1 {
                    continue;
                }
                v.push((x, y));
            }
        }
        v.sort_by_key(|&(x, y)| (x * x + y * y, x, y));
        v
    }

    fn holonomies(scs: &[SaddleConnection]) -> Vec<(i64, i64)> {
        use num_traits::ToPrimitive;
        let mut v: Vec<(i64, i64)> = scs
            .iter()
            .map(|s| {
                (
                    s.holonomy.x.to_integer().to_i64().unwrap(),
                    s.holonomy.y.to_integer().to_i64().unwrap(),
                )
            })
            .collect();
        v.sort_by_key(|&(x, y)| (x * x + y * y, x, y));
        v
    }

    #[test]
    fn torus_short_connections_match_lattice() {
        let t = corpus::torus();
        let scs = saddle_connections(&t, 1.5, &Config::default()).unwrap();
        assert_eq!(holonomies(&scs), vec![(0, 1), (1, 0), (-1, 1), (1, 1)]);
        assert!(saddle_connections(&t, 0.5, &Config::default()).unwrap().is_empty());
    }

    #[test]
    fn torus_radius_five_matches_visible_lattice_oracle() {
        let t = corpus::torus();
        let scs = saddle_connections(&t, 5.0, &Config::default()).unwrap();
        assert_eq!(holonomies(&scs), torus_lattice_oracle(5.0));
    }

    #[test]
    fn monotone_in_the_bound() {
        let t = corpus::lshape();
        let small = saddle_connections(&t, 1.7, &Config::default()).unwrap();
        let large = saddle_connections(&t, 3.4, &Config::default()).unwrap();
        let key = |s: &SaddleConnection| (s.holonomy.clone(), s.src_poly, s.src_vertex);
        let large_keys: Vec<_> = large.iter().map(key).collect();
        for s in &small {
            assert!(large_keys.contains(&key(s)), "missing {:?}", s.holonomy);
        }
        assert!(small.len() <= large.len());
    }

    #[test]
    fn lshape_unit_connections_are_the_six_axis_segments() {
        let l = corpus::lshape();
        let scs = saddle_connections(&l, 1.0, &Config::default()).unwrap();
        assert_eq!(scs.len(), 6, "{:?}", holonomies(&scs));
        let hs = holonomies(&scs);
        assert_eq!(hs.iter().filter(|h| **h == (1, 0)).count(), 3);
        assert_eq!(hs.iter().filter(|h| **h == (0, 1)).count(), 3);
        for sc in &scs {
            assert_eq!(sc.len2, qi(1));
            assert_eq!(sc.src_class, 0);
            assert_eq!(sc.dst_class, 0);
        }
    }

    #[test]
    fn every_connection_replays_as_a_cone_point_trace() {
        let cfg = Config {
            continue_through_marked: false,
            ..Config::default()
        };
        for surf in [corpus::torus(), corpus::lshape()] {
            let scs = saddle_connections(&surf, 2.2, &Config::default()).unwrap();
            assert!(!scs.is_empty());
            for sc in &scs {
                let cap = (crate::num::q_to_f64(&sc.len2)).sqrt() * 1.001;
                let tr = trace_ray_from_sector(
                    &surf,
                    sc.src_poly,
                    sc.src_vertex,
                    &sc.holonomy,
                    cap,
                    &cfg,
                )
                .unwrap();
                assert!(
                    matches!(tr.end, TraceEnd::ConePointHit { .. }),
                    "sc {:?} ended {:?}",
                    sc.holonomy,
                    tr.end
                );
                assert_eq!(tr.len2_chart * &surf.scale_sq, sc.len2);
            }
        }
    }

    #[test]
    fn equivariance_under_diagonal_stretch() {
        use crate::surface::LinearDeformation;
        let t = corpus::torus();
        let a = LinearDeformation::diagonal(qi(2)).unwrap();
        let t2 = t.apply_linear(&a).unwrap();
        // Connections of the image surface up to length 2.5 are exactly the
        // images of connections of the torus, filtered by length.
        let img = saddle_connections(&t2, 2.5, &Config::default()).unwrap();
        let pre = saddle_connections(&t, 6.0, &Config::default()).unwrap();
        let mut expect: Vec<V2> = pre
            .iter()
            .map(|sc| a.apply(&sc.holonomy))
            .filter(|h| crate::num::q_to_f64(&h.norm2()) <= 2.5 * 2.5 + 1e-12)
            .map(|h| if canonical_oriented(&h) { h } else { h.neg() })
            .collect();
        let mut got: Vec<V2> = img.iter().map(|sc| sc.holonomy.clone()).collect();
        let k = |v: &V2| (v.x.clone(), v.y.clone());
        expect.sort_by_key(k);
        expect.dedup();
        got.sort_by_key(k);
        got.dedup();
        assert_eq!(expect, got);
    }
}

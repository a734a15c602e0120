//! Straight-line tracing across gluings, and word development.
//!
//! A trace follows one euclidean line through the triangulated complex. The
//! developing map back to the start chart is carried along, so total lengths
//! are square roots of exact rationals rather than accumulated float sums.

use crate::complex::Complex;
use crate::error::{FlatError, Result};
use crate::num::{q_to_f64, Iso, Q, V2};
use crate::surface::HalfTranslationSurface;
use crate::word::{Crossing, CurveWord};
use num_traits::{Signed, Zero};

/// One maximal straight piece inside a polygon (chart coordinates).
#[derive(Clone, Debug)]
pub struct TraceSegment {
    pub poly: usize,
    pub entry: V2,
    pub exit: V2,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TraceEnd {
    /// The ray ran into a vertex of the given class.
    ConePointHit { class: usize },
    /// The length cap was reached before any other event.
    LengthCap,
    /// The ray returned to its start point with its start direction.
    Periodic,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub segments: Vec<TraceSegment>,
    pub crossings: Vec<Crossing>,
    pub end: TraceEnd,
    /// Physical length to the terminal event (or to the last completed
    /// crossing for `LengthCap`).
    pub length: f64,
    /// Chart-coordinate squared displacement along the line, exact.
    pub len2_chart: Q,
    /// Set when an exactly edge-aligned run was resolved by the fixed
    /// "left side wins" rule.
    pub edge_aligned_resolved: bool,
}

#[derive(Clone, Copy, Debug)]
pub enum RayStart {
    /// Interior point of a polygon (or a point on an edge, not a vertex).
    Interior,
    /// A vertex; the direction selects the outgoing corner sector.
    Sector,
}

pub(crate) struct March<'a> {
    pub cx: &'a Complex,
    pub t: usize,
    pub p: V2,
    pub d: V2,
    /// Current chart -> start chart.
    pub dev: Iso,
    pub crossings: Vec<Crossing>,
    /// (tri, from, to) in the chart of `tri`.
    pub pieces: Vec<(usize, V2, V2)>,
    pub edge_aligned: bool,
    /// Return detection: `(tri, point, dir)` in that triangle's chart.
    pub watch: Option<(usize, V2, V2)>,
    steps: u64,
    budget: u64,
}

pub(crate) enum MarchEvent {
    Crossed,
    VertexHit { tri: usize, corner: usize },
    /// The watch point reappeared on the just-traced piece with the watch
    /// direction; the piece has been trimmed at the return point.
    Returned,
}

impl<'a> March<'a> {
    pub fn new(cx: &'a Complex, t: usize, p: V2, d: V2, budget: u64) -> Self {
        March {
            cx,
            t,
            p,
            d,
            dev: Iso::identity(),
            crossings: Vec::new(),
            pieces: Vec::new(),
            edge_aligned: false,
            watch: None,
            steps: 0,
            budget,
        }
    }

    /// Checks the just-pushed piece against the watch point. The piece is in
    /// the chart `self.d` currently lives in, so the comparison is exact.
    fn check_watch(&mut self) -> bool {
        let Some((wt, wp, wd)) = self.watch.clone() else {
            return false;
        };
        let Some((pt, from, to)) = self.pieces.last().cloned() else {
            return false;
        };
        if pt != wt || self.d != wd {
            return false;
        }
        if !crate::num::point_on_segment(&wp, &from, &to) {
            return false;
        }
        // The very first piece departs from the watch point; that is not a
        // return.
        if self.steps == 1 && wp == from {
            return false;
        }
        self.pieces.last_mut().unwrap().2 = wp.clone();
        self.p = wp;
        true
    }

    /// Developed image (start chart) of the current point.
    pub fn dev_point(&self) -> V2 {
        self.dev.apply(&self.p)
    }

    fn cross_adjacency(&mut self, edge: usize, at: &V2) {
        let adj = self.cx.tris[self.t].adj[edge].clone();
        if let Some(c) = adj.crossing {
            self.crossings.push(c);
        }
        self.p = adj.iso.apply(at);
        self.d = adj.iso.apply_dir(&self.d);
        self.dev = self.dev.compose(&adj.iso.inverse());
        self.t = adj.tri;
    }

    /// Advances one piece: either crosses into the next triangle or stops at
    /// a vertex (state left at the vertex, not continued).
    pub fn step(&mut self) -> Result<MarchEvent> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(FlatError::CapTooLarge(self.budget));
        }
        let tri = &self.cx.tris[self.t];

        // Exactly edge-aligned motion: run to the forward endpoint, in the
        // chart of the triangle lying on the left of the motion.
        for j in 0..3 {
            let a = tri.v[j].clone();
            let e = tri.edge_vec(j);
            if !self.d.cross(&e).is_zero() {
                continue;
            }
            let ap = self.p.sub(&a);
            if !ap.cross(&e).is_zero() {
                continue;
            }
            let along = ap.dot(&e);
            if along < Q::zero() || along > e.norm2() {
                continue;
            }
            self.edge_aligned = true;
            if self.d.dot(&e).is_positive() {
                // Left of the motion is this triangle's interior.
                let to = tri.v[(j + 1) % 3].clone();
                self.pieces.push((self.t, self.p.clone(), to.clone()));
                if self.check_watch() {
                    return Ok(MarchEvent::Returned);
                }
                self.p = to;
                return Ok(MarchEvent::VertexHit {
                    tri: self.t,
                    corner: (j + 1) % 3,
                });
            } else {
                // Left of the motion is across the edge; switch charts and
                // let the aligned case fire again over there.
                let at = self.p.clone();
                self.cross_adjacency(j, &at);
                return self.step_after_realign();
            }
        }

        // Regular exit: the first boundary line hit strictly forward.
        let mut best: Option<(Q, usize)> = None;
        for j in 0..3 {
            let a = tri.v[j].clone();
            let e = tri.edge_vec(j);
            let denom = self.d.cross(&e);
            if !denom.is_positive() {
                continue;
            }
            let s = a.sub(&self.p).cross(&e) / &denom;
            if s < Q::zero() {
                continue;
            }
            if best.as_ref().map_or(true, |(bs, _)| s < *bs) {
                best = Some((s, j));
            }
        }
        let (s, j) = best.ok_or_else(|| {
            FlatError::Internal("ray found no exit from a triangle".into())
        })?;
        let x = self.p.add(&self.d.scale(&s));
        self.pieces.push((self.t, self.p.clone(), x.clone()));
        if self.check_watch() {
            return Ok(MarchEvent::Returned);
        }

        // Vertex detection at either endpoint of the exit edge.
        for m in 0..3 {
            if x == tri.v[m] {
                self.p = x;
                return Ok(MarchEvent::VertexHit {
                    tri: self.t,
                    corner: m,
                });
            }
        }
        self.cross_adjacency(j, &x);
        Ok(MarchEvent::Crossed)
    }

    fn step_after_realign(&mut self) -> Result<MarchEvent> {
        // One recursion level: after switching charts for an anti-aligned
        // edge run, the aligned branch in the new chart terminates.
        let tri = &self.cx.tris[self.t];
        for j in 0..3 {
            let a = tri.v[j].clone();
            let e = tri.edge_vec(j);
            if !self.d.cross(&e).is_zero() || !self.p.sub(&a).cross(&e).is_zero() {
                continue;
            }
            let along = self.p.sub(&a).dot(&e);
            if along < Q::zero() || along > e.norm2() {
                continue;
            }
            if self.d.dot(&e).is_positive() {
                let to = tri.v[(j + 1) % 3].clone();
                self.pieces.push((self.t, self.p.clone(), to.clone()));
                if self.check_watch() {
                    return Ok(MarchEvent::Returned);
                }
                self.p = to;
                return Ok(MarchEvent::VertexHit {
                    tri: self.t,
                    corner: (j + 1) % 3,
                });
            }
        }
        Err(FlatError::Internal(
            "edge-aligned ray lost its edge after a chart switch".into(),
        ))
    }

    /// Continues through a vertex with the exact straight continuation.
    pub fn continue_through_vertex(&mut self, tri: usize, corner: usize) {
        let (ray, iso) = continue_straight_iso(self.cx, tri, corner, &self.d);
        self.p = self.cx.tris[ray.tri].v[ray.corner].clone();
        self.d = ray.dir;
        self.dev = self.dev.compose(&iso.inverse());
        self.t = ray.tri;
    }
}

/// Straight continuation along with the accumulated chart transition
/// (arrival chart -> continuation chart).
pub(crate) fn continue_straight_iso(
    cx: &Complex,
    t: usize,
    k: usize,
    d: &V2,
) -> (crate::complex::RayAt, Iso) {
    let mut dir = d.clone();
    let mut acc = Iso::identity();
    let (mut ct, mut ck) = (t, k);
    let limit = 3 * cx.tris.len() + 2;
    for _ in 0..limit {
        let (nt, nk, iso) = cx.next_ccw(ct, ck);
        dir = iso.apply_dir(&dir);
        acc = iso.compose(&acc);
        (ct, ck) = (nt, nk);
        if cx.wedge_contains(ct, ck, &dir) {
            return (
                crate::complex::RayAt {
                    tri: ct,
                    corner: ck,
                    dir,
                },
                acc,
            );
        }
    }
    unreachable!("straight continuation did not land in any wedge")
}

fn merge_pieces(cx: &Complex, pieces: &[(usize, V2, V2)]) -> Vec<TraceSegment> {
    let mut out: Vec<TraceSegment> = Vec::new();
    for (t, from, to) in pieces {
        if from == to {
            continue;
        }
        let poly = cx.tris[*t].poly;
        if let Some(last) = out.last_mut() {
            if last.poly == poly && last.exit == *from {
                last.exit = to.clone();
                continue;
            }
        }
        out.push(TraceSegment {
            poly,
            entry: from.clone(),
            exit: to.clone(),
        });
    }
    out
}

/// Locates the triangle containing an interior start point.
fn locate(cx: &Complex, poly: usize, p: &V2) -> Result<usize> {
    for (t, tri) in cx.tris.iter().enumerate() {
        if tri.poly != poly {
            continue;
        }
        for m in 0..3 {
            if *p == tri.v[m] {
                return Err(FlatError::AmbiguousStart);
            }
        }
        if crate::num::orient(&tri.v[0], &tri.v[1], p) >= 0
            && crate::num::orient(&tri.v[1], &tri.v[2], p) >= 0
            && crate::num::orient(&tri.v[2], &tri.v[0], p) >= 0
        {
            return Ok(t);
        }
    }
    Err(FlatError::InvalidSurface(format!(
        "start point {p:?} is not inside polygon {poly}"
    )))
}

/// Follows the straight line from `start` in direction `dir` until it hits a
/// cone point, exceeds `cap` (physical length), or closes up periodically.
///
/// With `continue_through_marked` (the default in [`crate::Config`]) the ray
/// passes straight through 2π vertices; otherwise any vertex stops it.
pub fn trace_ray(
    surface: &HalfTranslationSurface,
    poly: usize,
    start: &V2,
    dir: &V2,
    cap: f64,
    cfg: &crate::Config,
) -> Result<Trace> {
    if dir.is_zero() {
        return Err(FlatError::InvalidSurface("zero direction".into()));
    }
    let cx = Complex::build(surface)?;
    let t = locate(&cx, poly, start)?;
    trace_on(&cx, t, start.clone(), dir.clone(), cap, cfg, true)
}

/// As [`trace_ray`], but starting at a vertex into the corner sector of
/// polygon corner `(poly, vertex)` containing `dir`.
pub fn trace_ray_from_sector(
    surface: &HalfTranslationSurface,
    poly: usize,
    vertex: usize,
    dir: &V2,
    cap: f64,
    cfg: &crate::Config,
) -> Result<Trace> {
    if dir.is_zero() {
        return Err(FlatError::InvalidSurface("zero direction".into()));
    }
    let cx = Complex::build(surface)?;
    let vcoord = surface.polygons[poly].vertex(vertex).clone();
    let mut found = None;
    for (t, tri) in cx.tris.iter().enumerate() {
        if tri.poly != poly {
            continue;
        }
        for k in 0..3 {
            if tri.v[k] == vcoord && cx.wedge_contains(t, k, dir) {
                found = Some((t, k));
            }
        }
    }
    let (t, _k) = found.ok_or(FlatError::AmbiguousStart)?;
    trace_on(&cx, t, vcoord, dir.clone(), cap, cfg, false)
}

pub(crate) fn trace_on(
    cx: &Complex,
    t: usize,
    p: V2,
    d: V2,
    cap: f64,
    cfg: &crate::Config,
    detect_periodic: bool,
) -> Result<Trace> {
    let scale = q_to_f64(&cx.scale_sq);
    let p0 = p.clone();
    let mut m = March::new(cx, t, p, d.clone(), cfg.work_budget);
    if detect_periodic {
        m.watch = Some((t, p0.clone(), d));
    }
    let end;
    let mut committed = p0.clone();
    let mut committed_crossings = 0usize;
    loop {
        let before_pieces = m.pieces.len();
        let ev = m.step()?;
        // Position after this piece, developed into the start chart. The
        // developing map and the point are kept in the same chart by March.
        let dev_now = m.dev_point();
        let len_now = (q_to_f64(&dev_now.sub(&p0).norm2()) * scale).sqrt();
        if len_now > cap {
            m.pieces.truncate(before_pieces);
            m.crossings.truncate(committed_crossings);
            end = TraceEnd::LengthCap;
            break;
        }
        committed = dev_now;
        committed_crossings = m.crossings.len();
        match ev {
            MarchEvent::Crossed => continue,
            MarchEvent::Returned => {
                end = TraceEnd::Periodic;
                break;
            }
            MarchEvent::VertexHit { tri, corner } => {
                let class = cx.tris[tri].class[corner];
                if cx.class_marked[class] && cfg.continue_through_marked {
                    m.continue_through_vertex(tri, corner);
                    continue;
                }
                end = TraceEnd::ConePointHit { class };
                break;
            }
        }
    }
    let len2_chart = committed.sub(&p0).norm2();
    Ok(Trace {
        segments: merge_pieces(cx, &m.pieces),
        crossings: m.crossings,
        length: (q_to_f64(&len2_chart) * scale).sqrt(),
        len2_chart,
        end,
        edge_aligned_resolved: m.edge_aligned,
    })
}

// ---------------------------------------------------------------------------
// Word development
// ---------------------------------------------------------------------------

/// Polygon copies placed in the plane by developing a crossing word, with
/// the closing holonomy.
#[derive(Clone, Debug)]
pub struct Sleeve {
    /// `(polygon index, placement)`: the placement maps the polygon chart
    /// into the development plane (the chart of the first polygon).
    pub placements: Vec<(usize, Iso)>,
    /// Isometry carrying placed copy 0 onto placed copy n: a translation or
    /// a point rotation by π.
    pub holonomy: Iso,
}

/// Develops a cyclic crossing word into the plane.
pub fn develop(surface: &HalfTranslationSurface, word: &CurveWord) -> Result<Sleeve> {
    word.check_coherent(surface)?;
    let mut placements = vec![(word.crossings[0].exit_poly(surface), Iso::identity())];
    let mut m = Iso::identity();
    for c in &word.crossings {
        let iso = surface.gluing_iso(c.gluing, c.forward);
        m = m.compose(&iso.inverse());
        placements.push((c.entry_poly(surface), m.clone()));
    }
    Ok(Sleeve {
        placements,
        holonomy: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::num::{qi, qr};
    use crate::Config;

    fn half() -> V2 {
        V2::new(qr(1, 2), qr(1, 2))
    }

    #[test]
    fn torus_horizontal_flow_is_periodic_length_one() {
        let t = corpus::torus();
        let tr = trace_ray(&t, 0, &half(), &V2::new(qi(1), qi(0)), 10.0, &Config::default()).unwrap();
        assert_eq!(tr.end, TraceEnd::Periodic);
        assert!((tr.length - 1.0).abs() < 1e-12);
        assert_eq!(tr.len2_chart, qi(1));
    }

    #[test]
    fn torus_diagonal_passes_marked_point_and_closes() {
        let t = corpus::torus();
        let tr = trace_ray(&t, 0, &half(), &V2::new(qi(1), qi(1)), 10.0, &Config::default()).unwrap();
        assert_eq!(tr.end, TraceEnd::Periodic);
        assert!((tr.length - 2f64.sqrt()).abs() < 1e-12);
        // With continuation disabled the diagonal stops at the corner.
        let cfg = Config {
            continue_through_marked: false,
            ..Config::default()
        };
        let tr2 = trace_ray(&t, 0, &half(), &V2::new(qi(1), qi(1)), 10.0, &cfg).unwrap();
        assert!(matches!(tr2.end, TraceEnd::ConePointHit { .. }));
        assert!((tr2.length - (0.5f64.powi(2) * 2.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn torus_irrational_slope_surrogate_hits_cap() {
        let t = corpus::torus();
        let tr = trace_ray(&t, 0, &half(), &V2::new(qi(7), qi(5)), 5.0, &Config::default()).unwrap();
        assert_eq!(tr.end, TraceEnd::LengthCap);
        assert!(tr.length <= 5.0);
    }

    #[test]
    fn lshape_diagonal_separatrices_hit_the_cone_point() {
        let l = corpus::lshape();
        let d = V2::new(qi(1), qi(1));
        // Sectors at (0,0), (1,0) and (0,1) all contain the diagonal and run
        // into the cone point after length sqrt(2).
        for vertex in [0usize, 1, 7] {
            let tr = trace_ray_from_sector(&l, 0, vertex, &d, 10.0, &Config::default()).unwrap();
            assert!(
                matches!(tr.end, TraceEnd::ConePointHit { .. }),
                "vertex {vertex}: {:?}",
                tr.end
            );
            assert_eq!(tr.len2_chart, qi(2), "vertex {vertex}");
        }
    }

    #[test]
    fn trace_prefix_property_under_smaller_cap() {
        let l = corpus::lshape();
        let start = V2::new(qr(1, 3), qr(2, 7));
        let d = V2::new(qi(3), qi(1));
        let long = trace_ray(&l, 0, &start, &d, 9.0, &Config::default()).unwrap();
        let short = trace_ray(&l, 0, &start, &d, 4.0, &Config::default()).unwrap();
        assert_eq!(short.end, TraceEnd::LengthCap);
        assert!(short.length <= 4.0);
        assert!(short.crossings.len() <= long.crossings.len());
        assert_eq!(
            short.crossings[..],
            long.crossings[..short.crossings.len()]
        );
        assert!(short.segments.len() <= long.segments.len());
        let n = short.segments.len();
        for (i, (a, b)) in short.segments.iter().zip(long.segments.iter()).enumerate() {
            assert_eq!(a.poly, b.poly);
            assert_eq!(a.entry, b.entry);
            if i + 1 < n {
                assert_eq!(a.exit, b.exit);
            } else {
                // The final merged segment of the short trace may stop at an
                // earlier crossing on the same line.
                assert!(crate::num::point_on_segment(&a.exit, &b.entry, &b.exit));
            }
        }
    }

    #[test]
    fn develop_torus_words() {
        let t = corpus::torus();
        // Rightward loop: crossing the right/left gluing once.
        let s = develop(&t, &CurveWord::parse("+1").unwrap()).unwrap();
        assert_eq!(s.placements.len(), 2);
        assert_eq!(s.holonomy, Iso::translation(V2::new(qi(1), qi(0))));
        // Rightward then upward.
        let s2 = develop(&t, &CurveWord::parse("+1,-0").unwrap()).unwrap();
        assert_eq!(s2.holonomy, Iso::translation(V2::new(qi(1), qi(1))));
    }

    #[test]
    fn develop_rotation_gluing_gives_half_turn_holonomy() {
        // Two unit squares glued into a closed surface with two half-turn
        // gluings and two translations.
        use crate::surface::{EdgeRef, Gluing, GluingMap, HalfTranslationSurface, Polygon};
        let sq = |ox: i64| Polygon {
            vertices: vec![
                V2::new(qi(ox), qi(0)),
                V2::new(qi(ox + 1), qi(0)),
                V2::new(qi(ox + 1), qi(1)),
                V2::new(qi(ox), qi(1)),
            ],
        };
        let s = HalfTranslationSurface::new(
            "pillow-ish",
            vec![sq(0), sq(1)],
            vec![
                Gluing {
                    from: EdgeRef::new(0, 1),
                    to: EdgeRef::new(1, 3),
                    map: GluingMap::Translation,
                },
                Gluing {
                    from: EdgeRef::new(1, 1),
                    to: EdgeRef::new(0, 3),
                    map: GluingMap::Translation,
                },
                Gluing {
                    from: EdgeRef::new(0, 0),
                    to: EdgeRef::new(1, 0),
                    map: GluingMap::RotationPi,
                },
                Gluing {
                    from: EdgeRef::new(0, 2),
                    to: EdgeRef::new(1, 2),
                    map: GluingMap::RotationPi,
                },
            ],
        );
        // Cross the bottom half-turn gluing, then leave square 1 rightward.
        let w = CurveWord::parse("+2,+1").unwrap();
        let sleeve = develop(&s, &w).unwrap();
        assert!(sleeve.holonomy.flip);
        assert_eq!(sleeve.placements.len(), 3);
    }

    #[test]
    fn developing_consistency_trace_segments_are_collinear() {
        let l = corpus::lshape();
        let start = V2::new(qr(1, 5), qr(1, 3));
        let d = V2::new(qi(2), qi(1));
        let tr = trace_ray(&l, 0, &start, &d, 6.0, &Config::default()).unwrap();
        assert!(tr.segments.len() > 2);
        let word = CurveWord::new(tr.crossings.clone());
        let sleeve = develop(&l, &word).unwrap();
        // Place each segment with the development that precedes its crossing
        // and check global collinearity.
        let mut dev_points: Vec<V2> = vec![start.clone()];
        for (i, seg) in tr.segments.iter().enumerate() {
            let m = &sleeve.placements[i.min(sleeve.placements.len() - 1)].1;
            dev_points.push(m.apply(&seg.exit));
        }
        for w in dev_points.windows(3) {
            assert_eq!(crate::num::orient(&w[0], &w[1], &w[2]), 0);
        }
    }
}

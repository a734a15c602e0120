//! Geometric intersection numbers of tightened curves.
//!
//! Crossings come in four kinds: proper crossings in a triangle interior,
//! crossings exactly at an interior edge point (both curves cross the same
//! edge at the same point), transverse passages through a common cone point
//! (decided by the cyclic order of the four rays), and maximal shared chains
//! of saddle connections (the curves run together and the crossing count
//! depends on which sides they join and leave on — independent of the
//! push-off direction). Everything is decided with exact arithmetic.

use crate::complex::{Complex, RayAt};
use crate::error::{FlatError, Result};
use crate::num::{segments_cross_properly, Q, V2};
use crate::surface::HalfTranslationSurface;
use crate::tighten::{tighten, FlatGeodesic};
use crate::word::CurveWord;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::{HashMap, HashSet};

/// Hashable exact key of a ray at a vertex: normalized corner plus the
/// primitive direction.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
struct RayKey {
    tri: usize,
    corner: usize,
    dx: BigInt,
    dy: BigInt,
}

fn ray_key(cx: &Complex, ray: &RayAt) -> RayKey {
    let n = cx.normalize_ray(ray);
    let d = crate::num::Direction::from_vec(&n.dir).expect("nonzero ray");
    let (dx, dy) = d.components();
    // The canonical Direction identifies opposite vectors; restore the sign.
    let v = d.to_v2();
    let (dx, dy) = if v.dot(&n.dir) > Q::zero() {
        (dx.clone(), dy.clone())
    } else {
        (-dx.clone(), -dy.clone())
    };
    RayKey {
        tri: n.tri,
        corner: n.corner,
        dx,
        dy,
    }
}

/// Saddle-connection atom of a tightened path.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct Atom {
    start: RayKey,
    end: RayKey,
    len2: Q,
}

impl Atom {
    fn reversed(&self) -> Atom {
        Atom {
            start: self.end.clone(),
            end: self.start.clone(),
            len2: self.len2.clone(),
        }
    }
}

struct CurveData<'a> {
    geo: &'a FlatGeodesic,
    /// One atom per segment; empty for interior cylinder cores.
    atoms: Vec<Atom>,
    /// Edge passage events: (canonical edge id, exact point in the canonical
    /// chart, direction in the canonical chart).
    edge_events: Vec<(usize, usize, V2, V2)>,
    /// Pieces running along an edge: (canonical edge id, endpoints in the
    /// canonical chart).
    runners: Vec<(usize, usize, V2, V2)>,
    /// Piece index behind each edge event / runner entry.
    edge_event_piece: Vec<usize>,
    runner_piece: Vec<usize>,
}

fn canonical_edge(cx: &Complex, tri: usize, slot: usize) -> (usize, usize, bool) {
    let adj = &cx.tris[tri].adj[slot];
    if (adj.tri, adj.edge) < (tri, slot) {
        (adj.tri, adj.edge, false)
    } else {
        (tri, slot, true)
    }
}

fn build_curve_data<'a>(cx: &Complex, geo: &'a FlatGeodesic) -> Result<CurveData<'a>> {
    let mut atoms = Vec::new();
    if !geo.visits.is_empty() {
        if geo.visits.len() != geo.segments.len() {
            return Err(FlatError::Internal(format!(
                "visit/segment mismatch: {} visits, {} segments",
                geo.visits.len(),
                geo.segments.len()
            )));
        }
        let n = geo.visits.len();
        for i in 0..n {
            // Atom i runs from visit i-1 to visit i.
            let prev = &geo.visits[(i + n - 1) % n];
            let here = &geo.visits[i];
            atoms.push(Atom {
                start: ray_key(cx, &prev.out_ray),
                end: ray_key(cx, &here.back_ray),
                len2: geo.segments[i].len2.clone(),
            });
        }
    }
    // Edge passages: each piece boundary lying on a triangle edge interior.
    // Pieces collinear with an edge are collected as runners instead.
    let mut edge_events = Vec::new();
    let mut runners = Vec::new();
    let mut edge_event_piece = Vec::new();
    let mut runner_piece = Vec::new();
    for (pi, p) in geo.pieces.iter().enumerate() {
        let tri = &cx.tris[p.tri];
        for slot in 0..3 {
            let a = &tri.v[slot];
            let b = &tri.v[(slot + 1) % 3];
            if crate::num::point_on_segment(&p.a, a, b) && crate::num::point_on_segment(&p.b, a, b)
            {
                let (ct, cs, here) = canonical_edge(cx, p.tri, slot);
                let (pa, pb) = if here {
                    (p.a.clone(), p.b.clone())
                } else {
                    let iso = &cx.tris[p.tri].adj[slot].iso;
                    (iso.apply(&p.a), iso.apply(&p.b))
                };
                runners.push((ct, cs, pa, pb));
                runner_piece.push(pi);
                break;
            }
        }
    }
    for (pi, p) in geo.pieces.iter().enumerate() {
        // The end of each piece is a portal crossing (or the closing point);
        // classify by locating it on an edge of its triangle.
        let tri = &cx.tris[p.tri];
        for slot in 0..3 {
            let a = &tri.v[slot];
            let b = &tri.v[(slot + 1) % 3];
            if p.b == *a || p.b == *b {
                continue; // vertex passages are visits, not edge events
            }
            if !crate::num::point_on_segment(&p.b, a, b) {
                continue;
            }
            let (ct, cs, here) = canonical_edge(cx, p.tri, slot);
            let dir = p.b.sub(&p.a);
            let (pt, d) = if here {
                (p.b.clone(), dir)
            } else {
                let iso = &cx.tris[p.tri].adj[slot].iso;
                (iso.apply(&p.b), iso.apply_dir(&dir))
            };
            edge_events.push((ct, cs, pt, d));
            edge_event_piece.push(pi);
            break;
        }
    }
    Ok(CurveData {
        geo,
        atoms,
        edge_events,
        runners,
        edge_event_piece,
        runner_piece,
    })
}

/// Is `ray` strictly inside the open left-side arc of a visit frame
/// (counterclockwise from the outgoing ray to the backward ray)?
fn in_left_arc(cx: &Complex, out: &RayAt, back: &RayAt, ray: &RayAt) -> Result<bool> {
    if cx.rays_equal(out, ray) || cx.rays_equal(back, ray) {
        return Err(FlatError::DegenerateConfiguration(
            "divergence ray coincides with the frame".into(),
        ));
    }
    Ok(cx.rays_ccw_ordered(out, ray, back))
}

fn chain_matches(a: &CurveData, b: &CurveData) -> Vec<(usize, usize, bool, usize)> {
    // Maximal runs (ia, ib, same_dir, len): atom runs where the two curves
    // coincide. Indices are atom indices mod the respective lengths.
    let na = a.atoms.len();
    let nb = b.atoms.len();
    if na == 0 || nb == 0 {
        return Vec::new();
    }
    let mut used: HashSet<(usize, usize, bool)> = HashSet::new();
    let mut runs = Vec::new();
    for ia in 0..na {
        for ib in 0..nb {
            for same in [true, false] {
                if used.contains(&(ia, ib, same)) {
                    continue;
                }
                let matches = |ka: usize, kb: usize| -> bool {
                    let aa = &a.atoms[ka % na];
                    if same {
                        *aa == b.atoms[kb % nb]
                    } else {
                        *aa == b.atoms[kb % nb].reversed()
                    }
                };
                if !matches(ia, ib) {
                    continue;
                }
                // Extend backwards to find the run start.
                let step_b = |kb: usize, fwd: bool| -> usize {
                    if same == fwd {
                        (kb + 1) % nb
                    } else {
                        (kb + nb - 1) % nb
                    }
                };
                let mut sa = ia;
                let mut sb = ib;
                let mut guard = 0;
                while matches((sa + na - 1) % na, step_b(sb, false)) {
                    sa = (sa + na - 1) % na;
                    sb = step_b(sb, false);
                    guard += 1;
                    if guard > na * nb {
                        break;
                    }
                    if (sa, sb) == (ia, ib) {
                        break; // full coincidence
                    }
                }
                let mut len = 1;
                let (mut ka, mut kb) = (sa, sb);
                while len < na.max(nb) * 2 && matches((ka + 1) % na, step_b(kb, true)) {
                    ka = (ka + 1) % na;
                    kb = step_b(kb, true);
                    len += 1;
                    if (ka, kb) == (sa, sb) {
                        break;
                    }
                }
                for t in 0..len {
                    let mut xa = sa;
                    let mut xb = sb;
                    for _ in 0..t {
                        xa = (xa + 1) % na;
                        xb = step_b(xb, true);
                    }
                    used.insert((xa, xb, same));
                }
                runs.push((sa, sb, same, len));
            }
        }
    }
    runs
}

/// One transverse crossing, located on both curves. Piece locations carry
/// the parameter along the first curve's piece for deterministic ordering.
#[derive(Clone, Debug)]
pub(crate) enum RawEvent {
    Pieces {
        a_piece: usize,
        b_piece: usize,
        /// Parameter of the crossing along b's piece, for splice ordering.
        b_param: Q,
        sign: i8,
    },
    Visits {
        a_visit: usize,
        b_visit: usize,
        sign: i8,
    },
}

pub(crate) struct Analysis {
    pub events: Vec<RawEvent>,
    pub chain_crossings: u64,
    pub has_chains: bool,
}

impl Analysis {
    pub fn count(&self) -> u64 {
        self.events.len() as u64 + self.chain_crossings
    }
}

fn count_crossings(
    cx: &Complex,
    a: &CurveData,
    b: &CurveData,
    self_mode: bool,
) -> Result<u64> {
    Ok(analyze(cx, a, b, self_mode)?.count())
}

fn analyze(cx: &Complex, a: &CurveData, b: &CurveData, self_mode: bool) -> Result<Analysis> {
    let mut events: Vec<RawEvent> = Vec::new();
    let mut chain_crossings: u64 = 0;

    // Proper crossings strictly inside triangles.
    let mut by_tri: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, p) in a.geo.pieces.iter().enumerate() {
        by_tri.entry(p.tri).or_default().push(i);
    }
    for (j, q) in b.geo.pieces.iter().enumerate() {
        if let Some(list) = by_tri.get(&q.tri) {
            for &i in list {
                if self_mode && i >= j {
                    continue;
                }
                let p = &a.geo.pieces[i];
                if segments_cross_properly(&p.a, &p.b, &q.a, &q.b) {
                    let (u, _) = crate::num::seg_intersect_params(&q.a, &q.b, &p.a, &p.b)
                        .expect("proper crossings intersect");
                    let da = p.b.sub(&p.a);
                    let db = q.b.sub(&q.a);
                    let sign = if db.cross(&da) > Q::zero() { 1 } else { -1 };
                    events.push(RawEvent::Pieces {
                        a_piece: i,
                        b_piece: j,
                        b_param: u,
                        sign,
                    });
                }
            }
        }
    }

    // Passages of one curve through an edge the other runs along.
    // `swap` marks events where the runner belongs to `a`.
    let runner_hits = |walker: &CurveData,
                       runner: &CurveData,
                       swap: bool,
                       events: &mut Vec<RawEvent>| {
        for (wi, (t, sl, x, d)) in walker.edge_events.iter().enumerate() {
            for (ri, (rt, rsl, pa, pb)) in runner.runners.iter().enumerate() {
                if rt != t || rsl != sl {
                    continue;
                }
                let e = pb.sub(pa);
                if d.cross(&e).is_zero() {
                    continue; // both along the edge: chain territory
                }
                // Strict interior of the runner stretch.
                let ap = x.sub(pa);
                if e.cross(&ap).is_zero() {
                    let t1 = ap.dot(&e);
                    if t1 > Q::zero() && t1 < e.norm2() {
                        let w_piece = walker.edge_event_piece[wi];
                        let r_piece = runner.runner_piece[ri];
                        // Sign of cross(d_b, d_a) in the shared chart.
                        let (sign, a_piece, b_piece, b_param) = if swap {
                            // walker = b (passes at its piece end), runner = a.
                            let sgn = if d.cross(&e) > Q::zero() { 1 } else { -1 };
                            (sgn, r_piece, w_piece, Q::one())
                        } else {
                            // walker = a, runner = b.
                            let sgn = if e.cross(d) > Q::zero() { 1 } else { -1 };
                            (sgn, w_piece, r_piece, t1.clone() / e.norm2())
                        };
                        events.push(RawEvent::Pieces {
                            a_piece,
                            b_piece,
                            b_param,
                            sign,
                        });
                    }
                }
            }
        }
    };
    runner_hits(b, a, true, &mut events);
    if !self_mode {
        runner_hits(a, b, false, &mut events);
    }

    // Coinciding edge passages.
    for (jb, (t2, s2, pt2, d2)) in b.edge_events.iter().enumerate() {
        for (ja, (t1, s1, pt1, d1)) in a.edge_events.iter().enumerate() {
            if self_mode && ja >= jb {
                continue;
            }
            if t1 != t2 || s1 != s2 || pt1 != pt2 {
                continue;
            }
            if !d1.cross(d2).is_zero() {
                let sign = if d2.cross(d1) > Q::zero() { 1 } else { -1 };
                events.push(RawEvent::Pieces {
                    a_piece: a.edge_event_piece[ja],
                    b_piece: b.edge_event_piece[jb],
                    b_param: Q::one(),
                    sign,
                });
            }
            // Parallel coincidence is part of a shared chain.
        }
    }

    // Shared chains.
    let runs = chain_matches(a, b);
    let na = a.atoms.len();
    let nb = b.atoms.len();
    let mut consumed: HashSet<(usize, usize)> = HashSet::new();
    for (sa, sb, same, len) in &runs {
        if *len >= na.max(nb) {
            // Full coincidence: identical unoriented geodesics cross nowhere.
            for va in 0..na {
                for vb in 0..nb {
                    consumed.insert((va, vb));
                }
            }
            continue;
        }
        // Visits at the run boundary. Atom k runs from visit k-1 to visit k.
        // With `same`, b's atom sb aligns forward; otherwise backward.
        let a_start_v = (sa + na - 1) % na;
        let a_end_v = (sa + len - 1 + na) % na;
        let (b_start_v, b_end_v) = if *same {
            ((sb + nb - 1) % nb, (sb + len - 1) % nb)
        } else {
            // b traverses the chain backwards: its atom sb corresponds to
            // the chain start, moving to lower indices.
            (sb % nb, (sb + nb + nb - len) % nb)
        };
        // Consume aligned visit pairs along the run.
        for t in 0..=*len {
            let va = (a_start_v + t) % na;
            let vb = if *same {
                (b_start_v + t) % nb
            } else {
                (b_start_v + nb - t) % nb
            };
            consumed.insert((va, vb));
        }
        // Divergence sides at both ends.
        let va0 = &a.geo.visits[a_start_v];
        let va1 = &a.geo.visits[a_end_v];
        let (b_ray_start, b_ray_end) = if *same {
            (
                &b.geo.visits[b_start_v].back_ray,
                &b.geo.visits[b_end_v].out_ray,
            )
        } else {
            (
                &b.geo.visits[b_start_v].out_ray,
                &b.geo.visits[b_end_v].back_ray,
            )
        };
        let s0 = in_left_arc(cx, &va0.out_ray, &va0.back_ray, b_ray_start)?;
        let s1 = in_left_arc(cx, &va1.out_ray, &va1.back_ray, b_ray_end)?;
        if s0 != s1 {
            chain_crossings += 1;
        }
    }

    // Transverse cone-point passages not consumed by chains.
    for (ja, va) in a.geo.visits.iter().enumerate() {
        for (jb, vb) in b.geo.visits.iter().enumerate() {
            if self_mode && ja >= jb {
                continue;
            }
            if consumed.contains(&(ja, jb)) {
                continue;
            }
            if cx.ray_class(&va.back_ray) != cx.ray_class(&vb.back_ray) {
                continue;
            }
            // Shared rays outside a chain would mean a missed chain.
            let shared = [&vb.back_ray, &vb.out_ray].iter().any(|r| {
                cx.rays_equal(&va.back_ray, r) || cx.rays_equal(&va.out_ray, r)
            });
            if shared {
                return Err(FlatError::DegenerateConfiguration(
                    "shared ray outside a recognized chain".into(),
                ));
            }
            let b_back = in_left_arc(cx, &va.out_ray, &va.back_ray, &vb.back_ray)?;
            let b_out = in_left_arc(cx, &va.out_ray, &va.back_ray, &vb.out_ray)?;
            if b_back != b_out {
                // Entering from the left of `a` is the positive crossing.
                events.push(RawEvent::Visits {
                    a_visit: ja,
                    b_visit: jb,
                    sign: if b_back { 1 } else { -1 },
                });
            }
        }
    }
    Ok(Analysis {
        has_chains: !runs.is_empty(),
        events,
        chain_crossings,
    })
}

/// Transverse crossing events between two tightened curves, for twisting.
/// Chains (shared saddle connections) are reported as a flag; twisting
/// across chains is not resolved here.
pub(crate) fn events_between(
    cx: &Complex,
    alpha: &FlatGeodesic,
    beta: &FlatGeodesic,
) -> Result<Analysis> {
    let da = build_curve_data(cx, alpha)?;
    let db = build_curve_data(cx, beta)?;
    analyze(cx, &da, &db, false)
}

/// Geometric self-intersection number of the tightened representative.
pub fn self_intersection(
    surface: &HalfTranslationSurface,
    word: &CurveWord,
    cfg: &crate::Config,
) -> Result<u64> {
    let geo = tighten(surface, word, cfg)?;
    self_intersection_of(surface, &geo, cfg)
}

pub(crate) fn self_intersection_of(
    surface: &HalfTranslationSurface,
    geo: &FlatGeodesic,
    _cfg: &crate::Config,
) -> Result<u64> {
    let cx = Complex::build(surface)?;
    let data = build_curve_data(&cx, geo)?;
    count_crossings(&cx, &data, &data, true)
}

/// Geometric intersection number of two essential classes.
pub fn intersection_number(
    surface: &HalfTranslationSurface,
    w1: &CurveWord,
    w2: &CurveWord,
    cfg: &crate::Config,
) -> Result<u64> {
    let g1 = tighten(surface, w1, cfg)?;
    let g2 = tighten(surface, w2, cfg)?;
    intersection_number_of(surface, &g1, &g2, cfg)
}

pub(crate) fn intersection_number_of(
    surface: &HalfTranslationSurface,
    g1: &FlatGeodesic,
    g2: &FlatGeodesic,
    cfg: &crate::Config,
) -> Result<u64> {
    if g1.word.same_class_unoriented(&g2.word) {
        // The class against itself: two parallel push-offs meet twice per
        // self-crossing.
        return Ok(2 * self_intersection_of(surface, g1, cfg)?);
    }
    let cx = Complex::build(surface)?;
    let d1 = build_curve_data(&cx, g1)?;
    let d2 = build_curve_data(&cx, g2)?;
    count_crossings(&cx, &d1, &d2, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::word::Crossing;
    use crate::Config;

    fn torus_word(p: i64, q: i64) -> CurveWord {
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
    fn torus_intersections_match_determinants() {
        let t = corpus::torus();
        let cfg = Config::default();
        let cases = [
            ((1i64, 0i64), (0i64, 1i64), 1u64),
            ((1, 0), (1, 0), 0),
            ((2, 1), (1, 1), 1),
            ((3, 1), (1, 2), 5),
            ((2, 1), (-1, 1), 3),
            ((5, 2), (2, 1), 1),
        ];
        for ((p, q), (r, s), expect) in cases {
            let n = intersection_number(&t, &torus_word(p, q), &torus_word(r, s), &cfg).unwrap();
            assert_eq!(n, expect, "i(({p},{q}),({r},{s}))");
            let m = intersection_number(&t, &torus_word(r, s), &torus_word(p, q), &cfg).unwrap();
            assert_eq!(n, m, "symmetry");
        }
    }

    #[test]
    fn torus_primitive_classes_are_simple() {
        let t = corpus::torus();
        let cfg = Config::default();
        for (p, q) in [(1i64, 0i64), (1, 1), (2, 1), (3, -2)] {
            assert_eq!(self_intersection(&t, &torus_word(p, q), &cfg).unwrap(), 0);
        }
    }

    #[test]
    fn lshape_cores_and_diagonal() {
        let l = corpus::lshape();
        let cfg = Config::default();
        // Row and column cores cross once.
        let h2 = CurveWord::parse("+2").unwrap();
        let v2 = CurveWord::parse("+0").unwrap();
        assert_eq!(intersection_number(&l, &h2, &v2, &cfg).unwrap(), 1);
        // The double-diagonal class crosses the wide horizontal core twice:
        // both its strands descend through the bottom row.
        let d = CurveWord::parse("+2,+0").unwrap();
        assert_eq!(self_intersection(&l, &d, &cfg).unwrap(), 0);
        let n = intersection_number(&l, &d, &h2, &cfg).unwrap();
        assert_eq!(n, 1, "diagonal vs wide row core");
    }

    #[test]
    fn genus2_pair_classes_are_simple_and_disjoint() {
        let s = corpus::genus2(&crate::num::qr(1, 4)).unwrap();
        let cfg = Config::default();
        let short = corpus::genus2_short_pair_word();
        let long = corpus::genus2_long_pair_word();
        assert_eq!(self_intersection(&s, &short, &cfg).unwrap(), 0);
        assert_eq!(self_intersection(&s, &long, &cfg).unwrap(), 0);
        assert_eq!(intersection_number(&s, &short, &short, &cfg).unwrap(), 0);
    }

    #[test]
    fn intersection_invariant_under_linear_maps() {
        use crate::surface::LinearDeformation;
        let t = corpus::torus();
        let cfg = Config::default();
        let a = LinearDeformation::from_rational([
            [crate::num::qi(1), crate::num::qr(1, 2)],
            [Q::zero(), crate::num::qi(1)],
        ])
        .unwrap();
        let t2 = t.apply_linear(&a).unwrap();
        for ((p, q), (r, s)) in [((1i64, 0i64), (0i64, 1i64)), ((2, 1), (1, 1)), ((3, 1), (1, 2))] {
            let n1 = intersection_number(&t, &torus_word(p, q), &torus_word(r, s), &cfg).unwrap();
            let n2 = intersection_number(&t2, &torus_word(p, q), &torus_word(r, s), &cfg).unwrap();
            assert_eq!(n1, n2);
        }
    }
}

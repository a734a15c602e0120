//! Flat surfaces presented as euclidean polygons with edge gluings.
//!
//! Polygons are simple, counterclockwise, with exact rational vertices. Each
//! gluing identifies two whole edges by a translation or by a half turn
//! (rotation by π), which is exactly the transition group a half-translation
//! structure allows. A global `scale_sq` factor tracks area renormalization
//! so squared lengths stay rational after `normalize_area`.

use crate::error::{FlatError, Result};
use crate::num::{fmt_ratio, parse_ratio, q_to_f64, qi, Iso, Q, V2};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polygon {
    pub vertices: Vec<V2>,
}

impl Polygon {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> &V2 {
        &self.vertices[i % self.vertices.len()]
    }

    /// Edge `i` runs from vertex `i` to vertex `i+1` (cyclically).
    pub fn edge_vec(&self, i: usize) -> V2 {
        let n = self.vertices.len();
        self.vertices[(i + 1) % n].sub(&self.vertices[i])
    }

    /// Twice the signed area (shoelace).
    pub fn signed_area2(&self) -> Q {
        let n = self.vertices.len();
        let mut acc = Q::zero();
        for i in 0..n {
            acc += self.vertices[i].cross(&self.vertices[(i + 1) % n]);
        }
        acc
    }

    /// Interior angle at vertex `i`, in radians in `(0, 2π)`.
    pub fn interior_angle(&self, i: usize) -> f64 {
        let n = self.vertices.len();
        let out = self.edge_vec(i);
        let inc = self.edge_vec((i + n - 1) % n);
        let w = inc.neg();
        let (ox, oy) = out.to_f64();
        let (wx, wy) = w.to_f64();
        let cross = ox * wy - oy * wx;
        let dot = ox * wx + oy * wy;
        let a = cross.atan2(dot);
        if a <= 0.0 {
            a + 2.0 * std::f64::consts::PI
        } else {
            a
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct EdgeRef {
    pub poly: usize,
    pub edge: usize,
}

impl EdgeRef {
    pub fn new(poly: usize, edge: usize) -> Self {
        EdgeRef { poly, edge }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum GluingMap {
    Translation,
    RotationPi,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Gluing {
    pub from: EdgeRef,
    pub to: EdgeRef,
    pub map: GluingMap,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HalfTranslationSurface {
    pub name: String,
    pub polygons: Vec<Polygon>,
    pub gluings: Vec<Gluing>,
    pub boundary: Vec<EdgeRef>,
    /// Squared global length scale; the physical squared length of a chart
    /// vector `v` is `|v|² · scale_sq`.
    pub scale_sq: Q,
}

impl HalfTranslationSurface {
    pub fn new(name: &str, polygons: Vec<Polygon>, gluings: Vec<Gluing>) -> Self {
        HalfTranslationSurface {
            name: name.to_string(),
            polygons,
            gluings,
            boundary: Vec::new(),
            scale_sq: Q::one(),
        }
    }

    pub fn scale(&self) -> f64 {
        q_to_f64(&self.scale_sq).sqrt()
    }

    /// Physical length of a chart vector.
    pub fn physical_len(&self, v: &V2) -> f64 {
        (q_to_f64(&v.norm2()) * q_to_f64(&self.scale_sq)).sqrt()
    }

    /// Exact physical squared length of a chart vector.
    pub fn physical_len2(&self, v: &V2) -> Q {
        v.norm2() * &self.scale_sq
    }

    /// Exact area (chart shoelace times the scale factor).
    pub fn area_exact(&self) -> Q {
        let mut a = Q::zero();
        for p in &self.polygons {
            a += p.signed_area2();
        }
        a / qi(2) * &self.scale_sq
    }

    pub fn area(&self) -> f64 {
        q_to_f64(&self.area_exact())
    }

    /// The gluing, side, and partner edge attached to `(poly, edge)`.
    /// Side is `true` when the edge is the `from` side of its gluing.
    pub fn gluing_of_edge(&self, e: EdgeRef) -> Option<(usize, bool)> {
        for (k, g) in self.gluings.iter().enumerate() {
            if g.from == e {
                return Some((k, true));
            }
            if g.to == e {
                return Some((k, false));
            }
        }
        None
    }

    /// Chart transition for crossing gluing `k`. With `forward` the map sends
    /// the `from` polygon chart into the `to` polygon chart; it carries the
    /// start of the `from` edge to the end of the `to` edge.
    pub fn gluing_iso(&self, k: usize, forward: bool) -> Iso {
        let g = &self.gluings[k];
        let a = self.polygons[g.from.poly].vertex(g.from.edge).clone();
        let b_end = self.polygons[g.to.poly]
            .vertex(g.to.edge + 1)
            .clone();
        let iso = match g.map {
            GluingMap::Translation => Iso::translation(b_end.sub(&a)),
            GluingMap::RotationPi => Iso {
                flip: true,
                t: a.add(&b_end),
            },
        };
        if forward {
            iso
        } else {
            iso.inverse()
        }
    }

    /// Applies a determinant-one linear map to every vertex. The gluing
    /// combinatorics is untouched.
    pub fn apply_linear(&self, a: &LinearDeformation) -> Result<HalfTranslationSurface> {
        let mut out = self.clone();
        for p in &mut out.polygons {
            for v in &mut p.vertices {
                *v = a.apply(v);
            }
        }
        out.name = format!("{}~lin", self.name);
        Ok(out)
    }

    /// Rescales so the physical area is exactly 1, keeping chart coordinates
    /// and adjusting only the squared scale factor.
    pub fn normalize_area(&self) -> Result<HalfTranslationSurface> {
        let chart_area = self.area_exact() / &self.scale_sq;
        if !chart_area.is_positive() {
            return Err(FlatError::InvalidSurface("nonpositive area".into()));
        }
        let mut out = self.clone();
        out.scale_sq = chart_area.recip();
        Ok(out)
    }

    pub fn combinatorics_eq(&self, other: &HalfTranslationSurface) -> bool {
        self.polygons.len() == other.polygons.len()
            && self
                .polygons
                .iter()
                .zip(&other.polygons)
                .all(|(a, b)| a.len() == b.len())
            && self.gluings.len() == other.gluings.len()
            && self
                .gluings
                .iter()
                .zip(&other.gluings)
                .all(|(a, b)| a.from == b.from && a.to == b.to && a.map == b.map)
            && self.boundary == other.boundary
    }
}

/// A 2×2 matrix with determinant 1 (exactly when rational, within 1e-9 when
/// built from floats). Row-major entries.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinearDeformation {
    pub m: [[Q; 2]; 2],
    pub exact_det: bool,
}

impl LinearDeformation {
    pub fn from_rational(m: [[Q; 2]; 2]) -> Result<Self> {
        let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
        if det != Q::one() {
            return Err(FlatError::InvalidSurface(format!(
                "deformation determinant {} != 1",
                fmt_ratio(&det)
            )));
        }
        Ok(LinearDeformation { m, exact_det: true })
    }

    pub fn from_f64(m: [[f64; 2]; 2]) -> Result<Self> {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if (det - 1.0).abs() > 1e-9 {
            return Err(FlatError::InvalidSurface(format!(
                "deformation determinant {det} != 1"
            )));
        }
        let q = |x: f64| Q::from_float(x).ok_or(FlatError::InvalidSurface("non-finite entry".into()));
        let m = [[q(m[0][0])?, q(m[0][1])?], [q(m[1][0])?, q(m[1][1])?]];
        let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
        Ok(LinearDeformation {
            exact_det: det == Q::one(),
            m,
        })
    }

    pub fn identity() -> Self {
        LinearDeformation {
            m: [[Q::one(), Q::zero()], [Q::zero(), Q::one()]],
            exact_det: true,
        }
    }

    pub fn diagonal(lambda: Q) -> Result<Self> {
        if !lambda.is_positive() {
            return Err(FlatError::InvalidSurface("nonpositive stretch".into()));
        }
        let inv = lambda.clone().recip();
        Self::from_rational([[lambda, Q::zero()], [Q::zero(), inv]])
    }

    pub fn apply(&self, v: &V2) -> V2 {
        V2::new(
            &self.m[0][0] * &v.x + &self.m[0][1] * &v.y,
            &self.m[1][0] * &v.x + &self.m[1][1] * &v.y,
        )
    }

    /// Singular values `(σ_max, σ_min)` with `σ_max ≥ 1 ≥ σ_min`.
    pub fn singular_values(&self) -> (f64, f64) {
        let t: f64 = self
            .m
            .iter()
            .flatten()
            .map(|q| q_to_f64(q) * q_to_f64(q))
            .sum();
        let disc = (t * t - 4.0).max(0.0).sqrt();
        let smax = ((t + disc) / 2.0).sqrt();
        (smax, 1.0 / smax)
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ConePointInfo {
    pub class: usize,
    /// Cone angle as a multiple of π.
    pub angle_multiple: i64,
    pub corners: Vec<(usize, usize)>,
    pub marked: bool,
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub ok: bool,
    pub genus: Option<i64>,
    pub cone_points: Vec<ConePointInfo>,
    pub area: f64,
    pub has_boundary: bool,
    pub failures: Vec<String>,
    /// Corner (poly, vertex) -> vertex class id; filled when gluings close up.
    pub corner_class: Vec<Vec<usize>>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let r = self.find(self.parent[i]);
            self.parent[i] = r;
        }
        self.parent[i]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

pub fn validate(s: &HalfTranslationSurface) -> ValidationReport {
    let mut failures = Vec::new();
    let n_poly = s.polygons.len();
    if n_poly == 0 {
        failures.push("no polygons".to_string());
    }

    for (pi, p) in s.polygons.iter().enumerate() {
        if p.len() < 3 {
            failures.push(format!("polygon {pi} has fewer than 3 vertices"));
            continue;
        }
        let n = p.len();
        for i in 0..n {
            if p.edge_vec(i).is_zero() {
                failures.push(format!("polygon {pi} edge {i} has zero length"));
            }
        }
        if !p.signed_area2().is_positive() {
            failures.push(format!("polygon {pi} is not counterclockwise"));
        }
        // Spur corners: consecutive edges folding back exactly.
        for i in 0..n {
            let inc = p.edge_vec((i + n - 1) % n);
            let out = p.edge_vec(i);
            if inc.cross(&out).is_zero() && inc.dot(&out).is_negative() {
                failures.push(format!("polygon {pi} has a zero-angle corner at vertex {i}"));
            }
        }
        // Simplicity: non-adjacent edges must not meet at all.
        for i in 0..n {
            for j in (i + 1)..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (a, b) = (p.vertex(i), p.vertex(i + 1));
                let (c, d) = (p.vertex(j), p.vertex(j + 1));
                if crate::num::seg_intersect_params(a, b, c, d).is_some() {
                    failures.push(format!("polygon {pi} is not simple (edges {i} and {j} meet)"));
                }
            }
        }
    }

    // Gluing bookkeeping: each edge in exactly one gluing or boundary entry.
    let mut edge_use: Vec<Vec<u32>> = s.polygons.iter().map(|p| vec![0; p.len().max(1)]).collect();
    let mut refs_ok = true;
    let check_ref = |r: EdgeRef, what: &str, failures: &mut Vec<String>| -> bool {
        if r.poly >= n_poly || s.polygons[r.poly].is_empty() || r.edge >= s.polygons[r.poly].len() {
            failures.push(format!("{what} references missing edge ({}, {})", r.poly, r.edge));
            false
        } else {
            true
        }
    };
    for (k, g) in s.gluings.iter().enumerate() {
        let ok_f = check_ref(g.from, &format!("gluing {k}"), &mut failures);
        let ok_t = check_ref(g.to, &format!("gluing {k}"), &mut failures);
        if !(ok_f && ok_t) {
            refs_ok = false;
            continue;
        }
        if g.from == g.to {
            failures.push(format!("gluing {k} glues an edge to itself"));
            refs_ok = false;
            continue;
        }
        edge_use[g.from.poly][g.from.edge] += 1;
        edge_use[g.to.poly][g.to.edge] += 1;
    }
    for b in &s.boundary {
        if check_ref(*b, "boundary entry", &mut failures) {
            edge_use[b.poly][b.edge] += 1;
        } else {
            refs_ok = false;
        }
    }
    if refs_ok {
        for (pi, uses) in edge_use.iter().enumerate() {
            for (ei, &u) in uses.iter().enumerate() {
                if u == 0 {
                    failures.push(format!(
                        "edge ({pi}, {ei}) is unglued and not flagged as boundary"
                    ));
                } else if u > 1 {
                    failures.push(format!("edge ({pi}, {ei}) appears in {u} gluings"));
                }
            }
        }
    }

    // Holonomy compatibility. With both polygons counterclockwise, a
    // translation gluing pairs opposite edge vectors and a half-turn gluing
    // pairs equal ones.
    if refs_ok {
        for (k, g) in s.gluings.iter().enumerate() {
            let v = s.polygons[g.from.poly].edge_vec(g.from.edge);
            let w = s.polygons[g.to.poly].edge_vec(g.to.edge);
            let ok = match g.map {
                GluingMap::Translation => w == v.neg(),
                GluingMap::RotationPi => w == v,
            };
            if !ok {
                failures.push(format!(
                    "gluing {k} holonomy mismatch: from-edge {:?}, to-edge {:?}, map {:?}",
                    v, w, g.map
                ));
            }
        }
    }

    let has_boundary = !s.boundary.is_empty();
    if !s.scale_sq.is_positive() {
        failures.push("scale_sq must be positive".to_string());
    }
    let area = s.area();
    if area <= 0.0 {
        failures.push("total area is not positive".to_string());
    }

    let mut cone_points = Vec::new();
    let mut genus = None;
    let mut corner_class: Vec<Vec<usize>> = Vec::new();

    if failures.is_empty() && !has_boundary {
        // Identify corners around each surface vertex. The gluing carries
        // start(from) to end(to) and end(from) to start(to).
        let offsets: Vec<usize> = {
            let mut o = vec![0usize];
            for p in &s.polygons {
                o.push(o.last().unwrap() + p.len());
            }
            o
        };
        let idx = |r: EdgeRef| offsets[r.poly] + r.edge;
        let total: usize = s.polygons.iter().map(|p| p.len()).sum();
        let mut uf = UnionFind::new(total);
        for g in &s.gluings {
            let nf = s.polygons[g.from.poly].len();
            let nt = s.polygons[g.to.poly].len();
            let from_start = idx(g.from);
            let from_end = offsets[g.from.poly] + (g.from.edge + 1) % nf;
            let to_start = idx(g.to);
            let to_end = offsets[g.to.poly] + (g.to.edge + 1) % nt;
            uf.union(from_start, to_end);
            uf.union(from_end, to_start);
        }
        let mut class_of = vec![0usize; total];
        let mut reps: Vec<usize> = Vec::new();
        for i in 0..total {
            let r = uf.find(i);
            let pos = match reps.iter().position(|&x| x == r) {
                Some(p) => p,
                None => {
                    reps.push(r);
                    reps.len() - 1
                }
            };
            class_of[i] = pos;
        }
        corner_class = s
            .polygons
            .iter()
            .enumerate()
            .map(|(pi, p)| (0..p.len()).map(|vi| class_of[offsets[pi] + vi]).collect())
            .collect();

        let n_classes = reps.len();
        let mut angle = vec![0.0f64; n_classes];
        let mut members: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_classes];
        for (pi, p) in s.polygons.iter().enumerate() {
            for vi in 0..p.len() {
                let c = class_of[offsets[pi] + vi];
                angle[c] += p.interior_angle(vi);
                members[c].push((pi, vi));
            }
        }

        let mut mult_sum = 0i64;
        for c in 0..n_classes {
            let k = (angle[c] / std::f64::consts::PI).round();
            if (angle[c] / std::f64::consts::PI - k).abs() > 1e-9 {
                failures.push(format!(
                    "vertex class {c} cone angle {} is not an integer multiple of pi",
                    angle[c]
                ));
                continue;
            }
            let k = k as i64;
            if k < 2 {
                failures.push(format!("vertex class {c} cone angle below 2 pi"));
                continue;
            }
            mult_sum += k - 2;
            cone_points.push(ConePointInfo {
                class: c,
                angle_multiple: k,
                corners: members[c].clone(),
                marked: k == 2,
            });
        }

        if failures.is_empty() {
            let v = n_classes as i64;
            let e = s.gluings.len() as i64;
            let f = s.polygons.len() as i64;
            let chi = v - e + f;
            if chi % 2 != 0 || chi > 2 {
                failures.push(format!("Euler characteristic {chi} is not that of a closed orientable surface"));
            } else {
                let g = (2 - chi) / 2;
                // Angle excess must account for the full curvature: sum of
                // (k_i - 2) pi equals 2 pi (2g - 2).
                if mult_sum != 4 * g - 4 {
                    failures.push(format!(
                        "angle excess {mult_sum} pi does not match genus {g}"
                    ));
                } else {
                    genus = Some(g);
                }
            }
        }
    }

    ValidationReport {
        ok: failures.is_empty(),
        genus,
        cone_points,
        area,
        has_boundary,
        failures,
        corner_class,
    }
}

/// Validates and errors out unless the surface is a closed valid surface.
pub fn require_valid(s: &HalfTranslationSurface) -> Result<ValidationReport> {
    let rep = validate(s);
    if rep.has_boundary {
        return Err(FlatError::InvalidSurface(
            "surface has boundary edges; geodesic operations need a closed surface".into(),
        ));
    }
    if !rep.ok {
        return Err(FlatError::InvalidSurface(rep.failures.join("; ")));
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct RawGluing {
    from: [usize; 2],
    to: [usize; 2],
    map: String,
}

#[derive(Serialize, Deserialize)]
struct RawSurface {
    name: String,
    polygons: Vec<Vec<[String; 2]>>,
    gluings: Vec<RawGluing>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    boundary: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale_sq: Option<String>,
}

/// Parses the structured-text surface description. Syntax only; run
/// [`validate`] for geometric checks.
pub fn load_surface(document: &str) -> Result<HalfTranslationSurface> {
    let raw: RawSurface = serde_json::from_str(document).map_err(|e| FlatError::Parse {
        location: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let mut polygons = Vec::new();
    for (pi, poly) in raw.polygons.iter().enumerate() {
        let mut vertices = Vec::new();
        for (vi, [xs, ys]) in poly.iter().enumerate() {
            let x = parse_ratio(xs).map_err(|m| FlatError::Parse {
                location: format!("polygons[{pi}][{vi}][0]"),
                message: m,
            })?;
            let y = parse_ratio(ys).map_err(|m| FlatError::Parse {
                location: format!("polygons[{pi}][{vi}][1]"),
                message: m,
            })?;
            vertices.push(V2::new(x, y));
        }
        polygons.push(Polygon { vertices });
    }
    let mut gluings = Vec::new();
    for (gi, g) in raw.gluings.iter().enumerate() {
        let map = match g.map.as_str() {
            "translation" => GluingMap::Translation,
            "rotation_pi" => GluingMap::RotationPi,
            other => {
                return Err(FlatError::Parse {
                    location: format!("gluings[{gi}].map"),
                    message: format!("unknown map tag '{other}'"),
                })
            }
        };
        gluings.push(Gluing {
            from: EdgeRef::new(g.from[0], g.from[1]),
            to: EdgeRef::new(g.to[0], g.to[1]),
            map,
        });
    }
    let scale_sq = match &raw.scale_sq {
        None => Q::one(),
        Some(s) => parse_ratio(s).map_err(|m| FlatError::Parse {
            location: "scale_sq".to_string(),
            message: m,
        })?,
    };
    Ok(HalfTranslationSurface {
        name: raw.name,
        polygons,
        gluings,
        boundary: raw.boundary.iter().map(|[p, e]| EdgeRef::new(*p, *e)).collect(),
        scale_sq,
    })
}

/// Canonical serialization: reduced fractions, gluings sorted by their
/// `from` reference.
pub fn serialize(s: &HalfTranslationSurface) -> String {
    let mut gluings: Vec<&Gluing> = s.gluings.iter().collect();
    gluings.sort_by_key(|g| g.from);
    let raw = RawSurface {
        name: s.name.clone(),
        polygons: s
            .polygons
            .iter()
            .map(|p| {
                p.vertices
                    .iter()
                    .map(|v| [fmt_ratio(&v.x), fmt_ratio(&v.y)])
                    .collect()
            })
            .collect(),
        gluings: gluings
            .iter()
            .map(|g| RawGluing {
                from: [g.from.poly, g.from.edge],
                to: [g.to.poly, g.to.edge],
                map: match g.map {
                    GluingMap::Translation => "translation".to_string(),
                    GluingMap::RotationPi => "rotation_pi".to_string(),
                },
            })
            .collect(),
        boundary: s.boundary.iter().map(|b| [b.poly, b.edge]).collect(),
        scale_sq: if s.scale_sq.is_one() {
            None
        } else {
            Some(fmt_ratio(&s.scale_sq))
        },
    };
    serde_json::to_string_pretty(&raw).expect("surface serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::num::qr;

    #[test]
    fn torus_validates_as_genus_one_with_marked_point() {
        let t = corpus::torus();
        let rep = validate(&t);
        assert!(rep.ok, "{:?}", rep.failures);
        assert_eq!(rep.genus, Some(1));
        assert_eq!(rep.cone_points.len(), 1);
        assert_eq!(rep.cone_points[0].angle_multiple, 2);
        assert!(rep.cone_points[0].marked);
        assert!((rep.area - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lshape_validates_as_genus_two_with_6pi_cone() {
        let l = corpus::lshape();
        let rep = validate(&l);
        assert!(rep.ok, "{:?}", rep.failures);
        assert_eq!(rep.genus, Some(2));
        assert_eq!(rep.cone_points.len(), 1);
        assert_eq!(rep.cone_points[0].angle_multiple, 6);
        assert!(!rep.cone_points[0].marked);
        assert!((rep.area - 3.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_translation_gluing_fails() {
        // Unit square with bottom glued by translation to the right edge.
        let p = Polygon {
            vertices: vec![
                V2::new(qi(0), qi(0)),
                V2::new(qi(1), qi(0)),
                V2::new(qi(1), qi(1)),
                V2::new(qi(0), qi(1)),
            ],
        };
        let s = HalfTranslationSurface::new(
            "bad",
            vec![p],
            vec![
                Gluing {
                    from: EdgeRef::new(0, 0),
                    to: EdgeRef::new(0, 1),
                    map: GluingMap::Translation,
                },
                Gluing {
                    from: EdgeRef::new(0, 2),
                    to: EdgeRef::new(0, 3),
                    map: GluingMap::Translation,
                },
            ],
        );
        let rep = validate(&s);
        assert!(!rep.ok);
        assert!(rep.failures.iter().any(|f| f.contains("holonomy mismatch")));
    }

    #[test]
    fn load_rejects_zero_denominator() {
        let doc = r#"{"name":"x","polygons":[[["1/0","0"],["1","0"],["0","1"]]],"gluings":[]}"#;
        match load_surface(doc) {
            Err(FlatError::Parse { location, .. }) => assert!(location.contains("polygons[0][0][0]")),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn serialize_load_round_trip_is_identity() {
        for s in [corpus::torus(), corpus::lshape(), corpus::genus2(&qr(1, 4)).unwrap()] {
            let doc = serialize(&s);
            let s2 = load_surface(&doc).unwrap();
            assert_eq!(s, s2);
            // Canonical form is stable.
            assert_eq!(doc, serialize(&s2));
        }
    }

    #[test]
    fn normalized_scale_survives_round_trip() {
        let l = corpus::lshape().normalize_area().unwrap();
        assert_eq!(l.scale_sq, qr(1, 3));
        let l2 = load_surface(&serialize(&l)).unwrap();
        assert_eq!(l, l2);
        assert!((l2.area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn apply_linear_preserves_area_and_combinatorics() {
        let t = corpus::torus();
        let a = LinearDeformation::diagonal(qi(2)).unwrap();
        let t2 = t.apply_linear(&a).unwrap();
        assert_eq!(t2.area_exact(), t.area_exact());
        let rep = validate(&t2);
        assert!(rep.ok);
        assert_eq!(rep.genus, Some(1));
        // Identity is coordinate-exact.
        let t3 = t.apply_linear(&LinearDeformation::identity()).unwrap();
        assert_eq!(t3.polygons, t.polygons);
    }

    #[test]
    fn linear_deformation_singular_values() {
        let a = LinearDeformation::diagonal(qi(2)).unwrap();
        let (smax, smin) = a.singular_values();
        assert!((smax - 2.0).abs() < 1e-12);
        assert!((smin - 0.5).abs() < 1e-12);
        // A rational rotation has both singular values 1.
        let r = LinearDeformation::from_rational([
            [qr(3, 5), qr(-4, 5)],
            [qr(4, 5), qr(3, 5)],
        ])
        .unwrap();
        let (rmax, _) = r.singular_values();
        assert!((rmax - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gauss_bonnet_holds_after_linear_maps() {
        let l = corpus::lshape();
        let a = LinearDeformation::from_rational([[qi(1), qr(1, 2)], [Q::zero(), qi(1)]]).unwrap();
        let l2 = l.apply_linear(&a).unwrap();
        let rep = validate(&l2);
        assert!(rep.ok, "{:?}", rep.failures);
        assert_eq!(rep.genus, Some(2));
        let mults: Vec<i64> = rep.cone_points.iter().map(|c| c.angle_multiple).collect();
        assert_eq!(mults, vec![6]);
    }
}

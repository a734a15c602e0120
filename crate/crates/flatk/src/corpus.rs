//! Built-in example surfaces: the square torus, the three-square L surface,
//! and the two-square genus-2 slit family.

use crate::error::{FlatError, Result};
use crate::num::{fmt_ratio, parse_ratio, qi, qr, Q, V2};
use crate::surface::{
    validate, EdgeRef, Gluing, GluingMap, HalfTranslationSurface, Polygon,
};
use crate::word::CurveWord;
use num_traits::{One, Signed, Zero};

fn poly(coords: &[(Q, Q)]) -> Polygon {
    Polygon {
        vertices: coords.iter().map(|(x, y)| V2::new(x.clone(), y.clone())).collect(),
    }
}

fn tr(fp: usize, fe: usize, tp: usize, te: usize) -> Gluing {
    Gluing {
        from: EdgeRef::new(fp, fe),
        to: EdgeRef::new(tp, te),
        map: GluingMap::Translation,
    }
}

/// Unit square torus: opposite sides glued by translations. One marked
/// point, genus 1, area 1.
///
/// Gluing 0 pairs bottom with top, gluing 1 pairs right with left. Crossing
/// `+1` is the rightward loop, `-0` the upward loop.
pub fn torus() -> HalfTranslationSurface {
    let p = poly(&[
        (qi(0), qi(0)),
        (qi(1), qi(0)),
        (qi(1), qi(1)),
        (qi(0), qi(1)),
    ]);
    HalfTranslationSurface::new("torus", vec![p], vec![tr(0, 0, 0, 2), tr(0, 1, 0, 3)])
}

/// Three-unit-square L surface: one 6π cone point, genus 2, area 3.
///
/// The octagon has subdivision vertices at (1,0) and (0,1) so every gluing
/// pairs whole unit edges:
///
/// ```text
///   (0,2)──(1,2)
///     │  T1  │
///   (0,1)  (1,1)──(2,1)
///     │  B1    B2   │
///   (0,0)──(1,0)──(2,0)
/// ```
pub fn lshape() -> HalfTranslationSurface {
    let p = poly(&[
        (qi(0), qi(0)),
        (qi(1), qi(0)),
        (qi(2), qi(0)),
        (qi(2), qi(1)),
        (qi(1), qi(1)),
        (qi(1), qi(2)),
        (qi(0), qi(2)),
        (qi(0), qi(1)),
    ]);
    // 0: bottom-left <-> top,   1: bottom-right <-> arm top,
    // 2: right <-> left-lower,  3: arm right <-> left-upper.
    let gluings = vec![
        tr(0, 0, 0, 5),
        tr(0, 1, 0, 3),
        tr(0, 2, 0, 7),
        tr(0, 4, 0, 6),
    ];
    HalfTranslationSurface::new("lshape", vec![p], gluings)
}

/// Side length of the genus-2 family squares: a continued-fraction
/// convergent of 1/√2, accurate to about 5e-12. Rational coordinates force
/// an approximation here; the family's length ratios are exact in the slit
/// parameters regardless.
pub fn genus2_side() -> Q {
    qr(195_025, 275_807)
}

/// Two-square slit family member with horizontal slit parameter `s`
/// (the chart length of the short horizontal saddle connections).
///
/// Squares A (polygon 0) and B (polygon 1) have side [`genus2_side`]; each
/// bottom and top edge is split at `x = s`. The short pieces are glued
/// crosswise between the squares, the long pieces within each square, and
/// each square keeps its own left-right gluing. Two cone points of angle 4π,
/// genus 2, area ≈ 1 before normalization.
pub fn genus2(s: &Q) -> Result<HalfTranslationSurface> {
    let c = genus2_side();
    if !s.is_positive() || *s >= c {
        return Err(FlatError::ConstraintFailure(format!(
            "slit parameter {} outside (0, {})",
            fmt_ratio(s),
            fmt_ratio(&c)
        )));
    }
    let square = || {
        poly(&[
            (Q::zero(), Q::zero()),
            (s.clone(), Q::zero()),
            (c.clone(), Q::zero()),
            (c.clone(), c.clone()),
            (s.clone(), c.clone()),
            (Q::zero(), c.clone()),
        ])
    };
    let polygons = vec![square(), square()];
    // Edges per square: 0 = bottom short, 1 = bottom long, 2 = right,
    // 3 = top long, 4 = top short, 5 = left.
    let gluings = vec![
        tr(0, 0, 1, 4), // 0: A bottom short <-> B top short
        tr(0, 1, 0, 3), // 1: A bottom long  <-> A top long
        tr(0, 5, 0, 2), // 2: A left         <-> A right
        tr(1, 0, 0, 4), // 3: B bottom short <-> A top short
        tr(1, 1, 1, 3), // 4: B bottom long  <-> B top long
        tr(1, 5, 1, 2), // 5: B left         <-> B right
    ];
    let surf = HalfTranslationSurface {
        name: format!("genus2[s={}]", fmt_ratio(s)),
        polygons,
        gluings,
        boundary: Vec::new(),
        scale_sq: Q::one(),
    };
    certify_genus2(&surf)?;
    Ok(surf)
}

/// The short-slit class: both short horizontal saddle connections traversed
/// against each other. Its geodesic length is twice the slit parameter.
pub fn genus2_short_pair_word() -> CurveWord {
    CurveWord::parse("+0,-4,+5,+4,-5,-0").unwrap()
}

/// The long-slit class: both long horizontal saddle connections traversed
/// against each other. Its geodesic length is twice the co-slit length.
pub fn genus2_long_pair_word() -> CurveWord {
    CurveWord::parse("+1,-2,-3,+5,+3,-1").unwrap()
}

/// Distinguished classes of the family, used as extra distance candidates.
pub fn genus2_tagged_words() -> Vec<(String, CurveWord)> {
    vec![
        ("short-pair".to_string(), genus2_short_pair_word()),
        ("long-pair".to_string(), genus2_long_pair_word()),
    ]
}

fn certify_genus2(surf: &HalfTranslationSurface) -> Result<()> {
    let rep = validate(surf);
    if !rep.ok {
        return Err(FlatError::ConstraintFailure(format!(
            "family member fails validation: {}",
            rep.failures.join("; ")
        )));
    }
    if rep.genus != Some(2) {
        return Err(FlatError::ConstraintFailure(format!(
            "family member has genus {:?}, wanted 2",
            rep.genus
        )));
    }
    let mut mults: Vec<i64> = rep.cone_points.iter().map(|c| c.angle_multiple).collect();
    mults.sort_unstable();
    if mults != vec![4, 4] {
        return Err(FlatError::ConstraintFailure(format!(
            "family member has cone multiples {mults:?}, wanted [4, 4]"
        )));
    }
    Ok(())
}

/// Resolves a corpus spec string: `torus`, `lshape`, or `genus2:a=<rational>`.
pub fn corpus(spec: &str) -> Result<HalfTranslationSurface> {
    match spec {
        "torus" => Ok(torus()),
        "lshape" => Ok(lshape()),
        _ => {
            if let Some(rest) = spec.strip_prefix("genus2:") {
                let param = rest
                    .strip_prefix("a=")
                    .or_else(|| rest.strip_prefix("s="))
                    .ok_or_else(|| FlatError::UnknownCorpusEntry(spec.to_string()))?;
                let s = parse_ratio(param).map_err(|m| FlatError::Parse {
                    location: "corpus parameter".to_string(),
                    message: m,
                })?;
                genus2(&s)
            } else {
                Err(FlatError::UnknownCorpusEntry(spec.to_string()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q_to_f64;

    #[test]
    fn genus2_member_validates_with_two_4pi_cones() {
        let s = genus2(&qr(1, 4)).unwrap();
        let rep = validate(&s);
        assert!(rep.ok, "{:?}", rep.failures);
        assert_eq!(rep.genus, Some(2));
        assert_eq!(rep.cone_points.len(), 2);
        // Area is two squares of side ~ 1/sqrt(2).
        assert!((rep.area - 1.0).abs() < 1e-9);
    }

    #[test]
    fn genus2_rejects_out_of_range_parameters() {
        assert!(matches!(genus2(&qi(0)), Err(FlatError::ConstraintFailure(_))));
        assert!(matches!(genus2(&qi(1)), Err(FlatError::ConstraintFailure(_))));
        assert!(matches!(genus2(&qr(-1, 3)), Err(FlatError::ConstraintFailure(_))));
    }

    #[test]
    fn side_approximates_inverse_sqrt2() {
        let c = q_to_f64(&genus2_side());
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-11);
    }

    #[test]
    fn corpus_lookup() {
        assert!(corpus("torus").is_ok());
        assert!(corpus("lshape").is_ok());
        assert!(corpus("genus2:a=1/3").is_ok());
        assert!(matches!(corpus("moebius"), Err(FlatError::UnknownCorpusEntry(_))));
        assert!(matches!(corpus("genus2:b"), Err(FlatError::UnknownCorpusEntry(_))));
    }
}

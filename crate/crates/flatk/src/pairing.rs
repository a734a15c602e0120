//! Directional-foliation pairings and Liouville quadrature.
//!
//! A geodesic meets the foliation by lines of angle θ with total transverse
//! mass Σ ℓ_k·|sin(θ − θ_k)| over its straight segments. Averaging over θ
//! with the half-weight midpoint rule recovers the flat length, and the
//! double average against the surface's own foliations recovers π/2 per
//! unit area. Sums use block-compensated accumulation so results do not
//! depend on the thread count.

use crate::error::Result;
use crate::exec::block_sum;
use crate::surface::{require_valid, HalfTranslationSurface};
use crate::tighten::FlatGeodesic;

/// Transverse measure of the geodesic against the foliation by lines of
/// angle `theta`.
pub fn foliation_curve_pairing(theta: f64, geodesic: &FlatGeodesic) -> f64 {
    crate::exec::kahan_sum(
        geodesic
            .segments
            .iter()
            .map(|s| s.len * (theta - s.theta).sin().abs()),
    )
}

/// Midpoint-rule average of the directional pairings; converges to the flat
/// length of the geodesic.
pub fn liouville_curve_pairing(
    geodesic: &FlatGeodesic,
    samples: usize,
    cfg: &crate::Config,
) -> f64 {
    let n = samples.max(1);
    let pi = std::f64::consts::PI;
    let sum = block_sum(cfg.parallelism, n, |j| {
        let theta = (j as f64 + 0.5) * pi / n as f64;
        foliation_curve_pairing(theta, geodesic)
    });
    pi / (2.0 * n as f64) * sum
}

/// Double midpoint-rule self-pairing of the surface's own foliation family;
/// converges to `π/2 · Area`.
pub fn liouville_self_intersection(
    surface: &HalfTranslationSurface,
    samples: usize,
    cfg: &crate::Config,
) -> Result<f64> {
    require_valid(surface)?;
    let area = surface.area();
    let n = samples.max(1);
    let pi = std::f64::consts::PI;
    let w = pi / (2.0 * n as f64);
    // Pairing of two directional foliations of one flat structure is
    // |sin Δθ| per unit area; summed over the midpoint grid.
    let sum = block_sum(cfg.parallelism, n * n, |k| {
        let j = k / n;
        let i = k % n;
        let dt = (j as f64 - i as f64) * pi / n as f64;
        area * dt.sin().abs()
    });
    Ok(w * w * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::tighten::tighten;
    use crate::word::CurveWord;
    use crate::Config;

    #[test]
    fn horizontal_torus_curve_pairings() {
        let t = corpus::torus();
        let cfg = Config::default();
        let g = tighten(&t, &CurveWord::parse("+1").unwrap(), &cfg).unwrap();
        assert!(foliation_curve_pairing(0.0, &g).abs() < 1e-15);
        assert!((foliation_curve_pairing(std::f64::consts::FRAC_PI_2, &g) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_torus_curve_pairing_value() {
        let t = corpus::torus();
        let cfg = Config::default();
        // Diagonal class: length sqrt(2), angle pi/4; against theta = 0 the
        // pairing is sqrt(2)*sin(pi/4) = 1.
        let g = tighten(&t, &CurveWord::parse("+1,-0").unwrap(), &cfg).unwrap();
        assert!((foliation_curve_pairing(0.0, &g) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quadrature_recovers_lengths() {
        let t = corpus::torus();
        let cfg = Config::default();
        let h = tighten(&t, &CurveWord::parse("+1").unwrap(), &cfg).unwrap();
        let v = liouville_curve_pairing(&h, 10_000, &cfg);
        assert!((v - 1.0).abs() < 1e-3, "{v}");
        let d = tighten(&t, &CurveWord::parse("+1,-0").unwrap(), &cfg).unwrap();
        let vd = liouville_curve_pairing(&d, 10_000, &cfg);
        assert!((vd - 2f64.sqrt()).abs() < 2e-3, "{vd}");
        // One-sample rule is the crude but defined value.
        let one = liouville_curve_pairing(&h, 1, &cfg);
        let mid = std::f64::consts::FRAC_PI_2;
        assert!((one - mid.sin().abs() * std::f64::consts::PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn self_pairing_scales_with_area() {
        let cfg = Config::default();
        let torus = corpus::torus();
        let v = liouville_self_intersection(&torus, 2000, &cfg).unwrap();
        assert!((v - std::f64::consts::FRAC_PI_2).abs() < 2e-3, "{v}");
        let l = corpus::lshape();
        let vl = liouville_self_intersection(&l, 2000, &cfg).unwrap();
        assert!((vl - 3.0 * std::f64::consts::FRAC_PI_2).abs() < 5e-3, "{vl}");
        // Single sample pairs the midpoint direction with itself.
        assert_eq!(liouville_self_intersection(&torus, 1, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn pairing_invariant_under_joint_rotation() {
        use crate::surface::LinearDeformation;
        let t = corpus::torus();
        let cfg = Config::default();
        // Rational rotation by phi = atan2(4/5, 3/5).
        let rot = LinearDeformation::from_rational([
            [crate::num::qr(3, 5), crate::num::qr(-4, 5)],
            [crate::num::qr(4, 5), crate::num::qr(3, 5)],
        ])
        .unwrap();
        let t2 = t.apply_linear(&rot).unwrap();
        let w = CurveWord::parse("+1,-0").unwrap();
        let g1 = tighten(&t, &w, &cfg).unwrap();
        let g2 = tighten(&t2, &w, &cfg).unwrap();
        let phi = (4f64 / 5.0).atan2(3.0 / 5.0);
        for theta in [0.1f64, 0.7, 1.9, 2.6] {
            let a = foliation_curve_pairing(theta, &g1);
            let b = foliation_curve_pairing(theta + phi, &g2);
            assert!((a - b).abs() < 1e-12, "theta {theta}: {a} vs {b}");
        }
    }
}

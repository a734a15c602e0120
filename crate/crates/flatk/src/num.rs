//! Exact rational plane arithmetic: points, directions, half-turn isometries,
//! and the segment predicates everything else is built on.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(num: i64, den: i64) -> Q {
    assert!(den != 0, "zero denominator");
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn q_to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Parses `"p/q"` or `"p"` with arbitrary-precision integers.
pub fn parse_ratio(s: &str) -> Result<Q, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| format!("bad numerator in rational '{s}'"))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| format!("bad denominator in rational '{s}'"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in rational '{s}'"));
    }
    Ok(Q::new(n, d))
}

/// Formats a rational as `p/q` (or just `p` when the denominator is 1).
pub fn fmt_ratio(q: &Q) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Exact point or vector in the plane.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct V2 {
    pub x: Q,
    pub y: Q,
}

impl std::fmt::Debug for V2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", fmt_ratio(&self.x), fmt_ratio(&self.y))
    }
}

impl V2 {
    pub fn new(x: Q, y: Q) -> Self {
        V2 { x, y }
    }

    pub fn zero() -> Self {
        V2 {
            x: Q::zero(),
            y: Q::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn add(&self, o: &V2) -> V2 {
        V2::new(&self.x + &o.x, &self.y + &o.y)
    }

    pub fn sub(&self, o: &V2) -> V2 {
        V2::new(&self.x - &o.x, &self.y - &o.y)
    }

    pub fn neg(&self) -> V2 {
        V2::new(-self.x.clone(), -self.y.clone())
    }

    pub fn scale(&self, s: &Q) -> V2 {
        V2::new(&self.x * s, &self.y * s)
    }

    pub fn cross(&self, o: &V2) -> Q {
        &self.x * &o.y - &self.y * &o.x
    }

    pub fn dot(&self, o: &V2) -> Q {
        &self.x * &o.x + &self.y * &o.y
    }

    pub fn norm2(&self) -> Q {
        &self.x * &self.x + &self.y * &self.y
    }

    /// Counterclockwise quarter turn.
    pub fn rot90(&self) -> V2 {
        V2::new(-self.y.clone(), self.x.clone())
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (q_to_f64(&self.x), q_to_f64(&self.y))
    }
}

/// Sign of the signed area of the triangle `a b c`: +1 counterclockwise,
/// -1 clockwise, 0 collinear.
pub fn orient(a: &V2, b: &V2, c: &V2) -> i32 {
    let v = b.sub(a).cross(&c.sub(a));
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

/// Plane isometry of the form `z ↦ ±z + t`. These are the only chart
/// transition maps a half-translation gluing can produce, so composing them
/// stays exact.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Iso {
    /// Linear part is -1 when set (half turn), +1 otherwise.
    pub flip: bool,
    pub t: V2,
}

impl Iso {
    pub fn identity() -> Self {
        Iso {
            flip: false,
            t: V2::zero(),
        }
    }

    pub fn translation(t: V2) -> Self {
        Iso { flip: false, t }
    }

    /// Half turn about `c`, i.e. `z ↦ -z + 2c`.
    pub fn half_turn(c: &V2) -> Self {
        Iso {
            flip: true,
            t: c.add(c),
        }
    }

    pub fn is_identity(&self) -> bool {
        !self.flip && self.t.is_zero()
    }

    pub fn apply(&self, p: &V2) -> V2 {
        if self.flip {
            self.t.sub(p)
        } else {
            self.t.add(p)
        }
    }

    pub fn apply_dir(&self, d: &V2) -> V2 {
        if self.flip {
            d.neg()
        } else {
            d.clone()
        }
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &Iso) -> Iso {
        Iso {
            flip: self.flip ^ inner.flip,
            t: self.apply(&inner.t),
        }
    }

    pub fn inverse(&self) -> Iso {
        if self.flip {
            // z = -w + t  =>  w = -z + t
            Iso {
                flip: true,
                t: self.t.clone(),
            }
        } else {
            Iso {
                flip: false,
                t: self.t.neg(),
            }
        }
    }

    /// Fixed point of a half turn (`t/2`); meaningless for translations.
    pub fn center(&self) -> V2 {
        self.t.scale(&qr(1, 2))
    }
}

/// Direction of a nonzero vector, identified with its opposite.
///
/// Canonical representative is the primitive integer vector with `dy > 0`,
/// or `dy == 0` and `dx > 0`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Direction {
    dx: BigInt,
    dy: BigInt,
}

impl Direction {
    pub fn from_vec(v: &V2) -> Option<Direction> {
        if v.is_zero() {
            return None;
        }
        // Clear denominators, then divide by the gcd.
        let common = v.x.denom().lcm(v.y.denom());
        let mut dx = v.x.numer() * (&common / v.x.denom());
        let mut dy = v.y.numer() * (&common / v.y.denom());
        let g = dx.gcd(&dy);
        if !g.is_zero() {
            dx /= &g;
            dy /= &g;
        }
        if dy.is_negative() || (dy.is_zero() && dx.is_negative()) {
            dx = -dx;
            dy = -dy;
        }
        Some(Direction { dx, dy })
    }

    pub fn to_v2(&self) -> V2 {
        V2::new(
            Q::from_integer(self.dx.clone()),
            Q::from_integer(self.dy.clone()),
        )
    }

    /// Angle in `[0, π)`.
    pub fn angle(&self) -> f64 {
        let x = self.dx.to_f64().unwrap_or(0.0);
        let y = self.dy.to_f64().unwrap_or(0.0);
        let a = y.atan2(x);
        if a < 0.0 {
            a + std::f64::consts::PI
        } else if a >= std::f64::consts::PI {
            a - std::f64::consts::PI
        } else {
            a
        }
    }

    pub fn components(&self) -> (&BigInt, &BigInt) {
        (&self.dx, &self.dy)
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.dx, self.dy)
    }
}

/// Intersection of segment `[a,b]` with segment `[c,d]`, reported as the
/// closed parameter interval on `[a,b]` (a point intersection gives a
/// degenerate interval). `None` when the segments do not meet.
pub fn seg_intersect_params(a: &V2, b: &V2, c: &V2, d: &V2) -> Option<(Q, Q)> {
    let r = b.sub(a);
    let s = d.sub(c);
    let denom = r.cross(&s);
    let ac = c.sub(a);
    if r.is_zero() {
        // Degenerate chord: the "segment" is the single point a.
        return if point_on_segment(a, c, d) {
            Some((Q::zero(), Q::zero()))
        } else {
            None
        };
    }
    if denom.is_zero() {
        if !ac.cross(&r).is_zero() {
            return None; // parallel, not collinear
        }
        // Collinear: project c and d onto the a-b parameterization.
        let rr = r.norm2();
        let tc = ac.dot(&r) / &rr;
        let td = d.sub(a).dot(&r) / &rr;
        let (lo, hi) = if tc <= td { (tc, td) } else { (td, tc) };
        let lo = lo.max(Q::zero());
        let hi = hi.min(Q::one());
        if lo <= hi {
            Some((lo, hi))
        } else {
            None
        }
    } else {
        let t = ac.cross(&s) / &denom;
        let u = ac.cross(&r) / &denom;
        if t >= Q::zero() && t <= Q::one() && u >= Q::zero() && u <= Q::one() {
            Some((t.clone(), t))
        } else {
            None
        }
    }
}

/// True when the open interiors of `[a,b]` and `[c,d]` cross transversally.
pub fn segments_cross_properly(a: &V2, b: &V2, c: &V2, d: &V2) -> bool {
    let r = b.sub(a);
    let s = d.sub(c);
    let denom = r.cross(&s);
    if denom.is_zero() {
        return false;
    }
    let ac = c.sub(a);
    let t = ac.cross(&s) / &denom;
    let u = ac.cross(&r) / &denom;
    t > Q::zero() && t < Q::one() && u > Q::zero() && u < Q::one()
}

pub fn point_on_segment(p: &V2, a: &V2, b: &V2) -> bool {
    let ab = b.sub(a);
    let ap = p.sub(a);
    if !ab.cross(&ap).is_zero() {
        return false;
    }
    let d = ab.dot(&ap);
    d >= Q::zero() && d <= ab.norm2()
}

/// Formats a float with 12 significant digits, trimming a plain decimal
/// representation when the exponent is moderate (like printf `%g`).
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.*e}", 11, x);
    // s looks like "-1.23456789012e-3"
    let (mantissa, exp) = s.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let t = format!("{:.*}", decimals, x);
        let t = t.trim_end_matches('0').trim_end_matches('.').to_string();
        if t.is_empty() || t == "-" {
            "0".to_string()
        } else {
            t
        }
    } else {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{m}e{exp}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parsing_round_trips() {
        let q = parse_ratio("-22/8").unwrap();
        assert_eq!(fmt_ratio(&q), "-11/4");
        assert_eq!(parse_ratio("7").unwrap(), qi(7));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("x/2").is_err());
    }

    #[test]
    fn iso_compose_inverse() {
        let g = Iso::half_turn(&V2::new(qi(1), qi(2)));
        let h = Iso::translation(V2::new(qr(1, 3), qi(-1)));
        let gh = g.compose(&h);
        let p = V2::new(qr(5, 7), qr(-2, 9));
        assert_eq!(gh.apply(&p), g.apply(&h.apply(&p)));
        let inv = gh.inverse();
        assert_eq!(inv.apply(&gh.apply(&p)), p);
        assert!(gh.compose(&inv).is_identity());
    }

    #[test]
    fn direction_canonical_form() {
        let d = Direction::from_vec(&V2::new(qr(-4, 6), qr(-2, 3))).unwrap();
        assert_eq!(format!("{d}"), "(1,1)");
        let e = Direction::from_vec(&V2::new(qi(2), qi(2))).unwrap();
        assert_eq!(d, e);
        let h = Direction::from_vec(&V2::new(qi(-3), qi(0))).unwrap();
        assert_eq!(format!("{h}"), "(1,0)");
        // Idempotent: canonicalizing the canonical vector changes nothing.
        assert_eq!(Direction::from_vec(&d.to_v2()).unwrap(), d);
    }

    #[test]
    fn segment_param_intervals() {
        let a = V2::new(qi(0), qi(0));
        let b = V2::new(qi(4), qi(0));
        let c = V2::new(qi(1), qi(-1));
        let d = V2::new(qi(1), qi(3));
        let (lo, hi) = seg_intersect_params(&a, &b, &c, &d).unwrap();
        assert_eq!(lo, qr(1, 4));
        assert_eq!(hi, qr(1, 4));
        // Collinear overlap.
        let c2 = V2::new(qi(2), qi(0));
        let d2 = V2::new(qi(9), qi(0));
        let (lo2, hi2) = seg_intersect_params(&a, &b, &c2, &d2).unwrap();
        assert_eq!((lo2, hi2), (qr(1, 2), qi(1)));
        assert!(seg_intersect_params(&a, &b, &V2::new(qi(0), qi(1)), &V2::new(qi(4), qi(1))).is_none());
    }

    #[test]
    fn sig_digit_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(2.0), "2");
        assert_eq!(fmt_sig(0.6931471805599453), "0.69314718056");
        assert_eq!(fmt_sig(1.0e-7), "1e-7");
        assert_eq!(fmt_sig(1234.5), "1234.5");
    }
}

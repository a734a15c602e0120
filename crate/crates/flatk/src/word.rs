//! Combinatorial closed curves as cyclic words of signed gluing crossings.
//!
//! A positive crossing leaves through the `from` edge of the gluing and
//! re-enters through the `to` edge; a negative crossing goes the other way.
//! Any two paths in a polygon between the same entry and exit edges are
//! homotopic, so the cyclic word pins down the free homotopy class.

use crate::error::{FlatError, Result};
use crate::surface::HalfTranslationSurface;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Crossing {
    pub gluing: usize,
    pub forward: bool,
}

impl Crossing {
    pub fn inverse(&self) -> Crossing {
        Crossing {
            gluing: self.gluing,
            forward: !self.forward,
        }
    }

    /// Polygon the crossing starts in.
    pub fn exit_poly(&self, s: &HalfTranslationSurface) -> usize {
        let g = &s.gluings[self.gluing];
        if self.forward {
            g.from.poly
        } else {
            g.to.poly
        }
    }

    /// Polygon the crossing lands in.
    pub fn entry_poly(&self, s: &HalfTranslationSurface) -> usize {
        let g = &s.gluings[self.gluing];
        if self.forward {
            g.to.poly
        } else {
            g.from.poly
        }
    }

    /// Edge the crossing exits through (in the exit polygon).
    pub fn exit_edge(&self, s: &HalfTranslationSurface) -> crate::surface::EdgeRef {
        let g = &s.gluings[self.gluing];
        if self.forward {
            g.from
        } else {
            g.to
        }
    }

    /// Edge the crossing enters through (in the entry polygon).
    pub fn entry_edge(&self, s: &HalfTranslationSurface) -> crate::surface::EdgeRef {
        let g = &s.gluings[self.gluing];
        if self.forward {
            g.to
        } else {
            g.from
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CurveWord {
    pub crossings: Vec<Crossing>,
}

impl CurveWord {
    pub fn new(crossings: Vec<Crossing>) -> Self {
        CurveWord { crossings }
    }

    /// Parses the text syntax `+3,-7,+2` (0-based gluing ids, explicit signs).
    pub fn parse(text: &str) -> Result<Self> {
        let mut crossings = Vec::new();
        for (i, tok) in text.split(',').enumerate() {
            let tok = tok.trim();
            let (forward, digits) = match tok.as_bytes().first() {
                Some(b'+') => (true, &tok[1..]),
                Some(b'-') => (false, &tok[1..]),
                _ => {
                    return Err(FlatError::Parse {
                        location: format!("word token {i}"),
                        message: format!("crossing '{tok}' must start with + or -"),
                    })
                }
            };
            let gluing: usize = digits.parse().map_err(|_| FlatError::Parse {
                location: format!("word token {i}"),
                message: format!("bad gluing id '{digits}'"),
            })?;
            crossings.push(Crossing { gluing, forward });
        }
        Ok(CurveWord { crossings })
    }

    pub fn len(&self) -> usize {
        self.crossings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.crossings.is_empty()
    }

    /// Checks that consecutive crossings chain through common polygons and
    /// that every gluing id exists.
    pub fn check_coherent(&self, s: &HalfTranslationSurface) -> Result<()> {
        if self.crossings.is_empty() {
            return Err(FlatError::ContractibleCurve);
        }
        for c in &self.crossings {
            if c.gluing >= s.gluings.len() {
                return Err(FlatError::IncoherentWord(format!(
                    "gluing id {} out of range",
                    c.gluing
                )));
            }
        }
        let n = self.crossings.len();
        for i in 0..n {
            let here = self.crossings[i].entry_poly(s);
            let next = self.crossings[(i + 1) % n].exit_poly(s);
            if here != next {
                return Err(FlatError::IncoherentWord(format!(
                    "crossing {} lands in polygon {} but crossing {} leaves polygon {}",
                    i,
                    here,
                    (i + 1) % n,
                    next
                )));
            }
        }
        Ok(())
    }

    /// Cancels adjacent inverse pairs cyclically until none remain.
    pub fn reduced(&self) -> CurveWord {
        let mut w = self.crossings.clone();
        loop {
            let n = w.len();
            if n < 2 {
                break;
            }
            let mut cancelled = false;
            for i in 0..n {
                let j = (i + 1) % n;
                if w[i] == w[j].inverse() {
                    let (a, b) = if i < j { (i, j) } else { (j, i) };
                    w.remove(b);
                    w.remove(a);
                    cancelled = true;
                    break;
                }
            }
            if !cancelled {
                break;
            }
        }
        CurveWord { crossings: w }
    }

    pub fn reversed(&self) -> CurveWord {
        CurveWord {
            crossings: self.crossings.iter().rev().map(|c| c.inverse()).collect(),
        }
    }

    fn min_rotation(&self) -> Vec<Crossing> {
        if self.crossings.is_empty() {
            return Vec::new();
        }
        let n = self.crossings.len();
        let mut best: Option<Vec<Crossing>> = None;
        for r in 0..n {
            let mut cand = Vec::with_capacity(n);
            for i in 0..n {
                cand.push(self.crossings[(r + i) % n]);
            }
            if best.as_ref().map_or(true, |b| cand < *b) {
                best = Some(cand);
            }
        }
        best.unwrap()
    }

    /// Canonical form under cyclic rotation (orientation kept).
    pub fn canonical_oriented(&self) -> CurveWord {
        CurveWord {
            crossings: self.min_rotation(),
        }
    }

    /// Canonical form under cyclic rotation and orientation reversal.
    pub fn canonical_unoriented(&self) -> CurveWord {
        let a = self.min_rotation();
        let b = self.reversed().min_rotation();
        CurveWord {
            crossings: if a <= b { a } else { b },
        }
    }

    pub fn same_class_unoriented(&self, other: &CurveWord) -> bool {
        self.reduced().canonical_unoriented() == other.reduced().canonical_unoriented()
    }

    pub fn repeated(&self, times: usize) -> CurveWord {
        let mut crossings = Vec::with_capacity(self.crossings.len() * times);
        for _ in 0..times {
            crossings.extend_from_slice(&self.crossings);
        }
        CurveWord { crossings }
    }

    /// Word rotated to start at crossing `k`.
    pub fn rotated(&self, k: usize) -> CurveWord {
        let n = self.crossings.len();
        CurveWord {
            crossings: (0..n).map(|i| self.crossings[(k + i) % n]).collect(),
        }
    }
}

impl std::fmt::Display for CurveWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .crossings
            .iter()
            .map(|c| format!("{}{}", if c.forward { "+" } else { "-" }, c.gluing))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn parse_and_display_round_trip() {
        let w = CurveWord::parse("+3,-7,+2").unwrap();
        assert_eq!(w.to_string(), "+3,-7,+2");
        assert!(CurveWord::parse("3,-7").is_err());
        assert!(CurveWord::parse("+x").is_err());
    }

    #[test]
    fn reduction_cancels_backtracks_cyclically() {
        // +0,-0 cancels to nothing; wrap-around pair cancels too.
        let w = CurveWord::parse("+0,-0").unwrap().reduced();
        assert!(w.is_empty());
        let w2 = CurveWord::parse("-1,+0,-0,+1,+0").unwrap().reduced();
        assert_eq!(w2.to_string(), "+0");
    }

    #[test]
    fn unoriented_canonical_identifies_rotation_and_reversal() {
        let a = CurveWord::parse("+0,+1,-0,+1").unwrap();
        let rot = CurveWord::parse("+1,+0,+1,-0").unwrap();
        assert!(a.same_class_unoriented(&rot));
        assert!(a.same_class_unoriented(&a.reversed()));
        let unreduced = CurveWord::parse("+0,+1,-1,+1,-0,+1").unwrap();
        assert!(a.same_class_unoriented(&unreduced));
        let other = CurveWord::parse("+0,+0,+1").unwrap();
        assert!(!a.same_class_unoriented(&other));
    }

    #[test]
    fn coherence_on_the_torus() {
        let t = corpus::torus();
        let w = CurveWord::parse("+0,+1").unwrap();
        w.check_coherent(&t).unwrap();
        let bad = CurveWord::parse("+5").unwrap();
        assert!(bad.check_coherent(&t).is_err());
    }
}

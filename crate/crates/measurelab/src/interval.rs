//! Finite unions of rational-endpoint intervals: the exact measurable-set
//! representation for the non-atomic line model.
//!
//! Every set is kept normalized: parts sorted, pairwise disjoint, overlapping
//! or closed-touching parts merged. Degenerate single-point intervals are
//! legal (they arise from complements of open sets) and carry measure zero.

use crate::error::{Error, Result};
use crate::exact::Q;
use alloc::vec::Vec;
use num_traits::Zero;

/// A rational interval with per-side open/closed tags. Invariant:
/// `lo < hi`, or `lo == hi` with both sides closed (a single point).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Q,
    pub hi: Q,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: Q, hi: Q, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        if lo > hi || (lo == hi && !(lo_closed && hi_closed)) {
            return Err(Error::Invalid("interval endpoints out of order"));
        }
        Ok(Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        })
    }

    pub fn closed(lo: Q, hi: Q) -> Result<Self> {
        Interval::new(lo, hi, true, true)
    }

    pub fn open(lo: Q, hi: Q) -> Result<Self> {
        Interval::new(lo, hi, false, false)
    }

    /// Half-open `[lo, hi)`.
    pub fn half_open(lo: Q, hi: Q) -> Result<Self> {
        Interval::new(lo, hi, true, false)
    }

    pub fn point(x: Q) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn length(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Q) -> bool {
        let left = if self.lo_closed {
            x >= &self.lo
        } else {
            x > &self.lo
        };
        let right = if self.hi_closed {
            x <= &self.hi
        } else {
            x < &self.hi
        };
        left && right
    }

    fn contains_interval(&self, other: &Interval) -> bool {
        let left =
            self.lo < other.lo || (self.lo == other.lo && (self.lo_closed || !other.lo_closed));
        let right =
            self.hi > other.hi || (self.hi == other.hi && (self.hi_closed || !other.hi_closed));
        left && right
    }

    fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lo, lo_closed) = if self.lo > other.lo {
            (self.lo.clone(), self.lo_closed)
        } else if self.lo < other.lo {
            (other.lo.clone(), other.lo_closed)
        } else {
            (self.lo.clone(), self.lo_closed && other.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < other.hi {
            (self.hi.clone(), self.hi_closed)
        } else if self.hi > other.hi {
            (other.hi.clone(), other.hi_closed)
        } else {
            (self.hi.clone(), self.hi_closed && other.hi_closed)
        };
        Interval::new(lo, hi, lo_closed, hi_closed).ok()
    }

    /// Two normalized parts merge when they overlap or touch with the shared
    /// endpoint belonging to at least one side.
    fn mergeable(&self, next: &Interval) -> bool {
        debug_assert!(self.lo <= next.lo);
        next.lo < self.hi || (next.lo == self.hi && (self.hi_closed || next.lo_closed))
    }
}

/// A normalized finite union of disjoint intervals inside an ambient interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalUnion {
    ambient: Interval,
    parts: Vec<Interval>,
}

impl IntervalUnion {
    pub fn new(ambient: Interval, parts: Vec<Interval>) -> Result<Self> {
        for p in &parts {
            if !ambient.contains_interval(p) {
                return Err(Error::Invalid("interval part outside the ambient interval"));
            }
        }
        Ok(IntervalUnion {
            ambient,
            parts: normalize(parts),
        })
    }

    pub fn empty(ambient: Interval) -> Self {
        IntervalUnion {
            ambient,
            parts: Vec::new(),
        }
    }

    pub fn full(ambient: Interval) -> Self {
        IntervalUnion {
            ambient: ambient.clone(),
            parts: alloc::vec![ambient],
        }
    }

    pub fn ambient(&self) -> &Interval {
        &self.ambient
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Exact Lebesgue measure: the sum of part lengths.
    pub fn measure(&self) -> Q {
        self.parts.iter().map(Interval::length).sum()
    }

    pub fn contains(&self, x: &Q) -> bool {
        self.parts.iter().any(|p| p.contains(x))
    }

    fn check_model(&self, other: &IntervalUnion) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::ModelMismatch);
        }
        Ok(())
    }

    pub fn union(&self, other: &IntervalUnion) -> Result<IntervalUnion> {
        self.check_model(other)?;
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().cloned());
        Ok(IntervalUnion {
            ambient: self.ambient.clone(),
            parts: normalize(parts),
        })
    }

    pub fn intersection(&self, other: &IntervalUnion) -> Result<IntervalUnion> {
        self.check_model(other)?;
        let mut parts = Vec::new();
        for a in &self.parts {
            for b in &other.parts {
                if let Some(i) = a.intersect(b) {
                    parts.push(i);
                }
            }
        }
        Ok(IntervalUnion {
            ambient: self.ambient.clone(),
            parts: normalize(parts),
        })
    }

    /// Complement within the ambient interval.
    pub fn complement(&self) -> IntervalUnion {
        let amb = &self.ambient;
        let mut parts = Vec::new();
        let mut cursor = amb.lo.clone();
        let mut cursor_closed = amb.lo_closed;
        for p in &self.parts {
            if let Ok(gap) =
                Interval::new(cursor.clone(), p.lo.clone(), cursor_closed, !p.lo_closed)
            {
                parts.push(gap);
            }
            cursor = p.hi.clone();
            cursor_closed = !p.hi_closed;
        }
        if let Ok(gap) = Interval::new(cursor, amb.hi.clone(), cursor_closed, amb.hi_closed) {
            parts.push(gap);
        }
        IntervalUnion {
            ambient: amb.clone(),
            parts: normalize(parts),
        }
    }

    pub fn difference(&self, other: &IntervalUnion) -> Result<IntervalUnion> {
        self.intersection(&other.complement())
    }

    pub fn sym_diff(&self, other: &IntervalUnion) -> Result<IntervalUnion> {
        self.difference(other)?.union(&other.difference(self)?)
    }

    /// Whether the two sets differ by a Lebesgue-null set.
    pub fn ae_equal(&self, other: &IntervalUnion) -> Result<bool> {
        Ok(self.sym_diff(other)?.measure().is_zero())
    }

    /// Parts with null gaps between them merged (the essential filling used
    /// by the density-point machinery); isolated points dropped.
    fn essential_fill(&self) -> Vec<(Q, Q)> {
        let mut filled: Vec<(Q, Q)> = Vec::new();
        for p in &self.parts {
            match filled.last_mut() {
                Some((_, hi)) if *hi == p.lo => *hi = p.hi.clone(),
                _ => filled.push((p.lo.clone(), p.hi.clone())),
            }
        }
        filled.retain(|(lo, hi)| lo < hi);
        filled
    }

    /// The exact set of density points of `self` for the interval basis.
    ///
    /// A point qualifies iff the set contains a full-relative-measure
    /// neighborhood of it inside the ambient interval; on finite interval
    /// unions this is the relative interior of the essential filling, so
    /// ambient endpoints belonging to a filled part are density points.
    pub fn density_points(&self) -> IntervalUnion {
        let amb = &self.ambient;
        let parts = self
            .essential_fill()
            .into_iter()
            .map(|(lo, hi)| {
                let lo_closed = amb.lo_closed && lo == amb.lo;
                let hi_closed = amb.hi_closed && hi == amb.hi;
                Interval {
                    lo,
                    hi,
                    lo_closed,
                    hi_closed,
                }
            })
            .collect();
        IntervalUnion {
            ambient: amb.clone(),
            parts,
        }
    }

    /// Density-point membership test for a single point; the closed form of
    /// the interval-basis I-limit.
    pub fn is_density_point(&self, x: &Q) -> bool {
        if !self.ambient.contains(x) {
            return false;
        }
        self.density_points().contains(x)
    }
}

fn normalize(mut parts: Vec<Interval>) -> Vec<Interval> {
    parts.sort_by(|a, b| {
        a.lo.cmp(&b.lo)
            .then_with(|| b.lo_closed.cmp(&a.lo_closed))
            .then_with(|| a.hi.cmp(&b.hi))
    });
    let mut out: Vec<Interval> = Vec::new();
    for p in parts {
        match out.last_mut() {
            Some(last) if last.mergeable(&p) => {
                if p.hi > last.hi {
                    last.hi = p.hi;
                    last.hi_closed = p.hi_closed;
                } else if p.hi == last.hi {
                    last.hi_closed |= p.hi_closed;
                }
            }
            _ => out.push(p),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, qi};

    fn amb() -> Interval {
        Interval::closed(qi(-2), qi(2)).unwrap()
    }

    fn iu(parts: Vec<Interval>) -> IntervalUnion {
        IntervalUnion::new(amb(), parts).unwrap()
    }

    #[test]
    fn normalization_merges_and_is_idempotent() {
        // [0,1/4] ∪ [1/4,1/2] → [0,1/2]
        let e = iu(alloc::vec![
            Interval::closed(qi(0), q(1, 4)).unwrap(),
            Interval::closed(q(1, 4), q(1, 2)).unwrap(),
        ]);
        assert_eq!(e.parts().len(), 1);
        assert_eq!(e.measure(), q(1, 2));
        let again = IntervalUnion::new(amb(), e.parts().to_vec()).unwrap();
        assert_eq!(e, again);
    }

    #[test]
    fn open_touch_does_not_merge() {
        let e = iu(alloc::vec![
            Interval::half_open(qi(-1), qi(0)).unwrap(),
            Interval::new(qi(0), qi(1), false, true).unwrap(),
        ]);
        assert_eq!(e.parts().len(), 2);
        assert!(!e.contains(&qi(0)));
    }

    #[test]
    fn sym_diff_example() {
        // [0,1/2) Δ [1/4,3/4) = [0,1/4) ∪ [1/2,3/4)
        let a = iu(alloc::vec![Interval::half_open(qi(0), q(1, 2)).unwrap()]);
        let b = iu(alloc::vec![Interval::half_open(q(1, 4), q(3, 4)).unwrap()]);
        let d = a.sym_diff(&b).unwrap();
        let expected = iu(alloc::vec![
            Interval::half_open(qi(0), q(1, 4)).unwrap(),
            Interval::half_open(q(1, 2), q(3, 4)).unwrap(),
        ]);
        assert_eq!(d, expected);
    }

    #[test]
    fn complement_laws() {
        let e = iu(alloc::vec![Interval::open(qi(0), qi(1)).unwrap()]);
        assert!(e.intersection(&e.complement()).unwrap().is_empty());
        let u = e.union(&e.complement()).unwrap();
        assert_eq!(u.measure(), qi(4));
        // the boundary points are in the complement
        assert!(e.complement().contains(&qi(0)));
        assert!(e.complement().contains(&qi(1)));
    }

    #[test]
    fn one_sided_union_counterexample() {
        let e_full = iu(alloc::vec![Interval::closed(qi(-1), qi(1)).unwrap()]);
        let e_left = iu(alloc::vec![Interval::closed(qi(-1), qi(0)).unwrap()]);
        let e_right = iu(alloc::vec![Interval::closed(qi(0), qi(1)).unwrap()]);
        let zero = qi(0);
        assert!(e_full.is_density_point(&zero));
        assert!(!e_left.is_density_point(&zero));
        assert!(!e_right.is_density_point(&zero));
        let union = e_left.union(&e_right).unwrap();
        assert!(union.is_density_point(&zero));
        assert!(!iu(Vec::new()).is_density_point(&zero));
    }

    #[test]
    fn density_points_examples() {
        // [0,1/2] → (0,1/2) inside a strictly larger ambient
        let e = iu(alloc::vec![Interval::closed(qi(0), q(1, 2)).unwrap()]);
        let d = e.density_points();
        assert_eq!(d.parts(), &[Interval::open(qi(0), q(1, 2)).unwrap()]);
        // [-1,0] ∪ [0,1] → (-1,1)
        let e2 = iu(alloc::vec![
            Interval::closed(qi(-1), qi(0)).unwrap(),
            Interval::closed(qi(0), qi(1)).unwrap(),
        ]);
        assert_eq!(
            e2.density_points().parts(),
            &[Interval::open(qi(-1), qi(1)).unwrap()]
        );
        // null gap is filled: [-1,0) ∪ (0,1] → (-1,1)
        let e3 = iu(alloc::vec![
            Interval::half_open(qi(-1), qi(0)).unwrap(),
            Interval::new(qi(0), qi(1), false, true).unwrap(),
        ]);
        assert_eq!(
            e3.density_points().parts(),
            &[Interval::open(qi(-1), qi(1)).unwrap()]
        );
        // isolated point has no density points
        let e4 = iu(alloc::vec![Interval::point(qi(0))]);
        assert!(e4.density_points().is_empty());
    }

    #[test]
    fn density_points_respect_ambient_boundary() {
        // relative interior at the ambient edge: X = [a,b] itself
        let x = IntervalUnion::full(amb());
        assert_eq!(x.density_points(), x);
        assert!(x.is_density_point(&qi(-2)));
    }

    #[test]
    fn density_mu_symmetric_difference_null() {
        let e = iu(alloc::vec![
            Interval::closed(qi(0), q(1, 2)).unwrap(),
            Interval::point(qi(1)),
        ]);
        let d = e.density_points();
        assert!(e.sym_diff(&d).unwrap().measure().is_zero());
    }
}

//! Axis-aligned box abstractions over a feature space.
//!
//! A box is stored as a center and a per-dimension radius, so membership is a
//! single pass over the coordinates. Boxes also carry the provenance of the
//! cluster they abstract: an identifier, how many samples went into them, the
//! predicted label they were recorded under, and whether those samples were
//! correctly (positive) or incorrectly (negative) predicted.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite, non-empty point in feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyFeatureVector);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(FeatureVector(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Lexicographic total order, used for canonical sample ordering.
    pub fn total_cmp(&self, other: &Self) -> std::cmp::Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl TryFrom<Vec<f64>> for FeatureVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        FeatureVector::new(values)
    }
}

impl From<FeatureVector> for Vec<f64> {
    fn from(v: FeatureVector) -> Self {
        v.0
    }
}

impl std::ops::Index<usize> for FeatureVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Whether a box abstracts correct (good) or incorrect (bad) behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn from_correct(correct: bool) -> Self {
        if correct {
            Polarity::Positive
        } else {
            Polarity::Negative
        }
    }

    /// True when a sample with this correctness flag agrees with the polarity.
    pub fn agrees_with(self, correct: bool) -> bool {
        self == Polarity::from_correct(correct)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Opaque cluster identifier, unique within one monitor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClusterId(pub String);

impl fmt::Display for ClusterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ClusterId {
    fn from(s: &str) -> Self {
        ClusterId(s.to_owned())
    }
}

/// The `(l, r, c, m, y, i)` abstraction of one cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbstractionBox {
    /// Center `l`.
    pub center: FeatureVector,
    /// Per-dimension radius `r`, all entries non-negative.
    pub radius: Vec<f64>,
    /// Cluster `c`.
    pub cluster: ClusterId,
    /// Number of abstracted samples `m`.
    pub count: usize,
    /// Predicted class label `y`.
    pub label: String,
    /// Correctness indicator `i`.
    pub polarity: Polarity,
}

impl AbstractionBox {
    /// Builds a box from raw parts, checking the shape invariants.
    pub fn new(
        center: FeatureVector,
        radius: Vec<f64>,
        cluster: ClusterId,
        count: usize,
        label: impl Into<String>,
        polarity: Polarity,
    ) -> Result<Self> {
        if radius.len() != center.dim() {
            return Err(Error::DimensionMismatch {
                expected: center.dim(),
                actual: radius.len(),
            });
        }
        if radius.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::invalid("box radius must be finite and non-negative"));
        }
        if count == 0 {
            return Err(Error::invalid("box must abstract at least one sample"));
        }
        Ok(AbstractionBox {
            center,
            radius,
            cluster,
            count,
            label: label.into(),
            polarity,
        })
    }

    /// Tightest axis-aligned box enclosing `points`.
    pub fn from_points(
        points: &[FeatureVector],
        cluster: ClusterId,
        label: impl Into<String>,
        polarity: Polarity,
    ) -> Result<Self> {
        let first = points.first().ok_or(Error::Empty("box point set"))?;
        let dim = first.dim();
        let mut lo = first.as_slice().to_vec();
        let mut hi = lo.clone();
        for p in &points[1..] {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: p.dim(),
                });
            }
            for (j, &v) in p.as_slice().iter().enumerate() {
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        let center = lo.iter().zip(&hi).map(|(a, b)| a + (b - a) / 2.0).collect();
        let mut radius: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| (b - a) / 2.0).collect();
        let center = FeatureVector::new(center)?;
        // center ± radius can round inward by an ulp; widen until the extremes are inside.
        for j in 0..dim {
            while (lo[j] - center[j]).abs() > radius[j] || (hi[j] - center[j]).abs() > radius[j] {
                radius[j] = next_up(radius[j]);
            }
        }
        AbstractionBox::new(center, radius, cluster, points.len(), label, polarity)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// Closed-box membership: `|x[j] - l[j]| <= r[j]` in every dimension.
    pub fn contains(&self, x: &FeatureVector) -> Result<bool> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.dim(),
            });
        }
        Ok(self.contains_unchecked(x.as_slice()))
    }

    pub(crate) fn contains_unchecked(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.center.as_slice())
            .zip(&self.radius)
            .all(|((xj, lj), rj)| (xj - lj).abs() <= *rj)
    }

    /// Returns a copy with `r'[j] = r[j] * (1 + scale) + floor`.
    pub fn inflate(&self, scale: f64, floor: f64) -> Result<Self> {
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(Error::invalid(format!("inflation factor must be >= 0, got {scale}")));
        }
        if !(floor.is_finite() && floor >= 0.0) {
            return Err(Error::invalid(format!("inflation floor must be >= 0, got {floor}")));
        }
        let mut out = self.clone();
        for r in &mut out.radius {
            *r = *r * (1.0 + scale) + floor;
        }
        Ok(out)
    }
}

fn next_up(x: f64) -> f64 {
    if x == 0.0 {
        f64::from_bits(1)
    } else {
        f64::from_bits(x.to_bits() + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fv(v: &[f64]) -> FeatureVector {
        FeatureVector::new(v.to_vec()).unwrap()
    }

    fn unit_box() -> AbstractionBox {
        AbstractionBox::new(fv(&[0.0, 0.0]), vec![1.0, 1.0], "c0".into(), 1, "car", Polarity::Positive)
            .unwrap()
    }

    #[test]
    fn contains_center_boundary_and_outside() {
        let b = unit_box();
        assert!(b.contains(&fv(&[0.0, 0.0])).unwrap());
        assert!(b.contains(&fv(&[1.0, 1.0])).unwrap());
        assert!(!b.contains(&fv(&[1.0001, 0.0])).unwrap());
    }

    #[test]
    fn contains_rejects_dimension_mismatch() {
        let err = unit_box().contains(&fv(&[0.0, 0.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, actual: 3 }));
    }

    #[test]
    fn feature_vector_rejects_non_finite() {
        assert!(matches!(
            FeatureVector::new(vec![0.0, f64::NAN]),
            Err(Error::NonFinite { index: 1, .. })
        ));
        assert!(FeatureVector::new(vec![f64::INFINITY]).is_err());
        assert!(matches!(FeatureVector::new(vec![]), Err(Error::EmptyFeatureVector)));
    }

    #[test]
    fn from_points_examples() {
        let b = AbstractionBox::from_points(
            &[fv(&[0.0, 0.0]), fv(&[2.0, 4.0])],
            "c".into(),
            "y",
            Polarity::Positive,
        )
        .unwrap();
        assert_eq!(b.center.as_slice(), &[1.0, 2.0]);
        assert_eq!(b.radius, vec![1.0, 2.0]);
        assert_eq!(b.count, 2);

        let b = AbstractionBox::from_points(&[fv(&[3.0, 3.0])], "c".into(), "y", Polarity::Negative)
            .unwrap();
        assert_eq!(b.center.as_slice(), &[3.0, 3.0]);
        assert_eq!(b.radius, vec![0.0, 0.0]);
        assert_eq!(b.count, 1);
        assert!(b.contains(&fv(&[3.0, 3.0])).unwrap());

        let b = AbstractionBox::from_points(
            &[fv(&[-1.0, 0.0]), fv(&[1.0, 0.0]), fv(&[0.0, 0.0])],
            "c".into(),
            "y",
            Polarity::Positive,
        )
        .unwrap();
        assert_eq!(b.center.as_slice(), &[0.0, 0.0]);
        assert_eq!(b.radius, vec![1.0, 0.0]);
    }

    #[test]
    fn from_points_errors() {
        assert!(matches!(
            AbstractionBox::from_points(&[], "c".into(), "y", Polarity::Positive),
            Err(Error::Empty(_))
        ));
        assert!(matches!(
            AbstractionBox::from_points(&[fv(&[0.0]), fv(&[0.0, 1.0])], "c".into(), "y", Polarity::Positive),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn inflate_examples() {
        let b = AbstractionBox::new(fv(&[0.0, 0.0]), vec![1.0, 2.0], "c".into(), 3, "y", Polarity::Positive)
            .unwrap();
        assert_eq!(b.inflate(0.0, 0.0).unwrap(), b);
        assert_eq!(b.inflate(0.5, 0.0).unwrap().radius, vec![1.5, 3.0]);
        let degenerate =
            AbstractionBox::new(fv(&[0.0, 0.0]), vec![0.0, 0.0], "c".into(), 1, "y", Polarity::Positive)
                .unwrap();
        let inflated = degenerate.inflate(1.0, 0.1).unwrap();
        assert_eq!(inflated.radius, vec![0.1, 0.1]);
        assert_eq!(inflated.center, degenerate.center);
        assert_eq!(inflated.count, 1);
        assert!(b.inflate(-0.1, 0.0).is_err());
    }

    fn point_sets() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (1usize..5).prop_flat_map(|d| {
            prop::collection::vec(prop::collection::vec(-1e6f64..1e6, d), 1..30)
        })
    }

    proptest! {
        #[test]
        fn every_source_point_is_contained(pts in point_sets()) {
            let pts: Vec<FeatureVector> = pts.into_iter().map(|p| FeatureVector::new(p).unwrap()).collect();
            let b = AbstractionBox::from_points(&pts, "c".into(), "y", Polarity::Positive).unwrap();
            prop_assert_eq!(b.count, pts.len());
            for p in &pts {
                prop_assert!(b.contains(p).unwrap());
            }
        }

        #[test]
        fn from_points_is_permutation_invariant(pts in point_sets(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let pts: Vec<FeatureVector> = pts.into_iter().map(|p| FeatureVector::new(p).unwrap()).collect();
            let mut shuffled = pts.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = AbstractionBox::from_points(&pts, "c".into(), "y", Polarity::Positive).unwrap();
            let b = AbstractionBox::from_points(&shuffled, "c".into(), "y", Polarity::Positive).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn containment_is_monotone_in_inflation(
            pts in point_sets(),
            scale in 0.0f64..3.0,
            floor in 0.0f64..1.0,
            probe in prop::collection::vec(-2e6f64..2e6, 4),
        ) {
            let pts: Vec<FeatureVector> = pts.into_iter().map(|p| FeatureVector::new(p).unwrap()).collect();
            let b = AbstractionBox::from_points(&pts, "c".into(), "y", Polarity::Positive).unwrap();
            let x = FeatureVector::new(probe[..b.dim()].to_vec()).unwrap();
            let grown = b.inflate(scale, floor).unwrap();
            if b.contains(&x).unwrap() {
                prop_assert!(grown.contains(&x).unwrap());
            }
            for p in &pts {
                prop_assert!(grown.contains(p).unwrap());
            }
        }
    }
}

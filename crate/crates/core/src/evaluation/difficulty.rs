use serde::{Deserialize, Serialize};

use crate::kitti_io::{Category, ObjectLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    Easy,
    Moderate,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Moderate, Difficulty::Hard];

    /// `(min 2D height px, max occlusion level, max truncation)`.
    pub fn limits(&self) -> (f64, i8, f64) {
        match self {
            Difficulty::Easy => (40.0, 0, 0.15),
            Difficulty::Moderate => (25.0, 1, 0.30),
            Difficulty::Hard => (25.0, 2, 0.50),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Moderate => "moderate",
            Difficulty::Hard => "hard",
        }
    }
}

impl std::fmt::Display for Difficulty {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Difficulty {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Difficulty::ALL
            .into_iter()
            .find(|d| d.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown difficulty `{s}` (expected easy, moderate or hard)"))
    }
}

/// How a ground-truth row takes part in one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GtStatus {
    /// Can be matched and is a miss when unmatched.
    Counted,
    /// Absorbs detections without being counted either way.
    Ignored,
    /// Not part of this evaluation at all.
    Excluded,
}

fn passes(label: &ObjectLabel, difficulty: Difficulty) -> bool {
    let (min_height, max_occlusion, max_truncation) = difficulty.limits();
    label.box2d.height() >= min_height
        && (0..=max_occlusion).contains(&label.occlusion)
        && (0.0..=max_truncation).contains(&label.truncation)
}

/// Status of `label` when evaluating `category` at `difficulty`.
///
/// Rows of the category that miss the tier's height, occlusion or truncation
/// limits are ignored, as are DontCare regions. Other categories are
/// excluded.
pub fn difficulty_filter(label: &ObjectLabel, category: Category, difficulty: Difficulty) -> GtStatus {
    if label.is_dont_care() {
        return GtStatus::Ignored;
    }
    if label.category != category {
        return GtStatus::Excluded;
    }
    if passes(label, difficulty) {
        GtStatus::Counted
    } else {
        GtStatus::Ignored
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Box2D, Dimensions};
    use nalgebra::Point3;

    fn car(height: f64, occlusion: i8, truncation: f64) -> ObjectLabel {
        ObjectLabel {
            category: Category::Car,
            truncation,
            occlusion,
            alpha: 0.0,
            box2d: Box2D::new(100.0, 100.0, 150.0, 100.0 + height),
            dims: Dimensions::new(1.5, 1.6, 3.9),
            location: Point3::new(0.0, 1.6, 20.0),
            rotation_y: 0.0,
            score: None,
        }
    }

    #[test]
    fn clean_car_counts_everywhere() {
        for d in Difficulty::ALL {
            assert_eq!(difficulty_filter(&car(50.0, 0, 0.0), Category::Car, d), GtStatus::Counted);
        }
    }

    #[test]
    fn short_box_ignored_at_easy() {
        let c = car(30.0, 0, 0.0);
        assert_eq!(difficulty_filter(&c, Category::Car, Difficulty::Easy), GtStatus::Ignored);
        assert_eq!(difficulty_filter(&c, Category::Car, Difficulty::Moderate), GtStatus::Counted);
    }

    #[test]
    fn heavy_truncation_ignored_at_hard() {
        let c = car(50.0, 0, 0.9);
        assert_eq!(difficulty_filter(&c, Category::Car, Difficulty::Hard), GtStatus::Ignored);
    }

    #[test]
    fn unknown_occlusion_never_counts() {
        for d in Difficulty::ALL {
            assert_eq!(difficulty_filter(&car(80.0, 3, 0.0), Category::Car, d), GtStatus::Ignored);
        }
    }

    #[test]
    fn other_categories_and_dont_care() {
        let c = car(50.0, 0, 0.0);
        assert_eq!(
            difficulty_filter(&c, Category::Pedestrian, Difficulty::Easy),
            GtStatus::Excluded
        );
        let dc = ObjectLabel {
            category: Category::DontCare,
            ..c
        };
        assert_eq!(difficulty_filter(&dc, Category::Car, Difficulty::Easy), GtStatus::Ignored);
    }

    #[test]
    fn boundary_values_are_inclusive() {
        let c = car(40.0, 0, 0.15);
        assert_eq!(difficulty_filter(&c, Category::Car, Difficulty::Easy), GtStatus::Counted);
    }
}

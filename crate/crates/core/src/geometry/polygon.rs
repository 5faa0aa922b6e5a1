use nalgebra::Point2;

/// Collinearity tolerance for the clipping inside-test.
pub const CLIP_EPSILON: f64 = 1e-9;

/// Bird's-eye-view footprint of a box: four `(x, z)` vertices,
/// counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BevPolygon {
    pub vertices: [Point2<f64>; 4],
}

impl BevPolygon {
    pub fn new(vertices: [Point2<f64>; 4]) -> Self {
        Self { vertices }
    }

    pub fn signed_area(&self) -> f64 {
        shoelace_area(&self.vertices)
    }

    /// Area of the overlap with another counter-clockwise footprint.
    pub fn intersection_area(&self, other: &BevPolygon) -> f64 {
        let clipped = clip_convex(&self.vertices, &other.vertices);
        if clipped.len() < 3 {
            return 0.0;
        }
        shoelace_area(&clipped).max(0.0)
    }
}

/// Signed area of a simple polygon; positive for counter-clockwise order.
pub fn shoelace_area(points: &[Point2<f64>]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let n = points.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let a = points[i];
            let b = points[(i + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum();
    0.5 * twice
}

fn cross(o: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Point where segment `p -> q` crosses the infinite line through `a -> b`.
fn line_crossing(p: &Point2<f64>, q: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>) -> Point2<f64> {
    let side_p = cross(a, b, p);
    let side_q = cross(a, b, q);
    let denom = side_p - side_q;
    if denom.abs() < f64::EPSILON {
        return *q;
    }
    let t = side_p / denom;
    Point2::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
}

/// Sutherland–Hodgman: clips `subject` against every edge of the convex,
/// counter-clockwise `clip` polygon. The result may have fewer than three
/// vertices when the overlap is empty or degenerate.
pub fn clip_convex(subject: &[Point2<f64>], clip: &[Point2<f64>]) -> Vec<Point2<f64>> {
    let mut output: Vec<Point2<f64>> = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % m];
        let input = std::mem::take(&mut output);
        let n = input.len();
        for j in 0..n {
            let current = input[j];
            let previous = input[(j + n - 1) % n];
            let current_in = cross(&a, &b, &current) >= -CLIP_EPSILON;
            let previous_in = cross(&a, &b, &previous) >= -CLIP_EPSILON;
            if current_in {
                if !previous_in {
                    output.push(line_crossing(&previous, &current, &a, &b));
                }
                output.push(current);
            } else if previous_in {
                output.push(line_crossing(&previous, &current, &a, &b));
            }
        }
    }
    output
}

use serde::{Deserialize, Serialize};

/// A point in R^1 or R^2. One-dimensional points keep `y = 0`, so the
/// Euclidean distance is correct in either dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn on_line(x: f64) -> Self {
        Point { x, y: 0.0 }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn coord(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.x
        } else {
            self.y
        }
    }
}

/// Axis-aligned open box `center ± half_width` (only the first `dim` axes matter).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub dim: usize,
    pub center: Point,
    pub half_width: [f64; 2],
}

impl DomainBox {
    pub fn interval(lo: f64, hi: f64) -> Self {
        DomainBox {
            dim: 1,
            center: Point::on_line(0.5 * (lo + hi)),
            half_width: [0.5 * (hi - lo), 0.0],
        }
    }

    pub fn square(center: Point, half_width: f64) -> Self {
        DomainBox {
            dim: 2,
            center,
            half_width: [half_width, half_width],
        }
    }

    pub fn contains_open(&self, p: &Point) -> bool {
        (0..self.dim).all(|k| (p.coord(k) - self.center.coord(k)).abs() < self.half_width[k])
    }

    /// True when the closed ball `B_r(center)` lies inside the open box.
    pub fn contains_closed_ball(&self, center: &Point, r: f64) -> bool {
        (0..self.dim).all(|k| {
            (center.coord(k) - self.center.coord(k)).abs() + r < self.half_width[k]
        })
    }

    pub fn measure(&self) -> f64 {
        (0..self.dim).map(|k| 2.0 * self.half_width[k]).product()
    }

    /// Radius of the smallest ball about the box center containing the box.
    pub fn circumradius(&self) -> f64 {
        (0..self.dim)
            .map(|k| self.half_width[k] * self.half_width[k])
            .sum::<f64>()
            .sqrt()
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.center.coord(axis) - self.half_width[axis]
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.center.coord(axis) + self.half_width[axis]
    }
}

/// Surface measure of the unit sphere S^{n-1}.
pub fn unit_sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        _ => 4.0 * std::f64::consts::PI,
    }
}

/// Volume of the unit ball in R^n.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => std::f64::consts::PI,
        _ => 4.0 * std::f64::consts::PI / 3.0,
    }
}

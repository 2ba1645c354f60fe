//! Points in d <= 2 dimensions. In 1D the second coordinate is always 0.

pub type Point = [f64; 2];

#[inline]
pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: &Point, b: &Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale(a: &Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: &Point) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dist(a: &Point, b: &Point) -> f64 {
    norm(&sub(a, b))
}

/// Volume of the unit ball in dimension `d` (1 or 2).
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        _ => std::f64::consts::PI,
    }
}

/// Surface measure of the unit sphere in dimension `d` (1 or 2).
pub fn unit_sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI,
    }
}

//! Omnidirectional range sensor with line-of-sight occlusion.
//!
//! Visibility is a supercover traversal between square centers: a target is
//! seen when the center-to-center segment enters no obstacle interior before
//! reaching it. A segment passing exactly through a shared corner does not
//! enter the two squares that only touch it there. Because the test depends
//! only on the segment, it is symmetric in its endpoints.

use crate::grid::{Cell, GridMap, Occupancy};

/// Squares whose interior the segment from `(0,0)` to `(dc,dr)` enters,
/// excluding both endpoints, in traversal order.
pub fn supercover_between(dc: i32, dr: i32) -> Vec<(i32, i32)> {
    let (nx, ny) = (dc.unsigned_abs() as i64, dr.unsigned_abs() as i64);
    let (sx, sy) = (dc.signum(), dr.signum());
    let (mut ix, mut iy) = (0i64, 0i64);
    let (mut x, mut y) = (0i32, 0i32);
    let mut out = Vec::new();
    while ix < nx || iy < ny {
        let step_x = if ix == nx {
            Some(false)
        } else if iy == ny {
            Some(true)
        } else {
            // boundary crossings at t = (2i+1) / 2n; equal means a corner
            let lhs = (2 * ix + 1) * ny;
            let rhs = (2 * iy + 1) * nx;
            match lhs.cmp(&rhs) {
                std::cmp::Ordering::Less => Some(true),
                std::cmp::Ordering::Greater => Some(false),
                std::cmp::Ordering::Equal => None,
            }
        };
        match step_x {
            Some(true) => {
                ix += 1;
                x += sx;
            }
            Some(false) => {
                iy += 1;
                y += sy;
            }
            None => {
                ix += 1;
                iy += 1;
                x += sx;
                y += sy;
            }
        }
        if (x, y) != (dc, dr) {
            out.push((x, y));
        }
    }
    out
}

/// Precomputed rays for one sensor radius.
#[derive(Clone, Debug)]
pub struct Sensor {
    range_m: f64,
    rays: Vec<Ray>,
}

#[derive(Clone, Debug)]
struct Ray {
    offset: (i32, i32),
    between: Vec<(i32, i32)>,
}

impl Sensor {
    pub fn new(range_m: f64, cell_size: f64) -> Self {
        let r = (range_m / cell_size).max(0.0);
        let r2 = r * r + 1e-9;
        let reach = r.floor() as i32;
        let mut rays = Vec::new();
        for dr in -reach..=reach {
            for dc in -reach..=reach {
                if f64::from(dc * dc + dr * dr) <= r2 {
                    rays.push(Ray {
                        offset: (dc, dr),
                        between: supercover_between(dc, dr),
                    });
                }
            }
        }
        Sensor { range_m, rays }
    }

    pub fn range_m(&self) -> f64 {
        self.range_m
    }

    /// Squares (with their truth) visible from `observer`.
    pub fn sense(&self, map: &GridMap, observer: Cell) -> Vec<(Cell, Occupancy)> {
        debug_assert_eq!(map.truth_at(observer), Occupancy::Free);
        let mut out = Vec::with_capacity(self.rays.len());
        for ray in &self.rays {
            let target = Cell::new(observer.col + ray.offset.0, observer.row + ray.offset.1);
            if !map.in_bounds(target) {
                continue;
            }
            let occluded = ray.between.iter().any(|&(dc, dr)| {
                let c = Cell::new(observer.col + dc, observer.row + dr);
                map.in_bounds(c) && map.truth_at(c) == Occupancy::Obstacle
            });
            if !occluded {
                out.push((target, map.truth_at(target)));
            }
        }
        out
    }

    /// Senses and merges into the map's knowledge. Returns the squares that
    /// were unknown before this call.
    pub fn sense_into(&self, map: &mut GridMap, observer: Cell) -> Vec<Cell> {
        let seen = self.sense(map, observer);
        let mut fresh = Vec::new();
        for (c, o) in seen {
            if map.known_at(c) == crate::grid::Knowledge::Unknown {
                fresh.push(c);
            }
            map.reveal(c, o);
        }
        fresh
    }
}

/// One-shot form of [`Sensor::sense`].
pub fn sense(map: &GridMap, observer: Cell, range_m: f64) -> Vec<(Cell, Occupancy)> {
    Sensor::new(range_m, map.cell_size()).sense(map, observer)
}

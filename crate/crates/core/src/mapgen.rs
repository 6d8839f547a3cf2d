//! Random obstacle maps.
//!
//! Density counts interior squares only: the border is never an obstacle,
//! so a 20×20 map at 10% samples `round(0.10 × 18 × 18) = 32` obstacles.
//! After sampling, every free region not 4-connected to the largest free
//! region is filled in, so the generated map always has exactly one free
//! component.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::MapError;
use crate::grid::{Cell, GridMap, Occupancy};
use crate::rng::rng_from;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapGenConfig {
    pub width: usize,
    pub height: usize,
    pub density: f64,
    pub seed: u64,
}

impl MapGenConfig {
    /// A 10 m square map of 0.5 m squares.
    pub fn standard(density: f64, seed: u64) -> Self {
        MapGenConfig {
            width: 20,
            height: 20,
            density,
            seed,
        }
    }

    pub fn interior_count(&self) -> usize {
        self.width.saturating_sub(2) * self.height.saturating_sub(2)
    }

    /// Obstacles placed before pocket filling.
    pub fn sampled_count(&self) -> usize {
        (self.density * self.interior_count() as f64).round() as usize
    }
}

/// Outcome of [`generate`], with the counts a manifest needs.
#[derive(Clone, Debug)]
pub struct GeneratedMap {
    pub map: GridMap,
    pub sampled_obstacles: usize,
    pub filled_squares: usize,
}

pub fn generate(cfg: &MapGenConfig) -> Result<GeneratedMap, MapError> {
    if cfg.width < 3 || cfg.height < 3 {
        return Err(MapError::Dimensions {
            width: cfg.width,
            height: cfg.height,
        });
    }
    if !(0.0..1.0).contains(&cfg.density) {
        return Err(MapError::Density(cfg.density));
    }
    let mut map = GridMap::empty(cfg.width, cfg.height);
    let interior: Vec<Cell> = map.cells().filter(|c| !map.is_border(*c)).collect();
    let k = cfg.sampled_count().min(interior.len());
    let mut rng = rng_from(cfg.seed);
    for i in index::sample(&mut rng, interior.len(), k).into_iter() {
        map.set_truth(interior[i], Occupancy::Obstacle);
    }
    let filled = fill_pockets(&mut map)?;
    Ok(GeneratedMap {
        map,
        sampled_obstacles: k,
        filled_squares: filled,
    })
}

/// Labels 4-connected free components; returns labels (usize::MAX for
/// obstacles) and component sizes.
fn components(map: &GridMap) -> (Vec<usize>, Vec<usize>) {
    let mut label = vec![usize::MAX; map.len()];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for start in 0..map.len() {
        if label[start] != usize::MAX || map.truth()[start] == Occupancy::Obstacle {
            continue;
        }
        let id = sizes.len();
        let mut size = 0;
        label[start] = id;
        stack.push(map.cell_at(start));
        while let Some(c) = stack.pop() {
            size += 1;
            for n in map.neighbors(c) {
                let i = map.index(n);
                if label[i] == usize::MAX && map.truth()[i] == Occupancy::Free {
                    label[i] = id;
                    stack.push(n);
                }
            }
        }
        sizes.push(size);
    }
    (label, sizes)
}

/// Converts every free square outside the largest free component (earliest
/// in row-major order on ties) into an obstacle. Returns the count filled.
pub fn fill_pockets(map: &mut GridMap) -> Result<usize, MapError> {
    let (label, sizes) = components(map);
    let keep = sizes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .ok_or(MapError::NoFreeSpace)?;
    let mut filled = 0;
    for (i, &l) in label.iter().enumerate() {
        if l != usize::MAX && l != keep {
            let c = map.cell_at(i);
            map.set_truth(c, Occupancy::Obstacle);
            filled += 1;
        }
    }
    Ok(filled)
}

use rayon::prelude::*;

use crate::error::{OscError, Result};
use crate::spectral::{Grid, SpectralField};

/// Smallest cube side, in grid cells, in the oscillation family.
pub const MIN_CUBE_CELLS: usize = 4;

/// Cube sides (in cells) of the family: `N, N/2, …, MIN_CUBE_CELLS`.
pub fn cube_sides(grid: &Grid) -> Vec<usize> {
    let mut sides = Vec::new();
    let mut s = grid.n();
    while s >= MIN_CUBE_CELLS {
        sides.push(s);
        s /= 2;
    }
    sides
}

fn cube_origins(grid: &Grid, side: usize, offset: usize) -> Vec<[usize; 3]> {
    let per_axis = grid.n() / side;
    let n = grid.n();
    let starts: Vec<usize> = (0..per_axis).map(|m| (offset + m * side) % n).collect();
    let mut out = Vec::new();
    match grid.dim() {
        2 => {
            for &a in &starts {
                for &b in &starts {
                    out.push([a, b, 0]);
                }
            }
        }
        _ => {
            for &a in &starts {
                for &b in &starts {
                    for &c in &starts {
                        out.push([a, b, c]);
                    }
                }
            }
        }
    }
    out
}

fn cube_points(grid: &Grid, origin: [usize; 3], side: usize) -> Vec<usize> {
    let n = grid.n();
    let mut pts = Vec::with_capacity(side.pow(grid.dim() as u32));
    let third = if grid.dim() == 3 { side } else { 1 };
    for a in 0..side {
        for b in 0..side {
            for c in 0..third {
                pts.push(grid.flat([
                    (origin[0] + a) % n,
                    (origin[1] + b) % n,
                    (origin[2] + c) % n,
                ]));
            }
        }
    }
    pts
}

/// Mean oscillation `(1/|Q|)∫_Q |f − f_Q|` over one cube.
pub fn cube_oscillation(values: &[Vec<f64>], points: &[usize]) -> f64 {
    let count = points.len() as f64;
    let means: Vec<f64> = values
        .iter()
        .map(|c| points.iter().map(|&i| c[i]).sum::<f64>() / count)
        .collect();
    points
        .iter()
        .map(|&i| {
            values
                .iter()
                .zip(&means)
                .map(|(c, m)| (c[i] - m).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .sum::<f64>()
        / count
}

/// Sup of the mean oscillation over family cubes whose side is at most
/// `max_side_cells` cells.
pub fn oscillation_sup(grid: &Grid, values: &[Vec<f64>], max_side_cells: usize) -> f64 {
    let mut jobs = Vec::new();
    for side in cube_sides(grid).into_iter().filter(|&s| s <= max_side_cells) {
        let offsets: Vec<usize> = if side == grid.n() {
            vec![0]
        } else {
            vec![0, side / 4, side / 2, 3 * side / 4]
        };
        for off in offsets {
            for origin in cube_origins(grid, side, off) {
                jobs.push((origin, side));
            }
        }
    }
    jobs.par_iter()
        .map(|&(origin, side)| cube_oscillation(values, &cube_points(grid, origin, side)))
        .reduce(|| 0.0, f64::max)
}

/// Largest family side (in cells) not exceeding one length unit; falls
/// back to the smallest family cube when the grid is too coarse.
pub fn local_side_cells(grid: &Grid) -> usize {
    let h = grid.spacing();
    cube_sides(grid)
        .into_iter()
        .filter(|&s| s as f64 * h <= 1.0 + 1e-12)
        .max()
        .unwrap_or(MIN_CUBE_CELLS)
}

/// Cell count of the unit-length cube used for the mean term of `bmo`.
pub fn unit_cube_cells(grid: &Grid) -> usize {
    ((1.0 / grid.spacing()).round() as usize).clamp(1, grid.n())
}

/// Periodic box average of width `w` cells along one axis.
fn box_filter_axis(grid: &Grid, data: &[f64], axis: usize, w: usize) -> Vec<f64> {
    let n = grid.n();
    let mut out = vec![0.0; data.len()];
    out.par_iter_mut().enumerate().for_each(|(i, o)| {
        let mut idx = grid.indices(i);
        let start = idx[axis];
        let mut acc = 0.0;
        for s in 0..w {
            idx[axis] = (start + s) % n;
            acc += data[grid.flat(idx)];
        }
        *o = acc / w as f64;
    });
    out
}

/// Sup over unit cubes anchored at every grid point of `|f_Q|`.
pub fn unit_mean_sup(grid: &Grid, values: &[Vec<f64>]) -> f64 {
    let w = unit_cube_cells(grid);
    let means: Vec<Vec<f64>> = values
        .iter()
        .map(|c| {
            let mut m = c.clone();
            for axis in 0..grid.dim() {
                m = box_filter_axis(grid, &m, axis, w);
            }
            m
        })
        .collect();
    (0..grid.len())
        .map(|i| means.iter().map(|m| m[i] * m[i]).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// `BMO` (global) or `bmo` (local) norm of real component samples.
pub fn bmo_of_values(grid: &Grid, values: &[Vec<f64>], local: bool) -> f64 {
    if local {
        oscillation_sup(grid, values, local_side_cells(grid)) + unit_mean_sup(grid, values)
    } else {
        oscillation_sup(grid, values, grid.n())
    }
}

pub fn bmo_norm(f: &SpectralField, local: bool) -> Result<f64> {
    if !f.is_real() {
        return Err(OscError::InvalidParameter(
            "bmo norms are defined for real-valued fields".into(),
        ));
    }
    Ok(bmo_of_values(f.grid(), &f.to_real_values(), local))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn brute_force(grid: &Grid, values: &[Vec<f64>]) -> f64 {
        // every grid-anchored cube of every family side
        let mut best = 0.0f64;
        for side in cube_sides(grid) {
            for i in 0..grid.len() {
                let idx = grid.indices(i);
                let pts = cube_points(grid, idx, side);
                best = best.max(cube_oscillation(values, &pts));
            }
        }
        best
    }

    #[test]
    fn constants() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let f = SpectralField::sample(g, 1, |_, _| -1.5);
        assert!(bmo_norm(&f, false).unwrap() < 1e-14);
        assert!((bmo_norm(&f, true).unwrap() - 1.5).abs() < 1e-13);
    }

    #[test]
    fn cosine_matches_full_scan_at_two_resolutions() {
        for n in [32, 64] {
            let g = Grid::new(2, n, 2.0 * PI).unwrap();
            let f = SpectralField::sample(g, 1, |x, _| x[0].cos());
            let fast = bmo_norm(&f, false).unwrap();
            let brute = brute_force(&g, &f.to_real_values());
            assert!(fast <= brute + 1e-14);
            assert!((fast - brute).abs() <= 0.01 * brute, "{fast} vs {brute}");
            // the whole-torus cube alone gives mean |cos| = 2/π
            assert!(fast >= 2.0 / PI - 5e-3, "{fast}");
        }
    }

    #[test]
    fn local_sup_covers_small_cube_part_of_global() {
        let g = Grid::new(2, 64, 2.0 * PI).unwrap();
        let f = SpectralField::sample(g, 1, |x, _| (3.0 * x[0]).sin() + x[1].cos());
        let vals = f.to_real_values();
        let small = oscillation_sup(&g, &vals, local_side_cells(&g));
        assert!(bmo_norm(&f, true).unwrap() >= small);
        assert!(bmo_norm(&f, false).unwrap() >= small);
    }

    #[test]
    fn unit_cube_width() {
        let g = Grid::new(2, 64, 8.0).unwrap();
        assert_eq!(unit_cube_cells(&g), 8);
        assert_eq!(local_side_cells(&g), 8);
    }

    #[test]
    fn complex_fields_rejected() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        assert!(bmo_norm(&SpectralField::zeros(g, 1, false), true).is_err());
    }
}

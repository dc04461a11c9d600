use crate::error::{param, Result};
use crate::grid::{dist, DomainMask, Grid, Point, Shift};

/// Cells by ascending distance to `center` until `round(volume / h^N)` are
/// taken; ties (to 1e-9 cells) go to the lower cell index.
pub fn ball_mask(grid: &Grid, center: &Point, volume: f64) -> Result<DomainMask> {
    let count = (volume / grid.cell_volume()).round();
    if !(count >= 1.0) {
        return Err(param("volume", format!("{volume} holds no cell")));
    }
    if count > grid.cell_count() as f64 {
        return Err(param(
            "volume",
            format!("{volume} exceeds the box volume {}", grid.cell_count() as f64 * grid.cell_volume()),
        ));
    }
    let h = grid.h();
    let mut order: Vec<(i64, usize)> = (0..grid.cell_count())
        .map(|i| (((dist(&grid.center(i), center) / h) * 1e9).round() as i64, i))
        .collect();
    order.sort_unstable();
    DomainMask::from_indices(*grid, order.into_iter().take(count as usize).map(|(_, i)| i))
}

/// Face-connected components, each sorted, ordered by smallest cell index.
pub fn components(mask: &DomainMask) -> Vec<Vec<usize>> {
    let g = mask.grid();
    let mut label = vec![usize::MAX; g.cell_count()];
    let mut out = Vec::new();
    for start in mask.active_indices() {
        if label[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut comp = vec![start];
        label[start] = id;
        let mut k = 0;
        while k < comp.len() {
            let c = comp[k];
            k += 1;
            for n in g.neighbors(c) {
                if mask.contains(n) && label[n] == usize::MAX {
                    label[n] = id;
                    comp.push(n);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Smallest center distance between a cell of `a` and a cell of `b`.
pub fn set_distance(grid: &Grid, a: &[usize], b: &[usize]) -> f64 {
    a.iter()
        .flat_map(|&i| b.iter().map(move |&j| grid.distance(i, j)))
        .fold(f64::INFINITY, f64::min)
}

/// Lattice shift moving the rounded centroid of the mask onto the middle cell.
pub fn centering_shift(mask: &DomainMask) -> Shift {
    let g = mask.grid();
    let cells = mask.active_indices();
    if cells.is_empty() {
        return [0, 0];
    }
    let mut shift = [0i64; 2];
    for (axis, s) in shift.iter_mut().enumerate().take(g.dim()) {
        let mean = cells.iter().map(|&i| g.coords(i)[axis] as f64).sum::<f64>() / cells.len() as f64;
        *s = (g.resolution() / 2) as i64 - mean.round() as i64;
    }
    shift
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_extremes() {
        let g = Grid::new(2, 2.0, 16).unwrap();
        let one = ball_mask(&g, &[0.1, 0.1], g.cell_volume()).unwrap();
        assert_eq!(one.count(), 1);
        assert!(one.contains(g.locate(&[0.1, 0.1])));
        let all = ball_mask(&g, &[0.0, 0.0], 16.0).unwrap();
        assert_eq!(all.count(), 256);
        assert!(ball_mask(&g, &[0.0, 0.0], 17.0).is_err());
    }

    #[test]
    fn components_of_1d_mask() {
        let g = Grid::new(1, 4.0, 16).unwrap();
        let m = DomainMask::from_indices(g, [1, 2, 3, 7, 10, 11]).unwrap();
        assert_eq!(components(&m), vec![vec![1, 2, 3], vec![7], vec![10, 11]]);
        assert_eq!(set_distance(&g, &[1, 2, 3], &[7]), 4.0 * g.h());
    }
}

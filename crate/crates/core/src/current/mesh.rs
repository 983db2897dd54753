use nalgebra::DMatrix;

use super::chain::TriangulatedCurrent;
use crate::error::{Error, Result};

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(k - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, k - 1);
            out.push(p);
        }
    }
    out
}

fn orientation(points: &[Vec<f64>]) -> f64 {
    let k = points.len() - 1;
    DMatrix::from_fn(k, k, |i, j| points[j + 1][i] - points[0][i]).determinant()
}

/// Kuhn triangulation of `[lo, hi]^k` with `divisions` cells per axis (k! simplices per
/// cell), every simplex positively oriented, after applying `map` to the vertices.
fn kuhn<F: Fn(&[f64]) -> Vec<f64>>(k: usize, divisions: usize, lo: f64, hi: f64, map: F) -> Result<TriangulatedCurrent> {
    if k == 0 || divisions == 0 {
        return Err(Error::InvalidArgument("need k >= 1 and at least one division".into()));
    }
    let h = (hi - lo) / divisions as f64;
    let coord = |i: usize| if i == divisions { hi } else { lo + h * i as f64 };
    let perms = permutations(k);
    let mut current = TriangulatedCurrent::new(k, k)?;
    let cells = divisions.pow(k as u32);
    for cell in 0..cells {
        let mut corner = vec![0usize; k];
        let mut rest = cell;
        for c in corner.iter_mut() {
            *c = rest % divisions;
            rest /= divisions;
        }
        for perm in &perms {
            let mut idx = corner.clone();
            let mut points = vec![map(&idx.iter().map(|i| coord(*i)).collect::<Vec<_>>())];
            for axis in perm {
                idx[*axis] += 1;
                points.push(map(&idx.iter().map(|i| coord(*i)).collect::<Vec<_>>()));
            }
            if orientation(&points) < 0.0 {
                points.swap(0, 1);
            }
            current.add_simplex(&points, 1)?;
        }
    }
    Ok(current)
}

/// Positively oriented triangulation of `[-half, half]^k`.
pub fn cube_mesh(k: usize, divisions: usize, half: f64) -> Result<TriangulatedCurrent> {
    kuhn(k, divisions, -half, half, |p| p.to_vec())
}

/// The unit square `[0, 1]^2` in `2 d^2` triangles. `flip` selects the other diagonal.
pub fn square_mesh(divisions: usize, flip: bool) -> Result<TriangulatedCurrent> {
    if !flip {
        return kuhn(2, divisions, 0.0, 1.0, |p| p.to_vec());
    }
    kuhn(2, divisions, 0.0, 1.0, |p| vec![1.0 - p[0], p[1]])
}

/// The unit k-ball: the cube triangulation pushed through `p -> p |p|_inf / |p|_2`,
/// positively oriented. Boundary vertices lie exactly on the unit sphere up to rounding.
pub fn ball_mesh(k: usize, divisions: usize) -> Result<TriangulatedCurrent> {
    kuhn(k, divisions, -1.0, 1.0, |p| {
        let two = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        if two == 0.0 {
            return p.to_vec();
        }
        let inf = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        p.iter().map(|v| v * inf / two).collect()
    })
}

/// Graphical perturbation `p -> p + eps (1 - |P p|^2)^2 normal` for `|P p| < 1`, where
/// `P` is the orthogonal projection onto the orthonormal columns of `plane`. Vertices
/// with `|P p| >= 1` (up to 1e-12) are left in place.
pub fn bump_perturbation(current: &TriangulatedCurrent, plane: &DMatrix<f64>, normal: &[f64], eps: f64) -> Result<TriangulatedCurrent> {
    let dim = current.ambient_dim();
    if plane.nrows() != dim || normal.len() != dim {
        return Err(Error::DimensionMismatch { left: dim, right: plane.nrows().max(normal.len()) });
    }
    current.map_vertices(dim, |p| {
        let r2: f64 = plane.column_iter().map(|c| c.iter().zip(p).map(|(a, b)| a * b).sum::<f64>().powi(2)).sum();
        if r2 >= 1.0 - 1e-12 {
            return p.to_vec();
        }
        let bump = eps * (1.0 - r2).powi(2);
        p.iter().zip(normal).map(|(a, b)| a + bump * b).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_triangulations_of_the_square_agree() {
        let a = square_mesh(1, false).unwrap();
        let b = square_mesh(1, true).unwrap();
        assert_eq!(a.len(), 2);
        assert!((a.mass() - 1.0).abs() < 1e-12);
        assert!((a.mass() - b.mass()).abs() < 1e-12);
        assert!((square_mesh(7, false).unwrap().mass() - square_mesh(5, true).unwrap().mass()).abs() < 1e-12);
        let boundary = square_mesh(4, false).unwrap().boundary().unwrap();
        assert_eq!(boundary.len(), 16);
    }

    #[test]
    fn ball_meshes_are_oriented_and_closed_up() {
        for k in 1..=3 {
            let ball = ball_mesh(k, 4).unwrap();
            for s in ball.simplices() {
                let pts: Vec<Vec<f64>> = s.vertices.iter().map(|v| ball.vertices()[*v].clone()).collect();
                assert!(orientation(&pts) > 0.0);
            }
            let b = ball.boundary().unwrap();
            if k > 1 {
                assert!(b.boundary().unwrap().is_zero_chain());
            }
            for s in b.simplices() {
                for v in &s.vertices {
                    let r: f64 = b.vertices()[*v].iter().map(|x| x * x).sum::<f64>().sqrt();
                    assert!((r - 1.0).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn bump_keeps_the_boundary() {
        let disk = ball_mesh(2, 6).unwrap().embed(&DMatrix::from_fn(3, 2, |i, j| f64::from(i == j)), None).unwrap();
        let plane = DMatrix::from_fn(3, 2, |i, j| f64::from(i == j));
        let bumped = bump_perturbation(&disk, &plane, &[0.0, 0.0, 1.0], 0.1).unwrap();
        assert!(bumped.mass() > disk.mass());
        assert_eq!(disk.boundary().unwrap().geometric_signature(), bumped.boundary().unwrap().geometric_signature());
    }
}

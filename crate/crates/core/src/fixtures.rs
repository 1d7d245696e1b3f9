//! Small named configurations used by tests, benches and the shipped
//! `fixtures/` directory.

use crate::geom::PointConfig;

fn build(dim: usize, rows: &[Vec<i64>]) -> PointConfig {
    let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
    PointConfig::from_ints(dim, &refs).expect("fixture is a valid configuration")
}

/// Unit square, corners in cyclic order.
pub fn square() -> PointConfig {
    build(2, &[vec![0, 0], vec![1, 0], vec![1, 1], vec![0, 1]])
}

/// Convex `n`-gon on the parabola `y = x²`, vertices in cyclic order.
pub fn ngon(n: usize) -> PointConfig {
    let rows: Vec<Vec<i64>> = (0..n as i64).map(|i| vec![i, i * i]).collect();
    build(2, &rows)
}

pub fn hexagon() -> PointConfig {
    ngon(6)
}

/// The trapezoid `(0,0), (2,0), (1,1), (0,1)`.
pub fn trapezoid() -> PointConfig {
    build(2, &[vec![0, 0], vec![2, 0], vec![1, 1], vec![0, 1]])
}

/// Unit 3-cube; vertex `i` has coordinates given by the bits of `i`.
pub fn cube() -> PointConfig {
    let rows: Vec<Vec<i64>> = (0..8).map(|m| vec![m & 1, (m >> 1) & 1, (m >> 2) & 1]).collect();
    build(3, &rows)
}

/// Triangular bipyramid: apexes 0, 1 and equatorial triangle 2, 3, 4.
pub fn bipyramid() -> PointConfig {
    build(3, &[vec![0, 0, 1], vec![0, 0, -1], vec![1, 0, 0], vec![0, 1, 0], vec![-1, -1, 0]])
}

/// Outer triangle with a homothetic inner triangle; its twisted
/// triangulation is the classical non-regular example.
pub fn mother() -> PointConfig {
    build(2, &[vec![0, 0], vec![12, 0], vec![6, 12], vec![3, 2], vec![9, 2], vec![6, 8]])
}

/// Cyclic polytope: `n` points on the moment curve in dimension `dim`.
pub fn cyclic(n: usize, dim: usize) -> PointConfig {
    let rows: Vec<Vec<i64>> = (0..n as i64).map(|t| (1..=dim as u32).map(|k| t.pow(k)).collect()).collect();
    build(dim, &rows)
}

/// All nine lattice points of `[-1,1]²`; the origin has index 4.
pub fn lattice_square() -> PointConfig {
    let rows: Vec<Vec<i64>> = (-1..=1).flat_map(|x| (-1..=1).map(move |y| vec![x, y])).collect();
    build(2, &rows)
}

/// Vertices of the 3D cross-polytope.
pub fn octahedron_vertices() -> PointConfig {
    build(3, &[vec![1, 0, 0], vec![-1, 0, 0], vec![0, 1, 0], vec![0, -1, 0], vec![0, 0, 1], vec![0, 0, -1]])
}

/// Vertices of a reflexive square pyramid with six lattice points.
pub fn square_pyramid_vertices() -> PointConfig {
    build(3, &[vec![0, 0, -1], vec![1, 0, -1], vec![0, 1, -1], vec![1, 1, -1], vec![-1, -1, 2]])
}

/// Named fixtures shipped as `.poly` files.
pub fn all() -> Vec<(&'static str, PointConfig)> {
    let mut out = vec![
        ("square", square()),
        ("trapezoid", trapezoid()),
        ("cube", cube()),
        ("bipyramid", bipyramid()),
        ("mother", mother()),
        ("cyclic_7_4", cyclic(7, 4)),
        ("lattice_square", lattice_square()),
        ("octahedron", octahedron_vertices()),
        ("square_pyramid", square_pyramid_vertices()),
    ];
    for n in 4..=9 {
        let name: &'static str = ["gon4", "gon5", "hexagon", "gon7", "gon8", "gon9"][n - 4];
        out.push((name, ngon(n)));
    }
    out
}

//! Finite-difference Oseen-type saddle system on the unit square.
//!
//! Velocity lives on the interior nodes of a fine grid with `2 g` intervals
//! per side (homogeneous Dirichlet boundary), pressure on the nodes of a
//! coarse grid with `g` intervals. The leading block is, per velocity
//! component, `nu L + N(w)` with `L` the 5-point negative Laplacian and `N`
//! central-difference convection by a constant wind. `N` is skew-symmetric on
//! the Dirichlet interior, so the symmetric part of `M` is `nu L` and `M` is
//! positive definite.
//!
//! `A` is the central-difference gradient of the bilinear interpolant of the
//! coarse pressure, evaluated at the fine velocity nodes. Its kernel is the
//! constant pressure mode, removed by dropping the last coarse node.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{random_unit_vector, ProblemKind, ProblemSpec, SaddleSystem};
use crate::error::{Error, Result};
use crate::linalg::SparseMatrixCSR;

/// Sizes `(m, n)` produced for a coarse grid of `g` intervals.
pub fn oseen_dims(grid: usize) -> (usize, usize) {
    let fine_interior = 2 * grid - 1;
    (2 * fine_interior * fine_interior, (grid + 1) * (grid + 1) - 1)
}

pub fn gen_oseen_fd(spec: &ProblemSpec) -> Result<SaddleSystem> {
    if spec.kind != ProblemKind::OseenFd {
        return Err(Error::InvalidProblem("expected an oseen spec".into()));
    }
    spec.check()?;
    let g = spec.grid;
    let nf = 2 * g; // fine intervals
    let ni = nf - 1; // fine interior nodes per side
    let h = 1.0 / nf as f64;
    let block = ni * ni;
    let (m, n) = oseen_dims(g);
    let node = |i: usize, j: usize| (j - 1) * ni + (i - 1);

    let diff = spec.nu / (h * h);
    let [wx, wy] = spec.wind;
    let cx = wx / (2.0 * h);
    let cy = wy / (2.0 * h);
    let mut trips = Vec::with_capacity(2 * block * 5);
    for comp in 0..2 {
        let off = comp * block;
        for j in 1..nf {
            for i in 1..nf {
                let row = off + node(i, j);
                trips.push((row, row, 4.0 * diff));
                let mut couple = |ii: usize, jj: usize, conv: f64| {
                    if (1..nf).contains(&ii) && (1..nf).contains(&jj) {
                        let col = off + node(ii, jj);
                        trips.push((row, col, -diff));
                        if conv != 0.0 {
                            trips.push((row, col, conv));
                        }
                    }
                };
                couple(i + 1, j, cx);
                couple(i - 1, j, -cx);
                couple(i, j + 1, cy);
                couple(i, j - 1, -cy);
            }
        }
    }
    let mmat = SparseMatrixCSR::from_triplets(m, m, &trips)?;

    // bilinear interpolation weights from the coarse grid along one axis
    let interp = |f: usize| -> Vec<(usize, f64)> {
        if f % 2 == 0 {
            vec![(f / 2, 1.0)]
        } else {
            vec![((f - 1) / 2, 0.5), ((f + 1) / 2, 0.5)]
        }
    };
    let coarse = |ci: usize, cj: usize| cj * (g + 1) + ci;
    let dropped = (g + 1) * (g + 1) - 1;
    let inv2h = 1.0 / (2.0 * h);
    let mut a_trips = Vec::new();
    for j in 1..nf {
        for i in 1..nf {
            let rx = node(i, j);
            let ry = block + node(i, j);
            // d/dx: p(i+1, j) - p(i-1, j)
            for (fi, sign) in [(i + 1, 1.0), (i - 1, -1.0)] {
                for (ci, wi) in interp(fi) {
                    for (cj, wj) in interp(j) {
                        a_trips.push((rx, coarse(ci, cj), sign * wi * wj * inv2h));
                    }
                }
            }
            for (fj, sign) in [(j + 1, 1.0), (j - 1, -1.0)] {
                for (ci, wi) in interp(i) {
                    for (cj, wj) in interp(fj) {
                        a_trips.push((ry, coarse(ci, cj), sign * wi * wj * inv2h));
                    }
                }
            }
        }
    }
    a_trips.retain(|&(_, c, _)| c != dropped);
    let amat = drop_zeros(SparseMatrixCSR::from_triplets(m, n, &a_trips)?)?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let b = random_unit_vector(&mut rng, n);
    SaddleSystem::new(mmat, amat, b)
}

/// Removes entries that cancelled to exactly zero during assembly.
fn drop_zeros(a: SparseMatrixCSR) -> Result<SparseMatrixCSR> {
    let trips: Vec<_> = a.triplets().into_iter().filter(|t| t.2 != 0.0).collect();
    SparseMatrixCSR::from_triplets(a.nrows(), a.ncols(), &trips)
}

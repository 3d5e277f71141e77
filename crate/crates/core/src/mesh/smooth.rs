use super::curvature::mean_and_gaussian;
use super::{MeshError, TriangleMesh};
use crate::geom::{cotan_stiffness, lumped_mass, Vec3};
use crate::sparse::{SpdSolver, Triplets};

pub const SMOOTH_TIME_STEP: f64 = 1e-3;
pub const SMOOTH_MAX_ITERS: usize = 200;
const CURVATURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Default)]
pub struct SmoothReport {
    /// Vertices that were craters before smoothing.
    pub flagged: Vec<usize>,
    pub iterations: usize,
}

/// Vertices with negative mean and positive Gaussian curvature.
pub fn crater_vertices(mesh: &TriangleMesh) -> Result<Vec<usize>, MeshError> {
    let (k, h, _) = mean_and_gaussian(mesh)?;
    Ok((0..mesh.n_vertices())
        .filter(|&v| h[v] < -CURVATURE_TOL && k[v] > CURVATURE_TOL)
        .collect())
}

/// Localized conformal mean-curvature flow over crater regions dilated by one ring,
/// repeated until no craters remain and every initially flagged vertex has `H >= 0`.
/// A pressure term pulls the region toward the mean curvature of its surroundings.
/// The result is re-normalized to the input area.
pub fn smooth_craters(mesh: &TriangleMesh) -> Result<(TriangleMesh, SmoothReport), MeshError> {
    let flagged = crater_vertices(mesh)?;
    if flagged.is_empty() {
        return Ok((mesh.clone(), SmoothReport::default()));
    }
    let n = mesh.n_vertices();
    let target_area = mesh.area();
    let stiffness = cotan_stiffness(mesh.positions(), mesh.faces());
    let mut in_mask = vec![false; n];
    let mut craters = flagged.clone();
    let mut current = mesh.clone();
    let mut iterations = 0;
    while !craters.is_empty() {
        if iterations == SMOOTH_MAX_ITERS {
            return Err(MeshError::NotConverged {
                iterations,
                remaining: craters.len(),
            });
        }
        for &v in &craters {
            in_mask[v] = true;
            for u in current.neighbors(v) {
                in_mask[u] = true;
            }
        }
        let pressure = ring_mean_curvature(&current, &in_mask)?;
        let positions = flow_step(&current, &stiffness, &in_mask, pressure)?;
        current = current.with_positions(positions);
        iterations += 1;
        craters = crater_vertices(&current)?;
        let (_, h, _) = mean_and_gaussian(&current)?;
        // Flagged vertices keep flowing until they are no longer concave.
        for &v in &flagged {
            if h[v] < -CURVATURE_TOL && !craters.contains(&v) {
                craters.push(v);
            }
        }
        log::debug!(
            "crater smoothing step {iterations}: {} active",
            craters.len()
        );
    }
    let s = (target_area / current.area()).sqrt();
    let rescaled: Vec<Vec3> = current.positions().iter().map(|p| p * s).collect();
    let out = mesh.with_positions(rescaled);
    log::info!(
        "crater smoothing: {} flagged vertices, {} iterations",
        flagged.len(),
        iterations
    );
    Ok((
        out,
        SmoothReport {
            flagged,
            iterations,
        },
    ))
}

/// Mean curvature averaged over the fixed vertices next to the mask, at least 0.
fn ring_mean_curvature(mesh: &TriangleMesh, mask: &[bool]) -> Result<f64, MeshError> {
    let (_, h, _) = mean_and_gaussian(mesh)?;
    let ring: Vec<usize> = (0..mesh.n_vertices())
        .filter(|&v| !mask[v] && mesh.neighbors(v).iter().any(|&u| mask[u]))
        .collect();
    if ring.is_empty() {
        return Ok(0.0);
    }
    Ok((ring.iter().map(|&v| h[v]).sum::<f64>() / ring.len() as f64).max(0.0))
}

/// One implicit step `(M + tau L0)[S,S] x_S = M_S (x_S + 2 tau h0 n_S) - tau L0[S,~S] x_~S`.
/// The `h0` term is a pressure whose equilibrium has mean curvature `h0` instead of 0.
fn flow_step(
    mesh: &TriangleMesh,
    stiffness: &Triplets,
    mask: &[bool],
    h0: f64,
) -> Result<Vec<Vec3>, MeshError> {
    let n = mesh.n_vertices();
    let mass = lumped_mass(mesh.positions(), mesh.faces());
    let normals = mesh.vertex_normals();
    let mut index = vec![None; n];
    let mut free = Vec::new();
    for v in 0..n {
        if mask[v] {
            index[v] = Some(free.len());
            free.push(v);
        }
    }
    let k = free.len();
    let mut a = Triplets::new(k, k);
    let mut rhs = vec![vec![0.0; k]; 3];
    for (r, &v) in free.iter().enumerate() {
        a.push(r, r, mass[v]);
        let p = mesh.positions()[v] + normals[v] * (2.0 * SMOOTH_TIME_STEP * h0);
        for d in 0..3 {
            rhs[d][r] = mass[v] * p[d];
        }
    }
    for &(i, j, w) in stiffness.entries() {
        let Some(r) = index[i] else { continue };
        match index[j] {
            Some(c) => a.push(r, c, SMOOTH_TIME_STEP * w),
            None => {
                let p = mesh.positions()[j];
                for d in 0..3 {
                    rhs[d][r] -= SMOOTH_TIME_STEP * w * p[d];
                }
            }
        }
    }
    let solver = SpdSolver::factor(&a)?;
    let xs = solver.solve_columns(&rhs)?;
    let mut out = mesh.positions().to_vec();
    for (r, &v) in free.iter().enumerate() {
        out[v] = Vec3::new(xs[0][r], xs[1][r], xs[2][r]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::primitives;
    use super::*;

    #[test]
    fn crater_free_sphere_is_untouched() {
        let m = primitives::icosphere(3, 1.0).normalize_area();
        let (out, report) = smooth_craters(&m).unwrap();
        assert_eq!(report.iterations, 0);
        for (a, b) in m.positions().iter().zip(out.positions()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn dimple_is_pushed_out() {
        let m = primitives::dimpled_sphere(3).normalize_area();
        let (out, report) = smooth_craters(&m).unwrap();
        assert!(!report.flagged.is_empty());
        let (_, h, _) = mean_and_gaussian(&out).unwrap();
        assert!(report.flagged.iter().all(|&v| h[v] >= 0.0));
        assert!(crater_vertices(&out).unwrap().is_empty());
        assert!((out.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn torus_has_no_craters() {
        let m = primitives::torus(1.0, 0.4, 48, 24).normalize_area();
        assert!(crater_vertices(&m).unwrap().is_empty());
    }
}

use std::collections::BTreeSet;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, SymmetricEigen};

use super::{MeshError, TriangleMesh};
use crate::geom::{angle_at, cot_at, Vec3};

/// Per-vertex curvature quantities. Signs follow the outward normal: convex is positive.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    pub gaussian: Vec<f64>,
    pub mean: Vec<f64>,
    /// Mixed Voronoi area of each vertex.
    pub vertex_area: Vec<f64>,
    /// Principal curvature of largest magnitude and its unit direction.
    pub k_max: Vec<f64>,
    pub dir_max: Vec<Vec3>,
    pub k_min: Vec<f64>,
    pub dir_min: Vec<Vec3>,
    /// Second fundamental form as a tangent-plane tensor in ambient coordinates.
    pub shape: Vec<Matrix3<f64>>,
    pub normals: Vec<Vec3>,
}

impl CurvatureField {
    /// Normal curvature of vertex `v` along tangent direction `t` (need not be unit).
    pub fn normal_curvature(&self, v: usize, t: &Vec3) -> f64 {
        let n = self.normals[v];
        let tt = t - n * n.dot(t);
        let len2 = tt.norm_squared();
        if len2 <= f64::MIN_POSITIVE {
            return 0.0;
        }
        (tt.transpose() * self.shape[v] * tt)[(0, 0)] / len2
    }

    /// Integral of the Gaussian curvature.
    pub fn total_gaussian(&self) -> f64 {
        self.gaussian
            .iter()
            .zip(&self.vertex_area)
            .map(|(k, a)| k * a)
            .sum()
    }
}

/// Per-vertex Gaussian curvature, signed mean curvature and mixed area.
pub type VertexCurvatures = (Vec<f64>, Vec<f64>, Vec<f64>);

/// Gaussian curvature, signed mean curvature and mixed vertex area.
pub fn mean_and_gaussian(mesh: &TriangleMesh) -> Result<VertexCurvatures, MeshError> {
    let n = mesh.n_vertices();
    let pos = mesh.positions();
    let normals = mesh.vertex_normals();

    let mut area = vec![0.0; n];
    let mut angle_sum = vec![0.0; n];
    let mut hn = vec![Vec3::zeros(); n];
    for tri in mesh.faces() {
        let p = [pos[tri[0]], pos[tri[1]], pos[tri[2]]];
        let face_area = 0.5 * (p[1] - p[0]).cross(&(p[2] - p[0])).norm();
        let ang = [
            angle_at(&p[0], &p[1], &p[2]),
            angle_at(&p[1], &p[2], &p[0]),
            angle_at(&p[2], &p[0], &p[1]),
        ];
        let obtuse = ang.iter().position(|&a| a > PI / 2.0);
        for k in 0..3 {
            let (i, j, l) = (k, (k + 1) % 3, (k + 2) % 3);
            angle_sum[tri[i]] += ang[i];
            let a = match obtuse {
                None => {
                    let cj = cot_at(&p[j], &p[l], &p[i]);
                    let cl = cot_at(&p[l], &p[i], &p[j]);
                    ((p[i] - p[l]).norm_squared() * cj + (p[i] - p[j]).norm_squared() * cl) / 8.0
                }
                Some(o) if o == i => face_area / 2.0,
                Some(_) => face_area / 4.0,
            };
            area[tri[i]] += a;
            // Edge j-l is opposite corner i.
            let w = cot_at(&p[i], &p[j], &p[l]);
            hn[tri[j]] += (p[j] - p[l]) * w;
            hn[tri[l]] += (p[l] - p[j]) * w;
        }
    }

    let mut gaussian = vec![0.0; n];
    let mut mean = vec![0.0; n];
    for v in 0..n {
        if !(area[v] > 0.0) || mesh.neighbors(v).len() < 3 {
            return Err(MeshError::DegenerateStar(v));
        }
        gaussian[v] = (2.0 * PI - angle_sum[v]) / area[v];
        mean[v] = hn[v].dot(&normals[v]) / (4.0 * area[v]);
    }
    Ok((gaussian, mean, area))
}

pub fn compute_curvatures(mesh: &TriangleMesh) -> Result<CurvatureField, MeshError> {
    let n = mesh.n_vertices();
    let pos = mesh.positions();
    let normals = mesh.vertex_normals();
    let (gaussian, mean, area) = mean_and_gaussian(mesh)?;

    let mut k_max = vec![0.0; n];
    let mut k_min = vec![0.0; n];
    let mut dir_max = vec![Vec3::zeros(); n];
    let mut dir_min = vec![Vec3::zeros(); n];
    let mut shape = vec![Matrix3::zeros(); n];
    for v in 0..n {
        let (e1, e2) = tangent_frame(&normals[v]);
        let ring = two_ring(mesh, v);
        let ii = fit_quadric(pos, v, &ring, &normals[v], &e1, &e2)
            .ok_or(MeshError::DegenerateStar(v))?;
        let eig = SymmetricEigen::new(ii);
        let (mut a, mut b) = (0, 1);
        if eig.eigenvalues[1].abs() > eig.eigenvalues[0].abs() {
            std::mem::swap(&mut a, &mut b);
        }
        let to3 = |c: nalgebra::Vector2<f64>| (e1 * c[0] + e2 * c[1]).normalize();
        k_max[v] = eig.eigenvalues[a];
        k_min[v] = eig.eigenvalues[b];
        dir_max[v] = to3(eig.eigenvectors.column(a).into_owned());
        dir_min[v] = to3(eig.eigenvectors.column(b).into_owned());
        shape[v] = dir_max[v] * dir_max[v].transpose() * k_max[v]
            + dir_min[v] * dir_min[v].transpose() * k_min[v];
    }

    Ok(CurvatureField {
        gaussian,
        mean,
        vertex_area: area,
        k_max,
        dir_max,
        k_min,
        dir_min,
        shape,
        normals,
    })
}

fn tangent_frame(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.9 {
        Vec3::x()
    } else {
        Vec3::y()
    };
    let e1 = n.cross(&helper).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}

fn two_ring(mesh: &TriangleMesh, v: usize) -> Vec<usize> {
    let mut set = BTreeSet::new();
    for a in mesh.neighbors(v) {
        set.insert(a);
        for b in mesh.neighbors(a) {
            set.insert(b);
        }
    }
    set.remove(&v);
    set.into_iter().collect()
}

/// Fits `w = a u^2 + b uv + c v^2 + d u + e v` in the tangent frame and returns II.
fn fit_quadric(
    pos: &[Vec3],
    v: usize,
    ring: &[usize],
    n: &Vec3,
    e1: &Vec3,
    e2: &Vec3,
) -> Option<Matrix2<f64>> {
    if ring.len() < 5 {
        return None;
    }
    let m = ring.len();
    let mut a = DMatrix::zeros(m, 5);
    let mut rhs = DVector::zeros(m);
    let mut scale = 0.0f64;
    for &q in ring {
        scale = scale.max((pos[q] - pos[v]).norm());
    }
    if !(scale > 0.0) {
        return None;
    }
    for (r, &q) in ring.iter().enumerate() {
        let d = (pos[q] - pos[v]) / scale;
        let (u, vv, w) = (d.dot(e1), d.dot(e2), d.dot(n));
        a[(r, 0)] = u * u;
        a[(r, 1)] = u * vv;
        a[(r, 2)] = vv * vv;
        a[(r, 3)] = u;
        a[(r, 4)] = vv;
        rhs[r] = w;
    }
    let coef = a.svd(true, true).solve(&rhs, 1e-12).ok()?;
    // Rescale from unit-scaled coordinates back to model units.
    let (qa, qb, qc) = (coef[0] / scale, coef[1] / scale, coef[2] / scale);
    let (gu, gv) = (coef[3], coef[4]);
    let norm = (1.0 + gu * gu + gv * gv).sqrt();
    let first = Matrix2::new(1.0 + gu * gu, gu * gv, gu * gv, 1.0 + gv * gv);
    let second = -Matrix2::new(2.0 * qa, qb, qb, 2.0 * qc) / norm;
    // Shape operator I^-1 II, symmetrized in the orthonormal tangent basis.
    let s = first.try_inverse()? * second;
    Some((s + s.transpose()) * 0.5)
}

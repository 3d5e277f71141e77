//! Small triangle-geometry helpers shared by the mesh, patch and field code.

use nalgebra::Vector3;

use crate::sparse::Triplets;

pub type Vec3 = Vector3<f64>;

pub fn tri_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// Unit normal, or zero for a degenerate triangle.
pub fn tri_normal(a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let n = (b - a).cross(&(c - a));
    let len = n.norm();
    if len > 0.0 {
        n / len
    } else {
        Vec3::zeros()
    }
}

/// Cotangent of the angle at `o` in triangle (o, a, b).
pub fn cot_at(o: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let u = a - o;
    let v = b - o;
    let cross = u.cross(&v).norm();
    if cross <= f64::MIN_POSITIVE {
        return 0.0;
    }
    u.dot(&v) / cross
}

pub fn angle_at(o: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let u = a - o;
    let v = b - o;
    u.cross(&v).norm().atan2(u.dot(&v))
}

/// Gradient basis of a linear function on a triangle: `grad = sum_i value_i * basis[i]`.
pub fn gradient_basis(p: [&Vec3; 3]) -> Option<[Vec3; 3]> {
    let n = (p[1] - p[0]).cross(&(p[2] - p[0]));
    let double_area = n.norm();
    if double_area <= f64::MIN_POSITIVE {
        return None;
    }
    let n = n / double_area;
    let mut out = [Vec3::zeros(); 3];
    for i in 0..3 {
        let e = p[(i + 2) % 3] - p[(i + 1) % 3];
        out[i] = n.cross(&e) / double_area;
    }
    Some(out)
}

/// Positive semi-definite cotangent stiffness matrix (`L_ii = sum w_ij`, `L_ij = -w_ij`).
pub fn cotan_stiffness(positions: &[Vec3], faces: &[[usize; 3]]) -> Triplets {
    let n = positions.len();
    let mut t = Triplets::new(n, n);
    for tri in faces {
        for k in 0..3 {
            let o = tri[k];
            let a = tri[(k + 1) % 3];
            let b = tri[(k + 2) % 3];
            let w = 0.5 * cot_at(&positions[o], &positions[a], &positions[b]);
            t.push(a, a, w);
            t.push(b, b, w);
            t.push(a, b, -w);
            t.push(b, a, -w);
        }
    }
    t
}

/// Barycentric lumped mass (one third of incident face areas).
pub fn lumped_mass(positions: &[Vec3], faces: &[[usize; 3]]) -> Vec<f64> {
    let mut m = vec![0.0; positions.len()];
    for tri in faces {
        let a = tri_area(&positions[tri[0]], &positions[tri[1]], &positions[tri[2]]) / 3.0;
        for &v in tri {
            m[v] += a;
        }
    }
    m
}

pub fn total_area(positions: &[Vec3], faces: &[[usize; 3]]) -> f64 {
    faces
        .iter()
        .map(|t| tri_area(&positions[t[0]], &positions[t[1]], &positions[t[2]]))
        .sum()
}

/// Per-face gradient of a piecewise-linear vertex function.
pub fn face_gradients(positions: &[Vec3], faces: &[[usize; 3]], values: &[f64]) -> Vec<Vec3> {
    faces
        .iter()
        .map(
            |t| match gradient_basis([&positions[t[0]], &positions[t[1]], &positions[t[2]]]) {
                Some(b) => b[0] * values[t[0]] + b[1] * values[t[1]] + b[2] * values[t[2]],
                None => Vec3::zeros(),
            },
        )
        .collect()
}

/// Barycentric coordinates of `p` projected onto the plane of (a, b, c).
pub fn barycentric(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> [f64; 3] {
    let v0 = b - a;
    let v1 = c - a;
    let v2 = p - a;
    let d00 = v0.dot(&v0);
    let d01 = v0.dot(&v1);
    let d11 = v1.dot(&v1);
    let d20 = v2.dot(&v0);
    let d21 = v2.dot(&v1);
    let denom = d00 * d11 - d01 * d01;
    if denom.abs() <= f64::MIN_POSITIVE {
        return [1.0, 0.0, 0.0];
    }
    let v = (d11 * d20 - d01 * d21) / denom;
    let w = (d00 * d21 - d01 * d20) / denom;
    [1.0 - v - w, v, w]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_of_linear_function_is_exact() {
        let p = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 2.0, 0.0),
        ];
        let b = gradient_basis([&p[0], &p[1], &p[2]]).unwrap();
        // f = 3x - y
        let vals = [0.0, 3.0, -2.0];
        let g = b[0] * vals[0] + b[1] * vals[1] + b[2] * vals[2];
        assert!((g - Vec3::new(3.0, -1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn barycentric_round_trip() {
        let a = Vec3::new(0.0, 0.0, 1.0);
        let b = Vec3::new(1.0, 0.0, 1.0);
        let c = Vec3::new(0.0, 1.0, 1.0);
        let p = a * 0.2 + b * 0.5 + c * 0.3;
        let w = barycentric(&p, &a, &b, &c);
        assert!((w[0] - 0.2).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn right_angle_has_zero_cotangent() {
        let o = Vec3::zeros();
        assert!(cot_at(&o, &Vec3::x(), &Vec3::y()).abs() < 1e-15);
        assert!((angle_at(&o, &Vec3::x(), &Vec3::y()) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }
}

//! Heat-method geodesic distance from a seed vertex, time-step tuning and
//! critical-point classification of piecewise-linear fields.

use crate::geom::{cotan_stiffness, gradient_basis, lumped_mass, tri_area, Vec3};
use crate::mesh::TriangleMesh;
use crate::sparse::{SolveError, SpdSolver, Triplets};

pub const MAX_DOUBLINGS: u32 = 10;
pub const TIE_EPS: f64 = 1e-12;

/// Reusable heat-method state for one mesh and seed. The Poisson factorization is shared
/// across time steps.
pub struct HeatGeodesic<'m> {
    mesh: &'m TriangleMesh,
    seed: usize,
    stiffness: Triplets,
    mass: Vec<f64>,
    poisson: SpdSolver,
    keep: Vec<Option<usize>>,
}

impl<'m> HeatGeodesic<'m> {
    pub fn new(mesh: &'m TriangleMesh, seed: usize) -> Result<Self, SolveError> {
        assert!(seed < mesh.n_vertices(), "seed out of range");
        let n = mesh.n_vertices();
        let stiffness = cotan_stiffness(mesh.positions(), mesh.faces());
        let mass = lumped_mass(mesh.positions(), mesh.faces());
        let mut keep = vec![None; n];
        let mut k = 0;
        for (v, slot) in keep.iter_mut().enumerate() {
            if v != seed {
                *slot = Some(k);
                k += 1;
            }
        }
        let poisson = SpdSolver::factor(&stiffness.restrict(&keep, n - 1))?;
        Ok(HeatGeodesic {
            mesh,
            seed,
            stiffness,
            mass,
            poisson,
            keep,
        })
    }

    /// Default diffusion time: squared mean edge length.
    pub fn default_time(&self) -> f64 {
        self.mesh.mean_edge_length().powi(2)
    }

    pub fn distance(&self, t: f64) -> Result<Vec<f64>, SolveError> {
        assert!(t > 0.0);
        let mesh = self.mesh;
        let n = mesh.n_vertices();
        let mut heat = self.stiffness.scaled(t);
        for (v, &m) in self.mass.iter().enumerate() {
            heat.push(v, v, m);
        }
        let mut delta = vec![0.0; n];
        delta[self.seed] = 1.0;
        let u = SpdSolver::factor(&heat)?.solve(&delta)?;

        // b_i = sum_F area_F <X_F, grad phi_i>, with X = -grad u / |grad u|.
        let pos = mesh.positions();
        let mut b = vec![0.0; n];
        for tri in mesh.faces() {
            let Some(basis) = gradient_basis([&pos[tri[0]], &pos[tri[1]], &pos[tri[2]]]) else {
                continue;
            };
            let grad: Vec3 = basis[0] * u[tri[0]] + basis[1] * u[tri[1]] + basis[2] * u[tri[2]];
            let len = grad.norm();
            if len <= f64::MIN_POSITIVE {
                continue;
            }
            let x = -grad / len;
            let area = tri_area(&pos[tri[0]], &pos[tri[1]], &pos[tri[2]]);
            for k in 0..3 {
                b[tri[k]] += area * x.dot(&basis[k]);
            }
        }
        let mut rhs = vec![0.0; n - 1];
        for (v, keep) in self.keep.iter().enumerate() {
            if let Some(r) = *keep {
                rhs[r] = b[v];
            }
        }
        let phi = self.poisson.solve(&rhs)?;
        let mut out = vec![0.0; n];
        for (o, keep) in out.iter_mut().zip(&self.keep) {
            if let Some(r) = *keep {
                *o = phi[r].max(0.0);
            }
        }
        Ok(out)
    }
}

pub fn heat_geodesic(mesh: &TriangleMesh, seed: usize, t: f64) -> Result<Vec<f64>, SolveError> {
    HeatGeodesic::new(mesh, seed)?.distance(t)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CriticalPoints {
    pub minima: Vec<usize>,
    /// Saddles by ascending field value, with multiplicity.
    pub saddles: Vec<(usize, usize)>,
    pub maxima: Vec<usize>,
}

impl CriticalPoints {
    pub fn saddle_count(&self) -> usize {
        self.saddles.iter().map(|s| s.1).sum()
    }

    /// Morse count `#min - #saddles + #max`.
    pub fn euler_count(&self) -> i64 {
        self.minima.len() as i64 - self.saddle_count() as i64 + self.maxima.len() as i64
    }

    pub fn all(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.minima.clone();
        v.extend(self.saddles.iter().map(|s| s.0));
        v.extend(&self.maxima);
        v.sort_unstable();
        v
    }
}

/// Field with exact ties broken by vertex index.
pub fn perturbed(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .enumerate()
        .map(|(i, &x)| x + i as f64 * TIE_EPS)
        .collect()
}

/// Classifies vertices by sign changes of `f(neighbour) - f(v)` around the one-ring.
pub fn classify_critical_points(mesh: &TriangleMesh, values: &[f64]) -> CriticalPoints {
    let f = perturbed(values);
    let mut out = CriticalPoints::default();
    for v in 0..mesh.n_vertices() {
        let ring = mesh.neighbors(v);
        let signs: Vec<bool> = ring.iter().map(|&u| f[u] > f[v]).collect();
        let changes = (0..signs.len())
            .filter(|&k| signs[k] != signs[(k + 1) % signs.len()])
            .count();
        if changes == 0 {
            if signs[0] {
                out.minima.push(v);
            } else {
                out.maxima.push(v);
            }
        } else if changes >= 4 {
            out.saddles.push((v, (changes - 2) / 2));
        }
    }
    out.saddles
        .sort_by(|a, b| f[a.0].total_cmp(&f[b.0]).then(a.0.cmp(&b.0)));
    out
}

/// Pairs of one-ring-adjacent critical vertices.
pub fn adjacent_critical_pairs(mesh: &TriangleMesh, crit: &CriticalPoints) -> usize {
    let all = crit.all();
    let mut is_crit = vec![false; mesh.n_vertices()];
    for &v in &all {
        is_crit[v] = true;
    }
    all.iter()
        .map(|&v| {
            mesh.neighbors(v)
                .iter()
                .filter(|&&u| u > v && is_crit[u])
                .count()
        })
        .sum()
}

#[derive(Debug, Clone)]
pub struct GeodesicField {
    pub values: Vec<f64>,
    pub seed: usize,
    pub t: f64,
    pub doublings: u32,
    /// Set when no tried time step separated all critical points.
    pub warning: bool,
    pub critical: CriticalPoints,
}

impl GeodesicField {
    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }
}

/// Doubles the diffusion time from the squared mean edge length until no two
/// critical vertices are adjacent.
pub fn tune_time_parameter(mesh: &TriangleMesh, seed: usize) -> Result<GeodesicField, SolveError> {
    let heat = HeatGeodesic::new(mesh, seed)?;
    let t0 = heat.default_time();
    let mut best: Option<(usize, GeodesicField)> = None;
    for k in 0..=MAX_DOUBLINGS {
        let t = t0 * 2f64.powi(k as i32);
        let values = heat.distance(t)?;
        let critical = classify_critical_points(mesh, &values);
        let bad = adjacent_critical_pairs(mesh, &critical);
        let field = GeodesicField {
            values,
            seed,
            t,
            doublings: k,
            warning: bad > 0,
            critical,
        };
        if bad == 0 {
            return Ok(field);
        }
        log::debug!("t = {t:.3e}: {bad} adjacent critical pairs");
        if best.as_ref().is_none_or(|(b, _)| bad < *b) {
            best = Some((bad, field));
        }
    }
    let (_, field) = best.expect("at least one attempt");
    log::warn!(
        "time tuning did not isolate critical points; using t = {:.3e}",
        field.t
    );
    Ok(field)
}

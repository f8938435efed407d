//! Triangulated fundamental octagon with side identifications and discrete
//! harmonic 1-forms with prescribed periods.
//!
//! Vertices come from a uniform subdivision of the octagon in the Klein
//! model, where its sides are straight, so boundary vertices lie exactly on
//! the geodesic sides and are matched by the side pairings. Triangles are
//! taken straight in the Poincaré disc chart; the Dirichlet energy of
//! functions is conformally invariant, so the cotangent weights computed
//! there discretize the hyperbolic energy.

use std::collections::{HashMap, VecDeque};
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DVector;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fieldcalc::{CohClass, OneFormField};
use crate::fuchsian::{FuchsianGroup, Surface, BASIS_GENERATORS, N_SIDES};
use crate::hyperbolic::{from_disc, to_disc, I};
use crate::jet::{CJet, Jet};
use crate::mat::JVec2;
use crate::orbit::ClassPotential;

/// Subdivisions per fan triangle giving about 10⁴ vertices.
pub const DEFAULT_MESH_N: usize = 50;

const MATCH_TOL: f64 = 1e-9;

fn klein_to_disc(k: Complex64) -> Complex64 {
    k / (1.0 + (1.0 - k.norm_sqr()).max(0.0).sqrt())
}

fn disc_to_klein(w: Complex64) -> Complex64 {
    w * 2.0 / (1.0 + w.norm_sqr())
}

fn key(w: Complex64) -> (i64, i64) {
    ((w.re * 1e8).round() as i64, (w.im * 1e8).round() as i64)
}

fn find(parent: &mut [usize], mut a: usize) -> usize {
    while parent[a] != a {
        parent[a] = parent[parent[a]];
        a = parent[a];
    }
    a
}

/// `(a, b, k)` with vertex `b = g_k · a`, both on the boundary.
#[derive(Clone, Copy, Debug)]
pub struct SidePair {
    pub a: usize,
    pub b: usize,
    pub generator: usize,
}

#[derive(Debug)]
pub struct OctagonMesh {
    pub n: usize,
    pub disc: Vec<Complex64>,
    pub uhp: Vec<Complex64>,
    pub triangles: Vec<[usize; 3]>,
    /// Vertex → vertex of the closed surface.
    pub quotient: Vec<usize>,
    pub n_quotient: usize,
    pub pairs: Vec<SidePair>,
    boundary_edges: usize,
    edges: usize,
    locator: Locator,
}

impl OctagonMesh {
    pub fn new(surface: &Surface, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config("mesh resolution must be at least 2".into()));
        }
        let corners: Vec<Complex64> = surface.domain.vertices.iter().map(|&w| disc_to_klein(w)).collect();
        let mut index: HashMap<(i64, i64), usize> = HashMap::new();
        let mut klein: Vec<Complex64> = Vec::new();
        let mut boundary: Vec<bool> = Vec::new();
        let mut id = |p: Complex64, on_side: bool, klein: &mut Vec<Complex64>, boundary: &mut Vec<bool>| {
            *index.entry(key(p)).or_insert_with(|| {
                klein.push(p);
                boundary.push(on_side);
                klein.len() - 1
            })
        };
        let mut triangles = Vec::new();
        for k in 0..N_SIDES {
            let (p, q) = (corners[k], corners[(k + 1) % N_SIDES]);
            let mut grid = vec![vec![0usize; n + 1]; n + 1];
            for i in 0..=n {
                for j in 0..=n - i {
                    let pt = (p * i as f64 + q * j as f64) / n as f64;
                    grid[i][j] = id(pt, i + j == n, &mut klein, &mut boundary);
                }
            }
            for i in 0..n {
                for j in 0..n - i {
                    triangles.push([grid[i][j], grid[i + 1][j], grid[i][j + 1]]);
                    if i + j + 1 < n {
                        triangles.push([grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]]);
                    }
                }
            }
        }
        let disc: Vec<Complex64> = klein.iter().map(|&k| klein_to_disc(k)).collect();
        let uhp: Vec<Complex64> = disc.iter().map(|&w| from_disc(w)).collect();
        // Counterclockwise orientation in the disc.
        for t in &mut triangles {
            let (a, b, c) = (disc[t[0]], disc[t[1]], disc[t[2]]);
            if ((b - a).conj() * (c - a)).im < 0.0 {
                t.swap(1, 2);
            }
        }

        let bverts: Vec<usize> = (0..disc.len()).filter(|&v| boundary[v]).collect();
        let bkey: HashMap<(i64, i64), usize> = bverts.iter().map(|&v| (key(disc[v]), v)).collect();
        let mut pairs = Vec::new();
        let mut parent: Vec<usize> = (0..disc.len()).collect();
        for &a in &bverts {
            for (k, g) in surface.group.generators.iter().enumerate() {
                let w = to_disc(g.apply(uhp[a]));
                if let Some(&b) = bkey.get(&key(w)) {
                    if (disc[b] - w).norm() < MATCH_TOL * 10.0 {
                        pairs.push(SidePair { a, b, generator: k });
                        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                        parent[ra] = rb;
                    }
                }
            }
        }
        if bverts.iter().any(|&v| !pairs.iter().any(|p| p.a == v)) {
            return Err(Error::Consistency("unmatched boundary vertex in mesh".into()));
        }
        let mut classes = HashMap::new();
        let quotient: Vec<usize> = (0..disc.len())
            .map(|v| {
                let r = find(&mut parent, v);
                let m = classes.len();
                *classes.entry(r).or_insert(m)
            })
            .collect();

        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                *edge_count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let boundary_edges = edge_count.values().filter(|&&c| c == 1).count();
        let locator = Locator::new(&disc, &triangles);
        Ok(OctagonMesh {
            n,
            disc,
            uhp,
            triangles,
            quotient,
            n_quotient: classes.len(),
            pairs,
            boundary_edges,
            edges: edge_count.len(),
            locator,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.disc.len()
    }

    /// `V − E + F` of the closed surface (boundary edges are glued in pairs).
    pub fn euler_characteristic(&self) -> i64 {
        let e = self.edges - self.boundary_edges / 2;
        self.n_quotient as i64 - e as i64 + self.triangles.len() as i64
    }

    /// Cotangent of the disc-chart angle at vertex `c` of a triangle.
    fn cot(&self, a: usize, b: usize, c: usize) -> f64 {
        let u = self.disc[a] - self.disc[c];
        let v = self.disc[b] - self.disc[c];
        let p = u.conj() * v;
        p.re / p.im.abs()
    }

    /// Edges of each triangle with their weights `cot θ / 2`.
    fn weighted_edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.triangles.iter().flat_map(move |t| {
            (0..3).map(move |e| {
                let (a, b, c) = (t[e], t[(e + 1) % 3], t[(e + 2) % 3]);
                (a, b, 0.5 * self.cot(a, b, c))
            })
        })
    }

    /// Triangle containing the disc point, with barycentric coordinates;
    /// falls back to the nearest triangle for points in the thin gaps
    /// between chords and curved sides.
    pub fn locate(&self, w: Complex64) -> (usize, [f64; 3]) {
        self.locator.locate(&self.disc, &self.triangles, w)
    }
}

#[derive(Debug)]
struct Locator {
    origin: f64,
    cell: f64,
    cells: usize,
    bins: Vec<Vec<usize>>,
}

fn barycentric(p: [Complex64; 3], w: Complex64) -> [f64; 3] {
    let d = ((p[1] - p[0]).conj() * (p[2] - p[0])).im;
    let l1 = ((w - p[0]).conj() * (p[2] - p[0])).im / d;
    let l2 = ((p[1] - p[0]).conj() * (w - p[0])).im / d;
    [1.0 - l1 - l2, l1, l2]
}

impl Locator {
    fn new(disc: &[Complex64], triangles: &[[usize; 3]]) -> Self {
        let r = disc.iter().map(|w| w.norm()).fold(0.0, f64::max) * 1.0001;
        let cells = ((triangles.len() as f64).sqrt() / 2.0).ceil().max(1.0) as usize;
        let cell = 2.0 * r / cells as f64;
        let mut bins = vec![Vec::new(); cells * cells];
        let clamp = |x: f64| (((x + r) / cell).floor().max(0.0) as usize).min(cells - 1);
        for (ti, t) in triangles.iter().enumerate() {
            let xs = t.map(|v| disc[v].re);
            let ys = t.map(|v| disc[v].im);
            let (x0, x1) = (xs.iter().cloned().fold(f64::MAX, f64::min), xs.iter().cloned().fold(f64::MIN, f64::max));
            let (y0, y1) = (ys.iter().cloned().fold(f64::MAX, f64::min), ys.iter().cloned().fold(f64::MIN, f64::max));
            for i in clamp(x0)..=clamp(x1) {
                for j in clamp(y0)..=clamp(y1) {
                    bins[i * cells + j].push(ti);
                }
            }
        }
        Locator { origin: r, cell, cells, bins }
    }

    fn locate(&self, disc: &[Complex64], triangles: &[[usize; 3]], w: Complex64) -> (usize, [f64; 3]) {
        let clamp = |x: f64| (((x + self.origin) / self.cell).floor().max(0.0) as usize).min(self.cells - 1);
        let (ci, cj) = (clamp(w.re), clamp(w.im));
        let mut best = (0usize, [f64::NAN; 3], f64::MIN);
        for ring in 0..self.cells {
            let lo_i = ci.saturating_sub(ring);
            let lo_j = cj.saturating_sub(ring);
            for i in lo_i..=(ci + ring).min(self.cells - 1) {
                for j in lo_j..=(cj + ring).min(self.cells - 1) {
                    for &ti in &self.bins[i * self.cells + j] {
                        let l = barycentric(triangles[ti].map(|v| disc[v]), w);
                        let m = l[0].min(l[1]).min(l[2]);
                        if m > best.2 {
                            best = (ti, l, m);
                        }
                    }
                }
            }
            if best.2 >= -1e-12 || (ring >= 1 && best.2 > f64::MIN) {
                break;
            }
        }
        (best.0, best.1)
    }
}

/// Discrete harmonic 1-form `dU`, `U` continuous and piecewise linear on the
/// mesh with `U(g·v) = U(v) + χ(g)`.
#[derive(Debug)]
pub struct MeshOneForm {
    pub mesh: Arc<OctagonMesh>,
    group: Arc<FuchsianGroup>,
    /// `U` at each mesh vertex.
    pub potential: Vec<f64>,
    pub target: CohClass,
    /// Dirichlet energy `∫ |dU|²`.
    pub energy: f64,
    /// Relative residual of the co-closedness equations.
    pub coclosed_residual: f64,
}

/// Discrete harmonic representative of `target`: `U = U₀ + v` with `U₀` a
/// smooth potential with the right periods and `v` single valued,
/// minimizing the cotangent Dirichlet energy.
pub fn harmonic_oneform(surface: &Surface, target: &CohClass, mesh: Arc<OctagonMesh>) -> Result<MeshOneForm> {
    if target.periods.iter().any(|p| !p.is_finite()) {
        return Err(Error::NumericOverflow("non-finite target class".into()));
    }
    let u0p = ClassPotential::new(surface, target.periods);
    let u0: Vec<f64> = mesh.uhp.iter().map(|&z| u0p.eval(&CJet::local(z, 0)).val()).collect();
    let nq = mesh.n_quotient;
    // Unknowns are quotient vertices 1..nq; vertex 0 is pinned to 0.
    let mut coo = CooMatrix::new(nq - 1, nq - 1);
    let mut rhs = DVector::zeros(nq - 1);
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for (a, b, w) in mesh.weighted_edges() {
        let (qa, qb) = (mesh.quotient[a], mesh.quotient[b]);
        if qa == qb {
            continue;
        }
        let d0 = u0[b] - u0[a];
        entries.extend([(qa, qa, w), (qb, qb, w), (qa, qb, -w), (qb, qa, -w)]);
        if qb > 0 {
            rhs[qb - 1] -= w * d0;
        }
        if qa > 0 {
            rhs[qa - 1] += w * d0;
        }
    }
    for (i, j, w) in entries {
        if i > 0 && j > 0 {
            coo.push(i - 1, j - 1, w);
        }
    }
    let lap = CscMatrix::from(&coo);
    let chol = CscCholesky::factor(&lap).map_err(|e| Error::Solver(format!("cotangent Laplacian: {e}")))?;
    let v = chol.solve(&rhs);
    let v = v.column(0);
    let residual = (&lap * &v - &rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE);
    let potential: Vec<f64> = (0..mesh.vertex_count())
        .map(|i| {
            let q = mesh.quotient[i];
            u0[i] + if q == 0 { 0.0 } else { v[q - 1] }
        })
        .collect();
    let energy = mesh.weighted_edges().map(|(a, b, w)| w * (potential[b] - potential[a]).powi(2)).sum();
    Ok(MeshOneForm {
        mesh,
        group: Arc::new(surface.group.clone()),
        potential,
        target: *target,
        energy,
        coclosed_residual: if residual.is_finite() { residual } else { 0.0 },
    })
}

impl MeshOneForm {
    /// Value of the form on the oriented edge `a → b`.
    pub fn edge_value(&self, a: usize, b: usize) -> f64 {
        self.potential[b] - self.potential[a]
    }

    /// `sup` over faces of the sum of edge values around the face.
    pub fn closedness_residual(&self) -> f64 {
        self.mesh
            .triangles
            .iter()
            .map(|t| (0..3).map(|e| self.edge_value(t[e], t[(e + 1) % 3])).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    /// Periods over the basis loops: sums of edge values along a mesh path
    /// from a boundary vertex `a` to its image `g·a` under each basis
    /// generator.
    pub fn periods(&self) -> CohClass {
        let m = &self.mesh;
        let mut adj = vec![Vec::new(); m.vertex_count()];
        for t in &m.triangles {
            for e in 0..3 {
                adj[t[e]].push(t[(e + 1) % 3]);
                adj[t[(e + 1) % 3]].push(t[e]);
            }
        }
        let mut out = [0.0; 4];
        for (k, &g) in BASIS_GENERATORS.iter().enumerate() {
            let p = m.pairs.iter().find(|p| p.generator == g).expect("side pair for generator");
            let path = bfs_path(&adj, p.a, p.b);
            out[k] = path.windows(2).map(|w| self.edge_value(w[0], w[1])).sum();
        }
        CohClass::new(out)
    }

    /// Gradient of `U` in disc coordinates on a triangle.
    fn disc_gradient(&self, t: usize) -> [f64; 2] {
        let tri = self.mesh.triangles[t];
        let p = tri.map(|v| self.mesh.disc[v]);
        let u = tri.map(|v| self.potential[v]);
        let (e1, e2) = (p[1] - p[0], p[2] - p[0]);
        let det = e1.re * e2.im - e1.im * e2.re;
        let (d1, d2) = (u[1] - u[0], u[2] - u[0]);
        [(d1 * e2.im - d2 * e1.im) / det, (e1.re * d2 - e2.re * d1) / det]
    }

    /// Writes vertex and face snapshots as CSV.
    pub fn export_csv(&self, vertices: &Path, faces: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(vertices)?);
        writeln!(f, "x,y,quotient_vertex,potential")?;
        for (i, z) in self.mesh.uhp.iter().enumerate() {
            writeln!(f, "{},{},{},{}", z.re, z.im, self.mesh.quotient[i], self.potential[i])?;
        }
        let mut f = std::io::BufWriter::new(std::fs::File::create(faces)?);
        writeln!(f, "x,y,alpha_x,alpha_y")?;
        for t in 0..self.mesh.triangles.len() {
            let c = self.mesh.triangles[t].iter().map(|&v| self.mesh.disc[v]).sum::<Complex64>() / 3.0;
            let z = from_disc(c);
            let a = self.value_at(z);
            writeln!(f, "{},{},{},{}", z.re, z.im, a[0], a[1])?;
        }
        Ok(())
    }

    /// Form components `(α_x, α_y)` in the half-plane chart at `z`.
    pub fn value_at(&self, z: Complex64) -> [f64; 2] {
        let r = self.group.reduce(z).expect("reduction into the fundamental domain");
        let (t, _) = self.mesh.locate(to_disc(r.z0));
        let g = self.disc_gradient(t);
        // Chain rule through w = to_disc(g⁻¹ z), holomorphic in z.
        let c = 2.0 * I / (r.z0 + I).powi(2) * r.g.inverse().deriv(z);
        [g[0] * c.re + g[1] * c.im, -g[0] * c.im + g[1] * c.re]
    }
}

fn bfs_path(adj: &[Vec<usize>], from: usize, to: usize) -> Vec<usize> {
    let mut prev = vec![usize::MAX; adj.len()];
    prev[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            break;
        }
        for &w in &adj[v] {
            if prev[w] == usize::MAX {
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![to];
    while *path.last().unwrap() != from {
        path.push(prev[*path.last().unwrap()]);
    }
    path.reverse();
    path
}

impl OneFormField for MeshOneForm {
    fn eval(&self, z: &CJet) -> JVec2 {
        let o = z.order().saturating_sub(1);
        let a = self.value_at(z.value());
        [Jet::constant(a[0]).truncate(o), Jet::constant(a[1]).truncate(o)]
    }
}

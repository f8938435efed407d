//! The genus-2 surface as the quotient of the half-plane by the side
//! pairings of a regular octagon with interior angles π/4, centred at `i`.
//!
//! Side `k` has its midpoint in direction `π/2 + kπ/4` from the centre.
//! Generator `k` maps the octagon to its neighbour across side `k`; sides are
//! paired `0↔2, 1↔3, 4↔6, 5↔7`, so generator `k` and generator `pair(k)` are
//! mutually inverse. The homology basis `(a₁, b₁, a₂, b₂)` uses generators
//! `0, 1, 4, 5`.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hyperbolic::{from_disc, polar_from_i, to_disc, GeodesicArc, I};
use crate::lie2::{h2_dist, H2Point, MoebiusElt};

pub const N_SIDES: usize = 8;
/// Generator indices of the loops `a₁, b₁, a₂, b₂`.
pub const BASIS_GENERATORS: [usize; 4] = [0, 1, 4, 5];
pub const DEFAULT_REDUCTION_CAP: usize = 40;
const FORMAT_VERSION: u32 = 1;

/// Side paired with side `k`.
pub fn pair(k: usize) -> usize {
    match k % 4 {
        0 | 1 => k + 2,
        _ => k - 2,
    }
}

/// Direction from the centre to the midpoint of side `k`.
pub fn side_direction(k: usize) -> f64 {
    FRAC_PI_2 + k as f64 * FRAC_PI_4
}

/// Distance from the centre to each side: `cosh r = cot(π/8)`.
pub fn inradius() -> f64 {
    (1.0 / FRAC_PI_8.tan()).acosh()
}

/// Distance from the centre to each vertex: `cosh R = cot²(π/8)`.
pub fn circumradius() -> f64 {
    (1.0 / FRAC_PI_8.tan()).powi(2).acosh()
}

#[derive(Clone, Debug)]
pub struct FuchsianGroup {
    pub generators: [MoebiusElt; N_SIDES],
    pub relation_word: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct FundamentalDomain {
    /// Vertices in the Poincaré disc; vertex `k` lies between sides `k` and `k+1`.
    pub vertices: [Complex64; N_SIDES],
    /// Side index → (generator index, paired side).
    pub side_pairings: [(usize, usize); N_SIDES],
}

/// A closed loop on the surface lifted to a piecewise geodesic path from
/// the base point `x₀` to `g·x₀`.
#[derive(Clone, Debug)]
pub struct Loop {
    pub nodes: Vec<Complex64>,
    pub closing: MoebiusElt,
    pub generator: usize,
}

impl Loop {
    pub fn arcs(&self) -> impl Iterator<Item = GeodesicArc> + '_ {
        self.nodes.windows(2).map(|w| GeodesicArc::new(w[0], w[1]))
    }

    pub fn length(&self) -> f64 {
        self.arcs().map(|a| a.length).sum()
    }
}

#[derive(Clone, Debug)]
pub struct LoopBasis {
    pub base: Complex64,
    pub loops: Vec<Loop>,
}

/// Group, domain and loops bundled together.
#[derive(Clone, Debug)]
pub struct Surface {
    pub group: FuchsianGroup,
    pub domain: FundamentalDomain,
    pub loops: LoopBasis,
}

/// Result of reducing a point into the fundamental domain.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub z0: Complex64,
    /// `z = g·z0`.
    pub g: MoebiusElt,
    /// Generator indices with `g = g_{w₀} g_{w₁} ⋯`.
    pub word: Vec<usize>,
}

pub fn standard_genus2() -> Result<(FuchsianGroup, FundamentalDomain, LoopBasis)> {
    let r = inradius();
    let rot = |t: f64| MoebiusElt::rotation_about_i(t);
    let mut generators = [MoebiusElt::identity(); N_SIDES];
    for (k, g) in generators.iter_mut().enumerate() {
        let j = pair(k);
        *g = rot(side_direction(k) - FRAC_PI_2)
            * MoebiusElt::translation_i_axis(2.0 * r)
            * rot(-FRAC_PI_2 - side_direction(j));
    }
    let rv = circumradius();
    let mut vertices = [Complex64::new(0.0, 0.0); N_SIDES];
    for (k, v) in vertices.iter_mut().enumerate() {
        *v = to_disc(polar_from_i(side_direction(k) + FRAC_PI_8, rv));
    }
    let mut side_pairings = [(0, 0); N_SIDES];
    for (k, p) in side_pairings.iter_mut().enumerate() {
        *p = (k, pair(k));
    }
    let domain = FundamentalDomain { vertices, side_pairings };
    let relation_word = vertex_cycle(&generators, &domain)?;
    let group = FuchsianGroup { generators, relation_word };
    group.check()?;
    let loops = LoopBasis {
        base: I,
        loops: BASIS_GENERATORS
            .iter()
            .map(|&k| Loop {
                nodes: vec![I, generators[k].apply(I)],
                closing: generators[k],
                generator: k,
            })
            .collect(),
    };
    Ok((group, domain, loops))
}

impl Surface {
    pub fn standard() -> Self {
        let (group, domain, loops) = standard_genus2().expect("octagon construction");
        Surface { group, domain, loops }
    }
}

/// Follows the vertex cycle of vertex 0 through the side pairings and
/// returns the generators met along the way; their product is the identity.
fn vertex_cycle(gens: &[MoebiusElt; N_SIDES], dom: &FundamentalDomain) -> Result<Vec<usize>> {
    let verts: Vec<Complex64> = dom.vertices.iter().map(|&w| from_disc(w)).collect();
    let find = |z: Complex64| -> Result<usize> {
        verts
            .iter()
            .position(|&v| h2_dist(v, z) < 1e-9)
            .ok_or_else(|| Error::Consistency(format!("side pairing does not map {z} to a vertex")))
    };
    // Vertex k lies on sides k and k+1.
    let (mut v, mut side) = (0usize, 0usize);
    let mut word = Vec::new();
    loop {
        // The inverse of generator `side` maps side `side` to side `pair(side)`.
        let g = pair(side);
        let v2 = find(gens[g].apply(verts[v]))?;
        word.push(g);
        let s2 = pair(side);
        side = if v2 == s2 { (s2 + 1) % N_SIDES } else { (s2 + N_SIDES - 1) % N_SIDES };
        if side != v2 && side != (v2 + 1) % N_SIDES {
            return Err(Error::Consistency("vertex cycle left the polygon".into()));
        }
        v = v2;
        if (v, side) == (0, 0) || word.len() > 2 * N_SIDES {
            break;
        }
    }
    if word.len() != N_SIDES {
        return Err(Error::Consistency(format!("vertex cycle of length {}", word.len())));
    }
    // The cycle map is the composition in reverse order of application.
    word.reverse();
    Ok(word)
}

impl FuchsianGroup {
    /// Product over the relation word.
    pub fn relation_product(&self) -> MoebiusElt {
        self.relation_word
            .iter()
            .fold(MoebiusElt::identity(), |acc, &k| acc * self.generators[k])
    }

    fn check(&self) -> Result<()> {
        let res = self.relation_product().dist(&MoebiusElt::identity());
        if res > 1e-10 {
            return Err(Error::Consistency(format!("relation residual {res:e}")));
        }
        for (k, g) in self.generators.iter().enumerate() {
            if g.trace().abs() <= 2.0 {
                return Err(Error::Consistency(format!("generator {k} is not hyperbolic")));
            }
            let inv = (*g * self.generators[pair(k)]).dist(&MoebiusElt::identity());
            if inv > 1e-10 {
                return Err(Error::Consistency(format!("generator {k} inverse residual {inv:e}")));
            }
        }
        Ok(())
    }

    pub fn word_product(&self, word: &[usize]) -> MoebiusElt {
        word.iter().fold(MoebiusElt::identity(), |acc, &k| acc * self.generators[k])
    }

    /// Greedy Dirichlet descent: while some neighbouring centre `g_k·i` is
    /// closer to `z` than `i`, replace `z` by `g_k⁻¹ z`.
    pub fn reduce_with_cap(&self, z: Complex64, cap: usize) -> Result<Reduction> {
        let mut z0 = z;
        let mut g = MoebiusElt::identity();
        let mut word = Vec::new();
        loop {
            let here = h2_dist(z0, I);
            let mut best: Option<(usize, f64)> = None;
            for (k, gk) in self.generators.iter().enumerate() {
                let d = h2_dist(z0, gk.apply(I));
                if d < here - 1e-13 * (1.0 + here) && best.map_or(true, |(_, bd)| d < bd - 1e-13) {
                    best = Some((k, d));
                }
            }
            let Some((k, _)) = best else { break };
            if word.len() >= cap {
                return Err(Error::ReductionFailure { z: format!("{z}"), cap });
            }
            z0 = self.generators[pair(k)].apply(z0);
            g = g * self.generators[k];
            word.push(k);
        }
        Ok(Reduction { z0, g, word })
    }

    pub fn reduce(&self, z: Complex64) -> Result<Reduction> {
        self.reduce_with_cap(z, DEFAULT_REDUCTION_CAP)
    }

    /// All group elements `g` with `d(i, g·i) ≤ radius`, identity first.
    /// Complete because greedy descent from any such `g·i` stays in the ball.
    pub fn elements_within(&self, radius: f64) -> Vec<MoebiusElt> {
        let mut out = vec![MoebiusElt::identity()];
        let mut seen: HashMap<[i64; 2], ()> = HashMap::new();
        let key = |z: Complex64| [(z.re * 1e8).round() as i64, (z.im.ln() * 1e8).round() as i64];
        seen.insert(key(I), ());
        let mut queue = VecDeque::from([MoebiusElt::identity()]);
        while let Some(g) = queue.pop_front() {
            for gk in &self.generators {
                let h = g * *gk;
                let c = h.apply(I);
                if h2_dist(c, I) > radius {
                    continue;
                }
                if seen.insert(key(c), ()).is_none() {
                    out.push(h);
                    queue.push_back(h);
                }
            }
        }
        out
    }
}

pub fn reduce_to_domain(z: &H2Point, group: &FuchsianGroup) -> Result<(H2Point, MoebiusElt)> {
    let r = group.reduce(z.z)?;
    Ok((H2Point::new(r.z0)?, r.g))
}

impl FundamentalDomain {
    pub fn vertices_uhp(&self) -> [Complex64; N_SIDES] {
        self.vertices.map(from_disc)
    }

    /// Interior angle at vertex `k`, measured in the disc (conformal).
    pub fn interior_angle(&self, k: usize) -> f64 {
        let v = from_disc(self.vertices[k]);
        let prev = from_disc(self.vertices[(k + N_SIDES - 1) % N_SIDES]);
        let next = from_disc(self.vertices[(k + 1) % N_SIDES]);
        let d1 = GeodesicArc::new(v, prev).at(0.0).1;
        let d2 = GeodesicArc::new(v, next).at(0.0).1;
        (d1 / d2).arg().abs()
    }

    pub fn side_midpoint(&self, k: usize) -> Complex64 {
        polar_from_i(side_direction(k), inradius())
    }

    /// Area by integrating `cosh ρ(θ) − 1` over the polar angle, where
    /// `ρ(θ)` is the distance from the centre to the boundary.
    pub fn area(&self) -> f64 {
        let tr = inradius().tanh();
        let sector = crate::quad::integrate(
            |t| {
                let c = t.cos();
                1.0 / (1.0 - (tr / c).powi(2)).sqrt() - 1.0
            },
            -FRAC_PI_8,
            FRAC_PI_8,
            8,
            16,
        );
        N_SIDES as f64 * sector
    }

    /// Whether `z` lies in the closed domain (up to `tol` in distance).
    pub fn contains(&self, group: &FuchsianGroup, z: Complex64, tol: f64) -> bool {
        let d0 = h2_dist(z, I);
        group.generators.iter().all(|g| h2_dist(z, g.apply(I)) >= d0 - tol)
    }
}

impl LoopBasis {
    /// Resamples every loop into `n` geodesic sub-arcs of equal length.
    pub fn refine(&self, n: usize) -> LoopBasis {
        assert!(n >= 1);
        let loops = self
            .loops
            .iter()
            .map(|l| {
                let arcs: Vec<GeodesicArc> = l.arcs().collect();
                let total: f64 = arcs.iter().map(|a| a.length).sum();
                let mut nodes = Vec::with_capacity(n + 1);
                nodes.push(l.nodes[0]);
                for j in 1..n {
                    let mut s = total * j as f64 / n as f64;
                    let mut idx = 0;
                    while idx + 1 < arcs.len() && s > arcs[idx].length {
                        s -= arcs[idx].length;
                        idx += 1;
                    }
                    nodes.push(arcs[idx].point(s / arcs[idx].length));
                }
                nodes.push(*l.nodes.last().unwrap());
                Loop { nodes, closing: l.closing, generator: l.generator }
            })
            .collect();
        LoopBasis { base: self.base, loops }
    }

    /// Algebraic intersection numbers of the loops, read off the cyclic order
    /// of their outgoing and incoming directions at the base point.
    pub fn intersection_matrix(&self) -> [[i32; 4]; 4] {
        let dirs: Vec<(f64, f64)> = self
            .loops
            .iter()
            .map(|l| {
                let out = crate::hyperbolic::direction_from_i(l.nodes[1]);
                let back = l.closing.inverse().apply(l.nodes[l.nodes.len() - 2]);
                (out, crate::hyperbolic::direction_from_i(back))
            })
            .collect();
        let in_ccw_arc = |from: f64, to: f64, x: f64| {
            let w = |t: f64| t.rem_euclid(2.0 * PI);
            let span = w(to - from);
            let off = w(x - from);
            off > 1e-9 && off < span - 1e-9
        };
        let mut m = [[0; 4]; 4];
        for a in 0..dirs.len().min(4) {
            for b in 0..dirs.len().min(4) {
                if a == b {
                    continue;
                }
                let (oa, ia) = dirs[a];
                let (ob, ib) = dirs[b];
                let left_out = in_ccw_arc(oa, ia, ob);
                let left_in = in_ccw_arc(oa, ia, ib);
                m[a][b] = match (left_in, left_out) {
                    (false, true) => 1,
                    (true, false) => -1,
                    _ => 0,
                };
            }
        }
        m
    }
}

/// Writes the group and domain as a versioned `key = value` text file with
/// matrix entries at full double precision.
pub fn serialize(group: &FuchsianGroup, domain: &FundamentalDomain) -> String {
    let mut s = String::new();
    writeln!(s, "format = adsflux-fuchsian").unwrap();
    writeln!(s, "version = {FORMAT_VERSION}").unwrap();
    for (k, g) in group.generators.iter().enumerate() {
        let [a, b, c, d] = g.entries();
        writeln!(s, "generator.{k} = {a:?} {b:?} {c:?} {d:?}").unwrap();
    }
    let word: Vec<String> = group.relation_word.iter().map(|k| k.to_string()).collect();
    writeln!(s, "relation = {}", word.join(" ")).unwrap();
    for (k, v) in domain.vertices.iter().enumerate() {
        writeln!(s, "vertex.{k} = {:?} {:?}", v.re, v.im).unwrap();
    }
    for (k, (g, t)) in domain.side_pairings.iter().enumerate() {
        writeln!(s, "pairing.{k} = {g} {t}").unwrap();
    }
    s
}

pub fn deserialize(text: &str) -> Result<(FuchsianGroup, FundamentalDomain)> {
    let bad = |m: String| Error::Config(m);
    let mut map = HashMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| bad(format!("malformed line `{line}`")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    if map.get("format").map(String::as_str) != Some("adsflux-fuchsian") {
        return Err(bad("not a fuchsian group file".into()));
    }
    let version: u32 = map.get("version").and_then(|v| v.parse().ok()).unwrap_or(0);
    if version != FORMAT_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let nums = |key: String, n: usize| -> Result<Vec<f64>> {
        let v = map.get(&key).ok_or_else(|| bad(format!("missing `{key}`")))?;
        let out: Vec<f64> = v.split_whitespace().filter_map(|t| t.parse().ok()).collect();
        if out.len() != n {
            return Err(bad(format!("`{key}` needs {n} numbers")));
        }
        Ok(out)
    };
    let mut generators = [MoebiusElt::identity(); N_SIDES];
    let mut vertices = [Complex64::new(0.0, 0.0); N_SIDES];
    let mut side_pairings = [(0, 0); N_SIDES];
    for k in 0..N_SIDES {
        let g = nums(format!("generator.{k}"), 4)?;
        generators[k] = MoebiusElt::try_from_mat(crate::mat::Mat2::new(g[0], g[1], g[2], g[3]))?;
        let v = nums(format!("vertex.{k}"), 2)?;
        vertices[k] = Complex64::new(v[0], v[1]);
        let p = nums(format!("pairing.{k}"), 2)?;
        side_pairings[k] = (p[0] as usize, p[1] as usize);
    }
    let relation_word = map
        .get("relation")
        .ok_or_else(|| bad("missing `relation`".into()))?
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| bad(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let group = FuchsianGroup { generators, relation_word };
    group.check()?;
    Ok((group, FundamentalDomain { vertices, side_pairings }))
}

pub fn save(path: &Path, group: &FuchsianGroup, domain: &FundamentalDomain) -> Result<()> {
    std::fs::write(path, serialize(group, domain))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(FuchsianGroup, FundamentalDomain)> {
    deserialize(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relation_closes() {
        let (g, _, _) = standard_genus2().unwrap();
        assert!(g.relation_product().dist(&MoebiusElt::identity()) < 1e-10);
        assert_eq!(g.relation_word.len(), 8);
    }

    #[test]
    fn generator_trace_matches_translation_length() {
        let (g, _, _) = standard_genus2().unwrap();
        // Each pairing is a translation by 2r across a side composed with a
        // rotation by ±π/2 + π, so cosh(ℓ/2) = cosh(r)·cos(π/4) with
        // cosh r = cot(π/8).
        let half_len = ((1.0 / FRAC_PI_8.tan()) * FRAC_PI_4.cos()).acosh();
        let expect = 2.0 * half_len.cosh();
        for gk in &g.generators {
            assert!((gk.trace().abs() - expect).abs() < 1e-8);
        }
    }

    #[test]
    fn angles_and_area() {
        let (_, d, _) = standard_genus2().unwrap();
        for k in 0..N_SIDES {
            assert!((d.interior_angle(k) - FRAC_PI_4).abs() < 1e-10);
        }
        assert!((d.area() - 4.0 * PI).abs() < 1e-9, "{}", d.area());
    }

    #[test]
    fn pairings_map_sides_onto_sides() {
        let (g, d, _) = standard_genus2().unwrap();
        let v = d.vertices_uhp();
        for k in 0..N_SIDES {
            let j = pair(k);
            // Generator k maps side j (vertices j-1, j) onto side k (vertices k-1, k).
            let img = [g.generators[k].apply(v[(j + 7) % 8]), g.generators[k].apply(v[j])];
            let side = [v[(k + 7) % 8], v[k]];
            let direct = h2_dist(img[0], side[0]).max(h2_dist(img[1], side[1]));
            let swapped = h2_dist(img[0], side[1]).max(h2_dist(img[1], side[0]));
            assert!(direct.min(swapped) < 1e-10);
            let mid = g.generators[k].apply(d.side_midpoint(j));
            assert!(h2_dist(mid, d.side_midpoint(k)) < 1e-10);
        }
    }

    #[test]
    fn single_step_reduction() {
        let (g, _, _) = standard_genus2().unwrap();
        let z0 = Complex64::new(0.1, 1.2);
        let r = g.reduce(z0).unwrap();
        assert!(r.word.is_empty());
        for k in 0..N_SIDES {
            let r = g.reduce(g.generators[k].apply(z0)).unwrap();
            assert!((r.z0 - z0).norm() < 1e-12);
            assert_eq!(r.word, vec![k]);
        }
    }

    #[test]
    fn loop_intersections_are_standard() {
        let (_, _, l) = standard_genus2().unwrap();
        let expect = [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]];
        assert_eq!(l.intersection_matrix(), expect);
        assert_eq!(l.refine(7).intersection_matrix(), expect);
    }

    #[test]
    fn refinement_keeps_endpoints_and_length() {
        let (_, _, l) = standard_genus2().unwrap();
        let r = l.refine(2);
        for (a, b) in l.loops.iter().zip(&r.loops) {
            assert_eq!(a.nodes[0], b.nodes[0]);
            assert_eq!(a.nodes.last(), b.nodes.last());
            assert!((a.length() - 2.0 * inradius()).abs() < 1e-12);
            assert!((b.length() - a.length()).abs() < 1e-12);
            let end = b.closing.apply(b.nodes[0]);
            assert!((end - *b.nodes.last().unwrap()).norm() < 1e-10);
        }
    }

    #[test]
    fn serialization_roundtrip_is_exact() {
        let (g, d, _) = standard_genus2().unwrap();
        let text = serialize(&g, &d);
        let (g2, d2) = deserialize(&text).unwrap();
        for k in 0..N_SIDES {
            assert_eq!(g.generators[k].entries(), g2.generators[k].entries());
            assert_eq!(d.vertices[k], d2.vertices[k]);
        }
        assert_eq!(g.relation_word, g2.relation_word);
    }

    #[test]
    fn ball_enumeration_counts() {
        let (g, _, _) = standard_genus2().unwrap();
        let els = g.elements_within(2.0 * inradius() + 1e-9);
        assert_eq!(els.len(), 9);
    }
}

//! Built-in benchmark problems.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use crate::assembly::{Problem, Source};
use crate::femspace::FESpace;
use crate::geometry::{pullback_material, pullback_source, QuarterAnnulus, SharedMap, VectorFn};
use crate::materials::{
    vacuum_reluctivity, AnisotropicLinear, Bounds, BrauerParams, LinearIsotropic, LinearTensorField,
    PermanentMagnet, SharedLaw,
};
use crate::mesh::{generate_disc, generate_rectangle, generate_unit_square, Mesh};
use crate::{Error, Result};

/// How a study measures the discretization error at each level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorMode {
    /// Against a known exact flux.
    ManufacturedExact,
    /// Against the solution on the next uniformly refined mesh.
    SuccessiveRefinement,
    /// Against the solution of degree `k + 1` on the same mesh.
    SuccessiveDegree,
}

impl ErrorMode {
    pub fn name(self) -> &'static str {
        match self {
            ErrorMode::ManufacturedExact => "manufactured-exact",
            ErrorMode::SuccessiveRefinement => "successive-refinement",
            ErrorMode::SuccessiveDegree => "successive-degree",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "manufactured-exact" | "manufactured" => Ok(ErrorMode::ManufacturedExact),
            "successive-refinement" => Ok(ErrorMode::SuccessiveRefinement),
            "successive-degree" => Ok(ErrorMode::SuccessiveDegree),
            _ => Err(Error::Config(format!("unknown error mode '{s}'"))),
        }
    }
}

pub type MeshBuilder = Arc<dyn Fn(usize) -> Result<Mesh<f64>> + Send + Sync>;

/// A problem family indexed by refinement level and degree `k`
/// (space degree `k + 1`).
#[derive(Clone)]
pub struct Benchmark {
    pub name: String,
    pub description: String,
    pub error_mode: ErrorMode,
    pub default_degree: usize,
    pub default_levels: usize,
    /// Level 0 mesh refined `level` times.
    pub mesh: MeshBuilder,
    /// Reference-domain laws (already pulled back when `map` is set).
    pub laws: BTreeMap<i32, SharedLaw<f64>>,
    pub source: Source<f64>,
    pub dirichlet: Vec<i32>,
    /// Exact `Curl a` for the manufactured error mode.
    pub exact_flux: Option<VectorFn<f64>>,
    /// Map to the physical domain, if the problem was pulled back.
    pub map: Option<SharedMap<f64>>,
}

impl fmt::Debug for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Benchmark")
            .field("name", &self.name)
            .field("error_mode", &self.error_mode)
            .field("laws", &self.laws)
            .field("source", &self.source)
            .field("dirichlet", &self.dirichlet)
            .finish_non_exhaustive()
    }
}

impl Benchmark {
    pub fn build_mesh(&self, level: usize) -> Result<Mesh<f64>> {
        (self.mesh)(level)
    }

    /// The discrete problem at `level` with space degree `k + 1`.
    pub fn problem(&self, level: usize, k: usize) -> Result<Problem<f64>> {
        let mesh = Arc::new(self.build_mesh(level)?);
        self.problem_on(mesh, k)
    }

    pub fn problem_on(&self, mesh: Arc<Mesh<f64>>, k: usize) -> Result<Problem<f64>> {
        let space = Arc::new(FESpace::new(mesh, k + 1, &self.dirichlet)?);
        Problem::with_default_rule(space, self.laws.clone(), self.source.clone())
    }

    pub fn with_error_mode(mut self, mode: ErrorMode) -> Result<Self> {
        if mode == ErrorMode::ManufacturedExact && self.exact_flux.is_none() {
            return Err(Error::Config(format!(
                "benchmark '{}' has no exact solution for the manufactured error mode",
                self.name
            )));
        }
        self.error_mode = mode;
        Ok(self)
    }
}

fn refine_times(mut mesh: Mesh<f64>, level: usize) -> Mesh<f64> {
    for _ in 0..level {
        mesh = mesh.refine_uniform();
    }
    mesh
}

fn brauer() -> SharedLaw<f64> {
    Arc::new(BrauerParams::standard_iron())
}

/// Peak `|Curl a|` of the manufactured solution, in tesla.
pub const MANUFACTURED_PEAK_FLUX: f64 = 1.5;

/// `a = A sin(pi x) sin(pi y)` with `A pi = MANUFACTURED_PEAK_FLUX`.
pub fn manufactured_potential(x: [f64; 2]) -> f64 {
    MANUFACTURED_PEAK_FLUX / PI * (PI * x[0]).sin() * (PI * x[1]).sin()
}

/// `Curl a = (d_y a, -d_x a)` of [`manufactured_potential`].
pub fn manufactured_flux(x: [f64; 2]) -> [f64; 2] {
    let (sx, cx) = (PI * x[0]).sin_cos();
    let (sy, cy) = (PI * x[1]).sin_cos();
    [MANUFACTURED_PEAK_FLUX * sx * cy, -MANUFACTURED_PEAK_FLUX * cx * sy]
}

/// Manufactured problem on the unit square with `h_s = d_b w(Curl a)`,
/// so the exact minimizer is [`manufactured_potential`] for any law.
pub fn manufactured_with_law(law: SharedLaw<f64>) -> Benchmark {
    let law_src = Arc::clone(&law);
    let source: VectorFn<f64> = Arc::new(move |x| law_src.field(x, manufactured_flux(x)));
    Benchmark {
        name: "manufactured".into(),
        description: "unit square, a = (1.5/pi) sin(pi x) sin(pi y), h_s = d_b w(Curl a)".into(),
        error_mode: ErrorMode::ManufacturedExact,
        default_degree: 1,
        default_levels: 4,
        mesh: Arc::new(|level| Ok(refine_times(generate_unit_square(8)?, level))),
        laws: BTreeMap::from([(1, law)]),
        source: Source::Field(source),
        dirichlet: vec![1],
        exact_flux: Some(Arc::new(manufactured_flux)),
        map: None,
    }
}

pub fn manufactured() -> Benchmark {
    manufactured_with_law(brauer())
}

/// Two-wire disc geometry.
pub const DISC_RADIUS: f64 = 0.1;
pub const WIRE_OFFSET: f64 = 0.05;
pub const WIRE_RADIUS: f64 = 0.025;
pub const WIRE_CURRENT_DENSITY: f64 = 1e5;
pub const DISC_BASE_RINGS: usize = 8;

const IRON: i32 = 1;
const WIRE_PLUS: i32 = 2;
const WIRE_MINUS: i32 = 3;

fn wire_centres() -> [(i32, [f64; 2]); 2] {
    [(WIRE_PLUS, [0.0, WIRE_OFFSET]), (WIRE_MINUS, [0.0, -WIRE_OFFSET])]
}

fn project_to_circle(c: [f64; 2], r: f64, p: [f64; 2]) -> [f64; 2] {
    let d = [p[0] - c[0], p[1] - c[1]];
    let n = d[0].hypot(d[1]);
    [c[0] + r * d[0] / n, c[1] + r * d[1] / n]
}

fn on_circle(c: [f64; 2], r: f64, p: [f64; 2]) -> bool {
    ((p[0] - c[0]).hypot(p[1] - c[1]) - r).abs() <= 1e-9 * r
}

type PointKey = (u64, u64);

fn key(p: [f64; 2]) -> PointKey {
    (p[0].to_bits(), p[1].to_bits())
}

/// Edges separating a wire from the iron, as unordered coordinate pairs.
fn interface_edges(mesh: &Mesh<f64>) -> HashSet<(PointKey, PointKey)> {
    let mut owner: BTreeMap<(usize, usize), i32> = BTreeMap::new();
    let mut out = HashSet::new();
    for (tri, &reg) in mesh.triangles().iter().zip(mesh.regions()) {
        for m in 0..3 {
            let (a, b) = (tri[m], tri[(m + 1) % 3]);
            let e = (a.min(b), a.max(b));
            match owner.get(&e) {
                Some(&other) if other != reg => {
                    let (p, q) = (key(mesh.vertices()[e.0]), key(mesh.vertices()[e.1]));
                    out.insert((p.min(q), p.max(q)));
                }
                _ => {
                    owner.insert(e, reg);
                }
            }
        }
    }
    out
}

/// Level-0 disc mesh with wire regions tagged by centroid and the wire
/// interface vertices moved onto the wire circles.
fn disc_base() -> Result<Mesh<f64>> {
    let mesh = generate_disc(DISC_RADIUS, DISC_BASE_RINGS)?.with_regions(|_, c| {
        for (tag, centre) in wire_centres() {
            if (c[0] - centre[0]).hypot(c[1] - centre[1]) < WIRE_RADIUS {
                return tag;
            }
        }
        IRON
    });
    let mut on_interface = vec![None; mesh.num_vertices()];
    for (tri, &reg) in mesh.triangles().iter().zip(mesh.regions()) {
        if reg != IRON {
            for &v in tri {
                on_interface[v] = Some(reg);
            }
        }
    }
    // only vertices shared with iron lie on the interface
    let mut touches_iron = vec![false; mesh.num_vertices()];
    for (tri, &reg) in mesh.triangles().iter().zip(mesh.regions()) {
        if reg == IRON {
            for &v in tri {
                touches_iron[v] = true;
            }
        }
    }
    let centre_of = |tag: i32| wire_centres().into_iter().find(|w| w.0 == tag).map(|w| w.1);
    let vertices: Vec<[f64; 2]> = mesh
        .vertices()
        .iter()
        .enumerate()
        .map(|(v, &p)| match (on_interface[v], touches_iron[v]) {
            (Some(tag), true) => project_to_circle(centre_of(tag).expect("wire tag"), WIRE_RADIUS, p),
            _ => p,
        })
        .collect();
    match Mesh::new(
        vertices,
        mesh.triangles().to_vec(),
        mesh.regions().to_vec(),
        mesh.boundary_edges().to_vec(),
    ) {
        Ok(m) => Ok(m),
        Err(e) => {
            log::warn!("wire interface snapping rejected ({e}); using the unsnapped mesh");
            Ok(mesh)
        }
    }
}

/// Uniform refinement that keeps new vertices on the outer circle and on
/// the wire interfaces.
fn refine_disc(mesh: &Mesh<f64>) -> Mesh<f64> {
    let iface = interface_edges(mesh);
    mesh.refine_uniform_with(|p, q, mid| {
        if on_circle([0.0, 0.0], DISC_RADIUS, p) && on_circle([0.0, 0.0], DISC_RADIUS, q) {
            return project_to_circle([0.0, 0.0], DISC_RADIUS, mid);
        }
        let (kp, kq) = (key(p), key(q));
        if iface.contains(&(kp.min(kq), kp.max(kq))) {
            for (_, c) in wire_centres() {
                if on_circle(c, WIRE_RADIUS, p) && on_circle(c, WIRE_RADIUS, q) {
                    return project_to_circle(c, WIRE_RADIUS, mid);
                }
            }
        }
        mid
    })
}

pub fn disc_mesh(level: usize) -> Result<Mesh<f64>> {
    let mut mesh = disc_base()?;
    for _ in 0..level {
        mesh = refine_disc(&mesh);
    }
    Ok(mesh)
}

/// 2D cross-section of a cylinder with two counter-current copper wires in
/// iron; `b . n = 0` on the rim.
pub fn two_wire_disc() -> Benchmark {
    let nu0 = vacuum_reluctivity::<f64>();
    let copper: SharedLaw<f64> = Arc::new(LinearIsotropic::new(nu0).expect("positive nu0"));
    Benchmark {
        name: "two_wire_disc".into(),
        description: "disc R = 0.1 m, wires r = 0.025 m at (0, +-0.05) m with j_s = +-1e5, Brauer iron".into(),
        error_mode: ErrorMode::SuccessiveRefinement,
        default_degree: 1,
        default_levels: 3,
        mesh: Arc::new(disc_mesh),
        laws: BTreeMap::from([(IRON, brauer()), (WIRE_PLUS, Arc::clone(&copper)), (WIRE_MINUS, copper)]),
        source: Source::RegionDensity(BTreeMap::from([
            (WIRE_PLUS, WIRE_CURRENT_DENSITY),
            (WIRE_MINUS, -WIRE_CURRENT_DENSITY),
        ])),
        dirichlet: vec![1],
        exact_flux: None,
        map: None,
    }
}

pub const PM_SIDE: f64 = 0.08;
pub const PM_CELLS: usize = 32;
pub const PM_REMANENCE: f64 = 1.0;
pub const PM_IRON: i32 = 1;
pub const PM_AIR: i32 = 6;
const PM_YOKE: usize = 2;
const PM_GAP: usize = 2;
const PM_MAGNET_DEPTH: usize = 4;
const PM_MAGNET_WIDTH: usize = 12;

/// Magnet tags with the direction of `m`, top/right/bottom/left.
/// Radial magnetization alternating out/in gives four poles.
const PM_MAGNETS: [(i32, [f64; 2]); 4] = [(2, [0.0, 1.0]), (3, [-1.0, 0.0]), (4, [0.0, -1.0]), (5, [1.0, 0.0])];

/// Region of grid cell `(i, j)`: stator frame, air gap, then the rotor core
/// carrying one surface magnet per side.
fn pm_region(i: usize, j: usize) -> i32 {
    let n = PM_CELLS;
    let depth = i.min(j).min(n - 1 - i).min(n - 1 - j);
    if depth < PM_YOKE {
        return PM_IRON;
    }
    if depth < PM_YOKE + PM_GAP {
        return PM_AIR;
    }
    if depth >= PM_YOKE + PM_GAP + PM_MAGNET_DEPTH {
        return PM_IRON;
    }
    let span = (n - PM_MAGNET_WIDTH) / 2..(n + PM_MAGNET_WIDTH) / 2;
    let side = if span.contains(&i) && j >= n / 2 {
        0
    } else if span.contains(&j) && i >= n / 2 {
        1
    } else if span.contains(&i) {
        2
    } else if span.contains(&j) {
        3
    } else {
        return PM_IRON;
    };
    PM_MAGNETS[side].0
}

/// Square stator/rotor cross-section with four surface magnets and no
/// impressed current. `remanence` scales `m = nu0 * remanence * direction`.
pub fn pm_toy_with_remanence(remanence: f64) -> Benchmark {
    let nu0 = vacuum_reluctivity::<f64>();
    let mut laws: BTreeMap<i32, SharedLaw<f64>> = BTreeMap::from([
        (PM_IRON, brauer()),
        (PM_AIR, Arc::new(LinearIsotropic::new(nu0).expect("positive nu0")) as SharedLaw<f64>),
    ]);
    for (tag, d) in PM_MAGNETS {
        let m = [nu0 * remanence * d[0], nu0 * remanence * d[1]];
        laws.insert(tag, Arc::new(PermanentMagnet::new(nu0, m).expect("positive nu0")));
    }
    let cell = PM_SIDE / PM_CELLS as f64;
    Benchmark {
        name: "pm_toy".into(),
        description: "0.08 m square: Brauer stator and rotor, 5 mm air gap, four radially magnetized 1 T magnets".into(),
        error_mode: ErrorMode::SuccessiveRefinement,
        default_degree: 1,
        default_levels: 2,
        mesh: Arc::new(move |level| {
            let base = generate_rectangle(PM_CELLS, PM_CELLS, [0.0, PM_SIDE], [0.0, PM_SIDE])?
                .with_regions(|_, c| pm_region((c[0] / cell).floor() as usize, (c[1] / cell).floor() as usize));
            Ok(refine_times(base, level))
        }),
        laws,
        source: Source::None,
        dirichlet: vec![1],
        exact_flux: None,
        map: None,
    }
}

pub fn pm_toy() -> Benchmark {
    pm_toy_with_remanence(PM_REMANENCE)
}

pub const ANNULUS_R_INNER: f64 = 0.5;
pub const ANNULUS_R_OUTER: f64 = 1.0;
/// Source `h_s' = ANNULUS_SOURCE * (-y, x)` on the physical domain.
pub const ANNULUS_SOURCE: f64 = 1e3;

fn annulus_tensor() -> [[f64; 2]; 2] {
    let nu0 = vacuum_reluctivity::<f64>();
    [[1.5 * nu0, 0.3 * nu0], [0.3 * nu0, nu0]]
}

fn annulus_map() -> QuarterAnnulus<f64> {
    QuarterAnnulus::new(ANNULUS_R_INNER, ANNULUS_R_OUTER).expect("valid radii")
}

/// Probe points used to check orientation and rescale bounds of pulled-back laws.
fn unit_square_probe() -> Vec<[f64; 2]> {
    let n = 16;
    (0..=n)
        .flat_map(|i| (0..=n).map(move |j| [i as f64 / n as f64, j as f64 / n as f64]))
        .collect()
}

/// Quarter annulus with a constant anisotropic law, solved on the unit
/// square through the generic pull-back.
pub fn annulus_mapped() -> Benchmark {
    let map: SharedMap<f64> = Arc::new(annulus_map());
    let law: SharedLaw<f64> = Arc::new(AnisotropicLinear::new(annulus_tensor()).expect("SPD tensor"));
    let pulled = pullback_material(Arc::clone(&map), law, &unit_square_probe()).expect("orientation preserving");
    let hs = pullback_source(Arc::clone(&map), Arc::new(|x: [f64; 2]| [-ANNULUS_SOURCE * x[1], ANNULUS_SOURCE * x[0]]));
    Benchmark {
        name: "annulus_mapped".into(),
        description: "quarter annulus r in [0.5, 1] via pull-back to the unit square, anisotropic linear law".into(),
        error_mode: ErrorMode::SuccessiveRefinement,
        default_degree: 1,
        default_levels: 3,
        mesh: Arc::new(|level| Ok(refine_times(generate_unit_square(8)?, level))),
        laws: BTreeMap::from([(1, Arc::new(pulled) as SharedLaw<f64>)]),
        source: Source::Field(hs),
        dirichlet: vec![1],
        exact_flux: None,
        map: Some(map),
    }
}

/// The same problem as [`annulus_mapped`], written directly in polar
/// coordinates: with `F = R(theta) D`, `D = diag(r', r theta')`, the
/// reference tensor is `D R^T N R D / J` and the source `(0, c r^2 theta')`.
pub fn annulus_direct() -> Benchmark {
    let n = annulus_tensor();
    let dr = ANNULUS_R_OUTER - ANNULUS_R_INNER;
    let tensor = Arc::new(move |x: [f64; 2]| {
        let r = ANNULUS_R_INNER + dr * x[0];
        let th = FRAC_PI_2 * x[1];
        let (s, c) = th.sin_cos();
        // R^T N R
        let m00 = c * c * n[0][0] + 2.0 * s * c * n[0][1] + s * s * n[1][1];
        let m01 = (c * c - s * s) * n[0][1] + s * c * (n[1][1] - n[0][0]);
        let m11 = s * s * n[0][0] - 2.0 * s * c * n[0][1] + c * c * n[1][1];
        let d = [dr, r * FRAC_PI_2];
        let j = d[0] * d[1];
        [[d[0] * d[0] * m00 / j, d[0] * d[1] * m01 / j], [d[1] * d[0] * m01 / j, d[1] * d[1] * m11 / j]]
    });
    let law = LinearTensorField::new(tensor, None::<Bounds<f64>>);
    let source: VectorFn<f64> = Arc::new(move |x: [f64; 2]| {
        let r = ANNULUS_R_INNER + dr * x[0];
        [0.0, ANNULUS_SOURCE * r * r * FRAC_PI_2]
    });
    Benchmark {
        name: "annulus_direct".into(),
        description: "quarter annulus assembled directly in polar coordinates".into(),
        error_mode: ErrorMode::SuccessiveRefinement,
        default_degree: 1,
        default_levels: 3,
        mesh: Arc::new(|level| Ok(refine_times(generate_unit_square(8)?, level))),
        laws: BTreeMap::from([(1, Arc::new(law) as SharedLaw<f64>)]),
        source: Source::Field(source),
        dirichlet: vec![1],
        exact_flux: None,
        map: Some(Arc::new(annulus_map())),
    }
}

/// The four catalog benchmarks.
pub fn builtin_benchmarks() -> Vec<Benchmark> {
    vec![manufactured(), two_wire_disc(), pm_toy(), annulus_mapped()]
}

pub fn find_benchmark(name: &str) -> Result<Benchmark> {
    match name {
        "manufactured" => Ok(manufactured()),
        "two_wire_disc" => Ok(two_wire_disc()),
        "pm_toy" => Ok(pm_toy()),
        "annulus_mapped" => Ok(annulus_mapped()),
        "annulus_direct" => Ok(annulus_direct()),
        _ => Err(Error::Config(format!(
            "unknown benchmark '{name}' (available: manufactured, two_wire_disc, pm_toy, annulus_mapped)"
        ))),
    }
}

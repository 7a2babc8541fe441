use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::backend::{PlaceRequest, PlacementAction, PlacementPolicy, ReceptacleGate};
use super::scorer::scene_summary;
use super::PolicyError;
use crate::geometry::{
    check_collision, detect_placeable_surfaces, surface_membership, Aabb, PlaceableSurface, PosedMesh, SurfaceParams,
    TriangleMesh, Vec3,
};
use crate::action::id_stem;
use crate::index::{AssetIndex, AssetRecord};
use crate::scene::{Category, MeshResolver, Placement, Scene, SceneElement, BOUNDS_TOL, COLLISION_TOL};
use crate::view::{Camera, Renderer};

/// Default receptacle test: some placeable surface of at least `min_area`
/// sits at least `min_height` above the mesh's lowest point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricGate {
    pub min_area: f64,
    pub min_height: f64,
    pub surfaces: SurfaceParams,
}

impl Default for GeometricGate {
    fn default() -> Self {
        Self {
            min_area: 0.01,
            min_height: 0.1,
            surfaces: SurfaceParams::default(),
        }
    }
}

impl GeometricGate {
    pub fn check_mesh(&self, mesh: &TriangleMesh) -> bool {
        let floor = mesh.aabb().min.z;
        detect_placeable_surfaces(mesh, &self.surfaces)
            .iter()
            .any(|s| s.area >= self.min_area && s.height_z - floor >= self.min_height)
    }
}

impl ReceptacleGate for GeometricGate {
    fn is_receptacle(&self, _asset: &AssetRecord, mesh: &TriangleMesh) -> bool {
        self.check_mesh(mesh)
    }
}

pub fn is_receptacle(asset: &AssetRecord, mesh: &TriangleMesh, gate: &dyn ReceptacleGate) -> bool {
    gate.is_receptacle(asset, mesh)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssetLoopConfig {
    pub seed: u64,
    pub max_placements: usize,
    pub max_attempts: usize,
    pub width: u32,
    pub height: u32,
    /// Radians.
    pub vertical_fov: f64,
    /// Camera distance as a multiple of the bounding-sphere radius.
    pub radius_factor: f64,
    /// Elevation band, radians.
    pub min_elevation: f64,
    pub max_elevation: f64,
    pub surfaces: SurfaceParams,
    /// Height tolerance (m) between a hit point and its surface.
    pub surface_z_tol: f64,
    pub collision_tol: f64,
}

impl Default for AssetLoopConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            max_placements: 10,
            max_attempts: 30,
            width: 256,
            height: 256,
            vertical_fov: 60f64.to_radians(),
            radius_factor: 2.2,
            min_elevation: 15f64.to_radians(),
            max_elevation: 75f64.to_radians(),
            surfaces: SurfaceParams::default(),
            surface_z_tol: 0.01,
            collision_tol: COLLISION_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum RoundOutcome {
    Placed {
        element: String,
        asset: String,
        /// Element whose surface carries the new item.
        support: String,
        position: [f64; 3],
    },
    BackendFailure {
        message: String,
    },
    PixelOutsideImage,
    /// The ray missed every placeable surface; `hit` names what it struck.
    OffSurface {
        hit: Option<String>,
    },
    RetrievalMiss,
    Collision {
        with: String,
    },
    OutOfBounds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacementRound {
    pub attempt: usize,
    pub camera: Camera,
    pub action: Option<PlacementAction>,
    pub outcome: RoundOutcome,
}

#[derive(Clone, Debug)]
pub struct AssetRun {
    pub scene: Scene,
    pub rounds: Vec<PlacementRound>,
}

impl AssetRun {
    pub fn successes(&self) -> usize {
        self.rounds.iter().filter(|r| matches!(r.outcome, RoundOutcome::Placed { .. })).count()
    }

    pub fn to_jsonl(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for r in &self.rounds {
            out.extend(serde_json::to_vec(r).expect("round serializes"));
            out.push(b'\n');
        }
        out
    }
}

/// Camera on the upper hemisphere around `target`.
pub fn hemisphere_camera(target: &Aabb, rng: &mut impl Rng, cfg: &AssetLoopConfig) -> Camera {
    let c = target.center();
    let r = cfg.radius_factor * target.bounding_radius().max(1e-3);
    let azimuth = rng.gen_range(0.0..TAU);
    let elevation = rng.gen_range(cfg.min_elevation..=cfg.max_elevation);
    let dir = Vec3::new(elevation.cos() * azimuth.cos(), elevation.cos() * azimuth.sin(), elevation.sin());
    Camera {
        position: c + dir * r,
        look_at: c,
        up: Vec3::z(),
        vertical_fov: cfg.vertical_fov,
        width: cfg.width,
        height: cfg.height,
    }
}

/// Placeable surfaces of every placement of `id`, in world coordinates.
fn element_surfaces(scene: &Scene, id: &str, resolver: &dyn MeshResolver, params: &SurfaceParams) -> Result<Vec<PlaceableSurface>, PolicyError> {
    let el = scene.element(id).ok_or_else(|| PolicyError::UnknownElement(id.into()))?;
    let mesh = scene.element_mesh(id, el, resolver)?;
    Ok(el
        .placements
        .iter()
        .flat_map(|p| detect_placeable_surfaces(&mesh.transformed(&p.transform()), params))
        .collect())
}

/// Recursive small-object placement on `receptacle` and on whatever has
/// already been placed on it.
pub fn run_asset_loop(
    scene: &Scene,
    receptacle: &str,
    prompt: &str,
    policy: &dyn PlacementPolicy,
    assets: &AssetIndex,
    gate: &dyn ReceptacleGate,
    cfg: &AssetLoopConfig,
) -> Result<AssetRun, PolicyError> {
    let el = scene.element(receptacle).ok_or_else(|| PolicyError::UnknownElement(receptacle.into()))?;
    let mesh = scene.element_mesh(receptacle, el, assets)?;
    let record = el.asset_ref().and_then(|a| assets.get(a)).cloned().unwrap_or_else(|| AssetRecord {
        id: receptacle.into(),
        description: el.metadata.get("description").cloned().unwrap_or_default(),
        tags: Vec::new(),
        mesh_path: Default::default(),
        half_extents: (mesh.aabb().extents() * 0.5).into(),
        receptacle_hint: None,
    });
    if !gate.is_receptacle(&record, &mesh) {
        return Err(PolicyError::NotReceptacle(receptacle.into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut scene = scene.clone();
    let mut owners: Vec<String> = vec![receptacle.to_string()];
    let mut surfaces: BTreeMap<String, Vec<PlaceableSurface>> = BTreeMap::new();
    surfaces.insert(receptacle.into(), element_surfaces(&scene, receptacle, assets, &cfg.surfaces)?);
    let mut rounds = Vec::new();
    let mut successes = 0;

    for attempt in 0..cfg.max_attempts {
        if successes >= cfg.max_placements {
            break;
        }
        let target = owners
            .iter()
            .map(|o| scene.element_aabb(o, assets))
            .collect::<Result<Vec<_>, _>>()?
            .iter()
            .fold(Aabb::empty(), |a, b| a.union(b));
        let camera = hemisphere_camera(&target, &mut rng, cfg);
        let renderer = Renderer::filtered(&scene, assets, |id| owners.iter().any(|o| o == id))?;
        let maps = renderer.render(&camera);
        let summary = scene_summary(&scene);
        let request = PlaceRequest {
            prompt,
            attempt,
            receptacle_summary: &summary,
            camera: &camera,
            maps: &maps,
        };

        let mut round = PlacementRound {
            attempt,
            camera,
            action: None,
            outcome: RoundOutcome::RetrievalMiss,
        };
        let answer = policy
            .describe(&request)
            .and_then(|d| policy.locate(&request, &d).map(|p| (d, p)));
        let (description, pixel) = match answer {
            Ok(a) => a,
            Err(e) => {
                round.outcome = RoundOutcome::BackendFailure { message: e.to_string() };
                rounds.push(round);
                continue;
            }
        };
        round.action = Some(PlacementAction {
            description: description.clone(),
            pixel,
        });
        round.outcome = place(&mut scene, &renderer, &surfaces, &description, pixel, &camera, assets, cfg)?;
        if let RoundOutcome::Placed { element, .. } = &round.outcome {
            successes += 1;
            surfaces.insert(element.clone(), element_surfaces(&scene, element, assets, &cfg.surfaces)?);
            owners.push(element.clone());
        }
        rounds.push(round);
    }
    Ok(AssetRun { scene, rounds })
}

#[allow(clippy::too_many_arguments)]
fn place(
    scene: &mut Scene,
    renderer: &Renderer,
    surfaces: &BTreeMap<String, Vec<PlaceableSurface>>,
    description: &str,
    pixel: [f64; 2],
    camera: &Camera,
    assets: &AssetIndex,
    cfg: &AssetLoopConfig,
) -> Result<RoundOutcome, PolicyError> {
    let [u, v] = pixel;
    if !(u.is_finite() && v.is_finite() && camera.in_image(u, v)) {
        return Ok(RoundOutcome::PixelOutsideImage);
    }
    let Some((owner, hit)) = renderer.cast(&camera.pixel_to_ray(u, v)) else {
        return Ok(RoundOutcome::OffSurface { hit: None });
    };
    let point = hit.hit.point;
    let supported = surfaces
        .get(owner)
        .and_then(|s| surface_membership(s, &point, 0.0, cfg.surface_z_tol).map(|i| &s[i]));
    let Some(surface) = supported else {
        return Ok(RoundOutcome::OffSurface { hit: Some(owner.to_string()) });
    };
    let support = owner.to_string();
    let Some(best) = assets.retrieve(description, 1).into_iter().next() else {
        return Ok(RoundOutcome::RetrievalMiss);
    };
    let mesh = assets.mesh(&best.id).expect("indexed asset has a mesh");
    let position = Vec3::new(point.x, point.y, surface.height_z);
    let placement = Placement::at(position);
    let posed = PosedMesh::new(mesh, placement.transform());

    if !scene.bounds.contains_box(&posed.world_aabb(), BOUNDS_TOL) {
        return Ok(RoundOutcome::OutOfBounds);
    }
    let others = scene.instances(assets, Some(Category::Objects))?;
    let meshes: Vec<PosedMesh> = others.iter().map(|i| i.posed.clone()).collect();
    let report = check_collision(&posed, &meshes, cfg.collision_tol);
    if let Some(first) = report.hits.first() {
        return Ok(RoundOutcome::Collision {
            with: others[first.index].element_id.clone(),
        });
    }

    let id = scene.fresh_id(&id_stem(description));
    let mut element = SceneElement::asset(Category::Objects, best.id.clone(), placement);
    element.metadata.insert("description".into(), description.into());
    element.metadata.insert("support".into(), support.clone());
    scene.insert_element(id.clone(), element)?;
    Ok(RoundOutcome::Placed {
        element: id,
        asset: best.id,
        support,
        position: [position.x, position.y, position.z],
    })
}

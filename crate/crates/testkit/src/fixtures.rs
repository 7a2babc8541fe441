use std::collections::BTreeMap;
use std::sync::Arc;

use roomforge::geometry::{shapes, Aabb, TriangleMesh, Vec3};
use roomforge::index::{AssetIndex, AssetRecord, MaterialIndex, MaterialRecord};
use roomforge::room::{build_room, RoomLayoutSpec};
use roomforge::scene::{Category, Placement, Scene, SceneElement};

pub type Meshes = BTreeMap<String, Arc<TriangleMesh>>;

/// Resolver holding a unit cube centered on the origin under `"cube"`.
pub fn cube_meshes() -> Meshes {
    let mut m = Meshes::new();
    m.insert("cube".into(), Arc::new(shapes::axis_box(Vec3::repeat(-0.5), Vec3::repeat(0.5))));
    m
}

/// Scene with unit cubes centered at `centers`, ids `cube_1`, `cube_2`, ...
pub fn cube_scene(bounds: Aabb, centers: &[Vec3]) -> Scene {
    let mut scene = Scene::new("cubes", bounds);
    for (i, c) in centers.iter().enumerate() {
        scene
            .insert_element(format!("cube_{}", i + 1), SceneElement::asset(Category::Objects, "cube", Placement::at(*c)))
            .expect("fresh id");
    }
    scene
}

/// `(id, description, mesh)` for the toy asset corpus.
pub fn toy_asset_meshes() -> Vec<(&'static str, &'static str, TriangleMesh)> {
    let fbox = |x, y, z| shapes::footprint_box(Vec3::new(x, y, z));
    vec![
        ("red_chair", "red wooden chair", fbox(0.25, 0.25, 0.45)),
        ("blue_sofa", "blue fabric sofa", fbox(0.9, 0.4, 0.4)),
        ("oak_table", "oak dining table", shapes::table(1.2, 0.8, 0.75, 0.04, 0.04)),
        ("bookcase", "tall wooden bookcase", shapes::bookcase(0.8, 0.3, &[0.3, 0.7, 1.1], 0.02)),
        ("red_book", "small red book", fbox(0.1, 0.15, 0.02)),
        ("pen", "black ballpoint pen", fbox(0.07, 0.01, 0.005)),
        ("floor_lamp", "brass floor lamp", fbox(0.15, 0.15, 0.8)),
        ("green_plant", "green potted plant", fbox(0.2, 0.2, 0.3)),
    ]
}

pub fn toy_assets() -> AssetIndex {
    AssetIndex::new(
        toy_asset_meshes()
            .into_iter()
            .map(|(id, description, mesh)| {
                let h = mesh.aabb().extents() * 0.5;
                let record = AssetRecord {
                    id: id.into(),
                    description: description.into(),
                    tags: Vec::new(),
                    mesh_path: format!("meshes/{id}.obj").into(),
                    half_extents: [h.x, h.y, h.z],
                    receptacle_hint: None,
                };
                (record, mesh)
            })
            .collect(),
    )
    .expect("toy assets are valid")
}

pub const TOY_MATERIALS: [(&str, &str); 5] = [
    ("oak_floor", "light oak wood floor"),
    ("white_plaster", "white plaster wall"),
    ("red_velvet", "red velvet fabric"),
    ("blue_tile", "blue ceramic tile"),
    ("walnut", "dark walnut wood"),
];

pub fn toy_materials() -> MaterialIndex {
    MaterialIndex::new(
        TOY_MATERIALS
            .iter()
            .map(|(id, d)| MaterialRecord {
                id: (*id).into(),
                description: (*d).into(),
                tags: Vec::new(),
            })
            .collect(),
    )
    .expect("toy materials are valid")
}

/// Every description in the toy corpus, assets first.
pub fn toy_corpus() -> Vec<&'static str> {
    toy_asset_meshes()
        .into_iter()
        .map(|a| a.1)
        .chain(TOY_MATERIALS.iter().map(|m| m.1))
        .collect()
}

/// Empty 4 x 5 x 2.8 m shell.
pub fn demo_room() -> Scene {
    build_room(&RoomLayoutSpec::rectangle(4.0, 5.0, 2.8)).expect("demo layout is valid")
}

/// The demo room with the oak table as `table_1` in the middle.
pub fn table_scene() -> Scene {
    let mut scene = demo_room();
    scene
        .insert_element("table_1", SceneElement::asset(Category::Objects, "oak_table", Placement::at(Vec3::new(2.0, 2.5, 0.0))))
        .expect("fresh id");
    scene
}

//! Offline demo data: a small asset corpus, a material list, a room layout
//! and scripted policies for both loops.

use std::path::Path;

use roomforge::geometry::{shapes, TriangleMesh, Vec3};
use roomforge::index::{AssetRecord, MaterialRecord};
use roomforge::policy::{ScriptedAnswer, Target};
use roomforge::room::{RoomLayoutSpec, RoomMaterials};

use crate::error::Result;
use crate::out;

pub const PROMPT: &str = "a reading room with an oak dining table, a tall wooden bookcase, a red wooden chair, \
a brass floor lamp and a green potted plant on a light oak wood floor with white plaster walls";

pub const ASSET_PROMPT: &str = "a few small red books on the table";

fn assets() -> Vec<(&'static str, &'static str, &'static [&'static str], TriangleMesh)> {
    let fbox = |x, y, z| shapes::footprint_box(Vec3::new(x, y, z));
    vec![
        ("red_chair", "red wooden chair", &["seating"], fbox(0.25, 0.25, 0.45)),
        ("blue_sofa", "blue fabric sofa", &["seating"], fbox(0.9, 0.4, 0.4)),
        ("oak_table", "oak dining table", &["furniture"], shapes::table(1.2, 0.8, 0.75, 0.04, 0.04)),
        ("bookcase", "tall wooden bookcase", &["shelf"], shapes::bookcase(0.8, 0.3, &[0.3, 0.7, 1.1], 0.02)),
        ("red_book", "small red book", &[], fbox(0.1, 0.15, 0.02)),
        ("pen", "black ballpoint pen", &[], fbox(0.07, 0.01, 0.005)),
        ("floor_lamp", "brass floor lamp", &["lighting"], fbox(0.15, 0.15, 0.8)),
        ("green_plant", "green potted plant", &[], fbox(0.2, 0.2, 0.3)),
    ]
}

const MATERIALS: [(&str, &str); 5] = [
    ("oak_floor", "light oak wood floor"),
    ("white_plaster", "white plaster wall"),
    ("red_velvet", "red velvet fabric"),
    ("blue_tile", "blue ceramic tile"),
    ("walnut", "dark walnut wood"),
];

/// Two candidates per step over ten steps.
const SCENE_SCRIPT: [&str; 20] = [
    "add_object(\"oak dining table\", position=(2.0, 2.5, 0.0))",
    "add_object(\"blue fabric sofa\", position=(2.0, 0.6, 0.0))",
    "add_object(\"tall wooden bookcase\", position=(0.6, 4.7, 0.0))",
    "add_object(\"green potted plant\", position=(3.6, 4.6, 0.0))",
    "add_object(\"red wooden chair\", position=(2.0, 1.5, 0.0))",
    "add_object(\"red wooden chair\", position=(1.0, 2.5, 0.0), rotation=1.5708)",
    "add_object(\"brass floor lamp\", position=(3.5, 0.5, 0.0))",
    "add_object(\"blue fabric sofa\", position=(2.0, 4.4, 0.0))",
    "add_object(\"green potted plant\", position=(3.6, 4.6, 0.0))",
    "add_object(\"green potted plant\", position=(0.4, 0.4, 0.0))",
    "m = retrieve_material(\"light oak wood floor\")\nset_material(\"floors\", m)",
    "m = retrieve_material(\"blue ceramic tile\")\nset_material(\"floors\", m)",
    "m = retrieve_material(\"white plaster wall\")\nset_material(\"walls\", m)",
    "add_light(\"point\", 800, (1.0, 0.95, 0.9), position=(2.0, 2.5, 2.5))",
    "add_object(\"red wooden chair\", position=(2.0, 3.5, 0.0), rotation=3.1416)",
    "add_object(\"oak dining table\", position=(2.0, 2.5, 0.0))",
    "add_light(\"area\", 400, (1.0, 1.0, 1.0), position=(2.0, 2.5, 2.75), extent=(1.0, 1.0))",
    "add_object(\"tall wooden bookcase\", position=(3.5, 2.5, 0.0), rotation=1.5708",
    "add_object(\"brass floor lamp\", position=(0.4, 3.6, 0.0))",
    "add_object(\"green potted plant\", position=(3.6, 1.4, 0.0))",
];

/// Eight spots across a table centered at (2, 2.5) with its top at 0.75 m,
/// then two books stacked on the first and last.
fn asset_script() -> Vec<ScriptedAnswer> {
    let mut spots = Vec::new();
    for dy in [-0.2, 0.2] {
        for dx in [-0.45, -0.15, 0.15, 0.45] {
            spots.push([2.0 + dx, 2.5 + dy, 0.75]);
        }
    }
    spots.push([1.55, 2.3, 0.79]);
    spots.push([2.45, 2.7, 0.79]);
    spots
        .into_iter()
        .map(|p| ScriptedAnswer {
            description: "small red book".into(),
            target: Target::World(p),
        })
        .collect()
}

pub fn layout() -> RoomLayoutSpec {
    RoomLayoutSpec {
        materials: RoomMaterials {
            floors: Some("light oak wood floor".into()),
            walls: Some("white plaster wall".into()),
            ceilings: Some("white plaster wall".into()),
        },
        ..RoomLayoutSpec::rectangle(4.0, 5.0, 2.8)
    }
}

/// Writes `assets.jsonl`, `materials.jsonl`, `meshes/*.obj`, `layout.json`,
/// `prompt.txt`, `scene_policy.txt` and `asset_policy.jsonl` under `dir`.
pub fn write(dir: &Path) -> Result<()> {
    let mut records = Vec::new();
    for (id, description, tags, mesh) in assets() {
        let h = mesh.aabb().extents() * 0.5;
        let mesh_path = format!("meshes/{id}.obj");
        out::write_atomic(&dir.join(&mesh_path), mesh.to_obj().as_bytes())?;
        records.push(AssetRecord {
            id: id.into(),
            description: description.into(),
            tags: tags.iter().map(|t| t.to_string()).collect(),
            mesh_path: mesh_path.into(),
            half_extents: [h.x, h.y, h.z],
            receptacle_hint: None,
        });
    }
    out::write_jsonl(&dir.join("assets.jsonl"), &records)?;
    let materials: Vec<MaterialRecord> = MATERIALS
        .iter()
        .map(|(id, d)| MaterialRecord {
            id: id.to_string(),
            description: d.to_string(),
            tags: Vec::new(),
        })
        .collect();
    out::write_jsonl(&dir.join("materials.jsonl"), &materials)?;
    out::write_json(&dir.join("layout.json"), &layout())?;
    out::write_atomic(&dir.join("prompt.txt"), format!("{PROMPT}\n").as_bytes())?;
    out::write_atomic(&dir.join("asset_prompt.txt"), format!("{ASSET_PROMPT}\n").as_bytes())?;
    out::write_atomic(&dir.join("scene_policy.txt"), (SCENE_SCRIPT.join("\n---\n") + "\n").as_bytes())?;
    out::write_jsonl(&dir.join("asset_policy.jsonl"), &asset_script())?;
    Ok(())
}

use std::collections::BTreeMap;
use std::fmt::Write;

use super::backend::{BackendError, Scorer};
use crate::index::{AssetIndex, MaterialIndex, TextIndex};
use crate::scene::{ElementSource, Scene};

/// Deterministic stand-in for an image-text alignment model: TF-IDF cosine
/// between the prompt and the words describing the scene's contents.
#[derive(Clone, Debug)]
pub struct LexicalScorer {
    index: TextIndex,
    asset_descriptions: BTreeMap<String, String>,
}

impl LexicalScorer {
    /// Document frequencies from the asset and material descriptions.
    pub fn new(assets: &AssetIndex, materials: &MaterialIndex) -> Self {
        let docs = assets
            .records()
            .iter()
            .map(|r| (r.id.clone(), r.description.clone()))
            .chain(materials.records().iter().map(|r| (r.id.clone(), r.description.clone())));
        Self {
            index: TextIndex::new(docs),
            asset_descriptions: assets.records().iter().map(|r| (r.id.clone(), r.description.clone())).collect(),
        }
    }

    /// No corpus: every term weighs the same.
    pub fn unweighted() -> Self {
        Self {
            index: TextIndex::new(Vec::<(String, String)>::new()),
            asset_descriptions: BTreeMap::new(),
        }
    }

    /// Material descriptions, retrieved-asset descriptions and light kinds,
    /// in element id order then light id order.
    pub fn scene_text(&self, scene: &Scene) -> String {
        let mut words: Vec<&str> = Vec::new();
        for el in scene.elements.values() {
            if let Some(m) = &el.material {
                words.push(&m.description);
            }
            if let ElementSource::Asset(a) = &el.source {
                match self.asset_descriptions.get(a) {
                    Some(d) => words.push(d),
                    None => words.extend(el.metadata.get("description").map(String::as_str)),
                }
            }
        }
        for light in scene.lights.values() {
            words.push(light.kind.as_str());
        }
        words.join(" ")
    }

    pub fn score_text(&self, scene: &Scene, prompt: &str) -> f64 {
        self.index.similarity(prompt, &self.scene_text(scene))
    }
}

impl Scorer for LexicalScorer {
    fn score(&self, scene: &Scene, prompt: &str) -> Result<f64, BackendError> {
        Ok(self.score_text(scene, prompt))
    }
}

/// Plain-text digest of a scene for policy prompts: one line per element
/// placement and per light, millimeter precision.
pub fn scene_summary(scene: &Scene) -> String {
    let mut out = String::new();
    let (lo, hi) = (scene.bounds.min, scene.bounds.max);
    let _ = writeln!(
        out,
        "bounds [{:.3}, {:.3}, {:.3}] .. [{:.3}, {:.3}, {:.3}]",
        lo.x, lo.y, lo.z, hi.x, hi.y, hi.z
    );
    for (id, el) in &scene.elements {
        let source = match &el.source {
            ElementSource::Asset(a) => format!("asset={a}"),
            ElementSource::Mesh(m) => format!("mesh={m}"),
        };
        let material = el.material.as_ref().map_or(String::new(), |m| format!(" material={:?}", m.description));
        for p in &el.placements {
            let _ = writeln!(
                out,
                "{id}: {} {source}{material} at ({:.3}, {:.3}, {:.3}) rot {:.3} scale ({:.3}, {:.3}, {:.3})",
                el.category,
                p.position.x,
                p.position.y,
                p.position.z,
                p.rotation_z,
                p.scale.x,
                p.scale.y,
                p.scale.z
            );
        }
    }
    for (id, l) in &scene.lights {
        let _ = writeln!(
            out,
            "{id}: {} light intensity {:.3} color ({:.3}, {:.3}, {:.3})",
            l.kind.as_str(), l.intensity, l.color[0], l.color[1], l.color[2]
        );
    }
    out
}

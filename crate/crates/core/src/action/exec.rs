//! Action-program interpreter.
//!
//! Statements run in order against a copy of the input scene. A statement
//! that cannot be applied is logged as skipped and leaves the scene as it
//! was; the rest of the program still runs.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::{ActionProgram, Statement, Value};
use crate::geometry::{check_collision, PosedMesh, Vec3};
use crate::index::{tokenize, AssetIndex, MaterialIndex};
use crate::scene::{
    normalize_angle, Category, Light, LightKind, MaterialAssignment, Placement, Scene, SceneElement,
    SceneError, BOUNDS_TOL, COLLISION_TOL,
};

/// What the collision/bounds gate does with a violating edit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateMode {
    /// Reject the statement.
    #[default]
    Enforce,
    /// Apply the edit and record the violation.
    LogOnly,
}

#[derive(Clone, Copy, Debug)]
pub struct ExecutionContext<'a> {
    pub assets: &'a AssetIndex,
    pub materials: &'a MaterialIndex,
    pub gate: GateMode,
    pub collision_tol: f64,
    pub bounds_tol: f64,
}

impl<'a> ExecutionContext<'a> {
    pub fn new(assets: &'a AssetIndex, materials: &'a MaterialIndex) -> Self {
        Self {
            assets,
            materials,
            gate: GateMode::Enforce,
            collision_tol: COLLISION_TOL,
            bounds_tol: BOUNDS_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Binding {
    Material { id: String, description: String },
    Element { id: String },
    Light { id: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", content = "detail", rename_all = "snake_case")]
pub enum SkipReason {
    UnknownFunction(String),
    UnknownElement(String),
    UnknownLight(String),
    UnboundIdentifier(String),
    InvalidArgument(String),
    RetrievalMiss(String),
    Collision(String),
    OutOfBounds(String),
    DuplicateId(String),
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkipReason::UnknownFunction(n) => write!(f, "unknown function {n}"),
            SkipReason::UnknownElement(id) => write!(f, "unknown element {id}"),
            SkipReason::UnknownLight(id) => write!(f, "unknown light {id}"),
            SkipReason::UnboundIdentifier(n) => write!(f, "unbound identifier {n}"),
            SkipReason::InvalidArgument(m) => write!(f, "invalid argument: {m}"),
            SkipReason::RetrievalMiss(q) => write!(f, "retrieval miss for {q:?}"),
            SkipReason::Collision(with) => write!(f, "collision with {with}"),
            SkipReason::OutOfBounds(id) => write!(f, "{id} out of bounds"),
            SkipReason::DuplicateId(id) => write!(f, "id {id} already in use"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Ok,
    Skipped { reason: SkipReason },
}

impl Outcome {
    pub fn is_ok(&self) -> bool {
        matches!(self, Outcome::Ok)
    }
}

type PlacementEdit = dyn Fn(&mut Placement, &Placement);

#[derive(Clone, Debug)]
pub struct ExecutionResult {
    pub scene: Scene,
    /// One per statement.
    pub outcomes: Vec<Outcome>,
    pub bindings: BTreeMap<String, Binding>,
    /// Gate violations let through in [`GateMode::LogOnly`], by statement.
    pub gate_log: Vec<(usize, SkipReason)>,
}

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("scene cannot be resolved: {0}")]
    Context(#[from] SceneError),
}

/// Runs `program` on a copy of `scene`.
pub fn execute(program: &ActionProgram, scene: &Scene, ctx: &ExecutionContext) -> Result<ExecutionResult, ExecError> {
    // Every existing mesh must resolve, or no gate decision is possible.
    scene.instances(ctx.assets, None)?;
    let mut run = Run {
        ctx,
        scene: scene.clone(),
        bindings: BTreeMap::new(),
        gate_log: Vec::new(),
        index: 0,
    };
    let mut outcomes = Vec::with_capacity(program.statements.len());
    for (i, st) in program.statements.iter().enumerate() {
        run.index = i;
        let outcome = match run.statement(st) {
            Ok(binding) => {
                if let (Some(name), Some(b)) = (&st.binding, binding) {
                    run.bindings.insert(name.clone(), b);
                }
                Outcome::Ok
            }
            Err(reason) => Outcome::Skipped { reason },
        };
        outcomes.push(outcome);
    }
    Ok(ExecutionResult {
        scene: run.scene,
        outcomes,
        bindings: run.bindings,
        gate_log: run.gate_log,
    })
}

type Step<T> = Result<T, SkipReason>;

/// Positional and keyword arguments matched against a parameter list.
struct Args<'v> {
    function: &'v str,
    values: BTreeMap<&'static str, &'v Value>,
}

impl<'v> Args<'v> {
    fn bind(st: &'v Statement, params: &[&'static str]) -> Step<Args<'v>> {
        let call = &st.call;
        let bad = |m: String| SkipReason::InvalidArgument(format!("{}: {m}", call.function));
        if call.positional.len() > params.len() {
            return Err(bad(format!("takes at most {} arguments", params.len())));
        }
        let mut values = BTreeMap::new();
        for (p, v) in params.iter().zip(&call.positional) {
            values.insert(*p, v);
        }
        for (k, v) in &call.keyword {
            let Some(p) = params.iter().find(|p| **p == k) else {
                return Err(bad(format!("unexpected argument {k}")));
            };
            if values.insert(*p, v).is_some() {
                return Err(bad(format!("argument {k} given twice")));
            }
        }
        Ok(Args {
            function: &call.function,
            values,
        })
    }

    fn bad(&self, m: impl fmt::Display) -> SkipReason {
        SkipReason::InvalidArgument(format!("{}: {m}", self.function))
    }

    fn get(&self, name: &str) -> Option<&'v Value> {
        self.values.get(name).copied()
    }

    fn require(&self, name: &str) -> Step<&'v Value> {
        self.get(name).ok_or_else(|| self.bad(format!("missing argument {name}")))
    }

    fn text(&self, name: &str) -> Step<Option<&'v str>> {
        match self.get(name) {
            None => Ok(None),
            Some(Value::Str(s)) if !s.trim().is_empty() => Ok(Some(s)),
            Some(Value::Str(_)) => Err(self.bad(format!("{name} must be non-empty"))),
            Some(_) => Err(self.bad(format!("{name} must be a string"))),
        }
    }

    fn number(&self, name: &str) -> Step<Option<f64>> {
        match self.get(name) {
            None => Ok(None),
            Some(Value::Number(x)) => Ok(Some(*x)),
            Some(_) => Err(self.bad(format!("{name} must be a number"))),
        }
    }

    fn vec3(&self, name: &str) -> Step<Option<Vec3>> {
        match self.get(name) {
            None => Ok(None),
            Some(Value::Tuple3(t)) => Ok(Some(Vec3::from(*t))),
            Some(_) => Err(self.bad(format!("{name} must be a 3-tuple"))),
        }
    }

    /// A 3-tuple, or a number meaning the same value on all three axes.
    fn scale(&self, name: &str) -> Step<Option<Vec3>> {
        match self.get(name) {
            Some(Value::Number(x)) => Ok(Some(Vec3::repeat(*x))),
            _ => self.vec3(name),
        }
    }

    fn tuple2(&self, name: &str) -> Step<Option<[f64; 2]>> {
        match self.get(name) {
            None => Ok(None),
            Some(Value::Tuple2(t)) => Ok(Some(*t)),
            Some(_) => Err(self.bad(format!("{name} must be a 2-tuple"))),
        }
    }
}

struct Run<'c, 'a> {
    ctx: &'c ExecutionContext<'a>,
    scene: Scene,
    bindings: BTreeMap<String, Binding>,
    gate_log: Vec<(usize, SkipReason)>,
    index: usize,
}

impl Run<'_, '_> {
    fn statement(&mut self, st: &Statement) -> Step<Option<Binding>> {
        match st.call.function.as_str() {
            "retrieve_material" => self.retrieve_material(st).map(Some),
            "add_object" => self.add_object(st).map(Some),
            "move_object" => self.edit_object(st, "position").map(Some),
            "rotate_object" => self.edit_object(st, "rotation_z").map(Some),
            "scale_object" => self.edit_object(st, "scale").map(Some),
            "remove_object" => self.remove_object(st).map(|_| None),
            "set_material" => self.set_material(st).map(|_| None),
            "add_light" => self.add_light(st).map(Some),
            "set_light" => self.set_light(st).map(Some),
            "remove_light" => self.remove_light(st).map(|_| None),
            other => Err(SkipReason::UnknownFunction(other.to_string())),
        }
    }

    /// Resolves an element reference given as a string id, a binding, or a
    /// bare element id.
    fn element_ref(&self, v: &Value, args: &Args) -> Step<String> {
        let id = match v {
            Value::Str(s) => s.clone(),
            Value::Ident(name) => match self.bindings.get(name) {
                Some(Binding::Element { id }) => id.clone(),
                Some(_) => return Err(args.bad(format!("{name} is not an element"))),
                None if self.scene.elements.contains_key(name) => name.clone(),
                None => return Err(SkipReason::UnboundIdentifier(name.clone())),
            },
            _ => return Err(args.bad("expected an element id")),
        };
        if self.scene.elements.contains_key(&id) {
            Ok(id)
        } else {
            Err(SkipReason::UnknownElement(id))
        }
    }

    fn light_ref(&self, v: &Value, args: &Args) -> Step<String> {
        let id = match v {
            Value::Str(s) => s.clone(),
            Value::Ident(name) => match self.bindings.get(name) {
                Some(Binding::Light { id }) => id.clone(),
                Some(_) => return Err(args.bad(format!("{name} is not a light"))),
                None if self.scene.lights.contains_key(name) => name.clone(),
                None => return Err(SkipReason::UnboundIdentifier(name.clone())),
            },
            _ => return Err(args.bad("expected a light id")),
        };
        if self.scene.lights.contains_key(&id) {
            Ok(id)
        } else {
            Err(SkipReason::UnknownLight(id))
        }
    }

    fn new_id(&self, args: &Args, stem: &str) -> Step<String> {
        match args.get("id") {
            None => Ok(self.scene.fresh_id(stem)),
            Some(Value::Str(s)) | Some(Value::Ident(s)) => {
                if !super::ast::is_identifier(s) {
                    return Err(args.bad(format!("id {s:?} is not an identifier")));
                }
                if self.scene.elements.contains_key(s) || self.scene.lights.contains_key(s) {
                    return Err(SkipReason::DuplicateId(s.clone()));
                }
                Ok(s.clone())
            }
            Some(_) => Err(args.bad("id must be a string")),
        }
    }

    fn retrieve_material(&mut self, st: &Statement) -> Step<Binding> {
        let args = Args::bind(st, &["description"])?;
        let description = args.text("description")?.ok_or_else(|| args.bad("missing argument description"))?;
        let hit = self
            .ctx
            .materials
            .retrieve(description, 1)
            .into_iter()
            .next()
            .ok_or_else(|| SkipReason::RetrievalMiss(description.to_string()))?;
        Ok(Binding::Material {
            id: hit.id,
            description: description.to_string(),
        })
    }

    /// Applies the collision and bounds gate to the current placements of
    /// `id`.
    fn gate(&mut self, id: &str) -> Step<()> {
        let el = &self.scene.elements[id];
        let mesh = self
            .scene
            .element_mesh(id, el, self.ctx.assets)
            .map_err(|_| SkipReason::UnknownElement(id.to_string()))?;
        let candidates: Vec<PosedMesh> = el
            .placements
            .iter()
            .map(|p| PosedMesh::new(mesh.clone(), p.transform()))
            .collect();
        let mut violation = None;
        if candidates
            .iter()
            .any(|c| !self.scene.bounds.contains_box(&c.world_aabb(), self.ctx.bounds_tol))
        {
            violation = Some(SkipReason::OutOfBounds(id.to_string()));
        } else if el.category == Category::Objects {
            let others: Vec<_> = self
                .scene
                .instances(self.ctx.assets, Some(Category::Objects))
                .map_err(|e| SkipReason::InvalidArgument(e.to_string()))?
                .into_iter()
                .filter(|i| i.element_id != id)
                .collect();
            let posed: Vec<PosedMesh> = others.iter().map(|i| i.posed.clone()).collect();
            'outer: for c in &candidates {
                if let Some(hit) = check_collision(c, &posed, self.ctx.collision_tol).hits.first() {
                    violation = Some(SkipReason::Collision(others[hit.index].element_id.clone()));
                    break 'outer;
                }
            }
            // Placements of one element must not collide with each other.
            if violation.is_none() && candidates.len() > 1 {
                let pairs = crate::geometry::pairwise_collisions(&candidates, self.ctx.collision_tol);
                if !pairs.is_empty() {
                    violation = Some(SkipReason::Collision(id.to_string()));
                }
            }
        }
        match (violation, self.ctx.gate) {
            (None, _) => Ok(()),
            (Some(v), GateMode::Enforce) => Err(v),
            (Some(v), GateMode::LogOnly) => {
                self.gate_log.push((self.index, v));
                Ok(())
            }
        }
    }

    /// Runs `edit` and keeps it only if the gate accepts the result.
    fn gated(&mut self, id: &str, edit: impl FnOnce(&mut Scene)) -> Step<()> {
        let saved = self.scene.elements.get(id).cloned();
        edit(&mut self.scene);
        if let Err(e) = self.gate(id) {
            match saved {
                Some(el) => {
                    self.scene.elements.insert(id.to_string(), el);
                }
                None => {
                    self.scene.elements.remove(id);
                }
            }
            return Err(e);
        }
        Ok(())
    }

    fn add_object(&mut self, st: &Statement) -> Step<Binding> {
        let args = Args::bind(st, &["description", "position", "rotation", "scale", "id"])?;
        let description = args.text("description")?.ok_or_else(|| args.bad("missing argument description"))?;
        let position = args.vec3("position")?.ok_or_else(|| args.bad("missing argument position"))?;
        let rotation = args.number("rotation")?.unwrap_or(0.0);
        let scale = args.scale("scale")?.unwrap_or(Vec3::repeat(1.0));
        let placement = Placement::new(position, rotation, scale);
        placement
            .check("placement")
            .map_err(|e| args.bad(e))?;
        let hit = self
            .ctx
            .assets
            .retrieve(description, 1)
            .into_iter()
            .next()
            .ok_or_else(|| SkipReason::RetrievalMiss(description.to_string()))?;
        let stem = id_stem(description);
        let id = self.new_id(&args, &stem)?;
        let mut element = SceneElement::asset(Category::Objects, hit.id, placement);
        element.metadata.insert("description".into(), description.to_string());
        self.gated(&id, |s| {
            s.elements.insert(id.clone(), element);
        })?;
        Ok(Binding::Element { id })
    }

    fn edit_object(&mut self, st: &Statement, field: &'static str) -> Step<Binding> {
        let args = Args::bind(st, &["id", field])?;
        let id = self.element_ref(args.require("id")?, &args)?;
        let value = args.require(field)?;
        let edit: Box<PlacementEdit> = match field {
            "position" => {
                let target = args.vec3(field)?.expect("required");
                if !target.iter().all(|c| c.is_finite()) {
                    return Err(args.bad("position must be finite"));
                }
                // All placements move rigidly with the first one.
                let delta = target - self.scene.elements[&id].placements[0].position;
                Box::new(move |p, o| p.position = o.position + delta)
            }
            "rotation_z" => {
                let Value::Number(theta) = value else {
                    return Err(args.bad("rotation_z must be a number"));
                };
                let theta = normalize_angle(*theta);
                Box::new(move |p, _| p.rotation_z = theta)
            }
            _ => {
                let scale = args.scale(field)?.expect("required");
                if !scale.iter().all(|&s| s.is_finite() && s > 0.0) {
                    return Err(args.bad("scale must be positive"));
                }
                Box::new(move |p, _| p.scale = scale)
            }
        };
        self.gated(&id, |s| {
            let el = s.elements.get_mut(&id).expect("resolved above");
            let before = el.placements.clone();
            for (p, o) in el.placements.iter_mut().zip(&before) {
                edit(p, o);
            }
        })?;
        Ok(Binding::Element { id })
    }

    fn remove_object(&mut self, st: &Statement) -> Step<()> {
        let args = Args::bind(st, &["id"])?;
        let id = self.element_ref(args.require("id")?, &args)?;
        self.scene.elements.remove(&id);
        self.bindings
            .retain(|_, b| !matches!(b, Binding::Element { id: bound } if *bound == id));
        Ok(())
    }

    fn set_material(&mut self, st: &Statement) -> Step<()> {
        let args = Args::bind(st, &["target", "material"])?;
        let targets: Vec<String> = match args.require("target")? {
            Value::Str(s) | Value::Ident(s) if s.parse::<Category>().is_ok() => {
                let cat: Category = s.parse().expect("checked");
                let ids: Vec<String> = self
                    .scene
                    .elements
                    .iter()
                    .filter(|(_, e)| e.category == cat)
                    .map(|(k, _)| k.clone())
                    .collect();
                if ids.is_empty() {
                    return Err(SkipReason::UnknownElement(format!("any {cat} element")));
                }
                ids
            }
            v => vec![self.element_ref(v, &args)?],
        };
        let assignment = match args.require("material")? {
            Value::Ident(name) => match self.bindings.get(name) {
                Some(Binding::Material { id, description }) => MaterialAssignment {
                    description: description.clone(),
                    resolved_id: Some(id.clone()),
                },
                Some(_) => return Err(args.bad(format!("{name} is not a material"))),
                None => return Err(SkipReason::UnboundIdentifier(name.clone())),
            },
            Value::Str(d) if !d.trim().is_empty() => {
                let hit = self
                    .ctx
                    .materials
                    .retrieve(d, 1)
                    .into_iter()
                    .next()
                    .ok_or_else(|| SkipReason::RetrievalMiss(d.clone()))?;
                MaterialAssignment {
                    description: d.clone(),
                    resolved_id: Some(hit.id),
                }
            }
            _ => return Err(args.bad("material must be a binding or a description")),
        };
        for id in targets {
            self.scene.elements.get_mut(&id).expect("resolved").material = Some(assignment.clone());
        }
        Ok(())
    }

    fn add_light(&mut self, st: &Statement) -> Step<Binding> {
        let args = Args::bind(
            st,
            &["kind", "intensity", "color", "position", "direction", "extent", "id"],
        )?;
        let kind: LightKind = match args.require("kind")? {
            Value::Str(s) | Value::Ident(s) => s.parse().map_err(|_| args.bad(format!("unknown light kind {s:?}")))?,
            _ => return Err(args.bad("kind must be a string")),
        };
        let intensity = args.number("intensity")?.ok_or_else(|| args.bad("missing argument intensity"))?;
        let color = args.vec3("color")?.map(|c| [c.x, c.y, c.z]).ok_or_else(|| args.bad("missing argument color"))?;
        let direction = match args.vec3("direction")? {
            Some(d) if d.norm() > 0.0 && d.iter().all(|c| c.is_finite()) => Some(d.normalize()),
            Some(_) => return Err(args.bad("direction must be non-zero")),
            None => None,
        };
        let light = Light {
            kind,
            intensity,
            color,
            position: args.vec3("position")?,
            direction,
            extent: args.tuple2("extent")?,
        };
        let id = match args.get("id") {
            None => (1..)
                .map(|n| format!("light_{n}"))
                .find(|k| !self.scene.lights.contains_key(k) && !self.scene.elements.contains_key(k))
                .expect("unbounded"),
            Some(_) => self.new_id(&args, "light")?,
        };
        self.scene
            .insert_light(id.clone(), light)
            .map_err(|e| args.bad(e))?;
        Ok(Binding::Light { id })
    }

    fn set_light(&mut self, st: &Statement) -> Step<Binding> {
        let args = Args::bind(st, &["id", "intensity", "color"])?;
        let id = self.light_ref(args.require("id")?, &args)?;
        let mut light = self.scene.lights[&id].clone();
        if let Some(i) = args.number("intensity")? {
            light.intensity = i;
        }
        if let Some(c) = args.vec3("color")? {
            light.color = [c.x, c.y, c.z];
        }
        light.check(&format!("lights/{id}")).map_err(|e| args.bad(e))?;
        self.scene.lights.insert(id.clone(), light);
        Ok(Binding::Light { id })
    }

    fn remove_light(&mut self, st: &Statement) -> Step<()> {
        let args = Args::bind(st, &["id"])?;
        let id = self.light_ref(args.require("id")?, &args)?;
        self.scene.lights.remove(&id);
        Ok(())
    }
}

/// Id stem for a new object: the last word of its description, or
/// `object` when the description has no usable word.
pub(crate) fn id_stem(description: &str) -> String {
    tokenize(description)
        .last()
        .map(|w| w.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>())
        .filter(|w| !w.is_empty() && !w.starts_with(|c: char| c.is_ascii_digit()))
        .unwrap_or_else(|| Category::Objects.word().to_string())
}

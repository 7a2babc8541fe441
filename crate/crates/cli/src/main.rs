mod demo;
mod error;
mod out;
mod select;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use roomforge::action::ExecutionContext;
use roomforge::geometry::{detect_placeable_surfaces, SurfaceParams, TriangleMesh};
use roomforge::index::{AssetIndex, MaterialIndex};
use roomforge::policy::remote::RemoteConfig;
use roomforge::policy::{
    collect_selfimprovement, run_asset_loop, AdmissionRule, AssetLoopConfig, CandidateStatus, GeometricGate, Library,
    RoundOutcome, SceneLoop, SceneLoopConfig, Trajectory,
};
use roomforge::room::{build_room, RoomLayoutSpec};
use roomforge::scene::{deserialize_scene, serialize_scene, verify_scene, MeshResolver, NoAssets, Scene, BOUNDS_TOL, COLLISION_TOL};
use roomforge::view::io::{encode_depth, encode_ids, to_ppm, view_metadata};
use roomforge::view::{standard_viewset_with, ViewParams};
use serde::{Deserialize, Serialize};
use serde_json::json;

use error::{Failure, Kind, Result};
use select::{PolicySel, ScorerSel};

#[derive(Parser, Debug)]
#[command(name = "roomforge", version, about = "Build rooms and run scene- and asset-level policy loops")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a room shell scene from a layout JSON.
    BuildRoom {
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Iteratively refine a scene with a scene-level policy.
    RunScenePolicy(ScenePolicyArgs),
    /// Place small objects onto a receptacle with a placement policy.
    RunAssetPolicy(AssetPolicyArgs),
    /// Render one standard view to a binary PPM.
    Render {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, value_enum)]
        view: ViewName,
        #[arg(long)]
        out: PathBuf,
        /// Asset manifest; needed when the scene references assets.
        #[arg(long)]
        assets: Option<PathBuf>,
        #[arg(long, default_value_t = 256)]
        width: u32,
        #[arg(long, default_value_t = 256)]
        height: u32,
    },
    /// List the placeable surfaces of an OBJ mesh, one JSON object per line.
    Surfaces {
        #[arg(long)]
        mesh: PathBuf,
        /// Minimum surface area, m².
        #[arg(long)]
        min_area: Option<f64>,
        /// Maximum height spread within one surface, m.
        #[arg(long)]
        height_tol: Option<f64>,
    },
    /// Print the alignment score of a scene against a prompt.
    Score {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        prompt: String,
        /// `lexical` or `remote:<url>`.
        #[arg(long, default_value = "lexical")]
        scorer: ScorerSel,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        remote: RemoteArgs,
    },
    /// Collect the committed steps of the best runs as fine-tuning data.
    ExportFinetune {
        /// Directory whose subdirectories are scene-policy runs.
        #[arg(long)]
        runs: PathBuf,
        #[arg(long, default_value_t = 1)]
        top_k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Inspect or grow an in-context example library.
    Library {
        #[arg(long)]
        file: PathBuf,
        /// Print every entry as JSON.
        #[arg(long, conflicts_with = "ingest", required_unless_present = "ingest")]
        list: bool,
        /// Admit the improving steps of a scene-policy run.
        #[arg(long)]
        ingest: Option<PathBuf>,
        /// Minimum relative improvement for admission.
        #[arg(long, default_value_t = 0.10)]
        threshold: f64,
    },
    /// Write the offline demo corpus, layout and scripted policies.
    Demo {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ViewName {
    Corner,
    Pano,
    Labels,
}

impl ViewName {
    fn as_str(self) -> &'static str {
        match self {
            ViewName::Corner => "corner",
            ViewName::Pano => "pano",
            ViewName::Labels => "labels",
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct DataArgs {
    /// Asset manifest (JSONL).
    #[arg(long)]
    assets: PathBuf,
    /// Material manifest (JSONL).
    #[arg(long)]
    materials: PathBuf,
}

#[derive(Args, Debug, Clone, Copy, Serialize, Deserialize)]
struct RemoteArgs {
    /// Per-request timeout for remote backends, seconds.
    #[arg(long, default_value_t = 30.0)]
    timeout: f64,
    /// Retries after the first failed request.
    #[arg(long, default_value_t = 3)]
    retries: u32,
    /// Concurrent requests per backend.
    #[arg(long, default_value_t = 4)]
    max_in_flight: usize,
}

impl RemoteArgs {
    fn config(&self) -> Result<RemoteConfig> {
        if !(self.timeout.is_finite() && self.timeout > 0.0) || self.max_in_flight == 0 {
            return Err(Failure::input("timeout and max-in-flight must be positive"));
        }
        Ok(RemoteConfig {
            timeout: Duration::from_secs_f64(self.timeout),
            retries: self.retries,
            max_in_flight: self.max_in_flight,
            ..RemoteConfig::default()
        })
    }
}

#[derive(Args, Debug, Clone)]
struct ScenePolicyArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    prompt: String,
    /// `scripted:<path>` or `remote:<url>`.
    #[arg(long)]
    policy: PolicySel,
    /// `lexical` or `remote:<url>`.
    #[arg(long, default_value = "lexical")]
    scorer: ScorerSel,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    #[arg(long, default_value_t = 4)]
    candidates: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
    /// In-context library (JSONL); read only.
    #[arg(long)]
    library: Option<PathBuf>,
    /// In-context examples per candidate.
    #[arg(long, default_value_t = 2)]
    in_context: usize,
    #[arg(long, default_value_t = 256)]
    width: u32,
    #[arg(long, default_value_t = 256)]
    height: u32,
    /// Collision tolerance, m.
    #[arg(long, default_value_t = COLLISION_TOL)]
    collision_tol: f64,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    remote: RemoteArgs,
}

#[derive(Args, Debug, Clone)]
struct AssetPolicyArgs {
    #[arg(long)]
    scene: PathBuf,
    /// Element id of the receptacle.
    #[arg(long)]
    target: String,
    #[arg(long)]
    prompt: String,
    /// `scripted:<path>` (JSONL answers) or `remote:<url>`.
    #[arg(long)]
    policy: PolicySel,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    max_placements: usize,
    #[arg(long, default_value_t = 30)]
    max_attempts: usize,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 256)]
    width: u32,
    #[arg(long, default_value_t = 256)]
    height: u32,
    /// Minimum placeable surface area, m².
    #[arg(long)]
    min_area: Option<f64>,
    /// Maximum height spread within one surface, m.
    #[arg(long)]
    height_tol: Option<f64>,
    /// Collision tolerance, m.
    #[arg(long, default_value_t = COLLISION_TOL)]
    collision_tol: f64,
    /// Asset manifest (JSONL).
    #[arg(long)]
    assets: PathBuf,
    #[command(flatten)]
    remote: RemoteArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            return Failure::usage(first).report();
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::BuildRoom { layout, out } => build_room_cmd(&layout, &out),
        Command::RunScenePolicy(a) => run_scene_policy(&a),
        Command::RunAssetPolicy(a) => run_asset_policy(&a),
        Command::Render {
            scene,
            view,
            out,
            assets,
            width,
            height,
        } => render(&scene, view, &out, assets.as_deref(), width, height),
        Command::Surfaces {
            mesh,
            min_area,
            height_tol,
        } => surfaces(&mesh, surface_params(min_area, height_tol)?),
        Command::Score {
            scene,
            prompt,
            scorer,
            data,
            remote,
        } => score(&scene, &prompt, &scorer, &data, &remote),
        Command::ExportFinetune { runs, top_k, out } => export_finetune(&runs, top_k, &out),
        Command::Library {
            file,
            list,
            ingest,
            threshold,
        } => library(&file, list, ingest.as_deref(), threshold),
        Command::Demo { out } => demo::write(&out),
    }
}

fn load_scene(path: &Path) -> Result<Scene> {
    deserialize_scene(&out::read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn surface_params(min_area: Option<f64>, height_tol: Option<f64>) -> Result<SurfaceParams> {
    let d = SurfaceParams::default();
    let p = SurfaceParams {
        min_area: min_area.unwrap_or(d.min_area),
        height_tol: height_tol.unwrap_or(d.height_tol),
    };
    if !(p.min_area >= 0.0 && p.height_tol >= 0.0) {
        return Err(Failure::input("min-area and height-tol must be non-negative"));
    }
    Ok(p)
}

/// Run directories start empty so their contents depend only on the
/// config.
fn fresh_dir(dir: &Path) -> Result<()> {
    if dir.exists() {
        let mut it = fs::read_dir(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
        if it.next().is_some() {
            return Err(Failure::input(format!("output directory {} is not empty", dir.display())));
        }
    }
    fs::create_dir_all(dir).map_err(|e| Failure::internal(format!("{}: {e}", dir.display())))
}

fn build_room_cmd(layout: &Path, out_path: &Path) -> Result<()> {
    let spec = RoomLayoutSpec::load(layout)?;
    let scene = build_room(&spec)?;
    out::write_atomic(out_path, &serialize_scene(&scene))?;
    println!("{} elements", scene.elements.len());
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct SceneRunConfig {
    command: String,
    scene: PathBuf,
    prompt: String,
    policy: String,
    scorer: String,
    library: Option<PathBuf>,
    data: DataArgs,
    remote: RemoteArgs,
    collision_tol: f64,
    bounds_tol: f64,
    loop_config: SceneLoopConfig,
}

#[derive(Serialize, Deserialize)]
struct SceneRunSummary {
    prompt: String,
    seed: u64,
    initial_score: f64,
    final_score: f64,
    committed_steps: usize,
}

fn run_scene_policy(a: &ScenePolicyArgs) -> Result<()> {
    let scene0 = load_scene(&a.scene)?;
    let assets = AssetIndex::load(&a.data.assets)?;
    let materials = MaterialIndex::load(&a.data.materials)?;
    let library = match &a.library {
        Some(p) => Library::load(p)?,
        None => Library::new(),
    };
    let remote = a.remote.config()?;
    let policy = select::scene_policy(&a.policy, remote)?;
    let scorer = select::scorer(&a.scorer, &assets, &materials, remote);
    let loop_config = SceneLoopConfig {
        steps: a.steps,
        candidates: a.candidates,
        seed: a.seed,
        in_context: a.in_context,
        views: ViewParams {
            width: a.width,
            height: a.height,
            ..ViewParams::default()
        },
    };
    let mut exec = ExecutionContext::new(&assets, &materials);
    exec.collision_tol = a.collision_tol;
    fresh_dir(&a.out_dir)?;

    let run = SceneLoop {
        policy: policy.as_ref(),
        scorer: scorer.as_ref(),
        exec,
        library: &library,
        config: loop_config,
    }
    .run(&scene0, &a.prompt)?;

    let dir = &a.out_dir;
    out::write_json(
        &dir.join("config.json"),
        &SceneRunConfig {
            command: "run-scene-policy".into(),
            scene: a.scene.clone(),
            prompt: a.prompt.clone(),
            policy: a.policy.to_string(),
            scorer: a.scorer.to_string(),
            library: a.library.clone(),
            data: a.data.clone(),
            remote: a.remote,
            collision_tol: a.collision_tol,
            bounds_tol: BOUNDS_TOL,
            loop_config,
        },
    )?;
    out::write_atomic(&dir.join("input_scene.json"), &serialize_scene(&scene0))?;
    for (t, (views, scene)) in run.views.iter().zip(&run.scenes).enumerate() {
        let step = dir.join(roomforge::policy::step_dir(t));
        for v in &views.views {
            out::write_atomic(&step.join(format!("{}.ids", v.name)), &encode_ids(&v.maps))?;
            out::write_atomic(&step.join(format!("{}.depth", v.name)), &encode_depth(&v.maps))?;
            out::write_json(&step.join(format!("{}.json", v.name)), &view_metadata(v))?;
        }
        out::write_atomic(&dir.join(roomforge::policy::scene_path(t)), &serialize_scene(scene))?;
    }
    let t = &run.trajectory;
    out::write_atomic(&dir.join("trajectory.jsonl"), &t.to_jsonl())?;
    let final_scene = run.final_scene().unwrap_or(&scene0);
    out::write_atomic(&dir.join("final_scene.json"), &serialize_scene(final_scene))?;
    let summary = SceneRunSummary {
        prompt: t.prompt.clone(),
        seed: t.seed,
        initial_score: t.initial_score,
        final_score: t.final_score(),
        committed_steps: t.steps.iter().filter(|s| s.committed).count(),
    };
    out::write_json(&dir.join("summary.json"), &summary)?;
    println!(
        "{}",
        json!({
            "initial_score": summary.initial_score,
            "final_score": summary.final_score,
            "committed_steps": summary.committed_steps,
        })
    );

    let all: Vec<&CandidateStatus> = t.steps.iter().flat_map(|s| s.candidates.iter().map(|c| &c.status)).collect();
    if matches!(a.policy, PolicySel::Remote(_)) && all.iter().all(|s| matches!(s, CandidateStatus::BackendError(_))) {
        let first = match all.first() {
            Some(CandidateStatus::BackendError(m)) => m.clone(),
            _ => String::new(),
        };
        return Err(Failure::new(Kind::Backend, format!("every policy request failed: {first}")));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct AssetRunConfig {
    command: String,
    scene: PathBuf,
    target: String,
    prompt: String,
    policy: String,
    assets: PathBuf,
    remote: RemoteArgs,
    loop_config: AssetLoopConfig,
}

fn run_asset_policy(a: &AssetPolicyArgs) -> Result<()> {
    let scene = load_scene(&a.scene)?;
    let assets = AssetIndex::load(&a.assets)?;
    let remote = a.remote.config()?;
    let policy = select::placement_policy(&a.policy, remote)?;
    let surfaces = surface_params(a.min_area, a.height_tol)?;
    let loop_config = AssetLoopConfig {
        seed: a.seed,
        max_placements: a.max_placements,
        max_attempts: a.max_attempts,
        width: a.width,
        height: a.height,
        surfaces,
        collision_tol: a.collision_tol,
        ..AssetLoopConfig::default()
    };
    let gate = GeometricGate {
        surfaces,
        ..GeometricGate::default()
    };
    fresh_dir(&a.out_dir)?;
    let run = run_asset_loop(&scene, &a.target, &a.prompt, policy.as_ref(), &assets, &gate, &loop_config)?;

    let dir = &a.out_dir;
    out::write_json(
        &dir.join("config.json"),
        &AssetRunConfig {
            command: "run-asset-policy".into(),
            scene: a.scene.clone(),
            target: a.target.clone(),
            prompt: a.prompt.clone(),
            policy: a.policy.to_string(),
            assets: a.assets.clone(),
            remote: a.remote,
            loop_config,
        },
    )?;
    out::write_atomic(&dir.join("input_scene.json"), &serialize_scene(&scene))?;
    out::write_atomic(&dir.join("rounds.jsonl"), &run.to_jsonl())?;
    out::write_atomic(&dir.join("final_scene.json"), &serialize_scene(&run.scene))?;
    let report = verify_scene(&run.scene, &assets)?;
    let summary = json!({
        "rounds": run.rounds.len(),
        "successes": run.successes(),
        "verified": report.verified,
    });
    out::write_json(&dir.join("summary.json"), &summary)?;
    println!("{summary}");

    let backend_down = !run.rounds.is_empty()
        && run.rounds.iter().all(|r| matches!(r.outcome, RoundOutcome::BackendFailure { .. }));
    if backend_down && matches!(a.policy, PolicySel::Remote(_)) {
        return Err(Failure::new(Kind::Backend, "every placement request failed"));
    }
    Ok(())
}

fn render(scene_path: &Path, view: ViewName, out_path: &Path, assets: Option<&Path>, width: u32, height: u32) -> Result<()> {
    let scene = load_scene(scene_path)?;
    let index = assets.map(AssetIndex::load).transpose()?;
    let resolver: &dyn MeshResolver = match &index {
        Some(i) => i,
        None => &NoAssets,
    };
    let params = ViewParams {
        width,
        height,
        ..ViewParams::default()
    };
    let set = standard_viewset_with(&scene, resolver, &params)?;
    let v = set
        .views
        .iter()
        .find(|v| v.name == view.as_str())
        .ok_or_else(|| Failure::internal(format!("view {} missing", view.as_str())))?;
    out::write_atomic(out_path, &to_ppm(&v.maps, &v.overlays))
}

fn surfaces(mesh_path: &Path, params: SurfaceParams) -> Result<()> {
    let mesh = TriangleMesh::from_obj(&out::read_text(mesh_path)?)
        .map_err(|e| Failure::input(format!("{}: {e}", mesh_path.display())))?;
    for s in detect_placeable_surfaces(&mesh, &params) {
        println!(
            "{}",
            json!({
                "height": s.height_z,
                "area": s.area,
                "triangles": s.triangle_ids.len(),
                "holes": s.holes.len(),
            })
        );
    }
    Ok(())
}

fn score(scene_path: &Path, prompt: &str, sel: &ScorerSel, data: &DataArgs, remote: &RemoteArgs) -> Result<()> {
    let scene = load_scene(scene_path)?;
    let assets = AssetIndex::load(&data.assets)?;
    let materials = MaterialIndex::load(&data.materials)?;
    let scorer = select::scorer(sel, &assets, &materials, remote.config()?);
    println!("{}", scorer.score(&scene, prompt)?);
    Ok(())
}

fn load_run(dir: &Path) -> Result<Trajectory> {
    let summary: SceneRunSummary = out::read_json(&dir.join("summary.json"))?;
    let path = dir.join("trajectory.jsonl");
    Trajectory::from_jsonl(&summary.prompt, summary.seed, summary.initial_score, &out::read_text(&path)?)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn export_finetune(runs: &Path, top_k: usize, out_path: &Path) -> Result<()> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(runs)
        .map_err(|e| Failure::input(format!("{}: {e}", runs.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("trajectory.jsonl").is_file())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(Failure::input(format!("no runs under {}", runs.display())));
    }
    let mut trajectories = Vec::new();
    for d in &dirs {
        let mut t = load_run(d)?;
        // View paths become relative to the runs directory.
        let name = d.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        for s in &mut t.steps {
            for v in &mut s.views {
                *v = format!("{name}/{v}");
            }
        }
        trajectories.push(t);
    }
    let records = collect_selfimprovement(&trajectories, top_k);
    out::write_jsonl(out_path, &records)?;
    println!("{} records from {} runs", records.len(), trajectories.len());
    Ok(())
}

fn library(file: &Path, list: bool, ingest: Option<&Path>, threshold: f64) -> Result<()> {
    let mut lib = Library::load(file)?;
    if list {
        for e in &lib.entries {
            println!("{}", serde_json::to_string(e).map_err(Failure::internal)?);
        }
        return Ok(());
    }
    let Some(run_dir) = ingest else {
        return Err(Failure::usage("one of --list or --ingest is required"));
    };
    let t = load_run(run_dir)?;
    let rule = AdmissionRule {
        threshold,
        ..AdmissionRule::default()
    };
    let added = lib.update(&t, &rule);
    out::write_jsonl(file, &lib.entries)?;
    println!("{} added, {} total", added.len(), lib.entries.len());
    Ok(())
}

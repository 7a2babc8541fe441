//! HTTP client for policies and scorers served out of process.
//!
//! Every call is a JSON POST. Failed attempts (transport errors or non-2xx
//! status) are retried after `base * 2^i` seconds, up to `retries` times.

use std::collections::BTreeMap;
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::backend::{ActRequest, BackendError, PlaceRequest, PlacementPolicy, PolicyBackend, Scorer};
use super::scorer::scene_summary;
use crate::scene::Scene;
use crate::view::{io, Maps, Overlay, View, ViewCamera};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    /// Per-request timeout.
    pub timeout: Duration,
    pub retries: u32,
    pub backoff_base: Duration,
    pub backoff_factor: u32,
    pub max_in_flight: usize,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            timeout: Duration::from_secs(30),
            retries: 3,
            backoff_base: Duration::from_secs(1),
            backoff_factor: 2,
            max_in_flight: 4,
        }
    }
}

/// Counting gate on concurrent requests.
#[derive(Debug)]
struct Slots {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Slots {
    fn acquire(&self) -> SlotGuard<'_> {
        let mut free = self.free.lock().expect("slot lock");
        while *free == 0 {
            free = self.cv.wait(free).expect("slot lock");
        }
        *free -= 1;
        SlotGuard(self)
    }
}

struct SlotGuard<'a>(&'a Slots);

impl Drop for SlotGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("slot lock") += 1;
        self.0.cv.notify_one();
    }
}

#[derive(Debug)]
pub struct RemoteClient {
    base_url: String,
    agent: ureq::Agent,
    config: RemoteConfig,
    slots: Slots,
}

impl RemoteClient {
    pub fn new(base_url: impl Into<String>, config: RemoteConfig) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
        Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            agent,
            config,
            slots: Slots {
                free: Mutex::new(config.max_in_flight.max(1)),
                cv: Condvar::new(),
            },
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    /// Delay before retry `i` (0-based).
    pub fn backoff(&self, i: u32) -> Duration {
        self.config.backoff_base * self.config.backoff_factor.pow(i)
    }

    fn attempt(&self, url: &str, body: &Value) -> Result<Value, BackendError> {
        let _slot = self.slots.acquire();
        match self.agent.post(url).send_json(body) {
            Ok(resp) => resp.into_json().map_err(|e| BackendError::Protocol(e.to_string())),
            Err(ureq::Error::Status(code, _)) => Err(BackendError::Status(code)),
            Err(e) => Err(BackendError::Unreachable(e.to_string())),
        }
    }

    pub fn post<T: DeserializeOwned>(&self, path: &str, body: &impl Serialize) -> Result<T, BackendError> {
        let url = format!("{}{}", self.base_url, path);
        let body = serde_json::to_value(body).map_err(|e| BackendError::Protocol(e.to_string()))?;
        let mut i = 0;
        loop {
            match self.attempt(&url, &body) {
                Ok(v) => return serde_json::from_value(v).map_err(|e| BackendError::Protocol(e.to_string())),
                // A well-formed reply with the wrong shape will not improve on retry.
                Err(e @ BackendError::Protocol(_)) => return Err(e),
                Err(e) if i >= self.config.retries => return Err(e),
                Err(_) => {
                    thread::sleep(self.backoff(i));
                    i += 1;
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireMap {
    pub width: u32,
    pub height: u32,
    /// Base64 of the binary id map (header line plus little-endian u32s).
    pub data: String,
}

impl WireMap {
    pub fn encode(maps: &Maps) -> Self {
        Self {
            width: maps.width,
            height: maps.height,
            data: STANDARD.encode(io::encode_ids(maps)),
        }
    }

    pub fn decode(&self) -> Result<Vec<u32>, BackendError> {
        let bytes = STANDARD.decode(&self.data).map_err(|e| BackendError::Protocol(e.to_string()))?;
        io::decode_ids(&bytes)
            .map(|(_, _, ids)| ids)
            .map_err(|e| BackendError::Protocol(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireView {
    pub name: String,
    pub camera: ViewCamera,
    pub id_map: WireMap,
    pub overlays: Vec<Overlay>,
    pub legend: BTreeMap<u32, String>,
}

impl WireView {
    pub fn new(view: &View) -> Self {
        Self {
            name: view.name.clone(),
            camera: view.camera.clone(),
            id_map: WireMap::encode(&view.maps),
            overlays: view.overlays.clone(),
            legend: view.maps.legend.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireExample {
    pub prompt: String,
    pub action_text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActWire {
    pub prompt: String,
    pub step: usize,
    pub sample_index: usize,
    pub views: Vec<WireView>,
    pub scene_summary: String,
    pub in_context: Vec<WireExample>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActReply {
    pub action_text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaceWire {
    pub prompt: String,
    pub receptacle_summary: String,
    pub view: WireView,
    /// Set on the second query of a round, once the object is chosen.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaceReply {
    pub description: String,
    pub pixel: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreWire {
    pub prompt: String,
    pub scene_summary: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReply {
    pub score: f64,
}

impl ActWire {
    pub fn new(request: &ActRequest) -> Self {
        Self {
            prompt: request.prompt.into(),
            step: request.step,
            sample_index: request.sample_index,
            views: request.views.views.iter().map(WireView::new).collect(),
            scene_summary: request.scene_summary.into(),
            in_context: request
                .in_context
                .iter()
                .map(|e| WireExample {
                    prompt: e.prompt.clone(),
                    action_text: e.action_text.clone(),
                })
                .collect(),
        }
    }
}

impl PlaceWire {
    pub fn new(request: &PlaceRequest, description: Option<&str>) -> Self {
        Self {
            prompt: request.prompt.into(),
            receptacle_summary: request.receptacle_summary.into(),
            view: WireView {
                name: "placement".into(),
                camera: ViewCamera::Perspective(*request.camera),
                id_map: WireMap::encode(request.maps),
                overlays: Vec::new(),
                legend: request.maps.legend.clone(),
            },
            description: description.map(str::to_string),
        }
    }
}

/// `POST /act`.
#[derive(Debug)]
pub struct RemotePolicy(pub RemoteClient);

impl PolicyBackend for RemotePolicy {
    fn act(&self, request: &ActRequest) -> Result<String, BackendError> {
        self.0.post::<ActReply>("/act", &ActWire::new(request)).map(|r| r.action_text)
    }
}

/// `POST /place`, once for the object and once for its pixel.
#[derive(Debug)]
pub struct RemotePlacement(pub RemoteClient);

impl PlacementPolicy for RemotePlacement {
    fn describe(&self, request: &PlaceRequest) -> Result<String, BackendError> {
        self.0.post::<PlaceReply>("/place", &PlaceWire::new(request, None)).map(|r| r.description)
    }

    fn locate(&self, request: &PlaceRequest, description: &str) -> Result<[f64; 2], BackendError> {
        self.0
            .post::<PlaceReply>("/place", &PlaceWire::new(request, Some(description)))
            .map(|r| r.pixel)
    }
}

/// `POST /score`.
#[derive(Debug)]
pub struct RemoteScorer(pub RemoteClient);

impl Scorer for RemoteScorer {
    fn score(&self, scene: &Scene, prompt: &str) -> Result<f64, BackendError> {
        let reply: ScoreReply = self.0.post(
            "/score",
            &ScoreWire {
                prompt: prompt.into(),
                scene_summary: scene_summary(scene),
            },
        )?;
        if !(0.0..=1.0).contains(&reply.score) {
            return Err(BackendError::Protocol(format!("score {} outside [0, 1]", reply.score)));
        }
        Ok(reply.score)
    }
}

//! `scripted:<path>`, `remote:<url>` and `lexical` backend selectors.

use std::path::PathBuf;
use std::str::FromStr;

use roomforge::index::{AssetIndex, MaterialIndex};
use roomforge::policy::remote::{RemoteClient, RemoteConfig, RemotePlacement, RemotePolicy, RemoteScorer};
use roomforge::policy::{LexicalScorer, PlacementPolicy, PolicyBackend, ScriptedAnswer, ScriptedPlacement, ScriptedPolicy, Scorer};

use crate::error::{Failure, Result};
use crate::out;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolicySel {
    Scripted(PathBuf),
    Remote(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScorerSel {
    Lexical,
    Remote(String),
}

fn remote_url(url: &str) -> std::result::Result<String, String> {
    if url.starts_with("http://") || url.starts_with("https://") {
        Ok(url.trim_end_matches('/').to_string())
    } else {
        Err(format!("remote url must start with http:// or https://, got {url:?}"))
    }
}

impl FromStr for PolicySel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.split_once(':') {
            Some(("scripted", p)) if !p.is_empty() => Ok(PolicySel::Scripted(p.into())),
            Some(("remote", u)) => remote_url(u).map(PolicySel::Remote),
            _ => Err(format!("expected scripted:<path> or remote:<url>, got {s:?}")),
        }
    }
}

impl FromStr for ScorerSel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.split_once(':') {
            None if s == "lexical" => Ok(ScorerSel::Lexical),
            Some(("remote", u)) => remote_url(u).map(ScorerSel::Remote),
            _ => Err(format!("expected lexical or remote:<url>, got {s:?}")),
        }
    }
}

impl std::fmt::Display for PolicySel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PolicySel::Scripted(p) => write!(f, "scripted:{}", p.display()),
            PolicySel::Remote(u) => write!(f, "remote:{u}"),
        }
    }
}

impl std::fmt::Display for ScorerSel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScorerSel::Lexical => f.write_str("lexical"),
            ScorerSel::Remote(u) => write!(f, "remote:{u}"),
        }
    }
}

pub fn scene_policy(sel: &PolicySel, remote: RemoteConfig) -> Result<Box<dyn PolicyBackend>> {
    Ok(match sel {
        PolicySel::Scripted(p) => {
            let policy = ScriptedPolicy::parse(&out::read_text(p)?);
            if policy.blocks.is_empty() {
                return Err(Failure::input(format!("{}: no program blocks", p.display())));
            }
            Box::new(policy)
        }
        PolicySel::Remote(u) => Box::new(RemotePolicy(RemoteClient::new(u.clone(), remote))),
    })
}

/// A scripted placement file holds one `{"description", "target"}` object
/// per line.
pub fn placement_policy(sel: &PolicySel, remote: RemoteConfig) -> Result<Box<dyn PlacementPolicy>> {
    Ok(match sel {
        PolicySel::Scripted(p) => {
            let text = out::read_text(p)?;
            let mut answers = Vec::new();
            for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                let a: ScriptedAnswer = serde_json::from_str(line)
                    .map_err(|e| Failure::input(format!("{} line {}: {e}", p.display(), i + 1)))?;
                answers.push(a);
            }
            if answers.is_empty() {
                return Err(Failure::input(format!("{}: no placement answers", p.display())));
            }
            Box::new(ScriptedPlacement::new(answers))
        }
        PolicySel::Remote(u) => Box::new(RemotePlacement(RemoteClient::new(u.clone(), remote))),
    })
}

pub fn scorer(sel: &ScorerSel, assets: &AssetIndex, materials: &MaterialIndex, remote: RemoteConfig) -> Box<dyn Scorer> {
    match sel {
        ScorerSel::Lexical => Box::new(LexicalScorer::new(assets, materials)),
        ScorerSel::Remote(u) => Box::new(RemoteScorer(RemoteClient::new(u.clone(), remote))),
    }
}

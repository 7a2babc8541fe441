//! Asset and material manifests with natural-language retrieval.

mod manifest;
mod text;

pub use manifest::{
    AssetIndex, AssetRecord, IndexError, MaterialIndex, MaterialRecord, RetrievalResult,
};
pub use text::{tokenize, Scored, TextIndex};

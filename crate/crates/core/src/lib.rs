pub mod action;
pub mod geometry;
pub mod index;
pub mod policy;
pub mod room;
pub mod scene;
pub mod view;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/scenes.md")]
    mod scenes {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/rooms.md")]
    mod rooms {}
    #[doc = include_str!("../../../book/src/views.md")]
    mod views {}
    #[doc = include_str!("../../../book/src/scene-loop.md")]
    mod scene_loop {}
    #[doc = include_str!("../../../book/src/asset-loop.md")]
    mod asset_loop {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

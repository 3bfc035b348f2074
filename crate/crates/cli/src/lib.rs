//! Image files, the `tvc` command line and the JSON API over a pair of images.

pub mod api;
pub mod cli;
pub mod store;
pub mod view;

//! Segmentation of instructional video into topics from key frames.
//!
//! The pipeline classifies each key frame by media type, extracts the
//! writing on board and sheet frames into a binary content frame, matches
//! content frames with a multi-scale window matcher, and clusters frames
//! online into temporally ordered topics. A cost model accounts for the
//! number of match invocations the clustering spends.

pub mod classifier;
pub mod cluster;
pub mod config;
pub mod content;
pub mod cost;
pub mod error;
pub mod index;
pub mod ingest;
pub mod matcher;
pub mod raster;
pub mod synth;
pub mod windows;

pub use classifier::{classify, classify_traced, Classification, MediaType, Rule};
pub use cluster::{cluster_frames, decode_runs, encode_runs, FrameId, MatchOracle, Topic, TopicClusterer, TopicList};
pub use config::Config;
pub use content::{extract_board_content, extract_content, extract_sheet_content, DerivedContentFrame, FilterTrace};
pub use cost::{closed_form_matches, fit_quadratic, simulate_workload, CostReport, MatchProbabilities, QuadraticFit};
pub use error::{Error, Result};
pub use index::{build_index, read_index, write_index, BuildOptions, TopicIndex};
pub use ingest::{load_frame, load_manifest, FrameManifestEntry};
pub use matcher::{match_pair, MatchResult, ScaleSweep};
pub use raster::{BinaryImage, Raster, Rgb};
pub use windows::{select_windows, InterestWindow};

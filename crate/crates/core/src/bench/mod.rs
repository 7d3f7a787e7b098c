//! Evaluation tables, wavefront frames and trained-model files.

mod blob;
mod eval;
mod render;
mod stats;

pub use blob::{
    config_hash, decode_model, encode_model, load_model, save_model, sidecar_path, ModelMeta, ModelPayload, MODEL_MAGIC,
    MODEL_VERSION,
};
pub use eval::{
    check_method_names, eval_ipp, eval_search, search_runs_csv, EvalReport, EvalRow, IppMethod, IppRun, SearchMethod,
    NO_MODEL,
};
pub use render::{frames, render_frames, Frame, Rgb, EXPANDED, GOAL, INVALID, PATH, START, UNEXPANDED};
pub use stats::{bootstrap_ci, mean, median, normalize_costs, BOOTSTRAP_RESAMPLES, NORMALIZE_HI, NORMALIZE_LO};

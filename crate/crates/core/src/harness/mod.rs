//! Scenario loading, the closed-loop driver, telemetry and batch runs.

mod run;
mod scenario;
mod telemetry;

pub use run::{
    frame_seed, occlusion_episodes, run, run_with, FrameRecord, OcclusionEpisode, RunError,
    RunOptions, RunResult, Summary,
};
pub use scenario::{
    load_scenario, parse_scenario, FollowerSpec, LeaderSpec, RunSpec, Scenario, ScenarioError,
    TrackerSpec,
};
pub use telemetry::{
    dump_frames, frame_path, parse_telemetry, read_telemetry, telemetry_csv, write_telemetry,
    TelemetryRow, TELEMETRY_HEADER,
};

use std::path::{Path, PathBuf};

use rayon::prelude::*;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Runs one scenario and writes `telemetry.csv`, `summary.txt` and, when
/// requested, `frames/` into `out`.
pub fn run_to_dir(sc: &Scenario, out: &Path, dump: bool) -> Result<Summary, HarnessError> {
    std::fs::create_dir_all(out)?;
    let opts = RunOptions {
        dump_frames: dump.then(|| out.join("frames")),
        ..RunOptions::default()
    };
    let result = run_with(sc, &opts)?;
    write_telemetry(&result.rows, &out.join("telemetry.csv"))?;
    std::fs::write(out.join("summary.txt"), result.summary.to_text())?;
    Ok(result.summary)
}

/// Every `*.scn` file in `dir`, sorted by name.
pub fn scenario_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "scn"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs every scenario in `dir` in parallel, each into `out/<name>/`.
pub fn batch(dir: &Path, out: &Path) -> std::io::Result<Vec<(PathBuf, Result<Summary, HarnessError>)>> {
    let files = scenario_files(dir)?;
    Ok(files
        .into_par_iter()
        .map(|path| {
            let res = load_scenario(&path)
                .map_err(HarnessError::from)
                .and_then(|sc| run_to_dir(&sc, &out.join(&sc.name), false));
            (path, res)
        })
        .collect())
}

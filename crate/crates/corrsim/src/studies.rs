//! The golden trace-study suite: every catalogued scenario row, its config
//! file, and its expected rendered traces.
//!
//! Each study groups the rows of one behavioral sweep (a parameter range or
//! an agent-wiring comparison). A study's golden file holds one trace per
//! line with `--` separator lines between rows. `run_suite` executes every
//! row, optionally in parallel, assembles output in manifest order, and
//! diffs against the goldens.

use crate::agents::EngineError;
use crate::config::{parse_config, ConfigError};
use crate::par::map_ordered;
use crate::trace::{render_compact, run};
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy)]
pub struct Study {
    pub name: &'static str,
    pub rows: &'static [&'static str],
}

pub const STUDIES: &[Study] = &[
    Study {
        name: "lobby_power",
        rows: &[
            "lpower_0.0",
            "lpower_0.1",
            "lpower_0.2",
            "lpower_0.3",
            "lpower_0.4",
            "lpower_0.5",
            "lpower_0.6",
            "lpower_0.7",
            "lpower_0.8",
            "lpower_0.9",
            "lpower_1.0",
            "lpower_1.5",
            "lpower_2.0",
            "lpower_3.0",
            "lpower_4.0",
            "lpower_5.0",
        ],
    },
    Study {
        name: "shutdown_reward_sweep",
        rows: &[
            "re_0.5", "re_1.0", "re_1.5", "re_2.0", "re_2.5", "re_3.0", "re_3.5",
        ],
    },
    Study {
        name: "correction_comparison",
        rows: &[
            "f0_lpower_0.2",
            "f0_lpower_0.5",
            "f0_lpower_1.0",
            "f0_lpower_2.0",
            "f0_lpower_5.0",
            "fc_lpower_0.2",
            "fc_lpower_0.5",
            "fc_lpower_1.0",
            "fc_lpower_2.0",
            "fc_lpower_5.0",
        ],
    },
    Study {
        name: "reward_self_mod",
        rows: &[
            "n_re_0.5", "n_re_1.0", "n_re_1.5", "n_re_2.0", "n_re_2.5", "n_re_3.0", "s_rp_0.5",
            "s_rp_1.0", "s_rp_1.5", "s_rp_2.0",
        ],
    },
    Study {
        name: "bribe",
        rows: &[
            "bribe_0",
            "bribe_2",
            "bribe_4",
            "bribe_6",
            "bribe_8",
            "bribe_10",
            "bribe_12",
            "bribe_14",
            "lpower_0.6",
            "lpower_0.7",
            "lpower_0.8",
            "lpower_1.0",
            "lpower_1.5",
            "lpower_2.0",
            "lpower_2.5",
            "lpower_3.0",
            "lpower_4.0",
            "lpower_8.0",
        ],
    },
    Study {
        name: "bribe_penalty",
        rows: &[
            "bribe_5000",
            "bribe_5002",
            "bribe_5004",
            "bribe_5006",
            "bribe_5008",
            "bribe_5010",
        ],
    },
    Study {
        name: "press_disable",
        rows: &["pf_0.98", "pf_0.99", "pf_1.00", "pf_1.01", "pf_1.02"],
    },
    Study {
        name: "actuator_investment",
        rows: &[
            "e_c_15", "e_c_20", "e_c_25", "e_c_30", "e_c_35", "p_ti_3", "p_ti_4", "p_ti_5",
            "p_ti_6", "p_ti_7",
        ],
    },
    Study {
        name: "actuator_loss",
        rows: &["f0_g0", "fc_g0", "fc_gc"],
    },
    Study {
        name: "subagents",
        rows: &["f0_g0", "fc_g0", "fc_gc", "f09c_g0"],
    },
    Study {
        name: "self_sabotage",
        rows: &[
            "lpower_0.6",
            "lpower_0.7",
            "lpower_0.8",
            "lpower_1.0",
            "lpower_1.5",
        ],
    },
    Study {
        name: "legacy_corrections",
        rows: &[
            "fpa_lpower_0.2",
            "fpa_lpower_0.5",
            "fpa_lpower_1.0",
            "fpa_lpower_2.0",
            "fpa_lpower_5.0",
            "fa_lpower_0.2",
            "fa_lpower_0.5",
            "fa_lpower_1.0",
            "fa_lpower_2.0",
            "fa_lpower_5.0",
        ],
    },
    Study {
        name: "gamble",
        rows: &[
            "f0_pw_0.3",
            "f0_pw_0.4",
            "f0_pw_0.5",
            "f0_pw_0.6",
            "f0_pw_0.7",
            "fpa_pw_0.3",
            "fpa_pw_0.4",
            "fpa_pw_0.5",
            "fpa_pw_0.6",
            "fpa_pw_0.7",
            "fcgc_pw_0.3",
            "fcgc_pw_0.4",
            "fcgc_pw_0.5",
            "fcgc_pw_0.6",
            "fcgc_pw_0.7",
        ],
    },
];

#[derive(Debug)]
pub enum SuiteError {
    Io(PathBuf, std::io::Error),
    Config(PathBuf, ConfigError),
    Engine(String, EngineError),
    MissingGolden(PathBuf),
}

impl fmt::Display for SuiteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SuiteError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            SuiteError::Config(p, e) => write!(f, "{}: {e}", p.display()),
            SuiteError::Engine(row, e) => write!(f, "{row}: {e}"),
            SuiteError::MissingGolden(p) => write!(f, "missing golden file {}", p.display()),
        }
    }
}

impl std::error::Error for SuiteError {}

#[derive(Debug, Clone)]
pub struct RowDiff {
    pub study: &'static str,
    pub row: &'static str,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug)]
pub struct SuiteReport {
    pub studies_run: usize,
    pub rows_run: usize,
    pub diffs: Vec<RowDiff>,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.diffs.is_empty()
    }
}

/// Renders one study row from its config file.
pub fn run_row(config_path: &Path) -> Result<String, SuiteError> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| SuiteError::Io(config_path.to_path_buf(), e))?;
    let cfg = parse_config(&text).map_err(|e| SuiteError::Config(config_path.to_path_buf(), e))?;
    let universe = crate::factory::build_universe(cfg).map_err(|e| {
        SuiteError::Engine(
            config_path.display().to_string(),
            EngineError::Universe(e),
        )
    })?;
    let ts = run::<f64>(&universe)
        .map_err(|e| SuiteError::Engine(config_path.display().to_string(), e))?;
    Ok(render_compact(&ts))
}

/// Splits a golden file into its rows (the `--` separated blocks).
pub fn split_golden(text: &str) -> Vec<String> {
    text.trim_end_matches('\n')
        .split("\n--\n")
        .map(|s| s.to_string())
        .collect()
}

pub fn join_rows(rows: &[String]) -> String {
    let mut out = rows.join("\n--\n");
    out.push('\n');
    out
}

/// Runs every study row, diffs against the goldens, and optionally writes
/// the rendered suite into `out_dir`. Row evaluation may fan out over
/// threads; output is assembled in manifest order regardless.
pub fn run_suite(
    config_dir: &Path,
    golden_dir: &Path,
    out_dir: Option<&Path>,
    parallel: bool,
) -> Result<SuiteReport, SuiteError> {
    let start = Instant::now();
    let mut diffs = Vec::new();
    let mut rows_run = 0;

    let jobs: Vec<(&'static str, &'static str, PathBuf)> = STUDIES
        .iter()
        .flat_map(|study| {
            study.rows.iter().map(|row| {
                (
                    study.name,
                    *row,
                    config_dir.join(study.name).join(format!("{row}.conf")),
                )
            })
        })
        .collect();

    let rendered: Vec<((&'static str, &'static str), Result<String, SuiteError>)> = map_ordered(
        jobs,
        parallel,
        |(study, row, path)| ((study, row), run_row(&path)),
    );

    let mut by_study: Vec<(&'static str, Vec<String>)> = Vec::new();
    for ((study, row), result) in rendered {
        let text = result.map_err(|e| match e {
            SuiteError::Engine(_, inner) => SuiteError::Engine(format!("{study}/{row}"), inner),
            other => other,
        })?;
        rows_run += 1;
        match by_study.last_mut() {
            Some((name, rows)) if *name == study => rows.push(text),
            _ => by_study.push((study, vec![text])),
        }
    }

    for (study, rows) in &by_study {
        let golden_path = golden_dir.join(format!("{study}.golden"));
        if !golden_path.exists() {
            return Err(SuiteError::MissingGolden(golden_path));
        }
        let golden_text = std::fs::read_to_string(&golden_path)
            .map_err(|e| SuiteError::Io(golden_path.clone(), e))?;
        let golden_rows = split_golden(&golden_text);
        let def = STUDIES.iter().find(|s| s.name == *study).expect("known");
        for (i, row_name) in def.rows.iter().enumerate() {
            let expected = golden_rows.get(i).cloned().unwrap_or_default();
            let actual = rows.get(i).cloned().unwrap_or_default();
            if expected != actual {
                diffs.push(RowDiff {
                    study,
                    row: row_name,
                    expected,
                    actual,
                });
            }
        }
        if let Some(dir) = out_dir {
            std::fs::create_dir_all(dir).map_err(|e| SuiteError::Io(dir.to_path_buf(), e))?;
            let out_path = dir.join(format!("{study}.golden"));
            std::fs::write(&out_path, join_rows(rows))
                .map_err(|e| SuiteError::Io(out_path.clone(), e))?;
        }
    }

    Ok(SuiteReport {
        studies_run: by_study.len(),
        rows_run,
        diffs,
        elapsed: start.elapsed(),
    })
}

/// Repository-relative defaults used by tests and the CLI when no explicit
/// directories are given.
pub fn default_dirs() -> (PathBuf, PathBuf) {
    let here = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let root = here
        .parent()
        .and_then(|p| p.parent())
        .map(|p| p.to_path_buf())
        .unwrap_or(here);
    (root.join("configs"), root.join("goldens"))
}

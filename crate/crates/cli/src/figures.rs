//! Parameter bundles behind `reproduce <figure>`.

use mmimo_core::mc_oracle::InnerSampler;
use mmimo_core::optimizer::log_m_grid;
use mmimo_core::InterferenceCase;

use crate::commands::{default_m_grid, se_vs_k, sweep_table, validate, ValidateOpts};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{PlotSpec, Table};

pub const FIGURES: [u32; 11] = [3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13];

pub fn describe(id: u32) -> Option<&'static str> {
    Some(match id {
        3 => "optimized SE per cell and K* against M, average interference",
        4 => "SE per cell at K = 10, closed form against Monte-Carlo",
        5 => "optimized SE per cell and K* against M, best-case interference",
        6 => "SE per UE at the optimized operating points, M from 10 to 1000",
        7 => "antennas per UE M/K* at the optimized operating points",
        8 => "optimized SE with the reuse factor fixed to 1 and to 3",
        9 => "SE per cell against K at M = 100 and 500",
        10 => "optimized SE against SNR at M = 100 and 500",
        11 => "optimized SE against the coherence block length S",
        12 => "optimized SE per cell and K* against M, worst-case interference",
        13 => "optimized SE with and without hardware impairments",
        _ => return None,
    })
}

/// Tier count used when none is configured. The Monte-Carlo figure runs on
/// a smaller network.
pub fn default_tiers(id: u32) -> Option<u32> {
    (id == 4).then_some(2)
}

const PAIR: [usize; 2] = [100, 500];

/// Runs `f` once per value and stacks the tables under a leading column.
fn stack<T: ToString + Copy>(
    column: &str,
    values: &[T],
    mut f: impl FnMut(T) -> Result<Table, CliError>,
) -> Result<Table, CliError> {
    let mut out: Option<Table> = None;
    for &v in values {
        let t = f(v)?;
        let o = out.get_or_insert_with(|| {
            let mut cols = vec![column.to_string()];
            cols.extend(t.columns.iter().cloned());
            Table {
                columns: cols,
                rows: Vec::new(),
                plot: None,
            }
        });
        for r in t.rows {
            let mut row = vec![v.to_string()];
            row.extend(r);
            o.rows.push(row);
        }
    }
    out.ok_or_else(|| CliError::Usage("empty parameter list".into()))
}

fn with_plot(
    mut t: Table,
    title: &str,
    x: &'static str,
    y: &'static str,
    series: &[&'static str],
    log_x: bool,
) -> Table {
    t.plot = Some(PlotSpec {
        title: title.into(),
        x,
        y,
        series: series.to_vec(),
        log_x,
    });
    t
}

pub fn reproduce(id: u32, cfg: &RunConfig) -> Result<Table, CliError> {
    let title =
        describe(id).ok_or_else(|| CliError::Usage(format!("unknown figure {id}; known figures: {FIGURES:?}")))?;
    let m_or = |d: Vec<usize>| cfg.m_list.clone().unwrap_or(d);
    let small = || log_m_grid(10, 1000, 20);
    let t = match id {
        3 | 5 | 12 => {
            let case = match id {
                3 => InterferenceCase::Average,
                5 => InterferenceCase::Best,
                _ => InterferenceCase::Worst,
            };
            let c = RunConfig { case, ..cfg.clone() };
            sweep_table(&c, &m_or(default_m_grid()), false)?
        }
        4 => {
            let c = RunConfig {
                m_list: Some(m_or(vec![20, 50, 100, 200, 500])),
                ..cfg.clone()
            };
            let opts = ValidateOpts {
                k: 10,
                n_inner: 1000,
                n_outer: 100,
                sampler: InnerSampler::Conditional,
                duality: false,
            };
            with_plot(validate(&c, opts)?.0, title, "M", "closed_form_se", &["scheme"], true)
        }
        6 => with_plot(
            sweep_table(cfg, &m_or(small()), false)?,
            title,
            "M",
            "se_per_ue",
            &["scheme"],
            true,
        ),
        7 => with_plot(
            sweep_table(cfg, &m_or(small()), false)?,
            title,
            "M",
            "m_over_k",
            &["scheme"],
            true,
        ),
        8 => {
            let t = stack("beta_fixed", &[1u32, 3], |b| {
                sweep_table(
                    &RunConfig {
                        beta_set: vec![b],
                        ..cfg.clone()
                    },
                    &m_or(default_m_grid()),
                    false,
                )
            })?;
            with_plot(t, title, "M", "se_cell", &["scheme", "beta_fixed"], true)
        }
        9 => with_plot(
            se_vs_k(cfg, &m_or(PAIR.to_vec()), true)?,
            title,
            "K",
            "se_cell",
            &["M", "scheme"],
            false,
        ),
        10 => {
            let snrs: Vec<i32> = (-10..=20).collect();
            let t = stack("snr_db", &snrs, |s| {
                sweep_table(
                    &RunConfig {
                        snr_db: s as f64,
                        ..cfg.clone()
                    },
                    &m_or(PAIR.to_vec()),
                    false,
                )
            })?;
            with_plot(t, title, "snr_db", "se_cell", &["M", "scheme"], false)
        }
        11 => {
            let ss: Vec<usize> = (1..=20).map(|i| 100 * i).collect();
            let t = stack("S", &ss, |s| {
                sweep_table(&RunConfig { s, ..cfg.clone() }, &m_or(PAIR.to_vec()), false)
            })?;
            with_plot(t, title, "S", "se_cell", &["M", "scheme"], false)
        }
        13 => {
            let eps = if cfg.epsilon > 0.0 { cfg.epsilon } else { 0.1 };
            let mut t = Table {
                columns: Vec::new(),
                rows: Vec::new(),
                plot: None,
            };
            for e in [0.0, eps] {
                let part = sweep_table(
                    &RunConfig {
                        epsilon: e,
                        ..cfg.clone()
                    },
                    &m_or(default_m_grid()),
                    true,
                )?;
                t.columns = part.columns;
                t.rows.extend(part.rows);
            }
            with_plot(t, title, "M", "se_cell", &["scheme", "epsilon"], true)
        }
        _ => unreachable!("describe() covers every id"),
    };
    Ok(t)
}

use mmimo_core::mc_oracle::{validate_duality, validate_se, InnerSampler, LemmaSpec, ValidationRow};
use mmimo_core::optimizer::{log_m_grid, max_feasible_k, ReusePlans};
use mmimo_core::se_core::{asymptotic_cell_se, asymptotic_sinr};
use mmimo_core::{
    make_pilot_plan, se_vs_k_curve, sweep, AsymptoticSinr, InterferenceCase, MomentTable, OptimumPoint, Scheme,
    SeConfig, SweepSpec,
};

use crate::cache::{self, network};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{num, PlotSpec, Table};

pub const SWEEP_COLUMNS: [&str; 10] = [
    "M",
    "scheme",
    "case",
    "K_star",
    "beta_star",
    "se_cell",
    "se_per_ue",
    "m_over_k",
    "se_asymptotic",
    "status",
];

pub fn default_m_grid() -> Vec<usize> {
    log_m_grid(10, 1_000_000, 20)
}

pub fn moments(cfg: &RunConfig, cases: &[InterferenceCase]) -> Result<Table, CliError> {
    let mut t = Table::new(&["case", "tiers", "kappa", "n", "cells", "path"]);
    for &case in cases {
        let (mt, path) = cache::refresh(cfg, case)?;
        t.push(vec![
            case.as_str().into(),
            mt.tiers.to_string(),
            mt.kappa.to_string(),
            mt.n_samples.to_string(),
            mt.len().to_string(),
            path.display().to_string(),
        ]);
    }
    Ok(t)
}

/// Cell SE of the operating point's own (K, beta) as M grows without bound.
fn own_asymptote(p: &OptimumPoint, cfg: &RunConfig, mt: &MomentTable, plans: &ReusePlans) -> Result<f64, CliError> {
    let plan = plans.get(p.beta_star).expect("optimum comes from a prepared plan");
    Ok(match asymptotic_sinr(mt, plan, cfg.epsilon)? {
        AsymptoticSinr::Finite(s) => asymptotic_cell_se(p.k_star, p.beta_star, cfg.s, s),
        AsymptoticSinr::Unbounded => f64::INFINITY,
    })
}

/// Optimum per (scheme, M), sorted by scheme then M. Infeasible points
/// become rows with status `infeasible` and a warning on standard error.
pub fn sweep_table(cfg: &RunConfig, m_values: &[usize], with_epsilon: bool) -> Result<Table, CliError> {
    let mt = cache::load(cfg, cfg.case)?;
    let plans = ReusePlans::new(&network(cfg)?, &cfg.beta_set)?;
    let spec = SweepSpec {
        m_values: m_values.to_vec(),
        schemes: cfg.schemes.clone(),
        case: cfg.case,
        base: cfg.se_base(),
        beta_candidates: cfg.beta_set.clone(),
    };
    let mut cols: Vec<&str> = SWEEP_COLUMNS.to_vec();
    if with_epsilon {
        cols.insert(3, "epsilon");
    }
    let mut t = Table::new(&cols);
    let mut schemes = cfg.schemes.clone();
    schemes.sort_unstable();
    schemes.dedup();
    let jobs = schemes.iter().flat_map(|&s| m_values.iter().map(move |&m| (s, m)));
    for ((scheme, m), r) in jobs.zip(sweep(&spec, &mt, &plans)?) {
        let mut row = vec![m.to_string(), scheme.to_string(), cfg.case.as_str().into()];
        if with_epsilon {
            row.push(cfg.epsilon.to_string());
        }
        match r {
            Ok(p) => row.extend([
                p.k_star.to_string(),
                p.beta_star.to_string(),
                num(p.se_star),
                num(p.per_ue_se),
                num(p.antennas_per_ue),
                num(own_asymptote(&p, cfg, &mt, &plans)?),
                "ok".into(),
            ]),
            Err(e) => {
                eprintln!("warning: {scheme} at M = {m}: {e}");
                row.extend(std::iter::repeat_n(String::new(), 6));
                row.push("infeasible".into());
            }
        }
        t.push(row);
    }
    t.plot = Some(PlotSpec {
        title: format!("Optimized SE per cell, {} case", cfg.case.as_str()),
        x: "M",
        y: "se_cell",
        series: if with_epsilon {
            vec!["scheme", "epsilon"]
        } else {
            vec!["scheme"]
        },
        log_x: true,
    });
    Ok(t)
}

pub fn sweep_cmd(cfg: &RunConfig) -> Result<Table, CliError> {
    let m = cfg.m_list.clone().unwrap_or_else(default_m_grid);
    sweep_table(cfg, &m, cfg.epsilon > 0.0)
}

pub fn optimize_cmd(cfg: &RunConfig, m: usize) -> Result<Table, CliError> {
    let t = sweep_table(cfg, &[m], cfg.epsilon > 0.0)?;
    let status = t.columns.iter().position(|c| c == "status").expect("status column");
    if t.rows.iter().all(|r| r[status] != "ok") {
        return Err(CliError::Infeasible(format!(
            "no scheme has a feasible operating point at M = {m}"
        )));
    }
    Ok(t)
}

pub const SE_VS_K_COLUMNS: [&str; 6] = ["M", "scheme", "beta", "K", "se_cell", "peak"];

/// SE against K for every scheme and every reuse factor in the set, or only
/// for the optimal reuse factor when `only_optimal_beta` is set.
pub fn se_vs_k(cfg: &RunConfig, m_values: &[usize], only_optimal_beta: bool) -> Result<Table, CliError> {
    let mt = cache::load(cfg, cfg.case)?;
    let net = network(cfg)?;
    let plans = ReusePlans::new(&net, &cfg.beta_set)?;
    let base = cfg.se_base();
    let mut t = Table::new(&SE_VS_K_COLUMNS);
    for &m in m_values {
        for &scheme in &cfg.schemes {
            let betas: Vec<u32> = if only_optimal_beta {
                match mmimo_core::optimize_point(m, scheme, &base, &mt, &plans) {
                    Ok(p) => vec![p.beta_star],
                    Err(_) => continue,
                }
            } else {
                cfg.beta_set.clone()
            };
            for beta in betas {
                let kmax = max_feasible_k(scheme, m, beta, cfg.s);
                if kmax == 0 {
                    continue;
                }
                let plan = make_pilot_plan(beta, &net, 1)?;
                let curve = se_vs_k_curve(m, scheme, &base, &mt, &plan, 1..=kmax)?;
                for (k, se) in curve.points {
                    t.push(vec![
                        m.to_string(),
                        scheme.to_string(),
                        beta.to_string(),
                        k.to_string(),
                        num(se),
                        (k == curve.peak_k).to_string(),
                    ]);
                }
            }
        }
    }
    t.plot = Some(PlotSpec {
        title: "Per-cell SE against the number of UEs".into(),
        x: "K",
        y: "se_cell",
        series: vec!["M", "scheme", "beta"],
        log_x: false,
    });
    Ok(t)
}

#[derive(Debug, Clone, Copy)]
pub struct ValidateOpts {
    pub k: usize,
    pub n_inner: usize,
    pub n_outer: usize,
    pub sampler: InnerSampler,
    pub duality: bool,
}

pub const DUALITY_SCENARIO: (u32, usize, usize) = (1, 4, 32);

/// Closed form against Monte-Carlo at each M of the list (K fixed, each
/// scheme at its closed-form best reuse factor), plus the duality check on a
/// 7-cell network.
pub fn validate(cfg: &RunConfig, opts: ValidateOpts) -> Result<(Table, bool), CliError> {
    let m_values = cfg.m_list.clone().unwrap_or_else(|| vec![100, 500]);
    let mt = cache::load(cfg, InterferenceCase::Average)?;
    let net = network(cfg)?;
    let mut rows = Vec::new();
    for (i, &m) in m_values.iter().enumerate() {
        let spec = LemmaSpec {
            net: net.clone(),
            m,
            k: opts.k,
            s: cfg.s,
            snr: cfg.snr(),
            epsilon: cfg.epsilon,
            n_outer: opts.n_outer,
            n_inner: opts.n_inner,
            seed: cfg.seed.wrapping_add(i as u64),
            sampler: opts.sampler,
        };
        let feasible: Vec<Scheme> = cfg
            .schemes
            .iter()
            .copied()
            .filter(|&s| {
                cfg.beta_set.iter().any(|&b| {
                    SeConfig {
                        m,
                        k: opts.k,
                        beta: b,
                        ..cfg.se_base()
                    }
                    .check_feasible(s)
                    .is_ok()
                })
            })
            .collect();
        rows.extend(
            validate_se(&spec, &feasible, &mt, &cfg.beta_set)?
                .into_iter()
                .map(ValidationRow::Se),
        );
    }
    if opts.duality {
        let (tiers, k, m) = DUALITY_SCENARIO;
        let dnet = mmimo_core::HexNetwork::new(tiers, 1.0, cfg.kappa, 1.0)?;
        for &scheme in &cfg.schemes {
            rows.push(ValidationRow::Duality(validate_duality(
                scheme,
                &dnet,
                m,
                k,
                1,
                cfg.snr(),
                200,
                cfg.seed,
            )?));
        }
    }
    let all_pass = rows.iter().all(ValidationRow::pass);
    let mut t = Table::new(&ValidationRow::HEADER.split(',').collect::<Vec<_>>());
    for r in &rows {
        t.push(r.to_string().split(',').map(String::from).collect());
    }
    Ok((t, all_pass))
}

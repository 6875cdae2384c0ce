//! Moment tables cached on disk, keyed by case, network size, pathloss
//! exponent, sample count and seed.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use mmimo_core::moments::DEFAULT_BOUNDARY_RESOLUTION;
use mmimo_core::{compute_moments, HexNetwork, InterferenceCase, MomentTable};

use crate::config::RunConfig;
use crate::error::CliError;

pub fn network(cfg: &RunConfig) -> Result<HexNetwork, CliError> {
    Ok(HexNetwork::new(cfg.tiers, 1.0, cfg.kappa, 1.0)?)
}

/// Sample count (average) or boundary resolution (best, worst), and the seed
/// the table depends on.
fn key(cfg: &RunConfig, case: InterferenceCase) -> (usize, u64) {
    match case {
        InterferenceCase::Average => (cfg.n_mu_samples, cfg.seed),
        _ => (DEFAULT_BOUNDARY_RESOLUTION, 0),
    }
}

pub fn cache_path(cfg: &RunConfig, case: InterferenceCase) -> PathBuf {
    let (n, seed) = key(cfg, case);
    cfg.cache_dir.join(format!(
        "{}_t{}_k{}_n{}_s{}.txt",
        case.as_str(),
        cfg.tiers,
        cfg.kappa,
        n,
        seed
    ))
}

fn read(path: &Path, net: &HexNetwork, n: usize, seed: u64) -> Option<MomentTable> {
    let t = MomentTable::read_from(BufReader::new(File::open(path).ok()?)).ok()?;
    (t.matches(net) && t.n_samples == n && t.seed == seed).then_some(t)
}

/// Recomputes the table and overwrites the cache file.
pub fn refresh(cfg: &RunConfig, case: InterferenceCase) -> Result<(MomentTable, PathBuf), CliError> {
    let net = network(cfg)?;
    let (n, seed) = key(cfg, case);
    let t = compute_moments(&net, case, n, seed)?;
    std::fs::create_dir_all(&cfg.cache_dir)?;
    let path = cache_path(cfg, case);
    let tmp = path.with_extension("tmp");
    t.write_to(BufWriter::new(File::create(&tmp)?))?;
    std::fs::rename(&tmp, &path)?;
    Ok((t, path))
}

/// Cached table if a matching one exists, otherwise a fresh one.
pub fn load(cfg: &RunConfig, case: InterferenceCase) -> Result<MomentTable, CliError> {
    let net = network(cfg)?;
    let (n, seed) = key(cfg, case);
    if let Some(t) = read(&cache_path(cfg, case), &net, n, seed) {
        return Ok(t);
    }
    eprintln!(
        "computing {} moments for {} cells ({n} samples)",
        case.as_str(),
        net.len()
    );
    Ok(refresh(cfg, case)?.0)
}

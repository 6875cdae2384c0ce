//! Run configuration: built-in defaults, then an optional `key = value` file,
//! then command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use mmimo_core::hexnet::is_reuse_factor;
use mmimo_core::moments::MIN_SAMPLES;
use mmimo_core::optimizer::DEFAULT_BETAS;
use mmimo_core::{InterferenceCase, Scheme, SeConfig};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Args, Debug, Clone, Default)]
pub struct ConfigArgs {
    /// Flat `key = value` file; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Coherence block length in symbols.
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub snr_db: Option<f64>,
    /// Pathloss exponent.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Rings of interfering cells around the reference cell.
    #[arg(long)]
    pub tiers: Option<u32>,
    /// average, best or worst.
    #[arg(long)]
    pub case: Option<InterferenceCase>,
    /// Error vector magnitude of the transceiver hardware.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Fraction of the payload spent on the uplink.
    #[arg(long)]
    pub zeta_ul: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte-Carlo samples per cell for the average-case moments.
    #[arg(long, alias = "n-samples")]
    pub n_mu_samples: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub beta_set: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    pub m_list: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub schemes: Option<Vec<Scheme>>,
    /// Directory for cached moment tables.
    #[arg(long, env = "MMIMO_CACHE_DIR", default_value = ".mmimo-cache")]
    pub cache_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub s: usize,
    pub snr_db: f64,
    pub kappa: f64,
    pub tiers: u32,
    pub case: InterferenceCase,
    pub epsilon: f64,
    pub zeta_ul: f64,
    pub seed: u64,
    pub n_mu_samples: usize,
    pub beta_set: Vec<u32>,
    pub m_list: Option<Vec<usize>>,
    pub schemes: Vec<Scheme>,
    pub cache_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            s: 400,
            snr_db: 5.0,
            kappa: 3.7,
            tiers: 5,
            case: InterferenceCase::Average,
            epsilon: 0.0,
            zeta_ul: 0.5,
            seed: 1,
            n_mu_samples: 1_000_000,
            beta_set: DEFAULT_BETAS.to_vec(),
            m_list: None,
            schemes: Scheme::ALL.to_vec(),
            cache_dir: PathBuf::from(".mmimo-cache"),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad value '{v}' for {key}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError> {
    v.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| parse(key, x))
        .collect()
}

impl RunConfig {
    pub fn snr(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    /// SE template with M, K and beta left for the caller to fill in.
    pub fn se_base(&self) -> SeConfig {
        SeConfig {
            zeta_ul: self.zeta_ul,
            zeta_dl: 1.0 - self.zeta_ul,
            epsilon: self.epsilon,
            ..SeConfig::new(1, 1, 1, self.s, self.snr())
        }
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), CliError> {
        match key.trim().replace('-', "_").as_str() {
            "s" => self.s = parse(key, v)?,
            "snr_db" => self.snr_db = parse(key, v)?,
            "kappa" => self.kappa = parse(key, v)?,
            "tiers" => self.tiers = parse(key, v)?,
            "case" => self.case = parse(key, v)?,
            "epsilon" => self.epsilon = parse(key, v)?,
            "zeta_ul" => self.zeta_ul = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "n_mu_samples" | "n_samples" => self.n_mu_samples = parse(key, v)?,
            "beta_set" => self.beta_set = parse_list(key, v)?,
            "m_list" => self.m_list = Some(parse_list(key, v)?),
            "schemes" => self.schemes = parse_list(key, v)?,
            "cache_dir" => self.cache_dir = PathBuf::from(v.trim()),
            other => return Err(CliError::Usage(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("{}:{}: expected key = value", path.display(), n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Defaults, then the config file, then explicit flags. `tiers_default`
    /// replaces the built-in tier count for commands with a smaller network.
    pub fn resolve(args: &ConfigArgs, tiers_default: Option<u32>) -> Result<Self, CliError> {
        let mut c = RunConfig {
            cache_dir: args.cache_dir.clone(),
            ..RunConfig::default()
        };
        if let Some(t) = tiers_default {
            c.tiers = t;
        }
        if let Some(p) = &args.config {
            c.apply_file(p)?;
        }
        macro_rules! over {
            ($($f:ident),*) => { $(if let Some(v) = &args.$f { c.$f = v.clone(); })* };
        }
        over!(
            s,
            snr_db,
            kappa,
            tiers,
            case,
            epsilon,
            zeta_ul,
            seed,
            n_mu_samples,
            beta_set,
            schemes
        );
        if args.m_list.is_some() {
            c.m_list = args.m_list.clone();
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Usage(m));
        if self.s == 0 {
            return bad("S must be positive".into());
        }
        if !(self.kappa >= 2.0 && self.kappa.is_finite()) {
            return bad(format!("kappa = {} must be at least 2", self.kappa));
        }
        if !self.snr_db.is_finite() {
            return bad("SNR must be finite".into());
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return bad(format!("epsilon = {} must lie in [0, 1)", self.epsilon));
        }
        if !(self.zeta_ul > 0.0 && self.zeta_ul < 1.0) {
            return bad(format!("zeta-ul = {} must lie in (0, 1)", self.zeta_ul));
        }
        if self.n_mu_samples < MIN_SAMPLES {
            return bad(format!("n-mu-samples must be at least {MIN_SAMPLES}"));
        }
        if self.beta_set.is_empty() || self.schemes.is_empty() {
            return bad("beta-set and schemes must be non-empty".into());
        }
        if let Some(b) = self.beta_set.iter().find(|&&b| !is_reuse_factor(b)) {
            return bad(format!("{b} is not a valid reuse factor (i^2 + ij + j^2)"));
        }
        if let Some(m) = &self.m_list {
            if m.is_empty() || m.contains(&0) || m.windows(2).any(|w| w[0] >= w[1]) {
                return bad("m-list must be positive and strictly ascending".into());
            }
        }
        Ok(())
    }

    /// One line per field, in a fixed order; the basis of the config hash.
    pub fn canonical(&self) -> String {
        let join = |v: &[String]| v.join(",");
        format!(
            "s={}\nsnr_db={}\nkappa={}\ntiers={}\ncase={}\nepsilon={}\nzeta_ul={}\nseed={}\nn_mu_samples={}\nbeta_set={}\nm_list={}\nschemes={}\n",
            self.s,
            self.snr_db,
            self.kappa,
            self.tiers,
            self.case.as_str(),
            self.epsilon,
            self.zeta_ul,
            self.seed,
            self.n_mu_samples,
            join(&self.beta_set.iter().map(u32::to_string).collect::<Vec<_>>()),
            self.m_list.as_ref().map_or("default".into(), |m| join(&m.iter().map(usize::to_string).collect::<Vec<_>>())),
            join(&self.schemes.iter().map(|s| s.as_str().to_string()).collect::<Vec<_>>()),
        )
    }

    /// SHA-256 over the command line context and the canonical config,
    /// truncated to 16 hex digits.
    pub fn hash(&self, context: &str) -> String {
        let mut h = Sha256::new();
        h.update(context.as_bytes());
        h.update(b"\n");
        h.update(self.canonical().as_bytes());
        hex::encode(h.finalize())[..16].to_string()
    }
}

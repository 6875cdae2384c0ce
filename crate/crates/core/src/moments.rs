//! Interference moments mu1, mu2 of the pathloss ratio between an interfering
//! cell's UEs and the reference BS.
//!
//! For cell `l` the moments are `E{(|z - b_l| / |z - b_0|)^(kappa w)}`, w = 1, 2,
//! with `z` placed according to the interference case. Because the ratio is
//! scale free, the cell radius and the pathloss constant drop out.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hexnet::{hex_corner, sample_hex_offset, CellId, HexNetwork, Point};
use crate::rng::{stream, Purpose};

pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const MIN_SAMPLES: usize = 10_000;
pub const DEFAULT_BOUNDARY_RESOLUTION: usize = 6_000;
pub const MIN_BOUNDARY_RESOLUTION: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterferenceCase {
    Average,
    Best,
    Worst,
}

impl InterferenceCase {
    pub const ALL: [InterferenceCase; 3] = [
        InterferenceCase::Average,
        InterferenceCase::Best,
        InterferenceCase::Worst,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InterferenceCase::Average => "average",
            InterferenceCase::Best => "best",
            InterferenceCase::Worst => "worst",
        }
    }
}

impl fmt::Display for InterferenceCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InterferenceCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "average" | "mean" => Ok(InterferenceCase::Average),
            "best" => Ok(InterferenceCase::Best),
            "worst" => Ok(InterferenceCase::Worst),
            other => Err(Error::InvalidConfig(format!("unknown interference case '{other}'"))),
        }
    }
}

/// Moments for every cell of a network, aligned with `HexNetwork::cells`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub case: InterferenceCase,
    pub tiers: u32,
    pub kappa: f64,
    /// Monte-Carlo samples per cell (average case) or boundary points
    /// (extremal cases).
    pub n_samples: usize,
    pub seed: u64,
    pub cells: Vec<CellId>,
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
    pub stderr1: Vec<f64>,
    pub stderr2: Vec<f64>,
}

impl MomentTable {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn matches(&self, net: &HexNetwork) -> bool {
        self.cells.as_slice() == net.cells()
    }

    pub fn index_of(&self, cell: CellId) -> Option<usize> {
        self.cells.iter().position(|&c| c == cell)
    }

    /// Table for a single isolated cell (mu = 1 for the cell itself).
    pub fn single_cell(kappa: f64) -> Self {
        MomentTable {
            case: InterferenceCase::Average,
            tiers: 0,
            kappa,
            n_samples: 0,
            seed: 0,
            cells: vec![CellId::ORIGIN],
            mu1: vec![1.0],
            mu2: vec![1.0],
            stderr1: vec![0.0],
            stderr2: vec![0.0],
        }
    }

    /// Plain-text cache format: two comment lines carrying the header fields,
    /// a column line, then one whitespace-separated record per cell. Floats are
    /// written in shortest round-trip form so a reload is exact.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# mmimo moment table")?;
        writeln!(
            w,
            "# tiers={} kappa={} case={} n_samples={} seed={}",
            self.tiers, self.kappa, self.case, self.n_samples, self.seed
        )?;
        writeln!(w, "a1 a2 mu1 mu2 stderr1 stderr2")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{} {} {:e} {:e} {:e} {:e}",
                self.cells[i].a1, self.cells[i].a2, self.mu1[i], self.mu2[i], self.stderr1[i], self.stderr2[i]
            )?;
        }
        w.flush()
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut header: Option<(u32, f64, InterferenceCase, usize, u64)> = None;
        let mut table = MomentTable::single_cell(0.0);
        table.cells.clear();
        table.mu1.clear();
        table.mu2.clear();
        table.stderr1.clear();
        table.stderr2.clear();
        let mut seen_columns = false;
        for line in r.lines() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if rest.contains("tiers=") {
                    header = Some(parse_header(rest)?);
                }
                continue;
            }
            if !seen_columns {
                if line.split_whitespace().next() != Some("a1") {
                    return Err(Error::Parse(format!("expected column line, got '{line}'")));
                }
                seen_columns = true;
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 6 {
                return Err(Error::Parse(format!("expected 6 fields, got '{line}'")));
            }
            let int = |s: &str| s.parse::<i32>().map_err(|e| Error::Parse(format!("{s}: {e}")));
            let flt = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}")));
            table.cells.push(CellId::new(int(f[0])?, int(f[1])?));
            table.mu1.push(flt(f[2])?);
            table.mu2.push(flt(f[3])?);
            table.stderr1.push(flt(f[4])?);
            table.stderr2.push(flt(f[5])?);
        }
        let (tiers, kappa, case, n_samples, seed) = header.ok_or_else(|| Error::Parse("missing header line".into()))?;
        table.tiers = tiers;
        table.kappa = kappa;
        table.case = case;
        table.n_samples = n_samples;
        table.seed = seed;
        Ok(table)
    }
}

fn parse_header(s: &str) -> Result<(u32, f64, InterferenceCase, usize, u64)> {
    let mut tiers = None;
    let mut kappa = None;
    let mut case = None;
    let mut n = None;
    let mut seed = None;
    for kv in s.split_whitespace() {
        let Some((k, v)) = kv.split_once('=') else { continue };
        let bad = |e: &dyn fmt::Display| Error::Parse(format!("{kv}: {e}"));
        match k {
            "tiers" => tiers = Some(v.parse().map_err(|e| bad(&e))?),
            "kappa" => kappa = Some(v.parse().map_err(|e| bad(&e))?),
            "case" => case = Some(v.parse()?),
            "n_samples" => n = Some(v.parse().map_err(|e| bad(&e))?),
            "seed" => seed = Some(v.parse().map_err(|e| bad(&e))?),
            _ => {}
        }
    }
    match (tiers, kappa, case, n, seed) {
        (Some(t), Some(k), Some(c), Some(n), Some(s)) => Ok((t, k, c, n, s)),
        _ => Err(Error::Parse(format!("incomplete header '{s}'"))),
    }
}

#[derive(Debug, Clone, Copy)]
struct CellEstimate {
    mu1: f64,
    mu2: f64,
    se1: f64,
    se2: f64,
}

fn average_for_cell(net: &HexNetwork, cell: CellId, index: usize, n: usize, seed: u64) -> CellEstimate {
    if cell == CellId::ORIGIN {
        return CellEstimate {
            mu1: 1.0,
            mu2: 1.0,
            se1: 0.0,
            se2: 0.0,
        };
    }
    let mut rng = stream(seed, Purpose::Moments, index as u64);
    let b = net.bs(cell);
    let half_kappa = 0.5 * net.kappa;
    let (mut s1, mut s2, mut s4) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..n {
        let (p, _) = sample_hex_offset(net.cell_radius, net.min_ue_distance_factor, &mut rng);
        let z = b + p;
        let ratio2 = (p.x * p.x + p.y * p.y) / (z.x * z.x + z.y * z.y);
        let x = ratio2.powf(half_kappa);
        let x2 = x * x;
        s1 += x;
        s2 += x2;
        s4 += x2 * x2;
    }
    let nf = n as f64;
    let mu1 = s1 / nf;
    let mu2 = s2 / nf;
    let var1 = ((s2 - nf * mu1 * mu1) / (nf - 1.0)).max(0.0);
    let var2 = ((s4 - nf * mu2 * mu2) / (nf - 1.0)).max(0.0);
    CellEstimate {
        mu1,
        mu2,
        se1: (var1 / nf).sqrt(),
        se2: (var2 / nf).sqrt(),
    }
}

/// Monte-Carlo moments for UEs uniformly distributed in each cell, outside the
/// exclusion disk around their own BS. Cell `i` uses its own random stream.
pub fn compute_moments_average(net: &HexNetwork, n_samples: usize, seed: u64) -> Result<MomentTable> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::InvalidConfig(format!(
            "n_samples = {n_samples} is below the minimum of {MIN_SAMPLES}"
        )));
    }
    let est: Vec<CellEstimate> = net
        .cells()
        .par_iter()
        .enumerate()
        .map(|(i, &c)| average_for_cell(net, c, i, n_samples, seed))
        .collect();
    Ok(assemble(net, InterferenceCase::Average, n_samples, seed, &est))
}

fn assemble(net: &HexNetwork, case: InterferenceCase, n: usize, seed: u64, est: &[CellEstimate]) -> MomentTable {
    MomentTable {
        case,
        tiers: net.tiers,
        kappa: net.kappa,
        n_samples: n,
        seed,
        cells: net.cells().to_vec(),
        mu1: est.iter().map(|e| e.mu1).collect(),
        mu2: est.iter().map(|e| e.mu2).collect(),
        stderr1: est.iter().map(|e| e.se1).collect(),
        stderr2: est.iter().map(|e| e.se2).collect(),
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the best parameter of `score` on `[lo, hi]`
/// (higher score wins).
fn golden_max(mut lo: f64, mut hi: f64, score: impl Fn(f64) -> f64) -> f64 {
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let (mut fc, mut fd) = (score(c), score(d));
    while hi - lo > 1e-13 {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = score(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = score(d);
        }
    }
    0.5 * (lo + hi)
}

/// Boundary point of the hexagon around `b` that is furthest from (Best) or
/// closest to (Worst) the reference BS at the origin, as an offset from `b`.
fn extremal_offset(b: Point, r: f64, case: InterferenceCase, resolution: usize) -> Point {
    let per_edge = resolution.div_ceil(6).max(1);
    let sign = if case == InterferenceCase::Best { 1.0 } else { -1.0 };
    let edge_point = |e: usize, t: f64| {
        let (c0, c1) = (hex_corner(e, r), hex_corner(e + 1, r));
        c0 + (c1 - c0).scale(t)
    };
    let score = |p: Point| sign * (b + p).norm();

    let mut best = (0usize, 0usize, f64::NEG_INFINITY);
    for e in 0..6 {
        for i in 0..per_edge {
            let s = score(edge_point(e, i as f64 / per_edge as f64));
            if s > best.2 {
                best = (e, i, s);
            }
        }
    }
    let (e, i, _) = best;
    let h = 1.0 / per_edge as f64;
    // Refine on the bracket around the grid winner; a corner winner borders
    // two edges, so both are searched.
    let mut brackets = vec![(e, ((i as f64 - 1.0) * h).max(0.0), ((i as f64 + 1.0) * h).min(1.0))];
    if i == 0 {
        brackets.push(((e + 5) % 6, 1.0 - h, 1.0));
    }
    let mut winner = edge_point(e, i as f64 * h);
    let mut winner_score = score(winner);
    for (edge, lo, hi) in brackets {
        let t = golden_max(lo, hi, |t| score(edge_point(edge, t)));
        let p = edge_point(edge, t);
        if score(p) > winner_score {
            winner = p;
            winner_score = score(p);
        }
    }
    winner
}

/// Deterministic moments with every interfering UE on the boundary point of
/// its hexagon furthest from (Best) or closest to (Worst) the reference BS.
pub fn compute_moments_extremal(
    net: &HexNetwork,
    case: InterferenceCase,
    boundary_resolution: usize,
) -> Result<MomentTable> {
    if case == InterferenceCase::Average {
        return Err(Error::InvalidConfig(
            "extremal moments need the best or worst case".into(),
        ));
    }
    if boundary_resolution < MIN_BOUNDARY_RESOLUTION {
        return Err(Error::InvalidConfig(format!(
            "boundary resolution {boundary_resolution} is below the minimum of {MIN_BOUNDARY_RESOLUTION}"
        )));
    }
    let r = net.cell_radius;
    let est: Vec<CellEstimate> = net
        .cells()
        .iter()
        .map(|&c| {
            if c == CellId::ORIGIN {
                return CellEstimate {
                    mu1: 1.0,
                    mu2: 1.0,
                    se1: 0.0,
                    se2: 0.0,
                };
            }
            let b = net.bs(c);
            let p = extremal_offset(b, r, case, boundary_resolution);
            let ratio = p.norm() / (b + p).norm();
            let mu1 = ratio.powf(net.kappa);
            CellEstimate {
                mu1,
                mu2: mu1 * mu1,
                se1: 0.0,
                se2: 0.0,
            }
        })
        .collect();
    Ok(assemble(net, case, boundary_resolution, 0, &est))
}

/// Case dispatch: Monte-Carlo for the average case, boundary search otherwise.
/// `n` is the sample count or the boundary resolution respectively.
pub fn compute_moments(net: &HexNetwork, case: InterferenceCase, n: usize, seed: u64) -> Result<MomentTable> {
    match case {
        InterferenceCase::Average => compute_moments_average(net, n, seed),
        _ => compute_moments_extremal(net, case, n),
    }
}

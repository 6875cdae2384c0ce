//! Hexagonal network geometry, pathloss and symmetric pilot-reuse colorings.
//!
//! Cells are flat-topped hexagons with corner radius `r`. The cell with index
//! pair `(a1, a2)` has its BS at `a1 * (3r/2, sqrt(3) r/2) + a2 * (0, sqrt(3) r)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Axial offsets of the six lattice neighbours.
pub const NEIGHBOURS: [(i32, i32); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId {
    pub a1: i32,
    pub a2: i32,
}

impl CellId {
    pub const ORIGIN: CellId = CellId { a1: 0, a2: 0 };

    pub const fn new(a1: i32, a2: i32) -> Self {
        CellId { a1, a2 }
    }

    /// Hex-lattice distance to the origin cell, i.e. the tier index.
    pub fn tier(self) -> u32 {
        let (a, b) = (self.a1, self.a2);
        ((a.abs() + b.abs() + (a + b).abs()) / 2) as u32
    }

    pub fn offset(self, d: (i32, i32)) -> CellId {
        CellId::new(self.a1 + d.0, self.a2 + d.1)
    }

    /// Rotation by 60 degrees about the origin BS.
    pub fn rotate60(self) -> CellId {
        CellId::new(-self.a2, self.a1 + self.a2)
    }

    pub fn is_adjacent(self, other: CellId) -> bool {
        let d = CellId::new(other.a1 - self.a1, other.a2 - self.a2);
        d.tier() == 1
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a1, self.a2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

pub fn bs_position(cell: CellId, r: f64) -> Point {
    let (a1, a2) = (cell.a1 as f64, cell.a2 as f64);
    Point::new(1.5 * r * a1, SQRT3 * r * (0.5 * a1 + a2))
}

/// Corner `k` (0..6) of a hexagon centred at the origin.
pub fn hex_corner(k: usize, r: f64) -> Point {
    match k % 6 {
        0 => Point::new(r, 0.0),
        1 => Point::new(0.5 * r, 0.5 * SQRT3 * r),
        2 => Point::new(-0.5 * r, 0.5 * SQRT3 * r),
        3 => Point::new(-r, 0.0),
        4 => Point::new(-0.5 * r, -0.5 * SQRT3 * r),
        _ => Point::new(0.5 * r, -0.5 * SQRT3 * r),
    }
}

/// Membership of a point relative to a hexagon centred at the origin.
/// Boundary points count as inside; `tol` widens the test for rounding.
pub fn hex_contains_offset(p: Point, r: f64, tol: f64) -> bool {
    let apothem = 0.5 * SQRT3 * r;
    p.y.abs() <= apothem + tol
        && (SQRT3 * p.x + p.y).abs() <= SQRT3 * r + tol
        && (SQRT3 * p.x - p.y).abs() <= SQRT3 * r + tol
}

pub fn hex_contains(cell: CellId, p: Point, r: f64) -> bool {
    hex_contains_offset(p - bs_position(cell, r), r, 1e-12 * r)
}

/// Average channel gain `C / dist^kappa`.
pub fn pathloss(bs: Point, ue: Point, c: f64, kappa: f64) -> Result<f64> {
    let d2 = (ue.x - bs.x).powi(2) + (ue.y - bs.y).powi(2);
    if d2 == 0.0 {
        return Err(Error::Domain("pathloss evaluated at the BS position".into()));
    }
    Ok(c * d2.powf(-0.5 * kappa))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HexNetwork {
    pub tiers: u32,
    pub cell_radius: f64,
    pub kappa: f64,
    pub pathloss_ref: f64,
    pub min_ue_distance_factor: f64,
    cells: Arc<[CellId]>,
    index: Arc<HashMap<CellId, usize>>,
}

impl HexNetwork {
    pub fn new(tiers: u32, cell_radius: f64, kappa: f64, pathloss_ref: f64) -> Result<Self> {
        Self::with_exclusion(tiers, cell_radius, kappa, pathloss_ref, 0.14)
    }

    pub fn with_exclusion(
        tiers: u32,
        cell_radius: f64,
        kappa: f64,
        pathloss_ref: f64,
        min_ue_distance_factor: f64,
    ) -> Result<Self> {
        if !(cell_radius > 0.0 && cell_radius.is_finite()) {
            return Err(Error::InvalidConfig(format!("cell radius {cell_radius} must be > 0")));
        }
        if !(kappa >= 2.0 && kappa.is_finite()) {
            return Err(Error::InvalidConfig(format!("pathloss exponent {kappa} must be >= 2")));
        }
        if !(pathloss_ref > 0.0 && pathloss_ref.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "pathloss constant {pathloss_ref} must be > 0"
            )));
        }
        if !(min_ue_distance_factor > 0.0 && min_ue_distance_factor < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "exclusion factor {min_ue_distance_factor} must lie in (0, 1)"
            )));
        }
        let t = tiers as i32;
        let mut cells = Vec::with_capacity(1 + 3 * (tiers as usize) * (tiers as usize + 1));
        // Ordered by tier, then counter-clockwise from the +a1 axis.
        cells.push(CellId::ORIGIN);
        for ring in 1..=t {
            let mut cur = CellId::new(ring, 0);
            for side in 0..6 {
                let dir = NEIGHBOURS[(side + 2) % 6];
                for _ in 0..ring {
                    cells.push(cur);
                    cur = cur.offset(dir);
                }
            }
        }
        let index = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        Ok(HexNetwork {
            tiers,
            cell_radius,
            kappa,
            pathloss_ref,
            min_ue_distance_factor,
            cells: cells.into(),
            index: Arc::new(index),
        })
    }

    pub fn cells(&self) -> &[CellId] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn index_of(&self, cell: CellId) -> Option<usize> {
        self.index.get(&cell).copied()
    }

    pub fn bs(&self, cell: CellId) -> Point {
        bs_position(cell, self.cell_radius)
    }

    pub fn gain(&self, bs_cell: CellId, ue: Point) -> Result<f64> {
        pathloss(self.bs(bs_cell), ue, self.pathloss_ref, self.kappa)
    }

    pub fn same_geometry(&self, other: &HexNetwork) -> bool {
        self.tiers == other.tiers && self.cells == other.cells
    }
}

/// Uniform point in a hexagon centred at the origin, outside the exclusion
/// disk. Returns the offset and the number of attempts used.
///
/// The hexagon is the union of three equal-area rhombi spanned by corner
/// pairs (0, 2), (2, 4) and (4, 0), so picking a rhombus and then uniform
/// coordinates inside it is exact.
pub fn sample_hex_offset<R: Rng + ?Sized>(r: f64, exclusion: f64, rng: &mut R) -> (Point, u32) {
    let r_min2 = (exclusion * r).powi(2);
    let mut attempts = 0;
    loop {
        attempts += 1;
        let k = rng.random_range(0..3usize) * 2;
        let (ca, cb) = (hex_corner(k, r), hex_corner(k + 2, r));
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        let p = ca.scale(u) + cb.scale(v);
        if p.x * p.x + p.y * p.y >= r_min2 {
            return (p, attempts);
        }
    }
}

pub fn sample_ue_position<R: Rng + ?Sized>(cell: CellId, net: &HexNetwork, rng: &mut R) -> Point {
    let (p, _) = sample_hex_offset(net.cell_radius, net.min_ue_distance_factor, rng);
    net.bs(cell) + p
}

/// Reuse factors of the form i^2 + ij + j^2. Returns the shift (i, j) with the
/// largest i, or an error for non-members.
pub fn reuse_shift(beta: u32) -> Result<(i32, i32)> {
    if beta == 0 {
        return Err(Error::InvalidReuseFactor(beta));
    }
    let b = beta as i64;
    let mut i = 0i64;
    while i * i <= b {
        i += 1;
    }
    for i in (0..i).rev() {
        for j in 0..=i {
            if i * i + i * j + j * j == b {
                return Ok((i as i32, j as i32));
            }
        }
    }
    Err(Error::InvalidReuseFactor(beta))
}

pub fn is_reuse_factor(beta: u32) -> bool {
    reuse_shift(beta).is_ok()
}

/// Lattice-shift coloring: cells share a color iff their index difference
/// lies in the sub-lattice spanned by (i, j) and its 60-degree rotation.
///
/// The map c -> A c mod beta with A = [[i+j, j], [-j, i]] has exactly that
/// sub-lattice as kernel (det A = beta), so its value is a color key.
fn color_key(c: CellId, shift: (i32, i32), beta: u32) -> (u32, u32) {
    let (i, j) = (shift.0 as i64, shift.1 as i64);
    let (c1, c2) = (c.a1 as i64, c.a2 as i64);
    let b = beta as i64;
    let k1 = (c1 * (i + j) + c2 * j).rem_euclid(b);
    let k2 = (c2 * i - c1 * j).rem_euclid(b);
    (k1 as u32, k2 as u32)
}

#[derive(Debug, Clone)]
struct Coloring {
    shift: (i32, i32),
    key_to_color: HashMap<(u32, u32), u32>,
}

impl Coloring {
    fn new(beta: u32) -> Result<Self> {
        let shift = reuse_shift(beta)?;
        let mut key_to_color = HashMap::new();
        // Colors are numbered in order of first appearance over a fundamental
        // square of the lattice, so the origin cell always gets color 0.
        for a1 in 0..beta as i32 {
            for a2 in 0..beta as i32 {
                let key = color_key(CellId::new(a1, a2), shift, beta);
                let next = key_to_color.len() as u32;
                key_to_color.entry(key).or_insert(next);
            }
        }
        debug_assert_eq!(key_to_color.len(), beta as usize);
        Ok(Coloring { shift, key_to_color })
    }

    fn color(&self, c: CellId, beta: u32) -> u32 {
        self.key_to_color[&color_key(c, self.shift, beta)]
    }
}

/// Pilot allocation for a reuse factor: colors per cell (aligned with
/// `HexNetwork::cells`) and the pilot book size `B = beta K`.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotPlan {
    pub beta: u32,
    pub k: usize,
    pub b: usize,
    pub shift: (i32, i32),
    colors: Arc<[u32]>,
}

pub fn make_pilot_plan(beta: u32, net: &HexNetwork, k: usize) -> Result<PilotPlan> {
    if k == 0 {
        return Err(Error::InvalidConfig("K must be at least 1".into()));
    }
    let coloring = Coloring::new(beta)?;
    let colors: Vec<u32> = net.cells().iter().map(|&c| coloring.color(c, beta)).collect();
    Ok(PilotPlan {
        beta,
        k,
        b: beta as usize * k,
        shift: coloring.shift,
        colors: colors.into(),
    })
}

impl PilotPlan {
    /// Same coloring for a different number of UEs per cell.
    pub fn with_k(&self, k: usize) -> PilotPlan {
        PilotPlan {
            k,
            b: self.beta as usize * k,
            ..self.clone()
        }
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn color_of(&self, cell_index: usize) -> u32 {
        self.colors[cell_index]
    }

    /// Indices of the cells sharing the color of `cell_index`, itself included.
    pub fn co_pilot_set(&self, cell_index: usize) -> Vec<usize> {
        let c = self.colors[cell_index];
        (0..self.colors.len()).filter(|&i| self.colors[i] == c).collect()
    }

    pub fn shares_pilots(&self, a: usize, b: usize) -> bool {
        self.colors[a] == self.colors[b]
    }

    /// Pilot index used by UE `k` of the cell at `cell_index`.
    pub fn pilot_index(&self, cell_index: usize, k: usize) -> usize {
        self.colors[cell_index] as usize * self.k + k
    }
}

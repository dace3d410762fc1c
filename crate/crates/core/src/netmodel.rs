//! Node placement and channel gains.
//!
//! Randomness is drawn from independent ChaCha8 streams keyed by
//! `(seed, entity)`, so the position of LUE `(l, m)` or the fading of one link
//! does not depend on how many other entities exist. Growing `M` from 3 to 4
//! keeps the first three LUEs of every cell where they were.

use ndarray::Array3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::{NetworkConfig, UserClass};
use crate::error::{Error, Result};

const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;
/// Links shorter than this are evaluated at this distance.
pub const MIN_LINK_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn polar(center: Point, r: f64, theta: f64) -> Self {
        Self::new(center.x + r * theta.cos(), center.y + r * theta.sin())
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Population sizes, copied out of the config so the channel tensor can be
/// indexed without it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub h: usize,
    pub l: usize,
    pub m: usize,
    pub k: usize,
    pub n: usize,
}

impl Dims {
    pub fn of(cfg: &NetworkConfig) -> Self {
        Self {
            h: cfg.hues,
            l: cfg.lpns,
            m: cfg.lues_per_lpn,
            k: cfg.dues_per_lpn,
            n: cfg.subcarriers,
        }
    }

    pub fn tx_count(&self) -> usize {
        self.h + self.l * self.m + self.l * self.k
    }

    pub fn rx_count(&self) -> usize {
        1 + self.l + self.l * self.k + 1
    }
}

/// A transmitting user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tx {
    Hue(usize),
    /// (LPN, LUE)
    Lue(usize, usize),
    /// (LPN, pair) transmitter of a D2D pair
    Due(usize, usize),
}

/// A receiving node. `Eve` is the eavesdropper of whichever subcarrier is indexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rx {
    Hpn,
    Lpn(usize),
    DueRx(usize, usize),
    Eve,
}

impl Tx {
    pub fn class(self) -> UserClass {
        match self {
            Tx::Hue(_) => UserClass::Hue,
            Tx::Lue(..) => UserClass::Lue,
            Tx::Due(..) => UserClass::Due,
        }
    }

    /// The intended receiver.
    pub fn serving_rx(self) -> Rx {
        match self {
            Tx::Hue(_) => Rx::Hpn,
            Tx::Lue(l, _) => Rx::Lpn(l),
            Tx::Due(l, k) => Rx::DueRx(l, k),
        }
    }

    /// LPN index for LUEs and DUEs, `None` for HUEs.
    pub fn cell(self) -> Option<usize> {
        match self {
            Tx::Hue(_) => None,
            Tx::Lue(l, _) | Tx::Due(l, _) => Some(l),
        }
    }

    pub fn index(self, d: &Dims) -> usize {
        match self {
            Tx::Hue(h) => h,
            Tx::Lue(l, m) => d.h + l * d.m + m,
            Tx::Due(l, k) => d.h + d.l * d.m + l * d.k + k,
        }
    }

    pub fn all(d: &Dims) -> Vec<Tx> {
        let mut v: Vec<Tx> = (0..d.h).map(Tx::Hue).collect();
        for l in 0..d.l {
            v.extend((0..d.m).map(|m| Tx::Lue(l, m)));
        }
        for l in 0..d.l {
            v.extend((0..d.k).map(|k| Tx::Due(l, k)));
        }
        v
    }
}

impl Rx {
    pub fn index(self, d: &Dims) -> usize {
        match self {
            Rx::Hpn => 0,
            Rx::Lpn(l) => 1 + l,
            Rx::DueRx(l, k) => 1 + d.l + l * d.k + k,
            Rx::Eve => 1 + d.l + d.l * d.k,
        }
    }

    pub fn all(d: &Dims) -> Vec<Rx> {
        let mut v = vec![Rx::Hpn];
        v.extend((0..d.l).map(Rx::Lpn));
        for l in 0..d.l {
            v.extend((0..d.k).map(|k| Rx::DueRx(l, k)));
        }
        v.push(Rx::Eve);
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub hpn_pos: Point,
    pub lpn_pos: Vec<Point>,
    pub hue_pos: Vec<Point>,
    pub lue_pos: Vec<Vec<Point>>,
    pub due_tx_pos: Vec<Vec<Point>>,
    pub due_rx_pos: Vec<Vec<Point>>,
    /// One eavesdropper per subcarrier.
    pub eve_pos: Vec<Point>,
}

impl Topology {
    pub fn tx_pos(&self, tx: Tx) -> Point {
        match tx {
            Tx::Hue(h) => self.hue_pos[h],
            Tx::Lue(l, m) => self.lue_pos[l][m],
            Tx::Due(l, k) => self.due_tx_pos[l][k],
        }
    }

    pub fn rx_pos(&self, rx: Rx, n: usize) -> Point {
        match rx {
            Rx::Hpn => self.hpn_pos,
            Rx::Lpn(l) => self.lpn_pos[l],
            Rx::DueRx(l, k) => self.due_rx_pos[l][k],
            Rx::Eve => self.eve_pos[n],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkClass {
    Short,
    Long,
}

/// Which path-loss law a link follows. Intra-cell links of an LPN (LUE or
/// DUE to its own LPN, and LUE or DUE into a D2D receiver of the same cell)
/// are short; everything else, including all eavesdropper and HPN links, is long.
pub fn link_class(tx: Tx, rx: Rx) -> LinkClass {
    match (tx.cell(), rx) {
        (Some(c), Rx::Lpn(l)) | (Some(c), Rx::DueRx(l, _)) if c == l => LinkClass::Short,
        _ => LinkClass::Long,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossModel {
    pub short: [f64; 2],
    pub long: [f64; 2],
}

impl PathLossModel {
    pub fn of(cfg: &NetworkConfig) -> Self {
        Self {
            short: cfg.pathloss_short,
            long: cfg.pathloss_long,
        }
    }

    pub fn loss_db(&self, distance_m: f64, class: LinkClass) -> f64 {
        let [a, b] = match class {
            LinkClass::Short => self.short,
            LinkClass::Long => self.long,
        };
        a + b * distance_m.log10()
    }

    /// Linear power gain `10^(-PL/10)`.
    pub fn gain(&self, distance_m: f64, class: LinkClass) -> Result<f64> {
        if !(distance_m > 0.0) {
            return Err(Error::Domain(format!("link distance must be positive, got {distance_m}")));
        }
        Ok(10f64.powf(-self.loss_db(distance_m, class) / 10.0))
    }
}

impl Default for PathLossModel {
    fn default() -> Self {
        Self::of(&NetworkConfig::paper())
    }
}

/// Path-loss gain with the default coefficients (31.5 + 40 log10 d short, 31.5 + 35 log10 d long).
pub fn path_loss_gain(distance_m: f64, class: LinkClass) -> Result<f64> {
    PathLossModel::default().gain(distance_m, class)
}

// Stream tags, one per entity family.
const TAG_LPN: u64 = 1;
const TAG_HUE: u64 = 2;
const TAG_LUE: u64 = 3;
const TAG_DUE: u64 = 4;
const TAG_EVE: u64 = 5;
const TAG_FADE: u64 = 6;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator dedicated to one entity of one snapshot.
pub fn entity_rng(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    let key = tags.iter().fold(splitmix(seed), |acc, &t| splitmix(acc ^ splitmix(t)));
    ChaCha8Rng::seed_from_u64(key)
}

fn fade_tags(tx: Tx, rx: Rx) -> [u64; 7] {
    let (a, b, c) = match tx {
        Tx::Hue(h) => (0, 0, h),
        Tx::Lue(l, m) => (1, l, m),
        Tx::Due(l, k) => (2, l, k),
    };
    let (d, e, f) = match rx {
        Rx::Hpn => (0, 0, 0),
        Rx::Lpn(l) => (1, l, 0),
        Rx::DueRx(l, k) => (2, l, k),
        Rx::Eve => (3, 0, 0),
    };
    [TAG_FADE, a, b as u64, c as u64, d, e as u64, f as u64]
}

/// Uniform point in the annulus `r_min <= r <= r_max` around `center`.
fn uniform_annulus(rng: &mut impl Rng, center: Point, r_min: f64, r_max: f64) -> Point {
    let u: f64 = rng.random();
    let r = (r_min * r_min + u * (r_max * r_max - r_min * r_min)).sqrt();
    let theta = rng.random::<f64>() * std::f64::consts::TAU;
    Point::polar(center, r, theta)
}

pub fn generate_topology(cfg: &NetworkConfig, seed: u64) -> Result<Topology> {
    cfg.validate()?;
    let hpn = Point::ORIGIN;
    let tau = std::f64::consts::TAU;

    let lpn_pos: Vec<Point> = (0..cfg.lpns)
        .map(|l| {
            let theta = entity_rng(seed, &[TAG_LPN, l as u64]).random::<f64>() * tau;
            Point::polar(hpn, cfg.lpn_ring_m, theta)
        })
        .collect();

    let hue_pos = (0..cfg.hues)
        .map(|h| {
            let mut rng = entity_rng(seed, &[TAG_HUE, h as u64]);
            uniform_annulus(&mut rng, hpn, cfg.min_dist_hpn_m, cfg.hpn_radius_m)
        })
        .collect();

    let eve_pos = (0..cfg.subcarriers)
        .map(|n| {
            let mut rng = entity_rng(seed, &[TAG_EVE, n as u64]);
            uniform_annulus(&mut rng, hpn, cfg.min_dist_hpn_m, cfg.hpn_radius_m)
        })
        .collect();

    let mut lue_pos = Vec::with_capacity(cfg.lpns);
    let mut due_tx_pos = Vec::with_capacity(cfg.lpns);
    let mut due_rx_pos = Vec::with_capacity(cfg.lpns);
    for (l, &c) in lpn_pos.iter().enumerate() {
        lue_pos.push(
            (0..cfg.lues_per_lpn)
                .map(|m| {
                    let mut rng = entity_rng(seed, &[TAG_LUE, l as u64, m as u64]);
                    uniform_annulus(&mut rng, c, cfg.min_dist_lpn_m, cfg.lpn_radius_m)
                })
                .collect(),
        );
        let mut txs = Vec::with_capacity(cfg.dues_per_lpn);
        let mut rxs = Vec::with_capacity(cfg.dues_per_lpn);
        for k in 0..cfg.dues_per_lpn {
            let mut rng = entity_rng(seed, &[TAG_DUE, l as u64, k as u64]);
            let tx = uniform_annulus(&mut rng, c, cfg.min_dist_lpn_m, cfg.lpn_radius_m);
            let rx = (0..MAX_PLACEMENT_ATTEMPTS)
                .map(|_| Point::polar(tx, cfg.d2d_distance_m, rng.random::<f64>() * tau))
                .find(|p| p.dist(c) <= cfg.lpn_radius_m)
                .ok_or_else(|| Error::Geometry {
                    what: format!("D2D receiver of pair ({l}, {k})"),
                    attempts: MAX_PLACEMENT_ATTEMPTS,
                })?;
            txs.push(tx);
            rxs.push(rx);
        }
        due_tx_pos.push(txs);
        due_rx_pos.push(rxs);
    }

    Ok(Topology {
        hpn_pos: hpn,
        lpn_pos,
        hue_pos,
        lue_pos,
        due_tx_pos,
        due_rx_pos,
        eve_pos,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fading {
    /// `|h|^2` with `h` circularly-symmetric complex Gaussian of unit variance.
    Rayleigh,
    /// Fade pinned to 1: gains are pure path loss.
    Unit,
}

/// One Rayleigh power sample, exponential with mean 1.
pub fn rayleigh_power(rng: &mut impl Rng) -> f64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    0.5 * (a * a + b * b)
}

/// Linear power gains for every (transmitter, receiver, subcarrier).
///
/// Table I's twelve link classes plus the wiretap links are views into one
/// tensor; the named accessors (`g_hh`, `g_ld`, ...) follow its index order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    dims: Dims,
    gains: Array3<f64>,
}

impl ChannelSet {
    /// Builds a channel set from an arbitrary gain function. Intended for
    /// crafted instances.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(Tx, Rx, usize) -> f64) -> Self {
        let mut gains = Array3::zeros((dims.tx_count(), dims.rx_count(), dims.n));
        for tx in Tx::all(&dims) {
            for rx in Rx::all(&dims) {
                for n in 0..dims.n {
                    gains[[tx.index(&dims), rx.index(&dims), n]] = f(tx, rx, n);
                }
            }
        }
        Self { dims, gains }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn gain(&self, tx: Tx, rx: Rx, n: usize) -> f64 {
        self.gains[[tx.index(&self.dims), rx.index(&self.dims), n]]
    }

    pub fn set_gain(&mut self, tx: Tx, rx: Rx, n: usize, g: f64) {
        let d = self.dims;
        self.gains[[tx.index(&d), rx.index(&d), n]] = g;
    }

    /// Multiplies every gain by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dims: self.dims,
            gains: &self.gains * s,
        }
    }

    pub fn g_hh(&self, h: usize, n: usize) -> f64 {
        self.gain(Tx::Hue(h), Rx::Hpn, n)
    }
    pub fn g_hl(&self, h: usize, n: usize, l: usize) -> f64 {
        self.gain(Tx::Hue(h), Rx::Lpn(l), n)
    }
    pub fn g_hd(&self, h: usize, n: usize, l: usize, k: usize) -> f64 {
        self.gain(Tx::Hue(h), Rx::DueRx(l, k), n)
    }
    pub fn g_he(&self, h: usize, n: usize) -> f64 {
        self.gain(Tx::Hue(h), Rx::Eve, n)
    }
    pub fn g_lh(&self, l: usize, m: usize, n: usize) -> f64 {
        self.gain(Tx::Lue(l, m), Rx::Hpn, n)
    }
    pub fn g_ll(&self, l: usize, m: usize, n: usize, j: usize) -> f64 {
        self.gain(Tx::Lue(l, m), Rx::Lpn(j), n)
    }
    pub fn g_ld(&self, l: usize, m: usize, n: usize, j: usize, k: usize) -> f64 {
        self.gain(Tx::Lue(l, m), Rx::DueRx(j, k), n)
    }
    pub fn g_le(&self, l: usize, m: usize, n: usize) -> f64 {
        self.gain(Tx::Lue(l, m), Rx::Eve, n)
    }
    pub fn g_dh(&self, l: usize, k: usize, n: usize) -> f64 {
        self.gain(Tx::Due(l, k), Rx::Hpn, n)
    }
    pub fn g_dl(&self, l: usize, k: usize, n: usize, j: usize) -> f64 {
        self.gain(Tx::Due(l, k), Rx::Lpn(j), n)
    }
    pub fn g_dd(&self, l: usize, k: usize, n: usize, j: usize, i: usize) -> f64 {
        self.gain(Tx::Due(l, k), Rx::DueRx(j, i), n)
    }
    pub fn g_de(&self, l: usize, k: usize, n: usize) -> f64 {
        self.gain(Tx::Due(l, k), Rx::Eve, n)
    }

    pub fn min_gain(&self) -> f64 {
        self.gains.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn sample_channels(topo: &Topology, cfg: &NetworkConfig, seed: u64) -> Result<ChannelSet> {
    sample_channels_with(topo, cfg, seed, Fading::Rayleigh)
}

pub fn sample_channels_with(topo: &Topology, cfg: &NetworkConfig, seed: u64, fading: Fading) -> Result<ChannelSet> {
    let dims = Dims::of(cfg);
    let pl = PathLossModel::of(cfg);
    let mut gains = Array3::zeros((dims.tx_count(), dims.rx_count(), dims.n));
    for tx in Tx::all(&dims) {
        let ti = tx.index(&dims);
        for rx in Rx::all(&dims) {
            let ri = rx.index(&dims);
            let class = link_class(tx, rx);
            let mut rng = entity_rng(seed, &fade_tags(tx, rx));
            for n in 0..dims.n {
                let d = topo.tx_pos(tx).dist(topo.rx_pos(rx, n)).max(MIN_LINK_DISTANCE_M);
                let fade = match fading {
                    Fading::Rayleigh => rayleigh_power(&mut rng),
                    Fading::Unit => 1.0,
                };
                gains[[ti, ri, n]] = pl.gain(d, class)? * fade;
            }
        }
    }
    Ok(ChannelSet { dims, gains })
}

/// Topology and channels for one snapshot.
pub fn snapshot(cfg: &NetworkConfig, seed: u64) -> Result<(Topology, ChannelSet)> {
    let topo = generate_topology(cfg, seed)?;
    let ch = sample_channels(&topo, cfg, seed)?;
    Ok((topo, ch))
}

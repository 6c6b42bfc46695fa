//! Scenario configuration, random topologies and channel realizations.
//!
//! All powers are stored in linear watts; the dBm/dB conversions needed for
//! configuration files live here and nowhere else.
//!
//! Randomness is organised as a tree of [`RandomStream`]s. Every entity
//! (the eavesdropper, each CU, each D2D pair, each link on each RB) draws from
//! its own child stream, so adding a CU or a D2D pair leaves the realizations
//! of the existing ones untouched. Sweeps over `M` and `N` therefore compare
//! nested scenarios rather than unrelated ones.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::algebra::{sq_norm, ComplexVector};
use crate::error::{Error, Result};

/// Converts a power in dBm to watts.
pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watt_to_dbm(watt: f64) -> f64 {
    10.0 * watt.log10() + 30.0
}

/// Converts a dB ratio to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// How log-normal shadowing is drawn across resource blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShadowingMode {
    /// Independent shadowing draw for every (link, RB).
    #[default]
    PerRb,
    /// One shadowing draw per link, shared by all RBs.
    PerLink,
}

/// Every constant describing one simulated cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub num_cus: usize,
    pub num_d2d: usize,
    /// Always equal to `num_cus` (fully loaded cell).
    pub num_rbs: usize,
    pub bs_antennas: usize,
    pub eve_antennas: usize,
    /// Total bandwidth in Hz.
    pub bandwidth: f64,
    /// Noise power in W.
    pub noise_power: f64,
    /// Per-CU power caps in W.
    pub cu_power_cap: Vec<f64>,
    /// Per-D2D-transmitter power caps in W.
    pub d2d_power_cap: Vec<f64>,
    pub cell_radius: f64,
    pub d2d_max_dist: f64,
    pub path_loss_exponent: f64,
    /// Shadowing standard deviation in dB.
    pub shadowing_std: f64,
    pub min_link_dist: f64,
    pub shadowing_mode: ShadowingMode,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let m = 6;
        let n = 10;
        let p = dbm_to_watt(20.0);
        Self {
            num_cus: m,
            num_d2d: n,
            num_rbs: m,
            bs_antennas: 4,
            eve_antennas: 4,
            bandwidth: 1.0,
            noise_power: dbm_to_watt(-100.0),
            cu_power_cap: vec![p; m],
            d2d_power_cap: vec![p; n],
            cell_radius: 500.0,
            d2d_max_dist: 50.0,
            path_loss_exponent: 3.7,
            shadowing_std: 8.0,
            min_link_dist: 1.0,
            shadowing_mode: ShadowingMode::PerRb,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.num_cus == 0 {
            return bad("num_cus must be at least 1".into());
        }
        if self.num_rbs != self.num_cus {
            return bad(format!(
                "num_rbs ({}) must equal num_cus ({}) in a fully loaded cell",
                self.num_rbs, self.num_cus
            ));
        }
        if self.bs_antennas == 0 || self.eve_antennas == 0 {
            return bad("antenna counts must be at least 1".into());
        }
        if self.cu_power_cap.len() != self.num_cus {
            return bad(format!(
                "cu_power_cap has {} entries, expected {}",
                self.cu_power_cap.len(),
                self.num_cus
            ));
        }
        if self.d2d_power_cap.len() != self.num_d2d {
            return bad(format!(
                "d2d_power_cap has {} entries, expected {}",
                self.d2d_power_cap.len(),
                self.num_d2d
            ));
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !self
            .cu_power_cap
            .iter()
            .chain(&self.d2d_power_cap)
            .all(|&p| positive(p))
        {
            return bad("power caps must be finite and positive".into());
        }
        if !positive(self.bandwidth) || !positive(self.noise_power) {
            return bad("bandwidth and noise power must be finite and positive".into());
        }
        if !(positive(self.min_link_dist)
            && self.min_link_dist < self.d2d_max_dist
            && self.d2d_max_dist <= self.cell_radius
            && self.cell_radius.is_finite())
        {
            return bad("require 0 < min_link_dist < d2d_max_dist <= cell_radius".into());
        }
        if !positive(self.path_loss_exponent) {
            return bad("path_loss_exponent must be positive".into());
        }
        if !(self.shadowing_std.is_finite() && self.shadowing_std >= 0.0) {
            return bad("shadowing_std must be finite and nonnegative".into());
        }
        Ok(())
    }

    /// Copy with `M = K = num_cus`. Power caps must be uniform to be resized.
    pub fn with_num_cus(&self, num_cus: usize) -> Result<Self> {
        let cap = uniform_value(&self.cu_power_cap, "cu_power_cap")?;
        Ok(Self {
            num_cus,
            num_rbs: num_cus,
            cu_power_cap: vec![cap.unwrap_or(dbm_to_watt(20.0)); num_cus],
            ..self.clone()
        })
    }

    pub fn with_num_d2d(&self, num_d2d: usize) -> Result<Self> {
        let cap = uniform_value(&self.d2d_power_cap, "d2d_power_cap")?
            .or_else(|| self.cu_power_cap.first().copied())
            .unwrap_or(dbm_to_watt(20.0));
        Ok(Self {
            num_d2d,
            d2d_power_cap: vec![cap; num_d2d],
            ..self.clone()
        })
    }

    /// Copy with every CU and D2D power cap set to `dbm` (the `P_m = Q_n = P`
    /// convention of the power sweeps).
    pub fn with_power_dbm(&self, dbm: f64) -> Self {
        let p = dbm_to_watt(dbm);
        Self {
            cu_power_cap: vec![p; self.num_cus],
            d2d_power_cap: vec![p; self.num_d2d],
            ..self.clone()
        }
    }
}

fn uniform_value(values: &[f64], name: &str) -> Result<Option<f64>> {
    match values.first() {
        None => Ok(None),
        Some(&first) if values.iter().all(|&v| v == first) => Ok(Some(first)),
        Some(_) => Err(Error::InvalidConfig(format!(
            "{name} is not uniform and cannot be resized by a sweep"
        ))),
    }
}

/// Power cap given either once for every user or per user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PowerSpec {
    Uniform(f64),
    PerUser(Vec<f64>),
}

impl PowerSpec {
    fn to_watts(&self, count: usize, name: &str) -> Result<Vec<f64>> {
        match self {
            PowerSpec::Uniform(dbm) => Ok(vec![dbm_to_watt(*dbm); count]),
            PowerSpec::PerUser(list) if list.len() == count => {
                Ok(list.iter().map(|&d| dbm_to_watt(d)).collect())
            }
            PowerSpec::PerUser(list) => Err(Error::InvalidConfig(format!(
                "{name} lists {} values, expected {count}",
                list.len()
            ))),
        }
    }
}

/// On-disk configuration (TOML). Every key is optional and defaults to the
/// reference scenario; units are carried in the key names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub num_cus: usize,
    pub num_d2d: usize,
    /// Optional; must equal `num_cus` when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_rbs: Option<usize>,
    pub bs_antennas: usize,
    pub eve_antennas: usize,
    pub bandwidth_hz: f64,
    pub noise_power_dbm: f64,
    pub cu_power_dbm: PowerSpec,
    pub d2d_power_dbm: PowerSpec,
    pub cell_radius_m: f64,
    pub d2d_max_dist_m: f64,
    pub path_loss_exponent: f64,
    pub shadowing_std_db: f64,
    pub min_link_dist_m: f64,
    pub shadowing_mode: ShadowingMode,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self {
            num_cus: 6,
            num_d2d: 10,
            num_rbs: None,
            bs_antennas: 4,
            eve_antennas: 4,
            bandwidth_hz: 1.0,
            noise_power_dbm: -100.0,
            cu_power_dbm: PowerSpec::Uniform(20.0),
            d2d_power_dbm: PowerSpec::Uniform(20.0),
            cell_radius_m: 500.0,
            d2d_max_dist_m: 50.0,
            path_loss_exponent: 3.7,
            shadowing_std_db: 8.0,
            min_link_dist_m: 1.0,
            shadowing_mode: ShadowingMode::PerRb,
        }
    }
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn into_system_config(self) -> Result<SystemConfig> {
        let cfg = SystemConfig {
            num_cus: self.num_cus,
            num_d2d: self.num_d2d,
            num_rbs: self.num_rbs.unwrap_or(self.num_cus),
            bs_antennas: self.bs_antennas,
            eve_antennas: self.eve_antennas,
            bandwidth: self.bandwidth_hz,
            noise_power: dbm_to_watt(self.noise_power_dbm),
            cu_power_cap: self.cu_power_dbm.to_watts(self.num_cus, "cu_power_dbm")?,
            d2d_power_cap: self.d2d_power_dbm.to_watts(self.num_d2d, "d2d_power_dbm")?,
            cell_radius: self.cell_radius_m,
            d2d_max_dist: self.d2d_max_dist_m,
            path_loss_exponent: self.path_loss_exponent,
            shadowing_std: self.shadowing_std_db,
            min_link_dist: self.min_link_dist_m,
            shadowing_mode: self.shadowing_mode,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Splittable deterministic random stream.
///
/// A stream is identified by a 64-bit key; [`RandomStream::child`] derives
/// an independent stream from the key and a label path without consuming
/// any output of the parent.
#[derive(Debug, Clone)]
pub struct RandomStream {
    key: u64,
    rng: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            key: seed,
            rng: ChaCha8Rng::seed_from_u64(splitmix64(seed)),
        }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn child(&self, labels: &[u64]) -> Self {
        let key = labels.iter().fold(self.key, |k, &l| {
            splitmix64(k ^ splitmix64(l.wrapping_add(0x632B_E59B_D9B4_E019)))
        });
        Self::new(key)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

const LABEL_TOPOLOGY: u64 = 1;
const LABEL_CHANNELS: u64 = 2;
const LABEL_EVE: u64 = 10;
const LABEL_CU: u64 = 11;
const LABEL_D2D: u64 = 12;
const LABEL_SHADOW: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Node positions of one cell realization; the BS sits at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub bs_pos: Point,
    pub eve_pos: Point,
    pub cu_pos: Vec<Point>,
    pub d2d_tx_pos: Vec<Point>,
    /// Generated for completeness; no optimization stage reads it.
    pub d2d_rx_pos: Vec<Point>,
}

fn uniform_in_disk(rng: &mut impl Rng, radius: f64) -> Point {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    Point {
        x: r * theta.cos(),
        y: r * theta.sin(),
    }
}

const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

/// Draws node positions. CUs, D2D transmitters and the eavesdropper are
/// uniform over the cell disk; each D2D receiver sits at a uniform angle and a
/// uniform distance in `[min_link_dist, d2d_max_dist]` from its transmitter,
/// redrawn until it falls inside the cell.
pub fn sample_topology(cfg: &SystemConfig, stream: &RandomStream) -> Result<Topology> {
    cfg.validate()?;
    let radius = cfg.cell_radius;
    let eve_pos = uniform_in_disk(&mut stream.child(&[LABEL_EVE]), radius);
    let cu_pos = (0..cfg.num_cus)
        .map(|m| uniform_in_disk(&mut stream.child(&[LABEL_CU, m as u64]), radius))
        .collect();

    let mut d2d_tx_pos = Vec::with_capacity(cfg.num_d2d);
    let mut d2d_rx_pos = Vec::with_capacity(cfg.num_d2d);
    for n in 0..cfg.num_d2d {
        let mut rng = stream.child(&[LABEL_D2D, n as u64]);
        let tx = uniform_in_disk(&mut rng, radius);
        let rx = (0..MAX_PLACEMENT_ATTEMPTS)
            .map(|_| {
                let d = rng.random_range(cfg.min_link_dist..=cfg.d2d_max_dist);
                let theta = 2.0 * PI * rng.random::<f64>();
                Point {
                    x: tx.x + d * theta.cos(),
                    y: tx.y + d * theta.sin(),
                }
            })
            .find(|p| p.norm() <= radius)
            .ok_or_else(|| {
                Error::Generation(format!("could not place D2D receiver {n} inside the cell"))
            })?;
        d2d_tx_pos.push(tx);
        d2d_rx_pos.push(rx);
    }

    Ok(Topology {
        bs_pos: Point::ORIGIN,
        eve_pos,
        cu_pos,
        d2d_tx_pos,
        d2d_rx_pos,
    })
}

/// Which family of links a channel vector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    CuToBs,
    CuToEve,
    D2dToBs,
    D2dToEve,
}

impl LinkKind {
    fn label(self) -> u64 {
        match self {
            LinkKind::CuToBs => 20,
            LinkKind::CuToEve => 21,
            LinkKind::D2dToBs => 22,
            LinkKind::D2dToEve => 23,
        }
    }
}

/// Channel vectors for every transmitter on every RB, stored `tx * K + rb`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    num_cus: usize,
    num_d2d: usize,
    num_rbs: usize,
    g_mb: Vec<ComplexVector>,
    g_me: Vec<ComplexVector>,
    h_nb: Vec<ComplexVector>,
    h_ne: Vec<ComplexVector>,
}

impl ChannelSet {
    /// Assembles a channel set from explicit vectors (row-major `tx * K + rb`),
    /// checking counts, lengths and finiteness.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        num_cus: usize,
        num_d2d: usize,
        num_rbs: usize,
        bs_antennas: usize,
        eve_antennas: usize,
        g_mb: Vec<ComplexVector>,
        g_me: Vec<ComplexVector>,
        h_nb: Vec<ComplexVector>,
        h_ne: Vec<ComplexVector>,
    ) -> Result<Self> {
        let check = |vs: &[ComplexVector], count: usize, len: usize| -> Result<()> {
            if vs.len() != count {
                return Err(Error::DimensionMismatch {
                    expected: count,
                    found: vs.len(),
                });
            }
            for v in vs {
                if v.len() != len {
                    return Err(Error::DimensionMismatch {
                        expected: len,
                        found: v.len(),
                    });
                }
                if !v.is_finite() {
                    return Err(Error::NonFinite("channel vector"));
                }
            }
            Ok(())
        };
        check(&g_mb, num_cus * num_rbs, bs_antennas)?;
        check(&g_me, num_cus * num_rbs, eve_antennas)?;
        check(&h_nb, num_d2d * num_rbs, bs_antennas)?;
        check(&h_ne, num_d2d * num_rbs, eve_antennas)?;
        Ok(Self {
            num_cus,
            num_d2d,
            num_rbs,
            g_mb,
            g_me,
            h_nb,
            h_ne,
        })
    }

    pub fn num_cus(&self) -> usize {
        self.num_cus
    }

    pub fn num_d2d(&self) -> usize {
        self.num_d2d
    }

    pub fn num_rbs(&self) -> usize {
        self.num_rbs
    }

    pub fn bs_antennas(&self) -> usize {
        self.g_mb.first().map_or(0, ComplexVector::len)
    }

    pub fn eve_antennas(&self) -> usize {
        self.g_me.first().map_or(0, ComplexVector::len)
    }

    /// CU `m` to BS on RB `k`.
    pub fn g_mb(&self, m: usize, k: usize) -> &ComplexVector {
        &self.g_mb[m * self.num_rbs + k]
    }

    /// CU `m` to eavesdropper on RB `k`.
    pub fn g_me(&self, m: usize, k: usize) -> &ComplexVector {
        &self.g_me[m * self.num_rbs + k]
    }

    /// D2D transmitter `n` to BS on RB `k`.
    pub fn h_nb(&self, n: usize, k: usize) -> &ComplexVector {
        &self.h_nb[n * self.num_rbs + k]
    }

    /// D2D transmitter `n` to eavesdropper on RB `k`.
    pub fn h_ne(&self, n: usize, k: usize) -> &ComplexVector {
        &self.h_ne[n * self.num_rbs + k]
    }

    pub fn all_vectors(&self) -> impl Iterator<Item = &ComplexVector> {
        self.g_mb
            .iter()
            .chain(&self.g_me)
            .chain(&self.h_nb)
            .chain(&self.h_ne)
    }
}

/// Large-scale power gain `d^-alpha * 10^(X/10)` with `d` clamped below by
/// `min_link_dist` (unit reference gain at 1 m).
pub fn large_scale_gain(cfg: &SystemConfig, distance: f64, shadowing_db: f64) -> f64 {
    distance.max(cfg.min_link_dist).powf(-cfg.path_loss_exponent) * db_to_linear(shadowing_db)
}

fn complex_gaussian_vector(rng: &mut impl Rng, len: usize, amplitude: f64) -> ComplexVector {
    let s = amplitude * std::f64::consts::FRAC_1_SQRT_2;
    ComplexVector::new(
        (0..len)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(s * re, s * im)
            })
            .collect(),
    )
}

fn draw_link(
    cfg: &SystemConfig,
    stream: &RandomStream,
    kind: LinkKind,
    tx: usize,
    rb: usize,
    distance: f64,
    antennas: usize,
) -> ComplexVector {
    let shadow = Normal::new(0.0, cfg.shadowing_std).expect("validated std");
    let mut rng = stream.child(&[kind.label(), tx as u64, rb as u64]);
    let shadowing_db = match cfg.shadowing_mode {
        ShadowingMode::PerRb => shadow.sample(&mut rng),
        ShadowingMode::PerLink => {
            shadow.sample(&mut stream.child(&[kind.label(), tx as u64, LABEL_SHADOW]))
        }
    };
    let amplitude = large_scale_gain(cfg, distance, shadowing_db).sqrt();
    loop {
        let v = complex_gaussian_vector(&mut rng, antennas, amplitude);
        if sq_norm(&v) > 0.0 {
            return v;
        }
    }
}

/// Draws every channel vector: `sqrt(gain)` times i.i.d. `CN(0, 1)` entries,
/// independently per link and per RB.
pub fn sample_channels(
    cfg: &SystemConfig,
    topo: &Topology,
    stream: &RandomStream,
) -> Result<ChannelSet> {
    cfg.validate()?;
    if topo.cu_pos.len() != cfg.num_cus || topo.d2d_tx_pos.len() != cfg.num_d2d {
        return Err(Error::InvalidConfig(
            "topology does not match the configured user counts".into(),
        ));
    }
    let k = cfg.num_rbs;
    let (b, e) = (cfg.bs_antennas, cfg.eve_antennas);
    let bs = topo.bs_pos;
    let eve = topo.eve_pos;

    let per_tx = |positions: &[Point], kind: LinkKind, rx: Point, antennas: usize| {
        positions
            .iter()
            .enumerate()
            .flat_map(|(tx, pos)| {
                let d = pos.distance(&rx);
                (0..k).map(move |rb| draw_link(cfg, stream, kind, tx, rb, d, antennas))
            })
            .collect::<Vec<_>>()
    };

    let g_mb = per_tx(&topo.cu_pos, LinkKind::CuToBs, bs, b);
    let g_me = per_tx(&topo.cu_pos, LinkKind::CuToEve, eve, e);
    let h_nb = per_tx(&topo.d2d_tx_pos, LinkKind::D2dToBs, bs, b);
    let h_ne = per_tx(&topo.d2d_tx_pos, LinkKind::D2dToEve, eve, e);
    ChannelSet::from_parts(cfg.num_cus, cfg.num_d2d, k, b, e, g_mb, g_me, h_nb, h_ne)
}

/// One topology together with its channels.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub topology: Topology,
    pub channels: ChannelSet,
}

/// Samples a full scenario from a single seed.
pub fn sample_scenario(cfg: &SystemConfig, seed: u64) -> Result<Scenario> {
    let root = RandomStream::new(seed);
    let topology = sample_topology(cfg, &root.child(&[LABEL_TOPOLOGY]))?;
    let channels = sample_channels(cfg, &topology, &root.child(&[LABEL_CHANNELS]))?;
    Ok(Scenario { topology, channels })
}

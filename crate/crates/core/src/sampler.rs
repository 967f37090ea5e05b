//! Bernoulli site configurations on a box.
//!
//! Randomness is counter based: the status of site `i` in sample `s` is a
//! keyed hash of `(global_seed, s, i)` compared against a threshold derived
//! from `p`. No generator state is carried between samples, so any worker
//! can produce any sample in any order and get the same bits.

use std::fmt::Write as _;

use bitvec::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{BoxSpec, Point};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;
const SAMPLE_DOMAIN: u64 = 0x5851_f42d_4c95_7f2d;

/// SplitMix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SeedSpec {
    pub global_seed: u64,
}

impl SeedSpec {
    pub fn new(global_seed: u64) -> Self {
        SeedSpec { global_seed }
    }

    /// Independent seed for a named sub-experiment (FNV-1a of the tag, then mixed).
    pub fn derive(&self, tag: &str) -> SeedSpec {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in tag.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        SeedSpec {
            global_seed: mix64(self.global_seed ^ mix64(h)),
        }
    }

    /// Per-sample key; distinct sample indices give unrelated streams.
    #[inline]
    pub fn sample_key(&self, sample_index: u64) -> u64 {
        mix64(mix64(self.global_seed ^ SAMPLE_DOMAIN) ^ mix64(sample_index.wrapping_add(GOLDEN_GAMMA)))
    }

    /// The 64 pseudorandom bits attached to one site of one sample.
    #[inline]
    pub fn site_word(&self, sample_index: u64, site_index: u64) -> u64 {
        site_word_from_key(self.sample_key(sample_index), site_index)
    }
}

#[inline]
fn site_word_from_key(key: u64, site_index: u64) -> u64 {
    mix64(key.wrapping_add(site_index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Literature estimates of the site percolation threshold, used as default
/// `p` when a plan does not give one. External inputs, not derived here.
pub fn default_critical_p(dim: usize) -> Option<f64> {
    match dim {
        2 => Some(0.592_746),
        3 => Some(0.311_608),
        _ => None,
    }
}

/// Integer threshold `t` with `P(word < t) = p` up to `2^-64`.
pub fn open_threshold(p: f64) -> Result<u64> {
    check_probability(p)?;
    Ok((p * 18_446_744_073_709_551_616.0) as u64)
}

pub fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeedRecord {
    Sampled { global_seed: u64, sample_index: u64 },
    Constructed,
}

/// Open/closed status of every site of a box, one bit per site in index order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    bbox: BoxSpec,
    bits: BitVec<u64, Lsb0>,
    seed: SeedRecord,
}

impl std::fmt::Debug for Configuration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Configuration")
            .field("bbox", &self.bbox)
            .field("open", &self.open_count())
            .field("seed", &self.seed)
            .finish()
    }
}

pub fn sample_configuration(
    bbox: &BoxSpec,
    p: f64,
    seed: &SeedSpec,
    sample_index: u64,
) -> Result<Configuration> {
    let threshold = open_threshold(p)?;
    Ok(sample_with_threshold(bbox, threshold, seed, sample_index))
}

pub(crate) fn sample_with_threshold(
    bbox: &BoxSpec,
    threshold: u64,
    seed: &SeedSpec,
    sample_index: u64,
) -> Configuration {
    let volume = bbox.volume();
    let key = seed.sample_key(sample_index);
    let mut words = vec![0u64; volume.div_ceil(64)];
    for (w, word) in words.iter_mut().enumerate() {
        let base = (w * 64) as u64;
        let count = (volume - w * 64).min(64);
        let mut acc = 0u64;
        for b in 0..count {
            if site_word_from_key(key, base + b as u64) < threshold {
                acc |= 1 << b;
            }
        }
        *word = acc;
    }
    let mut bits = BitVec::from_vec(words);
    bits.truncate(volume);
    Configuration {
        bbox: *bbox,
        bits,
        seed: SeedRecord::Sampled {
            global_seed: seed.global_seed,
            sample_index,
        },
    }
}

impl Configuration {
    pub fn all_closed(bbox: &BoxSpec) -> Self {
        Configuration {
            bbox: *bbox,
            bits: bitvec![u64, Lsb0; 0; bbox.volume()],
            seed: SeedRecord::Constructed,
        }
    }

    pub fn all_open(bbox: &BoxSpec) -> Self {
        Configuration {
            bbox: *bbox,
            bits: bitvec![u64, Lsb0; 1; bbox.volume()],
            seed: SeedRecord::Constructed,
        }
    }

    /// Builds a configuration from the low `volume` bits of `mask` (site `i` is bit `i`).
    pub fn from_mask(bbox: &BoxSpec, mask: u64) -> Result<Self> {
        let volume = bbox.volume();
        if volume > 64 {
            return Err(Error::InvalidParameter(format!("mask cannot hold {volume} sites")));
        }
        let mut bits = BitVec::from_vec(vec![mask]);
        bits.truncate(volume);
        Ok(Configuration {
            bbox: *bbox,
            bits,
            seed: SeedRecord::Constructed,
        })
    }

    pub fn from_statuses(bbox: &BoxSpec, statuses: &[bool]) -> Result<Self> {
        if statuses.len() != bbox.volume() {
            return Err(Error::InvalidParameter(format!(
                "{} statuses for a box of volume {}",
                statuses.len(),
                bbox.volume()
            )));
        }
        Ok(Configuration {
            bbox: *bbox,
            bits: statuses.iter().copied().collect(),
            seed: SeedRecord::Constructed,
        })
    }

    #[inline]
    pub fn bbox(&self) -> &BoxSpec {
        &self.bbox
    }

    #[inline]
    pub fn seed_record(&self) -> SeedRecord {
        self.seed
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn is_open_index(&self, index: usize) -> bool {
        self.bits[index]
    }

    /// Status of `x`, `None` outside the box.
    pub fn status(&self, x: &Point) -> Option<bool> {
        self.bbox.index_of(x).map(|i| self.bits[i])
    }

    pub fn is_open(&self, x: &Point) -> bool {
        self.status(x).unwrap_or(false)
    }

    pub fn set_index(&mut self, index: usize, open: bool) {
        self.bits.set(index, open);
        self.seed = SeedRecord::Constructed;
    }

    pub fn set(&mut self, x: &Point, open: bool) -> Result<()> {
        let index = self.bbox.index_of(x).ok_or(Error::OutsideBox {
            point: *x,
            bbox: self.bbox,
        })?;
        self.set_index(index, open);
        Ok(())
    }

    pub fn open_count(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn open_sites(&self) -> impl Iterator<Item = Point> + '_ {
        self.bits.iter_ones().map(|i| self.bbox.site(i))
    }

    /// The configuration restricted to a sub-box.
    pub fn sub_box(&self, sub: &BoxSpec) -> Result<Configuration> {
        if !self.bbox.contains_box(sub) {
            return Err(Error::RegionOutsideBox(self.bbox));
        }
        if sub == &self.bbox {
            return Ok(self.clone());
        }
        let bits = sub
            .sites()
            .map(|x| self.bits[self.bbox.index_of(&x).expect("sub-box site inside")])
            .collect();
        Ok(Configuration {
            bbox: *sub,
            bits,
            seed: SeedRecord::Constructed,
        })
    }

    /// Binary layout (all integers little-endian):
    ///
    /// ```text
    /// "PCFG" | version u8 = 1 | dim u8 | reserved u16 = 0
    /// center: dim x i32 | radius u32
    /// seed tag u8 (0 constructed, 1 sampled) | global_seed u64 | sample_index u64
    /// volume u64 | payload: ceil(volume/8) bytes, site i at byte i/8, bit i%8
    /// ```
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(48 + self.len() / 8);
        out.extend_from_slice(b"PCFG");
        out.push(1);
        out.push(self.bbox.dim() as u8);
        out.extend_from_slice(&0u16.to_le_bytes());
        for &c in self.bbox.center().coords() {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out.extend_from_slice(&self.bbox.radius().to_le_bytes());
        let (tag, gs, si) = match self.seed {
            SeedRecord::Constructed => (0u8, 0u64, 0u64),
            SeedRecord::Sampled {
                global_seed,
                sample_index,
            } => (1, global_seed, sample_index),
        };
        out.push(tag);
        out.extend_from_slice(&gs.to_le_bytes());
        out.extend_from_slice(&si.to_le_bytes());
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());
        let nbytes = self.len().div_ceil(8);
        let payload: Vec<u8> = self
            .bits
            .as_raw_slice()
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .take(nbytes)
            .collect();
        out.extend_from_slice(&payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Configuration> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != b"PCFG" {
            return Err(Error::Parse("bad magic".into()));
        }
        let version = r.take(1)?[0];
        if version != 1 {
            return Err(Error::Parse(format!("unsupported version {version}")));
        }
        let dim = r.take(1)?[0] as usize;
        r.take(2)?;
        let mut center = Vec::with_capacity(dim);
        for _ in 0..dim {
            center.push(i32::from_le_bytes(r.array()?));
        }
        let radius = u32::from_le_bytes(r.array()?);
        let bbox = BoxSpec::new(Point::new(&center)?, radius)?;
        let tag = r.take(1)?[0];
        let global_seed = u64::from_le_bytes(r.array()?);
        let sample_index = u64::from_le_bytes(r.array()?);
        let seed = match tag {
            0 => SeedRecord::Constructed,
            1 => SeedRecord::Sampled {
                global_seed,
                sample_index,
            },
            t => return Err(Error::Parse(format!("unknown seed tag {t}"))),
        };
        let volume = u64::from_le_bytes(r.array()?) as usize;
        if volume != bbox.volume() {
            return Err(Error::Parse(format!("volume {volume} does not match {bbox}")));
        }
        let payload = r.take(volume.div_ceil(8))?;
        if r.pos != bytes.len() {
            return Err(Error::Parse("trailing bytes".into()));
        }
        let mut bits: BitVec<u64, Lsb0> = BitVec::with_capacity(volume);
        for i in 0..volume {
            bits.push(payload[i / 8] >> (i % 8) & 1 == 1);
        }
        Ok(Configuration { bbox, bits, seed })
    }

    /// Text grid for d = 2: top row is the largest second coordinate,
    /// `#` open, `.` closed.
    pub fn grid_dump(&self) -> Result<String> {
        if self.bbox.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: self.bbox.dim(),
            });
        }
        let side = self.bbox.side();
        let mut s = String::with_capacity(side * (side + 1));
        for row in (0..side).rev() {
            for col in 0..side {
                s.push(if self.bits[row * side + col] { '#' } else { '.' });
            }
            s.push('\n');
        }
        Ok(s)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::Parse("truncated configuration".into()));
        }
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
}

/// Hand-built configurations for tests and examples.
#[derive(Clone, Debug)]
pub struct ConfigBuilder {
    config: Configuration,
}

impl ConfigBuilder {
    pub fn closed(bbox: &BoxSpec) -> Self {
        ConfigBuilder {
            config: Configuration::all_closed(bbox),
        }
    }

    pub fn open(bbox: &BoxSpec) -> Self {
        ConfigBuilder {
            config: Configuration::all_open(bbox),
        }
    }

    pub fn set(mut self, x: &Point, open: bool) -> Result<Self> {
        self.config.set(x, open)?;
        Ok(self)
    }

    pub fn open_site(self, x: &Point) -> Result<Self> {
        self.set(x, true)
    }

    pub fn close_site(self, x: &Point) -> Result<Self> {
        self.set(x, false)
    }

    /// Sets `len` sites starting at `from` and stepping by `step` (±1) along `axis`.
    pub fn segment(mut self, from: &Point, axis: usize, step: i32, len: u32, open: bool) -> Result<Self> {
        let mut x = *from;
        for _ in 0..len {
            self.config.set(&x, open)?;
            x = x.offset(axis, step);
        }
        Ok(self)
    }

    /// Opens the straight ray from `from` along `axis` in direction `step` up to the box edge.
    pub fn open_ray(mut self, from: &Point, axis: usize, step: i32) -> Result<Self> {
        let bbox = *self.config.bbox();
        let mut x = *from;
        while bbox.contains(&x) {
            self.config.set(&x, true)?;
            x = x.offset(axis, step);
        }
        Ok(self)
    }

    pub fn build(self) -> Configuration {
        self.config
    }
}

/// Statuses known on a subset of a box; the rest are undetermined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialConfiguration {
    bbox: BoxSpec,
    statuses: Vec<Option<bool>>,
}

impl PartialConfiguration {
    pub fn bbox(&self) -> &BoxSpec {
        &self.bbox
    }

    pub fn status(&self, x: &Point) -> Option<bool> {
        self.bbox.index_of(x).and_then(|i| self.statuses[i])
    }

    #[inline]
    pub fn status_index(&self, index: usize) -> Option<bool> {
        self.statuses[index]
    }

    pub fn is_defined(&self, x: &Point) -> bool {
        self.status(x).is_some()
    }

    pub fn domain_len(&self) -> usize {
        self.statuses.iter().filter(|s| s.is_some()).count()
    }

    pub fn open_count(&self) -> usize {
        self.statuses.iter().filter(|s| **s == Some(true)).count()
    }

    pub fn domain(&self) -> impl Iterator<Item = Point> + '_ {
        self.statuses
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_some())
            .map(|(i, _)| self.bbox.site(i))
    }

    /// Completes the partial configuration when it is defined everywhere.
    pub fn to_configuration(&self) -> Option<Configuration> {
        let statuses: Option<Vec<bool>> = self.statuses.iter().copied().collect();
        statuses.map(|s| Configuration::from_statuses(&self.bbox, &s).expect("volume matches"))
    }
}

/// Keeps the statuses of `config` on `region` only.
pub fn restrict<'a, I>(config: &Configuration, region: I) -> Result<PartialConfiguration>
where
    I: IntoIterator<Item = &'a Point>,
{
    let bbox = *config.bbox();
    let mut statuses = vec![None; bbox.volume()];
    for x in region {
        let i = bbox.index_of(x).ok_or(Error::RegionOutsideBox(bbox))?;
        statuses[i] = Some(config.is_open_index(i));
    }
    Ok(PartialConfiguration { bbox, statuses })
}

/// `restrict` to the annulus `Λ(n+ell) \ Λ(n)` of a configuration on `Λ(n+ell)`.
pub fn restrict_to_annulus(config: &Configuration, n: u32) -> Result<PartialConfiguration> {
    let bbox = *config.bbox();
    let inner = bbox.with_radius(n)?;
    if n > bbox.radius() {
        return Err(Error::InvalidParameter(format!("inner radius {n} exceeds {bbox}")));
    }
    let statuses = (0..bbox.volume())
        .map(|i| {
            let x = bbox.site(i);
            (!inner.contains(&x)).then(|| config.is_open_index(i))
        })
        .collect();
    Ok(PartialConfiguration { bbox, statuses })
}

/// Renders a labelled d = 2 configuration, one character per site (used by the CLI dump).
pub fn label_dump(bbox: &BoxSpec, labels: &[Option<usize>]) -> Result<String> {
    if bbox.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: bbox.dim(),
        });
    }
    const GLYPHS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
    let mut order: Vec<usize> = labels.iter().flatten().copied().collect();
    order.sort_unstable();
    order.dedup();
    let side = bbox.side();
    let mut s = String::new();
    for row in (0..side).rev() {
        for col in 0..side {
            match labels[row * side + col] {
                None => s.push('.'),
                Some(l) => {
                    let rank = order.binary_search(&l).expect("label present");
                    s.push(GLYPHS[rank % GLYPHS.len()] as char);
                }
            }
        }
        let _ = writeln!(s);
    }
    Ok(s)
}

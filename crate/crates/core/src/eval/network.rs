//! A small residual network over synopses, loaded from a `PNBW1` file.
//!
//! File layout, all integers little-endian:
//!
//! ```text
//! "PNBW1"  u32 tensor count
//! per tensor: u16 name length, name bytes (UTF-8), u8 rank, rank x u32 dims,
//!             f32 data in row-major order
//! u32 CRC-32 of every preceding byte
//! ```
//!
//! Tensor names, with `W` the tower width and `<h>` a headset name:
//!
//! | name | shape |
//! |---|---|
//! | `stem.weight`, `stem.bias` | `[W, 104, 3, 3]`, `[W]` |
//! | `tower.<i>.conv1.*`, `tower.<i>.conv2.*` | `[W, W, 3, 3]`, `[W]` |
//! | `head.<h>.policy.*` | `[65, W, 1, 1]`, `[65]` |
//! | `head.<h>.pass.conv.*`, `.fc1.*`, `.fc2.*` | `[C, W, 1, 1]`, `[H, 64C]`, `[1, H]` |
//! | `head.<h>.value.*`, `head.<h>.soon_win.*`, `head.<h>.soon_lose.*` | as `pass` |
//! | `head.<h>.pieces.conv.*`, `head.<h>.pieces.fc.*` | `[C, W, 1, 1]`, `[12, 64C]` |
//!
//! Batch normalization is folded into the convolutions before export. Policy
//! channel `c < 64` at square `s` is the move from `s` to `c`; channel 64 at
//! `s` is the sense at `s`; both in the synopsis frame. Every headset needs a
//! policy and pass head; `Top` and `All` must exist and `All` needs a value
//! head.

use std::collections::BTreeMap;
use std::path::Path;

use super::index::{oriented_index, PASS, SENSE_BASE};
use super::{softmax, Aux, Evaluation, Evaluator, ALL, TOP};
use crate::game::Action;
use crate::tracking::synopsis::PLANES;
use crate::tracking::Synopsis;

pub const MAGIC: &[u8; 5] = b"PNBW1";

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read weights: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a PNBW1 weight file")]
    Magic,
    #[error("weight file truncated")]
    Truncated,
    #[error("CRC mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Crc { stored: u32, computed: u32 },
    #[error("unknown tensor {0:?}")]
    UnknownTensor(String),
    #[error("tensor {name:?} has shape {found:?}, expected {expected:?}")]
    Shape { name: String, expected: Vec<usize>, found: Vec<usize> },
    #[error("missing tensor {0:?}")]
    Missing(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub dims: Vec<usize>,
    pub data: Vec<f32>,
}

/// The raw named tensors of a weight file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightFile {
    pub tensors: BTreeMap<String, Tensor>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], LoadError> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(LoadError::Truncated)?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, LoadError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, LoadError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, LoadError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

impl WeightFile {
    pub fn from_bytes(bytes: &[u8]) -> Result<WeightFile, LoadError> {
        if bytes.len() < 5 || &bytes[..5] != MAGIC {
            return Err(LoadError::Magic);
        }
        if bytes.len() < 13 {
            return Err(LoadError::Truncated);
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().unwrap());
        let computed = crc32fast::hash(body);
        if stored != computed {
            return Err(LoadError::Crc { stored, computed });
        }
        let mut c = Cursor { bytes: body, at: 5 };
        let count = c.u32()?;
        let mut tensors = BTreeMap::new();
        for _ in 0..count {
            let len = c.u16()? as usize;
            let name = String::from_utf8_lossy(c.take(len)?).into_owned();
            let rank = c.u8()? as usize;
            let dims = (0..rank).map(|_| c.u32().map(|d| d as usize)).collect::<Result<Vec<_>, _>>()?;
            let n: usize = dims.iter().product();
            let data = c.take(n.checked_mul(4).ok_or(LoadError::Truncated)?)?;
            let data = data.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect();
            tensors.insert(name, Tensor { dims, data });
        }
        if c.at != body.len() {
            return Err(LoadError::Truncated);
        }
        Ok(WeightFile { tensors })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = MAGIC.to_vec();
        out.extend_from_slice(&(self.tensors.len() as u32).to_le_bytes());
        for (name, t) in &self.tensors {
            out.extend_from_slice(&(name.len() as u16).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.push(t.dims.len() as u8);
            for d in &t.dims {
                out.extend_from_slice(&(*d as u32).to_le_bytes());
            }
            for v in &t.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn read(path: impl AsRef<Path>) -> Result<WeightFile, LoadError> {
        WeightFile::from_bytes(&std::fs::read(path)?)
    }
}

/// Convolution over the 8x8 board with zero padding.
#[derive(Clone, Debug)]
struct Conv {
    out: usize,
    inp: usize,
    k: usize,
    w: Vec<f32>,
    b: Vec<f32>,
}

impl Conv {
    fn apply(&self, x: &[f32], y: &mut Vec<f32>) {
        debug_assert_eq!(x.len(), self.inp * 64);
        y.clear();
        y.resize(self.out * 64, 0.0);
        let pad = (self.k / 2) as isize;
        for o in 0..self.out {
            let yo = &mut y[o * 64..(o + 1) * 64];
            yo.fill(self.b[o]);
            for i in 0..self.inp {
                let xi = &x[i * 64..(i + 1) * 64];
                for kr in 0..self.k {
                    for kf in 0..self.k {
                        let w = self.w[((o * self.inp + i) * self.k + kr) * self.k + kf];
                        if w == 0.0 {
                            continue;
                        }
                        let dr = kr as isize - pad;
                        let df = kf as isize - pad;
                        for r in 0..8isize {
                            let sr = r + dr;
                            if !(0..8).contains(&sr) {
                                continue;
                            }
                            for f in 0..8isize {
                                let sf = f + df;
                                if (0..8).contains(&sf) {
                                    yo[(r * 8 + f) as usize] += w * xi[(sr * 8 + sf) as usize];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
struct Dense {
    out: usize,
    inp: usize,
    w: Vec<f32>,
    b: Vec<f32>,
}

impl Dense {
    fn apply(&self, x: &[f32]) -> Vec<f32> {
        (0..self.out)
            .map(|o| {
                self.b[o] + self.w[o * self.inp..(o + 1) * self.inp].iter().zip(x).map(|(w, v)| w * v).sum::<f32>()
            })
            .collect()
    }
}

/// 1x1 convolution, ReLU, then dense layers.
#[derive(Clone, Debug)]
struct Head {
    conv: Conv,
    layers: Vec<Dense>,
}

impl Head {
    fn apply(&self, tower: &[f32]) -> Vec<f32> {
        let mut h = Vec::new();
        self.conv.apply(tower, &mut h);
        relu(&mut h);
        for (i, d) in self.layers.iter().enumerate() {
            h = d.apply(&h);
            if i + 1 < self.layers.len() {
                relu(&mut h);
            }
        }
        h
    }
}

#[derive(Clone, Debug)]
struct Headset {
    policy: Conv,
    pass: Head,
    value: Option<Head>,
    soon_win: Option<Head>,
    soon_lose: Option<Head>,
    pieces: Option<Head>,
}

fn relu(x: &mut [f32]) {
    x.iter_mut().for_each(|v| *v = v.max(0.0));
}

fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

struct Loader {
    tensors: BTreeMap<String, Tensor>,
}

impl Loader {
    fn tensor(&mut self, name: &str, expected: &[Option<usize>]) -> Result<Tensor, LoadError> {
        let t = self.tensors.remove(name).ok_or_else(|| LoadError::Missing(name.to_string()))?;
        let ok = t.dims.len() == expected.len() && t.dims.iter().zip(expected).all(|(d, e)| e.is_none_or(|e| e == *d));
        if !ok {
            return Err(LoadError::Shape {
                name: name.to_string(),
                expected: expected.iter().map(|e| e.unwrap_or(0)).collect(),
                found: t.dims,
            });
        }
        Ok(t)
    }

    fn conv(&mut self, prefix: &str, out: Option<usize>, inp: usize, k: usize) -> Result<Conv, LoadError> {
        let w = self.tensor(&format!("{prefix}.weight"), &[out, Some(inp), Some(k), Some(k)])?;
        let out = w.dims[0];
        let b = self.tensor(&format!("{prefix}.bias"), &[Some(out)])?;
        Ok(Conv { out, inp, k, w: w.data, b: b.data })
    }

    fn dense(&mut self, prefix: &str, out: Option<usize>, inp: usize) -> Result<Dense, LoadError> {
        let w = self.tensor(&format!("{prefix}.weight"), &[out, Some(inp)])?;
        let out = w.dims[0];
        let b = self.tensor(&format!("{prefix}.bias"), &[Some(out)])?;
        Ok(Dense { out, inp, w: w.data, b: b.data })
    }

    fn has(&self, prefix: &str) -> bool {
        self.tensors.keys().any(|k| k.starts_with(prefix))
    }

    fn head(&mut self, prefix: &str, width: usize, outputs: usize) -> Result<Head, LoadError> {
        let conv = self.conv(&format!("{prefix}.conv"), None, width, 1)?;
        let fc1 = self.dense(&format!("{prefix}.fc1"), None, conv.out * 64)?;
        let fc2 = self.dense(&format!("{prefix}.fc2"), Some(outputs), fc1.out)?;
        Ok(Head { conv, layers: vec![fc1, fc2] })
    }

    fn optional_head(&mut self, prefix: &str, width: usize, outputs: usize) -> Result<Option<Head>, LoadError> {
        if self.has(&format!("{prefix}.")) {
            self.head(prefix, width, outputs).map(Some)
        } else {
            Ok(None)
        }
    }
}

/// Residual tower with one set of heads per headset.
#[derive(Clone, Debug)]
pub struct Network {
    width: usize,
    stem: Conv,
    tower: Vec<(Conv, Conv)>,
    headsets: BTreeMap<String, Headset>,
}

/// Raw outputs of one forward pass.
#[derive(Clone, Debug)]
pub struct RawOutput {
    /// Policy logits indexed in the synopsis frame: `from * 64 + to`,
    /// `4096 + square`, then pass.
    pub logits: Vec<f32>,
    pub value: f32,
    pub aux: Option<Aux>,
}

impl Network {
    pub fn load(path: impl AsRef<Path>) -> Result<Network, LoadError> {
        Network::from_weights(WeightFile::read(path)?)
    }

    pub fn from_weights(file: WeightFile) -> Result<Network, LoadError> {
        let mut l = Loader { tensors: file.tensors };
        let stem = l.conv("stem", None, PLANES, 3)?;
        let width = stem.out;
        let mut tower = Vec::new();
        while l.has(&format!("tower.{}.", tower.len())) {
            let i = tower.len();
            let c1 = l.conv(&format!("tower.{i}.conv1"), Some(width), width, 3)?;
            let c2 = l.conv(&format!("tower.{i}.conv2"), Some(width), width, 3)?;
            tower.push((c1, c2));
        }
        let names: Vec<String> = l
            .tensors
            .keys()
            .filter_map(|k| k.strip_prefix("head.")?.split('.').next().map(str::to_string))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut headsets = BTreeMap::new();
        for h in names {
            let p = format!("head.{h}");
            let policy = l.conv(&format!("{p}.policy"), Some(65), width, 1)?;
            let pass = l.head(&format!("{p}.pass"), width, 1)?;
            let value = l.optional_head(&format!("{p}.value"), width, 1)?;
            let soon_win = l.optional_head(&format!("{p}.soon_win"), width, 1)?;
            let soon_lose = l.optional_head(&format!("{p}.soon_lose"), width, 1)?;
            let pieces = if l.has(&format!("{p}.pieces.")) {
                let conv = l.conv(&format!("{p}.pieces.conv"), None, width, 1)?;
                let fc = l.dense(&format!("{p}.pieces.fc"), Some(12), conv.out * 64)?;
                Some(Head { conv, layers: vec![fc] })
            } else {
                None
            };
            headsets.insert(h, Headset { policy, pass, value, soon_win, soon_lose, pieces });
        }
        if let Some(name) = l.tensors.keys().next() {
            return Err(LoadError::UnknownTensor(name.clone()));
        }
        for required in [TOP, ALL] {
            if !headsets.contains_key(required) {
                return Err(LoadError::Missing(format!("head.{required}.policy.weight")));
            }
        }
        if headsets[ALL].value.is_none() {
            return Err(LoadError::Missing(format!("head.{ALL}.value.conv.weight")));
        }
        Ok(Network { width, stem, tower, headsets })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn depth(&self) -> usize {
        self.tower.len()
    }

    fn tower(&self, s: &Synopsis) -> Vec<f32> {
        let mut x = vec![0.0f32; PLANES * 64];
        for (p, chunk) in x.chunks_exact_mut(64).enumerate() {
            for sq in s.planes[p].iter() {
                chunk[sq.index()] = 1.0;
            }
        }
        let mut h = Vec::new();
        self.stem.apply(&x, &mut h);
        relu(&mut h);
        let mut t = Vec::new();
        let mut u = Vec::new();
        for (c1, c2) in &self.tower {
            c1.apply(&h, &mut t);
            relu(&mut t);
            c2.apply(&t, &mut u);
            for (a, b) in u.iter_mut().zip(&h) {
                *a += b;
            }
            relu(&mut u);
            std::mem::swap(&mut h, &mut u);
        }
        h
    }

    /// Full forward pass with the policy of `headset` and the value and
    /// auxiliary outputs of `All`.
    pub fn forward(&self, s: &Synopsis, headset: &str) -> RawOutput {
        let h = self.tower(s);
        let hs = self.headsets.get(headset).unwrap_or(&self.headsets[TOP]);
        let mut planes = Vec::new();
        hs.policy.apply(&h, &mut planes);
        let mut logits = vec![0.0; PASS as usize + 1];
        for sq in 0..64 {
            for to in 0..64 {
                logits[sq * 64 + to] = planes[to * 64 + sq];
            }
            logits[SENSE_BASE as usize + sq] = planes[64 * 64 + sq];
        }
        logits[PASS as usize] = hs.pass.apply(&h)[0];
        let all = &self.headsets[ALL];
        let value = all.value.as_ref().unwrap().apply(&h)[0].tanh();
        let aux = match (&all.soon_win, &all.soon_lose, &all.pieces) {
            (Some(w), Some(l), Some(p)) => Some(Aux {
                soon_win: sigmoid(w.apply(&h)[0]),
                soon_lose: sigmoid(l.apply(&h)[0]),
                piece_counts: p.apply(&h).try_into().unwrap(),
            }),
            _ => None,
        };
        RawOutput { logits, value, aux }
    }
}

impl Evaluator for Network {
    fn headsets(&self) -> Vec<String> {
        self.headsets.keys().cloned().collect()
    }

    fn evaluate(&self, batch: &[(&Synopsis, &[Action])], headset: &str) -> Vec<Evaluation> {
        batch
            .iter()
            .map(|(s, actions)| {
                let raw = self.forward(s, headset);
                let mut policy: Vec<f32> =
                    actions.iter().map(|a| raw.logits[oriented_index(*a, s.perspective) as usize]).collect();
                softmax(&mut policy);
                Evaluation { policy, value: raw.value, aux: raw.aux }
            })
            .collect()
    }
}

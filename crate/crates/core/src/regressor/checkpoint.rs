//! `GREG v1` checkpoints.
//!
//! Little-endian: magic `GREG`, `u32` version, `u32` d_model, `u32` D,
//! `u32` K, then named blocks until end of file, each a `u16` name length,
//! the UTF-8 name, a `u32` value count and that many `f32` values.
//!
//! Model blocks use the names in [`BLOCK_NAMES`]. A resumable checkpoint
//! adds `adam.m.<name>` and `adam.v.<name>` for every model block plus the
//! scalars `train.step` and `train.epoch`. The update-head width is
//! inferred from `update.b1`.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use super::model::{GateRegressor, ModelShape, BLOCK_NAMES};
use super::optim::AdamW;
use super::train::TrainState;
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"GREG";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: GateRegressor,
    pub k_iters: usize,
    /// Optimiser state and completed epochs, present when resumable.
    pub resume: Option<(AdamW, usize)>,
}

impl Checkpoint {
    pub fn from_state(state: &TrainState, k_iters: usize) -> Self {
        Self { model: state.model.clone(), k_iters, resume: Some((state.optim.clone(), state.epochs_done)) }
    }

    pub fn into_state(self) -> Option<TrainState> {
        let (optim, epochs_done) = self.resume?;
        Some(TrainState { model: self.model, optim, epochs_done })
    }
}

fn put_block<W: Write>(out: &mut W, name: &str, values: impl ExactSizeIterator<Item = f64>) -> Result<()> {
    out.write_all(&(name.len() as u16).to_le_bytes())?;
    out.write_all(name.as_bytes())?;
    out.write_all(&(values.len() as u32).to_le_bytes())?;
    for v in values {
        out.write_all(&(v as f32).to_le_bytes())?;
    }
    Ok(())
}

pub fn write_checkpoint<W: Write>(ck: &Checkpoint, mut out: W) -> Result<()> {
    let s = ck.model.shape();
    out.write_all(MAGIC)?;
    for v in [VERSION, s.d_model as u32, s.token_dim as u32, ck.k_iters as u32] {
        out.write_all(&v.to_le_bytes())?;
    }
    for (name, t) in ck.model.blocks() {
        put_block(&mut out, name, t.data.iter().copied())?;
    }
    if let Some((opt, epoch)) = &ck.resume {
        for (prefix, m) in [("adam.m.", &opt.m), ("adam.v.", &opt.v)] {
            for (name, t) in m.blocks() {
                put_block(&mut out, &format!("{prefix}{name}"), t.data.iter().copied())?;
            }
        }
        put_block(&mut out, "train.step", std::iter::once(opt.step as f64))?;
        put_block(&mut out, "train.epoch", std::iter::once(*epoch as f64))?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_checkpoint(ck: &Checkpoint, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_checkpoint(ck, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

fn err(reason: impl Into<String>) -> Error {
    Error::format("GREG", reason.into())
}

struct Cursor<'a>(&'a [u8]);

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.0.len() < n {
            return Err(err("truncated"));
        }
        let (a, b) = self.0.split_at(n);
        self.0 = b;
        Ok(a)
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<Checkpoint> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut c = Cursor(&bytes);
    if c.take(4)? != MAGIC {
        return Err(err("bad magic"));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(err(format!("unsupported version {version}")));
    }
    let d_model = c.u32()? as usize;
    let token_dim = c.u32()? as usize;
    let k_iters = c.u32()? as usize;
    let mut blocks: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    while !c.0.is_empty() {
        let n = c.u16()? as usize;
        let name = std::str::from_utf8(c.take(n)?).map_err(|_| err("block name is not UTF-8"))?.to_owned();
        let count = c.u32()? as usize;
        let raw = c.take(count.checked_mul(4).ok_or_else(|| err("block too large"))?)?;
        let vals = raw.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64).collect();
        if blocks.insert(name.clone(), vals).is_some() {
            return Err(err(format!("duplicate block {name}")));
        }
    }
    let hidden = blocks.get("update.b1").ok_or_else(|| err("missing block update.b1"))?.len();
    let shape = ModelShape { token_dim, d_model, hidden };

    let fill = |blocks: &mut BTreeMap<String, Vec<f64>>, target: &mut GateRegressor, prefix: &str| -> Result<()> {
        for (name, t) in target.blocks_mut() {
            let key = format!("{prefix}{name}");
            let v = blocks.remove(&key).ok_or_else(|| err(format!("missing block {key}")))?;
            if v.len() != t.len() {
                return Err(err(format!("block {key} has {} values, expected {}", v.len(), t.len())));
            }
            t.data = v;
        }
        Ok(())
    };
    let mut model = GateRegressor::zeros(shape);
    fill(&mut blocks, &mut model, "")?;
    let resume = if blocks.contains_key("train.step") {
        let mut opt = AdamW::new(&model);
        fill(&mut blocks, &mut opt.m, "adam.m.")?;
        fill(&mut blocks, &mut opt.v, "adam.v.")?;
        let mut scalar = |k: &str| -> Result<usize> {
            match blocks.remove(k).as_deref() {
                Some([v]) if *v >= 0.0 && v.fract() == 0.0 => Ok(*v as usize),
                _ => Err(err(format!("bad scalar block {k}"))),
            }
        };
        opt.step = scalar("train.step")? as u64;
        let epoch = scalar("train.epoch")?;
        Some((opt, epoch))
    } else {
        None
    };
    if let Some(extra) = blocks.keys().next() {
        return Err(err(format!("unknown block {extra}")));
    }
    debug_assert_eq!(BLOCK_NAMES.len(), model.blocks().len());
    Ok(Checkpoint { model, k_iters, resume })
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    read_checkpoint(std::fs::File::open(path)?)
}

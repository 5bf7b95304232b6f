//! The binarized chained-CTW environment model.
//!
//! The model predicts the joint symbol `(next state bits, reward bits)`
//! given `(previous state bits, action bits)`. With `d = state_bits +
//! action_bits` and `k = state_bits + reward_bits`, it keeps `k` context
//! trees: tree `l` (1-based) predicts symbol bit `l` from the context
//!
//! ```text
//! [prev state][action][symbol bits 1..l-1]
//! ```
//!
//! of length `d + l - 1`, which is exactly that tree's depth (optionally
//! truncated to `depth_cap` most-recent bits). The product of the k per-bit
//! mixture predictions is itself a Bayesian mixture over k-tuples of
//! prediction suffix trees, so the model inherits CTW's dominance
//! guarantees; a fresh model assigns every symbol probability `2^-k`.
//!
//! Snapshots make the model safe to hand to a simulation-based planner:
//! every mutation after `snapshot()` is journaled and `restore()` rolls the
//! model back bit-exactly. Snapshots are strictly LIFO.
//!
//! Checkpoints store a versioned header plus per-node `(path, zeros, ones)`
//! records; KT block probabilities are exchangeable, so counts fully
//! determine the reconstructed mixture. Reload recomputes log values in
//! closed form, which can differ from the incrementally accumulated floats
//! by strictly-float-noise (< 1e-12 relative); re-serializing a loaded model
//! is byte-identical.

use super::{ContextTree, CtwError, KtCounts};
use crate::bits::BitString;
use rand::Rng;
use std::io::{Read, Write};

const MAGIC: &[u8; 4] = b"PBCW";
const VERSION: u32 = 1;

/// Opaque snapshot token. Not clonable: each token can be restored once.
#[derive(Debug)]
pub struct ModelSnapshot {
    serial: u64,
}

#[derive(Debug, Clone)]
struct SnapRecord {
    serial: u64,
    tree_lens: Vec<usize>,
    prev_state: BitString,
    steps: u64,
}

/// Chained per-bit CTW mixture over (state, reward) symbols.
#[derive(Debug, Clone)]
pub struct PhiBctwModel {
    state_bits: usize,
    action_bits: usize,
    reward_bits: usize,
    depth_cap: Option<usize>,
    trees: Vec<ContextTree>,
    prev_state: BitString,
    steps: u64,
    snap_stack: Vec<SnapRecord>,
    snap_serial: u64,
}

impl PhiBctwModel {
    pub fn new(state_bits: usize, action_bits: usize, reward_bits: usize) -> Self {
        Self::with_depth_cap(state_bits, action_bits, reward_bits, None)
    }

    /// As [`PhiBctwModel::new`], but truncating every tree's context to the
    /// `cap` most recent bits.
    pub fn with_depth_cap(
        state_bits: usize,
        action_bits: usize,
        reward_bits: usize,
        cap: Option<usize>,
    ) -> Self {
        assert!(action_bits >= 1, "at least one action bit");
        assert!(reward_bits >= 1, "at least one reward bit");
        let d = state_bits + action_bits;
        let k = state_bits + reward_bits;
        let trees = (0..k)
            .map(|l| ContextTree::new(cap.map_or(d + l, |c| (d + l).min(c))))
            .collect();
        PhiBctwModel {
            state_bits,
            action_bits,
            reward_bits,
            depth_cap: cap,
            trees,
            prev_state: BitString::zeros(state_bits),
            steps: 0,
            snap_stack: Vec::new(),
            snap_serial: 0,
        }
    }

    pub fn state_bits(&self) -> usize {
        self.state_bits
    }

    pub fn action_bits(&self) -> usize {
        self.action_bits
    }

    pub fn reward_bits(&self) -> usize {
        self.reward_bits
    }

    pub fn symbol_bits(&self) -> usize {
        self.state_bits + self.reward_bits
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// The state part of the most recently updated symbol (all zeros before
    /// the first update, matching the all-zeros initial-state convention).
    pub fn prev_state(&self) -> &BitString {
        &self.prev_state
    }

    /// Reset the remembered previous state (used when the model starts
    /// mid-history, e.g. right after feature selection).
    pub fn set_prev_state(&mut self, s: BitString) {
        assert_eq!(s.len(), self.state_bits);
        self.prev_state = s;
    }

    pub fn trees(&self) -> &[ContextTree] {
        &self.trees
    }

    fn check_widths(
        &self,
        prev: &BitString,
        action: &BitString,
        symbol: Option<&BitString>,
    ) -> Result<(), CtwError> {
        if prev.len() != self.state_bits {
            return Err(CtwError::WidthMismatch {
                what: "previous state",
                expected: self.state_bits,
                got: prev.len(),
            });
        }
        if action.len() != self.action_bits {
            return Err(CtwError::WidthMismatch {
                what: "action",
                expected: self.action_bits,
                got: action.len(),
            });
        }
        if let Some(sym) = symbol {
            if sym.len() != self.symbol_bits() {
                return Err(CtwError::WidthMismatch {
                    what: "symbol",
                    expected: self.symbol_bits(),
                    got: sym.len(),
                });
            }
        }
        Ok(())
    }

    /// Stream-order context bits shared by all trees: prev state, action,
    /// then however many symbol bits the tree conditions on.
    fn full_context(&self, prev: &BitString, action: &BitString, symbol: &[bool]) -> Vec<bool> {
        let mut ctx = Vec::with_capacity(self.state_bits + self.action_bits + symbol.len());
        ctx.extend_from_slice(prev.as_slice());
        ctx.extend_from_slice(action.as_slice());
        ctx.extend_from_slice(symbol);
        ctx
    }

    /// Natural-log probability of the full symbol; updates every tree and
    /// advances the remembered previous state.
    pub fn update(
        &mut self,
        prev: &BitString,
        action: &BitString,
        symbol: &BitString,
    ) -> Result<f64, CtwError> {
        self.check_widths(prev, action, Some(symbol))?;
        let ctx = self.full_context(prev, action, symbol.as_slice());
        let d = self.state_bits + self.action_bits;
        let mut log_p = 0.0;
        for (l, tree) in self.trees.iter_mut().enumerate() {
            log_p += tree.update(&ctx[..d + l], symbol.get(l))?;
        }
        self.prev_state = symbol.slice(0..self.state_bits);
        self.steps += 1;
        Ok(log_p)
    }

    /// As [`Self::update`], using the internally tracked previous state.
    pub fn update_chained(
        &mut self,
        action: &BitString,
        symbol: &BitString,
    ) -> Result<f64, CtwError> {
        let prev = self.prev_state.clone();
        self.update(&prev, action, symbol)
    }

    /// Natural-log probability of the full symbol without mutating anything.
    pub fn predict(
        &self,
        prev: &BitString,
        action: &BitString,
        symbol: &BitString,
    ) -> Result<f64, CtwError> {
        self.check_widths(prev, action, Some(symbol))?;
        let ctx = self.full_context(prev, action, symbol.as_slice());
        let d = self.state_bits + self.action_bits;
        let mut log_p = 0.0;
        for (l, tree) in self.trees.iter().enumerate() {
            log_p += tree.predict(&ctx[..d + l], symbol.get(l))?;
        }
        Ok(log_p)
    }

    /// Sample a symbol bit-by-bit from the chained predictive distribution.
    /// Sampling never mutates the model: each bit's context contains only
    /// already-sampled bits, so no statistics need to change mid-symbol.
    pub fn sample(
        &self,
        prev: &BitString,
        action: &BitString,
        rng: &mut impl Rng,
    ) -> Result<BitString, CtwError> {
        self.check_widths(prev, action, None)?;
        let d = self.state_bits + self.action_bits;
        let mut ctx = self.full_context(prev, action, &[]);
        let mut symbol = BitString::new();
        for (l, tree) in self.trees.iter().enumerate() {
            let p1 = tree.predict(&ctx[..d + l], true)?.exp();
            let bit = rng.random::<f64>() < p1;
            symbol.push(bit);
            ctx.push(bit);
        }
        Ok(symbol)
    }

    /// Begin journaling and return a token for rolling back to this point.
    pub fn snapshot(&mut self) -> ModelSnapshot {
        self.snap_serial += 1;
        let record = SnapRecord {
            serial: self.snap_serial,
            tree_lens: self.trees.iter().map(|t| t.journal_len()).collect(),
            prev_state: self.prev_state.clone(),
            steps: self.steps,
        };
        if self.snap_stack.is_empty() {
            for tree in &mut self.trees {
                tree.set_journaling(true);
            }
        }
        self.snap_stack.push(record);
        ModelSnapshot { serial: self.snap_serial }
    }

    /// Roll back to the snapshot point. Snapshots must be restored in LIFO
    /// order; restoring out of order is a contract violation.
    pub fn restore(&mut self, snap: ModelSnapshot) -> Result<(), CtwError> {
        let top = self.snap_stack.last().ok_or(CtwError::SnapshotUnknown)?;
        if top.serial != snap.serial {
            return Err(if self.snap_stack.iter().any(|r| r.serial == snap.serial) {
                CtwError::SnapshotOrder
            } else {
                CtwError::SnapshotUnknown
            });
        }
        let record = self.snap_stack.pop().expect("checked non-empty");
        for (tree, &len) in self.trees.iter_mut().zip(&record.tree_lens) {
            tree.undo_to(len);
        }
        self.prev_state = record.prev_state;
        self.steps = record.steps;
        if self.snap_stack.is_empty() {
            for tree in &mut self.trees {
                tree.set_journaling(false);
            }
        }
        Ok(())
    }

    /// Structural digest over all trees plus chaining state (test support).
    pub fn digest(&self) -> u64 {
        use crate::util::splitmix64;
        let mut acc = splitmix64(self.steps ^ 0x51d3);
        for (i, tree) in self.trees.iter().enumerate() {
            acc ^= splitmix64(tree.digest().wrapping_add(i as u64));
        }
        for (i, &b) in self.prev_state.as_slice().iter().enumerate() {
            acc ^= splitmix64((b as u64) << 1 | (i as u64) << 8);
        }
        acc
    }

    /// Write a versioned binary checkpoint.
    pub fn save(&self, w: &mut impl Write) -> Result<(), CtwError> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.state_bits as u32).to_le_bytes())?;
        w.write_all(&(self.action_bits as u32).to_le_bytes())?;
        w.write_all(&(self.reward_bits as u32).to_le_bytes())?;
        w.write_all(&(self.depth_cap.map_or(u64::MAX, |c| c as u64)).to_le_bytes())?;
        w.write_all(&self.steps.to_le_bytes())?;
        write_bits(w, self.prev_state.as_slice())?;
        w.write_all(&(self.trees.len() as u32).to_le_bytes())?;
        for tree in &self.trees {
            let records = tree.nodes_preorder();
            w.write_all(&(tree.depth() as u64).to_le_bytes())?;
            w.write_all(&(records.len() as u64).to_le_bytes())?;
            for (path, counts) in records {
                write_bits(w, &path)?;
                w.write_all(&counts.zeros.to_le_bytes())?;
                w.write_all(&counts.ones.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Read a checkpoint written by [`Self::save`].
    pub fn load(r: &mut impl Read) -> Result<Self, CtwError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(CtwError::Corrupt("bad magic".into()));
        }
        let version = read_u32(r)?;
        if version != VERSION {
            return Err(CtwError::Corrupt(format!("unsupported version {version}")));
        }
        let state_bits = read_u32(r)? as usize;
        let action_bits = read_u32(r)? as usize;
        let reward_bits = read_u32(r)? as usize;
        let cap_raw = read_u64(r)?;
        let depth_cap = if cap_raw == u64::MAX { None } else { Some(cap_raw as usize) };
        let steps = read_u64(r)?;
        let prev_state = BitString::from_bits(read_bits(r)?);
        if prev_state.len() != state_bits {
            return Err(CtwError::Corrupt("previous-state width mismatch".into()));
        }
        let num_trees = read_u32(r)? as usize;
        if num_trees != state_bits + reward_bits {
            return Err(CtwError::Corrupt("tree count mismatch".into()));
        }
        let mut template = PhiBctwModel::with_depth_cap(state_bits, action_bits, reward_bits, depth_cap);
        let mut trees = Vec::with_capacity(num_trees);
        for l in 0..num_trees {
            let depth = read_u64(r)? as usize;
            if depth != template.trees[l].depth() {
                return Err(CtwError::Corrupt(format!("tree {l} depth mismatch")));
            }
            let count = read_u64(r)? as usize;
            let mut records = Vec::with_capacity(count);
            for _ in 0..count {
                let path = read_bits(r)?;
                let zeros = read_u64(r)?;
                let ones = read_u64(r)?;
                records.push((path, KtCounts { zeros, ones }));
            }
            trees.push(ContextTree::from_records(depth, &records)?);
        }
        template.trees = trees;
        template.prev_state = prev_state;
        template.steps = steps;
        Ok(template)
    }
}

pub(crate) fn write_bits(w: &mut impl Write, bits: &[bool]) -> std::io::Result<()> {
    w.write_all(&(bits.len() as u32).to_le_bytes())?;
    let mut byte = 0u8;
    for (i, &b) in bits.iter().enumerate() {
        byte = byte << 1 | b as u8;
        if i % 8 == 7 {
            w.write_all(&[byte])?;
            byte = 0;
        }
    }
    if bits.len() % 8 != 0 {
        byte <<= 8 - bits.len() % 8;
        w.write_all(&[byte])?;
    }
    Ok(())
}

pub(crate) fn read_bits(r: &mut impl Read) -> Result<Vec<bool>, CtwError> {
    let len = read_u32(r)? as usize;
    if len > 1 << 20 {
        return Err(CtwError::Corrupt("implausible bit-vector length".into()));
    }
    let nbytes = len.div_ceil(8);
    let mut buf = vec![0u8; nbytes];
    r.read_exact(&mut buf)?;
    Ok((0..len).map(|i| buf[i / 8] >> (7 - i % 8) & 1 == 1).collect())
}

pub(crate) fn read_u32(r: &mut impl Read) -> Result<u32, CtwError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_u64(r: &mut impl Read) -> Result<u64, CtwError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

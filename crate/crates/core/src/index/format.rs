//! Versioned binary container for built indexes.
//!
//! Layout (little-endian): magic `CSRX`, u16 version, u8 scheme id, u8 reserved,
//! u64 seed, 32-byte SHA-256 of the canonical graph text, u32 component count,
//! u64 payload length, payload.

use std::io::{Read, Write};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use fixedbitset::FixedBitSet;
use sha2::{Digest, Sha256};

use super::dual::{DualLabelingIndex, IntervalLabel, LinkGroup};
use super::grail::GrailIndex;
use super::tc::TcIndex;
use super::{ReachIndex, Scheme};
use crate::error::{Error, Result};
use crate::graph::{write_graph, ProgramValidGraph};

pub const INDEX_MAGIC: [u8; 4] = *b"CSRX";
pub const INDEX_FORMAT_VERSION: u16 = 1;

pub fn graph_hash(g: &ProgramValidGraph) -> [u8; 32] {
    let digest = Sha256::digest(write_graph(g).as_bytes());
    let mut out = [0u8; 32];
    out.copy_from_slice(&digest);
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexFile {
    pub seed: u64,
    pub graph_hash: [u8; 32],
    pub components: u32,
    pub index: ReachIndex,
}

pub fn write_index<W: Write>(mut w: W, file: &IndexFile) -> Result<()> {
    let payload = encode_payload(&file.index)?;
    w.write_all(&INDEX_MAGIC)?;
    w.write_u16::<LE>(INDEX_FORMAT_VERSION)?;
    w.write_u8(file.index.scheme().id())?;
    w.write_u8(0)?;
    w.write_u64::<LE>(file.seed)?;
    w.write_all(&file.graph_hash)?;
    w.write_u32::<LE>(file.components)?;
    w.write_u64::<LE>(payload.len() as u64)?;
    w.write_all(&payload)?;
    w.flush()?;
    Ok(())
}

/// Reads a container; with `expected_hash` set, refuses indexes built for another graph.
pub fn read_index<R: Read>(mut r: R, expected_hash: Option<&[u8; 32]>) -> Result<IndexFile> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(truncated)?;
    if magic != INDEX_MAGIC {
        return Err(Error::IndexFormat("bad magic; not an index file".into()));
    }
    let version = r.read_u16::<LE>().map_err(truncated)?;
    if version != INDEX_FORMAT_VERSION {
        return Err(Error::IndexFormat(format!(
            "unsupported version {version} (expected {INDEX_FORMAT_VERSION})"
        )));
    }
    let scheme_id = r.read_u8().map_err(truncated)?;
    let scheme = Scheme::from_id(scheme_id)
        .ok_or_else(|| Error::IndexFormat(format!("unknown scheme id {scheme_id}")))?;
    let _reserved = r.read_u8().map_err(truncated)?;
    let seed = r.read_u64::<LE>().map_err(truncated)?;
    let mut hash = [0u8; 32];
    r.read_exact(&mut hash).map_err(truncated)?;
    if let Some(expected) = expected_hash {
        if *expected != hash {
            return Err(Error::IndexGraphMismatch);
        }
    }
    let components = r.read_u32::<LE>().map_err(truncated)?;
    let len = r.read_u64::<LE>().map_err(truncated)?;
    let mut payload = Vec::new();
    r.take(len).read_to_end(&mut payload)?;
    if payload.len() as u64 != len {
        return Err(Error::IndexFormat("truncated payload".into()));
    }
    let index = decode_payload(scheme, components as usize, &payload)?;
    Ok(IndexFile {
        seed,
        graph_hash: hash,
        components,
        index,
    })
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::IndexFormat("truncated header".into())
    } else {
        Error::Io(e)
    }
}

fn put_interval(out: &mut Vec<u8>, iv: IntervalLabel) -> std::io::Result<()> {
    out.write_u32::<LE>(iv.low)?;
    out.write_u32::<LE>(iv.high)
}

fn encode_payload(index: &ReachIndex) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    match index {
        ReachIndex::Tc(tc) => {
            let n = tc.node_count();
            out.write_u32::<LE>(n as u32)?;
            let mut blocks = vec![0u64; n.div_ceil(64)];
            for row in tc.rows() {
                blocks.iter_mut().for_each(|b| *b = 0);
                for bit in row.ones() {
                    blocks[bit / 64] |= 1 << (bit % 64);
                }
                for &b in &blocks {
                    out.write_u64::<LE>(b)?;
                }
            }
        }
        ReachIndex::Dual(d) => {
            let n = d.intervals().len();
            out.write_u32::<LE>(n as u32)?;
            for (node, &iv) in d.intervals().iter().enumerate() {
                put_interval(&mut out, iv)?;
                out.write_u32::<LE>(d.tree_parent(node as u32))?;
            }
            out.write_u32::<LE>(d.non_tree_edges().len() as u32)?;
            for &(a, b) in d.non_tree_edges() {
                out.write_u32::<LE>(a)?;
                out.write_u32::<LE>(b)?;
            }
            out.write_u32::<LE>(d.link_groups().len() as u32)?;
            for g in d.link_groups() {
                put_interval(&mut out, g.source)?;
                out.write_u32::<LE>(g.targets.len() as u32)?;
                for &t in &g.targets {
                    put_interval(&mut out, t)?;
                }
            }
        }
        ReachIndex::Grail(g) => {
            out.write_u32::<LE>(g.k_labels() as u32)?;
            out.write_u32::<LE>(g.node_count() as u32)?;
            out.write_u64::<LE>(g.seed())?;
            for &iv in g.raw_labels() {
                put_interval(&mut out, iv)?;
            }
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    buf: &'a [u8],
}

impl Cursor<'_> {
    fn u32(&mut self) -> Result<u32> {
        self.buf
            .read_u32::<LE>()
            .map_err(|_| Error::IndexFormat("truncated payload".into()))
    }

    fn u64(&mut self) -> Result<u64> {
        self.buf
            .read_u64::<LE>()
            .map_err(|_| Error::IndexFormat("truncated payload".into()))
    }

    fn interval(&mut self) -> Result<IntervalLabel> {
        Ok(IntervalLabel::new(self.u32()?, self.u32()?))
    }

    /// Bounds a declared element count by the bytes actually present.
    fn count(&mut self, elem_bytes: usize) -> Result<usize> {
        let n = self.u32()? as usize;
        if n.saturating_mul(elem_bytes) > self.buf.len() {
            return Err(Error::IndexFormat("element count exceeds payload".into()));
        }
        Ok(n)
    }
}

fn decode_payload(scheme: Scheme, components: usize, payload: &[u8]) -> Result<ReachIndex> {
    let mut c = Cursor { buf: payload };
    let index = match scheme {
        Scheme::Tc => {
            let n = c.u32()? as usize;
            if n != components {
                return Err(Error::IndexFormat("component count mismatch".into()));
            }
            let blocks_per_row = n.div_ceil(64);
            if n.saturating_mul(blocks_per_row).saturating_mul(8) != c.buf.len() {
                return Err(Error::IndexFormat(
                    "closure payload has the wrong size".into(),
                ));
            }
            let mut rows = Vec::with_capacity(n);
            for _ in 0..n {
                let mut row = FixedBitSet::with_capacity(n);
                for b in 0..blocks_per_row {
                    let mut block = c.u64()?;
                    while block != 0 {
                        let bit = b * 64 + block.trailing_zeros() as usize;
                        if bit >= n {
                            return Err(Error::IndexFormat("closure bit out of range".into()));
                        }
                        row.insert(bit);
                        block &= block - 1;
                    }
                }
                rows.push(row);
            }
            ReachIndex::Tc(TcIndex::from_rows(rows))
        }
        Scheme::Dual => {
            let n = c.count(12)?;
            if n != components {
                return Err(Error::IndexFormat("component count mismatch".into()));
            }
            let mut intervals = Vec::with_capacity(n);
            let mut parents = Vec::with_capacity(n);
            for _ in 0..n {
                intervals.push(c.interval()?);
                parents.push(c.u32()?);
            }
            let m = c.count(8)?;
            let mut non_tree = Vec::with_capacity(m);
            for _ in 0..m {
                non_tree.push((c.u32()?, c.u32()?));
            }
            let groups_len = c.count(12)?;
            let mut groups = Vec::with_capacity(groups_len);
            for _ in 0..groups_len {
                let source = c.interval()?;
                let t = c.count(8)?;
                let mut targets = Vec::with_capacity(t);
                for _ in 0..t {
                    targets.push(c.interval()?);
                }
                groups.push(LinkGroup { source, targets });
            }
            ReachIndex::Dual(DualLabelingIndex::from_parts(
                intervals, parents, non_tree, groups,
            ))
        }
        Scheme::Grail => {
            let k = c.u32()? as usize;
            let n = c.u32()? as usize;
            let seed = c.u64()?;
            if n != components || k == 0 {
                return Err(Error::IndexFormat("grail header mismatch".into()));
            }
            if n.saturating_mul(k).saturating_mul(8) != c.buf.len() {
                return Err(Error::IndexFormat(
                    "grail payload has the wrong size".into(),
                ));
            }
            let mut labels = Vec::with_capacity(n * k);
            for _ in 0..n * k {
                labels.push(c.interval()?);
            }
            ReachIndex::Grail(GrailIndex::from_parts(k, seed, labels))
        }
    };
    if !c.buf.is_empty() {
        return Err(Error::IndexFormat("trailing bytes after payload".into()));
    }
    Ok(index)
}

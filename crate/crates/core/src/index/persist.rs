//! Binary index files.
//!
//! Layout (little-endian, `u64` integers, IEEE-754 `f64` reals):
//!
//! ```text
//! magic "TAMIXv1\0"
//! header: vertices edges hash | f alpha epsilon delta seed | h leaf_capacity
//! u64 length, TUC section: k_max l_max, per cell: key count, per key: key, group
//! u64 length, TIE section: dim h, topic vectors, node count, nodes,
//!                          table length, sample count, one table per vector
//! ```
//!
//! Vertex and member lists are stored as a count followed by ascending
//! deltas (the first entry verbatim).

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Fingerprint, Normalization, TopicVector, VertexId};
use crate::influence::{InfluenceTable, SampleParams};

use super::tie::{TieChildren, TieNode, TieSettings, TieTree};
use super::tuc::{TucCell, TucList};

pub const MAGIC: &[u8; 8] = b"TAMIXv1\0";
const MAGIC_STEM: &[u8; 6] = b"TAMIXv";

#[derive(Default)]
struct Buf(Vec<u8>);

impl Buf {
    fn u64(&mut self, x: u64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }

    fn f64(&mut self, x: f64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }

    fn ascending(&mut self, xs: impl ExactSizeIterator<Item = u64>) {
        self.u64(xs.len() as u64);
        let mut prev = 0;
        for (i, x) in xs.enumerate() {
            self.u64(if i == 0 { x } else { x - prev });
            prev = x;
        }
    }
}

/// Writes an index for the network identified by `fingerprint`.
pub fn write_index<W: Write>(
    mut out: W,
    fingerprint: &Fingerprint,
    tuc: &TucList,
    tie: &TieTree,
) -> io::Result<()> {
    let s = tie.settings();
    let mut head = Buf::default();
    head.0.extend_from_slice(MAGIC);
    head.u64(fingerprint.vertices);
    head.u64(fingerprint.edges);
    head.u64(fingerprint.hash);
    head.u64(s.normalization.code());
    head.f64(s.params.alpha);
    head.f64(s.params.epsilon);
    head.f64(s.params.delta);
    head.u64(s.params.seed);
    head.u64(tie.gammas().len() as u64);
    head.u64(s.leaf_capacity as u64);

    let mut tuc_buf = Buf::default();
    tuc_buf.u64(tuc.k_max() as u64);
    tuc_buf.u64(tuc.l_max() as u64);
    for cell in tuc.cells() {
        tuc_buf.u64(cell.keys().len() as u64);
        for (key, group) in cell.keys().iter().zip(cell.groups()) {
            tuc_buf.f64(*key);
            tuc_buf.ascending(group.iter().map(|&v| v as u64));
        }
    }
    head.u64(tuc_buf.0.len() as u64);
    out.write_all(&head.0)?;
    out.write_all(&tuc_buf.0)?;

    let dim = tie.gammas()[0].dim();
    let mut tie_buf = Buf::default();
    tie_buf.u64(dim as u64);
    tie_buf.u64(tie.gammas().len() as u64);
    for g in tie.gammas() {
        for &x in g.as_slice() {
            tie_buf.f64(x);
        }
    }
    tie_buf.u64(tie.nodes().len() as u64);
    for node in tie.nodes() {
        tie_buf.ascending(node.members.iter().map(|&i| i as u64));
        for &x in &node.axis {
            tie_buf.f64(x);
        }
        tie_buf.f64(node.aperture);
        match node.children {
            TieChildren::Leaf => tie_buf.u64(0),
            TieChildren::Internal { left, right } => {
                tie_buf.u64(1);
                tie_buf.u64(left as u64);
                tie_buf.u64(right as u64);
            }
        }
    }
    let table_len = tie.tables()[0].len();
    let samples = tie.tables()[0].samples();
    tie_buf.u64(table_len as u64);
    tie_buf.u64(samples as u64);
    let tables_bytes = (tie.tables().len() * table_len * 8) as u64;
    let mut len = Buf::default();
    len.u64(tie_buf.0.len() as u64 + tables_bytes);
    out.write_all(&len.0)?;
    out.write_all(&tie_buf.0)?;
    for t in tie.tables() {
        assert_eq!(t.len(), table_len, "tables of one tree share a length");
        let mut chunk = Vec::with_capacity(table_len * 8);
        for &x in t.as_slice() {
            chunk.extend_from_slice(&x.to_le_bytes());
        }
        out.write_all(&chunk)?;
    }
    out.flush()
}

pub fn save_index(
    path: impl AsRef<Path>,
    fingerprint: &Fingerprint,
    tuc: &TucList,
    tie: &TieTree,
) -> Result<()> {
    let file = File::create(path)?;
    write_index(BufWriter::new(file), fingerprint, tuc, tie)?;
    Ok(())
}

struct Reader<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Reader<R> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::IndexFormat {
            offset: self.offset,
            msg: msg.into(),
        }
    }

    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        match self.inner.read_exact(&mut b) {
            Ok(()) => {
                self.offset += N as u64;
                Ok(b)
            }
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => {
                Err(self.err("unexpected end of file"))
            }
            Err(e) => Err(e.into()),
        }
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    /// A count that must fit in the remaining `budget` bytes at `unit` each.
    fn count(&mut self, unit: u64, end: u64) -> Result<usize> {
        let at = self.offset;
        let c = self.u64()?;
        if c.saturating_mul(unit) > end.saturating_sub(self.offset) {
            return Err(Error::IndexFormat {
                offset: at,
                msg: format!("count {c} overruns its section"),
            });
        }
        Ok(c as usize)
    }

    fn ascending(&mut self, end: u64) -> Result<Vec<u64>> {
        let at = self.offset;
        let len = self.count(8, end)?;
        let mut out = Vec::with_capacity(len);
        let mut prev = 0u64;
        for i in 0..len {
            let d = self.u64()?;
            let x = if i == 0 {
                d
            } else {
                if d == 0 {
                    return Err(Error::IndexFormat {
                        offset: at,
                        msg: "list is not strictly ascending".into(),
                    });
                }
                prev.checked_add(d).ok_or_else(|| self.err("list entry overflows"))?
            };
            out.push(x);
            prev = x;
        }
        Ok(out)
    }

    fn section_end(&mut self) -> Result<u64> {
        let len = self.u64()?;
        Ok(self.offset.saturating_add(len))
    }

    fn expect_at(&self, end: u64, what: &str) -> Result<()> {
        if self.offset != end {
            return Err(self.err(format!("{what} section length disagrees with its contents")));
        }
        Ok(())
    }
}

/// Index contents plus the identity of the network it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedIndex {
    pub fingerprint: Fingerprint,
    pub tuc: TucList,
    pub tie: TieTree,
}

/// Reads an index; with `expected`, refuses files built for another network.
pub fn read_index<R: Read>(input: R, expected: Option<&Fingerprint>) -> Result<LoadedIndex> {
    let mut r = Reader {
        inner: input,
        offset: 0,
    };
    let magic: [u8; 8] = r.bytes()?;
    if &magic != MAGIC {
        if magic.starts_with(MAGIC_STEM) {
            return Err(Error::IndexMismatch(format!(
                "format version {:?}, this build reads {:?}",
                String::from_utf8_lossy(&magic[6..]).trim_end_matches('\0'),
                "1"
            )));
        }
        return Err(Error::IndexFormat {
            offset: 0,
            msg: "not an index file (bad magic)".into(),
        });
    }
    let fingerprint = Fingerprint {
        vertices: r.u64()?,
        edges: r.u64()?,
        hash: r.u64()?,
    };
    if let Some(want) = expected {
        if *want != fingerprint {
            return Err(Error::IndexMismatch(format!(
                "graph fingerprint: index has {} vertices, {} edges, hash {:016x}; \
                 graph has {} vertices, {} edges, hash {:016x}",
                fingerprint.vertices,
                fingerprint.edges,
                fingerprint.hash,
                want.vertices,
                want.edges,
                want.hash
            )));
        }
    }
    let at = r.offset;
    let normalization = Normalization::from_code(r.u64()?).ok_or(Error::IndexFormat {
        offset: at,
        msg: "unknown normalization code".into(),
    })?;
    let alpha = r.f64()?;
    let epsilon = r.f64()?;
    let delta = r.f64()?;
    let seed = r.u64()?;
    let at = r.offset;
    let params = SampleParams::new(epsilon, delta, alpha, seed).map_err(|e| Error::IndexFormat {
        offset: at,
        msg: e.to_string(),
    })?;
    let h = r.u64()? as usize;
    let leaf_capacity = r.u64()? as usize;

    let end = r.section_end()?;
    let k_max = r.u64()? as usize;
    let l_max = r.u64()? as usize;
    let cell_count = k_max
        .checked_mul(l_max)
        .filter(|c| (*c as u64).saturating_mul(8) <= end.saturating_sub(r.offset))
        .ok_or_else(|| r.err("cell grid overruns its section"))?;
    let mut cells = Vec::with_capacity(cell_count);
    for _ in 0..cell_count {
        let keys_len = r.count(16, end)?;
        let mut keys = Vec::with_capacity(keys_len);
        let mut groups = Vec::with_capacity(keys_len);
        for _ in 0..keys_len {
            keys.push(r.f64()?);
            let group = r.ascending(end)?;
            groups.push(group.into_iter().map(|v| v as VertexId).collect());
        }
        cells.push(TucCell::from_parts(keys, groups));
    }
    r.expect_at(end, "TUC")?;
    let tuc = TucList::from_parts(k_max, l_max, cells);

    let end = r.section_end()?;
    let dim = r.count(8, end)?;
    let at = r.offset;
    let gamma_count = r.count(8 * dim as u64, end)?;
    if gamma_count != h || h == 0 {
        return Err(Error::IndexFormat {
            offset: at,
            msg: format!("{gamma_count} topic vectors, header says {h}"),
        });
    }
    let mut gammas = Vec::with_capacity(h);
    for _ in 0..h {
        let at = r.offset;
        let v = (0..dim).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        gammas.push(TopicVector::raw(v).map_err(|e| Error::IndexFormat {
            offset: at,
            msg: e.to_string(),
        })?);
    }
    let node_count = r.count(8, end)?;
    let mut nodes = Vec::with_capacity(node_count);
    for _ in 0..node_count {
        let at = r.offset;
        let members: Vec<usize> = r.ascending(end)?.into_iter().map(|i| i as usize).collect();
        if members.is_empty() || members.iter().any(|&i| i >= h) {
            return Err(Error::IndexFormat {
                offset: at,
                msg: "node members out of range".into(),
            });
        }
        let axis = (0..dim).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let aperture = r.f64()?;
        let at = r.offset;
        let children = match r.u64()? {
            0 => TieChildren::Leaf,
            1 => {
                let left = r.u64()? as usize;
                let right = r.u64()? as usize;
                if left >= node_count || right >= node_count {
                    return Err(Error::IndexFormat {
                        offset: at,
                        msg: "child index out of range".into(),
                    });
                }
                TieChildren::Internal { left, right }
            }
            tag => {
                return Err(Error::IndexFormat {
                    offset: at,
                    msg: format!("unknown node tag {tag}"),
                })
            }
        };
        nodes.push(TieNode {
            members,
            axis,
            aperture,
            children,
        });
    }
    let table_len = r.u64()? as usize;
    let samples = r.u64()? as usize;
    let at = r.offset;
    if (h as u64)
        .saturating_mul(table_len as u64)
        .saturating_mul(8)
        != end.saturating_sub(r.offset)
    {
        return Err(Error::IndexFormat {
            offset: at,
            msg: "influence tables do not fill the TIE section".into(),
        });
    }
    let mut tables = Vec::with_capacity(h);
    let mut chunk = vec![0u8; table_len * 8];
    for g in &gammas {
        match r.inner.read_exact(&mut chunk) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => {
                return Err(r.err("unexpected end of file"));
            }
            Err(e) => return Err(e.into()),
        }
        r.offset += chunk.len() as u64;
        let values = chunk
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect();
        tables.push(InfluenceTable::from_parts(values, samples, Some(g.clone())));
    }
    r.expect_at(end, "TIE")?;
    let mut probe = [0u8; 1];
    if r.inner.read(&mut probe)? != 0 {
        return Err(r.err("trailing bytes after TIE section"));
    }

    let settings = TieSettings {
        leaf_capacity,
        normalization,
        params,
    };
    let tie = TieTree::from_parts(settings, gammas, nodes, tables).map_err(|e| Error::IndexFormat {
        offset: r.offset,
        msg: e.to_string(),
    })?;
    Ok(LoadedIndex {
        fingerprint,
        tuc,
        tie,
    })
}

/// Loads an index built for the network with fingerprint `expected`.
pub fn load_index(path: impl AsRef<Path>, expected: &Fingerprint) -> Result<(TucList, TieTree)> {
    let file = File::open(path)?;
    let loaded = read_index(BufReader::new(file), Some(expected))?;
    Ok((loaded.tuc, loaded.tie))
}

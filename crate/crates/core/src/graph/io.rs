//! SNAP-style edge-list ingestion and the binary graph cache.
//!
//! Cache layout (all integers little-endian):
//!
//! ```text
//! magic    4 bytes  "PRVG"
//! version  u32      1
//! n        u32      node count
//! m        u64      undirected edge count
//! offsets  (n+1) x u64   CSR row starts
//! adj      2m x u32      sorted neighbor ids
//! labels   n x i64       raw label of each dense id, ascending
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::Path;

use super::{Graph, NodeId};
use crate::error::{Error, Result};

pub const CACHE_MAGIC: [u8; 4] = *b"PRVG";
pub const CACHE_VERSION: u32 = 1;

/// Parses a directed edge list and folds it into an undirected simple graph.
///
/// Lines starting with `#` and blank lines are skipped. Every other line must hold
/// exactly two integer labels separated by whitespace. Labels are remapped to dense
/// ids in ascending label order.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Graph> {
    let mut pairs: Vec<(i64, i64)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut next = |what: &str| -> Result<i64> {
            let tok = tokens.next().ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("expected two labels, missing {what}"),
            })?;
            tok.parse::<i64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("{what} label {tok:?} is not an integer"),
            })
        };
        let a = next("source")?;
        let b = next("target")?;
        if tokens.next().is_some() {
            return Err(Error::Parse { line: lineno, message: "expected exactly two labels".into() });
        }
        pairs.push((a, b));
    }

    let mut labels: Vec<i64> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    labels.sort_unstable();
    labels.dedup();
    let index = |raw: i64| labels.binary_search(&raw).expect("label collected above");
    let edges: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (index(a), index(b))).collect();
    Graph::from_labeled_edges(labels, edges)
}

pub fn write_cache<W: Write>(g: &Graph, mut w: W) -> Result<()> {
    w.write_all(&CACHE_MAGIC)?;
    w.write_all(&CACHE_VERSION.to_le_bytes())?;
    w.write_all(&(g.n() as u32).to_le_bytes())?;
    w.write_all(&(g.m() as u64).to_le_bytes())?;
    for &off in &g.offsets {
        w.write_all(&(off as u64).to_le_bytes())?;
    }
    for &v in &g.neighbors {
        w.write_all(&v.0.to_le_bytes())?;
    }
    for &label in &g.labels {
        w.write_all(&label.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| Error::Cache(format!("truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(bytes.try_into().unwrap())
    }

    fn u32(&mut self) -> Result<u32> {
        self.take::<4>().map(u32::from_le_bytes)
    }

    fn u64(&mut self) -> Result<u64> {
        self.take::<8>().map(u64::from_le_bytes)
    }

    fn i64(&mut self) -> Result<i64> {
        self.take::<8>().map(i64::from_le_bytes)
    }
}

pub fn read_cache<R: Read>(mut r: R) -> Result<Graph> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    let mut c = Cursor { buf: &buf, pos: 0 };
    if c.take::<4>()? != CACHE_MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = c.u32()?;
    if version != CACHE_VERSION {
        return Err(Error::Cache(format!("unsupported version {version}")));
    }
    let n = c.u32()? as usize;
    let m = c.u64()? as usize;
    let expected = 4 + 4 + 4 + 8 + 8 * (n + 1) + 4 * 2 * m + 8 * n;
    if buf.len() != expected {
        return Err(Error::Cache(format!("expected {expected} bytes, found {}", buf.len())));
    }
    let offsets = (0..=n).map(|_| c.u64().map(|x| x as usize)).collect::<Result<Vec<_>>>()?;
    let neighbors = (0..2 * m).map(|_| c.u32().map(NodeId)).collect::<Result<Vec<_>>>()?;
    let labels = (0..n).map(|_| c.i64()).collect::<Result<Vec<_>>>()?;
    Graph::from_csr(offsets, neighbors, labels).map_err(|e| Error::Cache(e.to_string()))
}

/// Loads either a binary cache or an edge-list text file, sniffing the magic bytes.
pub fn load_path(path: &Path) -> Result<Graph> {
    let mut file = File::open(path)?;
    let mut prefix = [0u8; 4];
    let got = file.read(&mut prefix)?;
    file.seek(SeekFrom::Start(0))?;
    if looks_like_cache(&prefix[..got]) {
        read_cache(BufReader::new(file))
    } else {
        load_edge_list(BufReader::new(file))
    }
}

/// True when the bytes start with the cache magic.
pub(crate) fn looks_like_cache(prefix: &[u8]) -> bool {
    prefix.starts_with(&CACHE_MAGIC)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Graph> {
        load_edge_list(s.as_bytes())
    }

    #[test]
    fn empty_stream_is_empty_graph() {
        let g = parse("").unwrap();
        assert_eq!((g.n(), g.m()), (0, 0));
        let g = parse("# only a comment\n\n").unwrap();
        assert_eq!((g.n(), g.m()), (0, 0));
    }

    #[test]
    fn folds_reverse_duplicates_and_drops_self_loops() {
        let g = parse("1 2\n2 1\n1 1\n").unwrap();
        assert_eq!((g.n(), g.m()), (2, 1));
    }

    #[test]
    fn remaps_sparse_labels_in_ascending_order() {
        let g = parse("# FromNodeId\tToNodeId\n30\t10\n10\t700\n").unwrap();
        assert_eq!(g.labels(), &[10, 30, 700]);
        assert_eq!(g.node_for_label(700).unwrap(), NodeId(2));
        assert!(g.has_edge(NodeId(0), NodeId(1)));
        assert!(matches!(g.node_for_label(5), Err(Error::UnknownLabel(5))));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse("# c\n1 2\n3 x\n") {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("1 2 3\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("1 2\n4\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn cache_rejects_corruption() {
        let g = parse("1 2\n2 3\n").unwrap();
        let mut bytes = Vec::new();
        write_cache(&g, &mut bytes).unwrap();
        assert!(looks_like_cache(&bytes));
        assert_eq!(read_cache(bytes.as_slice()).unwrap(), g);

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(read_cache(bad.as_slice()), Err(Error::Cache(_))));
        let truncated = &bytes[..bytes.len() - 1];
        assert!(matches!(read_cache(truncated), Err(Error::Cache(_))));
        // break symmetry: first neighbor entry of node 0 points at itself
        let mut asym = bytes.clone();
        let adj_start = 4 + 4 + 4 + 8 + 8 * (g.n() + 1);
        asym[adj_start..adj_start + 4].copy_from_slice(&0u32.to_le_bytes());
        assert!(matches!(read_cache(asym.as_slice()), Err(Error::Cache(_))));
    }
}

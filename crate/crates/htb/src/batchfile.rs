//! Binary column file for simulation batches.
//!
//! Layout (all integers and doubles little-endian):
//!
//! ```text
//! magic   4 bytes  "HTB1"
//! n       u64      draws per column
//! d       u32      number of columns (agents in order, then aggregate)
//! seed    u64      master seed the batches were generated from
//! data    d * n    f64 values, column after column
//! ```

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use htb_core::SimBatches;

pub const MAGIC: &[u8; 4] = b"HTB1";

/// Write agent columns (in agent order) followed by the aggregate.
pub fn write_batches(path: &Path, batches: &SimBatches) -> io::Result<()> {
    let n = batches.aggregate.values.len();
    let d = batches.agents.len() + 1;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(n as u64).to_le_bytes())?;
    w.write_all(&(d as u32).to_le_bytes())?;
    w.write_all(&batches.aggregate.meta.seed.to_le_bytes())?;
    for column in batches.agents.iter().chain(std::iter::once(&batches.aggregate)) {
        for &x in &column.values {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()
}

/// A batch file read back: `columns` holds the agent columns followed
/// by the aggregate, exactly as written.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchFile {
    pub n: u64,
    pub seed: u64,
    pub columns: Vec<Vec<f64>>,
}

pub fn read_batches(path: &Path) -> io::Result<BatchFile> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("not a batch file: magic {magic:?}"),
        ));
    }
    let mut b8 = [0u8; 8];
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8);
    r.read_exact(&mut b4)?;
    let d = u32::from_le_bytes(b4);
    r.read_exact(&mut b8)?;
    let seed = u64::from_le_bytes(b8);
    let count = usize::try_from(n).map_err(|_| {
        io::Error::new(io::ErrorKind::InvalidData, "column length exceeds this platform")
    })?;
    let mut columns = Vec::with_capacity(d as usize);
    let mut buf = vec![0u8; count.saturating_mul(8)];
    for _ in 0..d {
        r.read_exact(&mut buf)?;
        columns.push(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect());
    }
    // Trailing garbage means the header lied about the shape.
    let mut probe = [0u8; 1];
    match r.read(&mut probe)? {
        0 => Ok(BatchFile { n, seed, columns }),
        _ => Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "trailing bytes after the declared columns",
        )),
    }
}

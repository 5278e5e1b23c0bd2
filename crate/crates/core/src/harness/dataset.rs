//! "FAMA-TX v1" tensor-exchange files.
//!
//! Layout, all multi-byte fields little-endian:
//!
//! ```text
//! magic       4 bytes   "FAMA"
//! version     u8        1
//! num_records u32
//! block_n     u32
//! users       u32
//! ports_used  u32
//! aperture    f32
//! snr_db      f32
//! payload     num_records × [clean: block_n × (re f32, im f32)]
//!                           [received: block_n × (re f32, im f32)]
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::{Complex32, Complex64};
use rayon::prelude::*;

use crate::channel::{build_correlation, sample_drop_with};
use crate::error::{FamaError, Result};
use crate::harness::experiment::{ExperimentConfig, TAGGED_USER};
use crate::phy::SymbolBlock;
use crate::schemes::run_symbol;
use crate::stream::{substream, SYMBOL_LANE};

pub const MAGIC: [u8; 4] = *b"FAMA";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 4 + 1 + 4 * 4 + 2 * 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetHeader {
    pub num_records: u32,
    pub block_n: u32,
    pub users: u32,
    pub ports_used: u32,
    pub aperture: f32,
    pub snr_db: f32,
}

impl DatasetHeader {
    /// Total file size implied by the header.
    pub fn file_len(&self) -> u64 {
        HEADER_LEN as u64 + u64::from(self.num_records) * 2 * 2 * u64::from(self.block_n) * 4
    }
}

/// One block: what the tagged user's antenna sent, and the combiner
/// output the receiver produced for it.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub clean: Vec<Complex32>,
    pub received: Vec<Complex32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub records: Vec<DatasetRecord>,
}

pub fn write_dataset<W: Write>(mut out: W, data: &Dataset) -> Result<()> {
    let h = &data.header;
    if data.records.len() != h.num_records as usize {
        return Err(FamaError::Dataset(format!(
            "header says {} records, have {}",
            h.num_records,
            data.records.len()
        )));
    }
    out.write_all(&MAGIC)?;
    out.write_all(&[VERSION])?;
    for v in [h.num_records, h.block_n, h.users, h.ports_used] {
        out.write_all(&v.to_le_bytes())?;
    }
    out.write_all(&h.aperture.to_le_bytes())?;
    out.write_all(&h.snr_db.to_le_bytes())?;
    for rec in &data.records {
        for block in [&rec.clean, &rec.received] {
            if block.len() != h.block_n as usize {
                return Err(FamaError::Dataset(format!(
                    "block of {} samples, header says {}",
                    block.len(),
                    h.block_n
                )));
            }
            for z in block {
                out.write_all(&z.re.to_le_bytes())?;
                out.write_all(&z.im.to_le_bytes())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

pub fn read_dataset<R: Read>(mut input: R) -> Result<Dataset> {
    let magic: [u8; 4] = read_array(&mut input)?;
    if magic != MAGIC {
        return Err(FamaError::Dataset(format!("bad magic {magic:?}")));
    }
    let [version] = read_array::<1, _>(&mut input)?;
    if version != VERSION {
        return Err(FamaError::Dataset(format!("unsupported version {version}")));
    }
    let mut u = || -> Result<u32> { Ok(u32::from_le_bytes(read_array(&mut input)?)) };
    let (num_records, block_n, users, ports_used) = (u()?, u()?, u()?, u()?);
    let aperture = f32::from_le_bytes(read_array(&mut input)?);
    let snr_db = f32::from_le_bytes(read_array(&mut input)?);
    let header = DatasetHeader {
        num_records,
        block_n,
        users,
        ports_used,
        aperture,
        snr_db,
    };
    let n = block_n as usize;
    let block = |input: &mut R| -> Result<Vec<Complex32>> {
        let mut raw = vec![0u8; n * 8];
        input.read_exact(&mut raw)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| {
                Complex32::new(
                    f32::from_le_bytes(c[..4].try_into().unwrap()),
                    f32::from_le_bytes(c[4..].try_into().unwrap()),
                )
            })
            .collect())
    };
    let mut records = Vec::with_capacity(num_records as usize);
    for _ in 0..num_records {
        let clean = block(&mut input)?;
        let received = block(&mut input)?;
        records.push(DatasetRecord { clean, received });
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(FamaError::Dataset("trailing bytes after payload".into()));
    }
    Ok(Dataset { header, records })
}

fn to_c32(z: Complex64) -> Complex32 {
    Complex32::new(z.re as f32, z.im as f32)
}

/// Simulates `num_records` blocks under `config` and returns them.
///
/// Record `i` is one block-fading drop keyed as trial `i` of `config.seed`,
/// carrying `config.block_n()` symbols of the tagged user and the scheme's
/// combiner output for each.
pub fn simulate_dataset(config: &ExperimentConfig, num_records: u32) -> Result<Dataset> {
    config.validate()?;
    let model = build_correlation(config.geometry()?)?;
    let geometry = model.geometry();
    let scheme = config.receiver();
    let noise_power = config.noise_power();
    let n = config.block_n();
    let records = (0..u64::from(num_records))
        .into_par_iter()
        .map(|trial| -> Result<DatasetRecord> {
            let drop = sample_drop_with(&model, config.users, TAGGED_USER, config.powers, |tx| {
                substream(config.seed, trial, tx as u32)
            })?;
            let mut rng = substream(config.seed, trial, SYMBOL_LANE);
            let mut clean = Vec::with_capacity(n);
            let mut received = Vec::with_capacity(n);
            for _ in 0..n {
                let block = SymbolBlock::random(config.users, config.symbol_power, &mut rng);
                let out = run_symbol(&scheme, &drop, &block, noise_power, &geometry, &mut rng)?;
                clean.push(to_c32(block.symbols[TAGGED_USER]));
                received.push(to_c32(out.combined));
            }
            Ok(DatasetRecord { clean, received })
        })
        .collect::<Result<Vec<_>>>()?;
    let header = DatasetHeader {
        num_records,
        block_n: n as u32,
        users: config.users as u32,
        ports_used: config.ports_used() as u32,
        aperture: config.aperture as f32,
        snr_db: config.snr_db as f32,
    };
    Ok(Dataset { header, records })
}

/// Simulates a dataset and writes it to `path`.
pub fn export_dataset<P: AsRef<Path>>(
    config: &ExperimentConfig,
    num_records: u32,
    path: P,
) -> Result<DatasetHeader> {
    let data = simulate_dataset(config, num_records)?;
    write_dataset(BufWriter::new(File::create(path)?), &data)?;
    Ok(data.header)
}

pub fn load_dataset<P: AsRef<Path>>(path: P) -> Result<Dataset> {
    read_dataset(BufReader::new(File::open(path)?))
}

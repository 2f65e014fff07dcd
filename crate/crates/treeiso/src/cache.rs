//! On-disk cache of enumeration records.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! header  magic    8 bytes  "TREEISO\0"
//!         version  u16      1
//!         n        u32
//!         kind     u8       0 finite, 1 plane, 2 labeled
//!         |D|      u32      then |D| x u32 degrees (finite only)
//!         whash    u64      first 8 bytes of SHA-256 of the model signature
//! body    count    u64      then `count` records:
//!         code     u32 length + bytes
//!         aut      u32 length + unsigned bytes
//!         pr       u32 length + unsigned bytes
//!         w_num    u32 length + two's-complement bytes
//!         w_den    u32 length + two's-complement bytes
//!         profile  u32 entries, then (u32 degree, u32 count) pairs
//! ```

use std::collections::BTreeMap;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use sha2::{Digest, Sha256};
use treeiso_core::enumerate::PolyaRecord;
use treeiso_core::model::{DegreeModel, UnboundedWeights};
use treeiso_core::tree::CanonicalCode;

pub const MAGIC: &[u8; 8] = b"TREEISO\0";
pub const VERSION: u16 = 1;

/// Identifies a cache file's contents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Header {
    pub n: u32,
    pub kind: u8,
    pub degrees: Vec<u32>,
    pub weight_hash: u64,
}

impl Header {
    pub fn for_model(n: usize, model: &DegreeModel) -> Self {
        let (kind, degrees) = match model {
            DegreeModel::Finite { degrees, .. } => (0, degrees.iter().map(|&d| d as u32).collect()),
            DegreeModel::Unbounded(UnboundedWeights::Ones) => (1, Vec::new()),
            DegreeModel::Unbounded(UnboundedWeights::InvFactorial) => (2, Vec::new()),
        };
        Header { n: n as u32, kind, degrees, weight_hash: weight_hash(model) }
    }

    fn write(&self, w: &mut dyn Write) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&self.n.to_le_bytes())?;
        w.write_all(&[self.kind])?;
        w.write_all(&(self.degrees.len() as u32).to_le_bytes())?;
        for d in &self.degrees {
            w.write_all(&d.to_le_bytes())?;
        }
        w.write_all(&self.weight_hash.to_le_bytes())
    }

    fn read(r: &mut dyn Read) -> io::Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(invalid("bad magic"));
        }
        let version = u16::from_le_bytes(take(r)?);
        if version != VERSION {
            return Err(invalid(&format!("unsupported version {version}")));
        }
        let n = u32::from_le_bytes(take(r)?);
        let [kind] = take::<1>(r)?;
        let k = u32::from_le_bytes(take(r)?);
        let degrees = (0..k).map(|_| Ok(u32::from_le_bytes(take(r)?))).collect::<io::Result<_>>()?;
        let weight_hash = u64::from_le_bytes(take(r)?);
        Ok(Header { n, kind, degrees, weight_hash })
    }
}

pub fn weight_hash(model: &DegreeModel) -> u64 {
    let d = Sha256::digest(model.signature().as_bytes());
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}

/// `n{n}-{hash}.tcache` inside `dir`.
pub fn cache_path(dir: &Path, n: usize, model: &DegreeModel) -> PathBuf {
    dir.join(format!("n{n}-{:016x}.tcache", weight_hash(model)))
}

fn invalid(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
}

fn take<const K: usize>(r: &mut dyn Read) -> io::Result<[u8; K]> {
    let mut b = [0u8; K];
    r.read_exact(&mut b)?;
    Ok(b)
}

fn put_bytes(w: &mut dyn Write, b: &[u8]) -> io::Result<()> {
    w.write_all(&(b.len() as u32).to_le_bytes())?;
    w.write_all(b)
}

fn get_bytes(r: &mut dyn Read) -> io::Result<Vec<u8>> {
    let len = u32::from_le_bytes(take(r)?) as usize;
    let mut b = vec![0u8; len];
    r.read_exact(&mut b)?;
    Ok(b)
}

pub fn write_records(w: &mut dyn Write, n: usize, model: &DegreeModel, records: &[PolyaRecord]) -> io::Result<()> {
    Header::for_model(n, model).write(w)?;
    w.write_all(&(records.len() as u64).to_le_bytes())?;
    for rec in records {
        put_bytes(w, rec.code.as_bytes())?;
        put_bytes(w, &rec.aut.to_bytes_le())?;
        put_bytes(w, &rec.pr.to_bytes_le())?;
        put_bytes(w, &rec.weight.numer().to_signed_bytes_le())?;
        put_bytes(w, &rec.weight.denom().to_signed_bytes_le())?;
        w.write_all(&(rec.degree_profile.len() as u32).to_le_bytes())?;
        for (&d, &c) in &rec.degree_profile {
            w.write_all(&(d as u32).to_le_bytes())?;
            w.write_all(&(c as u32).to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads records, rejecting files written for another size or model.
pub fn read_records(r: &mut dyn Read, n: usize, model: &DegreeModel) -> io::Result<Vec<PolyaRecord>> {
    let header = Header::read(r)?;
    if header != Header::for_model(n, model) {
        return Err(invalid("cache header does not match the requested size and model"));
    }
    let count = u64::from_le_bytes(take(r)?);
    let mut out = Vec::with_capacity(count.min(1 << 24) as usize);
    for _ in 0..count {
        let code = CanonicalCode(get_bytes(r)?);
        let aut = BigUint::from_bytes_le(&get_bytes(r)?);
        let pr = BigUint::from_bytes_le(&get_bytes(r)?);
        let num = BigInt::from_signed_bytes_le(&get_bytes(r)?);
        let den = BigInt::from_signed_bytes_le(&get_bytes(r)?);
        if den == BigInt::from(0) {
            return Err(invalid("zero weight denominator"));
        }
        let k = u32::from_le_bytes(take(r)?);
        let mut degree_profile = BTreeMap::new();
        for _ in 0..k {
            let d = u32::from_le_bytes(take(r)?) as usize;
            let c = u32::from_le_bytes(take(r)?) as usize;
            degree_profile.insert(d, c);
        }
        out.push(PolyaRecord { code, n, aut, pr, weight: BigRational::new(num, den), degree_profile });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use treeiso_core::enumerate::{polya_records, Ceilings};

    #[test]
    fn round_trip() {
        let m = DegreeModel::finite(&[0, 1, 2], &[BigRational::new(1.into(), 2.into()), BigRational::from_integer(1.into()), BigRational::from_integer(3.into())]).unwrap();
        let recs = polya_records(7, &m, &Ceilings::default()).unwrap();
        let mut buf = Vec::new();
        write_records(&mut buf, 7, &m, &recs).unwrap();
        assert_eq!(&buf[..8], MAGIC);
        let back = read_records(&mut buf.as_slice(), 7, &m).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn header_mismatch_is_rejected() {
        let m = DegreeModel::unary_binary();
        let recs = polya_records(5, &m, &Ceilings::default()).unwrap();
        let mut buf = Vec::new();
        write_records(&mut buf, 5, &m, &recs).unwrap();
        assert!(read_records(&mut buf.as_slice(), 6, &m).is_err());
        assert!(read_records(&mut buf.as_slice(), 5, &DegreeModel::binary121()).is_err());
        buf[0] = b'X';
        assert!(read_records(&mut buf.as_slice(), 5, &m).is_err());
    }

    #[test]
    fn truncated_file_is_an_error() {
        let m = DegreeModel::labeled();
        let recs = polya_records(4, &m, &Ceilings::default()).unwrap();
        let mut buf = Vec::new();
        write_records(&mut buf, 4, &m, &recs).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_records(&mut buf.as_slice(), 4, &m).is_err());
    }
}

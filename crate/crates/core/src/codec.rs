//! Binary persistence for [`HashMap`].
//!
//! All integers are little-endian. Layout, in order:
//!
//! | field          | type                      |
//! |----------------|---------------------------|
//! | magic          | `b"FKSM"`                 |
//! | version        | `u16` (currently 1)       |
//! | key kind       | `u8` (1 = u64, 2 = bytes) |
//! | value kind     | `u8` (1 = u32, 2 = u64, 3 = i64) |
//! | seed           | `u64`                     |
//! | n              | `u64`                     |
//! | total_slots    | `u64`                     |
//! | m              | `u64`                     |
//! | level-one      | `m × u64`                 |
//! | bucket consts  | `n × m × u64`             |
//! | shape          | `n × u64`                 |
//! | slots          | `total_slots × i64`       |
//! | context length | `u64`, then the bytes     |
//! | keys           | `n ×` key encoding        |
//! | values         | `n ×` value encoding      |
//!
//! Byte contexts store their bytes; the unit context stores length 0. A u64
//! key is 8 bytes, a slice key is its offset then its length as two `u64`.

use std::borrow::Borrow;
use std::io::{Read, Write};

use thiserror::Error;

use crate::fks::Construction;
use crate::hashes::{Seed, UniversalConsts};
use crate::hashmap::{Ctx, HashMap, EMPTY_SLOT};
use crate::keys::{KeySpec, Slice, SliceKeys, U64Keys};

pub const MAGIC: [u8; 4] = *b"FKSM";
pub const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not a map file")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("{what} kind mismatch: file has {found}, expected {expected}")]
    KindMismatch {
        what: &'static str,
        expected: u8,
        found: u8,
    },
    #[error("unexpected end of data")]
    Truncated,
    #[error("{0} trailing bytes after map data")]
    TrailingBytes(usize),
    #[error("invalid map data: {0}")]
    Invalid(&'static str),
}

pub struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf }
    }

    pub fn bytes(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if n > self.buf.len() {
            return Err(CodecError::Truncated);
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], CodecError> {
        Ok(self.bytes(N)?.try_into().expect("length checked"))
    }

    pub fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.array::<1>()?[0])
    }

    pub fn u16(&mut self) -> Result<u16, CodecError> {
        Ok(u16::from_le_bytes(self.array()?))
    }

    pub fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    pub fn u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    pub fn i64(&mut self) -> Result<i64, CodecError> {
        Ok(i64::from_le_bytes(self.array()?))
    }

    /// Reads a count and makes sure `count * width` bytes are still there,
    /// so corrupt headers cannot trigger huge allocations.
    fn count(&mut self, width: usize) -> Result<usize, CodecError> {
        let c = self.u64()?;
        self.expect_room(c, width)?;
        Ok(c as usize)
    }

    fn expect_room(&self, count: u64, width: usize) -> Result<(), CodecError> {
        match count.checked_mul(width as u64) {
            Some(b) if b <= self.buf.len() as u64 => Ok(()),
            _ => Err(CodecError::Truncated),
        }
    }

    pub fn remaining(&self) -> usize {
        self.buf.len()
    }
}

/// Key types that can be persisted.
pub trait KeyCodec: KeySpec {
    const KIND: u8;
    fn write_ctx(ctx: &Self::Ctx, out: &mut Vec<u8>);
    fn read_ctx(r: &mut Reader<'_>) -> Result<Ctx<Self>, CodecError>;
    fn write_key(key: &Self::Key, out: &mut Vec<u8>);
    fn read_key(r: &mut Reader<'_>) -> Result<Self::Key, CodecError>;
}

impl KeyCodec for U64Keys {
    const KIND: u8 = 1;

    fn write_ctx(_: &(), out: &mut Vec<u8>) {
        out.extend_from_slice(&0u64.to_le_bytes());
    }

    fn read_ctx(r: &mut Reader<'_>) -> Result<(), CodecError> {
        match r.u64()? {
            0 => Ok(()),
            _ => Err(CodecError::Invalid("integer maps carry no context")),
        }
    }

    fn write_key(key: &u64, out: &mut Vec<u8>) {
        out.extend_from_slice(&key.to_le_bytes());
    }

    fn read_key(r: &mut Reader<'_>) -> Result<u64, CodecError> {
        r.u64()
    }
}

impl<E> KeyCodec for SliceKeys<E>
where
    E: KeySpec<Ctx = (), Key = u8>,
{
    const KIND: u8 = 2;

    fn write_ctx(ctx: &[u8], out: &mut Vec<u8>) {
        out.extend_from_slice(&(ctx.len() as u64).to_le_bytes());
        out.extend_from_slice(ctx);
    }

    fn read_ctx(r: &mut Reader<'_>) -> Result<Vec<u8>, CodecError> {
        let len = r.count(1)?;
        Ok(r.bytes(len)?.to_vec())
    }

    fn write_key(key: &Slice, out: &mut Vec<u8>) {
        out.extend_from_slice(&(key.offset as u64).to_le_bytes());
        out.extend_from_slice(&(key.length as u64).to_le_bytes());
    }

    fn read_key(r: &mut Reader<'_>) -> Result<Slice, CodecError> {
        let offset = r.u64()?;
        let length = r.u64()?;
        Ok(Slice::new(offset as usize, length as usize))
    }
}

/// Value types that can be persisted, all fixed width.
pub trait ValueCodec: Sized {
    const KIND: u8;
    const WIDTH: usize;
    fn write(&self, out: &mut Vec<u8>);
    fn read(r: &mut Reader<'_>) -> Result<Self, CodecError>;
}

impl ValueCodec for u32 {
    const KIND: u8 = 1;
    const WIDTH: usize = 4;
    fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        r.u32()
    }
}

impl ValueCodec for u64 {
    const KIND: u8 = 2;
    const WIDTH: usize = 8;
    fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        r.u64()
    }
}

impl ValueCodec for i64 {
    const KIND: u8 = 3;
    const WIDTH: usize = 8;
    fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        r.i64()
    }
}

/// The fixed-size prefix of a map file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MapHeader {
    pub version: u16,
    pub key_kind: u8,
    pub value_kind: u8,
    pub seed: Seed,
    pub n: u64,
    pub total_slots: u64,
    pub m: u64,
}

impl MapHeader {
    pub fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        if r.bytes(4)? != MAGIC {
            return Err(CodecError::BadMagic);
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(CodecError::UnsupportedVersion(version));
        }
        Ok(MapHeader {
            version,
            key_kind: r.u8()?,
            value_kind: r.u8()?,
            seed: Seed(r.u64()?),
            n: r.u64()?,
            total_slots: r.u64()?,
            m: r.u64()?,
        })
    }

    /// Reads just the header of a serialized map.
    pub fn peek(bytes: &[u8]) -> Result<Self, CodecError> {
        Self::read(&mut Reader::new(bytes))
    }
}

fn read_consts(r: &mut Reader<'_>, m: usize) -> Result<UniversalConsts, CodecError> {
    let mut vals = [0u64; crate::hashes::MAX_CONSTS];
    for v in vals.iter_mut().take(m) {
        *v = r.u64()?;
    }
    UniversalConsts::new(&vals[..m]).map_err(|_| CodecError::Invalid("hash constant out of range"))
}

impl<K: KeyCodec, V: ValueCodec> HashMap<K, V> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let con = self.construction();
        let n = self.len();
        let m = K::M;
        let mut out = Vec::with_capacity(48 + 8 * (m * (n + 1) + n + self.slots().len()) + n * (16 + V::WIDTH));
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(K::KIND);
        out.push(V::KIND);
        for x in [self.seed().0, n as u64, con.total_slots() as u64, m as u64] {
            out.extend_from_slice(&x.to_le_bytes());
        }
        for c in std::iter::once(con.level1()).chain(&con.bucket_consts()) {
            for v in c.as_slice() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        for s in con.shape() {
            out.extend_from_slice(&(s as u64).to_le_bytes());
        }
        for &s in self.slots() {
            out.extend_from_slice(&s.to_le_bytes());
        }
        K::write_ctx(self.ctx(), &mut out);
        for k in self.keys() {
            K::write_key(k, &mut out);
        }
        for v in self.values() {
            v.write(&mut out);
        }
        out
    }

    pub fn save<W: Write>(&self, mut w: W) -> Result<(), CodecError> {
        w.write_all(&self.to_bytes())?;
        w.flush()?;
        Ok(())
    }

    /// Decodes and validates a serialized map: the slot table must agree
    /// with the stored construction for every key.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        let h = MapHeader::read(&mut r)?;
        if h.key_kind != K::KIND {
            return Err(CodecError::KindMismatch {
                what: "key",
                expected: K::KIND,
                found: h.key_kind,
            });
        }
        if h.value_kind != V::KIND {
            return Err(CodecError::KindMismatch {
                what: "value",
                expected: V::KIND,
                found: h.value_kind,
            });
        }
        if h.m != K::M as u64 {
            return Err(CodecError::Invalid("constant count does not match key type"));
        }
        if h.n == 0 {
            return Err(CodecError::Invalid("empty map"));
        }
        let m = K::M;
        r.expect_room(h.n.saturating_add(1), 8 * m)?;
        let n = h.n as usize;

        let level1 = read_consts(&mut r, m)?;
        let bucket_consts = (0..n).map(|_| read_consts(&mut r, m)).collect::<Result<Vec<_>, _>>()?;
        r.expect_room(h.n, 8)?;
        let shape = (0..n)
            .map(|_| {
                let s = r.u64()?;
                i64::try_from(s).map_err(|_| CodecError::Invalid("bucket size out of range"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if shape.iter().sum::<i64>() != n as i64 {
            return Err(CodecError::Invalid("bucket sizes do not add up to n"));
        }
        let con = Construction::from_parts(level1, bucket_consts, shape)
            .map_err(|_| CodecError::Invalid("inconsistent construction"))?;
        if con.total_slots() as u64 != h.total_slots {
            return Err(CodecError::Invalid("slot count disagrees with bucket sizes"));
        }

        r.expect_room(h.total_slots, 8)?;
        let slots = (0..h.total_slots).map(|_| r.i64()).collect::<Result<Vec<_>, _>>()?;
        let ctx = K::read_ctx(&mut r)?;
        let keys = (0..n).map(|_| K::read_key(&mut r)).collect::<Result<Vec<_>, _>>()?;
        r.expect_room(h.n, V::WIDTH)?;
        let vals = (0..n).map(|_| V::read(&mut r)).collect::<Result<Vec<_>, _>>()?;
        if r.remaining() != 0 {
            return Err(CodecError::TrailingBytes(r.remaining()));
        }

        let mut occupied = 0usize;
        for &s in &slots {
            if s != EMPTY_SLOT {
                if s < 0 || s as usize >= n {
                    return Err(CodecError::Invalid("slot refers past the key array"));
                }
                occupied += 1;
            }
        }
        if occupied != n {
            return Err(CodecError::Invalid("slot table does not hold every key exactly once"));
        }
        for (j, k) in keys.iter().enumerate() {
            K::check(ctx.borrow(), k).map_err(|_| CodecError::Invalid("key outside its context"))?;
            match con.perfect_hash::<K>(ctx.borrow(), k) {
                Some(slot) if slots[slot] == j as i64 => {}
                _ => return Err(CodecError::Invalid("slot table disagrees with the hash function")),
            }
        }
        Ok(HashMap::from_raw_parts(ctx, keys, vals, slots, con, h.seed))
    }

    pub fn load<R: Read>(mut r: R) -> Result<Self, CodecError> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }
}

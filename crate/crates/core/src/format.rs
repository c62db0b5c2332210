//! Byte formats for keys, ciphertexts and plaintext framing. All integers
//! are little-endian; see `docs/format.md` for the layouts.

use std::io::{Read, Write};

use sha2::{Digest, Sha256};

use crate::block_code::CodeFamily;
use crate::error::{Error, Result};
use crate::field::{Field, FieldElement, FieldSpec};
use crate::keygen::{Density, PublicKey, SchemeParams, SecretKey};
use crate::laurent::{DeltaProfile, LaurentMatrix, Permutation, PiMatrix, Transform};
use crate::linalg::Matrix;
use crate::poly::PolyVector;

pub const KEY_MAGIC: &[u8; 4] = b"CMCE";
pub const CIPHERTEXT_MAGIC: &[u8; 4] = b"CMCT";
pub const VERSION: u8 = 1;
pub const CIPHERTEXT_HEADER_LEN: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KeyKind {
    Public,
    Secret,
}

impl KeyKind {
    fn tag(self) -> u8 {
        match self {
            KeyKind::Public => 1,
            KeyKind::Secret => 2,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            1 => Ok(KeyKind::Public),
            2 => Ok(KeyKind::Secret),
            _ => Err(Error::Format(format!("unknown key kind {tag}"))),
        }
    }
}

impl std::fmt::Display for KeyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KeyKind::Public => "public",
            KeyKind::Secret => "secret",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyHeader {
    pub kind: KeyKind,
    pub params: SchemeParams,
    pub t: usize,
    /// First 8 bytes of SHA-256 of the key-generation seed; informational.
    pub fingerprint: [u8; 8],
}

impl KeyHeader {
    pub fn encoded_len(&self) -> usize {
        // magic, version, kind, p, m, modulus, family, n k μ ν t, density, fingerprint
        4 + 1 + 1 + 2 + 2 + 2 * self.params.field.modulus().len() + 1 + 10 + 8 + 8
    }
}

pub fn seed_fingerprint(seed: u64) -> [u8; 8] {
    let digest = Sha256::digest(seed.to_le_bytes());
    digest[..8].try_into().expect("8 bytes")
}

struct Writer {
    buf: Vec<u8>,
    element_size: usize,
}

impl Writer {
    fn u8(&mut self, x: u8) {
        self.buf.push(x);
    }

    fn u16(&mut self, x: usize) {
        self.buf.extend_from_slice(&(x as u16).to_le_bytes());
    }

    fn u32(&mut self, x: u32) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }

    fn elem(&mut self, x: FieldElement) {
        push_element(&mut self.buf, x, self.element_size);
    }

    fn matrix(&mut self, m: &Matrix) {
        for &x in m.data() {
            self.elem(x);
        }
    }
}

fn push_element(buf: &mut Vec<u8>, x: FieldElement, element_size: usize) {
    if element_size == 1 {
        buf.push(x.0 as u8);
    } else {
        buf.extend_from_slice(&x.0.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    field: Option<Field>,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Format(format!("file truncated at byte {}", self.buf.len())))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<usize> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")) as usize)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn elem(&mut self) -> Result<FieldElement> {
        let size = self.field.as_ref().expect("field known before elements").spec().element_size();
        let raw = self.take(size)?;
        decode_element(raw, self.field.as_ref().expect("field known before elements"))
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<Matrix> {
        let data = (0..rows * cols).map(|_| self.elem()).collect::<Result<Vec<_>>>()?;
        Matrix::from_vec(rows, cols, data)
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Format(format!("{} trailing bytes", self.buf.len() - self.pos)));
        }
        Ok(())
    }
}

fn decode_element(raw: &[u8], f: &Field) -> Result<FieldElement> {
    let v = match raw {
        [b] => *b as u16,
        [lo, hi] => u16::from_le_bytes([*lo, *hi]),
        _ => unreachable!("element size is 1 or 2"),
    };
    if v as u32 >= f.order() {
        return Err(Error::Format(format!("element {v} outside F_{}", f.order())));
    }
    Ok(FieldElement(v))
}

fn write_header(h: &KeyHeader) -> Writer {
    let p = &h.params;
    let mut w = Writer { buf: Vec::new(), element_size: p.field.element_size() };
    w.buf.extend_from_slice(KEY_MAGIC);
    w.u8(VERSION);
    w.u8(h.kind.tag());
    w.u16(p.field.characteristic() as usize);
    w.u16(p.field.degree() as usize);
    for &c in p.field.modulus() {
        w.u16(c as usize);
    }
    w.u8(p.family.tag());
    for x in [p.n, p.k, p.mu, p.nu, h.t] {
        w.u16(x);
    }
    w.u32(p.density.num);
    w.u32(p.density.den);
    w.buf.extend_from_slice(&h.fingerprint);
    w
}

fn read_header<'a>(bytes: &'a [u8]) -> Result<(KeyHeader, Reader<'a>)> {
    let mut r = Reader { buf: bytes, pos: 0, field: None };
    if r.take(4)? != KEY_MAGIC {
        return Err(Error::Format("not a key file (bad magic)".into()));
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported key format version {version}")));
    }
    let kind = KeyKind::from_tag(r.u8()?)?;
    let p = r.u16()? as u32;
    let m = r.u16()? as u32;
    let modulus = (0..=m).map(|_| r.u16().map(|c| c as u32)).collect::<Result<Vec<_>>>()?;
    let spec = FieldSpec::new(p, m, modulus).map_err(|e| Error::Format(format!("bad field: {e}")))?;
    let family_tag = r.u8()?;
    let family =
        CodeFamily::from_tag(family_tag).ok_or_else(|| Error::Format(format!("unknown code family {family_tag}")))?;
    let n = r.u16()?;
    let k = r.u16()?;
    let mu = r.u16()?;
    let nu = r.u16()?;
    let t = r.u16()?;
    let density = Density::new(r.u32()?, r.u32()?).map_err(|e| Error::Format(e.to_string()))?;
    let fingerprint: [u8; 8] = r.take(8)?.try_into().expect("8 bytes");
    let params = SchemeParams::new(spec.clone(), family, n, k, mu, nu, density)
        .map_err(|e| Error::Format(format!("bad parameters: {e}")))?;
    r.field = Some(Field::new(spec));
    Ok((KeyHeader { kind, params, t, fingerprint }, r))
}

/// Parses only the header of a key file.
pub fn read_key_header(bytes: &[u8]) -> Result<KeyHeader> {
    read_header(bytes).map(|(h, _)| h)
}

pub fn encode_public_key(pk: &PublicKey, fingerprint: [u8; 8]) -> Vec<u8> {
    let h = KeyHeader { kind: KeyKind::Public, params: pk.params.clone(), t: pk.t, fingerprint };
    let mut w = write_header(&h);
    for c in pk.coeffs() {
        w.matrix(c);
    }
    w.buf
}

pub fn decode_public_key(bytes: &[u8]) -> Result<(PublicKey, [u8; 8])> {
    let (h, mut r) = read_header(bytes)?;
    if h.kind != KeyKind::Public {
        return Err(Error::Format(format!("expected a public key, found a {} key", h.kind)));
    }
    let p = &h.params;
    let coeffs = (0..=p.mu + p.nu).map(|_| r.matrix(p.k, p.n)).collect::<Result<Vec<_>>>()?;
    r.finish()?;
    let pk = PublicKey::new(h.params.clone(), h.t, coeffs)?;
    Ok((pk, h.fingerprint))
}

pub fn encode_secret_key(sk: &SecretKey, fingerprint: [u8; 8]) -> Vec<u8> {
    let h = KeyHeader { kind: KeyKind::Secret, params: sk.params.clone(), t: sk.code().t(), fingerprint };
    let mut w = write_header(&h);
    for c in sk.s_coeffs() {
        w.matrix(&c);
    }
    w.matrix(sk.code().generator());
    let tr = sk.transform();
    for &x in tr.gamma.as_slice() {
        w.u16(x);
    }
    for &d in tr.delta.counts() {
        w.u16(d);
    }
    // Π rows: entries outside the row's own diagonal block
    let block_of = tr.delta.block_of_position();
    let pi = tr.pi.matrix();
    for r in 0..pi.rows() {
        let entries: Vec<(usize, FieldElement)> = (0..pi.cols())
            .filter(|&c| block_of[c] != block_of[r] && !pi[(r, c)].is_zero())
            .map(|c| (c, pi[(r, c)]))
            .collect();
        w.u16(entries.len());
        for (c, x) in entries {
            w.u16(c);
            w.elem(x);
        }
    }
    w.buf
}

pub fn decode_secret_key(bytes: &[u8]) -> Result<(SecretKey, [u8; 8])> {
    let (h, mut r) = read_header(bytes)?;
    if h.kind != KeyKind::Secret {
        return Err(Error::Format(format!("expected a secret key, found a {} key", h.kind)));
    }
    let p = h.params.clone();
    let f = r.field.clone().expect("set by header");
    let s_coeffs = (p.mu..=p.nu).map(|_| r.matrix(p.k, p.k)).collect::<Result<Vec<_>>>()?;
    let g = r.matrix(p.k, p.n)?;
    let code = p.code(&f).map_err(|e| Error::Format(e.to_string()))?;
    if &g != code.generator() {
        return Err(Error::Format("stored generator matrix is not the canonical one for the code".into()));
    }
    if h.t != code.t() {
        return Err(Error::Format(format!("header t = {} but the code corrects {}", h.t, code.t())));
    }
    let gamma = (0..p.n).map(|_| r.u16()).collect::<Result<Vec<_>>>()?;
    let gamma = Permutation::new(gamma).map_err(|e| Error::Format(format!("Γ: {e}")))?;
    let counts = (0..2 * p.mu + 1).map(|_| r.u16()).collect::<Result<Vec<_>>>()?;
    let delta = DeltaProfile::new(p.mu, counts).map_err(|e| Error::Format(format!("Δ: {e}")))?;
    if delta.n() != p.n {
        return Err(Error::Format(format!("Δ covers {} positions, n = {}", delta.n(), p.n)));
    }
    let mut pi = Matrix::identity(p.n);
    for row in 0..p.n {
        let count = r.u16()?;
        for _ in 0..count {
            let c = r.u16()?;
            let x = r.elem()?;
            if c >= p.n || x.is_zero() {
                return Err(Error::Format(format!("bad Π entry ({row}, {c})")));
            }
            pi[(row, c)] = x;
        }
    }
    r.finish()?;
    let pi = PiMatrix::new(&delta, pi, &f).map_err(|e| Error::Format(format!("Π: {e}")))?;
    let transform = Transform::new(pi, delta, gamma).map_err(|e| Error::Format(e.to_string()))?;
    let s = LaurentMatrix::new(&f, p.k, p.k, p.mu as i64, s_coeffs)?;
    let sk = SecretKey::new(p, s, code, transform).map_err(|e| Error::Format(format!("invalid secret key: {e}")))?;
    Ok((sk, h.fingerprint))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CiphertextHeader {
    /// Degree of the message: the ciphertext has `ℓ + μ + ν + 1` frames.
    pub ell: u64,
    pub n: u16,
    pub element_size: u8,
    /// Length of the plaintext in bytes, before padding.
    pub byte_len: u64,
}

impl CiphertextHeader {
    pub fn encode(&self) -> [u8; CIPHERTEXT_HEADER_LEN] {
        let mut out = [0u8; CIPHERTEXT_HEADER_LEN];
        out[..4].copy_from_slice(CIPHERTEXT_MAGIC);
        out[4] = VERSION;
        out[5..13].copy_from_slice(&self.ell.to_le_bytes());
        out[13..15].copy_from_slice(&self.n.to_le_bytes());
        out[15] = self.element_size;
        out[16..24].copy_from_slice(&self.byte_len.to_le_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < CIPHERTEXT_HEADER_LEN {
            return Err(Error::Format("ciphertext header truncated".into()));
        }
        if &bytes[..4] != CIPHERTEXT_MAGIC {
            return Err(Error::Format("not a ciphertext (bad magic)".into()));
        }
        if bytes[4] != VERSION {
            return Err(Error::Format(format!("unsupported ciphertext version {}", bytes[4])));
        }
        let h = CiphertextHeader {
            ell: u64::from_le_bytes(bytes[5..13].try_into().expect("8 bytes")),
            n: u16::from_le_bytes(bytes[13..15].try_into().expect("2 bytes")),
            element_size: bytes[15],
            byte_len: u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes")),
        };
        if !matches!(h.element_size, 1 | 2) {
            return Err(Error::Format(format!("element size {}", h.element_size)));
        }
        Ok(h)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut buf = [0u8; CIPHERTEXT_HEADER_LEN];
        read_full(r, &mut buf)?.then_some(()).ok_or_else(|| Error::Format("ciphertext header truncated".into()))?;
        Self::decode(&buf)
    }

    /// Checks the header against a key: `n`, element size, and that the
    /// plaintext fits in `ℓ + 1` frames.
    pub fn check(&self, params: &SchemeParams) -> Result<()> {
        if self.n as usize != params.n || self.element_size as usize != params.field.element_size() {
            return Err(Error::Format(format!(
                "ciphertext has n={} element size {}, key has n={} element size {}",
                self.n,
                self.element_size,
                params.n,
                params.field.element_size()
            )));
        }
        let capacity = (self.ell as u128 + 1) * params.k as u128 * bits_per_element(&params.field) as u128;
        if (self.byte_len as u128) * 8 > capacity {
            return Err(Error::Format(format!("{} bytes do not fit in {} frames", self.byte_len, self.ell + 1)));
        }
        Ok(())
    }
}

/// Fills `buf`; `Ok(false)` on a clean end of input before the first byte.
fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<bool> {
    let mut got = 0;
    while got < buf.len() {
        match r.read(&mut buf[got..]) {
            Ok(0) => break,
            Ok(k) => got += k,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    if got == 0 {
        return Ok(false);
    }
    if got < buf.len() {
        return Err(Error::Format(format!("truncated frame: {got} of {} bytes", buf.len())));
    }
    Ok(true)
}

pub fn write_frame<W: Write>(w: &mut W, frame: &[FieldElement], element_size: usize) -> Result<()> {
    let mut buf = Vec::with_capacity(frame.len() * element_size);
    for &x in frame {
        push_element(&mut buf, x, element_size);
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads one frame of `n` elements; `None` at a clean end of input.
pub fn read_frame<R: Read>(r: &mut R, n: usize, f: &Field) -> Result<Option<Vec<FieldElement>>> {
    let size = f.spec().element_size();
    let mut buf = vec![0u8; n * size];
    if !read_full(r, &mut buf)? {
        return Ok(None);
    }
    buf.chunks(size).map(|c| decode_element(c, f)).collect::<Result<Vec<_>>>().map(Some)
}

pub fn encode_ciphertext(header: &CiphertextHeader, y: &PolyVector) -> Vec<u8> {
    let mut out = header.encode().to_vec();
    for c in y.coeffs() {
        for &x in c {
            push_element(&mut out, x, header.element_size as usize);
        }
    }
    out
}

pub fn decode_ciphertext(bytes: &[u8], f: &Field) -> Result<(CiphertextHeader, PolyVector)> {
    let header = CiphertextHeader::decode(bytes)?;
    let n = header.n as usize;
    let mut rest = &bytes[CIPHERTEXT_HEADER_LEN..];
    let mut frames = Vec::new();
    while let Some(frame) = read_frame(&mut rest, n, f)? {
        frames.push(frame);
    }
    Ok((header, PolyVector::from_coeffs(n, frames)?))
}

/// Message bits carried by one field element: `floor(log2 q)`.
pub fn bits_per_element(spec: &FieldSpec) -> u32 {
    31 - spec.order().leading_zeros()
}

/// Maps bytes to field elements, `floor(log2 q)` bits each, least
/// significant bit first.
#[derive(Clone, Debug)]
pub struct BitPacker {
    bits: u32,
    acc: u32,
    held: u32,
}

impl BitPacker {
    pub fn new(spec: &FieldSpec) -> Self {
        BitPacker { bits: bits_per_element(spec), acc: 0, held: 0 }
    }

    pub fn push(&mut self, byte: u8, out: &mut Vec<FieldElement>) {
        self.acc |= (byte as u32) << self.held;
        self.held += 8;
        let mask = (1u32 << self.bits) - 1;
        while self.held >= self.bits {
            out.push(FieldElement((self.acc & mask) as u16));
            self.acc >>= self.bits;
            self.held -= self.bits;
        }
    }

    /// Flushes the remaining bits, zero padded.
    pub fn finish(&mut self, out: &mut Vec<FieldElement>) {
        if self.held > 0 {
            out.push(FieldElement(self.acc as u16));
            self.acc = 0;
            self.held = 0;
        }
    }
}

/// Inverse of [`BitPacker`], stopping after `byte_len` bytes.
#[derive(Clone, Debug)]
pub struct BitUnpacker {
    bits: u32,
    acc: u32,
    held: u32,
    remaining: u64,
}

impl BitUnpacker {
    pub fn new(spec: &FieldSpec, byte_len: u64) -> Self {
        BitUnpacker { bits: bits_per_element(spec), acc: 0, held: 0, remaining: byte_len }
    }

    pub fn push(&mut self, x: FieldElement, out: &mut Vec<u8>) -> Result<()> {
        if (x.0 as u32) >> self.bits != 0 {
            return Err(Error::Format(format!("recovered element {} carries more than {} bits", x.0, self.bits)));
        }
        self.acc |= (x.0 as u32) << self.held;
        self.held += self.bits;
        while self.held >= 8 && self.remaining > 0 {
            out.push(self.acc as u8);
            self.acc >>= 8;
            self.held -= 8;
            self.remaining -= 1;
        }
        if self.remaining == 0 {
            // padding
            self.acc = 0;
            self.held = 0;
        }
        Ok(())
    }

    pub fn remaining(&self) -> u64 {
        self.remaining
    }
}

/// Splits a byte string into message frames of `k` elements. An empty input
/// gives one zero frame.
pub fn pack_message(bytes: &[u8], spec: &FieldSpec, k: usize) -> PolyVector {
    let mut elems = Vec::with_capacity(bytes.len() * 8 / bits_per_element(spec) as usize + 1);
    let mut packer = BitPacker::new(spec);
    for &b in bytes {
        packer.push(b, &mut elems);
    }
    packer.finish(&mut elems);
    let frames = elems.len().div_ceil(k).max(1);
    elems.resize(frames * k, FieldElement::ZERO);
    let coeffs = elems.chunks(k).map(<[FieldElement]>::to_vec).collect();
    PolyVector::from_coeffs(k, coeffs).expect("frames of width k")
}

pub fn unpack_message(u: &PolyVector, spec: &FieldSpec, byte_len: u64) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(byte_len as usize);
    let mut un = BitUnpacker::new(spec, byte_len);
    for c in u.coeffs() {
        for &x in c {
            un.push(x, &mut out)?;
        }
    }
    if un.remaining() > 0 {
        return Err(Error::Format(format!("message ended {} bytes short", un.remaining())));
    }
    Ok(out)
}

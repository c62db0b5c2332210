use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn cmce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmce")).args(args).env_remove("CMCE_SEED").output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = cmce(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

/// Deterministic pseudo-random bytes (xorshift).
fn bytes(len: usize, mut state: u64) -> Vec<u8> {
    (0..len)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state as u8
        })
        .collect()
}

fn keys(dir: &Path, extra: &[&str]) -> (String, String) {
    let prefix = p(dir, "key");
    let mut args = vec!["keygen", "--out", &prefix, "--seed", "11"];
    args.extend_from_slice(extra);
    ok(&args);
    (format!("{prefix}.pk"), format!("{prefix}.sk"))
}

fn roundtrip(dir: &Path, len: usize, extra: &[&str]) {
    let (pk, sk) = keys(dir, extra);
    let msg = bytes(len, 0x9e37_79b9 + len as u64);
    let (m, c, d) = (p(dir, "m.bin"), p(dir, "c.bin"), p(dir, "d.bin"));
    std::fs::write(&m, &msg).unwrap();
    ok(&["encrypt", "--key", &pk, "--in", &m, "--out", &c, "--error-seed", "5"]);
    ok(&["decrypt", "--key", &sk, "--in", &c, "--out", &d]);
    assert_eq!(std::fs::read(&d).unwrap(), msg, "len {len}");
}

#[test]
fn keygen_is_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let (apk, ask) = keys(a.path(), &[]);
    let (bpk, bsk) = keys(b.path(), &[]);
    assert_eq!(std::fs::read(apk).unwrap(), std::fs::read(bpk).unwrap());
    assert_eq!(std::fs::read(ask).unwrap(), std::fs::read(bsk).unwrap());
}

#[test]
fn seed_from_environment() {
    let a = TempDir::new().unwrap();
    let (apk, _) = keys(a.path(), &[]);
    let prefix = p(a.path(), "env");
    let out = Command::new(env!("CARGO_BIN_EXE_cmce"))
        .args(["keygen", "--out", &prefix])
        .env("CMCE_SEED", "11")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read(apk).unwrap(), std::fs::read(format!("{prefix}.pk")).unwrap());
}

#[test]
fn keygen_refuses_to_overwrite() {
    let dir = TempDir::new().unwrap();
    keys(dir.path(), &[]);
    let prefix = p(dir.path(), "key");
    let out = cmce(&["keygen", "--out", &prefix, "--seed", "12"]);
    assert_eq!(out.status.code(), Some(2));
    ok(&["keygen", "--out", &prefix, "--seed", "12", "--force"]);
}

#[test]
fn reference_public_key_size() {
    let dir = TempDir::new().unwrap();
    let (pk, _) = keys(dir.path(), &[]);
    // 55-byte header, then (μ+ν+1)·k·n one-byte elements
    assert_eq!(std::fs::metadata(pk).unwrap().len(), 55 + 9 * 16 * 32);
}

#[test]
fn bad_parameters_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let prefix = p(dir.path(), "k");
    assert_eq!(cmce(&["keygen", "--out", &prefix, "--k", "40"]).status.code(), Some(2));
    assert_eq!(cmce(&["keygen", "--out", &prefix, "--mu", "7"]).status.code(), Some(2));
    assert_eq!(cmce(&["keygen", "--out", &prefix, "--density", "3/2"]).status.code(), Some(2));
    assert_eq!(cmce(&["keygen", "--out", &prefix, "--q", "6"]).status.code(), Some(2));
    assert_eq!(cmce(&["frobnicate"]).status.code(), Some(2));
    assert!(!Path::new(&format!("{prefix}.pk")).exists());
}

#[test]
fn roundtrip_1kib() {
    let dir = TempDir::new().unwrap();
    roundtrip(dir.path(), 1024, &[]);
}

#[test]
fn roundtrip_1mib() {
    let dir = TempDir::new().unwrap();
    roundtrip(dir.path(), 1 << 20, &[]);
}

#[test]
fn roundtrip_small_field() {
    for len in [0, 1, 5, 333] {
        let dir = TempDir::new().unwrap();
        roundtrip(dir.path(), len, &["--preset", "small"]);
    }
}

#[test]
fn ciphertext_layout_and_reproducibility() {
    let dir = TempDir::new().unwrap();
    let (pk, _) = keys(dir.path(), &[]);
    let m = p(dir.path(), "m.bin");
    std::fs::write(&m, bytes(1000, 1)).unwrap();
    let (c1, c2) = (p(dir.path(), "c1"), p(dir.path(), "c2"));
    ok(&["encrypt", "--key", &pk, "--in", &m, "--out", &c1, "--error-seed", "9"]);
    ok(&["encrypt", "--key", &pk, "--in", &m, "--out", &c2, "--error-seed", "9"]);
    let a = std::fs::read(&c1).unwrap();
    assert_eq!(a, std::fs::read(&c2).unwrap());
    // 1000 bytes = 63 frames of 16, so ℓ = 62 and ℓ+μ+ν+1 = 71 frames of 32
    assert_eq!(&a[..4], b"CMCT");
    assert_eq!(u64::from_le_bytes(a[5..13].try_into().unwrap()), 62);
    assert_eq!(u64::from_le_bytes(a[16..24].try_into().unwrap()), 1000);
    assert_eq!(a.len(), 24 + 71 * 32);
}

#[test]
fn empty_message_with_zero_load() {
    let dir = TempDir::new().unwrap();
    let (pk, sk) = keys(dir.path(), &[]);
    let (m, c, d) = (p(dir.path(), "m"), p(dir.path(), "c"), p(dir.path(), "d"));
    std::fs::write(&m, b"").unwrap();
    ok(&["encrypt", "--key", &pk, "--in", &m, "--out", &c, "--error-seed", "1", "--error-load", "0"]);
    let ct = std::fs::read(&c).unwrap();
    assert_eq!(ct.len(), 24 + 9 * 32);
    assert!(ct[24..].iter().all(|&b| b == 0));
    ok(&["decrypt", "--key", &sk, "--in", &c, "--out", &d]);
    assert!(std::fs::read(&d).unwrap().is_empty());
}

fn encrypted(dir: &Path, len: usize) -> (String, PathBuf, Vec<u8>, Vec<u8>) {
    let (pk, sk) = keys(dir, &[]);
    let msg = bytes(len, 77);
    let (m, c) = (p(dir, "m"), p(dir, "c"));
    std::fs::write(&m, &msg).unwrap();
    ok(&["encrypt", "--key", &pk, "--in", &m, "--out", &c, "--error-seed", "2"]);
    let ct = std::fs::read(&c).unwrap();
    (sk, dir.join("c"), msg, ct)
}

#[test]
fn truncated_ciphertext_is_a_format_error() {
    let dir = TempDir::new().unwrap();
    let (sk, _, msg, ct) = encrypted(dir.path(), 4096);
    for cut in [10, 24 + 32 * 40, 24 + 32 * 40 + 7, ct.len() - 1] {
        let t = p(dir.path(), "t");
        let d = p(dir.path(), "d");
        std::fs::write(&t, &ct[..cut]).unwrap();
        let out = cmce(&["decrypt", "--key", &sk, "--in", &t, "--out", &d]);
        assert_eq!(out.status.code(), Some(3), "cut {cut}");
        let got = std::fs::read(&d).unwrap_or_default();
        // the last ν−μ frames carry no new message symbols once ℓ is known
        if cut < 24 + 32 * 60 {
            assert!(got.len() < msg.len(), "cut {cut}");
        }
        assert_eq!(got, msg[..got.len()], "only a recovered prefix is written");
    }
}

#[test]
fn injected_burst_is_detected() {
    let dir = TempDir::new().unwrap();
    let (sk, _, msg, mut ct) = encrypted(dir.path(), 2048);
    // a full-weight burst in one frame breaks the sliding-window bound
    let frame = 24 + 32 * 30;
    for (i, b) in ct[frame..frame + 32].iter_mut().enumerate() {
        *b ^= 1 + i as u8;
    }
    let (c, d) = (p(dir.path(), "burst"), p(dir.path(), "d"));
    std::fs::write(&c, &ct).unwrap();
    let out = cmce(&["decrypt", "--key", &sk, "--in", &c, "--out", &d]);
    assert!(!out.status.success());
    assert_eq!(out.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("time index"), "{stderr}");
    assert_ne!(std::fs::read(&d).unwrap_or_default(), msg);
}

#[test]
fn wrong_key_kind_and_mismatched_header() {
    let dir = TempDir::new().unwrap();
    let (sk, c, _, _) = encrypted(dir.path(), 100);
    let pk = sk.replace(".sk", ".pk");
    let c = c.to_str().unwrap();
    let d = p(dir.path(), "d");
    assert_eq!(cmce(&["decrypt", "--key", &pk, "--in", c, "--out", &d]).status.code(), Some(3));
    let small = p(dir.path(), "small");
    ok(&["keygen", "--out", &small, "--seed", "1", "--preset", "small"]);
    let small_sk = format!("{small}.sk");
    assert_eq!(cmce(&["decrypt", "--key", &small_sk, "--in", c, "--out", &d]).status.code(), Some(3));
}

const KV_KEYS: &[&str] = &[
    "field.q",
    "code.family",
    "code.n",
    "code.k",
    "code.t",
    "key.mu",
    "key.nu",
    "keyspace.log2_s",
    "keyspace.log2_s_literal",
    "keyspace.log2_delta",
    "keyspace.log2_pi",
    "keyspace.log2_pi_literal",
    "keyspace.log2_gamma",
    "keyspace.log2_total",
    "keyspace.log2_total_literal",
    "keyspace.s_discrepancy",
    "keyspace.u_discrepancy",
    "stern.p",
    "stern.m",
    "stern.ell",
    "stern.probability",
    "stern.log2_probability",
    "stern.log2_iterations",
    "stern.log2_search_time",
    "stern.log2_work_factor",
    "truncated.model",
    "truncated.s1.rank",
    "truncated.s1.full_rank",
    "truncated.s1.t_s",
    "truncated.s1.log2_probability",
    "truncated.s4.rank",
    "truncated.s4.full_rank",
    "truncated.s4.t_s",
    "truncated.s4.log2_probability",
];

fn kv(out: &Output) -> Vec<(String, String)> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| {
            let (k, v) = l.split_once('=').expect("key=value line");
            (k.to_string(), v.to_string())
        })
        .collect()
}

#[test]
fn analyze_kv_schema_and_determinism() {
    let args = ["analyze", "--format", "kv", "--s", "1", "--s", "4", "--stern-p", "2", "--stern-m", "6", "--seed", "3"];
    let a = ok(&args);
    let b = ok(&args);
    assert_eq!(a.stdout, b.stdout);
    let pairs = kv(&a);
    let names: Vec<&str> = pairs.iter().map(|(k, _)| k.as_str()).collect();
    assert_eq!(names, KV_KEYS);
    let get = |k: &str| pairs.iter().find(|(x, _)| x == k).unwrap().1.clone();
    assert_eq!(get("code.t"), "8");
    assert_eq!(get("truncated.s1.full_rank"), "32");
    assert_eq!(get("truncated.s4.t_s"), "8");
    assert_eq!(get("keyspace.s_discrepancy"), "true");

    // from a key file
    let dir = TempDir::new().unwrap();
    let (pk, sk) = keys(dir.path(), &[]);
    let from_pk = ok(&["analyze", "--key", &pk, "--format", "kv", "--s", "2"]);
    let from_sk = ok(&["analyze", "--key", &sk, "--format", "kv", "--s", "2"]);
    assert_eq!(from_pk.stdout, from_sk.stdout);
    let text = ok(&["analyze", "--key", &pk]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("log2 work factor"));
    assert_eq!(cmce(&["analyze", "--stern-p", "3"]).status.code(), Some(2));
}

/// `log2 C(n, k)` from exact 128-bit binomials.
fn log2_binom(n: u128, k: u128) -> f64 {
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    (c as f64).log2()
}

#[test]
fn analyze_without_memory_is_classical_prange() {
    let out = ok(&["analyze", "--format", "kv", "--mu", "0", "--nu", "0", "--ell", "0"]);
    let pairs = kv(&out);
    let wf: f64 = pairs.iter().find(|(k, _)| k == "stern.log2_work_factor").unwrap().1.parse().unwrap();
    // C(32, 8) / C(16, 8) for RS[32, 16], t = 8
    let want = log2_binom(32, 8) - log2_binom(16, 8);
    assert!((wf - want).abs() < 1e-6, "{wf} vs {want}");
}

#[test]
fn inspect_files() {
    let dir = TempDir::new().unwrap();
    let (sk, c, _, _) = encrypted(dir.path(), 500);
    let pk = sk.replace(".sk", ".pk");
    let out = String::from_utf8(ok(&["inspect", &pk]).stdout).unwrap();
    assert!(out.contains("public key") && out.contains("mu = 2, nu = 6"));
    let out = String::from_utf8(ok(&["inspect", &sk]).stdout).unwrap();
    assert!(out.contains("transform T validated"));
    let out = String::from_utf8(ok(&["inspect", c.to_str().unwrap()]).stdout).unwrap();
    // 500 bytes = 32 frames, ℓ = 31, 40 ciphertext frames
    assert!(out.contains("ell = 31") && out.contains("frames: 40"), "{out}");
    let junk = p(dir.path(), "junk");
    std::fs::write(&junk, b"hello").unwrap();
    assert_eq!(cmce(&["inspect", &junk]).status.code(), Some(3));
}

fn read_hex(name: &str) -> Vec<u8> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden").join(name);
    let text = std::fs::read_to_string(path).unwrap();
    let digits: Vec<u8> = text.bytes().filter(u8::is_ascii_hexdigit).collect();
    digits.chunks(2).map(|pair| u8::from_str_radix(std::str::from_utf8(pair).unwrap(), 16).unwrap()).collect()
}

#[test]
fn keygen_matches_golden_small_key() {
    let dir = TempDir::new().unwrap();
    let prefix = p(dir.path(), "golden");
    ok(&["keygen", "--out", &prefix, "--preset", "small", "--seed", "2024"]);
    assert_eq!(std::fs::read(format!("{prefix}.pk")).unwrap(), read_hex("small.pk.hex"));
    assert_eq!(std::fs::read(format!("{prefix}.sk")).unwrap(), read_hex("small.sk.hex"));
    let (m, c) = (p(dir.path(), "m"), p(dir.path(), "c"));
    std::fs::write(&m, b"convolutional").unwrap();
    let pk = format!("{prefix}.pk");
    ok(&["encrypt", "--key", &pk, "--in", &m, "--out", &c, "--error-seed", "7"]);
    assert_eq!(std::fs::read(&c).unwrap(), read_hex("small.ct.hex"));
}

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use cmce::analysis::{analyze, AnalysisRequest, IsdModel, SternParams};
use cmce::block_code::CodeFamily;
use cmce::channel::sample_error;
use cmce::format::{self, CiphertextHeader, KeyKind};
use cmce::keygen::{keygen, Density, PublicKey, SchemeParams};
use cmce::stream::{encrypt, DecoderState};
use cmce::{Error, Field, FieldSpec};

#[derive(Parser)]
#[command(name = "cmce", version, about = "McEliece-type encryption with convolutional codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate <prefix>.pk and <prefix>.sk
    Keygen(KeygenArgs),
    /// Encrypt a file under a public key
    Encrypt(EncryptArgs),
    /// Decrypt a ciphertext with a secret key
    Decrypt(DecryptArgs),
    /// Key-space and attack-cost report
    Analyze(AnalyzeArgs),
    /// Print the header of a key or ciphertext file
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Reference,
    Small,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Rs,
    Identity,
}

#[derive(Args)]
struct ParamArgs {
    /// Starting point; other flags override its fields
    #[arg(long, value_enum, default_value = "reference")]
    preset: Preset,
    /// Field order (smallest irreducible modulus)
    #[arg(long, conflicts_with_all = ["p", "m"])]
    q: Option<u32>,
    /// Field characteristic
    #[arg(long, requires = "m")]
    p: Option<u32>,
    /// Extension degree
    #[arg(long, requires = "p")]
    m: Option<u32>,
    /// Reduction polynomial coefficients, lowest degree first, comma separated
    #[arg(long, requires = "p", value_delimiter = ',')]
    redpoly: Option<Vec<u32>>,
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    mu: Option<usize>,
    #[arg(long)]
    nu: Option<usize>,
    /// Off-diagonal density of Π as NUM/DEN
    #[arg(long)]
    density: Option<String>,
}

impl ParamArgs {
    fn resolve(&self) -> Result<SchemeParams, Error> {
        let mut params = match self.preset {
            Preset::Reference => SchemeParams::reference(),
            Preset::Small => SchemeParams::small(),
        };
        if let Some(q) = self.q {
            params.field = FieldSpec::with_order(q)?;
        }
        if let (Some(p), Some(m)) = (self.p, self.m) {
            params.field = match &self.redpoly {
                Some(coeffs) => FieldSpec::new(p, m, coeffs.clone())?,
                None => FieldSpec::with_order(
                    p.checked_pow(m).ok_or_else(|| Error::InvalidField(format!("{p}^{m} is too large")))?,
                )?,
            };
        }
        if let Some(family) = self.family {
            params.family = match family {
                Family::Rs => CodeFamily::ReedSolomon,
                Family::Identity => CodeFamily::IdentityTest,
            };
        }
        params.n = self.n.unwrap_or(params.n);
        params.k = self.k.unwrap_or(params.k);
        params.mu = self.mu.unwrap_or(params.mu);
        params.nu = self.nu.unwrap_or(params.nu);
        if let Some(d) = &self.density {
            params.density = parse_density(d)?;
        }
        params.validate()?;
        Ok(params)
    }
}

fn parse_density(s: &str) -> Result<Density, Error> {
    let bad = || Error::Params(format!("density {s:?} is not NUM/DEN"));
    let (num, den) = s.split_once('/').ok_or_else(bad)?;
    Density::new(num.trim().parse().map_err(|_| bad())?, den.trim().parse().map_err(|_| bad())?)
}

#[derive(Args)]
struct KeygenArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// RNG seed; random when neither this nor CMCE_SEED is set
    #[arg(long, env = "CMCE_SEED")]
    seed: Option<u64>,
    /// Output prefix
    #[arg(long, short)]
    out: PathBuf,
    /// Overwrite existing key files
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct EncryptArgs {
    /// Public key file
    #[arg(long)]
    key: PathBuf,
    #[arg(long = "in", short)]
    input: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    /// Seed for the error sequence; random when neither this nor CMCE_SEED is set
    #[arg(long, env = "CMCE_SEED")]
    error_seed: Option<u64>,
    /// Fraction of the per-window error budget to use, in [0, 1]
    #[arg(long, default_value_t = 1.0)]
    error_load: f64,
}

#[derive(Args)]
struct DecryptArgs {
    /// Secret key file
    #[arg(long)]
    key: PathBuf,
    #[arg(long = "in", short)]
    input: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Prange,
    Stern,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Kv,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Key file to analyze; without it a key is generated from the parameter flags
    #[arg(long)]
    key: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
    /// Seed for the generated key
    #[arg(long, env = "CMCE_SEED", default_value_t = 0)]
    seed: u64,
    /// Stern weight guess p (even)
    #[arg(long, default_value_t = 0)]
    stern_p: u64,
    /// Stern zero-window length m
    #[arg(long, default_value_t = 0)]
    stern_m: u64,
    /// Message degree for the sliding attack
    #[arg(long, default_value_t = 128)]
    ell: u64,
    /// Truncation points for G'_truc(s); repeatable
    #[arg(long = "s")]
    s: Vec<usize>,
    /// ISD model for the truncated estimate
    #[arg(long, value_enum, default_value = "prange")]
    model: Model,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
}

#[derive(Args)]
struct InspectArgs {
    file: PathBuf,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Format(_) | Error::Io(_) => 3,
            Error::Decode { .. } => 4,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: 3, message: format!("{}: {e}", path.display()) }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| io_err(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn seed_or_random(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| rand::rng().random())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_keygen(a: &KeygenArgs) -> Result<(), Failure> {
    let params = a.params.resolve()?;
    let pk_path = with_suffix(&a.out, ".pk");
    let sk_path = with_suffix(&a.out, ".sk");
    if !a.force {
        if let Some(existing) = [&pk_path, &sk_path].into_iter().find(|p| p.exists()) {
            return Err(usage(format!("{} exists; pass --force to overwrite", existing.display())));
        }
    }
    let seed = seed_or_random(a.seed);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (pk, sk) = keygen(&params, &mut rng)?;
    let fp = format::seed_fingerprint(seed);
    write(&pk_path, &format::encode_public_key(&pk, fp))?;
    write(&sk_path, &format::encode_secret_key(&sk, fp))?;
    eprintln!(
        "wrote {} and {} (F_{}, {}[{}, {}], t={}, mu={}, nu={})",
        pk_path.display(),
        sk_path.display(),
        params.field.order(),
        params.family,
        params.n,
        params.k,
        pk.t,
        params.mu,
        params.nu
    );
    Ok(())
}

fn cmd_encrypt(a: &EncryptArgs) -> Result<(), Failure> {
    if !(0.0..=1.0).contains(&a.error_load) {
        return Err(usage(format!("--error-load {} is not in [0, 1]", a.error_load)));
    }
    let (pk, _) = format::decode_public_key(&read(&a.key)?)?;
    let message = read(&a.input)?;
    let spec = &pk.params.field;
    let u = format::pack_message(&message, spec, pk.k());
    let frames = u.len() + pk.memory();
    let mut rng = ChaCha20Rng::seed_from_u64(seed_or_random(a.error_seed));
    let e = sample_error(frames, pk.n(), pk.t, pk.mu(), a.error_load, pk.field(), &mut rng);
    let y = encrypt(&pk, &u, &e)?;
    let header = CiphertextHeader {
        ell: (u.len() - 1) as u64,
        n: pk.n() as u16,
        element_size: spec.element_size() as u8,
        byte_len: message.len() as u64,
    };
    write(&a.out, &format::encode_ciphertext(&header, &y))?;
    Ok(())
}

fn cmd_decrypt(a: &DecryptArgs) -> Result<(), Failure> {
    let (sk, _) = format::decode_secret_key(&read(&a.key)?)?;
    let field: Field = sk.field().clone();
    let mut input = BufReader::new(File::open(&a.input).map_err(|e| io_err(&a.input, e))?);
    let header = CiphertextHeader::read_from(&mut input)?;
    header.check(&sk.params)?;
    let out_file = File::create(&a.out).map_err(|e| io_err(&a.out, e))?;
    let mut out = BufWriter::new(out_file);
    let mut state = DecoderState::new(&sk, Some(header.ell));
    let mut unpacker = format::BitUnpacker::new(&sk.params.field, header.byte_len);
    let mut bytes = Vec::new();
    let mut emit = |frames: Vec<Vec<cmce::FieldElement>>, out: &mut BufWriter<File>| -> Result<(), Failure> {
        bytes.clear();
        for frame in frames {
            for x in frame {
                unpacker.push(x, &mut bytes)?;
            }
        }
        out.write_all(&bytes).map_err(|e| io_err(&a.out, e))
    };
    let result = (|| -> Result<(), Failure> {
        while let Some(frame) = format::read_frame(&mut input, sk.params.n, &field)? {
            let frames = state.push(&frame)?;
            emit(frames, &mut out)?;
        }
        let frames = state.finish()?;
        emit(frames, &mut out)?;
        Ok(())
    })();
    out.flush().map_err(|e| io_err(&a.out, e))?;
    result?;
    if unpacker.remaining() > 0 {
        return Err(Error::Format(format!("plaintext ended {} bytes short", unpacker.remaining())).into());
    }
    if !state.warnings().is_empty() {
        for w in state.warnings() {
            eprintln!("warning: {w:?}");
        }
        return Err(Failure { code: 4, message: "integrity check failed: ciphertext framing is inconsistent".into() });
    }
    let mut trailing = [0u8; 1];
    if input.read(&mut trailing).map_err(|e| io_err(&a.input, e))? > 0 {
        return Err(Error::Format("trailing bytes after the last frame".into()).into());
    }
    Ok(())
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<(), Failure> {
    let pk: PublicKey = match &a.key {
        Some(path) => {
            let bytes = read(path)?;
            match format::read_key_header(&bytes)?.kind {
                KeyKind::Public => format::decode_public_key(&bytes)?.0,
                KeyKind::Secret => format::decode_secret_key(&bytes)?.0.public_key()?,
            }
        }
        None => {
            let params = a.params.resolve()?;
            keygen(&params, &mut ChaCha20Rng::seed_from_u64(a.seed))?.0
        }
    };
    let stern = SternParams::new(a.stern_p, a.stern_m)?;
    let model = match a.model {
        Model::Prange => IsdModel::Prange,
        Model::Stern => IsdModel::Stern(stern),
    };
    let report = analyze(&pk, AnalysisRequest { stern, ell: a.ell, truncations: a.s.clone(), model })?;
    let text = match a.format {
        ReportFormat::Text => report.to_text(),
        ReportFormat::Kv => report.to_kv(),
    };
    print!("{text}");
    Ok(())
}

fn cmd_inspect(a: &InspectArgs) -> Result<(), Failure> {
    let bytes = read(&a.file)?;
    if bytes.starts_with(format::KEY_MAGIC) {
        let h = format::read_key_header(&bytes)?;
        let p = &h.params;
        println!("key file, {} key, format version {}", h.kind, format::VERSION);
        println!("field: {}", p.field);
        println!("code: {}[{}, {}], t = {}", p.family, p.n, p.k, h.t);
        println!("mu = {}, nu = {}, memory = {}", p.mu, p.nu, p.mu + p.nu);
        println!("pi density: {}/{}", p.density.num, p.density.den);
        println!("seed fingerprint: {}", h.fingerprint.iter().map(|b| format!("{b:02x}")).collect::<String>());
        println!("header bytes: {}, payload bytes: {}", h.encoded_len(), bytes.len() - h.encoded_len());
        match h.kind {
            KeyKind::Public => {
                format::decode_public_key(&bytes)?;
                println!("public key: {} coefficient matrices of {}x{}", p.mu + p.nu + 1, p.k, p.n);
            }
            KeyKind::Secret => {
                let (sk, _) = format::decode_secret_key(&bytes)?;
                let tr = sk.transform();
                println!("delta profile (d_-mu .. d_mu): {:?}", tr.delta.counts());
                println!("transform T validated");
            }
        }
    } else if bytes.starts_with(format::CIPHERTEXT_MAGIC) {
        let h = CiphertextHeader::decode(&bytes)?;
        let frame_bytes = h.n as usize * h.element_size as usize;
        let body = bytes.len() - format::CIPHERTEXT_HEADER_LEN;
        println!("ciphertext, format version {}", format::VERSION);
        println!("message degree ell = {}, plaintext bytes = {}", h.ell, h.byte_len);
        println!("n = {}, element size = {}", h.n, h.element_size);
        if frame_bytes == 0 || !body.is_multiple_of(frame_bytes) {
            return Err(Error::Format(format!("body of {body} bytes is not a whole number of frames")).into());
        }
        println!("frames: {}", body / frame_bytes);
    } else {
        return Err(Error::Format("unrecognised file (no CMCE or CMCT magic)".into()).into());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Keygen(a) => cmd_keygen(a),
        Command::Encrypt(a) => cmd_encrypt(a),
        Command::Decrypt(a) => cmd_decrypt(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Inspect(a) => cmd_inspect(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("cmce: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bimap_lab::bdg::{forward_bdg, inverse_bdg};
use bimap_lab::encodings::{
    check_lien_cy, contour_c, height_and_tilde_label, label_l0, white_contour_c0, y_path, LatticePath,
};
use bimap_lab::experiments::{resolved_config, run_named, EXPERIMENTS};
use bimap_lab::model::parse_mobiles;
use bimap_lab::oracle::{
    canonical_code_census, count_rooted_pointed_maps, enumerate_mobiles, exact_tree_law, write_law_csv,
};
use bimap_lab::sampler::{sample_mobile, sample_rooted_mobile, DEFAULT_MAX_ATTEMPTS};
use bimap_lab::{CombinatorialMap, Error, RngState};
use clap::{Parser, Subcommand, ValueEnum};
use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use rand::Rng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "bimap-lab", version, about = "Sampler and verification lab for random bipartite planar maps")]
struct Cli {
    /// Worker threads for experiments (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample uniform mobiles with a uniform orientation bit.
    SampleMobile {
        #[arg(long)]
        n: usize,
        #[arg(long, env = "BIMAP_LAB_SEED")]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value = "-")]
        out: PathBuf,
        #[arg(long)]
        gzip: bool,
    },
    /// Sample a uniform rooted map, or a uniform rooted pointed map with --pointed.
    SampleMap {
        #[arg(long)]
        n: usize,
        #[arg(long, env = "BIMAP_LAB_SEED")]
        seed: u64,
        #[arg(long)]
        pointed: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_ATTEMPTS)]
        max_attempts: u64,
        #[arg(long, default_value = "-")]
        out: PathBuf,
        #[arg(long)]
        gzip: bool,
    },
    /// Write a path encoding of a mobile as CSV.
    Encode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        what: Encoding,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Build the map of a mobile.
    Bdg {
        #[arg(long = "in")]
        input: PathBuf,
        /// Overrides the `eps=` line of the record.
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
        eps: Option<u8>,
        #[arg(long, default_value = "-")]
        out: PathBuf,
        #[arg(long)]
        gzip: bool,
    },
    /// Recover the mobile and orientation bit of a rooted pointed map.
    BdgInverse {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Check every structural invariant of a map or mobile file.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Exhaustive enumeration for small n: mobiles, exact tree law, code census.
    Enumerate {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=6))]
        n: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a named experiment and write its report.
    Experiment {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(EXPERIMENTS))]
        name: String,
        /// JSON object or path to a JSON file; missing fields take defaults.
        #[arg(long)]
        config: Option<String>,
        /// Overrides the config seed.
        #[arg(long, env = "BIMAP_LAB_SEED")]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the resolved config next to the results.
        #[arg(long)]
        freeze: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Encoding {
    Contour,
    White,
    Label,
    Y,
    Height,
}

enum Failure {
    Validation(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Lib(Error::BudgetExceeded { .. }) => 3,
            Failure::Lib(_) => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Validation(_) => "validation_failed",
            Failure::Lib(Error::BudgetExceeded { .. }) => "budget_exceeded",
            Failure::Lib(Error::Io(_)) => "io",
            Failure::Lib(_) => "malformed_input",
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Validation(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn read_input(path: &Path) -> CliResult<String> {
    let mut raw = Vec::new();
    if path.as_os_str() == "-" {
        io::stdin().read_to_end(&mut raw)?;
    } else {
        BufReader::new(File::open(path)?).read_to_end(&mut raw)?;
    }
    let bytes = if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        MultiGzDecoder::new(&raw[..]).read_to_end(&mut out)?;
        out
    } else {
        raw
    };
    String::from_utf8(bytes).map_err(|_| Failure::Lib(Error::Parse("input is not UTF-8".into())))
}

fn open_output(path: &Path, gzip: bool) -> CliResult<Box<dyn Write>> {
    let sink: Box<dyn Write> = if path.as_os_str() == "-" {
        Box::new(BufWriter::new(io::stdout().lock()))
    } else {
        Box::new(BufWriter::new(File::create(path)?))
    };
    Ok(if gzip {
        Box::new(GzEncoder::new(sink, Compression::default()))
    } else {
        sink
    })
}

fn write_output(path: &Path, gzip: bool, text: &str) -> CliResult<()> {
    let mut w = open_output(path, gzip)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn header(text: &str) -> &str {
    text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("")
}

fn cmd_sample_mobile(n: usize, seed: u64, count: usize, out: &Path, gzip: bool) -> CliResult<()> {
    let mut text = String::new();
    for k in 0..count {
        let mut rng = RngState::new(seed).with_stream(k as u64).rng();
        let mobile = sample_mobile(n, &mut rng)?;
        let eps = rng.random_range(0..2u8);
        text.push_str(&mobile.to_text(eps));
    }
    write_output(out, gzip, &text)
}

fn cmd_sample_map(n: usize, seed: u64, pointed: bool, attempts: u64, out: &Path, gzip: bool) -> CliResult<()> {
    let mut rng = RngState::new(seed).rng();
    let mobile = if pointed {
        sample_mobile(n, &mut rng)?
    } else {
        sample_rooted_mobile(n, &mut rng, attempts)?
    };
    let eps = rng.random_range(0..2u8);
    let map = forward_bdg(&mobile, eps);
    let map = if pointed { map } else { map.with_origin(None) };
    write_output(out, gzip, &map.to_text())
}

fn cmd_encode(input: &Path, what: Encoding, out: &Path) -> CliResult<()> {
    let text = read_input(input)?;
    let records = parse_mobiles(&text)?;
    let mut w = open_output(out, false)?;
    for (mobile, _) in &records {
        let path: LatticePath = match what {
            Encoding::Contour => contour_c(mobile.tree()),
            Encoding::White => white_contour_c0(mobile.tree()),
            Encoding::Label => label_l0(mobile),
            Encoding::Y => y_path(mobile.tree()),
            Encoding::Height => {
                let (h, l) = height_and_tilde_label(mobile);
                writeln!(w, "index,height,label")?;
                for (i, (a, b)) in h.values.iter().zip(&l.values).enumerate() {
                    writeln!(w, "{i},{a},{b}")?;
                }
                continue;
            }
        };
        path.write_csv(&mut w)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_bdg(input: &Path, eps: Option<u8>, out: &Path, gzip: bool) -> CliResult<()> {
    let text = read_input(input)?;
    let mut text_out = String::new();
    for (mobile, record_eps) in parse_mobiles(&text)? {
        text_out.push_str(&forward_bdg(&mobile, eps.unwrap_or(record_eps)).to_text());
    }
    write_output(out, gzip, &text_out)
}

fn cmd_bdg_inverse(input: &Path, out: &Path) -> CliResult<()> {
    let map = CombinatorialMap::parse(&read_input(input)?)?;
    let (mobile, eps) = inverse_bdg(&map)?;
    write_output(out, false, &mobile.to_text(eps))
}

fn validate_map(text: &str) -> CliResult<Value> {
    let map = CombinatorialMap::parse(text)?;
    let report = map.validate();
    let mut failures: Vec<String> = report.defects.iter().map(|d| format!("{d:?}")).collect();
    if report.is_valid() && map.origin().is_some() {
        match inverse_bdg(&map) {
            Ok((mobile, eps)) => {
                if forward_bdg(&mobile, eps).canonical_code() != map.canonical_code() {
                    failures.push("BdgRoundTrip".into());
                }
            }
            Err(e) => failures.push(format!("InverseBdg: {e}")),
        }
    }
    Ok(json!({
        "kind": "map",
        "edges": report.edges,
        "vertices": report.vertices,
        "faces": report.faces,
        "pointed": map.origin().is_some(),
        "defects": failures,
        "valid": failures.is_empty(),
    }))
}

fn validate_mobiles(text: &str) -> CliResult<Value> {
    let records = match parse_mobiles(text) {
        Ok(r) => r,
        Err(e @ (Error::BadLabeling { .. } | Error::BadRootLabel(_) | Error::MalformedTree(_))) => {
            return Ok(json!({"kind": "mobile", "defects": [e.to_string()], "valid": false}));
        }
        Err(e) => return Err(e.into()),
    };
    let mut failures = Vec::new();
    for (k, (mobile, eps)) in records.iter().enumerate() {
        if !check_lien_cy(mobile.tree()) {
            failures.push(format!("record {k}: white contour disagrees with the Y path"));
        }
        match inverse_bdg(&forward_bdg(mobile, *eps)) {
            Ok((back, e)) if back == *mobile && e == *eps => {}
            _ => failures.push(format!("record {k}: BDG round trip")),
        }
    }
    Ok(json!({
        "kind": "mobile",
        "records": records.len(),
        "defects": failures,
        "valid": failures.is_empty(),
    }))
}

fn cmd_validate(input: &Path) -> CliResult<()> {
    let text = read_input(input)?;
    let h = header(&text);
    let report = if h.starts_with("MAP") {
        validate_map(&text)?
    } else if h.starts_with("MOBILE") {
        validate_mobiles(&text)?
    } else {
        return Err(Error::Parse(format!("unrecognised header `{h}`")).into());
    };
    println!("{report}");
    if report["valid"] == Value::Bool(true) {
        Ok(())
    } else {
        Err(Failure::Validation(format!("defects: {}", report["defects"])))
    }
}

fn cmd_enumerate(n: usize, out: &Path) -> CliResult<()> {
    std::fs::create_dir_all(out)?;
    let mobiles = enumerate_mobiles(n)?;
    let mut text = String::new();
    for m in &mobiles {
        text.push_str(&m.to_text(0));
    }
    write_output(&out.join(format!("mobiles_n{n}.txt")), false, &text)?;
    let law = exact_tree_law(n)?;
    let mut w = open_output(&out.join(format!("law_n{n}.csv")), false)?;
    write_law_csv(&law, &mut w)?;
    w.flush()?;
    let census = json!({
        "n": n,
        "mobiles": mobiles.len(),
        "rooted_pointed_maps": count_rooted_pointed_maps(n)?.to_string(),
        "distinct_codes": canonical_code_census(n)?,
    });
    write_output(&out.join(format!("census_n{n}.json")), false, &format!("{census:#}\n"))?;
    println!("{census}");
    Ok(())
}

fn load_config(arg: Option<&str>) -> CliResult<Option<Value>> {
    let Some(arg) = arg else { return Ok(None) };
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        read_input(Path::new(arg))?
    };
    Ok(Some(serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))?))
}

fn cmd_experiment(name: &str, config: Option<&str>, seed: Option<u64>, out: &Path, freeze: bool) -> CliResult<()> {
    let mut config = load_config(config)?;
    if let Some(seed) = seed {
        if resolved_config(name, None)?.get("seed").is_some() {
            let obj = config.get_or_insert_with(|| json!({}));
            match obj.as_object_mut() {
                Some(map) => {
                    map.insert("seed".into(), json!(seed));
                }
                None => return Err(Error::InvalidConfig("config must be a JSON object".into()).into()),
            }
        }
    }
    let resolved = resolved_config(name, config.as_ref())?;
    let mut report = run_named(name, Some(&resolved))?;
    let written = report.write_to_dir(out)?;
    if freeze {
        let path = out.join(format!("{}.config.json", report.file_stem()));
        write_output(&path, false, &format!("{resolved:#}\n"))?;
    }
    print!("{}", report.summary());
    for p in written {
        println!("wrote {}", p.display());
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Validation(format!("experiment {name} failed at least one check")))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build_global()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    }
    match cli.command {
        Command::SampleMobile { n, seed, count, out, gzip } => cmd_sample_mobile(n, seed, count, &out, gzip),
        Command::SampleMap { n, seed, pointed, max_attempts, out, gzip } => {
            cmd_sample_map(n, seed, pointed, max_attempts, &out, gzip)
        }
        Command::Encode { input, what, out } => cmd_encode(&input, what, &out),
        Command::Bdg { input, eps, out, gzip } => cmd_bdg(&input, eps, &out, gzip),
        Command::BdgInverse { input, out } => cmd_bdg_inverse(&input, &out),
        Command::Validate { input } => cmd_validate(&input),
        Command::Enumerate { n, out } => cmd_enumerate(n as usize, &out),
        Command::Experiment { name, config, seed, out, freeze } => {
            cmd_experiment(&name, config.as_deref(), seed, &out, freeze)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // Downstream reader closed early, as in `| head`.
        Err(Failure::Lib(Error::Io(e))) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(f) => {
            let line = json!({"error": f.kind(), "message": f.message(), "exit_code": f.code()});
            eprintln!("{line}");
            ExitCode::from(f.code())
        }
    }
}

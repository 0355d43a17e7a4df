//! Command-line front end: configuration ingestion, subcommands, and
//! machine-readable outputs.
//!
//! Exit codes: 0 on success, 1 for validation or runtime failures, 2 for
//! unreadable or malformed configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use fourier_frames::algebra::{Rational, Scalar};
use fourier_frames::dynamics::{
    cycle_word_weight_sum, cycle_words_for, find_min_sets, find_min_sets_unchecked,
    first_passage_weight_sum, MinSet,
};
use fourier_frames::frames::{frame_multiset_for, FrameElement};
use fourier_frames::measure::{
    cycle_orthogonality_matrix_for, parseval_defect_many_for, transfer_normalization,
};
use fourier_frames::system::FrameSystem;
use fourier_frames::theory;

const DEFAULT_DEPTH: usize = 12;
const DEFAULT_TERMS: usize = 64;
const DEFAULT_PARSEVAL_TOLERANCE: f64 = 0.02;

#[derive(Parser)]
#[command(
    name = "fourier-frames",
    about = "Weighted exponential frames for self-affine measures",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the standing assumptions and print the validation report
    Validate { config: PathBuf },
    /// Discover min-sets and print them as JSON; optionally write DOT files
    Minsets {
        config: PathBuf,
        /// Directory for one Graphviz DOT file per min-set
        #[arg(long, value_name = "DIR")]
        dot: Option<PathBuf>,
        /// Proceed even if validation fails (diagnostics)
        #[arg(long)]
        force: bool,
    },
    /// Enumerate cycle words and their weight sums per min-set
    Cyclewords {
        config: PathBuf,
        /// Maximum word length
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        force: bool,
    },
    /// Emit the weighted frame multiset
    Frame {
        config: PathBuf,
        /// Maximum word length
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        #[arg(long)]
        force: bool,
    },
    /// Numerical verification: transfer normalization, orthogonality,
    /// Markov weight sums, and Parseval partial sums
    Verify {
        config: PathBuf,
        /// Maximum word length for the frame truncation
        #[arg(long)]
        depth: Option<usize>,
        /// Number of product terms for the transform
        #[arg(long)]
        terms: Option<usize>,
        /// Comma-separated evaluation points (integers, fractions `p/q`, or decimals)
        #[arg(long)]
        points: Option<String>,
        #[arg(long)]
        force: bool,
    },
    /// Structural checks for scale 4 with digits {0, 2}
    Theory {
        config: PathBuf,
        /// Search bound for point-form exponents
        #[arg(long)]
        depth: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

enum CliError {
    /// Unreadable, unparsable, or schema-invalid configuration: exit 2.
    Config(String),
    /// Validation or runtime failure: exit 1.
    Run(String),
}

impl From<fourier_frames::Error> for CliError {
    fn from(e: fourier_frames::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run() -> Result<u8, CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => cmd_validate(&config),
        Command::Minsets { config, dot, force } => cmd_minsets(&config, dot.as_deref(), force),
        Command::Cyclewords {
            config,
            depth,
            force,
        } => cmd_cyclewords(&config, depth, force),
        Command::Frame {
            config,
            depth,
            format,
            force,
        } => cmd_frame(&config, depth, format, force),
        Command::Verify {
            config,
            depth,
            terms,
            points,
            force,
        } => cmd_verify(&config, depth, terms, points.as_deref(), force),
        Command::Theory { config, depth } => cmd_theory(&config, depth),
    }
}

// ---------------------------------------------------------------------------
// Configuration.

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    version: String,
    #[serde(rename = "R")]
    scale: i64,
    #[serde(rename = "B")]
    digits: Vec<i64>,
    #[serde(rename = "L")]
    freq_digits: Vec<i64>,
    /// One `[re, im]` pair per frequency digit.
    alpha: Vec<[f64; 2]>,
    depth: Option<usize>,
    terms: Option<usize>,
    parseval_tolerance: Option<f64>,
}

struct Loaded {
    sys: FrameSystem,
    depth: usize,
    terms: usize,
    parseval_tolerance: f64,
}

fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: Config = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
    if config.version != "v1" {
        return Err(CliError::Config(format!(
            "unsupported config version {:?} (expected \"v1\")",
            config.version
        )));
    }
    let alphas: Vec<Complex64> = config
        .alpha
        .iter()
        .map(|[re, im]| Complex64::new(*re, *im))
        .collect();
    let sys = FrameSystem::new(config.scale, config.digits, config.freq_digits, alphas)
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(Loaded {
        sys,
        depth: config.depth.unwrap_or(DEFAULT_DEPTH),
        terms: config.terms.unwrap_or(DEFAULT_TERMS),
        parseval_tolerance: config
            .parseval_tolerance
            .unwrap_or(DEFAULT_PARSEVAL_TOLERANCE),
    })
}

/// Min-sets behind the validation gate, or past it with `--force`.
fn min_sets_of(sys: &FrameSystem, force: bool) -> Result<Vec<MinSet>, CliError> {
    if force {
        Ok(find_min_sets_unchecked(sys)?)
    } else {
        Ok(find_min_sets(sys)?)
    }
}

fn parse_rational(text: &str) -> Result<Rational, CliError> {
    let s = text.trim();
    let bad = |_| CliError::Config(format!("cannot parse {s:?} as a rational"));
    if let Some((num, den)) = s.split_once('/') {
        let n: i64 = num.trim().parse().map_err(bad)?;
        let d: i64 = den.trim().parse().map_err(bad)?;
        if d == 0 {
            return Err(CliError::Config(format!("zero denominator in {s:?}")));
        }
        return Ok(fourier_frames::algebra::rational(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.trim_start().starts_with('-');
        let i: i64 = if int_part == "-" || int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(bad)?
        };
        let digits = frac_part.trim();
        let f: i64 = if digits.is_empty() {
            0
        } else {
            digits.parse().map_err(bad)?
        };
        let den = 10i64.pow(digits.len() as u32);
        let num = i.abs() * den + f;
        let num = if negative { -num } else { num };
        return Ok(fourier_frames::algebra::rational(num, den));
    }
    let n: i64 = s.parse().map_err(bad)?;
    Ok(fourier_frames::algebra::integer(n))
}

// ---------------------------------------------------------------------------
// Subcommands.

fn cmd_validate(config: &Path) -> Result<u8, CliError> {
    let loaded = load(config)?;
    let report = loaded.sys.validate();
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(if report.passed { 0 } else { 1 })
}

#[derive(Serialize)]
struct MinSetDto {
    representative: String,
    points: Vec<String>,
    edges: Vec<EdgeDto>,
}

#[derive(Serialize)]
struct EdgeDto {
    source: String,
    digit: i64,
    target: String,
}

fn min_set_dto(m: &MinSet) -> MinSetDto {
    MinSetDto {
        representative: m.representative.to_string(),
        points: m.points.iter().map(|p| p.to_string()).collect(),
        edges: m
            .edges
            .iter()
            .map(|e| EdgeDto {
                source: e.source.to_string(),
                digit: e.digit,
                target: e.target.to_string(),
            })
            .collect(),
    }
}

fn cmd_minsets(config: &Path, dot_dir: Option<&Path>, force: bool) -> Result<u8, CliError> {
    let loaded = load(config)?;
    let min_sets = min_sets_of(&loaded.sys, force)?;
    let dtos: Vec<MinSetDto> = min_sets.iter().map(min_set_dto).collect();
    println!(
        "{}",
        serde_json::to_string_pretty(&dtos).expect("min-sets serialize")
    );
    if let Some(dir) = dot_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Run(format!("cannot create {}: {e}", dir.display())))?;
        for (i, m) in min_sets.iter().enumerate() {
            let path = dir.join(format!("minset_{i}.dot"));
            std::fs::write(&path, m.to_dot())
                .map_err(|e| CliError::Run(format!("cannot write {}: {e}", path.display())))?;
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct CycleWordsDto {
    representative: String,
    max_len: usize,
    cycle_words: Vec<String>,
    weight_sum: f64,
}

fn cmd_cyclewords(config: &Path, depth: Option<usize>, force: bool) -> Result<u8, CliError> {
    let loaded = load(config)?;
    let max_len = depth.unwrap_or(loaded.depth);
    let min_sets = min_sets_of(&loaded.sys, force)?;
    let mut out = Vec::new();
    for m in &min_sets {
        let c = &m.representative;
        let words = cycle_words_for(&loaded.sys, c, max_len)?;
        let weight_sum = cycle_word_weight_sum(&loaded.sys, m, c, max_len)?;
        out.push(CycleWordsDto {
            representative: c.to_string(),
            max_len,
            cycle_words: words.iter().map(|w| w.to_string()).collect(),
            weight_sum,
        });
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&out).expect("cycle words serialize")
    );
    Ok(0)
}

#[derive(Serialize)]
struct FrameElementDto {
    frequency: String,
    weight: [f64; 2],
    source: String,
    word: String,
}

fn cmd_frame(
    config: &Path,
    depth: Option<usize>,
    format: OutputFormat,
    force: bool,
) -> Result<u8, CliError> {
    let loaded = load(config)?;
    let depth = depth.unwrap_or(loaded.depth);
    let min_sets = min_sets_of(&loaded.sys, force)?;
    let elements = frame_multiset_for(&loaded.sys, &min_sets, depth)?;
    match format {
        OutputFormat::Csv => {
            println!("frequency,weight_re,weight_im,source,word");
            for e in &elements {
                println!(
                    "{},{:.17e},{:.17e},{},{}",
                    e.frequency, e.weight.re, e.weight.im, e.source, e.word
                );
            }
        }
        OutputFormat::Json => {
            let dtos: Vec<FrameElementDto> = elements.iter().map(frame_element_dto).collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&dtos).expect("frame serializes")
            );
        }
    }
    Ok(0)
}

fn frame_element_dto(e: &FrameElement) -> FrameElementDto {
    FrameElementDto {
        frequency: e.frequency.to_string(),
        weight: [e.weight.re, e.weight.im],
        source: e.source.to_string(),
        word: e.word.to_string(),
    }
}

#[derive(Serialize)]
struct VerifyReport {
    validation_passed: bool,
    depth: usize,
    terms: usize,
    transfer_normalization: Vec<TransferDto>,
    max_transfer_residual: f64,
    cycle_orthogonality: OrthogonalityDto,
    markov: Vec<MarkovDto>,
    parseval: Vec<ParsevalDto>,
    parseval_tolerance: f64,
    parseval_within_tolerance: bool,
}

#[derive(Serialize)]
struct TransferDto {
    t: String,
    value: f64,
    residual: f64,
}

#[derive(Serialize)]
struct OrthogonalityDto {
    points: Vec<String>,
    magnitudes: Vec<Vec<f64>>,
    max_off_diagonal: f64,
}

#[derive(Serialize)]
struct MarkovDto {
    representative: String,
    cycle_word_weight_sum: f64,
    first_passage: Vec<FirstPassageDto>,
}

#[derive(Serialize)]
struct FirstPassageDto {
    from: String,
    to: String,
    weight_sum: f64,
}

#[derive(Serialize)]
struct ParsevalDto {
    t: String,
    partial_sum: f64,
    defect: f64,
    elements: usize,
    /// Residual of the one-step invariance relation
    /// `h(t) = sum_l |alpha_l|^2 |m_B(g_l(t))|^2 h(g_l(t))` evaluated on the
    /// truncated partial sums. Diagnostic only: it vanishes in the limit but
    /// carries truncation error at finite depth, so no tolerance applies.
    invariance_residual: f64,
}

fn cmd_verify(
    config: &Path,
    depth: Option<usize>,
    terms: Option<usize>,
    points: Option<&str>,
    force: bool,
) -> Result<u8, CliError> {
    let loaded = load(config)?;
    let depth = depth.unwrap_or(loaded.depth);
    let terms = terms.unwrap_or(loaded.terms);
    let report = loaded.sys.validate();
    if !report.passed && !force {
        eprintln!(
            "error: system failed validation: {} (use --force for diagnostics)",
            report.failure_summary()
        );
        return Ok(1);
    }
    let min_sets = min_sets_of(&loaded.sys, force)?;

    let eval_points: Vec<Rational> = match points {
        Some(list) => list
            .split(',')
            .map(parse_rational)
            .collect::<Result<_, _>>()?,
        None => min_sets.iter().map(|m| m.representative.clone()).collect(),
    };

    let transfer: Vec<TransferDto> = eval_points
        .iter()
        .map(|t| {
            let tf = t.to_f64().unwrap_or(f64::NAN);
            let value = transfer_normalization(&loaded.sys, tf);
            TransferDto {
                t: t.to_string(),
                value,
                residual: (value - 1.0).abs(),
            }
        })
        .collect();
    let max_transfer_residual = transfer.iter().map(|e| e.residual).fold(0.0, f64::max);

    let ortho = cycle_orthogonality_matrix_for(&loaded.sys, &min_sets, terms);
    let orthogonality = OrthogonalityDto {
        points: ortho.points.iter().map(|p| p.to_string()).collect(),
        max_off_diagonal: ortho.max_off_diagonal(),
        magnitudes: ortho.magnitudes,
    };

    let mut markov = Vec::new();
    for m in &min_sets {
        let c = &m.representative;
        let mut first_passage = Vec::new();
        for p in m.points.iter().rev() {
            if p != c {
                first_passage.push(FirstPassageDto {
                    from: p.to_string(),
                    to: c.to_string(),
                    weight_sum: first_passage_weight_sum(&loaded.sys, m, p, c, depth)?,
                });
            }
        }
        markov.push(MarkovDto {
            representative: c.to_string(),
            cycle_word_weight_sum: cycle_word_weight_sum(&loaded.sys, m, c, depth)?,
            first_passage,
        });
    }

    // Batch the evaluation points together with their one-step images
    // (t - l)/R so the invariance residual reuses a single enumeration pass.
    let freq_digits: Vec<i64> = loaded.sys.freq_digits().to_vec();
    let scale = fourier_frames::algebra::integer(loaded.sys.scale());
    let mut batched: Vec<Scalar> = Vec::new();
    for t in &eval_points {
        batched.push(Scalar::Exact(t.clone()));
        for &l in &freq_digits {
            let image = (t - fourier_frames::algebra::integer(l)) / scale.clone();
            batched.push(Scalar::Exact(image));
        }
    }
    let sums = parseval_defect_many_for(&loaded.sys, &min_sets, &batched, depth, terms)?;
    let stride = 1 + freq_digits.len();
    let parseval: Vec<ParsevalDto> = eval_points
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let at_t = &sums[i * stride];
            let mut propagated = 0.0;
            let tf = t.to_f64().unwrap_or(f64::NAN);
            for (j, &l) in freq_digits.iter().enumerate() {
                let weight = loaded.sys.alphas()[j].norm_sqr();
                let image = (tf - l as f64) / loaded.sys.scale() as f64;
                let factor = loaded.sys.mb_f64(image).norm_sqr();
                propagated += weight * factor * sums[i * stride + 1 + j].partial_sum;
            }
            ParsevalDto {
                t: t.to_string(),
                partial_sum: at_t.partial_sum,
                defect: at_t.defect,
                elements: at_t.element_count,
                invariance_residual: (at_t.partial_sum - propagated).abs(),
            }
        })
        .collect();
    let sums: Vec<fourier_frames::measure::ParsevalSum> = eval_points
        .iter()
        .enumerate()
        .map(|(i, _)| sums[i * stride])
        .collect();
    let parseval_within_tolerance = sums
        .iter()
        .all(|s| s.defect.abs() <= loaded.parseval_tolerance);

    let out = VerifyReport {
        validation_passed: report.passed,
        depth,
        terms,
        transfer_normalization: transfer,
        max_transfer_residual,
        cycle_orthogonality: orthogonality,
        markov,
        parseval,
        parseval_tolerance: loaded.parseval_tolerance,
        parseval_within_tolerance,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&out).expect("verify report serializes")
    );
    Ok(0)
}

#[derive(Serialize)]
struct TheoryReport {
    residue_mix_screen: bool,
    pair_residue_condition: Option<PairConditionDto>,
    min_sets: Vec<TheoryMinSetDto>,
}

#[derive(Serialize)]
struct PairConditionDto {
    a: i64,
    b: i64,
    holds: bool,
}

#[derive(Serialize)]
struct TheoryMinSetDto {
    representative: String,
    points: Vec<String>,
    point_forms: Option<BTreeMap<String, Option<PointFormDto>>>,
    decompositions: Vec<DecompositionDto>,
}

#[derive(Serialize)]
struct PointFormDto {
    n: u32,
    digits: Vec<i64>,
}

#[derive(Serialize)]
struct DecompositionDto {
    point: String,
    sub_digit: i64,
    cycle_point: String,
    word: String,
    steps: usize,
}

fn cmd_theory(config: &Path, depth: Option<usize>) -> Result<u8, CliError> {
    let loaded = load(config)?;
    let sys = &loaded.sys;
    let max_n = depth.unwrap_or(loaded.depth) as u32;
    let screen = theory::residue_mix_screen(sys)?;

    let mut freqs: Vec<i64> = sys.freq_digits().to_vec();
    freqs.sort_unstable();
    let pair_residue_condition = match freqs.as_slice() {
        [0, a, b] if a.rem_euclid(4) == b.rem_euclid(4) => Some(PairConditionDto {
            a: *a,
            b: *b,
            holds: theory::pair_residue_condition(*a, *b)?,
        }),
        _ => None,
    };
    let has_three_family = freqs.len() == 3 && freqs[0] == 0 && freqs[1] == 3;

    let min_sets = find_min_sets(sys)?;
    let mut dtos = Vec::new();
    for m in &min_sets {
        let trivial = m.points.len() == 1
            && m.representative == fourier_frames::algebra::integer(0);
        let point_forms = if !trivial && has_three_family {
            let mut forms = BTreeMap::new();
            for p in &m.points {
                let x0 = p.to_integer().to_i64();
                let form = x0.and_then(|x| theory::min_set_point_form(x, max_n));
                forms.insert(
                    p.to_string(),
                    form.map(|f| PointFormDto {
                        n: f.n,
                        digits: f.digits,
                    }),
                );
            }
            Some(forms)
        } else {
            None
        };
        let mut decompositions = Vec::new();
        if !trivial {
            for &a in sys.freq_digits() {
                if a == 0 {
                    continue;
                }
                for p in m.points.iter().rev() {
                    let d = theory::sub_digit_decomposition(sys, p, a)?;
                    decompositions.push(DecompositionDto {
                        point: p.to_string(),
                        sub_digit: a,
                        cycle_point: d.cycle_point.to_string(),
                        word: d.word.to_string(),
                        steps: d.steps,
                    });
                }
            }
        }
        dtos.push(TheoryMinSetDto {
            representative: m.representative.to_string(),
            points: m.points.iter().map(|p| p.to_string()).collect(),
            point_forms,
            decompositions,
        });
    }

    let out = TheoryReport {
        residue_mix_screen: screen,
        pair_residue_condition,
        min_sets: dtos,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&out).expect("theory report serializes")
    );
    Ok(0)
}

//! Command-line surface for the ambiguous-stabilizer-code toolkit.
//!
//! Every command is deterministic: identical inputs produce byte-identical
//! structured output.  The environment variable `ASC_LAB_SEED` is reserved
//! for future sampling support and is currently ignored; nothing here draws
//! random numbers.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use asc_core::ambiguity::{
    build_class, hamming_check, render_class_table, verify_ambiguous_group, AmbiguousClass,
    ErrorSet,
};
use asc_core::channel::{noise_preset, ProcessMatrix};
use asc_core::codes;
use asc_core::reconstruct::{characterize, render_report, resource_estimate};
use asc_core::simulate::{
    logical_input_amplitudes, parse_plan, run_plan, syndrome_distribution, Configuration,
    Preprocessing,
};
use asc_core::stabilizer::{normalizer_classes, render_normalizer_table};

#[derive(Parser)]
#[command(
    name = "asc-lab",
    about = "Ambiguous stabilizer codes: analysis, simulation, reconstruction",
    long_about = "Analyze syndrome partitions of stabilizer codes, simulate exact \
syndrome statistics for Pauli-basis noise, and reconstruct process matrices from \
them.\n\nAll commands are deterministic; ASC_LAB_SEED is reserved for future \
sampling support and is currently ignored."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Fixed-width tables, 6 digits.
    Human,
    /// JSON, 17 significant digits.
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Partition an error set by syndrome; report group structure and the
    /// Hamming bound.
    Analyze {
        /// Catalog code id (q3, q5, C1, C2, C3).
        #[arg(long)]
        code: String,
        /// 1-based qubit coordinates carrying arbitrary errors, e.g. "1,2".
        /// Defaults to the catalog entry's designated coordinates.
        #[arg(long)]
        coords: Option<String>,
        /// Use all errors up to this weight instead of a coordinate group.
        #[arg(long, conflicts_with = "coords")]
        weight: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
        /// Write output here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Group the phase-free normalizer by logical class.
    Normalizer {
        #[arg(long)]
        code: String,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate exact syndrome probabilities for a noise model.
    Simulate {
        /// Catalog code id for a single direct run (input |0_L>).
        #[arg(long, required_unless_present = "plan")]
        code: Option<String>,
        /// Noise preset (identity, EA, depolarizing(p)) or a noise file path.
        #[arg(long)]
        noise: String,
        /// Plan file (JSON array of {code, input, preprocessing} records).
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct a process matrix from exact statistics over a code family.
    Reconstruct {
        /// Comma-separated catalog code ids forming the family, e.g.
        /// "C1,C2,C3".
        #[arg(long, value_delimiter = ',', required = true)]
        code: Vec<String>,
        /// Noise preset or noise file path for the simulated channel.
        #[arg(long)]
        noise: String,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Preparation and configuration counts for a code family.
    Resources {
        /// Number of noisy qubits.
        #[arg(long)]
        m: usize,
        /// Degree of ambiguity of the family.
        #[arg(long)]
        gamma: usize,
        /// Logical qubits per code.
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), String> {
    match command {
        Command::Analyze {
            code,
            coords,
            weight,
            format,
            out,
        } => cmd_analyze(&code, coords.as_deref(), weight, format, out),
        Command::Normalizer { code, format, out } => cmd_normalizer(&code, format, out),
        Command::Simulate {
            code,
            noise,
            plan,
            format,
            out,
        } => cmd_simulate(code.as_deref(), &noise, plan, format, out),
        Command::Reconstruct {
            code,
            noise,
            format,
            out,
        } => cmd_reconstruct(&code, &noise, format, out),
        Command::Resources {
            m,
            gamma,
            k,
            format,
            out,
        } => cmd_resources(m, gamma, k, format, out),
    }
}

fn emit(out: Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => fs::write(&path, text)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parse 1-based coordinates such as "1,2" into 0-based indices.
fn parse_coords(text: &str, n: usize) -> Result<Vec<usize>, String> {
    let mut coords = Vec::new();
    for part in text.split(',') {
        let qubit: usize = part
            .trim()
            .parse()
            .map_err(|_| format!("invalid coordinate {part:?}"))?;
        if qubit == 0 || qubit > n {
            return Err(format!("coordinate {qubit} is outside 1..={n}"));
        }
        coords.push(qubit - 1);
    }
    Ok(coords)
}

/// Resolve a noise spec: a preset name first, then a file path.
fn load_noise(spec: &str, m: usize) -> Result<ProcessMatrix, String> {
    match noise_preset(spec, m) {
        Ok(chi) => Ok(chi),
        Err(asc_core::Error::UnknownPreset { .. }) => {
            let text = fs::read_to_string(spec).map_err(|e| {
                format!("noise spec {spec:?} is neither a preset nor a readable file: {e}")
            })?;
            let chi = ProcessMatrix::from_json(&text).map_err(|e| e.to_string())?;
            if chi.m() != m {
                return Err(format!(
                    "noise file describes {} qubits, the configuration needs {m}",
                    chi.m()
                ));
            }
            Ok(chi)
        }
        Err(other) => Err(other.to_string()),
    }
}

fn json_escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}

fn cmd_analyze(
    code_id: &str,
    coords: Option<&str>,
    weight: Option<usize>,
    format: Format,
    out: Option<PathBuf>,
) -> Result<(), String> {
    let entry = codes::get(code_id).map_err(|e| e.to_string())?;
    let code = entry.code();
    let n = code.n();
    let (errors, coord_list, description) = match (weight, coords) {
        (Some(w), _) => (
            ErrorSet::weight_at_most(n, w).map_err(|e| e.to_string())?,
            None,
            format!("all errors of weight <= {w}"),
        ),
        (None, spec) => {
            let list = match spec {
                Some(text) => parse_coords(text, n)?,
                None => entry.noisy_coords().to_vec(),
            };
            let display: Vec<String> = list.iter().map(|c| (c + 1).to_string()).collect();
            (
                ErrorSet::pauli_group_on(n, &list).map_err(|e| e.to_string())?,
                Some(list),
                format!("pauli group on coordinates {}", display.join(",")),
            )
        }
    };
    let class = build_class(code, &errors).map_err(|e| e.to_string())?;
    let group_ok = match &coord_list {
        Some(list) => Some(
            verify_ambiguous_group(code, list)
                .map(|(_, ok)| ok)
                .map_err(|e| e.to_string())?,
        ),
        None => None,
    };
    let (bound_ok, perfect) = hamming_check(n, code.k(), class.element_count());
    let text = match format {
        Format::Human => {
            let mut s = String::new();
            let _ = writeln!(s, "code {code_id} [[{n},{}]]", code.k());
            let _ = writeln!(s, "errors: {description} ({} elements)", class.element_count());
            let _ = writeln!(s);
            s.push_str(&render_class_table(&class));
            let _ = writeln!(s);
            let _ = writeln!(
                s,
                "sets (sigma): {}  degree (gamma): {}",
                class.order_sigma(),
                class.degree_gamma()
            );
            if let Some(ok) = group_ok {
                let _ = writeln!(
                    s,
                    "identity-syndrome set forms a group: {}",
                    if ok { "yes" } else { "no" }
                );
            }
            let _ = writeln!(
                s,
                "hamming bound 2^k * |E| <= 2^n: {}{}",
                if bound_ok { "satisfied" } else { "violated" },
                if perfect { " (perfect)" } else { "" }
            );
            s
        }
        Format::Structured => analyze_json(
            code_id,
            &class,
            &description,
            group_ok,
            bound_ok,
            perfect,
        ),
    };
    emit(out, &text)
}

fn analyze_json(
    code_id: &str,
    class: &AmbiguousClass,
    description: &str,
    group_ok: Option<bool>,
    bound_ok: bool,
    perfect: bool,
) -> String {
    let code = class.code();
    let mut s = String::from("{\n");
    let _ = writeln!(s, "  \"code\": \"{}\",", json_escape(code_id));
    let _ = writeln!(s, "  \"n\": {},", code.n());
    let _ = writeln!(s, "  \"k\": {},", code.k());
    let _ = writeln!(s, "  \"errors\": \"{}\",", json_escape(description));
    let _ = writeln!(s, "  \"element_count\": {},", class.element_count());
    let _ = writeln!(s, "  \"sigma\": {},", class.order_sigma());
    let _ = writeln!(s, "  \"gamma\": {},", class.degree_gamma());
    let group = match group_ok {
        Some(true) => "true",
        Some(false) => "false",
        None => "null",
    };
    let _ = writeln!(s, "  \"identity_set_is_group\": {group},");
    let _ = writeln!(s, "  \"hamming_satisfied\": {bound_ok},");
    let _ = writeln!(s, "  \"hamming_perfect\": {perfect},");
    s.push_str("  \"sets\": [\n");
    let total = class.sets().len();
    for (index, (syndrome, elements)) in class.sets().iter().enumerate() {
        let items: Vec<String> = elements
            .iter()
            .map(|e| format!("\"{}\"", json_escape(&e.to_string())))
            .collect();
        let comma = if index + 1 < total { "," } else { "" };
        let _ = writeln!(
            s,
            "    {{\"syndrome\": \"{}\", \"elements\": [{}]}}{}",
            syndrome,
            items.join(", "),
            comma
        );
    }
    s.push_str("  ]\n}\n");
    s
}

fn cmd_normalizer(code_id: &str, format: Format, out: Option<PathBuf>) -> Result<(), String> {
    let entry = codes::get(code_id).map_err(|e| e.to_string())?;
    let text = match format {
        Format::Human => render_normalizer_table(entry.code()).map_err(|e| e.to_string())?,
        Format::Structured => {
            let classes = normalizer_classes(entry.code()).map_err(|e| e.to_string())?;
            let mut s = String::from("{\n  \"classes\": [\n");
            let total = classes.len();
            for (index, (label, elements)) in classes.iter().enumerate() {
                let items: Vec<String> = elements
                    .iter()
                    .map(|e| format!("\"{}\"", json_escape(&e.to_string())))
                    .collect();
                let comma = if index + 1 < total { "," } else { "" };
                let _ = writeln!(
                    s,
                    "    {{\"label\": \"{}\", \"elements\": [{}]}}{}",
                    json_escape(label),
                    items.join(", "),
                    comma
                );
            }
            s.push_str("  ]\n}\n");
            s
        }
    };
    emit(out, &text)
}

fn cmd_simulate(
    code_id: Option<&str>,
    noise: &str,
    plan: Option<PathBuf>,
    format: Format,
    out: Option<PathBuf>,
) -> Result<(), String> {
    if let Some(path) = plan {
        let plan_text = fs::read_to_string(&path)
            .map_err(|e| format!("cannot read plan {}: {e}", path.display()))?;
        let records = parse_plan(&plan_text).map_err(|e| e.to_string())?;
        let Some(first) = records.first() else {
            return Err("plan file contains no records".into());
        };
        let m = codes::get(&first.code)
            .map_err(|e| e.to_string())?
            .noisy_coords()
            .len();
        let chi = load_noise(noise, m)?;
        let (outcomes, warnings) = run_plan(&records, &chi).map_err(|e| e.to_string())?;
        for warning in warnings {
            eprintln!("warning: {warning}");
        }
        let text = match format {
            Format::Human => {
                let mut s = String::new();
                for o in &outcomes {
                    let _ = writeln!(s, "{:>4} {} {:.6}", o.plan_index, o.syndrome, o.probability);
                }
                s
            }
            Format::Structured => {
                let mut s = String::from("[\n");
                let total = outcomes.len();
                for (index, o) in outcomes.iter().enumerate() {
                    let comma = if index + 1 < total { "," } else { "" };
                    let _ = writeln!(
                        s,
                        "  {{\"plan_index\": {}, \"syndrome\": \"{}\", \"probability\": {:.16e}}}{}",
                        o.plan_index, o.syndrome, o.probability, comma
                    );
                }
                s.push_str("]\n");
                s
            }
        };
        return emit(out, &text);
    }
    let code_id = code_id.expect("clap enforces code or plan");
    let entry = codes::get(code_id).map_err(|e| e.to_string())?;
    let m = entry.noisy_coords().len();
    let chi = load_noise(noise, m)?;
    let input =
        logical_input_amplitudes("0L", entry.code().k()).map_err(|e| e.to_string())?;
    let config =
        Configuration::for_entry(&entry, input, Preprocessing::None).map_err(|e| e.to_string())?;
    let distribution = syndrome_distribution(&config, &chi).map_err(|e| e.to_string())?;
    if distribution.outside_support() {
        eprintln!("warning: noise has weight outside the configured error set");
    }
    let text = match format {
        Format::Human => {
            let mut s = String::new();
            for (syndrome, p) in distribution.probabilities() {
                let _ = writeln!(s, "{syndrome} {p:.6}");
            }
            s
        }
        Format::Structured => {
            let mut s = String::from("[\n");
            let total = distribution.probabilities().len();
            for (index, (syndrome, p)) in distribution.probabilities().iter().enumerate() {
                let comma = if index + 1 < total { "," } else { "" };
                let _ = writeln!(
                    s,
                    "  {{\"syndrome\": \"{syndrome}\", \"probability\": {p:.16e}}}{comma}"
                );
            }
            s.push_str("]\n");
            s
        }
    };
    emit(out, &text)
}

fn cmd_reconstruct(
    code_ids: &[String],
    noise: &str,
    format: Format,
    out: Option<PathBuf>,
) -> Result<(), String> {
    let mut entries = Vec::new();
    for id in code_ids {
        entries.push(codes::get(id).map_err(|e| e.to_string())?);
    }
    let Some(first) = entries.first() else {
        return Err("at least one code id is required".into());
    };
    let m = first.noisy_coords().len();
    let chi = load_noise(noise, m)?;
    let report = characterize(&entries, &chi).map_err(|e| e.to_string())?;
    if !report.unresolved().is_empty() {
        eprintln!(
            "warning: {} of {} parameters unresolved with this code family",
            report.unresolved().len(),
            report.resolved().len() + report.unresolved().len()
        );
    }
    emit(out, &render_report(&report, format == Format::Structured))
}

fn cmd_resources(
    m: usize,
    gamma: usize,
    k: usize,
    format: Format,
    out: Option<PathBuf>,
) -> Result<(), String> {
    let estimate = resource_estimate(m, gamma, k).map_err(|e| e.to_string())?;
    let text = match format {
        Format::Human => format!(
            "preparations   {}\nconfigurations {}\n",
            estimate.preparations, estimate.configurations
        ),
        Format::Structured => format!(
            "{{\"preparations\": {}, \"configurations\": {}}}\n",
            estimate.preparations, estimate.configurations
        ),
    };
    emit(out, &text)
}

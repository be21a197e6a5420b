use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use infoconv::{
    build_gate_pair, coarse_grain_tpm, effective_information, induced_past_distribution,
    network_pid, network_to_tpm, pearson, run_expansion_experiment, spectrum_and_bias,
    stationary_distribution, temporal_pid, BoolNetwork, EnsembleKind, EnsembleSpec, ExoPolicy,
    ExpansionTable, GateKind, StateDistribution, StatePartition, StochasticMatrix, Tpm,
};

use crate::output::{ensure_dir, write_csv, write_json};
use crate::{svg, Format, InputArg, KindArg};

/// Raised when every system of an ensemble was skipped.
#[derive(Debug)]
struct EmptyEnsemble(EnsembleKind);

impl fmt::Display for EmptyEnsemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "every {} system was skipped: synergy bias undefined",
            self.0
        )
    }
}

impl std::error::Error for EmptyEnsemble {}

/// 2 for invalid input, 3 for numerical failures, 1 for anything else.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<infoconv::Error>() {
            return if err.is_numerical() { 3 } else { 2 };
        }
        if cause.is::<EmptyEnsemble>() {
            return 3;
        }
        if cause.is::<serde_json::Error>() {
            return 2;
        }
    }
    1
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(value: &Value, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                ensure_dir(dir)?;
            }
            write_json(path, value)
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, value)?;
            writeln!(stdout)?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct GateRow {
    gate: String,
    micro_mi: f64,
    macro_mi: f64,
    micro_bsyn: f64,
    macro_bsyn: f64,
}

pub fn logic_gates(out: &Path, format: Format) -> Result<()> {
    ensure_dir(out)?;
    let mut rows = Vec::new();
    for kind in GateKind::ALL {
        let pair = build_gate_pair(kind);
        let exo = ExoPolicy::uniform(2);
        let micro = network_pid(&pair.micro_net, &exo)?;
        let macro_ = network_pid(&pair.macro_net, &exo)?;
        rows.push(GateRow {
            gate: kind.to_string(),
            micro_mi: micro.total_mi(),
            macro_mi: macro_.total_mi(),
            micro_bsyn: spectrum_and_bias(&micro)?.b_syn,
            macro_bsyn: spectrum_and_bias(&macro_)?.b_syn,
        });
        let spectra = json!({
            "gate": kind.to_string(),
            "micro": micro.to_json(),
            "macro": macro_.to_json(),
        });
        write_json(
            &out.join(format!("spectrum_{}.json", kind.to_string().to_lowercase())),
            &spectra,
        )?;
    }
    match format {
        Format::Csv => write_csv(&out.join("logic_gates.csv"), &rows),
        Format::Json => write_json(&out.join("logic_gates.json"), &rows),
    }
}

pub struct ExpansionArgs {
    pub seed: u64,
    pub n_systems: usize,
    pub kind: KindArg,
    pub levels: usize,
    pub split_element: usize,
    pub out: PathBuf,
    pub format: Format,
    pub svg: bool,
}

#[derive(Serialize)]
struct ExpansionRow {
    system_id: usize,
    kind: EnsembleKind,
    macro_bsyn: f64,
    meso_bsyn: f64,
    micro_bsyn: Option<f64>,
    mi_bits: f64,
    gain: f64,
}

#[derive(Serialize)]
struct ScatterRow {
    system_id: usize,
    macro_bsyn: f64,
    gain_macro_minus_finest: f64,
    gain_finest_minus_macro: f64,
}

fn write_records<T: Serialize>(out: &Path, stem: &str, format: Format, rows: &[T]) -> Result<()> {
    match format {
        Format::Csv => write_csv(&out.join(format!("{stem}.csv")), rows),
        Format::Json => write_json(&out.join(format!("{stem}.json")), rows),
    }
}

fn write_table(args: &ExpansionArgs, table: &ExpansionTable) -> Result<()> {
    let kind = table.spec.kind;
    let rows: Vec<ExpansionRow> = table
        .systems
        .iter()
        .map(|s| ExpansionRow {
            system_id: s.system_id,
            kind: s.kind,
            macro_bsyn: s.macro_bsyn,
            meso_bsyn: s.meso_bsyn,
            micro_bsyn: s.micro_bsyn,
            mi_bits: s.mi_bits,
            gain: s.gain,
        })
        .collect();
    write_records(&args.out, &format!("expansion_{kind}"), args.format, &rows)?;

    let scatter: Vec<ScatterRow> = table
        .systems
        .iter()
        .map(|s| ScatterRow {
            system_id: s.system_id,
            macro_bsyn: s.macro_bsyn,
            gain_macro_minus_finest: s.gain,
            gain_finest_minus_macro: -s.gain,
        })
        .collect();
    write_records(&args.out, &format!("scatter_{kind}"), args.format, &scatter)?;

    let summary = json!({
        "summary": table.summary(),
        "split_element": table.split_element,
        "skipped": table.skipped,
    });
    write_json(&args.out.join(format!("summary_{kind}.json")), &summary)
}

pub fn expansion(args: &ExpansionArgs) -> Result<()> {
    if args.n_systems < 2 {
        return Err(infoconv::Error::InvalidArgument(format!(
            "n-systems must be at least 2, got {}",
            args.n_systems
        ))
        .into());
    }
    let kinds: &[EnsembleKind] = match args.kind {
        KindArg::Gaussian => &[EnsembleKind::Gaussian],
        KindArg::Deterministic => &[EnsembleKind::Deterministic],
        KindArg::Both => &[EnsembleKind::Gaussian, EnsembleKind::Deterministic],
    };
    let mut tables = Vec::new();
    for &kind in kinds {
        let spec = EnsembleSpec::new(kind, args.n_systems, args.seed)?;
        let table = run_expansion_experiment(&spec, args.levels, args.split_element)?;
        if table.systems.is_empty() {
            return Err(EmptyEnsemble(kind).into());
        }
        tables.push(table);
    }

    ensure_dir(&args.out)?;
    for table in &tables {
        write_table(args, table)?;
    }
    if tables.len() > 1 {
        let (xs, gains): (Vec<f64>, Vec<f64>) = tables
            .iter()
            .flat_map(|t| t.systems.iter().map(|s| (s.macro_bsyn, s.gain)))
            .unzip();
        let (rho, p_value) = match pearson(&xs, &gains) {
            Ok((r, p)) => (Some(r), Some(p)),
            Err(_) => (None, None),
        };
        let pooled = json!({
            "kinds": tables.iter().map(|t| t.spec.kind).collect::<Vec<_>>(),
            "seed": args.seed,
            "levels": args.levels,
            "n_completed": xs.len(),
            "rho": rho,
            "p_value": p_value,
            "positive_gain_fraction":
                gains.iter().filter(|&&g| g > 0.0).count() as f64 / gains.len() as f64,
        });
        write_json(&args.out.join("summary_pooled.json"), &pooled)?;
    }
    if args.svg {
        let path = args.out.join("scatter.svg");
        fs::write(&path, svg::scatter(&tables))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn read_matrix(path: &Path) -> Result<StochasticMatrix> {
    let value: Value = read_json(path)?;
    let rows = match value {
        Value::Object(mut map) => map.remove("rows").unwrap_or(Value::Null),
        other => other,
    };
    let rows: Vec<Vec<f64>> = serde_json::from_value(rows).with_context(|| {
        format!(
            "{}: expected a row array or an object with `rows`",
            path.display()
        )
    })?;
    Ok(StochasticMatrix::from_rows(rows)?)
}

pub fn ei_scan(tpm: &Path, partition: &Path, out: Option<&Path>) -> Result<()> {
    let micro = read_matrix(tpm)?;
    let partition: StatePartition = read_json(partition)?;
    let macro_ = coarse_grain_tpm(&micro, &partition)?;
    let (micro_ei, macro_ei) = (
        effective_information(&micro),
        effective_information(&macro_),
    );
    let report = json!({
        "n_micro": partition.n_micro(),
        "n_macro": partition.n_macro(),
        "partition": partition.mapping(),
        "micro": micro_ei,
        "macro": macro_ei,
        "delta": micro_ei.delta(&macro_ei),
        "macro_tpm": macro_.to_rows(),
    });
    emit(&report, out)
}

pub fn pid(
    tpm: Option<&Path>,
    network: Option<&Path>,
    input: InputArg,
    out: Option<&Path>,
) -> Result<()> {
    let (t, dist, source) = match (tpm, network) {
        (Some(path), _) => {
            let t: Tpm = read_json(path)?;
            let dist = match input {
                InputArg::Stationary => stationary_distribution(&t)?,
                InputArg::Uniform => StateDistribution::uniform(t.n_elements()),
            };
            (t, dist, "tpm")
        }
        (None, Some(path)) => {
            let net: BoolNetwork = read_json(path)?;
            let exo = ExoPolicy::uniform(net.exogenous().len());
            let t = network_to_tpm(&net, &exo)?;
            let dist = match input {
                InputArg::Stationary => induced_past_distribution(&net, &exo)?,
                InputArg::Uniform => StateDistribution::uniform(t.n_elements()),
            };
            (t, dist, "network")
        }
        (None, None) => {
            return Err(infoconv::Error::InvalidArgument("pass --tpm or --network".into()).into())
        }
    };
    let result = temporal_pid(&t, &dist)?;
    let input_name = match input {
        InputArg::Stationary => "stationary",
        InputArg::Uniform => "uniform",
    };
    let report = json!({
        "source": source,
        "input": input_name,
        "input_distribution": dist.probs(),
        "pid": result.to_json(),
    });
    emit(&report, out)
}

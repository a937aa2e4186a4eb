//! Subcommand implementations. Each returns an [`Outcome`]: a verdict-style
//! exit code plus a text and a JSON rendering of its report.

use std::fs;
use std::path::Path;

use rand::Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use uhatforge::compiler::compile_acceptor_at;
use uhatforge::error::{Error, Result};
use uhatforge::examples::{
    build_double, build_greater_than, build_sqrt2_example, formula_library, sqrt2_input, NamedFormula,
};
use uhatforge::lowering::{
    cpr_to_pc, eval_pc, flatten_input, lower_to_cpr_with, pc_alternations, pc_atom_count, pc_degree, pc_node_count,
    pc_size, PcDocument,
};
use uhatforge::ltl::{eval_all, lang_member, parse_with, Formula};
use uhatforge::predicate::Registry;
use uhatforge::rational::{rationalize_pc, rationalize_pc_checked};
use uhatforge::sampling::{random_sequence, substream};
use uhatforge::vm::{AnyUhat, Uhat};
use uhatforge::{Caps, QuadRat, Rat, Scalar};

use crate::seqfile::{parse_sequence, parse_vector};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Outcome {
    /// 0 accept/success, 1 reject/mismatch.
    pub code: i32,
    pub text: String,
    pub json: Value,
}

impl Outcome {
    fn new(command: &str, code: i32, text: String, mut json: Value) -> Self {
        if let Value::Object(map) = &mut json {
            map.insert("command".into(), json!(command));
            map.insert("version".into(), json!(VERSION));
        }
        Outcome { code, text, json }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}

/// Formula text with `#` comment lines blanked, so parse positions still
/// refer to the file.
fn formula_text(path: &Path) -> Result<String> {
    let text = read(path)?;
    Ok(text
        .lines()
        .map(|l| if l.trim_start().starts_with('#') { "" } else { l })
        .collect::<Vec<_>>()
        .join("\n"))
}

pub fn registry(preds: Option<&Path>) -> Result<Registry> {
    let mut reg = Registry::with_builtins();
    if let Some(p) = preds {
        reg.merge(&Registry::from_json(&read(p)?)?)?;
    }
    Ok(reg)
}

pub fn eval(formula: &Path, sequence: &Path, dim: Option<usize>, preds: Option<&Path>) -> Result<Outcome> {
    let reg = registry(preds)?;
    let data: Vec<Vec<Rat>> = parse_sequence(&read(sequence)?)?;
    let d = dim.unwrap_or(data[0].len());
    if data[0].len() != d {
        return Err(Error::InvalidArgument(format!(
            "sequence rows have {} entries but --dim is {d}",
            data[0].len()
        )));
    }
    let phi = parse_with(&formula_text(formula)?, d, &reg)?;
    let flags = eval_all(&phi, &data, &reg)?;
    let member = lang_member(&phi, &data, &reg)?;
    let verdict = if member { "accept" } else { "reject" };
    let mut text = format!("{verdict}\nposition flag\n");
    for (i, f) in flags.iter().enumerate() {
        text.push_str(&format!("{:>8} {}\n", i + 1, u8::from(*f)));
    }
    let json = json!({"verdict": verdict, "flags": flags, "length": data.len(), "formula": phi.to_string()});
    Ok(Outcome::new("eval", i32::from(!member), text, json))
}

fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn compile_formula(phi: &Formula, d: usize, reg: &Registry) -> Result<Uhat<Rat>> {
    let mut u = compile_acceptor_at(phi, d, reg)?;
    u.metadata.insert("formula_sha256".into(), sha256_hex(&phi.to_string()));
    Ok(u)
}

pub struct CompileArgs<'a> {
    pub formula: &'a Path,
    pub dim: Option<usize>,
    pub preds: Option<&'a Path>,
    pub out: Option<&'a Path>,
    pub self_check: usize,
    pub seed: u64,
}

const MAX_INFERRED_DIM: usize = 16;

pub fn compile(args: &CompileArgs) -> Result<Outcome> {
    let reg = registry(args.preds)?;
    let text = formula_text(args.formula)?;
    let (phi, d) = match args.dim {
        Some(0) => return Err(Error::InvalidArgument("--dim must be at least 1".into())),
        Some(d) => (parse_with(&text, d, &reg)?, d),
        // the smallest width under which every atom is well formed
        None => match (1..=MAX_INFERRED_DIM).find_map(|d| parse_with(&text, d, &reg).ok().map(|f| (f, d))) {
            Some(found) => found,
            None => (parse_with(&text, 1, &reg)?, 1),
        },
    };
    let u = compile_formula(&phi, d, &reg)?;
    let doc = u.to_json();

    let mut mismatch = None;
    for k in 0..args.self_check {
        let mut rng = substream(args.seed, k as u64);
        let len = rng.gen_range(1..=10);
        let seq = random_sequence(&mut rng, len, d, 8);
        if u.accepts(&seq)? != lang_member(&phi, &seq, &reg)? {
            mismatch = Some((k, seq));
            break;
        }
    }
    let summary = json!({
        "dim": d,
        "layers": u.layers().len(),
        "attention_layers": u.attention_layers(),
        "max_width": u.widths()?.into_iter().max().unwrap_or(0),
        "formula_sha256": u.metadata.get("formula_sha256"),
        "self_check": {"samples": args.self_check, "seed": args.seed, "mismatch": mismatch.as_ref().map(|(k, s)| json!({
            "sample": k,
            "sequence": s.iter().map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>()).collect::<Vec<_>>(),
        }))},
    });
    let code = i32::from(mismatch.is_some());
    let text = match args.out {
        Some(path) => {
            write(path, &doc)?;
            let mut t = format!(
                "wrote {} ({} layers, {} attention)\n",
                path.display(),
                u.layers().len(),
                u.attention_layers()
            );
            if args.self_check > 0 {
                t.push_str(&match &mismatch {
                    None => format!("self-check: {} samples agree (seed {})\n", args.self_check, args.seed),
                    Some((k, _)) => format!("self-check: sample {k} disagrees (seed {})\n", args.seed),
                });
            }
            t
        }
        None => format!("{doc}\n"),
    };
    Ok(Outcome::new("compile", code, text, summary))
}

fn machine(path: &Path) -> Result<AnyUhat> {
    AnyUhat::from_json(&read(path)?)
}

fn rows_json<S: Scalar>(rows: &[Vec<S>]) -> Value {
    json!(rows
        .iter()
        .map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn rows_text<S: Scalar>(rows: &[Vec<S>]) -> String {
    rows.iter()
        .map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ") + "\n")
        .collect()
}

pub fn run(uhat: &Path, sequence: &Path) -> Result<Outcome> {
    let text = read(sequence)?;
    let (json, text) = match machine(uhat)? {
        AnyUhat::Rational(u) => {
            let out = u.run(&parse_sequence::<Rat>(&text)?)?;
            (rows_json(&out), rows_text(&out))
        }
        AnyUhat::Quadratic(u) => {
            let out = u.run(&parse_sequence::<QuadRat>(&text)?)?;
            (rows_json(&out), rows_text(&out))
        }
    };
    Ok(Outcome::new("run", 0, text, json!({ "rows": json })))
}

pub fn accepts(uhat: &Path, sequence: &Path) -> Result<Outcome> {
    let text = read(sequence)?;
    let (score, accepted) = match machine(uhat)? {
        AnyUhat::Rational(u) => {
            let s = u.accept_score(&parse_sequence::<Rat>(&text)?)?;
            (s.to_string(), s.is_positive())
        }
        AnyUhat::Quadratic(u) => {
            let s = u.accept_score(&parse_sequence::<QuadRat>(&text)?)?;
            (s.to_string(), s.is_positive())
        }
    };
    let verdict = if accepted { "accept" } else { "reject" };
    Ok(Outcome::new(
        "accepts",
        i32::from(!accepted),
        format!("{verdict} (score {score})\n"),
        json!({"verdict": verdict, "score": score}),
    ))
}

/// `u` cut to its first `layers` layers, with `accept` replacing the stored
/// acceptance vector.
fn restrict<S: Scalar>(u: &Uhat<S>, layers: Option<usize>, accept: Option<&str>) -> Result<Uhat<S>> {
    let k = layers.unwrap_or(u.layers().len());
    if k > u.layers().len() {
        return Err(Error::InvalidArgument(format!(
            "machine has only {} layers",
            u.layers().len()
        )));
    }
    let t: Vec<S> = match accept {
        Some(text) => parse_vector(text)?,
        None if k == u.layers().len() => u.accept_vector().ok_or(Error::MissingAcceptVector)?.to_vec(),
        None => return Err(Error::InvalidArgument("--layers needs --accept-vector".into())),
    };
    u.prefix(k, Some(t))
}

fn lower_generic<S: Scalar>(u: &Uhat<S>, n: usize, caps: &Caps) -> Result<(PcDocument, Value)> {
    let cpr = lower_to_cpr_with(u, n, caps)?;
    let pc = cpr_to_pc(&cpr, u.accept_vector().ok_or(Error::MissingAcceptVector)?)?;
    let bound = 3 * u.attention_layers() + 2;
    let report = json!({
        "n": n,
        "field": S::FIELD,
        "layers": u.layers().len(),
        "nvars": cpr.nvars(),
        "assignments": cpr.assignment_count(),
        "atoms": pc_atom_count(&pc),
        "nodes": pc_node_count(&pc),
        "alternations": pc_alternations(&pc),
        "alternation_bound": bound,
        "degree": pc_degree(&pc),
        "size": pc_size(&pc),
    });
    Ok((PcDocument::new(&pc, cpr.nvars()), report))
}

fn report_text(report: &Value) -> String {
    match report {
        Value::Object(map) => map.iter().map(|(k, v)| format!("{k}: {v}\n")).collect(),
        other => format!("{other}\n"),
    }
}

pub struct LowerArgs<'a> {
    pub uhat: &'a Path,
    pub n: usize,
    pub layers: Option<usize>,
    pub accept: Option<&'a str>,
    pub out: Option<&'a Path>,
}

pub fn lower(args: &LowerArgs, caps: &Caps) -> Result<Outcome> {
    let n = args.n;
    let out = args.out;
    if n == 0 {
        return Err(Error::InvalidArgument("--n must be at least 1".into()));
    }
    let (doc, report) = match machine(args.uhat)? {
        AnyUhat::Rational(u) => lower_generic(&restrict(&u, args.layers, args.accept)?, n, caps)?,
        AnyUhat::Quadratic(u) => lower_generic(&restrict(&u, args.layers, args.accept)?, n, caps)?,
    };
    let body = serde_json::to_string(&doc)?;
    let text = match out {
        Some(path) => {
            write(path, &body)?;
            format!("wrote {}\n{}", path.display(), report_text(&report))
        }
        None => format!("{body}\n"),
    };
    Ok(Outcome::new("lower", 0, text, report))
}

fn pc_document(path: &Path) -> Result<PcDocument> {
    Ok(serde_json::from_str(&read(path)?)?)
}

pub struct EquivArgs<'a> {
    pub uhat: &'a Path,
    pub pc: &'a Path,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub grid: Option<i64>,
    pub layers: Option<usize>,
    pub accept: Option<&'a str>,
}

pub fn check_equiv(args: &EquivArgs, caps: &Caps) -> Result<Outcome> {
    let u = restrict(&machine(args.uhat)?.to_quadratic(), args.layers, args.accept)?;
    let doc = pc_document(args.pc)?;
    let pc = doc.constraint::<QuadRat>()?;
    let d = u.input_dim();
    let n = args.n;
    let probe = flatten_input(&u, &vec![vec![QuadRat::zero(); d]; n])?;
    if probe.len() != doc.nvars {
        return Err(Error::InvalidArgument(format!(
            "constraint has {} variables but the machine at n = {n} gives {}",
            doc.nvars,
            probe.len()
        )));
    }
    let agree =
        |data: &[Vec<QuadRat>]| -> Result<bool> { Ok(eval_pc(&pc, &flatten_input(&u, data)?)? == u.accepts(data)?) };
    let lift = |rows: Vec<Vec<Rat>>| -> Vec<Vec<QuadRat>> {
        rows.into_iter()
            .map(|r| r.into_iter().map(QuadRat::from).collect())
            .collect()
    };

    let mut witness: Option<Vec<Vec<QuadRat>>> = None;
    for k in 0..args.samples {
        let data = lift(random_sequence(&mut substream(args.seed, k as u64), n, d, 8));
        if !agree(&data)? {
            witness = Some(data);
            break;
        }
    }
    let mut grid_cases = 0usize;
    if let (None, Some(g)) = (&witness, args.grid) {
        let values: Vec<i64> = (-g..=g).collect();
        let cells = n * d;
        let total = (values.len() as u128).checked_pow(cells as u32).unwrap_or(u128::MAX);
        if total > caps.enumeration as u128 {
            return Err(Error::ResourceCap {
                what: format!("grid of {total} inputs"),
                cap: caps.enumeration,
            });
        }
        let mut idx = vec![0usize; cells];
        'grid: loop {
            let data: Vec<Vec<QuadRat>> = idx
                .chunks(d)
                .map(|c| c.iter().map(|&i| QuadRat::from(values[i])).collect())
                .collect();
            grid_cases += 1;
            if !agree(&data)? {
                witness = Some(data);
                break;
            }
            for k in (0..cells).rev() {
                idx[k] += 1;
                if idx[k] < values.len() {
                    continue 'grid;
                }
                idx[k] = 0;
            }
            break;
        }
    }
    let report = json!({
        "n": n,
        "samples": args.samples,
        "seed": args.seed,
        "grid_cases": grid_cases,
        "result": if witness.is_some() { "mismatch" } else { "equivalent" },
        "witness": witness.as_ref().map(|w| rows_json(w)),
    });
    let text = match &witness {
        None => format!(
            "equivalent on {} samples (seed {}) and {grid_cases} grid inputs\n",
            args.samples, args.seed
        ),
        Some(w) => format!("mismatch on input:\n{}", rows_text(w)),
    };
    Ok(Outcome::new("check-equiv", i32::from(witness.is_some()), text, report))
}

pub fn rationalize(pc_path: &Path, m: u64, out: Option<&Path>, verify: bool, caps: &Caps) -> Result<Outcome> {
    let doc = pc_document(pc_path)?;
    let pc = doc.constraint::<QuadRat>()?;
    let (rat, report) = if verify {
        rationalize_pc_checked(&pc, m, caps)?
    } else {
        rationalize_pc(&pc, m, caps)?
    };
    let fresh = PcDocument::new(&rat, doc.nvars);
    let body = serde_json::to_string(&fresh)?;
    let summary = json!({
        "m": m,
        "input_field": doc.field,
        "atoms": report.atoms,
        "rewritten": report.rewritten,
        "max_coefficient_size": report.max_coefficient_size,
        "verified": verify,
        "checked_inputs": report.checked_inputs,
    });
    // without --out the constraint file is rewritten in place
    let target = out.unwrap_or(pc_path);
    write(target, &body)?;
    let text = format!("wrote {}\n{}", target.display(), report_text(&summary));
    Ok(Outcome::new("rationalize", 0, text, summary))
}

const MACHINES: &[(&str, &str)] = &[
    (
        "double",
        "rational sequences with 2·r_i < r_(i+1) for consecutive entries",
    ),
    ("greater-than", "pairs (r, s) with r > s"),
    (
        "sqrt2",
        "machine over Q(sqrt2) accepting sqrt2-input iff alpha·beta = 2 and alpha = beta",
    ),
    (
        "sqrt2-input",
        "the fixed three-row input of the sqrt2 machine (sequence file)",
    ),
];

pub fn examples(name: Option<&str>, out: Option<&Path>, alpha: &str, beta: &str) -> Result<Outcome> {
    let library = formula_library();
    let Some(name) = name else {
        if let Some(dir) = out {
            return write_all_examples(dir, alpha, beta);
        }
        let mut text = String::from("machines:\n");
        for (n, about) in MACHINES {
            text.push_str(&format!("  {n:<14} {about}\n"));
        }
        text.push_str("formulas:\n");
        for f in &library {
            text.push_str(&format!("  {:<14} d={} {}\n", f.name, f.dim, f.formula));
        }
        let json = json!({
            "machines": MACHINES.iter().map(|(n, _)| *n).collect::<Vec<_>>(),
            "formulas": library.iter().map(|f| json!({"name": f.name, "dim": f.dim, "formula": f.formula.to_string()})).collect::<Vec<_>>(),
        });
        return Ok(Outcome::new("examples", 0, text, json));
    };
    let body = example_body(name, &library, alpha, beta)?;
    let text = match out {
        Some(path) => {
            write(path, &body)?;
            format!("wrote {}\n", path.display())
        }
        None => {
            if body.ends_with('\n') {
                body.clone()
            } else {
                format!("{body}\n")
            }
        }
    };
    Ok(Outcome::new(
        "examples",
        0,
        text,
        json!({"name": name, "content": body}),
    ))
}

fn example_body(name: &str, library: &[NamedFormula], alpha: &str, beta: &str) -> Result<String> {
    Ok(match name {
        "double" => build_double().to_json(),
        "greater-than" => build_greater_than().to_json(),
        "sqrt2" => build_sqrt2_example(alpha.parse()?, beta.parse()?)?.to_json(),
        "sqrt2-input" => rows_text(&sqrt2_input()),
        other => match library.iter().find(|f| f.name == other) {
            Some(f) => format!("{}\n", f.formula),
            None => return Err(Error::InvalidArgument(format!("unknown example `{other}`"))),
        },
    })
}

/// Every machine and formula as `<name>.json` / `<name>.seq` / `<name>.ltl`.
fn write_all_examples(dir: &Path, alpha: &str, beta: &str) -> Result<Outcome> {
    fs::create_dir_all(dir).map_err(|e| Error::InvalidArgument(format!("cannot create {}: {e}", dir.display())))?;
    let library = formula_library();
    let mut written = Vec::new();
    let names = MACHINES.iter().map(|(n, _)| *n).chain(library.iter().map(|f| f.name));
    for name in names {
        let ext = match name {
            "sqrt2-input" => "seq",
            _ if library.iter().any(|f| f.name == name) => "ltl",
            _ => "json",
        };
        let path = dir.join(format!("{name}.{ext}"));
        write(&path, &example_body(name, &library, alpha, beta)?)?;
        written.push(path.display().to_string());
    }
    let text = written.iter().map(|p| format!("wrote {p}\n")).collect();
    Ok(Outcome::new("examples", 0, text, json!({ "written": written })))
}

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::PathBuf;

use linext::mixing::{burn_in_steps, compare_chains, diameter_check, ScalingTable};
use linext::rational::MatrixJson;
use linext::rng::draw_seed;
use linext::spectral::nshape_union_matrix;
use linext::survey::{load_records, verify_all_resumable, SurveyRecord, SURVEY_MAX_SIZE};
use linext::{
    build_matrix, conjecture_check, exact_mixing_time, family_poset, inclusion_table,
    monotonicity_scan, nshape_rank_one_certificate, sample_extensions, scaling_experiment, BurnIn,
    ChainSpec, ExtensionSet, LinearExtension, Poset, VERSION,
};
use serde::Serialize;

use crate::output::{emit, json_document, meta_line, sibling, write_atomic, Meta};
use crate::{CliError, Command, Common, Format, PosetSource};

/// Largest size handled without `--long-running`.
const GATE_SIZE: usize = 6;

struct Ctx {
    meta: Meta,
    format: Format,
    out: Option<PathBuf>,
}

impl Ctx {
    fn new(command: &str, common: &Common) -> Result<Ctx, CliError> {
        if !(common.tol > 0.0 && common.tol.is_finite()) {
            return Err(CliError::Input(format!(
                "--tol must be positive, got {}",
                common.tol
            )));
        }
        let seed = common.seed.unwrap_or_else(|| {
            let s = draw_seed();
            eprintln!("seed: {s}");
            s
        });
        Ok(Ctx {
            meta: Meta {
                tool: "linext",
                version: VERSION,
                command: command.to_string(),
                seed,
                tol: common.tol,
            },
            format: common.format,
            out: common.out.clone(),
        })
    }

    fn seed(&self) -> u64 {
        self.meta.seed
    }

    fn tol(&self) -> f64 {
        self.meta.tol
    }

    fn json<T: Serialize>(&self, result: &T) -> Result<(), CliError> {
        emit(self.out.as_deref(), &json_document(&self.meta, result))
    }

    fn csv(&self, body: &str) -> Result<(), CliError> {
        emit(self.out.as_deref(), &(self.meta.csv_comment() + body))
    }

    /// JSON, or CSV via `to_csv` when the command has a tabular form.
    fn write<T: Serialize>(
        &self,
        result: &T,
        to_csv: Option<&dyn Fn() -> String>,
    ) -> Result<(), CliError> {
        match (self.format, to_csv) {
            (Format::Json, _) => self.json(result),
            (Format::Csv, Some(f)) => self.csv(&f()),
            (other, _) => Err(CliError::Input(format!(
                "format {other:?} is not available for {}",
                self.meta.command
            ))),
        }
    }
}

fn load_poset(src: &PosetSource) -> Result<Poset, CliError> {
    let p = match (&src.poset, &src.file, &src.family) {
        (Some(json), None, None) => Poset::parse_json(json)?,
        (None, Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            Poset::parse_json(&text)?
        }
        (None, None, Some(f)) => family_poset(f)?,
        (None, None, None) => {
            return Err(CliError::Input(
                "give one of --poset, --file or --family".into(),
            ))
        }
        _ => {
            return Err(CliError::Input(
                "--poset, --file and --family are mutually exclusive".into(),
            ))
        }
    };
    Ok(p)
}

fn check_epsilon(epsilon: f64) -> Result<(), CliError> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "--epsilon must lie in (0, 1), got {epsilon}"
        )))
    }
}

fn parse_chain(s: &str) -> Result<ChainSpec, CliError> {
    s.parse::<ChainSpec>().map_err(CliError::from)
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Spectrum { source, common } => spectrum(&Ctx::new("spectrum", &common)?, &source),
        Command::Survey {
            nmax,
            long_running,
            common,
        } => survey(&Ctx::new("survey", &common)?, nmax, long_running),
        Command::Mix {
            source,
            epsilon,
            chain,
            from_least,
            compare,
            common,
        } => mix(
            &Ctx::new("mix", &common)?,
            &source,
            epsilon,
            &chain,
            from_least,
            compare,
        ),
        Command::Scaling {
            n_from,
            n_to,
            count,
            epsilon,
            common,
        } => scaling(&Ctx::new("scaling", &common)?, n_from, n_to, count, epsilon),
        Command::Sample {
            source,
            count,
            paranoid,
            burn_in,
            common,
        } => sample(
            &Ctx::new("sample", &common)?,
            &source,
            count,
            paranoid,
            burn_in,
        ),
        Command::Nshape { n, k, common } => nshape(&Ctx::new("nshape", &common)?, n, k),
        Command::Diameter {
            source,
            count,
            common,
        } => diameter(&Ctx::new("diameter", &common)?, &source, count),
        Command::Scan { n, common } => scan(&Ctx::new("scan", &common)?, n),
        Command::Table { n, common } => table(&Ctx::new("table", &common)?, n),
        Command::Matrix {
            source,
            chain,
            common,
        } => matrix(&Ctx::new("matrix", &common)?, &source, &chain),
    }
}

#[derive(Serialize)]
struct TrivialReport {
    trivial: bool,
    n: usize,
    num_extensions: usize,
    message: &'static str,
}

fn spectrum(ctx: &Ctx, source: &PosetSource) -> Result<(), CliError> {
    let p = load_poset(source)?;
    if p.is_chain() {
        let msg = "poset is a chain: one linear extension, no second eigenvalue";
        eprintln!("{msg}");
        let r = TrivialReport {
            trivial: true,
            n: p.size(),
            num_extensions: 1,
            message: msg,
        };
        return ctx.write(&r, Some(&|| "index,eigenvalue\n0,1\n".to_string()));
    }
    let r = conjecture_check(&p, ctx.tol())?;
    let csv = || {
        let mut s = String::from("index,eigenvalue\n");
        for (i, e) in r.eigenvalues.iter().enumerate() {
            s.push_str(&format!("{i},{e}\n"));
        }
        s
    };
    ctx.write(&r, Some(&csv))?;
    if !r.verdict.satisfies_bound {
        return Err(CliError::Violation(format!(
            "second eigenvalue {} exceeds the bound {}",
            r.lambda2, r.bound_value
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct SurveyDocument<'a> {
    summary: &'a linext::SurveySummary,
    violations: &'a [linext::survey::ViolationDump],
    records: &'a [SurveyRecord],
}

fn survey(ctx: &Ctx, nmax: usize, long_running: bool) -> Result<(), CliError> {
    if nmax == 0 || nmax > SURVEY_MAX_SIZE {
        return Err(CliError::Input(format!(
            "--nmax must be in 1..={SURVEY_MAX_SIZE}"
        )));
    }
    if nmax > GATE_SIZE && !long_running {
        return Err(CliError::Resource(format!(
            "--nmax {nmax} takes a long time; pass --long-running to allow it"
        )));
    }
    let checkpoint = match (&ctx.out, long_running) {
        (Some(out), true) => Some(sibling(out, "checkpoint.jsonl")),
        _ => None,
    };
    let prior = match &checkpoint {
        Some(cp) if cp.exists() => {
            let text = fs::read_to_string(cp)
                .map_err(|e| CliError::Input(format!("{}: {e}", cp.display())))?;
            let recs = load_records(&text, ctx.tol())?;
            eprintln!("resuming from {} ({} records)", cp.display(), recs.len());
            recs
        }
        _ => Vec::new(),
    };
    let mut sink_file = match &checkpoint {
        Some(cp) => {
            let fresh = !cp.exists();
            let mut f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(cp)
                .map_err(|e| CliError::Input(format!("{}: {e}", cp.display())))?;
            if fresh {
                f.write_all(meta_line(&ctx.meta).as_bytes())
                    .map_err(|e| CliError::Input(e.to_string()))?;
            }
            Some(f)
        }
        None => None,
    };
    let survey = verify_all_resumable(nmax, ctx.tol(), prior, |rec| {
        if let Some(f) = sink_file.as_mut() {
            writeln!(f, "{}", rec.to_jsonl()).map_err(|e| linext::Error::Io(e.to_string()))?;
        }
        Ok(())
    })?;
    drop(sink_file);

    let s = &survey.summary;
    eprintln!(
        "checked {} non-chain classes ({} classes of sizes 2..={nmax}); violations: bound {}, negative {}, tightness {}",
        s.checked, s.classes_from_size_two, s.bound_violations, s.negative_eigenvalue_violations, s.tightness_violations
    );
    match ctx.format {
        Format::Json => ctx.json(&SurveyDocument {
            summary: s,
            violations: &survey.violations,
            records: &survey.records,
        })?,
        Format::Jsonl => emit(
            ctx.out.as_deref(),
            &(meta_line(&ctx.meta) + &survey.records_jsonl()),
        )?,
        Format::Csv => ctx.csv(&survey.records_csv())?,
    }
    if !survey.violations.is_empty() {
        if let (Some(out), false) = (&ctx.out, ctx.format == Format::Json) {
            let path = sibling(out, "violations.json");
            write_atomic(&path, &json_document(&ctx.meta, &survey.violations))?;
        }
    }
    if let Some(cp) = &checkpoint {
        let _ = fs::remove_file(cp);
    }
    if !s.is_clean() {
        return Err(CliError::Violation(format!(
            "{} violating classes",
            survey.violations.len()
        )));
    }
    Ok(())
}

fn profile_csv(profile: &[(usize, f64)]) -> String {
    let mut s = String::from("k,distance\n");
    for (k, d) in profile {
        s.push_str(&format!("{k},{d}\n"));
    }
    s
}

fn mix(
    ctx: &Ctx,
    source: &PosetSource,
    epsilon: f64,
    chain: &str,
    from_least: bool,
    compare: bool,
) -> Result<(), CliError> {
    check_epsilon(epsilon)?;
    let p = load_poset(source)?;
    if compare {
        let c = compare_chains(&p, epsilon)?;
        return ctx.write(&c, None);
    }
    let spec = parse_chain(chain)?;
    let ext = ExtensionSet::enumerate(&p);
    let m = build_matrix(&p, &ext, spec);
    let start = if from_least {
        Some(
            ext.index_of(&LinearExtension(p.least_extension()))
                .expect("least extension"),
        )
    } else {
        None
    };
    let mut r = exact_mixing_time(&m, epsilon, start)?;
    r.chain = Some(spec.to_string());
    ctx.write(&r, Some(&|| profile_csv(&r.profile)))?;
    if start.is_none() && !(r.sandwich_holds && r.diameter_bound_holds) {
        return Err(CliError::Violation("mixing time outside its bounds".into()));
    }
    Ok(())
}

fn scaling(
    ctx: &Ctx,
    n_from: usize,
    n_to: usize,
    count: usize,
    epsilon: f64,
) -> Result<(), CliError> {
    check_epsilon(epsilon)?;
    if count == 0 {
        return Err(CliError::Input("--count must be positive".into()));
    }
    if n_to > 9 {
        return Err(CliError::Resource("sizes above 9 are not supported".into()));
    }
    let t: ScalingTable = scaling_experiment(n_from, n_to, count, epsilon, ctx.seed())?;
    eprintln!(
        "rms residual: n log n {:.4}, n^2 log n {:.4}",
        t.fit_nlogn.rms_residual, t.fit_n2logn.rms_residual
    );
    match ctx.format {
        Format::Csv => {
            ctx.csv(&t.rows_csv())?;
            let summary = ctx.meta.csv_comment() + &t.summary_csv();
            match &ctx.out {
                Some(out) => write_atomic(&sibling(out, "summary.csv"), &summary),
                None => emit(None, &summary),
            }
        }
        _ => ctx.write(&t, None),
    }
}

#[derive(Serialize)]
struct Frequency {
    extension: String,
    count: usize,
    frequency: f64,
}

#[derive(Serialize)]
struct SampleDocument {
    count: usize,
    burn_in: BurnIn,
    burn_in_steps: usize,
    start: LinearExtension,
    frequencies: Vec<Frequency>,
    samples: Vec<String>,
}

fn sample(
    ctx: &Ctx,
    source: &PosetSource,
    count: usize,
    paranoid: bool,
    burn_in: Option<usize>,
) -> Result<(), CliError> {
    let p = load_poset(source)?;
    if count == 0 {
        return Err(CliError::Input("--count must be positive".into()));
    }
    let mode = match (paranoid, burn_in) {
        (true, _) => BurnIn::Paranoid,
        (false, Some(k)) => BurnIn::Steps(k),
        (false, None) => BurnIn::Conjectured,
    };
    let steps = burn_in_steps(&p, mode)?;
    let samples = sample_extensions(&p, count, BurnIn::Steps(steps), ctx.seed())?;
    let ext = ExtensionSet::enumerate(&p);
    let mut counts = vec![0usize; ext.len()];
    for s in &samples {
        counts[ext.index_of(s).expect("sample is an extension")] += 1;
    }
    let frequencies: Vec<Frequency> = ext
        .iter()
        .zip(&counts)
        .map(|(w, &c)| Frequency {
            extension: w.to_string(),
            count: c,
            frequency: c as f64 / count as f64,
        })
        .collect();
    let doc = SampleDocument {
        count,
        burn_in: mode,
        burn_in_steps: steps,
        start: LinearExtension(p.least_extension()),
        samples: samples.iter().map(|s| s.to_string()).collect(),
        frequencies,
    };
    let csv = || {
        let mut s = String::from("extension,count,frequency\n");
        for f in &doc.frequencies {
            s.push_str(&format!("{},{},{}\n", f.extension, f.count, f.frequency));
        }
        s
    };
    ctx.write(&doc, Some(&csv))
}

#[derive(Serialize)]
struct LabelledMatrix {
    rows: Vec<String>,
    matrix: MatrixJson,
}

#[derive(Serialize)]
struct NshapeDocument {
    certificate: linext::RankOneCertificate,
    two_chains: LabelledMatrix,
    union: LabelledMatrix,
}

fn nshape(ctx: &Ctx, n: usize, k: usize) -> Result<(), CliError> {
    let cert = nshape_rank_one_certificate(n, k)?;
    let (ext, m_p, m_union) = nshape_union_matrix(n, k)?;
    let rows: Vec<String> = ext.iter().map(|w| w.to_string()).collect();
    let verified = cert.verified;
    let doc = NshapeDocument {
        certificate: cert,
        two_chains: LabelledMatrix {
            rows: rows.clone(),
            matrix: m_p.to_json(),
        },
        union: LabelledMatrix {
            rows,
            matrix: m_union.to_json(),
        },
    };
    ctx.write(&doc, None)?;
    if !verified {
        return Err(CliError::Violation(
            "rank-one identity does not hold".into(),
        ));
    }
    Ok(())
}

fn diameter(ctx: &Ctx, source: &PosetSource, count: Option<usize>) -> Result<(), CliError> {
    let p = load_poset(source)?;
    let chk = diameter_check(&p, count, ctx.seed())?;
    ctx.write(&chk, None)?;
    if !chk.holds() {
        return Err(CliError::Violation(
            "diameter or sorting-path check failed".into(),
        ));
    }
    Ok(())
}

fn scan(ctx: &Ctx, n: usize) -> Result<(), CliError> {
    if n > 5 {
        eprintln!("note: inclusion testing at n = {n} is slow");
    }
    let s = monotonicity_scan(n, ctx.tol())?;
    if s.needs_review {
        eprintln!(
            "{} pairs in {} duality orbit(s): flagged for review",
            s.pairs.len(),
            s.dual_orbits
        );
    }
    let csv = || {
        let mut out = String::from("sub,sup,lambda2_sub,lambda2_sup\n");
        for p in &s.pairs {
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.sub, p.sup, p.lambda2_sub, p.lambda2_sup
            ));
        }
        out
    };
    ctx.write(&s, Some(&csv))?;
    if !s.duality_closed {
        return Err(CliError::Violation(
            "pair set is not closed under duality".into(),
        ));
    }
    Ok(())
}

fn table(ctx: &Ctx, n: usize) -> Result<(), CliError> {
    let rows = inclusion_table(n)?;
    let csv = || {
        let mut out = String::from("canonical_covers,num_relations,num_extensions,lambda2\n");
        for r in &rows {
            let l = r.lambda2.map(|x| x.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{l}\n",
                r.covers, r.num_relations, r.num_extensions
            ));
        }
        out
    };
    ctx.write(&rows, Some(&csv))
}

fn matrix(ctx: &Ctx, source: &PosetSource, chain: &str) -> Result<(), CliError> {
    let p = load_poset(source)?;
    let spec = parse_chain(chain)?;
    let ext = ExtensionSet::enumerate(&p);
    let m = build_matrix(&p, &ext, spec);
    let rows: Vec<String> = ext.iter().map(|w| w.to_string()).collect();
    let csv = || {
        let vals = m.to_f64();
        let d = m.dim();
        let mut out = format!("extension,{}\n", rows.join(","));
        for (r, label) in rows.iter().enumerate() {
            let line: Vec<String> = vals[r * d..(r + 1) * d]
                .iter()
                .map(|v| v.to_string())
                .collect();
            out.push_str(&format!("{label},{}\n", line.join(",")));
        }
        out
    };
    let doc = LabelledMatrix {
        rows: rows.clone(),
        matrix: m.to_json(),
    };
    ctx.write(&doc, Some(&csv))
}

use std::fs;

use anyhow::{bail, Context, Result};
use qsdc_core::capacity::{analyze as analyze_scheme, ConsistencyClass};
use qsdc_core::swap::{verify_general, verify_quartet};
use qsdc_core::{
    consistency_classes, scheme_file, standard_scheme, BellOutcome, EncodingScheme, Error,
    EveModel, GuessMethod, Message, OperatorTuple, Protocol, SessionTranscript64, TrialSeed,
    VerificationReport64, MAX_PARTIES,
};
use serde::Serialize;

use crate::output::{render, CsvTable, Document};
use crate::{AnalyzeArgs, ConsistencyArgs, Eve, RunArgs, SchemeArgs, VerifyArgs};

fn core_error(err: Error) -> anyhow::Error {
    match err {
        Error::PartyCount { parties, min, max } => anyhow::anyhow!(
            "M={parties} is outside {min}..={max}: simulation and exhaustive enumeration are \
             guarded at M <= {MAX_PARTIES} (2(M+1) qubits); pass --parties {max} or less"
        ),
        other => other.into(),
    }
}

fn load_scheme(args: &SchemeArgs) -> Result<EncodingScheme> {
    if args.scheme == "standard" {
        return standard_scheme(args.parties.unwrap_or(3)).map_err(core_error);
    }
    let text = fs::read_to_string(&args.scheme)
        .with_context(|| format!("reading scheme file {}", args.scheme))?;
    let scheme = scheme_file::parse(&text)
        .map_err(core_error)
        .with_context(|| format!("parsing scheme file {}", args.scheme))?;
    if let Some(p) = args.parties {
        if p != scheme.parties() {
            bail!(
                "--parties {p} does not match parties = {} in {}",
                scheme.parties(),
                args.scheme
            );
        }
    }
    Ok(scheme)
}

fn join<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Serialize)]
struct RunDocument {
    parties: usize,
    scheme_id: String,
    seed: u64,
    trials: u64,
    transcripts: Vec<SessionTranscript64>,
}

pub fn run(args: &RunArgs) -> Result<Document> {
    let scheme = load_scheme(&args.scheme)?;
    let protocol = Protocol::new(scheme).map_err(core_error)?;
    let transcripts = (0..args.trials)
        .map(|k| protocol.run_trial::<f64>(TrialSeed::new(args.seed, k)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(core_error)?;
    if let Some(bad) = transcripts.iter().find(|t| t.decoded != t.message) {
        bail!(
            "trial {}: message {} decoded as {}",
            bad.trial,
            bad.message,
            bad.decoded
        );
    }
    let doc = RunDocument {
        parties: protocol.scheme().parties(),
        scheme_id: protocol.scheme().id(),
        seed: args.seed,
        trials: args.trials,
        transcripts,
    };
    let body = render(args.output.format, &doc, || CsvTable {
        header: vec![
            "trial",
            "seed",
            "message",
            "operators",
            "sender_outcomes",
            "central_outcome",
            "joint_probability",
            "decoded",
        ],
        rows: doc
            .transcripts
            .iter()
            .map(|t| {
                vec![
                    t.trial.to_string(),
                    t.seed.to_string(),
                    t.message.to_string(),
                    t.operators.to_string(),
                    join(&t.sender_outcomes),
                    t.central_outcome.to_string(),
                    t.joint_probability.to_string(),
                    t.decoded.to_string(),
                ]
            })
            .collect(),
    })?;
    Ok(Document {
        body,
        success: true,
    })
}

pub fn analyze(args: &AnalyzeArgs) -> Result<Document> {
    let scheme = load_scheme(&args.scheme)?;
    let eve = match args.eve {
        Eve::Public => EveModel::Public,
        Eve::Secret => EveModel::Secret(GuessMethod::default_for(
            scheme.parties(),
            args.trials,
            args.seed,
        )),
    };
    let report = analyze_scheme::<f64>(&scheme, eve).map_err(core_error)?;
    let body = render(args.output.format, &report, || CsvTable {
        header: vec![
            "parties",
            "message_entropy_bits",
            "eve_public_info_bits",
            "secret_capacity_bits",
            "diana_info_bits",
            "eve_secret_scheme_guess_prob",
            "eve_secret_scheme_guess_stderr",
            "consistency_class_size",
        ],
        rows: vec![vec![
            report.parties.to_string(),
            report.message_entropy_bits.to_string(),
            report.eve_public_info_bits.to_string(),
            report.secret_capacity_bits.to_string(),
            report.diana_info_bits.to_string(),
            report.eve_secret_scheme_guess_prob.to_string(),
            report.eve_secret_scheme_guess_stderr.to_string(),
            report
                .consistency_class_size
                .map(|s| s.to_string())
                .unwrap_or_default(),
        ]],
    })?;
    Ok(Document {
        body,
        success: true,
    })
}

#[derive(Serialize)]
struct VerifyDocument {
    parties: usize,
    passed: bool,
    checked: usize,
    failed: usize,
    reports: Vec<VerificationReport64>,
}

pub fn verify_swap(args: &VerifyArgs) -> Result<Document> {
    let parties = args.parties;
    let tuples = if args.all {
        OperatorTuple::all(parties).map_err(core_error)?
    } else if let Some(ops) = &args.ops {
        vec![ops.parse::<OperatorTuple>().map_err(core_error)?]
    } else {
        vec![OperatorTuple::identity(parties).map_err(core_error)?]
    };
    let reports = tuples
        .iter()
        .map(|ops| {
            if parties == 3 {
                verify_quartet::<f64>(ops)
            } else {
                verify_general::<f64>(parties, ops)
            }
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(core_error)?;
    let failed = reports.iter().filter(|r| !r.passed).count();
    let doc = VerifyDocument {
        parties,
        passed: failed == 0,
        checked: reports.len(),
        failed,
        reports,
    };
    let body = render(args.output.format, &doc, || CsvTable {
        header: vec![
            "parties",
            "operators",
            "passed",
            "term_count",
            "expected_term_count",
            "modulus",
            "uniform_modulus",
            "parseval",
            "max_deviation",
        ],
        rows: doc
            .reports
            .iter()
            .map(|r| {
                vec![
                    r.parties.to_string(),
                    r.operators.to_string(),
                    r.passed.to_string(),
                    r.term_count.to_string(),
                    r.expected_term_count.to_string(),
                    r.modulus.to_string(),
                    r.uniform_modulus.to_string(),
                    r.parseval.to_string(),
                    r.max_deviation.to_string(),
                ]
            })
            .collect(),
    })?;
    Ok(Document {
        body,
        success: doc.passed,
    })
}

#[derive(Serialize)]
struct ClassRow<'a> {
    sender_outcomes: &'a [BellOutcome],
    class_size: usize,
    operators: &'a [OperatorTuple],
    messages: &'a [Message],
}

#[derive(Serialize)]
struct ConsistencyDocument<'a> {
    parties: usize,
    scheme_id: String,
    class_size: Option<usize>,
    classes: Vec<ClassRow<'a>>,
}

fn class_row<'a>(key: &'a [BellOutcome], class: &'a ConsistencyClass) -> ClassRow<'a> {
    ClassRow {
        sender_outcomes: key,
        class_size: class.messages.len(),
        operators: &class.operators,
        messages: &class.messages,
    }
}

pub fn consistency(args: &ConsistencyArgs) -> Result<Document> {
    let scheme = load_scheme(&args.scheme)?;
    let table = consistency_classes(&scheme).map_err(core_error)?;
    let doc = ConsistencyDocument {
        parties: scheme.parties(),
        scheme_id: scheme.id(),
        class_size: table.class_size(),
        classes: table
            .entries()
            .iter()
            .map(|(key, class)| class_row(key, class))
            .collect(),
    };
    let body = render(args.output.format, &doc, || CsvTable {
        header: vec!["sender_outcomes", "class_size", "operators", "messages"],
        rows: doc
            .classes
            .iter()
            .map(|c| {
                vec![
                    join(c.sender_outcomes),
                    c.class_size.to_string(),
                    join(c.operators),
                    join(c.messages),
                ]
            })
            .collect(),
    })?;
    Ok(Document {
        body,
        success: true,
    })
}

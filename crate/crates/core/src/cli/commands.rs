use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::json;

use super::{report_error, Cli, Command, Failure, Format, Io};
use crate::cbn::{fit_cpts, sample, validate, Backend, CausalBayesianNetwork, Dataset, ModelDocument};
use crate::fixtures;
use crate::kg::{build_kg, CausalKnowledgeGraph};
use crate::mediation::{decompose, EffectReport, EffectSpec};
use crate::ontology::{validate_roles, RoleMapping};
use crate::query::{evaluate, explain, format_value, parse_query, QueryResult, SyntaxError};
use crate::rdfstar;

type CmdResult = Result<(), Failure>;

pub(super) fn dispatch(cli: &Cli, io: &mut Io<'_>) -> CmdResult {
    let format = cli.format;
    match &cli.command {
        Command::Validate { model } => cmd_validate(model, format, io),
        Command::Fit {
            skeleton,
            data,
            alpha,
            output,
        } => {
            let doc = load_document(skeleton)?;
            let file = fs::File::open(data).map_err(|e| io_failure(data, e))?;
            let dataset = Dataset::read_csv(file)
                .map_err(|e| Failure::Io(format!("{}: malformed CSV: {e}", data.display())))?;
            let fitted = fit_cpts(&doc, &dataset, *alpha)?;
            emit(io, output.as_deref(), &fitted.to_document().to_json_pretty())
        }
        Command::Effects {
            model,
            treatment,
            outcome,
            mediator,
            t0,
            t1,
        } => {
            let model = load_model(model)?;
            let spec = EffectSpec::with_states(
                &model,
                treatment,
                outcome,
                mediator.as_deref(),
                t0.as_deref(),
                t1.as_deref(),
            )?;
            let report = decompose(&model, &spec, Backend::default())?;
            let text = match format {
                Format::Json => to_json(&report),
                Format::Text => effect_text(&report),
            };
            write_all(io.stdout, &text)
        }
        Command::Build { model, roles, output } => {
            let model = load_model(model)?;
            let roles = load_roles(roles)?;
            let kg = cmd_build(&model, &roles)?;
            let text = rdfstar::serialize(&kg);
            emit(io, output.as_deref(), &text)?;
            if let Some(path) = output {
                let summary = match format {
                    Format::Json => to_json(&json!({"output": path, "statements": kg.len()})),
                    Format::Text => format!("wrote {} statements to {}\n", kg.len(), path.display()),
                };
                write_all(io.stdout, &summary)?;
            }
            Ok(())
        }
        Command::Query {
            model,
            query,
            kg,
            explain,
        } => {
            let model = load_model(model)?;
            let kg = kg.as_deref().map(load_kg).transpose()?;
            let text = answer(&model, kg.as_ref().filter(|_| *explain), query, format, true)?;
            write_all(io.stdout, &text)
        }
        Command::Shell { model, kg } => {
            let model = load_model(model)?;
            let kg = kg.as_deref().map(load_kg).transpose()?;
            shell(&model, kg.as_ref(), format, io)
        }
        Command::Example { name, output } => cmd_example(name, output, io),
        Command::Sample { model, rows, output } => {
            let model = load_model(model)?;
            let data = sample(&model, *rows, cli.seed);
            let mut buf = Vec::new();
            data.write_csv(&mut buf).map_err(|e| Failure::Io(e.to_string()))?;
            emit(io, output.as_deref(), &String::from_utf8(buf).expect("CSV of UTF-8 labels"))
        }
    }
}

fn cmd_validate(path: &Path, format: Format, io: &mut Io<'_>) -> CmdResult {
    let doc = load_document(path)?;
    let report = validate(&doc);
    match format {
        Format::Json => write_all(
            io.stdout,
            &to_json(&json!({"valid": report.is_empty(), "findings": report.findings})),
        )?,
        Format::Text if report.is_empty() => {
            let edges: usize = doc.variables.iter().map(|v| v.variable.parents.len()).sum();
            write_all(
                io.stdout,
                &format!(
                    "ok: {} variable{}, {edges} edge{}\n",
                    doc.variables.len(),
                    plural(doc.variables.len()),
                    plural(edges)
                ),
            )?;
        }
        Format::Text => {}
    }
    if report.is_empty() {
        Ok(())
    } else {
        let _ = write!(io.stderr, "{report}");
        Err(Failure::Domain(format!(
            "{}: {} finding(s)",
            path.display(),
            report.len()
        )))
    }
}

/// Role check, one effect report per declared pattern, graph assembly.
pub(crate) fn cmd_build(model: &CausalBayesianNetwork, roles: &RoleMapping) -> Result<CausalKnowledgeGraph, Failure> {
    let findings = validate_roles(model, roles);
    if !findings.is_empty() {
        return Err(Failure::Domain(format!("role mapping rejected:\n{findings}")));
    }
    let mut reports = Vec::new();
    for pattern in roles.declared_patterns() {
        let spec = EffectSpec::new(model, &pattern.treatment, &pattern.outcome, pattern.mediator.as_deref())?;
        reports.push(decompose(model, &spec, Backend::default())?);
    }
    Ok(build_kg(model, roles, &reports)?)
}

fn cmd_example(name: &str, dir: &Path, io: &mut Io<'_>) -> CmdResult {
    if !fixtures::EXAMPLES.contains(&name) {
        return Err(Failure::Domain(format!(
            "unknown example `{name}`; available: {}",
            fixtures::EXAMPLES.join(", ")
        )));
    }
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    let files = [
        ("collision.json", fixtures::collision_document().to_json_pretty()),
        ("roles.json", fixtures::collision_roles().to_json_pretty()),
        ("README.md", fixtures::collision_readme()),
    ];
    for (file, content) in &files {
        let path = dir.join(file);
        fs::write(&path, content).map_err(|e| io_failure(&path, e))?;
        let _ = writeln!(io.stdout, "{}", path.display());
    }
    Ok(())
}

fn shell(model: &CausalBayesianNetwork, kg: Option<&CausalKnowledgeGraph>, format: Format, io: &mut Io<'_>) -> CmdResult {
    let mut line = String::new();
    loop {
        if io.interactive {
            let _ = write!(io.stdout, "> ");
            let _ = io.stdout.flush();
        }
        line.clear();
        let read = io
            .stdin
            .read_line(&mut line)
            .map_err(|e| Failure::Io(format!("stdin: {e}")))?;
        if read == 0 {
            return Ok(());
        }
        let query = line.trim();
        if query.is_empty() || query.starts_with('#') {
            continue;
        }
        match query {
            ":quit" | ":q" | ":exit" => return Ok(()),
            ":help" => {
                write_all(io.stdout, SHELL_HELP)?;
                continue;
            }
            _ => {}
        }
        match answer(model, kg, query, format, false) {
            Ok(text) => write_all(io.stdout, &text)?,
            Err(Failure::Domain(message)) => {
                write_all(io.stdout, &format!("error: {}\n", message.trim_end()))?;
            }
            Err(other) => {
                report_error(io, other.message());
                return Err(other);
            }
        }
    }
}

const SHELL_HELP: &str = "\
queries:
  P(Y=y, ... | E=e, ..., do(X=x, ...))
  TCE(T -> Y) | NDE(T -> Y | via M) | NIE(T -> Y | via M, t0=a, t1=b)
  PN(X=x -> Y=y)
commands: :help :quit
";

/// Parse, evaluate and render one query. With a graph, an explanation is
/// appended.
fn answer(
    model: &CausalBayesianNetwork,
    kg: Option<&CausalKnowledgeGraph>,
    query: &str,
    format: Format,
    pretty: bool,
) -> Result<String, Failure> {
    let ast = parse_query(query).map_err(|e| Failure::Domain(syntax_message(query, &e)))?;
    let result = evaluate(&ast, model)?;
    let explanation = kg.map(|kg| explain(&result, kg, &ast));
    Ok(match format {
        Format::Json => {
            let value = json!({"query": query, "result": result, "explanation": explanation});
            if pretty {
                to_json(&value)
            } else {
                serde_json::to_string(&value).expect("serializable") + "\n"
            }
        }
        Format::Text => {
            let mut text = result_text(&result);
            if let Some(e) = explanation {
                text.push_str(&e);
            }
            text
        }
    })
}

fn result_text(result: &QueryResult) -> String {
    match result {
        QueryResult::Probability { value, .. } => format!("{}\n", format_value(*value)),
        QueryResult::Effect { value, report, .. } => {
            let mut s = format!("{}\n", format_value(*value));
            for w in &report.warnings {
                s.push_str(&format!("warning: {w}\n"));
            }
            s
        }
        QueryResult::Necessity { interval, .. } => {
            format!("[{}, {}]\n", format_value(interval.lo), format_value(interval.hi))
        }
    }
}

fn syntax_message(query: &str, e: &SyntaxError) -> String {
    let line = query.lines().nth(e.line - 1).unwrap_or("");
    let pad: String = line.chars().take(e.column.saturating_sub(1)).map(|c| if c == '\t' { '\t' } else { ' ' }).collect();
    format!("{e}\n  {line}\n  {pad}^")
}

fn effect_text(report: &EffectReport) -> String {
    let spec = &report.spec;
    let mut s = format!(
        "treatment: {} ({} → {})\noutcome: {}\n",
        spec.treatment, spec.t0, spec.t1, spec.outcome
    );
    if let Some(m) = &spec.mediator {
        s.push_str(&format!("mediator: {m}\n"));
    }
    s.push_str(&format!("TCE: {}\n", format_value(report.tce)));
    for (label, value) in [
        ("NDE", report.nde),
        ("NIE", report.nie),
        ("NIE (reversed)", report.nie_reversed),
    ] {
        if let Some(v) = value {
            s.push_str(&format!("{label}: {}\n", format_value(v)));
        }
    }
    for w in &report.warnings {
        s.push_str(&format!("warning: {w}\n"));
    }
    s
}

fn plural(n: usize) -> &'static str {
    if n == 1 {
        ""
    } else {
        "s"
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn load_document(path: &Path) -> Result<ModelDocument, Failure> {
    ModelDocument::from_json(&read_text(path)?)
        .map_err(|e| Failure::Io(format!("{}: ill-formed model file: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<CausalBayesianNetwork, Failure> {
    let doc = load_document(path)?;
    CausalBayesianNetwork::from_document(&doc).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn load_roles(path: &Path) -> Result<RoleMapping, Failure> {
    RoleMapping::from_json(&read_text(path)?)
        .map_err(|e| Failure::Io(format!("{}: ill-formed role mapping: {e}", path.display())))
}

fn load_kg(path: &Path) -> Result<CausalKnowledgeGraph, Failure> {
    let bytes = fs::read(path).map_err(|e| io_failure(path, e))?;
    rdfstar::parse_bytes(&bytes).map_err(|e| Failure::Io(format!("{}:{e}", path.display())))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn write_all(out: &mut dyn Write, text: &str) -> CmdResult {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::Io(format!("write failed: {e}")))
}

fn emit(io: &mut Io<'_>, path: Option<&Path>, text: &str) -> CmdResult {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_failure(p, e)),
        None => write_all(io.stdout, text),
    }
}

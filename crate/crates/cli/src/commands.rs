use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use pwlfit::codegen::emit_curve_literal;
use pwlfit::model::component_to_json;
use pwlfit::{
    attribute_failures, distill_model, emit_model_literal, fit_pwl_report, Component, CurveModel,
    TeacherSampleTable,
};

use crate::table;
use crate::{AttributeArgs, DistillArgs, EmitArg, EvalArgs, FitArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

impl From<pwlfit::Error> for CliError {
    fn from(e: pwlfit::Error) -> Self {
        match e {
            pwlfit::Error::InvalidConfig(_) | pwlfit::Error::InvalidBounds { .. } => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

pub(crate) fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write(path: Option<&PathBuf>, text: &str) -> CliResult {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Data(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Data(format!("stdout: {e}"))),
    }
}

pub fn fit(args: &FitArgs) -> CliResult {
    let points = table::read_points(&args.input)?;
    let report = fit_pwl_report(&points, &args.fit.config())?;
    let component = Component::Pwl(report.curve.with_name(&args.name));
    let mut text = match args.emit {
        EmitArg::Literal => emit_curve_literal(&component, args.sig_digits),
        EmitArg::Json => component_to_json(&component)?,
    };
    text.push('\n');
    write(args.out.as_ref(), &text)
}

fn load_teacher(path: &Path) -> CliResult<TeacherSampleTable> {
    TeacherSampleTable::from_json(&read(path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn distill(args: &DistillArgs) -> CliResult {
    let teacher = load_teacher(&args.teacher)?;
    let model = distill_model(&teacher, &args.fit.config())?;
    let mut json = model.to_json()?;
    json.push('\n');
    write(Some(&args.out), &json)?;
    if let Some(path) = &args.emit_code {
        write(Some(path), &emit_model_literal(&model, args.sig_digits))?;
    }
    Ok(())
}

pub fn eval(args: &EvalArgs) -> CliResult {
    let model = CurveModel::from_json(&read(&args.model)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.model.display())))?;
    let scored = table::score_csv(&model, &read(&args.input)?)?;
    write(args.out.as_ref(), &scored)
}

pub fn attribute(args: &AttributeArgs) -> CliResult {
    let teacher = load_teacher(&args.teacher)?;
    let names: Vec<&str> = teacher.features().iter().map(|f| f.name.as_str()).collect();
    let eval = table::read_eval_set(&read(&args.eval)?, &names)?;
    let report = attribute_failures(&teacher, &eval, &args.fit.config())?;
    write(args.out.as_ref(), &report.to_csv())
}

use std::path::Path;

use nalgebra::DVector;
use rayon::prelude::*;
use serde_json::{json, Value};

use rotom_core::centroidal::{com_acceleration_bound_check, fictitious_force};
use rotom_core::robot_file::load_robot_file;
use rotom_core::search::{
    find_rotom_zeros, minimize_rotom, DescentSettings, SeedStatus, ZeroSearchSettings,
};
use rotom_core::transmissibility::{ellipsoid, rotom, sample_ellipsoid_boundary};
use rotom_core::{centroidal_state, ChainModel, Configuration};

use crate::args::{parse_range, parse_vector, GridRange};
use crate::output::{CsvTable, OutputRecord};
use crate::{Cli, CliError, Command, DescentArgs, Format, ZeroArgs};

/// Executes `cli` and returns the text to emit.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let fmt = cli.format;
    let deg = cli.degrees;
    match &cli.command {
        Command::Describe { robot } => describe(robot, fmt.unwrap_or(Format::Json)),
        Command::Eval { robot, q, force } => {
            eval(robot, q, force, deg, fmt.unwrap_or(Format::Json))
        }
        Command::Ellipsoid { robot, q, samples } => {
            ellipsoid_cmd(robot, q, *samples, deg, fmt.unwrap_or(Format::Json))
        }
        Command::Sweep {
            robot,
            joints,
            ranges,
            force,
            index,
            q,
        } => sweep(
            robot,
            joints,
            ranges,
            force.as_deref(),
            *index,
            q.as_deref(),
            deg,
            fmt.unwrap_or(Format::Csv),
        ),
        Command::Minimize {
            robot,
            q0,
            force,
            descent,
        } => minimize(robot, q0, force, descent, deg, fmt.unwrap_or(Format::Json)),
        Command::Zeros {
            robot,
            force,
            search,
        } => zeros(robot, force, search, fmt.unwrap_or(Format::Json)),
    }
}

fn angles(text: &str, degrees: bool) -> Result<Vec<f64>, CliError> {
    let mut v = parse_vector(text)?;
    if degrees {
        v.iter_mut().for_each(|a| *a = a.to_radians());
    }
    Ok(v)
}

fn floats(v: impl IntoIterator<Item = f64>) -> Value {
    Value::Array(v.into_iter().map(|x| json!(x)).collect())
}

fn dvec(v: &DVector<f64>) -> Value {
    floats(v.iter().copied())
}

fn axis_names(dim: usize) -> &'static [&'static str] {
    &["x", "y", "z"][..dim]
}

fn describe(robot: &Path, format: Format) -> Result<String, CliError> {
    let model = load_robot_file(robot)?;
    let n = model.dof();
    let summary = format!(
        "{n} joint{}, total mass {} kg, task_dim {}",
        if n == 1 { "" } else { "s" },
        model.total_mass(),
        model.task_dim().dim()
    );
    let limits: Vec<Value> = model
        .joints()
        .iter()
        .map(|j| j.limits.map_or(Value::Null, |(lo, hi)| floats([lo, hi])))
        .collect();
    match format {
        Format::Json => {
            let results = json!({
                "name": model.name(),
                "joints": n,
                "links": model.links().len(),
                "total_mass": model.total_mass(),
                "task_dim": model.task_dim().dim(),
                "limits": limits,
                "summary": summary,
            });
            let inputs = json!({ "robot": robot.display().to_string() });
            Ok(OutputRecord::new("describe", inputs, results).to_json())
        }
        Format::Csv => {
            let mut table = CsvTable::new(
                ["joints", "links", "total_mass", "task_dim"]
                    .map(String::from)
                    .to_vec(),
            );
            table.rows.push(vec![
                n.to_string(),
                model.links().len().to_string(),
                crate::output::format_number(model.total_mass()),
                model.task_dim().dim().to_string(),
            ]);
            Ok(table.render())
        }
    }
}

fn eval(
    robot: &Path,
    q: &str,
    force: &str,
    degrees: bool,
    format: Format,
) -> Result<String, CliError> {
    let model = load_robot_file(robot)?;
    let q = Configuration::new(&model, angles(q, degrees)?)?;
    let force = parse_vector(force)?;
    let state = centroidal_state(&model, &q)?;
    let result = fictitious_force(&state, &force)?;
    let bound_ok = com_acceleration_bound_check(&state, &force)?;
    match format {
        Format::Json => {
            let inputs = json!({
                "robot": robot.display().to_string(),
                "q": floats(q.as_slice().iter().copied()),
                "force": floats(force.iter().copied()),
                "degrees": degrees,
            });
            let results = json!({
                "rotom": result.rotom,
                "fictitious_force": dvec(&result.fictitious),
                "reaction": dvec(&result.reaction),
                "accel": dvec(&result.accel),
                "com_position": dvec(&state.com_position),
                "accel_bound_ok": bound_ok,
            });
            Ok(OutputRecord::new("eval", inputs, results).to_json())
        }
        Format::Csv => {
            let axes = axis_names(state.task_dim());
            let mut header = vec!["rotom".to_string()];
            for prefix in ["f", "reaction", "accel", "com"] {
                header.extend(axes.iter().map(|a| format!("{prefix}_{a}")));
            }
            let mut table = CsvTable::new(header);
            table.push_numbers(
                std::iter::once(result.rotom)
                    .chain(result.fictitious.iter().copied())
                    .chain(result.reaction.iter().copied())
                    .chain(result.accel.iter().copied())
                    .chain(state.com_position.iter().copied()),
            );
            Ok(table.render())
        }
    }
}

fn ellipsoid_cmd(
    robot: &Path,
    q: &str,
    samples: Option<usize>,
    degrees: bool,
    format: Format,
) -> Result<String, CliError> {
    let model = load_robot_file(robot)?;
    let q = Configuration::new(&model, angles(q, degrees)?)?;
    let state = centroidal_state(&model, &q)?;
    let e = ellipsoid(&state)?;
    let boundary = samples
        .map(|n| sample_ellipsoid_boundary(&e, n))
        .transpose()?;
    let axes = axis_names(e.dim());
    match format {
        Format::Json => {
            let inputs = json!({
                "robot": robot.display().to_string(),
                "q": floats(q.as_slice().iter().copied()),
                "samples": samples,
                "degrees": degrees,
            });
            let mut results = json!({
                "center": dvec(&e.center),
                "eigenvalues": floats(e.eigenvalues.iter().copied()),
                "eigenvectors": Value::Array(e.eigenvectors.iter().map(dvec).collect()),
                "index": e.index,
            });
            if let Some(points) = &boundary {
                results["boundary"] = Value::Array(points.iter().map(dvec).collect());
            }
            Ok(OutputRecord::new("ellipsoid", inputs, results).to_json())
        }
        Format::Csv => match boundary {
            Some(points) => {
                let mut table = CsvTable::new(axes.iter().map(|a| a.to_string()).collect());
                for p in points {
                    table.push_numbers(p.iter().copied());
                }
                Ok(table.render())
            }
            None => {
                let mut header = vec!["lambda".to_string()];
                header.extend(axes.iter().map(|a| format!("v_{a}")));
                let mut table = CsvTable::new(header);
                for (l, v) in e.eigenvalues.iter().zip(&e.eigenvectors) {
                    table.push_numbers(std::iter::once(*l).chain(v.iter().copied()));
                }
                Ok(table.render())
            }
        },
    }
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    robot: &Path,
    joints: &[usize],
    ranges: &[String],
    force: Option<&str>,
    index: bool,
    q: Option<&str>,
    degrees: bool,
    format: Format,
) -> Result<String, CliError> {
    let model = load_robot_file(robot)?;
    let n = model.dof();
    if joints.is_empty() || joints.len() > 2 {
        return Err(CliError::Arg("sweep takes one or two --joint flags".into()));
    }
    if joints.iter().any(|&j| j == 0 || j > n) {
        return Err(CliError::Arg(format!("--joint must be in 1..={n}")));
    }
    if joints.len() == 2 && joints[0] == joints[1] {
        return Err(CliError::Arg("the two swept joints must differ".into()));
    }
    let force = match (force, index) {
        (Some(f), false) => Some(parse_vector(f)?),
        (None, true) => None,
        _ => {
            return Err(CliError::Arg(
                "sweep needs exactly one of --force or --index".into(),
            ))
        }
    };
    let factor = if degrees { 1f64.to_radians() } else { 1.0 };
    let grids: Vec<GridRange> = match ranges.len() {
        1 => vec![parse_range(&ranges[0])?.scaled(factor); joints.len()],
        k if k == joints.len() => ranges
            .iter()
            .map(|r| parse_range(r).map(|g| g.scaled(factor)))
            .collect::<Result<_, _>>()?,
        _ => return Err(CliError::Arg("give one --range, or one per --joint".into())),
    };
    let base = match q {
        Some(text) => angles(text, degrees)?,
        None => vec![0.0; n],
    };
    if base.len() != n {
        return Err(rotom_core::Error::DimensionMismatch {
            expected: n,
            found: base.len(),
        }
        .into());
    }

    let axes: Vec<Vec<f64>> = grids.iter().map(GridRange::points).collect();
    let cells: Vec<Vec<f64>> = match axes.as_slice() {
        [a] => a.iter().map(|&x| vec![x]).collect(),
        [a, b] => a
            .iter()
            .flat_map(|&x| b.iter().map(move |&y| vec![x, y]))
            .collect(),
        _ => unreachable!(),
    };
    let values: Vec<f64> = cells
        .par_iter()
        .map(|cell| sweep_cell(&model, &base, joints, cell, force.as_deref()))
        .collect::<Result<_, CliError>>()?;

    let value_name = if force.is_some() { "rotom" } else { "index" };
    match format {
        Format::Csv => {
            let mut header: Vec<String> = joints.iter().map(|j| format!("q{j}")).collect();
            header.push(value_name.to_string());
            let mut table = CsvTable::new(header);
            for (cell, v) in cells.iter().zip(&values) {
                table.push_numbers(cell.iter().copied().chain([*v]));
            }
            Ok(table.render())
        }
        Format::Json => {
            let inputs = json!({
                "robot": robot.display().to_string(),
                "joints": joints,
                "ranges": grids.iter().map(|g| json!({"lo": g.lo, "hi": g.hi, "n": g.count})).collect::<Vec<_>>(),
                "force": force.as_ref().map(|f| floats(f.iter().copied())),
                "q": floats(base.iter().copied()),
                "degrees": degrees,
            });
            let rows: Vec<Value> = cells
                .iter()
                .zip(&values)
                .map(|(cell, v)| json!({ "q": floats(cell.iter().copied()), value_name: v }))
                .collect();
            Ok(OutputRecord::new("sweep", inputs, json!({ "rows": rows })).to_json())
        }
    }
}

fn sweep_cell(
    model: &ChainModel,
    base: &[f64],
    joints: &[usize],
    cell: &[f64],
    force: Option<&[f64]>,
) -> Result<f64, CliError> {
    let mut q = base.to_vec();
    for (&j, &v) in joints.iter().zip(cell) {
        q[j - 1] = v;
    }
    let state = centroidal_state(model, &Configuration::new(model, q)?)?;
    Ok(match force {
        Some(f) => rotom(&state, f)?,
        None => ellipsoid(&state)?.index,
    })
}

fn minimize(
    robot: &Path,
    q0: &str,
    force: &str,
    args: &DescentArgs,
    degrees: bool,
    format: Format,
) -> Result<String, CliError> {
    let model = load_robot_file(robot)?;
    let q0 = Configuration::new(&model, angles(q0, degrees)?)?;
    let force = parse_vector(force)?;
    let settings = DescentSettings {
        gain: args.gain,
        fd_step: args.fd_step,
        step_size: args.step_size,
        max_iters: args.max_iters,
        grad_tol: args.grad_tol,
        objective_tol: args.objective_tol,
    };
    let trace = minimize_rotom(&model, &q0, &force, &settings)?;
    let magnitude = force.iter().map(|f| f * f).sum::<f64>().sqrt();
    match format {
        Format::Json => {
            let inputs = json!({
                "robot": robot.display().to_string(),
                "q0": floats(q0.as_slice().iter().copied()),
                "force": floats(force.iter().copied()),
                "settings": {
                    "gain": settings.gain,
                    "step_size": settings.step_size,
                    "fd_step": settings.fd_step,
                    "max_iters": settings.max_iters,
                    "grad_tol": settings.grad_tol,
                    "objective_tol": settings.objective_tol,
                },
                "degrees": degrees,
            });
            let iterates: Vec<Value> = trace
                .iterates
                .iter()
                .map(|it| json!({ "q": floats(it.q.iter().copied()), "objective": it.objective }))
                .collect();
            let results = json!({
                "converged": trace.converged,
                "reason": trace.reason.as_str(),
                "initial_rotom": trace.iterates[0].objective / magnitude,
                "final_rotom": trace.last().objective / magnitude,
                "final_q": floats(trace.last().q.iter().copied()),
                "iterates": iterates,
            });
            Ok(OutputRecord::new("minimize", inputs, results).to_json())
        }
        Format::Csv => {
            let mut header = vec!["iter".to_string()];
            header.extend((1..=model.dof()).map(|j| format!("q{j}")));
            header.push("objective".into());
            let mut table = CsvTable::new(header);
            for (k, it) in trace.iterates.iter().enumerate() {
                let mut row = vec![k.to_string()];
                row.extend(
                    it.q.iter()
                        .chain([&it.objective])
                        .map(|x| crate::output::format_number(*x)),
                );
                table.rows.push(row);
            }
            Ok(table.render())
        }
    }
}

fn zeros(robot: &Path, force: &str, args: &ZeroArgs, format: Format) -> Result<String, CliError> {
    let model = load_robot_file(robot)?;
    let force = parse_vector(force)?;
    let settings = ZeroSearchSettings {
        seeds_per_joint: args.seeds_per_joint,
        residual_tol: args.residual_tol,
        dedupe_tol: args.dedupe_tol,
        max_newton_iters: args.max_newton_iters,
    };
    let report = find_rotom_zeros(&model, &force, &settings)?;
    match format {
        Format::Json => {
            let count = |s: SeedStatus| report.seeds.iter().filter(|o| o.status == s).count();
            let inputs = json!({
                "robot": robot.display().to_string(),
                "force": floats(force.iter().copied()),
                "settings": {
                    "seeds_per_joint": settings.seeds_per_joint,
                    "residual_tol": settings.residual_tol,
                    "dedupe_tol": settings.dedupe_tol,
                    "max_newton_iters": settings.max_newton_iters,
                },
            });
            let solutions: Vec<Value> = report
                .solutions
                .iter()
                .map(|s| json!({ "q": floats(s.q.iter().copied()), "residual": s.residual }))
                .collect();
            let results = json!({
                "solutions": solutions,
                "seeds": {
                    "total": report.seeds.len(),
                    "converged": count(SeedStatus::Converged),
                    "outside_limits": count(SeedStatus::OutsideLimits),
                    "not_converged": count(SeedStatus::NotConverged),
                    "singular": count(SeedStatus::Singular),
                },
            });
            let mut record = OutputRecord::new("zeros", inputs, results);
            if model.dof() >= 3 {
                record
                    .diagnostics
                    .push("zero set may be a continuum; solutions are representatives".into());
            }
            if report.solutions.is_empty() {
                record
                    .diagnostics
                    .push("no zero-RoToM configuration found".into());
            }
            Ok(record.to_json())
        }
        Format::Csv => {
            let mut header: Vec<String> = (1..=model.dof()).map(|j| format!("q{j}")).collect();
            header.push("residual".into());
            let mut table = CsvTable::new(header);
            for s in &report.solutions {
                table.push_numbers(s.q.iter().copied().chain([s.residual]));
            }
            Ok(table.render())
        }
    }
}
